"""Latency-shaping sweeps: fine-tune a base model per (alpha, beta) cell and score it."""

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import pandas as pd

from surit.config import ExperimentConfig, SweepRegime
from surit.data.synth import MixtureSample
from surit.errors import InvalidConfigError
from surit.logging_config import train_logger
from surit.model.evaluation import evaluate
from surit.model.training import UNMIX, train
from surit.neural.params import ModelParams

SWEEP_COLUMNS = ["system", "alpha", "beta", "SER", "WER", "t_e", "t_e/T"]

# (alpha, beta) grids; C rows fine-tune with the unmix module frozen, D rows train everything.
# The unshaped (1.0, 0.0) system is the base row "B" that run_sweep scores first.
PRESETS: dict[SweepRegime, list[tuple[float, float]]] = {
    SweepRegime.FROZEN: [
        (0.8, 0.0),
        (0.6, 0.0),
        (0.4, 0.0),
        (1.0, 1.0),
        (0.8, 1.0),
        (0.8, 3.0),
        (0.8, 5.0),
    ],
    SweepRegime.JOINT: [(0.8, 0.0), (0.6, 0.0), (0.8, 1.0)],
}
_PREFIX = {SweepRegime.FROZEN: "C", SweepRegime.JOINT: "D"}


@dataclass(frozen=True)
class SweepCell:
    system: str
    alpha: float
    beta: float


def sweep_cells(
    regime: SweepRegime,
    alphas: Sequence[float] | None = None,
    betas: Sequence[float] | None = None,
) -> list[SweepCell]:
    """Explicit alpha x beta grid, or the regime's preset when neither list is given."""
    if alphas is None and betas is None:
        grid = PRESETS[regime]
    else:
        grid = list(itertools.product(alphas or [1.0], betas or [0.0]))
    for alpha, beta in grid:
        if not 0.0 < alpha <= 1.0 or beta < 0.0:
            raise InvalidConfigError(f"invalid sweep cell alpha={alpha}, beta={beta}")
    return [
        SweepCell(system=f"{_PREFIX[regime]}{i}", alpha=alpha, beta=beta)
        for i, (alpha, beta) in enumerate(grid, start=1)
    ]


def run_sweep(
    config: ExperimentConfig,
    base_params: ModelParams,
    train_samples: Sequence[MixtureSample],
    eval_samples: Sequence[MixtureSample],
    cells: Sequence[SweepCell],
    *,
    include_base: bool = True,
) -> pd.DataFrame:
    """One row per system: the untuned base ("B") then every fine-tuned cell."""
    regime = config.sweep.regime
    frozen = (UNMIX,) if regime is SweepRegime.FROZEN else ()
    rows = []

    def score(system: str, alpha: float, beta: float, params: ModelParams) -> None:
        report = evaluate(params, config, eval_samples, system=system)
        rows.append(
            {
                "system": system,
                "alpha": alpha,
                "beta": beta,
                "SER": report.ser,
                "WER": report.wer,
                "t_e": report.latency.mean_t_e,
                "t_e/T": report.latency.mean_t_e_over_T,
            }
        )

    if include_base:
        score("B", config.latency.alpha, config.latency.beta, base_params)

    for cell in cells:
        cell_config = config.with_overrides(
            {
                "latency.alpha": cell.alpha,
                "latency.beta": cell.beta,
                "training.mode": "joint",
                "training.epochs": config.sweep.epochs,
            }
        )
        train_logger.info(
            "Fine-tuning sweep cell", system=cell.system, alpha=cell.alpha, beta=cell.beta, regime=regime.value
        )
        result = train(cell_config, train_samples, params=base_params, frozen=frozen)
        score(cell.system, cell.alpha, cell.beta, result.params)

    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
