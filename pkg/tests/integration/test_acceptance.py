"""End-to-end learnability and latency-shaping runs on the default synthetic task.

These train full-size models and take minutes; they are deselected unless
``-m slow`` is given.
"""

import pytest

from surit.config import ExperimentConfig, SweepRegime
from surit.data import generate_dataset
from surit.model import evaluate, run_sweep, sweep_cells, train

pytestmark = [pytest.mark.integration, pytest.mark.slow]


@pytest.fixture(scope="module")
def default_run():
    config = ExperimentConfig()
    dataset = generate_dataset(config)
    result = train(config, dataset.train)
    return config, dataset, result


def test_learnability(default_run):
    config, dataset, result = default_run
    report = evaluate(result.params, config, dataset.eval)
    assert report.wer <= 0.15
    assert report.ser <= 0.20
    first, last = result.epochs["L_joint"].iloc[0], result.epochs["L_joint"].iloc[-1]
    assert last < first


def test_latency_trend(default_run):
    config, dataset, result = default_run
    cells = sweep_cells(SweepRegime.FROZEN, [1.0, 0.6, 0.8], [0.0]) + sweep_cells(SweepRegime.FROZEN, [0.8], [1.0])
    frame = run_sweep(config, result.params, dataset.train, dataset.eval, cells, include_base=False)
    latency = frame.set_index(["alpha", "beta"])["t_e/T"]
    ser = frame.set_index(["alpha", "beta"])["SER"]
    assert latency[(0.6, 0.0)] <= latency[(1.0, 0.0)] - 0.05
    assert ser[(0.6, 0.0)] <= ser[(1.0, 0.0)] + 0.10
    assert latency[(0.8, 1.0)] < latency[(0.8, 0.0)]
