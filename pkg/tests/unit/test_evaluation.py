"""Unit tests for held-out scoring and latency sweeps."""

from dataclasses import replace

import pytest

from surit.config import SweepRegime
from surit.errors import EmptyInputError, InvalidConfigError, InvalidInputError
from surit.model import PRESETS, decode_sample, evaluate, run_sweep, sweep_cells
from surit.model.sweep import SWEEP_COLUMNS


@pytest.mark.unit
class TestEvaluate:
    """Test decoding and scoring of the tiny held-out split."""

    def test_report(self, tiny_config, tiny_params, tiny_dataset):
        events: list[dict] = []
        report = evaluate(tiny_params, tiny_config, tiny_dataset.eval, system="tiny", events=events)
        assert report.system == "tiny"
        assert report.n_utterances == len(tiny_dataset.eval)
        assert 0.0 <= report.ser <= 1.0
        assert report.wer >= 0.0
        assert report.wer <= report.wer_fixed_order
        assert all(0.0 <= rate <= 1.0 for rate in report.latency.emission_rate)
        assert 0.0 < report.latency.mean_t_e_over_T <= 1.0
        for record, sample in zip(report.utterances, tiny_dataset.eval, strict=True):
            assert record.utt_id == sample.utt_id
            assert 1 <= record.t_e <= record.frames
            assert 0 <= record.speaker_errors <= 2
        for row in events:
            assert set(row) == {"utt_id", "stream", "kind", "symbol", "frame"}
            assert row["stream"] in (1, 2)

    def test_speaker_events_carry_speaker_ids(self, tiny_config, tiny_params, tiny_dataset):
        events: list[dict] = []
        evaluate(tiny_params, tiny_config, tiny_dataset.eval, events=events)
        labels = {label for sample in tiny_dataset.eval for label in sample.inventory.labels}
        assert all(row["symbol"] in labels for row in events if row["kind"] == "speaker")

    def test_deterministic(self, tiny_config, tiny_params, tiny_dataset):
        a = evaluate(tiny_params, tiny_config, tiny_dataset.eval)
        b = evaluate(tiny_params, tiny_config, tiny_dataset.eval)
        assert a == b

    def test_empty(self, tiny_config, tiny_params):
        with pytest.raises(EmptyInputError):
            evaluate(tiny_params, tiny_config, [])

    def test_sample_without_inventory(self, tiny_config, tiny_params, tiny_sample):
        with pytest.raises(InvalidInputError):
            decode_sample(tiny_params, tiny_config, replace(tiny_sample, inventory=None))


@pytest.mark.unit
class TestSweepCells:
    """Test sweep grid construction."""

    def test_presets(self):
        frozen = sweep_cells(SweepRegime.FROZEN)
        joint = sweep_cells(SweepRegime.JOINT)
        assert [c.system for c in frozen] == [f"C{i}" for i in range(1, 8)]
        assert [c.system for c in joint] == ["D1", "D2", "D3"]
        assert [(c.alpha, c.beta) for c in frozen] == PRESETS[SweepRegime.FROZEN]

    def test_preset_labels(self):
        cells = {c.system: (c.alpha, c.beta) for c in sweep_cells(SweepRegime.FROZEN) + sweep_cells(SweepRegime.JOINT)}
        assert cells == {
            "C1": (0.8, 0.0),
            "C2": (0.6, 0.0),
            "C3": (0.4, 0.0),
            "C4": (1.0, 1.0),
            "C5": (0.8, 1.0),
            "C6": (0.8, 3.0),
            "C7": (0.8, 5.0),
            "D1": (0.8, 0.0),
            "D2": (0.6, 0.0),
            "D3": (0.8, 1.0),
        }

    def test_presets_leave_the_unshaped_system_to_the_base_row(self):
        for regime in SweepRegime:
            assert (1.0, 0.0) not in [(c.alpha, c.beta) for c in sweep_cells(regime)]

    def test_explicit_grid(self):
        cells = sweep_cells(SweepRegime.FROZEN, [1.0, 0.5], [0.0, 2.0])
        assert [(c.alpha, c.beta) for c in cells] == [(1.0, 0.0), (1.0, 2.0), (0.5, 0.0), (0.5, 2.0)]

    def test_single_axis(self):
        cells = sweep_cells(SweepRegime.JOINT, betas=[1.0, 3.0])
        assert [(c.alpha, c.beta) for c in cells] == [(1.0, 1.0), (1.0, 3.0)]

    @pytest.mark.parametrize("alphas,betas", [([0.0], [0.0]), ([1.2], None), (None, [-1.0])])
    def test_invalid_cells(self, alphas, betas):
        with pytest.raises(InvalidConfigError):
            sweep_cells(SweepRegime.FROZEN, alphas, betas)


@pytest.mark.unit
def test_run_sweep_rows(tiny_config, tiny_params, tiny_dataset):
    config = tiny_config.with_overrides({"sweep.epochs": 1})
    cells = sweep_cells(SweepRegime.FROZEN, [0.8], [1.0])
    frame = run_sweep(config, tiny_params, tiny_dataset.train, tiny_dataset.eval, cells)
    assert list(frame.columns) == SWEEP_COLUMNS
    assert frame["system"].tolist() == ["B", "C1"]
    assert frame.loc[1, "alpha"] == 0.8
    assert frame.loc[1, "beta"] == 1.0
    assert frame["SER"].between(0.0, 1.0).all()
