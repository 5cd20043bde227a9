"""Gate semantics: threshold boundary, stream state holding, monotonicity,
and the end-to-end rejection benefit."""

import numpy as np
import pytest

from myogate import gate as gate_mod
from myogate.classifier import CnnConfig, CnnModel, build_cnn_network
from myogate.data import LabeledWindow
from myogate.errors import ArgumentError, ConfigurationError
from myogate.experiments import (
    ExperimentSettings,
    build_known_stack,
    run_openset,
    synth_dataset,
)
from myogate.gate import DEFAULT_ACTION, Decision, GatePipeline, decide, run_stream
from myogate.metrics import RocPoint
from myogate.opengan import GanConfig, SelectedDiscriminator, build_discriminator


def constant_score_pipeline(score: float, tau: float, n_known=3):
    """CNN with zero weights (uniform output) and a discriminator whose final
    bias pins the sigmoid at ``score`` for every input."""
    config = CnnConfig(n_channel=2, n_sample_points=4, n_known=n_known)
    net = build_cnn_network(config)
    net.set_parameters([np.zeros_like(p) for p in net.parameters()])
    cnn = CnnModel(config=config, network=net, class_ids=tuple(range(1, n_known + 1)),
                   norm_stats=None)
    disc = build_discriminator(GanConfig(n_known=n_known))
    disc.set_parameters([np.zeros_like(p) for p in disc.parameters()])
    logit = float(np.log(score / (1.0 - score)))
    disc.parameters()[5][:] = logit  # final bias
    selected = SelectedDiscriminator(network=disc, selection_auc=1.0, tau=tau,
                                     roc=[RocPoint(tau, 0.0, 1.0)], selection_mode="fake-only")
    return GatePipeline(cnn=cnn, discriminator=selected)


def window(label=1, seed=0):
    rng = np.random.default_rng(seed)
    return LabeledWindow(rng.standard_normal((2, 4)).astype(np.float32), label, 0, 1)


class TestDecide:
    def test_score_above_tau_accepts_argmax(self):
        pipeline = constant_score_pipeline(score=0.9, tau=0.5)
        d = decide(pipeline, window())
        assert d.accepted and d.predicted_class == 1  # uniform output, lowest index wins
        assert d.score == pytest.approx(0.9, abs=1e-6)

    def test_score_below_tau_rejects(self):
        pipeline = constant_score_pipeline(score=0.3, tau=0.5)
        d = decide(pipeline, window())
        assert not d.accepted and d.predicted_class is None

    def test_score_exactly_tau_accepts(self):
        pipeline = constant_score_pipeline(score=0.5, tau=0.5)
        d = decide(pipeline, window())
        assert d.score == 0.5
        assert d.accepted

    def test_decision_deterministic(self):
        pipeline = constant_score_pipeline(score=0.7, tau=0.5)
        a = decide(pipeline, window(seed=3))
        b = decide(pipeline, window(seed=3))
        assert (a.accepted, a.predicted_class, a.score) == (b.accepted, b.predicted_class, b.score)

    def test_width_mismatch_rejected(self):
        config = CnnConfig(n_channel=2, n_sample_points=4, n_known=4)
        net = build_cnn_network(config)
        cnn = CnnModel(config=config, network=net, class_ids=(1, 2, 3, 4), norm_stats=None)
        disc = build_discriminator(GanConfig(n_known=3))
        selected = SelectedDiscriminator(network=disc, selection_auc=1.0, tau=0.5,
                                         roc=[], selection_mode="fake-only")
        with pytest.raises(ConfigurationError, match="width"):
            GatePipeline(cnn=cnn, discriminator=selected)


def scripted_decisions(script):
    return [
        Decision(accepted=cls is not None, predicted_class=cls,
                 score=0.9 if cls is not None else 0.1, features=np.zeros(3, np.float32))
        for cls in script
    ]


class TestRunStream:
    @pytest.fixture
    def pipeline(self):
        return constant_score_pipeline(score=0.9, tau=0.5)

    def test_timeline_holds_previous_action(self, pipeline, monkeypatch):
        script = [2, None, None, 5]
        monkeypatch.setattr(gate_mod, "decide_batch",
                            lambda p, ws: scripted_decisions(script))
        state, outcomes = run_stream(pipeline, [window(seed=i) for i in range(4)])
        assert state.action_timeline == [2, 2, 2, 5]
        assert state.current_action == 5
        assert [o.predicted_class for o in outcomes] == [2, None, None, 5]

    def test_all_rejects_stay_default(self, pipeline, monkeypatch):
        monkeypatch.setattr(gate_mod, "decide_batch",
                            lambda p, ws: scripted_decisions([None] * 5))
        state, _ = run_stream(pipeline, [window(seed=i) for i in range(5)])
        assert state.action_timeline == [DEFAULT_ACTION] * 5
        assert state.current_action is DEFAULT_ACTION

    def test_reject_never_mutates_state_property(self, pipeline, monkeypatch):
        rng = np.random.default_rng(4)
        for _ in range(30):
            script = [int(rng.integers(1, 4)) if rng.random() < 0.5 else None
                      for _ in range(int(rng.integers(1, 20)))]
            monkeypatch.setattr(gate_mod, "decide_batch",
                                lambda p, ws, s=script: scripted_decisions(s))
            state, _ = run_stream(pipeline, [window(seed=i) for i in range(len(script))])
            current = DEFAULT_ACTION
            for decision, executed in zip(state.log, state.action_timeline):
                if decision.accepted:
                    current = decision.predicted_class
                assert executed == current

    def test_empty_stream(self, pipeline):
        state, outcomes = run_stream(pipeline, [])
        assert state.log == [] and outcomes == []
        assert state.current_action is DEFAULT_ACTION

    def test_accept_class_equals_argmax(self):
        settings = ExperimentSettings(windows_per_class=30, cnn_epochs=6, gan_epochs=10)
        ds = synth_dataset(4, 2, settings, seed=3)
        stack = build_known_stack(ds.windows, ds.base_classes, seed=3, settings=settings)
        result = run_openset(stack, ds.windows, ds.mixture_classes, seed=3, settings=settings)
        pipeline = GatePipeline(cnn=stack.cnn, discriminator=result.selected)
        from myogate.classifier import classify
        for w in stack.test_windows[:20]:
            d = decide(pipeline, w)
            if d.accepted:
                _, idx = classify(stack.cnn, w)
                assert d.predicted_class == stack.cnn.class_ids[idx]

    def test_tau_monotonicity(self):
        pipeline = constant_score_pipeline(score=0.5, tau=0.5)
        windows = [window(seed=i) for i in range(10)]
        counts = []
        for tau in (0.1, 0.4, 0.5, 0.6, 0.9):
            pipeline.discriminator.tau = tau
            _, outcomes = run_stream(pipeline, windows)
            counts.append(sum(o.predicted_class is not None for o in outcomes))
        assert counts == sorted(counts, reverse=True)
        assert counts[2] == 10  # score == tau accepts


class TestEndToEnd:
    def test_rejection_strictly_reduces_aer(self):
        settings = ExperimentSettings(windows_per_class=50, cnn_epochs=12, gan_epochs=30)
        ds = synth_dataset(6, 4, settings, seed=0)
        stack = build_known_stack(ds.windows, ds.base_classes, seed=0, settings=settings)
        result = run_openset(stack, ds.windows, ds.mixture_classes, seed=0, settings=settings)
        assert result.reports["OpenGAN"].aer < result.reports["Open"].aer
        assert result.selected.selection_auc > 0.5

    def test_decision_log_export(self, tmp_path):
        pipeline = constant_score_pipeline(score=0.9, tau=0.5)
        windows = [window(label=lab, seed=i) for i, lab in enumerate((1, 2, 9))]
        state, _ = run_stream(pipeline, windows)
        gate_mod.export_decision_log(tmp_path / "log.csv", windows, state, known_classes=(1, 2, 3))
        lines = (tmp_path / "log.csv").read_text().splitlines()
        assert lines[0] == "index,true_class,known_flag,score,decision,executed_action"
        assert len(lines) == 4
        assert lines[3].startswith("2,9,0,")
