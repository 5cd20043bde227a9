"""Classifier tests: architecture shapes, training on separable synthetic
data, feature extraction, closed-set evaluation, and determinism."""

import numpy as np
import pytest

from myogate import nn
from myogate.classifier import (
    CnnConfig,
    CnnModel,
    build_cnn_network,
    classify,
    eval_closed,
    extract_features,
    load_cnn,
    save_cnn,
    train_cnn,
)
from myogate.data import (
    LabeledWindow,
    NormStats,
    SynthClassSpec,
    make_class_profiles,
    synth_generate,
)
from myogate.errors import ArgumentError, ConfigurationError, DataError


def db1_config(**kw):
    return CnnConfig(n_channel=10, n_sample_points=20, n_known=10, **kw)


def synth_six_classes(windows_per_class=40, seed=0):
    specs = []
    for c in range(6):
        amps = [0.0] * 6
        amps[c] = 1.0
        specs.append(SynthClassSpec(amplitudes=tuple(amps), band=(20.0, 45.0), noise_floor=0.05))
    return synth_generate(specs, windows_per_class, 6, 100.0, seed=seed)


def split_by_rep(windows, val_every=4):
    train = [w for w in windows if w.repetition_index % val_every != 0]
    val = [w for w in windows if w.repetition_index % val_every == 0]
    return train, val


def zeroed_model(config, class_ids):
    net = build_cnn_network(config)
    params = net.parameters()
    zeros = [np.zeros_like(p) for p in params]
    net.set_parameters(zeros)
    return CnnModel(config=config, network=net, class_ids=class_ids, norm_stats=None)


class TestArchitecture:
    def test_db1_shape_chain(self):
        config = db1_config()
        net = build_cnn_network(config)
        x = np.random.default_rng(0).standard_normal((2, 1, 10, 20)).astype(np.float32)
        out = net.layers[0].forward(x)
        assert out.shape == (2, 32, 10, 20)
        out = net.layers[2].forward(net.layers[1].forward(out))
        assert out.shape == (2, 32, 10, 20)
        flat = net.layers[4].forward(net.layers[3].forward(out))
        assert flat.shape == (2, 6400)
        final = net.forward(x)
        assert final.shape == (2, 10)

    def test_output_on_simplex(self):
        net = build_cnn_network(db1_config())
        x = np.random.default_rng(1).standard_normal((5, 1, 10, 20)).astype(np.float32)
        out = net.forward(x)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-6)
        assert (out > 0).all()

    def test_fc1_must_exceed_output(self):
        with pytest.raises(ConfigurationError, match="fc1_width"):
            CnnConfig(n_channel=4, n_sample_points=8, n_known=12, fc1_width=12)

    def test_all_zero_final_layer_uniform_output(self):
        config = CnnConfig(n_channel=2, n_sample_points=5, n_known=4)
        model = zeroed_model(config, (1, 2, 3, 4))
        w = LabeledWindow(np.random.default_rng(2).standard_normal((2, 5)).astype(np.float32), 1, 0, 1)
        features, pred = classify(model, w)
        np.testing.assert_allclose(features.values, 0.25, atol=1e-7)
        assert pred == 0  # tie broken toward the lowest index

    def test_gradient_check_sampled(self):
        config = CnnConfig(n_channel=3, n_sample_points=4, n_known=4)
        net = build_cnn_network(config).astype(np.float64)
        rng = np.random.default_rng(3)
        x = rng.standard_normal((4, 1, 3, 4))
        t = rng.integers(0, 4, size=4)
        err = nn.gradient_check(net, x, t, loss="cross_entropy",
                                max_elements_per_tensor=40, rng=np.random.default_rng(0))
        assert err < 1e-4


@pytest.fixture(scope="module")
def trained():
    windows = synth_six_classes()
    train, val = split_by_rep(windows)
    config = CnnConfig(n_channel=6, n_sample_points=20, n_known=6, epochs=25,
                       batch_size=32, seed=3)
    model, history = train_cnn(train, val, known_classes=[1, 2, 3, 4, 5, 6], config=config)
    return model, history, train, val


class TestTraining:
    def test_separable_data_reaches_95(self, trained):
        _, history, _, _ = trained
        assert history.best_epoch <= 50
        assert max(e.val_accuracy for e in history.epochs) >= 0.95

    def test_identical_distributions_stay_at_chance(self):
        spec = SynthClassSpec(amplitudes=(1.0, 1.0), band=(20.0, 45.0), noise_floor=0.1)
        windows = synth_generate([spec, spec], 60, 2, 100.0, seed=5)
        train, val = split_by_rep(windows, val_every=3)
        config = CnnConfig(n_channel=2, n_sample_points=20, n_known=2, epochs=10, seed=1)
        _, history = train_cnn(train, val, [1, 2], config)
        assert abs(history.epochs[-1].val_accuracy - 0.5) <= 0.1

    def test_same_seed_identical_history_and_weights(self):
        windows = synth_six_classes(windows_per_class=12, seed=2)
        train, val = split_by_rep(windows)
        config = CnnConfig(n_channel=6, n_sample_points=20, n_known=6, epochs=3, seed=9)
        m1, h1 = train_cnn(train, val, [1, 2, 3, 4, 5, 6], config)
        m2, h2 = train_cnn(train, val, [1, 2, 3, 4, 5, 6], config)
        assert h1 == h2
        for a, b in zip(m1.network.parameters(), m2.network.parameters()):
            np.testing.assert_array_equal(a, b)

    def test_empty_train_set_rejected(self):
        config = CnnConfig(n_channel=2, n_sample_points=5, n_known=2)
        with pytest.raises(ConfigurationError, match="empty"):
            train_cnn([], [], [1, 2], config)

    def test_label_outside_known_set_rejected(self):
        config = CnnConfig(n_channel=2, n_sample_points=5, n_known=2)
        bad = [LabeledWindow(np.zeros((2, 5), np.float32), 9, 0, 1)]
        with pytest.raises(DataError, match="9"):
            train_cnn(bad, [], [1, 2], config)

    def test_trained_model_argmax_matches_labels(self, trained):
        model, _, train, _ = trained
        correct = 0
        for w in train:
            _, pred = classify(model, w)
            correct += model.class_ids[pred] == w.class_label
        assert correct / len(train) >= 0.99

    def test_monotone_logit_transform_preserves_argmax(self, trained):
        model, _, _, val = trained
        before = [classify(model, w)[1] for w in val[:20]]
        final = model.network.layers[-2]
        final.w *= 3.0
        final.b *= 3.0
        try:
            after = [classify(model, w)[1] for w in val[:20]]
        finally:
            final.w /= 3.0
            final.b /= 3.0
        assert before == after


class TestFeatures:
    def test_order_and_simplex(self):
        config = CnnConfig(n_channel=2, n_sample_points=5, n_known=3)
        model = zeroed_model(config, (1, 2, 3))
        rng = np.random.default_rng(4)
        windows = [LabeledWindow(rng.standard_normal((2, 5)).astype(np.float32), 1 + i % 3, 0, 1)
                   for i in range(7)]
        feats = extract_features(model, windows)
        assert len(feats) == 7
        assert [f.class_label for f in feats] == [w.class_label for w in windows]
        for f in feats:
            assert f.source == "real"
            assert abs(f.values.sum() - 1.0) < 1e-6

    def test_known_features_more_confident_than_unknown(self):
        known_specs, unknown_specs = make_class_profiles(4, 4, channels=6, seed=8)
        known = synth_generate(known_specs, 30, 6, 100.0, seed=8)
        unknown = synth_generate(unknown_specs, 30, 6, 100.0, seed=9)
        train, val = split_by_rep(known)
        config = CnnConfig(n_channel=6, n_sample_points=20, n_known=4, epochs=20, seed=2)
        model, _ = train_cnn(train, val, [1, 2, 3, 4], config)
        known_conf = np.mean([f.values.max() for f in extract_features(model, val)])
        unknown_conf = np.mean([f.values.max() for f in extract_features(model, unknown)])
        assert known_conf > unknown_conf


    def test_logit_features_switch(self):
        config = CnnConfig(n_channel=2, n_sample_points=5, n_known=3, logit_features=True)
        model = zeroed_model(config, (1, 2, 3))
        model.network.layers[-2].b[:] = np.array([1.0, 2.0, 3.0], np.float32)
        feats = extract_features(model, [LabeledWindow(np.zeros((2, 5), np.float32), 1, 0, 1)])
        np.testing.assert_allclose(feats[0].values, [1.0, 2.0, 3.0])  # pre-softmax


class TestEvalClosed:
    def test_perfect_predictions(self):
        config = CnnConfig(n_channel=6, n_sample_points=20, n_known=6, epochs=25, seed=3)
        windows = synth_six_classes()
        train, val = split_by_rep(windows)
        model, _ = train_cnn(train, val, [1, 2, 3, 4, 5, 6], config)
        acc, confusion = eval_closed(model, train)
        assert acc >= 0.99
        assert confusion.sum() == len(train)

    def test_constant_predictor_hand_count(self):
        config = CnnConfig(n_channel=2, n_sample_points=5, n_known=3)
        model = zeroed_model(config, (1, 2, 3))
        model.network.layers[-2].b[:] = np.array([0.0, 0.0, 1.0], np.float32)  # always class index 2
        labels = [3, 3, 3, 1, 1, 2, 2, 2, 2, 1]
        windows = [LabeledWindow(np.zeros((2, 5), np.float32), lab, 0, 1) for lab in labels]
        acc, confusion = eval_closed(model, windows)
        assert acc == pytest.approx(0.3)
        np.testing.assert_array_equal(confusion[:, 2], [3, 4, 3])
        assert confusion.sum() == 10
        np.testing.assert_array_equal(confusion.sum(axis=1), [3, 4, 3])

    def test_empty_input_rejected(self):
        model = zeroed_model(CnnConfig(n_channel=2, n_sample_points=5, n_known=2), (1, 2))
        with pytest.raises(ArgumentError):
            eval_closed(model, [])

    def test_shape_mismatch_rejected(self):
        model = zeroed_model(CnnConfig(n_channel=2, n_sample_points=5, n_known=2), (1, 2))
        with pytest.raises(ArgumentError, match="shape"):
            classify(model, LabeledWindow(np.zeros((3, 5), np.float32), 1, 0, 1))


class TestPersistence:
    def test_round_trip_preserves_outputs(self, tmp_path):
        windows = synth_six_classes(windows_per_class=10, seed=6)
        train, val = split_by_rep(windows)
        config = CnnConfig(n_channel=6, n_sample_points=20, n_known=6, epochs=2, seed=4)
        model, _ = train_cnn(train, val, [1, 2, 3, 4, 5, 6], config)
        save_cnn(model, tmp_path / "cnn")
        loaded = load_cnn(tmp_path / "cnn")
        assert loaded.class_ids == model.class_ids
        for w in val[:5]:
            a, _ = classify(model, w)
            b, _ = classify(loaded, w)
            np.testing.assert_array_equal(a.values, b.values)
