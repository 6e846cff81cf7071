import importlib

import numpy as np
import pytest

from texrand.errors import InvalidParameterError, NumericalError
from texrand.imaging import Image
from texrand.trainer.toydata import gen_toy_dataset
from texrand.trainer.train import (
    LOG_HEADER, TrainConfig, dump_config, evaluate, format_log, load_config, parse_config_text, train,
)

train_mod = importlib.import_module("texrand.trainer.train")


@pytest.fixture(scope="module")
def small_data():
    return gen_toy_dataset("source", 12, 0)


@pytest.fixture(scope="module")
def pool():
    rng = np.random.default_rng(0)
    return [Image(rng.random((24, 24, 3))) for _ in range(2)]


class TestConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.beta, cfg.momentum, cfg.weight_decay, cfg.poly_power, cfg.batch_size) == (1e-5, 0.9, 5e-4, 0.9, 2)
        assert cfg.class_weights is None
        assert not (cfg.gtr or cfg.ltr or cfg.cgl or cfg.mirror or cfg.blur)

    def test_parse_comments_and_types(self):
        values = parse_config_text("# header\nlr0 = 0.01  # tail\ngtr = yes\nwidths = 4, 8\n\niterations=7\n")
        assert values == {"lr0": 0.01, "gtr": True, "widths": (4, 8), "iterations": 7}

    def test_dump_load_round_trip(self, tmp_path):
        cfg = TrainConfig(lr0=0.003, gtr=True, ltr=True, cgl=True, class_weights=(1.0, 2.0, 2.0, 3.0), widths=(4,))
        path = tmp_path / "a.cfg"
        path.write_text(dump_config(cfg))
        assert load_config(path) == cfg

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "a.cfg"
        path.write_text("iterations = 10\nlr0 = 0.5\n")
        cfg = load_config(path, iterations=3, lr0=None)
        assert cfg.iterations == 3 and cfg.lr0 == 0.5

    @pytest.mark.parametrize("text", ["nonsense", "colour = red", "gtr = maybe", "iterations = many"])
    def test_bad_lines(self, text):
        with pytest.raises(InvalidParameterError):
            parse_config_text(text)

    @pytest.mark.parametrize("kwargs", [
        dict(cgl=True), dict(cgl=True, gtr=True), dict(beta=1.5), dict(iterations=0),
        dict(class_weights=(1.0, 1.0)), dict(class_weights=(1.0, 0.0, 1.0, 1.0)), dict(precision="float16"),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidParameterError):
            TrainConfig(**kwargs)


class TestTrain:
    def test_needs_pool_for_randomization(self, small_data):
        with pytest.raises(InvalidParameterError):
            train(TrainConfig(iterations=1, gtr=True), [], small_data)

    def test_deterministic_replay(self, small_data, pool):
        cfg = TrainConfig(iterations=6, lr0=0.01, gtr=True, ltr=True, cgl=True, mirror=True, blur=True,
                          widths=(4, 6), log_every=2, seed=3)
        m1, r1 = train(cfg, pool, small_data)
        m2, r2 = train(cfg, pool, small_data)
        assert r1 == r2
        for name in m1.params:
            np.testing.assert_array_equal(m1.params[name], m2.params[name])

    def test_seed_changes_result(self, small_data):
        base = dict(iterations=3, lr0=0.01, widths=(4,))
        m1, _ = train(TrainConfig(seed=0, **base), [], small_data)
        m2, _ = train(TrainConfig(seed=1, **base), [], small_data)
        assert any(not np.array_equal(m1.params[k], m2.params[k]) for k in m1.params)

    def test_log_rows(self, small_data):
        _, rows = train(TrainConfig(iterations=7, log_every=3, widths=(4,)), [], small_data)
        assert [r[0] for r in rows] == [0, 3, 6]
        assert all(r[3] == 0.0 for r in rows)  # no consistency term without cgl
        text = format_log(rows)
        lines = text.splitlines()
        assert lines[0] == LOG_HEADER == "iter,lr,l_seg,l_con"
        assert len(lines) == 4 and all(len(line.split(",")) == 4 for line in lines)

    def test_cgl_logs_consistency(self, small_data, pool):
        cfg = TrainConfig(iterations=2, log_every=1, gtr=True, ltr=True, cgl=True, widths=(4,))
        _, rows = train(cfg, pool, small_data)
        assert all(r[3] > 0.0 for r in rows)

    def test_non_finite_loss_aborts(self, small_data, monkeypatch):
        def bad_loss(*args, **kwargs):
            return float("nan"), {}, {"l_seg": float("nan"), "l_con": 0.0}

        monkeypatch.setattr(train_mod, "total_loss", bad_loss)
        with pytest.raises(NumericalError, match="iteration 0"):
            train(TrainConfig(iterations=2, widths=(4,)), [], small_data)

    def test_float32_precision(self, small_data):
        model, _ = train(TrainConfig(iterations=2, precision="float32", widths=(4,)), [], small_data)
        assert all(p.dtype == np.float32 for p in model.params.values())

    @pytest.mark.slow
    def test_segmentation_loss_halves(self):
        data = gen_toy_dataset("source", 200, 0)
        cfg = TrainConfig(iterations=2000, lr0=0.01, log_every=100)
        _, rows = train(cfg, [], data)
        first = np.mean([r[2] for r in rows[:2]])
        last = np.mean([r[2] for r in rows[-2:]])
        assert last <= 0.5 * first

    def test_evaluate_returns_miou(self, small_data):
        model, _ = train(TrainConfig(iterations=1, widths=(4,)), [], small_data)
        iou, m = evaluate(model, small_data)
        assert iou.shape == (4,) and 0.0 <= m <= 1.0
