import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparselms.signals import (
    InputKind,
    InputModel,
    NoiseModel,
    SparseSystemSpec,
    StageSchedule,
    draw_system,
    ecg_structure_ok,
    gen_input,
    gen_regressor_stream,
    load_ecg_ir,
    measure_output,
    trial_generators,
)


def rng(seed=0):
    return np.random.default_rng(seed)


class TestDrawSystem:
    def test_fully_sparse(self):
        np.testing.assert_array_equal(draw_system(SparseSystemSpec(16, 0), rng()), np.zeros(16))

    def test_dense(self):
        w = draw_system(SparseSystemSpec(16, 16), rng())
        assert set(np.unique(w)) <= {-1.0, 1.0}
        assert np.count_nonzero(w) == 16

    @settings(max_examples=100, deadline=None)
    @given(n=st.integers(1, 64), data=st.data(), seed=st.integers(0, 2**32 - 1))
    def test_exact_nonzero_count(self, n, data, seed):
        k = data.draw(st.integers(0, n))
        w = draw_system(SparseSystemSpec(n, k), rng(seed))
        assert np.count_nonzero(w) == k
        assert set(np.unique(w[w != 0])) <= {-1.0, 1.0}

    def test_too_many_nonzeros(self):
        with pytest.raises(ValueError):
            SparseSystemSpec(16, 17)

    def test_positions_and_signs_uniform(self):
        g = rng(1)
        hits = np.zeros(16)
        positives = 0
        for _ in range(4000):
            w = draw_system(SparseSystemSpec(16, 4), g)
            hits += w != 0
            positives += np.sum(w > 0)
        # each position is nonzero with probability 1/4
        np.testing.assert_allclose(hits / 4000, 0.25, atol=0.03)
        assert abs(positives / 16000 - 0.5) < 0.02

    def test_deterministic(self):
        spec = SparseSystemSpec(16, 4)
        np.testing.assert_array_equal(draw_system(spec, rng(9)), draw_system(spec, rng(9)))

    def test_fixed_taps(self):
        spec = SparseSystemSpec.fixed([0.0, 2.0, 0.0])
        assert spec.n_nonzero == 1
        np.testing.assert_array_equal(draw_system(spec, rng()), [0.0, 2.0, 0.0])


class TestGenInput:
    def test_white_moments(self):
        x = gen_input(InputModel(InputKind.WHITE, 1.0), 10**6, rng(2))
        assert 0.99 <= x.var() <= 1.01
        assert abs(x.mean()) < 0.005

    def test_ar1_scale_factor(self):
        model = InputModel(InputKind.AR1, 1.0, 0.8, 1e-2)
        # unscaled stationary variance 0.01 / (1 - 0.64)
        assert 1.0 / model.ar_scale**2 == pytest.approx(0.01 / 0.36, rel=1e-12)
        assert 0.01 / 0.36 == pytest.approx(0.02778, abs=1e-5)

    def test_ar1_moments(self):
        x = gen_input(InputModel(InputKind.AR1, 1.0, 0.8, 1e-2), 10**6, rng(3))
        assert abs(x.var() - 1.0) <= 0.01 * 1.0 * 3  # loose here; the acceptance test pins +-0.01
        lag1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert lag1 == pytest.approx(0.8, abs=0.01)

    def test_ar1_recursion(self):
        # the raw sequence obeys x[k+1] = a x[k] + u[k], x[0] = 0
        model = InputModel(InputKind.AR1, 1.0, 0.5, 1.0, burn_in=0)
        x = gen_input(model, 50, rng(4)) / model.ar_scale
        u = rng(4).normal(0.0, 1.0, size=50)
        expected = np.zeros(50)
        for k in range(49):
            expected[k + 1] = 0.5 * expected[k] + u[k]
        np.testing.assert_allclose(x, expected, rtol=1e-12, atol=1e-14)

    def test_length_one(self):
        x = gen_input(InputModel(), 1, rng(5))
        assert x.shape == (1,)
        assert x[0] == rng(5).normal(0.0, 1.0)

    @pytest.mark.parametrize("a", [1.0, -1.0, 1.5])
    def test_nonstationary_rejected(self, a):
        with pytest.raises(ValueError):
            InputModel(InputKind.AR1, ar_coefficient=a)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            gen_input(InputModel(), 0, rng())


class TestRegressors:
    def test_small_example(self):
        np.testing.assert_array_equal(gen_regressor_stream([1, 2, 3], 2), [[2, 1], [3, 2]])

    def test_full_length(self):
        np.testing.assert_array_equal(gen_regressor_stream([1, 2, 3], 3), [[3, 2, 1]])

    def test_scalar_filter(self):
        np.testing.assert_array_equal(gen_regressor_stream([4, 5, 6], 1), [[4], [5], [6]])

    def test_row_count(self):
        assert gen_regressor_stream(np.arange(516.0), 16).shape == (501, 16)

    def test_too_short(self):
        with pytest.raises(ValueError):
            gen_regressor_stream([1, 2], 3)


class TestMeasureOutput:
    def test_noiseless(self):
        assert measure_output([1.0, 0.0], [3.0, 5.0], NoiseModel(0.0), rng()) == 3.0

    def test_pure_noise(self):
        y = measure_output(np.zeros(4), np.ones((200000, 4)), NoiseModel(0.1), rng(6))
        assert y.var() == pytest.approx(0.1, rel=0.02)

    def test_snr_20db(self):
        g = rng(7)
        w = g.normal(size=16)
        w /= np.linalg.norm(w)
        x = g.normal(size=(10**5, 16))
        y = measure_output(w, x, NoiseModel(0.01), g)
        clean = x @ w
        snr = 10 * np.log10(clean.var() / (y - clean).var())
        assert snr == pytest.approx(20.0, abs=0.2)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            measure_output([1.0, 2.0], [1.0, 2.0, 3.0], NoiseModel(0.0), rng())


class TestEcg:
    def test_bundled(self):
        w = load_ecg_ir()
        assert w.shape == (256,)
        assert np.count_nonzero(w) == 28
        assert ecg_structure_ok(w)
        # one dominant positive peak
        assert w.argmax() == np.abs(w).argmax()

    def test_zeros_file_loads_but_fails_structure(self, tmp_path):
        path = tmp_path / "zeros.txt"
        path.write_text("\n".join(["0"] * 256))
        w = load_ecg_ir(path)
        assert not ecg_structure_ok(w)
        with pytest.raises(ValueError, match="nonzero"):
            load_ecg_ir(path, strict=True)

    def test_length_mismatch(self, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("\n".join(["1"] * 255))
        with pytest.raises(ValueError, match="256"):
            load_ecg_ir(path)

    def test_parse_failure(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1\nabc\n")
        with pytest.raises(ValueError, match="parse"):
            load_ecg_ir(path)

    def test_comma_separated(self, tmp_path):
        path = tmp_path / "ir.csv"
        path.write_text(",".join(["0.5"] * 256))
        np.testing.assert_array_equal(load_ecg_ir(path), np.full(256, 0.5))

    def test_matches_generator_script(self):
        import importlib.util
        from pathlib import Path

        script = Path(__file__).parents[1] / "scripts" / "make_ecg_ir.py"
        spec = importlib.util.spec_from_file_location("make_ecg_ir", script)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        np.testing.assert_allclose(load_ecg_ir(), module.make_ecg_ir(), atol=5e-7)


class TestSeeding:
    def test_streams_are_deterministic(self):
        a, b = trial_generators(5, 3), trial_generators(5, 3)
        for key in ("system", "input", "noise"):
            np.testing.assert_array_equal(a[key].normal(size=10), b[key].normal(size=10))

    def test_streams_differ(self):
        g = trial_generators(5, 3)
        draws = {k: g[k].normal(size=4).tobytes() for k in g}
        assert len(set(draws.values())) == 3
        assert trial_generators(5, 4)["noise"].normal() != trial_generators(5, 3)["noise"].normal()
        assert trial_generators(6, 3)["noise"].normal() != trial_generators(5, 3)["noise"].normal()


def test_schedule():
    sched = StageSchedule(((SparseSystemSpec(16, 1), 500), (SparseSystemSpec(16, 4), 300)))
    assert sched.total_iterations == 800
    assert sched.lengths == [500, 300]
    idx = sched.stage_index()
    assert idx[499] == 0 and idx[500] == 1 and len(idx) == 800
    with pytest.raises(ValueError):
        StageSchedule(((SparseSystemSpec(16, 1), 5), (SparseSystemSpec(8, 1), 5)))
