import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from seqcv.datagen import GeneratorSpec, gen_noisy_sinc, gen_noisy_sine, load_csv, write_csv


def _sinc_curve(x, d):
    return np.sinc(4.0 * x / np.pi) + np.sin(15.0 * d * x) / 5.0


class TestSpecValidation:
    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            GeneratorSpec("blocks")
        with pytest.raises(ValueError):
            GeneratorSpec("noisy_sine", intrinsic_dim=0)
        with pytest.raises(ValueError):
            GeneratorSpec("noisy_sine", noise=-0.1)
        with pytest.raises(ValueError):
            GeneratorSpec("noisy_sine", count=0)

    def test_family_mismatch(self):
        with pytest.raises(ValueError):
            gen_noisy_sine(GeneratorSpec("noisy_sinc"))
        with pytest.raises(ValueError):
            gen_noisy_sinc(GeneratorSpec("noisy_sine"))


class TestNoisySine:
    def test_noiseless_labels_are_sign_of_sine(self):
        data = gen_noisy_sine(GeneratorSpec("noisy_sine", 1, 0.0, 500, seed=3))
        x = data.features[:, 0]
        assert np.all((x >= 0.0) & (x <= 2.0 * np.pi))
        assert np.array_equal(data.targets, (np.sin(x) >= 0.0).astype(float))
        # the first quarter period (x = pi/2 region) carries label 1
        assert data.targets[x < np.pi / 2].min() == 1.0

    def test_labels_alternate_across_periods(self):
        data = gen_noisy_sine(GeneratorSpec("noisy_sine", 5, 0.0, 2000, seed=1))
        x = data.features[:, 0]
        order = np.argsort(x)
        labels = data.targets[order]
        transitions = int(np.sum(labels[1:] != labels[:-1]))
        # boundaries at pi, 2pi, ..., 9pi inside [0, 10pi]
        assert transitions == 9
        assert labels[0] == 1.0

    def test_flip_rate_matches_integration_oracle(self):
        n = 0.25
        count = 100000
        data = gen_noisy_sine(GeneratorSpec("noisy_sine", 5, n, count, seed=12))
        x = data.features[:, 0]
        clean = (np.sin(x) >= 0.0).astype(float)
        flip_rate = float(np.mean(data.targets != clean))
        # flip probability averaged over one half period by symmetry
        p, _ = scipy.integrate.quad(lambda t: scipy.stats.norm.cdf(-math.sin(t) / n), 0.0, math.pi)
        p /= math.pi
        se = math.sqrt(p * (1.0 - p) / count)
        assert abs(flip_rate - p) < 3 * se


class TestNoisySinc:
    def test_noiseless_values_match_curve(self):
        data = gen_noisy_sinc(GeneratorSpec("noisy_sinc", 3, 0.0, 500, seed=4))
        x = data.features[:, 0]
        assert np.all((x >= -np.pi) & (x <= np.pi))
        assert np.allclose(data.targets, _sinc_curve(x, 3), atol=0.0, rtol=0.0)

    def test_unit_peak_and_sine_nodes(self):
        assert _sinc_curve(np.array([0.0]), 2)[0] == 1.0
        d = 2
        nodes = np.pi * np.arange(1, 6) / (15.0 * d)
        assert np.allclose(_sinc_curve(nodes, d), np.sinc(4.0 * nodes / np.pi), atol=1e-15)

    def test_mean_matches_quadrature_oracle(self):
        count = 100000
        data = gen_noisy_sinc(GeneratorSpec("noisy_sinc", 2, 0.1, count, seed=9))
        integral, _ = scipy.integrate.quad(lambda t: _sinc_curve(np.array([t]), 2)[0], -math.pi, math.pi, limit=200)
        expected = integral / (2.0 * math.pi)
        se = math.sqrt(float(np.var(data.targets)) / count)
        assert abs(float(data.targets.mean()) - expected) < 3 * se

    def test_noiseless_range(self):
        for d in (1, 2, 5):
            data = gen_noisy_sinc(GeneratorSpec("noisy_sinc", d, 0.0, 20000, seed=d))
            assert data.targets.min() >= -1.3
            assert data.targets.max() <= 1.3


class TestDeterminism:
    @pytest.mark.parametrize("gen,family", [(gen_noisy_sine, "noisy_sine"), (gen_noisy_sinc, "noisy_sinc")])
    def test_same_seed_bit_identical(self, gen, family):
        a = gen(GeneratorSpec(family, 2, 0.3, 200, seed=5))
        b = gen(GeneratorSpec(family, 2, 0.3, 200, seed=5))
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.targets, b.targets)

    @pytest.mark.parametrize("gen,family", [(gen_noisy_sine, "noisy_sine"), (gen_noisy_sinc, "noisy_sinc")])
    def test_different_seeds_differ(self, gen, family):
        a = gen(GeneratorSpec(family, 2, 0.3, 200, seed=5))
        b = gen(GeneratorSpec(family, 2, 0.3, 200, seed=6))
        assert sorted(a.features[:, 0]) != sorted(b.features[:, 0])

    def test_all_values_finite(self):
        for family, gen in (("noisy_sine", gen_noisy_sine), ("noisy_sinc", gen_noisy_sinc)):
            data = gen(GeneratorSpec(family, 5, 1.0, 5000, seed=0))
            assert np.all(np.isfinite(data.features))
            assert np.all(np.isfinite(data.targets))


class TestCsv:
    def test_round_trip_is_value_identical(self, tmp_path):
        data = gen_noisy_sinc(GeneratorSpec("noisy_sinc", 2, 0.1, 50, seed=2))
        path = tmp_path / "sinc.csv"
        write_csv(data, path)
        back = load_csv(path, "regression")
        assert np.allclose(back.features, data.features, atol=1e-12, rtol=0.0)
        assert np.allclose(back.targets, data.targets, atol=1e-12, rtol=0.0)

    def test_two_row_file(self, tmp_path):
        path = tmp_path / "ok.csv"
        path.write_text("x1,y\n1.0,0\n2.0,1\n")
        data = load_csv(path, "classification")
        assert data.features.shape == (2, 1)
        assert list(data.targets) == [0.0, 1.0]

    def test_non_numeric_cell_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,y\n1.0,0.5\noops,0.5\n")
        with pytest.raises(ValueError, match="line 3"):
            load_csv(path, "regression")

    def test_wrong_width_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,y\n1.0,2.0,3.0\n1.0,2.0\n")
        with pytest.raises(ValueError, match="line 3"):
            load_csv(path, "regression")

    def test_empty_file_and_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            load_csv(path, "regression")
        path.write_text("x1,y\n")
        with pytest.raises(ValueError, match="no data rows"):
            load_csv(path, "regression")

    def test_non_binary_classification_target(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,y\n1.0,0.5\n")
        with pytest.raises(ValueError, match="binary"):
            load_csv(path, "classification")
