import numpy as np
import pytest

from apcgl import (
    ApSeries,
    BlowupError,
    CglParams,
    GridField,
    NonContractionError,
    bohr_coefficient,
    grid_to_series,
    l1_norm,
    linear_step,
    picard_iterate,
    pseudospectral_solve,
    pseudospectral_trajectory,
    sample,
    spectral_leakage,
)

from conftest import random_series


class TestSample:
    def test_pure_mode(self):
        f = sample(ApSeries(1.0, [1]), 8)
        assert np.allclose(f.values, np.exp(2j * np.pi * np.arange(8) / 8), atol=1e-15)

    def test_zero(self):
        assert not np.any(sample(ApSeries.zeros(1.0, 4), 16).values)

    def test_round_trip(self, rng):
        u = random_series(rng, 8, lam=0.9, decay=1.0)
        f = sample(u, 64)
        assert max(abs(bohr_coefficient(f, j) - u[j]) for j in range(1, 9)) <= 1e-12
        assert np.max(np.abs(grid_to_series(f, 8).coeffs - u.coeffs)) <= 1e-12

    def test_too_coarse(self):
        with pytest.raises(ValueError):
            sample(ApSeries(1.0, [1, 2, 3, 4]), 8)

    def test_grid_csv(self, tmp_path):
        f = sample(ApSeries(2.0, [1j]), 4)
        f.to_csv(tmp_path / "g.csv")
        lines = (tmp_path / "g.csv").read_text().splitlines()
        assert lines[0] == "k,x_k,re_u,im_u"
        k, x, re, im = lines[2].split(",")
        assert int(k) == 1 and float(x) == f.x[1]
        assert complex(float(re), float(im)) == f.values[1]


class TestLeakage:
    def test_band_limited(self, rng):
        u = random_series(rng, 10)
        assert spectral_leakage(sample(u, 64), 1.0, 10) <= 1e-14

    def test_spurious_mean(self):
        f = sample(ApSeries(1.0, [1]), 16)
        g = GridField(1.0, f.values + 0.1)
        assert spectral_leakage(g, 1.0, 1) == pytest.approx(0.1 / 1.1, abs=1e-14)

    def test_zero_field(self):
        assert spectral_leakage(GridField(1.0, np.zeros(8)), 1.0, 3) == 0

    def test_lattice_mismatch(self):
        with pytest.raises(ValueError):
            spectral_leakage(GridField(1.0, np.ones(8)), 2.0, 3)


class TestPseudospectral:
    def test_linear_exact(self, rng):
        p = CglParams(1, 1, 0.1, 1, 1, kappa=0)
        u0 = random_series(rng, 8)
        f = pseudospectral_solve(u0, p, 0.3, 64, 0.3 / 50)
        assert np.max(np.abs(grid_to_series(f, 8).coeffs - linear_step(u0, p, 0.3).coeffs)) <= 1e-10

    def test_zero_data(self, standard_params):
        f = pseudospectral_solve(ApSeries.zeros(1.0, 8), standard_params, 0.1, 64, 0.01)
        assert not np.any(f.values)

    def test_dt_self_convergence(self, standard_u0, standard_params):
        T = 0.5
        a = pseudospectral_solve(standard_u0, standard_params, T, 256, T / 4096)
        b = pseudospectral_solve(standard_u0, standard_params, T, 256, T / 8192)
        assert l1_norm(grid_to_series(a, 32) - grid_to_series(b, 32)) <= 1e-9

    def test_dealiasing_resolution(self, standard_u0, standard_params):
        a = pseudospectral_solve(standard_u0, standard_params, 0.1, 256, 0.1 / 512)
        b = pseudospectral_solve(standard_u0, standard_params, 0.1, 512, 0.1 / 512)
        assert l1_norm(grid_to_series(a, 32) - grid_to_series(b, 32)) <= 1e-9

    def test_expeuler_first_order(self, standard_u0, standard_params):
        ref = grid_to_series(pseudospectral_solve(standard_u0, standard_params, 0.1, 256, 1e-3), 32)
        errs = [l1_norm(grid_to_series(pseudospectral_solve(standard_u0, standard_params, 0.1, 256, dt,
                                                             scheme="expeuler"), 32) - ref)
                for dt in (0.01, 0.005)]
        assert 1.6 < errs[0] / errs[1] < 2.4

    def test_trajectory_times(self, standard_u0, standard_params):
        traj = pseudospectral_trajectory(standard_u0, standard_params, 0.1, 256, 0.01, record_every=4)
        assert [t for t, _ in traj] == pytest.approx([0, 0.04, 0.08, 0.1])

    def test_floor_on_N(self, standard_u0, standard_params):
        with pytest.raises(ValueError):
            pseudospectral_solve(standard_u0, standard_params, 0.1, 128, 0.01)

    def test_blowup_signalled(self):
        # Strong linear growth overflows after about 71 steps.
        p = CglParams(1, 0, 100, 1, 0, kappa=0)
        u0 = ApSeries.from_modes(1.0, 2, {1: 1})
        with pytest.raises(BlowupError) as info:
            pseudospectral_solve(u0, p, 10.0, 32, 0.1)
        assert 6.0 < info.value.last_stable_time < 8.0


class TestPicard:
    def test_zero_data(self, standard_params):
        out = picard_iterate(ApSeries.zeros(1.0, 8), standard_params, 0.1, 5, 16)
        assert not np.any(out.coeffs)

    def test_linear_case(self, rng):
        p = CglParams(1, 1, 0.1, 1, 1, kappa=0)
        u0 = random_series(rng, 8)
        assert picard_iterate(u0, p, 0.2, 1, 16) == linear_step(u0, p, 0.2)

    def test_agrees_with_pseudospectral(self, standard_u0, standard_params):
        T = 0.05
        pic = picard_iterate(standard_u0, standard_params, T, 8, 32)
        ps = pseudospectral_solve(standard_u0, standard_params, T, 256, T / 4096)
        assert l1_norm(pic - grid_to_series(ps, 32)) <= 1e-6

    def test_non_contraction(self):
        p = CglParams(1e-3, 0, 0, 1, 0, kappa=1.0)
        u0 = ApSeries.from_modes(1.0, 8, {1: 3})
        with pytest.raises(NonContractionError):
            picard_iterate(u0, p, 1.0, 10, 16)
