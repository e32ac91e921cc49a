import math
from dataclasses import replace

import numpy as np
import pytest

from irsdoa import (
    build_measurement,
    closed_form_single_crb,
    crb_values,
    fisher_matrix,
)
from irsdoa.crb import EndfireError
from irsdoa.numerics import SingularMatrixError

from conftest import make_scene

C0 = 299792458.0


def _fd_upsilon(scene, thetas, alphas, d_mat):
    """Forward model rebuilt from raw formulas for the FD oracle."""
    lam = C0 / scene.carrier_freq
    alpha_g = (lam / (4 * np.pi * scene.bs_irs_distance)) * np.exp(
        -2j * np.pi * scene.bs_irs_distance / lam
    )
    amp = np.sqrt(scene.n_bs_antennas * scene.tx_power) * alpha_g
    m = np.arange(scene.n_ses)[:, None]
    n = np.arange(scene.n_res)[:, None]
    b = np.exp(-1j * np.pi * m * np.sin(thetas)[None, :])
    q = np.exp(
        -1j * np.pi * n * (np.sin(thetas) - np.sin(scene.irs_arrival_angle))[None, :]
    )
    return (b * (amp * alphas)) @ q.conj().T @ d_mat


def fd_fisher(scene, d_mat):
    """Central-difference Fisher oracle: F = (2/sigma^2) Re{J^H J}."""
    lam = C0 / scene.carrier_freq
    thetas = np.array([t.angle for t in scene.targets])
    alphas = np.array([
        np.sqrt(lam**2 * t.rcs / (64 * np.pi**3 * t.distance**4))
        * np.exp(-4j * np.pi * t.distance / lam)
        for t in scene.targets
    ])
    k = len(thetas)
    cols = []
    for i in range(k):
        h = 1e-6 * max(1.0, abs(thetas[i]))
        up, dn = thetas.copy(), thetas.copy()
        up[i] += h
        dn[i] -= h
        cols.append(
            (_fd_upsilon(scene, up, alphas, d_mat)
             - _fd_upsilon(scene, dn, alphas, d_mat)).ravel() / (2 * h)
        )
    for part in (1.0, 1.0j):
        for i in range(k):
            h = 1e-6 * max(1.0, abs(alphas[i]))
            up, dn = alphas.copy(), alphas.copy()
            up[i] += h * part
            dn[i] -= h * part
            cols.append(
                (_fd_upsilon(scene, thetas, up, d_mat)
                 - _fd_upsilon(scene, thetas, dn, d_mat)).ravel() / (2 * h)
            )
    jac = np.column_stack(cols)
    return (2.0 / scene.noise_power) * (jac.conj().T @ jac).real


def assert_fisher_matches_oracle(scene, measurement):
    f = fisher_matrix(scene, measurement).matrix
    f_ref = fd_fisher(scene, measurement.matrix)
    floor = 1e-8 * np.linalg.norm(f_ref)
    np.testing.assert_allclose(f, f_ref, rtol=1e-4, atol=floor)


class TestFisherMatrix:
    def test_symmetric_psd(self):
        scene = make_scene(angles_deg=(-20.0, 5.0, 40.0))
        d = build_measurement("dft", scene.n_res, scene.n_slots)
        f = fisher_matrix(scene, d).matrix
        tr = np.trace(f)
        assert np.max(np.abs(f - f.T)) <= 1e-9 * np.max(np.abs(f))
        assert np.linalg.eigvalsh(f)[0] >= -1e-9 * tr / f.shape[0]

    def test_power_homogeneity(self):
        scene = make_scene(angles_deg=(-10.0, 30.0))
        d = build_measurement("dft", scene.n_res, scene.n_slots)
        f1 = fisher_matrix(scene, d).matrix
        c = 7.5
        f2 = fisher_matrix(replace(scene, tx_power=c * scene.tx_power), d).matrix
        np.testing.assert_allclose(f2, c * f1, rtol=1e-12)

    def test_oracle_single_target_dft(self):
        scene = make_scene(n_res=16, n_ses=4, n_slots=16, angles_deg=(12.0,))
        assert_fisher_matches_oracle(scene, build_measurement("dft", 16, 16))

    def test_oracle_three_targets_random_phase(self):
        scene = make_scene(angles_deg=(-10.0, 10.0, 30.0))
        d = build_measurement("random_phase", scene.n_res, scene.n_slots, seed=7)
        assert_fisher_matches_oracle(scene, d)

    def test_endfire_flag(self):
        scene = make_scene(angles_deg=(90.0,))
        d = build_measurement("dft", scene.n_res, scene.n_slots)
        assert fisher_matrix(scene, d).endfire

    def test_expected_covariance_matches_dft(self):
        # DFT with L = N realizes D D^H = L*I exactly
        scene = make_scene(angles_deg=(5.0, -35.0))
        d = build_measurement("dft", scene.n_res, scene.n_slots)
        f_dft = fisher_matrix(scene, d).matrix
        f_exp = fisher_matrix(scene, None, expected_covariance=True).matrix
        np.testing.assert_allclose(
            f_dft, f_exp, rtol=1e-9, atol=1e-12 * np.linalg.norm(f_exp)
        )


class TestCrbValues:
    def test_diagonal_inverse(self):
        from irsdoa.crb import FisherMatrix
        f = FisherMatrix(matrix=np.diag([4.0, 2.0, 8.0]), n_targets=1)
        report = crb_values(f)
        np.testing.assert_allclose(report.crb_per_target, [0.25])
        assert abs(report.rcrb - 0.5) < 1e-15

    def test_power_doubling_halves_crb(self):
        # homogeneity is exact on F; the inverse adds condition-number noise
        scene = make_scene(angles_deg=(-10.0, 10.0, 30.0))
        d = build_measurement("dft", scene.n_res, scene.n_slots)
        crb1 = crb_values(fisher_matrix(scene, d)).crb_per_target
        crb2 = crb_values(
            fisher_matrix(replace(scene, tx_power=2 * scene.tx_power), d)
        ).crb_per_target
        np.testing.assert_allclose(crb2, crb1 / 2, rtol=1e-8)

    def test_multi_target_lower_bounded_by_single(self):
        scene = make_scene(angles_deg=(-10.0, 10.0, 30.0))
        d = build_measurement("dft", scene.n_res, scene.n_slots)
        multi = crb_values(fisher_matrix(scene, d)).crb_per_target
        for k, tgt in enumerate(scene.targets):
            single = closed_form_single_crb(
                replace(scene, targets=(tgt,)), scene.n_slots
            )
            assert multi[k] >= single * (1 - 1e-9)

    def test_all_positive(self):
        scene = make_scene(angles_deg=(-45.0, 0.0, 60.0))
        d = build_measurement("dft", scene.n_res, scene.n_slots)
        assert np.all(crb_values(fisher_matrix(scene, d)).crb_per_target > 0)

    def test_endfire_singular(self):
        scene = make_scene(angles_deg=(90.0,))
        d = build_measurement("dft", scene.n_res, scene.n_slots)
        with pytest.raises(SingularMatrixError, match="endfire"):
            crb_values(fisher_matrix(scene, d))


class TestClosedForm:
    def test_matches_fisher_path(self):
        scene = make_scene(n_res=16, n_ses=4, n_slots=16, angles_deg=(20.0,))
        d = build_measurement("dft", 16, 16)
        general = crb_values(fisher_matrix(scene, d)).crb_per_target[0]
        closed = closed_form_single_crb(scene)
        assert abs(general - closed) <= 1e-8 * closed

    def test_re_count_ratio(self):
        base = dict(n_ses=4, n_slots=16, angles_deg=(10.0,))
        crb16 = closed_form_single_crb(make_scene(n_res=16, **base))
        crb32 = closed_form_single_crb(make_scene(n_res=32, **base))
        expected = (16 * (16**2 + 14)) / (32 * (32**2 + 14))
        assert abs(crb32 / crb16 - expected) < 1e-12

    def test_endfire_divergence(self):
        crb0 = closed_form_single_crb(make_scene(angles_deg=(0.0,)))
        crb89 = closed_form_single_crb(make_scene(angles_deg=(89.0,)))
        expected = 1.0 / math.cos(math.radians(89.0)) ** 2
        assert abs(crb89 / crb0 - expected) <= 1e-10 * expected

    def test_endfire_error(self):
        with pytest.raises(EndfireError):
            closed_form_single_crb(make_scene(angles_deg=(90.0,)))

    def test_requires_single_target(self):
        with pytest.raises(ValueError):
            closed_form_single_crb(make_scene(angles_deg=(0.0, 10.0)))

    def test_m_n_interchange_general_path(self):
        # swapping SEs and REs leaves the single-target bound unchanged
        # (L = 16 keeps D D^H = L*I in both layouts)
        a = make_scene(n_res=16, n_ses=4, n_slots=16, angles_deg=(20.0,))
        b = make_scene(n_res=4, n_ses=16, n_slots=16, angles_deg=(20.0,))
        crb_a = crb_values(fisher_matrix(a, build_measurement("dft", 16, 16))).crb_per_target[0]
        crb_b = crb_values(fisher_matrix(b, build_measurement("dft", 4, 16))).crb_per_target[0]
        assert abs(crb_a - crb_b) <= 1e-10 * crb_a
        assert abs(closed_form_single_crb(a) - closed_form_single_crb(b)) \
            <= 1e-12 * closed_form_single_crb(a)
