"""Fisher information and Cramer-Rao bounds for the stacked echo model.

The unknown parameter vector stacks the K angles first, then the real
parts of the K complex reflection gains, then the imaginary parts.  With
Upsilon = B diag(gains) Q^H D and R_D = D D^H, the 3K x 3K Fisher matrix is

    F = (2/sigma^2) * [[Re T_tt, Re T_ta], [Re T_ta^T, Re T_aa]],

with the angle block assembled from four Hadamard products of Gram
matrices of (B, Bdot) against (Q, Qdot) weighted by R_D, the gain block
N_b P_t |alpha_g|^2 * [[1, j], [-j, 1]] kron ((B^H B) o (Q^H R_D Q)^T)
(whose real/imaginary cross terms vanish only for a single target), and
the cross block sqrt(N_b P_t) alpha_g [1, j] kron (...).  The real part
is taken only after each complex block is fully assembled.

A closed form exists for a single target under R_D = L*I:

    CRB = 6 sigma^2 / (L N_b P_t |alpha_g|^2 |alpha_0|^2 pi^2 cos^2(theta)
                       * M N (M^2 + N^2 - 2)),

inversely proportional to M*N^3 + N*M^3.  All bounds are in radians^2;
degree conversion happens in the reporting layer only.
"""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import (
    NumericError,
    SingularMatrixError,
    hermitian_eig,
    hermitian_solve,
    hermitize,
)
from .scene import model_matrices, path_gain_bs_irs, path_gain_target


class EndfireError(NumericError):
    """A target at +-90 degrees has zero angle sensitivity."""


@dataclass(frozen=True)
class FisherMatrix:
    matrix: np.ndarray     # 3K x 3K real symmetric
    n_targets: int
    endfire: bool = False


@dataclass(frozen=True)
class CrbReport:
    crb_per_target: np.ndarray    # radians^2
    rcrb: float                   # radians
    closed_form_single: float | None = None
    endfire_flag: bool = False


def _measurement_covariance(scene, measurement, expected_covariance):
    if expected_covariance:
        return scene.n_slots * np.eye(scene.n_res, dtype=complex)
    return measurement.covariance()


def fisher_matrix(scene, measurement, expected_covariance=False):
    """Assemble the 3K x 3K Fisher matrix for `scene` under schedule D.

    `expected_covariance=True` replaces D D^H with its i.i.d.-phase
    expectation L*I (used to report a single bound for random schedules).
    """
    mm = model_matrices(scene)
    r_d = _measurement_covariance(scene, measurement, expected_covariance)
    k = scene.n_targets
    sigma2 = scene.noise_power
    lam_diag = mm.gains

    q_rd = mm.q_mat.conj().T @ r_d            # K x N
    qq = q_rd @ mm.q_mat                      # Q^H R_D Q
    q_qdot = q_rd @ mm.q_dot                  # Q^H R_D Qdot
    qdot_q = mm.q_dot.conj().T @ r_d @ mm.q_mat
    qdot_qdot = mm.q_dot.conj().T @ r_d @ mm.q_dot

    bb = mm.b_mat.conj().T @ mm.b_mat
    b_bdot = mm.b_mat.conj().T @ mm.b_dot
    bdot_b = mm.b_dot.conj().T @ mm.b_mat
    bdot_bdot = mm.b_dot.conj().T @ mm.b_dot

    def scaled(core):
        # Lambda core Lambda^H for diagonal Lambda
        return (lam_diag[:, None] * core) * lam_diag.conj()[None, :]

    t_theta_theta = (
        bdot_bdot * scaled(qq).T
        + bdot_b * scaled(qdot_q).T
        + b_bdot * scaled(q_qdot).T
        + bb * scaled(qdot_qdot).T
    )

    alpha_g = path_gain_bs_irs(scene.bs_irs_distance, scene.wavelength)
    amp = math.sqrt(scene.n_bs_antennas * scene.tx_power)

    t_alpha_core = bb * qq.T
    t_alpha_alpha = (amp**2) * abs(alpha_g) ** 2 * np.kron(
        np.array([[1.0, 1.0j], [-1.0j, 1.0]]), t_alpha_core
    )

    cross_core = bdot_b * (qq @ np.diag(lam_diag.conj())).T \
        + bb * (q_qdot @ np.diag(lam_diag.conj())).T
    t_theta_alpha = amp * alpha_g * np.kron(np.array([1.0, 1.0j]), cross_core)

    f = np.empty((3 * k, 3 * k))
    f[:k, :k] = t_theta_theta.real
    f[:k, k:] = t_theta_alpha.real
    f[k:, :k] = t_theta_alpha.real.T
    f[k:, k:] = t_alpha_alpha.real
    f *= 2.0 / sigma2

    endfire = any(
        abs(math.cos(t.angle)) < 1e-12 for t in scene.targets
    )
    return FisherMatrix(matrix=f, n_targets=k, endfire=endfire)


def crb_values(fisher, closed_form_single=None):
    """Per-target CRBs and the root-mean bound from a Fisher matrix.

    Raises :class:`~irsdoa.numerics.SingularMatrixError` when F is not
    invertible (e.g. an endfire target zeroes the angle rows).
    """
    k = fisher.n_targets
    f = hermitize(fisher.matrix.astype(complex))
    eig = hermitian_eig(f)
    threshold = 1e-12 * float(np.trace(f).real) / (3 * k)
    if eig.eigenvalues[0] <= threshold:
        raise SingularMatrixError(
            "Fisher matrix is numerically singular "
            f"(smallest eigenvalue {eig.eigenvalues[0]:.3e}"
            f"{', endfire target' if fisher.endfire else ''})"
        )
    f_inv = hermitian_solve(f, np.eye(3 * k, dtype=complex))
    crb = np.diag(f_inv).real[:k].copy()
    return CrbReport(
        crb_per_target=crb,
        rcrb=float(np.sqrt(np.mean(crb))),
        closed_form_single=closed_form_single,
        endfire_flag=fisher.endfire,
    )


def closed_form_single_crb(scene, n_slots=None):
    """Single-target closed form assuming D D^H = L*I (radians^2)."""
    if scene.n_targets != 1:
        raise ValueError("closed form is defined for a single target")
    n_slots = scene.n_slots if n_slots is None else n_slots
    target = scene.targets[0]
    cos_t = math.cos(target.angle)
    if abs(cos_t) < 1e-12:
        raise EndfireError("closed-form CRB diverges at endfire (theta = +-90 deg)")
    lam = scene.wavelength
    alpha_g = path_gain_bs_irs(scene.bs_irs_distance, lam)
    alpha_0 = path_gain_target(target.distance, target.rcs, lam)
    m, n = scene.n_ses, scene.n_res
    denom = (
        n_slots * scene.n_bs_antennas * scene.tx_power
        * abs(alpha_g) ** 2 * abs(alpha_0) ** 2
        * math.pi**2 * cos_t**2
        * m * n * (m**2 + n**2 - 2)
    )
    return float(6.0 * scene.noise_power / denom)
