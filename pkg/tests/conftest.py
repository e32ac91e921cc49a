import math

import hypothesis
import numpy as np

from irsdoa import SceneConfig, Target

hypothesis.settings.register_profile(
    "numerical", deadline=None, max_examples=25,
)
hypothesis.settings.load_profile("numerical")


def make_scene(n_res=32, n_ses=8, n_slots=32, angles_deg=(-10.0, 10.0, 30.0),
               tx_power_dbm=20.0, noise_power_dbm=-120.0, n_bs=64,
               theta_bi_deg=-60.0, distance=5.0, rcs_dbsm=10.0):
    """Benchmark scene at desk scale; everything overridable."""
    return SceneConfig(
        n_bs_antennas=n_bs,
        n_res=n_res,
        n_ses=n_ses,
        n_slots=n_slots,
        carrier_freq=28e9,
        tx_power=10 ** ((tx_power_dbm - 30.0) / 10.0),
        noise_power=10 ** ((noise_power_dbm - 30.0) / 10.0),
        bs_irs_distance=30.0,
        bs_departure_angle=math.radians(theta_bi_deg),
        irs_arrival_angle=math.radians(theta_bi_deg),
        targets=tuple(
            Target(angle=math.radians(a), distance=distance,
                   rcs=10 ** (rcs_dbsm / 10.0))
            for a in angles_deg
        ),
    )



def random_hermitian(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_psd(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a @ a.conj().T)


def assert_close(actual, expected, rtol=1e-10, atol=0.0):
    np.testing.assert_allclose(actual, expected, rtol=rtol, atol=atol)
