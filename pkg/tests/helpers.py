"""Random small scenarios shared by the multiport tests and the acceptance suite."""

import numpy as np

from coupledarray.impedance import ImpedanceBlocks
from coupledarray.multiport import NoiseModel, TerminationModel


def _cluster(rng, k, centre, spread=2.0, min_dist=0.1):
    while True:
        p = np.zeros((k, 3))
        p[:, :2] = centre + rng.uniform(-spread, spread, (k, 2))
        if k == 1:
            return p
        d = np.linalg.norm(p[:, None] - p[None], axis=-1)[np.triu_indices(k, 1)]
        if d.min() > min_dist:
            return p


def random_link(rng, max_n=8, max_m=8):
    """Transmitter/receiver clusters with random terminations, noise and loss."""
    n, m = (int(v) for v in rng.integers(1, [max_n + 1, max_m + 1]))
    tx = _cluster(rng, n, np.zeros(2))
    rx = _cluster(rng, m, rng.uniform(5, 50) * np.array([1.0, rng.uniform(-1, 1)]))
    blocks = ImpedanceBlocks.from_positions(tx, rx)
    term = TerminationModel(z_load=complex(rng.uniform(20, 300), rng.uniform(-100, 100)))
    noise = NoiseModel(
        sigma_u=rng.uniform(0, 1e-9),
        sigma_i=rng.uniform(0, 1e-11),
        rho=0.5 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()),
    )
    gamma = float(rng.uniform(0, 0.1))
    return blocks, term, noise, gamma
