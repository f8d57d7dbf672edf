"""Random gate instances shared by the oracle-equivalence tests."""

import numpy as np

from hybridcz.fidelity import GateChannels, GateInput


def random_pair(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return tuple(v / np.linalg.norm(v))


def random_instance(rng, max_modes=8, max_alpha=2.0):
    """A random separable input and a random pair of lossy dispersive channels."""
    m = int(rng.integers(1, max_modes + 1))
    x = rng.normal(size=m) + 1j * rng.normal(size=m)
    x /= np.linalg.norm(x)
    optical = rng.uniform(0.3, 1.0, (2, 1)) * np.exp(1j * rng.uniform(-0.5, 0.5, (2, m))) * x
    mag = rng.uniform(0.0, 1.0, (2, m))
    c1 = mag * np.exp(1j * rng.uniform(-np.pi, np.pi, (2, m)))
    c2 = np.sqrt(1 - mag ** 2) * np.exp(1j * rng.uniform(-np.pi, np.pi, (2, m)))
    alpha = float(rng.uniform(0.2, max_alpha))
    gc = GateChannels(x, optical, c1, c2, alpha)
    return GateInput(random_pair(rng), random_pair(rng), alpha), gc
