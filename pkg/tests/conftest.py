import numpy as np
import pytest

from invclust.model import Dataset, Dmp


def box_dmp(b1: float, b2: float) -> Dmp:
    """Axis-aligned box [0,b1] x [0,b2] as unit-L1 rows."""
    A = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    b = np.array([-b1, -b2, 0.0, 0.0])
    return Dmp(A=A, b=b)


@pytest.fixture
def example1() -> Dataset:
    """Three decision-makers on boxes (1.5,1), (1.5,1), (2.5,2.5) with
    observations (1.2,1), (1.5,0.6), (2.5,0.3)."""
    dmps = [box_dmp(1.5, 1.0), box_dmp(1.5, 1.0), box_dmp(2.5, 2.5)]
    x_hats = np.array([[1.2, 1.0], [1.5, 0.6], [2.5, 0.3]])
    return Dataset(dmps=dmps, x_hats=x_hats)


def random_dataset(seed: int, n: int, m: int, K: int, noise: float = 1.0,
                   shared: bool = False) -> Dataset:
    """Small random dataset built directly (independent of datagen): Gaussian
    rows around an interior anchor plus a +/-10 bounding box, all rows
    unit-L1, observations = perturbed vertices."""
    from invclust.model import normalize_rows, forward_solve, preflight

    rng = np.random.default_rng(seed)
    n_box = 2 * n
    if m < n_box + 1:
        raise ValueError("m too small for the bounding box construction")
    dmps = []
    shared_dmp = None
    x_hats = []
    for _ in range(K):
        if shared and shared_dmp is not None:
            dmp = shared_dmp
        else:
            while True:
                x0 = rng.uniform(0.0, 5.0, size=n)
                A_rand = rng.normal(size=(m - n_box, n))
                b_rand = A_rand @ x0 - rng.uniform(0.5, 2.0, size=m - n_box)
                A_box = np.vstack([np.eye(n), -np.eye(n)])
                b_box = np.concatenate([np.full(n, -10.0), np.full(n, -10.0)])
                dmp = normalize_rows(Dmp(A=np.vstack([A_rand, A_box]),
                                         b=np.concatenate([b_rand, b_box])))
                try:
                    preflight(dmp)
                    break
                except Exception:
                    continue
            if shared:
                shared_dmp = dmp
        g = rng.normal(size=n)
        c = g / np.abs(g).sum()
        x_star, _ = forward_solve(dmp, c)
        x_hats.append(x_star + rng.uniform(0.0, noise, size=n))
        dmps.append(dmp)
    return Dataset(dmps=dmps, x_hats=np.array(x_hats))
