import numpy as np
import pytest

from lise.linalg import DEFAULT_TOL, rank
from lise.model import SystemModel, SystemStep, validate


def random_psd(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    return scale * (a @ a.T) / n


def random_pd(rng, n, scale=1.0):
    return random_psd(rng, n, scale) + 0.2 * scale * np.eye(n)


def stable_matrix(rng, n, radius=0.9):
    a = rng.standard_normal((n, n))
    eig = np.max(np.abs(np.linalg.eigvals(a)))
    return a * (radius / eig) if eig > 0 else a


def random_system(rng, n=4, l=3, p=1, p_h=0, m=1, radius=0.9):
    """Random valid, estimable system with the requested feedthrough rank.

    Retries until both the standing model assumptions and the input-estimation
    rank condition rank(C2 G2) = p - p_h hold (they do almost surely, but the
    suite must be deterministic).
    """
    from lise.decomposition import decompose

    assert n >= l >= 1 and l >= p >= 0 and 0 <= p_h <= p
    for _ in range(50):
        a = stable_matrix(rng, n, radius)
        b = rng.standard_normal((n, m))
        c = rng.standard_normal((l, n))
        d = rng.standard_normal((l, m))
        g = rng.standard_normal((n, p))
        if p_h == 0:
            h = np.zeros((l, p))
        else:
            h = rng.standard_normal((l, p_h)) @ np.vstack(
                [np.eye(p_h), np.zeros((p - p_h, p_h))]).T
            h = h @ np.linalg.qr(rng.standard_normal((p, p)))[0]
        q = random_psd(rng, n, 0.3)
        r = random_pd(rng, l, 0.5)
        step = SystemStep(A=a, B=b, C=c, D=d, G=g, H=h, Q=q, R=r)
        model = SystemModel.time_invariant(step)
        if validate(model):
            continue
        dec = decompose(step)
        if dec.p_h != p_h:
            continue
        if rank(dec.C2 @ dec.G2, DEFAULT_TOL) != p - p_h:
            continue
        return model
    raise AssertionError("failed to draw a valid random system")


@pytest.fixture(scope="session")
def fault_models():
    from lise.benchmarks import fault_system

    return {i: fault_system(i) for i in range(1, 7)}
