"""Independent closed-form references used by the unit and acceptance tests.

These are written straight from the special-case equations (no feedthrough;
full-column-rank feedthrough) without reusing the filter implementation, so
they can serve as oracles for it.
"""

import numpy as np

from lise.linalg import pinv, symmetrize


def no_feedthrough_oracle(model, ys, us, x0, p0):
    """Joint state/input recursion for H = 0 (pseudo-inverse gain reduction).

    Yields per step: filtered state, its covariance, the delayed input
    estimate and its covariance.
    """
    step = model.step(0)
    a, b, c, d, g, q, r = step.A, step.B, step.C, step.D, step.G, step.Q, step.R
    n = step.n
    xh = np.asarray(x0, dtype=float).copy()
    px = np.asarray(p0, dtype=float).copy()
    outs = []
    for k in range(1, ys.shape[0]):
        p_pred = a @ px @ a.T + q
        r_tilde = c @ p_pred @ c.T + r
        ri = np.linalg.inv(r_tilde)
        pd = np.linalg.inv(g.T @ c.T @ ri @ c @ g)
        m = pd @ g.T @ c.T @ ri
        xpred = a @ xh + b @ us[k - 1]
        dhat = m @ (ys[k] - c @ xpred - d @ us[k])
        igmc = np.eye(n) - g @ m @ c
        p_star = igmc @ p_pred @ igmc.T + g @ m @ r @ m.T @ g.T
        xstar = xpred + g @ dhat
        r_star = symmetrize(c @ p_star @ c.T + r - c @ g @ m @ r - r @ m.T @ g.T @ c.T)
        s = -g @ m @ r + p_star @ c.T
        l_gain = s @ pinv(r_star)
        xh = xstar + l_gain @ (ys[k] - c @ xstar - d @ us[k])
        px = symmetrize(p_star + l_gain @ r_star @ l_gain.T
                        - l_gain @ s.T - s @ l_gain.T)
        outs.append((xh.copy(), px.copy(), dhat.copy(), pd.copy()))
    return outs


def full_rank_gain_oracle(step, px_star):
    """State-update gain for full-column-rank feedthrough.

    Annihilates the feedthrough directions through the weighted projector
    built from the (here nonsingular) innovation covariance.
    """
    r_tilde = step.C @ px_star @ step.C.T + step.R
    ri = np.linalg.inv(r_tilde)
    h = step.H
    inner = np.eye(step.l) - h @ np.linalg.inv(h.T @ ri @ h) @ h.T @ ri
    return px_star @ step.C.T @ ri @ inner
