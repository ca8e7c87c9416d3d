"""Linear discrete-time system models with unknown inputs.

A system step bundles the eight matrices of

    x[k+1] = A x[k] + B u[k] + G d[k] + w[k],    w ~ (0, Q)
    y[k]   = C x[k] + D u[k] + H d[k] + v[k],    v ~ (0, R)

where ``u`` is a known input and ``d`` an unknown one that may act on the
dynamics (through G), on the measurement (through H), or both.  Models are
either time-invariant (one fixed step) or time-varying (a pure provider
function of the step index).  Continuous-time models are converted with a
zero-order hold on both known and unknown inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import InvalidInputError
from .linalg import DEFAULT_TOL, Tolerance, expm, rank

__all__ = [
    "SystemStep",
    "SystemModel",
    "ContinuousModel",
    "Violation",
    "validate",
    "c2d_zoh",
]


def _mat(value, rows: int | None, cols: int | None, name: str) -> np.ndarray:
    a = np.array(value, dtype=float)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise InvalidInputError(f"{name} must have {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise InvalidInputError(f"{name} must have {cols} columns, got {a.shape[1]}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SystemStep:
    """One time slice of the system matrices.

    Shape consistency is enforced at construction; semantic assumptions
    (definiteness, dimension ordering, rank of the stacked input map) are
    checked by :func:`validate`, which reports violations as data.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    G: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        a = _mat(self.A, None, None, "A")
        n = a.shape[0]
        if a.shape[1] != n:
            raise InvalidInputError(f"A must be square, got {a.shape}")
        b = _mat(self.B, n, None, "B")
        c = _mat(self.C, None, n, "C")
        l = c.shape[0]
        d = _mat(self.D, l, b.shape[1], "D")
        g = _mat(self.G, n, None, "G")
        h = _mat(self.H, l, g.shape[1], "H")
        q = _mat(self.Q, n, n, "Q")
        r = _mat(self.R, l, l, "R")
        for name, val in (("A", a), ("B", b), ("C", c), ("D", d),
                          ("G", g), ("H", h), ("Q", q), ("R", r)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.G.shape[1]

    @property
    def l(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Time-invariant or time-varying system.

    Time-varying models are supplied as a deterministic provider ``k -> SystemStep``
    so the whole horizon never needs to be materialized.
    """

    n: int
    m: int
    p: int
    l: int
    fixed: Optional[SystemStep] = None
    provider: Optional[Callable[[int], SystemStep]] = None
    horizon_hint: Optional[int] = None

    @classmethod
    def time_invariant(cls, step: SystemStep, horizon_hint: int | None = None) -> "SystemModel":
        return cls(step.n, step.m, step.p, step.l, fixed=step, horizon_hint=horizon_hint)

    @classmethod
    def time_varying(cls, provider: Callable[[int], SystemStep],
                     dims: tuple[int, int, int, int],
                     horizon_hint: int | None = None) -> "SystemModel":
        n, m, p, l = dims
        return cls(n, m, p, l, provider=provider, horizon_hint=horizon_hint)

    @property
    def is_time_invariant(self) -> bool:
        return self.fixed is not None

    def step(self, k: int) -> SystemStep:
        if self.fixed is not None:
            return self.fixed
        if self.provider is None:
            raise InvalidInputError("model has neither fixed step nor provider")
        s = self.provider(k)
        if (s.n, s.m, s.p, s.l) != (self.n, self.m, self.p, self.l):
            raise InvalidInputError(
                f"provider returned dims {(s.n, s.m, s.p, s.l)} at k={k}, "
                f"expected {(self.n, self.m, self.p, self.l)}"
            )
        return s


@dataclass(frozen=True)
class Violation:
    """One violated model assumption; ``index`` is the offending step."""

    index: Optional[int]
    field: str
    message: str


def _check_step(step: SystemStep, k: int, tol: Tolerance) -> list[Violation]:
    out = []
    for name in ("A", "B", "C", "D", "G", "H", "Q", "R"):
        a = getattr(step, name)
        if a.size and not np.all(np.isfinite(a)):
            out.append(Violation(k, name, f"{name} has non-finite entries"))
    n, m, p, l = step.n, step.m, step.p, step.l
    if not (n >= l >= 1):
        out.append(Violation(k, "dims", f"need n >= l >= 1, got n={n}, l={l}"))
    if not (l >= p >= 0):
        out.append(Violation(k, "dims", f"need l >= p >= 0, got l={l}, p={p}"))
    scale_q = max(1.0, float(np.max(np.abs(step.Q))) if step.Q.size else 0.0)
    if np.max(np.abs(step.Q - step.Q.T), initial=0.0) > tol.zero_abs * scale_q:
        out.append(Violation(k, "Q", "Q not symmetric"))
    elif step.Q.size:
        w = np.linalg.eigvalsh(0.5 * (step.Q + step.Q.T))
        if w[0] < -tol.zero_abs * scale_q:
            out.append(Violation(k, "Q", f"Q not PSD (min eigenvalue {w[0]:.3e})"))
    scale_r = max(1.0, float(np.max(np.abs(step.R))) if step.R.size else 0.0)
    if np.max(np.abs(step.R - step.R.T), initial=0.0) > tol.zero_abs * scale_r:
        out.append(Violation(k, "R", "R not symmetric"))
    else:
        w = np.linalg.eigvalsh(0.5 * (step.R + step.R.T))
        if w[0] <= 0.0 or w[0] < tol.rank_rel * w[-1]:
            out.append(Violation(k, "R", "R not PD"))
    return out


def validate(model: SystemModel, k_range: Iterable[int] | None = None,
             tol: Tolerance = DEFAULT_TOL) -> list[Violation]:
    """Check every model assumption over ``k_range``; empty list means valid.

    Includes the standing rank requirement that the stacked map
    ``[G; H]`` reaches rank p at some step in the range.
    """
    if k_range is None:
        if model.is_time_invariant:
            k_range = range(1)
        else:
            k_range = range((model.horizon_hint or 0) + 1)
    ks = list(k_range)
    if not ks:
        ks = [0]
    violations: list[Violation] = []
    best_stack_rank = 0
    for k in ks:
        step = model.step(k)
        violations.extend(_check_step(step, k, tol))
        best_stack_rank = max(best_stack_rank, rank(np.vstack([step.G, step.H]), tol))
    if best_stack_rank != model.p:
        violations.append(Violation(
            None, "G/H",
            f"max_k rank([G; H]) = {best_stack_rank} != p = {model.p}; "
            "drop linearly dependent unknown-input columns",
        ))
    return violations


@dataclass(frozen=True, eq=False)
class ContinuousModel:
    """Continuous-time model with noise intensities, sampled every ``dt`` seconds."""

    A: np.ndarray
    B: np.ndarray
    G: np.ndarray
    C: np.ndarray
    D: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    dt: float

    def __post_init__(self):
        a = _mat(self.A, None, None, "A")
        n = a.shape[0]
        if a.shape[1] != n:
            raise InvalidInputError(f"A must be square, got {a.shape}")
        b = _mat(self.B, n, None, "B")
        g = _mat(self.G, n, None, "G")
        c = _mat(self.C, None, n, "C")
        l = c.shape[0]
        d = _mat(self.D, l, b.shape[1], "D")
        h = _mat(self.H, l, g.shape[1], "H")
        q = _mat(self.Q, n, n, "Q")
        r = _mat(self.R, l, l, "R")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"dt must be positive and finite, got {self.dt}")
        for name, val in (("A", a), ("B", b), ("G", g), ("C", c), ("D", d),
                          ("H", h), ("Q", q), ("R", r)):
            object.__setattr__(self, name, val)


def _zoh_input(a_c: np.ndarray, b_c: np.ndarray, dt: float) -> np.ndarray:
    """Integral of exp(A s) B over one sample, via the augmented exponential."""
    n, m = b_c.shape
    if m == 0:
        return np.zeros((n, 0))
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = a_c
    aug[:n, n:] = b_c
    return expm(aug * dt)[:n, n:]


def c2d_zoh(cm: ContinuousModel, scale_r_by_dt: bool = False) -> SystemModel:
    """Discretize with a zero-order hold on the known and unknown inputs.

    The process-noise covariance comes from the standard augmented-exponential
    construction for sampled continuous noise.  By default the measurement
    covariance passes through unchanged (``R_d = R``); set ``scale_r_by_dt``
    to use the sampled-intensity convention ``R_d = R / dt``.
    """
    n = cm.A.shape[0]
    a_d = expm(cm.A * cm.dt)
    b_d = _zoh_input(cm.A, cm.B, cm.dt)
    g_d = _zoh_input(cm.A, cm.G, cm.dt)
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = -cm.A
    aug[:n, n:] = cm.Q
    aug[n:, n:] = cm.A.T
    phi = expm(aug * cm.dt)
    q_d = phi[n:, n:].T @ phi[:n, n:]
    q_d = 0.5 * (q_d + q_d.T)
    r_d = cm.R / cm.dt if scale_r_by_dt else cm.R
    step = SystemStep(A=a_d, B=b_d, C=cm.C, D=cm.D, G=g_d, H=cm.H, Q=q_d, R=r_d)
    return SystemModel.time_invariant(step)
