"""Tolerance-disciplined numerical primitives.

Every rank decision, pseudo-inverse, and definiteness check in the package
goes through this module so that a single :class:`Tolerance` governs how
floating-point fuzz is resolved.  All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NotPositiveDefiniteError

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "svd_full",
    "rank",
    "pinv",
    "psd_sqrt",
    "expm",
    "generalized_eigenvalues",
    "PencilSpectrum",
    "symmetrize",
]


@dataclass(frozen=True)
class Tolerance:
    """Thresholds for floating-point comparisons.

    rank_rel
        Relative singular-value cutoff: values below ``rank_rel * smax`` do
        not count toward rank.  The default is a generous multiple of
        ``max_dim * machine_eps`` for the matrix sizes handled here (tens of
        rows), leaving several orders of magnitude between roundoff and the
        smallest structurally nonzero singular values.
    zero_abs
        Absolute threshold for "is zero" comparisons (eigenvalue clamping,
        symmetry checks).
    unit_circle_eps
        Half-width of the band around ``|z| = 1`` used when classifying
        (generalized) eigenvalues against the unit circle.
    """

    rank_rel: float = 1e-11
    zero_abs: float = 1e-10
    unit_circle_eps: float = 1e-6

    def __post_init__(self):
        if not (0.0 < self.rank_rel < 1.0):
            raise InvalidInputError("rank_rel must lie in (0, 1)")
        if self.zero_abs <= 0.0 or self.unit_circle_eps <= 0.0:
            raise InvalidInputError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


def _as_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Average a square matrix with its transpose (roundoff-drift control)."""
    return 0.5 * (m + m.T)


def svd_full(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full singular value decomposition ``m = u @ diag_rect(s) @ vt``.

    Returns square orthogonal ``u`` (p x p) and ``vt`` (q x q) and the
    singular values in descending order.  Empty dimensions are legal.
    """
    a = _as_matrix(m)
    return np.linalg.svd(a, full_matrices=True)


def rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    """Numerical rank: singular values above ``rank_rel * smax``.

    Empty and zero matrices have rank 0.
    """
    a = _as_matrix(m)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel * s[0]))


def pinv(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse; an empty matrix maps to its empty transpose."""
    a = _as_matrix(m)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    return np.linalg.pinv(a, rcond=tol.rank_rel)


def psd_sqrt(s, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Symmetric factor ``f`` of a PSD matrix with ``f @ f.T == s``.

    Eigenvalues in ``[-zero_abs, 0)`` are clamped to zero (covariance
    recursions accumulate roundoff); anything more negative raises
    :class:`NotPositiveDefiniteError`.
    """
    a = _as_matrix(s, "psd matrix")
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"psd_sqrt needs a square matrix, got {a.shape}")
    if a.size == 0:
        return a.copy()
    scale = float(np.max(np.abs(a))) or 1.0
    if np.max(np.abs(a - a.T)) > tol.zero_abs * max(1.0, scale):
        raise InvalidInputError("psd_sqrt input is not symmetric to tolerance")
    w, v = np.linalg.eigh(symmetrize(a))
    if w[0] < -tol.zero_abs:
        raise NotPositiveDefiniteError(
            f"matrix has eigenvalue {w[0]:.3e} below -zero_abs; not PSD"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def expm(m) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring via scipy)."""
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expm needs a square matrix, got {a.shape}")
    if a.size == 0:
        return a.copy()
    return scipy.linalg.expm(a)


@dataclass(frozen=True)
class PencilSpectrum:
    """Spectrum of a square pencil ``z*E - F``.

    finite
        All finite ``z`` with ``det(z*E - F) = 0``, multiplicity respected.
    n_infinite
        Count of eigenvalues at infinity (rank deficiency of ``E``).
    singular
        True when the determinant vanishes identically; ``finite`` is then
        empty and meaningless.
    """

    finite: np.ndarray
    n_infinite: int
    singular: bool


def generalized_eigenvalues(e, f, tol: Tolerance = DEFAULT_TOL) -> PencilSpectrum:
    """Eigenvalues of the square pencil ``z*E - F``.

    Uses the QZ decomposition; infinite eigenvalues are flagged rather than
    returned.  Singularity of the pencil (identically vanishing determinant)
    is decided by rank probes at three fixed pseudo-random points.
    """
    ea = _as_matrix(e, "E")
    fa = _as_matrix(f, "F")
    if ea.shape != fa.shape or ea.shape[0] != ea.shape[1]:
        raise InvalidInputError(
            f"pencil matrices must be square and same shape, got {ea.shape}, {fa.shape}"
        )
    n = ea.shape[0]
    if n == 0:
        return PencilSpectrum(np.zeros(0, dtype=complex), 0, False)

    probe_rng = np.random.default_rng(0x5EED)
    probes = probe_rng.standard_normal(3) + 1j * probe_rng.standard_normal(3)
    def full_rank_at(z):
        s = np.linalg.svd(z * ea - fa, compute_uv=False)
        return s[0] > 0 and s[-1] > tol.rank_rel * s[0]
    if not any(full_rank_at(z) for z in probes):
        return PencilSpectrum(np.zeros(0, dtype=complex), 0, True)

    alpha, beta = scipy.linalg.eig(fa, ea, right=False, homogeneous_eigvals=True)
    scale = max(np.max(np.abs(alpha)), np.max(np.abs(beta)), 1.0)
    finite = []
    n_inf = 0
    for a_i, b_i in zip(alpha, beta):
        if abs(b_i) > tol.rank_rel * scale:
            finite.append(a_i / b_i)
        else:
            n_inf += 1
    return PencilSpectrum(np.array(finite, dtype=complex), n_inf, False)
