"""Dense real-symmetric matrix algebra and spectral scalar functions.

Everything downstream (energies, Poincare constants, moment checkers) is
built on these kernels.  Matrices are plain float64 ``numpy`` arrays that are
symmetrized on construction instead of validated, so asymmetry can never
drift in from arithmetic.  Scalar functions are applied through the
eigendecomposition: ``phi(A) = Q diag(phi(w)) Q^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError, NumericError

# Shared relative tolerance for equality-style comparisons, scaled by
# (1 + magnitude).  Inequality checkers use their own slack knob (see bounds).
RTOL = 1e-10


def symmetrize(raw) -> np.ndarray:
    """Return the symmetric part (A + A^T)/2 as a fresh float64 array."""
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q, w = self.eigenvectors, self.eigenvalues
        return (q * w) @ q.T


def eigh(a) -> SpectralDecomposition:
    """Spectral decomposition of a symmetric matrix.

    Verifies the reconstruction and orthogonality contracts
    (residuals below RTOL * (1 + |A|)) and raises NumericError with a
    condition report if the solver fails or the contracts are violated.
    """
    a = symmetrize(a)
    try:
        w, q = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            "symmetric eigensolver failed to converge: "
            f"dim={a.shape[0]}, fro_norm={np.linalg.norm(a):.3e}, "
            f"max_entry={np.max(np.abs(a)):.3e}"
        ) from exc
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    recon_err = np.linalg.norm((q * w) @ q.T - a, 2)
    orth_err = np.linalg.norm(q.T @ q - np.eye(a.shape[0]), 2)
    if recon_err > RTOL * (1.0 + scale) or orth_err > RTOL:
        raise NumericError(
            f"eigendecomposition accuracy contract violated: "
            f"reconstruction={recon_err:.3e}, orthogonality={orth_err:.3e}, "
            f"spectral_range=({w[0]:.3e}, {w[-1]:.3e})"
        )
    return SpectralDecomposition(eigenvalues=w, eigenvectors=q)


@dataclass(frozen=True)
class ScalarFnSpec:
    """A scalar function, applicable to matrices through the spectrum.

    ``kind`` is one of cosh, sinh, cosh2, sinh2, abs_pow, signed_pow, affine,
    custom.  Hyperbolic kinds carry a scale t and act as s -> f(t*s); power
    kinds carry the exponent; affine carries (a, b).  ``deriv`` and
    ``sq_deriv`` give phi' and psi = (phi')^2, needed by the mean-value and
    chain-rule checkers, which only admit kinds whose psi is convex
    (see ``convex_sq_derivative``).
    """

    kind: str
    params: tuple = ()
    fn: Callable | None = None
    dfn: Callable | None = None

    def __post_init__(self):
        if self.kind in ("abs_pow", "signed_pow") and not self.params[0] > 0:
            raise DomainError(f"{self.kind} exponent must be positive, got {self.params[0]}")
        if self.kind == "custom" and self.fn is None:
            raise DomainError("custom scalar function requires an evaluator")

    # -- constructors -------------------------------------------------------
    @staticmethod
    def cosh(scale: float = 1.0) -> "ScalarFnSpec":
        return ScalarFnSpec("cosh", (float(scale),))

    @staticmethod
    def sinh(scale: float = 1.0) -> "ScalarFnSpec":
        return ScalarFnSpec("sinh", (float(scale),))

    @staticmethod
    def cosh2(scale: float = 1.0) -> "ScalarFnSpec":
        return ScalarFnSpec("cosh2", (float(scale),))

    @staticmethod
    def sinh2(scale: float = 1.0) -> "ScalarFnSpec":
        return ScalarFnSpec("sinh2", (float(scale),))

    @staticmethod
    def abs_pow(p: float) -> "ScalarFnSpec":
        return ScalarFnSpec("abs_pow", (float(p),))

    @staticmethod
    def signed_pow(q: float) -> "ScalarFnSpec":
        return ScalarFnSpec("signed_pow", (float(q),))

    @staticmethod
    def affine(a: float, b: float = 0.0) -> "ScalarFnSpec":
        return ScalarFnSpec("affine", (float(a), float(b)))

    @staticmethod
    def custom(fn: Callable, dfn: Callable | None = None) -> "ScalarFnSpec":
        return ScalarFnSpec("custom", (), fn=fn, dfn=dfn)

    # -- evaluation ---------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "cosh":
            return np.cosh(p[0] * x)
        if k == "sinh":
            return np.sinh(p[0] * x)
        if k == "cosh2":
            return np.cosh(p[0] * x) ** 2
        if k == "sinh2":
            return np.sinh(p[0] * x) ** 2
        if k == "abs_pow":
            return np.abs(x) ** p[0]
        if k == "signed_pow":
            return np.sign(x) * np.abs(x) ** p[0]
        if k == "affine":
            return p[0] * x + p[1]
        return np.asarray(self.fn(x), dtype=float)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "cosh":
            return p[0] * np.sinh(p[0] * x)
        if k == "sinh":
            return p[0] * np.cosh(p[0] * x)
        if k in ("cosh2", "sinh2"):
            return p[0] * np.sinh(2.0 * p[0] * x)
        if k == "abs_pow":
            return p[0] * np.sign(x) * np.abs(x) ** (p[0] - 1.0)
        if k == "signed_pow":
            return p[0] * np.abs(x) ** (p[0] - 1.0)
        if k == "affine":
            return np.full_like(x, p[0])
        if self.dfn is None:
            raise DomainError("custom scalar function has no derivative attached")
        return np.asarray(self.dfn(x), dtype=float)

    def sq_deriv(self, x):
        d = self.deriv(x)
        return d * d

    @property
    def convex_sq_derivative(self) -> bool:
        """Whitelist of kinds whose (phi')^2 is convex: sinh, signed_pow with
        exponent >= 1.5, and affine.  No symbolic convexity analysis."""
        if self.kind == "sinh":
            return True
        if self.kind == "signed_pow":
            return self.params[0] >= 1.5
        return self.kind == "affine"

    def label(self) -> str:
        if self.params:
            args = ",".join(f"{v:g}" for v in self.params)
            return f"{self.kind}({args})"
        return self.kind


def apply_spectral_fn(a, fn: ScalarFnSpec) -> np.ndarray:
    """phi(A) through the eigendecomposition; commutes with A."""
    dec = eigh(a)
    q = dec.eigenvectors
    return symmetrize((q * fn(dec.eigenvalues)) @ q.T)


def op_norm(a) -> float:
    """l2 operator norm: the largest absolute eigenvalue."""
    a = symmetrize(a)
    w = np.linalg.eigvalsh(a)
    return float(np.max(np.abs(w))) if w.size else 0.0


def trace_fn(a, fn: ScalarFnSpec, normalized: bool = False) -> float:
    """tr phi(A); the scalar function binds before the trace."""
    a = symmetrize(a)
    w = np.linalg.eigvalsh(a)
    t = float(np.sum(fn(w)))
    return t / a.shape[0] if normalized else t


def psd_order_leq(a, b, tol: float = RTOL) -> bool:
    """True iff A <= B in the semidefinite order, up to tol*(1+|B-A|)."""
    a = symmetrize(a)
    b = symmetrize(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    w = np.linalg.eigvalsh(b - a)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    return bool(w[0] >= -tol * (1.0 + scale))


def intdim(a, tol: float = RTOL) -> float:
    """Intrinsic dimension tr(A)/|A| of a PSD matrix; 0 for the zero matrix.

    Always between 1 and rank(A) for nonzero PSD input.  Raises DomainError
    when A has an eigenvalue below -tol*(1+|A|).
    """
    a = symmetrize(a)
    w = np.linalg.eigvalsh(a)
    norm = float(np.max(np.abs(w)))
    if norm == 0.0:
        return 0.0
    if w[0] < -tol * (1.0 + norm):
        raise DomainError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    return float(np.sum(w)) / norm


def dilate(h) -> np.ndarray:
    """Self-adjoint dilation [[0, H], [H^T, 0]] of a rectangular matrix.

    Its operator norm equals the largest singular value of H, and its
    spectrum is symmetric about zero.
    """
    h = np.atleast_2d(np.asarray(h, dtype=float))
    d1, d2 = h.shape
    out = np.zeros((d1 + d2, d1 + d2))
    out[:d1, d1:] = h
    out[d1:, :d1] = h.T
    return out


def rank_with_threshold(a, rel_threshold: float = 1e-10) -> int:
    """Eigenvalue-count rank with threshold rel_threshold * |A|."""
    a = symmetrize(a)
    w = np.abs(np.linalg.eigvalsh(a))
    norm = float(np.max(w))
    if norm == 0.0:
        return 0
    return int(np.sum(w > rel_threshold * norm))
