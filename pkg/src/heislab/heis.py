"""Group-theoretic and linear-algebra primitives of the Heisenberg group H(n).

A point of H(n) is a pair (x, xbar) with x in R^{2n} (the horizontal part)
and xbar a real scalar (the vertical part).  The group law is

    (x, xbar) (y, ybar) = (x + y, xbar + ybar + omega(x, y) / 2)

with omega the standard symplectic form.  Sign and basis convention used
throughout the package: omega(v, w) = v^T J w with

    J = [[ 0,  I_n],
         [-I_n, 0 ]]

so omega(e_1, e_{n+1}) = 1.  The canonical primitive one-form is
lambda_x(v) = omega(x, v) / 2.  Dilations act by (x, xbar) -> (e x, e^2 xbar);
the homogeneous dimension is Q = 2n + 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "GroupInfo", "HeisPoint", "LinearHeisMap",
    "j_matrix", "symplectic_form", "omega_batch", "group_mul", "group_inv",
    "identity", "dilation", "hom_norm", "hom_dist", "lambda_form",
    "is_conformal_symplectic", "group_info",
]


@lru_cache(maxsize=None)
def _j_cached(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    J.setflags(write=False)
    return J


def j_matrix(n: int) -> np.ndarray:
    """The 2n x 2n matrix of the symplectic form (read-only)."""
    if n < 1:
        raise InvalidArgumentError("n must be a positive integer")
    return _j_cached(int(n))


def _check_even(dim, what="vector"):
    if dim % 2 != 0 or dim == 0:
        raise InvalidArgumentError(f"{what} length must be even and positive, got {dim}")


def symplectic_form(v, w) -> float:
    """omega(v, w) = v^T J w for two vectors of equal even length 2n."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape or v.ndim != 1:
        raise InvalidArgumentError(f"shape mismatch: {v.shape} vs {w.shape}")
    _check_even(v.shape[0])
    n = v.shape[0] // 2
    return float(v[:n] @ w[n:] - v[n:] @ w[:n])


def omega_batch(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """omega applied along the last axis of broadcastable arrays (..., 2n)."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    _check_even(v.shape[-1])
    n = v.shape[-1] // 2
    return np.sum(v[..., :n] * w[..., n:], axis=-1) - np.sum(v[..., n:] * w[..., :n], axis=-1)


@dataclass(frozen=True)
class GroupInfo:
    """Static data of H(n): homogeneous dimension Q = 2n + 2, step 2."""

    n: int
    Q: int = field(init=False)
    step: int = field(init=False, default=2)

    def __post_init__(self):
        if self.n < 1 or self.n != int(self.n):
            raise InvalidArgumentError("n must be a positive integer")
        object.__setattr__(self, "Q", 2 * self.n + 2)
        object.__setattr__(self, "step", 2)


def group_info(n: int) -> GroupInfo:
    return GroupInfo(n)


@dataclass(frozen=True)
class HeisPoint:
    """A point (x, xbar) of H(n); immutable, entries finite."""

    x: np.ndarray
    xbar: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float, copy=True)
        if x.ndim != 1:
            raise InvalidArgumentError("horizontal part must be a 1-d vector")
        _check_even(x.shape[0], "horizontal part")
        if not (np.all(np.isfinite(x)) and np.isfinite(self.xbar)):
            raise InvalidArgumentError("HeisPoint entries must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xbar", float(self.xbar))

    @property
    def n(self) -> int:
        return self.x.shape[0] // 2

    def __iter__(self):
        yield self.x
        yield self.xbar

    def allclose(self, other: "HeisPoint", atol: float = 0.0, rtol: float = 1e-12) -> bool:
        return (np.allclose(self.x, other.x, atol=atol, rtol=rtol)
                and np.isclose(self.xbar, other.xbar, atol=atol, rtol=rtol))


def identity(n: int) -> HeisPoint:
    return HeisPoint(np.zeros(2 * n), 0.0)


def _same_n(p: HeisPoint, q: HeisPoint):
    if p.x.shape != q.x.shape:
        raise InvalidArgumentError(
            f"points live in different groups: 2n = {p.x.shape[0]} vs {q.x.shape[0]}")


def group_mul(p: HeisPoint, q: HeisPoint) -> HeisPoint:
    """Group product (x+y, xbar+ybar+omega(x,y)/2)."""
    _same_n(p, q)
    return HeisPoint(p.x + q.x, p.xbar + q.xbar + 0.5 * symplectic_form(p.x, q.x))


def group_inv(p: HeisPoint) -> HeisPoint:
    """Group inverse (-x, -xbar); follows from omega(x, x) = 0."""
    return HeisPoint(-p.x, -p.xbar)


def dilation(eps: float, p: HeisPoint) -> HeisPoint:
    """The automorphism (x, xbar) -> (eps x, eps^2 xbar), eps > 0."""
    if not eps > 0:
        raise InvalidArgumentError(f"dilation factor must be positive, got {eps}")
    return HeisPoint(eps * p.x, eps * eps * p.xbar)


def hom_norm(p: HeisPoint) -> float:
    """Homogeneous norm |x|_2 + |xbar|^(1/2): 1-homogeneous under dilations,
    symmetric under inversion, nonvanishing away from the identity."""
    return float(np.linalg.norm(p.x) + np.sqrt(abs(p.xbar)))


def hom_dist(p: HeisPoint, q: HeisPoint) -> float:
    """Left-invariant gauge distance hom_norm(p^-1 q); equivalent to the
    Carnot-Caratheodory distance by the ball-box estimates."""
    return hom_norm(group_mul(group_inv(p), q))


def lambda_form(x, v) -> float:
    """The canonical primitive of omega: lambda_x(v) = omega(x, v) / 2."""
    return 0.5 * symplectic_form(x, v)


def is_conformal_symplectic(A: np.ndarray, tol: float = 1e-9):
    """Test A^T J A = d J; returns (ok, d) with d read off entry (1, n+1).

    d = 1 with ok=True means A is symplectic; volume-preserving linear maps
    of H(n) are exactly those with d = 1.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError("expected a square matrix")
    _check_even(A.shape[0], "matrix")
    n = A.shape[0] // 2
    J = j_matrix(n)
    M = A.T @ J @ A
    d = float(M[0, n])
    ok = bool(np.max(np.abs(M - d * J)) <= tol)
    return ok, d


@dataclass(frozen=True)
class LinearHeisMap:
    """Block-diagonal linear map (x, xbar) -> (A x, d xbar).

    It is a group morphism commuting with dilations iff A is conformally
    symplectic with factor d (A^T J A = d J, d >= 0); it preserves Lebesgue
    volume on R^{2n+1} iff additionally d = 1, i.e. A is symplectic.
    """

    A: np.ndarray
    d: float = 1.0

    def __post_init__(self):
        A = np.array(self.A, dtype=float, copy=True)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidArgumentError("A must be square")
        _check_even(A.shape[0], "A")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "d", float(self.d))

    @property
    def n(self) -> int:
        return self.A.shape[0] // 2

    def __call__(self, p: HeisPoint) -> HeisPoint:
        return HeisPoint(self.A @ p.x, self.d * p.xbar)

    def is_morphism(self, tol: float = 1e-9) -> bool:
        ok, d = is_conformal_symplectic(self.A, tol)
        return ok and abs(d - self.d) <= tol

    def is_volume_preserving(self, tol: float = 1e-9) -> bool:
        ok, d = is_conformal_symplectic(self.A, tol)
        return ok and abs(d - 1.0) <= tol and abs(self.d - 1.0) <= tol
