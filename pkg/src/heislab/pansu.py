"""Numerical differentiation intrinsic to the group structure.

The finite-difference function of a map f at p with scale eps is

    F_eps(y) = delta_{1/eps}( f(p)^-1 f(p delta_eps y) )

For maps that are group morphisms commuting with dilations F_eps is
independent of eps; for differentiable maps it converges as eps -> 0 to a
block map (A y_x, d y_bar), which this module fits from probe evaluations
and certifies with residual diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidArgumentError
from .geometry import Box
from .heis import (HeisPoint, LinearHeisMap, dilation, group_inv, group_mul,
                   hom_dist, hom_norm, j_matrix)

__all__ = [
    "HeisMap", "PansuReport", "ScalarPansuReport",
    "finite_difference", "pansu_derivative", "pansu_derivative_scalar",
    "is_linear_heis", "default_probes",
]

DEFAULT_EPS_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4)
DEFAULT_CONVERGENCE_TOL = 1e-4


@dataclass(frozen=True)
class HeisMap:
    """An evaluable map of H(n) with a provenance tag.

    ``domain`` is optional; when set, evaluation outside it raises
    DomainError (the horizontal part is what is boxed).
    """

    fn: Callable[[HeisPoint], HeisPoint]
    descriptor: str = "custom"
    domain: Optional[Box] = None

    def __call__(self, p: HeisPoint) -> HeisPoint:
        if self.domain is not None and not self.domain.contains(p.x):
            raise DomainError(
                f"map '{self.descriptor}' evaluated outside its domain box")
        return self.fn(p)


@dataclass(frozen=True)
class PansuReport:
    """Fitted block candidate and per-scale sup deviations (decreasing eps)."""

    candidate: LinearHeisMap
    residuals: tuple  # ((eps, sup_deviation), ...) ordered by decreasing eps
    converged: bool

    def final_residual(self) -> float:
        return self.residuals[-1][1]


@dataclass(frozen=True)
class ScalarPansuReport:
    covector: np.ndarray
    residuals: tuple
    converged: bool
    classical_gap: Optional[float] = None

    def final_residual(self) -> float:
        return self.residuals[-1][1]


def default_probes(n: int, num_random: int = 20, seed: int = 7) -> list:
    """Probe set on the unit gauge sphere: +-horizontal basis directions,
    one vertical direction, plus random points of the unit gauge ball."""
    probes = []
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = 1.0
        probes.append(HeisPoint(e, 0.0))
        probes.append(HeisPoint(-e, 0.0))
    probes.append(HeisPoint(np.zeros(2 * n), 1.0))
    rng = np.random.default_rng(seed)
    for _ in range(num_random):
        x = rng.normal(size=2 * n)
        v = rng.normal()
        p = HeisPoint(x, v)
        r = hom_norm(p)
        if r > 0:
            scale = rng.uniform(0.2, 1.0) / r
            p = dilation(scale, p)
        probes.append(p)
    return probes


def finite_difference(f, p: HeisPoint, eps: float, y: HeisPoint) -> HeisPoint:
    """delta_{1/eps}( f(p)^-1 f(p delta_eps y) )."""
    if not eps > 0:
        raise InvalidArgumentError("eps must be positive")
    fp = f(p)
    fq = f(group_mul(p, dilation(eps, y)))
    return dilation(1.0 / eps, group_mul(group_inv(fp), fq))


def _fit_candidate(f, p, eps, n) -> LinearHeisMap:
    # horizontal block by least squares over the +-basis probes, vertical
    # multiplier from the central probe
    ys = []
    imgs = []
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = 1.0
        for s in (1.0, -1.0):
            y = HeisPoint(s * e, 0.0)
            ys.append(s * e)
            imgs.append(finite_difference(f, p, eps, y).x)
    Y = np.asarray(ys)
    G = np.asarray(imgs)
    A, *_ = np.linalg.lstsq(Y, G, rcond=None)
    A = A.T
    d = finite_difference(f, p, eps, HeisPoint(np.zeros(2 * n), 1.0)).xbar
    return LinearHeisMap(A, d)


def pansu_derivative(f, p: HeisPoint, eps_schedule=DEFAULT_EPS_SCHEDULE,
                     probes=None, tol: float = DEFAULT_CONVERGENCE_TOL) -> PansuReport:
    """Fit a block-linear candidate at the smallest scale and report the sup
    gauge deviation of the finite differences from it across the schedule.

    ``converged`` requires the residuals to be non-increasing (up to a tiny
    slack) with the final one below tol.  Non-convergence is reported, not
    raised.
    """
    eps_schedule = sorted((float(e) for e in eps_schedule), reverse=True)
    if len(eps_schedule) < 3:
        raise InvalidArgumentError("eps schedule needs at least 3 entries")
    if any(e <= 0 for e in eps_schedule):
        raise InvalidArgumentError("eps values must be positive")
    n = p.n
    if probes is None:
        probes = default_probes(n)
    if not probes:
        raise InvalidArgumentError("probe set must be non-empty")

    cand = _fit_candidate(f, p, eps_schedule[-1], n)
    residuals = []
    for eps in eps_schedule:
        sup = 0.0
        for y in probes:
            sup = max(sup, hom_dist(cand(y), finite_difference(f, p, eps, y)))
        residuals.append((eps, sup))
    descending_ok = all(residuals[i + 1][1] <= residuals[i][1] + 1e-12 + 0.1 * residuals[i][1]
                        for i in range(len(residuals) - 1))
    converged = descending_ok and residuals[-1][1] <= tol
    return PansuReport(cand, tuple(residuals), converged)


def pansu_derivative_scalar(f, p: HeisPoint, eps_schedule=DEFAULT_EPS_SCHEDULE,
                            probes=None, tol: float = DEFAULT_CONVERGENCE_TOL,
                            grad_x=None, grad_xbar=None) -> ScalarPansuReport:
    """Pansu differential of a scalar functional f: H(n) -> R.

    The differential of a scalar at p is a horizontal covector w acting by
    w . y_x (it annihilates the center).  When classical gradients are
    supplied, the fitted w is cross-checked against

        w_cl = df/dx(p) - (df/dxbar(p) / 2) J x_p

    which is the classical expression of the same covector.
    """
    eps_schedule = sorted((float(e) for e in eps_schedule), reverse=True)
    if len(eps_schedule) < 3:
        raise InvalidArgumentError("eps schedule needs at least 3 entries")
    n = p.n
    if probes is None:
        probes = default_probes(n)

    def fd(eps, y):
        return (f(group_mul(p, dilation(eps, y))) - f(p)) / eps

    eps0 = eps_schedule[-1]
    w = np.zeros(2 * n)
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = 1.0
        w[i] = 0.5 * (fd(eps0, HeisPoint(e, 0.0)) - fd(eps0, HeisPoint(-e, 0.0)))

    residuals = []
    for eps in eps_schedule:
        sup = 0.0
        for y in probes:
            sup = max(sup, abs(fd(eps, y) - float(w @ y.x)))
        residuals.append((eps, sup))
    descending_ok = all(residuals[i + 1][1] <= residuals[i][1] + 1e-12 + 0.1 * residuals[i][1]
                        for i in range(len(residuals) - 1))
    converged = descending_ok and residuals[-1][1] <= tol

    classical_gap = None
    if grad_x is not None and grad_xbar is not None:
        J = j_matrix(n)
        w_cl = np.asarray(grad_x(p), dtype=float) - 0.5 * float(grad_xbar(p)) * (J @ p.x)
        classical_gap = float(np.max(np.abs(w - w_cl)))
    return ScalarPansuReport(w, tuple(residuals), converged, classical_gap)


def is_linear_heis(F, n: int, num_samples: int = 50,
                   eps_grid=(2.0, 1.0, 0.5, 0.25), tol: float = 1e-9,
                   seed: int = 11) -> bool:
    """Test the two linearity axioms by sampling: group morphism property
    F(pq) = F(p)F(q) and dilation commutation F(delta_eps p) = delta_eps F(p),
    both measured in the gauge distance."""
    rng = np.random.default_rng(seed)
    sup = 0.0
    for _ in range(num_samples):
        p = HeisPoint(rng.normal(size=2 * n), rng.normal())
        q = HeisPoint(rng.normal(size=2 * n), rng.normal())
        sup = max(sup, hom_dist(F(group_mul(p, q)), group_mul(F(p), F(q))))
        for eps in eps_grid:
            sup = max(sup, hom_dist(F(dilation(eps, p)), dilation(eps, F(p))))
        if sup > tol:
            return False
    return sup <= tol
