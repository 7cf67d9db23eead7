"""Horizontal lifts of curves and lifts of symplectomorphisms to H(n).

A symplectomorphism phi of R^{2n} admits a potential F with

    dF = phi^* lambda - lambda,      lambda_x(v) = omega(x, v) / 2,

unique up to a constant fixed by an anchor value.  The lifted map

    (x, xbar) -> (phi(x), xbar + F(x))

is then a volume preserving homeomorphism of H(n); composition of lifts
corresponds to composition of the maps with F's added along the way.

The potential is integrated on a rectangular grid along axis-parallel paths
(x1 first, then x2, ...) with the trapezoid rule, so grid values carry an
O(h^2) error.  Exactness of the integrand 1-form (equivalent to phi being
symplectic) is certified separately by plaquette loop integrals evaluated
with a three-point Simpson rule per edge, which pushes quadrature noise far
below any genuine non-symplectic defect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import InvalidArgumentError, NotSymplecticError
from .geometry import Box
from .heis import HeisPoint, is_conformal_symplectic, j_matrix, omega_batch
from .pansu import HeisMap, pansu_derivative
from .paths import HeisPath

__all__ = [
    "SymplectoMap", "GeneratingField", "LiftedMap", "VerticalMap",
    "lift_curve", "generating_function", "lift_map", "cancelation_residual",
    "volume_check", "VolumeCheckReport",
    "linear_map", "rotation_map", "polynomial_shear",
]

DEFAULT_JAC_STEP = 1e-5
DEFAULT_EXACTNESS_TOL = 1e-6
DEFAULT_JAC_TOL = 1e-8


def lift_curve(times, xs, xbar0: float = 0.0) -> HeisPath:
    """The unique horizontal lift of a sampled curve in R^{2n}.

    Vertical increments follow the chord rule xbar_{k+1} - xbar_k
    = omega(x_k, x_{k+1}) / 2, which integrates omega(c, c')/2 exactly along
    each straight chord, so the output has zero horizontality residual by
    construction.
    """
    xs = np.asarray(xs, dtype=float)
    times = np.asarray(times, dtype=float)
    if xs.ndim != 2 or xs.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 samples of a curve (K, 2n)")
    gains = 0.5 * omega_batch(xs[:-1], xs[1:])
    xbars = xbar0 + np.concatenate([[0.0], np.cumsum(gains)])
    return HeisPath(times, xs, xbars)


@dataclass(frozen=True)
class SymplectoMap:
    """An evaluable map of R^{2n} with support box and optional analytic
    Jacobian (central differences with step ``jac_step`` otherwise)."""

    fn: Callable[[np.ndarray], np.ndarray]
    support: Box
    jac_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    descriptor: str = "custom"
    jac_step: float = DEFAULT_JAC_STEP

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.asarray(self.fn(X), dtype=float)

    @property
    def dim(self) -> int:
        return self.support.dim

    def jacobian(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.jac_fn is not None:
            return np.asarray(self.jac_fn(X), dtype=float)
        h = self.jac_step
        d = X.shape[-1]
        cols = []
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            cols.append((self(X + e) - self(X - e)) / (2.0 * h))
        return np.stack(cols, axis=-1)

    def symplectic_defect(self, X: np.ndarray) -> float:
        """max over points of ||Dphi^T J Dphi - J||_max."""
        D = self.jacobian(X)
        J = j_matrix(self.dim // 2)
        M = np.swapaxes(D, -1, -2) @ J @ D
        return float(np.max(np.abs(M - J)))


def linear_map(A: np.ndarray, support: Box, descriptor: str = "linear") -> SymplectoMap:
    A = np.asarray(A, dtype=float)
    return SymplectoMap(fn=lambda X: X @ A.T,
                        jac_fn=lambda X: np.broadcast_to(A, X.shape[:-1] + A.shape).copy(),
                        support=support, descriptor=descriptor)


def rotation_map(theta: float, support: Box) -> SymplectoMap:
    """Rigid rotation of R^2 (n = 1), symplectic for every angle."""
    c, s = np.cos(theta), np.sin(theta)
    A = np.array([[c, -s], [s, c]])
    return linear_map(A, support, descriptor=f"rotation({theta})")


def polynomial_shear(coeffs, support: Box, descriptor: str = "shear") -> SymplectoMap:
    """The map (x1, x2) -> (x1, x2 + p(x1)) with p given by ``coeffs``
    (highest degree first, numpy polyval convention); always symplectic."""
    coeffs = np.asarray(coeffs, dtype=float)
    dcoeffs = np.polyder(coeffs) if coeffs.size > 1 else np.zeros(1)

    def fn(X):
        out = np.array(X, dtype=float, copy=True)
        out[..., 1] += np.polyval(coeffs, X[..., 0])
        return out

    def jac(X):
        shape = X.shape[:-1]
        D = np.zeros(shape + (2, 2))
        D[..., 0, 0] = 1.0
        D[..., 1, 1] = 1.0
        D[..., 1, 0] = np.polyval(dcoeffs, X[..., 0])
        return D

    return SymplectoMap(fn=fn, jac_fn=jac, support=support, descriptor=descriptor)


@dataclass(frozen=True)
class GeneratingField:
    """Potential F sampled on a rectangular grid, with anchor normalization
    and the plaquette exactness residual of its defining 1-form."""

    box: Box
    axes: tuple
    values: np.ndarray
    anchor_point: np.ndarray
    anchor_value: float
    exactness_residual: float
    _interp: RegularGridInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        interp = RegularGridInterpolator(self.axes, self.values, method="linear",
                                         bounds_error=False, fill_value=None)
        object.__setattr__(self, "_interp", interp)

    @property
    def grid_shape(self):
        return self.values.shape

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """Bilinear (tensor-product linear) interpolation, O(h^2) off-grid."""
        X = np.asarray(X, dtype=float)
        return self._interp(X)

    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def to_csv(self, path):
        nodes = self.nodes().reshape(-1, self.box.dim)
        vals = self.values.reshape(-1)
        header = ",".join(f"x{i+1}" for i in range(self.box.dim)) + ",F"
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row, v in zip(nodes, vals):
                fh.write(",".join(repr(float(c)) for c in row) + f",{v!r}\n")


def _one_form(phi: SymplectoMap, X: np.ndarray) -> np.ndarray:
    """rho_j(x) = omega(phi(x), Dphi(x) e_j)/2 - omega(x, e_j)/2, as (..., 2n)."""
    n = phi.dim // 2
    J = j_matrix(n)
    P = phi(X)
    D = phi.jacobian(X)
    # omega(P, D e_j) = (P^T J D)_j
    lifted = np.einsum("...i,ij,...jk->...k", P, J, D)
    flat = np.einsum("...i,ij->...j", X, J)
    return 0.5 * (lifted - flat)


def generating_function(phi: SymplectoMap, shape=65, anchor=None,
                        jac_tol: float = DEFAULT_JAC_TOL,
                        exactness_tol: float = DEFAULT_EXACTNESS_TOL,
                        validate: bool = True) -> GeneratingField:
    """Integrate the potential of phi over a grid on its support box.

    anchor: None anchors F = 0 at the low grid corner; "origin" anchors
    F(0) = 0; a pair (point, value) anchors F(point) = value.

    Raises NotSymplecticError when the Jacobian fails the symplecticity
    check on the grid or the plaquette exactness residual exceeds
    ``exactness_tol`` (with ``validate=True``).
    """
    box = phi.support
    d = box.dim
    axes = tuple(box.axes(shape))
    nodes = box.grid(shape)
    steps = box.grid_spacing(shape)

    if validate:
        defect = phi.symplectic_defect(nodes.reshape(-1, d)[::max(1, nodes.size // (d * 512))])
        if defect > jac_tol:
            raise NotSymplecticError(
                f"Jacobian symplecticity defect {defect:.3e} exceeds {jac_tol:.1e}",
                residual=defect)

    rho = _one_form(phi, nodes)

    F = np.zeros(nodes.shape[:-1])
    for a in range(d):
        rho_a = rho[..., a]
        for i in range(F.shape[a] - 1):
            lo = tuple(slice(None) if b < a else (i if b == a else 0) for b in range(d))
            hi = tuple(slice(None) if b < a else (i + 1 if b == a else 0) for b in range(d))
            F[hi] = F[lo] + 0.5 * steps[a] * (rho_a[lo] + rho_a[hi])

    residual = _exactness_residual(phi, nodes, rho, steps)
    if validate and residual > exactness_tol:
        raise NotSymplecticError(
            f"exactness residual {residual:.3e} exceeds {exactness_tol:.1e}: "
            "the map is not symplectic", residual=residual)

    anchor_point = box.corner()
    anchor_value = 0.0
    if anchor == "origin":
        anchor_point = np.zeros(d)
    elif anchor is not None and anchor != "corner":
        anchor_point, anchor_value = np.asarray(anchor[0], dtype=float), float(anchor[1])
    fld = GeneratingField(box, axes, F, anchor_point, anchor_value, residual)
    offset = anchor_value - float(fld(anchor_point[None])[0])
    if offset != 0.0:
        fld = GeneratingField(box, axes, F + offset, anchor_point, anchor_value, residual)
    return fld


def _edge_simpson(phi, nodes, rho, steps, axis):
    """Simpson edge integrals of the 1-form along ``axis``: (h/6)(lo + 4 mid + hi)."""
    d = nodes.shape[-1]
    sl_lo = tuple(slice(None, -1) if b == axis else slice(None) for b in range(d))
    sl_hi = tuple(slice(1, None) if b == axis else slice(None) for b in range(d))
    mid_nodes = 0.5 * (nodes[sl_lo] + nodes[sl_hi])
    rho_mid = _one_form(phi, mid_nodes)[..., axis]
    return (steps[axis] / 6.0) * (rho[sl_lo + (axis,)] + 4.0 * rho_mid + rho[sl_hi + (axis,)])


def _exactness_residual(phi, nodes, rho, steps) -> float:
    """Max plaquette loop integral over all coordinate planes."""
    d = nodes.shape[-1]
    edges = {a: _edge_simpson(phi, nodes, rho, steps, a) for a in range(d)}
    worst = 0.0
    for a in range(d):
        for b in range(a + 1, d):
            Ea, Eb = edges[a], edges[b]
            base_a0 = tuple(slice(None, -1) if c == b else slice(None) for c in range(d))
            base_a1 = tuple(slice(1, None) if c == b else slice(None) for c in range(d))
            base_b0 = tuple(slice(None, -1) if c == a else slice(None) for c in range(d))
            base_b1 = tuple(slice(1, None) if c == a else slice(None) for c in range(d))
            loop = Ea[base_a0] + Eb[base_b1] - Ea[base_a1] - Eb[base_b0]
            worst = max(worst, float(np.max(np.abs(loop))))
    return worst


@dataclass(frozen=True)
class LiftedMap:
    """Exact lifted map built from callables: (x, xbar) -> (phi(x), xbar + F(x)).

    ``phi`` and ``F`` take batched arrays (..., 2n); ``phi_inv`` is optional
    and enables inversion/conjugation.
    """

    phi: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    phi_inv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    descriptor: str = "lifted-symplectomorphism"

    def __call__(self, p: HeisPoint) -> HeisPoint:
        x = p.x[None]
        return HeisPoint(self.phi(x)[0], p.xbar + float(np.asarray(self.F(x))[0]))

    def apply(self, X: np.ndarray, xbars: np.ndarray):
        return self.phi(X), xbars + np.asarray(self.F(X))

    def compose(self, other: "LiftedMap") -> "LiftedMap":
        """self after other; potentials add as F_other + F_self o phi_other."""
        inv = None
        if self.phi_inv is not None and other.phi_inv is not None:
            inv = lambda Y: other.phi_inv(self.phi_inv(Y))
        return LiftedMap(
            phi=lambda X: self.phi(other.phi(X)),
            F=lambda X: np.asarray(other.F(X)) + np.asarray(self.F(other.phi(X))),
            phi_inv=inv,
            descriptor=f"{self.descriptor}*{other.descriptor}")

    def inverse(self) -> "LiftedMap":
        if self.phi_inv is None:
            raise InvalidArgumentError(f"map '{self.descriptor}' has no inverse callable")
        return LiftedMap(
            phi=self.phi_inv,
            F=lambda Y: -np.asarray(self.F(self.phi_inv(Y))),
            phi_inv=self.phi,
            descriptor=f"{self.descriptor}^-1")

    def as_heis_map(self) -> HeisMap:
        return HeisMap(fn=self.__call__, descriptor="lifted-symplectomorphism")


@dataclass(frozen=True)
class VerticalMap:
    """Vertical shear (x, xbar) -> (x, xbar + G(x))."""

    G: Callable[[np.ndarray], np.ndarray]
    descriptor: str = "vertical"

    def __call__(self, p: HeisPoint) -> HeisPoint:
        return HeisPoint(p.x, p.xbar + float(np.asarray(self.G(p.x[None]))[0]))

    def compose(self, other: "VerticalMap") -> "VerticalMap":
        return VerticalMap(G=lambda X: np.asarray(self.G(X)) + np.asarray(other.G(X)),
                           descriptor=f"{self.descriptor}*{other.descriptor}")


def lift_map(phi: SymplectoMap, a: float = 0.0, shape=65, anchor=None,
             jac_tol: float = DEFAULT_JAC_TOL,
             exactness_tol: float = DEFAULT_EXACTNESS_TOL) -> HeisMap:
    """Lift a symplectomorphism to H(n) via its grid generating function.

    The anchor defaults to the low corner of the support box with value
    ``a`` (compactly supported maps then lift to compactly supported
    homeomorphisms); pass anchor="origin" for the F(0) = a normalization.
    Propagates NotSymplecticError from the potential construction.
    """
    if anchor is None or anchor == "corner":
        anchor_arg = (phi.support.corner(), a)
    elif anchor == "origin":
        anchor_arg = (np.zeros(phi.dim), a)
    else:
        anchor_arg = anchor
    fld = generating_function(phi, shape=shape, anchor=anchor_arg,
                              jac_tol=jac_tol, exactness_tol=exactness_tol)
    lifted = LiftedMap(phi=phi.__call__, F=fld.__call__, descriptor=phi.descriptor)

    hm = HeisMap(fn=lifted.__call__, descriptor="lifted-symplectomorphism")
    object.__setattr__(hm, "lifted", lifted)
    object.__setattr__(hm, "generating_field", fld)
    return hm


def cancelation_residual(phi: SymplectoMap, fld: GeneratingField, samples) -> float:
    """Max over samples and directions of |dF(x) e_j - rho_j(x)| with dF by
    central differences on the grid (samples snap to the nearest interior
    node)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    d = fld.box.dim
    shape = fld.grid_shape
    steps = fld.box.grid_spacing(shape)
    idx = np.empty(samples.shape, dtype=int)
    for a in range(d):
        axis = fld.axes[a]
        idx[:, a] = np.clip(np.searchsorted(axis, samples[:, a]), 1, shape[a] - 2)
    worst = 0.0
    for row in idx:
        node = np.array([fld.axes[a][row[a]] for a in range(d)])
        rho = _one_form(phi, node[None])[0]
        for a in range(d):
            up = tuple(row[b] + (1 if b == a else 0) for b in range(d))
            dn = tuple(row[b] - (1 if b == a else 0) for b in range(d))
            dF = (fld.values[up] - fld.values[dn]) / (2.0 * steps[a])
            worst = max(worst, abs(dF - rho[a]))
    return worst


@dataclass(frozen=True)
class VolumeCheckReport:
    ok: bool
    max_det_defect: float
    max_block_defect: float
    violations: tuple


def volume_check(fmap, samples, tol: float = 1e-6,
                 fd_step: float = DEFAULT_JAC_STEP) -> VolumeCheckReport:
    """Check that a map of H(n) is volume preserving with the lifted block
    structure: classical (2n+1)-Jacobian determinant 1 at each sample, and
    the intrinsic derivative's candidate block (A, d) with A symplectic and
    d = 1.  Violations are listed, never raised."""
    violations = []
    max_det = 0.0
    max_block = 0.0
    for p in samples:
        d = 2 * p.n + 1
        Jc = np.zeros((d, d))
        for j in range(d):
            dx = np.zeros(2 * p.n)
            dv = 0.0
            if j < 2 * p.n:
                dx[j] = fd_step
            else:
                dv = fd_step
            hi = fmap(HeisPoint(p.x + dx, p.xbar + dv))
            lo = fmap(HeisPoint(p.x - dx, p.xbar - dv))
            Jc[:2 * p.n, j] = (hi.x - lo.x) / (2 * fd_step)
            Jc[-1, j] = (hi.xbar - lo.xbar) / (2 * fd_step)
        det_defect = abs(np.linalg.det(Jc) - 1.0)
        max_det = max(max_det, det_defect)
        if det_defect > tol:
            violations.append((p, "determinant", det_defect))

        rep = pansu_derivative(fmap, p, eps_schedule=(0.5, 0.25, 0.125))
        ok_cs, dd = is_conformal_symplectic(rep.candidate.A, max(tol, 1e-8))
        block_defect = abs(dd - 1.0) + abs(rep.candidate.d - 1.0)
        max_block = max(max_block, block_defect)
        if not ok_cs or block_defect > 10 * tol:
            violations.append((p, "block-structure", block_defect))
    return VolumeCheckReport(ok=not violations, max_det_defect=max_det,
                             max_block_defect=max_block,
                             violations=tuple(violations))
