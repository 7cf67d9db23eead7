"""Time-sampled curves in H(n) and their horizontality bookkeeping.

The discrete horizontality defect of a step p -> q is the vertical part of
p^-1 q, i.e. (xbar_q - xbar_p) - omega(x_p, x_q - x_p)/2.  It vanishes
exactly when the step is the chord lift, so paths produced by the lift rule
carry zero residual up to rounding, while curves of Hamiltonian flows pick
up a defect rate equal to the Hamiltonian along the flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .heis import HeisPoint, omega_batch

__all__ = ["HeisPath", "resample_path", "vertical_segment", "constant_path"]


@dataclass(frozen=True)
class HeisPath:
    """Sampled curve: strictly increasing times, horizontal samples (K, 2n),
    vertical samples (K,).  ``horiz_residual`` is the max per-step defect."""

    times: np.ndarray
    xs: np.ndarray
    xbars: np.ndarray
    horiz_residual: float = field(init=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float, copy=True)
        xs = np.array(self.xs, dtype=float, copy=True)
        xb = np.array(self.xbars, dtype=float, copy=True)
        if t.ndim != 1 or xs.ndim != 2 or xb.ndim != 1:
            raise InvalidArgumentError("times (K,), xs (K, 2n), xbars (K,) expected")
        if not (t.shape[0] == xs.shape[0] == xb.shape[0]) or t.shape[0] < 1:
            raise InvalidArgumentError("inconsistent sample counts")
        if xs.shape[1] % 2 != 0 or xs.shape[1] == 0:
            raise InvalidArgumentError("horizontal dimension must be even")
        if np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(xs)) and np.all(np.isfinite(xb))):
            raise InvalidArgumentError("path samples must be finite")
        for a in (t, xs, xb):
            a.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "xbars", xb)
        defects = self.step_defects()
        res = float(np.max(np.abs(defects))) if defects.size else 0.0
        object.__setattr__(self, "horiz_residual", res)

    @property
    def n(self) -> int:
        return self.xs.shape[1] // 2

    def __len__(self) -> int:
        return self.times.shape[0]

    def point(self, i: int) -> HeisPoint:
        return HeisPoint(self.xs[i], self.xbars[i])

    def step_defects(self) -> np.ndarray:
        """Signed per-step vertical defects (K-1,)."""
        if len(self) < 2:
            return np.zeros(0)
        dx = np.diff(self.xs, axis=0)
        dv = np.diff(self.xbars)
        return dv - 0.5 * omega_batch(self.xs[:-1], dx)

    def is_horizontal(self, tol: float = 1e-10) -> bool:
        return self.horiz_residual <= tol


def constant_path(p: HeisPoint, num: int = 2, t1: float = 1.0) -> HeisPath:
    times = np.linspace(0.0, t1, num)
    return HeisPath(times, np.tile(p.x, (num, 1)), np.full(num, p.xbar))


def vertical_segment(height: float = 1.0, num: int = 101, n: int = 1) -> HeisPath:
    """The central curve t -> ((0,..,0), t*height) on [0, 1]."""
    times = np.linspace(0.0, 1.0, num)
    return HeisPath(times, np.zeros((num, 2 * n)), times * height)


def resample_path(path: HeisPath, total: int = None, seg_counts=None) -> HeisPath:
    """Refine a path by group-dilation interpolation.

    Each step p -> q is replaced by the curve s -> p * delta_s(p^-1 q),
    whose horizontal part is the straight chord and whose vertical defect is
    spread as s^2 across the step.  This is the canonical refinement: chords
    of horizontal paths stay horizontal and the per-step defect (hence the
    box-covering content) is preserved.

    Provide either ``total`` (subdivisions allotted evenly over time) or
    explicit per-segment ``seg_counts``.
    """
    K = len(path) - 1
    if K < 1:
        return path
    if seg_counts is None:
        if total is None or total < K + 1:
            total = K + 1
        span = path.times[-1] - path.times[0]
        frac = np.diff(path.times) / span
        seg_counts = np.maximum(1, np.ceil(frac * (total - 1)).astype(int))
    seg_counts = np.asarray(seg_counts, dtype=int)
    if seg_counts.shape != (K,) or np.any(seg_counts < 1):
        raise InvalidArgumentError("seg_counts must be positive, one per segment")

    dx = np.diff(path.xs, axis=0)
    defects = path.step_defects()
    chord_gain = 0.5 * omega_batch(path.xs[:-1], dx)

    out_t = [path.times[:1]]
    out_x = [path.xs[:1]]
    out_v = [path.xbars[:1]]
    for i in range(K):
        m = seg_counts[i]
        s = np.arange(1, m + 1) / m
        out_t.append(path.times[i] + s * (path.times[i + 1] - path.times[i]))
        out_x.append(path.xs[i] + s[:, None] * dx[i])
        # vertical of p * delta_s(u): xbar_p + s^2 * defect + s * chord gain
        out_v.append(path.xbars[i] + s * s * defects[i] + s * chord_gain[i])
    return HeisPath(np.concatenate(out_t), np.concatenate(out_x), np.concatenate(out_v))
