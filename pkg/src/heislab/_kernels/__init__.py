"""Hot numerical kernels with a compiled lane and a pure NumPy fallback.

The compiled Cython extension (``heislab._kernels._core``) is picked at
import time when available; otherwise the NumPy lane in ``pyback`` is used.
Set the environment variable ``HEISLAB_PURE_PYTHON=1`` to force the fallback.
Both lanes implement identical semantics; ``benchmarks/bench_lanes.py``
compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

from . import pyback
from .programs import Program, ProgramBank, compile_expr, compile_field
from .pyback import IntegrateResult

__all__ = [
    "LANE", "Program", "ProgramBank", "compile_expr", "compile_field",
    "IntegrateResult", "eval_bank", "eval_bank_all", "integrate_midpoint",
    "greedy_cover", "available_lanes",
]

_compiled = None
if not os.environ.get("HEISLAB_PURE_PYTHON"):
    try:
        from . import _core as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

LANE = "compiled" if _compiled is not None else "python"


class _CompiledLane:
    """Adapter giving the compiled extension the lane call signatures."""

    LANE = "compiled"

    @staticmethod
    def eval_bank(bank: ProgramBank, idx: int, t: float, X: np.ndarray) -> np.ndarray:
        return _compiled.eval_bank(bank.code, bank.code_offsets, bank.consts,
                                   bank.const_offsets, bank.stack_need, idx, t, X)

    @staticmethod
    def eval_bank_all(bank: ProgramBank, t: float, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((X.shape[0], bank.num))
        for i in range(bank.num):
            out[:, i] = _CompiledLane.eval_bank(bank, i, t, X)
        return out

    @staticmethod
    def integrate_midpoint(field_bank: ProgramBank, x0s, t0, dt, nsteps,
                           tol=1e-12, maxit=50, jac_bank: ProgramBank | None = None):
        jargs = {}
        if jac_bank is not None:
            jargs = dict(jcode=jac_bank.code, jcode_offsets=jac_bank.code_offsets,
                         jconsts=jac_bank.consts, jconst_offsets=jac_bank.const_offsets,
                         jstack_need=jac_bank.stack_need)
        xs, jacs, iters, fail_step, fail_resid = _compiled.integrate_midpoint(
            field_bank.code, field_bank.code_offsets, field_bank.consts,
            field_bank.const_offsets, field_bank.stack_need,
            x0s, float(t0), float(dt), int(nsteps), float(tol), int(maxit),
            **jargs)
        return IntegrateResult(xs, jacs, iters, fail_step, fail_resid)

    @staticmethod
    def greedy_cover(xs, vs, eps) -> int:
        return int(_compiled.greedy_cover(xs, vs, float(eps)))


_active = _CompiledLane if _compiled is not None else pyback


def eval_bank(bank: ProgramBank, idx: int, t: float, X: np.ndarray) -> np.ndarray:
    return _active.eval_bank(bank, idx, t, X)


def eval_bank_all(bank: ProgramBank, t: float, X: np.ndarray) -> np.ndarray:
    return _active.eval_bank_all(bank, t, X)


def integrate_midpoint(field_bank: ProgramBank, x0s, t0: float, dt: float,
                       nsteps: int, tol: float = 1e-12, maxit: int = 50,
                       jac_bank: ProgramBank | None = None) -> IntegrateResult:
    return _active.integrate_midpoint(field_bank, x0s, t0, dt, nsteps,
                                      tol, maxit, jac_bank)


def greedy_cover(xs, vs, eps: float) -> int:
    return _active.greedy_cover(xs, vs, eps)


def available_lanes() -> dict:
    """Name -> lane namespace, for parity tests and benchmarks."""
    lanes = {"python": pyback}
    if _compiled is not None:
        lanes["compiled"] = _CompiledLane
    return lanes
