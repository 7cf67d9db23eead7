"""Pure NumPy lane of the hot kernels.

Semantics (iteration control, operation order, tie-breaking) match the
compiled lane in ``_core.pyx`` step for step, so the two lanes agree to
floating rounding and covering counts agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .programs import (OP_ABS, OP_ADD, OP_CONST, OP_COS, OP_CUTEXP, OP_DIV,
                       OP_EXP, OP_MUL, OP_NEG, OP_POWI, OP_SIN, OP_SQRT,
                       OP_SUB, OP_T, OP_X, ProgramBank)

LANE = "python"


def _cutexp_array(w, k):
    out = np.zeros_like(w)
    pos = w > 0.0
    if np.any(pos):
        wp = w[pos]
        g = np.exp(-1.0 / wp)
        p = np.ones_like(wp)
        for _ in range(k):
            p = p * wp
        val = np.where(g == 0.0, 0.0, g / p)
        out[pos] = val
    return out


def _powi_array(v, k):
    if k < 0:
        return 1.0 / _powi_array(v, -k)
    out = np.ones_like(v)
    for _ in range(k):
        out = out * v
    return out


def eval_bank(bank: ProgramBank, idx: int, t: float, X: np.ndarray) -> np.ndarray:
    """Evaluate program ``idx`` of the bank at scalar time t over rows of X."""
    X = np.asarray(X, dtype=np.float64)
    S = X.shape[0]
    lo, hi = bank.code_offsets[idx], bank.code_offsets[idx + 1]
    clo = bank.const_offsets[idx]
    stack = []
    code = bank.code
    for j in range(lo, hi):
        op, arg = int(code[j, 0]), int(code[j, 1])
        if op == OP_CONST:
            stack.append(np.full(S, bank.consts[clo + arg]))
        elif op == OP_T:
            stack.append(np.full(S, t))
        elif op == OP_X:
            stack.append(X[:, arg].copy())
        elif op == OP_NEG:
            stack[-1] = -stack[-1]
        elif op == OP_SIN:
            stack[-1] = np.sin(stack[-1])
        elif op == OP_COS:
            stack[-1] = np.cos(stack[-1])
        elif op == OP_EXP:
            stack[-1] = np.exp(stack[-1])
        elif op == OP_SQRT:
            stack[-1] = np.sqrt(stack[-1])
        elif op == OP_ABS:
            stack[-1] = np.abs(stack[-1])
        elif op == OP_ADD:
            b = stack.pop()
            stack[-1] = stack[-1] + b
        elif op == OP_SUB:
            b = stack.pop()
            stack[-1] = stack[-1] - b
        elif op == OP_MUL:
            b = stack.pop()
            stack[-1] = stack[-1] * b
        elif op == OP_DIV:
            b = stack.pop()
            with np.errstate(divide="ignore", invalid="ignore"):
                stack[-1] = stack[-1] / b
        elif op == OP_POWI:
            stack[-1] = _powi_array(stack[-1], arg)
        elif op == OP_CUTEXP:
            stack[-1] = _cutexp_array(stack[-1], arg)
        else:
            raise ValueError(f"bad opcode {op}")
    return stack[-1]


def eval_bank_all(bank: ProgramBank, t: float, X: np.ndarray) -> np.ndarray:
    """All programs of the bank at once; returns (S, num)."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty((X.shape[0], bank.num))
    for i in range(bank.num):
        out[:, i] = eval_bank(bank, i, t, X)
    return out


@dataclass
class IntegrateResult:
    xs: np.ndarray            # (S, nsteps+1, d)
    jacs: np.ndarray | None   # (S, nsteps+1, d, d) when requested
    iterations: int           # total fixed-point iterations
    fail_step: int            # -1 on success
    fail_residual: float


def integrate_midpoint(field_bank: ProgramBank, x0s: np.ndarray, t0: float,
                       dt: float, nsteps: int, tol: float = 1e-12,
                       maxit: int = 50,
                       jac_bank: ProgramBank | None = None) -> IntegrateResult:
    """Implicit-midpoint integration of x' = f(t, x) for a batch of seeds.

    The midpoint state solves m = x_k + (dt/2) f(t_mid, m) by fixed-point
    iteration, run in lockstep over the batch until the worst update is
    below tol.  When ``jac_bank`` (programs for df_i/dx_j, row-major) is
    given, the exact Jacobian of the numerical flow map is propagated via
    (I - dt/2 Df) M_{k+1} = (I + dt/2 Df) M_k at the converged midpoint.
    """
    x0s = np.atleast_2d(np.asarray(x0s, dtype=np.float64))
    S, d = x0s.shape
    xs = np.empty((S, nsteps + 1, d))
    xs[:, 0] = x0s
    jacs = None
    if jac_bank is not None:
        jacs = np.empty((S, nsteps + 1, d, d))
        jacs[:, 0] = np.eye(d)
    eye = np.eye(d)
    x = x0s.copy()
    total_iter = 0
    for k in range(nsteps):
        t_mid = t0 + (k + 0.5) * dt
        m = x.copy()
        delta = np.inf
        for _ in range(maxit):
            f = eval_bank_all(field_bank, t_mid, m)
            m_new = x + (0.5 * dt) * f
            delta = float(np.max(np.abs(m_new - m))) if m.size else 0.0
            m = m_new
            total_iter += 1
            if delta <= tol:
                break
        if not (delta <= tol):
            return IntegrateResult(xs[:, :k + 1], None, total_iter, k, delta)
        x = 2.0 * m - x
        xs[:, k + 1] = x
        if jac_bank is not None:
            Df = eval_bank_all(jac_bank, t_mid, m).reshape(S, d, d)
            A = eye - (0.5 * dt) * Df
            B = eye + (0.5 * dt) * Df
            jacs[:, k + 1] = np.linalg.solve(A, B @ jacs[:, k])
    return IntegrateResult(xs, jacs, total_iter, -1, 0.0)


def greedy_cover(xs: np.ndarray, vs: np.ndarray, eps: float) -> int:
    """Greedy covering count with left-invariant ball-box surrogates.

    The lowest-index uncovered sample becomes the next center c; a sample q
    is covered when |x_q - x_c|_inf <= eps and the vertical part of c^-1 q,
    i.e. v_q - v_c - omega(x_c, x_q)/2, is at most eps^2 in absolute value.
    """
    xs = np.asarray(xs, dtype=np.float64)
    vs = np.asarray(vs, dtype=np.float64)
    N, d = xs.shape
    n = d // 2
    eps2 = eps * eps
    alive = np.arange(N)
    count = 0
    while alive.size:
        c = alive[0]
        count += 1
        X = xs[alive]
        V = vs[alive]
        xc = xs[c]
        horiz = np.max(np.abs(X - xc), axis=1) <= eps
        om = np.zeros(alive.shape[0])
        for kk in range(n):
            om += xc[kk] * X[:, n + kk]
        for kk in range(n):
            om -= xc[n + kk] * X[:, kk]
        vert = np.abs(V - vs[c] - 0.5 * om) <= eps2
        alive = alive[~(horiz & vert)]
    return count
