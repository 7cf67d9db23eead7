"""Compilation of expression ASTs to flat stack programs.

Both kernel lanes (compiled and pure NumPy) execute the same bytecode, so a
program compiled once drives the reference evaluator, the batch evaluator
and the integrator identically.  Opcodes operate on a float64 stack; ``arg``
is a constant index, coordinate index or small integer parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import dsl

__all__ = ["Program", "ProgramBank", "compile_expr", "compile_field"]

OP_CONST = 0
OP_T = 1
OP_X = 2
OP_NEG = 3
OP_SIN = 4
OP_COS = 5
OP_EXP = 6
OP_SQRT = 7
OP_ABS = 8
OP_ADD = 9
OP_SUB = 10
OP_MUL = 11
OP_DIV = 12
OP_POWI = 13
OP_CUTEXP = 14

_UNARY_CODE = {"neg": OP_NEG, "sin": OP_SIN, "cos": OP_COS,
               "exp": OP_EXP, "sqrt": OP_SQRT, "abs": OP_ABS}
_BIN_CODE = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}


@dataclass(frozen=True)
class Program:
    code: np.ndarray     # int32, shape (m, 2): rows (op, arg)
    consts: np.ndarray   # float64
    stack_need: int


class _Emitter:
    def __init__(self):
        self.code = []
        self.consts = []
        self.depth = 0
        self.max_depth = 0

    def emit(self, op, arg=0, delta=0):
        self.code.append((op, arg))
        self.depth += delta
        self.max_depth = max(self.max_depth, self.depth)

    def const(self, value):
        self.consts.append(float(value))
        self.emit(OP_CONST, len(self.consts) - 1, +1)

    def walk(self, e):
        if isinstance(e, dsl.Num):
            self.const(e.value)
        elif isinstance(e, dsl.Var):
            if e.index == dsl.T_INDEX:
                self.emit(OP_T, 0, +1)
            else:
                self.emit(OP_X, e.index, +1)
        elif isinstance(e, dsl.Unary):
            self.walk(e.arg)
            self.emit(_UNARY_CODE[e.op])
        elif isinstance(e, dsl.Bin):
            self.walk(e.left)
            self.walk(e.right)
            self.emit(_BIN_CODE[e.op], 0, -1)
        elif isinstance(e, dsl.Pow):
            self.walk(e.base)
            self.emit(OP_POWI, e.exponent)
        elif isinstance(e, dsl.CutExp):
            self.walk(e.arg)
            self.emit(OP_CUTEXP, e.k)
        elif isinstance(e, dsl.Bump):
            # inline: e * cutexp(1 - sum((a_j - c_j)^2) / R^2, 0)
            self.const(1.0)
            for j, (a, c) in enumerate(zip(e.args, e.center)):
                self.walk(a)
                self.const(c)
                self.emit(OP_SUB, 0, -1)
                self.emit(OP_POWI, 2)
                if j > 0:
                    self.emit(OP_ADD, 0, -1)
            self.const(e.radius * e.radius)
            self.emit(OP_DIV, 0, -1)
            self.emit(OP_SUB, 0, -1)
            self.emit(OP_CUTEXP, 0)
            self.const(math.e)
            self.emit(OP_MUL, 0, -1)
        else:
            raise TypeError(f"not an Expr: {e!r}")


def compile_expr(e) -> Program:
    em = _Emitter()
    em.walk(e)
    code = np.asarray(em.code, dtype=np.int32).reshape(-1, 2)
    consts = np.asarray(em.consts, dtype=np.float64)
    return Program(code, consts, em.max_depth)


@dataclass(frozen=True)
class ProgramBank:
    """A list of programs packed into flat arrays for the compiled lane."""

    code: np.ndarray          # int32 (total_ops, 2)
    code_offsets: np.ndarray  # int32 (num+1,)
    consts: np.ndarray        # float64
    const_offsets: np.ndarray # int32 (num+1,)
    stack_need: int
    num: int


def compile_field(exprs) -> ProgramBank:
    """Compile a list of expressions into one packed bank."""
    programs = [compile_expr(e) for e in exprs]
    code_offsets = np.zeros(len(programs) + 1, dtype=np.int32)
    const_offsets = np.zeros(len(programs) + 1, dtype=np.int32)
    for i, p in enumerate(programs):
        code_offsets[i + 1] = code_offsets[i] + p.code.shape[0]
        const_offsets[i + 1] = const_offsets[i] + p.consts.shape[0]
    code = (np.concatenate([p.code for p in programs])
            if programs else np.zeros((0, 2), dtype=np.int32))
    consts = (np.concatenate([p.consts for p in programs])
              if programs else np.zeros(0, dtype=np.float64))
    stack_need = max((p.stack_need for p in programs), default=1)
    return ProgramBank(np.ascontiguousarray(code, dtype=np.int32),
                       code_offsets,
                       np.ascontiguousarray(consts, dtype=np.float64),
                       const_offsets, int(stack_need), len(programs))
