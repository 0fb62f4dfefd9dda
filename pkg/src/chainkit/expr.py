"""Restricted expression trees over x, y, z with analytic derivatives.

Expressions are parsed by sympy and then checked against a small whitelist:
sums, products, powers (including ``sqrt`` and division), ``exp``, the three
coordinates and rational constants.  Decimal literals are read as exact
rationals.  Evaluation happens in double precision through generated
functions, both scalar (``math``) and vectorized (``numpy``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    rationalize,
    standard_transformations,
)

X, Y, Z = sympy.symbols("x y z", real=True)
COORDS = (X, Y, Z)
_LOCALS = {"x": X, "y": Y, "z": Z, "sqrt": sympy.sqrt, "exp": sympy.exp}
_TRANSFORMS = standard_transformations + (convert_xor, rationalize)


class ExpressionError(ValueError):
    pass


def _check_tree(e: sympy.Expr) -> None:
    if e.is_Symbol:
        if e not in COORDS:
            raise ExpressionError(f"unknown symbol {e}")
        return
    if e.is_Number:
        if not e.is_Rational:
            raise ExpressionError(f"non-rational constant {e}")
        return
    if isinstance(e, (sympy.Add, sympy.Mul, sympy.Pow, sympy.exp)):
        for a in e.args:
            _check_tree(a)
        return
    raise ExpressionError(f"unsupported operation {type(e).__name__} in {e}")


def _broadcast(fn, n_out):
    def call(points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        vals = fn(pts[..., 0], pts[..., 1], pts[..., 2])
        shape = pts.shape[:-1]
        if n_out is None:
            return np.broadcast_to(np.asarray(vals, dtype=float), shape).copy()
        return np.stack([np.broadcast_to(np.asarray(v, dtype=float), shape) for v in vals], axis=-1)
    return call


@dataclass
class Expression:
    """A validated expression with value, gradient and Hessian evaluators."""

    text: str
    tree: sympy.Expr = field(repr=False)

    def __post_init__(self):
        _check_tree(self.tree)
        grad = [sympy.diff(self.tree, v) for v in COORDS]
        hess = [sympy.diff(g, v) for g in grad for v in COORDS]
        self._grad_tree = grad
        args = COORDS
        # scalar evaluators
        self._f = sympy.lambdify(args, self.tree, modules="math")
        self._g = sympy.lambdify(args, grad, modules="math")
        self._h = sympy.lambdify(args, hess, modules="math")
        # vectorized evaluators
        self._fv = _broadcast(sympy.lambdify(args, self.tree, modules="numpy"), None)
        self._gv = _broadcast(sympy.lambdify(args, grad, modules="numpy"), 3)
        self._hv = _broadcast(sympy.lambdify(args, hess, modules="numpy"), 9)

    @classmethod
    def parse(cls, text: str) -> "Expression":
        try:
            tree = parse_expr(text, local_dict=dict(_LOCALS), transformations=_TRANSFORMS)
        except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as exc:
            raise ExpressionError(f"cannot parse {text!r}: {exc}") from None
        if not isinstance(tree, sympy.Expr):
            raise ExpressionError(f"not an expression: {text!r}")
        return cls(text, tree)

    def __neg__(self) -> "Expression":
        return Expression(f"-({self.text})", -self.tree)

    # scalar interface: p is a 3-sequence of floats
    def value(self, p) -> float:
        return float(self._f(*p))

    def gradient(self, p) -> tuple[float, float, float]:
        g = self._g(*p)
        return (float(g[0]), float(g[1]), float(g[2]))

    def hessian(self, p) -> np.ndarray:
        return np.array(self._h(*p), dtype=float).reshape(3, 3)

    # vectorized interface: points has shape (..., 3)
    def values(self, points) -> np.ndarray:
        return self._fv(points)

    def gradients(self, points) -> np.ndarray:
        return self._gv(points)

    def hessians(self, points) -> np.ndarray:
        h = self._hv(points)
        return h.reshape(h.shape[:-1] + (3, 3))


def safe_call(fn, *args):
    """Evaluate, mapping domain errors (sqrt of a negative, overflow) to None."""
    try:
        return fn(*args)
    except (ValueError, ZeroDivisionError, OverflowError):
        return None


def norm(v) -> float:
    return math.sqrt(sum(c * c for c in v))
