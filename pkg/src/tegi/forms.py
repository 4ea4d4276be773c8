"""Differential-forms toolkit: wedge product, exterior derivative, Hodge star.

A k-form here is any value whose trailing unmarked axes hold the form slots;
marked leading axes ride along untouched, which is what makes matrix-valued
forms (curvature, connection coefficients) work with no extra machinery.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .application import apply_scalar, complete_omitted_indices, with_symbols_scope
from .errors import (
    DomainError,
    FormDegreeError,
    ShapeMismatchError,
    TegiTypeError,
)
from .symexpr import (
    ZERO,
    Expr,
    abs_,
    add,
    as_symbol,
    differentiate,
    integer,
    mul,
    sqrt,
)
from .tensor import TensorValue, contract

__all__ = [
    "det",
    "df_normalize",
    "df_order",
    "exterior_d",
    "hodge",
    "levi_civita",
    "wedge",
]


def df_order(v) -> int:
    """Degree of a value as a differential form (unmarked trailing axes)."""
    if isinstance(v, TensorValue):
        return v.form_degree
    if isinstance(v, Expr):
        return 0
    raise TegiTypeError("df-order expects a scalar or tensor value")


def _offset(shape: tuple[int, ...], coords: tuple[int, ...]) -> int:
    off = 0
    for d, c in zip(shape, coords):
        off = off * d + c
    return off


def _perm_sign(p) -> int:
    """Sign of a sequence as a permutation; 0 when entries repeat."""
    sign = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] == p[j]:
                return 0
            if p[i] > p[j]:
                sign = -sign
    return sign


def levi_civita(n: int) -> TensorValue:
    """The rank-n alternating symbol as an unmarked tensor."""
    if not isinstance(n, int) or n < 1:
        raise DomainError("levi-civita needs a positive integer dimension")
    comps = tuple(
        integer(_perm_sign(c)) for c in itertools.product(range(n), repeat=n)
    )
    return TensorValue((n,) * n, comps, ())


def det(m) -> Expr:
    """Leibniz-formula determinant of a square rank-2 tensor (marks ignored)."""
    if not isinstance(m, TensorValue) or m.rank != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatchError("determinant needs a square matrix")
    n = m.shape[0]
    total = ZERO
    for p in itertools.permutations(range(n)):
        term = integer(_perm_sign(p))
        for i in range(n):
            term = mul(term, m.components[i * n + p[i]])
        total = add(total, term)
    return total


def wedge(a, b):
    """Wedge product, computed as an index-completed scalar multiplication.

    Both arguments get fresh subscripts over their form axes, the products
    multiply out (contracting any matching value-level labels), and the fresh
    axes scope back out in order as the form axes of the result.
    """
    args, gens = complete_omitted_indices([a, b], "distinct")
    prod = contract(add, apply_scalar(mul, args))
    return with_symbols_scope(gens, prod)


def exterior_d(a, coords: TensorValue) -> TensorValue:
    """Exterior derivative with respect to a coordinate frame.

    The new derivative axis sits first among the form axes, matching the
    convention of the surface-language `d`.
    """
    if (
        not isinstance(coords, TensorValue)
        or coords.rank != 1
        or coords.indices
    ):
        raise TegiTypeError("coordinate frame must be an unmarked rank-1 tensor")
    xs = []
    for c in coords.components:
        if not isinstance(c, Expr) or as_symbol(c) is None:
            raise TegiTypeError("coordinate frame entries must be symbols")
        xs.append(c)
    n = coords.shape[0]
    if isinstance(a, Expr):
        return TensorValue((n,), tuple(differentiate(a, x) for x in xs))
    if not isinstance(a, TensorValue):
        raise TegiTypeError("exterior derivative of a non-tensor value")
    m = len(a.indices)
    new_shape = a.shape[:m] + (n,) + a.shape[m:]
    comps = []
    for out in itertools.product(*(range(d) for d in new_shape)):
        src = out[:m] + out[m + 1 :]
        comps.append(differentiate(a.components[_offset(a.shape, src)], xs[out[m]]))
    return TensorValue(new_shape, tuple(comps), a.indices)


def df_normalize(v):
    """Project the form axes onto their antisymmetric part (1/k! alternation)."""
    if not isinstance(v, TensorValue):
        return v
    k = v.form_degree
    if k <= 1:
        return v
    m = len(v.indices)
    dims = set(v.shape[m:])
    if len(dims) != 1:
        raise ShapeMismatchError("alternation needs form axes of equal dimension")
    scale = Fraction(1, math.factorial(k))
    comps = []
    for out in itertools.product(*(range(d) for d in v.shape)):
        marked, form = out[:m], out[m:]
        total = ZERO
        for p in itertools.permutations(range(k)):
            src = marked + tuple(form[i] for i in p)
            total = add(
                total,
                mul(integer(_perm_sign(p)), v.components[_offset(v.shape, src)]),
            )
        comps.append(total * scale)
    return TensorValue(v.shape, tuple(comps), v.indices)


def hodge(a, g_lower: TensorValue, g_upper: TensorValue):
    """Hodge star of a k-form against a metric and its inverse.

    (*A)_{i_{k+1}..i_n} = sqrt|det g| ε_{i_1..i_n} A_{j_1..j_k} g^{i_1 j_1}..g^{i_k j_k}

    summed over repeated indices, with no 1/k! factor.  Marked axes of A pass
    through unchanged, so matrix-valued forms star componentwise.
    """
    for g in (g_lower, g_upper):
        if not isinstance(g, TensorValue) or g.rank != 2 or g.shape[0] != g.shape[1]:
            raise ShapeMismatchError("hodge star needs square metric matrices")
    n = g_lower.shape[0]
    if g_upper.shape[0] != n:
        raise ShapeMismatchError("metric and inverse metric disagree on dimension")
    if isinstance(a, Expr):
        k, marks, marked_shape, form_shape, comps = 0, (), (), (), (a,)
    elif isinstance(a, TensorValue):
        k = a.form_degree
        m = len(a.indices)
        marks, marked_shape, form_shape = a.indices, a.shape[:m], a.shape[m:]
        comps = a.components
    else:
        raise TegiTypeError("hodge star of a non-form value")
    if k > n:
        raise FormDegreeError("form degree exceeds the metric dimension")
    if any(d != n for d in form_shape):
        raise ShapeMismatchError("form axes must match the metric dimension")
    scale = sqrt(abs_(det(g_lower)))
    eps = levi_civita(n)
    gup = [[g_upper.components[i * n + j] for j in range(n)] for i in range(n)]
    out_shape = marked_shape + (n,) * (n - k)
    src_shape = marked_shape + form_shape
    out = []
    for coords in itertools.product(*(range(d) for d in out_shape)):
        mc, rest = coords[: len(marked_shape)], coords[len(marked_shape) :]
        total = ZERO
        for is_ in itertools.product(range(n), repeat=k):
            e = eps.components[_offset(eps.shape, is_ + rest)]
            if not e.terms:
                continue
            for js in itertools.product(range(n), repeat=k):
                term = mul(e, comps[_offset(src_shape, mc + js)])
                for im, jm in zip(is_, js):
                    term = mul(term, gup[im][jm])
                total = add(total, term)
        out.append(mul(scale, total))
    if not out_shape:
        return out[0]
    return TensorValue(out_shape, tuple(out), marks)
