"""Tensor values with index marks and the reduction engine.

A TensorValue is a row-major tuple of components plus a list of index marks
bound to its leading axes; trailing unmarked axes are the "form axes" used by
the differential-forms layer.  Components are arbitrary values (usually exact
scalars), so everything here is plain Python data manipulation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

from .errors import (
    IndexArityError,
    IndexBoundsError,
    IndexLabelError,
    ShapeMismatchError,
)
from .symexpr import Expr, Sym, as_int, integer

__all__ = [
    "Dummy",
    "IndexMark",
    "SUBSCRIPT",
    "SUPERSCRIPT",
    "SUPERSUBSCRIPT",
    "TensorValue",
    "attach_indices",
    "contract",
    "diag",
    "down",
    "find_identical_pairs",
    "flip_indices",
    "format_tensor",
    "fresh_uid",
    "labels_equal",
    "reduce_indices",
    "tensor",
    "tensor_map",
    "to_nested",
    "transpose",
    "up",
    "updown",
]

_uid_counter = itertools.count(1)


def fresh_uid() -> int:
    """Process-unique id for generated symbols and dummies (atomic in CPython)."""
    return next(_uid_counter)


@dataclass(frozen=True)
class Dummy:
    """An anonymous index label; never equal to any label, itself included."""

    uid: int


Label = Union[Sym, int, Dummy]

SUPERSCRIPT = 1
SUBSCRIPT = -1
SUPERSUBSCRIPT = 0


@dataclass(frozen=True)
class IndexMark:
    variance: int  # SUPERSCRIPT, SUBSCRIPT, or SUPERSUBSCRIPT
    label: Label


def up(label: Label) -> IndexMark:
    return IndexMark(SUPERSCRIPT, label)


def down(label: Label) -> IndexMark:
    return IndexMark(SUBSCRIPT, label)


def updown(label: Label) -> IndexMark:
    return IndexMark(SUPERSUBSCRIPT, label)


def labels_equal(a: Label, b: Label) -> bool:
    if isinstance(a, Dummy) or isinstance(b, Dummy):
        return False
    return a == b


@dataclass(frozen=True)
class TensorValue:
    shape: tuple[int, ...]
    components: tuple  # row-major
    indices: tuple[IndexMark, ...] = ()

    def __post_init__(self):
        size = 1
        for d in self.shape:
            size *= d
        if len(self.components) != size:
            raise ShapeMismatchError(
                f"{len(self.components)} components for shape {self.shape}"
            )
        if len(self.indices) > len(self.shape):
            raise IndexArityError("more index marks than axes")

    @property
    def rank(self) -> int:
        return len(self.shape)

    @property
    def form_degree(self) -> int:
        return len(self.shape) - len(self.indices)

    def __str__(self) -> str:
        return format_tensor(self)


def _strides(shape: Sequence[int]) -> tuple[int, ...]:
    out, acc = [], 1
    for d in reversed(shape):
        out.append(acc)
        acc *= d
    return tuple(reversed(out))


def _offset(coords: Sequence[int], strides: Sequence[int]) -> int:
    return sum(c * s for c, s in zip(coords, strides))


def _coords(shape: Sequence[int]) -> Iterable[tuple[int, ...]]:
    return itertools.product(*(range(d) for d in shape))


def tensor(data):
    """Build an unmarked TensorValue from nested lists; leaves pass through."""
    if not isinstance(data, (list, tuple)):
        if isinstance(data, int) and not isinstance(data, bool):
            return integer(data)
        return data
    if not data:
        raise ShapeMismatchError("empty tensor literal")
    elems = [tensor(x) for x in data]
    subtensors = [e for e in elems if isinstance(e, TensorValue)]
    if not subtensors:
        return TensorValue((len(elems),), tuple(elems))
    if len(subtensors) != len(elems):
        raise ShapeMismatchError("mixed scalar and tensor components")
    first = subtensors[0]
    for s in subtensors[1:]:
        if s.shape != first.shape:
            raise ShapeMismatchError("ragged tensor literal")
    if any(s.indices for s in subtensors):
        raise ShapeMismatchError("tensor components must not carry index marks")
    comps = tuple(c for s in elems for c in s.components)
    return TensorValue((len(elems),) + first.shape, comps)


def to_nested(t):
    """Inverse of tensor(); integer scalars come back as plain ints."""
    if isinstance(t, TensorValue):
        if t.rank == 0:
            return to_nested(t.components[0])
        stride = _strides(t.shape)[0]
        sub = TensorValue
        return [
            to_nested(sub(t.shape[1:], t.components[i * stride : (i + 1) * stride]))
            for i in range(t.shape[0])
        ]
    if isinstance(t, Expr):
        n = as_int(t)
        return t if n is None else n
    return t


def find_identical_pairs(marks: Sequence[IndexMark]) -> list[tuple[int, int]]:
    """All 1-based (k, j) with k < j and equal labels, leftmost first."""
    pairs = []
    for k in range(len(marks)):
        for j in range(k + 1, len(marks)):
            if labels_equal(marks[k].label, marks[j].label):
                pairs.append((k + 1, j + 1))
    return pairs


def _variance_at(k: int, marks: tuple[IndexMark, ...]) -> int:
    return marks[k - 1].variance


def _remove_at(k: int, marks: tuple[IndexMark, ...]) -> tuple[IndexMark, ...]:
    return marks[: k - 1] + marks[k:]


def _update_at(k: int, variance: int, marks: tuple[IndexMark, ...]) -> tuple[IndexMark, ...]:
    m = marks[k - 1]
    return marks[: k - 1] + (IndexMark(variance, m.label),) + marks[k:]


def diag(k: int, j: int, t: TensorValue) -> TensorValue:
    """Extract the diagonal of axes k and j (1-based, k < j); axis j is removed."""
    if not 1 <= k < j <= t.rank:
        raise IndexLabelError(f"diag axes ({k}, {j}) out of range for rank {t.rank}")
    k0, j0 = k - 1, j - 1
    if t.shape[k0] != t.shape[j0]:
        raise ShapeMismatchError(
            f"repeated index over axes of dimension {t.shape[k0]} and {t.shape[j0]}"
        )
    new_shape = t.shape[:j0] + t.shape[j0 + 1 :]
    strides = _strides(t.shape)
    comps = []
    for c in _coords(new_shape):
        src = c[:j0] + (c[k0],) + c[j0:]
        comps.append(t.components[_offset(src, strides)])
    marks = _remove_at(j, t.indices) if j <= len(t.indices) else t.indices
    return TensorValue(new_shape, tuple(comps), marks)


def reduce_indices(t):
    """Collapse repeated index labels pairwise, leftmost pair first."""
    if not isinstance(t, TensorValue):
        return t
    while True:
        pairs = find_identical_pairs(t.indices)
        if not pairs:
            return t
        k, j = pairs[0]
        same = _variance_at(k, t.indices) == _variance_at(j, t.indices)
        t = diag(k, j, t)
        if not same:
            t = TensorValue(t.shape, t.components, _update_at(k, SUPERSUBSCRIPT, t.indices))


def attach_indices(t, marks: Sequence[IndexMark]):
    """Bind marks to the leading free axes; literal labels select components."""
    marks = tuple(marks)
    if not isinstance(t, TensorValue):
        if marks:
            raise IndexArityError("cannot attach index marks to a scalar")
        return t
    existing = len(t.indices)
    if existing + len(marks) > t.rank:
        free = t.rank - existing
        raise IndexArityError(
            f"{len(marks)} index marks on a tensor with "
            f"{free} free {'axis' if free == 1 else 'axes'}"
        )
    selections = {}  # 0-based axis -> 0-based coordinate
    named: list[IndexMark] = []
    for pos, m in enumerate(marks):
        axis = existing + pos
        if isinstance(m.label, int):
            dim = t.shape[axis]
            if not 1 <= m.label <= dim:
                raise IndexBoundsError(
                    f"index {m.label} out of bounds for axis of dimension {dim}"
                )
            selections[axis] = m.label - 1
        else:
            named.append(m)
    if selections:
        kept_axes = [a for a in range(t.rank) if a not in selections]
        new_shape = tuple(t.shape[a] for a in kept_axes)
        strides = _strides(t.shape)
        comps = []
        for c in _coords(new_shape):
            src = [0] * t.rank
            for a, v in selections.items():
                src[a] = v
            for a, v in zip(kept_axes, c):
                src[a] = v
            comps.append(t.components[_offset(src, strides)])
        t = TensorValue(new_shape, tuple(comps), t.indices + tuple(named))
    else:
        t = TensorValue(t.shape, t.components, t.indices + tuple(named))
    if t.rank == 0:
        return t.components[0]
    return reduce_indices(t)


def contract(f: Callable, t):
    """Fold each supersubscript axis with the binary function f, left to right."""
    if not isinstance(t, TensorValue):
        return t
    while True:
        axis = next(
            (i for i, m in enumerate(t.indices) if m.variance == SUPERSUBSCRIPT), None
        )
        if axis is None:
            return t
        new_shape = t.shape[:axis] + t.shape[axis + 1 :]
        strides = _strides(t.shape)
        comps = []
        for c in _coords(new_shape):
            src = list(c[:axis]) + [0] + list(c[axis:])
            acc = t.components[_offset(src, strides)]
            for v in range(1, t.shape[axis]):
                src[axis] = v
                acc = f(acc, t.components[_offset(src, strides)])
            comps.append(acc)
        marks = _remove_at(axis + 1, t.indices)
        if not new_shape:
            return comps[0]
        t = TensorValue(new_shape, tuple(comps), marks)


def flip_indices(t):
    """Swap superscripts and subscripts; supersubscripts stay."""
    if not isinstance(t, TensorValue):
        return t
    flipped = tuple(IndexMark(-m.variance, m.label) for m in t.indices)
    return TensorValue(t.shape, t.components, flipped)


def permute_marked_axes(t: TensorValue, perm: Sequence[int]) -> TensorValue:
    """Reorder the marked axes by 0-based source positions; form axes stay."""
    axis_src = list(perm) + list(range(len(t.indices), t.rank))
    new_shape = tuple(t.shape[a] for a in axis_src)
    strides = _strides(t.shape)
    comps = []
    for c in _coords(new_shape):
        src = [0] * t.rank
        for dst_axis, src_axis in enumerate(axis_src):
            src[src_axis] = c[dst_axis]
        comps.append(t.components[_offset(src, strides)])
    new_marks = tuple(t.indices[a] for a in perm)
    return TensorValue(new_shape, tuple(comps), new_marks)


def transpose(order: Sequence[Label], t: TensorValue):
    """Permute the marked axes so labels appear in the given order."""
    if not isinstance(t, TensorValue):
        raise IndexLabelError("transpose expects a tensor")
    labels = [m.label for m in t.indices]
    if len(order) != len(labels):
        raise IndexLabelError("transpose order is not a permutation of the tensor's labels")
    perm: list[int] = []
    for lab in order:
        hits = [i for i, existing in enumerate(labels) if labels_equal(existing, lab)]
        if len(hits) != 1 or hits[0] in perm:
            raise IndexLabelError(
                "transpose order is not a permutation of the tensor's labels"
            )
        perm.append(hits[0])
    return permute_marked_axes(t, perm)


def tensor_map(f: Callable, t):
    """Map f over components; marked results hoist their indices to the end."""
    if not isinstance(t, TensorValue):
        return f(t)
    results = [f(c) for c in t.components]
    inner = [r for r in results if isinstance(r, TensorValue)]
    if not inner:
        return TensorValue(t.shape, tuple(results), t.indices)
    if len(inner) != len(results):
        raise ShapeMismatchError("mixed scalar and tensor results in tensor-map")
    first = inner[0]
    for r in inner[1:]:
        if r.shape != first.shape or r.indices != first.indices:
            raise ShapeMismatchError("inconsistent result shapes in tensor-map")
    if first.indices and t.form_degree:
        raise IndexLabelError("cannot hoist marked results over unmarked axes")
    comps = tuple(c for r in results for c in r.components)
    combined = TensorValue(t.shape + first.shape, comps, t.indices + first.indices)
    return reduce_indices(combined)


def _mark_str(m: IndexMark) -> str:
    head = {SUPERSCRIPT: "~", SUBSCRIPT: "_", SUPERSUBSCRIPT: "~_"}[m.variance]
    if isinstance(m.label, Dummy):
        return head + "#"
    if isinstance(m.label, Sym):
        return head + m.label.name
    return head + str(m.label)


def format_tensor(t: TensorValue, fmt: Callable[[object], str] = str) -> str:
    def body(shape, comps):
        if not shape:
            return fmt(comps[0])
        if len(shape) == 1:
            return "[|" + " ".join(fmt(c) for c in comps) + "|]"
        stride = len(comps) // shape[0]
        rows = [
            body(shape[1:], comps[i * stride : (i + 1) * stride])
            for i in range(shape[0])
        ]
        return "[|" + " ".join(rows) + "|]"

    return body(t.shape, t.components) + "".join(_mark_str(m) for m in t.indices)
