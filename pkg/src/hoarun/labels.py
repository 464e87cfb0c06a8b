"""Boolean formulas over atomic propositions, used as transition labels.

A formula is an immutable tree; a valuation assigns one bit per
proposition index. Semantic checks (disjointness, covering) enumerate
assignments of the propositions that actually occur in the formulas
under test: unreferenced propositions cannot affect the result, so the
checks stay exact while touching at most 2**k cases for k occurring
propositions. A hard cap keeps that enumeration predictable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

DEFAULT_ENUM_CAP = 16


class LabelError(Exception):
    """Base class for label-level errors."""


class CapacityError(LabelError):
    """A semantic check would enumerate more propositions than the cap allows."""


class ValuationWidthError(LabelError):
    """A formula refers to a proposition outside the valuation's width.

    Signals a mismatch between an automaton's proposition list and the
    inputs being fed to it.
    """


class LabelExpr:
    """Base class for formula nodes. Instances are immutable and shareable."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class TrueLabel(LabelExpr):
    pass


@dataclass(frozen=True, slots=True)
class FalseLabel(LabelExpr):
    pass


@dataclass(frozen=True, slots=True)
class Ap(LabelExpr):
    index: int


@dataclass(frozen=True, slots=True)
class Not(LabelExpr):
    child: LabelExpr


@dataclass(frozen=True, slots=True)
class And(LabelExpr):
    children: tuple[LabelExpr, ...]


@dataclass(frozen=True, slots=True)
class Or(LabelExpr):
    children: tuple[LabelExpr, ...]


TRUE = TrueLabel()
FALSE = FalseLabel()


def land(*children: LabelExpr) -> LabelExpr:
    """n-ary conjunction; flattens nested conjunctions, never simplifies."""
    flat: list[LabelExpr] = []
    for child in children:
        if isinstance(child, And):
            flat.extend(child.children)
        else:
            flat.append(child)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def lor(*children: LabelExpr) -> LabelExpr:
    """n-ary disjunction; flattens nested disjunctions, never simplifies."""
    flat: list[LabelExpr] = []
    for child in children:
        if isinstance(child, Or):
            flat.extend(child.children)
        else:
            flat.append(child)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


@dataclass(frozen=True, slots=True)
class Valuation:
    """Truth assignment as a bit vector: bit i holds proposition i's value."""

    bits: int
    width: int

    @classmethod
    def from_bools(cls, values: Iterable[bool]) -> "Valuation":
        bits = 0
        width = 0
        for width, value in enumerate(values, start=1):
            if value:
                bits |= 1 << (width - 1)
        return cls(bits, width)

    def __getitem__(self, index: int) -> bool:
        if not 0 <= index < self.width:
            raise ValuationWidthError(
                f"proposition index {index} outside valuation width {self.width}"
            )
        return bool(self.bits >> index & 1)

    def bit_string(self) -> str:
        """Bits as text, proposition 0 first."""
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.width))


def evaluate(expr: LabelExpr, valuation: Valuation) -> bool:
    """Standard Boolean semantics of ``expr`` under ``valuation``."""
    if isinstance(expr, Ap):
        return valuation[expr.index]
    if isinstance(expr, TrueLabel):
        return True
    if isinstance(expr, FalseLabel):
        return False
    if isinstance(expr, Not):
        return not evaluate(expr.child, valuation)
    if isinstance(expr, And):
        return all(evaluate(c, valuation) for c in expr.children)
    if isinstance(expr, Or):
        return any(evaluate(c, valuation) for c in expr.children)
    raise TypeError(f"not a label expression: {expr!r}")


def occurring_aps(*exprs: LabelExpr) -> frozenset[int]:
    """Indices of all propositions occurring in the given formulas."""
    found: set[int] = set()
    stack: list[LabelExpr] = list(exprs)
    while stack:
        node = stack.pop()
        if isinstance(node, Ap):
            found.add(node.index)
        elif isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or)):
            stack.extend(node.children)
    return frozenset(found)


def _occurring_or_raise(
    exprs: Iterable[LabelExpr], ap_count: int, cap: int
) -> tuple[int, ...]:
    occ = sorted(occurring_aps(*exprs))
    if occ and occ[-1] >= ap_count:
        raise ValueError(
            f"formula references proposition {occ[-1]} but only {ap_count} declared"
        )
    if len(occ) > cap:
        raise CapacityError(
            f"check would enumerate {len(occ)} propositions (cap {cap})"
        )
    return tuple(occ)


def _assignments(occ: tuple[int, ...], width: int) -> Iterator[Valuation]:
    for mask in range(1 << len(occ)):
        bits = 0
        for pos, index in enumerate(occ):
            if mask >> pos & 1:
                bits |= 1 << index
        yield Valuation(bits, width)


def are_disjoint(
    a: LabelExpr,
    b: LabelExpr,
    ap_count: int,
    *,
    max_enum_aps: int = DEFAULT_ENUM_CAP,
) -> bool:
    """True iff no valuation satisfies both formulas."""
    occ = _occurring_or_raise((a, b), ap_count, max_enum_aps)
    for valuation in _assignments(occ, ap_count):
        if evaluate(a, valuation) and evaluate(b, valuation):
            return False
    return True


def covers_all(
    labels: Iterable[LabelExpr],
    ap_count: int,
    *,
    max_enum_aps: int = DEFAULT_ENUM_CAP,
) -> bool:
    """True iff every valuation satisfies at least one of the labels."""
    labels = tuple(labels)
    occ = _occurring_or_raise(labels, ap_count, max_enum_aps)
    for valuation in _assignments(occ, ap_count):
        if not any(evaluate(label, valuation) for label in labels):
            return False
    return True


def minterm(index: int, ap_count: int) -> LabelExpr:
    """Conjunction of literals for valuation ``index``, proposition 0 as LSB."""
    literals: list[LabelExpr] = []
    for i in range(ap_count):
        literals.append(Ap(i) if index >> i & 1 else Not(Ap(i)))
    return land(*literals)


def compile_label(expr: LabelExpr) -> Callable[[int], object]:
    """Compile a formula into one code object over the valuation bits.

    The result is truthy iff the formula holds; equivalent to
    :func:`evaluate` but without width checks, for the stepping hot path.
    """
    return eval(f"lambda b: {_py_source(expr)}", {"__builtins__": {}})


def _py_source(expr: LabelExpr) -> str:
    if isinstance(expr, Ap):
        return f"(b >> {expr.index} & 1)"
    if isinstance(expr, TrueLabel):
        return "True"
    if isinstance(expr, FalseLabel):
        return "False"
    if isinstance(expr, Not):
        return f"(not {_py_source(expr.child)})"
    if isinstance(expr, And):
        if not expr.children:
            return "True"
        return "(" + " and ".join(_py_source(c) for c in expr.children) + ")"
    if isinstance(expr, Or):
        if not expr.children:
            return "False"
        return "(" + " or ".join(_py_source(c) for c in expr.children) + ")"
    raise TypeError(f"not a label expression: {expr!r}")
