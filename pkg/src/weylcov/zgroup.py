"""Arithmetic on Z = Z_d + Z_d and its subgroups.

Elements are pairs ``(x, y)`` reduced mod ``d``.  The canonical order of
elements everywhere in the package is the index ``x * d + y``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import pi
from typing import Iterable, Iterator

import numpy as np

TWO_PI = 2 * pi
FORM_ATOL = 1e-12
ENUMERATION_LIMIT = 12


class ModulusMismatch(ValueError):
    """Raised when elements over different moduli are combined."""


@dataclass(frozen=True, order=False)
class GroupElement:
    x: int
    y: int
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"modulus must be >= 2, got {self.d}")
        object.__setattr__(self, "x", int(self.x) % self.d)
        object.__setattr__(self, "y", int(self.y) % self.d)

    @classmethod
    def from_index(cls, index: int, d: int) -> "GroupElement":
        return cls(index // d, index % d, d)

    @property
    def index(self) -> int:
        return self.x * self.d + self.y

    def _check(self, other: "GroupElement"):
        if not isinstance(other, GroupElement):
            raise TypeError(f"expected GroupElement, got {type(other).__name__}")
        if other.d != self.d:
            raise ModulusMismatch(f"moduli differ: {self.d} vs {other.d}")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.x + other.x, self.y + other.y, self.d)

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.x - other.x, self.y - other.y, self.d)

    def __neg__(self) -> "GroupElement":
        return GroupElement(-self.x, -self.y, self.d)

    def __rmul__(self, k: int) -> "GroupElement":
        return GroupElement(k * self.x, k * self.y, self.d)

    def __lt__(self, other: "GroupElement") -> bool:
        self._check(other)
        return self.index < other.index

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def as_list(self) -> list[int]:
        return [self.x, self.y]

    def __repr__(self):
        return f"({self.x},{self.y})/{self.d}"


def zero(d: int) -> GroupElement:
    return GroupElement(0, 0, d)


def all_elements(d: int) -> list[GroupElement]:
    """All d**2 elements in canonical order."""
    return [GroupElement(x, y, d) for x in range(d) for y in range(d)]


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    return a + b


def apply_J(z: GroupElement) -> GroupElement:
    """The map J(x, y) = (y, -x)."""
    return GroupElement(z.y, -z.x, z.d)


def _reduce_angle(k: int, d: int) -> float:
    # integer reduction first, so the result is an exact multiple of 2*pi/d
    return TWO_PI * (k % d) / d


def duality_form(a: GroupElement, b: GroupElement) -> float:
    """<a, b> = 2*pi*(a.x*b.x + a.y*b.y)/d, in [0, 2*pi)."""
    a._check(b)
    return _reduce_angle(a.x * b.x + a.y * b.y, a.d)


def symplectic_form(a: GroupElement, b: GroupElement) -> float:
    """<a, J b> = 2*pi*(a.x*b.y - a.y*b.x)/d, in [0, 2*pi)."""
    a._check(b)
    return _reduce_angle(a.x * b.y - a.y * b.x, a.d)


def angle_is_zero(theta: float, atol: float = FORM_ATOL) -> bool:
    theta = theta % TWO_PI
    return theta < atol or TWO_PI - theta < atol


@dataclass(frozen=True)
class Subgroup:
    """A subgroup of Z_d + Z_d, elements held in canonical order."""

    d: int
    elements: tuple[GroupElement, ...]

    def __post_init__(self):
        elems = tuple(sorted(set(self.elements), key=lambda z: z.index))
        if any(z.d != self.d for z in elems):
            raise ModulusMismatch("subgroup elements must share the modulus")
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "_members", frozenset(elems))
        if zero(self.d) not in self._members:
            raise ValueError("subgroup must contain (0,0)")
        for a in elems:
            for b in elems:
                if a + b not in self._members:
                    raise ValueError(f"set is not closed: {a} + {b}")

    def __contains__(self, z) -> bool:
        return z in self._members

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.d == other.d and self.elements == other.elements

    def __hash__(self):
        return hash((self.d, self.elements))

    @property
    def order(self) -> int:
        return len(self.elements)

    def nonzero(self) -> list[GroupElement]:
        return [z for z in self.elements if not z.is_zero()]

    def generators(self) -> list[GroupElement]:
        """A small generating set, picked greedily in canonical order."""
        gens: list[GroupElement] = []
        span = {zero(self.d)}
        for z in self.elements:
            if z not in span:
                gens.append(z)
                span = set(_closure(gens, self.d))
        return gens

    def as_lists(self) -> list[list[int]]:
        return [z.as_list() for z in self.elements]

    def __repr__(self):
        inner = ", ".join(f"({z.x},{z.y})" for z in self.elements)
        return f"Subgroup(d={self.d}, {{{inner}}})"


def _closure(gens: Iterable[GroupElement], d: int) -> frozenset[GroupElement]:
    members = {zero(d)}
    frontier = list(members)
    gens = list(gens)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                s = a + g
                if s not in members:
                    members.add(s)
                    nxt.append(s)
        frontier = nxt
    return frozenset(members)


def _shared_modulus(elems: Iterable[GroupElement]) -> int | None:
    ds = {z.d for z in elems}
    if len(ds) > 1:
        raise ModulusMismatch(f"mixed moduli: {sorted(ds)}")
    return ds.pop() if ds else None


def cyclic_subgroup(z: GroupElement) -> Subgroup:
    return Subgroup(z.d, tuple(_closure([z], z.d)))


def generated_subgroup(gens: Iterable[GroupElement], d: int | None = None) -> Subgroup:
    """Smallest subgroup containing ``gens``.

    ``d`` is needed only when ``gens`` is empty.
    """
    gens = list(gens)
    found = _shared_modulus(gens)
    if found is None:
        if d is None:
            raise ValueError("modulus required for an empty generator list")
        found = d
    elif d is not None and d != found:
        raise ModulusMismatch(f"moduli differ: {d} vs {found}")
    return Subgroup(found, tuple(_closure(gens, found)))


def is_degenerate(s: Iterable[GroupElement]) -> bool:
    """True iff the symplectic form vanishes on every pair from ``s``."""
    s = list(s)
    _shared_modulus(s)
    return all(angle_is_zero(symplectic_form(a, b)) for a, b in combinations(s, 2))


def orthogonal_subgroup(g: Subgroup) -> Subgroup:
    """Annihilator of ``g`` under the duality form."""
    gens = g.generators()
    members = tuple(
        w for w in all_elements(g.d) if all(angle_is_zero(duality_form(w, z)) for z in gens)
    )
    return Subgroup(g.d, members)


def image_under_J(g: Subgroup) -> Subgroup:
    return Subgroup(g.d, tuple(apply_J(z) for z in g))


def all_subgroups(d: int, limit: int = ENUMERATION_LIMIT) -> list[Subgroup]:
    """Every subgroup of Z_d + Z_d, from closures of 1- and 2-element generator sets."""
    if d > limit:
        raise ValueError(f"subgroup enumeration refused for d={d} (limit {limit})")
    return list(_all_subgroups(d))


@lru_cache(maxsize=None)
def _all_subgroups(d: int) -> tuple[Subgroup, ...]:
    # Z_d + Z_d has rank 2, so every subgroup is {i a + j b} for some pair a, b
    coeff = np.arange(d)
    seen: set[frozenset[int]] = set()
    for ax in range(d):
        for ay in range(d):
            for b in range(ax * d + ay, d * d):
                bx, by = divmod(b, d)
                xs = (coeff[:, None] * ax + coeff[None, :] * bx) % d
                ys = (coeff[:, None] * ay + coeff[None, :] * by) % d
                seen.add(frozenset((xs * d + ys).ravel().tolist()))
    groups = [Subgroup(d, tuple(GroupElement.from_index(k, d) for k in m)) for m in seen]
    return tuple(sorted(groups, key=lambda g: (g.order, [z.index for z in g])))


def maximal_degenerate_subgroups(d: int, limit: int = ENUMERATION_LIMIT) -> list[Subgroup]:
    """All degenerate subgroups of order ``d``, deterministic order."""
    if d > limit:
        raise ValueError(
            f"maximal degenerate subgroup enumeration refused for d={d} (limit {limit})"
        )
    return [g for g in all_subgroups(d, limit) if g.order == d and is_degenerate(g.generators())]
