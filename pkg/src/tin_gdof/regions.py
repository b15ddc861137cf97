"""Polyhedral achievable-region machinery.

The achievable GDoF region of a fixed decoding order is a polytope: per-cell
prefix bounds plus one bound per cyclic sequence of cells and per choice of
decode-depth in each participating cell.  This module generates that
inequality list explicitly, evaluates the associated set function, and tests
membership of GDoF tuples with exact rational arithmetic.

Everything here is a pure function over immutable values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import NetworkSpecError
from .model import DecodingOrder, NetworkSpec, Rational, Subnetwork, User, rationalize


@dataclass(frozen=True)
class CyclicSequence:
    """An ordered tuple of distinct cells, identified up to rotation.

    Canonical form: rotated so the smallest cell comes first.  Two sequences
    compare equal iff they are rotations of each other.
    """

    cells: tuple[int, ...]

    def __post_init__(self):
        cells = tuple(self.cells)
        if len(set(cells)) != len(cells) or not cells:
            raise ValueError(f"cyclic sequence needs distinct, nonempty cells: {cells}")
        k = cells.index(min(cells))
        object.__setattr__(self, "cells", cells[k:] + cells[:k])

    def __len__(self) -> int:
        return len(self.cells)

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Yield (cell, predecessor cell) around the cycle."""
        m = len(self.cells)
        for j in range(m):
            yield self.cells[j], self.cells[j - 1]


def enumerate_cyclic_sequences(cells: Iterable[int], min_len: int = 1) -> Iterator[CyclicSequence]:
    """All cyclic sequences over nonempty subsets of ``cells`` with length >= min_len.

    Each sequence appears exactly once, in canonical form, ordered by
    (length, subset, arrangement).  The count for n cells and min_len=1 is
    sum_m C(n,m)*(m-1)!.
    """
    cells = sorted(set(cells))
    if not cells:
        raise ValueError("cell set must be nonempty")
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    for m in range(min_len, len(cells) + 1):
        for subset in itertools.combinations(cells, m):
            anchor, rest = subset[0], subset[1:]
            for perm in itertools.permutations(rest):
                yield CyclicSequence((anchor,) + perm)


@dataclass(frozen=True)
class LinearInequality:
    """sum of d over ``users`` <= ``rhs`` (all coefficients are 0 or 1)."""

    users: frozenset
    rhs: Fraction

    def __post_init__(self):
        if not self.users:
            raise ValueError("inequality needs at least one user")

    def evaluate(self, d: "GdofTuple") -> Fraction:
        return sum((d[u] for u in self.users), Fraction(0))

    def holds(self, d: "GdofTuple") -> bool:
        return self.evaluate(d) <= self.rhs


@dataclass(frozen=True)
class GdofTuple:
    """One nonnegative GDoF value per user."""

    d: Mapping

    def __post_init__(self):
        frozen = {User(*u): Fraction(v) for u, v in self.d.items()}
        if any(v < 0 for v in frozen.values()):
            raise ValueError("GDoF values must be nonnegative")
        object.__setattr__(self, "d", frozen)

    @classmethod
    def zero(cls, net: NetworkSpec) -> "GdofTuple":
        return cls({u: Fraction(0) for u in net.users})

    @classmethod
    def from_values(cls, net: NetworkSpec, values: Sequence[Rational]) -> "GdofTuple":
        """Build from one value per user in canonical (cell, slot) order."""
        users = net.users
        if len(values) != len(users):
            raise ValueError(f"expected {len(users)} values, got {len(values)}")
        return cls({u: rationalize(v) for u, v in zip(users, values)})

    def __getitem__(self, user: User) -> Fraction:
        return self.d.get(user, Fraction(0))

    def support(self) -> Subnetwork:
        return frozenset(u for u, v in self.d.items() if v > 0)

    def scaled(self, c: Rational) -> "GdofTuple":
        c = Fraction(c)
        return GdofTuple({u: c * v for u, v in self.d.items()})

    def as_list(self, users: Sequence[User]) -> list[Fraction]:
        return [self[u] for u in users]


@dataclass(frozen=True)
class PolyRegion:
    """A polytope of GDoF tuples: 0/1 sum inequalities, nonnegativity, forced zeros."""

    dim_users: tuple[User, ...]
    inequalities: tuple[LinearInequality, ...]
    forced_zero: frozenset

    def active_users(self) -> tuple[User, ...]:
        return tuple(u for u in self.dim_users if u not in self.forced_zero)

    def same_system(self, other: "PolyRegion") -> bool:
        """Structural equality: same users, same (support, rhs) list, same zeros."""
        return (
            self.dim_users == other.dim_users
            and self.forced_zero == other.forced_zero
            and [(q.users, q.rhs) for q in self.inequalities]
            == [(q.users, q.rhs) for q in other.inequalities]
        )

    def scaled(self, c: Rational) -> "PolyRegion":
        c = Fraction(c)
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return PolyRegion(
            self.dim_users,
            tuple(LinearInequality(q.users, c * q.rhs) for q in self.inequalities),
            self.forced_zero,
        )


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    violated: LinearInequality | None = None

    def __bool__(self) -> bool:
        return self.member


def _active_per_cell(net: NetworkSpec, s: Subnetwork) -> dict[int, list[int]]:
    per_cell: dict[int, list[int]] = {}
    for u in sorted(s):
        per_cell.setdefault(u.cell, []).append(u.slot)
    return per_cell


def polyhedral_region(
    net: NetworkSpec, order: DecodingOrder, s: Subnetwork | None = None
) -> PolyRegion:
    """Explicit inequality description of the fixed-order achievable region.

    For each active cell ``i`` and decode depth ``l``: the first ``l`` decode
    positions obey  sum d <= alpha_ii of the depth-``l`` user.  For each
    cyclic sequence of two or more active cells and each choice of one depth
    per cell: the union of the per-cell prefixes obeys
    sum d <= sum_j (alpha_{i_j i_j} - alpha_{i_j -> i_{j-1}}), levels taken at
    each cell's depth user, with the predecessor taken around the cycle.

    Users outside ``s`` are forced to zero.  Emission order is deterministic:
    single-cell bounds by (cell, depth), then cyclic bounds by (length,
    canonical sequence, depth vector).
    """
    s = net.full_subnetwork if s is None else net.validate_subnetwork(s)
    order.validate(net, s)
    per_cell = _active_per_cell(net, s)
    active_cells = sorted(per_cell)

    inequalities: list[LinearInequality] = []

    def prefix_users(cell: int, depth: int) -> frozenset:
        return frozenset(order.user_at(cell, p) for p in range(1, depth + 1))

    for i in active_cells:
        for depth in range(1, len(per_cell[i]) + 1):
            top = order.user_at(i, depth)
            inequalities.append(LinearInequality(prefix_users(i, depth), net.direct(top)))

    if len(active_cells) >= 2:
        for seq in enumerate_cyclic_sequences(active_cells, min_len=2):
            depth_ranges = [range(1, len(per_cell[i]) + 1) for i in seq.cells]
            for depths in itertools.product(*depth_ranges):
                users: set = set()
                rhs = Fraction(0)
                for (cell, pred), depth in zip(seq.pairs(), depths):
                    top = order.user_at(cell, depth)
                    rhs += net.direct(top) - net.alpha(top, pred)
                    users |= prefix_users(cell, depth)
                inequalities.append(LinearInequality(frozenset(users), rhs))

    forced = frozenset(net.full_subnetwork - s)
    return PolyRegion(net.users, tuple(inequalities), forced)


def set_function_f(net: NetworkSpec, order: DecodingOrder, subset: Iterable[User]) -> Fraction:
    """Right-hand side of the region bound attached to a decode-prefix user set.

    ``subset`` must be, in every participating cell, exactly the first
    ``l_i`` decode positions of ``order``.  Returns 0 for the empty set, the
    depth user's direct level for one cell, and the minimum over full-length
    cyclic arrangements of the participating cells otherwise.
    """
    subset = frozenset(User(*u) for u in subset)
    if not subset:
        return Fraction(0)
    per_cell = _active_per_cell(net, subset)
    depth_user: dict[int, User] = {}
    for cell, slots in per_cell.items():
        depth = len(slots)
        want = sorted(order.slots(cell)[:depth])
        if sorted(slots) != want:
            raise NetworkSpecError(
                f"subset is not a decode prefix in cell {cell}: got slots {sorted(slots)}, "
                f"prefix would be {want}"
            )
        depth_user[cell] = order.user_at(cell, depth)

    cells = sorted(per_cell)
    if len(cells) == 1:
        return net.direct(depth_user[cells[0]])
    best = None
    anchor, rest = cells[0], cells[1:]
    for perm in itertools.permutations(rest):
        seq = CyclicSequence((anchor,) + perm)
        total = Fraction(0)
        for cell, pred in seq.pairs():
            top = depth_user[cell]
            total += net.direct(top) - net.alpha(top, pred)
        if best is None or total < best:
            best = total
    return best


def membership(region: PolyRegion, d: GdofTuple) -> MembershipResult:
    """Exact membership test; on failure, reports the first violated inequality.

    Nonnegativity is part of the GdofTuple type; forced-zero coordinates are
    checked first, then inequalities in emission order.
    """
    unknown = set(d.d) - set(region.dim_users)
    if unknown:
        raise NetworkSpecError(f"GDoF tuple indexes unknown users {sorted(unknown)}")
    for u in sorted(region.forced_zero):
        if d[u] != 0:
            return MembershipResult(False, LinearInequality(frozenset([u]), Fraction(0)))
    for q in region.inequalities:
        if not q.holds(d):
            return MembershipResult(False, q)
    return MembershipResult(True)
