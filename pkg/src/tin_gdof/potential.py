"""Potential-graph membership test and power-allocation recovery.

A candidate GDoF tuple is achievable under a fixed decoding order iff a
weighted digraph built from the network levels and the tuple has no directed
circuit of negative length.  The graph has one vertex per active user plus a
ground vertex; shortest-path distances from ground are then valid transmit
power exponents.

The five edge families:

* INTRA_FORWARD  (earlier decode position -> later):  alpha_tail - d_tail
* INTRA_BACKWARD (later -> earlier):                  alpha_tail - alpha_head - d_tail
* CROSS          (user -> user of another cell):      alpha_tail - cross(head -> tail cell) - d_tail
* TO_GROUND:                                          alpha_tail - d_tail
* FROM_GROUND:                                        0

where ``alpha_x`` is the direct level of x.  Which direction of an intra-cell
pair is "forward" is fixed by the decode positions, never by comparing
levels, so ties in levels cannot change the family.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Mapping

from .errors import GuardExceededError, InfeasibleAllocationError, NetworkSpecError
from .model import DecodingOrder, NetworkSpec, Subnetwork, User
from .regions import GdofTuple

#: Ground vertex sentinel; cells are 1-based so (0, 0) is never a real user.
GROUND = User(0, 0)

#: Exhaustive circuit enumeration refuses graphs with more vertices than this.
CIRCUIT_ENUMERATION_MAX_VERTICES = 9


class EdgeFamily(Enum):
    INTRA_FORWARD = "intra_forward"
    INTRA_BACKWARD = "intra_backward"
    CROSS = "cross"
    FROM_GROUND = "from_ground"
    TO_GROUND = "to_ground"


@dataclass(frozen=True)
class Edge:
    tail: User
    head: User
    length: Fraction
    family: EdgeFamily


@dataclass(frozen=True)
class PotentialGraph:
    """Complete digraph over ground + active users with exact edge lengths."""

    vertices: tuple[User, ...]
    edges: tuple[Edge, ...]

    def length(self, tail: User, head: User) -> Fraction:
        return self._length_map[(tail, head)]

    @property
    def _length_map(self) -> Mapping:
        m = self.__dict__.get("_lm")
        if m is None:
            m = {(e.tail, e.head): e.length for e in self.edges}
            self.__dict__["_lm"] = m
        return m

    def family_count(self, family: EdgeFamily) -> int:
        return sum(1 for e in self.edges if e.family is family)


@dataclass(frozen=True)
class Circuit:
    """A simple directed circuit, stored as its vertex cycle (no repeats)."""

    vertices: tuple[User, ...]
    length: Fraction


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: Circuit | None = None

    def __bool__(self) -> bool:
        return self.feasible


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit power exponents (<= 0); deactivated users are marked off."""

    exponents: Mapping
    off: frozenset

    def __post_init__(self):
        exps = {User(*u): Fraction(v) for u, v in self.exponents.items()}
        if any(v > 0 for v in exps.values()):
            raise ValueError("power exponents must be <= 0")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "off", frozenset(User(*u) for u in self.off))
        if exps.keys() & self.off:
            raise ValueError("a user cannot be both powered and off")

    def is_off(self, user: User) -> bool:
        return user in self.off

    def __getitem__(self, user: User) -> Fraction:
        return self.exponents[user]

    @classmethod
    def all_off(cls, net: NetworkSpec) -> "PowerAllocation":
        return cls({}, frozenset(net.users))


def build_potential_graph(
    net: NetworkSpec,
    order: DecodingOrder,
    s: Subnetwork | None = None,
    d: GdofTuple | None = None,
) -> PotentialGraph:
    """Potential graph of ``d`` over the active users of ``s``.

    ``d`` must vanish outside ``s``; deactivated users are removed from the
    graph entirely.
    """
    s = net.full_subnetwork if s is None else net.validate_subnetwork(s)
    order.validate(net, s)
    if d is None:
        d = GdofTuple({u: 0 for u in net.users})
    bad = d.support() - s
    if bad:
        raise NetworkSpecError(f"GDoF tuple is nonzero on deactivated users {sorted(bad)}")

    edges: list[Edge] = []
    active = sorted(s)

    for k in range(1, net.cells + 1):
        seq = order.slots(k)
        for a in range(len(seq)):
            for b in range(a + 1, len(seq)):
                u, v = User(k, seq[a]), User(k, seq[b])
                edges.append(
                    Edge(u, v, net.direct(u) - d[u], EdgeFamily.INTRA_FORWARD)
                )
                edges.append(
                    Edge(v, u, net.direct(v) - net.direct(u) - d[v], EdgeFamily.INTRA_BACKWARD)
                )
    for u, v in itertools.permutations(active, 2):
        if u.cell != v.cell:
            edges.append(
                Edge(u, v, net.direct(u) - net.alpha(v, u.cell) - d[u], EdgeFamily.CROSS)
            )
    for u in active:
        edges.append(Edge(GROUND, u, Fraction(0), EdgeFamily.FROM_GROUND))
        edges.append(Edge(u, GROUND, net.direct(u) - d[u], EdgeFamily.TO_GROUND))

    return PotentialGraph((GROUND, *active), tuple(edges))


def _bellman_ford(g: PotentialGraph):
    """Shortest paths from ground; returns (distances, negative-cycle witness)."""
    dist: dict[User, Fraction] = {v: None for v in g.vertices}
    dist[GROUND] = Fraction(0)
    n = len(g.vertices)
    for round_ in range(n):
        changed = False
        for e in g.edges:
            du = dist[e.tail]
            if du is None:
                continue
            cand = du + e.length
            if dist[e.head] is None or cand < dist[e.head]:
                dist[e.head] = cand
                changed = True
        if not changed:
            return dist, None
    # A relaxation in round n proves a negative circuit; extract one exactly.
    return dist, _extract_negative_circuit(g)


def _extract_negative_circuit(g: PotentialGraph) -> Circuit:
    """Find a simple circuit of negative length via leveled shortest walks.

    Level k holds the minimum length over walks from ground using at most k
    edges, with one parent table per level (levels are immutable once built,
    so the parent chains telescope exactly).  A level-n improvement yields a
    walk whose repeated-vertex loops must include a negative one; that closed
    walk is then decomposed into simple circuits.
    """
    verts = list(g.vertices)
    n = len(verts)
    prev: dict[User, Fraction] = {v: None for v in verts}
    prev[GROUND] = Fraction(0)
    levels = [prev]
    parents: list[dict[User, User]] = [{}]
    target = None
    for _ in range(n):
        cur = dict(prev)
        par: dict[User, User] = {}
        for e in g.edges:
            du = prev[e.tail]
            if du is None:
                continue
            cand = du + e.length
            if cur[e.head] is None or cand < cur[e.head]:
                cur[e.head] = cand
                par[e.head] = e.tail
        levels.append(cur)
        parents.append(par)
        prev = cur
    for v in verts:
        if levels[n][v] is not None and (
            levels[n - 1][v] is None or levels[n][v] < levels[n - 1][v]
        ):
            target = v
            break
    assert target is not None, "extraction called on a feasible graph"

    # Reconstruct the at-most-n-edge walk to the target, then keep splicing
    # out vertex repeats; a repeat whose loop has negative length must exist.
    walk = [target]
    k, v = n, target
    while k > 0:
        u = parents[k].get(v)
        if u is None:
            k -= 1  # value inherited from the previous level, no edge taken
            continue
        walk.append(u)
        v = u
        k -= 1
    walk.reverse()  # ground ... target

    while True:
        seen: dict[User, int] = {}
        loop = None
        for idx, v in enumerate(walk):
            if v in seen:
                loop = (seen[v], idx)
                break
            seen[v] = idx
        assert loop is not None, "walk of n edges must repeat a vertex"
        a, b = loop
        length = Fraction(0)
        for i in range(a, b):
            length += g.length(walk[i], walk[i + 1])
        if length < 0:
            cycle = tuple(walk[a:b])
            return Circuit(cycle, length)
        del walk[a:b]  # nonnegative loop: splice it out and look again


def feasible_by_negative_cycle(g: PotentialGraph) -> FeasibilityResult:
    """Feasible iff no directed circuit of ``g`` has negative total length.

    Decided by shortest-path relaxation from ground; on failure the witness
    is a concrete simple circuit with strictly negative length.
    """
    _, cycle = _bellman_ford(g)
    return FeasibilityResult(cycle is None, cycle)


def recover_power_allocation(g: PotentialGraph) -> PowerAllocation:
    """Ground-shortest-path potentials as transmit power exponents.

    Only valid on feasible graphs.  The returned exponents are <= 0 (the
    zero-length ground edges cap them) and satisfy every difference
    constraint the graph encodes, so the achievable-GDoF evaluator dominates
    the tuple the graph was built for.
    """
    dist, cycle = _bellman_ford(g)
    if cycle is not None:
        raise InfeasibleAllocationError(
            f"no feasible power allocation: circuit {cycle.vertices} has length {cycle.length}"
        )
    return PowerAllocation(
        {v: dist[v] for v in g.vertices if v != GROUND}, frozenset()
    )


def iter_simple_circuits(g: PotentialGraph) -> Iterator[Circuit]:
    """Every simple directed circuit of the (complete) potential graph."""
    verts = sorted(g.vertices)
    lengths = g._length_map
    for m in range(2, len(verts) + 1):
        for subset in itertools.combinations(verts, m):
            anchor, rest = subset[0], subset[1:]
            for perm in itertools.permutations(rest):
                cycle = (anchor, *perm)
                total = Fraction(0)
                for i in range(len(cycle)):
                    total += lengths[(cycle[i - 1], cycle[i])]
                yield Circuit(cycle, total)


def all_circuits_region_oracle(net: NetworkSpec, order: DecodingOrder, d: GdofTuple) -> bool:
    """Membership by brute force: check every simple circuit for negative length.

    This is the defining condition, prior to any redundancy elimination; it
    exists as an independent oracle for the fast tests.  Guarded to small
    graphs (the circuit count grows factorially).
    """
    g = build_potential_graph(net, order, None, d)
    if len(g.vertices) > CIRCUIT_ENUMERATION_MAX_VERTICES:
        raise GuardExceededError(
            f"{len(g.vertices)} vertices exceeds the exhaustive-enumeration guard "
            f"({CIRCUIT_ENUMERATION_MAX_VERTICES})"
        )
    return all(c.length >= 0 for c in iter_simple_circuits(g))
