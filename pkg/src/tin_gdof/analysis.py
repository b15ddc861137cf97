"""Region analysis: membership search, exact optimization, inclusion tests,
the strength-level outer bound, and finite-SNR rate/gap evaluation.

GDoF-level computations are exact (rationals end to end); finite-SNR rate
computations are floating point with a 1e-9 bits comparison tolerance, since
rate logarithms have no exact representation.  All rates are in bits per
channel use (base-2 logs).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import _lp
from .conditions import check_optimality
from .errors import ConditionsNotMetError, GuardExceededError, NetworkSpecError
from .model import (
    DecodingOrder,
    FiniteSnrSpec,
    NetworkSpec,
    Subnetwork,
    User,
    enumerate_orders,
    sort_finite_snr,
)
from .potential import (
    PowerAllocation,
    build_potential_graph,
    feasible_by_negative_cycle,
    recover_power_allocation,
)
from .regions import (
    GdofTuple,
    LinearInequality,
    PolyRegion,
    enumerate_cyclic_sequences,
    polyhedral_region,
)

#: Vertex enumeration refuses regions with more active users than this.
VERTEX_GUARD_DIM = 8

#: Comparison tolerance for finite-SNR rates, in bits.
RATE_TOL_BITS = 1e-9


# -- achievable GDoF evaluator ----------------------------------------------


def achievable_gdof(
    net: NetworkSpec,
    order: DecodingOrder,
    alloc: PowerAllocation,
    *,
    clip: bool = True,
) -> dict[User, Fraction]:
    """Per-user GDoF ceiling of a decoding order and power allocation.

    For the user at decode position ``l`` of cell ``k``: its own received
    exponent minus the larger of (a) the strongest not-yet-decoded in-cell
    exponent and (b) the strongest inter-cell exponent, the penalty floored
    at zero.  With ``clip`` the result itself is floored at zero (the
    operational form); without, the raw value is returned (the polyhedral
    form, which may be negative).  Users marked off contribute nothing and
    get zero.
    """
    active = order.active_users()
    if any(alloc.is_off(u) for u in active):
        raise NetworkSpecError("decoding order lists a user that the allocation turns off")
    out: dict[User, Fraction] = {u: Fraction(0) for u in net.users}
    rx_exponent = {u: alloc[u] + net.direct(u) for u in active}
    for k in range(1, net.cells + 1):
        slots = order.slots(k)
        for pos in range(1, len(slots) + 1):
            u = order.user_at(k, pos)
            noise_terms = [
                rx_exponent[order.user_at(k, p)] for p in range(1, pos)
            ]
            noise_terms += [
                alloc[v] + net.alpha(v, k) for v in active if v.cell != k
            ]
            penalty = Fraction(0)
            if noise_terms:
                penalty = max(max(noise_terms), Fraction(0))
            value = rx_exponent[u] - penalty
            out[u] = max(value, Fraction(0)) if clip else value
    return out


def gdof_dominates(
    net: NetworkSpec, order: DecodingOrder, alloc: PowerAllocation, d: GdofTuple
) -> bool:
    """Whether the allocation's achievable GDoF covers ``d`` componentwise."""
    ceil = achievable_gdof(net, order, alloc)
    return all(ceil[u] >= d[u] for u in net.users)


# -- general membership (union over orders and subnetworks) ------------------


@dataclass(frozen=True)
class MembershipWitness:
    order: DecodingOrder
    subnetwork: Subnetwork
    allocation: PowerAllocation


@dataclass(frozen=True)
class GeneralMembership:
    member: bool
    witness: MembershipWitness | None = None

    def __bool__(self) -> bool:
        return self.member


def general_membership(net: NetworkSpec, d: GdofTuple) -> GeneralMembership:
    """Search the union of fixed-order regions for a strategy achieving ``d``.

    It suffices to activate exactly the support of ``d`` and scan the decode
    orders of that subnetwork; a tuple achievable with any strategy is also
    achievable with its zero users switched off.
    """
    support = d.support()
    unknown = support - set(net.users)
    if unknown:
        raise NetworkSpecError(f"GDoF tuple indexes unknown users {sorted(unknown)}")
    if not support:
        empty_order = DecodingOrder(tuple(() for _ in range(net.cells)))
        return GeneralMembership(
            True,
            MembershipWitness(empty_order, frozenset(), PowerAllocation.all_off(net)),
        )
    off = frozenset(net.full_subnetwork - support)
    for order in enumerate_orders(net, support):
        g = build_potential_graph(net, order, support, d)
        if feasible_by_negative_cycle(g).feasible:
            alloc = recover_power_allocation(g)
            alloc = PowerAllocation(alloc.exponents, off)
            return GeneralMembership(True, MembershipWitness(order, support, alloc))
    return GeneralMembership(False)


# -- exact optimization and vertex enumeration -------------------------------


def _system(region: PolyRegion) -> tuple[list[User], list[list[Fraction]], list[Fraction]]:
    """Inequality system of a region over its active coordinates only.

    Constraints with the same user support are merged to their smallest rhs
    (only that one can bind), which keeps the feasible set identical.
    """
    users = list(region.active_users())
    index = {u: j for j, u in enumerate(users)}
    best: dict[frozenset, Fraction] = {}
    empty_marker = None
    for q in region.inequalities:
        live = frozenset(u for u in q.users if u in index)
        if live:
            if live not in best or q.rhs < best[live]:
                best[live] = q.rhs
        elif q.rhs < 0:
            # Constraint only over forced-zero users with negative rhs: empty region.
            empty_marker = q.rhs
    rows, rhs = [], []
    for live, bound in sorted(best.items(), key=lambda kv: (sorted(kv[0]), kv[1])):
        row = [Fraction(0)] * len(users)
        for u in live:
            row[index[u]] = Fraction(1)
        rows.append(row)
        rhs.append(bound)
    if empty_marker is not None:
        rows.append([Fraction(0)] * len(users))
        rhs.append(empty_marker)
    return users, rows, rhs


@dataclass(frozen=True)
class WeightedOptimum:
    value: Fraction
    argmax: GdofTuple


def max_weighted_gdof(region: PolyRegion, weights: Mapping) -> WeightedOptimum:
    """Exact maximum of a nonnegative-weighted GDoF sum over the region."""
    weights = {User(*u): Fraction(w) for u, w in weights.items()}
    if any(w < 0 for w in weights.values()):
        raise ValueError("weights must be nonnegative")
    users, rows, rhs = _system(region)
    objective = [weights.get(u, Fraction(0)) for u in users]
    value, x = _lp.simplex_max(objective, rows, rhs)
    d = {u: Fraction(0) for u in region.dim_users}
    d.update(dict(zip(users, x)))
    return WeightedOptimum(value, GdofTuple(d))


def vertices(region: PolyRegion) -> list[GdofTuple]:
    """Exact vertex set of the region, canonically ordered.

    Forced-zero coordinates are projected out before basis enumeration and
    re-inserted as zeros.  Guarded to ``VERTEX_GUARD_DIM`` active users.
    """
    users, rows, rhs = _system(region)
    if len(users) > VERTEX_GUARD_DIM:
        raise GuardExceededError(
            f"{len(users)} active users exceed the vertex enumeration guard "
            f"({VERTEX_GUARD_DIM})"
        )
    covered = {u for q in region.inequalities for u in q.users}
    if any(u not in covered for u in users):
        raise NetworkSpecError("region is unbounded in some coordinate")
    if any(b < 0 for b in rhs):
        return []  # all-zero is infeasible, so the region is empty
    out = []
    for point in _lp.enumerate_vertices(rows, rhs):
        d = {u: Fraction(0) for u in region.dim_users}
        d.update(dict(zip(users, point)))
        out.append(GdofTuple(d))
    return out


def region_includes(outer: PolyRegion, inner: PolyRegion) -> bool:
    """Whether every point (equivalently, every vertex) of inner lies in outer.

    Decided constraint by constraint: the supremum of an outer constraint's
    user sum over the inner region is compared against its rhs.  A cheap
    certificate (a single inner constraint covering the user set, or the sum
    of per-user caps) settles most cases; the rest go to the exact LP.
    """
    if set(outer.dim_users) != set(inner.dim_users):
        raise NetworkSpecError("regions index different user sets")
    inner_users, rows, rhs = _system(inner)
    if any(b < 0 for b in rhs):
        return True  # inner region is empty
    index = {u: j for j, u in enumerate(inner_users)}

    cap: dict[User, Fraction] = {}
    for q in inner.inequalities:
        for u in q.users:
            if u in index and (u not in cap or q.rhs < cap[u]):
                cap[u] = q.rhs
    if any(u not in cap for u in inner_users):
        raise NetworkSpecError("inner region is unbounded in some coordinate")

    outer_constraints = list(outer.inequalities)
    for u in sorted(outer.forced_zero - inner.forced_zero):
        outer_constraints.append(LinearInequality(frozenset([u]), Fraction(0)))

    for q in outer_constraints:
        live = frozenset(u for u in q.users if u in index)
        if not live:
            if q.rhs < 0:
                return False
            continue
        cover = min(
            (p.rhs for p in inner.inequalities if live <= p.users),
            default=None,
        )
        cap_sum = sum((cap[u] for u in live), Fraction(0))
        bound = cap_sum if cover is None else min(cover, cap_sum)
        if bound <= q.rhs:
            continue
        objective = [
            Fraction(1) if u in live else Fraction(0) for u in inner_users
        ]
        sup, _ = _lp.simplex_max(objective, rows, rhs)
        if sup > q.rhs:
            return False
    return True


# -- strength-level outer bound ----------------------------------------------


def gdof_outer_bound(net: NetworkSpec) -> PolyRegion:
    """High-SNR limit of the rate outer bound, as an inequality system.

    Only valid when the optimality conditions hold (otherwise the rate bound
    itself is not proven and this refuses).  Each single-cell rate bound
    limits to the top user's direct level; each cyclic rate bound limits to
    the sum of (direct - cross-to-predecessor) differences.  Built directly
    from the bound index set, not from the achievable-region generator.
    """
    report = check_optimality(net)
    if not report.optimality_holds:
        raise ConditionsNotMetError(
            "outer bound is only established when the optimality conditions hold"
        )
    inequalities: list[LinearInequality] = []
    for i in range(1, net.cells + 1):
        for depth in range(1, net.users_per_cell[i - 1] + 1):
            users = frozenset(User(i, s) for s in range(1, depth + 1))
            inequalities.append(LinearInequality(users, net.direct(User(i, depth))))
    if net.cells >= 2:
        for seq in enumerate_cyclic_sequences(range(1, net.cells + 1), min_len=2):
            ranges = [range(1, net.users_per_cell[i - 1] + 1) for i in seq.cells]
            for depths in itertools.product(*ranges):
                users: set = set()
                rhs = Fraction(0)
                for (cell, pred), depth in zip(seq.pairs(), depths):
                    top = User(cell, depth)
                    rhs += net.direct(top) - net.alpha(top, pred)
                    users |= {User(cell, s) for s in range(1, depth + 1)}
                inequalities.append(LinearInequality(frozenset(users), rhs))
    return PolyRegion(net.users, tuple(inequalities), frozenset())


# -- finite-SNR rate bounds, achievable rates, gaps ---------------------------


@dataclass(frozen=True)
class RateBound:
    """An upper bound on the rate sum of a user set, in bits per channel use."""

    users: frozenset
    rhs_bits: float
    kind: str = ""  # "cell" or "cyclic", for reporting


def _require_link_assumption(net: NetworkSpec, fs: FiniteSnrSpec) -> None:
    for (user, rx) in fs.gains:
        if fs.link_power(user, rx) < 1.0 - 1e-12:
            raise NetworkSpecError(
                f"link {user}->rx{rx} has power below the noise floor; "
                "the rate outer bound requires every link at or above it"
            )


def outer_bound_rates(fs: FiniteSnrSpec) -> list[RateBound]:
    """Finite-SNR rate outer bound, one entry per bound index.

    Single-cell bounds: log2(1 + depth * S) with S the top user's direct
    link power.  Cyclic bounds: sum over participating cells of
    (depth - 1) * log2(depth) + log2(1 + (depth_next + depth) * S / C), with
    S / C the direct-to-cross power ratio of the cell's top user toward its
    cyclic predecessor.  Requires the optimality conditions at the
    strength-level network and every link at or above the noise floor.
    """
    net, fs = sort_finite_snr(fs)
    _require_link_assumption(net, fs)
    report = check_optimality(net)
    if not report.optimality_holds:
        raise ConditionsNotMetError(
            "rate outer bound is only established when the optimality conditions hold"
        )
    bounds: list[RateBound] = []
    for i in range(1, net.cells + 1):
        for depth in range(1, net.users_per_cell[i - 1] + 1):
            users = frozenset(User(i, s) for s in range(1, depth + 1))
            s_top = fs.clipped_link_power(User(i, depth), i)
            bounds.append(RateBound(users, math.log2(1 + depth * s_top), "cell"))
    if net.cells >= 2:
        for seq in enumerate_cyclic_sequences(range(1, net.cells + 1), min_len=2):
            m = len(seq)
            ranges = [range(1, net.users_per_cell[i - 1] + 1) for i in seq.cells]
            for depths in itertools.product(*ranges):
                users: set = set()
                total = 0.0
                depth_of = dict(zip(seq.cells, depths))
                for (cell, pred), depth in zip(seq.pairs(), depths):
                    nxt = seq.cells[(seq.cells.index(cell) + 1) % m]
                    top = User(cell, depth)
                    ratio = fs.clipped_link_power(top, cell) / fs.clipped_link_power(top, pred)
                    total += (depth - 1) * math.log2(depth)
                    total += math.log2(1 + (depth_of[nxt] + depth) * ratio)
                    users |= {User(cell, s) for s in range(1, depth + 1)}
                bounds.append(RateBound(frozenset(users), total, "cyclic"))
    return bounds


def achievable_rates(
    fs: FiniteSnrSpec, order: DecodingOrder, alloc: PowerAllocation
) -> dict[User, float]:
    """Per-user rates of successive decoding under power control, in bits.

    The user at decode position ``l`` sees the not-yet-decoded in-cell
    signals and all active other-cell signals as noise.  Users marked off
    get rate zero and appear in no denominator.
    """
    net, fs = sort_finite_snr(fs)
    order.validate(net, order.active_users())
    p = fs.nominal_power

    def power(user: User, rx: int) -> float:
        return p ** float(alloc[user]) * fs.clipped_link_power(user, rx)

    active = [u for u in order.active_users() if not alloc.is_off(u)]
    if set(active) != set(order.active_users()):
        raise NetworkSpecError("decoding order lists a user that the allocation turns off")
    rates: dict[User, float] = {u: 0.0 for u in net.users}
    for k in range(1, net.cells + 1):
        slots = order.slots(k)
        for pos in range(1, len(slots) + 1):
            u = order.user_at(k, pos)
            noise = 1.0
            for ppos in range(1, pos):
                noise += power(order.user_at(k, ppos), k)
            for v in active:
                if v.cell != k:
                    noise += power(v, k)
            rates[u] = math.log2(1 + power(u, k) / noise)
    return rates


@dataclass(frozen=True)
class BoundGap:
    bound: RateBound
    achieved_sum: float
    gap_bits: float


@dataclass(frozen=True)
class GapReport:
    per_bound: tuple[BoundGap, ...]
    max_gap_bits: float
    corners_used: int


def gap_report(fs: FiniteSnrSpec, sample_vertices: int = 16) -> GapReport:
    """Gap between the rate outer bound and rates achieved at region corners.

    Every corner of the fixed-identity-order region is realized through its
    recovered power allocation and evaluated at finite SNR; each bound is
    compared against the best corner for its user set.  All gaps must be
    nonnegative (up to rate tolerance) on instances where the outer bound
    applies.
    """
    bounds = outer_bound_rates(fs)  # also enforces the preconditions
    net, fs_sorted = sort_finite_snr(fs)
    region = polyhedral_region(net, DecodingOrder.identity(net))
    corner_list = vertices(region)[:sample_vertices]
    order = DecodingOrder.identity(net)
    corner_rates = []
    for d in corner_list:
        g = build_potential_graph(net, order, None, d)
        alloc = recover_power_allocation(g)
        corner_rates.append(achievable_rates(fs_sorted, order, alloc))
    per_bound = []
    for bound in bounds:
        achieved = max(
            (sum(r[u] for u in bound.users) for r in corner_rates), default=0.0
        )
        per_bound.append(BoundGap(bound, achieved, bound.rhs_bits - achieved))
    max_gap = max(bg.gap_bits for bg in per_bound)
    return GapReport(tuple(per_bound), max_gap, len(corner_list))
