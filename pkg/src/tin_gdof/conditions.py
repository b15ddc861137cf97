"""Sufficient conditions on strength levels: region convexity and optimality.

Two pairs of conditions are evaluated exactly:

* convexity pair: (a) each cell's stronger users keep their in-cell edge
  even after deferring to the worst cross link they cause; (b) the classic
  cross-cell condition applied to every single-user-per-cell subnetwork.
  Together they make the achievable union a single polytope (the ascending
  decode order dominates).
* optimality pair: strictly stronger versions of both; under them the
  fixed-order region is the full GDoF region and the finite-SNR bound holds.

These are sufficient conditions only; nothing here decides convexity or
optimality as such.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import TopologyError
from .model import NetworkSpec, User


class ConditionKind(Enum):
    MAC_ORDER_CONVEXITY = "mac-order-convexity"
    CROSS_CELL_CONVEXITY = "cross-cell-convexity"
    MAC_ORDER_OPTIMALITY = "mac-order-optimality"
    CROSS_CELL_OPTIMALITY = "cross-cell-optimality"


@dataclass(frozen=True)
class Violation:
    condition: ConditionKind
    #: (i, j, k, l, l'); entries not applicable to the condition are None
    indices: tuple
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class ConditionReport:
    convexity_holds: bool
    optimality_holds: bool
    violations: tuple[Violation, ...]


def _mac_order_violations(net: NetworkSpec, optimality: bool) -> list[Violation]:
    """Per-cell conditions comparing a stronger user l against a weaker l' < l."""
    kind = (
        ConditionKind.MAC_ORDER_OPTIMALITY if optimality else ConditionKind.MAC_ORDER_CONVEXITY
    )
    out = []
    for i in range(1, net.cells + 1):
        n_i = net.users_per_cell[i - 1]
        for l_prime, l in itertools.combinations(range(1, n_i + 1), 2):
            strong, weak = User(i, l), User(i, l_prime)
            lhs = net.direct(strong)
            best_j, best = None, None
            for j in range(1, net.cells + 1):
                if j == i:
                    continue
                if optimality:
                    term = min(
                        net.alpha(strong, j),
                        2 * net.alpha(strong, j) - net.alpha(weak, j),
                    )
                else:
                    term = net.alpha(strong, j) - net.alpha(weak, j)
                if best is None or term > best:
                    best_j, best = j, term
            if best is None:
                continue  # single cell: nothing to compare against
            rhs = net.direct(weak) + best
            if lhs < rhs:
                out.append(Violation(kind, (i, best_j, None, l, l_prime), lhs, rhs))
    return out


def _cross_cell_violations(net: NetworkSpec, optimality: bool) -> list[Violation]:
    """Per-user conditions against interference caused plus interference received."""
    kind = (
        ConditionKind.CROSS_CELL_OPTIMALITY if optimality else ConditionKind.CROSS_CELL_CONVEXITY
    )
    out = []
    for i in range(1, net.cells + 1):
        for l in range(1, net.users_per_cell[i - 1] + 1):
            u = User(i, l)
            lhs = net.direct(u)
            worst = None  # (value, j, k, l_k)
            for j in range(1, net.cells + 1):
                if j == i:
                    continue
                caused = net.alpha(u, j)
                for k in range(1, net.cells + 1):
                    if k == i:
                        continue
                    for l_k in range(1, net.users_per_cell[k - 1] + 1):
                        v = User(k, l_k)
                        received = net.alpha(v, i)
                        if optimality:
                            term = caused + received
                        else:
                            relief = net.alpha(v, j) if k != j else Fraction(0)
                            term = caused + received - relief
                        if worst is None or term > worst[0]:
                            worst = (term, j, k, l_k)
            if worst is None:
                continue
            rhs, j, k, l_k = worst
            if lhs < rhs:
                out.append(Violation(kind, (i, j, k, l, l_k), lhs, rhs))
    return out


def evaluate_conditions(net: NetworkSpec) -> ConditionReport:
    """Evaluate both condition pairs; all comparisons exact and non-strict."""
    conv = _mac_order_violations(net, False) + _cross_cell_violations(net, False)
    opt = _mac_order_violations(net, True) + _cross_cell_violations(net, True)
    report = ConditionReport(not conv, not opt, tuple(conv + opt))
    assert not (report.optimality_holds and not report.convexity_holds), (
        "the optimality conditions imply the convexity conditions"
    )
    return report


def check_convexity(net: NetworkSpec) -> ConditionReport:
    """Convexity sufficient conditions (the optimality pair is also reported)."""
    return evaluate_conditions(net)


def check_optimality(net: NetworkSpec) -> ConditionReport:
    """Optimality sufficient conditions (the convexity pair is also reported)."""
    return evaluate_conditions(net)


# -- user partition used by the rate outer bound ------------------------------


@dataclass(frozen=True)
class UserPartition:
    double_primed: frozenset  # slots whose direct level the attenuated top user clears
    primed: frozenset


def outer_bound_user_partition(net: NetworkSpec, i: int, j: int, l_i: int) -> UserPartition:
    """Split slots 1..l_i of cell i by the attenuated top-user level toward cell j.

    A slot s < l_i is double-primed when the top user's direct level minus
    its cross level toward cell j still reaches slot s's direct level.  When
    the optimality conditions hold, the primed slots (top user excluded)
    satisfy the chain inequality the outer-bound derivation relies on; this
    is asserted here.
    """
    if i == j:
        raise TopologyError("partition needs two distinct cells")
    top = User(i, l_i)
    margin = net.direct(top) - net.alpha(top, j)
    double_primed = frozenset(
        s for s in range(1, l_i) if margin >= net.direct(User(i, s))
    )
    primed = frozenset(range(1, l_i + 1)) - double_primed
    if check_optimality(net).optimality_holds:
        chain = sorted(primed - {l_i})
        for s_prime, l_prime in itertools.combinations(chain, 2):
            s_u, l_u = User(i, s_prime), User(i, l_prime)
            assert margin >= net.direct(s_u) - net.alpha(s_u, j) + net.alpha(l_u, j), (
                f"partition chain inequality failed for cell {i} slots "
                f"({s_prime},{l_prime}) toward cell {j}"
            )
    return UserPartition(double_primed, primed)


# -- two-cell three-user regime classification --------------------------------


class PimacRegimeLabel(Enum):
    A_O_PRIME = "optimality-first-branch"
    A_O_DOUBLEPRIME_ONLY = "optimality-second-branch-only"
    A_P_MINUS_A_O = "convex-only"
    A_MINUS_A_P = "in-box-not-convex"
    OUTSIDE_A = "outside-box"


@dataclass(frozen=True)
class PimacRegime:
    label: PimacRegimeLabel
    #: cross-level caps (a_1, a_2) = min(direct of the other cell's user,
    #: direct of this user) - cross level received by cell 1
    box_bounds: tuple[Fraction, Fraction]


def classify_pimac(net: NetworkSpec) -> PimacRegime:
    """Classify a 2-cell network (two users + one user) by its cross levels.

    With directs and the interference received by the two-user cell fixed,
    the cross levels caused by the two-user cell select one of four regimes:
    both optimality branches, the first branch, convex-only, or in-box but
    not convex; levels outside the admissible box fall outside all of them.
    Boundary equalities count as inside.
    """
    if net.cells != 2 or net.users_per_cell != (2, 1):
        raise TopologyError(
            f"classifier needs 2 cells with (2, 1) users, got {net.users_per_cell}"
        )
    u11, u12, u21 = User(1, 1), User(1, 2), User(2, 1)
    a11_1, a11_2 = net.direct(u11), net.direct(u12)
    a22 = net.direct(u21)
    cross_received = net.alpha(u21, 1)
    cross_1 = net.alpha(u11, 2)
    cross_2 = net.alpha(u12, 2)

    box = (min(a22, a11_1) - cross_received, min(a22, a11_2) - cross_received)
    if not (0 <= cross_1 <= box[0] and 0 <= cross_2 <= box[1]):
        return PimacRegime(PimacRegimeLabel.OUTSIDE_A, box)

    gap = a11_2 - a11_1
    first_branch = gap >= cross_2
    second_branch = gap >= 2 * cross_2 - cross_1
    convex = gap >= cross_2 - cross_1
    if first_branch:
        label = PimacRegimeLabel.A_O_PRIME
    elif second_branch:
        label = PimacRegimeLabel.A_O_DOUBLEPRIME_ONLY
    elif convex:
        label = PimacRegimeLabel.A_P_MINUS_A_O
    else:
        label = PimacRegimeLabel.A_MINUS_A_P
    return PimacRegime(label, box)
