import math
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import pimac
from tin_gdof.analysis import (
    achievable_gdof,
    achievable_rates,
    gap_report,
    gdof_outer_bound,
    general_membership,
    max_weighted_gdof,
    outer_bound_rates,
    region_includes,
    vertices,
)
from tin_gdof.errors import (
    ConditionsNotMetError,
    EmptyRegionError,
    GuardExceededError,
    NetworkSpecError,
)
from tin_gdof.model import DecodingOrder, FiniteSnrSpec, NetworkSpec, User, enumerate_orders
from tin_gdof.potential import PowerAllocation
from tin_gdof.regions import GdofTuple, membership, polyhedral_region
from tin_gdof.sampling import (
    finite_snr_from_network,
    random_convexity_network,
    random_grid_allocation,
    random_network,
    random_optimality_network,
    random_order,
)


def test_general_membership_zero_tuple(pimac_nonconvex):
    res = general_membership(pimac_nonconvex, GdofTuple.zero(pimac_nonconvex))
    assert res.member
    assert res.witness.subnetwork == frozenset()
    assert res.witness.allocation.off == frozenset(pimac_nonconvex.users)


def test_general_membership_reversed_order_witness(pimac_nonconvex):
    net = pimac_nonconvex
    d = GdofTuple.from_values(net, ["0.2", "0.5", "1.0"])
    res = general_membership(net, d)
    assert res.member
    w = res.witness
    assert w.order.per_cell == ((2, 1), (1,))
    ceil = achievable_gdof(net, w.order, w.allocation)
    assert all(ceil[u] >= d[u] for u in net.users)


def pimac_grid_oracle_reachable(net, d_target, step=0.05, floor=-3.0):
    """Float grid sweep over power exponents and both orders (independent path)."""
    a11_1 = float(net.alpha(User(1, 1), 1))
    a11_2 = float(net.alpha(User(1, 2), 1))
    a12_1 = float(net.alpha(User(1, 1), 2))
    a12_2 = float(net.alpha(User(1, 2), 2))
    a22 = float(net.alpha(User(2, 1), 2))
    a21 = float(net.alpha(User(2, 1), 1))
    grid = np.arange(0.0, floor - step / 2, -step)
    r1, r2, r3 = np.meshgrid(grid, grid, grid, indexing="ij")
    t1, t2, t3 = (float(x) for x in d_target)
    tol = 1e-9

    def clip0(x):
        return np.maximum(x, 0.0)

    cross1 = clip0(r3 + a21)  # interference into cell 1
    cross2 = clip0(np.maximum(r1 + a12_1, r2 + a12_2))  # interference into cell 2
    ok = np.zeros(r1.shape, dtype=bool)
    # ascending order: slot 2 decoded first, slot 1 last
    d11 = clip0(r1 + a11_1 - cross1)
    d12 = clip0(r2 + a11_2 - clip0(np.maximum(r1 + a11_1, cross1 - a21 + a21)))
    d12 = clip0(r2 + a11_2 - np.maximum(clip0(r1 + a11_1), cross1))
    d21 = clip0(r3 + a22 - cross2)
    ok |= (d11 >= t1 - tol) & (d12 >= t2 - tol) & (d21 >= t3 - tol)
    # reversed order: slot 1 decoded first, slot 2 last
    e12 = clip0(r2 + a11_2 - cross1)
    e11 = clip0(r1 + a11_1 - np.maximum(clip0(r2 + a11_2), cross1))
    ok |= (e11 >= t1 - tol) & (e12 >= t2 - tol) & (d21 >= t3 - tol)
    return bool(ok.any())


def test_general_membership_scaled_tuple_not_member(pimac_nonconvex):
    net = pimac_nonconvex
    base = [Fraction(1, 5), Fraction(1, 2), Fraction(1)]
    scaled = [Fraction(13, 10) * v for v in base]
    d = GdofTuple.from_values(net, scaled)
    assert not general_membership(net, d).member
    assert not pimac_grid_oracle_reachable(net, scaled)
    # sanity: the unscaled tuple is reachable on the same grid
    assert pimac_grid_oracle_reachable(net, base)


def test_max_weighted_zero_weights(pimac_nonconvex):
    reg = polyhedral_region(pimac_nonconvex, DecodingOrder.identity(pimac_nonconvex))
    opt = max_weighted_gdof(reg, {u: Fraction(0) for u in pimac_nonconvex.users})
    assert opt.value == 0


def test_max_weighted_single_mac_sum():
    alpha = {(User(1, l), 1): Fraction(l, 2) for l in (1, 2, 3)}
    net = NetworkSpec.from_alpha(1, [3], alpha)
    reg = polyhedral_region(net, DecodingOrder.identity(net))
    opt = max_weighted_gdof(reg, {u: Fraction(1) for u in net.users})
    assert opt.value == Fraction(3, 2)  # the largest direct level


def test_max_weighted_pimac_sum_matches_closed_form(pimac_optimal):
    net = pimac_optimal
    reg = polyhedral_region(net, DecodingOrder.identity(net))
    opt = max_weighted_gdof(reg, {u: Fraction(1) for u in net.users})
    # max over the two cell-1 depths of (direct - cross) plus cell 2's margin
    expected = max(
        Fraction(1) - Fraction(3, 10), Fraction(3, 2) - Fraction(2, 5)
    ) + (Fraction(1) - Fraction(1, 5))
    assert opt.value == expected == Fraction(19, 10)
    assert membership(reg, opt.argmax).member


def test_lp_matches_vertex_maximum_randomized():
    rng = random.Random(31)
    nonempty = 0
    for _ in range(20):
        net = random_network(rng)
        order = random_order(rng, net)
        reg = polyhedral_region(net, order)
        verts = vertices(reg)
        weights = {u: Fraction(rng.randint(0, 8), 4) for u in net.users}
        if not verts:
            with pytest.raises(EmptyRegionError):
                max_weighted_gdof(reg, weights)
            continue
        nonempty += 1
        opt = max_weighted_gdof(reg, weights)
        best = max(
            sum((weights[u] * v[u] for u in net.users), Fraction(0)) for v in verts
        )
        assert opt.value == best
    assert nonempty > 0


def test_vertices_single_user():
    net = NetworkSpec.from_alpha(1, [1], {(User(1, 1), 1): Fraction(1)})
    reg = polyhedral_region(net, DecodingOrder.identity(net))
    verts = vertices(reg)
    assert [v[User(1, 1)] for v in verts] == [Fraction(0), Fraction(1)]


def test_vertices_two_user_mac():
    alpha = {(User(1, 1), 1): Fraction(3, 5), (User(1, 2), 1): Fraction(1)}
    net = NetworkSpec.from_alpha(1, [2], alpha)
    reg = polyhedral_region(net, DecodingOrder.identity(net))
    got = {(v[User(1, 1)], v[User(1, 2)]) for v in vertices(reg)}
    assert got == {
        (Fraction(0), Fraction(0)),
        (Fraction(3, 5), Fraction(0)),
        (Fraction(0), Fraction(1)),
        (Fraction(3, 5), Fraction(2, 5)),
    }


def test_vertices_guard():
    alpha = {}
    for k in range(1, 4):
        for l in (1, 2, 3):
            for i in range(1, 4):
                alpha[(User(k, l), i)] = Fraction(l) if i == k else Fraction(0)
    net = NetworkSpec.from_alpha(3, [3, 3, 3], alpha)
    reg = polyhedral_region(net, DecodingOrder.identity(net))
    with pytest.raises(GuardExceededError):
        vertices(reg)


def test_vertices_respect_membership():
    rng = random.Random(32)
    for _ in range(15):
        net = random_network(rng)
        order = random_order(rng, net)
        reg = polyhedral_region(net, order)
        for v in vertices(reg):
            assert membership(reg, v).member


def region_includes_by_vertices(outer, inner):
    return all(membership(outer, v).member for v in vertices(inner))


def test_region_includes_self(pimac_nonconvex):
    reg = polyhedral_region(pimac_nonconvex, DecodingOrder.identity(pimac_nonconvex))
    assert region_includes(reg, reg)


def test_region_inclusion_by_regime(pimac_optimal, pimac_convex_only, pimac_nonconvex):
    idbar = DecodingOrder(((2, 1), (1,)))
    for net in (pimac_optimal, pimac_convex_only):
        outer = polyhedral_region(net, DecodingOrder.identity(net))
        inner = polyhedral_region(net, idbar)
        assert region_includes(outer, inner)
    outer = polyhedral_region(pimac_nonconvex, DecodingOrder.identity(pimac_nonconvex))
    inner = polyhedral_region(pimac_nonconvex, idbar)
    assert not region_includes(outer, inner)
    assert not region_includes(inner, outer)


def test_region_includes_agrees_with_vertex_method():
    rng = random.Random(33)
    for _ in range(40):
        net = random_network(rng, max_cells=2)
        orders = list(enumerate_orders(net))
        a = polyhedral_region(net, orders[rng.randrange(len(orders))])
        b = polyhedral_region(net, orders[rng.randrange(len(orders))])
        assert region_includes(a, b) == region_includes_by_vertices(a, b)


def test_mac_identity_order_dominates():
    # single cell: any decode order's region sits inside the ascending one
    rng = random.Random(34)
    for _ in range(10):
        net = random_network(rng, cells=1, users_per_cell=[3])
        outer = polyhedral_region(net, DecodingOrder.identity(net))
        for order in enumerate_orders(net):
            assert region_includes(outer, polyhedral_region(net, order))


def test_gdof_outer_bound_matches_region(pimac_optimal):
    outer = gdof_outer_bound(pimac_optimal)
    achievable = polyhedral_region(pimac_optimal, DecodingOrder.identity(pimac_optimal))
    assert outer.same_system(achievable)


def test_gdof_outer_bound_refuses_without_conditions(pimac_nonconvex):
    with pytest.raises(ConditionsNotMetError):
        gdof_outer_bound(pimac_nonconvex)


def test_gdof_outer_bound_zero_cross_is_mac_product():
    net = pimac("0.5", "1.0", "0.7", "0", "0", "0")
    outer = gdof_outer_bound(net)
    by_set = {q.users: q.rhs for q in outer.inequalities}
    # the cyclic bound degenerates to the sum of single-cell bounds
    u11, u12, u21 = User(1, 1), User(1, 2), User(2, 1)
    assert by_set[frozenset([u11, u21])] == Fraction(1, 2) + Fraction(7, 10)
    assert by_set[frozenset([u11, u12, u21])] == Fraction(1) + Fraction(7, 10)


def single_link_fs(p, level):
    return FiniteSnrSpec(
        p, {(User(1, 1), 1): complex(math.sqrt(p**level))}, {User(1, 1): 1.0}
    )


def test_outer_bound_rates_single_link():
    bounds = outer_bound_rates(single_link_fs(100.0, 1.0))
    assert len(bounds) == 1
    assert bounds[0].rhs_bits == pytest.approx(math.log2(101.0), abs=1e-9)


def test_outer_bound_rates_two_cell_formula():
    # one user per cell, symmetric levels
    p = 100.0
    direct, cross = 1.0, 0.25
    gains = {}
    for k in (1, 2):
        gains[(User(k, 1), k)] = complex(math.sqrt(p**direct))
        gains[(User(k, 1), 3 - k)] = complex(math.sqrt(p**cross))
    fs = FiniteSnrSpec(p, gains, {User(1, 1): 1.0, User(2, 1): 1.0})
    bounds = outer_bound_rates(fs)
    cyclic = [b for b in bounds if b.kind == "cyclic"]
    assert len(cyclic) == 1
    expected = 2 * math.log2(1 + 2 * p ** (direct - cross))
    assert cyclic[0].rhs_bits == pytest.approx(expected, abs=1e-9)


def test_outer_bound_rates_requires_conditions(pimac_nonconvex):
    fs = finite_snr_from_network(pimac_nonconvex, 100.0)
    with pytest.raises(ConditionsNotMetError):
        outer_bound_rates(fs)


def test_outer_bound_rates_requires_links_above_noise():
    fs = FiniteSnrSpec(
        100.0, {(User(1, 1), 1): complex(0.01)}, {User(1, 1): 1.0}
    )
    with pytest.raises(NetworkSpecError, match="noise floor"):
        outer_bound_rates(fs)


def test_achievable_rates_single_user_full_power():
    fs = single_link_fs(100.0, 1.0)
    order = DecodingOrder(((1,),))
    alloc = PowerAllocation({User(1, 1): Fraction(0)}, frozenset())
    rates = achievable_rates(fs, order, alloc)
    assert rates[User(1, 1)] == pytest.approx(math.log2(101.0), abs=1e-9)


def test_achievable_rates_off_user_excluded(pimac_optimal):
    fs = finite_snr_from_network(pimac_optimal, 100.0)
    order = DecodingOrder(((1,), (1,)))  # cell-1 slot 2 inactive
    alloc = PowerAllocation(
        {User(1, 1): Fraction(0), User(2, 1): Fraction(0)}, frozenset({User(1, 2)})
    )
    rates = achievable_rates(fs, order, alloc)
    assert rates[User(1, 2)] == 0.0
    p = 100.0
    denom = 1 + p ** float(pimac_optimal.alpha(User(1, 1), 2))
    assert rates[User(2, 1)] == pytest.approx(
        math.log2(1 + p**1.0 / denom), abs=1e-9
    )


def test_gap_report_nonnegative_and_shrinking(pimac_optimal):
    ratios = []
    for p in (1e2, 1e4, 1e6):
        fs = finite_snr_from_network(pimac_optimal, p)
        rep = gap_report(fs, sample_vertices=16)
        assert all(bg.gap_bits >= -1e-9 for bg in rep.per_bound)
        ratios.append(rep.max_gap_bits / math.log2(p))
    assert ratios[0] > ratios[1] > ratios[2]


def test_achievability_sweep_small():
    rng = random.Random(35)
    for _ in range(60):
        net = random_network(rng)
        order = random_order(rng, net)
        alloc = random_grid_allocation(rng, net)
        d = GdofTuple(achievable_gdof(net, order, alloc))
        res = general_membership(net, d)
        assert res.member
        w = res.witness
        ceil = achievable_gdof(net, w.order, w.allocation)
        assert all(ceil[u] >= d[u] for u in net.users)


def test_convexity_inclusion_small():
    rng = random.Random(36)
    for _ in range(5):
        net = random_convexity_network(rng)
        full = polyhedral_region(net, DecodingOrder.identity(net))
        for s_bits in range(2 ** len(net.users)):
            s = frozenset(
                u for i, u in enumerate(net.users) if s_bits >> i & 1
            )
            for order in enumerate_orders(net, s):
                assert region_includes(full, polyhedral_region(net, order, s))


def test_convexity_inclusion_by_vertices_small():
    # same statement, decided through explicit vertex enumeration
    rng = random.Random(38)
    for _ in range(3):
        net = random_convexity_network(rng, max_cells=2)
        full = polyhedral_region(net, DecodingOrder.identity(net))
        for s_bits in range(2 ** len(net.users)):
            s = frozenset(u for i, u in enumerate(net.users) if s_bits >> i & 1)
            for order in enumerate_orders(net, s):
                inner = polyhedral_region(net, order, s)
                for v in vertices(inner):
                    assert membership(full, v).member


def test_zero_interference_cyclic_bounds_split():
    # without cross links, each multi-cell rate bound equals the sum of its
    # per-cell bounds plus bounded additive constants
    net = pimac("0.5", "1.0", "0.7", "0", "0", "0")
    fs = finite_snr_from_network(net, 100.0)
    bounds = outer_bound_rates(fs)
    cell = {(b.users): b.rhs_bits for b in bounds if b.kind == "cell"}
    u11, u12, u21 = User(1, 1), User(1, 2), User(2, 1)
    for b in bounds:
        if b.kind != "cyclic":
            continue
        cell1_users = frozenset(u for u in b.users if u.cell == 1)
        cell2_users = frozenset(u for u in b.users if u.cell == 2)
        split = cell[cell1_users] + cell[cell2_users]
        l1, l2 = len(cell1_users), len(cell2_users)
        const = sum(
            (l - 1) * math.log2(l) + math.log2((l_next + l + 1) / l)
            for l, l_next in ((l1, l2), (l2, l1))
        )
        assert split - 1e-9 <= b.rhs_bits <= split + const + 1e-9


def test_zero_interference_gap_within_mac_slack():
    # level-zero cross links still sit exactly at the noise floor, so each
    # other-cell user can cost up to one unit of noise power on top of the
    # single-cell decoding slack
    net = pimac("0.5", "1.0", "0.7", "0", "0", "0")
    fs = finite_snr_from_network(net, 100.0)
    rep = gap_report(fs, sample_vertices=16)
    for bg in rep.per_bound:
        if bg.bound.kind != "cell":
            continue
        depth = len(bg.bound.users)
        cell = next(iter(bg.bound.users)).cell
        n_other = sum(1 for u in net.users if u.cell != cell)
        slack = (
            math.log2(depth + 1)
            + (depth - 1) * math.log2(depth)
            + math.log2(1 + n_other)
        )
        assert -1e-9 <= bg.gap_bits <= slack + 1e-9


def test_rates_converge_to_gdof_ceiling():
    # per-user rates divided by log2(P) approach the exact GDoF evaluator
    rng = random.Random(39)
    p = 1e9
    for _ in range(10):
        net = random_network(rng, max_cells=2)
        order = random_order(rng, net)
        alloc = random_grid_allocation(rng, net)
        fs = finite_snr_from_network(net, p)
        rates = achievable_rates(fs, order, alloc)
        ceil = achievable_gdof(net, order, alloc)
        for u in net.users:
            assert rates[u] / math.log2(p) == pytest.approx(float(ceil[u]), abs=0.02)


def test_rate_bounds_converge_to_gdof_outer_bound(pimac_optimal):
    p = 1e9
    fs = finite_snr_from_network(pimac_optimal, p)
    bounds = outer_bound_rates(fs)
    outer = gdof_outer_bound(pimac_optimal)
    exact = {}
    for q in outer.inequalities:
        exact[q.users] = min(exact.get(q.users, q.rhs), q.rhs)
    seen = set()
    for b in bounds:
        limit = b.rhs_bits / math.log2(p)
        assert limit == pytest.approx(float(exact[b.users]), abs=0.02) or limit > float(
            exact[b.users]
        )
        if abs(limit - float(exact[b.users])) < 0.02:
            seen.add(b.users)
    assert seen == set(exact)  # every exact bound is attained by some rate bound


def test_outer_bound_equality_under_conditions():
    rng = random.Random(37)
    for _ in range(10):
        net = random_optimality_network(rng)
        region = polyhedral_region(net, DecodingOrder.identity(net))
        outer = gdof_outer_bound(net)
        for _ in range(10):
            weights = {u: Fraction(rng.randint(0, 8), 4) for u in net.users}
            assert max_weighted_gdof(region, weights).value == max_weighted_gdof(
                outer, weights
            ).value
