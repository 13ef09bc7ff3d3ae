import itertools

import numpy as np
import pytest

from qmac.catalog import load_builtin_channel
from qmac.channel import Prior, validate_channel
from qmac.checks import random_channel, random_diagonal_channel, random_prior
from qmac.config import CapExceeded
from qmac.operators import ValidationError
from qmac.region import (MixtureSpec, RateConstraintSet, RatePoint,
                         all_corners, boundary_sweep, constraint_set, corner,
                         corner_from_bounds, corner_table, grid_priors,
                         hull_member_2d, is_member, mixture_constraints,
                         upper_boundary_2d)

from oracles import classical_bound, classical_corner, classical_joint

TWO_STATE_CHI = 0.6008760366928562


def adder():
    return load_builtin_channel("adder-classical")


def adder_joint(vecs=((0.5, 0.5), (0.5, 0.5))):
    cond = {(a, b): [0.0, 0.0, 0.0] for a in range(2) for b in range(2)}
    for a in range(2):
        for b in range(2):
            cond[(a, b)][a + b] = 1.0
    return classical_joint([np.asarray(v) for v in vecs], cond)


def diagonal_joint(ch, prior):
    cond = {letters: np.diag(ch.state(letters)).real for letters in ch.joint_letters()}
    return classical_joint(list(prior.per_sender), cond)


# --- constraint sets ------------------------------------------------------------

def test_adder_constraint_set():
    cs = constraint_set(adder(), Prior.uniform((2, 2)))
    assert abs(cs.bounds[1] - 1.0) < 1e-9
    assert abs(cs.bounds[2] - 1.0) < 1e-9
    assert abs(cs.bounds[3] - 1.5) < 1e-9


def test_constant_channel_all_bounds_zero():
    states = {k: np.eye(2) / 2 for k in itertools.product(range(2), range(2))}
    ch = validate_channel((2, 2), 2, states)
    cs = constraint_set(ch, Prior.uniform((2, 2)))
    assert all(abs(b) < 1e-12 for b in cs.bounds.values())


def test_single_sender_holevo_bound():
    ch = load_builtin_channel("holevo-two-state")
    cs = constraint_set(ch, Prior.uniform((2,)))
    assert abs(cs.bounds[1] - TWO_STATE_CHI) < 1e-9


def test_constraint_set_validation():
    with pytest.raises(ValidationError):
        RateConstraintSet(2, {1: 1.0, 2: 1.0})  # missing full-set bound
    with pytest.raises(ValidationError):
        RateConstraintSet(1, {1: -0.5})


# --- corners ---------------------------------------------------------------------

def test_adder_corners_both_orders():
    ch = adder()
    p = Prior.uniform((2, 2))
    assert np.allclose(corner(ch, p, (0, 1)).rates, (0.5, 1.0), atol=1e-9)
    assert np.allclose(corner(ch, p, (1, 0)).rates, (1.0, 0.5), atol=1e-9)
    points = all_corners(ch, p)
    assert len(points) == 2
    assert np.allclose(points[0].rates, (0.5, 1.0), atol=1e-9)
    assert np.allclose(points[1].rates, (1.0, 0.5), atol=1e-9)


def test_corner_matches_classical_oracle():
    joint = adder_joint()
    want_01 = classical_corner(joint, (0, 1))
    want_10 = classical_corner(joint, (1, 0))
    ch = adder()
    p = Prior.uniform((2, 2))
    assert np.allclose(corner(ch, p, (0, 1)).rates, want_01, atol=1e-9)
    assert np.allclose(corner(ch, p, (1, 0)).rates, want_10, atol=1e-9)


def test_single_sender_corner_is_the_bound():
    ch = load_builtin_channel("holevo-two-state")
    p = Prior.uniform((2,))
    cs = constraint_set(ch, p)
    assert abs(corner(ch, p, (0,)).rates[0] - cs.bounds[1]) < 1e-12


def test_corner_rejects_bad_permutation():
    with pytest.raises(ValidationError):
        corner(adder(), Prior.uniform((2, 2)), (0, 0))


def test_corners_collapse_when_one_sender_is_silent():
    # channel depends only on sender 1: sender 2's rate is pinned at zero
    states = {(x1, x2): np.diag([1.0 - x1, float(x1)]).astype(complex)
              for x1 in range(2) for x2 in range(2)}
    ch = validate_channel((2, 2), 2, states)
    points = all_corners(ch, Prior.uniform((2, 2)))
    assert len(points) == 1
    assert np.allclose(points[0].rates, (1.0, 0.0), atol=1e-9)


def test_telescoping_and_membership_random():
    rng = np.random.default_rng(41)
    for _ in range(30):
        ch = random_channel(rng)
        prior = random_prior(rng, ch)
        cs = constraint_set(ch, prior)
        full = (1 << ch.s) - 1
        for perm, point in corner_table(ch, prior).items():
            assert abs(sum(point.rates) - cs.bounds[full]) <= 1e-9
            assert is_member(point, cs, 1e-9)
            alt = corner_from_bounds(cs, perm)
            assert max(abs(a - b) for a, b in zip(point.rates, alt.rates)) <= 1e-9


def test_corner_cap():
    rng = np.random.default_rng(42)
    ch = random_channel(rng, max_senders=2)
    with pytest.raises(CapExceeded):
        corner_table(ch, random_prior(rng, ch), max_senders=ch.s - 1)


# --- membership --------------------------------------------------------------------

def test_membership_examples():
    cs = constraint_set(adder(), Prior.uniform((2, 2)))
    assert is_member(RatePoint((0.0, 0.0)), cs)
    assert not is_member(RatePoint((1.0, 1.0)), cs)  # sum 2.0 > 1.5
    assert is_member(RatePoint((0.5, 1.0)), cs, 1e-9)


def test_rate_point_validation():
    with pytest.raises(ValidationError):
        RatePoint((0.5, -0.1))


# --- quasi-classical reduction -------------------------------------------------------

def test_diagonal_channels_match_classical_oracle():
    rng = np.random.default_rng(43)
    for _ in range(25):
        ch = random_diagonal_channel(rng)
        prior = random_prior(rng, ch)
        cs = constraint_set(ch, prior)
        joint = diagonal_joint(ch, prior)
        for mask in cs.bounds:
            members = [i for i in range(ch.s) if mask >> i & 1]
            assert abs(cs.bounds[mask] - classical_bound(joint, members)) <= 1e-9


# --- mixtures -------------------------------------------------------------------------

def test_mixture_single_component_identity():
    ch = adder()
    p = Prior.uniform((2, 2))
    cs = constraint_set(ch, p)
    mixed = mixture_constraints(ch, MixtureSpec(((1.0, p),)))
    for mask in cs.bounds:
        assert abs(mixed.bounds[mask] - cs.bounds[mask]) < 1e-12


def test_mixture_identical_components_degenerate():
    ch = adder()
    p = Prior.uniform((2, 2))
    cs = constraint_set(ch, p)
    mixed = mixture_constraints(ch, MixtureSpec(((0.5, p), (0.5, p))))
    for mask in cs.bounds:
        assert abs(mixed.bounds[mask] - cs.bounds[mask]) < 1e-12


def test_mixture_is_arithmetic_mean():
    ch = adder()
    uniform = Prior.uniform((2, 2))
    point = Prior.point_mass((2, 2), (0, 0))
    cs_u = constraint_set(ch, uniform)
    cs_p = constraint_set(ch, point)
    joint_u = adder_joint()
    joint_p = adder_joint(((1.0, 0.0), (1.0, 0.0)))
    mixed = mixture_constraints(ch, MixtureSpec(((0.5, uniform), (0.5, point))))
    for mask in mixed.bounds:
        members = [i for i in range(2) if mask >> i & 1]
        want = 0.5 * classical_bound(joint_u, members) + 0.5 * classical_bound(joint_p, members)
        assert abs(mixed.bounds[mask] - want) <= 1e-9
        assert abs(mixed.bounds[mask] - 0.5 * (cs_u.bounds[mask] + cs_p.bounds[mask])) <= 1e-12


def test_mixture_weight_validation():
    p = Prior.uniform((2, 2))
    with pytest.raises(ValidationError):
        MixtureSpec(((0.5, p), (0.3, p)))


def test_mixture_component_cap():
    ch = adder()
    p = Prior.uniform((2, 2))
    with pytest.raises(ValidationError, match="components"):
        mixture_constraints(ch, MixtureSpec(((0.4, p), (0.3, p), (0.3, p))))
    mixture_constraints(ch, MixtureSpec(((0.4, p), (0.3, p), (0.3, p))),
                        max_components=3)


# --- sweeps ----------------------------------------------------------------------------

def test_grid_priors_resolution_one():
    priors = grid_priors((2,), 1)
    vecs = [tuple(p.per_sender[0]) for p in priors]
    assert vecs == [(0.0, 1.0), (1.0, 0.0)]


def test_sweep_single_uniform_grid_point():
    # resolution 2 on a binary sender contains the uniform prior
    ch = load_builtin_channel("holevo-two-state")
    sweep = boundary_sweep(ch, 2)
    mids = [sp for sp in sweep if abs(sp.prior.per_sender[0][0] - 0.5) < 1e-12]
    assert len(mids) == 1
    assert abs(mids[0].constraints.bounds[1] - TWO_STATE_CHI) < 1e-9


def test_sweep_refinement_nests():
    ch = load_builtin_channel("qubit-pure-mac")
    coarse = boundary_sweep(ch, 2)
    fine = boundary_sweep(ch, 4)
    fine_points = [point for sp in fine for _, point in sp.corners]
    hull = upper_boundary_2d(fine_points)
    for sp in coarse:
        for _, point in sp.corners:
            assert hull_member_2d(point, hull, tol=1e-9)


def test_sweep_grid_too_large():
    ch = adder()
    with pytest.raises(CapExceeded):
        boundary_sweep(ch, 4, max_points=10)


def test_single_sender_two_state_sweep_maximizer():
    # brute-force scan: chi(p) peaks at the uniform prior for this pair
    ch = load_builtin_channel("holevo-two-state")
    sweep = boundary_sweep(ch, 64)
    best = max(sweep, key=lambda sp: sp.constraints.bounds[1])
    assert abs(best.prior.per_sender[0][0] - 0.5) < 1e-12
    assert abs(best.constraints.bounds[1] - TWO_STATE_CHI) < 1e-9


def test_upper_boundary_2d_adder():
    points = [point for sp in boundary_sweep(adder(), 2) for _, point in sp.corners]
    hull = upper_boundary_2d(points)
    coords = [p.rates for p in hull]
    assert (0.5, 1.0) in [(round(a, 9), round(b, 9)) for a, b in coords]
    assert (1.0, 0.5) in [(round(a, 9), round(b, 9)) for a, b in coords]
    assert hull_member_2d(RatePoint((0.75, 0.75)), hull)
    assert not hull_member_2d(RatePoint((1.0, 1.0)), hull)
