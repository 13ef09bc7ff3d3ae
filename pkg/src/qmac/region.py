"""Capacity-region geometry: constraint sets, corners, membership, mixtures,
prior sweeps.

The region for a fixed prior is the set of nonnegative rate tuples whose
subset sums stay below the conditional mutual informations; its upper
extremal points (corners) are the successive-decoding rate tuples, one per
decoding order.  Corners are computed by chain-rule entropy differences,
exact and LP-free; an independent route recovers them from suffix
differences of the bounds for cross-checking.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import entropy as ent
from .channel import (CqMacChannel, Prior, channel_state, mask_members,
                      normalize_subset, subset_mask)
from .config import DEFAULT_MAX_GRID_POINTS, DEFAULT_MAX_PERM_SENDERS, CapExceeded
from .entropy import SubsystemSelector, subsystem_entropy
from .operators import ValidationError

MEMBER_TOL = 1e-9
CORNER_DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class RatePoint:
    """A candidate rate tuple, bits per channel use, componentwise >= 0."""

    rates: tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        if any(r < 0 for r in rates):
            raise ValidationError(f"rates must be nonnegative, got {rates}")
        object.__setattr__(self, "rates", rates)

    @property
    def s(self) -> int:
        return len(self.rates)

    def subset_sum(self, members: Iterable[int]) -> float:
        return sum(self.rates[i] for i in set(members))


@dataclass(frozen=True)
class RateConstraintSet:
    """The 2^s - 1 subset-sum bounds of one (channel, prior) pair."""

    s: int
    bounds: dict[int, float]

    def __post_init__(self):
        expected = set(range(1, 1 << self.s))
        if set(self.bounds) != expected:
            raise ValidationError(
                f"bounds must cover every nonempty subset mask of {self.s} senders"
            )
        if any(v < 0 for v in self.bounds.values()):
            raise ValidationError("bounds must be nonnegative")

    def bound(self, members: Iterable[int]) -> float:
        return self.bounds[subset_mask(normalize_subset(members, self.s))]


@dataclass(frozen=True)
class MixtureSpec:
    """Convex combination of priors for the mixture outer bound."""

    components: tuple[tuple[float, Prior], ...]

    def __post_init__(self):
        if not self.components:
            raise ValidationError("mixture needs at least one component")
        weights = [float(w) for w, _ in self.components]
        if any(w < 0 for w in weights):
            raise ValidationError("mixture weights must be nonnegative")
        if abs(sum(weights) - 1.0) > 1e-10:
            raise ValidationError(f"mixture weights sum to {sum(weights):.12g}, expected 1")


def _entropy_table(ch: CqMacChannel, prior: Prior) -> dict[tuple[int, bool], float]:
    """H over every (label subset mask, include-quantum) selector of the channel state."""
    e = channel_state(ch, prior)
    table: dict[tuple[int, bool], float] = {(0, False): 0.0}
    for mask in range(1 << ch.s):
        members = [i for i in range(ch.s) if mask >> i & 1]
        for quantum in (False, True):
            if not members and not quantum:
                continue
            table[(mask, quantum)] = subsystem_entropy(
                e, SubsystemSelector.of(members, quantum)
            )
    return table


def _clamp_mi(value: float, context: str) -> float:
    if value < -ent.MI_CLAMP:
        raise ValidationError(f"{context}: mutual information {value!r} below -1e-9")
    return max(value, 0.0)


def constraint_set(ch: CqMacChannel, prior: Prior) -> RateConstraintSet:
    """All bounds I(X(J) ^ Y | X(Jc)) of the channel state, in bits."""
    e = channel_state(ch, prior)
    bounds = {
        subset_mask(j): ent.mutual_information(e, j)
        for j in (mask_members(m) for m in range(1, 1 << ch.s))
    }
    return RateConstraintSet(ch.s, bounds)


def _check_perm(perm: Sequence[int], s: int) -> tuple[int, ...]:
    perm = tuple(int(i) for i in perm)
    if sorted(perm) != list(range(s)):
        raise ValidationError(f"{perm} is not a permutation of 0..{s - 1}")
    return perm


def _corner_from_table(table: dict[tuple[int, bool], float], perm: tuple[int, ...],
                       s: int) -> RatePoint:
    """Successive-decoding rates in decode order `perm` from an entropy table.

    Stage i decodes sender perm[i] against the joint of the output and the
    already-decoded senders: R = H(X_k) + H(X_A, Y) - H(X_A + k, Y).
    """
    rates = [0.0] * s
    decoded_mask = 0
    for k in perm:
        h_k = table[(1 << k, False)]
        h_ay = table[(decoded_mask, True)]
        h_aky = table[(decoded_mask | 1 << k, True)]
        rates[k] = _clamp_mi(h_k + h_ay - h_aky, f"corner stage for sender {k}")
        decoded_mask |= 1 << k
    return RatePoint(tuple(rates))


def corner(ch: CqMacChannel, prior: Prior, perm: Sequence[int]) -> RatePoint:
    """Rate tuple achieved by successive decoding in the given sender order.

    The rates telescope: their total equals the full-set bound.
    """
    perm = _check_perm(perm, ch.s)
    return _corner_from_table(_entropy_table(ch, prior), perm, ch.s)


def corner_table(ch: CqMacChannel, prior: Prior,
                 max_senders: int = DEFAULT_MAX_PERM_SENDERS) -> dict[tuple[int, ...], RatePoint]:
    """Corner for every decoding order, computed off one shared entropy table."""
    if ch.s > max_senders:
        raise CapExceeded(
            f"corner enumeration needs {math.factorial(ch.s)} permutations for s={ch.s}, "
            f"configured cap is s<={max_senders}"
        )
    table = _entropy_table(ch, prior)
    return {
        perm: _corner_from_table(table, perm, ch.s)
        for perm in itertools.permutations(range(ch.s))
    }


def _dedup_points(pairs: Iterable[tuple[tuple[int, ...], RatePoint]],
                  tol: float = CORNER_DEDUP_TOL) -> list[tuple[tuple[int, ...], RatePoint]]:
    kept: list[tuple[tuple[int, ...], RatePoint]] = []
    for perm, point in pairs:
        if not any(
            max(abs(a - b) for a, b in zip(point.rates, q.rates)) <= tol for _, q in kept
        ):
            kept.append((perm, point))
    return kept


def all_corners(ch: CqMacChannel, prior: Prior,
                max_senders: int = DEFAULT_MAX_PERM_SENDERS) -> list[RatePoint]:
    """Distinct corners (within 1e-9), ordered by first achieving permutation."""
    pairs = sorted(corner_table(ch, prior, max_senders).items())
    return [point for _, point in _dedup_points(pairs)]


def corners_with_perms(ch: CqMacChannel, prior: Prior,
                       max_senders: int = DEFAULT_MAX_PERM_SENDERS
                       ) -> list[tuple[tuple[int, ...], RatePoint]]:
    """Like all_corners but keeps the first permutation achieving each point."""
    pairs = sorted(corner_table(ch, prior, max_senders).items())
    return _dedup_points(pairs)


def corner_from_bounds(cs: RateConstraintSet, perm: Sequence[int]) -> RatePoint:
    """Cross-check route: corners as suffix differences of the bounds.

    With decode order perm, the tight constraints form the chain of decode
    suffixes, so R_{perm[i]} = bound(suffix from i) - bound(suffix from i+1).
    """
    perm = _check_perm(perm, cs.s)
    rates = [0.0] * cs.s
    suffix_mask = 0
    for k in reversed(perm):
        prev = cs.bounds[suffix_mask] if suffix_mask else 0.0
        suffix_mask |= 1 << k
        rates[k] = _clamp_mi(cs.bounds[suffix_mask] - prev, f"bound difference for sender {k}")
    return RatePoint(tuple(rates))


def is_member(point: RatePoint, cs: RateConstraintSet, tol: float = MEMBER_TOL) -> bool:
    """True iff every subset sum respects its bound within tol (ties count in)."""
    if point.s != cs.s:
        raise ValidationError(f"point has {point.s} rates, constraint set has {cs.s}")
    return all(
        point.subset_sum(mask_members(mask)) <= bound + tol
        for mask, bound in cs.bounds.items()
    )


def mixture_constraints(ch: CqMacChannel, mix: MixtureSpec,
                        max_components: int | None = None) -> RateConstraintSet:
    """Weighted average of the component constraint sets (mixture outer bound).

    The default component cap is s, enough for any single-receiver region;
    pass a larger max_components to lift it.
    """
    cap = ch.s if max_components is None else int(max_components)
    if len(mix.components) > cap:
        raise ValidationError(
            f"mixture has {len(mix.components)} components, cap is {cap} "
            "(pass max_components to allow more)"
        )
    bounds = {mask: 0.0 for mask in range(1, 1 << ch.s)}
    for weight, prior in mix.components:
        if weight == 0.0:
            continue
        cs = constraint_set(ch, prior)
        for mask in bounds:
            bounds[mask] += weight * cs.bounds[mask]
    return RateConstraintSet(ch.s, bounds)


# ---------------------------------------------------------------------------
# prior sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    prior_id: int
    prior: Prior
    constraints: RateConstraintSet
    corners: tuple[tuple[tuple[int, ...], RatePoint], ...]


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    """All tuples of `parts` nonnegative integers summing to `total`, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def grid_priors(alphabet_sizes: Sequence[int], resolution: int,
                max_points: int = DEFAULT_MAX_GRID_POINTS) -> list[Prior]:
    """Product priors whose per-sender probabilities are numerators over `resolution`.

    Deterministic lexicographic enumeration; the grid refines as resolution
    grows, and any coarser grid's priors reappear in every multiple of it.
    """
    k = int(resolution)
    if k < 1:
        raise ValidationError(f"grid resolution must be >= 1, got {resolution}")
    count = 1
    for a in alphabet_sizes:
        count *= math.comb(k + a - 1, a - 1)
    if count > max_points:
        raise CapExceeded(
            f"grid would contain {count} priors, configured cap is {max_points}"
        )
    per_sender = [
        [np.array(c, dtype=float) / k for c in _compositions(k, a)]
        for a in alphabet_sizes
    ]
    return [Prior(tuple(vs)) for vs in itertools.product(*per_sender)]


def boundary_sweep(ch: CqMacChannel, resolution: int,
                   max_points: int = DEFAULT_MAX_GRID_POINTS,
                   max_senders: int = DEFAULT_MAX_PERM_SENDERS) -> list[SweepPoint]:
    """Constraint sets and corners over the deterministic prior grid.

    The convex hull of all emitted corners plus the origin under-approximates
    the capacity region and grows monotonically under grid refinement.
    """
    out = []
    for idx, prior in enumerate(grid_priors(ch.sender_alphabets, resolution, max_points)):
        cs = constraint_set(ch, prior)
        corners = tuple(corners_with_perms(ch, prior, max_senders))
        out.append(SweepPoint(idx, prior, cs, corners))
    return out


# ---------------------------------------------------------------------------
# two-sender hull helpers
# ---------------------------------------------------------------------------

def upper_boundary_2d(points: Iterable[RatePoint]) -> list[RatePoint]:
    """Vertices of the Pareto part of the convex hull of two-sender rate points.

    The region being described is the downward-closed convex hull of the
    points and the origin; the returned vertices are sorted by increasing
    first rate and decreasing second rate.
    """
    pts = sorted({(p.rates[0], p.rates[1]) for p in points})
    if not pts:
        return []
    if any(len(p) != 2 for p in pts):
        raise ValidationError("upper_boundary_2d expects two-sender points")
    # upper-left anchor and lower-right anchor close the region along the axes
    x_max = max(x for x, _ in pts)
    y_max = max(y for _, y in pts)
    candidates = sorted(set(pts) | {(0.0, y_max), (x_max, 0.0)})
    hull: list[tuple[float, float]] = []
    for p in candidates:  # monotone chain, upper hull
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= -1e-15:
                hull.pop()
            else:
                break
        hull.append(p)
    pareto = [
        (x, y) for x, y in hull
        if not any(x2 >= x - 1e-15 and y2 >= y - 1e-15 and (x2, y2) != (x, y) for x2, y2 in hull)
    ]
    return [RatePoint(p) for p in pareto] if pareto else [RatePoint(hull[0])]


def hull_member_2d(point: RatePoint, vertices: Sequence[RatePoint],
                   tol: float = MEMBER_TOL) -> bool:
    """Membership of a point in the downward-closed convex hull of 2-D vertices."""
    if point.s != 2:
        raise ValidationError("hull_member_2d expects a two-sender point")
    pts = sorted({(v.rates[0], v.rates[1]) for v in vertices})
    x_max = max(x for x, _ in pts)
    y_max = max(y for _, y in pts)
    x, y = point.rates
    if x > x_max + tol or y > y_max + tol:
        return False
    boundary = [(0.0, y_max)] + pts + [(x_max, 0.0)]
    # point is inside iff it lies under every supporting segment of the envelope
    envelope = []
    for p in sorted(set(boundary)):
        while len(envelope) >= 2:
            (x1, y1), (x2, y2) = envelope[-2], envelope[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= -1e-15:
                envelope.pop()
            else:
                break
        envelope.append(p)
    for (x1, y1), (x2, y2) in zip(envelope, envelope[1:]):
        if x1 - tol <= x <= x2 + tol:
            if x2 - x1 < 1e-15:
                limit = max(y1, y2)
            else:
                limit = y1 + (y2 - y1) * (x - x1) / (x2 - x1)
            if y <= limit + tol:
                return True
    return False
