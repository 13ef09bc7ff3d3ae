"""Information quantities of labeled classical-quantum ensembles.

Subsystem entropies are computed by the block formula
H = H_Shannon(label marginal) + sum_l p(l) S(state_l), with an independent
dense-matrix oracle (expand, partial-trace, diagonalize) for verification.
Mutual informations are evaluated through two different entropy identities
and must agree; disagreement means the numerics are broken and raises.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import operators as ops
from .channel import CqEnsemble, make_ensemble, normalize_subset, subset_mask
from .operators import ValidationError, shannon_bits

MI_FORM_TOL = 1e-9      # the two mutual-information forms must agree this tightly
MI_CLAMP = 1e-9         # raw values in [-MI_CLAMP, 0) are reported as 0


@dataclass(frozen=True)
class SubsystemSelector:
    """Names a commuting block of an ensemble: some label factors, optionally
    the quantum part.  Overlapping selectors are rejected where disjointness
    matters; there is no silent coercion."""

    classical: frozenset[int]
    quantum: bool

    @staticmethod
    def of(classical: Iterable[int] = (), quantum: bool = False) -> "SubsystemSelector":
        return SubsystemSelector(frozenset(int(i) for i in classical), bool(quantum))

    @property
    def is_empty(self) -> bool:
        return not self.classical and not self.quantum

    def key(self) -> str:
        """Serialization key: bitmask of label factors, '+Y' when quantum included."""
        mask = subset_mask(self.classical)
        if self.quantum:
            return f"{mask}+Y" if mask else "Y"
        return str(mask)

    def union(self, other: "SubsystemSelector") -> "SubsystemSelector":
        return SubsystemSelector(self.classical | other.classical, self.quantum or other.quantum)

    def disjoint(self, other: "SubsystemSelector") -> bool:
        if self.classical & other.classical:
            return False
        return not (self.quantum and other.quantum)

    def validate(self, e: CqEnsemble) -> None:
        arity = len(e.label_spaces)
        if any(i < 0 or i >= arity for i in self.classical):
            raise ValidationError(
                f"selector names label factors {sorted(self.classical)}, ensemble has {arity}"
            )
        if self.is_empty:
            raise ValidationError("empty selector: no classical part and no quantum part")


def restrict(e: CqEnsemble, sel: SubsystemSelector) -> CqEnsemble:
    """Marginal ensemble on the selected block.

    Labels outside the selector are summed out (atoms merged, states
    probability-averaged); the quantum part is traced away when not selected,
    leaving trivial one-dimensional states.
    """
    sel.validate(e)
    kept = sorted(sel.classical)
    groups: dict[tuple[int, ...], list] = {}
    for label, p, rho in e.atoms:
        key = tuple(label[i] for i in kept)
        entry = groups.get(key)
        if entry is None:
            groups[key] = [p, p * rho if sel.quantum else None]
        else:
            entry[0] += p
            if sel.quantum:
                entry[1] = entry[1] + p * rho
    spaces = tuple(e.label_spaces[i] for i in kept)
    if sel.quantum:
        atoms = ((k, p, ops.hermitize(acc / p)) for k, (p, acc) in groups.items())
        return make_ensemble(spaces, e.quantum_dim, atoms)
    one = np.eye(1, dtype=complex)
    return make_ensemble(spaces, 1, ((k, p, one) for k, (p, _) in groups.items()))


def subsystem_entropy(e: CqEnsemble, sel: SubsystemSelector) -> float:
    """Entropy in bits of the ensemble restricted to the selected block."""
    r = restrict(e, sel)
    probs = r.probabilities()
    h = shannon_bits(probs)
    if r.quantum_dim > 1:
        h += sum(p * ops.entropy_bits(rho) for _, p, rho in r.atoms)
    return h


def subsystem_entropy_dense(e: CqEnsemble, sel: SubsystemSelector,
                            cap: int | None = None) -> float:
    """Same quantity by the dense oracle: expand the whole ensemble to its
    block-diagonal matrix, partial-trace to the selector, diagonalize."""
    sel.validate(e)
    gamma = e.dense_matrix(cap)
    dims = list(e.label_spaces) + [e.quantum_dim]
    keep = sorted(sel.classical) + ([len(e.label_spaces)] if sel.quantum else [])
    sigma = ops.partial_trace(gamma, dims, keep)
    return ops.entropy_bits(sigma)


def conditional_entropy(e: CqEnsemble, b: SubsystemSelector, c: SubsystemSelector) -> float:
    """H(B|C) = H(BC) - H(C); an empty conditioner C contributes zero."""
    if not b.disjoint(c):
        raise ValidationError("conditional entropy needs disjoint selectors")
    if c.is_empty:
        return subsystem_entropy(e, b)
    return subsystem_entropy(e, b.union(c)) - subsystem_entropy(e, c)


def average_conditional_entropy(e: CqEnsemble, conditioner: Iterable[int]) -> float:
    """H(quantum | selected labels) as the probability-weighted average of the
    conditional states' entropies (valid because the conditioner is classical)."""
    sel = SubsystemSelector.of(conditioner, quantum=True)
    r = restrict(e, sel)
    return sum(p * ops.entropy_bits(rho) for _, p, rho in r.atoms)


def _mutual_information_forms(e: CqEnsemble, members: frozenset[int]) -> tuple[float, float]:
    """I(labels in J ^ quantum | labels outside J) by two identities.

    Form A: difference of averaged conditional output entropies,
    H(Y | X(Jc)) - H(Y | X(all)).  Form B: subsystem-entropy combination
    H(X(J)) + H(X(Jc) Y) - H(X(all) Y).
    """
    arity = len(e.label_spaces)
    comp = frozenset(range(arity)) - members
    form_a = average_conditional_entropy(e, comp) - average_conditional_entropy(e, range(arity))
    h_j = subsystem_entropy(e, SubsystemSelector.of(members))
    h_rest = subsystem_entropy(e, SubsystemSelector.of(comp, quantum=True))
    h_all = subsystem_entropy(e, SubsystemSelector.of(range(arity), quantum=True))
    form_b = h_j + h_rest - h_all
    return form_a, form_b


def mutual_information(e: CqEnsemble, members: Iterable[int]) -> float:
    """I(X(J) ^ Y | X(Jc)) in bits for label-factor subset J.

    Computed via two independent identities which must agree within 1e-9;
    values in [-1e-9, 0) are clamped to 0 so downstream region geometry
    stays clean, more negative values raise (they would contradict strong
    subadditivity and indicate broken numerics).
    """
    sub = normalize_subset(members, len(e.label_spaces))
    form_a, form_b = _mutual_information_forms(e, sub)
    if abs(form_a - form_b) > MI_FORM_TOL:
        raise ValidationError(
            f"mutual information forms disagree for J={sorted(sub)}: "
            f"{form_a!r} vs {form_b!r}"
        )
    if form_b < -MI_CLAMP:
        raise ValidationError(
            f"conditional mutual information {form_b!r} below -1e-9 for J={sorted(sub)}"
        )
    return max(form_b, 0.0)


def conditional_channel_entropy(states, q) -> float:
    """Average output entropy sum_a q(a) S(V_a) in bits.

    `states` may be a sequence of density matrices or a mapping from letters
    to density matrices (aligned with q over sorted keys).
    """
    if isinstance(states, Mapping):
        keys = sorted(states)
        mats = [states[k] for k in keys]
        if isinstance(q, Mapping):
            q = [q[k] for k in keys]
    else:
        mats = list(states)
    q = np.asarray(q, dtype=float).ravel()
    if q.size != len(mats):
        raise ValidationError(f"{len(mats)} states but {q.size} probabilities")
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-10:
        raise ValidationError("q is not a probability vector")
    return float(sum(p * ops.entropy_bits(m) for p, m in zip(q, mats) if p > 0))


def check_subadditivity(v1: Sequence[np.ndarray], v2: Sequence[np.ndarray], q) -> float:
    """Slack I(A1 A2 ^ Z1 Z2) - I(A1 ^ Z1) - I(A2 ^ Z2) in bits.

    Built on the joint ensemble that pairs letter (a1, a2) with the product
    state V1_a1 (x) V2_a2 under the joint distribution q.  The slack is
    always <= 0 up to numerics (mutual information is subadditive across
    independent channels); callers assert `slack <= 1e-9`.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape != (len(v1), len(v2)):
        raise ValidationError(
            f"q must have shape ({len(v1)}, {len(v2)}), got {q.shape}"
        )
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-10:
        raise ValidationError("q is not a probability distribution")
    d1 = np.asarray(v1[0]).shape[0]
    d2 = np.asarray(v2[0]).shape[0]
    joint = make_ensemble(
        (len(v1), len(v2)), d1 * d2,
        (((a1, a2), q[a1, a2], ops.tensor(v1[a1], v2[a2]))
         for a1 in range(len(v1)) for a2 in range(len(v2))),
    )
    e1 = make_ensemble((len(v1),), d1,
                       (((a1,), q[a1].sum(), np.asarray(v1[a1], dtype=complex))
                        for a1 in range(len(v1))))
    e2 = make_ensemble((len(v2),), d2,
                       (((a2,), q[:, a2].sum(), np.asarray(v2[a2], dtype=complex))
                        for a2 in range(len(v2))))
    i_joint = mutual_information(joint, (0, 1))
    i_1 = mutual_information(e1, (0,))
    i_2 = mutual_information(e2, (0,))
    return i_joint - i_1 - i_2


def fano_bound_check(e: CqEnsemble, x_povm, y_povm) -> tuple[float, float]:
    """Both sides of the error-probability entropy bound.

    `x_povm` is a diagonal POVM over the joint labels: an array of shape
    (k, num_labels), entries in [0, 1], columns summing to 1.  `y_povm` is a
    POVM on the quantum part with the same number of outcomes.  Returns
    (H(labels | quantum), 1 + P_e * log2(num_labels)); the bound asserts
    lhs <= rhs up to 1e-9.
    """
    x = np.asarray(x_povm, dtype=float)
    n_labels = e.num_labels
    if x.ndim != 2 or x.shape[1] != n_labels:
        raise ValidationError(f"x_povm must have shape (k, {n_labels}), got {x.shape}")
    if np.any(x < -1e-10) or np.any(x > 1 + 1e-10):
        raise ValidationError("x_povm entries must lie in [0, 1]")
    if np.max(np.abs(x.sum(axis=0) - 1.0)) > 1e-8:
        raise ValidationError("x_povm columns must sum to 1")
    y_elements = [np.asarray(m, dtype=complex) for m in getattr(y_povm, "matrices", None) or y_povm]
    if len(y_elements) != x.shape[0]:
        raise ValidationError(
            f"POVMs must share an index set: {x.shape[0]} vs {len(y_elements)} outcomes"
        )
    ops.check_povm(y_elements, e.quantum_dim, name="y_povm")

    correct = 0.0
    for label, p, rho in e.atoms:
        idx = e.label_index(label)
        for j, y in enumerate(y_elements):
            xj = x[j, idx]
            if xj > 0:
                correct += p * xj * float(np.trace(rho @ y).real)
    p_err = 1.0 - correct
    arity = range(len(e.label_spaces))
    lhs = conditional_entropy(
        e, SubsystemSelector.of(arity), SubsystemSelector.of((), quantum=True)
    )
    rhs = 1.0 + p_err * np.log2(n_labels) if n_labels > 1 else 1.0
    return lhs, float(rhs)


@dataclass(frozen=True)
class InfoReport:
    """Entropies and conditional mutual informations of one ensemble."""

    entropies: dict[str, float]
    conditional_mi: dict[str, float]
    conditional_mi_raw: dict[str, float]

    def to_json_dict(self) -> dict:
        return {
            "H": dict(sorted(self.entropies.items())),
            "I_cond": dict(sorted(self.conditional_mi.items())),
            "I_cond_raw": dict(sorted(self.conditional_mi_raw.items())),
        }


def info_report(e: CqEnsemble) -> InfoReport:
    """All subsystem entropies and all I(X(J) ^ Y | X(Jc)) of an ensemble."""
    arity = len(e.label_spaces)
    entropies: dict[str, float] = {}
    for mask in range(1 << arity):
        members = [i for i in range(arity) if mask >> i & 1]
        for quantum in (False, True):
            if not members and not quantum:
                continue
            sel = SubsystemSelector.of(members, quantum)
            entropies[sel.key()] = subsystem_entropy(e, sel)
    cond: dict[str, float] = {}
    raw: dict[str, float] = {}
    for mask in range(1, 1 << arity):
        members = frozenset(i for i in range(arity) if mask >> i & 1)
        form_a, form_b = _mutual_information_forms(e, members)
        if abs(form_a - form_b) > MI_FORM_TOL or form_b < -MI_CLAMP:
            raise ValidationError(f"inconsistent mutual information for mask {mask}")
        raw[str(mask)] = form_b
        cond[str(mask)] = max(form_b, 0.0)
    return InfoReport(entropies, cond, raw)
