"""Exact desk-scale simulation of random-codebook sequential decoding.

Senders draw i.i.d. codebooks from their priors.  The receiver decodes one
sender at a time: stage i applies a square-root (pretty-good) measurement
over that sender's candidate word states, conditioned on the words decoded
at earlier stages, implemented gently as rho -> sqrt(D) rho sqrt(D) so later
stages still see an almost undisturbed signal.  Everything here is computed
exactly (operator chains, no sampling noise), so Monte Carlo enters only in
the choice of message tuples.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from . import operators as ops
from .channel import (ATOM_FLOOR, CqEnsemble, CqMacChannel, Prior,
                      block_channel, make_ensemble, reduced_channel)
from .config import DEFAULT_MAX_MESSAGES, CapExceeded
from .operators import ValidationError

SQRT_CONSISTENCY_TOL = 1e-9   # sqrt elements must square back to the POVM
BRANCH_FLOOR = 1e-15          # measurement branches below this probability are dropped
X_SPECTRUM_TOL = 1e-8         # allowed spectral overshoot for 0 <= X <= 1 checks


# ---------------------------------------------------------------------------
# codebooks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Codebook:
    """One sender's block code: a list of n-letter words (duplicates allowed)."""

    sender: int
    n: int
    words: tuple[tuple[int, ...], ...]
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"block length must be >= 1, got {self.n}")
        words = tuple(tuple(int(x) for x in w) for w in self.words)
        if not words:
            raise ValidationError("codebook must contain at least one word")
        for w in words:
            if len(w) != self.n:
                raise ValidationError(f"word {w} has length {len(w)}, expected {self.n}")
            if any(x < 0 for x in w):
                raise ValidationError(f"word {w} has negative letters")
        object.__setattr__(self, "words", words)

    @property
    def size(self) -> int:
        return len(self.words)


def sample_codebook(prior_vec, n: int, size: int, seed: int,
                    sender: int = 0) -> Codebook:
    """Draw `size` words of `n` i.i.d. letters from the sender's prior.

    Deterministic for a fixed seed; duplicate words are kept, as in the
    random coding ensemble.
    """
    p = np.asarray(prior_vec, dtype=float).ravel()
    if size < 1 or n < 1:
        raise ValidationError("codebook size and block length must be >= 1")
    rng = np.random.default_rng(seed)
    letters = rng.choice(p.size, size=(size, n), p=p)
    return Codebook(sender, n, tuple(tuple(int(x) for x in row) for row in letters),
                    seed=int(seed))


def derive_seeds(master_seed: int, count: int) -> list[int]:
    """Fixed splitting rule: one 64-bit master seed to `count` child seeds."""
    state = np.random.SeedSequence(int(master_seed)).generate_state(count, dtype=np.uint64)
    return [int(x) for x in state]


def codebooks_from_seed(ch: CqMacChannel, prior: Prior, n: int,
                        sizes: Sequence[int], master_seed: int) -> list[Codebook]:
    if len(sizes) != ch.s:
        raise ValidationError(f"expected {ch.s} codebook sizes, got {len(sizes)}")
    seeds = derive_seeds(master_seed, ch.s + 1)[: ch.s]
    return [
        sample_codebook(prior.per_sender[i], n, int(sizes[i]), seeds[i], sender=i)
        for i in range(ch.s)
    ]


def sizes_from_rates(rates: Sequence[float], n: int, delta: float = 0.0) -> list[int]:
    """Codebook sizes ceil(2^{n (R_i - delta)}), floored at one word."""
    return [max(1, int(np.ceil(2.0 ** (n * (float(r) - delta))))) for r in rates]


def word_index(word: Sequence[int], alphabet: int) -> int:
    """Mixed-radix index of a word (first letter most significant)."""
    idx = 0
    for x in word:
        idx = idx * alphabet + int(x)
    return idx


def index_word(idx: int, alphabet: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        out.append(idx % alphabet)
        idx //= alphabet
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# POVMs and gentle instruments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Povm:
    """Labeled decoding observable: PSD elements summing to the identity."""

    dim: int
    elements: tuple[tuple[Hashable, np.ndarray], ...]

    def __post_init__(self):
        ops.check_povm([m for _, m in self.elements], self.dim)
        labels = [lab for lab, _ in self.elements]
        if len(set(labels)) != len(labels):
            raise ValidationError("POVM outcome labels must be unique")

    @property
    def matrices(self) -> list[np.ndarray]:
        return [m for _, m in self.elements]

    def element(self, label: Hashable) -> np.ndarray:
        for lab, m in self.elements:
            if lab == label:
                return m
        raise ValidationError(f"POVM has no outcome {label!r}")


@dataclass(frozen=True)
class TenderInstrument:
    """A POVM implemented as the branch map rho -> sqrt(D_b) rho sqrt(D_b)."""

    povm: Povm
    sqrt_elements: tuple[tuple[Hashable, np.ndarray], ...]

    def __post_init__(self):
        if len(self.sqrt_elements) != len(self.povm.elements):
            raise ValidationError("sqrt_elements must match the POVM elements")
        for (lab, root), (lab2, elem) in zip(self.sqrt_elements, self.povm.elements):
            if lab != lab2:
                raise ValidationError("sqrt_elements labels must match the POVM")
            dev = float(np.max(np.abs(root @ root - elem)))
            if dev > SQRT_CONSISTENCY_TOL:
                raise ValidationError(
                    f"sqrt element {lab!r} squared deviates from the POVM by {dev:.3e}"
                )

    @classmethod
    def from_povm(cls, povm: Povm) -> "TenderInstrument":
        roots = tuple((lab, ops.op_sqrt(m)) for lab, m in povm.elements)
        return cls(povm, roots)

    def sqrt_element(self, label: Hashable) -> np.ndarray:
        for lab, root in self.sqrt_elements:
            if lab == label:
                return root
        raise ValidationError(f"instrument has no outcome {label!r}")


FAIL = None  # outcome label of the PGM's residual (off-support) element

# eigendirections below this fraction of the leading eigenvalue of the
# average state cannot be inverted stably in double precision; they count
# as off-support and feed the residual outcome
PGM_SUPPORT_RTOL = 1e-6


def pgm_decoder(states: Sequence[tuple[Hashable, np.ndarray]],
                weights: Sequence[float] | None = None) -> Povm:
    """Square-root measurement of a weighted state family.

    With S the weighted average, each element is S^{-1/2} w_c rho_c S^{-1/2}
    on the (numerically resolvable) support of S; whatever identity mass
    lies off the support becomes a residual outcome labeled FAIL (present
    only when nonzero).
    """
    if not len(states):
        raise ValidationError("pretty-good measurement needs at least one state")
    labels = [lab for lab, _ in states]
    mats = [ops.check_density(m, name=f"PGM state {lab!r}") for lab, m in states]
    dim = mats[0].shape[0]
    if any(m.shape[0] != dim for m in mats):
        raise ValidationError("PGM states must share one dimension")
    if weights is None:
        w = np.full(len(mats), 1.0 / len(mats))
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.size != len(mats) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValidationError("weights must be a probability vector over the states")
    avg = ops.hermitize(sum(wi * m for wi, m in zip(w, mats)))
    inv_root, support = ops.pinv_sqrt(avg, support_rtol=PGM_SUPPORT_RTOL)
    elements = [
        (lab, ops.hermitize(inv_root @ (wi * m) @ inv_root))
        for lab, wi, m in zip(labels, w, mats)
    ]
    residual = ops.hermitize(np.eye(dim) - support)
    if float(np.max(np.abs(residual))) > 1e-10:
        elements.append((FAIL, residual))
    return Povm(dim, tuple(elements))


def tender_apply(inst: TenderInstrument,
                 rho: np.ndarray) -> list[tuple[Hashable, float, np.ndarray]]:
    """All measurement branches (outcome, probability, normalized post-state).

    Branch probabilities are Tr(rho D_b) and sum to 1; branches below 1e-15
    are dropped.
    """
    rho = ops.check_density(rho)
    if rho.shape[0] != inst.povm.dim:
        raise ValidationError(
            f"state dimension {rho.shape[0]} does not match POVM dimension {inst.povm.dim}"
        )
    out = []
    for (lab, elem), (_, root) in zip(inst.povm.elements, inst.sqrt_elements):
        p = float(np.trace(rho @ elem).real)
        if p <= BRANCH_FLOOR:
            continue
        post = ops.hermitize(root @ rho @ root) / p
        out.append((lab, p, post))
    return out


def disturbance_check(rho: np.ndarray, x: np.ndarray,
                      epsilon: float | None = None) -> tuple[float, float, float]:
    """Both sides of the gentle-measurement bound for a single operator.

    For 0 <= X <= 1 with success probability Tr(rho X) >= 1 - eps, the state
    after the sqrt(X).sqrt(X) branch is close to the original:
    ||rho - sqrt(X) rho sqrt(X)||_1 <= sqrt(8 eps).  Returns (eps, lhs, bound).
    """
    rho = ops.check_density(rho)
    w, v = ops.eig_hermitian(x)
    if w[0] < -X_SPECTRUM_TOL or w[-1] > 1.0 + X_SPECTRUM_TOL:
        raise ValidationError(
            f"operator spectrum [{w[0]:.3e}, {w[-1]:.3e}] is not within [0, 1]"
        )
    w = np.clip(w, 0.0, 1.0)
    actual = max(0.0, 1.0 - float(np.trace(rho @ ((v * w) @ v.conj().T)).real))
    eps = actual if epsilon is None else float(epsilon)
    if actual > eps + 1e-12:
        raise ValidationError(f"1 - Tr(rho X) = {actual:.6g} exceeds the claimed epsilon {eps:.6g}")
    if eps >= 1.0:
        raise ValidationError(f"epsilon must be < 1, got {eps:.6g}")
    root = ops.hermitize((v * np.sqrt(w)) @ v.conj().T)
    lhs = ops.trace_norm(rho - root @ rho @ root)
    return eps, lhs, float(np.sqrt(8.0 * eps))


@dataclass(frozen=True)
class TenderCheck:
    """Per-state and averaged disturbance of implementing a POVM gently."""

    per_state: tuple[tuple[Hashable, float, float, float], ...]  # (label, eps, dist, bound)
    eps_bar: float
    avg_disturbance: float
    avg_bound: float


def tender_bound_check(states: Sequence[tuple[Hashable, np.ndarray]],
                       inst: TenderInstrument,
                       assign: Mapping[Hashable, Hashable] | None = None,
                       weights: Sequence[float] | None = None) -> TenderCheck:
    """Disturbance of each labeled state under the instrument vs its bound.

    For state a assigned to outcome b = assign[a], the exact deviation of the
    branch map output (with its classical outcome register) from the ideal
    b (x) rho_a is ||rho_a - sqrt(D_b) rho_a sqrt(D_b)||_1 plus the leaked
    probability sum_{b' != b} Tr(rho_a D_b'); it obeys sqrt(8 eps_a) + eps_a
    with eps_a = 1 - Tr(rho_a D_b), and on average sqrt(8 eps) + eps with the
    averaged eps.
    """
    if weights is None:
        wvec = np.full(len(states), 1.0 / len(states))
    else:
        wvec = np.asarray(weights, dtype=float).ravel()
        if wvec.size != len(states) or np.any(wvec < 0) or abs(wvec.sum() - 1.0) > 1e-10:
            raise ValidationError("weights must be a probability vector over the states")
    rows = []
    eps_bar = 0.0
    avg_dist = 0.0
    for (a, rho), w in zip(states, wvec):
        rho = ops.check_density(rho, name=f"state {a!r}")
        b = assign[a] if assign is not None else a
        root = inst.sqrt_element(b)
        eps = max(0.0, 1.0 - float(np.trace(rho @ inst.povm.element(b)).real))
        leak = sum(
            float(np.trace(rho @ elem).real)
            for lab, elem in inst.povm.elements if lab != b
        )
        dist = ops.trace_norm(rho - root @ rho @ root) + leak
        bound = float(np.sqrt(8.0 * eps) + eps)
        rows.append((a, eps, dist, bound))
        eps_bar += w * eps
        avg_dist += w * dist
    avg_bound = float(np.sqrt(8.0 * eps_bar) + eps_bar)
    return TenderCheck(tuple(rows), eps_bar, avg_dist, avg_bound)


# ---------------------------------------------------------------------------
# averaged word states
# ---------------------------------------------------------------------------

def averaged_word_state(ch: CqMacChannel, sender: int, word: Sequence[int],
                        prior: Prior, mode: str = "ensemble",
                        codebooks: Mapping[int, Codebook] | None = None,
                        max_block_dim: int | None = None,
                        max_atoms: int = DEFAULT_MAX_MESSAGES) -> CqEnsemble:
    """Effective channel state seen when decoding one sender's word.

    Senders before `sender` (already decoded) remain as classical labels,
    senders after it are averaged out.  In "empirical" mode both happen over
    the supplied codebooks with uniform word weights; in "ensemble" mode over
    the product priors, which factorizes into per-letter averages.  Labels
    are the earlier senders' words, encoded as mixed-radix integers.

    With codebooks that enumerate the full alphabet at the prior's weights,
    the two modes coincide.
    """
    i = int(sender)
    if i < 0 or i >= ch.s:
        raise ValidationError(f"sender {i} out of range for {ch.s} senders")
    word = tuple(int(x) for x in word)
    n = len(word)
    if any(x < 0 or x >= ch.sender_alphabets[i] for x in word):
        raise ValidationError(f"word {word} outside alphabet of sender {i}")
    block = block_channel(ch, n, max_block_dim)
    dim = block.output_dim
    before = list(range(i))
    after = list(range(i + 1, ch.s))
    spaces = tuple(ch.sender_alphabets[j] ** n for j in before)

    if mode == "empirical":
        if codebooks is None or any(j not in codebooks for j in before + after):
            raise ValidationError("empirical mode needs a codebook for every other sender")
        for j in before + after:
            if codebooks[j].n != n:
                raise ValidationError(f"codebook for sender {j} has block length "
                                      f"{codebooks[j].n}, expected {n}")
        label_combos = list(itertools.product(*(codebooks[j].words for j in before)))
        if len(set(label_combos)) > max_atoms:
            raise CapExceeded(
                f"empirical word state would hold {len(set(label_combos))} atoms, cap is {max_atoms}"
            )
        after_combos = list(itertools.product(*(codebooks[j].words for j in after)))
        acc: dict[tuple[tuple[int, ...], ...], np.ndarray] = {}
        counts: dict[tuple[tuple[int, ...], ...], int] = {}
        for combo in label_combos:
            counts[combo] = counts.get(combo, 0) + 1
            if combo not in acc:
                total = np.zeros((dim, dim), dtype=complex)
                for rest in after_combos:
                    words = list(combo) + [word] + list(rest)
                    total += block.state_for_words(words)
                acc[combo] = total / len(after_combos)
        n_combos = len(label_combos)
        atoms = (
            (tuple(word_index(w, ch.sender_alphabets[j]) for j, w in zip(before, combo)),
             counts[combo] / n_combos,
             ops.hermitize(acc[combo]))
            for combo in acc
        )
        return make_ensemble(spaces, dim, atoms)

    if mode != "ensemble":
        raise ValidationError(f"mode must be 'ensemble' or 'empirical', got {mode!r}")
    if int(np.prod(spaces)) > max_atoms:
        raise CapExceeded(
            f"ensemble word state would hold {int(np.prod(spaces))} atoms, cap is {max_atoms}"
        )
    reduced = reduced_channel(ch, prior, before + [i]) if after else None
    atoms = []
    for combo in itertools.product(
            *(itertools.product(range(ch.sender_alphabets[j]), repeat=n) for j in before)):
        p = 1.0
        for j, w in zip(before, combo):
            for x in w:
                p *= float(prior.per_sender[j][x])
        if p < ATOM_FLOOR:
            continue
        per_letter = []
        for k in range(n):
            letters = tuple(w[k] for w in combo) + (word[k],)
            if after:
                per_letter.append(reduced[letters])
            else:
                per_letter.append(ch.state(letters))
        label = tuple(word_index(w, ch.sender_alphabets[j]) for j, w in zip(before, combo))
        atoms.append((label, p, ops.tensor_all(per_letter)))
    return make_ensemble(spaces, dim, atoms)


# ---------------------------------------------------------------------------
# sequential decoding
# ---------------------------------------------------------------------------

class SequentialDecoder:
    """Stage-by-stage pretty-good measurements for fixed codebooks.

    Stage i distinguishes sender i's codewords on the n-block output,
    conditioned on the words decoded at earlier stages; senders not yet
    decoded are averaged over their priors, so the stage-i decoder does not
    depend on their codebooks.  Instruments are cached per (stage, prefix).
    """

    def __init__(self, ch: CqMacChannel, codebooks: Sequence[Codebook], prior: Prior,
                 max_block_dim: int | None = None):
        if len(codebooks) != ch.s:
            raise ValidationError(f"expected {ch.s} codebooks, got {len(codebooks)}")
        ns = {cb.n for cb in codebooks}
        if len(ns) != 1:
            raise ValidationError(f"codebooks disagree on block length: {sorted(ns)}")
        for i, cb in enumerate(codebooks):
            for w in cb.words:
                if any(x >= ch.sender_alphabets[i] for x in w):
                    raise ValidationError(
                        f"codebook for sender {i} contains letters outside its alphabet"
                    )
        self.channel = ch
        self.codebooks = tuple(codebooks)
        self.prior = prior
        self.n = codebooks[0].n
        self.block = block_channel(ch, self.n, max_block_dim)
        # letter table for stage i: senders 0..i explicit, senders > i averaged
        self._stage_tables = [
            reduced_channel(ch, prior, range(i + 1)) for i in range(ch.s)
        ]
        self._cache: dict[tuple[int, tuple[tuple[int, ...], ...]], TenderInstrument] = {}

    def stage_states(self, stage: int,
                     prefix_words: Sequence[Sequence[int]]) -> list[tuple[int, np.ndarray]]:
        """Candidate states for each message of `stage`, given decoded prefix words."""
        table = self._stage_tables[stage]
        out = []
        for m, word in enumerate(self.codebooks[stage].words):
            per_letter = (
                table[tuple(w[k] for w in prefix_words) + (word[k],)]
                for k in range(self.n)
            )
            out.append((m, ops.tensor_all(per_letter)))
        return out

    def stage_instrument(self, stage: int,
                         prefix_words: Sequence[Sequence[int]]) -> TenderInstrument:
        if stage < 0 or stage >= self.channel.s:
            raise ValidationError(f"stage {stage} out of range")
        if len(prefix_words) != stage:
            raise ValidationError(f"stage {stage} needs {stage} prefix words")
        key = (stage, tuple(tuple(int(x) for x in w) for w in prefix_words))
        inst = self._cache.get(key)
        if inst is None:
            povm = pgm_decoder(self.stage_states(stage, key[1]))
            inst = TenderInstrument.from_povm(povm)
            self._cache[key] = inst
        return inst


def sequential_decode_exact(ch: CqMacChannel, codebooks: Sequence[Codebook], prior: Prior,
                            messages: Sequence[int],
                            decoder: SequentialDecoder | None = None,
                            max_block_dim: int | None = None
                            ) -> tuple[float, list[float]]:
    """Exact success probability of decoding every sender's message.

    Runs the operator chain: start from the transmitted word state, and for
    each stage conjugate by the square root of the correct outcome's POVM
    element (conditioned on the true prefix, which is what the all-correct
    branch has decoded).  Returns (success, cumulative branch weight after
    each stage); the error probability is 1 - success.
    """
    if decoder is None:
        decoder = SequentialDecoder(ch, codebooks, prior, max_block_dim)
    if len(messages) != ch.s:
        raise ValidationError(f"expected {ch.s} messages, got {len(messages)}")
    words = []
    for i, (m, cb) in enumerate(zip(messages, codebooks)):
        if m < 0 or m >= cb.size:
            raise ValidationError(f"message {m} out of range for sender {i}")
        words.append(cb.words[m])
    sigma = decoder.block.state_for_words(words)
    weights = []
    for i in range(ch.s):
        inst = decoder.stage_instrument(i, words[:i])
        root = inst.sqrt_element(int(messages[i]))
        sigma = root @ sigma @ root
        weights.append(float(np.trace(sigma).real))
    return weights[-1], weights


# ---------------------------------------------------------------------------
# average error and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimReport:
    """Exact accounting of one simulated code, reproducible from its seeds."""

    n: int
    sizes: tuple[int, ...]
    rates: tuple[float, ...]
    mode: str
    trials: int | None
    master_seed: int | None
    codebook_seeds: tuple[int | None, ...]
    trial_seed: int | None
    messages_evaluated: int
    avg_error: float
    stage_success: tuple[float, ...]
    stage_errors: tuple[float, ...]
    stage_eps_bar: tuple[float, ...]
    stage_disturbance: tuple[float, ...]
    stage_disturbance_bound: tuple[float, ...]
    wall_clock_s: float | None = None

    def to_json_dict(self) -> dict:
        # wall clock is intentionally excluded: reports with equal seeds must
        # serialize byte-identically
        return {
            "n": self.n,
            "sizes": list(self.sizes),
            "rates": list(self.rates),
            "mode": self.mode,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "codebook_seeds": list(self.codebook_seeds),
            "trial_seed": self.trial_seed,
            "messages_evaluated": self.messages_evaluated,
            "avg_error": self.avg_error,
            "stage_success": list(self.stage_success),
            "stage_errors": list(self.stage_errors),
            "stage_eps_bar": list(self.stage_eps_bar),
            "stage_disturbance": list(self.stage_disturbance),
            "stage_disturbance_bound": list(self.stage_disturbance_bound),
        }

    def csv_rows(self) -> tuple[list[str], list]:
        header = (
            ["n"] + [f"L{i + 1}" for i in range(len(self.sizes))] + ["avg_error"]
            + [f"stage_error_{i + 1}" for i in range(len(self.stage_errors))]
        )
        row = [self.n, *self.sizes, self.avg_error, *self.stage_errors]
        return header, row


def average_error(ch: CqMacChannel, codebooks: Sequence[Codebook], prior: Prior,
                  mode: str = "exhaustive", trials: int | None = None,
                  seed: int | None = None, max_block_dim: int | None = None,
                  max_messages: int = DEFAULT_MAX_MESSAGES,
                  master_seed: int | None = None) -> SimReport:
    """Mean decoding error over message tuples, with per-stage gentleness stats.

    "exhaustive" enumerates every message tuple (product of codebook sizes
    capped at `max_messages`); "monte_carlo" samples `trials` tuples
    uniformly using `seed`.  For each stage the report carries the average
    stage error on undisturbed inputs and the exact average disturbance the
    gentle measurement inflicts, with its sqrt(8 eps) + eps bound.
    """
    t0 = time.perf_counter()
    decoder = SequentialDecoder(ch, codebooks, prior, max_block_dim)
    sizes = tuple(cb.size for cb in codebooks)
    if mode == "exhaustive":
        count = int(np.prod(sizes))
        if count > max_messages:
            raise CapExceeded(
                f"exhaustive decoding needs {count} message tuples, cap is {max_messages}"
            )
        tuples = list(itertools.product(*(range(L) for L in sizes)))
        trial_seed = None
    elif mode == "monte_carlo":
        if trials is None or seed is None:
            raise ValidationError("monte_carlo mode needs trials= and seed=")
        if trials < 0:
            raise ValidationError(f"trials must be >= 0, got {trials}")
        rng = np.random.default_rng(int(seed))
        tuples = [
            tuple(int(rng.integers(L)) for L in sizes) for _ in range(trials)
        ]
        trial_seed = int(seed)
    else:
        raise ValidationError(f"mode must be 'exhaustive' or 'monte_carlo', got {mode!r}")

    s = ch.s
    n = decoder.n
    stage_success = np.zeros(s)
    stage_eps = np.zeros(s)
    stage_dist = np.zeros(s)
    total_error = 0.0
    for msg in tuples:
        words = [cb.words[m] for cb, m in zip(codebooks, msg)]
        sigma0 = decoder.block.state_for_words(words)
        sigma = sigma0
        for i in range(s):
            inst = decoder.stage_instrument(i, words[:i])
            root = inst.sqrt_element(int(msg[i]))
            # gentleness accounting on the undisturbed word state
            correct = float(np.trace(sigma0 @ inst.povm.element(int(msg[i]))).real)
            leak = sum(
                float(np.trace(sigma0 @ elem).real)
                for lab, elem in inst.povm.elements if lab != int(msg[i])
            )
            stage_eps[i] += max(0.0, 1.0 - correct)
            stage_dist[i] += ops.trace_norm(sigma0 - root @ sigma0 @ root) + leak
            sigma = root @ sigma @ root
            stage_success[i] += float(np.trace(sigma).real)
        total_error += 1.0 - float(np.trace(sigma).real)

    count = len(tuples)
    if count:
        stage_success /= count
        stage_eps /= count
        stage_dist /= count
        total_error /= count
    bounds = tuple(float(np.sqrt(8.0 * e) + e) for e in stage_eps)
    return SimReport(
        n=n,
        sizes=sizes,
        rates=tuple(float(np.log2(L)) / n for L in sizes),
        mode=mode,
        trials=trials if mode == "monte_carlo" else None,
        master_seed=master_seed,
        codebook_seeds=tuple(cb.seed for cb in codebooks),
        trial_seed=trial_seed,
        messages_evaluated=count,
        avg_error=float(total_error),
        stage_success=tuple(float(x) for x in stage_success),
        stage_errors=tuple(float(1.0 - x) for x in stage_success),
        stage_eps_bar=tuple(float(x) for x in stage_eps),
        stage_disturbance=tuple(float(x) for x in stage_dist),
        stage_disturbance_bound=bounds,
        wall_clock_s=time.perf_counter() - t0,
    )


def run_simulation(ch: CqMacChannel, prior: Prior, n: int, sizes: Sequence[int],
                   master_seed: int, mode: str = "exhaustive",
                   trials: int | None = None,
                   max_block_dim: int | None = None,
                   max_messages: int = DEFAULT_MAX_MESSAGES) -> SimReport:
    """Sample codebooks from a master seed and evaluate the code.

    The master seed splits into one seed per codebook plus one for Monte
    Carlo message sampling, so reports are bit-exact replayable.
    """
    seeds = derive_seeds(master_seed, ch.s + 1)
    codebooks = [
        sample_codebook(prior.per_sender[i], n, int(sizes[i]), seeds[i], sender=i)
        for i in range(ch.s)
    ]
    return average_error(
        ch, codebooks, prior, mode=mode, trials=trials,
        seed=seeds[ch.s] if mode == "monte_carlo" else None,
        max_block_dim=max_block_dim, max_messages=max_messages,
        master_seed=int(master_seed),
    )
