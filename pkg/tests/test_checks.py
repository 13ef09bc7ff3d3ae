import numpy as np
import pytest

from qmac.channel import Prior
from qmac.checks import (CheckResult, entropy_suite, random_channel,
                         random_density, random_povm, relabel_channel,
                         run_suites)
from qmac.operators import ValidationError, check_povm
from qmac.region import constraint_set


def test_random_density_is_density():
    rng = np.random.default_rng(61)
    for d in (2, 3, 5):
        rho = random_density(rng, d)
        assert abs(np.trace(rho).real - 1.0) < 1e-12
        assert np.linalg.eigvalsh(rho)[0] >= -1e-12


def test_random_povm_is_povm():
    rng = np.random.default_rng(62)
    check_povm(random_povm(rng, 4, 3))


def test_relabel_channel_swaps_bounds():
    rng = np.random.default_rng(63)
    ch = random_channel(rng, max_senders=2)
    while ch.s != 2:
        ch = random_channel(rng, max_senders=2)
    prior = Prior.uniform(ch.sender_alphabets)
    swapped = relabel_channel(ch, (1, 0))
    p2 = Prior(tuple(reversed(prior.per_sender)))
    cs = constraint_set(ch, prior)
    cs2 = constraint_set(swapped, p2)
    assert abs(cs.bounds[1] - cs2.bounds[2]) < 1e-9
    assert abs(cs.bounds[2] - cs2.bounds[1]) < 1e-9
    assert abs(cs.bounds[3] - cs2.bounds[3]) < 1e-9


def test_suites_pass_at_small_trials():
    for res in run_suites("all", 8, 777):
        assert res.passed, res.failures[:2]
        assert res.checks > 0


def test_zero_trials_vacuous():
    res = entropy_suite(0, 1)
    assert res.passed and res.checks == 0


def test_unknown_suite_rejected():
    with pytest.raises(ValidationError):
        run_suites("bogus", 1, 1)


def test_check_result_records_failures():
    res = CheckResult("demo", seed=5, trials=1)
    res.record(True, 0, "ok-kind")
    res.record(False, 0, "bad-kind", "context", value=1.23)
    assert not res.passed
    assert res.checks == 2
    assert res.counts["bad-kind"] == 1
    failure = res.failures[0]
    assert failure["seed"] == 5 and failure["check"] == "bad-kind"
    lines = res.summary_lines()
    assert any("FAIL" in line for line in lines)
    assert any("ok-kind" in line for line in lines)
