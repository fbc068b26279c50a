"""Snapshot equivalence and authority safety (reduced sizes; the acceptance
suite runs the full volumes)."""

import random

from authority import authority_model_check
from equivalence import run_equivalence_trial


def test_snapshot_equivalence_sample():
    rng = random.Random(20240)
    for _ in range(100):
        eager, late = run_equivalence_trial(rng)
        assert eager == late


def test_authority_model_check_small():
    result = authority_model_check(depth=4)
    assert result.violations == []
    assert result.states_visited > 10
    assert result.transitions_checked > 100
