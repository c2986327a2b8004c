"""Acceptance suite: every criterion at full size and stated tolerances.

Run with ``pytest tests/test_acceptance.py -v`` (about a minute on one CPU)
or directly with ``python tests/test_acceptance.py``.
"""

import pytest

from subdiff_lab.suite import SuiteConfig, run_suite

from conftest import ACCEPTANCE_LINES

NAMES = {
    1: "enlargement-nonempty",
    2: "enlargement-upper-bound",
    3: "convex-equality",
    4: "mean-value-witness",
    5: "ekeland-point",
    6: "directional-test-equivalence",
    7: "subdiff-test-equivalence",
    8: "sufficient-conditions-sound",
    9: "refutation-witnesses",
    10: "polar-absorbing",
    11: "maximal-monotone",
    12: "parser-round-trip",
}


@pytest.fixture(scope="module")
def results():
    out = {}

    def log(line):
        print(line, flush=True)
        ACCEPTANCE_LINES.append(line)

    for r in run_suite(SuiteConfig(seed=42), log=log):
        out[r.number] = r
    return out


@pytest.mark.parametrize("number", sorted(NAMES), ids=[NAMES[k] for k in sorted(NAMES)])
def test_criterion(results, number):
    r = results[number]
    assert r.passed, r.line()


if __name__ == "__main__":
    for r in run_suite(SuiteConfig(seed=42)):
        print(r.line())
