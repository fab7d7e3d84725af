import random

import pytest

from polyflow.exceptions import ClaimFailure, InvalidArgument
from polyflow import parity
from polyflow.parity import (E, O, ParitySum, ParityTerm, check_paper_claims, cross_check,
                             differentiate, numeric_oracle, vanishes_on_boundary)


def S(*terms):
    return ParitySum.of(*terms)


# derivative tables written out in the source proofs
@pytest.mark.parametrize("start, n, expected", [
    ("eee", 1, ["eeo"]),
    ("eee", 2, ["eoo", "eee"]),
    ("eee", 3, ["ooo", "eeo"]),
    ("eee", 4, ["ooe", "eoo", "eee"]),
    ("eee", 5, ["ooo", "oee"]),
    ("eoo", 1, ["eeo", "ooo"]),
    ("eoo", 2, ["eoo", "eee"]),
    ("eoo", 3, ["eeo", "ooo"]),
    ("eeo", 1, ["eoo", "eee"]),
    ("eeo", 2, ["eeo", "ooo"]),
    ("eeo", 3, ["eoo", "eee"]),
    ("ee", 1, ["eo"]),
    ("ee", 2, ["ee", "oo"]),
    ("ee", 3, ["eo"]),
    ("oo", 1, ["eo"]),
])
def test_differentiate_tables(start, n, expected):
    assert differentiate(S(start), n) == S(*expected)


@pytest.mark.parametrize("term, n, expected", [
    ("eee", 1, True), ("eeo", 0, True), ("eee", 2, False),
    ("eoo", 3, True), ("eeo", 4, True), ("ee", 2, False),
])
def test_vanishes_on_boundary_examples(term, n, expected):
    assert vanishes_on_boundary(term, n) is expected


def test_numeric_oracle_examples():
    assert numeric_oracle("EEE", 3)
    assert not numeric_oracle("EE", 2)


def test_term_is_order_insensitive():
    assert ParityTerm.of("eoe") == ParityTerm.of("eeo") == ParityTerm.of([E, E, O])
    assert len(S("eoe", "oee", "eeo")) == 1


def test_differentiate_linear_over_union():
    a, b = S("eee"), S("eoo", "ee")
    for n in range(1, 6):
        assert differentiate(a | b, n) == differentiate(a, n) | differentiate(b, n)


def test_period_two_structure():
    # the product has parity (-1)^n_o, so every n with n + n_o odd vanishes
    for size in range(1, 6):
        for n_o in range(size + 1):
            t = ParityTerm(size - n_o, n_o)
            for n in range(0, 13):
                if (n + n_o) % 2:
                    assert vanishes_on_boundary(t, n)
            # odd products vanish to order n_o
            assert all(vanishes_on_boundary(t, n) for n in range(n_o))


def test_invalid_inputs():
    with pytest.raises(InvalidArgument):
        differentiate(S("e"), 0)
    with pytest.raises(InvalidArgument):
        vanishes_on_boundary("ee", -1)
    with pytest.raises(InvalidArgument):
        ParityTerm.of("")
    with pytest.raises(InvalidArgument):
        ParityTerm.of("ex")
    with pytest.raises(InvalidArgument):
        numeric_oracle("e", 1, trials=0)


def test_claims_all_pass():
    results = check_paper_claims()
    assert results and all(r.passed for r in results)
    names = {r.factors for r in results}
    assert names == {"eee", "eoo", "eeo", "ee", "oo", "eeooe", "eeeee"}
    # orders: odd n <= 9 and even n <= 8
    assert {r.n for r in results if r.factors == "eee"} == {1, 3, 5, 7, 9}
    assert {r.n for r in results if r.factors == "eeo"} == {0, 2, 4, 6, 8}


def test_control_case_not_claimed():
    assert not vanishes_on_boundary("eee", 2)


def test_claim_failure_names_counterexample(monkeypatch):
    monkeypatch.setattr(parity, "_claims", lambda: iter([("bogus", "eee", [2])]))
    with pytest.raises(ClaimFailure, match=r"\(eee\) differentiated 2"):
        check_paper_claims()


def test_symbolic_numeric_agreement_exhaustive():
    assert cross_check(max_factors=5, max_order=8, trials=20, seed=1) == []


def test_symbolic_numeric_agreement_random_sample():
    rng = random.Random(7)
    for i in range(10_000):
        size = rng.randint(1, 5)
        factors = [rng.choice((E, O)) for _ in range(size)]
        n = rng.randint(0, 8)
        assert vanishes_on_boundary(ParityTerm.of(factors), n) == numeric_oracle(factors, n, 2, i)
