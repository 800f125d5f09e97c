import pytest

import hardy_bellman.SharpConstant as SharpConstant
from hardy_bellman.errors import DomainError
from hardy_bellman.LemmaSuite import LemmaSuite, PropertyCheck, default_suite
from hardy_bellman.Exponents import PRESETS


def _always_fails(E, rng, samples):
    return {"draw": float(rng.uniform())}


def _raises_domain_error(E, rng, samples):
    raise DomainError("out of range", constraint="test")


def test_add_check_ignores_duplicates():
    suite = LemmaSuite(log=False)
    suite.add_check(PropertyCheck("fails", "always fails", _always_fails))
    suite.add_check(PropertyCheck("fails", "second registration", _always_fails))
    assert len(suite.checks) == 1
    index, check = suite.get_check("fails")
    assert index == 0
    assert check.description == "always fails"
    assert suite.get_check("missing") == (None, None)


def test_add_check_rejects_other_objects():
    suite = LemmaSuite(log=False)
    with pytest.raises(ValueError):
        suite.add_check("not a check")


def test_run_check_unknown_name():
    with pytest.raises(ValueError):
        LemmaSuite(log=False).run_check("missing", PRESETS["p3q2"], 10, 1)


def test_counterexamples_are_deterministic():
    suite = LemmaSuite(log=False)
    suite.add_check(PropertyCheck("fails", "always fails", _always_fails))
    first = suite.run_check("fails", PRESETS["p2q1.5"], 10, 99)
    second = suite.run_check("fails", PRESETS["p2q1.5"], 10, 99)
    other = suite.run_check("fails", PRESETS["p2q1.5"], 10, 100)
    assert not first.passed
    assert first.counterexample == second.counterexample
    assert first.counterexample != other.counterexample


def test_library_errors_become_failures():
    suite = LemmaSuite(log=False)
    suite.add_check(PropertyCheck("raises", "raises", _raises_domain_error))
    report = suite.run_all(["p3q2"], 5, 1)
    assert not report.passed
    assert report.failures()[0].counterexample == {"error": "DomainError"}
    assert "out of range" in report.failures()[0].message


def test_run_all_rejects_unknown_preset():
    with pytest.raises(ValueError):
        default_suite(log=False).run_all(["p9q9"], 5, 1)


def test_default_suite_registers_every_check():
    names = [check.name for check in default_suite(log=False).checks]
    assert len(names) == len(set(names)) == 14
    assert names[0] == "omega_round_trip"


@pytest.mark.parametrize("preset", sorted(PRESETS))
@pytest.mark.parametrize("name", [check.name for check in default_suite(log=False).checks])
def test_every_check_passes(preset, name):
    result = default_suite(log=False).run_check(name, PRESETS[preset], 50, 20240101, preset)
    assert result.passed, result.counterexample


def test_sign_check_catches_corrupted_threshold(monkeypatch):
    monkeypatch.setattr(SharpConstant, "e_threshold", lambda E, P: 1e6)
    result = default_suite(log=False).run_check("sign_equivalence", PRESETS["p2q1.5"], 40, 20240101)
    assert not result.passed
    assert result.counterexample["sign"] == "POS"
