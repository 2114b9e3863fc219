import numpy as np
import pytest

from petz_tur.errors import ValidationError
from petz_tur.verify import SUITES, SuiteResult, VerifyConfig, random_triple, run_battery, summary_json, thread_count


def test_suite_result_record():
    r = SuiteResult("x", 1e-9)
    assert not r.ok
    r.record(1e-12, "a")
    r.record(float("nan"), "b")
    assert r.failed == 1 and r.failures == ["b"] and r.worst_residual == 1e-12


def test_default_battery_passes():
    results = run_battery(VerifyConfig(trials=2))
    assert list(results) == sorted(SUITES)
    for name, r in results.items():
        assert r.ok, (name, r.failures)


def test_broken_weight_detected():
    results = run_battery(VerifyConfig(trials=1, broken_weight="hellinger"),
                          suites=("mixture_identity", "moments", "inversion"))
    assert all(not r.ok for r in results.values())


def test_summary_is_stable():
    cfg = VerifyConfig(trials=1, seed=9)
    assert summary_json(run_battery(cfg), cfg) == summary_json(run_battery(cfg), cfg)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("PETZ_TUR_THREADS", "1")
    assert thread_count(8) == 1
    monkeypatch.setenv("PETZ_TUR_THREADS", "many")
    with pytest.raises(ValidationError):
        thread_count(2)


def test_config_validation():
    with pytest.raises(ValidationError):
        VerifyConfig(trials=0)
    with pytest.raises(ValidationError):
        run_battery(VerifyConfig(trials=1), suites=("nope",))


def test_random_triple_is_valid():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = random_triple(rng)
        assert m.x != 0 and m.y > 0 and m.z > 0
