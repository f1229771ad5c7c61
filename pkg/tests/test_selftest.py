import pytest

from tlmax.selftest import CHECKS, run_selftest


def test_all_checks_pass():
    result = run_selftest()
    assert result["passed"], result["failed"]
    assert list(result["checks"]) == [name for name, _ in CHECKS]


def test_injected_mother_fails_only_partition():
    result = run_selftest(inject="mother")
    assert not result["passed"]
    assert result["failed"] == ["partition_of_unity"]


@pytest.mark.parametrize("seed", [1, 7])
def test_other_seeds(seed):
    assert run_selftest(seed=seed)["passed"]


def test_crash_is_reported(monkeypatch):
    def boom(rng):
        raise RuntimeError("broken")

    monkeypatch.setattr("tlmax.selftest.CHECKS", [("boom", boom)])
    result = run_selftest()
    assert result["failed"] == ["boom"]
    assert result["checks"]["boom"]["error"] == "RuntimeError: broken"


def test_unknown_fault():
    with pytest.raises(ValueError):
        run_selftest(inject="everything")
