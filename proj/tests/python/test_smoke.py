"""Smoke tests for the Python module, run by ctest with PYTHONPATH pointing
at the built extension."""

import json
import os

import _hedgesim as hs


def test_premium_formulas():
    cyc3 = (["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")], ["a"])
    assert hs.leader_redemption_total(*cyc3, "a", 1) == 3
    assert hs.redemption_premium(*cyc3, ["a"], "c", 1) == 3
    assert hs.redemption_premium(*cyc3, ["c", "a"], "b", 1) == 2
    for u, v in [("a", "b"), ("b", "c"), ("c", "a")]:
        assert hs.escrow_premium(*cyc3, u, v, 1) == 3

    two = (["a", "b"], [("a", "b"), ("b", "a")], ["a"])
    assert hs.leader_redemption_total(*two, "a", 1) == 2
    assert hs.escrow_premium(*two, "b", "a", 1) == 2

    assert hs.diameter(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")]) == 2


def test_bootstrap():
    assert hs.bootstrap_rounds(1000000, 1000000, 100, 4) == 3
    rounds = hs.bootstrap_amounts(1000000, 1000000, 100, 3)
    assert rounds[0]["round"] == 3
    assert rounds[0]["leader_num"] == 4 and rounds[0]["leader_den"] == 1
    assert rounds[-1]["leader_num"] == 20000


def test_run_and_determinism():
    scenario = json.dumps(
        {
            "protocol": "two-party-hedged",
            "alice_premium": 2,
            "bob_premium": 3,
            "value_a": 100,
            "value_b": 100,
        }
    )
    a = hs.run_scenario_json(scenario)
    b = hs.run_scenario_json(scenario)
    assert a["quiescent"]
    assert a["trace_hash"] == b["trace_hash"]
    assert a["payoffs"]["alice"]["premium"] == 0
    assert a["payoffs"]["bob"]["premium"] == 0


def test_check():
    scenario = json.dumps(
        {
            "protocol": "two-party-hedged",
            "alice_premium": 2,
            "bob_premium": 3,
            "check": {"max_deviators": 1},
        }
    )
    summary = hs.check_scenario_json(scenario)
    assert summary["liveness"]
    assert summary["safety_failures"] == 0
    assert summary["hedged_failures"] == 0


def test_scenario_files():
    scenario_dir = os.environ.get("HEDGESIM_SCENARIO_DIR")
    if not scenario_dir:
        return
    result = hs.run_scenario_file(os.path.join(scenario_dir, "broker.json"))
    assert result["quiescent"]
    assert result["payoffs"]["alice"]["principal"] == 1


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"{name}: ok")
            except AssertionError as exc:
                failures += 1
                print(f"{name}: FAILED {exc}")
    raise SystemExit(1 if failures else 0)
