"""Hedged cross-chain protocol simulator and exhaustive adversary checker."""

from _hedgesim import (  # noqa: F401
    bootstrap_amounts,
    bootstrap_rounds,
    check_scenario_json,
    diameter,
    escrow_premium,
    leader_redemption_total,
    redemption_premium,
    run_scenario_file,
    run_scenario_json,
)

__all__ = [
    "bootstrap_amounts",
    "bootstrap_rounds",
    "check_scenario_json",
    "diameter",
    "escrow_premium",
    "leader_redemption_total",
    "redemption_premium",
    "run_scenario_file",
    "run_scenario_json",
]
