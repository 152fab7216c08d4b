#pragma once

#include "hedgesim/protocols.hpp"

namespace hedgesim {

struct Verdict {
    std::string property;
    std::string scenario;
    bool pass = false;
    std::string detail;
    StrategyProfile profile;  // replayable counterexample when !pass
    std::uint64_t trace_hash = 0;
};

struct CheckSummary {
    std::size_t profiles_run = 0;
    std::size_t safety_failures = 0;
    std::size_t hedged_failures = 0;
    bool truncated = false;
    bool liveness_pass = false;
    std::string liveness_detail;
    std::vector<Verdict> counterexamples;  // capped
};

// Exhaustive, duplicate-free, deterministically ordered strategy profiles
// within the bounds: up to max_deviators simultaneous deviators, each
// assigning omit/delay (and protocol-specific choices) per obligation.
std::vector<StrategyProfile> enumerate_profiles(const ProtocolDriver& driver,
                                                const CheckBounds& bounds,
                                                bool* truncated = nullptr);

bool zero_sum(const RunResult& r);

Verdict check_safety(const ProtocolDriver& driver, const RunResult& run,
                     const StrategyProfile& profile);
Verdict check_hedged(const ProtocolDriver& driver, const RunResult& run,
                     const StrategyProfile& profile);
Verdict check_liveness(const ProtocolDriver& driver, CryptoSuite& suite);

CheckSummary check_all(const ProtocolDriver& driver, const CheckBounds& bounds,
                       CryptoSuite& suite, FaultFlags faults = {},
                       std::size_t keep_counterexamples = 16);

}  // namespace hedgesim
