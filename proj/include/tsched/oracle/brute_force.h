#pragma once

#include <cstddef>

#include "tsched/scheduler.h"

namespace tsched::oracle {

struct BruteForceResult {
    double total_augmented_delay = 0.0;
    double total_local_delay = 0.0;  // of the first minimizer found
    std::size_t schedules = 0;       // complete schedules enumerated
};

/// Enumerates every order-preserving interleaving of the phase lists (and,
/// with a finite horizon, every point at which a phase leaves its tail
/// unserved). Expects arrivals and durations already on the time grid; it
/// does no rounding of its own. Exponential: small instances only.
BruteForceResult brute_force(const InputClusterSequence& input, const DelayParams& params);

}  // namespace tsched::oracle

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tsched::oracle {

struct OracleCase {
    InputClusterSequence input;
    DelayParams params;
};

/// Up to two phases of up to four clusters each: integer arrivals in [0, 60],
/// integer counts in [1, 8] at 0.5 veh/s, 5 s changeover. Feedback, initial
/// signal state and a finite horizon are varied across cases.
OracleCase random_case(std::mt19937_64& rng);

struct SuiteResult {
    std::size_t cases = 0;
    std::size_t mismatches = 0;
    std::vector<std::string> failures;  // first few, human readable
};

/// Compares optimize() against brute_force() on `cases` random instances.
SuiteResult run_oracle_suite(std::size_t cases, std::uint64_t seed);

}  // namespace tsched::oracle
