// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/netsim.hpp"

#include <filesystem>
#include <map>

#include "json.hpp"

namespace claimchain {

struct BenchOptions {
    size_t n = 12000;            // transactions to generate and mine
    size_t payload_size = 1024;  // off-chain sensor payload bytes
    uint64_t seed = 1;
    size_t anchors_per_contract = 7; // workload-mix knob
    uint64_t wait_period_ms = 1000;
    std::filesystem::path work_dir; // off-chain store location
};

struct KindStats {
    size_t count = 0;
    double mean_us = 0;    // generate + validate, wall time
    double p95_us = 0;
    double mean_bytes = 0; // serialized wire size
    size_t min_bytes = 0;
    size_t max_bytes = 0;
};

struct BenchReport {
    size_t n_requested = 0;
    size_t n_mined = 0;
    size_t blocks = 0;
    uint64_t payload_size = 0;
    uint64_t seed = 0;
    double wall_seconds = 0;
    double mean_us_all = 0;
    double p95_us_all = 0;
    size_t total_bytes = 0;
    std::map<std::string, KindStats> per_kind;
};

// Generates the claim-heavy default mix (per contract: one contract, one
// sensor genesis, N anchors, one claim, one access grant, one decision),
// measures per-transaction generate+validate wall time and serialized
// size, and mines everything on a virtual-time network so consensus
// waiting never enters the clock.
BenchReport run_bench(const BenchOptions& opts);

std::string report_text(const BenchReport& report);
nlohmann::json report_json(const BenchReport& report);

} // namespace claimchain
