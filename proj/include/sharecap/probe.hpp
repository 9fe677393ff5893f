#pragma once

#include "sharecap/sim.hpp"

#include <map>
#include <vector>

namespace sharecap {

// Probe schedule: `count` transfers of `size` bits at rate `channel_rate`,
// injected every `interval` seconds starting at `first_time`.
struct ProbeSpec {
    double size = 0.0;             // bits
    double channel_rate = 0.0;     // bit/s
    int count = 1;
    double interval = 0.0;         // seconds between injections
    double first_time = 0.0;
    double warmup_exclusion = 0.0; // bits excluded from the speed computation
};

// Runs the simulation with the probe schedule mixed in; throws ProbeStarved
// if any probe fails to complete within the horizon.
std::vector<SpeedTestSample> run_speed_test(const SimConfig& sim, const ProbeSpec& probe);

using RateTable = std::map<int, double>; // MCS index -> bit/s

double map_mcs_to_rate(int mcs_index, const RateTable& table);

// Indices where the table is not monotone nondecreasing (lint, not an error).
std::vector<int> rate_table_monotonicity_warnings(const RateTable& table);

struct Carrier {
    double rho = 0.0;
    RateTable rate_table;
};

// Primary carrier with its MCS; secondaries inherit the primary's MCS index
// but resolve it through their own rate tables.
struct CarrierSetup {
    int primary_mcs = 0;
    Carrier primary;
    std::vector<Carrier> secondaries;
};

// Sum over carriers of (1-rho_k)*C_{i,k}.
double aggregate_carriers(const CarrierSetup& setup);

struct LoadInference {
    double rho = 0.0;
    std::size_t samples_used = 0;
    std::size_t inconsistent = 0; // samples with v > C_i, excluded
};

LoadInference infer_load_from_samples(const std::vector<SpeedTestSample>& samples);

} // namespace sharecap
