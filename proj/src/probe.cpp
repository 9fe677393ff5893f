#include "sharecap/probe.hpp"
#include "sharecap/errors.hpp"
#include "sharecap/model.hpp"

#include <cmath>

namespace sharecap {

std::vector<SpeedTestSample> run_speed_test(const SimConfig& sim, const ProbeSpec& probe) {
    if (probe.count < 1) throw ConfigError("probe count must be at least 1");
    if (probe.size <= 0.0) throw ConfigError("probe size must be positive");
    if (probe.interval < 0.0 || probe.first_time < 0.0)
        throw ConfigError("probe times must be nonnegative");

    std::vector<ProbeRequest> requests;
    requests.reserve(static_cast<size_t>(probe.count));
    for (int k = 0; k < probe.count; ++k) {
        ProbeRequest request;
        request.inject_time = probe.first_time + probe.interval * k;
        request.size = probe.size;
        request.channel_rate = probe.channel_rate;
        request.warmup_exclusion = probe.warmup_exclusion;
        requests.push_back(request);
    }

    SimStats stats = run_simulation(sim, requests);
    if (stats.probes_unfinished > 0)
        throw ProbeStarved(std::to_string(stats.probes_unfinished) +
                           " probe(s) did not complete within the horizon");
    return std::move(stats.probes);
}

double map_mcs_to_rate(int mcs_index, const RateTable& table) {
    auto it = table.find(mcs_index);
    if (it == table.end()) throw UnknownMcs("MCS index " + std::to_string(mcs_index) + " not in rate table");
    return it->second;
}

std::vector<int> rate_table_monotonicity_warnings(const RateTable& table) {
    std::vector<int> warnings;
    double previous = -1.0;
    for (const auto& [index, rate] : table) {
        if (rate < previous) warnings.push_back(index);
        previous = rate;
    }
    return warnings;
}

double aggregate_carriers(const CarrierSetup& setup) {
    auto carrier_rate = [&](const Carrier& carrier) {
        const double channel_rate = map_mcs_to_rate(setup.primary_mcs, carrier.rate_table);
        if (carrier.rho >= 1.0) throw UnstableLoad(carrier.rho);
        LoadPoint load;
        load.rho = carrier.rho;
        return per_user_throughput(channel_rate, load);
    };
    double total = carrier_rate(setup.primary);
    for (const auto& secondary : setup.secondaries) total += carrier_rate(secondary);
    return total;
}

LoadInference infer_load_from_samples(const std::vector<SpeedTestSample>& samples) {
    if (samples.empty()) throw EmptyInput("no speed-test samples");
    LoadInference result;
    double sum = 0.0;
    for (const auto& sample : samples) {
        if (sample.channel_rate <= 0.0) throw ConfigError("sample has nonpositive channel rate");
        if (sample.measured_speed > sample.channel_rate) {
            ++result.inconsistent;
            continue;
        }
        sum += 1.0 - sample.measured_speed / sample.channel_rate;
        ++result.samples_used;
    }
    if (result.samples_used == 0) throw EmptyInput("all samples inconsistent (v > C_i)");
    result.rho = sum / static_cast<double>(result.samples_used);
    return result;
}

} // namespace sharecap
