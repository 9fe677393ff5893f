#pragma once

#include "sharecap/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sharecap {

struct ServiceDistribution {
    enum class Kind { exponential, deterministic, bounded_pareto };
    Kind kind = Kind::exponential;
    // bounded Pareto only: tail shape and upper cut-off as a multiple of the
    // class mean; the lower bound is solved so the mean comes out right.
    double pareto_shape = 1.5;
    double pareto_cap_factor = 100.0;
};

// One finite population of identical users cycling between think and transfer.
struct SimClass {
    std::string label;
    double channel_rate = 0.0; // bit/s, used under proportional fair
    double mean_size = 0.0;    // bits
    int population = 1;
    double think_rate = 0.0;   // per idle user, events/s; 0 means silent
};

struct SimConfig {
    ChannelSpec channel;
    std::vector<SimClass> classes;
    ServiceDistribution service;
    double horizon = 0.0; // simulated seconds
    double warmup = 0.0;  // excluded from statistics
    std::uint64_t seed = 1;
};

// A speed-test transfer injected at a fixed time; scheduled like any flow.
struct ProbeRequest {
    double inject_time = 0.0;
    double size = 0.0;          // bits
    double channel_rate = 0.0;  // bit/s
    double warmup_exclusion = 0.0; // bits excluded from the speed computation
};

struct SpeedTestSample {
    double inject_time = 0.0;
    double measured_speed = 0.0;        // (x-w)/(t_x - t_w)
    double channel_rate = 0.0;
    double background_rho = 0.0;        // busy fraction of background flows over the probe lifetime
    double model_predicted_speed = 0.0; // (1-rho)*C_i
    double transfer_time = 0.0;
};

struct ClassStats {
    std::string label;
    std::int64_t completed = 0;
    double mean_transfer_time = 0.0;
    double mean_throughput = 0.0;       // mean over flows of size/time
    double mean_flow_size = 0.0;        // empirical mean of completed sizes
    double transfer_time_halfwidth = 0.0; // 95% CI half-width on the mean
};

struct SimStats {
    std::vector<ClassStats> per_class;
    double busy_fraction = 0.0;            // fraction of measured time with n >= 1
    std::vector<double> occupancy_time;    // seconds spent with n flows active
    double measured_span = 0.0;            // horizon - warmup
    std::int64_t total_completed = 0;
    std::vector<SpeedTestSample> probes;
    std::int64_t probes_unfinished = 0;
};

// Instantaneous per-flow drain rates for n active flows: C/n under fair
// sharing, C_j/n under proportional fair.
std::vector<double> flow_rates(Discipline discipline, double capacity_C,
                               const std::vector<double>& active_channel_rates);

SimStats run_simulation(const SimConfig& config);

// Same engine with probe transfers mixed into the schedule.
SimStats run_simulation(const SimConfig& config, const std::vector<ProbeRequest>& probes);

// Normalizes the time-in-state histogram to a probability vector.
std::vector<double> occupancy_histogram(const SimStats& stats);

struct InsensitivityReport {
    std::vector<std::string> labels;
    std::vector<double> mean_time_a;
    std::vector<double> mean_time_b;
    std::vector<double> relative_gap;
    double max_relative_gap = 0.0;
};

// Runs both configs, which must differ only in service distribution, and
// reports the per-class transfer-time gap.
InsensitivityReport insensitivity_check(const SimConfig& a, const SimConfig& b);

} // namespace sharecap
