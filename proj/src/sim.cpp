#include "sharecap/sim.hpp"
#include "sharecap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace sharecap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBitSlack = 1e-9; // relative to flow size, absorbs drain round-off

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

// Bounded Pareto on [L, H] with tail index a; L is solved from the mean.
struct BoundedPareto {
    double lower = 0.0;
    double upper = 0.0;
    double shape = 0.0;

    static double mean_for_lower(double L, double H, double a) {
        const double ratio = std::pow(L / H, a);
        return std::pow(L, a) / (1.0 - ratio) * (a / (a - 1.0)) *
               (std::pow(L, 1.0 - a) - std::pow(H, 1.0 - a));
    }

    static BoundedPareto from_mean(double mean, double shape, double cap_factor) {
        if (std::abs(shape - 1.0) < 1e-9) throw ConfigError("pareto shape of exactly 1 is not supported");
        if (cap_factor <= 1.0) throw ConfigError("pareto cap factor must exceed 1");
        const double H = cap_factor * mean;
        double lo = mean * 1e-12, hi = std::min(mean, H * (1.0 - 1e-12));
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (mean_for_lower(mid, H, shape) < mean ? lo : hi) = mid;
        }
        return BoundedPareto{0.5 * (lo + hi), H, shape};
    }

    double sample(double u) const {
        const double ratio = std::pow(lower / upper, shape);
        return lower / std::pow(1.0 - u * (1.0 - ratio), 1.0 / shape);
    }
};

struct SizeSampler {
    ServiceDistribution::Kind kind;
    double mean;
    BoundedPareto pareto;

    double draw(std::mt19937_64& rng) const {
        switch (kind) {
            case ServiceDistribution::Kind::deterministic:
                (void)rng(); // keep the per-user stream aligned across variants
                return mean;
            case ServiceDistribution::Kind::exponential:
                return -mean * std::log(uniform01(rng));
            case ServiceDistribution::Kind::bounded_pareto:
                return pareto.sample(uniform01(rng));
        }
        return mean;
    }
};

struct Flow {
    int user = -1;      // -1 for probes
    int cls = -1;
    double remaining = 0.0;
    double size = 0.0;
    double start = 0.0;
    double channel_rate = 0.0;

    // probe bookkeeping
    int probe_index = -1;
    double warm_threshold = 0.0; // remaining level at which timing starts
    double warm_time = -1.0;
};

struct User {
    int cls = 0;
    std::mt19937_64 rng;
};

void validate(const SimConfig& config) {
    if (config.channel.capacity_C <= 0.0) throw ConfigError("capacity must be positive");
    if (config.classes.empty()) throw ConfigError("no classes configured");
    if (!(config.horizon > config.warmup) || config.warmup < 0.0)
        throw ConfigError("horizon must exceed warmup and warmup must be nonnegative");
    for (const auto& cls : config.classes) {
        if (cls.population < 1) throw ConfigError("population must be at least 1");
        if (cls.mean_size <= 0.0) throw ConfigError("mean size must be positive");
        if (cls.think_rate < 0.0) throw ConfigError("think rate must be nonnegative");
        if (cls.channel_rate <= 0.0 || cls.channel_rate > config.channel.capacity_C)
            throw ConfigError("class channel rate must be in (0, C]");
    }
}

struct ClassAccumulator {
    std::int64_t count = 0;
    double sum_time = 0.0;
    double sum_time_sq = 0.0;
    double sum_throughput = 0.0;
    double sum_size = 0.0;
};

} // namespace

std::vector<double> flow_rates(Discipline discipline, double capacity_C,
                               const std::vector<double>& active_channel_rates) {
    const double n = static_cast<double>(active_channel_rates.size());
    std::vector<double> rates(active_channel_rates.size());
    for (size_t j = 0; j < rates.size(); ++j) {
        rates[j] = (discipline == Discipline::proportional_fair ? active_channel_rates[j]
                                                                : capacity_C) / n;
    }
    return rates;
}

SimStats run_simulation(const SimConfig& config) {
    return run_simulation(config, {});
}

SimStats run_simulation(const SimConfig& config, const std::vector<ProbeRequest>& probe_requests) {
    validate(config);
    for (const auto& probe : probe_requests) {
        if (probe.size <= 0.0 || probe.channel_rate <= 0.0 || probe.channel_rate > config.channel.capacity_C)
            throw ConfigError("probe size and channel rate must be positive, rate at most C");
        if (probe.warmup_exclusion < 0.0 || probe.warmup_exclusion >= probe.size)
            throw ConfigError("probe warmup exclusion must be in [0, size)");
    }

    std::vector<SizeSampler> samplers;
    samplers.reserve(config.classes.size());
    for (const auto& cls : config.classes) {
        SizeSampler sampler{config.service.kind, cls.mean_size, {}};
        if (config.service.kind == ServiceDistribution::Kind::bounded_pareto)
            sampler.pareto = BoundedPareto::from_mean(cls.mean_size, config.service.pareto_shape,
                                                      config.service.pareto_cap_factor);
        samplers.push_back(sampler);
    }

    std::vector<User> users;
    for (size_t c = 0; c < config.classes.size(); ++c)
        for (int k = 0; k < config.classes[c].population; ++k)
            users.push_back(User{static_cast<int>(c), std::mt19937_64{}});
    for (size_t u = 0; u < users.size(); ++u)
        users[u].rng.seed(splitmix64(config.seed ^ (0x100000001ULL * (u + 1))));

    // pending arrivals; a user has at most one entry at a time
    using ArrivalEvent = std::pair<double, int>;
    std::priority_queue<ArrivalEvent, std::vector<ArrivalEvent>, std::greater<>> arrivals;
    auto schedule_arrival = [&](int user_index, double now) {
        const double gamma = config.classes[users[user_index].cls].think_rate;
        if (gamma <= 0.0) return;
        const double think = -std::log(uniform01(users[user_index].rng)) / gamma;
        arrivals.push({now + think, user_index});
    };
    for (size_t u = 0; u < users.size(); ++u) schedule_arrival(static_cast<int>(u), 0.0);

    std::vector<ProbeRequest> probes(probe_requests);
    std::sort(probes.begin(), probes.end(),
              [](const ProbeRequest& a, const ProbeRequest& b) { return a.inject_time < b.inject_time; });
    size_t next_probe = 0;

    std::vector<Flow> flows;
    std::vector<ClassAccumulator> acc(config.classes.size());
    std::vector<double> occupancy;
    double busy_time = 0.0;
    double background_busy_time = 0.0;
    SimStats stats;

    double now = 0.0;
    while (now < config.horizon) {
        // current per-flow drain rates
        std::vector<double> active_rates(flows.size());
        for (size_t j = 0; j < flows.size(); ++j) active_rates[j] = flows[j].channel_rate;
        std::vector<double> rates;
        if (!flows.empty()) rates = flow_rates(config.channel.discipline, config.channel.capacity_C, active_rates);

        double t_next = config.horizon;
        for (size_t j = 0; j < flows.size(); ++j)
            t_next = std::min(t_next, now + flows[j].remaining / rates[j]);
        if (!arrivals.empty()) t_next = std::min(t_next, arrivals.top().first);
        if (next_probe < probes.size()) t_next = std::min(t_next, probes[next_probe].inject_time);
        t_next = std::max(t_next, now);

        const double dt = t_next - now;

        // time-weighted statistics over [warmup, horizon]
        const double measured = std::min(t_next, config.horizon) - std::max(now, config.warmup);
        if (measured > 0.0) {
            const size_t n = flows.size();
            if (occupancy.size() <= n) occupancy.resize(n + 1, 0.0);
            occupancy[n] += measured;
            if (n >= 1) busy_time += measured;
        }

        // ground-truth background utilization: time with at least one
        // non-probe flow in the system, over the measured span
        if (measured > 0.0) {
            for (const auto& flow : flows) {
                if (flow.probe_index < 0) {
                    background_busy_time += measured;
                    break;
                }
            }
        }

        // drain analytically; record probe warm-up crossings
        for (size_t j = 0; j < flows.size(); ++j) {
            auto& flow = flows[j];
            const double before = flow.remaining;
            // completion by finish time: the flow that set t_next lands on it
            // exactly, which sidesteps round-off on tiny remaining volumes
            const double finish = now + before / rates[j];
            flow.remaining = finish <= t_next * (1.0 + 1e-15)
                                 ? 0.0
                                 : std::max(0.0, before - rates[j] * dt);
            if (flow.probe_index >= 0 && flow.warm_time < 0.0 &&
                flow.remaining <= flow.warm_threshold + kBitSlack * flow.size) {
                flow.warm_time = now + (before - flow.warm_threshold) / rates[j];
            }
        }

        now = t_next;
        if (now >= config.horizon) break;

        // completions first, in flow-creation order
        for (size_t j = 0; j < flows.size();) {
            auto& flow = flows[j];
            if (flow.remaining > kBitSlack * flow.size) {
                ++j;
                continue;
            }
            if (flow.probe_index >= 0) {
                SpeedTestSample sample;
                sample.inject_time = flow.start;
                sample.channel_rate = flow.channel_rate;
                sample.transfer_time = now - flow.start;
                const double timed_bits = flow.warm_threshold; // size minus excluded warm-up bits
                const double warm_start = flow.warm_time >= 0.0 ? flow.warm_time : flow.start;
                sample.measured_speed = timed_bits > 0.0 && now > warm_start
                                            ? timed_bits / (now - warm_start)
                                            : flow.size / sample.transfer_time;
                stats.probes.push_back(sample); // background_rho filled at the end
            } else {
                if (flow.start >= config.warmup) {
                    auto& a = acc[flow.cls];
                    const double d = now - flow.start;
                    a.count += 1;
                    a.sum_time += d;
                    a.sum_time_sq += d * d;
                    a.sum_throughput += flow.size / d;
                    a.sum_size += flow.size;
                }
                schedule_arrival(flow.user, now);
            }
            flows.erase(flows.begin() + static_cast<std::ptrdiff_t>(j));
        }

        // arrivals due now
        while (!arrivals.empty() && arrivals.top().first <= now + 1e-12) {
            const int user_index = arrivals.top().second;
            arrivals.pop();
            auto& user = users[user_index];
            const auto& cls = config.classes[user.cls];
            Flow flow;
            flow.user = user_index;
            flow.cls = user.cls;
            flow.size = samplers[user.cls].draw(user.rng);
            flow.remaining = flow.size;
            flow.start = now;
            flow.channel_rate = cls.channel_rate;
            flows.push_back(flow);
        }

        // probe injections due now
        while (next_probe < probes.size() && probes[next_probe].inject_time <= now + 1e-12) {
            const auto& request = probes[next_probe];
            Flow flow;
            flow.cls = -1;
            flow.size = request.size;
            flow.remaining = request.size;
            flow.start = now;
            flow.channel_rate = request.channel_rate;
            flow.probe_index = static_cast<int>(next_probe);
            flow.warm_threshold = request.size - request.warmup_exclusion;
            if (request.warmup_exclusion <= 0.0) flow.warm_time = now;
            ++next_probe;
        flows.push_back(flow);
        }
    }

    for (const auto& flow : flows)
        if (flow.probe_index >= 0) ++stats.probes_unfinished;
    stats.probes_unfinished += static_cast<std::int64_t>(probes.size() - next_probe);

    stats.measured_span = config.horizon - config.warmup;
    stats.busy_fraction = busy_time / stats.measured_span;
    const double background_rho = background_busy_time / stats.measured_span;
    for (auto& sample : stats.probes) {
        sample.background_rho = background_rho;
        sample.model_predicted_speed = (1.0 - background_rho) * sample.channel_rate;
    }
    stats.occupancy_time = std::move(occupancy);
    for (size_t c = 0; c < acc.size(); ++c) {
        const auto& a = acc[c];
        ClassStats cs;
        cs.label = config.classes[c].label;
        cs.completed = a.count;
        if (a.count > 0) {
            cs.mean_transfer_time = a.sum_time / static_cast<double>(a.count);
            cs.mean_throughput = a.sum_throughput / static_cast<double>(a.count);
            cs.mean_flow_size = a.sum_size / static_cast<double>(a.count);
            const double variance =
                std::max(0.0, a.sum_time_sq / static_cast<double>(a.count) -
                                  cs.mean_transfer_time * cs.mean_transfer_time);
            cs.transfer_time_halfwidth = 1.96 * std::sqrt(variance / static_cast<double>(a.count));
        }
        stats.total_completed += a.count;
        stats.per_class.push_back(cs);
    }
    return stats;
}

std::vector<double> occupancy_histogram(const SimStats& stats) {
    if (stats.measured_span <= 0.0) throw ConfigError("no measured time span");
    std::vector<double> probs(stats.occupancy_time.size());
    double total = 0.0;
    for (double t : stats.occupancy_time) total += t;
    if (total <= 0.0) throw ConfigError("empty occupancy histogram");
    for (size_t n = 0; n < probs.size(); ++n) probs[n] = stats.occupancy_time[n] / total;
    return probs;
}

InsensitivityReport insensitivity_check(const SimConfig& a, const SimConfig& b) {
    if (a.classes.size() != b.classes.size()) throw ConfigError("class counts differ");
    for (size_t c = 0; c < a.classes.size(); ++c) {
        const auto& ca = a.classes[c];
        const auto& cb = b.classes[c];
        if (ca.mean_size != cb.mean_size || ca.population != cb.population ||
            ca.think_rate != cb.think_rate || ca.channel_rate != cb.channel_rate)
            throw ConfigError("configs must differ only in service distribution");
    }
    if (a.channel.capacity_C != b.channel.capacity_C || a.horizon != b.horizon)
        throw ConfigError("configs must differ only in service distribution");

    const SimStats stats_a = run_simulation(a);
    const SimStats stats_b = run_simulation(b);
    InsensitivityReport report;
    for (size_t c = 0; c < stats_a.per_class.size(); ++c) {
        const double ta = stats_a.per_class[c].mean_transfer_time;
        const double tb = stats_b.per_class[c].mean_transfer_time;
        report.labels.push_back(stats_a.per_class[c].label);
        report.mean_time_a.push_back(ta);
        report.mean_time_b.push_back(tb);
        const double gap = ta > 0.0 ? std::abs(ta - tb) / ta : 0.0;
        report.relative_gap.push_back(gap);
        report.max_relative_gap = std::max(report.max_relative_gap, gap);
    }
    return report;
}

} // namespace sharecap
