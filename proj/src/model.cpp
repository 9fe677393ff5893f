#include "sharecap/model.hpp"
#include "sharecap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sharecap {

namespace {

void check_class(const UserClass& cls, const ChannelSpec& channel) {
    if (cls.arrival_rate < 0.0) throw InvalidClass("negative arrival rate for class '" + cls.label + "'");
    if (cls.mean_size <= 0.0) throw InvalidClass("nonpositive mean size for class '" + cls.label + "'");
    if (cls.channel_rate <= 0.0) throw InvalidClass("nonpositive channel rate for class '" + cls.label + "'");
    if (cls.channel_rate > channel.capacity_C)
        throw InvalidClass("class '" + cls.label + "' channel rate exceeds capacity");
}

void check_mix(const ClassMix& mix) {
    if (mix.channel.capacity_C <= 0.0) throw InvalidClass("channel capacity must be positive");
    if (mix.classes.empty()) throw InvalidClass("class mix is empty");
    for (const auto& cls : mix.classes) check_class(cls, mix.channel);
}

LoadPoint make_load_point(std::vector<double> per_class) {
    LoadPoint load;
    load.per_class_rho = std::move(per_class);
    load.rho = std::accumulate(load.per_class_rho.begin(), load.per_class_rho.end(), 0.0);
    if (load.rho >= 1.0) throw UnstableLoad(load.rho);
    return load;
}

} // namespace

double ClassMix::total_arrival_rate() const {
    double total = 0.0;
    for (const auto& cls : classes) total += cls.arrival_rate;
    return total;
}

LoadPoint utilization_fair(const ClassMix& mix) {
    check_mix(mix);
    std::vector<double> per_class;
    per_class.reserve(mix.classes.size());
    for (const auto& cls : mix.classes)
        per_class.push_back(cls.arrival_rate * cls.mean_size / mix.channel.capacity_C);
    return make_load_point(std::move(per_class));
}

LoadPoint utilization_proportional_fair(const ClassMix& mix) {
    check_mix(mix);
    std::vector<double> per_class;
    per_class.reserve(mix.classes.size());
    for (const auto& cls : mix.classes)
        per_class.push_back(cls.arrival_rate * cls.mean_size / cls.channel_rate);
    return make_load_point(std::move(per_class));
}

LoadPoint utilization(const ClassMix& mix) {
    return mix.channel.discipline == Discipline::proportional_fair
               ? utilization_proportional_fair(mix)
               : utilization_fair(mix);
}

double mean_transfer_time(double mean_size, double channel_rate, const LoadPoint& load) {
    if (load.rho >= 1.0) throw UnstableLoad(load.rho);
    if (mean_size <= 0.0 || channel_rate <= 0.0) throw InvalidClass("size and rate must be positive");
    return (mean_size / channel_rate) / (1.0 - load.rho);
}

double conditional_transfer_time(double size_x, double channel_rate, const LoadPoint& load) {
    return mean_transfer_time(size_x, channel_rate, load);
}

double per_user_throughput(double channel_rate, const LoadPoint& load) {
    if (load.rho >= 1.0) throw UnstableLoad(load.rho);
    if (channel_rate <= 0.0) throw InvalidClass("channel rate must be positive");
    return (1.0 - load.rho) * channel_rate;
}

double infer_utilization(double measured_speed, double channel_rate) {
    if (channel_rate <= 0.0) throw InvalidClass("channel rate must be positive");
    if (measured_speed <= 0.0) throw InconsistentMeasurement("measured speed must be positive");
    if (measured_speed > channel_rate)
        throw InconsistentMeasurement("measured speed exceeds the reference channel rate");
    return 1.0 - measured_speed / channel_rate;
}

double inflation_factor(double capacity_C, double channel_rate) {
    if (channel_rate <= 0.0) throw InvalidClass("channel rate must be positive");
    if (channel_rate > capacity_C) throw InvalidClass("channel rate exceeds capacity");
    return capacity_C / channel_rate;
}

double equivalent_mean_demand(const ClassMix& mix) {
    check_mix(mix);
    const double lambda = mix.total_arrival_rate();
    if (lambda <= 0.0) throw InvalidClass("total arrival rate must be positive");
    double demand = 0.0;
    for (const auto& cls : mix.classes) {
        const double nu = inflation_factor(mix.channel.capacity_C, cls.channel_rate);
        demand += (cls.arrival_rate / lambda) * nu * cls.mean_size;
    }
    return demand;
}

EffectiveCapacity effective_capacity(const std::vector<double>& active_channel_rates) {
    if (active_channel_rates.empty()) throw EmptySystem("no active flows");
    const double n = static_cast<double>(active_channel_rates.size());
    EffectiveCapacity result;
    result.share_alpha = 1.0 / n;
    result.instantaneous_rates.reserve(active_channel_rates.size());
    double sum = 0.0;
    for (double rate : active_channel_rates) {
        sum += rate;
        result.instantaneous_rates.push_back(rate / n);
    }
    result.effective_C = sum / n;
    return result;
}

namespace {

void check_spec(const FinitePopulationSpec& spec) {
    if (spec.population < 1) throw InvalidClass("population must be at least 1");
    if (spec.think_rate <= 0.0) throw InvalidClass("think rate must be positive");
    if (spec.mean_size <= 0.0) throw InvalidClass("mean size must be positive");
    if (spec.capacity_C <= 0.0) throw InvalidClass("capacity must be positive");
}

} // namespace

std::vector<double> finite_population_distribution(const FinitePopulationSpec& spec) {
    check_spec(spec);
    const int N = spec.population;
    const double mu = spec.capacity_C / spec.mean_size;
    const double r = spec.think_rate / mu;

    // Product-form terms P(n) ~ N!/(N-n)! * r^n, accumulated in log space
    // to keep the N!/(N-n)! factor in range for large populations.
    std::vector<double> log_terms(static_cast<size_t>(N) + 1);
    log_terms[0] = 0.0;
    const double log_r = std::log(r);
    for (int n = 1; n <= N; ++n)
        log_terms[n] = log_terms[n - 1] + std::log(static_cast<double>(N - n + 1)) + log_r;

    const double log_max = *std::max_element(log_terms.begin(), log_terms.end());
    std::vector<double> probs(log_terms.size());
    double total = 0.0;
    for (size_t n = 0; n < log_terms.size(); ++n) {
        probs[n] = std::exp(log_terms[n] - log_max);
        total += probs[n];
    }
    for (double& p : probs) p /= total;
    return probs;
}

RatePrediction finite_population_throughput(const FinitePopulationSpec& spec) {
    const auto probs = finite_population_distribution(spec);
    double mean_n = 0.0;
    for (size_t n = 0; n < probs.size(); ++n) mean_n += static_cast<double>(n) * probs[n];

    const double effective_lambda = spec.think_rate * (static_cast<double>(spec.population) - mean_n);
    RatePrediction out;
    if (effective_lambda <= 0.0) {
        out.mean_transfer_time = spec.mean_size / spec.capacity_C;
    } else {
        out.mean_transfer_time = mean_n / effective_lambda; // Little's law
    }
    out.per_user_throughput = spec.mean_size / out.mean_transfer_time;
    out.conditional_time_per_bit = out.mean_transfer_time / spec.mean_size;
    return out;
}

} // namespace sharecap
