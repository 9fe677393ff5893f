#pragma once

#include <string>
#include <vector>

namespace sharecap {

enum class Discipline { fair_sharing, proportional_fair };

// The shared resource: total capacity and scheduler discipline.
struct ChannelSpec {
    double capacity_C = 0.0; // bit/s
    Discipline discipline = Discipline::fair_sharing;
};

// One demand class: aggregate arrival intensity, mean request size and the
// MCS-determined reference channel rate.
struct UserClass {
    double arrival_rate = 0.0; // events/s
    double mean_size = 0.0;    // bits
    double channel_rate = 0.0; // bit/s
    std::string label;
};

struct ClassMix {
    ChannelSpec channel;
    std::vector<UserClass> classes;

    double total_arrival_rate() const;
};

// A utilization state with its per-class decomposition.
struct LoadPoint {
    double rho = 0.0;
    std::vector<double> per_class_rho;
};

// Machine-interference demand: N users cycling between an exponential think
// period and a transfer, served processor-sharing at capacity C.
struct FinitePopulationSpec {
    int population = 1;           // N
    double think_rate = 0.0;      // events/s per idle user
    double mean_size = 0.0;       // bits
    double capacity_C = 0.0;      // bit/s
};

struct RatePrediction {
    double mean_transfer_time = 0.0;      // s
    double per_user_throughput = 0.0;     // bit/s
    double conditional_time_per_bit = 0.0; // s/bit
};

// Per-flow instantaneous state of the scheduler for n active flows.
struct EffectiveCapacity {
    double effective_C = 0.0;           // C' = sum(Cj)/n
    double share_alpha = 0.0;           // 1/n
    std::vector<double> instantaneous_rates; // ci = Ci/n
};

// -- utilization -------------------------------------------------------------

// Fair sharing: rho_i = lambda_i * m_i / C.
LoadPoint utilization_fair(const ClassMix& mix);

// Proportional fair: rho_i = lambda_i * m_i / C_i.
LoadPoint utilization_proportional_fair(const ClassMix& mix);

// Dispatches on the mix's discipline.
LoadPoint utilization(const ClassMix& mix);

// -- transfer time and throughput --------------------------------------------

// D = (m/C)/(1-rho). Under proportional fair pass the class rate C_i.
double mean_transfer_time(double mean_size, double channel_rate, const LoadPoint& load);

// d(x) = (x/C)/(1-rho); linear in x.
double conditional_transfer_time(double size_x, double channel_rate, const LoadPoint& load);

// v = (1-rho)*C_i.
double per_user_throughput(double channel_rate, const LoadPoint& load);

// rho = 1 - v/C_i, the algebraic inverse of per_user_throughput.
double infer_utilization(double measured_speed, double channel_rate);

// nu_i = C/C_i >= 1: workload inflation that maps a proportional-fair
// transfer at C_i onto a fair-sharing transfer at C.
double inflation_factor(double capacity_C, double channel_rate);

// m'_X = sum (lambda_i/lambda) * nu_i * m_i, so that lambda*m'_X/C equals
// the proportional-fair utilization.
double equivalent_mean_demand(const ClassMix& mix);

// C' = sum(Cj)/n together with the 1/n share and per-flow rates.
EffectiveCapacity effective_capacity(const std::vector<double>& active_channel_rates);

// -- finite population -------------------------------------------------------

// Stationary distribution over n in {0..N} of the birth-death chain with
// arrival rate (N-n)*gamma and service rate C/m_X.
std::vector<double> finite_population_distribution(const FinitePopulationSpec& spec);

// Mean transfer time via Little's law on the effective arrival rate, and the
// resulting per-user throughput v = m_X/D.
RatePrediction finite_population_throughput(const FinitePopulationSpec& spec);

} // namespace sharecap
