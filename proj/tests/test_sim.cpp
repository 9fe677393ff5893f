#include <doctest.h>

#include "sharecap/errors.hpp"
#include "sharecap/model.hpp"
#include "sharecap/sim.hpp"

#include <cmath>

using namespace sharecap;

namespace {

// Single-class config whose effective arrival rate lands on the target rho;
// the think rate is compensated for the population's own backlog.
SimConfig single_class_at(double rho, double capacity, double mean_size, int population,
                          double horizon, std::uint64_t seed) {
    SimConfig config;
    config.channel = {capacity, Discipline::fair_sharing};
    SimClass cls;
    cls.label = "bg";
    cls.channel_rate = capacity;
    cls.mean_size = mean_size;
    cls.population = population;
    if (rho > 0.0) {
        const double lambda = rho * capacity / mean_size;
        cls.think_rate = lambda / (population - rho / (1.0 - rho));
    }
    config.classes.push_back(cls);
    config.horizon = horizon;
    config.warmup = 0.1 * horizon;
    config.seed = seed;
    return config;
}

} // namespace

TEST_CASE("flow rate properties") {
    SUBCASE("fair sharing splits C equally and conserves work") {
        const auto rates = flow_rates(Discipline::fair_sharing, 100e6, {80e6, 50e6, 20e6});
        double total = 0.0;
        for (double r : rates) {
            CHECK(r == doctest::Approx(100e6 / 3.0));
            total += r;
        }
        CHECK(total == doctest::Approx(100e6));
    }
    SUBCASE("proportional fair keeps ci/Ci constant and drains C' in total") {
        const std::vector<double> channel_rates{100e6, 50e6, 25e6};
        const auto rates = flow_rates(Discipline::proportional_fair, 100e6, channel_rates);
        double total = 0.0, expected_total = 0.0;
        for (size_t i = 0; i < rates.size(); ++i) {
            CHECK(rates[i] / channel_rates[i] == doctest::Approx(1.0 / 3.0));
            total += rates[i];
            expected_total += channel_rates[i];
        }
        CHECK(total == doctest::Approx(expected_total / 3.0));
    }
}

TEST_CASE("single user never shares") {
    SimConfig config;
    config.channel = {100e6, Discipline::fair_sharing};
    config.classes = {{"solo", 100e6, 50e6, 1, 0.5}};
    config.horizon = 20000;
    config.warmup = 1000;
    config.seed = 9;
    const SimStats stats = run_simulation(config);
    REQUIRE(stats.per_class[0].completed > 1000);
    // every transfer runs at full capacity: throughput exactly C
    CHECK(stats.per_class[0].mean_throughput == doctest::Approx(100e6).epsilon(1e-9));

    // busy fraction matches the two-state closed form
    FinitePopulationSpec spec{1, 0.5, 50e6, 100e6};
    const auto probs = finite_population_distribution(spec);
    CHECK(stats.busy_fraction == doctest::Approx(probs[1]).epsilon(0.01));
}

TEST_CASE("mean transfer time matches the closed form at rho=0.5") {
    const SimConfig config = single_class_at(0.5, 100e6, 50e6, 500, 60000, 21);
    const SimStats stats = run_simulation(config);
    REQUIRE(stats.per_class[0].completed > 20000);
    LoadPoint load;
    load.rho = 0.5;
    const double expected = mean_transfer_time(50e6, 100e6, load);
    CHECK(stats.per_class[0].mean_transfer_time == doctest::Approx(expected).epsilon(0.03));
    CHECK(stats.busy_fraction == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("occupancy histogram") {
    SUBCASE("silent population sits at n=0") {
        SimConfig config;
        config.channel = {100e6, Discipline::fair_sharing};
        config.classes = {{"silent", 100e6, 50e6, 5, 0.0}};
        config.horizon = 100;
        config.warmup = 0;
        const auto histogram = occupancy_histogram(run_simulation(config));
        REQUIRE(!histogram.empty());
        CHECK(histogram[0] == doctest::Approx(1.0));
    }
    SUBCASE("entries are nonnegative, sum to one, seconds sum to the span") {
        const SimConfig config = single_class_at(0.4, 100e6, 50e6, 100, 5000, 3);
        const SimStats stats = run_simulation(config);
        const auto histogram = occupancy_histogram(stats);
        double total = 0.0, seconds = 0.0;
        for (double p : histogram) {
            CHECK(p >= 0.0);
            total += p;
        }
        for (double t : stats.occupancy_time) seconds += t;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(seconds == doctest::Approx(stats.measured_span).epsilon(1e-9));
    }
    SUBCASE("N=3 occupancy matches the birth-death closed form") {
        SimConfig config;
        config.channel = {100e6, Discipline::fair_sharing};
        config.classes = {{"pop", 100e6, 50e6, 3, 0.1}};
        config.horizon = 200000;
        config.warmup = 5000;
        config.seed = 31;
        const auto histogram = occupancy_histogram(run_simulation(config));
        const auto closed = finite_population_distribution({3, 0.1, 50e6, 100e6});
        REQUIRE(histogram.size() >= closed.size());
        for (size_t n = 0; n < closed.size(); ++n)
            CHECK(std::abs(histogram[n] - closed[n]) < 0.01);
    }
}

TEST_CASE("determinism under a fixed seed") {
    const SimConfig config = single_class_at(0.6, 100e6, 20e6, 200, 4000, 77);
    const SimStats a = run_simulation(config);
    const SimStats b = run_simulation(config);
    CHECK(a.total_completed == b.total_completed);
    CHECK(a.busy_fraction == b.busy_fraction);
    CHECK(a.per_class[0].mean_transfer_time == b.per_class[0].mean_transfer_time);
    CHECK(a.occupancy_time == b.occupancy_time);

    SimConfig other = config;
    other.seed = 78;
    CHECK(run_simulation(other).per_class[0].mean_transfer_time !=
          a.per_class[0].mean_transfer_time);
}

TEST_CASE("bounded pareto sampling hits the configured mean") {
    SimConfig config = single_class_at(0.3, 100e6, 50e6, 300, 40000, 13);
    config.service.kind = ServiceDistribution::Kind::bounded_pareto;
    config.service.pareto_shape = 1.5;
    config.service.pareto_cap_factor = 100.0;
    const SimStats stats = run_simulation(config);
    REQUIRE(stats.per_class[0].completed > 10000);
    CHECK(stats.per_class[0].mean_flow_size == doctest::Approx(50e6).epsilon(0.05));
}

TEST_CASE("insensitivity check") {
    SUBCASE("identical configs give exactly zero gap") {
        const SimConfig config = single_class_at(0.5, 100e6, 20e6, 200, 5000, 5);
        const auto report = insensitivity_check(config, config);
        CHECK(report.max_relative_gap == 0.0);
    }
    SUBCASE("deterministic vs exponential sizes at rho=0.6") {
        SimConfig exponential = single_class_at(0.6, 100e6, 20e6, 400, 40000, 55);
        SimConfig deterministic = exponential;
        deterministic.service.kind = ServiceDistribution::Kind::deterministic;
        const auto report = insensitivity_check(exponential, deterministic);
        CHECK(report.max_relative_gap < 0.05);
    }
    SUBCASE("mismatched means rejected") {
        SimConfig a = single_class_at(0.5, 100e6, 20e6, 100, 1000, 1);
        SimConfig b = single_class_at(0.5, 100e6, 30e6, 100, 1000, 1);
        CHECK_THROWS_AS(insensitivity_check(a, b), ConfigError);
    }
}

TEST_CASE("PF transfers equal fair transfers of inflated size on matched seeds") {
    SimConfig pf;
    pf.channel = {100e6, Discipline::proportional_fair};
    pf.classes = {{"full", 100e6, 10e6, 200, 0.008}, {"half", 50e6, 10e6, 200, 0.008}};
    pf.horizon = 20000;
    pf.warmup = 2000;
    pf.seed = 123;

    SimConfig fair = pf;
    fair.channel.discipline = Discipline::fair_sharing;
    for (auto& cls : fair.classes) {
        const double nu = inflation_factor(pf.channel.capacity_C, cls.channel_rate);
        cls.mean_size *= nu;
        cls.channel_rate = fair.channel.capacity_C;
    }

    const SimStats pf_stats = run_simulation(pf);
    const SimStats fair_stats = run_simulation(fair);
    for (size_t c = 0; c < pf_stats.per_class.size(); ++c) {
        REQUIRE(pf_stats.per_class[c].completed > 1000);
        CHECK(pf_stats.per_class[c].completed == fair_stats.per_class[c].completed);
        CHECK(pf_stats.per_class[c].mean_transfer_time ==
              doctest::Approx(fair_stats.per_class[c].mean_transfer_time).epsilon(1e-6));
    }
}

TEST_CASE("config validation") {
    SimConfig config = single_class_at(0.5, 100e6, 20e6, 100, 1000, 1);
    SUBCASE("warmup past horizon") {
        config.warmup = config.horizon;
        CHECK_THROWS_AS(run_simulation(config), ConfigError);
    }
    SUBCASE("empty classes") {
        config.classes.clear();
        CHECK_THROWS_AS(run_simulation(config), ConfigError);
    }
    SUBCASE("class rate above capacity") {
        config.classes[0].channel_rate = 200e6;
        CHECK_THROWS_AS(run_simulation(config), ConfigError);
    }
    SUBCASE("zero population") {
        config.classes[0].population = 0;
        CHECK_THROWS_AS(run_simulation(config), ConfigError);
    }
}
