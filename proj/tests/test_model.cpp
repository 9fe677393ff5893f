#include <doctest.h>

#include "sharecap/errors.hpp"
#include "sharecap/model.hpp"

#include <cmath>
#include <random>

using namespace sharecap;

namespace {

ClassMix two_class_fair() {
    ClassMix mix;
    mix.channel = {100e6, Discipline::fair_sharing};
    mix.classes = {{0.01, 50e6, 100e6, "a"}, {0.02, 25e6, 100e6, "b"}};
    return mix;
}

ClassMix two_class_pf() {
    ClassMix mix;
    mix.channel = {100e6, Discipline::proportional_fair};
    mix.classes = {{0.01, 100e6, 100e6, "near"}, {0.01, 100e6, 50e6, "far"}};
    return mix;
}

LoadPoint load_at(double rho) {
    LoadPoint load;
    load.rho = rho;
    load.per_class_rho = {rho};
    return load;
}

} // namespace

TEST_CASE("fair utilization") {
    SUBCASE("no demand gives rho zero") {
        ClassMix mix;
        mix.channel = {100e6, Discipline::fair_sharing};
        mix.classes = {{0.0, 50e6, 100e6, "idle"}};
        CHECK(utilization_fair(mix).rho == 0.0);
    }
    SUBCASE("two classes sum") {
        const LoadPoint load = utilization_fair(two_class_fair());
        CHECK(load.per_class_rho[0] == doctest::Approx(0.005));
        CHECK(load.per_class_rho[1] == doctest::Approx(0.005));
        CHECK(load.rho == doctest::Approx(0.01));
    }
    SUBCASE("demand beyond capacity is unstable") {
        ClassMix mix;
        mix.channel = {100e6, Discipline::fair_sharing};
        mix.classes = {{2.0, 100e6, 100e6, "hot"}};
        CHECK_THROWS_AS(utilization_fair(mix), UnstableLoad);
        try {
            utilization_fair(mix);
        } catch (const UnstableLoad& e) {
            CHECK(e.rho == doctest::Approx(2.0));
        }
    }
    SUBCASE("nonpositive parameters rejected") {
        ClassMix mix;
        mix.channel = {100e6, Discipline::fair_sharing};
        mix.classes = {{0.01, -1.0, 100e6, "bad"}};
        CHECK_THROWS_AS(utilization_fair(mix), InvalidClass);
    }
}

TEST_CASE("proportional fair utilization") {
    SUBCASE("single class at full rate matches fair sharing") {
        ClassMix mix;
        mix.channel = {100e6, Discipline::proportional_fair};
        mix.classes = {{0.004, 50e6, 100e6, "only"}};
        const LoadPoint pf = utilization_proportional_fair(mix);
        mix.channel.discipline = Discipline::fair_sharing;
        const LoadPoint fair = utilization_fair(mix);
        CHECK(pf.rho == doctest::Approx(fair.rho));
    }
    SUBCASE("per-class rates weight the load") {
        const LoadPoint load = utilization_proportional_fair(two_class_pf());
        CHECK(load.per_class_rho[0] == doctest::Approx(0.01));
        CHECK(load.per_class_rho[1] == doctest::Approx(0.02));
        CHECK(load.rho == doctest::Approx(0.03));
    }
    SUBCASE("saturation rejected") {
        ClassMix mix;
        mix.channel = {100e6, Discipline::proportional_fair};
        mix.classes = {{1.0, 60e6, 50e6, "hot"}};
        CHECK_THROWS_AS(utilization_proportional_fair(mix), UnstableLoad);
    }
    SUBCASE("class rate above capacity rejected") {
        ClassMix mix;
        mix.channel = {100e6, Discipline::proportional_fair};
        mix.classes = {{0.01, 50e6, 200e6, "impossible"}};
        CHECK_THROWS_AS(utilization_proportional_fair(mix), InvalidClass);
    }
}

TEST_CASE("transfer times") {
    CHECK(mean_transfer_time(100e6, 100e6, load_at(0.0)) == doctest::Approx(1.0));
    CHECK(mean_transfer_time(100e6, 100e6, load_at(0.5)) == doctest::Approx(2.0));
    CHECK(mean_transfer_time(50e6, 50e6, load_at(0.75)) == doctest::Approx(4.0));
    CHECK_THROWS_AS(mean_transfer_time(1e6, 1e6, load_at(1.0)), UnstableLoad);

    CHECK(conditional_transfer_time(1e9, 1e9, load_at(0.0)) == doctest::Approx(1.0));
    CHECK(conditional_transfer_time(500e6, 100e6, load_at(0.5)) == doctest::Approx(10.0));
}

TEST_CASE("conditional time is linear in size") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> rho_dist(0.0, 0.99);
    std::uniform_real_distribution<double> size_dist(1e3, 1e10);
    for (int i = 0; i < 200; ++i) {
        const LoadPoint load = load_at(rho_dist(rng));
        const double x = size_dist(rng);
        const double k = 2.0;
        CHECK(conditional_transfer_time(k * x, 80e6, load) ==
              doctest::Approx(k * conditional_transfer_time(x, 80e6, load)));
    }
}

TEST_CASE("per-user throughput") {
    CHECK(per_user_throughput(100e6, load_at(0.0)) == doctest::Approx(100e6));
    CHECK(per_user_throughput(2e9, load_at(0.5)) == doctest::Approx(1e9));
    CHECK(per_user_throughput(50e6, load_at(0.8)) == doctest::Approx(10e6));
    CHECK_THROWS_AS(per_user_throughput(50e6, load_at(1.2)), UnstableLoad);

    SUBCASE("strictly decreasing in rho, increasing in rate") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> rho_dist(0.0, 0.98);
        for (int i = 0; i < 200; ++i) {
            const double rho = rho_dist(rng);
            CHECK(per_user_throughput(100e6, load_at(rho + 0.01)) <
                  per_user_throughput(100e6, load_at(rho)));
            CHECK(per_user_throughput(110e6, load_at(rho)) >
                  per_user_throughput(100e6, load_at(rho)));
        }
    }
}

TEST_CASE("utilization inference") {
    CHECK(infer_utilization(100e6, 100e6) == doctest::Approx(0.0));
    CHECK(infer_utilization(30e6, 100e6) == doctest::Approx(0.7));
    CHECK_THROWS_AS(infer_utilization(150e6, 100e6), InconsistentMeasurement);

    SUBCASE("round trip with per_user_throughput is exact") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> rho_dist(0.0, 0.999);
        std::uniform_real_distribution<double> rate_dist(1e6, 1e10);
        for (int i = 0; i < 500; ++i) {
            const double rho = rho_dist(rng);
            const double rate = rate_dist(rng);
            const double v = per_user_throughput(rate, load_at(rho));
            CHECK(infer_utilization(v, rate) == doctest::Approx(rho).epsilon(1e-12));
        }
    }
}

TEST_CASE("inflation factor") {
    CHECK(inflation_factor(100e6, 100e6) == doctest::Approx(1.0));
    CHECK(inflation_factor(100.0, 25.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(inflation_factor(100.0, 0.0), InvalidClass);
    CHECK_THROWS_AS(inflation_factor(100.0, 200.0), InvalidClass);
}

TEST_CASE("equivalent mean demand") {
    SUBCASE("single class at full rate keeps the mean") {
        ClassMix mix;
        mix.channel = {100e6, Discipline::proportional_fair};
        mix.classes = {{0.01, 40e6, 100e6, "only"}};
        CHECK(equivalent_mean_demand(mix) == doctest::Approx(40e6));
    }
    SUBCASE("worked two-class example") {
        const ClassMix mix = two_class_pf();
        CHECK(equivalent_mean_demand(mix) == doctest::Approx(150e6));
        // the rho = rho' identity against the PF utilization
        const double lambda = mix.total_arrival_rate();
        CHECK(lambda * equivalent_mean_demand(mix) / mix.channel.capacity_C ==
              doctest::Approx(utilization_proportional_fair(mix).rho).epsilon(1e-12));
    }
    SUBCASE("uniform inflation factors out") {
        ClassMix mix;
        mix.channel = {100e6, Discipline::proportional_fair};
        mix.classes = {{0.01, 30e6, 25e6, "a"}, {0.03, 10e6, 25e6, "b"}};
        const double plain = (0.01 / 0.04) * 30e6 + (0.03 / 0.04) * 10e6;
        CHECK(equivalent_mean_demand(mix) == doctest::Approx(4.0 * plain));
    }
    SUBCASE("identity holds for randomized mixes") {
        std::mt19937 rng(19);
        std::uniform_real_distribution<double> unit(0.05, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            ClassMix mix;
            mix.channel = {1e9, Discipline::proportional_fair};
            const int k = 1 + static_cast<int>(rng() % 5);
            for (int c = 0; c < k; ++c) {
                UserClass cls;
                cls.channel_rate = unit(rng) * 1e9;
                cls.mean_size = unit(rng) * 1e8;
                cls.arrival_rate = unit(rng) * cls.channel_rate / cls.mean_size / (2.0 * k);
                cls.label = "c" + std::to_string(c);
                mix.classes.push_back(cls);
            }
            const LoadPoint load = utilization_proportional_fair(mix);
            const double lhs = mix.total_arrival_rate() * equivalent_mean_demand(mix) /
                               mix.channel.capacity_C;
            CHECK(lhs == doctest::Approx(load.rho).epsilon(1e-12));
        }
    }
}

TEST_CASE("effective capacity") {
    SUBCASE("homogeneous flows") {
        const auto result = effective_capacity({100e6, 100e6, 100e6, 100e6});
        CHECK(result.effective_C == doctest::Approx(100e6));
        for (double rate : result.instantaneous_rates) CHECK(rate == doctest::Approx(25e6));
    }
    SUBCASE("mixed flows") {
        const auto result = effective_capacity({100e6, 50e6});
        CHECK(result.effective_C == doctest::Approx(75e6));
        CHECK(result.instantaneous_rates[0] == doctest::Approx(50e6));
        CHECK(result.instantaneous_rates[1] == doctest::Approx(25e6));
    }
    SUBCASE("single flow keeps its rate") {
        CHECK(effective_capacity({42e6}).effective_C == doctest::Approx(42e6));
    }
    SUBCASE("empty system rejected") { CHECK_THROWS_AS(effective_capacity({}), EmptySystem); }
    SUBCASE("share ci/Ci is constant 1/n") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> rate_dist(1e6, 1e9);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> rates;
            const int n = 1 + static_cast<int>(rng() % 12);
            for (int i = 0; i < n; ++i) rates.push_back(rate_dist(rng));
            const auto result = effective_capacity(rates);
            for (size_t i = 0; i < rates.size(); ++i)
                CHECK(result.instantaneous_rates[i] / rates[i] ==
                      doctest::Approx(1.0 / n).epsilon(1e-12));
        }
    }
}

TEST_CASE("finite population distribution") {
    SUBCASE("two-state closed form at N=1") {
        FinitePopulationSpec spec{1, 0.3, 50e6, 100e6};
        const double mu = spec.capacity_C / spec.mean_size;
        const auto probs = finite_population_distribution(spec);
        REQUIRE(probs.size() == 2);
        CHECK(probs[0] == doctest::Approx(mu / (spec.think_rate + mu)));
        CHECK(probs[1] == doctest::Approx(spec.think_rate / (spec.think_rate + mu)));
    }
    SUBCASE("normalization") {
        for (int N : {1, 3, 17, 80, 400}) {
            FinitePopulationSpec spec{N, 0.05, 50e6, 100e6};
            const auto probs = finite_population_distribution(spec);
            double total = 0.0;
            for (double p : probs) total += p;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("finite population throughput") {
    SUBCASE("a single user never shares") {
        FinitePopulationSpec spec{1, 0.7, 50e6, 100e6};
        const auto prediction = finite_population_throughput(spec);
        CHECK(prediction.mean_transfer_time == doctest::Approx(50e6 / 100e6));
        CHECK(prediction.per_user_throughput == doctest::Approx(100e6));
    }
    SUBCASE("vanishing load approaches the bare transfer time") {
        FinitePopulationSpec spec{50, 1e-7, 50e6, 100e6};
        const auto prediction = finite_population_throughput(spec);
        CHECK(prediction.mean_transfer_time == doctest::Approx(0.5).epsilon(1e-4));
    }
    SUBCASE("gap to the infinite-population value shrinks with N at fixed load") {
        const double lambda = 1.0, m = 50e6, C = 100e6;
        const double d_inf = (m / C) / (1.0 - lambda * m / C);
        double previous_gap = 1e300;
        for (int N : {1, 5, 20, 100}) {
            FinitePopulationSpec spec{N, lambda / N, m, C};
            const double gap = std::abs(finite_population_throughput(spec).mean_transfer_time - d_inf);
            CHECK(gap < previous_gap);
            previous_gap = gap;
        }
    }
}
