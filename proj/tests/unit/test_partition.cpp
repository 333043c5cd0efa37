#include <doctest.h>

#include <random>

#include "exclusion/jackson.hpp"
#include "exclusion/partition.hpp"
#include "exclusion/verify.hpp"
#include "support.hpp"

using namespace exclusion;
using exclusion::testing::random_rates;
using exclusion::testing::stable_loads_direct;

namespace {

OrderedPartition lengths(std::initializer_list<int> l) {
    const std::vector<int> v(l);
    return OrderedPartition::from_lengths(v);
}

RateSystem dog_sheep(double a, int n) {
    std::vector<double> av(n + 1, 1.0), bv(n + 1, 1.0);
    av[0] = a;
    return RateSystem::validate(av, bv);
}

/// Every ordered partition of n particles, by cut masks.
std::vector<OrderedPartition> all_partitions(int n) {
    std::vector<OrderedPartition> out;
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<int> lens;
        int len = 1;
        for (int g = 0; g < n - 1; ++g) {
            if (mask & (1u << g)) {
                lens.push_back(len);
                len = 1;
            } else {
                ++len;
            }
        }
        lens.push_back(len);
        out.push_back(OrderedPartition::from_lengths(lens));
    }
    return out;
}

}  // namespace

TEST_CASE("tie band") {
    CHECK(strictly_faster(1.0, 0.5, 1.0));
    CHECK_FALSE(strictly_faster(1.0, 1.0 - 1e-14, 1.0));
    CHECK(speeds_tied(1.0, 1.0 - 1e-14, 1.0));
    CHECK(speeds_tied(0.0, 1e-13, 1.0));
    CHECK_FALSE(speeds_tied(0.0, 1e-11, 1.0));
}

TEST_CASE("cloud partition examples") {
    const auto singles = cloud_partition(RateSystem::validate({0.5, 0.3, 0.1}, {0.6, 0.7, 0.8}));
    CHECK(singles.partition == OrderedPartition::singletons(3));
    REQUIRE(singles.trace.steps.size() == 1);
    CHECK(singles.trace.steps[0].merged.empty());

    const auto two = cloud_partition(RateSystem::validate({0, 0, 0}, {2, 1, 1.5}));
    CHECK(two.partition == lengths({2, 1}));
    REQUIRE(two.trace.steps.size() == 2);
    CHECK(two.trace.steps[0].merged == std::vector<int>{1});
    CHECK(two.trace.steps[1].part_speeds[0] == doctest::Approx(1.0));
    CHECK(two.trace.steps[1].part_speeds[1] == doctest::Approx(1.5));

    const auto ds = cloud_partition(RateSystem::validate({0.2, 1}, {1, 1}));
    CHECK(ds.partition == OrderedPartition::whole(2));
    CHECK(ds.trace.steps[0].part_speeds == std::vector<double>{0.8, 0.0});
}

TEST_CASE("loads and speeds") {
    const auto two = RateSystem::validate({0, 0, 0}, {2, 1, 1.5});
    const auto rho = full_loads(two, lengths({2, 1}));
    CHECK(rho[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rho[1] == doctest::Approx(1.5).epsilon(1e-14));
    const auto v = particle_speeds(two, rho);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(1.0));
    CHECK(v[2] == doctest::Approx(1.5));

    const auto singles = RateSystem::validate({0.5, 0.3, 0.1}, {0.6, 0.7, 0.8});
    const auto rs = full_loads(singles, OrderedPartition::singletons(3));
    CHECK(rs[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(rs[1] == doctest::Approx(1.375).epsilon(1e-14));
    const auto vs = particle_speeds(singles, rs);
    CHECK(vs[0] == doctest::Approx(0.1));
    CHECK(vs[1] == doctest::Approx(0.4));
    CHECK(vs[2] == doctest::Approx(0.7));

    // A wrong partition exposes a boundary load below 1.
    CHECK_THROWS_AS(full_loads(RateSystem::validate({0.2, 1}, {1, 1}), OrderedPartition::singletons(2)), ModelError);
    // Decreasing speeds are an internal inconsistency.
    CHECK_THROWS_AS(particle_speeds(RateSystem::validate({0.2, 1}, {1, 1}), {1.0}), ModelError);
}

TEST_CASE("analyze examples") {
    const auto singles = analyze(RateSystem::validate({0.5, 0.3, 0.1}, {0.6, 0.7, 0.8}));
    CHECK(singles.flags.all_singletons);
    CHECK_FALSE(singles.flags.single_cloud);
    CHECK(singles.stationary.empty());
    CHECK(singles.speeds[0] == doctest::Approx(0.1));
    CHECK(singles.speeds[1] == doctest::Approx(0.4));
    CHECK(singles.speeds[2] == doctest::Approx(0.7));
    CHECK_FALSE(singles.clt.has_value());

    const auto ds = analyze(dog_sheep(0.2, 4));
    CHECK(ds.flags.single_cloud);
    CHECK_FALSE(ds.flags.critical_tie);
    double width = 0.0;
    for (int j = 1; j <= 4; ++j) {
        const double rho = 0.2 + 0.16 * j;
        CHECK(ds.rho[j - 1] == doctest::Approx(rho).epsilon(1e-13));
        width += 1.0 / (1.0 - rho);
    }
    for (double v : ds.speeds) CHECK(v == doctest::Approx(0.16).epsilon(1e-13));
    CHECK(ds.expected_widths[0] == doctest::Approx(width).epsilon(1e-12));
    REQUIRE(ds.excursion_rate.has_value());

    const auto asym = analyze(RateSystem::validate({0.3, 1, 1}, {1, 1, 0.7}));
    CHECK(asym.flags.single_cloud);
    for (double v : asym.speeds) CHECK(v == doctest::Approx(0.4 / 3.0).epsilon(1e-13));
    for (int k = 1; k <= 2; ++k) CHECK(asym.rho[k - 1] == doctest::Approx(0.3 + 0.4 * k / 3.0).epsilon(1e-13));

    const auto n1 = analyze(RateSystem::validate({0.2, 1}, {1, 1}));
    REQUIRE(n1.clt.has_value());
    CHECK(n1.clt->speed == doctest::Approx(0.4));
    CHECK(n1.clt->sigma2 == doctest::Approx(0.6));
}

TEST_CASE("critical ties are flagged") {
    // b1 - a1 = b2 - a2: equal singleton speeds.
    const auto tie = analyze(RateSystem::validate({0.5, 0.5}, {1, 1}));
    CHECK(tie.flags.critical_tie);
    CHECK(tie.equal_speed_adjacencies == std::vector<int>{1});

    // Equal sheep speeds inside a stable cloud are not a tie of the result.
    CHECK_FALSE(analyze(dog_sheep(0.2, 4)).flags.critical_tie);
}

TEST_CASE("check_partition") {
    const auto ds = RateSystem::validate({0.2, 1}, {1, 1});
    CHECK(check_partition(ds, OrderedPartition::whole(2)));
    CHECK_FALSE(check_partition(ds, OrderedPartition::singletons(2)));

    // Merging two true clouds with strictly increasing speeds breaks the characterization.
    const auto two = RateSystem::validate({0, 0, 0}, {2, 1, 1.5});
    CHECK(check_partition(two, lengths({2, 1})));
    CHECK_FALSE(check_partition(two, OrderedPartition::whole(3)));
}

TEST_CASE("exactly one partition satisfies the characterization") {
    std::mt19937_64 gen(404);
    int checked = 0;
    while (checked < 300) {
        const auto r = random_rates(gen, 7);
        const auto report = analyze(r);
        if (report.flags.critical_tie) continue;
        ++checked;
        int satisfied = 0;
        for (const auto& candidate : all_partitions(static_cast<int>(r.particles()))) {
            if (check_partition(r, candidate)) {
                ++satisfied;
                CHECK(candidate == report.partition);
            }
        }
        REQUIRE(satisfied == 1);
    }
}

TEST_CASE("partition properties on random instances") {
    std::mt19937_64 gen(9001);
    int critical = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = random_rates(gen);
        const auto report = analyze(r);
        if (report.flags.critical_tie) {
            ++critical;
            continue;
        }
        const std::size_t n = r.particles();
        const double scale = std::max(1.0, r.rate_scale());

        // Policy invariance.
        CHECK(cloud_partition(r, MergePolicy::leftmost()).partition == report.partition);
        CHECK(cloud_partition(r, MergePolicy::rightmost()).partition == report.partition);
        CHECK(cloud_partition(r, MergePolicy::random(trial)).partition == report.partition);
        REQUIRE(check_partition(r, report.partition));

        // Trace: part count drops by the number of merges; final speeds non-decreasing.
        const auto& steps = report.trace.steps;
        for (std::size_t s = 0; s + 1 < steps.size(); ++s) {
            REQUIRE(steps[s + 1].partition.size() + steps[s].merged.size() == steps[s].partition.size());
        }
        REQUIRE(steps.back().merged.empty());

        // Speed-gap identity.
        for (std::size_t i = 1; i < n; ++i) {
            const double gap = std::max(report.rho[i - 1] - 1.0, 0.0) * (r.b(i) + r.a(i + 1));
            REQUIRE(std::abs(report.speeds[i] - report.speeds[i - 1] - gap) <= 1e-10 * scale);
        }

        // Speeds constant on parts and equal to the part's intrinsic speed.
        for (std::size_t k = 0; k < report.partition.size(); ++k) {
            const auto& part = report.partition.parts()[k];
            for (int i = part.first; i <= part.last(); ++i) {
                REQUIRE(std::abs(report.speeds[i - 1] - report.cloud_speeds[k]) <= 1e-10 * scale);
            }
        }

        // Stability equivalence for the whole-system stable loads.
        const auto stable = stable_loads_direct(r);
        const double v_all = hv(r, {1, static_cast<int>(n)});
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(stable[i - 1] - 1.0) < 1e-9) continue;
            REQUIRE((stable[i - 1] < 1.0) == (hv(r, {1, static_cast<int>(i)}) > v_all));
        }
        REQUIRE(report.flags.single_cloud == (report.partition.size() == 1));

        // Corollary 3.
        const double min_speed = *std::min_element(report.speeds.begin(), report.speeds.end());
        if (std::abs(min_speed) > 1e-9 * scale) {
            REQUIRE(report.flags.all_speeds_positive == (min_speed > 0.0));
        }
        REQUIRE(report.flags.all_singletons == singleton_criterion(r));
    }
    CHECK(critical < 50);
}

TEST_CASE("oracle equivalence") {
    std::mt19937_64 gen(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = random_rates(gen);
        const auto report = analyze(r);
        if (report.flags.critical_tie) continue;
        REQUIRE(partition_oracle(r) == report.partition);
        const auto sol = solve_general_traffic(to_jackson(r));
        for (std::size_t g = 1; g <= r.gaps(); ++g) {
            if (report.partition.is_boundary_gap(static_cast<int>(g))) {
                // Boundary loads come from the clamped formula; the solver must agree too.
                REQUIRE(std::abs(report.rho[g - 1] - sol.rho[g - 1]) <= 1e-8 * std::max(1.0, sol.rho[g - 1]));
            } else {
                REQUIRE(std::abs(report.rho[g - 1] - sol.rho[g - 1]) <= 1e-8);
            }
        }
    }
}

TEST_CASE("reflection duality") {
    std::mt19937_64 gen(2718);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = random_rates(gen, 10, 0.0);
        const auto s = reflect(r);
        REQUIRE(s.satisfies_assumption_a());
        const auto rr = analyze(r);
        const auto rs = analyze(s);
        if (rr.flags.critical_tie || rs.flags.critical_tie) continue;
        REQUIRE(rs.partition == rr.partition.reversed());
        const std::size_t n = r.particles();
        const double scale = std::max(1.0, r.rate_scale());
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(std::abs(rs.speeds[i] + rr.speeds[n - 1 - i]) <= 1e-12 * scale * 10);
        }
    }
}

TEST_CASE("prefix-product criterion near its boundary") {
    std::mt19937_64 gen(1618);
    std::uniform_int_distribution<int> pick(0, 1);
    int decided = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto base = random_rates(gen, 8, 0.0);
        auto a = base.left_rates();
        const auto& b = base.right_rates();
        // Put the prefix product at some k within 1e-6 of equality.
        const std::size_t k = static_cast<std::size_t>(trial) % a.size();
        double pa = 1.0, pb = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            pa *= a[i];
            pb *= b[i];
        }
        pb *= b[k];
        const double delta = pick(gen) ? 1e-6 : -1e-6;
        a[k] = pb * (1.0 + delta) / pa;
        const auto r = RateSystem::validate(a, b);
        const auto report = analyze(r);
        if (report.flags.critical_tie) continue;
        const double min_speed = *std::min_element(report.speeds.begin(), report.speeds.end());
        if (std::abs(min_speed) <= 1e-12 * r.rate_scale()) continue;
        ++decided;
        REQUIRE(report.flags.all_speeds_positive == all_speeds_positive_criterion(r));
        REQUIRE(report.flags.all_speeds_positive == (min_speed > 0.0));
    }
    CHECK(decided > 900);
}

TEST_CASE("three-particle classification") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    int hits[4] = {0, 0, 0, 0};
    for (int trial = 0; trial < 2000; ++trial) {
        const double a1 = u(gen), a2 = u(gen), a3 = u(gen), b1 = u(gen), b2 = u(gen), b3 = u(gen);
        const bool i1 = b1 - a1 > b2 - a2;
        const bool i2 = b2 - a2 > b3 - a3;
        const double lhs = b1 * b2 + b1 * a3 + a2 * a3;
        const bool r1 = lhs > a1 * b2 + a1 * a3 + b2 * b3;
        const bool r2 = lhs > a1 * a2 + b1 * b3 + a2 * b3;
        const auto r = RateSystem::validate({a1, a2, a3}, {b1, b2, b3});
        const auto report = analyze(r);
        if (report.flags.critical_tie) continue;
        if (r1 && r2) {
            ++hits[0];
            REQUIRE(report.partition == OrderedPartition::whole(3));
            const double v = (b1 * b2 * b3 - a1 * a2 * a3) / lhs;
            REQUIRE(std::abs(report.cloud_speeds[0] - v) <= 1e-12 * std::max(1.0, std::abs(v)));
        } else if (i1 && !r2) {
            ++hits[1];
            REQUIRE(report.partition == lengths({2, 1}));
        } else if (i2 && !r1) {
            ++hits[2];
            REQUIRE(report.partition == lengths({1, 2}));
        } else {
            REQUIRE(!i1);
            REQUIRE(!i2);
            ++hits[3];
            REQUIRE(report.partition == OrderedPartition::singletons(3));
        }
    }
    for (int c : hits) CHECK(c > 50);
}
