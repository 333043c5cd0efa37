#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "exclusion/core.hpp"
#include "support.hpp"

using namespace exclusion;
using exclusion::testing::alpha_direct;
using exclusion::testing::beta_direct;
using exclusion::testing::close_rel;
using exclusion::testing::random_rates;

namespace {

RateSystem dog_sheep(double a, int n) {
    std::vector<double> av(n + 1, 1.0), bv(n + 1, 1.0);
    av[0] = a;
    return RateSystem::validate(av, bv);
}

}  // namespace

TEST_CASE("validate accepts assumption A and rejects violations") {
    const auto r = RateSystem::validate({0.2, 1.0}, {1.0, 1.0});
    CHECK(r.particles() == 2);
    CHECK(r.gaps() == 1);
    CHECK_NOTHROW(RateSystem::validate({0, 0, 0}, {2, 1.5, 1}));

    CHECK_THROWS_AS(RateSystem::validate({0.1}, {1.0}), ModelError);
    CHECK_THROWS_AS(RateSystem::validate({0.1, 0.2}, {1.0}), ModelError);
    CHECK_THROWS_AS(RateSystem::validate({-0.1, 0.2}, {1.0, 1.0}), ModelError);
    CHECK_THROWS_AS(RateSystem::validate({0.1, 0.2}, {1.0, 0.0}), ModelError);
    CHECK_THROWS_AS(RateSystem::validate({NAN, 0.2}, {1.0, 1.0}), ModelError);
    CHECK_THROWS_AS(RateSystem::validate({0.1, 0.2}, {INFINITY, 1.0}), ModelError);
}

TEST_CASE("validate rejects rates whose products leave double range") {
    std::vector<double> a(4, 1e90), b(4, 1e-90);
    CHECK_THROWS_AS(RateSystem::validate(a, b), ModelError);
}

TEST_CASE("reflect swaps and reverses") {
    const auto r = reflect(RateSystem::validate({0.2, 1}, {1, 1}));
    CHECK(r.left_rates() == std::vector<double>{1, 1});
    CHECK(r.right_rates() == std::vector<double>{1, 0.2});
    CHECK(r.satisfies_assumption_a());

    const auto t = reflect(RateSystem::validate({0, 0}, {2, 1}));
    CHECK(t.left_rates() == std::vector<double>{1, 2});
    CHECK(t.right_rates() == std::vector<double>{0, 0});
    CHECK_FALSE(t.satisfies_assumption_a());

    std::mt19937_64 gen(11);
    for (int k = 0; k < 200; ++k) {
        const auto s = random_rates(gen);
        CHECK(reflect(reflect(s)) == s);
    }
}

TEST_CASE("interval quantities on small examples") {
    const auto ds = RateSystem::validate({0.2, 1}, {1, 1});
    CHECK(alpha(ds, {1, 2}) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(beta(ds, {1, 2}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(hv(ds, {1, 2}) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(hrho(ds, {1, 2}, 1) == doctest::Approx(0.6).epsilon(1e-15));

    const auto half = RateSystem::validate({0.5, 0.5}, {1, 1});
    CHECK(alpha(half, {2, 1}) == 0.5);

    const auto tasep = RateSystem::validate({0, 0, 0}, {2, 1.5, 1});
    CHECK(alpha(tasep, {1, 3}) == 0.0);
    CHECK(beta(RateSystem::validate({0, 0}, {2, 1.5}), {1, 2}) == doctest::Approx(1 / 1.5));
    CHECK(hv(tasep, {1, 3}) == doctest::Approx(1.0).epsilon(1e-15));

    const auto dogs = RateSystem::validate({0.5, 1, 1}, {1, 1, 0.5});
    CHECK(hrho(dogs, {1, 3}, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(hrho(dogs, {1, 3}, 2) == doctest::Approx(0.5).epsilon(1e-14));

    for (int l = 1; l <= 3; ++l) {
        CHECK(beta(tasep, {l, 1}) == 1.0 / tasep.b(l));
        CHECK(hv(tasep, {l, 1}) == tasep.b(l) - tasep.a(l));
    }
}

TEST_CASE("interval arguments are bounds-checked") {
    const auto ds = RateSystem::validate({0.2, 1}, {1, 1});
    CHECK_THROWS_AS(alpha(ds, {2, 2}), ModelError);
    CHECK_THROWS_AS(beta(ds, {0, 1}), ModelError);
    CHECK_THROWS_AS(hv(ds, {1, 0}), ModelError);
    CHECK_THROWS_AS(hrho(ds, {1, 1}, 1), ModelError);
    CHECK_THROWS_AS(hrho(ds, {1, 2}, 2), ModelError);
}

TEST_CASE("geometric product law") {
    CHECK(product_geometric_pmf(GeometricProductLaw({0.6}), std::vector<long long>{0}) == doctest::Approx(0.4));
    CHECK(product_geometric_pmf(GeometricProductLaw({0.5, 0.5}), std::vector<long long>{1, 2}) ==
          doctest::Approx(0.03125).epsilon(1e-15));
    CHECK_THROWS_AS(product_geometric_pmf(GeometricProductLaw({0.5, 0.5}), std::vector<long long>{1}), ModelError);

    CHECK(expected_cloud_width(GeometricProductLaw({0.6})) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(expected_cloud_width(GeometricProductLaw({0.5, 0.5})) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(expected_cloud_width(GeometricProductLaw({0.5, 1.0})), ModelError);

    // Dog and sheep, a = 0.5, N = 3.
    const auto r = dog_sheep(0.5, 3);
    const auto width = expected_cloud_width(GeometricProductLaw(hrho_all(r, {1, 4})));
    CHECK(width == doctest::Approx(8.0 * 11.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("box mass equals explicit summation") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int k = 1; k <= 3; ++k) {
        for (int cap = 0; cap <= 10; ++cap) {
            std::vector<double> rhos(k);
            for (auto& r : rhos) r = u(gen);
            const GeometricProductLaw law(rhos);
            std::vector<long long> z(k, 0);
            double sum = 0.0;
            while (true) {
                sum += product_geometric_pmf(law, z);
                int i = 0;
                while (i < k && z[i] == cap) z[i++] = 0;
                if (i == k) break;
                ++z[i];
            }
            CHECK(close_rel(sum, product_geometric_box_mass(law, cap), 1e-12));
        }
    }
}

TEST_CASE("core identities on random instances") {
    std::mt19937_64 gen(20240601);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = random_rates(gen);
        const int n = static_cast<int>(r.particles());
        for (int l = 1; l <= n; ++l) {
            for (int m = 1; l + m - 1 <= n; ++m) {
                const DiscreteInterval I{l, m};
                // beta recurrence vs the literal double sum.
                REQUIRE(close_rel(beta(r, I), beta_direct(r, l, m), 1e-12));
                REQUIRE(close_rel(alpha(r, I), alpha_direct(r, l, m), 1e-12, 1e-300));
                // Boundary normalization; the sum cancels, so the error scales with alpha.
                const double a = alpha(r, I);
                REQUIRE(std::abs(a + beta(r, I) * hv(r, I) - 1.0) <= 1e-12 * std::max(1.0, a));
                // Multiplicativity.
                for (int m1 = 1; m1 < m; ++m1) {
                    REQUIRE(close_rel(alpha(r, {l, m1}) * alpha(r, {l + m1, m - m1}), alpha(r, I), 1e-12, 1e-300));
                }
                // Reflection antisymmetry.
                const auto s = reflect(r);
                const DiscreteInterval J{n + 2 - (l + m), m};
                if (s.satisfies_assumption_a()) {
                    const double scale = std::max(1.0, r.rate_scale());
                    REQUIRE(std::abs(hv(s, J) + hv(r, I)) <= 1e-12 * scale);
                }
            }
        }
        // Interior loads of the whole system satisfy the balance recurrence with rho = 1 at both ends.
        if (n >= 3) {
            const auto rho = hrho_all(r, {1, n});
            std::vector<double> ext{1.0};
            ext.insert(ext.end(), rho.begin(), rho.end());
            ext.push_back(1.0);
            for (int j = 1; j < n; ++j) {
                const double lhs = (r.b(j) + r.a(j + 1)) * ext[j];
                const double rhs = r.a(j) * ext[j - 1] + r.b(j + 1) * ext[j + 1];
                REQUIRE(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("partition constructors") {
    const int lens[] = {2, 1, 3};
    const auto p = OrderedPartition::from_lengths(lens);
    CHECK(p.size() == 3);
    CHECK(p.particles() == 6);
    CHECK(p.part_of(3) == 1);
    CHECK(p.is_boundary_gap(2));
    CHECK_FALSE(p.is_boundary_gap(1));
    CHECK(to_string(p) == "({1,2}, {3}, {4,5,6})");
    CHECK(p.reversed().reversed() == p);
    CHECK_THROWS_AS(OrderedPartition::from_parts({{1, 2}, {4, 1}}, 4), ModelError);
    CHECK_THROWS_AS(OrderedPartition::from_parts({{1, 2}}, 3), ModelError);
}
