#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "afsens/bounds.hpp"
#include "afsens/rng.hpp"

#include "oracles.hpp"

using namespace afsens;

TEST_CASE("sign score bounds") {
    auto no_bias = sign_score_bounds(1, 2, 1.0);
    CHECK(no_bias.lower == doctest::Approx(0.5));
    CHECK(no_bias.upper == doctest::Approx(0.5));

    auto gamma2 = sign_score_bounds(1, 2, 2.0);
    CHECK(gamma2.lower == doctest::Approx(1.0 / 3.0));
    CHECK(gamma2.upper == doctest::Approx(2.0 / 3.0));

    auto saturated = sign_score_bounds(2, 2, 3.0);
    CHECK(saturated.lower == doctest::Approx(1.0));
    CHECK(saturated.upper == doctest::Approx(1.0));

    CHECK_THROWS_AS(sign_score_bounds(3, 2, 1.0), std::domain_error);
    CHECK_THROWS_AS(sign_score_bounds(1, 1, 1.0), std::domain_error);
    CHECK_THROWS_AS(sign_score_bounds(1, 2, 0.9), std::domain_error);
}

TEST_CASE("gamma theta bounds") {
    auto b = gamma_theta_bounds(1, 2, {1.38, 1.0});
    CHECK(b.upper == doctest::Approx(1.38 / 2.38).epsilon(1e-9));

    auto sel = gamma_theta_bounds(1, 2, {1.08, 1.10});
    CHECK(sel.upper == doctest::Approx(1.188 / 2.188).epsilon(1e-9));

    CHECK_THROWS_AS(gamma_theta_bounds(1, 2, {1.0, 0.5}), std::domain_error);

    RngStream rng(11);
    for (int i = 0; i < 200; ++i) {
        int set_size = 2 + static_cast<int>(rng.below(5));
        int z_plus = static_cast<int>(rng.below(static_cast<std::uint64_t>(set_size) + 1));
        double gamma = 1.0 + 4.0 * rng.uniform();
        auto with_theta1 = gamma_theta_bounds(z_plus, set_size, {gamma, 1.0});
        auto plain = sign_score_bounds(z_plus, set_size, gamma);
        CHECK(with_theta1.lower == doctest::Approx(plain.lower).epsilon(1e-12));
        CHECK(with_theta1.upper == doctest::Approx(plain.upper).epsilon(1e-12));
    }
}

TEST_CASE("bound ordering and monotonicity") {
    RngStream rng(12);
    for (int i = 0; i < 300; ++i) {
        int set_size = 2 + static_cast<int>(rng.below(6));
        int z_plus = static_cast<int>(rng.below(static_cast<std::uint64_t>(set_size) + 1));
        double gamma = 1.0 + 4.0 * rng.uniform();
        double theta = 1.0 + rng.uniform();
        auto b = gamma_theta_bounds(z_plus, set_size, {gamma, theta});
        CHECK(b.lower >= 0.0);
        CHECK(b.upper <= 1.0);
        CHECK(b.lower <= b.upper + 1e-15);

        auto more_gamma = gamma_theta_bounds(z_plus, set_size, {gamma + 0.5, theta});
        CHECK(more_gamma.upper >= b.upper - 1e-15);
        CHECK(more_gamma.lower <= b.lower + 1e-15);

        auto more_theta = gamma_theta_bounds(z_plus, set_size, {gamma, theta + 0.5});
        CHECK(more_theta.upper >= b.upper - 1e-15);
        CHECK(more_theta.lower == doctest::Approx(b.lower).epsilon(1e-12));

        auto none = gamma_theta_bounds(z_plus, set_size, {1.0, 1.0});
        CHECK(none.lower == doctest::Approx(none.upper).epsilon(1e-12));
    }
}

TEST_CASE("attributable probability bounds") {
    auto nulled = attributable_prob_bounds(1, 0, 2, {2.0, 1.5});
    CHECK(nulled.lower == 0.0);
    CHECK(nulled.upper == 0.0);

    auto fair = attributable_prob_bounds(1, 1, 2, {1.0, 1.0});
    CHECK(fair.lower == doctest::Approx(0.5));
    CHECK(fair.upper == doctest::Approx(0.5));

    auto g122 = attributable_prob_bounds(1, 1, 2, {1.22, 1.0});
    CHECK(g122.upper == doctest::Approx(1.22 / 2.22).epsilon(1e-9));

    CHECK_THROWS_AS(attributable_prob_bounds(1, 2, 2, {1.0, 1.0}), std::domain_error);
}

TEST_CASE("exact Poisson-binomial tail") {
    std::vector<double> coins{0.5, 0.5};
    CHECK(pb_tail_exact(coins, 1) == doctest::Approx(0.75).epsilon(1e-12));

    std::vector<double> fixed{1.0, 1.0, 0.0};
    CHECK(pb_tail_exact(fixed, 2) == doctest::Approx(1.0));
    CHECK(pb_tail_exact(fixed, 3) == doctest::Approx(0.0));

    std::vector<double> ten(10, 0.5798);
    CHECK(pb_tail_exact(ten, 8) == doctest::Approx(oracle::enumerate_tail(ten, 8)).epsilon(1e-12));
    CHECK(pb_tail_exact(ten, 8) == doctest::Approx(0.136880456263).epsilon(1e-9));

    CHECK(pb_tail_exact(ten, 0) == 1.0);
    CHECK(pb_tail_exact(ten, -3) == 1.0);
    CHECK(pb_tail_exact(ten, 11) == 0.0);

    std::vector<double> bad{0.5, 1.5};
    CHECK_THROWS_AS(pb_tail_exact(bad, 1), std::domain_error);
}

TEST_CASE("exact tail equals enumeration on random instances") {
    RngStream rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        std::size_t n = 1 + rng.below(10);
        std::vector<double> probs;
        for (std::size_t i = 0; i < n; ++i)
            probs.push_back(rng.uniform());
        for (long k = 0; k <= static_cast<long>(n) + 1; ++k) {
            double expect = oracle::enumerate_tail(probs, k);
            CHECK(pb_tail_exact(probs, k) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("exact tail monotonicity") {
    RngStream rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 2 + rng.below(30);
        std::vector<double> probs;
        for (std::size_t i = 0; i < n; ++i)
            probs.push_back(rng.uniform());
        long k = 1 + static_cast<long>(rng.below(n));
        double base = pb_tail_exact(probs, k);
        CHECK(pb_tail_exact(probs, k + 1) <= base + 1e-12);

        auto bumped = probs;
        std::size_t j = rng.below(n);
        bumped[j] = bumped[j] + (1.0 - bumped[j]) * rng.uniform();
        CHECK(pb_tail_exact(bumped, k) >= base - 1e-12);
    }
}

TEST_CASE("normal tail approximation") {
    std::vector<double> half(148, 0.5);
    CHECK(tail_normal(101, 17, half) == doctest::Approx(0.0500891471131).epsilon(1e-9));

    std::vector<double> robust(165, 0.5495);
    CHECK(tail_normal(101, 0, robust) == doctest::Approx(0.0529704185417).epsilon(1e-9));

    std::vector<double> centered(50, 0.3);
    CHECK(tail_normal(15, 0, centered) == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<double> degenerate{1.0, 1.0, 0.0};
    CHECK(tail_normal(2, 0, degenerate) == 1.0);
    CHECK(tail_normal(3, 0, degenerate) == 0.0);

    std::vector<double> none;
    CHECK_THROWS_AS(tail_normal(1, 0, none), std::domain_error);
}

TEST_CASE("normal tail tracks the exact tail away from the center") {
    RngStream rng(15);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> probs;
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < 500; ++i) {
            double p = 0.3 + 0.4 * rng.uniform();
            probs.push_back(p);
            mean += p;
            var += p * (1.0 - p);
        }
        double sd = std::sqrt(var);
        for (double z = 1.3; z <= 3.0; z += 0.24) {
            long k = static_cast<long>(mean + z * sd) + 1;
            double diff = tail_normal(k, 0, probs) - pb_tail_exact(probs, k);
            CHECK(std::abs(diff) < 0.01);
        }
    }
}

TEST_CASE("paired upper p-value") {
    CHECK(paired_upper_pvalue(86, 43, 23, {1.0, 1.0}) ==
          doctest::Approx(0.0260339630079).epsilon(1e-9));
    CHECK(paired_upper_pvalue(86, 43, 23, {1.0, 1.0}) >= 0.025);

    CHECK(paired_upper_pvalue(40, 40, 0, {1.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK(paired_upper_pvalue(101, 64, 3, {1.08, 1.10}) ==
          doctest::Approx(0.0566509813416).epsilon(1e-9));

    CHECK_THROWS_WITH_AS(paired_upper_pvalue(10, 5, 11, {1.0, 1.0}),
                         doctest::Contains("more attributable"), std::domain_error);
    CHECK_THROWS_AS(paired_upper_pvalue(3, 0, 3, {1.0, 1.0}), std::domain_error);
}

TEST_CASE("paired p-value matches the generic tail machinery") {
    RngStream rng(16);
    for (int trial = 0; trial < 50; ++trial) {
        long b = 1 + static_cast<long>(rng.below(60));
        long c = static_cast<long>(rng.below(60));
        long a_star = static_cast<long>(rng.below(static_cast<std::uint64_t>(b)));
        if (b + c - a_star < 1)
            continue;
        SensParams params{1.0 + 2.0 * rng.uniform(), 1.0 + 0.5 * rng.uniform()};
        double direct = paired_upper_pvalue(b, c, a_star, params);

        double gt = params.gamma * params.theta;
        std::vector<double> probs(static_cast<std::size_t>(b + c - a_star), gt / (1.0 + gt));
        double generic = tail_normal(b, a_star, probs);
        CHECK(direct == doctest::Approx(generic).epsilon(1e-12));
    }
}
