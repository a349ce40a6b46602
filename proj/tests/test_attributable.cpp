#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "afsens/attributable.hpp"
#include "afsens/rng.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace afsens;

namespace {

const PairCounts kOverall{2, 101, 64, 3879};
const std::vector<GroupCounts> kGroups{
    {"hormone_sensitive", {1, 86, 43, 3024}},
    {"hormone_insensitive", {1, 15, 21, 855}},
};

} // namespace

TEST_CASE("method names round trip") {
    for (Method m : all_methods()) {
        auto back = method_from_string(to_string(m));
        REQUIRE(back.has_value());
        CHECK(*back == m);
    }
    CHECK(!method_from_string("mcnemar").has_value());
}

TEST_CASE("merged zero test on the case study") {
    CHECK(test_afe_zero(kOverall, {1.0, 1.0}) ==
          doctest::Approx(0.00198556427246).epsilon(1e-9));
    CHECK(test_afe_zero(kOverall, {1.22, 1.0}) ==
          doctest::Approx(0.0531069598162).epsilon(1e-9));
    CHECK(test_afe_zero(kOverall, {1.21, 1.0}) < 0.05);

    PairCounts balanced{0, 30, 30, 100};
    CHECK(test_afe_zero(balanced, {1.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("merged minimum interval reproduces the published bounds") {
    auto at = [&](double gamma, double theta) {
        return min_ci_attributable(kOverall, {gamma, theta}, 0.05);
    };
    MinCiResult base = at(1.0, 1.0);
    CHECK(base.a_star == 17);
    CHECK(base.afe_lower == doctest::Approx(17.0 / 103.0).epsilon(1e-12));
    CHECK(!base.saturated);

    CHECK(at(1.08, 1.0).a_star == 11);
    CHECK(at(1.16, 1.0).a_star == 5);
    CHECK(at(1.22, 1.0).a_star == 0);

    // selection bias rows
    CHECK(at(1.08, 1.10).a_star == 3);
    CHECK(at(1.08, 1.10).afe_lower == doctest::Approx(3.0 / 103.0).epsilon(1e-12));
    CHECK(at(1.04, 1.10).a_star == 6);
    CHECK(test_afe_zero(kOverall, {1.12, 1.10}) ==
          doctest::Approx(0.0601286577868).epsilon(1e-9));
}

TEST_CASE("exact and normal scans on the case study") {
    // the exact binomial tail accepts one step earlier than the normal
    // approximation here: P(Bin(149,1/2) >= 85) = 0.0505 vs normal 0.0427
    CHECK(test_afe_zero(kOverall, {1.0, 1.0}, true) ==
          doctest::Approx(0.00245817665549).epsilon(1e-9));
    CHECK(allocation_upper_pvalue(kOverall, 16, {1.0, 1.0}, true) ==
          doctest::Approx(0.0505014660064).epsilon(1e-9));
    CHECK(min_ci_attributable(kOverall, {1.0, 1.0}, 0.05, true).a_star == 16);
    CHECK(min_ci_attributable(kOverall, {1.0, 1.0}, 0.05, false).a_star == 17);
}

TEST_CASE("combined bonferroni interval") {
    MinCiResult base = min_ci_attributable(kGroups, Method::bonferroni, {1.0, 1.0}, 0.05);
    CHECK(base.a_star == 23);
    CHECK(base.afe_lower == doctest::Approx(23.0 / 103.0).epsilon(1e-12));

    MinCiResult edge = min_ci_attributable(kGroups, Method::bonferroni, {1.38, 1.0}, 0.05);
    CHECK(edge.a_star == 1);
    CHECK(edge.afe_lower == doctest::Approx(1.0 / 103.0).epsilon(1e-12));

    CHECK(test_afe_zero(kGroups, Method::bonferroni, {1.38, 1.0}) ==
          doctest::Approx(0.0457015675608).epsilon(1e-8));
    CHECK(test_afe_zero(kGroups, Method::bonferroni, {1.40, 1.0}) ==
          doctest::Approx(0.0548804602389).epsilon(1e-8));
}

TEST_CASE("explicit allocations drive the combined scan") {
    SensParams fair{1.0, 1.0};
    // the scan's a* = 23 is witnessed by the all-in-group-one allocation and
    // by every allocation of 22 falling short
    CHECK(combined_upper_pvalue(kGroups, Method::bonferroni, {{23, 0}}, fair) >= 0.05);
    double worst22 = 0.0;
    for (long a1 = 6; a1 <= 22; ++a1)
        worst22 = std::max(worst22, combined_upper_pvalue(kGroups, Method::bonferroni,
                                                          {{a1, 22 - a1}}, fair));
    CHECK(worst22 < 0.05);

    CHECK(combined_upper_pvalue(kGroups, Method::merged, {{10, 7}}, fair) ==
          doctest::Approx(allocation_upper_pvalue(kOverall, 17, fair)).epsilon(1e-12));

    CHECK_THROWS_AS(combined_upper_pvalue(kGroups, Method::bonferroni, {{1}}, fair),
                    std::domain_error);
    CHECK_THROWS_AS(combined_upper_pvalue(kGroups, Method::bonferroni, {{90, 0}}, fair),
                    std::domain_error);
}

TEST_CASE("bonferroni interval equals per-group scans at alpha over L") {
    for (double gamma : {1.0, 1.08, 1.22, 1.38}) {
        SensParams params{gamma, 1.0};
        long combined = min_ci_attributable(kGroups, Method::bonferroni, params, 0.05).a_star;
        long split = 0;
        for (const auto& g : kGroups)
            split += min_ci_attributable(g.counts, params, 0.025).a_star;
        CHECK(combined == split);
    }
}

TEST_CASE("fisher and truncated zero-test boundaries") {
    CHECK(test_afe_zero(kGroups, Method::fisher, {1.26, 1.0}) < 0.05);
    CHECK(test_afe_zero(kGroups, Method::fisher, {1.30, 1.0}) >= 0.05);
    CHECK(test_afe_zero(kGroups, Method::fisher, {1.30, 1.0}) ==
          doctest::Approx(0.0546226082907).epsilon(1e-6));

    CHECK(test_afe_zero(kGroups, Method::truncated, {1.34, 1.0}, 0.10) < 0.05);
    CHECK(test_afe_zero(kGroups, Method::truncated, {1.38, 1.0}, 0.10) >= 0.05);

    CHECK(test_afe_zero(kGroups, Method::stouffer, {1.0, 1.0}) ==
          doctest::Approx(0.0244216903555).epsilon(1e-8));
    CHECK(test_afe_zero(kGroups, Method::weighted_stouffer, {1.0, 1.0}) ==
          doctest::Approx(0.00203221149486).epsilon(1e-8));
}

TEST_CASE("maximum interval scan matches the independent oracle") {
    for (double gamma : {1.0, 1.1, 1.25}) {
        long expect = oracle::max_ci_scan(kOverall, gamma, 0.05);
        CHECK(max_ci_attributable(kOverall, {gamma, 1.0}, 0.05).a_upper == expect);
    }

    RngStream rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        PairCounts pc{static_cast<long>(rng.below(4)), static_cast<long>(rng.below(80)),
                      static_cast<long>(rng.below(80)), static_cast<long>(rng.below(400))};
        double gamma = 1.0 + 2.0 * rng.uniform();
        long expect = oracle::max_ci_scan(pc, gamma, 0.05);
        CHECK(max_ci_attributable(pc, {gamma, 1.0}, 0.05).a_upper == expect);
    }
}

TEST_CASE("maximum interval edge cases") {
    PairCounts no_exposed_cases{0, 0, 5, 20};
    CHECK(max_ci_attributable(no_exposed_cases, {1.0, 1.0}, 0.05).a_upper == 0);

    PairCounts toy{0, 10, 10, 50};
    MaxCiResult upper = max_ci_attributable(toy, {1.0, 1.0}, 0.05);
    MinCiResult lower = min_ci_attributable(toy, {1.0, 1.0}, 0.05);
    CHECK(upper.a_upper >= lower.a_star);

    MaxCiResult overall = max_ci_attributable(kOverall, {1.0, 1.0}, 0.05);
    CHECK(overall.a_upper >= min_ci_attributable(kOverall, {1.0, 1.0}, 0.05).a_star);
    CHECK(!overall.saturated);
}

TEST_CASE("study-based merged path agrees with the pair shortcut") {
    Study study = testutil::study_from_counts({{"hormone_sensitive", {1, 86, 43, 3024}},
                                               {"hormone_insensitive", {1, 15, 21, 855}}});
    for (double gamma : {1.0, 1.22}) {
        for (double theta : {1.0, 1.1}) {
            SensParams params{gamma, theta};
            CHECK(test_afe_zero_merged(study, params) ==
                  doctest::Approx(test_afe_zero(kOverall, params)).epsilon(1e-10));
            CHECK(min_ci_attributable(study, params, 0.05).a_star ==
                  min_ci_attributable(kOverall, params, 0.05).a_star);
        }
    }
    CHECK(min_ci_attributable(study, {1.0, 1.0}, 0.05, true).a_star == 16);
}

TEST_CASE("general matched sets use per-set bounds") {
    // two 1:2 sets, exposed case in the first
    Study study;
    MatchedSet s1;
    s1.set_id = "a";
    s1.exposed = {1, 0, 1};
    s1.is_case = {1, 0, 0};
    MatchedSet s2;
    s2.set_id = "b";
    s2.exposed = {0, 1, 0};
    s2.is_case = {1, 0, 0};
    study.sets = {s1, s2};

    SensParams params{1.5, 1.0};
    // upper bounds: z+=2,J=3 -> 3/(3+1) for the exposed case set at gamma*theta=1.5,
    // z+=1,J=3 -> 1.5/3.5 for the other
    double p1 = 1.5 * 2 / (1.5 * 2 + 1);
    double p2 = 1.5 / 3.5;
    std::vector<double> probs{p1, p2};
    double expect = oracle::enumerate_tail(probs, 1);
    CHECK(test_afe_zero_merged(study, params, true) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sensitivity grid golden rows and boundaries") {
    GridSpec spec;
    spec.gammas = {1.0};
    spec.thetas = {1.0};
    spec.methods = {Method::merged};
    auto rows = sensitivity_grid(kGroups, spec);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].a_star == 17);
    CHECK(rows[0].afe_lower == doctest::Approx(17.0 / 103.0).epsilon(1e-12));

    std::ostringstream csv;
    write_grid_csv(rows, csv);
    CHECK(csv.str() == "gamma,theta,method,p_value_afe0,a_star,afe_lower,saturated,"
                       "boundary_flag\n"
                       "1,1,merged,0.00198556,17,0.165049,0,\n");

    GridSpec edge;
    edge.gammas = {1.38, 1.40};
    edge.thetas = {1.0};
    edge.methods = {Method::bonferroni};
    auto marked = sensitivity_grid(kGroups, edge);
    REQUIRE(marked.size() == 2);
    CHECK(marked[0].boundary == "last_reject");
    CHECK(marked[0].a_star == 1);
    CHECK(marked[1].boundary == "first_fail");
    CHECK(marked[1].a_star == 0);

    GridSpec fisher_edge;
    fisher_edge.gammas = {1.26, 1.30};
    fisher_edge.thetas = {1.0};
    fisher_edge.methods = {Method::fisher};
    auto fisher_rows = sensitivity_grid(kGroups, fisher_edge);
    CHECK(fisher_rows[0].boundary == "last_reject");
    CHECK(fisher_rows[1].boundary == "first_fail");
}

TEST_CASE("grid ordering and max interval plumbing") {
    GridSpec spec;
    spec.gammas = {1.08, 1.0};
    spec.thetas = {1.1, 1.0};
    spec.methods = {Method::bonferroni, Method::merged};
    spec.with_max_ci = true;
    auto rows = sensitivity_grid(kGroups, spec);
    REQUIRE(rows.size() == 8);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        bool ordered = rows[i - 1].gamma < rows[i].gamma ||
                       (rows[i - 1].gamma == rows[i].gamma &&
                        (rows[i - 1].theta < rows[i].theta ||
                         (rows[i - 1].theta == rows[i].theta &&
                          to_string(rows[i - 1].method) < to_string(rows[i].method))));
        CHECK(ordered);
    }
    for (const auto& row : rows) {
        if (row.method == Method::merged) {
            REQUIRE(row.a_upper.has_value());
            CHECK(*row.a_upper >= row.a_star);
        } else {
            CHECK(!row.a_upper.has_value());
        }
    }
}

TEST_CASE("interval and rejection monotonicity") {
    // a lower confidence level accepts sooner, so the intervals are nested:
    // a* grows with alpha
    long prev = -1;
    for (double alpha : {0.01, 0.05, 0.10, 0.25}) {
        long a = min_ci_attributable(kOverall, {1.0, 1.0}, alpha).a_star;
        CHECK(a >= prev);
        prev = a;
    }

    // afe bound shrinks in gamma and theta for the merged method
    GridSpec spec;
    spec.gammas = {1.0, 1.05, 1.1, 1.15, 1.2, 1.25};
    spec.thetas = {1.0, 1.1};
    spec.methods = {Method::merged, Method::bonferroni};
    auto rows = sensitivity_grid(kGroups, spec);
    for (const auto& row : rows) {
        for (const auto& other : rows) {
            if (other.method != row.method)
                continue;
            if (other.gamma >= row.gamma && other.theta >= row.theta) {
                if (row.method == Method::merged)
                    CHECK(other.afe_lower <= row.afe_lower + 1e-12);
                // rejection at the larger biases implies rejection below
                if (other.p_value_afe0 < other.alpha)
                    CHECK(row.p_value_afe0 < row.alpha);
            }
        }
    }
}

TEST_CASE("degenerate tables") {
    PairCounts empty{0, 0, 0, 25};
    CHECK(min_ci_attributable(empty, {1.0, 1.0}, 0.05).a_star == 0);
    CHECK(test_afe_zero(empty, {1.0, 1.0}) == 1.0);

    CHECK_THROWS_AS(min_ci_attributable(kOverall, {1.0, 1.0}, 0.7), std::domain_error);
    CHECK_THROWS_AS(min_ci_attributable(kOverall, {0.8, 1.0}, 0.05), std::domain_error);
    CHECK_THROWS_AS(allocation_upper_pvalue(kOverall, 104, {1.0, 1.0}), std::domain_error);
}

TEST_CASE("combined scan handles allocations past the discordant capacity") {
    // capacity 4 = 3 discordant + 1 concordant exposed case
    std::vector<GroupCounts> tiny{{"t", {1, 3, 2, 10}}, {"u", {0, 2, 3, 10}}};
    MinCiResult r = min_ci_attributable(tiny, Method::bonferroni, {1.0, 1.0}, 0.05);
    CHECK(r.a_star >= 0);
    CHECK(r.a_star <= 6);
    CHECK(!r.saturated);

    double p_all = allocation_upper_pvalue(tiny[0].counts, 4, {1.0, 1.0});
    CHECK(p_all > 0.5);
}
