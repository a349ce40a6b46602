#ifndef AFSENS_POWER_HPP
#define AFSENS_POWER_HPP

#include <optional>
#include <vector>

#include "afsens/bounds.hpp"
#include "afsens/simulate.hpp"
#include "afsens/study.hpp"

namespace afsens {

// Inputs for the analytic power approximations: per-group attributable totals
// and the per-set upper-bound probabilities evaluated under a zero null (all
// observed cases kept) at the analysis (gamma, theta).
struct PowerGroup {
    long a_star = 0;
    std::vector<double> probs;
};

struct PowerSpec {
    double alpha = 0.05;
    std::vector<PowerGroup> groups;
    std::optional<std::vector<double>> weights; // default sqrt(group set count)
};

// One per-set upper-bound probability per pair: a ones, b+c at
// gamma theta / (1 + gamma theta), d zeros.
std::vector<double> upper_probs(const PairCounts& counts, const SensParams& params);

// 1 - Phi(Z_{1-alpha} - a* / sqrt(sum p(1-p))) over all sets pooled.
double power_merged(const PowerSpec& spec);

// 1 - Phi(Z_{1-alpha} - sum_k a*_k / sd_k / sqrt(L)).
double power_stouffer(const PowerSpec& spec);

// Weighted version with z = sum w_k a*_k / sd_k / sqrt(sum w_k^2).
double power_weighted_stouffer(const PowerSpec& spec);

// Numeric comparison of the two displays on a concrete instance; no
// inequality is assumed.
bool power_dominance_check(const PowerSpec& merged_spec, const PowerSpec& combined_spec);

// Monte Carlo rejection frequency of the test the analytic formula
// approximates: draws T = a* + sum Bern(probs) per group and rejects when the
// (combined) upper-bound P-value is at most alpha. method must be merged,
// stouffer or weighted_stouffer. Deterministic in (spec, reps, seed).
double power_monte_carlo(const PowerSpec& spec, Method method, int reps, std::uint64_t seed);

// Which slice of the two-dataset DGP the design-sensitivity run tests.
enum class DesignScope { group1, group2, combined };

struct DesignSensConfig {
    DgpConfig dgp;             // dgp.n is the large-sample size, dgp.reps the MC replicates
    DesignScope scope = DesignScope::combined;
    Method method = Method::merged; // combiner when scope is combined
    double theta_star = 1.0;
    double alpha = 0.05;
    double trunc = 0.05;
    double tol = 0.05;
    double gamma_lo = 1.0;
    double gamma_hi = 10.0;
};

struct PowerPoint {
    double gamma;
    double theta;
    double power;
    double mc_stderr;
};

struct DesignSensResult {
    double estimate;
    double half_width;
    std::vector<PowerPoint> curve; // coarse grid evaluated before bisection
};

// Bisection for the gamma at which Monte Carlo power crosses 0.5. Replicate
// tables are drawn once and reused across gamma values (common random
// numbers), so the power curve is exactly nonincreasing and the result is
// deterministic in (config, seed). Throws when power at gamma_hi is still
// above 0.5; returns gamma_lo when the curve starts at or below 0.5.
DesignSensResult estimate_design_sensitivity(const DesignSensConfig& config);

} // namespace afsens

#endif
