#ifndef AFSENS_BOUNDS_HPP
#define AFSENS_BOUNDS_HPP

#include <span>

namespace afsens {

// Sensitivity parameters: gamma bounds the within-set odds ratio of exposure
// (hidden bias), theta bounds the relative risk that exposure moves a case
// between subtypes (selection bias). Both are 1 in the bias-free model.
struct SensParams {
    double gamma = 1.0;
    double theta = 1.0;
};

void check_sens_params(const SensParams& params);

// Sharp lower/upper success probabilities for one matched set's Bernoulli
// contribution.
struct BernoulliBounds {
    double lower;
    double upper;
};

// Bounds for the sign-score indicator of a set with z_plus exposed units out
// of set_size, hidden bias only:
//   lower = z+ / (z+ + (J - z+) gamma),  upper = gamma z+ / (gamma z+ + (J - z+)).
BernoulliBounds sign_score_bounds(int z_plus, int set_size, double gamma);

// Selection-bias-aware version. The upper bound multiplies the exposure odds
// by gamma*theta; the lower bound does not involve theta.
BernoulliBounds gamma_theta_bounds(int z_plus, int set_size, const SensParams& params);

// Bounds for the attributable-effect indicator under a compatible null that
// leaves rc_plus in {0,1} counterfactual cases in the set. rc_plus = 0 means
// the set's case was hypothesized away and the set cannot contribute.
BernoulliBounds attributable_prob_bounds(int z_plus, int rc_plus, int set_size,
                                         const SensParams& params);

// Exact P(sum of independent Bernoulli(probs[i]) >= k) by dynamic programming
// over the count distribution. k <= 0 gives 1, k > probs.size() gives 0.
double pb_tail_exact(std::span<const double> probs, long k);

// Normal approximation to P(sum >= t - a0):
//   1 - Phi((t - a0 - sum p) / sqrt(sum p(1-p))).
// A zero-variance sum degenerates to 1 when t - a0 <= sum p, else 0.
double tail_normal(long t, long a0, std::span<const double> probs);

// Closed form of the upper-bound P-value for 1:1 matched pairs with b
// exposed-case and c exposed-referent discordant pairs, testing a compatible
// null that attributes a_star of the b cases to exposure. Uses
// p = gamma theta / (1 + gamma theta) per pair.
double paired_upper_pvalue(long b, long c, long a_star, const SensParams& params);

} // namespace afsens

#endif
