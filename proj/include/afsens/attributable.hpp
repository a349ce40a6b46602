#ifndef AFSENS_ATTRIBUTABLE_HPP
#define AFSENS_ATTRIBUTABLE_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afsens/bounds.hpp"
#include "afsens/study.hpp"

namespace afsens {

enum class Method {
    merged,
    stouffer,
    weighted_stouffer,
    fisher,
    truncated,
    bonferroni,
};

std::string to_string(Method method);
std::optional<Method> method_from_string(const std::string& name);
// all six methods, in the fixed order above
std::span<const Method> all_methods();

// Pair counts for one case subtype.
struct GroupCounts {
    std::string label;
    PairCounts counts;
};

// Upper-bound P-value for a compatible null attributing a0 cases, allocated
// to exposed-case discordant pairs first and to concordant-exposed pairs only
// beyond that capacity. exact switches the Poisson-binomial tail in for the
// normal approximation.
double allocation_upper_pvalue(const PairCounts& counts, long a0, const SensParams& params,
                               bool exact = false);

// Upper-bound P-value for H0: no attributable cases (a0 = 0).
double test_afe_zero(const PairCounts& counts, const SensParams& params, bool exact = false);

// Combined version across subtypes: per-group p-values at zero allocation fed
// through the requested combiner. Weighted Stouffer weights are sqrt(pairs)
// per group.
double test_afe_zero(std::span<const GroupCounts> groups, Method method,
                     const SensParams& params, double trunc = 0.10, bool exact = false);

// A compatible null hypothesis, expressed as per-subtype attributable counts.
// Only exposed cases can be attributable, so each count is capped by its
// group's exposed cases; which sets are nulled follows from exchangeability
// and the discordant-first convention.
struct HypothesisAllocation {
    std::vector<long> per_group;

    long total() const;
};

// Combined upper-bound P-value under a specific allocation.
double combined_upper_pvalue(std::span<const GroupCounts> groups, Method method,
                             const HypothesisAllocation& allocation, const SensParams& params,
                             double trunc = 0.10, bool exact = false);

struct MinCiResult {
    long a_star = 0;       // smallest attributable count the data cannot reject
    double afe_lower = 0;  // a_star / exposed cases
    bool saturated = false;
};

// One-sided minimum confidence interval {A >= a_star}: linear scan over
// a0 = 0, 1, 2, ... returning the first a0 whose upper-bound P-value reaches
// alpha (rejection is strict p < alpha).
MinCiResult min_ci_attributable(const PairCounts& counts, const SensParams& params,
                                double alpha, bool exact = false);

// Subtype-combined version: smallest total a0 such that the maximum of the
// combined P-value over all compatible per-group compositions of a0 reaches
// alpha.
MinCiResult min_ci_attributable(std::span<const GroupCounts> groups, Method method,
                                const SensParams& params, double alpha, double trunc = 0.10,
                                bool exact = false);

struct MaxCiResult {
    long a_upper = 0; // {A <= a_upper}
    bool saturated = false;
};

// One-sided maximum confidence interval via the lower-bound probabilities:
// scan a0 upward until the lower-tail acceptance probability reaches
// 1 - alpha, returning that stopping point.
MaxCiResult max_ci_attributable(const PairCounts& counts, const SensParams& params,
                                double alpha, bool exact = false);

// General matched sets (any size >= 2), merged analysis only. Collapses each
// set to its exposure profile and applies the same scan with per-set bounds.
double test_afe_zero_merged(const Study& study, const SensParams& params, bool exact = false);
MinCiResult min_ci_attributable(const Study& study, const SensParams& params, double alpha,
                                bool exact = false);

struct AnalysisReport {
    double gamma = 1.0;
    double theta = 1.0;
    Method method = Method::merged;
    double alpha = 0.05;
    double p_value_afe0 = 1.0;
    long a_star = 0;
    double afe_lower = 0.0;
    bool saturated = false;
    std::string boundary;          // "", "last_reject" or "first_fail"
    std::optional<long> a_upper;   // merged maximum interval endpoint, on request
};

struct GridSpec {
    std::vector<double> gammas;
    std::vector<double> thetas;
    std::vector<Method> methods;
    double alpha = 0.05;
    double trunc = 0.10;
    bool exact = false;
    bool with_max_ci = false; // fill a_upper on merged rows
};

// One report per (gamma, theta, method), sorted by gamma, theta, method name.
// Per (method, theta) the smallest gamma that no longer rejects H0: AFe = 0
// is flagged first_fail and its rejecting predecessor last_reject.
std::vector<AnalysisReport> sensitivity_grid(std::span<const GroupCounts> groups,
                                             const GridSpec& spec);

// Merged-only grid over general matched sets.
std::vector<AnalysisReport> sensitivity_grid(const Study& study, const GridSpec& spec);

// gamma,theta,method,p_value_afe0,a_star,afe_lower,saturated,boundary_flag
void write_grid_csv(std::span<const AnalysisReport> reports, std::ostream& out);

} // namespace afsens

#endif
