#include "afsens/attributable.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "afsens/combine.hpp"
#include "afsens/stats.hpp"

namespace afsens {

namespace {

constexpr Method kAllMethods[] = {
    Method::merged,       Method::stouffer, Method::weighted_stouffer,
    Method::fisher,       Method::truncated, Method::bonferroni,
};

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 0.5))
        throw std::domain_error("alpha must be in (0, 0.5]");
}

// Discordant-first allocation of a0 attributable cases within one table.
// Concordant-exposed sets cancel against the threshold whether or not they
// are nulled, so the reduced statistic only sees b - nb successes needed out
// of b + c - nb pairs at p = gamma theta / (1 + gamma theta).
struct ReducedPairs {
    long need;   // successes needed
    long trials; // discordant pairs kept
    double p;    // per-pair upper-bound probability
};

ReducedPairs reduce_allocation(const PairCounts& counts, long a0, const SensParams& params) {
    if (a0 < 0)
        throw std::domain_error("attributable count must be nonnegative");
    if (a0 > counts.exposed_cases())
        throw std::domain_error("attributable count exceeds exposed cases");
    long nb = std::min(a0, counts.b);
    double gt = params.gamma * params.theta;
    return {counts.b - nb, counts.b + counts.c - nb, gt / (1.0 + gt)};
}

double reduced_pvalue(const ReducedPairs& r, bool exact) {
    if (r.trials == 0)
        return r.need <= 0 ? 1.0 : 0.0;
    if (exact) {
        std::vector<double> probs(static_cast<std::size_t>(r.trials), r.p);
        return pb_tail_exact(probs, r.need);
    }
    double mean = static_cast<double>(r.trials) * r.p;
    double var = mean * (1.0 - r.p);
    return normal_sf((static_cast<double>(r.need) - mean) / std::sqrt(var));
}

std::vector<double> group_weights(std::span<const GroupCounts> groups) {
    std::vector<double> w;
    w.reserve(groups.size());
    for (const auto& g : groups)
        w.push_back(std::sqrt(static_cast<double>(g.counts.pairs())));
    return w;
}

void finish_grid(std::vector<AnalysisReport>& reports, const GridSpec& spec) {
    std::sort(reports.begin(), reports.end(),
              [](const AnalysisReport& l, const AnalysisReport& r) {
                  if (l.gamma != r.gamma)
                      return l.gamma < r.gamma;
                  if (l.theta != r.theta)
                      return l.theta < r.theta;
                  return to_string(l.method) < to_string(r.method);
              });

    // bold-row convention: per (method, theta) mark the transition across the
    // gamma grid
    for (double theta : spec.thetas) {
        for (Method method : spec.methods) {
            std::vector<AnalysisReport*> rows;
            for (auto& rep : reports)
                if (rep.theta == theta && rep.method == method)
                    rows.push_back(&rep);
            std::sort(rows.begin(), rows.end(),
                      [](auto* l, auto* r) { return l->gamma < r->gamma; });
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i]->p_value_afe0 >= rows[i]->alpha) {
                    rows[i]->boundary = "first_fail";
                    if (i > 0 && rows[i - 1]->p_value_afe0 < rows[i - 1]->alpha)
                        rows[i - 1]->boundary = "last_reject";
                    break;
                }
            }
        }
    }
}

double combine(Method method, std::span<const double> ps, std::span<const double> weights,
               double trunc) {
    switch (method) {
    case Method::stouffer:
        return stouffer(ps);
    case Method::weighted_stouffer:
        return weighted_stouffer(ps, weights);
    case Method::fisher:
        return fisher(ps);
    case Method::truncated:
        return truncated_product(ps, trunc);
    case Method::bonferroni:
        return bonferroni(ps);
    case Method::merged:
        break;
    }
    throw std::logic_error("merged is not a p-value combiner");
}

} // namespace

std::string to_string(Method method) {
    switch (method) {
    case Method::merged:
        return "merged";
    case Method::stouffer:
        return "stouffer";
    case Method::weighted_stouffer:
        return "weighted_stouffer";
    case Method::fisher:
        return "fisher";
    case Method::truncated:
        return "truncated";
    case Method::bonferroni:
        return "bonferroni";
    }
    return "unknown";
}

std::optional<Method> method_from_string(const std::string& name) {
    for (Method m : kAllMethods)
        if (to_string(m) == name)
            return m;
    return std::nullopt;
}

std::span<const Method> all_methods() {
    return kAllMethods;
}

double allocation_upper_pvalue(const PairCounts& counts, long a0, const SensParams& params,
                               bool exact) {
    check_sens_params(params);
    return reduced_pvalue(reduce_allocation(counts, a0, params), exact);
}

double test_afe_zero(const PairCounts& counts, const SensParams& params, bool exact) {
    return allocation_upper_pvalue(counts, 0, params, exact);
}

double test_afe_zero(std::span<const GroupCounts> groups, Method method,
                     const SensParams& params, double trunc, bool exact) {
    if (groups.empty())
        throw std::domain_error("need at least one group");
    if (method == Method::merged) {
        PairCounts total;
        for (const auto& g : groups)
            total += g.counts;
        return test_afe_zero(total, params, exact);
    }
    std::vector<double> ps;
    ps.reserve(groups.size());
    for (const auto& g : groups)
        ps.push_back(test_afe_zero(g.counts, params, exact));
    auto weights = group_weights(groups);
    return combine(method, ps, weights, trunc);
}

MinCiResult min_ci_attributable(const PairCounts& counts, const SensParams& params,
                                double alpha, bool exact) {
    check_sens_params(params);
    check_alpha(alpha);
    long capacity = counts.exposed_cases();
    for (long a0 = 0; a0 <= capacity; ++a0) {
        if (allocation_upper_pvalue(counts, a0, params, exact) >= alpha)
            return {a0, capacity > 0 ? static_cast<double>(a0) / capacity : 0.0, false};
    }
    return {capacity, capacity > 0 ? 1.0 : 0.0, true};
}

long HypothesisAllocation::total() const {
    return std::accumulate(per_group.begin(), per_group.end(), 0L);
}

double combined_upper_pvalue(std::span<const GroupCounts> groups, Method method,
                             const HypothesisAllocation& allocation, const SensParams& params,
                             double trunc, bool exact) {
    if (groups.empty())
        throw std::domain_error("need at least one group");
    if (allocation.per_group.size() != groups.size())
        throw std::domain_error("allocation must list one count per group");
    if (method == Method::merged) {
        PairCounts total;
        for (const auto& g : groups)
            total += g.counts;
        return allocation_upper_pvalue(total, allocation.total(), params, exact);
    }
    std::vector<double> ps;
    ps.reserve(groups.size());
    for (std::size_t k = 0; k < groups.size(); ++k)
        ps.push_back(allocation_upper_pvalue(groups[k].counts, allocation.per_group[k], params,
                                             exact));
    auto weights = group_weights(groups);
    return combine(method, ps, weights, trunc);
}

MinCiResult min_ci_attributable(std::span<const GroupCounts> groups, Method method,
                                const SensParams& params, double alpha, double trunc,
                                bool exact) {
    if (groups.empty())
        throw std::domain_error("need at least one group");
    check_sens_params(params);
    check_alpha(alpha);
    if (method == Method::merged) {
        PairCounts total;
        for (const auto& g : groups)
            total += g.counts;
        return min_ci_attributable(total, params, alpha, exact);
    }

    const std::size_t L = groups.size();
    auto weights = group_weights(groups);
    std::vector<long> caps(L);
    // per-group p(a) is reused across compositions
    std::vector<std::vector<double>> pcache(L);
    for (std::size_t k = 0; k < L; ++k) {
        caps[k] = groups[k].counts.exposed_cases();
        pcache[k].assign(static_cast<std::size_t>(caps[k]) + 1, -1.0);
    }
    auto group_p = [&](std::size_t k, long a) {
        double& slot = pcache[k][static_cast<std::size_t>(a)];
        if (slot < 0.0)
            slot = allocation_upper_pvalue(groups[k].counts, a, params, exact);
        return slot;
    };

    long capacity = std::accumulate(caps.begin(), caps.end(), 0L);

    std::vector<double> ps(L);
    // worst combined p over compositions of a0, exhaustive with capacity caps
    auto max_combined = [&](long a0) {
        double best = -1.0;
        std::function<void(std::size_t, long)> rec = [&](std::size_t k, long left) {
            if (k + 1 == L) {
                if (left > caps[k])
                    return;
                ps[k] = group_p(k, left);
                best = std::max(best, combine(method, ps, weights, trunc));
                return;
            }
            long hi = std::min(left, caps[k]);
            for (long a = 0; a <= hi; ++a) {
                ps[k] = group_p(k, a);
                rec(k + 1, left - a);
            }
        };
        rec(0, a0);
        return best;
    };

    long exposed = capacity;
    for (long a0 = 0; a0 <= capacity; ++a0) {
        double worst = max_combined(a0);
        if (worst >= alpha)
            return {a0, exposed > 0 ? static_cast<double>(a0) / exposed : 0.0, false};
    }
    return {capacity, exposed > 0 ? 1.0 : 0.0, true};
}

MaxCiResult max_ci_attributable(const PairCounts& counts, const SensParams& params,
                                double alpha, bool exact) {
    check_sens_params(params);
    check_alpha(alpha);
    long capacity = counts.exposed_cases();
    double q = 1.0 / (1.0 + params.gamma); // lower-bound probability per discordant pair
    for (long a0 = 0; a0 <= capacity; ++a0) {
        long nb = std::min(a0, counts.b);
        long trials = counts.b + counts.c - nb;
        long need = counts.b - nb;
        double accept;
        if (trials == 0) {
            accept = need <= 0 ? 1.0 : 0.0;
        } else if (exact) {
            std::vector<double> probs(static_cast<std::size_t>(trials), q);
            accept = pb_tail_exact(probs, need);
        } else {
            double mean = static_cast<double>(trials) * q;
            accept = normal_sf((static_cast<double>(need) - mean) /
                               std::sqrt(mean * (1.0 - q)));
        }
        if (accept >= 1.0 - alpha)
            return {a0, false};
    }
    return {capacity, true};
}

namespace {

// per-set profile for the general merged path
struct SetTerm {
    double upper;        // upper-bound probability with the case kept
    bool exposed_case;
};

std::vector<SetTerm> set_terms(const Study& study, const SensParams& params) {
    std::vector<SetTerm> terms;
    terms.reserve(study.sets.size());
    for (const auto& set : study.sets) {
        auto b = attributable_prob_bounds(set.exposed_total(), 1, set.size(), params);
        terms.push_back({b.upper, set.case_exposed()});
    }
    return terms;
}

double study_pvalue(const std::vector<SetTerm>& terms, long a0, bool exact) {
    long t = 0;
    for (const auto& term : terms)
        t += term.exposed_case;
    if (a0 < 0 || a0 > t)
        throw std::domain_error("attributable count exceeds exposed cases");

    // null exposed-case sets with the smallest upper bounds first; for 1:1
    // data this is the discordant-before-concordant convention
    std::vector<double> exposed_uppers;
    for (const auto& term : terms)
        if (term.exposed_case)
            exposed_uppers.push_back(term.upper);
    std::sort(exposed_uppers.begin(), exposed_uppers.end());

    std::vector<double> probs;
    probs.reserve(terms.size());
    for (const auto& term : terms)
        if (!term.exposed_case && term.upper > 0.0)
            probs.push_back(term.upper);
    for (std::size_t i = static_cast<std::size_t>(a0); i < exposed_uppers.size(); ++i)
        probs.push_back(exposed_uppers[i]);

    if (exact)
        return pb_tail_exact(probs, t - a0);
    if (probs.empty())
        return t - a0 <= 0 ? 1.0 : 0.0;
    return tail_normal(t, a0, probs);
}

} // namespace

double test_afe_zero_merged(const Study& study, const SensParams& params, bool exact) {
    check_sens_params(params);
    return study_pvalue(set_terms(study, params), 0, exact);
}

MinCiResult min_ci_attributable(const Study& study, const SensParams& params, double alpha,
                                bool exact) {
    check_sens_params(params);
    check_alpha(alpha);
    auto terms = set_terms(study, params);
    long capacity = 0;
    for (const auto& term : terms)
        capacity += term.exposed_case;
    for (long a0 = 0; a0 <= capacity; ++a0) {
        if (study_pvalue(terms, a0, exact) >= alpha)
            return {a0, capacity > 0 ? static_cast<double>(a0) / capacity : 0.0, false};
    }
    return {capacity, capacity > 0 ? 1.0 : 0.0, true};
}

std::vector<AnalysisReport> sensitivity_grid(std::span<const GroupCounts> groups,
                                             const GridSpec& spec) {
    if (groups.empty())
        throw std::domain_error("need at least one group");
    if (spec.gammas.empty() || spec.thetas.empty() || spec.methods.empty())
        throw std::domain_error("gamma, theta and method lists must be nonempty");
    check_alpha(spec.alpha);

    PairCounts total;
    for (const auto& g : groups)
        total += g.counts;
    long exposed = total.exposed_cases();

    std::vector<AnalysisReport> reports;
    reports.reserve(spec.gammas.size() * spec.thetas.size() * spec.methods.size());
    for (double gamma : spec.gammas) {
        for (double theta : spec.thetas) {
            SensParams params{gamma, theta};
            for (Method method : spec.methods) {
                AnalysisReport rep;
                rep.gamma = gamma;
                rep.theta = theta;
                rep.method = method;
                rep.alpha = spec.alpha;
                rep.p_value_afe0 =
                    test_afe_zero(groups, method, params, spec.trunc, spec.exact);
                MinCiResult ci = min_ci_attributable(groups, method, params, spec.alpha,
                                                     spec.trunc, spec.exact);
                rep.a_star = ci.a_star;
                rep.afe_lower = exposed > 0 ? static_cast<double>(ci.a_star) / exposed : 0.0;
                rep.saturated = ci.saturated;
                if (spec.with_max_ci && method == Method::merged)
                    rep.a_upper = max_ci_attributable(total, params, spec.alpha).a_upper;
                reports.push_back(std::move(rep));
            }
        }
    }

    finish_grid(reports, spec);
    return reports;
}

std::vector<AnalysisReport> sensitivity_grid(const Study& study, const GridSpec& spec) {
    for (Method method : spec.methods)
        if (method != Method::merged)
            throw std::domain_error("only the merged method applies to general matched sets; "
                                    "combined methods need 1:1 paired summaries");
    if (spec.gammas.empty() || spec.thetas.empty() || spec.methods.empty())
        throw std::domain_error("gamma, theta and method lists must be nonempty");
    check_alpha(spec.alpha);

    std::vector<AnalysisReport> reports;
    for (double gamma : spec.gammas) {
        for (double theta : spec.thetas) {
            SensParams params{gamma, theta};
            AnalysisReport rep;
            rep.gamma = gamma;
            rep.theta = theta;
            rep.method = Method::merged;
            rep.alpha = spec.alpha;
            rep.p_value_afe0 = test_afe_zero_merged(study, params, spec.exact);
            MinCiResult ci = min_ci_attributable(study, params, spec.alpha, spec.exact);
            rep.a_star = ci.a_star;
            rep.afe_lower = ci.afe_lower;
            rep.saturated = ci.saturated;
            reports.push_back(std::move(rep));
        }
    }
    finish_grid(reports, spec);
    return reports;
}

void write_grid_csv(std::span<const AnalysisReport> reports, std::ostream& out) {
    out << "gamma,theta,method,p_value_afe0,a_star,afe_lower,saturated,boundary_flag\n";
    for (const auto& rep : reports) {
        std::ostringstream row;
        row.precision(6);
        row << rep.gamma << ',' << rep.theta << ',' << to_string(rep.method) << ','
            << rep.p_value_afe0 << ',' << rep.a_star << ',' << rep.afe_lower << ','
            << (rep.saturated ? 1 : 0) << ',' << rep.boundary;
        out << row.str() << '\n';
    }
}

} // namespace afsens
