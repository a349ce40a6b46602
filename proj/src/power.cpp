#include "afsens/power.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "afsens/stats.hpp"

namespace afsens {

std::vector<double> upper_probs(const PairCounts& counts, const SensParams& params) {
    check_sens_params(params);
    double gt = params.gamma * params.theta;
    double p = gt / (1.0 + gt);
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(counts.pairs()));
    probs.insert(probs.end(), static_cast<std::size_t>(counts.a), 1.0);
    probs.insert(probs.end(), static_cast<std::size_t>(counts.b + counts.c), p);
    probs.insert(probs.end(), static_cast<std::size_t>(counts.d), 0.0);
    return probs;
}

namespace {

void check_spec(const PowerSpec& spec) {
    if (spec.groups.empty())
        throw std::domain_error("power spec needs at least one group");
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
        throw std::domain_error("alpha must be in (0, 1)");
    for (const auto& g : spec.groups) {
        if (g.a_star < 0)
            throw std::domain_error("attributable totals must be nonnegative");
        for (double p : g.probs)
            if (!(p >= 0.0 && p <= 1.0))
                throw std::domain_error("probability out of [0, 1]");
    }
    if (spec.weights && spec.weights->size() != spec.groups.size())
        throw std::domain_error("weights must match the group count");
}

double group_sd(const PowerGroup& g) {
    double var = 0.0;
    for (double p : g.probs)
        var += p * (1.0 - p);
    return std::sqrt(var);
}

// a / sd with the zero-variance limits: infinity when a > 0, zero otherwise
double noncentrality(long a_star, double sd) {
    if (sd > 0.0)
        return static_cast<double>(a_star) / sd;
    return a_star > 0 ? std::numeric_limits<double>::infinity() : 0.0;
}

double power_from_shift(double alpha, double shift) {
    if (std::isinf(shift))
        return 1.0;
    return normal_sf(normal_quantile(1.0 - alpha) - shift);
}

std::vector<double> effective_weights(const PowerSpec& spec) {
    if (spec.weights)
        return *spec.weights;
    std::vector<double> w;
    w.reserve(spec.groups.size());
    for (const auto& g : spec.groups)
        w.push_back(std::sqrt(static_cast<double>(g.probs.size())));
    return w;
}

} // namespace

double power_merged(const PowerSpec& spec) {
    check_spec(spec);
    long a_total = 0;
    double var = 0.0;
    for (const auto& g : spec.groups) {
        a_total += g.a_star;
        double sd = group_sd(g);
        var += sd * sd;
    }
    return power_from_shift(spec.alpha, noncentrality(a_total, std::sqrt(var)));
}

double power_stouffer(const PowerSpec& spec) {
    check_spec(spec);
    double sum = 0.0;
    for (const auto& g : spec.groups) {
        double nc = noncentrality(g.a_star, group_sd(g));
        if (std::isinf(nc))
            return 1.0;
        sum += nc;
    }
    return power_from_shift(spec.alpha, sum / std::sqrt(static_cast<double>(spec.groups.size())));
}

double power_weighted_stouffer(const PowerSpec& spec) {
    check_spec(spec);
    auto weights = effective_weights(spec);
    double sum = 0.0, wsq = 0.0;
    for (std::size_t k = 0; k < spec.groups.size(); ++k) {
        if (!(weights[k] > 0.0))
            throw std::domain_error("weights must be strictly positive");
        double nc = noncentrality(spec.groups[k].a_star, group_sd(spec.groups[k]));
        if (std::isinf(nc))
            return 1.0;
        sum += weights[k] * nc;
        wsq += weights[k] * weights[k];
    }
    return power_from_shift(spec.alpha, sum / std::sqrt(wsq));
}

bool power_dominance_check(const PowerSpec& merged_spec, const PowerSpec& combined_spec) {
    double merged = power_merged(merged_spec);
    double combined = combined_spec.weights ? power_weighted_stouffer(combined_spec)
                                            : power_stouffer(combined_spec);
    return combined >= merged - 1e-12;
}

double power_monte_carlo(const PowerSpec& spec, Method method, int reps, std::uint64_t seed) {
    check_spec(spec);
    if (reps < 1)
        throw std::domain_error("reps must be at least 1");
    if (method != Method::merged && method != Method::stouffer &&
        method != Method::weighted_stouffer)
        throw std::domain_error("power_monte_carlo supports merged and Stouffer tests");

    const std::size_t L = spec.groups.size();
    std::vector<double> mu(L, 0.0), sd(L, 0.0);
    for (std::size_t k = 0; k < L; ++k) {
        for (double p : spec.groups[k].probs)
            mu[k] += p;
        sd[k] = group_sd(spec.groups[k]);
    }
    auto weights = effective_weights(spec);
    double mu_all = 0.0, var_all = 0.0, wsq = 0.0;
    long a_all = 0;
    for (std::size_t k = 0; k < L; ++k) {
        mu_all += mu[k];
        var_all += sd[k] * sd[k];
        wsq += weights[k] * weights[k];
        a_all += spec.groups[k].a_star;
    }

    long rej = 0;
    for (int r = 0; r < reps; ++r) {
        RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(r));
        double z_combined = 0.0;
        long total = a_all;
        for (std::size_t k = 0; k < L; ++k) {
            long x = spec.groups[k].a_star;
            for (double p : spec.groups[k].probs) {
                if (p == 0.0)
                    continue;
                if (p == 1.0 || rng.bernoulli(p))
                    ++x;
            }
            if (method == Method::merged) {
                total += x - spec.groups[k].a_star;
            } else {
                double zk = sd[k] > 0.0 ? (static_cast<double>(x) - mu[k]) / sd[k]
                                        : (static_cast<double>(x) >= mu[k] ? 1e9 : -1e9);
                z_combined += (method == Method::stouffer ? 1.0 : weights[k]) * zk;
            }
        }
        double p_value;
        if (method == Method::merged) {
            p_value = var_all > 0.0
                          ? normal_sf((static_cast<double>(total) - mu_all) / std::sqrt(var_all))
                          : (static_cast<double>(total) <= mu_all ? 1.0 : 0.0);
        } else {
            double denom = method == Method::stouffer ? std::sqrt(static_cast<double>(L))
                                                      : std::sqrt(wsq);
            p_value = normal_sf(z_combined / denom);
        }
        if (p_value <= spec.alpha)
            ++rej;
    }
    return static_cast<double>(rej) / static_cast<double>(reps);
}

namespace {

double replicate_pvalue(const std::array<PairCounts, 2>& tables, DesignScope scope,
                        Method method, const SensParams& params, double trunc) {
    switch (scope) {
    case DesignScope::group1:
        return test_afe_zero(tables[0], params);
    case DesignScope::group2:
        return test_afe_zero(tables[1], params);
    case DesignScope::combined: {
        std::array<GroupCounts, 2> groups{GroupCounts{"1", tables[0]},
                                          GroupCounts{"2", tables[1]}};
        return test_afe_zero(groups, method, params, trunc, false);
    }
    }
    throw std::logic_error("bad design scope");
}

} // namespace

DesignSensResult estimate_design_sensitivity(const DesignSensConfig& config) {
    config.dgp.validate();
    if (config.dgp.n < 10000)
        throw std::domain_error("design sensitivity needs a large sample, n >= 10000");
    if (!(config.tol > 0.0))
        throw std::domain_error("tol must be positive");
    if (!(config.theta_star >= 1.0))
        throw std::domain_error("theta_star must be >= 1");
    if (!(config.gamma_lo >= 1.0 && config.gamma_hi > config.gamma_lo))
        throw std::domain_error("need 1 <= gamma_lo < gamma_hi");

    // fixed replicate tables; every gamma is evaluated on the same data
    std::vector<std::array<PairCounts, 2>> tables(static_cast<std::size_t>(config.dgp.reps));
    for (std::size_t r = 0; r < tables.size(); ++r) {
        RngStream rng = RngStream::substream(config.dgp.seed, static_cast<std::uint64_t>(r));
        tables[r][0] = generate_dataset(config.dgp, config.dgp.delta1, rng).counts;
        tables[r][1] = generate_dataset(config.dgp, config.dgp.delta2, rng).counts;
    }

    auto power_at = [&](double gamma) {
        SensParams params{gamma, config.theta_star};
        long rej = 0;
        for (const auto& pair : tables)
            if (replicate_pvalue(pair, config.scope, config.method, params, config.trunc) <=
                config.alpha)
                ++rej;
        return static_cast<double>(rej) / static_cast<double>(tables.size());
    };

    DesignSensResult result;
    const int grid_points = 5;
    for (int i = 0; i < grid_points; ++i) {
        double g = config.gamma_lo +
                   (config.gamma_hi - config.gamma_lo) * i / (grid_points - 1);
        double pw = power_at(g);
        double se = std::sqrt(std::max(pw * (1.0 - pw), 0.0) /
                              static_cast<double>(config.dgp.reps));
        result.curve.push_back({g, config.theta_star, pw, se});
    }
    for (std::size_t i = 1; i < result.curve.size(); ++i)
        if (result.curve[i].power > result.curve[i - 1].power + 1e-12)
            throw std::runtime_error("power curve is not nonincreasing in gamma");

    double lo = config.gamma_lo, hi = config.gamma_hi;
    double p_lo = result.curve.front().power;
    double p_hi = result.curve.back().power;
    if (p_hi > 0.5)
        throw std::runtime_error(
            "power still exceeds 0.5 at gamma_hi; rerun with a wider gamma range");
    if (p_lo <= 0.5) {
        result.estimate = lo;
        result.half_width = 0.0;
        return result;
    }
    while (hi - lo > config.tol) {
        double mid = 0.5 * (lo + hi);
        if (power_at(mid) > 0.5)
            lo = mid;
        else
            hi = mid;
    }
    result.estimate = 0.5 * (lo + hi);
    result.half_width = 0.5 * (hi - lo);
    return result;
}

} // namespace afsens
