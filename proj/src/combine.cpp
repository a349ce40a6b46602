#include "afsens/combine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "afsens/stats.hpp"

namespace afsens {

namespace {

void check_pvalues(std::span<const double> ps) {
    if (ps.empty())
        throw std::domain_error("need at least one p-value");
    for (double p : ps)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("p-value out of [0, 1]");
}

// keep quantile arguments away from the poles; exact tails legitimately emit
// 0 and 1 inside the analysis pipeline
double clamp_open_unit(double p) {
    const double lo = std::numeric_limits<double>::min();
    const double hi = 1.0 - std::ldexp(1.0, -53);
    return std::clamp(p, lo, hi);
}

} // namespace

double bonferroni(std::span<const double> ps) {
    check_pvalues(ps);
    double m = *std::min_element(ps.begin(), ps.end());
    return std::min(1.0, static_cast<double>(ps.size()) * m);
}

double fisher(std::span<const double> ps) {
    check_pvalues(ps);
    double stat = 0.0;
    for (double p : ps)
        stat -= 2.0 * std::log(clamp_open_unit(p));
    return chi_squared_sf(stat, 2.0 * static_cast<double>(ps.size()));
}

double truncated_product(std::span<const double> ps, double trunc) {
    check_pvalues(ps);
    if (!(trunc > 0.0 && trunc <= 1.0))
        throw std::domain_error("truncation point must be in (0, 1]");

    const long L = static_cast<long>(ps.size());
    double log_w = 0.0;
    long below = 0;
    for (double p : ps) {
        if (p <= trunc) {
            if (p == 0.0)
                return 0.0;
            ++below;
            log_w += std::log(p);
        }
    }
    if (below == 0)
        return 1.0;

    // P(W < w) = sum_k C(L,k) (1-t)^(L-k) [ w sum_{s<k} (k ln t - ln w)^s / s!   if w <= t^k
    //                                       t^k                                  otherwise ]
    const double w = std::exp(log_w);
    const double log_t = std::log(trunc);
    double total = 0.0;
    double binom = 1.0; // C(L, k), updated incrementally
    for (long k = 1; k <= L; ++k) {
        binom = binom * static_cast<double>(L - k + 1) / static_cast<double>(k);
        double weight = binom * std::pow(1.0 - trunc, static_cast<double>(L - k));
        double term;
        if (log_w <= static_cast<double>(k) * log_t) {
            double x = static_cast<double>(k) * log_t - log_w; // >= 0
            double series = 1.0, powfac = 1.0;
            for (long s = 1; s < k; ++s) {
                powfac *= x / static_cast<double>(s);
                series += powfac;
            }
            term = w * series;
        } else {
            term = std::pow(trunc, static_cast<double>(k));
        }
        total += weight * term;
    }
    return std::min(total, 1.0);
}

double stouffer(std::span<const double> ps) {
    check_pvalues(ps);
    double sum = 0.0;
    for (double p : ps)
        sum -= normal_quantile(clamp_open_unit(p));
    return normal_sf(sum / std::sqrt(static_cast<double>(ps.size())));
}

double weighted_stouffer(std::span<const double> ps, std::span<const double> weights) {
    check_pvalues(ps);
    if (weights.size() != ps.size())
        throw std::domain_error("weights and p-values must have the same length");
    double sum = 0.0, wsq = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!(weights[i] > 0.0))
            throw std::domain_error("weights must be strictly positive");
        sum -= weights[i] * normal_quantile(clamp_open_unit(ps[i]));
        wsq += weights[i] * weights[i];
    }
    return normal_sf(sum / std::sqrt(wsq));
}

} // namespace afsens
