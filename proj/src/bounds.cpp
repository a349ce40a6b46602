#include "afsens/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "afsens/stats.hpp"

namespace afsens {

void check_sens_params(const SensParams& params) {
    if (!(params.gamma >= 1.0) || !std::isfinite(params.gamma))
        throw std::domain_error("gamma must be >= 1");
    if (!(params.theta >= 1.0) || !std::isfinite(params.theta))
        throw std::domain_error("theta must be >= 1");
}

namespace {

void check_set_shape(int z_plus, int set_size) {
    if (set_size < 2)
        throw std::domain_error("matched set size must be >= 2");
    if (z_plus < 0 || z_plus > set_size)
        throw std::domain_error("exposed count must be in [0, set size]");
}

// z+ weighted by odds multiplier m against the J - z+ others
double odds_fraction(double multiplier, int z_plus, int others) {
    double num = multiplier * z_plus;
    return num / (num + others);
}

} // namespace

BernoulliBounds sign_score_bounds(int z_plus, int set_size, double gamma) {
    return gamma_theta_bounds(z_plus, set_size, SensParams{gamma, 1.0});
}

BernoulliBounds gamma_theta_bounds(int z_plus, int set_size, const SensParams& params) {
    check_set_shape(z_plus, set_size);
    check_sens_params(params);
    int others = set_size - z_plus;
    double lower = z_plus / (z_plus + others * params.gamma);
    double upper = odds_fraction(params.gamma * params.theta, z_plus, others);
    return {lower, upper};
}

BernoulliBounds attributable_prob_bounds(int z_plus, int rc_plus, int set_size,
                                         const SensParams& params) {
    check_set_shape(z_plus, set_size);
    check_sens_params(params);
    if (rc_plus != 0 && rc_plus != 1)
        throw std::domain_error("counterfactual case count must be 0 or 1");
    int m = z_plus * rc_plus;
    if (m == 0)
        return {0.0, 0.0};
    int others = set_size - m;
    double lower = m / (m + others * params.gamma);
    double upper = odds_fraction(params.gamma * params.theta, m, others);
    return {lower, upper};
}

double pb_tail_exact(std::span<const double> probs, long k) {
    long ones = 0;
    std::vector<double> active;
    active.reserve(probs.size());
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("pb_tail_exact: probability out of [0, 1]");
        if (p == 1.0)
            ++ones;
        else if (p > 0.0)
            active.push_back(p);
    }
    long n = static_cast<long>(probs.size());
    if (k <= 0)
        return 1.0;
    if (k > n)
        return 0.0;

    // deterministic successes only shift the threshold
    long need = k - ones;
    long m = static_cast<long>(active.size());
    if (need <= 0)
        return 1.0;
    if (need > m)
        return 0.0;

    std::vector<double> dist(static_cast<std::size_t>(m) + 1, 0.0);
    dist[0] = 1.0;
    for (long i = 0; i < m; ++i) {
        double p = active[static_cast<std::size_t>(i)];
        for (long j = i + 1; j >= 1; --j)
            dist[j] = dist[j] * (1.0 - p) + dist[j - 1] * p;
        dist[0] *= (1.0 - p);
    }
    // sum the smaller side for accuracy
    double head = 0.0, tail = 0.0;
    for (long j = 0; j < need; ++j)
        head += dist[j];
    for (long j = need; j <= m; ++j)
        tail += dist[j];
    return need > m / 2 ? tail : 1.0 - head;
}

double tail_normal(long t, long a0, std::span<const double> probs) {
    if (probs.empty())
        throw std::domain_error("tail_normal: empty probability vector");
    double mean = 0.0, var = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("tail_normal: probability out of [0, 1]");
        mean += p;
        var += p * (1.0 - p);
    }
    double shifted = static_cast<double>(t - a0);
    if (var <= 0.0)
        return shifted <= mean ? 1.0 : 0.0;
    return normal_sf((shifted - mean) / std::sqrt(var));
}

double paired_upper_pvalue(long b, long c, long a_star, const SensParams& params) {
    check_sens_params(params);
    if (b < 0 || c < 0)
        throw std::domain_error("pair counts must be nonnegative");
    if (a_star < 0)
        throw std::domain_error("attributable count must be nonnegative");
    if (a_star > b)
        throw std::domain_error("more attributable cases than exposed discordant cases");
    if (b + c - a_star < 1)
        throw std::domain_error("no discordant pairs left under the hypothesis");
    double gt = params.gamma * params.theta;
    double p = gt / (1.0 + gt);
    double n = static_cast<double>(b + c - a_star);
    double z = (static_cast<double>(b - a_star) - n * p) / std::sqrt(n * p * (1.0 - p));
    return normal_sf(z);
}

} // namespace afsens
