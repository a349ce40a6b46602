#ifndef AFSENS_SIMULATE_HPP
#define AFSENS_SIMULATE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "afsens/attributable.hpp"
#include "afsens/rng.hpp"
#include "afsens/study.hpp"

namespace afsens {

// Data-generating process for the two-subtype power study. Each dataset draws
// n units with potential outcomes r_T ~ Bern(baseline + delta),
// r_C ~ Bern(baseline), exposure Z ~ Bern(1/2) and observed outcome
// R = Z r_T + (1-Z) r_C; cases are matched 1:1 to randomly chosen distinct
// non-cases and the pairs are collapsed to a 2x2 table.
struct DgpConfig {
    long n = 500;
    double delta1 = 0.2;
    double delta2 = 0.2;
    double baseline = 0.2;
    int reps = 200;
    double alpha = 0.05;
    double trunc = 0.05;
    std::uint64_t seed = 1;
    std::vector<double> gammas = {1.0};
    std::vector<double> thetas = {1.0};
    std::vector<Method> methods = {Method::merged};
    int threads = 0; // 0 = use the AFSENS_THREADS default

    void validate() const;
};

struct GeneratedPairs {
    PairCounts counts;
    long dropped_cases = 0; // cases beyond non-case capacity
};

GeneratedPairs generate_dataset(const DgpConfig& config, double delta, RngStream& rng);

struct PowerCell {
    double delta1, delta2, gamma, theta;
    Method method;
    double power;
    int reps;
    std::uint64_t seed;
};

// Rejection frequency of each method's sensitivity test over the replicate
// pairs of datasets. Replicates use substreams of (seed, replicate index), so
// the table is identical whatever the worker count.
std::vector<PowerCell> run_power_study(const DgpConfig& config);

// delta1,delta2,gamma,theta,method,power,reps,seed
void write_power_csv(const std::vector<PowerCell>& cells, std::ostream& out);

// Flat key-value config file (key = value, '#' comments). Unknown keys are
// rejected. List values are comma separated.
DgpConfig parse_dgp_config(std::istream& in);

int default_thread_count();

} // namespace afsens

#endif
