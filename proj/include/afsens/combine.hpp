#ifndef AFSENS_COMBINE_HPP
#define AFSENS_COMBINE_HPP

#include <span>

namespace afsens {

// Combination rules for independent one-sided P-values. Every function maps
// [0,1]^L into [0,1] and is nondecreasing in each coordinate.

// L * min(p), clamped at 1.
double bonferroni(std::span<const double> ps);

// -2 sum log(p) against chi-square with 2L degrees of freedom. p = 0 is
// clamped to the smallest positive double and effectively returns 0.
double fisher(std::span<const double> ps);

// Truncated product: the statistic is the product of the p-values not
// exceeding trunc, calibrated by its exact null distribution. trunc = 1
// reproduces fisher. When no p-value clears the truncation point the
// statistic is 1 and the combined p-value is 1.
double truncated_product(std::span<const double> ps, double trunc);

// 1 - Phi(sum Phi^{-1}(1 - p) / sqrt(L)). Inputs are clamped away from 0 and
// 1 so that pipeline-produced boundary values do not blow up the quantile.
double stouffer(std::span<const double> ps);

// Weighted variant, z = sum w_k z_k / sqrt(sum w_k^2); equal weights reduce
// to stouffer.
double weighted_stouffer(std::span<const double> ps, std::span<const double> weights);

} // namespace afsens

#endif
