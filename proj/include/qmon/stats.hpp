#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qmon::stats {

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
// series expansion for x < a+1 and Lentz continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-squared distribution with df degrees of freedom.
double chi2_sf(double x, double df);

struct Chi2Result {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Goodness of fit of observed counts against expected probabilities.
Chi2Result chi2_gof(std::span<const std::int64_t> counts,
                    std::span<const double> expected_prob);

// Uniformity special case.
Chi2Result chi2_uniform(std::span<const std::int64_t> counts);

// Two-sample homogeneity test on matched count vectors.
Chi2Result chi2_two_sample(std::span<const std::int64_t> a,
                           std::span<const std::int64_t> b);

// Independence test on a contingency table (row-major, r x c).
Chi2Result chi2_independence(const std::vector<std::vector<std::int64_t>>& table);

// Least-squares slope (and intercept) of y against x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Total variation distance between two probability vectors.
double total_variation(std::span<const double> p, std::span<const double> q);

// Mean and standard error of a sample.
struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
};
MeanSE mean_se(std::span<const double> xs);

// FNV-1a 64-bit, used to fingerprint inputs and output files.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s);

}  // namespace qmon::stats
