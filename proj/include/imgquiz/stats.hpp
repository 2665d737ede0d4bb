#pragma once

#include <span>
#include <vector>

// Correlations, rank-based and parametric group tests, and the distribution
// tails they need. Everything here is a pure function.
namespace imgquiz::stats {

double mean(std::span<const double> xs);

// Sum of squared deviations over n - 1. Throws Error(argument) for n < 2.
double sample_variance(std::span<const double> xs);

// 1-based ranks; tied values share the mean of the positions they span.
std::vector<double> average_ranks(std::span<const double> xs);

// Throws Error(argument) on length mismatch or n < 2,
// Error(undefined_correlation) when either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of the average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df1 = 0.0;
  double df2 = 0.0;
};

// H statistic with tie correction; p from the chi-square tail on k - 1 df.
// Throws Error(argument) for fewer than 2 groups, an empty group or N < 3,
// Error(degenerate) when every observation is identical.
TestResult kruskal_wallis(std::span<const std::vector<double>> groups);

// One-way ANOVA F = MSB / MSW with p from the F(k - 1, N - k) tail.
// MSW == 0 with MSB > 0 yields F = +inf and p = 0; both zero throws
// Error(degenerate).
TestResult anova_oneway(std::span<const std::vector<double>> groups);

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b).
double regularized_beta(double a, double b, double x);

double chi_square_upper_tail(double x, double df);
double f_upper_tail(double f, double df1, double df2);

}  // namespace imgquiz::stats
