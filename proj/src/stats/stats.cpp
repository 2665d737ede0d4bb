#include "imgquiz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "imgquiz/error.hpp"

namespace imgquiz::stats {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

void require_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::argument, "correlation inputs differ in length");
  if (x.size() < 2) throw Error(ErrorKind::argument, "correlation needs at least 2 observations");
}

// Series expansion, valid for x < a + 1.
double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEpsilon) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction (modified Lentz) for Q(a, x), valid for x >= a + 1.
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) break;
  }
  return h;
}

void require_groups(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error(ErrorKind::argument, "need at least 2 groups");
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorKind::argument, "group is empty");
  }
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorKind::argument, "mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(ErrorKind::argument, "variance needs at least 2 observations");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    // positions i..j-1 are 0-based; their 1-based mean is (i + 1 + j) / 2
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::undefined_correlation, "correlation undefined for zero-variance input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

TestResult kruskal_wallis(std::span<const std::vector<double>> groups) {
  require_groups(groups);
  std::vector<double> pooled;
  for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
  const double n = static_cast<double>(pooled.size());
  if (pooled.size() < 3) throw Error(ErrorKind::argument, "Kruskal-Wallis needs N >= 3");
  if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) {
    throw Error(ErrorKind::degenerate, "all observations identical");
  }

  const auto ranks = average_ranks(pooled);
  double weighted = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
    weighted += rank_sum * rank_sum / static_cast<double>(g.size());
    offset += g.size();
  }
  double h = 12.0 / (n * (n + 1.0)) * weighted - 3.0 * (n + 1.0);

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  h /= 1.0 - tie_sum / (n * n * n - n);
  h = std::max(h, 0.0);

  TestResult r;
  r.statistic = h;
  r.df1 = static_cast<double>(groups.size() - 1);
  r.p_value = chi_square_upper_tail(h, r.df1);
  return r;
}

TestResult anova_oneway(std::span<const std::vector<double>> groups) {
  require_groups(groups);
  std::size_t total = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    total += g.size();
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const std::size_t k = groups.size();
  if (total <= k) throw Error(ErrorKind::argument, "ANOVA needs more observations than groups");
  const double grand_mean = grand_sum / static_cast<double>(total);

  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ssb += static_cast<double>(g.size()) * (m - grand_mean) * (m - grand_mean);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  TestResult r;
  r.df1 = static_cast<double>(k - 1);
  r.df2 = static_cast<double>(total - k);
  const double msb = ssb / r.df1;
  const double msw = ssw / r.df2;
  if (msw == 0.0) {
    if (msb == 0.0) throw Error(ErrorKind::degenerate, "ANOVA with zero between and within variance");
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  r.statistic = msb / msw;
  r.p_value = f_upper_tail(r.statistic, r.df1, r.df2);
  return r;
}

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw Error(ErrorKind::argument, "incomplete gamma domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return std::clamp(gamma_series(a, x), 0.0, 1.0);
  return std::clamp(1.0 - gamma_continued_fraction(a, x), 0.0, 1.0);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw Error(ErrorKind::argument, "incomplete gamma domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_continued_fraction(a, x), 0.0, 1.0);
}

double regularized_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0 || x < 0.0 || x > 1.0) {
    throw Error(ErrorKind::argument, "incomplete beta domain");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::clamp(front * beta_continued_fraction(a, b, x) / a, 0.0, 1.0);
  }
  return std::clamp(1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b, 0.0, 1.0);
}

double chi_square_upper_tail(double x, double df) {
  if (df <= 0.0) throw Error(ErrorKind::argument, "chi-square df must be positive");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

double f_upper_tail(double f, double df1, double df2) {
  if (df1 <= 0.0 || df2 <= 0.0) throw Error(ErrorKind::argument, "F df must be positive");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularized_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

}  // namespace imgquiz::stats
