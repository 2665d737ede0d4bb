#pragma once

// Straight-from-the-textbook reference implementations. They share no code
// with the library and favour obviousness over speed.

#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

double mean(const std::vector<double>& xs);
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// O(n^2): rank = 1 + #smaller + (#equal - 1) / 2.
std::vector<double> ranks(const std::vector<double>& xs);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct Test {
  double statistic;
  double p_value;
};

// H = 12/(N(N+1)) sum R_i^2/n_i - 3(N+1), over 1 - sum(t^3 - t)/(N^3 - N).
// p from Boost's chi-squared distribution.
Test kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Two-pass sums of squares, p from Boost's F distribution.
Test anova(const std::vector<std::vector<double>>& groups);

// Rows of 0/1 correctness.
using Grid = std::vector<std::vector<int>>;

// Largest number of questions jointly covered by at most `budget` rows.
std::size_t best_coverage(const Grid& correct, std::size_t budget);
std::size_t coverage(const Grid& correct, const std::vector<std::size_t>& rows);

// Mean over every `size`-subset of columns of the rank agreement between
// full-quiz and sub-quiz scores. Fully tied sides compare the orderings
// obtained by sorting on (score desc, id asc): 1 when equal, else 0.
double exhaustive_stability(const Grid& correct, const std::vector<std::string>& ids, std::size_t size);

}  // namespace oracle
