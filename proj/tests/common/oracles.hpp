#pragma once

// Direct-formula reference implementations used to check the library. They
// work on plain std::vector and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double central_moment(const std::vector<double>& v, int k) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += std::pow(x - m, k);
  return s / static_cast<double>(v.size());
}

inline bool all_equal(const std::vector<double>& v) {
  for (double x : v)
    if (x != v.front()) return false;
  return true;
}

inline double stdev(const std::vector<double>& v) { return std::sqrt(central_moment(v, 2)); }

inline double skew(const std::vector<double>& v) {
  if (all_equal(v)) return 0.0;
  return central_moment(v, 3) / std::pow(central_moment(v, 2), 1.5);
}

inline double kurtosis(const std::vector<double>& v) {
  if (all_equal(v)) return 0.0;
  const double m2 = central_moment(v, 2);
  return central_moment(v, 4) / (m2 * m2) - 3.0;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mad(const std::vector<double>& v) {
  const double m = median(v);
  std::vector<double> dev;
  for (double x : v) dev.push_back(std::fabs(x - m));
  return median(dev);
}

// Column-wise scalers over a row-major table.
using Table = std::vector<std::vector<double>>;

inline std::vector<double> column(const Table& t, std::size_t j) {
  std::vector<double> c;
  for (const auto& row : t) c.push_back(row[j]);
  return c;
}

inline Table minmax(const Table& fit, const Table& apply) {
  Table out = apply;
  for (std::size_t j = 0; j < fit.front().size(); ++j) {
    const auto c = column(fit, j);
    const double lo = *std::min_element(c.begin(), c.end());
    const double hi = *std::max_element(c.begin(), c.end());
    for (auto& row : out) row[j] = hi > lo ? (row[j] - lo) / (hi - lo) : 0.0;
  }
  return out;
}

inline Table standard(const Table& fit, const Table& apply) {
  Table out = apply;
  for (std::size_t j = 0; j < fit.front().size(); ++j) {
    const auto c = column(fit, j);
    const double m = mean(c);
    const double s = stdev(c);
    const bool constant = all_equal(c);
    for (auto& row : out) row[j] = constant ? 0.0 : (row[j] - m) / s;
  }
  return out;
}

// Fraction of (anomalous, normal) pairs ranked correctly, ties counting half.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& anomalous) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!anomalous[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (anomalous[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Isolation Forest normaliser c(m) with H(i) = ln(i) + 0.5772156649.
inline double iforest_c(double m) {
  if (m <= 1) return 0.0;
  return 2.0 * (std::log(m - 1.0) + 0.5772156649) - 2.0 * (m - 1.0) / m;
}

// Relative difference with an absolute floor for values near zero.
inline double rel_diff(double a, double b, double floor = 1e-12) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

}  // namespace oracle
