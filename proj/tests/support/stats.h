#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace stats {

// Upper critical values of the chi-square distribution at alpha = 0.01,
// indexed by degrees of freedom 1..11.
inline double chi_square_critical_001(std::size_t df) {
  static const double table[] = {6.635, 9.210, 11.345, 13.277, 15.086, 16.812,
                                 18.475, 20.090, 21.666, 23.209, 24.725};
  if (df < 1 || df > 11) throw std::out_of_range("no critical value for df " + std::to_string(df));
  return table[df - 1];
}

// Pearson statistic of observed counts against a uniform expectation over
// `categories` (missing categories count as zero observations).
inline double chi_square_uniform(const std::map<std::string, std::size_t>& counts,
                                 const std::vector<std::string>& categories) {
  std::size_t total = 0;
  for (const auto& c : categories) {
    if (auto it = counts.find(c); it != counts.end()) total += it->second;
  }
  const double expected = static_cast<double>(total) / static_cast<double>(categories.size());
  double chi = 0;
  for (const auto& c : categories) {
    const auto it = counts.find(c);
    const double observed = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    chi += (observed - expected) * (observed - expected) / expected;
  }
  return chi;
}

}  // namespace stats
