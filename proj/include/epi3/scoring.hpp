#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "epi3/common.hpp"

namespace epi3 {

inline constexpr int kNumCombos = 27;  // 3^3 genotype combinations
inline constexpr int kNumClasses = 2;  // controls, cases

constexpr int combo_index(int gx, int gy, int gz) {
  return gx * 9 + gy * 3 + gz;
}

// 27x2 contingency table for one SNP triple: occurrences of each genotype
// combination among controls and cases. Counts are 32-bit; datasets are
// capped at 2^32-1 samples per class on load so cells cannot overflow.
struct FrequencyTable {
  std::array<std::uint32_t, kNumCombos * kNumClasses> counts{};  // [cls][combo]

  std::uint32_t at(int combo, int cls) const {
    return counts[std::size_t(cls) * kNumCombos + std::size_t(combo)];
  }
  std::uint32_t& at(int combo, int cls) {
    return counts[std::size_t(cls) * kNumCombos + std::size_t(combo)];
  }
  std::uint32_t row_total(int combo) const {
    return at(combo, kControls) + at(combo, kCases);
  }
  std::uint32_t* class_counts(int cls) {
    return counts.data() + std::size_t(cls) * kNumCombos;
  }
  const std::uint32_t* class_counts(int cls) const {
    return counts.data() + std::size_t(cls) * kNumCombos;
  }
  std::uint64_t class_total(int cls) const;

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

// prefix[n] = sum of ln(b) for b = 1..n, i.e. ln(n!); prefix[0] = 0.
// Built once per search over n = N+1 and shared read-only by all threads.
struct LogSumTable {
  std::vector<double> prefix;

  double log_factorial(std::size_t n) const { return prefix[n]; }
  std::size_t max_n() const { return prefix.size() - 1; }
};

LogSumTable build_log_table(std::size_t n_max);

// Bayesian K2 score of a contingency table: per row i with class counts
// r_i0, r_i1 and total r_i, adds ln((r_i+1)!) - ln(r_i0!) - ln(r_i1!).
// Lower is better; the table must be covered by `logs` up to max row
// total + 1.
double k2_score(const FrequencyTable& ft, const LogSumTable& logs);

}  // namespace epi3
