#include "epi3/scoring.hpp"

#include <cassert>
#include <cmath>

namespace epi3 {

std::uint64_t FrequencyTable::class_total(int cls) const {
  std::uint64_t total = 0;
  for (int c = 0; c < kNumCombos; ++c) total += at(c, cls);
  return total;
}

LogSumTable build_log_table(std::size_t n_max) {
  LogSumTable t;
  t.prefix.resize(n_max + 1);
  t.prefix[0] = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n)
    t.prefix[n] = t.prefix[n - 1] + std::log(double(n));
  return t;
}

double k2_score(const FrequencyTable& ft, const LogSumTable& logs) {
  double score = 0.0;
  for (int c = 0; c < kNumCombos; ++c) {
    const std::uint32_t r0 = ft.at(c, kControls);
    const std::uint32_t r1 = ft.at(c, kCases);
    const std::size_t r = std::size_t{r0} + r1;
    assert(r + 1 <= logs.max_n());
    // Grouping the class terms keeps the score bit-identical under a
    // column swap.
    score += logs.prefix[r + 1] - (logs.prefix[r0] + logs.prefix[r1]);
  }
  return score;
}

}  // namespace epi3
