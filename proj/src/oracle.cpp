#include "epi3/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace epi3 {

namespace {

// ln(n!) by direct term accumulation; intentionally shares nothing with
// LogSumTable.
double log_factorial(std::uint64_t n) {
  double s = 0.0;
  for (std::uint64_t b = 2; b <= n; ++b) s += std::log(double(b));
  return s;
}

double k2_factorial_form(const FrequencyTable& ft) {
  double score = 0.0;
  for (int c = 0; c < kNumCombos; ++c) {
    const std::uint64_t r0 = ft.at(c, kControls);
    const std::uint64_t r1 = ft.at(c, kCases);
    score += log_factorial(r0 + r1 + 1) - log_factorial(r0) - log_factorial(r1);
  }
  return score;
}

FrequencyTable count_table(const GenotypeMatrix& m, Triple t) {
  FrequencyTable ft;
  for (std::size_t j = 0; j < m.num_samples; ++j) {
    const int combo =
        combo_index(m.geno(t.i0, j), m.geno(t.i1, j), m.geno(t.i2, j));
    ++ft.at(combo, m.phenotype[j]);
  }
  return ft;
}

}  // namespace

FrequencyTable oracle_freq_table(const GenotypeMatrix& m, Triple t) {
  if (!(t.i0 < t.i1 && t.i1 < t.i2) || t.i2 >= m.num_snps)
    throw IndexError("bad triple " + to_string(t));
  return count_table(m, t);
}

SearchResult oracle_search(const GenotypeMatrix& m, std::size_t max_snps,
                           std::uint32_t top_k) {
  validate(m);
  if (m.num_snps > max_snps)
    throw CapExceeded("oracle capped at " + std::to_string(max_snps) +
                      " SNPs, dataset has " + std::to_string(m.num_snps));

  const auto t_start = std::chrono::steady_clock::now();
  SearchResult r;
  r.best = Hit{std::numeric_limits<double>::infinity(), Triple{}};
  r.top_k = top_k;
  for (snp_index i0 = 0; i0 + 2 < m.num_snps; ++i0)
    for (snp_index i1 = i0 + 1; i1 + 1 < m.num_snps; ++i1)
      for (snp_index i2 = i1 + 1; i2 < m.num_snps; ++i2) {
        const Triple t{i0, i1, i2};
        const Hit h{k2_factorial_form(count_table(m, t)), t};
        if (hit_less(h, r.best)) r.best = h;
        r.top.push_back(h);
        ++r.stats.combinations_evaluated;
      }
  std::sort(r.top.begin(), r.top.end(), hit_less);
  if (r.top.size() > top_k) r.top.resize(top_k);
  r.stats.per_thread_work = {r.stats.combinations_evaluated};
  r.stats.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return r;
}

}  // namespace epi3
