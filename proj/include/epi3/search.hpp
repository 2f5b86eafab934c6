#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "epi3/bitplane.hpp"
#include "epi3/common.hpp"
#include "epi3/kernels.hpp"

namespace epi3 {

struct SearchConfig {
  KernelVariant variant = KernelVariant::BlockedWide;
  BlockParams block;
  unsigned threads = 1;
  std::uint32_t top_k = 10;
  std::uint64_t chunk = 1;  // block-triples claimed per counter fetch
  int lanes = 8;            // wide-kernel lane count
};

struct Hit {
  double score = 0.0;
  Triple triple;

  friend bool operator==(const Hit&, const Hit&) = default;
};

// Ascending by score; exact-equal scores break toward the smaller triple.
// Raw double comparison on purpose: an epsilon would make the tie rule
// platform-dependent.
inline bool hit_less(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.triple < b.triple;
}

struct SearchStats {
  std::uint64_t combinations_evaluated = 0;
  double elapsed_seconds = 0.0;
  std::vector<std::uint64_t> per_thread_work;  // block-triples per worker
};

struct SearchResult {
  Hit best{.score = 0.0, .triple = {}};
  std::vector<Hit> top;  // ascending, deduplicated, at most top_k entries
  std::uint32_t top_k = 1;
  SearchStats stats;
};

// Content comparison that ignores timing and work-partition stats; used by
// determinism checks (wall clock can never be bit-identical).
bool same_outcome(const SearchResult& a, const SearchResult& b);

// Exact binomial coefficient; DomainError when m < k or the value does not
// fit 64 bits.
std::uint64_t num_combinations(std::uint64_t m, std::uint64_t k);

// Decodes a linear index into the (b0 <= b1 <= b2) block-triple sequence
// enumerated b0-major. Inverse of the enumeration order, used by the shared
// work counter.
BlockTriple decode_block_triple(std::uint64_t index, std::uint64_t num_blocks);
std::uint64_t num_block_triples(std::uint64_t num_blocks);

// Calls fn(Triple) for every strictly ordered in-range global triple of the
// given block cell (edge SNPs per block), in ascending order.
template <typename Fn>
void for_each_cell_triple(const BlockTriple& bt, std::uint32_t edge,
                          std::size_t num_snps, Fn&& fn) {
  const std::uint64_t base0 = std::uint64_t{bt.b0} * edge;
  const std::uint64_t base1 = std::uint64_t{bt.b1} * edge;
  const std::uint64_t base2 = std::uint64_t{bt.b2} * edge;
  const auto clamp_end = [&](std::uint64_t base) {
    return std::min<std::uint64_t>(base + edge, num_snps);
  };
  for (std::uint64_t g0 = base0; g0 < clamp_end(base0); ++g0)
    for (std::uint64_t g1 = std::max(base1, g0 + 1); g1 < clamp_end(base1); ++g1)
      for (std::uint64_t g2 = std::max(base2, g1 + 1); g2 < clamp_end(base2); ++g2)
        fn(Triple{snp_index(g0), snp_index(g1), snp_index(g2)});
}

// Evaluates every strictly ordered SNP triple exactly once with the
// configured kernel, scores the tables, and reduces to the global best
// plus a top-k list. Deterministic for a given dataset and config,
// including ties, regardless of thread count.
SearchResult run_search(const BitPlaneDataset& ds, const SearchConfig& cfg);

// Min-score merge with lexicographic tie-break; stats are summed and the
// top lists merged, deduplicated and truncated.
SearchResult reduce_results(std::span<const SearchResult> partials);

}  // namespace epi3
