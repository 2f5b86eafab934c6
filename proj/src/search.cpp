#include "epi3/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <thread>

#include "epi3/scoring.hpp"
#include "epi3/tiled.hpp"

namespace epi3 {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed-size ascending buffer of the best hits seen so far.
class TopBuffer {
 public:
  explicit TopBuffer(std::uint32_t k) : k_(k) {}

  void push(const Hit& h) {
    if (hits_.size() == k_ && !hit_less(h, hits_.back())) return;
    hits_.insert(std::upper_bound(hits_.begin(), hits_.end(), h, hit_less), h);
    if (hits_.size() > k_) hits_.pop_back();
  }

  std::vector<Hit> take() { return std::move(hits_); }

 private:
  std::uint32_t k_;
  std::vector<Hit> hits_;
};

}  // namespace

bool same_outcome(const SearchResult& a, const SearchResult& b) {
  return a.best == b.best && a.top == b.top &&
         a.stats.combinations_evaluated == b.stats.combinations_evaluated;
}

std::uint64_t num_combinations(std::uint64_t m, std::uint64_t k) {
  if (m < k)
    throw DomainError("cannot choose " + std::to_string(k) + " from " +
                      std::to_string(m));
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (m - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max())
      throw DomainError("binomial coefficient exceeds 64 bits");
  }
  return std::uint64_t(r);
}

std::uint64_t num_block_triples(std::uint64_t num_blocks) {
  const unsigned __int128 n = num_blocks;
  const unsigned __int128 t = n * (n + 1) * (n + 2) / 6;
  if (t > std::numeric_limits<std::uint64_t>::max())
    throw DomainError("block-triple count exceeds 64 bits");
  return std::uint64_t(t);
}

BlockTriple decode_block_triple(std::uint64_t index, std::uint64_t num_blocks) {
  const std::uint64_t total = num_block_triples(num_blocks);
  if (index >= total) throw IndexError("block-triple index out of range");

  // Triples are enumerated b0-major; the count of triples with first
  // element >= x is a closed form, which the two searches below invert.
  const auto triples_from = [&](std::uint64_t x) {
    const unsigned __int128 m = num_blocks - x;
    return std::uint64_t(m * (m + 1) * (m + 2) / 6);
  };
  const auto pairs_from = [&](std::uint64_t x) {
    const std::uint64_t m = num_blocks - x;
    return m * (m + 1) / 2;
  };

  std::uint64_t lo = 0, hi = num_blocks - 1;
  while (lo < hi) {  // largest b0 with (total - triples_from(b0)) <= index
    const std::uint64_t mid = (lo + hi + 1) / 2;
    if (total - triples_from(mid) <= index) lo = mid;
    else hi = mid - 1;
  }
  const std::uint64_t b0 = lo;
  std::uint64_t rest = index - (total - triples_from(b0));

  const std::uint64_t pair_total = pairs_from(b0);
  lo = b0;
  hi = num_blocks - 1;
  while (lo < hi) {  // largest b1 with (pair_total - pairs_from(b1)) <= rest
    const std::uint64_t mid = (lo + hi + 1) / 2;
    if (pair_total - pairs_from(mid) <= rest) lo = mid;
    else hi = mid - 1;
  }
  const std::uint64_t b1 = lo;
  rest -= pair_total - pairs_from(b1);

  return BlockTriple{std::uint32_t(b0), std::uint32_t(b1),
                     std::uint32_t(b1 + rest)};
}

SearchResult reduce_results(std::span<const SearchResult> partials) {
  SearchResult out;
  out.best = Hit{kInf, Triple{}};
  for (const SearchResult& p : partials) {
    out.top_k = std::max(out.top_k, p.top_k);
    if (hit_less(p.best, out.best)) out.best = p.best;
    out.top.insert(out.top.end(), p.top.begin(), p.top.end());
    out.stats.combinations_evaluated += p.stats.combinations_evaluated;
    out.stats.elapsed_seconds += p.stats.elapsed_seconds;
    out.stats.per_thread_work.insert(out.stats.per_thread_work.end(),
                                     p.stats.per_thread_work.begin(),
                                     p.stats.per_thread_work.end());
  }
  std::sort(out.top.begin(), out.top.end(), hit_less);
  out.top.erase(std::unique(out.top.begin(), out.top.end()), out.top.end());
  if (out.top.size() > out.top_k) out.top.resize(out.top_k);
  return out;
}

SearchResult run_search(const BitPlaneDataset& ds, const SearchConfig& cfg) {
  const std::size_t num_snps = ds.num_snps();
  if (num_snps < 3) throw DimensionError("search needs at least 3 SNPs");
  if (cfg.threads < 1) throw DomainError("threads must be >= 1");
  if (cfg.top_k < 1) throw DomainError("top_k must be >= 1");
  if (cfg.chunk < 1) throw DomainError("chunk must be >= 1");
  if (cfg.block.block_snps < 1 || cfg.block.block_samples < 1)
    throw DomainError("block parameters must be positive");
  if (cfg.block.sched_edge < 1) throw DomainError("sched edge must be positive");

  const LogSumTable logs = build_log_table(ds.num_samples() + 1);

  // Variant-specific input representations, built once and shared.
  std::optional<ThreePlaneDataset> three;
  std::optional<TiledDataset> tiled;
  if (cfg.variant == KernelVariant::NaivePhenotype)
    three = ThreePlaneDataset::from_matrix(decode(ds));
  else if (cfg.variant == KernelVariant::ThreadPerCombination)
    tiled = transpose_tile(ds, cfg.block.block_snps);

  const bool blocked = cfg.variant == KernelVariant::Blocked ||
                       cfg.variant == KernelVariant::BlockedWide;
  const std::uint32_t edge = cfg.variant == KernelVariant::ThreadPerCombination
                                 ? cfg.block.sched_edge
                                 : cfg.block.block_snps;
  const std::uint64_t num_blocks = (num_snps + edge - 1) / edge;
  const std::uint64_t total_items = num_block_triples(num_blocks);

  std::atomic<std::uint64_t> next{0};
  const unsigned nthreads = cfg.threads;
  std::vector<SearchResult> partials(nthreads);
  std::vector<std::uint64_t> work(nthreads, 0);
  std::vector<std::exception_ptr> failures(nthreads);

  const auto t_start = Clock::now();

  auto worker = [&](unsigned tid) {
    TopBuffer top(cfg.top_k);
    Hit best{kInf, Triple{}};
    std::uint64_t combos = 0;
    std::vector<FrequencyTable> tables;
    if (blocked)
      tables.resize(std::size_t{cfg.block.block_snps} * cfg.block.block_snps *
                    cfg.block.block_snps);

    const auto score_table = [&](Triple t, const FrequencyTable& ft) {
      const Hit h{k2_score(ft, logs), t};
      if (hit_less(h, best)) best = h;
      top.push(h);
      ++combos;
    };

    for (;;) {
      const std::uint64_t begin =
          next.fetch_add(cfg.chunk, std::memory_order_relaxed);
      if (begin >= total_items) break;
      const std::uint64_t end = std::min(begin + cfg.chunk, total_items);
      for (std::uint64_t item = begin; item < end; ++item) {
        const BlockTriple bt = decode_block_triple(item, num_blocks);
        ++work[tid];
        switch (cfg.variant) {
          case KernelVariant::NaivePhenotype:
            for_each_cell_triple(bt, edge, num_snps, [&](Triple t) {
              score_table(t, freq_table_naive(*three, t));
            });
            break;
          case KernelVariant::ReducedSplit:
            for_each_cell_triple(bt, edge, num_snps, [&](Triple t) {
              score_table(t, freq_table_reduced(ds, t));
            });
            break;
          case KernelVariant::Blocked:
          case KernelVariant::BlockedWide: {
            std::fill(tables.begin(), tables.end(), FrequencyTable{});
            const int lanes =
                cfg.variant == KernelVariant::BlockedWide ? cfg.lanes : 1;
            blocked_pass(ds, cfg.block, bt, tables, lanes);
            const std::uint32_t bs = cfg.block.block_snps;
            for_each_cell_triple(bt, edge, num_snps, [&](Triple t) {
              const std::size_t slot = block_slot(
                  t.i0 - bt.b0 * bs, t.i1 - bt.b1 * bs, t.i2 - bt.b2 * bs, bs);
              score_table(t, tables[slot]);
            });
            break;
          }
          case KernelVariant::ThreadPerCombination:
            combination_kernel(*tiled, edge, bt, score_table);
            break;
        }
      }
    }

    SearchResult& p = partials[tid];
    p.best = best;
    p.top = top.take();
    p.top_k = cfg.top_k;
    p.stats.combinations_evaluated = combos;
  };

  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t] {
        try {
          worker(t);
        } catch (...) {
          failures[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  SearchResult result = reduce_results(partials);
  result.top_k = cfg.top_k;
  result.stats.per_thread_work = std::move(work);
  result.stats.elapsed_seconds =
      std::chrono::duration<double>(Clock::now() - t_start).count();
  return result;
}

}  // namespace epi3
