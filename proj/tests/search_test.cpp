#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <set>
#include <tuple>

#include "epi3/oracle.hpp"
#include "epi3/search.hpp"
#include "epi3/synthetic.hpp"
#include "test_util.hpp"

using namespace epi3;
using testutil::random_matrix;

namespace {

SearchConfig config(KernelVariant v, unsigned threads = 1) {
  SearchConfig cfg;
  cfg.variant = v;
  cfg.block.block_snps = 5;
  cfg.block.block_samples = 400;
  cfg.block.sched_edge = 16;
  cfg.threads = threads;
  return cfg;
}

}  // namespace

TEST_CASE("num_combinations values") {
  CHECK(num_combinations(3, 3) == 1);
  CHECK(num_combinations(10, 3) == 120);
  CHECK(num_combinations(2048, 3) == 1429559296ull);
  CHECK(num_combinations(2048, 3) == 2048ull * 2047 * 2046 / 6);
  CHECK(num_combinations(1000000, 3) ==
        1000000ull * 999999 * 999998 / 6);
  CHECK(num_combinations(5, 0) == 1);
  CHECK_THROWS_AS(num_combinations(2, 3), DomainError);
}

TEST_CASE("block-triple decode matches the enumeration") {
  for (std::uint64_t nb = 1; nb <= 9; ++nb) {
    std::uint64_t index = 0;
    for (std::uint32_t b0 = 0; b0 < nb; ++b0)
      for (std::uint32_t b1 = b0; b1 < nb; ++b1)
        for (std::uint32_t b2 = b1; b2 < nb; ++b2) {
          const BlockTriple bt = decode_block_triple(index, nb);
          CHECK(bt.b0 == b0);
          CHECK(bt.b1 == b1);
          CHECK(bt.b2 == b2);
          ++index;
        }
    CHECK(index == num_block_triples(nb));
    CHECK_THROWS_AS(decode_block_triple(index, nb), IndexError);
  }
}

TEST_CASE("cell enumeration covers every ordered triple exactly once") {
  for (std::size_t snps : {3u, 5u, 23u, 64u}) {
    for (std::uint32_t edge : {1u, 5u, 7u, 64u}) {
      std::set<std::tuple<unsigned, unsigned, unsigned>> seen;
      std::uint64_t count = 0;
      const std::uint64_t nb = (snps + edge - 1) / edge;
      for (std::uint64_t item = 0; item < num_block_triples(nb); ++item)
        for_each_cell_triple(decode_block_triple(item, nb), edge, snps,
                             [&](Triple t) {
                               CHECK(t.i0 < t.i1);
                               CHECK(t.i1 < t.i2);
                               CHECK(t.i2 < snps);
                               seen.insert({t.i0, t.i1, t.i2});
                               ++count;
                             });
      CHECK(count == num_combinations(snps, 3));
      CHECK(seen.size() == count);  // no duplicates
    }
  }
}

TEST_CASE("search of a 3-SNP dataset evaluates one combination") {
  std::mt19937_64 rng(1);
  const GenotypeMatrix m = random_matrix(rng, 3, 40);
  const SearchResult got = run_search(binarize(m), config(KernelVariant::ReducedSplit));
  const SearchResult expect = oracle_search(m);
  CHECK(got.stats.combinations_evaluated == 1);
  CHECK(got.best.triple == expect.best.triple);
  CHECK(got.best.score == doctest::Approx(expect.best.score).epsilon(1e-12));
}

TEST_CASE("search agrees with the oracle across variants") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 4; ++rep) {
    const GenotypeMatrix m = random_matrix(rng, 9 + rng() % 6, 60 + rng() % 200);
    const BitPlaneDataset ds = binarize(m);
    const SearchResult expect = oracle_search(m);
    for (KernelVariant v :
         {KernelVariant::NaivePhenotype, KernelVariant::ReducedSplit,
          KernelVariant::Blocked, KernelVariant::BlockedWide,
          KernelVariant::ThreadPerCombination}) {
      const SearchResult got = run_search(ds, config(v));
      CHECK(got.best.triple == expect.best.triple);
      CHECK(std::abs(got.best.score - expect.best.score) <= 1e-9);
      CHECK(got.stats.combinations_evaluated ==
            expect.stats.combinations_evaluated);
    }
  }
}

TEST_CASE("duplicated SNP ties break to the lexicographically smallest triple") {
  PlantSpec plant;
  plant.triple = {2, 5, 7};
  plant.target = {1, 1, 1};
  plant.p_case_match = 0.95;
  plant.p_case_other = 0.05;
  GenotypeMatrix m = generate_synthetic(12, 800, 0.5, 31, plant);
  // SNP 9 becomes an exact copy of SNP 5, so (2,7,9) scores identically
  // to the planted (2,5,7).
  for (std::size_t j = 0; j < m.num_samples; ++j) m.geno(9, j) = m.geno(5, j);
  const BitPlaneDataset ds = binarize(m);

  SearchResult r1 = run_search(ds, config(KernelVariant::BlockedWide, 1));
  SearchResult r4 = run_search(ds, config(KernelVariant::BlockedWide, 4));
  CHECK(r1.best.triple == Triple{2, 5, 7});
  CHECK(same_outcome(r1, r4));

  // The duplicate really does tie.
  const auto find = [&](Triple t) {
    const auto it = std::find_if(r1.top.begin(), r1.top.end(),
                                 [&](const Hit& h) { return h.triple == t; });
    REQUIRE(it != r1.top.end());
    return it->score;
  };
  CHECK(find({2, 5, 7}) == find({2, 7, 9}));
}

TEST_CASE("results are identical for any thread count and chunk size") {
  std::mt19937_64 rng(3);
  const GenotypeMatrix m = random_matrix(rng, 14, 120);
  const BitPlaneDataset ds = binarize(m);
  for (KernelVariant v : {KernelVariant::ReducedSplit, KernelVariant::BlockedWide,
                          KernelVariant::ThreadPerCombination}) {
    const SearchResult base = run_search(ds, config(v, 1));
    for (unsigned threads : {2u, 4u, 8u}) {
      SearchConfig cfg = config(v, threads);
      CHECK(same_outcome(base, run_search(ds, cfg)));
      cfg.chunk = 3;
      CHECK(same_outcome(base, run_search(ds, cfg)));
    }
    CHECK(std::is_sorted(base.top.begin(), base.top.end(), hit_less));
    CHECK(!hit_less(base.top.front(), base.best));
    CHECK(!hit_less(base.best, base.top.front()));
  }
}

TEST_CASE("per-thread work sums to the block-triple count") {
  std::mt19937_64 rng(4);
  const BitPlaneDataset ds = binarize(random_matrix(rng, 17, 64));
  const SearchConfig cfg = config(KernelVariant::Blocked, 3);
  const SearchResult r = run_search(ds, cfg);
  CHECK(r.stats.per_thread_work.size() == 3);
  std::uint64_t total = 0;
  for (auto w : r.stats.per_thread_work) total += w;
  CHECK(total == num_block_triples((17 + 4) / 5));
  CHECK(r.stats.combinations_evaluated == num_combinations(17, 3));
  CHECK(r.top_k == cfg.top_k);
  CHECK(r.stats.elapsed_seconds > 0.0);
}

TEST_CASE("top_k of one keeps only the best") {
  std::mt19937_64 rng(5);
  const BitPlaneDataset ds = binarize(random_matrix(rng, 8, 50));
  SearchConfig cfg = config(KernelVariant::ReducedSplit);
  cfg.top_k = 1;
  const SearchResult r = run_search(ds, cfg);
  REQUIRE(r.top.size() == 1);
  CHECK(r.top[0] == r.best);
}

TEST_CASE("reduce of a single partial is the identity") {
  SearchResult p;
  p.best = {1.5, {0, 2, 4}};
  p.top = {{1.5, {0, 2, 4}}, {2.0, {1, 2, 3}}};
  p.top_k = 5;
  p.stats.combinations_evaluated = 7;
  p.stats.elapsed_seconds = 0.25;
  p.stats.per_thread_work = {7};
  const SearchResult r = reduce_results({&p, 1});
  CHECK(r.best == p.best);
  CHECK(r.top == p.top);
  CHECK(r.top_k == p.top_k);
  CHECK(r.stats.combinations_evaluated == 7);
  CHECK(r.stats.elapsed_seconds == 0.25);
  CHECK(r.stats.per_thread_work == p.stats.per_thread_work);
}

TEST_CASE("reduce breaks score ties lexicographically") {
  SearchResult a;
  a.best = {3.25, {1, 2, 3}};
  a.top = {a.best};
  a.top_k = 4;
  SearchResult b;
  b.best = {3.25, {0, 4, 5}};
  b.top = {b.best};
  b.top_k = 4;
  const SearchResult merged = reduce_results(std::vector<SearchResult>{a, b});
  CHECK(merged.best.triple == Triple{0, 4, 5});
  CHECK(merged.top.size() == 2);
  CHECK(merged.top[0].triple == Triple{0, 4, 5});
}

TEST_CASE("reduce over a random partition matches the whole") {
  std::mt19937_64 rng(6);
  const GenotypeMatrix m = random_matrix(rng, 10, 90);
  const BitPlaneDataset ds = binarize(m);
  SearchConfig cfg = config(KernelVariant::ReducedSplit);
  cfg.top_k = 120;  // C(10,3): keep every scored hit
  const SearchResult whole = run_search(ds, cfg);
  REQUIRE(whole.top.size() == 120);

  const std::uint32_t k = 9;
  std::vector<SearchResult> parts(3);
  for (auto& p : parts) {
    p.best = {std::numeric_limits<double>::infinity(), {}};
    p.top_k = k;
  }
  for (const Hit& h : whole.top) {
    SearchResult& p = parts[rng() % 3];
    if (hit_less(h, p.best)) p.best = h;
    p.top.push_back(h);
    ++p.stats.combinations_evaluated;
  }
  for (auto& p : parts) {
    std::sort(p.top.begin(), p.top.end(), hit_less);
    if (p.top.size() > k) p.top.resize(k);
  }

  const SearchResult merged = reduce_results(parts);
  CHECK(merged.best == whole.best);
  REQUIRE(merged.top.size() == k);
  for (std::size_t i = 0; i < k; ++i) CHECK(merged.top[i] == whole.top[i]);
  CHECK(merged.stats.combinations_evaluated == 120);
}
