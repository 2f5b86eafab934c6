#include "epi3/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

namespace epi3 {

namespace {

void check_triple(Triple t, std::size_t num_snps) {
  if (!(t.i0 < t.i1 && t.i1 < t.i2))
    throw IndexError("triple " + to_string(t) + " is not strictly ordered");
  if (t.i2 >= num_snps)
    throw IndexError("triple " + to_string(t) + " out of range for " +
                     std::to_string(num_snps) + " SNPs");
}

void check_lanes(int lanes) {
  if (lanes != 1 && lanes != 2 && lanes != 4 && lanes != 8)
    throw DomainError("lane count must be one of {1,2,4,8}, got " +
                      std::to_string(lanes));
}

// Scalar strip accumulation, one word at a time: 3 NORs to infer the
// genotype-2 words, then a 3-way AND and popcount per combination. The
// class's final word, when inside [w_begin, w_end), is handled separately
// so the hot loop carries no mask select.
void accumulate_reduced(const word* x0, const word* x1, const word* y0,
                        const word* y1, const word* z0, const word* z1,
                        std::size_t w_begin, std::size_t w_end,
                        std::size_t num_words, word mask,
                        std::uint32_t* acc) {
  const std::size_t last = num_words - 1;
  const std::size_t cut = std::min(w_end, last);

  auto step = [&](std::size_t w, word m) {
    const word xs[3] = {x0[w], x1[w], word(~(x0[w] | x1[w]) & m)};
    const word ys[3] = {y0[w], y1[w], word(~(y0[w] | y1[w]) & m)};
    const word zs[3] = {z0[w], z1[w], word(~(z0[w] | z1[w]) & m)};
    int c = 0;
    for (int gx = 0; gx < 3; ++gx)
      for (int gy = 0; gy < 3; ++gy) {
        const word xy = xs[gx] & ys[gy];
        for (int gz = 0; gz < 3; ++gz)
          acc[c++] += std::uint32_t(std::popcount(xy & zs[gz]));
      }
  };

  for (std::size_t w = w_begin; w < cut; ++w) step(w, ~word{0});
  if (w_end > last && w_begin <= last) step(last, mask);
}

// Wide strip accumulation: the genotype-2 strips are materialized first so
// each of the 27 combination passes is a plain AND/popcount reduction the
// compiler can keep in vector registers. `lanes` caps how many
// independently accumulated ranges each pass is split into; ranges shorter
// than kMinLaneWords are not worth a separate reduction (the vectorizer's
// peel and reduce tails would dominate), so short streams collapse to
// fewer lanes. The split never changes the table: counts are sums.
constexpr std::size_t kMinLaneWords = 128;

void combo_pass_wide(const word* const xs[3], const word* const ys[3],
                     const word* const zs[3], std::size_t n, int lanes,
                     std::uint32_t* acc) {
  const int effective =
      int(std::clamp<std::size_t>(n / kMinLaneWords, 1, std::size_t(lanes)));
  const std::size_t chunk = n / std::size_t(effective);
  int c = 0;
  for (int gx = 0; gx < 3; ++gx)
    for (int gy = 0; gy < 3; ++gy)
      for (int gz = 0; gz < 3; ++gz) {
        const word* xp = xs[gx];
        const word* yp = ys[gy];
        const word* zp = zs[gz];
        std::uint64_t lane_sum[8] = {};
        for (int l = 0; l < effective; ++l) {
          const std::size_t b = std::size_t(l) * chunk;
          const std::size_t e = l + 1 == effective ? n : b + chunk;
          std::uint64_t s = 0;
          for (std::size_t w = b; w < e; ++w)
            s += std::uint64_t(std::popcount(xp[w] & yp[w] & zp[w]));
          lane_sum[l] = s;
        }
        std::uint64_t total = 0;
        for (int l = 0; l < effective; ++l) total += lane_sum[l];
        acc[c++] += std::uint32_t(total);
      }
}

// Fills `out` with the inferred genotype-2 words of [w_begin, w_end),
// masking the class's final word when the range covers it.
void materialize_plane2(const word* p0, const word* p1, std::size_t w_begin,
                        std::size_t w_end, std::size_t num_words, word mask,
                        word* out) {
  const std::size_t n = w_end - w_begin;
  for (std::size_t w = 0; w < n; ++w)
    out[w] = ~(p0[w_begin + w] | p1[w_begin + w]);
  if (w_end == num_words) out[n - 1] &= mask;
}

thread_local std::vector<word> tls_scratch;

}  // namespace

const char* variant_name(KernelVariant v) {
  switch (v) {
    case KernelVariant::NaivePhenotype: return "v1";
    case KernelVariant::ReducedSplit: return "v2";
    case KernelVariant::Blocked: return "v3";
    case KernelVariant::BlockedWide: return "v4";
    case KernelVariant::ThreadPerCombination: return "tpc";
  }
  return "?";
}

KernelVariant variant_from_name(const std::string& name) {
  if (name == "v1") return KernelVariant::NaivePhenotype;
  if (name == "v2") return KernelVariant::ReducedSplit;
  if (name == "v3") return KernelVariant::Blocked;
  if (name == "v4") return KernelVariant::BlockedWide;
  if (name == "tpc") return KernelVariant::ThreadPerCombination;
  throw DomainError("unknown kernel variant '" + name + "'");
}

InstructionModel instruction_count_model(KernelVariant v) {
  // Naive: 6 instructions per combination per element (two ANDs for the
  // genotype chain, two phenotype ANDs, two popcounts). Reduced forms: 3
  // NORs per word plus one AND and one popcount per combination, and a
  // third less memory without the stored plane and phenotype.
  if (v == KernelVariant::NaivePhenotype) return {27 * 6, 1.0};
  return {3 + 2 * 27, 2.0 / 3.0};
}

BlockParams derive_block_params(const CacheSpec& cs, std::uint32_t lane_samples) {
  if (cs.l1_bytes == 0 || cs.l1_ways == 0 || cs.ft_ways == 0 ||
      cs.block_ways == 0 || cs.count_bytes == 0)
    throw DomainError("cache spec fields must be positive");
  if (cs.ft_ways + cs.block_ways > cs.l1_ways)
    throw DomainError("frequency-table and block ways exceed the cache ways");
  if (lane_samples == 0) throw DomainError("lane_samples must be positive");

  const std::size_t size_ft = cs.l1_bytes * cs.ft_ways / cs.l1_ways;
  const std::size_t size_block = cs.l1_bytes * cs.block_ways / cs.l1_ways;

  // B_S^3 * 2 * 27 * count_bytes <= size_ft
  const std::size_t ft_cell = std::size_t{2} * kNumCombos * cs.count_bytes;
  const std::size_t cube_cap = size_ft / ft_cell;
  std::uint64_t bs = std::uint64_t(std::cbrt(double(cube_cap)));
  while ((bs + 1) * (bs + 1) * (bs + 1) <= cube_cap) ++bs;
  while (bs > 0 && bs * bs * bs > cube_cap) --bs;
  if (bs < 1)
    throw InfeasibleCache("frequency-table budget of " +
                          std::to_string(size_ft) + " B cannot hold one table");

  // B_S * B_P * 2 * count_bytes <= size_block, B_P a multiple of the lane
  // width in samples.
  const std::uint64_t bp_cap = size_block / (bs * 2 * cs.count_bytes);
  const std::uint64_t bp = bp_cap / lane_samples * lane_samples;
  if (bp < lane_samples)
    throw InfeasibleCache("block budget of " + std::to_string(size_block) +
                          " B cannot hold one lane of samples");

  BlockParams params;
  params.block_snps = std::uint32_t(bs);
  params.block_samples = std::uint32_t(bp);
  return params;
}

FrequencyTable freq_table_naive(const ThreePlaneDataset& ds, Triple t) {
  check_triple(t, ds.num_snps());
  FrequencyTable ft;
  const std::size_t nw = ds.words();
  const word* ph = ds.phenotype();
  const word* xs[3] = {ds.plane(t.i0, 0), ds.plane(t.i0, 1), ds.plane(t.i0, 2)};
  const word* ys[3] = {ds.plane(t.i1, 0), ds.plane(t.i1, 1), ds.plane(t.i1, 2)};
  const word* zs[3] = {ds.plane(t.i2, 0), ds.plane(t.i2, 1), ds.plane(t.i2, 2)};
  std::uint32_t* controls = ft.class_counts(kControls);
  std::uint32_t* cases = ft.class_counts(kCases);
  for (std::size_t w = 0; w < nw; ++w) {
    const word pw = ph[w];
    int c = 0;
    for (int gx = 0; gx < 3; ++gx)
      for (int gy = 0; gy < 3; ++gy) {
        const word xy = xs[gx][w] & ys[gy][w];
        for (int gz = 0; gz < 3; ++gz) {
          // Stored planes keep padding clear, so the complement of the
          // phenotype word needs no extra mask here.
          const word a = xy & zs[gz][w];
          controls[c] += std::uint32_t(std::popcount(a & ~pw));
          cases[c] += std::uint32_t(std::popcount(a & pw));
          ++c;
        }
      }
  }
  return ft;
}

FrequencyTable freq_table_reduced(const BitPlaneDataset& ds, Triple t) {
  check_triple(t, ds.num_snps());
  FrequencyTable ft;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    const std::size_t nw = ds.words(cls);
    if (nw == 0) continue;
    accumulate_reduced(ds.plane(cls, t.i0, 0), ds.plane(cls, t.i0, 1),
                       ds.plane(cls, t.i1, 0), ds.plane(cls, t.i1, 1),
                       ds.plane(cls, t.i2, 0), ds.plane(cls, t.i2, 1),
                       0, nw, nw, ds.pad_mask(cls), ft.class_counts(cls));
  }
  return ft;
}

FrequencyTable freq_table_wide(const BitPlaneDataset& ds, Triple t, int lanes) {
  check_triple(t, ds.num_snps());
  check_lanes(lanes);
  FrequencyTable ft;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    const std::size_t nw = ds.words(cls);
    if (nw == 0) continue;
    tls_scratch.resize(3 * nw);
    word* slabs[3] = {tls_scratch.data(), tls_scratch.data() + nw,
                      tls_scratch.data() + 2 * nw};
    const snp_index snps[3] = {t.i0, t.i1, t.i2};
    for (int k = 0; k < 3; ++k)
      materialize_plane2(ds.plane(cls, snps[k], 0), ds.plane(cls, snps[k], 1),
                         0, nw, nw, ds.pad_mask(cls), slabs[k]);
    const word* xs[3] = {ds.plane(cls, t.i0, 0), ds.plane(cls, t.i0, 1), slabs[0]};
    const word* ys[3] = {ds.plane(cls, t.i1, 0), ds.plane(cls, t.i1, 1), slabs[1]};
    const word* zs[3] = {ds.plane(cls, t.i2, 0), ds.plane(cls, t.i2, 1), slabs[2]};
    combo_pass_wide(xs, ys, zs, nw, lanes, ft.class_counts(cls));
  }
  return ft;
}

void blocked_pass(const BitPlaneDataset& ds, const BlockParams& params,
                  const BlockTriple& bt, std::span<FrequencyTable> tables,
                  int lanes) {
  const std::uint32_t bs = params.block_snps;
  if (bs == 0) throw DomainError("block size must be positive");
  check_lanes(lanes);
  const std::size_t num_snps = ds.num_snps();
  const std::size_t num_blocks = (num_snps + bs - 1) / bs;
  if (bt.b0 >= num_blocks || bt.b1 >= num_blocks || bt.b2 >= num_blocks)
    throw IndexError("block triple out of range");
  if (tables.size() < std::size_t{bs} * bs * bs)
    throw DomainError("table array smaller than block_snps^3");

  const std::size_t strip = params.strip_words(4);
  const std::uint64_t base[3] = {std::uint64_t{bt.b0} * bs,
                                 std::uint64_t{bt.b1} * bs,
                                 std::uint64_t{bt.b2} * bs};

  for (int cls = 0; cls < kNumClasses; ++cls) {
    const std::size_t nw = ds.words(cls);
    if (nw == 0) continue;
    const word mask = ds.pad_mask(cls);

    for (std::size_t w0 = 0; w0 < nw; w0 += strip) {
      const std::size_t w1 = std::min(w0 + strip, nw);
      const std::size_t n = w1 - w0;

      // Wide path: genotype-2 strips for every SNP of the (up to three
      // distinct) blocks are materialized once per strip and shared by all
      // in-block combinations.
      word* slab_of[3] = {nullptr, nullptr, nullptr};
      if (lanes > 1) {
        const std::uint32_t blocks[3] = {bt.b0, bt.b1, bt.b2};
        tls_scratch.resize(3 * std::size_t{bs} * n);
        int used = 0;
        for (int k = 0; k < 3; ++k) {
          for (int prev = 0; prev < k; ++prev)
            if (blocks[prev] == blocks[k]) slab_of[k] = slab_of[prev];
          if (slab_of[k]) continue;
          slab_of[k] = tls_scratch.data() + std::size_t(used++) * bs * n;
          for (std::uint32_t ii = 0; ii < bs; ++ii) {
            const std::uint64_t g = base[k] + ii;
            if (g >= num_snps) break;
            materialize_plane2(ds.plane(cls, snp_index(g), 0),
                               ds.plane(cls, snp_index(g), 1), w0, w1, nw,
                               mask, slab_of[k] + std::size_t{ii} * n);
          }
        }
      }

      for (std::uint32_t ii0 = 0; ii0 < bs; ++ii0) {
        const std::uint64_t g0 = base[0] + ii0;
        if (g0 >= num_snps) break;
        for (std::uint32_t ii1 = 0; ii1 < bs; ++ii1) {
          const std::uint64_t g1 = base[1] + ii1;
          if (g1 >= num_snps) break;
          if (g1 <= g0) continue;
          for (std::uint32_t ii2 = 0; ii2 < bs; ++ii2) {
            const std::uint64_t g2 = base[2] + ii2;
            if (g2 >= num_snps) break;
            if (g2 <= g1) continue;
            std::uint32_t* acc =
                tables[block_slot(ii0, ii1, ii2, bs)].class_counts(cls);
            if (lanes == 1) {
              accumulate_reduced(ds.plane(cls, snp_index(g0), 0),
                                 ds.plane(cls, snp_index(g0), 1),
                                 ds.plane(cls, snp_index(g1), 0),
                                 ds.plane(cls, snp_index(g1), 1),
                                 ds.plane(cls, snp_index(g2), 0),
                                 ds.plane(cls, snp_index(g2), 1),
                                 w0, w1, nw, mask, acc);
            } else {
              const word* xs[3] = {ds.plane(cls, snp_index(g0), 0) + w0,
                                   ds.plane(cls, snp_index(g0), 1) + w0,
                                   slab_of[0] + std::size_t{ii0} * n};
              const word* ys[3] = {ds.plane(cls, snp_index(g1), 0) + w0,
                                   ds.plane(cls, snp_index(g1), 1) + w0,
                                   slab_of[1] + std::size_t{ii1} * n};
              const word* zs[3] = {ds.plane(cls, snp_index(g2), 0) + w0,
                                   ds.plane(cls, snp_index(g2), 1) + w0,
                                   slab_of[2] + std::size_t{ii2} * n};
              combo_pass_wide(xs, ys, zs, n, lanes, acc);
            }
          }
        }
      }
    }
  }
}

void combination_kernel(const TiledDataset& ts, std::uint32_t sched_edge,
                        const BlockTriple& base, const TableSink& sink) {
  if (sched_edge == 0) throw DomainError("sched edge must be positive");
  const std::size_t num_snps = ts.num_snps();
  const std::uint64_t o0 = std::uint64_t{base.b0} * sched_edge;
  const std::uint64_t o1 = std::uint64_t{base.b1} * sched_edge;
  const std::uint64_t o2 = std::uint64_t{base.b2} * sched_edge;
  const std::size_t stride = ts.column_stride();

  const auto end_of = [&](std::uint64_t o) {
    return std::min<std::uint64_t>(o + sched_edge, num_snps);
  };

  for (std::uint64_t g0 = o0; g0 < end_of(o0); ++g0)
    for (std::uint64_t g1 = std::max(o1, g0 + 1); g1 < end_of(o1); ++g1)
      for (std::uint64_t g2 = std::max(o2, g1 + 1); g2 < end_of(o2); ++g2) {
        // Private table per logical thread; no sharing, no synchronization.
        FrequencyTable ft;
        for (int cls = 0; cls < kNumClasses; ++cls) {
          const std::size_t nw = ts.words(cls);
          if (nw == 0) continue;
          const word mask = ts.pad_mask(cls);
          const word* x0 = ts.column(cls, snp_index(g0), 0);
          const word* x1 = ts.column(cls, snp_index(g0), 1);
          const word* y0 = ts.column(cls, snp_index(g1), 0);
          const word* y1 = ts.column(cls, snp_index(g1), 1);
          const word* z0 = ts.column(cls, snp_index(g2), 0);
          const word* z1 = ts.column(cls, snp_index(g2), 1);
          std::uint32_t* acc = ft.class_counts(cls);
          for (std::size_t w = 0; w < nw; ++w) {
            const word m = w + 1 == nw ? mask : ~word{0};
            const std::size_t o = w * stride;
            const word xs[3] = {x0[o], x1[o], word(~(x0[o] | x1[o]) & m)};
            const word ys[3] = {y0[o], y1[o], word(~(y0[o] | y1[o]) & m)};
            const word zs[3] = {z0[o], z1[o], word(~(z0[o] | z1[o]) & m)};
            int c = 0;
            for (int gx = 0; gx < 3; ++gx)
              for (int gy = 0; gy < 3; ++gy) {
                const word xy = xs[gx] & ys[gy];
                for (int gz = 0; gz < 3; ++gz)
                  acc[c++] += std::uint32_t(std::popcount(xy & zs[gz]));
              }
          }
        }
        sink(Triple{snp_index(g0), snp_index(g1), snp_index(g2)}, ft);
      }
}

}  // namespace epi3
