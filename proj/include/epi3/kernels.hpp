#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "epi3/bitplane.hpp"
#include "epi3/common.hpp"
#include "epi3/scoring.hpp"
#include "epi3/tiled.hpp"

namespace epi3 {

// The table-construction strategies. All of them produce identical tables
// for identical inputs; they differ in representation and loop structure.
enum class KernelVariant {
  NaivePhenotype,        // v1: three stored planes, phenotype AND per class
  ReducedSplit,          // v2: class-split planes, genotype 2 inferred
  Blocked,               // v3: v2 plus L1 cache blocking
  BlockedWide,           // v4: v3 with a lane-parallel popcount inner loop
  ThreadPerCombination,  // tpc: one private table per combination, tiled input
};

const char* variant_name(KernelVariant v);
KernelVariant variant_from_name(const std::string& name);  // DomainError

// L1 data-cache geometry plus the way split between the frequency-table
// array and the sample block. count_bytes is the width of one table cell.
struct CacheSpec {
  std::size_t l1_bytes = 48 * 1024;
  std::uint32_t l1_ways = 12;
  std::uint32_t ft_ways = 7;
  std::uint32_t block_ways = 4;
  std::uint32_t count_bytes = 4;  // 32-bit cells
};

// Tiling parameters. block_samples counts count_bytes-wide sample words, as
// in the capacity equations; the kernels convert it to 64-bit strip words.
struct BlockParams {
  std::uint32_t block_snps = 1;      // B_S
  std::uint32_t block_samples = 1;   // B_P
  std::uint32_t sched_edge = 256;    // B_Sched, combination-grid edge

  std::size_t strip_words(std::uint32_t count_bytes = 4) const {
    const std::size_t bytes = std::size_t{block_samples} * count_bytes;
    return bytes < sizeof(word) ? 1 : bytes / sizeof(word);
  }
};

// Sizes B_S and B_P to the cache: the B_S^3 table array must fit the
// frequency-table ways and a 2-plane strip of B_S SNPs must fit the block
// ways. B_P is rounded down to a multiple of lane_samples. Throws
// InfeasibleCache when no positive parameters satisfy the bounds.
BlockParams derive_block_params(const CacheSpec& cs, std::uint32_t lane_samples);

// Compute-per-element and relative-memory-traffic lookup for reporting:
// the naive strategy spends 162 instructions per processed element where
// the reduced ones spend 57 while moving 2/3 of the bytes.
struct InstructionModel {
  std::uint32_t ops_per_element = 0;
  double relative_memory = 1.0;
};

InstructionModel instruction_count_model(KernelVariant v);

// --- per-triple kernels ----------------------------------------------------

// v1: one AND chain per genotype combination, then AND with the phenotype
// (cases) or its complement (controls) and popcount, over all samples.
FrequencyTable freq_table_naive(const ThreePlaneDataset& ds, Triple t);

// v2: per class, infer the genotype-2 word by NOR, then one 3-way AND and
// one popcount per combination per word. The phenotype never appears.
FrequencyTable freq_table_reduced(const BitPlaneDataset& ds, Triple t);

// v4 building block: identical contract to freq_table_reduced; the word
// loop runs `lanes` independent popcount accumulations that are reduced at
// the end, which is what lets the compiler keep the loop in vector
// registers. lanes must be in {1,2,4,8}.
FrequencyTable freq_table_wide(const BitPlaneDataset& ds, Triple t, int lanes);

// --- blocked kernel ----------------------------------------------------------

struct BlockTriple {
  std::uint32_t b0 = 0;
  std::uint32_t b1 = 0;
  std::uint32_t b2 = 0;
};

constexpr std::size_t block_slot(std::uint32_t ii0, std::uint32_t ii1,
                                 std::uint32_t ii2, std::uint32_t block_snps) {
  return (std::size_t{ii0} * block_snps + ii1) * block_snps + ii2;
}

// v3/v4 core: processes one triple of SNP blocks over all sample strips,
// accumulating into tables[block_slot(ii0,ii1,ii2,B_S)] for every in-block
// combination whose global indices are strictly ordered and in range.
// tables must hold block_snps^3 zero-initialized entries at block start;
// slots whose global indices are unordered or out of range are untouched.
// lanes = 1 keeps the scalar word loop; lanes > 1 switches to the wide
// inner loop.
void blocked_pass(const BitPlaneDataset& ds, const BlockParams& params,
                  const BlockTriple& bt, std::span<FrequencyTable> tables,
                  int lanes = 1);

// --- thread-per-combination kernel ------------------------------------------

using TableSink = std::function<void(Triple, const FrequencyTable&)>;

// Algorithm of one grid enqueue: every logical thread (i0,i1,i2) of a
// sched_edge^3 grid anchored at `base` owns one combination and a private
// table; threads whose global indices are invalid or not strictly ordered
// emit nothing. Runs on the host, reading through the tiled layout.
void combination_kernel(const TiledDataset& ts, std::uint32_t sched_edge,
                        const BlockTriple& base, const TableSink& sink);

}  // namespace epi3
