#pragma once

#include <cstdint>

#include "epi3/common.hpp"
#include "epi3/genotype.hpp"
#include "epi3/scoring.hpp"
#include "epi3/search.hpp"

namespace epi3 {

// Brute-force references for the bit-parallel paths. Deliberately written
// with per-sample loops and a different K2 formulation so a transcription
// error in the fast code cannot hide in both routes. Never optimized.

// Expects an already-validated matrix and an ordered triple.
FrequencyTable oracle_freq_table(const GenotypeMatrix& m, Triple t);

// Exhaustive scored search over all ordered triples. K2 is evaluated in
// factorial form, ln((r+1)!) - ln(r0!) - ln(r1!), with term-by-term log
// accumulation (no shared prefix table). Throws CapExceeded when
// num_snps exceeds max_snps.
SearchResult oracle_search(const GenotypeMatrix& m, std::size_t max_snps = 64,
                           std::uint32_t top_k = 10);

}  // namespace epi3
