#pragma once

#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

#include "epi3/common.hpp"
#include "epi3/genotype.hpp"

namespace epi3 {

// Genotype-2 bits are never stored; they are the complement of the other
// two planes. `mask` clears padding positions so the inferred plane cannot
// leak set bits past the last sample of the final word.
constexpr word infer_plane2(word w0, word w1, word mask) {
  assert((w0 & w1 & mask) == 0);    // planes are mutually exclusive
  assert(((w0 | w1) & ~mask) == 0); // stored planes keep padding clear
  return ~(w0 | w1) & mask;
}

// Phenotype-split, word-packed genotype planes. Per SNP and class (controls
// first, then cases, each contiguous and in order of appearance), planes 0
// and 1 are stored with one bit per sample; padding bits are zero.
class BitPlaneDataset {
 public:
  BitPlaneDataset() = default;
  BitPlaneDataset(std::size_t num_snps, std::size_t num_controls,
                  std::size_t num_cases);

  std::size_t num_snps() const { return num_snps_; }
  std::size_t num_controls() const { return count_[kControls]; }
  std::size_t num_cases() const { return count_[kCases]; }
  std::size_t num_samples() const { return count_[0] + count_[1]; }

  std::size_t class_count(int cls) const { return count_[cls]; }
  std::size_t words(int cls) const { return words_[cls]; }
  // Mask for the final word of a class; all bits set when the sample count
  // is a multiple of the word width (or the class is empty).
  word pad_mask(int cls) const { return pad_mask_[cls]; }

  const word* plane(int cls, snp_index snp, int g) const {
    return data_[cls].data() + plane_offset(cls, snp, g);
  }
  word* plane(int cls, snp_index snp, int g) {
    return data_[cls].data() + plane_offset(cls, snp, g);
  }
  std::span<const word> plane_span(int cls, snp_index snp, int g) const {
    return {plane(cls, snp, g), words_[cls]};
  }

  // Genotype of one sample, addressed by class and in-class position.
  std::uint8_t geno_at(int cls, snp_index snp, std::size_t pos) const;

  friend bool operator==(const BitPlaneDataset&, const BitPlaneDataset&) = default;

 private:
  std::size_t plane_offset(int cls, snp_index snp, int g) const {
    return (std::size_t{snp} * 2 + std::size_t(g)) * words_[cls];
  }

  std::size_t num_snps_ = 0;
  std::size_t count_[2] = {0, 0};
  std::size_t words_[2] = {0, 0};
  word pad_mask_[2] = {~word{0}, ~word{0}};
  std::vector<word> data_[2];  // per class: [snp][plane][word]
};

// Packs a validated matrix. Samples are reordered class-contiguously
// (controls first, stable within class); the search output never refers to
// sample identity, so the original interleaving is not kept.
BitPlaneDataset binarize(const GenotypeMatrix& m);

// Exact inverse of binarize up to the class reorder: controls come first.
GenotypeMatrix decode(const BitPlaneDataset& ds);

// Unsplit representation used by the naive kernel: all three genotype
// planes stored per SNP over the full sample range, plus a packed
// phenotype bit-vector (bit set = case).
class ThreePlaneDataset {
 public:
  static ThreePlaneDataset from_matrix(const GenotypeMatrix& m);

  std::size_t num_snps() const { return num_snps_; }
  std::size_t num_samples() const { return num_samples_; }
  std::size_t words() const { return words_; }
  word pad_mask() const { return pad_mask_; }

  const word* plane(snp_index snp, int g) const {
    return planes_.data() + (std::size_t{snp} * 3 + std::size_t(g)) * words_;
  }
  const word* phenotype() const { return phenotype_.data(); }

 private:
  std::size_t num_snps_ = 0;
  std::size_t num_samples_ = 0;
  std::size_t words_ = 0;
  word pad_mask_ = ~word{0};
  std::vector<word> planes_;     // [snp][g in 0..2][word]
  std::vector<word> phenotype_;  // [word]
};

}  // namespace epi3
