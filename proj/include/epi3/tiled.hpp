#pragma once

#include <cstdint>
#include <vector>

#include "epi3/bitplane.hpp"
#include "epi3/common.hpp"

namespace epi3 {

// Transposed/tiled relayout of a BitPlaneDataset: SNPs are grouped in
// blocks of block_snps; within a block, the words for one sample-word
// position sit adjacently (SNP-minor), and sample-word positions advance
// across the block. SNP slots past num_snps in the final partial block are
// zero-filled and reported invalid.
class TiledDataset {
 public:
  TiledDataset() = default;
  TiledDataset(std::size_t num_snps, std::size_t num_controls,
               std::size_t num_cases, std::uint32_t block_snps);

  std::size_t num_snps() const { return num_snps_; }
  std::uint32_t block_snps() const { return block_snps_; }
  std::size_t num_blocks() const { return num_blocks_; }
  std::size_t class_count(int cls) const { return count_[cls]; }
  std::size_t words(int cls) const { return words_[cls]; }
  word pad_mask(int cls) const { return pad_mask_[cls]; }
  bool valid_snp(snp_index snp) const { return snp < num_snps_; }

  word word_at(int cls, snp_index snp, int g, std::size_t w) const {
    const std::size_t block = snp / block_snps_;
    const std::size_t in_block = snp % block_snps_;
    return data_[cls][((block * words_[cls] + w) * 2 + std::size_t(g)) *
                          block_snps_ + in_block];
  }
  word& word_ref(int cls, snp_index snp, int g, std::size_t w) {
    const std::size_t block = snp / block_snps_;
    const std::size_t in_block = snp % block_snps_;
    return data_[cls][((block * words_[cls] + w) * 2 + std::size_t(g)) *
                          block_snps_ + in_block];
  }

  // Base pointer and per-word stride for walking one (snp, plane) column;
  // consecutive sample words of the same SNP are 2*block_snps apart.
  const word* column(int cls, snp_index snp, int g) const {
    const std::size_t block = snp / block_snps_;
    const std::size_t in_block = snp % block_snps_;
    return data_[cls].data() +
           (block * words_[cls] * 2 + std::size_t(g)) * block_snps_ + in_block;
  }
  std::size_t column_stride() const { return 2 * std::size_t{block_snps_}; }

 private:
  std::size_t num_snps_ = 0;
  std::uint32_t block_snps_ = 1;
  std::size_t num_blocks_ = 0;
  std::size_t count_[2] = {0, 0};
  std::size_t words_[2] = {0, 0};
  word pad_mask_[2] = {~word{0}, ~word{0}};
  std::vector<word> data_[2];  // per class: [block][word][plane][snp-in-block]
};

TiledDataset transpose_tile(const BitPlaneDataset& ds, std::uint32_t block_snps);
BitPlaneDataset untile(const TiledDataset& ts);

}  // namespace epi3
