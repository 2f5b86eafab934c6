#include <algorithm>
#include <random>

#include "epi3/bitplane.hpp"
#include "epi3/genotype.hpp"
#include "epi3/synthetic.hpp"
#include "epi3/tiled.hpp"

namespace epi3 {

namespace {

constexpr std::size_t words_for(std::size_t samples) {
  return (samples + kWordBits - 1) / kWordBits;
}

constexpr word tail_mask(std::size_t samples) {
  const std::size_t rem = samples % kWordBits;
  return rem == 0 ? ~word{0} : (word{1} << rem) - 1;
}

void set_bit(word* plane, std::size_t pos) {
  plane[pos / kWordBits] |= word{1} << (pos % kWordBits);
}

}  // namespace

const GenotypeMatrix& validate(const GenotypeMatrix& m) {
  if (m.num_snps < 3)
    throw DimensionError("need at least 3 SNPs, got " +
                         std::to_string(m.num_snps));
  if (m.num_samples == 0) throw DimensionError("dataset has no samples");
  if (m.genotypes.size() != m.num_snps * m.num_samples)
    throw DimensionError("genotype storage does not match dimensions");
  if (m.phenotype.size() != m.num_samples)
    throw DimensionError("phenotype storage does not match dimensions");
  for (std::size_t i = 0; i < m.num_snps; ++i)
    for (std::size_t j = 0; j < m.num_samples; ++j)
      if (m.geno(i, j) > 2)
        throw DomainError("genotype value " + std::to_string(m.geno(i, j)), i, j);
  for (std::size_t j = 0; j < m.num_samples; ++j)
    if (m.phenotype[j] > 1)
      throw DomainError("phenotype value " + std::to_string(m.phenotype[j]),
                        0, j);
  return m;
}

BitPlaneDataset::BitPlaneDataset(std::size_t num_snps, std::size_t num_controls,
                                 std::size_t num_cases)
    : num_snps_(num_snps), count_{num_controls, num_cases} {
  for (int cls = 0; cls < 2; ++cls) {
    if (count_[cls] > 0xffffffffull)
      throw DomainError("class sample count exceeds the 32-bit cell cap");
    words_[cls] = words_for(count_[cls]);
    pad_mask_[cls] = tail_mask(count_[cls]);
    data_[cls].assign(num_snps_ * 2 * words_[cls], 0);
  }
}

std::uint8_t BitPlaneDataset::geno_at(int cls, snp_index snp,
                                      std::size_t pos) const {
  const std::size_t w = pos / kWordBits;
  const word bit = word{1} << (pos % kWordBits);
  if (plane(cls, snp, 0)[w] & bit) return 0;
  if (plane(cls, snp, 1)[w] & bit) return 1;
  return 2;
}

BitPlaneDataset binarize(const GenotypeMatrix& m) {
  validate(m);
  const std::size_t n_cases =
      std::count(m.phenotype.begin(), m.phenotype.end(), std::uint8_t{1});
  BitPlaneDataset ds(m.num_snps, m.num_samples - n_cases, n_cases);

  // In-class position of each sample, stable in order of appearance.
  std::vector<std::size_t> pos(m.num_samples);
  std::size_t next[2] = {0, 0};
  for (std::size_t j = 0; j < m.num_samples; ++j)
    pos[j] = next[m.phenotype[j]]++;

  for (std::size_t i = 0; i < m.num_snps; ++i) {
    word* planes[2][2] = {
        {ds.plane(kControls, snp_index(i), 0), ds.plane(kControls, snp_index(i), 1)},
        {ds.plane(kCases, snp_index(i), 0), ds.plane(kCases, snp_index(i), 1)},
    };
    for (std::size_t j = 0; j < m.num_samples; ++j) {
      const std::uint8_t g = m.geno(i, j);
      if (g < 2) set_bit(planes[m.phenotype[j]][g], pos[j]);
    }
  }
  return ds;
}

GenotypeMatrix decode(const BitPlaneDataset& ds) {
  GenotypeMatrix m;
  m.num_snps = ds.num_snps();
  m.num_samples = ds.num_samples();
  m.genotypes.resize(m.num_snps * m.num_samples);
  m.phenotype.resize(m.num_samples);
  for (std::size_t j = 0; j < m.num_samples; ++j)
    m.phenotype[j] = j < ds.num_controls() ? 0 : 1;
  for (std::size_t i = 0; i < m.num_snps; ++i) {
    for (std::size_t j = 0; j < ds.num_controls(); ++j)
      m.geno(i, j) = ds.geno_at(kControls, snp_index(i), j);
    for (std::size_t j = 0; j < ds.num_cases(); ++j)
      m.geno(i, ds.num_controls() + j) = ds.geno_at(kCases, snp_index(i), j);
  }
  return m;
}

ThreePlaneDataset ThreePlaneDataset::from_matrix(const GenotypeMatrix& m) {
  validate(m);
  ThreePlaneDataset ds;
  ds.num_snps_ = m.num_snps;
  ds.num_samples_ = m.num_samples;
  ds.words_ = words_for(m.num_samples);
  ds.pad_mask_ = tail_mask(m.num_samples);
  ds.planes_.assign(m.num_snps * 3 * ds.words_, 0);
  ds.phenotype_.assign(ds.words_, 0);
  for (std::size_t j = 0; j < m.num_samples; ++j)
    if (m.phenotype[j]) set_bit(ds.phenotype_.data(), j);
  for (std::size_t i = 0; i < m.num_snps; ++i) {
    word* base = ds.planes_.data() + i * 3 * ds.words_;
    for (std::size_t j = 0; j < m.num_samples; ++j)
      set_bit(base + m.geno(i, j) * ds.words_, j);
  }
  return ds;
}

TiledDataset::TiledDataset(std::size_t num_snps, std::size_t num_controls,
                           std::size_t num_cases, std::uint32_t block_snps)
    : num_snps_(num_snps),
      block_snps_(block_snps),
      count_{num_controls, num_cases} {
  if (block_snps_ == 0) throw DomainError("block size must be positive");
  num_blocks_ = (num_snps_ + block_snps_ - 1) / block_snps_;
  for (int cls = 0; cls < 2; ++cls) {
    words_[cls] = words_for(count_[cls]);
    pad_mask_[cls] = tail_mask(count_[cls]);
    data_[cls].assign(num_blocks_ * words_[cls] * 2 * block_snps_, 0);
  }
}

TiledDataset transpose_tile(const BitPlaneDataset& ds, std::uint32_t block_snps) {
  TiledDataset ts(ds.num_snps(), ds.num_controls(), ds.num_cases(), block_snps);
  for (int cls = 0; cls < 2; ++cls)
    for (std::size_t i = 0; i < ds.num_snps(); ++i)
      for (int g = 0; g < 2; ++g) {
        const word* src = ds.plane(cls, snp_index(i), g);
        for (std::size_t w = 0; w < ds.words(cls); ++w)
          ts.word_ref(cls, snp_index(i), g, w) = src[w];
      }
  return ts;
}

BitPlaneDataset untile(const TiledDataset& ts) {
  BitPlaneDataset ds(ts.num_snps(), ts.class_count(kControls),
                     ts.class_count(kCases));
  for (int cls = 0; cls < 2; ++cls)
    for (std::size_t i = 0; i < ts.num_snps(); ++i)
      for (int g = 0; g < 2; ++g) {
        word* dst = ds.plane(cls, snp_index(i), g);
        for (std::size_t w = 0; w < ts.words(cls); ++w)
          dst[w] = ts.word_at(cls, snp_index(i), g, w);
      }
  return ds;
}

namespace {

// Uniform double in [0,1) from the top 53 bits; keeps generation
// bit-for-bit reproducible across standard libraries.
double next_unit(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

GenotypeMatrix generate_synthetic(std::size_t num_snps, std::size_t num_samples,
                                  double maf, std::uint64_t seed,
                                  const std::optional<PlantSpec>& plant) {
  if (!(maf > 0.0 && maf <= 0.5))
    throw DomainError("maf must be in (0, 0.5], got " + std::to_string(maf));
  if (num_snps < 3) throw DomainError("need at least 3 SNPs");
  if (num_samples == 0) throw DomainError("need at least 1 sample");
  if (plant) {
    const Triple& t = plant->triple;
    if (t.i0 == t.i1 || t.i0 == t.i2 || t.i1 == t.i2)
      throw DomainError("plant SNP indices must be distinct");
    if (t.i0 >= num_snps || t.i1 >= num_snps || t.i2 >= num_snps)
      throw DomainError("plant SNP index out of range");
    for (std::uint8_t g : plant->target)
      if (g > 2) throw DomainError("plant target genotype out of range");
    if (!(plant->p_case_match >= 0.0 && plant->p_case_match <= 1.0 &&
          plant->p_case_other >= 0.0 && plant->p_case_other <= 1.0))
      throw DomainError("plant probabilities must be in [0, 1]");
    if (!(plant->p_case_match > plant->p_case_other))
      throw DomainError("plant needs p_case_match > p_case_other");
  }

  const double p0 = (1.0 - maf) * (1.0 - maf);
  const double p01 = p0 + 2.0 * maf * (1.0 - maf);

  GenotypeMatrix m;
  m.num_snps = num_snps;
  m.num_samples = num_samples;
  m.genotypes.resize(num_snps * num_samples);
  m.phenotype.resize(num_samples);

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < num_snps; ++i)
    for (std::size_t j = 0; j < num_samples; ++j) {
      const double u = next_unit(rng);
      m.geno(i, j) = u < p0 ? 0 : (u < p01 ? 1 : 2);
    }
  for (std::size_t j = 0; j < num_samples; ++j) {
    double p_case = 0.5;
    if (plant) {
      const bool match = m.geno(plant->triple.i0, j) == plant->target[0] &&
                         m.geno(plant->triple.i1, j) == plant->target[1] &&
                         m.geno(plant->triple.i2, j) == plant->target[2];
      p_case = match ? plant->p_case_match : plant->p_case_other;
    }
    m.phenotype[j] = next_unit(rng) < p_case ? 1 : 0;
  }
  return m;
}

}  // namespace epi3
