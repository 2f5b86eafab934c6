#pragma once

#include <cstdint>
#include <vector>

#include "epi3/common.hpp"

namespace epi3 {

// Raw case-control genotype data: M SNPs by N samples, values in {0,1,2},
// plus one phenotype bit per sample (0 = control, 1 = case). This is the
// per-sample ground truth everything else is packed from and checked
// against.
struct GenotypeMatrix {
  std::size_t num_snps = 0;     // M
  std::size_t num_samples = 0;  // N
  std::vector<std::uint8_t> genotypes;  // SNP-major, size M*N
  std::vector<std::uint8_t> phenotype;  // size N

  std::uint8_t geno(std::size_t snp, std::size_t sample) const {
    return genotypes[snp * num_samples + sample];
  }
  std::uint8_t& geno(std::size_t snp, std::size_t sample) {
    return genotypes[snp * num_samples + sample];
  }

  friend bool operator==(const GenotypeMatrix&, const GenotypeMatrix&) = default;
};

// Checks value domains and dimensions. Returns its argument so call sites
// can chain. Throws DomainError with the first offending coordinate, or
// DimensionError when M < 3 (third-order search needs three SNPs) or N = 0.
const GenotypeMatrix& validate(const GenotypeMatrix& m);

}  // namespace epi3
