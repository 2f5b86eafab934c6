#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "epi3/common.hpp"
#include "epi3/genotype.hpp"

namespace epi3 {

// Ground-truth interaction injected into a synthetic dataset: samples whose
// genotypes at `triple` equal `target` are cases with probability
// p_case_match, everyone else with p_case_other.
struct PlantSpec {
  Triple triple;
  std::array<std::uint8_t, 3> target = {1, 1, 1};
  double p_case_match = 0.9;
  double p_case_other = 0.1;
};

// Draws genotypes per SNP/sample under Hardy-Weinberg proportions
// ((1-maf)^2, 2*maf*(1-maf), maf^2) and phenotypes Bernoulli(0.5), or per
// the plant spec when one is given. Pure function of its arguments: the
// same seed always yields the same matrix, on any platform.
GenotypeMatrix generate_synthetic(std::size_t num_snps, std::size_t num_samples,
                                  double maf, std::uint64_t seed,
                                  const std::optional<PlantSpec>& plant = {});

}  // namespace epi3
