#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "epi3/bitplane.hpp"
#include "epi3/genotype.hpp"
#include "epi3/synthetic.hpp"
#include "epi3/tiled.hpp"
#include "test_util.hpp"

using namespace epi3;
using testutil::class_sorted;
using testutil::make_matrix;
using testutil::random_matrix;

TEST_CASE("validate accepts and rejects") {
  GenotypeMatrix ok;
  ok.num_snps = 3;
  ok.num_samples = 4;
  ok.genotypes.assign(12, 0);
  ok.phenotype = {0, 0, 1, 1};
  CHECK(&validate(ok) == &ok);

  GenotypeMatrix bad = ok;
  bad.geno(1, 2) = 3;
  CHECK_THROWS_AS(validate(bad), DomainError);
  try {
    validate(bad);
  } catch (const DomainError& e) {
    CHECK(e.has_coordinate());
    CHECK(e.snp() == 1);
    CHECK(e.sample() == 2);
  }

  GenotypeMatrix narrow;
  narrow.num_snps = 2;
  narrow.num_samples = 4;
  narrow.genotypes.assign(8, 0);
  narrow.phenotype.assign(4, 0);
  CHECK_THROWS_AS(validate(narrow), DimensionError);

  GenotypeMatrix empty;
  empty.num_snps = 3;
  CHECK_THROWS_AS(validate(empty), DimensionError);

  GenotypeMatrix badpheno = ok;
  badpheno.phenotype[3] = 2;
  CHECK_THROWS_AS(validate(badpheno), DomainError);
}

TEST_CASE("infer_plane2 masks padding") {
  CHECK(infer_plane2(0b0011, 0b0100, 0b1111) == 0b1000);
  CHECK(infer_plane2(0, 0, 0b111) == 0b111);
  CHECK(infer_plane2(0, 0, 0b011) == 0b011);
}

TEST_CASE("binarize packs one sample per genotype") {
  // Three control samples with genotypes 0, 1, 2 at each SNP.
  const GenotypeMatrix m = make_matrix({{0, 1, 2},
                                        {0, 1, 2},
                                        {0, 1, 2},
                                        {0, 0, 0}});
  const BitPlaneDataset ds = binarize(m);
  CHECK(ds.num_controls() == 3);
  CHECK(ds.num_cases() == 0);
  CHECK(ds.words(kCases) == 0);
  for (snp_index i = 0; i < 3; ++i) {
    CHECK(ds.plane(kControls, i, 0)[0] == 0b001);
    CHECK(ds.plane(kControls, i, 1)[0] == 0b010);
    CHECK(infer_plane2(ds.plane(kControls, i, 0)[0], ds.plane(kControls, i, 1)[0],
                       ds.pad_mask(kControls)) == 0b100);
  }
}

TEST_CASE("binarize all-zero genotypes") {
  GenotypeMatrix m;
  m.num_snps = 3;
  m.num_samples = 5;
  m.genotypes.assign(15, 0);
  m.phenotype.assign(5, 0);
  const BitPlaneDataset ds = binarize(m);
  CHECK(ds.plane(kControls, 0, 0)[0] == 0b11111);
  CHECK(ds.plane(kControls, 0, 1)[0] == 0);
}

TEST_CASE("decode reverses binarize up to the class reorder") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    const GenotypeMatrix m = random_matrix(rng, 8, 64);
    CHECK(decode(binarize(m)) == class_sorted(m));
  }
  // Already class-sorted input round-trips exactly.
  GenotypeMatrix sorted = class_sorted(random_matrix(rng, 5, 77));
  CHECK(decode(binarize(sorted)) == sorted);
}

TEST_CASE("binarize inverts decode exactly") {
  std::mt19937_64 rng(43);
  const BitPlaneDataset ds = binarize(random_matrix(rng, 7, 139));
  CHECK(binarize(decode(ds)) == ds);
}

TEST_CASE("planes are exclusive, conserving, and padding-clean") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t snps = 3 + rng() % 6;
    const std::size_t samples = 1 + rng() % 200;
    const BitPlaneDataset ds = binarize(random_matrix(rng, snps, samples));
    for (int cls = 0; cls < 2; ++cls) {
      const std::size_t nw = ds.words(cls);
      for (snp_index i = 0; i < snps; ++i) {
        std::size_t total = 0;
        for (std::size_t w = 0; w < nw; ++w) {
          const word mask = w + 1 == nw ? ds.pad_mask(cls) : ~word{0};
          const word p0 = ds.plane(cls, i, 0)[w];
          const word p1 = ds.plane(cls, i, 1)[w];
          const word p2 = infer_plane2(p0, p1, mask);
          CHECK((p0 & p1) == 0);
          CHECK((p0 & ~mask) == 0);  // padding bits clear
          CHECK((p1 & ~mask) == 0);
          CHECK((p0 & p2) == 0);
          CHECK((p1 & p2) == 0);
          total += std::size_t(std::popcount(p0)) + std::size_t(std::popcount(p1)) +
                   std::size_t(std::popcount(p2));
        }
        CHECK(total == ds.class_count(cls));
      }
    }
  }
}

TEST_CASE("three-plane dataset matches the matrix") {
  std::mt19937_64 rng(3);
  const GenotypeMatrix m = random_matrix(rng, 4, 130);
  const ThreePlaneDataset tp = ThreePlaneDataset::from_matrix(m);
  CHECK(tp.words() == 3);
  for (std::size_t i = 0; i < m.num_snps; ++i)
    for (std::size_t j = 0; j < m.num_samples; ++j) {
      const word bit = word{1} << (j % kWordBits);
      int found = -1;
      for (int g = 0; g < 3; ++g)
        if (tp.plane(snp_index(i), g)[j / kWordBits] & bit) {
          CHECK(found == -1);  // exactly one plane holds each sample
          found = g;
        }
      CHECK(found == m.geno(i, j));
      CHECK(bool(tp.phenotype()[j / kWordBits] & bit) == bool(m.phenotype[j]));
    }
}

TEST_CASE("tiled reads equal plane reads") {
  std::mt19937_64 rng(21);
  const BitPlaneDataset ds = binarize(random_matrix(rng, 11, 150));
  for (std::uint32_t bs : {1u, 3u, 32u}) {
    const TiledDataset ts = transpose_tile(ds, bs);
    CHECK(ts.num_blocks() == (ds.num_snps() + bs - 1) / bs);
    for (int cls = 0; cls < 2; ++cls)
      for (snp_index i = 0; i < ds.num_snps(); ++i)
        for (int g = 0; g < 2; ++g)
          for (std::size_t w = 0; w < ds.words(cls); ++w)
            CHECK(ts.word_at(cls, i, g, w) == ds.plane(cls, i, g)[w]);
  }
}

TEST_CASE("partial final block flags invalid snps") {
  std::mt19937_64 rng(5);
  const BitPlaneDataset ds = binarize(random_matrix(rng, 4, 30));
  const TiledDataset ts = transpose_tile(ds, 64);
  CHECK(ts.num_blocks() == 1);
  CHECK(ts.valid_snp(3));
  CHECK_FALSE(ts.valid_snp(4));
  CHECK_FALSE(ts.valid_snp(63));
}

TEST_CASE("untile round-trips") {
  std::mt19937_64 rng(99);
  const BitPlaneDataset ds = binarize(random_matrix(rng, 37, 201));
  CHECK(untile(transpose_tile(ds, 32)) == ds);
  CHECK(untile(transpose_tile(ds, 1)) == ds);
  CHECK(untile(transpose_tile(ds, 64)) == ds);
}

TEST_CASE("synthetic generation is deterministic") {
  const GenotypeMatrix a = generate_synthetic(10, 100, 0.5, 7);
  const GenotypeMatrix b = generate_synthetic(10, 100, 0.5, 7);
  CHECK(a == b);
  const GenotypeMatrix c = generate_synthetic(10, 100, 0.5, 8);
  CHECK(a != c);
}

TEST_CASE("synthetic genotype frequencies follow Hardy-Weinberg") {
  // maf = 0.5 gives expected proportions (1/4, 1/2, 1/4); check 3-sigma
  // binomial bounds over 10^5 draws.
  const GenotypeMatrix m = generate_synthetic(100, 1000, 0.5, 1234);
  std::size_t count[3] = {};
  for (auto g : m.genotypes) ++count[g];
  const double n = double(m.genotypes.size());
  const double expect[3] = {0.25 * n, 0.5 * n, 0.25 * n};
  const double p[3] = {0.25, 0.5, 0.25};
  for (int g = 0; g < 3; ++g) {
    const double sigma = std::sqrt(n * p[g] * (1 - p[g]));
    CHECK(std::abs(double(count[g]) - expect[g]) <= 3 * sigma);
  }
}

TEST_CASE("synthetic parameter validation") {
  CHECK_THROWS_AS(generate_synthetic(10, 10, 0.0, 1), DomainError);
  CHECK_THROWS_AS(generate_synthetic(10, 10, 0.9, 1), DomainError);
  CHECK_THROWS_AS(generate_synthetic(2, 10, 0.3, 1), DomainError);
  CHECK_THROWS_AS(generate_synthetic(10, 0, 0.3, 1), DomainError);

  PlantSpec dup;
  dup.triple = {1, 1, 5};
  CHECK_THROWS_AS(generate_synthetic(10, 10, 0.3, 1, dup), DomainError);

  PlantSpec out;
  out.triple = {1, 2, 10};
  CHECK_THROWS_AS(generate_synthetic(10, 10, 0.3, 1, out), DomainError);

  PlantSpec flat;
  flat.triple = {1, 2, 3};
  flat.p_case_match = 0.5;
  flat.p_case_other = 0.5;
  CHECK_THROWS_AS(generate_synthetic(10, 10, 0.3, 1, flat), DomainError);
}

TEST_CASE("planted samples skew the phenotype") {
  PlantSpec plant;
  plant.triple = {0, 1, 2};
  plant.target = {1, 1, 1};
  plant.p_case_match = 1.0;
  plant.p_case_other = 0.0;
  const GenotypeMatrix m = generate_synthetic(5, 2000, 0.5, 3, plant);
  for (std::size_t j = 0; j < m.num_samples; ++j) {
    const bool match = m.geno(0, j) == 1 && m.geno(1, j) == 1 && m.geno(2, j) == 1;
    CHECK(m.phenotype[j] == (match ? 1 : 0));
  }
}
