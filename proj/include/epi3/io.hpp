#pragma once

#include <filesystem>
#include <iosfwd>

#include "epi3/bitplane.hpp"
#include "epi3/genotype.hpp"

namespace epi3 {

// Text genotype format (UTF-8):
//   line 1          #SNPS=<M> SAMPLES=<N>
//   lines 2..M+1    N space-separated genotype tokens in {0,1,2}, SNP-major
//   line M+2        N phenotype tokens in {0,1}
GenotypeMatrix read_text(std::istream& in);
GenotypeMatrix read_text(const std::filesystem::path& path);
void write_text(std::ostream& out, const GenotypeMatrix& m);
void write_text(const std::filesystem::path& path, const GenotypeMatrix& m);

// Packed binary format, all integers little-endian:
//   magic "EPI3", u32 version = 1, u64 M, u64 N0, u64 N1, then per SNP:
//   controls plane0, controls plane1, cases plane0, cases plane1, each
//   ceil(Nc/64) 64-bit words, bit b of word w = sample w*64+b, padding
//   bits zero. The header's size arithmetic is checked against the file
//   before any allocation.
BitPlaneDataset read_packed(std::istream& in);
BitPlaneDataset read_packed(const std::filesystem::path& path);
void write_packed(std::ostream& out, const BitPlaneDataset& ds);
void write_packed(const std::filesystem::path& path, const BitPlaneDataset& ds);

// True when the file starts with the packed-format magic.
bool is_packed_file(const std::filesystem::path& path);

}  // namespace epi3
