#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace epi3 {

// Packed bit-vectors use one machine word per 64 samples throughout; the
// on-disk format uses the same width, little-endian.
using word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

using snp_index = std::uint32_t;

// Class (phenotype) column indices used across tables and datasets.
inline constexpr int kControls = 0;
inline constexpr int kCases = 1;

// Ordered SNP triple, i0 < i1 < i2 everywhere a triple names a combination.
struct Triple {
  snp_index i0 = 0;
  snp_index i1 = 0;
  snp_index i2 = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

inline std::string to_string(const Triple& t) {
  return "(" + std::to_string(t.i0) + "," + std::to_string(t.i1) + "," +
         std::to_string(t.i2) + ")";
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value fell outside its domain (genotype not in {0,1,2}, maf out of
// range, ...). Carries the first offending coordinate when one exists.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
  DomainError(const std::string& what, std::size_t snp, std::size_t sample)
      : Error(what + " at snp " + std::to_string(snp) + ", sample " +
              std::to_string(sample)),
        snp_(snp),
        sample_(sample),
        has_coord_(true) {}

  bool has_coordinate() const { return has_coord_; }
  std::size_t snp() const { return snp_; }
  std::size_t sample() const { return sample_; }

 private:
  std::size_t snp_ = 0;
  std::size_t sample_ = 0;
  bool has_coord_ = false;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Text parse failure; line is 1-based for text files, offset counts bytes
// for binary files.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line_or_offset)
      : Error(what + " (at " + std::to_string(line_or_offset) + ")"),
        where_(line_or_offset) {}

  std::size_t where() const { return where_; }

 private:
  std::size_t where_;
};

class MagicMismatch : public Error {
 public:
  using Error::Error;
};

class TruncatedFile : public Error {
 public:
  using Error::Error;
};

class InfeasibleCache : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace epi3
