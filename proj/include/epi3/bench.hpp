#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epi3/bitplane.hpp"
#include "epi3/search.hpp"

namespace epi3 {

// Throughput in processed elements: combinations times samples,
// nCr(M,3) * N. Timing covers run_search only, not I/O or packing.
struct BenchReport {
  KernelVariant variant = KernelVariant::BlockedWide;
  std::uint64_t num_snps = 0;
  std::uint64_t num_samples = 0;
  unsigned threads = 1;
  double elapsed_seconds = 0.0;       // minimum over repeats
  std::uint64_t elements = 0;         // nCr(M,3) * N
  double elements_per_second = 0.0;
  double elements_per_second_per_thread = 0.0;
  std::uint32_t model_ops_per_element = 0;
  double model_bytes_per_element = 0.0;
  double arithmetic_intensity = 0.0;  // model ops / model bytes
  std::vector<double> repeat_seconds;  // every repeat, in run order
};

// Bytes moved per element by the naive strategy in the analytic model:
// nine plane bits per combination-sample plus the amortized phenotype bit.
inline constexpr double kNaiveBytesPerElement = 9.0 / 8.0;

// Pure metric arithmetic shared by measure() and the tests.
BenchReport make_report(KernelVariant variant, std::uint64_t num_snps,
                        std::uint64_t num_samples, unsigned threads,
                        std::vector<double> repeat_seconds);

// Runs the search `repeats` times, checks every run returns the same
// outcome (anything else is a determinism bug worth failing loudly on),
// and reports the minimum elapsed time.
BenchReport measure(const BitPlaneDataset& ds, const SearchConfig& cfg,
                    unsigned repeats);

enum class ReportFormat { csv, json };

// CSV: one header line plus one row; JSON: one object carrying the same
// eleven fields plus the per-repeat times.
std::string emit_report(const BenchReport& report, ReportFormat format);

}  // namespace epi3
