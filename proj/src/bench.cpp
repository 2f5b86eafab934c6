#include "epi3/bench.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

namespace epi3 {

BenchReport make_report(KernelVariant variant, std::uint64_t num_snps,
                        std::uint64_t num_samples, unsigned threads,
                        std::vector<double> repeat_seconds) {
  if (repeat_seconds.empty()) throw DomainError("need at least one repeat");
  if (threads == 0) throw DomainError("threads must be >= 1");

  BenchReport r;
  r.variant = variant;
  r.num_snps = num_snps;
  r.num_samples = num_samples;
  r.threads = threads;
  r.repeat_seconds = std::move(repeat_seconds);
  // Minimum over repeats: scheduler noise only ever adds time.
  r.elapsed_seconds =
      *std::min_element(r.repeat_seconds.begin(), r.repeat_seconds.end());

  const unsigned __int128 elements =
      (unsigned __int128)(num_combinations(num_snps, 3)) * num_samples;
  if (elements > std::numeric_limits<std::uint64_t>::max())
    throw DomainError("element count exceeds 64 bits");
  r.elements = std::uint64_t(elements);

  r.elements_per_second = double(r.elements) / r.elapsed_seconds;
  r.elements_per_second_per_thread = r.elements_per_second / threads;

  const InstructionModel im = instruction_count_model(variant);
  r.model_ops_per_element = im.ops_per_element;
  r.model_bytes_per_element = kNaiveBytesPerElement * im.relative_memory;
  r.arithmetic_intensity =
      double(im.ops_per_element) / r.model_bytes_per_element;
  return r;
}

BenchReport measure(const BitPlaneDataset& ds, const SearchConfig& cfg,
                    unsigned repeats) {
  if (repeats < 1) throw DomainError("repeats must be >= 1");
  std::vector<double> seconds;
  seconds.reserve(repeats);
  SearchResult reference;
  for (unsigned r = 0; r < repeats; ++r) {
    SearchResult res = run_search(ds, cfg);
    if (r == 0) {
      reference = res;
    } else if (!same_outcome(reference, res)) {
      throw Error("search outcome changed between repeats");
    }
    seconds.push_back(res.stats.elapsed_seconds);
  }
  return make_report(cfg.variant, ds.num_snps(), ds.num_samples(), cfg.threads,
                     std::move(seconds));
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string emit_report(const BenchReport& r, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out =
        "variant,M,N,threads,elapsed_s,elements,eps,eps_per_thread,"
        "model_ops,model_bytes,ai\n";
    out += variant_name(r.variant);
    out += ',' + std::to_string(r.num_snps);
    out += ',' + std::to_string(r.num_samples);
    out += ',' + std::to_string(r.threads);
    out += ',' + fmt_double(r.elapsed_seconds);
    out += ',' + std::to_string(r.elements);
    out += ',' + fmt_double(r.elements_per_second);
    out += ',' + fmt_double(r.elements_per_second_per_thread);
    out += ',' + std::to_string(r.model_ops_per_element);
    out += ',' + fmt_double(r.model_bytes_per_element);
    out += ',' + fmt_double(r.arithmetic_intensity);
    out += '\n';
    return out;
  }

  nlohmann::json j{
      {"variant", variant_name(r.variant)},
      {"M", r.num_snps},
      {"N", r.num_samples},
      {"threads", r.threads},
      {"elapsed_s", r.elapsed_seconds},
      {"elements", r.elements},
      {"eps", r.elements_per_second},
      {"eps_per_thread", r.elements_per_second_per_thread},
      {"model_ops", r.model_ops_per_element},
      {"model_bytes", r.model_bytes_per_element},
      {"ai", r.arithmetic_intensity},
      {"repeats_s", r.repeat_seconds},
  };
  return j.dump(2) + "\n";
}

}  // namespace epi3
