// epi3 — exhaustive third-order epistasis detection on case-control
// genotype data. Subcommands: generate, detect, verify, bench.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epi3/bench.hpp"
#include "epi3/bitplane.hpp"
#include "epi3/io.hpp"
#include "epi3/kernels.hpp"
#include "epi3/oracle.hpp"
#include "epi3/scoring.hpp"
#include "epi3/search.hpp"
#include "epi3/synthetic.hpp"

namespace {

using namespace epi3;

unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

struct CacheFlags {
  std::size_t l1_kb = 48;
  std::uint32_t l1_ways = 12;
  std::uint32_t ft_ways = 7;
  std::uint32_t block_ways = 4;
  std::uint32_t lane_samples = 16;

  CacheSpec spec() const {
    return CacheSpec{l1_kb * 1024, l1_ways, ft_ways, block_ways, 4};
  }
};

void add_cache_flags(CLI::App* cmd, CacheFlags& cf) {
  cmd->add_option("--l1-kb", cf.l1_kb, "L1 data cache size in KiB");
  cmd->add_option("--l1-ways", cf.l1_ways, "L1 associativity");
  cmd->add_option("--ft-ways", cf.ft_ways, "ways reserved for frequency tables");
  cmd->add_option("--block-ways", cf.block_ways, "ways reserved for sample blocks");
  cmd->add_option("--lane-samples", cf.lane_samples,
                  "round B_P down to a multiple of this");
}

PlantSpec parse_plant(const std::string& text) {
  PlantSpec p;
  unsigned i0, i1, i2, g0, g1, g2;
  int consumed = -1;
  if (std::sscanf(text.c_str(), "%u,%u,%u:%u,%u,%u:%lf,%lf%n", &i0, &i1, &i2,
                  &g0, &g1, &g2, &p.p_case_match, &p.p_case_other,
                  &consumed) != 8 ||
      consumed < 0 || text.c_str()[consumed] != '\0')
    throw DomainError(
        "plant spec must look like i0,i1,i2:gx,gy,gz:pmatch,pother");
  p.triple = Triple{i0, i1, i2};
  if (g0 > 2 || g1 > 2 || g2 > 2)
    throw DomainError("plant target genotypes must be in {0,1,2}");
  p.target = {std::uint8_t(g0), std::uint8_t(g1), std::uint8_t(g2)};
  return p;
}

// Loads either format; the matrix view is only materialized on demand
// (verify needs it, detect does not).
BitPlaneDataset load_dataset(const std::filesystem::path& path,
                             std::optional<GenotypeMatrix>* matrix_out) {
  if (is_packed_file(path)) {
    BitPlaneDataset ds = read_packed(path);
    if (matrix_out) *matrix_out = decode(ds);
    return ds;
  }
  GenotypeMatrix m = read_text(path);
  BitPlaneDataset ds = binarize(m);
  if (matrix_out) *matrix_out = std::move(m);
  return ds;
}

int cmd_generate(const std::string& out_path, std::size_t snps,
                 std::size_t samples, double maf, std::uint64_t seed,
                 const std::string& plant_text, const std::string& format) {
  std::optional<PlantSpec> plant;
  if (!plant_text.empty()) plant = parse_plant(plant_text);
  const GenotypeMatrix m = generate_synthetic(snps, samples, maf, seed, plant);
  if (format == "packed")
    write_packed(out_path, binarize(m));
  else
    write_text(out_path, m);
  std::printf("wrote %s: snps=%zu samples=%zu format=%s\n", out_path.c_str(),
              m.num_snps, m.num_samples, format.c_str());
  if (plant)
    std::printf("planted triple %s target (%d,%d,%d) p=%g/%g\n",
                to_string(plant->triple).c_str(), plant->target[0],
                plant->target[1], plant->target[2], plant->p_case_match,
                plant->p_case_other);
  return 0;
}

SearchConfig make_config(KernelVariant variant, const CacheFlags& cf,
                         unsigned threads, std::uint32_t top_k, int lanes,
                         std::uint32_t sched_edge, std::uint32_t tile_snps) {
  SearchConfig cfg;
  cfg.variant = variant;
  cfg.block = derive_block_params(cf.spec(), cf.lane_samples);
  cfg.block.sched_edge = sched_edge;
  if (variant == KernelVariant::ThreadPerCombination)
    cfg.block.block_snps = tile_snps;  // tiled layout granularity
  cfg.threads = threads;
  cfg.top_k = top_k;
  cfg.lanes = lanes;
  return cfg;
}

int cmd_detect(const std::string& in_path, KernelVariant variant,
               const CacheFlags& cf, unsigned threads, std::uint32_t top_k,
               int lanes, std::uint32_t sched_edge, std::uint32_t tile_snps,
               bool as_json) {
  const BitPlaneDataset ds = load_dataset(in_path, nullptr);
  const SearchConfig cfg =
      make_config(variant, cf, threads, top_k, lanes, sched_edge, tile_snps);
  const SearchResult res = run_search(ds, cfg);

  if (as_json) {
    nlohmann::json top = nlohmann::json::array();
    for (const Hit& h : res.top)
      top.push_back({{"score", h.score},
                     {"triple", {h.triple.i0, h.triple.i1, h.triple.i2}}});
    const nlohmann::json j{
        {"input", in_path},
        {"snps", ds.num_snps()},
        {"samples", ds.num_samples()},
        {"controls", ds.num_controls()},
        {"cases", ds.num_cases()},
        {"variant", variant_name(cfg.variant)},
        {"threads", cfg.threads},
        {"block",
         {{"snps", cfg.block.block_snps},
          {"samples", cfg.block.block_samples},
          {"sched", cfg.block.sched_edge}}},
        {"best",
         {{"score", res.best.score},
          {"triple", {res.best.triple.i0, res.best.triple.i1, res.best.triple.i2}}}},
        {"top", top},
        {"stats",
         {{"combinations", res.stats.combinations_evaluated},
          {"elapsed_s", res.stats.elapsed_seconds},
          {"per_thread_work", res.stats.per_thread_work}}},
    };
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
  }

  std::printf("dataset %s: snps=%zu samples=%zu controls=%zu cases=%zu\n",
              in_path.c_str(), ds.num_snps(), ds.num_samples(),
              ds.num_controls(), ds.num_cases());
  std::printf("variant=%s threads=%u block=<%u,%u> sched=%u lanes=%d\n",
              variant_name(cfg.variant), cfg.threads, cfg.block.block_snps,
              cfg.block.block_samples, cfg.block.sched_edge, cfg.lanes);
  std::printf("best %s k2=%.9f\n", to_string(res.best.triple).c_str(),
              res.best.score);
  std::printf("top %zu:\n", res.top.size());
  for (std::size_t i = 0; i < res.top.size(); ++i)
    std::printf("  %2zu. %s k2=%.9f\n", i + 1,
                to_string(res.top[i].triple).c_str(), res.top[i].score);
  std::printf("stats: combinations=%llu elapsed_s=%.3f\n",
              (unsigned long long)res.stats.combinations_evaluated,
              res.stats.elapsed_seconds);
  return 0;
}

void print_cells(const FrequencyTable& ft) {
  for (int c = 0; c < kNumCombos; ++c)
    std::printf("  combo (%d,%d,%d): controls=%u cases=%u\n", c / 9,
                c / 3 % 3, c % 3, ft.at(c, kControls), ft.at(c, kCases));
}

int cmd_verify(const std::string& in_path, std::size_t max_snps,
               const CacheFlags& cf) {
  std::optional<GenotypeMatrix> matrix;
  const BitPlaneDataset ds = load_dataset(in_path, &matrix);
  if (ds.num_snps() > max_snps)
    throw CapExceeded("verify capped at " + std::to_string(max_snps) +
                      " SNPs, dataset has " + std::to_string(ds.num_snps()));

  bool all_ok = true;
  const auto report = [&](const std::string& name, bool ok) {
    std::printf("%-28s %s\n", name.c_str(), ok ? "PASS" : "FAIL");
    all_ok = all_ok && ok;
  };

  // Frequency tables of every variant against the per-sample oracle, for
  // every triple; the first mismatch is shown cell by cell.
  const auto check_tables = [&](const std::string& name, auto&& table_of) {
    for (snp_index i0 = 0; i0 + 2 < ds.num_snps(); ++i0)
      for (snp_index i1 = i0 + 1; i1 + 1 < ds.num_snps(); ++i1)
        for (snp_index i2 = i1 + 1; i2 < ds.num_snps(); ++i2) {
          const Triple t{i0, i1, i2};
          const FrequencyTable expect = oracle_freq_table(*matrix, t);
          const FrequencyTable got = table_of(t);
          if (got != expect) {
            report(name, false);
            std::printf("first mismatch at triple %s\n", to_string(t).c_str());
            std::printf("oracle:\n");
            print_cells(expect);
            std::printf("%s:\n", name.c_str());
            print_cells(got);
            return;
          }
        }
    report(name, true);
  };

  const ThreePlaneDataset three = ThreePlaneDataset::from_matrix(*matrix);
  check_tables("tables v1 vs oracle",
               [&](Triple t) { return freq_table_naive(three, t); });
  check_tables("tables v2 vs oracle",
               [&](Triple t) { return freq_table_reduced(ds, t); });

  const BlockParams params = derive_block_params(cf.spec(), cf.lane_samples);
  const auto blocked_tables = [&](int lanes) {
    // Collect per-triple tables through the block driver.
    std::vector<std::pair<Triple, FrequencyTable>> out;
    const std::uint32_t bs = params.block_snps;
    const std::uint64_t nb = (ds.num_snps() + bs - 1) / bs;
    std::vector<FrequencyTable> tables(std::size_t{bs} * bs * bs);
    for (std::uint64_t item = 0; item < num_block_triples(nb); ++item) {
      const BlockTriple bt = decode_block_triple(item, nb);
      std::fill(tables.begin(), tables.end(), FrequencyTable{});
      blocked_pass(ds, params, bt, tables, lanes);
      for_each_cell_triple(bt, bs, ds.num_snps(), [&](Triple t) {
        out.emplace_back(t, tables[block_slot(t.i0 - bt.b0 * bs,
                                              t.i1 - bt.b1 * bs,
                                              t.i2 - bt.b2 * bs, bs)]);
      });
    }
    return out;
  };
  const auto check_collected = [&](const std::string& name, auto collected) {
    for (const auto& [t, got] : collected) {
      const FrequencyTable expect = oracle_freq_table(*matrix, t);
      if (got != expect) {
        report(name, false);
        std::printf("first mismatch at triple %s\n", to_string(t).c_str());
        std::printf("oracle:\n");
        print_cells(expect);
        std::printf("%s:\n", name.c_str());
        print_cells(got);
        return;
      }
    }
    report(name, true);
  };
  check_collected("tables v3 vs oracle", blocked_tables(1));
  check_collected("tables v4 vs oracle", blocked_tables(8));

  {
    const TiledDataset ts = transpose_tile(ds, 64);
    std::vector<std::pair<Triple, FrequencyTable>> out;
    const std::uint32_t edge = 256;
    const std::uint64_t nb = (ds.num_snps() + edge - 1) / edge;
    for (std::uint64_t item = 0; item < num_block_triples(nb); ++item) {
      combination_kernel(ts, edge, decode_block_triple(item, nb),
                         [&](Triple t, const FrequencyTable& ft) {
                           out.emplace_back(t, ft);
                         });
    }
    check_collected("tables tpc vs oracle", std::move(out));
  }

  const SearchResult expect = oracle_search(*matrix, max_snps);
  for (const char* name : {"v1", "v2", "v3", "v4", "tpc"}) {
    SearchConfig cfg = make_config(variant_from_name(name), cf,
                                   default_threads(), 10, 8, 256, 64);
    const SearchResult got = run_search(ds, cfg);
    const bool ok = got.best.triple == expect.best.triple &&
                    std::abs(got.best.score - expect.best.score) <= 1e-9;
    report(std::string("search ") + name + " vs oracle", ok);
    if (!ok)
      std::printf("  oracle %s k2=%.9f, %s %s k2=%.9f\n",
                  to_string(expect.best.triple).c_str(), expect.best.score,
                  name, to_string(got.best.triple).c_str(), got.best.score);
  }

  return all_ok ? 0 : 1;
}

int cmd_bench(const std::string& in_path, KernelVariant variant,
              const CacheFlags& cf, unsigned threads, unsigned repeats,
              int lanes, std::uint32_t sched_edge, std::uint32_t tile_snps,
              const std::string& format, const std::string& out_path) {
  const BitPlaneDataset ds = load_dataset(in_path, nullptr);
  const SearchConfig cfg =
      make_config(variant, cf, threads, 10, lanes, sched_edge, tile_snps);
  const BenchReport rep = measure(ds, cfg, repeats);
  const std::string text = emit_report(
      rep, format == "json" ? ReportFormat::json : ReportFormat::csv);
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot open " + out_path + " for writing");
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exhaustive third-order epistasis detection"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  std::size_t g_snps = 0, g_samples = 0;
  double g_maf = 0.25;
  std::uint64_t g_seed = 1;
  std::string g_plant, g_out, g_format = "text";
  gen->add_option("--snps", g_snps, "number of SNPs (M)")->required();
  gen->add_option("--samples", g_samples, "number of samples (N)")->required();
  gen->add_option("--maf", g_maf, "minor allele frequency in (0, 0.5]");
  gen->add_option("--seed", g_seed, "RNG seed");
  gen->add_option("--plant", g_plant,
                  "planted interaction i0,i1,i2:gx,gy,gz:pmatch,pother");
  gen->add_option("--out", g_out, "output path")->required();
  gen->add_option("--format", g_format, "text or packed")
      ->check(CLI::IsMember({"text", "packed"}));

  // shared search flags
  const auto add_search_flags = [](CLI::App* cmd, std::string& variant,
                                   unsigned& threads, int& lanes,
                                   std::uint32_t& sched, std::uint32_t& tile) {
    cmd->add_option("--variant", variant, "v1|v2|v3|v4|tpc");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_option("--lanes", lanes, "wide-kernel lanes (1,2,4,8)");
    cmd->add_option("--b-sched", sched, "combination-grid edge for tpc");
    cmd->add_option("--tile-snps", tile, "tiled-layout block size for tpc");
  };

  // detect
  auto* det = app.add_subcommand("detect", "search a dataset for the best triple");
  std::string d_in, d_variant = "v4";
  unsigned d_threads = default_threads();
  std::uint32_t d_topk = 10, d_sched = 256, d_tile = 64;
  int d_lanes = 8;
  bool d_json = false;
  CacheFlags d_cache;
  det->add_option("--in", d_in, "input dataset (text or packed)")->required();
  add_search_flags(det, d_variant, d_threads, d_lanes, d_sched, d_tile);
  det->add_option("--top-k", d_topk, "hits to keep");
  det->add_flag("--json", d_json, "emit one JSON document");
  add_cache_flags(det, d_cache);

  // verify
  auto* ver = app.add_subcommand("verify", "check all kernels against the oracle");
  std::string v_in;
  std::size_t v_cap = 64;
  CacheFlags v_cache;
  ver->add_option("--in", v_in, "input dataset")->required();
  ver->add_option("--max-snps", v_cap, "oracle size cap");
  add_cache_flags(ver, v_cache);

  // bench
  auto* ben = app.add_subcommand("bench", "measure search throughput");
  std::string b_in, b_variant = "v4", b_format = "csv", b_out;
  unsigned b_threads = default_threads(), b_repeats = 3;
  std::uint32_t b_sched = 256, b_tile = 64;
  int b_lanes = 8;
  CacheFlags b_cache;
  ben->add_option("--in", b_in, "input dataset")->required();
  add_search_flags(ben, b_variant, b_threads, b_lanes, b_sched, b_tile);
  ben->add_option("--repeats", b_repeats, "timed repetitions");
  ben->add_option("--format", b_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  ben->add_option("--out", b_out, "write the report here instead of stdout");
  add_cache_flags(ben, b_cache);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_generate(g_out, g_snps, g_samples, g_maf, g_seed, g_plant,
                          g_format);
    if (det->parsed())
      return cmd_detect(d_in, epi3::variant_from_name(d_variant), d_cache,
                        d_threads, d_topk, d_lanes, d_sched, d_tile, d_json);
    if (ver->parsed()) return cmd_verify(v_in, v_cap, v_cache);
    if (ben->parsed())
      return cmd_bench(b_in, epi3::variant_from_name(b_variant), b_cache,
                       b_threads, b_repeats, b_lanes, b_sched, b_tile,
                       b_format, b_out);
  } catch (const epi3::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const epi3::DimensionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const epi3::InfeasibleCache& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
