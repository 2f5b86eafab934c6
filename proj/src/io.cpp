#include "epi3/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace epi3 {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'P', 'I', '3'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8 + 8;

void store_le32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = (v >> (8 * i)) & 0xff;
}
void store_le64(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = (v >> (8 * i)) & 0xff;
}
std::uint32_t load_le32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
  return v;
}
std::uint64_t load_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return v;
}

std::ifstream open_input(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

GenotypeMatrix read_text(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("missing header line", lineno);

  GenotypeMatrix m;
  {
    std::size_t snps = 0, samples = 0;
    int consumed = -1;
    if (std::sscanf(line.c_str(), "#SNPS=%zu SAMPLES=%zu%n", &snps, &samples,
                    &consumed) != 2 ||
        consumed < 0 || line.c_str()[consumed] != '\0')
      throw ParseError("malformed header, expected '#SNPS=<M> SAMPLES=<N>'",
                       lineno);
    m.num_snps = snps;
    m.num_samples = samples;
  }
  m.genotypes.resize(m.num_snps * m.num_samples);
  m.phenotype.resize(m.num_samples);

  auto parse_row = [&](std::uint8_t* dst, std::uint8_t max_value) {
    ++lineno;
    if (!std::getline(in, line)) throw ParseError("unexpected end of file", lineno);
    std::istringstream row(line);
    std::string tok;
    for (std::size_t j = 0; j < m.num_samples; ++j) {
      if (!(row >> tok)) throw ParseError("too few values on line", lineno);
      if (tok.size() != 1 || tok[0] < '0' || tok[0] > char('0' + max_value))
        throw ParseError("invalid token '" + tok + "'", lineno);
      dst[j] = std::uint8_t(tok[0] - '0');
    }
    if (row >> tok) throw ParseError("trailing values on line", lineno);
  };

  for (std::size_t i = 0; i < m.num_snps; ++i)
    parse_row(m.genotypes.data() + i * m.num_samples, 2);
  parse_row(m.phenotype.data(), 1);
  return validate(m);
}

GenotypeMatrix read_text(const std::filesystem::path& path) {
  auto in = open_input(path, false);
  return read_text(in);
}

void write_text(std::ostream& out, const GenotypeMatrix& m) {
  validate(m);
  out << "#SNPS=" << m.num_snps << " SAMPLES=" << m.num_samples << '\n';
  auto write_row = [&](const std::uint8_t* row) {
    for (std::size_t j = 0; j < m.num_samples; ++j) {
      if (j) out << ' ';
      out << int(row[j]);
    }
    out << '\n';
  };
  for (std::size_t i = 0; i < m.num_snps; ++i)
    write_row(m.genotypes.data() + i * m.num_samples);
  write_row(m.phenotype.data());
  if (!out) throw Error("write failed");
}

void write_text(const std::filesystem::path& path, const GenotypeMatrix& m) {
  auto out = open_output(path, false);
  write_text(out, m);
}

BitPlaneDataset read_packed(std::istream& in) {
  unsigned char header[kHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kHeaderBytes);
  if (std::size_t(in.gcount()) != kHeaderBytes)
    throw TruncatedFile("file shorter than the packed header");
  if (std::memcmp(header, kMagic.data(), 4) != 0)
    throw MagicMismatch("not a packed genotype file (bad magic)");
  const std::uint32_t version = load_le32(header + 4);
  if (version != kVersion)
    throw ParseError("unsupported packed version " + std::to_string(version), 4);

  const std::uint64_t num_snps = load_le64(header + 8);
  const std::uint64_t n0 = load_le64(header + 16);
  const std::uint64_t n1 = load_le64(header + 24);
  if (n0 > 0xffffffffull || n1 > 0xffffffffull)
    throw ParseError("class sample count exceeds the 32-bit cell cap", 16);

  // Size arithmetic is verified against the stream before any allocation.
  const std::uint64_t w0 = (n0 + kWordBits - 1) / kWordBits;
  const std::uint64_t w1 = (n1 + kWordBits - 1) / kWordBits;
  const unsigned __int128 payload_words =
      (unsigned __int128)(num_snps) * 2 * (w0 + w1);
  const unsigned __int128 expected = kHeaderBytes + payload_words * sizeof(word);

  const auto data_start = in.tellg();
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = std::uint64_t(in.tellg());
  in.seekg(data_start);
  if (expected > file_size)
    throw TruncatedFile("packed file shorter than its header promises");
  if (expected < file_size)
    throw ParseError("trailing bytes after packed payload",
                     std::size_t(expected));

  BitPlaneDataset ds{std::size_t(num_snps), std::size_t(n0), std::size_t(n1)};
  std::vector<unsigned char> buf;
  for (std::uint64_t i = 0; i < num_snps; ++i)
    for (int cls = 0; cls < 2; ++cls) {
      const std::size_t nw = ds.words(cls);
      if (nw == 0) continue;
      buf.resize(2 * nw * sizeof(word));
      in.read(reinterpret_cast<char*>(buf.data()),
              std::streamsize(buf.size()));
      if (std::size_t(in.gcount()) != buf.size())
        throw TruncatedFile("packed payload ended early");
      for (int g = 0; g < 2; ++g) {
        word* dst = ds.plane(cls, snp_index(i), g);
        for (std::size_t w = 0; w < nw; ++w)
          dst[w] = load_le64(buf.data() + (std::size_t(g) * nw + w) * 8);
      }
    }
  return ds;
}

BitPlaneDataset read_packed(const std::filesystem::path& path) {
  auto in = open_input(path, true);
  return read_packed(in);
}

void write_packed(std::ostream& out, const BitPlaneDataset& ds) {
  unsigned char header[kHeaderBytes];
  std::memcpy(header, kMagic.data(), 4);
  store_le32(header + 4, kVersion);
  store_le64(header + 8, ds.num_snps());
  store_le64(header + 16, ds.num_controls());
  store_le64(header + 24, ds.num_cases());
  out.write(reinterpret_cast<const char*>(header), kHeaderBytes);

  std::vector<unsigned char> buf;
  for (std::size_t i = 0; i < ds.num_snps(); ++i)
    for (int cls = 0; cls < 2; ++cls) {
      const std::size_t nw = ds.words(cls);
      if (nw == 0) continue;
      buf.resize(2 * nw * sizeof(word));
      for (int g = 0; g < 2; ++g) {
        const word* src = ds.plane(cls, snp_index(i), g);
        for (std::size_t w = 0; w < nw; ++w)
          store_le64(buf.data() + (std::size_t(g) * nw + w) * 8, src[w]);
      }
      out.write(reinterpret_cast<const char*>(buf.data()),
                std::streamsize(buf.size()));
    }
  if (!out) throw Error("write failed");
}

void write_packed(const std::filesystem::path& path, const BitPlaneDataset& ds) {
  auto out = open_output(path, true);
  write_packed(out, ds);
}

bool is_packed_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::array<char, 4> head{};
  in.read(head.data(), 4);
  return in.gcount() == 4 && std::memcmp(head.data(), kMagic.data(), 4) == 0;
}

}  // namespace epi3
