#include "ssvd/decomposition_io.hpp"

#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "json.hpp"
#include "ssvd/errors.hpp"

namespace ssvd {
namespace {

constexpr char kMagic[4] = {'S', 'D', 'E', 'C'};
constexpr std::uint8_t kVersion = 1;

struct DecompFail {
  [[noreturn]] void operator()(const std::string& what, std::uint64_t offset) const {
    throw FormatError("decomposition file: " + what, offset);
  }
};

const char* sampling_name(Sampling s) { return s == Sampling::per_chunk ? "per_chunk" : "per_column"; }

}  // namespace

void write_decomposition(const Decomposition& d, const std::filesystem::path& path) {
  SSVD_REQUIRE(d.U.cols() == d.S.size(), "write_decomposition: U and S sizes disagree");
  detail::ByteWriter w;
  for (char c : kMagic) w.put<std::uint8_t>(static_cast<std::uint8_t>(c));
  w.put<std::uint8_t>(kVersion);
  w.put<std::uint64_t>(d.U.rows());
  w.put<std::uint64_t>(d.S.size());
  w.put_array(std::span<const double>(d.S.values()));
  w.put_array(d.U.data());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Decomposition read_decomposition(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::ByteReader r(std::span<const std::uint8_t>(bytes), DecompFail{});
  auto magic = r.get_bytes(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic, [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); }))
    DecompFail{}("bad magic", 0);
  if (r.get<std::uint8_t>("version") != kVersion) DecompFail{}("unsupported version", 4);
  const auto m = r.get<std::uint64_t>("rows");
  const auto k = r.get<std::uint64_t>("rank");
  std::vector<double> s;
  r.get_array<double>(s, k, "singular values");
  if (m != 0 && k > r.remaining() / 8 / m) DecompFail{}("U exceeds file size", r.offset());
  std::vector<double> u;
  r.get_array<double>(u, m * k, "U");
  if (r.remaining() != 0) DecompFail{}("trailing bytes", r.offset());
  Decomposition d;
  try {
    d.S = Spectrum(std::move(s));
  } catch (const ContractError& e) {
    DecompFail{}(std::string("invalid spectrum: ") + e.what(), 21);
  }
  d.U = DenseMatrix(static_cast<std::size_t>(m), static_cast<std::size_t>(k));
  std::copy(u.begin(), u.end(), d.U.data().begin());
  d.config.k = static_cast<std::size_t>(k);
  return d;
}

std::string metadata_json(const Decomposition& d) {
  nlohmann::ordered_json j;
  j["algorithm"] = d.algorithm;
  j["config"] = {{"k", d.config.k},
                 {"oversample", d.config.l},
                 {"power_iters", d.config.q},
                 {"chunk_size", d.config.chunk_size ? nlohmann::ordered_json(*d.config.chunk_size) : nullptr},
                 {"seed", d.config.seed},
                 {"reorthonormalize", d.config.reorthonormalize},
                 {"sampling", sampling_name(d.config.sampling)}};
  j["rows"] = d.U.rows();
  j["rank"] = d.S.size();
  j["rank_deficient"] = d.rank_deficient;
  j["passes"] = d.passes;
  j["observations"] = d.observations;
  j["wall_ms"] = d.wall_ms;
  j["peak_dense_values"] = d.peak_dense_values;
  j["peak_dense_bytes"] = d.peak_dense_values * sizeof(double);
  j["singular_values"] = d.S.values();
  return j.dump(2) + "\n";
}

void write_metadata(const Decomposition& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << metadata_json(d);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ssvd
