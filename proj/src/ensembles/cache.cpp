#include "covsv/ensembles/cache.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "covsv/core/error.hpp"

namespace covsv::ensembles {
namespace {

constexpr std::array<char, 8> kMagic{'C', 'O', 'V', 'S', 'V', 'D', 'C', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>)
    bits = std::bit_cast<std::uint64_t>(value);
  else
    bits = static_cast<std::uint64_t>(value);
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is, const std::filesystem::path& path) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw DataError("truncated cache file " + path.string());
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  if constexpr (std::is_floating_point_v<T>)
    return std::bit_cast<T>(bits);
  else
    return static_cast<T>(bits);
}

void put_block(std::ostream& os, const double* data, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) put<double>(os, data[i]);
}

void get_block(std::istream& is, double* data, Eigen::Index n, const std::filesystem::path& path) {
  for (Eigen::Index i = 0; i < n; ++i) data[i] = get<double>(is, path);
}

}  // namespace

void write_cache(const std::filesystem::path& path, const std::vector<SampleDecomposition>& records) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& d : records) {
    os.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(d.M));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(d.N));
    put<std::uint64_t>(os, d.seed);
    put<std::uint64_t>(os, d.replicate);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(d.law.size()));
    os.write(d.law.data(), static_cast<std::streamsize>(d.law.size()));
    const Eigen::Index count = d.lambdas.size();
    put<std::uint32_t>(os, static_cast<std::uint32_t>(count));
    put<std::uint8_t>(os, d.has_vectors() ? 1 : 0);
    put_block(os, d.lambdas.data(), count);
    if (d.has_vectors()) {
      put_block(os, d.xi.data(), d.xi.size());
      put_block(os, d.zeta.data(), d.zeta.size());
    }
  }
  if (!os) throw DataError("write to " + path.string() + " failed");
}

std::vector<SampleDecomposition> read_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open cache file " + path.string());
  std::vector<SampleDecomposition> out;
  while (is.peek() != std::char_traits<char>::eof()) {
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic)
      throw DataError(path.string() + " is not a decomposition cache (bad magic in record " +
                      std::to_string(out.size()) + ")");
    const auto version = get<std::uint32_t>(is, path);
    if (version != kVersion) throw DataError("unsupported cache version " + std::to_string(version));
    SampleDecomposition d;
    d.M = static_cast<int>(get<std::uint32_t>(is, path));
    d.N = static_cast<int>(get<std::uint32_t>(is, path));
    d.seed = get<std::uint64_t>(is, path);
    d.replicate = get<std::uint64_t>(is, path);
    const auto name_len = get<std::uint32_t>(is, path);
    if (name_len > 256) throw DataError("corrupt law name length in " + path.string());
    d.law.resize(name_len);
    if (!is.read(d.law.data(), name_len)) throw DataError("truncated cache file " + path.string());
    const auto count = static_cast<Eigen::Index>(get<std::uint32_t>(is, path));
    if (count != std::min(d.M, d.N)) throw DataError("record count does not equal min(M, N) in " + path.string());
    const bool vectors = get<std::uint8_t>(is, path) != 0;
    d.lambdas.resize(count);
    get_block(is, d.lambdas.data(), count, path);
    if (vectors) {
      d.xi.resize(d.M, count);
      d.zeta.resize(d.N, count);
      get_block(is, d.xi.data(), d.xi.size(), path);
      get_block(is, d.zeta.data(), d.zeta.size(), path);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace covsv::ensembles
