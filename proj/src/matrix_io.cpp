#include "bbp/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "bbp/error.hpp"

namespace bbp {

namespace {

constexpr std::array<char, 8> kMagic{'B', 'B', 'P', 'M', 'A', 'T', '0', '1'};
constexpr std::uint32_t kFloat64 = 1;

template <class T>
T byteswap(T v) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

template <class T>
void put(std::ostream& out, T v) {
  if constexpr (std::endian::native == std::endian::big) v = byteswap(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ConfigError("truncated matrix dump");
  if constexpr (std::endian::native == std::endian::big) v = byteswap(v);
  return v;
}

}  // namespace

void write_packed(const std::filesystem::path& path, const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols()) throw ConfigError("matrix dump needs a square matrix");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(S.rows()));
  put<std::uint32_t>(out, kFloat64);
  put<std::uint32_t>(out, 0);
  for (Eigen::Index i = 0; i < S.rows(); ++i)
    for (Eigen::Index j = i; j < S.cols(); ++j) put(out, std::bit_cast<std::uint64_t>(S(i, j)));
  if (!out) throw ConfigError("write failed: " + path.string());
}

Eigen::MatrixXd read_packed(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError("not a matrix dump: " + path.string());
  const auto n = get<std::uint64_t>(in);
  if (get<std::uint32_t>(in) != kFloat64) throw ConfigError("unsupported dtype in " + path.string());
  get<std::uint32_t>(in);
  if (n > (1u << 20)) throw ConfigError("implausible dimension in " + path.string());
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd S(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = i; j < N; ++j) S(i, j) = S(j, i) = std::bit_cast<double>(get<std::uint64_t>(in));
  return S;
}

}  // namespace bbp
