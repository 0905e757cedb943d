// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/grid_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace nlh {

Grid::Grid(int dim, int points, double half_extent)
    : dim_(dim), points_(points), half_extent_(half_extent) {
  if (dim < 2 || dim > kMaxDim) throw std::invalid_argument("Grid: dimension must be in [2, 4]");
  if (points < 8 || !std::has_single_bit(static_cast<unsigned>(points))) {
    throw std::invalid_argument("Grid: points per axis must be a power of two >= 8");
  }
  if (!(half_extent > 0.0) || !std::isfinite(half_extent)) {
    throw std::invalid_argument("Grid: half extent must be positive");
  }
  spacing_ = 2.0 * half_extent / points;
  cell_volume_ = std::pow(spacing_, dim);
  size_ = 1;
  for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(points);
}

std::array<int, kMaxDim> Grid::multi_index(std::size_t flat) const {
  std::array<int, kMaxDim> idx{};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

std::size_t Grid::flat_index(const std::array<int, kMaxDim>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim_; ++d) flat = flat * points_ + static_cast<std::size_t>(idx[d]);
  return flat;
}

std::array<double, kMaxDim> Grid::position(std::size_t flat) const {
  const auto idx = multi_index(flat);
  std::array<double, kMaxDim> x{};
  for (int d = 0; d < dim_; ++d) x[d] = coordinate(idx[d]);
  return x;
}

ScalarField::ScalarField(const Grid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("ScalarField: value count does not match grid");
  }
}

namespace {
void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": fields live on different grids");
}
}  // namespace

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

ScalarField& ScalarField::axpy(double a, const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * other.values_[i];
  return *this;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double a, ScalarField f) { return f *= a; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "hadamard");
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

SupportMask::SupportMask(const Grid& grid) : grid_(grid), flags_(grid.size(), 0) {}

SupportMask::SupportMask(const Grid& grid, std::vector<std::uint8_t> flags)
    : grid_(grid), flags_(std::move(flags)) {
  if (flags_.size() != grid_.size()) throw std::invalid_argument("SupportMask: flag count does not match grid");
}

std::size_t SupportMask::count() const {
  return static_cast<std::size_t>(std::count_if(flags_.begin(), flags_.end(), [](auto v) { return v != 0; }));
}

std::vector<std::size_t> SupportMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i]) out.push_back(i);
  }
  return out;
}

bool SupportMask::disjoint_from(const SupportMask& other) const {
  require_same_grid(grid_, other.grid_, "disjoint_from");
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i] && other.flags_[i]) return false;
  }
  return true;
}

ScalarField restrict_to(const ScalarField& f, const SupportMask& mask) {
  require_same_grid(f.grid(), mask.grid(), "restrict_to");
  ScalarField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask.contains(i)) out[i] = f[i];
  }
  return out;
}

double lp_norm(const ScalarField& f, double q) {
  if (!(q > 1.0)) throw std::domain_error("lp_norm: exponent must exceed 1");
  long double acc = 0.0L;
  if (q == 2.0) {
    for (double v : f.values()) acc += static_cast<long double>(v) * v;
  } else {
    for (double v : f.values()) {
      if (v != 0.0) acc += std::pow(static_cast<long double>(std::fabs(v)), static_cast<long double>(q));
    }
  }
  return std::pow(static_cast<double>(acc) * f.grid().cell_volume(), 1.0 / q);
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) acc += static_cast<long double>(f[i]) * g[i];
  return static_cast<double>(acc) * f.grid().cell_volume();
}

ScalarField dual_map(const ScalarField& g, double q) {
  if (!(q > 1.0)) throw std::domain_error("dual_map: exponent must exceed 1");
  ScalarField out(g.grid());
  if (q == 2.0) {
    std::copy(g.values().begin(), g.values().end(), out.values().begin());
    return out;
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = g[i];
    if (v != 0.0) out[i] = std::copysign(std::pow(std::fabs(v), q - 1.0), v);
  }
  return out;
}

ScalarField normalize(const ScalarField& f, double q) {
  const double n = lp_norm(f, q);
  if (n == 0.0) return f;
  return (1.0 / n) * f;
}

double conjugate_exponent(double q) {
  if (!(q > 1.0)) throw std::domain_error("conjugate_exponent: exponent must exceed 1");
  return q / (q - 1.0);
}

ScalarField discrete_laplacian(const ScalarField& f) {
  const Grid& g = f.grid();
  const int m = g.points();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  ScalarField out(g);
  std::array<std::size_t, kMaxDim> stride{};
  std::size_t s = 1;
  for (int d = g.dim() - 1; d >= 0; --d) {
    stride[d] = s;
    s *= static_cast<std::size_t>(m);
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto idx = g.multi_index(i);
    double acc = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      const std::size_t base = i - static_cast<std::size_t>(idx[d]) * stride[d];
      const std::size_t up = base + static_cast<std::size_t>((idx[d] + 1) % m) * stride[d];
      const std::size_t down = base + static_cast<std::size_t>((idx[d] + m - 1) % m) * stride[d];
      acc += f[up] - 2.0 * f[i] + f[down];
    }
    out[i] = acc * inv_h2;
  }
  return out;
}

SupportMask interior_window(const Grid& grid, double fraction) {
  SupportMask mask(grid);
  const double bound = fraction * grid.half_extent();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.position(i);
    bool inside = true;
    for (int d = 0; d < grid.dim() && inside; ++d) inside = (x[d] >= -bound && x[d] < bound);
    mask.set(i, inside);
  }
  return mask;
}

SignMasks mask_from_weight(const ScalarField& q) {
  SignMasks masks{SupportMask(q.grid()), SupportMask(q.grid())};
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) masks.aplus.set(i, true);
    if (q[i] < 0.0) masks.aminus.set(i, true);
  }
  return masks;
}

namespace {

constexpr std::uint32_t kNlhfVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("NLHF: truncated data");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_nlhf(const ScalarField& f) {
  const Grid& g = f.grid();
  std::vector<std::uint8_t> out = {'N', 'L', 'H', 'F'};
  out.reserve(16 + 12 * g.dim() + 8 * f.size());
  put_u32(out, kNlhfVersion);
  put_u32(out, static_cast<std::uint32_t>(g.dim()));
  for (int d = 0; d < g.dim(); ++d) put_u32(out, static_cast<std::uint32_t>(g.points()));
  for (int d = 0; d < g.dim(); ++d) put_f64(out, g.half_extent());
  for (double v : f.values()) put_f64(out, v);
  return out;
}

ScalarField decode_nlhf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "NLHF", 4) != 0) {
    throw std::runtime_error("NLHF: bad magic");
  }
  ByteReader in(bytes.subspan(4));
  const std::uint32_t version = in.u32();
  if (version != kNlhfVersion) throw std::runtime_error("NLHF: unsupported version " + std::to_string(version));
  const std::uint32_t dim = in.u32();
  if (dim < 2 || dim > kMaxDim) throw std::runtime_error("NLHF: unsupported dimension " + std::to_string(dim));
  std::vector<std::uint32_t> points(dim);
  for (auto& m : points) m = in.u32();
  std::vector<double> extents(dim);
  for (auto& l : extents) l = in.f64();
  for (std::uint32_t d = 1; d < dim; ++d) {
    if (points[d] != points[0] || extents[d] != extents[0]) {
      throw std::runtime_error("NLHF: only cubic grids are supported");
    }
  }
  const Grid grid(static_cast<int>(dim), static_cast<int>(points[0]), extents[0]);
  if (in.remaining() != 8 * grid.size()) throw std::runtime_error("NLHF: payload size does not match header");
  std::vector<double> values(grid.size());
  for (auto& v : values) v = in.f64();
  ScalarField f(grid, std::move(values));
  if (!f.all_finite()) throw std::runtime_error("NLHF: non-finite values");
  return f;
}

void write_nlhf(const ScalarField& f, const std::filesystem::path& path) {
  const auto bytes = encode_nlhf(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("NLHF: cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("NLHF: write failed for " + path.string());
}

ScalarField read_nlhf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("NLHF: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_nlhf(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " (" + path.string() + ")");
  }
}

}  // namespace nlh
