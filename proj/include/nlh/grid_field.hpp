// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace nlh {

inline constexpr int kMaxDim = 4;

/// Thrown when two objects that must live on the same grid do not.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform periodic grid on the box [-L, L)^N with M points per axis.
/// Node i along an axis sits at x_i = -L + i h, h = 2 L / M; each node is the
/// center of one quadrature cell of volume h^N.
class Grid {
 public:
  /// Empty grid (no nodes); placeholder for default-constructed fields.
  Grid() = default;
  Grid(int dim, int points, double half_extent);

  int dim() const { return dim_; }
  int points() const { return points_; }
  double half_extent() const { return half_extent_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return cell_volume_; }
  std::size_t size() const { return size_; }

  double coordinate(int i) const { return -half_extent_ + i * spacing_; }
  std::array<int, kMaxDim> multi_index(std::size_t flat) const;
  std::size_t flat_index(const std::array<int, kMaxDim>& idx) const;
  std::array<double, kMaxDim> position(std::size_t flat) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_ = 0;
  int points_ = 0;
  double half_extent_ = 0.0;
  double spacing_ = 0.0;
  double cell_volume_ = 0.0;
  std::size_t size_ = 0;
};

/// Real-valued function sampled at the grid nodes, row-major (last axis
/// fastest).
class ScalarField {
 public:
  ScalarField() = default;  // no values, on the empty grid
  explicit ScalarField(const Grid& grid);  // zero field
  ScalarField(const Grid& grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double a);
  /// this += a * other
  ScalarField& axpy(double a, const ScalarField& other);

  bool all_finite() const;
  bool operator==(const ScalarField& other) const = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double a, ScalarField f);
/// Pointwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);

/// Indicator of a union of grid cells.
class SupportMask {
 public:
  explicit SupportMask(const Grid& grid);  // empty mask
  SupportMask(const Grid& grid, std::vector<std::uint8_t> flags);

  const Grid& grid() const { return grid_; }
  bool contains(std::size_t i) const { return flags_[i] != 0; }
  void set(std::size_t i, bool v) { flags_[i] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  /// Flat indices of the cells in the mask, ascending.
  std::vector<std::size_t> indices() const;
  bool disjoint_from(const SupportMask& other) const;

 private:
  Grid grid_;
  std::vector<std::uint8_t> flags_;
};

/// f restricted to the mask (zero elsewhere).
ScalarField restrict_to(const ScalarField& f, const SupportMask& mask);

/// (h^N sum |f_i|^q)^{1/q}, q > 1.
double lp_norm(const ScalarField& f, double q);
/// h^N sum f_i g_i.
double inner(const ScalarField& f, const ScalarField& g);
/// Pointwise |g|^{q-2} g with 0 -> 0.
ScalarField dual_map(const ScalarField& g, double q);
/// f scaled to unit L^q norm; the zero field is returned unchanged.
ScalarField normalize(const ScalarField& f, double q);
/// Hoelder conjugate q / (q - 1).
double conjugate_exponent(double q);

/// Second-order central-difference Laplacian with periodic wraparound.
/// Values within one node of the box boundary see the wraparound; restrict
/// consumers to an interior window.
ScalarField discrete_laplacian(const ScalarField& f);

/// Mask of the nodes whose coordinates all lie in [-fraction L, fraction L).
SupportMask interior_window(const Grid& grid, double fraction);

struct SignMasks {
  SupportMask aplus;   // {Q > 0}
  SupportMask aminus;  // {Q < 0}
};
SignMasks mask_from_weight(const ScalarField& q);

/// NLHF binary field format: "NLHF", u32 version = 1, u32 N, N x u32 points
/// per axis, N x f64 half-extent per axis, then M^N f64 values row-major.
/// Everything little-endian.
void write_nlhf(const ScalarField& f, const std::filesystem::path& path);
ScalarField read_nlhf(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_nlhf(const ScalarField& f);
ScalarField decode_nlhf(std::span<const std::uint8_t> bytes);

}  // namespace nlh
