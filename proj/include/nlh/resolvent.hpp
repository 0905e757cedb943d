// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <memory>

#include "nlh/grid_field.hpp"

namespace nlh {

/// Mean of Psi over the ball centered at 0 with volume h^N. The leading
/// singular term is integrated in closed form, the smooth remainder by
/// adaptive Gauss-Kronrod quadrature in the radial variable.
double psi_cell_mean(double spacing, int dim);

/// Discrete real Helmholtz resolvent f -> h^N sum_j Psi(x_i - x_j) f_j.
///
/// The kernel is sampled at every lattice offset of the 2M-per-axis padded
/// grid, with the offset-zero sample replaced by psi_cell_mean. Convolution is
/// linear (zero padded), so for fields on the M^N grid no wraparound enters.
/// Instances are immutable after construction and cheap to copy; apply()
/// allocates its own transform buffers and may be called concurrently.
class ResolventOperator {
 public:
  explicit ResolventOperator(const Grid& grid);

  const Grid& grid() const;
  double origin_cell_value() const;
  /// Sampled kernel at an integer lattice offset, |offset_d| <= M.
  double kernel_at_offset(const std::array<int, kMaxDim>& offset) const;
  /// Largest |Im| of the kernel spectrum relative to the largest |Re|.
  double spectrum_imaginary_residue() const;

  ScalarField apply(const ScalarField& f) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

inline ScalarField apply_R(const ResolventOperator& op, const ScalarField& f) { return op.apply(f); }

}  // namespace nlh
