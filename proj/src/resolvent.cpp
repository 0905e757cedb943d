// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#include "nlh/resolvent.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "nlh/special_functions.hpp"

namespace nlh {
namespace {

// FFTW planning is not thread-safe; execution with new-array functions is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

double unit_ball_volume(int dim) { return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0); }

double sphere_area(int dim) { return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim); }

}  // namespace

double psi_cell_mean(double spacing, int dim) {
  const double rho = spacing * std::pow(1.0 / unit_ball_volume(dim), 1.0 / dim);
  const double c = psi_singular_coefficient(dim);
  // Radial integral of r^{N-1} times the singular part.
  double singular;
  std::function<double(double)> remainder;
  if (dim == 2) {
    // -c log r * r  ->  -c (rho^2/2 log rho - rho^2/4)
    singular = -c * (0.5 * rho * rho * std::log(rho) - 0.25 * rho * rho);
    remainder = [c](double r) { return r > 0.0 ? (psi_kernel(r, 2) + c * std::log(r)) * r : 0.0; };
  } else {
    singular = 0.5 * c * rho * rho;
    remainder = [c, dim](double r) {
      return r > 0.0 ? (psi_kernel(r, dim) - c * std::pow(r, 2 - dim)) * std::pow(r, dim - 1) : 0.0;
    };
  }
  double error = 0.0;
  const double smooth =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(remainder, 0.0, rho, 15, 1e-14, &error);
  return sphere_area(dim) * (singular + smooth) / std::pow(spacing, dim);
}

struct ResolventOperator::Impl {
  Grid grid;
  int padded = 0;                 // 2M
  std::size_t real_size = 0;      // (2M)^N
  std::size_t complex_size = 0;   // (2M)^{N-1} (M+1)
  std::vector<double> kernel;     // sampled kernel on the padded periodic lattice
  std::vector<double> spectrum;   // real part of its DFT, scaled by h^N / (2M)^N
  double origin_value = 0.0;
  double imaginary_residue = 0.0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Impl(const Grid& g) : grid(g) {}
  Impl(const Impl&) = delete;
  Impl& operator=(const Impl&) = delete;
  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  std::size_t padded_index(const std::array<int, kMaxDim>& offset) const {
    std::size_t flat = 0;
    for (int d = 0; d < grid.dim(); ++d) {
      const int j = offset[d] >= 0 ? offset[d] : offset[d] + padded;
      flat = flat * padded + static_cast<std::size_t>(j);
    }
    return flat;
  }
};

ResolventOperator::ResolventOperator(const Grid& grid) {
  auto impl = std::make_shared<Impl>(grid);
  const int dim = grid.dim();
  const int m = grid.points();
  const double h = grid.spacing();
  impl->padded = 2 * m;
  impl->real_size = 1;
  for (int d = 0; d < dim; ++d) impl->real_size *= static_cast<std::size_t>(impl->padded);
  impl->complex_size = impl->real_size / impl->padded * (m + 1);
  impl->origin_value = psi_cell_mean(h, dim);

  // Radial symmetry: the kernel only depends on the integer |offset|^2.
  impl->kernel.assign(impl->real_size, 0.0);
  std::unordered_map<long, double> by_norm2;
  for (std::size_t flat = 0; flat < impl->real_size; ++flat) {
    std::size_t rest = flat;
    long norm2 = 0;
    for (int d = dim - 1; d >= 0; --d) {
      const int j = static_cast<int>(rest % impl->padded);
      rest /= impl->padded;
      const long off = j < m ? j : j - impl->padded;
      norm2 += off * off;
    }
    if (norm2 == 0) {
      impl->kernel[flat] = impl->origin_value;
      continue;
    }
    auto it = by_norm2.find(norm2);
    if (it == by_norm2.end()) {
      it = by_norm2.emplace(norm2, psi_kernel(h * std::sqrt(static_cast<double>(norm2)), dim)).first;
    }
    impl->kernel[flat] = it->second;
  }

  std::array<int, kMaxDim> shape{};
  for (int d = 0; d < dim; ++d) shape[d] = impl->padded;
  auto real_buf = alloc_real(impl->real_size);
  auto complex_buf = alloc_complex(impl->complex_size);
  {
    std::lock_guard lock(fftw_planner_mutex());
    impl->forward = fftw_plan_dft_r2c(dim, shape.data(), real_buf.get(), complex_buf.get(), FFTW_ESTIMATE);
    impl->backward = fftw_plan_dft_c2r(dim, shape.data(), complex_buf.get(), real_buf.get(), FFTW_ESTIMATE);
  }
  if (!impl->forward || !impl->backward) throw std::runtime_error("ResolventOperator: FFT planning failed");

  std::copy(impl->kernel.begin(), impl->kernel.end(), real_buf.get());
  fftw_execute_dft_r2c(impl->forward, real_buf.get(), complex_buf.get());
  const double scale = grid.cell_volume() / static_cast<double>(impl->real_size);
  impl->spectrum.resize(impl->complex_size);
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t k = 0; k < impl->complex_size; ++k) {
    max_re = std::max(max_re, std::fabs(complex_buf.get()[k][0]));
    max_im = std::max(max_im, std::fabs(complex_buf.get()[k][1]));
    impl->spectrum[k] = complex_buf.get()[k][0] * scale;
  }
  impl->imaginary_residue = max_re > 0.0 ? max_im / max_re : 0.0;
  impl_ = std::move(impl);
}

const Grid& ResolventOperator::grid() const { return impl_->grid; }

double ResolventOperator::origin_cell_value() const { return impl_->origin_value; }

double ResolventOperator::spectrum_imaginary_residue() const { return impl_->imaginary_residue; }

double ResolventOperator::kernel_at_offset(const std::array<int, kMaxDim>& offset) const {
  const int m = impl_->grid.points();
  for (int d = 0; d < impl_->grid.dim(); ++d) {
    if (offset[d] < -m || offset[d] > m) throw std::out_of_range("kernel_at_offset: offset outside padded box");
  }
  std::array<int, kMaxDim> wrapped = offset;
  for (int d = 0; d < impl_->grid.dim(); ++d) {
    if (wrapped[d] == m) wrapped[d] = -m;
  }
  return impl_->kernel[impl_->padded_index(wrapped)];
}

ScalarField ResolventOperator::apply(const ScalarField& f) const {
  const Impl& im = *impl_;
  if (!(f.grid() == im.grid)) throw GridMismatch("apply_R: field grid differs from operator grid");
  const Grid& g = im.grid;
  const int dim = g.dim();
  const int m = g.points();

  auto real_buf = alloc_real(im.real_size);
  auto complex_buf = alloc_complex(im.complex_size);
  double* x = real_buf.get();
  std::fill(x, x + im.real_size, 0.0);

  // Copy rows of length M (last axis) into the padded array.
  const std::size_t rows = g.size() / m;
  auto padded_row_start = [&](std::size_t row) {
    // row enumerates the first N-1 axes in row-major order.
    std::size_t rest = row, flat = 0;
    std::array<int, kMaxDim> idx{};
    for (int d = dim - 2; d >= 0; --d) {
      idx[d] = static_cast<int>(rest % m);
      rest /= m;
    }
    for (int d = 0; d < dim - 1; ++d) flat = flat * im.padded + idx[d];
    return flat * im.padded;
  };
  for (std::size_t row = 0; row < rows; ++row) {
    std::copy_n(f.values().begin() + row * m, m, x + padded_row_start(row));
  }

  fftw_execute_dft_r2c(im.forward, x, complex_buf.get());
  fftw_complex* c = complex_buf.get();
  for (std::size_t k = 0; k < im.complex_size; ++k) {
    c[k][0] *= im.spectrum[k];
    c[k][1] *= im.spectrum[k];
  }
  fftw_execute_dft_c2r(im.backward, c, x);

  ScalarField out(g);
  for (std::size_t row = 0; row < rows; ++row) {
    std::copy_n(x + padded_row_start(row), m, out.values().begin() + row * m);
  }
  return out;
}

}  // namespace nlh
