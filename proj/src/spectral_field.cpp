#include "mslab/spectral_field.hpp"

#include <cmath>
#include <stdexcept>

#include "mslab/errors.hpp"
#include "mslab/fft.hpp"

namespace mslab {

SpectralField::SpectralField(GridPtr grid) : grid_(std::move(grid)) {
  values_.assign(grid_->size(), 0.0);
  coeffs_.assign(grid_->size(), {0.0, 0.0});
  values_ok_ = coeffs_ok_ = true;
}

SpectralField SpectralField::from_values(GridPtr grid, std::vector<double> v) {
  if (v.size() != grid->size())
    throw config_error("field: value buffer size does not match grid");
  SpectralField f(std::move(grid));
  f.values_ = std::move(v);
  f.values_ok_ = true;
  f.coeffs_ok_ = false;
  return f;
}

SpectralField SpectralField::from_coeffs(GridPtr grid, std::vector<std::complex<double>> c) {
  if (c.size() != grid->size())
    throw config_error("field: coefficient buffer size does not match grid");
  SpectralField f(std::move(grid));
  f.coeffs_ = std::move(c);
  f.coeffs_ok_ = true;
  f.values_ok_ = false;
  return f;
}

void SpectralField::sync_coeffs() const {
  const std::size_t sz = grid_->size();
  std::vector<std::complex<double>> in(sz);
  for (std::size_t i = 0; i < sz; ++i) in[i] = {values_[i], 0.0};
  coeffs_.resize(sz);
  fft::forward(*grid_, in.data(), coeffs_.data());
  coeffs_ok_ = true;
}

void SpectralField::sync_values() const {
  const std::size_t sz = grid_->size();
  std::vector<std::complex<double>> out(sz);
  fft::inverse(*grid_, coeffs_.data(), out.data());
  values_.resize(sz);
  double max_im = 0.0, max_amp = 0.0;
  for (std::size_t i = 0; i < sz; ++i) {
    values_[i] = out[i].real();
    max_im = std::max(max_im, std::fabs(out[i].imag()));
    max_amp = std::max(max_amp, std::fabs(out[i].real()));
  }
  imag_residue_ = (max_amp > 0.0) ? max_im / max_amp : max_im;
  values_ok_ = true;
}

std::span<const double> SpectralField::values() const {
  if (!values_ok_) sync_values();
  return values_;
}

std::span<const std::complex<double>> SpectralField::coeffs() const {
  if (!coeffs_ok_) sync_coeffs();
  return coeffs_;
}

std::vector<double>& SpectralField::mutable_values() {
  if (!values_ok_) sync_values();
  coeffs_ok_ = false;
  return values_;
}

std::vector<std::complex<double>>& SpectralField::mutable_coeffs() {
  if (!coeffs_ok_) sync_coeffs();
  values_ok_ = false;
  return coeffs_;
}

double SpectralField::conjugate_defect() const {
  const auto c = coeffs();
  const int n = grid_->n;
  double worst = 0.0;
  auto mirror1 = [n](int j) { return j == 0 ? 0 : n - j; };
  if (grid_->dim == 1) {
    for (int j = 0; j < n; ++j)
      worst = std::max(worst,
                       std::abs(c[std::size_t(j)] - std::conj(c[std::size_t(mirror1(j))])));
  } else {
    for (int jx = 0; jx < n; ++jx)
      for (int jy = 0; jy < n; ++jy) {
        const std::size_t i = std::size_t(jx) * n + jy;
        const std::size_t im = std::size_t(mirror1(jx)) * n + mirror1(jy);
        worst = std::max(worst, std::abs(c[i] - std::conj(c[im])));
      }
  }
  return worst;
}

double SpectralField::coeff0() const { return coeffs()[0].real(); }

}  // namespace mslab
