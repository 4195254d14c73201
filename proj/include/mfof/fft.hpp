#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "mfof/field.hpp"

namespace mfof {

// Real 3-D transforms on an N^3 periodic grid (x fastest). Inverse is unnormalized.
class Fft3 {
 public:
  explicit Fft3(int N);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  int N() const { return N_; }
  std::size_t real_size() const { return std::size_t(N_) * N_ * N_; }
  std::size_t spectrum_size() const { return std::size_t(N_) * N_ * (N_ / 2 + 1); }
  void forward(const double* in, std::complex<double>* out);
  void inverse(const std::complex<double>* in, double* out);

 private:
  int N_;
  double* rbuf_;
  void* cbuf_;
  void* fwd_;
  void* inv_;
};

// Per-thread cached transform for grid size N.
Fft3& fft_for(int N);

// Real spectra of an even 5x5 kernel lattice function, 15 entries (k <= l).
struct KernelSpectrum {
  int N = 0;
  std::vector<std::vector<double>> entries;  // index pair_index(k, l)
  static int pair_index(int k, int l);
};

struct PeriodizedKernelGrid;
KernelSpectrum kernel_spectrum(const PeriodizedKernelGrid& kg, bool exclude_origin = true);
// Same for an arbitrary even lattice function on an N^3 grid.
KernelSpectrum kernel_spectrum(int N, const std::vector<Mat5>& samples, bool exclude_origin = true);

// Symbol of the difference form, S(k) = K0_off - h^3 K^(k) with S(0) = 0. Positive
// semidefinite, so quadratic forms built from it carry no cancellation.
KernelSpectrum difference_symbol(const PeriodizedKernelGrid& kg);

// sum_x b(x) . (S * b)(x) evaluated on the half spectrum; Sb receives S * b if given.
double spectral_quadratic(const KernelSpectrum& S, const OrderField& b, OrderField* Sb = nullptr);

// T(x) = sum_d K(d) chi(x - d) for a scalar field chi, no volume factor.
std::vector<Mat5> convolve_scalar(const KernelSpectrum& ks, const std::vector<double>& chi);

// out(x) = sum_d K(d) b(x - d), no volume factor.
OrderField convolve(const KernelSpectrum& ks, const OrderField& b);

// Scalar circular convolution / correlation helpers for diagnostics.
std::vector<double> circular_convolve(int N, const std::vector<double>& a, const std::vector<double>& b);
// c(s) = sum_x a(x) b(x + s)
std::vector<double> circular_correlate(int N, const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mfof
