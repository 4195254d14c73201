#include "mfof/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "mfof/error.hpp"
#include "mfof/kernel_grid.hpp"

namespace mfof {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft3::Fft3(int N) : N_(N) {
  std::lock_guard<std::mutex> lock(plan_mutex());
  rbuf_ = fftw_alloc_real(real_size());
  cbuf_ = fftw_alloc_complex(spectrum_size());
  fwd_ = fftw_plan_dft_r2c_3d(N, N, N, rbuf_, static_cast<fftw_complex*>(cbuf_), FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_3d(N, N, N, static_cast<fftw_complex*>(cbuf_), rbuf_, FFTW_ESTIMATE);
  if (!fwd_ || !inv_) throw NumericalError("FFTW planning failed");
}

Fft3::~Fft3() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void Fft3::forward(const double* in, std::complex<double>* out) {
  std::copy(in, in + real_size(), rbuf_);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  const auto* c = reinterpret_cast<const std::complex<double>*>(cbuf_);
  std::copy(c, c + spectrum_size(), out);
}

void Fft3::inverse(const std::complex<double>* in, double* out) {
  std::copy(in, in + spectrum_size(), reinterpret_cast<std::complex<double>*>(cbuf_));
  fftw_execute(static_cast<fftw_plan>(inv_));
  std::copy(rbuf_, rbuf_ + real_size(), out);
}

Fft3& fft_for(int N) {
  thread_local std::map<int, std::unique_ptr<Fft3>> cache;
  auto& p = cache[N];
  if (!p) p = std::make_unique<Fft3>(N);
  return *p;
}

int KernelSpectrum::pair_index(int k, int l) {
  if (k > l) std::swap(k, l);
  return k * 5 - k * (k - 1) / 2 + (l - k);
}

KernelSpectrum kernel_spectrum(const PeriodizedKernelGrid& kg, bool exclude_origin) {
  return kernel_spectrum(kg.grid.N, kg.samples, exclude_origin);
}

KernelSpectrum kernel_spectrum(int N, const std::vector<Mat5>& samples, bool exclude_origin) {
  KernelSpectrum ks;
  ks.N = N;
  Fft3& fft = fft_for(ks.N);
  const std::size_t M = fft.real_size();
  std::vector<double> buf(M);
  std::vector<std::complex<double>> spec(fft.spectrum_size());
  ks.entries.resize(15);
  for (int k = 0; k < 5; ++k)
    for (int l = k; l < 5; ++l) {
      for (std::size_t i = 0; i < M; ++i) buf[i] = samples[i](k, l);
      if (exclude_origin) buf[0] = 0.0;
      fft.forward(buf.data(), spec.data());
      auto& e = ks.entries[KernelSpectrum::pair_index(k, l)];
      e.resize(spec.size());
      // Even kernel: the spectrum is real.
      for (std::size_t i = 0; i < spec.size(); ++i) e[i] = spec[i].real();
    }
  return ks;
}

KernelSpectrum difference_symbol(const PeriodizedKernelGrid& kg) {
  KernelSpectrum S = kernel_spectrum(kg, true);
  const double h3 = kg.grid.cell_volume();
  for (int k = 0; k < 5; ++k)
    for (int l = k; l < 5; ++l) {
      auto& e = S.entries[KernelSpectrum::pair_index(k, l)];
      for (auto& v : e) v = kg.K0_off(k, l) - h3 * v;
      e[0] = 0.0;
    }
  return S;
}

double spectral_quadratic(const KernelSpectrum& S, const OrderField& b, OrderField* Sb) {
  if (b.grid.N != S.N) throw DomainError("spectral_quadratic: grid mismatch");
  const int N = S.N, H = N / 2 + 1;
  Fft3& fft = fft_for(N);
  const std::size_t M = fft.real_size(), P = fft.spectrum_size();
  std::vector<double> buf(M);
  std::vector<std::vector<std::complex<double>>> B(5, std::vector<std::complex<double>>(P));
  for (int l = 0; l < 5; ++l) {
    for (std::size_t i = 0; i < M; ++i) buf[i] = b[i][l];
    fft.forward(buf.data(), B[l].data());
  }
  std::vector<std::vector<std::complex<double>>> C(5, std::vector<std::complex<double>>(P));
  for (int k = 0; k < 5; ++k)
    for (int l = 0; l < 5; ++l) {
      const auto& e = S.entries[KernelSpectrum::pair_index(k, l)];
      const auto& Bl = B[l];
      auto& Ck = C[k];
      for (std::size_t i = 0; i < P; ++i) Ck[i] += e[i] * Bl[i];
    }
  double q = 0;
  for (std::size_t i = 0; i < P; ++i) {
    const int ix = int(i % H);
    const double w = (ix == 0 || 2 * ix == N) ? 1.0 : 2.0;
    double t = 0;
    for (int k = 0; k < 5; ++k) t += (std::conj(B[k][i]) * C[k][i]).real();
    q += w * t;
  }
  q /= double(M);
  if (Sb) {
    *Sb = OrderField(b.grid);
    const double inv = 1.0 / double(M);
    for (int k = 0; k < 5; ++k) {
      fft.inverse(C[k].data(), buf.data());
      for (std::size_t i = 0; i < M; ++i) (*Sb)[i][k] = buf[i] * inv;
    }
  }
  return q;
}

OrderField convolve(const KernelSpectrum& ks, const OrderField& b) {
  if (b.grid.N != ks.N) throw DomainError("convolve: grid mismatch");
  Fft3& fft = fft_for(ks.N);
  const std::size_t M = fft.real_size(), S = fft.spectrum_size();
  std::vector<double> buf(M);
  std::vector<std::vector<std::complex<double>>> B(5, std::vector<std::complex<double>>(S));
  for (int l = 0; l < 5; ++l) {
    for (std::size_t i = 0; i < M; ++i) buf[i] = b[i][l];
    fft.forward(buf.data(), B[l].data());
  }
  OrderField out(b.grid);
  std::vector<std::complex<double>> acc(S);
  const double inv = 1.0 / double(M);
  for (int k = 0; k < 5; ++k) {
    std::fill(acc.begin(), acc.end(), std::complex<double>(0.0));
    for (int l = 0; l < 5; ++l) {
      const auto& e = ks.entries[KernelSpectrum::pair_index(k, l)];
      const auto& Bl = B[l];
      for (std::size_t i = 0; i < S; ++i) acc[i] += e[i] * Bl[i];
    }
    fft.inverse(acc.data(), buf.data());
    for (std::size_t i = 0; i < M; ++i) out[i][k] = buf[i] * inv;
  }
  return out;
}

std::vector<Mat5> convolve_scalar(const KernelSpectrum& ks, const std::vector<double>& chi) {
  Fft3& fft = fft_for(ks.N);
  const std::size_t M = fft.real_size(), S = fft.spectrum_size();
  if (chi.size() != M) throw DomainError("convolve_scalar: size mismatch");
  std::vector<std::complex<double>> C(S), acc(S);
  fft.forward(chi.data(), C.data());
  std::vector<Mat5> out(M, Mat5::Zero());
  std::vector<double> buf(M);
  const double inv = 1.0 / double(M);
  for (int k = 0; k < 5; ++k)
    for (int l = k; l < 5; ++l) {
      const auto& e = ks.entries[KernelSpectrum::pair_index(k, l)];
      for (std::size_t i = 0; i < S; ++i) acc[i] = e[i] * C[i];
      fft.inverse(acc.data(), buf.data());
      for (std::size_t i = 0; i < M; ++i) out[i](k, l) = out[i](l, k) = buf[i] * inv;
    }
  return out;
}

std::vector<double> circular_convolve(int N, const std::vector<double>& a, const std::vector<double>& b) {
  Fft3& fft = fft_for(N);
  std::vector<std::complex<double>> A(fft.spectrum_size()), Bs(fft.spectrum_size());
  fft.forward(a.data(), A.data());
  fft.forward(b.data(), Bs.data());
  for (std::size_t i = 0; i < A.size(); ++i) A[i] *= Bs[i];
  std::vector<double> out(fft.real_size());
  fft.inverse(A.data(), out.data());
  for (auto& v : out) v /= double(out.size());
  return out;
}

std::vector<double> circular_correlate(int N, const std::vector<double>& a, const std::vector<double>& b) {
  Fft3& fft = fft_for(N);
  std::vector<std::complex<double>> A(fft.spectrum_size()), Bs(fft.spectrum_size());
  fft.forward(a.data(), A.data());
  fft.forward(b.data(), Bs.data());
  for (std::size_t i = 0; i < A.size(); ++i) A[i] = std::conj(A[i]) * Bs[i];
  std::vector<double> out(fft.real_size());
  fft.inverse(A.data(), out.data());
  for (auto& v : out) v /= double(out.size());
  return out;
}

}  // namespace mfof
