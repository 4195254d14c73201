#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "mfof/simd.hpp"

namespace mfof::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<int> g_isa{-1};

}  // namespace

Isa detected_isa() {
  const char* env = std::getenv("MFOF_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

Isa active_isa() {
  int v = g_isa.load(std::memory_order_relaxed);
  if (v < 0) {
    v = static_cast<int>(detected_isa());
    g_isa.store(v, std::memory_order_relaxed);
  }
  return static_cast<Isa>(v);
}

void force_isa(Isa isa) {
  if (isa == Isa::Avx2 && !cpu_has_avx2()) throw std::runtime_error("avx2 not supported on this CPU");
  g_isa.store(static_cast<int>(isa), std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

ExpMoments exp_moments(const double* c, const double* s, int n, double p, double q) {
  return active_isa() == Isa::Avx2 ? avx2::exp_moments(c, s, n, p, q) : scalar::exp_moments(c, s, n, p, q);
}

void stencil7_apply(const Stencil7& st, const double* x, double* y) {
  if (active_isa() == Isa::Avx2)
    avx2::stencil7_apply(st, x, y);
  else
    scalar::stencil7_apply(st, x, y);
}

}  // namespace mfof::simd
