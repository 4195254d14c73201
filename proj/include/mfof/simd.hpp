#pragma once

namespace mfof::simd {

enum class Isa { Scalar, Avx2 };

// Best ISA supported by this CPU (avx2 + fma), unless MFOF_SIMD=scalar is set.
Isa detected_isa();
Isa active_isa();
// Test hook: pin the dispatch target (must be supported).
void force_isa(Isa isa);
const char* isa_name(Isa isa);

// Sums over j of e_j * {1, c_j, s_j, c_j^2, s_j^2, c_j s_j} with e_j = exp(p c_j + q s_j).
// Callers keep the exponent <= 0.
struct ExpMoments {
  double s0 = 0, sc = 0, ss = 0, scc = 0, sss = 0, scs = 0;
};
ExpMoments exp_moments(const double* c, const double* s, int n, double p, double q);

// Periodic 7-point operator on an N^3 grid (x fastest):
//   y_i = diag_i x_i - sum over the six faces of coeff_face * x_neighbour,
// where cx[i] couples i and i+e1 (likewise cy, cz).
struct Stencil7 {
  int N = 0;
  const double* diag = nullptr;
  const double* cx = nullptr;
  const double* cy = nullptr;
  const double* cz = nullptr;
};
void stencil7_apply(const Stencil7& st, const double* x, double* y);

namespace scalar {
ExpMoments exp_moments(const double* c, const double* s, int n, double p, double q);
void stencil7_apply(const Stencil7& st, const double* x, double* y);
}  // namespace scalar

namespace avx2 {
ExpMoments exp_moments(const double* c, const double* s, int n, double p, double q);
void stencil7_apply(const Stencil7& st, const double* x, double* y);
}  // namespace avx2

}  // namespace mfof::simd
