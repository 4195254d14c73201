#include <cmath>
#include <cstddef>

#include "mfof/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace mfof::simd::avx2 {

namespace {

// exp(x) for x <= 0: x = n ln2 + r, |r| <= ln2/2, degree-13 Taylor in Horner form.
// Inputs below -708 flush to zero.
inline __m256d exp_nonpos(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lo);
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2hi, x);
  r = _mm256_fnmadd_pd(n, ln2lo, r);

  static const double c[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
                             1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
                             1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
                             1.0,                1.0};
  __m256d p = _mm256_set1_pd(c[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[k]));

  // 2^n through the exponent field; n >= -1022 after the clamp.
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(n64, 52));
  return _mm256_andnot_pd(under, _mm256_mul_pd(p, scale));
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

ExpMoments exp_moments(const double* c, const double* s, int n, double p, double q) {
  const __m256d vp = _mm256_set1_pd(p), vq = _mm256_set1_pd(q);
  __m256d a0 = _mm256_setzero_pd(), ac = a0, as = a0, acc = a0, ass = a0, acs = a0;
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d vc = _mm256_loadu_pd(c + j), vs = _mm256_loadu_pd(s + j);
    const __m256d e = exp_nonpos(_mm256_fmadd_pd(vp, vc, _mm256_mul_pd(vq, vs)));
    const __m256d ec = _mm256_mul_pd(e, vc), es = _mm256_mul_pd(e, vs);
    a0 = _mm256_add_pd(a0, e);
    ac = _mm256_add_pd(ac, ec);
    as = _mm256_add_pd(as, es);
    acc = _mm256_fmadd_pd(ec, vc, acc);
    ass = _mm256_fmadd_pd(es, vs, ass);
    acs = _mm256_fmadd_pd(ec, vs, acs);
  }
  ExpMoments m{hsum(a0), hsum(ac), hsum(as), hsum(acc), hsum(ass), hsum(acs)};
  if (j < n) {
    ExpMoments t = scalar::exp_moments(c + j, s + j, n - j, p, q);
    m.s0 += t.s0;
    m.sc += t.sc;
    m.ss += t.ss;
    m.scc += t.scc;
    m.sss += t.sss;
    m.scs += t.scs;
  }
  return m;
}

void stencil7_apply(const Stencil7& st, const double* x, double* y) {
  const std::ptrdiff_t N = st.N;
  if (N < 8) {
    scalar::stencil7_apply(st, x, y);
    return;
  }
  for (std::ptrdiff_t k = 0; k < N; ++k) {
    const std::ptrdiff_t km = (k + N - 1) % N, kp = (k + 1) % N;
    for (std::ptrdiff_t j = 0; j < N; ++j) {
      const std::ptrdiff_t jm = (j + N - 1) % N, jp = (j + 1) % N;
      const std::ptrdiff_t row = N * (j + N * k);
      const std::ptrdiff_t rjp = N * (jp + N * k), rjm = N * (jm + N * k);
      const std::ptrdiff_t rkp = N * (j + N * kp), rkm = N * (j + N * km);
      auto edge = [&](std::ptrdiff_t i) {
        const std::ptrdiff_t im = (i + N - 1) % N, ip = (i + 1) % N;
        const std::ptrdiff_t c = row + i;
        double v = st.diag[c] * x[c];
        v -= st.cx[c] * x[row + ip] + st.cx[row + im] * x[row + im];
        v -= st.cy[c] * x[rjp + i] + st.cy[rjm + i] * x[rjm + i];
        v -= st.cz[c] * x[rkp + i] + st.cz[rkm + i] * x[rkm + i];
        y[c] = v;
      };
      edge(0);
      std::ptrdiff_t i = 1;
      for (; i + 4 <= N - 1; i += 4) {
        const std::ptrdiff_t c = row + i;
        __m256d v = _mm256_mul_pd(_mm256_loadu_pd(st.diag + c), _mm256_loadu_pd(x + c));
        v = _mm256_fnmadd_pd(_mm256_loadu_pd(st.cx + c), _mm256_loadu_pd(x + c + 1), v);
        v = _mm256_fnmadd_pd(_mm256_loadu_pd(st.cx + c - 1), _mm256_loadu_pd(x + c - 1), v);
        v = _mm256_fnmadd_pd(_mm256_loadu_pd(st.cy + c), _mm256_loadu_pd(x + rjp + i), v);
        v = _mm256_fnmadd_pd(_mm256_loadu_pd(st.cy + rjm + i), _mm256_loadu_pd(x + rjm + i), v);
        v = _mm256_fnmadd_pd(_mm256_loadu_pd(st.cz + c), _mm256_loadu_pd(x + rkp + i), v);
        v = _mm256_fnmadd_pd(_mm256_loadu_pd(st.cz + rkm + i), _mm256_loadu_pd(x + rkm + i), v);
        _mm256_storeu_pd(y + c, v);
      }
      for (; i < N; ++i) edge(i);
    }
  }
}

}  // namespace mfof::simd::avx2

#else

namespace mfof::simd::avx2 {

ExpMoments exp_moments(const double* c, const double* s, int n, double p, double q) {
  return scalar::exp_moments(c, s, n, p, q);
}

void stencil7_apply(const Stencil7& st, const double* x, double* y) { scalar::stencil7_apply(st, x, y); }

}  // namespace mfof::simd::avx2

#endif
