#include <cmath>
#include <cstddef>

#include "mfof/simd.hpp"

namespace mfof::simd::scalar {

ExpMoments exp_moments(const double* c, const double* s, int n, double p, double q) {
  ExpMoments m;
  for (int j = 0; j < n; ++j) {
    const double e = std::exp(p * c[j] + q * s[j]);
    const double ec = e * c[j], es = e * s[j];
    m.s0 += e;
    m.sc += ec;
    m.ss += es;
    m.scc += ec * c[j];
    m.sss += es * s[j];
    m.scs += ec * s[j];
  }
  return m;
}

void stencil7_apply(const Stencil7& st, const double* x, double* y) {
  const std::ptrdiff_t N = st.N, NN = N * N;
  for (std::ptrdiff_t k = 0; k < N; ++k) {
    const std::ptrdiff_t km = (k + N - 1) % N, kp = (k + 1) % N;
    for (std::ptrdiff_t j = 0; j < N; ++j) {
      const std::ptrdiff_t jm = (j + N - 1) % N, jp = (j + 1) % N;
      const std::ptrdiff_t row = N * (j + N * k);
      for (std::ptrdiff_t i = 0; i < N; ++i) {
        const std::ptrdiff_t im = (i + N - 1) % N, ip = (i + 1) % N;
        const std::ptrdiff_t c = row + i;
        double v = st.diag[c] * x[c];
        v -= st.cx[c] * x[row + ip] + st.cx[row + im] * x[row + im];
        v -= st.cy[c] * x[N * (jp + N * k) + i] + st.cy[N * (jm + N * k) + i] * x[N * (jm + N * k) + i];
        v -= st.cz[c] * x[N * (j + N * kp) + i] + st.cz[N * (j + N * km) + i] * x[N * (j + N * km) + i];
        y[c] = v;
      }
    }
  }
  (void)NN;
}

}  // namespace mfof::simd::scalar
