#include "simpa/gemm.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace simpa {
namespace {

// BLIS-style blocking. Panels are packed so the micro-kernel streams
// contiguous memory regardless of transposition flags.
constexpr std::size_t KC = 320;
constexpr std::size_t MC = 128;
constexpr std::size_t NC = 1920;
constexpr std::size_t MR = 8;
constexpr std::size_t NR = 24;  // 3 x 8 doubles

inline const double* addr(const double* p, std::size_t ld, bool trans, std::size_t r,
                          std::size_t c) {
  return trans ? p + c * ld + r : p + r * ld + c;
}

// Pack an mc x kc block of op(A) into MR-row slivers, zero-padding partial rows.
void pack_a(const double* a, std::size_t lda, bool trans, std::size_t row0, std::size_t col0,
            std::size_t mc, std::size_t kc, double* ap) {
  for (std::size_t i = 0; i < mc; i += MR) {
    const std::size_t rows = std::min(MR, mc - i);
    for (std::size_t l = 0; l < kc; ++l) {
      for (std::size_t r = 0; r < rows; ++r) {
        ap[l * MR + r] = *addr(a, lda, trans, row0 + i + r, col0 + l);
      }
      for (std::size_t r = rows; r < MR; ++r) ap[l * MR + r] = 0.0;
    }
    ap += kc * MR;
  }
}

// Pack a kc x nc block of op(B) into NR-column slivers, zero-padding partial columns.
void pack_b(const double* b, std::size_t ldb, bool trans, std::size_t row0, std::size_t col0,
            std::size_t kc, std::size_t nc, double* bp) {
  for (std::size_t j = 0; j < nc; j += NR) {
    const std::size_t cols = std::min(NR, nc - j);
    for (std::size_t l = 0; l < kc; ++l) {
      for (std::size_t c = 0; c < cols; ++c) {
        bp[l * NR + c] = *addr(b, ldb, trans, row0 + l, col0 + j + c);
      }
      for (std::size_t c = cols; c < NR; ++c) bp[l * NR + c] = 0.0;
    }
    bp += kc * NR;
  }
}

#if defined(__AVX512F__)

// 8x24 micro-kernel: acc = Ap @ Bp over kc, then C(rows x cols) gets
// alpha*acc (+ existing C when accumulate).
void micro_kernel(std::size_t kc, const double* ap, const double* bp, double alpha, double* c,
                  std::size_t ldc, std::size_t rows, std::size_t cols, bool accumulate) {
  __m512d acc[MR][3];
  for (std::size_t r = 0; r < MR; ++r)
    for (int v = 0; v < 3; ++v) acc[r][v] = _mm512_setzero_pd();

  for (std::size_t l = 0; l < kc; ++l) {
    const __m512d b0 = _mm512_loadu_pd(bp + l * NR);
    const __m512d b1 = _mm512_loadu_pd(bp + l * NR + 8);
    const __m512d b2 = _mm512_loadu_pd(bp + l * NR + 16);
    const double* arow = ap + l * MR;
    for (std::size_t r = 0; r < MR; ++r) {
      const __m512d av = _mm512_set1_pd(arow[r]);
      acc[r][0] = _mm512_fmadd_pd(av, b0, acc[r][0]);
      acc[r][1] = _mm512_fmadd_pd(av, b1, acc[r][1]);
      acc[r][2] = _mm512_fmadd_pd(av, b2, acc[r][2]);
    }
  }

  const __m512d valpha = _mm512_set1_pd(alpha);
  for (std::size_t r = 0; r < rows; ++r) {
    double* crow = c + r * ldc;
    std::size_t left = cols;
    for (int v = 0; v < 3 && left > 0; ++v) {
      const std::size_t w = std::min<std::size_t>(8, left);
      const __mmask8 mask = static_cast<__mmask8>((1u << w) - 1u);
      __m512d cv = accumulate ? _mm512_mask_loadu_pd(_mm512_setzero_pd(), mask, crow + v * 8)
                              : _mm512_setzero_pd();
      cv = _mm512_fmadd_pd(valpha, acc[r][v], cv);
      _mm512_mask_storeu_pd(crow + v * 8, mask, cv);
      left -= w;
    }
  }
}

#else

void micro_kernel(std::size_t kc, const double* ap, const double* bp, double alpha, double* c,
                  std::size_t ldc, std::size_t rows, std::size_t cols, bool accumulate) {
  double acc[MR][NR];
  for (std::size_t r = 0; r < MR; ++r)
    for (std::size_t j = 0; j < NR; ++j) acc[r][j] = 0.0;
  for (std::size_t l = 0; l < kc; ++l) {
    const double* arow = ap + l * MR;
    const double* brow = bp + l * NR;
    for (std::size_t r = 0; r < MR; ++r) {
      const double av = arow[r];
      for (std::size_t j = 0; j < NR; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = alpha * acc[r][j];
      if (accumulate)
        c[r * ldc + j] += v;
      else
        c[r * ldc + j] = v;
    }
  }
}

#endif

void scale_c(double* c, std::size_t ldc, std::size_t m, std::size_t n, double beta) {
  if (beta == 1.0) return;
  for (std::size_t i = 0; i < m; ++i) {
    double* row = c + i * ldc;
    if (beta == 0.0) {
      std::memset(row, 0, n * sizeof(double));
    } else {
      for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
    }
  }
}

}  // namespace

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc) {
  if (m == 0 || n == 0) return;
  if (k == 0 || alpha == 0.0) {
    scale_c(c, ldc, m, n, beta);
    return;
  }
  scale_c(c, ldc, m, n, beta);

  thread_local std::vector<double> apack;
  thread_local std::vector<double> bpack;
  apack.resize(MC * KC + MR * KC);
  bpack.resize(KC * ((NC + NR - 1) / NR * NR));

  for (std::size_t jc = 0; jc < n; jc += NC) {
    const std::size_t nc = std::min(NC, n - jc);
    for (std::size_t pc = 0; pc < k; pc += KC) {
      const std::size_t kc = std::min(KC, k - pc);
      pack_b(b, ldb, trans_b, pc, jc, kc, nc, bpack.data());
      for (std::size_t ic = 0; ic < m; ic += MC) {
        const std::size_t mc = std::min(MC, m - ic);
        pack_a(a, lda, trans_a, ic, pc, mc, kc, apack.data());
        for (std::size_t jr = 0; jr < nc; jr += NR) {
          const std::size_t cols = std::min(NR, nc - jr);
          const double* bp = bpack.data() + (jr / NR) * kc * NR;
          for (std::size_t ir = 0; ir < mc; ir += MR) {
            const std::size_t rows = std::min(MR, mc - ir);
            const double* ap = apack.data() + (ir / MR) * kc * MR;
            micro_kernel(kc, ap, bp, alpha, c + (ic + ir) * ldc + jc + jr, ldc, rows, cols,
                         true);
          }
        }
      }
    }
  }
}

}  // namespace simpa
