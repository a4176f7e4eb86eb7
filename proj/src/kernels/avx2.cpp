// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include "vbakf/kernels.hpp"

#include <immintrin.h>

namespace vbakf::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

} // namespace

void log_evidence(std::span<const double> y, double center, const EvidenceCoefficients& c,
                  std::span<double> clean, std::span<double> corrupt) {
    const std::size_t n = y.size();
    const __m256d vc = _mm256_set1_pd(center);
    const __m256d clean_off = _mm256_set1_pd(c.clean_offset);
    const __m256d corrupt_off = _mm256_set1_pd(c.corrupt_offset);
    const __m256d neg_half_clean = _mm256_set1_pd(-0.5 * c.clean_precision);
    const __m256d neg_half_corrupt = _mm256_set1_pd(-0.5 * c.corrupt_precision);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(y.data() + i), vc);
        const __m256d r2 = _mm256_mul_pd(r, r);
        _mm256_storeu_pd(clean.data() + i, _mm256_fmadd_pd(neg_half_clean, r2, clean_off));
        _mm256_storeu_pd(corrupt.data() + i, _mm256_fmadd_pd(neg_half_corrupt, r2, corrupt_off));
    }
    const double half_clean = 0.5 * c.clean_precision;
    const double half_corrupt = 0.5 * c.corrupt_precision;
    for (; i < n; ++i) {
        const double r = y[i] - center;
        const double r2 = r * r;
        clean[i] = c.clean_offset - half_clean * r2;
        corrupt[i] = c.corrupt_offset - half_corrupt * r2;
    }
}

SoftCounts soft_counts(std::span<const double> y, std::span<const double> pi, double center) {
    const std::size_t n = y.size();
    const __m256d vc = _mm256_set1_pd(center);
    __m256d acc_pi = _mm256_setzero_pd();
    __m256d acc_sq = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_loadu_pd(pi.data() + i);
        const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(y.data() + i), vc);
        acc_pi = _mm256_add_pd(acc_pi, p);
        acc_sq = _mm256_fmadd_pd(p, _mm256_mul_pd(r, r), acc_sq);
    }
    SoftCounts out;
    out.clean = hsum(acc_pi);
    out.clean_squares = hsum(acc_sq);
    for (; i < n; ++i) {
        const double r = y[i] - center;
        out.clean += pi[i];
        out.clean_squares += pi[i] * (r * r);
    }
    // sum (1 - pi) = n - sum pi; both sides of the reference agree to rounding.
    out.corrupt = static_cast<double>(n) - out.clean;
    return out;
}

double sum_squared_difference(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace vbakf::kernels::avx2
