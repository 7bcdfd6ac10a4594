#include "gse/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace gse::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void project(const double* coords, std::size_t dim, std::size_t count, std::size_t stride,
             const double* dir, double offset, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        __m256d acc = _mm256_set1_pd(offset);
        for (std::size_t d = 0; d < dim; ++d)
            acc = _mm256_fmadd_pd(_mm256_set1_pd(dir[d]), _mm256_loadu_pd(coords + d * stride + i), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < count; ++i) {
        double s = offset;
        for (std::size_t d = 0; d < dim; ++d) s += dir[d] * coords[d * stride + i];
        out[i] = s;
    }
}

void half_sq_norm(const double* coords, std::size_t dim, std::size_t count, std::size_t stride,
                  double shift, double* out) {
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d sh = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t d = 0; d < dim; ++d) {
            __m256d x = _mm256_loadu_pd(coords + d * stride + i);
            acc = _mm256_fmadd_pd(x, x, acc);
        }
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(half, acc, sh));
    }
    for (; i < count; ++i) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double x = coords[d * stride + i];
            s += x * x;
        }
        out[i] = shift + 0.5 * s;
    }
}

double dot(const double* a, const double* b, std::size_t count) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= count; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= count; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < count; ++i) s += a[i] * b[i];
    return s;
}

void box_indicator(const double* coords, std::size_t dim, std::size_t count, std::size_t stride,
                   const double* lo, const double* hi, double* out) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
        for (std::size_t d = 0; d < dim; ++d) {
            __m256d x = _mm256_loadu_pd(coords + d * stride + i);
            __m256d gt = _mm256_cmp_pd(x, _mm256_set1_pd(lo[d]), _CMP_GT_OQ);
            __m256d le = _mm256_cmp_pd(x, _mm256_set1_pd(hi[d]), _CMP_LE_OQ);
            mask = _mm256_and_pd(mask, _mm256_and_pd(gt, le));
        }
        _mm256_storeu_pd(out + i, _mm256_and_pd(mask, one));
    }
    for (; i < count; ++i) {
        double v = 1.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double x = coords[d * stride + i];
            if (!(x > lo[d] && x <= hi[d])) v = 0.0;
        }
        out[i] = v;
    }
}

void accumulate_moments(const double* coords, std::size_t dim, std::size_t count,
                        std::size_t stride, const double* w, double* sum0, double* sum1,
                        double* sum2) {
    {
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= count; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(w + i));
        double s = hsum(acc);
        for (; i < count; ++i) s += w[i];
        *sum0 += s;
    }
    for (std::size_t d = 0; d < dim; ++d) {
        const double* x = coords + d * stride;
        sum1[d] += dot(w, x, count);
        for (std::size_t e = d; e < dim; ++e) {
            const double* y = coords + e * stride;
            __m256d acc = _mm256_setzero_pd();
            std::size_t i = 0;
            for (; i + 4 <= count; i += 4) {
                __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
                acc = _mm256_fmadd_pd(wx, _mm256_loadu_pd(y + i), acc);
            }
            double s = hsum(acc);
            for (; i < count; ++i) s += w[i] * x[i] * y[i];
            sum2[d * dim + e] += s;
        }
    }
}

void mul_inplace(double* x, const double* y, std::size_t count) {
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < count; ++i) x[i] *= y[i];
}

const KernelTable kAvx2{"avx2", project, half_sq_norm, dot, box_indicator,
                        accumulate_moments, mul_inplace};

}  // namespace

const KernelTable* avx2_table_compiled() { return &kAvx2; }

}  // namespace gse::kernels::detail

#else

namespace gse::kernels::detail {
const KernelTable* avx2_table_compiled() { return nullptr; }
}  // namespace gse::kernels::detail

#endif
