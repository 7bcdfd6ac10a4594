#pragma once

#include <cstddef>

// Hot loops over blocks of points stored structure-of-arrays:
// coordinate d of point i lives at coords[d * stride + i].
namespace gse::kernels {

struct KernelTable {
    const char* name;

    // out[i] = offset + sum_d dir[d] * x_d[i]
    void (*project)(const double* coords, std::size_t dim, std::size_t count, std::size_t stride,
                    const double* dir, double offset, double* out);

    // out[i] = shift + 0.5 * sum_d x_d[i]^2
    void (*half_sq_norm)(const double* coords, std::size_t dim, std::size_t count,
                         std::size_t stride, double shift, double* out);

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t count);

    // out[i] = 1 if lo[d] < x_d[i] <= hi[d] for every d, else 0
    void (*box_indicator)(const double* coords, std::size_t dim, std::size_t count,
                          std::size_t stride, const double* lo, const double* hi, double* out);

    // sum0 += sum_i w[i]; sum1[d] += sum_i w[i] x_d[i]; sum2[d*dim+e] += sum_i w[i] x_d[i] x_e[i]
    // Only e >= d is written in sum2.
    void (*accumulate_moments)(const double* coords, std::size_t dim, std::size_t count,
                               std::size_t stride, const double* w, double* sum0, double* sum1,
                               double* sum2);

    // x[i] *= y[i]
    void (*mul_inplace)(double* x, const double* y, std::size_t count);
};

const KernelTable& scalar_table();

// nullptr when not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

// Chosen once: AVX2 when available unless GSE_SIMD=scalar.
const KernelTable& active();

}  // namespace gse::kernels
