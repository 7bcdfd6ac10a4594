#include "gse/kernels.hpp"

namespace gse::kernels {

namespace {

void project(const double* coords, std::size_t dim, std::size_t count, std::size_t stride,
             const double* dir, double offset, double* out) {
    for (std::size_t i = 0; i < count; ++i) out[i] = offset;
    for (std::size_t d = 0; d < dim; ++d) {
        const double* x = coords + d * stride;
        const double c = dir[d];
        for (std::size_t i = 0; i < count; ++i) out[i] += c * x[i];
    }
}

void half_sq_norm(const double* coords, std::size_t dim, std::size_t count, std::size_t stride,
                  double shift, double* out) {
    for (std::size_t i = 0; i < count; ++i) out[i] = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double* x = coords + d * stride;
        for (std::size_t i = 0; i < count; ++i) out[i] += x[i] * x[i];
    }
    for (std::size_t i = 0; i < count; ++i) out[i] = shift + 0.5 * out[i];
}

double dot(const double* a, const double* b, std::size_t count) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += a[i] * b[i];
    return s;
}

void box_indicator(const double* coords, std::size_t dim, std::size_t count, std::size_t stride,
                   const double* lo, const double* hi, double* out) {
    for (std::size_t i = 0; i < count; ++i) out[i] = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double* x = coords + d * stride;
        for (std::size_t i = 0; i < count; ++i)
            if (!(x[i] > lo[d] && x[i] <= hi[d])) out[i] = 0.0;
    }
}

void accumulate_moments(const double* coords, std::size_t dim, std::size_t count,
                        std::size_t stride, const double* w, double* sum0, double* sum1,
                        double* sum2) {
    double s0 = 0.0;
    for (std::size_t i = 0; i < count; ++i) s0 += w[i];
    *sum0 += s0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double* x = coords + d * stride;
        double s1 = 0.0;
        for (std::size_t i = 0; i < count; ++i) s1 += w[i] * x[i];
        sum1[d] += s1;
        for (std::size_t e = d; e < dim; ++e) {
            const double* y = coords + e * stride;
            double s2 = 0.0;
            for (std::size_t i = 0; i < count; ++i) s2 += w[i] * x[i] * y[i];
            sum2[d * dim + e] += s2;
        }
    }
}

void mul_inplace(double* x, const double* y, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) x[i] *= y[i];
}

const KernelTable kScalar{"scalar", project, half_sq_norm, dot, box_indicator,
                          accumulate_moments, mul_inplace};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace gse::kernels
