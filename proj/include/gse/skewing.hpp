#pragma once

#include "gse/linalg.hpp"

#include <cstddef>
#include <string>

namespace gse {

enum class SkewKind { NormalCdf, StudentTCdf, LogisticCdf, ConstantHalf };

const char* to_string(SkewKind kind);
SkewKind skew_from_string(const std::string& s);

// H(t) = J(γᵀt) with J a symmetric univariate CDF.
class SkewFunction {
public:
    SkewFunction(SkewKind kind, Vector gamma, double df = 0.0);

    static SkewFunction constant_half(std::size_t n) {
        return SkewFunction(SkewKind::ConstantHalf, Vector::Zero(static_cast<Eigen::Index>(n)));
    }

    SkewKind kind() const { return kind_; }
    const Vector& gamma() const { return gamma_; }
    double df() const { return df_; }
    std::size_t dim() const { return static_cast<std::size_t>(gamma_.size()); }

    // J and its derivatives at a projected value x = γᵀt.
    double j(double x) const;
    double j1(double x) const;
    double j2(double x) const;

    // In place over a batch of projected values, p = 0, 1, 2 for J, J', J''.
    void j_batch(int p, double* x, std::size_t count) const;

    double h(const Vector& t) const;
    double dh(const Vector& t, std::size_t i) const;
    double d2h(const Vector& t, std::size_t i, std::size_t j) const;

private:
    double project(const Vector& t) const;

    SkewKind kind_;
    Vector gamma_;
    double df_;
};

double normal_pdf(double x);
double normal_cdf(double x);

}  // namespace gse
