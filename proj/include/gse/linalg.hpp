#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace gse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Symmetric positive-definite scale matrix. Construction validates.
class ScaleMatrix {
public:
    explicit ScaleMatrix(Matrix m);

    const Matrix& matrix() const { return m_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

private:
    Matrix m_;
};

// Throws unless every entry is finite.
Vector location_vector(const Vector& v);

Matrix spd_sqrt(const ScaleMatrix& sigma);
Matrix spd_inv_sqrt(const ScaleMatrix& sigma);
Matrix cholesky_lower(const ScaleMatrix& sigma);

// vᵀ Σ⁻¹ v for the scale matrix Σ.
double quad_form(const ScaleMatrix& sigma, const Vector& v);

enum class RootConvention { Cholesky, Symmetric };

// R with R·Rᵀ = Σ, and its inverse.
struct ScaleRoot {
    Matrix root;
    Matrix inv_root;
};

ScaleRoot make_root(const ScaleMatrix& sigma, RootConvention conv);

const char* to_string(RootConvention conv);
RootConvention root_from_string(const std::string& s);

}  // namespace gse
