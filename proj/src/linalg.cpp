#include "gse/linalg.hpp"

#include "gse/errors.hpp"

#include <cmath>
#include <string>

namespace gse {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kEigRatio = 1e-12;

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const ScaleMatrix& sigma) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.matrix());
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    return es;
}

}  // namespace

ScaleMatrix::ScaleMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
        throw ValidationError("invalid matrix: scale matrix must be square and non-empty");
    if (!m_.allFinite()) throw ValidationError("invalid matrix: scale matrix has non-finite entries");
    const double scale = m_.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m_.cols(); ++j)
            if (std::abs(m_(i, j) - m_(j, i)) > kSymTol * scale)
                throw ValidationError("invalid matrix: scale matrix is not symmetric");
    m_ = 0.5 * (m_ + m_.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo <= kEigRatio * hi)
        throw ValidationError("not SPD: scale matrix has a non-positive eigenvalue");
}

Vector location_vector(const Vector& v) {
    if (!v.allFinite()) throw ValidationError("location vector has non-finite entries");
    return v;
}

Matrix spd_sqrt(const ScaleMatrix& sigma) {
    auto es = eigen_of(sigma);
    const Matrix& q = es.eigenvectors();
    Matrix s = q * es.eigenvalues().cwiseSqrt().asDiagonal() * q.transpose();
    return 0.5 * (s + s.transpose());
}

Matrix spd_inv_sqrt(const ScaleMatrix& sigma) {
    auto es = eigen_of(sigma);
    const Matrix& q = es.eigenvectors();
    Matrix t = q * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
    return 0.5 * (t + t.transpose());
}

Matrix cholesky_lower(const ScaleMatrix& sigma) {
    Eigen::LLT<Matrix> llt(sigma.matrix());
    if (llt.info() != Eigen::Success) throw ValidationError("not SPD: Cholesky factorization failed");
    return llt.matrixL();
}

double quad_form(const ScaleMatrix& sigma, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != sigma.dim())
        throw ValidationError("dimension mismatch in quad_form");
    Eigen::LLT<Matrix> llt(sigma.matrix());
    Vector w = llt.matrixL().solve(v);
    return w.squaredNorm();
}

ScaleRoot make_root(const ScaleMatrix& sigma, RootConvention conv) {
    ScaleRoot r;
    if (conv == RootConvention::Symmetric) {
        r.root = spd_sqrt(sigma);
        r.inv_root = spd_inv_sqrt(sigma);
    } else {
        r.root = cholesky_lower(sigma);
        const auto n = r.root.rows();
        r.inv_root = r.root.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
    }
    return r;
}

const char* to_string(RootConvention conv) {
    return conv == RootConvention::Symmetric ? "symmetric" : "cholesky";
}

RootConvention root_from_string(const std::string& s) {
    if (s == "cholesky") return RootConvention::Cholesky;
    if (s == "symmetric") return RootConvention::Symmetric;
    throw ValidationError("unknown root convention: " + s);
}

}  // namespace gse
