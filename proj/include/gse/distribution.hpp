#pragma once

#include "gse/generators.hpp"
#include "gse/linalg.hpp"
#include "gse/skewing.hpp"

namespace gse {

// Y ~ GSE_n(μ, Σ, g_n, H) with Z = R⁻¹(Y − μ), R Rᵀ = Σ.
class GseDistribution {
public:
    GseDistribution(Vector mu, ScaleMatrix sigma, GeneratorFamily family, SkewFunction skew,
                    RootConvention root = RootConvention::Cholesky);

    std::size_t dim() const { return static_cast<std::size_t>(mu_.size()); }
    const Vector& mu() const { return mu_; }
    const ScaleMatrix& sigma() const { return sigma_; }
    const GeneratorFamily& family() const { return family_; }
    const SkewFunction& skew() const { return skew_; }
    RootConvention root_convention() const { return conv_; }
    const Matrix& root() const { return root_.root; }
    const Matrix& inv_root() const { return root_.inv_root; }

    // Same model with μ shifted by c.
    GseDistribution shifted(const Vector& c) const;

private:
    Vector mu_;
    ScaleMatrix sigma_;
    GeneratorFamily family_;
    SkewFunction skew_;
    RootConvention conv_;
    ScaleRoot root_;
};

}  // namespace gse
