#pragma once

#include "gse/distribution.hpp"
#include "gse/quad.hpp"

#include <string>
#include <vector>

namespace gse {

struct MomentDiagnostics {
    std::size_t integrals = 0;
    std::size_t nodes = 0;
    double max_error = 0.0;
    std::vector<std::string> methods;
    std::vector<std::string> warnings;

    void add(const IntegralEstimate& est);
    void merge(const MomentDiagnostics& other);
};

// Quantities on the standardized event {ξ_a < Z ≤ ξ_b}.
struct StandardizedMoments {
    double prob = 0.0;       // F_Z
    Vector delta;            // ∫ z f_Z
    Matrix omega;            // ∫ z zᵀ f_Z
    bool has_omega = false;
    MomentDiagnostics diag;
};

struct MomentReport {
    Rectangle std_rect = Rectangle::whole(1);
    double prob = 0.0;
    Vector delta;
    Matrix omega;
    Vector mean;
    Matrix second_moment;
    Matrix mdtcov;
    MomentDiagnostics diag;
};

// ξ_v = R⁻¹(v − μ); infinite components stay infinite with their sign.
Rectangle standardize_bounds(const GseDistribution& dist, const Rectangle& rect);
Vector standardize_vector(const GseDistribution& dist, const Vector& v);

// Closed-form assembly in standardized space.
StandardizedMoments standardized_moments(const GeneratorFamily& fam, const SkewFunction& skew,
                                         const Rectangle& xi, const IntegrationPlan& plan,
                                         bool with_omega);

// Ω_ij from its own terms without mirroring; used to check symmetry.
double omega_entry(const GeneratorFamily& fam, const SkewFunction& skew, const Rectangle& xi,
                   std::size_t i, std::size_t j, const IntegrationPlan& plan);

// Maps standardized quantities back to Y. Throws DegenerateRegion when F_Z < 1e-12.
MomentReport assemble_report(const GseDistribution& dist, const Rectangle& xi,
                             const StandardizedMoments& sm);

MomentReport moment_report(const GseDistribution& dist, const Rectangle& rect,
                           const IntegrationPlan& plan);

Vector delta_vector(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan);
Matrix omega_matrix(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan);
Vector truncated_mean(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan);
Matrix truncated_second_moment(const GseDistribution& dist, const Rectangle& rect,
                               const IntegrationPlan& plan);
Vector mdte(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan);
Matrix mdtcov(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan);

// H ≡ ½ path: elliptical rectangle moments with no skewing terms.
StandardizedMoments elliptical_moments(const GeneratorFamily& fam, std::size_t n,
                                       const Rectangle& xi, const IntegrationPlan& plan,
                                       bool with_omega);

}  // namespace gse
