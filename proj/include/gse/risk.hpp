#pragma once

#include "gse/distribution.hpp"
#include "gse/moments.hpp"
#include "gse/quad.hpp"

namespace gse {

// Throws unless every entry lies in the open interval (0, 1).
void validate_quantiles(const Vector& q);

// P(Y_k ≤ v), exact for the Y-marginal.
double marginal_cdf(const GseDistribution& dist, std::size_t k, double v, const IntegrationPlan& plan);

double marginal_var(const GseDistribution& dist, std::size_t k, double q, const IntegrationPlan& plan);

Vector var_vector(const GseDistribution& dist, const Vector& q, const IntegrationPlan& plan);

struct TailReport {
    Vector q;
    Vector var;
    Rectangle std_rect = Rectangle::whole(1);  // {Z > ξ_q}
    double prob = 0.0;                           // F̄_Z(ξ_q)
    Vector delta;
    Matrix omega;
    Vector mtce;
    Matrix mtcov;
    MomentDiagnostics diag;
};

// MTCE and, with with_cov, MTCov at a = VaR_q, b = +∞.
TailReport tail_report(const GseDistribution& dist, const Vector& q, const IntegrationPlan& plan,
                       bool with_cov);

// Same measures from precomputed thresholds.
TailReport tail_report_at(const GseDistribution& dist, const Vector& var, const IntegrationPlan& plan,
                          bool with_cov);

Vector mtce(const GseDistribution& dist, const Vector& q, const IntegrationPlan& plan);
Matrix mtcov(const GseDistribution& dist, const Vector& q, const IntegrationPlan& plan);

}  // namespace gse
