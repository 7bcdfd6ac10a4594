#include "gse/risk.hpp"

#include "gse/errors.hpp"
#include "gse/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gse {

namespace {

constexpr int kMaxIter = 200;
constexpr double kProbTol = 1e-10;

IntegrationPlan cdf_plan(const IntegrationPlan& plan) {
    IntegrationPlan p = plan;
    p.method = QuadMethod::Auto;
    p.rel_tol = std::min(plan.rel_tol, 1e-10);
    p.abs_tol = 1e-14;
    return p;
}

}  // namespace

void validate_quantiles(const Vector& q) {
    for (Eigen::Index k = 0; k < q.size(); ++k)
        if (!(q(k) > 0.0 && q(k) < 1.0))
            throw ValidationError("quantile levels must lie in the open interval (0, 1)");
}

double marginal_cdf(const GseDistribution& dist, std::size_t k, double v, const IntegrationPlan& plan) {
    const std::size_t n = dist.dim();
    if (k >= n) throw ValidationError("marginal index out of range");
    if (std::isnan(v)) throw ValidationError("marginal threshold is NaN");
    if (v == -std::numeric_limits<double>::infinity()) return 0.0;
    if (v == std::numeric_limits<double>::infinity()) return 1.0;

    // Y_k − μ_k = rᵀZ. Rotate Z so the first axis is r/|r| and the second carries
    // the part of γ orthogonal to it; the remaining n−2 axes integrate out.
    const Vector r = dist.root().row(static_cast<Eigen::Index>(k)).transpose();
    const double sigma = r.norm();
    const Vector e1 = r / sigma;
    const Vector& gamma = dist.skew().gamma();
    const double g_par = gamma.dot(e1);
    const double g_perp = (gamma - g_par * e1).norm();
    const double z0 = (v - dist.mu()(static_cast<Eigen::Index>(k))) / sigma;
    const GeneratorFamily& fam = dist.family();
    const SkewFunction& skew = dist.skew();
    const double c2 = 2.0 * norm_const(fam, n, Level::Base);
    const double inf = std::numeric_limits<double>::infinity();
    const bool planar = n >= 2 && g_perp > 1e-14 * (1.0 + gamma.norm());
    const auto& kt = kernels::active();

    std::vector<double> proj;
    if (!planar) {
        const std::size_t rest = n - 1;
        auto h = [&](const NodeBlock& blk, double* out) {
            proj.resize(blk.count);
            for (std::size_t i = 0; i < blk.count; ++i) {
                const double u = blk.coords[i];
                out[i] = c2 * tail_mass(fam, n, Level::Base, rest, 0.5 * u * u);
                proj[i] = g_par * u;
            }
            skew.j_batch(0, proj.data(), blk.count);
            kt.mul_inplace(out, proj.data(), blk.count);
        };
        Vector lo(1), up(1);
        lo << -inf;
        up << z0;
        return std::clamp(integrate(Rectangle(lo, up), 1, h, cdf_plan(plan), node_placement(fam, Level::Base)).values[0], 0.0, 1.0);
    }
    const std::size_t rest = n - 2;
    const double dir[2] = {g_par, g_perp};
    auto h = [&](const NodeBlock& blk, double* out) {
        proj.resize(blk.count);
        kt.half_sq_norm(blk.coords, blk.dim, blk.count, blk.stride, 0.0, out);
        for (std::size_t i = 0; i < blk.count; ++i) out[i] = c2 * tail_mass(fam, n, Level::Base, rest, out[i]);
        kt.project(blk.coords, blk.dim, blk.count, blk.stride, dir, 0.0, proj.data());
        skew.j_batch(0, proj.data(), blk.count);
        kt.mul_inplace(out, proj.data(), blk.count);
    };
    Vector lo(2), up(2);
    lo << -inf, -inf;
    up << z0, inf;
    return std::clamp(integrate(Rectangle(lo, up), 1, h, cdf_plan(plan), node_placement(fam, Level::Base)).values[0], 0.0, 1.0);
}

double marginal_var(const GseDistribution& dist, std::size_t k, double q, const IntegrationPlan& plan) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantile level must lie in the open interval (0, 1)");
    if (k >= dist.dim()) throw ValidationError("marginal index out of range");
    const auto kk = static_cast<Eigen::Index>(k);
    const double mu = dist.mu()(kk);
    const double sd = std::sqrt(dist.sigma().matrix()(kk, kk));
    auto f = [&](double v) { return marginal_cdf(dist, k, v, plan) - q; };

    double lo = mu - 10.0 * sd, hi = mu + 10.0 * sd;
    double flo = f(lo), fhi = f(hi);
    int iter = 0;
    while (flo > 0.0 && iter < kMaxIter) {
        const double w = hi - lo;
        hi = lo;
        fhi = flo;
        lo -= 2.0 * w;
        flo = f(lo);
        ++iter;
    }
    while (fhi < 0.0 && iter < kMaxIter) {
        const double w = hi - lo;
        lo = hi;
        flo = fhi;
        hi += 2.0 * w;
        fhi = f(hi);
        ++iter;
    }
    if (flo > 0.0 || fhi < 0.0) throw BracketFailure("could not bracket the quantile");
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;

    while (iter < kMaxIter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        ++iter;
        if (std::abs(fm) <= kProbTol) return mid;
        if (fm < 0.0) { lo = mid; flo = fm; } else { hi = mid; fhi = fm; }
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid))) break;
    }
    if (iter >= kMaxIter) throw BracketFailure("quantile search did not converge in 200 iterations");
    const double x = lo - flo * (hi - lo) / (fhi - flo);
    if (x > lo && x < hi) {
        const double fx = f(x);
        if (std::abs(fx) <= std::min(std::abs(flo), std::abs(fhi))) return x;
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

Vector var_vector(const GseDistribution& dist, const Vector& q, const IntegrationPlan& plan) {
    if (static_cast<std::size_t>(q.size()) != dist.dim()) throw ValidationError("quantile vector length does not match dimension");
    validate_quantiles(q);
    Vector v(q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) v(k) = marginal_var(dist, static_cast<std::size_t>(k), q(k), plan);
    return v;
}

TailReport tail_report_at(const GseDistribution& dist, const Vector& var, const IntegrationPlan& plan,
                          bool with_cov) {
    const std::size_t n = dist.dim();
    if (static_cast<std::size_t>(var.size()) != n) throw ValidationError("threshold vector length does not match dimension");
    if (!var.allFinite()) throw ValidationError("thresholds must be finite");
    TailReport t;
    t.var = var;
    const Vector xi = standardize_vector(dist, var);
    t.std_rect = Rectangle(xi, Vector::Constant(static_cast<Eigen::Index>(n), std::numeric_limits<double>::infinity()));
    const auto sm = standardized_moments(dist.family(), dist.skew(), t.std_rect, plan, with_cov);
    if (!(sm.prob >= 1e-12)) throw DegenerateRegion("tail probability below 1e-12; tail measures are not resolvable");
    const auto rep = assemble_report(dist, t.std_rect, sm);
    t.prob = sm.prob;
    t.delta = sm.delta;
    t.mtce = rep.mean;
    if (with_cov) {
        t.omega = sm.omega;
        t.mtcov = rep.mdtcov;
    }
    t.diag = sm.diag;
    return t;
}

TailReport tail_report(const GseDistribution& dist, const Vector& q, const IntegrationPlan& plan,
                       bool with_cov) {
    const Vector var = var_vector(dist, q, plan);
    TailReport t = tail_report_at(dist, var, plan, with_cov);
    t.q = q;
    return t;
}

Vector mtce(const GseDistribution& dist, const Vector& q, const IntegrationPlan& plan) {
    return tail_report(dist, q, plan, false).mtce;
}

Matrix mtcov(const GseDistribution& dist, const Vector& q, const IntegrationPlan& plan) {
    return tail_report(dist, q, plan, true).mtcov;
}

}  // namespace gse
