#include "gse/moments.hpp"

#include "gse/errors.hpp"
#include "gse/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace gse {

namespace {

constexpr double kMinProb = 1e-12;

enum class Side { Lower, Upper };

struct PinSpec {
    std::size_t index;
    Side side;
};

class TermCache {
public:
    TermCache(const GeneratorFamily& fam, const SkewFunction& skew, const Rectangle& xi,
              const IntegrationPlan& plan, MomentDiagnostics& diag)
        : fam_(fam), skew_(skew), xi_(xi), plan_(plan), diag_(diag), n_(xi.dim()) {}

    double bound(PinSpec p) const {
        const auto k = static_cast<Eigen::Index>(p.index);
        return p.side == Side::Lower ? xi_.lower()(k) : xi_.upper()(k);
    }

    // Terms enter δ and Ω unnormalized, so each needs absolute accuracy relative to F only.
    void set_prob(double f) {
        for (Eigen::Index k = 0; k < xi_.lower().size(); ++k)
            for (double v : {xi_.lower()(k), xi_.upper()(k)})
                if (std::isfinite(v)) bmax_ = std::max(bmax_, std::abs(v));
        if (skew_.kind() != SkewKind::ConstantHalf) gmax_ = std::max(1.0, skew_.gamma().cwiseAbs().maxCoeff());
        floor_ = 0.5 * plan_.rel_tol * std::abs(f);
    }

    // (c_n / c_{level, pins}) · Ē[J^{(p)}(γᵀ z)] with z pinned at the listed bounds.
    double pinned(Level level, std::vector<PinSpec> pins, int p) {
        if (p > 0 && skew_.kind() == SkewKind::ConstantHalf) return 0.0;
        std::sort(pins.begin(), pins.end(), [](PinSpec a, PinSpec b) { return a.index < b.index; });
        std::ostringstream key;
        key << static_cast<int>(level) << ':' << p;
        for (const auto& q : pins) key << '|' << q.index << (q.side == Side::Lower ? 'a' : 'b');
        auto it = memo_.find(key.str());
        if (it != memo_.end()) return it->second;
        const double v = compute(level, pins, p);
        memo_.emplace(key.str(), v);
        return v;
    }

private:
    double compute(Level level, const std::vector<PinSpec>& spec, int p) {
        std::vector<Pin> pins;
        std::vector<double> shifts;
        std::vector<std::size_t> axes;
        for (const auto& q : spec) {
            const double v = bound(q);
            if (std::isinf(v)) return 0.0;
            pins.push_back({q.index, v});
            shifts.push_back(v);
            axes.push_back(q.index);
        }
        const double ratio = shifted_ratio(fam_, n_, level, shifts);
        if (ratio == 0.0) return 0.0;
        const auto free = free_indices(n_, pins);
        std::vector<double> dir;
        for (std::size_t k : free) dir.push_back(skew_.gamma()(static_cast<Eigen::Index>(k)));
        double offset = 0.0;
        for (const Pin& q : pins) offset += skew_.gamma()(static_cast<Eigen::Index>(q.index)) * q.value;
        const auto& kt = kernels::active();
        auto h = [&](const NodeBlock& blk, double* out) {
            kt.project(blk.coords, blk.dim, blk.count, blk.stride, dir.data(), offset, out);
            skew_.j_batch(p, out, blk.count);
        };
        AuxLaw law{fam_, n_, level, shifts};
        IntegrationPlan plan = plan_;
        const double mult = std::pow(gmax_, p) * (p == 0 && !pins.empty() ? 1.0 + bmax_ : 1.0);
        plan.abs_tol = std::max(plan.abs_tol, floor_ / (ratio * mult));
        const auto est = trunc_expect(law, 1, h, xi_.drop(axes), plan);
        diag_.add(est);
        return ratio * est.values[0];
    }

    const GeneratorFamily& fam_;
    const SkewFunction& skew_;
    const Rectangle& xi_;
    const IntegrationPlan& plan_;
    MomentDiagnostics& diag_;
    std::size_t n_;
    double floor_ = 0.0, bmax_ = 0.0, gmax_ = 1.0;
    std::map<std::string, double> memo_;
};

double gamma_at(const SkewFunction& skew, std::size_t k) {
    return skew.gamma()(static_cast<Eigen::Index>(k));
}

// ξ · term with the convention that an infinite ξ kills the term.
double scaled(double xi, double term) { return std::isinf(xi) || term == 0.0 ? 0.0 : xi * term; }

double delta_entry(TermCache& tc, const SkewFunction& skew, std::size_t k) {
    const double a = tc.pinned(Level::Cumulative, {{k, Side::Lower}}, 0);
    const double b = tc.pinned(Level::Cumulative, {{k, Side::Upper}}, 0);
    const double d = tc.pinned(Level::Cumulative, {}, 1);
    return 2.0 * (a - b + gamma_at(skew, k) * d);
}

double omega_offdiag(TermCache& tc, const SkewFunction& skew, std::size_t i, std::size_t j) {
    const Level L = Level::DoubleCumulative;
    const double aa = tc.pinned(L, {{i, Side::Lower}, {j, Side::Lower}}, 0);
    const double ab = tc.pinned(L, {{i, Side::Lower}, {j, Side::Upper}}, 0);
    const double bb = tc.pinned(L, {{i, Side::Upper}, {j, Side::Upper}}, 0);
    const double ba = tc.pinned(L, {{i, Side::Upper}, {j, Side::Lower}}, 0);
    const double gi = gamma_at(skew, i);
    const double gj = gamma_at(skew, j);
    const double dj_ai = gj * tc.pinned(L, {{i, Side::Lower}}, 1);
    const double dj_bi = gj * tc.pinned(L, {{i, Side::Upper}}, 1);
    const double di_aj = gi * tc.pinned(L, {{j, Side::Lower}}, 1);
    const double di_bj = gi * tc.pinned(L, {{j, Side::Upper}}, 1);
    const double dij = gi * gj * tc.pinned(L, {}, 2);
    return 2.0 * (aa - ab + bb - ba + dj_ai - dj_bi + di_aj - di_bj + dij);
}

double omega_diag(TermCache& tc, const SkewFunction& skew, std::size_t i, double f_star) {
    const double ai = tc.bound({i, Side::Lower});
    const double bi = tc.bound({i, Side::Upper});
    const double ha = tc.pinned(Level::Cumulative, {{i, Side::Lower}}, 0);
    const double hb = tc.pinned(Level::Cumulative, {{i, Side::Upper}}, 0);
    const double gi = gamma_at(skew, i);
    const double da = gi * tc.pinned(Level::DoubleCumulative, {{i, Side::Lower}}, 1);
    const double db = gi * tc.pinned(Level::DoubleCumulative, {{i, Side::Upper}}, 1);
    const double dii = gi * gi * tc.pinned(Level::DoubleCumulative, {}, 2);
    return 2.0 * (scaled(ai, ha) - scaled(bi, hb) + da - db + dii) + f_star;
}

double f_star_term(const GeneratorFamily& fam, const SkewFunction& skew, const Rectangle& xi,
                   const IntegrationPlan& plan, MomentDiagnostics& diag) {
    const std::size_t n = xi.dim();
    const double ratio = shifted_ratio(fam, n, Level::Cumulative, {});
    const auto est = rect_prob_gse(fam, skew, xi, plan, Level::Cumulative);
    diag.add(est);
    return ratio * est.values[0];
}

void check_inputs(const SkewFunction& skew, const Rectangle& xi) {
    if (skew.dim() != xi.dim()) throw ValidationError("skew dimension does not match rectangle");
    if (xi.dim() == 0 || xi.dim() > 5) throw ValidationError("moments support dimensions 1 to 5");
}

}  // namespace

void MomentDiagnostics::add(const IntegralEstimate& est) {
    ++integrals;
    nodes += est.nodes;
    max_error = std::max(max_error, est.error);
    const std::string m = est.nodes <= 1 ? "point" : to_string(est.method);
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
}

void MomentDiagnostics::merge(const MomentDiagnostics& other) {
    integrals += other.integrals;
    nodes += other.nodes;
    max_error = std::max(max_error, other.max_error);
    for (const auto& m : other.methods)
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

Vector standardize_vector(const GseDistribution& dist, const Vector& v) {
    const std::size_t n = dist.dim();
    if (static_cast<std::size_t>(v.size()) != n) throw ValidationError("bound vector length does not match dimension");
    const Matrix& ri = dist.inv_root();
    Vector out(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
        if (std::isinf(v(k))) {
            out(k) = v(k);
            continue;
        }
        const double scale = ri.row(k).cwiseAbs().maxCoeff();
        double s = 0.0;
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
            const double c = ri(k, j);
            if (std::abs(c) <= 1e-14 * scale) continue;
            if (std::isinf(v(j)))
                throw ValidationError("standardized bound " + std::to_string(k + 1) +
                                      " depends on an infinite bound");
            s += c * (v(j) - dist.mu()(j));
        }
        out(k) = s;
    }
    return out;
}

Rectangle standardize_bounds(const GseDistribution& dist, const Rectangle& rect) {
    if (rect.dim() != dist.dim()) throw ValidationError("rectangle dimension does not match distribution");
    Vector lo = standardize_vector(dist, rect.lower());
    Vector up = standardize_vector(dist, rect.upper());
    for (Eigen::Index k = 0; k < lo.size(); ++k)
        if (!(lo(k) < up(k)))
            throw ValidationError("standardized bounds are not ordered on axis " + std::to_string(k + 1));
    return Rectangle(lo, up);
}

StandardizedMoments standardized_moments(const GeneratorFamily& fam, const SkewFunction& skew,
                                         const Rectangle& xi, const IntegrationPlan& plan,
                                         bool with_omega) {
    check_inputs(skew, xi);
    const std::size_t n = xi.dim();
    check_family(fam, n, Level::Cumulative);
    if (with_omega) check_family(fam, n, Level::DoubleCumulative);
    StandardizedMoments sm;
    TermCache tc(fam, skew, xi, plan, sm.diag);

    const auto fz = rect_prob_gse(fam, skew, xi, plan, Level::Base);
    sm.diag.add(fz);
    sm.prob = fz.values[0];
    tc.set_prob(sm.prob);

    sm.delta.resize(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) sm.delta(static_cast<Eigen::Index>(k)) = delta_entry(tc, skew, k);

    if (with_omega) {
        const double fs = f_star_term(fam, skew, xi, plan, sm.diag);
        sm.omega.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            sm.omega(ii, ii) = omega_diag(tc, skew, i, fs);
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                sm.omega(ii, jj) = omega_offdiag(tc, skew, i, j);
                sm.omega(jj, ii) = sm.omega(ii, jj);
            }
        }
        sm.has_omega = true;
    }
    return sm;
}

double omega_entry(const GeneratorFamily& fam, const SkewFunction& skew, const Rectangle& xi,
                   std::size_t i, std::size_t j, const IntegrationPlan& plan) {
    check_inputs(skew, xi);
    const std::size_t n = xi.dim();
    if (i >= n || j >= n) throw ValidationError("omega index out of range");
    check_family(fam, n, Level::DoubleCumulative);
    MomentDiagnostics diag;
    TermCache tc(fam, skew, xi, plan, diag);
    tc.set_prob(rect_prob_gse(fam, skew, xi, plan, Level::Base).values[0]);
    if (i != j) return omega_offdiag(tc, skew, i, j);
    return omega_diag(tc, skew, i, f_star_term(fam, skew, xi, plan, diag));
}

MomentReport assemble_report(const GseDistribution& dist, const Rectangle& xi,
                             const StandardizedMoments& sm) {
    if (!(sm.prob >= kMinProb))
        throw DegenerateRegion("rectangle probability below 1e-12; moments are not resolvable");
    MomentReport r;
    r.std_rect = xi;
    r.prob = sm.prob;
    r.delta = sm.delta;
    r.diag = sm.diag;
    const Matrix& R = dist.root();
    const Vector& mu = dist.mu();
    const double F = sm.prob;
    const Vector rd = R * sm.delta;
    r.mean = mu + rd / F;
    if (sm.has_omega) {
        r.omega = sm.omega;
        const Matrix rom = R * sm.omega * R.transpose();
        Matrix second = mu * mu.transpose() + (rd * mu.transpose() + mu * rd.transpose() + rom) / F;
        r.second_moment = 0.5 * (second + second.transpose());
        Matrix inner = sm.omega / F - sm.delta * sm.delta.transpose() / (F * F);
        Matrix cov = R * inner * R.transpose();
        r.mdtcov = 0.5 * (cov + cov.transpose());
    }
    return r;
}

MomentReport moment_report(const GseDistribution& dist, const Rectangle& rect,
                           const IntegrationPlan& plan) {
    const Rectangle xi = standardize_bounds(dist, rect);
    const auto sm = standardized_moments(dist.family(), dist.skew(), xi, plan, true);
    return assemble_report(dist, xi, sm);
}

Vector delta_vector(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan) {
    const Rectangle xi = standardize_bounds(dist, rect);
    return standardized_moments(dist.family(), dist.skew(), xi, plan, false).delta;
}

Matrix omega_matrix(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan) {
    const Rectangle xi = standardize_bounds(dist, rect);
    return standardized_moments(dist.family(), dist.skew(), xi, plan, true).omega;
}

Vector truncated_mean(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan) {
    const Rectangle xi = standardize_bounds(dist, rect);
    const auto sm = standardized_moments(dist.family(), dist.skew(), xi, plan, false);
    return assemble_report(dist, xi, sm).mean;
}

Matrix truncated_second_moment(const GseDistribution& dist, const Rectangle& rect,
                               const IntegrationPlan& plan) {
    return moment_report(dist, rect, plan).second_moment;
}

Vector mdte(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan) {
    return truncated_mean(dist, rect, plan);
}

Matrix mdtcov(const GseDistribution& dist, const Rectangle& rect, const IntegrationPlan& plan) {
    return moment_report(dist, rect, plan).mdtcov;
}

}  // namespace gse
