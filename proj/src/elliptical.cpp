#include "gse/errors.hpp"
#include "gse/moments.hpp"

#include <cmath>

namespace gse {

namespace {

// c_n ∫_{rect minus pinned axes} G(½|w|² + ½Σv²) dw, or 0 when a pin is infinite.
double pinned_mass(const GeneratorFamily& fam, std::size_t n, Level level, const Rectangle& xi,
                   const std::vector<Pin>& pins, const IntegrationPlan& plan,
                   MomentDiagnostics& diag) {
    double t0 = 0.0;
    std::vector<std::size_t> axes;
    for (const Pin& p : pins) {
        if (std::isinf(p.value)) return 0.0;
        t0 += 0.5 * p.value * p.value;
        axes.push_back(p.index);
    }
    const double cn = norm_const(fam, n, Level::Base);
    auto h = [&](const NodeBlock& blk, double* out) {
        for (std::size_t i = 0; i < blk.count; ++i) {
            double s = t0;
            for (std::size_t d = 0; d < blk.dim; ++d) {
                const double x = blk.coords[d * blk.stride + i];
                s += 0.5 * x * x;
            }
            out[i] = cn * generator(fam, n, level, s);
        }
    };
    const auto est = integrate(xi.drop(axes), 1, h, plan, node_placement(fam, level));
    diag.add(est);
    return est.values[0];
}

}  // namespace

StandardizedMoments elliptical_moments(const GeneratorFamily& fam, std::size_t n,
                                       const Rectangle& xi, const IntegrationPlan& plan,
                                       bool with_omega) {
    if (xi.dim() != n || n == 0 || n > 5) throw ValidationError("elliptical moments: bad dimension");
    check_family(fam, n, with_omega ? Level::DoubleCumulative : Level::Cumulative);
    StandardizedMoments sm;
    const Vector& a = xi.lower();
    const Vector& b = xi.upper();
    auto lo = [&](std::size_t k) { return a(static_cast<Eigen::Index>(k)); };
    auto hi = [&](std::size_t k) { return b(static_cast<Eigen::Index>(k)); };

    sm.prob = pinned_mass(fam, n, Level::Base, xi, {}, plan, sm.diag);
    sm.delta.resize(static_cast<Eigen::Index>(n));
    std::vector<double> ma(n), mb(n);
    for (std::size_t k = 0; k < n; ++k) {
        ma[k] = pinned_mass(fam, n, Level::Cumulative, xi, {{k, lo(k)}}, plan, sm.diag);
        mb[k] = pinned_mass(fam, n, Level::Cumulative, xi, {{k, hi(k)}}, plan, sm.diag);
        sm.delta(static_cast<Eigen::Index>(k)) = ma[k] - mb[k];
    }
    if (!with_omega) return sm;

    const double full_star = pinned_mass(fam, n, Level::Cumulative, xi, {}, plan, sm.diag);
    sm.omega.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Level L = Level::DoubleCumulative;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double ta = std::isinf(lo(i)) ? 0.0 : lo(i) * ma[i];
        const double tb = std::isinf(hi(i)) ? 0.0 : hi(i) * mb[i];
        sm.omega(ii, ii) = ta - tb + full_star;
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double v = pinned_mass(fam, n, L, xi, {{i, lo(i)}, {j, lo(j)}}, plan, sm.diag) -
                             pinned_mass(fam, n, L, xi, {{i, lo(i)}, {j, hi(j)}}, plan, sm.diag) -
                             pinned_mass(fam, n, L, xi, {{i, hi(i)}, {j, lo(j)}}, plan, sm.diag) +
                             pinned_mass(fam, n, L, xi, {{i, hi(i)}, {j, hi(j)}}, plan, sm.diag);
            sm.omega(ii, jj) = v;
            sm.omega(jj, ii) = v;
        }
    }
    sm.has_omega = true;
    return sm;
}

}  // namespace gse
