#include "gse/quad.hpp"

#include "gse/errors.hpp"
#include "gse/kernels.hpp"
#include "gse/rng.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/random/sobol.hpp>
#include <boost/random/uniform_01.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

namespace gse {

namespace {

constexpr std::size_t kMaxDim = 5;
constexpr std::size_t kBlock = 1024;
constexpr std::size_t kReplicates = 8;
constexpr double kQmcErrorFactor = 3.0;

// Lower-tail cdf of the unit axis law, accurate for x <= 0.
double axis_cdf(AxisShape shape, double x) {
    switch (shape) {
        case AxisShape::Normal: return 0.5 * std::erfc(-x / std::numbers::sqrt2);
        case AxisShape::Logistic: {
            const double e = std::exp(x);
            return e / (1.0 + e);
        }
        case AxisShape::Cauchy: return x < 0.0 ? std::atan(-1.0 / x) / std::numbers::pi : 0.5;
        case AxisShape::StudentT2: break;
    }
    return 0.5 * (1.0 + x / std::sqrt(2.0 + x * x));
}

// Each axis is mapped through the cdf of the axis law restricted to [lo, hi], so
// x = Q(p) with p = F(lo) + u (F(hi) - F(lo)) and q = 1 - p kept separately.
struct AxisMap {
    AxisLaw law;
    bool flip;     // axis negated so that lo <= 0
    double p0;     // F(lo)
    double q0;     // 1 - F(hi)
    double mass;   // F(hi) - F(lo)

    // v in (-1, 1) -> x and |dx/dv|; weight 0 at an infinite endpoint.
    void map(double v, double& x, double& jac) const {
        const double u = 0.5 * (v + 1.0);
        const double p = p0 + u * mass;
        const double q = q0 + (1.0 - u) * mass;
        if (!(p > 0.0) || !(q > 0.0)) { x = 0.0; jac = 0.0; return; }
        double y = 0.0, dy = 0.0;
        switch (law.shape) {
            case AxisShape::StudentT2: {
                y = (p - q) / std::sqrt(2.0 * p * q);
                const double r = 2.0 + y * y;
                dy = r * std::sqrt(r);
                break;
            }
            case AxisShape::Cauchy:
                y = p <= q ? -1.0 / std::tan(std::numbers::pi * p) : 1.0 / std::tan(std::numbers::pi * q);
                dy = std::numbers::pi * (1.0 + y * y);
                break;
            case AxisShape::Logistic:
                y = std::log(p / q);
                dy = 1.0 / (p * q);
                break;
            case AxisShape::Normal: {
                y = p <= q ? -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p)
                           : std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
                const double dens = std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi);
                dy = dens > 0.0 ? 1.0 / dens : 0.0;
                break;
            }
        }
        x = flip ? -law.scale * y : law.scale * y;
        jac = 0.5 * mass * law.scale * dy;
    }
};

std::vector<AxisMap> axis_maps(const Rectangle& rect, const AxisLaw& law) {
    std::vector<AxisMap> maps;
    for (std::size_t d = 0; d < rect.dim(); ++d) {
        double lo = rect.lower()(static_cast<Eigen::Index>(d));
        double hi = rect.upper()(static_cast<Eigen::Index>(d));
        const bool flip = lo > 0.0;
        if (flip) {
            const double t = -lo;
            lo = -hi;
            hi = t;
        }
        lo /= law.scale;
        hi /= law.scale;
        const AxisShape shape = law.shape;
        const double p0 = std::isinf(lo) ? 0.0 : axis_cdf(shape, lo);
        double q0 = 0.0, mass = 0.0;
        if (hi <= 0.0) {
            const double fh = axis_cdf(shape, hi);
            q0 = 1.0 - fh;
            mass = fh - p0;
        } else {
            q0 = std::isinf(hi) ? 0.0 : axis_cdf(shape, -hi);
            mass = 1.0 - p0 - q0;
        }
        maps.push_back({law, flip, p0, q0, std::max(0.0, mass)});
    }
    return maps;
}

bool converged(const std::vector<double>& v, const std::vector<double>& err, const IntegrationPlan& plan,
               const std::vector<double>& floor = {}) {
    for (std::size_t o = 0; o < v.size(); ++o) {
        if (!std::isfinite(v[o]) || !std::isfinite(err[o])) return false;
        double tol = std::max(plan.rel_tol * std::abs(v[o]), plan.abs_tol);
        if (o < floor.size()) tol = std::max(tol, floor[o]);
        if (err[o] > tol) return false;
    }
    return true;
}

double max_of(const std::vector<double>& e) {
    double m = 0.0;
    for (double x : e) m = std::max(m, x);
    return m;
}

std::size_t ipow(std::size_t b, std::size_t e) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= b;
    return r;
}

// Applies per-node weights and adds the block's contribution to sums.
void reduce_block(const kernels::KernelTable& kt, std::size_t outputs, std::size_t count,
                  const std::vector<double>& out, const std::vector<double>& w, double* sums) {
    for (std::size_t o = 0; o < outputs; ++o) sums[o] += kt.dot(out.data() + o * count, w.data(), count);
}

std::vector<double> tensor_pass(const std::vector<AxisMap>& maps, std::size_t outputs,
                                const BatchIntegrand& h, std::size_t order) {
    const auto& kt = kernels::active();
    const std::size_t d = maps.size();
    const GaussRule& rule = gauss_legendre(order);
    std::vector<std::vector<double>> xs(d, std::vector<double>(order));
    std::vector<std::vector<double>> ws(d, std::vector<double>(order));
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t j = 0; j < order; ++j) {
            double x = 0.0, jac = 0.0;
            maps[k].map(rule.nodes[j], x, jac);
            xs[k][j] = x;
            ws[k][j] = rule.weights[j] * jac;
        }
    const std::size_t total = ipow(order, d);
    std::vector<double> coords(d * kBlock), w(kBlock), out(outputs * kBlock);
    std::vector<double> sums(outputs, 0.0);
    for (std::size_t start = 0; start < total; start += kBlock) {
        const std::size_t count = std::min(kBlock, total - start);
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t idx = start + i;
            double wt = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                const std::size_t digit = idx % order;
                idx /= order;
                coords[k * count + i] = xs[k][digit];
                wt *= ws[k][digit];
            }
            w[i] = wt;
        }
        NodeBlock blk{d, count, count, coords.data()};
        h(blk, out.data());
        reduce_block(kt, outputs, count, out, w, sums.data());
    }
    return sums;
}

IntegralEstimate integrate_tensor(const std::vector<AxisMap>& maps, std::size_t outputs,
                                  const BatchIntegrand& h, const IntegrationPlan& plan,
                                  const std::vector<double>& floor = {}) {
    const std::size_t d = maps.size();
    std::size_t order = 64;
    std::vector<double> coarse = tensor_pass(maps, outputs, h, order / 2);
    std::size_t nodes = ipow(order / 2, d);
    std::vector<double> fine, err(outputs);
    for (;;) {
        fine = tensor_pass(maps, outputs, h, order);
        nodes += ipow(order, d);
        for (std::size_t o = 0; o < outputs; ++o) err[o] = std::abs(fine[o] - coarse[o]);
        if (converged(fine, err, plan, floor)) break;
        const std::size_t next = order * 2;
        if (ipow(next, d) > plan.node_budget)
            throw BudgetExceeded("tensor quadrature did not reach tolerance within the node budget",
                                 fine, max_of(err));
        coarse = std::move(fine);
        order = next;
    }
    IntegralEstimate est;
    est.values = std::move(fine);
    est.error = max_of(err);
    est.nodes = nodes;
    est.method = QuadMethod::Tensor;
    return est;
}

IntegralEstimate integrate_qmc(const std::vector<AxisMap>& maps, std::size_t outputs,
                               const BatchIntegrand& h, const IntegrationPlan& plan) {
    const auto& kt = kernels::active();
    const std::size_t d = maps.size();
    std::mt19937_64 rng(derive_seed(plan.seed, 0x51AB0000ULL + d));
    boost::random::uniform_01<double> unif;
    std::vector<std::vector<double>> shift(kReplicates, std::vector<double>(d));
    for (auto& s : shift)
        for (auto& x : s) x = unif(rng);

    boost::random::sobol engine(d);
    constexpr double kTwo64 = 0x1p-64;
    constexpr double kEdge = 0x1p-53;

    std::vector<std::vector<double>> sums(kReplicates, std::vector<double>(outputs, 0.0));
    std::vector<double> unit(d * kBlock), coords(d * kBlock), w(kBlock), out(outputs * kBlock);
    std::size_t generated = 0;
    std::size_t per_rep = std::size_t{1} << 13;
    std::vector<double> mean(outputs), err(outputs);

    for (;;) {
        while (generated < per_rep) {
            const std::size_t count = std::min(kBlock, per_rep - generated);
            for (std::size_t i = 0; i < count; ++i)
                for (std::size_t k = 0; k < d; ++k)
                    unit[k * count + i] = static_cast<double>(engine()) * kTwo64;
            for (std::size_t r = 0; r < kReplicates; ++r) {
                for (std::size_t i = 0; i < count; ++i) {
                    double wt = 1.0;
                    for (std::size_t k = 0; k < d; ++k) {
                        double u = unit[k * count + i] + shift[r][k];
                        if (u >= 1.0) u -= 1.0;
                        u = std::clamp(1.0 - std::abs(2.0 * u - 1.0), kEdge, 1.0 - kEdge);
                        double x = 0.0, jac = 0.0;
                        maps[k].map(2.0 * u - 1.0, x, jac);
                        coords[k * count + i] = x;
                        wt *= 2.0 * jac;
                    }
                    w[i] = wt;
                }
                NodeBlock blk{d, count, count, coords.data()};
                h(blk, out.data());
                reduce_block(kt, outputs, count, out, w, sums[r].data());
            }
            generated += count;
        }
        const double n = static_cast<double>(per_rep);
        for (std::size_t o = 0; o < outputs; ++o) {
            double m = 0.0;
            for (std::size_t r = 0; r < kReplicates; ++r) m += sums[r][o] / n;
            m /= static_cast<double>(kReplicates);
            double ss = 0.0;
            for (std::size_t r = 0; r < kReplicates; ++r) {
                const double dv = sums[r][o] / n - m;
                ss += dv * dv;
            }
            const double se = std::sqrt(ss / static_cast<double>(kReplicates - 1) / static_cast<double>(kReplicates));
            mean[o] = m;
            err[o] = kQmcErrorFactor * se;
        }
        if (converged(mean, err, plan)) break;
        if (2 * per_rep * kReplicates > plan.node_budget)
            throw BudgetExceeded("low-discrepancy integration did not reach tolerance within the node budget",
                                 mean, max_of(err));
        per_rep *= 2;
    }
    IntegralEstimate est;
    est.values = mean;
    est.error = max_of(err);
    est.nodes = per_rep * kReplicates;
    est.method = QuadMethod::LowDiscrepancy;
    return est;
}

IntegralEstimate integrate_split(const Rectangle& rect, std::size_t outputs, const BatchIntegrand& h,
                                 const IntegrationPlan& plan, const AxisLaw& law) {
    const std::size_t d = rect.dim();
    std::vector<std::size_t> cut;
    for (std::size_t k = 0; k < d; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        if (rect.lower()(i) < 0.0 && rect.upper()(i) > 0.0) cut.push_back(k);
    }
    if (cut.empty()) return integrate_tensor(axis_maps(rect, law), outputs, h, plan);
    const std::size_t pieces = std::size_t{1} << cut.size();
    std::vector<std::vector<AxisMap>> maps;
    for (std::size_t mask = 0; mask < pieces; ++mask) {
        Vector lo = rect.lower(), up = rect.upper();
        for (std::size_t c = 0; c < cut.size(); ++c) {
            const auto i = static_cast<Eigen::Index>(cut[c]);
            if (mask >> c & 1) lo(i) = 0.0;
            else up(i) = 0.0;
        }
        maps.push_back(axis_maps(Rectangle(lo, up), law));
    }
    // Pieces share the tolerance of the whole, scaled by a coarse pass.
    std::vector<double> floor(outputs, 0.0);
    IntegralEstimate total;
    for (const auto& m : maps) {
        const auto coarse = tensor_pass(m, outputs, h, 32);
        for (std::size_t o = 0; o < outputs; ++o) floor[o] += std::abs(coarse[o]);
        total.nodes += ipow(32, d);
    }
    for (double& f : floor) f *= plan.rel_tol / static_cast<double>(pieces);
    total.values.assign(outputs, 0.0);
    total.method = QuadMethod::Tensor;
    for (const auto& m : maps) {
        const auto part = integrate_tensor(m, outputs, h, plan, floor);
        for (std::size_t o = 0; o < outputs; ++o) total.values[o] += part.values[o];
        total.error += part.error;
        total.nodes += part.nodes;
    }
    return total;
}

}  // namespace

Rectangle::Rectangle(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw ValidationError("rectangle bounds differ in length");
    for (Eigen::Index k = 0; k < lower_.size(); ++k) {
        if (std::isnan(lower_(k)) || std::isnan(upper_(k))) throw ValidationError("rectangle bound is NaN");
        if (lower_(k) == std::numeric_limits<double>::infinity() ||
            upper_(k) == -std::numeric_limits<double>::infinity())
            throw ValidationError("rectangle bound infinite on the wrong side");
        if (!(lower_(k) < upper_(k))) throw ValidationError("rectangle requires lower < upper componentwise");
    }
}

Rectangle Rectangle::whole(std::size_t n) {
    const auto m = static_cast<Eigen::Index>(n);
    const double inf = std::numeric_limits<double>::infinity();
    return Rectangle(Vector::Constant(m, -inf), Vector::Constant(m, inf));
}

Rectangle Rectangle::drop(std::span<const std::size_t> axes) const {
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < dim(); ++k)
        if (std::find(axes.begin(), axes.end(), k) == axes.end()) keep.push_back(k);
    Vector lo(static_cast<Eigen::Index>(keep.size())), up(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        lo(static_cast<Eigen::Index>(i)) = lower_(static_cast<Eigen::Index>(keep[i]));
        up(static_cast<Eigen::Index>(i)) = upper_(static_cast<Eigen::Index>(keep[i]));
    }
    return Rectangle(lo, up);
}

const char* to_string(QuadMethod m) {
    switch (m) {
        case QuadMethod::Auto: return "auto";
        case QuadMethod::Tensor: return "tensor";
        case QuadMethod::LowDiscrepancy: return "low_discrepancy";
    }
    return "auto";
}

QuadMethod quad_method_from_string(const std::string& s) {
    if (s == "auto") return QuadMethod::Auto;
    if (s == "tensor") return QuadMethod::Tensor;
    if (s == "low_discrepancy" || s == "qmc") return QuadMethod::LowDiscrepancy;
    throw ValidationError("unknown integration method: " + s);
}

void validate_plan(const IntegrationPlan& plan) {
    if (!(plan.rel_tol > 0.0) || !std::isfinite(plan.rel_tol)) throw ValidationError("rel_tol must be positive");
    if (!(plan.abs_tol >= 0.0)) throw ValidationError("abs_tol must be nonnegative");
    if (plan.node_budget < (std::size_t{1} << 10)) throw ValidationError("node_budget must be at least 2^10");
}

NodePlacement node_placement(const GeneratorFamily& fam, Level level) {
    switch (fam.kind) {
        case FamilyKind::Normal:
        case FamilyKind::Logistic: return {AxisLaw{}, {AxisShape::Normal, 1.2}};
        case FamilyKind::Laplace: return {AxisLaw{}, {AxisShape::Logistic, level == Level::Base ? 1.6 : 2.0}, true};
        case FamilyKind::StudentT: break;
    }
    return {{AxisShape::Cauchy, 1.5},
            {level == Level::DoubleCumulative ? AxisShape::Cauchy : AxisShape::StudentT2, 1.5}};
}

IntegralEstimate integrate(const Rectangle& rect, std::size_t outputs, const BatchIntegrand& h,
                           const IntegrationPlan& plan, const NodePlacement& place) {
    validate_plan(plan);
    const std::size_t d = rect.dim();
    if (d > kMaxDim) throw ValidationError("integration dimension above 5 is not supported");
    if (d == 0) {
        std::vector<double> out(outputs);
        h(NodeBlock{0, 1, 1, nullptr}, out.data());
        IntegralEstimate est;
        est.values = std::move(out);
        est.nodes = 1;
        return est;
    }
    QuadMethod m = plan.method;
    if (m == QuadMethod::Auto) m = d <= 3 ? QuadMethod::Tensor : QuadMethod::LowDiscrepancy;
    if (m == QuadMethod::Tensor && d > 3) throw ValidationError("tensor quadrature is limited to dimension 3");
    for (const AxisLaw& law : {place.tensor, place.low_discrepancy})
        if (!(law.scale > 0.0) || !std::isfinite(law.scale)) throw ValidationError("axis law scale must be positive");
    if (m == QuadMethod::Tensor) {
        if (!place.split_at_origin) return integrate_tensor(axis_maps(rect, place.tensor), outputs, h, plan);
        return integrate_split(rect, outputs, h, plan, place.tensor);
    }
    return integrate_qmc(axis_maps(rect, place.low_discrepancy), outputs, h, plan);
}

IntegralEstimate trunc_expect(const AuxLaw& law, std::size_t outputs, const BatchIntegrand& h,
                              const Rectangle& rect, const IntegrationPlan& plan) {
    if (law.shifts.size() > law.n) throw ValidationError("more shifts than dimensions");
    if (rect.dim() != law.dim()) throw ValidationError("rectangle dimension does not match the auxiliary law");
    check_family(law.family, law.n, law.level);
    double t0 = 0.0;
    for (double s : law.shifts) {
        if (!std::isfinite(s)) throw ValidationError("auxiliary law shifts must be finite");
        t0 += 0.5 * s * s;
    }
    const double mass = tail_mass(law.family, law.n, law.level, law.dim(), t0);
    if (!(mass > 0.0)) throw DegenerateRegion("auxiliary law normalizer underflows");
    const double c = 1.0 / mass;
    const auto& kt = kernels::active();
    std::vector<double> dens;
    auto f = [&](const NodeBlock& blk, double* out) {
        h(blk, out);
        dens.resize(blk.count);
        kt.half_sq_norm(blk.coords, blk.dim, blk.count, blk.stride, t0, dens.data());
        generator_batch(law.family, law.n, law.level, dens.data(), blk.count);
        for (std::size_t i = 0; i < blk.count; ++i) dens[i] *= c;
        for (std::size_t o = 0; o < outputs; ++o) kt.mul_inplace(out + o * blk.count, dens.data(), blk.count);
    };
    return integrate(rect, outputs, f, plan, node_placement(law.family, law.level));
}

IntegralEstimate rect_prob_gse(const GeneratorFamily& fam, const SkewFunction& skew,
                               const Rectangle& rect, const IntegrationPlan& plan, Level level) {
    const std::size_t n = rect.dim();
    if (skew.dim() != n) throw ValidationError("skew dimension does not match rectangle");
    const double c2 = 2.0 * norm_const(fam, n, level);
    const auto& kt = kernels::active();
    const Vector& gamma = skew.gamma();
    std::vector<double> proj;
    auto f = [&](const NodeBlock& blk, double* out) {
        kt.half_sq_norm(blk.coords, blk.dim, blk.count, blk.stride, 0.0, out);
        generator_batch(fam, n, level, out, blk.count);
        proj.resize(blk.count);
        kt.project(blk.coords, blk.dim, blk.count, blk.stride, gamma.data(), 0.0, proj.data());
        skew.j_batch(0, proj.data(), blk.count);
        for (std::size_t i = 0; i < blk.count; ++i) out[i] *= c2 * proj[i];
    };
    return integrate(rect, 1, f, plan, node_placement(fam, level));
}

IntegralEstimate rect_prob_elliptical(const GeneratorFamily& fam, std::size_t n,
                                      const Rectangle& rect, const IntegrationPlan& plan,
                                      Level level) {
    if (rect.dim() != n) throw ValidationError("rectangle dimension mismatch");
    const double c = norm_const(fam, n, level);
    const auto& kt = kernels::active();
    auto f = [&](const NodeBlock& blk, double* out) {
        kt.half_sq_norm(blk.coords, blk.dim, blk.count, blk.stride, 0.0, out);
        generator_batch(fam, n, level, out, blk.count);
        for (std::size_t i = 0; i < blk.count; ++i) out[i] *= c;
    };
    return integrate(rect, 1, f, plan, node_placement(fam, level));
}

Vector coordinate_insert(const Vector& base, std::span<const Pin> pins, std::size_t n) {
    if (static_cast<std::size_t>(base.size()) + pins.size() != n)
        throw ValidationError("coordinate_insert: sizes do not add up to n");
    std::vector<bool> pinned(n, false);
    Vector out(static_cast<Eigen::Index>(n));
    for (const Pin& p : pins) {
        if (p.index >= n) throw ValidationError("coordinate_insert: pin index out of range");
        if (pinned[p.index]) throw ValidationError("coordinate_insert: duplicate pin index");
        pinned[p.index] = true;
        out(static_cast<Eigen::Index>(p.index)) = p.value;
    }
    Eigen::Index b = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (!pinned[k]) out(static_cast<Eigen::Index>(k)) = base(b++);
    return out;
}

std::vector<std::size_t> free_indices(std::size_t n, std::span<const Pin> pins) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k) {
        bool hit = false;
        for (const Pin& p : pins) hit = hit || p.index == k;
        if (!hit) out.push_back(k);
    }
    return out;
}

const GaussRule& gauss_legendre(std::size_t order) {
    static std::mutex mu;
    static std::map<std::size_t, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    if (order == 0) throw ValidationError("Gauss-Legendre order must be positive");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double pi = boost::math::constants::pi<double>();
    const std::size_t half = (order + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < order; ++j) {
                const double p2 = p1;
                p1 = p0;
                const double jj = static_cast<double>(j);
                p0 = ((2.0 * jj + 1.0) * z * p1 - jj * p2) / (jj + 1.0);
            }
            dp = static_cast<double>(order) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[order - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

}  // namespace gse
