#include "gse/generators.hpp"

#include "gse/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace gse {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kQuadTol = 1e-13;

double nd(std::size_t n) { return static_cast<double>(n); }

void require_dim(std::size_t n) {
    if (n == 0) throw ValidationError("dimension must be at least 1");
}

void require_t(double t) {
    if (!(t >= 0.0)) throw ValidationError("generator argument must be nonnegative");
}

// StudentT generator at a level is A (1 + 2t/m)^{-p}.
struct PowerForm {
    double a;
    double p;
};

PowerForm student_form(double m, std::size_t n, Level level) {
    const double dn = nd(n);
    switch (level) {
        case Level::Base: return {1.0, 0.5 * (m + dn)};
        case Level::Cumulative:
            if (!(m + dn - 2.0 > 0.0)) throw ValidationError("StudentT requires m + n - 2 > 0 for the cumulative generator");
            return {m / (m + dn - 2.0), 0.5 * (m + dn - 2.0)};
        case Level::DoubleCumulative:
            if (!(m + dn - 4.0 > 0.0)) throw ValidationError("StudentT requires m + n - 4 > 0 for the double cumulative generator");
            return {m * m / ((m + dn - 2.0) * (m + dn - 4.0)), 0.5 * (m + dn - 4.0)};
    }
    return {1.0, 1.0};
}

// 2 ∫_0^∞ s^{k-1} f(s) ds via exp_sinh.
template <class F>
double half_line(F f, std::size_t k) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto h = [&](double s) {
        if (s <= 0.0) return k == 1 ? f(0.0) : 0.0;
        const double v = f(s);
        if (v == 0.0) return 0.0;
        return std::pow(s, nd(k) - 1.0) * v;
    };
    double err = 0.0;
    const double v = integrator.integrate(h, kQuadTol, &err);
    return 2.0 * v;
}

}  // namespace

const char* to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::Normal: return "normal";
        case FamilyKind::StudentT: return "student_t";
        case FamilyKind::Logistic: return "logistic";
        case FamilyKind::Laplace: return "laplace";
    }
    return "normal";
}

FamilyKind family_from_string(const std::string& s) {
    if (s == "normal") return FamilyKind::Normal;
    if (s == "student_t") return FamilyKind::StudentT;
    if (s == "logistic") return FamilyKind::Logistic;
    if (s == "laplace") return FamilyKind::Laplace;
    throw ValidationError("unknown family: " + s);
}

void check_family(const GeneratorFamily& fam, std::size_t n, Level level) {
    require_dim(n);
    if (fam.kind != FamilyKind::StudentT) return;
    const double m = fam.df;
    if (!std::isfinite(m) || !(m > 0.0)) throw ValidationError("StudentT requires df > 0");
    if (level == Level::Cumulative && !(m > 2.0))
        throw ValidationError("StudentT requires df > 2 for cumulative-generator constants");
    if (level == Level::DoubleCumulative && !(m > 4.0))
        throw ValidationError("StudentT requires df > 4 for double-cumulative-generator constants");
}

double g(const GeneratorFamily& fam, std::size_t n, double u) {
    require_t(u);
    switch (fam.kind) {
        case FamilyKind::Normal: return std::exp(-u);
        case FamilyKind::StudentT: {
            const auto f = student_form(fam.df, n, Level::Base);
            return std::pow(1.0 + 2.0 * u / fam.df, -f.p);
        }
        case FamilyKind::Logistic: {
            const double e = std::exp(-u);
            return e / ((1.0 + e) * (1.0 + e));
        }
        case FamilyKind::Laplace: return std::exp(-std::sqrt(2.0 * u));
    }
    return 0.0;
}

double g_bar(const GeneratorFamily& fam, std::size_t n, double t) {
    require_t(t);
    switch (fam.kind) {
        case FamilyKind::Normal: return std::exp(-t);
        case FamilyKind::StudentT: {
            const auto f = student_form(fam.df, n, Level::Cumulative);
            return f.a * std::pow(1.0 + 2.0 * t / fam.df, -f.p);
        }
        case FamilyKind::Logistic: {
            const double e = std::exp(-t);
            return e / (1.0 + e);
        }
        case FamilyKind::Laplace: {
            const double s = std::sqrt(2.0 * t);
            if (s > 800.0) return 0.0;
            return (1.0 + s) * std::exp(-s);
        }
    }
    return 0.0;
}

double g_dbar(const GeneratorFamily& fam, std::size_t n, double t) {
    require_t(t);
    switch (fam.kind) {
        case FamilyKind::Normal: return std::exp(-t);
        case FamilyKind::StudentT: {
            const auto f = student_form(fam.df, n, Level::DoubleCumulative);
            return f.a * std::pow(1.0 + 2.0 * t / fam.df, -f.p);
        }
        case FamilyKind::Logistic: return std::log1p(std::exp(-t));
        case FamilyKind::Laplace: {
            const double s = std::sqrt(2.0 * t);
            if (s > 800.0) return 0.0;
            return (3.0 + 2.0 * t + 3.0 * s) * std::exp(-s);
        }
    }
    return 0.0;
}

double generator(const GeneratorFamily& fam, std::size_t n, Level level, double t) {
    switch (level) {
        case Level::Base: return g(fam, n, t);
        case Level::Cumulative: return g_bar(fam, n, t);
        case Level::DoubleCumulative: return g_dbar(fam, n, t);
    }
    return 0.0;
}

void generator_batch(const GeneratorFamily& fam, std::size_t n, Level level, double* t,
                     std::size_t count) {
    switch (fam.kind) {
        case FamilyKind::Normal:
            for (std::size_t i = 0; i < count; ++i) t[i] = std::exp(-t[i]);
            return;
        case FamilyKind::StudentT: {
            const auto f = student_form(fam.df, n, level);
            const double c = 2.0 / fam.df;
            for (std::size_t i = 0; i < count; ++i) t[i] = f.a * std::pow(1.0 + c * t[i], -f.p);
            return;
        }
        default:
            for (std::size_t i = 0; i < count; ++i) t[i] = generator(fam, n, level, t[i]);
            return;
    }
}

double norm_const(const GeneratorFamily& fam, std::size_t n, Level level) {
    check_family(fam, n, level);
    const double dn = nd(n);
    switch (fam.kind) {
        case FamilyKind::Normal: return std::pow(2.0 * kPi, -0.5 * dn);
        case FamilyKind::StudentT: {
            const double m = fam.df;
            const auto f = student_form(m, n, level);
            const double lc = std::lgamma(f.p) - std::lgamma(f.p - 0.5 * dn) -
                              0.5 * dn * std::log(kPi * m) - std::log(f.a);
            return std::exp(lc);
        }
        case FamilyKind::Logistic: {
            const double base = std::pow(2.0 * kPi, 0.5 * dn);
            switch (level) {
                case Level::Base: return 1.0 / (base * hurwitz_lerch_psi(2, -1.0, 0.5 * dn, 1.0));
                case Level::Cumulative: return 1.0 / (base * hurwitz_lerch_psi(1, -1.0, 0.5 * dn, 1.0));
                case Level::DoubleCumulative:
                    return 1.0 / (base * hurwitz_lerch_psi(1, -1.0, 0.5 * dn + 1.0, 1.0));
            }
            break;
        }
        case FamilyKind::Laplace: {
            const double lc = std::lgamma(0.5 * dn) - std::log(2.0) - 0.5 * dn * std::log(kPi) -
                              std::lgamma(dn);
            switch (level) {
                case Level::Base: return std::exp(lc);
                case Level::Cumulative: return std::exp(lc) / (dn + 1.0);
                case Level::DoubleCumulative: return std::exp(lc) / ((dn + 1.0) * (dn + 3.0));
            }
            break;
        }
    }
    return 0.0;
}

namespace {

constexpr int kEtaTerms = 48;

// Dirichlet eta at s - k for k < kEtaTerms, for s a multiple of 1/2 in [-1/2, 7].
const std::vector<double>& eta_row(double s) {
    static const auto table = [] {
        std::vector<std::vector<double>> rows;
        for (int h = -1; h <= 14; ++h)
            for (int k = 0; k < kEtaTerms; ++k) {
                if (k == 0) rows.emplace_back();
                const double x = 0.5 * h - k;
                rows.back().push_back(x == 1.0 ? std::log(2.0) : (1.0 - std::pow(2.0, 1.0 - x)) * boost::math::zeta(x));
            }
        return rows;
    }();
    const int h = static_cast<int>(std::lround(2.0 * s));
    if (h < -1 || h > 14 || 0.5 * h != s) throw ValidationError("eta order out of range");
    return table[static_cast<std::size_t>(h + 1)];
}

// sum_{j>=1} (-1)^{j+1} j^{-s} e^{-jt}
double alternating_exp_series(double s, double t) {
    if (t >= 1.0) {
        const double x = std::exp(-t);
        double sum = 0.0, xj = 1.0;
        for (int j = 1; j <= 64; ++j) {
            xj *= x;
            const double term = xj * std::pow(static_cast<double>(j), -s);
            sum += (j % 2 == 1) ? term : -term;
            if (term < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    const auto& eta = eta_row(s);
    double sum = 0.0, c = 1.0;
    for (int k = 0; k < kEtaTerms; ++k) {
        sum += c * eta[static_cast<std::size_t>(k)];
        c *= -t / static_cast<double>(k + 1);
    }
    return sum;
}

}  // namespace

double norm_const_quadrature(const GeneratorFamily& fam, std::size_t n, Level level) {
    check_family(fam, n, level);
    return 1.0 / tail_mass_quadrature(fam, n, level, n, 0.0);
}

double tail_mass_quadrature(const GeneratorFamily& fam, std::size_t n, Level level, std::size_t k,
                            double t) {
    require_dim(n);
    require_t(t);
    if (k == 0) return generator(fam, n, level, t);
    const double dk = nd(k);
    const double lead = std::pow(2.0 * kPi, 0.5 * dk) / std::tgamma(0.5 * dk);
    const double v = half_line([&](double s) { return generator(fam, n, level, t + s * s); }, k);
    return lead * v;
}

double tail_mass(const GeneratorFamily& fam, std::size_t n, Level level, std::size_t k, double t) {
    require_dim(n);
    require_t(t);
    if (k == 0) return generator(fam, n, level, t);
    const double dk = nd(k);
    switch (fam.kind) {
        case FamilyKind::Normal: return std::pow(2.0 * kPi, 0.5 * dk) * std::exp(-t);
        case FamilyKind::StudentT: {
            const double m = fam.df;
            const auto f = student_form(m, n, level);
            if (!(f.p > 0.5 * dk)) throw ValidationError("StudentT tail mass diverges for these degrees of freedom");
            const double beta = 1.0 + 2.0 * t / m;
            const double lv = std::log(f.a) + (0.5 * dk - f.p) * std::log(beta) +
                              0.5 * dk * std::log(kPi * m) + std::lgamma(f.p - 0.5 * dk) -
                              std::lgamma(f.p);
            return std::exp(lv);
        }
        case FamilyKind::Logistic: {
            const double lv = level == Level::Base ? 0.0 : level == Level::Cumulative ? 1.0 : 2.0;
            return std::pow(2.0 * kPi, 0.5 * dk) * alternating_exp_series(0.5 * dk - 1.0 + lv, t);
        }
        case FamilyKind::Laplace: {
            // Each cumulative level integrates out two more axes.
            const std::size_t lv = level == Level::Base ? 0 : level == Level::Cumulative ? 1 : 2;
            const double nu = 0.5 * (nd(k + 2 * lv) + 1.0);
            const double a = std::sqrt(2.0 * t);
            const double lead = std::pow(2.0, nu) * std::pow(kPi, nu - 1.0) / std::pow(2.0 * kPi, nd(lv));
            if (a == 0.0) return lead * std::pow(2.0, nu - 1.0) * std::tgamma(nu);
            if (a > 700.0) return 0.0;
            return lead * std::pow(a, nu) * boost::math::cyl_bessel_k(nu, a);
        }
        default: return tail_mass_quadrature(fam, n, level, k, t);
    }
}

double shifted_ratio(const GeneratorFamily& fam, std::size_t n, Level level,
                     std::span<const double> shifts) {
    if (shifts.size() > n) throw ValidationError("more shifts than dimensions");
    check_family(fam, n, level);
    double t = 0.0;
    for (double s : shifts) {
        if (std::isnan(s)) throw ValidationError("shift is NaN");
        if (std::isinf(s)) return 0.0;
        t += 0.5 * s * s;
    }
    return norm_const(fam, n, Level::Base) * tail_mass(fam, n, level, n - shifts.size(), t);
}

double shifted_const(const GeneratorFamily& fam, std::size_t n, Level level,
                     std::span<const double> shifts) {
    if (shifts.empty() || shifts.size() > 2) throw ValidationError("shifted constant takes one or two shifts");
    if (level == Level::Base) throw ValidationError("shifted constants exist at cumulative levels only");
    if (shifts.size() == 2 && level != Level::DoubleCumulative)
        throw ValidationError("two shifts require the double cumulative level");
    check_family(fam, n, level);
    double t = 0.0;
    for (double s : shifts) {
        if (!std::isfinite(s)) throw ValidationError("shift values must be finite");
        t += 0.5 * s * s;
    }
    return 1.0 / tail_mass(fam, n, level, n - shifts.size(), t);
}

double hurwitz_lerch_psi(int mu, double z, double s, double a) {
    if (mu < 1) throw ValidationError("Hurwitz-Lerch order must be a positive integer");
    if (!(s > 0.0)) throw ValidationError("Hurwitz-Lerch requires s > 0");
    if (!(a > 0.0)) throw ValidationError("Hurwitz-Lerch requires a > 0");
    if (!(z >= -1.0 && z < 0.0)) throw ValidationError("Hurwitz-Lerch requires z in [-1, 0)");
    // t = u^2 removes the t^{s-1} endpoint singularity for s >= 1/2.
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double u) {
        const double t = u * u;
        const double e = std::exp(-t);
        const double den = std::pow(1.0 - z * e, mu);
        const double ea = std::exp(-a * t);
        if (ea == 0.0) return 0.0;
        const double pw = (s == 0.5) ? 1.0 : std::pow(u, 2.0 * s - 1.0);
        return pw * ea / den;
    };
    double err = 0.0;
    const double v = integrator.integrate(f, 1e-14, &err);
    return 2.0 * v / std::tgamma(s);
}

namespace {

struct LogisticTable {
    std::shared_ptr<const std::vector<double>> r, p, slope;
};

double logistic_radial_density(std::size_t n, double r) {
    const double e = std::exp(-0.5 * r * r);
    if (e == 0.0) return 0.0;
    return std::pow(r, nd(n) - 1.0) * e / ((1.0 + e) * (1.0 + e));
}

LogisticTable build_logistic_table(std::size_t n) {
    constexpr std::size_t kNodes = 4096;
    auto dens = [n](double r) { return logistic_radial_density(n, r); };
    boost::math::quadrature::exp_sinh<double> tail_int;
    auto tail_from = [&](double r0) {
        return tail_int.integrate([&](double x) { return dens(r0 + x); }, 1e-14);
    };
    const double total = tail_from(0.0);
    double r_max = 2.0;
    while (tail_from(r_max) / total >= 1e-12) r_max += 0.5;

    auto r = std::make_shared<std::vector<double>>(kNodes);
    auto p = std::make_shared<std::vector<double>>(kNodes);
    auto slope = std::make_shared<std::vector<double>>(kNodes);
    const double h = r_max / static_cast<double>(kNodes - 1);
    double acc = 0.0;
    (*r)[0] = 0.0;
    (*p)[0] = 0.0;
    for (std::size_t i = 1; i < kNodes; ++i) {
        (*r)[i] = h * static_cast<double>(i);
        acc += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(dens, (*r)[i - 1],
                                                                             (*r)[i], 0);
        (*p)[i] = acc;
    }
    const double norm = acc;
    for (std::size_t i = 0; i < kNodes; ++i) {
        (*p)[i] /= norm;
        (*slope)[i] = dens((*r)[i]) / norm;
    }
    // Fritsch–Carlson limiter keeps the Hermite interpolant monotone.
    for (std::size_t i = 0; i + 1 < kNodes; ++i) {
        const double secant = ((*p)[i + 1] - (*p)[i]) / h;
        if (secant <= 0.0) {
            (*slope)[i] = 0.0;
            (*slope)[i + 1] = 0.0;
            continue;
        }
        const double a = (*slope)[i] / secant;
        const double b = (*slope)[i + 1] / secant;
        const double q = a * a + b * b;
        if (q > 9.0) {
            const double tau = 3.0 / std::sqrt(q);
            (*slope)[i] = tau * a * secant;
            (*slope)[i + 1] = tau * b * secant;
        }
    }
    return {r, p, slope};
}

const LogisticTable& logistic_table(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, LogisticTable> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_logistic_table(n)).first;
    return it->second;
}

double hermite(double p0, double p1, double m0, double m1, double h, double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * p1 +
           (s3 - s2) * h * m1;
}

}  // namespace

RadialSampler::RadialSampler(const GeneratorFamily& fam, std::size_t n) : fam_(fam), n_(n) {
    check_family(fam, n, Level::Base);
    if (fam.kind == FamilyKind::Logistic) {
        const auto& t = logistic_table(n);
        r_nodes_ = t.r;
        p_nodes_ = t.p;
        slopes_ = t.slope;
    }
}

double RadialSampler::operator()(std::mt19937_64& rng) const {
    switch (fam_.kind) {
        case FamilyKind::Normal:
            return std::sqrt(boost::random::chi_squared_distribution<double>(nd(n_))(rng));
        case FamilyKind::StudentT: {
            const double x = boost::random::chi_squared_distribution<double>(nd(n_))(rng);
            const double w = boost::random::chi_squared_distribution<double>(fam_.df)(rng);
            return std::sqrt(x * fam_.df / w);
        }
        case FamilyKind::Laplace:
            return boost::random::gamma_distribution<double>(nd(n_), 1.0)(rng);
        case FamilyKind::Logistic: {
            const double u = boost::random::uniform_01<double>()(rng);
            const auto& p = *p_nodes_;
            const auto& r = *r_nodes_;
            const auto& m = *slopes_;
            auto it = std::upper_bound(p.begin(), p.end(), u);
            std::size_t i = static_cast<std::size_t>(it - p.begin());
            if (i == 0) return 0.0;
            if (i >= p.size()) return r.back();
            --i;
            const double h = r[i + 1] - r[i];
            double lo = 0.0, hi = 1.0;
            for (int it2 = 0; it2 < 60; ++it2) {
                const double mid = 0.5 * (lo + hi);
                if (hermite(p[i], p[i + 1], m[i], m[i + 1], h, mid) < u) lo = mid; else hi = mid;
            }
            return r[i] + h * 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

double RadialSampler::cdf(double r) const {
    if (!(r > 0.0)) return 0.0;
    const double dn = nd(n_);
    switch (fam_.kind) {
        case FamilyKind::Normal: return boost::math::gamma_p(0.5 * dn, 0.5 * r * r);
        case FamilyKind::StudentT:
            return boost::math::ibeta(0.5 * dn, 0.5 * fam_.df, r * r / (r * r + fam_.df));
        case FamilyKind::Laplace: return boost::math::gamma_p(dn, r);
        case FamilyKind::Logistic: {
            const auto& rn = *r_nodes_;
            if (r >= rn.back()) return 1.0;
            const double h = rn[1] - rn[0];
            const std::size_t i = std::min(static_cast<std::size_t>(r / h), rn.size() - 2);
            const double s = (r - rn[i]) / h;
            return hermite((*p_nodes_)[i], (*p_nodes_)[i + 1], (*slopes_)[i], (*slopes_)[i + 1], h, s);
        }
    }
    return 0.0;
}

}  // namespace gse
