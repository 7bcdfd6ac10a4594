#include "gse/skewing.hpp"

#include "gse/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace gse {

namespace {

constexpr double kInvSqrt2Pi = boost::math::constants::one_div_root_two_pi<double>();
constexpr double kInvSqrt2 = boost::math::constants::one_div_root_two<double>();

double logistic_cdf(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double logistic_pdf(double x) {
    const double e = std::exp(-std::abs(x));
    return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

const char* to_string(SkewKind kind) {
    switch (kind) {
        case SkewKind::NormalCdf: return "normal_cdf";
        case SkewKind::StudentTCdf: return "student_t_cdf";
        case SkewKind::LogisticCdf: return "logistic_cdf";
        case SkewKind::ConstantHalf: return "constant_half";
    }
    return "constant_half";
}

SkewKind skew_from_string(const std::string& s) {
    if (s == "normal_cdf") return SkewKind::NormalCdf;
    if (s == "student_t_cdf") return SkewKind::StudentTCdf;
    if (s == "logistic_cdf") return SkewKind::LogisticCdf;
    if (s == "constant_half") return SkewKind::ConstantHalf;
    throw ValidationError("unknown skew: " + s);
}

SkewFunction::SkewFunction(SkewKind kind, Vector gamma, double df)
    : kind_(kind), gamma_(std::move(gamma)), df_(df) {
    if (gamma_.size() == 0) throw ValidationError("skew direction must be non-empty");
    if (!gamma_.allFinite()) throw ValidationError("skew direction has non-finite entries");
    if (kind_ == SkewKind::StudentTCdf && !(std::isfinite(df_) && df_ > 0.0))
        throw ValidationError("student_t_cdf skew requires skew_df > 0");
    if (kind_ == SkewKind::ConstantHalf) gamma_.setZero();
}

double SkewFunction::j(double x) const {
    switch (kind_) {
        case SkewKind::NormalCdf: return normal_cdf(x);
        case SkewKind::StudentTCdf: {
            boost::math::students_t_distribution<double> t(df_);
            return x >= 0.0 ? boost::math::cdf(t, x) : boost::math::cdf(boost::math::complement(t, -x));
        }
        case SkewKind::LogisticCdf: return logistic_cdf(x);
        case SkewKind::ConstantHalf: return 0.5;
    }
    return 0.5;
}

double SkewFunction::j1(double x) const {
    switch (kind_) {
        case SkewKind::NormalCdf: return normal_pdf(x);
        case SkewKind::StudentTCdf: {
            const double m = df_;
            const double lc = std::lgamma(0.5 * (m + 1.0)) - std::lgamma(0.5 * m) -
                              0.5 * std::log(m * boost::math::constants::pi<double>());
            return std::exp(lc - 0.5 * (m + 1.0) * std::log1p(x * x / m));
        }
        case SkewKind::LogisticCdf: return logistic_pdf(x);
        case SkewKind::ConstantHalf: return 0.0;
    }
    return 0.0;
}

double SkewFunction::j2(double x) const {
    switch (kind_) {
        case SkewKind::NormalCdf: return -x * normal_pdf(x);
        case SkewKind::StudentTCdf: {
            const double m = df_;
            return -((m + 1.0) * x / m) / (1.0 + x * x / m) * j1(x);
        }
        case SkewKind::LogisticCdf: return logistic_pdf(x) * (1.0 - 2.0 * logistic_cdf(x));
        case SkewKind::ConstantHalf: return 0.0;
    }
    return 0.0;
}

void SkewFunction::j_batch(int p, double* x, std::size_t count) const {
    if (kind_ == SkewKind::ConstantHalf) {
        const double v = p == 0 ? 0.5 : 0.0;
        for (std::size_t i = 0; i < count; ++i) x[i] = v;
        return;
    }
    if (kind_ == SkewKind::NormalCdf) {
        switch (p) {
            case 0: for (std::size_t i = 0; i < count; ++i) x[i] = normal_cdf(x[i]); return;
            case 1: for (std::size_t i = 0; i < count; ++i) x[i] = normal_pdf(x[i]); return;
            default: for (std::size_t i = 0; i < count; ++i) x[i] = -x[i] * normal_pdf(x[i]); return;
        }
    }
    switch (p) {
        case 0: for (std::size_t i = 0; i < count; ++i) x[i] = j(x[i]); return;
        case 1: for (std::size_t i = 0; i < count; ++i) x[i] = j1(x[i]); return;
        default: for (std::size_t i = 0; i < count; ++i) x[i] = j2(x[i]); return;
    }
}

double SkewFunction::project(const Vector& t) const {
    if (t.size() != gamma_.size()) throw ValidationError("dimension mismatch in skewing function");
    return gamma_.dot(t);
}

double SkewFunction::h(const Vector& t) const { return j(project(t)); }

double SkewFunction::dh(const Vector& t, std::size_t i) const {
    const double x = project(t);
    if (i >= dim()) throw ValidationError("index out of range in dh");
    return gamma_(static_cast<Eigen::Index>(i)) * j1(x);
}

double SkewFunction::d2h(const Vector& t, std::size_t i, std::size_t j) const {
    const double x = project(t);
    if (i >= dim() || j >= dim()) throw ValidationError("index out of range in d2h");
    return gamma_(static_cast<Eigen::Index>(i)) * gamma_(static_cast<Eigen::Index>(j)) * j2(x);
}

}  // namespace gse
