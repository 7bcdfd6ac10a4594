#include "gse/errors.hpp"
#include "gse/moments.hpp"
#include "gse/oracle.hpp"
#include "gse/risk.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

using namespace gse;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Matrix sig2() {
    Matrix s(2, 2);
    s << 0.9, 0.5, 0.5, 0.7;
    return s;
}

GseDistribution sn2() {
    return GseDistribution(vec({3.0, 4.0}), ScaleMatrix(sig2()), GeneratorFamily::normal(),
                           SkewFunction(SkewKind::NormalCdf, vec({1.0, 2.0})));
}

}  // namespace

TEST(Oracle, SamplerIsDeterministic) {
    const auto a = sample_gse(sn2(), 5000, 42);
    const auto b = sample_gse(sn2(), 5000, 42);
    const auto c = sample_gse(sn2(), 5000, 43);
    EXPECT_EQ(a.draws, b.draws);
    EXPECT_EQ(a.proposals, b.proposals);
    EXPECT_NE(a.draws, c.draws);
    EXPECT_EQ(a.draws.rows(), 5000);
}

TEST(Oracle, ResultsIndependentOfThreadCount) {
    const OracleEvent ev{EventSpace::Standardized, Rectangle(vec({-1.0, -0.5}), vec({2.0, kInf}))};
    setenv("GSE_THREADS", "1", 1);
    const auto a = oracle_run(sn2(), std::span<const OracleEvent>(&ev, 1), 200000, 9).front();
    setenv("GSE_THREADS", "3", 1);
    const auto b = oracle_run(sn2(), std::span<const OracleEvent>(&ev, 1), 200000, 9).front();
    unsetenv("GSE_THREADS");
    EXPECT_EQ(a.prob, b.prob);
    EXPECT_EQ(a.delta, b.delta);
    EXPECT_EQ(a.omega, b.omega);
    EXPECT_EQ(a.cov, b.cov);
    EXPECT_EQ(a.cov_se, b.cov_se);
}

TEST(Oracle, AcceptanceFractionIsOneHalf) {
    const GeneratorFamily fams[] = {GeneratorFamily::normal(), GeneratorFamily::student_t(5.0), GeneratorFamily::logistic(),
                                    GeneratorFamily::laplace()};
    for (const auto& fam : fams) {
        const GseDistribution d(vec({0.0, 1.0, 2.0}), ScaleMatrix(Matrix::Identity(3, 3)), fam,
                                SkewFunction(SkewKind::LogisticCdf, vec({2.0, -1.0, 0.5})));
        const auto b = sample_gse(d, 400000, 3);
        const double prop = static_cast<double>(b.proposals);
        EXPECT_LT(std::abs(b.accepted_fraction - 0.5), 3.0 * std::sqrt(0.25 / prop)) << to_string(fam.kind);
    }
}

TEST(Oracle, SymmetricSampleMean) {
    const GseDistribution d(vec({1.0, -2.0}), ScaleMatrix(sig2()), GeneratorFamily::normal(), SkewFunction::constant_half(2));
    const std::size_t m = 1000000;
    const auto b = sample_gse(d, m, 4);
    const Vector mean = b.draws.colwise().mean().transpose();
    for (Eigen::Index k = 0; k < 2; ++k)
        EXPECT_LT(std::abs(mean(k) - d.mu()(k)), 3.0 * std::sqrt(sig2()(k, k) / static_cast<double>(m)));
}

TEST(Oracle, SkewNormalSampleMean) {
    const auto d = sn2();
    const std::size_t m = 1000000;
    const auto b = sample_gse(d, m, 5);
    const Vector mean = b.draws.colwise().mean().transpose();
    const Matrix centered = b.draws.rowwise() - mean.transpose();
    const Vector sd = (centered.array().square().colwise().sum() / static_cast<double>(m - 1)).sqrt().transpose();
    const Vector g = d.skew().gamma();
    const Vector expect = d.mu() + d.root() * g * std::sqrt(2.0 / std::numbers::pi) / std::sqrt(1.0 + g.squaredNorm());
    for (Eigen::Index k = 0; k < 2; ++k)
        EXPECT_LT(std::abs(mean(k) - expect(k)), 3.0 * sd(k) / std::sqrt(static_cast<double>(m)));
}

TEST(Oracle, MarginalMatchesQuadratureCdf) {
    const auto d = sn2();
    const auto b = sample_gse(d, 1000000, 6);
    for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> x(static_cast<std::size_t>(b.draws.rows()));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = b.draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        std::sort(x.begin(), x.end());
        double ks = 0.0;
        const double lo = x[x.size() / 1000], hi = x[x.size() - x.size() / 1000];
        for (int i = 0; i <= 300; ++i) {
            const double v = lo + (hi - lo) * i / 300.0;
            const double emp = static_cast<double>(std::upper_bound(x.begin(), x.end(), v) - x.begin()) / static_cast<double>(x.size());
            ks = std::max(ks, std::abs(emp - marginal_cdf(d, k, v, IntegrationPlan{})));
        }
        EXPECT_LT(ks, 0.003) << k;
    }
}

TEST(Oracle, FullSpaceEqualsSampleMean) {
    const auto d = sn2();
    const auto b = sample_gse(d, 100000, 7);
    const auto est = oracle_truncated_report(d, Rectangle::whole(2), 100000, 7);
    EXPECT_EQ(est.hits, 100000u);
    EXPECT_EQ(est.prob, 1.0);
    EXPECT_LT((est.mean - b.draws.colwise().mean().transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Oracle, SymmetricOrthant) {
    const GseDistribution d(vec({0.0, 0.0}), ScaleMatrix(Matrix::Identity(2, 2)), GeneratorFamily::normal(), SkewFunction::constant_half(2));
    const auto est = oracle_truncated_report(d, Rectangle(vec({0.0, 0.0}), vec({kInf, kInf})), 1000000, 8);
    EXPECT_LT(std::abs(est.prob - 0.25), 3.0 * est.prob_se);
    EXPECT_NEAR(est.prob_se, std::sqrt(0.25 * 0.75 / 1e6), 1e-4);
}

TEST(Oracle, BracketsTwoDimensionalClosedForm) {
    const auto d = sn2();
    const auto rep = moment_report(d, Rectangle(vec({2.0, 2.0}), vec({6.0, 7.0})), IntegrationPlan{});
    const auto est = oracle_truncated_report(d, rep.std_rect, 10000000, 10);
    EXPECT_LT(std::abs(rep.prob - est.prob), 3.0 * est.prob_se);
    for (Eigen::Index i = 0; i < 2; ++i) {
        EXPECT_LT(std::abs(rep.delta(i) - est.delta(i)), 3.0 * est.delta_se(i));
        EXPECT_LT(std::abs(rep.mean(i) - est.mean(i)), 3.0 * est.mean_se(i));
        for (Eigen::Index j = 0; j < 2; ++j) {
            EXPECT_LT(std::abs(rep.omega(i, j) - est.omega(i, j)), 3.0 * est.omega_se(i, j));
            EXPECT_LT(std::abs(rep.mdtcov(i, j) - est.cov(i, j)), 3.0 * est.cov_se(i, j));
        }
    }
}

TEST(Oracle, ObservedAndStandardizedEventsCoincideForDiagonalRoot) {
    Matrix s = Matrix::Zero(2, 2);
    s.diagonal() << 4.0, 0.25;
    const GseDistribution d(vec({1.0, 2.0}), ScaleMatrix(s), GeneratorFamily::laplace(), SkewFunction(SkewKind::NormalCdf, vec({0.5, -1.0})));
    const Rectangle y(vec({0.0, 1.5}), vec({4.0, kInf}));
    const OracleEvent ev[] = {{EventSpace::Observed, y}, {EventSpace::Standardized, standardize_bounds(d, y)}};
    const auto est = oracle_run(d, ev, 100000, 11);
    EXPECT_EQ(est[0].hits, est[1].hits);
    EXPECT_LT((est[0].mean - est[1].mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Oracle, InsufficientMass) {
    const GseDistribution d(vec({0.0, 0.0}), ScaleMatrix(Matrix::Identity(2, 2)), GeneratorFamily::normal(), SkewFunction::constant_half(2));
    EXPECT_THROW(oracle_truncated_report(d, Rectangle(vec({30.0, 30.0}), vec({31.0, 31.0})), 10000, 1), InsufficientMass);
    EXPECT_THROW(sample_gse(d, 0, 1), ValidationError);
}
