#include "gse/errors.hpp"
#include "gse/skewing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace gse;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

std::vector<SkewFunction> all_skews() {
    const Vector g = vec({0.8, -1.1, 0.4});
    return {SkewFunction(SkewKind::NormalCdf, g), SkewFunction(SkewKind::StudentTCdf, g, 4.0),
            SkewFunction(SkewKind::StudentTCdf, g, 0.7), SkewFunction(SkewKind::LogisticCdf, g),
            SkewFunction::constant_half(3)};
}

}  // namespace

TEST(Skewing, Values) {
    EXPECT_EQ(SkewFunction::constant_half(2).h(vec({3.0, -7.0})), 0.5);
    EXPECT_EQ(SkewFunction(SkewKind::NormalCdf, vec({1.0, 2.0})).h(vec({0.0, 0.0})), 0.5);
    EXPECT_NEAR(SkewFunction(SkewKind::LogisticCdf, vec({1.0})).h(vec({1.0})), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
    EXPECT_NEAR(SkewFunction(SkewKind::LogisticCdf, vec({1.0})).h(vec({1.0})), 0.73106, 1e-5);
    // Student-t with 1 df is Cauchy: 1/2 + atan(x)/π
    EXPECT_NEAR(SkewFunction(SkewKind::StudentTCdf, vec({1.0}), 1.0).j(2.0), 0.5 + std::atan(2.0) / M_PI, 1e-14);
}

TEST(Skewing, Derivatives) {
    EXPECT_EQ(SkewFunction::constant_half(2).dh(vec({1.0, 1.0}), 1), 0.0);
    EXPECT_NEAR(SkewFunction(SkewKind::NormalCdf, vec({2.0})).dh(vec({0.0}), 0), 2.0 * normal_pdf(0.0), 1e-15);
    EXPECT_NEAR(SkewFunction(SkewKind::NormalCdf, vec({2.0})).dh(vec({0.0}), 0), 0.79788, 1e-5);
    const SkewFunction n11(SkewKind::NormalCdf, vec({1.0, 1.0}));
    EXPECT_EQ(n11.d2h(vec({1.0, -1.0}), 0, 1), 0.0);
    EXPECT_NEAR(n11.d2h(vec({1.0, 0.0}), 0, 1), -normal_pdf(1.0), 1e-15);
    EXPECT_NEAR(n11.d2h(vec({1.0, 0.0}), 0, 1), -0.24197, 1e-5);
}

TEST(Skewing, FiniteDifferences) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const double h = 1e-5;
    for (const auto& s : all_skews()) {
        for (int rep = 0; rep < 50; ++rep) {
            const Vector t = vec({1.5 * nd(rng), 1.5 * nd(rng), 1.5 * nd(rng)});
            for (std::size_t i = 0; i < 3; ++i) {
                Vector tp = t, tm = t;
                tp(static_cast<Eigen::Index>(i)) += h;
                tm(static_cast<Eigen::Index>(i)) -= h;
                EXPECT_NEAR((s.h(tp) - s.h(tm)) / (2 * h), s.dh(t, i), 1e-6) << to_string(s.kind());
                for (std::size_t j = 0; j < 3; ++j)
                    EXPECT_NEAR((s.dh(tp, j) - s.dh(tm, j)) / (2 * h), s.d2h(t, i, j), 1e-5) << to_string(s.kind());
            }
        }
    }
}

TEST(Skewing, Antisymmetry) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd;
    for (const auto& s : all_skews())
        for (int rep = 0; rep < 200; ++rep) {
            const Vector t = vec({3.0 * nd(rng), 3.0 * nd(rng), 3.0 * nd(rng)});
            EXPECT_NEAR(s.h(-t) + s.h(t), 1.0, 1e-12) << to_string(s.kind());
            EXPECT_GE(s.h(t), 0.0);
            EXPECT_LE(s.h(t), 1.0);
        }
}

TEST(Skewing, TailsAreAccurate) {
    const SkewFunction n(SkewKind::NormalCdf, vec({1.0}));
    EXPECT_NEAR(n.j(-30.0) / 4.906713927148187e-198, 1.0, 1e-12);
    const SkewFunction t(SkewKind::StudentTCdf, vec({1.0}), 1.0);
    EXPECT_NEAR(t.j(-1e6) * M_PI * 1e6, 1.0, 1e-9);
    const SkewFunction l(SkewKind::LogisticCdf, vec({1.0}));
    EXPECT_NEAR(l.j(-800.0) , 0.0, 1e-300);
    EXPECT_EQ(l.j(800.0), 1.0);
}

TEST(Skewing, BatchMatchesScalar) {
    std::vector<double> xs{-40.0, -3.0, -0.5, 0.0, 0.25, 2.0, 9.0, 41.0, -1e-3};
    for (const auto& s : all_skews())
        for (int p = 0; p <= 2; ++p) {
            std::vector<double> y = xs;
            s.j_batch(p, y.data(), y.size());
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double ref = p == 0 ? s.j(xs[i]) : p == 1 ? s.j1(xs[i]) : s.j2(xs[i]);
                EXPECT_NEAR(y[i], ref, 1e-15 + 1e-14 * std::abs(ref));
            }
        }
}

TEST(Skewing, Validation) {
    EXPECT_THROW(SkewFunction(SkewKind::NormalCdf, vec({1.0, NAN})), ValidationError);
    EXPECT_THROW(SkewFunction(SkewKind::StudentTCdf, vec({1.0}), 0.0), ValidationError);
    EXPECT_THROW(skew_from_string("probit"), ValidationError);
    EXPECT_EQ(skew_from_string("constant_half"), SkewKind::ConstantHalf);
    EXPECT_THROW(SkewFunction(SkewKind::NormalCdf, vec({1.0, 2.0})).h(vec({1.0})), ValidationError);
}
