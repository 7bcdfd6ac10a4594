#include "gse/errors.hpp"
#include "gse/kernels.hpp"
#include "gse/quad.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace gse;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

const GeneratorFamily kFamilies[] = {GeneratorFamily::normal(), GeneratorFamily::student_t(8.0),
                                     GeneratorFamily::logistic(), GeneratorFamily::laplace()};

BatchIntegrand ones() {
    return [](const NodeBlock& b, double* out) {
        for (std::size_t i = 0; i < b.count; ++i) out[i] = 1.0;
    };
}

}  // namespace

TEST(Quad, GaussLegendreRule) {
    for (std::size_t n : {1, 2, 5, 32, 64}) {
        const auto& r = gauss_legendre(n);
        double s = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += r.weights[i];
            m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
        }
        EXPECT_NEAR(s, 2.0, 1e-14);
        if (n >= 2) EXPECT_NEAR(m2, 2.0 / 3.0, 1e-14);
    }
    const auto& r = gauss_legendre(64);
    double m10 = 0.0;
    for (std::size_t i = 0; i < 64; ++i) m10 += r.weights[i] * std::pow(r.nodes[i], 10);
    EXPECT_NEAR(m10, 2.0 / 11.0, 1e-14);
}

TEST(Quad, DimensionZeroEvaluatesOnce) {
    int calls = 0;
    const auto est = integrate(Rectangle(Vector(0), Vector(0)), 2,
                               [&](const NodeBlock& b, double* out) {
                                   ++calls;
                                   EXPECT_EQ(b.count, 1u);
                                   out[0] = 3.5;
                                   out[1] = -1.0;
                               },
                               IntegrationPlan{});
    EXPECT_EQ(calls, 1);
    EXPECT_EQ(est.values[0], 3.5);
    EXPECT_EQ(est.values[1], -1.0);
}

TEST(Quad, DimensionLimits) {
    EXPECT_THROW(integrate(Rectangle::whole(6), 1, ones(), IntegrationPlan{}), ValidationError);
    IntegrationPlan p;
    p.method = QuadMethod::Tensor;
    EXPECT_THROW(integrate(Rectangle::whole(4), 1, ones(), p), ValidationError);
    p.node_budget = 100;
    EXPECT_THROW(validate_plan(p), ValidationError);
    p = IntegrationPlan{};
    p.rel_tol = 0.0;
    EXPECT_THROW(validate_plan(p), ValidationError);
}

TEST(Quad, PolynomialOnBox) {
    const auto est = integrate(Rectangle(vec({0.0, -1.0, 2.0}), vec({1.0, 3.0, 2.5})), 1,
                               [](const NodeBlock& b, double* out) {
                                   for (std::size_t i = 0; i < b.count; ++i) {
                                       const double x = b.coords[i], y = b.coords[b.stride + i], z = b.coords[2 * b.stride + i];
                                       out[i] = x * x * y + z;
                                   }
                               },
                               IntegrationPlan{});
    // ∫x²·∫y·0.5 + 1·4·∫z
    EXPECT_NEAR(est.values[0], (1.0 / 3.0) * 4.0 * 0.5 + 4.0 * (2.5 * 2.5 - 4.0) / 2.0, 1e-12);
}

TEST(Quad, NormalizationOfAuxLaws) {
    for (const auto& fam : kFamilies)
        for (std::size_t n = 1; n <= 5; ++n)
            for (Level lv : {Level::Base, Level::Cumulative, Level::DoubleCumulative}) {
                const AuxLaw law{fam, n, lv, {}};
                if (n <= 3) {
                    const auto est = trunc_expect(law, 1, ones(), Rectangle::whole(n), IntegrationPlan{});
                    EXPECT_NEAR(est.values[0], 1.0, 3e-5) << to_string(fam.kind) << " n=" << n;
                    continue;
                }
                IntegrationPlan plan;
                plan.rel_tol = 1e-4;
                const auto est = trunc_expect(law, 1, ones(), Rectangle::whole(n), plan);
                EXPECT_LE(est.error, 1e-4);
                EXPECT_LE(std::abs(est.values[0] - 1.0), est.error) << to_string(fam.kind) << " n=" << n;
            }
}

TEST(Quad, ShiftedAuxLawNormalization) {
    for (const auto& fam : kFamilies) {
        const AuxLaw law{fam, 4, Level::DoubleCumulative, {0.7, -1.4}};
        const auto est = trunc_expect(law, 1, ones(), Rectangle::whole(2), IntegrationPlan{});
        EXPECT_NEAR(est.values[0], 1.0, 1e-5) << to_string(fam.kind);
    }
}

TEST(Quad, NormalOrthant) {
    const AuxLaw law{GeneratorFamily::normal(), 2, Level::Cumulative, {}};
    const auto est = trunc_expect(law, 1, ones(), Rectangle(vec({-kInf, -kInf}), vec({0.0, 0.0})), IntegrationPlan{});
    EXPECT_NEAR(est.values[0], 0.25, 1e-10);
}

TEST(Quad, SkewedExpectationMatchesMonteCarlo) {
    const SkewFunction skew(SkewKind::NormalCdf, vec({1.0, 2.0}));
    const AuxLaw law{GeneratorFamily::normal(), 2, Level::Cumulative, {}};
    auto h = [&](const NodeBlock& b, double* out) {
        for (std::size_t i = 0; i < b.count; ++i) out[i] = b.coords[i] + 2.0 * b.coords[b.stride + i];
        skew.j_batch(0, out, b.count);
    };
    const auto est = trunc_expect(law, 1, h, Rectangle(vec({-1.0, -1.0}), vec({1.0, 1.0})), IntegrationPlan{});

    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    const int m = 10000000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = nd(rng), y = nd(rng);
        const double v = (std::abs(x) <= 1.0 && std::abs(y) <= 1.0) ? skew.j(x + 2.0 * y) : 0.0;
        s += v;
        s2 += v * v;
    }
    const double mean = s / m;
    const double se = std::sqrt((s2 / m - mean * mean) / m);
    EXPECT_LT(std::abs(est.values[0] - mean), 3.0 * se) << est.values[0] << " vs " << mean;
}

TEST(Quad, GseProbabilityWholeSpace) {
    const SkewFunction s2(SkewKind::StudentTCdf, vec({0.5, -1.0}), 3.0);
    const SkewFunction s4(SkewKind::LogisticCdf, vec({0.5, -1.0, 0.2, 0.3}));
    for (const auto& fam : kFamilies) {
        EXPECT_NEAR(rect_prob_gse(fam, s2, Rectangle::whole(2), IntegrationPlan{}).values[0], 1.0, 1e-6);
        IntegrationPlan plan;
        plan.rel_tol = 1e-4;
        const auto est = rect_prob_gse(fam, s4, Rectangle::whole(4), plan);
        EXPECT_LE(std::abs(est.values[0] - 1.0), est.error) << to_string(fam.kind);
    }
}

TEST(Quad, ConstantHalfOrthant) {
    for (std::size_t n = 1; n <= 5; ++n) {
        const Rectangle r(Vector::Zero(static_cast<Eigen::Index>(n)), Vector::Constant(static_cast<Eigen::Index>(n), kInf));
        const auto est = rect_prob_gse(GeneratorFamily::normal(), SkewFunction::constant_half(n), r, IntegrationPlan{});
        EXPECT_NEAR(est.values[0], std::ldexp(1.0, -static_cast<int>(n)), 1e-5 * std::ldexp(1.0, -static_cast<int>(n)) + 1e-12);
    }
}

TEST(Quad, TwoDimensionalSkewNormalRectangle) {
    // direct 2-D adaptive quadrature of 2φ₂(z)Φ(z₁ + 2z₂)
    const SkewFunction skew(SkewKind::NormalCdf, vec({1.0, 2.0}));
    const Rectangle r(vec({-1.05409255338946, -2.2229530961845}), vec({3.16227766016838, 2.051956704170308}));
    const auto est = rect_prob_gse(GeneratorFamily::normal(), skew, r, IntegrationPlan{});
    EXPECT_NEAR(est.values[0], 0.8925101755823691, 1e-9);
}

TEST(Quad, ConstantHalfReducesToElliptical) {
    const Rectangle r(vec({-0.3, -kInf, 0.2}), vec({1.2, 0.4, kInf}));
    for (const auto& fam : kFamilies) {
        const double a = rect_prob_gse(fam, SkewFunction::constant_half(3), r, IntegrationPlan{}).values[0];
        const double b = rect_prob_elliptical(fam, 3, r, IntegrationPlan{}).values[0];
        EXPECT_NEAR(a, b, 1e-13);
    }
}

TEST(Quad, SplittingAdditivity) {
    const SkewFunction skew(SkewKind::NormalCdf, vec({0.6, -0.9, 0.3}));
    const AuxLaw law{GeneratorFamily::student_t(7.0), 3, Level::Cumulative, {}};
    auto h = [&](const NodeBlock& b, double* out) {
        kernels::active().project(b.coords, b.dim, b.count, b.stride, skew.gamma().data(), 0.0, out);
        skew.j_batch(0, out, b.count);
    };
    IntegrationPlan p;
    const Vector lo = vec({-1.0, -kInf, 0.0}), hi = vec({2.0, 1.0, kInf});
    for (double cut : {-0.5, 0.3, 1.7}) {
        Vector mid_hi = hi, mid_lo = lo;
        mid_hi(0) = cut;
        mid_lo(0) = cut;
        const auto whole = trunc_expect(law, 1, h, Rectangle(lo, hi), p);
        const auto left = trunc_expect(law, 1, h, Rectangle(lo, mid_hi), p);
        const auto right = trunc_expect(law, 1, h, Rectangle(mid_lo, hi), p);
        EXPECT_NEAR(left.values[0] + right.values[0], whole.values[0], 2.0 * p.rel_tol * whole.values[0]);
    }
}

TEST(Quad, Monotonicity) {
    const SkewFunction skew(SkewKind::LogisticCdf, vec({1.0, -0.5}));
    double prev = 0.0;
    for (double w : {0.1, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double p = rect_prob_gse(GeneratorFamily::laplace(), skew, Rectangle(vec({-w, -w}), vec({w, w})), IntegrationPlan{}).values[0];
        EXPECT_GE(p, prev - 1e-10);
        prev = p;
    }
}

TEST(Quad, LowDiscrepancyDeterministicPerSeed) {
    const SkewFunction skew(SkewKind::NormalCdf, vec({0.2, 0.1, -0.3, 0.4, 0.1}));
    const Rectangle r(vec({-0.5, -1.0, 0.0, -kInf, 0.3}), vec({kInf, 1.0, 2.0, 0.5, kInf}));
    IntegrationPlan p;
    p.seed = 7;
    const auto a = rect_prob_gse(GeneratorFamily::normal(), skew, r, p);
    const auto b = rect_prob_gse(GeneratorFamily::normal(), skew, r, p);
    EXPECT_EQ(a.values[0], b.values[0]);
    EXPECT_EQ(a.method, QuadMethod::LowDiscrepancy);
    p.seed = 8;
    const auto c = rect_prob_gse(GeneratorFamily::normal(), skew, r, p);
    EXPECT_NE(a.values[0], c.values[0]);
    EXPECT_NEAR(a.values[0], c.values[0], 3.0 * (a.error + c.error));
}

TEST(Quad, TensorAndLowDiscrepancyAgree) {
    const SkewFunction skew(SkewKind::StudentTCdf, vec({0.7, -0.4, 1.1}), 5.0);
    const Rectangle r(vec({-0.8, -kInf, 0.1}), vec({1.5, 0.9, kInf}));
    IntegrationPlan t, q;
    t.method = QuadMethod::Tensor;
    q.method = QuadMethod::LowDiscrepancy;
    const auto a = rect_prob_gse(GeneratorFamily::logistic(), skew, r, t);
    const auto b = rect_prob_gse(GeneratorFamily::logistic(), skew, r, q);
    EXPECT_NEAR(a.values[0], b.values[0], 2e-5 * a.values[0]);
}

TEST(Quad, BudgetExceededCarriesEstimate) {
    const SkewFunction skew(SkewKind::NormalCdf, vec({0.2, 0.1, -0.3, 0.4, 0.1}));
    IntegrationPlan p;
    p.rel_tol = 1e-13;
    p.node_budget = 1 << 17;
    try {
        rect_prob_gse(GeneratorFamily::normal(), skew, Rectangle(Vector::Constant(5, 0.2), Vector::Constant(5, kInf)), p);
        FAIL() << "expected budget failure";
    } catch (const BudgetExceeded& e) {
        ASSERT_EQ(e.estimate().size(), 1u);
        EXPECT_GT(e.estimate()[0], 0.0);
        EXPECT_GT(e.error_bound(), 0.0);
    }
}

TEST(Quad, CoordinateInsert) {
    const Pin p1[] = {{0, 5.0}};
    EXPECT_EQ(coordinate_insert(Vector(0), p1, 1), vec({5.0}));
    const Pin p2[] = {{1, 9.0}};
    EXPECT_EQ(coordinate_insert(vec({2.0, 3.0}), p2, 3), vec({2.0, 9.0, 3.0}));
    const Pin p3[] = {{0, 0.0}, {4, 0.0}};
    EXPECT_EQ(coordinate_insert(vec({1.0, 2.0, 3.0}), p3, 5), vec({0.0, 1.0, 2.0, 3.0, 0.0}));
    EXPECT_EQ(free_indices(5, p3), (std::vector<std::size_t>{1, 2, 3}));
    const Pin dup[] = {{1, 0.0}, {1, 1.0}};
    EXPECT_THROW(coordinate_insert(vec({1.0}), dup, 3), ValidationError);
}

TEST(Quad, RectangleValidation) {
    EXPECT_THROW(Rectangle(vec({1.0}), vec({1.0})), ValidationError);
    EXPECT_THROW(Rectangle(vec({kInf}), vec({kInf})), ValidationError);
    EXPECT_THROW(Rectangle(vec({0.0, NAN}), vec({1.0, 1.0})), ValidationError);
    const Rectangle r(vec({0.0, 1.0, 2.0}), vec({5.0, 6.0, 7.0}));
    const std::size_t ax[] = {1};
    const Rectangle d = r.drop(ax);
    EXPECT_EQ(d.lower(), vec({0.0, 2.0}));
    EXPECT_EQ(d.upper(), vec({5.0, 7.0}));
}
