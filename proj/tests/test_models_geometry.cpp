#include "infogeo/geometry.hpp"
#include "infogeo/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace infogeo;

namespace {

Eigen::VectorXd n1_point(double mu, double sigma)
{
    return natural_from_meancov(1, {Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, sigma * sigma)});
}

// Covariance of the sufficient statistics (x, x^2) under N(mu, s2), written out by moments.
Eigen::Matrix2d n1_metric_oracle(double mu, double s2)
{
    Eigen::Matrix2d g;
    g << s2, 2 * mu * s2, 2 * mu * s2, 2 * s2 * (2 * mu * mu + s2);
    return g;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST(ModelZoo, RegistryResolvesEveryName)
{
    for (const auto& name : model_names()) {
        const auto m = make_model(name);
        EXPECT_EQ(m.name, name);
        ASSERT_TRUE(m.sample_points);
        for (const auto& p : m.sample_points(5, 1))
            EXPECT_TRUE(m.potential.domain().contains(as_span(p))) << name;
    }
    EXPECT_EQ(make_model("flat-toy-4").n, 4u);
    EXPECT_THROW(make_model("flat-toy-x"), UnknownModel);
    EXPECT_THROW(make_model("flat-toy-"), UnknownModel);
    EXPECT_THROW(make_model("normal-4"), UnknownModel);
    EXPECT_THROW(normal_model(4), UnsupportedDimension);
}

TEST(ModelZoo, NormalDimensionsFollowTheFormula)
{
    for (int d = 1; d <= 3; ++d)
        EXPECT_EQ(normal_model(d).n, static_cast<std::size_t>(d * (d + 3) / 2));
}

TEST(ModelZoo, ChartRoundTrip)
{
    std::mt19937_64 rng(5);
    for (int d = 1; d <= 3; ++d)
        for (int k = 0; k < 20; ++k) {
            const auto mc = random_meancov(d, rng);
            const auto th = natural_from_meancov(d, mc);
            const auto back = meancov_from_natural(d, as_span(th));
            EXPECT_LT((back.mu - mc.mu).norm(), 1e-10);
            EXPECT_LT((back.sigma - mc.sigma).norm(), 1e-10);
        }
}

TEST(ModelZoo, NormalDomainRejectsIndefiniteCovariance)
{
    const auto m = normal_model(2);
    Eigen::VectorXd bad(5);
    bad << 0, 0, -0.5, 2.0, -0.5; // precision [[1, -2], [-2, 1]] is indefinite
    EXPECT_FALSE(m.potential.domain().contains(as_span(bad)));
    EXPECT_THROW(fisher_metric(m, as_span(bad)), DomainError);
    Eigen::MatrixXd s(2, 2);
    s << 1, 2, 2, 1;
    EXPECT_THROW(natural_from_meancov(2, {Eigen::VectorXd::Zero(2), s}), NotPositiveDefinite);
}

TEST(ModelZoo, LogDensityMatchesTheNormalFormula)
{
    const auto m = normal_model(1);
    const double mu = 0.7, sigma = 1.4, x = -0.3;
    const auto th = n1_point(mu, sigma);
    const std::array<double, 1> xs{x};
    const double expected =
        -0.5 * std::log(2 * std::numbers::pi * sigma * sigma) - (x - mu) * (x - mu) / (2 * sigma * sigma);
    EXPECT_NEAR(log_density(m, xs, as_span(th)), expected, 1e-13);
}

TEST(ModelZoo, SamplingIsReproducible)
{
    const auto m = normal_model(2);
    const auto th = m.sample_points(1, 3).front();
    EXPECT_EQ(sample(m, as_span(th), 50, 9), sample(m, as_span(th), 50, 9));
    EXPECT_NE(sample(m, as_span(th), 50, 9), sample(m, as_span(th), 50, 10));
}

TEST(FisherMetric, N1AtStandardNormal)
{
    const auto th = n1_point(0.0, 1.0);
    Eigen::Matrix2d expected;
    expected << 1, 0, 0, 2;
    EXPECT_LT(max_abs(fisher_metric(normal_model(1), as_span(th)) - expected), 1e-10);
}

TEST(FisherMetric, N1MatchesMomentOracleAtRandomPoints)
{
    const auto m = normal_model(1);
    for (const auto& p : m.sample_points(100, 17)) {
        const auto mc = meancov_from_natural(1, as_span(p));
        const Eigen::Matrix2d oracle = n1_metric_oracle(mc.mu(0), mc.sigma(0, 0));
        EXPECT_LT(max_abs(fisher_metric(m, as_span(p)) - oracle) / max_abs(oracle), 1e-9);
    }
}

TEST(FisherMetric, OneParameterFamiliesMatchTheirVariances)
{
    const std::array<double, 1> t{0.4};
    const double p = 1.0 / (1.0 + std::exp(-t[0]));
    EXPECT_NEAR(fisher_metric(bernoulli_model(), t)(0, 0), p * (1 - p), 1e-14);
    EXPECT_NEAR(fisher_metric(poisson_model(), t)(0, 0), std::exp(t[0]), 1e-14);
    const std::array<double, 1> r{-1.5};
    EXPECT_NEAR(fisher_metric(gamma_model(2.0), r)(0, 0), 2.0 / (r[0] * r[0]), 1e-14);
}

TEST(FisherMetric, SymmetricAndPositiveDefiniteAcrossTheZoo)
{
    for (const auto& name : model_names()) {
        const auto m = make_model(name);
        for (const auto& p : m.sample_points(10, 4)) {
            const auto g = fisher_metric(m, as_span(p));
            EXPECT_EQ(max_abs(g - g.transpose()), 0.0) << name;
            EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff(), 0.0) << name;
        }
    }
}

TEST(FisherMetric, FlatModelIsTheIdentity)
{
    const auto m = flat_model(3);
    for (const auto& p : m.sample_points(5, 2))
        EXPECT_LT(max_abs(fisher_metric(m, as_span(p)) - Eigen::MatrixXd::Identity(3, 3)), 1e-15);
}

TEST(SkewnessTensor, N1MatchesThirdCumulantsOfTheStatistics)
{
    // Third central moments of (x, x^2) under N(mu, s2).
    const double mu = -0.6, sigma = 0.8, s2 = sigma * sigma;
    const auto T = skewness_tensor(normal_model(1), as_span(n1_point(mu, sigma)));
    EXPECT_NEAR(T(0, 0, 0), 0.0, 1e-12);
    EXPECT_NEAR(T(0, 0, 1), 2 * s2 * s2, 1e-12);
    EXPECT_NEAR(T(0, 1, 1), 8 * mu * s2 * s2, 1e-12);
    EXPECT_NEAR(T(1, 1, 1), 8 * s2 * s2 * (s2 + 3 * mu * mu), 1e-11);
    EXPECT_EQ(T(0, 1, 0), T(1, 0, 0));
}

TEST(Connection, LeviCivitaIsHalfTheThirdDerivative)
{
    const auto m = normal_model(2);
    const auto p = m.sample_points(1, 8).front();
    const auto lc = levi_civita(m, as_span(p));
    const auto T = skewness_tensor(m, as_span(p));
    for (std::size_t i = 0; i < T.size(); ++i)
        EXPECT_NEAR(lc.first.data()[i], 0.5 * T.data()[i], 1e-13);
    // Raising the last index recovers the first-kind symbols.
    const auto g = fisher_metric(m, as_span(p));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            for (std::size_t k = 0; k < 5; ++k) {
                double lowered = 0.0;
                for (std::size_t s = 0; s < 5; ++s)
                    lowered += g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)) * lc.second(s, i, j);
                EXPECT_NEAR(lowered, lc.first(i, j, k), 1e-11);
            }
}

TEST(Connection, AlphaConnectionShiftsBySkewness)
{
    const auto m = normal_model(1);
    const auto p = n1_point(0.3, 1.2);
    const auto a0 = alpha_connection(m, as_span(p), 0.0);
    const auto a1 = alpha_connection(m, as_span(p), 0.6);
    const auto T = skewness_tensor(m, as_span(p));
    for (std::size_t i = 0; i < T.size(); ++i)
        EXPECT_NEAR(a1.data()[i], a0.data()[i] - 0.3 * T.data()[i], 1e-13);
    // alpha = 1 is flat in natural coordinates: the exponential connection vanishes.
    EXPECT_LT(alpha_connection(m, as_span(p), 1.0).max_abs(), 1e-13);
}

TEST(Curvature, N1HasConstantCurvatureMinusOneHalf)
{
    const auto m = normal_model(1);
    for (const auto& p : m.sample_points(100, 21)) {
        const auto b = curvature_bundle(m, as_span(p));
        EXPECT_NEAR(b.K(0, 1), -0.5, 1e-8);
        EXPECT_LT(max_abs(b.ricci + 0.5 * b.g), 1e-8 * max_abs(b.g));
        EXPECT_NEAR(b.scalar, -1.0, 1e-8);
    }
    // R_1212 = K det g; det g = 2 at the standard normal.
    const auto b = curvature_bundle(m, as_span(n1_point(0.0, 1.0)));
    EXPECT_NEAR(b.riemann(0, 1, 0, 1), -1.0, 1e-12);
}

TEST(Curvature, AlgebraicSymmetriesHold)
{
    for (int d = 1; d <= 3; ++d) {
        const auto m = normal_model(d);
        for (const auto& p : m.sample_points(4, 12)) {
            const auto b = curvature_bundle(m, as_span(p));
            const auto r = riemann_symmetry_residuals(b.riemann);
            const double scale = std::max(1.0, b.riemann.max_abs()) * 1e-11;
            EXPECT_LT(r.antisym_ij, scale);
            EXPECT_LT(r.antisym_kl, scale);
            EXPECT_LT(r.pair_exchange, scale);
            EXPECT_LT(r.bianchi, scale);
            EXPECT_LT(max_abs(b.ricci - b.ricci.transpose()), 1e-10);
            EXPECT_LT(b.K.diagonal().cwiseAbs().maxCoeff(), 1e-15);
        }
    }
}

TEST(Curvature, RicciIsTheTraceOfRiemann)
{
    const auto m = normal_model(2);
    const auto p = m.sample_points(1, 30).front();
    const auto b = curvature_bundle(m, as_span(p));
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t l = 0; l < 5; ++l) {
            double s = 0.0;
            for (std::size_t i = 0; i < 5; ++i)
                for (std::size_t k = 0; k < 5; ++k)
                    s += b.g_inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * b.riemann(i, j, k, l);
            EXPECT_NEAR(b.ricci(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)), s, 1e-11);
        }
    EXPECT_NEAR(b.scalar, (b.g_inv.array() * b.ricci.array()).sum(), 1e-11);
}

TEST(Curvature, AlphaFamilyScalesByOneMinusAlphaSquared)
{
    const auto m = normal_model(2);
    for (const auto& p : m.sample_points(5, 40)) {
        const auto b0 = curvature_bundle(m, as_span(p), 0.0);
        for (double alpha : {0.25, 0.5, 0.9}) {
            const auto bp = curvature_bundle(m, as_span(p), alpha);
            const auto bm = curvature_bundle(m, as_span(p), -alpha);
            const double s = 1.0 - alpha * alpha;
            EXPECT_LT(max_abs(bp.K - bm.K), 1e-10);
            EXPECT_LT(max_abs(bp.K - s * b0.K), 1e-10);
            EXPECT_LT(max_abs(bp.ricci - s * b0.ricci), 1e-9 * std::max(1.0, max_abs(b0.ricci)));
        }
        EXPECT_LT(curvature_bundle(m, as_span(p), 1.0).riemann.max_abs(), 1e-9);
    }
}

TEST(Curvature, CurvatureIsInvariantUnderAffineReparametrisation)
{
    // phi(A u + c) is the same manifold in other coordinates. Scalar curvature is invariant,
    // and since N1 has constant curvature every coordinate plane keeps K = -1/2.
    const auto base = normal_model(1);
    Eigen::Matrix2d A;
    A << 2.0, 0.5, -0.3, 1.0;
    const Eigen::Vector2d c(0.1, -0.9);
    const auto pulled = ScalarField::from_generic(2, Domain::unbounded(2), [A, c](auto u) {
        using T = scalar_of<decltype(u)>;
        std::array<T, 2> th{T(c(0)) + A(0, 0) * u[0] + A(0, 1) * u[1], T(c(1)) + A(1, 0) * u[0] + A(1, 1) * u[1]};
        using std::log;
        return -th[0] * th[0] / (4.0 * th[1]) + 0.5 * log(-std::numbers::pi / th[1]);
    });
    ExponentialFamilyModel m;
    m.name = "affine";
    m.n = 2;
    m.potential = pulled;
    const Eigen::Vector2d u(0.2, 0.3);
    const Eigen::Vector2d th = A * u + c;
    const auto b = curvature_bundle(m, as_span(Eigen::VectorXd(u)));
    const auto ref = curvature_bundle(base, as_span(Eigen::VectorXd(th)));
    EXPECT_NEAR(b.scalar, ref.scalar, 1e-10);
    EXPECT_NEAR(b.K(0, 1), -0.5, 1e-10);
}

TEST(Curvature, FlatAndOneDimensionalModels)
{
    const auto f = flat_model(3);
    const auto p = f.sample_points(1, 1).front();
    EXPECT_EQ(curvature_bundle(f, as_span(p)).riemann.max_abs(), 0.0);
    const std::array<double, 1> t{0.2};
    const auto b = curvature_bundle(poisson_model(), t);
    EXPECT_EQ(b.riemann.max_abs(), 0.0);
    EXPECT_EQ(b.K(0, 0), 0.0);
}

TEST(MonteCarlo, MetricAndSkewnessWithinFourStandardErrors)
{
    for (const auto& name : {"normal-1", "bernoulli", "poisson", "gamma"}) {
        const auto m = make_model(name);
        for (const auto& p : m.sample_points(2, 6)) {
            const auto g = fisher_metric(m, as_span(p));
            const auto mc = fisher_metric_mc(m, as_span(p), 200000, 77);
            for (Eigen::Index i = 0; i < g.rows(); ++i)
                for (Eigen::Index j = 0; j < g.cols(); ++j)
                    EXPECT_LE(std::abs(mc.mean(i, j) - g(i, j)), 4.0 * mc.standard_error(i, j)) << name;
            const auto T = skewness_tensor(m, as_span(p));
            const auto tm = skewness_tensor_mc(m, as_span(p), 200000, 78);
            for (std::size_t k = 0; k < T.size(); ++k)
                EXPECT_LE(std::abs(tm.mean.data()[k] - T.data()[k]), 4.0 * tm.standard_error.data()[k]) << name;
        }
    }
}

TEST(MonteCarlo, RequiresASampler)
{
    ExponentialFamilyModel m;
    m.name = "bare";
    m.n = 1;
    m.potential = ScalarField::from_generic(1, Domain::unbounded(1), [](auto x) { return x[0] * x[0]; });
    const std::array<double, 1> t{0.0};
    EXPECT_THROW(fisher_metric_mc(m, t, 100, 1), Unsupported);
}
