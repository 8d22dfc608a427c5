#pragma once

// Exponential-family models p(x; theta) = exp{C(x) + sum_i theta_i F_i(x) - phi(theta)}
// given in natural coordinates, together with the chart maps for normal models.

#include "infogeo/derivatives.hpp"
#include "infogeo/errors.hpp"
#include "infogeo/scalar_field.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace infogeo {

/// Facts about a model that are taken as given rather than computed.
struct ModelMetadata
{
    bool simply_connected = true;
    /// Exponential families never carry a Kaehler structure for the Levi-Civita connection.
    bool admits_kaehler = false;
    std::optional<bool> symmetric_space_known;

    bool operator==(const ModelMetadata&) const = default;
};

/// Mean vector and covariance matrix of a d-variate normal distribution.
struct MeanCovariancePoint
{
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
};

/// Draws one sample x into the output span.
using DrawFn = std::function<void(std::mt19937_64&, std::span<double>)>;

struct ExponentialFamilyModel
{
    std::string name;
    std::size_t n = 0;
    ScalarField potential;
    std::size_t sample_dimension = 0;
    std::function<double(std::span<const double>)> carrier;
    std::function<void(std::span<const double> x, std::span<double> stats)> statistics;
    /// Binds a parameter value and returns a sampler for it.
    std::function<DrawFn(std::span<const double> theta)> make_sampler;
    /// Reproducible in-domain parameter points for property checks.
    std::function<std::vector<Eigen::VectorXd>(std::size_t count, std::uint64_t seed)> sample_points;
    ModelMetadata metadata;
    /// d for the normal family N^d.
    std::optional<int> normal_dimension;

    bool has_sampler() const noexcept { return static_cast<bool>(make_sampler) && static_cast<bool>(statistics); }
};

inline std::span<const double> as_span(const Eigen::VectorXd& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

// ---------------------------------------------------------------------------
// Normal distributions N^d
// ---------------------------------------------------------------------------

/// Manifold dimension d(d+3)/2 of N^d.
constexpr std::size_t normal_manifold_dimension(int d) noexcept
{
    return static_cast<std::size_t>(d * (d + 3) / 2);
}

namespace detail {

inline void require_normal_dimension(int d)
{
    if (d < 1 || d > 3)
        throw UnsupportedDimension("normal models are provided for d = 1, 2, 3 (got " + std::to_string(d) + ")");
}

/// Position of the natural parameter paired with x_i x_j (i <= j); row-major upper triangle after the d linear ones.
inline std::size_t quadratic_slot(int d, int i, int j)
{
    if (i > j)
        std::swap(i, j);
    std::size_t slot = static_cast<std::size_t>(d);
    for (int r = 0; r < i; ++r)
        slot += static_cast<std::size_t>(d - r);
    return slot + static_cast<std::size_t>(j - i);
}

/// Precision matrix P = Sigma^{-1} as a function of theta: x_i^2 carries -P_ii / 2, x_i x_j carries -P_ij.
template <class T>
std::array<std::array<T, 3>, 3> precision_from_natural(std::span<const T> th, int d)
{
    std::array<std::array<T, 3>, 3> p{};
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            const T& t = th[quadratic_slot(d, i, j)];
            if (i == j)
                p[i][i] = -2.0 * t;
            else
                p[i][j] = p[j][i] = -t;
        }
    return p;
}

template <class T>
T determinant(const std::array<std::array<T, 3>, 3>& m, int d)
{
    if (d == 1)
        return m[0][0];
    if (d == 2)
        return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// b^T adj(M) b for symmetric M.
template <class T>
T adjugate_form(const std::array<std::array<T, 3>, 3>& m, std::span<const T> b, int d)
{
    if (d == 1)
        return b[0] * b[0];
    if (d == 2)
        return m[1][1] * b[0] * b[0] - 2.0 * m[0][1] * b[0] * b[1] + m[0][0] * b[1] * b[1];
    const T a00 = m[1][1] * m[2][2] - m[1][2] * m[1][2];
    const T a11 = m[0][0] * m[2][2] - m[0][2] * m[0][2];
    const T a22 = m[0][0] * m[1][1] - m[0][1] * m[0][1];
    const T a01 = m[0][2] * m[1][2] - m[0][1] * m[2][2];
    const T a02 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    const T a12 = m[0][1] * m[0][2] - m[0][0] * m[1][2];
    return a00 * b[0] * b[0] + a11 * b[1] * b[1] + a22 * b[2] * b[2] +
           2.0 * (a01 * b[0] * b[1] + a02 * b[0] * b[2] + a12 * b[1] * b[2]);
}

} // namespace detail

/// Log-partition of N^d from the general natural parametrization:
/// phi = b^T P^{-1} b / 2 - log det P / 2 + (d/2) log 2 pi, with b the linear parameters.
template <class T>
T normal_potential(std::span<const T> th, int d)
{
    using std::log;
    const auto p = detail::precision_from_natural(th, d);
    const T det = detail::determinant(p, d);
    const T form = detail::adjugate_form(p, th.first(static_cast<std::size_t>(d)), d);
    return 0.5 * form / det - 0.5 * log(det) + 0.5 * d * std::log(2.0 * std::numbers::pi);
}

/// Closed form of the N^2 potential in its own notation:
/// phi = log(2 pi sqrt(D)) - D (t2^2 t3 - t1 t2 t4 + t1^2 t5), D = 1 / (4 t3 t5 - t4^2).
template <class T>
T bivariate_normal_potential(std::span<const T> t)
{
    using std::log;
    using std::sqrt;
    const T delta = 1.0 / (4.0 * t[2] * t[4] - t[3] * t[3]);
    return log(2.0 * std::numbers::pi * sqrt(delta)) - delta * (t[1] * t[1] * t[2] - t[0] * t[1] * t[3] + t[0] * t[0] * t[4]);
}

inline Domain normal_domain(int d)
{
    detail::require_normal_dimension(d);
    const std::size_t n = normal_manifold_dimension(d);
    std::vector<Interval> box(n);
    for (int i = 0; i < d; ++i)
        box[detail::quadratic_slot(d, i, i)].upper = 0.0;
    std::vector<NamedConstraint> constraints;
    for (int k = 2; k <= d; ++k) {
        constraints.push_back({"leading minor " + std::to_string(k) + " of the precision matrix is positive",
                               [d, k](std::span<const double> th) {
                                   return detail::determinant(detail::precision_from_natural(th, d), k);
                               }});
    }
    return Domain(std::move(box), std::move(constraints));
}

inline Eigen::VectorXd natural_from_meancov(int d, const MeanCovariancePoint& point)
{
    detail::require_normal_dimension(d);
    if (point.mu.size() != d || point.sigma.rows() != d || point.sigma.cols() != d)
        throw InvalidArgument("mean/covariance shape does not match d");
    if ((point.sigma - point.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + point.sigma.cwiseAbs().maxCoeff()))
        throw NotPositiveDefinite("covariance matrix is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(point.sigma);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("covariance matrix is not positive definite");
    const Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::VectorXd b = p * point.mu;
    Eigen::VectorXd th(static_cast<Eigen::Index>(normal_manifold_dimension(d)));
    for (int i = 0; i < d; ++i)
        th(i) = b(i);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            th(static_cast<Eigen::Index>(detail::quadratic_slot(d, i, j))) = (i == j) ? -0.5 * p(i, i) : -p(i, j);
    return th;
}

inline MeanCovariancePoint meancov_from_natural(int d, std::span<const double> th)
{
    detail::require_normal_dimension(d);
    if (th.size() != normal_manifold_dimension(d))
        throw InvalidArgument("natural parameter vector has the wrong length");
    normal_domain(d).check(th);
    const auto pa = detail::precision_from_natural(th, d);
    Eigen::MatrixXd p(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            p(i, j) = pa[i][j];
    Eigen::LLT<Eigen::MatrixXd> llt(p);
    if (llt.info() != Eigen::Success)
        throw DomainError("precision matrix is not positive definite");
    MeanCovariancePoint out;
    out.sigma = llt.solve(Eigen::MatrixXd::Identity(d, d));
    out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
    Eigen::VectorXd b(d);
    for (int i = 0; i < d; ++i)
        b(i) = th[static_cast<std::size_t>(i)];
    out.mu = out.sigma * b;
    return out;
}

namespace detail {

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(int d, std::mt19937_64& rng)
{
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            a(i, j) = z(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0.0)
            q.col(j) *= -1.0;
    return q;
}

} // namespace detail

/// Compact sampling region for N^d: mu in [-2, 2]^d, covariance eigenvalues in [0.3, 3], random orientation.
inline MeanCovariancePoint random_meancov(int d, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> mean(-2.0, 2.0);
    std::uniform_real_distribution<double> eig(0.3, 3.0);
    MeanCovariancePoint p;
    p.mu.resize(d);
    for (int i = 0; i < d; ++i)
        p.mu(i) = mean(rng);
    Eigen::VectorXd lambda(d);
    for (int i = 0; i < d; ++i)
        lambda(i) = eig(rng);
    const Eigen::MatrixXd q = detail::random_rotation(d, rng);
    p.sigma = q * lambda.asDiagonal() * q.transpose();
    p.sigma = 0.5 * (p.sigma + p.sigma.transpose());
    return p;
}

inline ExponentialFamilyModel normal_model(int d)
{
    detail::require_normal_dimension(d);
    ExponentialFamilyModel m;
    m.name = "normal-" + std::to_string(d);
    m.n = normal_manifold_dimension(d);
    if (d == 2) {
        m.potential = ScalarField::from_generic(m.n, normal_domain(d), [](auto x) {
            return bivariate_normal_potential<scalar_of<decltype(x)>>(x);
        });
    } else {
        m.potential = ScalarField::from_generic(m.n, normal_domain(d), [d](auto x) {
            return normal_potential<scalar_of<decltype(x)>>(x, d);
        });
    }
    m.sample_dimension = static_cast<std::size_t>(d);
    m.carrier = [](std::span<const double>) { return 0.0; };
    m.statistics = [d](std::span<const double> x, std::span<double> f) {
        for (int i = 0; i < d; ++i)
            f[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                f[detail::quadratic_slot(d, i, j)] = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
    };
    m.make_sampler = [d](std::span<const double> theta) -> DrawFn {
        const auto mc = meancov_from_natural(d, theta);
        const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(mc.sigma).matrixL();
        const Eigen::VectorXd mu = mc.mu;
        return [d, l, mu](std::mt19937_64& rng, std::span<double> out) {
            std::normal_distribution<double> z;
            Eigen::VectorXd e(d);
            for (int i = 0; i < d; ++i)
                e(i) = z(rng);
            const Eigen::VectorXd x = mu + l * e;
            for (int i = 0; i < d; ++i)
                out[static_cast<std::size_t>(i)] = x(i);
        };
    };
    m.sample_points = [d](std::size_t count, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<Eigen::VectorXd> pts;
        for (std::size_t k = 0; k < count; ++k)
            pts.push_back(natural_from_meancov(d, random_meancov(d, rng)));
        return pts;
    };
    m.metadata.simply_connected = true;
    m.metadata.admits_kaehler = false;
    if (d == 1)
        m.metadata.symmetric_space_known = true;
    m.normal_dimension = d;
    return m;
}

// ---------------------------------------------------------------------------
// Other families
// ---------------------------------------------------------------------------

namespace detail {

inline std::function<std::vector<Eigen::VectorXd>(std::size_t, std::uint64_t)> box_points(
    std::vector<std::pair<double, double>> box)
{
    return [box = std::move(box)](std::size_t count, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<Eigen::VectorXd> pts;
        for (std::size_t k = 0; k < count; ++k) {
            Eigen::VectorXd p(static_cast<Eigen::Index>(box.size()));
            for (std::size_t i = 0; i < box.size(); ++i)
                p(static_cast<Eigen::Index>(i)) = std::uniform_real_distribution<double>(box[i].first, box[i].second)(rng);
            pts.push_back(p);
        }
        return pts;
    };
}

} // namespace detail

/// Fixed-variance Gaussian N(theta, I_n): phi = |theta|^2 / 2, a flat manifold.
inline ExponentialFamilyModel flat_model(std::size_t n = 2)
{
    if (n == 0)
        throw UnsupportedDimension("flat model needs n >= 1");
    ExponentialFamilyModel m;
    m.name = n == 2 ? "flat-toy" : "flat-toy-" + std::to_string(n);
    m.n = n;
    m.potential = ScalarField::from_generic(n, Domain::unbounded(n), [](auto x) {
        scalar_of<decltype(x)> acc = 0.0;
        for (const auto& v : x)
            acc += 0.5 * v * v;
        return acc;
    });
    m.sample_dimension = n;
    m.carrier = [n](std::span<const double> x) {
        double s = 0.0;
        for (double v : x)
            s += v * v;
        return -0.5 * s - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    };
    m.statistics = [](std::span<const double> x, std::span<double> f) { std::copy(x.begin(), x.end(), f.begin()); };
    m.make_sampler = [](std::span<const double> theta) -> DrawFn {
        std::vector<double> mean(theta.begin(), theta.end());
        return [mean](std::mt19937_64& rng, std::span<double> out) {
            std::normal_distribution<double> z;
            for (std::size_t i = 0; i < mean.size(); ++i)
                out[i] = mean[i] + z(rng);
        };
    };
    m.sample_points = detail::box_points(std::vector<std::pair<double, double>>(n, {-2.0, 2.0}));
    m.metadata.symmetric_space_known = true;
    return m;
}

/// Bernoulli: F(x) = x on {0, 1}, phi = log(1 + e^theta).
inline ExponentialFamilyModel bernoulli_model()
{
    ExponentialFamilyModel m;
    m.name = "bernoulli";
    m.n = 1;
    m.potential = ScalarField::from_generic(1, Domain::unbounded(1), [](auto x) {
        using std::exp;
        using std::log;
        return log(1.0 + exp(x[0]));
    });
    m.sample_dimension = 1;
    m.carrier = [](std::span<const double>) { return 0.0; };
    m.statistics = [](std::span<const double> x, std::span<double> f) { f[0] = x[0]; };
    m.make_sampler = [](std::span<const double> theta) -> DrawFn {
        const double p = 1.0 / (1.0 + std::exp(-theta[0]));
        return [p](std::mt19937_64& rng, std::span<double> out) {
            out[0] = std::bernoulli_distribution(p)(rng) ? 1.0 : 0.0;
        };
    };
    m.sample_points = detail::box_points({{-2.0, 2.0}});
    return m;
}

/// Poisson: F(x) = x, C(x) = -log x!, phi = e^theta.
inline ExponentialFamilyModel poisson_model()
{
    ExponentialFamilyModel m;
    m.name = "poisson";
    m.n = 1;
    m.potential = ScalarField::from_generic(1, Domain::unbounded(1), [](auto x) {
        using std::exp;
        return exp(x[0]);
    });
    m.sample_dimension = 1;
    m.carrier = [](std::span<const double> x) { return -std::lgamma(x[0] + 1.0); };
    m.statistics = [](std::span<const double> x, std::span<double> f) { f[0] = x[0]; };
    m.make_sampler = [](std::span<const double> theta) -> DrawFn {
        const double mean = std::exp(theta[0]);
        return [mean](std::mt19937_64& rng, std::span<double> out) {
            out[0] = static_cast<double>(std::poisson_distribution<long>(mean)(rng));
        };
    };
    m.sample_points = detail::box_points({{-1.0, 1.5}});
    return m;
}

/// Gamma with fixed shape k: theta = -rate < 0, F(x) = x, phi = -k log(-theta).
inline ExponentialFamilyModel gamma_model(double shape = 2.0)
{
    if (!(shape > 0.0))
        throw InvalidArgument("gamma shape must be positive");
    ExponentialFamilyModel m;
    m.name = "gamma";
    m.n = 1;
    m.potential = ScalarField::from_generic(1, Domain({Interval{-std::numeric_limits<double>::infinity(), 0.0}}),
                                            [shape](auto x) {
                                                using std::log;
                                                return -shape * log(-x[0]);
                                            });
    m.sample_dimension = 1;
    m.carrier = [shape](std::span<const double> x) { return (shape - 1.0) * std::log(x[0]) - std::lgamma(shape); };
    m.statistics = [](std::span<const double> x, std::span<double> f) { f[0] = x[0]; };
    m.make_sampler = [shape](std::span<const double> theta) -> DrawFn {
        const double scale = -1.0 / theta[0];
        return [shape, scale](std::mt19937_64& rng, std::span<double> out) {
            out[0] = std::gamma_distribution<double>(shape, scale)(rng);
        };
    };
    m.sample_points = detail::box_points({{-3.0, -0.3}});
    return m;
}

inline std::vector<std::string> model_names()
{
    return {"normal-1", "normal-2", "normal-3", "flat-toy", "bernoulli", "poisson", "gamma"};
}

/// Registry lookup. Also accepts "flat-toy-<n>".
inline ExponentialFamilyModel make_model(const std::string& name)
{
    if (name == "normal-1")
        return normal_model(1);
    if (name == "normal-2")
        return normal_model(2);
    if (name == "normal-3")
        return normal_model(3);
    if (name == "flat-toy")
        return flat_model(2);
    if (name.rfind("flat-toy-", 0) == 0) {
        const auto digits = name.substr(9);
        if (digits.empty() || digits.size() > 3 || !std::all_of(digits.begin(), digits.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; }))
            throw UnknownModel("unknown model '" + name + "'");
        return flat_model(std::stoul(digits));
    }
    if (name == "bernoulli")
        return bernoulli_model();
    if (name == "poisson")
        return poisson_model();
    if (name == "gamma")
        return gamma_model(2.0);
    throw UnknownModel("unknown model '" + name + "'");
}

// ---------------------------------------------------------------------------
// Densities and sampling
// ---------------------------------------------------------------------------

/// log p(x; theta) = C(x) + sum theta_i F_i(x) - phi(theta).
inline double log_density(const ExponentialFamilyModel& model, std::span<const double> x, std::span<const double> theta)
{
    if (!model.statistics || !model.carrier)
        throw Unsupported("model '" + model.name + "' has no sufficient statistics");
    model.potential.domain().check(theta);
    std::vector<double> f(model.n);
    model.statistics(x, f);
    double s = model.carrier(x);
    for (std::size_t i = 0; i < model.n; ++i)
        s += theta[i] * f[i];
    return s - model.potential(theta);
}

/// `count` i.i.d. draws, one per row; identical output for identical seeds.
inline Eigen::MatrixXd sample(const ExponentialFamilyModel& model, std::span<const double> theta, std::size_t count,
                              std::uint64_t seed)
{
    if (!model.has_sampler())
        throw Unsupported("model '" + model.name + "' has no sampler");
    if (count == 0)
        throw InvalidArgument("sample count must be at least 1");
    model.potential.domain().check(theta);
    auto draw = model.make_sampler(theta);
    std::mt19937_64 rng(seed);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(
        static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(model.sample_dimension));
    for (std::size_t k = 0; k < count; ++k)
        draw(rng, std::span<double>(out.row(static_cast<Eigen::Index>(k)).data(), model.sample_dimension));
    return out;
}

} // namespace infogeo
