#pragma once

// Per-point differential geometry of an exponential family in natural coordinates.
//
// Index conventions used throughout:
//   gamma_first(i, j, k)  = <nabla_i d_j, d_k>      (lowered index last)
//   gamma_second(k, i, j) = Gamma^k_ij             (nabla_i d_j = Gamma^k_ij d_k)
//   riemann(i, j, k, l)   = <R(d_i, d_j) d_l, d_k>  with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]
// so riemann(i, j, i, j) is the sectional numerator (positive on spheres) and
// the curvature endomorphism of the (i, j) plane has matrix g^{km} riemann(i, j, m, l).
//
// The Christoffel construction gives Gamma_ijk = d_i d_j d_k phi / 2 for an
// exponential family; some texts quote the same symbol without the factor 1/2.
// Only the halved form is compatible with the metric.

#include "infogeo/derivatives.hpp"
#include "infogeo/errors.hpp"
#include "infogeo/models.hpp"
#include "infogeo/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace infogeo {

/// Metric and skewness tensor with their first and second coordinate derivatives at a point.
struct GeometricJet
{
    Eigen::VectorXd point;
    Eigen::MatrixXd g;
    Tensor3 dg;  ///< dg(k, i, j) = d_k g_ij
    Tensor4 d2g; ///< d2g(k, l, i, j) = d_k d_l g_ij
    Tensor3 T;
    Tensor4 dT; ///< dT(m, i, j, k) = d_m T_ijk
};

struct CurvatureBundle
{
    Eigen::VectorXd point;
    double alpha = 0.0;
    Eigen::MatrixXd g;
    Eigen::MatrixXd g_inv;
    /// Coefficients of the alpha-connection; the Levi-Civita connection when alpha == 0.
    Tensor3 gamma_first;
    Tensor3 gamma_second;
    Tensor3 T;
    Tensor4 riemann;
    Eigen::MatrixXd K;
    Eigen::MatrixXd ricci;
    double scalar = 0.0;

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(g.rows()); }
};

/// Threshold on g_ii g_jj - g_ij^2 below which a coordinate plane is treated as degenerate.
inline constexpr double degenerate_plane_threshold = 1e-12;

namespace detail {

inline Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& g)
{
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("Fisher metric is not positive definite");
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
    return 0.5 * (inv + inv.transpose());
}

inline void require_point(const ExponentialFamilyModel& model, std::span<const double> theta)
{
    if (theta.size() != model.n)
        throw InvalidArgument("point dimension does not match model dimension");
}

} // namespace detail

/// Exponential-family identities: g = Hess phi, T = d^3 phi, so dg = T = d^3 phi and d2g = dT = d^4 phi.
inline GeometricJet geometric_jet(const ExponentialFamilyModel& model, std::span<const double> theta)
{
    detail::require_point(model, theta);
    const auto s = evaluate_stack(model.potential, theta, 4);
    GeometricJet j;
    j.point = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    j.g = s.order2;
    j.dg = s.order3;
    j.d2g = s.order4;
    j.T = s.order3;
    j.dT = s.order4;
    return j;
}

inline Eigen::MatrixXd fisher_metric(const ExponentialFamilyModel& model, std::span<const double> theta)
{
    detail::require_point(model, theta);
    const auto s = evaluate_stack(model.potential, theta, 2);
    detail::checked_inverse(s.order2);
    return s.order2;
}

inline Tensor3 skewness_tensor(const ExponentialFamilyModel& model, std::span<const double> theta)
{
    detail::require_point(model, theta);
    return evaluate_stack(model.potential, theta, 3).order3;
}

struct MonteCarloMatrix
{
    Eigen::MatrixXd mean;
    Eigen::MatrixXd standard_error;
};

struct MonteCarloTensor3
{
    Tensor3 mean;
    Tensor3 standard_error;
};

namespace detail {

/// Streams score vectors d_i l = F_i(x) - d_i phi(theta) of `count` draws into `visit`.
template <class Visit>
void for_each_score(const ExponentialFamilyModel& model, std::span<const double> theta, std::size_t count,
                    std::uint64_t seed, Visit visit)
{
    if (!model.has_sampler())
        throw Unsupported("model '" + model.name + "' has no sampler");
    if (count < 2)
        throw InvalidArgument("Monte Carlo estimates need at least two samples");
    const auto grad = evaluate_stack(model.potential, theta, 1).order1;
    auto draw = model.make_sampler(theta);
    std::mt19937_64 rng(seed);
    std::vector<double> x(model.sample_dimension);
    std::vector<double> f(model.n);
    std::vector<double> score(model.n);
    for (std::size_t k = 0; k < count; ++k) {
        draw(rng, x);
        model.statistics(x, f);
        for (std::size_t i = 0; i < model.n; ++i)
            score[i] = f[i] - grad(static_cast<Eigen::Index>(i));
        visit(std::span<const double>(score));
    }
}

} // namespace detail

/// Monte-Carlo estimate of E[(d_i l)(d_j l)] with per-entry standard errors.
inline MonteCarloMatrix fisher_metric_mc(const ExponentialFamilyModel& model, std::span<const double> theta,
                                         std::size_t count, std::uint64_t seed)
{
    detail::require_point(model, theta);
    model.potential.domain().check(theta);
    const auto n = static_cast<Eigen::Index>(model.n);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
    detail::for_each_score(model, theta, count, seed, [&](std::span<const double> s) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j) {
                const double p = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
                sum(i, j) += p;
                sum_sq(i, j) += p * p;
            }
    });
    const double c = static_cast<double>(count);
    MonteCarloMatrix out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const double mean = sum(i, j) / c;
            const double var = std::max(0.0, (sum_sq(i, j) / c - mean * mean) * c / (c - 1.0));
            out.mean(i, j) = out.mean(j, i) = mean;
            out.standard_error(i, j) = out.standard_error(j, i) = std::sqrt(var / c);
        }
    return out;
}

/// Monte-Carlo estimate of E[(d_i l)(d_j l)(d_k l)] with per-entry standard errors.
inline MonteCarloTensor3 skewness_tensor_mc(const ExponentialFamilyModel& model, std::span<const double> theta,
                                            std::size_t count, std::uint64_t seed)
{
    detail::require_point(model, theta);
    model.potential.domain().check(theta);
    const std::size_t n = model.n;
    Tensor3 sum(n), sum_sq(n);
    detail::for_each_score(model, theta, count, seed, [&](std::span<const double> s) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const double sij = s[i] * s[j];
                for (std::size_t k = j; k < n; ++k) {
                    const double p = sij * s[k];
                    sum(i, j, k) += p;
                    sum_sq(i, j, k) += p * p;
                }
            }
    });
    const double c = static_cast<double>(count);
    MonteCarloTensor3 out{Tensor3(n), Tensor3(n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            for (std::size_t k = j; k < n; ++k) {
                const double mean = sum(i, j, k) / c;
                const double var = std::max(0.0, (sum_sq(i, j, k) / c - mean * mean) * c / (c - 1.0));
                const double se = std::sqrt(var / c);
                const std::size_t perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
                for (const auto& p : perm) {
                    out.mean(p[0], p[1], p[2]) = mean;
                    out.standard_error(p[0], p[1], p[2]) = se;
                }
            }
    return out;
}

struct LeviCivita
{
    Tensor3 first;  ///< <nabla_i d_j, d_k>
    Tensor3 second; ///< Gamma^k_ij stored at (k, i, j)
};

namespace detail {

/// First-kind coefficients of the alpha-connection from metric derivatives and T.
inline Tensor3 connection_first(const Tensor3& dg, const Tensor3& T, double alpha)
{
    const std::size_t n = dg.extent();
    Tensor3 out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                out(i, j, k) = 0.5 * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j)) - 0.5 * alpha * T(i, j, k);
    return out;
}

inline Tensor3 raise_first(const Eigen::MatrixXd& g_inv, const Tensor3& first)
{
    const std::size_t n = first.extent();
    Tensor3 out(n);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    acc += g_inv(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) * first(i, j, k);
                out(s, i, j) = acc;
            }
    return out;
}

} // namespace detail

/// Riemann tensor of the alpha-connection, all indices lowered with g.
inline Tensor4 riemann_from_jet(const GeometricJet& jet, double alpha, const Eigen::MatrixXd& g_inv)
{
    const std::size_t n = jet.dg.extent();
    const auto G = [&](std::size_t a, std::size_t b) {
        return g_inv(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    };
    const Tensor3 first = detail::connection_first(jet.dg, jet.T, alpha);
    const Tensor3 second = detail::raise_first(g_inv, first);

    // d_m of the first-kind coefficients.
    Tensor4 dfirst(n);
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    dfirst(m, i, j, k) = 0.5 * (jet.d2g(m, i, j, k) + jet.d2g(m, j, i, k) - jet.d2g(m, k, i, j)) -
                                         0.5 * alpha * jet.dT(m, i, j, k);

    // d_m g^{ab} = -g^{ap} (d_m g_pq) g^{qb}
    Tensor3 dginv(n);
    for (std::size_t m = 0; m < n; ++m) {
        Eigen::MatrixXd dgm(n, n);
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
                dgm(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = jet.dg(m, p, q);
        const Eigen::MatrixXd d = -g_inv * dgm * g_inv;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                dginv(m, a, b) = d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }

    // d_m Gamma^s_ij
    Tensor4 dsecond(n);
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < n; ++k)
                        acc += dginv(m, s, k) * first(i, j, k) + G(s, k) * dfirst(m, i, j, k);
                    dsecond(m, s, i, j) = acc;
                }

    // R^s_{l i j} = d_i Gamma^s_jl - d_j Gamma^s_il + Gamma^s_ip Gamma^p_jl - Gamma^s_jp Gamma^p_il
    Tensor4 up(n);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = dsecond(i, s, j, l) - dsecond(j, s, i, l);
                    for (std::size_t p = 0; p < n; ++p)
                        acc += second(s, i, p) * second(p, j, l) - second(s, j, p) * second(p, i, l);
                    up(s, l, i, j) = acc;
                }

    Tensor4 r(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    double acc = 0.0;
                    for (std::size_t s = 0; s < n; ++s)
                        acc += jet.g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)) * up(s, l, i, j);
                    r(i, j, k, l) = acc;
                }
    return r;
}

inline LeviCivita levi_civita(const ExponentialFamilyModel& model, std::span<const double> theta)
{
    detail::require_point(model, theta);
    const auto s = evaluate_stack(model.potential, theta, 3);
    const Eigen::MatrixXd g_inv = detail::checked_inverse(s.order2);
    LeviCivita lc;
    lc.first = detail::connection_first(s.order3, s.order3, 0.0);
    lc.second = detail::raise_first(g_inv, lc.first);
    return lc;
}

/// Gamma^(alpha)_ijk = Gamma_ijk - (alpha / 2) T_ijk.
inline Tensor3 alpha_connection(const ExponentialFamilyModel& model, std::span<const double> theta, double alpha)
{
    detail::require_point(model, theta);
    const auto s = evaluate_stack(model.potential, theta, 3);
    detail::checked_inverse(s.order2);
    return detail::connection_first(s.order3, s.order3, alpha);
}

inline Tensor4 riemann_tensor(const ExponentialFamilyModel& model, std::span<const double> theta, double alpha)
{
    const auto jet = geometric_jet(model, theta);
    return riemann_from_jet(jet, alpha, detail::checked_inverse(jet.g));
}

/// K_ij = R_ijij / (g_ii g_jj - g_ij^2) on coordinate planes, zero diagonal.
inline Eigen::MatrixXd sectional_matrix(const CurvatureBundle& b)
{
    const auto n = static_cast<Eigen::Index>(b.dimension());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double area = b.g(i, i) * b.g(j, j) - b.g(i, j) * b.g(i, j);
            if (!(area > degenerate_plane_threshold))
                throw DegeneratePlane("coordinate plane (" + std::to_string(i) + ", " + std::to_string(j) +
                                      ") is degenerate");
            const auto u = static_cast<std::size_t>(i);
            const auto v = static_cast<std::size_t>(j);
            k(i, j) = k(j, i) = b.riemann(u, v, u, v) / area;
        }
    return k;
}

/// Ric_jl = g^{ik} R_ijkl, the trace of X -> R(X, d_j) d_l; negative on hyperbolic space.
inline Eigen::MatrixXd ricci_tensor(const CurvatureBundle& b)
{
    const std::size_t n = b.dimension();
    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < n; ++k)
                    acc += b.g_inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * b.riemann(i, j, k, l);
            ric(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = acc;
        }
    return ric;
}

inline double scalar_curvature(const CurvatureBundle& b)
{
    return (b.g_inv.array() * b.ricci.array()).sum();
}

inline CurvatureBundle curvature_from_jet(const GeometricJet& jet, double alpha)
{
    CurvatureBundle b;
    b.point = jet.point;
    b.alpha = alpha;
    b.g = jet.g;
    b.g_inv = detail::checked_inverse(jet.g);
    b.gamma_first = detail::connection_first(jet.dg, jet.T, alpha);
    b.gamma_second = detail::raise_first(b.g_inv, b.gamma_first);
    b.T = jet.T;
    b.riemann = riemann_from_jet(jet, alpha, b.g_inv);
    b.K = sectional_matrix(b);
    b.ricci = ricci_tensor(b);
    b.scalar = scalar_curvature(b);
    return b;
}

inline CurvatureBundle curvature_bundle(const ExponentialFamilyModel& model, std::span<const double> theta,
                                        double alpha = 0.0)
{
    return curvature_from_jet(geometric_jet(model, theta), alpha);
}

/// Largest violation of the algebraic curvature identities (pair antisymmetries,
/// pair exchange, first Bianchi). Only meaningful for the Levi-Civita connection.
struct RiemannSymmetryResiduals
{
    double antisym_ij = 0.0;
    double antisym_kl = 0.0;
    double pair_exchange = 0.0;
    double bianchi = 0.0;
};

inline RiemannSymmetryResiduals riemann_symmetry_residuals(const Tensor4& r)
{
    RiemannSymmetryResiduals res;
    const std::size_t n = r.extent();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    res.antisym_ij = std::max(res.antisym_ij, std::abs(r(i, j, k, l) + r(j, i, k, l)));
                    res.antisym_kl = std::max(res.antisym_kl, std::abs(r(i, j, k, l) + r(i, j, l, k)));
                    res.pair_exchange = std::max(res.pair_exchange, std::abs(r(i, j, k, l) - r(k, l, i, j)));
                    res.bianchi =
                        std::max(res.bianchi, std::abs(r(i, j, k, l) + r(j, k, i, l) + r(k, i, j, l)));
                }
    return res;
}

} // namespace infogeo
