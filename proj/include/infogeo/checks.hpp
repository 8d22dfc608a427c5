#pragma once

// Geometric property checks over sets of sampled points.

#include "infogeo/errors.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace infogeo {

enum class Verdict { holds, fails, inconclusive };

inline const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

/// One sampled point and the residual the check measured there.
struct Witness
{
    std::size_t point_index = 0;
    std::vector<double> point;
    double residual = 0.0;
    /// Per-point estimate of the checked quantity (Einstein constant, curvature), when there is one.
    std::optional<double> value;

    bool operator==(const Witness&) const = default;
};

struct PropertyReport
{
    std::string property;
    Verdict verdict = Verdict::inconclusive;
    std::vector<Witness> witness;
    double tolerance = 0.0;
    std::optional<double> value;
    std::string note;

    bool operator==(const PropertyReport&) const = default;
};

enum class SignProfile { all_nonnegative, all_nonpositive, mixed, zero };

inline const char* to_string(SignProfile p)
{
    switch (p) {
    case SignProfile::all_nonnegative: return "all_nonnegative";
    case SignProfile::all_nonpositive: return "all_nonpositive";
    case SignProfile::mixed: return "mixed";
    case SignProfile::zero: return "zero";
    }
    return "?";
}

/// Default sampling policy for property checks.
inline constexpr std::size_t default_check_points = 20;
inline constexpr std::uint64_t default_check_seed = 20240601;
inline constexpr double default_einstein_tolerance = 1e-6;
inline constexpr double sign_dead_band = 1e-10;

inline std::vector<CurvatureBundle> bundles_at(const ExponentialFamilyModel& model,
                                               const std::vector<Eigen::VectorXd>& points, double alpha = 0.0)
{
    std::vector<CurvatureBundle> out;
    out.reserve(points.size());
    for (const auto& p : points)
        out.push_back(curvature_bundle(model, as_span(p), alpha));
    return out;
}

namespace detail {

inline std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline void require_points(std::size_t have, std::size_t need, const char* what)
{
    if (have < need)
        throw InvalidArgument(std::string(what) + " needs at least " + std::to_string(need) + " points");
}

inline PropertyReport finish(PropertyReport r)
{
    const bool all_ok = std::all_of(r.witness.begin(), r.witness.end(),
                                    [&](const Witness& w) { return w.residual <= r.tolerance; });
    r.verdict = all_ok ? Verdict::holds : Verdict::fails;
    return r;
}

} // namespace detail

/// Least-squares Einstein constant k = <Ric, g>_F / <g, g>_F and the relative residual |Ric - k g|_F / |Ric|_F.
/// frame_residual is the same quantity in a g-orthonormal frame, which does not depend on the chart.
struct EinsteinFit
{
    double k = 0.0;
    double relative_residual = 0.0;
    double frame_residual = 0.0;
};

inline EinsteinFit einstein_fit(const CurvatureBundle& b)
{
    EinsteinFit fit;
    fit.k = (b.ricci.array() * b.g.array()).sum() / b.g.squaredNorm();
    const double norm = b.ricci.norm();
    fit.relative_residual = norm > 0.0 ? (b.ricci - fit.k * b.g).norm() / norm : 0.0;
    const Eigen::LLT<Eigen::MatrixXd> llt(b.g);
    const Eigen::MatrixXd half = llt.matrixL().solve(b.ricci);
    const Eigen::MatrixXd frame = llt.matrixL().solve(half.transpose());
    const double frame_norm = frame.norm();
    const double mean = frame.trace() / static_cast<double>(frame.rows());
    fit.frame_residual =
        frame_norm > 0.0
            ? (frame - mean * Eigen::MatrixXd::Identity(frame.rows(), frame.cols())).norm() / frame_norm
            : 0.0;
    return fit;
}

/// Ric = k g with one k for every point. The per-point residual is the larger of the
/// relative fit residual and the relative deviation of k from the first point's k.
inline PropertyReport is_einstein(const std::vector<CurvatureBundle>& bundles, double tol = default_einstein_tolerance)
{
    detail::require_points(bundles.size(), 5, "Einstein check");
    PropertyReport r{"einstein", Verdict::inconclusive, {}, tol, std::nullopt, {}};
    const double k0 = einstein_fit(bundles.front()).k;
    for (std::size_t p = 0; p < bundles.size(); ++p) {
        const auto fit = einstein_fit(bundles[p]);
        const double drift = std::abs(fit.k - k0) / std::max(1.0, std::abs(k0));
        r.witness.push_back({p, detail::to_vector(bundles[p].point), std::max(fit.relative_residual, drift), fit.k});
    }
    r = detail::finish(std::move(r));
    if (r.verdict == Verdict::holds)
        r.value = k0;
    return r;
}

/// Every off-diagonal sectional entry equals one common kappa within tol.
inline PropertyReport constant_curvature(const std::vector<CurvatureBundle>& bundles, double tol = 1e-8)
{
    detail::require_points(bundles.size(), 5, "constant-curvature check");
    PropertyReport r{"constant_curvature", Verdict::inconclusive, {}, tol, std::nullopt, {}};
    if (bundles.front().dimension() < 2) {
        r.note = "sectional curvature is undefined in dimension 1";
        return r;
    }
    const double kappa = bundles.front().K(0, 1);
    for (std::size_t p = 0; p < bundles.size(); ++p) {
        const auto& K = bundles[p].K;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < K.rows(); ++i)
            for (Eigen::Index j = i + 1; j < K.cols(); ++j)
                worst = std::max(worst, std::abs(K(i, j) - kappa));
        r.witness.push_back({p, detail::to_vector(bundles[p].point), worst, K(0, 1)});
    }
    r = detail::finish(std::move(r));
    if (r.verdict == Verdict::holds)
        r.value = kappa;
    return r;
}

/// Sign pattern of all off-diagonal sectional entries across points, with a dead band around zero.
inline SignProfile curvature_sign_profile(const std::vector<CurvatureBundle>& bundles)
{
    detail::require_points(bundles.size(), 5, "sign profile");
    bool positive = false;
    bool negative = false;
    for (const auto& b : bundles)
        for (Eigen::Index i = 0; i < b.K.rows(); ++i)
            for (Eigen::Index j = i + 1; j < b.K.cols(); ++j) {
                positive |= b.K(i, j) > sign_dead_band;
                negative |= b.K(i, j) < -sign_dead_band;
            }
    if (positive && negative)
        return SignProfile::mixed;
    if (positive)
        return SignProfile::all_nonnegative;
    if (negative)
        return SignProfile::all_nonpositive;
    return SignProfile::zero;
}

using Partition = std::vector<std::vector<std::size_t>>;

/// Connected components of the graph with an edge (i, j) whenever |K_ij| > tol.
/// Returns the components when there are at least two (block-diagonal structure),
/// nothing when the graph is connected.
inline std::optional<Partition> block_diagonal_partition(const Eigen::MatrixXd& K, double tol = 1e-8)
{
    const auto n = static_cast<std::size_t>(K.rows());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t a) {
        while (parent[a] != a)
            a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) > tol) {
                const auto a = find(i);
                const auto b = find(j);
                if (a != b)
                    parent[std::max(a, b)] = std::min(a, b);
            }
    Partition parts;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<std::ptrdiff_t>(parts.size());
            parts.emplace_back();
        }
        parts[static_cast<std::size_t>(slot[root])].push_back(i);
    }
    if (parts.size() < 2)
        return std::nullopt;
    return parts;
}

/// max |R_ijkl| below tol at every point.
inline PropertyReport is_flat(const std::vector<CurvatureBundle>& bundles, double tol = 1e-10)
{
    detail::require_points(bundles.size(), 1, "flatness check");
    PropertyReport r{"flat", Verdict::inconclusive, {}, tol, std::nullopt, {}};
    for (std::size_t p = 0; p < bundles.size(); ++p)
        r.witness.push_back({p, detail::to_vector(bundles[p].point), bundles[p].riemann.max_abs(), std::nullopt});
    return detail::finish(std::move(r));
}

inline PropertyReport is_einstein(const ExponentialFamilyModel& model, const std::vector<Eigen::VectorXd>& points,
                                  double tol = default_einstein_tolerance)
{
    return is_einstein(bundles_at(model, points), tol);
}

inline PropertyReport constant_curvature(const ExponentialFamilyModel& model,
                                         const std::vector<Eigen::VectorXd>& points, double tol = 1e-8)
{
    return constant_curvature(bundles_at(model, points), tol);
}

inline SignProfile curvature_sign_profile(const ExponentialFamilyModel& model,
                                          const std::vector<Eigen::VectorXd>& points)
{
    return curvature_sign_profile(bundles_at(model, points));
}

inline PropertyReport is_flat(const ExponentialFamilyModel& model, const std::vector<Eigen::VectorXd>& points,
                              double tol = 1e-10)
{
    return is_flat(bundles_at(model, points), tol);
}

} // namespace infogeo
