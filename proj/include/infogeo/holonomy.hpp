#pragma once

// Holonomy evidence: curvature operators, their Lie closure, parallel transport
// around loops, and the classification pipeline.

#include "infogeo/berger.hpp"
#include "infogeo/checks.hpp"
#include "infogeo/derivatives.hpp"
#include "infogeo/errors.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/models.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace infogeo {

inline constexpr double default_rank_tolerance = 1e-8;
inline constexpr int max_closure_rounds = 10;

// ---------------------------------------------------------------------------
// Curvature operators and Lie closure
// ---------------------------------------------------------------------------

/// A_(ij) for i < j in lexicographic order, with (A_(ij))^k_l = g^{km} R_ijml.
inline std::vector<Eigen::MatrixXd> curvature_operators(const CurvatureBundle& b)
{
    const auto n = static_cast<Eigen::Index>(b.dimension());
    std::vector<Eigen::MatrixXd> ops;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Eigen::MatrixXd r(n, n);
            for (Eigen::Index m = 0; m < n; ++m)
                for (Eigen::Index l = 0; l < n; ++l)
                    r(m, l) = b.riemann(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                        static_cast<std::size_t>(m), static_cast<std::size_t>(l));
            ops.push_back(b.g_inv * r);
        }
    return ops;
}

/// |gA + A^T g|_F relative to max(1, |gA|_F).
inline double antisymmetry_residual(const Eigen::MatrixXd& g, const Eigen::MatrixXd& a)
{
    const Eigen::MatrixXd ga = g * a;
    return (ga + ga.transpose()).norm() / std::max(1.0, ga.norm());
}

struct ClosureResult
{
    int dimension = 0;
    /// Dimension of the plain linear span of the generators.
    int span_dimension = 0;
    int rounds = 0;
    /// Smallest kept and largest dropped singular-value ratio of the final round.
    double smallest_kept_ratio = 1.0;
    double largest_dropped_ratio = 0.0;
};

namespace detail {

inline Eigen::VectorXd so_coordinates(const Eigen::MatrixXd& b)
{
    const auto n = b.rows();
    Eigen::VectorXd v(n * (n - 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            v(k++) = std::sqrt(2.0) * b(i, j);
    return v;
}

inline Eigen::MatrixXd so_matrix(const Eigen::VectorXd& v, Eigen::Index n)
{
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            b(i, j) = v(k++) / std::sqrt(2.0);
            b(j, i) = -b(i, j);
        }
    return b;
}

struct RankedBasis
{
    Eigen::MatrixXd basis; ///< orthonormal columns
    double smallest_kept_ratio = 1.0;
    double largest_dropped_ratio = 0.0;
};

/// Orthonormal basis of the column span, rank by sigma > tol * sigma_max.
inline RankedBasis ranked_basis(const Eigen::MatrixXd& columns, double tol)
{
    RankedBasis out;
    const auto rows = columns.rows();
    if (columns.cols() == 0 || rows == 0) {
        out.basis.resize(rows, 0);
        return out;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (s(0) <= 1e-13) {
        out.basis.resize(rows, 0);
        return out;
    }
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        const double ratio = s(k) / s(0);
        if (ratio > tol) {
            ++rank;
            out.smallest_kept_ratio = ratio;
        } else {
            out.largest_dropped_ratio = std::max(out.largest_dropped_ratio, ratio);
        }
        if (ratio >= tol * 1e-2 && ratio <= tol * 1e2 && s(k) > 1e-13)
            throw RankUnstable("singular value ratio " + std::to_string(ratio) + " lies within two decades of the rank threshold " +
                               std::to_string(tol));
    }
    out.basis = svd.matrixU().leftCols(rank);
    return out;
}

} // namespace detail

/// Dimension of the smallest Lie subalgebra of so(n) containing the generators.
/// Generators are antisymmetric matrices in an orthonormal frame; each is scaled
/// to unit norm (vanishing ones are dropped) so that the rank threshold does not
/// depend on how many points contributed.
inline ClosureResult lie_closure(const std::vector<Eigen::MatrixXd>& generators, double tol = default_rank_tolerance)
{
    ClosureResult res;
    if (generators.empty())
        return res;
    const auto n = generators.front().rows();
    const auto so = n * (n - 1) / 2;
    if (so == 0)
        return res;

    double largest = 0.0;
    for (const auto& g : generators)
        largest = std::max(largest, g.norm());
    if (largest <= 1e-13)
        return res;

    std::vector<Eigen::VectorXd> cols;
    for (const auto& g : generators)
        if (g.norm() > 1e-12 * largest)
            cols.push_back(detail::so_coordinates(g) / g.norm());
    Eigen::MatrixXd stack(so, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        stack.col(static_cast<Eigen::Index>(c)) = cols[c];

    auto ranked = detail::ranked_basis(stack, tol);
    res.span_dimension = static_cast<int>(ranked.basis.cols());
    res.smallest_kept_ratio = ranked.smallest_kept_ratio;
    res.largest_dropped_ratio = ranked.largest_dropped_ratio;

    Eigen::MatrixXd basis = ranked.basis;
    while (res.rounds < max_closure_rounds && basis.cols() < so) {
        const auto r = basis.cols();
        std::vector<Eigen::MatrixXd> mats;
        for (Eigen::Index c = 0; c < r; ++c)
            mats.push_back(detail::so_matrix(basis.col(c), n));
        Eigen::MatrixXd grown(so, r + r * (r - 1) / 2);
        grown.leftCols(r) = basis;
        Eigen::Index c = r;
        for (Eigen::Index a = 0; a < r; ++a)
            for (Eigen::Index b = a + 1; b < r; ++b)
                grown.col(c++) = detail::so_coordinates(mats[a] * mats[b] - mats[b] * mats[a]);
        ++res.rounds;
        ranked = detail::ranked_basis(grown, tol);
        res.smallest_kept_ratio = ranked.smallest_kept_ratio;
        res.largest_dropped_ratio = ranked.largest_dropped_ratio;
        const bool stable = ranked.basis.cols() == r;
        basis = ranked.basis;
        if (stable)
            break;
    }
    res.dimension = static_cast<int>(basis.cols());
    return res;
}

/// Lower factor L of g = L L^T; the map A -> L^T A L^{-T} sends g-antisymmetric
/// operators to antisymmetric matrices.
inline Eigen::MatrixXd orthonormal_factor(const Eigen::MatrixXd& g)
{
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("metric is not positive definite");
    return llt.matrixL();
}

inline Eigen::MatrixXd to_orthonormal_frame(const Eigen::MatrixXd& l, const Eigen::MatrixXd& a)
{
    const Eigen::MatrixXd lt = l.transpose();
    return lt * a * lt.inverse();
}

namespace detail {

inline std::vector<Eigen::MatrixXd> checked_generators(const Eigen::MatrixXd& g,
                                                       const std::vector<Eigen::MatrixXd>& ops, double tol)
{
    const Eigen::MatrixXd l = orthonormal_factor(g);
    std::vector<Eigen::MatrixXd> out;
    for (const auto& a : ops) {
        const double res = antisymmetry_residual(g, a);
        if (!(res < tol))
            throw NotAntisymmetric("curvature operator fails g-antisymmetry (residual " + std::to_string(res) + ")");
        Eigen::MatrixXd b = to_orthonormal_frame(l, a);
        out.push_back(0.5 * (b - b.transpose()));
    }
    return out;
}

} // namespace detail

inline ClosureResult curvature_algebra(const CurvatureBundle& b, double tol = default_rank_tolerance)
{
    if (b.alpha != 0.0)
        throw InvalidArgument("curvature algebra is defined for the Levi-Civita connection (alpha = 0)");
    return lie_closure(detail::checked_generators(b.g, curvature_operators(b), tol), tol);
}

inline int curvature_algebra_dimension(const ExponentialFamilyModel& model, std::span<const double> theta,
                                       double tol = default_rank_tolerance)
{
    return curvature_algebra(curvature_bundle(model, theta, 0.0), tol).dimension;
}

// ---------------------------------------------------------------------------
// Parallel transport
// ---------------------------------------------------------------------------

/// Piecewise-linear path through waypoints in natural coordinates.
/// A closed path returns to its first waypoint.
struct PathSpec
{
    std::vector<Eigen::VectorXd> waypoints;
    bool closed = false;

    PathSpec reversed() const
    {
        PathSpec r{{waypoints.rbegin(), waypoints.rend()}, closed};
        if (closed && r.waypoints.size() > 1) {
            // Keep the same base point: w0, wk, ..., w1.
            r.waypoints.assign(1, waypoints.front());
            r.waypoints.insert(r.waypoints.end(), waypoints.rbegin(), waypoints.rend() - 1);
        }
        return r;
    }
};

/// Closed coordinate rectangle based at theta: +eps e_i, +eps e_j, -eps e_i, -eps e_j.
inline PathSpec coordinate_rectangle(const Eigen::VectorXd& theta, std::size_t i, std::size_t j, double eps)
{
    const auto n = theta.size();
    if (i >= static_cast<std::size_t>(n) || j >= static_cast<std::size_t>(n) || i == j)
        throw InvalidArgument("rectangle needs two distinct coordinate indices");
    Eigen::VectorXd a = theta, b = theta, c = theta;
    a(static_cast<Eigen::Index>(i)) += eps;
    b(static_cast<Eigen::Index>(i)) += eps;
    b(static_cast<Eigen::Index>(j)) += eps;
    c(static_cast<Eigen::Index>(j)) += eps;
    return {{theta, a, b, c}, true};
}

struct TransportResult
{
    Eigen::MatrixXd matrix;
    /// |P^T g(end) P - g(start)|_F.
    double orthogonality_residual = 0.0;
    std::optional<Eigen::MatrixXd> log_map;
    double determinant = 0.0;
    /// |P_steps - P_(steps/2)|_F, the step-halving check.
    double step_change = 0.0;
    std::size_t steps = 0;
};

inline constexpr std::size_t default_transport_steps = 10000;
inline constexpr double default_transport_tolerance = 1e-9;

/// C^k_j = sum_i Gamma^k_ij v^i at theta, so that dV/ds = -C V along a curve with velocity v.
inline Eigen::MatrixXd connection_matrix(const ExponentialFamilyModel& model, std::span<const double> theta,
                                         const Eigen::VectorXd& velocity)
{
    const auto s = evaluate_stack(model.potential, theta, 3);
    const std::size_t n = model.n;
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd lowered = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 0; i < n; ++i) {
        const double vi = velocity(static_cast<Eigen::Index>(i));
        if (vi == 0.0)
            continue;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t m = 0; m < n; ++m)
                lowered(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) += 0.5 * vi * s.order3(i, j, m);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s.order2);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("metric is not positive definite along the path");
    return llt.solve(lowered);
}

namespace detail {

inline std::vector<Eigen::VectorXd> path_nodes(const PathSpec& path)
{
    auto nodes = path.waypoints;
    if (path.closed && nodes.size() > 1 && (nodes.back() - nodes.front()).norm() > 0.0)
        nodes.push_back(nodes.front());
    return nodes;
}

/// Fixed-step RK4 for dV/ds = -C(gamma(s)) V, steps shared across segments by length.
inline Eigen::MatrixXd integrate_transport(const ExponentialFamilyModel& model, const std::vector<Eigen::VectorXd>& nodes,
                                           std::size_t steps)
{
    const auto N = static_cast<Eigen::Index>(model.n);
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(N, N);
    double total = 0.0;
    for (std::size_t s = 1; s < nodes.size(); ++s)
        total += (nodes[s] - nodes[s - 1]).norm();
    if (total == 0.0)
        return v;
    for (std::size_t s = 1; s < nodes.size(); ++s) {
        const Eigen::VectorXd a = nodes[s - 1];
        const Eigen::VectorXd d = nodes[s] - a;
        const double len = d.norm();
        if (len == 0.0)
            continue;
        const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(steps) * len / total)));
        const double h = 1.0 / static_cast<double>(m);
        auto C = [&](double t) {
            const Eigen::VectorXd x = a + t * d;
            return connection_matrix(model, as_span(x), d);
        };
        Eigen::MatrixXd c0 = C(0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double t = static_cast<double>(k) * h;
            const Eigen::MatrixXd cm = C(t + 0.5 * h);
            const Eigen::MatrixXd c1 = C(t + h);
            const Eigen::MatrixXd k1 = -c0 * v;
            const Eigen::MatrixXd k2 = -cm * (v + 0.5 * h * k1);
            const Eigen::MatrixXd k3 = -cm * (v + 0.5 * h * k2);
            const Eigen::MatrixXd k4 = -c1 * (v + h * k3);
            v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            c0 = c1;
        }
    }
    return v;
}

} // namespace detail

/// Principal logarithm; throws LogUndefined for eigenvalues on the closed negative real axis.
inline Eigen::MatrixXd principal_log(const Eigen::MatrixXd& p)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(p, false);
    for (const auto& ev : es.eigenvalues())
        if (std::abs(ev.imag()) <= 1e-12 * std::max(1.0, std::abs(ev)) && ev.real() <= 0.0)
            throw LogUndefined("transport matrix has a non-positive real eigenvalue; shrink the loop");
    Eigen::MatrixXd l = p.log();
    if (!l.allFinite())
        throw LogUndefined("matrix logarithm did not converge");
    return l;
}

/// Transport along a path, reported at the path's end point. Closed paths get a log map.
inline TransportResult parallel_transport_path(const ExponentialFamilyModel& model, const PathSpec& path,
                                               std::size_t steps = default_transport_steps,
                                               double tol = default_transport_tolerance)
{
    if (path.waypoints.size() < 2)
        throw InvalidArgument("a path needs at least two waypoints");
    if (steps < 100)
        throw InvalidArgument("transport needs at least 100 steps");
    for (const auto& w : path.waypoints)
        if (w.size() != static_cast<Eigen::Index>(model.n))
            throw InvalidArgument("waypoint dimension does not match the model");
    const auto nodes = detail::path_nodes(path);

    TransportResult r;
    r.steps = steps;
    r.matrix = detail::integrate_transport(model, nodes, steps);
    const Eigen::MatrixXd coarse = detail::integrate_transport(model, nodes, steps / 2);
    r.step_change = (r.matrix - coarse).norm();
    if (r.step_change > 10.0 * tol)
        throw StepTooCoarse("halving the step count changes the transport by " + std::to_string(r.step_change));

    const Eigen::MatrixXd g0 = fisher_metric(model, as_span(nodes.front()));
    const Eigen::MatrixXd g1 = fisher_metric(model, as_span(nodes.back()));
    r.orthogonality_residual = (r.matrix.transpose() * g1 * r.matrix - g0).norm();
    r.determinant = r.matrix.determinant();
    if (path.closed) {
        try {
            r.log_map = principal_log(r.matrix);
        } catch (const LogUndefined&) {
            r.log_map.reset();
        }
    }
    return r;
}

inline TransportResult parallel_transport_loop(const ExponentialFamilyModel& model, PathSpec loop,
                                               std::size_t steps = default_transport_steps,
                                               double tol = default_transport_tolerance)
{
    loop.closed = true;
    return parallel_transport_path(model, loop, steps, tol);
}

/// |log P_rect + eps^2 A_(ij)|_F for the rectangle +i, +j, -i, -j at theta.
inline double loop_curvature_consistency(const ExponentialFamilyModel& model, const Eigen::VectorXd& theta,
                                         std::size_t i, std::size_t j, double eps, std::size_t steps = 2000)
{
    const auto loop = coordinate_rectangle(theta, i, j, eps);
    for (const auto& w : loop.waypoints)
        model.potential.domain().check(as_span(w));
    const auto t = parallel_transport_loop(model, loop, steps);
    const Eigen::MatrixXd log_p = principal_log(t.matrix);
    const auto b = curvature_bundle(model, as_span(theta), 0.0);
    const auto ops = curvature_operators(b);
    const auto [lo, hi] = std::minmax(i, j);
    const auto n = b.dimension();
    std::size_t index = 0;
    for (std::size_t a = 0; a < lo; ++a)
        index += n - 1 - a;
    index += hi - lo - 1;
    const double sign = i < j ? 1.0 : -1.0;
    return (log_p + sign * eps * eps * ops[index]).norm();
}

/// Curvature operators at other points, transported back to the base point along
/// straight segments, join the generators at the base point.
inline ClosureResult curvature_algebra_transported(const ExponentialFamilyModel& model, const Eigen::VectorXd& base,
                                                   const std::vector<Eigen::VectorXd>& extra_points,
                                                   double tol = default_rank_tolerance, std::size_t steps = 400)
{
    const auto b0 = curvature_bundle(model, as_span(base), 0.0);
    auto generators = detail::checked_generators(b0.g, curvature_operators(b0), tol);
    const Eigen::MatrixXd l = orthonormal_factor(b0.g);
    for (const auto& y : extra_points) {
        const auto by = curvature_bundle(model, as_span(y), 0.0);
        const auto p = parallel_transport_path(model, PathSpec{{base, y}, false}, steps, 1e-6).matrix;
        const Eigen::MatrixXd p_inv = p.inverse();
        for (const auto& a : curvature_operators(by)) {
            const double res = antisymmetry_residual(by.g, a);
            if (!(res < tol))
                throw NotAntisymmetric("curvature operator fails g-antisymmetry (residual " + std::to_string(res) + ")");
            const Eigen::MatrixXd back = to_orthonormal_frame(l, p_inv * a * p);
            generators.push_back(0.5 * (back - back.transpose()));
        }
    }
    return lie_closure(generators, tol);
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct HolonomyVerdict
{
    std::string model;
    std::vector<HolonomyCandidate> candidates;
    int curvature_algebra_dim = 0;
    int so_dim = 0;
    std::string verdict;
    std::vector<std::string> assumptions;
    EvidenceFlags flags;
    bool berger_applied = false;
    std::vector<int> per_point_dims;
    std::string sign_profile;
    PropertyReport einstein;
    std::vector<std::string> notes;

    bool operator==(const HolonomyVerdict&) const = default;
};

inline constexpr const char* verdict_inconclusive = "inconclusive";
inline constexpr const char* verdict_not_classified = "not classified (Berger hypotheses unmet)";

inline HolonomyVerdict classify(const ExponentialFamilyModel& model, std::size_t point_budget = default_check_points,
                                std::uint64_t seed = default_check_seed, double rank_tol = default_rank_tolerance)
{
    if (point_budget < 5)
        throw InvalidArgument("classify needs a point budget of at least 5");
    if (!model.sample_points)
        throw InvalidArgument("model '" + model.name + "' has no point sampler");
    const auto points = model.sample_points(point_budget, seed);
    const auto bundles = bundles_at(model, points);
    const int n = static_cast<int>(model.n);

    HolonomyVerdict v;
    v.model = model.name;
    v.so_dim = so_dimension(n);

    v.einstein = is_einstein(bundles);
    const auto profile = curvature_sign_profile(bundles);
    v.sign_profile = to_string(profile);
    bool irreducible = true;
    for (const auto& b : bundles)
        irreducible = irreducible && !block_diagonal_partition(b.K).has_value();

    auto& f = v.flags;
    f.n = n;
    f.simply_connected = model.metadata.simply_connected;
    f.irreducible = irreducible && n >= 2;
    f.nonsymmetric = profile == SignProfile::mixed && model.metadata.symmetric_space_known != true;
    f.einstein = v.einstein.verdict == Verdict::holds;
    f.ricci_flat = *f.einstein && v.einstein.value && std::abs(*v.einstein.value) <= v.einstein.tolerance;
    f.admits_kaehler = model.metadata.admits_kaehler;
    f.exponential_family = true;

    v.assumptions.push_back(std::string("simply_connected=") + (f.simply_connected ? "true" : "false") +
                            " (model metadata)");
    v.assumptions.push_back(std::string("admits_kaehler=") + (model.metadata.admits_kaehler ? "true" : "false") +
                            " (model metadata)");
    if (model.metadata.symmetric_space_known == true)
        v.assumptions.push_back("symmetric space (model metadata)");
    else if (f.nonsymmetric)
        v.assumptions.push_back("nonsymmetric (evidence: mixed curvature signs)");

    try {
        v.candidates = berger_candidates(f);
        v.berger_applied = true;
    } catch (const HypothesesNotMet& e) {
        v.notes.push_back(e.what());
    }

    for (const auto& b : bundles) {
        const int d = curvature_algebra(b, rank_tol).dimension;
        v.per_point_dims.push_back(d);
        v.curvature_algebra_dim = std::max(v.curvature_algebra_dim, d);
    }

    const std::string so_name = "SO(" + std::to_string(n) + ")";
    const bool saturated = v.curvature_algebra_dim == v.so_dim && v.so_dim > 0;
    if (saturated) {
        v.verdict = so_name;
        if (!v.berger_applied) {
            // The restricted holonomy algebra already fills so(n); no table lookup is needed.
            v.candidates = {berger_rows(n).front()};
            v.notes.push_back("curvature algebra equals so(n); verdict does not rely on the Berger table");
        }
    } else if (!v.berger_applied) {
        v.verdict = verdict_not_classified;
    } else if (v.candidates.size() == 1) {
        v.verdict = v.candidates.front().name();
        v.notes.push_back("single surviving Berger candidate");
    } else {
        v.verdict = verdict_inconclusive;
    }
    if (f.simply_connected && v.verdict != verdict_not_classified)
        v.notes.push_back("simply connected, so the holonomy group equals the restricted holonomy group");
    return v;
}

} // namespace infogeo
