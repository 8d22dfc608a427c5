#pragma once

// Published closed forms for the bivariate normal manifold N^2 (metric,
// sectional curvature and Ricci tensor of the alpha-connection), transcribed
// as printed, and an audit that scores them against the computed values.
//
// The printed formulas use the symbols mu1, mu2, s1, s2, s11, s12, s22 without
// a consistent meaning. Two readings are audited:
//   map A: s1 = s11 = Sigma_11, s2 = s12 = Sigma_12, s22 = Sigma_22
//   map B: s1 = s11 = Sigma_11, s2 = s22 = Sigma_22, s12 = Sigma_12
// The metric table follows map B. The curvature tables are scored under both.

#include "infogeo/geometry.hpp"
#include "infogeo/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace infogeo::reference {

struct N2Symbols
{
    double mu1 = 0, mu2 = 0, s1 = 0, s2 = 0, s11 = 0, s12 = 0, s22 = 0;
};

enum class SymbolMap { A, B };

inline const char* to_string(SymbolMap m) { return m == SymbolMap::A ? "A" : "B"; }

inline N2Symbols symbols(const MeanCovariancePoint& p, SymbolMap map)
{
    N2Symbols s;
    s.mu1 = p.mu(0);
    s.mu2 = p.mu(1);
    s.s1 = s.s11 = p.sigma(0, 0);
    if (map == SymbolMap::A) {
        s.s2 = s.s12 = p.sigma(0, 1);
        s.s22 = p.sigma(1, 1);
    } else {
        s.s2 = s.s22 = p.sigma(1, 1);
        s.s12 = p.sigma(0, 1);
    }
    return s;
}

/// Metric entry g_ij (0-based, symmetric).
inline double metric_entry(std::size_t i, std::size_t j, const N2Symbols& s)
{
    if (i > j)
        std::swap(i, j);
    const double m1 = s.mu1, m2 = s.mu2, s1 = s.s1, s2 = s.s2, s12 = s.s12, s22 = s.s22, s11 = s.s11;
    switch (i * 5 + j) {
    case 0: return s1;
    case 1: return s12;
    case 2: return 2 * m1 * s1;
    case 3: return s1 * m2 + s12 * m1;
    case 4: return 2 * s12 * m2;
    case 6: return s22;
    case 7: return 2 * s12 * m1;
    case 8: return s2 * m1 + s12 * m2;
    case 9: return 2 * s2 * m2;
    case 12: return 2 * s1 * (s1 + 2 * m1 * m1);
    case 13: return 2 * s12 * s11 + 2 * m1 * s1 * m2 + 2 * m1 * m1 * s12;
    case 14: return 2 * s12 * (s12 + 2 * m1 * m2);
    case 18: return s1 * s2 + s1 * m2 * m2 + m1 * m1 * s2 + 2 * m1 * s12 * m2 + s12 * s12;
    case 19: return 2 * s2 * s12 + 2 * s22 * m1 * m2 + 2 * s12 * m2 * m2;
    case 24: return 2 * s2 * (s2 + 2 * m2 * m2);
    default: break;
    }
    return 0.0;
}

/// Sectional curvature K_ij (0-based, symmetric, zero diagonal).
inline double sectional_entry(std::size_t i, std::size_t j, const N2Symbols& s, double alpha)
{
    if (i > j)
        std::swap(i, j);
    const double a2 = alpha * alpha;
    const double m1 = s.mu1, m2 = s.mu2, s1 = s.s1, s2 = s.s2, s11 = s.s11, s12 = s.s12, s22 = s.s22;
    const auto sq = [](double x) { return x * x; };
    const auto cube = [](double x) { return x * x * x; };
    const auto p4 = [](double x) { return x * x * x * x; };
    switch (i * 5 + j) {
    case 1: return 0.25 - 0.25 * a2;
    case 2: return -0.5 + 0.5 * a2;
    case 3: {
        const double na = -3 * sq(s2) * s1 - sq(s1) * s22 - sq(s2) * sq(m1) + s1 * sq(m1) * s22;
        const double da = sq(s11) * s22 + s1 * sq(m1) * s22 + sq(s2) * s1 - sq(s2) * sq(m1);
        const double nb = sq(s1) * s22 + 3 * sq(s2) * s1 - s1 * sq(m1) * s22 + sq(s2) * sq(m1);
        const double db = sq(s1) * s22 + s1 * sq(m1) * s22 + sq(s2) * s1 - sq(s2) * sq(m1);
        return -0.25 * na * a2 / da - 0.25 * nb / db;
    }
    case 4: {
        const double na = s1 * sq(m2) * s22 - s22 * sq(s2) - sq(s2) * sq(m2);
        const double d = sq(s22) * s1 + 2 * s1 * sq(m2) * s22 - 2 * sq(s2) * sq(m2);
        const double nb = -s1 * sq(m2) * s22 + s22 * sq(s2) + sq(s2) * sq(m2);
        return -0.5 * na * a2 / d - 0.5 * nb / d;
    }
    case 7: {
        const double na = -sq(s2) * s1 - sq(s12) * sq(m1) + s1 * sq(m1) * s22;
        const double d = sq(s1) * s22 + 2 * s1 * sq(m1) * s22 - 2 * sq(s2) * sq(m1);
        const double nb = -s1 * sq(m1) * s22 + sq(s2) * sq(m1) + sq(s2) * s1;
        return -0.5 * na * a2 / d - 0.5 * nb / d;
    }
    case 8: {
        const double na = -sq(s22) * s1 + s1 * sq(m2) * s22 - 3 * s22 * sq(s2) - sq(s2) * sq(m2);
        const double da = sq(s22) * s1 + s1 * sq(m2) * s22 + s22 * sq(s2) - sq(s2) * sq(m2);
        const double nb = sq(s22) * s1 - s1 * sq(m2) * s22 + 3 * s22 * sq(s2) + sq(s2) * sq(m2);
        const double db = sq(s22) * s1 + s1 * sq(m2) * s22 + s22 * sq(s12) - sq(s2) * sq(m2);
        return -0.25 * na * a2 / da - 0.25 * nb / db;
    }
    case 9: return -0.5 + 0.5 * a2;
    case 13: {
        const double na = -cube(s1) * s22 - cube(s11) * sq(m2) - 3 * sq(s1) * sq(m1) * s22 + sq(s2) * sq(s1) +
                          2 * sq(s1) * m1 * s2 * m2 + s1 * s22 * p4(m1) + 2 * s1 * sq(s2) * sq(m1) - sq(s2) * p4(m1);
        const double d = cube(s1) * s22 + cube(s1) * sq(m2) + 3 * sq(s1) * sq(m1) * s22 - 2 * sq(s1) * m1 * s2 * m2 -
                         sq(s2) * sq(s1) + 2 * s1 * s22 * p4(m1) - 2 * s1 * sq(s2) * sq(m1) - 2 * sq(s2) * p4(m1);
        const double nb = cube(s1) * s22 + sq(s2) * p4(m1) - sq(s2) * sq(s1) + cube(s1) * sq(m2) +
                          3 * sq(s1) * sq(m1) * s22 - 2 * sq(s1) * m1 * s2 * m2 - s1 * s22 * p4(m1) -
                          2 * s1 * sq(s2) * sq(m1);
        return -0.5 * na * a2 / d - 0.5 * nb / d;
    }
    case 14: {
        const double na = -s1 * s22 * sq(s2) - 2 * s1 * s22 * m1 * s2 * m2 + s1 * s22 * sq(m1) * sq(m2) -
                          s1 * sq(s2) * sq(m2) - sq(s2) * sq(m1) * s22 - sq(m1) * sq(s2) * sq(m2) + p4(s2) +
                          4 * cube(s2) * m1 * m2;
        const double da = sq(s1) * sq(s22) + 2 * sq(s11) * sq(m2) * s22 + 2 * s1 * sq(s22) * sq(m1) +
                          4 * s1 * s22 * sq(m1) * sq(m2) - 4 * cube(s2) * m1 * m2 - 4 * sq(m1) * sq(s2) * sq(m2) -
                          p4(s2);
        const double nb = s1 * s22 * sq(s2) + 2 * s11 * s22 * m1 * s2 * m2 - s1 * s22 * sq(m1) * sq(m2) +
                          s1 * sq(s2) * sq(m2) + sq(s2) * sq(m1) * s22 + sq(m1) * sq(s2) * sq(m2) - p4(s2) -
                          4 * cube(s2) * m1 * m2;
        const double db = sq(s1) * sq(s22) + 2 * sq(s1) * sq(m2) * s22 + 2 * s1 * sq(s22) * sq(m1) +
                          4 * s11 * s22 * sq(m1) * sq(m2) - 4 * cube(s2) * m1 * m2 - 4 * sq(m1) * sq(s2) * sq(m2) -
                          p4(s2);
        return -na * a2 / da - nb / db;
    }
    case 19: {
        const double na = s1 * cube(s22) + 3 * s11 * sq(s22) * sq(m2) - s1 * s22 * p4(m2) + cube(s22) * sq(m1) -
                          sq(s22) * sq(s2) - 2 * sq(s22) * m1 * s2 * m2 - 2 * s22 * sq(s2) * sq(m2) + sq(s2) * p4(m2);
        const double d = s1 * cube(s22) + 3 * s1 * sq(s22) * sq(m2) + 2 * s1 * s22 * p4(m2) + cube(s22) * sq(m1) -
                         2 * sq(s22) * m1 * s2 * m2 - sq(s22) * sq(s2) - 2 * s22 * sq(s2) * sq(m2) -
                         2 * sq(s2) * p4(m2);
        const double nb = -s1 * cube(s22) - 3 * s1 * sq(s22) * sq(m2) + s1 * s22 * p4(m2) - cube(s22) * sq(m1) +
                          sq(s22) * sq(s12) + 2 * sq(s22) * m1 * s2 * m2 + 2 * s22 * sq(s2) * sq(m2) -
                          sq(s2) * p4(m2);
        return 0.5 * na * a2 / d + 0.5 * nb / d;
    }
    default: break;
    }
    return 0.0;
}

/// Ricci entry Ric_ij (0-based, symmetric). Every printed entry has the form (alpha^2 - 1) X_ij.
inline double ricci_entry(std::size_t i, std::size_t j, const N2Symbols& s, double alpha)
{
    if (i > j)
        std::swap(i, j);
    const double m1 = s.mu1, m2 = s.mu2, s1 = s.s1, s2 = s.s2, s11 = s.s11, s22 = s.s22;
    double x = 0.0;
    switch (i * 5 + j) {
    case 0: x = 0.5 * s1; break;
    case 1: x = 0.5 * s2; break;
    case 2: x = m1 * s1; break;
    case 3: x = 0.5 * s1 * m2 + 0.5 * s2 * m1; break;
    case 4: x = s2 * m2; break;
    case 6: x = 0.5 * s22; break;
    case 7: x = s2 * m1; break;
    case 8: x = 0.5 * s22 * m1 + 0.5 * s2 * m2; break;
    case 9: x = s22 * m2; break;
    case 12: x = 2 * s1 * (s1 + m1 * m1); break;
    case 13: x = 2 * s2 * s1 + m1 * s1 * m2 + m1 * m1 * s2; break;
    case 14: x = -s1 * s22 + 3 * s2 * s2 + 2 * m1 * s2 * m2; break;
    case 18:
        x = 1.5 * s11 * s22 + 0.5 * s1 * m2 * m2 + 0.5 * m1 * m1 * s22 + 0.5 * s2 * s2 + m1 * s2 * m2;
        break;
    case 19: x = 2 * s22 * s2 + s22 * m1 * m2 + s2 * m2 * m2; break;
    case 24: x = 2 * s22 * (s22 + m2 * m2); break;
    default: break;
    }
    return (alpha * alpha - 1.0) * x;
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

enum class Quantity { metric, sectional, ricci };

inline const char* to_string(Quantity q)
{
    switch (q) {
    case Quantity::metric: return "g";
    case Quantity::sectional: return "K";
    case Quantity::ricci: return "Ric";
    }
    return "?";
}

inline double printed_entry(Quantity q, std::size_t i, std::size_t j, const N2Symbols& s, double alpha)
{
    switch (q) {
    case Quantity::metric: return metric_entry(i, j, s);
    case Quantity::sectional: return sectional_entry(i, j, s, alpha);
    case Quantity::ricci: return ricci_entry(i, j, s, alpha);
    }
    return 0.0;
}

inline double computed_entry(Quantity q, std::size_t i, std::size_t j, const CurvatureBundle& b)
{
    const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
    switch (q) {
    case Quantity::metric: return b.g(I, J);
    case Quantity::sectional: return b.K(I, J);
    case Quantity::ricci: return b.ricci(I, J);
    }
    return 0.0;
}

struct LedgerEntry
{
    std::string quantity;
    std::size_t i = 0; ///< 1-based, as printed
    std::size_t j = 0;
    /// Hard items must match under their map; the rest are audited only.
    bool hard = false;
    bool matches_map_a = false;
    bool matches_map_b = false;
    double max_error_map_a = 0.0;
    double max_error_map_b = 0.0;
    /// Index of the first point where the best map disagrees, if any.
    std::optional<std::size_t> first_mismatch_point;

    bool matches() const { return matches_map_a || matches_map_b; }
    bool operator==(const LedgerEntry&) const = default;
};

struct DiscrepancyLedger
{
    double tolerance = 0.0;
    double alpha = 0.0;
    std::size_t points = 0;
    std::vector<LedgerEntry> entries;

    /// Matched fraction among audited (non-hard) entries.
    double audited_match_fraction() const
    {
        std::size_t total = 0, ok = 0;
        for (const auto& e : entries)
            if (!e.hard) {
                ++total;
                ok += e.matches() ? 1 : 0;
            }
        return total == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(total);
    }

    bool operator==(const DiscrepancyLedger&) const = default;
};

/// Error measure |printed - computed| / max(1, |computed|).
inline double scaled_error(double printed, double computed)
{
    return std::abs(printed - computed) / std::max(1.0, std::abs(computed));
}

inline bool is_hard_item(Quantity q, std::size_t i, std::size_t j)
{
    if (q == Quantity::metric)
        return true;
    if (q == Quantity::sectional)
        return (i == 0 && j == 1) || (i == 0 && j == 2) || (i == 1 && j == 4);
    return i == 0 && j == 0;
}

/// Scores every printed entry (upper triangle; off-diagonal only for K) at the given points.
inline DiscrepancyLedger audit(const std::vector<Eigen::VectorXd>& thetas, double alpha = 0.0, double tol = 1e-6)
{
    const auto model = normal_model(2);
    DiscrepancyLedger ledger;
    ledger.tolerance = tol;
    ledger.alpha = alpha;
    ledger.points = thetas.size();

    std::vector<CurvatureBundle> bundles;
    std::vector<MeanCovariancePoint> mc;
    for (const auto& t : thetas) {
        bundles.push_back(curvature_bundle(model, as_span(t), alpha));
        mc.push_back(meancov_from_natural(2, as_span(t)));
    }
    for (auto q : {Quantity::metric, Quantity::sectional, Quantity::ricci})
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i; j < 5; ++j) {
                if (q == Quantity::sectional && i == j)
                    continue;
                LedgerEntry e;
                e.quantity = to_string(q);
                e.i = i + 1;
                e.j = j + 1;
                e.hard = is_hard_item(q, i, j);
                std::optional<std::size_t> miss_a, miss_b;
                for (std::size_t p = 0; p < bundles.size(); ++p) {
                    const double c = computed_entry(q, i, j, bundles[p]);
                    const double ea = scaled_error(printed_entry(q, i, j, symbols(mc[p], SymbolMap::A), alpha), c);
                    const double eb = scaled_error(printed_entry(q, i, j, symbols(mc[p], SymbolMap::B), alpha), c);
                    e.max_error_map_a = std::max(e.max_error_map_a, std::isfinite(ea) ? ea : HUGE_VAL);
                    e.max_error_map_b = std::max(e.max_error_map_b, std::isfinite(eb) ? eb : HUGE_VAL);
                    if (!(ea <= tol) && !miss_a)
                        miss_a = p;
                    if (!(eb <= tol) && !miss_b)
                        miss_b = p;
                }
                e.matches_map_a = !miss_a;
                e.matches_map_b = !miss_b;
                if (!e.matches())
                    e.first_mismatch_point = e.max_error_map_a <= e.max_error_map_b ? miss_a : miss_b;
                ledger.entries.push_back(std::move(e));
            }
    return ledger;
}

} // namespace infogeo::reference
