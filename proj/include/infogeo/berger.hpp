#pragma once

// Berger's list of holonomy groups of simply connected, irreducible,
// nonsymmetric Riemannian manifolds, with the evidence filters applied to it.

#include "infogeo/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace infogeo {

enum class GroupFamily { SO, U, SU, SpSp1, Sp, G2, Spin7 };

enum class Implication { kaehler, ricci_flat, einstein };

inline const char* to_string(Implication i)
{
    switch (i) {
    case Implication::kaehler: return "kaehler";
    case Implication::ricci_flat: return "ricci_flat";
    case Implication::einstein: return "einstein";
    }
    return "?";
}

struct HolonomyCandidate
{
    GroupFamily family = GroupFamily::SO;
    /// Group parameter m; 0 for G2 and Spin(7).
    int m = 0;
    /// Manifold dimension n the row requires.
    int manifold_dimension = 0;
    std::vector<Implication> implications;

    std::string name() const
    {
        const auto p = std::to_string(m);
        switch (family) {
        case GroupFamily::SO: return "SO(" + p + ")";
        case GroupFamily::U: return "U(" + p + ")";
        case GroupFamily::SU: return "SU(" + p + ")";
        case GroupFamily::SpSp1: return "Sp(" + p + ")·Sp(1)";
        case GroupFamily::Sp: return "Sp(" + p + ")";
        case GroupFamily::G2: return "G2";
        case GroupFamily::Spin7: return "Spin(7)";
        }
        return "?";
    }

    bool operator==(const HolonomyCandidate&) const = default;
};

/// Evidence about a manifold. Unknown (empty) optional flags never remove a row.
struct EvidenceFlags
{
    int n = 0;
    bool simply_connected = false;
    bool irreducible = false;
    bool nonsymmetric = false;
    std::optional<bool> einstein;
    std::optional<bool> ricci_flat;
    std::optional<bool> admits_kaehler;
    bool exponential_family = false;

    bool operator==(const EvidenceFlags&) const = default;
};

/// Every row of the table whose dimension rule admits n, before filtering.
inline std::vector<HolonomyCandidate> berger_rows(int n)
{
    if (n < 1)
        throw InvalidArgument("manifold dimension must be positive");
    using I = Implication;
    std::vector<HolonomyCandidate> rows;
    rows.push_back({GroupFamily::SO, n, n, {}});
    if (n % 2 == 0) {
        rows.push_back({GroupFamily::U, n / 2, n, {I::kaehler}});
        rows.push_back({GroupFamily::SU, n / 2, n, {I::ricci_flat, I::kaehler}});
    }
    if (n % 4 == 0) {
        rows.push_back({GroupFamily::SpSp1, n / 4, n, {I::einstein}});
        rows.push_back({GroupFamily::Sp, n / 4, n, {I::ricci_flat, I::kaehler}});
    }
    if (n == 7)
        rows.push_back({GroupFamily::G2, 0, 7, {I::ricci_flat}});
    if (n == 8)
        rows.push_back({GroupFamily::Spin7, 0, 8, {I::ricci_flat}});
    return rows;
}

inline void validate(const EvidenceFlags& f)
{
    if (f.n < 1)
        throw InvalidArgument("EvidenceFlags.n must be positive");
    if (f.ricci_flat == true && f.einstein == false)
        throw InvalidArgument("ricci_flat requires einstein");
}

inline std::vector<HolonomyCandidate> berger_candidates(const EvidenceFlags& f)
{
    validate(f);
    std::string missing;
    auto note = [&](bool ok, const char* what) {
        if (!ok)
            missing += missing.empty() ? what : std::string(", ") + what;
    };
    note(f.simply_connected, "simply_connected");
    note(f.irreducible, "irreducible");
    note(f.nonsymmetric, "nonsymmetric");
    if (!missing.empty())
        throw HypothesesNotMet("Berger table needs a simply connected, irreducible, nonsymmetric manifold; failed: " +
                               missing);

    // A manifold that is not Einstein is not Ricci-flat either.
    const bool not_einstein = f.einstein == false;
    const bool not_ricci_flat = f.ricci_flat == false || not_einstein;
    const bool no_kaehler = f.admits_kaehler == false || f.exponential_family;

    std::vector<HolonomyCandidate> out;
    for (auto& row : berger_rows(f.n)) {
        bool keep = true;
        for (auto imp : row.implications) {
            if (imp == Implication::einstein && not_einstein)
                keep = false;
            if (imp == Implication::ricci_flat && not_ricci_flat)
                keep = false;
            if (imp == Implication::kaehler && no_kaehler)
                keep = false;
        }
        if (keep)
            out.push_back(std::move(row));
    }
    return out;
}

inline int so_dimension(int n) { return n * (n - 1) / 2; }

} // namespace infogeo
