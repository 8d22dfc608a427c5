#pragma once
// Independent oracles shared by the unit tests and the acceptance binary.

#include "infogeo/berger.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using namespace infogeo;

using Names = std::set<std::string>;
using Tri = std::optional<bool>;

inline Names names(const std::vector<HolonomyCandidate>& c)
{
    Names out;
    for (const auto& x : c)
        out.insert(x.name());
    return out;
}

inline std::string s(int m) { return std::to_string(m); }

// Hand transcription of the table: each row with the geometric properties it forces.
// A row survives unless the evidence definitely rules out one of its properties.
inline Names berger_table(const EvidenceFlags& f)
{
    const bool einstein_possible = f.einstein != false;
    const bool ricci_flat_possible = f.ricci_flat != false && einstein_possible;
    const bool kaehler_possible = f.admits_kaehler != false && !f.exponential_family;
    const int n = f.n;
    Names out{"SO(" + s(n) + ")"};
    if (n % 2 == 0 && kaehler_possible)
        out.insert("U(" + s(n / 2) + ")");
    if (n % 2 == 0 && kaehler_possible && ricci_flat_possible)
        out.insert("SU(" + s(n / 2) + ")");
    if (n % 4 == 0 && einstein_possible)
        out.insert("Sp(" + s(n / 4) + ")·Sp(1)");
    if (n % 4 == 0 && kaehler_possible && ricci_flat_possible)
        out.insert("Sp(" + s(n / 4) + ")");
    if (n == 7 && ricci_flat_possible)
        out.insert("G2");
    if (n == 8 && ricci_flat_possible)
        out.insert("Spin(7)");
    return out;
}

inline bool consistent(const EvidenceFlags& f) { return !(f.ricci_flat == true && f.einstein == false); }

template <class Visit>
void for_all_flags(int n, Visit visit)
{
    const Tri tri[] = {std::nullopt, false, true};
    for (const auto& e : tri)
        for (const auto& r : tri)
            for (const auto& k : tri)
                for (bool ef : {false, true})
                    visit(EvidenceFlags{n, true, true, true, e, r, k, ef});
}

inline bool subset(const Names& a, const Names& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

// Corollary statements on the admissible holonomy groups; returns the ones the candidate set violates.
inline std::vector<std::string> corollary_violations(const EvidenceFlags& f, const Names& got)
{
    std::vector<std::string> bad;
    const int n = f.n;
    const auto so = "SO(" + s(n) + ")";
    const auto u = "U(" + s(n / 2) + ")";
    const auto spsp = "Sp(" + s(n / 4) + ")·Sp(1)";
    auto need = [&](bool ok, const std::string& what) {
        if (!ok)
            bad.push_back(what + " (n=" + s(n) + ")");
    };
    need(got.count(so) == 1, "SO(n) admissible");
    need(!(n % 2 == 1 && n != 7) || got == Names{so}, "generic odd n");
    need(n != 7 || subset(got, Names{"SO(7)", "G2"}), "generic n=7");
    need(!(f.einstein == false && n % 2 == 0) || subset(got, Names{so, u}), "generic non-Einstein even n");
    if (!f.exponential_family)
        return bad;
    for (const auto& g : got)
        need(g.rfind("U(", 0) != 0 && g.rfind("SU(", 0) != 0 && (g.rfind("Sp(", 0) != 0 || g == spsp),
             "no Kaehler group " + g);
    need(n == 7 || n == 8 || subset(got, n % 4 == 0 ? Names{so, spsp} : Names{so}), "family (1)");
    need(n != 7 || subset(got, Names{"SO(7)", "G2"}), "family (2)");
    need(!(n % 2 == 1 && n != 7) || got == Names{so}, "family (3)");
    need(n % 4 != 2 || got == Names{so}, "family (4)");
    need(n != 8 || subset(got, Names{"SO(8)", "Sp(2)·Sp(1)", "Spin(7)"}), "family (5)");
    need(!(n % 4 == 0 && n != 8) || subset(got, Names{so, spsp}), "family (6)");
    need(f.einstein != false || got == Names{so}, "family (7)");
    return bad;
}

// Brute force: flatten matrices, orthonormalise, add every pairwise commutator until the rank stops growing.
inline int bracket_closure_oracle(const std::vector<Eigen::MatrixXd>& gens)
{
    if (gens.empty())
        return 0;
    const auto n = gens.front().rows();
    auto rank_basis = [&](const std::vector<Eigen::MatrixXd>& mats) {
        Eigen::MatrixXd cols(n * n, static_cast<Eigen::Index>(mats.size()));
        for (std::size_t k = 0; k < mats.size(); ++k)
            cols.col(static_cast<Eigen::Index>(k)) = mats[k].reshaped() / std::max(1e-300, mats[k].norm());
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        std::vector<Eigen::MatrixXd> basis;
        if (sv.size() == 0 || sv(0) < 1e-12)
            return basis;
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) > 1e-8 * sv(0))
                basis.push_back(svd.matrixU().col(k).reshaped(n, n));
        return basis;
    };
    auto basis = rank_basis(gens);
    while (true) {
        if (basis.empty())
            return 0;
        auto all = basis;
        for (std::size_t a = 0; a < basis.size(); ++a)
            for (std::size_t b = a + 1; b < basis.size(); ++b)
                all.push_back(basis[a] * basis[b] - basis[b] * basis[a]);
        auto next = rank_basis(all);
        if (next.size() == basis.size())
            return static_cast<int>(basis.size());
        basis = std::move(next);
    }
}

} // namespace oracle
