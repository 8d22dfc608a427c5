// Acceptance run: one PASS/FAIL line per criterion. Every tolerance, budget and seed is pinned here.

#include "infogeo/n2_reference.hpp"
#include "infogeo/report.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace infogeo;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

struct Criterion
{
    int id;
    const char* title;
    double time_limit_s; // <= 0 means no limit
    std::function<Outcome()> check;
};

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

Eigen::VectorXd n1_point(double mu, double var)
{
    return natural_from_meancov(1, {Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, var)});
}

// ---------------------------------------------------------------------------

Outcome metric_n1()
{
    const auto m = normal_model(1);
    const Eigen::Matrix2d expected{{1.0, 0.0}, {0.0, 2.0}};
    const double origin_err = (fisher_metric(m, as_span(n1_point(0.0, 1.0))) - expected).cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (const auto& p : m.sample_points(100, default_check_seed)) {
        const auto mc = meancov_from_natural(1, as_span(p));
        const double mu = mc.mu(0), s2 = mc.sigma(0, 0);
        const Eigen::Matrix2d sym{{s2, 2 * mu * s2}, {2 * mu * s2, 2 * s2 * (2 * mu * mu + s2)}};
        const Eigen::MatrixXd g = fisher_metric(m, as_span(p));
        worst = std::max(worst, (g - sym).cwiseAbs().maxCoeff() / sym.cwiseAbs().maxCoeff());
    }
    return {origin_err <= 1e-10 && worst <= 1e-9,
            "origin error " + fmt(origin_err) + " (tol 1e-10), worst relative error at 100 points " + fmt(worst) +
                " (tol 1e-9)"};
}

Outcome sectional_n1()
{
    const auto m = normal_model(1);
    double worst = 0.0;
    for (const auto& p : m.sample_points(100, default_check_seed))
        worst = std::max(worst, std::abs(curvature_bundle(m, as_span(p)).K(0, 1) + 0.5));
    return {worst <= 1e-8, "max |K + 1/2| at 100 points " + fmt(worst) + " (tol 1e-8)"};
}

Outcome appendix_n2()
{
    const auto m = normal_model(2);
    const auto pts = m.sample_points(default_check_points, default_check_seed);
    double k12 = 0, k13 = 0, k25 = 0, kii = 0, ric = 0;
    for (const auto& p : pts) {
        const auto b = curvature_bundle(m, as_span(p));
        const auto mc = meancov_from_natural(2, as_span(p));
        k12 = std::max(k12, std::abs(b.K(0, 1) - 0.25));
        k13 = std::max(k13, std::abs(b.K(0, 2) + 0.5));
        k25 = std::max(k25, std::abs(b.K(1, 4) + 0.5));
        kii = std::max(kii, b.K.diagonal().cwiseAbs().maxCoeff());
        ric = std::max(ric, std::abs(b.ricci(0, 0) + 0.5 * mc.sigma(0, 0)));
    }
    const auto ledger = reference::audit(pts, 0.0, 1e-6);
    bool hard_ok = true;
    std::string mismatches;
    for (const auto& e : ledger.entries) {
        if (e.hard && !e.matches())
            hard_ok = false;
        if (!e.matches())
            mismatches += " " + e.quantity + std::to_string(e.i) + std::to_string(e.j);
    }
    const bool pass = std::max({k12, k13, k25, kii, ric}) <= 1e-8 && hard_ok;
    return {pass, "K12/K13/K25/Kii/Ric11 worst errors " + fmt(k12) + "/" + fmt(k13) + "/" + fmt(k25) + "/" + fmt(kii) +
                      "/" + fmt(ric) + " (tol 1e-8); audited entries matching within 1e-6: " +
                      fmt(100.0 * ledger.audited_match_fraction()) + "% (target 80%)" +
                      (mismatches.empty() ? "" : ", mismatches:" + mismatches)};
}

// Uses the documented default sampling policy (20 points, default seed) so the verdict is not seed-picked.
Outcome einstein()
{
    const auto n1 = normal_model(1);
    const auto r1 = is_einstein(n1, n1.sample_points(default_check_points, default_check_seed));
    const bool n1_ok = r1.verdict == Verdict::holds && r1.value && std::abs(*r1.value + 0.5) <= 1e-8;
    std::string detail = "N1 k = " + (r1.value ? fmt(*r1.value) : std::string("none"));
    bool rest_ok = true;
    for (int d : {2, 3}) {
        const auto m = normal_model(d);
        const auto bundles = bundles_at(m, m.sample_points(default_check_points, default_check_seed));
        double least = HUGE_VAL, frame = HUGE_VAL;
        std::size_t above = 0;
        for (const auto& b : bundles) {
            const auto fit = einstein_fit(b);
            least = std::min(least, fit.relative_residual);
            frame = std::min(frame, fit.frame_residual);
            above += fit.relative_residual > 0.1 ? 1 : 0;
        }
        rest_ok = rest_ok && is_einstein(bundles).verdict == Verdict::fails && above == bundles.size();
        detail += ", N" + std::to_string(d) + " fails; relative residual > 0.1 at " + std::to_string(above) + "/" +
                  std::to_string(bundles.size()) + " points (smallest " + fmt(least) +
                  "; orthonormal-frame residual " + fmt(frame) + ")";
    }
    return {n1_ok && rest_ok, detail};
}

Outcome irreducibility()
{
    bool ok = true;
    std::string detail;
    for (int d : {2, 3}) {
        const auto m = normal_model(d);
        const auto bundles = bundles_at(m, m.sample_points(default_check_points, default_check_seed));
        std::size_t connected = 0;
        for (const auto& b : bundles)
            connected += block_diagonal_partition(b.K) ? 0 : 1;
        const auto profile = curvature_sign_profile(bundles);
        ok = ok && connected == bundles.size() && profile == SignProfile::mixed;
        detail += (detail.empty() ? "" : ", ") + std::string("N") + std::to_string(d) + " connected at " +
                  std::to_string(connected) + "/" + std::to_string(bundles.size()) + ", profile " + to_string(profile);
    }
    return {ok, detail};
}

Outcome algebra_dimensions()
{
    struct Case
    {
        ExponentialFamilyModel model;
        int expected;
        std::size_t points;
    };
    const std::vector<Case> cases = {{flat_model(2), 0, 20}, {normal_model(1), 1, 20}, {normal_model(2), 10, 20},
                                     {normal_model(3), 36, 20}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        int lo = 1 << 30, hi = -1;
        bool oracle_ok = true;
        for (const auto& p : c.model.sample_points(c.points, default_check_seed)) {
            const auto b = curvature_bundle(c.model, as_span(p));
            const int dim = curvature_algebra(b).dimension;
            lo = std::min(lo, dim);
            hi = std::max(hi, dim);
            const auto l = orthonormal_factor(b.g);
            std::vector<Eigen::MatrixXd> gens;
            for (const auto& a : curvature_operators(b))
                gens.push_back(to_orthonormal_frame(l, a));
            oracle_ok = oracle_ok && oracle::bracket_closure_oracle(gens) == dim;
        }
        ok = ok && lo == c.expected && hi == c.expected && oracle_ok;
        detail += (detail.empty() ? "" : ", ") + c.model.name + " " + std::to_string(lo) +
                  (lo == hi ? "" : ".." + std::to_string(hi)) + " (expect " + std::to_string(c.expected) + ", " +
                  std::to_string(c.points) + " points" + (oracle_ok ? "" : ", ORACLE DISAGREES") + ")";
    }
    return {ok, detail};
}

Outcome classification()
{
    const char* expected[] = {"SO(2)", "SO(5)", "SO(9)"};
    bool ok = true;
    std::string detail;
    for (int d = 1; d <= 3; ++d) {
        const auto v = classify(normal_model(d), default_check_points, default_check_seed);
        auto listed = [&](const std::string& key) {
            return std::any_of(v.assumptions.begin(), v.assumptions.end(),
                               [&](const std::string& a) { return a.find(key) != std::string::npos; });
        };
        ok = ok && v.verdict == expected[d - 1] && listed("simply_connected") && listed("admits_kaehler");
        detail += (detail.empty() ? "" : ", ") + std::string("N") + std::to_string(d) + " -> " + v.verdict;
    }
    return {ok, detail + "; assumption ledger names simply_connected and admits_kaehler"};
}

Outcome berger_table()
{
    std::size_t cases = 0, wrong = 0;
    std::string first;
    for (int n = 2; n <= 16; ++n)
        oracle::for_all_flags(n, [&](const EvidenceFlags& f) {
            if (!oracle::consistent(f))
                return;
            ++cases;
            const auto got = oracle::names(berger_candidates(f));
            auto bad = oracle::corollary_violations(f, got);
            if (got != oracle::berger_table(f))
                bad.push_back("table transcription (n=" + std::to_string(n) + ")");
            if (!bad.empty() && first.empty())
                first = bad.front();
            wrong += bad.empty() ? 0 : 1;
        });
    return {wrong == 0, std::to_string(cases) + " flag combinations for n = 2..16, " + std::to_string(wrong) +
                            " disagreeing" + (first.empty() ? "" : " (first: " + first + ")")};
}

PathSpec random_loop(const ExponentialFamilyModel& m, const Eigen::VectorXd& base, std::mt19937_64& rng, double radius)
{
    std::uniform_real_distribution<double> u(-radius, radius);
    PathSpec loop{{base}, true};
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd w = base;
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w(i) += u(rng);
        if (!m.potential.domain().contains(as_span(w)))
            w = base + 0.1 * (w - base);
        loop.waypoints.push_back(w);
    }
    return loop;
}

Outcome transport()
{
    constexpr std::size_t steps = 10000;
    const double tol = default_transport_tolerance;
    std::mt19937_64 rng(109);
    struct Share
    {
        ExponentialFamilyModel model;
        std::size_t loops;
    };
    const std::vector<Share> suite = {{flat_model(2), 10}, {normal_model(1), 18}, {normal_model(2), 18},
                                      {normal_model(3), 4}};
    std::size_t total = 0, good = 0;
    double worst_orth = 0.0, least_det = HUGE_VAL;
    for (const auto& s : suite)
        for (const auto& base : s.model.sample_points(s.loops, 110)) {
            const auto t = parallel_transport_loop(s.model, random_loop(s.model, base, rng, 0.05), steps, tol);
            ++total;
            worst_orth = std::max(worst_orth, t.orthogonality_residual);
            least_det = std::min(least_det, t.determinant);
            good += (t.orthogonality_residual < 1e-6 && t.determinant > 0.0) ? 1 : 0;
        }

    // Inversion and base-point conjugation on N2 and N1.
    const auto n2 = normal_model(2);
    const auto base2 = n2.sample_points(1, 111).front();
    const auto loop2 = random_loop(n2, base2, rng, 0.05);
    const auto fwd = parallel_transport_loop(n2, loop2, steps, tol).matrix;
    const auto back = parallel_transport_loop(n2, loop2.reversed(), steps, tol).matrix;
    const double inversion = (back * fwd - Eigen::MatrixXd::Identity(5, 5)).norm();

    const auto n1 = normal_model(1);
    const auto x = n1.sample_points(1, 112).front();
    const auto loop1 = random_loop(n1, x, rng, 0.1);
    Eigen::VectorXd y = x;
    y(0) += 0.15;
    y(1) -= 0.05;
    const auto p_gamma = parallel_transport_loop(n1, loop1, steps, tol).matrix;
    const auto p_rho = parallel_transport_path(n1, PathSpec{{x, y}, false}, steps, tol).matrix;
    PathSpec conj{{y, x}, true};
    for (std::size_t k = 1; k < loop1.waypoints.size(); ++k)
        conj.waypoints.push_back(loop1.waypoints[k]);
    conj.waypoints.push_back(x);
    const auto p_conj = parallel_transport_loop(n1, conj, 2 * steps, tol).matrix;
    const double conjugation = (p_conj - p_rho * p_gamma * p_rho.inverse()).norm();

    // Cubic convergence of the loop-curvature residual at the reference points: N1 at (mu=0, sigma=1) and
    // N2 at mu=(0.5,-0.3), Sigma=[[1,0.3],[0.3,0.8]]. Random points are swept as well and reported, not gated:
    // where |theta| is small the first halving from eps=0.1 is still pre-asymptotic for N1.
    const std::vector<std::pair<int, Eigen::VectorXd>> refs = {
        {1, n1_point(0.0, 1.0)},
        {2, natural_from_meancov(2, {Eigen::Vector2d(0.5, -0.3), Eigen::Matrix2d{{1.0, 0.3}, {0.3, 0.8}}})}};
    auto ratios_at = [](const ExponentialFamilyModel& m, const Eigen::VectorXd& theta) {
        std::vector<double> r;
        for (double eps : {0.1, 0.05, 0.025})
            r.push_back(loop_curvature_consistency(m, theta, 0, 1, eps, 2000));
        return std::vector<double>{r[0] / r[1], r[1] / r[2]};
    };
    std::string ratios;
    bool cubic = true;
    for (const auto& [d, theta] : refs) {
        for (double ratio : ratios_at(normal_model(d), theta)) {
            cubic = cubic && std::abs(ratio - 8.0) <= 2.0;
            ratios += (ratios.empty() ? "" : " ") + std::string("N") + std::to_string(d) + ":" + fmt(ratio);
        }
    }
    std::string sweep;
    for (int d : {1, 2}) {
        const auto m = normal_model(d);
        std::size_t within = 0, count = 0;
        for (const auto& p : m.sample_points(12, 113)) {
            const auto r = ratios_at(m, p);
            within += (std::abs(r[0] - 8.0) <= 2.0 && std::abs(r[1] - 8.0) <= 2.0) ? 1 : 0;
            ++count;
        }
        sweep += (sweep.empty() ? "" : ", ") + std::string("N") + std::to_string(d) + " " + std::to_string(within) +
                 "/" + std::to_string(count);
    }
    const bool ok = good == total && total == 50 && inversion <= 10 * tol && conjugation <= 10 * tol && cubic;
    return {ok, std::to_string(good) + "/" + std::to_string(total) + " loops at " + std::to_string(steps) +
                    " steps ok (worst residual " + fmt(worst_orth) + ", least det " + fmt(least_det) +
                    "); inversion " + fmt(inversion) + ", conjugation " + fmt(conjugation) + " (tol " + fmt(10 * tol) +
                    "); eps-halving ratios at reference points " + ratios + " (need 8 +- 2); random points with both ratios in 8 +- 2: " + sweep};
}

Outcome monte_carlo()
{
    constexpr std::size_t samples = 1000000;
    constexpr double z = 4.0;
    std::string detail;
    bool ok = true;
    std::uint64_t seed = 114;
    for (const auto& name : model_names()) {
        const auto m = make_model(name);
        if (!m.make_sampler)
            continue;
        double worst = 0.0;
        for (const auto& p : m.sample_points(10, seed++)) {
            const auto th = as_span(p);
            const Eigen::MatrixXd g = fisher_metric(m, th);
            const auto gmc = fisher_metric_mc(m, th, samples, seed++);
            for (Eigen::Index i = 0; i < g.rows(); ++i)
                for (Eigen::Index j = 0; j < g.cols(); ++j)
                    worst = std::max(worst, std::abs(gmc.mean(i, j) - g(i, j)) / gmc.standard_error(i, j));
            const auto T = skewness_tensor(m, th);
            const auto tmc = skewness_tensor_mc(m, th, samples, seed++);
            for (std::size_t i = 0; i < m.n; ++i)
                for (std::size_t j = i; j < m.n; ++j)
                    for (std::size_t k = j; k < m.n; ++k)
                        worst = std::max(worst, std::abs(tmc.mean(i, j, k) - T(i, j, k)) / tmc.standard_error(i, j, k));
        }
        ok = ok && worst <= z;
        detail += (detail.empty() ? "" : ", ") + name + " " + fmt(worst);
    }
    return {ok, "largest |MC - analytic| / SE per model: " + detail + " (limit 4, 10 points, 1e6 samples)"};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "N1 Fisher metric", 1.0, metric_n1},
        {2, "N1 sectional curvature", 1.0, sectional_n1},
        {3, "N2 appendix values and audit", 0.0, appendix_n2},
        {4, "Einstein check", 30.0, einstein},
        {5, "Irreducibility evidence", 0.0, irreducibility},
        {6, "Holonomy algebra dimensions", 120.0, algebra_dimensions},
        {7, "Classification of normal families", 0.0, classification},
        {8, "Berger rule table", 0.0, berger_table},
        {9, "Transport invariants", 0.0, transport},
        {10, "Monte-Carlo cross-validation", 60.0, monte_carlo},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.time_limit_s <= 0.0 || secs < c.time_limit_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s criterion %d: %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(),
                    secs, c.time_limit_s > 0.0 ? (", limit " + fmt(c.time_limit_s) + " s").c_str() : "");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
