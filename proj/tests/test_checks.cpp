#include "infogeo/checks.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace infogeo;

namespace {

std::vector<Eigen::VectorXd> pts(const ExponentialFamilyModel& m, std::size_t count = 20)
{
    return m.sample_points(count, default_check_seed);
}

} // namespace

TEST(Einstein, N1HoldsWithMinusOneHalf)
{
    const auto m = normal_model(1);
    const auto r = is_einstein(m, pts(m));
    EXPECT_EQ(r.verdict, Verdict::holds);
    ASSERT_TRUE(r.value.has_value());
    EXPECT_NEAR(*r.value, -0.5, 1e-8);
    EXPECT_EQ(r.witness.size(), 20u);
    EXPECT_EQ(r.tolerance, default_einstein_tolerance);
}

TEST(Einstein, HigherNormalsFailEverywhere)
{
    for (int d : {2, 3}) {
        const auto m = normal_model(d);
        const auto r = is_einstein(m, pts(m));
        EXPECT_EQ(r.verdict, Verdict::fails);
        EXPECT_FALSE(r.value.has_value());
        ASSERT_EQ(r.witness.size(), 20u);
        // The coordinate residual depends on the chart; it stays far above the tolerance but dips below 0.1.
        for (const auto& w : r.witness)
            EXPECT_GT(w.residual, 0.05) << "d=" << d << " point " << w.point_index;
    }
}

TEST(Einstein, FrameResidualIsConstantOnHomogeneousNormals)
{
    // Affine maps act transitively by isometries, so the Ricci endomorphism has the same spectrum everywhere.
    for (int d : {1, 2, 3}) {
        const auto m = normal_model(d);
        const auto bundles = bundles_at(m, pts(m));
        const double first = einstein_fit(bundles.front()).frame_residual;
        for (const auto& b : bundles)
            EXPECT_NEAR(einstein_fit(b).frame_residual, first, 1e-8) << "d=" << d;
        if (d == 1) {
            EXPECT_LT(first, 1e-10);
        } else {
            EXPECT_GT(first, 0.4);
        }
    }
}

TEST(Einstein, FrameResidualIgnoresCoordinateScaling)
{
    const auto m = normal_model(2);
    const auto b = bundles_at(m, pts(m, 1)).front();
    auto scaled = b;
    Eigen::VectorXd s(5);
    s << 1.0, 10.0, 0.2, 3.0, 1.0;
    scaled.g = s.asDiagonal() * b.g * s.asDiagonal();
    scaled.ricci = s.asDiagonal() * b.ricci * s.asDiagonal();
    EXPECT_NEAR(einstein_fit(scaled).frame_residual, einstein_fit(b).frame_residual, 1e-10);
    EXPECT_GT(std::abs(einstein_fit(scaled).relative_residual - einstein_fit(b).relative_residual), 1e-3);
}

TEST(Einstein, FlatModelIsRicciFlat)
{
    const auto m = flat_model(2);
    const auto r = is_einstein(m, pts(m));
    EXPECT_EQ(r.verdict, Verdict::holds);
    EXPECT_EQ(*r.value, 0.0);
}

TEST(Einstein, NeedsFivePoints)
{
    const auto m = normal_model(1);
    EXPECT_THROW(is_einstein(m, pts(m, 4)), InvalidArgument);
}

TEST(ConstantCurvature, N1HoldsN2Fails)
{
    const auto n1 = normal_model(1);
    const auto r1 = constant_curvature(n1, pts(n1));
    EXPECT_EQ(r1.verdict, Verdict::holds);
    EXPECT_NEAR(*r1.value, -0.5, 1e-8);
    const auto n2 = normal_model(2);
    EXPECT_EQ(constant_curvature(n2, pts(n2)).verdict, Verdict::fails);
}

TEST(ConstantCurvature, InconclusiveInDimensionOne)
{
    const auto m = poisson_model();
    const auto r = constant_curvature(m, pts(m));
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    EXPECT_FALSE(r.note.empty());
}

TEST(Flat, OnlyTheFlatModelIsFlat)
{
    const auto f = flat_model(3);
    EXPECT_EQ(is_flat(f, pts(f)).verdict, Verdict::holds);
    const auto n1 = normal_model(1);
    const auto r = is_flat(n1, pts(n1));
    EXPECT_EQ(r.verdict, Verdict::fails);
    for (const auto& w : r.witness)
        EXPECT_GT(w.residual, r.tolerance);
}

TEST(SignProfile, MatchesTheExpectedPatterns)
{
    const auto f = flat_model(2);
    EXPECT_EQ(curvature_sign_profile(f, pts(f)), SignProfile::zero);
    const auto n1 = normal_model(1);
    EXPECT_EQ(curvature_sign_profile(n1, pts(n1)), SignProfile::all_nonpositive);
    for (int d : {2, 3}) {
        const auto m = normal_model(d);
        EXPECT_EQ(curvature_sign_profile(m, pts(m)), SignProfile::mixed);
    }
}

TEST(Partition, ConnectedGraphGivesNothing)
{
    for (int d : {2, 3}) {
        const auto m = normal_model(d);
        for (const auto& b : bundles_at(m, pts(m)))
            EXPECT_FALSE(block_diagonal_partition(b.K).has_value());
    }
}

TEST(Partition, FlatModelSplitsIntoSingletons)
{
    const auto m = flat_model(3);
    const auto b = bundles_at(m, pts(m, 1)).front();
    const auto p = block_diagonal_partition(b.K);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(*p, (Partition{{0}, {1}, {2}}));
}

TEST(Partition, FindsHandBuiltBlocks)
{
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(5, 5);
    auto link = [&](int i, int j, double v) { K(i, j) = K(j, i) = v; };
    link(0, 3, -0.5);
    link(1, 4, 0.2);
    link(4, 2, 1e-3);
    const auto p = block_diagonal_partition(K);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(*p, (Partition{{0, 3}, {1, 2, 4}}));
    // Entries inside the tolerance do not connect.
    link(0, 1, 1e-9);
    EXPECT_TRUE(block_diagonal_partition(K).has_value());
    link(0, 1, 1e-7);
    EXPECT_FALSE(block_diagonal_partition(K).has_value());
}

TEST(Partition, EquivariantUnderIndexPermutation)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 6;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (u(rng) > 0.6)
                    K(i, j) = K(j, i) = u(rng);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::MatrixXd KP(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                KP(i, j) = K(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        // Map the permuted partition back to original labels and compare as sets of sets.
        auto canonical = [](std::optional<Partition> p) {
            if (!p)
                return Partition{};
            for (auto& block : *p)
                std::sort(block.begin(), block.end());
            std::sort(p->begin(), p->end());
            return *p;
        };
        auto back = block_diagonal_partition(KP);
        if (back)
            for (auto& block : *back)
                for (auto& i : block)
                    i = static_cast<std::size_t>(perm[i]);
        EXPECT_EQ(canonical(block_diagonal_partition(K)), canonical(back));
    }
}

TEST(Checks, VerdictsDoNotDependOnPointOrder)
{
    const auto m = normal_model(2);
    auto p = pts(m, 10);
    const auto a = is_einstein(m, p);
    std::reverse(p.begin(), p.end());
    const auto b = is_einstein(m, p);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(curvature_sign_profile(m, p), SignProfile::mixed);
}

TEST(Checks, ReportsCarryTheirTolerance)
{
    const auto m = normal_model(1);
    EXPECT_EQ(is_einstein(m, pts(m), 1e-4).tolerance, 1e-4);
    EXPECT_EQ(constant_curvature(m, pts(m), 1e-3).tolerance, 1e-3);
    EXPECT_EQ(is_flat(m, pts(m), 1e-2).tolerance, 1e-2);
}
