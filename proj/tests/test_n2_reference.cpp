#include "infogeo/n2_reference.hpp"

#include <gtest/gtest.h>

using namespace infogeo;
using namespace infogeo::reference;

namespace {

std::vector<Eigen::VectorXd> points(std::size_t count = 20) { return normal_model(2).sample_points(count, 77); }

} // namespace

TEST(N2Reference, SymbolMapsDifferOnlyInTheSecondVarianceSlot)
{
    MeanCovariancePoint p{Eigen::Vector2d(0.1, 0.2), Eigen::Matrix2d{{2.0, 0.3}, {0.3, 1.5}}};
    const auto a = symbols(p, SymbolMap::A);
    const auto b = symbols(p, SymbolMap::B);
    EXPECT_EQ(a.s1, 2.0);
    EXPECT_EQ(a.s2, 0.3);
    EXPECT_EQ(a.s22, 1.5);
    EXPECT_EQ(b.s2, 1.5);
    EXPECT_EQ(b.s12, 0.3);
    EXPECT_EQ(a.s11, b.s11);
}

TEST(N2Reference, HardSectionalValuesAreConstant)
{
    const auto m = normal_model(2);
    for (const auto& t : points()) {
        const auto mc = meancov_from_natural(2, as_span(t));
        const auto b = curvature_bundle(m, as_span(t));
        const auto s = symbols(mc, SymbolMap::A);
        EXPECT_NEAR(sectional_entry(0, 1, s, 0.0), 0.25, 1e-10);
        EXPECT_NEAR(sectional_entry(0, 2, s, 0.0), -0.5, 1e-10);
        EXPECT_NEAR(sectional_entry(1, 4, s, 0.0), -0.5, 1e-10);
        EXPECT_NEAR(b.K(0, 1), 0.25, 1e-8);
        EXPECT_NEAR(b.K(0, 2), -0.5, 1e-8);
        EXPECT_NEAR(b.K(1, 4), -0.5, 1e-8);
        EXPECT_NEAR(b.ricci(0, 0), -0.5 * mc.sigma(0, 0), 1e-8);
        EXPECT_NEAR(ricci_entry(0, 0, s, 0.0), b.ricci(0, 0), 1e-8);
    }
}

TEST(N2Reference, MetricTableFollowsMapB)
{
    const auto m = normal_model(2);
    for (const auto& t : points(10)) {
        const auto s = symbols(meancov_from_natural(2, as_span(t)), SymbolMap::B);
        const auto g = fisher_metric(m, as_span(t));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                EXPECT_LE(scaled_error(metric_entry(i, j, s), g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))),
                          1e-9)
                    << i << "," << j;
    }
}

TEST(N2Reference, AuditCoversEveryPrintedEntry)
{
    const auto ledger = audit(points());
    EXPECT_EQ(ledger.entries.size(), 15u + 10u + 15u);
    EXPECT_EQ(ledger.points, 20u);
    EXPECT_EQ(ledger.tolerance, 1e-6);
    for (const auto& e : ledger.entries) {
        if (e.quantity == "g") {
            EXPECT_TRUE(e.matches_map_b) << "g" << e.i << e.j;
        }
        if (e.hard) {
            EXPECT_TRUE(e.matches()) << e.quantity << e.i << e.j;
        }
        if (!e.matches()) {
            EXPECT_TRUE(e.first_mismatch_point.has_value());
        }
    }
    EXPECT_GE(ledger.audited_match_fraction(), 0.8);
}

TEST(N2Reference, CurvatureTablesScaleWithAlpha)
{
    const auto ledger = audit(points(10), 0.5);
    std::size_t curvature = 0, matched = 0;
    for (const auto& e : ledger.entries)
        if (e.quantity != "g") {
            ++curvature;
            matched += e.matches_map_a ? 1 : 0;
        }
    EXPECT_EQ(curvature, 25u);
    EXPECT_EQ(matched, 25u);
}

TEST(N2Reference, ScaledErrorUsesTheComputedMagnitude)
{
    EXPECT_DOUBLE_EQ(scaled_error(1.5, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(scaled_error(110.0, 100.0), 0.1);
    EXPECT_DOUBLE_EQ(scaled_error(0.2, 0.0), 0.2);
}

TEST(N2Reference, HardItemSelection)
{
    EXPECT_TRUE(is_hard_item(Quantity::metric, 3, 4));
    EXPECT_TRUE(is_hard_item(Quantity::sectional, 0, 1));
    EXPECT_TRUE(is_hard_item(Quantity::sectional, 1, 4));
    EXPECT_FALSE(is_hard_item(Quantity::sectional, 2, 3));
    EXPECT_TRUE(is_hard_item(Quantity::ricci, 0, 0));
    EXPECT_FALSE(is_hard_item(Quantity::ricci, 1, 1));
}
