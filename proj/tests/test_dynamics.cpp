#include "corpus.hpp"

#include <gtest/gtest.h>

using namespace pwc;
using namespace pwc::testing;

TEST(AffineMapTest, ImagesAndPreimagesOfBoxes) {
    DiagonalAffineMap phi(Point{R("-1/4"), R("1/3")}, Point{R("7/8"), R("1/3")});
    Box b(Point{R("1/2"), R("0")}, Point{R("1"), R("1")});
    Box img = phi.image(b);
    EXPECT_EQ(img, Box(Point{R("5/8"), R("1/3")}, Point{R("3/4"), R("2/3")}));
    EXPECT_EQ(phi.preimage(img), b);
    Point x{R("3/5"), R("1/7")};
    EXPECT_EQ(phi.inverse(phi(x)), x);
}

TEST(AffineMapTest, FacetPreimageKeepsAxis) {
    DiagonalAffineMap phi(Point{R("1/2"), R("-1/2")}, Point{R("1/4"), R("1")});
    Facet f{0, R("1/2"), Box::interval(R("0"), R("1"))};
    Facet g = phi.preimage(f);
    EXPECT_EQ(g.axis, 0u);
    EXPECT_EQ(g.value, R("1/2"));
    EXPECT_EQ(g.extent, Box::interval(R("0"), R("2")));
}

TEST(AffineMapTest, CompositionOrder) {
    DiagonalAffineMap a(Point{R("1/2")}, Point{R("1/8")});
    DiagonalAffineMap b(Point{R("1/4")}, Point{R("1/2")});
    Point x{R("1/3")};
    EXPECT_EQ(compose(a, b)(x), a(b(x)));
    EXPECT_EQ(compose(a, b).fixed_point(), Point{R("3/7")});
}

TEST(ValidateTest, CorpusMapsAreValid) {
    for (const auto& f : markov_corpus()) EXPECT_TRUE(validate(f).ok());
    EXPECT_TRUE(validate(E2()).ok());
}

TEST(ValidateTest, EscapingImageIsReported) {
    auto f = interval_map({R("0"), R("1/2"), R("1")}, {{R("1/2"), R("1/8")}, {R("1/4"), R("3/4")}});
    auto rep = validate(f);
    ASSERT_EQ(rep.violations.size(), 1u);
    EXPECT_EQ(rep.violations[0].kind, ViolationKind::ImageEscapes);
    EXPECT_EQ(*rep.violations[0].first, 1u);
}

TEST(ValidateTest, ExpandingAndDegeneratePieces) {
    auto f = interval_map({R("0"), R("1/2"), R("1")}, {{R("1"), R("0")}, {R("0"), R("1/2")}});
    auto rep = validate(f);
    std::vector<ViolationKind> kinds;
    for (const auto& v : rep.violations) kinds.push_back(v.kind);
    EXPECT_NE(std::find(kinds.begin(), kinds.end(), ViolationKind::NotContracting), kinds.end());
    EXPECT_NE(std::find(kinds.begin(), kinds.end(), ViolationKind::NotInjective), kinds.end());
}

TEST(ValidateTest, MarginIsSmallestImageGap) {
    EXPECT_EQ(validation_margin(E1()), R("1/8"));
    EXPECT_EQ(validation_margin(single_piece()), R("1/4"));
}

TEST(OrbitTest, ExactForwardSteps) {
    auto seg = orbit(E1(), {R("1/16")}, 3);
    ASSERT_EQ(seg.points.size(), 4u);
    EXPECT_EQ(seg.points[1][0], R("5/32"));
    EXPECT_EQ(seg.points[2][0], R("13/64"));
    EXPECT_EQ(seg.points[3][0], R("29/128"));
    EXPECT_EQ(seg.itinerary, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(OrbitTest, FixedPointOrbitIsConstant) {
    auto seg = orbit(E1(), {R("2/3")}, 5);
    for (const auto& p : seg.points) EXPECT_EQ(p[0], R("2/3"));
    EXPECT_EQ(seg.itinerary, (std::vector<std::size_t>(5, 1)));
    EXPECT_TRUE(orbit(E1(), {R("2/3")}, 0).itinerary.empty());
}

TEST(OrbitTest, OrbitMatchesRepeatedEvaluation) {
    auto f = E6();
    Point x{R("1/3"), R("4/5")};
    auto seg = orbit(f, x, 6);
    Point y = x;
    for (int k = 0; k < 6; ++k) y = evaluate(f, y);
    EXPECT_EQ(seg.points.back(), y);
}

TEST(OwnerTest, BoundaryGoesToLowestIndex) {
    auto f = E1();
    EXPECT_EQ(f.owner({R("1/2")}), 0u);
    EXPECT_EQ(f.owner({R("1")}), 1u);
    EXPECT_FALSE(f.owner({R("11/10")}));
    EXPECT_THROW(evaluate(f, {R("-1/10")}), OutsideDomain);
}

TEST(OwnerTest, DistinctPointsInOneElementStayDistinct) {
    auto f = E6();
    Point a{R("1/5"), R("1/5")}, b{R("1/5"), R("2/5")};
    EXPECT_NE(evaluate(f, a), evaluate(f, b));
}
