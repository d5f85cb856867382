#include "corpus.hpp"

#include <gtest/gtest.h>

using namespace pwc;
using pwc::testing::R;

TEST(BoxTest, RejectsDegenerateBoxes) {
    EXPECT_THROW(Box::interval(R("1/2"), R("1/2")), std::invalid_argument);
    EXPECT_THROW(Box(Point{R("0"), R("1")}, Point{R("1"), R("1")}), std::invalid_argument);
}

TEST(BoxTest, MeasuresInSupNorm) {
    Box b(Point{R("0"), R("1/4")}, Point{R("1/2"), R("1")});
    EXPECT_EQ(b.diameter(), R("3/4"));
    EXPECT_EQ(b.volume(), R("3/8"));
    EXPECT_EQ(b.center(), (Point{R("1/4"), R("5/8")}));
    EXPECT_TRUE(b.contains_closed(Point{R("1/2"), R("1")}));
    EXPECT_FALSE(b.contains_open(Point{R("1/2"), R("1/2")}));
}

TEST(BoxTest, IntersectionIsOpen) {
    auto a = Box::interval(R("0"), R("1/2"));
    auto b = Box::interval(R("1/2"), R("1"));
    EXPECT_FALSE(box_intersect(a, b).has_value());
    auto c = box_intersect(a, Box::interval(R("1/4"), R("1")));
    ASSERT_TRUE(c);
    EXPECT_EQ(*c, Box::interval(R("1/4"), R("1/2")));
}

TEST(BoxTest, StrictClosureContainment) {
    auto X = Box::interval(R("0"), R("1"));
    EXPECT_TRUE(closure_strictly_inside(Box::interval(R("1/8"), R("3/8")), X));
    EXPECT_FALSE(closure_strictly_inside(Box::interval(R("0"), R("3/8")), X));
    EXPECT_TRUE(box_inside(Box::interval(R("0"), R("3/8")), X));
}

TEST(DistanceTest, RectGapAndFacets) {
    Rect a{{R("1/8")}, {R("3/8")}};
    Rect b{{R("5/8")}, {R("3/4")}};
    EXPECT_EQ(rect_distance(a, b), R("1/4"));
    EXPECT_EQ(rect_distance(a, Rect{{R("1/4")}, {R("1")}}), R("0"));
    Partition p(Box::interval(R("0"), R("1")), {Box::interval(R("0"), R("1/2")), Box::interval(R("1/2"), R("1"))});
    EXPECT_EQ(set_distance(a, p.boundary_with_domain()), R("1/8"));
    EXPECT_EQ(set_distance(Rect::point({R("2/3")}), p.boundary_with_domain()), R("1/6"));
}

TEST(DistanceTest, TwoDimensionalGapIsSupNorm) {
    Rect a{{R("0"), R("0")}, {R("1"), R("1")}};
    Rect b{{R("2"), R("3")}, {R("4"), R("5")}};
    EXPECT_EQ(rect_distance(a, b), R("2"));
}

TEST(PartitionTest, BoundaryFacetsAreDeduplicated) {
    auto f = pwc::testing::E1();
    const auto& bd = f.partition().boundary();
    ASSERT_EQ(bd.size(), 3u);
    EXPECT_EQ(bd[0].value, R("0"));
    EXPECT_EQ(bd[1].value, R("1/2"));
    EXPECT_EQ(bd[2].value, R("1"));
    EXPECT_EQ(boundary_hyperplane_count(f.partition()), 3u);
    auto g = pwc::testing::E6();
    EXPECT_EQ(g.partition().boundary().size(), 7u);
    EXPECT_EQ(g.partition().boundary_with_domain().size(), 9u);   // domain edges y=0, y=1 span both elements
    EXPECT_EQ(boundary_hyperplane_count(g.partition()), 5u);
}

TEST(PartitionTest, OverlapIsReportedWithPair) {
    Partition p(Box::interval(R("0"), R("1")), {Box::interval(R("0"), R("2/3")), Box::interval(R("1/2"), R("1"))});
    auto rep = validate_partition(p);
    ASSERT_FALSE(rep.ok());
    EXPECT_EQ(rep.violations[0].kind, ViolationKind::Overlap);
    EXPECT_EQ(*rep.violations[0].first, 0u);
    EXPECT_EQ(*rep.violations[0].second, 1u);
}

TEST(PartitionTest, GapIsReportedAsUncovered) {
    Partition p(Box::interval(R("0"), R("1")), {Box::interval(R("0"), R("1/3")), Box::interval(R("2/3"), R("1"))});
    auto rep = validate_partition(p);
    ASSERT_EQ(rep.violations.size(), 1u);
    EXPECT_EQ(rep.violations[0].kind, ViolationKind::Uncovered);
    EXPECT_TRUE(rep.violations[0].witness->contains({R("1/2")}));
}

TEST(PartitionTest, ElementOutsideDomain) {
    Partition p(Box::interval(R("0"), R("1")), {Box::interval(R("0"), R("1/2")), Box::interval(R("1/2"), R("3/2"))});
    auto rep = validate_partition(p);
    ASSERT_FALSE(rep.ok());
    EXPECT_EQ(rep.violations[0].kind, ViolationKind::ElementOutsideDomain);
}

TEST(CoverTest, ClosedUnionContainment) {
    std::vector<Box> cover{Box::interval(R("0"), R("1/2")), Box::interval(R("1/2"), R("1"))};
    EXPECT_TRUE(closed_union_contains(Box::interval(R("1/4"), R("3/4")), cover));
    std::vector<Box> gappy{Box::interval(R("0"), R("1/3")), Box::interval(R("1/2"), R("1"))};
    EXPECT_FALSE(closed_union_contains(Box::interval(R("1/4"), R("3/4")), gappy));
}

TEST(FattenTest, GrowsEverySide) {
    auto b = fatten(Box::interval(R("1/4"), R("1/2")), R("1/8"));
    EXPECT_EQ(b, Box::interval(R("1/8"), R("5/8")));
}
