#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlab/domain.hpp"
#include "nlab/errors.hpp"

using namespace nlab;

namespace {

// Dense sampling of every boundary piece, then a ternary search on the
// segment parameter around the best sample.
double brute_distance(const Domain2D& d, Vec2 p, int n = 2000) {
    double best = 1e300;
    for (const auto& s : d.boundary_pieces()) {
        const int m = std::max(2, static_cast<int>(n * s.length()));
        auto at = [&](double t) { return norm(p - (s.a + t * (s.b - s.a))); };
        int kbest = 0;
        for (int k = 0; k <= m; ++k)
            if (at(static_cast<double>(k) / m) < at(static_cast<double>(kbest) / m)) kbest = k;
        double lo = std::max(0.0, (kbest - 1.0) / m), hi = std::min(1.0, (kbest + 1.0) / m);
        for (int it = 0; it < 200; ++it) {
            const double t1 = lo + (hi - lo) / 3, t2 = hi - (hi - lo) / 3;
            if (at(t1) < at(t2))
                hi = t2;
            else
                lo = t1;
        }
        best = std::min(best, at(0.5 * (lo + hi)));
    }
    return best;
}

}  // namespace

TEST(Domain, RectangleGammaIsCorners) {
    const auto d = Domain2D::rectangle(2.0, 1.0);
    ASSERT_EQ(d.gamma().size(), 4u);
    for (const Vec2& c : d.gamma()) EXPECT_NEAR(d.distance_to_boundary(c), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(d.area(), 2.0);
    EXPECT_DOUBLE_EQ(d.diameter(), std::sqrt(5.0));
}

TEST(Domain, LShapeHasSixCorners) {
    const auto d = Domain2D::lshape(1.0, 1.0, 0.5, 0.5);
    ASSERT_EQ(d.gamma().size(), 6u);
    EXPECT_DOUBLE_EQ(d.area(), 0.75);
    EXPECT_TRUE(d.contains({0.25, 0.75}));
    EXPECT_FALSE(d.contains({0.75, 0.75}));
    EXPECT_FALSE(d.contains({0.5, 0.75}));  // on the boundary
}

TEST(Domain, PieceEndpointsAreCornersOrShared) {
    for (const auto& d : {Domain2D::rectangle(1.0, 3.0), Domain2D::lshape(2.0, 1.0, 0.5, 0.25)}) {
        for (const auto& s : d.boundary_pieces()) {
            for (Vec2 e : {s.a, s.b}) {
                bool in_gamma = false;
                for (Vec2 g : d.gamma()) in_gamma |= norm(g - e) < 1e-14;
                int shared = 0;
                for (const auto& o : d.boundary_pieces()) shared += norm(o.a - e) < 1e-14 || norm(o.b - e) < 1e-14;
                EXPECT_TRUE(in_gamma || shared >= 2);
            }
        }
    }
}

TEST(Domain, TextRoundTrip) {
    const auto d = Domain2D::lshape(1.5, 1.25, 0.5, 0.75, {0.1, -0.2});
    const auto back = Domain2D::parse_text(d.to_text());
    EXPECT_EQ(back.to_text(), d.to_text());
    EXPECT_EQ(back.kind(), DomainKind::lshape);
    EXPECT_DOUBLE_EQ(back.c(), 0.5);
    EXPECT_DOUBLE_EQ(back.origin().y, -0.2);
}

TEST(Domain, RejectsBadParameters) {
    EXPECT_THROW(Domain2D::rectangle(0.0, 1.0), Error);
    EXPECT_THROW(Domain2D::lshape(1.0, 1.0, 1.0, 0.5), Error);
    EXPECT_THROW(Domain2D::parse_text("kind=triangle\na=1\nb=1\n"), Error);
}

TEST(Grid, UnitSquareQuarterSpacing) {
    const auto g = build_grid(Domain2D::rectangle(1.0, 1.0), 0.25);
    EXPECT_EQ(g->nx(), 5);
    EXPECT_EQ(g->ny(), 5);
    EXPECT_EQ(g->size(), 25u);
    EXPECT_EQ(g->interior_count(), 9u);
    EXPECT_DOUBLE_EQ(g->distance_to_boundary()[g->index(2, 2)], 0.5);
}

TEST(Grid, MaskMatchesStrictContainment) {
    const auto d = Domain2D::lshape(1.0, 1.0, 0.5, 0.5);
    const auto g = build_grid(d, 0.125);
    for (int j = 0; j < g->ny(); ++j)
        for (int i = 0; i < g->nx(); ++i) EXPECT_EQ(g->mask(i, j), d.contains(g->node(i, j)));
}

TEST(Grid, LShapeDistanceToGamma) {
    const auto g = build_grid(Domain2D::lshape(1.0, 1.0, 0.5, 0.5), 0.125);
    EXPECT_NEAR(g->distance_to_gamma()[g->index(2, 2)], std::sqrt(0.125), 1e-15);
}

TEST(Grid, RejectsBadSpacing) {
    const auto d = Domain2D::rectangle(1.0, 1.0);
    EXPECT_THROW(build_grid(d, 0.0), GridError);
    EXPECT_THROW(build_grid(d, 0.5 + 1e-3), GridError);
    EXPECT_THROW(build_grid(d, 0.3), GridError);
    EXPECT_THROW(build_grid(d, 1.0), GridError);  // no interior nodes
}

TEST(Grid, DistanceFieldsMatchBruteForce) {
    const auto d = Domain2D::lshape(1.0, 1.0, 0.5, 0.5);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int checked = 0;
    while (checked < 100) {
        const Vec2 p{uni(rng), uni(rng)};
        if (!d.contains(p)) continue;
        const double exact = d.distance_to_boundary(p);
        const double sampled = brute_distance(d, p);
        EXPECT_LE(exact, sampled + 1e-12);
        EXPECT_NEAR(exact, sampled, 1e-9);
        double corner = 1e300;
        for (Vec2 c : d.gamma()) corner = std::min(corner, std::hypot(p.x - c.x, p.y - c.y));
        EXPECT_EQ(d.distance_to_gamma(p), corner);
        ++checked;
    }
}

TEST(Grid, NodeDistancesAreExact) {
    const auto d = Domain2D::rectangle(2.0, 1.0);
    const auto g = build_grid(d, 0.125);
    for (int j = 0; j < g->ny(); ++j)
        for (int i = 0; i < g->nx(); ++i) {
            const Vec2 p = g->node(i, j);
            const double expect = std::min({p.x, 2.0 - p.x, p.y, 1.0 - p.y});
            EXPECT_NEAR(g->distance_to_boundary()[g->index(i, j)], expect, 1e-15);
        }
}

TEST(Grid, SafeRegion) {
    const auto g = build_grid(Domain2D::rectangle(1.0, 1.0), 0.0625);
    EXPECT_TRUE(g->is_safe({0.5, 0.5}, 2 * g->h()));
    EXPECT_TRUE(g->is_safe({0.125, 0.5}, 2 * g->h()));
    EXPECT_FALSE(g->is_safe({0.1, 0.5}, 2 * g->h()));
    EXPECT_FALSE(g->is_safe({1.5, 0.5}, 0.0));
}

TEST(KeyValues, ParsesAndRejects) {
    const auto kv = parse_key_values("# comment\n a = 1 \n\nb=two\n");
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "two");
    EXPECT_THROW(parse_key_values("novalue\n"), Error);
}

TEST(FormatDouble, RoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 2.0 * std::numbers::pi * std::numbers::pi, 1e-300, -7.25})
        EXPECT_EQ(std::stod(format_double(v)), v);
}
