#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "gbc/baker.hpp"
#include "gbc/errors.hpp"
#include "gbc/rng.hpp"
#include "gbc/shift_space.hpp"

using namespace gbc;

namespace {

Ball ball(double cx, double cy, double r) { return {Eigen::Vector2d(cx, cy), r}; }

// farthest-corner distance from the ball center, recomputed from scratch
double far_corner(const BakerSquare& s, const Ball& b) {
    const double side = square_side(s);
    double worst = 0.0;
    for (int a = 0; a <= 1; ++a)
        for (int c = 0; c <= 1; ++c) {
            const double dx = static_cast<double>(s.ix + a) * side - b.center(0);
            const double dy = static_cast<double>(s.iy + c) * side - b.center(1);
            worst = std::max(worst, std::hypot(dx, dy));
        }
    return worst;
}

}  // namespace

TEST_CASE("inscribed squares at pinned points") {
    SUBCASE("centered ball overflows the coarse grid by a hair") {
        // the level-2 cells around (0.5, 0.5) have far corners at distance
        // 0.25*sqrt(2) ~ 0.354 > 0.25, so the scan settles one level down
        const auto s = baker_dyadic_inscribe(ball(0.5, 0.5, 0.25));
        CHECK(s.level == 3);
        CHECK(s.ix == 3);
        CHECK(s.iy == 3);
        CHECK(far_corner(s, ball(0.5, 0.5, 0.25)) <= 0.25);
    }

    SUBCASE("grid-point center") {
        // center on a level-2 vertex with radius 3/16: every level-2 cell
        // has a far corner at side*sqrt(2) ~ 0.354, so the first fit is the
        // level-3 cell below-left, and the area ratio lands at 4/(9 pi)
        const auto s = baker_dyadic_inscribe(ball(0.25, 0.25, 0.1875));
        CHECK(s.level == 3);
        CHECK(s.ix == 1);
        CHECK(s.iy == 1);
        const double ratio = square_leb(s) / (std::numbers::pi * 0.1875 * 0.1875);
        CHECK(ratio == doctest::Approx(4.0 / (9.0 * std::numbers::pi)).epsilon(1e-14));
    }

    SUBCASE("asymmetric center picks the lexicographic first fit") {
        const auto s = baker_dyadic_inscribe(ball(0.3, 0.7, 0.1));
        CHECK(s.level == 4);
        CHECK(s.ix == 4);
        CHECK(s.iy == 10);
    }
}

TEST_CASE("random balls always admit a guaranteed inscription") {
    const double floor_ratio = 1.0 / (8.0 * std::numbers::pi);
    std::int64_t coarse = 0;
    for (int i = 0; i < 2000; ++i) {
        const double r = 0.25 * (0.002 + 0.998 * u01(31, static_cast<std::uint64_t>(i), 0));
        const double cx =
            (r + 1e-6) + (1.0 - 2.0 * r - 2e-6) * u01(31, static_cast<std::uint64_t>(i), 1);
        const double cy =
            (r + 1e-6) + (1.0 - 2.0 * r - 2e-6) * u01(31, static_cast<std::uint64_t>(i), 2);
        const Ball b = ball(cx, cy, r);
        const auto s = baker_dyadic_inscribe(b);

        CHECK(s.level >= 1);
        CHECK(s.ix >= 0);
        CHECK(s.iy >= 0);
        CHECK(s.ix < (std::int64_t{1} << s.level));
        CHECK(s.iy < (std::int64_t{1} << s.level));
        CHECK(far_corner(s, b) <= r + 1e-9);

        const double ratio = square_leb(s) / (std::numbers::pi * r * r);
        CHECK(ratio >= floor_ratio * (1.0 - 1e-9));
        if (ratio >= 4.0 * floor_ratio) ++coarse;
    }
    // the guarantee is a floor, not the typical outcome
    CHECK(coarse > 500);
}

TEST_CASE("balls outside the admissible family are rejected") {
    CHECK_THROWS_AS(baker_dyadic_inscribe(ball(0.5, 0.5, 0.3)), BallOutOfRangeError);
    CHECK_THROWS_AS(baker_dyadic_inscribe(ball(0.1, 0.5, 0.15)), BallOutOfRangeError);
    CHECK_THROWS_AS(baker_dyadic_inscribe(ball(0.25, 0.5, 0.25)), BallOutOfRangeError);
    CHECK_THROWS_AS(baker_dyadic_inscribe(ball(0.5, 0.5, 0.0)), ValidationError);
    CHECK_THROWS_AS(baker_dyadic_inscribe(ball(0.5, 0.5, -0.1)), ValidationError);
    // representable but below the 63-bit grid
    CHECK_THROWS_AS(baker_dyadic_inscribe(ball(0.5, 0.5, 1e-19)), ValidationError);
    CHECK_NOTHROW(baker_dyadic_inscribe(ball(0.5, 0.5, 0.25)));
}

TEST_CASE("range failures are validation errors") {
    // callers catching ValidationError must see the range failures as well
    CHECK_THROWS_AS(baker_dyadic_inscribe(ball(0.5, 0.5, 0.26)), ValidationError);
    CHECK_THROWS_AS(BakerTargets::fixed_ball(ball(0.02, 0.5, 0.1)), ValidationError);
}

TEST_CASE("orbit bits drive both coordinates") {
    const BakerOrbit o(42);
    const BakerOrbit same(42);
    const BakerOrbit other(43);

    int diffs = 0;
    for (std::int64_t i = -80; i <= 80; ++i) {
        CHECK(o.bit(i) == same.bit(i));
        diffs += o.bit(i) != other.bit(i) ? 1 : 0;
    }
    CHECK(diffs > 0);
    CHECK(o.x_frac(5) == same.x_frac(5));
    CHECK(o.y_frac(-3) == same.y_frac(-3));

    SUBCASE("fraction digits are the orbit bits") {
        for (const std::int64_t n : {std::int64_t{-7}, std::int64_t{0}, std::int64_t{13}}) {
            const std::uint64_t x = o.x_frac(n);
            const std::uint64_t y = o.y_frac(n);
            CHECK(x < (std::uint64_t{1} << 63));
            CHECK(y < (std::uint64_t{1} << 63));
            for (const int t : {0, 1, 31, 62})
                CHECK(((x >> (62 - t)) & 1u) == static_cast<std::uint64_t>(o.bit(n + t)));
            for (const int t : {1, 2, 40, 63})
                CHECK(((y >> (63 - t)) & 1u) == static_cast<std::uint64_t>(o.bit(n - t)));
        }
    }

    SUBCASE("one step of the map shifts the digits") {
        const std::uint64_t mask = (std::uint64_t{1} << 63) - 1;
        for (std::int64_t n = -5; n <= 60; ++n) {
            CHECK(o.x_frac(n + 1) ==
                  (((o.x_frac(n) << 1) & mask) | static_cast<std::uint64_t>(o.bit(n + 63))));
            CHECK(o.y_frac(n + 1) ==
                  ((o.y_frac(n) >> 1) | (static_cast<std::uint64_t>(o.bit(n)) << 62)));
        }
    }
}

TEST_CASE("square membership agrees with the symbolic coding") {
    SUBCASE("pinned word") {
        const auto c = square_to_cylinder({2, 2, 1});
        CHECK(c.support() == Interval(-2, 1));
        CHECK(c.word() == Word{1, 0, 1, 0});
    }

    SUBCASE("degenerate levels and stray cells are rejected") {
        CHECK_THROWS_AS(square_to_cylinder({0, 0, 0}), ValidationError);
        CHECK_THROWS_AS(square_to_cylinder({2, 4, 1}), ValidationError);
        CHECK_THROWS_AS(square_to_cylinder({2, 1, -1}), ValidationError);
        CHECK_THROWS_AS(square_contains({-1, 0, 0}, 0, 0), ValidationError);
        CHECK_THROWS_AS(square_contains({64, 0, 0}, 0, 0), ValidationError);
        // level 0 is the whole square
        CHECK(square_contains({0, 0, 0}, BakerOrbit(9).x_frac(0), BakerOrbit(9).y_frac(0)));
    }

    SUBCASE("geometric and symbolic membership never disagree") {
        std::int64_t hits = 0;
        for (int j = 0; j < 2000; ++j) {
            const auto u = static_cast<std::uint64_t>(j);
            const BakerOrbit o(1000 + u);
            const int k = 1 + static_cast<int>(counter_hash(7, u, 1) % 12);
            const BakerSquare s{
                k,
                static_cast<std::int64_t>(counter_hash(7, u, 2) % (std::uint64_t{1} << k)),
                static_cast<std::int64_t>(counter_hash(7, u, 3) % (std::uint64_t{1} << k))};
            const std::int64_t n = static_cast<std::int64_t>(counter_hash(7, u, 4) % 1001) - 500;

            const bool geometric = square_contains(s, o.x_frac(n), o.y_frac(n));

            const auto c = square_to_cylinder(s);
            REQUIRE(c.support() == Interval(-k, k - 1));
            bool symbolic = true;
            for (std::size_t t = 0; t < c.word().size(); ++t)
                symbolic = symbolic &&
                           c.word()[t] == o.bit(n + c.support().lo + static_cast<std::int64_t>(t));

            CHECK(geometric == symbolic);
            hits += geometric ? 1 : 0;
        }
        CHECK(hits >= 10);  // the agreement must be exercised on actual hits
    }
}

TEST_CASE("orbits equidistribute over dyadic cells") {
    const BakerOrbit o(5);
    const BakerSquare cell{3, 2, 5};
    const std::uint64_t mask = (std::uint64_t{1} << 63) - 1;
    const std::int64_t n_max = 1000000;

    std::uint64_t x = o.x_frac(1);
    std::uint64_t y = o.y_frac(1);
    std::int64_t hits = 0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        if (n > 1) {
            x = ((x << 1) & mask) | static_cast<std::uint64_t>(o.bit(n + 62));
            y = (y >> 1) | (static_cast<std::uint64_t>(o.bit(n - 1)) << 62);
        }
        hits += square_contains(cell, x, y) ? 1 : 0;
    }
    CHECK(x == o.x_frac(n_max));
    CHECK(y == o.y_frac(n_max));

    const double freq = static_cast<double>(hits) / static_cast<double>(n_max);
    CHECK(freq == doctest::Approx(square_leb(cell)).epsilon(0.1));
    CHECK(std::abs(freq - 1.0 / 64.0) <= 0.0015);
}

TEST_CASE("target laws hand out the right balls") {
    const auto fixed = BakerTargets::fixed_ball(ball(0.5, 0.5, 0.2));
    CHECK(fixed.law() == BakerTargets::Law::fixed_ball);
    CHECK(fixed.at(1).radius == 0.2);
    CHECK(fixed.at(9).radius == 0.2);

    const auto shrinking = BakerTargets::shrinking_balls(Eigen::Vector2d(0.41, 0.43), 0.15, 150.0);
    CHECK(shrinking.law() == BakerTargets::Law::shrinking_ball);
    for (const std::int64_t n :
         {std::int64_t{1}, std::int64_t{4}, std::int64_t{1000}, std::int64_t{40000}}) {
        const double leb = std::min(0.15, 150.0 / static_cast<double>(n));
        CHECK(shrinking.at(n).radius ==
              doctest::Approx(std::sqrt(leb / std::numbers::pi)).epsilon(1e-14));
        CHECK(shrinking.at(n).center(0) == 0.41);
        CHECK(shrinking.at(n).center(1) == 0.43);
    }
    CHECK_THROWS_AS(shrinking.at(0), ValidationError);

    CHECK_THROWS_AS(BakerTargets::shrinking_balls(Eigen::Vector2d(0.5, 0.5), 0.0, 1.0),
                    ValidationError);
    CHECK_THROWS_AS(BakerTargets::shrinking_balls(Eigen::Vector2d(0.5, 0.5), 0.15, -2.0),
                    ValidationError);
    // the n = 1 ball is the largest and must itself be admissible
    CHECK_THROWS_AS(BakerTargets::shrinking_balls(Eigen::Vector2d(0.9, 0.9), 0.15, 150.0),
                    BallOutOfRangeError);
}

TEST_CASE("ball hits dominate square hits and share the grid") {
    const auto targets = BakerTargets::shrinking_balls(Eigen::Vector2d(0.41, 0.43), 0.15, 150.0);
    const std::int64_t n_max = 40000;
    const auto hits = baker_hit_experiment(targets, n_max, 8, 40, 11);

    REQUIRE(hits.squares.checkpoints == hits.balls.checkpoints);
    CHECK(hits.squares.sample_seeds == hits.balls.sample_seeds);
    REQUIRE(hits.squares.counts.size() == 40);
    REQUIRE(hits.balls.counts.size() == 40);

    SUBCASE("expected masses follow the laws") {
        double eb = 0.0;
        std::size_t cp = 0;
        for (std::int64_t n = 1; n <= n_max; ++n) {
            const Ball b = targets.at(n);
            eb += std::numbers::pi * b.radius * b.radius;
            if (cp < hits.balls.checkpoints.size() && hits.balls.checkpoints[cp] == n) {
                CHECK(hits.balls.expected[cp] == doctest::Approx(eb).epsilon(1e-12));
                ++cp;
            }
        }
        CHECK(cp == hits.balls.checkpoints.size());
        CHECK(hits.squares.expected.back() >= 20.0);
        // inscription loses at most the guaranteed factor
        CHECK(hits.squares.expected.back() >=
              hits.balls.expected.back() / (8.0 * std::numbers::pi) * (1.0 - 1e-9));
        for (std::size_t j = 1; j < hits.squares.expected.size(); ++j)
            CHECK(hits.squares.expected[j] > hits.squares.expected[j - 1]);
    }

    SUBCASE("square hits are a subset of ball hits") {
        for (std::size_t i = 0; i < hits.squares.counts.size(); ++i)
            for (std::size_t j = 0; j < hits.squares.counts[i].size(); ++j) {
                CHECK(hits.squares.counts[i][j] <= hits.balls.counts[i][j]);
                if (j > 0) {
                    CHECK(hits.squares.counts[i][j] >= hits.squares.counts[i][j - 1]);
                    CHECK(hits.balls.counts[i][j] >= hits.balls.counts[i][j - 1]);
                }
            }
    }

    SUBCASE("counts track the expected mass") {
        const std::size_t last = hits.balls.checkpoints.size() - 1;
        CHECK(hits.balls.ratio_quantiles[last][2] == doctest::Approx(1.0).epsilon(0.15));
        CHECK(hits.squares.ratio_quantiles[last][2] == doctest::Approx(1.0).epsilon(0.4));

        int growing = 0;
        for (const auto& row : hits.balls.counts)
            growing += row.back() > row[hits.balls.checkpoints.size() / 2] ? 1 : 0;
        CHECK(growing >= 36);
    }

    SUBCASE("worker count cannot touch the numbers") {
        const auto again = baker_hit_experiment(targets, n_max, 8, 40, 11, 3);
        CHECK(again.squares.counts == hits.squares.counts);
        CHECK(again.balls.counts == hits.balls.counts);
        CHECK(again.balls.ratio_quantiles == hits.balls.ratio_quantiles);
        CHECK(again.squares.exponents == hits.squares.exponents);
    }
}

TEST_CASE("baker experiment validation") {
    const auto targets = BakerTargets::shrinking_balls(Eigen::Vector2d(0.41, 0.43), 0.15, 150.0);
    // at n <= 200 every ball has measure 0.15, squares at most 2/pi of that:
    // ball mass clears the gate, square mass cannot
    CHECK_THROWS_AS(baker_hit_experiment(targets, 200, 4, 8, 1), MassTooSmallError);
    CHECK_THROWS_AS(baker_hit_experiment(targets, 0, 4, 8, 1), ValidationError);
    CHECK_THROWS_AS(baker_hit_experiment(targets, 1000, 0, 8, 1), ValidationError);
    CHECK_THROWS_AS(baker_hit_experiment(targets, 1000, 4, 0, 1), ValidationError);

    // a fixed ball accumulates mass linearly
    const auto fixed = BakerTargets::fixed_ball(ball(0.5, 0.5, 0.2));
    const auto hits = baker_hit_experiment(fixed, 4000, 6, 12, 3);
    CHECK(hits.squares.expected.back() == doctest::Approx(4000.0 / 64.0).epsilon(1e-12));
    CHECK(hits.balls.expected.back() ==
          doctest::Approx(4000.0 * std::numbers::pi * 0.04).epsilon(1e-12));
}
