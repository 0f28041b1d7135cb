#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gbc/orbit_sim.hpp"
#include "gbc/shift_space.hpp"

namespace gbc {

struct Ball {
    Eigen::Vector2d center;
    double radius = 0.0;
};

// Dyadic square [ix 2^-level, (ix+1) 2^-level) x [iy 2^-level, ...) of the
// unit square; Lebesgue measure is exactly 4^-level.
struct BakerSquare {
    int level = 0;
    std::int64_t ix = 0;
    std::int64_t iy = 0;
};

double square_side(const BakerSquare& s);
double square_leb(const BakerSquare& s);

// Largest dyadic square inside the ball. Levels are scanned from
// ceil(-log2(radius*sqrt(2))) for three sizes, testing the four cells around
// the grid vertex nearest the center (lexicographic (ix, iy) order breaks
// ties); the cell containing the center fits by the second level, which
// pins the guaranteed area ratio at 1/(8*pi). Radius must be in (0, 0.25]
// and the closed ball inside (0,1)^2, else BallOutOfRangeError
// (ValidationError for radius <= 0).
BakerSquare baker_dyadic_inscribe(const Ball& ball);

// One orbit of the map (x,y) -> (2x mod 1, (y + floor(2x)) / 2), encoded by
// its bi-infinite coin-flip sequence: bit i is a counter hash of (seed, i),
// x at time n reads bits n..n+62, y reads bits n-1..n-63. Pure function of
// the seed; 63-bit fractions make dyadic-square membership exact.
class BakerOrbit {
  public:
    explicit BakerOrbit(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    int bit(std::int64_t i) const;
    std::uint64_t x_frac(std::int64_t n) const;  // x * 2^63 at time n
    std::uint64_t y_frac(std::int64_t n) const;

  private:
    std::uint64_t seed_;
};

// membership of the point (x_frac, y_frac) in the square, exact on the
// dyadic grid
bool square_contains(const BakerSquare& s, std::uint64_t x_frac, std::uint64_t y_frac);

// The square as a shift-space event: binary word on positions [-level,
// level-1] around the current time — y digits fill the negative side
// (most-significant nearest -1), x digits the nonnegative side. Level must
// be at least 1.
Cylinder square_to_cylinder(const BakerSquare& s);

// Ball sequence for the baker experiment: a fixed ball repeated, or balls at
// a fixed center with Leb = min(cap, scale/n).
class BakerTargets {
  public:
    enum class Law { fixed_ball, shrinking_ball };

    static BakerTargets fixed_ball(const Ball& b);
    static BakerTargets shrinking_balls(const Eigen::Vector2d& center, double cap, double scale);

    Law law() const { return law_; }
    Ball at(std::int64_t n) const;

  private:
    BakerTargets() = default;
    Law law_ = Law::fixed_ball;
    Ball ball_;
    double cap_ = 0.0;
    double scale_ = 0.0;
};

// Hit statistics against the inscribed squares and against the balls
// themselves, over the same orbits and checkpoints.
struct BakerHits {
    HitStatistics squares;
    HitStatistics balls;
};

// Monte Carlo over independent orbits; expected square hits below 20 at the
// horizon throw MassTooSmallError. Ball validity (range, radius cap) is
// checked for the largest ball of the law.
BakerHits baker_hit_experiment(const BakerTargets& targets, std::int64_t n_max,
                               int num_checkpoints, int num_samples, std::uint64_t seed,
                               int workers = 1);

}  // namespace gbc
