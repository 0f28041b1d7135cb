#include "gbc/baker.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gbc/errors.hpp"
#include "gbc/parallel.hpp"
#include "gbc/rng.hpp"

namespace gbc {

namespace {

constexpr double kMinMass = 20.0;
constexpr std::uint64_t kFracMask = (std::uint64_t{1} << 63) - 1;

void validate_ball(const Ball& b) {
    if (!(b.radius > 0.0)) throw ValidationError("radius must be positive");
    if (b.radius > 0.25)
        throw BallOutOfRangeError("radius " + std::to_string(b.radius) + " above 0.25");
    const double cx = b.center(0), cy = b.center(1), r = b.radius;
    if (cx - r <= 0.0 || cx + r >= 1.0 || cy - r <= 0.0 || cy + r >= 1.0)
        throw BallOutOfRangeError("closed ball must lie inside the open unit square");
}

bool cell_fits(const Ball& ball, double side, std::int64_t ix, std::int64_t iy) {
    const double r2 = ball.radius * ball.radius;
    for (int a = 0; a <= 1; ++a)
        for (int b = 0; b <= 1; ++b) {
            const double dx = static_cast<double>(ix + a) * side - ball.center(0);
            const double dy = static_cast<double>(iy + b) * side - ball.center(1);
            if (dx * dx + dy * dy > r2) return false;
        }
    return true;
}

}  // namespace

double square_side(const BakerSquare& s) { return std::ldexp(1.0, -s.level); }
double square_leb(const BakerSquare& s) { return std::ldexp(1.0, -2 * s.level); }

BakerSquare baker_dyadic_inscribe(const Ball& ball) {
    validate_ball(ball);
    const int k0 = static_cast<int>(
        std::ceil(-std::log2(ball.radius * std::numbers::sqrt2)));
    if (k0 + 2 > 62) throw ValidationError("radius below the dyadic resolution");

    for (int k = k0; k <= k0 + 2; ++k) {
        const double side = std::ldexp(1.0, -k);
        const std::int64_t cells = std::int64_t{1} << k;
        const std::int64_t vx = std::llround(ball.center(0) / side);
        const std::int64_t vy = std::llround(ball.center(1) / side);
        for (const std::int64_t ix : {vx - 1, vx})
            for (const std::int64_t iy : {vy - 1, vy}) {
                if (ix < 0 || iy < 0 || ix >= cells || iy >= cells) continue;
                if (cell_fits(ball, side, ix, iy)) return {k, ix, iy};
            }
    }
    // the cell containing the center fits one level past k0; getting here
    // would mean the scan logic is broken
    throw NumericError("no dyadic square fits the ball");
}

int BakerOrbit::bit(std::int64_t i) const {
    return static_cast<int>(counter_hash(seed_, static_cast<std::uint64_t>(i), 7) & 1u);
}

std::uint64_t BakerOrbit::x_frac(std::int64_t n) const {
    std::uint64_t x = 0;
    for (int t = 0; t < 63; ++t)
        x |= static_cast<std::uint64_t>(bit(n + t)) << (62 - t);
    return x;
}

std::uint64_t BakerOrbit::y_frac(std::int64_t n) const {
    std::uint64_t y = 0;
    for (int t = 1; t <= 63; ++t)
        y |= static_cast<std::uint64_t>(bit(n - t)) << (63 - t);
    return y;
}

bool square_contains(const BakerSquare& s, std::uint64_t x_frac, std::uint64_t y_frac) {
    if (s.level < 0 || s.level > 63) throw ValidationError("level must lie in [0, 63]");
    const int shift = 63 - s.level;
    return (x_frac >> shift) == static_cast<std::uint64_t>(s.ix) &&
           (y_frac >> shift) == static_cast<std::uint64_t>(s.iy);
}

Cylinder square_to_cylinder(const BakerSquare& s) {
    if (s.level < 1 || s.level > 63) throw ValidationError("level must lie in [1, 63]");
    const std::int64_t k = s.level;
    if (s.ix < 0 || s.iy < 0 || s.ix >= (std::int64_t{1} << k) || s.iy >= (std::int64_t{1} << k))
        throw ValidationError("cell indices out of range for the level");
    Word w(static_cast<std::size_t>(2 * k));
    for (std::int64_t j = 0; j < k; ++j)
        w[static_cast<std::size_t>(j)] = static_cast<int>((s.iy >> j) & 1);
    for (std::int64_t p = 0; p < k; ++p)
        w[static_cast<std::size_t>(k + p)] = static_cast<int>((s.ix >> (k - 1 - p)) & 1);
    return Cylinder::trusted(Interval(-k, k - 1), std::move(w));
}

BakerTargets BakerTargets::fixed_ball(const Ball& b) {
    validate_ball(b);
    BakerTargets t;
    t.law_ = Law::fixed_ball;
    t.ball_ = b;
    return t;
}

BakerTargets BakerTargets::shrinking_balls(const Eigen::Vector2d& center, double cap,
                                           double scale) {
    if (!(cap > 0.0) || !(scale > 0.0)) throw ValidationError("cap and scale must be positive");
    BakerTargets t;
    t.law_ = Law::shrinking_ball;
    t.ball_.center = center;
    t.ball_.radius = std::sqrt(std::min(cap, scale) / std::numbers::pi);
    t.cap_ = cap;
    t.scale_ = scale;
    validate_ball(t.ball_);  // the largest ball of the law must be in range
    return t;
}

Ball BakerTargets::at(std::int64_t n) const {
    if (n < 1) throw ValidationError("target index must be positive");
    if (law_ == Law::fixed_ball) return ball_;
    const double leb = std::min(cap_, scale_ / static_cast<double>(n));
    return {ball_.center, std::sqrt(leb / std::numbers::pi)};
}

BakerHits baker_hit_experiment(const BakerTargets& targets, std::int64_t n_max,
                               int num_checkpoints, int num_samples, std::uint64_t seed,
                               int workers) {
    if (n_max < 1) throw ValidationError("horizon must be positive");
    if (num_samples < 1) throw ValidationError("need at least one sample");

    const auto checkpoints = geometric_checkpoints(n_max, num_checkpoints);

    std::vector<BakerSquare> squares;
    squares.reserve(static_cast<std::size_t>(n_max));
    std::vector<double> e_squares, e_balls;
    e_squares.reserve(checkpoints.size());
    e_balls.reserve(checkpoints.size());
    {
        double es = 0.0, eb = 0.0;
        std::size_t cp = 0;
        for (std::int64_t n = 1; n <= n_max; ++n) {
            const Ball b = targets.at(n);
            squares.push_back(baker_dyadic_inscribe(b));
            es += square_leb(squares.back());
            eb += std::numbers::pi * b.radius * b.radius;
            while (cp < checkpoints.size() && checkpoints[cp] == n) {
                e_squares.push_back(es);
                e_balls.push_back(eb);
                ++cp;
            }
        }
    }
    if (e_squares.back() < kMinMass)
        throw MassTooSmallError("expected square hits " + std::to_string(e_squares.back()) +
                                " at the horizon; need at least " + std::to_string(kMinMass));

    std::vector<std::uint64_t> sample_seeds(static_cast<std::size_t>(num_samples));
    std::vector<std::vector<std::int64_t>> counts_sq(static_cast<std::size_t>(num_samples));
    std::vector<std::vector<std::int64_t>> counts_ball(static_cast<std::size_t>(num_samples));

    parallel_items(num_samples, workers, [&](std::int64_t i) {
        const std::uint64_t sub = counter_hash(seed, static_cast<std::uint64_t>(i));
        sample_seeds[static_cast<std::size_t>(i)] = sub;
        const BakerOrbit orbit(sub);

        std::vector<std::int64_t> row_sq(checkpoints.size(), 0);
        std::vector<std::int64_t> row_ball(checkpoints.size(), 0);
        std::int64_t total_sq = 0, total_ball = 0;
        std::size_t cp = 0;
        std::uint64_t x = orbit.x_frac(1);
        std::uint64_t y = orbit.y_frac(1);
        for (std::int64_t n = 1; n <= n_max; ++n) {
            if (n > 1) {
                x = ((x << 1) & kFracMask) | static_cast<std::uint64_t>(orbit.bit(n + 62));
                y = (y >> 1) | (static_cast<std::uint64_t>(orbit.bit(n - 1)) << 62);
            }
            const bool in_square = square_contains(squares[static_cast<std::size_t>(n - 1)], x, y);
            bool in_ball = in_square;  // the square is inscribed
            if (!in_ball) {
                const Ball b = targets.at(n);
                const double dx = std::ldexp(static_cast<double>(x), -63) - b.center(0);
                const double dy = std::ldexp(static_cast<double>(y), -63) - b.center(1);
                in_ball = dx * dx + dy * dy <= b.radius * b.radius;
            }
            total_sq += in_square ? 1 : 0;
            total_ball += in_ball ? 1 : 0;
            while (cp < checkpoints.size() && checkpoints[cp] == n) {
                row_sq[cp] = total_sq;
                row_ball[cp] = total_ball;
                ++cp;
            }
        }
        counts_sq[static_cast<std::size_t>(i)] = std::move(row_sq);
        counts_ball[static_cast<std::size_t>(i)] = std::move(row_ball);
    });

    BakerHits hits;
    hits.squares = assemble_hit_statistics(checkpoints, std::move(e_squares), sample_seeds,
                                           std::move(counts_sq));
    hits.balls = assemble_hit_statistics(checkpoints, std::move(e_balls),
                                         std::move(sample_seeds), std::move(counts_ball));
    return hits;
}

}  // namespace gbc
