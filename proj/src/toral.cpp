#include "gbc/toral.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gbc/errors.hpp"
#include "gbc/parallel.hpp"
#include "gbc/rng.hpp"

namespace gbc {

namespace {

constexpr double kMaxExtent = 0.05;   // keeps nearest-translate membership unambiguous
constexpr double kMinMass = 20.0;
constexpr double kTwo64 = 18446744073709551616.0;

using int128 = __int128;

int128 checked_mul(int128 a, int128 b) {
    int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("iterate entries exceed 128 bits");
    return r;
}

int128 checked_add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("iterate entries exceed 128 bits");
    return r;
}

int128 checked_sub(int128 a, int128 b) {
    int128 r;
    if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("iterate entries exceed 128 bits");
    return r;
}

struct Mat128 {
    int128 a, b, c, d;
};

Mat128 checked_matmul(const Mat128& x, const Mat128& y) {
    return {checked_add(checked_mul(x.a, y.a), checked_mul(x.b, y.c)),
            checked_add(checked_mul(x.a, y.b), checked_mul(x.b, y.d)),
            checked_add(checked_mul(x.c, y.a), checked_mul(x.d, y.c)),
            checked_add(checked_mul(x.c, y.b), checked_mul(x.d, y.d))};
}

// unit eigenvector of a 2x2 integer matrix for eigenvalue lam; b != 0 is
// guaranteed for hyperbolic unimodular matrices (triangular ones have
// eigenvalues +-1)
Eigen::Vector2d unit_eigenvector(const Eigen::Matrix2i& m, double lam) {
    Eigen::Vector2d v(static_cast<double>(m(0, 1)), lam - static_cast<double>(m(0, 0)));
    v.normalize();
    if (v(0) < 0.0 || (v(0) == 0.0 && v(1) < 0.0)) v = -v;
    return v;
}

}  // namespace

ToralMap build_toral(const Eigen::Matrix2i& m) {
    const std::int64_t det = static_cast<std::int64_t>(m(0, 0)) * m(1, 1) -
                             static_cast<std::int64_t>(m(0, 1)) * m(1, 0);
    if (det != 1 && det != -1)
        throw NotUnimodularError("determinant " + std::to_string(det) + "; need |det| = 1");
    const std::int64_t tr = static_cast<std::int64_t>(m(0, 0)) + m(1, 1);
    if (tr <= 2 && tr >= -2)
        throw NotHyperbolicError("trace " + std::to_string(tr) + "; need |trace| > 2");

    ToralMap map;
    map.M = m;
    const double t = static_cast<double>(tr);
    const double disc = std::sqrt(t * t - 4.0 * static_cast<double>(det));
    map.lambda_u = (t + (t > 0 ? disc : -disc)) / 2.0;  // the root with |lambda| > 1
    map.lambda_s = static_cast<double>(det) / map.lambda_u;
    map.e_u = unit_eigenvector(m, map.lambda_u);
    map.e_s = unit_eigenvector(m, map.lambda_s);
    map.frame.col(0) = map.e_u;
    map.frame.col(1) = map.e_s;
    map.frame_det = std::abs(map.frame.determinant());
    map.frame_inv = map.frame.inverse();
    return map;
}

std::uint64_t fix_count(const ToralMap& map, int n) {
    if (n < 1 || n > 60) throw ValidationError("iterate order must lie in [1, 60]");
    const Mat128 m{map.M(0, 0), map.M(0, 1), map.M(1, 0), map.M(1, 1)};
    Mat128 pw = m;
    for (int i = 1; i < n; ++i) pw = checked_matmul(pw, m);
    const int128 det = checked_sub(checked_mul(checked_sub(pw.a, 1), checked_sub(pw.d, 1)),
                                   checked_mul(pw.b, pw.c));
    const unsigned __int128 mag =
        det < 0 ? static_cast<unsigned __int128>(-(det + 1)) + 1
                : static_cast<unsigned __int128>(det);
    if (mag > static_cast<unsigned __int128>(std::numeric_limits<std::uint64_t>::max()))
        throw OverflowError("fixed-point count exceeds the 64-bit range");
    return static_cast<std::uint64_t>(mag);
}

double partition_function(const ToralMap& map, double phi, int n) {
    return static_cast<double>(fix_count(map, n)) * std::exp(static_cast<double>(n) * phi);
}

std::pair<int, int> quasiround_indices(const ToralMap& map, double d_u, double d_s, double eps0,
                                       double eps1) {
    if (!(eps0 > 0.0) || !(eps1 > eps0)) throw ValidationError("need 0 < eps0 < eps1");
    const double lam = std::abs(map.lambda_u);
    if (eps1 / eps0 < lam)
        throw GapTooNarrowError("eps1/eps0 = " + std::to_string(eps1 / eps0) +
                                " below the expansion rate " + std::to_string(lam));
    if (!(d_u > 0.0) || !(d_s > 0.0) || d_u > eps1 || d_s > eps1)
        throw ValidationError("extents must lie in (0, eps1]");

    const auto window_steps = [&](double d) {
        int k = static_cast<int>(std::ceil(std::log(eps0 / d) / std::log(lam)));
        while (std::pow(lam, k) * d >= eps1) --k;
        while (std::pow(lam, k) * d < eps0) ++k;
        return k;
    };
    return {-window_steps(d_s), window_steps(d_u)};
}

double lebesgue(const ToralMap& map, const Rectangle& r) {
    return r.d_u * r.d_s * map.frame_det;
}

TorusPoint torus_point(double x, double y) {
    const auto reduce = [](double v) {
        const double frac = v - std::floor(v);
        const double scaled = std::ldexp(frac, 64);
        return scaled >= kTwo64 ? std::numeric_limits<std::uint64_t>::max()
                                : static_cast<std::uint64_t>(scaled);
    };
    return {reduce(x), reduce(y)};
}

TorusPoint toral_step(const ToralMap& map, TorusPoint p) {
    const auto e = [&](int i, int j) {
        return static_cast<std::uint64_t>(static_cast<std::int64_t>(map.M(i, j)));
    };
    return {e(0, 0) * p.x + e(0, 1) * p.y, e(1, 0) * p.x + e(1, 1) * p.y};
}

bool rect_contains(const ToralMap& map, const Rectangle& r, TorusPoint p) {
    const TorusPoint c = torus_point(r.center(0), r.center(1));
    // difference reduced to the translate nearest zero, exactly
    const double dx = std::ldexp(static_cast<double>(static_cast<std::int64_t>(p.x - c.x)), -64);
    const double dy = std::ldexp(static_cast<double>(static_cast<std::int64_t>(p.y - c.y)), -64);
    const Eigen::Vector2d alpha = map.frame_inv * Eigen::Vector2d(dx, dy);
    return std::abs(alpha(0)) <= r.d_u / 2.0 && std::abs(alpha(1)) <= r.d_s / 2.0;
}

TorusTargets TorusTargets::from_list(std::vector<Rectangle> rects) {
    if (rects.empty()) throw ValidationError("target list is empty");
    for (const Rectangle& r : rects)
        if (!(r.d_u > 0.0) || !(r.d_s > 0.0)) throw ValidationError("extents must be positive");
    TorusTargets t;
    t.law_ = Law::list;
    t.rects_ = std::move(rects);
    return t;
}

TorusTargets TorusTargets::fixed_rect(const Rectangle& r) {
    if (!(r.d_u > 0.0) || !(r.d_s > 0.0)) throw ValidationError("extents must be positive");
    TorusTargets t;
    t.law_ = Law::fixed_rect;
    t.rects_ = {r};
    return t;
}

TorusTargets TorusTargets::shrinking_squares(const Eigen::Vector2d& center, double cap,
                                             double scale) {
    if (!(cap > 0.0) || !(scale > 0.0)) throw ValidationError("cap and scale must be positive");
    TorusTargets t;
    t.law_ = Law::shrinking_square;
    t.center_ = center;
    t.cap_ = cap;
    t.scale_ = scale;
    return t;
}

TorusTargets TorusTargets::drifting_rect(const Rectangle& r0) {
    if (!(r0.d_u > 0.0) || !(r0.d_s > 0.0)) throw ValidationError("extents must be positive");
    TorusTargets t;
    t.law_ = Law::drifting;
    t.rects_ = {r0};
    return t;
}

std::int64_t TorusTargets::limit() const {
    return law_ == Law::list ? static_cast<std::int64_t>(rects_.size())
                             : std::numeric_limits<std::int64_t>::max();
}

Rectangle TorusTargets::at(const ToralMap& map, std::int64_t n) const {
    if (n < 1 || n > limit()) throw ValidationError("target index out of range");
    switch (law_) {
        case Law::list:
            return rects_[static_cast<std::size_t>(n - 1)];
        case Law::fixed_rect:
            return rects_.front();
        case Law::shrinking_square: {
            const double leb = std::min(cap_, scale_ / static_cast<double>(n));
            const double d = std::sqrt(leb / map.frame_det);
            Rectangle r;
            r.center = center_;
            r.d_u = d;
            r.d_s = d;
            return r;
        }
        case Law::drifting:
            break;
    }
    throw ValidationError("drifting targets have no aligned representation; hits use pullback");
}

double TorusTargets::leb_at(const ToralMap& map, std::int64_t n) const {
    if (n < 1 || n > limit()) throw ValidationError("target index out of range");
    switch (law_) {
        case Law::shrinking_square:
            return std::min(cap_, scale_ / static_cast<double>(n));
        case Law::drifting:
            return lebesgue(map, rects_.front());
        default:
            return lebesgue(map, at(map, n));
    }
}

HitStatistics torus_hit_experiment(const ToralMap& map, const TorusTargets& targets,
                                   std::int64_t n_max, int num_checkpoints, int num_samples,
                                   std::uint64_t seed, int workers) {
    if (n_max < 1) throw ValidationError("horizon must be positive");
    if (n_max > targets.limit())
        throw ValidationError("horizon exceeds the " + std::to_string(targets.limit()) +
                              " listed targets");
    if (num_samples < 1) throw ValidationError("need at least one sample");

    const auto too_large = [](const Rectangle& r) {
        return r.d_u > kMaxExtent || r.d_s > kMaxExtent;
    };
    bool oversized = false;
    switch (targets.law()) {
        case TorusTargets::Law::list:
            for (const Rectangle& r : targets.list()) oversized = oversized || too_large(r);
            break;
        case TorusTargets::Law::shrinking_square:
            oversized = too_large(targets.at(map, 1));
            break;
        default:
            oversized = too_large(targets.base());
    }
    if (oversized)
        throw RectangleTooLargeError("extents above " + std::to_string(kMaxExtent) +
                                     " make membership ambiguous");

    const auto checkpoints = geometric_checkpoints(n_max, num_checkpoints);
    std::vector<double> expected;
    expected.reserve(checkpoints.size());
    {
        double e = 0.0;
        std::size_t cp = 0;
        for (std::int64_t n = 1; n <= n_max && cp < checkpoints.size(); ++n) {
            e += targets.leb_at(map, n);
            while (cp < checkpoints.size() && checkpoints[cp] == n) {
                expected.push_back(e);
                ++cp;
            }
        }
    }
    if (expected.back() < kMinMass)
        throw MassTooSmallError("expected hits " + std::to_string(expected.back()) +
                                " at the horizon; need at least " + std::to_string(kMinMass));

    std::vector<std::uint64_t> sample_seeds(static_cast<std::size_t>(num_samples));
    std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(num_samples));
    const bool drifting = targets.law() == TorusTargets::Law::drifting;

    parallel_items(num_samples, workers, [&](std::int64_t i) {
        const std::uint64_t sub = counter_hash(seed, static_cast<std::uint64_t>(i));
        sample_seeds[static_cast<std::size_t>(i)] = sub;
        TorusPoint p{counter_hash(sub, 1), counter_hash(sub, 2)};
        std::vector<std::int64_t> row(checkpoints.size(), 0);

        if (drifting) {
            // T^n x lands in T^n R_0 exactly when x started in R_0: the map
            // is a bijection, so the whole trajectory is decided at n = 0.
            if (rect_contains(map, targets.base(), p))
                for (std::size_t j = 0; j < checkpoints.size(); ++j) row[j] = checkpoints[j];
        } else {
            std::int64_t total = 0;
            std::size_t cp = 0;
            for (std::int64_t n = 1; n <= n_max && cp < checkpoints.size(); ++n) {
                p = toral_step(map, p);
                if (rect_contains(map, targets.at(map, n), p)) ++total;
                while (cp < checkpoints.size() && checkpoints[cp] == n) {
                    row[cp] = total;
                    ++cp;
                }
            }
        }
        counts[static_cast<std::size_t>(i)] = std::move(row);
    });

    return assemble_hit_statistics(checkpoints, std::move(expected), std::move(sample_seeds),
                                   std::move(counts));
}

}  // namespace gbc
