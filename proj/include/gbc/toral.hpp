#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gbc/orbit_sim.hpp"

namespace gbc {

// Hyperbolic automorphism of the 2-torus: integer matrix with |det| = 1 and
// |trace| > 2. lambda_u is the signed eigenvalue with |lambda_u| > 1,
// lambda_s = det / lambda_u, and e_u / e_s are unit eigenvectors normalized to
// a positive first component (tie: positive second). frame and frame_inv hold
// the eigenbasis [e_u e_s] and its inverse, frame_det = |det frame| converts
// extent products into Lebesgue measure.
struct ToralMap {
    Eigen::Matrix2i M;
    double lambda_u = 0.0;
    double lambda_s = 0.0;
    Eigen::Vector2d e_u, e_s;
    Eigen::Matrix2d frame, frame_inv;
    double frame_det = 0.0;
};

// Throws NotUnimodularError when |det| != 1, NotHyperbolicError when
// |trace| <= 2.
ToralMap build_toral(const Eigen::Matrix2i& m);

// Number of fixed points of the n-th iterate: |det(M^n - I)|, computed in
// checked 128-bit integer arithmetic. 1 <= n <= 60; throws OverflowError when
// the count (or an intermediate entry) does not fit, ValidationError on n.
std::uint64_t fix_count(const ToralMap& map, int n);

// Periodic-orbit partition sum for a constant potential:
// fix_count(n) * exp(n * phi). Overflow propagates from fix_count.
double partition_function(const ToralMap& map, double phi, int n);

// Smallest |k| adjustments bringing the rectangle extents into the
// quasiround window: returns (k_minus, k_plus) with
// |lambda_u|^{k_plus} * d_u and |lambda_u|^{-k_minus} * d_s both in
// [eps0, eps1). Requires 0 < eps0 < eps1 and 0 < d_u, d_s <= eps1; throws
// GapTooNarrowError when eps1/eps0 < |lambda_u| (the window can miss some
// sizes entirely).
std::pair<int, int> quasiround_indices(const ToralMap& map, double d_u, double d_s,
                                       double eps0 = 0.01, double eps1 = 0.04);

// Eigencoordinate-aligned rectangle: center + a*e_u + b*e_s for |a| <= d_u/2,
// |b| <= d_s/2. k_plus / k_minus are the quasiround indices when a caller has
// filled them in (presentation only; experiments ignore them).
struct Rectangle {
    Eigen::Vector2d center;
    double d_u = 0.0;
    double d_s = 0.0;
    int k_minus = 0;
    int k_plus = 0;
};

double lebesgue(const ToralMap& map, const Rectangle& r);

// Point of the torus as a pair of 64-bit fractions of [0,1). Applying the
// integer matrix with wrapping multiplication is exactly the map mod 1, so
// orbits carry no rounding error at all.
struct TorusPoint {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
};

TorusPoint torus_point(double x, double y);  // reduces coordinates mod 1
TorusPoint toral_step(const ToralMap& map, TorusPoint p);

// Membership via the nearest-translate reduction: p - center is reduced to
// [-1/2, 1/2)^2 and projected on the eigenbasis. Valid for extents well below
// the reduction scale (the experiments enforce <= 0.05).
bool rect_contains(const ToralMap& map, const Rectangle& r, TorusPoint p);

// Target sequence R_1, R_2, ... for the torus hit experiment.
//   from_list          explicit rectangles, horizon bounded by the list;
//   fixed_rect         the same rectangle forever (ergodic-average control);
//   shrinking_squares  aspect-1 squares at a fixed center with
//                      Leb(R_n) = min(cap, scale/n);
//   drifting_rect      R_n = T^n R_0, the classical non-BC control.
class TorusTargets {
  public:
    enum class Law { list, fixed_rect, shrinking_square, drifting };

    static TorusTargets from_list(std::vector<Rectangle> rects);
    static TorusTargets fixed_rect(const Rectangle& r);
    static TorusTargets shrinking_squares(const Eigen::Vector2d& center, double cap,
                                          double scale);
    static TorusTargets drifting_rect(const Rectangle& r0);

    Law law() const { return law_; }
    std::int64_t limit() const;  // horizon cap (list size; unbounded otherwise)
    const Rectangle& base() const { return rects_.front(); }
    const std::vector<Rectangle>& list() const { return rects_; }
    double cap() const { return cap_; }
    double scale() const { return scale_; }

    // R_n for laws whose rectangles stay eigencoordinate-aligned. The
    // drifting law has no such representation (extents degenerate); asking
    // for it is an error — the experiment evaluates those hits by exact
    // pullback instead.
    Rectangle at(const ToralMap& map, std::int64_t n) const;
    double leb_at(const ToralMap& map, std::int64_t n) const;

  private:
    TorusTargets() = default;
    Law law_ = Law::fixed_rect;
    std::vector<Rectangle> rects_;
    Eigen::Vector2d center_{0.0, 0.0};
    double cap_ = 0.0;
    double scale_ = 0.0;
};

// Monte Carlo hit statistics for uniform starting points iterated exactly in
// fixed point. Extents above 0.05 throw RectangleTooLargeError; expected hits
// below 20 at the horizon throw MassTooSmallError. Deterministic for fixed
// seed regardless of worker count, like the shift-space experiment.
HitStatistics torus_hit_experiment(const ToralMap& map, const TorusTargets& targets,
                                   std::int64_t n_max, int num_checkpoints, int num_samples,
                                   std::uint64_t seed, int workers = 1);

}  // namespace gbc
