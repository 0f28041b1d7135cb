#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include <Eigen/Dense>

#include "gbc/bc_lab.hpp"
#include "gbc/gibbs.hpp"

namespace gbc {

// Stationary two-sided sample path of the chain. The state at index 0 is
// drawn from p, indices grow to the right by rows of P and to the left by the
// reversed chain Q_ij = p_j P_ji / p_i (row-stochastic by stationarity). Every
// draw is a counter-hash of (seed, index), so the path is a pure function of
// the seed: extension order never changes it, and regeneration is
// bit-identical. Holds a reference to the chain; keep the chain alive.
class SymbolicOrbit {
  public:
    SymbolicOrbit(const MarkovGibbs& g, std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    const Eigen::MatrixXd& reversed() const { return q_; }

    int state(std::int64_t i);  // lazily extends the materialized window
    int symbol(std::int64_t i) { return g_->first_symbol(state(i)); }

    std::int64_t window_lo() const { return lo_; }
    std::int64_t window_hi() const { return hi_; }

  private:
    const MarkovGibbs* g_;
    std::uint64_t seed_;
    Eigen::MatrixXd q_;
    std::deque<int> states_;
    std::int64_t lo_ = 0;
    std::int64_t hi_ = 0;
};

// S_n: how many indices m <= n have the orbit showing word(C_m) on the
// support of C_m shifted to time m.
std::int64_t hit_count(SymbolicOrbit& x, const CylinderSequence& seq, std::int64_t n);

// S at each checkpoint (checkpoints strictly increasing, within the
// sequence). For derived sequences all indices of one block test the same
// absolute positions, so the walk costs one word comparison per block.
std::vector<std::int64_t> hit_trajectory(SymbolicOrbit& x, const CylinderSequence& seq,
                                         const std::vector<std::int64_t>& checkpoints);

struct HitStatistics {
    static constexpr std::array<double, 5> quantile_levels{0.05, 0.25, 0.5, 0.75, 0.95};

    std::vector<std::int64_t> checkpoints;  // N_1 < ... < N_J
    std::vector<double> expected;           // E at each checkpoint
    std::vector<std::uint64_t> sample_seeds;
    std::vector<std::vector<std::int64_t>> counts;   // [sample][checkpoint]
    std::vector<std::array<double, 5>> ratio_quantiles;  // [checkpoint][level]
    std::vector<double> exponents;  // per-sample slope of log|S-E| vs log E
};

// Geometric checkpoint ladder N_j = ceil(n_max * 2^(j-count)), deduplicated.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t n_max, int count);

// Shared reduction for hit experiments: takes the raw per-sample counts and
// fills in ratio quantiles per checkpoint and per-sample error exponents.
HitStatistics assemble_hit_statistics(std::vector<std::int64_t> checkpoints,
                                      std::vector<double> expected,
                                      std::vector<std::uint64_t> sample_seeds,
                                      std::vector<std::vector<std::int64_t>> counts);

// Monte Carlo hit statistics over independent orbits: per-sample counts at
// geometric checkpoints, quantiles of S/E per checkpoint, and the per-sample
// error exponent fitted over the top decade of E (points with |S-E| < 0.5
// dropped; fewer than two points left gives exponent 0). Requires enough mass
// to say anything: E at n_max below 20 throws MassTooSmallError. Samples are
// independent and land in per-sample slots, so any worker count produces the
// same statistics.
HitStatistics sbc_experiment(const MarkovGibbs& g, const CylinderSequence& seq,
                             std::int64_t n_max, int num_checkpoints, int num_samples,
                             std::uint64_t seed, int workers = 1);

}  // namespace gbc
