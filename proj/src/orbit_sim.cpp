#include "gbc/orbit_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "gbc/errors.hpp"
#include "gbc/parallel.hpp"
#include "gbc/rng.hpp"

namespace gbc {

namespace {

template <class Weights>
int pick_state(const Weights& weights, int n, double x) {
    int last = -1;
    double cum = 0.0;
    for (int s = 0; s < n; ++s) {
        const double w = weights(s);
        if (w <= 0.0) continue;
        last = s;
        cum += w;
        if (x < cum) return s;
    }
    return last;  // rounding tail of the CDF
}

// Does the orbit show the word of this block's base on its absolute
// positions? For a derived sequence every index of block k pins the same
// absolute window base_support + s_k.
bool matches_at(SymbolicOrbit& x, const Cylinder& c, std::int64_t offset) {
    const Interval& s = c.support();
    const Word& w = c.word();
    for (std::size_t j = 0; j < w.size(); ++j)
        if (x.symbol(offset + s.lo + static_cast<std::int64_t>(j)) != w[j]) return false;
    return true;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

SymbolicOrbit::SymbolicOrbit(const MarkovGibbs& g, std::uint64_t seed) : g_(&g), seed_(seed) {
    const int s = g.states();
    q_ = Eigen::MatrixXd::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) q_(i, j) = g.p()(j) * g.P()(j, i) / g.p()(i);
        const double row_sum = q_.row(i).sum();
        if (std::abs(row_sum - 1.0) > 1e-9)
            throw NumericError("reversed chain row " + std::to_string(i) +
                               " is not stochastic: sum " + std::to_string(row_sum));
        q_.row(i) /= row_sum;
    }
    states_.push_back(pick_state(g.p(), g.states(), u01(seed_, 0, 0)));
}

int SymbolicOrbit::state(std::int64_t i) {
    while (hi_ < i) {
        const std::int64_t next = hi_ + 1;
        const double x = u01(seed_, static_cast<std::uint64_t>(next), 1);
        states_.push_back(pick_state(g_->P().row(states_.back()), g_->states(), x));
        hi_ = next;
    }
    while (lo_ > i) {
        const std::int64_t next = lo_ - 1;
        const double x = u01(seed_, static_cast<std::uint64_t>(next), 2);
        states_.push_front(pick_state(q_.row(states_.front()), g_->states(), x));
        lo_ = next;
    }
    return states_[static_cast<std::size_t>(i - lo_)];
}

std::vector<std::int64_t> hit_trajectory(SymbolicOrbit& x, const CylinderSequence& seq,
                                         const std::vector<std::int64_t>& checkpoints) {
    if (checkpoints.empty()) throw ValidationError("need at least one checkpoint");
    for (std::size_t j = 0; j < checkpoints.size(); ++j) {
        if (checkpoints[j] < 0 || checkpoints[j] > seq.size())
            throw ValidationError("checkpoint " + std::to_string(checkpoints[j]) +
                                  " outside [0, " + std::to_string(seq.size()) + "]");
        if (j > 0 && checkpoints[j] <= checkpoints[j - 1])
            throw ValidationError("checkpoints must be strictly increasing");
    }

    std::vector<std::int64_t> out;
    out.reserve(checkpoints.size());
    const std::int64_t n_hi = checkpoints.back();

    if (seq.has_derivation()) {
        const auto& s = seq.partial_sums();
        std::int64_t total = 0;
        std::size_t cp = 0;
        for (std::size_t k = 1; k < s.size() && cp < checkpoints.size(); ++k) {
            const bool hit = matches_at(x, seq.base()[k - 1], s[k]);
            while (cp < checkpoints.size() && checkpoints[cp] <= s[k]) {
                // checkpoint inside block k (or at its end)
                const std::int64_t span = checkpoints[cp] - s[k - 1];
                out.push_back(total + (hit ? span : 0));
                ++cp;
            }
            if (hit) total += s[k] - s[k - 1];
        }
        return out;
    }

    std::int64_t total = 0;
    std::size_t cp = 0;
    while (cp < checkpoints.size() && checkpoints[cp] == 0) {
        out.push_back(0);
        ++cp;
    }
    for (std::int64_t n = 1; n <= n_hi && cp < checkpoints.size(); ++n) {
        if (matches_at(x, seq.at(n), n)) ++total;
        while (cp < checkpoints.size() && checkpoints[cp] == n) {
            out.push_back(total);
            ++cp;
        }
    }
    return out;
}

std::int64_t hit_count(SymbolicOrbit& x, const CylinderSequence& seq, std::int64_t n) {
    if (n == 0) return 0;
    return hit_trajectory(x, seq, {n})[0];
}

std::vector<std::int64_t> geometric_checkpoints(std::int64_t n_max, int count) {
    if (n_max < 1) throw ValidationError("horizon must be positive");
    if (count < 1) throw ValidationError("need at least one checkpoint");
    std::vector<std::int64_t> cps;
    for (int j = 1; j <= count; ++j) {
        // ceil(n_max / 2^(count-j)) without overflow for large exponents
        const int shift = count - j;
        const std::int64_t n =
            shift >= 62 ? 1 : (n_max + (std::int64_t{1} << shift) - 1) >> shift;
        if (cps.empty() || n > cps.back()) cps.push_back(n);
    }
    return cps;
}

HitStatistics assemble_hit_statistics(std::vector<std::int64_t> checkpoints,
                                      std::vector<double> expected,
                                      std::vector<std::uint64_t> sample_seeds,
                                      std::vector<std::vector<std::int64_t>> counts) {
    HitStatistics stats;
    stats.checkpoints = std::move(checkpoints);
    stats.expected = std::move(expected);
    stats.sample_seeds = std::move(sample_seeds);
    stats.counts = std::move(counts);

    const std::size_t n_cp = stats.checkpoints.size();
    const std::size_t num_samples = stats.counts.size();
    const double e_max = stats.expected.back();

    stats.ratio_quantiles.resize(n_cp);
    std::vector<double> ratios(num_samples);
    for (std::size_t j = 0; j < n_cp; ++j) {
        for (std::size_t i = 0; i < ratios.size(); ++i)
            ratios[i] = static_cast<double>(stats.counts[i][j]) / stats.expected[j];
        std::sort(ratios.begin(), ratios.end());
        for (std::size_t q = 0; q < HitStatistics::quantile_levels.size(); ++q)
            stats.ratio_quantiles[j][q] =
                sorted_quantile(ratios, HitStatistics::quantile_levels[q]);
    }

    // Error exponent per sample: slope of log|S-E| against log E over the top
    // decade of E; exact hits carry no information about the rate and are
    // dropped.
    stats.exponents.reserve(num_samples);
    for (std::size_t i = 0; i < num_samples; ++i) {
        std::vector<double> xs, ys;
        for (std::size_t j = 0; j < n_cp; ++j) {
            if (stats.expected[j] < e_max / 10.0) continue;
            const double err =
                std::abs(static_cast<double>(stats.counts[i][j]) - stats.expected[j]);
            if (err < 0.5) continue;
            xs.push_back(std::log(stats.expected[j]));
            ys.push_back(std::log(err));
        }
        double slope = 0.0;
        if (xs.size() >= 2) {
            double mx = 0.0, my = 0.0;
            for (std::size_t t = 0; t < xs.size(); ++t) {
                mx += xs[t];
                my += ys[t];
            }
            mx /= static_cast<double>(xs.size());
            my /= static_cast<double>(xs.size());
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t t = 0; t < xs.size(); ++t) {
                sxy += (xs[t] - mx) * (ys[t] - my);
                sxx += (xs[t] - mx) * (xs[t] - mx);
            }
            if (sxx > 0.0) slope = sxy / sxx;
        }
        stats.exponents.push_back(slope);
    }
    return stats;
}

HitStatistics sbc_experiment(const MarkovGibbs& g, const CylinderSequence& seq,
                             std::int64_t n_max, int num_checkpoints, int num_samples,
                             std::uint64_t seed, int workers) {
    if (n_max < 1 || n_max > seq.size())
        throw ValidationError("horizon must lie in [1, " + std::to_string(seq.size()) + "]");
    if (num_samples < 1) throw ValidationError("need at least one sample");

    const auto checkpoints = geometric_checkpoints(n_max, num_checkpoints);
    std::vector<double> expected;
    expected.reserve(checkpoints.size());
    for (const std::int64_t n : checkpoints) expected.push_back(expected_hits(g, seq, n));
    if (expected.back() < 20.0)
        throw MassTooSmallError("expected hits " + std::to_string(expected.back()) +
                                " at the horizon; need at least 20");

    std::vector<std::uint64_t> sample_seeds(static_cast<std::size_t>(num_samples));
    std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(num_samples));
    parallel_items(num_samples, workers, [&](std::int64_t i) {
        const std::uint64_t sub = counter_hash(seed, static_cast<std::uint64_t>(i));
        SymbolicOrbit orbit(g, sub);
        sample_seeds[static_cast<std::size_t>(i)] = sub;
        counts[static_cast<std::size_t>(i)] = hit_trajectory(orbit, seq, checkpoints);
    });

    return assemble_hit_statistics(checkpoints, std::move(expected), std::move(sample_seeds),
                                   std::move(counts));
}

}  // namespace gbc
