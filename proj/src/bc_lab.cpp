#include "gbc/bc_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gbc/errors.hpp"
#include "gbc/log.hpp"
#include "gbc/parallel.hpp"
#include "gbc/rng.hpp"

namespace gbc {

namespace {

constexpr std::int64_t kMaxWindow = 5000;
constexpr std::int64_t kMaxDerivedLength = 1'000'000'000;
constexpr std::int64_t kPairwiseTagScan = 2048;

// d_nested only when the blocks repeat verbatim (all lengths one); with
// growing repeats the honest description is the wander class of the supports.
AlignmentTag classify_alignment(const std::vector<Cylinder>& base,
                                const std::vector<std::int64_t>& lengths) {
    const std::int64_t max_l = *std::max_element(lengths.begin(), lengths.end());
    const std::int64_t k = static_cast<std::int64_t>(base.size());
    if (max_l == 1 && k <= kPairwiseTagScan) {
        std::int64_t d = 0;
        for (std::size_t i = 0; i < base.size(); ++i)
            for (std::size_t j = i + 1; j < base.size(); ++j) {
                const Interval& a = base[i].support();
                const Interval& b = base[j].support();
                d = std::max(d, std::min(delta(a, b), delta(b, a)));
            }
        return {AlignmentTag::Kind::d_nested, d};
    }
    bool aligned = true;
    bool centered = true;
    for (const Cylinder& c : base) {
        const Interval& s = c.support();
        aligned = aligned && s.lo == 0;
        const std::int64_t twice_center = s.lo + s.hi;
        centered = centered && twice_center >= -1 && twice_center <= 1;
    }
    if (aligned) return {AlignmentTag::Kind::l_aligned, 0};
    if (centered) return {AlignmentTag::Kind::l_centered, 0};
    return {AlignmentTag::Kind::free_form, 0};
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

struct WindowSums {
    double sum_r = 0.0;
    double sum_mu = 0.0;
};

WindowSums sp_window(const MarkovGibbs& g, const CylinderSequence& seq, std::int64_t m_lo,
                     std::int64_t n_hi, int workers) {
    if (m_lo < 1 || n_hi < m_lo) throw ValidationError("sp window needs 1 <= M <= N");
    if (n_hi > seq.size())
        throw ValidationError("sp window end " + std::to_string(n_hi) +
                              " exceeds the sequence length " + std::to_string(seq.size()));
    const std::int64_t w = n_hi - m_lo + 1;
    if (w > kMaxWindow)
        throw ValidationError("sp window has " + std::to_string(w) + " indices; the cap is " +
                              std::to_string(kMaxWindow));

    const int b = g.block_length();
    // Per-index data. blo/bhi are the supports moved to absolute time (index n
    // pins its word on support + n); pairs whose absolute supports are
    // disjoint take the bridged product below instead of the general joint.
    std::vector<Cylinder> cyl;
    cyl.reserve(static_cast<std::size_t>(w));
    std::vector<double> mu(static_cast<std::size_t>(w)), tail(static_cast<std::size_t>(w), 0.0);
    std::vector<int> head(static_cast<std::size_t>(w), -1), last(static_cast<std::size_t>(w), -1);
    std::vector<std::int64_t> blo(static_cast<std::size_t>(w)), bhi(static_cast<std::size_t>(w));
    for (std::int64_t i = 0; i < w; ++i) {
        Cylinder c = seq.at(m_lo + i);
        const std::size_t ii = static_cast<std::size_t>(i);
        mu[ii] = cylinder_measure(g, c);
        blo[ii] = c.support().lo + (m_lo + i);
        bhi[ii] = c.support().hi + (m_lo + i);
        const Word& word = c.word();
        if (static_cast<std::int64_t>(word.size()) >= b) {
            head[ii] = g.state_of(Word(word.begin(), word.begin() + b));
            last[ii] = g.state_of(Word(word.end() - b, word.end()));
            if (head[ii] >= 0) tail[ii] = mu[ii] / g.p()(head[ii]);
        }
        cyl.push_back(std::move(c));
    }

    double sum_mu = 0.0;
    for (std::int64_t i = 0; i < w; ++i) sum_mu += mu[static_cast<std::size_t>(i)];
    if (!(sum_mu > 0.0)) throw ZeroMassWindowError("every cylinder in the window has zero measure");

    double diag = 0.0;
    for (std::int64_t i = 0; i < w; ++i) {
        const double m = mu[static_cast<std::size_t>(i)];
        diag += m * (1.0 - m);
    }

    // Off-diagonal pairs, rows chunked; each chunk accumulates into its own
    // slot and the slots are combined in chunk order, so the sum is identical
    // for every worker count. Within a row the cached transition-power row
    // for the left word's end state is advanced as the gap grows.
    const std::int64_t rows = w - 1;
    const std::int64_t chunk = 16;
    std::vector<double> partial(
        rows > 0 ? static_cast<std::size_t>((rows + chunk - 1) / chunk) : 0, 0.0);
    parallel_chunks(rows, chunk, workers, [&](std::int64_t ci, std::int64_t lo, std::int64_t hi) {
        double acc = 0.0;
        Eigen::RowVectorXd row;
        for (std::int64_t i = lo; i < hi; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            std::int64_t cur = -1;
            for (std::int64_t j = i + 1; j < w; ++j) {
                const std::size_t jj = static_cast<std::size_t>(j);
                const std::int64_t gap = blo[jj] - bhi[ii];
                double joint;
                if (gap >= 1 && last[ii] >= 0 && head[jj] >= 0) {
                    const std::int64_t steps = gap + b - 1;
                    if (cur < 0 || steps < cur) {
                        row = transition_power(g, steps).row(last[ii]);
                        cur = steps;
                    } else if (steps > cur) {
                        const std::int64_t diff = steps - cur;
                        if (diff <= 64)
                            for (std::int64_t t = 0; t < diff; ++t) row = row * g.P();
                        else
                            row = row * transition_power(g, diff);
                        cur = steps;
                    }
                    joint = mu[ii] * row(head[jj]) * tail[jj];
                } else {
                    joint = joint_measure_at_lag(g, cyl[ii], cyl[jj], i - j);
                }
                acc += joint - mu[ii] * mu[jj];
            }
        }
        partial[static_cast<std::size_t>(ci)] += acc;
    });
    double off = 0.0;
    for (const double x : partial) off += x;

    return {diag + 2.0 * off, sum_mu};
}

}  // namespace

std::string AlignmentTag::str() const {
    switch (kind) {
        case Kind::d_nested:
            return "D_nested(" + std::to_string(d) + ")";
        case Kind::l_centered:
            return "l_centered";
        case Kind::l_aligned:
            return "l_aligned";
        case Kind::free_form:
            return "free";
    }
    return "free";
}

CylinderSequence CylinderSequence::direct(std::vector<Cylinder> cylinders, AlignmentTag tag) {
    if (cylinders.empty()) throw ValidationError("a cylinder sequence needs at least one entry");
    CylinderSequence s;
    s.derived_ = false;
    s.size_ = static_cast<std::int64_t>(cylinders.size());
    s.cylinders_ = std::move(cylinders);
    s.tag_ = tag;
    return s;
}

CylinderSequence CylinderSequence::with_derivation(std::vector<Cylinder> base,
                                                   std::vector<std::int64_t> lengths,
                                                   AlignmentTag tag,
                                                   std::vector<std::string> warnings) {
    if (base.empty()) throw ValidationError("a derived sequence needs at least one base cylinder");
    if (base.size() != lengths.size())
        throw LengthMismatchError("have " + std::to_string(base.size()) + " base cylinders but " +
                                  std::to_string(lengths.size()) + " block lengths");
    CylinderSequence s;
    s.derived_ = true;
    s.psums_.reserve(lengths.size() + 1);
    s.psums_.push_back(0);
    for (const std::int64_t l : lengths) {
        if (l < 1)
            throw ValidationError("block lengths must be positive, got " + std::to_string(l));
        if (s.psums_.back() > kMaxDerivedLength - l)
            throw ValidationError("derived sequence longer than " +
                                  std::to_string(kMaxDerivedLength));
        s.psums_.push_back(s.psums_.back() + l);
    }
    s.size_ = s.psums_.back();
    s.base_ = std::move(base);
    s.lengths_ = std::move(lengths);
    s.tag_ = tag;
    s.warnings_ = std::move(warnings);
    return s;
}

Cylinder CylinderSequence::at(std::int64_t n) const {
    if (n < 1 || n > size_)
        throw ValidationError("sequence index " + std::to_string(n) + " outside [1, " +
                              std::to_string(size_) + "]");
    if (!derived_) return cylinders_[static_cast<std::size_t>(n - 1)];
    const std::int64_t k = block_of(n);
    // C_n is the (s_k - n)-step forward image of its block's base cylinder,
    // so C_{s_k} is the base itself and the support never moves left of it.
    return shift_cylinder(base_[static_cast<std::size_t>(k - 1)],
                          n - psums_[static_cast<std::size_t>(k)]);
}

std::int64_t CylinderSequence::block_of(std::int64_t n) const {
    if (!derived_) throw ValidationError("sequence has no derivation");
    if (n < 1 || n > size_)
        throw ValidationError("sequence index " + std::to_string(n) + " outside [1, " +
                              std::to_string(size_) + "]");
    const auto it = std::lower_bound(psums_.begin() + 1, psums_.end(), n);
    return static_cast<std::int64_t>(it - psums_.begin());
}

CylinderSequence derive_sequence(std::vector<Cylinder> base, std::vector<std::int64_t> lengths) {
    if (base.empty()) throw ValidationError("a derived sequence needs at least one base cylinder");
    if (base.size() != lengths.size())
        throw LengthMismatchError("have " + std::to_string(base.size()) + " base cylinders but " +
                                  std::to_string(lengths.size()) + " block lengths");
    for (const std::int64_t l : lengths)
        if (l < 1)
            throw ValidationError("block lengths must be positive, got " + std::to_string(l));
    const AlignmentTag tag = classify_alignment(base, lengths);
    return CylinderSequence::with_derivation(std::move(base), std::move(lengths), tag, {});
}

double expected_hits(const MarkovGibbs& g, const CylinderSequence& seq, std::int64_t n) {
    if (n < 0) throw ValidationError("hit-count horizon must be nonnegative");
    if (n > seq.size())
        throw ValidationError("horizon " + std::to_string(n) + " exceeds the sequence length " +
                              std::to_string(seq.size()));
    if (n == 0) return 0.0;
    double total = 0.0;
    if (seq.has_derivation()) {
        // The measure is shift-invariant, so every index of block k weighs
        // mu(base_k).
        const auto& s = seq.partial_sums();
        for (std::size_t k = 1; k < s.size() && s[k - 1] < n; ++k) {
            const std::int64_t span = std::min(s[k], n) - s[k - 1];
            total += static_cast<double>(span) *
                     cylinder_measure(g, seq.base()[static_cast<std::size_t>(k - 1)]);
        }
        return total;
    }
    for (std::int64_t i = 1; i <= n; ++i) total += cylinder_measure(g, seq.at(i));
    return total;
}

SpCell sp_cell(const MarkovGibbs& g, const CylinderSequence& seq, std::int64_t m, std::int64_t n,
               int workers) {
    const WindowSums ws = sp_window(g, seq, m, n, workers);
    return {m, n, ws.sum_r, ws.sum_mu, ws.sum_r / ws.sum_mu};
}

double sp_ratio(const MarkovGibbs& g, const CylinderSequence& seq, std::int64_t m, std::int64_t n,
                int workers) {
    return sp_cell(g, seq, m, n, workers).ratio;
}

SpReport sp_verdict(const MarkovGibbs& g, const CylinderSequence& seq,
                    const std::vector<std::int64_t>& n_grid, int workers) {
    if (n_grid.empty()) throw ValidationError("sp grid needs at least one window end");
    std::vector<std::int64_t> grid = n_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.front() < 1 || grid.back() > seq.size())
        throw ValidationError("sp grid ends must lie in [1, " + std::to_string(seq.size()) + "]");

    SpReport rep;
    for (std::int64_t m = 1; m <= grid.back(); m *= 2) {
        for (const std::int64_t n : grid) {
            if (n < m) continue;
            if (n - m + 1 > kMaxWindow) {
                log::info("sp cell M=" + std::to_string(m) + " N=" + std::to_string(n) +
                          " skipped: window wider than " + std::to_string(kMaxWindow));
                continue;
            }
            rep.cells.push_back(sp_cell(g, seq, m, n, workers));
        }
    }
    if (rep.cells.empty()) throw ValidationError("sp grid produced no computable windows");

    rep.sup_ratio = rep.cells.front().ratio;
    for (const SpCell& c : rep.cells) rep.sup_ratio = std::max(rep.sup_ratio, c.ratio);

    // A ladder row votes "growing" when doubling the window end (at least)
    // raises the ratio by more than 20%.
    bool growing = false;
    for (std::size_t lo = 0; lo < rep.cells.size();) {
        std::size_t hi = lo;
        while (hi < rep.cells.size() && rep.cells[hi].m == rep.cells[lo].m) ++hi;
        const SpCell& top = rep.cells[hi - 1];
        const SpCell* half = nullptr;
        for (std::size_t i = lo; i + 1 < hi; ++i)
            if (rep.cells[i].n * 2 <= top.n) half = &rep.cells[i];
        if (half != nullptr && top.ratio > 1.2 * half->ratio) growing = true;
        lo = hi;
    }
    rep.verdict = growing ? "growing" : "bounded";

    // Trend on the deepest row that still has at least two cells.
    for (std::size_t hi = rep.cells.size(); hi > 0;) {
        std::size_t lo = hi;
        while (lo > 0 && rep.cells[lo - 1].m == rep.cells[hi - 1].m) --lo;
        if (hi - lo >= 2) {
            std::vector<double> xs, ys;
            for (std::size_t i = lo; i < hi; ++i) {
                xs.push_back(static_cast<double>(rep.cells[i].n));
                ys.push_back(rep.cells[i].ratio);
            }
            rep.trend_slope = lsq_slope(xs, ys);
            break;
        }
        hi = lo;
    }
    return rep;
}

CylinderSequence thm22_counterexample(const MarkovGibbs& g, const Cylinder& base,
                                      const std::function<std::int64_t(std::int64_t)>& lengths,
                                      std::int64_t k_max) {
    if (k_max < 1) throw ValidationError("need at least one block");
    if (!g.base().word_admissible(base.word()))
        throw InadmissibleWordError("base word is not admissible");
    std::vector<std::int64_t> ls;
    ls.reserve(static_cast<std::size_t>(k_max));
    std::int64_t prev = 0;
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const std::int64_t lk = lengths(k);
        if (lk < 1)
            throw ValidationError("block length l(" + std::to_string(k) + ") = " +
                                  std::to_string(lk) + " is not positive");
        if (lk < prev)
            throw NotMonotoneError("block lengths must be nondecreasing: l(" + std::to_string(k) +
                                   ") = " + std::to_string(lk) + " after " + std::to_string(prev));
        ls.push_back(lk);
        prev = lk;
    }
    CylinderSequence seq =
        derive_sequence(std::vector<Cylinder>(static_cast<std::size_t>(k_max), base), ls);
    // No growth across the top half of the range: the repeats look bounded,
    // which need not defeat a summable-correlation bound.
    if (k_max >= 2 && ls.back() == ls[static_cast<std::size_t>(k_max / 2 - 1)])
        seq.add_warning("l bounded: SP may hold");
    return seq;
}

CylinderSequence thm23_counterexample(const MarkovGibbs& g, double eps, std::int64_t k_max) {
    if (!(eps > 0.0 && eps < 1.0))
        throw EpsOutOfRangeError("eps = " + std::to_string(eps) +
                                 " must lie strictly between 0 and 1");
    if (k_max < 2) throw ValidationError("need K >= 2");
    const int b = g.block_length();
    const int symbols = g.base().size();

    // Greedy word, grown once: the target mass shrinks with k, so each block's
    // word extends the previous one.
    int u = 0;
    for (int s = 1; s < g.states(); ++s)
        if (g.p()(s) > g.p()(u)) u = s;
    Word w = g.block_order()[static_cast<std::size_t>(u)];
    double mass = g.p()(u);

    std::vector<Cylinder> bases;
    std::vector<std::int64_t> ls;
    bases.reserve(static_cast<std::size_t>(k_max - 1));
    ls.reserve(static_cast<std::size_t>(k_max - 1));
    for (std::int64_t k = 2; k <= k_max; ++k) {
        const double lk = std::log(static_cast<double>(k));
        const double target = 1.0 / (static_cast<double>(k) * lk * lk);
        while (mass > target) {
            int best_state = -1;
            int best_sym = -1;
            double best_p = 0.0;
            Word blk(w.end() - (b - 1), w.end());
            blk.push_back(0);
            for (int sym = 0; sym < symbols; ++sym) {
                blk.back() = sym;
                const int v = g.state_of(blk);
                if (v < 0) continue;
                const double pv = g.P()(u, v);
                if (pv > best_p) {
                    best_p = pv;
                    best_state = v;
                    best_sym = sym;
                }
            }
            if (best_state < 0) throw NumericError("greedy word has no admissible extension");
            w.push_back(best_sym);
            mass *= best_p;
            u = best_state;
        }
        bases.push_back(
            Cylinder::trusted(Interval(0, static_cast<std::int64_t>(w.size()) - 1), w));
        ls.push_back(std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::floor(eps * static_cast<double>(w.size())))));
    }
    return derive_sequence(std::move(bases), std::move(ls));
}

CylinderSequence prop16_sequence(const MarkovGibbs& g, std::vector<Cylinder> base) {
    const std::int64_t k_max = static_cast<std::int64_t>(base.size());
    if (k_max < 2) throw ValidationError("need at least two base cylinders");
    std::vector<double> mu;
    mu.reserve(base.size());
    for (const Cylinder& c : base) mu.push_back(cylinder_measure(g, c));
    double total = 0.0, half = 0.0;
    for (std::int64_t k = 0; k < k_max; ++k) {
        total += mu[static_cast<std::size_t>(k)];
        if (k < k_max / 2) half += mu[static_cast<std::size_t>(k)];
    }
    if (total - half > 0.2 * total)
        throw DivergentBaseError("base masses do not plateau: the top half adds " +
                                 std::to_string(total - half) + " of " + std::to_string(total));
    std::vector<std::int64_t> ls;
    ls.reserve(base.size());
    for (const double m : mu) {
        const double inv = 1.0 / m;
        if (!(inv < static_cast<double>(kMaxDerivedLength)))
            throw ValidationError("base cylinder too thin: repeat count would exceed " +
                                  std::to_string(kMaxDerivedLength));
        ls.push_back(static_cast<std::int64_t>(std::floor(inv)) + 1);
    }
    return derive_sequence(std::move(base), std::move(ls));
}

CylinderSequence random_nested_sequence(const MarkovGibbs& g, std::int64_t n_max,
                                        std::uint64_t seed, std::int64_t jitter, double cap,
                                        double scale) {
    if (n_max < 1) throw ValidationError("need at least one index");
    if (jitter < 0) throw ValidationError("jitter must be nonnegative");
    if (!(cap > 0.0 && cap <= 1.0)) throw ValidationError("mass cap must lie in (0, 1]");
    if (!(scale > 0.0)) throw ValidationError("mass scale must be positive");
    const int states = g.states();

    std::vector<Cylinder> cyls;
    cyls.reserve(static_cast<std::size_t>(n_max));
    for (std::int64_t n = 1; n <= n_max; ++n) {
        const double target = std::min(cap, scale / static_cast<double>(n));
        const std::uint64_t un = static_cast<std::uint64_t>(n);

        double x = u01(seed, un, 0);
        int u = states - 1;
        double cum = 0.0;
        for (int s = 0; s < states; ++s) {
            cum += g.p()(s);
            if (x < cum) {
                u = s;
                break;
            }
        }
        Word w = g.block_order()[static_cast<std::size_t>(u)];
        double mass = g.p()(u);

        std::uint64_t step = 1;
        while (mass > target) {
            if (step > 100000) throw NumericError("word growth did not reach the target mass");
            x = u01(seed, un, step++);
            int v = -1;
            cum = 0.0;
            for (int s = 0; s < states; ++s) {
                const double pv = g.P()(u, s);
                if (pv <= 0.0) continue;
                cum += pv;
                if (x < cum) {
                    v = s;
                    break;
                }
            }
            if (v < 0)  // rounding tail: keep the last admissible state
                for (int s = states - 1; s >= 0; --s)
                    if (g.P()(u, s) > 0.0) {
                        v = s;
                        break;
                    }
            w.push_back(g.block_order()[static_cast<std::size_t>(v)].back());
            mass *= g.P()(u, v);
            u = v;
        }

        const std::int64_t len = static_cast<std::int64_t>(w.size());
        const std::int64_t j =
            jitter == 0 ? 0
                        : -jitter + static_cast<std::int64_t>(counter_hash(seed, un, 1000003) %
                                                              static_cast<std::uint64_t>(
                                                                  2 * jitter + 1));
        const std::int64_t lo = -(len / 2) + j;
        cyls.push_back(Cylinder::trusted(Interval(lo, lo + len - 1), std::move(w)));
    }
    return CylinderSequence::direct(std::move(cyls),
                                    AlignmentTag{AlignmentTag::Kind::d_nested, 2 * jitter});
}

}  // namespace gbc
