#include "gbc/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <Eigen/Eigenvalues>

#include "gbc/errors.hpp"
#include "gbc/log.hpp"

namespace gbc {

namespace {

constexpr int kMaxRecodedStates = 4096;
constexpr int kPowerIterationCap = 1000000;
constexpr double kRayleighRelTol = 1e-14;

Word block_of(const Word& w, std::size_t begin, std::size_t len) {
    return Word(w.begin() + static_cast<std::ptrdiff_t>(begin),
                w.begin() + static_cast<std::ptrdiff_t>(begin + len));
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

}  // namespace

Potential::Potential(const TransitionMatrix& a, int memory, std::map<Word, double> values)
    : memory_(memory), values_(std::move(values)) {
    if (memory < 1 || memory > max_memory)
        throw ValidationError("potential memory must be in [1, " + std::to_string(max_memory) +
                              "], got " + std::to_string(memory));
    const auto blocks = enumerate_words(a, memory);
    if (values_.size() != blocks.size())
        throw ValidationError("potential must assign a value to exactly every admissible block: expected " +
                              std::to_string(blocks.size()) + " values, got " + std::to_string(values_.size()));
    for (const auto& [block, v] : values_) {
        if (static_cast<int>(block.size()) != memory)
            throw ValidationError("potential block length mismatch");
        if (!a.word_admissible(block)) throw InadmissibleWordError("potential keyed by inadmissible block");
        if (!std::isfinite(v)) throw ValidationError("potential value not finite");
    }
}

Potential Potential::constant(const TransitionMatrix& a, double value) {
    std::map<Word, double> vals;
    for (int s = 0; s < a.size(); ++s) vals[{s}] = value;
    return Potential(a, 1, std::move(vals));
}

double Potential::value(const Word& block) const {
    auto it = values_.find(block);
    if (it == values_.end()) throw InadmissibleWordError("potential queried with unknown block");
    return it->second;
}

MarkovGibbs::MarkovGibbs(TransitionMatrix base, Potential phi, std::vector<Word> blocks,
                         Eigen::MatrixXd p_matrix, Eigen::VectorXd p_stat, double lambda, double theta3)
    : base_(std::move(base)),
      phi_(std::move(phi)),
      blocks_(std::move(blocks)),
      p_matrix_(std::move(p_matrix)),
      p_stat_(std::move(p_stat)),
      lambda_(lambda),
      pressure_(std::log(lambda)),
      theta3_(theta3) {
    for (int i = 0; i < states(); ++i) block_index_[blocks_[static_cast<std::size_t>(i)]] = i;
    const int b = block_length();
    for (int i = 0; i < states(); ++i)
        for (int k = 1; k < b; ++k)
            prefix_mass_[block_of(blocks_[static_cast<std::size_t>(i)], 0, static_cast<std::size_t>(k))] +=
                p_stat_(i);
}

int MarkovGibbs::state_of(const Word& block) const {
    auto it = block_index_.find(block);
    return it == block_index_.end() ? -1 : it->second;
}

double MarkovGibbs::prefix_mass(const Word& prefix) const {
    auto it = prefix_mass_.find(prefix);
    return it == prefix_mass_.end() ? 0.0 : it->second;
}

MarkovGibbs build_markov_gibbs(const TransitionMatrix& a, const Potential& phi) {
    const int m = phi.memory();
    const int b = std::max(1, m - 1);
    std::vector<Word> blocks = enumerate_words(a, b);
    const int S = static_cast<int>(blocks.size());
    if (S > kMaxRecodedStates)
        throw BlowUpError("recoded alphabet has " + std::to_string(S) + " states, cap is " +
                          std::to_string(kMaxRecodedStates));

    std::map<Word, int> index;
    for (int i = 0; i < S; ++i) index[blocks[static_cast<std::size_t>(i)]] = i;

    // Weighted transfer matrix on the recoded alphabet.
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(S, S);
    Word scratch;
    for (int u = 0; u < S; ++u) {
        const Word& bu = blocks[static_cast<std::size_t>(u)];
        for (int v = 0; v < S; ++v) {
            const Word& bv = blocks[static_cast<std::size_t>(v)];
            bool ok;
            if (b == 1) {
                ok = a.allows(bu[0], bv[0]);
            } else {
                ok = std::equal(bu.begin() + 1, bu.end(), bv.begin());
            }
            if (!ok) continue;
            double w;
            if (m == 1) {
                w = phi.value(bu);
            } else {
                scratch = bu;
                scratch.push_back(bv.back());
                w = phi.value(scratch);
            }
            const double weight = std::exp(w);
            if (!std::isfinite(weight) || weight <= 0.0)
                throw BlowUpError("potential weight exp(" + std::to_string(w) + ") not a positive finite number");
            L(u, v) = weight;
        }
    }

    // Perron data by power iteration, deterministic all-ones start. The mixed
    // Rayleigh quotient l·L·r/(l·r) estimates the eigenvalue; iteration stops
    // only when both eigenvectors meet the componentwise relative residual
    // (the quotient itself converges twice as fast and would leave the
    // vectors — and hence the stochasticized matrix — short of tolerance).
    Eigen::VectorXd r = Eigen::VectorXd::Ones(S);
    Eigen::VectorXd l = Eigen::VectorXd::Ones(S);
    double lambda = 0.0;
    bool converged = false;
    for (int it = 0; it < kPowerIterationCap; ++it) {
        Eigen::VectorXd r2 = L * r;
        Eigen::VectorXd l2 = L.transpose() * l;
        const double num = l.dot(r2);
        const double den = l.dot(r);
        if (den <= 0.0 || num <= 0.0) throw NumericError("power iteration lost positivity");
        const double lam = num / den;
        const bool r_ok =
            ((r2 - lam * r).cwiseAbs().array() <= kRayleighRelTol * lam * r.array()).all();
        const bool l_ok =
            ((l2 - lam * l).cwiseAbs().array() <= kRayleighRelTol * lam * l.array()).all();
        r = r2 / r2.sum();
        l = l2 / l2.sum();
        lambda = lam;
        if (r_ok && l_ok) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NoConvergenceError("power iteration did not converge within 1e6 steps");
    if (!std::isfinite(lambda) || lambda <= 0.0) throw NumericError("Perron eigenvalue not positive");

    // Stochasticization and stationary vector.
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
    for (int u = 0; u < S; ++u) {
        for (int v = 0; v < S; ++v)
            if (L(u, v) != 0.0) P(u, v) = L(u, v) * r(v) / (lambda * r(u));
        const double rowsum = P.row(u).sum();
        if (std::abs(rowsum - 1.0) > 1e-12)
            throw NumericError("stochasticization residual " + sci(std::abs(rowsum - 1.0)));
        P.row(u) /= rowsum;
    }
    Eigen::VectorXd p = l.cwiseProduct(r);
    p /= p.sum();
    const double stat_resid = ((p.transpose() * P).transpose() - p).cwiseAbs().maxCoeff();
    if (stat_resid > 1e-12) throw NumericError("stationarity residual " + sci(stat_resid));
    if (p.minCoeff() <= 0.0) throw NumericError("stationary vector not strictly positive");

    // Second-largest eigenvalue modulus of P controls correlation decay.
    Eigen::EigenSolver<Eigen::MatrixXd> es(P, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NumericError("eigensolve of the stochastic matrix failed");
    std::vector<double> moduli(static_cast<std::size_t>(S));
    for (int i = 0; i < S; ++i) moduli[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()(i));
    std::sort(moduli.begin(), moduli.end(), std::greater<>());
    if (std::abs(moduli[0] - 1.0) > 1e-8)
        throw NumericError("leading eigenvalue of the stochastic matrix is not 1");
    const double theta3 = S > 1 ? std::min(moduli[1], 1.0) : 0.0;
    if (theta3 >= 1.0 - 1e-9)
        throw PeriodicError("no spectral gap: second eigenvalue modulus " + std::to_string(theta3));

    log::debug("chain built: states=" + std::to_string(S) + " lambda=" + std::to_string(lambda) +
               " theta3=" + std::to_string(theta3));
    return MarkovGibbs(a, phi, std::move(blocks), std::move(P), std::move(p), lambda, theta3);
}

Eigen::MatrixXd transition_power(const MarkovGibbs& g, std::int64_t gap) {
    if (gap < 0) throw ValidationError("transition_power needs a non-negative exponent");
    const int S = g.states();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(S, S);
    Eigen::MatrixXd sq = g.P();
    std::uint64_t e = static_cast<std::uint64_t>(gap);
    while (e > 0) {
        if (e & 1u) acc = acc * sq;
        e >>= 1;
        if (e > 0) sq = sq * sq;
    }
    return acc;
}

double cylinder_measure(const MarkovGibbs& g, const Cylinder& c) {
    const Word& w = c.word();
    const int n = static_cast<int>(w.size());
    const int b = g.block_length();
    if (n < b) return g.prefix_mass(w);
    Word buf = block_of(w, 0, static_cast<std::size_t>(b));
    int s0 = g.state_of(buf);
    double acc = g.p()(s0);
    for (int i = b; i < n; ++i) {
        buf.erase(buf.begin());
        buf.push_back(w[static_cast<std::size_t>(i)]);
        const int s1 = g.state_of(buf);
        acc *= g.P()(s0, s1);
        s0 = s1;
    }
    return acc;
}

namespace {

using PinMap = std::map<std::int64_t, int>;

void add_pins(PinMap& pins, const Cylinder& c) {
    const auto& w = c.word();
    for (std::int64_t j = c.support().lo; j <= c.support().hi; ++j)
        pins[j] = w[static_cast<std::size_t>(j - c.support().lo)];
}

// Zeroes the selector entries of states whose block conflicts with a pinned
// symbol inside the window [tau, tau+b-1].
void apply_mask(const MarkovGibbs& g, Eigen::RowVectorXd& v, const PinMap& pins, std::int64_t tau) {
    const int b = g.block_length();
    auto it = pins.lower_bound(tau);
    for (; it != pins.end() && it->first <= tau + b - 1; ++it) {
        const int offset = static_cast<int>(it->first - tau);
        const int sym = it->second;
        for (int s = 0; s < g.states(); ++s)
            if (v(s) != 0.0 && g.block_order()[static_cast<std::size_t>(s)][static_cast<std::size_t>(offset)] != sym)
                v(s) = 0.0;
    }
}

// Measure of the set of sequences matching every pinned symbol: a selector
// row vector is advanced along the lattice, masked at each constrained block
// window, with matrix-power jumps across free stretches.
double pinned_mass(const MarkovGibbs& g, const PinMap& pins) {
    if (pins.empty()) return 1.0;
    const int b = g.block_length();
    const std::int64_t lo = pins.begin()->first;
    const std::int64_t hi = pins.rbegin()->first;
    if (hi - lo + 1 < b) {
        double total = 0.0;
        for (int s = 0; s < g.states(); ++s) {
            const Word& block = g.block_order()[static_cast<std::size_t>(s)];
            bool match = true;
            for (const auto& [q, sym] : pins)
                if (block[static_cast<std::size_t>(q - lo)] != sym) {
                    match = false;
                    break;
                }
            if (match) total += g.p()(s);
        }
        return total;
    }
    Eigen::RowVectorXd v = g.p().transpose();
    std::int64_t tau = lo;
    apply_mask(g, v, pins, tau);
    for (;;) {
        auto it = pins.upper_bound(tau + b - 1);
        if (it == pins.end()) break;
        const std::int64_t tau_next = it->first - b + 1 > tau ? it->first - b + 1 : tau + 1;
        const std::int64_t jump = tau_next - tau;
        if (jump <= 4) {
            for (std::int64_t j = 0; j < jump; ++j) v = v * g.P();
        } else {
            v = v * transition_power(g, jump);
        }
        apply_mask(g, v, pins, tau_next);
        tau = tau_next;
    }
    return v.sum();
}

}  // namespace

double joint_measure(const MarkovGibbs& g, const Cylinder& c1, const Cylinder& c2) {
    const auto ov = overlap_consistent(g.base(), c1, c2);
    if (ov.kind == OverlapResult::Kind::inconsistent) return 0.0;
    if (ov.kind == OverlapResult::Kind::merged) return cylinder_measure(g, *ov.merged);
    const bool first_left = c1.support().lo < c2.support().lo;
    const Cylinder& left = first_left ? c1 : c2;
    const Cylinder& right = first_left ? c2 : c1;
    const int b = g.block_length();
    const int nl = static_cast<int>(left.word().size());
    const int nr = static_cast<int>(right.word().size());
    if (nl >= b && nr >= b) {
        // Scalar bridge: measure of the left word, a matrix-power hop across
        // the gap, then the right word's internal transitions.
        const Word& wl = left.word();
        const Word& wr = right.word();
        Word buf = block_of(wl, 0, static_cast<std::size_t>(b));
        int s0 = g.state_of(buf);
        double acc = g.p()(s0);
        for (int i = b; i < nl; ++i) {
            buf.erase(buf.begin());
            buf.push_back(wl[static_cast<std::size_t>(i)]);
            const int s1 = g.state_of(buf);
            acc *= g.P()(s0, s1);
            s0 = s1;
        }
        buf = block_of(wr, 0, static_cast<std::size_t>(b));
        const int start_r = g.state_of(buf);
        const std::int64_t hop = ov.gap + b - 1;
        acc *= transition_power(g, hop)(s0, start_r);
        int t0 = start_r;
        for (int i = b; i < nr; ++i) {
            buf.erase(buf.begin());
            buf.push_back(wr[static_cast<std::size_t>(i)]);
            const int t1 = g.state_of(buf);
            acc *= g.P()(t0, t1);
            t0 = t1;
        }
        return acc;
    }
    PinMap pins;
    add_pins(pins, left);
    add_pins(pins, right);
    return pinned_mass(g, pins);
}

double joint_measure_at_lag(const MarkovGibbs& g, const Cylinder& c1, const Cylinder& c2, std::int64_t t) {
    return joint_measure(g, c1, shift_cylinder(c2, t));
}

CorrelationTerm correlation(const MarkovGibbs& g, const Cylinder& cm, const Cylinder& cn,
                            std::int64_t m, std::int64_t n) {
    CorrelationTerm term;
    term.m = m;
    term.n = n;
    term.value = joint_measure_at_lag(g, cm, cn, m - n) - cylinder_measure(g, cm) * cylinder_measure(g, cn);
    return term;
}

MixingFit mixing_rate_check(const MarkovGibbs& g,
                            const std::vector<std::pair<Cylinder, Cylinder>>& pairs) {
    if (pairs.size() < 10) throw InsufficientSamplesError("mixing-rate fit needs at least 10 cylinder pairs");
    std::vector<std::pair<std::int64_t, double>> points;  // (gap, normalized |correlation|)
    for (const auto& [ca, cb] : pairs) {
        const bool a_left = ca.support().lo < cb.support().lo ||
                            (ca.support().lo == cb.support().lo && ca.support().hi <= cb.support().hi);
        const Cylinder& left = a_left ? ca : cb;
        const Cylinder& right = a_left ? cb : ca;
        const std::int64_t gap = right.support().lo - left.support().hi;
        if (gap < 1) throw ValidationError("mixing-rate pairs must have separated supports");
        const double mu1 = cylinder_measure(g, left);
        const double mu2 = cylinder_measure(g, right);
        const double ratio = std::abs(joint_measure(g, left, right) - mu1 * mu2) / (mu1 * mu2);
        points.emplace_back(gap, ratio);
    }
    MixingFit fit;
    std::vector<std::pair<double, double>> xy;
    for (const auto& [gap, ratio] : points)
        if (ratio > 1e-13) xy.emplace_back(static_cast<double>(gap), std::log(ratio));
    if (xy.empty()) {
        fit.exact_independence = true;
        return fit;
    }
    if (xy.size() < 2) throw InsufficientSamplesError("mixing-rate fit needs at least 2 nonzero correlations");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : xy) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(xy.size());
    const double det = n * sxx - sx * sx;
    if (det <= 0.0) throw InsufficientSamplesError("mixing-rate fit needs at least 2 distinct gaps");
    const double slope = (n * sxy - sx * sy) / det;
    const double intercept = (sy * sxx - sx * sxy) / det;
    fit.theta3_emp = std::exp(slope);
    fit.c3 = std::exp(intercept);
    fit.points_used = static_cast<int>(xy.size());
    double env = 0.0;
    for (const auto& [gap, ratio] : points)
        if (ratio > 1e-13) env = std::max(env, ratio / std::pow(fit.theta3_emp, static_cast<double>(gap)));
    fit.c3_envelope = env;
    return fit;
}

}  // namespace gbc
