#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gbc/errors.hpp"

namespace gbc {

// Symbols are 0-based: 0..M-1.
using Word = std::vector<int>;

// 0/1 transition matrix of a topological Markov chain over a two-sided shift.
// Construction validates that some power A^K is strictly positive (so the
// chain mixes every pair of symbols); the least such K is kept. A row or
// column of zeros, or a matrix that is merely irreducible-with-period (e.g.
// [[0,1],[1,0]]), is rejected.
class TransitionMatrix {
public:
    static constexpr int max_symbols = 64;

    explicit TransitionMatrix(const Eigen::MatrixXi& a);

    int size() const { return m_; }
    bool allows(int u, int v) const { return a_(u, v) != 0; }
    const Eigen::MatrixXi& matrix() const { return a_; }

    // Least K with A^K strictly positive; at most M^2 by construction.
    int transitivity_power() const { return k_; }

    bool word_admissible(const Word& w) const;

private:
    Eigen::MatrixXi a_;
    int m_ = 0;
    int k_ = 0;
};

// Interface-level alias for the validating constructor.
inline TransitionMatrix check_transitive(const Eigen::MatrixXi& a) { return TransitionMatrix(a); }

// All admissible words of the given length in lexicographic order.
// len is capped at 30 to guard against accidental exponential blowups.
std::vector<Word> enumerate_words(const TransitionMatrix& a, int len);

// Finite integer interval [lo, hi]. Endpoints stay within 32-bit range (the
// sequence indices that shift intervals around are 64-bit).
struct Interval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    Interval() = default;
    Interval(std::int64_t lo_, std::int64_t hi_);

    std::int64_t length() const { return hi - lo + 1; }
    double center() const { return 0.5 * static_cast<double>(lo + hi); }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

// Asymmetric overhang of b relative to a: how far b sticks out of a on either
// side. Zero exactly when a contains b.
std::int64_t delta(const Interval& a, const Interval& b);

// Two intervals are D-nested when one of them sticks out of the other by at
// most D: min(delta(a,b), delta(b,a)) <= D.
bool is_d_nested(const Interval& a, const Interval& b, std::int64_t d);

// A cylinder pins `word` on `support`: the set of two-sided sequences whose
// symbols on the support equal the word. The checked constructor validates
// the word against a transition matrix; internal operations that provably
// preserve admissibility use `trusted`.
class Cylinder {
public:
    Cylinder(const TransitionMatrix& a, Interval support, Word word);

    // Caller guarantees the word is admissible and sized to the support.
    static Cylinder trusted(Interval support, Word word);

    const Interval& support() const { return support_; }
    const Word& word() const { return word_; }

    friend bool operator==(const Cylinder&, const Cylinder&) = default;

private:
    Cylinder() = default;
    Interval support_;
    Word word_;
};

// Image of the cylinder under the t-th power of the shift: the support moves
// to [lo - t, hi - t], the word is unchanged (a point lies in the image iff
// its symbol at j equals the original constraint at j + t).
Cylinder shift_cylinder(const Cylinder& c, std::int64_t t);

// Pairwise consistency of two cylinders.
//   merged       the supports overlap or abut; symbols agree on the overlap
//                and the junction transition is admissible, so the
//                intersection is itself a cylinder on the union interval
//   inconsistent the supports overlap or abut but symbols clash or the
//                junction is not admissible: the intersection is empty
//   disjoint     a hole separates the supports; gap = right.lo - left.hi is
//                the number of transition steps bridging the two words
struct OverlapResult {
    enum class Kind { disjoint, merged, inconsistent };
    Kind kind = Kind::disjoint;
    std::int64_t gap = 0;
    std::optional<Cylinder> merged;
};

OverlapResult overlap_consistent(const TransitionMatrix& a, const Cylinder& c1, const Cylinder& c2);

}  // namespace gbc
