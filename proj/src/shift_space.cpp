#include "gbc/shift_space.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <string>

namespace gbc {

namespace {

constexpr std::int64_t endpoint_limit = 2147483647;  // interval endpoints stay 32-bit

std::string describe(const Interval& iv) {
    return "[" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) + "]";
}

}  // namespace

TransitionMatrix::TransitionMatrix(const Eigen::MatrixXi& a) : a_(a) {
    if (a.rows() != a.cols())
        throw ValidationError("transition matrix must be square");
    const int m = static_cast<int>(a.rows());
    if (m < 2 || m > max_symbols)
        throw ValidationError("alphabet size must be in [2, 64], got " + std::to_string(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (a(i, j) != 0 && a(i, j) != 1)
                throw ValidationError("transition matrix entries must be 0 or 1");
    for (int i = 0; i < m; ++i) {
        if (a.row(i).sum() == 0)
            throw ZeroRowOrColumnError("row " + std::to_string(i) + " of the transition matrix is zero");
        if (a.col(i).sum() == 0)
            throw ZeroRowOrColumnError("column " + std::to_string(i) + " of the transition matrix is zero");
    }
    m_ = m;

    // Rows as bitmasks; boolean-multiply A^k by A one power at a time and
    // stop at the first strictly positive power. A primitive matrix reaches
    // it within M^2 steps, so hitting the cap means the chain is periodic or
    // reducible.
    std::array<std::uint64_t, max_symbols> rows{}, cur{};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (a(i, j) != 0) rows[static_cast<std::size_t>(i)] |= (1ull << j);
    cur = rows;  // A^1
    const std::uint64_t full = m == 64 ? ~0ull : ((1ull << m) - 1);
    const int cap = m * m;
    for (int k = 1;; ++k) {
        bool all = true;
        for (int i = 0; i < m; ++i) all = all && cur[static_cast<std::size_t>(i)] == full;
        if (all) {
            k_ = k;
            break;
        }
        if (k == cap)
            throw NotTransitiveError("no power of the transition matrix up to M^2 is strictly positive");
        std::array<std::uint64_t, max_symbols> nxt{};
        for (int i = 0; i < m; ++i) {
            std::uint64_t r = cur[static_cast<std::size_t>(i)], acc = 0;
            while (r != 0) {
                const int j = std::countr_zero(r);
                r &= r - 1;
                acc |= rows[static_cast<std::size_t>(j)];
            }
            nxt[static_cast<std::size_t>(i)] = acc;
        }
        cur = nxt;
    }
}

bool TransitionMatrix::word_admissible(const Word& w) const {
    for (int s : w)
        if (s < 0 || s >= m_) return false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (!allows(w[i], w[i + 1])) return false;
    return true;
}

std::vector<Word> enumerate_words(const TransitionMatrix& a, int len) {
    if (len < 1 || len > 30)
        throw LengthTooLargeError("word length must be in [1, 30], got " + std::to_string(len));
    std::vector<Word> out;
    Word w;
    w.reserve(static_cast<std::size_t>(len));
    // depth-first over symbols in increasing order -> lexicographic output
    auto grow = [&](auto&& self) -> void {
        if (static_cast<int>(w.size()) == len) {
            out.push_back(w);
            return;
        }
        for (int s = 0; s < a.size(); ++s) {
            if (!w.empty() && !a.allows(w.back(), s)) continue;
            w.push_back(s);
            self(self);
            w.pop_back();
        }
    };
    grow(grow);
    return out;
}

Interval::Interval(std::int64_t lo_, std::int64_t hi_) : lo(lo_), hi(hi_) {
    if (lo > hi)
        throw ValidationError("interval endpoints out of order: " + describe(*this));
    if (lo < -endpoint_limit || hi > endpoint_limit)
        throw ValidationError("interval endpoint exceeds 32-bit range: " + describe(*this));
}

std::int64_t delta(const Interval& a, const Interval& b) {
    return std::max<std::int64_t>({b.hi - a.hi, a.lo - b.lo, 0});
}

bool is_d_nested(const Interval& a, const Interval& b, std::int64_t d) {
    return std::min(delta(a, b), delta(b, a)) <= d;
}

Cylinder::Cylinder(const TransitionMatrix& a, Interval support, Word word) {
    if (static_cast<std::int64_t>(word.size()) != support.length())
        throw ValidationError("cylinder word length " + std::to_string(word.size()) +
                              " does not match support " + describe(support));
    if (!a.word_admissible(word))
        throw InadmissibleWordError("cylinder word is not admissible on support " + describe(support));
    support_ = support;
    word_ = std::move(word);
}

Cylinder Cylinder::trusted(Interval support, Word word) {
    Cylinder c;
    c.support_ = support;
    c.word_ = std::move(word);
    return c;
}

Cylinder shift_cylinder(const Cylinder& c, std::int64_t t) {
    return Cylinder::trusted(Interval(c.support().lo - t, c.support().hi - t), c.word());
}

OverlapResult overlap_consistent(const TransitionMatrix& a, const Cylinder& c1, const Cylinder& c2) {
    const Cylinder* left = &c1;
    const Cylinder* right = &c2;
    if (right->support().lo < left->support().lo) std::swap(left, right);

    OverlapResult res;
    if (right->support().lo > left->support().hi + 1) {
        res.kind = OverlapResult::Kind::disjoint;
        res.gap = right->support().lo - left->support().hi;
        return res;
    }

    // Supports overlap or abut: the union is one interval. Fill the merged
    // word from both cylinders, checking agreement where they both pin.
    const Interval uni(std::min(left->support().lo, right->support().lo),
                       std::max(left->support().hi, right->support().hi));
    Word merged(static_cast<std::size_t>(uni.length()), -1);
    auto lay = [&](const Cylinder& c) {
        for (std::int64_t j = 0; j < c.support().length(); ++j) {
            const std::size_t pos = static_cast<std::size_t>(c.support().lo - uni.lo + j);
            const int sym = c.word()[static_cast<std::size_t>(j)];
            if (merged[pos] != -1 && merged[pos] != sym) return false;
            merged[pos] = sym;
        }
        return true;
    };
    if (!lay(*left) || !lay(*right)) {
        res.kind = OverlapResult::Kind::inconsistent;
        return res;
    }
    // Abutting supports leave no hole, so every position is pinned; the only
    // thing left to check is admissibility across the junction.
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        if (!a.allows(merged[i], merged[i + 1])) {
            res.kind = OverlapResult::Kind::inconsistent;
            return res;
        }
    }
    res.kind = OverlapResult::Kind::merged;
    res.merged = Cylinder::trusted(uni, std::move(merged));
    return res;
}

}  // namespace gbc
