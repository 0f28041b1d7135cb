#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gbc/gibbs.hpp"
#include "gbc/shift_space.hpp"

namespace gbc {

// How the supports of a cylinder sequence are arranged. d_nested carries the
// slack D; the other kinds describe sequences whose supports wander by up to
// the block length (left endpoints resp. centers near a common point), or
// nothing detectable.
struct AlignmentTag {
    enum class Kind { d_nested, l_centered, l_aligned, free_form };
    Kind kind = Kind::free_form;
    std::int64_t d = 0;  // only meaningful for d_nested

    std::string str() const;
};

// A target sequence C_1, C_2, ... of cylinders. Either a plain list, or a
// derived sequence given by base cylinders and repeat lengths: with partial
// sums s_0 = 0 < s_1 < ... < s_K, index n in block k (s_{k-1} < n <= s_k)
// yields C_n = shift_cylinder(base_k, n - s_k), so C_{s_k} is the base itself
// and earlier indices are its forward images. Derived storage is O(K); C_n is
// materialised on demand.
class CylinderSequence {
  public:
    static CylinderSequence direct(std::vector<Cylinder> cylinders, AlignmentTag tag);
    static CylinderSequence with_derivation(std::vector<Cylinder> base,
                                            std::vector<std::int64_t> lengths, AlignmentTag tag,
                                            std::vector<std::string> warnings);

    std::int64_t size() const { return size_; }  // largest valid index, 1-based
    Cylinder at(std::int64_t n) const;           // C_n for 1 <= n <= size()

    bool has_derivation() const { return derived_; }
    std::int64_t block_of(std::int64_t n) const;  // 1-based block index k(n)
    const std::vector<Cylinder>& base() const { return base_; }
    const std::vector<std::int64_t>& lengths() const { return lengths_; }
    const std::vector<std::int64_t>& partial_sums() const { return psums_; }  // s_0..s_K

    const AlignmentTag& alignment() const { return tag_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  private:
    CylinderSequence() = default;

    bool derived_ = false;
    std::int64_t size_ = 0;
    std::vector<Cylinder> cylinders_;  // direct storage
    std::vector<Cylinder> base_;       // derived storage
    std::vector<std::int64_t> lengths_;
    std::vector<std::int64_t> psums_;
    AlignmentTag tag_;
    std::vector<std::string> warnings_;
};

// Builds the derived sequence from base cylinders and per-block repeat counts.
// Throws LengthMismatchError if the two lists disagree in size, and
// ValidationError for empty input, non-positive lengths, or a total length
// beyond 1e9. The alignment tag is classified from the base supports and
// lengths: all lengths one and few enough blocks to scan pairwise gives
// d_nested(max pairwise slack); otherwise common left endpoint 0 gives
// l_aligned, supports centered at 0 give l_centered, anything else free_form.
CylinderSequence derive_sequence(std::vector<Cylinder> base, std::vector<std::int64_t> lengths);

// E_N = sum_{n<=N} mu(C_n). N = 0 gives 0; N beyond the sequence throws
// ValidationError. Uses per-block arithmetic for derived sequences (the
// measure is shift-invariant, so every index in a block weighs the same).
double expected_hits(const MarkovGibbs& g, const CylinderSequence& seq, std::int64_t N);

// Correlation-sum ratio over the window m, n in [M, N]:
//   sum_{m,n} [ mu(C_m cap sigma^{m-n} C_n) - mu(C_m) mu(C_n) ] / sum_n mu(C_n),
// computed exactly term by term. Off-diagonal pairs with disjoint shifted
// supports reuse a cached transition-power row per m; overlapping or
// short-word pairs fall back to the general joint measure. Window width is
// capped at 5000 indices (ValidationError beyond); an all-zero-mass window
// throws ZeroMassWindowError. The pair loop is chunked and reduced in fixed
// chunk order, so the result is byte-identical for any worker count.
double sp_ratio(const MarkovGibbs& g, const CylinderSequence& seq, std::int64_t M, std::int64_t N,
                int workers = 1);

struct SpCell {
    std::int64_t m = 0;
    std::int64_t n = 0;
    double sum_r = 0.0;
    double sum_mu = 0.0;
    double ratio = 0.0;
};

struct SpReport {
    std::vector<SpCell> cells;  // row-major: M from the ladder, N from the grid
    double sup_ratio = 0.0;
    double trend_slope = 0.0;  // least-squares slope of ratio vs N on the largest-M row
    std::string verdict;       // "bounded" or "growing"
};

// One grid cell: both correlation sums and their ratio for the window [M, N].
SpCell sp_cell(const MarkovGibbs& g, const CylinderSequence& seq, std::int64_t M, std::int64_t N,
               int workers = 1);

// Evaluates sp_ratio on a grid: window starts M from the geometric ladder
// {1, 2, 4, ...} and window ends N from n_grid (cells with M > N or width
// over the cap are skipped, the latter with an info log). Verdict "growing"
// iff on some ladder row the ratio at the largest N exceeds 1.2x the ratio at
// the largest grid N at most half as big; otherwise "bounded".
SpReport sp_verdict(const MarkovGibbs& g, const CylinderSequence& seq,
                    const std::vector<std::int64_t>& n_grid, int workers = 1);

// Repeats one base cylinder with block lengths l(1..K). The length map must
// be positive and nondecreasing (NotMonotoneError otherwise). A length map
// that looks bounded (no growth across the top half of the range) is accepted
// but tagged with a warning, since bounded repeats need not break the
// summable-correlation property.
CylinderSequence thm22_counterexample(const MarkovGibbs& g, const Cylinder& base,
                                      const std::function<std::int64_t(std::int64_t)>& lengths,
                                      std::int64_t K);

// For k = 2..K grows a 0-aligned word greedily (start at the heaviest state,
// extend by the most probable admissible successor, ties to the smallest
// symbol) until mu <= 1/(k ln^2 k), then repeats that cylinder
// max(1, floor(eps * word length)) times. eps must lie strictly in (0, 1)
// (EpsOutOfRangeError). The base masses are summable while the derived
// sequence keeps a divergent hit sum.
CylinderSequence thm23_counterexample(const MarkovGibbs& g, double eps, std::int64_t K);

// Derived sequence with l_k = floor(1 / mu(base_k)) + 1, so each block
// contributes a hit sum in (1, 1 + mu]. Requires at least two base cylinders
// and a summable base: the partial sums of mu(base_k) must plateau
// (S_K - S_{K/2} <= 0.2 S_K), else DivergentBaseError.
CylinderSequence prop16_sequence(const MarkovGibbs& g, std::vector<Cylinder> base);

// Randomised direct sequence of near-centered cylinders: the word for index n
// is grown from counter-hash draws (seed, n) until mu <= min(cap, scale/n),
// and its support is centered up to an integer jitter in [-d, d]. Any two
// such supports are (2d)-nested, so the sequence is tagged d_nested(2d).
// Regenerating with the same arguments gives the same sequence.
CylinderSequence random_nested_sequence(const MarkovGibbs& g, std::int64_t N, std::uint64_t seed,
                                        std::int64_t jitter, double cap, double scale);

}  // namespace gbc
