#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gbc/shift_space.hpp"

namespace gbc {

// Potential depending on `memory` consecutive symbols, given by one finite
// value per admissible block of that length. Blocks are keyed by their symbol
// vectors; the checked constructor demands exactly the admissible block set.
class Potential {
public:
    static constexpr int max_memory = 12;

    Potential(const TransitionMatrix& a, int memory, std::map<Word, double> values);

    // memory-1 potential taking one value everywhere (value 0 gives the
    // measure of maximal entropy).
    static Potential constant(const TransitionMatrix& a, double value);

    int memory() const { return memory_; }
    double value(const Word& block) const;
    const std::map<Word, double>& values() const { return values_; }

private:
    int memory_ = 1;
    std::map<Word, double> values_;
};

// Stationary Markov realization of the equilibrium measure of a locally
// constant potential. States are the admissible (memory-1)-blocks (plain
// symbols when memory <= 2); `P` is their stochastic transition matrix
// obtained by normalizing the weighted transfer matrix with its Perron
// eigendata, `p` the stationary law, `pressure` the log of the Perron root,
// and `theta3` the modulus of the second-largest eigenvalue of P, which
// controls how fast correlations of separated cylinders decay.
class MarkovGibbs {
public:
    MarkovGibbs(TransitionMatrix base, Potential phi, std::vector<Word> blocks,
                Eigen::MatrixXd p_matrix, Eigen::VectorXd p_stat, double lambda, double theta3);

    const TransitionMatrix& base() const { return base_; }
    const Potential& potential() const { return phi_; }

    int states() const { return static_cast<int>(blocks_.size()); }
    int block_length() const { return static_cast<int>(blocks_.front().size()); }
    const std::vector<Word>& block_order() const { return blocks_; }
    int state_of(const Word& block) const;  // -1 when the block is not a state

    const Eigen::MatrixXd& P() const { return p_matrix_; }
    const Eigen::VectorXd& p() const { return p_stat_; }
    double lambda() const { return lambda_; }
    double pressure() const { return pressure_; }
    double theta3() const { return theta3_; }

    int first_symbol(int state) const { return blocks_[static_cast<std::size_t>(state)].front(); }

    // Total stationary mass of states whose block starts with the given
    // (shorter-than-block) prefix; used for cylinders pinning fewer symbols
    // than one block covers.
    double prefix_mass(const Word& prefix) const;

private:
    TransitionMatrix base_;
    Potential phi_;
    std::vector<Word> blocks_;
    std::map<Word, int> block_index_;
    std::map<Word, double> prefix_mass_;
    Eigen::MatrixXd p_matrix_;
    Eigen::VectorXd p_stat_;
    double lambda_ = 1.0;
    double pressure_ = 0.0;
    double theta3_ = 0.0;
};

// Builds the recoded chain and its Perron data. The Perron eigenvector pair
// comes from deterministic power iteration (all-ones start, componentwise
// residual at 1e-14 relative, 1e6 iteration cap); theta3 from a dense
// eigensolve of P. Rejects potentials whose weights overflow exp and recoded
// alphabets beyond 4096 states.
MarkovGibbs build_markov_gibbs(const TransitionMatrix& a, const Potential& phi);

// P^gap by repeated squaring.
Eigen::MatrixXd transition_power(const MarkovGibbs& g, std::int64_t gap);

// Measure of one cylinder.
double cylinder_measure(const MarkovGibbs& g, const Cylinder& c);

// Measure of the intersection of two cylinders (zero when inconsistent,
// bridged by transition-matrix powers across a gap).
double joint_measure(const MarkovGibbs& g, const Cylinder& c1, const Cylinder& c2);

// mu(C1 ∩ sigma^t C2) without materializing the shifted cylinder.
double joint_measure_at_lag(const MarkovGibbs& g, const Cylinder& c1, const Cylinder& c2, std::int64_t t);

// Correlation of the time-m and time-n members of a target sequence:
//   R = mu(C_m ∩ sigma^{m-n} C_n) - mu(C_m) mu(C_n),
// the joint measure of "word m seen at time m" and "word n seen at time n"
// minus the independent prediction. Symmetric in (m, n).
struct CorrelationTerm {
    std::int64_t m = 0;
    std::int64_t n = 0;
    double value = 0.0;
};

CorrelationTerm correlation(const MarkovGibbs& g, const Cylinder& cm, const Cylinder& cn,
                            std::int64_t m, std::int64_t n);

// Least-squares fit of log |normalized correlation| against the support gap
// over a family of separated cylinder pairs. theta3_emp should not exceed
// theta3 by more than a small fit slack; c3_envelope is the smallest constant
// making c * theta3_emp^gap dominate every sampled point.
struct MixingFit {
    bool exact_independence = false;  // every sampled correlation was zero
    double theta3_emp = 0.0;
    double c3 = 0.0;
    double c3_envelope = 0.0;
    int points_used = 0;
};

MixingFit mixing_rate_check(const MarkovGibbs& g,
                            const std::vector<std::pair<Cylinder, Cylinder>>& pairs);

}  // namespace gbc
