#pragma once

// The -1/+h bonus-malus chain: per-profile transition matrices, stationary
// distributions, and the quadrature-resolved level moments that every
// premium scheme and metric reads.
//
// Levels are numbered 1..z in every public accessor; level 1 carries the
// largest bonus. Eigen storage underneath is 0-based.

#include <Eigen/Dense>

#include "bms/frequency_model.hpp"

namespace bms {

class TransitionRule {
public:
    TransitionRule(int levels, int penalty);

    int levels() const noexcept { return levels_; }
    int penalty() const noexcept { return penalty_; }

    // A single claim from level 1 already reaches the top level. Permitted,
    // but usually a mis-specified rule.
    bool saturates() const noexcept { return penalty_ > levels_ - 1; }

    // floor(z / 2), the level pinned by the full-optimization normalisation.
    int midpoint_level() const noexcept { return levels_ / 2; }

private:
    int levels_;
    int penalty_;
};

class TransitionMatrix {
public:
    // Validates row-stochasticity (1e-12) and non-negativity.
    explicit TransitionMatrix(Eigen::MatrixXd p);

    int levels() const noexcept { return static_cast<int>(p_.rows()); }
    double operator()(int from_level, int to_level) const { return p_(from_level - 1, to_level - 1); }
    const Eigen::MatrixXd& matrix() const noexcept { return p_; }

    // Every row only moves down by at most one level.
    bool skip_free_downward() const;

private:
    Eigen::MatrixXd p_;
};

// From level l: zero claims -> max(1, l - 1); n >= 1 claims -> min(z, l + n h).
// The cap collects the whole upper tail of the count law.
TransitionMatrix build_transition_matrix(double mean_frequency, const TransitionRule& rule,
                                         const CountPmf& pmf = poisson_pmf);

class StationaryVector {
public:
    explicit StationaryVector(Eigen::VectorXd pi) : pi_(std::move(pi)) {}

    double operator()(int level) const { return pi_(level - 1); }
    int levels() const noexcept { return static_cast<int>(pi_.size()); }
    const Eigen::VectorXd& vector() const noexcept { return pi_; }

    // max_l |(pi P)_l - pi_l|
    double residual(const TransitionMatrix& p) const;

private:
    Eigen::VectorXd pi_;
};

enum class StationarySolver {
    Auto,            // cut-balance recursion when skip-free, else LU; power iteration fallback
    DirectLu,        // (P^T - I) pi = 0 with one row replaced by the normalisation
    PowerIteration,
};

constexpr double kStationaryTolerance = 1e-10;

StationaryVector stationary_distribution(const TransitionMatrix& p,
                                         StationarySolver solver = StationarySolver::Auto);

// m_a(k, l) = integral theta^a pi_l(lambda_k theta) g(theta) dtheta, a = 0, 1, 2,
// stored as K x z matrices (0-based).
struct MixedLevelMoments {
    Eigen::MatrixXd m0;
    Eigen::MatrixXd m1;
    Eigen::MatrixXd m2;

    int classes() const noexcept { return static_cast<int>(m0.rows()); }
    int levels() const noexcept { return static_cast<int>(m0.cols()); }
};

// One stationary solve per (class, quadrature node).
MixedLevelMoments mixed_level_moments(const Portfolio& portfolio, const TransitionRule& rule,
                                      const QuadratureRule& quadrature,
                                      const CountPmf& pmf = poisson_pmf);

struct LevelLaw {
    Eigen::VectorXd marginal;     // P(L = l)
    Eigen::MatrixXd conditional;  // P(L = l | Lambda = lambda_k), K x z
};

LevelLaw level_law(const MixedLevelMoments& moments, const Portfolio& portfolio);

} // namespace bms
