#pragma once

// Monte-Carlo portfolio simulator. It shares no code path with the analytic
// kernel beyond the scheme's premium table, so it serves as an independent
// check of the level law, conditional means, FIX and HMSE.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bms/frequency_model.hpp"
#include "bms/markov_chain.hpp"
#include "bms/premium_schemes.hpp"

namespace bms {

struct StartingLevel {
    enum class Policy { Best, Worst, Fixed };
    Policy policy = Policy::Best;
    int level = 1;  // used by Policy::Fixed

    int resolve(int levels) const;
};

struct SimConfig {
    long policyholders = 100'000;
    int burn_in_years = 200;
    int sample_years = 10;
    std::uint64_t seed = 42;
    StartingLevel start;
    int threads = 1;    // 0: hardware concurrency
    int batches = 20;   // batch-means groups for ratio estimators (FIX, alt fairness)

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;

    // (value - reference) / std_error; 0 when both coincide exactly.
    double z_score(double reference) const;
};

struct SimResult {
    std::vector<long> class_counts;
    Eigen::MatrixXd class_level_law;     // K x z, rows sum to 1
    Eigen::MatrixXd class_level_law_se;
    Eigen::VectorXd level_law;           // marginal, sums to 1
    Eigen::VectorXd level_law_se;
    std::vector<Estimate> relativity_means;       // E[gamma(k, L) | Lambda = lambda_k]
    std::vector<Estimate> pure_relativity_means;  // E[M / Lambda | Lambda = lambda_k]
    Estimate fix;
    Estimate hmse;
    Estimate alt_fairness;  // Var(E[Lambda | L]) / Var(Lambda); 0 with one class
};

// Each policyholder: class ~ w, theta ~ Gamma(1/psi, 1/psi), start level per
// config, burn_in_years of -1/+h transitions under Poisson(lambda theta)
// yearly claims, then sample_years recorded levels. Deterministic for a fixed
// seed regardless of thread count.
SimResult simulate(const Portfolio& portfolio, const TransitionRule& rule,
                   const IndividualizedScheme& scheme, const SimConfig& config);

inline SimResult simulate(const Portfolio& portfolio, const TransitionRule& rule,
                          const SharedScheme& scheme, const SimConfig& config) {
    return simulate(portfolio, rule, scheme.expanded(), config);
}

// FIX of the Poisson-gamma Bayesian premium after `years` years of history.
Estimate simulate_bayesian_fix(const Portfolio& portfolio, double years, long policyholders,
                               std::uint64_t seed, int batches = 20);

} // namespace bms
