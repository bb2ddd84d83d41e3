#pragma once

// Premium schemes M(k, l) = xi(lambda_k) * gamma(., l): the no-posterior base
// (PNO), the classical shared table with fixed a-priori rates (PPOS), the
// jointly optimised shared table (PFOS), and per-class tables (POI).

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bms/errors.hpp"
#include "bms/frequency_model.hpp"
#include "bms/markov_chain.hpp"

namespace bms {

class IndividualizedScheme;

// One relativity table shared by every class.
class SharedScheme {
public:
    SharedScheme(Eigen::VectorXd xi, Eigen::VectorXd gamma);

    const Eigen::VectorXd& xi() const noexcept { return xi_; }
    const Eigen::VectorXd& gamma() const noexcept { return gamma_; }
    int classes() const noexcept { return static_cast<int>(xi_.size()); }
    int levels() const noexcept { return static_cast<int>(gamma_.size()); }

    // 1-based class and level.
    double premium(int risk_class, int level) const { return xi_(risk_class - 1) * gamma_(level - 1); }

    // The same premiums written as a K x z table with identical rows.
    IndividualizedScheme expanded() const;

    // (xi / c, c gamma): premiums unchanged.
    SharedScheme rescaled(double c) const;

private:
    Eigen::VectorXd xi_;
    Eigen::VectorXd gamma_;
};

// One relativity table per class (K x z).
class IndividualizedScheme {
public:
    IndividualizedScheme(Eigen::VectorXd xi, Eigen::MatrixXd gamma);

    const Eigen::VectorXd& xi() const noexcept { return xi_; }
    const Eigen::MatrixXd& gamma() const noexcept { return gamma_; }
    int classes() const noexcept { return static_cast<int>(xi_.size()); }
    int levels() const noexcept { return static_cast<int>(gamma_.cols()); }

    double premium(int risk_class, int level) const {
        return xi_(risk_class - 1) * gamma_(risk_class - 1, level - 1);
    }
    Eigen::MatrixXd premium_matrix() const { return xi_.asDiagonal() * gamma_; }

private:
    Eigen::VectorXd xi_;
    Eigen::MatrixXd gamma_;
};

SharedScheme pno(const Portfolio& portfolio, int levels);

// gamma(l) = E[Lambda^2 Theta | L = l] / E[Lambda^2 | L = l], xi = lambda.
SharedScheme ppos(const MixedLevelMoments& moments, const Portfolio& portfolio);

// gamma(k, l) = E[Theta | Lambda = lambda_k, L = l], xi = lambda.
IndividualizedScheme poi(const MixedLevelMoments& moments, const Portfolio& portfolio);

// Pure-relativity reading of a shared scheme: xi* = lambda and
// gamma*(k, l) = xi(k) gamma(l) / lambda_k.
IndividualizedScheme pure_relativity_view(const SharedScheme& scheme, const Portfolio& portfolio);

// xi(k) = lambda_k / E[gamma(L) | Lambda = lambda_k]; the result is unbiased
// per class for any positive table.
SharedScheme debias_priori(const Eigen::VectorXd& gamma, const Portfolio& portfolio,
                           const MixedLevelMoments& moments);

// Poisson-gamma posterior mean of N_{t+1} after `total_claims` claims in
// `years` years. `risk_class` is 1-based.
double bayesian_posterior_mean(const Portfolio& portfolio, int risk_class, double years,
                               double total_claims);

// ---------------------------------------------------------------------------
// Full optimisation of the shared table (coordinate descent)
// ---------------------------------------------------------------------------

enum class DescentStart {
    NoPosterior,      // (gamma, xi) = (1, lambda)
    PartialOptimum,   // (gamma, xi) = (PPOS gamma, lambda)
};

struct PfosOptions {
    std::optional<double> q;  // gamma(floor(z/2)) after normalisation; default PPOS value
    DescentStart start = DescentStart::NoPosterior;
    double tolerance = 1e-10;  // relative HMSE decrease over one full cycle
    int max_cycles = 500;
};

struct TraceStep {
    int gamma_iter = 0;
    int xi_iter = 0;
    Eigen::VectorXd xi;
    Eigen::VectorXd gamma;
    double hmse = 0.0;
    std::optional<double> fix;

    std::string label() const;  // "(gamma^m, xi^n)"
};

using DescentTrace = std::vector<TraceStep>;

struct PfosResult {
    SharedScheme scheme;
    DescentTrace trace;
    int cycles = 0;
    double q = 0.0;
};

class NonConvergenceError : public NumericError {
public:
    NonConvergenceError(const std::string& what, DescentTrace trace)
        : NumericError(what), trace_(std::move(trace)) {}
    const DescentTrace& trace() const noexcept { return trace_; }

private:
    DescentTrace trace_;
};

PfosResult pfos(const MixedLevelMoments& moments, const Portfolio& portfolio,
                const PfosOptions& options = {});

} // namespace bms
