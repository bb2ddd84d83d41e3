#pragma once

// Fairness (FIX) and prediction (HMSE) metrics for a premium scheme. Every
// expectation is an exact sum over (class, level) of the quadrature-resolved
// level moments; nothing here samples.

#include <optional>

#include <Eigen/Dense>

#include "bms/markov_chain.hpp"
#include "bms/premium_schemes.hpp"

namespace bms {

// Below this total pure-relativity variance FIX is undefined.
constexpr double kFixDegenerateVariance = 1e-14;

// Var(E[M/Lambda | Lambda]) and E[Var(M/Lambda | Lambda)].
struct VarianceSplit {
    double between = 0.0;
    double within = 0.0;

    double total() const noexcept { return between + within; }
    std::optional<double> fix() const {
        if (total() < kFixDegenerateVariance) return std::nullopt;
        return between / total();
    }
};

struct SchemeMetrics {
    std::optional<double> fix;               // nullopt: pure relativity has no variance
    double hmse = 0.0;
    VarianceSplit split;
    Eigen::VectorXd relativity_means;        // E[gamma(k, L) | Lambda = lambda_k]
    Eigen::VectorXd pure_relativity_means;   // E[M / Lambda | Lambda = lambda_k]
    Eigen::VectorXd premium_means;           // E[M | Lambda = lambda_k]
    double overall_pure_mean = 0.0;          // E[M / Lambda]
};

// E[(Lambda Theta - M(Lambda, L))^2]
double hmse(const IndividualizedScheme& scheme, const MixedLevelMoments& moments,
            const Portfolio& portfolio);

VarianceSplit pure_relativity_split(const IndividualizedScheme& scheme,
                                    const MixedLevelMoments& moments, const Portfolio& portfolio);

std::optional<double> fix(const IndividualizedScheme& scheme, const MixedLevelMoments& moments,
                          const Portfolio& portfolio);

// Mean of the scheme's own relativity table per class. For schemes with
// xi = lambda this is also E[M / Lambda | Lambda].
Eigen::VectorXd conditional_relativity_means(const IndividualizedScheme& scheme,
                                             const MixedLevelMoments& moments);

Eigen::VectorXd conditional_pure_relativity_means(const IndividualizedScheme& scheme,
                                                  const MixedLevelMoments& moments,
                                                  const Portfolio& portfolio);

Eigen::VectorXd conditional_premium_means(const IndividualizedScheme& scheme,
                                          const MixedLevelMoments& moments);

// Var(E[Lambda | L]) / Var(Lambda). Depends on the chain only, not on any
// relativity table. Needs at least two classes with distinct rates.
double alt_fairness_measure(const MixedLevelMoments& moments, const Portfolio& portfolio);

SchemeMetrics evaluate(const IndividualizedScheme& scheme, const MixedLevelMoments& moments,
                       const Portfolio& portfolio);

inline double hmse(const SharedScheme& s, const MixedLevelMoments& m, const Portfolio& p) {
    return hmse(s.expanded(), m, p);
}
inline std::optional<double> fix(const SharedScheme& s, const MixedLevelMoments& m,
                                 const Portfolio& p) {
    return fix(s.expanded(), m, p);
}
inline Eigen::VectorXd conditional_relativity_means(const SharedScheme& s,
                                                    const MixedLevelMoments& m) {
    return m.m0 * s.gamma();
}
inline Eigen::VectorXd conditional_premium_means(const SharedScheme& s,
                                                 const MixedLevelMoments& m) {
    return conditional_premium_means(s.expanded(), m);
}
inline SchemeMetrics evaluate(const SharedScheme& s, const MixedLevelMoments& m,
                              const Portfolio& p) {
    return evaluate(s.expanded(), m, p);
}

} // namespace bms
