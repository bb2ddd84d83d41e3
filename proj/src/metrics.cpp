#include "bms/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace bms {

namespace {

void require_shapes(const IndividualizedScheme& scheme, const MixedLevelMoments& moments) {
    if (scheme.classes() != moments.classes() || scheme.levels() != moments.levels()) {
        throw std::invalid_argument("scheme shape does not match the level moments");
    }
}

// r(k, l) = M(k, l) / lambda_k
Eigen::MatrixXd pure_relativity(const IndividualizedScheme& scheme, const Portfolio& portfolio) {
    Eigen::MatrixXd r = scheme.premium_matrix();
    for (int k = 0; k < scheme.classes(); ++k) r.row(k) /= portfolio.at(k).lambda;
    return r;
}

} // namespace

double hmse(const IndividualizedScheme& scheme, const MixedLevelMoments& moments,
            const Portfolio& portfolio) {
    require_shapes(scheme, moments);
    const Eigen::MatrixXd premium = scheme.premium_matrix();
    double total = 0.0;
    for (int k = 0; k < moments.classes(); ++k) {
        const double lambda = portfolio.at(k).lambda;
        double per_class = 0.0;
        for (int l = 0; l < moments.levels(); ++l) {
            const double m = premium(k, l);
            per_class += lambda * lambda * moments.m2(k, l) - 2.0 * lambda * m * moments.m1(k, l) +
                         m * m * moments.m0(k, l);
        }
        total += portfolio.at(k).weight * per_class;
    }
    return std::max(total, 0.0);
}

Eigen::VectorXd conditional_pure_relativity_means(const IndividualizedScheme& scheme,
                                                  const MixedLevelMoments& moments,
                                                  const Portfolio& portfolio) {
    require_shapes(scheme, moments);
    return pure_relativity(scheme, portfolio).cwiseProduct(moments.m0).rowwise().sum();
}

VarianceSplit pure_relativity_split(const IndividualizedScheme& scheme,
                                    const MixedLevelMoments& moments, const Portfolio& portfolio) {
    require_shapes(scheme, moments);
    const Eigen::MatrixXd r = pure_relativity(scheme, portfolio);
    const Eigen::VectorXd class_mean = r.cwiseProduct(moments.m0).rowwise().sum();

    double overall = 0.0;
    for (int k = 0; k < moments.classes(); ++k) overall += portfolio.at(k).weight * class_mean(k);

    VarianceSplit split;
    for (int k = 0; k < moments.classes(); ++k) {
        const double w = portfolio.at(k).weight;
        const double d = class_mean(k) - overall;
        split.between += w * d * d;
        double within = 0.0;
        for (int l = 0; l < moments.levels(); ++l) {
            const double e = r(k, l) - class_mean(k);
            within += e * e * moments.m0(k, l);
        }
        split.within += w * within;
    }
    return split;
}

std::optional<double> fix(const IndividualizedScheme& scheme, const MixedLevelMoments& moments,
                          const Portfolio& portfolio) {
    return pure_relativity_split(scheme, moments, portfolio).fix();
}

Eigen::VectorXd conditional_relativity_means(const IndividualizedScheme& scheme,
                                             const MixedLevelMoments& moments) {
    require_shapes(scheme, moments);
    return scheme.gamma().cwiseProduct(moments.m0).rowwise().sum();
}

Eigen::VectorXd conditional_premium_means(const IndividualizedScheme& scheme,
                                          const MixedLevelMoments& moments) {
    require_shapes(scheme, moments);
    return scheme.premium_matrix().cwiseProduct(moments.m0).rowwise().sum();
}

double alt_fairness_measure(const MixedLevelMoments& moments, const Portfolio& portfolio) {
    if (portfolio.size() < 2) {
        throw std::invalid_argument("alt_fairness_measure needs at least two rate classes");
    }
    const double var_rate = portfolio.rate_variance();
    if (!(var_rate > 0.0)) {
        throw std::invalid_argument("alt_fairness_measure: a-priori rates have zero variance");
    }
    const double mean_rate = portfolio.mean_rate();
    double between = 0.0;
    for (int l = 0; l < moments.levels(); ++l) {
        double mass = 0.0;
        double rate_mass = 0.0;
        for (int k = 0; k < moments.classes(); ++k) {
            const auto& c = portfolio.at(k);
            mass += c.weight * moments.m0(k, l);
            rate_mass += c.weight * c.lambda * moments.m0(k, l);
        }
        if (mass <= 0.0) continue;
        const double d = rate_mass / mass - mean_rate;
        between += mass * d * d;
    }
    return between / var_rate;
}

SchemeMetrics evaluate(const IndividualizedScheme& scheme, const MixedLevelMoments& moments,
                       const Portfolio& portfolio) {
    SchemeMetrics out;
    out.split = pure_relativity_split(scheme, moments, portfolio);
    out.fix = out.split.fix();
    out.hmse = hmse(scheme, moments, portfolio);
    out.relativity_means = conditional_relativity_means(scheme, moments);
    out.pure_relativity_means = conditional_pure_relativity_means(scheme, moments, portfolio);
    out.premium_means = conditional_premium_means(scheme, moments);
    for (int k = 0; k < moments.classes(); ++k) {
        out.overall_pure_mean += portfolio.at(k).weight * out.pure_relativity_means(k);
    }
    return out;
}

} // namespace bms
