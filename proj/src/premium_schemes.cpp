#include "bms/premium_schemes.hpp"

#include <cmath>
#include <stdexcept>

namespace bms {

namespace {

void require_positive(const Eigen::MatrixXd& m, const char* what) {
    if (m.size() == 0 || !m.allFinite() || (m.array() <= 0.0).any()) {
        throw std::invalid_argument(std::string(what) + " must be finite and strictly positive");
    }
}

void require_matching(const MixedLevelMoments& moments, const Portfolio& portfolio) {
    if (moments.classes() != static_cast<int>(portfolio.size())) {
        throw std::invalid_argument("moments were computed for a different portfolio");
    }
}

Eigen::VectorXd lambdas(const Portfolio& portfolio) {
    Eigen::VectorXd v(portfolio.size());
    for (std::size_t k = 0; k < portfolio.size(); ++k) v(k) = portfolio.at(k).lambda;
    return v;
}

} // namespace

SharedScheme::SharedScheme(Eigen::VectorXd xi, Eigen::VectorXd gamma)
    : xi_(std::move(xi)), gamma_(std::move(gamma)) {
    require_positive(xi_, "a-priori rates");
    require_positive(gamma_, "relativities");
}

IndividualizedScheme SharedScheme::expanded() const {
    return IndividualizedScheme(xi_, gamma_.transpose().replicate(xi_.size(), 1));
}

SharedScheme SharedScheme::rescaled(double c) const {
    return SharedScheme(xi_ / c, c * gamma_);
}

IndividualizedScheme::IndividualizedScheme(Eigen::VectorXd xi, Eigen::MatrixXd gamma)
    : xi_(std::move(xi)), gamma_(std::move(gamma)) {
    if (gamma_.rows() != xi_.size()) {
        throw std::invalid_argument("relativity table needs one row per class");
    }
    require_positive(xi_, "a-priori rates");
    require_positive(gamma_, "relativities");
}

SharedScheme pno(const Portfolio& portfolio, int levels) {
    return SharedScheme(lambdas(portfolio), Eigen::VectorXd::Ones(levels));
}

SharedScheme ppos(const MixedLevelMoments& moments, const Portfolio& portfolio) {
    require_matching(moments, portfolio);
    const int z = moments.levels();
    Eigen::VectorXd gamma(z);
    for (int l = 0; l < z; ++l) {
        double num = 0.0;
        double den = 0.0;
        for (int k = 0; k < moments.classes(); ++k) {
            const auto& c = portfolio.at(k);
            num += c.weight * c.lambda * c.lambda * moments.m1(k, l);
            den += c.weight * c.lambda * c.lambda * moments.m0(k, l);
        }
        if (!(den > 0.0)) throw UnreachableLevelError(0, l + 1);
        gamma(l) = num / den;
    }
    return SharedScheme(lambdas(portfolio), std::move(gamma));
}

IndividualizedScheme poi(const MixedLevelMoments& moments, const Portfolio& portfolio) {
    require_matching(moments, portfolio);
    Eigen::MatrixXd gamma(moments.classes(), moments.levels());
    for (int k = 0; k < moments.classes(); ++k) {
        for (int l = 0; l < moments.levels(); ++l) {
            if (!(moments.m0(k, l) > 0.0)) throw UnreachableLevelError(k + 1, l + 1);
            gamma(k, l) = moments.m1(k, l) / moments.m0(k, l);
        }
    }
    return IndividualizedScheme(lambdas(portfolio), std::move(gamma));
}

IndividualizedScheme pure_relativity_view(const SharedScheme& scheme, const Portfolio& portfolio) {
    if (scheme.classes() != static_cast<int>(portfolio.size())) {
        throw std::invalid_argument("scheme and portfolio disagree on the class count");
    }
    const Eigen::VectorXd lambda = lambdas(portfolio);
    const Eigen::VectorXd factor = scheme.xi().cwiseQuotient(lambda);
    return IndividualizedScheme(lambda, factor * scheme.gamma().transpose());
}

SharedScheme debias_priori(const Eigen::VectorXd& gamma, const Portfolio& portfolio,
                           const MixedLevelMoments& moments) {
    require_matching(moments, portfolio);
    require_positive(gamma, "relativities");
    if (gamma.size() != moments.levels()) {
        throw std::invalid_argument("relativity table length differs from the level count");
    }
    const Eigen::VectorXd mean_relativity = moments.m0 * gamma;
    return SharedScheme(lambdas(portfolio).cwiseQuotient(mean_relativity), gamma);
}

double bayesian_posterior_mean(const Portfolio& portfolio, int risk_class, double years,
                               double total_claims) {
    if (years < 0.0 || total_claims < 0.0) {
        throw std::invalid_argument("years and claim count must be non-negative");
    }
    const double lambda = portfolio.at(static_cast<std::size_t>(risk_class - 1)).lambda;
    const double a = portfolio.residual().shape();
    return lambda * (a + total_claims) / (a + years * lambda);
}

} // namespace bms
