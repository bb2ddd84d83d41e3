#include "bms/frequency_model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "bms/errors.hpp"

namespace bms {

ResidualLaw::ResidualLaw(double dispersion) : psi_(dispersion) {
    if (!(dispersion > 0.0) || !std::isfinite(dispersion)) {
        throw ConfigError("psi", "dispersion must be a positive finite number");
    }
}

double ResidualLaw::moment(int k) const {
    if (k < 0) throw std::invalid_argument("moment order must be non-negative");
    // Gamma(a, a): E[Theta^k] = prod_{i<k} (a + i) / a = prod_{i<k} (1 + i psi)
    double m = 1.0;
    for (int i = 1; i < k; ++i) m *= 1.0 + i * psi_;
    return m;
}

double ResidualLaw::density(double theta) const {
    if (theta <= 0.0) return 0.0;
    const double a = shape();
    return std::exp(a * std::log(a) + (a - 1.0) * std::log(theta) - a * theta - std::lgamma(a));
}

Portfolio::Portfolio(std::vector<RateClass> classes, ResidualLaw residual)
    : classes_(std::move(classes)), residual_(residual) {
    if (classes_.empty()) throw ConfigError("classes", "at least one rate class is required");
    double total = 0.0;
    for (std::size_t k = 0; k < classes_.size(); ++k) {
        const auto& c = classes_[k];
        const std::string where = "classes[" + std::to_string(k) + "]";
        if (!(c.lambda > 0.0) || !std::isfinite(c.lambda)) {
            throw ConfigError(where + ".lambda", "a-priori rate must be positive");
        }
        if (!(c.weight > 0.0) || c.weight > 1.0) {
            throw ConfigError(where + ".weight", "weight must lie in (0, 1]");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ConfigError("classes.weight",
                          "class weights sum to " + std::to_string(total) + ", expected 1");
    }
}

double Portfolio::mean_rate() const {
    double m = 0.0;
    for (const auto& c : classes_) m += c.weight * c.lambda;
    return m;
}

double Portfolio::rate_variance() const {
    const double m = mean_rate();
    double v = 0.0;
    for (const auto& c : classes_) v += c.weight * (c.lambda - m) * (c.lambda - m);
    return v;
}

double QuadratureRule::moment(int k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) s += weights[j] * std::pow(nodes[j], k);
    return s;
}

QuadratureRule build_gamma_quadrature(const ResidualLaw& residual, int node_count) {
    if (node_count < 2) throw ConfigError("quadrature_nodes", "need at least 2 nodes");

    // Jacobi matrix of the generalized Laguerre weight x^alpha e^{-x}.
    const double alpha = residual.shape() - 1.0;
    Eigen::VectorXd diag(node_count);
    Eigen::VectorXd sub(node_count - 1);
    for (int i = 0; i < node_count; ++i) diag(i) = 2.0 * i + alpha + 1.0;
    for (int i = 1; i < node_count; ++i) sub(i - 1) = std::sqrt(i * (i + alpha));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericError("Golub-Welsch eigen-decomposition failed");
    }

    QuadratureRule rule;
    rule.nodes.resize(node_count);
    rule.weights.resize(node_count);
    for (int j = 0; j < node_count; ++j) {
        const double v0 = solver.eigenvectors()(0, j);
        // x ~ Gamma(a, 1) maps to theta = x * psi ~ Gamma(a, rate 1/psi).
        rule.nodes[j] = solver.eigenvalues()(j) * residual.scale();
        rule.weights[j] = v0 * v0;
    }
    const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (double& w : rule.weights) w /= total;
    return rule;
}

double poisson_pmf(double mean, int n) {
    if (!(mean > 0.0)) throw std::invalid_argument("poisson_pmf: mean must be positive");
    if (n < 0) throw std::invalid_argument("poisson_pmf: count must be non-negative");
    if (n == 0) return std::exp(-mean);
    return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

double count_upper_tail(const CountPmf& pmf, double mean, int n) {
    if (n <= 0) return 1.0;
    double lower = 0.0;
    for (int i = 0; i < n; ++i) lower += pmf(mean, i);
    if (lower < 0.5) return std::max(0.0, 1.0 - lower);

    constexpr int kMaxTerms = 1'000'000;
    double tail = 0.0;
    for (int i = n; i < n + kMaxTerms; ++i) {
        const double term = pmf(mean, i);
        tail += term;
        if (i > mean && term <= tail * 1e-17) return tail;
    }
    throw NumericError("count_upper_tail: tail sum did not settle");
}

} // namespace bms
