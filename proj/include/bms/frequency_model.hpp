#pragma once

// Portfolio description for the frequency random-effects model: discrete
// a-priori rate classes, a mean-one gamma residual effect, and a quadrature
// rule for integrating against the residual density.

#include <functional>
#include <vector>

namespace bms {

struct RateClass {
    double lambda = 0.0;  // expected annual claim count
    double weight = 0.0;  // P(Lambda = lambda)
};

// Theta ~ Gamma(shape = 1/psi, rate = 1/psi): E[Theta] = 1, Var[Theta] = psi.
class ResidualLaw {
public:
    explicit ResidualLaw(double dispersion);

    double dispersion() const noexcept { return psi_; }
    double shape() const noexcept { return 1.0 / psi_; }
    double scale() const noexcept { return psi_; }

    // Closed-form raw moment E[Theta^k].
    double moment(int k) const;
    double density(double theta) const;

private:
    double psi_;
};

class Portfolio {
public:
    Portfolio(std::vector<RateClass> classes, ResidualLaw residual);

    const std::vector<RateClass>& classes() const noexcept { return classes_; }
    const RateClass& at(std::size_t k) const { return classes_.at(k); }
    std::size_t size() const noexcept { return classes_.size(); }
    const ResidualLaw& residual() const noexcept { return residual_; }

    double mean_rate() const;
    double rate_variance() const;

private:
    std::vector<RateClass> classes_;
    ResidualLaw residual_;
};

// Discrete measure approximating the residual density: sum_j weights[j] *
// f(nodes[j]) ~ integral f(theta) g(theta) dtheta.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
    double moment(int k) const;
};

constexpr int kDefaultQuadratureNodes = 64;

// Generalized Gauss-Laguerre rule (Golub-Welsch) for the gamma residual law,
// exact for polynomials up to degree 2*node_count - 1.
QuadratureRule build_gamma_quadrature(const ResidualLaw& residual,
                                      int node_count = kDefaultQuadratureNodes);

// Per-year claim-count law, parameterised by its mean.
using CountPmf = std::function<double(double mean, int n)>;

// e^{-mean} mean^n / n!, evaluated in log space.
double poisson_pmf(double mean, int n);

// P(N >= n) for a count law with the given pmf, summed upward from n so that
// tiny tails keep full relative precision.
double count_upper_tail(const CountPmf& pmf, double mean, int n);

} // namespace bms
