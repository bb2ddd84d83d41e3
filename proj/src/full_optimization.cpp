#include "bms/premium_schemes.hpp"

#include <cmath>
#include <sstream>

#include "bms/metrics.hpp"

namespace bms {

std::string TraceStep::label() const {
    return "(gamma^" + std::to_string(gamma_iter) + ", xi^" + std::to_string(xi_iter) + ")";
}

namespace {

// Exact minimiser over gamma of E[(Lambda Theta - xi(Lambda) gamma(L))^2] for fixed xi.
Eigen::VectorXd update_relativities(const Eigen::VectorXd& xi, const MixedLevelMoments& moments,
                                    const Portfolio& portfolio) {
    Eigen::VectorXd gamma(moments.levels());
    for (int l = 0; l < moments.levels(); ++l) {
        double num = 0.0;
        double den = 0.0;
        for (int k = 0; k < moments.classes(); ++k) {
            const auto& c = portfolio.at(k);
            num += c.lambda * xi(k) * c.weight * moments.m1(k, l);
            den += xi(k) * xi(k) * c.weight * moments.m0(k, l);
        }
        if (!(den > 0.0)) throw UnreachableLevelError(0, l + 1);
        gamma(l) = num / den;
    }
    return gamma;
}

// Exact minimiser over xi for fixed gamma; classes decouple.
Eigen::VectorXd update_rates(const Eigen::VectorXd& gamma, const MixedLevelMoments& moments,
                             const Portfolio& portfolio) {
    Eigen::VectorXd xi(moments.classes());
    for (int k = 0; k < moments.classes(); ++k) {
        const double num = moments.m1.row(k).dot(gamma);
        const double den = moments.m0.row(k).dot(gamma.cwiseAbs2());
        if (!(den > 0.0)) {
            throw NumericError("class " + std::to_string(k + 1) + " has no stationary mass");
        }
        xi(k) = portfolio.at(k).lambda * num / den;
    }
    return xi;
}

} // namespace

PfosResult pfos(const MixedLevelMoments& moments, const Portfolio& portfolio,
                const PfosOptions& options) {
    if (options.q && !(*options.q > 0.0)) {
        throw ConfigError("pfos.q", "normalisation constant must be positive");
    }
    if (options.max_cycles < 1) throw ConfigError("pfos.max_cycles", "must be at least 1");
    if (!(options.tolerance > 0.0)) throw ConfigError("pfos.tolerance", "must be positive");

    const SharedScheme partial = ppos(moments, portfolio);
    const int mid = TransitionRule(moments.levels(), 1).midpoint_level();
    const double q = options.q.value_or(partial.gamma()(mid - 1));

    Eigen::VectorXd xi = partial.xi();
    Eigen::VectorXd gamma = options.start == DescentStart::PartialOptimum
                                ? partial.gamma()
                                : Eigen::VectorXd::Ones(moments.levels());

    DescentTrace trace;
    auto record = [&](int gamma_iter, int xi_iter) {
        const SharedScheme s(xi, gamma);
        trace.push_back({gamma_iter, xi_iter, xi, gamma, hmse(s, moments, portfolio),
                         fix(s, moments, portfolio)});
        return trace.back().hmse;
    };

    double objective = record(0, 0);
    int cycle = 0;
    bool converged = false;
    while (cycle < options.max_cycles) {
        gamma = update_relativities(xi, moments, portfolio);
        record(cycle + 1, cycle);
        xi = update_rates(gamma, moments, portfolio);
        const double next = record(cycle + 1, cycle + 1);
        ++cycle;
        const double decrease = objective > 0.0 ? (objective - next) / objective : 0.0;
        objective = next;
        if (decrease < options.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "coordinate descent did not reach relative tolerance " << options.tolerance
            << " within " << options.max_cycles << " cycles";
        throw NonConvergenceError(msg.str(), std::move(trace));
    }

    const double c = q / gamma(mid - 1);
    return PfosResult{SharedScheme(xi, gamma).rescaled(c), std::move(trace), cycle, q};
}

} // namespace bms
