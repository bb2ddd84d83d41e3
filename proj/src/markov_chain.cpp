#include "bms/markov_chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "bms/errors.hpp"

namespace bms {

TransitionRule::TransitionRule(int levels, int penalty) : levels_(levels), penalty_(penalty) {
    if (levels < 2) throw ConfigError("rule.levels", "need at least 2 BM levels");
    if (penalty < 1) throw ConfigError("rule.penalty", "penalty step must be at least 1");
}

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd p) : p_(std::move(p)) {
    if (p_.rows() != p_.cols() || p_.rows() < 2) {
        throw std::invalid_argument("transition matrix must be square with at least 2 levels");
    }
    if ((p_.array() < 0.0).any() || !p_.allFinite()) {
        throw std::invalid_argument("transition matrix has negative or non-finite entries");
    }
    for (Eigen::Index i = 0; i < p_.rows(); ++i) {
        if (std::abs(p_.row(i).sum() - 1.0) > 1e-12) {
            throw std::invalid_argument("transition matrix row " + std::to_string(i + 1) +
                                        " does not sum to 1");
        }
    }
}

bool TransitionMatrix::skip_free_downward() const {
    for (Eigen::Index i = 2; i < p_.rows(); ++i) {
        for (Eigen::Index j = 0; j + 1 < i; ++j) {
            if (p_(i, j) != 0.0) return false;
        }
    }
    return true;
}

TransitionMatrix build_transition_matrix(double mean_frequency, const TransitionRule& rule,
                                         const CountPmf& pmf) {
    if (!(mean_frequency > 0.0) || !std::isfinite(mean_frequency)) {
        throw std::invalid_argument("build_transition_matrix: mean frequency must be positive");
    }
    const int z = rule.levels();
    const int h = rule.penalty();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(z, z);
    for (int from = 0; from < z; ++from) {
        p(from, std::max(0, from - 1)) += pmf(mean_frequency, 0);
        int n = 1;
        for (; from + n * h < z - 1; ++n) p(from, from + n * h) += pmf(mean_frequency, n);
        p(from, z - 1) += count_upper_tail(pmf, mean_frequency, n);
        p.row(from) /= p.row(from).sum();
    }
    return TransitionMatrix(std::move(p));
}

double StationaryVector::residual(const TransitionMatrix& p) const {
    const Eigen::RowVectorXd next = pi_.transpose() * p.matrix();
    return (next - pi_.transpose()).cwiseAbs().maxCoeff();
}

namespace {

// Skip-free chains balance probability flow across every cut {<= k} | {> k}:
//   pi_{k+1} P(k+1 -> k) = sum_{j <= k} pi_j P(j -> > k).
// All terms are non-negative, so tiny masses keep full relative precision.
bool solve_by_cut_balance(const Eigen::MatrixXd& p, Eigen::VectorXd& pi) {
    const Eigen::Index z = p.rows();
    // above(j, k) = sum_{m > k} P(j, m)
    Eigen::MatrixXd above = Eigen::MatrixXd::Zero(z, z);
    for (Eigen::Index j = 0; j < z; ++j) {
        for (Eigen::Index k = z - 2; k >= 0; --k) above(j, k) = above(j, k + 1) + p(j, k + 1);
    }
    pi = Eigen::VectorXd::Zero(z);
    pi(0) = 1.0;
    for (Eigen::Index k = 0; k + 1 < z; ++k) {
        const double down = p(k + 1, k);
        if (down < 1e-290) return false;
        double flow = 0.0;
        for (Eigen::Index j = 0; j <= k; ++j) flow += pi(j) * above(j, k);
        pi(k + 1) = flow / down;
        if (pi(k + 1) > 1.0) pi.head(k + 2) /= pi(k + 1);
    }
    pi /= pi.sum();
    return pi.allFinite();
}

bool solve_by_lu(const Eigen::MatrixXd& p, Eigen::VectorXd& pi) {
    const Eigen::Index z = p.rows();
    Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(z, z);
    a.row(z - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(z);
    b(z - 1) = 1.0;
    pi = a.partialPivLu().solve(b);
    if (!pi.allFinite()) return false;
    pi = pi.cwiseMax(0.0);
    const double total = pi.sum();
    if (!(total > 0.0)) return false;
    pi /= total;
    return true;
}

void solve_by_power_iteration(const Eigen::MatrixXd& p, Eigen::VectorXd& pi) {
    constexpr long kMaxIterations = 1'000'000;
    const Eigen::Index z = p.rows();
    Eigen::RowVectorXd cur = Eigen::RowVectorXd::Constant(z, 1.0 / static_cast<double>(z));
    for (long it = 0; it < kMaxIterations; ++it) {
        Eigen::RowVectorXd next = cur * p;
        next /= next.sum();
        const double delta = (next - cur).cwiseAbs().maxCoeff();
        cur = next;
        if (delta < 1e-12) break;
    }
    pi = cur.transpose();
}

} // namespace

StationaryVector stationary_distribution(const TransitionMatrix& p, StationarySolver solver) {
    const Eigen::MatrixXd& m = p.matrix();
    Eigen::VectorXd pi;
    auto accept = [&](bool ok) {
        return ok && StationaryVector(pi).residual(p) <= kStationaryTolerance;
    };

    bool done = false;
    switch (solver) {
    case StationarySolver::Auto:
        done = (p.skip_free_downward() && accept(solve_by_cut_balance(m, pi))) ||
               accept(solve_by_lu(m, pi));
        break;
    case StationarySolver::DirectLu:
        done = accept(solve_by_lu(m, pi));
        break;
    case StationarySolver::PowerIteration:
        break;
    }
    if (!done) {
        solve_by_power_iteration(m, pi);
        if (!accept(true)) {
            std::ostringstream msg;
            msg << "stationary distribution did not converge (residual "
                << StationaryVector(pi).residual(p) << ")";
            throw NumericError(msg.str());
        }
    }
    return StationaryVector(std::move(pi));
}

MixedLevelMoments mixed_level_moments(const Portfolio& portfolio, const TransitionRule& rule,
                                      const QuadratureRule& quadrature, const CountPmf& pmf) {
    const auto classes = static_cast<Eigen::Index>(portfolio.size());
    const Eigen::Index z = rule.levels();
    MixedLevelMoments out{Eigen::MatrixXd::Zero(classes, z), Eigen::MatrixXd::Zero(classes, z),
                          Eigen::MatrixXd::Zero(classes, z)};

    for (Eigen::Index k = 0; k < classes; ++k) {
        const double lambda = portfolio.at(k).lambda;
        for (std::size_t j = 0; j < quadrature.size(); ++j) {
            const double theta = quadrature.nodes[j];
            const double u = quadrature.weights[j];
            Eigen::VectorXd pi;
            try {
                pi = stationary_distribution(build_transition_matrix(lambda * theta, rule, pmf)).vector();
            } catch (const std::exception& e) {
                throw NumericError("class " + std::to_string(k + 1) + ", quadrature node " +
                                   std::to_string(j + 1) + ": " + e.what());
            }
            out.m0.row(k) += u * pi.transpose();
            out.m1.row(k) += (u * theta) * pi.transpose();
            out.m2.row(k) += (u * theta * theta) * pi.transpose();
        }
    }
    return out;
}

LevelLaw level_law(const MixedLevelMoments& moments, const Portfolio& portfolio) {
    LevelLaw law;
    law.conditional = moments.m0;
    law.marginal = Eigen::VectorXd::Zero(moments.levels());
    for (int k = 0; k < moments.classes(); ++k) {
        law.marginal += portfolio.at(k).weight * moments.m0.row(k).transpose();
    }
    return law;
}

} // namespace bms
