#pragma once

// Slow, independent reference computations for tests. Nothing here calls the
// library: transition rows come from a plain pmf recurrence, stationary laws
// from Gaussian elimination in long double, and theta integrals from Simpson's
// rule on a fine grid rather than Gauss-Laguerre.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = std::vector<long double>;
using Mat = std::vector<Vec>;

inline Vec poisson_row(long double mean, int count) {
    Vec p(count);
    p[0] = std::exp(-mean);
    for (int n = 1; n < count; ++n) p[n] = p[n - 1] * mean / n;
    return p;
}

// Row l (1-based) of the -1/+h matrix; claims counted until the term is negligible.
inline Mat transition(long double mu, int z, int h) {
    const int reach = static_cast<int>(mu + 40.0L * std::sqrt(mu + 1.0L) + 60.0L);
    const Vec p = poisson_row(mu, reach);
    Mat P(z, Vec(z, 0.0L));
    for (int l = 1; l <= z; ++l) {
        P[l - 1][std::max(1, l - 1) - 1] += p[0];
        long double tail = 0.0L;
        for (int n = reach - 1; n >= 1; --n) {
            const long long to = static_cast<long long>(l) + static_cast<long long>(n) * h;
            if (to >= z) {
                tail += p[n];
            } else {
                P[l - 1][to - 1] += p[n];
            }
        }
        P[l - 1][z - 1] += tail;
    }
    return P;
}

// Solves pi (P - I) = 0 with sum(pi) = 1 replacing the last equation.
inline Vec stationary(const Mat& P) {
    const int z = static_cast<int>(P.size());
    Mat A(z, Vec(z + 1, 0.0L));
    for (int i = 0; i < z; ++i) {
        for (int j = 0; j < z; ++j) A[i][j] = P[j][i] - (i == j ? 1.0L : 0.0L);
    }
    for (int j = 0; j < z; ++j) A[z - 1][j] = 1.0L;
    A[z - 1][z] = 1.0L;
    for (int c = 0; c < z; ++c) {
        int piv = c;
        for (int r = c + 1; r < z; ++r) {
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        }
        std::swap(A[c], A[piv]);
        if (A[c][c] == 0.0L) throw std::runtime_error("oracle: singular system");
        for (int r = 0; r < z; ++r) {
            if (r == c) continue;
            const long double f = A[r][c] / A[c][c];
            for (int j = c; j <= z; ++j) A[r][j] -= f * A[c][j];
        }
    }
    Vec pi(z);
    for (int i = 0; i < z; ++i) pi[i] = A[i][z] / A[i][i];
    return pi;
}

inline Vec stationary(long double mu, int z, int h) { return stationary(transition(mu, z, h)); }

// Simpson nodes and weights for E[f(Theta)], Theta ~ Gamma(1/psi, 1/psi). The
// density behaves like theta^(a-1) at 0, so the grid is uniform in s with
// theta = s^m, m chosen so that a m >= 5 and the integrand is smooth enough
// for Simpson's rule.
struct Grid {
    Vec theta, weight;
};

inline Grid gamma_grid(long double psi, int steps = 4000) {
    const long double a = 1.0L / psi;
    const long double log_c = a * std::log(a) - std::lgamma(a);
    const long double top = 60.0L * psi + 40.0L * std::sqrt(psi) + 5.0L;
    if (steps % 2) ++steps;
    const int m = std::max(1, static_cast<int>(std::ceil(5.0L / a)));
    const long double hi = std::pow(top, 1.0L / m);
    const long double ds = hi / steps;
    Grid g;
    for (int i = 1; i <= steps; ++i) {  // the s = 0 end carries no weight
        const long double simpson = (i == steps ? 1.0L : (i % 2 ? 4.0L : 2.0L)) * ds / 3.0L;
        const long double s = i * ds;
        const long double t = std::pow(s, static_cast<long double>(m));
        const long double log_w = log_c + (a - 1.0L) * std::log(t) - a * t + std::log(static_cast<long double>(m)) +
                                  (m - 1) * std::log(s);
        g.theta.push_back(t);
        g.weight.push_back(simpson * std::exp(log_w));
    }
    return g;
}

inline long double gamma_expectation(long double psi, const std::function<long double(long double)>& f,
                                     int steps = 4000) {
    const Grid g = gamma_grid(psi, steps);
    long double s = 0.0L;
    for (std::size_t i = 0; i < g.theta.size(); ++i) {
        if (g.weight[i] != 0.0L) s += g.weight[i] * f(g.theta[i]);
    }
    return s;
}

inline Vec stationary_or_best(long double mu, int z, int h) {
    if (mu > 0.0L) return stationary(mu, z, h);
    Vec e(z, 0.0L);
    e[0] = 1.0L;
    return e;
}

struct Moments {
    Mat m0, m1, m2;  // K x z
};

inline Moments moments(const std::vector<double>& lambdas, double psi, int z, int h, int steps = 4000) {
    const Grid g = gamma_grid(psi, steps);
    Moments m;
    for (double lambda : lambdas) {
        Vec r0(z, 0.0L), r1(z, 0.0L), r2(z, 0.0L);
        for (std::size_t i = 0; i < g.theta.size(); ++i) {
            if (g.weight[i] == 0.0L) continue;
            const long double t = g.theta[i];
            const Vec pi = stationary_or_best(lambda * t, z, h);
            for (int l = 0; l < z; ++l) {
                r0[l] += g.weight[i] * pi[l];
                r1[l] += g.weight[i] * t * pi[l];
                r2[l] += g.weight[i] * t * t * pi[l];
            }
        }
        m.m0.push_back(r0);
        m.m1.push_back(r1);
        m.m2.push_back(r2);
    }
    return m;
}

// E[(Lambda Theta - M(k, L))^2] integrated directly over theta.
inline long double hmse(const std::vector<double>& lambdas, const std::vector<double>& weights, double psi,
                        int z, int h, const std::function<double(int, int)>& premium, int steps = 2000) {
    long double total = 0.0L;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        total += weights[k] * gamma_expectation(psi, [&](long double t) {
            const Vec pi = stationary_or_best(lambdas[k] * t, z, h);
            long double s = 0.0L;
            for (int l = 0; l < z; ++l) {
                const long double e = lambdas[k] * t - premium(static_cast<int>(k), l);
                s += pi[l] * e * e;
            }
            return s;
        }, steps);
    }
    return total;
}

// FIX of a K x z premium table from a moment set: between / total variance of M / lambda.
inline long double fix(const std::vector<double>& lambdas, const std::vector<double>& weights,
                       const Mat& m0, const std::function<double(int, int)>& premium) {
    const int z = static_cast<int>(m0[0].size());
    long double mean = 0.0L, second = 0.0L, between = 0.0L;
    std::vector<long double> cond(lambdas.size());
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        for (int l = 0; l < z; ++l) {
            const long double r = premium(static_cast<int>(k), l) / lambdas[k];
            cond[k] += r * m0[k][l];
            second += weights[k] * r * r * m0[k][l];
        }
        mean += weights[k] * cond[k];
    }
    for (std::size_t k = 0; k < lambdas.size(); ++k) between += weights[k] * (cond[k] - mean) * (cond[k] - mean);
    return between / (second - mean * mean);
}

} // namespace oracle
