#include "bms/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "bms/errors.hpp"
#include "bms/metrics.hpp"
#include "bms/random_stream.hpp"

namespace bms {

int StartingLevel::resolve(int levels) const {
    switch (policy) {
    case Policy::Best: return 1;
    case Policy::Worst: return levels;
    case Policy::Fixed:
        if (level < 1 || level > levels) {
            throw ConfigError("simulation.starting_level", "level outside 1.." + std::to_string(levels));
        }
        return level;
    }
    return 1;
}

void SimConfig::validate() const {
    if (policyholders < 1) throw ConfigError("simulation.policyholders", "must be at least 1");
    if (burn_in_years < 1) throw ConfigError("simulation.burn_in_years", "must be at least 1");
    if (sample_years < 1) throw ConfigError("simulation.sample_years", "must be at least 1");
    if (threads < 0) throw ConfigError("simulation.threads", "must be non-negative");
    if (batches < 2 || batches > policyholders) {
        throw ConfigError("simulation.batches", "need 2..policyholders batches");
    }
}

double Estimate::z_score(double reference) const {
    const double diff = value - reference;
    if (std_error > 0.0) return diff / std_error;
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

namespace {

// Welford accumulator over independent per-policyholder values.
struct Moments {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double std_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    Estimate estimate() const { return {mean, std_error()}; }
};

// Per-group sums for a between-group share of variance. Values are stored
// relative to the first one seen, which keeps sumsq - sum * mean from
// cancelling badly (and exact when X is constant).
struct GroupSums {
    std::vector<double> count, sum, sumsq;
    std::optional<double> shift;

    explicit GroupSums(std::size_t groups) : count(groups), sum(groups), sumsq(groups) {}

    void add(std::size_t g, double x) {
        if (!shift) shift = x;
        x -= *shift;
        count[g] += 1.0;
        sum[g] += x;
        sumsq[g] += x * x;
    }

    // Var(E[X | G]) / Var(X), 0 when X has no variance.
    double between_fraction() const {
        double n = 0.0, s = 0.0;
        for (std::size_t g = 0; g < count.size(); ++g) {
            n += count[g];
            s += sum[g];
        }
        const double mean = s / n;
        double between = 0.0, within = 0.0;
        for (std::size_t g = 0; g < count.size(); ++g) {
            if (count[g] == 0.0) continue;
            const double gm = sum[g] / count[g];
            between += count[g] * (gm - mean) * (gm - mean);
            within += std::max(0.0, sumsq[g] - sum[g] * gm);
        }
        const double total = (between + within) / n;
        return total < kFixDegenerateVariance ? 0.0 : between / n / total;
    }
};

// Point estimate from the full sample, standard error from batch means.
Estimate batched(const GroupSums& full, const std::vector<GroupSums>& batches) {
    Moments spread;
    for (const auto& b : batches) spread.add(b.between_fraction());
    return {full.between_fraction(), spread.std_error()};
}

struct Paths {
    int years = 0;
    std::vector<int> risk_class;
    std::vector<double> theta;
    std::vector<int> levels;  // policyholder-major, `years` entries each
};

template <class Body>
void parallel_for(long count, int threads, Body body) {
    int workers = threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
    workers = std::clamp(workers, 1, static_cast<int>(std::min<long>(count, 256)));
    if (workers == 1) {
        body(0L, count);
        return;
    }
    std::vector<std::thread> pool;
    const long chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long begin = w * chunk;
        const long end = std::min(count, begin + chunk);
        if (begin < end) pool.emplace_back(body, begin, end);
    }
    for (auto& t : pool) t.join();
}

std::vector<double> cumulative_weights(const Portfolio& portfolio) {
    std::vector<double> cum;
    double c = 0.0;
    for (const auto& rc : portfolio.classes()) cum.push_back(c += rc.weight);
    cum.back() = 1.0;
    return cum;
}

Paths simulate_paths(const Portfolio& portfolio, const TransitionRule& rule,
                     const SimConfig& config) {
    const int z = rule.levels();
    const long h = rule.penalty();
    const int start = config.start.resolve(z);
    const double shape = portfolio.residual().shape();
    const double scale = portfolio.residual().scale();
    const auto cum = cumulative_weights(portfolio);

    Paths paths;
    paths.years = config.sample_years;
    paths.risk_class.resize(config.policyholders);
    paths.theta.resize(config.policyholders);
    paths.levels.resize(static_cast<std::size_t>(config.policyholders) * config.sample_years);

    parallel_for(config.policyholders, config.threads, [&](long begin, long end) {
        for (long i = begin; i < end; ++i) {
            RandomStream rng(config.seed, static_cast<std::uint64_t>(i));
            const auto k = rng.categorical(cum);
            const double theta = rng.gamma(shape) * scale;
            const double mean = portfolio.at(k).lambda * theta;
            long level = start;
            auto step = [&] {
                const long claims = rng.poisson(mean);
                level = claims == 0 ? std::max(1L, level - 1) : std::min<long>(z, level + claims * h);
            };
            for (int y = 0; y < config.burn_in_years; ++y) step();
            int* out = &paths.levels[static_cast<std::size_t>(i) * config.sample_years];
            for (int t = 0; t < config.sample_years; ++t) {
                out[t] = static_cast<int>(level);
                step();
            }
            paths.risk_class[i] = static_cast<int>(k);
            paths.theta[i] = theta;
        }
    });
    return paths;
}

} // namespace

SimResult simulate(const Portfolio& portfolio, const TransitionRule& rule,
                   const IndividualizedScheme& scheme, const SimConfig& config) {
    config.validate();
    const int z = rule.levels();
    const int classes = static_cast<int>(portfolio.size());
    if (scheme.classes() != classes || scheme.levels() != z) {
        throw std::invalid_argument("scheme shape does not match portfolio and rule");
    }

    const Paths paths = simulate_paths(portfolio, rule, config);
    const Eigen::MatrixXd premium = scheme.premium_matrix();
    const int years = paths.years;

    std::vector<Moments> class_law(static_cast<std::size_t>(classes) * z);
    std::vector<Moments> marginal_law(z);
    std::vector<Moments> relativity(classes), pure(classes);
    Moments squared_error;
    GroupSums fix_full(classes), alt_full(z);
    std::vector<GroupSums> fix_batches(config.batches, GroupSums(classes));
    std::vector<GroupSums> alt_batches(config.batches, GroupSums(z));
    std::vector<double> occupancy(z);

    for (long i = 0; i < config.policyholders; ++i) {
        const int k = paths.risk_class[i];
        const double lambda = portfolio.at(k).lambda;
        const double truth = lambda * paths.theta[i];
        const auto batch = static_cast<std::size_t>(i * config.batches / config.policyholders);
        const int* lv = &paths.levels[static_cast<std::size_t>(i) * years];

        std::fill(occupancy.begin(), occupancy.end(), 0.0);
        double rel = 0.0, pr = 0.0, se = 0.0;
        for (int t = 0; t < years; ++t) {
            const int l = lv[t] - 1;
            occupancy[l] += 1.0 / years;
            const double m = premium(k, l);
            rel += scheme.gamma()(k, l) / years;
            pr += m / lambda / years;
            se += (truth - m) * (truth - m) / years;
            fix_full.add(k, m / lambda);
            fix_batches[batch].add(k, m / lambda);
            alt_full.add(l, lambda);
            alt_batches[batch].add(l, lambda);
        }
        for (int l = 0; l < z; ++l) {
            class_law[static_cast<std::size_t>(k) * z + l].add(occupancy[l]);
            marginal_law[l].add(occupancy[l]);
        }
        relativity[k].add(rel);
        pure[k].add(pr);
        squared_error.add(se);
    }

    SimResult out;
    out.class_counts.resize(classes);
    out.class_level_law = Eigen::MatrixXd::Zero(classes, z);
    out.class_level_law_se = Eigen::MatrixXd::Zero(classes, z);
    out.level_law = Eigen::VectorXd::Zero(z);
    out.level_law_se = Eigen::VectorXd::Zero(z);
    for (int k = 0; k < classes; ++k) {
        out.class_counts[k] = relativity[k].n;
        for (int l = 0; l < z; ++l) {
            const auto& m = class_law[static_cast<std::size_t>(k) * z + l];
            out.class_level_law(k, l) = m.mean;
            out.class_level_law_se(k, l) = m.std_error();
        }
        out.relativity_means.push_back(relativity[k].estimate());
        out.pure_relativity_means.push_back(pure[k].estimate());
    }
    for (int l = 0; l < z; ++l) {
        out.level_law(l) = marginal_law[l].mean;
        out.level_law_se(l) = marginal_law[l].std_error();
    }
    out.fix = batched(fix_full, fix_batches);
    out.hmse = squared_error.estimate();
    out.alt_fairness = batched(alt_full, alt_batches);
    return out;
}

Estimate simulate_bayesian_fix(const Portfolio& portfolio, double years, long policyholders,
                               std::uint64_t seed, int batches) {
    if (policyholders < 2 || batches < 2 || batches > policyholders) {
        throw std::invalid_argument("simulate_bayesian_fix: need 2 <= batches <= policyholders");
    }
    if (years < 0.0) throw std::invalid_argument("simulate_bayesian_fix: negative horizon");
    const auto cum = cumulative_weights(portfolio);
    const double shape = portfolio.residual().shape();
    const double scale = portfolio.residual().scale();
    const int whole_years = static_cast<int>(std::floor(years));

    const auto classes = portfolio.size();
    GroupSums full(classes);
    std::vector<GroupSums> parts(batches, GroupSums(classes));
    for (long i = 0; i < policyholders; ++i) {
        RandomStream rng(seed, static_cast<std::uint64_t>(i));
        const auto k = rng.categorical(cum);
        const double theta = rng.gamma(shape) * scale;
        double claims = 0.0;
        for (int t = 0; t < whole_years; ++t) claims += rng.poisson(portfolio.at(k).lambda * theta);
        const int risk_class = static_cast<int>(k) + 1;
        const double r = bayesian_posterior_mean(portfolio, risk_class, whole_years, claims) /
                         portfolio.at(k).lambda;
        full.add(k, r);
        parts[static_cast<std::size_t>(i * batches / policyholders)].add(k, r);
    }
    return batched(full, parts);
}

} // namespace bms
