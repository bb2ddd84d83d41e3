#include <doctest.h>

#include <cmath>

#include "bms/metrics.hpp"
#include "bms/premium_schemes.hpp"
#include "oracle.hpp"
#include "reference_tables.hpp"

using namespace bms;

namespace {

struct Setup {
    Portfolio portfolio;
    MixedLevelMoments moments;
};

Setup setup(int scenario) {
    auto p = reference::scenario(scenario);
    auto m = mixed_level_moments(p, reference::rule(), build_gamma_quadrature(p.residual()));
    return {std::move(p), std::move(m)};
}

Setup fine_setup(int scenario) {
    auto p = reference::scenario(scenario);
    auto m = mixed_level_moments(p, reference::rule(), build_gamma_quadrature(p.residual(), reference::kFineNodes));
    return {std::move(p), std::move(m)};
}

} // namespace

TEST_CASE("partial optimum FIX and HMSE across the four scenarios") {
    for (int sc = 1; sc <= 4; ++sc) {
        const auto s = setup(sc);
        const auto m = evaluate(ppos(s.moments, s.portfolio), s.moments, s.portfolio);
        REQUIRE(m.fix);
        INFO("scenario " << sc);
        CHECK(std::abs(*m.fix - reference::kPposFix[sc - 1]) <= 0.002);
        CHECK(std::abs(m.hmse - reference::kPposHmse[sc - 1]) <= 0.001);
        CHECK(std::abs(hmse(pno(s.portfolio, 10), s.moments, s.portfolio) - reference::kPnoHmse[sc - 1]) <= 0.001);
    }
    const auto s2 = setup(2);
    CHECK(std::abs(hmse(pno(s2.portfolio, 10), s2.moments, s2.portfolio) - 0.2053) <= 0.001);
}

TEST_CASE("no-posterior FIX is undefined") {
    const auto s = setup(1);
    const auto m = evaluate(pno(s.portfolio, 10), s.moments, s.portfolio);
    CHECK_FALSE(m.fix.has_value());
    CHECK(m.split.total() < kFixDegenerateVariance);
}

TEST_CASE("summary metrics for scenario I") {
    const auto s = setup(1);
    const auto p = evaluate(ppos(s.moments, s.portfolio), s.moments, s.portfolio);
    const auto full = pfos(s.moments, s.portfolio).scheme;
    const auto f = evaluate(full, s.moments, s.portfolio);
    const auto i = evaluate(poi(s.moments, s.portfolio), s.moments, s.portfolio);
    CHECK(std::abs(*p.fix - reference::kSummaryFix[0]) <= 0.002);
    CHECK(std::abs(*f.fix - reference::kSummaryFix[1]) <= 0.001);
    CHECK(std::abs(*i.fix - reference::kSummaryFix[2]) <= 1e-9);
    CHECK(std::abs(p.hmse - reference::kSummaryHmse[0]) <= 0.001);
    CHECK(std::abs(f.hmse - reference::kSummaryHmse[1]) <= 0.001);
    CHECK(std::abs(i.hmse - reference::kSummaryHmse[2]) <= 0.001);
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(p.relativity_means(k) - reference::kPposMeans[k]) <= 0.002);
        CHECK(std::abs(f.relativity_means(k) - reference::kPfosMeans[k]) <= 0.003);
        CHECK(std::abs(i.relativity_means(k) - 1.0) <= 1e-8);
        CHECK(std::abs(p.premium_means(k) - reference::kPposPremiumMeans[k]) <= 0.002);
        CHECK(std::abs(f.premium_means(k) - reference::kPfosPremiumMeans[k]) <= 0.003);
        CHECK(std::abs(f.pure_relativity_means(k) - reference::kPfosPureMeans[k]) <= 0.005);
        CHECK(f.premium_means(k) == doctest::Approx(s.portfolio.at(k).lambda * f.pure_relativity_means(k)).epsilon(1e-13));
    }
}

TEST_CASE("FIX plus within-class share is one") {
    const auto s = setup(4);
    for (const auto& scheme : {ppos(s.moments, s.portfolio), pfos(s.moments, s.portfolio).scheme}) {
        const auto split = pure_relativity_split(scheme.expanded(), s.moments, s.portfolio);
        CHECK(*split.fix() + split.within / split.total() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(split.between >= 0.0);
        CHECK(split.within >= 0.0);
    }
}

TEST_CASE("HMSE and FIX agree with direct theta integration") {
    const std::vector<double> lambdas{0.1, 0.2, 1.2};
    const std::vector<double> weights(3, 1.0 / 3.0);
    const auto s = fine_setup(4);
    const auto o = oracle::moments(lambdas, 0.8, 10, 2, 3000);
    for (const auto& table : {ppos(s.moments, s.portfolio).expanded(), poi(s.moments, s.portfolio),
                              pfos(s.moments, s.portfolio).scheme.expanded()}) {
        auto premium = [&](int k, int l) { return table.premium(k + 1, l + 1); };
        const double ref_hmse = static_cast<double>(oracle::hmse(lambdas, weights, 0.8, 10, 2, premium, 3000));
        CHECK(hmse(table, s.moments, s.portfolio) == doctest::Approx(ref_hmse).epsilon(1e-8));
        const auto f = fix(table, s.moments, s.portfolio);
        REQUIRE(f);
        const double ref_fix = static_cast<double>(oracle::fix(lambdas, weights, o.m0, premium));
        CHECK(std::abs(*f - ref_fix) <= 1e-8);
    }
}

TEST_CASE("one class: individualized HMSE is the expected conditional variance") {
    const Portfolio p({{0.7, 1.0}}, ResidualLaw(1.1));
    const TransitionRule rule(8, 2);
    const auto m = mixed_level_moments(p, rule, build_gamma_quadrature(p.residual(), reference::kFineNodes));
    const auto i = poi(m, p);
    // E[lambda^2 Var(Theta | L)] = lambda^2 sum_l (m2 - m1^2 / m0)
    double expected = 0.0;
    for (int l = 0; l < 8; ++l) expected += m.m2(0, l) - m.m1(0, l) * m.m1(0, l) / m.m0(0, l);
    expected *= 0.49;
    CHECK(hmse(i, m, p) == doctest::Approx(expected).epsilon(1e-10));
    // and the same quantity from the oracle moments
    const auto o = oracle::moments({0.7}, 1.1, 8, 2, 3000);
    long double ref = 0.0L;
    for (int l = 0; l < 8; ++l) ref += o.m2[0][l] - o.m1[0][l] * o.m1[0][l] / o.m0[0][l];
    CHECK(hmse(i, m, p) == doctest::Approx(static_cast<double>(0.49L * ref)).epsilon(1e-8));
    const auto f = fix(i, m, p);
    CHECK((!f || *f <= 1e-9));
}

TEST_CASE("debiased premiums are unbiased per class") {
    const auto s = setup(3);
    Eigen::VectorXd gamma(10);
    gamma << 0.3, 0.4, 0.5, 0.7, 0.9, 1.0, 1.4, 1.9, 2.5, 3.0;
    const auto d = debias_priori(gamma, s.portfolio, s.moments);
    const Eigen::VectorXd means = conditional_premium_means(d, s.moments);
    for (int k = 0; k < 3; ++k) CHECK(means(k) == doctest::Approx(s.portfolio.at(k).lambda).epsilon(1e-12));
    CHECK(*fix(d, s.moments, s.portfolio) <= 1e-10);
}

TEST_CASE("every scheme is at least as far from the truth as the individualized one") {
    const auto s = setup(1);
    const double floor = hmse(poi(s.moments, s.portfolio), s.moments, s.portfolio);
    Eigen::VectorXd gamma = Eigen::VectorXd::LinSpaced(10, 0.2, 2.0);
    for (double c : {0.5, 1.0, 2.0}) {
        const SharedScheme sch(Eigen::Vector3d(0.1, 0.5, 0.9) * c, gamma);
        CHECK(hmse(sch, s.moments, s.portfolio) >= floor - 1e-9);
    }
}

TEST_CASE("alternative fairness measure") {
    const auto s = fine_setup(1);
    const double a = alt_fairness_measure(s.moments, s.portfolio);
    CHECK(a > 0.0);
    CHECK(a < 1.0);
    // E[Lambda | L] from oracle moments
    const std::vector<double> lambdas{0.1, 0.5, 0.9};
    const auto o = oracle::moments(lambdas, 0.8, 10, 2, 3000);
    long double between = 0.0L;
    const long double mean = 0.5L;
    for (int l = 0; l < 10; ++l) {
        long double pl = 0.0L, el = 0.0L;
        for (int k = 0; k < 3; ++k) {
            pl += o.m0[k][l] / 3.0L;
            el += lambdas[k] * o.m0[k][l] / 3.0L;
        }
        between += pl * (el / pl - mean) * (el / pl - mean);
    }
    const long double var = (0.16L + 0.0L + 0.16L) / 3.0L;  // Var(Lambda), equal weights
    CHECK(a == doctest::Approx(static_cast<double>(between / var)).epsilon(1e-8));
    CHECK(std::abs(alt_fairness_measure(setup(1).moments, s.portfolio) - a) <= 1e-4);

    const Portfolio one({{0.5, 1.0}}, ResidualLaw(0.8));
    const auto m1 = mixed_level_moments(one, reference::rule(), build_gamma_quadrature(one.residual()));
    CHECK_THROWS_AS(alt_fairness_measure(m1, one), std::invalid_argument);
}
