#include "ivproc/hawkes.hpp"

#include "ivproc/bench.hpp"
#include "ivproc/var.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ivproc;

namespace {

HawkesParams scalar_model(double mu, double alpha, double beta) {
    Eigen::VectorXd m(1);
    m << mu;
    Eigen::MatrixXd a(1, 1), b(1, 1);
    a << alpha;
    b << beta;
    return make_hawkes_params(m, a, b);
}

// two processes, 1 exciting itself and 2; 2 exciting itself
HawkesParams small_model() {
    Eigen::VectorXd mu(2);
    mu << 1.0, 1.0;
    Eigen::MatrixXd alpha(2, 2), beta(2, 2);
    alpha << 0.3, 0.0, 0.4, 0.2;
    beta << 1.0, 1.0, 1.0, 1.0;
    return make_hawkes_params(mu, alpha, beta);
}

TEST(HawkesParams, Validation) {
    Eigen::VectorXd mu(1);
    mu << 0.0;
    EXPECT_THROW(make_hawkes_params(mu, Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1)),
                 argument_error);
    mu << 1.0;
    Eigen::MatrixXd neg(1, 1);
    neg << -0.1;
    EXPECT_THROW(make_hawkes_params(mu, neg, Eigen::MatrixXd::Ones(1, 1)), argument_error);
    Eigen::MatrixXd a(1, 1), zero_beta(1, 1);
    a << 0.5;
    zero_beta << 0.0;
    EXPECT_THROW(make_hawkes_params(mu, a, zero_beta), argument_error);
}

TEST(HawkesParams, KernelIntegralRatio) {
    Eigen::VectorXd mu(2);
    mu << 1.0, 2.0;
    Eigen::MatrixXd alpha(2, 2), beta(2, 2);
    alpha << 0.6, 0.0, 0.3, 0.2;
    beta << 2.0, 1.0, 1.5, 4.0;
    const HawkesParams m = make_hawkes_params(mu, alpha, beta);
    Eigen::MatrixXd expected(2, 2);
    expected << 0.3, 0.0, 0.2, 0.05;
    EXPECT_TRUE(m.kernel_integral().isApprox(expected, 1e-14));
}

TEST(StationaryRates, PoissonCase) {
    Eigen::VectorXd mu(2);
    mu << 1.0, 2.0;
    const HawkesParams m =
        make_hawkes_params(mu, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 2));
    EXPECT_TRUE(hawkes_stationary_rates(m).isApprox(mu, 1e-14));
}

TEST(StationaryRates, ScalarGeometricSeries) {
    EXPECT_NEAR(hawkes_stationary_rates(scalar_model(1.0, 0.5, 1.0))(0), 2.0, 1e-12);
}

TEST(StationaryRates, SupercriticalRejected) {
    EXPECT_THROW(hawkes_stationary_rates(scalar_model(1.0, 1.0, 1.0)), instability_error);
    EXPECT_THROW(simulate_hawkes(scalar_model(1.0, 1.2, 1.0), 10.0, 1), instability_error);
}

TEST(IntegratedCov, PoissonDiagonal) {
    Eigen::VectorXd mu(2);
    mu << 1.0, 2.0;
    const HawkesParams m =
        make_hawkes_params(mu, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 2));
    EXPECT_TRUE(hawkes_integrated_cov(m).c.isApprox(mu.asDiagonal().toDenseMatrix(), 1e-14));
}

TEST(IntegratedCov, ScalarClosedForm) {
    // (1 - 0.5)^(-1) * 2 * (1 - 0.5)^(-1) = 8
    EXPECT_NEAR(hawkes_integrated_cov(scalar_model(1.0, 0.5, 1.0)).c(0, 0), 8.0, 1e-12);
}

TEST(IntegratedCov, SharedClosedFormWithVar) {
    Rng rng(42);
    const HawkesParams m = sample_h1_params(rng);
    const Eigen::VectorXd rates = hawkes_stationary_rates(m);
    const Eigen::MatrixXd via_var =
        integrated_cov_closed_form(m.kernel_integral(), Eigen::MatrixXd(rates.asDiagonal()));
    EXPECT_LE((hawkes_integrated_cov(m).c - via_var).cwiseAbs().maxCoeff(), 1e-12);
}

// the one-instrument identity on the theoretical covariance
TEST(IntegratedCov, RatioIdentityOnSampledModels) {
    Rng rng(314);
    for (int trial = 0; trial < 50; ++trial) {
        const HawkesParams m = sample_h1_params(rng);
        const Eigen::MatrixXd phi = m.kernel_integral();
        const IntCov c = hawkes_integrated_cov(m);
        const double expected = phi(2, 1) / (1.0 - phi(2, 2));
        EXPECT_NEAR(c.c(2, 0) / c.c(1, 0), expected, 1e-10);
    }
}

// normalized kernel integrals stay inside the admissible parameter space
TEST(IntegratedCov, NormalizedParametersStayAdmissible) {
    Rng rng(2718);
    for (int trial = 0; trial < 30; ++trial) {
        const HawkesParams m = sample_h1_params(rng);
        const Eigen::VectorXd rates = hawkes_stationary_rates(m);
        const auto [phi_bar, theta_bar] =
            normalize(m.kernel_integral(), Eigen::MatrixXd(rates.asDiagonal()));
        EXPECT_DOUBLE_EQ(phi_bar.diagonal().cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GE(phi_bar.minCoeff(), 0.0);
        EXPECT_LT(spectral_radius(phi_bar), 1.0);
    }
}

TEST(Simulate, HomogeneousPoissonRate) {
    const EventLog log = simulate_hawkes(scalar_model(1.0, 0.0, 1.0), 10000.0, 42);
    EXPECT_NEAR(static_cast<double>(log.events[0].size()) / log.horizon, 1.0, 0.05);
}

TEST(Simulate, ScalarSelfExcitingRate) {
    const EventLog log = discard_prefix(simulate_hawkes(scalar_model(1.0, 0.5, 1.0), 10010.0, 42), 10.0);
    EXPECT_NEAR(static_cast<double>(log.events[0].size()) / log.horizon, 2.0, 0.2);
}

TEST(Simulate, SampledModelCountsMatchStationaryRates) {
    Rng rng(123);
    const HawkesParams m = sample_h1_params(rng);
    const Eigen::VectorXd rates = hawkes_stationary_rates(m);
    const EventLog log = discard_prefix(simulate_hawkes(m, 8010.0, 7), 10.0);
    for (int i = 0; i < 4; ++i) {
        const double observed = static_cast<double>(log.events[static_cast<std::size_t>(i)].size()) /
                                log.horizon;
        EXPECT_NEAR(observed, rates(i), 0.10 * rates(i));
    }
}

TEST(Simulate, DeterministicGivenSeed) {
    const HawkesParams m = small_model();
    const EventLog a = simulate_hawkes(m, 500.0, 5);
    const EventLog b = simulate_hawkes(m, 500.0, 5);
    EXPECT_EQ(a.events, b.events);
    const EventLog c = simulate_hawkes(m, 500.0, 6);
    EXPECT_NE(a.events, c.events);
}

TEST(Simulate, TimesAreStrictlyIncreasingWithinProcess) {
    const EventLog log = simulate_hawkes(small_model(), 2000.0, 31);
    for (const auto& times : log.events) {
        for (std::size_t k = 1; k < times.size(); ++k) EXPECT_LT(times[k - 1], times[k]);
        if (!times.empty()) {
            EXPECT_GT(times.front(), 0.0);
            EXPECT_LE(times.back(), log.horizon);
        }
    }
}

// reconstruct the conditional intensity at every event from the log itself;
// it must never fall below the baseline
TEST(Simulate, IntensityBoundedBelowByBaseline) {
    const HawkesParams m = small_model();
    const EventLog log = simulate_hawkes(m, 200.0, 17);
    std::vector<std::pair<double, int>> merged;
    for (int p = 0; p < 2; ++p)
        for (double t : log.events[static_cast<std::size_t>(p)]) merged.emplace_back(t, p);
    std::sort(merged.begin(), merged.end());
    for (const auto& [t, p] : merged) {
        double intensity = m.mu(p);
        for (const auto& [s, q] : merged) {
            if (s >= t) break;
            intensity += m.alpha(p, q) * std::exp(-m.beta(p, q) * (t - s));
        }
        EXPECT_GE(intensity, m.mu(p) - 1e-12);
        EXPECT_GT(intensity, 0.0);
    }
}

TEST(Simulate, EventCapTriggersResourceError) {
    EXPECT_THROW(simulate_hawkes(scalar_model(50.0, 0.5, 1.0), 1000.0, 3, 100), resource_error);
}

TEST(DiscardPrefix, ShiftsAndShrinks) {
    EventLog log;
    log.horizon = 10.0;
    log.events = {{0.5, 2.0, 7.5}, {3.0}};
    const EventLog trimmed = discard_prefix(log, 2.0);
    EXPECT_DOUBLE_EQ(trimmed.horizon, 8.0);
    ASSERT_EQ(trimmed.events[0].size(), 1u);
    EXPECT_DOUBLE_EQ(trimmed.events[0][0], 5.5);
    ASSERT_EQ(trimmed.events[1].size(), 1u);
    EXPECT_DOUBLE_EQ(trimmed.events[1][0], 1.0);
    EXPECT_THROW(discard_prefix(log, 10.0), argument_error);
}

// window-count arithmetic frozen from a hand enumeration: events {1,2,3},
// T = 4, H = 0.5: rate 0.75, each window holds exactly its own event
TEST(Cumulants, HandEnumeratedExample) {
    EventLog log;
    log.horizon = 4.0;
    log.events = {{1.0, 2.0, 3.0}};
    const CumulantEstimates est = estimate_hawkes_cumulants(log, 0.5);
    EXPECT_DOUBLE_EQ(est.lambda_hat(0), 0.75);
    EXPECT_DOUBLE_EQ(est.c_hat(0, 0), (3.0 * (1.0 - 2.0 * 0.5 * 0.75)) / 4.0); // 0.1875
}

TEST(Cumulants, PoissonCovarianceIsNearDiagonal) {
    Eigen::VectorXd mu(2);
    mu << 1.0, 2.0;
    const HawkesParams m =
        make_hawkes_params(mu, Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 2));
    const EventLog log = simulate_hawkes(m, 20000.0, 11);
    const CumulantEstimates est = estimate_hawkes_cumulants(log, 5.0);
    EXPECT_NEAR(est.c_hat(0, 0), 1.0, 0.15);
    EXPECT_NEAR(est.c_hat(1, 1), 2.0, 0.25);
    EXPECT_NEAR(est.c_hat(0, 1), 0.0, 0.15);
}

TEST(Cumulants, SampledModelMatchesClosedForm) {
    Rng rng(123);
    const HawkesParams m = sample_h1_params(rng);
    const IntCov truth = hawkes_integrated_cov(m);
    const EventLog log = discard_prefix(simulate_hawkes(m, 10010.0, 900), 10.0);
    const CumulantEstimates est = estimate_hawkes_cumulants(log, 10.0);
    EXPECT_LE((est.c_hat - truth.c).norm() / truth.c.norm(), 0.15);
}

TEST(Cumulants, EmptyProcessGetsZeroRateAndWarning) {
    EventLog log;
    log.horizon = 100.0;
    log.events = {{1.0, 2.0}, {}};
    const CumulantEstimates est = estimate_hawkes_cumulants(log, 1.0);
    EXPECT_DOUBLE_EQ(est.lambda_hat(1), 0.0);
    EXPECT_EQ(est.empty_processes, std::vector<int>{2});
}

TEST(Cumulants, WindowValidation) {
    EventLog log;
    log.horizon = 10.0;
    log.events = {{1.0}};
    EXPECT_THROW(estimate_hawkes_cumulants(log, 0.0), argument_error);
    EXPECT_THROW(estimate_hawkes_cumulants(log, 5.0), argument_error);
    EXPECT_NO_THROW(estimate_hawkes_cumulants(log, 4.9));
}

// error in the consistency regime decreases with the horizon
TEST(Cumulants, ConsistencyRegimeAcrossHorizons) {
    const HawkesParams m = small_model();
    const IntCov truth = hawkes_integrated_cov(m);
    std::vector<double> medians;
    for (double horizon : {1000.0, 10000.0, 100000.0}) {
        std::vector<double> errs;
        for (int seed = 0; seed < 10; ++seed) {
            const EventLog log =
                discard_prefix(simulate_hawkes(m, horizon + 10.0, derive_seed(777, seed)), 10.0);
            const CumulantEstimates est =
                estimate_hawkes_cumulants(log, std::pow(log.horizon, 0.4));
            errs.push_back((est.c_hat - truth.c).norm() / truth.c.norm());
        }
        std::sort(errs.begin(), errs.end());
        medians.push_back(0.5 * (errs[4] + errs[5]));
    }
    EXPECT_GT(medians[0], medians[1]);
    EXPECT_GT(medians[1], medians[2]);
}

TEST(Offspring, GenerationZeroAndOne) {
    const HawkesParams m = small_model();
    EXPECT_TRUE(expected_offspring(m, 0).isApprox(Eigen::MatrixXd::Identity(2, 2)));
    EXPECT_TRUE(expected_offspring(m, 1).isApprox(m.kernel_integral(), 1e-14));
    EXPECT_THROW(expected_offspring(m, -1), argument_error);
}

// Monte-Carlo cluster oracle: spawn Poisson(phi(j, i)) children per event
// and count descendants by type
TEST(Offspring, TotalDescendantsMatchClusterSimulation) {
    const HawkesParams m = small_model();
    const Eigen::MatrixXd phi = m.kernel_integral();
    const Eigen::MatrixXd total = expected_total_offspring(m);

    Rng rng(5555);
    auto poisson = [&rng](double mean) {
        // Knuth's method; means here are well below 1
        int k = 0;
        double p = 1.0;
        const double limit = std::exp(-mean);
        do {
            ++k;
            p *= rng.uniform();
        } while (p > limit);
        return k - 1;
    };

    const int clusters = 100000;
    for (int root = 0; root < 2; ++root) {
        Eigen::Vector2d counts = Eigen::Vector2d::Zero();
        for (int c = 0; c < clusters; ++c) {
            std::vector<int> queue = {root};
            while (!queue.empty()) {
                const int type = queue.back();
                queue.pop_back();
                counts(type) += 1.0;
                for (int child = 0; child < 2; ++child) {
                    const int births = poisson(phi(child, type));
                    for (int b = 0; b < births; ++b) queue.push_back(child);
                }
            }
        }
        counts /= static_cast<double>(clusters);
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(counts(j), total(j, root), 0.05 * std::max(total(j, root), 0.2));
    }
}

} // namespace
