#include "ivproc/bench.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace ivproc;

namespace {

TEST(ExperimentIds, ParseAndPrint) {
    EXPECT_EQ(parse_experiment_id("E1"), ExperimentId::e1);
    EXPECT_EQ(parse_experiment_id("h1"), ExperimentId::h1);
    EXPECT_STREQ(to_string(ExperimentId::e6), "E6");
    EXPECT_THROW(parse_experiment_id("E9"), argument_error);
}

TEST(Layouts, InstrumentSetsAreGraphValid) {
    for (ExperimentId id : {ExperimentId::e1, ExperimentId::e2, ExperimentId::e3,
                            ExperimentId::e4, ExperimentId::e5, ExperimentId::e6,
                            ExperimentId::e7, ExperimentId::h1}) {
        const ExperimentLayout layout = experiment_layout(id);
        const CausalGraph g(layout.n, layout.edges);
        const ValidityReport report =
            check_instrument(g, layout.instruments, layout.treatments, layout.outcomes);
        EXPECT_TRUE(report.graph_valid()) << to_string(id);
        // the withheld confounder is always the last process
        EXPECT_EQ(layout.observed_count(), layout.n - 1);
        for (int node : layout.instruments.unite(layout.treatments).unite(layout.outcomes))
            EXPECT_LE(node, layout.observed_count());
    }
    EXPECT_TRUE(experiment_problem(experiment_layout(ExperimentId::e4)).weight.has_value());
}

TEST(Sampler, RespectsPatternIntervalsAndStability) {
    Rng rng(9001);
    for (ExperimentId id : {ExperimentId::e1, ExperimentId::e2, ExperimentId::e3,
                            ExperimentId::e4, ExperimentId::e7}) {
        const ExperimentLayout layout = experiment_layout(id);
        std::set<std::pair<int, int>> edges(layout.edges.begin(), layout.edges.end());
        const double diag_hi = id == ExperimentId::e7 ? 0.85 : 0.5;
        for (int draw = 0; draw < 30; ++draw) {
            const VarParams m = sample_var_experiment_params(id, rng);
            EXPECT_TRUE(check_stability(m).stable);
            EXPECT_TRUE(m.theta.isApprox(Eigen::MatrixXd::Identity(layout.n, layout.n)));
            const Eigen::MatrixXd& phi = m.phis[0];
            for (int i = 1; i <= layout.n; ++i) {
                for (int j = 1; j <= layout.n; ++j) {
                    const double v = phi(j - 1, i - 1);
                    if (i == j) {
                        EXPECT_GT(std::abs(v), 1e-3);
                        EXPECT_LE(std::abs(v), diag_hi);
                    } else if (edges.count({i, j})) {
                        EXPECT_GE(std::abs(v), 0.2);
                        EXPECT_LE(std::abs(v), 1.0);
                    } else {
                        EXPECT_DOUBLE_EQ(v, 0.0); // pattern zeros are exact
                    }
                }
            }
        }
    }
}

TEST(Sampler, OrderTwoConstraint) {
    Rng rng(9002);
    for (int draw = 0; draw < 30; ++draw) {
        const VarParams m = sample_var_experiment_params(ExperimentId::e5, rng);
        ASSERT_EQ(m.order(), 2);
        const double lag1 = m.phis[0](1, 0);
        const double lag2 = m.phis[1](1, 0);
        EXPECT_GE(lag1 + lag2, 0.2);
        EXPECT_GE(lag1 * lag2, 0.0); // equal signs
        EXPECT_TRUE(check_stability(m).stable);
    }
}

TEST(Sampler, PointProcessDrawIsTriangularWithUnitDecay) {
    Rng rng(9003);
    for (int draw = 0; draw < 30; ++draw) {
        const HawkesParams m = sample_h1_params(rng);
        EXPECT_TRUE(m.beta.isApprox(Eigen::MatrixXd::Ones(4, 4)));
        EXPECT_TRUE(m.mu.isApprox(Eigen::VectorXd::Ones(4)));
        const Eigen::MatrixXd phi = m.kernel_integral();
        for (int i = 0; i < 4; ++i) {
            EXPECT_GE(phi(i, i), 0.2);
            EXPECT_LE(phi(i, i), 0.5);
        }
        // with unit decay rates the pattern is triangular in disguise, so
        // the spectral radius equals the largest diagonal entry
        EXPECT_NEAR(spectral_radius(phi), phi.diagonal().maxCoeff(), 1e-12);
        EXPECT_LE(spectral_radius(phi), 0.5 + 1e-12);
    }
}

TEST(Sampler, OverridesApply) {
    Rng rng(9004);
    SamplerBounds bounds;
    bounds.diagonal = {-0.1, 0.1};
    bounds.edge_magnitude = {0.4, 0.6};
    const VarParams m = sample_var_experiment_params(ExperimentId::e1, rng, bounds);
    EXPECT_LE(m.phis[0].diagonal().cwiseAbs().maxCoeff(), 0.1);
    EXPECT_GE(std::abs(m.phis[0](1, 0)), 0.4);
    EXPECT_LE(std::abs(m.phis[0](1, 0)), 0.6);
}

TEST(Sampler, VariantDispatch) {
    const auto var_draw = sample_experiment_params(ExperimentId::e2, 5);
    EXPECT_TRUE(std::holds_alternative<VarParams>(var_draw));
    const auto hawkes_draw = sample_experiment_params(ExperimentId::h1, 5);
    EXPECT_TRUE(std::holds_alternative<HawkesParams>(hawkes_draw));
    EXPECT_THROW(sample_experiment_params(ExperimentId::e6, 5), argument_error);
}

TEST(NonlinearGenerator, DeterministicAndFinite) {
    const SeriesData a = simulate_e6(500, 99);
    const SeriesData b = simulate_e6(500, 99);
    EXPECT_TRUE(a.values == b.values);
    EXPECT_TRUE(a.values.allFinite());
    EXPECT_EQ(a.len(), 500);
    EXPECT_EQ(a.dim(), 4);
}

TEST(NonlinearGenerator, NoiselessFixedPointTrajectories) {
    const SeriesData a = simulate_e6(50, 1, 0.0);
    const SeriesData b = simulate_e6(50, 2, 0.0);
    EXPECT_TRUE(a.values == b.values); // no randomness left
    // the deterministic skeleton settles: consecutive states stop moving
    EXPECT_LE((a.values.row(49) - a.values.row(48)).cwiseAbs().maxCoeff(), 1e-6);
}

// batch-means oracle: the instrument coordinate mixes, so the dispersion of
// batch means shrinks as batches grow
TEST(NonlinearGenerator, InstrumentCoordinateMixes) {
    const SeriesData x = simulate_e6(100000, 321);
    const auto batch_std = [&](long width) {
        std::vector<double> means;
        for (long start = 0; start + width <= x.len(); start += width)
            means.push_back(x.values.col(0).segment(start, width).mean());
        double mean = 0.0;
        for (double v : means) mean += v;
        mean /= static_cast<double>(means.size());
        double var = 0.0;
        for (double v : means) var += (v - mean) * (v - mean);
        return std::sqrt(var / static_cast<double>(means.size()));
    };
    EXPECT_LT(batch_std(1000), 0.5 * batch_std(100));
}

TEST(RunExperiment, DeterministicReports) {
    ExperimentSpec spec;
    spec.id = ExperimentId::e1;
    spec.size = 2000;
    spec.reps = 8;
    spec.seed = 31;
    const ExperimentReport a = run_experiment(spec);
    const ExperimentReport b = run_experiment(spec);
    EXPECT_EQ(report_to_csv(a), report_to_csv(b));
    EXPECT_EQ(a.failures, 0);
    EXPECT_GT(a.mse, 0.0);

    spec.seed = 32;
    const ExperimentReport c = run_experiment(spec);
    EXPECT_NE(report_to_csv(a), report_to_csv(c));
}

TEST(RunExperiment, FixedEstimandExperimentHasDegenerateRange) {
    ExperimentSpec spec;
    spec.id = ExperimentId::e6;
    spec.size = 1500;
    spec.reps = 6;
    spec.seed = 7;
    const ExperimentReport report = run_experiment(spec);
    EXPECT_EQ(report.range_lo, 1.25);
    EXPECT_EQ(report.range_hi, 1.25);
    for (const auto& draw : report.draws) EXPECT_EQ(draw.truth(0, 0), 1.25);
}

TEST(RunExperiment, RepFailuresAreRecordedNotFatal) {
    ExperimentSpec spec;
    spec.id = ExperimentId::e1;
    spec.size = 30; // below the automatic-bandwidth minimum: every rep fails
    spec.reps = 4;
    spec.seed = 3;
    const ExperimentReport report = run_experiment(spec);
    EXPECT_EQ(report.failures, 4);
    EXPECT_EQ(report.mse, 0.0);
    for (const auto& draw : report.draws) EXPECT_FALSE(draw.error.empty());
}

// the reported error shrinks with the series length for every estimator
// route (medians over several harness runs to tame the heavy tails)
TEST(RunExperiment, ErrorDecreasesWithSeriesLength) {
    for (ExperimentId id : {ExperimentId::e1, ExperimentId::e2, ExperimentId::e3,
                            ExperimentId::e4, ExperimentId::e6}) {
        const auto median_mse = [&](double size) {
            std::vector<double> values;
            for (std::uint64_t seed = 11; seed <= 15; ++seed) {
                ExperimentSpec spec;
                spec.id = id;
                spec.size = size;
                spec.reps = 40;
                spec.seed = seed;
                values.push_back(run_experiment(spec).mse);
            }
            std::sort(values.begin(), values.end());
            return values[2];
        };
        EXPECT_GT(median_mse(1000.0), median_mse(10000.0)) << to_string(id);
    }
}

TEST(Sweep, RowsAndBins) {
    ExperimentSpec spec;
    spec.id = ExperimentId::e7;
    spec.size = 1000;
    spec.reps = 120;
    spec.seed = 17;
    const SweepTable table = sweep_e7(spec, 5);
    const ExperimentReport report = run_experiment(spec);
    EXPECT_EQ(static_cast<int>(table.rows.size()), spec.reps - report.failures);
    ASSERT_EQ(table.bins.size(), 5u);
    long binned = 0;
    for (const auto& bin : table.bins) binned += bin.count;
    EXPECT_EQ(binned, static_cast<long>(table.rows.size()));
    for (const auto& row : table.rows) {
        EXPECT_LE(std::abs(row.phi33), 0.85);
        EXPECT_GT(std::abs(row.phi33), 1e-3);
        if (row.abs_err > 0.0)
            EXPECT_NEAR(row.log_abs_err, std::log(row.abs_err), 1e-12);
    }
    EXPECT_THROW(sweep_e7(ExperimentSpec{ExperimentId::e1, 1000, 10, 1, {}}, 5), argument_error);
}

// restricting the self-feedback of the outcome to small values removes the
// hard draws, so the overall error level drops
TEST(Sweep, RestrictedDiagonalsAreEasier) {
    ExperimentSpec wide;
    wide.id = ExperimentId::e7;
    wide.size = 1000;
    wide.reps = 150;
    wide.seed = 23;
    ExperimentSpec narrow = wide;
    narrow.overrides.diagonal = {-0.2, 0.2};

    const auto median_log_err = [](const SweepTable& table) {
        std::vector<double> values;
        for (const auto& row : table.rows) values.push_back(row.log_abs_err);
        std::sort(values.begin(), values.end());
        return values[values.size() / 2];
    };
    EXPECT_LT(median_log_err(sweep_e7(narrow, 4)), median_log_err(sweep_e7(wide, 4)));
}

TEST(Reports, CsvShapes) {
    ExperimentSpec spec;
    spec.id = ExperimentId::e3;
    spec.size = 1200;
    spec.reps = 5;
    spec.seed = 2;
    const ExperimentReport report = run_experiment(spec);
    const std::string csv = report_to_csv(report);
    EXPECT_NE(csv.find("rep,status,true_1,true_2,estimate_1,estimate_2,squared_error"),
              std::string::npos);
    const std::string summary = report_summary_csv(report);
    EXPECT_NE(summary.find("experiment,size,reps,mse,range_lo,range_hi,failures"),
              std::string::npos);
    EXPECT_NE(summary.find("E3,"), std::string::npos);
}

} // namespace
