#pragma once

#include "ivproc/csv.hpp"
#include "ivproc/errors.hpp"
#include "ivproc/hawkes.hpp"
#include "ivproc/iv.hpp"
#include "ivproc/parallel.hpp"
#include "ivproc/rng.hpp"
#include "ivproc/var.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ivproc {

// ===========================================================================
// Experiment catalogue. E1-E5 and E7 are autoregressive models with sampled
// parameters on a fixed sparsity pattern, E6 is a fixed nonlinear generator,
// H1 is a point-process model. Estimation always targets the normalized
// effect of the treatment set on the outcome set.
// ===========================================================================

enum class ExperimentId { e1, e2, e3, e4, e5, e6, e7, h1 };

inline const char* to_string(ExperimentId id) {
    switch (id) {
    case ExperimentId::e1: return "E1";
    case ExperimentId::e2: return "E2";
    case ExperimentId::e3: return "E3";
    case ExperimentId::e4: return "E4";
    case ExperimentId::e5: return "E5";
    case ExperimentId::e6: return "E6";
    case ExperimentId::e7: return "E7";
    case ExperimentId::h1: return "H1";
    }
    return "?";
}

inline ExperimentId parse_experiment_id(std::string name) {
    for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (name == "E1") return ExperimentId::e1;
    if (name == "E2") return ExperimentId::e2;
    if (name == "E3") return ExperimentId::e3;
    if (name == "E4") return ExperimentId::e4;
    if (name == "E5") return ExperimentId::e5;
    if (name == "E6") return ExperimentId::e6;
    if (name == "E7") return ExperimentId::e7;
    if (name == "H1") return ExperimentId::h1;
    throw argument_error("unknown experiment '" + name + "' (expected E1..E7 or H1)");
}

/// Structural pattern of an experiment: process count, direct-effect edges,
/// lag count, and the index sets the estimator uses. The confounding
/// process is always the last index and is withheld from the estimator.
struct ExperimentLayout {
    int n = 0;
    int lags = 1;
    std::vector<std::pair<int, int>> edges;
    NodeSet instruments;
    NodeSet treatments;
    NodeSet outcomes;
    bool explicit_identity_weight = false;

    [[nodiscard]] int observed_count() const { return n - 1; }
};

inline ExperimentLayout experiment_layout(ExperimentId id) {
    ExperimentLayout l;
    switch (id) {
    case ExperimentId::e1:
    case ExperimentId::e7:
    case ExperimentId::h1:
    case ExperimentId::e6:
        // instrument -> treatment -> outcome, confounder into both
        l.n = 4;
        l.edges = {{1, 2}, {2, 3}, {4, 2}, {4, 3}};
        l.instruments = {1};
        l.treatments = {2};
        l.outcomes = {3};
        break;
    case ExperimentId::e5:
        l = experiment_layout(ExperimentId::e1);
        l.lags = 2;
        break;
    case ExperimentId::e2:
        // as E1 plus the outcome feeding back on the treatment
        l.n = 4;
        l.edges = {{1, 2}, {2, 3}, {4, 2}, {4, 3}, {3, 2}};
        l.instruments = {1};
        l.treatments = {2};
        l.outcomes = {3};
        break;
    case ExperimentId::e3:
        // two instruments, two treatments, one outcome, one confounder
        l.n = 6;
        l.edges = {{1, 3}, {2, 3}, {1, 4}, {2, 4}, {3, 5}, {4, 5}, {6, 3}, {6, 4}, {6, 5}};
        l.instruments = {1, 2};
        l.treatments = {3, 4};
        l.outcomes = {5};
        break;
    case ExperimentId::e4:
        // overidentified: two instruments for a single treatment
        l.n = 5;
        l.edges = {{1, 2}, {2, 1}, {1, 3}, {2, 3}, {3, 4}, {4, 3}, {5, 3}, {5, 4}};
        l.instruments = {1, 2};
        l.treatments = {3};
        l.outcomes = {4};
        l.explicit_identity_weight = true;
        break;
    }
    return l;
}

inline IvProblem experiment_problem(const ExperimentLayout& layout) {
    IvProblem prob;
    prob.instruments = layout.instruments;
    prob.treatments = layout.treatments;
    prob.outcomes = layout.outcomes;
    if (layout.explicit_identity_weight) {
        const auto k = static_cast<Eigen::Index>(layout.instruments.size());
        prob.weight = Eigen::MatrixXd::Identity(k, k);
    }
    return prob;
}

// ===========================================================================
// Parameter samplers.
// ===========================================================================

inline constexpr long kMaxSamplerRejections = 100000;
inline constexpr double kDiagonalExclusionBand = 1e-3;

/// Optional overrides of the default sampling intervals.
struct SamplerBounds {
    std::optional<std::pair<double, double>> edge_magnitude; // default [0.2, 1]
    std::optional<std::pair<double, double>> diagonal;       // default [-0.5, 0.5] ([-0.85, 0.85] for E7)
    std::optional<std::pair<double, double>> excitation;     // default [0.2, 0.5] (H1)
};

namespace detail {

inline double sample_edge_coefficient(Rng& rng, const std::pair<double, double>& magnitude) {
    const double value = rng.uniform(magnitude.first, magnitude.second);
    return rng.uniform() < 0.5 ? -value : value;
}

inline double sample_nonzero_diagonal(Rng& rng, const std::pair<double, double>& range) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double value = rng.uniform(range.first, range.second);
        if (std::abs(value) > kDiagonalExclusionBand) return value;
    }
    throw resource_error("diagonal sampler failed to leave the exclusion band");
}

} // namespace detail

/// Draw autoregressive parameters on the experiment's sparsity pattern,
/// resampling until the companion matrix is stable (and, for the order-2
/// experiment, until the treatment column satisfies its sign/magnitude
/// constraint). Innovation covariance is the identity.
inline VarParams sample_var_experiment_params(ExperimentId id, Rng& rng,
                                              const SamplerBounds& bounds = {}) {
    if (id == ExperimentId::e6 || id == ExperimentId::h1)
        throw argument_error(std::string(to_string(id)) + " does not sample VAR parameters");
    const ExperimentLayout layout = experiment_layout(id);
    const std::pair<double, double> edge_magnitude = bounds.edge_magnitude.value_or(std::pair{0.2, 1.0});
    const std::pair<double, double> diagonal = bounds.diagonal.value_or(
        id == ExperimentId::e7 ? std::pair{-0.85, 0.85} : std::pair{-0.5, 0.5});

    for (long attempt = 0; attempt < kMaxSamplerRejections; ++attempt) {
        std::vector<Eigen::MatrixXd> phis(static_cast<std::size_t>(layout.lags),
                                          Eigen::MatrixXd::Zero(layout.n, layout.n));
        for (auto& phi : phis) {
            for (auto [from, to] : layout.edges)
                phi(to - 1, from - 1) = detail::sample_edge_coefficient(rng, edge_magnitude);
            for (int i = 0; i < layout.n; ++i)
                phi(i, i) = detail::sample_nonzero_diagonal(rng, diagonal);
        }
        if (id == ExperimentId::e5) {
            const double lag1 = phis[0](1, 0);
            const double lag2 = phis[1](1, 0);
            if (lag1 + lag2 < 0.2 || lag1 * lag2 < 0.0) continue;
        }
        VarParams params{std::move(phis), Eigen::MatrixXd::Identity(layout.n, layout.n)};
        if (check_stability(params).stable) return params;
    }
    throw resource_error("parameter sampler exceeded the rejection cap");
}

/// Point-process parameters: unit decay rates, unit baselines, excitation
/// amplitudes drawn on the pattern edges and the diagonal.
inline HawkesParams sample_h1_params(Rng& rng, const SamplerBounds& bounds = {}) {
    const ExperimentLayout layout = experiment_layout(ExperimentId::h1);
    const std::pair<double, double> range = bounds.excitation.value_or(std::pair{0.2, 0.5});
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(layout.n, layout.n);
    for (auto [from, to] : layout.edges) alpha(to - 1, from - 1) = rng.uniform(range.first, range.second);
    for (int i = 0; i < layout.n; ++i) alpha(i, i) = rng.uniform(range.first, range.second);
    return make_hawkes_params(Eigen::VectorXd::Ones(layout.n), std::move(alpha),
                              Eigen::MatrixXd::Ones(layout.n, layout.n));
}

inline std::variant<VarParams, HawkesParams> sample_experiment_params(
    ExperimentId id, std::uint64_t seed, const SamplerBounds& bounds = {}) {
    Rng rng(seed);
    if (id == ExperimentId::h1) return sample_h1_params(rng, bounds);
    if (id == ExperimentId::e6)
        throw argument_error("E6 uses a fixed generator and has no sampled parameters");
    return sample_var_experiment_params(id, rng, bounds);
}

// ===========================================================================
// The fixed nonlinear generator (E6). Four coordinates: an autonomous
// bounded instrument, a treatment driven nonlinearly by the instrument, a
// linear outcome equation, and an autonomous confounder that modulates the
// treatment/outcome noise. The outcome equation has direct effect 0.5 and
// self-effect 0.6, so the normalized effect is exactly 1.25.
// ===========================================================================

inline constexpr double kE6TrueEffect = 1.25;
inline constexpr long kE6BurnIn = 1000;

inline SeriesData simulate_e6(long len, std::uint64_t seed, double noise_std = 0.25) {
    if (len < 1) throw argument_error("series length must be at least 1");
    Rng rng(seed);
    double xi = 0.0, xa = 0.0, xb = 0.0, xu = 0.0;
    Eigen::MatrixXd out(len, 4);
    long written = 0;
    for (long t = 0; t < kE6BurnIn + len; ++t) {
        const double ei = noise_std * rng.normal();
        const double eu = noise_std * rng.normal();
        const double ea = noise_std * rng.normal();
        const double eb = noise_std * rng.normal();
        const double next_i = -1.0 / (1.0 + xi * xi) + ei;
        const double next_u = std::exp(xu) / (1.0 + std::exp(xu)) + eu;
        const double next_a = -3.0 / (1.0 + std::exp(xi)) - 0.5 * xa + xu * ea;
        const double next_b = 0.5 * xa + 0.6 * xb + xu * eb;
        xi = next_i;
        xu = next_u;
        xa = next_a;
        xb = next_b;
        if (t >= kE6BurnIn) {
            out(written, 0) = xi;
            out(written, 1) = xa;
            out(written, 2) = xb;
            out(written, 3) = xu;
            ++written;
        }
    }
    return SeriesData{std::move(out)};
}

// ===========================================================================
// Replication harness.
// ===========================================================================

inline constexpr double kH1BaselineRate = 1.0;
inline constexpr double kH1DefaultHorizon = 8000.0;
inline constexpr double kH1WindowTimeConstants = 5.0;

struct ExperimentSpec {
    ExperimentId id = ExperimentId::e1;
    double size = 10000.0; // series length N, or horizon T for H1
    int reps = 100;
    std::uint64_t seed = 1;
    SamplerBounds overrides;
};

struct ExperimentDraw {
    bool failed = false;
    std::string error;
    Eigen::MatrixXd truth;
    Eigen::MatrixXd estimate;
    double outcome_self_coeff = 0.0; // phi(B, B) of the draw when B is a single process
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::vector<ExperimentDraw> draws;
    int failures = 0;
    double mse = 0.0;
    double range_lo = 0.0;
    double range_hi = 0.0;
};

namespace detail {

/// Estimator configuration used for every series experiment: the
/// prewhitened plug-in estimator with automatic bandwidth.
inline LrcovConfig experiment_lrcov_config() {
    LrcovConfig cfg;
    cfg.prewhiten = true;
    return cfg;
}

inline SeriesData observed_series(const SeriesData& x, int observed) {
    return SeriesData{x.values.leftCols(observed)};
}

inline EventLog observed_events(EventLog log, int observed) {
    log.events.resize(static_cast<std::size_t>(observed));
    return log;
}

inline ExperimentDraw run_single_rep(const ExperimentSpec& spec, const ExperimentLayout& layout,
                                     long rep) {
    const std::uint64_t rep_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(rep));
    Rng sampler_rng(derive_seed(rep_seed, 0));
    const std::uint64_t sim_seed = derive_seed(rep_seed, 1);
    const IvProblem prob = experiment_problem(layout);

    ExperimentDraw draw;
    try {
        if (spec.id == ExperimentId::h1) {
            const HawkesParams params = sample_h1_params(sampler_rng, spec.overrides);
            const Eigen::MatrixXd phi = params.kernel_integral();
            draw.truth = normalized_effect(phi, layout.treatments, layout.outcomes);
            draw.outcome_self_coeff = submatrix(phi, layout.outcomes, layout.outcomes)(0, 0);
            // window and burn-in measured in kernel time constants; a window
            // of a few constants captures the covariance mass at far lower
            // variance than the horizon-based consistency rule
            const double time_constant = 1.0 / min_active_decay(params);
            const double burn = 10.0 * time_constant;
            EventLog log = simulate_hawkes(params, spec.size + burn, sim_seed);
            log = observed_events(discard_prefix(log, burn), layout.observed_count());
            const double h = kH1WindowTimeConstants * time_constant;
            draw.estimate = iv_estimate_events(log, prob, h).estimate;
        } else if (spec.id == ExperimentId::e6) {
            draw.truth = Eigen::MatrixXd::Constant(1, 1, kE6TrueEffect);
            draw.outcome_self_coeff = 0.6;
            const SeriesData x = simulate_e6(static_cast<long>(spec.size), sim_seed);
            draw.estimate = iv_estimate_series(observed_series(x, layout.observed_count()), prob,
                                               experiment_lrcov_config())
                                .estimate;
        } else {
            const VarParams params = sample_var_experiment_params(spec.id, sampler_rng, spec.overrides);
            draw.truth = normalized_effect(params, layout.treatments, layout.outcomes);
            if (layout.outcomes.size() == 1)
                draw.outcome_self_coeff =
                    submatrix(params.phi_total(), layout.outcomes, layout.outcomes)(0, 0);
            const SeriesData x = simulate_var(params, static_cast<long>(spec.size), 1000, sim_seed);
            draw.estimate = iv_estimate_series(observed_series(x, layout.observed_count()), prob,
                                               experiment_lrcov_config())
                                .estimate;
        }
    } catch (const std::exception& e) {
        draw.failed = true;
        draw.error = e.what();
    }
    return draw;
}

} // namespace detail

/// Run all replications of an experiment. Replications are independent
/// (per-rep seeds are split from the master seed) and run in parallel;
/// aggregation is done afterwards in index order with Kahan summation, so
/// the report is bit-identical for any thread count.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
    if (spec.reps < 1) throw argument_error("need at least one replication");
    if (spec.size < 1.0) throw argument_error("series length / horizon must be at least 1");
    const ExperimentLayout layout = experiment_layout(spec.id);

    ExperimentReport report;
    report.spec = spec;
    report.draws.resize(static_cast<std::size_t>(spec.reps));
    parallel_for(spec.reps, [&](long rep) {
        report.draws[static_cast<std::size_t>(rep)] = detail::run_single_rep(spec, layout, rep);
    });

    double sum = 0.0, compensation = 0.0;
    long successes = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& draw : report.draws) {
        if (draw.failed) {
            ++report.failures;
            continue;
        }
        ++successes;
        const double sq = (draw.estimate - draw.truth).squaredNorm();
        const double adjusted = sq - compensation;
        const double next = sum + adjusted;
        compensation = (next - sum) - adjusted;
        sum = next;
        lo = std::min(lo, draw.truth.minCoeff());
        hi = std::max(hi, draw.truth.maxCoeff());
    }
    report.mse = successes > 0 ? sum / static_cast<double>(successes) : 0.0;
    report.range_lo = successes > 0 ? lo : 0.0;
    report.range_hi = successes > 0 ? hi : 0.0;
    return report;
}

// ===========================================================================
// Accuracy sweep over the outcome's self-feedback coefficient.
// ===========================================================================

struct SweepRow {
    double phi33 = 0.0;
    double abs_err = 0.0;
    double log_abs_err = 0.0;
};

struct SweepBin {
    double lo = 0.0;
    double hi = 0.0;
    long count = 0;
    double median_log_abs_err = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::vector<SweepBin> bins;
};

namespace detail {

inline double median_of(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

} // namespace detail

/// Per-rep estimation error against the outcome self-feedback coefficient,
/// with bin medians of log |error| over |phi33| for the qualitative
/// accuracy-degradation picture.
inline SweepTable sweep_e7(const ExperimentSpec& spec, int bins) {
    if (spec.id != ExperimentId::e7) throw argument_error("sweep is defined for experiment E7");
    if (bins < 1) throw argument_error("need at least one bin");
    const ExperimentReport report = run_experiment(spec);

    SweepTable table;
    for (const auto& draw : report.draws) {
        if (draw.failed) continue;
        SweepRow row;
        row.phi33 = draw.outcome_self_coeff;
        row.abs_err = std::abs(draw.estimate(0, 0) - draw.truth(0, 0));
        row.log_abs_err = std::log(std::max(row.abs_err, 1e-300));
        table.rows.push_back(row);
    }

    const double diag_hi = spec.overrides.diagonal ? std::max(std::abs(spec.overrides.diagonal->first),
                                                              std::abs(spec.overrides.diagonal->second))
                                                   : 0.85;
    table.bins.resize(static_cast<std::size_t>(bins));
    std::vector<std::vector<double>> bucket(static_cast<std::size_t>(bins));
    for (const auto& row : table.rows) {
        int b = static_cast<int>(std::abs(row.phi33) / diag_hi * bins);
        b = std::clamp(b, 0, bins - 1);
        bucket[static_cast<std::size_t>(b)].push_back(row.log_abs_err);
    }
    for (int b = 0; b < bins; ++b) {
        auto& bin = table.bins[static_cast<std::size_t>(b)];
        bin.lo = diag_hi * b / bins;
        bin.hi = diag_hi * (b + 1) / bins;
        bin.count = static_cast<long>(bucket[static_cast<std::size_t>(b)].size());
        bin.median_log_abs_err = detail::median_of(bucket[static_cast<std::size_t>(b)]);
    }
    return table;
}

// ===========================================================================
// Report serialization: a per-rep CSV and a one-line summary mirroring the
// (id, N, m, MSE, R) reporting convention.
// ===========================================================================

inline std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "# experiment=" << to_string(report.spec.id) << "\n";
    out << "# size=" << format_double(report.spec.size) << "\n";
    out << "# reps=" << report.spec.reps << "\n";
    out << "# seed=" << report.spec.seed << "\n";
    if (report.spec.id == ExperimentId::h1) {
        out << "# baseline_rate=" << format_double(kH1BaselineRate) << "\n";
        out << "# burn_in_time=10\n";
    }
    Eigen::Index truth_size = 0;
    for (const auto& draw : report.draws)
        if (!draw.failed) {
            truth_size = draw.truth.size();
            break;
        }
    out << "rep,status";
    for (Eigen::Index k = 1; k <= truth_size; ++k) out << ",true_" << k;
    for (Eigen::Index k = 1; k <= truth_size; ++k) out << ",estimate_" << k;
    out << ",squared_error\n";
    for (std::size_t rep = 0; rep < report.draws.size(); ++rep) {
        const auto& draw = report.draws[rep];
        out << (rep + 1) << ',' << (draw.failed ? "failed" : "ok");
        if (draw.failed) {
            for (Eigen::Index k = 0; k < 2 * truth_size + 1; ++k) out << ',';
        } else {
            for (Eigen::Index k = 0; k < truth_size; ++k) out << ',' << format_double(draw.truth(k));
            for (Eigen::Index k = 0; k < truth_size; ++k) out << ',' << format_double(draw.estimate(k));
            out << ',' << format_double((draw.estimate - draw.truth).squaredNorm());
        }
        out << "\n";
    }
    return out.str();
}

inline std::string report_summary_csv(const ExperimentReport& report, bool header = true) {
    std::ostringstream out;
    if (header) out << "experiment,size,reps,mse,range_lo,range_hi,failures\n";
    out << to_string(report.spec.id) << ',' << format_double(report.spec.size) << ','
        << report.spec.reps << ',' << format_double(report.mse) << ','
        << format_double(report.range_lo) << ',' << format_double(report.range_hi) << ','
        << report.failures << "\n";
    return out.str();
}

inline std::string sweep_to_csv(const SweepTable& table) {
    std::ostringstream out;
    out << "phi33,abs_err,log_abs_err\n";
    for (const auto& row : table.rows)
        out << format_double(row.phi33) << ',' << format_double(row.abs_err) << ','
            << format_double(row.log_abs_err) << "\n";
    return out.str();
}

inline std::string sweep_bins_csv(const SweepTable& table) {
    std::ostringstream out;
    out << "abs_phi33_lo,abs_phi33_hi,count,median_log_abs_err\n";
    for (const auto& bin : table.bins)
        out << format_double(bin.lo) << ',' << format_double(bin.hi) << ',' << bin.count << ','
            << format_double(bin.median_log_abs_err) << "\n";
    return out.str();
}

} // namespace ivproc
