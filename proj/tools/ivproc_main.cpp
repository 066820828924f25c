// Command-line front end: simulation, covariance estimation, instrumental
// estimation, graph checks, and the replication benchmark.
//
// Exit codes: 0 success, 1 domain/data errors, 2 usage errors.

#include "ivproc/ivproc.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace ivproc;

NodeSet node_set_from(const std::vector<int>& nodes) {
    return NodeSet(nodes);
}

Kernel parse_kernel(const std::string& name) {
    if (name == "bartlett") return Kernel::bartlett;
    if (name == "truncated") return Kernel::truncated;
    if (name == "qs" || name == "quadratic-spectral") return Kernel::quadratic_spectral;
    throw argument_error("unknown kernel '" + name + "' (bartlett, truncated, quadratic-spectral)");
}

const char* kernel_name(Kernel k) {
    switch (k) {
    case Kernel::bartlett: return "bartlett";
    case Kernel::truncated: return "truncated";
    case Kernel::quadratic_spectral: return "quadratic-spectral";
    }
    return "?";
}

LrcovConfig make_lrcov_config(const std::string& kernel, const std::string& bandwidth,
                              bool no_prewhiten) {
    LrcovConfig cfg;
    cfg.kernel = parse_kernel(kernel);
    if (bandwidth != "auto") cfg.bandwidth = detail::parse_double(bandwidth);
    cfg.prewhiten = !no_prewhiten;
    return cfg;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        detail::spit(out_path, content);
}

struct CommonModelArgs {
    std::string config_path;
};

// ---------------------------------------------------------------------------

struct SimulateVarArgs {
    std::string config_path;
    long len = 1000;
    long burn_in = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

int run_simulate_var(const SimulateVarArgs& args) {
    const ConfigDoc doc = load_config_file(args.config_path);
    const VarParams model = var_params_from_config(doc);
    const SeriesData x = simulate_var(model, args.len, args.burn_in, args.seed);
    emit(args.out, series_to_csv(x));
    return 0;
}

struct SimulateHawkesArgs {
    std::string config_path;
    double horizon = 1000.0;
    double burn_in = 0.0;
    std::uint64_t seed = 1;
    std::uint64_t max_events = 50'000'000;
    std::string out;
};

int run_simulate_hawkes(const SimulateHawkesArgs& args) {
    const ConfigDoc doc = load_config_file(args.config_path);
    const HawkesParams model = hawkes_params_from_config(doc);
    EventLog log = simulate_hawkes(model, args.horizon + args.burn_in, args.seed, args.max_events);
    if (args.burn_in > 0.0) log = discard_prefix(log, args.burn_in);
    emit(args.out, event_log_to_csv(log));
    return 0;
}

struct EstimateCovArgs {
    std::string input;
    std::string kernel = "bartlett";
    std::string bandwidth = "auto";
    double window_h = 0.0; // 0 = default rule (event input only)
    bool no_demean = false;
    bool no_prewhiten = false;
    std::string out;
};

int run_estimate_cov(const EstimateCovArgs& args) {
    const std::string text = detail::slurp(args.input);
    if (csv_looks_like_event_log(text)) {
        const EventLog log = event_log_from_csv(text);
        Eigen::VectorXd rate_hat(log.dim());
        for (int i = 0; i < log.dim(); ++i)
            rate_hat(i) =
                static_cast<double>(log.events[static_cast<std::size_t>(i)].size()) / log.horizon;
        const double h =
            args.window_h > 0.0 ? args.window_h : default_window_half_width(log.horizon, rate_hat);
        const CumulantEstimates est = estimate_hawkes_cumulants(log, h);
        IntCov c;
        c.c = est.c_hat;
        c.provenance = CovProvenance::estimated;
        c.labels = default_labels(log.dim());
        std::string body = intcov_to_csv(c);
        body.insert(0, "# window_h=" + format_double(h) + "\n");
        emit(args.out, body);
        return 0;
    }
    const SeriesData x = series_from_csv(text);
    LrcovConfig cfg = make_lrcov_config(args.kernel, args.bandwidth, args.no_prewhiten);
    cfg.demean = !args.no_demean;
    LrcovDiagnostics diag;
    const IntCov c = long_run_cov(x, cfg, &diag);
    std::string body = intcov_to_csv(c);
    body.insert(0, "# kernel=" + std::string(kernel_name(cfg.kernel)) +
                       " bandwidth=" + format_double(diag.bandwidth) +
                       (diag.bandwidth_fallback ? " (fallback)" : "") + "\n");
    emit(args.out, body);
    return 0;
}

struct IvEstimateArgs {
    std::string input;
    std::vector<int> instruments, treatments, outcomes;
    std::string kernel = "bartlett";
    std::string bandwidth = "auto";
    double window_h = 0.0;
    std::string weight = "identity";
    double rank_tol = 0.0; // 0 = relative default
    bool no_prewhiten = false;
    std::string out;
};

int run_iv_estimate(const IvEstimateArgs& args) {
    IvProblem prob;
    prob.instruments = node_set_from(args.instruments);
    prob.treatments = node_set_from(args.treatments);
    prob.outcomes = node_set_from(args.outcomes);
    if (args.rank_tol > 0.0) prob.rank_tol = args.rank_tol;
    if (args.weight != "identity") {
        const ConfigDoc doc = load_config_file(args.weight);
        const ConfigValue& value = doc.has("weight") ? doc.require("weight") : doc.require("w");
        const int k = static_cast<int>(prob.instruments.size());
        prob.weight = matrix_from_config(value, k, k);
    } else if (prob.instruments.size() > prob.treatments.size()) {
        const auto k = static_cast<Eigen::Index>(prob.instruments.size());
        prob.weight = Eigen::MatrixXd::Identity(k, k);
    }

    const std::string text = detail::slurp(args.input);
    EstimationResult result;
    std::string estimator_lines;
    if (csv_looks_like_event_log(text)) {
        const EventLog log = event_log_from_csv(text);
        Eigen::VectorXd rate_hat(log.dim());
        for (int i = 0; i < log.dim(); ++i)
            rate_hat(i) =
                static_cast<double>(log.events[static_cast<std::size_t>(i)].size()) / log.horizon;
        const double h =
            args.window_h > 0.0 ? args.window_h : default_window_half_width(log.horizon, rate_hat);
        result = iv_estimate_events(log, prob, h);
        estimator_lines = "window_h = " + format_double(h) + "\n";
    } else {
        const SeriesData x = series_from_csv(text);
        LrcovDiagnostics diag;
        result = iv_estimate_series(
            x, prob, make_lrcov_config(args.kernel, args.bandwidth, args.no_prewhiten), &diag);
        estimator_lines = "kernel = \"" + std::string(kernel_name(parse_kernel(args.kernel))) +
                          "\"\nbandwidth = " + format_double(diag.bandwidth) +
                          "\nbandwidth_fallback = \"" + (diag.bandwidth_fallback ? "true" : "false") +
                          "\"\n";
    }

    std::string doc;
    doc += "estimate = " + matrix_to_config(result.estimate) + "\n";
    doc += "method = \"" + std::string(to_string(result.method)) + "\"\n";
    doc += "smallest_singular_value = " + format_double(result.diagnostics.smallest_singular_value) + "\n";
    doc += "largest_singular_value = " + format_double(result.diagnostics.largest_singular_value) + "\n";
    doc += "rank_tol = " + format_double(result.diagnostics.rank_tol_used) + "\n";
    doc += estimator_lines;
    emit(args.out, doc);
    return 0;
}

struct CheckGraphArgs {
    std::string config_path;
    std::vector<int> instruments, treatments, outcomes;
};

int run_check_graph(const CheckGraphArgs& args) {
    const ConfigDoc doc = load_config_file(args.config_path);
    const CausalGraph graph = graph_from_config(doc);
    const ValidityReport report =
        check_instrument(graph, node_set_from(args.instruments), node_set_from(args.treatments),
                         node_set_from(args.outcomes));
    std::cout << "instruments_exogenous = \"" << (report.instruments_exogenous ? "true" : "false")
              << "\"\n";
    std::cout << "reachability_condition = \"" << (report.reachability_condition ? "true" : "false")
              << "\"\n";
    std::cout << "rank_condition_checked = \"false\"\n";
    std::cout << "graph_valid = \"" << (report.graph_valid() ? "true" : "false") << "\"\n";
    return report.graph_valid() ? 0 : 1;
}

struct BenchArgs {
    std::string experiment = "E1";
    double size = -1.0; // negative = per-experiment default
    int reps = 100;
    std::uint64_t seed = 1;
    int bins = 8;
    std::string out;
    std::string summary_out;
    std::string bins_out;
    std::vector<double> diag_range;
    std::vector<double> offdiag_range;
    std::vector<double> alpha_range;
};

ExperimentSpec spec_from_args(const BenchArgs& args) {
    ExperimentSpec spec;
    spec.id = parse_experiment_id(args.experiment);
    spec.size = args.size > 0.0 ? args.size
                                : (spec.id == ExperimentId::h1 ? kH1DefaultHorizon : 10000.0);
    spec.reps = args.reps;
    spec.seed = args.seed;
    if (args.diag_range.size() == 2)
        spec.overrides.diagonal = std::pair{args.diag_range[0], args.diag_range[1]};
    if (args.offdiag_range.size() == 2)
        spec.overrides.edge_magnitude = std::pair{args.offdiag_range[0], args.offdiag_range[1]};
    if (args.alpha_range.size() == 2)
        spec.overrides.excitation = std::pair{args.alpha_range[0], args.alpha_range[1]};
    return spec;
}

int run_bench(const BenchArgs& args) {
    const ExperimentSpec spec = spec_from_args(args);
    const ExperimentReport report = run_experiment(spec);
    if (!args.out.empty()) detail::spit(args.out, report_to_csv(report));
    const std::string summary = report_summary_csv(report);
    std::cout << summary;
    if (!args.summary_out.empty()) detail::spit(args.summary_out, summary);
    return 0;
}

int run_sweep(const BenchArgs& args) {
    const ExperimentSpec spec = spec_from_args(args);
    const SweepTable table = sweep_e7(spec, args.bins);
    if (!args.out.empty()) detail::spit(args.out, sweep_to_csv(table));
    const std::string bins = sweep_bins_csv(table);
    std::cout << bins;
    if (!args.bins_out.empty()) detail::spit(args.bins_out, bins);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Instrumental-process estimation for time series and point processes"};
    app.require_subcommand(1);

    SimulateVarArgs sim_var;
    auto* cmd_sim_var = app.add_subcommand("simulate-var", "Simulate an autoregressive model");
    cmd_sim_var->add_option("--config", sim_var.config_path, "Model config document")->required();
    cmd_sim_var->add_option("--n", sim_var.len, "Number of time points")->required();
    cmd_sim_var->add_option("--burn-in", sim_var.burn_in, "Discarded initial points");
    cmd_sim_var->add_option("--seed", sim_var.seed, "RNG seed");
    cmd_sim_var->add_option("--out", sim_var.out, "Output CSV (stdout if omitted)");

    SimulateHawkesArgs sim_hawkes;
    auto* cmd_sim_hawkes = app.add_subcommand("simulate-hawkes", "Simulate a linear Hawkes model");
    cmd_sim_hawkes->add_option("--config", sim_hawkes.config_path, "Model config document")->required();
    cmd_sim_hawkes->add_option("--horizon", sim_hawkes.horizon, "Observation horizon")->required();
    cmd_sim_hawkes->add_option("--burn-in", sim_hawkes.burn_in, "Discarded initial time span");
    cmd_sim_hawkes->add_option("--seed", sim_hawkes.seed, "RNG seed");
    cmd_sim_hawkes->add_option("--max-events", sim_hawkes.max_events, "Event cap");
    cmd_sim_hawkes->add_option("--out", sim_hawkes.out, "Output CSV (stdout if omitted)");

    EstimateCovArgs est_cov;
    auto* cmd_est_cov = app.add_subcommand("estimate-cov", "Estimate the integrated covariance");
    cmd_est_cov->add_option("--input", est_cov.input, "Series or event-log CSV")->required();
    cmd_est_cov->add_option("--kernel", est_cov.kernel, "bartlett | truncated | quadratic-spectral");
    cmd_est_cov->add_option("--bandwidth", est_cov.bandwidth, "Positive number or 'auto'");
    cmd_est_cov->add_option("--window-H", est_cov.window_h, "Window half-width (event input)");
    cmd_est_cov->add_flag("--no-demean", est_cov.no_demean, "Skip demeaning (series input)");
    cmd_est_cov->add_flag("--no-prewhiten", est_cov.no_prewhiten,
                          "Plain kernel sum without the first-order filter");
    cmd_est_cov->add_option("--out", est_cov.out, "Output CSV (stdout if omitted)");

    IvEstimateArgs iv_args;
    auto* cmd_iv = app.add_subcommand("iv-estimate", "Estimate normalized effects via instruments");
    cmd_iv->add_option("--input", iv_args.input, "Series or event-log CSV")->required();
    cmd_iv->add_option("--instruments", iv_args.instruments, "Instrument process indices")
        ->required()
        ->delimiter(',');
    cmd_iv->add_option("--treatments", iv_args.treatments, "Treatment process indices")
        ->required()
        ->delimiter(',');
    cmd_iv->add_option("--outcomes", iv_args.outcomes, "Outcome process indices")
        ->required()
        ->delimiter(',');
    cmd_iv->add_option("--kernel", iv_args.kernel, "Long-run covariance kernel (series input)");
    cmd_iv->add_option("--bandwidth", iv_args.bandwidth, "Positive number or 'auto'");
    cmd_iv->add_option("--window-H", iv_args.window_h, "Window half-width (event input)");
    cmd_iv->add_option("--weight", iv_args.weight, "'identity' or config file with a weight matrix");
    cmd_iv->add_option("--rank-tol", iv_args.rank_tol, "Absolute singular-value threshold");
    cmd_iv->add_flag("--no-prewhiten", iv_args.no_prewhiten,
                     "Plain kernel sum without the first-order filter");
    cmd_iv->add_option("--out", iv_args.out, "Result document (stdout if omitted)");

    CheckGraphArgs check_args;
    auto* cmd_check = app.add_subcommand("check-graph", "Graph-level instrument validity checks");
    cmd_check->add_option("--config", check_args.config_path, "Graph config document")->required();
    cmd_check->add_option("--instruments", check_args.instruments, "Instrument process indices")
        ->required()
        ->delimiter(',');
    cmd_check->add_option("--treatments", check_args.treatments, "Treatment process indices")
        ->required()
        ->delimiter(',');
    cmd_check->add_option("--outcomes", check_args.outcomes, "Outcome process indices")
        ->required()
        ->delimiter(',');

    BenchArgs bench_args;
    auto* cmd_bench = app.add_subcommand("bench", "Replication benchmark");
    cmd_bench->require_subcommand(1);
    auto add_bench_options = [&](CLI::App* cmd) {
        cmd->add_option("--experiment", bench_args.experiment, "E1..E7 or H1")->required();
        cmd->add_option("--n", bench_args.size, "Series length (or horizon for H1)");
        cmd->add_option("--m", bench_args.reps, "Number of replications");
        cmd->add_option("--seed", bench_args.seed, "Master seed");
        cmd->add_option("--out", bench_args.out, "Per-replication CSV");
        cmd->add_option("--diag-range", bench_args.diag_range, "Override diagonal interval lo hi")
            ->expected(2);
        cmd->add_option("--offdiag-range", bench_args.offdiag_range,
                        "Override edge magnitude interval lo hi")
            ->expected(2);
        cmd->add_option("--alpha-range", bench_args.alpha_range,
                        "Override excitation interval lo hi")
            ->expected(2);
    };
    auto* cmd_bench_run = cmd_bench->add_subcommand("run", "Run replications and report MSE");
    add_bench_options(cmd_bench_run);
    cmd_bench_run->add_option("--summary-out", bench_args.summary_out, "Summary CSV");
    auto* cmd_bench_sweep =
        cmd_bench->add_subcommand("sweep", "Error sweep over the outcome self-feedback");
    add_bench_options(cmd_bench_sweep);
    cmd_bench_sweep->add_option("--bins", bench_args.bins, "Number of bins");
    cmd_bench_sweep->add_option("--bins-out", bench_args.bins_out, "Bin-median CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(cmd_sim_var)) return run_simulate_var(sim_var);
        if (app.got_subcommand(cmd_sim_hawkes)) return run_simulate_hawkes(sim_hawkes);
        if (app.got_subcommand(cmd_est_cov)) return run_estimate_cov(est_cov);
        if (app.got_subcommand(cmd_iv)) return run_iv_estimate(iv_args);
        if (app.got_subcommand(cmd_check)) return run_check_graph(check_args);
        if (app.got_subcommand(cmd_bench)) {
            if (cmd_bench->got_subcommand(cmd_bench_run)) return run_bench(bench_args);
            return run_sweep(bench_args);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
