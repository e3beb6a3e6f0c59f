#include "jpr/cli.hpp"

#include "jpr/data.hpp"
#include "jpr/error.hpp"
#include "jpr/estimator.hpp"
#include "jpr/metrics.hpp"
#include "jpr/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace jpr::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* kExitCodeHelp =
    "Exit codes: 0 success, 1 input or configuration error, "
    "2 solver did not converge (outputs are still written).";

struct Options {
    std::string input;
    std::string output;
    std::optional<double> lambda;
    std::string lambda_rule;
    double lambda_c = 1.0;
    int cv_folds = 5;
    std::string ic_criterion = "bic";
    std::string loss = "quadratic";
    std::optional<double> huber_rho;
    double alpha = 0.0;
    std::optional<double> beta;
    std::optional<double> tol;
    std::optional<int> max_iter;
    double lasso_tol = 1e-6;
    int lasso_max_iter = 1000;
    std::uint64_t seed = 0;
    bool no_center = false;
    bool standardize = false;
    std::string header = "auto";
    std::string format;
    double threshold = 0.0;

    // bench
    std::string model = "er";
    Eigen::Index p = 20;
    Eigen::Index n = 500;
    int reps = 1;
    double edge_prob = 0.05;
    double hub_fraction = 0.20;
    int min_deg = 1;
    int max_deg = 3;
    std::string estimators = "jpr,naive,sample-inverse";
    int fixed_iterations = 100;

    // network
    std::string input_kind = "q";
};

void add_model_options(CLI::App& app, Options& o) {
    app.add_option("--lambda", o.lambda, "Fixed penalty for every feature (implies --lambda-rule fixed)");
    app.add_option("--lambda-rule", o.lambda_rule, "Penalty selection: fixed | theory | cv | ic")
        ->check(CLI::IsMember({"fixed", "theory", "cv", "ic"}));
    app.add_option("--lambda-c", o.lambda_c, "Constant c in lambda = c*sqrt(log(p)/n)")->capture_default_str();
    app.add_option("--cv-folds", o.cv_folds, "Cross-validation folds")->capture_default_str();
    app.add_option("--ic", o.ic_criterion, "Information criterion: aic | bic")->capture_default_str()
        ->check(CLI::IsMember({"aic", "bic"}));
    app.add_option("--loss", o.loss, "Regression loss: quadratic | huber")->capture_default_str()
        ->check(CLI::IsMember({"quadratic", "huber"}));
    app.add_option("--huber-rho", o.huber_rho, "Huber transition point (default 1.345)");
    app.add_option("--alpha", o.alpha, "Lower eigenvalue bound")->capture_default_str();
    app.add_option("--beta", o.beta, "Upper eigenvalue bound (default: unbounded)");
    app.add_option("--tol", o.tol, "Joint solver stationarity tolerance");
    app.add_option("--max-iter", o.max_iter, "Joint solver iteration cap");
    app.add_option("--lasso-tol", o.lasso_tol, "Stage-1 lasso tolerance")->capture_default_str();
    app.add_option("--lasso-max-iter", o.lasso_max_iter, "Stage-1 lasso iteration cap")->capture_default_str();
    app.add_option("--seed", o.seed, "Seed for fold assignment and synthetic data")->capture_default_str();
    app.add_flag("--no-center", o.no_center, "Do not center columns before estimation");
    app.add_flag("--standardize", o.standardize, "Scale columns to unit variance");
}

LambdaRule make_rule(const Options& o) {
    std::string rule = o.lambda_rule;
    if (rule.empty()) rule = o.lambda ? "fixed" : "theory";
    if (rule == "fixed") {
        if (!o.lambda) throw Error(ErrorKind::InvalidArgument, "--lambda-rule fixed requires --lambda");
        return FixedLambda{*o.lambda};
    }
    if (o.lambda) throw Error(ErrorKind::InvalidArgument, "--lambda only applies to --lambda-rule fixed");
    if (rule == "theory") return TheoryLambda{o.lambda_c};
    if (rule == "cv") return CvLambda{std::nullopt, o.cv_folds, o.seed};
    return IcLambda{std::nullopt, o.ic_criterion == "aic" ? InfoCriterion::Aic : InfoCriterion::Bic};
}

SolverConfig make_config(const Options& o, double default_tol) {
    SolverConfig cfg;
    if (o.huber_rho && o.loss != "huber") {
        throw Error(ErrorKind::InvalidArgument, "--huber-rho requires --loss huber");
    }
    if (o.loss == "huber") cfg.loss = Loss::huber(o.huber_rho.value_or(Loss{}.rho));
    cfg.alpha = o.alpha;
    if (o.beta) cfg.beta = *o.beta;
    cfg.tol = o.tol.value_or(default_tol);
    if (o.max_iter) cfg.max_iter = *o.max_iter;
    if (!(cfg.alpha >= 0.0) || !(cfg.beta > cfg.alpha)) {
        throw Error(ErrorKind::InvalidArgument, "need 0 <= --alpha < --beta");
    }
    if (!(cfg.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "--tol must be > 0");
    if (cfg.max_iter < 1) throw Error(ErrorKind::InvalidArgument, "--max-iter must be >= 1");
    return cfg;
}

FitOptions make_fit_options(const Options& o) {
    FitOptions f;
    f.center = !o.no_center;
    f.standardize = o.standardize;
    f.lasso.tol = o.lasso_tol;
    f.lasso.max_iter = o.lasso_max_iter;
    return f;
}

DataMatrix read_data(const Options& o) {
    if (o.input.empty()) throw Error(ErrorKind::InvalidArgument, "--input is required");
    bool header = false;
    if (o.header == "yes") header = true;
    else if (o.header == "auto") header = csv_has_header(o.input);
    return load_csv(o.input, header);
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_edges(std::ostream& out, const std::vector<Edge>& list, const DataMatrix& labels) {
    out << "source\ttarget\tweight\n";
    for (const auto& e : list) {
        out << labels.feature_label(e.j) << '\t' << labels.feature_label(e.k) << '\t'
            << format_real(e.weight) << '\n';
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
    f << text;
    if (!f) throw Error(ErrorKind::Io, "write failure on " + path.string());
}

json diagnostics_json(const JprEstimate& est, const DataMatrix& data) {
    json stage1 = json::array();
    for (std::size_t j = 0; j < est.stage1.size(); ++j) {
        const auto& s = est.stage1[j];
        stage1.push_back({{"feature", data.feature_label(static_cast<Eigen::Index>(j))},
                          {"lambda", s.lambda},
                          {"tau_sq", s.tau_sq},
                          {"iterations", s.iterations},
                          {"converged", s.converged},
                          {"support", s.support_size()}});
    }
    return {
        {"p", data.p()},
        {"n", data.n()},
        {"tau", vector_json(est.tau)},
        {"tau_sq", vector_json(est.tau_sq)},
        {"lambdas", vector_json(est.lambdas)},
        {"iterations", est.solve_diag.iterations},
        {"residual", est.solve_diag.residual},
        {"converged", est.solve_diag.converged},
        {"diagonal_deviation", est.solve_diag.diagonal_deviation},
        {"zeroed_max", est.solve_diag.zeroed_max},
        {"lipschitz", est.solve_diag.lipschitz},
        {"gamma", est.solve_diag.gamma},
        {"eta", est.solve_diag.eta},
        {"stage1", stage1},
    };
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
    const std::string format = o.format.empty() ? "matrix-csv" : o.format;
    if (format != "matrix-csv" && format != "json" && format != "edge-tsv") {
        throw Error(ErrorKind::InvalidArgument, "--format must be matrix-csv, json or edge-tsv");
    }
    if (o.output.empty()) throw Error(ErrorKind::InvalidArgument, "--output is required");
    const auto rule = make_rule(o);
    const auto config = make_config(o, SolverConfig{}.tol);
    const DataMatrix data = read_data(o);
    const auto est = fit(data, rule, config, make_fit_options(o));

    const std::string prefix = o.output;
    std::vector<std::string> written;
    if (format == "matrix-csv") {
        write_matrix_csv(prefix + ".omega.csv", est.omega_hat.values());
        write_matrix_csv(prefix + ".q.csv", est.q_hat.values());
        written = {prefix + ".omega.csv", prefix + ".q.csv"};
    } else if (format == "json") {
        json doc = {{"omega", matrix_json(est.omega_hat.values())},
                    {"q", matrix_json(est.q_hat.values())},
                    {"feature_names", data.feature_names()}};
        write_text(prefix + ".json", doc.dump(2) + "\n");
        written = {prefix + ".json"};
    } else {
        std::ostringstream tsv;
        write_edges(tsv, edges(est.q_hat, o.threshold), data);
        write_text(prefix + ".edges.tsv", tsv.str());
        written = {prefix + ".edges.tsv"};
    }
    write_text(prefix + ".diagnostics.json", diagnostics_json(est, data).dump(2) + "\n");
    written.push_back(prefix + ".diagnostics.json");

    for (const auto& w : written) out << w << '\n';
    if (!est.solve_diag.converged) {
        err << "warning: joint solver stopped after " << est.solve_diag.iterations
            << " iterations without converging (residual " << est.solve_diag.residual << ")\n";
        return kNotConverged;
    }
    return kOk;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream&) {
    const std::string format = o.format.empty() ? "csv" : o.format;
    if (format != "csv" && format != "jsonl") {
        throw Error(ErrorKind::InvalidArgument, "--format must be csv or jsonl for bench");
    }
    PrecisionModelSpec spec;
    spec.p = o.p;
    spec.seed = o.seed;
    if (o.model == "er") spec.kind = ErdosRenyi{o.edge_prob};
    else if (o.model == "ar1") spec.kind = Ar1{};
    else spec.kind = Hub{o.hub_fraction, o.min_deg, o.max_deg};
    validate(spec);
    if (o.n < 2) throw Error(ErrorKind::InvalidArgument, "--n must be >= 2");
    if (o.reps < 1) throw Error(ErrorKind::InvalidArgument, "--reps must be >= 1");

    std::vector<EstimatorKind> kinds;
    std::stringstream ss(o.estimators);
    for (std::string name; std::getline(ss, name, ',');)
        if (!name.empty()) kinds.push_back(estimator_from_string(name));
    if (kinds.empty()) throw Error(ErrorKind::InvalidArgument, "--estimators is empty");

    // Run-to-tolerance timing uses 1e-3 unless overridden.
    const auto config = make_config(o, 1e-3);
    BenchOptions bo;
    bo.fit = make_fit_options(o);
    bo.fixed_iterations = o.fixed_iterations;
    const auto records = run_benchmark({spec}, o.n, o.reps, kinds, make_rule(o), config, bo);

    std::ostringstream buf;
    if (format == "csv") write_bench_csv(buf, records);
    else write_bench_jsonl(buf, records);
    if (o.output.empty()) out << buf.str();
    else write_text(o.output, buf.str());
    return kOk;
}

int cmd_network(const Options& o, std::ostream& out, std::ostream&) {
    if (o.input.empty()) throw Error(ErrorKind::InvalidArgument, "--input is required");
    if (!(o.threshold >= 0.0)) throw Error(ErrorKind::InvalidArgument, "--threshold must be >= 0");
    std::ostringstream tsv;
    if (o.input_kind == "data") {
        const DataMatrix data = read_data(o);
        const auto est = fit(data, make_rule(o), make_config(o, SolverConfig{}.tol), make_fit_options(o));
        write_edges(tsv, edges(est.q_hat, o.threshold), data);
    } else {
        bool header = o.header == "yes" || (o.header == "auto" && csv_has_header(o.input));
        const DataMatrix m = load_csv(o.input, header);
        if (m.n() != m.p()) {
            throw Error(ErrorKind::Shape, "partial correlation matrix must be square, got " +
                                              std::to_string(m.n()) + "x" + std::to_string(m.p()));
        }
        const SymMatrix q(m.values());
        write_edges(tsv, edges(q, o.threshold), m);
    }
    if (o.output.empty()) out << tsv.str();
    else write_text(o.output, tsv.str());
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Joint partial regression: sparse precision and partial correlation estimation"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);
    Options o;

    auto* estimate = app.add_subcommand("estimate", "Estimate precision and partial correlation matrices from a CSV");
    estimate->add_option("--input", o.input, "Data CSV (rows = samples)")->required();
    estimate->add_option("--output", o.output, "Output path prefix")->required();
    estimate->add_option("--format", o.format, "matrix-csv | json | edge-tsv");
    estimate->add_option("--threshold", o.threshold, "Edge magnitude threshold for edge-tsv")->capture_default_str();
    estimate->add_option("--header", o.header, "Header row: auto | yes | no")->capture_default_str()
        ->check(CLI::IsMember({"auto", "yes", "no"}));
    add_model_options(*estimate, o);
    estimate->footer(kExitCodeHelp);

    auto* bench = app.add_subcommand("bench", "Run seeded synthetic benchmarks");
    bench->add_option("--model", o.model, "er | ar1 | hub")->capture_default_str()->check(CLI::IsMember({"er", "ar1", "hub"}));
    bench->add_option("--p", o.p, "Number of features")->capture_default_str();
    bench->add_option("--n", o.n, "Number of samples")->capture_default_str();
    bench->add_option("--reps", o.reps, "Replications")->capture_default_str();
    bench->add_option("--edge-prob", o.edge_prob, "Erdos-Renyi edge probability")->capture_default_str();
    bench->add_option("--hub-fraction", o.hub_fraction, "Fraction of nodes attached to the hub")->capture_default_str();
    bench->add_option("--min-deg", o.min_deg, "Hub model: minimum non-hub degree")->capture_default_str();
    bench->add_option("--max-deg", o.max_deg, "Hub model: maximum non-hub degree")->capture_default_str();
    bench->add_option("--estimators", o.estimators, "Comma list of jpr, naive, sample-inverse")->capture_default_str();
    bench->add_option("--fixed-iterations", o.fixed_iterations, "Steps in the fixed-iteration timing run (0 = off)")->capture_default_str();
    bench->add_option("--output", o.output, "Output file (default: stdout)");
    bench->add_option("--format", o.format, "csv | jsonl");
    add_model_options(*bench, o);
    bench->footer(kExitCodeHelp);

    auto* network = app.add_subcommand("network", "Export a partial correlation network as edge TSV");
    network->add_option("--input", o.input, "Q matrix CSV, or data CSV with --input-kind data")->required();
    network->add_option("--input-kind", o.input_kind, "q | data")->capture_default_str()->check(CLI::IsMember({"q", "data"}));
    network->add_option("--output", o.output, "Output file (default: stdout)");
    network->add_option("--threshold", o.threshold, "Keep edges with |Q_jk| > threshold")->capture_default_str();
    network->add_option("--header", o.header, "Header row: auto | yes | no")->capture_default_str()
        ->check(CLI::IsMember({"auto", "yes", "no"}));
    add_model_options(*network, o);
    network->footer(kExitCodeHelp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: usage: " << e.what() << '\n';
        return kInputError;
    }

    try {
        if (*estimate) return cmd_estimate(o, out, err);
        if (*bench) return cmd_bench(o, out, err);
        return cmd_network(o, out, err);
    } catch (const Error& e) {
        err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace jpr::cli
