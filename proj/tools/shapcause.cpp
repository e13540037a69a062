// Command-line front end: single-explicand attribution (`explain`), the named
// verification experiments (`experiment`), and the marginal evaluation-sample
// emitter (`emit eval-samples`).

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "shapcause/causal.hpp"
#include "shapcause/errors.hpp"
#include "shapcause/experiments.hpp"
#include "shapcause/io.hpp"
#include "shapcause/shapley.hpp"
#include "shapcause/value_function.hpp"

namespace {

// Exit codes: 0 success, 1 numerical failure (tolerance exceeded),
// 2 usage or input error, 3 conditioning infeasible.
constexpr int kExitPass = 0;
constexpr int kExitNumericalFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::string cell;
    std::stringstream ss(text);
    while (std::getline(ss, cell, ',')) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size())
            throw shapcause::InputError(what + ": not a number: '" + cell + "'");
        out.push_back(v);
    }
    if (out.empty()) throw shapcause::InputError(what + ": empty list");
    return out;
}

std::vector<int> parse_indices(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (double v : parse_doubles(text, what)) out.push_back(static_cast<int>(v));
    return out;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        shapcause::write_text_file(out_path, text);
}

struct ExplainArgs {
    std::string model_path;
    std::string explicand_text;
    std::string backend_name = "marginal_empirical";
    std::string data_path;
    std::string gaussian_path;
    std::string scm_path;
    std::string method = "exact";
    int samples = 10000;
    int permutations = 2000;
    std::uint64_t seed = 0;
    double tol_continuous = 0.1;
    bool raw_matched = false;
    std::string output = "json";
    std::string out_path;
};

int run_explain(const ExplainArgs& args) {
    using namespace shapcause;

    ValueFunctionSpec spec{backend_from_name(args.backend_name),
                           model_from_file(args.model_path),
                           parse_doubles(args.explicand_text, "--explicand"),
                           std::nullopt,
                           std::nullopt,
                           args.samples,
                           args.seed,
                           args.tol_continuous,
                           args.raw_matched};

    const int sources = (args.data_path.empty() ? 0 : 1) +
                        (args.gaussian_path.empty() ? 0 : 1) +
                        (args.scm_path.empty() ? 0 : 1);
    if (sources != 1)
        throw std::invalid_argument(
            "exactly one of --data, --gaussian or --scm is required");

    std::vector<std::string> feature_names;
    if (!args.data_path.empty()) {
        spec.data = TabularDataset::from_csv(args.data_path);
        feature_names = spec.data->column_names();
    } else if (!args.gaussian_path.empty()) {
        spec.gaussian = gaussian_from_file(args.gaussian_path);
    } else {
        // The SCM's closed-form observational joint backs the Gaussian
        // backends.
        spec.gaussian = scm_from_file(args.scm_path).observational_distribution();
    }
    if (feature_names.empty())
        for (std::size_t j = 0; j < spec.explicand.size(); ++j)
            feature_names.push_back("x" + std::to_string(j));

    const auto v = make_value_function(std::move(spec));
    AttributionResult result;
    if (args.method == "exact")
        result = shapley_exact(*v);
    else if (args.method == "permutation")
        result = shapley_permutation_sampling(*v, args.permutations, args.seed);
    else
        throw std::invalid_argument("--method must be 'exact' or 'permutation'");

    if (args.output == "json")
        write_output(attribution_to_json(result, feature_names).dump(2) + "\n",
                     args.out_path);
    else if (args.output == "csv")
        write_output(attribution_to_csv(result, feature_names), args.out_path);
    else
        throw std::invalid_argument("--output must be 'json' or 'csv'");
    return kExitPass;
}

struct ExperimentArgs {
    std::string name;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::vector<double> rho;
    std::string output;
    std::string out_path;
    bool quiet = false;
};

int run_experiment_cmd(const ExperimentArgs& args) {
    using namespace shapcause;
    ExperimentParams params;
    params.rho_grid = args.rho;
    params.samples = args.samples;
    const ExperimentReport report = run_experiment(args.name, params, args.seed);

    if (!args.quiet) print_report(report, std::cout);
    if (!args.out_path.empty()) {
        if (args.output == "csv")
            write_output(report_to_csv(report), args.out_path);
        else
            write_output(report_to_json(report).dump(2) + "\n", args.out_path);
    }
    return report.all_pass() ? kExitPass : kExitNumericalFailure;
}

struct EmitArgs {
    std::string data_path;
    std::string explicand_text;
    std::string coalition_text;
    std::optional<double> threshold;
    std::string out_path;
};

int run_emit(const EmitArgs& args) {
    using namespace shapcause;
    const TabularDataset data = TabularDataset::from_csv(args.data_path);
    const std::vector<double> explicand =
        parse_doubles(args.explicand_text, "--explicand");
    const std::vector<int> indices = parse_indices(args.coalition_text, "--coalition");
    const Coalition s = Coalition::from_indices(indices, data.feature_count());
    const EvalSampleEmission emission =
        emit_eval_samples(data, explicand, s, args.threshold);
    write_output(eval_samples_to_csv(data, emission), args.out_path);
    std::cerr << "flagged " << emission.report.flagged_count() << " of "
              << emission.report.flagged.size() << " rows (threshold "
              << emission.report.threshold << ")\n";
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shapley-value feature attribution with marginal, conditional "
                 "and ordering-restricted value functions"};
    app.require_subcommand(1);

    ExplainArgs explain;
    CLI::App* explain_cmd =
        app.add_subcommand("explain", "Attribute one prediction to its features");
    explain_cmd->add_option("--model", explain.model_path, "Model JSON file")
        ->required();
    explain_cmd
        ->add_option("--explicand", explain.explicand_text,
                     "Comma-separated feature values of the observation to explain")
        ->required();
    explain_cmd->add_option("--backend", explain.backend_name,
                            "marginal_empirical | marginal_gaussian | "
                            "conditional_gaussian_closed | conditional_gaussian_mc | "
                            "conditional_empirical");
    explain_cmd->add_option("--data", explain.data_path, "Dataset CSV source");
    explain_cmd->add_option("--gaussian", explain.gaussian_path,
                            "Gaussian JSON source");
    explain_cmd->add_option("--scm", explain.scm_path,
                            "SCM JSON source (its observational joint is used)");
    explain_cmd->add_option("--method", explain.method, "exact | permutation");
    explain_cmd->add_option("--samples", explain.samples,
                            "Monte Carlo draws per coalition for sampling backends");
    explain_cmd->add_option("--permutations", explain.permutations,
                            "Sampled orderings for --method permutation");
    explain_cmd->add_option("--seed", explain.seed, "Master random seed");
    explain_cmd->add_option("--tol-continuous", explain.tol_continuous,
                            "Conditional-empirical match band, in per-column sample "
                            "SDs (default 0.1)");
    explain_cmd->add_flag("--raw-matched", explain.raw_matched,
                          "Average raw matched rows instead of pinning coalition "
                          "columns to the explicand");
    explain_cmd->add_option("--output", explain.output, "json | csv");
    explain_cmd->add_option("--out", explain.out_path, "Write here instead of stdout");

    ExperimentArgs experiment;
    CLI::App* experiment_cmd = app.add_subcommand(
        "experiment", "Run a named verification experiment and report pass/fail");
    experiment_cmd
        ->add_option("name", experiment.name,
                     "eq36 | dummy-violation | eq44 | do-equivalence | rho-zero | "
                     "marginal-linear | extrapolation")
        ->required();
    experiment_cmd->add_option("--seed", experiment.seed, "Master random seed");
    experiment_cmd->add_option("--samples", experiment.samples,
                               "Sample-size override (0 = experiment default)");
    experiment_cmd->add_option("--rho", experiment.rho,
                               "Correlation grid override (repeatable)");
    experiment_cmd->add_option("--output", experiment.output,
                               "Report format for --out: json | csv");
    experiment_cmd->add_option("--out", experiment.out_path, "Report file");
    experiment_cmd->add_flag("--quiet", experiment.quiet, "Suppress the row listing");

    EmitArgs emit;
    CLI::App* emit_cmd = app.add_subcommand("emit", "Emit derived datasets");
    CLI::App* eval_cmd = emit_cmd->add_subcommand(
        "eval-samples",
        "Marginal evaluation rows for one explicand/coalition, with "
        "extrapolation flags");
    eval_cmd->add_option("--data", emit.data_path, "Dataset CSV")->required();
    eval_cmd->add_option("--explicand", emit.explicand_text, "Explicand values")
        ->required();
    eval_cmd->add_option("--coalition", emit.coalition_text,
                         "Comma-separated in-coalition feature indices")
        ->required();
    double threshold_value = 0.0;
    CLI::Option* threshold_opt = eval_cmd->add_option(
        "--threshold", threshold_value,
        "Squared-distance flag threshold (default: chi-squared 99th percentile)");
    eval_cmd->add_option("--out", emit.out_path, "Write here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (explain_cmd->parsed()) return run_explain(explain);
        if (experiment_cmd->parsed()) return run_experiment_cmd(experiment);
        if (emit_cmd->parsed()) {
            if (!eval_cmd->parsed()) {
                std::cerr << "error: emit requires the eval-samples subcommand\n";
                return kExitUsage;
            }
            if (threshold_opt->count() > 0) emit.threshold = threshold_value;
            return run_emit(emit);
        }
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const shapcause::ConditioningInfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
