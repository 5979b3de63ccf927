#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "helars/dataset.hpp"
#include "helars/error.hpp"
#include "helars/estimation.hpp"
#include "helars/report.hpp"
#include "helars/selection.hpp"

namespace fs = std::filesystem;
using namespace helars;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct RunSpec {
    std::string input;
    std::string response;
    std::string model = "truncnorm";
    bool no_scale = false;
    bool raw_scale = false;
    bool oracle = false;
    bool intercept_only = false;
    std::string out = ".";
    SelectionConfig config;
};

struct SimulateSpec {
    SimulationSpec sim;
    std::string out = ".";
};

struct Prepared {
    Dataset data;
    std::unique_ptr<Model> model;
    std::unique_ptr<DesignBlock> design;
    Vector suff_stat;
};

Prepared prepare(const RunSpec& spec) {
    Prepared p;
    p.model = make_model(spec.model);
    const bool truncated = spec.model == "truncnorm";
    p.data = ingest_file(spec.input, spec.response, truncated);
    if (!spec.no_scale) p.data = standardize(p.data, !truncated);
    p.design = std::make_unique<DesignBlock>(p.data.x, p.model->extra_stats());
    p.suff_stat = p.model->sufficient_stat(p.data.y);
    return p;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
    return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void run_path(RunSpec spec) {
    spec.config.transport.closed_form = spec.oracle;
    spec.config.mle.transport = spec.config.transport;
    spec.config.validate();
    Prepared p = prepare(spec);

    const MleResult full = mle_full(*p.model, *p.design, p.suff_stat, spec.config.mle);
    const MleResult null = mle_null(*p.model, *p.design, p.suff_stat, spec.config.mle);
    SelectionPath path = run_helars(*p.model, *p.design, full, null, spec.config);

    nlohmann::json summary = path_summary(path, p.data, spec.model, full, spec.config);
    summary["scaled"] = !spec.no_scale;
    summary["raw_scale"] = spec.raw_scale;
    if (spec.raw_scale) {
        for (PathStep& step : path.steps) step.theta = theta_to_raw(step.theta, p.data.scaling);
    }

    auto csv = open_out(spec.out, "path.csv");
    write_path_csv(csv, path);
    auto plot = open_out(spec.out, "plot.csv");
    write_plot_csv(plot, path, p.data.covariate_names);
    auto json = open_out(spec.out, "summary.json");
    json << summary.dump(2) << '\n';

    std::cout << "removal order:";
    for (Index i : path.removal_order) {
        std::cout << ' ' << p.data.covariate_names[static_cast<std::size_t>(i - 1)];
    }
    std::cout << '\n';
}

void run_fit(RunSpec spec) {
    spec.config.transport.closed_form = spec.oracle;
    spec.config.mle.transport = spec.config.transport;
    spec.config.validate();
    Prepared p = prepare(spec);

    const MleResult fit = spec.intercept_only
                              ? mle_null(*p.model, *p.design, p.suff_stat, spec.config.mle)
                              : mle_full(*p.model, *p.design, p.suff_stat, spec.config.mle);
    nlohmann::json out = mle_json(fit);
    out["model"] = spec.model;
    out["intercept_only"] = spec.intercept_only;
    out["theta_raw"] = to_std(theta_to_raw(fit.theta, p.data.scaling));
    out["covariates"] = p.data.covariate_names;
    auto file = open_out(spec.out, "fit.json");
    file << out.dump(2) << '\n';
    std::cout << out.dump(2) << '\n';
}

void run_simulate(const SimulateSpec& spec) {
    const Dataset data = simulate(spec.sim);
    auto out = open_out(spec.out, "simulated.csv");
    for (const auto& name : data.covariate_names) out << name << ',';
    out << data.response_name << '\n';
    out.precision(17);
    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.d(); ++j) out << data.x(i, j) << ',';
        out << data.y(i) << '\n';
    }
}

void add_run_options(CLI::App* cmd, RunSpec& spec) {
    cmd->add_option("--input", spec.input, "Delimited table with a header row")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--response", spec.response, "Response column (default: last column)");
    cmd->add_option("--model", spec.model, "Response family")
        ->check(CLI::IsMember({"truncnorm", "normal"}));
    cmd->add_flag("--no-scale", spec.no_scale, "Skip standardization");
    cmd->add_option("--out", spec.out, "Output directory");
    cmd->add_option("--rtol", spec.config.transport.rel_tol, "Transport relative tolerance");
    cmd->add_option("--atol", spec.config.transport.abs_tol, "Transport absolute tolerance");
    cmd->add_option("--checkpoints", spec.config.transport.checkpoints,
                    "Equal sub-segments per transport");
    cmd->add_flag("--raw-scale", spec.raw_scale, "Report theta on the raw data scale");
    cmd->add_flag("--oracle", spec.oracle, "Closed-form L instead of holonomic transport");
}

int report_error(const char* kind, const std::string& message, int code) {
    const nlohmann::json err = {{"error", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << err.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Holonomic extended least angle regression"};
    app.require_subcommand(1);

    RunSpec path_spec;
    auto* path_cmd = app.add_subcommand("path", "Run the selection path");
    add_run_options(path_cmd, path_spec);
    path_cmd->add_option("--bisection-tol", path_spec.config.bisection_tol,
                         "Relative tolerance of the divergence match");

    RunSpec fit_spec;
    auto* fit_cmd = app.add_subcommand("fit", "Maximum likelihood fit only");
    add_run_options(fit_cmd, fit_spec);
    fit_cmd->add_flag("--intercept-only", fit_spec.intercept_only,
                      "Fit the model without covariates");

    SimulateSpec sim_spec;
    auto* sim_cmd = app.add_subcommand("simulate", "Write a simulated dataset");
    sim_cmd->add_option("--seed", sim_spec.sim.seed, "RNG seed")->required();
    sim_cmd->add_option("--n", sim_spec.sim.n, "Observations")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--d", sim_spec.sim.d, "Covariates (at least 3)")
        ->check(CLI::Range(3, 1000));
    sim_cmd->add_flag("--correlated", sim_spec.sim.correlated, "X2 = X1 + noise");
    sim_cmd->add_option("--out", sim_spec.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("UsageError", e.what(), kExitUsage);
    }

    try {
        if (*path_cmd) run_path(path_spec);
        if (*fit_cmd) run_fit(fit_spec);
        if (*sim_cmd) run_simulate(sim_spec);
    } catch (const Error& e) {
        const int code = e.kind() == ErrorKind::InvalidArgument ? kExitUsage : kExitNumerical;
        return report_error(std::string(to_string(e.kind())).c_str(), e.what(), code);
    } catch (const std::exception& e) {
        return report_error("InternalError", e.what(), kExitNumerical);
    }
    return 0;
}
