#include "mgsim/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <ostream>

#include "mgsim/artifacts.hpp"
#include "mgsim/config.hpp"
#include "mgsim/errors.hpp"
#include "mgsim/parallel.hpp"
#include "mgsim/seeding.hpp"

namespace mgsim::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    unsigned workers = default_workers();
    std::optional<std::uint64_t> seed;
    std::string controller = "belbic";
    std::optional<std::string> tune_controller;
};

struct Context {
    config::Config cfg;
    std::string hash;
    fs::path out;
    unsigned workers = 1;
};

Context load(const Options& o) {
    Context ctx;
    ctx.cfg = o.config_path.empty() ? config::defaults() : config::load_file(o.config_path);
    if (o.seed) ctx.cfg.seed = *o.seed;
    if (!o.out_dir.empty()) ctx.cfg.output_dir = o.out_dir;
    ctx.cfg.validate();
    ctx.hash = config::hash_hex(config::config_hash(ctx.cfg));
    ctx.out = ctx.cfg.output_dir;
    ctx.workers = std::max(1u, o.workers);
    return ctx;
}

void prepare_output(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_run(const Context& ctx, const harness::NamedController& nc,
               const harness::RunResult& r, bool internals) {
    const std::string stem = "run_" + nc.name + "_" + ctx.hash;
    artifacts::write_file(ctx.out / (stem + ".csv"), artifacts::run_csv(r, internals));
    const auto summary = artifacts::run_summary(r, nc.name, kind_of(nc.config), ctx.hash);
    artifacts::write_file(ctx.out / (stem + ".json"), summary.dump(2) + "\n");
}

int cmd_run(const Options& o, std::ostream& out) {
    const Context ctx = load(o);
    const auto* nc = ctx.cfg.find_controller(o.controller);
    if (!nc) throw ConfigError("--controller: no controller named '" + o.controller + "' in config");
    const harness::Scenario sc = ctx.cfg.scenario_for(*nc);
    prepare_output(ctx.out);
    const harness::RunResult r = harness::run_scenario(sc);
    write_run(ctx, *nc, r, sc.log_internals);
    if (r.metrics.defined) {
        out << nc->name << ": omega_sm1 mse " << config::format_double(r.metrics.signals[0].mse)
            << ", v_sm1 mse " << config::format_double(r.metrics.signals[1].mse) << "\n";
    }
    if (r.fault) {
        out << nc->name << ": simulation fault " << *r.fault << "\n";
        return kSimulationFault;
    }
    return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const Context ctx = load(o);
    prepare_output(ctx.out);
    const auto& ctls = ctx.cfg.controllers;
    std::vector<harness::RunResult> results(ctls.size());
    parallel_for(ctls.size(), ctx.workers, [&](std::size_t i) {
        results[i] = harness::run_scenario(ctx.cfg.scenario_for(ctls[i]));
    });

    std::vector<artifacts::CompareRow> rows;
    nlohmann::json index;
    index["config_hash"] = ctx.hash;
    index["seed"] = ctx.cfg.seed;
    index["runs"] = nlohmann::json::array();
    bool any_completed = false;
    for (std::size_t i = 0; i < ctls.size(); ++i) {
        write_run(ctx, ctls[i], results[i], ctx.cfg.scenario.log_internals);
        rows.push_back({ctls[i].name, kind_of(ctls[i].config), results[i].metrics, results[i].fault});
        index["runs"].push_back(
            artifacts::run_summary(results[i], ctls[i].name, kind_of(ctls[i].config), ctx.hash));
        any_completed = any_completed || !results[i].fault;
    }
    const std::string table = artifacts::compare_csv(rows);
    artifacts::write_file(ctx.out / ("compare_" + ctx.hash + ".csv"), table);
    artifacts::write_file(ctx.out / ("compare_" + ctx.hash + ".json"), index.dump(2) + "\n");
    out << table;
    return any_completed ? kOk : kSimulationFault;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    const Context ctx = load(o);
    if (!ctx.cfg.sweep) throw ConfigError("sweep: block missing from config");
    const auto& sw = *ctx.cfg.sweep;
    std::vector<harness::NamedController> ctls;
    for (const auto& name : sw.controllers) {
        harness::NamedController nc = *ctx.cfg.find_controller(name);
        nc.config = ctx.cfg.scenario_for(nc).controller;
        ctls.push_back(std::move(nc));
    }
    prepare_output(ctx.out);
    harness::Scenario base = ctx.cfg.scenario;
    const auto rows = harness::sensitivity_sweep(base, sw.spec, ctls, ctx.workers);

    const std::string table = artifacts::sweep_csv(sw.spec, rows);
    nlohmann::json index;
    index["config_hash"] = ctx.hash;
    index["param"] = sw.spec.param;
    index["targets"] = sw.spec.targets == harness::SweepTargets::sm1 ? "sm1" : "both";
    index["values"] = sw.spec.multipliers;
    index["controllers"] = sw.controllers;
    index["rows"] = rows.size();
    std::size_t faulted = 0;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& r : rows) {
        if (r.fault) ++faulted;
        cells.push_back({{"multiplier", r.multiplier},
                         {"controller", r.controller},
                         {"metrics", artifacts::metrics_json(r.metrics)},
                         {"fault", r.fault ? nlohmann::json(*r.fault) : nullptr}});
    }
    index["faulted"] = faulted;
    index["cells"] = cells;
    index["table"] = "sweep_" + ctx.hash + ".csv";
    artifacts::write_file(ctx.out / ("sweep_" + ctx.hash + ".csv"), table);
    artifacts::write_file(ctx.out / ("sweep_" + ctx.hash + ".json"), index.dump(2) + "\n");
    out << table;
    return faulted == rows.size() ? kSimulationFault : kOk;
}

int cmd_tune(const Options& o, std::ostream& out) {
    const Context ctx = load(o);
    if (!ctx.cfg.tune) throw ConfigError("tune: block missing from config");
    const auto& tb = *ctx.cfg.tune;
    const std::string name = o.tune_controller.value_or(tb.controller);
    const auto* nc = ctx.cfg.find_controller(name);
    if (!nc) throw ConfigError("--controller: no controller named '" + name + "' in config");

    harness::TuneOptions opts;
    opts.budget = tb.budget;
    opts.random_samples = tb.random_samples;
    opts.seed = derive_seed(ctx.cfg.seed, "tune/" + name);
    opts.w_freq = tb.w_freq;
    opts.w_volt = tb.w_volt;
    opts.lambda = tb.lambda;
    opts.bounds = tb.bounds;
    if (tb.across_sweep) opts.across = ctx.cfg.sweep->spec;
    opts.workers = ctx.workers;

    prepare_output(ctx.out);
    const auto result = harness::tune_gains(ctx.cfg.scenario_for(*nc), opts);

    config::Config tuned = ctx.cfg;
    for (auto& c : tuned.controllers) {
        if (c.name == nc->name) c.config = result.best;
    }
    nlohmann::json j;
    j["controller"] = nc->name;
    j["kind"] = std::string(to_string(kind_of(nc->config)));
    j["config_hash"] = ctx.hash;
    j["seed"] = ctx.cfg.seed;
    j["tuner_seed"] = opts.seed;
    j["budget"] = opts.budget;
    j["across_sweep"] = tb.across_sweep;
    j["evaluations"] = result.evaluations;
    j["success"] = result.success;
    j["message"] = result.message;
    j["best_score"] = std::isfinite(result.best_score) ? nlohmann::json(result.best_score) : nullptr;
    nlohmann::json gains = nlohmann::json::object();
    for (const auto& t : harness::tunables(result.best)) gains[t.name] = t.value;
    j["best_gains"] = gains;
    nlohmann::json trace = nlohmann::json::array();
    for (double s : result.score_trace) trace.push_back(std::isfinite(s) ? nlohmann::json(s) : nullptr);
    j["score_trace"] = trace;
    j["metrics"] = artifacts::metrics_json(result.best_metrics);
    const std::string stem = "tune_" + nc->name + "_" + ctx.hash;
    artifacts::write_file(ctx.out / (stem + ".json"), j.dump(2) + "\n");
    artifacts::write_file(ctx.out / (stem + ".yaml"), config::emit(tuned));

    out << nc->name << ": best score " << config::format_double(result.best_score) << " after "
        << result.evaluations << " evaluations\n";
    for (const auto& t : harness::tunables(result.best)) {
        out << "  " << t.name << " = " << config::format_double(t.value) << "\n";
    }
    return result.success ? kOk : kSimulationFault;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Microgrid secondary-control simulator"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "YAML configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out_dir, "Output directory (overrides output_dir)");
        sub->add_option("--workers", o.workers, "Parallel workers")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "Top-level seed (overrides seed)");
    };
    auto* run_cmd = app.add_subcommand("run", "Run one controller on the scenario");
    add_common(run_cmd);
    run_cmd->add_option("--controller", o.controller, "Controller name (none|pid|nn|belbic)");
    auto* compare_cmd = app.add_subcommand("compare", "Run every configured controller");
    add_common(compare_cmd);
    auto* sweep_cmd = app.add_subcommand("sweep", "Plant-parameter sensitivity sweep");
    add_common(sweep_cmd);
    auto* tune_cmd = app.add_subcommand("tune", "Heuristic gain search");
    add_common(tune_cmd);
    tune_cmd->add_option("--controller", o.tune_controller, "Controller to tune (overrides tune.controller)");
    auto* defaults_cmd = app.add_subcommand("print-defaults", "Print the built-in configuration");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (*defaults_cmd) {
            out << config::emit(config::defaults());
            return kOk;
        }
        if (*run_cmd) return cmd_run(o, out);
        if (*compare_cmd) return cmd_compare(o, out);
        if (*sweep_cmd) return cmd_sweep(o, out);
        if (*tune_cmd) return cmd_tune(o, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ContractViolation& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kIoError;
    } catch (const SimulationFault& e) {
        err << "simulation fault: " << e.what() << "\n";
        return kSimulationFault;
    }
    return kConfigError;
}

}  // namespace mgsim::cli
