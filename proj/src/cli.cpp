#include "mft/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mft/detector.hpp"
#include "mft/experiments.hpp"
#include "mft/renewal_sim.hpp"
#include "mft/svg.hpp"

namespace mft::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list: '" + text + "'");
    return out;
}

// Shared run options; a JSON config file may supply any of them, flags win.
struct RunConfig {
    std::string input;
    double horizon = 0.0;  // 0: take the event file's horizon
    std::string h_rate = "25,50,75,100,125,150";
    std::string h_var;     // empty: same as h_rate
    double alpha = 0.05;
    int n_sims = 10000;
    std::uint64_t seed = 1;
    int points_per_window = 100;
    unsigned threads = 0;
    std::string cache;
    std::string out_dir = ".";
    bool skip_rate_correction = false;
};

void apply_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json doc;
    in >> doc;
    auto set_str = [&doc](const char* key, std::string& target) {
        if (doc.contains(key)) target = doc.at(key).get<std::string>();
    };
    auto set_list = [&doc](const char* key, std::string& target) {
        if (!doc.contains(key)) return;
        if (doc.at(key).is_string()) {
            target = doc.at(key).get<std::string>();
            return;
        }
        std::string s;
        for (const auto& v : doc.at(key)) {
            if (!s.empty()) s += ",";
            s += v.dump();
        }
        target = s;
    };
    set_str("input", cfg.input);
    if (doc.contains("T")) cfg.horizon = doc.at("T").get<double>();
    set_list("h_rate", cfg.h_rate);
    set_list("h_var", cfg.h_var);
    if (doc.contains("alpha")) cfg.alpha = doc.at("alpha").get<double>();
    if (doc.contains("n_sims")) cfg.n_sims = doc.at("n_sims").get<int>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("points_per_window"))
        cfg.points_per_window = doc.at("points_per_window").get<int>();
    if (doc.contains("threads")) cfg.threads = doc.at("threads").get<unsigned>();
    set_str("cache", cfg.cache);
    set_str("out_dir", cfg.out_dir);
    if (doc.contains("skip_rate_correction"))
        cfg.skip_rate_correction = doc.at("skip_rate_correction").get<bool>();
}

ChangePointModel model_from_json(const json& doc) {
    std::vector<double> cps;
    if (doc.contains("change_points"))
        for (const auto& c : doc.at("change_points")) cps.push_back(c.get<double>());
    std::vector<LifetimeLaw> laws;
    for (const auto& s : doc.at("segments"))
        laws.push_back(LifetimeLaw::gamma(s.at("mean").get<double>(), s.at("sd").get<double>()));
    return ChangePointModel(doc.at("horizon").get<double>(), std::move(cps), std::move(laws));
}

json model_to_json(const ChangePointModel& model) {
    json doc;
    doc["horizon"] = model.horizon;
    doc["change_points"] = model.change_points;
    doc["segments"] = json::array();
    for (const auto& law : model.segment_laws)
        doc["segments"].push_back({{"mean", law.mean}, {"sd", law.sd}, {"variance", law.variance()}});
    return doc;
}

json profile_to_json(const StepProfile& profile, double horizon) {
    json arr = json::array();
    for (std::size_t j = 0; j < profile.values.size(); ++j) {
        json seg;
        seg["start"] = j == 0 ? 0.0 : profile.breakpoints[j - 1];
        seg["end"] = j == profile.breakpoints.size() ? horizon : profile.breakpoints[j];
        if (profile.values[j])
            seg["value"] = *profile.values[j];
        else
            seg["value"] = nullptr;
        arr.push_back(seg);
    }
    return arr;
}

json stage_to_json(const StageResult& stage, double horizon) {
    json doc;
    doc["M"] = stage.test.statistic;
    doc["reject"] = stage.test.reject;
    doc["per_window"] = json::array();
    for (const auto& wm : stage.test.per_window)
        doc["per_window"].push_back(
            {{"h", wm.h}, {"max_abs", wm.max_abs}, {"argmax_t", wm.argmax_time}});
    doc["cps"] = json::array();
    for (const auto& cp : stage.change_points)
        doc["cps"].push_back({{"time", cp.time}, {"h", cp.window}, {"value", cp.value}});
    doc["profile"] = profile_to_json(stage.profile, horizon);
    return doc;
}

json threshold_to_json(const Threshold& t) {
    return {{"Q", t.q}, {"n_sims", t.n_sims}, {"seed", t.seed}, {"fingerprint", t.fingerprint}};
}

int cmd_simulate(const RunConfig& cfg, const std::string& preset, const std::string& model_path,
                 double mean, double sd, const std::string& out_path,
                 const std::string& truth_path) {
    if (out_path.empty()) throw std::invalid_argument("simulate: --out is required");
    ChangePointModel model;
    if (!preset.empty()) {
        if (preset != "showcase")
            throw std::invalid_argument("simulate: unknown preset '" + preset +
                                        "' (available: showcase)");
        model = showcase_model();
    } else if (!model_path.empty()) {
        std::ifstream in(model_path);
        if (!in) throw std::runtime_error("cannot open model file: " + model_path);
        json doc;
        in >> doc;
        model = model_from_json(doc);
    } else {
        if (!(cfg.horizon > 0.0))
            throw std::invalid_argument("simulate: --T is required for an inline model");
        model = ChangePointModel::single(LifetimeLaw::gamma(mean, sd), cfg.horizon);
    }

    const EventSeries series = sample_composite(model, Rng(cfg.seed));
    series.write(out_path);
    std::cout << "wrote " << series.count() << " events to " << out_path << "\n";

    if (!truth_path.empty()) {
        json truth = model_to_json(model);
        truth["seed"] = cfg.seed;
        truth["events"] = series.count();
        std::ofstream out(truth_path);
        if (!out) throw std::runtime_error("cannot write truth file: " + truth_path);
        out << truth.dump(2) << "\n";
        std::cout << "wrote ground truth to " << truth_path << "\n";
    }
    return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
    if (!(cfg.horizon > 0.0)) throw std::invalid_argument("calibrate: --T is required");
    const auto windows = parse_list(cfg.h_rate);
    const Discretization disc =
        make_discretization(cfg.horizon, windows, cfg.points_per_window);
    Threshold t;
    bool hit = false;
    if (!cfg.cache.empty()) {
        CalibrationCache cache(cfg.cache);
        t = estimate_q_cached(cache, disc.grid, disc.windows, cfg.alpha, cfg.n_sims, cfg.seed,
                              cfg.threads, &hit);
    } else {
        t = estimate_q(disc.grid, disc.windows, cfg.alpha, cfg.n_sims, cfg.seed, cfg.threads);
    }
    std::cout << "fingerprint: " << t.fingerprint << "\n"
              << "Q: " << t.q << (hit ? "  (cache hit)" : "") << "\n";
    return 0;
}

int cmd_detect(const RunConfig& cfg) {
    if (cfg.input.empty()) throw std::invalid_argument("detect: --input is required");
    EventSeries series = EventSeries::read(cfg.input);
    if (cfg.horizon > 0.0) series = EventSeries(cfg.horizon, series.events());
    const double horizon = series.horizon();

    const auto h_rate = parse_list(cfg.h_rate);
    const auto h_var = cfg.h_var.empty() ? h_rate : parse_list(cfg.h_var);

    std::vector<double> all = h_rate;
    all.insert(all.end(), h_var.begin(), h_var.end());
    const double hmin = *std::min_element(all.begin(), all.end());
    const Grid grid = Grid::with_min_window(horizon, hmin, cfg.points_per_window);
    const WindowSet rate_windows(grid, h_rate);
    const WindowSet var_windows(grid, h_var);

    // enough events per window for the asymptotics to be trustworthy
    const double mu_hat = horizon / static_cast<double>(series.count());
    if (hmin / mu_hat < 150.0)
        std::cerr << "warning: smallest window holds ~" << static_cast<int>(hmin / mu_hat)
                  << " events on average (< 150); results may be unreliable\n";

    auto calibrate = [&](const WindowSet& ws) {
        if (!cfg.cache.empty()) {
            CalibrationCache cache(cfg.cache);
            return estimate_q_cached(cache, grid, ws, cfg.alpha, cfg.n_sims, cfg.seed,
                                     cfg.threads);
        }
        return estimate_q(grid, ws, cfg.alpha, cfg.n_sims, cfg.seed, cfg.threads);
    };
    const Threshold q_rate = calibrate(rate_windows);
    const Threshold q_var = calibrate(var_windows);

    const PipelineResult result = sequential_pipeline(series, grid, rate_windows, var_windows,
                                                      q_rate, q_var, !cfg.skip_rate_correction);

    // recompute the processes for export; same inputs, same values
    std::vector<DerivativeProcess> rate_procs, var_procs;
    for (const auto& w : rate_windows.windows()) rate_procs.push_back(rate_g(series, grid, w.h));
    for (const auto& w : var_windows.windows())
        var_procs.push_back(variance_g(series, grid, w.h, result.means_used));

    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    json doc;
    doc["config"] = {{"input", cfg.input},
                     {"T", horizon},
                     {"h_rate", rate_windows.values()},
                     {"h_var", var_windows.values()},
                     {"alpha", cfg.alpha},
                     {"n_sims", cfg.n_sims},
                     {"seed", cfg.seed},
                     {"points_per_window", cfg.points_per_window},
                     {"grid_steps", grid.steps()},
                     {"skip_rate_correction", cfg.skip_rate_correction}};
    doc["calibration"] = {{"alpha", cfg.alpha},
                          {"rate", threshold_to_json(q_rate)},
                          {"variance", threshold_to_json(q_var)}};
    doc["rate"] = stage_to_json(result.rate, horizon);
    doc["variance"] = stage_to_json(result.variance, horizon);

    {
        std::ofstream out(dir / "result.json");
        if (!out) throw std::runtime_error("cannot write result.json");
        out << doc.dump(2) << "\n";
    }
    write_processes_csv(rate_procs, (dir / "g_rate.csv").string());
    write_processes_csv(var_procs, (dir / "g_variance.csv").string());
    write_g_svg((dir / "g_processes.svg").string(), rate_procs, q_rate.q,
                result.rate.change_points, var_procs, q_var.q, result.variance.change_points);

    std::cout << "rate:     M=" << result.rate.test.statistic << " Q=" << q_rate.q
              << (result.rate.test.reject ? " reject" : " accept") << ", "
              << result.rate.change_points.size() << " change point(s)\n";
    std::cout << "variance: M=" << result.variance.test.statistic << " Q=" << q_var.q
              << (result.variance.test.reject ? " reject" : " accept") << ", "
              << result.variance.change_points.size() << " change point(s)\n";
    std::cout << "outputs in " << cfg.out_dir
              << ": result.json, g_rate.csv, g_variance.csv, g_processes.svg\n";
    return 0;
}

int cmd_experiment(const RunConfig& cfg, const std::string& name, const std::string& mu_list,
                   const std::string& sigma_list, double scale, int q_sims) {
    ExperimentSpec spec;
    spec.kind = experiment_by_name(name);
    spec.mu_grid = parse_list(mu_list);
    spec.sigma_grid = parse_list(sigma_list);
    if (cfg.horizon > 0.0) spec.horizon = cfg.horizon;
    spec.alpha = cfg.alpha;
    spec.n_sims = cfg.n_sims;
    spec.scale = scale;
    spec.q_sims = q_sims;
    spec.seed = cfg.seed;
    spec.points_per_window = cfg.points_per_window;
    spec.workers = cfg.threads;
    spec.cache_path = cfg.cache;

    const ExperimentReport report = run_experiment(spec);
    const auto files = write_report(report, cfg.out_dir);
    std::cout << "experiment " << report.name << " finished in " << report.runtime_seconds
              << " s\n";
    for (const auto& f : files) std::cout << "  " << f << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"multiple filter change point detection for event series"};
    app.require_subcommand(1);

    RunConfig cfg;

    // --config may provide defaults for the shared options; flags override.
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") apply_config_file(args[i + 1], cfg);

    std::string config_path;
    app.add_option("--config", config_path, "JSON file supplying defaults for the options below");

    auto add_common = [&cfg](CLI::App* cmd) {
        cmd->add_option("--T", cfg.horizon, "time horizon");
        cmd->add_option("--alpha", cfg.alpha, "significance level");
        cmd->add_option("--nsims", cfg.n_sims, "Monte Carlo paths for the threshold");
        cmd->add_option("--seed", cfg.seed, "random seed");
        cmd->add_option("--points-per-window", cfg.points_per_window,
                        "grid points across the smallest window");
        cmd->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
        cmd->add_option("--cache", cfg.cache, "calibration cache file");
    };

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw an event series from a model");
    std::string preset, model_path, out_path, truth_path;
    double mean = 1.0, sd = 1.0;
    sim->add_option("--preset", preset, "built-in model (showcase)");
    sim->add_option("--model", model_path, "model JSON file");
    sim->add_option("--mean", mean, "life-time mean for an inline single-segment model");
    sim->add_option("--sd", sd, "life-time sd for an inline single-segment model");
    sim->add_option("--out", out_path, "output event file");
    sim->add_option("--truth", truth_path, "ground-truth JSON output");
    add_common(sim);

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "estimate the rejection threshold Q");
    cal->add_option("--windows", cfg.h_rate, "comma-separated window sizes");
    add_common(cal);

    // detect
    auto* det = app.add_subcommand("detect", "run the two-step change point detection");
    det->add_option("--input", cfg.input, "event file (one time per line)");
    det->add_option("--h-rate", cfg.h_rate, "rate-stage windows, comma separated");
    det->add_option("--h-var", cfg.h_var, "variance-stage windows (default: --h-rate)");
    det->add_option("--out-dir", cfg.out_dir, "output directory");
    det->add_flag("--skip-rate-correction", cfg.skip_rate_correction,
                  "ablation: ignore estimated rate change points in the variance stage");
    add_common(det);

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a simulation study");
    std::string exp_name, mu_list = "0.25", sigma_list = "0.125";
    double scale = 1.0;
    int q_sims = 10000;
    exp->add_option("--name", exp_name, "experiment name")->required();
    exp->add_option("--mu-grid", mu_list, "mean grid, comma separated");
    exp->add_option("--sigma-grid", sigma_list, "sd grid, comma separated");
    exp->add_option("--scale", scale, "multiplies the per-cell simulation count");
    exp->add_option("--q-sims", q_sims, "Monte Carlo paths for the threshold");
    exp->add_option("--out-dir", cfg.out_dir, "output directory");
    add_common(exp);

    std::vector<const char*> argv;
    argv.push_back("mft");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sim->parsed()) return cmd_simulate(cfg, preset, model_path, mean, sd, out_path, truth_path);
        if (cal->parsed()) return cmd_calibrate(cfg);
        if (det->parsed()) return cmd_detect(cfg);
        if (exp->parsed()) return cmd_experiment(cfg, exp_name, mu_list, sigma_list, scale, q_sims);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace mft::cli
