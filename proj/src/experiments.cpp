#include "mft/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mft/parallel.hpp"
#include "mft/renewal_sim.hpp"

namespace mft {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

constexpr double kWindowMultipliers[] = {150.0, 250.0, 500.0, 750.0, 1000.0, 1250.0};

Threshold cell_threshold(const ExperimentSpec& spec, const Discretization& disc) {
    if (spec.alpha == 0.0) {
        Threshold t;
        t.q = std::numeric_limits<double>::infinity();
        t.alpha = 0.0;
        t.n_sims = spec.q_sims;
        t.seed = spec.seed;
        t.fingerprint = "alpha=0";
        return t;
    }
    if (!spec.cache_path.empty()) {
        CalibrationCache cache(spec.cache_path);
        return estimate_q_cached(cache, disc.grid, disc.windows, spec.alpha, spec.q_sims,
                                 spec.seed, spec.workers);
    }
    return estimate_q(disc.grid, disc.windows, spec.alpha, spec.q_sims, spec.seed, spec.workers);
}

double binomial_se(double p, int n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

// detected iff some estimated change point has the truth inside its own
// window-sized neighborhood
bool correctly_detected(double truth, const std::vector<ChangePoint>& estimated) {
    for (const auto& cp : estimated)
        if (std::abs(truth - cp.time) <= cp.window) return true;
    return false;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

}  // namespace

const char* experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::sig_constant: return "sig-constant";
        case ExperimentKind::sig_random_rate: return "sig-random-rate";
        case ExperimentKind::detection: return "detection";
        case ExperimentKind::limit_comparison: return "limit-comparison";
        case ExperimentKind::showcase: return "showcase";
    }
    return "unknown";
}

std::vector<std::string> experiment_names() {
    return {"sig-constant", "sig-random-rate", "detection", "limit-comparison", "showcase"};
}

ExperimentKind experiment_by_name(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(ExperimentKind::showcase); ++i) {
        const auto kind = static_cast<ExperimentKind>(i);
        if (name == experiment_name(kind)) return kind;
    }
    std::ostringstream msg;
    msg << "unknown experiment '" << name << "'; valid names:";
    for (const auto& n : experiment_names()) msg << " " << n;
    throw std::invalid_argument(msg.str());
}

int ExperimentSpec::scaled_sims() const {
    return std::max(1, static_cast<int>(std::llround(n_sims * scale)));
}

void ExperimentSpec::validate() const {
    if (n_sims < 100) throw std::invalid_argument("ExperimentSpec: n_sims must be >= 100");
    if (mu_grid.empty() || sigma_grid.empty())
        throw std::invalid_argument("ExperimentSpec: parameter grids must be nonempty");
    if (!(horizon > 0.0)) throw std::invalid_argument("ExperimentSpec: horizon must be > 0");
    if (alpha < 0.0 || alpha >= 1.0)
        throw std::invalid_argument("ExperimentSpec: alpha must lie in [0, 1)");
    if (!(scale > 0.0)) throw std::invalid_argument("ExperimentSpec: scale must be > 0");
}

std::vector<double> standard_windows(double mu) {
    std::vector<double> h;
    for (double m : kWindowMultipliers) h.push_back(m * mu);
    return h;
}

ExperimentReport run_sig_level(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.kind != ExperimentKind::sig_constant && spec.kind != ExperimentKind::sig_random_rate)
        throw std::invalid_argument("run_sig_level: wrong experiment kind");
    const bool random_rate = spec.kind == ExperimentKind::sig_random_rate;
    const Timer timer;
    const int sims = spec.scaled_sims();

    ReportTable table;
    table.columns = {"mu", "sigma", "n_sims", "rejections", "rate", "se"};

    const Rng base(spec.seed);
    std::size_t cell_index = 0;
    for (double mu : spec.mu_grid) {
        for (double sigma : spec.sigma_grid) {
            const auto windows = standard_windows(mu);
            const Discretization disc =
                make_discretization(spec.horizon, windows, spec.points_per_window);
            const Threshold q = cell_threshold(spec, disc);
            const LifetimeLaw law = LifetimeLaw::gamma(mu, sigma);

            std::vector<char> rejected(static_cast<std::size_t>(sims), 0);
            const Rng cell_rng = base.substream(cell_index++);
            parallel_for(rejected.size(), spec.workers, [&](std::size_t i) {
                const Rng sim_rng = cell_rng.substream(i);
                if (!random_rate) {
                    const EventSeries e = sample_renewal(law, spec.horizon, sim_rng);
                    std::vector<DerivativeProcess> procs;
                    const SegmentMeans means = SegmentMeans::global(e);
                    for (const auto& w : disc.windows.windows())
                        procs.push_back(variance_g(e, disc.grid, w.h, means));
                    rejected[i] = mft_test(procs, q).reject ? 1 : 0;
                } else {
                    RandomDesign design = RandomDesign::rate_only(law);
                    design.tail_guard = disc.windows.min_window();
                    const RandomDesignDraw draw =
                        sample_random_design(design, spec.horizon, sim_rng);
                    const PipelineResult r = sequential_pipeline(
                        draw.series, disc.grid, disc.windows, disc.windows, q, q, true);
                    rejected[i] = r.variance.test.reject ? 1 : 0;
                }
            });
            int count = 0;
            for (char c : rejected) count += c;
            const double rate = static_cast<double>(count) / sims;
            table.rows.push_back({mu, sigma, static_cast<double>(sims),
                                  static_cast<double>(count), rate, binomial_se(rate, sims)});
        }
    }

    ExperimentReport report{spec, experiment_name(spec.kind), {std::move(table)}, timer.seconds()};
    return report;
}

ExperimentReport run_detection(const ExperimentSpec& spec) {
    spec.validate();
    const Timer timer;
    const int sims = spec.scaled_sims();

    ReportTable table;
    table.columns = {"mu",        "sigma", "inhomogeneous_rate", "n_sims_scored",
                     "detection", "se",    "avg_true_cps"};

    const Rng base(spec.seed);
    std::size_t cell_index = 0;
    for (double mu : spec.mu_grid) {
        for (double sigma : spec.sigma_grid) {
            const auto windows = standard_windows(mu);
            const Discretization disc =
                make_discretization(spec.horizon, windows, spec.points_per_window);
            const Threshold q = cell_threshold(spec, disc);
            const LifetimeLaw law = LifetimeLaw::gamma(mu, sigma);

            for (int variant = 0; variant < 2; ++variant) {
                RandomDesign design = variant == 0 ? RandomDesign::variance_only(law)
                                                   : RandomDesign::mixed(law);
                design.tail_guard = disc.windows.min_window();

                std::vector<double> fraction(static_cast<std::size_t>(sims), -1.0);
                std::vector<int> true_counts(static_cast<std::size_t>(sims), 0);
                const Rng cell_rng = base.substream(cell_index++);
                parallel_for(fraction.size(), spec.workers, [&](std::size_t i) {
                    const RandomDesignDraw draw =
                        sample_random_design(design, spec.horizon, cell_rng.substream(i));
                    const PipelineResult r = sequential_pipeline(
                        draw.series, disc.grid, disc.windows, disc.windows, q, q, true);
                    int truth_total = 0, hit = 0;
                    for (const auto& t : draw.truth) {
                        if (t.kind == ChangeKind::rate) continue;
                        ++truth_total;
                        if (correctly_detected(t.time, r.variance.change_points)) ++hit;
                    }
                    true_counts[i] = truth_total;
                    if (truth_total > 0)
                        fraction[i] = static_cast<double>(hit) / truth_total;
                });

                double sum = 0.0, sum2 = 0.0, truth_sum = 0.0;
                int scored = 0;
                for (std::size_t i = 0; i < fraction.size(); ++i) {
                    truth_sum += true_counts[i];
                    if (fraction[i] >= 0.0) {
                        sum += fraction[i];
                        sum2 += fraction[i] * fraction[i];
                        ++scored;
                    }
                }
                const double mean = scored ? sum / scored : 0.0;
                const double var = scored > 1 ? std::max(0.0, sum2 / scored - mean * mean) : 0.0;
                const double se = scored > 0 ? std::sqrt(var / scored) : 0.0;
                table.rows.push_back({mu, sigma, static_cast<double>(variant),
                                      static_cast<double>(scored), mean, se,
                                      truth_sum / static_cast<double>(sims)});
            }
        }
    }

    ExperimentReport report{spec, experiment_name(ExperimentKind::detection), {std::move(table)},
                            timer.seconds()};
    return report;
}

ExperimentReport run_limit_comparison(const ExperimentSpec& spec) {
    spec.validate();
    const Timer timer;
    const double h = 100.0;
    const double c = spec.horizon / 2.0;
    const Grid grid = Grid::with_min_window(spec.horizon, h, spec.points_per_window);
    const WindowSet windows(grid, {h});

    // the two parameter pairs compared throughout: small rate change with
    // small sigma/mu, and a large rate change with large sigma/mu
    struct ParamSet {
        double mu1, mu2, sigma;
    };
    const ParamSet sets[] = {{0.1, 0.15, 0.1}, {0.1, 0.5, 0.5}};

    ReportTable main;
    main.name = "";
    main.columns = {"set", "q", "q_tilde", "abs_diff", "max_coupling_err"};
    ReportTable cov;
    cov.name = "covariance";
    cov.columns = {"set", "offset", "cov_l", "cov_l_tilde"};

    const int sims = std::max(spec.scaled_sims(), 1000);
    for (int si = 0; si < 2; ++si) {
        const ParamSet& ps = sets[si];
        const LifetimeLaw before = LifetimeLaw::gamma(ps.mu1, ps.sigma);
        const LifetimeLaw after = LifetimeLaw::gamma(ps.mu2, ps.sigma);
        const LTildeParams params = LTildeParams::from_laws(c, before, after, h);
        params.validate(grid);

        std::vector<double> max_l(static_cast<std::size_t>(sims));
        std::vector<double> max_lt(static_cast<std::size_t>(sims));
        std::vector<double> coupling(static_cast<std::size_t>(sims));
        const Rng base(spec.seed);
        const Rng set_rng = base.substream(1000 + static_cast<std::size_t>(si));
        const std::int64_t k = windows.windows()[0].steps;
        const std::int64_t ic = std::llround(c / grid.dt());
        parallel_for(max_l.size(), spec.workers, [&](std::size_t i) {
            const BrownianPath w = simulate_brownian(grid, set_rng.substream(i));
            const auto l = l_process(w, grid, windows.windows()[0].h);
            const auto lt = l_tilde_process(w, grid, params);
            max_l[i] = max_abs(l);
            max_lt[i] = max_abs(lt);
            double worst = 0.0;
            for (std::size_t j = 0; j < l.size(); ++j) {
                const std::int64_t gi = k + static_cast<std::int64_t>(j);
                if (gi >= ic - k && gi <= ic + k) continue;  // h-neighborhood of c
                worst = std::max(worst, std::abs(lt[j] - l[j]));
            }
            coupling[i] = worst;
        });
        const double q = upper_quantile(max_l, spec.alpha > 0.0 ? spec.alpha : 0.05);
        const double qt = upper_quantile(max_lt, spec.alpha > 0.0 ? spec.alpha : 0.05);
        double worst = 0.0;
        for (double v : coupling) worst = std::max(worst, v);
        main.rows.push_back({static_cast<double>(si), q, qt, std::abs(q - qt), worst});

        std::vector<double> offsets;
        for (int j = -25; j <= 25; ++j) offsets.push_back(h * j / 10.0);
        const auto curve_l = covariance_curve(
            [&](const BrownianPath& w) { return l_process(w, grid, windows.windows()[0].h); },
            grid, windows.windows()[0].h, c, offsets, sims, splitmix64(spec.seed + si),
            spec.workers);
        const auto curve_lt = covariance_curve(
            [&](const BrownianPath& w) { return l_tilde_process(w, grid, params); }, grid,
            windows.windows()[0].h, c, offsets, sims, splitmix64(spec.seed + si), spec.workers);
        for (std::size_t j = 0; j < offsets.size(); ++j)
            cov.rows.push_back({static_cast<double>(si), offsets[j], curve_l[j].covariance,
                                curve_lt[j].covariance});
    }

    ExperimentReport report{spec, experiment_name(ExperimentKind::limit_comparison),
                            {std::move(main), std::move(cov)}, timer.seconds()};
    return report;
}

ExperimentReport run_showcase(const ExperimentSpec& spec) {
    spec.validate();
    const Timer timer;
    const ChangePointModel model = showcase_model();
    const std::vector<LabeledChangePoint> truth = showcase_truth();
    const double base_mu = model.segment_laws.front().mean;
    const auto windows = standard_windows(base_mu);
    const Discretization disc = make_discretization(model.horizon, windows, spec.points_per_window);
    const Threshold q = cell_threshold(spec, disc);

    const int sims = spec.scaled_sims();
    ReportTable table;
    table.columns = {"sim", "n_rate_cps", "n_var_cps", "rate_detected", "var_detected"};
    table.rows.resize(static_cast<std::size_t>(sims));

    const Rng base(spec.seed);
    parallel_for(table.rows.size(), spec.workers, [&](std::size_t i) {
        const EventSeries e = sample_composite(model, base.substream(i));
        const PipelineResult r =
            sequential_pipeline(e, disc.grid, disc.windows, disc.windows, q, q, true);
        int rate_hit = 0, var_hit = 0;
        for (const auto& t : truth) {
            if (t.kind == ChangeKind::rate && correctly_detected(t.time, r.rate.change_points))
                ++rate_hit;
            if (t.kind == ChangeKind::variance &&
                correctly_detected(t.time, r.variance.change_points))
                ++var_hit;
        }
        table.rows[i] = {static_cast<double>(i),
                         static_cast<double>(r.rate.change_points.size()),
                         static_cast<double>(r.variance.change_points.size()),
                         static_cast<double>(rate_hit), static_cast<double>(var_hit)};
    });

    ExperimentReport report{spec, experiment_name(ExperimentKind::showcase), {std::move(table)},
                            timer.seconds()};
    return report;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    switch (spec.kind) {
        case ExperimentKind::sig_constant:
        case ExperimentKind::sig_random_rate: return run_sig_level(spec);
        case ExperimentKind::detection: return run_detection(spec);
        case ExperimentKind::limit_comparison: return run_limit_comparison(spec);
        case ExperimentKind::showcase: return run_showcase(spec);
    }
    throw std::invalid_argument("run_experiment: unknown kind");
}

std::vector<std::string> write_report(const ExperimentReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    for (const auto& table : report.tables) {
        fs::path p = fs::path(out_dir) / (table.name.empty()
                                              ? report.name + ".csv"
                                              : report.name + "_" + table.name + ".csv");
        std::ofstream out(p);
        if (!out) throw std::runtime_error("cannot write report: " + p.string());
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            out << (c ? "," : "") << table.columns[c];
        out << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << format_double(row[c]);
            out << "\n";
        }
        written.push_back(p.string());
    }

    nlohmann::json sidecar;
    sidecar["experiment"] = report.name;
    sidecar["spec"] = {{"mu_grid", report.spec.mu_grid},
                       {"sigma_grid", report.spec.sigma_grid},
                       {"horizon", report.spec.horizon},
                       {"alpha", report.spec.alpha},
                       {"n_sims", report.spec.n_sims},
                       {"scale", report.spec.scale},
                       {"q_sims", report.spec.q_sims},
                       {"seed", report.spec.seed},
                       {"points_per_window", report.spec.points_per_window}};
    fs::path sp = fs::path(out_dir) / (report.name + ".json");
    std::ofstream sout(sp);
    if (!sout) throw std::runtime_error("cannot write sidecar: " + sp.string());
    sout << sidecar.dump(2) << "\n";
    written.push_back(sp.string());
    return written;
}

}  // namespace mft
