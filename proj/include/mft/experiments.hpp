#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mft/detector.hpp"

namespace mft {

enum class ExperimentKind {
    sig_constant,      // rejection rate under a constant rate, true H0
    sig_random_rate,   // stage-2 rejection rate under random rate change points
    detection,         // correctly detected variance change points, paired designs
    limit_comparison,  // coupled L vs modified-L quantiles and covariance curves
    showcase           // repeated runs of the five-segment demonstration model
};

const char* experiment_name(ExperimentKind kind);
ExperimentKind experiment_by_name(const std::string& name);  // throws, listing valid names
std::vector<std::string> experiment_names();

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::sig_constant;
    std::vector<double> mu_grid{0.25};
    std::vector<double> sigma_grid{0.125};
    double horizon = 2000.0;
    double alpha = 0.05;
    int n_sims = 1000;        // per cell; desk scale
    double scale = 1.0;       // multiplies n_sims to restore survey scale
    int q_sims = 10000;
    std::uint64_t seed = 1;
    int points_per_window = 100;
    unsigned workers = 0;
    std::string cache_path;   // optional calibration cache

    int scaled_sims() const;
    void validate() const;
};

struct ReportTable {
    std::string name;  // empty for the main table
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::string name;
    std::vector<ReportTable> tables;
    double runtime_seconds = 0.0;  // printed, never serialized
};

ExperimentReport run_sig_level(const ExperimentSpec& spec);
ExperimentReport run_detection(const ExperimentSpec& spec);
ExperimentReport run_limit_comparison(const ExperimentSpec& spec);
ExperimentReport run_showcase(const ExperimentSpec& spec);
ExperimentReport run_experiment(const ExperimentSpec& spec);

// <name>.csv (+ <name>_<table>.csv for extra tables) and a <name>.json
// sidecar echoing the spec. Returns the paths written.
std::vector<std::string> write_report(const ExperimentReport& report, const std::string& out_dir);

// The window family used throughout the simulation studies, scaled by the
// base mean life time: {150, 250, 500, 750, 1000, 1250} * mu.
std::vector<double> standard_windows(double mu);

}  // namespace mft
