#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "execq/model.hpp"

namespace execq {

inline constexpr int kConfigFormatVersion = 1;

struct PenaltyConfig {
    std::optional<double> alpha;  // I(q) = alpha q
    std::optional<double> beta;   // J(q) = beta q^2
    std::optional<std::vector<double>> terminal_table;
    std::optional<std::vector<double>> running_table;

    PenaltySpec make(int Q0) const;
};

struct GridConfig {
    int t_points = 601;
    std::vector<int> q_list;  // empty = 1..Q0
};

struct McConfig {
    long n_paths = 100000;
    std::uint64_t seed = 1;
    std::vector<double> perturbations;  // empty = {+2/kappa, -2/kappa}
};

struct AsymptoticsConfig {
    std::vector<double> horizons;  // empty = regime-dependent default
    std::vector<int> q_list;       // empty = 1..Q0
};

// One experiment: model, objective, signal, penalties, grids, and Monte
// Carlo settings. Parsing is strict: unknown keys are rejected and every
// module-level invariant is validated before any computation runs.
struct ExperimentConfig {
    int format_version = kConfigFormatVersion;
    Criterion criterion = Criterion::RiskNeutral;
    ModelParams params;
    SignalSpec signal = SignalSpec::constant(0.0);
    PenaltyConfig penalties;
    GridConfig grids;
    std::vector<double> signal_levels;  // signal ladder for quote curves
    McConfig mc;
    AsymptoticsConfig asymptotics;
    std::string output_dir = "out";

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    std::string to_json_text() const;

    PenaltySpec penalty_spec() const { return penalties.make(params.Q0); }
    std::vector<int> quote_q_list() const;
    std::vector<double> t_grid() const;
    std::vector<double> mc_perturbations() const;

    void validate() const;
};

}  // namespace execq
