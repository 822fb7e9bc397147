#include "execq/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "execq/asymptotics.hpp"
#include "execq/csv.hpp"
#include "execq/quotes.hpp"
#include "execq/simulate.hpp"
#include "execq/triangular.hpp"

namespace execq::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Manifest {
    struct Entry {
        std::string name;
        std::string data_hash;
        std::string config_hash;  // optional, per-panel configs
    };
    std::vector<Entry> files;
    std::string config_hash;

    void add(const std::string& name, const std::string& content,
             const std::string& panel_config_hash = "") {
        files.push_back({name, fnv1a64_hex(content), panel_config_hash});
    }
    void write(const fs::path& dir) const {
        ordered_json j;
        if (!config_hash.empty()) j["config_fnv1a64"] = config_hash;
        auto arr = ordered_json::array();
        for (const auto& e : files) {
            ordered_json entry{{"name", e.name}, {"fnv1a64", e.data_hash}};
            if (!e.config_hash.empty()) entry["config_fnv1a64"] = e.config_hash;
            arr.push_back(entry);
        }
        j["files"] = arr;
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw Error("cannot write manifest.json");
        out << j.dump(2) << "\n";
    }
};

void write_csv(const fs::path& dir, const std::string& name, const CsvWriter& csv,
               Manifest& manifest) {
    csv.write_file(dir / name);
    manifest.add(name, csv.str());
}

ExperimentConfig with_flags(ExperimentConfig cfg, const CommonFlags& flags) {
    if (flags.seed) cfg.mc.seed = *flags.seed;
    if (flags.n_paths) cfg.mc.n_paths = *flags.n_paths;
    return cfg;
}

void append_quote_rows(CsvWriter& csv, const QuoteSurface& surface, double level,
                       const std::vector<int>& q_list) {
    for (int q : q_list) {
        for (std::size_t ti = 0; ti < surface.t_grid.size(); ++ti) {
            csv.add_row({format_double(surface.t_grid[ti]), std::to_string(q),
                         format_double(level),
                         format_double(surface.unconstrained[ti][static_cast<std::size_t>(q - 1)]),
                         format_double(surface.projected[ti][static_cast<std::size_t>(q - 1)]),
                         surface.interior[ti][static_cast<std::size_t>(q - 1)] ? "1" : "0"});
        }
    }
}

// Builds the quote surface for one signal level: constant signals go
// through the exact constant-coefficient solution, deterministic
// time-dependent ones through the frozen-signal heuristic.
QuoteSurface surface_for_level(const ExperimentConfig& cfg, double level, int threads,
                               bool& frozen) {
    const SignalSpec sig = cfg.signal.with_level(level);
    const auto penalties = cfg.penalty_spec();
    if (sig.is_constant()) {
        frozen = false;
        const auto vs = make_value_spec(cfg.params, sig, penalties, cfg.criterion,
                                        cfg.t_grid(), kDefaultCoefficientTol, threads);
        return build_quote_surface(vs, cfg.t_grid(), threads);
    }
    frozen = true;
    return frozen_signal_surface(cfg.params, sig, penalties, cfg.criterion, cfg.t_grid(),
                                 kDefaultCoefficientTol, threads);
}

}  // namespace

int run_quote(const ExperimentConfig& cfg_in, const fs::path& out_dir,
              const CommonFlags& flags) {
    const auto cfg = with_flags(cfg_in, flags);
    cfg.validate();
    fs::create_directories(out_dir);
    Manifest manifest;
    manifest.config_hash = fnv1a64_hex(cfg.to_json_text());

    std::vector<double> levels = cfg.signal_levels;
    if (levels.empty()) levels.push_back(cfg.signal.base_level());

    CsvWriter csv({"t", "q", "signal_level", "unconstrained", "projected", "interior_flag"});
    bool any_frozen = false;
    for (double level : levels) {
        bool frozen = false;
        const auto surface = surface_for_level(cfg, level, flags.threads, frozen);
        any_frozen = any_frozen || frozen;
        append_quote_rows(csv, surface, level, cfg.quote_q_list());
    }
    write_csv(out_dir, "quotes.csv", csv, manifest);
    manifest.write(out_dir);
    if (any_frozen)
        std::cout << "note: time-dependent signal handled by the frozen-signal "
                     "heuristic (instantaneous level plugged into the "
                     "constant-coefficient closed form)\n";
    std::cout << "wrote " << (out_dir / "quotes.csv").string() << "\n";
    return kExitOk;
}

int run_surface(const ExperimentConfig& cfg_in, const fs::path& out_dir,
                const CommonFlags& flags) {
    const auto cfg = with_flags(cfg_in, flags);
    cfg.validate();
    fs::create_directories(out_dir);
    Manifest manifest;
    manifest.config_hash = fnv1a64_hex(cfg.to_json_text());

    bool frozen = false;
    const auto surface =
        surface_for_level(cfg, cfg.signal.base_level(), flags.threads, frozen);
    CsvWriter csv({"t", "q", "delta_star"});
    for (std::size_t ti = 0; ti < surface.t_grid.size(); ++ti)
        for (int q = 1; q <= surface.q_max; ++q)
            csv.add_row({format_double(surface.t_grid[ti]), std::to_string(q),
                         format_double(surface.projected[ti][static_cast<std::size_t>(q - 1)])});
    write_csv(out_dir, "surface.csv", csv, manifest);
    manifest.write(out_dir);
    if (frozen)
        std::cout << "note: time-dependent signal handled by the frozen-signal "
                     "heuristic\n";
    std::cout << "wrote " << (out_dir / "surface.csv").string() << "\n";
    return kExitOk;
}

int run_verify(const ExperimentConfig& cfg_in, const fs::path& out_dir,
               const CommonFlags& flags) {
    const auto cfg = with_flags(cfg_in, flags);
    cfg.validate();
    fs::create_directories(out_dir);
    Manifest manifest;
    manifest.config_hash = fnv1a64_hex(cfg.to_json_text());

    VerifyOptions options;
    options.threads = flags.threads;
    const auto report =
        verify_value_function(cfg.params, cfg.signal, cfg.penalty_spec(), cfg.criterion,
                              cfg.mc.n_paths, cfg.mc_perturbations(), cfg.mc.seed, options);

    CsvWriter csv({"label", "eps", "mean", "stderr", "reference", "delta_vs_reference",
                   "score", "verdict"});
    const std::string value_verdict = report.constrained_regime ? "NOT_APPLICABLE"
                                       : report.value_matches   ? "MATCH"
                                                                : "FAIL";
    csv.add_row({"optimal", format_double(0.0), format_double(report.optimal.mean),
                 format_double(report.optimal.stderr_),
                 format_double(report.closed_form_value),
                 format_double(report.optimal.mean - report.closed_form_value),
                 format_double(report.z_score), value_verdict});
    for (const auto& p : report.perturbations) {
        const std::string verdict = p.tie           ? "TIE"
                                    : p.dominated   ? "DOMINATED"
                                                    : "INCONCLUSIVE";
        const double score =
            p.combined_stderr > 0.0 ? p.gap / p.combined_stderr : 0.0;
        csv.add_row({"perturbed", format_double(p.eps), format_double(p.estimate.mean),
                     format_double(p.estimate.stderr_),
                     format_double(report.optimal.mean), format_double(-p.gap),
                     format_double(score), verdict});
    }
    write_csv(out_dir, "verify.csv", csv, manifest);

    std::string txt;
    txt += "criterion: " + criterion_name(report.criterion) + "\n";
    txt += "n_paths: " + std::to_string(report.n_paths) + "\n";
    txt += "seed: " + std::to_string(report.seed) + "\n";
    txt += "interior_admissible: " + std::string(report.all_interior ? "yes" : "no") + "\n";
    if (report.constrained_regime)
        txt += "closed-form comparison: not applicable - constrained regime\n";
    txt += "closed_form_value: " + format_double(report.closed_form_value) + "\n";
    txt += "mc_mean: " + format_double(report.optimal.mean) + "\n";
    txt += "mc_stderr: " + format_double(report.optimal.stderr_) + "\n";
    txt += "z_score: " + format_double(report.z_score) + "\n";
    txt += "value_verdict: " + value_verdict + "\n";
    for (const auto& p : report.perturbations) {
        txt += "perturbation eps=" + format_double(p.eps) +
               ": mean=" + format_double(p.estimate.mean) +
               " stderr=" + format_double(p.estimate.stderr_) +
               " gap=" + format_double(p.gap) +
               " combined_stderr=" + format_double(p.combined_stderr) + " verdict=" +
               (p.tie ? "TIE" : p.dominated ? "DOMINATED" : "INCONCLUSIVE") + "\n";
    }
    txt += std::string("overall: ") +
           (report.constrained_regime ? "CAVEAT" : report.pass ? "PASS" : "FAIL") + "\n";
    {
        std::ofstream out(out_dir / "verify.txt", std::ios::binary);
        if (!out) throw Error("cannot write verify.txt");
        out << txt;
    }
    manifest.add("verify.txt", txt);
    manifest.write(out_dir);

    std::cout << txt;
    if (report.constrained_regime) return kExitOk;  // caveat, not a failure
    return report.pass ? kExitOk : kExitVerificationFail;
}

int run_asymptotics(const ExperimentConfig& cfg_in, const fs::path& out_dir,
                    const CommonFlags& flags) {
    const auto cfg = with_flags(cfg_in, flags);
    cfg.validate();
    fs::create_directories(out_dir);
    Manifest manifest;
    manifest.config_hash = fnv1a64_hex(cfg.to_json_text());

    const auto penalties = cfg.penalty_spec();
    const auto coeffs =
        reduced_coefficients(cfg.params, cfg.signal, penalties, cfg.criterion);

    std::vector<int> q_list = cfg.asymptotics.q_list;
    if (q_list.empty())
        for (int q = 1; q <= cfg.params.Q0; ++q) q_list.push_back(q);

    CsvWriter csv({"q", "regime", "theoretical_rate", "fitted_rate", "rel_error",
                   "quote_variation"});
    for (int q : q_list) {
        const auto rate = theoretical_growth_rate(coeffs, q, cfg.params.kappa);
        if (rate.regime == GrowthRegime::OutOfTheory) {
            csv.add_row({std::to_string(q), "out_of_theory", "nan", "nan", "nan", "nan"});
            continue;
        }
        std::vector<double> horizons = cfg.asymptotics.horizons;
        if (horizons.empty()) {
            if (rate.regime == GrowthRegime::Degenerate)
                horizons = {100.0, 316.22776601683796, 1000.0, 3162.2776601683795, 10000.0};
            else
                horizons = {100.0, 200.0, 300.0, 400.0, 500.0,
                            600.0, 700.0, 800.0, 900.0, 1000.0};
        }
        const auto report = fit_growth_rate(cfg.params, cfg.signal, penalties,
                                            cfg.criterion, q, horizons);
        csv.add_row({std::to_string(q),
                     report.regime == GrowthRegime::Degenerate ? "degenerate"
                                                               : "non_degenerate",
                     format_double(report.theoretical_rate),
                     format_double(report.fitted_rate), format_double(report.rel_error),
                     format_double(report.quote_variation)});
    }
    write_csv(out_dir, "growth.csv", csv, manifest);
    manifest.write(out_dir);
    std::cout << "wrote " << (out_dir / "growth.csv").string() << "\n";
    return kExitOk;
}

namespace {

ExperimentConfig table_baseline() {
    ExperimentConfig cfg;
    cfg.criterion = Criterion::RiskNeutral;
    cfg.params.lambda = 5.0 / 6.0;
    cfg.params.kappa = 1000.0;
    cfg.params.a = 0.0;
    cfg.params.b = 1.0;
    cfg.params.sigma = 0.0;
    cfg.params.gamma = 0.0;
    cfg.params.T = 30.0;
    cfg.params.Q0 = 2;
    cfg.params.M0 = 100.0;
    cfg.params.X0 = 0.0;
    cfg.penalties.alpha = 0.001;
    cfg.penalties.beta = 0.0;
    cfg.grids.t_points = 601;
    cfg.signal = SignalSpec::constant(0.0);
    cfg.signal_levels = {-3e-4, -2e-4, -1e-4, 0.0, 1e-4, 2e-4, 3e-4};
    return cfg;
}

struct Panel {
    std::string file_stem;
    ExperimentConfig cfg;
    bool heatmap = false;
};

std::map<std::string, std::vector<Panel>> reproduce_table() {
    std::map<std::string, std::vector<Panel>> table;

    auto quote_panel = [](const std::string& stem, ExperimentConfig cfg, int q) {
        cfg.grids.q_list = {q};
        return Panel{stem, std::move(cfg), false};
    };

    // risk-neutral criterion: two terminal-penalty levels, q = 1 and q = 2
    for (int q : {1, 2}) {
        std::vector<Panel> panels;
        for (double alpha : {0.001, 0.005}) {
            auto cfg = table_baseline();
            cfg.penalties.alpha = alpha;
            panels.push_back(
                quote_panel("caseI-q" + std::to_string(q) + "_alpha" + format_double(alpha),
                            cfg, q));
        }
        table["caseI-q" + std::to_string(q)] = panels;
    }
    // time-decay and delayed-decay signals, q = 1 and q = 2
    {
        std::vector<Panel> decay, delayed;
        for (int q : {1, 2}) {
            auto cfg = table_baseline();
            cfg.signal = SignalSpec::exponential_decay(0.0, 0.01);
            decay.push_back(quote_panel("caseI-decay_q" + std::to_string(q), cfg, q));
            cfg.signal = SignalSpec::delayed_decay(0.0, 0.01, 10.0);
            delayed.push_back(
                quote_panel("caseI-delayed-decay_q" + std::to_string(q), cfg, q));
        }
        table["caseI-decay"] = decay;
        table["caseI-delayed-decay"] = delayed;
    }
    // running-penalty criterion: two beta levels
    for (int q : {1, 2}) {
        std::vector<Panel> panels;
        for (double beta : {0.0005, 0.001}) {
            auto cfg = table_baseline();
            cfg.criterion = Criterion::RiskNeutralRunning;
            cfg.penalties.beta = beta;
            panels.push_back(
                quote_panel("caseII-q" + std::to_string(q) + "_beta" + format_double(beta),
                            cfg, q));
        }
        table["caseII-q" + std::to_string(q)] = panels;
    }
    // CARA criterion: two risk-aversion levels
    {
        std::vector<Panel> panels;
        for (double gamma : {0.01, 0.05}) {
            auto cfg = table_baseline();
            cfg.criterion = Criterion::Cara;
            cfg.params.gamma = gamma;
            cfg.params.sigma = 0.1;
            panels.push_back(quote_panel("caseIII-q1_gamma" + format_double(gamma), cfg, 1));
        }
        table["caseIII-q1"] = panels;
    }
    // CARA with running penalty: beta, sigma and horizon comparisons
    {
        std::vector<Panel> panels;
        for (double beta : {0.0005, 0.001}) {
            auto cfg = table_baseline();
            cfg.criterion = Criterion::CaraRunning;
            cfg.params.gamma = 0.01;
            cfg.params.sigma = 0.1;
            cfg.penalties.beta = beta;
            panels.push_back(quote_panel("caseIV-q1_beta" + format_double(beta), cfg, 1));
        }
        table["caseIV-q1"] = panels;
    }
    {
        std::vector<Panel> panels;
        for (double sigma : {0.1, 0.01}) {
            auto cfg = table_baseline();
            cfg.criterion = Criterion::CaraRunning;
            cfg.params.gamma = 0.05;
            cfg.params.sigma = sigma;
            cfg.penalties.beta = 0.0001;
            panels.push_back(quote_panel("caseIV-q2_sigma" + format_double(sigma), cfg, 2));
        }
        table["caseIV-q2-sigma"] = panels;
    }
    {
        std::vector<Panel> panels;
        for (double T : {10.0, 2.0}) {
            auto cfg = table_baseline();
            cfg.criterion = Criterion::CaraRunning;
            cfg.params.gamma = 0.05;
            cfg.params.sigma = 0.1;
            cfg.params.T = T;
            cfg.penalties.beta = 0.0001;
            panels.push_back(quote_panel("caseIV-q2_T" + format_double(T), cfg, 2));
        }
        table["caseIV-q2-T"] = panels;
    }
    // CARA heatmaps over time and inventory for four signal levels
    {
        std::vector<Panel> panels;
        for (double g : {-2e-4, 0.0, 2e-4, 5e-4}) {
            auto cfg = table_baseline();
            cfg.criterion = Criterion::Cara;
            cfg.params.gamma = 0.01;
            cfg.params.sigma = 0.01;
            cfg.params.Q0 = 10;
            cfg.signal = SignalSpec::constant(g);
            cfg.signal_levels.clear();
            panels.push_back(Panel{"caseIII-heatmap_g" + format_double(g), cfg, true});
        }
        table["caseIII-heatmaps"] = panels;
    }
    return table;
}

}  // namespace

std::vector<std::string> reproduce_figure_ids() {
    std::vector<std::string> ids;
    for (const auto& [id, _] : reproduce_table()) ids.push_back(id);
    return ids;
}

int run_reproduce(const std::string& figure_id, const fs::path& out_dir,
                  const CommonFlags& flags) {
    const auto table = reproduce_table();
    const auto it = table.find(figure_id);
    if (it == table.end()) {
        std::string known;
        for (const auto& [id, _] : table) known += " " + id;
        throw ConfigError("unknown figure id '" + figure_id + "'; known:" + known);
    }
    fs::create_directories(out_dir);
    Manifest manifest;

    bool any_frozen = false;
    for (const auto& panel : it->second) {
        const auto& cfg = panel.cfg;
        cfg.validate();
        const std::string panel_hash = fnv1a64_hex(cfg.to_json_text());
        if (panel.heatmap) {
            bool frozen = false;
            const auto surface =
                surface_for_level(cfg, cfg.signal.base_level(), flags.threads, frozen);
            any_frozen = any_frozen || frozen;
            CsvWriter csv({"t", "q", "delta_star"});
            for (std::size_t ti = 0; ti < surface.t_grid.size(); ++ti)
                for (int q = 1; q <= surface.q_max; ++q)
                    csv.add_row({format_double(surface.t_grid[ti]), std::to_string(q),
                                 format_double(
                                     surface.projected[ti][static_cast<std::size_t>(q - 1)])});
            csv.write_file(out_dir / (panel.file_stem + ".csv"));
            manifest.add(panel.file_stem + ".csv", csv.str(), panel_hash);
        } else {
            CsvWriter csv(
                {"t", "q", "signal_level", "unconstrained", "projected", "interior_flag"});
            std::vector<double> levels = cfg.signal_levels;
            if (levels.empty()) levels.push_back(cfg.signal.base_level());
            for (double level : levels) {
                bool frozen = false;
                const auto surface = surface_for_level(cfg, level, flags.threads, frozen);
                any_frozen = any_frozen || frozen;
                append_quote_rows(csv, surface, level, cfg.quote_q_list());
            }
            csv.write_file(out_dir / (panel.file_stem + ".csv"));
            manifest.add(panel.file_stem + ".csv", csv.str(), panel_hash);
        }
    }
    manifest.write(out_dir);
    if (any_frozen)
        std::cout << "note: time-dependent signal handled by the frozen-signal "
                     "heuristic\n";
    std::cout << "wrote " << it->second.size() << " panel(s) to " << out_dir.string()
              << "\n";
    return kExitOk;
}

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << "\n";
        return kExitValidation;
    } catch (const UnsupportedSignal& e) {
        std::cerr << "unsupported signal: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalBlowup& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ExtremePayoff& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace execq::cli
