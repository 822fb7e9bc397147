#include "execq/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace execq {

namespace {

using json = nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    if (!obj[key].is_number()) throw ConfigError("key '" + key + "' in " + where + " must be a number");
    return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return obj[key].get<double>();
}

std::optional<double> optional_number(const json& obj, const std::string& key,
                                      const std::string& where) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    if (!obj[key].is_number()) throw ConfigError("key '" + key + "' in " + where + " must be a number or null");
    return obj[key].get<double>();
}

ModelParams parse_params(const json& j) {
    reject_unknown_keys(j, {"lambda", "kappa", "a", "b", "sigma", "gamma", "T", "Q0",
                            "delta_min", "delta_max", "M0", "X0"},
                        "params");
    ModelParams p;
    p.lambda = require_number(j, "lambda", "params");
    p.kappa = require_number(j, "kappa", "params");
    p.a = number_or(j, "a", 0.0);
    p.b = number_or(j, "b", 1.0);
    p.sigma = number_or(j, "sigma", 0.0);
    p.gamma = number_or(j, "gamma", 0.0);
    p.T = require_number(j, "T", "params");
    if (!j.contains("Q0") || !j["Q0"].is_number_integer())
        throw ConfigError("params.Q0 must be an integer");
    p.Q0 = j["Q0"].get<int>();
    p.bounds.lower = optional_number(j, "delta_min", "params");
    p.bounds.upper = optional_number(j, "delta_max", "params");
    p.M0 = number_or(j, "M0", 0.0);
    p.X0 = number_or(j, "X0", 0.0);
    return p;
}

SignalSpec parse_signal(const json& j) {
    if (!j.contains("type")) throw ConfigError("signal.type is required");
    const std::string type = j["type"].get<std::string>();
    if (type == "constant") {
        reject_unknown_keys(j, {"type", "g"}, "signal");
        return SignalSpec::constant(require_number(j, "g", "signal"));
    }
    if (type == "exponential_decay") {
        reject_unknown_keys(j, {"type", "g", "c"}, "signal");
        return SignalSpec::exponential_decay(require_number(j, "g", "signal"),
                                             require_number(j, "c", "signal"));
    }
    if (type == "delayed_decay") {
        reject_unknown_keys(j, {"type", "g", "c", "t0"}, "signal");
        return SignalSpec::delayed_decay(require_number(j, "g", "signal"),
                                         require_number(j, "c", "signal"),
                                         require_number(j, "t0", "signal"));
    }
    throw ConfigError("unknown signal type '" + type + "'");
}

PenaltyConfig parse_penalties(const json& j) {
    reject_unknown_keys(j, {"alpha", "beta", "terminal_table", "running_table"},
                        "penalties");
    PenaltyConfig p;
    if (j.contains("alpha")) p.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) p.beta = j["beta"].get<double>();
    if (j.contains("terminal_table"))
        p.terminal_table = j["terminal_table"].get<std::vector<double>>();
    if (j.contains("running_table"))
        p.running_table = j["running_table"].get<std::vector<double>>();
    if (p.alpha && p.terminal_table)
        throw ConfigError("penalties: give alpha or terminal_table, not both");
    if (p.beta && p.running_table)
        throw ConfigError("penalties: give beta or running_table, not both");
    return p;
}

}  // namespace

PenaltySpec PenaltyConfig::make(int Q0) const {
    PenaltySpec spec = PenaltySpec::builtin(Q0, alpha.value_or(0.0), beta.value_or(0.0));
    if (terminal_table) spec.terminal = *terminal_table;
    if (running_table) spec.running = *running_table;
    spec.validate(Q0);
    return spec;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        reject_unknown_keys(j,
                            {"format_version", "criterion", "params", "signal",
                             "penalties", "grids", "signal_levels", "mc", "asymptotics",
                             "output"},
                            "config");
        ExperimentConfig cfg;
        if (!j.contains("format_version") || !j["format_version"].is_number_integer())
            throw ConfigError("format_version (integer) is required");
        cfg.format_version = j["format_version"].get<int>();
        if (cfg.format_version != kConfigFormatVersion)
            throw ConfigError("unsupported format_version " +
                              std::to_string(cfg.format_version));
        if (!j.contains("criterion")) throw ConfigError("criterion is required");
        cfg.criterion = criterion_from_name(j["criterion"].get<std::string>());
        if (!j.contains("params")) throw ConfigError("params is required");
        cfg.params = parse_params(j["params"]);
        if (!j.contains("signal")) throw ConfigError("signal is required");
        cfg.signal = parse_signal(j["signal"]);
        if (!j.contains("penalties")) throw ConfigError("penalties is required");
        cfg.penalties = parse_penalties(j["penalties"]);
        if (j.contains("grids")) {
            reject_unknown_keys(j["grids"], {"t_points", "q_list"}, "grids");
            if (j["grids"].contains("t_points"))
                cfg.grids.t_points = j["grids"]["t_points"].get<int>();
            if (j["grids"].contains("q_list"))
                cfg.grids.q_list = j["grids"]["q_list"].get<std::vector<int>>();
        }
        if (j.contains("signal_levels"))
            cfg.signal_levels = j["signal_levels"].get<std::vector<double>>();
        if (j.contains("mc")) {
            reject_unknown_keys(j["mc"], {"n_paths", "seed", "perturbations"}, "mc");
            if (j["mc"].contains("n_paths"))
                cfg.mc.n_paths = j["mc"]["n_paths"].get<long>();
            if (j["mc"].contains("seed"))
                cfg.mc.seed = j["mc"]["seed"].get<std::uint64_t>();
            if (j["mc"].contains("perturbations"))
                cfg.mc.perturbations = j["mc"]["perturbations"].get<std::vector<double>>();
        }
        if (j.contains("asymptotics")) {
            reject_unknown_keys(j["asymptotics"], {"horizons", "q_list"}, "asymptotics");
            if (j["asymptotics"].contains("horizons"))
                cfg.asymptotics.horizons =
                    j["asymptotics"]["horizons"].get<std::vector<double>>();
            if (j["asymptotics"].contains("q_list"))
                cfg.asymptotics.q_list =
                    j["asymptotics"]["q_list"].get<std::vector<int>>();
        }
        if (j.contains("output")) {
            reject_unknown_keys(j["output"], {"dir"}, "output");
            if (j["output"].contains("dir"))
                cfg.output_dir = j["output"]["dir"].get<std::string>();
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["format_version"] = format_version;
    j["criterion"] = criterion_name(criterion);
    json p;
    p["lambda"] = params.lambda;
    p["kappa"] = params.kappa;
    p["a"] = params.a;
    p["b"] = params.b;
    p["sigma"] = params.sigma;
    p["gamma"] = params.gamma;
    p["T"] = params.T;
    p["Q0"] = params.Q0;
    p["delta_min"] = params.bounds.lower ? json(*params.bounds.lower) : json(nullptr);
    p["delta_max"] = params.bounds.upper ? json(*params.bounds.upper) : json(nullptr);
    p["M0"] = params.M0;
    p["X0"] = params.X0;
    j["params"] = p;
    json s;
    switch (signal.kind()) {
        case SignalSpec::Kind::Constant:
            s["type"] = "constant";
            s["g"] = signal.base_level();
            break;
        case SignalSpec::Kind::ExponentialDecay:
            s["type"] = "exponential_decay";
            s["g"] = signal.base_level();
            s["c"] = signal.decay_rate();
            break;
        case SignalSpec::Kind::DelayedDecay:
            s["type"] = "delayed_decay";
            s["g"] = signal.base_level();
            s["c"] = signal.decay_rate();
            s["t0"] = signal.delay_center();
            break;
        case SignalSpec::Kind::Custom:
            throw ConfigError("custom signals are not serializable");
    }
    j["signal"] = s;
    json pen;
    if (penalties.alpha) pen["alpha"] = *penalties.alpha;
    if (penalties.beta) pen["beta"] = *penalties.beta;
    if (penalties.terminal_table) pen["terminal_table"] = *penalties.terminal_table;
    if (penalties.running_table) pen["running_table"] = *penalties.running_table;
    j["penalties"] = pen;
    json g;
    g["t_points"] = grids.t_points;
    if (!grids.q_list.empty()) g["q_list"] = grids.q_list;
    j["grids"] = g;
    if (!signal_levels.empty()) j["signal_levels"] = signal_levels;
    json m;
    m["n_paths"] = mc.n_paths;
    m["seed"] = mc.seed;
    if (!mc.perturbations.empty()) m["perturbations"] = mc.perturbations;
    j["mc"] = m;
    if (!asymptotics.horizons.empty() || !asymptotics.q_list.empty()) {
        json a;
        if (!asymptotics.horizons.empty()) a["horizons"] = asymptotics.horizons;
        if (!asymptotics.q_list.empty()) a["q_list"] = asymptotics.q_list;
        j["asymptotics"] = a;
    }
    j["output"] = json{{"dir", output_dir}};
    return j.dump(2) + "\n";
}

std::vector<int> ExperimentConfig::quote_q_list() const {
    if (!grids.q_list.empty()) return grids.q_list;
    std::vector<int> qs;
    for (int q = 1; q <= params.Q0; ++q) qs.push_back(q);
    return qs;
}

std::vector<double> ExperimentConfig::t_grid() const {
    const int n = grids.t_points;
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] =
            params.T * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = params.T;
    return g;
}

std::vector<double> ExperimentConfig::mc_perturbations() const {
    if (!mc.perturbations.empty()) return mc.perturbations;
    return {2.0 / params.kappa, -2.0 / params.kappa};
}

void ExperimentConfig::validate() const {
    params.validate();
    penalties.make(params.Q0);
    signal.validate_on_horizon(params.T);
    if (uses_cara(criterion) && !(params.gamma > 0.0))
        throw ConfigError("CARA criteria require params.gamma > 0");
    if (grids.t_points < 2) throw ConfigError("grids.t_points must be >= 2");
    for (int q : grids.q_list)
        if (q < 1 || q > params.Q0)
            throw ConfigError("grids.q_list entries must lie in 1..Q0");
    if (mc.n_paths < 2) throw ConfigError("mc.n_paths must be >= 2");
    for (int q : asymptotics.q_list)
        if (q < 1 || q > params.Q0)
            throw ConfigError("asymptotics.q_list entries must lie in 1..Q0");
    for (std::size_t i = 1; i < asymptotics.horizons.size(); ++i)
        if (!(asymptotics.horizons[i] > asymptotics.horizons[i - 1]))
            throw ConfigError("asymptotics.horizons must be strictly ascending");
    if (output_dir.empty()) throw ConfigError("output.dir must be non-empty");
}

}  // namespace execq
