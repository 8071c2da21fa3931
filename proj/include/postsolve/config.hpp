#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "postsolve/pipeline.hpp"
#include "postsolve/posterior.hpp"
#include "postsolve/schedule.hpp"
#include "postsolve/score.hpp"

namespace postsolve {

struct ConfigEntry {
    const char* key;
    const char* default_value;
    const char* doc;
};

// Every recognized key with its documented default. model.<k>.{mean,var,
// weight,label} follow the same scheme for any component index k.
inline const std::vector<ConfigEntry>& config_registry() {
    static const std::vector<ConfigEntry> entries = {
        {"schedule.steps", "1000", "number of training timesteps in the DDPM schedule"},
        {"schedule.beta_start", "0.0001", "first value of the linear beta ramp"},
        {"schedule.beta_end", "0.02", "last value of the linear beta ramp"},
        {"solver.c_skip", "0", "consistency-function skip coefficient"},
        {"solver.c_out", "1", "consistency-function output coefficient"},
        {"measurement.operator", "mask", "forward operator: mask | fourier"},
        {"measurement.noise_sigma", "0.01", "measurement noise standard deviation"},
        {"measurement.kept_indices", "", "explicit mask indices (comma list); empty samples from posterior.f"},
        {"measurement.rows", "0", "Fourier grid rows (0 uses model.rows)"},
        {"measurement.cols", "0", "Fourier grid cols (0 uses model.cols)"},
        {"measurement.oversample_keep", "2", "oversampling numerator k of the pre-DFT stride pattern"},
        {"measurement.oversample_of", "8", "oversampling denominator n of the pre-DFT stride pattern"},
        {"posterior.N", "5", "outer posterior-sampling iterations"},
        {"posterior.n", "1", "inner diffusion-solver steps per outer iteration"},
        {"posterior.inner_t", "501", "timestep used by the inner solver loop"},
        {"posterior.T", "100", "Langevin optimization steps (0 disables the optimizer)"},
        {"posterior.h", "1e-05", "initial Langevin step size"},
        {"posterior.w", "0.1", "source-injection weight"},
        {"posterior.m", "0.01", "data-fit scale in the Langevin energy"},
        {"posterior.f", "0.5", "per-coordinate keep probability when sampling the mask"},
        {"posterior.taus", "501,401,301,201,101,1", "outer timestep ladder, strictly decreasing, ends at 1"},
        {"posterior.renoise_mode", "vp", "re-noising kernel: vp (scaled mean) | unscaled (ablation)"},
        {"posterior.seed", "0", "64-bit run seed; per-stage substreams derive from it"},
        {"model.dimension", "8", "signal dimension"},
        {"model.rows", "0", "optional lattice rows (0 = flat signal)"},
        {"model.cols", "0", "optional lattice cols (0 = flat signal)"},
        {"model.num_components", "2", "number of mixture components"},
        {"model.0.mean", "-2", "component 0 mean (scalar broadcast or comma list)"},
        {"model.0.var", "0.1", "component 0 diagonal variance (scalar broadcast or comma list)"},
        {"model.0.weight", "0.5", "component 0 mixture weight"},
        {"model.0.label", "0", "component 0 condition label"},
        {"model.1.mean", "2", "component 1 mean (scalar broadcast or comma list)"},
        {"model.1.var", "0.1", "component 1 diagonal variance (scalar broadcast or comma list)"},
        {"model.1.weight", "0.5", "component 1 mixture weight"},
        {"model.1.label", "1", "component 1 condition label"},
        {"run.mode", "edit", "edit | reconstruct (set by the CLI subcommand)"},
        {"run.source_label", "0", "label of the source component (c_ini)"},
        {"run.target_label", "1", "label conditioning the solver during editing (c_tgt)"},
        {"run.source", "", "explicit source signal (comma list); empty samples from run.source_label"},
    };
    return entries;
}

// Accepts model.<k>.mean/var/weight/label for numeric k.
inline bool is_dynamic_model_key(const std::string& key) {
    if (key.rfind("model.", 0) != 0) return false;
    auto rest = key.substr(6);
    auto dot = rest.find('.');
    if (dot == std::string::npos || dot == 0) return false;
    for (std::size_t i = 0; i < dot; ++i)
        if (!std::isdigit(static_cast<unsigned char>(rest[i]))) return false;
    auto field = rest.substr(dot + 1);
    return field == "mean" || field == "var" || field == "weight" || field == "label";
}

inline bool is_known_key(const std::string& key) {
    for (const auto& e : config_registry())
        if (key == e.key) return true;
    return is_dynamic_model_key(key);
}

class Config {
public:
    static Config defaults() {
        Config cfg;
        for (const auto& e : config_registry()) cfg.values_[e.key] = e.default_value;
        return cfg;
    }

    void set(const std::string& key, const std::string& value) {
        if (!is_known_key(key))
            throw std::invalid_argument("unknown config key: " + key);
        values_[key] = value;
    }

    // `key = value` lines, '#' comments, blank lines ignored.
    void apply_text(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    static Config from_text(const std::string& text) {
        Config cfg = defaults();
        cfg.apply_text(text);
        return cfg;
    }

    static Config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot read config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_text(buf.str());
    }

    // POSTSOLVE_SECTION_KEY=value overrides; key match is case-insensitive on
    // the dot-to-underscore form.
    void apply_env(char** envp) {
        for (char** e = envp; e && *e; ++e) {
            std::string entry(*e);
            if (entry.rfind("POSTSOLVE_", 0) != 0) continue;
            auto eq = entry.find('=');
            if (eq == std::string::npos) continue;
            std::string name = entry.substr(10, eq - 10);
            std::string value = entry.substr(eq + 1);
            std::string key = match_env_name(name);
            if (key.empty())
                throw std::invalid_argument("unknown config key for env var POSTSOLVE_" + name);
            values_[key] = value;
        }
    }

    const std::map<std::string, std::string>& effective() const { return values_; }

    bool operator==(const Config& other) const { return values_ == other.values_; }

    std::string echo_text() const {
        std::ostringstream out;
        for (const auto& [k, v] : values_) out << k << "=" << v << "\n";
        return out.str();
    }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw std::invalid_argument("unknown config key: " + key);
        return it->second;
    }

    long long get_int(const std::string& key) const {
        const std::string v = get_string(key);
        try {
            std::size_t used = 0;
            long long out = std::stoll(v, &used);
            if (used != v.size()) throw std::invalid_argument("trailing characters");
            return out;
        } catch (const std::exception&) {
            throw std::invalid_argument("config key " + key + ": expected integer, got '" + v + "'");
        }
    }

    double get_real(const std::string& key) const {
        const std::string v = get_string(key);
        try {
            std::size_t used = 0;
            double out = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument("trailing characters");
            return out;
        } catch (const std::exception&) {
            throw std::invalid_argument("config key " + key + ": expected real, got '" + v + "'");
        }
    }

    std::vector<double> get_real_list(const std::string& key) const {
        const std::string v = get_string(key);
        std::vector<double> out;
        if (trim(v).empty()) return out;
        std::istringstream in(v);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            try {
                out.push_back(std::stod(trim(tok)));
            } catch (const std::exception&) {
                throw std::invalid_argument("config key " + key + ": bad list element '" + tok + "'");
            }
        }
        return out;
    }

    std::vector<std::size_t> get_index_list(const std::string& key) const {
        std::vector<std::size_t> out;
        for (double x : get_real_list(key)) {
            if (x < 0.0 || x != std::floor(x))
                throw std::invalid_argument("config key " + key + ": expected non-negative integers");
            out.push_back(static_cast<std::size_t>(x));
        }
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    std::string match_env_name(const std::string& name) const {
        auto canon = [](const std::string& s) {
            std::string out;
            for (char c : s)
                out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
            return out;
        };
        for (const auto& [k, v] : values_)
            if (canon(k) == name) return k;
        // dynamic component keys may not be materialized yet
        std::string lowered;
        for (char c : name)
            lowered.push_back(c == '_' ? '.' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (is_dynamic_model_key(lowered)) return lowered;
        return {};
    }

    std::map<std::string, std::string> values_;
};

// ---- builders ----

inline NoiseSchedule build_schedule(const Config& cfg) {
    return build_ddpm_schedule(static_cast<int>(cfg.get_int("schedule.steps")),
                               cfg.get_real("schedule.beta_start"), cfg.get_real("schedule.beta_end"));
}

inline TimeSequence build_time_sequence(const Config& cfg) {
    TimeSequence seq;
    for (double x : cfg.get_real_list("posterior.taus")) seq.taus.push_back(static_cast<int>(x));
    seq.inner_steps = static_cast<int>(cfg.get_int("posterior.n"));
    return seq;
}

inline PosteriorConfig build_posterior_config(const Config& cfg) {
    PosteriorConfig p;
    p.outer_iters = static_cast<int>(cfg.get_int("posterior.N"));
    p.inner_solver_steps = static_cast<int>(cfg.get_int("posterior.n"));
    p.inner_t = static_cast<int>(cfg.get_int("posterior.inner_t"));
    p.langevin_steps = static_cast<int>(cfg.get_int("posterior.T"));
    p.step_size = cfg.get_real("posterior.h");
    p.inject_weight = cfg.get_real("posterior.w");
    p.data_scale = cfg.get_real("posterior.m");
    p.keep_probability = cfg.get_real("posterior.f");
    p.seed = static_cast<std::uint64_t>(cfg.get_int("posterior.seed"));
    const std::string mode = cfg.get_string("posterior.renoise_mode");
    if (mode == "vp")
        p.renoise_mode = RenoiseMode::kVpScaled;
    else if (mode == "unscaled")
        p.renoise_mode = RenoiseMode::kUnscaled;
    else
        throw std::invalid_argument("config key posterior.renoise_mode: expected vp|unscaled, got '" +
                                    mode + "'");
    p.validate();
    return p;
}

inline SolverParams build_solver_params(const Config& cfg) {
    return SolverParams{cfg.get_real("solver.c_skip"), cfg.get_real("solver.c_out")};
}

namespace detail {

inline Signal broadcast_to(const std::vector<double>& vals, std::size_t d, const std::string& key) {
    if (vals.size() == 1) return Signal(std::vector<double>(d, vals[0]));
    if (vals.size() == d) return Signal(vals);
    throw std::invalid_argument("config key " + key + ": expected 1 or " + std::to_string(d) +
                                " values, got " + std::to_string(vals.size()));
}

}  // namespace detail

inline GaussianMixtureScore build_model(const Config& cfg) {
    GaussianMixtureScore model;
    const auto d = static_cast<std::size_t>(cfg.get_int("model.dimension"));
    model.dimension = d;
    const int num = static_cast<int>(cfg.get_int("model.num_components"));
    for (int k = 0; k < num; ++k) {
        const std::string prefix = "model." + std::to_string(k) + ".";
        MixtureComponent c;
        c.mean = detail::broadcast_to(cfg.get_real_list(prefix + "mean"), d, prefix + "mean");
        c.diag_variance = detail::broadcast_to(cfg.get_real_list(prefix + "var"), d, prefix + "var");
        c.weight = cfg.get_real(prefix + "weight");
        c.label = static_cast<int>(cfg.get_int(prefix + "label"));
        model.components.push_back(std::move(c));
    }
    model.validate();
    return model;
}

inline OperatorSpec build_operator_spec(const Config& cfg) {
    OperatorSpec spec;
    const std::string type = cfg.get_string("measurement.operator");
    if (type == "mask")
        spec.type = OperatorSpec::Type::kMask;
    else if (type == "fourier")
        spec.type = OperatorSpec::Type::kFourier;
    else
        throw std::invalid_argument("config key measurement.operator: expected mask|fourier, got '" +
                                    type + "'");
    spec.noise_sigma = cfg.get_real("measurement.noise_sigma");
    spec.explicit_kept = cfg.get_index_list("measurement.kept_indices");
    spec.grid_rows = static_cast<int>(cfg.get_int("measurement.rows"));
    spec.grid_cols = static_cast<int>(cfg.get_int("measurement.cols"));
    if (spec.grid_rows == 0) spec.grid_rows = static_cast<int>(cfg.get_int("model.rows"));
    if (spec.grid_cols == 0) spec.grid_cols = static_cast<int>(cfg.get_int("model.cols"));
    spec.oversample_keep = static_cast<int>(cfg.get_int("measurement.oversample_keep"));
    spec.oversample_of = static_cast<int>(cfg.get_int("measurement.oversample_of"));
    return spec;
}

inline RunMode parse_run_mode(const std::string& mode) {
    if (mode == "edit") return RunMode::kEdit;
    if (mode == "reconstruct") return RunMode::kReconstruct;
    throw std::invalid_argument("config key run.mode: expected edit|reconstruct, got '" + mode + "'");
}

// Explicit run.source, or a draw from the source-labelled component(s).
inline Signal resolve_source(const Config& cfg, const GaussianMixtureScore& model, std::uint64_t seed) {
    auto explicit_vals = cfg.get_real_list("run.source");
    const int rows = static_cast<int>(cfg.get_int("model.rows"));
    const int cols = static_cast<int>(cfg.get_int("model.cols"));
    Signal src;
    if (!explicit_vals.empty()) {
        if (explicit_vals.size() != model.dimension)
            throw std::invalid_argument("config key run.source: expected " +
                                        std::to_string(model.dimension) + " values");
        src = Signal(explicit_vals);
    } else {
        Rng rng(splitmix64(seed ^ fnv1a64("source")));
        auto label = ConditionLabel::of(static_cast<int>(cfg.get_int("run.source_label")));
        auto idx = model.component_set(label);
        double wsum = 0.0;
        for (auto k : idx) wsum += model.components[k].weight;
        double u = rng.uniform() * wsum;
        std::size_t pick = idx.back();
        for (auto k : idx) {
            u -= model.components[k].weight;
            if (u <= 0.0) {
                pick = k;
                break;
            }
        }
        const auto& c = model.components[pick];
        src = Signal(model.dimension);
        for (std::size_t i = 0; i < model.dimension; ++i)
            src[i] = c.mean[i] + std::sqrt(c.diag_variance[i]) * rng.normal();
    }
    if (rows > 0 && cols > 0 && static_cast<std::size_t>(rows) * cols == src.size()) {
        src.rows = rows;
        src.cols = cols;
    }
    return src;
}

inline RunSpec build_run_spec(const Config& cfg, const GaussianMixtureScore& model) {
    RunSpec spec;
    spec.mode = parse_run_mode(cfg.get_string("run.mode"));
    spec.source = resolve_source(cfg, model, static_cast<std::uint64_t>(cfg.get_int("posterior.seed")));
    spec.source_label = ConditionLabel::of(static_cast<int>(cfg.get_int("run.source_label")));
    spec.target_label = ConditionLabel::of(static_cast<int>(cfg.get_int("run.target_label")));
    spec.operator_spec = build_operator_spec(cfg);
    spec.posterior = build_posterior_config(cfg);
    spec.solver = build_solver_params(cfg);
    spec.times = build_time_sequence(cfg);
    return spec;
}

inline std::vector<std::string> config_warnings(const Config& cfg) {
    return build_posterior_config(cfg).warnings();
}

}  // namespace postsolve
