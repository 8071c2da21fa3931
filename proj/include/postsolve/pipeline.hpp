#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "postsolve/measurement.hpp"
#include "postsolve/metrics.hpp"
#include "postsolve/posterior.hpp"
#include "postsolve/rng.hpp"
#include "postsolve/schedule.hpp"
#include "postsolve/score.hpp"
#include "postsolve/signal.hpp"
#include "postsolve/solver.hpp"

namespace postsolve {

enum class RunMode { kEdit, kReconstruct };

// Recipe for the forward operator; masks without explicit indices are sampled
// per run from keep_probability and recorded so the run replays bit-exactly.
struct OperatorSpec {
    enum class Type { kMask, kFourier };
    Type type = Type::kMask;
    double noise_sigma = 0.01;
    std::vector<std::size_t> explicit_kept;
    int grid_rows = 0;
    int grid_cols = 0;
    int oversample_keep = 2;
    int oversample_of = 8;
};

struct RunSpec {
    RunMode mode = RunMode::kEdit;
    Signal source;
    ConditionLabel source_label = ConditionLabel::of(0);
    ConditionLabel target_label = ConditionLabel::of(0);
    OperatorSpec operator_spec;
    PosteriorConfig posterior;
    SolverParams solver;
    TimeSequence times = default_posterior_sequence();

    void validate(const NoiseSchedule& schedule) const {
        posterior.validate();
        times.validate(schedule);
        if (static_cast<std::size_t>(posterior.outer_iters) + 1 != times.taus.size())
            throw std::invalid_argument("RunSpec: N must equal len(taus) - 1");
        if (mode == RunMode::kReconstruct && target_label.label != source_label.label)
            throw std::invalid_argument("RunSpec: reconstruction requires target_label == source_label");
        if (mode == RunMode::kEdit && operator_spec.type == OperatorSpec::Type::kFourier)
            throw std::invalid_argument(
                "RunSpec: the Fourier-magnitude operator is reconstruction-only; editing requires a mask");
        if (source.size() == 0)
            throw std::invalid_argument("RunSpec: empty source signal");
    }
};

struct IterationSnapshot {
    int tau = 0;
    Signal pre_estimate;       // solver estimate before optimization
    Signal post_optimization;  // z0 after the Langevin steps
    double pre_mse = 0.0;
    double post_mse = 0.0;
    double energy_first = 0.0;
    double energy_last = 0.0;
};

struct TrajectoryRow {
    long step = 0;
    int tau = 0;
    int k = 0;
    double h = 0.0;
    double energy = 0.0;
    double mse_to_source = 0.0;
};

struct RunRecord {
    RunMode mode = RunMode::kEdit;
    std::uint64_t seed = 0;
    std::vector<IterationSnapshot> snapshots;
    Signal output;
    std::vector<std::size_t> mask_kept_indices;  // empty for the Fourier operator
    Measurement measurement;
    std::map<std::string, std::string> config_echo;
};

inline MeasurementOperator resolve_operator(const OperatorSpec& spec, std::size_t dimension,
                                            double keep_probability, Rng& mask_rng) {
    if (spec.type == OperatorSpec::Type::kFourier) {
        FourierMagnitudeOperator op;
        op.grid_rows = spec.grid_rows;
        op.grid_cols = spec.grid_cols;
        op.oversample_keep = spec.oversample_keep;
        op.oversample_of = spec.oversample_of;
        op.noise_sigma = spec.noise_sigma;
        op.validate();
        if (op.dimension() != dimension)
            throw std::invalid_argument("resolve_operator: Fourier grid does not match signal dimension");
        return op;
    }
    MaskOperator op;
    if (!spec.explicit_kept.empty()) {
        op.kept_indices = spec.explicit_kept;
        op.dimension = dimension;
        op.noise_sigma = spec.noise_sigma;
    } else {
        op = sample_mask(dimension, keep_probability, mask_rng, spec.noise_sigma);
    }
    op.validate();
    return op;
}

namespace detail {

struct LangevinOutcome {
    Signal optimized;
    double energy_first = 0.0;
    double energy_last = 0.0;
};

inline LangevinOutcome run_langevin(const Signal& estimate, const Signal& z_in,
                                    const MeasurementOperator& op, const Measurement& y,
                                    double sigma_t, const PosteriorConfig& cfg, Rng& rng,
                                    const Signal& source, int tau,
                                    std::vector<TrajectoryRow>* trajectory, long* global_step) {
    LangevinOutcome out;
    out.energy_first = langevin_energy(estimate, estimate, sigma_t, op, y, cfg.data_scale);
    if (cfg.langevin_steps == 0) {
        out.optimized = estimate;
        out.energy_last = out.energy_first;
        return out;
    }
    LangevinState state{estimate, estimate, z_in, 0, cfg.step_size};
    for (int k = 0; k < cfg.langevin_steps; ++k) {
        const double h_used = state.current_h;
        state = langevin_step(state, op, y, sigma_t, cfg, rng);
        if (trajectory) {
            TrajectoryRow row;
            row.step = (*global_step)++;
            row.tau = tau;
            row.k = state.step_index;
            row.h = h_used;
            row.energy = langevin_energy(state.iterate, state.anchor, sigma_t, op, y, cfg.data_scale);
            row.mse_to_source = mse(state.iterate, source);
            trajectory->push_back(row);
        }
    }
    out.optimized = state.iterate;
    out.energy_last = langevin_energy(state.iterate, state.anchor, sigma_t, op, y, cfg.data_scale);
    return out;
}

}  // namespace detail

// Editing: anchor the measurement on the source, then per outer timestep
// re-noise, estimate under the target label, optimize toward the measurement,
// and re-noise down the tau ladder. The source enters only through y and z_in.
inline RunRecord edit(const RunSpec& spec, const GaussianMixtureScore& model,
                      const NoiseSchedule& schedule, RngSet& rngs,
                      std::vector<TrajectoryRow>* trajectory = nullptr) {
    spec.validate(schedule);
    model.validate();
    if (spec.mode != RunMode::kEdit)
        throw std::invalid_argument("edit: RunSpec mode is not edit");
    if (spec.source.size() != model.dimension)
        throw std::invalid_argument("edit: source dimension does not match model");

    MeasurementOperator op =
        resolve_operator(spec.operator_spec, spec.source.size(), spec.posterior.keep_probability, rngs.mask);
    Measurement y = measure(op, spec.source, rngs.measure);

    RunRecord record;
    record.mode = RunMode::kEdit;
    record.seed = spec.posterior.seed;
    record.measurement = y;
    if (const auto* mask = std::get_if<MaskOperator>(&op)) record.mask_kept_indices = mask->kept_indices;

    const Signal& z_in = spec.source;
    Signal z0 = spec.source;
    long global_step = 0;
    const auto& taus = spec.times.taus;
    for (std::size_t j = 0; j + 1 < taus.size(); ++j) {
        const int tau = taus[j];
        for (int inner = 0; inner < spec.times.inner_steps; ++inner) {
            Signal noised = forward_noise(z0, spec.posterior.inner_t, schedule, rngs.diffusion);
            z0 = consistency_estimate(noised, spec.posterior.inner_t, spec.target_label, model,
                                      spec.solver, schedule);
        }
        IterationSnapshot snap;
        snap.tau = tau;
        snap.pre_estimate = z0;
        snap.pre_mse = mse(z0, spec.source);

        auto outcome = detail::run_langevin(z0, z_in, op, y, schedule.sigma(tau), spec.posterior,
                                            rngs.langevin, spec.source, tau, trajectory, &global_step);
        snap.post_optimization = outcome.optimized;
        snap.post_mse = mse(outcome.optimized, spec.source);
        snap.energy_first = outcome.energy_first;
        snap.energy_last = outcome.energy_last;
        record.snapshots.push_back(std::move(snap));

        const int tau_next = taus[j + 1];
        Signal renoised = renoise(outcome.optimized, tau_next, schedule, rngs.diffusion,
                                  spec.posterior.renoise_mode);
        z0 = consistency_estimate(renoised, tau_next, spec.target_label, model, spec.solver, schedule);
    }
    record.output = z0;
    return record;
}

// Reconstruction: start from pure noise and anneal down the full tau ladder
// under the source label; the final Langevin-optimized estimate is the output.
inline RunRecord reconstruct(const RunSpec& spec, const GaussianMixtureScore& model,
                             const NoiseSchedule& schedule, RngSet& rngs,
                             std::vector<TrajectoryRow>* trajectory = nullptr) {
    spec.validate(schedule);
    model.validate();
    if (spec.mode != RunMode::kReconstruct)
        throw std::invalid_argument("reconstruct: RunSpec mode is not reconstruct");
    if (spec.source.size() != model.dimension)
        throw std::invalid_argument("reconstruct: source dimension does not match model");

    MeasurementOperator op =
        resolve_operator(spec.operator_spec, spec.source.size(), spec.posterior.keep_probability, rngs.mask);
    Measurement y = measure(op, spec.source, rngs.measure);

    RunRecord record;
    record.mode = RunMode::kReconstruct;
    record.seed = spec.posterior.seed;
    record.measurement = y;
    if (const auto* mask = std::get_if<MaskOperator>(&op)) record.mask_kept_indices = mask->kept_indices;

    const Signal& z_in = spec.source;
    Signal z_t = rngs.diffusion.normal_signal(spec.source.size());
    Signal z_opt;
    long global_step = 0;
    const auto& taus = spec.times.taus;
    for (std::size_t idx = 0; idx < taus.size(); ++idx) {
        const int tau = taus[idx];
        Signal estimate = consistency_estimate(z_t, tau, spec.source_label, model, spec.solver, schedule);

        IterationSnapshot snap;
        snap.tau = tau;
        snap.pre_estimate = estimate;
        snap.pre_mse = mse(estimate, spec.source);

        auto outcome = detail::run_langevin(estimate, z_in, op, y, schedule.sigma(tau), spec.posterior,
                                            rngs.langevin, spec.source, tau, trajectory, &global_step);
        z_opt = outcome.optimized;
        snap.post_optimization = z_opt;
        snap.post_mse = mse(z_opt, spec.source);
        snap.energy_first = outcome.energy_first;
        snap.energy_last = outcome.energy_last;
        record.snapshots.push_back(std::move(snap));

        if (idx + 1 < taus.size())
            z_t = renoise(z_opt, taus[idx + 1], schedule, rngs.diffusion, spec.posterior.renoise_mode);
    }
    record.output = z_opt;
    return record;
}

// ---- run record document ----
// header key=value lines (config echo), one comma-separated line per outer
// iteration (tau, pre_mse, post_mse, energy_first, energy_last), then the
// final signal as comma-separated reals.

inline std::string format_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string serialize_record(const RunRecord& record) {
    std::ostringstream out;
    for (const auto& [k, v] : record.config_echo) out << k << "=" << v << "\n";
    for (const auto& s : record.snapshots)
        out << s.tau << "," << format_real(s.pre_mse) << "," << format_real(s.post_mse) << ","
            << format_real(s.energy_first) << "," << format_real(s.energy_last) << "\n";
    for (std::size_t i = 0; i < record.output.size(); ++i)
        out << (i ? "," : "") << format_real(record.output[i]);
    out << "\n";
    return out.str();
}

struct ParsedRecord {
    std::map<std::string, std::string> config_echo;
    std::vector<std::vector<double>> snapshots;
    std::vector<double> final_signal;
};

inline ParsedRecord parse_record(const std::string& text) {
    ParsedRecord parsed;
    std::vector<std::vector<double>> data_lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq != std::string::npos) {
            parsed.config_echo[line.substr(0, eq)] = line.substr(eq + 1);
            continue;
        }
        std::vector<double> vals;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
        data_lines.push_back(std::move(vals));
    }
    if (data_lines.empty())
        throw std::runtime_error("parse_record: no data lines");
    parsed.final_signal = data_lines.back();
    data_lines.pop_back();
    parsed.snapshots = std::move(data_lines);
    return parsed;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("write_text_atomic: cannot open " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string serialize_trajectory(const std::vector<TrajectoryRow>& rows) {
    std::ostringstream out;
    out << "step,tau,k,h,energy,mse_to_source\n";
    for (const auto& r : rows)
        out << r.step << "," << r.tau << "," << r.k << "," << format_real(r.h) << ","
            << format_real(r.energy) << "," << format_real(r.mse_to_source) << "\n";
    return out.str();
}

}  // namespace postsolve
