#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "postsolve/measurement.hpp"
#include "postsolve/rng.hpp"
#include "postsolve/schedule.hpp"
#include "postsolve/signal.hpp"

namespace postsolve {

enum class RenoiseMode {
    kVpScaled,  // mean sqrt(abar) * z0, variance (1 - abar)
    kUnscaled   // mean z0, variance (1 - abar); ablation switch
};

struct PosteriorConfig {
    int outer_iters = 5;         // N
    int inner_solver_steps = 1;  // n
    int inner_t = 501;           // t_j used by the inner solver loop
    int langevin_steps = 100;    // T (0 disables the optimizer)
    double step_size = 1e-5;     // h
    double inject_weight = 0.1;  // w
    double data_scale = 0.01;    // m
    double keep_probability = 0.5;  // f
    RenoiseMode renoise_mode = RenoiseMode::kVpScaled;
    std::uint64_t seed = 0;

    void validate() const {
        if (outer_iters < 1) throw std::invalid_argument("PosteriorConfig: N must be positive");
        if (inner_solver_steps < 1) throw std::invalid_argument("PosteriorConfig: n must be positive");
        if (langevin_steps < 0) throw std::invalid_argument("PosteriorConfig: T must be non-negative");
        if (!(step_size >= 0.0)) throw std::invalid_argument("PosteriorConfig: h must be non-negative");
        if (inject_weight < 0.0 || inject_weight > 1.0)
            throw std::invalid_argument("PosteriorConfig: w must lie in [0, 1]");
        if (!(data_scale > 0.0)) throw std::invalid_argument("PosteriorConfig: m must be positive");
        if (keep_probability < 0.0 || keep_probability > 1.0)
            throw std::invalid_argument("PosteriorConfig: f must lie in [0, 1]");
    }

    // Operating range is [0, 0.2]; larger values are accepted but worth flagging.
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (inject_weight > 0.2)
            w.push_back("posterior.w=" + std::to_string(inject_weight) +
                        " is outside the usual operating range [0, 0.2]");
        return w;
    }
};

// Langevin chain state over the z0 estimate. step_index counts completed steps.
struct LangevinState {
    Signal iterate;
    Signal anchor;     // solver estimate the quadratic term pulls toward
    Signal reference;  // z_in, the injected source features
    int step_index = 0;
    double current_h = 0.0;
};

struct NonFiniteError : std::runtime_error {
    int step_index;
    explicit NonFiniteError(int step)
        : std::runtime_error("langevin iterate became non-finite at step " + std::to_string(step)),
          step_index(step) {}
};

// (1 - w) * z_hat + w * z_in.
inline Signal weighted_inject(const Signal& z_hat, const Signal& z_in, double w) {
    require_same_dim(z_hat, z_in, "weighted_inject");
    if (w < 0.0 || w > 1.0)
        throw std::invalid_argument("weighted_inject: w must lie in [0, 1]");
    Signal out(z_hat.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * z_hat[i] + w * z_in[i];
    return out;
}

// Multiplicative decay h_k = (1 - 0.99 * k / T) * h_{k-1}; factor 1 at k = 0
// and 0.01 at k = T.
inline double step_size_decay(double h0, int k, int total_steps, double h_prev) {
    (void)h0;
    if (total_steps < 1)
        throw std::invalid_argument("step_size_decay: T must be positive");
    if (k < 0 || k > total_steps)
        throw std::invalid_argument("step_size_decay: step index outside [0, T]");
    const double factor = 1.0 - 0.99 * (static_cast<double>(k) / static_cast<double>(total_steps));
    return factor * h_prev;
}

// Energy whose Langevin stationary law the chain targets (w = 0):
//   ||z - anchor||^2 / (2 sigma_t^2) + ||A(z) - y||^2 / (2 m^2).
inline double langevin_energy(const Signal& z, const Signal& anchor, double sigma_t,
                              const MeasurementOperator& op, const Measurement& y, double m) {
    double e = squared_norm(z - anchor) / (2.0 * sigma_t * sigma_t);
    auto az = apply_operator(op, z);
    double r2 = 0.0;
    for (std::size_t j = 0; j < az.size(); ++j) {
        double r = az[j] - y.values[j];
        r2 += r * r;
    }
    return e + r2 / (2.0 * m * m);
}

// Deterministic part of the update (the eps = 0 step):
//   (1-w) z + w z_in - h * [ (z - anchor) / sigma_t^2 + grad / m^2 ].
inline Signal langevin_drift(const LangevinState& state, const MeasurementOperator& op,
                             const Measurement& y, double sigma_t, const PosteriorConfig& cfg) {
    if (!(sigma_t > 0.0))
        throw std::invalid_argument("langevin_drift: sigma_t must be positive");
    Signal grad = residual_gradient(op, state.iterate, y);
    const double w = cfg.inject_weight;
    const double h = state.current_h;
    const double inv_s2 = 1.0 / (sigma_t * sigma_t);
    const double inv_m2 = 1.0 / (cfg.data_scale * cfg.data_scale);
    Signal out(state.iterate.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double drift = (state.iterate[i] - state.anchor[i]) * inv_s2 + grad[i] * inv_m2;
        out[i] = (1.0 - w) * state.iterate[i] + w * state.reference[i] - h * drift;
    }
    return out;
}

// One Langevin update; increments the step counter and decays the running h.
inline LangevinState langevin_step(const LangevinState& state, const MeasurementOperator& op,
                                   const Measurement& y, double sigma_t, const PosteriorConfig& cfg,
                                   Rng& rng) {
    LangevinState next;
    next.anchor = state.anchor;
    next.reference = state.reference;
    next.iterate = langevin_drift(state, op, y, sigma_t, cfg);
    const double noise_scale = std::sqrt(2.0 * state.current_h);
    for (double& x : next.iterate.values) x += noise_scale * rng.normal();
    next.step_index = state.step_index + 1;
    if (!all_finite(next.iterate))
        throw NonFiniteError(next.step_index);
    next.current_h = step_size_decay(cfg.step_size, next.step_index, cfg.langevin_steps, state.current_h);
    return next;
}

// Re-noising kernel to timestep tau_prev. The VP-scaled form keeps the solver
// input on-distribution; the unscaled form matches the listing verbatim and is
// kept for ablation.
inline Signal renoise(const Signal& z0_opt, int tau_prev, const NoiseSchedule& schedule, Rng& rng,
                      RenoiseMode mode = RenoiseMode::kVpScaled) {
    schedule.require_valid_timestep(tau_prev);
    const double a = mode == RenoiseMode::kVpScaled ? schedule.alpha(tau_prev) : 1.0;
    const double s = schedule.sigma(tau_prev);
    Signal out(z0_opt.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * z0_opt[i] + s * rng.normal();
    out.rows = z0_opt.rows;
    out.cols = z0_opt.cols;
    return out;
}

// Gradient-descent baseline on the measurement residual (comparison only):
//   solver_prev + eta * grad_{z_t}( -||y - A(x0_map(z_t))||^2 ),
// with the gradient taken through the differentiable x0 map by central
// differences at desk scale.
inline Signal dps_step(const Signal& z_t, const std::function<Signal(const Signal&)>& x0_map,
                       const MeasurementOperator& op, const Measurement& y, double eta,
                       const Signal& solver_prev) {
    require_same_dim(z_t, solver_prev, "dps_step");
    auto objective = [&](const Signal& z) {
        auto az = apply_operator(op, x0_map(z));
        double r2 = 0.0;
        for (std::size_t j = 0; j < az.size(); ++j) {
            double r = y.values[j] - az[j];
            r2 += r * r;
        }
        return r2;
    };
    Signal out = solver_prev;
    Signal probe = z_t;
    for (std::size_t i = 0; i < z_t.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::abs(z_t[i]));
        probe[i] = z_t[i] + h;
        const double fp = objective(probe);
        probe[i] = z_t[i] - h;
        const double fm = objective(probe);
        probe[i] = z_t[i];
        out[i] -= eta * (fp - fm) / (2.0 * h);
    }
    return out;
}

}  // namespace postsolve
