#pragma once

#include <cmath>
#include <stdexcept>

#include "postsolve/rng.hpp"
#include "postsolve/schedule.hpp"
#include "postsolve/score.hpp"
#include "postsolve/signal.hpp"

namespace postsolve {

// Consistency-function coefficients. With the defaults the one-shot estimate
// reduces exactly to predict_x0.
struct SolverParams {
    double c_skip = 0.0;
    double c_out = 1.0;
};

// VP forward kernel: sqrt(abar_t) * z0 + sqrt(1 - abar_t) * eps, eps ~ N(0, I).
inline Signal forward_noise(const Signal& z0, int t, const NoiseSchedule& schedule, Rng& rng) {
    schedule.require_valid_timestep(t);
    if (!all_finite(z0))
        throw std::invalid_argument("forward_noise: non-finite input");
    const double a = schedule.alpha(t);
    const double s = schedule.sigma(t);
    Signal out(z0.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * z0[i] + s * rng.normal();
    out.rows = z0.rows;
    out.cols = z0.cols;
    return out;
}

inline Signal predict_x0(const Signal& z_t, const Signal& eps, int t, const NoiseSchedule& schedule) {
    require_same_dim(z_t, eps, "predict_x0");
    const double abar = schedule.alpha_bar(t);
    if (!(abar > 0.0))
        throw std::domain_error("predict_x0: alpha_bar(t) must be positive");
    const double a = std::sqrt(abar);
    const double s = schedule.sigma(t);
    Signal out(z_t.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (z_t[i] - s * eps[i]) / a;
    out.rows = z_t.rows;
    out.cols = z_t.cols;
    return out;
}

// Deterministic DDIM update from t to t_prev < t, re-noising the x0 prediction
// with the same predicted eps.
inline Signal ddim_step(const Signal& z_t, const Signal& eps, int t, int t_prev,
                        const NoiseSchedule& schedule) {
    if (t_prev >= t)
        throw std::invalid_argument("ddim_step: t_prev must be < t");
    schedule.require_valid_timestep(t_prev);
    Signal x0 = predict_x0(z_t, eps, t, schedule);
    const double a_prev = schedule.alpha(t_prev);
    const double s_prev = schedule.sigma(t_prev);
    Signal out(z_t.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a_prev * x0[i] + s_prev * eps[i];
    out.rows = z_t.rows;
    out.cols = z_t.cols;
    return out;
}

// One-shot consistency estimate c_skip * z + c_out * (z - sigma_t * eps) / alpha_t.
inline Signal consistency_estimate(const Signal& z, int t, ConditionLabel cond,
                                   const GaussianMixtureScore& model, const SolverParams& params,
                                   const NoiseSchedule& schedule) {
    Signal eps = epsilon(model, z, t, cond, schedule);
    const double a = schedule.alpha(t);
    const double s = schedule.sigma(t);
    Signal out(z.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = params.c_skip * z[i] + params.c_out * (z[i] - s * eps[i]) / a;
    out.rows = z.rows;
    out.cols = z.cols;
    return out;
}

}  // namespace postsolve
