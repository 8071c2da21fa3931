#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace postsolve {

// Discrete variance-preserving noise schedule: alpha_bar[t] = prod_{s<=t}(1 - beta_s)
// with beta linearly spaced over [beta_start, beta_end]. Timesteps at the
// interface are 1-based (tau = t reads alpha_bar[t-1]), so the printed
// posterior sequence {501, ..., 1} is preserved verbatim.
struct NoiseSchedule {
    int num_train_timesteps = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    std::vector<double> alpha_bar_values;

    void require_valid_timestep(int t) const {
        if (t < 1 || t > num_train_timesteps)
            throw std::invalid_argument("NoiseSchedule: timestep " + std::to_string(t) +
                                        " outside [1, " + std::to_string(num_train_timesteps) + "]");
    }

    double alpha_bar(int t) const {
        require_valid_timestep(t);
        return alpha_bar_values[static_cast<std::size_t>(t - 1)];
    }
    // alpha(t)^2 = alpha_bar(t), sigma(t)^2 = 1 - alpha_bar(t); their sum is 1 by construction.
    double sigma_sq(int t) const { return 1.0 - alpha_bar(t); }
    double alpha(int t) const { return std::sqrt(alpha_bar(t)); }
    double sigma(int t) const { return std::sqrt(sigma_sq(t)); }
};

inline NoiseSchedule build_ddpm_schedule(int steps, double beta_start = 1e-4, double beta_end = 0.02) {
    if (steps < 2)
        throw std::invalid_argument("build_ddpm_schedule: steps must be >= 2");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw std::invalid_argument("build_ddpm_schedule: need 0 < beta_start <= beta_end < 1");

    NoiseSchedule s;
    s.num_train_timesteps = steps;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.alpha_bar_values.resize(static_cast<std::size_t>(steps));
    double prod = 1.0;
    for (int i = 0; i < steps; ++i) {
        double beta = beta_start + (beta_end - beta_start) * static_cast<double>(i) / static_cast<double>(steps - 1);
        prod *= 1.0 - beta;
        s.alpha_bar_values[static_cast<std::size_t>(i)] = prod;
    }
    return s;
}

// Outer posterior-sampling timesteps, strictly decreasing and ending at 1,
// plus the inner diffusion-sampler step count n.
struct TimeSequence {
    std::vector<int> taus;
    int inner_steps = 1;

    void validate(const NoiseSchedule& schedule) const {
        if (taus.size() < 2)
            throw std::invalid_argument("TimeSequence: need at least two timesteps");
        if (inner_steps < 1)
            throw std::invalid_argument("TimeSequence: inner_steps must be positive");
        if (taus.front() > schedule.num_train_timesteps)
            throw std::invalid_argument("TimeSequence: first tau exceeds schedule length");
        if (taus.back() < 1)
            throw std::invalid_argument("TimeSequence: last tau must be >= 1");
        for (std::size_t i = 1; i < taus.size(); ++i)
            if (taus[i] >= taus[i - 1])
                throw std::invalid_argument("TimeSequence: taus must be strictly decreasing");
    }
};

inline TimeSequence default_posterior_sequence() {
    return TimeSequence{{501, 401, 301, 201, 101, 1}, 1};
}

}  // namespace postsolve
