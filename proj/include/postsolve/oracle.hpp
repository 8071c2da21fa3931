#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "postsolve/measurement.hpp"
#include "postsolve/schedule.hpp"
#include "postsolve/score.hpp"
#include "postsolve/signal.hpp"

namespace postsolve {

// Closed-form references used by tests and the verify suites. These stay
// independent of the sampler implementation paths they check.

struct GaussianPosterior {
    Signal mean;
    Signal diag_covariance;
};

namespace detail {

inline void precision_weighted_update(double prior_mean, double prior_var, double y, double noise_var,
                                      double& mean_out, double& var_out) {
    const double prec = 1.0 / noise_var + 1.0 / prior_var;
    var_out = 1.0 / prec;
    mean_out = (y / noise_var + prior_mean / prior_var) * var_out;
}

}  // namespace detail

// Exact p(z0 | y) for a diagonal Gaussian prior and a masked Gaussian
// likelihood: measured coordinates get the scalar conjugate update, the rest
// keep the prior.
inline GaussianPosterior conjugate_posterior(const Signal& prior_mean, const Signal& prior_var,
                                             const MaskOperator& mask, const Measurement& y) {
    require_same_dim(prior_mean, prior_var, "conjugate_posterior");
    if (prior_mean.size() != mask.dimension)
        throw std::invalid_argument("conjugate_posterior: prior dimension mismatch");
    if (y.values.size() != mask.kept_indices.size())
        throw std::invalid_argument("conjugate_posterior: measurement length mismatch");
    if (!(mask.noise_sigma > 0.0))
        throw std::invalid_argument("conjugate_posterior: zero measurement noise is degenerate");
    for (double v : prior_var.values)
        if (!(v > 0.0)) throw std::invalid_argument("conjugate_posterior: prior variance must be positive");

    GaussianPosterior post{prior_mean, prior_var};
    const double noise_var = mask.noise_sigma * mask.noise_sigma;
    for (std::size_t j = 0; j < mask.kept_indices.size(); ++j) {
        const std::size_t i = mask.kept_indices[j];
        detail::precision_weighted_update(prior_mean[i], prior_var[i], y.values[j], noise_var,
                                          post.mean[i], post.diag_covariance[i]);
    }
    return post;
}

// Stationary law of the w = 0 Langevin chain: per-coordinate product of
// N(anchor, sigma_t^2) with N(y, m^2) on measured coordinates.
inline GaussianPosterior product_of_gaussians(const Signal& anchor, double sigma_t,
                                              const MaskOperator& mask, const Measurement& y, double m) {
    if (anchor.size() != mask.dimension)
        throw std::invalid_argument("product_of_gaussians: anchor dimension mismatch");
    if (y.values.size() != mask.kept_indices.size())
        throw std::invalid_argument("product_of_gaussians: measurement length mismatch");
    if (!(sigma_t > 0.0) || !(m > 0.0))
        throw std::invalid_argument("product_of_gaussians: scales must be positive");

    GaussianPosterior post{anchor, Signal(anchor.size(), sigma_t * sigma_t)};
    for (std::size_t j = 0; j < mask.kept_indices.size(); ++j) {
        const std::size_t i = mask.kept_indices[j];
        detail::precision_weighted_update(anchor[i], sigma_t * sigma_t, y.values[j], m * m,
                                          post.mean[i], post.diag_covariance[i]);
    }
    return post;
}

// Tensor-product trapezoid grid for the quadrature Tweedie reference.
struct QuadratureSpec {
    double lo = -8.0;
    double hi = 8.0;
    int points = 2001;
};

// E[z0 | z_t] by direct numerical integration over the prior, restricted to
// the conditioned components. Test-facing; dimension capped at 3 because the
// grid is a full tensor product.
inline Signal brute_force_tweedie(const GaussianMixtureScore& model, const Signal& z, int t,
                                  ConditionLabel cond, const NoiseSchedule& schedule,
                                  const QuadratureSpec& grid = {}) {
    const std::size_t d = model.dimension;
    if (z.size() != d)
        throw std::invalid_argument("brute_force_tweedie: dimension mismatch");
    if (d > 3)
        throw std::invalid_argument("brute_force_tweedie: dimension capped at 3");
    if (grid.points < 3 || !(grid.lo < grid.hi))
        throw std::invalid_argument("brute_force_tweedie: bad quadrature spec");

    auto idx = model.component_set(cond);
    const double abar = schedule.alpha_bar(t);
    const double sa = std::sqrt(abar);
    const double kvar = 1.0 - abar;

    const std::size_t n = static_cast<std::size_t>(grid.points);
    const double step = (grid.hi - grid.lo) / static_cast<double>(n - 1);
    std::vector<double> nodes(n), trap(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = grid.lo + step * static_cast<double>(i);
    trap.front() = trap.back() = 0.5;

    double wsum = 0.0;
    for (auto k : idx) wsum += model.components[k].weight;

    double denom = 0.0;
    Signal numer(d);
    std::vector<std::size_t> pos(d, 0);
    const double log2pi = std::log(6.283185307179586476925286766559);
    while (true) {
        double logq = 0.0;
        double qw = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double x = nodes[pos[i]];
            const double diff = z[i] - sa * x;
            logq += -0.5 * (diff * diff / kvar + log2pi + std::log(kvar));
            qw *= trap[pos[i]];
        }
        double prior = 0.0;
        for (auto k : idx) {
            const auto& c = model.components[k];
            double lp = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double x = nodes[pos[i]];
                const double diff = x - c.mean[i];
                lp += -0.5 * (diff * diff / c.diag_variance[i] + log2pi + std::log(c.diag_variance[i]));
            }
            prior += (c.weight / wsum) * std::exp(lp);
        }
        const double q = qw * prior * std::exp(logq);
        denom += q;
        for (std::size_t i = 0; i < d; ++i) numer[i] += q * nodes[pos[i]];

        std::size_t axis = 0;
        while (axis < d && ++pos[axis] == n) {
            pos[axis] = 0;
            ++axis;
        }
        if (axis == d) break;
    }
    if (!(denom > 0.0))
        throw std::domain_error("brute_force_tweedie: quadrature mass vanished");
    for (double& x : numer.values) x /= denom;
    return numer;
}

}  // namespace postsolve
