#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "postsolve/schedule.hpp"
#include "postsolve/signal.hpp"

namespace postsolve {

// Class-label condition standing in for a text prompt. kUnconditional
// marginalizes over every component.
struct ConditionLabel {
    static constexpr int kUnconditional = -1;
    int label = kUnconditional;

    bool unconditional() const { return label == kUnconditional; }
    static ConditionLabel unconditioned() { return ConditionLabel{kUnconditional}; }
    static ConditionLabel of(int k) { return ConditionLabel{k}; }
};

struct MixtureComponent {
    Signal mean;
    Signal diag_variance;
    double weight = 0.0;
    int label = 0;
};

// Analytic score / epsilon oracle: a label-conditioned Gaussian mixture whose
// noised marginals are available in closed form.
struct GaussianMixtureScore {
    std::vector<MixtureComponent> components;
    std::size_t dimension = 0;

    void validate() const {
        if (components.empty())
            throw std::invalid_argument("GaussianMixtureScore: no components");
        double wsum = 0.0;
        for (const auto& c : components) {
            if (c.mean.size() != dimension || c.diag_variance.size() != dimension)
                throw std::invalid_argument("GaussianMixtureScore: component dimension mismatch");
            if (c.weight <= 0.0)
                throw std::invalid_argument("GaussianMixtureScore: weights must be positive");
            if (c.label < 0)
                throw std::invalid_argument("GaussianMixtureScore: labels must be non-negative");
            for (double v : c.diag_variance.values)
                if (!(v > 0.0))
                    throw std::invalid_argument("GaussianMixtureScore: variances must be strictly positive");
            wsum += c.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-9)
            throw std::invalid_argument("GaussianMixtureScore: weights must sum to 1 (got " +
                                        std::to_string(wsum) + ")");
    }

    std::vector<std::size_t> component_set(ConditionLabel cond) const {
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < components.size(); ++k)
            if (cond.unconditional() || components[k].label == cond.label) idx.push_back(k);
        if (idx.empty())
            throw std::invalid_argument("GaussianMixtureScore: unknown label " + std::to_string(cond.label));
        return idx;
    }
};

namespace detail {

// log N(z; sqrt(abar)*mu, abar*v + (1-abar)) summed over coordinates.
inline double noised_component_logpdf(const MixtureComponent& c, const Signal& z, double abar) {
    const double sa = std::sqrt(abar);
    const double s2 = 1.0 - abar;
    double lp = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double var = abar * c.diag_variance[i] + s2;
        double diff = z[i] - sa * c.mean[i];
        lp += -0.5 * (diff * diff / var + std::log(6.283185307179586476925286766559 * var));
    }
    return lp;
}

}  // namespace detail

// log p_t(z) of the noised mixture marginal, restricted to the labelled
// components (renormalized) when cond is not UNCONDITIONAL.
inline double log_marginal(const GaussianMixtureScore& model, const Signal& z, int t,
                           ConditionLabel cond, const NoiseSchedule& schedule) {
    if (z.size() != model.dimension)
        throw std::invalid_argument("log_marginal: dimension mismatch");
    const double abar = schedule.alpha_bar(t);
    auto idx = model.component_set(cond);
    double wsum = 0.0;
    for (auto k : idx) wsum += model.components[k].weight;

    double max_lp = -std::numeric_limits<double>::infinity();
    std::vector<double> lps(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& c = model.components[idx[j]];
        lps[j] = std::log(c.weight / wsum) + detail::noised_component_logpdf(c, z, abar);
        max_lp = std::max(max_lp, lps[j]);
    }
    double acc = 0.0;
    for (double lp : lps) acc += std::exp(lp - max_lp);
    return max_lp + std::log(acc);
}

// Gradient of log p_t(z). Responsibilities are formed in log space with
// max-subtraction; (1 - abar) can be ~1e-4 near t = 1.
inline Signal score(const GaussianMixtureScore& model, const Signal& z, int t,
                    ConditionLabel cond, const NoiseSchedule& schedule) {
    if (z.size() != model.dimension)
        throw std::invalid_argument("score: dimension mismatch");
    const double abar = schedule.alpha_bar(t);
    const double sa = std::sqrt(abar);
    const double s2 = 1.0 - abar;
    auto idx = model.component_set(cond);

    std::vector<double> lps(idx.size());
    double max_lp = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& c = model.components[idx[j]];
        lps[j] = std::log(c.weight) + detail::noised_component_logpdf(c, z, abar);
        max_lp = std::max(max_lp, lps[j]);
    }
    double norm = 0.0;
    for (double& lp : lps) {
        lp = std::exp(lp - max_lp);
        norm += lp;
    }

    Signal g(z.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& c = model.components[idx[j]];
        const double r = lps[j] / norm;
        for (std::size_t i = 0; i < z.size(); ++i) {
            double var = abar * c.diag_variance[i] + s2;
            g[i] += r * (-(z[i] - sa * c.mean[i]) / var);
        }
    }
    return g;
}

// Bayes-optimal epsilon prediction: eps(z, t) = -sqrt(1 - abar_t) * score(z, t).
inline Signal epsilon(const GaussianMixtureScore& model, const Signal& z, int t,
                      ConditionLabel cond, const NoiseSchedule& schedule) {
    Signal g = score(model, z, t, cond, schedule);
    const double c = -schedule.sigma(t);
    for (double& x : g.values) x *= c;
    return g;
}

// Classifier-free-guidance combination: (g + 1) * eps_cond - g * eps_uncond.
inline Signal cfg_combine(const Signal& eps_cond, const Signal& eps_uncond, double guidance) {
    require_same_dim(eps_cond, eps_uncond, "cfg_combine");
    if (guidance < 0.0)
        throw std::invalid_argument("cfg_combine: guidance must be non-negative");
    Signal out(eps_cond.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (guidance + 1.0) * eps_cond[i] - guidance * eps_uncond[i];
    return out;
}

}  // namespace postsolve
