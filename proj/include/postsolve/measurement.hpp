#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "postsolve/fourier.hpp"
#include "postsolve/rng.hpp"
#include "postsolve/signal.hpp"

namespace postsolve {

// Row-selection operator P built from elementary unit vectors; P * P^T = I.
struct MaskOperator {
    std::vector<std::size_t> kept_indices;  // sorted, distinct
    double noise_sigma = 0.0;
    std::size_t dimension = 0;

    void validate() const {
        if (dimension == 0)
            throw std::invalid_argument("MaskOperator: dimension must be positive");
        if (kept_indices.empty())
            throw std::invalid_argument("MaskOperator: at least one index must be kept");
        if (noise_sigma < 0.0)
            throw std::invalid_argument("MaskOperator: noise_sigma must be non-negative");
        for (std::size_t i = 0; i < kept_indices.size(); ++i) {
            if (kept_indices[i] >= dimension)
                throw std::invalid_argument("MaskOperator: kept index out of range");
            if (i > 0 && kept_indices[i] <= kept_indices[i - 1])
                throw std::invalid_argument("MaskOperator: kept indices must be sorted and distinct");
        }
    }

    std::size_t output_dim() const { return kept_indices.size(); }

    std::vector<double> apply(const Signal& z) const {
        if (z.size() != dimension)
            throw std::invalid_argument("MaskOperator: dimension mismatch");
        std::vector<double> out(kept_indices.size());
        for (std::size_t j = 0; j < kept_indices.size(); ++j) out[j] = z[kept_indices[j]];
        return out;
    }
};

// Nonlinear forward map |F P z|: a stride sub-sampling P keeping a k/n
// fraction of the grid (values elsewhere zeroed), followed by the unitary
// 2D DFT of the M x N lattice and an entrywise modulus.
struct FourierMagnitudeOperator {
    int grid_rows = 0;
    int grid_cols = 0;
    int oversample_keep = 2;  // k
    int oversample_of = 8;    // n
    double noise_sigma = 0.0;

    void validate() const {
        if (grid_rows < 1 || grid_cols < 1)
            throw std::invalid_argument("FourierMagnitudeOperator: grid dimensions must be positive");
        if (oversample_keep < 1 || oversample_of < 1 || oversample_keep > oversample_of)
            throw std::invalid_argument("FourierMagnitudeOperator: need 1 <= k <= n");
        if (noise_sigma < 0.0)
            throw std::invalid_argument("FourierMagnitudeOperator: noise_sigma must be non-negative");
    }

    std::size_t dimension() const { return static_cast<std::size_t>(grid_rows) * grid_cols; }
    std::size_t output_dim() const { return dimension(); }

    // ceil(d * k / n) evenly strided coordinates, first index 0.
    std::vector<std::size_t> selected_indices() const {
        const std::size_t d = dimension();
        const std::size_t m =
            (d * static_cast<std::size_t>(oversample_keep) + static_cast<std::size_t>(oversample_of) - 1) /
            static_cast<std::size_t>(oversample_of);
        std::vector<std::size_t> sel(m);
        for (std::size_t j = 0; j < m; ++j) sel[j] = (j * d) / m;
        return sel;
    }

    std::vector<std::complex<double>> forward_complex(const Signal& z) const {
        if (z.size() != dimension())
            throw std::invalid_argument("FourierMagnitudeOperator: dimension mismatch");
        std::vector<double> masked(dimension(), 0.0);
        for (std::size_t i : selected_indices()) masked[i] = z[i];
        Dft2 dft(grid_rows, grid_cols);
        return dft.forward_real(masked);
    }

    std::vector<double> apply(const Signal& z) const {
        auto spectrum = forward_complex(z);
        std::vector<double> out(spectrum.size());
        for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = std::abs(spectrum[i]);
        return out;
    }
};

using MeasurementOperator = std::variant<MaskOperator, FourierMagnitudeOperator>;

struct Measurement {
    std::vector<double> values;
};

inline std::size_t operator_dimension(const MeasurementOperator& op) {
    return std::visit([](const auto& o) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(o)>, MaskOperator>)
            return o.dimension;
        else
            return o.dimension();
    }, op);
}

inline std::size_t operator_output_dim(const MeasurementOperator& op) {
    return std::visit([](const auto& o) { return o.output_dim(); }, op);
}

inline double operator_noise_sigma(const MeasurementOperator& op) {
    return std::visit([](const auto& o) { return o.noise_sigma; }, op);
}

// Noiseless forward application A(z).
inline std::vector<double> apply_operator(const MeasurementOperator& op, const Signal& z) {
    return std::visit([&z](const auto& o) { return o.apply(z); }, op);
}

// Independent Bernoulli(keep_probability) per coordinate; resampled while
// empty, with a uniform single-index fallback so keep_probability = 0 still
// terminates with |kept| >= 1.
inline MaskOperator sample_mask(std::size_t dimension, double keep_probability, Rng& rng,
                                double noise_sigma = 0.0) {
    if (dimension == 0)
        throw std::invalid_argument("sample_mask: dimension must be positive");
    if (keep_probability < 0.0 || keep_probability > 1.0)
        throw std::invalid_argument("sample_mask: keep_probability must lie in [0, 1]");
    MaskOperator op;
    op.dimension = dimension;
    op.noise_sigma = noise_sigma;
    for (int attempt = 0; attempt < 1000 && op.kept_indices.empty(); ++attempt) {
        for (std::size_t i = 0; i < dimension; ++i)
            if (rng.uniform() <= keep_probability) op.kept_indices.push_back(i);
    }
    if (op.kept_indices.empty())
        op.kept_indices.push_back(static_cast<std::size_t>(rng.next_u64() % dimension));
    return op;
}

// y = A(z0) + noise_sigma * eps.
inline Measurement measure(const MeasurementOperator& op, const Signal& z0, Rng& rng) {
    Measurement m;
    m.values = apply_operator(op, z0);
    const double sigma = operator_noise_sigma(op);
    if (sigma > 0.0)
        for (double& v : m.values) v += sigma * rng.normal();
    return m;
}

// Exact gradient of (1/2) * ||A(z) - y||^2 (the 1/m^2 scale is the caller's).
inline Signal residual_gradient(const MeasurementOperator& op, const Signal& z, const Measurement& y) {
    if (y.values.size() != operator_output_dim(op))
        throw std::invalid_argument("residual_gradient: measurement length mismatch");
    if (z.size() != operator_dimension(op))
        throw std::invalid_argument("residual_gradient: signal dimension mismatch");

    if (const auto* mask = std::get_if<MaskOperator>(&op)) {
        Signal g(z.size());
        for (std::size_t j = 0; j < mask->kept_indices.size(); ++j) {
            const std::size_t i = mask->kept_indices[j];
            g[i] = z[i] - y.values[j];
        }
        return g;
    }

    const auto& f = std::get<FourierMagnitudeOperator>(op);
    auto spectrum = f.forward_complex(z);
    // chain rule through the modulus: d|U|/dU = U / |U|, subgradient 0 at U = 0
    std::vector<std::complex<double>> weighted(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double mag = std::abs(spectrum[i]);
        weighted[i] = mag > 0.0 ? spectrum[i] * ((mag - y.values[i]) / mag) : 0.0;
    }
    Dft2 dft(f.grid_rows, f.grid_cols);
    auto back = dft.inverse(weighted);
    Signal g(z.size());
    for (std::size_t i : f.selected_indices()) g[i] = back[i].real();
    return g;
}

}  // namespace postsolve
