#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace postsolve {

// Flat real vector, optionally carrying a 2D lattice shape (rows x cols).
// rows == 0 means no shape attached.
struct Signal {
    std::vector<double> values;
    int rows = 0;
    int cols = 0;

    Signal() = default;
    explicit Signal(std::size_t n, double fill = 0.0) : values(n, fill) {}
    Signal(std::vector<double> v) : values(std::move(v)) {}
    Signal(std::initializer_list<double> init) : values(init) {}
    Signal(std::vector<double> v, int r, int c) : values(std::move(v)), rows(r), cols(c) {
        if (r <= 0 || c <= 0 || static_cast<std::size_t>(r) * c != values.size())
            throw std::invalid_argument("Signal: lattice shape does not match value count");
    }

    std::size_t size() const { return values.size(); }
    bool has_shape() const { return rows > 0; }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

inline void require_same_dim(const Signal& a, const Signal& b, const char* where) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

inline bool all_finite(const Signal& s) {
    for (double x : s.values)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double dot(const Signal& a, const Signal& b) {
    require_same_dim(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double squared_norm(const Signal& a) { return dot(a, a); }

inline Signal operator+(const Signal& a, const Signal& b) {
    require_same_dim(a, b, "operator+");
    Signal out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

inline Signal operator-(const Signal& a, const Signal& b) {
    require_same_dim(a, b, "operator-");
    Signal out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return out;
}

inline Signal operator*(double c, const Signal& a) {
    Signal out = a;
    for (double& x : out.values) x *= c;
    return out;
}

}  // namespace postsolve
