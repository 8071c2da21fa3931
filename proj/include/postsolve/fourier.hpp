#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace postsolve {

// Unitary 2D DFT on an M x N row-major grid:
//   F[u,v] = (1/sqrt(MN)) * sum_{x,y} f(x,y) exp(-2*pi*i*(x*u/M + y*v/N)).
// Direct row-column evaluation with precomputed twiddles; grids here stay small.
class Dft2 {
public:
    Dft2(int rows, int cols) : rows_(rows), cols_(cols) {
        if (rows < 1 || cols < 1)
            throw std::invalid_argument("Dft2: grid dimensions must be positive");
        row_tw_ = twiddles(rows);
        col_tw_ = twiddles(cols);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }

    std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& in) const {
        return transform(in, false);
    }

    // Inverse of the unitary transform (conjugate kernel, same normalization).
    std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& in) const {
        return transform(in, true);
    }

    std::vector<std::complex<double>> forward_real(const std::vector<double>& in) const {
        if (in.size() != size())
            throw std::invalid_argument("Dft2: input length does not match grid");
        std::vector<std::complex<double>> c(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) c[i] = in[i];
        return forward(c);
    }

private:
    static std::vector<std::complex<double>> twiddles(int n) {
        std::vector<std::complex<double>> tw(static_cast<std::size_t>(n) * n);
        const double step = -6.283185307179586476925286766559 / n;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double ang = step * static_cast<double>((static_cast<long long>(a) * b) % n);
                tw[static_cast<std::size_t>(a) * n + b] = {std::cos(ang), std::sin(ang)};
            }
        return tw;
    }

    std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& in,
                                                bool inverse) const {
        if (in.size() != size())
            throw std::invalid_argument("Dft2: input length does not match grid");
        auto pick = [inverse](const std::complex<double>& w) { return inverse ? std::conj(w) : w; };

        // columns first (length-cols transforms along each row)
        std::vector<std::complex<double>> mid(in.size());
        for (int x = 0; x < rows_; ++x)
            for (int v = 0; v < cols_; ++v) {
                std::complex<double> acc = 0.0;
                for (int y = 0; y < cols_; ++y)
                    acc += in[static_cast<std::size_t>(x) * cols_ + y] * pick(col_tw_[static_cast<std::size_t>(v) * cols_ + y]);
                mid[static_cast<std::size_t>(x) * cols_ + v] = acc;
            }
        // then rows
        std::vector<std::complex<double>> out(in.size());
        const double norm = 1.0 / std::sqrt(static_cast<double>(size()));
        for (int u = 0; u < rows_; ++u)
            for (int v = 0; v < cols_; ++v) {
                std::complex<double> acc = 0.0;
                for (int x = 0; x < rows_; ++x)
                    acc += mid[static_cast<std::size_t>(x) * cols_ + v] * pick(row_tw_[static_cast<std::size_t>(u) * rows_ + x]);
                out[static_cast<std::size_t>(u) * cols_ + v] = acc * norm;
            }
        return out;
    }

    int rows_;
    int cols_;
    std::vector<std::complex<double>> row_tw_;
    std::vector<std::complex<double>> col_tw_;
};

}  // namespace postsolve
