#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "postsolve/signal.hpp"

namespace postsolve {

struct MetricReport {
    double mse = 0.0;
    double psnr = 0.0;  // +infinity sentinel when mse == 0
    double ssim = 1.0;
};

inline double mse(const Signal& a, const Signal& b) {
    require_same_dim(a, b, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

inline double psnr(const Signal& a, const Signal& b, double peak) {
    if (!(peak > 0.0))
        throw std::invalid_argument("psnr: peak must be positive");
    const double e = mse(a, b);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / e);
}

// Mean local SSIM with a uniform square window, C1 = (0.01*peak)^2,
// C2 = (0.03*peak)^2. Windows slide over every position where they fit.
inline double ssim(const Signal& a, const Signal& b, int window = 7, double peak = 1.0) {
    if (!a.has_shape() || !b.has_shape() || a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("ssim: signals must share a 2D lattice shape");
    if (window < 1 || window % 2 == 0 || window > a.rows || window > a.cols)
        throw std::invalid_argument("ssim: window must be odd and fit the lattice");
    if (!(peak > 0.0))
        throw std::invalid_argument("ssim: peak must be positive");

    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    const double wn = static_cast<double>(window) * window;

    double total = 0.0;
    int count = 0;
    for (int r0 = 0; r0 + window <= a.rows; ++r0) {
        for (int c0 = 0; c0 + window <= a.cols; ++c0) {
            double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
            for (int r = r0; r < r0 + window; ++r)
                for (int c = c0; c < c0 + window; ++c) {
                    const double x = a[static_cast<std::size_t>(r) * a.cols + c];
                    const double y = b[static_cast<std::size_t>(r) * b.cols + c];
                    sa += x;
                    sb += y;
                    saa += x * x;
                    sbb += y * y;
                    sab += x * y;
                }
            const double mua = sa / wn;
            const double mub = sb / wn;
            const double va = saa / wn - mua * mua;
            const double vb = sbb / wn - mub * mub;
            const double cov = sab / wn - mua * mub;
            const double num = (2.0 * mua * mub + c1) * (2.0 * cov + c2);
            const double den = (mua * mua + mub * mub + c1) * (va + vb + c2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

inline MetricReport metric_report(const Signal& a, const Signal& b, double peak = 1.0, int window = 7) {
    MetricReport r;
    r.mse = mse(a, b);
    r.psnr = psnr(a, b, peak);
    r.ssim = (a.has_shape() && b.has_shape()) ? ssim(a, b, window, peak) : 1.0;
    return r;
}

}  // namespace postsolve
