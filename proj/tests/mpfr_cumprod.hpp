#pragma once

#include <mpfr.h>

#include <cstddef>
#include <vector>

// Reference cumulative product of (1 - beta_i) over a linear beta ramp,
// evaluated at 256-bit precision. Test-only oracle.
inline std::vector<double> mpfr_linear_ramp_cumprod(int steps, double beta_start, double beta_end) {
    std::vector<double> out(static_cast<std::size_t>(steps));
    mpfr_t prod, beta, bs, be, step, one;
    mpfr_inits2(256, prod, beta, bs, be, step, one, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_d(prod, 1.0, MPFR_RNDN);
    mpfr_set_d(bs, beta_start, MPFR_RNDN);
    mpfr_set_d(be, beta_end, MPFR_RNDN);
    mpfr_set_d(one, 1.0, MPFR_RNDN);
    mpfr_sub(step, be, bs, MPFR_RNDN);
    mpfr_div_si(step, step, steps - 1, MPFR_RNDN);
    for (int i = 0; i < steps; ++i) {
        mpfr_mul_si(beta, step, i, MPFR_RNDN);
        mpfr_add(beta, beta, bs, MPFR_RNDN);
        mpfr_sub(beta, one, beta, MPFR_RNDN);
        mpfr_mul(prod, prod, beta, MPFR_RNDN);
        out[static_cast<std::size_t>(i)] = mpfr_get_d(prod, MPFR_RNDN);
    }
    mpfr_clears(prod, beta, bs, be, step, one, static_cast<mpfr_ptr>(nullptr));
    return out;
}
