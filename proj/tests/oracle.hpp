#pragma once

#include <mpfr.h>

#include <cstdint>

// High-precision reference values, computed independently of the library's
// fixed-point pipeline. 768 bits keeps the reference error far below any
// tolerance used in the tests.

namespace oracle {

inline constexpr mpfr_prec_t precision = 768;

class real {
  public:
    real() {
        mpfr_init2(x_, precision);
        mpfr_set_zero(x_, 1);
    }
    explicit real(double d) {
        mpfr_init2(x_, precision);
        mpfr_set_d(x_, d, MPFR_RNDN);
    }
    real(const real& o) {
        mpfr_init2(x_, precision);
        mpfr_set(x_, o.x_, MPFR_RNDN);
    }
    real& operator=(const real& o) {
        if (this != &o) mpfr_set(x_, o.x_, MPFR_RNDN);
        return *this;
    }
    ~real() { mpfr_clear(x_); }

    mpfr_ptr get() { return x_; }
    mpfr_srcptr get() const { return x_; }
    double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }

  private:
    mpfr_t x_;
};

inline real sqrt_value(unsigned long d) {
    real r;
    mpfr_sqrt_ui(r.get(), d, MPFR_RNDN);
    return r;
}

// fractional part of (1 + sqrt 5)/2
inline real golden() {
    real r = sqrt_value(5);
    mpfr_sub_ui(r.get(), r.get(), 1, MPFR_RNDN);
    mpfr_div_ui(r.get(), r.get(), 2, MPFR_RNDN);
    return r;
}

inline real sqrt_frac(unsigned long d) {
    real r = sqrt_value(d);
    real f = r;
    mpfr_floor(f.get(), f.get());
    mpfr_sub(r.get(), r.get(), f.get(), MPFR_RNDN);
    return r;
}

inline real euler_frac() {
    real r;
    mpfr_set_ui(r.get(), 1, MPFR_RNDN);
    mpfr_exp(r.get(), r.get(), MPFR_RNDN);
    mpfr_sub_ui(r.get(), r.get(), 2, MPFR_RNDN);
    return r;
}

inline real frac_mul(const real& alpha, std::uint64_t n) {
    real r;
    mpfr_mul_ui(r.get(), alpha.get(), static_cast<unsigned long>(n), MPFR_RNDN);
    real f = r;
    mpfr_floor(f.get(), f.get());
    mpfr_sub(r.get(), r.get(), f.get(), MPFR_RNDN);
    return r;
}

inline double frac_at(const real& alpha, std::uint64_t n) { return frac_mul(alpha, n).to_double(); }

inline double dist_to_int(const real& alpha, std::uint64_t n) {
    real f = frac_mul(alpha, n);
    real g;
    mpfr_ui_sub(g.get(), 1, f.get(), MPFR_RNDN);
    if (mpfr_cmp(f.get(), g.get()) <= 0) return f.to_double();
    return g.to_double();
}

// sum_{n=1..m} log|2 sin(pi {n alpha})|
inline double log_sudler(const real& alpha, std::uint64_t m) {
    real acc;
    real pi;
    mpfr_const_pi(pi.get(), MPFR_RNDN);
    for (std::uint64_t n = 1; n <= m; ++n) {
        real x = frac_mul(alpha, n);
        mpfr_mul(x.get(), x.get(), pi.get(), MPFR_RNDN);
        mpfr_sin(x.get(), x.get(), MPFR_RNDN);
        mpfr_abs(x.get(), x.get(), MPFR_RNDN);
        mpfr_mul_ui(x.get(), x.get(), 2, MPFR_RNDN);
        mpfr_log(x.get(), x.get(), MPFR_RNDN);
        mpfr_add(acc.get(), acc.get(), x.get(), MPFR_RNDN);
    }
    return acc.to_double();
}

// erfc(1/sqrt(2 t))
inline double stable_half_cdf(double t) {
    if (t <= 0.0) return 0.0;
    real x(2.0 * t);
    mpfr_sqrt(x.get(), x.get(), MPFR_RNDN);
    mpfr_ui_div(x.get(), 1, x.get(), MPFR_RNDN);
    mpfr_erfc(x.get(), x.get(), MPFR_RNDN);
    return x.to_double();
}

} // namespace oracle
