#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sudlerlab/errors.hpp"
#include "sudlerlab/fixed_point.hpp"
#include "sudlerlab/rotation.hpp"
#include "sudlerlab/summation.hpp"

namespace sudlerlab::birkhoff {

inline constexpr double pi_v = 3.14159265358979323846;

enum class summand_family { log_sudler, log_diophantine, beck_sawtooth, indicator };

// Summand f with zero-mean normalization where the family requires it:
//   log_sudler      f(x) = log|2 sin(pi x)|
//   log_diophantine f(x) = log(2e ||x||)
//   beck_sawtooth   f(x) = {x} - 1/2
//   indicator       f(x) = I_[a,b]({x}) - (b - a)
struct summand {
    summand_family family = summand_family::log_sudler;
    double a = 0.0, b = 1.0;

    static summand log_sudler() { return {summand_family::log_sudler, 0.0, 1.0}; }
    static summand log_diophantine() { return {summand_family::log_diophantine, 0.0, 1.0}; }
    static summand beck_sawtooth() { return {summand_family::beck_sawtooth, 0.0, 1.0}; }
    static summand indicator(double a, double b) {
        if (!(a >= 0.0 && a < b && b <= 1.0) || !(b - a > 0.0 && b - a < 1.0))
            throw invalid_interval("indicator requires 0 <= a < b <= 1 with 0 < b-a < 1");
        return {summand_family::indicator, a, b};
    }
};

struct term_value {
    double v = 0.0;
    double e = 0.0; // per-term absolute error contribution
};

// Evaluates one summand term from the fixed-point orbit value. Immutable after
// construction; shared freely across worker threads.
class term_evaluator {
public:
    term_evaluator(const summand& s, std::uint32_t bits) : s_(s), bits_(bits) {
        if (s.family == summand_family::indicator) {
            summand::indicator(s.a, s.b); // revalidate bounds
            a_fp_ = fixed_fraction::from_double(s.a, bits);
            b_is_one_ = s.b == 1.0;
            if (!b_is_one_) b_fp_ = fixed_fraction::from_double(s.b, bits);
        }
    }

    term_value eval(const fixed_fraction& x, std::uint64_t n) const {
        const double ulp = std::ldexp(1.0, -static_cast<int>(bits_));
        const double input_err = static_cast<double>(x.err_ulp) * ulp;
        switch (s_.family) {
        case summand_family::log_sudler: {
            double d = guard_dist(x, n);
            double v = std::log(2.0 * std::sin(pi_v * d));
            double e = (input_err + 0x1p-53) / d + 4 * 0x1p-53 * (1.0 + std::fabs(v));
            return {v, e};
        }
        case summand_family::log_diophantine: {
            double d = guard_dist(x, n);
            double v = std::log(2.0 * 2.71828182845904523536 * d);
            double e = (input_err + 0x1p-53) / d + 4 * 0x1p-53 * (1.0 + std::fabs(v));
            return {v, e};
        }
        case summand_family::beck_sawtooth: {
            double v = x.to_double() - 0.5;
            double e = input_err + 4 * 0x1p-53 * (1.0 + std::fabs(v));
            // A value within err of the wrap point may sit on the other side of
            // the jump; charge the full jump height.
            if (x.dist_to_int().mantissa_le_u64(x.err_ulp)) e += 1.0;
            return {v, e};
        }
        case summand_family::indicator: {
            std::uint64_t err = x.err_ulp;
            bool graze = x.abs_diff_saturated(a_fp_) <= err;
            if (!b_is_one_) graze = graze || x.abs_diff_saturated(b_fp_) <= err;
            if (s_.a == 0.0 || b_is_one_)
                graze = graze || x.dist_to_int().mantissa_le_u64(err);
            if (graze)
                throw singularity_suspect(
                    "orbit point within error bound of an indicator endpoint at n=" +
                    std::to_string(n));
            bool member = x.compare(a_fp_) >= 0 && (b_is_one_ || x.compare(b_fp_) <= 0);
            double v = (member ? 1.0 : 0.0) - (s_.b - s_.a);
            return {v, 4 * 0x1p-53 * (1.0 + std::fabs(v))};
        }
        }
        throw unsupported("unknown summand family");
    }

private:
    summand s_;
    std::uint32_t bits_;
    fixed_fraction a_fp_, b_fp_;
    bool b_is_one_ = false;
};

struct stream_config {
    unsigned workers = 1;
    std::uint64_t chunk_size = std::uint64_t{1} << 20;
};

// Streams (N, sum, err_bound) for N = 1..m in order. Per-term doubles are pure
// functions of n, chunks start from frac_at, and the compensated accumulation
// runs sequentially over in-order chunks, so results are byte-identical for
// any worker count or chunk size.
template <typename Visitor>
void prefix_stream(const summand& s, const fixed_fraction& alpha, std::uint64_t m,
                   const stream_config& cfg, Visitor&& visit) {
    term_evaluator ev(s, alpha.bits);
    using chunk_t = std::vector<term_value>;
    compensated_sum acc;
    double err_acc = 0.0, abs_acc = 0.0;
    rotation::chunked_stream<chunk_t>(
        m, cfg.chunk_size, cfg.workers,
        [&ev, &alpha](std::uint64_t lo, std::uint64_t hi) {
            chunk_t out;
            out.reserve(static_cast<std::size_t>(hi - lo + 1));
            rotation::orbit_cursor cur(alpha, lo - 1);
            for (std::uint64_t n = lo; n <= hi; ++n) out.push_back(ev.eval(cur.next(), n));
            return out;
        },
        [&](std::uint64_t idx, chunk_t&& ch) {
            std::uint64_t n = idx * cfg.chunk_size;
            for (const term_value& t : ch) {
                ++n;
                acc.add(t.v);
                err_acc += t.e;
                abs_acc += std::fabs(t.v);
                visit(n, acc.value(), err_acc + std::ldexp(abs_acc, -52));
            }
        });
}

struct fourier_result {
    double value = 0.0;
    double tail_bound = 0.0;
};

namespace detail {
// sin(pi * w * alpha) for w*alpha given mod 1: magnitude from ||w*alpha||,
// sign from the parity of floor(w*alpha). Near-integer parity flips are
// harmless: there the magnitude itself vanishes.
inline double signed_sin_pi(const fixed_fraction& frac, bool parity) {
    double s = std::sin(pi_v * frac.dist_to_int().to_double());
    return parity ? -s : s;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > ~std::uint64_t{0} / a)
        throw unsupported("frequency index overflows 64 bits");
    return a * b;
}

inline double orbit_reciprocal_tail(const fixed_fraction& alpha, std::uint64_t n_max,
                                    std::uint64_t k_cutoff, double weight_scale,
                                    std::uint64_t weight_horizon) {
    compensated_sum tail;
    rotation::orbit_cursor cur(alpha, 0);
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        double d = guard_dist(cur.next(), n);
        double w = weight_horizon
                       ? 1.0 - static_cast<double>(n) / static_cast<double>(weight_horizon)
                       : 1.0;
        tail.add(weight_scale * w / (static_cast<double>(k_cutoff) * d));
    }
    return tail.value();
}
} // namespace detail

// Dirichlet-kernel form of log P_N: sum_{m<=K} (1/(2m)) (1 - sin(pi(2N+1)m a)/sin(pi m a)).
// tail_bound = sum_{n<=N} 1/(K ||n a||); the constant 1 is deliberately
// conservative relative to the summation-by-parts estimate it implements.
inline fourier_result fourier_log_sudler(const fixed_fraction& alpha, std::uint64_t n_index,
                                         std::uint64_t k_cutoff) {
    if (k_cutoff == 0) throw unsupported("cutoff K must be at least 1");
    std::uint64_t two_n1 = detail::checked_mul(2, n_index) + 1;
    compensated_sum s;
    for (std::uint64_t m = 1; m <= k_cutoff; ++m) {
        bool par_den = false, par_num = false;
        fixed_fraction xm = alpha.mul_u64_mod1(m, &par_den);
        double dm = guard_dist(xm, m);
        double den = std::sin(pi_v * dm);
        if (par_den) den = -den;
        fixed_fraction xw = alpha.mul_u64_mod1(detail::checked_mul(two_n1, m), &par_num);
        double num = detail::signed_sin_pi(xw, par_num);
        s.add((1.0 - num / den) / (2.0 * static_cast<double>(m)));
    }
    fourier_result r;
    r.value = s.value();
    r.tail_bound = detail::orbit_reciprocal_tail(alpha, n_index, k_cutoff, 1.0, 0);
    return r;
}

// Fejer-kernel form of the running mean (1/M) sum_{N=0}^{M-1} log P_N:
// sum_{m<=K} (1/(2m)) (1 - sin^2(pi M m a)/(M sin^2(pi m a))). Squares make
// the floor parities irrelevant. tail_bound carries the Fejer weights.
inline fourier_result fejer_average_log_sudler(const fixed_fraction& alpha, std::uint64_t m_horizon,
                                               std::uint64_t k_cutoff) {
    if (m_horizon == 0) throw unsupported("M must be at least 1");
    if (k_cutoff == 0) throw unsupported("cutoff K must be at least 1");
    compensated_sum s;
    for (std::uint64_t m = 1; m <= k_cutoff; ++m) {
        fixed_fraction xm = alpha.mul_u64_mod1(m);
        double dm = guard_dist(xm, m);
        double den = std::sin(pi_v * dm);
        fixed_fraction xw = alpha.mul_u64_mod1(detail::checked_mul(m_horizon, m));
        double num = std::sin(pi_v * xw.dist_to_int().to_double());
        double ratio = num / den;
        s.add((1.0 - ratio * ratio / static_cast<double>(m_horizon)) /
              (2.0 * static_cast<double>(m)));
    }
    fourier_result r;
    r.value = s.value();
    r.tail_bound = detail::orbit_reciprocal_tail(alpha, m_horizon - 1, k_cutoff, 1.0, m_horizon);
    return r;
}

} // namespace sudlerlab::birkhoff
