#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "sudlerlab/errors.hpp"

namespace sudlerlab {

// Fractional value in [0,1) stored as a B-bit mantissa (value = mantissa * 2^-B),
// little-endian 64-bit limbs, top limb masked. err_ulp bounds the absolute error
// in units of 2^-B. Addition mod 1 is exact on the mantissa; only the error
// bookkeeping grows.
struct fixed_fraction {
    std::vector<std::uint64_t> limbs;
    std::uint32_t bits = 0;
    std::uint64_t err_ulp = 0;

    static std::uint32_t limb_count(std::uint32_t bits) { return (bits + 63) / 64; }

    // Bits used in the top limb (64 when bits is a limb multiple).
    std::uint32_t top_bits() const {
        std::uint32_t r = bits % 64;
        return r == 0 ? 64 : r;
    }
    std::uint64_t top_mask() const {
        std::uint32_t t = top_bits();
        return t == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << t) - 1);
    }

    static fixed_fraction zero(std::uint32_t bits) {
        fixed_fraction f;
        f.bits = bits;
        f.limbs.assign(limb_count(bits), 0);
        return f;
    }

    // mantissa = floor(frac * 2^bits) taken from a nonnegative big integer < 2^bits.
    static fixed_fraction from_mantissa(const mpz_class& m, std::uint32_t bits, std::uint64_t err_ulp) {
        fixed_fraction f = zero(bits);
        f.err_ulp = err_ulp;
        std::size_t count = 0;
        mpz_export(f.limbs.data(), &count, -1, sizeof(std::uint64_t), 0, 0, m.get_mpz_t());
        return f;
    }

    // Quantizes a double in [0,1) to B bits (floor). err_ulp = 0: the quantized
    // value itself is what downstream comparisons are defined against.
    static fixed_fraction from_double(double v, std::uint32_t bits) {
        mpf_class f(v, bits + 64);
        mpf_mul_2exp(f.get_mpf_t(), f.get_mpf_t(), bits);
        mpz_class m;
        mpz_set_f(m.get_mpz_t(), f.get_mpf_t());
        return from_mantissa(m, bits, 0);
    }

    mpz_class to_mpz() const {
        mpz_class m;
        mpz_import(m.get_mpz_t(), limbs.size(), -1, sizeof(std::uint64_t), 0, 0, limbs.data());
        return m;
    }

    bool is_zero() const {
        for (std::uint64_t w : limbs)
            if (w) return false;
        return true;
    }

    // x += y (mod 1). Error bounds add, plus one ulp.
    void add_mod1(const fixed_fraction& y) {
        unsigned char carry = 0;
        for (std::size_t i = 0; i < limbs.size(); ++i) {
            std::uint64_t a = limbs[i], b = y.limbs[i];
            std::uint64_t s = a + b;
            std::uint64_t c1 = s < a;
            std::uint64_t s2 = s + carry;
            carry = static_cast<unsigned char>(c1 | (s2 < s));
            limbs[i] = s2;
        }
        limbs.back() &= top_mask();
        err_ulp = err_ulp + y.err_ulp + 1;
    }

    // n * x mod 1, exact on the mantissa. Also reports the parity of
    // floor(n * x), i.e. bit B of the extended product; log/sine evaluation of
    // pi*n*x needs that sign since sin(pi t) is antiperiodic in t.
    fixed_fraction mul_u64_mod1(std::uint64_t n, bool* integer_parity = nullptr) const {
        fixed_fraction out = zero(bits);
        unsigned __int128 carry = 0;
        for (std::size_t i = 0; i < limbs.size(); ++i) {
            unsigned __int128 p = static_cast<unsigned __int128>(limbs[i]) * n + carry;
            out.limbs[i] = static_cast<std::uint64_t>(p);
            carry = p >> 64;
        }
        std::uint64_t overflow = static_cast<std::uint64_t>(carry);
        if (integer_parity) {
            std::uint32_t t = top_bits();
            std::uint64_t bit_b = (t == 64) ? (overflow & 1) : ((out.limbs.back() >> t) & 1);
            *integer_parity = bit_b != 0;
        }
        out.limbs.back() &= top_mask();
        std::uint64_t step = err_ulp + 1;
        out.err_ulp = (n != 0 && step > ~std::uint64_t{0} / n) ? ~std::uint64_t{0} : n * step;
        return out;
    }

    // min(x, 1-x) as a fraction; error bound unchanged.
    fixed_fraction dist_to_int() const {
        std::uint32_t t = top_bits();
        bool ge_half = (limbs.back() >> (t - 1)) & 1;
        if (!ge_half) return *this;
        fixed_fraction out = zero(bits);
        out.err_ulp = err_ulp;
        if (is_zero()) return out;
        unsigned char borrow = 0;
        for (std::size_t i = 0; i < limbs.size(); ++i) {
            std::uint64_t d = 0 - limbs[i] - borrow;
            borrow = static_cast<unsigned char>(limbs[i] != 0 || borrow);
            out.limbs[i] = d;
        }
        out.limbs.back() &= top_mask();
        return out;
    }

    // Truncated conversion: top 64 mantissa bits rounded into a double.
    double to_double() const {
        int hi = static_cast<int>(limbs.size()) - 1;
        while (hi >= 0 && limbs[hi] == 0) --hi;
        if (hi < 0) return 0.0;
        std::uint64_t h = limbs[static_cast<std::size_t>(hi)];
        int lz = std::countl_zero(h);
        std::uint64_t window = h << lz;
        if (hi > 0 && lz > 0) window |= limbs[static_cast<std::size_t>(hi - 1)] >> (64 - lz);
        int e = 64 * hi - lz - static_cast<int>(bits);
        return std::ldexp(static_cast<double>(window), e);
    }

    // |x - y| as a mantissa count when it fits one limb, else err threshold exceeded.
    // Used solely for "within err of an endpoint" tests, so saturation is fine.
    std::uint64_t abs_diff_saturated(const fixed_fraction& y) const {
        const fixed_fraction *lo = this, *hi = &y;
        for (int i = static_cast<int>(limbs.size()) - 1; i >= 0; --i) {
            std::size_t k = static_cast<std::size_t>(i);
            if (limbs[k] == y.limbs[k]) continue;
            if (limbs[k] > y.limbs[k]) { lo = &y; hi = this; }
            break;
        }
        unsigned char borrow = 0;
        std::vector<std::uint64_t> d(limbs.size());
        for (std::size_t i = 0; i < limbs.size(); ++i) {
            std::uint64_t a = hi->limbs[i], b = lo->limbs[i];
            std::uint64_t t = a - b - borrow;
            borrow = static_cast<unsigned char>(a < b || (a == b && borrow));
            d[i] = t;
        }
        for (std::size_t i = 1; i < d.size(); ++i)
            if (d[i]) return ~std::uint64_t{0};
        return d[0];
    }

    bool mantissa_equal(const fixed_fraction& y) const { return limbs == y.limbs; }

    // -1 / 0 / +1 comparing mantissas.
    int compare(const fixed_fraction& y) const {
        for (int i = static_cast<int>(limbs.size()) - 1; i >= 0; --i) {
            std::size_t k = static_cast<std::size_t>(i);
            if (limbs[k] != y.limbs[k]) return limbs[k] < y.limbs[k] ? -1 : 1;
        }
        return 0;
    }

    bool mantissa_le_u64(std::uint64_t v) const {
        for (std::size_t i = 1; i < limbs.size(); ++i)
            if (limbs[i]) return false;
        return limbs[0] <= v;
    }

    // True when mantissa >= threshold, threshold given as a 128-bit value.
    bool mantissa_at_least(unsigned __int128 threshold) const {
        std::uint64_t t_lo = static_cast<std::uint64_t>(threshold);
        std::uint64_t t_hi = static_cast<std::uint64_t>(threshold >> 64);
        for (std::size_t i = limbs.size() - 1; i >= 2; --i)
            if (limbs[i]) return true;
        std::uint64_t hi = limbs.size() > 1 ? limbs[1] : 0;
        if (hi != t_hi) return hi > t_hi;
        return limbs[0] >= t_lo;
    }
};

inline constexpr std::uint64_t default_guard_factor = 1 << 10;

// ||x|| as a double, refusing to answer when the distance is within
// guard_factor of the accumulated error bound. `label` names the orbit index
// (n or m) for the error message.
inline double guard_dist(const fixed_fraction& x, std::uint64_t label,
                         std::uint64_t guard_factor = default_guard_factor) {
    fixed_fraction d = x.dist_to_int();
    bool ok;
    if (d.err_ulp == 0) {
        ok = !d.is_zero();
    } else {
        unsigned __int128 threshold =
            static_cast<unsigned __int128>(d.err_ulp) * guard_factor;
        ok = d.mantissa_at_least(threshold);
    }
    if (!ok)
        throw singularity_suspect(
            "||x|| within guard factor of the error bound at index n=" + std::to_string(label));
    return d.to_double();
}

} // namespace sudlerlab
