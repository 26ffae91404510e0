#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "sudlerlab/errors.hpp"
#include "sudlerlab/fixed_point.hpp"

namespace sudlerlab::cf {

enum class source_kind { quadratic, e_family, explicit_list, gauss_random };

// Generative description of an irrational via partial quotients. Only the
// fractional part matters downstream; a0 is carried for display.
struct quotient_source {
    source_kind kind = source_kind::quadratic;
    long long a0 = 0;
    std::vector<std::uint64_t> preperiod; // quadratic
    std::vector<std::uint64_t> period;    // quadratic, nonempty
    std::vector<std::uint64_t> terms;     // explicit_list, nonempty
    std::uint64_t seed = 0;               // gauss_random
    std::uint32_t precision_bits = 0;     // gauss_random

    static quotient_source quadratic(long long a0, std::vector<std::uint64_t> pre,
                                     std::vector<std::uint64_t> per) {
        if (per.empty()) throw unsupported("quadratic source requires a nonempty period");
        for (std::uint64_t a : per)
            if (a == 0) throw unsupported("partial quotients must be positive");
        for (std::uint64_t a : pre)
            if (a == 0) throw unsupported("partial quotients must be positive");
        quotient_source s;
        s.kind = source_kind::quadratic;
        s.a0 = a0;
        s.preperiod = std::move(pre);
        s.period = std::move(per);
        return s;
    }

    static quotient_source golden() { return quadratic(1, {}, {1}); }

    // Continued fraction of sqrt(D) via the (m, d, a) recurrence; the period
    // closes exactly when a == 2*a0.
    static quotient_source sqrt_of(std::uint64_t d_value) {
        if (d_value == 0) throw not_quadratic("sqrt:0 is rational");
        std::uint64_t a0 = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(d_value)));
        while (a0 * a0 > d_value) --a0;
        while ((a0 + 1) * (a0 + 1) <= d_value) ++a0;
        if (a0 * a0 == d_value)
            throw not_quadratic("sqrt:" + std::to_string(d_value) + " is a perfect square");
        std::vector<std::uint64_t> per;
        std::uint64_t m = 0, d = 1, a = a0;
        do {
            m = d * a - m;
            d = (d_value - m * m) / d;
            a = (a0 + m) / d;
            per.push_back(a);
        } while (a != 2 * a0);
        return quadratic(static_cast<long long>(a0), {}, std::move(per));
    }

    static quotient_source euler() {
        quotient_source s;
        s.kind = source_kind::e_family;
        s.a0 = 2;
        return s;
    }

    static quotient_source explicit_terms(std::vector<std::uint64_t> t, long long a0 = 0) {
        if (t.empty()) throw unsupported("explicit source requires a nonempty list");
        for (std::uint64_t a : t)
            if (a == 0) throw unsupported("partial quotients must be positive");
        quotient_source s;
        s.kind = source_kind::explicit_list;
        s.a0 = a0;
        s.terms = std::move(t);
        return s;
    }

    static quotient_source gauss(std::uint64_t seed, std::uint32_t bits) {
        if (bits == 0) throw unsupported("random source requires positive precision bits");
        quotient_source s;
        s.kind = source_kind::gauss_random;
        s.seed = seed;
        s.precision_bits = bits;
        return s;
    }
};

// Stateful emitter of a_1, a_2, .... For gauss_random the sampled dyadic
// rational only pins down the quotients of the surrounding open interval; once
// both endpoints disagree on floor(1/x) the stream throws precision_exhausted.
class quotient_stream {
public:
    explicit quotient_stream(quotient_source src) : src_(std::move(src)) {
        if (src_.kind == source_kind::gauss_random) {
            std::mt19937_64 rng(src_.seed);
            std::uint32_t words = (src_.precision_bits + 63) / 64;
            mpz_class p = 0;
            for (std::uint32_t i = 0; i < words; ++i) {
                p <<= 64;
                p |= static_cast<unsigned long>(rng());
            }
            p >>= (64 * words - src_.precision_bits);
            ln_ = p;
            hn_ = p + 1;
            ld_ = 1;
            mpz_mul_2exp(ld_.get_mpz_t(), ld_.get_mpz_t(), src_.precision_bits);
            hd_ = ld_;
        }
    }

    std::uint64_t next() {
        ++idx_;
        switch (src_.kind) {
        case source_kind::quadratic: {
            std::size_t i = idx_ - 1;
            if (i < src_.preperiod.size()) return src_.preperiod[i];
            i -= src_.preperiod.size();
            return src_.period[i % src_.period.size()];
        }
        case source_kind::e_family:
            // 1, 2, 1, 1, 4, 1, 1, 6, ...: a_k = 2((k-2)/3 + 1) when k = 2 mod 3.
            return idx_ % 3 == 2 ? 2 * ((idx_ - 2) / 3 + 1) : 1;
        case source_kind::explicit_list:
            if (idx_ > src_.terms.size())
                throw unsupported("explicit quotient list exhausted after " +
                                  std::to_string(src_.terms.size()) + " terms");
            return src_.terms[idx_ - 1];
        case source_kind::gauss_random:
            return next_gauss();
        }
        throw unsupported("unknown source kind");
    }

    // Number of further quotients available, or SIZE_MAX when unbounded a priori.
    std::size_t remaining() const {
        if (src_.kind == source_kind::explicit_list)
            return src_.terms.size() - std::min(idx_, src_.terms.size());
        return ~std::size_t{0};
    }

    std::size_t emitted() const { return idx_; }

private:
    std::uint64_t next_gauss() {
        // Invariant: the sampled x lies in the open interval (ln/ld, hn/hd) with
        // 0 <= ln/ld < hn/hd <= 1.
        if (ln_ == 0)
            throw precision_exhausted("random source ambiguous after " +
                                      std::to_string(idx_ - 1) + " quotients");
        mpz_class a_lo = hd_ / hn_;
        mpz_class r_l = ld_ % ln_;
        mpz_class a_hi = ld_ / ln_;
        if (r_l == 0) a_hi -= 1;
        if (a_lo != a_hi)
            throw precision_exhausted("random source ambiguous after " +
                                      std::to_string(idx_ - 1) + " quotients");
        if (!a_lo.fits_ulong_p())
            throw precision_exhausted("quotient exceeds 64 bits at index " + std::to_string(idx_));
        std::uint64_t a = static_cast<std::uint64_t>(a_lo.get_ui());
        mpz_class r_h = hd_ - a_lo * hn_;
        mpz_class r_l2 = ld_ - a_lo * ln_;
        // x' = 1/x - a maps (l, h) to (1/h - a, 1/l - a); endpoints swap roles.
        mpz_class new_ld = hn_, new_hd = ln_;
        ln_ = r_h;
        ld_ = new_ld;
        hn_ = r_l2;
        hd_ = new_hd;
        return a;
    }

    quotient_source src_;
    std::size_t idx_ = 0;
    mpz_class ln_, ld_, hn_, hd_;
};

struct convergent {
    long k = 0;
    mpz_class p, q;
};

inline std::vector<std::uint64_t> partial_quotients(const quotient_source& src, std::size_t k) {
    if (k == 0) throw unsupported("k must be at least 1");
    quotient_stream st(src);
    std::vector<std::uint64_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(st.next());
    return out;
}

// Convergents p_0/q_0 .. p_k/q_k of a0 + [0; a_1, a_2, ...].
inline std::vector<convergent> convergents(const quotient_source& src, std::size_t k) {
    if (k == 0) throw unsupported("k must be at least 1");
    quotient_stream st(src);
    std::vector<convergent> out;
    out.reserve(k + 1);
    mpz_class pm1 = 1, qm1 = 0; // p_{-1}, q_{-1}
    mpz_class p0 = static_cast<long>(src.a0), q0 = 1;
    out.push_back({0, p0, q0});
    for (std::size_t i = 1; i <= k; ++i) {
        std::uint64_t a = st.next();
        mpz_class p = static_cast<unsigned long>(a) * p0 + pm1;
        mpz_class q = static_cast<unsigned long>(a) * q0 + qm1;
        pm1 = p0;
        qm1 = q0;
        p0 = p;
        q0 = q;
        out.push_back({static_cast<long>(i), p0, q0});
    }
    return out;
}

// {alpha} to B bits with err_ulp <= 2: truncate p_k/q_k (computed with a0 = 0)
// once q_k q_{k+1} > 2^{B+2}. A finite explicit list that runs out first is
// taken at face value (the rational it denotes), leaving only truncation error.
inline fixed_fraction alpha_value(const quotient_source& src, std::uint32_t bits) {
    if (bits < 64) throw unsupported("alpha_value requires at least 64 bits");
    quotient_stream st(src);
    mpz_class pm1 = 1, qm1 = 0, p = 0, q = 1;
    mpz_class limit = 1;
    mpz_mul_2exp(limit.get_mpz_t(), limit.get_mpz_t(), bits + 2);
    for (;;) {
        if (st.remaining() == 0) break;
        std::uint64_t a = st.next();
        mpz_class pn = static_cast<unsigned long>(a) * p + pm1;
        mpz_class qn = static_cast<unsigned long>(a) * q + qm1;
        pm1 = p;
        qm1 = q;
        p = pn;
        q = qn;
        if (qm1 * q > limit) break;
    }
    mpz_class scaled = p % q;
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), bits);
    scaled /= q;
    return fixed_fraction::from_mantissa(scaled, bits, 2);
}

struct index_result {
    long k = 0;
    std::vector<convergent> conv; // indices 0..k+1
};

// k with q_k <= M < q_{k+1}.
inline index_result index_of(const quotient_source& src, std::uint64_t m_horizon) {
    if (m_horizon == 0) throw unsupported("M must be at least 1");
    quotient_stream st(src);
    index_result r;
    mpz_class pm1 = 1, qm1 = 0, p = static_cast<long>(src.a0), q = 1;
    r.conv.push_back({0, p, q});
    for (long i = 1;; ++i) {
        std::uint64_t a = st.next();
        mpz_class pn = static_cast<unsigned long>(a) * p + pm1;
        mpz_class qn = static_cast<unsigned long>(a) * q + qm1;
        pm1 = p;
        qm1 = q;
        p = pn;
        q = qn;
        r.conv.push_back({i, p, q});
        if (q > m_horizon) {
            r.k = i - 1;
            return r;
        }
    }
}

// Transfer matrix of one period: T = M(b_p) ... M(b_1) with M(b) = [[b,1],[1,0]].
// log q_k grows by log(dominant eigenvalue of T) per period.
inline double period_growth_rate(const std::vector<std::uint64_t>& period) {
    mpz_class t00 = 1, t01 = 0, t10 = 0, t11 = 1;
    for (std::uint64_t b : period) {
        mpz_class n00 = static_cast<unsigned long>(b) * t00 + t10;
        mpz_class n01 = static_cast<unsigned long>(b) * t01 + t11;
        t10 = t00;
        t11 = t01;
        t00 = n00;
        t01 = n01;
    }
    mpz_class tr = t00 + t11;
    int det = period.size() % 2 == 0 ? 1 : -1;
    double trd = tr.get_d();
    return std::log((trd + std::sqrt(trd * trd - 4.0 * det)) / 2.0);
}

// lim (1/(12 log q_k)) sum_{l<=k} (-1)^l a_l. Odd periods and zero alternating
// period-sums cancel exactly; otherwise the preperiod only contributes the sign
// of the offset.
inline double E_alpha(const quotient_source& src) {
    if (src.kind != source_kind::quadratic)
        throw not_quadratic("E_alpha requires a quadratic (periodic) source");
    const auto& per = src.period;
    if (per.size() % 2 != 0) return 0.0;
    long long alt = 0;
    for (std::size_t j = 0; j < per.size(); ++j)
        alt += (j % 2 == 0 ? -1 : 1) * static_cast<long long>(per[j]);
    if (alt == 0) return 0.0;
    double sign = src.preperiod.size() % 2 == 0 ? 1.0 : -1.0;
    return sign * static_cast<double>(alt) / (12.0 * period_growth_rate(per));
}

struct quotient_bound {
    double c = 0;
    double d = 0;
};

// Pseudopolynomial envelope a_k <= c * k^d for the source class.
inline quotient_bound poly_bound(const quotient_source& src) {
    switch (src.kind) {
    case source_kind::quadratic: {
        std::uint64_t c = 1;
        for (std::uint64_t a : src.preperiod) c = std::max(c, a);
        for (std::uint64_t a : src.period) c = std::max(c, a);
        return {static_cast<double>(c), 0.0};
    }
    case source_kind::e_family:
        return {1.0, 1.0}; // a_k = 2((k-2)/3 + 1) <= k for k >= 2, a_1 = 1
    case source_kind::explicit_list: {
        std::uint64_t c = 1;
        for (std::uint64_t a : src.terms) c = std::max(c, a);
        return {static_cast<double>(c), 0.0};
    }
    case source_kind::gauss_random:
        throw hypothesis_violated("random sources have no pseudopolynomial quotient bound");
    }
    throw unsupported("unknown source kind");
}

inline std::uint32_t default_precision_bits(std::uint64_t m_horizon) {
    double lg = std::log2(static_cast<double>(m_horizon < 2 ? 2 : m_horizon));
    std::uint32_t b = 2 * static_cast<std::uint32_t>(std::ceil(lg)) + 96;
    return std::max<std::uint32_t>(192, b);
}

// Grammar: golden | sqrt:<D> | quadratic:<a0>;<pre>|<period> | e |
// list:<a1,a2,...> | random:<seed>[:<bits>].
inline quotient_source parse_alpha(const std::string& spec,
                                   std::uint32_t default_random_bits = 65536) {
    auto parse_list = [](const std::string& s) {
        std::vector<std::uint64_t> out;
        std::size_t pos = 0;
        while (pos < s.size()) {
            std::size_t comma = s.find(',', pos);
            std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
            if (tok.empty()) throw unsupported("empty entry in quotient list '" + s + "'");
            out.push_back(std::stoull(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return out;
    };
    try {
        if (spec == "golden") return quotient_source::golden();
        if (spec == "e") return quotient_source::euler();
        if (spec.rfind("sqrt:", 0) == 0) return quotient_source::sqrt_of(std::stoull(spec.substr(5)));
        if (spec.rfind("list:", 0) == 0) return quotient_source::explicit_terms(parse_list(spec.substr(5)));
        if (spec.rfind("quadratic:", 0) == 0) {
            std::string rest = spec.substr(10);
            std::size_t semi = rest.find(';');
            std::size_t bar = rest.find('|');
            if (semi == std::string::npos || bar == std::string::npos || bar < semi)
                throw unsupported("quadratic spec needs '<a0>;<pre>|<period>'");
            long long a0 = std::stoll(rest.substr(0, semi));
            std::string pre_s = rest.substr(semi + 1, bar - semi - 1);
            std::string per_s = rest.substr(bar + 1);
            std::vector<std::uint64_t> pre = pre_s.empty() ? std::vector<std::uint64_t>{} : parse_list(pre_s);
            if (per_s.empty()) throw unsupported("quadratic spec needs a nonempty period");
            return quotient_source::quadratic(a0, std::move(pre), parse_list(per_s));
        }
        if (spec.rfind("random:", 0) == 0) {
            std::string rest = spec.substr(7);
            std::size_t colon = rest.find(':');
            std::uint64_t seed = std::stoull(rest.substr(0, colon));
            std::uint32_t bits = default_random_bits;
            if (colon != std::string::npos)
                bits = static_cast<std::uint32_t>(std::stoul(rest.substr(colon + 1)));
            return quotient_source::gauss(seed, bits);
        }
    } catch (const unsupported&) {
        throw;
    } catch (const not_quadratic&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw unsupported("cannot parse alpha spec '" + spec + "': " + e.what());
    } catch (const std::out_of_range&) {
        throw unsupported("number out of range in alpha spec '" + spec + "'");
    }
    throw unsupported("unrecognized alpha spec '" + spec + "'");
}

} // namespace sudlerlab::cf
