#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sudlerlab/birkhoff.hpp"
#include "sudlerlab/cf.hpp"
#include "sudlerlab/errors.hpp"
#include "sudlerlab/fixed_point.hpp"
#include "sudlerlab/quadrature.hpp"
#include "sudlerlab/rotation.hpp"
#include "sudlerlab/summation.hpp"

namespace sudlerlab::stats {

using birkhoff::stream_config;

inline constexpr double pi_s = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Temporal moments over N = 1..M

struct moment_accumulator {
    std::uint64_t count = 0;
    double mean = 0.0, m2 = 0.0;
    double min_v = std::numeric_limits<double>::infinity();
    double max_v = -std::numeric_limits<double>::infinity();
    std::uint64_t argmin = 0, argmax = 0;

    void add(std::uint64_t n, double v) {
        ++count;
        double delta = v - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (v - mean);
        if (v < min_v) {
            min_v = v;
            argmin = n;
        }
        if (v > max_v) {
            max_v = v;
            argmax = n;
        }
    }

    double variance() const { return count ? std::max(0.0, m2 / static_cast<double>(count)) : 0.0; }
};

inline double two_pass_variance(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    compensated_sum s;
    for (double x : v) s.add(x);
    double mean = s.value() / static_cast<double>(v.size());
    compensated_sum sq;
    for (double x : v) sq.add((x - mean) * (x - mean));
    return std::max(0.0, sq.value() / static_cast<double>(v.size()));
}

struct moment_report {
    std::uint64_t m = 0;
    double mean = 0.0, variance = 0.0;
    double min_v = 0.0, max_v = 0.0;
    std::uint64_t argmin = 0, argmax = 0;
    bool has_prediction = false;
    double predicted_mean = 0.0, predicted_variance_main = 0.0;
    double err_scale_max_a = 0.0, err_scale_loglog = 0.0;
};

template <typename Visitor>
moment_report temporal_moments_visit(const birkhoff::summand& s, const fixed_fraction& alpha,
                                     std::uint64_t m, const stream_config& cfg, Visitor&& visit) {
    moment_accumulator acc;
    birkhoff::prefix_stream(s, alpha, m, cfg, [&](std::uint64_t n, double v, double e) {
        acc.add(n, v);
        visit(n, v, e);
    });
    moment_report r;
    r.m = m;
    r.mean = acc.mean;
    r.variance = acc.variance();
    r.min_v = acc.min_v;
    r.max_v = acc.max_v;
    r.argmin = acc.argmin;
    r.argmax = acc.argmax;
    return r;
}

inline moment_report temporal_moments(const birkhoff::summand& s, const fixed_fraction& alpha,
                                      std::uint64_t m, const stream_config& cfg) {
    return temporal_moments_visit(s, alpha, m, cfg, [](std::uint64_t, double, double) {});
}

// ---------------------------------------------------------------------------
// Diophantine sum sum_{m<=M} 1/(8 pi^2 m^2 ||m alpha||^2)

// Values at each point of an increasing grid, one deterministic chunked pass.
inline std::vector<double> diophantine_sum_at(const fixed_fraction& alpha,
                                              const std::vector<std::uint64_t>& grid,
                                              const stream_config& cfg) {
    if (grid.empty()) throw unsupported("grid must be nonempty");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (grid[i] >= grid[i + 1]) throw unsupported("grid must be strictly increasing");
    std::vector<double> out;
    out.reserve(grid.size());
    compensated_sum acc;
    std::size_t gi = 0;
    while (gi < grid.size() && grid[gi] == 0) {
        out.push_back(0.0);
        ++gi;
    }
    using chunk_t = std::vector<double>;
    rotation::chunked_stream<chunk_t>(
        grid.back(), cfg.chunk_size, cfg.workers,
        [&alpha](std::uint64_t lo, std::uint64_t hi) {
            chunk_t c;
            c.reserve(static_cast<std::size_t>(hi - lo + 1));
            rotation::orbit_cursor cur(alpha, lo - 1);
            for (std::uint64_t m = lo; m <= hi; ++m) {
                double d = guard_dist(cur.next(), m);
                double dm = static_cast<double>(m) * d;
                c.push_back(1.0 / (8.0 * pi_s * pi_s * dm * dm));
            }
            return c;
        },
        [&](std::uint64_t idx, chunk_t&& ch) {
            std::uint64_t m = idx * cfg.chunk_size;
            for (double t : ch) {
                ++m;
                acc.add(t);
                while (gi < grid.size() && grid[gi] == m) {
                    out.push_back(acc.value());
                    ++gi;
                }
            }
        });
    return out;
}

inline double diophantine_sum(const fixed_fraction& alpha, std::uint64_t m,
                              const stream_config& cfg) {
    if (m == 0) return 0.0;
    return diophantine_sum_at(alpha, {m}, cfg).front();
}

inline double sigma2_closed_form(const std::string& name) {
    if (name == "golden") {
        double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        return pi_s * pi_s / (60.0 * std::sqrt(5.0) * std::log(phi));
    }
    if (name == "sqrt3")
        return pi_s * pi_s / (24.0 * std::sqrt(3.0) * std::log(2.0 + std::sqrt(3.0)));
    throw unsupported("no closed form for '" + name + "' (supported: golden, sqrt3)");
}

struct sigma2_point {
    std::uint64_t m = 0;
    double sum = 0.0;
    double ratio = 0.0; // sum / log M
};

struct sigma2_report {
    double slope = 0.0;
    std::vector<sigma2_point> points;
};

// Least-squares slope of the Diophantine sum against log M over the grid.
inline sigma2_report sigma2_estimate(const fixed_fraction& alpha,
                                     const std::vector<std::uint64_t>& grid,
                                     const stream_config& cfg) {
    if (grid.size() < 3) throw unsupported("sigma2 estimate needs at least 3 grid points");
    for (std::uint64_t m : grid)
        if (m < 2) throw unsupported("grid points must be at least 2");
    std::vector<double> sums = diophantine_sum_at(alpha, grid, cfg);
    sigma2_report r;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double x = std::log(static_cast<double>(grid[i]));
        sx += x;
        sy += sums[i];
        r.points.push_back({grid[i], sums[i], sums[i] / x});
    }
    double n = static_cast<double>(grid.size());
    double xbar = sx / n, ybar = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double dx = std::log(static_cast<double>(grid[i])) - xbar;
        sxx += dx * dx;
        sxy += dx * (sums[i] - ybar);
    }
    r.slope = sxy / sxx;
    return r;
}

struct prediction_report {
    double mean_main = 0.0;          // (1/2) log M
    double variance_main = 0.0;      // diophantine_sum(M)
    double quotient_c = 0.0, quotient_d = 0.0;
    double max_a_near_k = 0.0;       // max a_l over |l - k| <= ceil(log k)
    double loglog_m = 0.0;
};

inline prediction_report predicted_mean_variance(const cf::quotient_source& src,
                                                 const fixed_fraction& alpha, std::uint64_t m,
                                                 const stream_config& cfg) {
    cf::quotient_bound qb = cf::poly_bound(src); // rejects sources without a bound
    prediction_report r;
    r.quotient_c = qb.c;
    r.quotient_d = qb.d;
    r.mean_main = 0.5 * std::log(static_cast<double>(m));
    r.variance_main = diophantine_sum(alpha, m, cfg);
    long k = cf::index_of(src, m).k;
    long w = static_cast<long>(std::ceil(std::log(static_cast<double>(std::max(k, 2L)))));
    std::size_t hi = static_cast<std::size_t>(k + w);
    std::vector<std::uint64_t> quot = cf::partial_quotients(src, std::max<std::size_t>(hi, 1));
    std::uint64_t max_a = 1;
    for (long l = std::max(1L, k - w); l <= static_cast<long>(hi); ++l)
        max_a = std::max(max_a, quot[static_cast<std::size_t>(l - 1)]);
    r.max_a_near_k = static_cast<double>(max_a);
    r.loglog_m = m >= 3 ? std::log(std::log(static_cast<double>(m))) : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Distribution reports and KS distance

struct distribution_report {
    std::string reference;
    std::uint64_t count = 0;
    double ks = 0.0;
    std::vector<double> quantiles; // 1025-point grid (or fewer for tiny samples)
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// CDF of the Levy stable law with density e^{-1/(2x)} / (sqrt(2 pi) x^{3/2}).
inline double levy_cdf(double t) {
    if (t <= 0.0) return 0.0;
    return std::erfc(1.0 / std::sqrt(2.0 * t));
}

template <typename Cdf>
double ks_from_sorted(const std::vector<double>& s, Cdf&& cdf) {
    double d = 0.0;
    double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        double f = cdf(s[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

inline std::vector<double> quantile_grid(const std::vector<double>& sorted, std::size_t points = 1024) {
    std::vector<double> q;
    if (sorted.empty()) return q;
    q.reserve(points + 1);
    for (std::size_t j = 0; j <= points; ++j)
        q.push_back(sorted[(j * (sorted.size() - 1)) / points]);
    return q;
}

template <typename Cdf>
distribution_report distribution_from_samples(std::vector<double> samples, std::string reference,
                                              Cdf&& cdf) {
    std::sort(samples.begin(), samples.end());
    distribution_report r;
    r.reference = std::move(reference);
    r.count = samples.size();
    r.ks = ks_from_sorted(samples, cdf);
    r.quantiles = quantile_grid(samples);
    return r;
}

// z_N = (log P_N - (1/2) log N) / sqrt(sigma2 log N), N in [2, M], vs the
// standard normal. Full sorted sample up to exact_limit; beyond that a fixed
// histogram sketch (deterministic, KS error below the bin mass resolution).
inline distribution_report clt_report(const fixed_fraction& alpha, std::uint64_t m, double sigma2,
                                      const stream_config& cfg,
                                      std::uint64_t exact_limit = 1000000) {
    if (!(sigma2 > 0.0)) throw unsupported("sigma2 must be positive");
    if (m < 100) throw unsupported("clt report requires M >= 100");
    auto z_of = [sigma2](std::uint64_t n, double v) {
        double ln = std::log(static_cast<double>(n));
        return (v - 0.5 * ln) / std::sqrt(sigma2 * ln);
    };
    std::uint64_t count = m - 1;
    if (count <= exact_limit) {
        std::vector<double> z;
        z.reserve(static_cast<std::size_t>(count));
        birkhoff::prefix_stream(birkhoff::summand::log_sudler(), alpha, m, cfg,
                                [&](std::uint64_t n, double v, double) {
                                    if (n >= 2) z.push_back(z_of(n, v));
                                });
        return distribution_from_samples(std::move(z), "StandardNormal", normal_cdf);
    }
    constexpr double lo = -16.0, hi = 16.0;
    constexpr std::size_t nbins = 200000;
    std::vector<std::uint64_t> bins(nbins, 0);
    birkhoff::prefix_stream(birkhoff::summand::log_sudler(), alpha, m, cfg,
                            [&](std::uint64_t n, double v, double) {
                                if (n < 2) return;
                                double z = z_of(n, v);
                                double t = (z - lo) / (hi - lo) * static_cast<double>(nbins);
                                std::int64_t b = static_cast<std::int64_t>(std::floor(t));
                                b = std::clamp<std::int64_t>(b, 0, static_cast<std::int64_t>(nbins) - 1);
                                ++bins[static_cast<std::size_t>(b)];
                            });
    distribution_report r;
    r.reference = "StandardNormal";
    r.count = count;
    double n_d = static_cast<double>(count);
    std::uint64_t cum = 0;
    double d = 0.0;
    std::vector<double> q;
    q.reserve(1025);
    std::size_t next_q = 0;
    for (std::size_t b = 0; b < nbins; ++b) {
        cum += bins[b];
        double edge = lo + (hi - lo) * static_cast<double>(b + 1) / static_cast<double>(nbins);
        d = std::max(d, std::fabs(static_cast<double>(cum) / n_d - normal_cdf(edge)));
        while (next_q <= 1024 &&
               static_cast<double>(cum) >= static_cast<double>(next_q) / 1024.0 * n_d) {
            q.push_back(edge);
            ++next_q;
        }
    }
    while (next_q <= 1024) {
        q.push_back(hi);
        ++next_q;
    }
    r.ks = d;
    r.quantiles = std::move(q);
    return r;
}

// ---------------------------------------------------------------------------
// Convergent-scale checks (symmetry, extremes, partial-quotient square sum)

namespace detail {
// S_0..S_{q-1} for the summand, plus q_k and a_1..a_k.
struct convergent_scan {
    std::uint64_t q = 0;
    std::vector<std::uint64_t> quotients;
    std::vector<double> prefix; // index N
};

inline convergent_scan scan_to_convergent(const cf::quotient_source& src,
                                          const fixed_fraction& alpha, std::size_t k,
                                          const birkhoff::summand& s, const stream_config& cfg) {
    convergent_scan out;
    out.quotients = cf::partial_quotients(src, k);
    std::vector<cf::convergent> conv = cf::convergents(src, k);
    const mpz_class& q = conv.back().q;
    if (!q.fits_ulong_p()) throw unsupported("q_k exceeds the compute budget");
    out.q = static_cast<std::uint64_t>(q.get_ui());
    out.prefix.assign(static_cast<std::size_t>(out.q), 0.0);
    if (out.q > 1)
        birkhoff::prefix_stream(s, alpha, out.q - 1, cfg, [&](std::uint64_t n, double v, double) {
            out.prefix[static_cast<std::size_t>(n)] = v;
        });
    return out;
}
} // namespace detail

// max over 0 <= N < q_k of |log P_N + log P_{q_k-1-N} - log q_k|.
inline double symmetry_check(const cf::quotient_source& src, const fixed_fraction& alpha,
                             std::size_t k, const stream_config& cfg) {
    detail::convergent_scan sc =
        detail::scan_to_convergent(src, alpha, k, birkhoff::summand::log_sudler(), cfg);
    double lq = std::log(static_cast<double>(sc.q));
    double worst = 0.0;
    for (std::size_t n = 0; n < sc.prefix.size(); ++n)
        worst = std::max(worst,
                         std::fabs(sc.prefix[n] + sc.prefix[sc.prefix.size() - 1 - n] - lq));
    return worst;
}

struct extreme_report {
    std::uint64_t q = 0;
    double max_v = 0.0, min_v = 0.0;
    std::uint64_t argmax = 0, argmin = 0;
    double v_const = 0.0;
    double predicted = 0.0; // V * (a_1 + ... + a_k)
    double ratio = 0.0;     // max / predicted
    double err_scale = 0.0; // A_k + k log A_k
};

inline extreme_report extreme_check(const cf::quotient_source& src, const fixed_fraction& alpha,
                                    std::size_t k, const stream_config& cfg) {
    detail::convergent_scan sc =
        detail::scan_to_convergent(src, alpha, k, birkhoff::summand::log_sudler(), cfg);
    extreme_report r;
    r.q = sc.q;
    r.max_v = -std::numeric_limits<double>::infinity();
    r.min_v = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < sc.prefix.size(); ++n) {
        if (sc.prefix[n] > r.max_v) {
            r.max_v = sc.prefix[n];
            r.argmax = n;
        }
        if (sc.prefix[n] < r.min_v) {
            r.min_v = sc.prefix[n];
            r.argmin = n;
        }
    }
    double a_sum = 0.0;
    for (std::uint64_t a : sc.quotients) a_sum += static_cast<double>(a);
    r.v_const = quadrature::v_constant(1e-10);
    r.predicted = r.v_const * a_sum;
    r.ratio = r.max_v / r.predicted;
    r.err_scale = a_sum + static_cast<double>(k) * std::log(std::max(a_sum, 1.0));
    return r;
}

struct pq_square_report {
    std::uint64_t q = 0;
    double lhs = 0.0;  // sqrt(diophantine_sum(q_k - 1))
    double rhs = 0.0;  // (pi/sqrt(720)) sqrt(sum a_l^2)
    double ratio = 0.0;
    double err_scale = 0.0; // sqrt(k)
};

inline pq_square_report pq_square_sum_check(const cf::quotient_source& src,
                                            const fixed_fraction& alpha, std::size_t k,
                                            const stream_config& cfg) {
    std::vector<std::uint64_t> quot = cf::partial_quotients(src, k);
    std::vector<cf::convergent> conv = cf::convergents(src, k);
    if (!conv.back().q.fits_ulong_p()) throw unsupported("q_k exceeds the compute budget");
    pq_square_report r;
    r.q = static_cast<std::uint64_t>(conv.back().q.get_ui());
    double sq = 0.0;
    for (std::uint64_t a : quot) sq += static_cast<double>(a) * static_cast<double>(a);
    r.lhs = std::sqrt(diophantine_sum(alpha, r.q - 1, cfg));
    r.rhs = pi_s / std::sqrt(720.0) * std::sqrt(sq);
    r.ratio = r.lhs / r.rhs;
    r.err_scale = std::sqrt(static_cast<double>(k));
    return r;
}

// ---------------------------------------------------------------------------
// Orthogonality cross-moment

struct cross_moment_report {
    double value = 0.0;  // (1/M) sum (log P_N - log(M)/2)(S_N - mean S)
    double b_logp = 0.0; // B_M of the log-Sudler series
    double b_s = 0.0;    // B_M of the sawtooth series
    double scale = 0.0;  // (log log M)^4
};

inline cross_moment_report cross_moment(const fixed_fraction& alpha, std::uint64_t m,
                                        const stream_config& cfg) {
    std::vector<double> lp(static_cast<std::size_t>(m)), sw(static_cast<std::size_t>(m));
    birkhoff::prefix_stream(birkhoff::summand::log_sudler(), alpha, m, cfg,
                            [&](std::uint64_t n, double v, double) { lp[n - 1] = v; });
    birkhoff::prefix_stream(birkhoff::summand::beck_sawtooth(), alpha, m, cfg,
                            [&](std::uint64_t n, double v, double) { sw[n - 1] = v; });
    compensated_sum mean_s_acc;
    for (double v : sw) mean_s_acc.add(v);
    double mean_s = mean_s_acc.value() / static_cast<double>(m);
    double half_log_m = 0.5 * std::log(static_cast<double>(m));
    compensated_sum cross;
    for (std::size_t i = 0; i < lp.size(); ++i)
        cross.add((lp[i] - half_log_m) * (sw[i] - mean_s));
    cross_moment_report r;
    r.value = cross.value() / static_cast<double>(m);
    r.b_logp = std::sqrt(two_pass_variance(lp));
    r.b_s = std::sqrt(two_pass_variance(sw));
    double ll = m >= 3 ? std::log(std::log(static_cast<double>(m))) : 0.0;
    r.scale = ll * ll * ll * ll;
    return r;
}

// ---------------------------------------------------------------------------
// Fourier-coefficient predictor

struct fourier_model {
    enum class shape { zero, sawtooth, indicator };
    shape kind = shape::zero;
    double a = 0.0, b = 0.0;
    double total_variation = 0.0;

    static fourier_model zero_model() { return {}; }
    static fourier_model sawtooth() {
        fourier_model f;
        f.kind = shape::sawtooth;
        f.total_variation = 2.0;
        return f;
    }
    static fourier_model indicator(double a, double b) {
        birkhoff::summand::indicator(a, b); // validate bounds
        fourier_model f;
        f.kind = shape::indicator;
        f.a = a;
        f.b = b;
        f.total_variation = 2.0;
        return f;
    }

    // fhat(m) for m >= 1; fhat(-m) is the conjugate.
    std::complex<double> coefficient(std::uint64_t m) const {
        double md = static_cast<double>(m);
        switch (kind) {
        case shape::zero:
            return {0.0, 0.0};
        case shape::sawtooth:
            return {0.0, 1.0 / (2.0 * pi_s * md)};
        case shape::indicator: {
            std::complex<double> ea = std::polar(1.0, -2.0 * pi_s * md * a);
            std::complex<double> eb = std::polar(1.0, -2.0 * pi_s * md * b);
            return (ea - eb) / std::complex<double>(0.0, 2.0 * pi_s * md);
        }
        }
        return {0.0, 0.0};
    }
};

struct predicted_moments {
    double a_main = 0.0;  // Fejer-weighted mean main term
    double b2_main = 0.0; // variance main term
    std::uint64_t cutoff = 0;
    bool truncated = false;
};

inline std::uint64_t fejer_cutoff(std::uint64_t m, double d) {
    double lm = std::log(static_cast<double>(std::max<std::uint64_t>(m, 3)));
    double h = static_cast<double>(m) * std::pow(lm, 2.0 * d + 1.0);
    return std::max<std::uint64_t>(m + 1, static_cast<std::uint64_t>(h));
}

// A_M main = sum_{0<|m|<H} (1-|m|/H) fhat(m) e(m a)/(1-e(m a)), paired into 2 Re;
// B_M^2 main = sum_{m<=M} |fhat(m)|^2/(2 pi^2 ||m a||^2).
inline predicted_moments predicted_birkhoff_moments(const fourier_model& model,
                                                    const cf::quotient_source& src,
                                                    const fixed_fraction& alpha, std::uint64_t m,
                                                    const stream_config& cfg,
                                                    std::uint64_t cutoff_override = 0,
                                                    bool allow_truncated = false) {
    cf::quotient_bound qb = cf::poly_bound(src);
    std::uint64_t h_req = fejer_cutoff(m, qb.d);
    std::uint64_t h = cutoff_override ? cutoff_override : h_req;
    predicted_moments r;
    r.cutoff = h;
    r.truncated = h < h_req;
    if (r.truncated && !allow_truncated)
        throw truncation_flagged("cutoff " + std::to_string(h) + " below required " +
                                 std::to_string(h_req) + "; pass allow-truncated to proceed");
    if (model.kind == fourier_model::shape::zero) return r;
    (void)cfg;
    compensated_sum a_acc;
    double hd = static_cast<double>(h);
    rotation::orbit_cursor cur(alpha, 0);
    for (std::uint64_t mm = 1; mm < h; ++mm) {
        const fixed_fraction& x = cur.next();
        guard_dist(x, mm); // reject near-resonant denominators
        double u = x.to_double();
        std::complex<double> z = std::polar(1.0, 2.0 * pi_s * u);
        std::complex<double> term = model.coefficient(mm) * z / (1.0 - z);
        a_acc.add((1.0 - static_cast<double>(mm) / hd) * 2.0 * term.real());
    }
    r.a_main = a_acc.value();
    compensated_sum b_acc;
    rotation::orbit_cursor cur2(alpha, 0);
    for (std::uint64_t mm = 1; mm <= m; ++mm) {
        double d = guard_dist(cur2.next(), mm);
        b_acc.add(std::norm(model.coefficient(mm)) / (2.0 * pi_s * pi_s * d * d));
    }
    r.b2_main = b_acc.value();
    return r;
}

// ---------------------------------------------------------------------------
// Theorem-BU band check for indicator summands

struct bu_point {
    std::uint64_t m = 0;
    double b2 = 0.0;
    double ratio = 0.0;           // B_M^2 / log M
    double predicted_b2 = 0.0;    // section-4.2 main term
    double predicted_ratio = 0.0;
};

inline std::vector<bu_point> bu_variance_check(const fixed_fraction& alpha, double a, double b,
                                               const std::vector<std::uint64_t>& grid,
                                               const stream_config& cfg) {
    if (grid.size() < 2) throw unsupported("grid must have at least 2 points");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (grid[i] >= grid[i + 1]) throw unsupported("grid must be strictly increasing");
    if (grid.front() < 2) throw unsupported("grid points must be at least 2");
    birkhoff::summand ind = birkhoff::summand::indicator(a, b);
    fourier_model model = fourier_model::indicator(a, b);
    std::vector<bu_point> out(grid.size());
    moment_accumulator acc;
    std::size_t gi = 0;
    birkhoff::prefix_stream(ind, alpha, grid.back(), cfg, [&](std::uint64_t n, double v, double) {
        acc.add(n, v);
        while (gi < grid.size() && grid[gi] == n) {
            out[gi].m = n;
            out[gi].b2 = acc.variance();
            out[gi].ratio = out[gi].b2 / std::log(static_cast<double>(n));
            ++gi;
        }
    });
    compensated_sum pred;
    rotation::orbit_cursor cur(alpha, 0);
    std::size_t pi_idx = 0;
    for (std::uint64_t mm = 1; mm <= grid.back(); ++mm) {
        double d = guard_dist(cur.next(), mm);
        pred.add(std::norm(model.coefficient(mm)) / (2.0 * pi_s * pi_s * d * d));
        while (pi_idx < grid.size() && grid[pi_idx] == mm) {
            out[pi_idx].predicted_b2 = pred.value();
            out[pi_idx].predicted_ratio =
                out[pi_idx].predicted_b2 / std::log(static_cast<double>(mm));
            ++pi_idx;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gauss-measure experiment vs the Levy law

struct ae_report {
    distribution_report dist;
    std::vector<std::pair<std::uint64_t, double>> per_seed; // (seed, statistic)
    std::uint32_t nominal_bits = 0;
};

// Statistic (2 log^2 2 / pi) (sum_{l<=k} a_l^2) / k^2 per seed; sampling retries
// with doubled precision when the quotient stream exhausts, so every seed
// deterministically yields a value.
inline ae_report ae_experiment(std::uint64_t seed_base, std::uint32_t nseeds, std::uint32_t k,
                               const stream_config& cfg) {
    if (k < 100) throw unsupported("ae experiment requires k >= 100");
    if (nseeds < 200) throw unsupported("ae experiment requires at least 200 seeds");
    const std::uint32_t bits0 = std::max<std::uint32_t>(4 * k + 2048, 4096);
    const double coeff = 2.0 * std::log(2.0) * std::log(2.0) / pi_s;
    auto sample_of = [&](std::uint64_t seed) {
        std::uint32_t bits = bits0;
        for (int attempt = 0;; ++attempt) {
            try {
                cf::quotient_stream st(cf::quotient_source::gauss(seed, bits));
                double sq = 0.0;
                for (std::uint32_t l = 0; l < k; ++l) {
                    double a = static_cast<double>(st.next());
                    sq += a * a;
                }
                return coeff * sq / (static_cast<double>(k) * static_cast<double>(k));
            } catch (const precision_exhausted&) {
                if (attempt >= 4) throw;
                bits *= 2;
            }
        }
    };
    ae_report r;
    r.nominal_bits = bits0;
    r.per_seed.resize(nseeds);
    using chunk_t = std::vector<double>;
    rotation::chunked_stream<chunk_t>(
        nseeds, 16, cfg.workers,
        [&](std::uint64_t lo, std::uint64_t hi) {
            chunk_t c;
            c.reserve(static_cast<std::size_t>(hi - lo + 1));
            for (std::uint64_t i = lo; i <= hi; ++i) c.push_back(sample_of(seed_base + i - 1));
            return c;
        },
        [&](std::uint64_t idx, chunk_t&& ch) {
            std::uint64_t i = idx * 16;
            for (double v : ch) {
                r.per_seed[static_cast<std::size_t>(i)] = {seed_base + i, v};
                ++i;
            }
        });
    std::vector<double> samples;
    samples.reserve(nseeds);
    for (auto& [seed, v] : r.per_seed) samples.push_back(v);
    r.dist = distribution_from_samples(std::move(samples), "Levy", levy_cdf);
    return r;
}

} // namespace sudlerlab::stats
