#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sudlerlab/birkhoff.hpp"
#include "sudlerlab/cf.hpp"
#include "sudlerlab/errors.hpp"
#include "sudlerlab/quadrature.hpp"
#include "sudlerlab/report_io.hpp"
#include "sudlerlab/stats.hpp"
#include "sudlerlab/version.hpp"

namespace sl = sudlerlab;
using nlohmann::json;

namespace {

struct global_opts {
    unsigned workers = 1;
    std::uint64_t chunk_size = std::uint64_t{1} << 20;
    std::uint32_t precision_bits = 0; // 0 = per-horizon policy
    std::string out;                  // empty = stdout
    std::string manifest;             // empty = <out>.manifest.json when --out given
    std::string format = "json";
    std::string sidecar;              // sudler only
};

struct command_output {
    json data;
    std::vector<std::vector<std::string>> csv; // header + rows
};

unsigned default_workers() {
    const char* env = std::getenv("SUDLERLAB_WORKERS");
    if (!env) return 1;
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v == 0 || v > 256) return 1;
    return static_cast<unsigned>(v);
}

sl::birkhoff::stream_config stream_cfg(const global_opts& g) {
    return {g.workers, g.chunk_size};
}

struct resolved_alpha {
    sl::cf::quotient_source src;
    sl::fixed_fraction value;
    std::uint32_t bits = 0;
};

resolved_alpha resolve_alpha(const std::string& spec, const global_opts& g, std::uint64_t horizon) {
    resolved_alpha r;
    r.src = sl::cf::parse_alpha(spec);
    r.bits = g.precision_bits ? g.precision_bits : sl::cf::default_precision_bits(horizon);
    r.value = sl::cf::alpha_value(r.src, r.bits);
    return r;
}

json base_report(const std::string& type, const std::string& alpha_spec, std::uint32_t bits) {
    json j;
    j["report_type"] = type;
    if (!alpha_spec.empty()) j["alpha_spec"] = alpha_spec;
    j["artifact_version"] = sl::artifact_version;
    j["precision_bits"] = bits;
    return j;
}

std::string fd(double v) { return sl::report::format_double(v); }

std::vector<std::uint64_t> dyadic_grid(std::uint64_t lo, std::uint64_t hi) {
    if (lo < 2 || hi < lo) throw sl::unsupported("grid bounds must satisfy 2 <= min <= max");
    std::vector<std::uint64_t> g;
    for (std::uint64_t m = lo; m <= hi; m *= 2) {
        g.push_back(m);
        if (m > hi / 2) break;
    }
    return g;
}

std::vector<std::uint64_t> parse_grid(const std::string& s) {
    std::vector<std::uint64_t> g;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw sl::unsupported("empty entry in grid list");
        g.push_back(std::stoull(tok));
    }
    if (g.empty()) throw sl::unsupported("grid list is empty");
    return g;
}

// ---------------------------------------------------------------------------
// Subcommand implementations

struct cf_opts {
    std::string alpha;
    std::uint64_t k = 10;
};

command_output run_cf(const cf_opts& o, const global_opts&) {
    sl::cf::quotient_source src = sl::cf::parse_alpha(o.alpha);
    std::vector<std::uint64_t> quot = sl::cf::partial_quotients(src, o.k);
    std::vector<sl::cf::convergent> conv = sl::cf::convergents(src, o.k);
    std::uint32_t bits = src.kind == sl::cf::source_kind::gauss_random ? src.precision_bits : 0;
    command_output out;
    out.data = base_report("cf", o.alpha, bits);
    out.data["k"] = o.k;
    out.data["a0"] = src.a0;
    out.data["quotients"] = quot;
    json jc = json::array();
    for (const auto& c : conv)
        jc.push_back({{"k", c.k}, {"p", c.p.get_str()}, {"q", c.q.get_str()}});
    out.data["convergents"] = jc;
    if (src.kind == sl::cf::source_kind::gauss_random) out.data["seed"] = src.seed;
    out.csv.push_back({"k", "a_k", "p_k", "q_k"});
    for (const auto& c : conv) {
        std::string a = c.k == 0 ? std::to_string(src.a0)
                                 : std::to_string(quot[static_cast<std::size_t>(c.k - 1)]);
        out.csv.push_back({std::to_string(c.k), a, c.p.get_str(), c.q.get_str()});
    }
    return out;
}

struct sudler_opts {
    std::string alpha;
    std::uint64_t max_n = 100;
};

command_output run_sudler(const sudler_opts& o, const global_opts& g) {
    resolved_alpha a = resolve_alpha(o.alpha, g, o.max_n);
    command_output out;
    out.csv.push_back({"n", "log_p", "err_bound"});
    std::ofstream sidecar;
    if (!g.sidecar.empty()) {
        sidecar.open(g.sidecar, std::ios::binary | std::ios::trunc);
        if (!sidecar) throw sl::unsupported("cannot open sidecar path " + g.sidecar);
    }
    sl::stats::moment_accumulator acc;
    double final_v = 0.0, final_e = 0.0;
    sl::birkhoff::prefix_stream(sl::birkhoff::summand::log_sudler(), a.value, o.max_n,
                                stream_cfg(g), [&](std::uint64_t n, double v, double e) {
                                    acc.add(n, v);
                                    out.csv.push_back({std::to_string(n), fd(v), fd(e)});
                                    if (sidecar.is_open()) sl::report::sidecar_record(sidecar, n, v);
                                    final_v = v;
                                    final_e = e;
                                });
    out.data = base_report("sudler", o.alpha, a.bits);
    out.data["m"] = o.max_n;
    out.data["final_value"] = final_v;
    out.data["final_err_bound"] = final_e;
    out.data["mean"] = acc.mean;
    out.data["variance"] = acc.variance();
    out.data["min"] = acc.min_v;
    out.data["max"] = acc.max_v;
    out.data["argmin"] = acc.argmin;
    out.data["argmax"] = acc.argmax;
    if (a.src.kind == sl::cf::source_kind::gauss_random) out.data["seed"] = a.src.seed;
    return out;
}

struct moments_opts {
    std::string alpha;
    std::string summand = "log-sudler";
    double a = 0.0, b = 0.5;
    std::uint64_t max_n = 1000;
    bool predict = false;
    bool cross = false;
};

sl::birkhoff::summand summand_of(const std::string& name, double a, double b) {
    if (name == "log-sudler") return sl::birkhoff::summand::log_sudler();
    if (name == "log-dioph") return sl::birkhoff::summand::log_diophantine();
    if (name == "sawtooth") return sl::birkhoff::summand::beck_sawtooth();
    if (name == "indicator") return sl::birkhoff::summand::indicator(a, b);
    throw sl::unsupported("unknown summand '" + name + "'");
}

command_output run_moments(const moments_opts& o, const global_opts& g) {
    resolved_alpha a = resolve_alpha(o.alpha, g, o.max_n);
    sl::birkhoff::summand s = summand_of(o.summand, o.a, o.b);
    sl::stats::moment_report r = sl::stats::temporal_moments(s, a.value, o.max_n, stream_cfg(g));
    command_output out;
    out.data = base_report("moments", o.alpha, a.bits);
    out.data["m"] = o.max_n;
    out.data["summand"] = o.summand;
    if (o.summand == "indicator") {
        out.data["a"] = o.a;
        out.data["b"] = o.b;
    }
    out.data["mean"] = r.mean;
    out.data["variance"] = r.variance;
    out.data["min"] = r.min_v;
    out.data["max"] = r.max_v;
    out.data["argmin"] = r.argmin;
    out.data["argmax"] = r.argmax;
    if (o.predict) {
        if (o.summand != "log-sudler")
            throw sl::unsupported("--predict applies to the log-sudler summand only");
        sl::stats::prediction_report p =
            sl::stats::predicted_mean_variance(a.src, a.value, o.max_n, stream_cfg(g));
        out.data["predicted_mean"] = p.mean_main;
        out.data["predicted_variance_main"] = p.variance_main;
        out.data["err_scale_max_a"] = p.max_a_near_k;
        out.data["err_scale_loglog_m"] = p.loglog_m;
        out.data["quotient_bound_c"] = p.quotient_c;
        out.data["quotient_bound_d"] = p.quotient_d;
    }
    if (o.cross) {
        sl::stats::cross_moment_report c = sl::stats::cross_moment(a.value, o.max_n, stream_cfg(g));
        out.data["cross_moment"] = c.value;
        out.data["cross_b_logp"] = c.b_logp;
        out.data["cross_b_sawtooth"] = c.b_s;
        out.data["cross_scale_loglog4"] = c.scale;
    }
    out.csv.push_back({"m", "summand", "mean", "variance", "min", "max", "argmin", "argmax"});
    out.csv.push_back({std::to_string(o.max_n), o.summand, fd(r.mean), fd(r.variance), fd(r.min_v),
                       fd(r.max_v), std::to_string(r.argmin), std::to_string(r.argmax)});
    return out;
}

struct dioph_opts {
    std::string alpha;
    std::uint64_t max_m = 1000;
};

command_output run_dioph(const dioph_opts& o, const global_opts& g) {
    resolved_alpha a = resolve_alpha(o.alpha, g, o.max_m);
    double v = sl::stats::diophantine_sum(a.value, o.max_m, stream_cfg(g));
    command_output out;
    out.data = base_report("dioph-sum", o.alpha, a.bits);
    out.data["m"] = o.max_m;
    out.data["sum"] = v;
    out.csv.push_back({"m", "sum"});
    out.csv.push_back({std::to_string(o.max_m), fd(v)});
    return out;
}

struct sigma2_opts {
    std::string alpha;
    std::uint64_t grid_min = 1024, grid_max = 1048576;
    std::string grid_list;
    std::string closed_form;
};

command_output run_sigma2(const sigma2_opts& o, const global_opts& g) {
    std::vector<std::uint64_t> grid =
        o.grid_list.empty() ? dyadic_grid(o.grid_min, o.grid_max) : parse_grid(o.grid_list);
    resolved_alpha a = resolve_alpha(o.alpha, g, grid.back());
    sl::stats::sigma2_report r = sl::stats::sigma2_estimate(a.value, grid, stream_cfg(g));
    command_output out;
    out.data = base_report("sigma2", o.alpha, a.bits);
    out.data["grid"] = grid;
    out.data["slope"] = r.slope;
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"m", p.m}, {"sum", p.sum}, {"ratio", p.ratio}});
    out.data["points"] = pts;
    out.csv.push_back({"m", "sum", "ratio"});
    for (const auto& p : r.points)
        out.csv.push_back({std::to_string(p.m), fd(p.sum), fd(p.ratio)});
    if (!o.closed_form.empty()) {
        double cf_v = sl::stats::sigma2_closed_form(o.closed_form);
        out.data["closed_form_name"] = o.closed_form;
        out.data["closed_form"] = cf_v;
        out.data["slope_over_closed_form"] = r.slope / cf_v;
    }
    return out;
}

struct clt_opts {
    std::string alpha;
    std::uint64_t max_n = 10000;
    double sigma2 = 0.0;
    std::string sigma2_closed_form;
};

command_output run_clt(const clt_opts& o, const global_opts& g) {
    double s2 = o.sigma2;
    if (!o.sigma2_closed_form.empty()) s2 = sl::stats::sigma2_closed_form(o.sigma2_closed_form);
    if (!(s2 > 0.0)) throw sl::unsupported("provide --sigma2 > 0 or --sigma2-closed-form");
    resolved_alpha a = resolve_alpha(o.alpha, g, o.max_n);
    sl::stats::distribution_report r = sl::stats::clt_report(a.value, o.max_n, s2, stream_cfg(g));
    command_output out;
    out.data = base_report("clt", o.alpha, a.bits);
    out.data["m"] = o.max_n;
    out.data["sigma2"] = s2;
    out.data["reference"] = r.reference;
    out.data["count"] = r.count;
    out.data["ks_distance"] = r.ks;
    out.data["quantiles"] = r.quantiles;
    out.csv.push_back({"quantile_index", "z"});
    for (std::size_t j = 0; j < r.quantiles.size(); ++j)
        out.csv.push_back({std::to_string(j), fd(r.quantiles[j])});
    return out;
}

struct k_opts {
    std::string alpha;
    std::uint64_t k = 10;
    bool square_sum = false;
};

command_output run_symmetry(const k_opts& o, const global_opts& g) {
    sl::cf::quotient_source src = sl::cf::parse_alpha(o.alpha);
    std::vector<sl::cf::convergent> conv = sl::cf::convergents(src, o.k);
    if (!conv.back().q.fits_ulong_p()) throw sl::unsupported("q_k exceeds the compute budget");
    std::uint64_t qk = conv.back().q.get_ui();
    std::uint32_t bits = g.precision_bits ? g.precision_bits : sl::cf::default_precision_bits(qk);
    sl::fixed_fraction alpha = sl::cf::alpha_value(src, bits);
    double v = sl::stats::symmetry_check(src, alpha, o.k, stream_cfg(g));
    command_output out;
    out.data = base_report("symmetry", o.alpha, bits);
    out.data["k"] = o.k;
    out.data["q_k"] = qk;
    out.data["max_abs_defect"] = v;
    out.csv.push_back({"k", "q_k", "max_abs_defect"});
    out.csv.push_back({std::to_string(o.k), std::to_string(qk), fd(v)});
    return out;
}

command_output run_extremes(const k_opts& o, const global_opts& g) {
    sl::cf::quotient_source src = sl::cf::parse_alpha(o.alpha);
    std::vector<sl::cf::convergent> conv = sl::cf::convergents(src, o.k);
    if (!conv.back().q.fits_ulong_p()) throw sl::unsupported("q_k exceeds the compute budget");
    std::uint64_t qk = conv.back().q.get_ui();
    std::uint32_t bits = g.precision_bits ? g.precision_bits : sl::cf::default_precision_bits(qk);
    sl::fixed_fraction alpha = sl::cf::alpha_value(src, bits);
    sl::stats::extreme_report r = sl::stats::extreme_check(src, alpha, o.k, stream_cfg(g));
    command_output out;
    out.data = base_report("extremes", o.alpha, bits);
    out.data["k"] = o.k;
    out.data["q_k"] = r.q;
    out.data["max"] = r.max_v;
    out.data["min"] = r.min_v;
    out.data["argmax"] = r.argmax;
    out.data["argmin"] = r.argmin;
    out.data["v_constant"] = r.v_const;
    out.data["predicted_main"] = r.predicted;
    out.data["ratio"] = r.ratio;
    out.data["err_scale"] = r.err_scale;
    out.csv.push_back({"k", "q_k", "max", "min", "predicted_main", "ratio", "err_scale"});
    out.csv.push_back({std::to_string(o.k), std::to_string(r.q), fd(r.max_v), fd(r.min_v),
                       fd(r.predicted), fd(r.ratio), fd(r.err_scale)});
    if (o.square_sum) {
        sl::stats::pq_square_report p = sl::stats::pq_square_sum_check(src, alpha, o.k, stream_cfg(g));
        out.data["square_sum_lhs"] = p.lhs;
        out.data["square_sum_rhs"] = p.rhs;
        out.data["square_sum_ratio"] = p.ratio;
        out.data["square_sum_err_scale"] = p.err_scale;
    }
    return out;
}

struct predict_opts {
    std::string alpha;
    std::string model = "sawtooth";
    double a = 0.0, b = 0.5;
    std::uint64_t max_n = 1000;
    std::uint64_t cutoff = 0;
    bool allow_truncated = false;
    bool empirical = false;
};

command_output run_predict(const predict_opts& o, const global_opts& g) {
    sl::stats::fourier_model model =
        o.model == "sawtooth"    ? sl::stats::fourier_model::sawtooth()
        : o.model == "indicator" ? sl::stats::fourier_model::indicator(o.a, o.b)
        : o.model == "zero"      ? sl::stats::fourier_model::zero_model()
                                 : throw sl::unsupported("unknown model '" + o.model + "'");
    sl::cf::quotient_source src = sl::cf::parse_alpha(o.alpha);
    double d = sl::cf::poly_bound(src).d;
    std::uint64_t horizon =
        o.cutoff ? std::max(o.cutoff, o.max_n) : sl::stats::fejer_cutoff(o.max_n, d);
    std::uint32_t bits = g.precision_bits ? g.precision_bits : sl::cf::default_precision_bits(horizon);
    sl::fixed_fraction alpha = sl::cf::alpha_value(src, bits);
    sl::stats::predicted_moments r = sl::stats::predicted_birkhoff_moments(
        model, src, alpha, o.max_n, stream_cfg(g), o.cutoff, o.allow_truncated);
    command_output out;
    out.data = base_report("birkhoff-predict", o.alpha, bits);
    out.data["m"] = o.max_n;
    out.data["model"] = o.model;
    if (o.model == "indicator") {
        out.data["a"] = o.a;
        out.data["b"] = o.b;
    }
    out.data["a_main"] = r.a_main;
    out.data["b2_main"] = r.b2_main;
    out.data["cutoff"] = r.cutoff;
    out.data["truncated"] = r.truncated;
    out.csv.push_back({"m", "model", "a_main", "b2_main", "cutoff", "truncated"});
    out.csv.push_back({std::to_string(o.max_n), o.model, fd(r.a_main), fd(r.b2_main),
                       std::to_string(r.cutoff), r.truncated ? "true" : "false"});
    if (o.empirical) {
        sl::birkhoff::summand s = o.model == "sawtooth"
                                      ? sl::birkhoff::summand::beck_sawtooth()
                                      : sl::birkhoff::summand::indicator(o.a, o.b);
        sl::stats::moment_report emp = sl::stats::temporal_moments(s, alpha, o.max_n, stream_cfg(g));
        out.data["empirical_mean"] = emp.mean;
        out.data["empirical_variance"] = emp.variance;
    }
    return out;
}

struct bu_opts {
    std::string alpha;
    double a = 0.0, b = 0.5;
    double length = 0.0; // when set, interval is [0, length]
    std::uint64_t grid_min = 1024, grid_max = 1048576;
    std::string grid_list;
};

command_output run_bu(const bu_opts& o, const global_opts& g) {
    double a = o.a, b = o.b;
    if (o.length > 0.0) {
        a = 0.0;
        b = o.length;
    }
    std::vector<std::uint64_t> grid =
        o.grid_list.empty() ? dyadic_grid(o.grid_min, o.grid_max) : parse_grid(o.grid_list);
    resolved_alpha al = resolve_alpha(o.alpha, g, grid.back());
    std::vector<sl::stats::bu_point> pts =
        sl::stats::bu_variance_check(al.value, a, b, grid, stream_cfg(g));
    command_output out;
    out.data = base_report("bu", o.alpha, al.bits);
    out.data["a"] = a;
    out.data["b"] = b;
    out.data["grid"] = grid;
    json jp = json::array();
    for (const auto& p : pts)
        jp.push_back({{"m", p.m},
                      {"b2", p.b2},
                      {"ratio", p.ratio},
                      {"predicted_b2", p.predicted_b2},
                      {"predicted_ratio", p.predicted_ratio}});
    out.data["points"] = jp;
    out.csv.push_back({"m", "b2", "ratio", "predicted_b2", "predicted_ratio"});
    for (const auto& p : pts)
        out.csv.push_back({std::to_string(p.m), fd(p.b2), fd(p.ratio), fd(p.predicted_b2),
                           fd(p.predicted_ratio)});
    return out;
}

struct vconst_opts {
    double tol = 1e-8;
};

command_output run_vconst(const vconst_opts& o, const global_opts&) {
    double v = sl::quadrature::v_constant(o.tol);
    command_output out;
    out.data = base_report("vconst", "", 0);
    out.data["V"] = v;
    out.data["tol"] = o.tol;
    out.csv.push_back({"V", "tol"});
    out.csv.push_back({fd(v), fd(o.tol)});
    return out;
}

struct ae_opts {
    std::uint64_t seed_base = 1;
    std::uint32_t seeds = 500;
    std::uint32_t k = 10000;
};

command_output run_ae(const ae_opts& o, const global_opts& g) {
    sl::stats::ae_report r = sl::stats::ae_experiment(o.seed_base, o.seeds, o.k, stream_cfg(g));
    command_output out;
    out.data = base_report("ae-levy", "", r.nominal_bits);
    out.data["seed"] = o.seed_base;
    out.data["seeds"] = o.seeds;
    out.data["k"] = o.k;
    out.data["reference"] = r.dist.reference;
    out.data["count"] = r.dist.count;
    out.data["ks_distance"] = r.dist.ks;
    out.data["quantiles"] = r.dist.quantiles;
    out.csv.push_back({"seed", "statistic"});
    for (const auto& [seed, v] : r.per_seed)
        out.csv.push_back({std::to_string(seed), fd(v)});
    return out;
}

// ---------------------------------------------------------------------------

void write_payload(const command_output& out, const global_opts& g, std::ostream& os) {
    if (g.format == "json") {
        os << out.data.dump(2) << '\n';
    } else {
        for (const auto& row : out.csv) sl::report::csv_row(os, row);
    }
}

void write_manifest(const global_opts& g, const std::string& command, const json& config_echo,
                    std::uint32_t bits, double wall_seconds, int guard_incidents,
                    const std::string& error_msg) {
    std::string path = g.manifest;
    if (path.empty()) {
        if (g.out.empty()) return;
        path = g.out + ".manifest.json";
    }
    json m;
    m["artifact_version"] = sl::artifact_version;
    m["command"] = command;
    m["config"] = config_echo;
    m["precision_bits"] = bits;
    m["wall_time_seconds"] = wall_seconds;
    m["guard_incidents"] = guard_incidents;
    m["outputs"] = json::array({g.out.empty() ? "stdout" : g.out});
    if (!error_msg.empty()) m["error"] = error_msg;
    std::ofstream f(path, std::ios::trunc);
    if (f) f << m.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "sudlerlab: Sudler products, Diophantine sums, and Birkhoff sums along "
        "irrational rotations.\n"
        "Alpha spec grammar: golden | sqrt:<D> | quadratic:<a0>;<pre>|<period> | e | "
        "list:<a1,a2,...> | random:<seed>[:<bits>]\n"
        "All logarithms natural; all sums dimensionless. Exit codes: 0 ok, 1 usage, "
        "2 numeric guard."};
    app.require_subcommand(1);
    app.fallthrough(false);

    global_opts g;
    g.workers = default_workers();

    auto add_global = [&](CLI::App* sub) {
        sub->add_option("--workers", g.workers, "Worker threads (outputs are worker-independent)")
            ->capture_default_str();
        sub->add_option("--chunk-size", g.chunk_size, "Chunk size for parallel streaming")
            ->capture_default_str();
        sub->add_option("--precision-bits", g.precision_bits,
                        "Fixed-point mantissa bits (0 = automatic policy)");
        sub->add_option("--out", g.out, "Output file (default stdout)");
        sub->add_option("--manifest", g.manifest,
                        "Manifest path (default <out>.manifest.json when --out is set)");
        sub->add_option("--format", g.format, "Output format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    };

    cf_opts cf_o;
    CLI::App* cf_cmd = app.add_subcommand(
        "cf", "Partial quotients and convergents. CSV columns: k,a_k,p_k,q_k (row 0 carries a0).");
    cf_cmd->add_option("--alpha", cf_o.alpha, "Alpha spec")->required();
    cf_cmd->add_option("--k", cf_o.k, "Number of quotients")->check(CLI::PositiveNumber);
    add_global(cf_cmd);

    sudler_opts su_o;
    CLI::App* su_cmd = app.add_subcommand(
        "sudler", "log P_N prefix stream. CSV columns: n,log_p,err_bound (one row per N).");
    su_cmd->add_option("--alpha", su_o.alpha, "Alpha spec")->required();
    su_cmd->add_option("--max-n", su_o.max_n, "Horizon M")->check(CLI::PositiveNumber);
    su_cmd->add_option("--sidecar", g.sidecar, "Binary sidecar path: (u64 N, f64 logP) LE records");
    add_global(su_cmd);

    moments_opts mo_o;
    CLI::App* mo_cmd = app.add_subcommand(
        "moments",
        "Temporal mean/variance over N=1..M. CSV columns: m,summand,mean,variance,min,max,argmin,argmax.");
    mo_cmd->add_option("--alpha", mo_o.alpha, "Alpha spec")->required();
    mo_cmd->add_option("--summand", mo_o.summand, "log-sudler|log-dioph|sawtooth|indicator")
        ->capture_default_str();
    mo_cmd->add_option("--a", mo_o.a, "Indicator left endpoint");
    mo_cmd->add_option("--b", mo_o.b, "Indicator right endpoint");
    mo_cmd->add_option("--max-n", mo_o.max_n, "Horizon M")->check(CLI::PositiveNumber);
    mo_cmd->add_flag("--predict", mo_o.predict, "Include predicted mean/variance main terms");
    mo_cmd->add_flag("--cross", mo_o.cross, "Include log-Sudler x sawtooth cross moment");
    add_global(mo_cmd);

    dioph_opts di_o;
    CLI::App* di_cmd = app.add_subcommand(
        "dioph-sum", "Sum_{m<=M} 1/(8 pi^2 m^2 ||m alpha||^2). CSV columns: m,sum.");
    di_cmd->add_option("--alpha", di_o.alpha, "Alpha spec")->required();
    di_cmd->add_option("--max-m", di_o.max_m, "Horizon M")->check(CLI::PositiveNumber);
    add_global(di_cmd);

    sigma2_opts s2_o;
    CLI::App* s2_cmd = app.add_subcommand(
        "sigma2", "Slope fit of the Diophantine sum vs log M. CSV columns: m,sum,ratio.");
    s2_cmd->add_option("--alpha", s2_o.alpha, "Alpha spec")->required();
    s2_cmd->add_option("--grid-min", s2_o.grid_min, "Dyadic grid start")->capture_default_str();
    s2_cmd->add_option("--grid-max", s2_o.grid_max, "Dyadic grid end")->capture_default_str();
    s2_cmd->add_option("--grid", s2_o.grid_list, "Explicit comma-separated grid (overrides dyadic)");
    s2_cmd->add_option("--closed-form", s2_o.closed_form, "Compare against: golden|sqrt3");
    add_global(s2_cmd);

    clt_opts cl_o;
    CLI::App* cl_cmd = app.add_subcommand(
        "clt", "Normalized log P_N vs standard normal. CSV columns: quantile_index,z.");
    cl_cmd->add_option("--alpha", cl_o.alpha, "Alpha spec")->required();
    cl_cmd->add_option("--max-n", cl_o.max_n, "Horizon M")->check(CLI::PositiveNumber);
    cl_cmd->add_option("--sigma2", cl_o.sigma2, "Variance constant sigma(alpha)^2");
    cl_cmd->add_option("--sigma2-closed-form", cl_o.sigma2_closed_form,
                       "Use closed form: golden|sqrt3");
    add_global(cl_cmd);

    k_opts sy_o;
    CLI::App* sy_cmd = app.add_subcommand(
        "symmetry", "max_N |log P_N + log P_{q_k-1-N} - log q_k|. CSV columns: k,q_k,max_abs_defect.");
    sy_cmd->add_option("--alpha", sy_o.alpha, "Alpha spec")->required();
    sy_cmd->add_option("--k", sy_o.k, "Convergent index")->check(CLI::PositiveNumber);
    add_global(sy_cmd);

    k_opts ex_o;
    CLI::App* ex_cmd = app.add_subcommand(
        "extremes",
        "Extremes of log P_N over N < q_k vs V*(a_1+..+a_k). CSV columns: "
        "k,q_k,max,min,predicted_main,ratio,err_scale.");
    ex_cmd->add_option("--alpha", ex_o.alpha, "Alpha spec")->required();
    ex_cmd->add_option("--k", ex_o.k, "Convergent index")->check(CLI::PositiveNumber);
    ex_cmd->add_flag("--square-sum", ex_o.square_sum,
                     "Also report sqrt(diophantine sum) vs (pi/sqrt(720)) sqrt(sum a_l^2)");
    add_global(ex_cmd);

    predict_opts pr_o;
    CLI::App* pr_cmd = app.add_subcommand(
        "birkhoff-predict",
        "Fejer-weighted mean and variance main terms from Fourier coefficients. CSV columns: "
        "m,model,a_main,b2_main,cutoff,truncated.");
    pr_cmd->add_option("--alpha", pr_o.alpha, "Alpha spec")->required();
    pr_cmd->add_option("--model", pr_o.model, "sawtooth|indicator|zero")->capture_default_str();
    pr_cmd->add_option("--a", pr_o.a, "Indicator left endpoint");
    pr_cmd->add_option("--b", pr_o.b, "Indicator right endpoint");
    pr_cmd->add_option("--max-n", pr_o.max_n, "Horizon M")->check(CLI::PositiveNumber);
    pr_cmd->add_option("--cutoff", pr_o.cutoff, "Fourier cutoff H override (0 = required H)");
    pr_cmd->add_flag("--allow-truncated", pr_o.allow_truncated,
                     "Proceed when cutoff is below the required H");
    pr_cmd->add_flag("--empirical", pr_o.empirical, "Also compute empirical moments");
    add_global(pr_cmd);

    bu_opts bu_o;
    CLI::App* bu_cmd = app.add_subcommand(
        "bu", "Indicator-variance band check. CSV columns: m,b2,ratio,predicted_b2,predicted_ratio.");
    bu_cmd->add_option("--alpha", bu_o.alpha, "Alpha spec")->required();
    bu_cmd->add_option("--a", bu_o.a, "Left endpoint")->capture_default_str();
    bu_cmd->add_option("--b", bu_o.b, "Right endpoint")->capture_default_str();
    bu_cmd->add_option("--length", bu_o.length, "Shorthand for interval [0, length]");
    bu_cmd->add_option("--grid-min", bu_o.grid_min, "Dyadic grid start")->capture_default_str();
    bu_cmd->add_option("--grid-max", bu_o.grid_max, "Dyadic grid end")->capture_default_str();
    bu_cmd->add_option("--grid", bu_o.grid_list, "Explicit comma-separated grid");
    add_global(bu_cmd);

    vconst_opts vc_o;
    CLI::App* vc_cmd = app.add_subcommand(
        "vconst", "V = integral_0^{5/6} log|2 sin(pi x)| dx. CSV columns: V,tol.");
    vc_cmd->add_option("--tol", vc_o.tol, "Quadrature tolerance in [1e-12, 1e-4]")
        ->capture_default_str();
    add_global(vc_cmd);

    ae_opts ae_o;
    CLI::App* ae_cmd = app.add_subcommand(
        "ae-levy",
        "Gauss-measure quotient square sums vs the Levy law. CSV columns: seed,statistic.");
    ae_cmd->add_option("--seed-base", ae_o.seed_base, "First seed")->capture_default_str();
    ae_cmd->add_option("--seeds", ae_o.seeds, "Number of seeds")->capture_default_str();
    ae_cmd->add_option("--k", ae_o.k, "Quotients per seed")->capture_default_str();
    add_global(ae_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e); // prints usage; 0 for --help/--version
        return code == 0 ? 0 : 1;
    }

    std::string command;
    std::uint32_t bits_used = g.precision_bits;
    auto t0 = std::chrono::steady_clock::now();
    try {
        command_output out;
        if (cf_cmd->parsed()) {
            command = "cf";
            out = run_cf(cf_o, g);
        } else if (su_cmd->parsed()) {
            command = "sudler";
            out = run_sudler(su_o, g);
        } else if (mo_cmd->parsed()) {
            command = "moments";
            out = run_moments(mo_o, g);
        } else if (di_cmd->parsed()) {
            command = "dioph-sum";
            out = run_dioph(di_o, g);
        } else if (s2_cmd->parsed()) {
            command = "sigma2";
            out = run_sigma2(s2_o, g);
        } else if (cl_cmd->parsed()) {
            command = "clt";
            out = run_clt(cl_o, g);
        } else if (sy_cmd->parsed()) {
            command = "symmetry";
            out = run_symmetry(sy_o, g);
        } else if (ex_cmd->parsed()) {
            command = "extremes";
            out = run_extremes(ex_o, g);
        } else if (pr_cmd->parsed()) {
            command = "birkhoff-predict";
            out = run_predict(pr_o, g);
        } else if (bu_cmd->parsed()) {
            command = "bu";
            out = run_bu(bu_o, g);
        } else if (vc_cmd->parsed()) {
            command = "vconst";
            out = run_vconst(vc_o, g);
        } else if (ae_cmd->parsed()) {
            command = "ae-levy";
            out = run_ae(ae_o, g);
        } else {
            std::cerr << "no subcommand selected\n";
            return 1;
        }
        if (out.data.contains("precision_bits"))
            bits_used = out.data["precision_bits"].get<std::uint32_t>();

        if (g.out.empty()) {
            write_payload(out, g, std::cout);
        } else {
            std::ofstream f(g.out, std::ios::trunc);
            if (!f) {
                std::cerr << "cannot open output path " << g.out << '\n';
                return 1;
            }
            write_payload(out, g, f);
        }
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json config;
        config["workers"] = g.workers;
        config["chunk_size"] = g.chunk_size;
        config["format"] = g.format;
        json args = json::array();
        for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
        config["argv"] = args;
        write_manifest(g, command, config, bits_used, wall, 0, "");
        return 0;
    } catch (const sl::numeric_error& e) {
        std::cerr << "numeric guard failure: " << e.what() << '\n';
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(g, command, json::object(), bits_used, wall, 1, e.what());
        return 2;
    } catch (const sl::usage_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        std::cerr << "alpha grammar: golden | sqrt:<D> | quadratic:<a0>;<pre>|<period> | e | "
                     "list:<a1,...> | random:<seed>[:<bits>]\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
