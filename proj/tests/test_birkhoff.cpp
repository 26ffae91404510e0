#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "oracle.hpp"
#include "sudlerlab/birkhoff.hpp"
#include "sudlerlab/cf.hpp"

namespace cf = sudlerlab::cf;
namespace bk = sudlerlab::birkhoff;
using sudlerlab::fixed_fraction;
using sudlerlab::invalid_interval;
using sudlerlab::singularity_suspect;

namespace {

struct run_result {
    std::vector<double> prefix; // S_1..S_m
    std::vector<double> err;
};

run_result run(const bk::summand& s, const fixed_fraction& alpha, std::uint64_t m,
               unsigned workers = 1, std::uint64_t chunk = 1 << 20) {
    run_result r;
    bk::prefix_stream(s, alpha, m, {workers, chunk}, [&](std::uint64_t n, double v, double e) {
        REQUIRE(n == r.prefix.size() + 1);
        r.prefix.push_back(v);
        r.err.push_back(e);
    });
    return r;
}

fixed_fraction golden_alpha(std::uint32_t bits = 192) {
    return cf::alpha_value(cf::quotient_source::golden(), bits);
}

} // namespace

TEST_CASE("summand validation") {
    CHECK_NOTHROW(bk::summand::indicator(0.0, 0.5));
    CHECK_NOTHROW(bk::summand::indicator(0.25, 1.0));
    CHECK_THROWS_AS(bk::summand::indicator(0.5, 0.5), invalid_interval);
    CHECK_THROWS_AS(bk::summand::indicator(0.6, 0.2), invalid_interval);
    CHECK_THROWS_AS(bk::summand::indicator(-0.1, 0.5), invalid_interval);
    CHECK_THROWS_AS(bk::summand::indicator(0.0, 1.0), invalid_interval);
    CHECK_THROWS_AS(bk::summand::indicator(0.0, 1.5), invalid_interval);
}

TEST_CASE("small product values at the golden rotation") {
    run_result r = run(bk::summand::log_sudler(), golden_alpha(), 2);
    CHECK(r.prefix[0] == Catch::Approx(0.622759505157430).margin(1e-12));
    CHECK(r.prefix[1] == Catch::Approx(0.923590195803583).margin(1e-12));
    oracle::real ref = oracle::golden();
    CHECK(r.prefix[0] == Catch::Approx(oracle::log_sudler(ref, 1)).margin(1e-12));
    CHECK(r.prefix[1] == Catch::Approx(oracle::log_sudler(ref, 2)).margin(1e-12));
}

TEST_CASE("small values of the other summands at the golden rotation") {
    fixed_fraction alpha = golden_alpha();
    run_result saw = run(bk::summand::beck_sawtooth(), alpha, 3);
    CHECK(saw.prefix[2] == Catch::Approx(0.208204).margin(1e-5));

    run_result di = run(bk::summand::log_diophantine(), alpha, 1);
    double dist = 1.0 - 0.6180339887498949;
    CHECK(di.prefix[0] ==
          Catch::Approx(std::log(2.0 * 2.71828182845904523536 * dist)).margin(1e-12));
    CHECK(di.prefix[0] == Catch::Approx(0.7307).margin(1e-3));

    run_result ind = run(bk::summand::indicator(0.0, 0.5), alpha, 1);
    CHECK(ind.prefix[0] == Catch::Approx(-0.5).margin(1e-15));
}

TEST_CASE("prefix sums match the high-precision reference within the reported bound") {
    struct row {
        cf::quotient_source src;
        oracle::real ref;
        std::uint64_t m;
    };
    row rows[] = {{cf::quotient_source::golden(), oracle::golden(), 2000},
                  {cf::quotient_source::sqrt_of(3), oracle::sqrt_frac(3), 1000},
                  {cf::quotient_source::euler(), oracle::euler_frac(), 1000}};
    for (auto& row : rows) {
        fixed_fraction alpha = cf::alpha_value(row.src, 192);
        run_result r = run(bk::summand::log_sudler(), alpha, row.m);
        double want = oracle::log_sudler(row.ref, row.m);
        double diff = std::fabs(r.prefix.back() - want);
        CHECK(diff < 2e-9);
        CHECK(diff <= r.err.back());
        CHECK(r.err.back() < 1e-7);
    }
}

TEST_CASE("error bounds are nonnegative and nondecreasing") {
    run_result r = run(bk::summand::log_sudler(), golden_alpha(), 3000);
    for (std::size_t i = 0; i < r.err.size(); ++i) {
        CHECK(r.err[i] >= 0.0);
        if (i) CHECK(r.err[i] >= r.err[i - 1]);
    }
}

TEST_CASE("worker count and chunk size never change the stream") {
    fixed_fraction alpha = cf::alpha_value(cf::quotient_source::sqrt_of(2), 192);
    for (const bk::summand& s :
         {bk::summand::log_sudler(), bk::summand::beck_sawtooth(), bk::summand::indicator(0.1, 0.7)}) {
        run_result base = run(s, alpha, 5000, 1, 1 << 20);
        for (auto [w, c] : {std::pair<unsigned, std::uint64_t>{4, 256},
                            {8, 1024},
                            {3, 4999},
                            {2, 1}}) {
            run_result other = run(s, alpha, 5000, w, c);
            REQUIRE(other.prefix.size() == base.prefix.size());
            for (std::size_t i = 0; i < base.prefix.size(); ++i) {
                REQUIRE(other.prefix[i] == base.prefix[i]); // bit identical
                REQUIRE(other.err[i] == base.err[i]);
            }
        }
    }
}

TEST_CASE("orbit return to the singularity aborts the log summands") {
    // alpha = 1/4 exactly: the orbit hits 0 at n = 4
    fixed_fraction alpha = cf::alpha_value(cf::quotient_source::explicit_terms({4}), 128);
    CHECK_NOTHROW(run(bk::summand::log_sudler(), alpha, 3));
    CHECK_THROWS_AS(run(bk::summand::log_sudler(), alpha, 4), singularity_suspect);
    CHECK_THROWS_AS(run(bk::summand::log_diophantine(), alpha, 4), singularity_suspect);
}

TEST_CASE("sawtooth charges the jump when the orbit may wrap") {
    fixed_fraction alpha = cf::alpha_value(cf::quotient_source::explicit_terms({4}), 128);
    run_result r = run(bk::summand::beck_sawtooth(), alpha, 4);
    // orbit 0.25, 0.5, 0.75, 0.0 centered at 1/2 sums to -0.5
    CHECK(r.prefix[3] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(r.err[3] - r.err[2] >= 1.0); // wrap hazard at n = 4
    CHECK(r.err[2] < 1e-6);
}

TEST_CASE("indicator membership on an exact rational orbit") {
    fixed_fraction alpha = cf::alpha_value(cf::quotient_source::explicit_terms({4}), 128);
    run_result r = run(bk::summand::indicator(0.1, 0.3), alpha, 4);
    // orbit 0.25, 0.5, 0.75, 0.0; interval mass 0.2
    CHECK(r.prefix[0] == Catch::Approx(0.8).margin(1e-12));
    CHECK(r.prefix[1] == Catch::Approx(0.6).margin(1e-12));
    CHECK(r.prefix[2] == Catch::Approx(0.4).margin(1e-12));
    CHECK(r.prefix[3] == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("indicator aborts when the orbit grazes an endpoint") {
    fixed_fraction alpha = cf::alpha_value(cf::quotient_source::explicit_terms({4}), 128);
    // endpoint a = 0.25 is hit exactly at n = 1
    CHECK_THROWS_AS(run(bk::summand::indicator(0.25, 0.75), alpha, 1), singularity_suspect);
    // endpoint b = 0.5 is hit exactly at n = 2
    CHECK_THROWS_AS(run(bk::summand::indicator(0.1, 0.5), alpha, 2), singularity_suspect);
    // a = 0 wraps onto the orbit zero at n = 4
    CHECK_NOTHROW(run(bk::summand::indicator(0.0, 0.4), alpha, 3));
    CHECK_THROWS_AS(run(bk::summand::indicator(0.0, 0.4), alpha, 4), singularity_suspect);
}

TEST_CASE("dirichlet form of log P_N agrees with the direct stream") {
    fixed_fraction alpha = golden_alpha(256);
    run_result direct = run(bk::summand::log_sudler(), alpha, 100);
    bk::fourier_result f = bk::fourier_log_sudler(alpha, 100, 100000);
    CHECK(f.tail_bound > 0.0);
    CHECK(std::fabs(f.value - direct.prefix[99]) <= f.tail_bound + 1e-6);

    bk::fourier_result f25 = bk::fourier_log_sudler(alpha, 25, 200000);
    CHECK(std::fabs(f25.value - direct.prefix[24]) <= f25.tail_bound + 1e-6);

    bk::fourier_result z = bk::fourier_log_sudler(alpha, 0, 1000);
    CHECK(z.value == 0.0);
    CHECK(z.tail_bound == 0.0);
}

TEST_CASE("fejer form of the running average agrees with the direct stream") {
    fixed_fraction alpha = golden_alpha(256);
    run_result direct = run(bk::summand::log_sudler(), alpha, 100);
    // (1/M) sum_{N=0}^{M-1} log P_N, log P_0 = 0
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < 100; ++i) acc += direct.prefix[i];
    double avg = acc / 100.0;
    bk::fourier_result f = bk::fejer_average_log_sudler(alpha, 100, 100000);
    CHECK(std::fabs(f.value - avg) <= f.tail_bound + 1e-6);

    bk::fourier_result one = bk::fejer_average_log_sudler(alpha, 1, 1000);
    CHECK(one.value == 0.0);
    CHECK(one.tail_bound == 0.0);
}

TEST_CASE("tail bounds shrink with the cutoff") {
    fixed_fraction alpha = golden_alpha(256);
    bk::fourier_result a = bk::fourier_log_sudler(alpha, 50, 10000);
    bk::fourier_result b = bk::fourier_log_sudler(alpha, 50, 100000);
    CHECK(b.tail_bound < a.tail_bound);
    CHECK(b.tail_bound == Catch::Approx(a.tail_bound / 10.0).epsilon(1e-9));
}
