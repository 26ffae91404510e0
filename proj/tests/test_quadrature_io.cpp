#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sudlerlab/quadrature.hpp"
#include "sudlerlab/report_io.hpp"
#include "sudlerlab/version.hpp"

namespace qd = sudlerlab::quadrature;
namespace io = sudlerlab::report;
using sudlerlab::invalid_interval;
using sudlerlab::unsupported;

TEST_CASE("log 2 sin at distinguished points") {
    CHECK(std::fabs(qd::log2sin(5.0 / 6.0)) < 1e-14); // 2 sin(5 pi/6) = 1
    CHECK(std::fabs(qd::log2sin(1.0 / 6.0)) < 1e-14);
    CHECK(qd::log2sin(0.5) == Catch::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("integral of log|2 sin| over structured ranges") {
    // the full-period integral vanishes
    CHECK(std::fabs(qd::log2sin_integral(1.0, 1e-10)) < 1e-9);
    // so does the half-period integral, by symmetry
    CHECK(std::fabs(qd::log2sin_integral(0.5, 1e-10)) < 1e-9);
    // reflection consistency
    double a = qd::log2sin_integral(1.0 / 6.0, 1e-10);
    double b = qd::log2sin_integral(5.0 / 6.0, 1e-10);
    CHECK(a + b == Catch::Approx(0.0).margin(1e-9));
    // monotone decreasing while the integrand is negative
    CHECK(qd::log2sin_integral(0.05, 1e-10) < qd::log2sin_integral(0.01, 1e-10));
    CHECK(qd::log2sin_integral(0.0, 1e-10) == 0.0);

    CHECK_THROWS_AS(qd::log2sin_integral(-0.1, 1e-10), invalid_interval);
    CHECK_THROWS_AS(qd::log2sin_integral(1.5, 1e-10), invalid_interval);
}

TEST_CASE("head expansion agrees with quadrature just above the splice") {
    // integrate [delta, 2 delta] two ways: head(2d) - head(d) vs simpson
    double d = 1e-4;
    double head = qd::log2sin_integral(2 * d, 1e-12) - qd::log2sin_integral(d, 1e-12);
    // crude midpoint bound: integrand is smooth and nearly log-linear there
    double mid = qd::log2sin(1.5 * d) * d;
    CHECK(head == Catch::Approx(mid).margin(1e-5));
}

TEST_CASE("the extreme-value constant") {
    double v = qd::v_constant(1e-10);
    CHECK(v == Catch::Approx(0.16153297361).margin(2e-9));
    // maximum of the antiderivative: nearby endpoints integrate lower
    CHECK(qd::log2sin_integral(0.80, 1e-10) < v);
    CHECK(qd::log2sin_integral(0.86, 1e-10) < v);
    // tolerance gating
    CHECK_THROWS_AS(qd::v_constant(1e-13), unsupported);
    CHECK_THROWS_AS(qd::v_constant(1e-3), unsupported);
    CHECK(qd::v_constant(1e-6) == Catch::Approx(v).margin(1e-5));
}

TEST_CASE("doubles format with round-trip fidelity") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 50; ++i) {
        double v = u(rng);
        CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(std::stod(io::format_double(0.1)) == 0.1);
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(-0.5) == "-0.5");
}

TEST_CASE("csv quoting") {
    CHECK(io::csv_quote("plain") == "plain");
    CHECK(io::csv_quote("a,b") == "\"a,b\"");
    CHECK(io::csv_quote("he said \"hi\"") == "\"he said \"\"hi\"\"\"");
    CHECK(io::csv_quote("line\nbreak") == "\"line\nbreak\"");

    std::ostringstream os;
    io::csv_row(os, {"n", "log_p", "err,bound"});
    CHECK(os.str() == "n,log_p,\"err,bound\"\n");
}

TEST_CASE("sidecar records are fixed-width little-endian") {
    std::ostringstream os;
    io::sidecar_record(os, 1, 1.5);
    std::string s = os.str();
    REQUIRE(s.size() == 16);
    const unsigned char* b = reinterpret_cast<const unsigned char*>(s.data());
    CHECK(b[0] == 1);
    for (int i = 1; i < 8; ++i) CHECK(b[i] == 0);
    // 1.5 = 0x3FF8000000000000
    CHECK(b[8] == 0x00);
    CHECK(b[14] == 0xF8);
    CHECK(b[15] == 0x3F);

    std::ostringstream os2;
    io::sidecar_record(os2, 0x0123456789ABCDEFULL, -0.0);
    std::string t = os2.str();
    const unsigned char* c = reinterpret_cast<const unsigned char*>(t.data());
    CHECK(c[0] == 0xEF);
    CHECK(c[7] == 0x01);
    CHECK(c[15] == 0x80); // sign bit of -0.0
}

TEST_CASE("version string is sane") {
    std::string v = sudlerlab::artifact_version;
    CHECK(!v.empty());
    CHECK(v.find('.') != std::string::npos);
}
