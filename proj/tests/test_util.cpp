#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <vector>

#include "netrepair/numio.hpp"
#include "netrepair/parallel.hpp"
#include "netrepair/rng.hpp"

using namespace netrepair;

TEST_CASE("derive_seed separates streams by tag and by base") {
    CHECK(derive_seed(42, "alpha") == derive_seed(42, "alpha"));
    CHECK(derive_seed(42, "alpha") != derive_seed(42, "beta"));
    CHECK(derive_seed(42, "alpha") != derive_seed(43, "alpha"));
    CHECK(derive_seed(0, "") != derive_seed(0, "x"));
}

TEST_CASE("rng streams are deterministic and in range") {
    Rng a(7), b(7);
    bool equal = true;
    for (int i = 0; i < 1000; ++i) equal = equal && (a.next_u64() == b.next_u64());
    CHECK(equal);

    Rng r(123);
    bool in_range = true;
    for (int i = 0; i < 20000; ++i) {
        double u = r.uniform01();
        in_range = in_range && u >= 0.0 && u < 1.0;
    }
    CHECK(in_range);

    bool bounded = true;
    for (int i = 0; i < 2000; ++i) {
        double v = r.uniform(-3.0, 5.0);
        bounded = bounded && v >= -3.0 && v <= 5.0 && r.index(17) < 17;
    }
    CHECK(bounded);
    CHECK(r.uniform(2.5, 2.5) == 2.5);
}

TEST_CASE("gaussian moments under a fixed seed") {
    Rng r(99);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = r.gaussian();
        sum += g;
        sq += g * g;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("parallel_chunks covers every index exactly once at any worker count") {
    auto run = [](const char* threads) {
        setenv("NETREPAIR_THREADS", threads, 1);
        const std::size_t n = 1003;
        std::vector<int> hits(n, 0);
        std::vector<double> partial((n + 255) / 256, 0.0);
        parallel_chunks(n, 256, [&](std::size_t c, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                hits[i] += 1; // chunks are disjoint, no race
                partial[c] += std::sin(static_cast<double>(i));
            }
        });
        unsetenv("NETREPAIR_THREADS");
        bool covered = true;
        for (int h : hits) covered = covered && h == 1;
        REQUIRE(covered);
        double total = 0.0; // combine per-chunk partials in chunk order
        for (double p : partial) total += p;
        return total;
    };
    double t1 = run("1");
    double t4 = run("4");
    double t9 = run("9");
    CHECK(t1 == t4);
    CHECK(t1 == t9);
}

TEST_CASE("parallel_chunks handles empty and tiny inputs") {
    int calls = 0;
    parallel_chunks(0, 16, [&](std::size_t, std::size_t, std::size_t) { ++calls; });
    CHECK(calls == 0);
    std::vector<int> seen;
    parallel_chunks(3, 0, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) seen.push_back(static_cast<int>(i));
    });
    CHECK(seen.size() == 3);
}

TEST_CASE("format_double round trips bit-exactly") {
    bool ok = true;
    for (double v : {0.1, 1.0 / 3.0, 42.0, 1e300, -2.5e-17, 3.141592653589793, -1234.5678})
        ok = ok && parse_double(format_double(v), "t") == v;
    CHECK(ok);
    CHECK(std::signbit(parse_double(format_double(-0.0), "t")));
    Rng r(5);
    bool random_ok = true;
    for (int i = 0; i < 2000; ++i) {
        double v = r.gaussian() * std::exp(r.uniform(-20.0, 20.0));
        random_ok = random_ok && parse_double(format_double(v), "t") == v;
    }
    CHECK(random_ok);
}

TEST_CASE("numeric parsing rejects trailing garbage") {
    CHECK(parse_double("-1.5e3", "t") == -1500.0);
    CHECK_THROWS_AS(parse_double("1.2.3", "t"), ParseError);
    CHECK_THROWS_AS(parse_double("", "t"), ParseError);
    CHECK_THROWS_AS(parse_double("4x", "t"), ParseError);
    CHECK(parse_long("-17", "t") == -17);
    CHECK_THROWS_AS(parse_long("1.5", "t"), ParseError);
    CHECK_THROWS_AS(parse_long("", "t"), ParseError);
}

TEST_CASE("round3 keeps three decimals") {
    CHECK(round3(1.23456) == doctest::Approx(1.235));
    CHECK(round3(-0.0004) == doctest::Approx(0.0));
    CHECK(round3(2.0) == 2.0);
}
