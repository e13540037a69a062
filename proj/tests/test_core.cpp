#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "shapcause/coalition.hpp"
#include "shapcause/parallel.hpp"
#include "shapcause/rng.hpp"

using namespace shapcause;

TEST_CASE("splitmix and stream mixing are deterministic and decorrelated") {
    CHECK(mix_seed(42, 0) == mix_seed(42, 0));
    CHECK(mix_seed(42, 0) != mix_seed(42, 1));
    CHECK(mix_seed(42, 0) != mix_seed(43, 0));

    // No collisions over a block of adjacent streams.
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(mix_seed(7, i));
    CHECK(seen.size() == 10000);
}

TEST_CASE("rng reproducibility and ranges") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng r(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform01();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
    for (int i = 0; i < 10000; ++i) {
        const auto x = r.below(7);
        CHECK(x < 7);
    }
}

TEST_CASE("rng normal moments") {
    Rng r(2024);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);       // ~4.5 sigma band
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("coalition invariants and operations") {
    CHECK_THROWS_AS(Coalition(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(Coalition(0b100, 2), std::invalid_argument);
    CHECK_THROWS_AS(Coalition(0, kMaxFeatures + 1), std::invalid_argument);
    CHECK_THROWS_AS(Coalition::of({2}, 2), std::invalid_argument);

    const Coalition s = Coalition::of({0, 2}, 4);
    CHECK(s.size() == 2);
    CHECK(s.dim() == 4);
    CHECK(s.contains(0));
    CHECK(!s.contains(1));
    CHECK(s.indices() == std::vector<int>{0, 2});
    CHECK(s.complement().indices() == std::vector<int>{1, 3});
    CHECK(s.with(1).size() == 3);
    CHECK(s.without(0).indices() == std::vector<int>{2});
    CHECK(s.to_string() == "{0,2}");
    CHECK(Coalition::empty(4).is_empty());
    CHECK(Coalition::full(4).is_full());
    CHECK(Coalition::full(4).complement().is_empty());
}

TEST_CASE("blocked reductions are independent of the thread count") {
    std::vector<double> xs(100001);
    Rng r(9);
    for (auto& x : xs) x = r.uniform(-1.0, 1.0) * 1e3;

    auto term = [&](std::size_t i) { return xs[i]; };
    par::set_thread_limit(1);
    const double s1 = par::blocked_sum(xs.size(), term);
    const par::MeanVar mv1 = par::blocked_mean_var(xs.size(), term);
    par::set_thread_limit(4);
    const double s4 = par::blocked_sum(xs.size(), term);
    const par::MeanVar mv4 = par::blocked_mean_var(xs.size(), term);
    par::set_thread_limit(0);

    CHECK(s1 == s4);  // bit-identical by construction
    CHECK(mv1.mean == mv4.mean);
    CHECK(mv1.m2 == mv4.m2);
    CHECK(mv1.count == mv4.count);
}

TEST_CASE("blocked mean/variance agree with a direct pass") {
    std::vector<double> xs(5000);
    Rng r(11);
    for (auto& x : xs) x = r.normal() * 3.0 + 2.0;

    const par::MeanVar blocked =
        par::blocked_mean_var(xs.size(), [&](std::size_t i) { return xs[i]; });
    par::MeanVar direct;
    for (double x : xs) direct.add(x);

    CHECK(blocked.count == direct.count);
    CHECK(blocked.mean == doctest::Approx(direct.mean).epsilon(1e-13));
    CHECK(blocked.variance() == doctest::Approx(direct.variance()).epsilon(1e-12));
    CHECK(blocked.std_error() > 0.0);
}

TEST_CASE("thread limit override") {
    par::set_thread_limit(3);
    CHECK(par::thread_limit() == 3);
    par::set_thread_limit(0);
    CHECK(par::thread_limit() >= 1);
}
