#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "shapcause/errors.hpp"
#include "shapcause/parallel.hpp"
#include "shapcause/reference.hpp"
#include "shapcause/rng.hpp"
#include "shapcause/shapley.hpp"

using namespace shapcause;

namespace {

// v(S) = a*|S on {0}| + b*|S on {1}|: the additive two-player game.
TableValueFunction additive_pair(double a, double b) {
    return TableValueFunction(2, {0.0, a, b, a + b});
}

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c *= static_cast<double>(n - i + 1) / i;
    return c;
}

}  // namespace

TEST_CASE("shapley_weight closed values and errors") {
    CHECK(shapley_weight(0, 1) == 1.0);
    CHECK(shapley_weight(1, 3) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(shapley_weight(0, 2) == doctest::Approx(0.5));
    CHECK_THROWS_AS(shapley_weight(-1, 3), std::invalid_argument);
    CHECK_THROWS_AS(shapley_weight(3, 3), std::invalid_argument);
    CHECK_THROWS_AS(shapley_weight(0, 0), std::invalid_argument);
}

TEST_CASE("weights over all subsets of the other players sum to one") {
    for (int m = 1; m <= 20; ++m) {
        double sum = 0.0;
        for (int k = 0; k <= m - 1; ++k) sum += binomial(m - 1, k) * shapley_weight(k, m);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("exact attribution of simple games") {
    SUBCASE("constant game attributes nothing") {
        const TableValueFunction v(3, std::vector<double>(8, 4.25));
        const AttributionResult r = shapley_exact(v);
        CHECK(r.phi0 == 4.25);
        for (double p : r.phi) CHECK(p == 0.0);
        CHECK(r.efficiency_residual == 0.0);
        CHECK(r.method == Method::exact);
        CHECK(!r.std_errors.has_value());
    }
    SUBCASE("additive game splits exactly") {
        const AttributionResult r = shapley_exact(additive_pair(2.0, 2.5));
        CHECK(r.phi[0] == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(r.phi[1] == doctest::Approx(2.5).epsilon(1e-15));
    }
    SUBCASE("two-player game with interaction") {
        // v = (0, 2, 2.5, 3)
        const TableValueFunction v(2, {0.0, 2.0, 2.5, 3.0});
        const AttributionResult r = shapley_exact(v);
        CHECK(r.phi[0] == doctest::Approx(1.25).epsilon(1e-15));
        CHECK(r.phi[1] == doctest::Approx(1.75).epsilon(1e-15));
        CHECK(std::abs(r.efficiency_residual) < 1e-15);
    }
}

TEST_CASE("exact attribution error paths") {
    const TableValueFunction small = TableValueFunction::random(3, 1);
    ExactOptions opt;
    opt.enumeration_cap = 2;
    CHECK_THROWS_AS(shapley_exact(small, opt), CapacityError);

    struct BadGame final : ValueFunction {
        int dim() const override { return 2; }
        double value(const Coalition& s) const override {
            return s.bits() == 0b01 ? std::nan("") : 1.0;
        }
    };
    try {
        shapley_exact(BadGame{});
        CHECK(false);
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("{0}") != std::string::npos);
    }
}

TEST_CASE("cache toggle and serial reference agree") {
    const TableValueFunction v = TableValueFunction::random(6, 99);
    ExactOptions cached, uncached;
    uncached.cache_values = false;
    const AttributionResult a = shapley_exact(v, cached);
    const AttributionResult b = shapley_exact(v, uncached);
    for (int j = 0; j < 6; ++j) CHECK(a.phi[j] == b.phi[j]);  // identical path order
    CHECK(a.phi0 == b.phi0);

    const AttributionResult ref = reference::shapley_exact(v);
    for (int j = 0; j < 6; ++j)
        CHECK(a.phi[j] == doctest::Approx(ref.phi[j]).epsilon(1e-12));
}

TEST_CASE("exact attribution is linear in the game") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const int m = 2 + static_cast<int>(seed % 5);
        const TableValueFunction v1 = TableValueFunction::random(m, 100 + seed);
        const TableValueFunction v2 = TableValueFunction::random(m, 200 + seed);
        const double alpha = 1.75, beta = -0.4;
        const AttributionResult combined =
            shapley_exact(v1.scaled(alpha) + v2.scaled(beta));
        const AttributionResult r1 = shapley_exact(v1);
        const AttributionResult r2 = shapley_exact(v2);
        for (int j = 0; j < m; ++j)
            CHECK(combined.phi[j] ==
                  doctest::Approx(alpha * r1.phi[j] + beta * r2.phi[j]).epsilon(1e-9));
    }
}

TEST_CASE("exact attribution is identical at any thread count") {
    const TableValueFunction v = TableValueFunction::random(8, 3);
    par::set_thread_limit(1);
    const AttributionResult a = shapley_exact(v);
    par::set_thread_limit(4);
    const AttributionResult b = shapley_exact(v);
    par::set_thread_limit(0);
    for (int j = 0; j < 8; ++j) CHECK(a.phi[j] == b.phi[j]);
}

TEST_CASE("permutation sampling basics") {
    SUBCASE("additive games are estimated with zero variance") {
        const AttributionResult r =
            shapley_permutation_sampling(additive_pair(2.0, 2.5), 50, 7);
        CHECK(r.method == Method::permutation_sampling);
        REQUIRE(r.std_errors.has_value());
        CHECK(r.phi[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(r.phi[1] == doctest::Approx(2.5).epsilon(1e-12));
        CHECK((*r.std_errors)[0] == 0.0);
        CHECK((*r.std_errors)[1] == 0.0);
        CHECK(r.seed.has_value());
        CHECK(*r.seed == 7);
    }
    SUBCASE("estimates a random game within three standard errors") {
        const TableValueFunction v = TableValueFunction::random(3, 42);
        const AttributionResult exact = shapley_exact(v);
        const AttributionResult est = shapley_permutation_sampling(v, 50000, 11);
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(est.phi[j] - exact.phi[j]) <=
                  3.0 * (*est.std_errors)[j] + 1e-12);
        // Each sampled ordering telescopes, so efficiency holds exactly.
        CHECK(std::abs(est.efficiency_residual) < 1e-12);
    }
    SUBCASE("needs at least two permutations") {
        CHECK_THROWS_AS(shapley_permutation_sampling(additive_pair(1, 1), 1, 0),
                        std::invalid_argument);
    }
}

TEST_CASE("permutation sampling is bit-identical across thread counts") {
    const TableValueFunction v = TableValueFunction::random(5, 21);
    par::set_thread_limit(1);
    const AttributionResult a = shapley_permutation_sampling(v, 1001, 5);
    par::set_thread_limit(4);
    const AttributionResult b = shapley_permutation_sampling(v, 1001, 5);
    par::set_thread_limit(0);
    for (int j = 0; j < 5; ++j) {
        CHECK(a.phi[j] == b.phi[j]);
        CHECK((*a.std_errors)[j] == (*b.std_errors)[j]);
    }
}

TEST_CASE("permutation sampling matches the serial reference sampler") {
    const TableValueFunction v = TableValueFunction::random(4, 17);
    const AttributionResult a = shapley_permutation_sampling(v, 4000, 33);
    const AttributionResult b = reference::shapley_permutation_sampling(v, 4000, 33);
    for (int j = 0; j < 4; ++j) {
        CHECK(a.phi[j] == doctest::Approx(b.phi[j]).epsilon(1e-12));
        CHECK((*a.std_errors)[j] ==
              doctest::Approx((*b.std_errors)[j]).epsilon(1e-10));
    }
}

TEST_CASE("sampling error shrinks at the Monte Carlo rate") {
    const TableValueFunction v = TableValueFunction::random(4, 55);
    const AttributionResult exact = shapley_exact(v);
    auto rms = [&](int n) {
        double acc = 0.0;
        const int n_seeds = 10;
        for (int seed = 1; seed <= n_seeds; ++seed) {
            const AttributionResult est = shapley_permutation_sampling(v, n, seed);
            double err2 = 0.0;
            for (int j = 0; j < 4; ++j) {
                const double d = est.phi[j] - exact.phi[j];
                err2 += d * d;
            }
            acc += err2 / 4.0;
        }
        return std::sqrt(acc / n_seeds);
    };
    const double ratio = rms(2000) / rms(8000);
    CHECK(ratio > 1.3);
    CHECK(ratio < 2.7);
}

TEST_CASE("axiom harness") {
    SUBCASE("detects a planted dummy player") {
        // Player 2 never changes the payoff.
        Rng r(8);
        std::vector<double> base(4);
        for (auto& x : base) x = r.uniform(-1, 1);
        std::vector<double> values(8);
        for (std::uint32_t mask = 0; mask < 8; ++mask) values[mask] = base[mask & 0b11];
        const TableValueFunction v1(3, values);
        const AxiomReport report = check_axioms(v1, TableValueFunction::random(3, 1), 1e-9);
        CHECK(report.dummy_players == std::vector<int>{2});
        CHECK(report.dummy.pass);
        CHECK(shapley_exact(v1).phi[2] == 0.0);
    }
    SUBCASE("detects a planted symmetric pair") {
        // Payoff depends only on whether each of {0,1} is present as a count.
        Rng r(9);
        double table[2][3];  // [bit2][count of {0,1}]
        for (auto& row : table)
            for (auto& x : row) x = r.uniform(-1, 1);
        std::vector<double> values(8);
        for (std::uint32_t mask = 0; mask < 8; ++mask) {
            const int count = static_cast<int>((mask & 1u) + ((mask >> 1) & 1u));
            values[mask] = table[(mask >> 2) & 1u][count];
        }
        const TableValueFunction v1(3, values);
        const AxiomReport report = check_axioms(v1, TableValueFunction::random(3, 2), 1e-9);
        REQUIRE(report.symmetric_pairs.size() == 1);
        CHECK(report.symmetric_pairs[0] == std::pair<int, int>{0, 1});
        CHECK(report.symmetry.pass);
    }
    SUBCASE("all four axioms hold on random games") {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const TableValueFunction v1 = TableValueFunction::random(4, 300 + seed);
            const TableValueFunction v2 = TableValueFunction::random(4, 700 + seed);
            const AxiomReport report = check_axioms(v1, v2, 1e-9);
            CHECK(report.all_pass());
        }
    }
    SUBCASE("rejects mismatched feature counts") {
        CHECK_THROWS_AS(check_axioms(TableValueFunction::random(2, 1),
                                     TableValueFunction::random(3, 1), 1e-9),
                        std::invalid_argument);
    }
}
