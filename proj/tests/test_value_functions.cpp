#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "shapcause/errors.hpp"
#include "shapcause/parallel.hpp"
#include "shapcause/shapley.hpp"
#include "shapcause/value_function.hpp"

using namespace shapcause;

namespace {

const ModelFunction kLinear12(LinearModel{0.0, {1.0, 2.0}});

// Rows symmetric around zero so the column means are exactly (0, 0).
TabularDataset zero_mean_pair() {
    RowMatrix rows(4, 2);
    rows << 1.0, 0.5, -1.0, -0.5, 2.0, -1.5, -2.0, 1.5;
    return TabularDataset(rows);
}

std::vector<std::unique_ptr<ValueFunction>> all_backends(double rho,
                                                         std::uint64_t seed) {
    const GaussianDistribution source = GaussianDistribution::standardized_pair(rho);
    const TabularDataset data(gaussian_sample(source, 20000, seed));
    const std::vector<double> x_star{1.0, 1.0};
    std::vector<std::unique_ptr<ValueFunction>> out;
    out.push_back(std::make_unique<MarginalEmpiricalValue>(kLinear12, x_star, data));
    out.push_back(std::make_unique<MarginalGaussianValue>(kLinear12, x_star, source));
    out.push_back(
        std::make_unique<ConditionalGaussianClosedValue>(kLinear12, x_star, source));
    out.push_back(std::make_unique<ConditionalGaussianMcValue>(kLinear12, x_star,
                                                               source, 2000, seed));
    out.push_back(
        std::make_unique<ConditionalEmpiricalValue>(kLinear12, x_star, data, 0.1));
    return out;
}

}  // namespace

TEST_CASE("marginal empirical backend") {
    const TabularDataset data = zero_mean_pair();
    MarginalEmpiricalValue v(kLinear12, {1.0, 1.0}, data);

    const McValue v1 = v.evaluate(Coalition::of({0}, 2));
    CHECK(v1.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.value(Coalition::full(2)) == 3.0);  // exactly f(x*)
    CHECK(v.evaluate(Coalition::full(2)).std_error == 0.0);
    CHECK(v.evaluate(Coalition::empty(2)).value == doctest::Approx(0.0).epsilon(1e-12));

    MarginalEmpiricalValue constant(ModelFunction(LinearModel{7.5, {0.0, 0.0}}),
                                    {1.0, 1.0}, data);
    CHECK(constant.value(Coalition::of({1}, 2)) == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("marginal gaussian backend") {
    const GaussianDistribution source = GaussianDistribution::standardized_pair(0.5);
    MarginalGaussianValue v(kLinear12, {1.0, 1.0}, source);
    CHECK(v.evaluate(Coalition::of({0}, 2)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(v.evaluate(Coalition::empty(2)) == 0.0);  // beta0 at zero mean
    CHECK(v.evaluate(Coalition::full(2)) == 3.0);

    // The marginal average ignores the correlation entirely.
    for (double rho : {-0.9, -0.3, 0.0, 0.4, 0.9}) {
        MarginalGaussianValue other(kLinear12, {1.0, 1.0},
                                    GaussianDistribution::standardized_pair(rho));
        for (std::uint32_t bits = 0; bits < 4; ++bits)
            CHECK(other.value(Coalition(bits, 2)) == v.value(Coalition(bits, 2)));
    }

    CHECK_THROWS_AS(MarginalGaussianValue(
                        ModelFunction(InteractionModel{0, {1, 2}, {{0, 1, 1.0}}}),
                        std::vector<double>{1.0, 1.0}, source),
                    UnsupportedBackendError);
}

TEST_CASE("conditional gaussian closed backend") {
    const GaussianDistribution source = GaussianDistribution::standardized_pair(0.5);
    ConditionalGaussianClosedValue v(kLinear12, {1.0, 1.0}, source);
    CHECK(v.evaluate(Coalition::of({0}, 2)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(v.evaluate(Coalition::of({1}, 2)) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(v.evaluate(Coalition::empty(2)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(v.evaluate(Coalition::full(2)) == 3.0);

    // Uncorrelated source: conditional and marginal coincide.
    const GaussianDistribution indep = GaussianDistribution::standardized_pair(0.0);
    ConditionalGaussianClosedValue cond0(kLinear12, {1.0, 1.0}, indep);
    MarginalGaussianValue marg0(kLinear12, {1.0, 1.0}, indep);
    for (std::uint32_t bits = 0; bits < 4; ++bits)
        CHECK(cond0.value(Coalition(bits, 2)) ==
              doctest::Approx(marg0.value(Coalition(bits, 2))).epsilon(1e-15));

    CHECK_THROWS_AS(ConditionalGaussianClosedValue(
                        ModelFunction(InteractionModel{0, {1, 2}, {{0, 1, 1.0}}}),
                        std::vector<double>{1.0, 1.0}, source),
                    UnsupportedBackendError);
}

TEST_CASE("conditional gaussian monte carlo backend") {
    const GaussianDistribution source = GaussianDistribution::standardized_pair(0.6);

    SUBCASE("agrees with the closed form for linear models") {
        ConditionalGaussianMcValue mc(kLinear12, {1.0, 1.0}, source, 100000, 5);
        ConditionalGaussianClosedValue closed(kLinear12, {1.0, 1.0}, source);
        for (std::uint32_t bits = 0; bits < 4; ++bits) {
            const Coalition s(bits, 2);
            const McValue est = mc.evaluate(s);
            CHECK(std::abs(est.value - closed.value(s)) <=
                  3.0 * est.std_error + 1e-12);
        }
    }
    SUBCASE("recovers the correlation for the product model") {
        const ModelFunction product(InteractionModel{0.0, {0.0, 0.0}, {{0, 1, 1.0}}});
        ConditionalGaussianMcValue mc(product, {1.0, 1.0}, source, 100000, 6);
        const McValue est = mc.evaluate(Coalition::empty(2));
        CHECK(std::abs(est.value - 0.6) <= 3.0 * est.std_error);
    }
    SUBCASE("full coalition is exact with zero error") {
        ConditionalGaussianMcValue mc(kLinear12, {1.0, 1.0}, source, 500, 7);
        const McValue est = mc.evaluate(Coalition::full(2));
        CHECK(est.value == 3.0);
        CHECK(est.std_error == 0.0);
    }
    SUBCASE("deterministic per seed, including repeated evaluation") {
        ConditionalGaussianMcValue a(kLinear12, {1.0, 1.0}, source, 500, 8);
        ConditionalGaussianMcValue b(kLinear12, {1.0, 1.0}, source, 500, 8);
        const Coalition s = Coalition::of({0}, 2);
        CHECK(a.evaluate(s).value == b.evaluate(s).value);
        CHECK(a.evaluate(s).value == a.evaluate(s).value);
    }
    SUBCASE("rejects tiny sample counts") {
        CHECK_THROWS_AS(ConditionalGaussianMcValue(kLinear12, {1.0, 1.0}, source, 99, 0),
                        std::invalid_argument);
    }
}

TEST_CASE("conditional empirical backend") {
    SUBCASE("discrete conditioning averages the matching subset") {
        RowMatrix rows(5, 2);
        rows << 1, 10, 1, 20, 0, 30, 1, 40, 0, 50;
        const TabularDataset data(rows,
                                  {ColumnKind::discrete, ColumnKind::continuous});
        const ModelFunction sum(LinearModel{0.0, {1.0, 1.0}});
        ConditionalEmpiricalValue v(sum, {1.0, 25.0}, data, 0.0);
        const MatchedValue m = v.evaluate(Coalition::of({0}, 2));
        CHECK(m.match_count == 3);
        // Rows 0, 1, 3 with column 0 pinned to 1: mean of 11, 21, 41.
        CHECK(m.value == doctest::Approx((11.0 + 21.0 + 41.0) / 3.0).epsilon(1e-14));

        const MatchedValue everything = v.evaluate(Coalition::empty(2));
        CHECK(everything.match_count == 5);
        // Mean of the raw row sums 11, 21, 30, 41, 50.
        CHECK(everything.value == doctest::Approx(30.6).epsilon(1e-12));

        ConditionalEmpiricalValue infeasible(sum, {7.0, 25.0}, data, 0.0);
        CHECK_THROWS_AS(infeasible.evaluate(Coalition::of({0}, 2)),
                        ConditioningInfeasibleError);
    }
    SUBCASE("approaches the Gaussian closed form on a large sample") {
        const double rho = 0.5;
        const GaussianDistribution source = GaussianDistribution::standardized_pair(rho);
        const TabularDataset data(gaussian_sample(source, 200000, 9));
        ConditionalEmpiricalValue emp(kLinear12, {1.0, 1.0}, data, 0.05);
        ConditionalGaussianClosedValue closed(kLinear12, {1.0, 1.0}, source);
        const Coalition s = Coalition::of({0}, 2);
        const MatchedValue m = emp.evaluate(s);
        // Out-of-coalition coefficient magnitude bounds the band-induced bias.
        const double band_bias = 0.05 * 2.0;
        CHECK(std::abs(m.value - closed.value(s)) <=
              band_bias + 3.0 * m.std_error);
        CHECK(m.match_count > 1000);
    }
    SUBCASE("match counts shrink as the coalition grows on discrete data") {
        RowMatrix rows(40, 3);
        Rng r(10);
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            for (Eigen::Index j = 0; j < 3; ++j)
                rows(i, j) = static_cast<double>(r.below(2));
        const TabularDataset data(
            rows, std::vector<ColumnKind>(3, ColumnKind::discrete));
        const ModelFunction sum(LinearModel{0.0, {1.0, 1.0, 1.0}});
        ConditionalEmpiricalValue v(sum, {1.0, 1.0, 0.0}, data, 0.0);
        std::size_t prev = v.evaluate(Coalition::empty(3)).match_count;
        for (const Coalition s :
             {Coalition::of({0}, 3), Coalition::of({0, 1}, 3), Coalition::full(3)}) {
            const std::size_t count = v.evaluate(s).match_count;
            CHECK(count <= prev);
            prev = count;
        }
    }
    SUBCASE("raw-matched mode averages unmodified rows") {
        RowMatrix rows(4, 2);
        rows << 0.98, 5.0, 1.02, 7.0, 0.0, 9.0, 2.0, 11.0;
        const TabularDataset data(rows);
        const ModelFunction first(LinearModel{0.0, {1.0, 0.0}});
        ConditionalEmpiricalValue pinned(first, {1.0, 0.0}, data, 0.1);
        ConditionalEmpiricalValue raw(first, {1.0, 0.0}, data, 0.1, true);
        const Coalition s = Coalition::of({0}, 2);
        CHECK(pinned.evaluate(s).value == doctest::Approx(1.0));
        CHECK(raw.evaluate(s).value == doctest::Approx((0.98 + 1.02) / 2.0));
    }
}

TEST_CASE("boundary identities hold for every backend") {
    for (auto& v : all_backends(0.4, 77)) {
        CHECK(v->value(Coalition::full(2)) == 3.0);  // exact, no tolerance
    }
    // v(empty) does not depend on the explicand.
    const GaussianDistribution source = GaussianDistribution::standardized_pair(0.4);
    const TabularDataset data(gaussian_sample(source, 5000, 3));
    const std::vector<double> x1{1.0, 1.0};
    const std::vector<double> x2{-2.0, 0.5};
    CHECK(MarginalEmpiricalValue(kLinear12, x1, data).value(Coalition::empty(2)) ==
          MarginalEmpiricalValue(kLinear12, x2, data).value(Coalition::empty(2)));
    CHECK(MarginalGaussianValue(kLinear12, x1, source).value(Coalition::empty(2)) ==
          MarginalGaussianValue(kLinear12, x2, source).value(Coalition::empty(2)));
    CHECK(ConditionalGaussianClosedValue(kLinear12, x1, source)
              .value(Coalition::empty(2)) ==
          ConditionalGaussianClosedValue(kLinear12, x2, source)
              .value(Coalition::empty(2)));
    CHECK(ConditionalGaussianMcValue(kLinear12, x1, source, 500, 4)
              .value(Coalition::empty(2)) ==
          ConditionalGaussianMcValue(kLinear12, x2, source, 500, 4)
              .value(Coalition::empty(2)));
    CHECK(ConditionalEmpiricalValue(kLinear12, x1, data, 0.1)
              .value(Coalition::empty(2)) ==
          ConditionalEmpiricalValue(kLinear12, x2, data, 0.1)
              .value(Coalition::empty(2)));
}

TEST_CASE("every backend satisfies efficiency under exact attribution") {
    for (auto& v : all_backends(0.6, 123)) {
        const AttributionResult r = shapley_exact(*v);
        CHECK(std::abs(r.efficiency_residual) <= 1e-9);
    }
}

TEST_CASE("exact attribution over a sampling backend is thread-stable") {
    const GaussianDistribution source = GaussianDistribution::standardized_pair(0.3);
    const ModelFunction model(InteractionModel{0.0, {1.0, -0.5}, {{0, 1, 0.4}}});
    par::set_thread_limit(1);
    const AttributionResult a = shapley_exact(
        ConditionalGaussianMcValue(model, {1.0, 1.0}, source, 2000, 13));
    par::set_thread_limit(4);
    const AttributionResult b = shapley_exact(
        ConditionalGaussianMcValue(model, {1.0, 1.0}, source, 2000, 13));
    par::set_thread_limit(0);
    CHECK(a.phi0 == b.phi0);
    for (int j = 0; j < 2; ++j) CHECK(a.phi[j] == b.phi[j]);
}

TEST_CASE("single-feature attribution is the prediction minus the base value") {
    const ModelFunction model(LinearModel{1.0, {2.0}});
    RowMatrix rows(5, 1);
    rows << -1.0, 0.5, 2.0, -0.25, 0.75;
    MarginalEmpiricalValue v(model, {3.0}, TabularDataset(rows));
    const AttributionResult r = shapley_exact(v);
    CHECK(r.phi[0] == v.value(Coalition::full(1)) - v.value(Coalition::empty(1)));
    CHECK(r.phi0 == v.value(Coalition::empty(1)));
}

TEST_CASE("monte carlo and empirical conditionals agree for a nonlinear model") {
    const double rho = 0.5;
    const GaussianDistribution source = GaussianDistribution::standardized_pair(rho);
    const ModelFunction model(InteractionModel{0.2, {1.0, -1.5}, {{0, 1, 0.7}}});
    const std::vector<double> x_star{0.8, -0.3};
    const TabularDataset data(gaussian_sample(source, 200000, 55));

    ConditionalGaussianMcValue mc(model, x_star, source, 100000, 56);
    ConditionalEmpiricalValue emp(model, x_star, data, 0.05);
    for (const Coalition s : {Coalition::of({0}, 2), Coalition::of({1}, 2)}) {
        const McValue a = mc.evaluate(s);
        const MatchedValue b = emp.evaluate(s);
        // Matching-band bias is bounded by the band times the model's
        // sensitivity to the conditioned coordinate.
        const double band_bias = 0.05 * (1.5 + 0.7 * 1.0 + 1.0);
        const double tol =
            3.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error) +
            band_bias;
        CHECK(std::abs(a.value - b.value) <= tol);
    }
}

TEST_CASE("spec factory validates sources and dimensions") {
    ValueFunctionSpec spec{Backend::marginal_empirical,
                           kLinear12,
                           {1.0, 1.0},
                           std::nullopt,
                           std::nullopt,
                           1000,
                           0,
                           0.1,
                           false};
    CHECK_THROWS_AS(make_value_function(spec), std::invalid_argument);

    spec.gaussian = GaussianDistribution::standardized_pair(0.3);
    spec.backend = Backend::conditional_gaussian_closed;
    const auto v = make_value_function(spec);
    CHECK(v->dim() == 2);
    CHECK(v->value(Coalition::full(2)) == 3.0);

    ValueFunctionSpec bad_dim{Backend::marginal_gaussian,
                              kLinear12,
                              {1.0, 1.0, 1.0},
                              std::nullopt,
                              GaussianDistribution::standardized_pair(0.3),
                              1000,
                              0,
                              0.1,
                              false};
    CHECK_THROWS_AS(make_value_function(bad_dim), std::invalid_argument);

    CHECK(backend_from_name("conditional_gaussian_mc") ==
          Backend::conditional_gaussian_mc);
    CHECK(backend_name(Backend::conditional_empirical) == "conditional_empirical");
    CHECK_THROWS_AS(backend_from_name("nope"), std::invalid_argument);
}
