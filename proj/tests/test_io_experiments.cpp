#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

#include "shapcause/errors.hpp"
#include "shapcause/experiments.hpp"
#include "shapcause/io.hpp"
#include "shapcause/shapley.hpp"

using namespace shapcause;
using nlohmann::json;

TEST_CASE("model json parsing and round trip") {
    const json linear = {{"schema", 1},
                         {"kind", "linear"},
                         {"beta0", 0.5},
                         {"beta", {1.0, -2.25}}};
    const ModelFunction m = model_from_json(linear, "inline");
    CHECK(m.kind() == ModelKind::linear);
    CHECK(m.evaluate(std::vector<double>{1.0, 1.0}) == doctest::Approx(-0.75));
    CHECK(model_from_json(model_to_json(m), "roundtrip")
              .evaluate(std::vector<double>{0.3, 0.7}) ==
          m.evaluate(std::vector<double>{0.3, 0.7}));

    const json interaction = {{"kind", "interaction"},
                              {"beta0", 0.0},
                              {"beta", {1.0, 1.0}},
                              {"gamma", {{0, 1, 0.5}}}};
    const ModelFunction im = model_from_json(interaction, "inline");
    CHECK(im.evaluate(std::vector<double>{2.0, 3.0}) == doctest::Approx(8.0));

    const json lookup = {{"kind", "lookup"},
                         {"points", {{0.0, 0.0, 1.0}, {1.0, 1.0, 2.0}}}};
    const ModelFunction lm = model_from_json(lookup, "inline");
    CHECK(lm.dim() == 2);
    CHECK(lm.evaluate(std::vector<double>{0.9, 0.9}) == 2.0);

    CHECK_THROWS_WITH_AS(model_from_json(json{{"beta0", 1.0}}, "m.json"),
                         doctest::Contains("m.json"), InputError);
    CHECK_THROWS_AS(model_from_json(json{{"kind", "banana"}}, "x"), InputError);
    CHECK_THROWS_AS(
        model_from_json(json{{"schema", 2}, {"kind", "linear"}, {"beta0", 0.0}, {"beta", {1.0}}},
                        "x"),
        InputError);
}

TEST_CASE("gaussian and scm json round trips") {
    const GaussianDistribution g = GaussianDistribution::standardized_pair(0.35);
    const GaussianDistribution g2 = gaussian_from_json(gaussian_to_json(g), "rt");
    CHECK((g2.covariance() - g.covariance()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g2.mean() - g.mean()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(
        gaussian_from_json(json{{"mu", {0.0, 0.0}}, {"sigma", {{1.0}}}}, "bad"),
        InputError);

    const Scm scm = Scm::standardized_chain(0.5);
    const Scm scm2 = scm_from_json(scm_to_json(scm), "rt");
    const auto d1 = scm.observational_distribution();
    const auto d2 = scm2.observational_distribution();
    CHECK((d1.covariance() - d2.covariance()).cwiseAbs().maxCoeff() == 0.0);

    const json bad_scm = {{"nodes", 2},
                          {"edges", {{0, 1}}},
                          {"coef", json::object()},
                          {"noise_sd", {1.0, 1.0}},
                          {"root_mean", {0.0, 0.0}}};
    CHECK_THROWS_AS(scm_from_json(bad_scm, "bad"), InputError);
}

TEST_CASE("attribution serialization round trips exactly") {
    AttributionResult r;
    r.phi0 = 1.0 / 3.0;
    r.phi = {0.1 + 0.2, -1.0 / 7.0, 5e-17};
    r.efficiency_residual = -3.2e-16;
    r.std_errors = std::vector<double>{0.25, 1.0 / 9.0, 0.0};
    r.method = Method::permutation_sampling;
    r.seed = 123456789;
    const std::vector<std::string> names{"age", "income", "score"};

    SUBCASE("json") {
        std::vector<std::string> names_back;
        const AttributionResult rt =
            attribution_from_json(attribution_to_json(r, names), &names_back);
        CHECK(rt.phi0 == r.phi0);
        CHECK(rt.phi == r.phi);
        CHECK(rt.efficiency_residual == r.efficiency_residual);
        CHECK(rt.std_errors == r.std_errors);
        CHECK(rt.method == r.method);
        CHECK(rt.seed == r.seed);
        CHECK(names_back == names);
    }
    SUBCASE("csv") {
        std::vector<std::string> names_back;
        const std::string text = attribution_to_csv(r, names);
        const AttributionResult rt = attribution_from_csv(text, &names_back);
        CHECK(rt.phi0 == r.phi0);
        CHECK(rt.phi == r.phi);
        CHECK(rt.efficiency_residual == r.efficiency_residual);
        CHECK(rt.std_errors == r.std_errors);
        CHECK(rt.method == r.method);
        CHECK(rt.seed == r.seed);
        CHECK(names_back == names);
    }
    SUBCASE("csv without optional fields") {
        AttributionResult bare;
        bare.phi0 = 0.5;
        bare.phi = {1.25, 1.75};
        bare.efficiency_residual = 0.0;
        const AttributionResult rt =
            attribution_from_csv(attribution_to_csv(bare, {}), nullptr);
        CHECK(rt.phi == bare.phi);
        CHECK(!rt.std_errors.has_value());
        CHECK(!rt.seed.has_value());
        CHECK(rt.method == Method::exact);
    }
}

TEST_CASE("closed form for the correlated pair") {
    SUBCASE("worked example") {
        const auto cf = correlated_pair_closed_form(0.0, 1.0, 2.0, 0.5, 1.0, 1.0);
        CHECK(cf.phi0 == 0.0);
        CHECK(cf.phi1 == doctest::Approx(1.25).epsilon(1e-15));
        CHECK(cf.phi2 == doctest::Approx(1.75).epsilon(1e-15));
    }
    SUBCASE("uncorrelated features split additively") {
        const auto cf = correlated_pair_closed_form(2.0, -1.5, 0.75, 0.0, 2.0, -2.0);
        CHECK(cf.phi1 == -3.0);
        CHECK(cf.phi2 == -1.5);
    }
    SUBCASE("a zero-coefficient feature still receives credit when correlated") {
        const auto cf = correlated_pair_closed_form(0.0, 0.0, 1.0, 0.8, 2.0, 0.0);
        CHECK(cf.phi1 == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(cf.phi2 == doctest::Approx(-0.8).epsilon(1e-15));
    }
    SUBCASE("rejects degenerate correlation") {
        CHECK_THROWS_AS(correlated_pair_closed_form(0, 1, 1, 1.0, 1, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("experiment dispatch and reports") {
    CHECK_THROWS_AS(run_experiment("nope", {}, 0), std::invalid_argument);
    CHECK(experiment_names().size() == 7);

    ExperimentParams params;
    params.rho_grid = {0.5};
    const ExperimentReport report = run_experiment("eq36", params, 0);
    CHECK(report.name == "eq36");
    CHECK(report.all_pass());
    CHECK(report.rows.size() == 24);  // 1 rho x 4 beta x 3 explicands x 2 features
    for (const auto& row : report.rows) {
        CHECK(std::isfinite(row.expected));
        CHECK(std::isfinite(row.computed));
        CHECK(row.tolerance > 0.0);
    }
    CHECK(report.wall_seconds >= 0.0);

    const json doc = report_to_json(report);
    CHECK(doc.at("pass").get<bool>());
    CHECK(doc.at("rows").size() == 24);

    const std::string csv = report_to_csv(report);
    CHECK(csv.find("label,expected,computed") != std::string::npos);

    std::ostringstream out;
    print_report(report, out);
    CHECK(out.str().find("PASS") != std::string::npos);
}

TEST_CASE("experiments are bit-identical at any thread count") {
    ExperimentParams params;
    params.rho_grid = {-0.5, 0.5};
    params.samples = 20000;
    par::set_thread_limit(1);
    const ExperimentReport serial = run_experiment("do-equivalence", params, 3);
    par::set_thread_limit(4);
    const ExperimentReport parallel = run_experiment("do-equivalence", params, 3);
    par::set_thread_limit(0);
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].computed == parallel.rows[i].computed);
        CHECK(serial.rows[i].expected == parallel.rows[i].expected);
        CHECK(serial.rows[i].tolerance == parallel.rows[i].tolerance);
    }
}

TEST_CASE("gaussian json accepts an explicit ridge") {
    // Exactly singular without the ridge.
    const json doc = {{"mu", {0.0, 0.0}},
                      {"sigma", {{1.0, 1.0}, {1.0, 1.0}}},
                      {"ridge", 0.05}};
    const GaussianDistribution g = gaussian_from_json(doc, "ridge");
    CHECK(g.covariance()(0, 0) == doctest::Approx(1.05));
    CHECK(g.covariance()(0, 1) == doctest::Approx(1.0));

    json no_ridge = doc;
    no_ridge.erase("ridge");
    CHECK_THROWS_AS(gaussian_from_json(no_ridge, "singular"), LinearAlgebraError);
}

TEST_CASE("per-row attribution matches the enumerated marginal attribution") {
    const ModelFunction model(InteractionModel{0.25, {1.0, -2.0}, {{0, 1, 0.6}}});
    const TabularDataset data(
        gaussian_sample(GaussianDistribution::standardized_pair(0.3), 5000, 12));
    const std::vector<double> x_star{1.5, -0.5};
    MarginalEmpiricalValue backend(model, x_star, data);
    const AttributionResult enumerated = shapley_exact(backend);
    for (int j = 0; j < 2; ++j) {
        const par::MeanVar direct =
            per_row_marginal_attribution(model, data, x_star, j);
        CHECK(direct.mean == doctest::Approx(enumerated.phi[j]).epsilon(1e-10));
        CHECK(direct.std_error() > 0.0);
    }
}

TEST_CASE("attribution error propagation sanity") {
    // One feature: phi = v({0}) - v(empty), so the independent-error case is
    // the root of the summed squares.
    const std::vector<double> se{0.3, 0.4};
    CHECK(propagate_attribution_se(0, 1, se, true) == doctest::Approx(0.5));
    CHECK(propagate_attribution_se(0, 1, se, false) == doctest::Approx(0.7));
    CHECK_THROWS_AS(propagate_attribution_se(0, 2, se, true), std::invalid_argument);
}

TEST_CASE("eval-sample emission") {
    const TabularDataset data(
        gaussian_sample(GaussianDistribution::standardized_pair(0.9), 400, 21));
    const std::vector<double> explicand{2.0, 2.0};
    const EvalSampleEmission emission =
        emit_eval_samples(data, explicand, Coalition::of({0}, 2));
    CHECK(emission.eval_rows.rows() == 400);
    CHECK(emission.eval_rows.col(0).minCoeff() == 2.0);
    CHECK(emission.eval_rows.col(0).maxCoeff() == 2.0);
    CHECK(emission.report.flagged.size() == 400);

    const std::string csv = eval_samples_to_csv(data, emission);
    CHECK(csv.rfind("x0,x1,mahalanobis_sq,flagged\n", 0) == 0);
    // Header plus one line per row.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 401);
}
