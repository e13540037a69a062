#include "shapcause/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "shapcause/errors.hpp"

namespace shapcause {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw InputError(origin + ": " + what);
}

double require_number(const json& doc, const char* key, const std::string& origin) {
    if (!doc.contains(key)) fail(origin, std::string("missing field '") + key + "'");
    const auto& v = doc.at(key);
    if (!v.is_number()) fail(origin, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> require_vector(const json& doc, const char* key,
                                   const std::string& origin) {
    if (!doc.contains(key)) fail(origin, std::string("missing field '") + key + "'");
    const auto& v = doc.at(key);
    if (!v.is_array()) fail(origin, std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number())
            fail(origin, std::string("field '") + key + "' must contain numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

void check_schema(const json& doc, const std::string& origin) {
    if (doc.contains("schema") && doc.at("schema") != 1)
        fail(origin, "unsupported schema version");
}

}  // namespace

std::string format_double_exact(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw InputError(path + ": JSON parse error: " + e.what());
    }
    return doc;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << text;
}

// ---------------------------------------------------------------------------
// models

ModelFunction model_from_json(const json& doc, const std::string& origin) {
    if (!doc.is_object()) fail(origin, "model document must be a JSON object");
    check_schema(doc, origin);
    if (!doc.contains("kind")) fail(origin, "missing field 'kind'");
    const std::string kind = doc.at("kind").get<std::string>();

    if (kind == "linear") {
        LinearModel m;
        m.beta0 = require_number(doc, "beta0", origin);
        m.beta = require_vector(doc, "beta", origin);
        return ModelFunction(std::move(m));
    }
    if (kind == "interaction") {
        InteractionModel m;
        m.beta0 = require_number(doc, "beta0", origin);
        m.beta = require_vector(doc, "beta", origin);
        if (doc.contains("gamma")) {
            const auto& g = doc.at("gamma");
            if (!g.is_array()) fail(origin, "field 'gamma' must be an array");
            for (const auto& t : g) {
                if (!t.is_array() || t.size() != 3)
                    fail(origin, "field 'gamma' entries must be [i, j, weight]");
                m.gamma.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
            }
        }
        return ModelFunction(std::move(m));
    }
    if (kind == "lookup") {
        if (!doc.contains("points")) fail(origin, "missing field 'points'");
        const auto& pts = doc.at("points");
        if (!pts.is_array() || pts.empty())
            fail(origin, "field 'points' must be a non-empty array");
        const std::size_t width = pts[0].size();
        if (width < 2) fail(origin, "lookup points need at least one feature and a value");
        LookupModel m;
        m.points.resize(static_cast<Eigen::Index>(pts.size()),
                        static_cast<Eigen::Index>(width - 1));
        for (std::size_t r = 0; r < pts.size(); ++r) {
            const auto& row = pts[r];
            if (!row.is_array() || row.size() != width)
                fail(origin, "lookup points must all have the same width");
            for (std::size_t c = 0; c + 1 < width; ++c)
                m.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    row[c].get<double>();
            m.values.push_back(row[width - 1].get<double>());
        }
        return ModelFunction(std::move(m));
    }
    fail(origin, "unknown model kind '" + kind + "'");
}

ModelFunction model_from_file(const std::string& path) {
    return model_from_json(load_json_file(path), path);
}

json model_to_json(const ModelFunction& model) {
    json doc;
    doc["schema"] = 1;
    doc["kind"] = model_kind_name(model.kind());
    if (const LinearModel* m = model.linear()) {
        doc["beta0"] = m->beta0;
        doc["beta"] = m->beta;
    } else if (const InteractionModel* m = model.interaction()) {
        doc["beta0"] = m->beta0;
        doc["beta"] = m->beta;
        auto gamma = json::array();
        for (const auto& t : m->gamma) gamma.push_back({t.i, t.j, t.weight});
        doc["gamma"] = gamma;
    } else {
        // lookup models round-trip through the CLI only as inputs
        throw std::invalid_argument("model_to_json: lookup models are not serialized");
    }
    return doc;
}

// ---------------------------------------------------------------------------
// gaussian

GaussianDistribution gaussian_from_json(const json& doc, const std::string& origin) {
    if (!doc.is_object()) fail(origin, "gaussian document must be a JSON object");
    check_schema(doc, origin);
    const std::vector<double> mu = require_vector(doc, "mu", origin);
    if (!doc.contains("sigma")) fail(origin, "missing field 'sigma'");
    const auto& s = doc.at("sigma");
    if (!s.is_array() || s.size() != mu.size())
        fail(origin, "field 'sigma' must be a square matrix matching 'mu'");
    Eigen::MatrixXd sigma(mu.size(), mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!s[i].is_array() || s[i].size() != mu.size())
            fail(origin, "field 'sigma' must be a square matrix matching 'mu'");
        for (std::size_t j = 0; j < mu.size(); ++j)
            sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                s[i][j].get<double>();
    }
    Eigen::VectorXd mean(static_cast<Eigen::Index>(mu.size()));
    for (std::size_t i = 0; i < mu.size(); ++i)
        mean(static_cast<Eigen::Index>(i)) = mu[i];
    if (doc.contains("ridge")) {
        // Explicit opt-in; a near-singular covariance without it stays an error.
        return GaussianDistribution::with_ridge(std::move(mean), std::move(sigma),
                                                require_number(doc, "ridge", origin));
    }
    return GaussianDistribution(std::move(mean), std::move(sigma));
}

GaussianDistribution gaussian_from_file(const std::string& path) {
    return gaussian_from_json(load_json_file(path), path);
}

json gaussian_to_json(const GaussianDistribution& dist) {
    json doc;
    doc["mu"] = std::vector<double>(dist.mean().data(),
                                    dist.mean().data() + dist.mean().size());
    auto sigma = json::array();
    for (Eigen::Index i = 0; i < dist.dim(); ++i) {
        auto row = json::array();
        for (Eigen::Index j = 0; j < dist.dim(); ++j) row.push_back(dist.covariance()(i, j));
        sigma.push_back(row);
    }
    doc["sigma"] = sigma;
    return doc;
}

// ---------------------------------------------------------------------------
// scm

Scm scm_from_json(const json& doc, const std::string& origin) {
    if (!doc.is_object()) fail(origin, "scm document must be a JSON object");
    check_schema(doc, origin);
    if (!doc.contains("nodes") || !doc.at("nodes").is_number_integer())
        fail(origin, "missing integer field 'nodes'");
    const int m = doc.at("nodes").get<int>();

    std::vector<std::pair<int, int>> edges;
    if (doc.contains("edges")) {
        for (const auto& e : doc.at("edges")) {
            if (!e.is_array() || e.size() != 2)
                fail(origin, "field 'edges' entries must be [parent, child]");
            edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    }

    std::vector<std::vector<Scm::ParentCoefficient>> coef(
        static_cast<std::size_t>(std::max(m, 0)));
    if (doc.contains("coef")) {
        const auto& c = doc.at("coef");
        if (!c.is_object()) fail(origin, "field 'coef' must be an object keyed by child");
        for (const auto& [key, entries] : c.items()) {
            int child = 0;
            try {
                child = std::stoi(key);
            } catch (...) {
                fail(origin, "field 'coef' keys must be node indices, got '" + key + "'");
            }
            if (child < 0 || child >= m) fail(origin, "coef child index out of range");
            for (const auto& pw : entries) {
                if (!pw.is_array() || pw.size() != 2)
                    fail(origin, "coef entries must be [parent, weight]");
                coef[static_cast<std::size_t>(child)].push_back(
                    {pw[0].get<int>(), pw[1].get<double>()});
            }
        }
    }

    const std::vector<double> noise_sd = require_vector(doc, "noise_sd", origin);
    const std::vector<double> root_mean = require_vector(doc, "root_mean", origin);
    try {
        return Scm(CausalDag(m, std::move(edges)), std::move(coef), noise_sd, root_mean);
    } catch (const std::invalid_argument& e) {
        fail(origin, e.what());
    }
}

Scm scm_from_file(const std::string& path) {
    return scm_from_json(load_json_file(path), path);
}

json scm_to_json(const Scm& scm) {
    json doc;
    doc["nodes"] = scm.feature_count();
    auto edges = json::array();
    for (auto [p, c] : scm.dag().edges()) edges.push_back({p, c});
    doc["edges"] = edges;
    json coef = json::object();
    for (int j = 0; j < scm.feature_count(); ++j) {
        const auto& pcs = scm.coefficients()[static_cast<std::size_t>(j)];
        if (pcs.empty()) continue;
        auto entries = json::array();
        for (const auto& pc : pcs) entries.push_back({pc.parent, pc.weight});
        coef[std::to_string(j)] = entries;
    }
    doc["coef"] = coef;
    doc["noise_sd"] = scm.noise_sd();
    doc["root_mean"] = scm.node_means();
    return doc;
}

// ---------------------------------------------------------------------------
// attribution

json attribution_to_json(const AttributionResult& result,
                         const std::vector<std::string>& feature_names) {
    json doc;
    doc["phi0"] = result.phi0;
    doc["phi"] = result.phi;
    doc["efficiency_residual"] = result.efficiency_residual;
    doc["method"] = method_name(result.method);
    if (result.std_errors.has_value()) doc["std_errors"] = *result.std_errors;
    if (result.seed.has_value()) doc["seed"] = *result.seed;
    if (!feature_names.empty()) doc["feature_names"] = feature_names;
    return doc;
}

AttributionResult attribution_from_json(const json& doc,
                                        std::vector<std::string>* feature_names) {
    const std::string origin = "attribution json";
    AttributionResult r;
    r.phi0 = require_number(doc, "phi0", origin);
    r.phi = require_vector(doc, "phi", origin);
    r.efficiency_residual = require_number(doc, "efficiency_residual", origin);
    const std::string method = doc.value("method", "exact");
    if (method == "exact")
        r.method = Method::exact;
    else if (method == "permutation_sampling")
        r.method = Method::permutation_sampling;
    else
        fail(origin, "unknown method '" + method + "'");
    if (doc.contains("std_errors")) r.std_errors = require_vector(doc, "std_errors", origin);
    if (doc.contains("seed")) r.seed = doc.at("seed").get<std::uint64_t>();
    if (feature_names != nullptr && doc.contains("feature_names"))
        *feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    return r;
}

std::string attribution_to_csv(const AttributionResult& result,
                               const std::vector<std::string>& feature_names) {
    std::ostringstream out;
    out << "feature_index,feature_name,phi,std_error\n";
    for (int j = 0; j < result.dim(); ++j) {
        const auto ju = static_cast<std::size_t>(j);
        out << j << ",";
        out << (ju < feature_names.size() ? feature_names[ju] : "x" + std::to_string(j));
        out << "," << format_double_exact(result.phi[ju]) << ",";
        if (result.std_errors.has_value())
            out << format_double_exact((*result.std_errors)[ju]);
        out << "\n";
    }
    out << "phi0,," << format_double_exact(result.phi0) << ",\n";
    out << "efficiency_residual,," << format_double_exact(result.efficiency_residual)
        << ",\n";
    out << "method,," << method_name(result.method) << ",\n";
    out << "seed,,";
    if (result.seed.has_value()) out << *result.seed;
    out << ",\n";
    return out.str();
}

AttributionResult attribution_from_csv(const std::string& text,
                                       std::vector<std::string>* feature_names) {
    const std::string origin = "attribution csv";
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("feature_index", 0) != 0)
        fail(origin, "missing header row");

    AttributionResult r;
    std::vector<std::string> names;
    bool have_phi0 = false, have_residual = false;
    std::optional<std::vector<double>> std_errors;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        cells.resize(4);
        if (cells[0] == "phi0") {
            r.phi0 = std::strtod(cells[2].c_str(), nullptr);
            have_phi0 = true;
        } else if (cells[0] == "efficiency_residual") {
            r.efficiency_residual = std::strtod(cells[2].c_str(), nullptr);
            have_residual = true;
        } else if (cells[0] == "method") {
            if (cells[2] == "permutation_sampling")
                r.method = Method::permutation_sampling;
            else if (cells[2] == "exact")
                r.method = Method::exact;
            else
                fail(origin, "unknown method '" + cells[2] + "'");
        } else if (cells[0] == "seed") {
            if (!cells[2].empty()) r.seed = std::strtoull(cells[2].c_str(), nullptr, 10);
        } else {
            r.phi.push_back(std::strtod(cells[2].c_str(), nullptr));
            names.push_back(cells[1]);
            if (!cells[3].empty()) {
                if (!std_errors.has_value()) std_errors.emplace();
                std_errors->push_back(std::strtod(cells[3].c_str(), nullptr));
            }
        }
    }
    if (!have_phi0 || !have_residual) fail(origin, "missing phi0 or efficiency_residual row");
    if (std_errors.has_value() && std_errors->size() != r.phi.size())
        fail(origin, "std_error column must be filled for all features or none");
    r.std_errors = std::move(std_errors);
    if (feature_names != nullptr) *feature_names = std::move(names);
    return r;
}

}  // namespace shapcause
