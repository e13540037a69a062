#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "shapcause/attribution.hpp"
#include "shapcause/causal.hpp"
#include "shapcause/gaussian.hpp"
#include "shapcause/model.hpp"

namespace shapcause {

// Model document, schema 1:
//   {"schema":1,"kind":"linear","beta0":r,"beta":[...]}
//   {"schema":1,"kind":"interaction","beta0":r,"beta":[...],"gamma":[[i,j,r],...]}
//   {"schema":1,"kind":"lookup","points":[[x...,y],...]}
ModelFunction model_from_json(const nlohmann::json& doc, const std::string& origin);
ModelFunction model_from_file(const std::string& path);
nlohmann::json model_to_json(const ModelFunction& model);

// Gaussian source document: {"mu":[...],"sigma":[[...],...]}
GaussianDistribution gaussian_from_json(const nlohmann::json& doc,
                                        const std::string& origin);
GaussianDistribution gaussian_from_file(const std::string& path);
nlohmann::json gaussian_to_json(const GaussianDistribution& dist);

// SCM document:
//   {"nodes":m,"edges":[[p,c],...],"coef":{"child":[[parent,w],...],...},
//    "noise_sd":[...],"root_mean":[...]}
Scm scm_from_json(const nlohmann::json& doc, const std::string& origin);
Scm scm_from_file(const std::string& path);
nlohmann::json scm_to_json(const Scm& scm);

// Attribution serialization. CSV columns are
//   feature_index,feature_name,phi,std_error
// followed by footer rows phi0, efficiency_residual, method and seed.
// Numbers are printed with 17 significant digits so parsing recovers every
// field exactly.
nlohmann::json attribution_to_json(const AttributionResult& result,
                                   const std::vector<std::string>& feature_names);
AttributionResult attribution_from_json(const nlohmann::json& doc,
                                        std::vector<std::string>* feature_names = nullptr);
std::string attribution_to_csv(const AttributionResult& result,
                               const std::vector<std::string>& feature_names);
AttributionResult attribution_from_csv(const std::string& text,
                                       std::vector<std::string>* feature_names = nullptr);

nlohmann::json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string format_double_exact(double x);  // shortest 17-digit round-trip form

}  // namespace shapcause
