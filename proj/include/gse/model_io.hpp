#pragma once

#include "gse/distribution.hpp"
#include "gse/moments.hpp"
#include "gse/oracle.hpp"
#include "gse/risk.hpp"

#include "json.hpp"

#include <string>

namespace gse::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

GseDistribution parse_model(const Json& j);
GseDistribution load_model(const std::string& path);

// Fully resolved model with defaults filled.
Json model_to_json(const GseDistribution& dist);

// "1.5,-inf,2" -> vector; "inf"/"-inf" allowed.
Vector parse_list(const std::string& text);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const IntegrationPlan& plan);
Json to_json(const MomentDiagnostics& d);
Json to_json(const MomentReport& r);
Json to_json(const TailReport& t, bool with_cov);
Json to_json(const OracleEstimate& e);

// Numbers with 17 significant digits, ±inf as strings, NaN as null.
std::string dump(const Json& j, int indent = 2);

}  // namespace gse::io
