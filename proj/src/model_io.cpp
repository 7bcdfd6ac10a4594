#include "gse/model_io.hpp"

#include "gse/errors.hpp"
#include "gse/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace gse::io {

namespace {

double number(const Json& j, const std::string& what) {
    if (!j.is_number()) throw ValidationError(what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(what + " must be finite");
    return v;
}

Vector vector_field(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ValidationError(what + " must be a non-empty array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = number(j[i], what + "[" + std::to_string(i) + "]");
    return v;
}

Matrix matrix_field(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ValidationError(what + " must be a non-empty array of rows");
    const std::size_t n = j.size();
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != n) throw ValidationError(what + " must be square");
        for (std::size_t k = 0; k < n; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                number(j[i][k], what + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
    return m;
}

std::string string_field(const Json& j, const std::string& what) {
    if (!j.is_string()) throw ValidationError(what + " must be a string");
    return j.get<std::string>();
}

void write_number(std::ostringstream& os, double v) {
    if (std::isnan(v)) { os << "null"; return; }
    if (std::isinf(v)) { os << (v > 0 ? "\"inf\"" : "\"-inf\""); return; }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

void write(std::ostringstream& os, const Json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) { os << "{}"; return; }
            os << '{' << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ',' << nl;
                first = false;
                os << pad << Json(it.key()).dump() << ':' << (indent > 0 ? " " : "");
                write(os, it.value(), indent, depth + 1);
            }
            os << nl << close << '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) { os << "[]"; return; }
            const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
            if (flat) {
                os << '[';
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) os << ", ";
                    write(os, j[i], indent, depth + 1);
                }
                os << ']';
                return;
            }
            os << '[' << nl;
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ',' << nl;
                os << pad;
                write(os, j[i], indent, depth + 1);
            }
            os << nl << close << ']';
            return;
        }
        case Json::value_t::number_float: write_number(os, j.get<double>()); return;
        default: os << j.dump(); return;
    }
}

}  // namespace

GseDistribution parse_model(const Json& j) {
    if (!j.is_object()) throw ValidationError("model must be a JSON object");
    static const std::set<std::string> known{"family", "df", "mu", "sigma", "gamma", "skew", "skew_df", "root"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ValidationError("unknown model field: " + it.key());
    for (const char* req : {"family", "mu", "sigma", "skew"})
        if (!j.contains(req)) throw ValidationError(std::string("missing model field: ") + req);

    GeneratorFamily fam;
    fam.kind = family_from_string(string_field(j["family"], "family"));
    if (fam.kind == FamilyKind::StudentT) {
        if (!j.contains("df")) throw ValidationError("family student_t requires df");
        fam.df = number(j["df"], "df");
    } else if (j.contains("df")) {
        throw ValidationError("df applies to family student_t only");
    }

    const Vector mu = vector_field(j["mu"], "mu");
    const auto n = static_cast<std::size_t>(mu.size());
    const Matrix sigma = matrix_field(j["sigma"], "sigma");
    if (static_cast<std::size_t>(sigma.rows()) != n) throw ValidationError("sigma dimension does not match mu");

    const SkewKind kind = skew_from_string(string_field(j["skew"], "skew"));
    double skew_df = 0.0;
    if (kind == SkewKind::StudentTCdf) {
        if (!j.contains("skew_df")) throw ValidationError("skew student_t_cdf requires skew_df");
        skew_df = number(j["skew_df"], "skew_df");
    } else if (j.contains("skew_df")) {
        throw ValidationError("skew_df applies to skew student_t_cdf only");
    }
    Vector gamma = Vector::Zero(static_cast<Eigen::Index>(n));
    if (j.contains("gamma")) gamma = vector_field(j["gamma"], "gamma");
    else if (kind != SkewKind::ConstantHalf) throw ValidationError("missing model field: gamma");
    if (static_cast<std::size_t>(gamma.size()) != n) throw ValidationError("gamma length does not match mu");

    RootConvention root = RootConvention::Cholesky;
    if (j.contains("root")) root = root_from_string(string_field(j["root"], "root"));

    try {
        return GseDistribution(mu, ScaleMatrix(sigma), fam, SkewFunction(kind, gamma, skew_df), root);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
}

GseDistribution load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
    }
    return parse_model(j);
}

Json model_to_json(const GseDistribution& dist) {
    Json j;
    j["family"] = to_string(dist.family().kind);
    if (dist.family().kind == FamilyKind::StudentT) j["df"] = dist.family().df;
    j["mu"] = to_json(dist.mu());
    j["sigma"] = to_json(dist.sigma().matrix());
    j["gamma"] = to_json(dist.skew().gamma());
    j["skew"] = to_string(dist.skew().kind());
    if (dist.skew().kind() == SkewKind::StudentTCdf) j["skew_df"] = dist.skew().df();
    j["root"] = to_string(dist.root_convention());
    return j;
}

Vector parse_list(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ValidationError("empty entry in list: " + text);
        const std::string tok = item.substr(b, e - b + 1);
        if (tok == "inf" || tok == "+inf") { vals.push_back(std::numeric_limits<double>::infinity()); continue; }
        if (tok == "-inf") { vals.push_back(-std::numeric_limits<double>::infinity()); continue; }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw ValidationError("not a number: " + tok);
        }
        if (used != tok.size() || !std::isfinite(v)) throw ValidationError("not a number: " + tok);
        vals.push_back(v);
    }
    if (vals.empty()) throw ValidationError("empty list");
    Vector out(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) out(static_cast<Eigen::Index>(i)) = vals[i];
    return out;
}

Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json to_json(const Matrix& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        a.push_back(row);
    }
    return a;
}

Json to_json(const IntegrationPlan& plan) {
    Json j;
    j["method"] = to_string(plan.method);
    j["rel_tol"] = plan.rel_tol;
    j["abs_tol"] = plan.abs_tol;
    j["node_budget"] = plan.node_budget;
    j["seed"] = plan.seed;
    return j;
}

Json to_json(const MomentDiagnostics& d) {
    Json j;
    j["integrals"] = d.integrals;
    j["nodes"] = d.nodes;
    j["max_error"] = d.max_error;
    j["methods"] = d.methods;
    j["warnings"] = d.warnings;
    j["kernels"] = kernels::active().name;
    return j;
}

Json to_json(const MomentReport& r) {
    Json j;
    j["std_lower"] = to_json(r.std_rect.lower());
    j["std_upper"] = to_json(r.std_rect.upper());
    j["prob"] = r.prob;
    j["delta"] = to_json(r.delta);
    j["omega"] = to_json(r.omega);
    j["mdte"] = to_json(r.mean);
    j["second_moment"] = to_json(r.second_moment);
    j["mdtcov"] = to_json(r.mdtcov);
    return j;
}

Json to_json(const TailReport& t, bool with_cov) {
    Json j;
    j["q"] = to_json(t.q);
    j["var"] = to_json(t.var);
    j["xi_q"] = to_json(t.std_rect.lower());
    j["prob"] = t.prob;
    j["delta"] = to_json(t.delta);
    j["mtce"] = to_json(t.mtce);
    if (with_cov) {
        j["omega"] = to_json(t.omega);
        j["mtcov"] = to_json(t.mtcov);
    }
    return j;
}

Json to_json(const OracleEstimate& e) {
    Json j;
    j["draws"] = e.draws;
    j["hits"] = e.hits;
    j["accepted_fraction"] = e.accepted_fraction;
    j["prob"] = e.prob;
    j["prob_se"] = e.prob_se;
    j["delta"] = to_json(e.delta);
    j["delta_se"] = to_json(e.delta_se);
    j["omega"] = to_json(e.omega);
    j["omega_se"] = to_json(e.omega_se);
    j["mdte"] = to_json(e.mean);
    j["mdte_se"] = to_json(e.mean_se);
    j["mdtcov"] = to_json(e.cov);
    j["mdtcov_se"] = to_json(e.cov_se);
    return j;
}

std::string dump(const Json& j, int indent) {
    std::ostringstream os;
    write(os, j, indent, 0);
    return os.str();
}

}  // namespace gse::io
