#include "gse/errors.hpp"
#include "gse/model_io.hpp"
#include "gse/moments.hpp"
#include "gse/oracle.hpp"
#include "gse/risk.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>

using namespace gse;
using io::Json;

namespace {

struct Options {
    std::string model;
    std::string lower, upper, q;
    std::string method = "auto";
    std::string measure = "mtce";
    double tol = 1e-5;
    std::uint64_t seed = 0;
    std::size_t samples = 1000000;
    std::size_t count = 1000;
};

IntegrationPlan make_plan(const Options& o) {
    IntegrationPlan p;
    p.method = quad_method_from_string(o.method);
    p.rel_tol = o.tol;
    p.seed = o.seed;
    validate_plan(p);
    return p;
}

Rectangle make_rect(const Options& o, std::size_t n) {
    const Vector lo = io::parse_list(o.lower);
    const Vector up = io::parse_list(o.upper);
    if (static_cast<std::size_t>(lo.size()) != n || static_cast<std::size_t>(up.size()) != n)
        throw ValidationError("bounds length does not match model dimension");
    return Rectangle(lo, up);
}

Json envelope(const char* command, const GseDistribution& dist) {
    Json j;
    j["schema_version"] = io::kSchemaVersion;
    j["command"] = command;
    j["model"] = io::model_to_json(dist);
    return j;
}

void emit(const Json& j) {
    const std::string text = io::dump(j) + "\n";
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
}

int cmd_moments(const Options& o) {
    const auto dist = io::load_model(o.model);
    const auto plan = make_plan(o);
    const Rectangle rect = make_rect(o, dist.dim());
    const auto rep = moment_report(dist, rect, plan);
    Json j = envelope("moments", dist);
    j["request"] = {{"lower", io::to_json(rect.lower())}, {"upper", io::to_json(rect.upper())},
                    {"plan", io::to_json(plan)}};
    j["results"] = io::to_json(rep);
    j["diagnostics"] = io::to_json(rep.diag);
    emit(j);
    return 0;
}

int cmd_risk(const Options& o) {
    const auto dist = io::load_model(o.model);
    const auto plan = make_plan(o);
    if (o.measure != "mtce" && o.measure != "mtcov" && o.measure != "var")
        throw ValidationError("measure must be one of mtce, mtcov, var");
    const Vector q = io::parse_list(o.q);
    if (static_cast<std::size_t>(q.size()) != dist.dim())
        throw ValidationError("quantile vector length does not match model dimension");
    validate_quantiles(q);
    Json j = envelope("risk", dist);
    j["request"] = {{"q", io::to_json(q)}, {"measure", o.measure}, {"plan", io::to_json(plan)}};
    if (o.measure == "var") {
        j["results"] = {{"q", io::to_json(q)}, {"var", io::to_json(var_vector(dist, q, plan))}};
        j["diagnostics"] = io::to_json(MomentDiagnostics{});
    } else {
        const auto t = tail_report(dist, q, plan, o.measure == "mtcov");
        j["results"] = io::to_json(t, o.measure == "mtcov");
        j["diagnostics"] = io::to_json(t.diag);
    }
    emit(j);
    return 0;
}

struct ZTable {
    Json out = Json::object();
    double max_abs = 0.0;

    static double z(double closed, double est, double se) {
        const double d = closed - est;
        if (se > 0.0) return d / se;
        return std::abs(d) <= 1e-12 * (1.0 + std::abs(closed)) ? 0.0 : std::numeric_limits<double>::infinity();
    }
    void scalar(const char* name, double c, double e, double se) {
        const double v = z(c, e, se);
        max_abs = std::max(max_abs, std::abs(v));
        out[name] = v;
    }
    void vector(const char* name, const Vector& c, const Vector& e, const Vector& se) {
        Vector v(c.size());
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            v(i) = z(c(i), e(i), se(i));
            max_abs = std::max(max_abs, std::abs(v(i)));
        }
        out[name] = io::to_json(v);
    }
    void matrix(const char* name, const Matrix& c, const Matrix& e, const Matrix& se) {
        Matrix v(c.rows(), c.cols());
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            for (Eigen::Index k = 0; k < c.cols(); ++k) {
                v(i, k) = z(c(i, k), e(i, k), se(i, k));
                max_abs = std::max(max_abs, std::abs(v(i, k)));
            }
        out[name] = io::to_json(v);
    }
};

ZTable compare(const MomentReport& r, const OracleEstimate& e) {
    ZTable t;
    t.scalar("prob", r.prob, e.prob, e.prob_se);
    t.vector("delta", r.delta, e.delta, e.delta_se);
    t.matrix("omega", r.omega, e.omega, e.omega_se);
    t.vector("mdte", r.mean, e.mean, e.mean_se);
    t.matrix("mdtcov", r.mdtcov, e.cov, e.cov_se);
    return t;
}

int cmd_check(const Options& o) {
    const auto dist = io::load_model(o.model);
    const auto plan = make_plan(o);
    if (o.samples < 1) throw ValidationError("samples must be positive");
    const Rectangle rect = make_rect(o, dist.dim());
    const auto rep = moment_report(dist, rect, plan);
    const auto est = oracle_truncated_report(dist, rep.std_rect, o.samples, o.seed);

    Json j = envelope("check", dist);
    j["request"] = {{"lower", io::to_json(rect.lower())}, {"upper", io::to_json(rect.upper())},
                    {"samples", o.samples}, {"seed", o.seed}, {"plan", io::to_json(plan)}};
    j["closed_form"] = io::to_json(rep);
    j["oracle"] = io::to_json(est);
    ZTable zt = compare(rep, est);
    j["z"] = zt.out;
    double worst = zt.max_abs;

    if (dist.skew().kind() == SkewKind::ConstantHalf) {
        const auto sm = elliptical_moments(dist.family(), dist.dim(), rep.std_rect, plan, true);
        const auto er = assemble_report(dist, rep.std_rect, sm);
        ZTable ez = compare(er, est);
        Json ej;
        ej["results"] = io::to_json(er);
        ej["z"] = ez.out;
        ej["max_abs_diff"] = std::max({std::abs(er.prob - rep.prob), (er.delta - rep.delta).cwiseAbs().maxCoeff(),
                                       (er.omega - rep.omega).cwiseAbs().maxCoeff(),
                                       (er.mean - rep.mean).cwiseAbs().maxCoeff(),
                                       (er.mdtcov - rep.mdtcov).cwiseAbs().maxCoeff()});
        j["elliptical"] = ej;
        worst = std::max(worst, ez.max_abs);
    }
    j["max_abs_z"] = worst;
    j["passed"] = worst < 4.0;
    j["diagnostics"] = io::to_json(rep.diag);
    emit(j);
    return worst < 4.0 ? 0 : 4;
}

int cmd_sample(const Options& o) {
    const auto dist = io::load_model(o.model);
    if (o.count < 1) throw ValidationError("count must be positive");
    const auto batch = sample_gse(dist, o.count, o.seed);
    Json j = envelope("sample", dist);
    j["request"] = {{"count", o.count}, {"seed", o.seed}};
    j["accepted_fraction"] = batch.accepted_fraction;
    j["proposals"] = batch.proposals;
    j["draws"] = io::to_json(batch.draws);
    emit(j);
    return 0;
}

int cmd_validate(const Options& o) {
    const auto dist = io::load_model(o.model);
    Json j = envelope("validate", dist);
    j["valid"] = true;
    emit(j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Truncated moments and tail risk for generalized skew-elliptical laws"};
    app.require_subcommand(1);
    Options o;

    auto add_plan = [&](CLI::App* sub) {
        sub->add_option("--method", o.method, "auto, tensor or low_discrepancy")->capture_default_str();
        sub->add_option("--tol", o.tol, "relative tolerance")->capture_default_str();
        sub->add_option("--seed", o.seed, "seed for low-discrepancy shifts and sampling")->capture_default_str();
    };

    auto* moments = app.add_subcommand("moments", "doubly truncated moments on lower < Y <= upper");
    moments->add_option("model", o.model)->required();
    moments->add_option("--lower", o.lower)->required();
    moments->add_option("--upper", o.upper)->required();
    add_plan(moments);

    auto* risk = app.add_subcommand("risk", "VaR, MTCE and MTCov");
    risk->add_option("model", o.model)->required();
    risk->add_option("--q", o.q, "quantile levels, comma separated")->required();
    risk->add_option("--measure", o.measure, "mtce, mtcov or var")->capture_default_str();
    add_plan(risk);

    auto* check = app.add_subcommand("check", "closed form against the Monte Carlo oracle");
    check->add_option("model", o.model)->required();
    check->add_option("--lower", o.lower)->required();
    check->add_option("--upper", o.upper)->required();
    check->add_option("--samples", o.samples)->capture_default_str();
    add_plan(check);

    auto* sample = app.add_subcommand("sample", "draws from the model");
    sample->add_option("model", o.model)->required();
    sample->add_option("--count", o.count)->capture_default_str();
    sample->add_option("--seed", o.seed)->capture_default_str();

    auto* validate = app.add_subcommand("validate", "parse and echo the resolved model");
    validate->add_option("model", o.model)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*moments) return cmd_moments(o);
        if (*risk) return cmd_risk(o);
        if (*check) return cmd_check(o);
        if (*sample) return cmd_sample(o);
        if (*validate) return cmd_validate(o);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << " (integral estimate";
        for (double v : e.estimate()) std::cerr << ' ' << v;
        std::cerr << ", error bound " << e.error_bound() << "; raise --tol or lower the dimension)\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
