#pragma once

// File formats: CSV datasets (time,status[,group] or the compact
// suffix form "17+" for censored values), JSON model and scenario
// documents, JSON result documents and profile-trace CSV.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "proflik/coverage.hpp"
#include "proflik/estimation.hpp"
#include "proflik/model.hpp"
#include "proflik/models/families.hpp"
#include "proflik/profile.hpp"
#include "proflik/wald_delta.hpp"

namespace proflik {

using nlohmann::json;

struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr int document_version = 1;

// ======================================================================
// datasets
// ======================================================================

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

inline double parse_number(const std::string& s, const std::string& path, std::size_t line_no) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw io_error(path + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

} // namespace detail

// Read a dataset.  Two layouts are accepted:
//   1. CSV with a header line "time,status[,group]"; status 1 = event
//      (exact), 0 = right censored.
//   2. One value per line, a '+' suffix marking censoring ("17+"),
//      optionally followed by ",group".
// Lines starting with '#' and blank lines are skipped in both layouts.
inline Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open dataset file '" + path + "'");
    Dataset data;
    bool saw_header = false, decided = false, csv_layout = false;
    bool has_group = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!decided) {
            // a header mentioning "time" selects the CSV layout
            std::string lower;
            for (char c : t) lower += char(std::tolower(static_cast<unsigned char>(c)));
            if (lower.rfind("time", 0) == 0) {
                auto fields = detail::split_csv_line(lower);
                if (fields.size() < 2 || fields[0] != "time" || fields[1] != "status")
                    throw io_error(path + ":" + std::to_string(line_no) +
                                   ": expected header 'time,status[,group]'");
                has_group = fields.size() >= 3 && fields[2] == "group";
                if (fields.size() > std::size_t(has_group ? 3 : 2))
                    throw io_error(path + ":" + std::to_string(line_no) + ": too many header fields");
                csv_layout = true;
                saw_header = true;
                decided = true;
                continue;
            }
            decided = true;
            csv_layout = false;
        }
        if (csv_layout) {
            auto fields = detail::split_csv_line(t);
            if (fields.size() != std::size_t(has_group ? 3 : 2))
                throw io_error(path + ":" + std::to_string(line_no) + ": wrong field count");
            Observation o;
            o.value = detail::parse_number(fields[0], path, line_no);
            if (fields[1] == "1") o.censored = false;
            else if (fields[1] == "0") o.censored = true;
            else
                throw io_error(path + ":" + std::to_string(line_no) +
                               ": status must be 1 (event) or 0 (censored), got '" + fields[1] + "'");
            if (has_group) o.group = fields[2];
            data.observations.push_back(std::move(o));
        } else {
            auto fields = detail::split_csv_line(t);
            if (fields.size() > 2)
                throw io_error(path + ":" + std::to_string(line_no) + ": wrong field count");
            std::string v = fields[0];
            Observation o;
            if (!v.empty() && v.back() == '+') {
                o.censored = true;
                v.pop_back();
                v = detail::trim(v);
            }
            o.value = detail::parse_number(v, path, line_no);
            if (fields.size() == 2) o.group = fields[1];
            data.observations.push_back(std::move(o));
        }
    }
    (void)saw_header;
    if (data.empty())
        throw io_error("dataset file '" + path + "' holds no observations");
    return data;
}

inline void write_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write dataset file '" + path + "'");
    bool has_group = false;
    for (const auto& o : data.observations) has_group = has_group || !o.group.empty();
    out << (has_group ? "time,status,group\n" : "time,status\n");
    char buf[64];
    for (const auto& o : data.observations) {
        std::snprintf(buf, sizeof buf, "%.17g", o.value);
        out << buf << ',' << (o.censored ? '0' : '1');
        if (has_group) out << ',' << o.group;
        out << '\n';
    }
}

// ======================================================================
// models from JSON
// ======================================================================

// A model read from a document: one of the catalog families, behind a
// single type the fitting and profiling templates can consume.
class LoadedModel {
public:
    LoadedModel(ModelSpec m, std::string family)
        : model_(std::move(m)), family_(std::move(family)) {}
    LoadedModel(IndependenceModel m, std::string family)
        : model_(std::move(m)), family_(std::move(family)) {}

    const std::string& family() const { return family_; }

    const ParameterSpace& space() const {
        return std::visit([](const auto& m) -> const ParameterSpace& { return m.space(); }, model_);
    }

    double log_likelihood(const Dataset& data, std::span<const double> w) const {
        return std::visit([&](const auto& m) { return m.log_likelihood(data, w); }, model_);
    }

    std::vector<double> default_init_values(const Dataset& data) const {
        return std::visit([&](const auto& m) { return detail::default_init_values(m, data); },
                          model_);
    }

    bool is_composite() const { return std::holds_alternative<IndependenceModel>(model_); }

private:
    std::variant<ModelSpec, IndependenceModel> model_;
    std::string family_;
};

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw io_error("bad JSON in '" + path + "': " + e.what());
    }
    return j;
}

inline void check_document_version(const json& j, const std::string& what) {
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw io_error(what + ": missing integer 'version' field");
    if (j["version"].get<int>() != document_version)
        throw io_error(what + ": unsupported version " + j["version"].dump() +
                       " (this build reads version " + std::to_string(document_version) + ")");
}

// Model document:
//   {"version": 1, "family": "exponential", "parameter": "mu"}
//   {"version": 1, "family": "gamma", "shape_name": "shape", "mean_name": "mean"}
//   {"version": 1, "family": "normal", "sigma": 1.0, "parameter": "mu"}
//   {"version": 1, "family": "two_group_exponential",
//    "groups": [{"name": "m1", "group": "drug", "n": 21},
//               {"name": "m2", "group": "control", "n": 21}]}
inline LoadedModel model_from_json(const json& j) {
    check_document_version(j, "model document");
    if (!j.contains("family") || !j["family"].is_string())
        throw io_error("model document: missing 'family'");
    std::string family = j["family"].get<std::string>();
    try {
        if (family == "exponential")
            return {exponential_model(j.value("parameter", std::string("mu"))), family};
        if (family == "gamma")
            return {gamma_model(j.value("shape_name", std::string("shape")),
                                j.value("mean_name", std::string("mean"))),
                    family};
        if (family == "normal") {
            if (!j.contains("sigma"))
                throw io_error("model document: normal family needs 'sigma'");
            return {normal_model(j["sigma"].get<double>(), j.value("parameter", std::string("mu"))),
                    family};
        }
        if (family == "two_group_exponential") {
            if (!j.contains("groups") || !j["groups"].is_array() || j["groups"].size() != 2)
                throw io_error("model document: two_group_exponential needs a 2-entry 'groups' array");
            auto read_group = [&](const json& gj) {
                if (!gj.contains("name") || !gj.contains("group"))
                    throw io_error("model document: each group needs 'name' and 'group'");
                return std::tuple<std::string, std::string, std::size_t>(
                    gj["name"].get<std::string>(), gj["group"].get<std::string>(),
                    gj.value("n", std::size_t(0)));
            };
            auto [n1, g1, c1] = read_group(j["groups"][0]);
            auto [n2, g2, c2] = read_group(j["groups"][1]);
            return {two_group_exponential(n1, g1, c1, n2, g2, c2), family};
        }
    } catch (const json::exception& e) {
        throw io_error(std::string("model document: ") + e.what());
    }
    throw io_error("model document: unknown family '" + family +
                   "' (known: exponential, gamma, normal, two_group_exponential)");
}

inline LoadedModel read_model(const std::string& path) {
    return model_from_json(load_json_file(path));
}

// ======================================================================
// scenarios from JSON
// ======================================================================

// Scenario document:
//   {"version": 1, "family": "gamma", "true_params": {"shape": 1.642, "mean": 8.667},
//    "sample_size": 21, "interest": "gamma_sd", "level": 0.95,
//    "replicates": 10000, "seed": 20260822, "methods": ["delta", "profile"]}
inline CoverageScenario scenario_from_json(const json& j) {
    check_document_version(j, "scenario document");
    LoadedModel lm = model_from_json(j);
    if (lm.is_composite())
        throw io_error("scenario document: coverage runs on single-family models");
    // reconstruct the underlying ModelSpec for the scenario
    std::string family = j["family"].get<std::string>();
    CoverageScenario s;
    if (family == "exponential") s.family = exponential_model(j.value("parameter", std::string("mu")));
    else if (family == "gamma")
        s.family = gamma_model(j.value("shape_name", std::string("shape")),
                               j.value("mean_name", std::string("mean")));
    else
        s.family = normal_model(j["sigma"].get<double>(), j.value("parameter", std::string("mu")));

    if (!j.contains("true_params"))
        throw io_error("scenario document: missing 'true_params'");
    const json& tp = j["true_params"];
    const ParameterSpace& space = s.family.parameter_space;
    try {
        if (tp.is_array()) {
            s.true_params = tp.get<std::vector<double>>();
        } else if (tp.is_object()) {
            s.true_params.assign(space.dimension(), 0.0);
            for (std::size_t i = 0; i < space.dimension(); ++i) {
                if (!tp.contains(space.names[i]))
                    throw io_error("scenario document: true_params missing '" + space.names[i] + "'");
                s.true_params[i] = tp[space.names[i]].get<double>();
            }
        } else {
            throw io_error("scenario document: true_params must be an array or object");
        }
        if (!j.contains("sample_size") || !j.contains("interest"))
            throw io_error("scenario document: needs 'sample_size' and 'interest'");
        s.sample_size = j["sample_size"].get<std::size_t>();
        s.interest = j["interest"].get<std::string>();
        s.level = j.value("level", 0.95);
        s.replicates = j.value("replicates", std::size_t(1000));
        s.seed = j.value("seed", std::uint64_t(1));
        if (j.contains("methods")) {
            s.methods.clear();
            for (const auto& m : j["methods"]) {
                std::string name = m.get<std::string>();
                if (name == "wald") s.methods.push_back(IntervalMethod::Wald);
                else if (name == "delta") s.methods.push_back(IntervalMethod::Delta);
                else if (name == "profile") s.methods.push_back(IntervalMethod::Profile);
                else throw io_error("scenario document: unknown method '" + name + "'");
            }
        }
    } catch (const json::exception& e) {
        throw io_error(std::string("scenario document: ") + e.what());
    }
    return s;
}

inline CoverageScenario read_scenario(const std::string& path) {
    return scenario_from_json(load_json_file(path));
}

// ======================================================================
// results to JSON
// ======================================================================

inline json fit_to_json(const FitResult& fit) {
    json params = json::object();
    json ses = json::object();
    bool se_available = true;
    Matrix inv;
    try {
        inv = spd_inverse(fit.observed_info);
    } catch (const singular_information_error&) {
        se_available = false;
    }
    for (std::size_t i = 0; i < fit.mle.size(); ++i) {
        params[fit.space.names[i]] = fit.mle[i];
        if (se_available) ses[fit.space.names[i]] = std::sqrt(inv(i, i));
    }
    json out{
        {"parameters", params},
        {"max_loglik", fit.max_loglik},
        {"converged", fit.converged},
        {"iterations", fit.iterations},
        {"evaluations", fit.evaluations},
        {"info_condition", fit.info_condition},
    };
    if (se_available) out["standard_errors"] = ses;
    return out;
}

inline json interval_to_json(const IntervalEstimate& iv, const std::string& interest) {
    json flags = json::object();
    if (iv.lower_unbounded) flags["lower_unbounded"] = true;
    if (iv.upper_unbounded) flags["upper_unbounded"] = true;
    if (iv.outside_parameter_range) flags["outside_parameter_range"] = true;
    if (iv.degenerate_gradient) flags["degenerate_gradient"] = true;
    if (iv.multiple_roots_suspected) flags["multiple_roots_suspected"] = true;
    json out{
        {"interest", interest},
        {"method", method_name(iv.method)},
        {"level", iv.level},
        {"estimate", iv.estimate},
        {"lower", iv.lower_unbounded ? json() : json(iv.lower)},
        {"upper", iv.upper_unbounded ? json() : json(iv.upper)},
        {"flags", flags},
    };
    if (std::isfinite(iv.standard_error)) out["standard_error"] = iv.standard_error;
    return out;
}

inline json coverage_to_json(const CoverageReport& report) {
    json methods = json::object();
    for (const auto& [method, tally] : report.tallies) {
        methods[method_name(method)] = {
            {"coverage", tally.coverage()},
            {"mc_std_error", tally.mc_std_error()},
            {"covered", tally.covered},
            {"total", tally.total},
            {"failures", tally.failures},
            {"unbounded", tally.unbounded},
            {"mean_width", tally.mean_width()},
        };
    }
    json true_params = json::object();
    const ParameterSpace& space = report.scenario.family.parameter_space;
    for (std::size_t i = 0; i < space.dimension(); ++i)
        true_params[space.names[i]] = report.scenario.true_params[i];
    return json{
        {"version", document_version},
        {"command", "coverage"},
        {"scenario",
         {{"true_params", true_params},
          {"sample_size", report.scenario.sample_size},
          {"interest", report.scenario.interest},
          {"level", report.scenario.level},
          {"replicates", report.scenario.replicates},
          {"seed", report.scenario.seed}}},
        {"true_psi", report.true_psi},
        {"fit_failures", report.fit_failures},
        {"workers", report.workers},
        {"elapsed_seconds", report.elapsed_seconds},
        {"methods", methods},
    };
}

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

// ======================================================================
// profile trace CSV
// ======================================================================

inline void write_profile_trace(const ProfileCurve& curve, std::ostream& out) {
    out << "psi,profile_loglik,relative_loglik,converged\n";
    char buf[128];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%d\n", p.psi, p.loglik, p.relative,
                      p.converged ? 1 : 0);
        out << buf;
    }
}

inline void write_profile_trace(const ProfileCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path + "'");
    write_profile_trace(curve, out);
}

} // namespace proflik
