#pragma once

// Run configuration: a single JSON document with a schema field.

#include "infogeo/checks.hpp"
#include "infogeo/errors.hpp"
#include "infogeo/expression.hpp"
#include "infogeo/holonomy.hpp"
#include "infogeo/models.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace infogeo {

inline constexpr const char* config_schema = "infogeo-config/1";

inline const std::vector<std::string>& known_tasks()
{
    static const std::vector<std::string> tasks{"metric", "curvature", "checks", "holonomy", "verify-paper"};
    return tasks;
}

/// A model defined in the config by its potential.
struct InlineModelSpec
{
    std::string name = "custom";
    std::vector<std::string> variables;
    std::string potential;
    /// Open interval per variable; empty ends are unbounded.
    std::vector<std::array<std::optional<double>, 2>> box;
    /// Named expressions that must be strictly positive.
    std::vector<std::array<std::string, 2>> constraints;
    bool simply_connected = true;
    bool admits_kaehler = false;
    std::optional<bool> symmetric_space_known;
    /// Box for the point sampler; must lie in the domain.
    std::vector<std::array<double, 2>> sample_box;

    bool operator==(const InlineModelSpec&) const = default;
};

struct ModelSpec
{
    std::string name = "normal-1";
    std::optional<InlineModelSpec> inline_model;

    bool operator==(const ModelSpec&) const = default;
};

struct SamplerSpec
{
    std::size_t count = default_check_points;
    std::uint64_t seed = default_check_seed;

    bool operator==(const SamplerSpec&) const = default;
};

struct Tolerances
{
    double einstein = default_einstein_tolerance;
    double constant_curvature = 1e-8;
    double flat = 1e-10;
    double partition = 1e-8;
    double rank = default_rank_tolerance;
    double transport = default_transport_tolerance;
    double symmetry = 1e-8;

    bool operator==(const Tolerances&) const = default;
};

struct LoopSpec
{
    std::vector<std::vector<double>> waypoints;
    std::size_t steps = default_transport_steps;

    bool operator==(const LoopSpec&) const = default;
};

struct RunConfig
{
    std::string schema = config_schema;
    ModelSpec model;
    /// Explicit points in natural coordinates; when empty the sampler is used.
    std::vector<std::vector<double>> points;
    SamplerSpec sampler;
    double alpha = 0.0;
    Tolerances tolerances;
    std::vector<std::string> tasks{"metric"};
    std::vector<LoopSpec> loops;
    bool timestamp = false;

    bool operator==(const RunConfig&) const = default;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

[[noreturn]] inline void field_error(const std::string& field, const std::string& what)
{
    throw ConfigError("field '" + field + "': " + what);
}

inline double get_number(const json& j, const std::string& field)
{
    if (!j.is_number())
        field_error(field, "expected a number");
    return j.get<double>();
}

inline std::vector<double> get_vector(const json& j, const std::string& field)
{
    if (!j.is_array())
        field_error(field, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
    return v;
}

inline std::vector<std::string> get_strings(const json& j, const std::string& field)
{
    if (!j.is_array())
        field_error(field, "expected an array of strings");
    std::vector<std::string> v;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string())
            field_error(field + "[" + std::to_string(i) + "]", "expected a string");
        v.push_back(j[i].get<std::string>());
    }
    return v;
}

inline void reject_unknown(const json& j, const std::string& field, std::initializer_list<const char*> allowed)
{
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            field_error(field.empty() ? key : field + "." + key, "unknown key");
    }
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace detail

inline nlohmann::json to_json(const InlineModelSpec& m)
{
    using nlohmann::json;
    json box = json::array();
    for (const auto& iv : m.box)
        box.push_back({detail::optional_number(iv[0]), detail::optional_number(iv[1])});
    json cons = json::array();
    for (const auto& c : m.constraints)
        cons.push_back({{"name", c[0]}, {"expr", c[1]}});
    json sample = json::array();
    for (const auto& iv : m.sample_box)
        sample.push_back({iv[0], iv[1]});
    json meta = {{"simply_connected", m.simply_connected}, {"admits_kaehler", m.admits_kaehler}};
    meta["symmetric_space_known"] =
        m.symmetric_space_known ? json(*m.symmetric_space_known) : json(nullptr);
    return {{"name", m.name},         {"variables", m.variables}, {"potential", m.potential}, {"box", box},
            {"constraints", cons},    {"metadata", meta},         {"sample_box", sample}};
}

inline InlineModelSpec inline_model_from_json(const nlohmann::json& j, const std::string& field)
{
    using detail::field_error;
    if (!j.is_object())
        field_error(field, "expected an object");
    detail::reject_unknown(j, field, {"name", "variables", "potential", "box", "constraints", "metadata", "sample_box"});
    InlineModelSpec m;
    if (j.contains("name")) {
        if (!j["name"].is_string())
            field_error(field + ".name", "expected a string");
        m.name = j["name"].get<std::string>();
    }
    if (!j.contains("variables"))
        field_error(field + ".variables", "required");
    m.variables = detail::get_strings(j["variables"], field + ".variables");
    if (m.variables.empty())
        field_error(field + ".variables", "needs at least one variable");
    if (!j.contains("potential") || !j["potential"].is_string())
        field_error(field + ".potential", "required expression string");
    m.potential = j["potential"].get<std::string>();
    const auto n = m.variables.size();
    m.box.assign(n, {std::nullopt, std::nullopt});
    if (j.contains("box")) {
        const auto& b = j["box"];
        if (!b.is_array() || b.size() != n)
            field_error(field + ".box", "expected one [lower, upper] pair per variable");
        for (std::size_t i = 0; i < n; ++i) {
            const auto f = field + ".box[" + std::to_string(i) + "]";
            if (!b[i].is_array() || b[i].size() != 2)
                field_error(f, "expected [lower, upper] (null for unbounded)");
            for (int e = 0; e < 2; ++e)
                if (!b[i][e].is_null())
                    m.box[i][e] = detail::get_number(b[i][e], f);
        }
    }
    if (j.contains("constraints")) {
        const auto& c = j["constraints"];
        if (!c.is_array())
            field_error(field + ".constraints", "expected an array");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto f = field + ".constraints[" + std::to_string(i) + "]";
            if (!c[i].is_object() || !c[i].contains("expr") || !c[i]["expr"].is_string())
                field_error(f, "expected {\"name\": ..., \"expr\": ...}");
            const std::string name = c[i].contains("name") && c[i]["name"].is_string() ? c[i]["name"].get<std::string>()
                                                                                       : "constraint " + std::to_string(i);
            m.constraints.push_back({name, c[i]["expr"].get<std::string>()});
        }
    }
    if (j.contains("metadata")) {
        const auto& md = j["metadata"];
        detail::reject_unknown(md, field + ".metadata", {"simply_connected", "admits_kaehler", "symmetric_space_known"});
        auto flag = [&](const char* key, bool& out) {
            if (md.contains(key)) {
                if (!md[key].is_boolean())
                    field_error(field + ".metadata." + key, "expected a boolean");
                out = md[key].get<bool>();
            }
        };
        flag("simply_connected", m.simply_connected);
        flag("admits_kaehler", m.admits_kaehler);
        if (md.contains("symmetric_space_known") && !md["symmetric_space_known"].is_null()) {
            if (!md["symmetric_space_known"].is_boolean())
                field_error(field + ".metadata.symmetric_space_known", "expected a boolean or null");
            m.symmetric_space_known = md["symmetric_space_known"].get<bool>();
        }
    }
    if (j.contains("sample_box")) {
        const auto& b = j["sample_box"];
        if (!b.is_array() || b.size() != n)
            field_error(field + ".sample_box", "expected one [lower, upper] pair per variable");
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = detail::get_vector(b[i], field + ".sample_box[" + std::to_string(i) + "]");
            if (v.size() != 2 || !(v[0] < v[1]))
                field_error(field + ".sample_box[" + std::to_string(i) + "]", "expected lower < upper");
            m.sample_box.push_back({v[0], v[1]});
        }
    }
    return m;
}

inline nlohmann::json to_json(const RunConfig& c)
{
    using nlohmann::json;
    json model = c.model.inline_model ? to_json(*c.model.inline_model) : json(c.model.name);
    json loops = json::array();
    for (const auto& l : c.loops)
        loops.push_back({{"waypoints", l.waypoints}, {"steps", l.steps}});
    const auto& t = c.tolerances;
    return {{"schema", c.schema},
            {"model", model},
            {"points", c.points},
            {"sampler", {{"count", c.sampler.count}, {"seed", c.sampler.seed}}},
            {"alpha", c.alpha},
            {"tolerances",
             {{"einstein", t.einstein},
              {"constant_curvature", t.constant_curvature},
              {"flat", t.flat},
              {"partition", t.partition},
              {"rank", t.rank},
              {"transport", t.transport},
              {"symmetry", t.symmetry}}},
            {"tasks", c.tasks},
            {"loops", loops},
            {"timestamp", c.timestamp}};
}

/// Reads a config document. Missing fields keep their defaults.
inline RunConfig config_from_json(const nlohmann::json& j)
{
    using detail::field_error;
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    detail::reject_unknown(j, "", {"schema", "model", "points", "sampler", "alpha", "tolerances", "tasks", "loops",
                                   "timestamp", "seed"});
    RunConfig c;
    if (!j.contains("schema"))
        field_error("schema", "required (expected \"" + std::string(config_schema) + "\")");
    if (!j["schema"].is_string() || j["schema"].get<std::string>() != config_schema)
        field_error("schema", "unsupported schema, expected \"" + std::string(config_schema) + "\"");
    if (j.contains("model")) {
        const auto& m = j["model"];
        if (m.is_string()) {
            c.model.name = m.get<std::string>();
        } else if (m.is_object()) {
            c.model.inline_model = inline_model_from_json(m, "model");
            c.model.name = c.model.inline_model->name;
        } else {
            field_error("model", "expected a model name or an inline model object");
        }
    }
    if (j.contains("points")) {
        const auto& p = j["points"];
        if (!p.is_array())
            field_error("points", "expected an array of points");
        for (std::size_t i = 0; i < p.size(); ++i)
            c.points.push_back(detail::get_vector(p[i], "points[" + std::to_string(i) + "]"));
    }
    if (j.contains("sampler")) {
        const auto& s = j["sampler"];
        detail::reject_unknown(s, "sampler", {"count", "seed"});
        if (s.contains("count")) {
            if (!s["count"].is_number_unsigned() || s["count"].get<std::size_t>() == 0)
                field_error("sampler.count", "expected a positive integer");
            c.sampler.count = s["count"].get<std::size_t>();
        }
        if (s.contains("seed")) {
            if (!s["seed"].is_number_unsigned())
                field_error("sampler.seed", "expected a non-negative integer");
            c.sampler.seed = s["seed"].get<std::uint64_t>();
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            field_error("seed", "expected a non-negative integer");
        c.sampler.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("alpha"))
        c.alpha = detail::get_number(j["alpha"], "alpha");
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        detail::reject_unknown(t, "tolerances",
                               {"einstein", "constant_curvature", "flat", "partition", "rank", "transport", "symmetry"});
        auto read = [&](const char* key, double& out) {
            if (t.contains(key)) {
                out = detail::get_number(t[key], std::string("tolerances.") + key);
                if (!(out > 0.0))
                    field_error(std::string("tolerances.") + key, "must be positive");
            }
        };
        read("einstein", c.tolerances.einstein);
        read("constant_curvature", c.tolerances.constant_curvature);
        read("flat", c.tolerances.flat);
        read("partition", c.tolerances.partition);
        read("rank", c.tolerances.rank);
        read("transport", c.tolerances.transport);
        read("symmetry", c.tolerances.symmetry);
    }
    if (j.contains("tasks")) {
        c.tasks = detail::get_strings(j["tasks"], "tasks");
        for (std::size_t i = 0; i < c.tasks.size(); ++i)
            if (std::find(known_tasks().begin(), known_tasks().end(), c.tasks[i]) == known_tasks().end())
                field_error("tasks[" + std::to_string(i) + "]", "unknown task '" + c.tasks[i] + "'");
    }
    if (j.contains("loops")) {
        const auto& l = j["loops"];
        if (!l.is_array())
            field_error("loops", "expected an array");
        for (std::size_t i = 0; i < l.size(); ++i) {
            const auto f = "loops[" + std::to_string(i) + "]";
            if (!l[i].is_object() || !l[i].contains("waypoints") || !l[i]["waypoints"].is_array())
                field_error(f, "expected {\"waypoints\": [[...], ...], \"steps\": N}");
            LoopSpec spec;
            for (std::size_t w = 0; w < l[i]["waypoints"].size(); ++w)
                spec.waypoints.push_back(
                    detail::get_vector(l[i]["waypoints"][w], f + ".waypoints[" + std::to_string(w) + "]"));
            if (l[i].contains("steps")) {
                if (!l[i]["steps"].is_number_unsigned())
                    field_error(f + ".steps", "expected a positive integer");
                spec.steps = l[i]["steps"].get<std::size_t>();
            }
            c.loops.push_back(std::move(spec));
        }
    }
    if (j.contains("timestamp")) {
        if (!j["timestamp"].is_boolean())
            field_error("timestamp", "expected a boolean");
        c.timestamp = j["timestamp"].get<bool>();
    }
    return c;
}

/// Parses config text; syntax errors report line and column.
inline RunConfig parse_config(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const auto stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError("config line " + std::to_string(line) + ", column " + std::to_string(column) +
                          ": malformed JSON");
    }
    return config_from_json(j);
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Model resolution
// ---------------------------------------------------------------------------

inline ExponentialFamilyModel build_inline_model(const InlineModelSpec& spec)
{
    const auto n = spec.variables.size();
    std::vector<Interval> box(n);
    for (std::size_t i = 0; i < n && i < spec.box.size(); ++i) {
        if (spec.box[i][0])
            box[i].lower = *spec.box[i][0];
        if (spec.box[i][1])
            box[i].upper = *spec.box[i][1];
    }
    std::vector<NamedConstraint> constraints;
    for (const auto& c : spec.constraints) {
        const auto e = std::make_shared<Expression>(Expression::parse(c[1], spec.variables));
        constraints.push_back({c[0], [e](std::span<const double> x) { return e->evaluate<double>(x); }});
    }
    Domain domain(box, std::move(constraints));

    ExponentialFamilyModel m;
    m.name = spec.name;
    m.n = n;
    m.potential = Expression::parse(spec.potential, spec.variables).to_field(domain);
    m.metadata.simply_connected = spec.simply_connected;
    m.metadata.admits_kaehler = spec.admits_kaehler;
    m.metadata.symmetric_space_known = spec.symmetric_space_known;
    if (!spec.sample_box.empty()) {
        std::vector<std::pair<double, double>> sb;
        for (const auto& iv : spec.sample_box)
            sb.emplace_back(iv[0], iv[1]);
        auto draw = detail::box_points(sb);
        m.sample_points = [draw, domain, name = spec.name](std::size_t count, std::uint64_t seed) {
            auto pts = draw(count, seed);
            for (const auto& p : pts)
                if (auto why = domain.violation(as_span(p)))
                    throw ConfigError("field 'model.sample_box': sampled point outside the domain of '" + name +
                                      "': " + *why);
            return pts;
        };
    }
    return m;
}

inline ExponentialFamilyModel resolve_model(const ModelSpec& spec)
{
    if (spec.inline_model)
        return build_inline_model(*spec.inline_model);
    try {
        return make_model(spec.name);
    } catch (const UnknownModel& e) {
        throw ConfigError(std::string("field 'model': ") + e.what());
    }
}

/// Points the tasks run on: explicit ones, or the model sampler.
inline std::vector<Eigen::VectorXd> resolve_points(const RunConfig& c, const ExponentialFamilyModel& model)
{
    std::vector<Eigen::VectorXd> out;
    if (!c.points.empty()) {
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            const auto& p = c.points[i];
            if (p.size() != model.n)
                detail::field_error("points[" + std::to_string(i) + "]",
                                    "expected " + std::to_string(model.n) + " coordinates");
            Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
            if (auto why = model.potential.domain().violation(as_span(v)))
                detail::field_error("points[" + std::to_string(i) + "]", "outside the model domain: " + *why);
            out.push_back(std::move(v));
        }
        return out;
    }
    if (!model.sample_points)
        detail::field_error("points", "model '" + model.name + "' has no sampler; give explicit points");
    return model.sample_points(c.sampler.count, c.sampler.seed);
}

} // namespace infogeo
