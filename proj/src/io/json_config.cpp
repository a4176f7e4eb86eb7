#include "vbakf/error.hpp"
#include "vbakf/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

namespace vbakf::io {

namespace {

using json = nlohmann::json;

// A JSON value together with where it came from, for error messages.
class Node {
public:
    Node(const json& value, std::string pointer, std::string_view source)
        : value_(value), pointer_(std::move(pointer)), source_(source) {}

    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError(std::string(source_) + ": " + (pointer_.empty() ? "/" : pointer_) + ": " + message);
    }

    const json& value() const { return value_; }

    /// Requires an object whose keys are all in `allowed`.
    void expect_object(std::initializer_list<std::string_view> allowed) const {
        if (!value_.is_object()) fail("expected an object");
        for (const auto& item : value_.items()) {
            if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
                Node(item.value(), pointer_ + "/" + item.key(), source_).fail("unknown key '" + item.key() + "'");
            }
        }
    }

    bool has(std::string_view key) const { return value_.contains(key); }

    Node at(std::string_view key) const {
        const std::string child = pointer_ + "/" + std::string(key);
        if (!value_.contains(key)) Node(value_, child, source_).fail("missing required key");
        return {value_.at(std::string(key)), child, source_};
    }

    Node at(std::size_t index) const { return {value_.at(index), pointer_ + "/" + std::to_string(index), source_}; }

    std::size_t size() const { return value_.size(); }

    double number() const {
        if (!value_.is_number()) fail("expected a number");
        const double v = value_.get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }

    std::uint64_t uint64() const {
        if (value_.is_number_unsigned()) return value_.get<std::uint64_t>();
        if (value_.is_number_integer() && value_.get<std::int64_t>() >= 0) return value_.get<std::uint64_t>();
        fail("expected a non-negative integer");
    }

    std::size_t size_value() const { return static_cast<std::size_t>(uint64()); }

    bool boolean() const {
        if (!value_.is_boolean()) fail("expected true or false");
        return value_.get<bool>();
    }

    std::string string() const {
        if (!value_.is_string()) fail("expected a string");
        return value_.get<std::string>();
    }

    void expect_array() const {
        if (!value_.is_array()) fail("expected an array");
    }

    Vector vector() const {
        expect_array();
        Vector out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = at(i).number();
        return out;
    }

    std::vector<double> numbers() const {
        expect_array();
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
        return out;
    }

    Matrix matrix() const {
        expect_array();
        if (size() == 0) fail("expected a nonempty array of rows");
        std::vector<std::vector<double>> rows;
        for (std::size_t r = 0; r < size(); ++r) {
            rows.push_back(at(r).numbers());
            if (rows.back().size() != rows.front().size() || rows.back().empty()) {
                at(r).fail("rows must be nonempty and of equal length");
            }
        }
        return Matrix::from_rows(rows);
    }

private:
    const json& value_;
    std::string pointer_;
    std::string_view source_;
};

json parse_text(std::string_view text, std::string_view source) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& err) {
        const std::size_t offset = std::min<std::size_t>(err.byte == 0 ? 0 : err.byte - 1, text.size());
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < offset; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": invalid JSON: " + err.what());
    }
}

// Re-raise a library validation error with the source name attached.
template <class F>
void validated(std::string_view source, F&& check) {
    try {
        check();
    } catch (const Error& err) {
        throw ConfigError(std::string(source) + ": " + err.what());
    }
}

// ---------------------------------------------------------------- readers

RegimeSegment read_segment(const Node& n) {
    n.expect_object({"start_k", "end_k", "q_true", "r_true", "dropout_rate", "corruption_rate"});
    RegimeSegment s;
    s.start_k = n.at("start_k").size_value();
    s.end_k = n.at("end_k").size_value();
    s.q_true = n.at("q_true").matrix();
    s.r_true = n.at("r_true").matrix();
    if (n.has("dropout_rate")) s.dropout_rate = n.at("dropout_rate").number();
    if (n.has("corruption_rate")) s.corruption_rate = n.at("corruption_rate").number();
    return s;
}

ScenarioConfig read_scenario(const Node& n) {
    n.expect_object({"d_x", "d_y", "f", "h", "e", "n_sensors", "horizon", "segments", "x0_mean", "x0_cov"});
    ScenarioConfig c;
    c.d_x = n.at("d_x").size_value();
    c.d_y = n.at("d_y").size_value();
    c.f = n.at("f").matrix();
    c.h = n.at("h").matrix();
    c.e = n.at("e").matrix();
    c.n_sensors = n.at("n_sensors").size_value();
    c.horizon = n.at("horizon").size_value();
    const Node segments = n.at("segments");
    segments.expect_array();
    for (std::size_t i = 0; i < segments.size(); ++i) c.segments.push_back(read_segment(segments.at(i)));
    c.x0_mean = n.at("x0_mean").vector();
    c.x0_cov = n.at("x0_cov").matrix();
    return c;
}

InverseWishartParams read_iw(const Node& n) {
    n.expect_object({"dof", "scale"});
    return {n.at("dof").number(), n.at("scale").matrix()};
}

BetaParams read_beta(const Node& n) {
    n.expect_object({"a", "b"});
    return {n.at("a").number(), n.at("b").number()};
}

VbHyperParams read_hyper(const Node& n) {
    n.expect_object({"q_prior", "r_prior", "rho_prior", "beta_prior", "e", "n_iters", "model_corruption"});
    VbHyperParams h;
    h.q_prior = read_iw(n.at("q_prior"));
    h.r_prior = read_iw(n.at("r_prior"));
    if (n.has("rho_prior")) h.rho_prior = read_beta(n.at("rho_prior"));
    if (n.has("beta_prior")) h.beta_prior = read_beta(n.at("beta_prior"));
    h.e = n.at("e").matrix();
    if (n.has("n_iters")) h.n_iters = n.at("n_iters").size_value();
    if (n.has("model_corruption")) h.model_corruption = n.at("model_corruption").boolean();
    return h;
}

GaussianBelief read_belief(const Node& n) {
    n.expect_object({"mean", "cov"});
    return {n.at("mean").vector(), n.at("cov").matrix()};
}

// ---------------------------------------------------------------- writers

json matrix_json(const Matrix& m) { return m.to_rows(); }

json vector_json(const Vector& v) { return std::vector<double>(v.values().begin(), v.values().end()); }

json scenario_json(const ScenarioConfig& c) {
    json segments = json::array();
    for (const auto& s : c.segments) {
        segments.push_back({{"start_k", s.start_k},
                            {"end_k", s.end_k},
                            {"q_true", matrix_json(s.q_true)},
                            {"r_true", matrix_json(s.r_true)},
                            {"dropout_rate", s.dropout_rate},
                            {"corruption_rate", s.corruption_rate}});
    }
    return {{"d_x", c.d_x},       {"d_y", c.d_y},
            {"f", matrix_json(c.f)}, {"h", matrix_json(c.h)},
            {"e", matrix_json(c.e)}, {"n_sensors", c.n_sensors},
            {"horizon", c.horizon},  {"segments", segments},
            {"x0_mean", vector_json(c.x0_mean)}, {"x0_cov", matrix_json(c.x0_cov)}};
}

json iw_json(const InverseWishartParams& p) { return {{"dof", p.dof}, {"scale", matrix_json(p.scale)}}; }

json beta_json(const BetaParams& p) { return {{"a", p.a}, {"b", p.b}}; }

json hyper_json(const VbHyperParams& h) {
    return {{"q_prior", iw_json(h.q_prior)},     {"r_prior", iw_json(h.r_prior)},
            {"rho_prior", beta_json(h.rho_prior)}, {"beta_prior", beta_json(h.beta_prior)},
            {"e", matrix_json(h.e)},             {"n_iters", h.n_iters},
            {"model_corruption", h.model_corruption}};
}

json belief_json(const GaussianBelief& b) { return {{"mean", vector_json(b.mean)}, {"cov", matrix_json(b.cov)}}; }

json experiment_json(const ExperimentSpec& s) {
    json j = {{"name", s.name},
              {"scenario", scenario_json(s.scenario)},
              {"hyper", hyper_json(s.hyper)},
              {"x0", belief_json(s.x0)},
              {"mc_reps", s.mc_reps},
              {"root_seed", s.root_seed},
              {"baselines", {{"oracle", s.baselines.oracle}, {"static", s.baselines.static_kf}}}};
    if (!s.static_q.empty()) j["static_q"] = matrix_json(s.static_q);
    if (!s.static_r.empty()) j["static_r"] = matrix_json(s.static_r);
    if (s.sweep) j["sweep"] = {{"parameter", s.sweep->parameter}, {"values", s.sweep->values}};
    return j;
}

} // namespace

ScenarioConfig parse_scenario(std::string_view text, std::string_view source) {
    const json j = parse_text(text, source);
    ScenarioConfig c = read_scenario(Node(j, "", source));
    validated(source, [&] { c.validate(); });
    return c;
}

ExperimentSpec parse_experiment(std::string_view text, std::string_view source) {
    const json j = parse_text(text, source);
    const Node n(j, "", source);
    n.expect_object({"name", "scenario", "hyper", "x0", "mc_reps", "root_seed", "baselines", "static_q", "static_r",
                     "sweep"});
    ExperimentSpec s;
    s.name = n.has("name") ? n.at("name").string() : "custom";
    if (s.name.empty() || s.name.find_first_of("/\\\n\r,") != std::string::npos) {
        n.at("name").fail("name must be nonempty and usable as a file name prefix");
    }
    s.scenario = read_scenario(n.at("scenario"));
    s.hyper = read_hyper(n.at("hyper"));
    s.x0 = read_belief(n.at("x0"));
    s.mc_reps = n.has("mc_reps") ? n.at("mc_reps").size_value() : 1;
    s.root_seed = n.has("root_seed") ? n.at("root_seed").uint64() : 0;
    if (n.has("baselines")) {
        const Node b = n.at("baselines");
        b.expect_object({"oracle", "static"});
        if (b.has("oracle")) s.baselines.oracle = b.at("oracle").boolean();
        if (b.has("static")) s.baselines.static_kf = b.at("static").boolean();
    }
    if (n.has("static_q")) s.static_q = n.at("static_q").matrix();
    if (n.has("static_r")) s.static_r = n.at("static_r").matrix();
    if (n.has("sweep")) {
        const Node w = n.at("sweep");
        w.expect_object({"parameter", "values"});
        s.sweep = Sweep{w.at("parameter").string(), w.at("values").numbers()};
    }
    validated(source, [&] { s.validate(); });
    return s;
}

FilterConfig parse_filter_config(std::string_view text, std::string_view source) {
    const json j = parse_text(text, source);
    const Node n(j, "", source);
    n.expect_object({"hyper", "x0"});
    FilterConfig c{read_hyper(n.at("hyper")), read_belief(n.at("x0"))};
    validated(source, [&] {
        c.hyper.validate(c.x0.dim(), c.hyper.e.rows());
        c.x0.validate();
    });
    return c;
}

std::string to_json(const ScenarioConfig& config) { return scenario_json(config).dump(); }
std::string to_json(const ExperimentSpec& spec) { return experiment_json(spec).dump(); }
std::string to_json(const FilterConfig& config) {
    return json{{"hyper", hyper_json(config.hyper)}, {"x0", belief_json(config.x0)}}.dump();
}

std::string to_json_pretty(const ScenarioConfig& config) { return scenario_json(config).dump(2) + "\n"; }

} // namespace vbakf::io
