#include "crcs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace crcs {

using nlohmann::json;

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string dataset_to_csv(const Dataset& d) {
    std::string out = "time,status\n";
    for (const Observation& o : d.obs) {
        out += fmt17(o.time);
        out += ',';
        out += std::to_string(o.status);
        out += '\n';
    }
    return out;
}

Dataset dataset_from_csv_text(const std::string& text, int K) {
    std::vector<Observation> raw;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "time,status")
                throw std::invalid_argument("line 1: expected header time,status");
            continue;
        }
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected time,status");
        try {
            std::size_t pos = 0;
            double t = std::stod(line.substr(0, comma), &pos);
            if (pos != comma) throw std::invalid_argument("trailing characters");
            std::string st = line.substr(comma + 1);
            std::size_t pos2 = 0;
            int s = std::stoi(st, &pos2);
            if (pos2 != st.size()) throw std::invalid_argument("trailing characters");
            Observation o;
            o.time = t;
            o.status = s;
            raw.push_back(o);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": malformed row");
        } catch (const std::out_of_range&) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": value out of range");
        }
    }
    if (raw.empty()) throw std::invalid_argument("dataset has no observations");
    return validate_dataset(raw, K);
}

Dataset read_dataset_csv(const std::string& path, int K) {
    return dataset_from_csv_text(read_text_file(path), K);
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
    write_text_file(path, dataset_to_csv(d));
}

json step_fn_to_json(const StepFn& f) {
    return json{{"baseline", f.baseline},
                {"jump_t", f.jump_t},
                {"jump_v", f.jump_v},
                {"tail_mass", f.tail_mass}};
}

StepFn step_fn_from_json(const json& j) {
    StepFn f;
    f.baseline = j.at("baseline").get<double>();
    f.jump_t = j.at("jump_t").get<std::vector<double>>();
    f.jump_v = j.at("jump_v").get<std::vector<double>>();
    f.tail_mass = j.at("tail_mass").get<double>();
    validate_step_fn(f, true, 1e-8);
    return f;
}

json system_to_json(const SubDistSystem& s) {
    json comps = json::array();
    for (const StepFn& f : s.components) comps.push_back(step_fn_to_json(f));
    return json{{"k", s.K}, {"components", comps}};
}

SubDistSystem system_from_json(const json& j) {
    SubDistSystem s;
    s.K = j.at("k").get<int>();
    if (s.K < 1) throw std::invalid_argument("system: k must be at least 1");
    for (const json& c : j.at("components")) s.components.push_back(step_fn_from_json(c));
    if (static_cast<int>(s.components.size()) != s.K)
        throw std::invalid_argument("system: component count must equal k");
    s.sum_tolerance = std::numeric_limits<double>::infinity();
    return s;
}

json fenchel_to_json(const FenchelReport& r) {
    json causes = json::array();
    for (const CauseCondition& c : r.per_cause)
        causes.push_back(json{{"max_inequality_violation", c.max_inequality_violation},
                              {"max_equality_gap", c.max_equality_gap},
                              {"worst_t", c.worst_t},
                              {"stationarity_integral", c.stationarity_integral},
                              {"primal_inequality_violation", c.primal_inequality_violation}});
    return json{{"beta", r.beta}, {"tol", r.tol}, {"passed", r.passed}, {"per_cause", causes}};
}

json naive_to_json(const NaiveResult& r, int K, int n) {
    json comps = json::array();
    for (const StepFn& f : r.components) comps.push_back(step_fn_to_json(f));
    double total = 0.0;
    for (double v : r.per_cause_loglik) total += v;
    json viol = json::array();
    for (const std::pair<double, double>& pv : r.sum_violations)
        viol.push_back(json{{"t", pv.first}, {"sum", pv.second}});
    return json{{"method", "naive"},       {"k", K},
                {"n", n},                  {"loglik", total},
                {"per_cause_loglik", r.per_cause_loglik},
                {"components", comps},     {"sum_violations", viol}};
}

json mle_to_json(const MleResult& r, int K, int n) {
    json comps = json::array();
    for (const StepFn& f : r.system.components) comps.push_back(step_fn_to_json(f));
    return json{{"method", "mle"},
                {"k", K},
                {"n", n},
                {"loglik", r.loglik},
                {"tail_mass_total", r.tail_mass_total},
                {"tail_unique", r.tail_unique},
                {"iterations", r.iterations},
                {"components", comps},
                {"certificate", fenchel_to_json(r.certificate)}};
}

json obs_dist_to_json(const ObsDist& g) {
    if (g.kind == ObsDist::Kind::uniform) return json{{"kind", "uniform"}, {"a", g.a}, {"b", g.b}};
    return json{{"kind", "trunc_exponential"}, {"a", g.a}, {"b", g.b}, {"rate", g.rate}};
}

ObsDist obs_dist_from_json(const json& j) {
    ObsDist g;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform")
        g.kind = ObsDist::Kind::uniform;
    else if (kind == "trunc_exponential")
        g.kind = ObsDist::Kind::trunc_exponential;
    else
        throw std::invalid_argument("obs dist: unknown kind " + kind);
    g.a = j.at("a").get<double>();
    g.b = j.at("b").get<double>();
    if (g.kind == ObsDist::Kind::trunc_exponential) g.rate = j.at("rate").get<double>();
    validate_obs_dist(g);
    return g;
}

json cause_shape_to_json(const CauseShape& s) {
    if (s.kind == CauseShape::Kind::exponential)
        return json{{"kind", "exponential"}, {"rate", s.rate}};
    return json{{"kind", "weibull"}, {"shape", s.shape}, {"scale", s.scale}};
}

CauseShape cause_shape_from_json(const json& j) {
    CauseShape s;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "exponential") {
        s.kind = CauseShape::Kind::exponential;
        s.rate = j.at("rate").get<double>();
    } else if (kind == "weibull") {
        s.kind = CauseShape::Kind::weibull;
        s.shape = j.at("shape").get<double>();
        s.scale = j.at("scale").get<double>();
    } else {
        throw std::invalid_argument("cause shape: unknown kind " + kind);
    }
    validate_cause_shape(s);
    return s;
}

json truth_model_to_json(const TruthModel& tm) {
    json shapes = json::array();
    for (const CauseShape& s : tm.shapes) shapes.push_back(cause_shape_to_json(s));
    return json{{"k", tm.K}, {"p", tm.p}, {"shapes", shapes}, {"g", obs_dist_to_json(tm.g)}};
}

TruthModel truth_model_from_json(const json& j) {
    TruthModel tm;
    tm.K = j.at("k").get<int>();
    tm.p = j.at("p").get<std::vector<double>>();
    for (const json& s : j.at("shapes")) tm.shapes.push_back(cause_shape_from_json(s));
    tm.g = obs_dist_from_json(j.at("g"));
    validate_truth_model(tm);
    return tm;
}

RateConfig rate_config_from_json(const json& j) {
    RateConfig c;
    c.tm = truth_model_from_json(j.at("truth"));
    c.n_grid = j.at("n_grid").get<std::vector<int>>();
    if (j.contains("t0")) c.t0 = j.at("t0").get<double>();
    if (j.contains("reps")) c.reps = j.at("reps").get<int>();
    if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("seed")) c.base_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("estimators")) {
        c.run_naive = false;
        c.run_mle = false;
        for (const json& e : j.at("estimators")) {
            std::string name = e.get<std::string>();
            if (name == "naive")
                c.run_naive = true;
            else if (name == "mle")
                c.run_mle = true;
            else
                throw std::invalid_argument("rate config: unknown estimator " + name);
        }
    }
    if (j.contains("window")) c.window = j.at("window").get<double>();
    if (j.contains("beta")) c.beta = j.at("beta").get<double>();
    if (j.contains("fenchel_tol")) c.fenchel_tol = j.at("fenchel_tol").get<double>();
    return c;
}

json rate_table_to_json(const RateTable& t) {
    json slopes = json::array();
    for (const std::pair<std::string, double>& s : t.slopes)
        slopes.push_back(json{{"metric", s.first}, {"slope", s.second}});
    json rows = json::array();
    for (const RateRow& r : t.rows)
        rows.push_back(json{{"n", r.n},
                            {"metric", r.metric},
                            {"q25", r.q25},
                            {"median", r.median},
                            {"q75", r.q75}});
    return json{{"slopes", slopes},
                {"failures", t.failures},
                {"failure_notes", t.failure_notes},
                {"flagged", t.flagged},
                {"rows", rows}};
}

std::string rate_table_to_csv(const RateTable& t) {
    std::string out = "n,metric,q25,median,q75,slope\n";
    for (const RateRow& r : t.rows) {
        out += std::to_string(r.n);
        out += ',';
        out += r.metric;
        out += ',';
        out += fmt17(r.q25);
        out += ',';
        out += fmt17(r.median);
        out += ',';
        out += fmt17(r.q75);
        out += ',';
        // repeated on every n row of the metric; blank when the fit failed
        for (const auto& s : t.slopes)
            if (s.first == r.metric && std::isfinite(s.second)) out += fmt17(s.second);
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace crcs
