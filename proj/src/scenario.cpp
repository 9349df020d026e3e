#include "egt/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace egt {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

struct RawConfig {
    std::string origin;
    std::map<std::string, Section> sections;
    std::map<std::string, int> section_lines;

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
    }
};

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

RawConfig tokenize(const std::string& text, const std::string& origin) {
    RawConfig raw;
    raw.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') raw.fail(lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) raw.fail(lineno, "empty section name");
            raw.sections[section]; // may legitimately stay empty
            raw.section_lines.emplace(section, lineno);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) raw.fail(lineno, "expected key = value");
        if (section.empty()) raw.fail(lineno, "key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) raw.fail(lineno, "empty key");
        auto [it, inserted] = raw.sections[section].emplace(key, Entry{value, lineno, false});
        if (!inserted) raw.fail(lineno, "duplicate key '" + key + "'");
    }
    return raw;
}

class SectionReader {
public:
    SectionReader(RawConfig& raw, const std::string& name) : raw_(raw), name_(name) {
        auto it = raw.sections.find(name);
        section_ = it == raw.sections.end() ? nullptr : &it->second;
    }

    bool present() const { return section_ != nullptr; }

    std::optional<std::string> get(const std::string& key) {
        if (!section_) return std::nullopt;
        auto it = section_->find(key);
        if (it == section_->end()) return std::nullopt;
        it->second.used = true;
        last_line_ = it->second.line;
        return it->second.value;
    }

    double require_double(const std::string& key) {
        auto v = get(key);
        if (!v) missing(key);
        return parse_double(*v, key);
    }

    std::optional<double> optional_double(const std::string& key) {
        auto v = get(key);
        if (!v) return std::nullopt;
        return parse_double(*v, key);
    }

    std::optional<bool> optional_bool(const std::string& key) {
        auto v = get(key);
        if (!v) return std::nullopt;
        if (*v == "true") return true;
        if (*v == "false") return false;
        raw_.fail(last_line_, "key '" + key + "' must be true or false");
    }

    [[noreturn]] void missing(const std::string& key) {
        int line = raw_.section_lines.count(name_) ? raw_.section_lines[name_] : 1;
        raw_.fail(line, "missing required key '" + key + "' in section [" + name_ + "]");
    }

    [[noreturn]] void bad_value(const std::string& key, const std::string& detail) {
        raw_.fail(last_line_, "invalid value for '" + key + "': " + detail);
    }

    double parse_double(const std::string& s, const std::string& key) {
        const char* b = s.data();
        const char* e = s.data() + s.size();
        double out = 0.0;
        auto [ptr, ec] = std::from_chars(b, e, out);
        if (ec != std::errc() || ptr != e) bad_value(key, "expected a number, got '" + s + "'");
        return out;
    }

    std::vector<double> parse_grid(const std::string& key) {
        auto v = get(key);
        if (!v) return {};
        std::vector<double> grid;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) bad_value(key, "empty grid element");
            grid.push_back(parse_double(item, key));
        }
        if (grid.empty()) bad_value(key, "empty grid");
        return grid;
    }

    int last_line() const { return last_line_; }

private:
    RawConfig& raw_;
    std::string name_;
    Section* section_;
    int last_line_ = 1;
};

const std::map<std::string, RateFamily>& family_names() {
    static const std::map<std::string, RateFamily> names{
        {"power_shifted", RateFamily::PowerShifted},
        {"power", RateFamily::Power},
        {"power_shifted_mirror", RateFamily::PowerShiftedMirror},
        {"power_mirror", RateFamily::PowerMirror},
        {"proportional", RateFamily::Proportional},
        {"atan", RateFamily::Atan},
        {"cubic", RateFamily::Cubic},
    };
    return names;
}

void reject_unknown(const RawConfig& raw) {
    static const std::map<std::string, std::vector<std::string>> known = {
        {"payoff", {"a", "b", "c", "d"}},
        {"problem", {"kind", "target", "delta", "payoff_bound", "side", "vanishing_gain"}},
        {"controller",
         {"mode", "prefer", "p", "q", "matrix", "rate", "delta", "xbar", "sign"}},
        {"initial", {"x0", "g0"}},
        {"integrator",
         {"method", "rel_tol", "abs_tol", "dt", "dt_min", "dt_max", "horizon", "record_stride",
          "eps_x", "eps_g_settle", "window", "stop_on_convergence", "gain_cap_log"}},
        {"output", {"trajectory", "metrics"}},
        {"sweep", {"p_grid", "q_grid", "jobs"}},
    };
    for (const auto& [section, entries] : raw.sections) {
        auto it = known.find(section);
        if (it == known.end())
            raw.fail(raw.section_lines.at(section), "unknown section [" + section + "]");
        for (const auto& [key, entry] : entries) {
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                raw.fail(entry.line, "unknown key '" + key + "' in section [" + section + "]");
        }
    }
}

} // namespace

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
    RawConfig raw = tokenize(text, origin);
    reject_unknown(raw);
    ScenarioConfig cfg;

    SectionReader payoff(raw, "payoff");
    if (!payoff.present()) throw ConfigError(origin + ":1: missing required section [payoff]");
    cfg.payoff = {payoff.require_double("a"), payoff.require_double("b"),
                  payoff.require_double("c"), payoff.require_double("d")};

    SectionReader problem(raw, "problem");
    if (problem.present()) {
        ProblemSpec p;
        auto kind = problem.get("kind");
        if (!kind) problem.missing("kind");
        const double target = problem.require_double("target");
        if (*kind == "reach") {
            auto delta = problem.optional_double("delta");
            if (!delta) problem.missing("delta");
            if (target != 0.0 && target != 1.0)
                problem.bad_value("target", "consensus target must be 0 or 1");
            p.kind = ConsensusReaching{static_cast<int>(target), *delta};
        } else if (*kind == "stabilize") {
            if (target != 0.0 && target != 1.0)
                problem.bad_value("target", "consensus target must be 0 or 1");
            p.kind = ConsensusStabilization{static_cast<int>(target)};
        } else if (*kind == "setpoint") {
            p.kind = SetPointRegulation{target};
        } else {
            problem.bad_value("kind", "expected reach, stabilize or setpoint");
        }
        p.payoff_bound = problem.optional_double("payoff_bound");
        if (auto side = problem.get("side")) {
            if (*side == "below") p.side = MixedNeSide::Below;
            else if (*side == "above") p.side = MixedNeSide::Above;
            else if (*side == "unknown") p.side = MixedNeSide::Unknown;
            else problem.bad_value("side", "expected below, above or unknown");
        }
        if (auto vg = problem.optional_bool("vanishing_gain")) p.require_vanishing_gain = *vg;
        cfg.problem = p;
    }

    SectionReader controller(raw, "controller");
    if (controller.present()) {
        auto mode = controller.get("mode");
        cfg.controller.automatic = !mode || *mode == "auto";
        if (mode && *mode != "auto" && *mode != "explicit")
            controller.bad_value("mode", "expected auto or explicit");
        if (auto prefer = controller.get("prefer")) {
            if (*prefer == "conformity") cfg.controller.prefer_conformity = true;
            else if (*prefer != "innovation")
                controller.bad_value("prefer", "expected innovation or conformity");
        }
        cfg.controller.p = controller.optional_double("p");
        cfg.controller.q = controller.optional_double("q");
        if (auto mat = controller.get("matrix")) {
            if (*mat == "G1") cfg.controller.matrix = ControlMatrix::G1;
            else if (*mat == "G2") cfg.controller.matrix = ControlMatrix::G2;
            else if (*mat == "G3") cfg.controller.matrix = ControlMatrix::G3;
            else if (*mat == "G4") cfg.controller.matrix = ControlMatrix::G4;
            else controller.bad_value("matrix", "expected G1..G4");
        }
        if (auto fam = controller.get("rate")) {
            auto it = family_names().find(*fam);
            if (it == family_names().end())
                controller.bad_value("rate", "unknown rate family '" + *fam + "'");
            cfg.controller.family = it->second;
        }
        cfg.controller.delta = controller.optional_double("delta");
        cfg.controller.xbar = controller.optional_double("xbar");
        if (auto sg = controller.optional_double("sign")) {
            if (*sg != 1.0 && *sg != -1.0) controller.bad_value("sign", "expected 1 or -1");
            cfg.controller.sign = static_cast<int>(*sg);
        }
        if (!cfg.controller.automatic && (!cfg.controller.matrix || !cfg.controller.family))
            controller.missing(cfg.controller.matrix ? "rate" : "matrix");
    }

    SectionReader initial(raw, "initial");
    if (initial.present()) {
        cfg.initial.x = initial.require_double("x0");
        cfg.initial.g = initial.optional_double("g0").value_or(0.01);
    }

    SectionReader integ(raw, "integrator");
    if (integ.present()) {
        if (auto method = integ.get("method")) {
            if (*method == "rk45") cfg.integrator.method = IntegratorConfig::Method::AdaptiveRk45;
            else if (*method == "rk4") cfg.integrator.method = IntegratorConfig::Method::FixedRk4;
            else integ.bad_value("method", "expected rk45 or rk4");
        }
        if (auto v = integ.optional_double("rel_tol")) cfg.integrator.rel_tol = *v;
        if (auto v = integ.optional_double("abs_tol")) cfg.integrator.abs_tol = *v;
        if (auto v = integ.optional_double("dt")) cfg.integrator.dt = *v;
        if (auto v = integ.optional_double("dt_min")) cfg.integrator.dt_min = *v;
        if (auto v = integ.optional_double("dt_max")) cfg.integrator.dt_max = *v;
        if (auto v = integ.optional_double("horizon")) cfg.integrator.horizon = *v;
        if (auto v = integ.optional_double("record_stride")) cfg.integrator.record_stride = *v;
        if (auto v = integ.optional_double("eps_x")) cfg.integrator.convergence.eps_x = *v;
        if (auto v = integ.optional_double("eps_g_settle"))
            cfg.integrator.convergence.eps_g_settle = *v;
        if (auto v = integ.optional_double("window")) cfg.integrator.convergence.window = *v;
        if (auto v = integ.optional_bool("stop_on_convergence"))
            cfg.integrator.stop_on_convergence = *v;
        if (auto v = integ.optional_double("gain_cap_log")) cfg.integrator.gain_log_cap = *v;
    }

    SectionReader output(raw, "output");
    if (output.present()) {
        if (auto v = output.get("trajectory")) cfg.output.trajectory_path = *v;
        if (auto v = output.get("metrics")) cfg.output.metrics_path = *v;
    }

    SectionReader sweep(raw, "sweep");
    if (sweep.present()) {
        cfg.sweep.p_grid = sweep.parse_grid("p_grid");
        cfg.sweep.q_grid = sweep.parse_grid("q_grid");
        if (auto v = sweep.optional_double("jobs")) {
            if (*v < 0 || *v != static_cast<unsigned>(*v)) sweep.bad_value("jobs", "expected a non-negative integer");
            cfg.sweep.jobs = static_cast<unsigned>(*v);
        }
    }

    return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open scenario file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

double problem_target(const ProblemSpec& problem) {
    return std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SetPointRegulation>) return k.target;
            else return static_cast<double>(k.target);
        },
        problem.kind);
}

ResolvedController resolve_controller(const ScenarioConfig& cfg) {
    if (cfg.controller.automatic) {
        if (!cfg.problem)
            throw ConfigError("automatic controller selection needs a [problem] section");
        DesignOptions opts;
        opts.p = cfg.controller.p;
        if (cfg.controller.q) opts.q = *cfg.controller.q;
        opts.prefer_conformity = cfg.controller.prefer_conformity;
        DesignResult result = design(classify(cfg.payoff), *cfg.problem, opts, &cfg.payoff);
        return {result.spec, std::move(result)};
    }
    RateShape shape;
    shape.family = *cfg.controller.family;
    if (cfg.controller.delta) shape.delta = *cfg.controller.delta;
    if (cfg.controller.xbar) shape.xbar = *cfg.controller.xbar;
    shape.sign = cfg.controller.sign;
    const double p = cfg.controller.p.value_or(1.0);
    const double q = cfg.controller.q.value_or(1.0);
    return {ControllerSpec{*cfg.controller.matrix, make_rate(shape, p, q)}, std::nullopt};
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,g\n";
    for (const auto& s : traj.samples)
        os << format_number(s.t) << ',' << format_number(s.state.x) << ','
           << format_number(s.state.g) << '\n';
}

void write_metrics_json(std::ostream& os, const RunMetrics& m, TerminalReason reason) {
    nlohmann::ordered_json j;
    j["x_final"] = m.x_final;
    j["g_final"] = m.g_final;
    j["J_g"] = m.J_g;
    j["g_max"] = m.g_max;
    j["converged"] = m.converged;
    if (m.settle_time) j["settle_time"] = *m.settle_time;
    else j["settle_time"] = nullptr;
    j["terminal_reason"] = to_string(reason);
    os << j.dump(2) << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
    os << "p,q,J_g,g_max,g_final,x_final,converged,settle_time\n";
    for (const auto& cell : result.cells) {
        os << format_number(cell.p) << ',' << format_number(cell.q) << ','
           << format_number(cell.metrics.J_g) << ',' << format_number(cell.metrics.g_max) << ','
           << format_number(cell.metrics.g_final) << ',' << format_number(cell.metrics.x_final)
           << ',' << (cell.metrics.converged ? "true" : "false") << ','
           << (cell.metrics.settle_time ? format_number(*cell.metrics.settle_time) : "nan")
           << '\n';
    }
}

std::string design_json(const DesignResult& result) {
    nlohmann::ordered_json j;
    j["matrix"] = to_string(result.spec.matrix);
    j["rate"] = result.spec.rate.family_name();
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PowerShifted> || std::is_same_v<T, PowerShiftedMirror>) {
                j["p"] = r.p;
                j["q"] = r.q;
                j["delta"] = r.delta;
            } else if constexpr (std::is_same_v<T, Power> || std::is_same_v<T, PowerMirror>) {
                j["p"] = r.p;
                j["q"] = r.q;
            } else if constexpr (std::is_same_v<T, Proportional>) {
                j["p"] = r.p;
                j["xbar"] = r.xbar;
                j["sign"] = r.sign;
            } else {
                j["xbar"] = r.xbar;
            }
        },
        result.spec.rate.v);
    if (result.predicted_gbar) j["gbar"] = *result.predicted_gbar;
    j["rule"] = to_string(result.certificate.rule);
    j["certified"] = result.certificate.certified;
    auto conditions = nlohmann::ordered_json::array();
    for (const auto& c : result.certificate.checks) {
        nlohmann::ordered_json jc;
        jc["id"] = c.id;
        jc["description"] = c.description;
        jc["passed"] = c.passed;
        jc["method"] = c.method == CheckMethod::Analytic    ? "analytic"
                       : c.method == CheckMethod::Sampled   ? "sampled"
                                                            : "heuristic";
        if (c.witness_x) jc["witness_x"] = *c.witness_x;
        if (!c.detail.empty()) jc["detail"] = c.detail;
        conditions.push_back(std::move(jc));
    }
    j["conditions"] = std::move(conditions);
    return j.dump(2) + "\n";
}

} // namespace egt
