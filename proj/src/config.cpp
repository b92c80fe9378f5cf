#include "ptmps/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ptmps {

namespace {

using nlohmann::json;

struct Issues {
    std::vector<std::string> list;
    void add(const std::string& where, const std::string& what) {
        list.push_back(where + ": " + what);
    }
    bool any() const { return !list.empty(); }
};

// entries are either a number or a [re, im] pair
std::optional<cd> parse_complex(const json& j) {
    if (j.is_number()) return cd(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return cd(j[0].get<double>(), j[1].get<double>());
    return std::nullopt;
}

std::optional<Eigen::MatrixXcd> parse_matrix(const json& j, std::size_t d, Issues& issues,
                                             const std::string& where) {
    if (!j.is_array() || j.size() != d) {
        issues.add(where, "expected a " + std::to_string(d) + "-row matrix");
        return std::nullopt;
    }
    Eigen::MatrixXcd m(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        if (!j[r].is_array() || j[r].size() != d) {
            issues.add(where, "row " + std::to_string(r) + " must have " + std::to_string(d) +
                                  " entries");
            return std::nullopt;
        }
        for (std::size_t c = 0; c < d; ++c) {
            const auto v = parse_complex(j[r][c]);
            if (!v) {
                issues.add(where, "entry (" + std::to_string(r) + "," + std::to_string(c) +
                                      ") must be a number or [re, im]");
                return std::nullopt;
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
        }
    }
    return m;
}

double get_number(const json& j, const char* key, double fallback, bool required, Issues& issues,
                  const std::string& where) {
    if (!j.contains(key)) {
        if (required) issues.add(where, std::string("missing required key '") + key + "'");
        return fallback;
    }
    if (!j[key].is_number()) {
        issues.add(where, std::string("'") + key + "' must be a number");
        return fallback;
    }
    return j[key].get<double>();
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback, bool required,
                      Issues& issues, const std::string& where) {
    if (!j.contains(key)) {
        if (required) issues.add(where, std::string("missing required key '") + key + "'");
        return fallback;
    }
    if (!j[key].is_number_unsigned()) {
        issues.add(where, std::string("'") + key + "' must be a non-negative integer");
        return fallback;
    }
    return j[key].get<std::size_t>();
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error({std::string("json: ") + e.what()});
    }

    Issues issues;
    RunConfig cfg;

    // task
    const std::string task = j.value("task", std::string());
    if (task == "build-pt") cfg.task = RunConfig::Task::build_pt;
    else if (task == "propagate") cfg.task = RunConfig::Task::propagate;
    else if (task == "correlate") cfg.task = RunConfig::Task::correlate;
    else if (task == "ttm") cfg.task = RunConfig::Task::ttm;
    else if (task == "verify") cfg.task = RunConfig::Task::verify;
    else issues.add("task", "must be one of build-pt, propagate, correlate, ttm, verify");

    const bool needs_dynamics = task == "propagate" || task == "correlate" || task == "ttm" ||
                                task == "verify";

    // system
    std::size_t d = 2;
    if (!j.contains("system") || !j["system"].is_object()) {
        issues.add("system", "missing required block");
    } else {
        const json& s = j["system"];
        d = get_count(s, "d", 2, true, issues, "system");
        if (d < 2) {
            issues.add("system", "'d' must be >= 2");
            d = 2;
        }
        cfg.system.d = d;
        cfg.coupling.d = d;

        if (s.contains("coupling")) {
            if (s["coupling"].is_array() && s["coupling"].size() == d) {
                for (const auto& v : s["coupling"]) {
                    if (!v.is_number()) {
                        issues.add("system.coupling", "entries must be numbers");
                        break;
                    }
                    cfg.coupling.lambdas.push_back(v.get<double>());
                }
            } else {
                issues.add("system.coupling", "must be a length-d array of coupling eigenvalues");
            }
        } else {
            issues.add("system", "missing required key 'coupling'");
        }
        if (cfg.coupling.lambdas.size() != d) cfg.coupling.lambdas.assign(d, 0.0);

        if (s.contains("hamiltonian")) {
            auto m = parse_matrix(s["hamiltonian"], d, issues, "system.hamiltonian");
            if (m) {
                if ((*m - m->adjoint()).norm() > 1e-12 * std::max(m->norm(), 1.0))
                    issues.add("system.hamiltonian", "must be Hermitian");
                else
                    cfg.system.h0 = *m;
            }
        } else if (needs_dynamics) {
            issues.add("system", "missing required key 'hamiltonian'");
        }
        if (cfg.system.h0.size() == 0) cfg.system.h0 = Eigen::MatrixXcd::Zero(d, d);

        if (s.contains("rho0")) {
            auto m = parse_matrix(s["rho0"], d, issues, "system.rho0");
            if (m) {
                if (std::abs(m->trace() - cd(1.0, 0.0)) > 1e-9)
                    issues.add("system.rho0", "must have unit trace");
                else if ((*m - m->adjoint()).norm() > 1e-12 * std::max(m->norm(), 1.0))
                    issues.add("system.rho0", "must be Hermitian");
                else
                    cfg.rho0 = *m;
            }
        } else if (needs_dynamics && task != "verify") {
            issues.add("system", "missing required key 'rho0'");
        }
        if (cfg.rho0.size() == 0) {
            cfg.rho0 = Eigen::MatrixXcd::Zero(d, d);
            cfg.rho0(0, 0) = 1.0;
        }

        if (s.contains("pulses")) {
            if (!s["pulses"].is_array()) {
                issues.add("system.pulses", "must be an array");
            } else {
                for (std::size_t p = 0; p < s["pulses"].size(); ++p) {
                    const json& pj = s["pulses"][p];
                    const std::string where = "system.pulses[" + std::to_string(p) + "]";
                    SystemModel::Pulse pulse;
                    pulse.t0 = get_number(pj, "t0", 0.0, true, issues, where);
                    pulse.t1 = get_number(pj, "t1", 0.0, true, issues, where);
                    if (!(pulse.t1 > pulse.t0)) issues.add(where, "needs t1 > t0");
                    if (pj.contains("h")) {
                        auto m = parse_matrix(pj["h"], d, issues, where + ".h");
                        if (m) pulse.h = *m;
                    } else {
                        issues.add(where, "missing required key 'h'");
                    }
                    if (pulse.h.size() == 0) pulse.h = Eigen::MatrixXcd::Zero(d, d);
                    cfg.system.pulses.push_back(std::move(pulse));
                }
            }
        }
    }

    // bath
    if (!j.contains("bath") || !j["bath"].is_object()) {
        issues.add("bath", "missing required block");
    } else {
        const json& b = j["bath"];
        const std::string kind = b.value("kind", std::string("continuum"));
        if (kind == "discrete") {
            cfg.bath.kind = BathSpec::Kind::discrete;
            if (b.contains("modes") && b["modes"].is_array()) {
                for (std::size_t k = 0; k < b["modes"].size(); ++k) {
                    const json& mj = b["modes"][k];
                    const std::string where = "bath.modes[" + std::to_string(k) + "]";
                    DiscreteMode m;
                    m.omega = get_number(mj, "omega", 1.0, true, issues, where);
                    if (!(m.omega > 0.0)) issues.add(where, "'omega' must be > 0");
                    if (mj.contains("g")) {
                        const auto g = parse_complex(mj["g"]);
                        if (g) m.g = *g;
                        else issues.add(where, "'g' must be a number or [re, im]");
                    } else {
                        issues.add(where, "missing required key 'g'");
                    }
                    cfg.bath.modes.push_back(m);
                }
            } else {
                issues.add("bath", "discrete bath needs a 'modes' array");
            }
        } else if (kind == "continuum") {
            cfg.bath.kind = BathSpec::Kind::continuum;
            cfg.bath.amplitude = get_number(b, "amplitude", 0.0, true, issues, "bath");
            cfg.bath.exponent = get_number(b, "exponent", 1.0, false, issues, "bath");
            cfg.bath.omega_c = get_number(b, "omega_c", 1.0, true, issues, "bath");
            if (cfg.bath.amplitude < 0.0) issues.add("bath", "'amplitude' must be >= 0");
            if (!(cfg.bath.exponent > 0.0)) issues.add("bath", "'exponent' must be > 0");
            if (!(cfg.bath.omega_c > 0.0)) issues.add("bath", "'omega_c' must be > 0");
            const std::string cut = b.value("cutoff", std::string("hard"));
            if (cut == "hard") cfg.bath.cutoff = CutoffForm::hard;
            else if (cut == "exponential") cfg.bath.cutoff = CutoffForm::exponential;
            else issues.add("bath.cutoff", "must be 'hard' or 'exponential'");
        } else {
            issues.add("bath.kind", "must be 'discrete' or 'continuum'");
        }
        cfg.bath.zero_temperature = b.value("zero_temperature", false);
        cfg.bath.beta = get_number(b, "beta", 1.0, !cfg.bath.zero_temperature, issues, "bath");
        if (!cfg.bath.zero_temperature && !(cfg.bath.beta > 0.0))
            issues.add("bath", "'beta' must be > 0 unless zero_temperature is set");
    }

    // grid
    if (!j.contains("grid") || !j["grid"].is_object()) {
        issues.add("grid", "missing required block");
    } else {
        const json& g = j["grid"];
        cfg.dt = get_number(g, "dt", 0.1, true, issues, "grid");
        if (!(cfg.dt > 0.0)) issues.add("grid", "'dt' must be > 0");
        cfg.n_steps = get_count(g, "n_steps", 1, true, issues, "grid");
        if (cfg.n_steps < 1) issues.add("grid", "'n_steps' must be >= 1");
        cfg.n_mem = get_count(g, "n_mem", 0, true, issues, "grid");
        cfg.tti = g.value("tti", false);
    }

    // truncation
    if (j.contains("truncation")) {
        const json& t = j["truncation"];
        cfg.truncation.rel_cutoff = get_number(t, "rel_cutoff", 0.0, false, issues, "truncation");
        if (!(cfg.truncation.rel_cutoff >= 0.0 && cfg.truncation.rel_cutoff < 1.0))
            issues.add("truncation", "'rel_cutoff' must satisfy 0 <= c < 1");
        if (t.contains("max_rank")) {
            cfg.truncation.max_rank = get_count(t, "max_rank", 1, false, issues, "truncation");
            if (cfg.truncation.max_rank < 1) issues.add("truncation", "'max_rank' must be >= 1");
        }
        cfg.conv_tol = get_number(t, "conv_tol", 1e-7, false, issues, "truncation");
        if (!(cfg.conv_tol > 0.0)) issues.add("truncation", "'conv_tol' must be > 0");
    }

    // propagation extras
    if (j.contains("propagation")) {
        const json& p = j["propagation"];
        const std::string split = p.value("splitting", std::string("first_order"));
        if (split == "first_order") cfg.splitting = Splitting::first_order;
        else if (split == "symmetric") cfg.splitting = Splitting::symmetric;
        else issues.add("propagation.splitting", "must be 'first_order' or 'symmetric'");
        if (p.contains("observables")) {
            if (!p["observables"].is_array()) {
                issues.add("propagation.observables", "must be an array");
            } else {
                for (std::size_t k = 0; k < p["observables"].size(); ++k) {
                    const json& oj = p["observables"][k];
                    const std::string where = "propagation.observables[" + std::to_string(k) + "]";
                    RunConfig::Observable obs;
                    obs.name = oj.value("name", "obs" + std::to_string(k));
                    if (oj.contains("matrix")) {
                        auto m = parse_matrix(oj["matrix"], d, issues, where + ".matrix");
                        if (m) obs.matrix = *m;
                    } else {
                        issues.add(where, "missing required key 'matrix'");
                    }
                    if (obs.matrix.size() == 0) obs.matrix = Eigen::MatrixXcd::Zero(d, d);
                    cfg.observables.push_back(std::move(obs));
                }
            }
        }
    }

    if (task == "correlate") {
        if (!j.contains("correlate") || !j["correlate"].is_object()) {
            issues.add("correlate", "missing required block");
        } else {
            const json& c = j["correlate"];
            if (c.contains("a")) {
                auto m = parse_matrix(c["a"], d, issues, "correlate.a");
                if (m) cfg.corr_a = *m;
            } else {
                issues.add("correlate", "missing required key 'a'");
            }
            if (c.contains("b")) {
                auto m = parse_matrix(c["b"], d, issues, "correlate.b");
                if (m) cfg.corr_b = *m;
            } else {
                issues.add("correlate", "missing required key 'b'");
            }
            cfg.corr_step = get_count(c, "step", 0, true, issues, "correlate");
            if (cfg.corr_step > cfg.n_steps)
                issues.add("correlate", "'step' must be <= grid.n_steps");
        }
    }
    if (cfg.corr_a.size() == 0) cfg.corr_a = Eigen::MatrixXcd::Zero(d, d);
    if (cfg.corr_b.size() == 0) cfg.corr_b = Eigen::MatrixXcd::Zero(d, d);

    if (task == "ttm") {
        if (!j.contains("ttm") || !j["ttm"].is_object()) {
            issues.add("ttm", "missing required block");
        } else {
            const json& t = j["ttm"];
            cfg.ttm_memory_steps = get_count(t, "memory_steps", 1, true, issues, "ttm");
            if (cfg.ttm_memory_steps < 1) issues.add("ttm", "'memory_steps' must be >= 1");
            cfg.ttm_extend_to = get_count(t, "extend_to", 0, false, issues, "ttm");
            if (!cfg.system.pulses.empty())
                issues.add("ttm", "requires a time-independent Hamiltonian (no pulses)");
        }
    }

    if (issues.any()) throw config_error(std::move(issues.list));
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("parse_config_file: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

} // namespace ptmps
