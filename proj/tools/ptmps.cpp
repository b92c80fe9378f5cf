#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "ptmps/config.hpp"
#include "ptmps/csv.hpp"
#include "ptmps/oracle.hpp"
#include "ptmps/pt_io.hpp"
#include "ptmps/ttm.hpp"

namespace {

using namespace ptmps;

bool g_log = false;

void log_line(const std::string& msg) {
    if (g_log) std::cerr << "[ptmps] " << msg << "\n";
}

struct CliOptions {
    std::string config_path;
    std::string pt_path;
    std::string out_dir = ".";
    int threads = 0;
};

ProcessTensorMPS build_from_config(const RunConfig& cfg) {
    log_line("computing influence coefficients (n_mem=" + std::to_string(cfg.n_mem) + ")");
    const EtaTable eta = eta_table(cfg.bath, cfg.dt, cfg.n_mem);
    SvdTruncation trunc = cfg.truncation;
    if (cfg.tti) {
        log_line("building time-translation-invariant process tensor");
        return build_tti(cfg.coupling, eta, trunc, cfg.conv_tol);
    }
    log_line("building finite process tensor (" + std::to_string(cfg.n_steps) + " slots)");
    return build_finite(cfg.coupling, eta, cfg.n_steps, trunc);
}

ProcessTensorMPS obtain_pt(const RunConfig& cfg, const CliOptions& opt) {
    if (!opt.pt_path.empty() && std::filesystem::exists(opt.pt_path)) {
        log_line("loading process tensor from " + opt.pt_path);
        return load_pt(opt.pt_path);
    }
    return build_from_config(cfg);
}

std::ofstream open_out(const CliOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    const auto path = std::filesystem::path(opt.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path.string() + "' for writing");
    log_line("writing " + path.string());
    return os;
}

void write_trajectory(std::ostream& os, const RunConfig& cfg, const PropagationResult& traj) {
    const std::size_t d = cfg.system.d;
    std::vector<std::string> cols{"time"};
    for (std::size_t sp = 0; sp < d; ++sp)
        for (std::size_t s = 0; s < d; ++s) {
            const std::string tag = std::to_string(sp) + std::to_string(s);
            cols.push_back("re_rho_" + tag);
            cols.push_back("im_rho_" + tag);
        }
    for (const auto& obs : cfg.observables) {
        cols.push_back("re_" + obs.name);
        cols.push_back("im_" + obs.name);
    }
    CsvWriter w(os, cols);
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
        std::vector<double> row{traj.times[n]};
        for (std::size_t sp = 0; sp < d; ++sp)
            for (std::size_t s = 0; s < d; ++s) {
                const cd v = traj.states[n](static_cast<Eigen::Index>(sp),
                                            static_cast<Eigen::Index>(s));
                row.push_back(v.real());
                row.push_back(v.imag());
            }
        for (const auto& obs : cfg.observables) {
            const cd v = expectation(obs.matrix, traj.states[n]);
            row.push_back(v.real());
            row.push_back(v.imag());
        }
        w.row(row);
    }
}

int run_build_pt(const RunConfig& cfg, const CliOptions& opt) {
    const ProcessTensorMPS pt = build_from_config(cfg);
    std::string path = opt.pt_path;
    if (path.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        path = (std::filesystem::path(opt.out_dir) / "pt.ptmp").string();
    }
    save_pt(pt, path);
    std::cout << "wrote " << path << " (";
    const auto bonds = bond_profile(pt);
    std::size_t peak = 1;
    for (std::size_t b : bonds) peak = std::max(peak, b);
    std::cout << (pt.mode == ProcessTensorMPS::Mode::tti ? "tti" : "finite")
              << ", peak bond " << peak << ", discarded weight " << pt.discarded_weight << ")\n";
    return 0;
}

int run_propagate(const RunConfig& cfg, const CliOptions& opt) {
    const ProcessTensorMPS pt = obtain_pt(cfg, opt);
    const auto traj = propagate(pt, cfg.system, cfg.rho0, cfg.n_steps, cfg.splitting);
    auto os = open_out(opt, "trajectory.csv");
    write_trajectory(os, cfg, traj);
    return 0;
}

int run_correlate(const RunConfig& cfg, const CliOptions& opt) {
    const ProcessTensorMPS pt = obtain_pt(cfg, opt);
    const auto vals = two_time_correlator(pt, cfg.system, cfg.rho0, cfg.corr_a, cfg.corr_step,
                                          cfg.corr_b, cfg.n_steps, cfg.splitting);
    auto os = open_out(opt, "correlator.csv");
    CsvWriter w(os, {"time", "re", "im"});
    for (std::size_t j = 0; j < vals.size(); ++j)
        w.row({static_cast<double>(cfg.corr_step + j) * cfg.dt, vals[j].real(), vals[j].imag()});
    return 0;
}

int run_ttm(const RunConfig& cfg, const CliOptions& opt) {
    const ProcessTensorMPS pt = obtain_pt(cfg, opt);
    const std::size_t extend = cfg.ttm_extend_to ? cfg.ttm_extend_to : cfg.n_steps;
    const auto maps = extract_maps(pt, cfg.system, cfg.ttm_memory_steps, cfg.splitting);
    const auto ttm = transfer_tensors(maps);
    {
        auto os = open_out(opt, "transfer_norms.csv");
        CsvWriter w(os, {"m", "frobenius_norm"});
        for (std::size_t m = 0; m < ttm.count(); ++m)
            w.row({static_cast<double>(m + 1), ttm.tensors[m].norm()});
    }
    const auto states = ttm_propagate(ttm, cfg.rho0, extend);
    PropagationResult traj;
    for (std::size_t n = 0; n < states.size(); ++n) {
        traj.times.push_back(static_cast<double>(n) * cfg.dt);
        traj.states.push_back(states[n]);
    }
    auto os = open_out(opt, "ttm_trajectory.csv");
    write_trajectory(os, cfg, traj);
    return 0;
}

int run_verify(const RunConfig& cfg, const CliOptions& opt) {
    (void)opt;
    bool all_ok = true;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "ok   " : "FAIL ") << name;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << "\n";
        if (!ok) all_ok = false;
    };

    // small cross-check grid derived from the config
    const std::size_t n_small = 4;
    const std::size_t mem_small = std::min<std::size_t>(cfg.n_mem, 3);
    const EtaTable eta = eta_table(cfg.bath, cfg.dt, mem_small);

    {
        SvdTruncation trunc;
        trunc.rel_cutoff = 1e-14;
        const auto pt = build_finite(cfg.coupling, eta, n_small, trunc);
        const auto dense = dense_pt(cfg.coupling, eta, n_small);
        const auto rebuilt = mps_to_dense(pt);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < dense.size(); ++i) {
            err = std::max(err, std::abs(dense[i] - rebuilt[i]));
            scale = std::max(scale, std::abs(dense[i]));
        }
        std::ostringstream d;
        d << "max deviation " << err;
        report("compressed chain matches the exact dense tensor", err <= 1e-9 * scale, d.str());
    }

    {
        SvdTruncation trunc = cfg.truncation;
        const auto pt = cfg.tti ? build_tti(cfg.coupling, eta, trunc, cfg.conv_tol)
                                : build_finite(cfg.coupling, eta, cfg.n_steps, trunc);
        const auto traj = propagate(pt, cfg.system, cfg.rho0, cfg.n_steps, cfg.splitting);
        double trace_err = 0.0, herm_err = 0.0;
        for (const auto& s : traj.states) {
            trace_err = std::max(trace_err, std::abs(s.trace() - cd(1.0, 0.0)));
            herm_err = std::max(herm_err, (s - s.adjoint()).norm());
        }
        std::ostringstream d1;
        d1 << "max |Tr - 1| = " << trace_err;
        report("trajectory preserves trace", trace_err <= 1e-8, d1.str());
        std::ostringstream d2;
        d2 << "max Hermiticity defect " << herm_err;
        report("trajectory states stay Hermitian", herm_err <= 1e-8, d2.str());
    }

    {
        // step-halving diagnostic: deviations between successive refinements
        // should shrink by at least ~the splitting order
        const std::size_t steps = 4;
        std::vector<Eigen::MatrixXcd> finals;
        for (std::size_t level = 0; level < 3; ++level) {
            const std::size_t factor = std::size_t(1) << level;
            const double dt = cfg.dt / static_cast<double>(factor);
            const std::size_t mem = mem_small * factor;
            const EtaTable e = eta_table(cfg.bath, dt, mem);
            SvdTruncation trunc;
            trunc.rel_cutoff = 1e-12;
            const auto pt = build_finite(cfg.coupling, e, steps * factor, trunc);
            const auto traj = propagate(pt, cfg.system, cfg.rho0, steps * factor, cfg.splitting);
            finals.push_back(traj.states.back());
        }
        const double e01 = (finals[0] - finals[1]).norm();
        const double e12 = (finals[1] - finals[2]).norm();
        std::ostringstream d;
        d << "|rho(dt)-rho(dt/2)| = " << e01 << ", |rho(dt/2)-rho(dt/4)| = " << e12;
        const bool ok = e01 <= 1e-12 || e12 <= 0.75 * e01;
        report("step-halving deviations shrink", ok, d.str());
    }

    if (!all_ok) throw numeric_error("verification battery failed");
    std::cout << "all checks passed\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"process-tensor engine for Gaussian bosonic environments"};
    app.require_subcommand(1);

    CliOptions opt;
    const char* log_env = std::getenv("PTMPS_LOG");
    g_log = log_env && *log_env && std::string(log_env) != "0";

    std::string mode;
    for (const char* name : {"build-pt", "propagate", "correlate", "ttm", "verify"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
        sub->add_option("--pt", opt.pt_path, "process tensor file (input, or output for build-pt)");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--threads", opt.threads, "linear-algebra thread count");
        sub->callback([&mode, name] { mode = name; });
    }

    CLI11_PARSE(app, argc, argv);

    if (opt.threads > 0) Eigen::setNbThreads(opt.threads);

    try {
        const RunConfig cfg = parse_config_file(opt.config_path);
        if (mode == "build-pt") return run_build_pt(cfg, opt);
        if (mode == "propagate") return run_propagate(cfg, opt);
        if (mode == "correlate") return run_correlate(cfg, opt);
        if (mode == "ttm") return run_ttm(cfg, opt);
        if (mode == "verify") return run_verify(cfg, opt);
        std::cerr << "error: unknown subcommand\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "configuration error:\n";
        for (const auto& issue : e.issues) std::cerr << "  - " << issue << "\n";
        return 2;
    } catch (const argument_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const dimension_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
