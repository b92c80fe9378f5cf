#ifndef PTMPS_CONFIG_HPP
#define PTMPS_CONFIG_HPP

#include <optional>
#include <string>

#include "ptmps/bath.hpp"
#include "ptmps/dynamics.hpp"
#include "ptmps/pt.hpp"

namespace ptmps {

/// One fully validated run description.  Parsed from a JSON document with
/// blocks: task, system, bath, grid, truncation, and per-task extras.
/// Parsing collects every problem it can find and reports them all at once
/// in a single config_error.
struct RunConfig {
    enum class Task { build_pt, propagate, correlate, ttm, verify };
    Task task = Task::build_pt;

    SystemModel system;          // h0 + pulses
    SystemCoupling coupling;     // diag coupling eigenvalues
    Eigen::MatrixXcd rho0;       // initial state (tasks that propagate)

    BathSpec bath;

    // grid
    double dt = 0.1;
    std::size_t n_steps = 1;
    std::size_t n_mem = 0;
    bool tti = false;

    SvdTruncation truncation;
    double conv_tol = 1e-7; // tti fixed-point tolerance (weighted norm)

    Splitting splitting = Splitting::first_order;

    struct Observable {
        std::string name;
        Eigen::MatrixXcd matrix;
    };
    std::vector<Observable> observables;

    // correlate task
    Eigen::MatrixXcd corr_a, corr_b;
    std::size_t corr_step = 0;

    // ttm task
    std::size_t ttm_memory_steps = 1;
    std::size_t ttm_extend_to = 0; // 0: same as n_steps
};

/// Parse and validate a JSON config document (text).  Throws config_error
/// listing every issue found.
RunConfig parse_config(const std::string& json_text);

/// Read the file and parse it.  Throws io_error if unreadable.
RunConfig parse_config_file(const std::string& path);

} // namespace ptmps

#endif
