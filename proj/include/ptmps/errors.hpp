#ifndef PTMPS_ERRORS_HPP
#define PTMPS_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace ptmps {

// Bad argument values: out-of-range axes, invalid permutations, size caps.
struct argument_error : std::invalid_argument {
    explicit argument_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Incompatible tensor/matrix extents.
struct dimension_error : std::invalid_argument {
    explicit dimension_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failure: SVD non-convergence, quadrature tolerance not reached,
// fixed-point iteration not converging.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration parsing/validation; carries the full list of problems found.
struct config_error : std::runtime_error {
    std::vector<std::string> issues;
    explicit config_error(std::vector<std::string> issues_)
        : std::runtime_error(join(issues_)), issues(std::move(issues_)) {}

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& e : v) {
            if (!s.empty()) s += "; ";
            s += e;
        }
        return s;
    }
};

} // namespace ptmps

#endif
