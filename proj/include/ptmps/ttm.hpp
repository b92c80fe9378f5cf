#ifndef PTMPS_TTM_HPP
#define PTMPS_TTM_HPP

#include "ptmps/dynamics.hpp"

namespace ptmps {

/// Discrete-time dynamical maps E_1 .. E_N with rho(t_n) = E_n rho(0),
/// acting on bra-major vectorized density matrices.
struct DynamicalMapSet {
    std::size_t d = 2;
    double dt = 0.0;
    std::vector<Eigen::MatrixXcd> maps; // maps[n-1] = E_n

    std::size_t count() const { return maps.size(); }
};

/// Transfer tensors T_1 .. T_K from the recursion
///   T_n = E_n - sum_{m=1}^{n-1} T_m E_{n-m}
/// giving the memory-kernel propagation rule
///   rho(t_n) = sum_{m=1}^{min(n,K)} T_m rho(t_{n-m}).
struct TransferTensorSet {
    std::size_t d = 2;
    double dt = 0.0;
    std::vector<Eigen::MatrixXcd> tensors; // tensors[m-1] = T_m

    std::size_t count() const { return tensors.size(); }
};

/// Reconstruct the first n_steps dynamical maps by propagating the matrix-unit
/// basis through the process tensor.  Requires a time-independent Hamiltonian
/// (the maps are otherwise not functions of the elapsed time alone).
DynamicalMapSet extract_maps(const ProcessTensorMPS& pt, const SystemModel& model,
                             std::size_t n_steps,
                             Splitting splitting = Splitting::first_order);

TransferTensorSet transfer_tensors(const DynamicalMapSet& maps);

/// Propagate with the transfer tensors: rho(t_n) = sum_m T_m rho(t_{n-m}),
/// seeded by rho0 alone (the first K steps use the partial sums available).
/// Returns states at t_0 .. t_{n_steps}.
std::vector<Eigen::MatrixXcd> ttm_propagate(const TransferTensorSet& ttm,
                                            const Eigen::MatrixXcd& rho0,
                                            std::size_t n_steps);

} // namespace ptmps

#endif
