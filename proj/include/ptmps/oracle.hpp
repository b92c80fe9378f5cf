#ifndef PTMPS_ORACLE_HPP
#define PTMPS_ORACLE_HPP

#include "ptmps/bath.hpp"
#include "ptmps/dynamics.hpp"

namespace ptmps {

/// System plus a handful of explicitly discretized bosonic modes, for exact
/// reference dynamics.  The coupling operator is diag(lambdas) in the system
/// basis; each mode contributes omega a^dag a + diag(lambdas) (g a^dag + g* a).
struct EdModel {
    SystemModel system;
    std::vector<double> lambdas;
    std::vector<DiscreteMode> modes;
    std::size_t n_max = 3; // Fock levels 0..n_max per mode
    double beta = 1.0;
    bool zero_temperature = false;

    void validate() const;
    std::size_t bath_dim() const;
};

/// Thermal weight left beyond the Fock truncation: x^{n_max+1} with
/// x = exp(-beta omega); zero at T = 0.
double occupancy_tail(double beta, double omega, std::size_t n_max, bool zero_temperature = false);

/// Numerically exact reduced dynamics: evolve rho0 (x) thermal bath state with
/// the full unitary and trace out the bath after every step.  Total dimension
/// is capped at 2*10^4; throws numeric_error if any mode's occupancy tail
/// exceeds tail_tol.
PropagationResult ed_evolve(const EdModel& model, const Eigen::MatrixXcd& rho0, double dt,
                            std::size_t n_steps, double tail_tol = 1e-3);

/// Literal path sum over all D^n index assignments of a dense process tensor,
/// with the same splitting and intervention conventions as propagate().
/// Returns the reduced state after the last slot.
Eigen::MatrixXcd dense_contract(const DenseTensor& f, const SystemModel& model,
                                const Eigen::MatrixXcd& rho0, double dt,
                                Splitting splitting = Splitting::first_order,
                                const std::vector<SlotIntervention>& interventions = {});

} // namespace ptmps

#endif
