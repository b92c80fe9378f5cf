#ifndef PTMPS_DYNAMICS_HPP
#define PTMPS_DYNAMICS_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ptmps/pt.hpp"

namespace ptmps {

/// System Hamiltonian: a static part plus additive piecewise-constant pulse
/// segments.  H(t) = h0 + sum of h over segments with t0 <= t < t1.
struct SystemModel {
    std::size_t d = 2;
    Eigen::MatrixXcd h0;

    struct Pulse {
        double t0 = 0.0;
        double t1 = 0.0;
        Eigen::MatrixXcd h;
    };
    std::vector<Pulse> pulses;

    bool time_dependent() const { return !pulses.empty(); }
    Eigen::MatrixXcd hamiltonian(double t) const;
    void validate() const;
};

/// How the free system step is interleaved with the environment slot:
/// first_order:  absorb slot, then full step exp(-i H dt)  (global error O(dt))
/// symmetric:    half step, absorb slot, half step          (global error O(dt^2))
enum class Splitting { first_order, symmetric };

/// Density matrices are vectorized bra-major, v[s'*d + s] = rho^{s's}.
Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, std::size_t d);

/// Superoperator for rho -> O rho.
Eigen::MatrixXcd left_superop(const Eigen::MatrixXcd& o);
/// Superoperator for rho -> rho O.
Eigen::MatrixXcd right_superop(const Eigen::MatrixXcd& o);
/// Superoperator for rho -> U rho U^dagger with U = exp(-i H dt); H Hermitian.
Eigen::MatrixXcd unitary_superop(const Eigen::MatrixXcd& h, double dt);

/// Tr[O rho].
cd expectation(const Eigen::MatrixXcd& o, const Eigen::MatrixXcd& rho);

/// A superoperator inserted into the trajectory at time t_step = step * dt,
/// immediately after the state at that index is recorded (step 0 acts on the
/// initial state).  Used for multi-time correlation functions.
struct SlotIntervention {
    std::size_t step = 0;
    Eigen::MatrixXcd superop; // D x D
};

struct PropagationResult {
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> states; // states[0] == rho0
};

/// Contract the process tensor with the system propagators and read out the
/// reduced state after every step.  n_steps must not exceed the chain length
/// in finite mode; any length is allowed in tti mode.
PropagationResult propagate(const ProcessTensorMPS& pt, const SystemModel& model,
                            const Eigen::MatrixXcd& rho0, std::size_t n_steps,
                            Splitting splitting = Splitting::first_order,
                            const std::vector<SlotIntervention>& interventions = {});

/// <B(t_j) A(t_i)> for j = i..n_steps: applies the left-multiplication
/// superoperator of A at step i, then reads Tr[B rho(t_j)].  Element 0 of the
/// result corresponds to j = i.
std::vector<cd> two_time_correlator(const ProcessTensorMPS& pt, const SystemModel& model,
                                    const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& a,
                                    std::size_t i, const Eigen::MatrixXcd& b,
                                    std::size_t n_steps,
                                    Splitting splitting = Splitting::first_order);

} // namespace ptmps

#endif
