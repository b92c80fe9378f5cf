#ifndef PTMPS_BATH_HPP
#define PTMPS_BATH_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "ptmps/errors.hpp"

namespace ptmps {

using cd = std::complex<double>;

/// How the continuum spectral density is cut off at high frequency.
/// hard:        J(w) = A w^s        for w <= w_c, zero beyond
/// exponential: J(w) = A w^s exp(-w/w_c)
enum class CutoffForm { hard, exponential };

struct DiscreteMode {
    cd g;         // coupling
    double omega; // frequency, > 0
};

/// Environment definition: either a list of discrete bosonic modes or a
/// power-law spectral density, at inverse temperature beta (or T = 0, in
/// which case coth == 1 exactly).
struct BathSpec {
    enum class Kind { discrete, continuum };
    Kind kind = Kind::continuum;

    // discrete
    std::vector<DiscreteMode> modes;

    // continuum: J(w) = A w^s * cutoff(w, w_c)
    double amplitude = 0.0; // A >= 0 (zero means uncoupled)
    double exponent = 1.0;  // s > 0
    double omega_c = 1.0;   // cutoff frequency > 0
    CutoffForm cutoff = CutoffForm::hard;

    double beta = 1.0;             // inverse temperature (> 0 unless zero_temperature)
    bool zero_temperature = false; // coth == 1 limit

    void validate() const;

    /// Spectral density J(w) (continuum only; zero outside support).
    double spectral_density(double omega) const;
};

/// Discretized influence coefficients eta_0 ... eta_{n_mem}: double integrals
/// of the correlation function over pairs of time windows of width dt
/// (triangular domain for the diagonal entry).
struct EtaTable {
    double dt = 0.0;
    std::size_t n_mem = 0;
    std::vector<cd> values; // length n_mem + 1
    double quad_error = 0.0; // worst per-entry refinement estimate

    cd eta(std::size_t k) const {
        if (k >= values.size()) throw argument_error("EtaTable: separation beyond n_mem");
        return values[k];
    }
};

/// Thermal correlation function C(t).  Satisfies C(-t) = conj(C(t)) and
/// C(0) real >= 0.
cd correlation(const BathSpec& bath, double t);

/// Influence coefficients by tensor-product Gauss-Legendre over each window
/// (default order 16 with one order-doubling refinement, relative tolerance
/// 1e-10).
EtaTable eta_table(const BathSpec& bath, double dt, std::size_t n_mem,
                   std::size_t quad_order = 16, double rel_tol = 1e-10);

/// Midpoint-rule discretization of a continuum bath into n_modes modes on
/// [0, omega_max]: omega_k at bin centers, |g_k|^2 the bin integral of J.
BathSpec discretize_continuum(const BathSpec& bath, std::size_t n_modes, double omega_max);

} // namespace ptmps

#endif
