#ifndef PTMPS_PT_HPP
#define PTMPS_PT_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptmps/bath.hpp"
#include "ptmps/tensor.hpp"

namespace ptmps {

// Liouville index convention used throughout: alpha = s' * d + s (bra-major),
// matching rho^{s's}.  The diagonal indices are alpha = s * d + s.

/// Coupling operator in its eigenbasis: O_S = sum_s lambda_s |s><s|.
struct SystemCoupling {
    std::size_t d = 2;
    std::vector<double> lambdas; // length d

    std::size_t liouville_dim() const { return d * d; }
    void validate() const;
};

/// Pairwise influence weight at time separation k; only the D x D diagonal
/// content of the gate is stored, b(alpha, beta) with alpha the later slot.
struct InfluenceGate {
    std::size_t k = 0;
    Eigen::MatrixXcd b; // D x D
};

/// Single matrix element of the influence gate:
///   b_k(alpha, beta) = exp[-(lambda_s - lambda_r)(eta_k lambda_s' - conj(eta_k) lambda_r')]
/// with alpha = (s, r), beta = (s', r') decoded bra-major.
cd b_factor(const SystemCoupling& coupling, const EtaTable& eta, std::size_t k,
            std::size_t alpha, std::size_t beta);

InfluenceGate influence_gate(const SystemCoupling& coupling, const EtaTable& eta, std::size_t k);

/// Process tensor over time-slot Liouville indices, as an MPS.
///
/// finite mode: `sites` holds N rank-3 tensors (left bond, physical D,
/// right bond) with boundary bonds of extent 1.
///
/// tti mode: represents the N -> infinity limit.  `sites` holds the ramp-in
/// tensors for the first slots, `bulk` the repeated bulk tensor (scaled so
/// the capped transfer matrix has unit dominant eigenvalue), and `cap` the
/// dominant right eigenvector of that transfer matrix (the closure for the
/// infinite capped future).
struct ProcessTensorMPS {
    enum class Mode { finite, tti };

    Mode mode = Mode::finite;
    std::size_t d = 2;
    double dt = 0.0;
    std::size_t n_mem = 0;

    std::vector<DenseTensor> sites;
    DenseTensor bulk; // tti only
    DenseTensor cap;  // tti only, shape {chi}

    double discarded_weight = 0.0;

    std::size_t liouville_dim() const { return d * d; }
    std::size_t length() const { return sites.size(); } // finite mode

    /// Site tensor seen at slot n (0-based) when the PT is unrolled; valid
    /// for any n in tti mode.
    const DenseTensor& site_at(std::size_t n) const {
        if (mode == Mode::finite) {
            if (n >= sites.size()) throw argument_error("ProcessTensorMPS: slot beyond length");
            return sites[n];
        }
        return n < sites.size() ? sites[n] : bulk;
    }
};

/// Exact dense process tensor F^{alpha_1 ... alpha_n} (product over all
/// ordered slot pairs, memory-truncated beyond eta.n_mem).  Oracle for the
/// MPS builders; capped at 10^6 entries and n_steps <= 8.
DenseTensor dense_pt(const SystemCoupling& coupling, const EtaTable& eta, std::size_t n_steps);

/// Sequential slot-by-slot builder with per-slot SVD compression.
ProcessTensorMPS build_finite(const SystemCoupling& coupling, const EtaTable& eta,
                              std::size_t n_steps, SvdTruncation trunc);

/// Time-translation-invariant builder: iterates the bulk slot update to its
/// fixed point and extracts the repeated tensor plus the ramp-in sites.
/// Convergence is measured in the environment-weighted gauge-aligned norm;
/// directions of negligible Schmidt weight never settle elementwise, so the
/// default tolerance reflects the physically resolvable accuracy.
ProcessTensorMPS build_tti(const SystemCoupling& coupling, const EtaTable& eta,
                           SvdTruncation trunc, double conv_tol = 1e-7,
                           std::size_t max_slots = 0);

/// Bond extents along the chain (right bond of every stored site; the bulk
/// bond last in tti mode).
std::vector<std::size_t> bond_profile(const ProcessTensorMPS& pt);

/// Full contraction of a finite PT into a dense tensor with N physical
/// indices (test/diagnostic helper; capped at 10^6 entries).
DenseTensor mps_to_dense(const ProcessTensorMPS& pt);

} // namespace ptmps

#endif
