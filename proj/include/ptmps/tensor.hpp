#ifndef PTMPS_TENSOR_HPP
#define PTMPS_TENSOR_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "ptmps/errors.hpp"

namespace ptmps {

using cd = std::complex<double>;

/// Dense complex tensor with a row-major linear layout: for shape
/// (e_0, ..., e_{r-1}) the element (i_0, ..., i_{r-1}) lives at linear
/// offset i_{r-1} + e_{r-1}*(i_{r-2} + e_{r-2}*(...)). The last axis is
/// contiguous.  All extents are >= 1.
class DenseTensor {
  public:
    DenseTensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit DenseTensor(std::vector<std::size_t> shape);

    DenseTensor(std::vector<std::size_t> shape, std::vector<cd> data);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }

    const std::vector<cd>& data() const { return data_; }
    std::vector<cd>& data() { return data_; }

    cd& operator[](std::size_t linear) { return data_[linear]; }
    const cd& operator[](std::size_t linear) const { return data_[linear]; }

    cd& at(const std::vector<std::size_t>& idx) { return data_[offset(idx)]; }
    const cd& at(const std::vector<std::size_t>& idx) const { return data_[offset(idx)]; }

    std::size_t offset(const std::vector<std::size_t>& idx) const;

    /// Row-major strides.
    std::vector<std::size_t> strides() const;

    /// Metadata-only reshape; total size must be unchanged.
    DenseTensor reshaped(std::vector<std::size_t> new_shape) const;

    bool has_nonfinite() const;

  private:
    std::vector<std::size_t> shape_;
    std::vector<cd> data_;
};

/// Truncation policy for svd_split.  discarded_weight accumulates the sum of
/// squared discarded singular values across calls (diagnostic).
struct SvdTruncation {
    double rel_cutoff = 0.0;   // drop sigma < rel_cutoff * sigma_max
    std::size_t max_rank = static_cast<std::size_t>(-1);
    std::size_t min_rank = 1;  // keep at least this many directions (capped by the
                               // matrix dimensions); lets a caller pin a bond whose
                               // smallest singular value straddles the cutoff
    double discarded_weight = 0.0;

    void validate() const {
        if (!(rel_cutoff >= 0.0 && rel_cutoff < 1.0))
            throw argument_error("SvdTruncation: rel_cutoff must satisfy 0 <= c < 1");
        if (max_rank < 1) throw argument_error("SvdTruncation: max_rank must be >= 1");
        if (min_rank < 1 || min_rank > max_rank)
            throw argument_error("SvdTruncation: need 1 <= min_rank <= max_rank");
    }
};

/// Where the singular values go after the split.
enum class SvdAbsorb { right, left, separate };

struct SvdSplitResult {
    DenseTensor left;   // row extents + (kept_rank)
    DenseTensor right;  // (kept_rank) + col extents
    std::size_t kept_rank = 0;
    double discarded_weight = 0.0;     // this call only
    Eigen::VectorXd singular_values;   // filled when absorb == separate
};

/// Pairwise contraction: sums over the paired axes.  Result axes are the
/// uncontracted axes of a (in order) followed by those of b.
DenseTensor contract(const DenseTensor& a, const std::vector<std::size_t>& a_axes,
                     const DenseTensor& b, const std::vector<std::size_t>& b_axes);

/// Axis permutation: out.shape[k] = in.shape[order[k]], and the element with
/// input coordinates (i_0, ...) appears in the output at coordinates
/// (i_{order(0)}, i_{order(1)}, ...).
DenseTensor permute(const DenseTensor& a, const std::vector<std::size_t>& order);

/// Truncated SVD of the matrix obtained by grouping row_axes / col_axes
/// (together a permutation of all axes).  Phases are fixed deterministically
/// (largest-modulus entry of each left singular vector made real positive).
SvdSplitResult svd_split(const DenseTensor& m, const std::vector<std::size_t>& row_axes,
                         const std::vector<std::size_t>& col_axes, SvdTruncation& trunc,
                         SvdAbsorb absorb = SvdAbsorb::right);

} // namespace ptmps

#endif
