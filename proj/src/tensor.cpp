#include "ptmps/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ptmps {

namespace {

using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

void check_axes(const DenseTensor& t, const std::vector<std::size_t>& axes, const char* who) {
    std::vector<bool> seen(t.rank(), false);
    for (std::size_t ax : axes) {
        if (ax >= t.rank()) {
            std::ostringstream os;
            os << who << ": axis " << ax << " out of range for rank " << t.rank();
            throw argument_error(os.str());
        }
        if (seen[ax]) {
            std::ostringstream os;
            os << who << ": duplicate axis " << ax;
            throw argument_error(os.str());
        }
        seen[ax] = true;
    }
}

} // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), cd(0.0, 0.0)) {
    for (std::size_t e : shape_)
        if (e < 1) throw argument_error("DenseTensor: extents must be >= 1");
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<cd> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    for (std::size_t e : shape_)
        if (e < 1) throw argument_error("DenseTensor: extents must be >= 1");
    if (shape_product(shape_) != data_.size())
        throw dimension_error("DenseTensor: data length does not match shape product");
}

std::size_t DenseTensor::offset(const std::vector<std::size_t>& idx) const {
    if (idx.size() != shape_.size()) throw argument_error("DenseTensor::at: wrong index rank");
    std::size_t off = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= shape_[k]) throw argument_error("DenseTensor::at: index out of range");
        off = off * shape_[k] + idx[k];
    }
    return off;
}

std::vector<std::size_t> DenseTensor::strides() const {
    std::vector<std::size_t> s(shape_.size(), 1);
    for (std::size_t k = shape_.size(); k-- > 1;) s[k - 1] = s[k] * shape_[k];
    return s;
}

DenseTensor DenseTensor::reshaped(std::vector<std::size_t> new_shape) const {
    if (shape_product(new_shape) != data_.size())
        throw dimension_error("reshape: size mismatch");
    return DenseTensor(std::move(new_shape), data_);
}

bool DenseTensor::has_nonfinite() const {
    for (const cd& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return true;
    return false;
}

DenseTensor permute(const DenseTensor& a, const std::vector<std::size_t>& order) {
    if (order.size() != a.rank()) throw argument_error("permute: order length != rank");
    check_axes(a, order, "permute");

    std::vector<std::size_t> out_shape(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) out_shape[k] = a.shape()[order[k]];
    DenseTensor out(out_shape);

    if (a.rank() == 0) {
        out[0] = a[0];
        return out;
    }

    const std::vector<std::size_t> in_strides = a.strides();
    // Stride of input axis order[k] as seen from the output odometer.
    std::vector<std::size_t> mapped(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) mapped[k] = in_strides[order[k]];

    std::vector<std::size_t> idx(order.size(), 0);
    std::size_t in_off = 0;
    const std::size_t n = out.size();
    for (std::size_t lin = 0; lin < n; ++lin) {
        out[lin] = a[in_off];
        // advance odometer over out coordinates (last axis fastest)
        for (std::size_t k = order.size(); k-- > 0;) {
            ++idx[k];
            in_off += mapped[k];
            if (idx[k] < out_shape[k]) break;
            in_off -= mapped[k] * out_shape[k];
            idx[k] = 0;
        }
    }
    return out;
}

DenseTensor contract(const DenseTensor& a, const std::vector<std::size_t>& a_axes,
                     const DenseTensor& b, const std::vector<std::size_t>& b_axes) {
    if (a_axes.size() != b_axes.size())
        throw argument_error("contract: axis lists must have equal length");
    check_axes(a, a_axes, "contract(a)");
    check_axes(b, b_axes, "contract(b)");
    for (std::size_t k = 0; k < a_axes.size(); ++k) {
        if (a.shape()[a_axes[k]] != b.shape()[b_axes[k]]) {
            std::ostringstream os;
            os << "contract: extent mismatch on pair " << k << " (" << a.shape()[a_axes[k]]
               << " vs " << b.shape()[b_axes[k]] << ")";
            throw dimension_error(os.str());
        }
    }

    auto free_axes = [](const DenseTensor& t, const std::vector<std::size_t>& axes) {
        std::vector<bool> used(t.rank(), false);
        for (std::size_t ax : axes) used[ax] = true;
        std::vector<std::size_t> free;
        for (std::size_t ax = 0; ax < t.rank(); ++ax)
            if (!used[ax]) free.push_back(ax);
        return free;
    };

    const std::vector<std::size_t> a_free = free_axes(a, a_axes);
    const std::vector<std::size_t> b_free = free_axes(b, b_axes);

    std::vector<std::size_t> a_order = a_free;
    a_order.insert(a_order.end(), a_axes.begin(), a_axes.end());
    std::vector<std::size_t> b_order = b_axes;
    b_order.insert(b_order.end(), b_free.begin(), b_free.end());

    const DenseTensor ap = permute(a, a_order);
    const DenseTensor bp = permute(b, b_order);

    std::size_t m = 1, k = 1, n = 1;
    for (std::size_t ax : a_free) m *= a.shape()[ax];
    for (std::size_t ax : a_axes) k *= a.shape()[ax];
    for (std::size_t ax : b_free) n *= b.shape()[ax];

    Eigen::Map<const RowMat> ma(ap.data().data(), static_cast<Eigen::Index>(m),
                                static_cast<Eigen::Index>(k));
    Eigen::Map<const RowMat> mb(bp.data().data(), static_cast<Eigen::Index>(n ? k : k),
                                static_cast<Eigen::Index>(n));

    std::vector<std::size_t> out_shape;
    for (std::size_t ax : a_free) out_shape.push_back(a.shape()[ax]);
    for (std::size_t ax : b_free) out_shape.push_back(b.shape()[ax]);
    if (out_shape.empty()) out_shape.push_back(1); // full contraction -> scalar shape {1}

    DenseTensor out(out_shape);
    Eigen::Map<RowMat> mo(out.data().data(), static_cast<Eigen::Index>(m),
                          static_cast<Eigen::Index>(n));
    mo.noalias() = ma * mb;
    return out;
}

namespace {
SvdSplitResult finish_split(const DenseTensor& t, const std::vector<std::size_t>& row_axes,
                            const std::vector<std::size_t>& col_axes, SvdTruncation& trunc,
                            SvdAbsorb absorb, const Eigen::VectorXd& sv, RowMat full_u,
                            RowMat full_v);
} // namespace

SvdSplitResult svd_split(const DenseTensor& t, const std::vector<std::size_t>& row_axes,
                         const std::vector<std::size_t>& col_axes, SvdTruncation& trunc,
                         SvdAbsorb absorb) {
    trunc.validate();
    if (row_axes.size() + col_axes.size() != t.rank())
        throw argument_error("svd_split: bipartition must cover all axes exactly once");
    std::vector<std::size_t> order = row_axes;
    order.insert(order.end(), col_axes.begin(), col_axes.end());
    check_axes(t, order, "svd_split");

    const DenseTensor tp = permute(t, order);
    std::size_t m = 1, n = 1;
    for (std::size_t ax : row_axes) m *= t.shape()[ax];
    for (std::size_t ax : col_axes) n *= t.shape()[ax];

    Eigen::Map<const RowMat> mat(tp.data().data(), static_cast<Eigen::Index>(m),
                                 static_cast<Eigen::Index>(n));
    if (tp.has_nonfinite())
        throw numeric_error("svd_split: input tensor contains non-finite entries");

    Eigen::BDCSVD<RowMat> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // the divide-and-conquer kernel occasionally emits NaNs without flagging
    // failure, so validate the factors as well as the status
    const bool bdc_bad = svd.info() != Eigen::Success ||
                         !svd.singularValues().allFinite() || !svd.matrixU().allFinite() ||
                         !svd.matrixV().allFinite();
    if (bdc_bad) {
        // the divide-and-conquer kernel can fail on rare inputs; the one-sided
        // Jacobi iteration is slower but unconditionally convergent
        Eigen::JacobiSVD<RowMat> jsvd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (jsvd.info() != Eigen::Success) {
            std::ostringstream os;
            os << "svd_split: SVD failed to converge on " << m << "x" << n << " matrix";
            throw numeric_error(os.str());
        }
        return finish_split(t, row_axes, col_axes, trunc, absorb, jsvd.singularValues(),
                            RowMat(jsvd.matrixU()), RowMat(jsvd.matrixV()));
    }

    return finish_split(t, row_axes, col_axes, trunc, absorb, svd.singularValues(),
                        RowMat(svd.matrixU()), RowMat(svd.matrixV()));
}

namespace {
SvdSplitResult finish_split(const DenseTensor& t, const std::vector<std::size_t>& row_axes,
                            const std::vector<std::size_t>& col_axes, SvdTruncation& trunc,
                            SvdAbsorb absorb, const Eigen::VectorXd& sv, RowMat full_u,
                            RowMat full_v) {
    const std::size_t full = static_cast<std::size_t>(sv.size());
    const double smax = full > 0 ? sv(0) : 0.0;

    std::size_t keep = 0;
    for (std::size_t i = 0; i < full; ++i)
        if (sv(static_cast<Eigen::Index>(i)) >= trunc.rel_cutoff * smax) ++keep;
    keep = std::min(keep, trunc.max_rank);
    keep = std::max(keep, std::min(trunc.min_rank, full));
    keep = std::max<std::size_t>(keep, 1); // never produce an empty bond

    double discarded = 0.0;
    for (std::size_t i = keep; i < full; ++i) {
        const double s = sv(static_cast<Eigen::Index>(i));
        discarded += s * s;
    }
    trunc.discarded_weight += discarded;

    RowMat u = full_u.leftCols(static_cast<Eigen::Index>(keep));
    RowMat v = full_v.leftCols(static_cast<Eigen::Index>(keep));
    Eigen::VectorXd s = sv.head(static_cast<Eigen::Index>(keep));

    // Deterministic phase convention: make the largest-modulus entry of each
    // left singular vector real positive.
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index imax = 0;
        u.col(c).cwiseAbs().maxCoeff(&imax);
        const cd pivot = u(imax, c);
        if (std::abs(pivot) > 0.0) {
            const cd phase = pivot / std::abs(pivot);
            u.col(c) *= std::conj(phase);
            v.col(c) *= std::conj(phase); // keeps u * s * v^dagger unchanged
        }
    }

    RowMat left_m = u;
    RowMat right_m = v.adjoint();
    switch (absorb) {
        case SvdAbsorb::right:
            right_m = s.asDiagonal() * right_m;
            break;
        case SvdAbsorb::left:
            left_m = left_m * s.asDiagonal();
            break;
        case SvdAbsorb::separate:
            break;
    }

    std::vector<std::size_t> left_shape;
    for (std::size_t ax : row_axes) left_shape.push_back(t.shape()[ax]);
    left_shape.push_back(keep);
    std::vector<std::size_t> right_shape{keep};
    for (std::size_t ax : col_axes) right_shape.push_back(t.shape()[ax]);

    SvdSplitResult out;
    out.kept_rank = keep;
    out.discarded_weight = discarded;
    if (absorb == SvdAbsorb::separate) out.singular_values = s;

    std::vector<cd> ldata(static_cast<std::size_t>(left_m.rows()) * keep);
    Eigen::Map<RowMat>(ldata.data(), left_m.rows(), left_m.cols()) = left_m;
    out.left = DenseTensor(std::move(left_shape), std::move(ldata));

    std::vector<cd> rdata(keep * static_cast<std::size_t>(right_m.cols()));
    Eigen::Map<RowMat>(rdata.data(), right_m.rows(), right_m.cols()) = right_m;
    out.right = DenseTensor(std::move(right_shape), std::move(rdata));
    return out;
}
} // namespace

} // namespace ptmps
