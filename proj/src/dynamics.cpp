#include "ptmps/dynamics.hpp"

#include <cmath>

namespace ptmps {

namespace {

using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

void check_square(const Eigen::MatrixXcd& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols())
        throw dimension_error(std::string(what) + ": matrix must be square and non-empty");
}

// Averaged diagonal closure of one site: K(l, r) = (1/d) sum_s A[l, (s,s), r].
Eigen::MatrixXcd capped_transfer(const DenseTensor& a, std::size_t d) {
    const std::size_t l = a.extent(0), D = a.extent(1), r = a.extent(2);
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(l),
                                                static_cast<Eigen::Index>(r));
    for (std::size_t s = 0; s < d; ++s) {
        const std::size_t al = s * d + s;
        for (std::size_t li = 0; li < l; ++li)
            for (std::size_t ri = 0; ri < r; ++ri)
                k(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(ri)) +=
                    a[(li * D + al) * r + ri];
    }
    return k / static_cast<double>(d);
}

// closures[m] caps sites m..end; length n_steps + 1.
std::vector<Eigen::VectorXcd> future_closures(const ProcessTensorMPS& pt, std::size_t n_steps) {
    std::vector<Eigen::VectorXcd> c(n_steps + 1);
    if (pt.mode == ProcessTensorMPS::Mode::finite) {
        const std::size_t N = pt.length();
        Eigen::VectorXcd cur = Eigen::VectorXcd::Ones(1);
        // walk in from the far end; store the entries we will use
        for (std::size_t m = N; m-- > 0;) {
            if (m + 1 <= n_steps) c[m + 1] = cur;
            cur = capped_transfer(pt.sites[m], pt.d) * cur;
        }
        c[0] = cur;
        return c;
    }
    const std::size_t ramp = pt.sites.size();
    Eigen::VectorXcd cap(static_cast<Eigen::Index>(pt.cap.size()));
    for (std::size_t i = 0; i < pt.cap.size(); ++i)
        cap(static_cast<Eigen::Index>(i)) = pt.cap[i];
    for (std::size_t m = ramp; m <= n_steps; ++m) c[m] = cap;
    Eigen::VectorXcd cur = cap;
    for (std::size_t m = ramp; m-- > 0;) {
        cur = capped_transfer(pt.sites[m], pt.d) * cur;
        if (m <= n_steps) c[m] = cur;
    }
    return c;
}

} // namespace

Eigen::MatrixXcd SystemModel::hamiltonian(double t) const {
    Eigen::MatrixXcd h = h0;
    for (const auto& p : pulses)
        if (t >= p.t0 && t < p.t1) h += p.h;
    return h;
}

void SystemModel::validate() const {
    if (d < 2) throw argument_error("SystemModel: d must be >= 2");
    if (h0.rows() != static_cast<Eigen::Index>(d) || h0.cols() != static_cast<Eigen::Index>(d))
        throw dimension_error("SystemModel: h0 must be d x d");
    const double scale = std::max(h0.norm(), 1.0);
    if ((h0 - h0.adjoint()).norm() > 1e-12 * scale)
        throw argument_error("SystemModel: h0 must be Hermitian");
    for (const auto& p : pulses) {
        if (p.h.rows() != static_cast<Eigen::Index>(d) ||
            p.h.cols() != static_cast<Eigen::Index>(d))
            throw dimension_error("SystemModel: pulse term must be d x d");
        if ((p.h - p.h.adjoint()).norm() > 1e-12 * std::max(p.h.norm(), 1.0))
            throw argument_error("SystemModel: pulse term must be Hermitian");
        if (!(p.t1 > p.t0)) throw argument_error("SystemModel: pulse needs t1 > t0");
    }
}

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) {
    check_square(rho, "vectorize");
    const Eigen::Index d = rho.rows();
    Eigen::VectorXcd v(d * d);
    for (Eigen::Index sp = 0; sp < d; ++sp)
        for (Eigen::Index s = 0; s < d; ++s) v(sp * d + s) = rho(sp, s);
    return v;
}

Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, std::size_t d) {
    if (v.size() != static_cast<Eigen::Index>(d * d))
        throw dimension_error("unvectorize: length must be d^2");
    Eigen::MatrixXcd rho(d, d);
    for (Eigen::Index sp = 0; sp < static_cast<Eigen::Index>(d); ++sp)
        for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(d); ++s)
            rho(sp, s) = v(sp * static_cast<Eigen::Index>(d) + s);
    return rho;
}

Eigen::MatrixXcd left_superop(const Eigen::MatrixXcd& o) {
    check_square(o, "left_superop");
    return kron(o, Eigen::MatrixXcd::Identity(o.rows(), o.cols()));
}

Eigen::MatrixXcd right_superop(const Eigen::MatrixXcd& o) {
    check_square(o, "right_superop");
    return kron(Eigen::MatrixXcd::Identity(o.rows(), o.cols()), o.transpose());
}

Eigen::MatrixXcd unitary_superop(const Eigen::MatrixXcd& h, double dt) {
    check_square(h, "unitary_superop");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw numeric_error("unitary_superop: eigendecomposition failed");
    const Eigen::VectorXcd phases =
        (cd(0.0, -dt) * es.eigenvalues().cast<cd>()).array().exp();
    const Eigen::MatrixXcd u =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return kron(u, u.conjugate());
}

cd expectation(const Eigen::MatrixXcd& o, const Eigen::MatrixXcd& rho) {
    if (o.rows() != rho.rows() || o.cols() != rho.cols())
        throw dimension_error("expectation: operator/state size mismatch");
    return (o * rho).trace();
}

PropagationResult propagate(const ProcessTensorMPS& pt, const SystemModel& model,
                            const Eigen::MatrixXcd& rho0, std::size_t n_steps,
                            Splitting splitting,
                            const std::vector<SlotIntervention>& interventions) {
    model.validate();
    if (model.d != pt.d) throw dimension_error("propagate: model and PT dimensions differ");
    if (rho0.rows() != static_cast<Eigen::Index>(pt.d) ||
        rho0.cols() != static_cast<Eigen::Index>(pt.d))
        throw dimension_error("propagate: rho0 must be d x d");
    if (pt.mode == ProcessTensorMPS::Mode::finite && n_steps > pt.length())
        throw argument_error("propagate: n_steps exceeds the finite chain length");
    for (const auto& iv : interventions) {
        if (iv.step > n_steps) throw argument_error("propagate: intervention beyond trajectory");
        if (iv.superop.rows() != static_cast<Eigen::Index>(pt.liouville_dim()) ||
            iv.superop.cols() != static_cast<Eigen::Index>(pt.liouville_dim()))
            throw dimension_error("propagate: intervention superoperator must be d^2 x d^2");
    }

    const std::size_t d = pt.d;
    const std::size_t D = pt.liouville_dim();
    const double dt = pt.dt;

    const auto closures = future_closures(pt, n_steps);
    const cd s0 = closures[0](0);
    if (!(std::abs(s0) > 0.0))
        throw numeric_error("propagate: degenerate left closure; cannot normalize");

    PropagationResult out;
    out.times.reserve(n_steps + 1);
    out.states.reserve(n_steps + 1);
    out.times.push_back(0.0);
    out.states.push_back(rho0);

    RowMat boundary(1, static_cast<Eigen::Index>(D));
    boundary.row(0) = vectorize(rho0).transpose();

    auto apply_interventions = [&](std::size_t step) {
        for (const auto& iv : interventions)
            if (iv.step == step) boundary = boundary * iv.superop.transpose();
    };
    apply_interventions(0);

    // cached full/half-step propagators for the static-Hamiltonian case
    Eigen::MatrixXcd g_full, g_half_a, g_half_b;
    if (!model.time_dependent()) {
        if (splitting == Splitting::first_order) {
            g_full = unitary_superop(model.h0, dt);
        } else {
            g_half_a = unitary_superop(model.h0, dt / 2.0);
            g_half_b = g_half_a;
        }
    }

    for (std::size_t m = 1; m <= n_steps; ++m) {
        const double t_prev = static_cast<double>(m - 1) * dt;
        if (splitting == Splitting::symmetric) {
            const Eigen::MatrixXcd& g1 = model.time_dependent()
                                             ? unitary_superop(model.hamiltonian(t_prev), dt / 2.0)
                                             : g_half_a;
            boundary = boundary * g1.transpose();
        }

        const DenseTensor& site = pt.site_at(m - 1);
        const std::size_t l = site.extent(0), r = site.extent(2);
        if (static_cast<Eigen::Index>(l) != boundary.rows())
            throw dimension_error("propagate: bond mismatch along the chain");
        RowMat next = RowMat::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(D));
        for (std::size_t li = 0; li < l; ++li)
            for (std::size_t al = 0; al < D; ++al) {
                const cd b = boundary(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(al));
                if (b == cd(0.0, 0.0)) continue;
                for (std::size_t ri = 0; ri < r; ++ri)
                    next(static_cast<Eigen::Index>(ri), static_cast<Eigen::Index>(al)) +=
                        b * site[(li * D + al) * r + ri];
            }
        boundary = std::move(next);

        const Eigen::MatrixXcd& g2 =
            splitting == Splitting::first_order
                ? (model.time_dependent() ? g_full = unitary_superop(model.hamiltonian(t_prev), dt)
                                          : g_full)
                : (model.time_dependent()
                       ? g_half_b = unitary_superop(model.hamiltonian(t_prev + dt / 2.0), dt / 2.0)
                       : g_half_b);
        boundary = boundary * g2.transpose();

        Eigen::VectorXcd v = (boundary.transpose() * closures[m]) / s0;
        out.times.push_back(static_cast<double>(m) * dt);
        out.states.push_back(unvectorize(v, d));
        apply_interventions(m);
    }
    return out;
}

std::vector<cd> two_time_correlator(const ProcessTensorMPS& pt, const SystemModel& model,
                                    const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& a,
                                    std::size_t i, const Eigen::MatrixXcd& b,
                                    std::size_t n_steps, Splitting splitting) {
    if (i > n_steps) throw argument_error("two_time_correlator: i must be <= n_steps");
    std::vector<SlotIntervention> ivs{{i, left_superop(a)}};
    const auto traj = propagate(pt, model, rho0, n_steps, splitting, ivs);
    std::vector<cd> out;
    out.reserve(n_steps - i + 1);
    // at equal times the recorded state predates the intervention
    out.push_back(expectation(b * a, traj.states[i]));
    for (std::size_t j = i + 1; j <= n_steps; ++j) out.push_back(expectation(b, traj.states[j]));
    return out;
}

} // namespace ptmps
