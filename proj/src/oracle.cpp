#include "ptmps/oracle.hpp"

#include <cmath>
#include <sstream>

namespace ptmps {

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::MatrixXcd lowering(std::size_t levels) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(levels),
                                                static_cast<Eigen::Index>(levels));
    for (std::size_t n = 1; n < levels; ++n)
        a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) =
            std::sqrt(static_cast<double>(n));
    return a;
}

} // namespace

void EdModel::validate() const {
    system.validate();
    if (lambdas.size() != system.d)
        throw argument_error("EdModel: lambdas length must equal system dimension");
    for (const auto& m : modes)
        if (!(m.omega > 0.0)) throw argument_error("EdModel: mode frequencies must be > 0");
    if (!zero_temperature && !(beta > 0.0))
        throw argument_error("EdModel: beta must be > 0 (or zero-temperature flag set)");
}

std::size_t EdModel::bath_dim() const {
    std::size_t dim = 1;
    for (std::size_t k = 0; k < modes.size(); ++k) dim *= n_max + 1;
    return dim;
}

double occupancy_tail(double beta, double omega, std::size_t n_max, bool zero_temperature) {
    if (zero_temperature) return 0.0;
    if (!(beta > 0.0) || !(omega > 0.0))
        throw argument_error("occupancy_tail: beta and omega must be > 0");
    return std::exp(-beta * omega * static_cast<double>(n_max + 1));
}

PropagationResult ed_evolve(const EdModel& model, const Eigen::MatrixXcd& rho0, double dt,
                            std::size_t n_steps, double tail_tol) {
    model.validate();
    if (!(dt > 0.0)) throw argument_error("ed_evolve: dt must be > 0");
    const std::size_t d = model.system.d;
    if (rho0.rows() != static_cast<Eigen::Index>(d) || rho0.cols() != static_cast<Eigen::Index>(d))
        throw dimension_error("ed_evolve: rho0 must be d x d");

    const std::size_t bdim = model.bath_dim();
    const std::size_t dim = d * bdim;
    if (dim > 20000) throw argument_error("ed_evolve: total dimension exceeds the 2*10^4 cap");

    for (const auto& m : model.modes) {
        const double tail = occupancy_tail(model.beta, m.omega, model.n_max,
                                           model.zero_temperature);
        if (tail > tail_tol) {
            std::ostringstream os;
            os << "ed_evolve: thermal occupancy tail " << tail << " at omega " << m.omega
               << " exceeds tolerance " << tail_tol << "; raise n_max";
            throw numeric_error(os.str());
        }
    }

    const std::size_t levels = model.n_max + 1;
    const std::size_t nm = model.modes.size();

    // bath operators on the full bath space
    Eigen::MatrixXcd hb = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(bdim),
                                                 static_cast<Eigen::Index>(bdim));
    Eigen::MatrixXcd x = hb;
    const Eigen::MatrixXcd a1 = lowering(levels);
    const Eigen::MatrixXcd n1 = a1.adjoint() * a1;
    for (std::size_t k = 0; k < nm; ++k) {
        Eigen::MatrixXcd num(1, 1), low(1, 1);
        num(0, 0) = 1.0;
        low(0, 0) = 1.0;
        for (std::size_t j = 0; j < nm; ++j) {
            const Eigen::MatrixXcd eye =
                Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(levels),
                                           static_cast<Eigen::Index>(levels));
            num = kron(num, j == k ? n1 : eye);
            low = kron(low, j == k ? a1 : eye);
        }
        hb += model.modes[k].omega * num;
        x += model.modes[k].g * low.adjoint() + std::conj(model.modes[k].g) * low;
    }

    Eigen::MatrixXcd os = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d),
                                                 static_cast<Eigen::Index>(d));
    for (std::size_t s = 0; s < d; ++s)
        os(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = model.lambdas[s];

    const Eigen::MatrixXcd eye_s =
        Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const Eigen::MatrixXcd eye_b =
        Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(bdim),
                                   static_cast<Eigen::Index>(bdim));

    // thermal bath state (diagonal product over modes; mode 0 is the slowest
    // digit of the mixed-radix bath index)
    Eigen::VectorXd pbath = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(bdim));
    if (!model.zero_temperature) {
        for (Eigen::Index idx = 0; idx < pbath.size(); ++idx) {
            std::size_t rest = static_cast<std::size_t>(idx);
            double w = 1.0;
            for (std::size_t k = nm; k-- > 0;) {
                const std::size_t digit = rest % levels;
                rest /= levels;
                double z = 0.0;
                for (std::size_t n = 0; n < levels; ++n)
                    z += std::exp(-model.beta * model.modes[k].omega * static_cast<double>(n));
                w *= std::exp(-model.beta * model.modes[k].omega * static_cast<double>(digit)) / z;
            }
            pbath(idx) = w;
        }
    } else {
        pbath.setZero();
        pbath(0) = 1.0;
    }

    PropagationResult out;
    out.times.push_back(0.0);
    out.states.push_back(rho0);

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                  static_cast<Eigen::Index>(dim));
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(bdim); ++b)
        for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(d); ++s)
            for (Eigen::Index sp = 0; sp < static_cast<Eigen::Index>(d); ++sp)
                rho(sp * static_cast<Eigen::Index>(bdim) + b,
                    s * static_cast<Eigen::Index>(bdim) + b) = rho0(sp, s) * pbath(b);

    Eigen::MatrixXcd h_prev;
    Eigen::MatrixXcd u;
    for (std::size_t m = 1; m <= n_steps; ++m) {
        const double t_prev = static_cast<double>(m - 1) * dt;
        const Eigen::MatrixXcd hs = model.system.hamiltonian(t_prev);
        if (u.size() == 0 || hs != h_prev) {
            h_prev = hs;
            const Eigen::MatrixXcd htot = kron(hs, eye_b) + kron(eye_s, hb) + kron(os, x);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(htot);
            if (es.info() != Eigen::Success)
                throw numeric_error("ed_evolve: eigendecomposition failed");
            const Eigen::VectorXcd ph =
                (cd(0.0, -dt) * es.eigenvalues().cast<cd>()).array().exp();
            u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        }
        rho = u * rho * u.adjoint();

        Eigen::MatrixXcd rs = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d),
                                                     static_cast<Eigen::Index>(d));
        for (Eigen::Index sp = 0; sp < static_cast<Eigen::Index>(d); ++sp)
            for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(d); ++s)
                for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(bdim); ++b)
                    rs(sp, s) += rho(sp * static_cast<Eigen::Index>(bdim) + b,
                                     s * static_cast<Eigen::Index>(bdim) + b);
        out.times.push_back(static_cast<double>(m) * dt);
        out.states.push_back(std::move(rs));
    }
    return out;
}

Eigen::MatrixXcd dense_contract(const DenseTensor& f, const SystemModel& model,
                                const Eigen::MatrixXcd& rho0, double dt, Splitting splitting,
                                const std::vector<SlotIntervention>& interventions) {
    model.validate();
    const std::size_t d = model.d;
    const std::size_t D = d * d;
    const std::size_t n = f.rank();
    if (n < 1) throw argument_error("dense_contract: tensor must have at least one slot");
    for (std::size_t a = 0; a < n; ++a)
        if (f.extent(a) != D)
            throw dimension_error("dense_contract: every slot extent must be d^2");
    if (rho0.rows() != static_cast<Eigen::Index>(d) || rho0.cols() != static_cast<Eigen::Index>(d))
        throw dimension_error("dense_contract: rho0 must be d x d");

    const Eigen::MatrixXcd eye =
        Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
    auto interv = [&](std::size_t step) {
        Eigen::MatrixXcd s = eye;
        for (const auto& iv : interventions)
            if (iv.step == step) s = iv.superop * s;
        return s;
    };

    // pre/post step propagators
    std::vector<Eigen::MatrixXcd> pre(n + 1), post(n + 1);
    for (std::size_t m = 1; m <= n; ++m) {
        const double t_prev = static_cast<double>(m - 1) * dt;
        if (splitting == Splitting::first_order) {
            pre[m] = eye;
            post[m] = unitary_superop(model.hamiltonian(t_prev), dt);
        } else {
            pre[m] = unitary_superop(model.hamiltonian(t_prev), dt / 2.0);
            post[m] = unitary_superop(model.hamiltonian(t_prev + dt / 2.0), dt / 2.0);
        }
    }

    const Eigen::VectorXcd v1 = pre[1] * (interv(0) * vectorize(rho0));
    std::vector<Eigen::MatrixXcd> hop(n); // hop[m] links slot m to slot m+1
    for (std::size_t m = 1; m < n; ++m) hop[m] = pre[m + 1] * interv(m) * post[m];

    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(D));
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t lin = 0; lin < f.size(); ++lin) {
        cd amp = v1(static_cast<Eigen::Index>(idx[0]));
        for (std::size_t m = 1; m < n && amp != cd(0.0, 0.0); ++m)
            amp *= hop[m](static_cast<Eigen::Index>(idx[m]), static_cast<Eigen::Index>(idx[m - 1]));
        amp *= f[lin];
        if (amp != cd(0.0, 0.0)) out += amp * post[n].col(static_cast<Eigen::Index>(idx[n - 1]));
        for (std::size_t ax = n; ax-- > 0;) {
            if (++idx[ax] < D) break;
            idx[ax] = 0;
        }
    }
    return unvectorize(out, d);
}

} // namespace ptmps
