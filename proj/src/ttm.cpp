#include "ptmps/ttm.hpp"

namespace ptmps {

DynamicalMapSet extract_maps(const ProcessTensorMPS& pt, const SystemModel& model,
                             std::size_t n_steps, Splitting splitting) {
    model.validate();
    if (model.time_dependent())
        throw argument_error("extract_maps: requires a time-independent Hamiltonian");
    if (n_steps < 1) throw argument_error("extract_maps: n_steps must be >= 1");

    const std::size_t d = pt.d;
    const std::size_t D = pt.liouville_dim();

    DynamicalMapSet out;
    out.d = d;
    out.dt = pt.dt;
    out.maps.assign(n_steps, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(D),
                                                    static_cast<Eigen::Index>(D)));

    // one trajectory per matrix-unit initial condition fills one column of
    // every map
    for (std::size_t beta = 0; beta < D; ++beta) {
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d),
                                                       static_cast<Eigen::Index>(d));
        rho0(static_cast<Eigen::Index>(beta / d), static_cast<Eigen::Index>(beta % d)) = 1.0;
        const auto traj = propagate(pt, model, rho0, n_steps, splitting);
        for (std::size_t n = 1; n <= n_steps; ++n)
            out.maps[n - 1].col(static_cast<Eigen::Index>(beta)) = vectorize(traj.states[n]);
    }
    return out;
}

TransferTensorSet transfer_tensors(const DynamicalMapSet& maps) {
    if (maps.count() < 1) throw argument_error("transfer_tensors: need at least one map");

    TransferTensorSet out;
    out.d = maps.d;
    out.dt = maps.dt;
    out.tensors.reserve(maps.count());
    for (std::size_t n = 1; n <= maps.count(); ++n) {
        Eigen::MatrixXcd t = maps.maps[n - 1];
        for (std::size_t m = 1; m < n; ++m) t -= out.tensors[m - 1] * maps.maps[n - m - 1];
        out.tensors.push_back(std::move(t));
    }
    return out;
}

std::vector<Eigen::MatrixXcd> ttm_propagate(const TransferTensorSet& ttm,
                                            const Eigen::MatrixXcd& rho0,
                                            std::size_t n_steps) {
    const std::size_t d = ttm.d;
    if (rho0.rows() != static_cast<Eigen::Index>(d) || rho0.cols() != static_cast<Eigen::Index>(d))
        throw dimension_error("ttm_propagate: rho0 must be d x d");
    if (ttm.count() < 1) throw argument_error("ttm_propagate: empty transfer tensor set");

    std::vector<Eigen::VectorXcd> vecs;
    vecs.reserve(n_steps + 1);
    vecs.push_back(vectorize(rho0));
    for (std::size_t n = 1; n <= n_steps; ++n) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d * d));
        const std::size_t kmax = std::min(n, ttm.count());
        for (std::size_t m = 1; m <= kmax; ++m) v += ttm.tensors[m - 1] * vecs[n - m];
        vecs.push_back(std::move(v));
    }

    std::vector<Eigen::MatrixXcd> out;
    out.reserve(vecs.size());
    for (const auto& v : vecs) out.push_back(unvectorize(v, d));
    return out;
}

} // namespace ptmps
