#include "ptmps/pt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace ptmps {

namespace {

using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<RowMat> as_matrix(DenseTensor& t, std::size_t rows, std::size_t cols) {
    return Eigen::Map<RowMat>(t.data().data(), static_cast<Eigen::Index>(rows),
                              static_cast<Eigen::Index>(cols));
}

DenseTensor from_matrix(const RowMat& m, std::vector<std::size_t> shape) {
    std::vector<cd> data(static_cast<std::size_t>(m.rows() * m.cols()));
    Eigen::Map<RowMat>(data.data(), m.rows(), m.cols()) = m;
    return DenseTensor(std::move(shape), std::move(data));
}

// Orthogonalize site p (QR with positive-diagonal R) and absorb R into p+1.
void shift_center_right(std::vector<DenseTensor>& sites, std::size_t p) {
    DenseTensor& a = sites[p];
    const std::size_t l = a.extent(0), d = a.extent(1), r = a.extent(2);
    const std::size_t k = std::min(l * d, r);

    Eigen::Map<const RowMat> m(a.data().data(), static_cast<Eigen::Index>(l * d),
                               static_cast<Eigen::Index>(r));
    Eigen::HouseholderQR<RowMat> qr(m);
    RowMat q = qr.householderQ() * RowMat::Identity(static_cast<Eigen::Index>(l * d),
                                                    static_cast<Eigen::Index>(k));
    RowMat rr = qr.matrixQR()
                    .topRows(static_cast<Eigen::Index>(k))
                    .template triangularView<Eigen::Upper>();

    for (std::size_t j = 0; j < k; ++j) {
        const cd piv = rr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        if (std::abs(piv) > 0.0) {
            const cd ph = piv / std::abs(piv);
            rr.row(static_cast<Eigen::Index>(j)) *= std::conj(ph);
            q.col(static_cast<Eigen::Index>(j)) *= ph;
        }
    }

    sites[p] = from_matrix(q, {l, d, k});

    DenseTensor& b = sites[p + 1];
    const std::size_t l2 = b.extent(0), d2 = b.extent(1), r2 = b.extent(2);
    Eigen::Map<const RowMat> mb(b.data().data(), static_cast<Eigen::Index>(l2),
                                static_cast<Eigen::Index>(d2 * r2));
    RowMat nb = rr * mb;
    sites[p + 1] = from_matrix(nb, {k, d2, r2});
}

// Truncate the bond between p-1 and p, pushing weight into p-1.
void truncate_bond_left(std::vector<DenseTensor>& sites, std::size_t p, SvdTruncation& trunc) {
    DenseTensor& a = sites[p];
    auto split = svd_split(a, {0}, {1, 2}, trunc, SvdAbsorb::left);
    sites[p] = std::move(split.right);
    // contract right bond of p-1 with the left factor
    sites[p - 1] = contract(sites[p - 1], {2}, split.left, {0});
}

} // namespace

void SystemCoupling::validate() const {
    if (d < 2) throw argument_error("SystemCoupling: d must be >= 2");
    if (lambdas.size() != d)
        throw argument_error("SystemCoupling: lambdas length must equal d");
    for (double l : lambdas)
        if (!std::isfinite(l)) throw argument_error("SystemCoupling: lambdas must be finite");
}

cd b_factor(const SystemCoupling& coupling, const EtaTable& eta, std::size_t k,
            std::size_t alpha, std::size_t beta) {
    coupling.validate();
    if (k > eta.n_mem)
        throw argument_error("b_factor: separation beyond n_mem; apply the memory rule instead");
    const std::size_t D = coupling.liouville_dim();
    if (alpha >= D || beta >= D) throw argument_error("b_factor: Liouville index out of range");

    const std::size_t d = coupling.d;
    const double ls = coupling.lambdas[alpha / d];
    const double lr = coupling.lambdas[alpha % d];
    const double lsp = coupling.lambdas[beta / d];
    const double lrp = coupling.lambdas[beta % d];
    const cd e = eta.values[k];
    return std::exp(-(ls - lr) * (e * lsp - std::conj(e) * lrp));
}

InfluenceGate influence_gate(const SystemCoupling& coupling, const EtaTable& eta, std::size_t k) {
    const std::size_t D = coupling.liouville_dim();
    InfluenceGate gate;
    gate.k = k;
    gate.b.resize(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
    for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = 0; b < D; ++b)
            gate.b(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                b_factor(coupling, eta, k, a, b);
    return gate;
}

DenseTensor dense_pt(const SystemCoupling& coupling, const EtaTable& eta, std::size_t n_steps) {
    coupling.validate();
    if (n_steps < 1 || n_steps > 8)
        throw argument_error("dense_pt: n_steps must be in [1, 8]");
    const std::size_t D = coupling.liouville_dim();
    double entries = std::pow(static_cast<double>(D), static_cast<double>(n_steps));
    if (entries > 1e6) throw argument_error("dense_pt: D^n_steps exceeds the 10^6 entry cap");

    const std::size_t kmax = std::min(n_steps - 1, eta.n_mem);
    std::vector<InfluenceGate> gates;
    for (std::size_t k = 0; k <= kmax; ++k) gates.push_back(influence_gate(coupling, eta, k));

    DenseTensor out(std::vector<std::size_t>(n_steps, D));
    std::vector<std::size_t> idx(n_steps, 0);
    const std::size_t n = out.size();
    for (std::size_t lin = 0; lin < n; ++lin) {
        cd v(1.0, 0.0);
        for (std::size_t i = 0; i < n_steps; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const std::size_t k = i - j;
                if (k > eta.n_mem) continue; // memory truncation: b == 1
                v *= gates[k].b(static_cast<Eigen::Index>(idx[i]),
                                static_cast<Eigen::Index>(idx[j]));
            }
        }
        out[lin] = v;
        for (std::size_t ax = n_steps; ax-- > 0;) {
            if (++idx[ax] < D) break;
            idx[ax] = 0;
        }
    }
    return out;
}

namespace {

// Append a fresh slot and absorb its gate bundle into the chain.  The window
// i0-K .. i0 gains an MPO bond of extent D carrying the new slot's Liouville
// index down to its partners.
void absorb_slot(std::vector<DenseTensor>& sites, const std::vector<InfluenceGate>& gates,
                 std::size_t n_mem, SvdTruncation& trunc) {
    const std::size_t D = gates[0].b.rows();
    const std::size_t i0 = sites.size();
    const std::size_t K = std::min(i0, n_mem);

    // new slot starts as the all-ones physical vector
    sites.emplace_back(std::vector<std::size_t>{1, D, 1},
                       std::vector<cd>(D, cd(1.0, 0.0)));

    if (K == 0) {
        for (std::size_t a = 0; a < D; ++a)
            sites[i0][a] *= gates[0].b(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a));
        return;
    }

    const std::size_t w0 = i0 - K;

    // window start, separation K: right bond grows by D
    {
        const DenseTensor& a = sites[w0];
        const std::size_t l = a.extent(0), r = a.extent(2);
        DenseTensor na({l, D, r * D});
        for (std::size_t li = 0; li < l; ++li)
            for (std::size_t al = 0; al < D; ++al)
                for (std::size_t ri = 0; ri < r; ++ri) {
                    const cd v = a[(li * D + al) * r + ri];
                    for (std::size_t g = 0; g < D; ++g)
                        na[(li * D + al) * (r * D) + ri * D + g] =
                            v * gates[K].b(static_cast<Eigen::Index>(g),
                                           static_cast<Eigen::Index>(al));
                }
        sites[w0] = std::move(na);
    }

    // interior window sites: pass the carried index through, weight by b_k
    for (std::size_t k = K - 1; k >= 1; --k) {
        const std::size_t p = i0 - k;
        const DenseTensor& a = sites[p];
        const std::size_t l = a.extent(0), r = a.extent(2);
        DenseTensor na({l * D, D, r * D});
        for (std::size_t li = 0; li < l; ++li)
            for (std::size_t al = 0; al < D; ++al)
                for (std::size_t ri = 0; ri < r; ++ri) {
                    const cd v = a[(li * D + al) * r + ri];
                    for (std::size_t g = 0; g < D; ++g)
                        na[((li * D + g) * D + al) * (r * D) + ri * D + g] =
                            v * gates[k].b(static_cast<Eigen::Index>(g),
                                           static_cast<Eigen::Index>(al));
                }
        sites[p] = std::move(na);
    }

    // the new slot itself: tie the carried index to its physical index
    {
        DenseTensor na({D, D, 1});
        for (std::size_t a = 0; a < D; ++a)
            na[(a * D + a)] = gates[0].b(static_cast<Eigen::Index>(a),
                                         static_cast<Eigen::Index>(a));
        sites[i0] = std::move(na);
    }

    // compress the window: orthogonalize rightward, truncate leftward, then
    // restore the left-canonical invariant up to the chain end
    const bool dbg = std::getenv("PTMPS_DEBUG_TTI") != nullptr;
    auto sweep = [&](const char* tag) {
        if (!dbg) return;
        for (std::size_t q = 0; q < sites.size(); ++q)
            if (sites[q].has_nonfinite())
                std::fprintf(stderr, "[absorb] i0 %zu %s site %zu NONFINITE (%zu,%zu,%zu)\n",
                             i0, tag, q, sites[q].extent(0), sites[q].extent(1),
                             sites[q].extent(2));
    };
    sweep("window");
    for (std::size_t p = w0; p < i0; ++p) shift_center_right(sites, p);
    sweep("qr1");
    for (std::size_t p = i0; p > w0; --p) truncate_bond_left(sites, p, trunc);
    sweep("trunc");
    for (std::size_t p = w0; p < i0; ++p) shift_center_right(sites, p);
    sweep("qr2");
}

std::vector<InfluenceGate> make_gates(const SystemCoupling& coupling, const EtaTable& eta) {
    std::vector<InfluenceGate> gates;
    for (std::size_t k = 0; k <= eta.n_mem; ++k)
        gates.push_back(influence_gate(coupling, eta, k));
    return gates;
}

} // namespace

ProcessTensorMPS build_finite(const SystemCoupling& coupling, const EtaTable& eta,
                              std::size_t n_steps, SvdTruncation trunc) {
    coupling.validate();
    trunc.validate();
    if (n_steps < 1) throw argument_error("build_finite: n_steps must be >= 1");

    const auto gates = make_gates(coupling, eta);

    ProcessTensorMPS pt;
    pt.mode = ProcessTensorMPS::Mode::finite;
    pt.d = coupling.d;
    pt.dt = eta.dt;
    pt.n_mem = eta.n_mem;
    for (std::size_t i = 0; i < n_steps; ++i)
        absorb_slot(pt.sites, gates, eta.n_mem, trunc);
    pt.discarded_weight = trunc.discarded_weight;
    return pt;
}

ProcessTensorMPS build_tti(const SystemCoupling& coupling, const EtaTable& eta,
                           SvdTruncation trunc, double conv_tol, std::size_t max_slots) {
    coupling.validate();
    trunc.validate();
    if (max_slots == 0) max_slots = 40 * (eta.n_mem + 1) + 60;

    const auto gates = make_gates(coupling, eta);
    const std::size_t d = coupling.d;
    const std::size_t D = d * d;

    // Slot-to-slot repetition cannot be cleaner than the truncation noise the
    // compression injects, so the requested tolerance is floored at a small
    // multiple of the relative cutoff.
    const double eff_tol = std::max(conv_tol, 3.0 * trunc.rel_cutoff);

    std::vector<DenseTensor> sites;
    std::size_t streak = 0;
    std::size_t frozen = 0; // first site index not yet final
    std::vector<std::size_t> recent_bonds;
    bool rank_locked = false;

    for (std::size_t i0 = 0; i0 < max_slots; ++i0) {
        absorb_slot(sites, gates, eta.n_mem, trunc);

        // Readouts are normalized by the chain's total closure, so the overall
        // scalar is free; renormalizing the center keeps thousands of slots
        // from overflowing the floating-point range.
        {
            DenseTensor& center = sites.back();
            double nrm = 0.0;
            for (std::size_t n = 0; n < center.size(); ++n) nrm += std::norm(center[n]);
            nrm = std::sqrt(nrm);
            if (!(nrm > 0.0) || !std::isfinite(nrm))
                throw numeric_error("build_tti: chain norm degenerated");
            for (std::size_t n = 0; n < center.size(); ++n) center[n] /= nrm;
        }

        const std::size_t K = std::min(i0, eta.n_mem);
        if (i0 < K + 1) continue;
        frozen = i0 - K; // sites [0, frozen) are final
        const std::size_t f = frozen - 1;
        if (f < 1) continue;

        // The compressed chain is translation invariant only up to a rotating
        // bond gauge, and only in the physically weighted sense: bond
        // directions of negligible Schmidt weight never settle.  So (a) anchor
        // the newly frozen site to its predecessor by the environment-weighted
        // unitary (Procrustes) gauge on its right bond -- the chain is
        // unchanged since the inverse is pushed into the next site -- and (b)
        // measure convergence in the same weighted norm.
        if (std::getenv("PTMPS_DEBUG_TTI")) {
            std::fprintf(stderr, "[tti] slot %zu f %zu prev (%zu,%zu) cur (%zu,%zu)\n", i0, f,
                         sites[f - 1].extent(0), sites[f - 1].extent(2), sites[f].extent(0),
                         sites[f].extent(2));
            for (std::size_t q = 0; q < sites.size(); ++q)
                if (sites[q].has_nonfinite())
                    std::fprintf(stderr, "[tti] slot %zu site %zu NONFINITE\n", i0, q);
        }

        // A singular value sitting right at the cutoff can keep the frozen
        // bond flickering by one forever.  Once the bond entering the frozen
        // region has plateaued, pin the kept rank to the plateau maximum so
        // the chain can settle into a strict repetition without dropping a
        // direction the open-ended build would have kept.
        if (!rank_locked) {
            recent_bonds.push_back(sites[f].extent(2));
            const std::size_t span = 12;
            // the bond can keep creeping up long after it looks flat, so a
            // plateau only counts once several memory windows have passed
            const bool settled = i0 >= 3 * (K + 1);
            if (settled && recent_bonds.size() >= span) {
                std::size_t lo = recent_bonds[recent_bonds.size() - span];
                std::size_t hi = lo;
                for (std::size_t q = recent_bonds.size() - span; q < recent_bonds.size(); ++q) {
                    lo = std::min(lo, recent_bonds[q]);
                    hi = std::max(hi, recent_bonds[q]);
                }
                // lock only once the bond has genuinely stopped growing: a
                // strict plateau, or a one-wide flicker that lasted the span
                if (hi == lo || (hi - lo == 1 && recent_bonds.size() >= 2 * span)) {
                    trunc.max_rank = std::min(trunc.max_rank, hi);
                    trunc.min_rank = std::min(trunc.max_rank, hi);
                    rank_locked = true;
                    if (std::getenv("PTMPS_DEBUG_TTI"))
                        std::fprintf(stderr, "[tti] slot %zu rank locked at %zu\n", i0,
                                     trunc.min_rank);
                }
            }
        }
        if (sites[f].shape() == sites[f - 1].shape() &&
            sites[f].extent(0) == sites[f].extent(2)) {
            const std::size_t chi = sites[f].extent(0);

            // right environment at bond f (trace-normalized every step to
            // keep the accumulated scale bounded)
            RowMat renv = RowMat::Ones(1, 1);
            for (std::size_t q = sites.size(); q-- > f;) {
                const DenseTensor& s = sites[q];
                const std::size_t l = s.extent(0), r = s.extent(2);
                Eigen::Map<const RowMat> ms(s.data().data(),
                                            static_cast<Eigen::Index>(l * D),
                                            static_cast<Eigen::Index>(r));
                const RowMat big = ms * renv * ms.adjoint(); // (lD x lD)
                RowMat next = RowMat::Zero(static_cast<Eigen::Index>(l),
                                           static_cast<Eigen::Index>(l));
                for (std::size_t li = 0; li < l; ++li)
                    for (std::size_t lj = 0; lj < l; ++lj) {
                        cd acc(0.0, 0.0);
                        for (std::size_t al = 0; al < D; ++al)
                            acc += big(static_cast<Eigen::Index>(li * D + al),
                                       static_cast<Eigen::Index>(lj * D + al));
                        next(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(lj)) = acc;
                    }
                const double tr = std::abs(next.trace());
                if (!(tr > 0.0))
                    throw numeric_error("build_tti: degenerate right environment");
                renv = next / tr;
            }

            Eigen::Map<const RowMat> y(sites[f - 1].data().data(),
                                       static_cast<Eigen::Index>(chi * D),
                                       static_cast<Eigen::Index>(chi));
            RowMat g;
            {
                Eigen::Map<const RowMat> x(sites[f].data().data(),
                                           static_cast<Eigen::Index>(chi * D),
                                           static_cast<Eigen::Index>(chi));
                const RowMat m = x.adjoint() * y * renv;
                Eigen::JacobiSVD<RowMat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
                g = svd.matrixU() * svd.matrixV().adjoint();
                Eigen::Map<RowMat> xf(sites[f].data().data(),
                                      static_cast<Eigen::Index>(chi * D),
                                      static_cast<Eigen::Index>(chi));
                xf = (xf * g).eval();
            }
            {
                DenseTensor& nxt = sites[f + 1];
                const std::size_t d2 = nxt.extent(1), r2 = nxt.extent(2);
                Eigen::Map<RowMat> xn(nxt.data().data(), static_cast<Eigen::Index>(chi),
                                      static_cast<Eigen::Index>(d2 * r2));
                xn = (g.adjoint() * xn).eval();
            }

            Eigen::Map<const RowMat> x(sites[f].data().data(),
                                       static_cast<Eigen::Index>(chi * D),
                                       static_cast<Eigen::Index>(chi));
            const RowMat diff = x - y;
            const double num = std::abs((diff * renv * diff.adjoint()).trace());
            const double den = std::abs((y * renv * y.adjoint()).trace());
            if (std::getenv("PTMPS_DEBUG_TTI"))
                std::fprintf(stderr, "[tti] slot %zu chi %zu residual %.3e\n", i0, chi,
                             std::sqrt(num / std::max(den, 1e-300)));
            if (std::sqrt(num) <= eff_tol * std::max(std::sqrt(den), 1e-300)) {
                ++streak;
            } else {
                streak = 0;
            }
        } else {
            streak = 0;
        }

        if (streak >= 6) {
            ProcessTensorMPS pt;
            pt.mode = ProcessTensorMPS::Mode::tti;
            pt.d = d;
            pt.dt = eta.dt;
            pt.n_mem = eta.n_mem;
            pt.bulk = sites[f];
            pt.sites.assign(sites.begin(), sites.begin() + static_cast<std::ptrdiff_t>(f));
            pt.discarded_weight = trunc.discarded_weight;

            // Capped transfer matrix of the bulk tensor.
            const std::size_t chi = pt.bulk.extent(0);
            if (pt.bulk.extent(2) != chi)
                throw numeric_error("build_tti: converged bulk tensor has mismatched bonds");
            RowMat kmat = RowMat::Zero(static_cast<Eigen::Index>(chi),
                                       static_cast<Eigen::Index>(chi));
            for (std::size_t s = 0; s < d; ++s) {
                const std::size_t al = s * d + s;
                for (std::size_t li = 0; li < chi; ++li)
                    for (std::size_t ri = 0; ri < chi; ++ri)
                        kmat(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(ri)) +=
                            pt.bulk[(li * D + al) * chi + ri];
            }
            kmat /= static_cast<double>(d);

            // Dominant eigenpair by power iteration.
            Eigen::VectorXcd v = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(chi));
            v.normalize();
            cd lambda(0.0, 0.0);
            bool ok = false;
            for (std::size_t it = 0; it < 10000; ++it) {
                Eigen::VectorXcd w = kmat * v;
                lambda = v.dot(w); // v^dagger K v
                if ((w - lambda * v).norm() <= 1e-12 * std::max(w.norm(), 1e-300)) {
                    v = w.normalized();
                    ok = true;
                    break;
                }
                const double n = w.norm();
                if (!(n > 0.0))
                    throw numeric_error("build_tti: capped transfer map annihilated the probe");
                v = w / n;
            }
            if (!ok || std::abs(lambda) <= 0.0)
                throw numeric_error(
                    "build_tti: power iteration on the capped transfer map did not converge");

            // Scale the bulk so the capped transfer has unit dominant
            // eigenvalue; fix the cap's phase for determinism.
            for (std::size_t n = 0; n < pt.bulk.size(); ++n) pt.bulk[n] /= lambda;
            Eigen::Index imax = 0;
            v.cwiseAbs().maxCoeff(&imax);
            const cd piv = v(imax);
            if (std::abs(piv) > 0.0) v *= std::conj(piv) / std::abs(piv);

            DenseTensor cap({chi});
            for (std::size_t n = 0; n < chi; ++n) cap[n] = v(static_cast<Eigen::Index>(n));
            pt.cap = std::move(cap);
            return pt;
        }
    }

    std::ostringstream os;
    os << "build_tti: bulk tensor did not reach a fixed point within " << max_slots
       << " slots (tolerance " << eff_tol << ")";
    throw numeric_error(os.str());
}

std::vector<std::size_t> bond_profile(const ProcessTensorMPS& pt) {
    std::vector<std::size_t> bonds;
    for (const auto& s : pt.sites) bonds.push_back(s.extent(2));
    if (pt.mode == ProcessTensorMPS::Mode::tti) bonds.push_back(pt.bulk.extent(2));
    return bonds;
}

DenseTensor mps_to_dense(const ProcessTensorMPS& pt) {
    if (pt.mode != ProcessTensorMPS::Mode::finite)
        throw argument_error("mps_to_dense: finite mode only");
    const std::size_t D = pt.liouville_dim();
    double entries = 1.0;
    for (std::size_t i = 0; i < pt.length(); ++i) entries *= static_cast<double>(D);
    if (entries > 1e6) throw argument_error("mps_to_dense: result exceeds the 10^6 entry cap");

    DenseTensor acc({1});
    acc[0] = cd(1.0, 0.0);
    for (const auto& site : pt.sites)
        acc = contract(acc, {acc.rank() - 1}, site, {0});
    // drop the trailing boundary bond of extent 1
    std::vector<std::size_t> shape(acc.shape().begin(), acc.shape().end() - 1);
    if (shape.empty()) shape.push_back(1);
    return acc.reshaped(std::move(shape));
}

} // namespace ptmps
