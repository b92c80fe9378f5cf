#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ptmps/pt.hpp"

using namespace ptmps;

namespace {

EtaTable table_from(std::vector<cd> values, double dt) {
    EtaTable t;
    t.dt = dt;
    t.n_mem = values.size() - 1;
    t.values = std::move(values);
    return t;
}

SystemCoupling spin_coupling() {
    SystemCoupling c;
    c.d = 2;
    c.lambdas = {1.0, -1.0};
    return c;
}

EtaTable physical_eta(double dt, std::size_t n_mem) {
    BathSpec b;
    b.kind = BathSpec::Kind::discrete;
    b.modes.push_back({cd(0.45, 0.0), 1.1});
    b.modes.push_back({cd(0.3, 0.15), 0.6});
    b.beta = 2.0;
    return eta_table(b, dt, n_mem);
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    REQUIRE(a.shape() == b.shape());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const DenseTensor& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

} // namespace

TEST_CASE("pairwise influence weight: pinned value and structure") {
    auto c = spin_coupling();
    auto eta = table_from({cd(0.0, 0.0), cd(0.3, 0.1)}, 0.1);

    // alpha = beta = 1 decodes to (s, r) = (0, 1): exponent
    //   -(l0 - l1)(eta l0 - conj(eta) l1) = -2 * 0.6 = -1.2
    const cd got = b_factor(c, eta, 1, 1, 1);
    CHECK(std::abs(got - cd(std::exp(-1.2), 0.0)) < 1e-15);
    CHECK(got.real() == doctest::Approx(0.30119421191220214).epsilon(1e-15));

    // diagonal later index is exactly neutral, whatever the partner
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t beta = 0; beta < 4; ++beta)
            CHECK(b_factor(c, eta, 1, s * 2 + s, beta) == cd(1.0, 0.0));

    CHECK_THROWS_AS(b_factor(c, eta, 2, 0, 0), argument_error);
    CHECK_THROWS_AS(b_factor(c, eta, 0, 4, 0), argument_error);
}

TEST_CASE("influence gate collects all matrix elements") {
    auto c = spin_coupling();
    auto eta = table_from({cd(0.05, 0.02), cd(0.3, 0.1)}, 0.1);
    auto gate = influence_gate(c, eta, 1);
    CHECK(gate.k == 1);
    CHECK(gate.b.rows() == 4);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            CHECK(gate.b(a, b) == b_factor(c, eta, 1, a, b));
}

TEST_CASE("dense tensor: two slots by hand") {
    auto c = spin_coupling();
    auto eta = table_from({cd(0.05, 0.02), cd(0.3, 0.1)}, 0.1);
    auto f = dense_pt(c, eta, 2);
    REQUIRE(f.shape() == std::vector<std::size_t>{4, 4});
    auto g0 = influence_gate(c, eta, 0);
    auto g1 = influence_gate(c, eta, 1);
    for (std::size_t a1 = 0; a1 < 4; ++a1)
        for (std::size_t a2 = 0; a2 < 4; ++a2) {
            const cd want = g0.b(a1, a1) * g0.b(a2, a2) * g1.b(a2, a1);
            CHECK(std::abs(f.at({a1, a2}) - want) < 1e-15);
        }
}

TEST_CASE("memory truncation drops separated pairs") {
    auto c = spin_coupling();
    auto eta_short = table_from({cd(0.05, 0.02), cd(0.3, 0.1)}, 0.1);
    auto f = dense_pt(c, eta_short, 3); // separation 2 contributes nothing
    auto g0 = influence_gate(c, eta_short, 0);
    auto g1 = influence_gate(c, eta_short, 1);
    for (std::size_t a1 = 0; a1 < 4; ++a1)
        for (std::size_t a2 = 0; a2 < 4; ++a2)
            for (std::size_t a3 = 0; a3 < 4; ++a3) {
                const cd want = g0.b(a1, a1) * g0.b(a2, a2) * g0.b(a3, a3) * g1.b(a2, a1) *
                                g1.b(a3, a2);
                CHECK(std::abs(f.at({a1, a2, a3}) - want) < 1e-14);
            }
}

TEST_CASE("dense tensor caps") {
    auto c = spin_coupling();
    auto eta = table_from({cd(0.0, 0.0)}, 0.1);
    CHECK_THROWS_AS(dense_pt(c, eta, 9), argument_error);
    CHECK_THROWS_AS(dense_pt(c, eta, 0), argument_error);
    SystemCoupling big;
    big.d = 6;
    big.lambdas.assign(6, 0.5);
    CHECK_THROWS_AS(dense_pt(big, eta, 5), argument_error); // 36^5 > 10^6
}

TEST_CASE("sequential builder reproduces the dense tensor exactly") {
    auto c = spin_coupling();
    for (std::size_t n_mem : {std::size_t(1), std::size_t(2), std::size_t(4)}) {
        auto eta = physical_eta(0.15, n_mem);
        for (std::size_t n = 1; n <= 5; ++n) {
            SvdTruncation trunc;
            trunc.rel_cutoff = 1e-13;
            auto pt = build_finite(c, eta, n, trunc);
            CHECK(pt.length() == n);
            CHECK(pt.sites.front().extent(0) == 1);
            CHECK(pt.sites.back().extent(2) == 1);
            auto dense = dense_pt(c, eta, n);
            auto rebuilt = mps_to_dense(pt);
            const double scale = max_abs(dense);
            CHECK(max_abs_diff(dense, rebuilt) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("three-level coupling also matches the dense oracle") {
    SystemCoupling c;
    c.d = 3;
    c.lambdas = {1.0, 0.0, -1.0};
    auto eta = physical_eta(0.1, 2);
    SvdTruncation trunc;
    trunc.rel_cutoff = 1e-13;
    auto pt = build_finite(c, eta, 4, trunc);
    auto dense = dense_pt(c, eta, 4);
    auto rebuilt = mps_to_dense(pt);
    CHECK(max_abs_diff(dense, rebuilt) <= 1e-10 * max_abs(dense));
}

TEST_CASE("zero coupling collapses every bond") {
    SystemCoupling c = spin_coupling();
    auto eta = table_from({cd(0.0, 0.0), cd(0.0, 0.0), cd(0.0, 0.0)}, 0.1);
    SvdTruncation trunc;
    trunc.rel_cutoff = 1e-12;
    auto pt = build_finite(c, eta, 6, trunc);
    for (std::size_t b : bond_profile(pt)) CHECK(b == 1);
    auto dense = mps_to_dense(pt);
    for (std::size_t i = 0; i < dense.size(); ++i)
        CHECK(std::abs(dense[i] - cd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("truncation reduces the bond profile monotonically in tolerance") {
    auto c = spin_coupling();
    auto eta = physical_eta(0.2, 4);
    SvdTruncation loose, tight;
    loose.rel_cutoff = 1e-3;
    tight.rel_cutoff = 1e-13;
    auto pt_loose = build_finite(c, eta, 8, loose);
    auto pt_tight = build_finite(c, eta, 8, tight);
    auto b_loose = bond_profile(pt_loose);
    auto b_tight = bond_profile(pt_tight);
    for (std::size_t i = 0; i < b_loose.size(); ++i) CHECK(b_loose[i] <= b_tight[i]);
    CHECK(pt_loose.discarded_weight >= 0.0);
    CHECK(pt_loose.discarded_weight >= pt_tight.discarded_weight);
}

TEST_CASE("bond extents never exceed the memory-window bound") {
    auto c = spin_coupling();
    auto eta = physical_eta(0.1, 3);
    SvdTruncation trunc;
    trunc.rel_cutoff = 1e-14;
    auto pt = build_finite(c, eta, 10, trunc);
    const std::size_t D = c.liouville_dim();
    for (std::size_t b : bond_profile(pt)) {
        std::size_t cap = 1;
        for (std::size_t k = 0; k < eta.n_mem && cap <= 10000 / D; ++k) cap *= D;
        CHECK(b <= cap);
    }
}

TEST_CASE("time-translation-invariant build: uncoupled fixed point is all ones") {
    auto c = spin_coupling();
    auto eta = table_from({cd(0.0, 0.0), cd(0.0, 0.0)}, 0.1);
    SvdTruncation trunc;
    trunc.rel_cutoff = 1e-10;
    auto pt = build_tti(c, eta, trunc);
    CHECK(pt.mode == ProcessTensorMPS::Mode::tti);
    CHECK(pt.bulk.extent(0) == 1);
    CHECK(pt.bulk.extent(2) == 1);
    for (std::size_t a = 0; a < 4; ++a)
        CHECK(std::abs(pt.bulk[a] - cd(1.0, 0.0)) < 1e-12);
    CHECK(pt.cap.rank() == 1);
    CHECK(std::abs(pt.cap[0] - cd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("tti build converges and its capped transfer is unit-normalized") {
    auto c = spin_coupling();
    auto eta = physical_eta(0.15, 3);
    SvdTruncation trunc;
    trunc.rel_cutoff = 1e-10;
    auto pt = build_tti(c, eta, trunc);

    const std::size_t chi = pt.bulk.extent(0);
    REQUIRE(pt.bulk.extent(2) == chi);
    REQUIRE(pt.cap.extent(0) == chi);
    const std::size_t D = 4;
    // K cap = cap with K the diagonal-averaged bulk transfer
    std::vector<cd> kcap(chi, cd(0.0, 0.0));
    for (std::size_t s = 0; s < 2; ++s) {
        const std::size_t al = s * 2 + s;
        for (std::size_t l = 0; l < chi; ++l)
            for (std::size_t r = 0; r < chi; ++r)
                kcap[l] += pt.bulk[(l * D + al) * chi + r] * pt.cap[r] / 2.0;
    }
    double dev = 0.0;
    for (std::size_t l = 0; l < chi; ++l) dev = std::max(dev, std::abs(kcap[l] - pt.cap[l]));
    CHECK(dev < 1e-10);
}

TEST_CASE("tti build raises when the slot budget is too small") {
    auto c = spin_coupling();
    auto eta = physical_eta(0.15, 3);
    SvdTruncation trunc;
    trunc.rel_cutoff = 1e-10;
    CHECK_THROWS_AS(build_tti(c, eta, trunc, 1e-11, 4), numeric_error);
}

TEST_CASE("coupling validation") {
    SystemCoupling c;
    c.d = 1;
    CHECK_THROWS_AS(c.validate(), argument_error);
    c.d = 2;
    c.lambdas = {1.0};
    CHECK_THROWS_AS(c.validate(), argument_error);
    c.lambdas = {1.0, std::nan("")};
    CHECK_THROWS_AS(c.validate(), argument_error);
}
