#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ptmps/tensor.hpp"

using namespace ptmps;

namespace {

DenseTensor random_tensor(std::vector<std::size_t> shape, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseTensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = cd(dist(rng), dist(rng));
    return t;
}

// reference contraction by explicit loops over every index assignment
DenseTensor contract_reference(const DenseTensor& a, const std::vector<std::size_t>& a_axes,
                               const DenseTensor& b, const std::vector<std::size_t>& b_axes) {
    std::vector<std::size_t> a_free, b_free;
    for (std::size_t ax = 0; ax < a.rank(); ++ax)
        if (std::find(a_axes.begin(), a_axes.end(), ax) == a_axes.end()) a_free.push_back(ax);
    for (std::size_t ax = 0; ax < b.rank(); ++ax)
        if (std::find(b_axes.begin(), b_axes.end(), ax) == b_axes.end()) b_free.push_back(ax);

    std::vector<std::size_t> out_shape;
    for (std::size_t ax : a_free) out_shape.push_back(a.extent(ax));
    for (std::size_t ax : b_free) out_shape.push_back(b.extent(ax));
    if (out_shape.empty()) out_shape.push_back(1);
    DenseTensor out(out_shape);

    std::size_t csize = 1;
    for (std::size_t ax : a_axes) csize *= a.extent(ax);

    std::vector<std::size_t> oidx(out_shape.size(), 0);
    for (std::size_t lin = 0; lin < out.size(); ++lin) {
        cd acc(0.0, 0.0);
        for (std::size_t c = 0; c < csize; ++c) {
            std::vector<std::size_t> ai(a.rank()), bi(b.rank());
            std::size_t rest = c;
            for (std::size_t k = a_axes.size(); k-- > 0;) {
                ai[a_axes[k]] = rest % a.extent(a_axes[k]);
                bi[b_axes[k]] = rest % a.extent(a_axes[k]);
                rest /= a.extent(a_axes[k]);
            }
            for (std::size_t k = 0; k < a_free.size(); ++k) ai[a_free[k]] = oidx[k];
            for (std::size_t k = 0; k < b_free.size(); ++k) bi[b_free[k]] = oidx[a_free.size() + k];
            acc += a.at(ai) * b.at(bi);
        }
        out[lin] = acc;
        for (std::size_t ax = out_shape.size(); ax-- > 0;) {
            if (++oidx[ax] < out_shape[ax]) break;
            oidx[ax] = 0;
        }
    }
    return out;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    REQUIRE(a.shape() == b.shape());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("linear layout is row-major with a contiguous last axis") {
    DenseTensor t({2, 3, 4});
    CHECK(t.size() == 24);
    CHECK(t.strides() == std::vector<std::size_t>{12, 4, 1});
    CHECK(t.offset({1, 2, 3}) == 23);
    CHECK(t.offset({0, 1, 0}) == 4);
    t.at({1, 0, 2}) = cd(3.0, -1.0);
    CHECK(t[14] == cd(3.0, -1.0));
}

TEST_CASE("shape validation") {
    CHECK_THROWS_AS(DenseTensor({2, 0, 3}), argument_error);
    CHECK_THROWS_AS(DenseTensor({2, 2}, std::vector<cd>(3)), dimension_error);
    DenseTensor t({2, 3});
    CHECK_THROWS_AS(t.reshaped({5}), dimension_error);
    CHECK(t.reshaped({3, 2}).shape() == std::vector<std::size_t>{3, 2});
    CHECK_THROWS_AS((void)t.offset({1}), argument_error);
    CHECK_THROWS_AS((void)t.offset({1, 3}), argument_error);
}

TEST_CASE("contract matches the explicit loop reference") {
    std::mt19937 rng(42);
    auto a = random_tensor({3, 4, 2}, rng);
    auto b = random_tensor({2, 4, 5}, rng);

    SUBCASE("single axis") {
        auto got = contract(a, {1}, b, {1});
        auto want = contract_reference(a, {1}, b, {1});
        CHECK(got.shape() == std::vector<std::size_t>{3, 2, 2, 5});
        CHECK(max_abs_diff(got, want) < 1e-13);
    }
    SUBCASE("two axes") {
        auto got = contract(a, {2, 1}, b, {0, 1});
        auto want = contract_reference(a, {2, 1}, b, {0, 1});
        CHECK(got.shape() == std::vector<std::size_t>{3, 5});
        CHECK(max_abs_diff(got, want) < 1e-13);
    }
    SUBCASE("full contraction yields a scalar-shaped tensor") {
        auto c = random_tensor({3, 4, 2}, rng);
        auto got = contract(a, {0, 1, 2}, c, {0, 1, 2});
        auto want = contract_reference(a, {0, 1, 2}, c, {0, 1, 2});
        CHECK(got.shape() == std::vector<std::size_t>{1});
        CHECK(std::abs(got[0] - want[0]) < 1e-12);
    }
    SUBCASE("mismatched extents throw") {
        CHECK_THROWS_AS(contract(a, {0}, b, {2}), dimension_error);
        CHECK_THROWS_AS(contract(a, {0}, b, {0, 1}), argument_error);
        CHECK_THROWS_AS(contract(a, {7}, b, {0}), argument_error);
    }
}

TEST_CASE("matrix contraction agrees with Eigen") {
    std::mt19937 rng(7);
    auto a = random_tensor({4, 6}, rng);
    auto b = random_tensor({6, 3}, rng);
    auto got = contract(a, {1}, b, {0});
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            cd want(0.0, 0.0);
            for (std::size_t k = 0; k < 6; ++k) want += a.at({i, k}) * b.at({k, j});
            CHECK(std::abs(got.at({i, j}) - want) < 1e-13);
        }
}

TEST_CASE("permute maps elements correctly and round-trips") {
    std::mt19937 rng(3);
    auto a = random_tensor({2, 3, 4}, rng);
    auto p = permute(a, {2, 0, 1});
    CHECK(p.shape() == std::vector<std::size_t>{4, 2, 3});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 4; ++k)
                CHECK(p.at({k, i, j}) == a.at({i, j, k}));

    auto back = permute(p, {1, 2, 0});
    CHECK(max_abs_diff(back, a) == 0.0);

    CHECK_THROWS_AS(permute(a, {0, 1}), argument_error);
    CHECK_THROWS_AS(permute(a, {0, 0, 1}), argument_error);
}

TEST_CASE("svd_split reconstructs and truncates") {
    std::mt19937 rng(11);
    auto a = random_tensor({3, 4, 5}, rng);

    SUBCASE("lossless split reconstructs the tensor") {
        SvdTruncation trunc;
        auto res = svd_split(a, {0, 1}, {2}, trunc, SvdAbsorb::right);
        auto rebuilt = contract(res.left, {2}, res.right, {0});
        CHECK(max_abs_diff(rebuilt, a) < 1e-12);
        CHECK(res.kept_rank == 5);
        CHECK(res.discarded_weight < 1e-24);
    }

    SUBCASE("absorb side does not change the product") {
        SvdTruncation t1, t2, t3;
        auto r_right = svd_split(a, {0}, {1, 2}, t1, SvdAbsorb::right);
        auto r_left = svd_split(a, {0}, {1, 2}, t2, SvdAbsorb::left);
        auto r_sep = svd_split(a, {0}, {1, 2}, t3, SvdAbsorb::separate);
        auto p1 = contract(r_right.left, {1}, r_right.right, {0});
        auto p2 = contract(r_left.left, {1}, r_left.right, {0});
        CHECK(max_abs_diff(p1, p2) < 1e-12);
        CHECK(r_sep.singular_values.size() == 3);
        // separate mode: left * diag(s) * right reproduces the tensor
        DenseTensor mid({static_cast<std::size_t>(r_sep.singular_values.size()),
                         static_cast<std::size_t>(r_sep.singular_values.size())});
        for (Eigen::Index i = 0; i < r_sep.singular_values.size(); ++i)
            mid.at({static_cast<std::size_t>(i), static_cast<std::size_t>(i)}) =
                r_sep.singular_values(i);
        auto p3 = contract(contract(r_sep.left, {1}, mid, {0}), {1}, r_sep.right, {0});
        CHECK(max_abs_diff(p3, a) < 1e-12);
    }

    SUBCASE("rank-1 matrix truncates to a single channel") {
        DenseTensor m({4, 4});
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                m.at({i, j}) = cd(static_cast<double>(i + 1), 0.0) *
                               cd(static_cast<double>(j + 1), 0.0);
        SvdTruncation trunc;
        trunc.rel_cutoff = 1e-10;
        auto res = svd_split(m, {0}, {1}, trunc);
        CHECK(res.kept_rank == 1);
        auto rebuilt = contract(res.left, {1}, res.right, {0});
        CHECK(max_abs_diff(rebuilt, m) < 1e-10);
    }

    SUBCASE("max_rank caps the kept rank and accumulates discarded weight") {
        SvdTruncation trunc;
        trunc.max_rank = 2;
        auto res = svd_split(a, {0, 1}, {2}, trunc);
        CHECK(res.kept_rank == 2);
        CHECK(res.discarded_weight > 0.0);
        CHECK(trunc.discarded_weight == res.discarded_weight);
        auto res2 = svd_split(a, {0, 1}, {2}, trunc);
        CHECK(trunc.discarded_weight == doctest::Approx(2.0 * res.discarded_weight));
        (void)res2;
    }

    SUBCASE("deterministic output") {
        SvdTruncation t1, t2;
        auto r1 = svd_split(a, {0, 1}, {2}, t1);
        auto r2 = svd_split(a, {0, 1}, {2}, t2);
        CHECK(max_abs_diff(r1.left, r2.left) == 0.0);
        CHECK(max_abs_diff(r1.right, r2.right) == 0.0);
    }

    SUBCASE("axis groups must partition the tensor") {
        SvdTruncation trunc;
        CHECK_THROWS_AS(svd_split(a, {0}, {1}, trunc), argument_error);
        CHECK_THROWS_AS(svd_split(a, {0, 1}, {1, 2}, trunc), argument_error);
    }
}

TEST_CASE("truncation policy validation") {
    SvdTruncation t;
    t.rel_cutoff = 1.0;
    CHECK_THROWS_AS(t.validate(), argument_error);
    t.rel_cutoff = -0.1;
    CHECK_THROWS_AS(t.validate(), argument_error);
    t.rel_cutoff = 0.5;
    t.max_rank = 0;
    CHECK_THROWS_AS(t.validate(), argument_error);
}
