#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "bipcp/combinatorics.hpp"
#include "bipcp/errors.hpp"
#include "bipcp/hypergraph.hpp"
#include "doctest.h"

using namespace bipcp;
using namespace bipcp::combi;

namespace {
std::set<std::vector<int>> entry_set(const std::vector<CombinatorialPath>& ps) {
    std::set<std::vector<int>> out;
    for (const auto& p : ps) out.insert(p.entries);
    return out;
}
}  // namespace

TEST_CASE("path validation") {
    CHECK_NOTHROW(validate({{0, 1}}));
    CHECK_NOTHROW(validate({{0, 1, 0, 2, 1}}));
    CHECK_THROWS_AS(validate({{1, 0}}), InvalidPath);     // must start 0,1
    CHECK_THROWS_AS(validate({{0, 2}}), InvalidPath);     // skipped a label
    CHECK_THROWS_AS(validate({{0, 1, 1}}), InvalidPath);  // consecutive repeat
    CHECK_THROWS_AS(validate({{0, 1, 3}}), InvalidPath);  // new label not max+1
    CHECK_NOTHROW(validate({{0}}));  // degenerate single-vertex path
}

TEST_CASE("enumeration counts 1, 2, 5") {
    CHECK(enumerate_paths(1).size() == 1);
    auto l2 = entry_set(enumerate_paths(2));
    CHECK(l2 == std::set<std::vector<int>>{{0, 1, 0}, {0, 1, 2}});
    auto l3 = entry_set(enumerate_paths(3));
    CHECK(l3 == std::set<std::vector<int>>{
                    {0, 1, 0, 1}, {0, 1, 0, 2}, {0, 1, 2, 0}, {0, 1, 2, 1}, {0, 1, 2, 3}});
}

TEST_CASE("enumeration filtered by vertex count") {
    CHECK(enumerate_paths(3, 2).size() == 1);
    CHECK(enumerate_paths(3, 3).size() == 3);
    CHECK(enumerate_paths(3, 4).size() == 1);
    CHECK_THROWS_AS(enumerate_paths(15), LengthTooLarge);
}

TEST_CASE("count_bound dominates enumeration per vertex count") {
    CHECK(count_bound(3, 2) == 24);
    for (std::size_t ell = 1; ell <= 8; ++ell) {
        auto all = enumerate_paths(ell);
        for (int k = 2; k <= static_cast<int>(ell) + 1; ++k) {
            std::uint64_t n = 0;
            for (const auto& p : all)
                if (*std::max_element(p.entries.begin(), p.entries.end()) == k - 1) ++n;
            CHECK(count_bound(ell, k) >= n);
        }
    }
}

TEST_CASE("to_combinatorial relabels by first visit") {
    CHECK(to_combinatorial({7, 3, 7, 9}).entries == std::vector<int>{0, 1, 0, 2});
    CHECK(to_combinatorial({5, 2}).entries == std::vector<int>{0, 1});
    CHECK_THROWS_AS(to_combinatorial({7, 7}), InvalidPath);
}

TEST_CASE("discovery tree of a revisiting path") {
    auto t = discovery_tree({{0, 1, 2, 1, 3}});
    CHECK(t.size() == 4);
    CHECK(t.root == 0);
    CHECK(t.parent(0) == -1);
    CHECK(t.parent(1) == 0);
    CHECK(t.parent(2) == 1);
    CHECK(t.parent(3) == 1);
    CHECK(t.degree(1) == 3);
    CHECK(t.parity.at(0) == 0);
    CHECK(t.parity.at(1) == 1);
    CHECK(t.parity.at(2) == 0);
    CHECK(t.parity.at(3) == 0);
    CHECK(!t.m_star.has_value());  // path trees leave the distinguished leaf unset
    CHECK(t.is_leaf(3));
    CHECK(t.parent_array() == discovery_tree({{0, 1, 2, 1, 3}}).parent_array());
}

TEST_CASE("random trees are trees with a distinguished non-root leaf") {
    for (int k = 3; k <= 20; ++k) {
        auto t = random_tree(1000 + k, k);
        CHECK(t.size() == static_cast<std::size_t>(k));
        std::size_t degsum = 0;
        for (int v : t.ids()) degsum += t.degree(v);
        CHECK(degsum == 2 * (t.size() - 1));
        REQUIRE(t.m_star.has_value());
        CHECK(*t.m_star != t.root);
        CHECK(t.is_leaf(*t.m_star));
        CHECK(t.parent_array() == random_tree(1000 + k, k).parent_array());
    }
}

TEST_CASE("mark integrals: closed form, quadrature, log branch") {
    // Simpson oracle
    auto quad = [](int n, double gamma, double thr) {
        const int steps = 20000;
        double h = (1.0 - thr) / steps, s = 0.0;
        for (int i = 0; i < steps; ++i) {
            double x0 = thr + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
            auto f = [&](double u) { return std::pow(u, -gamma * n); };
            s += h / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1));
        }
        return s;
    };
    for (double thr : {0.01, 0.3}) {
        for (int n : {1, 2, 3, 5}) {
            CHECK(mark_integral(n, 0.45, thr) ==
                  doctest::Approx(quad(n, 0.45, thr)).epsilon(1e-8));
        }
        CHECK(mark_integral(2, 0.5, thr) == doctest::Approx(std::log(1.0 / thr)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(mark_integral(1, 0.5, 0.0), BadThreshold);
    CHECK_THROWS_AS(mark_integral(1, 0.5, 1.5), BadThreshold);
}

TEST_CASE("mark integral envelopes") {
    AsymptoticScale u{5.0 / 3, 22.0};
    // convergent integral: order one
    CHECK(mark_integral_scale(1, 0.5, u) == AsymptoticScale{0.0, 0.0});
    // divergent integral: dominated by the lower endpoint
    auto s = mark_integral_scale(4, 0.5, u);
    CHECK(s.p == doctest::Approx(-5.0 / 3));
    CHECK(s.q == doctest::Approx(-22.0));
    // degenerate branch: a single log of slack
    CHECK(mark_integral_scale(2, 0.5, u) == AsymptoticScale{0.0, 1.0});
}

TEST_CASE("tree weight on short segments") {
    ModelParams p{0.45, 0.8, 0.7, 1e-3};
    auto ctx = make_weight_context(p, validate_and_derive(p));
    // plain power-law thresholds keep the numeric integrals meaningful
    ctx.u1 = std::pow(p.lambda, ctx.mu_star);
    ctx.u2 = std::pow(p.lambda, ctx.nu_star);
    auto seg2 = discovery_tree({{0, 1}});
    seg2.m_star = 1;
    auto w2 = tree_weight_F(seg2, ctx);
    CHECK(w2.log_value ==
          doctest::Approx(std::log(2.0 * ctx.lambda) + std::log(script_u(1, ctx))).epsilon(1e-12));
    auto seg3 = discovery_tree({{0, 1, 2}});
    seg3.m_star = 2;
    auto w3 = tree_weight_F(seg3, ctx);
    double expect = std::log(2.0 * ctx.lambda) + std::log(script_u(1, ctx)) +
                    std::log(2.0 * std::pow(ctx.lambda, ctx.a)) + std::log(script_v(2, ctx));
    CHECK(w3.log_value == doctest::Approx(expect).epsilon(1e-12));

    DiscoveryTree no_star;
    no_star.adj = {{0, {1}}, {1, {0}}};
    no_star.parity = {{0, 0}, {1, 1}};
    no_star.root = 0;
    no_star.next_fresh = 2;
    CHECK_THROWS_AS(tree_weight_F(no_star, ctx), BadDistinguishedLeaf);
}

TEST_CASE("reduction operations on hand-built trees") {
    // root 0 with leaf child 1 and a path 0-2-3 to the distinguished leaf
    DiscoveryTree t;
    t.adj = {{0, {1, 2}}, {1, {0}}, {2, {0, 3}}, {3, {2}}};
    t.parity = {{0, 0}, {1, 1}, {2, 1}, {3, 0}};
    t.root = 0;
    t.m_star = 3;
    t.next_fresh = 4;

    auto r1 = apply_reduction(t, ReductionOp::Op1, {0, 1});
    CHECK(r1.size() == 3);
    CHECK(!r1.has_vertex(1));
    CHECK(r1.degree(0) == 1);
    CHECK(*r1.m_star == 3);

    // Op1 may not remove an only child
    DiscoveryTree seg = discovery_tree({{0, 1, 2}});
    seg.m_star = 2;
    CHECK_THROWS_AS(apply_reduction(seg, ReductionOp::Op1, {0, 1}), PreconditionViolated);

    // root 0, m* 1, spare branch 0-2-3: Op2 trims both 3 and 2
    DiscoveryTree t2;
    t2.adj = {{0, {1, 2}}, {1, {0}}, {2, {0, 3}}, {3, {2}}};
    t2.parity = {{0, 0}, {1, 1}, {2, 1}, {3, 0}};
    t2.root = 0;
    t2.m_star = 1;
    t2.next_fresh = 4;
    auto r2 = apply_reduction(t2, ReductionOp::Op2, {0, 2, 3});
    CHECK(r2.size() == 2);
    CHECK(r2.has_vertex(0));
    CHECK(r2.has_vertex(1));

    // path 0-1-2-3-4: Op3 collapses the interior segment into a fresh vertex
    DiscoveryTree t3 = discovery_tree({{0, 1, 2, 3, 4}});
    t3.m_star = 4;
    auto r3 = apply_reduction(t3, ReductionOp::Op3, {1, 2, 3});
    CHECK(r3.size() == 3);
    CHECK(r3.has_vertex(0));
    CHECK(r3.has_vertex(4));
    CHECK(!r3.has_vertex(2));
    int fresh = -1;
    for (int v : r3.ids())
        if (v != 0 && v != 4) fresh = v;
    REQUIRE(fresh >= t3.next_fresh);
    CHECK(r3.parity.at(fresh) == t3.parity.at(1));
}

TEST_CASE("greedy reduction reaches a short segment") {
    ModelParams p{0.75, 0.75, 2.0, 1e-3};
    auto ctx = make_weight_context(p, validate_and_derive(p));
    ctx.u1 = std::pow(p.lambda, ctx.mu_star);
    ctx.u2 = std::pow(p.lambda, ctx.nu_star);
    for (int i = 0; i < 200; ++i) {
        int k = 4 + i % 17;
        auto t = random_tree(500 + i, k);
        auto res = reduce_to_segment(t);
        CHECK(res.segment.size() >= 2);
        CHECK(res.segment.size() <= 3);
        CHECK(static_cast<int>(res.ops.size()) >= (k - 3) / 2);
        REQUIRE(res.segment.m_star.has_value());
        CHECK(res.segment.parity.at(*res.segment.m_star) == t.parity.at(*t.m_star));
        // replaying the logged ops reproduces the reported segment
        DiscoveryTree cur = t;
        for (const auto& op : res.ops) cur = apply_reduction(cur, op.op, op.site);
        CHECK(cur.parent_array() == res.segment.parent_array());
        // every op shrinks the weight by log^{-16} in scale algebra
        cur = t;
        for (const auto& op : res.ops) {
            auto before = tree_weight_F(cur, ctx);
            cur = apply_reduction(cur, op.op, op.site);
            auto after = tree_weight_F(cur, ctx);
            // each op makes the remaining tree's weight dominate the original
            // by at least sixteen powers of the log
            CHECK(scale_le(before.scale, after.scale * AsymptoticScale{0.0, -16.0}));
        }
    }
    // a segment is already reduced
    auto seg = discovery_tree({{0, 1, 2}});
    seg.m_star = 2;
    auto res = reduce_to_segment(seg);
    CHECK(res.ops.empty());
    CHECK(res.segment.size() == 3);
}

TEST_CASE("M factor spot values") {
    auto m32 = m_factor(1e-3, 1.0, 3, 2);
    CHECK(m32.numeric == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m32.scale == AsymptoticScale{0.0, 0.0});
    auto m23 = m_factor(1e-3, 1.0, 2, 3);
    CHECK(m23.numeric ==
          doctest::Approx(24.0 * std::pow(std::log(1e3), 16.0)).epsilon(1e-12));
    CHECK(m23.scale.q == doctest::Approx(16.0));
}

TEST_CASE("sum over path classes stays below (4k)^{3k}") {
    auto s = sum_bound_check(3, 1e-3, 1.0);
    CHECK(s.pass);
    CHECK(s.bound == doctest::Approx(std::pow(12.0, 9.0)));
    CHECK(s.sum == doctest::Approx(3505.46).epsilon(0.01));
}

TEST_CASE("realized path counting on a hand-built graph") {
    ModelParams p{0.5, 0.5, 1.0, 0.1};
    auto g = Hypergraph::from_vertices(
        p, {10.0},
        {{0, 1, 0.0, 1.0}, {1, 2, 0.4, 0.3}, {2, 2, -0.4, 0.7}, {3, 2, 8.0, 0.2},
         {4, 1, 0.2, 1.0}},
        0);
    // neighbors of the root: vertices 1 and 2 (vertex 3 is out of reach)
    CHECK(count_realized_paths(g, {{0, 1}}, Colouring::all_blue, 1e-9, 1e-9) == 2);
    CHECK(count_realized_paths(g, {{0, 1}}, Colouring::blue_then_red_last, 1e-9, 0.5) == 1);
    CHECK(count_realized_paths(g, {{0, 1, 0}}, Colouring::all_blue, 1e-9, 1e-9) == 2);
    CHECK_THROWS_AS(
        count_realized_paths(g, {{0, 1, 0}}, Colouring::blue_then_red_last, 1e-9, 0.5),
        InvalidColouringForPath);
    CHECK(count_realized_paths(g, {{0, 1, 2}}, Colouring::all_blue, 1e-9, 1e-9) == 2);
}

TEST_CASE("mecke expectation rejects red-last on revisiting paths") {
    WeightContext ctx{0.1, 1.0, 0.55, 0.55, 0.5, 0.5, 1.0, 1.0, 20.0};
    CHECK(mecke_expected_count({{0, 1}}, Colouring::all_blue, ctx) > 0.0);
    CHECK(mecke_expected_count({{0, 1, 2}}, Colouring::blue_then_red_last, ctx) > 0.0);
    CHECK_THROWS_AS(mecke_expected_count({{0, 1, 0}}, Colouring::blue_then_red_last, ctx),
                    InvalidColouringForPath);
}

TEST_CASE("path dump") {
    CHECK(path_dump({{0, 1, 2, 0}}) == "0,1,2,0");
}
