#include <cmath>
#include <sstream>

#include "bipcp/errors.hpp"
#include "bipcp/hypergraph.hpp"
#include "bipcp/rng.hpp"
#include "bipcp/stats.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bipcp;

TEST_CASE("edge rule: inclusive threshold, opposite types only") {
    Vertex a{0, 1, 0.0, 0.25}, b{1, 2, 2.0, 1.0};
    // reach = 0.25^{-0.5} * 1 = 2, boundary included
    CHECK(edge_exists(0.5, 0.5, a, b));
    b.position = 2.0000001;
    CHECK(!edge_exists(0.5, 0.5, a, b));
    b.position = -1.999;
    CHECK(edge_exists(0.5, 0.5, a, b));
    // argument order is irrelevant
    CHECK(edge_exists(0.5, 0.5, b, a));
    Vertex c{2, 1, 0.5, 0.9};
    CHECK_THROWS_AS(edge_exists(0.5, 0.5, a, c), SameTypePair);
    // near-zero marks must not overflow the reach comparison
    Vertex t1{3, 1, 0.0, 1e-300}, t2{4, 2, 1e280, 1e-300};
    CHECK(edge_exists(0.7, 0.6, t1, t2));  // log reach ~ 898 > log distance ~ 645
    // large but finite reach still excludes far vertices
    CHECK(!edge_exists(0.7, 0.6, a, t2));  // reach ~ 2.6e180 < 1e280
}

TEST_CASE("sampling is deterministic in the seed") {
    ModelParams p{0.7, 0.6, 1.0, 0.1};
    auto g1 = Hypergraph::sample(p, {100.0}, 5);
    auto g2 = Hypergraph::sample(p, {100.0}, 5);
    auto g3 = Hypergraph::sample(p, {100.0}, 6);
    REQUIRE(g1.size() == g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i) {
        CHECK(g1.vertex(i).position == g2.vertex(i).position);
        CHECK(g1.vertex(i).mark == g2.vertex(i).mark);
    }
    bool differs = g1.size() != g3.size() || g1.vertex(0).position != g3.vertex(0).position;
    CHECK(differs);
}

TEST_CASE("vertex count is Poisson with the window intensity") {
    ModelParams p{0.7, 0.6, 1.0, 0.1};
    const int reps = 400;
    const double L = 25.0;  // interval length 2L per type, mean count 4L total
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) sum += Hypergraph::sample(p, {L}, 1000 + r).size();
    double mean = sum / reps;
    double se = std::sqrt(4.0 * L / reps);
    CHECK(std::abs(mean - 4.0 * L) <= 3.0 * se);
}

TEST_CASE("planted root: position, type, mark") {
    ModelParams p{0.7, 0.6, 1.0, 0.1};
    auto g = Hypergraph::sample(p, {50.0}, 11, {RootSpec::fixed_mark, 0.25, 1});
    REQUIRE(g.root_id().has_value());
    const auto& r = g.vertex(*g.root_id());
    CHECK(r.position == 0.0);
    CHECK(r.vtype == 1);
    CHECK(r.mark == 0.25);

    auto g2 = Hypergraph::sample(p, {50.0}, 11, {RootSpec::uniform_mark, 0.0, 2});
    const auto& r2 = g2.vertex(*g2.root_id());
    CHECK(r2.vtype == 2);
    CHECK(r2.mark > 0.0);
    CHECK(r2.mark <= 1.0);

    CHECK_THROWS_AS(Hypergraph::sample(p, {50.0}, 1, {RootSpec::fixed_mark, 1.5, 1}),
                    BadRootSpec);
    CHECK_THROWS_AS(Hypergraph::sample(p, {0.0}, 1), WindowTooSmall);
}

TEST_CASE("root mark is uniform across replicates") {
    ModelParams p{0.7, 0.6, 1.0, 0.1};
    std::vector<double> marks, ref;
    Stream s(99);
    for (int r = 0; r < 2000; ++r) {
        auto g = Hypergraph::sample(p, {5.0}, 40000 + r, {RootSpec::uniform_mark, 0.0, 1});
        marks.push_back(g.vertex(*g.root_id()).mark);
        ref.push_back(s.uniform01());
    }
    CHECK(stats::ks_two_sample(marks, ref).p_value > 1e-3);
}

TEST_CASE("neighbor index equals the all-pairs oracle") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}) {
        ModelParams p{0.55 + 0.04 * (seed % 5), 0.6, 1.0, 0.1};
        auto g = Hypergraph::sample(p, {100.0}, seed, {RootSpec::uniform_mark, 0.0, 1});
        for (std::int64_t id = 0; id < static_cast<std::int64_t>(g.size()); ++id) {
            auto got = g.neighbors(id);
            std::sort(got.begin(), got.end());
            REQUIRE(got == oracle::brute_neighbors(g, id));
        }
    }
    ModelParams p{0.7, 0.6, 1.0, 0.1};
    auto g = Hypergraph::sample(p, {100.0}, 77);
    CHECK_THROWS_AS(g.neighbors(static_cast<std::int64_t>(g.size()) + 5), UnknownId);
}

TEST_CASE("planted vertex degree matches the closed forms") {
    // gamma1 = gamma2 = 0.5, root mark 0.25: full mean degree 2 u^{-1/2} / (1/2) = 8;
    // restricted to leaf marks >= 0.25 it is 2 u^{-1/2} (1 - 0.25^{1/2}) / (1/2) = 4
    ModelParams p{0.5, 0.5, 1.0, 0.1, true};
    const int reps = 2000;
    double deg_sum = 0.0, band_sum = 0.0;
    for (int r = 0; r < reps; ++r) {
        auto g = Hypergraph::sample(p, {1000.0}, 7000 + r, {RootSpec::fixed_mark, 0.25, 1});
        auto nbrs = g.neighbors(*g.root_id());
        deg_sum += nbrs.size();
        for (auto id : nbrs) band_sum += g.vertex(id).mark >= 0.25 ? 1.0 : 0.0;
    }
    double se_full = std::sqrt(8.0 / reps), se_band = std::sqrt(4.0 / reps);
    CHECK(std::abs(deg_sum / reps - 8.0) <= 3.0 * se_full + 0.02);
    CHECK(std::abs(band_sum / reps - 4.0) <= 3.0 * se_band);
}

TEST_CASE("degree tail slope tracks -1/gamma") {
    ModelParams p{0.7, 0.6, 1.0, 0.1};
    std::vector<Hypergraph> gs;
    for (int r = 0; r < 8; ++r) gs.push_back(Hypergraph::sample(p, {4000.0}, 300 + r));
    std::vector<const Hypergraph*> ptrs;
    for (auto& g : gs) ptrs.push_back(&g);
    auto t1 = degree_tail_stats(ptrs, 1);
    CHECK(std::abs(t1.slope - (-1.0 / 0.7)) <= 0.15 * (1.0 / 0.7));
    auto t2 = degree_tail_stats(ptrs, 2);
    CHECK(std::abs(t2.slope - (-1.0 / 0.6)) <= 0.15 * (1.0 / 0.6));

    // constant degrees leave nothing to regress on
    ModelParams q{0.7, 0.6, 1.0, 0.1};
    auto iso = Hypergraph::from_vertices(q, {10.0}, {{0, 1, -9.0, 1.0}, {1, 2, 9.0, 1.0}});
    std::vector<const Hypergraph*> one{&iso};
    CHECK_THROWS_AS(degree_tail_stats(one, 1), InsufficientData);
}

TEST_CASE("component sizes") {
    ModelParams p{0.5, 0.5, 1.0, 0.1};
    // marks 1: reach 1; chain a-b-c plus the isolated d
    auto g = Hypergraph::from_vertices(
        p, {10.0}, {{0, 1, 0.0, 1.0}, {1, 2, 0.5, 1.0}, {2, 1, 1.0, 1.0}, {3, 2, 5.0, 1.0}});
    auto sizes = g.component_sizes();
    REQUIRE(sizes.size() == 2);
    CHECK(sizes[0] == 3);
    CHECK(sizes[1] == 1);
}

TEST_CASE("restricted samples: half-line and band emptied") {
    ModelParams p{0.8, 0.8, 1.0, 0.2};
    auto scales = validate_and_derive(p);
    double h = 1.5 * scales.u0;
    auto g = Hypergraph::sample_restricted(p, {200.0}, 21, RestrictedVariant::G1plus, h);
    REQUIRE(g.root_id().has_value());
    const auto& r = g.vertex(*g.root_id());
    CHECK(r.position == 0.0);
    CHECK(r.vtype == 1);
    CHECK(r.mark == h);
    for (const auto& v : g.vertices()) {
        if (v.id == r.id) continue;
        CHECK(v.position >= 0.0);
        if (v.vtype == 1) {
            bool in_band = v.mark >= scales.u0 && v.mark <= std::min(2.0 * scales.u0, 1.0);
            CHECK(!in_band);
        }
    }
    CHECK_THROWS_AS(
        Hypergraph::sample_restricted(p, {200.0}, 21, RestrictedVariant::G1plus, 1.0), BadBand);

    auto g2 = Hypergraph::sample_restricted(p, {200.0}, 22, RestrictedVariant::G2plus,
                                            1.5 * scales.v0);
    CHECK(g2.vertex(*g2.root_id()).vtype == 2);
}

TEST_CASE("colouring thresholds") {
    ModelParams p{0.8, 0.8, 1.0, 0.2};
    auto g = Hypergraph::from_vertices(p, {10.0},
                                       {{0, 1, 0.0, 0.3}, {1, 2, 1.0, 0.300000001}, {2, 1, 2.0, 1.0}});
    auto cols = g.colour(0.3, 0.3);
    CHECK(cols[0] == Colour::red);  // boundary mark counts as red
    CHECK(cols[1] == Colour::blue);
    CHECK(cols[2] == Colour::blue);
}

TEST_CASE("dump and load round-trip") {
    ModelParams p{0.7, 0.6, 1.2, 0.15};
    auto g = Hypergraph::sample(p, {50.0}, 33, {RootSpec::uniform_mark, 0.0, 1});
    std::ostringstream out;
    g.dump(out);
    std::string text = out.str();
    CHECK(text.rfind("bipcp-graph v1", 0) == 0);
    std::istringstream in(text);
    auto h = Hypergraph::load(in);
    REQUIRE(h.size() == g.size());
    CHECK(h.root_id() == g.root_id());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(h.vertex(i).vtype == g.vertex(i).vtype);
        CHECK(h.vertex(i).position == g.vertex(i).position);
        CHECK(h.vertex(i).mark == g.vertex(i).mark);
    }
    for (std::int64_t id = 0; id < static_cast<std::int64_t>(g.size()); ++id)
        CHECK(g.neighbors(id) == h.neighbors(id));
}
