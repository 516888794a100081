#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>

#include "snlab/graphs.hpp"

using namespace snlab;

TEST_CASE("tree codes: level starts and round trips") {
    for (int d : {3, 4, 7}) {
        std::uint64_t start = 1, width = static_cast<std::uint64_t>(d);
        CHECK(*tree_code::level_start(d, 0) == 0);
        for (int k = 1; k <= 6; ++k) {
            CHECK(*tree_code::level_start(d, k) == start);
            start += width;
            width *= static_cast<std::uint64_t>(d - 1);
        }
        for (VertexId v = 0; v < 500; ++v) {
            auto p = tree_code::decode(d, v);
            CHECK(tree_code::encode(d, p) == v);
        }
    }
    CHECK_THROWS(tree_code::encode(3, std::vector<int>{3}));
    CHECK_THROWS(tree_code::encode(3, std::vector<int>{0, 2}));
    CHECK(tree_code::max_encodable_depth(3) > 40);
}

TEST_CASE("tree window structure") {
    Window w(GraphFamily::regular_tree(4), 5);
    CHECK(w.ball_size() == 1 + 4 * (1 + 3 + 9 + 27 + 81));
    auto all = w.vertices();
    CHECK(all.size() == w.ball_size());
    std::size_t boundary = 0;
    for (VertexId v : all) {
        auto nb = w.neighbors(v);
        CHECK(nb.size() == 4);
        int inside = 0;
        for (auto n : nb) {
            inside += n.in_window;
            if (n.in_window) CHECK(std::abs(w.depth(n.id) - w.depth(v)) == 1);
        }
        CHECK(inside == (w.depth(v) == 5 ? 1 : 4));
        boundary += w.on_boundary(v);
        if (v != 0) CHECK(w.parent(v) == w.neighbors(v)[0].id);
    }
    CHECK(boundary == 4 * 81);
    VertexId a = tree_code::encode(4, std::vector<int>{0, 1, 2});
    VertexId b = tree_code::encode(4, std::vector<int>{0, 2});
    CHECK(w.distance(a, b) == 3);
    CHECK(w.distance(a, b) == w.distance(b, a));
    CHECK(w.distance(a, 0) == 3);
    CHECK_THROWS(Window(GraphFamily::regular_tree(3), -1));
}

TEST_CASE("torus distances match coordinate arithmetic") {
    Window w(GraphFamily::torus(2, 8), 8);
    CHECK(w.covers_graph());
    CHECK(w.ball_size() == 64);
    for (VertexId u = 0; u < 64; u += 5)
        for (VertexId v = 0; v < 64; v += 3) {
            auto cu = w.coords(u), cv = w.coords(v);
            int dist = 0;
            for (int i = 0; i < 2; ++i) {
                int dx = static_cast<int>(std::abs(cu[i] - cv[i]));
                dist += std::min(dx, 8 - dx);
            }
            CHECK(w.distance(u, v) == dist);
        }
    for (VertexId v = 0; v < 64; ++v) {
        std::set<VertexId> nb;
        for (auto n : w.neighbors(v)) nb.insert(n.id);
        CHECK(nb.size() == 4);
    }
    Window c(GraphFamily::cycle(10), 5);
    auto nb = c.neighbors(0);
    CHECK(nb.size() == 2);
    CHECK(((nb[0].id == 1 && nb[1].id == 9) || (nb[0].id == 9 && nb[1].id == 1)));
}

TEST_CASE("left/right split of children") {
    for (int d = 3; d <= 9; ++d) CHECK(left_count(d) == (d - 1) / 2);
    Window w(GraphFamily::regular_tree(6), 3);
    auto [l, r] = left_right_split(w, 0);
    CHECK(l.size() == 2);
    CHECK(r.size() == 4);
    auto [l1, r1] = left_right_split(w, w.child(0, 0));
    CHECK(l1.size() == 2);
    CHECK(r1.size() == 3);
}

TEST_CASE("family names and policies") {
    CHECK(GraphFamily::torus(2, 64).order() == 4096);
    CHECK_THROWS(GraphFamily::regular_tree(4).order());
    CHECK(boundary_policy_from_string(to_string(BoundaryPolicy::Absorb)) == BoundaryPolicy::Absorb);
    CHECK_THROWS(boundary_policy_from_string("bounce"));
}
