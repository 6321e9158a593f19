#include "doctest.h"

#include <cstdint>
#include <map>
#include <random>

#include "gstokes/mesh.hpp"

using namespace gstokes;

TEST_CASE("smallest mesh: 2x2") {
    const TriMesh m = build_uniform(2, 2);
    CHECK(m.num_vertices() == 4);
    CHECK(m.num_triangles() == 2);
    int boundary_edges = 0;
    for (const auto& e : m.edges)
        if (is_boundary(e.tag)) ++boundary_edges;
    CHECK(boundary_edges == 4);
}

TEST_CASE("13x13 mesh matches the experiment resolution") {
    const TriMesh m = build_uniform(13, 13);
    CHECK(m.num_vertices() == 169);
    CHECK(m.num_triangles() == 288);
}

TEST_CASE("3x2 mesh") {
    const TriMesh m = build_uniform(3, 2);
    CHECK(m.num_vertices() == 6);
    CHECK(m.num_triangles() == 4);
}

TEST_CASE("invalid counts are configuration errors") {
    CHECK_THROWS_AS(build_uniform(1, 5), config_error);
    CHECK_THROWS_AS(build_uniform(5, 0), config_error);
}

TEST_CASE("areas, orientation, Euler formula, edge sharing") {
    for (auto [nx, ny] : {std::pair{2, 2}, std::pair{5, 5}, std::pair{13, 13}, std::pair{3, 7}}) {
        const TriMesh m = build_uniform(nx, ny);
        double total = 0.0;
        for (int t = 0; t < m.num_triangles(); ++t) {
            const double a = m.signed_area(t);
            CHECK(a > 0.0);
            total += a;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);

        std::map<int, int> edge_count;
        for (int t = 0; t < m.num_triangles(); ++t)
            for (int e = 0; e < 3; ++e) ++edge_count[m.triangle_edges[t][e]];
        for (int e = 0; e < m.num_edges(); ++e) {
            if (is_boundary(m.edges[e].tag))
                CHECK(edge_count[e] == 1);
            else
                CHECK(edge_count[e] == 2);
        }
    }
}

TEST_CASE("boundary tagging follows the leaky-lid convention") {
    const TriMesh m = build_uniform(5, 5);
    for (int v = 0; v < m.num_vertices(); ++v) {
        const Vec2 p = m.vertices[v];
        const bool on_bdry = std::abs(p.x) <= 1e-12 || std::abs(p.x - 1.0) <= 1e-12 ||
                             std::abs(p.y) <= 1e-12 || std::abs(p.y - 1.0) <= 1e-12;
        CHECK(is_boundary(m.vertex_tag[v]) == on_bdry);
        if (std::abs(p.y - 1.0) <= 1e-12) CHECK(m.vertex_tag[v] == BoundaryTag::Lid);
    }
    // corners belong to the lid
    CHECK(m.vertex_tag[4 * 5 + 0] == BoundaryTag::Lid);
    CHECK(m.vertex_tag[4 * 5 + 4] == BoundaryTag::Lid);
}

TEST_CASE("locate_point: centroid and vertices") {
    const TriMesh m = build_uniform(4, 4);
    const auto& tri = m.triangles[0];
    const Vec2 c = (1.0 / 3.0) * (m.vertices[tri.v[0]] + m.vertices[tri.v[1]] + m.vertices[tri.v[2]]);
    const auto loc = locate_point(m, c);
    CHECK(loc.triangle == 0);
    for (double b : loc.bary) CHECK(b == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const auto at_vertex = locate_point(m, m.vertices[5]);
    const auto& tv = m.triangles[at_vertex.triangle].v;
    bool found = false;
    for (int k = 0; k < 3; ++k)
        if (tv[k] == 5) {
            CHECK(at_vertex.bary[k] == doctest::Approx(1.0).epsilon(1e-12));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("locate_point on 13x13 agrees with brute-force scan") {
    const TriMesh m = build_uniform(13, 13);
    const Vec2 x{0.5, 0.75};
    const auto loc = locate_point(m, x);
    // oracle: exhaustive point-in-triangle scan
    bool contained = false;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto b = barycentric(m, t, x);
        if (b[0] >= -1e-12 && b[1] >= -1e-12 && b[2] >= -1e-12) {
            if (t == loc.triangle) contained = true;
        }
    }
    CHECK(contained);
    CHECK(loc.bary[0] + loc.bary[1] + loc.bary[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("locate_point rejects points outside the domain") {
    const TriMesh m = build_uniform(3, 3);
    CHECK_THROWS_AS(locate_point(m, Vec2{1.5, 0.5}), domain_error);
    CHECK_THROWS_AS(locate_point(m, Vec2{0.5, -0.2}), domain_error);
}

TEST_CASE("property: barycentric reconstruction of random points") {
    const TriMesh m = build_uniform(9, 9);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const Vec2 x{u(rng), u(rng)};
        const auto loc = locate_point(m, x);
        const auto& tv = m.triangles[loc.triangle].v;
        Vec2 rec{0.0, 0.0};
        for (int k = 0; k < 3; ++k) rec = rec + loc.bary[k] * m.vertices[tv[k]];
        CHECK(norm(rec - x) < 1e-12);
        CHECK(loc.bary[0] + loc.bary[1] + loc.bary[2] == doctest::Approx(1.0).epsilon(1e-12));
    }
}
