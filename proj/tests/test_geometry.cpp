#include <friedrichs/geometry.hpp>

#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace friedrichs;
using Catch::Approx;

namespace {

bool on_polygon_boundary(const PolygonDomain2D& d, const Vec2& p, double tol)
{
    return d.boundary_distance(p) <= tol;
}

Vec2 unit(double a) { return {std::cos(a), std::sin(a)}; }

} // namespace

TEST_CASE("measure_domain on simple polygons", "[geometry]")
{
    const auto sq = measure_domain(unit_square());
    CHECK(sq.volume == 1.0);
    CHECK(sq.surface == 4.0);

    const auto l = measure_domain(l_shape());
    CHECK(l.volume == Approx(0.75).epsilon(1e-15));
    CHECK(l.surface == Approx(4.0).epsilon(1e-15));

    const auto disk = regular_polygon(512);
    CHECK(disk.area() == Approx(256.0 * std::sin(2.0 * pi / 512.0)).epsilon(1e-13));
    CHECK(std::abs(disk.area() - pi) < 1e-4);
}

TEST_CASE("polygon rings are reoriented and validated", "[geometry]")
{
    // clockwise input
    const PolygonDomain2D cw({{0.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}});
    CHECK(cw.area() == 1.0);
    // square with a square hole
    const PolygonDomain2D holed({{0, 0}, {4, 0}, {4, 4}, {0, 4}}, {{{1, 1}, {2, 1}, {2, 2}, {1, 2}}});
    CHECK(holed.area() == 15.0);
    CHECK(holed.perimeter() == 20.0);
    CHECK_FALSE(holed.contains(Vec2{1.5, 1.5}));
    CHECK(holed.contains(Vec2{0.5, 1.5}));
    // hole edges point into the hole
    for (const auto& e : holed.edges())
        if (e.ring == 1) {
            const Vec2 mid = 0.5 * (e.a + e.b);
            CHECK_FALSE(holed.contains(mid + 1e-3 * e.normal));
            CHECK(holed.contains(mid - 1e-3 * e.normal));
        }

    CHECK_THROWS_AS(PolygonDomain2D({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error); // bow tie
    CHECK_THROWS_AS(PolygonDomain2D({{0, 0}, {1, 0}}), Error);
    CHECK_THROWS_AS(PolygonDomain2D({{0, 0}, {1, 0}, {2, 0}}), Error);
    CHECK_THROWS_AS(PolygonDomain2D({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0.5, 0.5}, {2, 0.5}, {2, 0.7}}}), Error);
    CHECK_THROWS_AS(PolygonDomain2D({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{2, 2}, {3, 2}, {3, 3}}}), Error);
}

TEST_CASE("ray_first_hit examples", "[geometry]")
{
    const auto sq = unit_square();
    const auto h  = sq.ray_first_hit({0.5, 0.5}, {1.0, 0.0});
    REQUIRE(h.hit);
    CHECK(h.point[0] == Approx(1.0).epsilon(1e-15));
    CHECK(h.point[1] == Approx(0.5).epsilon(1e-15));
    CHECK(h.t == Approx(0.5));

    CHECK_THROWS_AS(sq.ray_first_hit({1.5, 0.5}, {1.0, 0.0}), Error);

    // corner ray: vertex tie is resolved
    const auto c = sq.ray_first_hit({0.5, 0.5}, unit(pi / 4));
    REQUIRE(c.hit);
    CHECK(c.point[0] == Approx(1.0).epsilon(1e-8));
    CHECK(c.point[1] == Approx(1.0).epsilon(1e-8));

    const auto g64 = regular_polygon(64);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * pi);
    for (int i = 0; i < 500; ++i) {
        const auto r = g64.ray_first_hit({0.0, 0.0}, unit(ua(rng)));
        REQUIRE(r.hit);
        const double rad = norm2(r.point);
        REQUIRE(rad >= std::cos(pi / 64) - 1e-12);
        REQUIRE(rad <= 1.0 + 1e-12);
    }
}

TEST_CASE("L-shape: ray toward the reentrant corner stops at the notch", "[geometry]")
{
    const auto l  = l_shape();
    const Vec2 x{0.25, 0.25};
    // just either side of the direction to (0.5, 0.5)
    for (double da : {-0.05, 0.05}) {
        const auto r = l.ray_first_hit(x, unit(pi / 4 + da));
        REQUIRE(r.hit);
        const auto& e = l.edges()[std::size_t(r.patch)];
        // notch edges run through (0.5, 0.5)
        CHECK((e.a == Vec2{0.5, 0.5} || e.b == Vec2{0.5, 0.5}));
        CHECK(norm2(r.point - x) < 0.5);
    }
    // a point below the notch sees the right edge
    const auto r = l.ray_first_hit({0.75, 0.25}, {1.0, 0.0});
    CHECK(r.point[0] == Approx(1.0));
}

TEST_CASE("ray hits lie on the boundary and never miss on convex domains", "[geometry][property]")
{
    std::mt19937_64                        rng(17);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * pi), uu(-1.0, 1.0);
    const std::vector<PolygonDomain2D>     convex{unit_square(), regular_polygon(512), regular_polygon(7, 3.0)};
    for (const auto& d : convex) {
        int misses = 0;
        for (int i = 0; i < 10000; ++i) {
            Vec2 x;
            do
                x = {uu(rng) * 3.0, uu(rng) * 3.0};
            while (!d.contains(x));
            const auto r = d.ray_first_hit(x, unit(ua(rng)));
            if (!r.hit) {
                ++misses;
                continue;
            }
            REQUIRE(on_polygon_boundary(d, r.point, 1e-9 * d.diameter()));
        }
        CHECK(misses == 0);
    }

    // non-convex: every hit is still on the boundary
    const auto comb = comb_domain(3, 1.0, 0.1);
    for (int i = 0; i < 2000; ++i) {
        Vec2 x;
        do
            x = {1.5 + 2.0 * uu(rng), 0.5 + 0.5 * uu(rng)};
        while (!comb.contains(x));
        const auto r = comb.ray_first_hit(x, unit(ua(rng)));
        REQUIRE(r.hit);
        REQUIRE(on_polygon_boundary(comb, r.point, 1e-9 * comb.diameter()));
    }
}

TEST_CASE("dilation equivariance of measures and hits", "[geometry][property]")
{
    std::mt19937_64                        rng(23);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * pi), uu(0.0, 1.0);
    const auto                             l = l_shape();
    for (double lambda : {0.5, 3.0, 1e-3}) {
        const auto ld = l.transformed(lambda);
        CHECK(ld.area() == Approx(lambda * lambda * l.area()).epsilon(1e-13));
        CHECK(ld.perimeter() == Approx(lambda * l.perimeter()).epsilon(1e-13));
        for (int i = 0; i < 200; ++i) {
            Vec2 x;
            do
                x = {uu(rng), uu(rng)};
            while (!l.contains(x));
            const Vec2 th = unit(ua(rng));
            const auto a  = l.ray_first_hit(x, th);
            const auto b  = ld.ray_first_hit(lambda * x, th);
            REQUIRE(a.hit);
            REQUIRE(b.hit);
            REQUIRE(norm2(b.point - lambda * a.point) <= 1e-9 * lambda);
        }
    }
}

TEST_CASE("sample_interior", "[geometry]")
{
    const auto sq = sample_interior(unit_square(), 0.25);
    CHECK(sq.points.size() == 16);
    for (double w : sq.weights)
        CHECK(w == 1.0 / 16.0);

    CHECK(sample_interior(l_shape(), 0.25).points.size() == 12);

    const auto disk = sample_interior(regular_polygon(512), 0.01);
    CHECK(pairwise_sum(disk.weights) == Approx(pi).epsilon(0.01));

    // refinement error bound 2 h perimeter / area
    const auto ld = l_shape();
    for (double h : {0.1, 0.03, 0.007}) {
        const double tot = pairwise_sum(sample_interior(ld, h).weights);
        CHECK(std::abs(tot - ld.area()) <= 2.0 * h * ld.perimeter());
    }

    CHECK_THROWS_AS(sample_interior(comb_domain(1, 0.1, 0.0), 1.0), Error);
    CHECK_THROWS_AS(sample_interior(unit_square(), 0.0), Error);
}

TEST_CASE("sample_boundary", "[geometry]")
{
    const auto b = sample_boundary(unit_square(), {4, 0.0});
    CHECK(b.size() == 16);
    for (double w : b.weights)
        CHECK(w == 0.25);

    const auto disk = regular_polygon(512);
    const auto bd   = sample_boundary(disk, {1, 0.0});
    CHECK(std::abs(bd.total_weight() - 2.0 * pi) < 1e-4);
    CHECK(bd.total_weight() == Approx(disk.perimeter()).epsilon(1e-14));

    // spacing mode, normals outward
    const auto bl = sample_boundary(l_shape(), {0, 0.1});
    CHECK(bl.total_weight() == Approx(4.0).epsilon(1e-14));
    for (std::size_t i = 0; i < bl.size(); ++i) {
        CHECK(bl.weights[i] > 0.0);
        CHECK_FALSE(l_shape().contains(bl.points[i] + 1e-6 * bl.normals[i]));
    }

    CHECK_THROWS_AS(sample_boundary(unit_square(), {0, 0.0}), Error);
}

TEST_CASE("boundary lookup maps hits to the nearest sample in the patch", "[geometry]")
{
    const auto sq = unit_square();
    const auto b  = sample_boundary(sq, {8, 0.0});
    std::mt19937_64                        rng(3);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * pi);
    for (int i = 0; i < 200; ++i) {
        const auto        h   = sq.ray_first_hit({0.3, 0.6}, unit(ua(rng)));
        const std::size_t idx = b.lookup(h);
        REQUIRE(b.patch[idx] == h.patch);
        REQUIRE(norm2(b.points[idx] - h.point) <= 0.5 / 8 + 1e-12);
    }
}

TEST_CASE("comb domain", "[geometry]")
{
    const auto one = comb_domain(1, 1.0, 0.1);
    CHECK(one.area() == 1.0);
    CHECK(one.perimeter() == 4.0);

    CHECK(comb_domain(2, 1.0, 0.1, 0.5).area() == Approx(2.05).epsilon(1e-14));
    const auto c4 = comb_domain(4, 1.0, 0.05);
    CHECK(c4.area() == Approx(4.0 + 3 * 0.05 * 0.5).epsilon(1e-14));
    CHECK(c4.contains(Vec2{1.25, 0.5}));
    CHECK_FALSE(c4.contains(Vec2{1.25, 0.8}));

    // perimeter stays bounded as the passages close
    double last = 0.0;
    for (double eps : {0.2, 0.02, 0.002}) {
        const double per = comb_domain(2, 1.0, eps).perimeter();
        CHECK(per <= 9.0);
        CHECK(per >= last);
        last = per;
    }

    // rays from room 1 rarely reach room 2 as eps shrinks
    auto census = [](double eps) {
        const auto d    = comb_domain(2, 1.0, eps);
        int        seen = 0;
        for (int k = 0; k < 20000; ++k) {
            const auto h = d.ray_first_hit({0.5, 0.5}, unit(2.0 * pi * (k + 0.5) / 20000));
            if (h.point[0] > 1.5 - 1e-12)
                ++seen;
        }
        return seen;
    };
    CHECK(census(0.01) < census(0.2));
    CHECK(census(0.001) <= 10);

    CHECK_THROWS_AS(comb_domain(0, 1.0, 0.1), Error);
    CHECK_THROWS_AS(comb_domain(2, 1.0, 1.5), Error);
}

TEST_CASE("voxel domains", "[geometry]")
{
    const auto cube = voxel_cube(1.0, 0.5);
    CHECK(cube.volume() == 1.0);
    CHECK(cube.surface() == 6.0);
    const auto b = sample_boundary(cube, {1, 0.0});
    CHECK(b.size() == 24);
    CHECK(b.total_weight() == 6.0);
    for (std::size_t i = 0; i < b.size(); ++i)
        CHECK_FALSE(cube.contains(b.points[i] + 1e-6 * b.normals[i]));

    const auto in = sample_interior(cube, 0.25);
    CHECK(in.points.size() == 64);
    CHECK(pairwise_sum(in.weights) == Approx(1.0).epsilon(1e-14));

    // axis ray from the centre
    const auto h = cube.ray_first_hit({0.5, 0.5, 0.5}, {0.0, 0.0, -1.0});
    REQUIRE(h.hit);
    CHECK(h.point[2] == 0.0);
    CHECK(h.t == Approx(0.5));

    CHECK_THROWS_AS(VoxelDomain3D(0.0, {{0, 0, 0}}), Error);
    CHECK_THROWS_AS(VoxelDomain3D(1.0, {}), Error);
    CHECK_THROWS_AS(cube.ray_first_hit({2.0, 0.5, 0.5}, {1.0, 0.0, 0.0}), Error);

    // L-shaped block: exposed faces counted exactly
    const VoxelDomain3D two(1.0, {{0, 0, 0}, {1, 0, 0}});
    CHECK(two.surface() == 10.0);
}

TEST_CASE("voxel ray casting lands on exposed faces", "[geometry][property]")
{
    const auto                             ball = voxel_ball(1.0, 0.1);
    const auto                             bs   = sample_boundary(ball, {2, 0.0});
    std::mt19937_64                        rng(29);
    std::normal_distribution<double>       nd;
    std::uniform_real_distribution<double> uu(-0.6, 0.6);
    int                                    misses = 0;
    for (int i = 0; i < 10000; ++i) {
        Vec3 th{nd(rng), nd(rng), nd(rng)};
        th         = (1.0 / norm2(th)) * th;
        const Vec3 x{uu(rng), uu(rng), uu(rng)};
        REQUIRE(ball.contains(x));
        const auto h = ball.ray_first_hit(x, th);
        if (!h.hit) {
            ++misses;
            continue;
        }
        REQUIRE(ball.boundary_distance(h.point) <= 1e-9 * ball.diameter());
        const auto& f = ball.faces()[std::size_t(h.patch)];
        // the ray leaves through this face
        REQUIRE(dot(ball.face_normal(f), th) > 0.0);
        const std::size_t idx = bs.lookup(h);
        REQUIRE(bs.patch[idx] == h.patch);
        REQUIRE(norm2(bs.points[idx] - h.point) <= 0.05 * std::sqrt(2.0) / 2 + 1e-12);
    }
    CHECK(misses == 0);

    // equivariance under dilation
    const auto big = ball.transformed(2.0);
    CHECK(big.volume() == Approx(8.0 * ball.volume()).epsilon(1e-14));
    CHECK(big.surface() == Approx(4.0 * ball.surface()).epsilon(1e-14));
    const Vec3 th{0.48, 0.6, 0.64};
    const auto a = ball.ray_first_hit({0.1, 0.2, -0.3}, th);
    const auto c = big.ray_first_hit({0.2, 0.4, -0.6}, th);
    CHECK(norm2(c.point - 2.0 * a.point) <= 1e-9);
}

TEST_CASE("domain files and builtins", "[geometry]")
{
    std::istringstream poly("# square with hole\n0 0\n4 0\n4 4\n0 4\n\n1 1\n1 2\n2 2\n2 1\n");
    const auto         p = parse_polygon(poly);
    CHECK(p.area() == 15.0);
    CHECK(p.rings().size() == 2);

    std::istringstream bad("0 0\n1 x\n");
    CHECK_THROWS_AS(parse_polygon(bad), Error);

    std::istringstream vox("0.5\n0 0 0\n1 0 0\n");
    const auto         v = parse_voxels(vox);
    CHECK(v.volume() == 0.25);
    CHECK(v.surface() == 2.5);

    CHECK(measure_domain(load_domain("builtin:square")).volume == 1.0);
    CHECK(measure_domain(load_domain("builtin:lshape")).volume == 0.75);
    CHECK(measure_domain(load_domain("builtin:comb:2,1,0.1")).volume == Approx(2.05));
    CHECK(dimension(load_domain("builtin:disk512")) == 2);
    CHECK(dimension(load_domain("builtin:cube:0.5")) == 3);
    CHECK(measure_domain(load_domain("builtin:ball:1,0.2")).volume == Approx(4.0 * pi / 3).epsilon(0.1));
    CHECK_THROWS_AS(load_domain("builtin:torus"), Error);
    CHECK_THROWS_AS(load_domain("/nonexistent/domain.txt"), Error);
}
