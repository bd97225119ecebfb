#include <friedrichs/measure_core.hpp>

#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace friedrichs;
using Catch::Approx;

namespace {

std::shared_ptr<const SampledMeasureSpace> space_of(std::vector<double> w)
{
    return std::make_shared<const SampledMeasureSpace>(SampledMeasureSpace::from_weights(w));
}

// unit box [0,1]^d for the Ahlfors estimates
struct UnitBox
{
    std::size_t dim = 2;
    std::size_t dimension() const { return dim; }
    bool        contains(const std::vector<double>& x) const
    {
        for (double v : x)
            if (v <= 0.0 || v >= 1.0)
                return false;
        return true;
    }
};

} // namespace

TEST_CASE("rearrange: constant function is one step", "[measure_core]")
{
    SampledFunction f(space_of({0.5, 1.0, 0.5}), {3.0, 3.0, -3.0});
    auto            p = rearrange(f);
    REQUIRE(p.size() == 1);
    CHECK(p.values()[0] == 3.0);
    CHECK(p.domain_length() == 2.0);
}

TEST_CASE("rearrange: indicator keeps a trailing zero step", "[measure_core]")
{
    SampledFunction f(space_of({0.25, 0.25, 0.5}), {1.0, 1.0, 0.0});
    auto            p = rearrange(f);
    REQUIRE(p.size() == 2);
    CHECK(p.breaks() == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(p.values() == std::vector<double>{1.0, 0.0});
}

TEST_CASE("rearrange: level sets sorted by value", "[measure_core]")
{
    SampledFunction f(space_of({0.5, 0.25, 0.25}), {1.0, 4.0, 2.0});
    auto            p = rearrange(f);
    CHECK(p.breaks() == std::vector<double>{0.0, 0.25, 0.5, 1.0});
    CHECK(p.values() == std::vector<double>{4.0, 2.0, 1.0});

    CHECK(profile_eval(p, 0.1) == 4.0);
    CHECK(profile_eval(p, 0.75) == 1.0);
    CHECK(profile_eval(p, 5.0) == 0.0);
    CHECK_THROWS_AS(profile_eval(p, -0.1), Error);
}

TEST_CASE("rearrange rejects non-finite values", "[measure_core]")
{
    const std::vector<double> w{1.0, 1.0};
    const std::vector<double> v{1.0, std::nan("")};
    CHECK_THROWS_AS(rearrange(w, v), Error);
    CHECK_THROWS_AS(SampledFunction(space_of({1.0, 1.0}), {1.0, inf}), Error);
}

TEST_CASE("distribution function", "[measure_core]")
{
    SampledFunction c(space_of({1.0, 1.0}), {3.0, 3.0});
    CHECK(distribution(c, 2.0) == 2.0);
    CHECK(distribution(c, 3.0) == 0.0);

    SampledFunction f(space_of({0.5, 0.25, 0.25}), {1.0, 4.0, 2.0});
    CHECK(distribution(f, 1.5) == 0.5);
    CHECK_THROWS_AS(distribution(f, -1.0), Error);
}

TEST_CASE("space validation", "[measure_core]")
{
    CHECK_THROWS_AS(SampledMeasureSpace::from_weights(std::vector<double>{1.0, -0.1}), Error);
    auto s = SampledMeasureSpace::from_weights(std::vector<double>{0.1, 0.2, 0.7});
    CHECK(s.total_mass() == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(SampledFunction(space_of({1.0}), {1.0, 2.0}), Error);
}

TEST_CASE("rearrangement properties on random step functions", "[measure_core][property]")
{
    std::mt19937_64                        rng(7);
    std::uniform_real_distribution<double> uw(0.0, 1.0);
    std::uniform_int_distribution<int>     uv(-5, 5);

    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t   n = 1 + trial % 17;
        std::vector<double> w(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = uw(rng);
            v[i] = 0.5 * uv(rng);
        }
        const auto p = rearrange(w, v);

        // idempotence: the profile viewed as a function on (0, L)
        std::vector<double> pw, pv;
        for (std::size_t i = 0; i < p.size(); ++i) {
            pw.push_back(p.breaks()[i + 1] - p.breaks()[i]);
            pv.push_back(p.values()[i]);
        }
        const auto pp = rearrange(pw, pv);
        REQUIRE(pp.values() == p.values());
        for (std::size_t i = 0; i < p.breaks().size(); ++i)
            REQUIRE(pp.breaks()[i] == Approx(p.breaks()[i]).epsilon(1e-14).margin(1e-15));

        // consistency with the distribution function
        for (double tau : {0.0, 0.25, 0.5, 1.0, 1.75, 2.5, 3.0}) {
            REQUIRE(distribution(w, v, tau) == Approx(profile_level_measure(p, tau)).epsilon(1e-13).margin(1e-15));
        }

        // equimeasurability: permuting atoms and flipping signs changes nothing
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<double> w2(n), v2(n);
        for (std::size_t i = 0; i < n; ++i) {
            w2[i] = w[idx[i]];
            v2[i] = (i % 2 ? -1.0 : 1.0) * v[idx[i]];
        }
        const auto p2 = rearrange(w2, v2);
        REQUIRE(p2.values() == p.values());
        for (std::size_t i = 0; i < p.breaks().size(); ++i)
            REQUIRE(p2.breaks()[i] == Approx(p.breaks()[i]).epsilon(1e-13).margin(1e-15));
    }
}

TEST_CASE("profile constructor enforces monotonicity", "[measure_core]")
{
    CHECK_THROWS_AS(RearrangementProfile({0.0, 1.0, 2.0}, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(RearrangementProfile({0.0, 1.0, 1.0}, {2.0, 1.0}), Error);
    CHECK_THROWS_AS(RearrangementProfile({0.5, 1.0}, {1.0}), Error);
    CHECK_NOTHROW(RearrangementProfile({0.0, 1.0, 2.0}, {2.0, 2.0}));
}

TEST_CASE("profile CSV round trip", "[measure_core][io]")
{
    const auto         p = rearrange(std::vector<double>{0.3, 0.1, 0.6}, std::vector<double>{-1.0, 4.0, 0.5});
    std::istringstream in(profile_csv(p));
    const auto         q = parse_profile_csv(in);
    CHECK(q.breaks() == p.breaks());
    CHECK(q.values() == p.values());

    std::istringstream bare("# comment\n1,3\n2.5,1\n\n4,0\n");
    const auto         b = parse_profile_csv(bare);
    CHECK(b.breaks() == std::vector<double>{0.0, 1.0, 2.5, 4.0});
    CHECK(b.values() == std::vector<double>{3.0, 1.0, 0.0});

    std::istringstream rising("1,1\n2,2\n"), junk("1,x\n"), empty("t_break,value\n");
    CHECK_THROWS_AS(parse_profile_csv(rising), Error);
    CHECK_THROWS_AS(parse_profile_csv(junk), Error);
    CHECK_THROWS_AS(parse_profile_csv(empty), Error);
}

TEST_CASE("atom and value files", "[measure_core][io]")
{
    std::istringstream atoms("id,weight,x,y\np,0.25,0,0\nq,0.75,1,0\n");
    auto               space = std::make_shared<const SampledMeasureSpace>(parse_atom_file(atoms));
    REQUIRE(space->size() == 2);
    CHECK(space->atoms()[1].position == std::vector<double>{1.0, 0.0});

    std::istringstream vals("q,2\np,5\n");
    const auto         f = parse_values_file(vals, space);
    CHECK(f.values() == std::vector<double>{5.0, 2.0});
    CHECK(rearrange(f).breaks() == std::vector<double>{0.0, 0.25, 1.0});

    std::istringstream dup("p,1\np,2\nq,0\n"), stray("p,1\nq,2\nr,3\n"), three("a,1,2\n");
    CHECK_THROWS_AS(parse_values_file(dup, space), Error);
    CHECK_THROWS_AS(parse_values_file(stray, space), Error);
    CHECK_THROWS_AS(parse_atom_file(three), Error);
}

TEST_CASE("ahlfors constant: Lebesgue measure on the unit square approaches pi", "[measure_core]")
{
    const int                        m = 400;
    const double                     h = 1.0 / m;
    std::vector<std::vector<double>> pts;
    std::vector<double>              w;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            pts.push_back({(i + 0.5) * h, (j + 0.5) * h});
            w.push_back(h * h);
        }
    const auto mu = SampledMeasureSpace::from_points(pts, w);

    std::vector<std::vector<double>> centers;
    for (double x : {0.45, 0.5, 0.55})
        for (double y : {0.45, 0.5, 0.55})
            centers.push_back({x, y});
    const std::vector<double> radii{0.1, 0.2, 0.3};

    const auto est = ahlfors_constant(mu, UnitBox{}, 2.0, centers, radii);
    CHECK(est.constant == Approx(pi).epsilon(0.05));
    CHECK(est.center_count == 9);
    CHECK(est.radius_count == 3);

    // monotone as the lattice grows
    centers.push_back({0.3, 0.7});
    auto more_radii = radii;
    more_radii.push_back(0.05);
    const auto est2 = ahlfors_constant(mu, UnitBox{}, 2.0, centers, more_radii);
    CHECK(est2.constant >= est.constant);
}

TEST_CASE("ahlfors constant: zero measure and segment measure", "[measure_core]")
{
    std::vector<std::vector<double>> pts;
    std::vector<double>              w0, wseg;
    const int                        m = 2000;
    for (int i = 0; i < m; ++i) {
        pts.push_back({0.1 + 0.8 * (i + 0.5) / m, 0.5});
        w0.push_back(0.0);
        wseg.push_back(0.8 / m);
    }
    const std::vector<std::vector<double>> centers{{0.5, 0.5}, {0.3, 0.5}, {0.5, 0.6}};
    const std::vector<double>              radii{0.05, 0.1, 0.2};

    CHECK(ahlfors_constant(SampledMeasureSpace::from_points(pts, w0), UnitBox{}, 1.0, centers, radii).constant == 0.0);
    const auto seg = ahlfors_constant(SampledMeasureSpace::from_points(pts, wseg), UnitBox{}, 1.0, centers, radii);
    CHECK(seg.constant == Approx(2.0).epsilon(0.01));
    CHECK(seg.constant <= 2.0 + 1e-9);

    CHECK_THROWS_AS(ahlfors_constant(SampledMeasureSpace::from_points(pts, wseg), UnitBox{}, 1.0, {}, radii), Error);
    CHECK_THROWS_AS(ahlfors_constant(SampledMeasureSpace::from_points(pts, wseg), UnitBox{}, 1.0, centers, {}), Error);
}
