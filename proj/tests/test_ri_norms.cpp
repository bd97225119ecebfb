#include <friedrichs/ri_norms.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace friedrichs;
using Catch::Approx;

namespace {

RearrangementProfile indicator(double a) { return RearrangementProfile::constant(1.0, a); }

RearrangementProfile random_profile(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int>     nd(1, 30);
    std::uniform_real_distribution<double> ud(0.01, 1.0);
    const int                              n = nd(rng);
    std::vector<double>                    b{0.0}, v(n);
    for (int i = 0; i < n; ++i) {
        b.push_back(b.back() + ud(rng));
        v[i] = 5.0 * ud(rng);
    }
    std::sort(v.rbegin(), v.rend());
    return RearrangementProfile(b, v);
}

} // namespace

TEST_CASE("norm_eval on indicators", "[ri_norms]")
{
    CHECK(norm_eval(Lebesgue{2.0}, indicator(1.0)) == Approx(1.0).epsilon(1e-15));
    CHECK(norm_eval(Lorentz{2.0, 1.0}, indicator(1.0)) == Approx(2.0).epsilon(1e-14));
    CHECK(norm_eval(LInf{}, indicator(3.0)) == 1.0);
    CHECK(norm_eval(Lebesgue{inf}, RearrangementProfile({0.0, 1.0, 2.0}, {5.0, 1.0})) == 5.0);
}

TEST_CASE("Lorentz admissibility is enforced", "[ri_norms]")
{
    CHECK_THROWS_AS(norm_eval(Lorentz{1.0, 2.0}, indicator(1.0)), Error);
    CHECK_THROWS_AS(norm_eval(Lorentz{inf, 2.0}, indicator(1.0)), Error);
    CHECK_THROWS_AS(norm_eval(Lorentz{2.0, 0.5}, indicator(1.0)), Error);
    CHECK_NOTHROW(norm_eval(Lorentz{1.0, 1.0}, indicator(1.0)));
    CHECK_NOTHROW(norm_eval(Lorentz{inf, inf}, indicator(1.0)));
    CHECK_THROWS_AS(norm_eval(OrliczExp{-1.0}, indicator(1.0)), Error);
    CHECK_THROWS_AS(norm_eval(LorentzZygmund{2.0, 2.0, 1.0, inf}, indicator(1.0)), Error);
    try {
        norm_eval(Lorentz{0.5, 0.5}, indicator(1.0));
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("p=sigma=1") != std::string::npos);
    }
}

TEST_CASE("Lorentz nesting on indicators", "[ri_norms][property]")
{
    for (double p : {1.5, 2.0, 3.0}) {
        for (double a : {0.3, 1.0, 2.5}) {
            std::vector<double> got;
            for (double sigma : {1.0, p, 2.0 * p, inf}) {
                const double expected = (std::isinf(sigma) ? 1.0 : std::pow(p / sigma, 1.0 / sigma)) * std::pow(a, 1.0 / p);
                got.push_back(norm_eval(Lorentz{p, sigma}, indicator(a)));
                CHECK(got.back() == Approx(expected).epsilon(1e-13));
            }
            // (p/sigma)^{1/sigma} decreases up to sigma = e*p and then climbs back to 1
            CHECK(got[0] >= got[1]);
            CHECK(got[1] >= got[2]);
            CHECK(got[3] == Approx(got[1]).epsilon(1e-14));
        }
    }
}

TEST_CASE("Lorentz-Zygmund functional with log weights", "[ri_norms]")
{
    // oracle values from 30-digit mpmath quadrature
    CHECK(norm_eval(LorentzZygmund{2.0, 2.0, 1.0, 1.0}, indicator(1.0)) ==
          Approx(std::sqrt(2.60584009468462928580662021926)).epsilon(1e-10));
    CHECK(norm_eval(LorentzZygmund{inf, 2.0, -1.0, 1.0}, indicator(0.5)) ==
          Approx(std::sqrt(1.06302954362885342958641132481)).epsilon(1e-10));
    CHECK(norm_eval(LorentzZygmund{2.0, 1.0, 0.5, 2.0}, indicator(1.0)) == Approx(3.22599068408507220588395877058).epsilon(1e-10));
    CHECK(norm_eval(LorentzZygmund{1.0, 1.0, 1.0, 1.0, 1.5}, indicator(1.0)) ==
          Approx(1.81379936423421785059407825764).epsilon(1e-10));

    // sup form: max of sqrt(t) log(1 + 1/t) over (0,1) at t ~ 0.255
    CHECK(norm_eval(LorentzZygmund{2.0, inf, 1.0, 1.0}, indicator(1.0)) == Approx(0.804742342549411811).epsilon(1e-12));
    // theta > 0 with p = inf blows up at the origin
    CHECK(std::isinf(norm_eval(LorentzZygmund{inf, inf, 1.0, 1.0}, indicator(1.0))));
    // theta < 0, p = inf: weight increasing, sup at the right end
    CHECK(norm_eval(LorentzZygmund{inf, inf, -1.0, 1.0}, indicator(0.5)) == Approx(1.0 / std::log(3.0)).epsilon(1e-14));
    // divergent integral near 0
    CHECK(std::isinf(norm_eval(LorentzZygmund{inf, 2.0, -0.25, 1.0}, indicator(0.5))));
    // theta = 0 and M beyond the profile reduces to Lorentz
    CHECK(norm_eval(LorentzZygmund{2.0, 1.0, 0.0, 5.0}, indicator(1.0)) == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("Luxemburg norm", "[ri_norms]")
{
    CHECK(luxemburg(PowerYoung{2.0}, RearrangementProfile()) == 0.0);
    CHECK(luxemburg(PowerYoung{2.0}, indicator(4.0)) == Approx(2.0).epsilon(1e-12));
    CHECK(luxemburg(ShiftedExpYoung{1.0}, indicator(1.0)) == Approx(1.0 / std::log(2.0)).epsilon(1e-12));
    CHECK(luxemburg(IndicatorYoung{}, RearrangementProfile({0.0, 1.0, 3.0}, {2.0, 1.0})) == 2.0);
    CHECK_THROWS_AS(luxemburg(PowerYoung{0.5}, indicator(1.0)), Error);
}

TEST_CASE("exp L^gamma norm and its Lorentz-Zygmund companion", "[ri_norms]")
{
    CHECK(exp_gamma_norm(1.0, 1.0, RearrangementProfile()).luxemburg == 0.0);
    for (double c : {0.5, 1.0, 3.0})
        CHECK(exp_gamma_norm(1.0, 1.0, RearrangementProfile::constant(c, 1.0)).luxemburg ==
              Approx(c / std::log(2.0)).epsilon(1e-12));

    // truncated log^{1/gamma}(M/t) profile: both functionals finite, ratio bounded under refinement
    for (double gamma : {0.5, 1.0, 2.0}) {
        std::vector<double> ratios;
        for (int n : {40, 160, 640}) {
            std::vector<double> b{0.0}, v;
            const double        M = 1.0;
            for (int i = n; i >= 1; --i)
                b.push_back(M * std::pow(2.0, -0.25 * i));
            b.push_back(M);
            for (std::size_t i = 0; i + 1 < b.size(); ++i) {
                const double t = i == 0 ? b[1] : b[i];
                v.push_back(std::pow(std::log(M / t), 1.0 / gamma));
            }
            const auto r = exp_gamma_norm(gamma, M, RearrangementProfile(b, v));
            REQUIRE(std::isfinite(r.luxemburg));
            REQUIRE(std::isfinite(r.lz_functional));
            REQUIRE(r.ratio > 0.0);
            ratios.push_back(r.ratio);
        }
        CHECK(ratios.back() / ratios.front() < 2.0);
        CHECK(ratios.back() / ratios.front() > 0.5);
    }
}

TEST_CASE("non-convex exponential Young functions are convexified", "[ri_norms]")
{
    CHECK_NOTHROW(validate_young(ShiftedExpYoung{0.5}));
    CHECK(young_eval(ShiftedExpYoung{0.5}, 0.0) == 0.0);
    // agrees with e^{t^gamma}-1 far out
    CHECK(young_eval(ShiftedExpYoung{0.5}, 100.0) == Approx(std::expm1(10.0)).epsilon(1e-14));
}

TEST_CASE("norm spec text syntax", "[ri_norms]")
{
    CHECK(to_string(parse_norm_spec("Lp(2)")) == "Lp(2)");
    CHECK(to_string(parse_norm_spec("Lorentz(2, 1)")) == "Lorentz(2,1)");
    CHECK(to_string(parse_norm_spec("LZ(inf,inf,-0.5)")) == "LZ(inf,inf,-0.5)");
    CHECK(to_string(parse_norm_spec("expL(1.5)")) == "expL(1.5)");
    CHECK(std::holds_alternative<LInf>(parse_norm_spec("Linf")));
    CHECK_THROWS_AS(parse_norm_spec("Lorentz(1,2)"), Error);
    CHECK_THROWS_AS(parse_norm_spec("Foo(1)"), Error);
    CHECK_THROWS_AS(parse_norm_spec("Lp(x)"), Error);
    CHECK_THROWS_AS(parse_norm_spec("Lp(1,2)"), Error);
}

TEST_CASE("ri norm properties on random profiles", "[ri_norms][property]")
{
    std::mt19937_64         rng(11);
    const std::vector<NormSpec> specs{Lebesgue{1.0},          Lebesgue{2.0},        Lebesgue{3.5},        LInf{},
                                      Lorentz{2.0, 1.0},      Lorentz{3.0, inf},    Lorentz{1.5, 4.0},
                                      LorentzZygmund{2.0, 2.0, 1.0}, LorentzZygmund{inf, inf, -0.5},
                                      LorentzZygmund{2.0, 1.0, -2.0}, OrliczExp{1.0}, OrliczYoung{PowerYoung{3.0}}};

    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_profile(rng);
        const auto q = p.scaled(1.0); // same breaks
        std::vector<double> bigger = q.values();
        for (auto& x : bigger)
            x *= 1.3;
        bigger.front() *= 1.1;
        const RearrangementProfile pbig(p.breaks(), bigger);

        for (const auto& spec : specs) {
            const double n1 = norm_eval(spec, p);
            // absolute homogeneity
            REQUIRE(norm_eval(spec, p.scaled(-2.5)) == Approx(2.5 * n1).epsilon(1e-12));
            // lattice monotonicity
            REQUIRE(norm_eval(spec, pbig) >= n1 * (1.0 - 1e-14));
        }

        for (double pe : {1.0, 1.5, 2.0, 4.0}) {
            const double lp = norm_eval(Lebesgue{pe}, p);
            REQUIRE(norm_eval(Lorentz{pe, pe}, p) == Approx(lp).epsilon(1e-12));
            REQUIRE(luxemburg(PowerYoung{pe}, p) == Approx(lp).epsilon(1e-9));
        }
    }
}

TEST_CASE("representation identity: space norm equals profile norm", "[ri_norms][measure_core]")
{
    std::mt19937_64                        rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w(25), v(25);
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = u(rng);
            v[i] = 4.0 * u(rng) - 2.0;
        }
        const auto prof = rearrange(w, v);
        for (double p : {1.0, 2.0, 3.0, inf}) {
            const double a = space_lebesgue_norm(w, v, p);
            const double b = norm_eval(Lebesgue{p}, prof);
            REQUIRE(std::abs(a - b) <= 1e-12 * a);
        }
    }
}
