// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <friedrichs/harness.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace friedrichs;

namespace {

using clock_type = std::chrono::steady_clock;

struct Outcome
{
    bool        pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double time_limit, const std::function<Outcome()>& body)
{
    const auto t0 = clock_type::now();
    Outcome    o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
    if (time_limit > 0.0 && secs >= time_limit) {
        o.pass = false;
        o.detail += " (over " + detail::fmt_num(time_limit) + " s)";
    }
    if (!o.pass)
        ++failures;
    std::printf("%s %2d %-34s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string num(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// random step functions shared by criteria 4 and 5
struct Step
{
    std::vector<double> w, v;
};

std::vector<Step> random_steps()
{
    std::mt19937_64   rng(2024);
    std::vector<Step> out;
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 1 + k % 23;
        Step              s;
        for (std::size_t i = 0; i < n; ++i) {
            s.w.push_back(0.05 + detail::unit_draw(rng));
            s.v.push_back(8.0 * detail::unit_draw(rng) - 4.0);
        }
        out.push_back(std::move(s));
    }
    return out;
}

double rel(double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

} // namespace

int main()
{
    criterion(1, "sharp isoperimetric constant", 5.0, [] {
        const auto s = sharp_constant_check(2, 1.0, 512);
        return Outcome{std::abs(s.ratio - 1.0) <= 0.01, "ratio=" + num(s.ratio) + " tol=0.01"};
    });

    criterion(2, "classical Hardy constant", 30.0, [] {
        const auto pb = make_template("hardy", {{"p", 2.0}, {"l", 1.0}});
        const auto bc = best_constant_lower(pb, 4096);
        return Outcome{bc.estimate >= 1.90 && bc.estimate <= 2.00, "estimate=" + num(bc.estimate) + " range=[1.90,2.00]"};
    });

    criterion(3, "criticality detection", 0.0, [] {
        auto       red  = [](double q) { return make_template("red1bis", {{"n", 2.0}, {"alpha", 2.0}, {"p", 1.5}, {"q", q}}); };
        const auto crit = refine_study(red(6.0), 3);
        const auto sup  = refine_study(red(8.0), 3);
        const double drift = std::abs(crit.ratios.back() - 1.0);
        const bool   ok    = crit.classification == Growth::bounded && drift < 0.1 &&
                        sup.classification == Growth::diverging && sup.ratios.back() >= 1.5;
        return Outcome{ok, "q=6 " + to_string(crit.classification) + " drift=" + num(drift) + "; q=8 " +
                               to_string(sup.classification) + " growth=" + num(sup.ratios.back())};
    });

    const auto steps = random_steps();

    criterion(4, "rearrangement identity", 0.0, [&] {
        double worst = 0.0;
        for (const auto& s : steps) {
            const auto space = std::make_shared<const SampledMeasureSpace>(SampledMeasureSpace::from_weights(s.w));
            const SampledFunction f(space, s.v);
            const auto            prof = rearrange(f);
            for (double p : {1.0, 2.0, inf})
                worst = std::max(worst, rel(space_lebesgue_norm(f, p), norm_eval(Lebesgue{p}, prof)));
        }
        return Outcome{worst <= 1e-12, "max_rel=" + num(worst) + " tol=1e-12"};
    });

    criterion(5, "norm coincidences", 0.0, [&] {
        double lor = 0.0, lux = 0.0;
        for (const auto& s : steps) {
            const auto prof = rearrange(s.w, s.v);
            for (double p : {1.0, 1.5, 2.0, 3.0, 6.0}) {
                const double lp = norm_eval(Lebesgue{p}, prof);
                lor             = std::max(lor, rel(norm_eval(Lorentz{p, p}, prof), lp));
                lux             = std::max(lux, rel(norm_eval(OrliczYoung{PowerYoung{p}}, prof), lp));
            }
        }
        return Outcome{lor <= 1e-9 && lux <= 1e-9, "lorentz=" + num(lor) + " luxemburg=" + num(lux) + " tol=1e-9"};
    });

    criterion(6, "dilation invariance", 0.0, [] {
        InequalitySpec spec;
        spec.theorem = "fried1";
        spec.params  = {{"p", 1.5}, {"r", 2.0}, {"q", 4.0}};
        double worst = 0.0;
        const std::vector<Trial<2>> us{TrialFunction<2>::bump(1.0, 3.0, {0.4, 0.5}),
                                       TrialFunction<2>::polynomial(0.2, {1.0, -0.5}, Mat<2>{{{0.3, 0.1}, {0.1, -0.4}}})};
        for (const auto& u : us) {
            worst = std::max(worst, scaling_test(spec, u, unit_square(), {0.5, 2.0, 4.0}).max_rel_spread);
            worst = std::max(worst, scaling_test(spec, u, l_shape(), {0.5, 2.0, 4.0}).max_rel_spread);
        }
        return Outcome{worst <= 1e-9, "max_rel_spread=" + num(worst) + " tol=1e-9"};
    });

    criterion(7, "pointwise estimate stability", 180.0, [] {
        const auto st = pointwise_corpus_study(CorpusConfig{});
        const bool ok = st.all_finite && st.entries.size() == 24 && st.max_spread < 3.0 && st.max_drift < 0.1;
        return Outcome{ok, "cases=" + std::to_string(st.entries.size()) + " spread=" + num(st.max_spread) +
                               " (<3) drift=" + num(st.max_drift) + " (<0.1)"};
    });

    criterion(8, "Hajlasz LP exactness", 0.0, [] {
        double err = 0.0, slack = inf;
        for (double a : {1.0, -2.5, 0.3, 7.0}) {
            std::vector<Vec2>   p;
            std::vector<double> w, v;
            for (int i = 0; i < 64; ++i) {
                const double x = (i + 0.5) / 64;
                p.push_back({x, 0.0});
                w.push_back(1.0 / 64);
                v.push_back(a * x);
            }
            const auto g = minimal_upper_gradient(BoundaryTrace<2>(p, w, v), GradientObjective::sup);
            err          = std::max(err, std::abs(g.objective - std::abs(a) / 2));
            slack        = std::min(slack, g.min_slack);
        }
        return Outcome{err <= 1e-6 && slack >= -1e-9, "abs_err=" + num(err) + " min_slack=" + num(slack)};
    });

    criterion(9, "symmetric-gradient annihilation", 0.0, [] {
        std::mt19937_64 rng(99);
        double          worst = 0.0;
        bool            exact = true;
        for (int k = 0; k < 20; ++k) {
            Mat<2> W{};
            const double a = 4.0 * detail::unit_draw(rng) - 2.0;
            W[0][1]        = a;
            W[1][0]        = -a;
            const auto u   = VectorField<2>::affine({detail::unit_draw(rng), detail::unit_draw(rng)}, W);
            for (int s = 0; s < 16; ++s) {
                const Vec2 x{detail::unit_draw(rng), detail::unit_draw(rng)};
                worst = std::max(worst, frobenius(u.sym_gradient(x)) / frobenius(u.jacobian(x)));
            }
            if (k < 4) {
                InequalitySpec spec;
                spec.theorem = "friedsymm.1";
                spec.params  = {{"p", 1.5}, {"r", 2.0}};
                exact        = exact && evaluate_inequality(spec, Trial<2>(u), unit_square()).terms[0].value == 0.0;
            }
        }
        return Outcome{worst <= 1e-12 && exact, "max_ratio=" + num(worst) + " report_term_zero=" + (exact ? "yes" : "no")};
    });

    criterion(10, "second-order structure", 0.0, [] {
        const auto u  = Trial<2>(TrialFunction<2>::polynomial(0.1, {0.3, 0.2}, Mat<2>{{{1.0, 0.2}, {0.2, -0.5}}}));
        bool       ok = true;
        std::string seen;
        for (const auto& [id, P] : std::vector<std::pair<std::string, ParamMap>>{
                 {"fried8", {{"p", 1.5}, {"r", 2.0}}}, {"fried9", {{"beta", 2.0}}}, {"inf2", {{"p", 3.0}}}}) {
            InequalitySpec spec;
            spec.theorem = id;
            spec.params  = P;
            const auto r = evaluate_inequality(spec, u, unit_square());
            for (const auto& t : r.terms) {
                ok = ok && (t.kind == TermKind::hessian || t.kind == TermKind::hajlasz_seminorm);
                seen += " " + to_string(t.kind);
            }
            ok = ok && resolve_layout(id, P, 2).lhs == LhsKind::grad_u;
        }
        return Outcome{ok, "kinds:" + seen};
    });

    criterion(11, "end-to-end determinism", 0.0, [] {
        const CorpusConfig cfg;
        const auto         a = corpus_json(corpus_run(cfg));
        const auto         b = corpus_json(corpus_run(cfg));
        return Outcome{a == b, "bytes=" + std::to_string(a.size()) + (a == b ? " identical" : " differ")};
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
