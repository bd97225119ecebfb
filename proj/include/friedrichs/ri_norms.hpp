#pragma once
//
// Rearrangement-invariant norms evaluated on decreasing rearrangements:
// Lebesgue, Lorentz, Lorentz–Zygmund, Orlicz (Luxemburg) and exp L^gamma.
//
// Every non-Orlicz family has the form
//
//     || t^{1/p - 1/sigma} log^theta(1 + M / t^e) f*(t) ||_{L^sigma(0, cutoff)}
//
// which is what WeightedForm captures. On a step profile this reduces to a sum
// of per-piece weight integrals (sigma < inf) or per-piece weight suprema
// (sigma = inf), both independent of the profile values.
//

#include <friedrichs/common.hpp>
#include <friedrichs/measure_core.hpp>
#include <friedrichs/quadrature.hpp>

#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>

namespace friedrichs {

inline constexpr double unset_mass = std::numeric_limits<double>::quiet_NaN();

struct Lebesgue
{
    double p = 2.0;
};

struct Lorentz
{
    double p     = 2.0;
    double sigma = 2.0;
};

struct LorentzZygmund
{
    double p         = inf;
    double sigma     = inf;
    double theta     = 0.0;
    double mass      = unset_mass; // m(R); filled from the profile when unset
    double log_power = 1.0;        // e in log(1 + M / t^e)
};

// A(t) = t^p
struct PowerYoung
{
    double p = 2.0;
};

// A(t) = e^{t^gamma} - 1, replaced by its greatest convex minorant when gamma < 1
struct ShiftedExpYoung
{
    double gamma = 1.0;
};

// A(t) = inf * chi_(1, inf)(t)
struct IndicatorYoung
{};

using YoungFunction = std::variant<PowerYoung, ShiftedExpYoung, IndicatorYoung>;

struct OrliczYoung
{
    YoungFunction young;
};

struct OrliczExp
{
    double gamma = 1.0;
    double mass  = unset_mass;
};

struct LInf
{};

using NormSpec = std::variant<Lebesgue, Lorentz, LorentzZygmund, OrliczYoung, OrliczExp, LInf>;

////////////////////////////////////////////////////////////////////////////////
//
// Young functions
//
////////////////////////////////////////////////////////////////////////////////

namespace detail {

// Tangent point t1 of the line through the origin touching e^{t^g} - 1, g < 1.
inline double exp_young_tangent_point(double g)
{
    auto A  = [g](double t) { return std::expm1(std::pow(t, g)); };
    auto dA = [g](double t) { return std::exp(std::pow(t, g)) * g * std::pow(t, g - 1.0); };
    // t*A'(t) - A(t) changes sign from negative to positive past the inflection point
    double lo = std::pow((1.0 - g) / g, 1.0 / g);
    double hi = std::max(2.0 * lo, 1.0);
    while (hi * dA(hi) - A(hi) <= 0.0)
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid * dA(mid) - A(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-15 * hi)
            break;
    }
    return hi;
}

} // namespace detail

inline double young_eval(const YoungFunction& A, double t)
{
    return std::visit(
        [t](const auto& a) -> double {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, PowerYoung>) {
                return std::pow(t, a.p);
            } else if constexpr (std::is_same_v<T, ShiftedExpYoung>) {
                if (a.gamma >= 1.0)
                    return std::expm1(std::pow(t, a.gamma));
                static thread_local double cached_gamma = -1.0, cached_t1 = 0.0, cached_slope = 0.0;
                if (cached_gamma != a.gamma) {
                    cached_gamma = a.gamma;
                    cached_t1    = detail::exp_young_tangent_point(a.gamma);
                    cached_slope = std::expm1(std::pow(cached_t1, a.gamma)) / cached_t1;
                }
                return t < cached_t1 ? cached_slope * t : std::expm1(std::pow(t, a.gamma));
            } else {
                return t <= 1.0 ? 0.0 : inf;
            }
        },
        A);
}

inline std::string to_string(const YoungFunction& A)
{
    std::ostringstream out;
    std::visit(
        [&out](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, PowerYoung>)
                out << "t^" << a.p;
            else if constexpr (std::is_same_v<T, ShiftedExpYoung>)
                out << "exp(t^" << a.gamma << ")-1";
            else
                out << "inf*chi(1,inf)";
        },
        A);
    return out.str();
}

//
// Sampled check of the Young-function axioms on a log grid: A(0) = 0,
// nondecreasing, convex (second divided differences), not identically 0.
//
inline void validate_young(const YoungFunction& A)
{
    if (const auto* pw = std::get_if<PowerYoung>(&A); pw && !(pw->p > 0.0))
        fail_validation("bad_young", "power Young function needs p > 0");
    if (const auto* ex = std::get_if<ShiftedExpYoung>(&A); ex && !(ex->gamma > 0.0))
        fail_validation("bad_young", "exponential Young function needs gamma > 0");
    if (young_eval(A, 0.0) != 0.0)
        fail_validation("bad_young", "Young function must vanish at 0");

    std::vector<double> ts{0.0};
    for (int k = -60; k <= 40; ++k)
        ts.push_back(std::pow(2.0, 0.25 * k));
    double prev     = 0.0;
    bool   positive = false;
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double v = young_eval(A, ts[i]);
        if (v < prev)
            fail_validation("bad_young", "Young function " + to_string(A) + " is not nondecreasing");
        positive = positive || v > 0.0;
        prev     = v;
    }
    if (!positive)
        fail_validation("bad_young", "Young function is identically zero on the sample grid");
    for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
        const double a = ts[i - 1], b = ts[i], c = ts[i + 1];
        const double fa = young_eval(A, a), fb = young_eval(A, b), fc = young_eval(A, c);
        if (!std::isfinite(fc))
            break;
        const double s1 = (fb - fa) / (b - a), s2 = (fc - fb) / (c - b);
        if (s2 < s1 - 1e-9 * std::max(1.0, std::abs(s1)))
            fail_validation("bad_young", "Young function " + to_string(A) + " is not convex near t=" + std::to_string(b));
    }
}

////////////////////////////////////////////////////////////////////////////////
//
// NormSpec validation and text form
//
////////////////////////////////////////////////////////////////////////////////

inline void validate(const NormSpec& spec)
{
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Lebesgue>) {
                if (!(s.p >= 1.0))
                    fail_validation("inadmissible_norm", "Lebesgue exponent must satisfy 1 <= p <= inf");
            } else if constexpr (std::is_same_v<T, Lorentz>) {
                const bool general = s.p > 1.0 && std::isfinite(s.p) && s.sigma >= 1.0;
                const bool one     = s.p == 1.0 && s.sigma == 1.0;
                const bool top     = std::isinf(s.p) && std::isinf(s.sigma);
                if (!(general || one || top))
                    fail_validation("inadmissible_norm",
                                    "Lorentz parameters must satisfy either 1<p<inf and 1<=sigma<=inf, or p=sigma=1, "
                                    "or p=sigma=inf");
            } else if constexpr (std::is_same_v<T, LorentzZygmund>) {
                if (!(s.p >= 1.0) || !(s.sigma >= 1.0) || !std::isfinite(s.theta))
                    fail_validation("inadmissible_norm",
                                    "Lorentz-Zygmund parameters must satisfy 1<=p,sigma<=inf and finite theta");
                if (!std::isnan(s.mass) && !(s.mass > 0.0 && std::isfinite(s.mass)))
                    fail_validation("inadmissible_norm", "Lorentz-Zygmund functional requires finite mass m(R) < inf");
                if (!(s.log_power > 0.0))
                    fail_validation("inadmissible_norm", "log substitution exponent must be positive");
            } else if constexpr (std::is_same_v<T, OrliczYoung>) {
                validate_young(s.young);
            } else if constexpr (std::is_same_v<T, OrliczExp>) {
                if (!(s.gamma > 0.0))
                    fail_validation("inadmissible_norm", "exp L^gamma requires gamma > 0");
                if (!std::isnan(s.mass) && !(s.mass > 0.0 && std::isfinite(s.mass)))
                    fail_validation("inadmissible_norm", "exp L^gamma requires finite mass m(R) < inf");
            }
        },
        spec);
}

namespace detail {

inline std::string fmt_num(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

inline double parse_num(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    if (s == "inf" || s == "Inf" || s == "infinity")
        return inf;
    if (s == "-inf")
        return -inf;
    double v   = 0.0;
    auto   res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail_validation("bad_number", "cannot parse number '" + std::string(s) + "'");
    return v;
}

} // namespace detail

inline std::string to_string(const NormSpec& spec)
{
    using detail::fmt_num;
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Lebesgue>)
                return "Lp(" + fmt_num(s.p) + ")";
            else if constexpr (std::is_same_v<T, Lorentz>)
                return "Lorentz(" + fmt_num(s.p) + "," + fmt_num(s.sigma) + ")";
            else if constexpr (std::is_same_v<T, LorentzZygmund>)
                return "LZ(" + fmt_num(s.p) + "," + fmt_num(s.sigma) + "," + fmt_num(s.theta) + ")";
            else if constexpr (std::is_same_v<T, OrliczYoung>)
                return "Orlicz(" + to_string(s.young) + ")";
            else if constexpr (std::is_same_v<T, OrliczExp>)
                return "expL(" + fmt_num(s.gamma) + ")";
            else
                return "Linf";
        },
        spec);
}

// Text syntax: Lp(p), Lorentz(p,sigma), LZ(p,sigma,theta), expL(gamma), Linf.
inline NormSpec parse_norm_spec(std::string_view text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s.push_back(c);
    if (s == "Linf" || s == "Lp(inf)")
        return LInf{};

    const auto open  = s.find('(');
    const auto close = s.rfind(')');
    if (open == std::string::npos || close != s.size() - 1)
        fail_validation("bad_normspec", "cannot parse norm spec '" + std::string(text) + "'");
    const std::string   name = s.substr(0, open);
    std::vector<double> args;
    std::string_view    body(s.data() + open + 1, close - open - 1);
    while (!body.empty()) {
        auto comma = body.find(',');
        args.push_back(detail::parse_num(body.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        body.remove_prefix(comma + 1);
    }

    auto need = [&](std::size_t n) {
        if (args.size() != n)
            fail_validation("bad_normspec", name + " expects " + std::to_string(n) + " argument(s)");
    };
    NormSpec spec;
    if (name == "Lp") {
        need(1);
        spec = Lebesgue{args[0]};
    } else if (name == "Lorentz") {
        need(2);
        spec = Lorentz{args[0], args[1]};
    } else if (name == "LZ") {
        need(3);
        spec = LorentzZygmund{args[0], args[1], args[2]};
    } else if (name == "expL") {
        need(1);
        spec = OrliczExp{args[0]};
    } else {
        fail_validation("bad_normspec", "unknown norm family '" + name + "'");
    }
    validate(spec);
    return spec;
}

// Fills an unset mass M for the finite-measure families.
inline NormSpec with_mass(NormSpec spec, double mass)
{
    if (auto* lz = std::get_if<LorentzZygmund>(&spec); lz && std::isnan(lz->mass))
        lz->mass = mass;
    if (auto* ex = std::get_if<OrliczExp>(&spec); ex && std::isnan(ex->mass))
        ex->mass = mass;
    return spec;
}

////////////////////////////////////////////////////////////////////////////////
//
// weighted forms
//
////////////////////////////////////////////////////////////////////////////////

struct WeightedForm
{
    double sigma     = 1.0;
    double inv_p     = 1.0;
    double theta     = 0.0;
    double mass      = 1.0;
    double log_power = 1.0;
    double cutoff    = inf;

    bool is_sup() const noexcept { return std::isinf(sigma); }

    // pointwise weight t^{1/p - 1/sigma} log^theta(1 + M/t^e)
    double weight(double t) const
    {
        const double a = inv_p - (is_sup() ? 0.0 : 1.0 / sigma);
        if (theta == 0.0)
            return a == 0.0 ? 1.0 : std::pow(t, a);
        const double L = std::log1p(mass * std::pow(t, -log_power));
        return std::exp(a * std::log(t) + theta * std::log(L));
    }

    // weight(t)^sigma for sigma < inf
    double weight_pow(double t) const
    {
        const double a = sigma * inv_p - 1.0;
        const double b = sigma * theta;
        if (b == 0.0)
            return a == 0.0 ? 1.0 : std::pow(t, a);
        const double L = std::log1p(mass * std::pow(t, -log_power));
        return std::exp(a * std::log(t) + b * std::log(L));
    }
};

// Orlicz families have no weighted form.
inline std::optional<WeightedForm> weighted_form(const NormSpec& spec, double domain_length)
{
    return std::visit(
        [domain_length](const auto& s) -> std::optional<WeightedForm> {
            using T = std::decay_t<decltype(s)>;
            WeightedForm f;
            f.cutoff = domain_length;
            if constexpr (std::is_same_v<T, Lebesgue>) {
                f.sigma = s.p;
                f.inv_p = 1.0 / s.p;
                return f;
            } else if constexpr (std::is_same_v<T, Lorentz>) {
                f.sigma = s.sigma;
                f.inv_p = 1.0 / s.p;
                return f;
            } else if constexpr (std::is_same_v<T, LorentzZygmund>) {
                f.sigma     = s.sigma;
                f.inv_p     = 1.0 / s.p;
                f.theta     = s.theta;
                f.mass      = std::isnan(s.mass) ? domain_length : s.mass;
                f.log_power = s.log_power;
                f.cutoff    = std::min(f.mass, domain_length);
                return f;
            } else if constexpr (std::is_same_v<T, LInf>) {
                f.sigma = inf;
                f.inv_p = 0.0;
                return f;
            } else {
                return std::nullopt;
            }
        },
        spec);
}

//
// ∫_lo^hi t^a log^b(1 + M/t^e) dt, lo >= 0. Pure powers are closed form; with
// a log factor the substitution w = log(1 + M t^{-e}) turns the t -> 0 end
// into an exponentially (a > -1) or algebraically (a = -1) decaying tail that
// adaptive Gauss–Kronrod handles. Returns +inf for divergent integrals.
//
inline double power_log_integral(double a, double b, double M, double e, double lo, double hi)
{
    if (!(hi > lo))
        return 0.0;
    if (b == 0.0) {
        if (a == -1.0)
            return lo == 0.0 ? inf : std::log(hi / lo);
        if (lo == 0.0)
            return a > -1.0 ? std::pow(hi, a + 1.0) / (a + 1.0) : inf;
        return (std::pow(hi, a + 1.0) - std::pow(lo, a + 1.0)) / (a + 1.0);
    }

    const double logM = std::log(M);
    auto         w_of = [&](double t) { return std::log1p(M * std::pow(t, -e)); };
    auto         l1m  = [](double w) { return std::log(-std::expm1(-w)); }; // log(1 - e^{-w})
    auto integrand    = [&](double w) {
        const double L = l1m(w);
        return std::exp((a + 1.0) / e * (logM - w - L) + b * std::log(w) - L) / e;
    };

    const double w_hi = w_of(hi);
    if (lo > 0.0)
        return quad::adaptive(integrand, w_hi, w_of(lo));

    if (a > -1.0)
        return quad::adaptive(integrand, w_hi, inf);
    if (a < -1.0 || b >= -1.0)
        return inf;
    // a == -1: integrand = (w^b + w^b / (e^w - 1)) / e
    const double algebraic = std::pow(w_hi, b + 1.0) / ((-b - 1.0) * e);
    auto         rest      = [&](double w) { return std::exp(b * std::log(w)) / std::expm1(w) / e; };
    return algebraic + quad::adaptive(rest, w_hi, inf);
}

//
// sup of the sigma = inf weight t^{1/p} log^theta(1 + M/t^e) over [lo, hi].
// In s = log t the log-derivative is 1/p - theta*e*h(t) with h increasing in
// t, so the weight is monotone for theta <= 0 and unimodal for theta > 0.
//
inline double weight_sup(const WeightedForm& f, double lo, double hi)
{
    if (!(hi > lo))
        return 0.0;
    if (f.theta <= 0.0)
        return (f.inv_p == 0.0 && f.theta == 0.0) ? 1.0 : f.weight(hi);

    auto deriv = [&](double t) {
        const double x = f.mass * std::pow(t, -f.log_power);
        const double h = x / ((1.0 + x) * std::log1p(x));
        return f.inv_p - f.theta * f.log_power * h;
    };
    if (lo == 0.0 && f.inv_p == 0.0)
        return inf;
    if (deriv(hi) >= 0.0)
        return f.weight(hi);
    if (lo > 0.0 && deriv(lo) <= 0.0)
        return f.weight(lo);
    double a = lo > 0.0 ? lo : hi;
    while (deriv(a) <= 0.0)
        a *= 0.5;
    double b = hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double m = std::sqrt(a * b);
        if (deriv(m) > 0.0)
            a = m;
        else
            b = m;
    }
    return f.weight(std::sqrt(a * b));
}

//
// Per-piece weights for a step function with the given breakpoints:
// ∫_piece weight^sigma (sigma < inf) or sup_piece weight (sigma = inf),
// restricted to (0, cutoff).
//
inline std::vector<double> piece_weights(const WeightedForm& f, std::span<const double> breaks)
{
    std::vector<double> W(breaks.size() > 0 ? breaks.size() - 1 : 0, 0.0);
    for (std::size_t i = 0; i < W.size(); ++i) {
        const double lo = breaks[i];
        const double hi = std::min(breaks[i + 1], f.cutoff);
        if (!(hi > lo))
            continue;
        if (f.is_sup())
            W[i] = weight_sup(f, lo, hi);
        else
            W[i] = power_log_integral(f.sigma * f.inv_p - 1.0, f.sigma * f.theta, f.mass, f.log_power, lo, hi);
    }
    return W;
}

// Combines values with precomputed piece weights.
inline double combine_pieces(const WeightedForm& f, std::span<const double> values, std::span<const double> W)
{
    double vmax = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (W[i] > 0.0)
            vmax = std::max(vmax, values[i]);
    if (vmax == 0.0)
        return 0.0;
    if (f.is_sup()) {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] > 0.0 && W[i] > 0.0)
                s = std::max(s, values[i] * W[i]);
        return s;
    }
    std::vector<double> terms(values.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0.0 || W[i] == 0.0)
            continue;
        if (std::isinf(W[i]))
            return inf;
        const double r = values[i] / vmax;
        terms[i]       = (f.sigma == 1.0 ? r : f.sigma == 2.0 ? r * r : std::pow(r, f.sigma)) * W[i];
    }
    return vmax * std::pow(pairwise_sum(terms), 1.0 / f.sigma);
}

////////////////////////////////////////////////////////////////////////////////
//
// Luxemburg norm
//
////////////////////////////////////////////////////////////////////////////////

// ∫ A(p(t)/lambda) dt over the profile
inline double modular(const YoungFunction& A, const RearrangementProfile& p, double lambda)
{
    std::vector<double> terms(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = p.values()[i];
        const double a = v == 0.0 ? 0.0 : young_eval(A, v / lambda);
        if (std::isinf(a))
            return inf;
        terms[i] = (p.breaks()[i + 1] - p.breaks()[i]) * a;
    }
    return pairwise_sum(terms);
}

inline double luxemburg(const YoungFunction& A, const RearrangementProfile& p)
{
    validate_young(A);
    if (p.is_zero())
        return 0.0;
    const double vmax = p.values().front();
    if (std::holds_alternative<IndicatorYoung>(A))
        return vmax;

    double hi = vmax;
    while (!(modular(A, p, hi) <= 1.0)) {
        hi *= 2.0;
        if (hi > 1e300)
            fail_runtime("not_in_orlicz_class", "modular is infinite for every lambda");
    }
    double lo = hi;
    while (modular(A, p, lo) <= 1.0) {
        lo *= 0.5;
        if (lo < 1e-300)
            return 0.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (modular(A, p, mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

////////////////////////////////////////////////////////////////////////////////
//
// norm evaluation
//
////////////////////////////////////////////////////////////////////////////////

inline double norm_eval(const NormSpec& spec, const RearrangementProfile& p)
{
    validate(spec);
    if (p.size() == 0 || p.is_zero())
        return 0.0;
    if (const auto* o = std::get_if<OrliczYoung>(&spec))
        return luxemburg(o->young, p);
    if (const auto* e = std::get_if<OrliczExp>(&spec))
        return luxemburg(ShiftedExpYoung{e->gamma}, p);

    const auto form = *weighted_form(spec, p.domain_length());
    const auto W    = piece_weights(form, p.breaks());
    return combine_pieces(form, p.values(), W);
}

struct ExpGammaNorm
{
    double luxemburg     = 0.0; // exp L^gamma via A(t) = e^{t^gamma} - 1
    double lz_functional = 0.0; // L^{inf,inf;-1/gamma}
    double ratio         = 0.0; // luxemburg / lz_functional, 0 when both vanish
};

inline ExpGammaNorm exp_gamma_norm(double gamma, double mass, const RearrangementProfile& p)
{
    validate(OrliczExp{gamma, mass});
    ExpGammaNorm r;
    r.luxemburg     = norm_eval(OrliczExp{gamma, mass}, p);
    r.lz_functional = norm_eval(LorentzZygmund{inf, inf, -1.0 / gamma, mass}, p);
    r.ratio         = r.lz_functional > 0.0 ? r.luxemburg / r.lz_functional : 0.0;
    return r;
}

} // namespace friedrichs
