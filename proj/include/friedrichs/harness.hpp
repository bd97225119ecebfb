#pragma once
//
// Full trace inequalities on sampled domains: the theorem catalogue,
// coefficients, term evaluation, scaling and sharpness studies, rearrangement
// checks, corpus runs and their reports.
//

#include <friedrichs/geometry.hpp>
#include <friedrichs/hajlasz_gradient.hpp>
#include <friedrichs/hardy_lab.hpp>
#include <friedrichs/measure_core.hpp>
#include <friedrichs/potential_ops.hpp>
#include <friedrichs/ri_norms.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace friedrichs {

////////////////////////////////////////////////////////////////////////////////
//
// theorem catalogue
//
////////////////////////////////////////////////////////////////////////////////

enum class TermKind
{
    gradient,
    hessian,
    sym_gradient,
    boundary_trace,
    hajlasz_seminorm
};

inline std::string to_string(TermKind k)
{
    switch (k) {
    case TermKind::gradient:
        return "gradient";
    case TermKind::hessian:
        return "hessian";
    case TermKind::sym_gradient:
        return "sym_gradient";
    case TermKind::boundary_trace:
        return "boundary_trace";
    case TermKind::hajlasz_seminorm:
        return "hajlasz_seminorm";
    }
    return "";
}

enum class FunctionClass
{
    first_order,
    second_order,
    symmetric
};

enum class LhsKind
{
    u,     // |u|, or the vector magnitude
    grad_u // |grad u|
};

// multiplier in front of a right-hand term
enum class CoefRule
{
    none,
    volume_max,  // max{mu^{n/alpha}, L^n}^e
    surface_max, // max{mu^{(n-1)/alpha}, H^{n-1}}^e
    volume_pow,  // L^n^e
    surface_pow  // H^{n-1}^e
};

struct TermLayout
{
    std::string name;
    TermKind    kind = TermKind::gradient;
    NormSpec    norm = Lebesgue{2.0};
    CoefRule    rule = CoefRule::none;
    double      exponent = 0.0;
};

struct Layout
{
    std::string              theorem;
    FunctionClass            cls = FunctionClass::first_order;
    LhsKind                  lhs = LhsKind::u;
    NormSpec                 target = Lebesgue{2.0};
    std::vector<TermLayout>  terms;
    std::string              exponent_kind; // "q", "gamma" or empty
    double                   exponent = std::nan("");
    std::string              exponent_branch;
    ParamMap                 params;
    std::vector<std::string> notes;
};

inline const std::vector<std::string>& theorem_ids()
{
    static const std::vector<std::string> ids{"fried1", "fried3", "infdisp", "mainlor", "BWlor", "inflor", "fried4",
                                              "fried5", "fried6", "fried7",  "fried8",  "fried9", "inf2",   "L2",
                                              "BW2",    "infL2",  "friedsymm.1", "friedsymm.3", "infsymm"};
    return ids;
}

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok)
        fail_validation("hypothesis", what);
}

inline bool in_unit_range(double x) { return x >= 1.0 && x <= inf; }

// critical value or a user value not above it
inline double resolve_exponent(ParamMap& P, const std::string& key, const CriticalExponent& crit, bool allow_super,
                               std::string& branch, std::vector<std::string>& notes)
{
    branch = crit.branch;
    if (!P.count(key)) {
        P[key] = crit.value;
        return crit.value;
    }
    const double v = P[key];
    if (!(v > 0.0))
        fail_validation("hypothesis", key + " must be positive");
    if (v > crit.value * (1.0 + 1e-12)) {
        if (!allow_super)
            fail_validation("inadmissible_" + key, key + " exceeds the critical value " + detail::fmt_num(crit.value));
        notes.push_back("supercritical " + key + " = " + detail::fmt_num(v) + " above " + detail::fmt_num(crit.value));
        branch = "supercritical";
    } else if (v < crit.value * (1.0 - 1e-12)) {
        branch = "subcritical";
    }
    return v;
}

// eta must dominate the fine exponent of every branch attaining the minimum
inline double resolve_eta(ParamMap& P, const CriticalExponent& crit, const std::map<std::string, double>& fine)
{
    double             need = 1.0;
    std::istringstream in(crit.branch);
    std::string        name;
    while (std::getline(in, name, '+'))
        if (const auto it = fine.find(name); it != fine.end())
            need = std::max(need, it->second);
    if (!P.count("eta"))
        P["eta"] = need;
    require(P["eta"] >= need, "eta must be at least " + detail::fmt_num(need));
    return P["eta"];
}

} // namespace detail

//
// Resolves parameters, checks the hypotheses and lays out the left-hand norm
// and the right-hand terms with their coefficient rules.
//
inline Layout resolve_layout(const std::string& id, const ParamMap& in, std::size_t dim, bool allow_super = false)
{
    using detail::param;
    using detail::param_or;
    using detail::require;

    Layout L;
    L.theorem = id;
    ParamMap     P = in;
    const double n = double(dim);
    if (P.count("n") && P["n"] != n)
        fail_validation("dimension_mismatch", "parameter n does not match the domain dimension");
    P["n"]             = n;
    const double alpha = param_or(P, "alpha", n);
    P["alpha"]         = alpha;
    detail::check_measure(TheoremParams{n, alpha});

    auto lebesgue = [](double p) -> NormSpec { return Lebesgue{p}; };
    auto lorentz  = [](double p, double s) -> NormSpec { return Lorentz{p, s}; };
    auto lz       = [](double s, double t) -> NormSpec { return LorentzZygmund{inf, s, t}; };
    auto expl     = [](double g) -> NormSpec { return OrliczExp{g}; };
    auto term     = [](std::string name, TermKind k, NormSpec norm, CoefRule rule = CoefRule::none, double e = 0.0) {
        return TermLayout{std::move(name), k, std::move(norm), rule, e};
    };

    const bool first_q  = id == "fried1" || id == "mainlor" || id == "friedsymm.1" || id == "fried8";
    const bool first_g  = id == "fried3" || id == "friedsymm.3" || id == "fried9";
    const bool first_oo = id == "infdisp" || id == "infsymm" || id == "inf2" || id == "inflor";
    const bool second   = id == "fried4" || id == "L2" || id == "fried5" || id == "fried6" || id == "fried7" || id == "BW2" ||
                        id == "infL2";

    if (id == "friedsymm.1" || id == "friedsymm.3" || id == "infsymm")
        L.cls = FunctionClass::symmetric;
    else if (second || id == "fried8" || id == "fried9" || id == "inf2")
        L.cls = FunctionClass::second_order;
    if (id == "fried8" || id == "fried9" || id == "inf2")
        L.lhs = LhsKind::grad_u;
    if (second)
        require(dim >= 3, id + " needs n >= 3");

    const TermKind interior = L.cls == FunctionClass::symmetric ? TermKind::sym_gradient
                              : L.cls == FunctionClass::second_order ? TermKind::hessian
                                                                     : TermKind::gradient;
    const std::string iname = to_string(interior);

    if (first_q) {
        const double p    = param(P, "p"), r = param(P, "r");
        const auto   crit = first_order_q(TheoremParams{n, alpha, p, r});
        const double q    = detail::resolve_exponent(P, "q", crit, allow_super, L.exponent_branch, L.notes);
        L.exponent_kind   = "q";
        L.exponent        = q;
        const double eg   = alpha / (q * n) - (n - p) / (p * n);
        const double eb   = alpha / (q * (n - 1.0)) - 1.0 / r;
        if (id == "mainlor") {
            const double sigma = param_or(P, "sigma", p), rho = param_or(P, "rho", r);
            P["sigma"]         = sigma;
            P["rho"]           = rho;
            require(detail::in_unit_range(sigma) && detail::in_unit_range(rho), "sigma and rho must lie in [1, inf]");
            const double eta = detail::resolve_eta(P, crit, {{"gradient", sigma}, {"boundary", rho}});
            L.target         = lorentz(q, eta);
            L.terms          = {term(iname, interior, lorentz(p, sigma), CoefRule::volume_max, eg),
                                term("boundary", TermKind::boundary_trace, lorentz(r, rho), CoefRule::surface_max, eb)};
        } else if (id == "fried8") {
            L.target = lebesgue(q);
            L.terms  = {term(iname, interior, lebesgue(p), CoefRule::volume_max, eg),
                        term("hajlasz", TermKind::hajlasz_seminorm, lebesgue(r), CoefRule::surface_max, eb)};
            L.notes.push_back("seminorm coefficient base read as max{mu^((n-1)/alpha), H^(n-1)}");
        } else {
            L.target = lebesgue(q);
            L.terms  = {term(iname, interior, lebesgue(p), CoefRule::volume_max, eg),
                        term("boundary", TermKind::boundary_trace, lebesgue(r), CoefRule::surface_max, eb)};
        }
    } else if (first_g) {
        const double beta = param(P, "beta");
        const auto   crit = first_order_gamma(TheoremParams{n, alpha, std::nan(""), std::nan(""), std::nan(""), beta});
        const double g    = detail::resolve_exponent(P, "gamma", crit, allow_super, L.exponent_branch, L.notes);
        L.exponent_kind   = "gamma";
        L.exponent        = g;
        L.target          = expl(g);
        L.notes.push_back("n' read as n/(n-1)");
        if (id == "fried9")
            L.terms = {term(iname, interior, lebesgue(n)), term("hajlasz", TermKind::hajlasz_seminorm, expl(beta))};
        else
            L.terms = {term(iname, interior, lebesgue(n)), term("boundary", TermKind::boundary_trace, expl(beta))};
    } else if (first_oo) {
        const double p = param(P, "p");
        L.target       = LInf{};
        NormSpec src   = lebesgue(p);
        if (id == "inflor") {
            const double sigma = param_or(P, "sigma", 1.0);
            P["sigma"]         = sigma;
            require((p == n && sigma == 1.0) || (p > n && detail::in_unit_range(sigma)),
                    "inflor needs p = n with sigma = 1, or p > n");
            src = lorentz(p, sigma);
        } else {
            require(p > n, id + " needs p > n");
        }
        L.terms = {term(iname, interior, src, CoefRule::volume_pow, 1.0 / n - 1.0 / p),
                   id == "inf2" ? term("hajlasz", TermKind::hajlasz_seminorm, LInf{})
                                : term("boundary", TermKind::boundary_trace, LInf{})};
    } else if (id == "BWlor" || id == "BW2") {
        const bool   two   = id == "BW2";
        const double sigma = param_or(P, "sigma", 2.0), rho = param_or(P, "rho", 2.0);
        const double ups   = two ? param_or(P, "upsilon", 2.0) : 2.0;
        const double vs    = param_or(P, "varsigma", -1.0 / rho - 0.5);
        P["sigma"] = sigma;
        P["rho"]   = rho;
        P["varsigma"] = vs;
        if (two)
            P["upsilon"] = ups;
        require(sigma > 1.0 && rho > 1.0 && ups > 1.0, "sigma, rho and upsilon must exceed 1");
        require(vs < -1.0 / rho, "varsigma must be below -1/rho");
        double need = std::max(sigma, rho);
        if (two)
            need = std::max(need, ups);
        if (!P.count("eta"))
            P["eta"] = need;
        const double eta = P["eta"];
        require(eta >= need, "eta must be at least " + detail::fmt_num(need));
        double tmax = std::min(-1.0 + 1.0 / sigma - 1.0 / eta, vs + 1.0 / rho - 1.0 / eta);
        if (two)
            tmax = std::min(tmax, -1.0 + 1.0 / ups - 1.0 / eta);
        if (!P.count("theta"))
            P["theta"] = tmax;
        const double theta = P["theta"];
        require(theta <= tmax + 1e-12, "theta must be at most " + detail::fmt_num(tmax));
        L.target = lz(eta, theta);
        if (two)
            L.terms = {term(iname, interior, lorentz(n / 2.0, sigma)),
                       term("hajlasz", TermKind::hajlasz_seminorm, lorentz(n - 1.0, ups)),
                       term("boundary", TermKind::boundary_trace, lz(rho, vs))};
        else
            L.terms = {term(iname, interior, lorentz(n, sigma)), term("boundary", TermKind::boundary_trace, lz(rho, vs))};
        L.notes.push_back("boundary Lorentz-Zygmund norm evaluated over the boundary");
    } else if (id == "fried4" || id == "L2") {
        const double p = param(P, "p"), r = param(P, "r"), s = param(P, "s");
        const auto   crit = second_order_q(TheoremParams{n, alpha, p, r, s});
        const double q    = detail::resolve_exponent(P, "q", crit, allow_super, L.exponent_branch, L.notes);
        L.exponent_kind   = "q";
        L.exponent        = q;
        const double eh   = alpha / (q * n) - (n - 2.0 * p) / (p * n);
        const double es   = alpha / (q * (n - 1.0)) - (n - 1.0 - s) / (s * (n - 1.0));
        const double eb   = alpha / (q * (n - 1.0)) - 1.0 / r;
        if (id == "L2") {
            const double sigma = param_or(P, "sigma", p), ups = param_or(P, "upsilon", s), rho = param_or(P, "rho", r);
            P["sigma"]   = sigma;
            P["upsilon"] = ups;
            P["rho"]     = rho;
            require(detail::in_unit_range(sigma) && detail::in_unit_range(ups) && detail::in_unit_range(rho),
                    "sigma, upsilon and rho must lie in [1, inf]");
            const double eta = detail::resolve_eta(P, crit, {{"hessian", sigma}, {"boundary_gradient", ups}, {"boundary", rho}});
            L.target = lorentz(q, eta);
            L.terms  = {term(iname, interior, lorentz(p, sigma), CoefRule::volume_max, eh),
                        term("hajlasz", TermKind::hajlasz_seminorm, lorentz(s, ups), CoefRule::surface_max, es),
                        term("boundary", TermKind::boundary_trace, lorentz(r, rho), CoefRule::surface_max, eb)};
        } else {
            L.target = lebesgue(q);
            L.terms  = {term(iname, interior, lebesgue(p), CoefRule::volume_max, eh),
                        term("hajlasz", TermKind::hajlasz_seminorm, lebesgue(s), CoefRule::surface_max, es),
                        term("boundary", TermKind::boundary_trace, lebesgue(r), CoefRule::surface_max, eb)};
            L.notes.push_back("stray token before the third term read as a plain sum");
        }
    } else if (id == "fried5" || id == "fried6") {
        const bool   border = id == "fried6";
        const double beta   = param(P, "beta");
        const double s      = border ? n - 1.0 : param(P, "s");
        P["s"]              = s;
        if (!border)
            require(s > n - 1.0, "fried5 needs s > n-1");
        const auto   crit = second_order_gamma(TheoremParams{n, alpha, std::nan(""), std::nan(""), s, beta}, border);
        const double g    = detail::resolve_exponent(P, "gamma", crit, allow_super, L.exponent_branch, L.notes);
        L.exponent_kind   = "gamma";
        L.exponent        = g;
        L.target          = expl(g);
        L.terms           = {term(iname, interior, lebesgue(n / 2.0)), term("hajlasz", TermKind::hajlasz_seminorm, lebesgue(s)),
                             term("boundary", TermKind::boundary_trace, expl(beta))};
    } else if (id == "fried7" || id == "infL2") {
        const double p = param(P, "p"), s = param(P, "s");
        NormSpec     hs = lebesgue(p), bs = lebesgue(s);
        if (id == "infL2") {
            const double sigma = param_or(P, "sigma", 1.0), ups = param_or(P, "upsilon", 1.0);
            P["sigma"]   = sigma;
            P["upsilon"] = ups;
            require((p == n / 2.0 && sigma == 1.0) || (p > n / 2.0 && detail::in_unit_range(sigma)),
                    "infL2 needs p = n/2 with sigma = 1, or p > n/2");
            require((s == n - 1.0 && ups == 1.0) || (s > n - 1.0 && detail::in_unit_range(ups)),
                    "infL2 needs s = n-1 with upsilon = 1, or s > n-1");
            hs = lorentz(p, sigma);
            bs = lorentz(s, ups);
        } else {
            require(p > n / 2.0, "fried7 needs p > n/2");
            require(s > n - 1.0, "fried7 needs s > n-1");
        }
        L.target = LInf{};
        L.terms  = {term(iname, interior, hs, CoefRule::volume_pow, 2.0 / n - 1.0 / p),
                    term("hajlasz", TermKind::hajlasz_seminorm, bs, CoefRule::surface_pow, 1.0 / (n - 1.0) - 1.0 / s),
                    term("boundary", TermKind::boundary_trace, LInf{})};
    } else {
        fail_validation("unknown_theorem", "unknown theorem '" + id + "'");
    }

    validate(L.target);
    for (const auto& t : L.terms)
        validate(t.norm);
    L.params = std::move(P);
    return L;
}

////////////////////////////////////////////////////////////////////////////////
//
// coefficients
//
////////////////////////////////////////////////////////////////////////////////

struct Coefficient
{
    double      value    = 1.0;
    double      base     = 1.0;
    double      exponent = 0.0;
    std::string branch   = "none"; // mu, domain, tie, fixed or none
};

inline std::vector<Coefficient> coefficients(const Layout& L, double volume, double surface, double mu_mass)
{
    if (!(volume > 0.0) || !(surface > 0.0) || !(mu_mass > 0.0) || !std::isfinite(volume) || !std::isfinite(surface) ||
        !std::isfinite(mu_mass))
        fail_validation("bad_mass", "volume, surface and mu mass must be positive and finite");
    const double n = L.params.at("n"), alpha = L.params.at("alpha");
    auto         pick = [](double a, double b, Coefficient& c) {
        c.base   = std::max(a, b);
        c.branch = a > b ? "mu" : (b > a ? "domain" : "tie");
    };
    std::vector<Coefficient> out;
    for (const auto& t : L.terms) {
        Coefficient c;
        c.exponent = t.exponent;
        switch (t.rule) {
        case CoefRule::none:
            break;
        case CoefRule::volume_max:
            pick(std::pow(mu_mass, n / alpha), volume, c);
            break;
        case CoefRule::surface_max:
            pick(std::pow(mu_mass, (n - 1.0) / alpha), surface, c);
            break;
        case CoefRule::volume_pow:
            c.base   = volume;
            c.branch = "fixed";
            break;
        case CoefRule::surface_pow:
            c.base   = surface;
            c.branch = "fixed";
            break;
        }
        c.value = t.rule == CoefRule::none ? 1.0 : std::pow(c.base, c.exponent);
        if (!std::isfinite(c.exponent) || !std::isfinite(c.value) || !(c.value > 0.0))
            fail_validation("undefined_coefficient", "coefficient of term '" + t.name + "' is undefined");
        out.push_back(c);
    }
    return out;
}

// params must carry n
inline std::vector<Coefficient> coefficient(const std::string& theorem, const ParamMap& params, double volume, double surface,
                                            double mu_mass)
{
    const auto it = params.find("n");
    if (it == params.end() || !(it->second >= 2.0) || it->second != std::floor(it->second))
        fail_validation("missing_parameter", "coefficient needs an integer n >= 2");
    return coefficients(resolve_layout(theorem, params, std::size_t(it->second)), volume, surface, mu_mass);
}

////////////////////////////////////////////////////////////////////////////////
//
// measures
//
////////////////////////////////////////////////////////////////////////////////

enum class MeasureKind
{
    lebesgue,
    boundary_layer, // density 1/delta within distance delta of the boundary
    slice           // H^{n-1} on the mid hyperplane x_n = const
};

struct MeasureChoice
{
    MeasureKind kind  = MeasureKind::lebesgue;
    double      delta = 0.0; // layer width; 0: diameter / 16
};

inline MeasureChoice parse_measure(std::string_view s)
{
    if (s == "lebesgue")
        return {};
    if (s == "slice")
        return {MeasureKind::slice, 0.0};
    if (s.rfind("boundary-layer", 0) == 0) {
        MeasureChoice m{MeasureKind::boundary_layer, 0.0};
        if (s.size() > 14) {
            if (s[14] != ':')
                fail_validation("bad_measure", "measure must be lebesgue, boundary-layer[:delta] or slice");
            m.delta = detail::parse_num(s.substr(15));
            if (!(m.delta > 0.0))
                fail_validation("bad_measure", "layer width must be positive");
        }
        return m;
    }
    fail_validation("bad_measure", "measure must be lebesgue, boundary-layer[:delta] or slice");
}

inline std::string to_string(const MeasureChoice& m)
{
    switch (m.kind) {
    case MeasureKind::lebesgue:
        return "lebesgue";
    case MeasureKind::slice:
        return "slice";
    case MeasureKind::boundary_layer:
        return m.delta > 0.0 ? "boundary-layer:" + detail::fmt_num(m.delta) : "boundary-layer";
    }
    return "";
}

struct SampledMeasure
{
    std::vector<std::size_t> index; // interior nodes carrying mass
    std::vector<double>      weight;
    double                   mass = 0.0;
};

template <typename D, std::size_t N = D::dim>
SampledMeasure sample_measure(const D& d, const QuadratureNodes<N>& nodes, const MeasureChoice& m)
{
    SampledMeasure out;
    const double   h = nodes.h;
    if (m.kind == MeasureKind::lebesgue) {
        out.index.resize(nodes.points.size());
        for (std::size_t i = 0; i < out.index.size(); ++i)
            out.index[i] = i;
        out.weight = nodes.weights;
    } else if (m.kind == MeasureKind::boundary_layer) {
        const double delta = m.delta > 0.0 ? m.delta : d.diameter() / 16.0;
        for (std::size_t i = 0; i < nodes.points.size(); ++i)
            if (d.boundary_distance(nodes.points[i]) < delta) {
                out.index.push_back(i);
                out.weight.push_back(nodes.weights[i] / delta);
            }
    } else {
        const double c = 0.5 * (d.bbox_min()[N - 1] + d.bbox_max()[N - 1]);
        for (std::size_t i = 0; i < nodes.points.size(); ++i) {
            const double off = nodes.points[i][N - 1] - c;
            if (off >= -0.5 * h && off < 0.5 * h) {
                out.index.push_back(i);
                out.weight.push_back(nodes.weights[i] / h);
            }
        }
    }
    if (out.index.empty())
        fail_validation("empty_measure", "the chosen measure has no mass at this resolution");
    out.mass = pairwise_sum(out.weight);
    return out;
}

// sampled C_mu for the chosen alpha over a coarse centre/radius lattice
template <typename D, std::size_t N = D::dim>
AhlforsEstimate measure_ahlfors(const D& d, const QuadratureNodes<N>& nodes, const SampledMeasure& mu, double alpha)
{
    std::vector<Atom> atoms;
    atoms.reserve(mu.index.size());
    for (std::size_t k = 0; k < mu.index.size(); ++k) {
        const auto& p = nodes.points[mu.index[k]];
        atoms.push_back({std::to_string(k), mu.weight[k], std::vector<double>(p.begin(), p.end())});
    }
    const SampledMeasureSpace         space(std::move(atoms));
    std::vector<std::vector<double>>  centers;
    const std::size_t                 stride = std::max<std::size_t>(1, mu.index.size() / 32);
    for (std::size_t k = 0; k < mu.index.size(); k += stride)
        centers.push_back(space.atoms()[k].position);
    std::vector<double> radii;
    const double        lo = 2.0 * nodes.h, hi = d.diameter();
    for (int k = 0; k < 12; ++k)
        radii.push_back(lo * std::pow(hi / lo, k / 11.0));
    return ahlfors_constant(space, d, alpha, centers, radii);
}

////////////////////////////////////////////////////////////////////////////////
//
// inequality evaluation
//
////////////////////////////////////////////////////////////////////////////////

struct MeshControls
{
    double   h                = 0.0; // interior spacing; 0: diameter / 64 (2-D), / 16 (3-D)
    double   boundary_spacing = 0.0; // 0: h in 2-D, diameter / 8 in 3-D
    unsigned threads          = 0;
    LpBudget budget{};
};

struct InequalitySpec
{
    std::string   theorem = "fried1";
    ParamMap      params;
    MeasureChoice measure{};
    MeshControls  mesh{};
    bool          allow_supercritical = false;
    double        q_lhs = std::nan(""); // replaces the left exponent only
};

struct TermValue
{
    std::string name;
    TermKind    kind = TermKind::gradient;
    std::string norm;
    double      value = 0.0;
    Coefficient coef;
    double      product = 0.0;
    std::string objective; // seminorm terms: sup or integral
};

struct ExperimentReport
{
    std::string              case_id;
    std::string              theorem;
    std::string              domain;
    std::string              trial;
    std::size_t              dim = 0;
    std::string              measure;
    double                   mu_mass = 0.0, volume = 0.0, surface = 0.0;
    double                   ahlfors = std::nan("");
    std::string              lhs_norm;
    double                   lhs = 0.0;
    std::vector<TermValue>   terms;
    double                   rhs   = 0.0;
    double                   ratio = 0.0;
    bool                     degenerate = false;
    std::string              exponent_kind;
    double                   exponent = std::nan("");
    std::string              exponent_branch;
    double                   h = 0.0, boundary_spacing = 0.0;
    std::size_t              interior_nodes = 0, boundary_samples = 0;
    std::vector<std::string> notes;
    double                   seconds = 0.0;
};

namespace detail {

template <std::size_t N>
void check_class(const Layout& L, const Trial<N>& u)
{
    const bool vector = std::holds_alternative<VectorField<N>>(u);
    if (L.cls == FunctionClass::symmetric && !vector)
        fail_validation("class_violation", L.theorem + " needs a vector field");
    if (L.cls != FunctionClass::symmetric && vector)
        fail_validation("class_violation", L.theorem + " needs a scalar function with closed-form derivatives");
}

template <std::size_t N>
double default_h(double diam)
{
    return diam / (N == 2 ? 64.0 : 16.0);
}

} // namespace detail

template <typename D, std::size_t N = D::dim>
ExperimentReport evaluate_inequality(const InequalitySpec& spec, const Trial<N>& u, const D& d, const std::string& domain_name = "")
{
    const auto   start = std::chrono::steady_clock::now();
    const Layout L     = resolve_layout(spec.theorem, spec.params, N, spec.allow_supercritical);
    detail::check_class(L, u);

    const double diam = d.diameter();
    const double h    = spec.mesh.h > 0.0 ? spec.mesh.h : detail::default_h<N>(diam);
    const double hb   = spec.mesh.boundary_spacing > 0.0 ? spec.mesh.boundary_spacing : (N == 2 ? h : diam / 8.0);
    const auto   nodes = sample_interior(d, h);
    const auto   bs    = sample_boundary(d, BoundaryResolution{1, hb});
    const auto   dm    = measure_domain(d);
    const auto   mu    = sample_measure(d, nodes, spec.measure);

    ExperimentReport R;
    R.theorem          = L.theorem;
    R.domain           = domain_name;
    R.dim              = N;
    R.measure          = to_string(spec.measure);
    R.volume           = dm.volume;
    R.surface          = dm.surface;
    R.mu_mass          = spec.measure.kind == MeasureKind::lebesgue ? dm.volume : mu.mass;
    R.exponent_kind    = L.exponent_kind;
    R.exponent         = L.exponent;
    R.exponent_branch  = L.exponent_branch;
    R.h                = h;
    R.boundary_spacing = hb;
    R.interior_nodes   = nodes.points.size();
    R.boundary_samples = bs.size();
    R.notes            = L.notes;
    if (spec.measure.kind != MeasureKind::lebesgue)
        R.ahlfors = measure_ahlfors(d, nodes, mu, L.params.at("alpha")).constant;

    const auto* f = std::get_if<TrialFunction<N>>(&u);
    const auto* v = std::get_if<VectorField<N>>(&u);
    auto        magnitude = [&](const std::array<double, N>& x) { return f ? std::abs(f->value(x)) : norm2(v->value(x)); };

    // left-hand side against mu
    NormSpec target = L.target;
    if (!std::isnan(spec.q_lhs)) {
        if (!std::holds_alternative<Lebesgue>(target))
            fail_validation("bad_override", "the left exponent override needs a Lebesgue target");
        target = Lebesgue{spec.q_lhs};
        R.notes.push_back("left exponent replaced by " + detail::fmt_num(spec.q_lhs));
    }
    target = with_mass(target, R.mu_mass);
    std::vector<double> lv(mu.index.size());
    for (std::size_t k = 0; k < lv.size(); ++k) {
        const auto& x = nodes.points[mu.index[k]];
        lv[k]         = L.lhs == LhsKind::grad_u ? norm2(f->gradient(x)) : magnitude(x);
    }
    R.lhs_norm = to_string(target);
    R.lhs      = norm_eval(target, rearrange(mu.weight, lv));

    const auto          coefs = coefficients(L, dm.volume, dm.surface, R.mu_mass);
    std::vector<double> products;
    for (std::size_t t = 0; t < L.terms.size(); ++t) {
        const auto& T = L.terms[t];
        TermValue   tv;
        tv.name = T.name;
        tv.kind = T.kind;
        tv.coef = coefs[t];
        if (T.kind == TermKind::boundary_trace || T.kind == TermKind::hajlasz_seminorm) {
            const NormSpec nb = with_mass(T.norm, bs.total_weight());
            tv.norm           = to_string(nb);
            std::vector<double> vals(bs.size());
            if (T.kind == TermKind::boundary_trace) {
                for (std::size_t j = 0; j < vals.size(); ++j)
                    vals[j] = magnitude(bs.points[j]);
                tv.value = norm_eval(nb, rearrange(bs.weights, vals));
            } else {
                for (std::size_t j = 0; j < vals.size(); ++j)
                    vals[j] = f->value(bs.points[j]);
                LpBudget budget = spec.mesh.budget;
                budget.threads  = spec.mesh.threads;
                const auto s    = seminorm(BoundaryTrace<N>(bs, vals), nb, budget);
                tv.value        = s.value;
                tv.objective    = s.used == GradientObjective::sup ? "sup" : "integral";
            }
        } else {
            tv.norm = to_string(T.norm);
            std::vector<double> dens(nodes.points.size());
            for (std::size_t j = 0; j < dens.size(); ++j) {
                const auto& x = nodes.points[j];
                if (T.kind == TermKind::gradient)
                    dens[j] = norm2(f->gradient(x));
                else if (T.kind == TermKind::hessian)
                    dens[j] = frobenius(f->hessian(x));
                else
                    dens[j] = frobenius(v->sym_gradient(x));
            }
            tv.value = norm_eval(T.norm, rearrange(nodes.weights, dens));
        }
        tv.product = tv.value == 0.0 ? 0.0 : tv.coef.value * tv.value;
        products.push_back(tv.product);
        R.terms.push_back(std::move(tv));
    }
    R.rhs = pairwise_sum(products);
    if (R.rhs > 0.0) {
        R.ratio = R.lhs / R.rhs;
    } else if (R.lhs == 0.0) {
        R.degenerate = true;
        R.ratio      = 0.0;
    } else {
        R.ratio = inf;
        R.notes.push_back("right-hand side vanishes while the left does not");
    }
    R.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return R;
}

//
// key = value lines (or ';'-separated); '#' starts a comment. Keys: theorem,
// measure, h, boundary_spacing, allow_supercritical, q_lhs, lp_points and
// any theorem parameter.
//
inline InequalitySpec parse_inequality_spec(const std::string& text)
{
    InequalitySpec spec;
    spec.theorem.clear();
    std::string norm = text;
    for (auto& c : norm)
        if (c == ';')
            c = '\n';
    std::istringstream in(norm);
    std::string        line;
    auto               trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r\"");
        const auto b = s.find_last_not_of(" \t\r\"");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    static const std::vector<std::string> keys{"n",     "alpha", "p",     "q",     "r",        "s",     "sigma",
                                               "rho",   "upsilon", "eta", "theta", "varsigma", "gamma", "beta"};
    while (std::getline(in, line)) {
        if (const auto c = line.find('#'); c != std::string::npos)
            line.erase(c);
        line = trim(line);
        if (line.empty() || line.front() == '[')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail_validation("bad_spec", "spec lines must read key = value");
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key == "theorem")
            spec.theorem = val;
        else if (key == "measure")
            spec.measure = parse_measure(val);
        else if (key == "delta")
            spec.measure.delta = detail::parse_num(val);
        else if (key == "h")
            spec.mesh.h = detail::parse_num(val);
        else if (key == "boundary_spacing")
            spec.mesh.boundary_spacing = detail::parse_num(val);
        else if (key == "lp_points")
            spec.mesh.budget.max_points = std::size_t(detail::parse_num(val));
        else if (key == "allow_supercritical")
            spec.allow_supercritical = val == "true" || val == "1";
        else if (key == "q_lhs")
            spec.q_lhs = detail::parse_num(val);
        else if (std::find(keys.begin(), keys.end(), key) != keys.end())
            spec.params[key] = detail::parse_num(val);
        else
            fail_validation("bad_spec", "unknown spec key '" + key + "'");
    }
    if (spec.theorem.empty())
        fail_validation("bad_spec", "spec needs a theorem");
    if (std::find(theorem_ids().begin(), theorem_ids().end(), spec.theorem) == theorem_ids().end())
        fail_validation("unknown_theorem", "unknown theorem '" + spec.theorem + "'");
    return spec;
}

inline std::string to_string(const InequalitySpec& s)
{
    std::ostringstream o;
    o << "theorem = " << s.theorem << "\n";
    for (const auto& [k, v] : s.params)
        o << k << " = " << detail::fmt_num(v) << "\n";
    o << "measure = " << to_string(s.measure) << "\n";
    if (s.mesh.h > 0.0)
        o << "h = " << detail::fmt_num(s.mesh.h) << "\n";
    if (s.mesh.boundary_spacing > 0.0)
        o << "boundary_spacing = " << detail::fmt_num(s.mesh.boundary_spacing) << "\n";
    if (s.allow_supercritical)
        o << "allow_supercritical = true\n";
    if (!std::isnan(s.q_lhs))
        o << "q_lhs = " << detail::fmt_num(s.q_lhs) << "\n";
    return o.str();
}

////////////////////////////////////////////////////////////////////////////////
//
// sharp isoperimetric constant
//
////////////////////////////////////////////////////////////////////////////////

struct SharpConstant
{
    int         n = 2;
    double      R = 1.0;
    int         mesh = 0;
    double      constant = 0.0; // Gamma(1 + n/2)^{1/n} / (n sqrt(pi))
    double      volume = 0.0, surface = 0.0;
    double      lhs = 0.0, gradient = 0.0, boundary = 0.0;
    double      ratio       = 0.0;
    double      exact_ratio = 0.0; // same algebra on the exact ball
    bool        degenerate  = false;
};

inline double isoperimetric_constant(int n) { return std::pow(std::tgamma(1.0 + n / 2.0), 1.0 / n) / (n * std::sqrt(pi)); }

//
// u = c on a ball: a 2-D regular mesh-gon or a 3-D voxel ball with mesh
// cells across the diameter. Integrals of a constant are exact on these
// domains, so only the geometry is discretised.
//
inline SharpConstant sharp_constant_check(int n, double R, int mesh, double c = 1.0)
{
    if (n != 2 && n != 3)
        fail_validation("bad_dimension", "sharp constant check supports n = 2 or 3");
    if (!(R > 0.0) || !std::isfinite(R))
        fail_validation("bad_radius", "radius must be positive");
    if (mesh < 3)
        fail_validation("bad_mesh", "mesh must be at least 3");
    SharpConstant s;
    s.n        = n;
    s.R        = R;
    s.mesh     = mesh;
    s.constant = isoperimetric_constant(n);
    const DomainMeasure dm = n == 2 ? measure_domain(regular_polygon(mesh, R)) : measure_domain(voxel_ball(R, 2.0 * R / mesh));
    s.volume   = dm.volume;
    s.surface  = dm.surface;
    const double q = double(n) / (n - 1.0);
    s.lhs      = std::abs(c) * std::pow(s.volume, 1.0 / q);
    s.gradient = 0.0;
    s.boundary = std::abs(c) * s.surface;
    const double rhs = s.constant * (s.gradient + s.boundary);
    s.degenerate     = rhs == 0.0;
    s.ratio          = s.degenerate ? 0.0 : s.lhs / rhs;
    const double omega = std::pow(pi, n / 2.0) / std::tgamma(1.0 + n / 2.0);
    s.exact_ratio      = std::pow(omega, 1.0 / q) * std::pow(R, n - 1.0) / (s.constant * n * omega * std::pow(R, n - 1.0));
    return s;
}

////////////////////////////////////////////////////////////////////////////////
//
// scaling
//
////////////////////////////////////////////////////////////////////////////////

struct ScalingResult
{
    std::vector<double> lambdas;
    std::vector<double> ratios;
    double              reference = 0.0;       // ratio at lambda = 1
    double              predicted_delta = 0.0; // ratio(lambda) ~ lambda^delta
    double              fitted_delta    = 0.0;
    double              max_rel_spread  = 0.0;
};

//
// Ratios for u(x / lambda) on lambda * Omega with the mesh dilated alongside.
// The left exponent override gives delta = n/q' - n/q.
//
template <typename D, std::size_t N = D::dim>
ScalingResult scaling_test(const InequalitySpec& spec, const Trial<N>& u, const D& d, const std::vector<double>& lambdas)
{
    if (spec.measure.kind != MeasureKind::lebesgue)
        fail_validation("scaling_precondition", "scaling needs mu = Lebesgue");
    if (spec.params.count("alpha") && spec.params.at("alpha") != double(N))
        fail_validation("scaling_precondition", "scaling needs alpha = n");
    for (double l : lambdas)
        if (!(l > 0.0) || !std::isfinite(l))
            fail_validation("bad_lambda", "dilation factors must be positive");

    const Layout L = resolve_layout(spec.theorem, spec.params, N, spec.allow_supercritical);
    ScalingResult out;
    out.lambdas = lambdas;
    if (!std::isnan(spec.q_lhs))
        out.predicted_delta = double(N) / spec.q_lhs - double(N) / L.exponent;

    InequalitySpec s1 = spec;
    const double   diam = d.diameter();
    s1.mesh.h           = spec.mesh.h > 0.0 ? spec.mesh.h : detail::default_h<N>(diam);
    s1.mesh.boundary_spacing =
        spec.mesh.boundary_spacing > 0.0 ? spec.mesh.boundary_spacing : (N == 2 ? s1.mesh.h : diam / 8.0);
    out.reference = evaluate_inequality(s1, u, d).ratio;

    std::vector<double> deltas;
    for (double l : lambdas) {
        InequalitySpec sl        = s1;
        sl.mesh.h                = s1.mesh.h * l;
        sl.mesh.boundary_spacing = s1.mesh.boundary_spacing * l;
        const Trial<N> ul        = std::visit([&](const auto& w) -> Trial<N> { return w.mapped(l); }, u);
        const double   r         = l == 1.0 ? out.reference : evaluate_inequality(sl, ul, d.transformed(l)).ratio;
        out.ratios.push_back(r);
        if (out.reference > 0.0) {
            out.max_rel_spread = std::max(out.max_rel_spread, std::abs(r - out.reference) / out.reference);
            if (l != 1.0)
                deltas.push_back(std::log(r / out.reference) / std::log(l));
        }
    }
    if (!deltas.empty())
        out.fitted_delta = pairwise_sum(deltas) / double(deltas.size());
    return out;
}

////////////////////////////////////////////////////////////////////////////////
//
// rearrangement estimates
//
////////////////////////////////////////////////////////////////////////////////

struct RearrangementOptions
{
    MeasureChoice measure{};
    double        alpha = std::nan(""); // 0 / nan: n
    int           tpoints = 64;         // geometric t grid on (1e-4 mu(Omega), mu(Omega))
    double        h = 0.0;
    double        boundary_spacing = 0.0;
    unsigned      threads = 0;
};

struct RearrangementCheck
{
    double                   c_max = 0.0; // max_t LHS / RHS with c = 1
    double                   t_at_max = 0.0, lhs_at_max = 0.0, rhs_at_max = 0.0;
    std::size_t              evaluated = 0;
    std::size_t              excluded  = 0; // RHS = 0 < LHS
    bool                     degenerate = false;
    double                   h = 0.0;
    std::vector<std::string> warnings;
};

template <typename D, std::size_t N = D::dim>
RearrangementCheck rearrangement_estimate_check(PointwiseOrder order, const Trial<N>& u, const D& d,
                                                const RearrangementOptions& opt = {})
{
    const double n     = double(N);
    const double alpha = std::isnan(opt.alpha) || opt.alpha == 0.0 ? n : opt.alpha;
    detail::check_measure(TheoremParams{n, alpha});
    if (opt.tpoints < 2)
        fail_validation("bad_grid", "t grid needs at least two points");
    const bool vector = std::holds_alternative<VectorField<N>>(u);
    if ((order == PointwiseOrder::symmetric) != vector)
        fail_validation("class_violation", order == PointwiseOrder::symmetric ? "symmetric estimate needs a vector field"
                                                                              : "this estimate needs a scalar function");
    if (order == PointwiseOrder::second_u && N < 3)
        fail_validation("bad_dimension", "the second-order estimate for u needs n >= 3");

    const double diam  = d.diameter();
    const double h     = opt.h > 0.0 ? opt.h : detail::default_h<N>(diam);
    const double hb    = opt.boundary_spacing > 0.0 ? opt.boundary_spacing : (N == 2 ? h : diam / 8.0);
    const auto   nodes = sample_interior(d, h);
    const auto   bs    = sample_boundary(d, BoundaryResolution{1, hb});
    const auto   mu    = sample_measure(d, nodes, opt.measure);
    const double mass  = opt.measure.kind == MeasureKind::lebesgue ? measure_domain(d).volume : mu.mass;

    const auto* f = std::get_if<TrialFunction<N>>(&u);
    const auto* v = std::get_if<VectorField<N>>(&u);

    std::vector<double> lv(mu.index.size()), dens(nodes.points.size()), trace(bs.size()), signed_trace(bs.size());
    for (std::size_t k = 0; k < lv.size(); ++k) {
        const auto& x = nodes.points[mu.index[k]];
        lv[k] = vector ? norm2(v->value(x)) : (order == PointwiseOrder::second_grad ? norm2(f->gradient(x)) : std::abs(f->value(x)));
    }
    for (std::size_t j = 0; j < dens.size(); ++j) {
        const auto& x = nodes.points[j];
        if (vector)
            dens[j] = frobenius(v->sym_gradient(x));
        else if (order == PointwiseOrder::first)
            dens[j] = norm2(f->gradient(x));
        else
            dens[j] = frobenius(f->hessian(x));
    }
    for (std::size_t j = 0; j < bs.size(); ++j) {
        signed_trace[j] = vector ? 0.0 : f->value(bs.points[j]);
        trace[j]        = vector ? norm2(v->value(bs.points[j])) : std::abs(signed_trace[j]);
    }

    const auto lhs_prof = rearrange(mu.weight, lv);
    const auto den_prof = rearrange(nodes.weights, dens);
    const auto tr_prof  = rearrange(bs.weights, trace);
    RearrangementProfile g_prof;
    if (order == PointwiseOrder::second_u || order == PointwiseOrder::second_grad)
        g_prof = rearrange(bs.weights, minimal_upper_gradient(BoundaryTrace<N>(bs, signed_trace), GradientObjective::sup,
                                                              LpBudget{2000, opt.threads})
                                           .g);

    struct Piece
    {
        KernelTerm                  k;
        const RearrangementProfile* f;
    };
    using detail::lower_term;
    using detail::upper_term;
    std::vector<Piece> pieces;
    const double       a1 = -(n - 1.0) / alpha, a2 = -(n - 2.0) / alpha;
    const double       bn = n / alpha, bb = (n - 1.0) / alpha;
    switch (order) {
    case PointwiseOrder::first:
    case PointwiseOrder::symmetric:
        pieces = {{lower_term(a1, bn), &den_prof}, {upper_term(0.0, bn, (n - 1.0) / n), &den_prof}, {lower_term(a1, bb), &tr_prof}};
        break;
    case PointwiseOrder::second_u:
        pieces = {{lower_term(a2, bn), &den_prof},
                  {upper_term(0.0, bn, (n - 2.0) / n), &den_prof},
                  {lower_term(a2, bb), &g_prof},
                  {upper_term(0.0, bb, (n - 2.0) / (n - 1.0)), &g_prof},
                  {lower_term(a1, bb), &tr_prof}};
        break;
    case PointwiseOrder::second_grad:
        pieces = {{lower_term(a1, bn), &den_prof}, {upper_term(0.0, bn, (n - 1.0) / n), &den_prof}, {lower_term(a1, bb), &g_prof}};
        break;
    }

    RearrangementCheck out;
    out.h = h;
    bool any = false;
    for (int k = 0; k < opt.tpoints; ++k) {
        const double t   = mass * 1e-4 * std::pow(1e4, double(k) / opt.tpoints);
        const double lhs = lhs_prof.eval(t);
        double       rhs = 0.0;
        for (const auto& p : pieces) {
            if (p.f->size() == 0 || p.f->is_zero())
                continue;
            HardyProblem pb;
            pb.terms = {p.k};
            pb.l_src = p.f->domain_length();
            pb.l_tgt = 2.0 * std::max(mass, t);
            rhs += apply_kernel(pb, *p.f, t);
        }
        if (lhs > 0.0)
            any = true;
        if (rhs == 0.0) {
            if (lhs > 0.0)
                ++out.excluded;
            continue;
        }
        ++out.evaluated;
        if (lhs / rhs > out.c_max) {
            out.c_max      = lhs / rhs;
            out.t_at_max   = t;
            out.lhs_at_max = lhs;
            out.rhs_at_max = rhs;
        }
    }
    out.degenerate = !any && out.evaluated == 0;
    if (out.excluded > 0)
        out.warnings.push_back(std::to_string(out.excluded) + " grid points with zero right-hand side excluded");
    return out;
}

////////////////////////////////////////////////////////////////////////////////
//
// exponential targets
//
////////////////////////////////////////////////////////////////////////////////

struct ExpStressResult
{
    double              gamma_critical = 0.0;
    double              gamma = 0.0;
    std::vector<int>    depths; // K: the stressor is truncated at 2^{-K}
    std::vector<double> ratios;
    double              slope = 0.0;           // d log ratio / d log K over the last level
    double              predicted_slope = 0.0; // 1 - 1/gamma - 1/p, clipped at 0
    Growth              classification = Growth::bounded;
};

//
// One-dimensional reduction of the exponential target with the log-profile
// stressor f(rho) = min(rho, 2^{-K})^{-1/p}, p the interior exponent. The
// ratio grows like K^{1 - 1/gamma - 1/p}.
//
inline ExpStressResult exp_target_stressor(const std::string& theorem, const ParamMap& params, double factor = 1.0, int levels = 6)
{
    if (theorem != "fried3" && theorem != "fried5")
        fail_validation("unknown_theorem", "the stressor covers fried3 and fried5");
    if (levels < 3 || levels > 6)
        fail_validation("bad_levels", "stressor levels must lie in [3, 6]");
    if (!(factor > 0.0))
        fail_validation("bad_factor", "gamma factor must be positive");
    const double n = detail::param(params, "n");
    ParamMap     P = params;
    P.erase("gamma");
    const Layout L = resolve_layout(theorem, P, std::size_t(n));
    if (L.exponent_branch.find("boundary") != std::string::npos && L.exponent_branch.find("gradient") == std::string::npos &&
        L.exponent_branch.find("hessian") == std::string::npos)
        fail_validation("stressor_branch", "gamma is set by the boundary branch; raise beta");

    ExpStressResult out;
    out.gamma_critical = L.exponent;
    out.gamma          = factor * L.exponent;
    const double p     = theorem == "fried3" ? n : n / 2.0;
    out.predicted_slope = std::max(0.0, 1.0 - 1.0 / out.gamma - 1.0 / p);

    ParamMap     Q{{"n", n}, {"alpha", n}, {"p", p}, {"q", 2.0}, {"lsrc", 1.0}, {"ltgt", 1.0}};
    const auto   pb = make_template(theorem == "fried3" ? "red1bis" : "red2.1bis", Q, NormSpec(Lebesgue{p}),
                                    NormSpec(LorentzZygmund{inf, inf, -1.0 / out.gamma, 1.0, 1.0}));
    for (int k = 0; k < levels; ++k) {
        const int           K = 16 << k;
        std::vector<double> b{0.0, std::ldexp(1.0, -K)}, v{std::pow(std::ldexp(1.0, -K), -1.0 / p)};
        for (int j = K - 1; j >= 0; --j) {
            b.push_back(std::ldexp(1.0, -j));
            v.push_back(std::pow(0.75 * std::ldexp(1.0, -j), -1.0 / p));
        }
        out.depths.push_back(K);
        out.ratios.push_back(hardy_ratio(pb, RearrangementProfile(b, v)));
    }
    const std::size_t m = out.ratios.size();
    out.slope           = std::log(out.ratios[m - 1] / out.ratios[m - 2]) / std::log(2.0);
    bool rising         = true;
    for (std::size_t i = m - 3; i + 1 < m; ++i)
        rising = rising && out.ratios[i + 1] > out.ratios[i];
    out.classification = rising && out.slope > 0.01 ? Growth::diverging : Growth::bounded;
    return out;
}

////////////////////////////////////////////////////////////////////////////////
//
// corpus
//
////////////////////////////////////////////////////////////////////////////////

template <std::size_t N>
struct CorpusFunction
{
    std::string      name;
    TrialFunction<N> f; // in coordinates normalised to the unit diameter
};

namespace detail {

inline double unit_draw(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline double draw(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_draw(rng); }

} // namespace detail

template <std::size_t N>
std::vector<CorpusFunction<N>> corpus_functions(std::uint64_t seed, std::size_t count = 6)
{
    static const char* names[] = {"const", "linear", "quadratic", "bump", "osc", "distpow"};
    std::mt19937_64    rng(seed);
    using detail::draw;
    auto point = [&](double r) {
        std::array<double, N> x;
        for (auto& c : x)
            c = draw(rng, -r, r);
        return x;
    };
    std::vector<CorpusFunction<N>> out;
    for (std::size_t i = 0; i < count; ++i) {
        using TF = TrialFunction<N>;
        TF f;
        switch (i % 6) {
        case 0:
            f = TF::constant(draw(rng, 0.5, 1.5));
            break;
        case 1:
            f = TF::polynomial(draw(rng, 0.1, 0.4), point(1.0), Mat<N>{});
            break;
        case 2: {
            Mat<N> A{};
            for (std::size_t a = 0; a < N; ++a)
                for (std::size_t b = 0; b < N; ++b)
                    A[a][b] = draw(rng, -1.0, 1.0);
            f = TF::polynomial(draw(rng, 0.0, 0.3), point(0.5), A);
            break;
        }
        case 3:
            f = TF::bump(draw(rng, 0.5, 1.5), draw(rng, 2.0, 6.0), point(0.2));
            break;
        case 4:
            f = TF::osc(draw(rng, 0.5, 1.5), draw(rng, 0.0, 2.0 * pi), point(4.0));
            break;
        default:
            f = TF::distpow(draw(rng, 1.5, 2.5), point(0.2));
            break;
        }
        std::string name = names[i % 6];
        if (i >= 6)
            name += std::to_string(i / 6);
        out.push_back({std::move(name), f});
    }
    return out;
}

// u(x) = f((x - c) / diam), c the bounding-box centre
template <typename D, std::size_t N = D::dim>
TrialFunction<N> fit_to_domain(const TrialFunction<N>& f, const D& d)
{
    const auto            lo = d.bbox_min(), hi = d.bbox_max();
    std::array<double, N> c;
    for (std::size_t i = 0; i < N; ++i)
        c[i] = 0.5 * (lo[i] + hi[i]);
    return f.mapped(d.diameter(), c);
}

// vector field e * f plus a fixed skew part, for symmetric-gradient cases
template <std::size_t N>
VectorField<N> vectorise(const TrialFunction<N>& f)
{
    VectorField<N> v;
    v.phi = f;
    v.e[0] = 0.6;
    v.e[1] = 0.8;
    return v;
}

struct CorpusConfig
{
    std::uint64_t               seed = 7;
    std::vector<std::string>    domains{"square", "disk512", "lshape", "comb:4,1,0.05"};
    std::vector<InequalitySpec> specs;     // empty: default_corpus_specs()
    std::size_t                 functions = 6;
    MeshControls                mesh{};
    unsigned                    threads = 0;
};

//
// Corpus file: header keys seed, functions and domains (blank separated),
// then one "[spec]" block per inequality in the spec text syntax.
//
inline CorpusConfig parse_corpus_config(const std::string& text)
{
    CorpusConfig             cfg;
    std::istringstream       in(text);
    std::string              line, block;
    std::vector<std::string> blocks;
    bool                     header = true;
    auto                     trim   = [](const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        std::string t = line;
        if (const auto c = t.find('#'); c != std::string::npos)
            t.erase(c);
        t = trim(t);
        if (t == "[spec]") {
            if (!header)
                blocks.push_back(block);
            header = false;
            block.clear();
            continue;
        }
        if (!header) {
            block += t + "\n";
            continue;
        }
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail_validation("bad_corpus", "corpus header lines must read key = value");
        const std::string key = trim(t.substr(0, eq)), val = trim(t.substr(eq + 1));
        if (key == "seed")
            cfg.seed = std::stoull(val);
        else if (key == "functions")
            cfg.functions = std::size_t(detail::parse_num(val));
        else if (key == "domains") {
            cfg.domains.clear();
            std::istringstream ds(val);
            std::string        d;
            while (ds >> d)
                cfg.domains.push_back(d);
        } else
            fail_validation("bad_corpus", "unknown corpus key '" + key + "'");
    }
    if (!header)
        blocks.push_back(block);
    for (const auto& b : blocks)
        cfg.specs.push_back(parse_inequality_spec(b));
    return cfg;
}

inline std::vector<InequalitySpec> default_corpus_specs()
{
    auto make = [](std::string id, ParamMap P) {
        InequalitySpec s;
        s.theorem = std::move(id);
        s.params  = std::move(P);
        return s;
    };
    return {make("fried1", {{"p", 1.5}, {"r", 2.0}}), make("fried3", {{"beta", 2.0}}), make("fried8", {{"p", 1.5}, {"r", 2.0}}),
            make("inf2", {{"p", 3.0}}), make("friedsymm.1", {{"p", 1.5}, {"r", 2.0}})};
}

// "builtin:" may be dropped for builtin names that are not existing files
inline Domain corpus_domain(const std::string& name)
{
    if (name.rfind("builtin:", 0) == 0 || std::filesystem::exists(name))
        return load_domain(name);
    return load_domain("builtin:" + name);
}

inline std::string domain_label(const std::string& name) { return name.rfind("builtin:", 0) == 0 ? name.substr(8) : name; }

struct CaseResult
{
    std::string                     case_id, domain, function, theorem;
    std::optional<ExperimentReport> report;
    std::string                     error_code, error_message;
};

struct CorpusSummary
{
    std::map<std::string, double> max_ratio_by_theorem;
    std::map<std::string, double> max_ratio_by_domain;
    std::size_t                   cases = 0, errors = 0, nonfinite = 0, degenerate = 0;
};

struct CorpusResult
{
    std::uint64_t           seed = 0;
    std::vector<CaseResult> cases;
    CorpusSummary           summary;
};

inline CorpusResult corpus_run(const CorpusConfig& cfg)
{
    const auto specs = cfg.specs.empty() ? default_corpus_specs() : cfg.specs;

    struct Job
    {
        std::size_t domain, function, spec;
    };
    std::vector<Domain> domains;
    for (const auto& name : cfg.domains)
        domains.push_back(corpus_domain(name));
    std::vector<Job> jobs;
    for (std::size_t a = 0; a < domains.size(); ++a)
        for (std::size_t b = 0; b < cfg.functions; ++b)
            for (std::size_t c = 0; c < specs.size(); ++c)
                jobs.push_back({a, b, c});

    const auto f2 = corpus_functions<2>(cfg.seed, cfg.functions);
    const auto f3 = corpus_functions<3>(cfg.seed, cfg.functions);

    CorpusResult res;
    res.seed = cfg.seed;
    res.cases.resize(jobs.size());
    const unsigned outer = resolve_threads(cfg.threads);
    parallel_for(jobs.size(), outer, [&](std::size_t i) {
        const Job&  j  = jobs[i];
        CaseResult& cr = res.cases[i];
        cr.domain      = domain_label(cfg.domains[j.domain]);
        cr.function    = f2[j.function].name;
        cr.theorem     = specs[j.spec].theorem;
        cr.case_id     = cr.domain + "/" + cr.function + "/" + cr.theorem;
        InequalitySpec spec = specs[j.spec];
        if (spec.mesh.h == 0.0 && spec.mesh.boundary_spacing == 0.0)
            spec.mesh = cfg.mesh;
        spec.mesh.threads = outer > 1 ? 1 : cfg.mesh.threads;
        try {
            std::visit(
                [&](const auto& d) {
                    constexpr std::size_t N = std::decay_t<decltype(d)>::dim;
                    const auto&           fs = [&]() -> const auto& {
                        if constexpr (N == 2)
                            return f2;
                        else
                            return f3;
                    }();
                    const auto f = fit_to_domain(fs[j.function].f, d);
                    const bool symmetric = resolve_layout(spec.theorem, spec.params, N, spec.allow_supercritical).cls ==
                                           FunctionClass::symmetric;
                    const Trial<N> u = symmetric ? Trial<N>(vectorise(f)) : Trial<N>(f);
                    cr.report        = evaluate_inequality(spec, u, d, cr.domain);
                    cr.report->case_id = cr.case_id;
                    cr.report->trial   = cr.function;
                },
                domains[j.domain]);
        } catch (const Error& e) {
            cr.error_code    = e.code();
            cr.error_message = e.what();
        } catch (const std::exception& e) {
            cr.error_code    = "internal";
            cr.error_message = e.what();
        }
    });

    auto& S = res.summary;
    S.cases = res.cases.size();
    for (const auto& c : res.cases) {
        if (!c.report) {
            ++S.errors;
            continue;
        }
        const double r = c.report->ratio;
        if (c.report->degenerate)
            ++S.degenerate;
        if (!std::isfinite(r)) {
            ++S.nonfinite;
            continue;
        }
        auto bump = [r](std::map<std::string, double>& m, const std::string& k) {
            auto [it, fresh] = m.emplace(k, r);
            if (!fresh)
                it->second = std::max(it->second, r);
        };
        bump(S.max_ratio_by_theorem, c.theorem);
        bump(S.max_ratio_by_domain, c.domain);
    }
    return res;
}

////////////////////////////////////////////////////////////////////////////////
//
// pointwise corpus study
//
////////////////////////////////////////////////////////////////////////////////

struct PointwiseStudyEntry
{
    std::string domain, function;
    double      c_emp = 0.0, c_refined = 0.0, drift = 0.0;
    std::size_t evaluated = 0;
};

struct PointwiseStudy
{
    std::vector<PointwiseStudyEntry> entries;
    double                           max_spread = 0.0; // per function, max over domains / min over domains
    double                           max_drift  = 0.0;
    bool                             all_finite = true;
};

//
// check_pointwise at the default mesh and at a refined one over the corpus
// domains and functions.
//
inline PointwiseStudy pointwise_corpus_study(const CorpusConfig& cfg, PointwiseOrder order = PointwiseOrder::first,
                                             double refine = 2.0, PointwiseOptions base = {})
{
    PointwiseStudy                               st;
    std::map<std::string, std::pair<double, double>> range; // function -> (min, max)
    for (const auto& name : cfg.domains) {
        const auto dom = corpus_domain(name);
        std::visit(
            [&](const auto& d) {
                constexpr std::size_t N = std::decay_t<decltype(d)>::dim;
                const double          h = base.h > 0.0 ? base.h : detail::default_h<N>(d.diameter());
                for (const auto& cf : corpus_functions<N>(cfg.seed, cfg.functions)) {
                    const auto     f = fit_to_domain(cf.f, d);
                    const Trial<N> u = order == PointwiseOrder::symmetric ? Trial<N>(vectorise(f)) : Trial<N>(f);
                    PointwiseOptions o = base;
                    o.h                = h;
                    const auto r1      = check_pointwise(order, u, d, o);
                    o.h                = h / refine;
                    const auto r2      = check_pointwise(order, u, d, o);
                    PointwiseStudyEntry e{domain_label(name), cf.name, r1.c_emp, r2.c_emp, 0.0, r1.evaluated};
                    e.drift = r1.c_emp > 0.0 ? std::abs(r2.c_emp - r1.c_emp) / r1.c_emp : 0.0;
                    st.all_finite = st.all_finite && std::isfinite(e.c_emp) && std::isfinite(e.c_refined) && e.c_emp > 0.0;
                    st.max_drift  = std::max(st.max_drift, e.drift);
                    auto [it, fresh] = range.emplace(cf.name, std::make_pair(e.c_emp, e.c_emp));
                    if (!fresh) {
                        it->second.first  = std::min(it->second.first, e.c_emp);
                        it->second.second = std::max(it->second.second, e.c_emp);
                    }
                    st.entries.push_back(std::move(e));
                }
            },
            dom);
    }
    for (const auto& [name, mm] : range)
        st.max_spread = std::max(st.max_spread, mm.first > 0.0 ? mm.second / mm.first : inf);
    return st;
}

////////////////////////////////////////////////////////////////////////////////
//
// reports
//
////////////////////////////////////////////////////////////////////////////////

using ojson = nlohmann::ordered_json;

inline ojson to_json(const ExperimentReport& r, bool timings = false)
{
    ojson j;
    j["case"]    = r.case_id;
    j["theorem"] = r.theorem;
    j["domain"]  = r.domain;
    j["trial"]   = r.trial;
    j["dim"]     = r.dim;
    j["measure"] = r.measure;
    j["mu_mass"] = r.mu_mass;
    j["volume"]  = r.volume;
    j["surface"] = r.surface;
    if (!std::isnan(r.ahlfors))
        j["ahlfors_constant"] = r.ahlfors;
    if (!r.exponent_kind.empty()) {
        j["exponent"] = {{"kind", r.exponent_kind}, {"value", r.exponent}, {"branch", r.exponent_branch}};
    }
    j["lhs"] = {{"norm", r.lhs_norm}, {"value", r.lhs}};
    ojson terms = ojson::array();
    for (const auto& t : r.terms) {
        ojson tj{{"name", t.name},
                 {"kind", to_string(t.kind)},
                 {"norm", t.norm},
                 {"value", t.value},
                 {"coef", t.coef.value},
                 {"coef_base", t.coef.base},
                 {"coef_exponent", t.coef.exponent},
                 {"coef_branch", t.coef.branch},
                 {"product", t.product}};
        if (!t.objective.empty())
            tj["objective"] = t.objective;
        terms.push_back(std::move(tj));
    }
    j["terms"]      = std::move(terms);
    j["rhs"]        = r.rhs;
    j["ratio"]      = std::isfinite(r.ratio) ? ojson(r.ratio) : ojson("inf");
    j["degenerate"] = r.degenerate;
    j["mesh"]       = {{"h", r.h},
                       {"boundary_spacing", r.boundary_spacing},
                       {"interior_nodes", r.interior_nodes},
                       {"boundary_samples", r.boundary_samples}};
    j["notes"]      = r.notes;
    if (timings)
        j["seconds"] = r.seconds;
    return j;
}

inline ojson to_json(const CorpusResult& res, bool timings = false)
{
    ojson j;
    j["seed"] = res.seed;
    ojson cases = ojson::array();
    for (const auto& c : res.cases) {
        if (c.report) {
            cases.push_back(to_json(*c.report, timings));
        } else {
            cases.push_back(ojson{{"case", c.case_id},
                                  {"theorem", c.theorem},
                                  {"domain", c.domain},
                                  {"trial", c.function},
                                  {"error_code", c.error_code},
                                  {"error", c.error_message}});
        }
    }
    j["cases"] = std::move(cases);
    const auto& S = res.summary;
    j["summary"]  = {{"cases", S.cases},
                     {"errors", S.errors},
                     {"nonfinite", S.nonfinite},
                     {"degenerate", S.degenerate},
                     {"max_ratio_by_theorem", S.max_ratio_by_theorem},
                     {"max_ratio_by_domain", S.max_ratio_by_domain}};
    return j;
}

inline std::string corpus_json(const CorpusResult& res, bool timings = false) { return to_json(res, timings).dump(2) + "\n"; }

// quoted when it holds a comma or a quote
inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s)
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

inline std::string report_csv(const std::vector<ExperimentReport>& reports)
{
    std::ostringstream o;
    o << "case,theorem,domain,lhs,rhs1,rhs2,rhs3,coef1,coef2,coef3,ratio\n";
    for (const auto& r : reports) {
        o << csv_field(r.case_id) << ',' << r.theorem << ',' << csv_field(r.domain) << ',' << detail::fmt_num(r.lhs);
        for (std::size_t k = 0; k < 3; ++k)
            o << ',' << (k < r.terms.size() ? detail::fmt_num(r.terms[k].value) : "");
        for (std::size_t k = 0; k < 3; ++k)
            o << ',' << (k < r.terms.size() ? detail::fmt_num(r.terms[k].coef.value) : "");
        o << ',' << detail::fmt_num(r.ratio) << '\n';
    }
    return o.str();
}

inline std::string report_csv(const CorpusResult& res)
{
    std::vector<ExperimentReport> reps;
    for (const auto& c : res.cases)
        if (c.report)
            reps.push_back(*c.report);
    return report_csv(reps);
}

// plot-ready ratio table
inline std::string ratio_plot_csv(const std::vector<ExperimentReport>& reports)
{
    std::ostringstream o;
    o << "case,domain,trial,theorem,h,ratio\n";
    for (const auto& r : reports)
        o << csv_field(r.case_id) << ',' << csv_field(r.domain) << ',' << csv_field(r.trial) << ',' << r.theorem << ',' << detail::fmt_num(r.h) << ','
          << detail::fmt_num(r.ratio) << '\n';
    return o.str();
}

} // namespace friedrichs
