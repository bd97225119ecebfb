#pragma once
//
// Hajlasz upper gradients of boundary traces: the pairwise Lipschitz
// quotient, LP-minimal gradients, and the induced seminorm.
//

#include <friedrichs/geometry.hpp>
#include <friedrichs/lp.hpp>
#include <friedrichs/measure_core.hpp>
#include <friedrichs/ri_norms.hpp>

#include <fstream>
#include <sstream>

namespace friedrichs {

template <std::size_t N>
struct BoundaryTrace
{
    std::vector<std::array<double, N>> points;
    std::vector<double>                weights;
    std::vector<double>                values;

    BoundaryTrace() = default;
    BoundaryTrace(std::vector<std::array<double, N>> p, std::vector<double> w, std::vector<double> v)
        : points(std::move(p)), weights(std::move(w)), values(std::move(v))
    {
        validate();
    }
    BoundaryTrace(const BoundarySample<N>& s, std::vector<double> v) : BoundaryTrace(s.points, s.weights, std::move(v)) {}

    std::size_t size() const noexcept { return points.size(); }

    void validate() const
    {
        if (weights.size() != points.size() || values.size() != points.size())
            fail_validation("size_mismatch", "trace points, weights and values must align");
        for (std::size_t i = 0; i < size(); ++i) {
            if (!std::isfinite(values[i]))
                fail_validation("nonfinite_value", "trace values must be finite");
            if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
                fail_validation("bad_weight", "trace weights must be positive");
        }
    }

    BoundaryTrace scaled(double c) const
    {
        BoundaryTrace t = *this;
        for (auto& v : t.values)
            v *= c;
        return t;
    }
};

namespace detail {

// dense matrix of |phi_i - phi_j| / |x_i - x_j|
template <std::size_t N>
std::vector<double> quotient_matrix(const BoundaryTrace<N>& tr, unsigned threads = 0)
{
    const std::size_t   n = tr.size();
    std::vector<double> b(n * n, 0.0);
    std::vector<char>   dup(n, 0);
    parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            const double d = norm2(tr.points[i] - tr.points[j]);
            if (d <= 1e-12)
                dup[i] = 1;
            else
                b[i * n + j] = std::abs(tr.values[i] - tr.values[j]) / d;
        }
    });
    for (char c : dup)
        if (c)
            fail_validation("duplicate_points", "trace has coincident sample points");
    return b;
}

} // namespace detail

template <std::size_t N>
std::vector<double> lipschitz_quotient_gradient(const BoundaryTrace<N>& tr, unsigned threads = 0)
{
    tr.validate();
    if (tr.size() < 2)
        fail_validation("too_few_samples", "an upper gradient needs at least two samples");
    const std::size_t   n = tr.size();
    std::vector<double> g(n, 0.0);
    std::vector<char>   dup(n, 0);
    parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            const double d = norm2(tr.points[i] - tr.points[j]);
            if (d <= 1e-12)
                dup[i] = 1;
            else
                best = std::max(best, std::abs(tr.values[i] - tr.values[j]) / d);
        }
        g[i] = best;
    });
    for (char c : dup)
        if (c)
            fail_validation("duplicate_points", "trace has coincident sample points");
    return g;
}

enum class GradientObjective
{
    sup,
    integral
};

inline GradientObjective parse_objective(std::string_view s)
{
    if (s == "sup")
        return GradientObjective::sup;
    if (s == "int" || s == "integral")
        return GradientObjective::integral;
    fail_validation("bad_objective", "objective must be sup or int");
}

struct UpperGradient
{
    std::vector<double> g;
    double              objective = 0.0;
    double              gap       = 0.0; // relative optimality gap
    double              min_slack = 0.0; // min_ij d_ij (g_i + g_j) - |phi_i - phi_j|
    std::size_t         pivots    = 0;
};

struct LpBudget
{
    std::size_t max_points = 2000;
    unsigned    threads    = 0;
};

template <std::size_t N>
double feasibility_slack(const BoundaryTrace<N>& tr, const std::vector<double>& g)
{
    double s = inf;
    for (std::size_t i = 0; i < tr.size(); ++i)
        for (std::size_t j = i + 1; j < tr.size(); ++j)
            s = std::min(s, norm2(tr.points[i] - tr.points[j]) * (g[i] + g[j]) - std::abs(tr.values[i] - tr.values[j]));
    return tr.size() < 2 ? 0.0 : s;
}

//
// Sup objective: every feasible g has max(g_i, g_j) >= b_ij / 2, and the
// clamp min(max b / 2, lipschitz quotient) attains it. Integral objective:
// the pairwise covering LP.
//
template <std::size_t N>
UpperGradient minimal_upper_gradient(const BoundaryTrace<N>& tr, GradientObjective obj, const LpBudget& budget = {})
{
    tr.validate();
    if (tr.size() < 2)
        fail_validation("too_few_samples", "an upper gradient needs at least two samples");
    const std::size_t   n   = tr.size();
    const auto          lip = lipschitz_quotient_gradient(tr, budget.threads);

    UpperGradient out;
    if (obj == GradientObjective::sup) {
        const double half = 0.5 * *std::max_element(lip.begin(), lip.end());
        out.g.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            out.g[i] = std::min(half, lip[i]);
        out.objective = half;
        out.gap       = 0.0;
    } else {
        if (n > budget.max_points)
            fail_validation("lp_budget", "trace has more samples than the LP budget allows");
        lp::PairCover lp(tr.weights, detail::quotient_matrix(tr, budget.threads));
        auto          r = lp.solve();
        out.pivots      = r.pivots;
        out.g           = std::move(r.g);
        for (std::size_t i = 0; i < n; ++i)
            out.g[i] = std::min(out.g[i], lip[i]);
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i)
            t[i] = tr.weights[i] * out.g[i];
        out.objective = pairwise_sum(t);
        out.gap       = out.objective > 0.0 ? (out.objective - r.dual) / out.objective : 0.0;
        if (out.gap > 1e-7)
            fail_runtime("lp_gap", "LP optimality gap above 1e-7");
    }
    out.min_slack = feasibility_slack(tr, out.g);
    return out;
}

struct SeminormResult
{
    double            value = 0.0;
    GradientObjective used  = GradientObjective::sup;
};

//
// The induced norm of an LP-optimal gradient. This bounds the infimum over
// all upper gradients from above.
//
template <std::size_t N>
SeminormResult seminorm(const BoundaryTrace<N>& tr, const NormSpec& spec, const LpBudget& budget = {})
{
    validate(spec);
    auto eval = [&](const std::vector<double>& g) { return norm_eval(spec, rearrange(tr.weights, g)); };
    const bool is_sup = std::holds_alternative<LInf>(spec) ||
                        (std::holds_alternative<Lebesgue>(spec) && std::isinf(std::get<Lebesgue>(spec).p));
    const bool is_l1  = std::holds_alternative<Lebesgue>(spec) && std::get<Lebesgue>(spec).p == 1.0;
    if (is_sup)
        return {eval(minimal_upper_gradient(tr, GradientObjective::sup, budget).g), GradientObjective::sup};
    if (is_l1)
        return {eval(minimal_upper_gradient(tr, GradientObjective::integral, budget).g), GradientObjective::integral};
    const double a = eval(minimal_upper_gradient(tr, GradientObjective::sup, budget).g);
    if (tr.size() > budget.max_points)
        return {a, GradientObjective::sup};
    const double c = eval(minimal_upper_gradient(tr, GradientObjective::integral, budget).g);
    return a <= c ? SeminormResult{a, GradientObjective::sup} : SeminormResult{c, GradientObjective::integral};
}

//
// Trace CSV: "x,y,weight,value" or "x,y,z,weight,value" per line; a header
// line starting with a letter is skipped.
//
struct TraceFile
{
    std::size_t      dim = 2;
    BoundaryTrace<2> t2;
    BoundaryTrace<3> t3;
};

inline TraceFile parse_trace_csv(std::istream& in)
{
    TraceFile                       tf;
    std::vector<std::vector<double>> rows;
    std::string                     line;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        if (std::isalpha(static_cast<unsigned char>(line[first])) && rows.empty())
            continue;
        std::vector<double> row;
        std::stringstream   ss(line);
        std::string         cell;
        while (std::getline(ss, cell, ','))
            row.push_back(detail::parse_num(cell));
        if (row.size() != 4 && row.size() != 5)
            fail_validation("bad_trace_file", "trace rows need 4 or 5 columns");
        if (!rows.empty() && row.size() != rows.front().size())
            fail_validation("bad_trace_file", "trace rows have inconsistent widths");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        fail_validation("bad_trace_file", "trace file is empty");
    tf.dim = rows.front().size() - 2;
    std::vector<double> w, v;
    std::vector<Vec2>   p2;
    std::vector<Vec3>   p3;
    for (const auto& r : rows) {
        if (tf.dim == 2)
            p2.push_back({r[0], r[1]});
        else
            p3.push_back({r[0], r[1], r[2]});
        w.push_back(r[tf.dim]);
        v.push_back(r[tf.dim + 1]);
    }
    if (tf.dim == 2)
        tf.t2 = BoundaryTrace<2>(p2, w, v);
    else
        tf.t3 = BoundaryTrace<3>(p3, w, v);
    return tf;
}

inline TraceFile load_trace_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail_validation("file_not_found", "cannot open trace file " + path);
    return parse_trace_csv(in);
}

} // namespace friedrichs
