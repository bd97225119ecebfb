#pragma once
//
// One-dimensional Hardy-type operators acting on nonincreasing functions and
// lower estimates of their best constants between rearrangement-invariant
// norms.
//
// An operator is a sum of KernelTerms
//
//     lower:  t^a log^theta(1 + M/t^e) ∫_0^{min(t^b, L)} f(rho) drho
//     upper:  t^a log^theta(1 + M/t^e) ∫_{t^b}^{L} rho^{-c} f(rho) drho
//
// with f supported in (0, l_src) and t in (0, l_tgt).
//

#include <friedrichs/common.hpp>
#include <friedrichs/measure_core.hpp>
#include <friedrichs/quadrature.hpp>
#include <friedrichs/ri_norms.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace friedrichs {

enum class IntegralKind
{
    lower,
    upper
};

struct KernelTerm
{
    double       a      = 0.0; // outer power
    double       theta  = 0.0; // outer log exponent
    double       scale  = 1.0; // M in log(1 + M/t^e)
    double       e      = 1.0;
    IntegralKind kind   = IntegralKind::lower;
    double       b      = 1.0;
    double       c      = 0.0; // upper terms only
    double       cutoff = inf; // L; the source support (0, l_src) also truncates

    double outer(double t) const
    {
        const double p = a == 0.0 ? 1.0 : std::pow(t, a);
        if (theta == 0.0)
            return p;
        return p * std::pow(std::log1p(scale * std::pow(t, -e)), theta);
    }
};

enum class TermCombination
{
    sum_inside, // || sum_k T_k f ||_Y
    sum_of_norms // sum_k || T_k f ||_Y
};

struct HardyProblem
{
    std::string             name;
    std::vector<KernelTerm> terms;
    NormSpec                source = Lebesgue{2.0};
    NormSpec                target = Lebesgue{2.0};
    double                  l_src  = 1.0;
    double                  l_tgt  = 1.0;
    TermCombination         combine = TermCombination::sum_inside;
};

inline void validate(const HardyProblem& pb)
{
    if (!(pb.l_src > 0.0 && std::isfinite(pb.l_src) && pb.l_tgt > 0.0 && std::isfinite(pb.l_tgt)))
        fail_validation("bad_length", "source and target lengths must be positive and finite");
    validate(pb.source);
    validate(pb.target);
    for (const auto& k : pb.terms) {
        if (!(k.b > 0.0) || !std::isfinite(k.b))
            fail_validation("bad_kernel", "kernel exponent b must be positive");
        if (!(k.c >= 0.0) || !std::isfinite(k.c))
            fail_validation("bad_kernel", "kernel exponent c must be nonnegative");
        if (!(k.cutoff > 0.0))
            fail_validation("bad_kernel", "kernel cutoff must be positive");
        if (!std::isfinite(k.a) || !std::isfinite(k.theta) || !(k.scale > 0.0) || !(k.e > 0.0))
            fail_validation("bad_kernel", "outer weight parameters must be finite with M, e > 0");
    }
}

namespace detail {

// ∫_lo^hi rho^{-c} drho
inline double power_integral(double c, double lo, double hi)
{
    if (!(hi > lo))
        return 0.0;
    if (c == 0.0)
        return hi - lo;
    if (c == 1.0)
        return lo == 0.0 ? inf : std::log(hi / lo);
    if (lo == 0.0)
        return c < 1.0 ? std::pow(hi, 1.0 - c) / (1.0 - c) : inf;
    return (std::pow(hi, 1.0 - c) - std::pow(lo, 1.0 - c)) / (1.0 - c);
}

inline double effective_cutoff(const KernelTerm& k, double l_src) { return std::min(k.cutoff, l_src); }

inline double integer_power(double x, int n)
{
    double r = 1.0;
    for (int i = 0; i < n; ++i)
        r *= x;
    return r;
}

} // namespace detail

//
// T f(t) for an arbitrary step profile, evaluated in closed form.
//
inline double apply_kernel(const HardyProblem& pb, const RearrangementProfile& f, double t)
{
    validate(pb);
    if (!(t > 0.0 && t < pb.l_tgt))
        fail_validation("t_out_of_range", "t must lie in (0, l_tgt)");

    const auto& br = f.breaks();
    const auto& v  = f.values();
    double      total = 0.0;
    for (const auto& k : pb.terms) {
        const double E = detail::effective_cutoff(k, pb.l_src);
        const double x = std::min(std::pow(t, k.b), E);
        double       I = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] == 0.0)
                continue;
            if (k.kind == IntegralKind::lower) {
                const double hi = std::min(br[i + 1], x);
                if (hi > br[i])
                    I += v[i] * (hi - br[i]);
            } else {
                const double lo = std::max(br[i], x);
                const double hi = std::min(br[i + 1], E);
                I += v[i] * detail::power_integral(k.c, lo, hi);
            }
        }
        if (I != 0.0)
            total += k.outer(t) * I;
    }
    return total;
}

////////////////////////////////////////////////////////////////////////////////
//
// grids
//
////////////////////////////////////////////////////////////////////////////////

inline constexpr int max_grid_octaves = 256;

//
// Geometric breakpoints 0 < l r^{-(N-1)} < ... < l r^{-1} < l with r = 2^{1/4}
// while the depth stays within max_grid_octaves, and r = 2^{256/N} beyond.
// Grids of sizes N and 4N are nested.
//
inline std::vector<double> source_grid(double length, std::size_t cells)
{
    if (cells < 1)
        fail_validation("bad_grid", "grid needs at least one cell");
    const double        step = std::min(0.25, double(max_grid_octaves) / double(cells));
    std::vector<double> s(cells + 1);
    s[0] = 0.0;
    for (std::size_t i = 1; i <= cells; ++i)
        s[i] = length * std::exp2(-step * double(cells - i));
    s[cells] = length;
    return s;
}

////////////////////////////////////////////////////////////////////////////////
//
// evaluator on a fixed source grid
//
////////////////////////////////////////////////////////////////////////////////

//
// Precomputes everything that depends only on the grid: target quadrature
// nodes, per-node cell indices and partial integrals, source piece weights.
// A step function on the grid is then mapped to ||Tf||_Y in O(N + nodes).
//
// The target norm is applied to Tf itself; for Lorentz-type targets this is
// its own rearrangement because Tf is nonincreasing for the kernels in use.
//
class HardyEvaluator
{
public:
    static constexpr int default_tail_octaves = 48;

    HardyEvaluator(const HardyProblem& pb, std::vector<double> breaks, int tail_octaves = default_tail_octaves)
        : pb_(pb), s_(std::move(breaks)), tail_octaves_(tail_octaves)
    {
        validate(pb_);
        if (s_.size() < 2 || s_.front() != 0.0)
            fail_validation("bad_grid", "source breakpoints must start at 0");
        for (std::size_t i = 1; i < s_.size(); ++i)
            if (!(s_[i] > s_[i - 1]))
                fail_validation("bad_grid", "source breakpoints must increase");
        n_ = s_.size() - 1;
        build_source();
        build_nodes();
        build_terms();
    }

    std::size_t cells() const noexcept { return n_; }
    std::size_t node_count() const noexcept { return t_.size(); }
    const std::vector<double>& breaks() const noexcept { return s_; }
    const HardyProblem&        problem() const noexcept { return pb_; }

    struct Workspace
    {
        std::vector<double> f, P, Q, v, tmp;
    };

    double source_norm(std::span<const double> f) const
    {
        if (x_form_)
            return combine_pieces(*x_form_, f, x_weights_);
        return norm_eval(pb_.source, RearrangementProfile(s_, std::vector<double>(f.begin(), f.end())));
    }

    double target_norm(std::span<const double> f, Workspace& ws) const
    {
        if (pb_.terms.empty())
            return 0.0;
        prepare(f, ws);
        if (pb_.combine == TermCombination::sum_inside) {
            ws.v.assign(t_.size(), 0.0);
            for (std::size_t k = 0; k < terms_.size(); ++k)
                accumulate_term(k, ws, ws.v);
            return node_norm(ws.v);
        }
        double total = 0.0;
        for (std::size_t k = 0; k < terms_.size(); ++k) {
            ws.v.assign(t_.size(), 0.0);
            accumulate_term(k, ws, ws.v);
            total += node_norm(ws.v);
            if (std::isinf(total))
                return inf;
        }
        return total;
    }

    // ||Tf||_Y / ||f||_X, 0 for f = 0
    double ratio(std::span<const double> f, Workspace& ws) const
    {
        const double x = source_norm(f);
        if (!(x > 0.0))
            return 0.0;
        const double y = target_norm(f, ws);
        return std::isinf(y) ? inf : y / x;
    }

    double ratio(std::span<const double> f) const
    {
        Workspace ws;
        return ratio(f, ws);
    }

private:
    struct TermData
    {
        const KernelTerm*   term = nullptr;
        std::vector<double> outer; // per node
        std::vector<int>    cell;  // per node, in [0, n]
        std::vector<double> local; // per node: x - s_j (lower) or ∫_x^{min(s_{j+1},E)} rho^{-c} (upper)
        std::vector<double> G;     // per cell, upper only
    };

    void build_source()
    {
        x_form_ = weighted_form(pb_.source, pb_.l_src);
        if (x_form_)
            x_weights_ = piece_weights(*x_form_, s_);
        y_form_ = weighted_form(pb_.target, pb_.l_tgt);
        if (!y_form_) {
            if (const auto* o = std::get_if<OrliczYoung>(&pb_.target))
                y_young_ = o->young;
            else
                y_young_ = ShiftedExpYoung{std::get<OrliczExp>(pb_.target).gamma};
        }
    }

    void build_nodes()
    {
        // breakpoints of Tf in t
        std::vector<double> tb;
        for (const auto& k : pb_.terms) {
            const double E = detail::effective_cutoff(k, pb_.l_src);
            for (std::size_t i = 1; i <= n_; ++i) {
                if (s_[i] > E)
                    break;
                tb.push_back(std::pow(s_[i], 1.0 / k.b));
            }
            tb.push_back(std::pow(E, 1.0 / k.b));
        }
        tb.push_back(pb_.l_tgt);
        std::sort(tb.begin(), tb.end());
        std::vector<double> u;
        for (double x : tb) {
            if (!(x > 0.0) || x > pb_.l_tgt)
                continue;
            if (u.empty() || x > u.back() * (1.0 + 1e-13))
                u.push_back(x);
        }
        if (u.back() < pb_.l_tgt)
            u.push_back(pb_.l_tgt);
        else
            u.back() = pb_.l_tgt;

        const double t_min = u.front();
        for (int o = 0; o < tail_octaves_; ++o) {
            const double lo = t_min * std::exp2(-double(tail_octaves_ - o));
            add_span(lo, 2.0 * lo, o);
        }
        for (std::size_t i = 0; i + 1 < u.size(); ++i)
            add_span(u[i], u[i + 1], -1);
        // endpoint of the last span, for suprema
        t_.push_back(u.back());
        w_.push_back(0.0);
        octave_.push_back(-1);

        if (y_form_) {
            Omega_.resize(t_.size());
            for (std::size_t k = 0; k < t_.size(); ++k)
                Omega_[k] = y_form_->is_sup() ? y_form_->weight(t_[k]) : w_[k] * y_form_->weight_pow(t_[k]);
            const double s = y_form_->sigma;
            if (!y_form_->is_sup() && s == std::floor(s) && s <= 32.0)
                sigma_int_ = int(s);
        }
    }

    // quarter-octave panels of 4 Gauss points in log t, plus the left endpoint
    void add_span(double lo, double hi, int octave)
    {
        const auto&  g     = quad::gauss_rule<4>();
        const double width = std::log(hi / lo);
        const int    m     = std::max(1, int(std::ceil(width / (0.25 * std::numbers::ln2) - 1e-9)));
        const double h     = width / m;
        std::array<int, 4> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(), [&](int i, int j) { return g.x[i] < g.x[j]; });
        for (int p = 0; p < m; ++p) {
            const double a = std::log(lo) + p * h;
            t_.push_back(std::exp(a));
            w_.push_back(0.0);
            octave_.push_back(octave);
            for (int i : order) {
                const double t = std::exp(a + 0.5 * h * (g.x[i] + 1.0));
                t_.push_back(t);
                w_.push_back(0.5 * h * g.w[i] * t);
                octave_.push_back(octave);
            }
        }
    }

    void build_terms()
    {
        for (const auto& k : pb_.terms) {
            TermData     d;
            const double E = detail::effective_cutoff(k, pb_.l_src);
            d.term         = &k;
            d.outer.resize(t_.size());
            d.cell.resize(t_.size());
            d.local.resize(t_.size());
            for (std::size_t i = 0; i < t_.size(); ++i) {
                const double t = t_[i];
                const double x = std::min(std::pow(t, k.b), E);
                d.outer[i]     = k.outer(t);
                int j = int(std::upper_bound(s_.begin(), s_.end(), x) - s_.begin()) - 1;
                j     = std::clamp(j, 0, int(n_));
                d.cell[i] = j;
                if (k.kind == IntegralKind::lower)
                    d.local[i] = j < int(n_) ? x - s_[j] : 0.0;
                else
                    d.local[i] = j < int(n_) ? detail::power_integral(k.c, x, std::min(s_[j + 1], E)) : 0.0;
            }
            if (k.kind == IntegralKind::upper) {
                d.G.assign(n_, 0.0);
                for (std::size_t i = 1; i < n_; ++i)
                    d.G[i] = detail::power_integral(k.c, s_[i], std::min(s_[i + 1], E));
            }
            terms_.push_back(std::move(d));
        }
    }

    void prepare(std::span<const double> f, Workspace& ws) const
    {
        ws.f.assign(f.begin(), f.end());
        ws.f.push_back(0.0);
        ws.P.assign(n_ + 1, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            ws.P[i + 1] = ws.P[i] + ws.f[i] * (s_[i + 1] - s_[i]);
    }

    void accumulate_term(std::size_t k, Workspace& ws, std::vector<double>& out) const
    {
        const auto& d = terms_[k];
        if (d.term->kind == IntegralKind::lower) {
            for (std::size_t i = 0; i < t_.size(); ++i) {
                const int j = d.cell[i];
                out[i] += d.outer[i] * (ws.P[j] + ws.f[j] * d.local[i]);
            }
            return;
        }
        // suffix sums Q_j = sum_{i >= j} f_i G_i
        ws.Q.assign(n_ + 2, 0.0);
        for (std::size_t i = n_; i-- > 1;)
            ws.Q[i] = ws.Q[i + 1] + ws.f[i] * d.G[i];
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const int    j = d.cell[i];
            const double I = j < int(n_) ? ws.f[j] * d.local[i] + ws.Q[j + 1] : 0.0;
            out[i] += d.outer[i] * I;
        }
    }

    double node_norm(std::vector<double>& v) const
    {
        if (!y_form_)
            return node_luxemburg(v);
        if (y_form_->is_sup()) {
            double best = 0.0, deep = 0.0, next = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double x = Omega_[i] * std::abs(v[i]);
                best           = std::max(best, x);
                if (octave_[i] == 0)
                    deep = std::max(deep, x);
                else if (octave_[i] == 1)
                    next = std::max(next, x);
            }
            if (!std::isfinite(best) || (deep >= best && deep > next * (1.0 + 1e-6) && deep > 0.0))
                return inf;
            return best;
        }
        double vmax = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (Omega_[i] > 0.0)
                vmax = std::max(vmax, std::abs(v[i]));
        if (vmax == 0.0)
            return 0.0;
        if (!std::isfinite(vmax))
            return inf;
        const double inv = 1.0 / vmax;
        double       D0 = 0.0, D1 = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double r = std::abs(v[i]) * inv;
            double       x;
            if (sigma_int_ == 1)
                x = r;
            else if (sigma_int_ == 2)
                x = r * r;
            else if (sigma_int_ > 0)
                x = detail::integer_power(r, sigma_int_);
            else
                x = std::pow(r, y_form_->sigma);
            v[i] = Omega_[i] * x;
            if (octave_[i] == 0)
                D0 += v[i];
            else if (octave_[i] == 1)
                D1 += v[i];
        }
        const double S = pairwise_sum(v);
        if (!std::isfinite(S) || (D0 > 0.0 && D0 >= 0.999 * D1 && D0 > 1e-12 * S))
            return inf;
        return vmax * std::pow(S, 1.0 / y_form_->sigma);
    }

    double node_luxemburg(const std::vector<double>& v) const
    {
        double vmax = 0.0;
        for (double x : v)
            vmax = std::max(vmax, std::abs(x));
        if (vmax == 0.0)
            return 0.0;
        if (std::holds_alternative<IndicatorYoung>(y_young_))
            return vmax;
        auto modular = [&](double lambda) {
            double s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i)
                if (w_[i] > 0.0 && v[i] != 0.0)
                    s += w_[i] * young_eval(y_young_, std::abs(v[i]) / lambda);
            return s;
        };
        double hi = vmax;
        while (!(modular(hi) <= 1.0)) {
            hi *= 2.0;
            if (hi > 1e300)
                return inf;
        }
        double lo = hi;
        while (modular(lo) <= 1.0) {
            lo *= 0.5;
            if (lo < 1e-300)
                return 0.0;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
            const double mid = std::sqrt(lo * hi);
            (modular(mid) <= 1.0 ? hi : lo) = mid;
        }
        return hi;
    }

    HardyProblem                pb_;
    std::vector<double>         s_;
    std::size_t                 n_ = 0;
    int                         tail_octaves_;
    std::optional<WeightedForm> x_form_, y_form_;
    std::vector<double>         x_weights_;
    YoungFunction               y_young_ = PowerYoung{2.0};
    std::vector<double>         t_, w_, Omega_;
    std::vector<int>            octave_;
    int                         sigma_int_ = 0;
    std::vector<TermData>       terms_;
};

//
// ||Tf||_Y / ||f||_X for a given profile, quadrature nodes built on its own
// breakpoints.
//
inline double hardy_ratio(const HardyProblem& pb, const RearrangementProfile& f)
{
    if (f.is_zero() || f.size() == 0)
        return 0.0;
    // restrict to (0, l_src)
    std::vector<double> b{0.0}, v;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.breaks()[i] >= pb.l_src)
            break;
        b.push_back(std::min(f.breaks()[i + 1], pb.l_src));
        v.push_back(f.values()[i]);
    }
    if (b.back() < pb.l_src) {
        b.push_back(pb.l_src);
        v.push_back(0.0);
    }
    HardyEvaluator ev(pb, b);
    return ev.ratio(v);
}

////////////////////////////////////////////////////////////////////////////////
//
// best constant search
//
////////////////////////////////////////////////////////////////////////////////

struct BestConstant
{
    double               estimate = 0.0;
    RearrangementProfile argmax; // normalised, ||f||_X = 1
    std::size_t          grid = 0;
};

struct SearchOptions
{
    int      restarts   = 8;
    int      sweeps     = 3;
    int      max_blocks = 128;
    uint64_t seed       = 1;
    unsigned threads    = 0;
    int      tail_octaves = HardyEvaluator::default_tail_octaves;
};

namespace detail {

// exponent of the natural extremal family min(A, t^{-kappa}) for the source
inline double source_power(const NormSpec& X)
{
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Lebesgue> || std::is_same_v<T, Lorentz> || std::is_same_v<T, LorentzZygmund>)
                return std::isinf(s.p) ? 0.0 : 1.0 / s.p;
            else if constexpr (std::is_same_v<T, OrliczYoung>) {
                if (const auto* pw = std::get_if<PowerYoung>(&s.young))
                    return 1.0 / pw->p;
                return 0.0;
            } else
                return 0.0;
        },
        X);
}

// log exponent of the extremal family for log-type sources
inline double source_log_power(const NormSpec& X)
{
    if (const auto* z = std::get_if<LorentzZygmund>(&X))
        return std::isinf(z->p) ? -z->theta : 0.0;
    if (const auto* e = std::get_if<OrliczExp>(&X))
        return 1.0 / e->gamma;
    return 0.0;
}

inline std::vector<double> increments_of(const std::vector<double>& f)
{
    std::vector<double> d(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        d[i] = std::max(0.0, f[i] - (i + 1 < f.size() ? f[i + 1] : 0.0));
    return d;
}

inline void values_of(const std::vector<double>& d, std::vector<double>& f)
{
    f.resize(d.size());
    double acc = 0.0;
    for (std::size_t i = d.size(); i-- > 0;) {
        acc += d[i];
        f[i] = acc;
    }
}

// cell representative point (geometric midpoint; the innermost cell uses s_1/2)
inline double cell_point(const std::vector<double>& s, std::size_t i)
{
    return i == 0 ? 0.5 * s[1] : std::sqrt(s[i] * s[i + 1]);
}

} // namespace detail

//
// Multi-start block coordinate ascent over nonnegative increments. Seeds:
// indicators chi_(0,a), truncated powers min(A, t^{-1/p}) (and truncated logs
// for log-type sources), an optional warm start, and seeded perturbations.
//
inline BestConstant best_constant_lower(const HardyProblem& pb, std::size_t grid_size, const SearchOptions& opt = {},
                                        const RearrangementProfile* warm_start = nullptr)
{
    validate(pb);
    if (grid_size < 8)
        fail_validation("bad_grid", "grid_size must be at least 8");
    if (opt.restarts < 1)
        fail_validation("bad_restarts", "restarts must be positive");

    BestConstant out;
    out.grid = grid_size;
    const HardyEvaluator ev(pb, source_grid(pb.l_src, grid_size), opt.tail_octaves);
    const auto&          s = ev.breaks();
    const std::size_t    N = grid_size;

    auto normalise = [&](std::vector<double> f) {
        const double x = ev.source_norm(f);
        if (x > 0.0)
            for (auto& v : f)
                v /= x;
        return RearrangementProfile(s, f);
    };

    if (pb.terms.empty()) {
        out.argmax = normalise(std::vector<double>(N, 1.0));
        return out;
    }

    // seeds
    std::vector<std::vector<double>> seeds;
    const std::size_t                stride = std::max<std::size_t>(1, N / 256);
    const double                     kappa  = detail::source_power(pb.source);
    const double                     lpow   = detail::source_log_power(pb.source);
    for (std::size_t k = 1; k <= N; k += stride) {
        std::vector<double> f(N, 0.0);
        std::fill(f.begin(), f.begin() + k, 1.0);
        seeds.push_back(f);
        if (kappa > 0.0) {
            const double A = std::pow(s[k], -kappa);
            for (std::size_t i = 0; i < N; ++i)
                f[i] = std::min(A, std::pow(detail::cell_point(s, i), -kappa));
            seeds.push_back(f);
        }
        if (lpow > 0.0) {
            const double A = std::pow(std::log(std::numbers::e * pb.l_src / s[k]), lpow);
            for (std::size_t i = 0; i < N; ++i)
                f[i] = std::min(A, std::pow(std::log(std::numbers::e * pb.l_src / detail::cell_point(s, i)), lpow));
            seeds.push_back(f);
        }
    }
    if (warm_start) {
        std::vector<double> f(N);
        for (std::size_t i = 0; i < N; ++i)
            f[i] = warm_start->eval(detail::cell_point(s, i));
        if (std::any_of(f.begin(), f.end(), [](double v) { return v > 0.0; }))
            seeds.insert(seeds.begin(), f);
    }

    std::vector<double> seed_value(seeds.size());
    {
        HardyEvaluator::Workspace ws;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            seed_value[i] = ev.ratio(seeds[i], ws);
            if (std::isinf(seed_value[i])) {
                out.estimate = inf;
                out.argmax   = normalise(seeds[i]);
                return out;
            }
        }
    }
    std::vector<std::size_t> order(seeds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return seed_value[a] > seed_value[b]; });
    if (warm_start && !seeds.empty()) {
        // keep the warm start as the first restart regardless of rank
        order.erase(std::find(order.begin(), order.end(), std::size_t(0)));
        order.insert(order.begin(), 0);
    }

    const std::size_t   R = std::size_t(opt.restarts);
    std::vector<double> best_val(R, 0.0);
    std::vector<std::vector<double>> best_f(R);

    const std::size_t B      = std::min<std::size_t>(N, std::size_t(std::max(1, opt.max_blocks)));
    auto              blk_lo = [&](std::size_t b) { return b * N / B; };

    parallel_for(R, resolve_threads(opt.threads), [&](std::size_t r) {
        HardyEvaluator::Workspace ws;
        std::mt19937_64           rng(opt.seed * 0x9E3779B97F4A7C15ULL + r);
        std::normal_distribution<double> gauss(0.0, 1.0);

        const bool          perturb = r >= 2 || r >= order.size();
        std::vector<double> f       = seeds[order[r % order.size()]];
        std::vector<double> d       = detail::increments_of(f);
        if (perturb)
            for (auto& x : d)
                x *= std::exp(0.5 * gauss(rng));
        detail::values_of(d, f);
        double V = ev.ratio(f, ws);

        std::vector<double> trial_d, trial_f;
        auto try_block = [&](std::size_t lo, std::size_t hi, double factor, double add) {
            trial_d = d;
            for (std::size_t j = lo; j < hi; ++j)
                trial_d[j] = trial_d[j] * factor + add;
            detail::values_of(trial_d, trial_f);
            return ev.ratio(trial_f, ws);
        };

        for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
            for (std::size_t b = 0; b < B; ++b) {
                const std::size_t lo = blk_lo(b), hi = blk_lo(b + 1);
                double            mass = 0.0;
                for (std::size_t j = lo; j < hi; ++j)
                    mass += d[j];
                const double total = std::accumulate(d.begin(), d.end(), 0.0);

                // multiplicative line search, step halved on failure
                for (double step : {4.0, 2.0, std::sqrt(2.0), std::pow(2.0, 0.25)}) {
                    for (int it = 0; it < 16; ++it) {
                        bool moved = false;
                        for (double fac : {step, 1.0 / step}) {
                            double add = 0.0;
                            if (mass == 0.0) {
                                if (fac < 1.0)
                                    continue;
                                add = 1e-3 * fac * total / double(N);
                            }
                            const double val = try_block(lo, hi, mass == 0.0 ? 1.0 : fac, add);
                            if (val > V * (1.0 + 1e-13)) {
                                V = val;
                                d.swap(trial_d);
                                mass = 0.0;
                                for (std::size_t j = lo; j < hi; ++j)
                                    mass += d[j];
                                moved = true;
                                break;
                            }
                        }
                        if (!moved)
                            break;
                    }
                }
                if (mass > 0.0) {
                    const double val = try_block(lo, hi, 0.0, 0.0);
                    if (val > V * (1.0 + 1e-13)) {
                        V = val;
                        d.swap(trial_d);
                    }
                }
                if (std::isinf(V))
                    break;
            }
            if (std::isinf(V))
                break;
        }
        detail::values_of(d, f);
        best_val[r] = V;
        best_f[r]   = f;
    });

    std::size_t arg = 0;
    for (std::size_t r = 1; r < R; ++r)
        if (best_val[r] > best_val[arg])
            arg = r;
    out.estimate = best_val[arg];
    out.argmax   = normalise(best_f[arg]);
    return out;
}

////////////////////////////////////////////////////////////////////////////////
//
// refinement study
//
////////////////////////////////////////////////////////////////////////////////

enum class Growth
{
    bounded,
    diverging
};

inline std::string to_string(Growth g) { return g == Growth::bounded ? "bounded" : "diverging"; }

struct RefineStudy
{
    std::vector<std::size_t> grids;
    std::vector<double>      estimates;
    std::vector<double>      ratios; // estimates[i+1] / estimates[i]
    Growth                   classification = Growth::bounded;
};

inline constexpr double diverging_ratio = 1.5;

//
// Estimates on nested grids base * 4^k, each level warm-started from the
// previous argmax. "diverging" iff the last ratio reaches 1.5.
//
inline RefineStudy refine_study(const HardyProblem& pb, int levels, std::size_t base_grid = 16, const SearchOptions& opt = {})
{
    if (levels < 3)
        fail_validation("bad_levels", "refine_study needs at least 3 levels");
    RefineStudy                         st;
    std::optional<RearrangementProfile> prev;
    std::size_t                         g = base_grid;
    for (int l = 0; l < levels; ++l, g *= 4) {
        const auto bc = best_constant_lower(pb, g, opt, prev ? &*prev : nullptr);
        st.grids.push_back(g);
        st.estimates.push_back(bc.estimate);
        prev = bc.argmax;
        if (std::isinf(bc.estimate))
            break;
    }
    for (std::size_t i = 1; i < st.estimates.size(); ++i) {
        const double a = st.estimates[i - 1], b = st.estimates[i];
        st.ratios.push_back(a > 0.0 ? b / a : (b > 0.0 ? inf : 1.0));
    }
    const bool blown = std::isinf(st.estimates.back());
    st.classification = (blown || st.ratios.back() >= diverging_ratio) ? Growth::diverging : Growth::bounded;
    return st;
}

inline std::string refine_csv(const RefineStudy& st)
{
    std::ostringstream os;
    os.precision(17);
    os << "level,grid,estimate\n";
    for (std::size_t i = 0; i < st.estimates.size(); ++i)
        os << i << ',' << st.grids[i] << ',' << st.estimates[i] << '\n';
    return os.str();
}

////////////////////////////////////////////////////////////////////////////////
//
// critical exponents
//
////////////////////////////////////////////////////////////////////////////////

struct TheoremParams
{
    double n     = std::nan("");
    double alpha = std::nan("");
    double p     = std::nan("");
    double r     = std::nan("");
    double s     = std::nan("");
    double beta  = std::nan("");
};

struct CriticalExponent
{
    std::string kind;   // "q" or "gamma"
    double      value = 0.0;
    std::string branch; // branch(es) attaining the minimum, joined by '+'
    std::vector<std::pair<std::string, double>> candidates;
};

namespace detail {

inline CriticalExponent pick_min(std::string kind, std::vector<std::pair<std::string, double>> c)
{
    CriticalExponent out;
    out.kind  = std::move(kind);
    out.value = inf;
    for (const auto& [name, v] : c)
        out.value = std::min(out.value, v);
    for (const auto& [name, v] : c)
        if (v <= out.value * (1.0 + 1e-12)) {
            if (!out.branch.empty())
                out.branch += '+';
            out.branch += name;
        }
    out.candidates = std::move(c);
    return out;
}

inline void need(bool ok, const char* what)
{
    if (!ok)
        fail_validation("out_of_range", what);
}

inline void check_measure(const TheoremParams& p)
{
    need(p.n >= 2.0 && p.n == std::floor(p.n), "n must be an integer >= 2");
    need(p.alpha > p.n - 1.0 && p.alpha <= p.n, "alpha must lie in (n-1, n]");
}

} // namespace detail

// q = min{p alpha/(n-p), r alpha/(n-1)}
inline CriticalExponent first_order_q(const TheoremParams& t)
{
    detail::check_measure(t);
    detail::need(t.p > 1.0 && t.p < t.n, "first order needs 1 < p < n");
    detail::need(t.r > 1.0, "first order needs r > 1");
    return detail::pick_min("q", {{"gradient", t.p * t.alpha / (t.n - t.p)}, {"boundary", t.r * t.alpha / (t.n - 1.0)}});
}

// q = min{p alpha/(n-2p), s alpha/(n-1-s), r alpha/(n-1)}
inline CriticalExponent second_order_q(const TheoremParams& t)
{
    detail::check_measure(t);
    detail::need(t.n >= 3.0, "second order needs n >= 3");
    detail::need(t.p > 1.0 && t.p < t.n / 2.0, "second order part (i) needs 1 < p < n/2");
    detail::need(t.s > 1.0 && t.s < t.n - 1.0, "second order part (i) needs 1 < s < n-1");
    detail::need(t.r > 1.0, "second order needs r > 1");
    return detail::pick_min("q", {{"hessian", t.p * t.alpha / (t.n - 2.0 * t.p)},
                                  {"boundary_gradient", t.s * t.alpha / (t.n - 1.0 - t.s)},
                                  {"boundary", t.r * t.alpha / (t.n - 1.0)}});
}

// gamma = min{n', beta}, n' = n/(n-1)
inline CriticalExponent first_order_gamma(const TheoremParams& t)
{
    detail::need(t.n >= 2.0 && t.n == std::floor(t.n), "n must be an integer >= 2");
    detail::need(t.beta > 0.0, "beta must be positive");
    return detail::pick_min("gamma", {{"gradient", t.n / (t.n - 1.0)}, {"boundary", t.beta}});
}

// gamma = min{n/(n-2), beta}; borderline p = n/2, s = n-1: min{(n-1)/(n-2), beta}
inline CriticalExponent second_order_gamma(const TheoremParams& t, bool borderline = false)
{
    detail::need(t.n >= 3.0 && t.n == std::floor(t.n), "second order needs integer n >= 3");
    detail::need(t.beta > 0.0, "beta must be positive");
    const double g = borderline ? (t.n - 1.0) / (t.n - 2.0) : t.n / (t.n - 2.0);
    return detail::pick_min("gamma", {{"hessian", g}, {"boundary", t.beta}});
}

//
// Dispatch by theorem id: fried1/mainlor/fried8 (first-order q), fried4/L2
// (second-order q), fried3/fried9 (first-order gamma), fried5, fried6.
//
inline CriticalExponent admissibility(std::string_view theorem, const TheoremParams& t)
{
    if (theorem == "fried1" || theorem == "mainlor" || theorem == "fried8")
        return first_order_q(t);
    if (theorem == "fried4" || theorem == "L2")
        return second_order_q(t);
    if (theorem == "fried3" || theorem == "fried9")
        return first_order_gamma(t);
    if (theorem == "fried5")
        return second_order_gamma(t, false);
    if (theorem == "fried6")
        return second_order_gamma(t, true);
    fail_validation("unknown_theorem", "no critical exponent rule for theorem '" + std::string(theorem) + "'");
}

////////////////////////////////////////////////////////////////////////////////
//
// problem templates
//
////////////////////////////////////////////////////////////////////////////////

using ParamMap = std::map<std::string, double>;

namespace detail {

inline double param(const ParamMap& m, const std::string& key)
{
    const auto it = m.find(key);
    if (it == m.end())
        fail_validation("missing_parameter", "template needs parameter '" + key + "'");
    return it->second;
}

inline double param_or(const ParamMap& m, const std::string& key, double fallback)
{
    const auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

inline KernelTerm lower_term(double a, double b)
{
    KernelTerm k;
    k.a    = a;
    k.b    = b;
    k.kind = IntegralKind::lower;
    return k;
}

inline KernelTerm upper_term(double a, double b, double c)
{
    KernelTerm k;
    k.a    = a;
    k.b    = b;
    k.c    = c;
    k.kind = IntegralKind::upper;
    return k;
}

inline void add_log(KernelTerm& k, double theta, double scale, double e)
{
    k.theta = theta;
    k.scale = scale;
    k.e     = e;
}

} // namespace detail

inline const std::vector<std::string>& hardy_templates()
{
    static const std::vector<std::string> names{"red1bis", "red5",    "red2.1bis", "red2.3bis", "red2.5", "fried35",
                                                "fried37", "fried39", "fried30",   "fried32",   "fried34", "hardy"};
    return names;
}

//
// Builds a named template. Parameters: n, alpha, p, q, r, s, gamma and the
// lengths l (alias l1/l2), lsrc, ltgt. Source/target norms default to Lebesgue
// with the exponent natural for the template and may be overridden.
//
inline HardyProblem make_template(const std::string& name, const ParamMap& P, std::optional<NormSpec> X = {},
                                  std::optional<NormSpec> Y = {})
{
    using namespace detail;
    HardyProblem pb;
    pb.name = name;

    auto lebesgue = [&](const char* key) -> NormSpec { return Lebesgue{param(P, key)}; };
    auto length   = [&](const char* alias) {
        return param_or(P, alias, param_or(P, "l", 1.0));
    };

    if (name == "hardy") {
        // classical averaging operator t^{-1} ∫_0^t f
        pb.terms      = {lower_term(-1.0, 1.0)};
        pb.l_src      = param_or(P, "l", 1.0);
        pb.l_tgt      = pb.l_src;
        pb.source     = X ? *X : lebesgue("p");
        pb.target     = Y ? *Y : (P.count("q") ? lebesgue("q") : pb.source);
    } else if (name.rfind("red", 0) == 0) {
        const double n = param(P, "n"), al = param_or(P, "alpha", n);
        pb.l_src = param_or(P, "lsrc", 1.0);
        pb.l_tgt = param_or(P, "ltgt", 1.0);
        const char* src_key = "p";
        if (name == "red1bis") {
            pb.terms = {lower_term(-(n - 1.0) / al, n / al), upper_term(0.0, n / al, (n - 1.0) / n)};
        } else if (name == "red5" || name == "red2.5") {
            pb.terms = {lower_term(-(n - 1.0) / al, (n - 1.0) / al)};
            src_key  = P.count("r") ? "r" : "p";
        } else if (name == "red2.1bis") {
            pb.terms = {lower_term(-(n - 2.0) / al, n / al), upper_term(0.0, n / al, (n - 2.0) / n)};
        } else if (name == "red2.3bis") {
            pb.terms = {lower_term(-(n - 2.0) / al, (n - 1.0) / al), upper_term(0.0, (n - 1.0) / al, (n - 2.0) / (n - 1.0))};
            src_key  = P.count("s") ? "s" : "p";
        } else {
            fail_validation("unknown_template", "unknown template '" + name + "'");
        }
        pb.source = X ? *X : lebesgue(src_key);
        pb.target = Y ? *Y : lebesgue("q");
    } else if (name == "fried35" || name == "fried37" || name == "fried39") {
        const double n = param(P, "n"), al = param_or(P, "alpha", n);
        const double q = param(P, "q");
        const double m = name == "fried35" ? n : n - 1.0; // dimension of the carrier
        const double w = std::isinf(q) ? 0.0 : (al / m - 1.0) / q;
        const double l = name == "fried35" ? length("l1") : length("l2");
        pb.l_src = pb.l_tgt = l;
        pb.combine          = TermCombination::sum_of_norms;
        if (name == "fried39") {
            pb.terms  = {lower_term(-1.0 + w, 1.0)};
            pb.source = X ? *X : lebesgue("r");
        } else {
            pb.terms  = {lower_term(-(n - 2.0) / m + w, 1.0), upper_term(w, 1.0, (n - 2.0) / m)};
            pb.source = X ? *X : lebesgue(name == "fried35" ? "p" : "s");
        }
        pb.target = Y ? *Y : NormSpec(Lebesgue{q});
    } else if (name == "fried30" || name == "fried32" || name == "fried34") {
        const double n = param(P, "n"), al = param_or(P, "alpha", n);
        const double g = param(P, "gamma");
        const double m = name == "fried30" ? n : n - 1.0;
        const double l = name == "fried30" ? length("l1") : length("l2");
        pb.l_src = pb.l_tgt = l;
        pb.combine          = TermCombination::sum_of_norms;
        pb.target           = Y ? *Y : NormSpec(LInf{});
        if (name == "fried34") {
            auto k = lower_term(-1.0, 1.0);
            add_log(k, -1.0 / g, l, al / m);
            pb.terms  = {k};
            pb.source = X ? *X : NormSpec(LorentzZygmund{inf, inf, -1.0 / g, l, al / m});
        } else {
            auto lo = lower_term(-(n - 2.0) / m, 1.0);
            auto up = upper_term(0.0, 1.0, (n - 2.0) / m);
            add_log(lo, -1.0 / g, l, al / m);
            add_log(up, -1.0 / g, l, al / m);
            pb.terms  = {lo, up};
            pb.source = X ? *X : (name == "fried30" ? NormSpec(Lebesgue{n / 2.0}) : lebesgue("s"));
        }
    } else {
        fail_validation("unknown_template", "unknown template '" + name + "'");
    }
    validate(pb);
    return pb;
}

////////////////////////////////////////////////////////////////////////////////
//
// problem files
//
////////////////////////////////////////////////////////////////////////////////

struct HardyJob
{
    HardyProblem  problem;
    int           levels    = 3;
    std::size_t   base_grid = 16;
    SearchOptions search;
};

//
// key = value lines, '#' comments. Keys: template, n, alpha, p, q, r, s,
// gamma, l, l1, l2, lsrc, ltgt, X, Y (norm syntax), levels, grid, restarts,
// seed.
//
inline HardyJob parse_hardy_problem(std::istream& in)
{
    std::string             tmpl;
    ParamMap                P;
    std::optional<NormSpec> X, Y;
    HardyJob                job;
    std::string             line;
    int                     lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail_validation("bad_problem_file", "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "template")
            tmpl = val;
        else if (key == "X")
            X = parse_norm_spec(val);
        else if (key == "Y")
            Y = parse_norm_spec(val);
        else if (key == "levels")
            job.levels = int(detail::parse_num(val));
        else if (key == "grid")
            job.base_grid = std::size_t(detail::parse_num(val));
        else if (key == "restarts")
            job.search.restarts = int(detail::parse_num(val));
        else if (key == "seed")
            job.search.seed = uint64_t(detail::parse_num(val));
        else if (key == "n" || key == "alpha" || key == "p" || key == "q" || key == "r" || key == "s" || key == "gamma" ||
                 key == "l" || key == "l1" || key == "l2" || key == "lsrc" || key == "ltgt")
            P[key] = detail::parse_num(val);
        else
            fail_validation("bad_problem_file", "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (tmpl.empty())
        fail_validation("bad_problem_file", "problem file names no template");
    job.problem = make_template(tmpl, P, X, Y);
    return job;
}

inline HardyJob load_hardy_problem(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail_validation("file_not_found", "cannot open problem file " + path);
    return parse_hardy_problem(in);
}

} // namespace friedrichs
