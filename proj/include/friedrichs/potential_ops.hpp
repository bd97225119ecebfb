#pragma once
//
// Trial functions, Riesz potentials over interior quadrature, visibility
// integrals along the first-hit map, and the pointwise-estimate checkers.
//

#include <friedrichs/geometry.hpp>
#include <friedrichs/hajlasz_gradient.hpp>

#include <random>
#include <sstream>

namespace friedrichs {

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

template <std::size_t N>
double frobenius(const Mat<N>& m)
{
    double s = 0.0;
    for (const auto& r : m)
        for (double x : r)
            s += x * x;
    return std::sqrt(s);
}

template <std::size_t N>
Mat<N> sym_part(const Mat<N>& m)
{
    Mat<N> s{};
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            s[i][j] = 0.5 * (m[i][j] + m[j][i]);
    return s;
}

////////////////////////////////////////////////////////////////////////////////
//
// trial functions
//
////////////////////////////////////////////////////////////////////////////////

enum class TrialFamily
{
    constant,   // c
    polynomial, // c + b.x + x^T A x
    bump,       // amp exp(-s |x - x0|^2)
    distpow,    // |x - x0|^beta
    osc         // amp sin(k.x + phase)
};

//
// u(x) = base((x - shift) / scale) for one of the closed-form families.
//
template <std::size_t N>
struct TrialFunction
{
    using Point = std::array<double, N>;

    TrialFamily family = TrialFamily::constant;
    double      c      = 0.0;
    Point       b{};
    Mat<N>      A{};
    double      amp = 1.0, s = 1.0, beta = 1.0, phase = 0.0;
    Point       x0{};
    Point       k{};
    Point       shift{};
    double      scale = 1.0;

    static TrialFunction constant(double c)
    {
        TrialFunction u;
        u.c = c;
        return u;
    }
    static TrialFunction polynomial(double c, Point b, Mat<N> A)
    {
        TrialFunction u;
        u.family = TrialFamily::polynomial;
        u.c      = c;
        u.b      = b;
        u.A      = sym_part(A);
        return u;
    }
    static TrialFunction bump(double amp, double s, Point x0)
    {
        TrialFunction u;
        u.family = TrialFamily::bump;
        u.amp    = amp;
        u.s      = s;
        u.x0     = x0;
        return u;
    }
    static TrialFunction distpow(double beta, Point x0)
    {
        TrialFunction u;
        u.family = TrialFamily::distpow;
        u.beta   = beta;
        u.x0     = x0;
        return u;
    }
    static TrialFunction osc(double amp, double phase, Point k)
    {
        TrialFunction u;
        u.family = TrialFamily::osc;
        u.amp    = amp;
        u.phase  = phase;
        u.k      = k;
        return u;
    }

    // v(x) = u((x - shift') / lambda) composed with the current map
    TrialFunction mapped(double lambda, Point new_shift = {}) const
    {
        TrialFunction v = *this;
        v.scale         = scale * lambda;
        v.shift         = lambda * shift + new_shift;
        return v;
    }

    Point local(const Point& x) const { return (1.0 / scale) * (x - shift); }

    double value(const Point& x) const { return base_value(local(x)); }

    Point gradient(const Point& x) const { return (1.0 / scale) * base_gradient(local(x)); }

    Mat<N> hessian(const Point& x) const
    {
        Mat<N> h = base_hessian(local(x));
        for (auto& r : h)
            for (auto& e : r)
                e /= scale * scale;
        return h;
    }

private:
    double base_value(const Point& x) const
    {
        switch (family) {
        case TrialFamily::constant:
            return c;
        case TrialFamily::polynomial: {
            double v = c + dot(b, x);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j)
                    v += x[i] * A[i][j] * x[j];
            return v;
        }
        case TrialFamily::bump: {
            const Point d = x - x0;
            return amp * std::exp(-s * dot(d, d));
        }
        case TrialFamily::distpow:
            return std::pow(norm2(x - x0), beta);
        case TrialFamily::osc:
            return amp * std::sin(dot(k, x) + phase);
        }
        return 0.0;
    }

    Point base_gradient(const Point& x) const
    {
        Point g{};
        switch (family) {
        case TrialFamily::constant:
            break;
        case TrialFamily::polynomial:
            for (std::size_t i = 0; i < N; ++i) {
                g[i] = b[i];
                for (std::size_t j = 0; j < N; ++j)
                    g[i] += 2.0 * A[i][j] * x[j];
            }
            break;
        case TrialFamily::bump: {
            const Point  d = x - x0;
            const double f = amp * std::exp(-s * dot(d, d));
            g              = (-2.0 * s * f) * d;
            break;
        }
        case TrialFamily::distpow: {
            const Point  d = x - x0;
            const double r = norm2(d);
            if (r > 0.0)
                g = (beta * std::pow(r, beta - 2.0)) * d;
            break;
        }
        case TrialFamily::osc:
            g = (amp * std::cos(dot(k, x) + phase)) * k;
            break;
        }
        return g;
    }

    Mat<N> base_hessian(const Point& x) const
    {
        Mat<N> h{};
        switch (family) {
        case TrialFamily::constant:
            break;
        case TrialFamily::polynomial:
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j)
                    h[i][j] = 2.0 * A[i][j];
            break;
        case TrialFamily::bump: {
            const Point  d = x - x0;
            const double f = amp * std::exp(-s * dot(d, d));
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j)
                    h[i][j] = f * (4.0 * s * s * d[i] * d[j] - (i == j ? 2.0 * s : 0.0));
            break;
        }
        case TrialFamily::distpow: {
            const Point  d = x - x0;
            const double r = norm2(d);
            if (r > 0.0)
                for (std::size_t i = 0; i < N; ++i)
                    for (std::size_t j = 0; j < N; ++j)
                        h[i][j] = beta * std::pow(r, beta - 2.0) * (i == j ? 1.0 : 0.0) +
                                  beta * (beta - 2.0) * std::pow(r, beta - 4.0) * d[i] * d[j];
            break;
        }
        case TrialFamily::osc: {
            const double f = -amp * std::sin(dot(k, x) + phase);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j)
                    h[i][j] = f * k[i] * k[j];
            break;
        }
        }
        return h;
    }
};

//
// Vector field u(x) = b + W x + e phi(x) with phi scalar. Its symmetric
// gradient is sym(W + e grad(phi)^T).
//
template <std::size_t N>
struct VectorField
{
    using Point = std::array<double, N>;

    Point                              b{};
    Mat<N>                             W{};
    Point                              e{};
    std::optional<TrialFunction<N>>    phi;

    static VectorField affine(Point b, Mat<N> W)
    {
        VectorField v;
        v.b = b;
        v.W = W;
        return v;
    }

    Point value(const Point& x) const
    {
        Point u = b;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                u[i] += W[i][j] * x[j];
        if (phi)
            u = u + phi->value(x) * e;
        return u;
    }

    Mat<N> jacobian(const Point& x) const
    {
        Mat<N> J = W;
        if (phi) {
            const Point g = phi->gradient(x);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j)
                    J[i][j] += e[i] * g[j];
        }
        return J;
    }

    Mat<N> sym_gradient(const Point& x) const { return sym_part(jacobian(x)); }

    VectorField mapped(double lambda, Point shift = {}) const
    {
        // u(x) -> u((x - shift) / lambda)
        VectorField v = *this;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                v.W[i][j] = W[i][j] / lambda;
                v.b[i] -= W[i][j] * shift[j] / lambda;
            }
        if (phi)
            v.phi = phi->mapped(lambda, shift);
        return v;
    }
};

template <std::size_t N>
using Trial = std::variant<TrialFunction<N>, VectorField<N>>;

//
// Largest relative discrepancy between closed-form and central-difference
// derivatives at the given points.
//
template <std::size_t N>
double fd_check(const TrialFunction<N>& u, const std::vector<std::array<double, N>>& pts, double step = 1e-4)
{
    double worst = 0.0;
    auto   rel   = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3}); };
    for (const auto& x : pts) {
        const auto g = u.gradient(x);
        const auto H = u.hessian(x);
        for (std::size_t i = 0; i < N; ++i) {
            auto xp = x, xm = x;
            xp[i] += step;
            xm[i] -= step;
            worst        = std::max(worst, rel(g[i], (u.value(xp) - u.value(xm)) / (2.0 * step)));
            const auto gp = u.gradient(xp), gm = u.gradient(xm);
            for (std::size_t j = 0; j < N; ++j)
                worst = std::max(worst, rel(H[j][i], (gp[j] - gm[j]) / (2.0 * step)));
        }
    }
    return worst;
}

namespace detail {

inline std::vector<double> split_numbers(const std::string& s)
{
    std::vector<double> out;
    std::stringstream   ss(s);
    std::string         item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_num(item));
    return out;
}

template <std::size_t N>
std::array<double, N> take(const std::vector<double>& v, std::size_t& pos)
{
    std::array<double, N> a{};
    for (std::size_t i = 0; i < N; ++i)
        a[i] = v.at(pos++);
    return a;
}

} // namespace detail

//
// const:c | poly:c,b(N),A(NxN) | bump:amp,s,x0(N) | distpow:beta,x0(N) |
// osc:amp,phase,k(N) | affine:b(N),W(NxN)
//
template <std::size_t N>
Trial<N> parse_trial(const std::string& text)
{
    const auto        colon  = text.find(':');
    const std::string family = text.substr(0, colon);
    const auto        v      = colon == std::string::npos ? std::vector<double>{} : detail::split_numbers(text.substr(colon + 1));
    auto              need   = [&](std::size_t n) {
        if (v.size() != n)
            fail_validation("bad_trial", "trial '" + family + "' expects " + std::to_string(n) + " numbers");
    };
    std::size_t pos = 0;
    auto        mat = [&]() {
        Mat<N> m{};
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                m[i][j] = v[pos++];
        return m;
    };
    if (family == "const") {
        need(1);
        return TrialFunction<N>::constant(v[0]);
    }
    if (family == "poly") {
        need(1 + N + N * N);
        pos          = 1;
        const auto b = detail::take<N>(v, pos);
        return TrialFunction<N>::polynomial(v[0], b, mat());
    }
    if (family == "bump") {
        need(2 + N);
        pos = 2;
        if (!(v[1] > 0.0))
            fail_validation("bad_trial", "bump width must be positive");
        return TrialFunction<N>::bump(v[0], v[1], detail::take<N>(v, pos));
    }
    if (family == "distpow") {
        need(1 + N);
        pos = 1;
        if (!(v[0] > 0.0))
            fail_validation("bad_trial", "distance power must be positive");
        return TrialFunction<N>::distpow(v[0], detail::take<N>(v, pos));
    }
    if (family == "osc") {
        need(2 + N);
        pos = 2;
        return TrialFunction<N>::osc(v[0], v[1], detail::take<N>(v, pos));
    }
    if (family == "affine") {
        need(N + N * N);
        const auto b = detail::take<N>(v, pos);
        return VectorField<N>::affine(b, mat());
    }
    fail_validation("bad_trial", "unknown trial family '" + family + "'");
}

////////////////////////////////////////////////////////////////////////////////
//
// Riesz potentials
//
////////////////////////////////////////////////////////////////////////////////

namespace detail {

// surface area of the unit sphere in R^n
inline double sphere_area(std::size_t n) { return n == 2 ? 2.0 * pi : 4.0 * pi; }

//
// Integral of |x - y|^{-beta} over the cube with centre c and side h. Far
// cubes use the midpoint rule; near cubes are bisected, and at the finest
// level the cube containing x is replaced by the ball of equal volume.
//
template <std::size_t N>
double cell_kernel_integral(const std::array<double, N>& x, const std::array<double, N>& c, double h, double beta, int depth)
{
    const double vol  = std::pow(h, double(N));
    const double dist = norm2(x - c);
    if (beta == 0.0)
        return vol;
    if (dist > 1.5 * h)
        return vol * std::pow(dist, -beta);
    double inside = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        inside = std::max(inside, std::abs(x[i] - c[i]));
    if (depth == 0) {
        if (inside < 0.5 * h) {
            const double om = sphere_area(N);
            const double r  = std::pow(double(N) * vol / om, 1.0 / double(N));
            return om * std::pow(r, double(N) - beta) / (double(N) - beta);
        }
        return vol * std::pow(std::max(dist, 0.5 * h), -beta);
    }
    double       s  = 0.0;
    const double hh = 0.5 * h;
    for (unsigned m = 0; m < (1u << N); ++m) {
        std::array<double, N> cc = c;
        for (std::size_t i = 0; i < N; ++i)
            cc[i] += ((m >> i) & 1u ? 0.25 : -0.25) * h;
        s += cell_kernel_integral(x, cc, hh, beta, depth - 1);
    }
    return s;
}

inline constexpr int near_field_depth = 6;

} // namespace detail

//
// sum_j w_j rho_j |x - y_j|^{-beta} with the near field integrated per cell.
// Nodes are cell centres of spacing nodes.h; cell volume w_j = h^n.
//
template <std::size_t N>
double riesz_at(const QuadratureNodes<N>& nodes, const std::vector<double>& density, double beta, const std::array<double, N>& x)
{
    const double h   = nodes.h;
    double       sum = 0.0;
    for (std::size_t j = 0; j < nodes.points.size(); ++j) {
        if (density[j] == 0.0)
            continue;
        const double d = norm2(x - nodes.points[j]);
        if (d > 1.5 * h)
            sum += nodes.weights[j] * density[j] * std::pow(d, -beta);
        else
            sum += density[j] * detail::cell_kernel_integral(x, nodes.points[j], h, beta, detail::near_field_depth);
    }
    return sum;
}

template <std::size_t N>
std::vector<double> riesz_potential(const QuadratureNodes<N>& nodes, const std::vector<double>& density, double beta,
                                    const std::vector<std::array<double, N>>& eval, unsigned threads = 0)
{
    if (density.size() != nodes.points.size())
        fail_validation("size_mismatch", "density must have one value per node");
    if (!(beta >= 0.0 && beta < double(N)))
        fail_validation("bad_exponent", "kernel exponent must lie in [0, n)");
    std::vector<double> out(eval.size());
    parallel_for(eval.size(), resolve_threads(threads), [&](std::size_t i) { out[i] = riesz_at(nodes, density, beta, eval[i]); });
    return out;
}

////////////////////////////////////////////////////////////////////////////////
//
// visibility integrals
//
////////////////////////////////////////////////////////////////////////////////

template <std::size_t N>
std::vector<std::array<double, N>> sphere_directions(int m)
{
    if (m < 1)
        fail_validation("bad_resolution", "angular resolution must be positive");
    std::vector<std::array<double, N>> d(static_cast<std::size_t>(m));
    if constexpr (N == 2) {
        for (int k = 0; k < m; ++k) {
            const double a = 2.0 * pi * (k + 0.5) / m;
            d[std::size_t(k)] = {std::cos(a), std::sin(a)};
        }
    } else {
        // Fibonacci sphere
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < m; ++k) {
            const double z = 1.0 - (2.0 * k + 1.0) / m;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden * k;
            d[std::size_t(k)] = {r * std::cos(a), r * std::sin(a), z};
        }
    }
    return d;
}

//
// Uniform rule over the sphere of |phi(zeta(x, theta))|, phi looked up at
// the nearest boundary sample of the hit patch; misses contribute 0.
//
template <typename D, std::size_t N = D::dim>
double visibility_integral(const D& d, const BoundarySample<N>& bs, const std::vector<double>& phi, const std::array<double, N>& x,
                           const std::vector<std::array<double, N>>& dirs)
{
    if (phi.size() != bs.size())
        fail_validation("size_mismatch", "trace must have one value per boundary sample");
    double s = 0.0;
    for (const auto& th : dirs) {
        const auto h = d.ray_first_hit(x, th);
        if (h.hit)
            s += std::abs(phi[bs.lookup(h)]);
    }
    return s * detail::sphere_area(N) / double(dirs.size());
}

template <typename D, std::size_t N = D::dim>
double visibility_integral(const D& d, const BoundarySample<N>& bs, const std::vector<double>& phi, const std::array<double, N>& x,
                           int m)
{
    return visibility_integral(d, bs, phi, x, sphere_directions<N>(m));
}

struct MixedBudget
{
    double max_work = 5e7; // interior nodes x directions
};

//
// Visibility integral of g at every interior node, then a Riesz sum with
// exponent n-1. The inner field does not depend on the evaluation points.
//
template <typename D, std::size_t N = D::dim>
std::vector<double> visibility_field(const D& d, const QuadratureNodes<N>& nodes, const BoundarySample<N>& bs,
                                     const std::vector<double>& g, int m, const MixedBudget& budget = {}, unsigned threads = 0)
{
    if (double(nodes.points.size()) * double(m) > budget.max_work)
        fail_validation("budget_exceeded", "node x direction count exceeds the mixed-term budget");
    const auto          dirs = sphere_directions<N>(m);
    std::vector<double> v(nodes.points.size());
    parallel_for(v.size(), resolve_threads(threads),
                 [&](std::size_t i) { v[i] = visibility_integral(d, bs, g, nodes.points[i], dirs); });
    return v;
}

template <typename D, std::size_t N = D::dim>
std::vector<double> second_order_mixed(const D& d, const QuadratureNodes<N>& nodes, const BoundarySample<N>& bs,
                                       const std::vector<double>& g, const std::vector<std::array<double, N>>& eval, int m,
                                       const MixedBudget& budget = {}, unsigned threads = 0)
{
    if constexpr (N != 3)
        fail_validation("bad_dimension", "the mixed term is defined for n = 3 domains");
    const auto field = visibility_field(d, nodes, bs, g, m, budget, threads);
    return riesz_potential(nodes, field, double(N) - 1.0, eval, threads);
}

////////////////////////////////////////////////////////////////////////////////
//
// pointwise checks
//
////////////////////////////////////////////////////////////////////////////////

enum class PointwiseOrder
{
    first,
    second_u,
    second_grad,
    symmetric
};

inline PointwiseOrder parse_order(std::string_view s)
{
    if (s == "first")
        return PointwiseOrder::first;
    if (s == "second-u")
        return PointwiseOrder::second_u;
    if (s == "second-grad")
        return PointwiseOrder::second_grad;
    if (s == "symmetric")
        return PointwiseOrder::symmetric;
    fail_validation("bad_order", "order must be first, second-u, second-grad or symmetric");
}

inline std::string to_string(PointwiseOrder o)
{
    switch (o) {
    case PointwiseOrder::first:
        return "first";
    case PointwiseOrder::second_u:
        return "second-u";
    case PointwiseOrder::second_grad:
        return "second-grad";
    case PointwiseOrder::symmetric:
        return "symmetric";
    }
    return "";
}

struct PointwiseOptions
{
    double      h            = 0.0; // interior spacing; 0: diameter / 64 (2-D), / 16 (3-D)
    int         mdirs        = 0;   // angular directions; 0: 256
    double      eval_spacing = 0.0; // evaluation lattice; 0: diameter / 16
    double      skip         = 0.0; // boundary exclusion; 0: half the lattice spacing
    unsigned    threads      = 0;
    MixedBudget budget{};
};

template <std::size_t N>
struct PointwiseResult
{
    double                c_emp     = 0.0;
    std::size_t           evaluated = 0;
    std::size_t           degenerate = 0; // LHS = RHS = 0
    std::size_t           violations = 0; // RHS = 0 < LHS
    std::array<double, N> argmax{};
    double                lhs = 0.0, rhs = 0.0;
    double                h = 0.0;
    int                   mdirs = 0;
};

// evaluation lattice: cell centres anchored at the bounding-box minimum
template <typename D, std::size_t N = D::dim>
std::vector<std::array<double, N>> evaluation_lattice(const D& d, double spacing, double skip)
{
    std::vector<std::array<double, N>> pts;
    const auto                         lo = d.bbox_min(), hi = d.bbox_max();
    std::array<long, N>                cnt{};
    for (std::size_t i = 0; i < N; ++i)
        cnt[i] = long(std::ceil((hi[i] - lo[i]) / spacing - 1e-9));
    std::array<long, N> idx{};
    while (true) {
        std::array<double, N> x;
        for (std::size_t i = 0; i < N; ++i)
            x[i] = lo[i] + (double(idx[i]) + 0.5) * spacing;
        if (d.contains(x) && d.boundary_distance(x) >= skip)
            pts.push_back(x);
        std::size_t k = 0;
        while (k < N && ++idx[k] == cnt[k])
            idx[k++] = 0;
        if (k == N)
            break;
    }
    return pts;
}

template <typename D, std::size_t N = D::dim>
PointwiseResult<N> check_pointwise(PointwiseOrder order, const Trial<N>& u, const D& d, const PointwiseOptions& opt = {})
{
    const double diam = d.diameter();
    const double h    = opt.h > 0.0 ? opt.h : diam / (N == 2 ? 64.0 : 16.0);
    const int    m    = opt.mdirs > 0 ? opt.mdirs : 256;
    const double es   = opt.eval_spacing > 0.0 ? opt.eval_spacing : diam / 16.0;
    const double skip = opt.skip > 0.0 ? opt.skip : 0.5 * es;

    const bool vector = std::holds_alternative<VectorField<N>>(u);
    if ((order == PointwiseOrder::symmetric) != vector)
        fail_validation("class_violation", order == PointwiseOrder::symmetric ? "symmetric check needs a vector field"
                                                                              : "this check needs a scalar trial function");
    if (order == PointwiseOrder::second_u && N < 3)
        fail_validation("bad_dimension", "the second-order estimate for u needs n >= 3");

    const auto nodes = sample_interior(d, h);
    const auto bs    = sample_boundary(d, BoundaryResolution{1, h});
    const auto eval  = evaluation_lattice(d, es, skip);
    if (eval.empty())
        fail_validation("resolution_too_coarse", "no evaluation point away from the boundary");
    const auto dirs = sphere_directions<N>(m);

    std::vector<double> lhs(eval.size()), density(nodes.points.size()), trace(bs.size());
    double              beta = double(N) - 1.0;
    std::vector<double> g; // Hajlasz gradient of the trace

    if (vector) {
        const auto& v = std::get<VectorField<N>>(u);
        for (std::size_t i = 0; i < eval.size(); ++i)
            lhs[i] = norm2(v.value(eval[i]));
        for (std::size_t j = 0; j < density.size(); ++j)
            density[j] = frobenius(v.sym_gradient(nodes.points[j]));
        for (std::size_t j = 0; j < trace.size(); ++j)
            trace[j] = norm2(v.value(bs.points[j]));
    } else {
        const auto& f = std::get<TrialFunction<N>>(u);
        for (std::size_t j = 0; j < trace.size(); ++j)
            trace[j] = f.value(bs.points[j]);
        switch (order) {
        case PointwiseOrder::first:
            for (std::size_t i = 0; i < eval.size(); ++i)
                lhs[i] = std::abs(f.value(eval[i]));
            for (std::size_t j = 0; j < density.size(); ++j)
                density[j] = norm2(f.gradient(nodes.points[j]));
            break;
        case PointwiseOrder::second_u:
            beta = double(N) - 2.0;
            for (std::size_t i = 0; i < eval.size(); ++i)
                lhs[i] = std::abs(f.value(eval[i]));
            for (std::size_t j = 0; j < density.size(); ++j)
                density[j] = frobenius(f.hessian(nodes.points[j]));
            break;
        case PointwiseOrder::second_grad:
            for (std::size_t i = 0; i < eval.size(); ++i)
                lhs[i] = norm2(f.gradient(eval[i]));
            for (std::size_t j = 0; j < density.size(); ++j)
                density[j] = frobenius(f.hessian(nodes.points[j]));
            break;
        default:
            break;
        }
        if (order != PointwiseOrder::first)
            g = minimal_upper_gradient(BoundaryTrace<N>(bs, trace), GradientObjective::sup, LpBudget{2000, opt.threads}).g;
    }

    std::vector<double> rhs = riesz_potential(nodes, density, beta, eval, opt.threads);
    std::vector<double> mixed;
    if (order == PointwiseOrder::second_u) {
        const auto field = visibility_field(d, nodes, bs, g, m, opt.budget, opt.threads);
        mixed            = riesz_potential(nodes, field, double(N) - 1.0, eval, opt.threads);
    }
    const std::vector<double>& boundary_term = order == PointwiseOrder::second_grad ? g : trace;
    parallel_for(eval.size(), resolve_threads(opt.threads), [&](std::size_t i) {
        rhs[i] += visibility_integral(d, bs, boundary_term, eval[i], dirs);
        if (order == PointwiseOrder::second_u)
            rhs[i] += mixed[i];
    });

    PointwiseResult<N> res;
    res.h     = h;
    res.mdirs = m;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        if (rhs[i] == 0.0) {
            if (lhs[i] == 0.0)
                ++res.degenerate;
            else
                ++res.violations;
            continue;
        }
        ++res.evaluated;
        const double r = lhs[i] / rhs[i];
        if (r > res.c_emp) {
            res.c_emp  = r;
            res.argmax = eval[i];
            res.lhs    = lhs[i];
            res.rhs    = rhs[i];
        }
    }
    return res;
}

} // namespace friedrichs
