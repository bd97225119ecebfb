#pragma once
//
// Domains: planar polygons with holes and 3-D voxel sets. Interior and
// boundary quadrature, and the first-hit map zeta(x, theta) along rays.
//

#include <friedrichs/ri_norms.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <variant>
#include <vector>

namespace friedrichs {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

template <std::size_t N>
double dot(const std::array<double, N>& a, const std::array<double, N>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        s += a[i] * b[i];
    return s;
}

template <std::size_t N>
double norm2(const std::array<double, N>& a)
{
    return std::sqrt(dot(a, a));
}

template <std::size_t N>
std::array<double, N> operator-(const std::array<double, N>& a, const std::array<double, N>& b)
{
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i)
        r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
std::array<double, N> operator+(const std::array<double, N>& a, const std::array<double, N>& b)
{
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i)
        r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
std::array<double, N> operator*(double s, const std::array<double, N>& a)
{
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i)
        r[i] = s * a[i];
    return r;
}

inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

template <std::size_t N>
struct RayHit
{
    bool                  hit   = false;
    std::array<double, N> point{};
    double                t     = 0.0;
    int                   patch = -1;  // edge (2-D) or exposed face (3-D)
    std::array<double, 2> local{};     // position inside the patch, in [0,1]
};

template <std::size_t N>
struct QuadratureNodes
{
    std::vector<std::array<double, N>> points;
    std::vector<double>                weights;
    double                             h = 0.0;
};

template <std::size_t N>
struct BoundarySample
{
    std::vector<std::array<double, N>> points;
    std::vector<double>                weights;
    std::vector<std::array<double, N>> normals;
    std::vector<int>                   patch;
    std::vector<std::size_t>           patch_first; // first sample of each patch
    std::vector<int>                   patch_side;  // samples per patch (2-D) or per patch side (3-D)

    std::size_t size() const noexcept { return points.size(); }
    double      total_weight() const { return pairwise_sum(weights); }

    // nearest sample inside the hit patch
    std::size_t lookup(const RayHit<N>& h) const
    {
        const std::size_t first = patch_first[std::size_t(h.patch)];
        const int         m     = patch_side[std::size_t(h.patch)];
        auto              idx   = [m](double u) { return std::clamp(int(std::floor(u * m)), 0, m - 1); };
        if constexpr (N == 2)
            return first + std::size_t(idx(h.local[0]));
        else
            return first + std::size_t(idx(h.local[0]) * m + idx(h.local[1]));
    }
};

struct DomainMeasure
{
    double volume  = 0.0;
    double surface = 0.0;
};

////////////////////////////////////////////////////////////////////////////////
//
// polygons
//
////////////////////////////////////////////////////////////////////////////////

class PolygonDomain2D
{
public:
    static constexpr std::size_t dim = 2;
    using Point                      = Vec2;

    PolygonDomain2D() = default;

    // Rings are reoriented to counterclockwise (outer) and clockwise (holes).
    explicit PolygonDomain2D(std::vector<Vec2> outer, std::vector<std::vector<Vec2>> holes = {})
    {
        rings_.push_back(std::move(outer));
        for (auto& h : holes)
            rings_.push_back(std::move(h));
        for (auto& r : rings_) {
            // drop a repeated closing vertex
            if (r.size() > 1 && r.front() == r.back())
                r.pop_back();
            if (r.size() < 3)
                fail_validation("degenerate_ring", "polygon rings need at least 3 vertices");
        }
        for (std::size_t i = 0; i < rings_.size(); ++i) {
            const double a = signed_area(rings_[i]);
            if (a == 0.0)
                fail_validation("degenerate_ring", "polygon ring has zero area");
            if ((i == 0) != (a > 0.0))
                std::reverse(rings_[i].begin(), rings_[i].end());
        }
        build_edges();
        check_simple();
        for (std::size_t i = 1; i < rings_.size(); ++i)
            for (const auto& v : rings_[i])
                if (!ring_contains(rings_[0], v))
                    fail_validation("hole_outside", "hole vertex lies outside the outer ring");
        area_ = 0.0;
        for (const auto& r : rings_)
            area_ += signed_area(r);
        if (!(area_ > 0.0))
            fail_validation("degenerate_ring", "polygon has nonpositive area");
        perimeter_ = 0.0;
        for (const auto& e : edges_)
            perimeter_ += e.length;
        lo_ = hi_ = rings_[0][0];
        for (const auto& v : rings_[0]) {
            lo_ = {std::min(lo_[0], v[0]), std::min(lo_[1], v[1])};
            hi_ = {std::max(hi_[0], v[0]), std::max(hi_[1], v[1])};
        }
        diameter_ = 0.0;
        const auto& o = rings_[0];
        for (std::size_t i = 0; i < o.size(); ++i)
            for (std::size_t j = i + 1; j < o.size(); ++j)
                diameter_ = std::max(diameter_, norm2(o[i] - o[j]));
    }

    std::size_t dimension() const noexcept { return 2; }
    double      area() const noexcept { return area_; }
    double      perimeter() const noexcept { return perimeter_; }
    double      diameter() const noexcept { return diameter_; }
    Vec2        bbox_min() const noexcept { return lo_; }
    Vec2        bbox_max() const noexcept { return hi_; }
    const std::vector<std::vector<Vec2>>& rings() const noexcept { return rings_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    struct Edge
    {
        Vec2   a, b;
        Vec2   normal; // outward unit normal
        double length;
        int    ring;
    };
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    // even-odd rule over all rings
    bool contains(const Vec2& x) const
    {
        bool in = false;
        for (const auto& e : edges_)
            if (crosses(e.a, e.b, x))
                in = !in;
        return in;
    }
    bool contains(const std::vector<double>& x) const { return x.size() == 2 && contains(Vec2{x[0], x[1]}); }

    // distance to the boundary
    double boundary_distance(const Vec2& x) const
    {
        double d = inf;
        for (const auto& e : edges_) {
            const Vec2   ab = e.b - e.a;
            const double s  = std::clamp(dot(x - e.a, ab) / dot(ab, ab), 0.0, 1.0);
            d               = std::min(d, norm2(x - (e.a + s * ab)));
        }
        return d;
    }

    PolygonDomain2D transformed(double lambda, Vec2 shift = {0.0, 0.0}) const
    {
        auto map = [&](const std::vector<Vec2>& r) {
            std::vector<Vec2> out;
            for (const auto& v : r)
                out.push_back(Vec2{lambda * v[0] + shift[0], lambda * v[1] + shift[1]});
            return out;
        };
        std::vector<std::vector<Vec2>> holes;
        for (std::size_t i = 1; i < rings_.size(); ++i)
            holes.push_back(map(rings_[i]));
        return PolygonDomain2D(map(rings_[0]), holes);
    }

    RayHit<2> ray_first_hit(const Vec2& x, const Vec2& theta) const
    {
        if (!contains(x))
            fail_validation("not_interior", "ray origin is not inside the domain");
        auto [h, tie] = cast(x, theta);
        if (tie) {
            // vertex tie: nudge the direction once
            const double c = std::cos(1e-9), s = std::sin(1e-9);
            const Vec2   th{c * theta[0] - s * theta[1], s * theta[0] + c * theta[1]};
            auto [h2, tie2] = cast(x, th);
            if (h2.hit) {
                // report the hit along the original ray, nearest point on the hit edge line
                h2.point = x + h2.t * theta;
                return h2;
            }
        }
        return h;
    }

private:
    static double signed_area(const std::vector<Vec2>& r)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i)
            s += cross(r[i], r[(i + 1) % r.size()]);
        return 0.5 * s;
    }

    // half-open crossing rule for a rightward horizontal ray from x
    static bool crosses(const Vec2& a, const Vec2& b, const Vec2& x)
    {
        if ((a[1] > x[1]) == (b[1] > x[1]))
            return false;
        const double xc = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
        return x[0] < xc;
    }

    static bool ring_contains(const std::vector<Vec2>& r, const Vec2& x)
    {
        bool in = false;
        for (std::size_t i = 0; i < r.size(); ++i)
            if (crosses(r[i], r[(i + 1) % r.size()], x))
                in = !in;
        return in;
    }

    void build_edges()
    {
        for (std::size_t k = 0; k < rings_.size(); ++k) {
            const auto& r = rings_[k];
            for (std::size_t i = 0; i < r.size(); ++i) {
                Edge e;
                e.a      = r[i];
                e.b      = r[(i + 1) % r.size()];
                e.length = norm2(e.b - e.a);
                if (!(e.length > 0.0))
                    fail_validation("degenerate_ring", "repeated polygon vertex");
                e.normal = {(e.b[1] - e.a[1]) / e.length, -(e.b[0] - e.a[0]) / e.length};
                e.ring   = int(k);
                edges_.push_back(e);
            }
        }
    }

    static int orient(const Vec2& a, const Vec2& b, const Vec2& c)
    {
        const double v = cross(b - a, c - a);
        return (v > 0.0) - (v < 0.0);
    }

    static bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p)
    {
        return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
               p[1] <= std::max(a[1], b[1]);
    }

    static bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
    {
        const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
        const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
        if (o1 != o2 && o3 != o4)
            return true;
        return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
               (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
    }

    // pairwise check of non-adjacent edges
    void check_simple() const
    {
        const std::size_t E = edges_.size();
        for (std::size_t i = 0; i < E; ++i) {
            for (std::size_t j = i + 1; j < E; ++j) {
                const auto& a = edges_[i];
                const auto& b = edges_[j];
                if (a.ring == b.ring) {
                    const std::size_t n = rings_[std::size_t(a.ring)].size();
                    if (n == 3)
                        continue;
                    const bool adjacent = a.b == b.a || b.b == a.a;
                    if (adjacent) {
                        // adjacent edges may only share their common vertex
                        const Vec2& shared = a.b == b.a ? a.b : a.a;
                        const Vec2& pa     = a.b == b.a ? a.a : a.b;
                        const Vec2& pb     = a.b == b.a ? b.b : b.a;
                        if (orient(shared, pa, pb) == 0 && dot(pa - shared, pb - shared) > 0.0)
                            fail_validation("self_intersection", "polygon ring folds back on itself");
                        continue;
                    }
                }
                if (segments_intersect(a.a, a.b, b.a, b.b))
                    fail_validation("self_intersection", "polygon rings intersect");
            }
        }
    }

    std::pair<RayHit<2>, bool> cast(const Vec2& x, const Vec2& theta) const
    {
        RayHit<2>    best;
        best.t       = inf;
        bool         tie  = false;
        const double tiny = 1e-12 * std::max(diameter_, 1e-300);
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const auto&  e     = edges_[k];
            const Vec2   ab    = e.b - e.a;
            const double denom = cross(theta, ab);
            if (std::abs(denom) <= 1e-12 * e.length)
                continue;
            const Vec2   ax = e.a - x;
            const double t  = cross(ax, ab) / denom;
            const double s  = cross(ax, theta) / denom;
            if (!(t > tiny) || s < -1e-12 || s > 1.0 + 1e-12)
                continue;
            if (t < best.t) {
                best.t        = t;
                best.hit      = true;
                best.patch    = int(k);
                best.local[0] = std::clamp(s, 0.0, 1.0);
                tie           = s < 1e-12 || s > 1.0 - 1e-12;
            }
        }
        if (best.hit) {
            const auto& e = edges_[std::size_t(best.patch)];
            best.point    = e.a + best.local[0] * (e.b - e.a);
        }
        return {best, tie};
    }

    std::vector<std::vector<Vec2>> rings_;
    std::vector<Edge>              edges_;
    double                         area_ = 0.0, perimeter_ = 0.0, diameter_ = 0.0;
    Vec2                           lo_{}, hi_{};
};

////////////////////////////////////////////////////////////////////////////////
//
// voxel sets
//
////////////////////////////////////////////////////////////////////////////////

using CellIndex = std::array<int, 3>;

class VoxelDomain3D
{
public:
    static constexpr std::size_t dim = 3;
    using Point                      = Vec3;

    VoxelDomain3D() = default;

    VoxelDomain3D(double h, std::vector<CellIndex> cells, Vec3 origin = {0.0, 0.0, 0.0}) : h_(h), origin_(origin)
    {
        if (!(h > 0.0) || !std::isfinite(h))
            fail_validation("bad_spacing", "voxel spacing must be positive");
        if (cells.empty())
            fail_validation("empty_domain", "voxel set is empty");
        std::sort(cells.begin(), cells.end());
        cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
        cells_ = std::move(cells);
        lo_ = hi_ = cells_[0];
        for (const auto& c : cells_)
            for (int d = 0; d < 3; ++d) {
                lo_[d] = std::min(lo_[d], c[d]);
                hi_[d] = std::max(hi_[d], c[d]);
            }
        for (int d = 0; d < 3; ++d)
            ext_[d] = hi_[d] - lo_[d] + 1;
        occ_.assign(std::size_t(ext_[0]) * ext_[1] * ext_[2], 0);
        for (const auto& c : cells_)
            occ_[linear(c)] = 1;

        // exposed faces in deterministic order
        face_id_.assign(occ_.size() * 6, -1);
        for (const auto& c : cells_)
            for (int f = 0; f < 6; ++f) {
                CellIndex n = c;
                n[f / 2] += (f % 2 == 0) ? -1 : 1;
                if (!occupied(n)) {
                    face_id_[linear(c) * 6 + std::size_t(f)] = int(faces_.size());
                    faces_.push_back({c, f});
                }
            }
        const Vec3 a = corner(lo_), b = corner({hi_[0] + 1, hi_[1] + 1, hi_[2] + 1});
        diameter_    = norm2(b - a);
    }

    std::size_t dimension() const noexcept { return 3; }
    double      spacing() const noexcept { return h_; }
    Vec3        origin() const noexcept { return origin_; }
    double      volume() const noexcept { return h_ * h_ * h_ * double(cells_.size()); }
    double      surface() const noexcept { return h_ * h_ * double(faces_.size()); }
    double      diameter() const noexcept { return diameter_; }
    const std::vector<CellIndex>& cells() const noexcept { return cells_; }
    std::size_t face_count() const noexcept { return faces_.size(); }
    Vec3        bbox_min() const { return corner(lo_); }
    Vec3        bbox_max() const { return corner({hi_[0] + 1, hi_[1] + 1, hi_[2] + 1}); }

    struct Face
    {
        CellIndex cell;
        int       dir; // 2*axis + (0: minus side, 1: plus side)
    };
    const std::vector<Face>& faces() const noexcept { return faces_; }

    Vec3 face_normal(const Face& f) const
    {
        Vec3 n{0.0, 0.0, 0.0};
        n[std::size_t(f.dir / 2)] = f.dir % 2 == 0 ? -1.0 : 1.0;
        return n;
    }

    bool occupied(const CellIndex& c) const
    {
        for (int d = 0; d < 3; ++d)
            if (c[d] < lo_[d] || c[d] > hi_[d])
                return false;
        return occ_[linear(c)] != 0;
    }

    CellIndex cell_of(const Vec3& x) const
    {
        CellIndex c;
        for (int d = 0; d < 3; ++d)
            c[d] = int(std::floor((x[d] - origin_[d]) / h_));
        return c;
    }

    bool contains(const Vec3& x) const { return occupied(cell_of(x)); }
    bool contains(const std::vector<double>& x) const { return x.size() == 3 && contains(Vec3{x[0], x[1], x[2]}); }

    Vec3 corner(const CellIndex& c) const
    {
        return {origin_[0] + h_ * c[0], origin_[1] + h_ * c[1], origin_[2] + h_ * c[2]};
    }

    VoxelDomain3D transformed(double lambda, Vec3 shift = {0.0, 0.0, 0.0}) const
    {
        return VoxelDomain3D(lambda * h_, cells_, lambda * origin_ + shift);
    }

    // distance to the boundary through the exposed faces
    double boundary_distance(const Vec3& x) const
    {
        double d = inf;
        for (const auto& f : faces_) {
            const int  axis = f.dir / 2;
            Vec3       lo   = corner(f.cell);
            Vec3       hi   = lo + Vec3{h_, h_, h_};
            const double plane = f.dir % 2 == 0 ? lo[std::size_t(axis)] : hi[std::size_t(axis)];
            lo[std::size_t(axis)] = hi[std::size_t(axis)] = plane;
            Vec3 q;
            for (int k = 0; k < 3; ++k)
                q[std::size_t(k)] = std::clamp(x[std::size_t(k)], lo[std::size_t(k)], hi[std::size_t(k)]);
            d = std::min(d, norm2(x - q));
        }
        return d;
    }

    // Amanatides–Woo traversal until the next cell is empty
    RayHit<3> ray_first_hit(const Vec3& x, const Vec3& theta) const
    {
        if (!contains(x))
            fail_validation("not_interior", "ray origin is not inside the domain");
        CellIndex c = cell_of(x);
        std::array<int, 3>    step{};
        std::array<double, 3> tmax{}, tdelta{};
        for (int d = 0; d < 3; ++d) {
            const double o = x[std::size_t(d)] - origin_[std::size_t(d)];
            if (theta[std::size_t(d)] > 0.0) {
                step[d]   = 1;
                tmax[d]   = ((c[d] + 1) * h_ - o) / theta[std::size_t(d)];
                tdelta[d] = h_ / theta[std::size_t(d)];
            } else if (theta[std::size_t(d)] < 0.0) {
                step[d]   = -1;
                tmax[d]   = (c[d] * h_ - o) / theta[std::size_t(d)];
                tdelta[d] = -h_ / theta[std::size_t(d)];
            } else {
                step[d]   = 0;
                tmax[d]   = inf;
                tdelta[d] = inf;
            }
        }
        RayHit<3> hit;
        const long limit = 4L * (ext_[0] + ext_[1] + ext_[2]) + 8;
        for (long it = 0; it < limit; ++it) {
            int axis = 0;
            if (tmax[1] < tmax[axis])
                axis = 1;
            if (tmax[2] < tmax[axis])
                axis = 2;
            if (std::isinf(tmax[axis]))
                break;
            CellIndex n = c;
            n[axis] += step[axis];
            if (!occupied(n)) {
                const int f   = 2 * axis + (step[axis] > 0 ? 1 : 0);
                hit.hit       = true;
                hit.t         = tmax[axis];
                hit.patch     = face_id_[linear(c) * 6 + std::size_t(f)];
                hit.point     = x + hit.t * theta;
                // snap the crossing coordinate onto the face plane
                hit.point[std::size_t(axis)] = origin_[std::size_t(axis)] + h_ * (c[axis] + (step[axis] > 0 ? 1 : 0));
                const Vec3 base = corner(c);
                int        k    = 0;
                for (int d = 0; d < 3; ++d)
                    if (d != axis)
                        hit.local[std::size_t(k++)] = std::clamp((hit.point[std::size_t(d)] - base[std::size_t(d)]) / h_, 0.0, 1.0);
                return hit;
            }
            c = n;
            tmax[axis] += tdelta[axis];
        }
        return hit;
    }

private:
    std::size_t linear(const CellIndex& c) const
    {
        return (std::size_t(c[0] - lo_[0]) * std::size_t(ext_[1]) + std::size_t(c[1] - lo_[1])) * std::size_t(ext_[2]) +
               std::size_t(c[2] - lo_[2]);
    }

    double                 h_ = 1.0;
    Vec3                   origin_{};
    std::vector<CellIndex> cells_;
    CellIndex              lo_{}, hi_{};
    std::array<int, 3>     ext_{};
    std::vector<char>      occ_;
    std::vector<int>       face_id_;
    std::vector<Face>      faces_;
    double                 diameter_ = 0.0;
};

using Domain = std::variant<PolygonDomain2D, VoxelDomain3D>;

inline std::size_t dimension(const Domain& d) { return d.index() == 0 ? 2 : 3; }

inline DomainMeasure measure_domain(const PolygonDomain2D& d) { return {d.area(), d.perimeter()}; }
inline DomainMeasure measure_domain(const VoxelDomain3D& d) { return {d.volume(), d.surface()}; }
inline DomainMeasure measure_domain(const Domain& d)
{
    return std::visit([](const auto& x) { return measure_domain(x); }, d);
}

inline double diameter(const Domain& d)
{
    return std::visit([](const auto& x) { return x.diameter(); }, d);
}

////////////////////////////////////////////////////////////////////////////////
//
// sampling
//
////////////////////////////////////////////////////////////////////////////////

//
// Cell-centre rule on the grid of spacing h anchored at the bounding-box
// minimum, keeping centres inside the domain; weight h^2.
//
inline QuadratureNodes<2> sample_interior(const PolygonDomain2D& d, double h)
{
    if (!(h > 0.0))
        fail_validation("bad_resolution", "interior spacing must be positive");
    QuadratureNodes<2> q;
    q.h          = h;
    const Vec2 lo = d.bbox_min(), hi = d.bbox_max();
    const long nx = long(std::ceil((hi[0] - lo[0]) / h - 1e-9));
    const long ny = long(std::ceil((hi[1] - lo[1]) / h - 1e-9));
    if (double(nx) * double(ny) > 5e7)
        fail_validation("bad_resolution", "interior grid too fine");
    for (long i = 0; i < nx; ++i)
        for (long j = 0; j < ny; ++j) {
            const Vec2 c{lo[0] + (double(i) + 0.5) * h, lo[1] + (double(j) + 0.5) * h};
            if (d.contains(c)) {
                q.points.push_back(c);
                q.weights.push_back(h * h);
            }
        }
    if (q.points.empty())
        fail_validation("resolution_too_coarse", "no interior node at this resolution");
    return q;
}

//
// Each voxel is split into s^3 subcells with s = round(voxel spacing / h).
//
inline QuadratureNodes<3> sample_interior(const VoxelDomain3D& d, double h)
{
    if (!(h > 0.0))
        fail_validation("bad_resolution", "interior spacing must be positive");
    const int s = std::max(1, int(std::lround(d.spacing() / h)));
    if (double(d.cells().size()) * s * s * s > 5e7)
        fail_validation("bad_resolution", "interior grid too fine");
    QuadratureNodes<3> q;
    const double       hs = d.spacing() / s;
    q.h                   = hs;
    for (const auto& c : d.cells()) {
        const Vec3 base = d.corner(c);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                for (int k = 0; k < s; ++k) {
                    q.points.push_back({base[0] + (i + 0.5) * hs, base[1] + (j + 0.5) * hs, base[2] + (k + 0.5) * hs});
                    q.weights.push_back(hs * hs * hs);
                }
    }
    return q;
}

struct BoundaryResolution
{
    int    per_edge = 0;   // minimum samples per edge (2-D) or per face side (3-D)
    double spacing  = 0.0; // target spacing; 0 disables
};

// arc-length-uniform midpoints per edge; weights sum to the perimeter
inline BoundarySample<2> sample_boundary(const PolygonDomain2D& d, BoundaryResolution res)
{
    if (res.per_edge < 1 && !(res.spacing > 0.0))
        fail_validation("bad_resolution", "boundary resolution must be positive");
    BoundarySample<2> b;
    for (std::size_t k = 0; k < d.edges().size(); ++k) {
        const auto& e = d.edges()[k];
        int         m = std::max(res.per_edge, 1);
        if (res.spacing > 0.0)
            m = std::max(m, int(std::ceil(e.length / res.spacing - 1e-9)));
        b.patch_first.push_back(b.points.size());
        b.patch_side.push_back(m);
        for (int i = 0; i < m; ++i) {
            const double s = (i + 0.5) / m;
            b.points.push_back(e.a + s * (e.b - e.a));
            b.weights.push_back(e.length / m);
            b.normals.push_back(e.normal);
            b.patch.push_back(int(k));
        }
    }
    return b;
}

// face centres of exposed faces, optionally split into m x m subfaces
inline BoundarySample<3> sample_boundary(const VoxelDomain3D& d, BoundaryResolution res)
{
    int m = std::max(res.per_edge, 1);
    if (res.spacing > 0.0)
        m = std::max(m, int(std::ceil(d.spacing() / res.spacing - 1e-9)));
    BoundarySample<3> b;
    const double      hs = d.spacing() / m;
    for (std::size_t k = 0; k < d.faces().size(); ++k) {
        const auto& f    = d.faces()[k];
        const int   axis = f.dir / 2;
        Vec3        base = d.corner(f.cell);
        if (f.dir % 2 == 1)
            base[std::size_t(axis)] += d.spacing();
        int u = -1, v = -1;
        for (int a = 0; a < 3; ++a)
            if (a != axis)
                (u < 0 ? u : v) = a;
        b.patch_first.push_back(b.points.size());
        b.patch_side.push_back(m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                Vec3 p                 = base;
                p[std::size_t(u)] += (i + 0.5) * hs;
                p[std::size_t(v)] += (j + 0.5) * hs;
                b.points.push_back(p);
                b.weights.push_back(hs * hs);
                b.normals.push_back(d.face_normal(f));
                b.patch.push_back(int(k));
            }
    }
    return b;
}

////////////////////////////////////////////////////////////////////////////////
//
// builders
//
////////////////////////////////////////////////////////////////////////////////

inline PolygonDomain2D unit_square()
{
    return PolygonDomain2D({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});
}

// unit square minus its top-right quarter
inline PolygonDomain2D l_shape()
{
    return PolygonDomain2D({{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.5}, {0.5, 0.5}, {0.5, 1.0}, {0.0, 1.0}});
}

// regular m-gon inscribed in the circle of radius R about the origin
inline PolygonDomain2D regular_polygon(int m, double R = 1.0)
{
    if (m < 3)
        fail_validation("bad_polygon", "regular polygon needs at least 3 vertices");
    std::vector<Vec2> v;
    for (int k = 0; k < m; ++k) {
        const double a = 2.0 * pi * k / m;
        v.push_back({R * std::cos(a), R * std::sin(a)});
    }
    return PolygonDomain2D(v);
}

//
// k square rooms of side a in a row, consecutive rooms joined by a passage
// of width eps and length gap centred on the rooms' midline.
//
inline PolygonDomain2D comb_domain(int k, double a, double eps, double gap = 0.5)
{
    if (k < 1 || !(a > 0.0) || !(gap > 0.0))
        fail_validation("bad_comb", "comb needs k >= 1, a > 0, gap > 0");
    if (k > 1 && !(eps > 0.0 && eps < a))
        fail_validation("bad_comb", "passage width must lie in (0, a)");
    const double      ylo = 0.5 * (a - eps), yhi = 0.5 * (a + eps);
    auto              x0  = [&](int i) { return i * (a + gap); };
    std::vector<Vec2> v;
    for (int i = 0; i < k; ++i) {
        v.push_back({x0(i), 0.0});
        v.push_back({x0(i) + a, 0.0});
        if (i + 1 < k) {
            v.push_back({x0(i) + a, ylo});
            v.push_back({x0(i + 1), ylo});
        }
    }
    for (int i = k - 1; i >= 0; --i) {
        v.push_back({x0(i) + a, a});
        v.push_back({x0(i), a});
        if (i > 0) {
            v.push_back({x0(i), yhi});
            v.push_back({x0(i - 1) + a, yhi});
        }
    }
    return PolygonDomain2D(v);
}

inline VoxelDomain3D voxel_cube(double side = 1.0, double h = 0.125)
{
    const int              m = std::max(1, int(std::lround(side / h)));
    std::vector<CellIndex> c;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                c.push_back({i, j, k});
    return VoxelDomain3D(side / m, c);
}

// voxels whose centres lie in the ball of radius R about the origin
inline VoxelDomain3D voxel_ball(double R = 1.0, double h = 0.1)
{
    if (!(R > 0.0) || !(h > 0.0))
        fail_validation("bad_ball", "ball radius and spacing must be positive");
    const int              m = int(std::ceil(R / h)) + 1;
    std::vector<CellIndex> c;
    for (int i = -m; i < m; ++i)
        for (int j = -m; j < m; ++j)
            for (int k = -m; k < m; ++k) {
                const double x = (i + 0.5) * h, y = (j + 0.5) * h, z = (k + 0.5) * h;
                if (x * x + y * y + z * z < R * R)
                    c.push_back({i, j, k});
            }
    return VoxelDomain3D(h, c);
}

////////////////////////////////////////////////////////////////////////////////
//
// files and builtins
//
////////////////////////////////////////////////////////////////////////////////

// one ring per blank-line separated block of "x y" lines; first ring outer
inline PolygonDomain2D parse_polygon(std::istream& in)
{
    std::vector<std::vector<Vec2>> rings(1);
    std::string                    line;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            if (!rings.back().empty())
                rings.emplace_back();
            continue;
        }
        std::istringstream ls(line);
        double             x, y;
        if (!(ls >> x >> y))
            fail_validation("bad_polygon_file", "expected 'x y' in polygon file");
        rings.back().push_back({x, y});
    }
    if (rings.back().empty())
        rings.pop_back();
    if (rings.empty())
        fail_validation("bad_polygon_file", "polygon file has no rings");
    std::vector<std::vector<Vec2>> holes(rings.begin() + 1, rings.end());
    return PolygonDomain2D(rings[0], holes);
}

// "h" header line, then "i j k" per occupied cell
inline VoxelDomain3D parse_voxels(std::istream& in)
{
    std::string line;
    double      h = 0.0;
    bool        have_h = false;
    std::vector<CellIndex> cells;
    while (std::getline(in, line)) {
        if (const auto p = line.find('#'); p != std::string::npos)
            line.erase(p);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(line);
        if (!have_h) {
            if (!(ls >> h))
                fail_validation("bad_voxel_file", "voxel file must start with the spacing h");
            have_h = true;
            continue;
        }
        CellIndex c;
        if (!(ls >> c[0] >> c[1] >> c[2]))
            fail_validation("bad_voxel_file", "expected 'i j k' in voxel file");
        cells.push_back(c);
    }
    if (!have_h)
        fail_validation("bad_voxel_file", "voxel file is empty");
    return VoxelDomain3D(h, cells);
}

namespace detail {

inline std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream   ss(s);
    std::string         item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_num(item));
    return out;
}

} // namespace detail

//
// builtin:square | disk512 | lshape | comb:k,a,eps[,gap] | cube[:h] | ball[:R,h],
// or a file path (".vox" is read as voxels, anything else as a polygon).
//
inline Domain load_domain(const std::string& spec)
{
    if (spec.rfind("builtin:", 0) == 0) {
        std::string       rest = spec.substr(8);
        const auto        colon = rest.find(':');
        const std::string name  = rest.substr(0, colon);
        const auto        args  = colon == std::string::npos ? std::vector<double>{} : detail::parse_list(rest.substr(colon + 1));
        if (name == "square")
            return unit_square();
        if (name == "disk512")
            return regular_polygon(512, 1.0);
        if (name == "lshape")
            return l_shape();
        if (name == "comb") {
            if (args.size() < 3 || args.size() > 4)
                fail_validation("bad_domain", "comb needs k,a,eps[,gap]");
            return comb_domain(int(args[0]), args[1], args[2], args.size() == 4 ? args[3] : 0.5);
        }
        if (name == "cube")
            return voxel_cube(1.0, args.empty() ? 0.125 : args[0]);
        if (name == "ball")
            return voxel_ball(args.size() > 0 ? args[0] : 1.0, args.size() > 1 ? args[1] : 0.1);
        fail_validation("bad_domain", "unknown builtin domain '" + name + "'");
    }
    std::ifstream in(spec);
    if (!in)
        fail_validation("file_not_found", "cannot open domain file " + spec);
    if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".vox")
        return parse_voxels(in);
    return parse_polygon(in);
}

} // namespace friedrichs
