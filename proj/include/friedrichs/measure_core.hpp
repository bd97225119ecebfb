#pragma once
//
// Discrete measure spaces, sampled functions and decreasing rearrangements.
//
// A SampledMeasureSpace is a finite family of weighted atoms standing in for a
// non-atomic measure space; refining the atoms is how accuracy is controlled.
// All norm evaluators work on the RearrangementProfile of a function, i.e. on
// its decreasing rearrangement as a step function on (0, total mass).
//

#include <friedrichs/common.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace friedrichs {

struct Atom
{
    std::string         id;
    double              weight = 0.0;
    std::vector<double> position; // empty when the space carries no geometry
};

class SampledMeasureSpace
{
public:
    SampledMeasureSpace() = default;

    explicit SampledMeasureSpace(std::vector<Atom> atoms)
        : atoms_(std::move(atoms))
    {
        std::vector<double> w;
        w.reserve(atoms_.size());
        for (const auto& a : atoms_) {
            if (!(a.weight >= 0.0) || !std::isfinite(a.weight))
                fail_validation("invalid_weight", "atom '" + a.id + "' has a negative or non-finite weight");
            w.push_back(a.weight);
        }
        total_mass_ = pairwise_sum(w);
        if (!atoms_.empty()) {
            const auto d = atoms_.front().position.size();
            for (const auto& a : atoms_)
                if (a.position.size() != d)
                    fail_validation("inconsistent_dimension", "atoms carry positions of different dimensions");
        }
    }

    // Convenience constructor for position-free spaces.
    static SampledMeasureSpace from_weights(std::span<const double> weights)
    {
        std::vector<Atom> atoms;
        atoms.reserve(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i)
            atoms.push_back({std::to_string(i), weights[i], {}});
        return SampledMeasureSpace(std::move(atoms));
    }

    static SampledMeasureSpace from_points(const std::vector<std::vector<double>>& points,
                                           std::span<const double>                 weights)
    {
        if (points.size() != weights.size())
            fail_validation("size_mismatch", "points and weights differ in length");
        std::vector<Atom> atoms;
        atoms.reserve(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i)
            atoms.push_back({std::to_string(i), weights[i], points[i]});
        return SampledMeasureSpace(std::move(atoms));
    }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t              size() const noexcept { return atoms_.size(); }
    double                   total_mass() const noexcept { return total_mass_; }
    bool                     has_positions() const noexcept { return !atoms_.empty() && !atoms_.front().position.empty(); }
    std::size_t              dimension() const noexcept { return atoms_.empty() ? 0 : atoms_.front().position.size(); }

    std::vector<double> weights() const
    {
        std::vector<double> w(atoms_.size());
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            w[i] = atoms_[i].weight;
        return w;
    }

private:
    std::vector<Atom> atoms_;
    double            total_mass_ = 0.0;
};

class SampledFunction
{
public:
    SampledFunction(std::shared_ptr<const SampledMeasureSpace> space, std::vector<double> values)
        : space_(std::move(space)), values_(std::move(values))
    {
        if (!space_)
            fail_validation("missing_space", "sampled function without a measure space");
        if (values_.size() != space_->size())
            fail_validation("size_mismatch", "value count " + std::to_string(values_.size()) +
                                                 " differs from atom count " + std::to_string(space_->size()));
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                fail_validation("non_finite_value", "value at atom '" + space_->atoms()[i].id + "' is not finite");
    }

    const SampledMeasureSpace&  space() const noexcept { return *space_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::shared_ptr<const SampledMeasureSpace> space_;
    std::vector<double>                        values_;
};

//
// Nonincreasing, nonnegative step function: value values[i] on
// [breaks[i], breaks[i+1]), zero beyond breaks.back().
//
class RearrangementProfile
{
public:
    RearrangementProfile() : breaks_{0.0} {}

    RearrangementProfile(std::vector<double> breaks, std::vector<double> values)
        : breaks_(std::move(breaks)), values_(std::move(values))
    {
        if (breaks_.empty() || breaks_.front() != 0.0)
            fail_validation("bad_profile", "profile breakpoints must start at 0");
        if (breaks_.size() != values_.size() + 1)
            fail_validation("bad_profile", "profile needs exactly one more breakpoint than values");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(breaks_[i + 1] > breaks_[i]) || !std::isfinite(breaks_[i + 1]))
                fail_validation("bad_profile", "profile breakpoints must be finite and strictly increasing");
            if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
                fail_validation("bad_profile", "profile values must be finite and nonnegative");
            if (i > 0 && values_[i] > values_[i - 1])
                fail_validation("bad_profile", "profile values must be nonincreasing");
        }
    }

    // Single step c on [0, length).
    static RearrangementProfile constant(double c, double length)
    {
        return RearrangementProfile({0.0, length}, {c});
    }

    const std::vector<double>& breaks() const noexcept { return breaks_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t                size() const noexcept { return values_.size(); }
    double                     domain_length() const noexcept { return breaks_.back(); }
    bool                       is_zero() const noexcept
    {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    }

    double eval(double t) const
    {
        if (t < 0.0 || std::isnan(t))
            fail_validation("negative_argument", "profile evaluated at negative t");
        if (t >= domain_length())
            return 0.0;
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
        return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
    }

    RearrangementProfile scaled(double c) const
    {
        auto v = values_;
        for (auto& x : v)
            x *= std::abs(c);
        if (c == 0.0)
            return RearrangementProfile({0.0, domain_length()}, {0.0});
        return RearrangementProfile(breaks_, std::move(v));
    }

    friend bool operator==(const RearrangementProfile&, const RearrangementProfile&) = default;

private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

//
// Core rearrangement routine on raw (weight, value) arrays. Equal values are
// merged into one step; zero-weight atoms are dropped.
//
inline RearrangementProfile rearrange(std::span<const double> weights, std::span<const double> values)
{
    if (weights.size() != values.size())
        fail_validation("size_mismatch", "weights and values differ in length");

    std::vector<std::pair<double, double>> pairs; // (|value|, weight)
    pairs.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            fail_validation("non_finite_value", "value " + std::to_string(i) + " is not finite");
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            fail_validation("invalid_weight", "weight " + std::to_string(i) + " is negative or not finite");
        if (weights[i] > 0.0)
            pairs.emplace_back(std::abs(values[i]), weights[i]);
    }
    if (pairs.empty())
        return RearrangementProfile();

    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<double> breaks{0.0};
    std::vector<double> vals;
    double              t = 0.0;
    std::size_t         i = 0;
    while (i < pairs.size()) {
        const double        v = pairs[i].first;
        std::vector<double> level;
        while (i < pairs.size() && pairs[i].first == v)
            level.push_back(pairs[i++].second);
        t += pairwise_sum(level);
        breaks.push_back(t);
        vals.push_back(v);
    }
    return RearrangementProfile(std::move(breaks), std::move(vals));
}

inline RearrangementProfile rearrange(const SampledFunction& f)
{
    const auto w = f.space().weights();
    return rearrange(w, f.values());
}

// m({|f| > tau})
inline double distribution(std::span<const double> weights, std::span<const double> values, double tau)
{
    if (tau < 0.0)
        fail_validation("negative_level", "distribution level must be nonnegative");
    std::vector<double> hit;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::abs(values[i]) > tau)
            hit.push_back(weights[i]);
    return pairwise_sum(hit);
}

inline double distribution(const SampledFunction& f, double tau)
{
    const auto w = f.space().weights();
    return distribution(w, f.values(), tau);
}

// |{t : p(t) > tau}| for a profile.
inline double profile_level_measure(const RearrangementProfile& p, double tau)
{
    double len = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.values()[i] > tau)
            len = p.breaks()[i + 1];
    return len;
}

inline double profile_eval(const RearrangementProfile& p, double t) { return p.eval(t); }

//
// Lebesgue norm computed on the measure space itself, not through the
// rearrangement; serves as the independent side of the representation check.
//
inline double space_lebesgue_norm(std::span<const double> weights, std::span<const double> values, double p)
{
    if (!(p >= 1.0))
        fail_validation("bad_exponent", "Lebesgue exponent must be >= 1");
    double vmax = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (weights[i] > 0.0)
            vmax = std::max(vmax, std::abs(values[i]));
    if (std::isinf(p) || vmax == 0.0)
        return vmax;
    std::vector<double> terms(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        terms[i] = weights[i] * std::pow(std::abs(values[i]) / vmax, p);
    return vmax * std::pow(pairwise_sum(terms), 1.0 / p);
}

inline double space_lebesgue_norm(const SampledFunction& f, double p)
{
    const auto w = f.space().weights();
    return space_lebesgue_norm(w, f.values(), p);
}

//
// Sampled lower estimate of the best constant C in mu(B_r(x) ∩ Ω) <= C r^alpha.
// Only atoms inside the domain count. The reported lattice sizes record what
// the estimate was taken over.
//
struct AhlforsEstimate
{
    double      constant      = 0.0;
    std::size_t best_center   = 0;
    double      best_radius   = 0.0;
    std::size_t center_count  = 0;
    std::size_t radius_count  = 0;
};

template <typename DomainT>
AhlforsEstimate ahlfors_constant(const SampledMeasureSpace&              mu,
                                 const DomainT&                          domain,
                                 double                                  alpha,
                                 const std::vector<std::vector<double>>& centers,
                                 const std::vector<double>&              radii)
{
    if (centers.empty() || radii.empty())
        fail_validation("empty_lattice", "ahlfors_constant needs at least one center and one radius");
    if (!(alpha > 0.0) || alpha > static_cast<double>(domain.dimension()))
        fail_validation("bad_alpha", "alpha must lie in (0, n]");
    if (mu.size() > 0 && !mu.has_positions())
        fail_validation("missing_positions", "ahlfors_constant needs atom positions");

    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.atoms()[i].weight > 0.0 && domain.contains(mu.atoms()[i].position))
            inside.push_back(i);

    AhlforsEstimate est;
    est.center_count = centers.size();
    est.radius_count = radii.size();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (double r : radii) {
            if (!(r > 0.0))
                fail_validation("bad_radius", "radii must be positive");
            std::vector<double> in_ball;
            for (std::size_t i : inside) {
                const auto& pos = mu.atoms()[i].position;
                double      d2  = 0.0;
                for (std::size_t k = 0; k < pos.size(); ++k)
                    d2 += (pos[k] - centers[c][k]) * (pos[k] - centers[c][k]);
                if (d2 < r * r)
                    in_ball.push_back(mu.atoms()[i].weight);
            }
            const double ratio = pairwise_sum(in_ball) / std::pow(r, alpha);
            if (ratio > est.constant) {
                est.constant    = ratio;
                est.best_center = c;
                est.best_radius = r;
            }
        }
    }
    return est;
}

////////////////////////////////////////////////////////////////////////////////
//
// text formats
//
////////////////////////////////////////////////////////////////////////////////

namespace detail {

inline std::string trim_field(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

inline double field_number(const std::string& s, const char* code)
{
    const std::string t = trim_field(s);
    if (t == "inf" || t == "Inf")
        return inf;
    double     v   = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size())
        fail_validation(code, "cannot read number '" + t + "'");
    return v;
}

// comma-split data rows; '#' comments, blank lines and a leading header skipped
inline std::vector<std::vector<std::string>> csv_rows(std::istream& in)
{
    std::vector<std::vector<std::string>> rows;
    std::string                           line;
    bool                                  first = true;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        line = trim_field(line);
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream        ss(line);
        std::string              c;
        while (std::getline(ss, c, ','))
            cells.push_back(trim_field(c));
        const bool header = first && !cells.empty() && !cells[0].empty() &&
                            std::isalpha(static_cast<unsigned char>(cells.back()[0])) && cells.back() != "inf";
        first = false;
        if (!header)
            rows.push_back(std::move(cells));
    }
    return rows;
}

} // namespace detail

// rows t_break,value: right endpoint of each step and the value on it
inline RearrangementProfile parse_profile_csv(std::istream& in)
{
    std::vector<double> b{0.0}, v;
    for (const auto& r : detail::csv_rows(in)) {
        if (r.size() != 2)
            fail_validation("bad_profile_file", "profile rows must read t_break,value");
        b.push_back(detail::field_number(r[0], "bad_profile_file"));
        v.push_back(detail::field_number(r[1], "bad_profile_file"));
    }
    if (v.empty())
        fail_validation("bad_profile_file", "profile file holds no rows");
    return RearrangementProfile(std::move(b), std::move(v));
}

inline std::string profile_csv(const RearrangementProfile& p)
{
    std::ostringstream o;
    o.precision(17);
    o << "t_break,value\n";
    for (std::size_t i = 0; i < p.size(); ++i)
        o << p.breaks()[i + 1] << ',' << p.values()[i] << '\n';
    return o.str();
}

// one atom per row: id,weight[,x,y[,z]]
inline SampledMeasureSpace parse_atom_file(std::istream& in)
{
    std::vector<Atom> atoms;
    for (const auto& r : detail::csv_rows(in)) {
        if (r.size() != 2 && r.size() != 4 && r.size() != 5)
            fail_validation("bad_atom_file", "atom rows must read id,weight[,x,y[,z]]");
        Atom a{r[0], detail::field_number(r[1], "bad_atom_file"), {}};
        for (std::size_t k = 2; k < r.size(); ++k)
            a.position.push_back(detail::field_number(r[k], "bad_atom_file"));
        atoms.push_back(std::move(a));
    }
    return SampledMeasureSpace(std::move(atoms));
}

// rows id,value matched against the atoms of the space
inline SampledFunction parse_values_file(std::istream& in, std::shared_ptr<const SampledMeasureSpace> space)
{
    std::map<std::string, double> by_id;
    for (const auto& r : detail::csv_rows(in)) {
        if (r.size() != 2)
            fail_validation("bad_values_file", "value rows must read id,value");
        if (!by_id.emplace(r[0], detail::field_number(r[1], "bad_values_file")).second)
            fail_validation("bad_values_file", "atom '" + r[0] + "' has two values");
    }
    std::vector<double> v;
    v.reserve(space->size());
    for (const auto& a : space->atoms()) {
        const auto it = by_id.find(a.id);
        if (it == by_id.end())
            fail_validation("bad_values_file", "no value for atom '" + a.id + "'");
        v.push_back(it->second);
    }
    if (by_id.size() != space->size())
        fail_validation("bad_values_file", "values name atoms outside the space");
    return SampledFunction(std::move(space), std::move(v));
}

template <typename T, typename Parse>
T load_text(const std::string& path, Parse parse)
{
    std::ifstream in(path);
    if (!in)
        fail_validation("file_not_found", "cannot open " + path);
    return parse(in);
}

} // namespace friedrichs
