#pragma once
//
// Pairwise covering LP
//
//   minimise  sum_i w_i g_i   subject to  g_i + g_j >= b_ij,  g >= 0,
//
// solved as its packing dual  max sum b_ij y_ij, sum_j y_ij <= w_i, y >= 0
// by a revised simplex with a dense basis inverse. Pair columns are priced
// on the fly, so only violated covering rows ever enter.
//

#include <friedrichs/common.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace friedrichs::lp {

struct PairCoverResult
{
    std::vector<double> g;        // primal covering solution
    double              primal = 0.0;
    double              dual   = 0.0;
    std::size_t         pivots = 0;
    std::size_t         active_pairs = 0; // pair columns in the final basis
};

struct PairCoverOptions
{
    double      tol        = 1e-12;
    std::size_t max_pivots = 0; // 0: 200 * n + 1000
    std::size_t refactor   = 0; // 0: every 2n pivots
};

class PairCover
{
public:
    // b is the dense symmetric n x n right-hand side (diagonal ignored)
    PairCover(std::vector<double> w, std::vector<double> b) : n_(w.size()), w_(std::move(w)), b_(std::move(b))
    {
        if (b_.size() != n_ * n_)
            fail_validation("size_mismatch", "pair matrix must be n x n");
        for (double x : w_)
            if (!(x >= 0.0) || !std::isfinite(x))
                fail_validation("bad_weight", "covering weights must be finite and nonnegative");
        for (double x : b_)
            if (!std::isfinite(x))
                fail_validation("bad_rhs", "pair bounds must be finite");
    }

    PairCoverResult solve(const PairCoverOptions& opt = {})
    {
        PairCoverResult res;
        if (n_ == 0)
            return res;
        const std::size_t max_pivots = opt.max_pivots ? opt.max_pivots : 200 * n_ + 1000;
        const std::size_t refactor   = opt.refactor ? opt.refactor : 2 * n_;
        double            scale      = 0.0;
        for (double x : b_)
            scale = std::max(scale, std::abs(x));
        const double tol = opt.tol * std::max(scale, 1.0);

        // slack basis
        basis_.assign(n_, Column{});
        for (std::size_t r = 0; r < n_; ++r)
            basis_[r] = {r, r};
        binv_.assign(n_ * n_, 0.0);
        for (std::size_t r = 0; r < n_; ++r)
            binv_[r * n_ + r] = 1.0;
        recompute();

        std::size_t degenerate = 0;
        std::vector<double> u(n_);
        while (res.pivots < max_pivots) {
            const bool bland = degenerate > 20;
            Column     enter{};
            double     best = tol;
            bool       found = false;
            // slack columns (reduced cost -pi_i)
            for (std::size_t i = 0; i < n_ && !(bland && found); ++i)
                if (-pi_[i] > best && !in_basis({i, i})) {
                    best  = -pi_[i];
                    enter = {i, i};
                    found = true;
                }
            if (!(bland && found)) {
                for (std::size_t i = 0; i < n_ && !(bland && found); ++i)
                    for (std::size_t j = i + 1; j < n_; ++j) {
                        const double rc = b_[i * n_ + j] - pi_[i] - pi_[j];
                        if (rc > best) {
                            best  = rc;
                            enter = {i, j};
                            found = true;
                            if (bland)
                                break;
                        }
                    }
            }
            if (!found)
                break;

            // u = Binv a
            for (std::size_t r = 0; r < n_; ++r)
                u[r] = binv_[r * n_ + enter.i] + (enter.j != enter.i ? binv_[r * n_ + enter.j] : 0.0);

            std::size_t leave = n_;
            double      theta = inf;
            for (std::size_t r = 0; r < n_; ++r) {
                if (u[r] <= 1e-11)
                    continue;
                const double t = std::max(x_[r], 0.0) / u[r];
                if (t < theta - 1e-15 || (t <= theta + 1e-15 && leave < n_ && key(basis_[r]) < key(basis_[leave]))) {
                    theta = t;
                    leave = r;
                }
            }
            if (leave == n_)
                fail_runtime("lp_unbounded", "packing LP reported unbounded; covering LP infeasible");
            degenerate = theta <= 1e-15 ? degenerate + 1 : 0;

            pivot(leave, enter, u);
            ++res.pivots;
            if (res.pivots % refactor == 0)
                refactorize();
        }
        if (res.pivots >= max_pivots)
            fail_runtime("lp_iteration_limit", "simplex pivot limit reached");
        refactorize();

        // primal covering solution from the simplex multipliers
        res.g.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            res.g[i] = std::max(pi_[i], 0.0);
        repair(res.g);

        std::vector<double> terms(n_);
        for (std::size_t i = 0; i < n_; ++i)
            terms[i] = w_[i] * res.g[i];
        res.primal = pairwise_sum(terms);
        std::vector<double> dual_terms;
        for (std::size_t r = 0; r < n_; ++r)
            if (basis_[r].i != basis_[r].j) {
                dual_terms.push_back(b_[basis_[r].i * n_ + basis_[r].j] * std::max(x_[r], 0.0));
                ++res.active_pairs;
            }
        res.dual = pairwise_sum(dual_terms);
        return res;
    }

private:
    struct Column
    {
        std::size_t i = 0, j = 0; // i == j: slack of row i
    };

    std::size_t key(const Column& c) const { return c.i == c.j ? c.i : n_ + c.i * n_ + c.j; }
    bool        in_basis(const Column& c) const
    {
        for (const auto& b : basis_)
            if (b.i == c.i && b.j == c.j)
                return true;
        return false;
    }
    double cost(const Column& c) const { return c.i == c.j ? 0.0 : b_[c.i * n_ + c.j]; }

    void pivot(std::size_t r, const Column& enter, const std::vector<double>& u)
    {
        const double piv = u[r];
        double*      row = &binv_[r * n_];
        for (std::size_t k = 0; k < n_; ++k)
            row[k] /= piv;
        x_[r] /= piv;
        for (std::size_t s = 0; s < n_; ++s) {
            if (s == r || u[s] == 0.0)
                continue;
            const double f  = u[s];
            double*      rs = &binv_[s * n_];
            for (std::size_t k = 0; k < n_; ++k)
                rs[k] -= f * row[k];
            x_[s] -= f * x_[r];
        }
        // pi += rc * (new row r of Binv)
        const double rc = cost(enter) - (enter.i == enter.j ? pi_[enter.i] : pi_[enter.i] + pi_[enter.j]);
        for (std::size_t k = 0; k < n_; ++k)
            pi_[k] += rc * row[k];
        basis_[r] = enter;
    }

    void recompute()
    {
        x_.assign(n_, 0.0);
        pi_.assign(n_, 0.0);
        for (std::size_t r = 0; r < n_; ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < n_; ++k)
                s += binv_[r * n_ + k] * w_[k];
            x_[r] = s;
        }
        for (std::size_t r = 0; r < n_; ++r) {
            const double c = cost(basis_[r]);
            if (c == 0.0)
                continue;
            for (std::size_t k = 0; k < n_; ++k)
                pi_[k] += c * binv_[r * n_ + k];
        }
    }

    // Gauss-Jordan on the basis matrix
    void refactorize()
    {
        std::vector<double> B(n_ * n_, 0.0);
        for (std::size_t r = 0; r < n_; ++r) {
            B[basis_[r].i * n_ + r] += 1.0;
            if (basis_[r].j != basis_[r].i)
                B[basis_[r].j * n_ + r] += 1.0;
        }
        std::vector<double> inv(n_ * n_, 0.0);
        for (std::size_t r = 0; r < n_; ++r)
            inv[r * n_ + r] = 1.0;
        for (std::size_t c = 0; c < n_; ++c) {
            std::size_t p = c;
            for (std::size_t r = c + 1; r < n_; ++r)
                if (std::abs(B[r * n_ + c]) > std::abs(B[p * n_ + c]))
                    p = r;
            if (std::abs(B[p * n_ + c]) < 1e-14)
                fail_runtime("lp_singular_basis", "simplex basis became singular");
            if (p != c)
                for (std::size_t k = 0; k < n_; ++k) {
                    std::swap(B[p * n_ + k], B[c * n_ + k]);
                    std::swap(inv[p * n_ + k], inv[c * n_ + k]);
                }
            const double d = B[c * n_ + c];
            for (std::size_t k = 0; k < n_; ++k) {
                B[c * n_ + k] /= d;
                inv[c * n_ + k] /= d;
            }
            for (std::size_t r = 0; r < n_; ++r) {
                const double f = B[r * n_ + c];
                if (r == c || f == 0.0)
                    continue;
                for (std::size_t k = 0; k < n_; ++k) {
                    B[r * n_ + k] -= f * B[c * n_ + k];
                    inv[r * n_ + k] -= f * inv[c * n_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        recompute();
    }

    // restore exact covering feasibility after roundoff
    void repair(std::vector<double>& g) const
    {
        for (int pass = 0; pass < 4; ++pass) {
            bool changed = false;
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const double v = b_[i * n_ + j] - g[i] - g[j];
                    if (v > 0.0) {
                        g[i] += 0.5 * v;
                        g[j] += 0.5 * v;
                        if (g[i] + g[j] < b_[i * n_ + j])
                            g[i] = b_[i * n_ + j] - g[j];
                        changed = true;
                    }
                }
            if (!changed)
                break;
        }
    }

    std::size_t         n_;
    std::vector<double> w_, b_;
    std::vector<Column> basis_;
    std::vector<double> binv_, x_, pi_;
};

} // namespace friedrichs::lp
