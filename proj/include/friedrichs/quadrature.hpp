#pragma once
//
// Quadrature helpers on top of Boost.Math.
//

#include <friedrichs/common.hpp>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <vector>

namespace friedrichs::quad {

// Full Gauss–Legendre rule on [-1, 1] (boost stores the nonnegative half).
template <unsigned N>
struct GaussRule
{
    std::array<double, N> x{};
    std::array<double, N> w{};

    GaussRule()
    {
        using G          = boost::math::quadrature::gauss<double, N>;
        const auto& absc = G::abscissa();
        const auto& wts  = G::weights();
        unsigned    k    = 0;
        for (std::size_t i = 0; i < absc.size(); ++i) {
            if (absc[i] == 0.0) {
                x[k]   = 0.0;
                w[k++] = wts[i];
            } else {
                x[k]   = -absc[i];
                w[k++] = wts[i];
                x[k]   = absc[i];
                w[k++] = wts[i];
            }
        }
    }
};

template <unsigned N>
const GaussRule<N>& gauss_rule()
{
    static const GaussRule<N> rule;
    return rule;
}

//
// Adaptive Gauss–Kronrod on [a, b]; b may be +inf.
//
template <typename F>
double adaptive(F&& f, double a, double b, double rtol = 1e-12)
{
    double err = 0.0;
    double l1  = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rtol, &err, &l1);
}

} // namespace friedrichs::quad
