// Library tour: a norm, a one-dimensional kernel bound, one trace inequality
// on a builtin domain and the sharp isoperimetric check.

#include <friedrichs/harness.hpp>

#include <cstdio>

using namespace friedrichs;

int main()
{
    // chi_[0,1) in L^{2,1}
    const auto step = rearrange(std::vector<double>{1.0}, std::vector<double>{1.0});
    std::printf("Lorentz(2,1) of an indicator: %.6f\n", norm_eval(Lorentz{2.0, 1.0}, step));

    const auto bc = best_constant_lower(make_template("hardy", {{"p", 2.0}}), 512);
    std::printf("averaging operator on L2(0,1): constant >= %.4f\n", bc.estimate);

    InequalitySpec spec;
    spec.theorem = "fried1";
    spec.params  = {{"p", 1.5}, {"r", 2.0}};
    const auto dom = load_domain("builtin:lshape");
    const auto& d  = std::get<PolygonDomain2D>(dom);
    const auto  r  = evaluate_inequality(spec, Trial<2>(TrialFunction<2>::bump(1.0, 4.0, {0.25, 0.25})), d, "lshape");
    std::printf("fried1 on the L-shape: q = %g, lhs = %.5f, rhs = %.5f, ratio = %.5f\n", r.exponent, r.lhs, r.rhs, r.ratio);
    for (const auto& t : r.terms)
        std::printf("  %-9s %-10s value %.5f  coefficient %.5f\n", t.name.c_str(), t.norm.c_str(), t.value, t.coef.value);

    const auto s = sharp_constant_check(2, 1.0, 512);
    std::printf("512-gon isoperimetric ratio: %.6f\n", s.ratio);
    return 0;
}
