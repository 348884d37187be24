// Library walkthrough: radial modes, a series solution, one Monte Carlo check
// and a convexity verdict.

#include "gou/convexity.hpp"
#include "gou/diffusion.hpp"
#include "gou/solver.hpp"

#include <cstdio>

int main() {
    using namespace gou;

    std::printf("gamma_3 = %.15f\n", gamma_d(3));
    for (int l : {1, 2, 5}) std::printf("f_%d(2) in d=3: %.12f\n", l, f_l(RadialMode(3, l), 2.0));
    std::printf("f_0(2) in d=3: %.12f\n", f_0(3, 2.0));

    // u for g = cos(2 theta) on the circle.
    const BoundarySpec g = BoundarySpec::builtin(2, Builtin::cos_2theta);
    const EllipticSolution u = solve_auto(g, 10.0);
    const Point x{1.5, 0.5};
    const SolutionValue v = u.evaluate(x);
    std::printf("u(1.5, 0.5) = %.12f (L = %d, tail bound %.2g, residual %.2g)\n", v.value, u.truncation(),
                v.tail_bound, residual(u, x));

    // Second moment of the process against its closed form.
    McConfig mc;
    mc.n_paths = 20000;
    mc.dt = 1e-3;
    mc.t_max = 0.5;
    const Point x0{1.0, 0.0};
    const McEstimate e = second_moment(2, x0, 0.5, mc);
    std::printf("E|X(0.5)|^2 = %.4f +- %.4f (exact %.4f)\n", e.mean, e.std_error, second_moment_reference(2, x0, 0.5));

    // Convexity of u and of the cone function |x| g(x/|x|).
    ProbeConfig probe;
    probe.n_triples = 20000;
    const EquivalenceResult eq = equivalence_harness(g, -1, probe);
    std::printf("convexity: u %s, v %s\n", verdict_name(eq.u_report.verdict), verdict_name(eq.v_report.verdict));
    return 0;
}
