// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_QUADRATURE_H
#define FORKDYN_QUADRATURE_H

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace forkdyn {

/** Raised when adaptive refinement hits its budget; carries the error reached. */
class QuadratureError : public std::runtime_error
{
public:
    QuadratureError(double achieved, double requested)
        : std::runtime_error("quadrature did not converge: achieved error " +
                             std::to_string(achieved) + " > requested " +
                             std::to_string(requested)),
          achieved_error(achieved),
          requested_error(requested)
    {
    }
    double achieved_error;
    double requested_error;
};

namespace detail {

template <typename F>
struct AdaptiveSimpson {
    const F& f;
    double tol;
    std::size_t evals{0};
    std::size_t max_evals;
    double pending_error{0.0}; // error surrendered on depth exhaustion

    double eval(double x)
    {
        ++evals;
        return f(x);
    }

    double recurse(double a, double b, double fa, double fm, double fb, double whole,
                   double local_tol, int depth)
    {
        double m = 0.5 * (a + b);
        double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        double flm = eval(lm), frm = eval(rm);
        double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        double delta = left + right - whole;
        if (depth <= 0 || evals > max_evals) {
            pending_error += std::abs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        if (std::abs(delta) <= 15.0 * local_tol) return left + right + delta / 15.0;
        return recurse(a, m, fa, flm, fm, left, 0.5 * local_tol, depth - 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * local_tol, depth - 1);
    }
};

} // namespace detail

/**
 * Adaptive Simpson integration of f over [a,b] to absolute tolerance
 * abs_tol. Deterministic; throws QuadratureError when the refinement
 * budget is exhausted before the tolerance is met.
 */
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol,
                          std::size_t max_evals = 2000000)
{
    if (!(b > a)) return 0.0;
    detail::AdaptiveSimpson<F> ctx{f, abs_tol, 0, max_evals, 0.0};
    double fa = ctx.eval(a), fb = ctx.eval(b), fm = ctx.eval(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double result = ctx.recurse(a, b, fa, fm, fb, whole, abs_tol, 48);
    if (ctx.pending_error > abs_tol) throw QuadratureError(ctx.pending_error, abs_tol);
    return result;
}

} // namespace forkdyn

#endif // FORKDYN_QUADRATURE_H
