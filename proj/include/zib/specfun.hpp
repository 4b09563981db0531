#ifndef ZIB_SPECFUN_HPP
#define ZIB_SPECFUN_HPP

#include <functional>
#include <stdexcept>
#include <string>

namespace zib {

// Shape pair (a, b) of a beta distribution; both strictly positive.
struct BetaShape {
    double a;
    double b;
    BetaShape(double a_, double b_);
};

// Natural log of the gamma function, Lanczos approximation (g = 7, 9 terms).
// Throws std::domain_error for x <= 0 or non-finite x.
double log_gamma(double x);

// log of the beta function B(a, b).
double log_beta(double a, double b);

// Regularized incomplete beta function I_x(a, b): CDF of Beta(a, b) at x.
// Continued fraction (Lentz) with the symmetry switch at x > (a+1)/(a+b+2).
double reg_inc_beta(double x, const BetaShape& shape);

// log I_x(a, b), accurate deep into the lower tail where the linear value
// underflows. The upper tail (I_x near 1) is computed via the complement.
double log_reg_inc_beta(double x, const BetaShape& shape);

// log of I_hi(a, b) - I_lo(a, b) for 0 <= lo <= hi <= 1, evaluated from
// whichever tail keeps the subtraction well conditioned.
double log_reg_inc_beta_diff(double lo, double hi, const BetaShape& shape);

// Raised when adaptive quadrature cannot reach the requested tolerance;
// carries the best estimate and the achieved error bound.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& msg, double estimate, double achieved_error)
        : std::runtime_error(msg), estimate_(estimate), achieved_error_(achieved_error) {}
    double estimate() const { return estimate_; }
    double achieved_error() const { return achieved_error_; }

private:
    double estimate_;
    double achieved_error_;
};

// Adaptive Simpson quadrature of f over [lo, hi] with absolute error <= tol.
double integrate(const std::function<double(double)>& f, double lo, double hi, double tol);

// Bracketing bisection for a monotone non-decreasing F: returns x in [lo, hi]
// with |F(x) - target| <= 1e-9. Throws std::domain_error when target lies
// outside [F(lo), F(hi)].
double invert_monotone(const std::function<double(double)>& F, double target,
                       double lo, double hi);

} // namespace zib

#endif // ZIB_SPECFUN_HPP
