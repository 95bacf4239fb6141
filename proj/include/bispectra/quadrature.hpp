#pragma once

#include <bispectra/constants.hpp>
#include <bispectra/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>

namespace bispectra {

template <typename Real = double>
struct QuadratureConfig {
    Real abs_tol = Real(1e-13);
    Real rel_tol = Real(1e-13);
    int max_levels = 12;

    void validate() const {
        if (!(abs_tol > 0) || !(rel_tol > 0) || max_levels < 1) {
            throw domain_error("QuadratureConfig: tolerances must be positive and max_levels >= 1");
        }
    }
};

template <typename Real = double>
struct QuadratureResult {
    Real value = 0;
    Real error_estimate = 0;
    int levels_used = 0;
};

/// Thrown when the level-to-level error does not meet the tolerance, or the integrand
/// returns NaN. Carries the best available estimate.
template <typename Real = double>
class quadrature_error : public numerical_error {
public:
    quadrature_error(const std::string& what, QuadratureResult<Real> best, Real abscissa = std::numeric_limits<Real>::quiet_NaN())
        : numerical_error(what), best_(best), abscissa_(abscissa) {}

    const QuadratureResult<Real>& best() const noexcept { return best_; }
    /// Abscissa at which the integrand failed, NaN when the failure was non-convergence.
    Real abscissa() const noexcept { return abscissa_; }

private:
    QuadratureResult<Real> best_;
    Real abscissa_;
};

namespace detail {

// Integrands may take just x, or (x, x - a, b - x) when they need the distance to an
// endpoint without the cancellation of forming it from x.
template <typename Real, typename F>
Real call_integrand(F& f, Real x, Real left_gap, Real right_gap) {
    if constexpr (std::is_invocable_r_v<Real, F&, Real, Real, Real>) {
        return f(x, left_gap, right_gap);
    } else {
        (void)left_gap;
        (void)right_gap;
        return f(x);
    }
}

}  // namespace detail

/// Double-exponential (tanh-sinh) quadrature of f over (a, b).
///
/// The substitution x = c + h tanh(pi/2 sinh t) clusters nodes doubly exponentially at both
/// endpoints, so integrable endpoint singularities (1/sqrt, log) need no special treatment.
/// The endpoints themselves are never evaluated. The step halves each level; the error
/// estimate is the difference between the last two levels. Tolerances below the rounding
/// floor (a few ulps of the integral of |f|) are treated as met at that floor.
template <typename Real = double, typename F>
QuadratureResult<Real> integrate_tanh_sinh(F&& f, Real a, Real b, const QuadratureConfig<Real>& cfg = {}) {
    cfg.validate();
    if (!(a < b)) {
        throw domain_error("integrate_tanh_sinh: requires a < b");
    }
    const Real half = (b - a) / 2;
    const Real half_pi = std::numbers::pi_v<Real> / 2;
    const Real eps = std::numeric_limits<Real>::epsilon();

    Real abs_sum = 0;
    // Contribution w(t) f(x(t)) of the node at +t (right side) or -t (left side).
    auto node = [&](Real t, bool right, bool& outside) -> Real {
        const Real u = half_pi * std::sinh(t);
        const Real cu = std::cosh(u);
        const Real gap = half * std::exp(-u) / cu;  // distance to the nearer endpoint
        const Real w = half * half_pi * std::cosh(t) / (cu * cu);
        outside = !(gap > 0) || !(w > 0);
        if (outside) {
            return 0;
        }
        Real x = right ? b - gap : a + gap;
        if (x <= a || x >= b) {
            // Below the resolution of x; integrands that read the gaps can still go on.
            if constexpr (!std::is_invocable_r_v<Real, F&, Real, Real, Real>) {
                outside = true;
                return 0;
            }
            x = right ? std::nextafter(b, a) : std::nextafter(a, b);
        }
        const Real left_gap = right ? (b - a) - gap : gap;
        const Real right_gap = right ? gap : (b - a) - gap;
        const Real fx = detail::call_integrand<Real>(f, x, left_gap, right_gap);
        if (std::isnan(fx)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "integrate_tanh_sinh: integrand returned NaN at x = " << x;
            throw quadrature_error<Real>(msg.str(), {}, x);
        }
        abs_sum += std::abs(w * fx);
        return w * fx;
    };

    // Level 0 (h = 1) also fixes how far out each tail is worth sampling.
    bool outside = false;
    Real sum = half * half_pi * detail::call_integrand<Real>(f, a + half, half, half);
    abs_sum = std::abs(sum);
    if (std::isnan(sum)) {
        throw quadrature_error<Real>("integrate_tanh_sinh: integrand returned NaN at the midpoint", {}, a + half);
    }
    Real t_max[2] = {0, 0};
    for (int side = 0; side < 2; ++side) {
        for (int k = 1;; ++k) {
            const Real term = node(Real(k), side == 1, outside);
            if (outside) {
                // Narrow intervals run out of representable x before the terms get small;
                // finer levels still have nodes inside up to here.
                t_max[side] = Real(k);
                break;
            }
            sum += term;
            t_max[side] = Real(k);
            if (std::abs(term) <= eps * eps * std::abs(sum) && k > 2) {
                break;
            }
        }
    }

    Real h = 1;
    Real estimate = sum * h;
    QuadratureResult<Real> result{estimate, std::numeric_limits<Real>::infinity(), 0};
    for (int level = 1; level <= cfg.max_levels; ++level) {
        h /= 2;
        Real fresh = 0;
        for (int side = 0; side < 2; ++side) {
            for (Real t = h; t <= t_max[side] + h; t += 2 * h) {
                const Real term = node(t, side == 1, outside);
                if (outside) {
                    break;
                }
                fresh += term;
            }
        }
        sum += fresh;
        const Real refined = sum * h;
        result = {refined, std::abs(refined - estimate), level};
        estimate = refined;
        const Real floor = Real(16) * eps * abs_sum * h;
        if (level >= 3 && result.error_estimate <= std::max({cfg.abs_tol, cfg.rel_tol * std::abs(refined), floor})) {
            return result;
        }
    }
    std::ostringstream msg;
    msg.precision(3);
    msg << "integrate_tanh_sinh: no convergence after " << cfg.max_levels << " levels (error estimate "
        << result.error_estimate << ")";
    throw quadrature_error<Real>(msg.str(), result);
}

/// Integral of 1/sqrt(1 + x^4) over [c, infinity).
///
/// The map x -> 1/x leaves the integrand measure invariant, so the tail becomes
/// int_0^{min(1, 1/c)} plus, for c < 1, the finite piece int_c^1.
template <typename Real = double>
QuadratureResult<Real> integrate_semi_infinite_quartic(Real c, const QuadratureConfig<Real>& cfg = {}) {
    if (!(c >= 0)) {
        throw domain_error("integrate_semi_infinite_quartic: requires c >= 0");
    }
    auto quartic = [](Real x) { return Real(1) / std::sqrt(Real(1) + x * x * x * x); };
    const Real upper = c > 1 ? Real(1) / c : Real(1);
    auto tail = integrate_tanh_sinh<Real>(quartic, Real(0), upper, cfg);
    if (c >= 1) {
        return tail;
    }
    if (c == 0) {
        return {2 * tail.value, 2 * tail.error_estimate, tail.levels_used};
    }
    auto head = integrate_tanh_sinh<Real>(quartic, c, Real(1), cfg);
    return {tail.value + head.value, tail.error_estimate + head.error_estimate,
            std::max(tail.levels_used, head.levels_used)};
}

}  // namespace bispectra
