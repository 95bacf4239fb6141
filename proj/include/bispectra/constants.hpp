#pragma once

namespace bispectra {

/// Fine-structure constant, pinned to the 10-digit value used for table reproduction.
template <typename Real = double>
constexpr Real alpha() {
    return static_cast<Real>(7.2973525376e-3L);
}

/// Euler's Beta function at (1/4, 1/4), i.e. Gamma(1/4)^2 / sqrt(pi).
template <typename Real = double>
constexpr Real beta_quarter() {
    return static_cast<Real>(7.41629870920548767373540138878L);
}

/// Born's value of the dimensionless BI parameter, B(1/4,1/4) alpha^2 / 6.
template <typename Real = double>
constexpr Real born_a_tilde() {
    return beta_quarter<Real>() * alpha<Real>() * alpha<Real>() / Real(6);
}

}  // namespace bispectra
