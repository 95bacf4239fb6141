#pragma once

#include <bispectra/constants.hpp>
#include <bispectra/errors.hpp>
#include <bispectra/grid.hpp>
#include <bispectra/quadrature.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

// Potential energies in units where Coulomb is -1/rho and lengths are in Bohr radii.

namespace bispectra {

enum class PotentialKind { Coulomb, BITestParticle, BISelfField };

inline std::string_view to_string(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::Coulomb: return "coulomb";
        case PotentialKind::BITestParticle: return "bi-test";
        case PotentialKind::BISelfField: return "bi-self";
    }
    return "?";
}

inline PotentialKind parse_potential_kind(std::string_view name) {
    if (name == "coulomb") return PotentialKind::Coulomb;
    if (name == "bi-test") return PotentialKind::BITestParticle;
    if (name == "bi-self") return PotentialKind::BISelfField;
    throw domain_error("unknown potential '" + std::string(name) + "' (expected coulomb, bi-test or bi-self)");
}

template <typename Real = double>
struct PotentialSpec {
    PotentialKind kind = PotentialKind::Coulomb;
    std::optional<Real> a_tilde;

    static PotentialSpec coulomb() { return {PotentialKind::Coulomb, std::nullopt}; }
    static PotentialSpec test_particle(Real a) { return checked({PotentialKind::BITestParticle, a}); }
    static PotentialSpec self_field(Real a) { return checked({PotentialKind::BISelfField, a}); }

    void validate() const {
        if (kind == PotentialKind::Coulomb) {
            if (a_tilde) {
                throw domain_error("PotentialSpec: Coulomb takes no a_tilde");
            }
        } else if (!a_tilde || !(*a_tilde > 0) || !std::isfinite(*a_tilde)) {
            throw domain_error("PotentialSpec: BI potentials need a finite a_tilde > 0");
        }
    }

private:
    static PotentialSpec checked(PotentialSpec spec) {
        spec.validate();
        return spec;
    }
};

namespace detail {

// The BI potentials divide an integral by a_tilde; tolerances refer to the potential.
template <typename Real>
QuadratureConfig<Real> scaled_abs_tol(QuadratureConfig<Real> cfg, Real scale) {
    cfg.abs_tol *= scale;
    return cfg;
}

template <typename Real>
constexpr Real self_field_cutoff() {
    // 1/(2 sqrt 2): the radicand under the inner square root vanishes here.
    return std::numbers::sqrt2_v<Real> / Real(4);
}

}  // namespace detail

template <typename Real = double>
Real coulomb(Real rho) {
    if (!(rho > 0)) {
        throw domain_error("coulomb: rho must be positive");
    }
    return Real(-1) / rho;
}

/// Test-particle BI potential: -(1/a) int_{rho/a}^inf dx / sqrt(1 + x^4). Finite at rho = 0.
template <typename Real = double>
Real v1_test_particle(Real rho, Real a_tilde, const QuadratureConfig<Real>& cfg = {}) {
    if (!(rho >= 0) || !(a_tilde > 0)) {
        throw domain_error("v1_test_particle: requires rho >= 0 and a_tilde > 0");
    }
    return -integrate_semi_infinite_quartic<Real>(rho / a_tilde, detail::scaled_abs_tol(cfg, a_tilde)).value / a_tilde;
}


/// Self-field inner integrand
///   g(x) = (2x sqrt(1+x^2) - 2x^2 - 1) / ( sqrt(1 + 4x^2 - 4x sqrt(1+x^2)) sqrt(1+x^2) )
/// on [0, 1/(2 sqrt 2)), evaluated in rationalized form from x and the distance to the cutoff.
///
/// With w = sqrt(1+x^2) - x the numerator is -w^2 and the radicand equals
/// 8 (x_c - x)(x_c + x) / (1 + 4x^2 + 4x sqrt(1+x^2)); neither form cancels near the cutoff.
template <typename Real = double>
Real self_field_integrand(Real x, Real gap_to_cutoff) {
    const Real xc = detail::self_field_cutoff<Real>();
    const Real root = std::sqrt(Real(1) + x * x);
    const Real w = Real(1) / (root + x);
    const Real radicand = Real(8) * gap_to_cutoff * (xc + x) / (Real(1) + Real(4) * x * x + Real(4) * x * root);
    return -w * w / (std::sqrt(radicand) * root);
}

/// g(x) + 1 without cancellation at small x:
///   g + 1 = -x^2 (3 - 4 x w) / ( A (A + w^2) ),  A = sqrt(radicand) sqrt(1+x^2).
template <typename Real = double>
Real self_field_integrand_plus_one(Real x, Real gap_to_cutoff) {
    const Real xc = detail::self_field_cutoff<Real>();
    const Real root = std::sqrt(Real(1) + x * x);
    const Real w = Real(1) / (root + x);
    const Real radicand = Real(8) * gap_to_cutoff * (xc + x) / (Real(1) + Real(4) * x * x + Real(4) * x * root);
    const Real a = std::sqrt(radicand) * root;
    return -x * x * (Real(3) - Real(4) * x * w) / (a * (a + w * w));
}

template <typename Real = double>
Real self_field_integrand(Real x) {
    return self_field_integrand<Real>(x, detail::self_field_cutoff<Real>() - x);
}

/// I(s) = int_0^{1/(2 sqrt 2)} g(x) / sqrt(1 + s^4 x^4) dx, integrated directly with the
/// singular endpoint left to tanh-sinh.
template <typename Real = double>
QuadratureResult<Real> self_field_inner_integral(Real s, const QuadratureConfig<Real>& cfg = {}) {
    if (!(s >= 0)) {
        throw domain_error("self_field_inner_integral: requires s >= 0");
    }
    const Real xc = detail::self_field_cutoff<Real>();
    auto f = [s](Real x, Real, Real right_gap) {
        const Real sx2 = (s * x) * (s * x);
        return self_field_integrand<Real>(x, right_gap) / std::sqrt(Real(1) + sx2 * sx2);
    };
    return integrate_tanh_sinh<Real>(f, Real(0), xc, cfg);
}

/// Self-field BI potential -(1/a) [ s I(s) + B(1/4,1/4)/4 ], s = rho/a.
///
/// Evaluated as -(1/a) [ s J(s) + int_{s x_c}^inf dy/sqrt(1+y^4) ] with
/// J(s) = int_0^{x_c} (g(x) + 1) / sqrt(1 + s^4 x^4) dx, which is the same quantity with the
/// -1 at x = 0 absorbed analytically. For s >> 1 the direct form loses digits to the
/// near-cancellation of s I(s) against B/4; this one does not.
template <typename Real = double>
Real v2_self_field(Real rho, Real a_tilde, const QuadratureConfig<Real>& cfg = {}) {
    if (!(rho >= 0) || !(a_tilde > 0)) {
        throw domain_error("v2_self_field: requires rho >= 0 and a_tilde > 0");
    }
    const Real s = rho / a_tilde;
    const Real xc = detail::self_field_cutoff<Real>();
    const QuadratureConfig<Real> piece_cfg = detail::scaled_abs_tol(cfg, a_tilde / 2);
    const Real tail = integrate_semi_infinite_quartic<Real>(s * xc, piece_cfg).value;
    if (s == 0) {
        return -tail / a_tilde;
    }
    auto shifted = [s, xc](Real x, Real, Real right_gap_of_piece, Real piece_end) {
        const Real sx2 = (s * x) * (s * x);
        const Real gap = piece_end == xc ? right_gap_of_piece : xc - x;
        return s * self_field_integrand_plus_one<Real>(x, gap) / std::sqrt(Real(1) + sx2 * sx2);
    };
    // The kernel 1/sqrt(1 + s^4 x^4) turns over at x = 1/s; split there when it is interior.
    const Real knee = Real(1) / s;
    Real inner = 0;
    if (knee < xc) {
        inner += integrate_tanh_sinh<Real>([&](Real x, Real l, Real r) { return shifted(x, l, r, knee); }, Real(0), knee, piece_cfg).value;
        inner += integrate_tanh_sinh<Real>([&](Real x, Real l, Real r) { return shifted(x, l, r, xc); }, knee, xc, piece_cfg).value;
    } else {
        inner = integrate_tanh_sinh<Real>([&](Real x, Real l, Real r) { return shifted(x, l, r, xc); }, Real(0), xc, piece_cfg).value;
    }
    return -(inner + tail) / a_tilde;
}

template <typename Real = double>
Real evaluate(const PotentialSpec<Real>& spec, Real rho, const QuadratureConfig<Real>& cfg = {}) {
    switch (spec.kind) {
        case PotentialKind::Coulomb: return coulomb<Real>(rho);
        case PotentialKind::BITestParticle: return v1_test_particle<Real>(rho, *spec.a_tilde, cfg);
        case PotentialKind::BISelfField: return v2_self_field<Real>(rho, *spec.a_tilde, cfg);
    }
    throw domain_error("evaluate: unknown potential kind");
}

/// Potential values on the points of a grid, computed once per (spec, grid).
template <typename Real = double>
struct PotentialSamples {
    RadialGrid<Real> grid;
    std::vector<Real> values;  // values[j - 1] = V(rho_j)
};

template <typename Real = double>
PotentialSamples<Real> sample_on_grid(const PotentialSpec<Real>& spec, const RadialGrid<Real>& grid,
                                      const QuadratureConfig<Real>& cfg = {}) {
    spec.validate();
    PotentialSamples<Real> out{grid, std::vector<Real>(grid.size())};
    for (std::size_t j = 1; j <= grid.size(); ++j) {
        const Real rho = grid.rho(j);
        try {
            out.values[j - 1] = evaluate<Real>(spec, rho, cfg);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "sample_on_grid: " << to_string(spec.kind) << " failed at rho_" << j << " = " << rho << ": " << e.what();
            throw numerical_error(msg.str());
        }
        if (!std::isfinite(out.values[j - 1])) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "sample_on_grid: non-finite potential at rho_" << j << " = " << rho;
            throw numerical_error(msg.str());
        }
    }
    return out;
}

/// Samples of an arbitrary callable V(rho), e.g. V = 0 for free-particle checks.
template <typename Real = double, typename F>
PotentialSamples<Real> sample_function(F&& v, const RadialGrid<Real>& grid) {
    PotentialSamples<Real> out{grid, std::vector<Real>(grid.size())};
    for (std::size_t j = 1; j <= grid.size(); ++j) {
        out.values[j - 1] = v(grid.rho(j));
    }
    return out;
}

}  // namespace bispectra
