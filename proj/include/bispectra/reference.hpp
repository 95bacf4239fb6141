#pragma once

#include <bispectra/constants.hpp>
#include <bispectra/errors.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

// Closed-form hydrogen spectra and the dimensionless energy E~ shared by both equations:
// E~ = (2/alpha^2) E/(m c^2) for Schrodinger, and the rest-mass-subtracted analogue for
// Dirac, so Coulomb levels sit near -1/n^2.

namespace bispectra {

enum class Equation { Schrodinger, Dirac };

inline std::string to_string(Equation eq) { return eq == Equation::Schrodinger ? "schrodinger" : "dirac"; }

inline Equation parse_equation(const std::string& name) {
    if (name == "schrodinger") return Equation::Schrodinger;
    if (name == "dirac") return Equation::Dirac;
    throw domain_error("unknown equation '" + name + "' (expected schrodinger or dirac)");
}

/// Quantum numbers of a bound level: n with either l (Schrodinger) or kappa = j + 1/2 (Dirac).
/// Dirac levels with n > kappa come in pairs, told apart by the orbital sublabel l in
/// {kappa - 1, kappa}.
struct LevelLabel {
    int n = 1;
    Equation equation = Equation::Schrodinger;
    int angular = 0;  // l or kappa
    std::optional<int> orbital;  // Dirac only

    bool valid() const {
        if (n < 1) return false;
        if (equation == Equation::Schrodinger) return angular >= 0 && angular <= n - 1;
        if (angular < 1 || angular > n) return false;
        return !orbital || *orbital == angular - 1 || (*orbital == angular && n > angular);
    }

    /// "l=1" or "kappa=1" / "kappa=1:l=0".
    std::string angular_text() const {
        if (equation == Equation::Schrodinger) return "l=" + std::to_string(angular);
        std::string s = "kappa=" + std::to_string(angular);
        if (orbital) s += ":l=" + std::to_string(*orbital);
        return s;
    }

    friend bool operator==(const LevelLabel&, const LevelLabel&) = default;
};

/// Inverse of LevelLabel::angular_text.
inline LevelLabel parse_level_label(Equation eq, int n, const std::string& text) {
    LevelLabel label{n, eq, 0, std::nullopt};
    auto number = [&](std::size_t from, std::size_t to) {
        const std::string digits = text.substr(from, to - from);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
            throw domain_error("bad angular label '" + text + "'");
        }
        return std::stoi(digits);
    };
    if (eq == Equation::Schrodinger) {
        if (text.rfind("l=", 0) != 0) throw domain_error("bad angular label '" + text + "'");
        label.angular = number(2, text.size());
    } else {
        if (text.rfind("kappa=", 0) != 0) throw domain_error("bad angular label '" + text + "'");
        const auto colon = text.find(":l=");
        label.angular = number(6, colon == std::string::npos ? text.size() : colon);
        if (colon != std::string::npos) label.orbital = number(colon + 3, text.size());
    }
    if (!label.valid()) {
        throw domain_error("angular label '" + text + "' is inconsistent with n=" + std::to_string(n));
    }
    return label;
}

template <typename Real = double>
struct SpectrumLevel {
    LevelLabel label;
    Real e_tilde = 0;
    Real residual = 0;
    bool ambiguous = false;  // labeling was not clear-cut
    bool oscillatory = false;  // flagged by the spurious-mode screen
};

template <typename Real = double>
struct Spectrum {
    std::vector<SpectrumLevel<Real>> levels;
    std::vector<std::string> diagnostics;
};

template <typename Real = double>
Real schrodinger_coulomb_exact(int n) {
    if (n < 1) {
        throw domain_error("schrodinger_coulomb_exact: n must be >= 1");
    }
    return Real(-1) / (Real(n) * Real(n));
}

/// Exact Dirac-Coulomb E~ = (2/alpha^2) { [1 + (alpha / (n - kappa + sqrt(kappa^2 - alpha^2)))^2]^{-1/2} - 1 }.
/// The bracket is evaluated as expm1(-log1p(z^2)/2) to keep the digits lost by subtracting 1.
template <typename Real = double>
Real dirac_coulomb_exact(int n, int kappa) {
    if (kappa < 1 || kappa > n) {
        throw domain_error("dirac_coulomb_exact: requires 1 <= kappa <= n");
    }
    const Real a = alpha<Real>();
    const Real k = Real(kappa);
    const Real z = a / (Real(n) - k + std::sqrt(k * k - a * a));
    return Real(2) / (a * a) * std::expm1(-std::log1p(z * z) / 2);
}

/// E~ from a Dirac matrix eigenvalue lambda = E/(alpha m c^2): (2/alpha) lambda - 2/alpha^2.
template <typename Real = double>
Real tilde_from_dirac_eigenvalue(Real lambda) {
    const Real a = alpha<Real>();
    return Real(2) / a * lambda - Real(2) / (a * a);
}

/// E~ from lambda - 1/alpha, the eigenvalue measured from the rest-mass edge.
template <typename Real = double>
Real tilde_from_edge_offset(Real offset) {
    return Real(2) / alpha<Real>() * offset;
}

template <typename Real = double>
Real edge_offset_from_tilde(Real e_tilde) {
    return alpha<Real>() / Real(2) * e_tilde;
}

template <typename Real = double>
Real dirac_eigenvalue_from_tilde(Real e_tilde) {
    return Real(1) / alpha<Real>() + edge_offset_from_tilde(e_tilde);
}

/// A reference level for labeling: the exact energy and how many numerical eigenvalues
/// belong to it (2 for Dirac cells with n > kappa, else 1).
template <typename Real = double>
struct ReferenceLevel {
    LevelLabel label;
    Real e_tilde;
    int multiplicity = 1;
};

/// Coulomb reference ladder for one angular channel, n = lowest..lowest+levels-1.
template <typename Real = double>
std::vector<ReferenceLevel<Real>> coulomb_reference(Equation eq, int angular, int levels) {
    std::vector<ReferenceLevel<Real>> refs;
    const int lowest = eq == Equation::Schrodinger ? angular + 1 : angular;
    for (int n = lowest; n < lowest + levels; ++n) {
        LevelLabel label{n, eq, angular, std::nullopt};
        if (eq == Equation::Schrodinger) {
            refs.push_back({label, schrodinger_coulomb_exact<Real>(n), 1});
        } else {
            refs.push_back({label, dirac_coulomb_exact<Real>(n, angular), n > angular ? 2 : 1});
        }
    }
    return refs;
}

}  // namespace bispectra
