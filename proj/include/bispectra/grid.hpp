#pragma once

#include <bispectra/errors.hpp>

#include <cstddef>
#include <string>

namespace bispectra {

/// Uniform radial grid rho_j = j * delta_rho, j = 1..N, with the wavefunction pinned to zero
/// at rho_0 = 0 and at rho_{N+1}. The artificial infinity is rho_inf = N * delta_rho.
template <typename Real = double>
class RadialGrid {
public:
    RadialGrid(Real rho_inf, std::size_t n_points) : rho_inf_(rho_inf), n_points_(n_points), delta_(rho_inf / Real(n_points)) {
        if (!(rho_inf > 0)) {
            throw domain_error("RadialGrid: rho_inf must be positive");
        }
        if (n_points < 3) {
            throw domain_error("RadialGrid: at least 3 points required");
        }
    }

    Real rho_inf() const noexcept { return rho_inf_; }
    std::size_t size() const noexcept { return n_points_; }
    Real delta_rho() const noexcept { return delta_; }

    /// Radius of the j-th point, 1-based as in rho_j = j * delta_rho.
    Real rho(std::size_t j) const noexcept { return Real(j) * delta_; }

    friend bool operator==(const RadialGrid& a, const RadialGrid& b) noexcept {
        return a.rho_inf_ == b.rho_inf_ && a.n_points_ == b.n_points_;
    }

private:
    Real rho_inf_;
    std::size_t n_points_;
    Real delta_;
};

}  // namespace bispectra
