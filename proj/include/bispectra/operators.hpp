#pragma once

#include <bispectra/banded_ldlt.hpp>
#include <bispectra/constants.hpp>
#include <bispectra/errors.hpp>
#include <bispectra/grid.hpp>
#include <bispectra/potentials.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace bispectra {

namespace detail {

template <typename Real>
void require_same_grid(const RadialGrid<Real>& grid, const PotentialSamples<Real>& samples, const char* who) {
    if (!(samples.grid == grid) || samples.values.size() != grid.size()) {
        throw domain_error(std::string(who) + ": potential samples were taken on a different grid");
    }
}

}  // namespace detail

/// Centered-difference radial Schrodinger operator
///   -u'' + [2V + l(l+1)/rho^2] u,
/// with u_0 = u_{N+1} = 0. Symmetric tridiagonal; eigenvalues are (2/alpha^2) E / (m c^2).
template <typename Real = double>
class SchrodingerOperator {
public:
    SchrodingerOperator(RadialGrid<Real> grid, std::vector<Real> diag, std::vector<Real> off, int ell)
        : grid_(grid), diag_(std::move(diag)), off_(std::move(off)), ell_(ell) {}

    const RadialGrid<Real>& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return diag_.size(); }
    int ell() const noexcept { return ell_; }
    std::span<const Real> diagonal() const noexcept { return diag_; }
    std::span<const Real> off_diagonal() const noexcept { return off_; }

    void apply(std::span<const Real> x, std::span<Real> y) const {
        const std::size_t n = diag_.size();
        for (std::size_t i = 0; i < n; ++i) {
            Real acc = diag_[i] * x[i];
            if (i > 0) acc += off_[i - 1] * x[i - 1];
            if (i + 1 < n) acc += off_[i] * x[i + 1];
            y[i] = acc;
        }
    }

    /// Factorization of (T - shift I).
    TridiagonalLDLT<Real> factor(Real shift) const {
        std::vector<Real> d(diag_);
        for (auto& v : d) v -= shift;
        return TridiagonalLDLT<Real>(d, off_);
    }

private:
    RadialGrid<Real> grid_;
    std::vector<Real> diag_;
    std::vector<Real> off_;
    int ell_;
};

template <typename Real = double>
SchrodingerOperator<Real> assemble_schrodinger(const RadialGrid<Real>& grid, const PotentialSamples<Real>& samples, int ell) {
    detail::require_same_grid(grid, samples, "assemble_schrodinger");
    if (ell < 0) {
        throw domain_error("assemble_schrodinger: ell must be >= 0");
    }
    const std::size_t n = grid.size();
    const Real h = grid.delta_rho();
    const Real inv_h2 = Real(1) / (h * h);
    const Real centrifugal = Real(ell) * Real(ell + 1);
    std::vector<Real> diag(n);
    for (std::size_t j = 1; j <= n; ++j) {
        const Real rho = grid.rho(j);
        diag[j - 1] = 2 * inv_h2 + 2 * samples.values[j - 1] + centrifugal / (rho * rho);
    }
    return SchrodingerOperator<Real>(grid, std::move(diag), std::vector<Real>(n - 1, -inv_h2), ell);
}

/// Centered-difference radial Dirac operator on the interleaved unknowns (u_1, v_1, u_2, ...).
///
/// Rows for u_j:  (alpha V_j + 1/alpha) u_j + (kappa/rho_j) v_j - (v_{j+1} - v_{j-1}) / (2 h)
/// Rows for v_j:  (kappa/rho_j) u_j + (alpha V_j - 1/alpha) v_j + (u_{j+1} - u_{j-1}) / (2 h)
/// Out-of-range neighbours are zero. The difference block enters both off-diagonal blocks
/// with opposite signs, so the matrix is exactly symmetric with bandwidth 3. Eigenvalues are
/// E / (alpha m c^2); the rest-mass edge 1/alpha is kept separate so that shifted matrices
/// near the edge can be formed without cancellation.
template <typename Real = double>
class DiracOperator {
public:
    DiracOperator(RadialGrid<Real> grid, std::vector<Real> alpha_v, int kappa, Real mass_term = Real(1) / alpha<Real>())
        : grid_(grid), alpha_v_(std::move(alpha_v)), kappa_(kappa), mass_(mass_term), half_inv_h_(Real(1) / (2 * grid.delta_rho())) {}

    const RadialGrid<Real>& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return 2 * alpha_v_.size(); }
    int kappa() const noexcept { return kappa_; }
    /// The rest-mass edge 1/alpha (or whatever mass term the operator was built with).
    Real edge() const noexcept { return mass_; }

    /// Entry (r, c) of the full matrix, zero outside the band.
    Real entry(std::size_t r, std::size_t c) const { return shifted_entry(r, c, -mass_) ; }

    /// Entry of (D - (edge + offset) I). With offset = -edge this is the plain matrix entry.
    Real shifted_entry(std::size_t r, std::size_t c, Real offset) const {
        const std::size_t jr = r / 2, jc = c / 2;
        const bool ur = r % 2 == 0, uc = c % 2 == 0;
        if (r == c) {
            return ur ? alpha_v_[jr] - offset : alpha_v_[jr] - 2 * mass_ - offset;
        }
        if (jr == jc) {
            return Real(kappa_) / grid_.rho(jr + 1);
        }
        if (jc == jr + 1) {
            if (!ur && uc) return half_inv_h_;   // v_j row, u_{j+1} column
            if (ur && !uc) return -half_inv_h_;  // u_j row, v_{j+1} column
            return 0;
        }
        if (jr == jc + 1) {
            return shifted_entry(c, r, offset);
        }
        return 0;
    }

    /// y = (D - (edge + offset) I) x.
    void apply_shifted(Real offset, std::span<const Real> x, std::span<Real> y) const {
        const std::size_t n = alpha_v_.size();
        for (std::size_t j = 0; j < n; ++j) {
            const Real c = Real(kappa_) / grid_.rho(j + 1);
            const Real u = x[2 * j], v = x[2 * j + 1];
            Real yu = (alpha_v_[j] - offset) * u + c * v;
            Real yv = c * u + (alpha_v_[j] - 2 * mass_ - offset) * v;
            if (j + 1 < n) {
                yu -= half_inv_h_ * x[2 * j + 3];
                yv += half_inv_h_ * x[2 * j + 2];
            }
            if (j > 0) {
                yu += half_inv_h_ * x[2 * j - 1];
                yv -= half_inv_h_ * x[2 * j - 2];
            }
            y[2 * j] = yu;
            y[2 * j + 1] = yv;
        }
    }

    void apply(std::span<const Real> x, std::span<Real> y) const { apply_shifted(-mass_, x, y); }

    /// Factorization of (D - (edge + offset) I) with 2x2 pivots per grid point.
    Block2LDLT<Real> factor_at_offset(Real offset) const {
        using Block = typename Block2LDLT<Real>::Block;
        const std::size_t n = alpha_v_.size();
        std::vector<Block> diag(n);
        std::vector<Block> super(n - 1, Block{0, -half_inv_h_, half_inv_h_, 0});
        for (std::size_t j = 0; j < n; ++j) {
            const Real c = Real(kappa_) / grid_.rho(j + 1);
            diag[j] = {alpha_v_[j] - offset, c, c, alpha_v_[j] - 2 * mass_ - offset};
        }
        return Block2LDLT<Real>(diag, super);
    }

    /// Factorization of (D - shift I).
    Block2LDLT<Real> factor(Real shift) const { return factor_at_offset(shift - mass_); }

private:
    RadialGrid<Real> grid_;
    std::vector<Real> alpha_v_;
    int kappa_;
    Real mass_;
    Real half_inv_h_;
};

template <typename Real = double>
DiracOperator<Real> assemble_dirac(const RadialGrid<Real>& grid, const PotentialSamples<Real>& samples, int kappa) {
    detail::require_same_grid(grid, samples, "assemble_dirac");
    if (kappa < 1) {
        throw domain_error("assemble_dirac: kappa must be >= 1");
    }
    std::vector<Real> alpha_v(samples.values.size());
    for (std::size_t j = 0; j < alpha_v.size(); ++j) {
        alpha_v[j] = alpha<Real>() * samples.values[j];
    }
    return DiracOperator<Real>(grid, std::move(alpha_v), kappa);
}

}  // namespace bispectra
