#pragma once

#include <bispectra/errors.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace bispectra {

/// LDL^T of a symmetric tridiagonal matrix (scalar pivots, no pivoting).
///
/// Used for shift-invert on the Schrodinger operator; the number of negative pivots is the
/// number of eigenvalues below the shift (Sylvester inertia).
template <typename Real = double>
class TridiagonalLDLT {
public:
    TridiagonalLDLT(std::span<const Real> diag, std::span<const Real> off) : pivots_(diag.size()), mult_(off.size()) {
        const std::size_t n = diag.size();
        Real scale = 0;
        for (std::size_t i = 0; i < n; ++i) {
            scale = std::max(scale, std::abs(diag[i]) + (i > 0 ? std::abs(off[i - 1]) : Real(0)) + (i + 1 < n ? std::abs(off[i]) : Real(0)));
        }
        const Real tiny = std::numeric_limits<Real>::epsilon() * scale * Real(n) * std::numeric_limits<Real>::epsilon();
        for (std::size_t i = 0; i < n; ++i) {
            Real d = diag[i];
            if (i > 0) {
                d -= mult_[i - 1] * off[i - 1];
            }
            if (std::abs(d) <= tiny) {
                throw numerical_error("TridiagonalLDLT: singular pivot (shift equals an eigenvalue)");
            }
            pivots_[i] = d;
            if (d < 0) {
                ++negative_;
            }
            if (i + 1 < n) {
                mult_[i] = off[i] / d;
            }
        }
    }

    std::size_t size() const noexcept { return pivots_.size(); }
    std::size_t negative_pivots() const noexcept { return negative_; }

    void solve(std::span<const Real> b, std::span<Real> x) const {
        const std::size_t n = pivots_.size();
        Real carry = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Real y = b[i] - (i > 0 ? mult_[i - 1] * carry : Real(0));
            x[i] = y;
            carry = y;
        }
        for (std::size_t i = 0; i < n; ++i) {
            x[i] /= pivots_[i];
        }
        for (std::size_t i = n - 1; i-- > 0;) {
            x[i] -= mult_[i] * x[i + 1];
        }
    }

private:
    std::vector<Real> pivots_;
    std::vector<Real> mult_;
    std::size_t negative_ = 0;
};

/// LDL^T of a symmetric block-tridiagonal matrix with 2x2 blocks, using the 2x2 diagonal
/// blocks as pivots (a fixed-pattern symmetric-indefinite factorization).
///
/// The matrix is given by its diagonal blocks A_j and super-diagonal blocks C_j, coupling
/// block j to block j+1. Factorization:
///   S_1 = A_1,  S_{j+1} = A_{j+1} - C_j^T S_j^{-1} C_j.
/// The inertia of the whole matrix is the sum of the inertias of the S_j.
template <typename Real = double>
class Block2LDLT {
public:
    using Block = std::array<Real, 4>;  // row-major 2x2

    Block2LDLT(std::span<const Block> diag_blocks, std::span<const Block> super_blocks)
        : inverse_pivots_(diag_blocks.size()), super_(super_blocks.begin(), super_blocks.end()) {
        const std::size_t nb = diag_blocks.size();
        const Real eps = std::numeric_limits<Real>::epsilon();
        Block s = diag_blocks[0];
        for (std::size_t j = 0; j < nb; ++j) {
            if (j > 0) {
                // s = A_j - C^T Sinv C with C = super_[j-1], Sinv = inverse_pivots_[j-1]
                const Block& c = super_[j - 1];
                const Block& si = inverse_pivots_[j - 1];
                const Block sc = mul(si, c);
                const Block ct_sc = mul(transpose(c), sc);
                const Block& a = diag_blocks[j];
                s = {a[0] - ct_sc[0], a[1] - ct_sc[1], a[2] - ct_sc[2], a[3] - ct_sc[3]};
            }
            const Real sym = Real(0.5) * (s[1] + s[2]);
            const Real det = s[0] * s[3] - sym * sym;
            const Real scale = std::abs(s[0] * s[3]) + sym * sym;
            if (!(std::abs(det) > Real(64) * eps * scale) || !std::isfinite(det)) {
                throw numerical_error("Block2LDLT: singular 2x2 pivot (shift equals an eigenvalue)");
            }
            if (det < 0) {
                negative_ += 1;
            } else if (s[0] + s[3] < 0) {
                negative_ += 2;
            }
            inverse_pivots_[j] = {s[3] / det, -sym / det, -sym / det, s[0] / det};
        }
    }

    std::size_t blocks() const noexcept { return inverse_pivots_.size(); }
    std::size_t size() const noexcept { return 2 * inverse_pivots_.size(); }
    std::size_t negative_pivots() const noexcept { return negative_; }

    void solve(std::span<const Real> b, std::span<Real> x) const {
        const std::size_t nb = inverse_pivots_.size();
        // L y = b, keeping S_j^{-1} y_j in x
        std::array<Real, 2> prev{0, 0};
        for (std::size_t j = 0; j < nb; ++j) {
            Real y0 = b[2 * j];
            Real y1 = b[2 * j + 1];
            if (j > 0) {
                const Block& c = super_[j - 1];
                y0 -= c[0] * prev[0] + c[2] * prev[1];
                y1 -= c[1] * prev[0] + c[3] * prev[1];
            }
            const Block& si = inverse_pivots_[j];
            prev = {si[0] * y0 + si[1] * y1, si[2] * y0 + si[3] * y1};
            x[2 * j] = prev[0];
            x[2 * j + 1] = prev[1];
        }
        // L^T x = z with L^T_{j,j+1} = S_j^{-1} C_j
        for (std::size_t j = nb - 1; j-- > 0;) {
            const Block& c = super_[j];
            const Real t0 = c[0] * x[2 * j + 2] + c[1] * x[2 * j + 3];
            const Real t1 = c[2] * x[2 * j + 2] + c[3] * x[2 * j + 3];
            const Block& si = inverse_pivots_[j];
            x[2 * j] -= si[0] * t0 + si[1] * t1;
            x[2 * j + 1] -= si[2] * t0 + si[3] * t1;
        }
    }

private:
    static Block mul(const Block& a, const Block& b) {
        return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
    }
    static Block transpose(const Block& a) { return {a[0], a[2], a[1], a[3]}; }

    std::vector<Block> inverse_pivots_;
    std::vector<Block> super_;
    std::size_t negative_ = 0;
};

}  // namespace bispectra
