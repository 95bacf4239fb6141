#pragma once

#include <bispectra/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace bispectra {

template <typename Real>
using DenseMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using DenseVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// A symmetric linear operator known through its action on vectors.
template <typename Op, typename Real>
concept SymmetricOperator = requires(const Op& op, std::span<const Real> x, std::span<Real> y) {
    { op.size() } -> std::convertible_to<std::size_t>;
    op.apply(x, y);
};

enum class RitzEnd { Smallest, Largest, LargestMagnitude };

template <typename Real = double>
struct LanczosOptions {
    std::size_t block_size = 1;
    /// Basis size before a thick restart; 0 picks max(40, 4 * count + 4 * block_size).
    std::size_t max_basis = 0;
    /// Cap on operator applications.
    std::size_t max_applications = 20000;
    /// Ritz pairs are accepted when ||A y - theta y|| <= tol * max(|theta|, tol_floor).
    Real tol = Real(1e-10);
    Real tol_floor = Real(1);
    std::uint64_t seed = 0x5eed;
};

template <typename Real = double>
struct LanczosOutcome {
    std::vector<Real> values;     // ordered from the requested end inwards
    std::vector<Real> residuals;  // Lanczos residual estimates, same order
    DenseMatrix<Real> vectors;    // one column per value
    std::size_t applications = 0;
    std::size_t restarts = 0;
    bool converged = false;
};

namespace detail {

template <typename Real, typename Op>
void apply_block(const Op& op, const DenseMatrix<Real>& x, DenseMatrix<Real>& y) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        op.apply(std::span<const Real>(x.col(c).data(), static_cast<std::size_t>(x.rows())),
                 std::span<Real>(y.col(c).data(), static_cast<std::size_t>(y.rows())));
    }
}

// Orthonormalize the columns of w against basis (first `used` columns) and among themselves.
// Columns that vanish are replaced by random directions; the returned factor records only
// the genuine part.
template <typename Real>
DenseMatrix<Real> orthonormalize_block(DenseMatrix<Real>& w, const DenseMatrix<Real>& basis, Eigen::Index used,
                                       std::mt19937_64& rng) {
    const Eigen::Index b = w.cols();
    const Real eps = std::numeric_limits<Real>::epsilon();
    DenseMatrix<Real> r = DenseMatrix<Real>::Zero(b, b);
    std::normal_distribution<double> normal;
    for (Eigen::Index c = 0; c < b; ++c) {
        const Real original = w.col(c).norm();
        for (int pass = 0; pass < 2; ++pass) {
            if (used > 0) {
                const DenseVector<Real> h = basis.leftCols(used).transpose() * w.col(c);
                w.col(c) -= basis.leftCols(used) * h;
            }
            for (Eigen::Index p = 0; p < c; ++p) {
                const Real h = w.col(p).dot(w.col(c));
                if (pass == 0) r(p, c) = h; else r(p, c) += h;
                w.col(c) -= h * w.col(p);
            }
        }
        Real norm = w.col(c).norm();
        if (norm > Real(100) * eps * std::max(original, Real(1e-300))) {
            r(c, c) = norm;
            w.col(c) /= norm;
            continue;
        }
        // Invariant subspace reached in this direction: continue with a fresh random one.
        r(c, c) = 0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, c) = Real(normal(rng));
            for (int pass = 0; pass < 2; ++pass) {
                if (used > 0) {
                    const DenseVector<Real> h = basis.leftCols(used).transpose() * w.col(c);
                    w.col(c) -= basis.leftCols(used) * h;
                }
                for (Eigen::Index p = 0; p < c; ++p) w.col(c) -= w.col(p).dot(w.col(c)) * w.col(p);
            }
            norm = w.col(c).norm();
            if (norm > Real(1e-3)) break;
        }
        w.col(c) /= norm;
    }
    return r;
}

// Indices of theta ordered from the requested end inwards.
template <typename Real>
std::vector<Eigen::Index> ritz_order(const DenseVector<Real>& theta, RitzEnd end) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(theta.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    switch (end) {
        case RitzEnd::Smallest: break;
        case RitzEnd::Largest: std::reverse(idx.begin(), idx.end()); break;
        case RitzEnd::LargestMagnitude:
            std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return std::abs(theta(a)) > std::abs(theta(b)); });
            break;
    }
    return idx;
}

}  // namespace detail

/// Block Lanczos with full reorthogonalization and thick restart.
///
/// Finds the `count` eigenvalues of a symmetric operator at one end of its spectrum. The
/// projected matrix is kept dense, so after a restart (kept Ritz vectors plus the current
/// residual block) the recurrence continues unchanged. A block size of at least the
/// multiplicity of a (near-)degenerate cluster is needed to resolve all of its members.
template <typename Real = double, typename Op>
    requires SymmetricOperator<Op, Real>
LanczosOutcome<Real> block_lanczos(const Op& op, std::size_t count, RitzEnd end, const LanczosOptions<Real>& opt = {}) {
    const auto n = static_cast<Eigen::Index>(op.size());
    if (count < 1 || static_cast<Eigen::Index>(count) > n) {
        throw domain_error("block_lanczos: requires 1 <= count <= operator size");
    }
    if (!(opt.tol > 0) || opt.block_size < 1) {
        throw domain_error("block_lanczos: tol must be positive and block_size >= 1");
    }
    const auto k = static_cast<Eigen::Index>(count);
    const auto b = static_cast<Eigen::Index>(std::min<std::size_t>(opt.block_size, op.size()));
    std::mt19937_64 rng(opt.seed);

    LanczosOutcome<Real> out;

    // Small problems: the whole space is cheaper than a Krylov recurrence.
    Eigen::Index window = opt.max_basis ? static_cast<Eigen::Index>(opt.max_basis) : std::max<Eigen::Index>(40, 4 * k + 4 * b);
    window = (window / b) * b;
    if (n <= window + 2 * b || n <= k + 2 * b) {
        DenseMatrix<Real> dense(n, n);
        DenseMatrix<Real> eye = DenseMatrix<Real>::Identity(n, n);
        detail::apply_block(op, eye, dense);
        out.applications = static_cast<std::size_t>(n);
        dense = Real(0.5) * (dense + dense.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<DenseMatrix<Real>> es(dense);
        const auto order = detail::ritz_order<Real>(es.eigenvalues(), end);
        out.vectors.resize(n, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const Eigen::Index idx = order[static_cast<std::size_t>(i)];
            out.values.push_back(es.eigenvalues()(idx));
            out.vectors.col(i) = es.eigenvectors().col(idx);
            DenseVector<Real> r(n);
            op.apply(std::span<const Real>(out.vectors.col(i).data(), static_cast<std::size_t>(n)),
                     std::span<Real>(r.data(), static_cast<std::size_t>(n)));
            r -= out.values.back() * out.vectors.col(i);
            out.residuals.push_back(r.norm());
        }
        out.converged = true;
        return out;
    }

    DenseMatrix<Real> q = DenseMatrix<Real>::Zero(n, window + b);
    DenseMatrix<Real> t = DenseMatrix<Real>::Zero(window + b, window + b);
    {
        std::normal_distribution<double> normal;
        DenseMatrix<Real> start(n, b);
        for (Eigen::Index c = 0; c < b; ++c)
            for (Eigen::Index i = 0; i < n; ++i) start(i, c) = Real(normal(rng));
        detail::orthonormalize_block<Real>(start, q, 0, rng);
        q.leftCols(b) = start;
    }
    Eigen::Index used = b;  // basis columns; the last block has not been multiplied yet
    DenseMatrix<Real> w(n, b);

    while (true) {
        const DenseMatrix<Real> last = q.middleCols(used - b, b);
        detail::apply_block(op, last, w);
        out.applications += static_cast<std::size_t>(b);

        DenseMatrix<Real> h = q.leftCols(used).transpose() * w;
        w -= q.leftCols(used) * h;
        const DenseMatrix<Real> h2 = q.leftCols(used).transpose() * w;
        w -= q.leftCols(used) * h2;
        h += h2;
        t.block(0, used - b, used, b) = h;
        t.block(used - b, 0, b, used) = h.transpose();
        const DenseMatrix<Real> diag_block = t.block(used - b, used - b, b, b);
        t.block(used - b, used - b, b, b) = Real(0.5) * (diag_block + diag_block.transpose());

        const DenseMatrix<Real> beta = detail::orthonormalize_block<Real>(w, q, used, rng);

        Eigen::SelfAdjointEigenSolver<DenseMatrix<Real>> es(t.topLeftCorner(used, used));
        const auto& theta = es.eigenvalues();
        const auto& s = es.eigenvectors();
        const auto order = detail::ritz_order<Real>(theta, end);
        auto wanted_index = [&](Eigen::Index i, Eigen::Index) { return order[static_cast<std::size_t>(i)]; };
        const Eigen::Index have = std::min<Eigen::Index>(k, used);
        bool done = have == k;
        std::vector<Real> res(static_cast<std::size_t>(have));
        for (Eigen::Index i = 0; i < have; ++i) {
            const Eigen::Index idx = wanted_index(i, used);
            res[static_cast<std::size_t>(i)] = (beta * s.block(used - b, idx, b, 1)).norm();
            if (!(res[static_cast<std::size_t>(i)] <= opt.tol * std::max(std::abs(theta(idx)), opt.tol_floor))) {
                done = false;
            }
        }
        const bool exhausted = out.applications >= opt.max_applications;
        if (done || exhausted) {
            out.vectors.resize(n, have);
            for (Eigen::Index i = 0; i < have; ++i) {
                const Eigen::Index idx = wanted_index(i, used);
                out.values.push_back(theta(idx));
                out.residuals.push_back(res[static_cast<std::size_t>(i)]);
                out.vectors.col(i) = q.leftCols(used) * s.col(idx);
            }
            out.converged = done;
            return out;
        }

        if (used + b <= window) {
            q.middleCols(used, b) = w;
            t.block(used, used - b, b, b) = beta;
            t.block(used - b, used, b, b) = beta.transpose();
            used += b;
            continue;
        }

        // Thick restart: keep the best Ritz vectors and append the residual block.
        const Eigen::Index keep = std::min<Eigen::Index>(used - b, std::max<Eigen::Index>(k + b, (used - b) / 2));
        DenseMatrix<Real> kept_s(used, keep);
        DenseVector<Real> kept_theta(keep);
        for (Eigen::Index i = 0; i < keep; ++i) {
            const Eigen::Index idx = wanted_index(i, used);
            kept_s.col(i) = s.col(idx);
            kept_theta(i) = theta(idx);
        }
        const DenseMatrix<Real> ritz = q.leftCols(used) * kept_s;
        const DenseMatrix<Real> coupling = beta * kept_s.bottomRows(b);
        q.leftCols(keep) = ritz;
        q.middleCols(keep, b) = w;
        t.setZero();
        t.topLeftCorner(keep, keep) = kept_theta.asDiagonal();
        t.block(keep, 0, b, keep) = coupling;
        t.block(0, keep, keep, b) = coupling.transpose();
        used = keep + b;
        ++out.restarts;
    }
}

}  // namespace bispectra
