#pragma once

#include <bispectra/banded_ldlt.hpp>
#include <bispectra/constants.hpp>
#include <bispectra/errors.hpp>
#include <bispectra/lanczos.hpp>
#include <bispectra/operators.hpp>
#include <bispectra/reference.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace bispectra {

enum class TargetKind { SmallestAlgebraic, NearestToShift };

template <typename Real = double>
struct EigenTarget {
    TargetKind kind = TargetKind::SmallestAlgebraic;
    Real shift = 0;

    static EigenTarget smallest() { return {TargetKind::SmallestAlgebraic, 0}; }
    static EigenTarget nearest(Real sigma) { return {TargetKind::NearestToShift, sigma}; }
};

template <typename Real = double>
struct EigenRequest {
    std::size_t count = 1;
    EigenTarget<Real> target{};
    Real tol = Real(1e-10);
    std::size_t max_iterations = 20000;  // operator applications
    std::size_t block_size = 1;
    bool want_vectors = false;
    std::uint64_t seed = 0x5eed;

    void validate() const {
        if (count < 1 || !(tol > 0)) {
            throw domain_error("EigenRequest: count >= 1 and tol > 0 required");
        }
    }
};

template <typename Real = double>
struct EigenResult {
    std::vector<Real> eigenvalues;
    /// ||A x - lambda x|| / ||x|| per eigenvalue. For bisection without vectors, the half
    /// width of the final bracket.
    std::vector<Real> residual_norms;
    std::size_t iterations = 0;
    std::optional<DenseMatrix<Real>> eigenvectors;
    /// Dirac only: lambda - 1/alpha, carried separately because lambda itself is ~137 and
    /// has lost the digits that E~ needs.
    std::vector<Real> edge_offsets;
    std::vector<std::string> diagnostics;
};

/// A solver gave up. The partial result holds whatever had been computed.
template <typename Real = double>
class eigensolve_error : public numerical_error {
public:
    eigensolve_error(const std::string& what, EigenResult<Real> partial) : numerical_error(what), partial_(std::move(partial)) {}
    const EigenResult<Real>& partial() const noexcept { return partial_; }

private:
    EigenResult<Real> partial_;
};

// ---------------------------------------------------------------------------------------
// Sturm bisection

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly below x.
template <typename Real = double>
std::size_t sturm_count(std::span<const Real> diag, std::span<const Real> off, Real x) {
    const Real tiny = std::numeric_limits<Real>::min() / std::numeric_limits<Real>::epsilon();
    std::size_t count = 0;
    Real q = 1;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        q = diag[i] - x - (i > 0 ? off[i - 1] * off[i - 1] / q : Real(0));
        if (std::abs(q) < tiny) q = -tiny;
        if (q < 0) ++count;
    }
    return count;
}

namespace detail {

// (T - shift) x = b by Gaussian elimination with partial pivoting; robust when shift is an
// eigenvalue to working precision, which is exactly the inverse-iteration case.
template <typename Real>
std::vector<Real> solve_tridiagonal_pivoted(std::span<const Real> diag, std::span<const Real> off, Real shift, std::vector<Real> b) {
    const std::size_t n = diag.size();
    std::vector<Real> d(n), du(n, 0), du2(n, 0), dl(n, 0);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        du[i] = off[i];
        dl[i] = off[i];
    }
    const Real tiny = std::numeric_limits<Real>::epsilon() * std::numeric_limits<Real>::epsilon();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0) d[i] = tiny;
            const Real f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0;
        } else {
            const Real f = d[i] / dl[i];
            d[i] = dl[i];
            std::swap(du[i], d[i + 1]);
            d[i + 1] -= f * du[i];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= f * b[i];
        }
    }
    if (d[n - 1] == 0) d[n - 1] = tiny;
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    return b;
}

template <typename Real>
Real tridiagonal_residual(std::span<const Real> diag, std::span<const Real> off, Real lambda, const DenseVector<Real>& x) {
    const std::size_t n = diag.size();
    Real acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Real r = (diag[i] - lambda) * x(static_cast<Eigen::Index>(i));
        if (i > 0) r += off[i - 1] * x(static_cast<Eigen::Index>(i - 1));
        if (i + 1 < n) r += off[i] * x(static_cast<Eigen::Index>(i + 1));
        acc += r * r;
    }
    return std::sqrt(acc) / x.norm();
}

}  // namespace detail

/// The k algebraically smallest eigenvalues of a symmetric tridiagonal matrix by Sturm
/// bisection, each bracketed to width <= tol * max(1, |lambda|) or to the resolution of the
/// arithmetic. With want_vectors, eigenvectors come from inverse iteration and
/// residual_norms are true residuals.
template <typename Real = double>
EigenResult<Real> tridiag_smallest(std::span<const Real> diag, std::span<const Real> off, std::size_t k, Real tol,
                                   bool want_vectors = false) {
    const std::size_t n = diag.size();
    if (k < 1 || k > n || off.size() + 1 != n) {
        throw domain_error("tridiag_smallest: requires 1 <= k <= N and N-1 off-diagonal entries");
    }
    if (!(tol > 0)) {
        throw domain_error("tridiag_smallest: tol must be positive");
    }
    Real lo = std::numeric_limits<Real>::max(), hi = std::numeric_limits<Real>::lowest();
    for (std::size_t i = 0; i < n; ++i) {
        const Real radius = (i > 0 ? std::abs(off[i - 1]) : Real(0)) + (i + 1 < n ? std::abs(off[i]) : Real(0));
        lo = std::min(lo, diag[i] - radius);
        hi = std::max(hi, diag[i] + radius);
    }
    const Real pad = std::numeric_limits<Real>::epsilon() * std::max(std::abs(lo), std::abs(hi)) * Real(4) + std::numeric_limits<Real>::min();
    lo -= pad;
    hi += pad;

    EigenResult<Real> result;
    Real floor = lo;
    for (std::size_t i = 0; i < k; ++i) {
        Real a = floor, b = hi;
        while (true) {
            const Real mid = a + (b - a) / 2;
            if (!(mid > a && mid < b) || (b - a) <= tol * std::max(Real(1), std::abs(mid))) {
                break;
            }
            if (sturm_count<Real>(diag, off, mid) > i) {
                b = mid;
            } else {
                a = mid;
            }
            ++result.iterations;
        }
        result.eigenvalues.push_back(a + (b - a) / 2);
        result.residual_norms.push_back((b - a) / 2);
        floor = a;
    }

    if (want_vectors) {
        DenseMatrix<Real> vecs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<Real> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = Real(1) + Real(j % 7) / Real(10);
            for (int it = 0; it < 3; ++it) {
                x = detail::solve_tridiagonal_pivoted<Real>(diag, off, result.eigenvalues[i], std::move(x));
                Real norm = 0;
                for (Real v : x) norm += v * v;
                norm = std::sqrt(norm);
                for (Real& v : x) v /= norm;
            }
            auto col = vecs.col(static_cast<Eigen::Index>(i));
            for (std::size_t j = 0; j < n; ++j) col(static_cast<Eigen::Index>(j)) = x[j];
            // Nearly equal eigenvalues would share a direction; keep them apart.
            for (std::size_t p = 0; p < i; ++p) {
                auto prev = vecs.col(static_cast<Eigen::Index>(p));
                col -= prev.dot(col) * prev;
            }
            col.normalize();
            result.residual_norms[i] = detail::tridiagonal_residual<Real>(diag, off, result.eigenvalues[i], col);
        }
        result.eigenvectors = std::move(vecs);
    }
    return result;
}

template <typename Real = double>
EigenResult<Real> tridiag_smallest(const SchrodingerOperator<Real>& op, std::size_t k, Real tol, bool want_vectors = false) {
    return tridiag_smallest<Real>(op.diagonal(), op.off_diagonal(), k, tol, want_vectors);
}

// ---------------------------------------------------------------------------------------
// Lanczos

namespace detail {

template <typename Factor>
struct InverseOperator {
    const Factor& factor;
    std::size_t n;
    std::size_t size() const { return n; }
    template <typename Real>
    void apply(std::span<const Real> x, std::span<Real> y) const {
        factor.solve(x, y);
    }
};

template <typename Real, typename Op>
Real direct_residual(const Op& op, Real lambda, const auto& x) {
    const auto n = x.size();
    DenseVector<Real> y(n);
    const DenseVector<Real> xv = x;
    op.apply(std::span<const Real>(xv.data(), static_cast<std::size_t>(n)), std::span<Real>(y.data(), static_cast<std::size_t>(n)));
    return (y - lambda * xv).norm() / xv.norm();
}

}  // namespace detail

template <typename Op, typename Real>
concept ShiftFactorizable = SymmetricOperator<Op, Real> && requires(const Op& op, Real shift) { op.factor(shift); };

/// Lanczos for a few eigenvalues of a symmetric operator.
///
/// SmallestAlgebraic runs on the plain matrix-vector product. NearestToShift runs on
/// (A - sigma I)^{-1}, which needs an operator that can factor itself, and returns the
/// eigenvalues closest to sigma in order of distance.
template <typename Real = double, typename Op>
    requires SymmetricOperator<Op, Real>
EigenResult<Real> lanczos_lowest(const Op& op, const EigenRequest<Real>& req) {
    req.validate();
    LanczosOptions<Real> opt;
    opt.block_size = req.block_size;
    opt.max_applications = req.max_iterations;
    opt.tol = req.tol;
    opt.seed = req.seed;

    EigenResult<Real> result;
    LanczosOutcome<Real> run;
    Real sigma = 0;
    if (req.target.kind == TargetKind::SmallestAlgebraic) {
        run = block_lanczos<Real>(op, req.count, RitzEnd::Smallest, opt);
        result.eigenvalues = run.values;
    } else {
        if constexpr (ShiftFactorizable<Op, Real>) {
            sigma = req.target.shift;
            const auto factor = op.factor(sigma);
            detail::InverseOperator<decltype(factor)> inv{factor, op.size()};
            run = block_lanczos<Real>(inv, req.count, RitzEnd::LargestMagnitude, opt);
            for (Real mu : run.values) result.eigenvalues.push_back(sigma + Real(1) / mu);
        } else {
            throw domain_error("lanczos_lowest: NearestToShift needs an operator with factor(shift)");
        }
    }
    result.iterations = run.applications;
    for (std::size_t i = 0; i < result.eigenvalues.size(); ++i) {
        result.residual_norms.push_back(detail::direct_residual<Real>(op, result.eigenvalues[i], run.vectors.col(static_cast<Eigen::Index>(i))));
    }
    if (req.want_vectors) {
        result.eigenvectors = run.vectors;
    }
    if (!run.converged) {
        std::ostringstream msg;
        msg << "lanczos_lowest: not converged after " << run.applications << " operator applications";
        result.diagnostics.push_back(msg.str());
        throw eigensolve_error<Real>(msg.str(), std::move(result));
    }
    return result;
}

// ---------------------------------------------------------------------------------------
// Dirac bound states

template <typename Real = double>
struct BoundStateOptions {
    /// Bound states are searched in (edge - floor_fraction * edge, edge).
    Real floor_fraction = Real(1e-3);
    /// Place the Lanczos shift below the deepest bound state found by inertia counting
    /// (at E~_shift = 2 E~_deepest - 1) instead of at the window floor.
    bool adaptive_shift = true;
    std::size_t block_size = 2;
    /// Convergence tolerance for Ritz values of the inverted operator (relative).
    Real lanczos_tol = Real(1e-11);
    std::size_t max_applications = 60000;
    std::uint64_t seed = 0x5eed;
};

namespace detail {

template <typename Real>
struct ShiftedFactor {
    Block2LDLT<Real> factor;
    Real offset;
};

// Factor D - (edge + offset) I, nudging the offset if it lands on an eigenvalue.
template <typename Real>
ShiftedFactor<Real> factor_with_retry(const DiracOperator<Real>& op, Real offset, int retries = 3) {
    for (int attempt = 0;; ++attempt) {
        try {
            return {op.factor_at_offset(offset), offset};
        } catch (const numerical_error&) {
            if (attempt >= retries) throw;
            offset *= Real(1) + Real(1e-7) * Real(attempt + 1);
            if (offset == 0) offset = -std::numeric_limits<Real>::epsilon();
        }
    }
}

template <typename Real>
std::size_t negatives_at(const DiracOperator<Real>& op, Real offset) {
    return factor_with_retry(op, offset).factor.negative_pivots();
}

}  // namespace detail

/// Bound states of the Dirac operator: the k eigenvalues just below the rest-mass edge.
///
/// The window (edge - floor_fraction * edge, edge) is sized by Sylvester inertia of two
/// 2x2-pivot LDL^T factorizations. Block Lanczos on (D - sigma I)^{-1} then finds the k
/// largest inverted eigenvalues; the block size of 2 resolves the near-degenerate pairs the
/// centered stencil produces. A final inertia count checks that no eigenvalue between sigma
/// and the last one returned was missed, and one step of inverse iteration followed by
/// Rayleigh-Ritz against D itself fixes the eigenvalues and vectors.
template <typename Real = double>
EigenResult<Real> shift_invert_bound_states(const DiracOperator<Real>& op, std::size_t k, Real tol,
                                            const BoundStateOptions<Real>& opts = {}) {
    if (k < 1 || !(tol > 0)) {
        throw domain_error("shift_invert_bound_states: requires k >= 1 and tol > 0");
    }
    EigenResult<Real> result;
    const Real edge = op.edge();
    const Real floor_offset = -opts.floor_fraction * edge;
    const std::size_t below_floor = detail::negatives_at(op, floor_offset);
    const std::size_t below_edge = detail::negatives_at(op, Real(0));
    const std::size_t in_window = below_edge - below_floor;
    const std::size_t want = std::min(k, in_window);
    if (want < k) {
        std::ostringstream msg;
        msg << "only " << in_window << " eigenvalue(s) inside the bound-state window, " << k << " requested";
        result.diagnostics.push_back(msg.str());
    }
    if (want == 0) {
        return result;
    }

    Real shift_offset = floor_offset;
    if (opts.adaptive_shift) {
        Real lo = floor_offset, hi = 0;
        for (int it = 0; it < 40; ++it) {
            const Real mid = lo + (hi - lo) / 2;
            if (detail::negatives_at(op, mid) > below_floor) hi = mid; else lo = mid;
        }
        shift_offset = std::max(floor_offset, 2 * lo - alpha<Real>() / 2);
    }
    auto shifted = detail::factor_with_retry(op, shift_offset);
    shift_offset = shifted.offset;
    const std::size_t below_shift = shifted.factor.negative_pivots();

    detail::InverseOperator<Block2LDLT<Real>> inv{shifted.factor, op.size()};
    LanczosOptions<Real> lopt;
    lopt.block_size = opts.block_size;
    lopt.tol = opts.lanczos_tol;
    lopt.max_applications = opts.max_applications;
    lopt.seed = opts.seed;

    LanczosOutcome<Real> run;
    std::size_t missed = 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        run = block_lanczos<Real>(inv, want, RitzEnd::Largest, lopt);
        result.iterations += run.applications;
        if (!run.converged) break;
        // Everything in (shift, top of what we found] must have been found.
        const Real top = shift_offset + Real(1) / run.values.back();
        const Real slack = Real(1e-9) * std::abs(top) + Real(64) * std::numeric_limits<Real>::epsilon() * edge;
        const std::size_t inside = detail::negatives_at(op, top + slack) - below_shift;
        missed = inside > want ? inside - want : 0;
        if (missed == 0) break;
        lopt.block_size += 1;
        lopt.seed += 1;
    }
    if (missed > 0) {
        result.diagnostics.push_back("inertia count shows " + std::to_string(missed) + " eigenvalue(s) skipped by Lanczos");
    }

    // One inverse-iteration step on the Ritz block, then Rayleigh-Ritz with D - edge I.
    const auto n = static_cast<Eigen::Index>(op.size());
    const auto m = static_cast<Eigen::Index>(run.values.size());
    DenseMatrix<Real> y(n, m);
    detail::apply_block(inv, run.vectors, y);
    Eigen::HouseholderQR<DenseMatrix<Real>> qr(y);
    const DenseMatrix<Real> basis = qr.householderQ() * DenseMatrix<Real>::Identity(n, m);
    DenseMatrix<Real> image(n, m);
    for (Eigen::Index c = 0; c < m; ++c) {
        op.apply_shifted(Real(0), std::span<const Real>(basis.col(c).data(), static_cast<std::size_t>(n)),
                         std::span<Real>(image.col(c).data(), static_cast<std::size_t>(n)));
    }
    DenseMatrix<Real> projected = basis.transpose() * image;
    projected = Real(0.5) * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<DenseMatrix<Real>> es(projected);
    const DenseMatrix<Real> vectors = basis * es.eigenvectors();
    const DenseMatrix<Real> images = image * es.eigenvectors();

    for (Eigen::Index i = 0; i < m; ++i) {
        const Real offset = es.eigenvalues()(i);
        result.edge_offsets.push_back(offset);
        result.eigenvalues.push_back(edge + offset);
        result.residual_norms.push_back((images.col(i) - offset * vectors.col(i)).norm());
    }
    result.eigenvectors = vectors;

    if (!run.converged) {
        std::ostringstream msg;
        msg << "shift_invert_bound_states: Lanczos not converged after " << run.applications << " applications";
        result.diagnostics.push_back(msg.str());
        throw eigensolve_error<Real>(msg.str(), std::move(result));
    }
    for (std::size_t i = 0; i < result.residual_norms.size(); ++i) {
        if (!(result.residual_norms[i] <= tol)) {
            std::ostringstream msg;
            msg.precision(3);
            msg << "residual " << result.residual_norms[i] << " above tolerance " << tol << " for eigenvalue " << i;
            result.diagnostics.push_back(msg.str());
        }
    }
    return result;
}

// ---------------------------------------------------------------------------------------
// Labeling

/// Fraction of the large component's grid-to-grid energy that is smooth:
///   sum (u_{j+1} + u_j)^2 / sum [(u_{j+1} + u_j)^2 + (u_{j+1} - u_j)^2].
/// Near 1 for slowly varying u, near 0 when u alternates in sign from point to point.
template <typename Real = double>
Real large_component_smoothness(const auto& interleaved) {
    const Eigen::Index points = interleaved.size() / 2;
    Real plus = 0, minus = 0;
    for (Eigen::Index j = 0; j + 1 < points; ++j) {
        const Real a = interleaved(2 * j), b = interleaved(2 * j + 2);
        plus += (a + b) * (a + b);
        minus += (b - a) * (b - a);
    }
    return plus + minus > 0 ? plus / (plus + minus) : Real(0.5);
}

/// Sum of squared neighbour differences of a component (stride 2 from `first`), optionally
/// after undoing a point-to-point sign alternation, over its squared norm.
template <typename Real = double>
Real oscillation_energy(const auto& interleaved, bool alternating, Eigen::Index first = 0) {
    const Eigen::Index points = interleaved.size() / 2;
    Real diff = 0, norm = 0;
    for (Eigen::Index j = 0; j < points; ++j) {
        const Real a = interleaved(2 * j + first);
        norm += a * a;
        if (j + 1 < points) {
            const Real b = alternating ? -interleaved(2 * j + 2 + first) : interleaved(2 * j + 2 + first);
            diff += (b - a) * (b - a);
        }
    }
    return norm > 0 ? diff / norm : Real(0);
}

/// Orbital sublabel of each Dirac eigenvector: l = kappa - 1 when the large component
/// alternates point to point, l = kappa when it is smooth. Inside a pair of eigenvalues
/// closer than `pair_tol` (in E~) the less smooth vector takes l = kappa - 1, so that a
/// degenerate pair, whose vectors are arbitrary mixtures, is still split one of each.
template <typename Real = double>
std::vector<int> dirac_orbitals(const EigenResult<Real>& result, int kappa, Real pair_tol = Real(1e-9)) {
    if (!result.eigenvectors) {
        throw domain_error("dirac_orbitals: eigenvectors required");
    }
    const auto& vecs = *result.eigenvectors;
    const std::size_t m = static_cast<std::size_t>(vecs.cols());
    std::vector<Real> smooth(m);
    std::vector<int> orbital(m);
    for (std::size_t i = 0; i < m; ++i) {
        smooth[i] = large_component_smoothness<Real>(vecs.col(static_cast<Eigen::Index>(i)));
        orbital[i] = smooth[i] < Real(0.5) ? kappa - 1 : kappa;
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const Real gap = std::abs(tilde_from_edge_offset(result.edge_offsets[i + 1] - result.edge_offsets[i]));
        if (gap < pair_tol && orbital[i] == orbital[i + 1]) {
            const bool first_rougher = smooth[i] <= smooth[i + 1];
            orbital[i] = first_rougher ? kappa - 1 : kappa;
            orbital[i + 1] = first_rougher ? kappa : kappa - 1;
            ++i;
        }
    }
    return orbital;
}

/// Label energies by proximity to a reference ladder.
///
/// Each energy takes the label of the nearest reference level (ties toward lower n). Cells
/// of multiplicity 2 keep their members in ascending order. A level is flagged ambiguous when
/// the second-nearest reference is less than twice as far as the nearest, or when a cell
/// receives more energies than its multiplicity.
template <typename Real = double>
Spectrum<Real> label_levels(std::span<const Real> e_tilde, std::span<const Real> residuals, std::span<const ReferenceLevel<Real>> reference) {
    Spectrum<Real> spectrum;
    if (e_tilde.empty()) {
        return spectrum;
    }
    if (reference.empty()) {
        throw domain_error("label_levels: empty reference");
    }
    std::vector<int> hits(reference.size(), 0);
    std::vector<std::size_t> cell(e_tilde.size());
    for (std::size_t i = 0; i < e_tilde.size(); ++i) {
        std::size_t best = 0;
        Real best_d = std::numeric_limits<Real>::infinity(), second_d = std::numeric_limits<Real>::infinity();
        for (std::size_t r = 0; r < reference.size(); ++r) {
            const Real d = std::abs(e_tilde[i] - reference[r].e_tilde);
            if (d < best_d || (d == best_d && reference[r].label.n < reference[best].label.n)) {
                second_d = best_d;
                best_d = d;
                best = r;
            } else if (d < second_d) {
                second_d = d;
            }
        }
        cell[i] = best;
        ++hits[best];
        SpectrumLevel<Real> level;
        level.label = reference[best].label;
        level.e_tilde = e_tilde[i];
        level.residual = i < residuals.size() ? residuals[i] : Real(0);
        level.ambiguous = reference.size() > 1 && second_d < 2 * best_d;
        spectrum.levels.push_back(level);
    }
    for (std::size_t i = 0; i < e_tilde.size(); ++i) {
        if (hits[cell[i]] > reference[cell[i]].multiplicity) {
            spectrum.levels[i].ambiguous = true;
        }
    }
    std::stable_sort(spectrum.levels.begin(), spectrum.levels.end(), [](const auto& a, const auto& b) {
        if (a.label.n != b.label.n) return a.label.n < b.label.n;
        return a.e_tilde < b.e_tilde;
    });
    for (const auto& level : spectrum.levels) {
        if (level.ambiguous) {
            spectrum.diagnostics.push_back("ambiguous label n=" + std::to_string(level.label.n) + " " + level.label.angular_text());
        }
    }
    return spectrum;
}

/// Label energies that are already split into orbital branches by counting within each
/// branch: branch l = kappa - 1 starts at n = kappa, branch l = kappa at n = kappa + 1 (for
/// Schrodinger, the single branch l starts at n = l + 1). `levels` principal numbers are kept
/// per channel; missing members are reported in diagnostics.
template <typename Real = double>
Spectrum<Real> label_by_branch(Equation eq, int angular, int levels, std::span<const Real> e_tilde, std::span<const Real> residuals,
                               std::span<const int> orbitals) {
    Spectrum<Real> spectrum;
    struct Item {
        Real e;
        Real res;
        int orbital;
    };
    std::vector<Item> items;
    for (std::size_t i = 0; i < e_tilde.size(); ++i) {
        items.push_back({e_tilde[i], i < residuals.size() ? residuals[i] : Real(0),
                         eq == Equation::Schrodinger ? angular : orbitals[i]});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.e < b.e; });
    const int first_n = eq == Equation::Schrodinger ? angular + 1 : angular;
    const int last_n = first_n + levels - 1;
    std::vector<int> branches = eq == Equation::Schrodinger ? std::vector<int>{angular} : std::vector<int>{angular - 1, angular};
    for (int branch : branches) {
        int n = eq == Equation::Schrodinger ? angular + 1 : (branch == angular - 1 ? angular : angular + 1);
        for (const Item& item : items) {
            if (item.orbital != branch) continue;
            if (n > last_n) break;
            SpectrumLevel<Real> level;
            level.label = {n, eq, angular, eq == Equation::Dirac ? std::optional<int>(branch) : std::nullopt};
            level.e_tilde = item.e;
            level.residual = item.res;
            spectrum.levels.push_back(level);
            ++n;
        }
        const int expected_last = last_n;
        if (n <= expected_last) {
            LevelLabel missing{n, eq, angular, eq == Equation::Dirac ? std::optional<int>(branch) : std::nullopt};
            spectrum.diagnostics.push_back("missing level n=" + std::to_string(n) + " " + missing.angular_text());
        }
    }
    std::stable_sort(spectrum.levels.begin(), spectrum.levels.end(), [](const auto& a, const auto& b) {
        if (a.label.n != b.label.n) return a.label.n < b.label.n;
        return a.e_tilde < b.e_tilde;
    });
    return spectrum;
}

}  // namespace bispectra
