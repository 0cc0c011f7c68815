#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "cosym/dual.hpp"
#include "cosym/errors.hpp"

namespace cosym {

/// Dense row-major matrix over an arbitrary scalar (used for form
/// coefficients evaluated at dual-number level; sizes here are tiny).
template <class S>
struct Mat {
    int rows = 0, cols = 0;
    std::vector<S> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, S(0.0)) {}

    S& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const S& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

template <class S>
using Vec = std::vector<S>;

inline Eigen::MatrixXd to_eigen(const Mat<double>& m) {
    Eigen::MatrixXd r(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(i, j) = m(i, j);
    return r;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) r(static_cast<Eigen::Index>(i)) = v[i];
    return r;
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

/// Square solve by Gaussian elimination with partial pivoting, templated so
/// the same path runs at dual-number level (pivot comparisons use values).
template <class S>
Vec<S> solve_square(Mat<S> A, Vec<S> b) {
    const int n = A.rows;
    if (A.cols != n || static_cast<int>(b.size()) != n)
        throw PreconditionViolation("solve_square: shape mismatch");
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(value_of(A(k, k)));
        for (int i = k + 1; i < n; ++i) {
            double m = std::abs(value_of(A(i, k)));
            if (m > best) {
                best = m;
                piv = i;
            }
        }
        if (best == 0.0) throw SingularFlat("solve_square: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            S f = A(i, k) / A(k, k);
            for (int j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec<S> x(n, S(0.0));
    for (int i = n - 1; i >= 0; --i) {
        S s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return x;
}

/// Least-squares solve of an overdetermined system via normal equations.
/// Condition numbers here stay O(1) (Reeb/Hamiltonian solves on valid
/// structures), so the squaring is harmless and the path stays generic.
template <class S>
Vec<S> solve_least_squares(const Mat<S>& A, const Vec<S>& b) {
    const int m = A.rows, n = A.cols;
    if (static_cast<int>(b.size()) != m)
        throw PreconditionViolation("solve_least_squares: shape mismatch");
    Mat<S> ata(n, n);
    Vec<S> atb(n, S(0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            S s(0.0);
            for (int k = 0; k < m; ++k) s += A(k, i) * A(k, j);
            ata(i, j) = s;
        }
        S s(0.0);
        for (int k = 0; k < m; ++k) s += A(k, i) * b[k];
        atb[i] = s;
    }
    return solve_square(std::move(ata), std::move(atb));
}

/// Rank thresholding parameters shared by all rank decisions.
struct RankPolicy {
    double rel_tol = 1e-10;  ///< tau = rel_tol * sigma_max
    double band_lo = 0.1;    ///< ambiguity band [band_lo*tau, band_hi*tau]
    double band_hi = 10.0;
};

/// Number of singular values above tau = rel_tol*max(sigma_max, scale_hint).
/// Throws ToleranceAmbiguity when a singular value falls inside the ambiguity
/// band, instead of silently picking a side. The scale hint matters when the
/// matrix is a contraction of something larger (e.g. omega against a kernel
/// vector): a numerically-zero result must not be ranked against its own
/// rounding noise.
inline int rank_from_singular_values(const Eigen::VectorXd& sv, const RankPolicy& pol = {},
                                     double scale_hint = 0.0) {
    const double smax = std::max(sv.size() ? sv(0) : 0.0, scale_hint);
    if (smax == 0.0) return 0;
    const double tau = pol.rel_tol * smax;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        const double s = sv(i);
        if (s > pol.band_lo * tau && s < pol.band_hi * tau) {
            std::ostringstream os;
            os << "singular value " << s << " inside ambiguity band ["
               << pol.band_lo * tau << ", " << pol.band_hi * tau << "]";
            throw ToleranceAmbiguity(os.str());
        }
        if (s >= pol.band_hi * tau) ++rank;
    }
    return rank;
}

/// Orthonormal basis of the nullspace of A (right singular vectors for
/// singular values at or below threshold).
inline Eigen::MatrixXd nullspace(const Eigen::MatrixXd& A, const RankPolicy& pol = {},
                                 double scale_hint = 0.0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const int r = rank_from_singular_values(svd.singularValues(), pol, scale_hint);
    const int n = static_cast<int>(A.cols());
    return svd.matrixV().rightCols(n - r);
}

inline int rank_of(const Eigen::MatrixXd& A, const RankPolicy& pol = {}, double scale_hint = 0.0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return rank_from_singular_values(svd.singularValues(), pol, scale_hint);
}

/// Orthonormal basis of the column span of A.
inline Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& A, const RankPolicy& pol = {}) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
    const int r = rank_from_singular_values(svd.singularValues(), pol);
    return svd.matrixU().leftCols(r);
}

inline double condition_number(const Eigen::MatrixXd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

inline void require_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw NonFinite(std::string(what) + ": non-finite entry");
}

} // namespace cosym
