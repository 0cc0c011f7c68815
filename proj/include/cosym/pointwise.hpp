#pragma once

#include <Eigen/Dense>
#include <random>
#include <sstream>
#include <utility>

#include "cosym/linalg.hpp"

namespace cosym {

using TangentVector = Eigen::VectorXd;

/// Antisymmetric bilinear form at a single tangent space, stored as the
/// matrix of values omega(e_i, e_j). Asymmetric input is rejected, not
/// projected: it signals a caller bug.
class AntisymmetricForm {
public:
    explicit AntisymmetricForm(Eigen::MatrixXd m, double asym_tol = 1e-9) : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw PreconditionViolation("AntisymmetricForm: matrix not square");
        const double scale = 1.0 + m_.cwiseAbs().maxCoeff();
        const double asym = (m_ + m_.transpose()).cwiseAbs().maxCoeff();
        if (asym > asym_tol * scale) {
            std::ostringstream os;
            os << "AntisymmetricForm: asymmetry " << asym << " exceeds tolerance";
            throw PreconditionViolation(os.str());
        }
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& matrix() const { return m_; }

    /// omega(u, v)
    double operator()(const TangentVector& u, const TangentVector& v) const {
        return u.dot(m_ * v);
    }

private:
    Eigen::MatrixXd m_;
};

/// A linear subspace held through an orthonormal basis, so that equality and
/// containment tests are basis-independent.
class Subspace {
public:
    /// Span of the given (not necessarily independent) column vectors; a
    /// single vector works too since VectorXd converts to a one-column matrix.
    static Subspace span_of(const Eigen::MatrixXd& vectors, const RankPolicy& pol = {}) {
        return Subspace(orthonormal_span(vectors, pol));
    }

    static Subspace zero(int ambient_dim) {
        return Subspace(Eigen::MatrixXd(ambient_dim, 0));
    }

    /// Adopt columns that are already orthonormal (internal fast path).
    static Subspace from_orthonormal(Eigen::MatrixXd basis) {
        return Subspace(std::move(basis));
    }

    int ambient_dim() const { return static_cast<int>(basis_.rows()); }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Eigen::MatrixXd& basis() const { return basis_; }

    Eigen::MatrixXd projector() const { return basis_ * basis_.transpose(); }

    /// Distance of v from the subspace relative to |v|.
    double relative_distance(const TangentVector& v) const {
        const double n = v.norm();
        if (n == 0.0) return 0.0;
        return (v - projector() * v).norm() / n;
    }

    bool contains(const TangentVector& v, double tol = 1e-8) const {
        return relative_distance(v) < tol;
    }

    /// Projector-difference test; symmetric in the two operands.
    bool equals(const Subspace& other, double tol = 1e-8) const {
        if (ambient_dim() != other.ambient_dim()) return false;
        return (projector() - other.projector()).norm() < tol;
    }

private:
    explicit Subspace(Eigen::MatrixXd basis) : basis_(std::move(basis)) {}
    Eigen::MatrixXd basis_; // ambient_dim x dim, orthonormal columns
};

/// ker omega as a subspace; basis vectors come out with unit norm.
inline Subspace kernel(const AntisymmetricForm& form, const RankPolicy& pol = {}) {
    return Subspace::from_orthonormal(nullspace(form.matrix(), pol));
}

/// A^perp = { v : omega(v, a) = 0 for all a in A }.
inline Subspace perp(const AntisymmetricForm& form, const Subspace& a, const RankPolicy& pol = {}) {
    if (a.ambient_dim() != form.dim())
        throw PreconditionViolation("perp: subspace/form dimension mismatch");
    if (a.dim() == 0) {
        return Subspace::from_orthonormal(
            Eigen::MatrixXd::Identity(form.dim(), form.dim()));
    }
    // Constraints: (Omega a_i)^T v = 0 for each basis vector a_i. Rank is
    // judged against the form's scale: a row Omega*a_i that is pure rounding
    // noise (a_i in the kernel) must count as zero.
    Eigen::MatrixXd constraints = (form.matrix() * a.basis()).transpose();
    return Subspace::from_orthonormal(nullspace(constraints, pol, form.matrix().norm()));
}

/// Span of the union of two subspaces.
inline Subspace subspace_sum(const Subspace& a, const Subspace& b, const RankPolicy& pol = {}) {
    if (a.ambient_dim() != b.ambient_dim())
        throw PreconditionViolation("subspace_sum: ambient dimension mismatch");
    Eigen::MatrixXd stacked(a.ambient_dim(), a.dim() + b.dim());
    stacked << a.basis(), b.basis();
    return Subspace::span_of(stacked, pol);
}

/// Kernel of the restriction of a form to a subspace, returned in ambient
/// coordinates: { v in W : omega(v, w) = 0 for all w in W }.
inline Subspace restricted_kernel(const AntisymmetricForm& form, const Subspace& w,
                                  const RankPolicy& pol = {}) {
    if (w.ambient_dim() != form.dim())
        throw PreconditionViolation("restricted_kernel: dimension mismatch");
    const Eigen::MatrixXd B = w.basis();
    Eigen::MatrixXd restricted = B.transpose() * form.matrix() * B;
    Eigen::MatrixXd null_local = nullspace(restricted, pol, form.matrix().norm());
    return Subspace::from_orthonormal(orthonormal_span(B * null_local, pol));
}

/// Outcome of checking both alternatives of the corank-1 perp lemma on a
/// concrete (form, Reeb direction, subspace) triple.
struct Lemma45Report {
    bool reeb_in_a = false;
    int dim_a = 0;
    int dim_perp = 0;
    int dim_perp_predicted = 0;
    Subspace biperp;
    Subspace biperp_predicted;
    bool dim_pass = false;
    bool biperp_pass = false;

    bool pass() const { return dim_pass && biperp_pass; }

    Lemma45Report() : biperp(Subspace::zero(0)), biperp_predicted(Subspace::zero(0)) {}
};

/// Check dim A^perp and the biperp identity against their predicted values.
/// Precondition: ker(form) = span{reeb}.
inline Lemma45Report lemma45_check(const AntisymmetricForm& form, const TangentVector& reeb,
                                   const Subspace& a, const RankPolicy& pol = {},
                                   double subspace_tol = 1e-8) {
    const Subspace ker = kernel(form, pol);
    if (!ker.equals(Subspace::span_of(reeb), subspace_tol))
        throw PreconditionViolation("lemma45_check: kernel(form) is not span{reeb}");

    Lemma45Report rep;
    rep.reeb_in_a = a.contains(reeb, subspace_tol);
    rep.dim_a = a.dim();
    const Subspace ap = perp(form, a, pol);
    rep.dim_perp = ap.dim();
    const int n = form.dim();
    rep.dim_perp_predicted = rep.reeb_in_a ? n - a.dim() + 1 : n - a.dim();
    rep.dim_pass = rep.dim_perp == rep.dim_perp_predicted;

    rep.biperp = perp(form, ap, pol);
    rep.biperp_predicted =
        rep.reeb_in_a ? a : subspace_sum(a, Subspace::span_of(reeb), pol);
    rep.biperp_pass = rep.biperp.equals(rep.biperp_predicted, subspace_tol);
    return rep;
}

/// Random corank-1 instance with a known Reeb direction, for fuzzing the
/// lemma: omega(u,v) = u^T P^T J0 P v with J0 the Darboux block matrix, so
/// ker omega = P^{-1} e_last by construction.
struct Corank1Instance {
    AntisymmetricForm form;
    TangentVector reeb;
};

inline Corank1Instance random_corank1_form(int dim, std::mt19937_64& rng) {
    if (dim % 2 == 0) throw PreconditionViolation("random_corank1_form: dim must be odd");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd j0 = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i + 1 < dim; i += 2) {
        j0(i, i + 1) = 1.0;
        j0(i + 1, i) = -1.0;
    }
    // Keep resampling until the random change of basis is well-conditioned.
    for (;;) {
        Eigen::MatrixXd p(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) p(i, j) = u(rng);
        if (condition_number(p) > 1e3) continue;
        Eigen::MatrixXd m = p.transpose() * j0 * p;
        m = 0.5 * (m - m.transpose().eval());
        TangentVector reeb = p.partialPivLu().solve(TangentVector::Unit(dim, dim - 1));
        reeb.normalize();
        return {AntisymmetricForm(std::move(m)), std::move(reeb)};
    }
}

/// Random subspace of the given dimension; optionally forced to contain v.
inline Subspace random_subspace(int ambient_dim, int dim, std::mt19937_64& rng,
                                const TangentVector* include = nullptr) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int extra = include ? 1 : 0;
    Eigen::MatrixXd cols(ambient_dim, dim);
    if (include) cols.col(0) = *include;
    for (int j = extra; j < dim; ++j)
        for (int i = 0; i < ambient_dim; ++i) cols(i, j) = u(rng);
    Subspace s = Subspace::span_of(cols);
    if (s.dim() != dim) return random_subspace(ambient_dim, dim, rng, include);
    return s;
}

/// Summary of a randomized perp-dimension fuzz run.
struct Lemma45FuzzResult {
    int cases = 0;
    int passed = 0;
    int reeb_in_a_cases = 0;
    bool all_pass() const { return cases == passed; }
};

inline Lemma45FuzzResult fuzz_lemma45(int dim, int cases, std::mt19937_64& rng) {
    Lemma45FuzzResult res;
    std::uniform_int_distribution<int> dim_a(1, dim - 1);
    std::bernoulli_distribution include_reeb(0.5);
    for (int c = 0; c < cases; ++c) {
        auto inst = random_corank1_form(dim, rng);
        const bool with_reeb = include_reeb(rng);
        Subspace a = random_subspace(dim, dim_a(rng), rng, with_reeb ? &inst.reeb : nullptr);
        auto rep = lemma45_check(inst.form, inst.reeb, a);
        ++res.cases;
        if (rep.reeb_in_a) ++res.reeb_in_a_cases;
        if (rep.pass()) ++res.passed;
    }
    return res;
}

} // namespace cosym
