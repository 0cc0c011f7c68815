#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cosym/fields.hpp"
#include "cosym/integrate.hpp"

namespace cosym {

/// Shared numeric thresholds. Values are fixed here; callers may override a
/// copy where a scenario demands it.
struct Tolerances {
    double closed = 1e-9;           ///< max |d omega| component
    double reeb_residual = 1e-8;    ///< stacked Reeb solve residual
    double flat_cond_max = 1e12;    ///< condition number bound for the flat matrix
    double algebraic = 1e-9;        ///< dual-number identities, invariance sampling
    double momentum = 1e-8;         ///< |i_{xi_M} omega - dJ| bound
    double subspace = 1e-8;         ///< projector-difference subspace equality
    double flow_fd = 1e-5;          ///< flow finite-difference Lie derivative checks
    double transversality = 1e-6;   ///< orbit/Reeb relative distance margin
    double newton = 1e-11;          ///< Newton projection constraint residual
    int newton_max_iter = 50;
    double level_regularity = 1e-4; ///< min singular value of dJ at level points
    double prop46_projector = 1e-7; ///< tangent/perp subspace comparisons
    double reduced_match = 1e-8;    ///< reduced structure componentwise matches
    double compare_dynamics = 1e-5; ///< ambient-vs-reduced trajectory deviation
    double noether_drift = 1e-6;    ///< momentum drift along RK4 trajectories
    double slice_cond_max = 1e10;   ///< orbit/slice decomposition conditioning
};

/// Pair (omega, eta) on a chart of odd dimension.
struct CosymplecticStructure {
    CoordinateChart chart;
    TwoFormField omega;
    OneFormField eta;

    int n() const { return (chart.dim() - 1) / 2; }
};

/// Pair (omega, R) with ker omega = span{R}; weaker than cosymplectic.
struct MechanicalPresymplecticStructure {
    CoordinateChart chart;
    TwoFormField omega;
    VectorField reeb;
};

/// Hamiltonian-section input for the two time-dependent formalisms on
/// V*Pi coordinates (q^1..q^n, p_1..p_n, t). The connection components
/// Y^i are functions of (q, t) only; the d/dt coefficient is fixed to 1.
struct HamiltonianSectionData {
    int n = 0;
    ScalarField h;                               ///< H_h(q, p, t)
    std::optional<std::vector<ScalarField>> y;   ///< Y^i, present for formalism b)
};

/// Chart (q^1..q^n, p_1..p_n, t).
inline CoordinateChart vstar_pi_chart(int n) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
    for (int i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
    names.push_back("t");
    return CoordinateChart(std::move(names));
}

/// omega = sum dq^i ^ dp_i on a (q, p, t) chart.
inline TwoFormField darboux_two_form(const CoordinateChart& chart) {
    const int n = (chart.dim() - 1) / 2;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(chart.dim(), chart.dim());
    for (int i = 0; i < n; ++i) {
        m(i, n + i) = 1.0;
        m(n + i, i) = -1.0;
    }
    return TwoFormField::constant(chart, m);
}

inline CosymplecticStructure darboux_structure(const CoordinateChart& chart) {
    return {chart, darboux_two_form(chart),
            OneFormField::coordinate_differential(chart, chart.dim() - 1)};
}

inline CosymplecticStructure darboux_structure(int n) {
    return darboux_structure(vstar_pi_chart(n));
}

/// Matrix of flat(X) = i_X omega + eta(X) eta in the chart basis:
/// F = Omega^T + eta eta^T.
template <class S>
Mat<S> flat_matrix_generic(const CosymplecticStructure& s, std::span<const S> x) {
    const int dim = s.chart.dim();
    Mat<S> w = s.omega.eval(x);
    auto e = s.eta.eval(x);
    Mat<S> f(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            f(i, j) = w(j, i) + e[static_cast<size_t>(i)] * e[static_cast<size_t>(j)];
    return f;
}

/// Double-level flat matrix with a conditioning gate.
inline Eigen::MatrixXd flat_matrix(const CosymplecticStructure& s, const Point& x,
                                   const Tolerances& tol = {}) {
    Eigen::MatrixXd f = to_eigen(flat_matrix_generic<double>(s, std::span<const double>(x)));
    const double cond = condition_number(f);
    if (!(cond < tol.flat_cond_max)) {
        std::ostringstream os;
        os << "flat matrix condition number " << cond << " exceeds " << tol.flat_cond_max;
        throw SingularFlat(os.str());
    }
    return f;
}

/// Reeb field: pointwise least-squares solve of the stacked system
/// [omega(x)^T; eta(x)^T] R = (0,...,0,1), with a residual gate at
/// double level.
inline VectorField reeb_field(const CosymplecticStructure& s, const Tolerances& tol = {}) {
    const int dim = s.chart.dim();
    const double residual_tol = tol.reeb_residual;
    return VectorField::from_closure(s.chart, [s, dim, residual_tol](auto x) {
        using S = typename decltype(x)::value_type;
        Mat<S> w = s.omega.eval(x);
        auto e = s.eta.eval(x);
        Mat<S> a(dim + 1, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) = w(j, i); // row i: (i_R omega)_i = 0
        for (int j = 0; j < dim; ++j) a(dim, j) = e[static_cast<size_t>(j)];
        Vec<S> b(static_cast<size_t>(dim) + 1, S(0.0));
        b[static_cast<size_t>(dim)] = S(1.0);
        Vec<S> r = solve_least_squares(a, b);
        // Residual gate on the value parts.
        double worst = 0.0;
        for (int i = 0; i <= dim; ++i) {
            double row = i < dim ? 0.0 : -1.0;
            for (int j = 0; j < dim; ++j) row += value_of(a(i, j)) * value_of(r[static_cast<size_t>(j)]);
            worst = std::max(worst, std::abs(row));
        }
        if (!(worst < residual_tol)) {
            std::ostringstream os;
            os << "Reeb solve residual " << worst << "; structure not cosymplectic here";
            throw SingularFlat(os.str());
        }
        return r;
    });
}

/// Hamiltonian field of H: the flat solve of dH - R(H) eta. The companion
/// condition i_X eta = 0 is implied (contract the flat equation with R).
inline VectorField hamiltonian_field(const CosymplecticStructure& s, const ScalarField& h,
                                     const Tolerances& tol = {}) {
    VectorField reeb = reeb_field(s, tol);
    const int dim = s.chart.dim();
    return VectorField::derived(s.chart, [s, h, reeb, dim](auto x) {
        using S = typename decltype(x)::value_type;
        std::span<const S> xs(x);
        Mat<S> f = flat_matrix_generic(s, xs);
        std::vector<S> dh(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            auto seeded = lift_with_seed(xs, i);
            dh[static_cast<size_t>(i)] = h.eval(std::span<const Dual<S>>(seeded)).d;
        }
        auto rv = reeb.eval(xs);
        auto ev = s.eta.eval(xs);
        S rh(0.0);
        for (int i = 0; i < dim; ++i) rh += dh[static_cast<size_t>(i)] * rv[static_cast<size_t>(i)];
        Vec<S> rhs(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i)
            rhs[static_cast<size_t>(i)] = dh[static_cast<size_t>(i)] - rh * ev[static_cast<size_t>(i)];
        return solve_square(f, rhs);
    });
}

/// Evolution field E_H = X_H + R.
inline VectorField evolution_field(const CosymplecticStructure& s, const ScalarField& h,
                                   const Tolerances& tol = {}) {
    VectorField xh = hamiltonian_field(s, h, tol);
    VectorField reeb = reeb_field(s, tol);
    return VectorField::derived(s.chart, [xh, reeb](auto x) {
        using S = typename decltype(x)::value_type;
        std::span<const S> xs(x);
        auto a = xh.eval(xs);
        auto b = reeb.eval(xs);
        for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        return a;
    });
}

/// (omega + dH ^ eta, eta): the modification that turns evolution dynamics
/// into Reeb dynamics.
inline CosymplecticStructure modify_structure(const CosymplecticStructure& s,
                                              const ScalarField& h) {
    TwoFormField omega_h = s.omega + wedge_1_1(differential(h), s.eta);
    return {s.chart, omega_h, s.eta};
}

/// Forget eta, keep the Reeb direction.
inline MechanicalPresymplecticStructure as_mechanical(const CosymplecticStructure& s,
                                                      const Tolerances& tol = {}) {
    return {s.chart, s.omega, reeb_field(s, tol)};
}

/// Closedness of omega and eta, volume condition via the flat matrix, and
/// pointwise corank of omega over the sample set.
inline Report validate_cosymplectic(const CosymplecticStructure& s, const std::vector<Point>& points,
                                    const Tolerances& tol = {}) {
    Report rep("cosymplectic validity");
    if (s.chart.dim() % 2 == 0) {
        rep.check("chart dimension odd", false, s.chart.dim());
        return rep;
    }
    double worst_domega = 0.0, worst_deta = 0.0, min_det = std::numeric_limits<double>::infinity(),
           worst_cond = 0.0;
    bool corank_ok = true;
    TwoFormField deta = exterior_derivative(s.eta);
    for (const auto& p : points) {
        std::span<const double> xs(p);
        for (double c : three_form_components<double>(s.omega, xs))
            worst_domega = std::max(worst_domega, std::abs(c));
        for (double c : deta.eval<double>(xs).a) worst_deta = std::max(worst_deta, std::abs(c));
        Eigen::MatrixXd f = to_eigen(flat_matrix_generic<double>(s, xs));
        min_det = std::min(min_det, std::abs(f.determinant()));
        worst_cond = std::max(worst_cond, condition_number(f));
        const Eigen::MatrixXd w = to_eigen(s.omega.eval<double>(xs));
        try {
            if (rank_of(w) != s.chart.dim() - 1) corank_ok = false;
        } catch (const ToleranceAmbiguity&) {
            corank_ok = false;
        }
    }
    rep.check_below("max |d(omega)| component", worst_domega, tol.closed);
    rep.check_below("max |d(eta)| component", worst_deta, tol.closed);
    rep.check_below("max flat-matrix condition number", worst_cond, tol.flat_cond_max);
    rep.info("min |det flat| (volume proxy)", min_det);
    rep.check("corank(omega) = 1 at all samples", corank_ok);
    rep.info("sample count", static_cast<double>(points.size()));
    return rep;
}

/// Reeb cosymplectic formalism: (omega_h = omega_0 + dH_h ^ dt, dt).
inline CosymplecticStructure build_reeb_formalism(const HamiltonianSectionData& d) {
    CoordinateChart chart = d.h.chart();
    OneFormField dt = OneFormField::coordinate_differential(chart, chart.dim() - 1);
    TwoFormField omega_h = darboux_two_form(chart) + wedge_1_1(differential(d.h), dt);
    return {chart, omega_h, dt};
}

/// Evolution cosymplectic formalism: omega_Y = -d lambda_Y with
/// lambda_Y = p_i dq^i - Y^i p_i dt, paired with H_h^Y = -Y^i p_i + H_h.
inline std::pair<CosymplecticStructure, ScalarField> build_evolution_formalism(
    const HamiltonianSectionData& d) {
    if (!d.y) throw PreconditionViolation("build_evolution_formalism: connection Y missing");
    CoordinateChart chart = d.h.chart();
    const int n = d.n;
    std::vector<ScalarField> y = *d.y;

    OneFormField lambda = OneFormField::from_closure(chart, [n, y](auto x) {
        using S = typename decltype(x)::value_type;
        std::span<const S> xs(x);
        std::vector<S> r(xs.size(), S(0.0));
        S yp(0.0);
        for (int i = 0; i < n; ++i) {
            r[static_cast<size_t>(i)] = xs[static_cast<size_t>(n + i)]; // p_i dq^i
            yp += y[static_cast<size_t>(i)].eval(xs) * xs[static_cast<size_t>(n + i)];
        }
        r[static_cast<size_t>(2 * n)] = -yp;
        return r;
    });

    TwoFormField d_lambda = exterior_derivative(lambda);
    TwoFormField omega_y = TwoFormField::derived(chart, [d_lambda](auto x) {
        auto m = d_lambda.eval(x);
        for (auto& e : m.a) e = -e;
        return m;
    });

    ScalarField h = d.h;
    ScalarField h_y = ScalarField::from_closure(chart, [n, y, h](auto x) {
        using S = typename decltype(x)::value_type;
        std::span<const S> xs(x);
        S yp(0.0);
        for (int i = 0; i < n; ++i)
            yp += y[static_cast<size_t>(i)].eval(xs) * xs[static_cast<size_t>(n + i)];
        return h.eval(xs) - yp;
    });

    OneFormField dt = OneFormField::coordinate_differential(chart, chart.dim() - 1);
    return {CosymplecticStructure{chart, omega_y, dt}, h_y};
}

/// max | omega_h - omega_Y - dH_h^Y ^ dt | over the samples.
inline Report formalism_relation_check(const HamiltonianSectionData& d,
                                       const std::vector<Point>& points, double tol = 1e-9) {
    Report rep("relation omega_h = omega_Y + dH_h^Y ^ dt");
    CosymplecticStructure reeb_side = build_reeb_formalism(d);
    auto [evo_side, h_y] = build_evolution_formalism(d);
    OneFormField dt = OneFormField::coordinate_differential(reeb_side.chart, reeb_side.chart.dim() - 1);
    TwoFormField residual = reeb_side.omega - (evo_side.omega + wedge_1_1(differential(h_y), dt));
    double worst = 0.0;
    for (const auto& p : points)
        for (double e : residual.eval<double>(std::span<const double>(p)).a)
            worst = std::max(worst, std::abs(e));
    rep.check_below("max residual component", worst, tol);
    rep.info("sample count", static_cast<double>(points.size()));
    return rep;
}

} // namespace cosym
