#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cosym/integrate.hpp"
#include "cosym/symmetry.hpp"

namespace cosym {

/// The constraint data of J^{-1}(mu) inside a mechanical presymplectic
/// manifold; for the evolution-reduction pipeline the structure is
/// (omega_H, E_H) and J is the modified momentum map.
struct LevelSet {
    MechanicalPresymplecticStructure structure;
    MomentumMap j;
    std::vector<double> mu;

    int k() const { return j.k(); }

    /// J_a - mu_a as scalar fields.
    std::vector<ScalarField> constraints() const {
        std::vector<ScalarField> out;
        for (int a = 0; a < k(); ++a)
            out.push_back(j.components[static_cast<size_t>(a)] -
                          ScalarField::constant(structure.chart, mu[static_cast<size_t>(a)]));
        return out;
    }

    /// max_a |J_a(x) - mu_a|
    double constraint_residual(std::span<const double> x) const {
        double worst = 0.0;
        for (int a = 0; a < k(); ++a)
            worst = std::max(worst, std::abs(j.components[static_cast<size_t>(a)](x) -
                                             mu[static_cast<size_t>(a)]));
        return worst;
    }
};

/// Newton projection onto the joint zero set of the constraints, stepping
/// along the constraint-gradient row space.
inline Point newton_project(const std::vector<ScalarField>& constraints, const Point& x0,
                            double tol = 1e-11, int max_iter = 50) {
    const int k = static_cast<int>(constraints.size());
    const int dim = static_cast<int>(x0.size());
    std::vector<OneFormField> grads;
    for (const auto& c : constraints) grads.push_back(differential(c));

    Point x = x0;
    for (int iter = 0; iter < max_iter; ++iter) {
        std::span<const double> xs(x);
        Eigen::VectorXd c(k);
        double worst = 0.0;
        for (int a = 0; a < k; ++a) {
            c(a) = constraints[static_cast<size_t>(a)](xs);
            worst = std::max(worst, std::abs(c(a)));
        }
        if (worst < tol) return x;

        Eigen::MatrixXd d(k, dim);
        for (int a = 0; a < k; ++a) {
            auto g = grads[static_cast<size_t>(a)].eval<double>(xs);
            for (int i = 0; i < dim; ++i) d(a, i) = g[static_cast<size_t>(i)];
        }
        Eigen::MatrixXd gram = d * d.transpose();
        if (condition_number(gram) > 1e12)
            throw RankDeficient("newton_project: constraint gradients dependent at iterate");
        Eigen::VectorXd lambda = gram.ldlt().solve(c);
        Eigen::VectorXd step = d.transpose() * lambda;
        for (int i = 0; i < dim; ++i) x[static_cast<size_t>(i)] -= step(i);
    }
    throw NoConvergence("newton_project: no convergence within iteration budget");
}

/// Project a seed onto the level set. Convergence alone is not membership:
/// mu must be a regular value at the returned point (the constraint gradients
/// stay away from zero), otherwise Newton has slid into a critical set where
/// the level set does not actually exist.
inline Point project_to_level(const Point& x0, const LevelSet& level, double tol = 1e-11,
                              int max_iter = 50, double regularity_min = 1e-4) {
    Point x = newton_project(level.constraints(), x0, tol, max_iter);
    level.structure.chart.require_inside(x);

    const int k = level.k();
    const int dim = level.structure.chart.dim();
    Eigen::MatrixXd d(k, dim);
    for (int a = 0; a < k; ++a) {
        auto g = differential(level.j.components[static_cast<size_t>(a)])
                     .eval<double>(std::span<const double>(x));
        for (int i = 0; i < dim; ++i) d(a, i) = g[static_cast<size_t>(i)];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
    if (!(svd.singularValues()(k - 1) > regularity_min))
        throw RankDeficient("project_to_level: mu is not a regular value at the returned point");
    return x;
}

/// Level-set membership probe: Newton from many box seeds. Zero successes is
/// the numerical signature of an empty level set.
struct LevelProbe {
    int attempts = 0;
    int successes = 0;
    std::vector<Point> points;
    bool empty() const { return successes == 0; }
};

inline LevelProbe probe_level_set(const LevelSet& level, const SampleBox& box, int seeds,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LevelProbe probe;
    for (int i = 0; i < seeds; ++i) {
        ++probe.attempts;
        Point x(static_cast<size_t>(box.dim()));
        for (int d = 0; d < box.dim(); ++d)
            x[static_cast<size_t>(d)] =
                box.center[static_cast<size_t>(d)] + box.halfwidth[static_cast<size_t>(d)] * u(rng);
        try {
            Point on = project_to_level(x, level);
            ++probe.successes;
            probe.points.push_back(std::move(on));
        } catch (const Error&) {
            // seed outside the basin, or level set empty
        }
    }
    return probe;
}

/// On-level sample points (throws if the probe finds none).
inline std::vector<Point> sample_on_level(const LevelSet& level, const SampleBox& box, int count,
                                          std::uint64_t seed) {
    LevelProbe probe = probe_level_set(level, box, 8 * count, seed);
    if (static_cast<int>(probe.points.size()) < count) {
        std::ostringstream os;
        os << "only " << probe.points.size() << " of " << count
           << " requested on-level samples found";
        throw NoConvergence(os.str());
    }
    probe.points.resize(static_cast<size_t>(count));
    return probe.points;
}

/// Tangent space of the level set at an on-level point, as ker of the
/// constraint differentials.
inline Subspace level_tangent_space(const LevelSet& level, std::span<const double> x) {
    const int k = level.k();
    const int dim = level.structure.chart.dim();
    Eigen::MatrixXd d(k, dim);
    for (int a = 0; a < k; ++a) {
        auto g = differential(level.j.components[static_cast<size_t>(a)]).eval<double>(x);
        for (int i = 0; i < dim; ++i) d(a, i) = g[static_cast<size_t>(i)];
    }
    if (rank_of(d) != k)
        throw RankDeficient("level_tangent_space: dJ rows dependent (mu not regular here)");
    return Subspace::from_orthonormal(nullspace(d, {}, d.norm()));
}

/// Pointwise content of the structure theorem for level sets:
/// (T_x level)^perp = orbit + Reeb span, and ker of the restricted form
/// equals the same span.
inline Report tangent_perp_report(const LevelSet& level, const AbelianAction& action,
                                  const Point& x, const Tolerances& tol = {}) {
    Report rep("level-set tangent/perp identities");
    const double resid = level.constraint_residual(x);
    if (!(resid < 1e-8)) throw PreconditionViolation("tangent_perp_report: point not on level set");

    std::span<const double> xs(x);
    const AntisymmetricForm form = level.structure.omega.form_at(xs);
    const Subspace tangent = level_tangent_space(level, xs);

    Eigen::MatrixXd span_cols(level.structure.chart.dim(), action.k() + 1);
    for (int gen = 0; gen < action.k(); ++gen)
        span_cols.col(gen) = action.fundamental_fields()[static_cast<size_t>(gen)].at(xs);
    span_cols.col(action.k()) = level.structure.reeb.at(xs);
    const Subspace orbit_reeb = Subspace::span_of(span_cols);

    const Subspace perp_t = perp(form, tangent);
    const double d1 = (perp_t.projector() - orbit_reeb.projector()).norm();
    rep.check_below("projector distance (T level)^perp vs orbit+Reeb", d1, tol.prop46_projector);
    rep.info("dim (T level)^perp", perp_t.dim());

    const Subspace rk = restricted_kernel(form, tangent);
    const double d2 = (rk.projector() - orbit_reeb.projector()).norm();
    rep.check_below("projector distance ker(iota^* omega) vs orbit+Reeb", d2, tol.prop46_projector);
    rep.info("dim ker(iota^* omega)", rk.dim());
    return rep;
}

/// Slice data: an ambient coordinate chart for the slice obtained by freezing
/// selected coordinates of M, together with the embedding. The slice manifold
/// itself is the constraint locus {J(embed(y)) = mu} inside this chart; the
/// quotient diffeomorphism is (s, y) -> act(s, embed(y)).
///
/// The paper's slice manifolds (ellipsoid-like sets) admit no global
/// parametrizing chart, so reduced objects live on this ambient chart and
/// are read on the tangent spaces of the constraint locus.
struct SliceChart {
    CoordinateChart chart;        ///< coordinates of M minus the dropped ones
    std::vector<int> dropped;     ///< indices (in M's chart) of frozen coordinates
    std::vector<double> values;   ///< frozen values
    SmoothMap embed;              ///< chart -> M

    /// Insert the frozen coordinates into a slice point.
    Point to_ambient(std::span<const double> y) const { return embed(y); }
};

/// Freeze the named coordinates of the ambient chart at fixed values.
inline SliceChart make_coordinate_slice(const CoordinateChart& ambient,
                                        const std::vector<std::string>& dropped_names,
                                        const std::vector<double>& values) {
    std::vector<int> dropped;
    for (const auto& nm : dropped_names) dropped.push_back(ambient.index(nm));

    std::vector<std::string> names;
    std::vector<int> keep;
    for (int i = 0; i < ambient.dim(); ++i) {
        if (std::find(dropped.begin(), dropped.end(), i) == dropped.end()) {
            names.push_back(ambient.name(i));
            keep.push_back(i);
        }
    }

    const int adim = ambient.dim();
    auto insert = [dropped, values, keep, adim](auto y) {
        using S = typename decltype(y)::value_type;
        std::vector<S> x(static_cast<size_t>(adim), S(0.0));
        for (size_t d = 0; d < dropped.size(); ++d)
            x[static_cast<size_t>(dropped[d])] = S(values[d]);
        for (size_t i = 0; i < keep.size(); ++i) x[static_cast<size_t>(keep[i])] = y[i];
        return x;
    };

    // The slice chart inherits the ambient guard through the embedding.
    CoordinateChart schart(names, [ambient, insert](std::span<const double> y) {
        return ambient.inside(insert(y));
    });
    SliceChart slice;
    slice.chart = schart;
    slice.dropped = dropped;
    slice.values = values;
    slice.embed = SmoothMap::from_closure(schart, ambient, insert);
    return slice;
}

/// Constraints of the slice manifold inside its ambient chart:
/// g_a(y) = J_a(embed(y)) - mu_a.
inline std::vector<ScalarField> slice_constraints(const LevelSet& level, const SliceChart& slice) {
    std::vector<ScalarField> out;
    for (int a = 0; a < level.k(); ++a) {
        ScalarField ja = level.j.components[static_cast<size_t>(a)];
        SmoothMap embed = slice.embed;
        const double mua = level.mu[static_cast<size_t>(a)];
        out.push_back(ScalarField::from_closure(slice.chart, [ja, embed, mua](auto y) {
            using S = typename decltype(y)::value_type;
            std::vector<S> x = embed.eval(std::span<const S>(y));
            return ja.eval(std::span<const S>(x)) - mua;
        }));
    }
    return out;
}

/// The reduced pair on the slice chart. omega_mu and reeb_mu are meaningful
/// on the tangent spaces of the slice manifold {constraints = 0}.
struct ReducedStructure {
    SliceChart slice;
    TwoFormField omega_mu;
    VectorField reeb_mu;
    std::vector<ScalarField> constraints;

    /// Tangent space of the slice manifold at y (within the slice chart).
    Subspace tangent_space(std::span<const double> y) const {
        const int k = static_cast<int>(constraints.size());
        const int dim = slice.chart.dim();
        Eigen::MatrixXd d(k, dim);
        for (int a = 0; a < k; ++a) {
            auto g = differential(constraints[static_cast<size_t>(a)]).eval<double>(y);
            for (int i = 0; i < dim; ++i) d(a, i) = g[static_cast<size_t>(i)];
        }
        return Subspace::from_orthonormal(nullspace(d, {}, d.norm()));
    }
};

/// Marsden-Weinstein-style reduction through the slice: pull the 2-form back
/// along the embedding and push the Reeb field through the orbit/slice
/// splitting of the level tangent space.
inline ReducedStructure reduce(const LevelSet& level, const AbelianAction& action,
                               const SliceChart& slice, const Tolerances& tol = {}) {
    ReducedStructure red;
    red.slice = slice;
    red.omega_mu = pullback_2form(slice.embed, level.structure.omega);
    red.constraints = slice_constraints(level, slice);

    const int mdim = level.structure.chart.dim();
    const int sdim = slice.chart.dim();
    const int k = level.k();
    auto constraints = red.constraints;
    SmoothMap embed = slice.embed;
    VectorField ambient_reeb = level.structure.reeb;
    std::vector<VectorField> fundamental = action.fundamental_fields();
    const double cond_max = tol.slice_cond_max;

    red.reeb_mu = VectorField::from_closure(slice.chart, [=](auto y) {
        using S = typename decltype(y)::value_type;
        if constexpr (!std::is_same_v<S, double>) {
            throw DepthExceeded("reduced Reeb field is numeric-only (orbit/slice splitting)");
            return std::vector<S>{};
        } else {
            std::span<const double> ys(y);
            // Tangent basis of the slice manifold at y.
            Eigen::MatrixXd d(k, sdim);
            for (int a = 0; a < k; ++a) {
                auto g = differential(constraints[static_cast<size_t>(a)]).eval<double>(ys);
                for (int i = 0; i < sdim; ++i) d(a, i) = g[static_cast<size_t>(i)];
            }
            Eigen::MatrixXd tangent = nullspace(d, {}, d.norm());
            const int tdim = static_cast<int>(tangent.cols());

            Point x = embed(ys);
            std::span<const double> xs(x);
            Mat<double> jac = jacobian<double>(embed, ys);
            Eigen::MatrixXd je(mdim, sdim);
            for (int i = 0; i < mdim; ++i)
                for (int jj = 0; jj < sdim; ++jj) je(i, jj) = jac(i, jj);

            // Columns: orbit generators, then T(embed) of the slice tangent.
            Eigen::MatrixXd split(mdim, k + tdim);
            for (int gen = 0; gen < k; ++gen)
                split.col(gen) = fundamental[static_cast<size_t>(gen)].at(xs);
            split.rightCols(tdim) = je * tangent;
            if (condition_number(split) > cond_max)
                throw SliceNotTransverse("orbit/slice decomposition ill-conditioned");

            Eigen::VectorXd e = ambient_reeb.at(xs);
            Eigen::VectorXd coeff = split.colPivHouseholderQr().solve(e);
            if ((split * coeff - e).norm() > 1e-7 * std::max(1.0, e.norm()))
                throw SliceNotTransverse("Reeb vector not in orbit + slice tangent span");

            Eigen::VectorXd slice_vec = tangent * coeff.tail(tdim);
            return std::vector<double>(slice_vec.data(), slice_vec.data() + sdim);
        }
    });
    return red;
}

/// Reduced-structure invariants at on-slice sample points: closedness of
/// omega_mu, tangency of reeb_mu, and ker(omega_mu | T slice) = span{reeb_mu}.
inline Report verify_reduced(const ReducedStructure& red, const std::vector<Point>& slice_points,
                             const Tolerances& tol = {}) {
    Report rep("reduced mechanical presymplectic structure");
    double worst_closed = 0.0, worst_tangent = 0.0, worst_kernel = 0.0;
    bool rank_ok = true;
    for (const auto& y : slice_points) {
        std::span<const double> ys(y);
        for (double c : three_form_components<double>(red.omega_mu, ys))
            worst_closed = std::max(worst_closed, std::abs(c));

        const Subspace tangent = red.tangent_space(ys);
        auto rv = red.reeb_mu.at(ys);
        for (const auto& g : red.constraints) {
            auto dg = differential(g).eval<double>(ys);
            double val = 0.0;
            for (size_t i = 0; i < dg.size(); ++i) val += dg[i] * rv(static_cast<Eigen::Index>(i));
            worst_tangent = std::max(worst_tangent, std::abs(val));
        }

        const AntisymmetricForm form = red.omega_mu.form_at(ys);
        const Subspace kernel_in_tangent = restricted_kernel(form, tangent);
        if (kernel_in_tangent.dim() != 1) rank_ok = false;
        const double dist =
            (kernel_in_tangent.projector() - Subspace::span_of(rv).projector()).norm();
        worst_kernel = std::max(worst_kernel, dist);
    }
    rep.check_below("max |d(omega_mu)| component", worst_closed, tol.closed);
    rep.check_below("max |dg(reeb_mu)| (tangency)", worst_tangent, 1e-7);
    rep.check("ker(omega_mu | T slice) is one-dimensional", rank_ok);
    rep.check_below("projector distance kernel vs span{reeb_mu}", worst_kernel,
                    tol.prop46_projector);
    rep.info("sample count", static_cast<double>(slice_points.size()));
    return rep;
}

/// On-slice samples: box sampling in the slice chart plus Newton projection
/// onto the slice constraints.
inline std::vector<Point> sample_on_slice(const ReducedStructure& red, const SampleBox& box,
                                          int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point> out;
    long attempts = 0;
    const long max_attempts = 2000L * std::max(count, 1);
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > max_attempts)
            throw NoConvergence("sample_on_slice: not enough on-slice samples found");
        Point y(static_cast<size_t>(box.dim()));
        for (int d = 0; d < box.dim(); ++d)
            y[static_cast<size_t>(d)] =
                box.center[static_cast<size_t>(d)] + box.halfwidth[static_cast<size_t>(d)] * u(rng);
        try {
            Point on = newton_project(red.constraints, y);
            red.slice.chart.require_inside(on);
            out.push_back(std::move(on));
        } catch (const Error&) {
        }
    }
    return out;
}

/// Solve for the group parameter s with act(-s, x) matching the slice's
/// frozen coordinates, returning (s, slice point). Newton in s with a
/// dual-number Jacobian.
inline std::pair<Point, Point> to_slice(const AbelianAction& action, const SliceChart& slice,
                                        const Point& x, double tol = 1e-12, int max_iter = 50) {
    const int k = action.k();
    if (static_cast<int>(slice.dropped.size()) != k)
        throw PreconditionViolation("to_slice: dropped-coordinate count must equal k");
    Point s(static_cast<size_t>(k), 0.0);
    for (int iter = 0; iter < max_iter; ++iter) {
        // Residual and Jacobian of s -> dropped(act(-s, x)) - values.
        Eigen::VectorXd r(k);
        Eigen::MatrixXd jac(k, k);
        for (int col = 0; col < k; ++col) {
            std::vector<S1> sl(static_cast<size_t>(k));
            for (int a = 0; a < k; ++a)
                sl[static_cast<size_t>(a)] = S1{-s[static_cast<size_t>(a)], a == col ? -1.0 : 0.0};
            auto xl = lift_point<S1>(std::span<const double>(x));
            auto img = action.act<S1>(std::span<const S1>(sl), std::span<const S1>(xl));
            for (int a = 0; a < k; ++a) {
                const auto& comp = img[static_cast<size_t>(slice.dropped[static_cast<size_t>(a)])];
                if (col == 0) r(a) = comp.v - slice.values[static_cast<size_t>(a)];
                jac(a, col) = comp.d;
            }
        }
        if (r.cwiseAbs().maxCoeff() < tol) break;
        if (iter + 1 == max_iter)
            throw NoConvergence("to_slice: group-parameter solve did not converge");
        Eigen::VectorXd ds = jac.partialPivLu().solve(r);
        for (int a = 0; a < k; ++a) s[static_cast<size_t>(a)] -= ds(a);
    }

    Point minus_s(static_cast<size_t>(k));
    for (int a = 0; a < k; ++a) minus_s[static_cast<size_t>(a)] = -s[static_cast<size_t>(a)];
    Point moved = action.apply(minus_s, x);
    Point y;
    for (int i = 0; i < static_cast<int>(moved.size()); ++i)
        if (std::find(slice.dropped.begin(), slice.dropped.end(), i) == slice.dropped.end())
            y.push_back(moved[static_cast<size_t>(i)]);
    return {s, y};
}

/// Integrate the ambient Reeb dynamics and the reduced dynamics side by side
/// and compare through the quotient at matched times.
inline Report compare_dynamics(const LevelSet& level, const AbelianAction& action,
                               const ReducedStructure& red, const Point& x0, double duration,
                               double step, const Tolerances& tol = {}) {
    Report rep("reduced dynamics vs projected ambient dynamics");
    if (!(level.constraint_residual(x0) < 1e-8))
        throw PreconditionViolation("compare_dynamics: start point not on the level set");

    Trajectory ambient = rk4_integrate(level.structure.reeb, x0, step, duration);
    auto [s0, y0] = to_slice(action, red.slice, x0);
    Trajectory reduced = rk4_integrate(red.reeb_mu, y0, step, duration);

    double worst = 0.0;
    for (size_t kstep = 0; kstep < ambient.states.size(); ++kstep) {
        auto [s, y] = to_slice(action, red.slice, ambient.states[kstep]);
        const Point& yr = reduced.states[kstep];
        for (size_t i = 0; i < y.size(); ++i)
            worst = std::max(worst, std::abs(y[i] - yr[i]));
    }
    rep.check_below("max slice-coordinate deviation", worst, tol.compare_dynamics);
    rep.info("steps", static_cast<double>(ambient.states.size() - 1));
    rep.info("duration", duration);
    rep.info("step", step);
    return rep;
}

} // namespace cosym
