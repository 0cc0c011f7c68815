#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cosym/cosymplectic.hpp"

namespace cosym {

namespace detail {

/// Type-erased two-argument evaluator (group element, point) at the four
/// derivative levels; both arguments share the scalar so the action can be
/// differentiated in s and in x alike.
struct ActionEvals {
    std::function<std::vector<S0>(std::span<const S0>, std::span<const S0>)> e0;
    std::function<std::vector<S1>(std::span<const S1>, std::span<const S1>)> e1;
    std::function<std::vector<S2>(std::span<const S2>, std::span<const S2>)> e2;
    std::function<std::vector<S3>(std::span<const S3>, std::span<const S3>)> e3;

    template <class F>
    static ActionEvals full(F f) {
        ActionEvals ev;
        ev.e0 = [f](std::span<const S0> s, std::span<const S0> x) { return f(s, x); };
        ev.e1 = [f](std::span<const S1> s, std::span<const S1> x) { return f(s, x); };
        ev.e2 = [f](std::span<const S2> s, std::span<const S2> x) { return f(s, x); };
        ev.e3 = [f](std::span<const S3> s, std::span<const S3> x) { return f(s, x); };
        return ev;
    }

    template <class S>
    std::vector<S> operator()(std::span<const S> s, std::span<const S> x) const {
        if constexpr (std::is_same_v<S, S0>)
            return e0(s, x);
        else if constexpr (std::is_same_v<S, S1>)
            return e1(s, x);
        else if constexpr (std::is_same_v<S, S2>)
            return e2(s, x);
        else
            return e3(s, x);
    }
};

} // namespace detail

/// Action of the additive group R^k, given by the map itself together with
/// the k fundamental vector fields (generators for the coordinate basis).
class AbelianAction {
public:
    AbelianAction() = default;

    template <class F>
    static AbelianAction from_closure(int k, CoordinateChart chart, F act,
                                      std::vector<VectorField> fundamental_fields) {
        AbelianAction a;
        a.k_ = k;
        a.chart_ = std::move(chart);
        a.act_ = detail::ActionEvals::full(std::move(act));
        a.fundamental_ = std::move(fundamental_fields);
        if (static_cast<int>(a.fundamental_.size()) != k)
            throw PreconditionViolation("AbelianAction: need one fundamental field per generator");
        return a;
    }

    int k() const { return k_; }
    const CoordinateChart& chart() const { return chart_; }
    const std::vector<VectorField>& fundamental_fields() const { return fundamental_; }

    template <class S>
    std::vector<S> act(std::span<const S> s, std::span<const S> x) const {
        return act_(s, x);
    }

    Point apply(std::span<const double> s, std::span<const double> x) const {
        return act<double>(s, x);
    }

    /// The diffeomorphism x -> act(s, x) for a fixed group element.
    SmoothMap map_for(const Point& s) const {
        auto act = act_;
        return SmoothMap::from_closure(chart_, chart_, [act, s](auto x) {
            using S = typename decltype(x)::value_type;
            std::vector<S> sl(s.begin(), s.end());
            return act(std::span<const S>(sl), std::span<const S>(x));
        });
    }

private:
    int k_ = 0;
    CoordinateChart chart_;
    detail::ActionEvals act_;
    std::vector<VectorField> fundamental_;
};

/// R^k-valued momentum function, one scalar component per generator.
struct MomentumMap {
    std::vector<ScalarField> components;

    int k() const { return static_cast<int>(components.size()); }
};

/// The constants eta(xi_M) per generator. Constancy over the sampled domain
/// is part of the construction contract.
struct Cocycle {
    std::vector<double> values;
    double spread = 0.0; ///< max observed deviation from the stored values
};

/// Closed-form flow of a vector field, differentiable in the time parameter.
class FlowMap {
public:
    FlowMap() = default;

    template <class F>
    static FlowMap from_closure(CoordinateChart chart, F flow) {
        FlowMap m;
        m.chart_ = std::move(chart);
        m.ev_ = detail::ActionEvals::full(std::move(flow));
        return m;
    }

    const CoordinateChart& chart() const { return chart_; }

    template <class S>
    std::vector<S> at(S time, std::span<const S> x) const {
        std::vector<S> s{time};
        return ev_(std::span<const S>(s), x);
    }

private:
    CoordinateChart chart_;
    detail::ActionEvals ev_;
};

/// Sampled group elements for pullback checks.
inline std::vector<Point> sample_group_elements(int k, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point> out(static_cast<size_t>(count), Point(static_cast<size_t>(k)));
    for (auto& s : out)
        for (auto& c : s) c = u(rng);
    return out;
}

/// Load-time action sanity: identity at 0, additivity, and agreement of the
/// declared fundamental fields with the dual derivative of s -> act(s e_a, x).
inline Report verify_action(const AbelianAction& a, const std::vector<Point>& points,
                            std::uint64_t seed, const Tolerances& tol = {}) {
    Report rep("action consistency");
    rep.set_seed(seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int k = a.k();

    double worst_id = 0.0, worst_comp = 0.0, worst_fund = 0.0;
    for (const auto& x : points) {
        std::span<const double> xs(x);
        // act(0, x) = x
        Point zero(static_cast<size_t>(k), 0.0);
        Point id = a.apply(zero, xs);
        for (size_t i = 0; i < x.size(); ++i)
            worst_id = std::max(worst_id, std::abs(id[i] - x[i]));

        // act(s, act(s', x)) = act(s + s', x)
        Point s1(static_cast<size_t>(k)), s2(static_cast<size_t>(k)), s12(static_cast<size_t>(k));
        for (int j = 0; j < k; ++j) {
            s1[static_cast<size_t>(j)] = u(rng);
            s2[static_cast<size_t>(j)] = u(rng);
            s12[static_cast<size_t>(j)] = s1[static_cast<size_t>(j)] + s2[static_cast<size_t>(j)];
        }
        Point inner = a.apply(s2, xs);
        Point lhs = a.apply(s1, inner);
        Point rhs = a.apply(s12, xs);
        for (size_t i = 0; i < x.size(); ++i)
            worst_comp = std::max(worst_comp, std::abs(lhs[i] - rhs[i]));

        // d/ds act(s e_a, x) at s = 0 equals the declared fundamental field.
        for (int gen = 0; gen < k; ++gen) {
            std::vector<S1> s(static_cast<size_t>(k), S1(0.0));
            s[static_cast<size_t>(gen)] = S1{0.0, 1.0};
            auto xl = lift_point<S1>(xs);
            auto img = a.act<S1>(std::span<const S1>(s), std::span<const S1>(xl));
            auto ff = a.fundamental_fields()[static_cast<size_t>(gen)].eval<double>(xs);
            for (size_t i = 0; i < x.size(); ++i)
                worst_fund = std::max(worst_fund, std::abs(img[i].d - ff[i]));
        }
    }
    rep.check_below("max |act(0,x) - x|", worst_id, tol.algebraic);
    rep.check_below("max additivity defect", worst_comp, tol.algebraic);
    rep.check_below("max fundamental-field defect", worst_fund, 1e-8);
    return rep;
}

/// Invariance of (omega, eta) under sampled group elements plus the
/// infinitesimal conditions L_{xi_M} omega = 0 and d(eta(xi_M)) = 0.
inline Report check_cosymplectic_action(const AbelianAction& a, const CosymplecticStructure& s,
                                        const std::vector<Point>& points, std::uint64_t seed,
                                        const Tolerances& tol = {}) {
    Report rep("cosymplectic action invariance");
    rep.set_seed(seed);
    const auto svals = sample_group_elements(a.k(), 10, seed);

    double worst_omega = 0.0, worst_eta = 0.0;
    for (const auto& sv : svals) {
        SmoothMap phi = a.map_for(sv);
        TwoFormField pw = pullback_2form(phi, s.omega);
        OneFormField pe = pullback_1form(phi, s.eta);
        for (const auto& x : points) {
            std::span<const double> xs(x);
            // The pulled-back point must stay in the guarded domain; the
            // caller's sample box is responsible for that.
            auto w0 = s.omega.eval<double>(xs);
            auto w1 = pw.eval<double>(xs);
            for (size_t i = 0; i < w0.a.size(); ++i)
                worst_omega = std::max(worst_omega, std::abs(w0.a[i] - w1.a[i]));
            auto e0 = s.eta.eval<double>(xs);
            auto e1 = pe.eval<double>(xs);
            for (size_t i = 0; i < e0.size(); ++i)
                worst_eta = std::max(worst_eta, std::abs(e0[i] - e1[i]));
        }
    }
    rep.check_below("max |phi_s^* omega - omega|", worst_omega, tol.momentum);
    rep.check_below("max |phi_s^* eta - eta|", worst_eta, tol.momentum);

    // Infinitesimal invariance through the Cartan formula; omega is closed,
    // so L_{xi} omega = d(i_xi omega).
    double worst_lie = 0.0, worst_deta_xi = 0.0;
    for (const auto& xi : a.fundamental_fields()) {
        TwoFormField d_ixi = exterior_derivative(interior_product_2(xi, s.omega));
        OneFormField d_eta_xi = differential(interior_product_1(xi, s.eta));
        for (const auto& x : points) {
            std::span<const double> xs(x);
            for (double c : contract_d2form<double>(s.omega, xi, xs).a)
                worst_lie = std::max(worst_lie, std::abs(c));
            for (double c : d_ixi.eval<double>(xs).a)
                worst_lie = std::max(worst_lie, std::abs(c));
            for (double c : d_eta_xi.eval<double>(xs))
                worst_deta_xi = std::max(worst_deta_xi, std::abs(c));
        }
    }
    rep.check_below("max |L_{xi_M} omega| (Cartan terms)", worst_lie, 1e-7);
    rep.check_below("max |d(eta(xi_M))|", worst_deta_xi, 1e-7);
    return rep;
}

/// c_eta(e_a) = eta(xi_M^(a)), checked constant across the samples.
inline Cocycle compute_cocycle(const AbelianAction& a, const CosymplecticStructure& s,
                               const std::vector<Point>& points, double constancy_tol = 1e-9) {
    if (points.empty()) throw PreconditionViolation("compute_cocycle: no sample points");
    Cocycle c;
    for (const auto& xi : a.fundamental_fields()) {
        ScalarField eta_xi = interior_product_1(xi, s.eta);
        double first = eta_xi(std::span<const double>(points.front()));
        double spread = 0.0;
        for (const auto& x : points)
            spread = std::max(spread, std::abs(eta_xi(std::span<const double>(x)) - first));
        if (!(spread < constancy_tol)) {
            std::ostringstream os;
            os << "eta(xi_M) varies by " << spread
               << " over samples; action is not cosymplectic or domain is disconnected";
            throw NonConstant(os.str());
        }
        c.values.push_back(first);
        c.spread = std::max(c.spread, spread);
    }
    return c;
}

/// Albert's reduction hypothesis: every cocycle value vanishes.
inline bool albert_condition(const Cocycle& c, double tol = 1e-9) {
    for (double v : c.values)
        if (!(std::abs(v) < tol)) return false;
    return true;
}

/// max |i_{xi_M} omega - dJ_a| over samples and generators.
inline Report verify_momentum(const AbelianAction& a, const CosymplecticStructure& s,
                              const MomentumMap& j, const std::vector<Point>& points,
                              const Tolerances& tol = {}) {
    Report rep("momentum map condition i_{xi_M} omega = dJ");
    if (j.k() != a.k()) throw PreconditionViolation("verify_momentum: component count mismatch");
    double worst = 0.0;
    for (int gen = 0; gen < a.k(); ++gen) {
        OneFormField lhs = interior_product_2(a.fundamental_fields()[static_cast<size_t>(gen)], s.omega);
        OneFormField rhs = differential(j.components[static_cast<size_t>(gen)]);
        for (const auto& x : points) {
            std::span<const double> xs(x);
            auto l = lhs.eval<double>(xs);
            auto r = rhs.eval<double>(xs);
            for (size_t i = 0; i < l.size(); ++i)
                worst = std::max(worst, std::abs(l[i] - r[i]));
        }
    }
    rep.check_below("max |i_{xi_M} omega - dJ| component", worst, tol.momentum);
    rep.info("sample count", static_cast<double>(points.size()));
    return rep;
}

/// J_H = J - c_eta H, valid only for invariant Hamiltonians (sampled).
inline MomentumMap modify_momentum(const MomentumMap& j, const ScalarField& h, const Cocycle& c,
                                   const AbelianAction& a, const std::vector<Point>& points,
                                   std::uint64_t seed, const Tolerances& tol = {}) {
    const auto svals = sample_group_elements(a.k(), 10, seed);
    double worst = 0.0;
    for (const auto& sv : svals)
        for (const auto& x : points) {
            Point moved = a.apply(sv, x);
            worst = std::max(worst, std::abs(h(std::span<const double>(moved)) -
                                             h(std::span<const double>(x))));
        }
    if (!(worst < tol.algebraic)) {
        std::ostringstream os;
        os << "Hamiltonian varies by " << worst << " under the action";
        throw NotInvariant(os.str());
    }

    MomentumMap out;
    for (int gen = 0; gen < j.k(); ++gen) {
        const double ca = c.values[static_cast<size_t>(gen)];
        out.components.push_back(j.components[static_cast<size_t>(gen)] - ca * h);
    }
    return out;
}

/// max |dJ_a(V)| per momentum component and supplied field.
inline Report noether_report(const MomentumMap& j,
                             const std::vector<std::pair<std::string, VectorField>>& fields,
                             const std::vector<Point>& points) {
    Report rep("directional derivatives of momentum components");
    for (int gen = 0; gen < j.k(); ++gen) {
        OneFormField dj = differential(j.components[static_cast<size_t>(gen)]);
        for (const auto& [name, field] : fields) {
            double worst = 0.0;
            for (const auto& x : points) {
                std::span<const double> xs(x);
                auto djv = dj.eval<double>(xs);
                auto fv = field.eval<double>(xs);
                double val = 0.0;
                for (size_t i = 0; i < djv.size(); ++i) val += djv[i] * fv[i];
                worst = std::max(worst, std::abs(val));
            }
            std::ostringstream os;
            os << "max |dJ_" << (gen + 1) << "(" << name << ")|";
            rep.info(os.str(), worst);
        }
    }
    return rep;
}

/// Check that the supplied closed-form flow integrates the given field:
/// d/du Phi_u(x) = R(Phi_u(x)) at sampled (u, x).
inline void verify_flow(const FlowMap& flow, const VectorField& field,
                        const std::vector<Point>& points, std::uint64_t seed, double tol = 1e-8) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (const auto& x : points) {
        const double time = u(rng);
        auto xl = lift_point<S1>(std::span<const double>(x));
        auto img = flow.at(S1{time, 1.0}, std::span<const S1>(xl));
        Point at_img(img.size());
        for (size_t i = 0; i < img.size(); ++i) at_img[i] = img[i].v;
        auto rv = field.eval<double>(std::span<const double>(at_img));
        for (size_t i = 0; i < img.size(); ++i)
            worst = std::max(worst, std::abs(img[i].d - rv[i]));
    }
    if (!(worst < tol)) {
        std::ostringstream os;
        os << "flow defect " << worst << " exceeds " << tol;
        throw FlowMismatch(os.str());
    }
}

/// The modified action of the cocycle-absorption construction:
/// phi~_s(x) = Phi^R_{-f(s)}(phi_s(x)) with f(s) = sum_a c_a s_a, so that
/// eta(xi~_M) = 0. The new fundamental fields are xi_M - c_eta(xi) R.
inline AbelianAction modified_action(const AbelianAction& a, const CosymplecticStructure& s,
                                     const FlowMap& reeb_flow, const Cocycle& c,
                                     const std::vector<Point>& points, std::uint64_t seed,
                                     const Tolerances& tol = {}) {
    VectorField reeb = reeb_field(s, tol);
    verify_flow(reeb_flow, reeb, points, seed);

    const std::vector<double> cvals = c.values;
    auto base = a; // copy for capture
    auto act = [base, reeb_flow, cvals](auto sv, auto xv) {
        using S = typename decltype(xv)::value_type;
        std::vector<S> moved = base.act(sv, xv);
        S shift(0.0);
        for (size_t i = 0; i < cvals.size(); ++i) shift += cvals[i] * sv[i];
        return reeb_flow.at(-shift, std::span<const S>(moved));
    };

    std::vector<VectorField> fields;
    for (int gen = 0; gen < a.k(); ++gen) {
        VectorField xi = a.fundamental_fields()[static_cast<size_t>(gen)];
        const double ca = cvals[static_cast<size_t>(gen)];
        fields.push_back(VectorField::from_closure(a.chart(), [xi, reeb, ca](auto x) {
            using S = typename decltype(x)::value_type;
            std::span<const S> xs(x);
            auto v = xi.eval(xs);
            auto r = reeb.eval(xs);
            for (size_t i = 0; i < v.size(); ++i) v[i] -= ca * r[i];
            return v;
        }));
    }
    return AbelianAction::from_closure(a.k(), a.chart(), std::move(act), std::move(fields));
}

/// Symmetry conditions for a mechanical presymplectic structure: invariance
/// of omega, equivariance of R, and transversality of R to the orbits.
/// Tangency at any sample point is an error naming the offenders.
inline Report check_presym_symmetry(const AbelianAction& a,
                                    const MechanicalPresymplecticStructure& m,
                                    const std::vector<Point>& points, std::uint64_t seed,
                                    const Tolerances& tol = {}) {
    Report rep("mechanical presymplectic symmetry");
    rep.set_seed(seed);
    const auto svals = sample_group_elements(a.k(), 10, seed);

    double worst_omega = 0.0, worst_push = 0.0;
    for (const auto& sv : svals) {
        SmoothMap phi = a.map_for(sv);
        TwoFormField pw = pullback_2form(phi, m.omega);
        for (const auto& x : points) {
            std::span<const double> xs(x);
            auto w0 = m.omega.eval<double>(xs);
            auto w1 = pw.eval<double>(xs);
            for (size_t i = 0; i < w0.a.size(); ++i)
                worst_omega = std::max(worst_omega, std::abs(w0.a[i] - w1.a[i]));

            // T phi_s(R(x)) = R(phi_s(x))
            Mat<double> jac = jacobian<double>(phi, xs);
            auto rv = m.reeb.eval<double>(xs);
            Point moved = phi(xs);
            auto rm = m.reeb.eval<double>(std::span<const double>(moved));
            for (size_t i = 0; i < rv.size(); ++i) {
                double pushed = 0.0;
                for (size_t jj = 0; jj < rv.size(); ++jj)
                    pushed += jac(static_cast<int>(i), static_cast<int>(jj)) * rv[jj];
                worst_push = std::max(worst_push, std::abs(pushed - rm[i]));
            }
        }
    }
    rep.check_below("max |phi_s^* omega - omega|", worst_omega, tol.momentum);
    rep.check_below("max |T phi_s(R) - R o phi_s|", worst_push, tol.momentum);

    // Transversality: R(x) must keep a relative distance from the orbit span.
    double min_dist = std::numeric_limits<double>::infinity();
    std::vector<size_t> offenders;
    for (size_t idx = 0; idx < points.size(); ++idx) {
        std::span<const double> xs(points[idx]);
        Eigen::MatrixXd orbit(m.chart.dim(), a.k());
        for (int gen = 0; gen < a.k(); ++gen)
            orbit.col(gen) = a.fundamental_fields()[static_cast<size_t>(gen)].at(xs);
        const Subspace span = Subspace::span_of(orbit);
        const double dist = span.relative_distance(m.reeb.at(xs));
        min_dist = std::min(min_dist, dist);
        if (!(dist > tol.transversality)) offenders.push_back(idx);
    }
    if (!offenders.empty()) {
        std::ostringstream os;
        os << "Reeb direction tangent to the orbit at " << offenders.size()
           << " sample point(s); first indices:";
        for (size_t i = 0; i < offenders.size() && i < 5; ++i) os << " " << offenders[i];
        throw TangencyDetected(os.str());
    }
    rep.check("min relative Reeb-orbit distance exceeds margin", min_dist > tol.transversality,
              min_dist);
    return rep;
}

} // namespace cosym
