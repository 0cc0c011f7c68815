#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "cosym/fields.hpp"

namespace cosym {

/// One classical RK4 step, generic over the scalar so that flow maps remain
/// differentiable by dual numbers.
template <class S>
std::vector<S> rk4_step(const VectorField& field, std::span<const S> x, S h) {
    const size_t n = x.size();
    auto scaled_add = [n](std::span<const S> base, const std::vector<S>& dir, S factor) {
        std::vector<S> r(n);
        for (size_t i = 0; i < n; ++i) r[i] = base[i] + factor * dir[i];
        return r;
    };
    std::vector<S> k1 = field.eval(x);
    std::vector<S> x2 = scaled_add(x, k1, h / 2.0);
    std::vector<S> k2 = field.eval(std::span<const S>(x2));
    std::vector<S> x3 = scaled_add(x, k2, h / 2.0);
    std::vector<S> k3 = field.eval(std::span<const S>(x3));
    std::vector<S> x4 = scaled_add(x, k3, h);
    std::vector<S> k4 = field.eval(std::span<const S>(x4));
    std::vector<S> r(n);
    for (size_t i = 0; i < n; ++i)
        r[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return r;
}

/// Fixed-grid trajectory with per-step values of the logged scalar fields.
struct Trajectory {
    std::vector<double> times;
    std::vector<Point> states;
    std::vector<std::vector<double>> invariant_log; // [field][step]

    const Point& final_state() const { return states.back(); }
};

/// Classical fixed-step RK4. Guard violations are reported with the step at
/// which they occurred; non-finite states abort immediately.
inline Trajectory rk4_integrate(const VectorField& field, const Point& x0, double h, double T,
                                const std::vector<ScalarField>& log_fields = {}) {
    if (h <= 0.0) throw PreconditionViolation("rk4_integrate: step must be positive");
    if (T < 0.0) throw PreconditionViolation("rk4_integrate: duration must be non-negative");
    const long steps = std::lround(T / h);
    Trajectory traj;
    traj.times.reserve(static_cast<size_t>(steps) + 1);
    traj.states.reserve(static_cast<size_t>(steps) + 1);
    traj.invariant_log.resize(log_fields.size());

    Point x = x0;
    for (long k = 0;; ++k) {
        require_finite(x, "rk4_integrate");
        try {
            field.chart().require_inside(x);
            traj.times.push_back(static_cast<double>(k) * h);
            traj.states.push_back(x);
            for (size_t f = 0; f < log_fields.size(); ++f)
                traj.invariant_log[f].push_back(log_fields[f](std::span<const double>(x)));
            if (k == steps) break;
            auto next = rk4_step<double>(field, std::span<const double>(x), h);
            x.assign(next.begin(), next.end());
        } catch (const DomainGuardViolation& e) {
            std::ostringstream os;
            os << e.what() << " (step " << k << ")";
            throw DomainGuardViolation(os.str());
        }
    }
    return traj;
}

/// Time-t flow of a vector field as a differentiable map (a few RK4 substeps;
/// adequate for the small flow times used in Lie-derivative checks).
inline SmoothMap flow_map(const VectorField& field, double time, int substeps = 1) {
    return SmoothMap::from_closure(field.chart(), field.chart(), [field, time, substeps](auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> cur(x.begin(), x.end());
        const S h = S(time / substeps);
        for (int k = 0; k < substeps; ++k) cur = rk4_step<S>(field, std::span<const S>(cur), h);
        return cur;
    });
}

/// Lie derivative of a 2-form along X by flow finite differences with
/// Richardson extrapolation: D(e) = [phi_e^* w - phi_{-e}^* w](x)/(2e),
/// L_X w ~= (4 D(e/2) - D(e)) / 3.
inline Eigen::MatrixXd lie_derivative_2form(const VectorField& xf, const TwoFormField& omega,
                                            const Point& x, double step = 1e-4) {
    auto centered = [&](double eps) {
        auto fwd = pullback_2form(flow_map(xf, eps), omega);
        auto bwd = pullback_2form(flow_map(xf, -eps), omega);
        Eigen::MatrixXd mf = to_eigen(fwd.eval<double>(std::span<const double>(x)));
        Eigen::MatrixXd mb = to_eigen(bwd.eval<double>(std::span<const double>(x)));
        return Eigen::MatrixXd(((mf - mb) / (2.0 * eps)).eval());
    };
    const Eigen::MatrixXd d1 = centered(step);
    const Eigen::MatrixXd d2 = centered(step / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

/// Same scheme for a 1-form.
inline Eigen::VectorXd lie_derivative_1form(const VectorField& xf, const OneFormField& alpha,
                                            const Point& x, double step = 1e-4) {
    auto centered = [&](double eps) {
        auto fwd = pullback_1form(flow_map(xf, eps), alpha);
        auto bwd = pullback_1form(flow_map(xf, -eps), alpha);
        Eigen::VectorXd vf = fwd.at(x);
        Eigen::VectorXd vb = bwd.at(x);
        return Eigen::VectorXd(((vf - vb) / (2.0 * eps)).eval());
    };
    const Eigen::VectorXd d1 = centered(step);
    const Eigen::VectorXd d2 = centered(step / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

} // namespace cosym
