#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cosym/reduction.hpp"

namespace cosym {

/// Run-level knobs shared by the CLI and the pipeline.
struct RunConfig {
    double step = 1e-3;
    double duration = 10.0;
    int samples = 200;
    std::uint64_t seed = 20240917;
    Tolerances tol;
};

/// Everything a reduction run needs: the base cosymplectic structure, the
/// invariant Hamiltonian, the symmetry with its momentum map, the Reeb flow
/// in closed form, a slice recipe and sampling data.
struct Scenario {
    std::string name;
    CoordinateChart chart;
    CosymplecticStructure structure;
    ScalarField hamiltonian;
    AbelianAction action;
    MomentumMap momentum;
    std::optional<FlowMap> reeb_flow;
    std::vector<std::string> slice_dropped; ///< coordinates frozen by the slice
    std::vector<double> slice_values;
    std::vector<double> mu_default;
    SampleBox sample_box;
    std::optional<double> mu_max; ///< level sets nonempty iff mu < mu_max (k = 1)
    std::optional<std::vector<ScalarField>> connection; ///< Y^i for the formalism commands

    SliceChart make_slice() const {
        return make_coordinate_slice(chart, slice_dropped, slice_values);
    }
};

/// N-dimensional harmonic oscillator described by an observer moving with
/// constant velocity v along the first axis. Chart (q1..qN, p1..pN, t); the
/// closed set C where the evolution direction is orbit-tangent is excluded.
inline Scenario make_oscillator_scenario(int N = 2, double m = 1.0, double Omega = 1.0,
                                         double v = 1.0) {
    Scenario sc;
    sc.name = "oscillator-moving-observer";

    auto guard = [N, m, v](std::span<const double> x) {
        // C: q1 = -v t, q_alpha = 0, p1 = -m v, p_alpha = 0
        double dist = std::abs(x[0] + v * x[static_cast<size_t>(2 * N)]);
        dist = std::max(dist, std::abs(x[static_cast<size_t>(N)] + m * v));
        for (int a = 1; a < N; ++a) {
            dist = std::max(dist, std::abs(x[static_cast<size_t>(a)]));
            dist = std::max(dist, std::abs(x[static_cast<size_t>(N + a)]));
        }
        return dist > 1e-9;
    };
    std::vector<std::string> names;
    for (int i = 1; i <= N; ++i) names.push_back("q" + std::to_string(i));
    for (int i = 1; i <= N; ++i) names.push_back("p" + std::to_string(i));
    names.push_back("t");
    sc.chart = CoordinateChart(names, guard);
    sc.structure = darboux_structure(sc.chart);

    sc.hamiltonian = ScalarField::from_closure(sc.chart, [N, m, Omega, v](auto x) {
        using S = typename decltype(x)::value_type;
        S kinetic(0.0), potential(0.0);
        for (int i = 0; i < N; ++i) kinetic += x[static_cast<size_t>(N + i)] * x[static_cast<size_t>(N + i)];
        S shifted = x[0] + v * x[static_cast<size_t>(2 * N)];
        potential += shifted * shifted;
        for (int a = 1; a < N; ++a) potential += x[static_cast<size_t>(a)] * x[static_cast<size_t>(a)];
        return kinetic / (2.0 * m) + 0.5 * m * Omega * Omega * potential;
    });

    // phi(s, (q, p, t)) = (q1 - v s, q_alpha, p, t + s)
    auto act = [N, v](auto s, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[0] = r[0] - v * s[0];
        r[static_cast<size_t>(2 * N)] = r[static_cast<size_t>(2 * N)] + s[0];
        return r;
    };
    VectorField xi = VectorField::from_closure(sc.chart, [N, v](auto x) {
        using S = typename decltype(x)::value_type;
        (void)x;
        std::vector<S> r(static_cast<size_t>(2 * N + 1), S(0.0));
        r[0] = S(-v);
        r[static_cast<size_t>(2 * N)] = S(1.0);
        return r;
    });
    sc.action = AbelianAction::from_closure(1, sc.chart, act, {xi});

    sc.momentum.components.push_back(ScalarField::from_closure(
        sc.chart,
        [N, v](auto x) { return -v * x[static_cast<size_t>(N)]; },
        "-v*p1"));

    sc.reeb_flow = FlowMap::from_closure(sc.chart, [N](auto u, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[static_cast<size_t>(2 * N)] = r[static_cast<size_t>(2 * N)] + u[0];
        return r;
    });

    sc.slice_dropped = {"q1"};
    sc.slice_values = {0.0};
    sc.mu_default = {0.0};
    sc.mu_max = 0.5 * m * v * v;
    sc.sample_box = {Point(static_cast<size_t>(2 * N + 1), 0.0),
                     Point(static_cast<size_t>(2 * N + 1), 1.0)};

    // An Ehresmann connection for the formalism commands: Y^1 = q1, else 0.
    std::vector<ScalarField> conn;
    conn.push_back(ScalarField::coordinate(sc.chart, 0));
    for (int i = 1; i < N; ++i) conn.push_back(ScalarField::constant(sc.chart, 0.0));
    sc.connection = conn;
    return sc;
}

/// Free electron perturbed by a linearly polarized monochromatic plane wave,
/// on (q1..q3, p1..p3, t). The tangency locus C1 u C2 is excluded.
inline Scenario make_plane_wave_scenario(double m = 1.0, double c = 1.0, double ea0 = 0.1) {
    Scenario sc;
    sc.name = "plane-wave";
    constexpr double pi = 3.14159265358979323846;

    auto guard = [m, c, ea0, pi](std::span<const double> x) {
        const double u = x[0] - c * x[6];
        const double p1 = x[3], p2 = x[4], p3 = x[5];
        // C1: u odd multiple of pi/2, p = (m c, 0, 0)
        const double r1 = std::remainder(u - pi / 2.0, pi);
        double d1 = std::abs(r1);
        d1 = std::max({d1, std::abs(p1 - m * c), std::abs(p2), std::abs(p3)});
        // C2: u = n pi, p = (m c, (-1)^n e A0, 0)
        const double n2 = std::round(u / pi);
        const double sign = std::abs(std::fmod(n2, 2.0)) < 0.5 ? 1.0 : -1.0;
        double d2 = std::abs(u - n2 * pi);
        d2 = std::max({d2, std::abs(p1 - m * c), std::abs(p2 - sign * ea0), std::abs(p3)});
        return std::min(d1, d2) > 1e-9;
    };
    sc.chart = CoordinateChart({"q1", "q2", "q3", "p1", "p2", "p3", "t"}, guard);
    sc.structure = darboux_structure(sc.chart);

    sc.hamiltonian = ScalarField::from_closure(sc.chart, [m, c, ea0](auto x) {
        using S = typename decltype(x)::value_type;
        S p1 = x[3], p2 = x[4], p3 = x[5];
        S u = x[0] - c * x[6];
        return (p1 * p1 + p2 * p2 + p3 * p3) / (2.0 * m) - (ea0 / m) * p2 * cos(u);
    });

    // phi(s, (q, p, t)) = (q1 + c s, q_alpha, p, t + s)
    auto act = [c](auto s, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[0] = r[0] + c * s[0];
        r[6] = r[6] + s[0];
        return r;
    };
    VectorField xi = VectorField::from_closure(sc.chart, [c](auto x) {
        using S = typename decltype(x)::value_type;
        (void)x;
        std::vector<S> r(7, S(0.0));
        r[0] = S(c);
        r[6] = S(1.0);
        return r;
    });
    sc.action = AbelianAction::from_closure(1, sc.chart, act, {xi});

    sc.momentum.components.push_back(ScalarField::from_closure(
        sc.chart,
        [c](auto x) { return c * x[3]; },
        "c*p1"));

    sc.reeb_flow = FlowMap::from_closure(sc.chart, [](auto u, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[6] = r[6] + u[0];
        return r;
    });

    sc.slice_dropped = {"q1"};
    sc.slice_values = {0.0};
    sc.mu_default = {0.0};
    sc.mu_max = (m * m * c * c + ea0 * ea0) / (2.0 * m);
    sc.sample_box = {Point(7, 0.0), Point(7, 1.0)};

    std::vector<ScalarField> conn;
    conn.push_back(ScalarField::constant(sc.chart, c));
    conn.push_back(ScalarField::constant(sc.chart, 0.0));
    conn.push_back(ScalarField::constant(sc.chart, 0.0));
    sc.connection = conn;
    return sc;
}

/// Synthetic scenario satisfying Albert's condition: translation in q1 on a
/// Darboux chart with a q1-independent Hamiltonian, so eta(xi_M) = 0 and the
/// reduced slice also carries the reduced 1-form dt.
inline Scenario make_q_translation_scenario() {
    Scenario sc;
    sc.name = "q-translation";
    sc.chart = vstar_pi_chart(2);
    sc.structure = darboux_structure(sc.chart);

    // H = p1^2/2 + p2^2/2 + q2^2/2 (independent of q1 and t)
    sc.hamiltonian = ScalarField::from_closure(sc.chart, [](auto x) {
        return 0.5 * (x[2] * x[2] + x[3] * x[3] + x[1] * x[1]);
    });

    auto act = [](auto s, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[0] = r[0] + s[0];
        return r;
    };
    sc.action = AbelianAction::from_closure(1, sc.chart, act,
                                            {VectorField::coordinate_direction(sc.chart, 0)});

    sc.momentum.components.push_back(
        ScalarField::from_closure(sc.chart, [](auto x) { return x[2]; }, "p1"));

    sc.reeb_flow = FlowMap::from_closure(sc.chart, [](auto u, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[4] = r[4] + u[0];
        return r;
    });

    sc.slice_dropped = {"q1"};
    sc.slice_values = {0.0};
    sc.mu_default = {0.25};
    sc.sample_box = {Point(5, 0.0), Point(5, 1.0)};

    sc.connection = std::vector<ScalarField>{ScalarField::constant(sc.chart, 1.0),
                                             ScalarField::constant(sc.chart, 0.0)};
    return sc;
}

inline std::vector<std::string> builtin_scenario_names() {
    return {"oscillator-moving-observer", "plane-wave", "q-translation"};
}

inline Scenario make_builtin_scenario(const std::string& name) {
    if (name == "oscillator-moving-observer") return make_oscillator_scenario();
    if (name == "plane-wave") return make_plane_wave_scenario();
    if (name == "q-translation") return make_q_translation_scenario();
    throw ParseError("unknown built-in scenario '" + name + "'");
}

/// Assemble the level-set data of the evolution-reduction pipeline:
/// (omega_H, E_H) with the modified momentum map J_H = J - c_eta H.
inline LevelSet make_level_set(const Scenario& sc, const std::vector<double>& mu,
                               const std::vector<Point>& pts, std::uint64_t seed,
                               const Tolerances& tol = {}) {
    CosymplecticStructure modified = modify_structure(sc.structure, sc.hamiltonian);
    MechanicalPresymplecticStructure mech = as_mechanical(modified, tol);
    Cocycle c = compute_cocycle(sc.action, sc.structure, pts, tol.algebraic);
    MomentumMap jh = modify_momentum(sc.momentum, sc.hamiltonian, c, sc.action, pts, seed, tol);
    return LevelSet{mech, jh, mu};
}

/// Load-time validity: base structure, action, momentum condition.
inline std::vector<Report> validate_scenario(const Scenario& sc, const RunConfig& cfg) {
    std::vector<Report> reports;
    auto pts = sample_points(sc.chart, sc.sample_box, cfg.samples, cfg.seed);
    reports.push_back(validate_cosymplectic(sc.structure, pts, cfg.tol));
    reports.push_back(verify_action(sc.action, pts, cfg.seed, cfg.tol));
    reports.push_back(verify_momentum(sc.action, sc.structure, sc.momentum, pts, cfg.tol));
    for (auto& rep : reports) rep.set_seed(cfg.seed);
    return reports;
}

} // namespace cosym
