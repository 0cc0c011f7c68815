#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cosym/scenario.hpp"

using namespace cosym;

namespace {

const std::uint64_t kSeed = 777;

std::vector<Point> box_samples(const Scenario& sc, int count, std::uint64_t seed = kSeed) {
    return sample_points(sc.chart, sc.sample_box, count, seed);
}

// Scaling action q -> e^s q, p -> p on a Darboux chart: not cosymplectic.
AbelianAction scaling_action(const CoordinateChart& chart) {
    auto act = [](auto s, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[0] = exp(s[0]) * r[0];
        return r;
    };
    VectorField xi = VectorField::from_closure(chart, [](auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.size(), S(0.0));
        r[0] = x[0];
        return r;
    });
    return AbelianAction::from_closure(1, chart, act, {xi});
}

} // namespace

TEST_CASE("built-in actions satisfy the action axioms") {
    for (const auto& name : builtin_scenario_names()) {
        Scenario sc = make_builtin_scenario(name);
        CHECK(verify_action(sc.action, box_samples(sc, 100), kSeed).pass());
    }
}

TEST_CASE("cosymplectic action check: oscillator and translation pass, scaling fails") {
    Scenario osc = make_oscillator_scenario();
    CHECK(check_cosymplectic_action(osc.action, osc.structure, box_samples(osc, 50), kSeed).pass());

    Scenario qtr = make_q_translation_scenario();
    CHECK(check_cosymplectic_action(qtr.action, qtr.structure, box_samples(qtr, 50), kSeed).pass());

    // Pullback factor e^s on dq^dp: hand oracle says deviation |e^s - 1|
    // cannot stay below tolerance over sampled s.
    auto bad = scaling_action(qtr.chart);
    CHECK(!check_cosymplectic_action(bad, qtr.structure, box_samples(qtr, 20), kSeed).pass());
}

TEST_CASE("cocycle values: 1, 1, 0 for the built-in scenarios") {
    Scenario osc = make_oscillator_scenario();
    Cocycle c1 = compute_cocycle(osc.action, osc.structure, box_samples(osc, 200));
    REQUIRE(c1.values.size() == 1);
    CHECK(std::abs(c1.values[0] - 1.0) < 1e-12);
    CHECK(!albert_condition(c1));

    Scenario pw = make_plane_wave_scenario();
    Cocycle c2 = compute_cocycle(pw.action, pw.structure, box_samples(pw, 200));
    CHECK(std::abs(c2.values[0] - 1.0) < 1e-12);
    CHECK(!albert_condition(c2));

    Scenario qtr = make_q_translation_scenario();
    Cocycle c3 = compute_cocycle(qtr.action, qtr.structure, box_samples(qtr, 200));
    CHECK(std::abs(c3.values[0]) < 1e-12);
    CHECK(albert_condition(c3));
}

TEST_CASE("a non-cosymplectic action makes eta(xi_M) non-constant") {
    Scenario qtr = make_q_translation_scenario();
    // t -> e^s t is a genuine R-action with eta(xi_M) = t.
    auto act = [](auto s, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[4] = exp(s[0]) * r[4];
        return r;
    };
    VectorField xi = VectorField::from_closure(qtr.chart, [](auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.size(), S(0.0));
        r[4] = x[4];
        return r;
    });
    auto bad = AbelianAction::from_closure(1, qtr.chart, act, {xi});
    CHECK_THROWS_AS((void)compute_cocycle(bad, qtr.structure, box_samples(qtr, 100)), NonConstant);
}

TEST_CASE("momentum verification: built-ins pass, a perturbed map fails with residual 1") {
    Scenario osc = make_oscillator_scenario();
    CHECK(verify_momentum(osc.action, osc.structure, osc.momentum, box_samples(osc, 100)).pass());

    Scenario pw = make_plane_wave_scenario();
    CHECK(verify_momentum(pw.action, pw.structure, pw.momentum, box_samples(pw, 100)).pass());

    MomentumMap perturbed;
    perturbed.components.push_back(osc.momentum.components[0] +
                                   ScalarField::coordinate(osc.chart, 0));
    Report rep = verify_momentum(osc.action, osc.structure, perturbed, box_samples(osc, 100));
    CHECK(!rep.pass());
    CHECK(rep.items()[0].value == doctest::Approx(1.0)); // residual is dq1
}

TEST_CASE("modified momentum: zero cocycle leaves J unchanged; oscillator gives J - H") {
    Scenario qtr = make_q_translation_scenario();
    auto pts = box_samples(qtr, 100);
    Cocycle c0 = compute_cocycle(qtr.action, qtr.structure, pts);
    MomentumMap same = modify_momentum(qtr.momentum, qtr.hamiltonian, c0, qtr.action, pts, kSeed);
    for (const auto& x : pts)
        CHECK(same.components[0](std::span<const double>(x)) ==
              doctest::Approx(qtr.momentum.components[0](std::span<const double>(x))));

    Scenario osc = make_oscillator_scenario();
    auto opts = box_samples(osc, 100);
    Cocycle c1 = compute_cocycle(osc.action, osc.structure, opts);
    MomentumMap jh = modify_momentum(osc.momentum, osc.hamiltonian, c1, osc.action, opts, kSeed);
    const double m = 1.0, W = 1.0, v = 1.0;
    for (const auto& x : opts) {
        std::span<const double> xs(x);
        const double q1 = x[0], q2 = x[1], p1 = x[2], p2 = x[3], t = x[4];
        // (J_H)_1 = m v^2/2 - ((p1 + m v)^2 + p2^2)/(2m)
        //           - m W^2 ((q1 + v t)^2 + q2^2)/2
        const double expected = 0.5 * m * v * v -
                                ((p1 + m * v) * (p1 + m * v) + p2 * p2) / (2.0 * m) -
                                0.5 * m * W * W * ((q1 + v * t) * (q1 + v * t) + q2 * q2);
        CHECK(jh.components[0](xs) == doctest::Approx(expected).epsilon(1e-12));
    }

    // The modified map is a momentum map for the modified structure.
    CosymplecticStructure modified = modify_structure(osc.structure, osc.hamiltonian);
    CHECK(verify_momentum(osc.action, modified, jh, opts).pass());

    // A non-invariant Hamiltonian is rejected.
    auto h_bad = ScalarField::coordinate(osc.chart, 0);
    CHECK_THROWS_AS(
        (void)modify_momentum(osc.momentum, h_bad, c1, osc.action, opts, kSeed), NotInvariant);
}

TEST_CASE("first-integral witnesses: E_H conserves J_H, X_H and R do not") {
    Scenario osc = make_oscillator_scenario();
    const double m = 1.0, W = 1.0, v = 1.0;
    auto pts = box_samples(osc, 100);
    Cocycle c = compute_cocycle(osc.action, osc.structure, pts);
    MomentumMap jh = modify_momentum(osc.momentum, osc.hamiltonian, c, osc.action, pts, kSeed);

    VectorField e_h = evolution_field(osc.structure, osc.hamiltonian);
    VectorField x_h = hamiltonian_field(osc.structure, osc.hamiltonian);
    VectorField reeb = reeb_field(osc.structure);
    OneFormField djh = differential(jh.components[0]);

    for (const auto& x : pts) {
        std::span<const double> xs(x);
        auto d = djh.eval<double>(xs);
        auto contract = [&](const VectorField& f) {
            auto fv = f.eval<double>(xs);
            double val = 0.0;
            for (size_t i = 0; i < d.size(); ++i) val += d[i] * fv[i];
            return val;
        };
        const double witness = m * W * W * v * (x[0] + v * x[4]); // m W^2 v (q1 + v t)
        CHECK(std::abs(contract(e_h)) < 1e-8);
        CHECK(contract(x_h) == doctest::Approx(witness).epsilon(1e-9));
        CHECK(contract(reeb) == doctest::Approx(-witness).epsilon(1e-9));
    }

    // noether_report exposes the same maxima.
    Report rep = noether_report(jh, {{"E_H", e_h}, {"X_H", x_h}}, pts);
    CHECK(rep.items()[0].value < 1e-8);
    CHECK(rep.items()[1].value > 0.1);
}

TEST_CASE("modified action: t-component cancels, eta(xi~) = 0, momentum survives") {
    Scenario osc = make_oscillator_scenario();
    auto pts = box_samples(osc, 100);
    Cocycle c = compute_cocycle(osc.action, osc.structure, pts);
    AbelianAction tilde =
        modified_action(osc.action, osc.structure, *osc.reeb_flow, c, pts, kSeed);

    // phi~_s(q, p, t) = (q1 - v s, q_alpha, p, t): the time shift cancels.
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& x : pts) {
        Point s{u(rng)};
        Point moved = tilde.apply(s, x);
        CHECK(moved[0] == doctest::Approx(x[0] - 1.0 * s[0]));
        CHECK(moved[1] == doctest::Approx(x[1]));
        CHECK(moved[2] == doctest::Approx(x[2]));
        CHECK(moved[3] == doctest::Approx(x[3]));
        CHECK(moved[4] == doctest::Approx(x[4]));
    }

    CHECK(verify_action(tilde, pts, kSeed).pass());

    // xi~_M = xi_M - c_eta(xi) R and eta(xi~_M) = 0.
    VectorField reeb = reeb_field(osc.structure);
    ScalarField eta_xi = interior_product_1(tilde.fundamental_fields()[0], osc.structure.eta);
    for (const auto& x : pts) {
        std::span<const double> xs(x);
        auto got = tilde.fundamental_fields()[0].eval<double>(xs);
        auto xi = osc.action.fundamental_fields()[0].eval<double>(xs);
        auto r = reeb.eval<double>(xs);
        for (size_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got[i] - (xi[i] - c.values[0] * r[i])) < 1e-8);
        CHECK(std::abs(eta_xi(xs)) < 1e-8);
    }

    // Still a Hamiltonian action with the original momentum map.
    CHECK(verify_momentum(tilde, osc.structure, osc.momentum, pts).pass());

    // A wrong flow is rejected.
    FlowMap wrong = FlowMap::from_closure(osc.chart, [](auto uu, auto x) {
        using S = typename decltype(x)::value_type;
        std::vector<S> r(x.begin(), x.end());
        r[4] = r[4] + 2.0 * uu[0];
        return r;
    });
    CHECK_THROWS_AS(
        (void)modified_action(osc.action, osc.structure, wrong, c, pts, kSeed), FlowMismatch);
}

TEST_CASE("presymplectic symmetry: passes away from C, detects tangency near C") {
    Scenario osc = make_oscillator_scenario();
    CosymplecticStructure modified = modify_structure(osc.structure, osc.hamiltonian);
    MechanicalPresymplecticStructure mech = as_mechanical(modified);

    CHECK(check_presym_symmetry(osc.action, mech, box_samples(osc, 60), kSeed).pass());

    // A point 1e-8 away from C: inside the guarded domain, but the evolution
    // direction is orbit-tangent to within far less than the margin.
    const double t = 0.3;
    Point near_c{-t + 1e-8, 1e-8, -1.0 + 1e-8, 1e-8, t};
    CHECK_THROWS_AS(
        (void)check_presym_symmetry(osc.action, mech, {near_c}, kSeed), TangencyDetected);
}

TEST_CASE("plane-wave symmetry of the mechanical structure") {
    Scenario pw = make_plane_wave_scenario();
    CosymplecticStructure modified = modify_structure(pw.structure, pw.hamiltonian);
    MechanicalPresymplecticStructure mech = as_mechanical(modified);
    CHECK(check_presym_symmetry(pw.action, mech, box_samples(pw, 60), kSeed).pass());
}
