#pragma once

#include <string>
#include <vector>

#include "cosym/scenario.hpp"

namespace cosym {

enum class PipelineStatus { Completed, EmptyLevelSet, Failed };

/// Stage-by-stage outputs of the evolution-reduction pipeline. On a stage
/// error the reports of the prior stages are preserved.
struct PipelineResult {
    PipelineStatus status = PipelineStatus::Completed;
    std::vector<Report> reports;
    std::string failure; ///< diagnostic when status == Failed

    bool pass() const {
        if (status == PipelineStatus::Failed) return false;
        for (const auto& r : reports)
            if (!r.pass()) return false;
        return true;
    }
};

/// Execute: validate, modify to Reeb dynamics, mechanical structure, cocycle
/// diagnosis, momentum modification, symmetry check, level set, pointwise
/// tangent/perp identities, reduction, and the dynamics comparison.
inline PipelineResult run_pipeline(const Scenario& sc, const std::vector<double>& mu,
                                   const RunConfig& cfg) {
    PipelineResult res;
    try {
        auto pts = sample_points(sc.chart, sc.sample_box, cfg.samples, cfg.seed);

        // Stage 1: base-structure and symmetry-data validity.
        for (auto& r : validate_scenario(sc, cfg)) res.reports.push_back(std::move(r));

        // Stage 2: modified structure; its Reeb field must recover the
        // evolution field of the base structure.
        CosymplecticStructure modified = modify_structure(sc.structure, sc.hamiltonian);
        {
            Report rep("evolution dynamics as Reeb dynamics");
            VectorField reeb_mod = reeb_field(modified, cfg.tol);
            VectorField evo = evolution_field(sc.structure, sc.hamiltonian, cfg.tol);
            double worst = 0.0;
            for (const auto& x : pts) {
                auto a = reeb_mod.eval<double>(std::span<const double>(x));
                auto b = evo.eval<double>(std::span<const double>(x));
                for (size_t i = 0; i < a.size(); ++i)
                    worst = std::max(worst, std::abs(a[i] - b[i]));
            }
            rep.check_below("max |Reeb(omega_H) - E_H| component", worst, 1e-8);
            res.reports.push_back(std::move(rep));
        }
        res.reports.push_back(validate_cosymplectic(modified, pts, cfg.tol));

        // Stage 3: mechanical presymplectic structure (omega_H, E_H).
        MechanicalPresymplecticStructure mech = as_mechanical(modified, cfg.tol);

        // Stage 4: cocycle and Albert diagnosis.
        Cocycle cocycle = compute_cocycle(sc.action, sc.structure, pts, cfg.tol.algebraic);
        {
            Report rep("cocycle and Albert condition");
            for (size_t a = 0; a < cocycle.values.size(); ++a)
                rep.info("c_eta(e_" + std::to_string(a + 1) + ")", cocycle.values[a]);
            rep.info("max spread over samples", cocycle.spread);
            rep.check("cocycle constant over samples", true);
            rep.note(albert_condition(cocycle)
                         ? "Albert condition holds: cosymplectic reduction applicable"
                         : "Albert condition fails: mechanical presymplectic reduction required");
            res.reports.push_back(std::move(rep));
        }

        // Stage 5: modified momentum map against the modified structure.
        MomentumMap j_h =
            modify_momentum(sc.momentum, sc.hamiltonian, cocycle, sc.action, pts, cfg.seed, cfg.tol);
        res.reports.push_back(verify_momentum(sc.action, modified, j_h, pts, cfg.tol));

        // Stage 6: symmetry of the mechanical structure.
        res.reports.push_back(check_presym_symmetry(sc.action, mech, pts, cfg.seed, cfg.tol));

        // Stage 7: level set and emptiness.
        LevelSet level{mech, j_h, mu};
        if (sc.mu_max && !(mu[0] < *sc.mu_max)) {
            Report rep("level set");
            rep.info("mu", mu[0]);
            rep.info("analytic bound mu_max", *sc.mu_max);
            rep.note("EmptyLevelSet: no points satisfy J_H = mu");
            res.reports.push_back(std::move(rep));
            res.status = PipelineStatus::EmptyLevelSet;
            return res;
        }
        LevelProbe probe = probe_level_set(level, sc.sample_box, 100, cfg.seed);
        if (probe.empty()) {
            Report rep("level set");
            rep.info("mu", mu[0]);
            rep.info("projection successes of 100 seeds", 0.0);
            rep.note("EmptyLevelSet: no points satisfy J_H = mu");
            res.reports.push_back(std::move(rep));
            res.status = PipelineStatus::EmptyLevelSet;
            return res;
        }
        {
            Report rep("level set");
            rep.info("mu", mu[0]);
            rep.info("projection successes of 100 seeds", probe.successes);
            double worst = 0.0;
            for (const auto& x : probe.points)
                worst = std::max(worst, level.constraint_residual(x));
            rep.check_below("max |J_H - mu| at projected points", worst, 1e-10);
            res.reports.push_back(std::move(rep));
        }

        // Stage 8: pointwise tangent/perp identities at on-level points.
        {
            Report rep("tangent/perp identities over on-level samples");
            const int count = std::min<int>(50, static_cast<int>(probe.points.size()));
            bool all = true;
            double worst = 0.0;
            for (int i = 0; i < count; ++i) {
                Report one = tangent_perp_report(level, sc.action, probe.points[static_cast<size_t>(i)],
                                                 cfg.tol);
                all = all && one.pass();
                for (const auto& it : one.items())
                    if (it.threshold) worst = std::max(worst, it.value);
            }
            rep.check("all pointwise reports pass", all, static_cast<double>(count));
            rep.check_below("max projector distance", worst, cfg.tol.prop46_projector);
            res.reports.push_back(std::move(rep));
        }

        // Stage 9: reduction on the scenario slice.
        SliceChart slice = sc.make_slice();
        ReducedStructure red = reduce(level, sc.action, slice, cfg.tol);
        SampleBox slice_box;
        for (int i = 0; i < sc.chart.dim(); ++i) {
            const std::string& nm = sc.chart.name(i);
            if (std::find(sc.slice_dropped.begin(), sc.slice_dropped.end(), nm) ==
                sc.slice_dropped.end()) {
                slice_box.center.push_back(sc.sample_box.center[static_cast<size_t>(i)]);
                slice_box.halfwidth.push_back(sc.sample_box.halfwidth[static_cast<size_t>(i)]);
            }
        }
        auto slice_pts = sample_on_slice(red, slice_box, cfg.samples, cfg.seed + 1);
        res.reports.push_back(verify_reduced(red, slice_pts, cfg.tol));

        // Stage 10: ambient vs reduced dynamics through the quotient.
        Point x0 = probe.points.front();
        res.reports.push_back(
            compare_dynamics(level, sc.action, red, x0, cfg.duration, cfg.step, cfg.tol));

        res.status = PipelineStatus::Completed;
    } catch (const Error& e) {
        res.status = PipelineStatus::Failed;
        res.failure = e.what();
    }
    return res;
}

} // namespace cosym
