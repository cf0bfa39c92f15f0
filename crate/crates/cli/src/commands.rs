//! The five subcommands. Each writes its data files into the run directory
//! and returns a human-readable report for stdout.

use std::fmt::Write as _;
use std::path::Path;

use infofit_core::collective::{communicate, communication_gain, total_fitness, FitnessRoster};
use infofit_core::conceptualization::{
    autoencoder_ensemble, ensemble_member_model, intermix_region, latent_map, separation_score, EnsembleData,
};
use infofit_core::constraints::feasible;
use infofit_core::evolution::{run_evolution, run_stages, EvolutionContext, Trajectory, VariationKind};
use infofit_core::exec::Executor;
use infofit_core::infotheory::{fitness_of_model, mutual_information, JointModel, ProbabilityVector};
use infofit_core::models::{resource_costs, Architecture, EncoderModel, Family};
use infofit_core::rng;
use infofit_core::training::{fit_threshold_exact, initialize_encoder, train_local_search, Objective, Trainable};
use infofit_core::worlds::{mean_survival, sample_world, survival_batch, World, WorldKind};
use serde::Serialize;
use serde_json::json;

use crate::config::{load_roster, RunConfig};
use crate::error::{CliError, CliResult};
use crate::formats::{joint_to_csv, latents_to_csv, model_to_json};
use crate::run::{Cell, RunDir, Table};

fn check_input_dim(arch: &Architecture, world: &World) -> CliResult<()> {
    if arch.input_dim != world.observation_dim() {
        return Err(CliError::config(format!(
            "model input_dim {} does not match the world's observation width {}",
            arch.input_dim,
            world.observation_dim()
        )));
    }
    Ok(())
}

fn check_feasible(cfg: &RunConfig, arch: &Architecture, run: &mut RunDir) -> CliResult<()> {
    let costs = resource_costs(arch, &cfg.evolution.costs);
    let f = feasible(arch, &cfg.constraints, &cfg.evolution.costs);
    run.event("feasibility", &json!({ "feasible": f.feasible, "violations": f.violations, "costs": costs }))?;
    if f.feasible {
        Ok(())
    } else {
        Err(CliError::Infeasible(f.violations.iter().map(|v| v.to_string()).collect()))
    }
}

fn table_text(m: &JointModel) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>8}", "");
    for x in m.x_labels() {
        let _ = write!(out, " {x:>10}");
    }
    out.push('\n');
    for (t, label) in m.t_labels().iter().enumerate() {
        let _ = write!(out, "{label:>8}");
        for v in m.row(t) {
            let _ = write!(out, " {v:>10.6}");
        }
        out.push('\n');
    }
    out
}

/// Perfect, binary-channel and uninformative reference models for a
/// two-label world.
fn reference_models(prior: &ProbabilityVector, correctness: f64) -> CliResult<Vec<(&'static str, JointModel)>> {
    Ok(vec![
        ("M_p", JointModel::binary_channel(prior, 1.0)?),
        ("M_1", JointModel::binary_channel(prior, correctness)?),
        ("M_2", JointModel::binary_channel(prior, 0.5)?),
    ])
}

pub fn fitness<E: Executor>(cfg: &RunConfig, run: &mut RunDir, _exec: &E) -> CliResult<String> {
    let world = cfg.world()?;
    world.validate()?;
    let arch = cfg.model()?;
    arch.validate()?;
    check_input_dim(arch, world)?;
    check_feasible(cfg, arch, run)?;
    let f = &cfg.fitness;
    if f.samples == 0 {
        return Err(CliError::config("fitness.samples must be at least 1"));
    }

    let samples = sample_world(world, f.samples, world.seed);
    let seed = rng::split(cfg.seed, "fitness", 0);
    let start = initialize_encoder(arch, &samples, f.states, rng::split(seed, "init", 0))?;
    let budget = f.budget.with_seed(seed);
    let (trained, result) = train_local_search(&Trainable::Encoder(start), &samples, Objective::InformationFitness, &budget)?;
    let model = trained.into_encoder();
    let (joint, value) = fitness_of_model(&model, &samples, rng::split(seed, "readout", 0))?;
    run.event(
        "training",
        &json!({ "evaluations_used": result.evaluations_used, "accepted_steps": result.accepted.len(), "best": result.best() }),
    )?;
    run.event("fitness", &json!({ "model": "trained", "fitness": value.bits() }))?;
    run.file("joint.csv", &joint_to_csv(&joint))?;
    run.file("model.json", &model_to_json(&model))?;

    let mut table = Table::new(&["model", "fitness"]);
    table.push(vec![Cell::Text("trained".into()), Cell::Float(value.bits())]);
    let mut report = String::new();
    let _ = writeln!(report, "joint table P(t, x):\n{}", table_text(&joint));
    let _ = writeln!(report, "fitness: {:.6} bits", value.bits());
    let _ = writeln!(report, "feasible: yes");

    if world.label_count() == 2 {
        let refs = reference_models(&world.class_priors(), f.correctness)?;
        let values: Vec<f64> = refs.iter().map(|(_, m)| mutual_information(m).bits()).collect();
        for ((name, m), v) in refs.iter().zip(&values) {
            run.event("reference", &json!({ "model": name, "fitness": v }))?;
            run.file(&format!("joint_{}.csv", name.to_lowercase()), &joint_to_csv(m))?;
            table.push(vec![Cell::Text((*name).into()), Cell::Float(*v)]);
        }
        let ordered = values.windows(2).all(|w| w[0] > w[1]);
        run.event("ordering", &json!({ "holds": ordered }))?;
        let _ = writeln!(
            report,
            "reference: F(M_p) = {:.6}, F(M_1) = {:.6}, F(M_2) = {:.6}; F(M_p) > F(M_1) > F(M_2): {}",
            values[0],
            values[1],
            values[2],
            if ordered { "yes" } else { "no" }
        );
    }
    run.summary(&table)?;
    Ok(report)
}

fn write_trajectory(run: &mut RunDir, t: &Trajectory) -> CliResult<()> {
    #[derive(Serialize)]
    struct GenerationLine<'a> {
        generation: u64,
        best_fitness: f64,
        mean_fitness: f64,
        best_arch: &'a Architecture,
        population_size: usize,
        accepted_variations: usize,
        stage: usize,
    }
    let mut next = 0;
    for s in &t.summaries {
        while next < t.records.len() && t.records[next].generation == s.generation {
            run.event("variation", &t.records[next])?;
            next += 1;
        }
        run.event(
            "generation",
            &GenerationLine {
                generation: s.generation,
                best_fitness: s.best_fitness,
                mean_fitness: s.mean_fitness,
                best_arch: &s.best_arch,
                population_size: s.population_size,
                accepted_variations: s.accepted_variations,
                stage: s.stage,
            },
        )?;
    }
    let mut table = Table::new(&["generation", "best_F", "mean_F", "best_units", "best_energy"]);
    for s in &t.summaries {
        table.push(vec![
            Cell::Int(s.generation),
            Cell::Float(s.best_fitness),
            Cell::Float(s.mean_fitness),
            Cell::Int(s.best_units as u64),
            Cell::Float(s.best_energy),
        ]);
    }
    run.summary(&table)?;
    Ok(())
}

pub fn evolve<E: Executor>(cfg: &RunConfig, run: &mut RunDir, exec: &E) -> CliResult<String> {
    let arch = cfg.model()?;
    arch.validate()?;
    let trajectory = if cfg.stages.is_empty() {
        let world = cfg.world()?;
        let generations = cfg.generations.unwrap_or(0);
        if generations == 0 {
            return Err(CliError::config("generations must be at least 1"));
        }
        check_input_dim(arch, world)?;
        check_feasible(cfg, arch, run)?;
        let ctx = EvolutionContext::new(world.clone(), cfg.evolution.clone(), cfg.constraints)?;
        run_evolution(arch, &ctx, generations, cfg.seed, exec)?
    } else {
        if cfg.stages.iter().any(|s| s.generations == 0) {
            return Err(CliError::config("every stage needs at least 1 generation"));
        }
        let first = arch.retarget(cfg.stages[0].world.observation_dim());
        check_feasible(cfg, &first, run)?;
        let stages = cfg
            .stages
            .iter()
            .map(|s| {
                let mut evo = cfg.evolution.clone();
                if let Some(allowed) = &s.allowed_variations {
                    evo.allowed_variations = allowed.clone();
                }
                Ok((EvolutionContext::new(s.world.clone(), evo, cfg.constraints)?, s.generations))
            })
            .collect::<CliResult<Vec<_>>>()?;
        run_stages(arch, &stages, cfg.seed, exec)?
    };
    write_trajectory(run, &trajectory)?;
    let leader = &trajectory.final_population.individuals[0];
    run.file("best_model.json", &model_to_json(&leader.model))?;

    let last = trajectory.summaries.last().expect("runs record generation 0");
    let add_units = trajectory.records.iter().filter(|r| r.accepted && r.op.kind == VariationKind::AddUnit).count();
    let accepted = trajectory.records.iter().filter(|r| r.accepted).count();
    Ok(format!(
        "generations: {}\nbest fitness: {:.6} bits\nleading architecture: {:?} units {:?}, latent {}, preprocessing {}\n\
         energy: {:.4}\nvariations: {} proposed, {} accepted ({} add_unit)\n",
        last.generation,
        last.best_fitness,
        last.best_arch.family,
        last.best_arch.units_per_layer,
        last.best_arch.latent_dim,
        last.best_arch.preprocessing,
        last.best_energy,
        trajectory.records.len(),
        accepted,
        add_units
    ))
}

pub fn conceptualize<E: Executor>(cfg: &RunConfig, run: &mut RunDir, exec: &E) -> CliResult<String> {
    let world = cfg.world()?;
    world.validate()?;
    let mut ens = cfg.conceptualize.ensemble.clone();
    match cfg.model.as_ref() {
        Some(arch) if arch.family != Family::MultiLayer => return single_model_concepts(cfg, arch, run),
        Some(arch) => {
            check_input_dim(arch, world)?;
            ens.hidden = arch.units_per_layer.clone();
            ens.latent_dim = arch.latent_dim;
        }
        None => {}
    }
    let report = autoencoder_ensemble(world, &ens, cfg.seed, exec)?;
    let mut table = Table::new(&["member", "budget", "accuracy", "mu_x", "bound_holds"]);
    for m in &report.members {
        run.event("member", m)?;
        table.push(vec![
            Cell::Int(m.member as u64),
            Cell::Int(m.budget as u64),
            Cell::Float(m.accuracy),
            Cell::Float(m.mu_x),
            Cell::Bool(m.bound_holds),
        ]);
    }
    run.event("ensemble", &json!({ "members": report.members.len(), "spearman": report.correlation, "beta": ens.beta }))?;
    run.summary(&table)?;

    // latent map and intermix region of the most accurate member
    let best = report
        .members
        .iter()
        .max_by(|a, b| a.accuracy.total_cmp(&b.accuracy).then(b.member.cmp(&a.member)))
        .expect("ensembles have members");
    let data = EnsembleData::new(world, &ens, cfg.seed)?;
    let model = ensemble_member_model(&data, &ens, cfg.seed, best.member)?;
    let latents = latent_map(&model.encoder, &data.eval)?;
    let region = intermix_region(&latents, &ens.grid, ens.beta_ratio)?;
    run.file("latent.csv", &latents_to_csv(&latents))?;
    run.json("intermix.json", &region)?;

    let holds = report.members.iter().filter(|m| m.bound_holds).count();
    Ok(format!(
        "members: {}\nspearman(accuracy, mu_X): {:.4}\nbound mu_X <= beta (1 - A) holds for {holds}/{} members\n\
         most accurate member {}: accuracy {:.4}, mu_X {:.4}\n",
        report.members.len(),
        report.correlation,
        report.members.len(),
        best.member,
        best.accuracy,
        best.mu_x
    ))
}

/// Information-trained discrete encoder: latent map and intermix region.
fn single_model_concepts(cfg: &RunConfig, arch: &Architecture, run: &mut RunDir) -> CliResult<String> {
    let world = cfg.world()?;
    arch.validate()?;
    check_input_dim(arch, world)?;
    let ens = &cfg.conceptualize.ensemble;
    let samples = sample_world(world, cfg.fitness.samples.max(1), world.seed);
    let seed = rng::split(cfg.seed, "conceptualize", 0);
    let start = initialize_encoder(arch, &samples, cfg.fitness.states, rng::split(seed, "init", 0))?;
    let budget = cfg.fitness.budget.with_seed(seed);
    let (trained, _) = train_local_search(&Trainable::Encoder(start), &samples, Objective::InformationFitness, &budget)?;
    let model: EncoderModel = trained.into_encoder();
    let eval = sample_world(world, ens.eval_samples, rng::split(seed, "eval", 0));
    let latents = latent_map(&model, &eval)?;
    let region = intermix_region(&latents, &ens.grid, ens.beta_ratio)?;
    let purity = separation_score(&latents, world.label_count(), &ens.grid)?;
    run.event("intermix", &region)?;
    run.event("separation", &json!({ "score": purity }))?;
    run.file("latent.csv", &latents_to_csv(&latents))?;
    run.json("intermix.json", &region)?;
    run.file("model.json", &model_to_json(&model))?;
    let mut table = Table::new(&["mu_x", "mixed_cells", "occupied_cells", "separation"]);
    table.push(vec![
        Cell::Float(region.mu_x),
        Cell::Int(region.mixed_cells.len() as u64),
        Cell::Int(region.occupied_cells as u64),
        Cell::Float(purity),
    ]);
    run.summary(&table)?;
    Ok(format!(
        "mu_X: {}\nmixed cells: {} of {} occupied\nseparation score: {:.4}\n",
        region.mu_x,
        region.mixed_cells.len(),
        region.occupied_cells,
        purity
    ))
}

pub fn collective<E: Executor>(cfg: &RunConfig, config_dir: &Path, run: &mut RunDir, _exec: &E) -> CliResult<String> {
    let section = cfg.collective.as_ref().ok_or_else(|| CliError::config("config has no collective section"))?;
    if !(0.0..=1.0).contains(&section.tau) {
        return Err(CliError::config("tau must lie in [0, 1]"));
    }
    let values = load_roster(section, config_dir)?;
    let before = FitnessRoster::new(values).map_err(|e| CliError::config(e.to_string()))?;
    let after = communicate(&before, section.tau)?;
    let per_individual = communication_gain(&before, &after)?;
    let (t0, t1) = (total_fitness(&before), total_fitness(&after));
    run.event("roster", &json!({ "phase": "before", "values": before.values() }))?;
    run.event("roster", &json!({ "phase": "after", "values": after.values() }))?;
    run.event(
        "communication",
        &json!({
            "tau": section.tau,
            "population": before.len(),
            "best": before.max(),
            "mean_before": before.mean(),
            "total_before": t0,
            "total_after": t1,
            "gain": t1 - t0,
            "gain_per_individual": per_individual,
        }),
    )?;
    let mut table = Table::new(&["individual", "before", "after"]);
    for (i, (b, a)) in before.values().iter().zip(after.values()).enumerate() {
        table.push(vec![Cell::Int(i as u64), Cell::Float(*b), Cell::Float(*a)]);
    }
    run.summary(&table)?;
    Ok(format!(
        "population: {}\ntotal fitness: {t0} -> {t1}\ngain: {}\ngain per individual: {per_individual}\n",
        before.len(),
        t1 - t0
    ))
}

pub fn survival<E: Executor>(cfg: &RunConfig, run: &mut RunDir, exec: &E) -> CliResult<String> {
    let world = cfg.world()?;
    world.validate()?;
    if !matches!(world.kind, WorldKind::TwoState { .. }) {
        return Err(CliError::config("survival needs a two_state world"));
    }
    let s = &cfg.survival;
    if s.fit_samples == 0 {
        return Err(CliError::config("survival.fit_samples must be at least 1"));
    }
    let samples = sample_world(world, s.fit_samples, world.seed);
    let points: Vec<(f64, bool)> = samples.iter().map(|x| (x.obs[0], x.label == 1)).collect();
    let fit = fit_threshold_exact(&points)?;
    let (lo, hi) = (fit.params.values()[0], fit.params.values()[1]);
    let fit_model = EncoderModel::threshold(&[(lo, hi)], 1, 0.0)?;
    let broken = EncoderModel::threshold(&[(lo, hi)], 1, 1.0)?;
    run.event("model_fit", &json!({ "interval": [lo, hi], "agreement": fit.agreement }))?;

    let params = s.params();
    let seed = rng::split(cfg.seed, "survival", 0);
    let models = vec![("fit", fit_model), ("inverted", broken)];
    let outcomes = exec.map(models, |(name, m)| {
        survival_batch(world, &m, s.episodes, s.max_steps, seed, &params).map(|o| (name, o))
    });
    let mut table = Table::new(&["model", "episode", "steps_survived", "alive_at_end", "trajectory_length"]);
    let mut means = Vec::new();
    for r in outcomes {
        let (name, out) = r?;
        let mean = mean_survival(&out);
        let alive = out.iter().filter(|o| o.alive_at_end).count();
        run.event("survival", &json!({ "model": name, "episodes": out.len(), "mean_steps": mean, "alive": alive }))?;
        for (i, o) in out.iter().enumerate() {
            table.push(vec![
                Cell::Text(name.into()),
                Cell::Int(i as u64),
                Cell::Int(o.steps_survived as u64),
                Cell::Bool(o.alive_at_end),
                Cell::Float(o.trajectory_length),
            ]);
        }
        means.push((name, mean, alive));
    }
    let ratio = if means[1].1 > 0.0 { Some(means[0].1 / means[1].1) } else { None };
    run.event("contrast", &json!({ "ratio": ratio }))?;
    run.summary(&table)?;
    let mut report = String::new();
    for (name, mean, alive) in &means {
        let _ = writeln!(report, "{name}: mean survival {mean:.2} steps, {alive}/{} alive at end", s.episodes);
    }
    let _ = match ratio {
        Some(r) => writeln!(report, "mean-survival ratio (fit / inverted): {r:.3}"),
        None => writeln!(report, "mean-survival ratio (fit / inverted): undefined (inverted mean is 0)"),
    };
    Ok(report)
}
