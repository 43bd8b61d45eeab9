//! Alternate minimization and the quasi-static load driver.

pub mod boxqp;
pub mod checkpoint;

pub use boxqp::{solve_box_qp, BoxQpOptions, BoxQpSolution};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_VERSION};

use serde::{Deserialize, Serialize};

use crate::energy::{nucleation_stress, MaterialParams, SplitKind};
use crate::error::{invalid, Error, Result};
use crate::fem::damage::fracture_energy;
use crate::fem::{BoundaryConditions, DamageProblem, ElasticProblem, FemModel, LinearSolver};
use crate::geometry::JunctionGeometry;

/// Knobs of the load stepping and of the nested solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Imposed displacement increment; derived from the nucleation estimate when absent.
    pub load_increment: Option<f64>,
    /// Number of increments to reach the elastic nucleation estimate.
    pub increments_to_nucleation: f64,
    pub max_steps: usize,
    /// Sup-norm of the damage change ending the alternate minimization.
    pub tol_alpha: f64,
    pub altmin_max_iter: usize,
    /// Relative tolerance of the conjugate-gradient solves.
    pub cg_tol: f64,
    /// Projected-gradient tolerance of the damage solve, relative to the dissipation scale.
    pub kkt_tol: f64,
    pub linear_solver: LinearSolver,
    pub stop_at_failure: bool,
    pub startup_steps: usize,
    pub startup_alpha: f64,
    /// Store a snapshot every so many steps (0 keeps only the failure pair).
    /// Set from the output block of a run configuration.
    #[serde(skip)]
    pub snapshot_every: usize,
    /// Damage level whose first crossing is recorded per element.
    pub crossing_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            load_increment: None,
            increments_to_nucleation: 50.0,
            max_steps: 300,
            tol_alpha: 1e-4,
            altmin_max_iter: 1000,
            cg_tol: 1e-8,
            kkt_tol: 1e-6,
            linear_solver: LinearSolver::Cholesky,
            stop_at_failure: true,
            startup_steps: 5,
            startup_alpha: 1e-3,
            snapshot_every: 0,
            crossing_threshold: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, "must be positive and finite"))
            }
        };
        if let Some(du) = self.load_increment {
            positive("load_increment", du)?;
        }
        positive("increments_to_nucleation", self.increments_to_nucleation)?;
        positive("tol_alpha", self.tol_alpha)?;
        positive("cg_tol", self.cg_tol)?;
        positive("kkt_tol", self.kkt_tol)?;
        positive("startup_alpha", self.startup_alpha)?;
        if !(self.crossing_threshold > 0.0 && self.crossing_threshold < 1.0) {
            return Err(invalid("crossing_threshold", "must lie in (0, 1)"));
        }
        if self.altmin_max_iter == 0 {
            return Err(invalid("altmin_max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub elastic: f64,
    pub fracture: f64,
    pub total: f64,
}

/// Full solver state at a converged load step.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub step: usize,
    pub u_t: f64,
    pub u: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_lower: Vec<f64>,
    pub energies: Energies,
    /// Reaction on the top boundary in the loading direction.
    pub reaction: f64,
}

impl SimulationState {
    pub fn initial(num_nodes: usize) -> Self {
        SimulationState {
            step: 0,
            u_t: 0.0,
            u: vec![0.0; 2 * num_nodes],
            alpha: vec![0.0; num_nodes],
            alpha_lower: vec![0.0; num_nodes],
            energies: Energies::default(),
            reaction: 0.0,
        }
    }

    pub fn max_alpha(&self) -> f64 {
        self.alpha.iter().fold(0.0f64, |m, a| m.max(*a))
    }
}

/// One row of the load history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub u_t: f64,
    pub elastic: f64,
    pub fracture: f64,
    pub total: f64,
    pub reaction: f64,
    pub max_alpha: f64,
    pub altmin_iterations: usize,
    pub converged: bool,
    /// Largest energy increase over a half-step, relative to the energy.
    pub max_energy_rise: f64,
    /// Smallest nodal damage increment over the step.
    pub min_alpha_increment: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub u_t: f64,
    pub u: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Snapshot {
    fn of(state: &SimulationState) -> Self {
        Snapshot {
            step: state.step,
            u_t: state.u_t,
            u: state.u.clone(),
            alpha: state.alpha.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AltMinReport {
    pub iterations: usize,
    pub converged: bool,
    pub max_energy_rise: f64,
    /// Sup-norm of the last damage change.
    pub damage_change: f64,
}

/// First `(step, alternate-minimization iteration)` at which each element's
/// mean damage reached the crossing threshold.
pub type Crossings = Vec<Option<(usize, usize)>>;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub history: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub failure_step: Option<usize>,
    pub load_increment: f64,
    pub final_state: SimulationState,
    pub crossings: Crossings,
}

impl RunOutcome {
    /// Snapshot stored for `step`, if any.
    pub fn snapshot(&self, step: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.step == step)
    }
}

/// Displacement and damage problems sharing one mesh.
pub struct Simulation<'a> {
    model: &'a FemModel,
    mat: MaterialParams,
    cfg: SolverConfig,
    elastic: ElasticProblem<'a>,
    damage: DamageProblem<'a>,
}

impl<'a> Simulation<'a> {
    pub fn new(
        model: &'a FemModel,
        mat: MaterialParams,
        split: SplitKind,
        bcs: BoundaryConditions,
        cfg: SolverConfig,
    ) -> Result<Self> {
        mat.validate()?;
        cfg.validate()?;
        let mut elastic = ElasticProblem::new(model, mat, split, bcs, cfg.linear_solver)?;
        elastic.cg_tol = cfg.cg_tol;
        let damage = DamageProblem::new(model, mat, split);
        Ok(Simulation {
            model,
            mat,
            cfg,
            elastic,
            damage,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn elastic(&self) -> &ElasticProblem<'a> {
        &self.elastic
    }

    /// Imposed displacement at which the intact response reaches `σ_c` as
    /// nominal stress on a contact of the given length.
    pub fn nucleation_estimate(&mut self, contact_length: f64) -> Result<f64> {
        let zero_alpha = vec![0.0; self.model.num_nodes()];
        let sol = self.elastic.solve(&zero_alpha, 1.0, &vec![0.0; 2 * self.model.num_nodes()])?;
        let (top, _) = self.elastic.reactions(&sol.u, &zero_alpha);
        let compliance_stress = top.abs() / contact_length;
        if !(compliance_stress > 0.0) {
            return Err(Error::SingularSystem("unit load produces no reaction".into()));
        }
        Ok(nucleation_stress(&self.mat) / compliance_stress)
    }

    pub fn energies(&self, u: &[f64], alpha: &[f64]) -> Energies {
        let g = self.elastic.element_degradation(alpha);
        let elastic = self.elastic.energy(u, &g);
        let fracture = fracture_energy(self.model, &self.mat, alpha);
        Energies {
            elastic,
            fracture,
            total: elastic + fracture,
        }
    }

    /// Damage minimizing the energy at displacement `u` within `[alpha_lower, 1]`.
    pub fn damage_step(&mut self, u: &[f64], alpha_lower: &[f64], alpha_init: &[f64]) -> Result<Vec<f64>> {
        let opts = BoxQpOptions {
            kkt_tol: self.cfg.kkt_tol * self.damage.gradient_scale(),
            cg_rel_tol: self.cfg.cg_tol,
            ..BoxQpOptions::default()
        };
        self.damage.assemble(u);
        let lower = self.damage.restrict(alpha_lower);
        let upper = vec![1.0; lower.len()];
        let x0 = self.damage.restrict(alpha_init);
        let sys = self.damage.system();
        let sol = solve_box_qp(&sys.matrix, &sys.linear, &lower, &upper, &x0, &opts)?;
        let mut alpha = alpha_lower.to_vec();
        self.damage.extend(&sol.x, &mut alpha);
        Ok(alpha)
    }

    /// Alternates displacement and damage solves at the state's load.
    pub fn alternate_minimize(
        &mut self,
        state: &mut SimulationState,
        mut crossings: Option<&mut Crossings>,
    ) -> Result<AltMinReport> {
        let mut rise = 0.0f64;
        let mut e_prev = self.energies(&state.u, &state.alpha).total;
        let mut change = f64::INFINITY;
        let mut iterations = 0;
        while iterations < self.cfg.altmin_max_iter {
            iterations += 1;
            let before_u = {
                let mut u = state.u.clone();
                self.elastic.bcs().apply(&mut u, state.u_t);
                self.energies(&u, &state.alpha).total
            };
            let sol = self.elastic.solve(&state.alpha, state.u_t, &state.u)?;
            state.u = sol.u;
            let e_u = self.energies(&state.u, &state.alpha).total;
            rise = rise.max(relative_rise(before_u, e_u));
            let alpha = self.damage_step(&state.u, &state.alpha_lower, &state.alpha)?;
            change = alpha
                .iter()
                .zip(&state.alpha)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            state.alpha = alpha;
            let e_a = self.energies(&state.u, &state.alpha).total;
            rise = rise.max(relative_rise(e_u, e_a));
            e_prev = e_a;
            if let Some(c) = crossings.as_deref_mut() {
                record_crossings(self.model, &state.alpha, self.cfg.crossing_threshold, (state.step, iterations), c);
            }
            if change < self.cfg.tol_alpha {
                break;
            }
        }
        if change > 0.0 {
            // equilibrium with the final damage
            let sol = self.elastic.solve(&state.alpha, state.u_t, &state.u)?;
            state.u = sol.u;
            let e_u = self.energies(&state.u, &state.alpha).total;
            rise = rise.max(relative_rise(e_prev, e_u));
            e_prev = e_u;
        }
        state.energies = self.energies(&state.u, &state.alpha);
        debug_assert!((state.energies.total - e_prev).abs() <= 1e-12 * e_prev.abs().max(1.0));
        state.reaction = self.elastic.reactions(&state.u, &state.alpha).0;
        Ok(AltMinReport {
            iterations,
            converged: change < self.cfg.tol_alpha,
            max_energy_rise: rise,
            damage_change: change,
        })
    }

    /// Steps the load from `state` until failure or the step cap.
    pub fn run(&mut self, state: SimulationState, load_increment: f64) -> Result<RunOutcome> {
        self.run_observed(state, load_increment, &mut |_| {})
    }

    /// As [`Simulation::run`], calling `observer` after every load step.
    pub fn run_observed(
        &mut self,
        mut state: SimulationState,
        load_increment: f64,
        observer: &mut dyn FnMut(&StepRecord),
    ) -> Result<RunOutcome> {
        if !(load_increment > 0.0 && load_increment.is_finite()) {
            return Err(invalid("load_increment", "must be positive and finite"));
        }
        let mut history = Vec::new();
        let mut snapshots = Vec::new();
        let mut crossings: Crossings = vec![None; self.model.num_elements()];
        record_crossings(self.model, &state.alpha, self.cfg.crossing_threshold, (state.step, 0), &mut crossings);
        let mut failure_step = None;
        let mut increments: Vec<f64> = Vec::new();
        let mut previous = state.clone();
        let mut previous_reaction: Option<f64> = None;
        let first = state.step;
        for step in first + 1..=first + self.cfg.max_steps {
            let u_t = step as f64 * load_increment;
            if state.u_t != 0.0 {
                let s = u_t / state.u_t;
                state.u.iter_mut().for_each(|v| *v *= s);
            }
            state.step = step;
            state.u_t = u_t;
            let report = self.alternate_minimize(&mut state, Some(&mut crossings))?;
            let min_inc = state
                .alpha
                .iter()
                .zip(&state.alpha_lower)
                .fold(f64::INFINITY, |m, (a, l)| m.min(a - l));
            state.alpha_lower.clone_from(&state.alpha);
            let max_alpha = state.max_alpha();
            history.push(StepRecord {
                step,
                u_t,
                elastic: state.energies.elastic,
                fracture: state.energies.fracture,
                total: state.energies.total,
                reaction: state.reaction,
                max_alpha,
                altmin_iterations: report.iterations,
                converged: report.converged,
                max_energy_rise: report.max_energy_rise,
                min_alpha_increment: min_inc,
            });
            observer(history.last().expect("just pushed"));
            if step - first <= self.cfg.startup_steps && first == 0 && max_alpha >= self.cfg.startup_alpha {
                return Err(Error::EarlyDamage { step, max_alpha });
            }
            let d_frac = state.energies.fracture - previous.energies.fracture;
            let failed = is_failure(max_alpha, d_frac, &increments, previous_reaction, state.reaction);
            if d_frac > 0.0 {
                increments.push(d_frac);
            }
            let cadence = self.cfg.snapshot_every > 0 && step % self.cfg.snapshot_every == 0;
            if failed && failure_step.is_none() {
                failure_step = Some(step);
                if previous.step > 0 && snapshots.last().map(|s: &Snapshot| s.step) != Some(previous.step) {
                    snapshots.push(Snapshot::of(&previous));
                }
                snapshots.push(Snapshot::of(&state));
            } else if cadence {
                snapshots.push(Snapshot::of(&state));
            }
            previous_reaction = Some(state.reaction);
            previous.clone_from(&state);
            if failed && self.cfg.stop_at_failure {
                break;
            }
        }
        Ok(RunOutcome {
            history,
            snapshots,
            failure_step,
            load_increment,
            final_state: state,
            crossings,
        })
    }
}

fn relative_rise(before: f64, after: f64) -> f64 {
    ((after - before) / before.abs().max(f64::MIN_POSITIVE)).max(0.0)
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Failure event: a near-complete crack with an outsized jump in fracture
/// energy, or a reaction that loses more than half its magnitude in one step.
pub fn is_failure(max_alpha: f64, d_fracture: f64, past_increments: &[f64], previous_reaction: Option<f64>, reaction: f64) -> bool {
    let jump = max_alpha >= 0.95 && d_fracture > 10.0 * median(past_increments) && d_fracture > 0.0;
    let drop = previous_reaction.is_some_and(|r| r.abs() > 0.0 && reaction.abs() < 0.5 * r.abs());
    jump || drop
}

fn record_crossings(model: &FemModel, alpha: &[f64], threshold: f64, when: (usize, usize), crossings: &mut Crossings) {
    for (e, el) in model.elements.iter().enumerate() {
        if crossings[e].is_none() && el.mean(alpha) >= threshold {
            crossings[e] = Some(when);
        }
    }
}

/// Total contact length used for the nucleation estimate.
pub fn contact_length(geom: &JunctionGeometry) -> f64 {
    geom.asperity_offsets.len() as f64 * geom.params.projected_junction_length()
}

/// Builds the solver for a junction mesh under shear and steps it to failure.
pub fn run_quasistatic(
    geom: &JunctionGeometry,
    model: &FemModel,
    mat: &MaterialParams,
    split: SplitKind,
    cfg: &SolverConfig,
) -> Result<RunOutcome> {
    run_quasistatic_observed(geom, model, mat, split, cfg, &mut |_| {})
}

/// As [`run_quasistatic`], reporting every load step to `observer`.
pub fn run_quasistatic_observed(
    geom: &JunctionGeometry,
    model: &FemModel,
    mat: &MaterialParams,
    split: SplitKind,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&StepRecord),
) -> Result<RunOutcome> {
    let bcs = BoundaryConditions::junction_shear(&model.mesh)?;
    let mut sim = Simulation::new(model, *mat, split, bcs, cfg.clone())?;
    let du = match cfg.load_increment {
        Some(du) => du,
        None => sim.nucleation_estimate(contact_length(geom))? / cfg.increments_to_nucleation,
    };
    sim.run_observed(SimulationState::initial(model.num_nodes()), du, observer)
}

/// Single alternate minimization at a fixed state, building the problems on the fly.
pub fn alternate_minimize(
    state: &mut SimulationState,
    model: &FemModel,
    mat: &MaterialParams,
    split: SplitKind,
    bcs: &BoundaryConditions,
    cfg: &SolverConfig,
) -> Result<AltMinReport> {
    let mut sim = Simulation::new(model, *mat, split, bcs.clone(), cfg.clone())?;
    sim.alternate_minimize(state, None)
}

/// Single bound-constrained damage solve.
pub fn damage_step(
    model: &FemModel,
    mat: &MaterialParams,
    u: &[f64],
    alpha_lower: &[f64],
    split: SplitKind,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let bcs = BoundaryConditions::junction_shear(&model.mesh)?;
    let mut sim = Simulation::new(model, *mat, split, bcs, cfg.clone())?;
    sim.damage_step(u, alpha_lower, alpha_lower)
}
