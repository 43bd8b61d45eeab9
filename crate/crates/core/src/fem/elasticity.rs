//! Displacement sub-problem at fixed damage.
//!
//! For a fixed tension/compression branch per element the split energy is
//! quadratic, so each branch assignment defines a linear system. The true
//! energy is convex and piecewise quadratic; it is minimized by a semismooth
//! Newton iteration over the branch set with a backtracking line search.

use serde::{Deserialize, Serialize};

use crate::energy::{self, split_energy, split_energy_with_branch, stiffness_from_bulk_shear, MaterialParams, SplitKind};
use crate::error::{Error, Result};
use crate::tensor::Sym2;

use super::bcs::BoundaryConditions;
use super::cg::solve_spd_from;
use super::cholesky::{CholeskyFactor, CholeskySolver};
use super::sparse::CsrMatrix;
use super::FemModel;

const NONE: usize = usize::MAX;
const MAX_OUTER: usize = 400;
/// Free-dof force imbalance, relative to the largest nodal force, accepted as equilibrium.
const RESIDUAL_TOL: f64 = 1e-11;

/// Linear solver used for the displacement systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearSolver {
    /// Sparse Cholesky factorization.
    #[default]
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients.
    Pcg,
}

/// Bulk and shear moduli of an element on a given branch, degraded by `g`.
pub fn effective_moduli(mat: &MaterialParams, split: SplitKind, g: f64, tension: bool) -> (f64, f64) {
    let (k, mu) = (mat.bulk_modulus(), mat.shear_modulus());
    match (split, tension) {
        (SplitKind::NoSplit, _) => (g * k, g * mu),
        (SplitKind::PositiveHydrostatic, true) => (g * k, mu),
        (SplitKind::PositiveHydrostatic, false) => (k, mu),
        (SplitKind::HydrostaticDeviatoric, true) => (g * k, g * mu),
        (SplitKind::HydrostaticDeviatoric, false) => (k, g * mu),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementSolution {
    pub u: Vec<f64>,
    /// Tension flag per element at the solution.
    pub sign_set: Vec<bool>,
    pub iterations: usize,
    /// Elastic energy after each outer iteration, starting with the initial guess.
    pub energies: Vec<f64>,
}

/// Displacement problem on a fixed mesh and boundary-condition layout.
pub struct ElasticProblem<'a> {
    model: &'a FemModel,
    mat: MaterialParams,
    split: SplitKind,
    bcs: BoundaryConditions,
    free: Vec<usize>,
    free_dofs: Vec<usize>,
    matrix: CsrMatrix,
    scatter: Vec<[usize; 36]>,
    backend: LinearSolver,
    cholesky: Option<CholeskySolver>,
    /// Last factorization with the degradation and branches it was built for.
    factor_cache: Option<(Vec<f64>, Vec<bool>, CholeskyFactor)>,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Linear solves performed since construction.
    pub solves: usize,
    /// Cholesky factorizations performed since construction.
    pub factorizations: usize,
}

impl<'a> ElasticProblem<'a> {
    pub fn new(
        model: &'a FemModel,
        mat: MaterialParams,
        split: SplitKind,
        bcs: BoundaryConditions,
        backend: LinearSolver,
    ) -> Result<Self> {
        let ndof = 2 * model.num_nodes();
        let constrained = bcs.constrained_mask(ndof);
        let mut free = vec![NONE; ndof];
        let mut free_dofs = Vec::new();
        for d in 0..ndof {
            if !constrained[d] {
                free[d] = free_dofs.len();
                free_dofs.push(d);
            }
        }
        if free_dofs.is_empty() {
            return Err(Error::SingularSystem("every displacement dof is prescribed".into()));
        }
        let adj = model.node_adjacency();
        let rows: Vec<Vec<usize>> = free_dofs
            .iter()
            .map(|&d| {
                adj[d / 2]
                    .iter()
                    .flat_map(|&m| [2 * m, 2 * m + 1])
                    .filter(|&c| free[c] != NONE)
                    .map(|c| free[c])
                    .collect()
            })
            .collect();
        let matrix = CsrMatrix::from_rows(rows);
        let scatter = model
            .elements
            .iter()
            .map(|el| {
                let ld = local_dofs(el.nodes);
                let mut s = [NONE; 36];
                for a in 0..6 {
                    for b in 0..6 {
                        let (fa, fb) = (free[ld[a]], free[ld[b]]);
                        if fa != NONE && fb != NONE {
                            s[6 * a + b] = matrix.position(fa, fb).expect("pattern covers element");
                        }
                    }
                }
                s
            })
            .collect();
        let cholesky = match backend {
            LinearSolver::Cholesky => Some(CholeskySolver::new(&matrix)?),
            LinearSolver::Pcg => None,
        };
        Ok(ElasticProblem {
            model,
            mat,
            split,
            bcs,
            free,
            free_dofs,
            matrix,
            scatter,
            backend,
            cholesky,
            factor_cache: None,
            cg_tol: 1e-10,
            cg_max_iter: 20_000,
            solves: 0,
            factorizations: 0,
        })
    }

    pub fn bcs(&self) -> &BoundaryConditions {
        &self.bcs
    }

    pub fn split(&self) -> SplitKind {
        self.split
    }

    pub fn material(&self) -> &MaterialParams {
        &self.mat
    }

    pub fn num_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn operator(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Element degradation `(1/A)∫ g(α)`.
    pub fn element_degradation(&self, alpha: &[f64]) -> Vec<f64> {
        self.model
            .elements
            .iter()
            .map(|el| self.mat.eta + el.mean_square_complement(alpha))
            .collect()
    }

    /// Tension flags from the current strains. Elements with a vanishing volume
    /// change keep their previous flag.
    pub fn sign_set(&self, u: &[f64], previous: Option<&[bool]>) -> Vec<bool> {
        let traces: Vec<f64> = self.model.elements.iter().map(|el| el.strain(u).trace()).collect();
        let scale = traces.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let tol = 1e-12 * scale;
        traces
            .iter()
            .enumerate()
            .map(|(e, &t)| {
                if t.abs() <= tol {
                    previous.map_or(false, |p| p[e])
                } else {
                    t > 0.0
                }
            })
            .collect()
    }

    /// Fills the operator for the given branches and returns the reduced
    /// right-hand side at `load`.
    pub fn assemble(&mut self, g: &[f64], sign_set: &[bool], load: f64) -> Vec<f64> {
        let ndof = 2 * self.model.num_nodes();
        let mut ud = vec![0.0; ndof];
        self.bcs.apply(&mut ud, load);
        self.matrix.zero_values();
        let mut rhs = vec![0.0; self.free_dofs.len()];
        for (e, el) in self.model.elements.iter().enumerate() {
            let (k, mu) = effective_moduli(&self.mat, self.split, g[e], sign_set[e]);
            let ke = el.stiffness(&stiffness_from_bulk_shear(k, mu));
            let ld = local_dofs(el.nodes);
            let sc = &self.scatter[e];
            for a in 0..6 {
                let fa = self.free[ld[a]];
                if fa == NONE {
                    continue;
                }
                for b in 0..6 {
                    let pos = sc[6 * a + b];
                    if pos != NONE {
                        self.matrix.values[pos] += ke[a][b];
                    } else {
                        rhs[fa] -= ke[a][b] * ud[ld[b]];
                    }
                }
            }
        }
        rhs
    }

    fn solve_linear(&mut self, rhs: &[f64], guess: &[f64], g: &[f64], signs: &[bool]) -> Result<Vec<f64>> {
        self.solves += 1;
        match self.backend {
            LinearSolver::Cholesky => {
                let signs: &[bool] = if self.split.is_nonlinear() { signs } else { &[] };
                let fresh = match &self.factor_cache {
                    Some((cg, cs, _)) => cg.as_slice() != g || cs.as_slice() != signs,
                    None => true,
                };
                if fresh {
                    let chol = self.cholesky.as_ref().expect("cholesky backend");
                    let f = chol.factor(&self.matrix)?;
                    self.factorizations += 1;
                    self.factor_cache = Some((g.to_vec(), signs.to_vec(), f));
                }
                let (_, _, f) = self.factor_cache.as_ref().expect("factor cached");
                Ok(f.solve(rhs))
            }
            LinearSolver::Pcg => {
                Ok(solve_spd_from(&self.matrix, rhs, guess.to_vec(), self.cg_tol, self.cg_max_iter)?.x)
            }
        }
    }

    /// Elastic energy with the true strain signs.
    pub fn energy(&self, u: &[f64], g: &[f64]) -> f64 {
        self.model
            .elements
            .iter()
            .zip(g)
            .map(|(el, &ge)| {
                let p = split_energy(&el.strain(u), &self.mat, self.split);
                el.area * (p.intact + ge * p.degradable)
            })
            .sum()
    }

    /// Minimizes the elastic energy over admissible displacements at `load`.
    pub fn solve(&mut self, alpha: &[f64], load: f64, u_init: &[f64]) -> Result<DisplacementSolution> {
        let g = self.element_degradation(alpha);
        let mut u = u_init.to_vec();
        self.bcs.apply(&mut u, load);
        let mut signs = self.sign_set(&u, None);
        let mut e_cur = self.energy(&u, &g);
        let mut energies = vec![e_cur];
        let mut last_flips = Vec::new();
        for it in 1..=MAX_OUTER {
            let rhs = self.assemble(&g, &signs, load);
            let guess: Vec<f64> = self.free_dofs.iter().map(|&d| u[d]).collect();
            let x = self.solve_linear(&rhs, &guess, &g, &signs)?;
            let mut cand = u.clone();
            for (i, &d) in self.free_dofs.iter().enumerate() {
                cand[d] = x[i];
            }
            if !self.split.is_nonlinear() {
                let e = self.energy(&cand, &g);
                energies.push(e);
                let sign_set = self.sign_set(&cand, Some(&signs));
                return Ok(DisplacementSolution {
                    u: cand,
                    sign_set,
                    iterations: it,
                    energies,
                });
            }
            // Backtracking on the true energy.
            let mut t = 1.0;
            let mut e_new = self.energy(&cand, &g);
            let slack = 1e-13 * e_cur.abs().max(f64::MIN_POSITIVE);
            while e_new > e_cur + slack && t > 1e-6 {
                t *= 0.5;
                for (i, &d) in self.free_dofs.iter().enumerate() {
                    cand[d] = u[d] + t * (x[i] - u[d]);
                }
                e_new = self.energy(&cand, &g);
            }
            if e_new > e_cur + slack {
                // No descent along the Newton direction: the current iterate is kept.
                e_new = e_cur;
                cand.clone_from(&u);
            }
            u = cand;
            e_cur = e_new;
            energies.push(e_cur);
            let new_signs = self.sign_set(&u, Some(&signs));
            last_flips = (0..signs.len()).filter(|&e| signs[e] != new_signs[e]).collect();
            if (last_flips.is_empty() && t == 1.0) || self.relative_residual(&u, &g) <= RESIDUAL_TOL {
                return Ok(DisplacementSolution {
                    u,
                    sign_set: new_signs,
                    iterations: it,
                    energies,
                });
            }
            if last_flips.is_empty() {
                // Same branches but a damped step: repeat the solve from here.
                continue;
            }
            signs = new_signs;
        }
        Err(Error::SignSetCycling {
            iterations: MAX_OUTER,
            elements: last_flips,
        })
    }

    /// Nodal internal forces `∫ Bᵀσ` (interleaved layout).
    pub fn internal_force(&self, u: &[f64], alpha: &[f64]) -> Vec<f64> {
        self.internal_force_degraded(u, &self.element_degradation(alpha))
    }

    fn internal_force_degraded(&self, u: &[f64], g: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; u.len()];
        for (el, &ge) in self.model.elements.iter().zip(g) {
            let s = energy::stress(&el.strain(u), ge, &self.mat, self.split);
            let fe = el.internal_force(&s);
            for (k, &d) in local_dofs(el.nodes).iter().enumerate() {
                f[d] += fe[k];
            }
        }
        f
    }

    /// Largest free-dof force over the largest force anywhere.
    fn relative_residual(&self, u: &[f64], g: &[f64]) -> f64 {
        let f = self.internal_force_degraded(u, g);
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let free = self.free_dofs.iter().fold(0.0f64, |m, &d| m.max(f[d].abs()));
        if scale > 0.0 {
            free / scale
        } else {
            0.0
        }
    }

    /// Reactions `(top, bottom)` in the reported component.
    pub fn reactions(&self, u: &[f64], alpha: &[f64]) -> (f64, f64) {
        let f = self.internal_force(u, alpha);
        let c = self.bcs.reaction_component;
        let top = self.bcs.top.iter().map(|&n| f[2 * n + c]).sum();
        let bottom = self.bcs.bottom.iter().map(|&n| f[2 * n + c]).sum();
        (top, bottom)
    }

    /// Element stresses.
    pub fn stresses(&self, u: &[f64], alpha: &[f64]) -> Vec<Sym2> {
        let g = self.element_degradation(alpha);
        self.model
            .elements
            .iter()
            .zip(&g)
            .map(|(el, &ge)| energy::stress(&el.strain(u), ge, &self.mat, self.split))
            .collect()
    }

    /// Per-element degradable energy density at the current strain.
    pub fn degradable_density(&self, u: &[f64]) -> Vec<f64> {
        self.model
            .elements
            .iter()
            .map(|el| split_energy(&el.strain(u), &self.mat, self.split).degradable)
            .collect()
    }

    /// Energy of the branch-linearized quadratic model, for consistency checks.
    pub fn branch_energy(&self, u: &[f64], g: &[f64], sign_set: &[bool]) -> f64 {
        self.model
            .elements
            .iter()
            .enumerate()
            .map(|(e, el)| {
                let p = split_energy_with_branch(&el.strain(u), &self.mat, self.split, sign_set[e]);
                el.area * (p.intact + g[e] * p.degradable)
            })
            .sum()
    }
}

fn local_dofs(n: [usize; 3]) -> [usize; 6] {
    [2 * n[0], 2 * n[0] + 1, 2 * n[1], 2 * n[1] + 1, 2 * n[2], 2 * n[2] + 1]
}

/// Operator and reduced right-hand side for one branch assignment.
pub fn assemble_displacement_system(
    model: &FemModel,
    mat: &MaterialParams,
    alpha: &[f64],
    split: SplitKind,
    sign_set: &[bool],
    bcs: &BoundaryConditions,
    load: f64,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let mut p = ElasticProblem::new(model, *mat, split, bcs.clone(), LinearSolver::Pcg)?;
    let g = p.element_degradation(alpha);
    let rhs = p.assemble(&g, sign_set, load);
    Ok((p.matrix, rhs))
}

/// One-shot displacement solve.
pub fn solve_displacement(
    model: &FemModel,
    mat: &MaterialParams,
    alpha: &[f64],
    split: SplitKind,
    bcs: &BoundaryConditions,
    load: f64,
    u_init: &[f64],
) -> Result<DisplacementSolution> {
    let mut p = ElasticProblem::new(model, *mat, split, bcs.clone(), LinearSolver::Cholesky)?;
    p.solve(alpha, load, u_init)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle, RectangleMesh};

    fn square(n: usize) -> FemModel {
        FemModel::new(RectangleMesh::new(0.0, 0.0, 1.0, 1.0, n, n).alternating().build().unwrap()).unwrap()
    }

    #[test]
    fn intact_operators_coincide_across_splits() {
        let m = square(4);
        let bc = BoundaryConditions::junction_shear(&m.mesh).unwrap();
        let mat = MaterialParams::default();
        let alpha = vec![0.0; m.num_nodes()];
        let n = m.num_elements();
        let (a0, _) = assemble_displacement_system(&m, &mat, &alpha, SplitKind::NoSplit, &vec![true; n], &bc, 1.0).unwrap();
        for split in [SplitKind::PositiveHydrostatic, SplitKind::HydrostaticDeviatoric] {
            for signs in [vec![true; n], vec![false; n]] {
                let (a, _) = assemble_displacement_system(&m, &mat, &alpha, split, &signs, &bc, 1.0).unwrap();
                let scale = a0.values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
                for (x, y) in a.values.iter().zip(&a0.values) {
                    assert!((x - y).abs() <= 1e-12 * scale + 2.0 * mat.eta * scale);
                }
            }
        }
    }

    #[test]
    fn fully_damaged_nosplit_operator_is_eta_scaled() {
        let m = square(3);
        let bc = BoundaryConditions::junction_shear(&m.mesh).unwrap();
        let mat = MaterialParams::default();
        let n = m.num_elements();
        let (a0, _) = assemble_displacement_system(&m, &mat, &vec![0.0; m.num_nodes()], SplitKind::NoSplit, &vec![true; n], &bc, 1.0).unwrap();
        let (a1, _) = assemble_displacement_system(&m, &mat, &vec![1.0; m.num_nodes()], SplitKind::NoSplit, &vec![true; n], &bc, 1.0).unwrap();
        let r = mat.eta / (1.0 + mat.eta);
        let scale = a1.values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for (x, y) in a1.values.iter().zip(&a0.values) {
            assert!((x - r * y).abs() <= 1e-12 * scale, "{x} {y}");
        }
    }

    /// Affine boundary data is reproduced exactly in the interior.
    #[test]
    fn patch_test() {
        let m = square(5);
        let mat = MaterialParams::default();
        let boundary: Vec<usize> = {
            let mut v: Vec<usize> = m.mesh.boundary_edges.iter().flat_map(|e| e.nodes).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let affine = |p: [f64; 2]| [0.01 * p[0] + 0.02 * p[1] + 0.003, -0.015 * p[0] + 0.005 * p[1]];
        let mut prescribed = Vec::new();
        for &n in &boundary {
            let v = affine(m.mesh.nodes[n]);
            prescribed.push((2 * n, v[0]));
            prescribed.push((2 * n + 1, v[1]));
        }
        let bc = BoundaryConditions {
            prescribed,
            top: Vec::new(),
            bottom: Vec::new(),
            reaction_component: 0,
        };
        for backend in [LinearSolver::Cholesky, LinearSolver::Pcg] {
            let mut p = ElasticProblem::new(&m, mat, SplitKind::NoSplit, bc.clone(), backend).unwrap();
            let sol = p.solve(&vec![0.0; m.num_nodes()], 1.0, &vec![0.0; 2 * m.num_nodes()]).unwrap();
            for (n, x) in m.mesh.nodes.iter().enumerate() {
                let v = affine(*x);
                assert!((sol.u[2 * n] - v[0]).abs() < 1e-10);
                assert!((sol.u[2 * n + 1] - v[1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn nosplit_converges_in_one_iteration() {
        let m = square(4);
        let bc = BoundaryConditions::junction_shear(&m.mesh).unwrap();
        let sol = solve_displacement(&m, &MaterialParams::default(), &vec![0.3; m.num_nodes()], SplitKind::NoSplit, &bc, 0.1, &vec![0.0; 2 * m.num_nodes()]).unwrap();
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn biaxial_stretch_is_all_tension() {
        let m = FemModel::new(rectangle(0.0, 0.0, 1.0, 1.0, 4, 4).unwrap()).unwrap();
        let mut prescribed = Vec::new();
        for e in &m.mesh.boundary_edges {
            for &n in &e.nodes {
                let p = m.mesh.nodes[n];
                prescribed.push((2 * n, p[0]));
                prescribed.push((2 * n + 1, p[1]));
            }
        }
        prescribed.sort_by_key(|p| p.0);
        prescribed.dedup_by_key(|p| p.0);
        let bc = BoundaryConditions {
            prescribed,
            top: Vec::new(),
            bottom: Vec::new(),
            reaction_component: 0,
        };
        let alpha = vec![0.5; m.num_nodes()];
        for split in [SplitKind::PositiveHydrostatic, SplitKind::HydrostaticDeviatoric] {
            let sol = solve_displacement(&m, &MaterialParams::default(), &alpha, split, &bc, 0.01, &vec![0.0; 2 * m.num_nodes()]).unwrap();
            assert!(sol.iterations <= 2, "{}", sol.iterations);
            assert!(sol.sign_set.iter().all(|&s| s));
        }
    }

    #[test]
    fn energy_matches_quadratic_form_for_intact_material() {
        let m = square(4);
        let bc = BoundaryConditions::junction_shear(&m.mesh).unwrap();
        let mat = MaterialParams::default();
        let mut p = ElasticProblem::new(&m, mat, SplitKind::NoSplit, bc, LinearSolver::Cholesky).unwrap();
        let alpha = vec![0.0; m.num_nodes()];
        let sol = p.solve(&alpha, 0.05, &vec![0.0; 2 * m.num_nodes()]).unwrap();
        // full (unreduced) stiffness from element matrices as the reference
        let g = p.element_degradation(&alpha);
        let mut q = 0.0;
        for (el, &ge) in m.elements.iter().zip(&g) {
            let ke = el.stiffness(&stiffness_from_bulk_shear(ge * mat.bulk_modulus(), ge * mat.shear_modulus()));
            let ld = local_dofs(el.nodes);
            for a in 0..6 {
                for b in 0..6 {
                    q += sol.u[ld[a]] * ke[a][b] * sol.u[ld[b]];
                }
            }
        }
        let e = p.energy(&sol.u, &g);
        assert!((0.5 * q - e).abs() <= 1e-10 * e);
        let (top, bottom) = p.reactions(&sol.u, &alpha);
        assert!((top + bottom).abs() <= 1e-8 * top.abs());
    }
}
