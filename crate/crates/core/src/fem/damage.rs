//! Damage sub-problem at fixed displacement.
//!
//! With P1 damage and constant strain per element the energy is exactly
//! quadratic in the nodal damage:
//! `Σ_e W_e ∫(1-α)² + 3Gc/8 ∫(α/ℓ + ℓ|∇α|²) = ½ αᵀAα + bᵀα + const`.

use crate::energy::{split_energy, MaterialParams, SplitKind};

use super::sparse::CsrMatrix;
use super::FemModel;

const NONE: usize = usize::MAX;

/// Reduced quadratic `½ xᵀAx + bᵀx` over the free damage nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DamageSystem {
    pub matrix: CsrMatrix,
    pub linear: Vec<f64>,
}

impl DamageSystem {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.matrix.quadratic_form(x) + super::sparse::dot(&self.linear, x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.matrix.matvec(x, &mut g);
        for (gi, bi) in g.iter_mut().zip(&self.linear) {
            *gi += bi;
        }
        g
    }
}

pub struct DamageProblem<'a> {
    model: &'a FemModel,
    mat: MaterialParams,
    split: SplitKind,
    free: Vec<usize>,
    free_nodes: Vec<usize>,
    elements: Vec<usize>,
    scatter: Vec<[usize; 9]>,
    system: DamageSystem,
    /// `3Gc/(8ℓ) ∫N_i` per free node.
    dissipation: Vec<f64>,
}

impl<'a> DamageProblem<'a> {
    pub fn new(model: &'a FemModel, mat: MaterialParams, split: SplitKind) -> Self {
        let n = model.num_nodes();
        let mut free = vec![NONE; n];
        let mut free_nodes = Vec::new();
        for i in 0..n {
            if !model.fixed_damage[i] {
                free[i] = free_nodes.len();
                free_nodes.push(i);
            }
        }
        let adj = model.node_adjacency();
        let rows: Vec<Vec<usize>> = free_nodes
            .iter()
            .map(|&i| adj[i].iter().filter(|&&j| free[j] != NONE).map(|&j| free[j]).collect())
            .collect();
        let matrix = CsrMatrix::from_rows(rows);
        let mut elements = Vec::new();
        let mut scatter = Vec::new();
        for (e, el) in model.elements.iter().enumerate() {
            if el.nodes.iter().all(|&i| free[i] == NONE) {
                continue;
            }
            let mut s = [NONE; 9];
            for a in 0..3 {
                for b in 0..3 {
                    let (fa, fb) = (free[el.nodes[a]], free[el.nodes[b]]);
                    if fa != NONE && fb != NONE {
                        s[3 * a + b] = matrix.position(fa, fb).expect("pattern covers element");
                    }
                }
            }
            elements.push(e);
            scatter.push(s);
        }
        let c = 0.375 * mat.toughness / mat.ell;
        let mut dissipation = vec![0.0; free_nodes.len()];
        for &e in &elements {
            let el = &model.elements[e];
            for &i in &el.nodes {
                if free[i] != NONE {
                    dissipation[free[i]] += c * el.area / 3.0;
                }
            }
        }
        let nf = free_nodes.len();
        DamageProblem {
            model,
            mat,
            split,
            free,
            free_nodes,
            elements,
            scatter,
            system: DamageSystem {
                matrix,
                linear: vec![0.0; nf],
            },
            dissipation,
        }
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    pub fn num_free(&self) -> usize {
        self.free_nodes.len()
    }

    /// Scale of the dissipation term, used to normalize KKT residuals.
    pub fn gradient_scale(&self) -> f64 {
        self.dissipation.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    /// Degradable elastic energy density per element.
    pub fn degradable_density(&self, u: &[f64]) -> Vec<f64> {
        self.model
            .elements
            .iter()
            .map(|el| split_energy(&el.strain(u), &self.mat, self.split).degradable)
            .collect()
    }

    /// Assembles the reduced quadratic for the displacement `u`.
    pub fn assemble(&mut self, u: &[f64]) -> &DamageSystem {
        let w = self.degradable_density(u);
        self.assemble_from_density(&w)
    }

    pub fn assemble_from_density(&mut self, w: &[f64]) -> &DamageSystem {
        let grad = 0.75 * self.mat.toughness * self.mat.ell;
        let sys = &mut self.system;
        sys.matrix.zero_values();
        sys.linear.copy_from_slice(&self.dissipation);
        for (k, &e) in self.elements.iter().enumerate() {
            let el = &self.model.elements[e];
            let m = el.mass();
            let l = el.laplacian();
            let we = w[e];
            let sc = &self.scatter[k];
            for a in 0..3 {
                let fa = self.free[el.nodes[a]];
                if fa == NONE {
                    continue;
                }
                let row_mass: f64 = m[a].iter().sum();
                sys.linear[fa] -= 2.0 * we * row_mass;
                for b in 0..3 {
                    let pos = sc[3 * a + b];
                    if pos != NONE {
                        sys.matrix.values[pos] += 2.0 * we * m[a][b] + grad * l[a][b];
                    }
                }
            }
        }
        &self.system
    }

    pub fn system(&self) -> &DamageSystem {
        &self.system
    }

    /// Free-node values of a nodal field.
    pub fn restrict(&self, alpha: &[f64]) -> Vec<f64> {
        self.free_nodes.iter().map(|&i| alpha[i]).collect()
    }

    /// Writes free-node values back into a nodal field.
    pub fn extend(&self, x: &[f64], alpha: &mut [f64]) {
        for (k, &i) in self.free_nodes.iter().enumerate() {
            alpha[i] = x[k];
        }
    }

    /// Regularized fracture energy of a nodal damage field.
    pub fn fracture_energy(&self, alpha: &[f64]) -> f64 {
        fracture_energy(self.model, &self.mat, alpha)
    }
}

/// `∫ 3Gc/8 (α/ℓ + ℓ|∇α|²)` over the mesh.
pub fn fracture_energy(model: &FemModel, mat: &MaterialParams, alpha: &[f64]) -> f64 {
    let c = 0.375 * mat.toughness;
    model
        .elements
        .iter()
        .map(|el| {
            let g = el.gradient(alpha);
            c * el.area * (el.mean(alpha) / mat.ell + mat.ell * (g[0] * g[0] + g[1] * g[1]))
        })
        .sum()
}

/// One-shot assembly for the displacement `u`.
pub fn assemble_damage_system(model: &FemModel, mat: &MaterialParams, u: &[f64], split: SplitKind) -> DamageSystem {
    let mut p = DamageProblem::new(model, *mat, split);
    p.assemble(u);
    p.system
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::elasticity::ElasticProblem;
    use crate::fem::{BoundaryConditions, LinearSolver};
    use crate::mesh::rectangle;

    /// The reduced quadratic reproduces the total energy up to a constant.
    #[test]
    fn quadratic_matches_direct_energy() {
        let m = FemModel::new(rectangle(0.0, 0.0, 1.0, 0.5, 6, 3).unwrap()).unwrap();
        let mat = MaterialParams::default().with_ell(0.1);
        let split = SplitKind::HydrostaticDeviatoric;
        let u: Vec<f64> = m
            .mesh
            .nodes
            .iter()
            .flat_map(|p| [0.03 * p[1] + 0.01 * p[0] * p[0], 0.02 * p[0] * p[1]])
            .collect();
        let mut p = DamageProblem::new(&m, mat, split);
        let sys = p.assemble(&u).clone();
        let bc = BoundaryConditions::junction_shear(&m.mesh).unwrap();
        let ep = ElasticProblem::new(&m, mat, split, bc, LinearSolver::Pcg).unwrap();
        let total = |alpha: &[f64]| ep.energy(&u, &ep.element_degradation(alpha)) + fracture_energy(&m, &mat, alpha);
        let a0 = vec![0.0; m.num_nodes()];
        let mut a1 = a0.clone();
        for (k, i) in p.free_nodes().iter().enumerate() {
            a1[*i] = 0.1 + 0.7 * ((k * 37 % 11) as f64 / 11.0);
        }
        let x1 = p.restrict(&a1);
        let d_direct = total(&a1) - total(&a0);
        let d_quad = sys.value(&x1);
        assert!((d_direct - d_quad).abs() < 1e-12 * d_direct.abs().max(1.0), "{d_direct} {d_quad}");
        assert!(sys.matrix.asymmetry() < 1e-14);
    }

    #[test]
    fn zero_displacement_gives_positive_linear_term() {
        let m = FemModel::new(rectangle(0.0, 0.0, 1.0, 1.0, 3, 3).unwrap()).unwrap();
        let sys = assemble_damage_system(&m, &MaterialParams::default(), &vec![0.0; 2 * m.num_nodes()], SplitKind::NoSplit);
        assert!(sys.linear.iter().all(|&b| b > 0.0));
    }
}
