//! Linear (P1) triangle kinematics.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::Mesh;
use crate::tensor::Sym2;

/// Area and constant shape-function gradients of one triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P1Element {
    pub nodes: [usize; 3],
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl P1Element {
    pub fn new(nodes: [usize; 3], p: [Point; 3], index: usize) -> Result<Self> {
        let two_a = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        if !(two_a > 0.0) {
            return Err(Error::DegenerateElement {
                element: index,
                area: 0.5 * two_a,
            });
        }
        let mut grads = [[0.0; 2]; 3];
        for k in 0..3 {
            let a = p[(k + 1) % 3];
            let b = p[(k + 2) % 3];
            grads[k] = [(a[1] - b[1]) / two_a, (b[0] - a[0]) / two_a];
        }
        Ok(P1Element {
            nodes,
            area: 0.5 * two_a,
            grads,
        })
    }

    /// Strain of the interleaved displacement vector `[ux0, uy0, ux1, ...]`.
    pub fn strain(&self, u: &[f64]) -> Sym2 {
        let mut e = Sym2::ZERO;
        for k in 0..3 {
            let n = self.nodes[k];
            let (ux, uy) = (u[2 * n], u[2 * n + 1]);
            let [gx, gy] = self.grads[k];
            e.xx += gx * ux;
            e.yy += gy * uy;
            e.xy += 0.5 * (gy * ux + gx * uy);
        }
        e
    }

    pub fn gradient(&self, f: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for k in 0..3 {
            let v = f[self.nodes[k]];
            g[0] += self.grads[k][0] * v;
            g[1] += self.grads[k][1] * v;
        }
        g
    }

    /// Consistent mass matrix `∫ N_i N_j`.
    pub fn mass(&self) -> [[f64; 3]; 3] {
        let d = self.area / 6.0;
        let o = self.area / 12.0;
        [[d, o, o], [o, d, o], [o, o, d]]
    }

    /// Stiffness `∫ ∇N_i · ∇N_j`.
    pub fn laplacian(&self) -> [[f64; 3]; 3] {
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = self.area * (self.grads[i][0] * self.grads[j][0] + self.grads[i][1] * self.grads[j][1]);
            }
        }
        k
    }

    /// Element mean of a nodal field.
    pub fn mean(&self, f: &[f64]) -> f64 {
        (f[self.nodes[0]] + f[self.nodes[1]] + f[self.nodes[2]]) / 3.0
    }

    /// `(1/A) ∫ (1 - α)²` for nodal `α`.
    pub fn mean_square_complement(&self, alpha: &[f64]) -> f64 {
        let b = [
            1.0 - alpha[self.nodes[0]],
            1.0 - alpha[self.nodes[1]],
            1.0 - alpha[self.nodes[2]],
        ];
        let s = b[0] + b[1] + b[2];
        (s * s + b[0] * b[0] + b[1] * b[1] + b[2] * b[2]) / 12.0
    }

    /// Voigt strain-displacement matrix (rows `xx, yy, 2xy`).
    pub fn b_matrix(&self) -> [[f64; 6]; 3] {
        let mut b = [[0.0; 6]; 3];
        for k in 0..3 {
            let [gx, gy] = self.grads[k];
            b[0][2 * k] = gx;
            b[1][2 * k + 1] = gy;
            b[2][2 * k] = gy;
            b[2][2 * k + 1] = gx;
        }
        b
    }

    /// `A Bᵀ C B` for a Voigt stiffness `C`.
    pub fn stiffness(&self, c: &[[f64; 3]; 3]) -> [[f64; 6]; 6] {
        let b = self.b_matrix();
        let mut cb = [[0.0; 6]; 3];
        for i in 0..3 {
            for j in 0..6 {
                cb[i][j] = c[i][0] * b[0][j] + c[i][1] * b[1][j] + c[i][2] * b[2][j];
            }
        }
        let mut k = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] = self.area * (b[0][i] * cb[0][j] + b[1][i] * cb[1][j] + b[2][i] * cb[2][j]);
            }
        }
        k
    }

    /// Nodal forces `A Bᵀ σ`.
    pub fn internal_force(&self, sigma: &Sym2) -> [f64; 6] {
        let mut f = [0.0; 6];
        for k in 0..3 {
            let [gx, gy] = self.grads[k];
            f[2 * k] = self.area * (sigma.xx * gx + sigma.xy * gy);
            f[2 * k + 1] = self.area * (sigma.xy * gx + sigma.yy * gy);
        }
        f
    }
}

/// Precomputed element data for a whole mesh.
pub fn elements(mesh: &Mesh) -> Result<Vec<P1Element>> {
    (0..mesh.num_triangles())
        .map(|e| P1Element::new(mesh.triangles[e], mesh.coords(e), e))
        .collect()
}

/// Constant strain of element `e` for the interleaved displacement `u`.
pub fn element_strain(mesh: &Mesh, u: &[f64], e: usize) -> Result<Sym2> {
    Ok(P1Element::new(mesh.triangles[e], mesh.coords(e), e)?.strain(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> P1Element {
        P1Element::new([0, 1, 2], [[0.1, 0.2], [1.3, 0.0], [0.4, 0.9]], 0).unwrap()
    }

    fn nodal(f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        [[0.1, 0.2], [1.3, 0.0], [0.4, 0.9]]
            .iter()
            .flat_map(|p| f(p[0], p[1]))
            .collect()
    }

    #[test]
    fn rigid_translation_has_no_strain() {
        let e = tri().strain(&nodal(|_, _| [0.3, -1.2]));
        assert!(e.norm_sq() < 1e-28);
    }

    #[test]
    fn affine_fields_are_exact() {
        let e = tri().strain(&nodal(|x, _| [x, 0.0]));
        assert!((e.xx - 1.0).abs() < 1e-14 && e.yy.abs() < 1e-14 && e.xy.abs() < 1e-14);
        let s = tri().strain(&nodal(|x, y| [y, x]));
        assert!((s.xy - 1.0).abs() < 1e-14 && s.trace().abs() < 1e-14);
    }

    #[test]
    fn degenerate_is_rejected() {
        assert!(P1Element::new([0, 1, 2], [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], 4).is_err());
        assert!(P1Element::new([0, 1, 2], [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], 4).is_err());
    }

    #[test]
    fn mass_and_laplacian_sums() {
        let t = tri();
        let m = t.mass();
        let total: f64 = m.iter().flatten().sum();
        assert!((total - t.area).abs() < 1e-14);
        for row in t.laplacian() {
            assert!(row.iter().sum::<f64>().abs() < 1e-14);
        }
        let alpha = [0.2, 0.5, 0.9];
        let c = [0.8, 0.5, 0.1];
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += c[i] * m[i][j] * c[j];
            }
        }
        assert!((t.mean_square_complement(&alpha) - quad / t.area).abs() < 1e-14);
    }

    #[test]
    fn stiffness_energy_matches_stress_power() {
        let t = tri();
        let c = crate::energy::MaterialParams::default().stiffness_voigt();
        let k = t.stiffness(&c);
        let u = nodal(|x, y| [0.3 * x - 0.1 * y, 0.2 * y + 0.05 * x]);
        let mut quad = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                quad += u[i] * k[i][j] * u[j];
            }
        }
        let e = t.strain(&u);
        let ev = [e.xx, e.yy, 2.0 * e.xy];
        let mut w = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                w += ev[i] * c[i][j] * ev[j];
            }
        }
        assert!((0.5 * quad - 0.5 * w * t.area).abs() < 1e-14);
    }
}
