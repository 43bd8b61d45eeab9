use proptest::prelude::*;

use junction_wear::energy::{
    degradation, elastic_density, split_energy, stress, trace_parts, MaterialParams, SplitKind,
};
use junction_wear::fem::{BoundaryConditions, CsrMatrix, ElasticProblem, FemModel, LinearSolver};
use junction_wear::mesh::RectangleMesh;
use junction_wear::solver::{
    checkpoint::{checkpoint_from_str, checkpoint_to_string},
    solve_box_qp, BoxQpOptions, Simulation, SimulationState, SolverConfig,
};
use junction_wear::study::{interaction_coordinates, theoretical_bound};
use junction_wear::tensor::Sym2;

fn strain() -> impl Strategy<Value = Sym2> {
    (-1e-2..1e-2f64, -1e-2..1e-2f64, -1e-2..1e-2f64).prop_map(|(a, b, c)| Sym2::new(a, b, c))
}

fn material() -> impl Strategy<Value = MaterialParams> {
    (0.5..5.0f64, 0.0..0.45f64, 0.2..3.0f64, 0.01..0.1f64, 1e-8..1e-3f64)
        .prop_map(|(e, nu, gc, ell, eta)| MaterialParams::new(e, nu, gc, ell, eta).unwrap())
}

fn split() -> impl Strategy<Value = SplitKind> {
    prop::sample::select(SplitKind::ALL.to_vec())
}

fn small_strip() -> FemModel {
    FemModel::new(RectangleMesh::new(0.0, 0.0, 0.1, 0.2, 6, 12).alternating().build().unwrap()).unwrap()
}

proptest! {
    #[test]
    fn trace_parts_are_complementary(eps in strain()) {
        let (p, m) = trace_parts(&eps);
        prop_assert!(p >= 0.0 && m <= 0.0);
        prop_assert_eq!(p * m, 0.0);
        prop_assert_eq!(p + m, eps.trace());
    }

    #[test]
    fn hd_minus_ph_is_degraded_deviatoric_energy(eps in strain(), alpha in 0.0..=1.0f64, mat in material()) {
        let lhs = elastic_density(&eps, alpha, &mat, SplitKind::HydrostaticDeviatoric)
            - elastic_density(&eps, alpha, &mat, SplitKind::PositiveHydrostatic);
        let d = eps.deviator();
        let rhs = (degradation(alpha, mat.eta) - 1.0) * mat.shear_modulus() * d.ddot(&d);
        let scale = elastic_density(&eps, 0.0, &mat, SplitKind::NoSplit).max(1e-300);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn splits_partition_the_intact_energy(eps in strain(), mat in material(), s in split()) {
        let whole = split_energy(&eps, &mat, SplitKind::NoSplit).degradable;
        let parts = split_energy(&eps, &mat, s);
        prop_assert!(parts.intact >= 0.0 && parts.degradable >= 0.0);
        prop_assert!((parts.intact + parts.degradable - whole).abs() <= 1e-12 * whole.max(1e-300));
    }

    #[test]
    fn stress_is_the_energy_gradient(eps in strain(), alpha in 0.0..=1.0f64, mat in material(), s in split()) {
        prop_assume!(eps.trace().abs() > 1e-4);
        let g = degradation(alpha, mat.eta);
        let sig = stress(&eps, g, &mat, s);
        let h = 1e-7;
        let w = |e: Sym2| elastic_density(&e, alpha, &mat, s);
        let fd = |d: Sym2| (w(eps + d) - w(eps - d)) / (2.0 * h);
        let scale = sig.norm_sq().sqrt().max(1e-6);
        prop_assert!((fd(Sym2::new(h, 0.0, 0.0)) - sig.xx).abs() <= 1e-5 * scale);
        prop_assert!((fd(Sym2::new(0.0, h, 0.0)) - sig.yy).abs() <= 1e-5 * scale);
        // engineering shear: W depends on xy through 2 xy²
        prop_assert!((fd(Sym2::new(0.0, 0.0, h)) - 2.0 * sig.xy).abs() <= 1e-5 * scale);
    }

    #[test]
    fn bound_forms_agree_and_grow_with_ell(mat in material(), a in 0.2..3.0f64, b in 0.2..3.0f64,
                                           h_over_d in 0.1..1.0f64, d in 0.5..2.0f64) {
        let h = h_over_d * d;
        let r = theoretical_bound(a, b, &mat, h, d);
        prop_assert!((r.from_length - r.from_strength).abs() <= 1e-12 * r.from_length);
        let longer = theoretical_bound(a, b, &mat.with_ell(mat.ell * 1.1), h, d);
        prop_assert!(longer.from_length > r.from_length);
        let taller = theoretical_bound(a, b, &mat, 1.1 * h, d);
        prop_assert!(taller.from_length < r.from_length);
    }

    #[test]
    fn apparent_length_grows_with_spacing(h in 0.2..1.0f64, j in 0.1..1.0f64, gap in 0.0..3.0f64, c in 0.1..0.5f64) {
        let near = interaction_coordinates(1.0, h, j, gap, c);
        let far = interaction_coordinates(1.0, h, j, gap + 0.5, c);
        prop_assert!(far.j_a > near.j_a);
        prop_assert_eq!(far.j_r, near.j_r);
        prop_assert!(near.j_a > near.j_r);
    }

    #[test]
    fn checkpoints_round_trip_bitwise(vals in prop::collection::vec(-1e3..1e3f64, 1..40), step in 0usize..1000) {
        let n = vals.len();
        let mut s = SimulationState::initial(n);
        s.step = step;
        s.u_t = vals[0];
        s.u = vals.iter().chain(vals.iter()).map(|v| v * 1e-3).collect();
        s.alpha = vals.iter().map(|v| (v / 1e3).abs()).collect();
        s.alpha_lower = s.alpha.iter().map(|a| 0.5 * a).collect();
        let back = checkpoint_from_str(&checkpoint_to_string(&s)).unwrap();
        prop_assert_eq!(back, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn box_qp_meets_kkt(diag in prop::collection::vec(2.0..5.0f64, 8), b in prop::collection::vec(-3.0..3.0f64, 8),
                        lower in prop::collection::vec(0.0..0.5f64, 8)) {
        let n = diag.len();
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, diag[i]));
            if i + 1 < n {
                t.push((i, i + 1, -0.5));
                t.push((i + 1, i, -0.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let upper = vec![1.0; n];
        let opts = BoxQpOptions { kkt_tol: 1e-10, ..BoxQpOptions::default() };
        let sol = solve_box_qp(&a, &b, &lower, &upper, &lower, &opts).unwrap();
        let mut g = vec![0.0; n];
        a.matvec(&sol.x, &mut g);
        for i in 0..n {
            let gi = g[i] + b[i];
            prop_assert!(sol.x[i] >= lower[i] && sol.x[i] <= 1.0);
            let pg = if sol.x[i] <= lower[i] { gi.min(0.0) } else if sol.x[i] >= 1.0 { gi.max(0.0) } else { gi };
            prop_assert!(pg.abs() <= 1e-8, "component {} projected gradient {}", i, pg);
        }
    }

    #[test]
    fn intact_response_is_linear_in_load(mat in material(), s in split(), load in 1e-3..1e-1f64) {
        let model = small_strip();
        let bcs = BoundaryConditions::uniaxial_tension(&model.mesh).unwrap();
        let mut p = ElasticProblem::new(&model, mat, s, bcs, LinearSolver::default()).unwrap();
        let zero = vec![0.0; model.num_nodes()];
        let u0 = vec![0.0; 2 * model.num_nodes()];
        let u1 = p.solve(&zero, load, &u0).unwrap().u;
        let u2 = p.solve(&zero, 2.0 * load, &u0).unwrap().u;
        let (top, bottom) = p.reactions(&u1, &zero);
        let r2 = p.reactions(&u2, &zero).0;
        prop_assert!((r2 - 2.0 * top).abs() <= 1e-9 * top.abs());
        prop_assert!((top + bottom).abs() <= 1e-9 * top.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn loading_history_is_irreversible_and_descending(ell in 0.02..0.06f64, s in split(), steps in 20usize..40) {
        let model = small_strip();
        let mat = MaterialParams::default().with_ell(ell);
        let bcs = BoundaryConditions::uniaxial_tension(&model.mesh).unwrap();
        let du = junction_wear::energy::nucleation_stress(&mat) / mat.plane_strain_modulus() * 0.2 / steps as f64;
        let cfg = SolverConfig { max_steps: 3 * steps, startup_steps: 0, stop_at_failure: false, ..SolverConfig::default() };
        let mut sim = Simulation::new(&model, mat, s, bcs, cfg).unwrap();
        let out = sim.run(SimulationState::initial(model.num_nodes()), du).unwrap();
        prop_assert!(out.history.iter().any(|h| h.max_alpha > 0.0));
        for h in &out.history {
            prop_assert!(h.min_alpha_increment >= -1e-12, "step {} increment {}", h.step, h.min_alpha_increment);
            prop_assert!(h.max_energy_rise <= 1e-10, "step {} rise {}", h.step, h.max_energy_rise);
        }
        let (top, bottom) = sim.elastic().reactions(&out.final_state.u, &out.final_state.alpha);
        prop_assert!((top + bottom).abs() <= 1e-8 * top.abs().max(1e-300));
    }
}
