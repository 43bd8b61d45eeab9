//! Classifier on real junction meshes with seeded damage bands.

use junction_wear::fem::FemModel;
use junction_wear::geometry::{build_junction, JunctionGeometry, JunctionParams, Point};
use junction_wear::mesh::{triangulate, MeshOptions};
use junction_wear::pipeline::classify_state;
use junction_wear::post::{ClassifierConfig, FailureMode};
use junction_wear::solver::Crossings;

const ELL: f64 = 0.05;

struct Case {
    geom: JunctionGeometry,
    model: FemModel,
}

fn case(params: JunctionParams) -> Case {
    let params = JunctionParams {
        s_over_d: 0.5,
        fine_margin_over_d: 0.3,
        ..params
    };
    let geom = build_junction(&params).unwrap();
    let mesh = triangulate(&geom, &MeshOptions::new(ELL / 2.0, 4.0 * ELL)).unwrap();
    Case {
        geom,
        model: FemModel::new(mesh).unwrap(),
    }
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((p[0] - a[0] - t * dx).powi(2) + (p[1] - a[1] - t * dy).powi(2)).sqrt()
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Cracks of half-width ℓ along segments; damage crosses earliest at the given
/// origins and later with distance from them.
fn classify(c: &Case, bands: &[(Point, Point)], origins: &[Point]) -> (FailureMode, usize) {
    let alpha: Vec<f64> = c
        .model
        .mesh
        .nodes
        .iter()
        .map(|&p| {
            if bands.iter().any(|&(a, b)| seg_dist(p, a, b) <= ELL) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let means = c.model.element_means(&alpha);
    let crossings: Crossings = means
        .iter()
        .enumerate()
        .map(|(e, &m)| {
            (m >= 0.5).then(|| {
                let x = c.model.mesh.centroid(e);
                let d = origins.iter().map(|&o| dist(x, o)).fold(f64::INFINITY, f64::min);
                (1, 1 + (d * 1e4) as usize)
            })
        })
        .collect();
    let cls = classify_state(&c.geom, &c.model, &alpha, &crossings, ELL, &ClassifierConfig::default());
    (cls.mode, cls.particle_events)
}

/// Point inside the asperity whose base corner is `corner`, off the contact face.
fn inward(corner: Point, k: usize) -> Point {
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    [corner[0] + s * 0.6, corner[1] + s * 0.15]
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

#[test]
fn seeded_mechanisms_on_a_single_junction() {
    let c = case(JunctionParams::single(0.5, 0.5));
    let lm = c.geom.landmarks.clone();
    let (top_apex, bottom_apex) = (lm.junction_corners[0], lm.junction_corners[1]);

    assert_eq!(classify(&c, &[], &[]).0, FailureMode::NoFailure);

    let slip = classify(&c, &[(top_apex, bottom_apex)], &[top_apex]);
    assert_eq!(slip, (FailureMode::Slip, 0));

    let h = c.geom.params.height();
    let band = ([-0.45, 0.75 * h], [0.2, 0.75 * h]);
    let shear = classify(&c, &[band], &[lerp(band.0, band.1, 0.5)]);
    assert_eq!(shear.0, FailureMode::SingleShearBand);

    let large = classify(&c, &[(lm.bulk_corners[0], inward(lm.bulk_corners[0], 0))], &[lm.bulk_corners[0]]);
    assert_eq!(large, (FailureMode::LargeParticle, 1));

    let small = classify(
        &c,
        &[
            (top_apex, [top_apex[0] + 0.3, top_apex[1] - 0.25]),
            (bottom_apex, [bottom_apex[0] - 0.3, bottom_apex[1] + 0.25]),
        ],
        &[top_apex, bottom_apex],
    );
    assert_eq!(small.0, FailureMode::SmallParticle);
}

#[test]
fn short_specks_are_ignored() {
    let c = case(JunctionParams::single(0.5, 0.5));
    let p = c.geom.landmarks.centers[0];
    let speck = classify(&c, &[(p, [p[0] + 0.5 * ELL, p[1]])], &[p]);
    assert_eq!(speck.0, FailureMode::NoFailure);
}

#[test]
fn spacing_separates_independent_and_macro_particles() {
    let c = case(JunctionParams::double(0.6, 0.7, 1.5));
    let lm = c.geom.landmarks.clone();
    let crack = |k: usize| (lm.bulk_corners[k], inward(lm.bulk_corners[k], k));

    let both = classify(
        &c,
        &[crack(0), crack(1), crack(2), crack(3)],
        &lm.bulk_corners,
    );
    assert_eq!(both, (FailureMode::LargeParticle, 2));

    let macro_ = classify(
        &c,
        &[crack(0), crack(3)],
        &[lm.bulk_corners[0], lm.bulk_corners[3]],
    );
    assert_eq!(macro_, (FailureMode::MacroParticle, 1));
}
