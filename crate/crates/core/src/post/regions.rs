//! Connected damage regions and their shape descriptors.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::fem::FemModel;
use crate::geometry::{dist, Point};
use crate::solver::Crossings;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DamageRegion {
    #[serde(skip)]
    pub elements: Vec<usize>,
    pub num_elements: usize,
    pub area: f64,
    pub centroid: Point,
    /// Principal axis angle in degrees, in `[0, 180)`.
    pub orientation_deg: f64,
    pub endpoints: [Point; 2],
    /// Extent along the principal axis.
    pub length: f64,
    /// Area over length.
    pub thickness: f64,
    /// Element with the earliest recorded crossing.
    pub nucleation_element: Option<usize>,
    pub nucleation_point: Option<Point>,
    /// Centres of the element clusters whose crossing precedes all their neighbours.
    pub nucleation_sites: Vec<Point>,
}

impl DamageRegion {
    /// Smallest angle between the principal axis and the horizontal, in degrees.
    pub fn inclination_deg(&self) -> f64 {
        let a = self.orientation_deg;
        a.min(180.0 - a)
    }
}

/// Connected components of `{e : mean α_e ≥ threshold}` over edge-sharing elements.
pub fn extract_damage_regions(
    model: &FemModel,
    alpha: &[f64],
    threshold: f64,
    crossings: Option<&Crossings>,
) -> Vec<DamageRegion> {
    let means = model.element_means(alpha);
    let adj = model.mesh.element_adjacency();
    let n = means.len();
    let damaged: Vec<bool> = means.iter().map(|&a| a >= threshold).collect();
    let mut label = vec![usize::MAX; n];
    let mut regions = Vec::new();
    for seed in 0..n {
        if !damaged[seed] || label[seed] != usize::MAX {
            continue;
        }
        let id = regions.len();
        let mut members = vec![seed];
        label[seed] = id;
        let mut queue = VecDeque::from([seed]);
        while let Some(e) = queue.pop_front() {
            for &f in &adj[e] {
                if damaged[f] && label[f] == usize::MAX {
                    label[f] = id;
                    members.push(f);
                    queue.push_back(f);
                }
            }
        }
        members.sort_unstable();
        regions.push(describe(model, &means, &adj, members, crossings));
    }
    regions
}

fn describe(
    model: &FemModel,
    means: &[f64],
    adj: &[Vec<usize>],
    elements: Vec<usize>,
    crossings: Option<&Crossings>,
) -> DamageRegion {
    let mesh = &model.mesh;
    let mut wsum = 0.0;
    let mut area = 0.0;
    let mut c = [0.0, 0.0];
    for &e in &elements {
        let a = model.elements[e].area;
        let w = a * means[e];
        let p = mesh.centroid(e);
        area += a;
        wsum += w;
        c[0] += w * p[0];
        c[1] += w * p[1];
    }
    c = [c[0] / wsum, c[1] / wsum];
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &e in &elements {
        let w = model.elements[e].area * means[e];
        let p = mesh.centroid(e);
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        sxx += w * dx * dx;
        syy += w * dy * dy;
        sxy += w * dx * dy;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let axis = [theta.cos(), theta.sin()];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &e in &elements {
        for &v in &mesh.triangles[e] {
            let p = mesh.nodes[v];
            let s = (p[0] - c[0]) * axis[0] + (p[1] - c[1]) * axis[1];
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    let length = hi - lo;
    let mut orientation_deg = theta.to_degrees().rem_euclid(180.0);
    if orientation_deg >= 180.0 {
        orientation_deg = 0.0;
    }
    let endpoints = [
        [c[0] + lo * axis[0], c[1] + lo * axis[1]],
        [c[0] + hi * axis[0], c[1] + hi * axis[1]],
    ];

    let (nucleation_element, nucleation_point, nucleation_sites) = match crossings {
        Some(cr) => nucleation(model, adj, &elements, cr),
        None => (None, None, Vec::new()),
    };
    DamageRegion {
        num_elements: elements.len(),
        elements,
        area,
        centroid: c,
        orientation_deg,
        endpoints,
        length,
        thickness: if length > 0.0 { area / length } else { 0.0 },
        nucleation_element,
        nucleation_point,
        nucleation_sites,
    }
}

type Nucleation = (Option<usize>, Option<Point>, Vec<Point>);

fn nucleation(model: &FemModel, adj: &[Vec<usize>], elements: &[usize], crossings: &Crossings) -> Nucleation {
    let mesh = &model.mesh;
    let inside = |e: usize| elements.binary_search(&e).is_ok();
    let time = |e: usize| crossings[e].unwrap_or((usize::MAX, usize::MAX));
    let Some(first) = elements.iter().map(|&e| time(e)).min() else {
        return (None, None, Vec::new());
    };
    if first.0 == usize::MAX {
        return (None, None, Vec::new());
    }
    // Plateaus of equal crossing time with no earlier neighbour are nucleation sites.
    let mut seen = vec![false; elements.len()];
    let mut sites: Vec<(usize, usize, (usize, usize), Point)> = Vec::new();
    for (k, &e) in elements.iter().enumerate() {
        if seen[k] || crossings[e].is_none() {
            continue;
        }
        let t = time(e);
        let mut cluster = vec![e];
        seen[k] = true;
        let mut minimal = true;
        let mut i = 0;
        while i < cluster.len() {
            let f = cluster[i];
            i += 1;
            for &g in &adj[f] {
                if !inside(g) {
                    continue;
                }
                let tg = time(g);
                if tg < t {
                    minimal = false;
                } else if tg == t {
                    let kg = elements.binary_search(&g).expect("member");
                    if !seen[kg] {
                        seen[kg] = true;
                        cluster.push(g);
                    }
                }
            }
        }
        if minimal {
            let mut c = [0.0, 0.0];
            let mut w = 0.0;
            for &f in &cluster {
                let a = model.elements[f].area;
                let p = mesh.centroid(f);
                c[0] += a * p[0];
                c[1] += a * p[1];
                w += a;
            }
            c = [c[0] / w, c[1] / w];
            let rep = *cluster
                .iter()
                .min_by(|&&a, &&b| dist(mesh.centroid(a), c).total_cmp(&dist(mesh.centroid(b), c)))
                .expect("non-empty cluster");
            sites.push((cluster.len(), rep, t, c));
        }
    }
    sites.sort_by(|a, b| a.2.cmp(&b.2).then(b.0.cmp(&a.0)).then(a.1.cmp(&b.1)));
    // Clusters a couple of elements apart belong to the same site.
    let mean_area = elements.iter().map(|&e| model.elements[e].area).sum::<f64>() / elements.len() as f64;
    let merge = 2.0 * (2.0 * mean_area).sqrt();
    let mut kept: Vec<Point> = Vec::new();
    for s in &sites {
        if kept.iter().all(|&k| dist(k, s.3) > merge) {
            kept.push(s.3);
        }
    }
    let rep = sites[0].1;
    (Some(rep), Some(mesh.centroid(rep)), kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RectangleMesh;

    fn model() -> FemModel {
        FemModel::new(RectangleMesh::new(0.0, 0.0, 2.0, 1.0, 160, 80).alternating().build().unwrap()).unwrap()
    }

    /// Optimal AT1 profile `(1 - d/2ℓ)²` around the line through `p` with direction angle `deg`.
    fn band(m: &FemModel, p: Point, deg: f64, ell: f64) -> Vec<f64> {
        let (s, c) = deg.to_radians().sin_cos();
        m.mesh
            .nodes
            .iter()
            .map(|q| {
                let d = (-(q[0] - p[0]) * s + (q[1] - p[1]) * c).abs();
                (1.0 - d / (2.0 * ell)).max(0.0).powi(2)
            })
            .collect()
    }

    #[test]
    fn empty_field_has_no_regions() {
        let m = model();
        assert!(extract_damage_regions(&m, &vec![0.0; m.num_nodes()], 0.5, None).is_empty());
    }

    #[test]
    fn seeded_band_orientation() {
        let m = model();
        let ell = 0.05;
        for deg in [0.0, 17.0, 35.0, 150.0] {
            let a = band(&m, [1.0, 0.5], deg, ell);
            let r = extract_damage_regions(&m, &a, 0.5, None);
            // staircase ends at the domain edge may isolate single elements
            let main = r.iter().max_by_key(|x| x.num_elements).unwrap();
            let total: usize = r.iter().map(|x| x.num_elements).sum();
            assert!(main.num_elements as f64 >= 0.99 * total as f64);
            let diff = (main.orientation_deg - deg).abs();
            assert!(diff.min(180.0 - diff) < 2.0, "{deg}: {}", main.orientation_deg);
            assert!(main.thickness > 0.0 && main.thickness < 4.0 * ell);
        }
    }

    #[test]
    fn disjoint_bands_are_separate_regions() {
        let m = model();
        let a = band(&m, [1.0, 0.25], 0.0, 0.05);
        let b = band(&m, [1.0, 0.75], 0.0, 0.05);
        let both: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
        let r = extract_damage_regions(&m, &both, 0.5, None);
        assert_eq!(r.len(), 2);
        // raising the threshold never enlarges a region
        let r9 = extract_damage_regions(&m, &both, 0.9, None);
        let total = |v: &[DamageRegion]| v.iter().map(|x| x.num_elements).sum::<usize>();
        assert!(total(&r9) <= total(&r));
    }

    #[test]
    fn nucleation_sites_are_local_minima_of_crossing_time() {
        let m = model();
        let a = band(&m, [1.0, 0.5], 0.0, 0.05);
        let means = m.element_means(&a);
        let mut cr: Crossings = vec![None; m.num_elements()];
        for e in 0..m.num_elements() {
            if means[e] >= 0.5 {
                let x = m.mesh.centroid(e)[0];
                // grows from both ends of the band towards the middle
                let t = (x.min(2.0 - x) * 100.0) as usize;
                cr[e] = Some((3, t));
            }
        }
        let r = extract_damage_regions(&m, &a, 0.5, Some(&cr));
        assert_eq!(r.len(), 1);
        let sites = &r[0].nucleation_sites;
        assert_eq!(sites.len(), 2);
        assert!(sites.iter().any(|p| p[0] < 0.05) && sites.iter().any(|p| p[0] > 1.95));
    }
}
