//! Parametric asperity-junction domains.
//!
//! A junction is two congruent triangular asperities (base `D`, height `H`)
//! standing on flat bulks. The upper asperity is inverted and slid along the
//! common face direction so that the contacting faces overlap over a fraction
//! `J` of their length. The bottom asperity apex sits at `(0, H)`, the lower
//! bulk surface at `y = 0` and the upper bulk surface at `y = (2 - J) H`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type Point = [f64; 2];

/// Region tags used by the mesher and the solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum RegionTag {
    /// Undamageable coarse bulk.
    BulkCoarse = 1,
    /// Finely meshed bulk strip adjacent to the asperities.
    BulkFine = 2,
    /// Asperities.
    Junction = 3,
}

impl RegionTag {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(RegionTag::BulkCoarse),
            2 => Some(RegionTag::BulkFine),
            3 => Some(RegionTag::Junction),
            _ => None,
        }
    }

    pub fn is_damageable(self) -> bool {
        self != RegionTag::BulkCoarse
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum BoundaryTag {
    Top = 1,
    Bottom = 2,
    Free = 3,
}

impl BoundaryTag {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(BoundaryTag::Top),
            2 => Some(BoundaryTag::Bottom),
            3 => Some(BoundaryTag::Free),
            _ => None,
        }
    }
}

/// Shape parameters of a single or double junction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JunctionParams {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "H_over_D")]
    pub h_over_d: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "B_over_D")]
    pub b_over_d: f64,
    #[serde(rename = "L_over_D")]
    pub l_over_d: f64,
    /// Height of the fine bulk strip.
    #[serde(rename = "S_over_D")]
    pub s_over_d: f64,
    /// Horizontal extension of the fine strip beyond the asperity footprint.
    pub fine_margin_over_d: f64,
    /// Spacing between the two junctions of a pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_gap: Option<f64>,
}

impl Default for JunctionParams {
    fn default() -> Self {
        JunctionParams {
            d: 1.0,
            h_over_d: 0.5,
            j: 0.5,
            b_over_d: 3.0,
            l_over_d: 5.0,
            s_over_d: 1.0,
            fine_margin_over_d: 0.5,
            delta_gap: None,
        }
    }
}

impl JunctionParams {
    pub fn single(h_over_d: f64, j: f64) -> Self {
        JunctionParams {
            h_over_d,
            j,
            ..Default::default()
        }
    }

    pub fn double(h_over_d: f64, j: f64, delta_gap: f64) -> Self {
        JunctionParams {
            h_over_d,
            j,
            delta_gap: Some(delta_gap),
            ..Default::default()
        }
    }

    pub fn height(&self) -> f64 {
        self.h_over_d * self.d
    }

    /// Full asperity side length.
    pub fn j_max(&self) -> f64 {
        let h = self.height();
        (0.25 * self.d * self.d + h * h).sqrt()
    }

    /// Horizontal projection of the contact, `J D / 2`.
    pub fn projected_junction_length(&self) -> f64 {
        0.5 * self.j * self.d
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(invalid("D", "base length must be positive"));
        }
        if !(self.j > 0.0 && self.j <= 1.0) {
            return Err(invalid("J", format!("junction ratio {} outside (0, 1]", self.j)));
        }
        if !(self.h_over_d > 0.0 && self.h_over_d.is_finite()) {
            return Err(invalid("H_over_D", "slenderness must be positive"));
        }
        if !(self.b_over_d >= 2.0) {
            return Err(invalid("B_over_D", "bulk height must be at least 2D"));
        }
        if !(self.l_over_d >= 4.0) {
            return Err(invalid("L_over_D", "bulk length must be at least 4D"));
        }
        if !(self.s_over_d > 0.0 && self.s_over_d < self.b_over_d) {
            return Err(invalid("S_over_D", "fine strip height must lie in (0, B)"));
        }
        if !(self.fine_margin_over_d >= 0.0) {
            return Err(invalid("fine_margin_over_d", "must be non-negative"));
        }
        if let Some(gap) = self.delta_gap {
            if !(gap >= 0.0 && gap.is_finite()) {
                return Err(invalid(
                    "delta_gap",
                    "asperity footprints overlap (negative spacing)",
                ));
            }
            if 2.0 * self.d + gap >= self.l_over_d * self.d {
                return Err(invalid("delta_gap", "junction pair does not fit in the bulk length"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaggedPolygon {
    pub tag: RegionTag,
    /// Counter-clockwise vertex loop.
    pub vertices: Vec<Point>,
}

impl TaggedPolygon {
    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(p, &self.vertices)
    }

    /// Euclidean distance from `p` to the closed polygon (zero inside).
    pub fn distance(&self, p: Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }

    pub fn distance(&self, p: Point) -> f64 {
        point_segment_distance(p, self.a, self.b)
    }

    /// Parameter in `[0, 1]` of the orthogonal projection of `p`.
    pub fn project(&self, p: Point) -> f64 {
        let d = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        (((p[0] - self.a[0]) * d[0] + (p[1] - self.a[1]) * d[1]) / l2).clamp(0.0, 1.0)
    }

    pub fn midpoint(&self) -> Point {
        [0.5 * (self.a[0] + self.b[0]), 0.5 * (self.a[1] + self.b[1])]
    }
}

/// Stress-concentration landmarks of a junction geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct Landmarks {
    /// Ends of each contact interface (asperity apices), two per junction.
    pub junction_corners: Vec<Point>,
    /// Base corners where each contact face meets its substrate, two per junction.
    pub bulk_corners: Vec<Point>,
    pub interfaces: Vec<Segment>,
    pub centers: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JunctionGeometry {
    pub params: JunctionParams,
    pub regions: Vec<TaggedPolygon>,
    pub landmarks: Landmarks,
    pub x_min: f64,
    pub x_max: f64,
    pub y_bottom: f64,
    pub y_top: f64,
    /// Height of the upper bulk surface.
    pub y_upper_surface: f64,
    /// Horizontal coordinate of each bottom asperity apex.
    pub asperity_offsets: Vec<f64>,
}

/// Builds a single junction centred on the bulk.
pub fn build_single_junction(params: &JunctionParams) -> Result<JunctionGeometry> {
    if params.delta_gap.is_some() {
        return Err(invalid("delta_gap", "single junctions take no spacing"));
    }
    params.validate()?;
    build(params, &[0.0])
}

/// Builds two congruent junctions whose bottom apices are `D + Δ` apart.
pub fn build_double_junction(params: &JunctionParams) -> Result<JunctionGeometry> {
    let gap = params
        .delta_gap
        .ok_or_else(|| invalid("delta_gap", "double junctions need a spacing"))?;
    params.validate()?;
    build(params, &[0.0, params.d + gap])
}

/// Dispatches on the presence of `delta_gap`.
pub fn build_junction(params: &JunctionParams) -> Result<JunctionGeometry> {
    if params.delta_gap.is_some() {
        build_double_junction(params)
    } else {
        build_single_junction(params)
    }
}

pub fn landmark_points(geom: &JunctionGeometry) -> &Landmarks {
    &geom.landmarks
}

fn build(p: &JunctionParams, offsets: &[f64]) -> Result<JunctionGeometry> {
    let d = p.d;
    let h = p.height();
    let j = p.j;
    let yt = (2.0 - j) * h;
    let shift = -0.5 * j * d;

    let mut regions = Vec::new();
    let mut lm = Landmarks {
        junction_corners: Vec::new(),
        bulk_corners: Vec::new(),
        interfaces: Vec::new(),
        centers: Vec::new(),
    };
    let mut fx0 = f64::INFINITY;
    let mut fx1 = f64::NEG_INFINITY;
    for &o in offsets {
        let bottom = vec![[o - 0.5 * d, 0.0], [o + 0.5 * d, 0.0], [o, h]];
        let top_apex = [o + shift, (1.0 - j) * h];
        let top = vec![
            [o + shift + 0.5 * d, yt],
            [o + shift - 0.5 * d, yt],
            top_apex,
        ];
        let bottom_apex = [o, h];
        lm.junction_corners.push(top_apex);
        lm.junction_corners.push(bottom_apex);
        lm.bulk_corners.push([o - 0.5 * d, 0.0]);
        lm.bulk_corners.push([o + shift + 0.5 * d, yt]);
        lm.interfaces.push(Segment {
            a: top_apex,
            b: bottom_apex,
        });
        lm.centers.push([o + 0.5 * shift, 0.5 * yt]);
        fx0 = fx0.min(o + shift - 0.5 * d).min(o - 0.5 * d);
        fx1 = fx1.max(o + 0.5 * d).max(o + shift + 0.5 * d);
        regions.push(TaggedPolygon {
            tag: RegionTag::Junction,
            vertices: bottom,
        });
        regions.push(TaggedPolygon {
            tag: RegionTag::Junction,
            vertices: top,
        });
    }

    let xc = 0.5 * (fx0 + fx1);
    let half_l = 0.5 * p.l_over_d * d;
    let (x_min, x_max) = (xc - half_l, xc + half_l);
    let margin = p.fine_margin_over_d * d;
    let (gx0, gx1) = (fx0 - margin, fx1 + margin);
    let b = p.b_over_d * d;
    let s = p.s_over_d * d;
    if gx0 <= x_min || gx1 >= x_max {
        return Err(Error::Geometry(format!(
            "fine strip [{gx0:.4}, {gx1:.4}] does not fit inside the bulk [{x_min:.4}, {x_max:.4}]"
        )));
    }

    // Lower bulk: fine strip below the surface, coarse U around it.
    regions.push(TaggedPolygon {
        tag: RegionTag::BulkFine,
        vertices: vec![[gx0, -s], [gx1, -s], [gx1, 0.0], [gx0, 0.0]],
    });
    regions.push(TaggedPolygon {
        tag: RegionTag::BulkCoarse,
        vertices: vec![
            [x_min, -b],
            [x_max, -b],
            [x_max, 0.0],
            [gx1, 0.0],
            [gx1, -s],
            [gx0, -s],
            [gx0, 0.0],
            [x_min, 0.0],
        ],
    });
    regions.push(TaggedPolygon {
        tag: RegionTag::BulkFine,
        vertices: vec![[gx0, yt], [gx1, yt], [gx1, yt + s], [gx0, yt + s]],
    });
    regions.push(TaggedPolygon {
        tag: RegionTag::BulkCoarse,
        vertices: vec![
            [x_min, yt],
            [gx0, yt],
            [gx0, yt + s],
            [gx1, yt + s],
            [gx1, yt],
            [x_max, yt],
            [x_max, yt + b],
            [x_min, yt + b],
        ],
    });

    for r in &regions {
        if r.area() <= 0.0 {
            return Err(Error::Geometry(format!(
                "region {:?} is degenerate or clockwise",
                r.tag
            )));
        }
    }

    Ok(JunctionGeometry {
        params: *p,
        regions,
        landmarks: lm,
        x_min,
        x_max,
        y_bottom: -b,
        y_top: yt + b,
        y_upper_surface: yt,
        asperity_offsets: offsets.to_vec(),
    })
}

impl JunctionGeometry {
    pub fn is_double(&self) -> bool {
        self.asperity_offsets.len() == 2
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Region containing `p`, asperities taking precedence on shared facets.
    pub fn region_at(&self, p: Point) -> Option<RegionTag> {
        for tag in [RegionTag::Junction, RegionTag::BulkFine, RegionTag::BulkCoarse] {
            if self
                .regions
                .iter()
                .any(|r| r.tag == tag && r.contains(p))
            {
                return Some(tag);
            }
        }
        None
    }

    pub fn regions_with(&self, tag: RegionTag) -> impl Iterator<Item = &TaggedPolygon> {
        self.regions.iter().filter(move |r| r.tag == tag)
    }

    pub fn area(&self) -> f64 {
        self.regions.iter().map(TaggedPolygon::area).sum()
    }

    /// Area of the solid: both bulks plus the asperities.
    pub fn expected_area(&self) -> f64 {
        let p = &self.params;
        2.0 * p.b_over_d * p.d * self.width()
            + self.asperity_offsets.len() as f64 * p.d * p.height()
    }

    /// Distance from `p` to the nearest damageable region.
    pub fn distance_to_fine(&self, p: Point) -> f64 {
        self.regions
            .iter()
            .filter(|r| r.tag.is_damageable())
            .map(|r| r.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Boundary tag of an outer edge from its end points.
    pub fn boundary_tag(&self, a: Point, b: Point) -> BoundaryTag {
        let tol = 1e-9 * (self.y_top - self.y_bottom);
        if (a[1] - self.y_top).abs() < tol && (b[1] - self.y_top).abs() < tol {
            BoundaryTag::Top
        } else if (a[1] - self.y_bottom).abs() < tol && (b[1] - self.y_bottom).abs() < tol {
            BoundaryTag::Bottom
        } else {
            BoundaryTag::Free
        }
    }

    /// Plain-text polygon description: shared vertex list, tagged region loops
    /// and the interface segments.
    pub fn to_poly_string(&self) -> String {
        let mut verts: Vec<Point> = Vec::new();
        let index = |p: Point, verts: &mut Vec<Point>| -> usize {
            if let Some(i) = verts.iter().position(|q| dist(*q, p) < 1e-12) {
                i
            } else {
                verts.push(p);
                verts.len() - 1
            }
        };
        let loops: Vec<(RegionTag, Vec<usize>)> = self
            .regions
            .iter()
            .map(|r| (r.tag, r.vertices.iter().map(|&p| index(p, &mut verts)).collect()))
            .collect();
        let segs: Vec<(usize, usize)> = self
            .landmarks
            .interfaces
            .iter()
            .map(|s| (index(s.a, &mut verts), index(s.b, &mut verts)))
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "# junction polygon file v1");
        let _ = writeln!(out, "vertices {}", verts.len());
        for (i, v) in verts.iter().enumerate() {
            let _ = writeln!(out, "{i} {:.16e} {:.16e}", v[0], v[1]);
        }
        let nfacets: usize = loops.iter().map(|(_, l)| l.len()).sum();
        let _ = writeln!(out, "facets {}", nfacets + segs.len());
        let mut k = 0;
        for (ri, (tag, l)) in loops.iter().enumerate() {
            for i in 0..l.len() {
                let _ = writeln!(out, "{k} {} {} region{}:{ri}", l[i], l[(i + 1) % l.len()], tag.id());
                k += 1;
            }
        }
        for (a, b) in segs {
            let _ = writeln!(out, "{k} {a} {b} interface");
            k += 1;
        }
        let _ = writeln!(out, "regions {}", loops.len());
        for (ri, (tag, l)) in loops.iter().enumerate() {
            let ids: Vec<String> = l.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{ri} {} {}", tag.id(), ids.join(" "));
        }
        out
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Crossing-number test; points on the boundary count as inside.
pub fn point_in_polygon(p: Point, v: &[Point]) -> bool {
    let n = v.len();
    let scale = v
        .iter()
        .map(|q| q[0].abs().max(q[1].abs()))
        .fold(1.0, f64::max);
    for i in 0..n {
        if point_segment_distance(p, v[i], v[(i + 1) % n]) <= 1e-12 * scale {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        dist(a, b) < tol
    }

    #[test]
    fn full_overlap_merges_landmarks() {
        let g = build_single_junction(&JunctionParams::single(0.5, 1.0)).unwrap();
        let lm = landmark_points(&g);
        assert_eq!(lm.junction_corners.len(), 2);
        assert_eq!(lm.bulk_corners.len(), 2);
        for jc in &lm.junction_corners {
            assert!(lm.bulk_corners.iter().any(|bc| close(*jc, *bc, 1e-12)));
        }
    }

    #[test]
    fn interface_length_half_overlap() {
        let g = build_single_junction(&JunctionParams::single(0.5, 0.5)).unwrap();
        let seg = g.landmarks.interfaces[0];
        let expected = 0.5 * (0.25f64 + 0.25).sqrt();
        assert!((seg.length() - expected).abs() < 1e-12);
        assert!((seg.length() - 0.35355).abs() < 1e-5);
    }

    #[test]
    fn interface_lies_on_both_asperity_faces() {
        let g = build_single_junction(&JunctionParams::single(0.7, 0.4)).unwrap();
        let seg = g.landmarks.interfaces[0];
        let tris: Vec<_> = g.regions_with(RegionTag::Junction).collect();
        for t in tris {
            let on_edge = |p: Point| t.edges().any(|(a, b)| point_segment_distance(p, a, b) < 1e-12);
            assert!(on_edge(seg.a) && on_edge(seg.b));
        }
    }

    #[test]
    fn rotation_symmetry() {
        let g = build_single_junction(&JunctionParams::single(0.8, 0.5)).unwrap();
        let c = g.landmarks.centers[0];
        let rot = |p: Point| [2.0 * c[0] - p[0], 2.0 * c[1] - p[1]];
        let all: Vec<Point> = g.regions.iter().flat_map(|r| r.vertices.clone()).collect();
        for p in &all {
            let q = rot(*p);
            assert!(all.iter().any(|r| close(*r, q, 1e-12)), "{p:?} has no image");
        }
    }

    #[test]
    fn area_accounts_for_bulks_and_asperities() {
        for p in [
            JunctionParams::single(0.5, 0.5),
            JunctionParams::single(0.3, 1.0),
            JunctionParams::double(0.6, 0.7, 1.0),
        ] {
            let g = build_junction(&p).unwrap();
            assert!((g.area() - g.expected_area()).abs() <= 1e-10 * g.expected_area());
        }
    }

    #[test]
    fn double_junction_spacing_and_landmarks() {
        let g = build_double_junction(&JunctionParams::double(0.6, 0.7, 1.0)).unwrap();
        assert_eq!(g.asperity_offsets[1] - g.asperity_offsets[0], 2.0);
        let lm = &g.landmarks;
        assert_eq!(lm.junction_corners.len(), 4);
        assert_eq!(lm.bulk_corners.len(), 4);
        assert_eq!(lm.interfaces.len(), 2);
        assert!((g.params.projected_junction_length() - 0.35).abs() < 1e-15);
        let proj = (lm.interfaces[0].b[0] - lm.interfaces[0].a[0]).abs();
        assert!((proj - 0.35).abs() < 1e-12);
    }

    #[test]
    fn touching_pair_is_valid_negative_gap_is_not() {
        assert!(build_double_junction(&JunctionParams::double(0.5, 0.5, 0.0)).is_ok());
        assert!(build_double_junction(&JunctionParams::double(0.5, 0.5, -0.1)).is_err());
        assert!(build_double_junction(&JunctionParams::double(0.5, 0.5, 3.0)).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_single_junction(&JunctionParams::single(0.5, 0.0)).is_err());
        assert!(build_single_junction(&JunctionParams::single(0.5, 1.2)).is_err());
        assert!(build_single_junction(&JunctionParams::single(-0.5, 0.5)).is_err());
        let wide = JunctionParams {
            fine_margin_over_d: 3.0,
            ..JunctionParams::single(0.5, 0.5)
        };
        assert!(build_single_junction(&wide).is_err());
    }

    #[test]
    fn region_lookup() {
        let g = build_single_junction(&JunctionParams::single(0.5, 0.5)).unwrap();
        assert_eq!(g.region_at([0.0, 0.1]), Some(RegionTag::Junction));
        assert_eq!(g.region_at([0.0, -0.1]), Some(RegionTag::BulkFine));
        assert_eq!(g.region_at([g.x_min + 0.01, -2.9]), Some(RegionTag::BulkCoarse));
        // void between the bulks, right of the lower asperity
        assert_eq!(g.region_at([0.45, 0.4]), None);
    }

    #[test]
    fn poly_file_lists_every_region() {
        let g = build_single_junction(&JunctionParams::single(0.5, 0.5)).unwrap();
        let s = g.to_poly_string();
        assert!(s.contains("regions 6"));
        assert!(s.lines().any(|l| l.ends_with("interface")));
    }
}
