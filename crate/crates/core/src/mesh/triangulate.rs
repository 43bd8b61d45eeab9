//! Graded constrained Delaunay meshing of tagged polygonal domains.
//!
//! Vertices come from jittered hexagonal lattices whose spacing follows a
//! piecewise-constant sizing field (powers of two of the fine size). The
//! segments of all region boundaries are subdivided with the same field and
//! imposed as constraints. A Ruppert-style loop then inserts circumcenters of
//! poorly shaped or oversized triangles, splitting encroached subsegments.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spade::handles::FixedVertexHandle;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    dist, point_segment_distance, BoundaryTag, JunctionGeometry, Point, RegionTag, Segment,
    TaggedPolygon,
};

use super::Mesh;

type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshOptions {
    pub delta_fine: f64,
    pub delta_coarse: f64,
    pub seed: u64,
    /// Growth rate of the target size with distance from the damageable regions.
    pub grading: f64,
    pub min_angle_deg: f64,
    pub max_passes: usize,
}

impl MeshOptions {
    pub fn new(delta_fine: f64, delta_coarse: f64) -> Self {
        MeshOptions {
            delta_fine,
            delta_coarse,
            seed: 0,
            grading: 0.5,
            min_angle_deg: 20.5,
            max_passes: 80,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Tagged polygons plus extra internal segments to be resolved by mesh edges.
#[derive(Clone, Debug)]
pub struct PlanarDomain {
    pub regions: Vec<TaggedPolygon>,
    pub segments: Vec<Segment>,
    pub y_bottom: f64,
    pub y_top: f64,
}

impl PlanarDomain {
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, tag: RegionTag) -> Self {
        PlanarDomain {
            regions: vec![TaggedPolygon {
                tag,
                vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            }],
            segments: Vec::new(),
            y_bottom: y0,
            y_top: y1,
        }
    }

    pub fn region_at(&self, p: Point) -> Option<RegionTag> {
        for tag in [RegionTag::Junction, RegionTag::BulkFine, RegionTag::BulkCoarse] {
            if self.regions.iter().any(|r| r.tag == tag && r.contains(p)) {
                return Some(tag);
            }
        }
        None
    }

    fn distance_to_fine(&self, p: Point) -> f64 {
        self.regions
            .iter()
            .filter(|r| r.tag.is_damageable())
            .map(|r| r.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn boundary_tag(&self, a: Point, b: Point) -> BoundaryTag {
        let tol = 1e-9 * (self.y_top - self.y_bottom);
        let on = |p: Point, y: f64| (p[1] - y).abs() < tol;
        if on(a, self.y_top) && on(b, self.y_top) {
            BoundaryTag::Top
        } else if on(a, self.y_bottom) && on(b, self.y_bottom) {
            BoundaryTag::Bottom
        } else {
            BoundaryTag::Free
        }
    }

    fn bbox(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in self.regions.iter().flat_map(|r| r.vertices.iter()) {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

impl From<&JunctionGeometry> for PlanarDomain {
    fn from(g: &JunctionGeometry) -> Self {
        PlanarDomain {
            regions: g.regions.clone(),
            segments: g.landmarks.interfaces.clone(),
            y_bottom: g.y_bottom,
            y_top: g.y_top,
        }
    }
}

/// Meshes a junction geometry.
pub fn triangulate(geom: &JunctionGeometry, opts: &MeshOptions) -> Result<Mesh> {
    triangulate_domain(&PlanarDomain::from(geom), opts)
}

struct Sizing<'a> {
    domain: &'a PlanarDomain,
    levels: Vec<f64>,
    grading: f64,
}

impl Sizing<'_> {
    fn h(&self, p: Point) -> f64 {
        let d0 = self.levels[0];
        let raw = d0 + self.grading * self.domain.distance_to_fine(p);
        let mut h = d0;
        for &s in &self.levels {
            if s <= raw * (1.0 + 1e-12) {
                h = s;
            }
        }
        h
    }
}

/// Uniform bucket grid for proximity queries.
struct Grid {
    cell: f64,
    map: HashMap<(i64, i64), Vec<u32>>,
}

impl Grid {
    fn new(cell: f64) -> Self {
        Grid {
            cell,
            map: HashMap::new(),
        }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p[0] / self.cell).floor() as i64, (p[1] / self.cell).floor() as i64)
    }

    fn insert_box(&mut self, id: usize, lo: Point, hi: Point) {
        let (a, b) = (self.key(lo), self.key(hi));
        for i in a.0..=b.0 {
            for j in a.1..=b.1 {
                self.map.entry((i, j)).or_default().push(id as u32);
            }
        }
    }

    fn insert_point(&mut self, id: usize, p: Point) {
        self.insert_box(id, p, p);
    }

    fn query(&self, p: Point, r: f64, mut f: impl FnMut(usize)) {
        let (a, b) = (self.key([p[0] - r, p[1] - r]), self.key([p[0] + r, p[1] + r]));
        for i in a.0..=b.0 {
            for j in a.1..=b.1 {
                if let Some(v) = self.map.get(&(i, j)) {
                    for &id in v {
                        f(id as usize);
                    }
                }
            }
        }
    }
}

struct Pslg {
    verts: Vec<Point>,
    segs: Vec<[usize; 2]>,
}

fn meshing_error(a: Point, b: Point, reason: impl Into<String>) -> Error {
    Error::Meshing {
        x0: a[0],
        y0: a[1],
        x1: b[0],
        y1: b[1],
        reason: reason.into(),
    }
}

fn build_pslg(domain: &PlanarDomain, scale: f64) -> Result<Pslg> {
    let tol = 1e-10 * scale;
    let mut verts: Vec<Point> = Vec::new();
    let index = |p: Point, verts: &mut Vec<Point>| -> usize {
        match verts.iter().position(|q| dist(*q, p) < tol) {
            Some(i) => i,
            None => {
                verts.push(p);
                verts.len() - 1
            }
        }
    };
    let mut raw: Vec<[usize; 2]> = Vec::new();
    for r in &domain.regions {
        if r.vertices.len() < 3 || r.area() <= 0.0 {
            let a = r.vertices.first().copied().unwrap_or([0.0; 2]);
            let b = r.vertices.get(1).copied().unwrap_or(a);
            return Err(meshing_error(a, b, "region polygon is degenerate or clockwise"));
        }
        for (a, b) in r.edges() {
            let (ia, ib) = (index(a, &mut verts), index(b, &mut verts));
            if ia == ib {
                return Err(meshing_error(a, b, "zero-length facet"));
            }
            raw.push([ia, ib]);
        }
    }
    for s in &domain.segments {
        let (ia, ib) = (index(s.a, &mut verts), index(s.b, &mut verts));
        if ia != ib {
            raw.push([ia, ib]);
        }
    }
    let mut seen = HashSet::new();
    let mut segs = Vec::new();
    for [a, b] in raw {
        let (pa, pb) = (verts[a], verts[b]);
        let len = dist(pa, pb);
        let mut on: Vec<(f64, usize)> = verts
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != a && i != b && point_segment_distance(v, pa, pb) < tol)
            .map(|(i, &v)| (dist(pa, v) / len, i))
            .collect();
        on.sort_by(|x, y| x.0.total_cmp(&y.0));
        let chain: Vec<usize> = std::iter::once(a)
            .chain(on.into_iter().map(|(_, i)| i))
            .chain(std::iter::once(b))
            .collect();
        for w in chain.windows(2) {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            if seen.insert(key) {
                segs.push([w[0], w[1]]);
            }
        }
    }
    Ok(Pslg { verts, segs })
}

/// Subdivision points (excluding end points) of `a -> b` following the sizing field.
fn subdivide(a: Point, b: Point, sizing: &Sizing) -> Vec<Point> {
    let len = dist(a, b);
    let samples = ((len / sizing.levels[0]).ceil() as usize * 4).max(8);
    let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let mut cum = vec![0.0; samples + 1];
    for i in 0..samples {
        let t = (i as f64 + 0.5) / samples as f64;
        cum[i + 1] = cum[i] + len / samples as f64 / sizing.h(at(t));
    }
    let total = cum[samples];
    let n = total.round().max(1.0) as usize;
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    let mut i = 0;
    for k in 1..n {
        let target = total * k as f64 / n as f64;
        while cum[i + 1] < target {
            i += 1;
        }
        let frac = (target - cum[i]) / (cum[i + 1] - cum[i]);
        out.push(at((i as f64 + frac) / samples as f64));
    }
    out
}

pub fn triangulate_domain(domain: &PlanarDomain, opts: &MeshOptions) -> Result<Mesh> {
    let df = opts.delta_fine;
    let dc = opts.delta_coarse;
    if !(df > 0.0 && df.is_finite()) {
        return Err(invalid("delta_fine", "must be positive"));
    }
    if !(dc >= df && dc.is_finite()) {
        return Err(invalid("delta_coarse", "must be at least delta_fine"));
    }
    let mut levels = vec![df];
    while *levels.last().unwrap() * 2.0 < dc * (1.0 + 1e-12) {
        levels.push(levels.last().unwrap() * 2.0);
    }
    if *levels.last().unwrap() < dc * (1.0 - 1e-12) {
        levels.push(dc);
    }
    let sizing = Sizing {
        domain,
        levels,
        grading: opts.grading,
    };
    let (lo, hi) = domain.bbox();
    let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let pslg = build_pslg(domain, scale)?;

    // Boundary vertices and subdivided constraint segments.
    let mut pts: Vec<Point> = pslg.verts.clone();
    let mut segs: Vec<[usize; 2]> = Vec::new();
    for &[a, b] in &pslg.segs {
        let mids = subdivide(pts[a], pts[b], &sizing);
        let mut prev = a;
        for m in mids {
            pts.push(m);
            segs.push([prev, pts.len() - 1]);
            prev = pts.len() - 1;
        }
        segs.push([prev, b]);
    }

    let mut point_grid = Grid::new(df);
    for (i, &p) in pts.iter().enumerate() {
        point_grid.insert_point(i, p);
    }
    let mut seg_grid = Grid::new(2.0 * df);
    let diam_box = |a: Point, b: Point| {
        let c = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let r = 0.5 * dist(a, b);
        ([c[0] - r, c[1] - r], [c[0] + r, c[1] + r])
    };
    for (s, &[a, b]) in segs.iter().enumerate() {
        let (l, h) = diam_box(pts[a], pts[b]);
        seg_grid.insert_box(s, l, h);
    }

    // Jittered hexagonal lattices, finest first.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for (k, &s) in sizing.levels.iter().enumerate() {
        let next = sizing.levels.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let dy = s * 3f64.sqrt() / 2.0;
        let nrows = ((hi[1] - lo[1]) / dy).ceil() as i64;
        let ncols = ((hi[0] - lo[0]) / s).ceil() as i64 + 1;
        for row in 0..=nrows {
            let y = lo[1] + row as f64 * dy;
            let shift = if row % 2 == 0 { 0.0 } else { 0.5 * s };
            for col in 0..=ncols {
                let jx: f64 = rng.random_range(-0.1..0.1);
                let jy: f64 = rng.random_range(-0.1..0.1);
                let p = [lo[0] + shift + col as f64 * s + jx * s, y + jy * s];
                let h = sizing.h(p);
                if h < s * (1.0 - 1e-9) || h >= next * (1.0 - 1e-9) {
                    continue;
                }
                if domain.region_at(p).is_none() {
                    continue;
                }
                let mut ok = true;
                seg_grid.query(p, 0.6 * s, |id| {
                    let [a, b] = segs[id];
                    if point_segment_distance(p, pts[a], pts[b]) < 0.6 * s {
                        ok = false;
                    }
                });
                if !ok {
                    continue;
                }
                point_grid.query(p, 0.7 * s, |id| {
                    if dist(pts[id], p) < 0.7 * s {
                        ok = false;
                    }
                });
                if ok {
                    point_grid.insert_point(pts.len(), p);
                    pts.push(p);
                }
            }
        }
    }

    let n0 = pts.len();
    let vertices: Vec<Point2<f64>> = pts.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let mut conflict = None;
    let mut cdt = Cdt::try_bulk_load_cdt(vertices, segs.clone(), |e| {
        conflict.get_or_insert(e);
    })
    .map_err(|e| meshing_error(lo, hi, format!("triangulation failed: {e:?}")))?;
    if let Some([a, b]) = conflict {
        return Err(meshing_error(pts[a], pts[b], "intersecting facets"));
    }
    if cdt.num_vertices() != n0 {
        return Err(meshing_error(lo, hi, "duplicate vertices in the point set"));
    }

    refine(&mut cdt, domain, &sizing, opts, &mut pts, &mut segs, &mut point_grid, &mut seg_grid)?;

    // Keep faces inside the domain.
    let mut map = vec![usize::MAX; pts.len()];
    let mut nodes = Vec::new();
    let mut triangles = Vec::new();
    let mut regions = Vec::new();
    for f in cdt.inner_faces() {
        let vs = f.vertices();
        let ids = [vs[0].fix().index(), vs[1].fix().index(), vs[2].fix().index()];
        let c = [
            (pts[ids[0]][0] + pts[ids[1]][0] + pts[ids[2]][0]) / 3.0,
            (pts[ids[0]][1] + pts[ids[1]][1] + pts[ids[2]][1]) / 3.0,
        ];
        if let Some(tag) = domain.region_at(c) {
            let mut t = [0; 3];
            for k in 0..3 {
                if map[ids[k]] == usize::MAX {
                    map[ids[k]] = nodes.len();
                    nodes.push(pts[ids[k]]);
                }
                t[k] = map[ids[k]];
            }
            triangles.push(t);
            regions.push(tag);
        }
    }
    Mesh::from_parts(nodes, triangles, regions, df, dc, |a, b| domain.boundary_tag(a, b))
}

fn circumcircle(p: [Point; 3]) -> (Point, f64) {
    let (a, b, c) = (p[0], p[1], p[2]);
    let bx = b[0] - a[0];
    let by = b[1] - a[1];
    let cx = c[0] - a[0];
    let cy = c[1] - a[1];
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ([a[0] + ux, a[1] + uy], (ux * ux + uy * uy).sqrt())
}

#[allow(clippy::too_many_arguments)]
fn refine(
    cdt: &mut Cdt,
    domain: &PlanarDomain,
    sizing: &Sizing,
    opts: &MeshOptions,
    pts: &mut Vec<Point>,
    segs: &mut Vec<[usize; 2]>,
    point_grid: &mut Grid,
    seg_grid: &mut Grid,
) -> Result<()> {
    let df = opts.delta_fine;
    let mut alive = vec![true; segs.len()];
    let mut seg_keys: HashMap<(usize, usize), usize> = segs
        .iter()
        .enumerate()
        .map(|(i, &[a, b])| ((a.min(b), a.max(b)), i))
        .collect();

    for _pass in 0..opts.max_passes {
        let mut bad: Vec<([usize; 3], Point, f64)> = Vec::new();
        for f in cdt.inner_faces() {
            let vs = f.vertices();
            let ids = [vs[0].fix().index(), vs[1].fix().index(), vs[2].fix().index()];
            let p = [pts[ids[0]], pts[ids[1]], pts[ids[2]]];
            let centroid = [
                (p[0][0] + p[1][0] + p[2][0]) / 3.0,
                (p[0][1] + p[1][1] + p[2][1]) / 3.0,
            ];
            if domain.region_at(centroid).is_none() {
                continue;
            }
            let h = sizing.h(centroid);
            let angles = super::triangle_angles(p);
            let min_angle = angles[0].min(angles[1]).min(angles[2]);
            let (c, r) = circumcircle(p);
            let skinny = min_angle < opts.min_angle_deg && r > 0.15 * h;
            let large = 2.0 * r > 1.4 * h;
            if skinny || large {
                bad.push((ids, c, r));
            }
        }
        if bad.is_empty() {
            break;
        }
        bad.sort_by(|a, b| b.2.total_cmp(&a.2));

        let mut changed = false;
        for (ids, c, r) in bad {
            let mut encroached: Vec<usize> = Vec::new();
            seg_grid.query(c, 0.0, |s| {
                if alive[s] && !encroached.contains(&s) {
                    let [a, b] = segs[s];
                    let (pa, pb) = (pts[a], pts[b]);
                    let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                    if dist(mid, c) < 0.5 * dist(pa, pb) * (1.0 - 1e-9) {
                        encroached.push(s);
                    }
                }
            });
            let outside = domain.region_at(c).is_none();
            if encroached.is_empty() && outside {
                // Fall back on the longest constrained edge of the triangle.
                let mut best: Option<(f64, usize)> = None;
                for k in 0..3 {
                    let (a, b) = (ids[k], ids[(k + 1) % 3]);
                    if let Some(&s) = seg_keys.get(&(a.min(b), a.max(b))) {
                        let l = dist(pts[a], pts[b]);
                        if best.is_none_or(|(bl, _)| l > bl) {
                            best = Some((l, s));
                        }
                    }
                }
                if let Some((_, s)) = best {
                    encroached.push(s);
                }
            }
            if !encroached.is_empty() {
                encroached.sort_unstable();
                for s in encroached {
                    if !alive[s] {
                        continue;
                    }
                    let [a, b] = segs[s];
                    if dist(pts[a], pts[b]) < 0.3 * df {
                        continue;
                    }
                    split_segment(cdt, s, pts, segs, &mut alive, &mut seg_keys, point_grid, seg_grid)?;
                    changed = true;
                }
                continue;
            }
            if outside {
                continue;
            }
            let mut crowded = false;
            point_grid.query(c, 0.5 * r, |id| {
                if dist(pts[id], c) < 0.5 * r {
                    crowded = true;
                }
            });
            if crowded {
                continue;
            }
            let v = cdt
                .insert(Point2::new(c[0], c[1]))
                .map_err(|e| meshing_error(c, c, format!("insertion failed: {e:?}")))?;
            if v.index() == pts.len() {
                point_grid.insert_point(pts.len(), c);
                pts.push(c);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn split_segment(
    cdt: &mut Cdt,
    s: usize,
    pts: &mut Vec<Point>,
    segs: &mut Vec<[usize; 2]>,
    alive: &mut Vec<bool>,
    seg_keys: &mut HashMap<(usize, usize), usize>,
    point_grid: &mut Grid,
    seg_grid: &mut Grid,
) -> Result<()> {
    let [a, b] = segs[s];
    let (va, vb) = (FixedVertexHandle::from_index(a), FixedVertexHandle::from_index(b));
    let edge = cdt
        .get_edge_from_neighbors(va, vb)
        .map(|e| e.as_undirected().fix())
        .ok_or_else(|| meshing_error(pts[a], pts[b], "constraint edge lost during refinement"))?;
    cdt.remove_constraint_edge(edge);
    let m = [0.5 * (pts[a][0] + pts[b][0]), 0.5 * (pts[a][1] + pts[b][1])];
    let vm = cdt
        .insert(Point2::new(m[0], m[1]))
        .map_err(|e| meshing_error(pts[a], pts[b], format!("split failed: {e:?}")))?;
    if vm.index() != pts.len() {
        return Err(meshing_error(pts[a], pts[b], "segment midpoint coincides with a vertex"));
    }
    point_grid.insert_point(pts.len(), m);
    pts.push(m);
    let im = vm.index();
    cdt.add_constraint(va, vm);
    cdt.add_constraint(vm, vb);
    alive[s] = false;
    seg_keys.remove(&(a.min(b), a.max(b)));
    for [x, y] in [[a, im], [im, b]] {
        let id = segs.len();
        segs.push([x, y]);
        alive.push(true);
        seg_keys.insert((x.min(y), x.max(y)), id);
        let (pa, pb) = (pts[x], pts[y]);
        let c = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let r = 0.5 * dist(pa, pb);
        seg_grid.insert_box(id, [c[0] - r, c[1] - r], [c[0] + r, c[1] + r]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_single_junction, JunctionParams};

    #[test]
    fn unit_square() {
        let d = PlanarDomain::rectangle(0.0, 0.0, 1.0, 1.0, RegionTag::BulkFine);
        let m = triangulate_domain(&d, &MeshOptions::new(0.1, 0.1)).unwrap();
        m.validate().unwrap();
        let q = m.quality_report();
        assert!(q.min_angle_deg >= 20.0, "{q}");
        assert!((m.total_area() - 1.0).abs() < 1e-8);
        assert!(q.triangles > 100 && q.triangles < 400, "{q}");
        assert!(q.region(RegionTag::BulkFine).unwrap().p95 <= 0.15, "{q}");
    }

    #[test]
    fn junction_mesh_quality_and_grading() {
        let g = build_single_junction(&JunctionParams {
            s_over_d: 0.4,
            fine_margin_over_d: 0.2,
            ..JunctionParams::single(0.5, 0.5)
        })
        .unwrap();
        let m = triangulate(&g, &MeshOptions::new(0.04, 0.32)).unwrap();
        m.validate().unwrap();
        let q = m.quality_report();
        assert!(q.min_angle_deg >= 20.0, "{q}");
        assert!((m.total_area() - g.expected_area()).abs() < 1e-8 * g.expected_area());
        let fine = q.region(RegionTag::BulkFine).unwrap();
        let coarse = q.region(RegionTag::BulkCoarse).unwrap();
        assert!(coarse.p50 > fine.p50);
        assert!(fine.p95 <= 1.5 * 0.04, "{q}");
        for (e, tag) in m.regions.iter().enumerate() {
            for p in m.coords(e) {
                let inside = g
                    .regions_with(*tag)
                    .any(|r| r.distance(p) < 1e-9);
                assert!(inside);
            }
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let g = build_single_junction(&JunctionParams::single(0.5, 0.5)).unwrap();
        let o = MeshOptions::new(0.08, 0.32).with_seed(7);
        let a = triangulate(&g, &o).unwrap();
        let b = triangulate(&g, &o).unwrap();
        assert_eq!(a, b);
    }
}
