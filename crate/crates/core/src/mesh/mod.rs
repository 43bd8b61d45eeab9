//! Triangular meshes with region and boundary tags.

mod structured;
mod triangulate;

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryTag, Point, RegionTag};

pub use structured::{rectangle, RectangleMesh};
pub use triangulate::{triangulate, triangulate_domain, MeshOptions, PlanarDomain};

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Counter-clockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<RegionTag>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub delta_fine: f64,
    pub delta_coarse: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Size and shape statistics of a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    pub nodes: usize,
    pub triangles: usize,
    pub min_angle_deg: f64,
    pub regions: Vec<RegionSizes>,
}

/// Circumdiameter percentiles of the triangles of one region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionSizes {
    pub tag: RegionTag,
    pub count: usize,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

impl QualityReport {
    pub fn region(&self, tag: RegionTag) -> Option<&RegionSizes> {
        self.regions.iter().find(|r| r.tag == tag)
    }
}

impl std::fmt::Display for QualityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} nodes, {} triangles, min angle {:.2} deg",
            self.nodes, self.triangles, self.min_angle_deg
        )?;
        for r in &self.regions {
            writeln!(
                f,
                "  region {}: {} triangles, circumdiameter p50 {:.5} p95 {:.5} max {:.5}",
                r.tag.id(),
                r.count,
                r.p50,
                r.p95,
                r.max
            )?;
        }
        Ok(())
    }
}

impl Mesh {
    /// Assembles a mesh from triangles, orienting them counter-clockwise and
    /// deriving the boundary edges with `tagger`.
    pub fn from_parts(
        nodes: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        regions: Vec<RegionTag>,
        delta_fine: f64,
        delta_coarse: f64,
        tagger: impl Fn(Point, Point) -> BoundaryTag,
    ) -> Result<Mesh> {
        for (e, t) in triangles.iter_mut().enumerate() {
            let a = signed_area(&nodes, t);
            if a == 0.0 || !a.is_finite() {
                return Err(Error::DegenerateElement { element: e, area: a });
            }
            if a < 0.0 {
                t.swap(1, 2);
            }
        }
        let boundary_edges = boundary_edges(&triangles)?
            .into_iter()
            .map(|[a, b]| BoundaryEdge {
                nodes: [a, b],
                tag: tagger(nodes[a], nodes[b]),
            })
            .collect();
        Ok(Mesh {
            nodes,
            triangles,
            regions,
            boundary_edges,
            delta_fine,
            delta_coarse,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn coords(&self, e: usize) -> [Point; 3] {
        let t = self.triangles[e];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    pub fn area(&self, e: usize) -> f64 {
        signed_area(&self.nodes, &self.triangles[e])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|e| self.area(e)).sum()
    }

    pub fn centroid(&self, e: usize) -> Point {
        let [a, b, c] = self.coords(e);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn circumdiameter(&self, e: usize) -> f64 {
        let [a, b, c] = self.coords(e);
        let la = dist(b, c);
        let lb = dist(a, c);
        let lc = dist(a, b);
        la * lb * lc / (2.0 * self.area(e))
    }

    /// Interior angles in degrees.
    pub fn angles(&self, e: usize) -> [f64; 3] {
        triangle_angles(self.coords(e))
    }

    pub fn min_angle(&self, e: usize) -> f64 {
        let a = self.angles(e);
        a[0].min(a[1]).min(a[2])
    }

    /// Sorted, deduplicated node ids on edges with the given tag.
    pub fn boundary_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Node ids touching at least one undamageable element.
    pub fn undamageable_nodes(&self) -> Vec<bool> {
        let mut fixed = vec![false; self.num_nodes()];
        for (t, r) in self.triangles.iter().zip(&self.regions) {
            if !r.is_damageable() {
                for &n in t {
                    fixed[n] = true;
                }
            }
        }
        fixed
    }

    /// Element neighbours across shared edges.
    pub fn element_adjacency(&self) -> Vec<Vec<usize>> {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * self.num_triangles());
        let mut adj = vec![Vec::with_capacity(3); self.num_triangles()];
        for (e, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(t[k], t[(k + 1) % 3]);
                if let Some(&o) = owner.get(&key) {
                    adj[e].push(o);
                    adj[o].push(e);
                } else {
                    owner.insert(key, e);
                }
            }
        }
        adj
    }

    /// Checks orientation and edge manifoldness.
    pub fn validate(&self) -> Result<()> {
        for e in 0..self.num_triangles() {
            let a = self.area(e);
            if !(a > 0.0) {
                return Err(Error::DegenerateElement { element: e, area: a });
            }
        }
        boundary_edges(&self.triangles)?;
        Ok(())
    }

    pub fn quality_report(&self) -> QualityReport {
        mesh_report(self)
    }

    /// Text form: `nodes N` / `id x y` lines, `triangles M` / `id n1 n2 n3 region`,
    /// `edges K` / `id n1 n2 tag`, preceded by a size line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# triangle mesh v1");
        let _ = writeln!(s, "sizes {:.16e} {:.16e}", self.delta_fine, self.delta_coarse);
        let _ = writeln!(s, "nodes {}", self.num_nodes());
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "{i} {:.16e} {:.16e}", p[0], p[1]);
        }
        let _ = writeln!(s, "triangles {}", self.num_triangles());
        for (i, (t, r)) in self.triangles.iter().zip(&self.regions).enumerate() {
            let _ = writeln!(s, "{i} {} {} {} {}", t[0], t[1], t[2], r.id());
        }
        let _ = writeln!(s, "edges {}", self.boundary_edges.len());
        for (i, e) in self.boundary_edges.iter().enumerate() {
            let _ = writeln!(s, "{i} {} {} {}", e.nodes[0], e.nodes[1], e.tag.id());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            })
        };
        let header = |(line, l): (usize, &str), key: &str| -> Result<Vec<String>> {
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `{key}` section"),
                });
            }
            Ok(it.map(str::to_string).collect())
        };
        let num = |line: usize, s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad number `{s}`"),
            })
        };
        let idx = |line: usize, s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad index `{s}`"),
            })
        };
        let fields = |line: usize, l: &str, n: usize| -> Result<Vec<String>> {
            let v: Vec<String> = l.split_whitespace().map(str::to_string).collect();
            if v.len() != n {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {n} fields, found {}", v.len()),
                });
            }
            Ok(v)
        };

        let first = next("sizes")?;
        let sizes = header(first, "sizes")?;
        if sizes.len() != 2 {
            return Err(Error::Parse {
                line: first.0,
                message: "expected two sizes".into(),
            });
        }
        let delta_fine = num(first.0, &sizes[0])?;
        let delta_coarse = num(first.0, &sizes[1])?;

        let h = next("nodes")?;
        let n = idx(h.0, header(h, "nodes")?.first().map(String::as_str).unwrap_or(""))?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, l) = next("node")?;
            let f = fields(line, l, 3)?;
            nodes.push([num(line, &f[1])?, num(line, &f[2])?]);
        }

        let h = next("triangles")?;
        let m = idx(h.0, header(h, "triangles")?.first().map(String::as_str).unwrap_or(""))?;
        let mut triangles = Vec::with_capacity(m);
        let mut regions = Vec::with_capacity(m);
        for _ in 0..m {
            let (line, l) = next("triangle")?;
            let f = fields(line, l, 5)?;
            let t = [idx(line, &f[1])?, idx(line, &f[2])?, idx(line, &f[3])?];
            if t.iter().any(|&v| v >= n) {
                return Err(Error::Parse {
                    line,
                    message: "node index out of range".into(),
                });
            }
            triangles.push(t);
            let r = idx(line, &f[4])?;
            regions.push(
                u8::try_from(r)
                    .ok()
                    .and_then(RegionTag::from_id)
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("unknown region {r}"),
                    })?,
            );
        }

        let h = next("edges")?;
        let k = idx(h.0, header(h, "edges")?.first().map(String::as_str).unwrap_or(""))?;
        let mut boundary_edges = Vec::with_capacity(k);
        for _ in 0..k {
            let (line, l) = next("edge")?;
            let f = fields(line, l, 4)?;
            let a = idx(line, &f[1])?;
            let b = idx(line, &f[2])?;
            let t = idx(line, &f[3])?;
            if a >= n || b >= n {
                return Err(Error::Parse {
                    line,
                    message: "node index out of range".into(),
                });
            }
            let tag = u8::try_from(t)
                .ok()
                .and_then(BoundaryTag::from_id)
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("unknown boundary tag {t}"),
                })?;
            boundary_edges.push(BoundaryEdge { nodes: [a, b], tag });
        }
        let mesh = Mesh {
            nodes,
            triangles,
            regions,
            boundary_edges,
            delta_fine,
            delta_coarse,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

pub fn mesh_report(mesh: &Mesh) -> QualityReport {
    let mut by_region: HashMap<RegionTag, Vec<f64>> = HashMap::new();
    let mut min_angle = f64::INFINITY;
    for e in 0..mesh.num_triangles() {
        by_region
            .entry(mesh.regions[e])
            .or_default()
            .push(mesh.circumdiameter(e));
        min_angle = min_angle.min(mesh.min_angle(e));
    }
    let mut regions: Vec<RegionSizes> = by_region
        .into_iter()
        .map(|(tag, mut v)| {
            v.sort_by(f64::total_cmp);
            RegionSizes {
                tag,
                count: v.len(),
                p50: percentile(&v, 0.5),
                p95: percentile(&v, 0.95),
                max: *v.last().unwrap_or(&0.0),
            }
        })
        .collect();
    regions.sort_by_key(|r| r.tag);
    QualityReport {
        nodes: mesh.num_nodes(),
        triangles: mesh.num_triangles(),
        min_angle_deg: min_angle,
        regions,
    }
}

/// Nearest-rank percentile of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub(crate) fn signed_area(nodes: &[Point], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub(crate) fn triangle_angles(p: [Point; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let a = p[k];
        let b = p[(k + 1) % 3];
        let c = p[(k + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cross = u[0] * v[1] - u[1] * v[0];
        let dot = u[0] * v[0] + u[1] * v[1];
        out[k] = cross.abs().atan2(dot).to_degrees();
    }
    out
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Edges used by exactly one triangle, oriented as in that triangle.
fn boundary_edges(triangles: &[[usize; 3]]) -> Result<Vec<[usize; 2]>> {
    let mut count: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::with_capacity(3 * triangles.len());
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            count.entry(edge_key(a, b)).or_insert((0, [a, b])).0 += 1;
        }
    }
    let mut out = Vec::new();
    for (key, (c, e)) in count {
        match c {
            1 => out.push(e),
            2 => {}
            _ => {
                return Err(Error::Geometry(format!(
                    "edge {}-{} shared by {c} triangles",
                    key.0, key.1
                )))
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}
