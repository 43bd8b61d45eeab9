use crate::error::{invalid, Result};
use crate::geometry::{BoundaryTag, Point, RegionTag};

use super::Mesh;

/// Structured triangulation of an axis-aligned rectangle.
#[derive(Clone, Copy, Debug)]
pub struct RectangleMesh {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    /// Alternate the cell diagonal in a chequerboard ("union jack") pattern.
    pub alternate: bool,
}

impl RectangleMesh {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Self {
        RectangleMesh {
            x0,
            y0,
            x1,
            y1,
            nx,
            ny,
            alternate: false,
        }
    }

    pub fn alternating(mut self) -> Self {
        self.alternate = true;
        self
    }

    /// Builds the mesh, tagging each triangle by its centroid.
    pub fn build_with(&self, region: impl Fn(Point) -> RegionTag) -> Result<Mesh> {
        if self.nx == 0 || self.ny == 0 {
            return Err(invalid("nx/ny", "need at least one cell per direction"));
        }
        if !(self.x1 > self.x0 && self.y1 > self.y0) {
            return Err(invalid("rectangle", "empty extent"));
        }
        let (nx, ny) = (self.nx, self.ny);
        let hx = (self.x1 - self.x0) / nx as f64;
        let hy = (self.y1 - self.y0) / ny as f64;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let x = if i == nx { self.x1 } else { self.x0 + i as f64 * hx };
                let y = if j == ny { self.y1 } else { self.y0 + j as f64 * hy };
                nodes.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if self.alternate && (i + j) % 2 == 1 {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                } else {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
            }
        }
        let regions = triangles
            .iter()
            .map(|t: &[usize; 3]| {
                let c = [
                    (nodes[t[0]][0] + nodes[t[1]][0] + nodes[t[2]][0]) / 3.0,
                    (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) / 3.0,
                ];
                region(c)
            })
            .collect();
        let (y0, y1) = (self.y0, self.y1);
        let h = hx.min(hy);
        Mesh::from_parts(nodes, triangles, regions, h, h, move |a, b| {
            if a[1] == y1 && b[1] == y1 {
                BoundaryTag::Top
            } else if a[1] == y0 && b[1] == y0 {
                BoundaryTag::Bottom
            } else {
                BoundaryTag::Free
            }
        })
    }

    pub fn build(&self) -> Result<Mesh> {
        self.build_with(|_| RegionTag::BulkFine)
    }
}

/// Uniformly damageable rectangle with `nx × ny` cells.
pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh> {
    RectangleMesh::new(x0, y0, x1, y1, nx, ny).build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_area() {
        let m = rectangle(0.0, 0.0, 2.0, 1.0, 4, 3).unwrap();
        assert_eq!(m.num_nodes(), 20);
        assert_eq!(m.num_triangles(), 24);
        assert!((m.total_area() - 2.0).abs() < 1e-14);
        assert_eq!(m.boundary_edges.len(), 2 * (4 + 3));
        m.validate().unwrap();
    }

    #[test]
    fn alternating_pattern_is_valid() {
        let m = RectangleMesh::new(0.0, 0.0, 1.0, 1.0, 5, 5)
            .alternating()
            .build()
            .unwrap();
        m.validate().unwrap();
        assert!((m.min_angle(0) - 45.0).abs() < 1e-9);
    }
}
