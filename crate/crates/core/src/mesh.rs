//! Conforming triangulations of polygonal domains.
//!
//! Every edge carries one fixed unit normal `n_e`: the clockwise rotation of the
//! unit vector running from its lower-index vertex to its higher-index vertex.
//! Each triangle stores, per side, the sign `σ = n_e · n_K` relating that fixed
//! normal to its own outward normal.
//!
//! Local side `i` of a triangle is the side opposite local vertex `i`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// `self + t (other - self)`.
    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }
}

#[derive(Clone, Debug)]
pub struct Triangle {
    /// Counter-clockwise vertex indices.
    pub vertices: [usize; 3],
    /// `edges[i]` is the side opposite `vertices[i]`.
    pub edges: [usize; 3],
    /// `signs[i] = n_e · n_K` for side `i`, either `+1.0` or `-1.0`.
    pub signs: [f64; 3],
    /// Longest side length.
    pub diameter: f64,
    pub area: f64,
}

#[derive(Clone, Debug)]
pub struct Edge {
    /// `[lo, hi]` with `lo < hi`.
    pub vertices: [usize; 2],
    /// Fixed unit normal of this edge.
    pub normal: [f64; 2],
    /// Triangle for which `normal` is outward.
    pub left: Option<usize>,
    /// Triangle for which `normal` is inward.
    pub right: Option<usize>,
    pub is_boundary: bool,
    pub length: f64,
}

impl Edge {
    /// Adjacent triangles with the side sign each one sees.
    pub fn neighbors(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.left
            .map(|t| (t, 1.0))
            .into_iter()
            .chain(self.right.map(|t| (t, -1.0)))
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    /// Largest element diameter.
    pub h: f64,
}

fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

impl Mesh {
    /// Builds a mesh from vertex coordinates and triangle connectivity.
    ///
    /// Clockwise triangles are reoriented. Degenerate triangles, out-of-range
    /// indices and sides shared by more than two triangles (or twice from the
    /// same side) are rejected.
    pub fn new(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Mesh> {
        if triangles.is_empty() {
            return Err(Error::Structure("mesh has no triangles".into()));
        }
        if let Some(p) = vertices.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Structure(format!("non-finite vertex {p:?}")));
        }
        let mut tris = Vec::with_capacity(triangles.len());
        for (t, &tri) in triangles.iter().enumerate() {
            let mut v = tri;
            if v.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::Structure(format!(
                    "triangle {t} references a vertex out of range"
                )));
            }
            if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
                return Err(Error::Structure(format!("triangle {t} repeats a vertex")));
            }
            let mut area = signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
            if area < 0.0 {
                v.swap(1, 2);
                area = -area;
            }
            let diameter = (0..3)
                .map(|i| vertices[v[i]].dist(vertices[v[(i + 1) % 3]]))
                .fold(0.0, f64::max);
            if area <= 1e-14 * diameter * diameter {
                return Err(Error::Structure(format!("triangle {t} is degenerate")));
            }
            tris.push(Triangle {
                vertices: v,
                edges: [usize::MAX; 3],
                signs: [0.0; 3],
                diameter,
                area,
            });
        }
        let edges = build_edges(&vertices, &mut tris)?;
        let h = tris.iter().map(|t| t.diameter).fold(0.0, f64::max);
        Ok(Mesh {
            vertices,
            triangles: tris,
            edges,
            h,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn tri_points(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].vertices.map(|v| self.vertices[v])
    }

    /// Endpoints of local side `side` of triangle `t`, in counter-clockwise order.
    pub fn side_points(&self, t: usize, side: usize) -> (Point2, Point2) {
        let p = self.tri_points(t);
        (p[(side + 1) % 3], p[(side + 2) % 3])
    }

    /// Outward unit normal of triangle `t` on local side `side`.
    pub fn outward_normal(&self, t: usize, side: usize) -> [f64; 2] {
        let tri = &self.triangles[t];
        let n = self.edges[tri.edges[side]].normal;
        [tri.signs[side] * n[0], tri.signs[side] * n[1]]
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let p = self.tri_points(t);
        Point2::new(
            (p[0].x + p[1].x + p[2].x) / 3.0,
            (p[0].y + p[1].y + p[2].y) / 3.0,
        )
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = f64::INFINITY;
        for t in 0..self.n_triangles() {
            let p = self.tri_points(t);
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = (b.x - a.x, b.y - a.y);
                let v = (c.x - a.x, c.y - a.y);
                let cos = (u.0 * v.0 + u.1 * v.1) / (u.0.hypot(u.1) * v.0.hypot(v.1));
                best = best.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        best
    }

    /// Splits each triangle into four congruent children through its edge midpoints.
    pub fn refine_uniform(&self) -> Mesh {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| {
            self.vertices[e.vertices[0]].midpoint(self.vertices[e.vertices[1]])
        }));
        let mut tris = Vec::with_capacity(4 * self.triangles.len());
        for tri in &self.triangles {
            let [a, b, c] = tri.vertices;
            // midpoint opposite vertex i
            let [ma, mb, mc] = tri.edges.map(|e| nv + e);
            tris.push([a, mc, mb]);
            tris.push([mc, b, ma]);
            tris.push([mb, ma, c]);
            tris.push([ma, mb, mc]);
        }
        Mesh::new(vertices, tris).expect("refinement of a valid mesh is valid")
    }

    /// Parses the `V T` / vertices / triangles text format.
    pub fn parse(text: &str) -> Result<Mesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        fn fields<T: std::str::FromStr>(line: usize, s: &str, n: usize) -> Result<Vec<T>> {
            let out: Vec<T> = s
                .split_whitespace()
                .map(|w| {
                    w.parse::<T>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("cannot parse `{w}`"),
                    })
                })
                .collect::<Result<_>>()?;
            if out.len() != n {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {n} fields, found {}", out.len()),
                });
            }
            Ok(out)
        }

        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `V T` header".into(),
        })?;
        let counts: Vec<usize> = fields(hl, header, 2)?;
        let (nv, nt) = (counts[0], counts[1]);
        let mut last_line = hl;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or(Error::Parse {
                line: last_line + 1,
                msg: format!("expected {nv} vertex lines"),
            })?;
            last_line = ln;
            let xy: Vec<f64> = fields(ln, l, 2)?;
            if !xy[0].is_finite() || !xy[1].is_finite() {
                return Err(Error::Parse {
                    line: ln,
                    msg: "non-finite coordinate".into(),
                });
            }
            vertices.push(Point2::new(xy[0], xy[1]));
        }
        let mut tris = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = lines.next().ok_or(Error::Parse {
                line: last_line + 1,
                msg: format!("expected {nt} triangle lines"),
            })?;
            last_line = ln;
            let ijk: Vec<usize> = fields(ln, l, 3)?;
            if let Some(&bad) = ijk.iter().find(|&&i| i >= nv) {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("vertex index {bad} out of range (V = {nv})"),
                });
            }
            tris.push([ijk[0], ijk[1], ijk[2]]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln,
                msg: "trailing content after triangle list".into(),
            });
        }
        Mesh::new(vertices, tris)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n_vertices(), self.n_triangles());
        for p in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t.vertices[0], t.vertices[1], t.vertices[2]);
        }
        s
    }
}

/// Structured mesh of the unit square: `n × n` cells, each split
/// along its lower-left to upper-right diagonal into two triangles.
pub fn structured_unit_square(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Config("structured mesh needs n >= 1".into()));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    Mesh::new(vertices, tris)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    Mesh::parse(&text)
}

fn build_edges(vertices: &[Point2], tris: &mut [Triangle]) -> Result<Vec<Edge>> {
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * tris.len() / 2 + 3);
    let mut edges: Vec<Edge> = Vec::with_capacity(3 * tris.len() / 2 + 3);
    for (t, tri) in tris.iter_mut().enumerate() {
        for side in 0..3 {
            let a = tri.vertices[(side + 1) % 3];
            let b = tri.vertices[(side + 2) % 3];
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            // CCW traversal a -> b keeps the triangle on the left; n_e is outward
            // for it exactly when a is the lower index.
            let outward = a == lo;
            let id = *lookup.entry((lo, hi)).or_insert_with(|| {
                let (p, q) = (vertices[lo], vertices[hi]);
                let length = p.dist(q);
                let (dx, dy) = ((q.x - p.x) / length, (q.y - p.y) / length);
                edges.push(Edge {
                    vertices: [lo, hi],
                    normal: [dy, -dx],
                    left: None,
                    right: None,
                    is_boundary: true,
                    length,
                });
                edges.len() - 1
            });
            let e = &mut edges[id];
            let slot = if outward { &mut e.left } else { &mut e.right };
            if slot.is_some() {
                return Err(Error::Structure(format!(
                    "side ({lo}, {hi}) is claimed twice from the same side (duplicate or overlapping triangles)"
                )));
            }
            *slot = Some(t);
            tri.edges[side] = id;
            tri.signs[side] = if outward { 1.0 } else { -1.0 };
        }
    }
    for e in &mut edges {
        e.is_boundary = e.left.is_none() || e.right.is_none();
    }
    Ok(edges)
}
