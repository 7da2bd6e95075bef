//! Degrees of freedom of the weak Galerkin space.
//!
//! A discrete function is a pair `{v₀, vₙ n_e}`: `v₀` is continuous piecewise
//! `P_{k+2}` (Lagrange nodal values, numbered first) and `vₙ` is one
//! `P_{k+1}` polynomial per edge stored as coefficients in the edge's
//! orthonormal basis (numbered after all cell unknowns, `k+2` per edge).

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point2};
use crate::polybasis::{
    edge_quadrature, poly_dim, triangle_quadrature, EdgeBasis, EdgeRule, ScaledMonomials, Table,
    TriangleRule,
};

/// Polynomial degrees `k` supported by [`DofMap::new`].
pub const SUPPORTED_K: [usize; 2] = [0, 1];

/// Equispaced barycentric lattice of degree `p` on `points`.
///
/// Multi-indices `(α₀, α₁, α₂)` with `Σα = p`, listed with `α₂` outermost and
/// `α₁` inner; node `α` sits at `Σ αᵢ vᵢ / p`.
pub fn lattice(p: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(poly_dim(p));
    for a2 in 0..=p {
        for a1 in 0..=(p - a2) {
            out.push([p - a1 - a2, a1, a2]);
        }
    }
    out
}

pub fn lagrange_nodes(points: &[Point2; 3], p: usize) -> Vec<Point2> {
    let pf = p as f64;
    lattice(p)
        .into_iter()
        .map(|a| {
            let w = a.map(|ai| ai as f64 / pf);
            Point2::new(
                w[0] * points[0].x + w[1] * points[1].x + w[2] * points[2].x,
                w[0] * points[0].y + w[1] * points[1].y + w[2] * points[2].y,
            )
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub k: usize,
    /// `k + 2`.
    pub cell_degree: usize,
    /// `k + 1`.
    pub edge_degree: usize,
    pub n_cell: usize,
    pub n_total: usize,
    /// Coordinates of every global Lagrange node.
    pub cell_nodes: Vec<Point2>,
    /// Per triangle, global cell-DOF ids in [`lattice`] order.
    pub element_cell_dofs: Vec<Vec<usize>>,
    /// Lagrange nodes lying on the domain boundary.
    pub boundary_cell: Vec<bool>,
    n_edges: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, k: usize) -> Result<DofMap> {
        if !SUPPORTED_K.contains(&k) {
            return Err(Error::Capability(format!("k = {k} (supported: 0, 1)")));
        }
        let p = k + 2;
        let nv = mesh.n_vertices();
        let ne = mesh.n_edges();
        let per_edge = p - 1;
        let per_tri = poly_dim(p) - 3 - 3 * per_edge;
        let n_cell = nv + ne * per_edge + mesh.n_triangles() * per_tri;

        let mut cell_nodes = vec![Point2::default(); n_cell];
        let mut boundary_cell = vec![false; n_cell];
        cell_nodes[..nv].copy_from_slice(&mesh.vertices);
        for (id, e) in mesh.edges.iter().enumerate() {
            let (a, b) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
            for r in 1..p {
                let g = nv + id * per_edge + (r - 1);
                cell_nodes[g] = a.lerp(b, r as f64 / p as f64);
                boundary_cell[g] = e.is_boundary;
            }
            if e.is_boundary {
                boundary_cell[e.vertices[0]] = true;
                boundary_cell[e.vertices[1]] = true;
            }
        }

        let lat = lattice(p);
        let mut element_cell_dofs = Vec::with_capacity(mesh.n_triangles());
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let nodes = lagrange_nodes(&mesh.tri_points(t), p);
            let mut interior = 0;
            let mut dofs = Vec::with_capacity(lat.len());
            for (alpha, node) in lat.iter().zip(&nodes) {
                let zeros: Vec<usize> = (0..3).filter(|&i| alpha[i] == 0).collect();
                let g = match zeros.len() {
                    2 => tri.vertices[(0..3).find(|&i| alpha[i] == p).unwrap()],
                    1 => {
                        let s = zeros[0];
                        let (a, b) = ((s + 1) % 3, (s + 2) % 3);
                        let e = &mesh.edges[tri.edges[s]];
                        let r = if tri.vertices[a] == e.vertices[0] { alpha[b] } else { alpha[a] };
                        nv + tri.edges[s] * per_edge + (r - 1)
                    }
                    _ => {
                        let g = nv + ne * per_edge + t * per_tri + interior;
                        interior += 1;
                        cell_nodes[g] = *node;
                        g
                    }
                };
                dofs.push(g);
            }
            element_cell_dofs.push(dofs);
        }

        let n_total = n_cell + ne * (k + 2);
        Ok(DofMap {
            k,
            cell_degree: p,
            edge_degree: k + 1,
            n_cell,
            n_total,
            cell_nodes,
            element_cell_dofs,
            boundary_cell,
            n_edges: ne,
        })
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn edge_dofs_per_edge(&self) -> usize {
        self.k + 2
    }

    /// Global ids of the `k+2` coefficients of `vₙ` on edge `e`.
    pub fn edge_dofs(&self, e: usize) -> Range<usize> {
        let start = self.n_cell + e * self.edge_dofs_per_edge();
        start..start + self.edge_dofs_per_edge()
    }

    pub fn n_local_cell(&self) -> usize {
        poly_dim(self.cell_degree)
    }

    /// Local WG unknowns per element: Lagrange values then three sides' edge coefficients.
    pub fn n_local(&self) -> usize {
        self.n_local_cell() + 3 * self.edge_dofs_per_edge()
    }

    /// Global ids of the local WG unknowns of triangle `t`, in local order.
    pub fn element_dofs(&self, mesh: &Mesh, t: usize) -> Vec<usize> {
        let mut out = self.element_cell_dofs[t].clone();
        for &e in &mesh.triangles[t].edges {
            out.extend(self.edge_dofs(e));
        }
        out
    }

    /// Mask of DOFs fixed by boundary data: boundary Lagrange nodes and all
    /// coefficients of boundary edges.
    pub fn constrained(&self, mesh: &Mesh) -> Vec<bool> {
        let mut mask = vec![false; self.n_total];
        mask[..self.n_cell].copy_from_slice(&self.boundary_cell);
        for (id, e) in mesh.edges.iter().enumerate() {
            if e.is_boundary {
                for g in self.edge_dofs(id) {
                    mask[g] = true;
                }
            }
        }
        mask
    }

    /// Cell-only mask (for methods posed on the Lagrange space alone).
    pub fn constrained_cell_only(&self) -> Vec<bool> {
        self.boundary_cell.clone()
    }
}

/// Indices of DOFs constrained in `V_h⁰`.
pub fn restrict_to_v0(mesh: &Mesh, dm: &DofMap) -> Vec<usize> {
    dm.constrained(mesh)
        .iter()
        .enumerate()
        .filter_map(|(i, &c)| c.then_some(i))
        .collect()
}

/// Coefficient vector of a discrete function, indexed by a [`DofMap`].
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVector {
    pub values: Vec<f64>,
}

impl FieldVector {
    pub fn zeros(dm: &DofMap) -> Self {
        Self {
            values: vec![0.0; dm.n_total],
        }
    }

    pub fn from_values(dm: &DofMap, values: Vec<f64>) -> Result<Self> {
        if values.len() != dm.n_total {
            return Err(Error::Dimension(format!(
                "field of length {} for a DOF map of size {}",
                values.len(),
                dm.n_total
            )));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn gather(&self, dofs: &[usize]) -> Vec<f64> {
        dofs.iter().map(|&g| self.values[g]).collect()
    }
}

/// Lagrange shape functions of degree `p` on one triangle, stored as scaled
/// monomial coefficients.
#[derive(Clone, Debug)]
pub struct LagrangeShapes {
    pub degree: usize,
    monomials: ScaledMonomials,
    coeffs: DMatrix<f64>,
}

impl LagrangeShapes {
    pub fn new(points: &[Point2; 3], p: usize) -> Result<Self> {
        let center = Point2::new(
            (points[0].x + points[1].x + points[2].x) / 3.0,
            (points[0].y + points[1].y + points[2].y) / 3.0,
        );
        let h = (0..3)
            .map(|i| points[i].dist(points[(i + 1) % 3]))
            .fold(0.0, f64::max);
        let monomials = ScaledMonomials::new(p, center, h);
        let nodes = lagrange_nodes(points, p);
        let vander = monomials.eval(&nodes, 0).val;
        let coeffs = vander
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::Conditioning("singular Lagrange Vandermonde matrix".into()))?;
        Ok(Self {
            degree: p,
            monomials,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn eval(&self, points: &[Point2], order: usize) -> Table {
        self.monomials.eval(points, order).combine(&self.coeffs)
    }
}

/// Quadrature rules sized for degree `k`: volume exact to `2(k+3)+2`, edges
/// with `k+5` Gauss points.
#[derive(Clone, Debug)]
pub struct Quadratures {
    pub volume: TriangleRule,
    pub edge: EdgeRule,
}

impl Quadratures {
    pub fn for_degree(k: usize) -> Result<Self> {
        Ok(Self {
            volume: triangle_quadrature(2 * (k + 3) + 2)?,
            edge: edge_quadrature(k + 5)?,
        })
    }
}

/// Tabulated data for one side of an element.
#[derive(Clone, Debug)]
pub struct SideData {
    pub edge: usize,
    /// `n_e · n_K`.
    pub sign: f64,
    /// Fixed edge normal `n_e`.
    pub normal: [f64; 2],
    pub length: f64,
    pub is_boundary: bool,
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    /// Lagrange shapes (up to second derivatives) at `points`.
    pub shapes: Table,
    /// Edge basis values, `npoints × (k+2)`.
    pub edge_basis: DMatrix<f64>,
}

/// Everything the local kernels need about one triangle.
#[derive(Clone, Debug)]
pub struct LocalElement {
    pub index: usize,
    pub vertices: [Point2; 3],
    pub diameter: f64,
    pub area: f64,
    pub shapes: LagrangeShapes,
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    /// Lagrange shapes (up to second derivatives) at the volume points.
    pub vol_shapes: Table,
    pub sides: [SideData; 3],
}

impl LocalElement {
    pub fn new(mesh: &Mesh, dm: &DofMap, quad: &Quadratures, t: usize) -> Result<Self> {
        let tri = &mesh.triangles[t];
        let vertices = mesh.tri_points(t);
        let shapes = LagrangeShapes::new(&vertices, dm.cell_degree)?;
        let (points, weights) = quad.volume.mapped(&vertices);
        let vol_shapes = shapes.eval(&points, 2);
        let side = |s: usize| -> SideData {
            let e = &mesh.edges[tri.edges[s]];
            let (a, b) = mesh.side_points(t, s);
            let (pts, w) = quad.edge.mapped(a, b);
            let a_is_lo = tri.vertices[(s + 1) % 3] == e.vertices[0];
            let basis = EdgeBasis::new(dm.edge_degree, e.length);
            let mut eb = DMatrix::zeros(pts.len(), basis.dim());
            for (q, &tau) in quad.edge.points.iter().enumerate() {
                let param = if a_is_lo { tau } else { 1.0 - tau };
                for (l, v) in basis.values(param).into_iter().enumerate() {
                    eb[(q, l)] = v;
                }
            }
            SideData {
                edge: tri.edges[s],
                sign: tri.signs[s],
                normal: e.normal,
                length: e.length,
                is_boundary: e.is_boundary,
                shapes: shapes.eval(&pts, 2),
                points: pts,
                weights: w,
                edge_basis: eb,
            }
        };
        let sides = [side(0), side(1), side(2)];
        Ok(Self {
            index: t,
            vertices,
            diameter: tri.diameter,
            area: tri.area,
            shapes,
            points,
            weights,
            vol_shapes,
            sides,
        })
    }

    pub fn n_cell(&self) -> usize {
        self.shapes.dim()
    }

    /// Offset of side `s`'s edge coefficients inside the local DOF vector.
    pub fn side_offset(&self, s: usize) -> usize {
        self.n_cell() + s * self.sides[0].edge_basis.ncols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_unit_square;

    #[test]
    fn counts_k0_two_triangles() {
        let m = structured_unit_square(1).unwrap();
        let dm = DofMap::new(&m, 0).unwrap();
        assert_eq!(dm.n_cell, 9);
        assert_eq!(dm.n_total - dm.n_cell, 10);
        assert_eq!(dm.n_total, 19);
        let fixed = restrict_to_v0(&m, &dm);
        assert_eq!(fixed.iter().filter(|&&g| g < dm.n_cell).count(), 8);
        assert_eq!(fixed.iter().filter(|&&g| g >= dm.n_cell).count(), 8);
        assert_eq!(dm.n_total - fixed.len(), 3);
    }

    #[test]
    fn counts_k1_one_triangle() {
        let m = Mesh::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let dm = DofMap::new(&m, 1).unwrap();
        assert_eq!(dm.n_cell, 10);
        assert_eq!(dm.n_total, 19);
        assert!(DofMap::new(&m, 2).is_err());
    }

    #[test]
    fn counts_independent_of_vertex_order() {
        let a = Mesh::parse("4 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n").unwrap();
        let b = Mesh::parse("4 2\n1 1\n0 1\n0 0\n1 0\n2 3 0\n2 0 1\n").unwrap();
        for k in SUPPORTED_K {
            let (da, db) = (DofMap::new(&a, k).unwrap(), DofMap::new(&b, k).unwrap());
            assert_eq!((da.n_cell, da.n_total), (db.n_cell, db.n_total));
        }
    }

    #[test]
    fn lattice_sizes() {
        let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let n2 = lagrange_nodes(&tri, 2);
        assert_eq!(n2.len(), 6);
        assert!(n2.contains(&Point2::new(0.5, 0.5)));
        assert_eq!(lagrange_nodes(&tri, 3).len(), 10);
    }

    #[test]
    fn shared_sides_map_to_same_coordinates() {
        let m = structured_unit_square(3).unwrap().refine_uniform();
        for k in SUPPORTED_K {
            let dm = DofMap::new(&m, k).unwrap();
            for t in 0..m.n_triangles() {
                let nodes = lagrange_nodes(&m.tri_points(t), dm.cell_degree);
                for (node, &g) in nodes.iter().zip(&dm.element_cell_dofs[t]) {
                    assert!(node.dist(dm.cell_nodes[g]) < 1e-14);
                }
            }
            let mut touched = vec![false; dm.n_total];
            for t in 0..m.n_triangles() {
                for g in dm.element_dofs(&m, t) {
                    touched[g] = true;
                }
            }
            assert!(touched.iter().all(|&b| b));
        }
    }

    #[test]
    fn boundary_mask_matches_geometry() {
        let m = structured_unit_square(2).unwrap().refine_uniform();
        let dm = DofMap::new(&m, 1).unwrap();
        for (g, p) in dm.cell_nodes.iter().enumerate() {
            let on = p.x.abs() < 1e-14 || p.y.abs() < 1e-14 || (p.x - 1.0).abs() < 1e-14 || (p.y - 1.0).abs() < 1e-14;
            assert_eq!(on, dm.boundary_cell[g]);
        }
        let mask = dm.constrained(&m);
        for (id, e) in m.edges.iter().enumerate() {
            for g in dm.edge_dofs(id) {
                assert_eq!(mask[g], e.is_boundary);
            }
        }
        let coarse = DofMap::new(&structured_unit_square(2).unwrap(), 1).unwrap();
        let mc = structured_unit_square(2).unwrap();
        let fixed_c = restrict_to_v0(&mc, &coarse).len();
        let fixed_f = restrict_to_v0(&m, &dm).len();
        assert!(fixed_f > fixed_c);
        assert!(dm.n_total > fixed_f);
    }

    #[test]
    fn lagrange_shapes_are_nodal() {
        let tri = [Point2::new(0.1, 0.0), Point2::new(1.0, 0.3), Point2::new(0.2, 0.8)];
        for p in [2, 3] {
            let s = LagrangeShapes::new(&tri, p).unwrap();
            let nodes = lagrange_nodes(&tri, p);
            let t = s.eval(&nodes, 0);
            assert!((t.val - DMatrix::<f64>::identity(nodes.len(), nodes.len())).amax() < 1e-12);
        }
    }
}
