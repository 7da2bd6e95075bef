//! Global systems for the three discretizations and boundary-condition elimination.
//!
//! * `SfC0wg`: `(Δ_{w,k+3} u, Δ_{w,k+3} v)`, no stabilization.
//! * `C0wg`: `(Δ_{w,k} u, Δ_{w,k} v) + Σ_K h_K⁻¹ ⟨∂u₀/∂n_e − uₙ, ∂v₀/∂n_e − vₙ⟩_{∂K}`.
//! * `C0ip`: symmetric interior penalty on the Lagrange space alone.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point2};
use crate::polybasis::{EdgeBasis, Table};
use crate::space::{DofMap, LagrangeShapes, LocalElement, Quadratures};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::weaklap::local_weak_laplacian;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    SfC0wg,
    C0wg,
    C0ip,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::SfC0wg, Method::C0wg, Method::C0ip];

    pub fn name(self) -> &'static str {
        match self {
            Method::SfC0wg => "sfc0wg",
            Method::C0wg => "c0wg",
            Method::C0ip => "c0ip",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::SfC0wg => "SF-C0WG",
            Method::C0wg => "C0WG",
            Method::C0ip => "C0IP",
        }
    }

    /// Lift degree of the weak Laplacian (none for C0IP).
    pub fn lift_degree(self, k: usize) -> Option<usize> {
        match self {
            Method::SfC0wg => Some(k + 3),
            Method::C0wg => Some(k),
            Method::C0ip => None,
        }
    }

    pub fn uses_edge_unknowns(self) -> bool {
        self != Method::C0ip
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sfc0wg" | "sf-c0wg" => Ok(Method::SfC0wg),
            "c0wg" => Ok(Method::C0wg),
            "c0ip" => Ok(Method::C0ip),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Default C0IP penalty `10 (k+2)²`.
pub fn default_eta(k: usize) -> f64 {
    10.0 * ((k + 2) * (k + 2)) as f64
}

/// A symmetric linear system, either over all unknowns of a method or
/// reduced to its free unknowns by [`apply_bcs`].
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global id of each row.
    pub free_to_global: Vec<usize>,
    /// Number of global unknowns of the method.
    pub n_global: usize,
    /// Prescribed values of constrained unknowns (zero at free ones).
    pub fixed: Vec<f64>,
    pub method: Method,
    pub k: usize,
    pub eta: Option<f64>,
}

impl SparseSystem {
    pub fn n(&self) -> usize {
        self.matrix.n
    }

    pub fn is_reduced(&self) -> bool {
        self.free_to_global.len() != self.n_global
    }

    /// Scatters free values into a full-length vector carrying the prescribed values.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut full = self.fixed.clone();
        for (&g, &v) in self.free_to_global.iter().zip(free) {
            full[g] = v;
        }
        full
    }
}

type Source<'a> = &'a (dyn Fn(Point2) -> f64 + Sync);

fn check_dofs(mesh: &Mesh, dm: &DofMap) -> Result<()> {
    if dm.element_cell_dofs.len() != mesh.n_triangles() || dm.n_edges() != mesh.n_edges() {
        return Err(Error::Dimension(format!(
            "DOF map built for {} triangles / {} edges, mesh has {} / {}",
            dm.element_cell_dofs.len(),
            dm.n_edges(),
            mesh.n_triangles(),
            mesh.n_edges()
        )));
    }
    Ok(())
}

/// `(f, N_i)_K` for the Lagrange shapes of `el`.
fn element_load(el: &LocalElement, f: Source<'_>) -> Vec<f64> {
    let mut b = vec![0.0; el.n_cell()];
    for (q, p) in el.points.iter().enumerate() {
        let fw = el.weights[q] * f(*p);
        for (i, bi) in b.iter_mut().enumerate() {
            *bi += fw * el.vol_shapes.val[(q, i)];
        }
    }
    b
}

fn wg_system(mesh: &Mesh, dm: &DofMap, f: Source<'_>, method: Method) -> Result<SparseSystem> {
    check_dofs(mesh, dm)?;
    let k = dm.k;
    let quad = Quadratures::for_degree(k)?;
    let nl = dm.n_local();
    let mut trip = TripletBuilder::with_capacity(dm.n_total, mesh.n_triangles() * nl * nl);
    let mut rhs = vec![0.0; dm.n_total];
    let lift = method.lift_degree(k).expect("weak Galerkin method");
    for t in 0..mesh.n_triangles() {
        let el = LocalElement::new(mesh, dm, &quad, t)?;
        let lap = local_weak_laplacian(&el, lift)?;
        let mut a = lap.gram();
        if method == Method::C0wg {
            a += stabilizer_block(&el);
        }
        let dofs = dm.element_dofs(mesh, t);
        trip.add_block(&dofs, &a);
        for (i, bi) in element_load(&el, f).into_iter().enumerate() {
            rhs[dofs[i]] += bi;
        }
    }
    Ok(SparseSystem {
        matrix: trip.build(),
        rhs,
        free_to_global: (0..dm.n_total).collect(),
        n_global: dm.n_total,
        fixed: vec![0.0; dm.n_total],
        method,
        k,
        eta: None,
    })
}

/// Local mismatch `∂v₀/∂n_e − vₙ` on side `s` at quadrature point `q`, as a
/// row over the local DOFs.
pub(crate) fn normal_mismatch_row(el: &LocalElement, s: usize, q: usize) -> DVector<f64> {
    let side = &el.sides[s];
    let nc = el.n_cell();
    let ne = side.edge_basis.ncols();
    let mut d = DVector::zeros(nc + 3 * ne);
    for i in 0..nc {
        d[i] = side.shapes.dx[(q, i)] * side.normal[0] + side.shapes.dy[(q, i)] * side.normal[1];
    }
    let off = el.side_offset(s);
    for l in 0..ne {
        d[off + l] = -side.edge_basis[(q, l)];
    }
    d
}

/// `h_K⁻¹ ⟨∂u₀/∂n_e − uₙ, ∂v₀/∂n_e − vₙ⟩_{∂K}` on one element.
pub fn stabilizer_block(el: &LocalElement) -> DMatrix<f64> {
    let n = el.n_cell() + 3 * el.sides[0].edge_basis.ncols();
    let mut a = DMatrix::zeros(n, n);
    for (s, side) in el.sides.iter().enumerate() {
        for q in 0..side.points.len() {
            let d = normal_mismatch_row(el, s, q);
            a.ger(side.weights[q] / el.diameter, &d, &d, 1.0);
        }
    }
    a
}

pub fn assemble_sfc0wg(mesh: &Mesh, dm: &DofMap, f: Source<'_>) -> Result<SparseSystem> {
    wg_system(mesh, dm, f, Method::SfC0wg)
}

pub fn assemble_c0wg(mesh: &Mesh, dm: &DofMap, f: Source<'_>) -> Result<SparseSystem> {
    wg_system(mesh, dm, f, Method::C0wg)
}

/// Hessian Frobenius product `(D²N_i, D²N_j)` integrated with the element rule.
fn hessian_block(el: &LocalElement) -> DMatrix<f64> {
    let nc = el.n_cell();
    let s = &el.vol_shapes;
    let mut a = DMatrix::zeros(nc, nc);
    for q in 0..el.points.len() {
        let w = el.weights[q];
        for i in 0..nc {
            let (xi, yi, zi) = (s.dxx[(q, i)], s.dxy[(q, i)], s.dyy[(q, i)]);
            for j in 0..nc {
                a[(i, j)] += w * (xi * s.dxx[(q, j)] + 2.0 * yi * s.dxy[(q, j)] + zi * s.dyy[(q, j)]);
            }
        }
    }
    a
}

/// Quadrature points on edge `e`, parametrized from its lower-index vertex.
pub(crate) fn edge_points(mesh: &Mesh, quad: &Quadratures, e: usize) -> (Vec<Point2>, Vec<f64>) {
    let edge = &mesh.edges[e];
    quad.edge
        .mapped(mesh.vertices[edge.vertices[0]], mesh.vertices[edge.vertices[1]])
}

/// Per-point normal-derivative jump and second-normal-derivative average on
/// one edge, as rows over the union of the neighbours' cell DOFs.
pub(crate) struct EdgeJumps {
    pub dofs: Vec<usize>,
    pub weights: Vec<f64>,
    /// `[[∇v]]` per point (rows) and DOF (columns).
    pub jump: DMatrix<f64>,
    /// `{{∂²v/∂n_e²}}` per point and DOF.
    pub avg: DMatrix<f64>,
}

pub(crate) fn edge_jumps(
    mesh: &Mesh,
    dm: &DofMap,
    quad: &Quadratures,
    shapes: &[LagrangeShapes],
    e: usize,
) -> EdgeJumps {
    let edge = &mesh.edges[e];
    let (points, weights) = edge_points(mesh, quad, e);
    let n = edge.normal;
    let neighbors: Vec<(usize, f64)> = edge.neighbors().collect();
    let inv_count = 1.0 / neighbors.len() as f64;
    let mut dofs: Vec<usize> = Vec::new();
    let mut cols: Vec<Vec<usize>> = Vec::new();
    for &(t, _) in &neighbors {
        let mut c = Vec::new();
        for &g in &dm.element_cell_dofs[t] {
            let pos = match dofs.iter().position(|&d| d == g) {
                Some(p) => p,
                None => {
                    dofs.push(g);
                    dofs.len() - 1
                }
            };
            c.push(pos);
        }
        cols.push(c);
    }
    let mut jump = DMatrix::zeros(points.len(), dofs.len());
    let mut avg = DMatrix::zeros(points.len(), dofs.len());
    for ((t, sign), c) in neighbors.iter().zip(&cols) {
        let tab: Table = shapes[*t].eval(&points, 2);
        for q in 0..points.len() {
            for (i, &col) in c.iter().enumerate() {
                jump[(q, col)] += sign * (tab.dx[(q, i)] * n[0] + tab.dy[(q, i)] * n[1]);
                avg[(q, col)] += inv_count
                    * (tab.dxx[(q, i)] * n[0] * n[0]
                        + 2.0 * tab.dxy[(q, i)] * n[0] * n[1]
                        + tab.dyy[(q, i)] * n[1] * n[1]);
            }
        }
    }
    EdgeJumps {
        dofs,
        weights,
        jump,
        avg,
    }
}

pub fn assemble_c0ip(mesh: &Mesh, dm: &DofMap, f: Source<'_>, eta: f64) -> Result<SparseSystem> {
    check_dofs(mesh, dm)?;
    if !(eta > 0.0) {
        return Err(Error::Config(format!("penalty eta must be positive, got {eta}")));
    }
    let k = dm.k;
    let quad = Quadratures::for_degree(k)?;
    let n = dm.n_cell;
    let nc = dm.n_local_cell();
    let mut trip = TripletBuilder::with_capacity(n, mesh.n_triangles() * nc * nc + mesh.n_edges() * 4 * nc * nc);
    let mut rhs = vec![0.0; n];
    let mut shapes = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let el = LocalElement::new(mesh, dm, &quad, t)?;
        let dofs = &dm.element_cell_dofs[t];
        trip.add_block(dofs, &hessian_block(&el));
        for (i, bi) in element_load(&el, f).into_iter().enumerate() {
            rhs[dofs[i]] += bi;
        }
        shapes.push(el.shapes);
    }
    for (e, edge) in mesh.edges.iter().enumerate() {
        let ej = edge_jumps(mesh, dm, &quad, &shapes, e);
        let m = ej.dofs.len();
        let mut a = DMatrix::zeros(m, m);
        let pen = eta / edge.length;
        for q in 0..ej.weights.len() {
            let j = ej.jump.row(q).transpose();
            let v = ej.avg.row(q).transpose();
            let w = ej.weights[q];
            a.ger(-w, &j, &v, 1.0);
            a.ger(-w, &v, &j, 1.0);
            a.ger(w * pen, &j, &j, 1.0);
        }
        trip.add_block(&ej.dofs, &a);
    }
    Ok(SparseSystem {
        matrix: trip.build(),
        rhs,
        free_to_global: (0..n).collect(),
        n_global: n,
        fixed: vec![0.0; n],
        method: Method::C0ip,
        k,
        eta: Some(eta),
    })
}

/// Dispatches to the assembly routine of `method`.
pub fn assemble(method: Method, mesh: &Mesh, dm: &DofMap, f: Source<'_>, eta: Option<f64>) -> Result<SparseSystem> {
    match method {
        Method::SfC0wg => assemble_sfc0wg(mesh, dm, f),
        Method::C0wg => assemble_c0wg(mesh, dm, f),
        Method::C0ip => assemble_c0ip(mesh, dm, f, eta.unwrap_or_else(|| default_eta(dm.k))),
    }
}

/// Dirichlet data `u = g_D` and normal-derivative data `∂u/∂n = g_N` on the
/// boundary; `g_N` receives the boundary point and its outward unit normal.
pub struct BoundaryData<'a> {
    pub g_d: Box<dyn Fn(Point2) -> f64 + Sync + 'a>,
    pub g_n: Box<dyn Fn(Point2, [f64; 2]) -> f64 + Sync + 'a>,
}

impl<'a> BoundaryData<'a> {
    pub fn homogeneous() -> Self {
        Self {
            g_d: Box::new(|_| 0.0),
            g_n: Box::new(|_, _| 0.0),
        }
    }

    /// Traces of a smooth function with value `u` and gradient `grad`.
    pub fn from_function(
        u: impl Fn(Point2) -> f64 + Sync + 'a,
        grad: impl Fn(Point2) -> [f64; 2] + Sync + 'a,
    ) -> Self {
        Self {
            g_d: Box::new(u),
            g_n: Box::new(move |p, n| {
                let g = grad(p);
                g[0] * n[0] + g[1] * n[1]
            }),
        }
    }
}

/// Boundary values of every constrained unknown: Lagrange interpolation of
/// `g_D` at boundary nodes and, for the weak Galerkin methods, the edge
/// `L²`-projection of `g_N` converted to the fixed edge normal.
pub fn boundary_values(mesh: &Mesh, dm: &DofMap, method: Method, bc: &BoundaryData<'_>) -> Result<(Vec<bool>, Vec<f64>)> {
    let n = if method.uses_edge_unknowns() { dm.n_total } else { dm.n_cell };
    let mask = if method.uses_edge_unknowns() {
        dm.constrained(mesh)
    } else {
        dm.constrained_cell_only()
    };
    let mut values = vec![0.0; n];
    for g in 0..dm.n_cell {
        if mask[g] {
            values[g] = (bc.g_d)(dm.cell_nodes[g]);
        }
    }
    if method.uses_edge_unknowns() {
        let quad = Quadratures::for_degree(dm.k)?;
        for (e, edge) in mesh.edges.iter().enumerate() {
            if !edge.is_boundary {
                continue;
            }
            let (_, sign) = edge.neighbors().next().expect("boundary edge has a neighbour");
            let n_out = [sign * edge.normal[0], sign * edge.normal[1]];
            let (pts, w) = edge_points(mesh, &quad, e);
            let basis = EdgeBasis::new(dm.edge_degree, edge.length);
            for (q, &tau) in quad.edge.points.iter().enumerate() {
                let datum = sign * (bc.g_n)(pts[q], n_out);
                for (l, g) in dm.edge_dofs(e).enumerate() {
                    values[g] += w[q] * datum * basis.values(tau)[l];
                }
            }
        }
    }
    Ok((mask, values))
}

/// Imposes boundary data and eliminates constrained unknowns symmetrically.
///
/// For C0IP the normal-derivative datum enters weakly through the boundary
/// consistency and penalty terms.
pub fn apply_bcs(sys: &SparseSystem, mesh: &Mesh, dm: &DofMap, bc: &BoundaryData<'_>) -> Result<SparseSystem> {
    if sys.is_reduced() {
        return Err(Error::Config("boundary conditions already applied".into()));
    }
    let (mask, values) = boundary_values(mesh, dm, sys.method, bc)?;
    if mask.len() != sys.n() {
        return Err(Error::Dimension(format!(
            "system of size {} for {} unknowns",
            sys.n(),
            mask.len()
        )));
    }
    let mut rhs_full = sys.rhs.clone();
    if sys.method == Method::C0ip {
        add_weak_neumann(&mut rhs_full, mesh, dm, sys.eta.unwrap_or_else(|| default_eta(dm.k)), bc)?;
    }

    let mut new_id = vec![usize::MAX; sys.n()];
    let mut free_to_global = Vec::new();
    for (g, &c) in mask.iter().enumerate() {
        if !c {
            new_id[g] = free_to_global.len();
            free_to_global.push(g);
        }
    }
    let nf = free_to_global.len();
    let mut row_ptr = Vec::with_capacity(nf + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    let mut rhs = Vec::with_capacity(nf);
    for &g in &free_to_global {
        let mut b = rhs_full[g];
        for (j, v) in sys.matrix.row(g) {
            if mask[j] {
                b -= v * values[j];
            } else {
                col_idx.push(new_id[j]);
                vals.push(v);
            }
        }
        rhs.push(b);
        row_ptr.push(col_idx.len());
    }
    Ok(SparseSystem {
        matrix: CsrMatrix {
            n: nf,
            row_ptr,
            col_idx,
            values: vals,
        },
        rhs,
        free_to_global,
        n_global: sys.n_global,
        fixed: values,
        method: sys.method,
        k: sys.k,
        eta: sys.eta,
    })
}

/// `-⟨g_N, ∂²v/∂n_e²⟩_Γ + Σ_e η h_e⁻¹ ⟨g_N, ∇v·n⟩_e` over boundary edges.
fn add_weak_neumann(rhs: &mut [f64], mesh: &Mesh, dm: &DofMap, eta: f64, bc: &BoundaryData<'_>) -> Result<()> {
    let quad = Quadratures::for_degree(dm.k)?;
    for (e, edge) in mesh.edges.iter().enumerate() {
        if !edge.is_boundary {
            continue;
        }
        let (t, sign) = edge.neighbors().next().expect("boundary edge has a neighbour");
        let shapes = LagrangeShapes::new(&mesh.tri_points(t), dm.cell_degree)?;
        let (pts, w) = edge_points(mesh, &quad, e);
        let tab = shapes.eval(&pts, 2);
        let n = edge.normal;
        let n_out = [sign * n[0], sign * n[1]];
        let pen = eta / edge.length;
        for q in 0..pts.len() {
            let gn = (bc.g_n)(pts[q], n_out);
            for (i, &g) in dm.element_cell_dofs[t].iter().enumerate() {
                let dn = tab.dx[(q, i)] * n_out[0] + tab.dy[(q, i)] * n_out[1];
                let dnn = tab.dxx[(q, i)] * n[0] * n[0] + 2.0 * tab.dxy[(q, i)] * n[0] * n[1] + tab.dyy[(q, i)] * n[1] * n[1];
                rhs[g] += w[q] * gn * (pen * dn - dnn);
            }
        }
    }
    Ok(())
}
