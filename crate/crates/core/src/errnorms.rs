//! Interpolants of smooth functions and the discrete error norms.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point2};
use crate::polybasis::{triangle_quadrature, EdgeBasis, TriBasis};
use crate::space::{DofMap, FieldVector, LagrangeShapes, LocalElement, Quadratures};
use crate::weaklap::local_weak_laplacian;

type Scalar = Box<dyn Fn(Point2) -> f64 + Send + Sync>;
type Vector = Box<dyn Fn(Point2) -> [f64; 2] + Send + Sync>;
type Hessian = Box<dyn Fn(Point2) -> [f64; 3] + Send + Sync>;

/// A smooth function with its derivatives and `f = Δ²u`.
pub struct ExactSolution {
    pub name: String,
    pub u: Scalar,
    pub grad: Vector,
    /// `[u_xx, u_xy, u_yy]`.
    pub hessian: Hessian,
    pub lap: Scalar,
    pub f: Scalar,
}

impl ExactSolution {
    /// `u = sin(πx) sin(πy)`, `f = 4π⁴ sin(πx) sin(πy)`.
    pub fn sin_sin() -> Self {
        let s = |p: Point2| ((PI * p.x).sin(), (PI * p.y).sin(), (PI * p.x).cos(), (PI * p.y).cos());
        Self {
            name: "sin(pi x) sin(pi y)".into(),
            u: Box::new(move |p| {
                let (sx, sy, _, _) = s(p);
                sx * sy
            }),
            grad: Box::new(move |p| {
                let (sx, sy, cx, cy) = s(p);
                [PI * cx * sy, PI * sx * cy]
            }),
            hessian: Box::new(move |p| {
                let (sx, sy, cx, cy) = s(p);
                [-PI * PI * sx * sy, PI * PI * cx * cy, -PI * PI * sx * sy]
            }),
            lap: Box::new(move |p| {
                let (sx, sy, _, _) = s(p);
                -2.0 * PI * PI * sx * sy
            }),
            f: Box::new(move |p| {
                let (sx, sy, _, _) = s(p);
                4.0 * PI.powi(4) * sx * sy
            }),
        }
    }

    /// `u = x² + xy + y²`.
    pub fn quadratic() -> Self {
        Self {
            name: "x^2 + xy + y^2".into(),
            u: Box::new(|p| p.x * p.x + p.x * p.y + p.y * p.y),
            grad: Box::new(|p| [2.0 * p.x + p.y, p.x + 2.0 * p.y]),
            hessian: Box::new(|_| [2.0, 1.0, 2.0]),
            lap: Box::new(|_| 4.0),
            f: Box::new(|_| 0.0),
        }
    }

    /// `u = x³ − 3xy²` (harmonic).
    pub fn harmonic_cubic() -> Self {
        Self {
            name: "x^3 - 3xy^2".into(),
            u: Box::new(|p| p.x.powi(3) - 3.0 * p.x * p.y * p.y),
            grad: Box::new(|p| [3.0 * p.x * p.x - 3.0 * p.y * p.y, -6.0 * p.x * p.y]),
            hessian: Box::new(|p| [6.0 * p.x, -6.0 * p.y, -6.0 * p.x]),
            lap: Box::new(|_| 0.0),
            f: Box::new(|_| 0.0),
        }
    }

    /// Compares the supplied derivatives with central differences of `u` and
    /// `grad` at a few interior points. Errors if any relative mismatch
    /// exceeds `1e-6`.
    pub fn check_consistency(&self) -> Result<()> {
        let h = 1e-4;
        let pts = [
            Point2::new(0.31, 0.17),
            Point2::new(0.62, 0.48),
            Point2::new(0.13, 0.86),
            Point2::new(0.77, 0.71),
        ];
        let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale.max(1.0);
        for p in pts {
            let dx = Point2::new(h, 0.0);
            let dy = Point2::new(0.0, h);
            let add = |a: Point2, b: Point2, s: f64| Point2::new(a.x + s * b.x, a.y + s * b.y);
            let g = (self.grad)(p);
            let gs = g[0].abs().max(g[1].abs());
            let fd = [
                ((self.u)(add(p, dx, 1.0)) - (self.u)(add(p, dx, -1.0))) / (2.0 * h),
                ((self.u)(add(p, dy, 1.0)) - (self.u)(add(p, dy, -1.0))) / (2.0 * h),
            ];
            let hs = (self.hessian)(p);
            let hsc = hs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let gxp = (self.grad)(add(p, dx, 1.0));
            let gxm = (self.grad)(add(p, dx, -1.0));
            let gyp = (self.grad)(add(p, dy, 1.0));
            let gym = (self.grad)(add(p, dy, -1.0));
            let fdh = [
                (gxp[0] - gxm[0]) / (2.0 * h),
                (gyp[0] - gym[0]) / (2.0 * h),
                (gyp[1] - gym[1]) / (2.0 * h),
            ];
            let lap = (self.lap)(p);
            let bad = rel(fd[0], g[0], gs) > 1e-6
                || rel(fd[1], g[1], gs) > 1e-6
                || (0..3).any(|i| rel(fdh[i], hs[i], hsc) > 1e-6)
                || rel(lap, hs[0] + hs[2], hsc) > 1e-12;
            // Δ²u from second differences of Δu
            let l = |q: Point2| (self.lap)(q);
            let bih = (l(add(p, dx, 1.0)) + l(add(p, dx, -1.0)) + l(add(p, dy, 1.0)) + l(add(p, dy, -1.0))
                - 4.0 * l(p))
                / (h * h);
            let f = (self.f)(p);
            let bad_f = (bih - f).abs() / f.abs().max(lap.abs()).max(1.0) > 1e-5;
            if bad || bad_f {
                return Err(Error::Invariant(format!(
                    "derivatives of `{}` are inconsistent at ({}, {})",
                    self.name, p.x, p.y
                )));
            }
        }
        Ok(())
    }
}

/// `Q_h u`: Lagrange interpolation of `u` at the cell nodes and the edge
/// `L²` projection of `∇u·n_e` onto `P_{k+1}(e)`.
pub fn interpolate_qh(u: &ExactSolution, mesh: &Mesh, dm: &DofMap) -> Result<FieldVector> {
    let mut values = vec![0.0; dm.n_total];
    for (g, p) in dm.cell_nodes.iter().enumerate() {
        values[g] = (u.u)(*p);
    }
    let quad = Quadratures::for_degree(dm.k)?;
    for (e, edge) in mesh.edges.iter().enumerate() {
        let (pts, w) = quad
            .edge
            .mapped(mesh.vertices[edge.vertices[0]], mesh.vertices[edge.vertices[1]]);
        let basis = EdgeBasis::new(dm.edge_degree, edge.length);
        for (q, &tau) in quad.edge.points.iter().enumerate() {
            let g = (u.grad)(pts[q]);
            let dn = g[0] * edge.normal[0] + g[1] * edge.normal[1];
            for (l, b) in dm.edge_dofs(e).zip(basis.values(tau)) {
                values[l] += w[q] * dn * b;
            }
        }
    }
    FieldVector::from_values(dm, values)
}

fn check_len(dm: &DofMap, v: &[f64], need: usize) -> Result<()> {
    if v.len() < need {
        return Err(Error::Dimension(format!(
            "vector of length {} for {} unknowns (k = {})",
            v.len(),
            need,
            dm.k
        )));
    }
    Ok(())
}

/// `|||v||| = (Σ_K ‖Δ_{w,m} v‖²_K)^{1/2}` with lift degree `m`.
pub fn triple_bar_norm(mesh: &Mesh, dm: &DofMap, v: &[f64], lift_degree: usize) -> Result<f64> {
    check_len(dm, v, dm.n_total)?;
    let quad = Quadratures::for_degree(dm.k)?;
    let mut sum = 0.0;
    for t in 0..mesh.n_triangles() {
        let el = LocalElement::new(mesh, dm, &quad, t)?;
        let lap = local_weak_laplacian(&el, lift_degree)?;
        let local: Vec<f64> = dm.element_dofs(mesh, t).iter().map(|&g| v[g]).collect();
        sum += lap.norm_sq(&local);
    }
    Ok(sum.sqrt())
}

/// `‖v‖_{2,h} = (Σ_K ‖Δv₀‖²_K + h_K⁻¹ ‖∂v₀/∂n_e − vₙ‖²_{∂K})^{1/2}`.
pub fn norm_2h(mesh: &Mesh, dm: &DofMap, v: &[f64]) -> Result<f64> {
    Ok(norm_2h_parts(mesh, dm, v)?.iter().sum::<f64>().sqrt())
}

/// Squared volume and edge contributions of [`norm_2h`].
pub fn norm_2h_parts(mesh: &Mesh, dm: &DofMap, v: &[f64]) -> Result<[f64; 2]> {
    check_len(dm, v, dm.n_total)?;
    let quad = Quadratures::for_degree(dm.k)?;
    let (mut vol, mut edge) = (0.0, 0.0);
    for t in 0..mesh.n_triangles() {
        let el = LocalElement::new(mesh, dm, &quad, t)?;
        let local: Vec<f64> = dm.element_dofs(mesh, t).iter().map(|&g| v[g]).collect();
        let nc = el.n_cell();
        for q in 0..el.points.len() {
            let l: f64 = (0..nc)
                .map(|i| local[i] * (el.vol_shapes.dxx[(q, i)] + el.vol_shapes.dyy[(q, i)]))
                .sum();
            vol += el.weights[q] * l * l;
        }
        for s in 0..3 {
            let side = &el.sides[s];
            for q in 0..side.points.len() {
                let d = crate::assemble::normal_mismatch_row(&el, s, q);
                let m: f64 = d.iter().zip(&local).map(|(a, b)| a * b).sum();
                edge += side.weights[q] * m * m / el.diameter;
            }
        }
    }
    Ok([vol, edge])
}

/// Over-integration rule for errors against exact functions.
fn error_rule(k: usize) -> Result<crate::polybasis::TriangleRule> {
    triangle_quadrature(2 * k + 8)
}

/// `(‖u − u₀‖, ‖∇(u − u₀)‖)` for cell values `u0`.
pub fn l2_h1_errors(mesh: &Mesh, dm: &DofMap, u0: &[f64], u: &ExactSolution) -> Result<(f64, f64)> {
    check_len(dm, u0, dm.n_cell)?;
    let rule = error_rule(dm.k)?;
    let (mut l2, mut h1) = (0.0, 0.0);
    for t in 0..mesh.n_triangles() {
        let verts = mesh.tri_points(t);
        let shapes = LagrangeShapes::new(&verts, dm.cell_degree)?;
        let (pts, w) = rule.mapped(&verts);
        let tab = shapes.eval(&pts, 1);
        let dofs = &dm.element_cell_dofs[t];
        for q in 0..pts.len() {
            let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
            for (i, &g) in dofs.iter().enumerate() {
                v += u0[g] * tab.val[(q, i)];
                gx += u0[g] * tab.dx[(q, i)];
                gy += u0[g] * tab.dy[(q, i)];
            }
            let ex = (u.u)(pts[q]);
            let eg = (u.grad)(pts[q]);
            l2 += w[q] * (ex - v).powi(2);
            h1 += w[q] * ((eg[0] - gx).powi(2) + (eg[1] - gy).powi(2));
        }
    }
    Ok((l2.sqrt(), h1.sqrt()))
}

/// `‖u − u_h‖_dg = (Σ_K |u − u_h|²_{H²(K)} + Σ_e h_e⁻¹ ‖[[∇(u − u_h)]]‖²_e)^{1/2}`.
pub fn dg_norm_error(mesh: &Mesh, dm: &DofMap, uh: &[f64], u: &ExactSolution) -> Result<f64> {
    check_len(dm, uh, dm.n_cell)?;
    let rule = error_rule(dm.k)?;
    let quad = Quadratures::for_degree(dm.k)?;
    let mut shapes = Vec::with_capacity(mesh.n_triangles());
    let mut sum = 0.0;
    for t in 0..mesh.n_triangles() {
        let verts = mesh.tri_points(t);
        let sh = LagrangeShapes::new(&verts, dm.cell_degree)?;
        let (pts, w) = rule.mapped(&verts);
        let tab = sh.eval(&pts, 2);
        let dofs = &dm.element_cell_dofs[t];
        for q in 0..pts.len() {
            let mut hd = [0.0; 3];
            for (i, &g) in dofs.iter().enumerate() {
                hd[0] += uh[g] * tab.dxx[(q, i)];
                hd[1] += uh[g] * tab.dxy[(q, i)];
                hd[2] += uh[g] * tab.dyy[(q, i)];
            }
            let he = (u.hessian)(pts[q]);
            sum += w[q] * ((he[0] - hd[0]).powi(2) + 2.0 * (he[1] - hd[1]).powi(2) + (he[2] - hd[2]).powi(2));
        }
        shapes.push(sh);
    }
    for edge in &mesh.edges {
        let (pts, w) = quad
            .edge
            .mapped(mesh.vertices[edge.vertices[0]], mesh.vertices[edge.vertices[1]]);
        let n = edge.normal;
        let mut jump = vec![0.0; pts.len()];
        for (t, sign) in edge.neighbors() {
            let tab = shapes[t].eval(&pts, 1);
            for q in 0..pts.len() {
                let eg = (u.grad)(pts[q]);
                let mut dn = eg[0] * n[0] + eg[1] * n[1];
                for (i, &g) in dm.element_cell_dofs[t].iter().enumerate() {
                    dn -= uh[g] * (tab.dx[(q, i)] * n[0] + tab.dy[(q, i)] * n[1]);
                }
                jump[q] += sign * dn;
            }
        }
        sum += jump.iter().zip(&w).map(|(j, w)| w * j * j).sum::<f64>() / edge.length;
    }
    Ok(sum.sqrt())
}

/// Element `L²` projection `π_h w` onto `P_m(K)`, as coefficients in the
/// orthonormal basis of `K`.
pub fn pi_h(vertices: &[Point2; 3], degree: usize, w: impl Fn(Point2) -> f64) -> Result<(TriBasis, DVector<f64>)> {
    let basis = TriBasis::new(vertices, degree)?;
    let rule = triangle_quadrature((2 * degree + 8).min(20))?;
    let (pts, wts) = rule.mapped(vertices);
    let tab = basis.eval(&pts, 0).val;
    let mut c = DVector::zeros(basis.dim());
    for q in 0..pts.len() {
        let f = wts[q] * w(pts[q]);
        for j in 0..basis.dim() {
            c[j] += f * tab[(q, j)];
        }
    }
    Ok((basis, c))
}

/// Errors of one discrete solution, as reported in the convergence tables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    /// `|||Q_h u − u_h|||` for the weak Galerkin methods, `‖u − u_h‖_dg` for C0IP.
    pub triple_bar: f64,
    pub h1_semi: f64,
    pub l2: f64,
    pub dg: Option<f64>,
    pub h: f64,
    pub n_dofs: usize,
}

/// `log₂(e_coarse / e_fine)`.
pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
