//! Edge bubbles `φᵢ = λⱼ λₗ q` (`j, l ≠ i`, `q ∈ P_{k+1}`) with prescribed
//! moments against `P_{k+1}(eᵢ)` and vanishing moments against `P_k(K)`.
//!
//! These are the test functions behind the equivalence of the weak-Laplacian
//! energy and the broken `H²` norm. The solver never builds them; they are
//! exposed so tests and diagnostics can check the construction directly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::Point2;
use crate::polybasis::{edge_quadrature, poly_dim, triangle_quadrature, EdgeBasis, ScaledMonomials, TriBasis};

/// Barycentric coordinates of `p` with respect to `v`.
pub fn barycentric(v: &[Point2; 3], p: Point2) -> [f64; 3] {
    let det = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y);
    let l1 = ((p.x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (p.y - v[0].y)) / det;
    let l2 = ((v[1].x - v[0].x) * (p.y - v[0].y) - (p.x - v[0].x) * (v[1].y - v[0].y)) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Endpoints of the side opposite vertex `i`, counter-clockwise.
fn side(v: &[Point2; 3], i: usize) -> (Point2, Point2) {
    (v[(i + 1) % 3], v[(i + 2) % 3])
}

#[derive(Clone, Debug)]
pub struct BubbleLift {
    pub vertices: [Point2; 3],
    pub k: usize,
    monomials: ScaledMonomials,
    /// Monomial coefficients of `q` for each of the three bubbles.
    pub q_coeffs: [DVector<f64>; 3],
    /// Per bubble: largest relative moment mismatch, re-measured with
    /// independent higher-order quadrature.
    pub residuals: [f64; 3],
}

impl BubbleLift {
    /// Values of bubble `i` at `points`.
    pub fn eval_component(&self, i: usize, points: &[Point2]) -> Vec<f64> {
        let tab = self.monomials.eval(points, 0).val;
        let q = tab * &self.q_coeffs[i];
        points
            .iter()
            .zip(q.iter())
            .map(|(p, qv)| {
                let l = barycentric(&self.vertices, *p);
                l[(i + 1) % 3] * l[(i + 2) % 3] * qv
            })
            .collect()
    }

    /// Values of `φ = φ₀ + φ₁ + φ₂`.
    pub fn eval(&self, points: &[Point2]) -> Vec<f64> {
        let mut out = vec![0.0; points.len()];
        for i in 0..3 {
            for (o, v) in out.iter_mut().zip(self.eval_component(i, points)) {
                *o += v;
            }
        }
        out
    }

    pub fn l2_norm(&self) -> Result<f64> {
        let rule = triangle_quadrature(2 * (self.k + 3))?;
        let (p, w) = rule.mapped(&self.vertices);
        Ok(self
            .eval(&p)
            .iter()
            .zip(&w)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt())
    }
}

/// Solves the square moment system for each side of the triangle.
///
/// `g(i, x)` is the datum on the side opposite vertex `i`; only its
/// `L²`-projection onto `P_{k+1}` enters.
pub fn construct(vertices: &[Point2; 3], k: usize, g: impl Fn(usize, Point2) -> f64) -> Result<BubbleLift> {
    let h = (0..3)
        .map(|i| vertices[i].dist(vertices[(i + 1) % 3]))
        .fold(0.0, f64::max);
    let center = Point2::new(
        (vertices[0].x + vertices[1].x + vertices[2].x) / 3.0,
        (vertices[0].y + vertices[1].y + vertices[2].y) / 3.0,
    );
    let monomials = ScaledMonomials::new(k + 1, center, h);
    let n = monomials.dim();
    let n_edge = k + 2;
    debug_assert_eq!(n, n_edge + poly_dim(k));
    let interior = TriBasis::new(vertices, k)?;

    let erule = edge_quadrature(k + 5)?;
    let vrule = triangle_quadrature(2 * (k + 3) + 2)?;
    let (vp, vw) = vrule.mapped(vertices);
    let vmon = monomials.eval(&vp, 0).val;
    let vtest = interior.eval(&vp, 0).val;
    let vbary: Vec<[f64; 3]> = vp.iter().map(|p| barycentric(vertices, *p)).collect();

    let mut q_coeffs: [DVector<f64>; 3] = Default::default();
    for i in 0..3 {
        let (a, b) = side(vertices, i);
        let ebasis = EdgeBasis::new(k + 1, a.dist(b));
        let (ep, ew) = erule.mapped(a, b);
        let emon = monomials.eval(&ep, 0).val;
        let mut mat = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        for (q, (&tau, p)) in erule.points.iter().zip(&ep).enumerate() {
            let bary = barycentric(vertices, *p);
            let theta = bary[j] * bary[l];
            let tv = ebasis.values(tau);
            let gv = g(i, *p);
            for r in 0..n_edge {
                rhs[r] += ew[q] * gv * tv[r];
                for c in 0..n {
                    mat[(r, c)] += ew[q] * theta * emon[(q, c)] * tv[r];
                }
            }
        }
        for q in 0..vp.len() {
            let theta = vbary[q][j] * vbary[q][l];
            for r in 0..interior.dim() {
                for c in 0..n {
                    mat[(n_edge + r, c)] += vw[q] * theta * vmon[(q, c)] * vtest[(q, r)];
                }
            }
        }
        let sol = mat
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Invariant(format!("bubble system for side {i} is singular")))?;
        q_coeffs[i] = sol;
    }

    let mut lift = BubbleLift {
        vertices: *vertices,
        k,
        monomials,
        q_coeffs,
        residuals: [0.0; 3],
    };
    lift.residuals = moment_residuals(&lift, &g, &interior)?;
    Ok(lift)
}

fn moment_residuals(lift: &BubbleLift, g: &impl Fn(usize, Point2) -> f64, interior: &TriBasis) -> Result<[f64; 3]> {
    let k = lift.k;
    let v = &lift.vertices;
    let erule = edge_quadrature(12)?;
    let vrule = triangle_quadrature(20)?;
    let (vp, vw) = vrule.mapped(v);
    let vtest = interior.eval(&vp, 0).val;
    let mut out = [0.0; 3];
    for i in 0..3 {
        let (a, b) = side(v, i);
        let ebasis = EdgeBasis::new(k + 1, a.dist(b));
        let (ep, ew) = erule.mapped(a, b);
        let phi_e = lift.eval_component(i, &ep);
        let mut gnorm = 0.0;
        let mut worst: f64 = 0.0;
        let mut moments = vec![(0.0, 0.0); k + 2];
        for (q, &tau) in erule.points.iter().enumerate() {
            let gv = g(i, ep[q]);
            gnorm += ew[q] * gv * gv;
            for (r, t) in ebasis.values(tau).into_iter().enumerate() {
                moments[r].0 += ew[q] * phi_e[q] * t;
                moments[r].1 += ew[q] * gv * t;
            }
        }
        let gnorm = gnorm.sqrt().max(f64::MIN_POSITIVE);
        for (lhs, rhs) in moments {
            worst = worst.max((lhs - rhs).abs() / gnorm);
        }
        let phi_v = lift.eval_component(i, &vp);
        let pnorm = phi_v.iter().zip(&vw).map(|(p, w)| w * p * p).sum::<f64>().sqrt();
        for r in 0..interior.dim() {
            let m: f64 = (0..vp.len()).map(|q| vw[q] * phi_v[q] * vtest[(q, r)]).sum();
            worst = worst.max(m.abs() / pnorm.max(f64::MIN_POSITIVE));
        }
        out[i] = worst;
    }
    Ok(out)
}
