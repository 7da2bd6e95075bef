//! Quadrature rules and polynomial bases on triangles and edges.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::Point2;

/// Largest total degree accepted by [`triangle_quadrature`].
pub const MAX_TRIANGLE_DEGREE: usize = 20;
/// Largest point count accepted by [`edge_quadrature`].
pub const MAX_EDGE_POINTS: usize = 16;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Gauss rule on `[0, 1]`; points in the unit parameter, weights sum to one.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`; weights sum to 1/2.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl TriangleRule {
    /// Physical points and weights on the triangle `p`.
    pub fn mapped(&self, p: &[Point2; 3]) -> (Vec<Point2>, Vec<f64>) {
        let jac = ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y)).abs();
        let pts = self
            .points
            .iter()
            .map(|&[s, t]| {
                Point2::new(
                    p[0].x + s * (p[1].x - p[0].x) + t * (p[2].x - p[0].x),
                    p[0].y + s * (p[1].y - p[0].y) + t * (p[2].y - p[0].y),
                )
            })
            .collect();
        let w = self.weights.iter().map(|w| w * jac).collect();
        (pts, w)
    }
}

impl EdgeRule {
    /// Physical points and weights on the segment `a -> b`.
    pub fn mapped(&self, a: Point2, b: Point2) -> (Vec<Point2>, Vec<f64>) {
        let len = a.dist(b);
        let pts = self.points.iter().map(|&t| a.lerp(b, t)).collect();
        let w = self.weights.iter().map(|w| w * len).collect();
        (pts, w)
    }
}

pub fn edge_quadrature(npoints: usize) -> Result<EdgeRule> {
    if npoints == 0 || npoints > MAX_EDGE_POINTS {
        return Err(Error::Capability(format!(
            "edge quadrature with {npoints} points (supported 1..={MAX_EDGE_POINTS})"
        )));
    }
    let (points, weights) = gauss_legendre_unit(npoints);
    Ok(EdgeRule {
        points,
        weights,
        exactness: 2 * npoints - 1,
    })
}

/// Rule exact for total degree `degree` on the reference triangle.
///
/// Degrees 0 and 1 use the centroid rule; higher degrees use a collapsed
/// (Duffy) tensor product of Gauss rules, which keeps all weights positive and
/// all points interior.
pub fn triangle_quadrature(degree: usize) -> Result<TriangleRule> {
    if degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::Capability(format!(
            "triangle quadrature of degree {degree} (max {MAX_TRIANGLE_DEGREE})"
        )));
    }
    if degree <= 1 {
        return Ok(TriangleRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            exactness: 1,
        });
    }
    // the collapse adds a factor (1 - t), one extra degree in t
    let n = (degree + 2).div_ceil(2);
    let (g, w) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let t = g[j];
            points.push([g[i] * (1.0 - t), t]);
            weights.push(w[i] * w[j] * (1.0 - t));
        }
    }
    Ok(TriangleRule {
        points,
        weights,
        exactness: 2 * n - 2,
    })
}

/// Exponent pairs `(a, b)` of the monomials of total degree `<= m`, graded.
pub fn monomial_exponents(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(poly_dim(m));
    for d in 0..=m {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

pub const fn poly_dim(m: usize) -> usize {
    (m + 1) * (m + 2) / 2
}

/// Values and derivatives of a family of functions at a set of points.
/// Each matrix is `npoints × nfunctions`; unrequested derivatives are empty.
#[derive(Clone, Debug)]
pub struct Table {
    pub val: DMatrix<f64>,
    pub dx: DMatrix<f64>,
    pub dy: DMatrix<f64>,
    pub dxx: DMatrix<f64>,
    pub dxy: DMatrix<f64>,
    pub dyy: DMatrix<f64>,
}

impl Table {
    fn empty(np: usize, nf: usize, order: usize) -> Table {
        let d1 = if order >= 1 { np } else { 0 };
        let d2 = if order >= 2 { np } else { 0 };
        Table {
            val: DMatrix::zeros(np, nf),
            dx: DMatrix::zeros(d1, nf),
            dy: DMatrix::zeros(d1, nf),
            dxx: DMatrix::zeros(d2, nf),
            dxy: DMatrix::zeros(d2, nf),
            dyy: DMatrix::zeros(d2, nf),
        }
    }

    /// Re-expresses every column through `coeffs` (`new_j = Σ_i coeffs[j, i] old_i`).
    pub(crate) fn combine(&self, coeffs: &DMatrix<f64>) -> Table {
        let ct = coeffs.transpose();
        let map = |m: &DMatrix<f64>| if m.nrows() == 0 { DMatrix::zeros(0, ct.ncols()) } else { m * &ct };
        Table {
            val: map(&self.val),
            dx: map(&self.dx),
            dy: map(&self.dy),
            dxx: map(&self.dxx),
            dxy: map(&self.dxy),
            dyy: map(&self.dyy),
        }
    }
}

/// Monomials `((x - xc)/s)^a ((y - yc)/s)^b` of total degree `<= degree`.
#[derive(Clone, Debug)]
pub struct ScaledMonomials {
    pub degree: usize,
    pub center: Point2,
    pub scale: f64,
    exps: Vec<(usize, usize)>,
}

impl ScaledMonomials {
    pub fn new(degree: usize, center: Point2, scale: f64) -> Self {
        Self {
            degree,
            center,
            scale,
            exps: monomial_exponents(degree),
        }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    pub fn eval(&self, points: &[Point2], order: usize) -> Table {
        let m = self.degree;
        let mut t = Table::empty(points.len(), self.dim(), order);
        let inv = 1.0 / self.scale;
        let mut px = vec![0.0; m + 1];
        let mut py = vec![0.0; m + 1];
        // power with negative exponent treated as zero
        let pw = |p: &[f64], e: isize| if e < 0 { 0.0 } else { p[e as usize] };
        for (q, pt) in points.iter().enumerate() {
            let x = (pt.x - self.center.x) * inv;
            let y = (pt.y - self.center.y) * inv;
            px[0] = 1.0;
            py[0] = 1.0;
            for i in 1..=m {
                px[i] = px[i - 1] * x;
                py[i] = py[i - 1] * y;
            }
            for (j, &(a, b)) in self.exps.iter().enumerate() {
                let (ai, bi) = (a as isize, b as isize);
                let (af, bf) = (a as f64, b as f64);
                t.val[(q, j)] = px[a] * py[b];
                if order >= 1 {
                    t.dx[(q, j)] = af * pw(&px, ai - 1) * py[b] * inv;
                    t.dy[(q, j)] = bf * px[a] * pw(&py, bi - 1) * inv;
                }
                if order >= 2 {
                    let inv2 = inv * inv;
                    t.dxx[(q, j)] = af * (af - 1.0) * pw(&px, ai - 2) * py[b] * inv2;
                    t.dxy[(q, j)] = af * bf * pw(&px, ai - 1) * pw(&py, bi - 1) * inv2;
                    t.dyy[(q, j)] = bf * (bf - 1.0) * px[a] * pw(&py, bi - 2) * inv2;
                }
            }
        }
        t
    }
}

/// `L²(K)`-orthonormal basis of `P_m(K)` expressed in scaled centered monomials.
#[derive(Clone, Debug)]
pub struct TriBasis {
    pub degree: usize,
    pub monomials: ScaledMonomials,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    pub coeffs: DMatrix<f64>,
}

impl TriBasis {
    /// Orthonormalizes the scaled monomials of `points` (a triangle) by
    /// Gram–Schmidt with one reorthogonalization pass, using a rule exact
    /// for the Gram matrix.
    pub fn new(points: &[Point2; 3], degree: usize) -> Result<TriBasis> {
        let center = Point2::new(
            (points[0].x + points[1].x + points[2].x) / 3.0,
            (points[0].y + points[1].y + points[2].y) / 3.0,
        );
        let h = (0..3)
            .map(|i| points[i].dist(points[(i + 1) % 3]))
            .fold(0.0, f64::max);
        let monomials = ScaledMonomials::new(degree, center, h);
        let rule = triangle_quadrature((2 * degree).max(1))?;
        let (qp, qw) = rule.mapped(points);
        let tab = monomials.eval(&qp, 0);
        let n = monomials.dim();
        let sw: Vec<f64> = qw.iter().map(|w| w.sqrt()).collect();
        let mut sampled = tab.val.clone();
        for (q, s) in sw.iter().enumerate() {
            sampled.row_mut(q).scale_mut(*s);
        }
        let mut q_cols: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut coeffs = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut v: DVector<f64> = sampled.column(j).into_owned();
            let start = v.norm();
            let mut c = DVector::zeros(n);
            c[j] = 1.0;
            for _pass in 0..2 {
                for (i, qi) in q_cols.iter().enumerate() {
                    let r = qi.dot(&v);
                    v.axpy(-r, qi, 1.0);
                    let ci = coeffs.row(i).transpose();
                    c.axpy(-r, &ci, 1.0);
                }
            }
            let norm = v.norm();
            if !(norm > 1e-13 * start) {
                return Err(Error::Conditioning(format!(
                    "monomial {j} of degree {degree} is numerically dependent on a degenerate element"
                )));
            }
            v /= norm;
            c /= norm;
            coeffs.row_mut(j).copy_from(&c.transpose());
            q_cols.push(v);
        }
        Ok(TriBasis {
            degree,
            monomials,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    /// Values (order 0), gradients (1) and Hessians (2) at `points`.
    pub fn eval(&self, points: &[Point2], order: usize) -> Table {
        self.monomials.eval(points, order).combine(&self.coeffs)
    }
}

/// `L²(e)`-orthonormal basis of `P_m(e)` in the unit parameter `t ∈ [0, 1]`
/// running from the edge's lower-index vertex.
#[derive(Clone, Copy, Debug)]
pub struct EdgeBasis {
    pub degree: usize,
    pub length: f64,
}

impl EdgeBasis {
    pub fn new(degree: usize, length: f64) -> Self {
        Self { degree, length }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// Values at parameter `t`, one per basis function.
    pub fn values(&self, t: f64) -> Vec<f64> {
        (0..=self.degree)
            .map(|l| ((2 * l + 1) as f64 / self.length).sqrt() * legendre_with_derivative(l, 2.0 * t - 1.0).0)
            .collect()
    }

    /// Arclength derivatives at parameter `t`.
    pub fn derivatives(&self, t: f64) -> Vec<f64> {
        (0..=self.degree)
            .map(|l| {
                ((2 * l + 1) as f64 / self.length).sqrt()
                    * legendre_with_derivative(l, 2.0 * t - 1.0).1
                    * 2.0
                    / self.length
            })
            .collect()
    }
}
