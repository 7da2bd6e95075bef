//! Element-local weak Laplacian.
//!
//! For `v = {v₀, vₙ n_e}` the weak Laplacian `Δ_{w,m} v ∈ P_m(K)` is defined by
//!
//! ```text
//! (Δ_w v, φ)_K = -(∇v₀, ∇φ)_K + Σ_e σ_{K,e} ⟨vₙ, φ⟩_e      for all φ ∈ P_m(K)
//! ```
//!
//! With an `L²(K)`-orthonormal test basis the right-hand side moments are the
//! lift coefficients themselves, so the local operator is a plain matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::space::LocalElement;
use crate::polybasis::TriBasis;

pub mod bubble;

#[derive(Clone, Debug)]
pub struct LocalWeakLap {
    pub element: usize,
    /// Lift degree `m`.
    pub degree: usize,
    pub basis: TriBasis,
    /// `dim P_m × n_local`; row `j` pairs with the `j`-th orthonormal test function.
    pub matrix: DMatrix<f64>,
}

impl LocalWeakLap {
    /// Orthonormal-basis coefficients of `Δ_w v` for local DOF values `local`.
    pub fn apply(&self, local: &[f64]) -> DVector<f64> {
        &self.matrix * DVector::from_column_slice(local)
    }

    /// `‖Δ_w v‖²_{L²(K)}`.
    pub fn norm_sq(&self, local: &[f64]) -> f64 {
        self.apply(local).norm_squared()
    }

    /// `W_Kᵀ W_K`, the element matrix of `(Δ_w u, Δ_w v)_K`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.matrix.tr_mul(&self.matrix)
    }
}

/// Builds the local weak Laplacian of lift degree `degree` on `el`.
pub fn local_weak_laplacian(el: &LocalElement, degree: usize) -> Result<LocalWeakLap> {
    let basis = TriBasis::new(&el.vertices, degree)?;
    let nb = basis.dim();
    let nc = el.n_cell();
    let ne = el.sides[0].edge_basis.ncols();
    let mut w = DMatrix::zeros(nb, nc + 3 * ne);

    if degree > 0 {
        let test = basis.eval(&el.points, 1);
        let shp = &el.vol_shapes;
        // -(∇N_i, ∇φ_j)
        for q in 0..el.points.len() {
            let wq = el.weights[q];
            for j in 0..nb {
                let (gx, gy) = (wq * test.dx[(q, j)], wq * test.dy[(q, j)]);
                for i in 0..nc {
                    w[(j, i)] -= shp.dx[(q, i)] * gx + shp.dy[(q, i)] * gy;
                }
            }
        }
    }

    for (s, side) in el.sides.iter().enumerate() {
        let test = basis.eval(&side.points, 0);
        let off = el.side_offset(s);
        for q in 0..side.points.len() {
            let wq = side.sign * side.weights[q];
            for j in 0..nb {
                let f = wq * test.val[(q, j)];
                for l in 0..ne {
                    w[(j, off + l)] += side.edge_basis[(q, l)] * f;
                }
            }
        }
    }

    Ok(LocalWeakLap {
        element: el.index,
        degree,
        basis,
        matrix: w,
    })
}
