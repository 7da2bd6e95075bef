use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sfwg::assemble::{apply_bcs, assemble, BoundaryData, Method};
use sfwg::errnorms::{norm_2h, triple_bar_norm};
use sfwg::mesh::{structured_unit_square, Mesh, Point2};
use sfwg::solve::solve_direct;
use sfwg::space::{DofMap, LagrangeShapes};

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Structured mesh with interior vertices moved by up to `amp` of a cell.
fn jittered(n: usize, amp: f64, seed: u64) -> Mesh {
    let base = structured_unit_square(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = 1.0 / n as f64;
    let verts: Vec<Point2> = base
        .vertices
        .iter()
        .map(|p| {
            let interior = p.x > 1e-12 && p.x < 1.0 - 1e-12 && p.y > 1e-12 && p.y < 1.0 - 1e-12;
            if interior {
                Point2::new(p.x + amp * cell * rng.gen_range(-1.0..1.0), p.y + amp * cell * rng.gen_range(-1.0..1.0))
            } else {
                *p
            }
        })
        .collect();
    let tris = base.triangles.iter().map(|t| t.vertices).collect();
    Mesh::new(verts, tris).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norms_are_homogeneous(seed in any::<u64>(), s in -5.0f64..5.0, k in 0usize..2) {
        let mesh = structured_unit_square(2).unwrap();
        let dm = DofMap::new(&mesh, k).unwrap();
        let v = random_vector(dm.n_total, seed);
        let sv: Vec<f64> = v.iter().map(|x| s * x).collect();
        let (a, sa) = (triple_bar_norm(&mesh, &dm, &v, k + 3).unwrap(), triple_bar_norm(&mesh, &dm, &sv, k + 3).unwrap());
        prop_assert!((sa - s.abs() * a).abs() <= 1e-12 * (1.0 + sa));
        let (b, sb) = (norm_2h(&mesh, &dm, &v).unwrap(), norm_2h(&mesh, &dm, &sv).unwrap());
        prop_assert!((sb - s.abs() * b).abs() <= 1e-12 * (1.0 + sb));
    }

    #[test]
    fn triple_bar_triangle_inequality(seed in any::<u64>(), k in 0usize..2) {
        let mesh = structured_unit_square(2).unwrap();
        let dm = DofMap::new(&mesh, k).unwrap();
        let a = random_vector(dm.n_total, seed);
        let b = random_vector(dm.n_total, seed.wrapping_add(1));
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let n = |v: &[f64]| triple_bar_norm(&mesh, &dm, v, k + 3).unwrap();
        prop_assert!(n(&ab) <= n(&a) + n(&b) + 1e-12);
    }

    #[test]
    fn cell_part_is_continuous(seed in any::<u64>(), k in 0usize..2) {
        let mesh = jittered(3, 0.2, seed);
        let dm = DofMap::new(&mesh, k).unwrap();
        let v = random_vector(dm.n_cell, seed);
        let shapes: Vec<LagrangeShapes> = (0..mesh.n_triangles())
            .map(|t| LagrangeShapes::new(&mesh.tri_points(t), dm.cell_degree).unwrap())
            .collect();
        for e in mesh.edges.iter().filter(|e| !e.is_boundary) {
            let a = mesh.vertices[e.vertices[0]];
            let b = mesh.vertices[e.vertices[1]];
            let pts: Vec<Point2> = [0.1, 0.37, 0.8].iter().map(|&t| a.lerp(b, t)).collect();
            let vals: Vec<Vec<f64>> = e
                .neighbors()
                .map(|(t, _)| {
                    let tab = shapes[t].eval(&pts, 0);
                    (0..pts.len())
                        .map(|q| dm.element_cell_dofs[t].iter().enumerate().map(|(i, &g)| v[g] * tab.val[(q, i)]).sum())
                        .collect()
                })
                .collect();
            for q in 0..pts.len() {
                prop_assert!((vals[0][q] - vals[1][q]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn jittered_meshes_give_spd_systems(seed in any::<u64>(), k in 0usize..2) {
        let mesh = jittered(3, 0.25, seed);
        let dm = DofMap::new(&mesh, k).unwrap();
        let f = |p: Point2| p.x - p.y * p.y;
        for m in Method::ALL {
            let full = assemble(m, &mesh, &dm, &f, None).unwrap();
            prop_assert!(full.matrix.asymmetry() <= 1e-12 * full.matrix.max_abs());
            let red = apply_bcs(&full, &mesh, &dm, &BoundaryData::homogeneous()).unwrap();
            prop_assert!(solve_direct(&red.matrix, &red.rhs).is_ok());
        }
    }

    #[test]
    fn refinement_preserves_area_and_euler(n in 1usize..6, seed in any::<u64>()) {
        let mesh = jittered(n, 0.2, seed).refine_uniform();
        prop_assert!((mesh.total_area() - 1.0).abs() < 1e-12);
        let (v, e, t) = (mesh.n_vertices() as i64, mesh.n_edges() as i64, mesh.n_triangles() as i64);
        prop_assert_eq!(v - e + t, 1);
    }
}
