//! WebAssembly bindings used by `www/index.html`.
//!
//! Everything runs on structured meshes of the unit square with the
//! manufactured solution `u = sin(πx) sin(πy)`.

use sfwg::assemble::Method;
use sfwg::cli::{emit_comparison, emit_table, run_comparison, run_convergence, solve_level, Format, MeshSpec, RunConfig};
use sfwg::errnorms::ExactSolution;
use sfwg::mesh::structured_unit_square;
use wasm_bindgen::prelude::*;

/// Largest `n` and number of levels the page accepts.
pub const MAX_N: usize = 64;
pub const MAX_LEVELS: usize = 5;

/// A solved field ready for plotting.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct FieldPlot {
    coords: Vec<f64>,
    triangles: Vec<u32>,
    values: Vec<f64>,
    errors: Vec<f64>,
    l2: f64,
    h1: f64,
    energy: f64,
    ndofs: usize,
}

#[wasm_bindgen]
impl FieldPlot {
    /// Vertex coordinates as `x0, y0, x1, y1, ...`.
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    /// Vertex ids, three per triangle.
    pub fn triangles(&self) -> Vec<u32> {
        self.triangles.clone()
    }

    /// Discrete solution at the vertices.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// `u - u_h` at the vertices.
    pub fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }
}

fn check(n: usize, levels: usize) -> sfwg::Result<()> {
    if n == 0 || n > MAX_N {
        return Err(sfwg::Error::Config(format!("n must be in 1..={MAX_N}")));
    }
    if levels == 0 || levels > MAX_LEVELS {
        return Err(sfwg::Error::Config(format!("levels must be in 1..={MAX_LEVELS}")));
    }
    Ok(())
}

pub fn field(method: &str, k: usize, n: usize) -> sfwg::Result<FieldPlot> {
    check(n, 1)?;
    let method: Method = method.parse()?;
    let cfg = RunConfig::new(method, k, 1, MeshSpec::Structured(n));
    cfg.validate()?;
    let exact = ExactSolution::sin_sin();
    let res = solve_level(&cfg, structured_unit_square(n)?, 1, &exact)?;
    let mesh = &res.mesh;
    let nv = mesh.n_vertices();
    let values = res.field[..nv].to_vec();
    let errors = mesh.vertices.iter().zip(&values).map(|(p, v)| (exact.u)(*p) - v).collect();
    Ok(FieldPlot {
        coords: mesh.vertices.iter().flat_map(|p| [p.x, p.y]).collect(),
        triangles: mesh.triangles.iter().flat_map(|t| t.vertices.map(|v| v as u32)).collect(),
        values,
        errors,
        l2: res.row.errors.l2,
        h1: res.row.errors.h1_semi,
        energy: res.row.errors.triple_bar,
        ndofs: res.row.errors.n_dofs,
    })
}

pub fn convergence(method: &str, k: usize, n: usize, levels: usize, csv: bool) -> sfwg::Result<String> {
    check(n, levels)?;
    let cfg = RunConfig::new(method.parse()?, k, levels, MeshSpec::Structured(n));
    let t = run_convergence(&cfg)?;
    Ok(emit_table(&t, if csv { Format::Csv } else { Format::Markdown }))
}

pub fn comparison(k: usize, n: usize, levels: usize) -> sfwg::Result<String> {
    check(n, levels)?;
    let cfgs: Vec<RunConfig> = Method::ALL
        .iter()
        .map(|&m| RunConfig::new(m, k, levels, MeshSpec::Structured(n)))
        .collect();
    Ok(emit_comparison(&run_comparison(&cfgs)?, Format::Markdown))
}

fn js_err(e: sfwg::Error) -> JsError {
    JsError::new(&format!("{}: {e}", e.category()))
}

/// Solves on the `n × n` structured mesh.
#[wasm_bindgen(js_name = solveField)]
pub fn solve_field(method: &str, k: usize, n: usize) -> Result<FieldPlot, JsError> {
    field(method, k, n).map_err(js_err)
}

/// Convergence table as markdown, or CSV when `csv` is set.
#[wasm_bindgen(js_name = convergenceTable)]
pub fn convergence_table(method: &str, k: usize, n: usize, levels: usize, csv: bool) -> Result<String, JsError> {
    convergence(method, k, n, levels, csv).map_err(js_err)
}

/// All three methods on the same meshes.
#[wasm_bindgen(js_name = compareMethods)]
pub fn compare_methods(k: usize, n: usize, levels: usize) -> Result<String, JsError> {
    comparison(k, n, levels).map_err(js_err)
}
