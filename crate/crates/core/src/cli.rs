//! Convergence-study driver behind the `sfwg` binary.

use std::fmt::Write as _;
use std::path::PathBuf;
use web_time::Instant;

use clap::{Parser, ValueEnum};

use crate::assemble::{apply_bcs, assemble, default_eta, BoundaryData, Method};
use crate::errnorms::{dg_norm_error, interpolate_qh, l2_h1_errors, rate, ErrorReport, ExactSolution};
use crate::error::{Error, Result};
use crate::mesh::{load_mesh, structured_unit_square, Mesh};
use crate::solve::{solve_system, Strategy};
use crate::space::{DofMap, SUPPORTED_K};

/// Subdivisions per side of the default level-1 structured mesh.
///
/// The cubic-cell runs start one level coarser: their level-5 errors are
/// already close to the round-off floor of the assembled system.
pub fn default_coarse_n(k: usize) -> usize {
    if k == 0 {
        8
    } else {
        4
    }
}

pub const CSV_HEADER: &str = "level,h,ndofs,err_tb,rate_tb,err_h1,rate_h1,err_l2,rate_l2,t_asm,t_solve";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Markdown,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Direct,
    Cg,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Structured(usize),
    File(PathBuf),
}

impl MeshSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s.strip_prefix("structured:") {
            Some(n) => {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad structured mesh size in `{s}`")))?;
                if n == 0 {
                    return Err(Error::Config("structured mesh needs at least one subdivision".into()));
                }
                Ok(MeshSpec::Structured(n))
            }
            None => Ok(MeshSpec::File(PathBuf::from(s))),
        }
    }

    pub fn load(&self) -> Result<Mesh> {
        match self {
            MeshSpec::Structured(n) => structured_unit_square(*n),
            MeshSpec::File(p) => load_mesh(p),
        }
    }
}

impl std::fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshSpec::Structured(n) => write!(f, "structured:{n}"),
            MeshSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Command-line arguments.
#[derive(Parser, Debug, Clone)]
#[command(name = "sfwg", version, about = "Convergence studies for the biharmonic equation on triangles")]
pub struct Args {
    /// Method, or a comma-separated list for a side-by-side comparison:
    /// sfc0wg, c0wg, c0ip.
    #[arg(long, default_value = "sfc0wg")]
    pub method: String,
    /// Polynomial index k (cell degree k+2, edge degree k+1).
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Number of mesh levels; each level refines the previous one uniformly.
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
    /// Level-1 mesh: `structured:<n>` or a mesh file path
    /// [default: structured:8 for k = 0, structured:4 for k = 1].
    #[arg(long)]
    pub mesh: Option<String>,
    /// C0IP penalty; defaults to 10 (k+2)².
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, value_enum, default_value_t = SolverKind::Direct)]
    pub solver: SolverKind,
    /// Relative residual tolerance for CG.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub method: Method,
    pub k: usize,
    pub levels: usize,
    pub mesh: MeshSpec,
    pub eta: Option<f64>,
    pub solver: Strategy,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(method: Method, k: usize, levels: usize, mesh: MeshSpec) -> Self {
        Self {
            method,
            k,
            levels,
            mesh,
            eta: None,
            solver: Strategy::Direct,
            format: Format::Markdown,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_K.contains(&self.k) {
            return Err(Error::Capability(format!("k = {} (supported: 0, 1)", self.k)));
        }
        if self.levels == 0 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) {
                return Err(Error::Config(format!("eta must be positive, got {eta}")));
            }
            if self.method != Method::C0ip {
                return Err(Error::Config("eta only applies to c0ip".into()));
            }
        }
        if let Strategy::Cg { tol } = self.solver {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::Config(format!("tol must lie in (0, 1), got {tol}")));
            }
        }
        Ok(())
    }

    /// Penalty actually used (C0IP only).
    pub fn effective_eta(&self) -> Option<f64> {
        (self.method == Method::C0ip).then(|| self.eta.unwrap_or_else(|| default_eta(self.k)))
    }
}

/// Turns parsed arguments into one config per requested method.
pub fn configs_from_args(args: &Args) -> Result<Vec<RunConfig>> {
    let mesh = match &args.mesh {
        Some(m) => MeshSpec::parse(m)?,
        None => MeshSpec::Structured(default_coarse_n(args.k)),
    };
    let solver = match args.solver {
        SolverKind::Direct => Strategy::Direct,
        SolverKind::Cg => Strategy::Cg { tol: args.tol },
    };
    let mut out = Vec::new();
    for name in args.method.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let method: Method = name.parse()?;
        if out.iter().any(|c: &RunConfig| c.method == method) {
            return Err(Error::Config(format!("method `{name}` listed twice")));
        }
        let cfg = RunConfig {
            method,
            k: args.k,
            levels: args.levels,
            mesh: mesh.clone(),
            eta: if method == Method::C0ip { args.eta } else { None },
            solver,
            format: args.format,
            out: args.out.clone(),
        };
        cfg.validate()?;
        out.push(cfg);
    }
    if out.is_empty() {
        return Err(Error::Config("no method given".into()));
    }
    if args.eta.is_some() && !out.iter().any(|c| c.method == Method::C0ip) {
        return Err(Error::Config("eta only applies to c0ip".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub level: usize,
    pub errors: ErrorReport,
    pub assemble_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub method: Method,
    pub k: usize,
    pub eta: Option<f64>,
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    /// Rates of `(err_tb, err_h1, err_l2)` between row `i-1` and row `i`.
    pub fn rates(&self, i: usize) -> Option<[f64; 3]> {
        if i == 0 || i >= self.rows.len() {
            return None;
        }
        let (a, b) = (&self.rows[i - 1].errors, &self.rows[i].errors);
        Some([
            rate(a.triple_bar, b.triple_bar),
            rate(a.h1_semi, b.h1_semi),
            rate(a.l2, b.l2),
        ])
    }

    pub fn final_rates(&self) -> Option<[f64; 3]> {
        self.rates(self.rows.len().saturating_sub(1))
    }

    /// Markdown header of the first error column (pipes escaped).
    pub fn energy_label(&self) -> &'static str {
        match self.method {
            Method::C0ip => "‖u−u_h‖_dg",
            _ => r"\|\|\|Q_h u−u_h\|\|\|",
        }
    }
}

/// Result of one level of a study.
pub struct LevelResult {
    pub mesh: Mesh,
    pub dofs: DofMap,
    /// Values of all global unknowns of the method.
    pub field: Vec<f64>,
    pub row: TableRow,
}

/// Assembles, constrains and solves one level with boundary data and source
/// taken from `exact`, then measures the errors.
pub fn solve_level(cfg: &RunConfig, mesh: Mesh, level: usize, exact: &ExactSolution) -> Result<LevelResult> {
    let dm = DofMap::new(&mesh, cfg.k)?;
    let t0 = Instant::now();
    let full = assemble(cfg.method, &mesh, &dm, &*exact.f, cfg.effective_eta())?;
    let bc = BoundaryData::from_function(&*exact.u, &*exact.grad);
    let red = apply_bcs(&full, &mesh, &dm, &bc)?;
    let assemble_seconds = t0.elapsed().as_secs_f64();
    let sol = solve_system(&red, cfg.solver)?;
    let solve_seconds = sol.stats.seconds;

    let (l2, h1_semi) = l2_h1_errors(&mesh, &dm, &sol.field, exact)?;
    let (triple_bar, dg) = match cfg.method {
        Method::C0ip => {
            let d = dg_norm_error(&mesh, &dm, &sol.field, exact)?;
            (d, Some(d))
        }
        _ => {
            let qh = interpolate_qh(exact, &mesh, &dm)?;
            let e: Vec<f64> = qh.values.iter().zip(&sol.field).map(|(a, b)| a - b).collect();
            (full.matrix.bilinear(&e, &e).max(0.0).sqrt(), None)
        }
    };
    let errors = ErrorReport {
        triple_bar,
        h1_semi,
        l2,
        dg,
        h: mesh.h,
        n_dofs: full.n_global,
    };
    Ok(LevelResult {
        mesh,
        dofs: dm,
        field: sol.field,
        row: TableRow {
            level,
            errors,
            assemble_seconds,
            solve_seconds,
        },
    })
}

/// Runs the study for the exact solution `exact`, reporting each finished
/// row to `progress`.
pub fn run_convergence_with(
    cfg: &RunConfig,
    exact: &ExactSolution,
    mut progress: impl FnMut(&TableRow),
) -> Result<ConvergenceTable> {
    cfg.validate()?;
    exact.check_consistency()?;
    let mut mesh = cfg.mesh.load()?;
    let mut rows = Vec::with_capacity(cfg.levels);
    for level in 1..=cfg.levels {
        if level > 1 {
            mesh = mesh.refine_uniform();
        }
        let res = solve_level(cfg, mesh, level, exact).map_err(|e| Error::AtLevel {
            level,
            source: Box::new(e),
        })?;
        progress(&res.row);
        rows.push(res.row);
        mesh = res.mesh;
    }
    Ok(ConvergenceTable {
        method: cfg.method,
        k: cfg.k,
        eta: cfg.effective_eta(),
        rows,
    })
}

/// The manufactured-solution study for `u = sin(πx) sin(πy)`.
pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceTable> {
    run_convergence_with(cfg, &ExactSolution::sin_sin(), |_| {})
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.4}")).unwrap_or_default()
}

pub fn emit_table(t: &ConvergenceTable, format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Csv => {
            s.push_str(CSV_HEADER);
            s.push('\n');
            for (i, row) in t.rows.iter().enumerate() {
                let r = t.rates(i);
                let e = &row.errors;
                let _ = writeln!(
                    s,
                    "{},{:e},{},{:e},{},{:e},{},{:e},{},{:.6},{:.6}",
                    row.level,
                    e.h,
                    e.n_dofs,
                    e.triple_bar,
                    r.map(|r| r[0].to_string()).unwrap_or_default(),
                    e.h1_semi,
                    r.map(|r| r[1].to_string()).unwrap_or_default(),
                    e.l2,
                    r.map(|r| r[2].to_string()).unwrap_or_default(),
                    row.assemble_seconds,
                    row.solve_seconds
                );
            }
        }
        Format::Markdown => {
            let _ = writeln!(s, "{}", table_title(t));
            s.push('\n');
            let _ = writeln!(
                s,
                "| level | h | ndofs | {} | rate | ‖∇(u−u₀)‖ | rate | ‖u−u₀‖ | rate | assemble (s) | solve (s) |",
                t.energy_label()
            );
            s.push_str("|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
            for (i, row) in t.rows.iter().enumerate() {
                let r = t.rates(i);
                let e = &row.errors;
                let _ = writeln!(
                    s,
                    "| {} | {:.4e} | {} | {:.2e} | {} | {:.2e} | {} | {:.2e} | {} | {:.3} | {:.3} |",
                    row.level,
                    e.h,
                    e.n_dofs,
                    e.triple_bar,
                    fmt_rate(r.map(|r| r[0])),
                    e.h1_semi,
                    fmt_rate(r.map(|r| r[1])),
                    e.l2,
                    fmt_rate(r.map(|r| r[2])),
                    row.assemble_seconds,
                    row.solve_seconds
                );
            }
        }
    }
    s
}

fn table_title(t: &ConvergenceTable) -> String {
    let mut title = format!("### {}, k = {}", t.method.label(), t.k);
    if let Some(eta) = t.eta {
        let _ = write!(title, ", η = {eta}");
    }
    title
}

/// Tables of several methods on the same meshes.
#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub tables: Vec<ConvergenceTable>,
}

pub fn run_comparison(cfgs: &[RunConfig]) -> Result<ComparisonReport> {
    let first = cfgs.first().ok_or_else(|| Error::Config("no configurations".into()))?;
    for c in cfgs {
        if c.mesh != first.mesh || c.levels != first.levels || c.k != first.k {
            return Err(Error::Config(
                "compared runs must share mesh, levels and k".into(),
            ));
        }
    }
    let tables = cfgs.iter().map(run_convergence).collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { tables })
}

/// Side-by-side report. A single table is emitted exactly as [`emit_table`] would.
pub fn emit_comparison(rep: &ComparisonReport, format: Format) -> String {
    if rep.tables.len() == 1 {
        return emit_table(&rep.tables[0], format);
    }
    let mut s = String::new();
    match format {
        Format::Csv => {
            s.push_str("method,");
            s.push_str(CSV_HEADER);
            s.push('\n');
            for t in &rep.tables {
                for line in emit_table(t, Format::Csv).lines().skip(1) {
                    let _ = writeln!(s, "{},{line}", t.method.name());
                }
            }
        }
        Format::Markdown => {
            let _ = write!(s, "### Comparison, k = {}\n\n| level |", rep.tables[0].k);
            for t in &rep.tables {
                let m = t.method.label();
                let _ = write!(s, " {m} {} | {m} ‖∇(u−u₀)‖ | {m} ‖u−u₀‖ |", t.energy_label());
            }
            for t in &rep.tables {
                let _ = write!(s, " {} assemble (s) | {} solve (s) |", t.method.label(), t.method.label());
            }
            s.push_str("\n|---:|");
            for _ in 0..rep.tables.len() * 5 {
                s.push_str("---:|");
            }
            s.push('\n');
            for i in 0..rep.tables[0].rows.len() {
                let _ = write!(s, "| {} |", rep.tables[0].rows[i].level);
                for t in &rep.tables {
                    let e = &t.rows[i].errors;
                    let _ = write!(s, " {:.2e} | {:.2e} | {:.2e} |", e.triple_bar, e.h1_semi, e.l2);
                }
                for t in &rep.tables {
                    let r = &t.rows[i];
                    let _ = write!(s, " {:.3} | {:.3} |", r.assemble_seconds, r.solve_seconds);
                }
                s.push('\n');
            }
            s.push_str("\nTimings are wall-clock seconds on the machine that produced this report and are environment-dependent.\n");
        }
    }
    s
}

/// Entry point of the binary; returns the text written.
pub fn run(args: &Args) -> Result<String> {
    let cfgs = configs_from_args(args)?;
    let rep = run_comparison(&cfgs)?;
    let text = emit_comparison(&rep, args.format);
    match &args.out {
        Some(p) => std::fs::write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(text)
}

/// Process exit code for an error category.
pub fn exit_code(err: &Error) -> i32 {
    match err.category() {
        "config" | "capability" => 2,
        "parse" | "structure" | "io" => 3,
        "not-spd" | "convergence" | "conditioning" => 4,
        _ => 1,
    }
}
