//! Search, certification and reporting drivers behind the command line.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{certify, cells_with_prefix, sweep_cells, Certificate, CertifyOptions};
use crate::error::{Error, Result};
use crate::kernel::{
    discrepancy_squared_in, periodic_l2_discrepancy, wce, wce_squared_in, Gamma, MetricValue,
};
use crate::lattice::{lattice_sigma, rank1_lattice, LatticeSpec};
use crate::optimize::{alternating_minimize, cell_gradient, CellProblem, CellResult, SolveOptions, DEFAULT_EPS, DEFAULT_MAX_ITER};
use crate::perm::{is_semi_canonical, Permutation};
use crate::pointfile::{format_points_exact, format_points_f64, read_points, write_text};
use crate::scalar::{exact_sqrt, format_rational, Rational, Scalar, ScalarMode};
use crate::torus::{equivalent, normalize, PointSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const PROGRESS_EVERY: u64 = 10_000;
pub const TABLE_LIMIT: usize = 12;
/// Relative objective tolerance for reporting tied optimal cells.
pub const TIE_TOLERANCE: f64 = 1e-10;
pub const LATTICE_TOLERANCE: f64 = 1e-9;
pub const RECORD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub gamma: Gamma,
    pub eps: f64,
    pub delta: Option<f64>,
    pub max_iter: usize,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub mode: ScalarMode,
    pub shard_prefix: Option<Vec<usize>>,
    pub emit_plot_data: bool,
    pub progress: bool,
}

impl RunConfig {
    pub fn new(n: usize, gamma: Gamma) -> Self {
        RunConfig {
            n,
            gamma,
            eps: DEFAULT_EPS,
            delta: None,
            max_iter: DEFAULT_MAX_ITER,
            threads: None,
            out: None,
            mode: ScalarMode::Float,
            shard_prefix: None,
            emit_plot_data: false,
            progress: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta must be positive, got {d}"));
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        self.gamma.ensure_convex()?;
        if let Some(p) = &self.shard_prefix {
            if p.first() != Some(&0) || p.len() > self.n {
                return bad(format!("shard prefix must start with 0 and fit n = {}", self.n));
            }
            let mut seen = vec![false; self.n];
            for &v in p {
                if v >= self.n || std::mem::replace(&mut seen[v], true) {
                    return bad(format!("invalid shard prefix {p:?}"));
                }
            }
        }
        Ok(())
    }

    pub fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?;
                Ok(pool.install(f))
            }
            None => Ok(f()),
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions { eps: self.eps, max_iter: self.max_iter, ..SolveOptions::default() }
    }

    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions { delta: self.delta, eps: self.eps, max_iter: self.max_iter, ..CertifyOptions::default() }
    }

    /// `results/N=<n>/gamma=<p_q>` under the output root.
    pub fn result_dir(&self) -> Option<PathBuf> {
        self.out.as_ref().map(|o| result_dir(o, self.n, &self.gamma))
    }
}

pub fn result_dir(root: &Path, n: usize, gamma: &Gamma) -> PathBuf {
    root.join(format!("N={n}")).join(format!("gamma={}", gamma.path_label()))
}

/// Parses a cell or prefix written as `0 2 4`, `0,2,4` or `(0 2 4)`.
pub fn parse_prefix(s: &str) -> Result<Vec<usize>> {
    s.trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(|c: char| c.is_whitespace() || c == ',' || c == '-')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| Error::Config(format!("bad prefix entry {t:?}"))))
        .collect()
}

fn prefix_label(p: &[usize]) -> String {
    p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
}

struct Progress<'a> {
    count: &'a AtomicU64,
    enabled: bool,
    label: &'a str,
}

impl Progress<'_> {
    fn tick(&self) {
        let c = self.count.fetch_add(1, Ordering::Relaxed) + 1;
        if self.enabled && c % PROGRESS_EVERY == 0 {
            eprintln!("{}: {c} cells", self.label);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SearchRecord {
    pub n: usize,
    pub gamma: String,
    pub sigma: String,
    /// Cells whose local minimum ties the best one.
    pub optimal_cells: Vec<String>,
    pub points: Vec<[f64; 2]>,
    pub objective: f64,
    pub wce: f64,
    pub discrepancy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wce_squared_exact: Option<String>,
    pub cells_scanned: u64,
    pub semi_canonical_cells: u64,
    pub unsolved: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shard_prefix: Option<String>,
    pub wall_time_seconds: f64,
    pub version: String,
}

impl SearchRecord {
    pub fn point_set(&self) -> Result<PointSet<f64>> {
        let (xs, ys) = self.points.iter().map(|p| (p[0], p[1])).unzip();
        PointSet::from_coords(xs, ys)
    }

    pub fn gamma(&self) -> Result<Gamma> {
        Gamma::parse(&self.gamma)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes") + "\n"
    }

    /// Parses a record and checks the stored metrics against the stored
    /// points.
    pub fn from_json(text: &str) -> Result<Self> {
        let rec: SearchRecord = serde_json::from_str(text)?;
        rec.revalidate()?;
        Ok(rec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn revalidate(&self) -> Result<()> {
        let p = self.point_set()?;
        if p.n() != self.n {
            return Err(Error::Validation(format!("{} points stored for n = {}", p.n(), self.n)));
        }
        let w = wce(&p, &self.gamma()?)?;
        let d = periodic_l2_discrepancy(&p)?;
        if (w - self.wce).abs() > RECORD_TOLERANCE || (d - self.discrepancy).abs() > RECORD_TOLERANCE {
            return Err(Error::Validation(format!(
                "stored wce {} / discrepancy {} do not match recomputed {w} / {d}",
                self.wce, self.discrepancy
            )));
        }
        let sigma = lattice_sigma(&p)?;
        if sigma.to_string() != self.sigma {
            return Err(Error::Validation(format!("stored cell {} but points lie in {sigma}", self.sigma)));
        }
        Ok(())
    }
}

/// Outcome of sweeping a set of cells.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub best: Option<(Permutation, CellResult)>,
    pub ties: Vec<(Permutation, f64)>,
    pub unsolved: Vec<Permutation>,
    pub scanned: u64,
    pub semi_canonical: u64,
}

impl Sweep {
    fn empty() -> Self {
        Sweep { best: None, ties: Vec::new(), unsolved: Vec::new(), scanned: 0, semi_canonical: 0 }
    }

    fn tolerance(best: f64) -> f64 {
        TIE_TOLERANCE * best.abs().max(1.0)
    }

    fn add(&mut self, sigma: Permutation, r: CellResult) {
        self.scanned += 1;
        self.semi_canonical += is_semi_canonical(&sigma) as u64;
        if !r.converged() {
            self.unsolved.push(sigma);
            return;
        }
        let obj = r.objective;
        self.ties.push((sigma.clone(), obj));
        let better = match &self.best {
            None => true,
            Some((s, b)) => obj < b.objective || (obj == b.objective && sigma < *s),
        };
        if better {
            self.best = Some((sigma, r));
        }
        self.prune();
    }

    fn prune(&mut self) {
        if let Some((_, b)) = &self.best {
            let limit = b.objective + Self::tolerance(b.objective);
            self.ties.retain(|(_, o)| *o <= limit);
        }
    }

    /// Merges shard results; the outcome does not depend on the order in
    /// which cells were visited inside a shard or across threads.
    fn merge(mut self, other: Sweep) -> Sweep {
        self.scanned += other.scanned;
        self.semi_canonical += other.semi_canonical;
        self.unsolved.extend(other.unsolved);
        self.ties.extend(other.ties);
        if let Some((s, r)) = other.best {
            let better = match &self.best {
                None => true,
                Some((bs, b)) => r.objective < b.objective || (r.objective == b.objective && s < *bs),
            };
            if better {
                self.best = Some((s, r));
            }
        }
        self.prune();
        self
    }
}

/// Solves every cell (or those under `prefix`) and keeps the best.
pub fn sweep(n: usize, gamma: &Gamma, prefix: Option<&[usize]>, opts: &SolveOptions, progress: bool) -> Sweep {
    let count = AtomicU64::new(0);
    let tick = Progress { count: &count, enabled: progress, label: "optimize" };
    let shards = match prefix {
        Some(p) if p.len() >= 3.min(n.saturating_sub(1)) || n == 1 => vec![p.to_vec()],
        Some(p) => sweep_cells(n).into_iter().filter(|s| s.starts_with(p)).collect(),
        None => sweep_cells(n),
    };
    let parts: Vec<Sweep> = shards
        .into_par_iter()
        .map(|shard| {
            let mut acc = Sweep::empty();
            for sigma in cells_with_prefix(n, &shard) {
                let r = alternating_minimize(&CellProblem::new(gamma.clone(), sigma.clone()), opts);
                tick.tick();
                match r {
                    Ok(r) => acc.add(sigma, r),
                    Err(_) => {
                        acc.scanned += 1;
                        acc.semi_canonical += is_semi_canonical(&sigma) as u64;
                        acc.unsolved.push(sigma);
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = parts.into_iter().fold(Sweep::empty(), Sweep::merge);
    out.ties.sort_by(|a, b| a.0.cmp(&b.0));
    out.unsolved.sort();
    out
}

fn metrics_exact(p: &PointSet<f64>, gamma: &Gamma) -> Result<String> {
    let exact = p.to_exact()?;
    Ok(match wce_squared_in(ScalarMode::Exact, &exact, gamma) {
        MetricValue::Exact(r) => format_rational(&r),
        MetricValue::Float(v) => v.to_string(),
    })
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub record: SearchRecord,
    pub files: Vec<PathBuf>,
}

impl OptimizeOutcome {
    /// 0 when every cell was solved, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.record.unsolved.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Global search over all cells (or one shard).
pub fn cmd_optimize(cfg: &RunConfig) -> Result<OptimizeOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let opts = cfg.solve_options();
    let sw = cfg.run(|| sweep(cfg.n, &cfg.gamma, cfg.shard_prefix.as_deref(), &opts, cfg.progress))?;
    let Some((sigma, best)) = sw.best.clone() else {
        return Err(Error::Validation(format!(
            "no cell solved ({} scanned, {} unsolved)",
            sw.scanned,
            sw.unsolved.len()
        )));
    };
    let points = best.points()?;
    let record = SearchRecord {
        n: cfg.n,
        gamma: cfg.gamma.to_string(),
        sigma: sigma.to_string(),
        optimal_cells: sw.ties.iter().map(|(s, _)| s.to_string()).collect(),
        points: points.points().iter().map(|q| [q.x, q.y]).collect(),
        objective: best.objective,
        wce: wce(&points, &cfg.gamma)?,
        discrepancy: periodic_l2_discrepancy(&points)?,
        wce_squared_exact: match cfg.mode {
            ScalarMode::Exact => Some(metrics_exact(&points, &cfg.gamma)?),
            ScalarMode::Float => None,
        },
        cells_scanned: sw.scanned,
        semi_canonical_cells: sw.semi_canonical,
        unsolved: sw.unsolved.iter().map(|s| s.to_string()).collect(),
        shard_prefix: cfg.shard_prefix.as_deref().map(prefix_label),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
    };
    let mut files = Vec::new();
    if let Some(dir) = cfg.result_dir() {
        let name = match &record.shard_prefix {
            Some(p) => format!("record-shard-{p}.json"),
            None => "record.json".to_string(),
        };
        write_text(&dir.join(&name), &record.to_json())?;
        files.push(dir.join(name));
        if record.shard_prefix.is_none() {
            let header = format!("n = {}, gamma = {}, cell {}", cfg.n, cfg.gamma, record.sigma);
            write_text(&dir.join("points.txt"), &format_points_f64(&points, &header))?;
            files.push(dir.join("points.txt"));
            if cfg.emit_plot_data {
                files.push(write_plot_data(cfg.out.as_ref().unwrap(), cfg.n, &cfg.gamma, &points)?);
            }
        }
    }
    Ok(OptimizeOutcome { record, files })
}

/// Combines shard records into the record of the full sweep.
pub fn merge_records(records: &[SearchRecord]) -> Result<SearchRecord> {
    let best = records
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective).then_with(|| a.sigma.cmp(&b.sigma)))
        .ok_or_else(|| Error::Validation("no records to merge".into()))?;
    let tol = best.objective + Sweep::tolerance(best.objective);
    let mut ties: Vec<(Permutation, String)> = Vec::new();
    for r in records.iter().filter(|r| r.objective <= tol) {
        for s in &r.optimal_cells {
            ties.push((s.parse()?, s.clone()));
        }
    }
    let mut unsolved: Vec<(Permutation, String)> = Vec::new();
    for r in records {
        for s in &r.unsolved {
            unsolved.push((s.parse()?, s.clone()));
        }
    }
    ties.sort();
    unsolved.sort();
    let mut out = best.clone();
    out.optimal_cells = ties.into_iter().map(|t| t.1).collect();
    out.unsolved = unsolved.into_iter().map(|t| t.1).collect();
    out.cells_scanned = records.iter().map(|r| r.cells_scanned).sum();
    out.semi_canonical_cells = records.iter().map(|r| r.semi_canonical_cells).sum();
    out.wall_time_seconds = records.iter().map(|r| r.wall_time_seconds).sum();
    out.shard_prefix = None;
    Ok(out)
}

fn write_plot_data(root: &Path, n: usize, gamma: &Gamma, p: &PointSet<f64>) -> Result<PathBuf> {
    let path = root.join("plots").join(format!("gamma={}", gamma.path_label())).join(format!("N={n}.dat"));
    write_text(&path, &format_points_f64(p, &format!("optimal points, n = {n}, gamma = {gamma}")))?;
    Ok(path)
}

/// Certifies the point set in `candidate_file`.
pub fn cmd_certify(cfg: &RunConfig, candidate_file: &Path) -> Result<Certificate> {
    cfg.validate()?;
    let candidate = read_points(candidate_file)?;
    certify_points(cfg, &candidate)
}

pub fn certify_points(cfg: &RunConfig, candidate: &PointSet<Rational>) -> Result<Certificate> {
    cfg.validate()?;
    let opts = cfg.certify_options();
    let cert = cfg.run(|| certify(cfg.n, &cfg.gamma, candidate, &opts))??;
    if let Some(dir) = cfg.result_dir() {
        let text = serde_json::to_string_pretty(&cert.to_json())? + "\n";
        write_text(&dir.join("certificate.json"), &text)?;
    }
    Ok(cert)
}

/// Short machine-readable certificate summary (no per-cell records).
pub fn certificate_summary(cert: &Certificate) -> serde_json::Value {
    let mut v = cert.to_json();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("cells");
    }
    v
}

/// The generator `g` of a rank-1 lattice equivalent to `p`, if any.
pub fn detect_lattice(p: &PointSet<f64>) -> Option<usize> {
    LatticeSpec::generators(p.n()).find_map(|spec| {
        let l = rank1_lattice(spec).to_f64();
        matches!(equivalent(p, &l, &LATTICE_TOLERANCE), Ok(true)).then_some(spec.g())
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub cells: u64,
    pub wce: f64,
    pub discrepancy: f64,
    pub sigma: Vec<String>,
    pub lattice: bool,
}

/// Table of optimal cells for `N = 1..n_max`: semi-canonical cell count,
/// optimal worst-case error at γ = 1, periodic L2-discrepancy of the γ = 6
/// optimum, the optimal semi-canonical cells and whether the optimum is a
/// lattice.
pub fn cmd_table(n_max: usize, cfg: &RunConfig) -> Result<Vec<TableRow>> {
    if n_max > TABLE_LIMIT {
        return Err(Error::TooLarge { what: "table size", n: n_max, limit: TABLE_LIMIT });
    }
    let one = Gamma::integer(1)?;
    let six = Gamma::integer(6)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let mut c1 = RunConfig { n, gamma: one.clone(), shard_prefix: None, ..cfg.clone() };
        let r1 = cmd_optimize(&c1)?.record;
        c1.gamma = six.clone();
        let r6 = cmd_optimize(&c1)?.record;
        let p1 = r1.point_set()?;
        let sc: Vec<String> = r1
            .optimal_cells
            .iter()
            .filter(|s| s.parse::<Permutation>().map(|p| is_semi_canonical(&p)).unwrap_or(false))
            .cloned()
            .collect();
        let sigma = if n == 1 {
            vec!["(0)".to_string()]
        } else if sc.is_empty() {
            r1.optimal_cells.clone()
        } else {
            sc
        };
        rows.push(TableRow {
            n,
            cells: r1.semi_canonical_cells,
            wce: r1.wce,
            discrepancy: r6.discrepancy,
            sigma,
            lattice: detect_lattice(&p1).is_some(),
        });
    }
    Ok(rows)
}

pub fn format_table(rows: &[TableRow]) -> String {
    let mut s = format!("{:>3} | {:>10} | {:>10} | {:>10} | {:<7} | sigma*\n", "N", "|C_N|", "wce", "D2", "lattice");
    for r in rows {
        s += &format!(
            "{:>3} | {:>10} | {:>10.6} | {:>10.6} | {:<7} | {}\n",
            r.n,
            r.cells,
            r.wce,
            r.discrepancy,
            if r.lattice { "yes" } else { "" },
            r.sigma.join(", ")
        );
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub n: usize,
    pub gamma: String,
    pub wce: f64,
    pub discrepancy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wce_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wce_squared_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy_squared_exact: Option<String>,
    pub sigma: Option<String>,
    pub gradient_residual: Option<f64>,
    pub lattice_generator: Option<usize>,
}

/// Metrics, cell and stationarity of the points in a file.
pub fn cmd_eval(points_file: &Path, gamma: &Gamma, mode: ScalarMode) -> Result<EvalReport> {
    eval_points(&read_points(points_file)?, gamma, mode)
}

pub fn eval_points(p: &PointSet<Rational>, gamma: &Gamma, mode: ScalarMode) -> Result<EvalReport> {
    let pf = p.to_f64();
    let (wce_exact, wce_squared_exact, discrepancy_squared_exact) = match mode {
        ScalarMode::Float => (None, None, None),
        ScalarMode::Exact => {
            let w2 = match wce_squared_in(ScalarMode::Exact, p, gamma) {
                MetricValue::Exact(r) => r,
                MetricValue::Float(_) => unreachable!(),
            };
            let d2 = match discrepancy_squared_in(ScalarMode::Exact, p) {
                MetricValue::Exact(r) => r,
                MetricValue::Float(_) => unreachable!(),
            };
            (exact_sqrt(&w2).map(|r| format_rational(&r)), Some(format_rational(&w2)), Some(format_rational(&d2)))
        }
    };
    let normalized = normalize(p);
    let (sigma, residual) = match lattice_sigma(&normalized) {
        Ok(sigma) => {
            let (gx, gy) = cell_gradient(&normalized.xs(), &normalized.ys(), gamma.exact(), &sigma);
            let res = gx[1..].iter().chain(&gy[1..]).map(|g| g.to_f64().abs()).fold(0.0f64, f64::max);
            (Some(sigma.to_string()), Some(res))
        }
        Err(_) => (None, None),
    };
    Ok(EvalReport {
        n: p.n(),
        gamma: gamma.to_string(),
        wce: wce(p, gamma)?,
        discrepancy: periodic_l2_discrepancy(p)?,
        wce_exact,
        wce_squared_exact,
        discrepancy_squared_exact,
        sigma,
        gradient_residual: residual,
        lattice_generator: detect_lattice(&pf),
    })
}

/// Points of a rank-1 lattice as exact point-file text.
pub fn cmd_lattice(spec: LatticeSpec) -> String {
    let header = format!("rank-1 lattice, n = {}, g = {}", spec.n(), spec.g());
    format_points_exact(&rank1_lattice(spec), &header)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerateReport {
    pub n: usize,
    pub semi_canonical: u64,
    pub uncovered_orbits: u64,
}

/// Counts the semi-canonical cells and the orbits they miss, in parallel
/// over shards.
pub fn cmd_enumerate(n: usize) -> EnumerateReport {
    let (sc, orphans) = sweep_cells(n)
        .into_par_iter()
        .map(|prefix| {
            cells_with_prefix(n, &prefix).fold((0u64, 0u64), |(a, b), sigma| {
                if n > 1 && is_semi_canonical(&sigma) {
                    (a + 1, b)
                } else {
                    (a, b + (n > 1) as u64)
                }
            })
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    EnumerateReport { n, semi_canonical: sc, uncovered_orbits: orphans }
}

/// Every cell of the complete sweep in lexicographic order, flagged when it
/// is semi-canonical.
pub fn list_cells(n: usize) -> impl Iterator<Item = (Permutation, bool)> {
    sweep_cells(n).into_iter().flat_map(move |prefix| {
        cells_with_prefix(n, &prefix).map(move |sigma| {
            let semi = n > 1 && is_semi_canonical(&sigma);
            (sigma, semi)
        })
    })
}
