//! Command-line front end: read a config, run its task, write `report.json`
//! and one CSV per evaluated grid.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;
use serde_json::json;

use crate::conditions::{
    beta_pp_estimate, bg_indices_with, ekfr_check, growth_check, kesten_integral, kf_ratio_profile, rao_check,
    BgOptions, SplitRule,
};
use crate::config::{parse_config, OutputFormat, RunConfig, Task};
use crate::counterexample::{
    band_mass, build_spec, counterexample_beta, counterexample_triplet, explain_fit, ratio_growth, verify_window,
    window_grid, window_multipliers, CounterexampleSpec, CxMode, ToyOverrides,
};
use crate::energy::{one_energy, witness_check, EnergyOptions, SignedCF};
use crate::error::{Error, Result};
use crate::levy::{eval_grid, ExponentValue, LevyTriplet};
use crate::logreal::LogReal;
use crate::report::{log_grid, ConditionReport, Summary, Verdict};
use crate::transforms::comparison_margin;

/// Exit code for unreadable or invalid input.
pub const EXIT_INPUT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hunt-lab", version, about = "Evaluate Levy exponents and check regularity conditions on grids")]
pub struct Args {
    /// Path to the run configuration.
    pub config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Multiplier for the grid's points per decade.
    #[arg(long, default_value_t = 1)]
    pub grid_scale: usize,
    /// Reserved for sampled grids; recorded in the report.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub grid_scale: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub verdicts: Vec<Verdict>,
    pub files: Vec<PathBuf>,
}

/// A CSV cell.
#[derive(Debug, Clone, Copy)]
enum Cell {
    F(f64),
    L(LogReal),
    Empty,
}

fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::F(x) => fmt_f64(x),
            Cell::L(l) if l.sign == 0 || l.log10.abs() < 300.0 => fmt_f64(l.to_f64()),
            Cell::L(l) => l.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

struct Table {
    name: String,
    rows: Vec<[Cell; 6]>,
}

impl Table {
    fn render(&self) -> String {
        let mut s = String::from("z,re_psi,im_psi,A,B,margin\n");
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.render()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

fn row(z: f64, v: Option<&ExponentValue>, margin: Option<f64>) -> [Cell; 6] {
    let m = margin.map_or(Cell::Empty, Cell::F);
    match v {
        Some(v) => [Cell::F(z), Cell::F(v.re), Cell::F(v.im_signed), Cell::F(v.a()), Cell::F(v.b()), m],
        None => [Cell::F(z), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, m],
    }
}

fn table_from_report(rep: &ConditionReport) -> Table {
    Table {
        name: rep.name.clone(),
        rows: rep.samples.iter().map(|s| row(s.z, s.psi.as_ref(), Some(s.margin))).collect(),
    }
}

#[derive(Serialize)]
struct ReportEntry<'a> {
    name: &'a str,
    verdict: Verdict,
    points: usize,
    summary: Summary,
    notes: &'a [String],
    metrics: &'a std::collections::BTreeMap<String, f64>,
}

struct TaskOutput {
    reports: Vec<ConditionReport>,
    tables: Vec<Table>,
    details: serde_json::Value,
}

fn spec_of(cfg: &RunConfig) -> Result<Option<CounterexampleSpec>> {
    cfg.counterexample
        .map(|cx| {
            let o = (cx.mode == CxMode::Toy).then_some(ToyOverrides { n1: cx.n1, theta_toy: cx.theta_toy });
            build_spec(cx.alpha, cx.levels, cx.mode, o)
        })
        .transpose()
}

fn triplet_of(cfg: &RunConfig, spec: Option<&CounterexampleSpec>) -> Result<LevyTriplet> {
    let t = match spec {
        Some(s) => counterexample_triplet(s, s.k)?,
        None => LevyTriplet {
            linear: cfg.process.linear,
            gaussian: cfg.process.gaussian,
            measure: cfg.measure.clone(),
            form: cfg.process.form,
        },
    };
    t.validate()?;
    Ok(t)
}

fn need_spec(spec: Option<&CounterexampleSpec>) -> Result<&CounterexampleSpec> {
    spec.ok_or_else(|| Error::Validation("this task needs a [counterexample] section".into()))
}

fn run_task(cfg: &RunConfig, grid: &[f64]) -> Result<TaskOutput> {
    let spec = spec_of(cfg)?;
    let spec = spec.as_ref();
    let mut out = TaskOutput { reports: Vec::new(), tables: Vec::new(), details: json!({}) };
    match cfg.task {
        Task::Eval => {
            let t = triplet_of(cfg, spec)?;
            let vals = eval_grid(&t, grid)?;
            out.tables.push(Table {
                name: "eval".into(),
                rows: grid.iter().zip(&vals).map(|(z, v)| row(*z, Some(v), None)).collect(),
            });
            out.details = json!({ "points": grid.len() });
        }
        Task::CheckKf => out.reports.push(kf_ratio_profile(&triplet_of(cfg, spec)?, grid)?),
        Task::CheckRao { gauge } => {
            match spec {
                Some(s) => {
                    let n = cfg.counterexample.map_or(33, |c| c.samples);
                    // per-window margins need a float triplet; past that only the log-space growth report runs
                    if s.representable(s.k) {
                        let t = triplet_of(cfg, spec)?;
                        for k in 1..=s.k {
                            let mut r = rao_check(&t, &gauge, &window_grid(s, k, n)?)?;
                            r.name = format!("rao-window-{k}");
                            out.reports.push(r);
                        }
                    }
                    let ks: Vec<usize> = (1..=s.k).collect();
                    out.reports.push(ratio_growth(s, &ks, &window_multipliers(n))?);
                }
                None => out.reports.push(rao_check(&triplet_of(cfg, None)?, &gauge, grid)?),
            }
        }
        Task::CheckEkfr { gauge } => out.reports.push(ekfr_check(
            &triplet_of(cfg, spec)?,
            &gauge,
            cfg.grid.zlo,
            cfg.grid.zhi,
            SplitRule::Default,
        )?),
        Task::CheckGrowth { gamma, growth } => {
            out.reports.push(growth_check(&triplet_of(cfg, spec)?, gamma, growth, grid)?)
        }
        Task::Indices => match spec {
            Some(s) => {
                let beta_pp = if s.representable(s.k) {
                    let t = counterexample_triplet(s, s.k)?;
                    let o = BgOptions::default();
                    Some(beta_pp_estimate(&t, &log_grid(o.zlo, o.zhi, o.per_decade))?)
                } else {
                    None
                };
                out.details = json!({
                    "beta": counterexample_beta(s),
                    "beta_pp_estimate": beta_pp,
                    "beta_pp_claimed_upper": s.alpha - 4.0 / s.theta,
                });
            }
            None => {
                let ix = bg_indices_with(&triplet_of(cfg, None)?, &BgOptions::default())?;
                out.details = serde_json::to_value(ix).map_err(|e| Error::Io(e.to_string()))?;
            }
        },
        Task::Compare { delta, lambda } => {
            out.reports.push(comparison_margin(&triplet_of(cfg, spec)?, delta, lambda, grid)?)
        }
        Task::Construct => {
            let s = need_spec(spec)?;
            let masses: Vec<LogReal> = (1..=s.k).map(|k| band_mass(s, k)).collect();
            let fit = if s.k >= 4 { Some(explain_fit(s)?) } else { None };
            out.details = json!({
                "spec": s,
                "recursion_residuals": s.recursion_residuals(),
                "recursion_residuals_rel": s.recursion_residuals_rel(),
                "band_masses": masses,
                "explain_fit": fit,
                "note": "any recursion constant larger than c keeps every window estimate valid",
            });
        }
        Task::VerifyCx => {
            let s = need_spec(spec)?;
            let n = cfg.counterexample.map_or(33, |c| c.samples);
            let sv = window_multipliers(n);
            let mut windows = Vec::new();
            for k in 1..=s.k {
                let w = verify_window(s, k, &sv)?;
                let hgf7 = w.bound("hgf7").map(|b| b.margins.clone()).unwrap_or_default();
                let mut rows = Vec::new();
                let mut samples = Vec::new();
                for i in 0..w.s.len() {
                    let psi = crate::counterexample::LogPsi { re: w.re_psi[i], im: w.im_psi[i] };
                    let z = LogReal::from_log10(w.log10_z[i]);
                    rows.push([
                        Cell::L(z),
                        Cell::L(psi.re),
                        Cell::L(psi.im),
                        Cell::L(psi.a()),
                        Cell::L(psi.b()),
                        Cell::F(hgf7[i]),
                    ]);
                    samples.push(crate::report::Sample::new(z.to_f64(), None, hgf7[i], 0.0));
                }
                let mut rep = ConditionReport::with_verdict(&format!("window-{k}"), samples, w.verdict())
                    .note("margin column: relative margin of the lower Im bound on the window");
                for b in &w.bounds {
                    rep = rep.metric(&format!("min_margin_{}", b.name), b.min_margin());
                    if !b.enforced {
                        rep = rep.note(format!("{} reported only (not enforced in this mode)", b.name));
                    }
                }
                out.tables.push(Table { name: format!("window-{k}"), rows });
                out.reports.push(rep);
                windows.push(w);
            }
            out.details = json!({ "spec": s, "windows": windows });
        }
        Task::Energy => {
            let s = need_spec(spec)?;
            let cf = SignedCF::new(s, s.k)?;
            let opts = EnergyOptions::default();
            let e = one_energy(&cf, &opts)?;
            let (w, wrep) = witness_check(&cf, &opts)?;
            out.details = json!({
                "contributions": e.contributions,
                "partial_sums": e.partial_sums,
                "witness": w,
                "levels_disjoint": cf.levels_disjoint(),
            });
            out.reports.push(e.bound_check);
            out.reports.push(wrep);
        }
        Task::Kesten => {
            let k = kesten_integral(&triplet_of(cfg, spec)?, cfg.grid.zhi)?;
            out.details = json!({ "partial": k.partial, "tail_exponent": k.tail_exponent, "diagnosis": k.diagnosis });
            out.reports.push(k.report);
        }
    }
    if !matches!(cfg.task, Task::VerifyCx) {
        let t: Vec<Table> =
            out.reports.iter().filter(|r| r.samples.iter().any(|s| s.psi.is_some())).map(table_from_report).collect();
        out.tables.extend(t);
    }
    Ok(out)
}

/// Run a parsed config; files are staged as temporaries and only moved into
/// place once everything has been computed and written.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let scale = opts.grid_scale.max(1);
    let grid = log_grid(cfg.grid.zlo, cfg.grid.zhi, cfg.grid.points_per_decade * scale);
    let out = run_task(cfg, &grid)?;
    let verdicts: Vec<Verdict> = out.reports.iter().map(|r| r.verdict).collect();
    let exit_code = Verdict::exit_code(&verdicts);

    let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    std::fs::create_dir_all(&dir)?;
    let mut staged: Vec<(tempfile::NamedTempFile, PathBuf)> = Vec::new();
    let mut stage = |name: &str, body: &[u8]| -> Result<()> {
        let mut f = tempfile::NamedTempFile::new_in(&dir)?;
        f.write_all(body)?;
        f.flush()?;
        staged.push((f, dir.join(name)));
        Ok(())
    };
    if cfg.output.formats.contains(&OutputFormat::Csv) {
        for t in &out.tables {
            stage(&format!("{}.csv", t.name), t.render().as_bytes())?;
        }
    }
    if cfg.output.formats.contains(&OutputFormat::Json) {
        let entries: Vec<ReportEntry> = out
            .reports
            .iter()
            .map(|r| ReportEntry {
                name: &r.name,
                verdict: r.verdict,
                points: r.samples.len(),
                summary: r.summary,
                notes: &r.notes,
                metrics: &r.metrics,
            })
            .collect();
        let doc = json!({
            "tool": "hunt-lab",
            "version": env!("CARGO_PKG_VERSION"),
            "task": cfg.task.name(),
            "exit_code": exit_code,
            "grid_scale": scale,
            "seed": opts.seed,
            "reports": entries,
            "details": out.details,
            "config": cfg.to_text(),
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
        stage("report.json", text.as_bytes())?;
    }
    let mut files = Vec::new();
    for (tmp, path) in staged {
        tmp.persist(&path).map_err(|e| Error::Io(e.to_string()))?;
        files.push(path);
    }
    Ok(RunOutcome { exit_code, verdicts, files })
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Full command line handling; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = load(&args.config)
        .and_then(|cfg| run(&cfg, &RunOptions { out: args.out.clone(), grid_scale: args.grid_scale, seed: args.seed }));
    match result {
        Ok(o) => o.exit_code,
        Err(e) => {
            eprintln!("hunt-lab: {e}");
            EXIT_INPUT_ERROR
        }
    }
}

/// Apply `HUNT_LAB_THREADS` to the global thread pool.
pub fn init_threads() {
    if let Some(n) = std::env::var("HUNT_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_render_losslessly() {
        let x = 0.1f64;
        let s = Cell::F(x).render();
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(Cell::L(LogReal::from_log10(597.5)).render(), "3.16227766016838e597");
        assert_eq!(Cell::Empty.render(), "");
    }
}
