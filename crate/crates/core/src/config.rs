//! Run configuration: `[section]` headers followed by `key = value` lines,
//! `#` comments, repeated `[measure]` sections accumulating components.
//!
//! ```text
//! [process]
//! form = drift
//! linear = 0
//!
//! [measure]
//! family = stable-tail
//! coeff = 1
//! alpha = 0.5
//!
//! [task]
//! kind = eval
//!
//! [grid]
//! zlo = 0.01
//! zhi = 10000
//! points_per_decade = 20
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::conditions::{GaugeFunction, GrowthKind};
use crate::counterexample::CxMode;
use crate::density::LogMode;
use crate::error::{Error, Result};
use crate::levy::{Family, Form, MeasureComponent, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSection {
    pub form: Form,
    pub linear: f64,
    pub gaussian: f64,
}

impl Default for ProcessSection {
    fn default() -> Self {
        ProcessSection { form: Form::General, linear: 0.0, gaussian: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CxSection {
    pub alpha: f64,
    pub levels: usize,
    pub mode: CxMode,
    /// Toy mode only.
    pub n1: f64,
    /// Toy mode only.
    pub theta_toy: f64,
    /// Points per window.
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    pub zlo: f64,
    pub zhi: f64,
    pub points_per_decade: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { zlo: 1e-2, zhi: 1e4, points_per_decade: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: "out".into(), formats: vec![OutputFormat::Csv, OutputFormat::Json] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    Eval,
    CheckKf,
    CheckRao { gauge: GaugeFunction },
    CheckEkfr { gauge: GaugeFunction },
    CheckGrowth { gamma: f64, growth: GrowthKind },
    Indices,
    Compare { delta: f64, lambda: f64 },
    Construct,
    VerifyCx,
    Energy,
    Kesten,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Eval => "eval",
            Task::CheckKf => "check-kf",
            Task::CheckRao { .. } => "check-rao",
            Task::CheckEkfr { .. } => "check-ekfr",
            Task::CheckGrowth { .. } => "check-growth",
            Task::Indices => "indices",
            Task::Compare { .. } => "compare",
            Task::Construct => "construct",
            Task::VerifyCx => "verify-cx",
            Task::Energy => "energy",
            Task::Kesten => "kesten",
        }
    }

    fn needs_counterexample(&self) -> bool {
        matches!(self, Task::Construct | Task::VerifyCx | Task::Energy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub process: ProcessSection,
    pub measure: Vec<MeasureComponent>,
    pub counterexample: Option<CxSection>,
    pub task: Task,
    pub grid: GridSection,
    pub output: OutputSection,
}

// ---- parsing ----

struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn req(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key)
            .ok_or_else(|| Error::Validation(format!("[{}] at line {}: missing key \"{key}\"", self.name, self.line)))
    }

    fn f64_req(&mut self, key: &str) -> Result<f64> {
        let (l, v) = self.req(key)?;
        parse_f64(l, key, &v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            Some((l, v)) => parse_f64(l, key, &v),
            None => Ok(default),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            Some((l, v)) => v.parse().map_err(|_| Error::Parse {
                line: l,
                msg: format!("\"{key}\" must be a non-negative integer, got {v:?}"),
            }),
            None => Ok(default),
        }
    }

    /// Reject whatever the section did not consume.
    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            Some((k, (l, _))) => Err(Error::Validation(format!("line {l}: unknown key \"{k}\" in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| !x.is_nan())
        .ok_or_else(|| Error::Parse { line, msg: format!("\"{key}\" must be a number, got {v:?}") })
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_f64(line, key, s.trim())).collect()
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line, msg: format!("malformed section header {s:?}") })?
                .trim();
            if !matches!(name, "process" | "measure" | "task" | "grid" | "output" | "counterexample") {
                return Err(Error::Parse { line, msg: format!("unknown section [{name}]") });
            }
            out.push(Section { name: name.to_string(), line, entries: BTreeMap::new() });
            continue;
        }
        let (k, v) =
            s.split_once('=').ok_or_else(|| Error::Parse { line, msg: format!("expected key = value, got {s:?}") })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Parse { line, msg: "empty key".into() });
        }
        let sec = out.last_mut().ok_or_else(|| Error::Parse { line, msg: "entry before any section header".into() })?;
        if k == "kind" && sec.name == "task" && sec.entries.contains_key("kind") {
            return Err(Error::Validation(format!("line {line}: exactly one task per configuration")));
        }
        if sec.entries.insert(k.to_string(), (line, v.to_string())).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key \"{k}\"") });
        }
    }
    Ok(out)
}

fn parse_side(sec: &mut Section) -> Result<Side> {
    match sec.take("side") {
        None => Ok(Side::Positive),
        Some((l, v)) => match v.as_str() {
            "positive" => Ok(Side::Positive),
            "negative" => Ok(Side::Negative),
            "symmetric" => Ok(Side::Symmetric),
            _ => Err(Error::Parse { line: l, msg: format!("unknown side {v:?}") }),
        },
    }
}

fn parse_measure(mut sec: Section) -> Result<MeasureComponent> {
    let (l, fam) = sec.req("family")?;
    let family = match fam.as_str() {
        "power-band" => Family::PowerBand {
            coeff: sec.f64_or("coeff", 1.0)?,
            alpha: sec.f64_req("alpha")?,
            lower: sec.f64_req("lower")?,
            upper: sec.f64_req("upper")?,
        },
        "stable-tail" => Family::StableTail { coeff: sec.f64_or("coeff", 1.0)?, alpha: sec.f64_req("alpha")? },
        "log-power-band" => {
            let mode = match sec.take("mode") {
                None => LogMode::Reciprocal,
                Some((l, v)) => match v.as_str() {
                    "reciprocal" => LogMode::Reciprocal,
                    "direct" => LogMode::Direct,
                    _ => return Err(Error::Parse { line: l, msg: format!("unknown log mode {v:?}") }),
                },
            };
            Family::LogPowerBand {
                coeff: sec.f64_or("coeff", 1.0)?,
                alpha: sec.f64_req("alpha")?,
                lower: sec.f64_req("lower")?,
                upper: sec.f64_req("upper")?,
                mode,
            }
        }
        "atoms" => {
            let (l, v) = sec.req("atoms")?;
            let atoms = v
                .split(',')
                .map(|p| {
                    let (x, w) = p
                        .split_once(':')
                        .ok_or_else(|| Error::Parse { line: l, msg: format!("atom {p:?} must be location:weight") })?;
                    Ok((parse_f64(l, "atoms", x.trim())?, parse_f64(l, "atoms", w.trim())?))
                })
                .collect::<Result<_>>()?;
            Family::Atoms { atoms }
        }
        "tabulated" => {
            let (lk, k) = sec.req("knots")?;
            let (lv, v) = sec.req("values")?;
            Family::Tabulated { knots: parse_list(lk, "knots", &k)?, values: parse_list(lv, "values", &v)? }
        }
        _ => return Err(Error::Parse { line: l, msg: format!("unknown family {fam:?}") }),
    };
    let side = parse_side(&mut sec)?;
    sec.finish()?;
    let c = MeasureComponent { family, side };
    c.validate()?;
    Ok(c)
}

fn parse_gauge(line: usize, v: &str) -> Result<GaugeFunction> {
    let (name, arg) = match v.split_once(':') {
        Some((n, a)) => (n.trim(), Some(parse_f64(line, "gauge", a.trim())?)),
        None => (v.trim(), None),
    };
    let g = match (name, arg) {
        ("log", None) => GaugeFunction::Log,
        ("constant", Some(m)) => GaugeFunction::Constant { m },
        ("log-power", Some(p)) => GaugeFunction::LogPower { p },
        ("power", Some(eps)) => GaugeFunction::Power { eps },
        _ => return Err(Error::Parse { line, msg: format!("unknown gauge {v:?}") }),
    };
    g.validate()?;
    Ok(g)
}

fn parse_task(mut sec: Section) -> Result<Task> {
    let (l, kind) = sec.req("kind")?;
    let task = match kind.as_str() {
        "eval" => Task::Eval,
        "check-kf" => Task::CheckKf,
        "check-rao" | "check-ekfr" => {
            let gauge = match sec.take("gauge") {
                Some((l, v)) => parse_gauge(l, &v)?,
                None => GaugeFunction::Log,
            };
            if kind == "check-rao" {
                Task::CheckRao { gauge }
            } else {
                Task::CheckEkfr { gauge }
            }
        }
        "check-growth" => {
            let growth = match sec.take("growth") {
                None => GrowthKind::Re,
                Some((l, v)) => match v.as_str() {
                    "re" => GrowthKind::Re,
                    "abs" => GrowthKind::Abs,
                    _ => return Err(Error::Parse { line: l, msg: format!("unknown growth kind {v:?}") }),
                },
            };
            Task::CheckGrowth { gamma: sec.f64_req("gamma")?, growth }
        }
        "indices" => Task::Indices,
        "compare" => Task::Compare { delta: sec.f64_req("delta")?, lambda: sec.f64_req("lambda")? },
        "construct" => Task::Construct,
        "verify-cx" => Task::VerifyCx,
        "energy" => Task::Energy,
        "kesten" => Task::Kesten,
        _ => return Err(Error::Parse { line: l, msg: format!("unknown task {kind:?}") }),
    };
    sec.finish()?;
    Ok(task)
}

fn parse_cx(mut sec: Section) -> Result<CxSection> {
    let mode = match sec.take("mode") {
        None => CxMode::Toy,
        Some((l, v)) => match v.as_str() {
            "toy" => CxMode::Toy,
            "paper-log" => CxMode::PaperLog,
            _ => return Err(Error::Parse { line: l, msg: format!("unknown mode {v:?}") }),
        },
    };
    let alpha = sec.f64_req("alpha")?;
    let levels = sec.usize_or("levels", 3)?;
    let samples = sec.usize_or("samples", 33)?;
    let (n1, theta_toy) =
        if mode == CxMode::Toy { (sec.f64_or("n1", 64.0)?, sec.f64_or("theta_toy", 2.0)?) } else { (0.0, 0.0) };
    sec.finish()?;
    if samples < 2 {
        return Err(Error::Validation("\"samples\" must be at least 2".into()));
    }
    Ok(CxSection { alpha, levels, mode, n1, theta_toy, samples })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let sections = split_sections(text)?;
    let mut process = None;
    let mut measure = Vec::new();
    let mut task = None;
    let mut grid = None;
    let mut output = None;
    let mut counterexample = None;
    for mut sec in sections {
        let dup = |name: &str, line: usize| Error::Parse { line, msg: format!("section [{name}] given twice") };
        match sec.name.as_str() {
            "process" => {
                if process.is_some() {
                    return Err(dup("process", sec.line));
                }
                let form = match sec.take("form") {
                    None => Form::General,
                    Some((l, v)) => match v.as_str() {
                        "general" => Form::General,
                        "drift" => Form::Drift,
                        _ => return Err(Error::Parse { line: l, msg: format!("unknown form {v:?}") }),
                    },
                };
                let p =
                    ProcessSection { form, linear: sec.f64_or("linear", 0.0)?, gaussian: sec.f64_or("gaussian", 0.0)? };
                sec.finish()?;
                process = Some(p);
            }
            "measure" => measure.push(parse_measure(sec)?),
            "task" => {
                if task.is_some() {
                    return Err(Error::Validation(format!("line {}: exactly one task per configuration", sec.line)));
                }
                task = Some(parse_task(sec)?);
            }
            "grid" => {
                if grid.is_some() {
                    return Err(dup("grid", sec.line));
                }
                let d = GridSection::default();
                let g = GridSection {
                    zlo: sec.f64_or("zlo", d.zlo)?,
                    zhi: sec.f64_or("zhi", d.zhi)?,
                    points_per_decade: sec.usize_or("points_per_decade", d.points_per_decade)?,
                };
                sec.finish()?;
                grid = Some(g);
            }
            "output" => {
                if output.is_some() {
                    return Err(dup("output", sec.line));
                }
                let d = OutputSection::default();
                let directory = sec.take("directory").map(|(_, v)| v).unwrap_or(d.directory);
                let formats = match sec.take("formats") {
                    None => d.formats,
                    Some((l, v)) => v
                        .split(',')
                        .map(|f| match f.trim() {
                            "csv" => Ok(OutputFormat::Csv),
                            "json" => Ok(OutputFormat::Json),
                            other => Err(Error::Parse { line: l, msg: format!("unknown format {other:?}") }),
                        })
                        .collect::<Result<_>>()?,
                };
                sec.finish()?;
                output = Some(OutputSection { directory, formats });
            }
            "counterexample" => {
                if counterexample.is_some() {
                    return Err(dup("counterexample", sec.line));
                }
                counterexample = Some(parse_cx(sec)?);
            }
            _ => unreachable!("section names are checked while splitting"),
        }
    }
    let cfg = RunConfig {
        process: process.unwrap_or_default(),
        measure,
        counterexample,
        task: task.ok_or_else(|| Error::Validation("exactly one task per configuration; none given".into()))?,
        grid: grid.unwrap_or_default(),
        output: output.unwrap_or_default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.zlo > 0.0 && g.zhi > g.zlo && g.zhi.is_finite()) {
            return Err(Error::Validation(format!("grid needs 0 < zlo < zhi, got [{}, {}]", g.zlo, g.zhi)));
        }
        if g.points_per_decade == 0 {
            return Err(Error::Validation("\"points_per_decade\" must be positive".into()));
        }
        if self.output.formats.is_empty() {
            return Err(Error::Validation("\"formats\" must name at least one format".into()));
        }
        if self.task.needs_counterexample() && self.counterexample.is_none() {
            return Err(Error::Validation(format!("task {} needs a [counterexample] section", self.task.name())));
        }
        if self.counterexample.is_some() && !self.measure.is_empty() {
            return Err(Error::Validation(
                "give either [measure] sections or a [counterexample] section, not both".into(),
            ));
        }
        for c in &self.measure {
            c.validate()?;
        }
        Ok(())
    }

    /// Text form accepted by `parse_config`; every field is written out.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let form = match self.process.form {
            Form::General => "general",
            Form::Drift => "drift",
        };
        let _ = writeln!(
            s,
            "[process]\nform = {form}\nlinear = {:?}\ngaussian = {:?}\n",
            self.process.linear, self.process.gaussian
        );
        for c in &self.measure {
            s.push_str("[measure]\n");
            match &c.family {
                Family::PowerBand { coeff, alpha, lower, upper } => {
                    let _ = writeln!(s, "family = power-band\ncoeff = {coeff:?}\nalpha = {alpha:?}\nlower = {lower:?}\nupper = {upper:?}");
                }
                Family::StableTail { coeff, alpha } => {
                    let _ = writeln!(s, "family = stable-tail\ncoeff = {coeff:?}\nalpha = {alpha:?}");
                }
                Family::LogPowerBand { coeff, alpha, lower, upper, mode } => {
                    let m = match mode {
                        LogMode::Reciprocal => "reciprocal",
                        LogMode::Direct => "direct",
                    };
                    let _ = writeln!(
                        s,
                        "family = log-power-band\ncoeff = {coeff:?}\nalpha = {alpha:?}\nlower = {lower:?}\nupper = {upper:?}\nmode = {m}"
                    );
                }
                Family::Atoms { atoms } => {
                    let list: Vec<String> = atoms.iter().map(|(x, w)| format!("{x:?}:{w:?}")).collect();
                    let _ = writeln!(s, "family = atoms\natoms = {}", list.join(", "));
                }
                Family::Tabulated { knots, values } => {
                    let k: Vec<String> = knots.iter().map(|x| format!("{x:?}")).collect();
                    let v: Vec<String> = values.iter().map(|x| format!("{x:?}")).collect();
                    let _ = writeln!(s, "family = tabulated\nknots = {}\nvalues = {}", k.join(", "), v.join(", "));
                }
            }
            let side = match c.side {
                Side::Positive => "positive",
                Side::Negative => "negative",
                Side::Symmetric => "symmetric",
            };
            let _ = writeln!(s, "side = {side}\n");
        }
        if let Some(cx) = &self.counterexample {
            let mode = match cx.mode {
                CxMode::Toy => "toy",
                CxMode::PaperLog => "paper-log",
            };
            let _ = writeln!(
                s,
                "[counterexample]\nmode = {mode}\nalpha = {:?}\nlevels = {}\nsamples = {}",
                cx.alpha, cx.levels, cx.samples
            );
            if cx.mode == CxMode::Toy {
                let _ = writeln!(s, "n1 = {:?}\ntheta_toy = {:?}", cx.n1, cx.theta_toy);
            }
            s.push('\n');
        }
        let _ = writeln!(s, "[task]\nkind = {}", self.task.name());
        match self.task {
            Task::CheckRao { gauge } | Task::CheckEkfr { gauge } => {
                let g = match gauge {
                    GaugeFunction::Log => "log".to_string(),
                    GaugeFunction::Constant { m } => format!("constant:{m:?}"),
                    GaugeFunction::LogPower { p } => format!("log-power:{p:?}"),
                    GaugeFunction::Power { eps } => format!("power:{eps:?}"),
                };
                let _ = writeln!(s, "gauge = {g}");
            }
            Task::CheckGrowth { gamma, growth } => {
                let k = match growth {
                    GrowthKind::Re => "re",
                    GrowthKind::Abs => "abs",
                };
                let _ = writeln!(s, "gamma = {gamma:?}\ngrowth = {k}");
            }
            Task::Compare { delta, lambda } => {
                let _ = writeln!(s, "delta = {delta:?}\nlambda = {lambda:?}");
            }
            _ => {}
        }
        let _ = writeln!(
            s,
            "\n[grid]\nzlo = {:?}\nzhi = {:?}\npoints_per_decade = {}\n",
            self.grid.zlo, self.grid.zhi, self.grid.points_per_decade
        );
        let formats: Vec<&str> = self
            .output
            .formats
            .iter()
            .map(|f| match f {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            })
            .collect();
        let _ = writeln!(s, "[output]\ndirectory = {}\nformats = {}", self.output.directory, formats.join(", "));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STABLE: &str = "
# one-sided stable
[process]
form = drift

[measure]
family = stable-tail
alpha = 0.5

[task]
kind = eval
";

    #[test]
    fn parses_minimal() {
        let c = parse_config(STABLE).unwrap();
        assert_eq!(c.measure.len(), 1);
        assert_eq!(c.task, Task::Eval);
        assert_eq!(c.process.form, Form::Drift);
        assert_eq!(c.grid, GridSection::default());
    }

    #[test]
    fn missing_alpha_is_named() {
        let t = "[measure]\nfamily = power-band\nlower = 0.1\nupper = 1\n[task]\nkind = eval\n";
        match parse_config(t) {
            Err(Error::Validation(m)) => assert!(m.contains("\"alpha\""), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_tasks_rejected() {
        let t = format!("{STABLE}\n[task]\nkind = check-kf\n");
        match parse_config(&t) {
            Err(Error::Validation(m)) => assert!(m.contains("exactly one task"), "{m}"),
            other => panic!("{other:?}"),
        }
        let t = format!("{STABLE}kind = kesten\n");
        assert!(matches!(parse_config(&t), Err(Error::Validation(m)) if m.contains("exactly one task")));
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let t = format!("{STABLE}colour = blue\n");
        match parse_config(&t) {
            Err(Error::Validation(m)) => assert!(m.contains("colour") && m.contains("line 12"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("[task]\nkind eval\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn round_trip_all_families() {
        let t = "
[process]
form = general
linear = -0.25
gaussian = 0.5
[measure]
family = power-band
coeff = 2
alpha = 1.5
lower = 0.001
upper = 3
side = symmetric
[measure]
family = log-power-band
alpha = 0.4
lower = 0.01
upper = 0.5
mode = direct
[measure]
family = atoms
atoms = 0.5:1, 2:0.125
side = negative
[measure]
family = tabulated
knots = 0.01, 0.1, 1
values = 100, 5, 0
[task]
kind = check-growth
gamma = 0.3
growth = abs
[grid]
zlo = 0.1
zhi = 1e6
points_per_decade = 7
[output]
directory = results/x
formats = json
";
        let c = parse_config(t).unwrap();
        assert_eq!(c.measure.len(), 4);
        let back = parse_config(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn counterexample_section() {
        let t = "[counterexample]\nalpha = 0.75\nlevels = 3\n[task]\nkind = check-rao\ngauge = log\n";
        let c = parse_config(t).unwrap();
        let cx = c.counterexample.unwrap();
        assert_eq!((cx.n1, cx.theta_toy, cx.samples), (64.0, 2.0, 33));
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        let t = "[counterexample]\nmode = paper-log\nalpha = 0.75\nn1 = 5\n[task]\nkind = construct\n";
        assert!(matches!(parse_config(t), Err(Error::Validation(m)) if m.contains("n1")));
        assert!(parse_config("[task]\nkind = energy\n").is_err());
    }
}
