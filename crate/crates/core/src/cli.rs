//! Command-line front end.
//!
//! Every subcommand loads a scenario (a built-in or a JSON file), resolves a
//! functional or meter label, and prints either a human-readable table or a
//! JSON report. Output is buffered and only written when the command succeeds.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 undefined quantity
//! (zero post-selection), 4 internal numerical failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::measurement::{check_sum_rule, strong_statistics, strong_sum_rule, weak_statistics};
use crate::metersim::{
    analytic_pointer_mean, entangle_and_postselect, pointer_mean, regime_sweep, MeterConfig,
    Readout, SweepRow, DEFAULT_GRID_POINTS,
};
use crate::montecarlo::{estimate, sample_trials, trial_distribution, Partition};
use crate::pathways::{
    branches_for, enumerate_paths, BranchDecomposition, FunctionalDef, PathwaySet,
};
use crate::scenario::{builtin, parse_scenario, ScenarioSpec};

pub const VERSION: &str = concat!("weakpath ", env!("CARGO_PKG_VERSION"));

/// Null-test tolerance used by the sum-rule verdicts.
const SUM_RULE_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "weakpath",
    version,
    about = "Path amplitudes, weak values and pointer models"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every virtual path with its amplitude.
    Amplitudes {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Relative amplitudes, weak value and amplitude sum rule.
    Weak(Target),
    /// Strong-meter probabilities and post-selected mean.
    Strong(Target),
    /// Gaussian pointer mean, optionally swept over λ/σ.
    Pointer {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value = "position")]
        readout: String,
        /// `start:stop:log|lin[:points]` over λ/σ.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        /// Write an SVG plot of the sweep.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Seeded strong-measurement trials with post-selection.
    Montecarlo {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in scenario name.
    #[arg(long)]
    builtin: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Target {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    select: Selector,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Selector {
    /// Meter label (e.g. O, E').
    #[arg(long)]
    meter: Option<String>,
    /// Functional name.
    #[arg(long)]
    functional: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub scenario: String,
    pub scenario_digest: String,
    pub inputs: Value,
    pub results: Value,
    pub version: String,
}

enum Failure {
    Error(Error),
    Diagnostics(Vec<crate::scenario::Diagnostic>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidScenario(d) => Failure::Diagnostics(d),
            other => Failure::Error(other),
        }
    }
}

/// Run the CLI on `args` (including the program name). Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(Failure::Diagnostics(diags)) => {
            for d in diags {
                let _ = writeln!(err, "error: {d}");
            }
            2
        }
        Err(Failure::Error(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.exit_code() == 3 {
                let _ = writeln!(
                    err,
                    "note: the requested quantity is a ratio whose denominator (post-selection) vanishes"
                );
            }
            e.exit_code()
        }
    }
}

fn load(source: &Source) -> std::result::Result<ScenarioSpec, Failure> {
    match (&source.builtin, &source.scenario) {
        (Some(name), _) => Ok(builtin(name)?),
        (None, Some(path)) => {
            let bytes = std::fs::read(path).map_err(|e| {
                Failure::Error(Error::InvalidArgument(format!(
                    "cannot read {}: {e}",
                    path.display()
                )))
            })?;
            parse_scenario(&bytes).map_err(Failure::Diagnostics)
        }
        (None, None) => Err(Failure::Error(Error::InvalidArgument(
            "no scenario given".into(),
        ))),
    }
}

struct Loaded {
    spec: ScenarioSpec,
    paths: PathwaySet,
    name: String,
    branches: BranchDecomposition,
}

fn load_target(target: &Target) -> std::result::Result<Loaded, Failure> {
    let spec = load(&target.source)?;
    let paths = enumerate_paths(&spec)?;
    let (name, def): (String, FunctionalDef) =
        match (&target.select.meter, &target.select.functional) {
            (Some(label), _) => {
                let (name, def) = spec.meter(label)?;
                (format!("{label} ({name})"), def.clone())
            }
            (None, Some(name)) => (name.clone(), spec.functional(name)?.clone()),
            (None, None) => return Err(Error::InvalidArgument("no functional given".into()).into()),
        };
    let (_, branches) = branches_for(&spec, &paths, &def)?;
    Ok(Loaded {
        spec,
        paths,
        name,
        branches,
    })
}

fn execute(command: Command) -> std::result::Result<String, Failure> {
    match command {
        Command::Amplitudes { source, format } => {
            let spec = load(&source)?;
            let paths = enumerate_paths(&spec)?;
            Ok(cmd_amplitudes(&spec, &paths, format)?)
        }
        Command::Weak(target) => {
            let l = load_target(&target)?;
            Ok(cmd_weak(&l, target.format)?)
        }
        Command::Strong(target) => {
            let l = load_target(&target)?;
            Ok(cmd_strong(&l, target.format)?)
        }
        Command::Pointer {
            target,
            coupling,
            width,
            readout,
            sweep,
            grid_points,
            plot,
        } => {
            let l = load_target(&target)?;
            let meter = MeterConfig::new(coupling, width, readout.parse()?)?;
            let ratios = sweep.as_deref().map(parse_sweep).transpose()?;
            Ok(cmd_pointer(
                &l,
                &meter,
                ratios.as_deref(),
                grid_points,
                plot.as_deref(),
                target.format,
            )?)
        }
        Command::Montecarlo {
            target,
            trials,
            seed,
            workers,
        } => {
            let l = load_target(&target)?;
            Ok(cmd_montecarlo(&l, trials, seed, workers, target.format)?)
        }
    }
}

fn report(command: &str, spec: &ScenarioSpec, inputs: Value, results: Value) -> String {
    let r = RunReport {
        command: command.to_string(),
        scenario: spec.name.clone(),
        scenario_digest: spec.digest(),
        inputs,
        results: round_floats(results),
        version: VERSION.to_string(),
    };
    let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
    s.push('\n');
    s
}

/// Round every float in a JSON tree to 12 significant digits.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let rounded: f64 = format!("{x:.11e}").parse().expect("float text");
            json!(rounded)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

/// Six significant digits for human tables.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

fn cjson(c: C64) -> Value {
    json!({ "re": c.re, "im": c.im })
}

fn complex_cells(c: C64) -> String {
    format!(
        "{:>12} {:>12} {:>12} {:>12}",
        sig6(c.re),
        sig6(c.im),
        sig6(c.norm()),
        sig6(if c.norm() == 0.0 { 0.0 } else { c.arg() })
    )
}

fn complex_inline(c: C64) -> String {
    format!(
        "{} {} {}i  (modulus {}, phase {})",
        sig6(c.re),
        if c.im < 0.0 { '-' } else { '+' },
        sig6(c.im.abs()),
        sig6(c.norm()),
        sig6(if c.norm() == 0.0 { 0.0 } else { c.arg() })
    )
}

fn header(out: &mut String, spec: &ScenarioSpec) {
    let _ = writeln!(
        out,
        "scenario: {}  digest: {}",
        spec.name,
        &spec.digest()[..16]
    );
}

fn cmd_amplitudes(spec: &ScenarioSpec, paths: &PathwaySet, format: Format) -> Result<String> {
    let total = spec.transition_amplitude()?;
    if format == Format::Json {
        let rows: Vec<Value> = paths
            .paths()
            .zip(paths.amplitudes())
            .enumerate()
            .map(|(i, (p, a))| json!({ "index": i, "path": p, "amplitude": cjson(*a) }))
            .collect();
        return Ok(report(
            "amplitudes",
            spec,
            json!({ "scenario": spec.name }),
            json!({
                "slices": paths.slice_labels(),
                "paths": rows,
                "total_amplitude": cjson(total),
                "amplitude_sum": cjson(paths.amplitude_sum()),
            }),
        ));
    }
    let mut out = String::new();
    header(&mut out, spec);
    let labels = paths.slice_labels().join(",");
    let _ = writeln!(
        out,
        "{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "path",
        format!("[{labels}]"),
        "re",
        "im",
        "modulus",
        "phase"
    );
    for (i, (p, a)) in paths.paths().zip(paths.amplitudes()).enumerate() {
        let idx: Vec<String> = p.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "{i:>6} {:>12} {}",
            format!("({})", idx.join(",")),
            complex_cells(*a)
        );
    }
    let _ = writeln!(out, "total transition amplitude: {}", complex_inline(total));
    Ok(out)
}

fn cmd_weak(l: &Loaded, format: Format) -> Result<String> {
    let weak = weak_statistics(&l.branches)?;
    let rule = check_sum_rule(&l.branches, SUM_RULE_TOL);
    let b = &l.branches;
    if format == Format::Json {
        let branches: Vec<Value> = (0..b.len())
            .map(|k| {
                json!({
                    "value": b.branch_values[k],
                    "members": b.branch_members[k],
                    "amplitude": cjson(b.branch_amplitudes[k]),
                    "relative_amplitude": cjson(weak.relative_amplitudes[k]),
                })
            })
            .collect();
        return Ok(report(
            "weak",
            &l.spec,
            json!({ "functional": l.name }),
            json!({
                "branches": branches,
                "weak_value": cjson(weak.weak_value),
                "real_shift": weak.real_shift,
                "imag_shift": weak.imag_shift,
                "sum_rule": {
                    "weighted_amplitude_sum": cjson(rule.weighted_sum),
                    "is_null": rule.is_null,
                    "tol": rule.tol,
                },
            }),
        ));
    }
    let mut out = String::new();
    header(&mut out, &l.spec);
    let _ = writeln!(out, "functional: {}", l.name);
    let _ = writeln!(
        out,
        "{:>12} {:>12} {:>12} {:>12} {:>12}   (relative amplitude)",
        "value", "re", "im", "modulus", "phase"
    );
    for k in 0..b.len() {
        let _ = writeln!(
            out,
            "{:>12} {}",
            sig6(b.branch_values[k]),
            complex_cells(weak.relative_amplitudes[k])
        );
    }
    let _ = writeln!(out, "weak value: {}", complex_inline(weak.weak_value));
    let _ = writeln!(
        out,
        "sum rule: {} (|Σ F_k A_k| = {})",
        if rule.is_null { "NULL" } else { "NONZERO" },
        sig6(rule.weighted_sum.norm())
    );
    Ok(out)
}

fn cmd_strong(l: &Loaded, format: Format) -> Result<String> {
    let s = strong_statistics(&l.branches)?;
    let rule = strong_sum_rule(&s, SUM_RULE_TOL);
    if format == Format::Json {
        return Ok(report(
            "strong",
            &l.spec,
            json!({ "functional": l.name }),
            json!({
                "branch_values": s.branch_values,
                "probabilities": s.probabilities,
                "conditional_mean": s.conditional_mean,
                "postselect_prob": s.postselect_prob,
                "sum_rule": { "weighted_probability_sum": rule.weighted_sum.re, "is_null": rule.is_null, "tol": rule.tol },
            }),
        ));
    }
    let mut out = String::new();
    header(&mut out, &l.spec);
    let _ = writeln!(out, "functional: {}", l.name);
    let _ = writeln!(out, "{:>12} {:>12}", "value", "P");
    for (f, p) in s.branch_values.iter().zip(&s.probabilities) {
        let _ = writeln!(out, "{:>12} {:>12}", sig6(*f), sig6(*p));
    }
    let _ = writeln!(
        out,
        "post-selection probability: {}",
        sig6(s.postselect_prob)
    );
    let _ = writeln!(out, "conditional mean: {}", sig6(s.conditional_mean));
    let _ = writeln!(
        out,
        "probability sum rule: {} (Σ F_k P_k = {})",
        if rule.is_null { "NULL" } else { "NONZERO" },
        sig6(rule.weighted_sum.re)
    );
    Ok(out)
}

/// Parse `start:stop:log|lin[:points]`.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let bad = || {
        Error::InvalidArgument(format!(
            "bad sweep `{text}`; expected start:stop:log|lin[:points]"
        ))
    };
    let parts: Vec<&str> = text.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = match parts.get(3) {
        Some(p) => p.parse().map_err(|_| bad())?,
        None => 17,
    };
    if !(start > 0.0 && stop >= start && points >= 2) {
        return Err(bad());
    }
    let t = |j: usize| j as f64 / (points - 1) as f64;
    match parts[2] {
        "log" => {
            let (a, b) = (start.ln(), stop.ln());
            Ok((0..points).map(|j| (a + (b - a) * t(j)).exp()).collect())
        }
        "lin" => Ok((0..points).map(|j| start + (stop - start) * t(j)).collect()),
        _ => Err(bad()),
    }
}

fn cmd_pointer(
    l: &Loaded,
    meter: &MeterConfig,
    ratios: Option<&[f64]>,
    grid_points: usize,
    plot: Option<&std::path::Path>,
    format: Format,
) -> Result<String> {
    let inputs = json!({
        "functional": l.name,
        "coupling": meter.coupling(),
        "width": meter.width(),
        "readout": meter.readout(),
        "grid_points": grid_points,
    });
    if let Some(ratios) = ratios {
        let rows = regime_sweep(&l.branches, meter, ratios, grid_points)?;
        if let Some(path) = plot {
            std::fs::write(path, render_sweep_svg(&rows, meter.readout()))?;
        }
        if format == Format::Json {
            return Ok(report("pointer", &l.spec, inputs, json!({ "sweep": rows })));
        }
        let mut out = String::new();
        header(&mut out, &l.spec);
        let _ = writeln!(
            out,
            "functional: {}  readout: {:?}  width: {}",
            l.name,
            meter.readout(),
            sig6(meter.width())
        );
        let _ = writeln!(
            out,
            "{:>12} {:>14} {:>14} {:>12} {:>12}",
            "λ/σ", "shift/λ", "analytic/λ", "weak", "strong"
        );
        let opt = |v: Option<f64>| v.map(sig6).unwrap_or_else(|| "undefined".into());
        for r in &rows {
            let _ = writeln!(
                out,
                "{:>12} {:>14} {:>14} {:>12} {:>12}",
                sig6(r.ratio),
                sig6(r.normalized_shift),
                sig6(r.analytic_shift),
                opt(r.weak_prediction),
                opt(r.strong_prediction)
            );
        }
        return Ok(out);
    }

    let dist = entangle_and_postselect(&l.branches, meter, grid_points)?;
    let mean = pointer_mean(&dist, meter.readout())?;
    let analytic = analytic_pointer_mean(&l.branches, meter)?;
    let analytic_mean = match meter.readout() {
        Readout::Position => analytic.position,
        Readout::Momentum => analytic.momentum,
    };
    if format == Format::Json {
        return Ok(report(
            "pointer",
            &l.spec,
            inputs,
            json!({
                "mean": mean,
                "analytic_mean": analytic_mean,
                "normalized_shift": mean / meter.coupling(),
                "norm_sqr": dist.norm_sqr,
                "ratio": meter.ratio(),
            }),
        ));
    }
    let mut out = String::new();
    header(&mut out, &l.spec);
    let _ = writeln!(
        out,
        "functional: {}  readout: {:?}",
        l.name,
        meter.readout()
    );
    let _ = writeln!(
        out,
        "λ = {}  σ = {}  λ/σ = {}",
        sig6(meter.coupling()),
        sig6(meter.width()),
        sig6(meter.ratio())
    );
    let _ = writeln!(out, "pointer mean (grid): {}", sig6(mean));
    let _ = writeln!(out, "pointer mean (closed form): {}", sig6(analytic_mean));
    let _ = writeln!(out, "post-selected norm²: {}", sig6(dist.norm_sqr));
    Ok(out)
}

/// Shift-versus-ratio plot with a logarithmic ratio axis.
pub fn render_sweep_svg(rows: &[SweepRow], readout: Readout) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let xs: Vec<f64> = rows.iter().map(|r| r.ratio.log10()).collect();
    let mut ys: Vec<f64> = rows.iter().map(|r| r.normalized_shift).collect();
    if let Some(r) = rows.first() {
        ys.extend(r.weak_prediction);
        ys.extend(r.strong_prediction);
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{pad} {pad} V{} H{}" stroke="black" fill="none"/>"#,
        h - pad,
        w - pad
    );
    let points: Vec<String> = xs
        .iter()
        .zip(rows)
        .map(|(x, r)| format!("{:.2},{:.2}", sx(*x), sy(r.normalized_shift)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#,
        points.join(" ")
    );
    for (value, colour, name) in rows
        .first()
        .map(|r| {
            [
                (r.weak_prediction, "darkorange", "weak"),
                (r.strong_prediction, "seagreen", "strong"),
            ]
        })
        .into_iter()
        .flatten()
    {
        if let Some(v) = value {
            let _ = writeln!(
                svg,
                r#"<line x1="{pad}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="{colour}" stroke-dasharray="6 4"/><text x="{}" y="{:.2}" font-size="12" fill="{colour}">{name}</text>"#,
                w - pad,
                w - pad + 4.0,
                sy(v) + 4.0,
                y = sy(v)
            );
        }
    }
    let label = match readout {
        Readout::Position => "⟨x⟩/λ",
        Readout::Momentum => "⟨p⟩/λ",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">log10(λ/σ)</text>"#,
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" font-size="13" transform="rotate(-90 14 {})" text-anchor="middle">{label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{pad}" y="{}" font-size="11">{}</text><text x="{pad}" y="{}" font-size="11">{}</text>"#,
        pad - 6.0,
        sig6(y1),
        h - pad + 14.0,
        sig6(y0)
    );
    svg.push_str("</svg>\n");
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    }
}

fn cmd_montecarlo(
    l: &Loaded,
    trials: u64,
    seed: u64,
    workers: usize,
    format: Format,
) -> Result<String> {
    let partition = Partition { workers };
    let dist = trial_distribution(&l.spec, &l.paths, &l.branches)?;
    let tally = sample_trials(&dist, trials, seed, partition)?;
    let est = estimate(&tally, &l.branches.branch_values)?.with_exact(&dist);
    let exact_mean = strong_statistics(&l.branches)
        .ok()
        .map(|s| s.conditional_mean);
    if format == Format::Json {
        return Ok(report(
            "montecarlo",
            &l.spec,
            json!({ "functional": l.name, "trials": trials, "seed": seed, "workers": workers }),
            json!({
                "branch_values": l.branches.branch_values,
                "counts": tally.counts,
                "frequencies": est.frequencies,
                "exact_probabilities": est.exact_probabilities,
                "failure_probabilities": dist.failure,
                "conditional_mean_estimate": est.conditional_mean_estimate,
                "std_error": est.std_error,
                "exact_conditional_mean": exact_mean,
                "successes": est.successes,
                "partition": tally.partition,
            }),
        ));
    }
    let mut out = String::new();
    header(&mut out, &l.spec);
    let _ = writeln!(
        out,
        "functional: {}  trials: {trials}  seed: {seed}  workers: {workers}",
        l.name
    );
    let _ = writeln!(
        out,
        "{:>12} {:>10} {:>10} {:>12} {:>12}",
        "value", "M(k,+1)", "M(k,-1)", "ω_k", "P_k"
    );
    for k in 0..l.branches.len() {
        let _ = writeln!(
            out,
            "{:>12} {:>10} {:>10} {:>12} {:>12}",
            sig6(l.branches.branch_values[k]),
            tally.counts[k][0],
            tally.counts[k][1],
            sig6(est.frequencies[k]),
            sig6(dist.success[k])
        );
    }
    let _ = writeln!(
        out,
        "conditional mean estimate: {} ± {}",
        sig6(est.conditional_mean_estimate),
        sig6(est.std_error)
    );
    if let Some(m) = exact_mean {
        let _ = writeln!(out, "exact conditional mean: {}", sig6(m));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.5773502691896258), "0.57735");
        assert_eq!(sig6(-0.3333333333333333), "-0.333333");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
        assert_eq!(sig6(-1e-17), "-1.00000e-17");
    }

    #[test]
    fn sweep_parsing() {
        let r = parse_sweep("1e-3:10:log:5").unwrap();
        assert_eq!(r.len(), 5);
        assert!((r[0] - 1e-3).abs() < 1e-15 && (r[4] - 10.0).abs() < 1e-12);
        assert!((r[1] - 1e-2).abs() < 1e-15);
        assert_eq!(parse_sweep("1:2:lin:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_sweep("1e-3:10:log").unwrap().len(), 17);
        for bad in [
            "",
            "1:2",
            "0:1:log",
            "2:1:lin",
            "1:2:cubic",
            "1:2:lin:1",
            "a:b:log",
        ] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn twelve_digit_rounding() {
        let v = round_floats(json!({ "x": [0.1 + 0.2, 1.0 / 3.0], "n": 3 }));
        assert_eq!(v["x"][0].as_f64().unwrap(), 0.3);
        assert_eq!(v["x"][1].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["n"], json!(3));
    }
}
