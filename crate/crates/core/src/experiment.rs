//! Experiments driven by a [`Scenario`]: evaluation of one operating point,
//! relay-position and distance sweeps, a full search at one distance and
//! SNR spectra. Results render to CSV or to plot data (one whitespace
//! separated file per curve plus a manifest).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimizer::{
    direct_surface, evaluate_direct, evaluate_point, search_surfaces, sweep_distance, OperatingPoint,
    Surface, Target,
};
use crate::relaying::{af_snr_components, Duplex, RelayOutput, Scheme};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Evaluate,
    SweepPosition,
    SweepDistance,
    Optimize,
    SnrProfile,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::Evaluate => "evaluate",
            Experiment::SweepPosition => "sweep-position",
            Experiment::SweepDistance => "sweep-distance",
            Experiment::Optimize => "optimize",
            Experiment::SnrProfile => "snr-profile",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    PlotData,
}

/// Rate of one target at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub distance: f64,
    pub target: Target,
    pub duplex: Duplex,
    /// bit/s
    pub rate: f64,
    pub point: OperatingPoint,
    /// Scheme-specific detail for the summary.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrCurve {
    pub position: f64,
    pub point: OperatingPoint,
    pub frequencies: Vec<f64>,
    /// `SNR_MRC(f)` divided by its maximum.
    pub normalized_snr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Evaluate(Vec<RateRow>),
    /// Best rate per relay position at one distance.
    Positions { distance: f64, rows: Vec<RateRow> },
    /// Optimum per distance.
    Distances(Vec<RateRow>),
    Optimize {
        distance: f64,
        optima: Vec<RateRow>,
        surfaces: Vec<Arc<Surface>>,
    },
    SnrProfile {
        distance: f64,
        scheme: Scheme,
        curves: Vec<SnrCurve>,
    },
}

fn targets(scenario: &Scenario) -> Vec<Target> {
    let mut t: Vec<Target> = scenario.schemes.iter().map(|&s| Target::Relay(s)).collect();
    if scenario.include_direct {
        t.push(Target::Direct);
    }
    t
}

fn single_distance(scenario: &Scenario, experiment: Experiment) -> Result<f64> {
    match scenario.distances().as_slice() {
        [d] => Ok(*d),
        _ => Err(Error::Config(format!(
            "`{}` needs exactly one distance in `distance_m`",
            experiment.label()
        ))),
    }
}

/// Runs `experiment` on `scenario`.
pub fn run(scenario: &Scenario, experiment: Experiment) -> Result<Report> {
    scenario.validate()?;
    match experiment {
        Experiment::Evaluate => run_evaluate(scenario),
        Experiment::SweepPosition => run_positions(scenario),
        Experiment::SweepDistance => run_distances(scenario),
        Experiment::Optimize => run_optimize(scenario),
        Experiment::SnrProfile => run_snr_profile(scenario),
    }
}

fn run_evaluate(scenario: &Scenario) -> Result<Report> {
    let system = scenario.system_model()?;
    let min_sep = scenario.system.min_separation_m;
    let mut rows = Vec::new();
    for distance in scenario.distances() {
        let point = scenario.operating_point(distance)?;
        for &scheme in &scenario.schemes {
            for &duplex in &scenario.duplex {
                let r = evaluate_point(&system, distance, min_sep, scheme, duplex, &point)?;
                let note = match &r.relay {
                    RelayOutput::Amplify { gain, .. } => {
                        format!("A={gain:.6e} iterations={} converged={}", r.iterations_used, r.converged)
                    }
                    RelayOutput::Filter { .. } => {
                        format!("iterations={} converged={}", r.iterations_used, r.converged)
                    }
                    RelayOutput::Decode { rate_sr, rate_rd, .. } => {
                        format!("C_SR={rate_sr:.6e} C_RD={rate_rd:.6e}")
                    }
                };
                rows.push(RateRow {
                    distance,
                    target: Target::Relay(scheme),
                    duplex,
                    rate: r.rate,
                    point,
                    note,
                });
            }
        }
        if scenario.include_direct {
            let direct_point = OperatingPoint {
                relay_position: None,
                power_split: 1.0,
                ..point
            };
            let rate = evaluate_direct(&system, distance, &direct_point)?;
            for &duplex in &scenario.duplex {
                rows.push(RateRow {
                    distance,
                    target: Target::Direct,
                    duplex,
                    rate,
                    point: direct_point,
                    note: String::new(),
                });
            }
        }
    }
    Ok(Report::Evaluate(rows))
}

fn optimum_row(surface: &Arc<Surface>, duplex: Duplex, scenario: &Scenario, filter: impl Fn(&OperatingPoint) -> bool) -> Result<RateRow> {
    let opt = surface.optimum_where(duplex, scenario.fd_selection(), |p| filter(&p.point))?;
    Ok(RateRow {
        distance: surface.distance,
        target: surface.target,
        duplex,
        rate: opt.best_rate,
        point: opt.best_config,
        note: String::new(),
    })
}

fn run_positions(scenario: &Scenario) -> Result<Report> {
    let distance = single_distance(scenario, Experiment::SweepPosition)?;
    let system = scenario.system_model()?;
    let space = scenario.search_space()?;
    if scenario.schemes.is_empty() {
        return Err(Error::Config("`sweep-position` needs at least one relaying scheme".into()));
    }
    let surfaces = search_surfaces(&system, distance, &space, &scenario.schemes)?;
    let mut rows = Vec::new();
    for surface in &surfaces {
        for position in surface.positions() {
            for &duplex in &scenario.duplex {
                rows.push(optimum_row(surface, duplex, scenario, |p| p.relay_position == Some(position))?);
            }
        }
    }
    Ok(Report::Positions { distance, rows })
}

fn run_distances(scenario: &Scenario) -> Result<Report> {
    let system = scenario.system_model()?;
    let space = scenario.search_space()?;
    let sweep = sweep_distance(
        &system,
        &scenario.distances(),
        &space,
        &scenario.schemes,
        scenario.include_direct,
    )?;
    let mut rows = Vec::new();
    for entry in &sweep {
        for target in targets(scenario) {
            let surface = entry.surface(target).expect("searched above");
            for &duplex in &scenario.duplex {
                rows.push(optimum_row(surface, duplex, scenario, |_| true)?);
            }
        }
    }
    Ok(Report::Distances(rows))
}

fn run_optimize(scenario: &Scenario) -> Result<Report> {
    let distance = single_distance(scenario, Experiment::Optimize)?;
    let system = scenario.system_model()?;
    let space = scenario.search_space()?;
    let mut surfaces = if scenario.schemes.is_empty() {
        Vec::new()
    } else {
        search_surfaces(&system, distance, &space, &scenario.schemes)?
    };
    if scenario.include_direct {
        surfaces.push(direct_surface(&system, distance, &space)?);
    }
    let mut optima = Vec::new();
    for surface in &surfaces {
        for &duplex in &scenario.duplex {
            optima.push(optimum_row(surface, duplex, scenario, |_| true)?);
        }
    }
    Ok(Report::Optimize {
        distance,
        optima,
        surfaces,
    })
}

fn run_snr_profile(scenario: &Scenario) -> Result<Report> {
    let distance = single_distance(scenario, Experiment::SnrProfile)?;
    let scheme = scenario.snr_profile.scheme;
    if scheme == Scheme::Df {
        return Err(Error::Config(
            "`snr-profile` needs a non-regenerative scheme (af or ff); DF has no combined SNR".into(),
        ));
    }
    let system = scenario.system_model()?;
    let mut space = scenario.search_space()?;
    let min_sep = space.min_separation;
    let positions = match &scenario.snr_profile.positions_m {
        Some(p) => p.clone(),
        None => {
            let all = space.relay_positions.resolve(distance, min_sep)?.feasible;
            let mut picked = vec![all[0], all[all.len() / 2], all[all.len() - 1]];
            picked.dedup();
            picked
        }
    };
    space.relay_positions = crate::optimizer::PositionGrid::Fixed {
        positions: positions.clone(),
    };
    let resolved = space.relay_positions.resolve(distance, min_sep)?;
    if !resolved.infeasible.is_empty() {
        return Err(Error::NoFeasibleRelayPosition {
            distance,
            min_separation: min_sep,
        });
    }
    let surface = search_surfaces(&system, distance, &space, &[scheme])?.remove(0);
    let mut curves = Vec::new();
    for position in positions {
        let row = optimum_row(&surface, Duplex::Hd, scenario, |p| p.relay_position == Some(position))?;
        let point = row.point;
        let link = system.relay_link(distance, position, min_sep, point.f0, point.windings)?;
        let result = crate::relaying::evaluate(&link, &system.scheme_config(scheme, Duplex::Hd, point.power_split))?;
        let gain_sq = result
            .relay
            .gain_sq(link.grid.count())
            .expect("non-regenerative scheme");
        let (snr1, snr2) = af_snr_components(&link, &result.source_allocation, &gain_sq)?;
        let total = snr1.zip_with(&snr2, |a, b| a + b)?;
        curves.push(SnrCurve {
            position,
            point,
            frequencies: link.grid.frequencies().collect(),
            normalized_snr: total.peak_normalized().into_values(),
        });
    }
    Ok(Report::SnrProfile {
        distance,
        scheme,
        curves,
    })
}

/// A rendered output file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn csv_file(name: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<OutputFile> {
    let err = |e: csv::Error| Error::Io {
        path: name.to_string(),
        message: e.to_string(),
    };
    let mut w = csv_writer();
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let contents = w.into_inner().map_err(|e| Error::Io {
        path: name.to_string(),
        message: e.to_string(),
    })?;
    Ok(OutputFile {
        name: name.to_string(),
        contents,
    })
}

fn opt_str(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

const OPTIMUM_HEADER: [&str; 8] = [
    "distance_m",
    "scheme",
    "duplex",
    "rate_bps",
    "opt_f0_hz",
    "opt_N",
    "opt_relay_pos_m",
    "opt_power_split",
];

fn optimum_record(r: &RateRow) -> Vec<String> {
    vec![
        r.distance.to_string(),
        r.target.label().to_string(),
        r.duplex.label().to_string(),
        r.rate.to_string(),
        r.point.f0.to_string(),
        r.point.windings.to_string(),
        opt_str(r.point.relay_position),
        r.point.power_split.to_string(),
    ]
}

/// CSV files of a report.
pub fn render_csv(report: &Report) -> Result<Vec<OutputFile>> {
    match report {
        Report::Evaluate(rows) => Ok(vec![csv_file(
            "evaluate.csv",
            &[
                "distance_m",
                "scheme",
                "duplex",
                "rate_bps",
                "f0_hz",
                "N",
                "relay_pos_m",
                "power_split",
            ],
            rows.iter().map(optimum_record),
        )?]),
        Report::Positions { rows, .. } => Ok(vec![csv_file(
            "fig3.csv",
            &["position_m", "scheme", "duplex", "rate_bps"],
            rows.iter().map(|r| {
                vec![
                    opt_str(r.point.relay_position),
                    r.target.label().to_string(),
                    r.duplex.label().to_string(),
                    r.rate.to_string(),
                ]
            }),
        )?]),
        Report::Distances(rows) => Ok(vec![csv_file(
            "fig5.csv",
            &OPTIMUM_HEADER,
            rows.iter().map(optimum_record),
        )?]),
        Report::Optimize {
            optima, surfaces, ..
        } => {
            let mut files = vec![csv_file("optimum.csv", &OPTIMUM_HEADER, optima.iter().map(optimum_record))?];
            for s in surfaces {
                let mut buf = Vec::new();
                s.write_csv(&mut buf)?;
                files.push(OutputFile {
                    name: format!("surface_{}.csv", s.target.label()),
                    contents: buf,
                });
            }
            Ok(files)
        }
        Report::SnrProfile { curves, .. } => Ok(vec![csv_file(
            "fig2.csv",
            &["position_m", "frequency_hz", "snr_mrc_norm"],
            curves.iter().flat_map(|c| {
                c.frequencies
                    .iter()
                    .zip(&c.normalized_snr)
                    .map(|(f, s)| vec![c.position.to_string(), f.to_string(), s.to_string()])
                    .collect::<Vec<_>>()
            }),
        )?]),
    }
}

#[derive(Debug, Serialize)]
struct ManifestCurve {
    file: String,
    label: String,
    x: &'static str,
    y: &'static str,
}

#[derive(Debug, Serialize)]
struct Manifest {
    experiment: &'static str,
    curves: Vec<ManifestCurve>,
}

struct CurveBuilder {
    manifest: Manifest,
    files: Vec<OutputFile>,
}

impl CurveBuilder {
    fn new(experiment: &'static str) -> Self {
        Self {
            manifest: Manifest {
                experiment,
                curves: Vec::new(),
            },
            files: Vec::new(),
        }
    }

    fn add(&mut self, file: String, label: String, x: &'static str, y: &'static str, data: impl Iterator<Item = (f64, f64)>) {
        let mut text = format!("# {x} {y}\n");
        for (a, b) in data {
            let _ = writeln!(text, "{a} {b}");
        }
        self.files.push(OutputFile {
            name: file.clone(),
            contents: text.into_bytes(),
        });
        self.manifest.curves.push(ManifestCurve { file, label, x, y });
    }

    fn finish(mut self) -> Result<Vec<OutputFile>> {
        let text = toml::to_string(&self.manifest)
            .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
        self.files.insert(
            0,
            OutputFile {
                name: "manifest.toml".into(),
                contents: text.into_bytes(),
            },
        );
        Ok(self.files)
    }
}

/// Groups rows by (target, duplex) in first-seen order.
fn curves_of(rows: &[RateRow]) -> Vec<((Target, Duplex), Vec<&RateRow>)> {
    let mut groups: Vec<((Target, Duplex), Vec<&RateRow>)> = Vec::new();
    for r in rows {
        let key = (r.target, r.duplex);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
}

/// Plot data of a report: one whitespace-separated file per curve plus
/// `manifest.toml` listing every curve with its label and axes.
pub fn emit_plot_data(report: &Report) -> Result<Vec<OutputFile>> {
    match report {
        Report::Evaluate(_) => CurveBuilder::new("evaluate").finish(),
        Report::Optimize { .. } => CurveBuilder::new("optimize").finish(),
        Report::Positions { rows, .. } => {
            let mut b = CurveBuilder::new("sweep-position");
            for ((target, duplex), group) in curves_of(rows) {
                b.add(
                    format!("fig3_{}_{}.dat", target.label(), duplex.label()),
                    format!("{} {}", target.label(), duplex.label()),
                    "position_m",
                    "rate_bps",
                    group.iter().map(|r| (r.point.relay_position.unwrap_or(f64::NAN), r.rate)),
                );
            }
            b.finish()
        }
        Report::Distances(rows) => {
            let mut b = CurveBuilder::new("sweep-distance");
            let groups = curves_of(rows);
            for ((target, duplex), group) in &groups {
                b.add(
                    format!("fig5_{}_{}.dat", target.label(), duplex.label()),
                    format!("{} {}", target.label(), duplex.label()),
                    "distance_m",
                    "rate_bps",
                    group.iter().map(|r| (r.distance, r.rate)),
                );
            }
            for ((target, duplex), group) in &groups {
                b.add(
                    format!("fig4_{}_{}.dat", target.label(), duplex.label()),
                    format!("{} {}", target.label(), duplex.label()),
                    "distance_m",
                    "opt_f0_hz",
                    group.iter().map(|r| (r.distance, r.point.f0)),
                );
            }
            b.finish()
        }
        Report::SnrProfile { scheme, curves, .. } => {
            let mut b = CurveBuilder::new("snr-profile");
            for (k, c) in curves.iter().enumerate() {
                b.add(
                    format!("fig2_{k}.dat"),
                    format!("{scheme} relay at {} m", c.position),
                    "frequency_hz",
                    "snr_mrc_norm",
                    c.frequencies.iter().copied().zip(c.normalized_snr.iter().copied()),
                );
            }
            b.finish()
        }
    }
}

/// Renders `report` in `format`.
pub fn render(report: &Report, format: OutputFormat) -> Result<Vec<OutputFile>> {
    match format {
        OutputFormat::Csv => render_csv(report),
        OutputFormat::PlotData => emit_plot_data(report),
    }
}

/// Writes `files` into `dir`. On failure every file written so far is
/// removed again.
pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for f in files {
        let path = dir.join(&f.name);
        if let Err(e) = std::fs::write(&path, &f.contents) {
            let _ = std::fs::remove_file(&path);
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(Error::io(&path, e));
        }
        written.push(path);
    }
    Ok(written)
}

/// Human-readable summary table.
pub fn summary(report: &Report) -> String {
    let mut out = String::new();
    let table = |out: &mut String, rows: &[RateRow]| {
        let _ = writeln!(
            out,
            "{:>10} {:>7} {:>6} {:>14} {:>12} {:>6} {:>10} {:>7}  ",
            "dist_m", "scheme", "duplex", "rate_bps", "f0_hz", "N", "relay_m", "split"
        );
        for r in rows {
            let _ = writeln!(
                out,
                "{:>10} {:>7} {:>6} {:>14.6e} {:>12.6e} {:>6} {:>10} {:>7}  {}",
                r.distance,
                r.target.label(),
                r.duplex.label(),
                r.rate,
                r.point.f0,
                r.point.windings,
                r.point.relay_position.map_or("-".to_string(), |x| format!("{x:.3}")),
                r.point.power_split,
                r.note
            );
        }
    };
    match report {
        Report::Evaluate(rows) | Report::Distances(rows) => table(&mut out, rows),
        Report::Positions { rows, .. } => table(&mut out, rows),
        Report::Optimize { optima, surfaces, .. } => {
            table(&mut out, optima);
            for s in surfaces {
                if !s.infeasible_positions.is_empty() {
                    let _ = writeln!(out, "{}: skipped infeasible relay positions {:?}", s.target, s.infeasible_positions);
                }
            }
        }
        Report::SnrProfile { scheme, curves, .. } => {
            for c in curves {
                let peak = c
                    .normalized_snr
                    .iter()
                    .position(|&v| v == 1.0)
                    .map_or(f64::NAN, |i| c.frequencies[i]);
                let _ = writeln!(
                    out,
                    "{scheme} relay at {} m: f0={:.6e} Hz N={} split={} peak at {:.6e} Hz",
                    c.position, c.point.f0, c.point.windings, c.point.power_split, peak
                );
            }
        }
    }
    out
}
