//! Exhaustive search over resonance frequency, winding count, relay position
//! and source/relay power split.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{build_direct_link, build_link_model, BandConfig, DirectLink, LinkModel};
use crate::medium::{
    CircuitParams, CoilDesign, PhysicsModels, RelayGeometry, SoilMedium, WindingLayout,
    DEFAULT_MAX_WINDINGS,
};
use crate::relaying::{
    af_ff_rate_fd, af_rate_hd, df_rate_fd, df_rate_hd, direct_rate, evaluate, ff_rate_hd_from,
    Duplex, RateResult, Scheme, SchemeConfig, DEFAULT_CONVERGENCE_TOL, DEFAULT_MAX_ITERATIONS,
};

/// `count_per_decade` logarithmically spaced points from `start` up to and
/// including `end` (when `end` falls on the lattice).
pub fn log_grid(start: f64, end: f64, count_per_decade: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && end >= start && end.is_finite()) || count_per_decade == 0 {
        return Err(Error::invalid(
            "log grid",
            format!("needs 0 < start <= end and a positive density, got {start}..{end} at {count_per_decade}/decade"),
        ));
    }
    let decades = (end / start).log10();
    let steps = (decades * count_per_decade as f64 + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|k| start * 10f64.powf(k as f64 / count_per_decade as f64))
        .collect())
}

/// Candidate relay positions, measured in metres from the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PositionGrid {
    /// `count` evenly spaced points from `min_separation` to
    /// `distance - min_separation`, both ends included.
    Evenly { count: usize },
    /// Explicit positions; those violating the separation are skipped and
    /// reported.
    Fixed { positions: Vec<f64> },
}

impl Default for PositionGrid {
    fn default() -> Self {
        PositionGrid::Evenly { count: 9 }
    }
}

/// Relay positions for one link distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPositions {
    pub feasible: Vec<f64>,
    pub infeasible: Vec<f64>,
}

impl PositionGrid {
    pub fn resolve(&self, distance: f64, min_separation: f64) -> Result<ResolvedPositions> {
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::invalid("distance", format!("must be finite and > 0, got {distance}")));
        }
        let none = || Error::NoFeasibleRelayPosition {
            distance,
            min_separation,
        };
        let resolved = match self {
            PositionGrid::Evenly { count } => {
                if *count == 0 {
                    return Err(Error::invalid("relay position count", "must be at least 1"));
                }
                let span = distance - 2.0 * min_separation;
                if span < 0.0 {
                    return Err(none());
                }
                let feasible = if *count == 1 || span == 0.0 {
                    vec![min_separation + 0.5 * span]
                } else {
                    let step = span / (*count - 1) as f64;
                    (0..*count)
                        .map(|k| {
                            if k + 1 == *count {
                                distance - min_separation
                            } else {
                                min_separation + step * k as f64
                            }
                        })
                        .collect()
                };
                ResolvedPositions {
                    feasible,
                    infeasible: Vec::new(),
                }
            }
            PositionGrid::Fixed { positions } => {
                let (feasible, infeasible) = positions.iter().partition(|&&p| {
                    p.is_finite() && p >= min_separation && distance - p >= min_separation && p > 0.0 && p < distance
                });
                ResolvedPositions {
                    feasible,
                    infeasible,
                }
            }
        };
        if resolved.feasible.is_empty() {
            return Err(none());
        }
        Ok(resolved)
    }
}

/// Grids of the exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    /// Resonance frequencies in Hz.
    pub f0_grid: Vec<f64>,
    pub windings_grid: Vec<u32>,
    pub relay_positions: PositionGrid,
    /// Fraction of the total power given to the source.
    pub power_splits: Vec<f64>,
    /// Minimum relay distance to either end, m.
    pub min_separation: f64,
}

impl SearchSpace {
    /// f0 over 1 kHz to 30 MHz at 20 points per decade, six winding counts
    /// up to 1000, nine relay positions, power splits in steps of 0.1 and a
    /// 3 m minimum separation.
    pub fn coarse() -> Self {
        Self {
            f0_grid: log_grid(1e3, 3e7, 20).expect("static grid"),
            windings_grid: vec![10, 50, 100, 200, 500, 1000],
            relay_positions: PositionGrid::default(),
            power_splits: (0..=10).map(|k| k as f64 / 10.0).collect(),
            min_separation: 3.0,
        }
    }

    pub fn validate(&self, max_windings: u32) -> Result<()> {
        if self.f0_grid.is_empty() {
            return Err(Error::invalid("f0_grid", "must not be empty"));
        }
        if let Some(f) = self.f0_grid.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::invalid("f0_grid", format!("frequencies must be finite and > 0, got {f}")));
        }
        if self.windings_grid.is_empty() {
            return Err(Error::invalid("windings_grid", "must not be empty"));
        }
        if let Some(n) = self.windings_grid.iter().find(|n| **n == 0 || **n > max_windings) {
            return Err(Error::invalid(
                "windings_grid",
                format!("winding counts must lie in 1..={max_windings}, got {n}"),
            ));
        }
        if self.power_splits.is_empty() {
            return Err(Error::invalid("power_splits", "must not be empty"));
        }
        if let Some(s) = self.power_splits.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::invalid("power_splits", format!("fractions must lie in [0, 1], got {s}")));
        }
        if !(self.min_separation.is_finite() && self.min_separation >= 0.0) {
            return Err(Error::invalid(
                "min_separation",
                format!("must be finite and >= 0, got {}", self.min_separation),
            ));
        }
        match &self.relay_positions {
            PositionGrid::Evenly { count: 0 } => {
                Err(Error::invalid("relay position count", "must be at least 1"))
            }
            PositionGrid::Fixed { positions } if positions.is_empty() => {
                Err(Error::invalid("relay positions", "must not be empty"))
            }
            _ => Ok(()),
        }
    }
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self::coarse()
    }
}

/// Everything that stays fixed during a search.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub medium: SoilMedium,
    pub coil_radius: f64,
    pub wire_radius: f64,
    pub layout: WindingLayout,
    pub max_windings: u32,
    /// Polarization factor of both hops (and of the direct link).
    pub polarization: f64,
    /// `P_S + P_R` in W.
    pub total_power: f64,
    pub band: BandConfig,
    pub models: PhysicsModels,
    pub max_iterations: usize,
    pub convergence_tol: f64,
}

impl Default for SystemModel {
    /// Dry soil, 0.15 m coils of 0.5 mm wire, coaxial deployment and 10 mW.
    fn default() -> Self {
        Self {
            medium: SoilMedium::dry_soil(),
            coil_radius: 0.15,
            wire_radius: 0.5e-3,
            layout: WindingLayout::Square,
            max_windings: DEFAULT_MAX_WINDINGS,
            polarization: 2.0,
            total_power: 10e-3,
            band: BandConfig::default(),
            models: PhysicsModels::default(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
        }
    }
}

impl SystemModel {
    pub fn coil(&self, windings: u32) -> Result<CoilDesign> {
        let coil = match self.layout {
            WindingLayout::Square => CoilDesign::square(self.coil_radius, self.wire_radius, windings)?,
            WindingLayout::Layers(k) => {
                CoilDesign::new(self.coil_radius, self.wire_radius, windings, k.min(windings).max(1))?
            }
        };
        coil.check_max_windings(self.max_windings)?;
        Ok(coil)
    }

    pub fn circuit(&self, coil: &CoilDesign, f0: f64) -> Result<CircuitParams> {
        CircuitParams::design(coil, &self.medium, f0, &self.models)
    }

    pub fn relay_link(&self, distance: f64, position: f64, min_separation: f64, f0: f64, windings: u32) -> Result<LinkModel> {
        let coil = self.coil(windings)?;
        let circuit = self.circuit(&coil, f0)?;
        let geometry = RelayGeometry::on_line(distance, position, self.polarization, min_separation)?;
        build_link_model(&circuit, &coil, &geometry, &self.medium, self.band.grid(f0)?, &self.models)
    }

    pub fn direct_link(&self, distance: f64, f0: f64, windings: u32) -> Result<DirectLink> {
        let coil = self.coil(windings)?;
        let circuit = self.circuit(&coil, f0)?;
        build_direct_link(
            &circuit,
            &coil,
            distance,
            self.polarization,
            &self.medium,
            self.band.grid(f0)?,
            &self.models,
        )
    }

    pub fn scheme_config(&self, scheme: Scheme, duplex: Duplex, power_split: f64) -> SchemeConfig {
        SchemeConfig {
            max_iterations: self.max_iterations,
            convergence_tol: self.convergence_tol,
            ..SchemeConfig::with_split(scheme, duplex, self.total_power, power_split)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        self.coil(1)?;
        if !(self.polarization.is_finite() && self.polarization >= 0.0) {
            return Err(Error::invalid(
                "polarization",
                format!("must be finite and >= 0, got {}", self.polarization),
            ));
        }
        if !(self.total_power.is_finite() && self.total_power >= 0.0) {
            return Err(Error::invalid(
                "total_power",
                format!("must be finite and >= 0, got {}", self.total_power),
            ));
        }
        self.band.grid(1.0)?;
        self.scheme_config(Scheme::Af, Duplex::Hd, 0.5).validate()
    }
}

/// What is being optimized: a relaying scheme or the link without relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Relay(Scheme),
    Direct,
}

impl Target {
    pub fn label(self) -> &'static str {
        match self {
            Target::Relay(s) => s.label(),
            Target::Direct => "direct",
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One grid point of the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub f0: f64,
    pub windings: u32,
    /// Distance of the relay from the source; `None` for the direct link.
    pub relay_position: Option<f64>,
    /// Source share of the total power.
    pub power_split: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub point: OperatingPoint,
    /// bit/s
    pub rate_hd: f64,
    /// bit/s; equals `rate_hd` for the direct link.
    pub rate_fd: f64,
}

impl SurfacePoint {
    pub fn rate(&self, duplex: Duplex) -> f64 {
        match duplex {
            Duplex::Hd => self.rate_hd,
            Duplex::Fd => self.rate_fd,
        }
    }
}

/// How full-duplex optima are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdSelection {
    /// The full-duplex rate at the half-duplex optimum.
    #[default]
    HdParameters,
    /// The best full-duplex rate over the surface.
    Independent,
}

/// Rates of one target at every evaluated grid point, in grid order
/// (f0 outermost, then windings, relay position and power split).
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub distance: f64,
    pub target: Target,
    pub points: Vec<SurfacePoint>,
    /// Relay positions skipped for violating the minimum separation.
    pub infeasible_positions: Vec<f64>,
}

/// Result of a search for one target and duplex mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub target: Target,
    pub duplex: Duplex,
    pub distance: f64,
    pub best_config: OperatingPoint,
    /// bit/s
    pub best_rate: f64,
    /// Index of `best_config` in `rate_surface.points`.
    pub best_index: usize,
    pub rate_surface: Arc<Surface>,
}

/// `true` when `a` beats `b`: higher rate, then lower f0, then fewer windings.
fn beats(a: &SurfacePoint, rate_a: f64, b: &SurfacePoint, rate_b: f64) -> bool {
    match rate_a.total_cmp(&rate_b) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            (a.point.f0, a.point.windings) < (b.point.f0, b.point.windings)
        }
    }
}

impl Surface {
    /// Best point by `rate` among those accepted by `filter`.
    fn argmax(&self, rate: impl Fn(&SurfacePoint) -> f64, filter: impl Fn(&SurfacePoint) -> bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, p) in self.points.iter().enumerate() {
            if !filter(p) {
                continue;
            }
            match best {
                Some(b) if !beats(p, rate(p), &self.points[b], rate(&self.points[b])) => {}
                _ => best = Some(i),
            }
        }
        best
    }

    /// Optimum among the points accepted by `filter`.
    pub fn optimum_where(
        self: &Arc<Self>,
        duplex: Duplex,
        selection: FdSelection,
        filter: impl Fn(&SurfacePoint) -> bool,
    ) -> Result<Optimum> {
        let select = match selection {
            FdSelection::HdParameters => Duplex::Hd,
            FdSelection::Independent => duplex,
        };
        let best = self
            .argmax(|p| p.rate(select), filter)
            .ok_or_else(|| Error::invalid("rate surface", "no grid point matches"))?;
        let p = self.points[best];
        Ok(Optimum {
            target: self.target,
            duplex,
            distance: self.distance,
            best_config: p.point,
            best_rate: p.rate(duplex),
            best_index: best,
            rate_surface: Arc::clone(self),
        })
    }

    pub fn optimum(self: &Arc<Self>, duplex: Duplex, selection: FdSelection) -> Result<Optimum> {
        self.optimum_where(duplex, selection, |_| true)
    }

    /// Relay positions present on the surface, in grid order.
    pub fn positions(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for p in &self.points {
            if let Some(x) = p.point.relay_position {
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// Writes one row per grid point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::Io {
            path: "rate surface".into(),
            message: e.to_string(),
        };
        w.write_record([
            "distance_m",
            "target",
            "f0_hz",
            "windings",
            "relay_pos_m",
            "power_split",
            "rate_hd_bps",
            "rate_fd_bps",
        ])
        .map_err(io)?;
        for p in &self.points {
            w.write_record([
                self.distance.to_string(),
                self.target.label().to_string(),
                p.point.f0.to_string(),
                p.point.windings.to_string(),
                p.point.relay_position.map(|x| x.to_string()).unwrap_or_default(),
                p.point.power_split.to_string(),
                p.rate_hd.to_string(),
                p.rate_fd.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "rate surface".into(),
            message: e.to_string(),
        })
    }
}

/// HD and FD rates of every requested scheme at one link and power split.
/// FF starts from the AF solution, as [`evaluate`] does.
fn rates_at(system: &SystemModel, link: &LinkModel, split: f64, schemes: &[Scheme]) -> Result<Vec<(f64, f64)>> {
    let needs_af = schemes.iter().any(|s| matches!(s, Scheme::Af | Scheme::Ff));
    let af = if needs_af {
        Some(af_rate_hd(link, &system.scheme_config(Scheme::Af, Duplex::Hd, split))?)
    } else {
        None
    };
    schemes
        .iter()
        .map(|&scheme| {
            let hd_cfg = system.scheme_config(scheme, Duplex::Hd, split);
            let fd_cfg = system.scheme_config(scheme, Duplex::Fd, split);
            let (hd, fd) = match scheme {
                Scheme::Af => {
                    let af = af.as_ref().expect("computed above");
                    (af.rate, af_ff_rate_fd(link, &fd_cfg, af)?.rate)
                }
                Scheme::Ff => {
                    let ff = ff_rate_hd_from(link, &hd_cfg, af.as_ref().expect("computed above"))?;
                    (ff.rate, af_ff_rate_fd(link, &fd_cfg, &ff)?.rate)
                }
                Scheme::Df => (df_rate_hd(link, &hd_cfg)?.rate, df_rate_fd(link, &fd_cfg)?.rate),
            };
            if !(hd.is_finite() && fd.is_finite()) {
                return Err(Error::invalid("rate", format!("{scheme} produced a non-finite rate")));
            }
            Ok((hd, fd))
        })
        .collect()
}

/// Surfaces of every scheme in `schemes` (in that order) at `distance`.
/// Each link is built once and shared by all schemes and power splits.
pub fn search_surfaces(
    system: &SystemModel,
    distance: f64,
    space: &SearchSpace,
    schemes: &[Scheme],
) -> Result<Vec<Arc<Surface>>> {
    system.validate()?;
    space.validate(system.max_windings)?;
    if schemes.is_empty() {
        return Err(Error::invalid("schemes", "must not be empty"));
    }
    let positions = space.relay_positions.resolve(distance, space.min_separation)?;
    let (nf, nn, np) = (space.f0_grid.len(), space.windings_grid.len(), positions.feasible.len());

    let cells: Vec<Vec<Vec<(f64, f64)>>> = (0..nf * nn * np)
        .into_par_iter()
        .map(|cell| {
            let f0 = space.f0_grid[cell / (nn * np)];
            let windings = space.windings_grid[cell / np % nn];
            let position = positions.feasible[cell % np];
            let link = system.relay_link(distance, position, space.min_separation, f0, windings)?;
            space
                .power_splits
                .iter()
                .map(|&split| rates_at(system, &link, split, schemes))
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(schemes
        .iter()
        .enumerate()
        .map(|(k, &scheme)| {
            let mut points = Vec::with_capacity(cells.len() * space.power_splits.len());
            for (cell, per_split) in cells.iter().enumerate() {
                for (s, rates) in per_split.iter().enumerate() {
                    let (rate_hd, rate_fd) = rates[k];
                    points.push(SurfacePoint {
                        point: OperatingPoint {
                            f0: space.f0_grid[cell / (nn * np)],
                            windings: space.windings_grid[cell / np % nn],
                            relay_position: Some(positions.feasible[cell % np]),
                            power_split: space.power_splits[s],
                        },
                        rate_hd,
                        rate_fd,
                    });
                }
            }
            Arc::new(Surface {
                distance,
                target: Target::Relay(scheme),
                points,
                infeasible_positions: positions.infeasible.clone(),
            })
        })
        .collect())
}

/// Surface of the link without relay over f0 and windings; the source
/// spends the whole power budget.
pub fn direct_surface(system: &SystemModel, distance: f64, space: &SearchSpace) -> Result<Arc<Surface>> {
    system.validate()?;
    space.validate(system.max_windings)?;
    let nn = space.windings_grid.len();
    let points = (0..space.f0_grid.len() * nn)
        .into_par_iter()
        .map(|cell| {
            let f0 = space.f0_grid[cell / nn];
            let windings = space.windings_grid[cell % nn];
            let link = system.direct_link(distance, f0, windings)?;
            let rate = direct_rate(&link, system.total_power)?;
            Ok(SurfacePoint {
                point: OperatingPoint {
                    f0,
                    windings,
                    relay_position: None,
                    power_split: 1.0,
                },
                rate_hd: rate,
                rate_fd: rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(Surface {
        distance,
        target: Target::Direct,
        points,
        infeasible_positions: Vec::new(),
    }))
}

/// Best configuration of one scheme and duplex mode at `distance`.
pub fn full_search(
    system: &SystemModel,
    distance: f64,
    space: &SearchSpace,
    scheme: Scheme,
    duplex: Duplex,
    selection: FdSelection,
) -> Result<Optimum> {
    let surface = search_surfaces(system, distance, space, &[scheme])?.remove(0);
    surface.optimum(duplex, selection)
}

/// Best configuration of the link without relay.
pub fn direct_search(system: &SystemModel, distance: f64, space: &SearchSpace) -> Result<Optimum> {
    direct_surface(system, distance, space)?.optimum(Duplex::Hd, FdSelection::HdParameters)
}

/// Surfaces of one distance of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub distance: f64,
    /// One per requested scheme, in request order.
    pub relayed: Vec<Arc<Surface>>,
    pub direct: Option<Arc<Surface>>,
}

impl SweepEntry {
    pub fn surface(&self, target: Target) -> Option<&Arc<Surface>> {
        match target {
            Target::Direct => self.direct.as_ref(),
            Target::Relay(s) => self.relayed.iter().find(|x| x.target == Target::Relay(s)),
        }
    }

    pub fn optimum(&self, target: Target, duplex: Duplex, selection: FdSelection) -> Result<Optimum> {
        self.surface(target)
            .ok_or_else(|| Error::invalid("target", format!("{target} was not searched")))?
            .optimum(duplex, selection)
    }
}

/// One search per distance, in input order.
pub fn sweep_distance(
    system: &SystemModel,
    distances: &[f64],
    space: &SearchSpace,
    schemes: &[Scheme],
    include_direct: bool,
) -> Result<Vec<SweepEntry>> {
    distances
        .iter()
        .map(|&distance| {
            let relayed = if schemes.is_empty() {
                Vec::new()
            } else {
                search_surfaces(system, distance, space, schemes)?
            };
            let direct = if include_direct {
                Some(direct_surface(system, distance, space)?)
            } else {
                None
            };
            Ok(SweepEntry {
                distance,
                relayed,
                direct,
            })
        })
        .collect()
}

/// Re-evaluates one operating point through the rate engine.
pub fn evaluate_point(
    system: &SystemModel,
    distance: f64,
    min_separation: f64,
    scheme: Scheme,
    duplex: Duplex,
    point: &OperatingPoint,
) -> Result<RateResult> {
    let position = point
        .relay_position
        .ok_or_else(|| Error::invalid("relay_position", "a relayed point needs a relay position"))?;
    let link = system.relay_link(distance, position, min_separation, point.f0, point.windings)?;
    evaluate(&link, &system.scheme_config(scheme, duplex, point.power_split))
}

/// Rate of the link without relay at one operating point.
pub fn evaluate_direct(system: &SystemModel, distance: f64, point: &OperatingPoint) -> Result<f64> {
    let link = system.direct_link(distance, point.f0, point.windings)?;
    direct_rate(&link, system.total_power)
}
