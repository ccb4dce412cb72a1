//! Scenario files: a TOML description of the physical setup, the search
//! grids and the experiment to run.
//!
//! Only `name` and `distance_m` are required; everything else defaults to
//! the dry-soil setup with 10 mW total power (see `docs/scenario.md`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::BandConfig;
use crate::medium::{PhysicsModels, SoilMedium, WindingLayout, DEFAULT_MAX_WINDINGS, MU0};
use crate::optimizer::{log_grid, FdSelection, OperatingPoint, PositionGrid, SearchSpace, SystemModel};
use crate::relaying::{Duplex, Scheme, DEFAULT_CONVERGENCE_TOL, DEFAULT_MAX_ITERATIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Distances {
    One(f64),
    Many(Vec<f64>),
}

impl Distances {
    pub fn as_vec(&self) -> Vec<f64> {
        match self {
            Distances::One(d) => vec![*d],
            Distances::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub total_power_w: f64,
    /// Polarization factor J of every coil pair.
    pub polarization: f64,
    pub min_separation_m: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            total_power_w: 10e-3,
            polarization: 2.0,
            min_separation_m: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumConfig {
    pub conductivity_s_per_m: f64,
    pub relative_permittivity: f64,
    pub relative_permeability: f64,
    pub temperature_k: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        let soil = SoilMedium::dry_soil();
        Self {
            conductivity_s_per_m: soil.conductivity,
            relative_permittivity: soil.relative_permittivity,
            relative_permeability: soil.permeability / MU0,
            temperature_k: soil.temperature,
        }
    }
}

impl MediumConfig {
    pub fn medium(&self) -> Result<SoilMedium> {
        SoilMedium::new(
            self.conductivity_s_per_m,
            self.relative_permittivity,
            self.relative_permeability * MU0,
            self.temperature_k,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoilConfig {
    pub radius_m: f64,
    pub wire_radius_m: f64,
    pub layout: WindingLayout,
    pub max_windings: u32,
}

impl Default for CoilConfig {
    fn default() -> Self {
        Self {
            radius_m: 0.15,
            wire_radius_m: 0.5e-3,
            layout: WindingLayout::Square,
            max_windings: DEFAULT_MAX_WINDINGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub convergence_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
        }
    }
}

/// Resonance-frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrequencyGridConfig {
    Log {
        start_hz: f64,
        end_hz: f64,
        per_decade: usize,
    },
    List {
        values_hz: Vec<f64>,
    },
}

impl Default for FrequencyGridConfig {
    fn default() -> Self {
        FrequencyGridConfig::Log {
            start_hz: 1e3,
            end_hz: 3e7,
            per_decade: 20,
        }
    }
}

impl FrequencyGridConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            FrequencyGridConfig::Log {
                start_hz,
                end_hz,
                per_decade,
            } => log_grid(*start_hz, *end_hz, *per_decade),
            FrequencyGridConfig::List { values_hz } => Ok(values_hz.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub f0: FrequencyGridConfig,
    pub windings: Vec<u32>,
    pub relay_positions: PositionGrid,
    pub power_splits: Vec<f64>,
    pub fd_selection: FdSelection,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let coarse = SearchSpace::coarse();
        Self {
            f0: FrequencyGridConfig::default(),
            windings: coarse.windings_grid,
            relay_positions: coarse.relay_positions,
            power_splits: coarse.power_splits,
            fd_selection: FdSelection::default(),
        }
    }
}

/// Operating point for `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub f0_hz: f64,
    pub windings: u32,
    /// Defaults to the middle of the link.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relay_pos_m: Option<f64>,
    #[serde(default = "half")]
    pub power_split: f64,
}

fn half() -> f64 {
    0.5
}

/// Spectra of the `snr-profile` experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnrProfileConfig {
    pub scheme: Scheme,
    /// Defaults to the first, middle and last searched relay position.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions_m: Option<Vec<f64>>,
}

impl Default for SnrProfileConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Af,
            positions_m: None,
        }
    }
}

fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn all_duplex() -> Vec<Duplex> {
    Duplex::ALL.to_vec()
}

fn yes() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// One distance or a sweep, in m.
    pub distance_m: Distances,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "all_duplex")]
    pub duplex: Vec<Duplex>,
    #[serde(default = "yes")]
    pub include_direct: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default)]
    pub coil: CoilConfig,
    #[serde(default)]
    pub band: BandConfig,
    #[serde(default)]
    pub models: PhysicsModels,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointConfig>,
    #[serde(default)]
    pub snr_profile: SnrProfileConfig,
}

/// 1-based line and column of byte `offset` in `text`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl Scenario {
    /// Minimal scenario with every default in place.
    pub fn new(name: impl Into<String>, distance_m: Distances) -> Self {
        Self {
            name: name.into(),
            distance_m,
            schemes: all_schemes(),
            duplex: all_duplex(),
            include_direct: true,
            output_dir: default_output_dir(),
            system: SystemConfig::default(),
            medium: MediumConfig::default(),
            coil: CoilConfig::default(),
            band: BandConfig::default(),
            models: PhysicsModels::default(),
            solver: SolverConfig::default(),
            search: SearchConfig::default(),
            point: None,
            snr_profile: SnrProfileConfig::default(),
        }
    }

    /// Parses and validates a scenario. `origin` names the source in
    /// diagnostics, which carry `origin:line:column`.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| {
            let message = e.message().trim_end().to_string();
            match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    Error::Config(format!("{origin}:{line}:{col}: {message}"))
                }
                None => Error::Config(format!("{origin}: {message}")),
            }
        })?;
        scenario
            .validate()
            .map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        Ok(scenario)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::parse(text, "<scenario>")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize scenario: {e}")))
    }

    pub fn distances(&self) -> Vec<f64> {
        self.distance_m.as_vec()
    }

    pub fn system_model(&self) -> Result<SystemModel> {
        let system = SystemModel {
            medium: self.medium.medium()?,
            coil_radius: self.coil.radius_m,
            wire_radius: self.coil.wire_radius_m,
            layout: self.coil.layout,
            max_windings: self.coil.max_windings,
            polarization: self.system.polarization,
            total_power: self.system.total_power_w,
            band: self.band,
            models: self.models,
            max_iterations: self.solver.max_iterations,
            convergence_tol: self.solver.convergence_tol,
        };
        system.validate()?;
        Ok(system)
    }

    pub fn search_space(&self) -> Result<SearchSpace> {
        let space = SearchSpace {
            f0_grid: self.search.f0.values()?,
            windings_grid: self.search.windings.clone(),
            relay_positions: self.search.relay_positions.clone(),
            power_splits: self.search.power_splits.clone(),
            min_separation: self.system.min_separation_m,
        };
        space.validate(self.coil.max_windings)?;
        Ok(space)
    }

    /// Operating point of `evaluate` at `distance`.
    pub fn operating_point(&self, distance: f64) -> Result<OperatingPoint> {
        let p = self
            .point
            .as_ref()
            .ok_or_else(|| Error::Config("missing section `point` (needed by `evaluate`)".into()))?;
        Ok(OperatingPoint {
            f0: p.f0_hz,
            windings: p.windings,
            relay_position: Some(p.relay_pos_m.unwrap_or(0.5 * distance)),
            power_split: p.power_split,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let distances = self.distances();
        if distances.is_empty() {
            return Err(Error::invalid("distance_m", "must hold at least one distance"));
        }
        if let Some(d) = distances.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::invalid("distance_m", format!("distances must be finite and > 0, got {d}")));
        }
        if self.duplex.is_empty() {
            return Err(Error::invalid("duplex", "must list at least one mode"));
        }
        if self.schemes.is_empty() && !self.include_direct {
            return Err(Error::invalid("schemes", "nothing to compute: no scheme and no direct link"));
        }
        self.system_model()?;
        self.search_space()?;
        if let Some(p) = &self.point {
            if !(p.f0_hz.is_finite() && p.f0_hz > 0.0) {
                return Err(Error::invalid("point.f0_hz", format!("must be finite and > 0, got {}", p.f0_hz)));
            }
            if p.windings == 0 || p.windings > self.coil.max_windings {
                return Err(Error::invalid(
                    "point.windings",
                    format!("must lie in 1..={}, got {}", self.coil.max_windings, p.windings),
                ));
            }
            if !(0.0..=1.0).contains(&p.power_split) {
                return Err(Error::invalid(
                    "point.power_split",
                    format!("must lie in [0, 1], got {}", p.power_split),
                ));
            }
            if let Some(x) = p.relay_pos_m {
                if !x.is_finite() {
                    return Err(Error::invalid("point.relay_pos_m", "must be finite"));
                }
            }
        }
        if let Some(ps) = &self.snr_profile.positions_m {
            if ps.is_empty() || ps.iter().any(|p| !p.is_finite()) {
                return Err(Error::invalid("snr_profile.positions_m", "must hold finite positions"));
            }
        }
        Ok(())
    }

    /// Search settings for full-duplex optima.
    pub fn fd_selection(&self) -> FdSelection {
        self.search.fd_selection
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_takes_defaults() {
        let s = Scenario::from_toml_str("name = \"x\"\ndistance_m = 20\n").unwrap();
        assert_eq!(s, Scenario::new("x", Distances::One(20.0)));
        let system = s.system_model().unwrap();
        assert_eq!(system, SystemModel::default());
        assert_eq!(s.search_space().unwrap(), SearchSpace::coarse());
    }

    #[test]
    fn missing_field_is_named() {
        let err = Scenario::from_toml_str("name = \"x\"\n").unwrap_err().to_string();
        assert!(err.contains("distance_m"), "{err}");
    }

    #[test]
    fn syntax_error_carries_line_number() {
        let text = "name = \"x\"\ndistance_m = [10, 20]\n[medium]\nconductivity_s_per_m = = 1\n";
        let err = Scenario::parse(text, "cfg.toml").unwrap_err().to_string();
        assert!(err.starts_with("cfg.toml:4:"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected_with_position() {
        let text = "name = \"x\"\ndistance_m = 20\n[coil]\nradius = 0.2\n";
        let err = Scenario::parse(text, "c").unwrap_err().to_string();
        assert!(err.starts_with("c:4:"), "{err}");
        assert!(err.contains("radius"), "{err}");
    }

    #[test]
    fn invalid_values_are_reported() {
        let err = Scenario::from_toml_str("name = \"x\"\ndistance_m = -3\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("distance_m"), "{err}");
        let err = Scenario::from_toml_str("name = \"x\"\ndistance_m = 20\n[search]\nwindings = [2000]\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("windings"), "{err}");
    }

    #[test]
    fn round_trip_preserves_everything() {
        let mut s = Scenario::new("rt", Distances::Many(vec![10.0, 20.5]));
        s.search.f0 = FrequencyGridConfig::List {
            values_hz: vec![1e4, 2.5e4],
        };
        s.search.relay_positions = PositionGrid::Fixed {
            positions: vec![5.0, 10.0],
        };
        s.coil.layout = WindingLayout::Layers(4);
        s.models.eddy = crate::medium::EddyModel::Lossless;
        s.point = Some(PointConfig {
            f0_hz: 1e4,
            windings: 100,
            relay_pos_m: None,
            power_split: 0.4,
        });
        s.snr_profile.positions_m = Some(vec![4.0]);
        let text = s.to_toml_string().unwrap();
        assert_eq!(Scenario::from_toml_str(&text).unwrap(), s, "{text}");
        let d = Scenario::new("d", Distances::One(20.0));
        assert_eq!(Scenario::from_toml_str(&d.to_toml_string().unwrap()).unwrap(), d);
    }
}
