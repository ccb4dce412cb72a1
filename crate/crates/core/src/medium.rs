//! Physical-layer primitives: soil, coil electrical parameters, mutual
//! inductance and the series impedance of one resonant transceiver circuit.
//!
//! Every transceiver (source, relay, destination) carries the same coil, so a
//! single [`CircuitParams`] describes all three circuits of a link.
//!
//! The coil and loss models are pluggable through [`PhysicsModels`]; the
//! defaults are
//!
//! * inductance: Wheeler's multilayer air-core approximation,
//! * wire resistance: copper, with the conduction area reduced to a one
//!   skin-depth annulus once the skin depth drops below the wire radius,
//! * eddy-current loss factor: `exp(-r / delta)` with the soil skin depth
//!   `delta = 1 / sqrt(pi f mu sigma)`,
//! * load resistance: matched to the wire resistance at resonance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnetic constant in H/m.
pub const MU0: f64 = 4.0e-7 * PI;
/// Electric constant in F/m.
pub const EPSILON0: f64 = 8.854_187_812_8e-12;
/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Resistivity of annealed copper in Ohm m.
pub const COPPER_RESISTIVITY: f64 = 1.68e-8;
/// Upper bound on the winding count of the deployed coils.
pub const DEFAULT_MAX_WINDINGS: u32 = 1000;

/// Wheeler's multilayer coefficient, 0.8 uH/inch expressed in H/m.
const WHEELER_COEFF: f64 = 0.8e-6 / 0.0254;

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(what, format!("must be finite and > 0, got {value}")))
    }
}

/// Electromagnetic properties of the homogeneous propagation medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoilMedium {
    /// Conductivity in S/m.
    pub conductivity: f64,
    /// Relative permittivity. Carried for completeness; the default loss
    /// model does not use it.
    pub relative_permittivity: f64,
    /// Permeability in H/m.
    pub permeability: f64,
    /// Temperature in K.
    pub temperature: f64,
}

impl SoilMedium {
    pub fn new(
        conductivity: f64,
        relative_permittivity: f64,
        permeability: f64,
        temperature: f64,
    ) -> Result<Self> {
        let medium = Self {
            conductivity,
            relative_permittivity,
            permeability,
            temperature,
        };
        medium.validate()?;
        Ok(medium)
    }

    /// Dry soil: 0.01 S/m, relative permittivity 7, vacuum permeability, 290 K.
    pub fn dry_soil() -> Self {
        Self {
            conductivity: 0.01,
            relative_permittivity: 7.0,
            permeability: MU0,
            temperature: 290.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.conductivity.is_finite() && self.conductivity >= 0.0) {
            return Err(Error::invalid(
                "conductivity",
                format!("must be finite and >= 0, got {}", self.conductivity),
            ));
        }
        if !(self.relative_permittivity.is_finite() && self.relative_permittivity >= 1.0) {
            return Err(Error::invalid(
                "relative_permittivity",
                format!("must be >= 1, got {}", self.relative_permittivity),
            ));
        }
        check_positive("permeability", self.permeability)?;
        check_positive("temperature", self.temperature)
    }

    /// Absolute permittivity in F/m.
    pub fn permittivity(&self) -> f64 {
        self.relative_permittivity * EPSILON0
    }

    /// Skin depth of the medium at `frequency`; infinite for a lossless medium.
    pub fn skin_depth(&self, frequency: f64) -> f64 {
        if self.conductivity == 0.0 || frequency == 0.0 {
            return f64::INFINITY;
        }
        1.0 / (PI * frequency * self.permeability * self.conductivity).sqrt()
    }
}

impl Default for SoilMedium {
    fn default() -> Self {
        Self::dry_soil()
    }
}

/// Geometry of a multilayer air-core coil.
///
/// `coil_radius` is the mean winding radius. The winding pack has `layers`
/// layers of thickness `2 * wire_radius`; its axial length is
/// `2 * wire_radius * windings / layers` (turns are spread evenly, fractional
/// turns per layer allowed so the pack dimensions vary smoothly with N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilDesign {
    pub coil_radius: f64,
    pub wire_radius: f64,
    pub windings: u32,
    pub layers: u32,
}

impl CoilDesign {
    pub fn new(coil_radius: f64, wire_radius: f64, windings: u32, layers: u32) -> Result<Self> {
        check_positive("wire_radius", wire_radius)?;
        check_positive("coil_radius", coil_radius)?;
        if coil_radius <= wire_radius {
            return Err(Error::invalid(
                "coil_radius",
                format!("must exceed the wire radius {wire_radius}, got {coil_radius}"),
            ));
        }
        if windings == 0 {
            return Err(Error::invalid("windings", "must be at least 1"));
        }
        if layers == 0 || layers > windings {
            return Err(Error::invalid(
                "layers",
                format!("must lie in 1..={windings}, got {layers}"),
            ));
        }
        Ok(Self {
            coil_radius,
            wire_radius,
            windings,
            layers,
        })
    }

    /// Coil whose winding pack is roughly square: `round(sqrt(N))` layers.
    pub fn square(coil_radius: f64, wire_radius: f64, windings: u32) -> Result<Self> {
        let layers = (f64::from(windings).sqrt().round() as u32).clamp(1, windings.max(1));
        Self::new(coil_radius, wire_radius, windings, layers)
    }

    pub fn radius(&self) -> f64 {
        self.coil_radius
    }

    pub fn wire(&self) -> f64 {
        self.wire_radius
    }

    /// Same coil with another winding count; keeps the square layout when
    /// the original used it, otherwise keeps the layer count (clamped to N).
    pub fn with_windings(&self, windings: u32, layout: WindingLayout) -> Result<Self> {
        match layout {
            WindingLayout::Square => Self::square(self.radius(), self.wire(), windings),
            WindingLayout::Layers(k) => {
                Self::new(self.radius(), self.wire(), windings, k.min(windings).max(1))
            }
        }
    }

    pub fn check_max_windings(&self, max_windings: u32) -> Result<()> {
        if self.windings > max_windings {
            return Err(Error::invalid(
                "windings",
                format!("{} exceeds the configured maximum {max_windings}", self.windings),
            ));
        }
        Ok(())
    }

    /// Total wire length, one circumference per turn.
    pub fn wire_length(&self) -> f64 {
        2.0 * PI * self.radius() * f64::from(self.windings)
    }

    /// Axial length of the winding pack.
    pub fn winding_length(&self) -> f64 {
        2.0 * self.wire() * f64::from(self.windings) / f64::from(self.layers)
    }

    /// Radial depth of the winding pack.
    pub fn winding_depth(&self) -> f64 {
        2.0 * self.wire() * f64::from(self.layers)
    }
}

/// How the layer count follows the winding count during a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindingLayout {
    #[default]
    Square,
    Layers(u32),
}

/// Inductance model for the transceiver coil.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InductanceModel {
    /// `L = 0.8e-6/0.0254 * N^2 a^2 / (6a + 9l + 10c) * mu/mu0` (SI units).
    #[default]
    WheelerMultilayer,
    /// Fixed inductance in H, independent of geometry.
    Fixed { henry: f64 },
}

impl InductanceModel {
    pub fn inductance(&self, design: &CoilDesign, medium: &SoilMedium) -> Result<f64> {
        match *self {
            InductanceModel::WheelerMultilayer => Ok(wheeler_multilayer(design, medium)),
            InductanceModel::Fixed { henry } => {
                check_positive("inductance", henry)?;
                Ok(henry)
            }
        }
    }
}

fn wheeler_multilayer(design: &CoilDesign, medium: &SoilMedium) -> f64 {
    let a = design.radius();
    let n = f64::from(design.windings);
    let denom = 6.0 * a + 9.0 * design.winding_length() + 10.0 * design.winding_depth();
    WHEELER_COEFF * n * n * a * a / denom * (medium.permeability / MU0)
}

/// Model of the parasitic wire resistance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ResistanceModel {
    /// Solid round wire of the given resistivity; above the frequency where
    /// the conductor skin depth falls below the wire radius only an annulus
    /// one skin depth thick conducts.
    Wire {
        resistivity: f64,
        #[serde(default = "default_true")]
        skin_effect: bool,
    },
    /// Fixed resistance in Ohm.
    Fixed { ohms: f64 },
}

fn default_true() -> bool {
    true
}

impl Default for ResistanceModel {
    fn default() -> Self {
        ResistanceModel::Wire {
            resistivity: COPPER_RESISTIVITY,
            skin_effect: true,
        }
    }
}

impl ResistanceModel {
    pub fn resistance(&self, design: &CoilDesign, frequency: f64) -> Result<f64> {
        if !(frequency.is_finite() && frequency >= 0.0) {
            return Err(Error::invalid(
                "frequency",
                format!("must be finite and >= 0, got {frequency}"),
            ));
        }
        match *self {
            ResistanceModel::Wire {
                resistivity,
                skin_effect,
            } => {
                check_positive("resistivity", resistivity)?;
                let rw = design.wire();
                let full = PI * rw * rw;
                let area = if skin_effect && frequency > 0.0 {
                    // conductor is non-magnetic
                    let delta = (resistivity / (PI * frequency * MU0)).sqrt();
                    if delta >= rw {
                        full
                    } else {
                        full - PI * (rw - delta) * (rw - delta)
                    }
                } else {
                    full
                };
                Ok(resistivity * design.wire_length() / area)
            }
            ResistanceModel::Fixed { ohms } => {
                check_positive("wire_resistance", ohms)?;
                Ok(ohms)
            }
        }
    }
}

/// Eddy-current loss factor `G` applied to the mutual inductance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EddyModel {
    /// `G = exp(-r / delta)`, `delta` the skin depth of the medium.
    #[default]
    SkinDepth,
    /// `G = 1`.
    Lossless,
}

impl EddyModel {
    pub fn factor(&self, medium: &SoilMedium, distance: f64, frequency: f64) -> f64 {
        match self {
            EddyModel::SkinDepth => {
                let delta = medium.skin_depth(frequency);
                if delta.is_infinite() {
                    1.0
                } else {
                    (-distance / delta).exp()
                }
            }
            EddyModel::Lossless => 1.0,
        }
    }
}

/// Rule for the load resistance of every transceiver.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LoadModel {
    /// Conjugate match at resonance with the coupling neglected: `R_L = R`.
    #[default]
    MatchWire,
    /// Fixed load in Ohm.
    Fixed { ohms: f64 },
}

impl LoadModel {
    pub fn load_resistance(&self, wire_resistance: f64) -> Result<f64> {
        match *self {
            LoadModel::MatchWire => {
                check_positive("wire_resistance", wire_resistance)?;
                Ok(wire_resistance)
            }
            LoadModel::Fixed { ohms } => {
                check_positive("load_resistance", ohms)?;
                Ok(ohms)
            }
        }
    }
}

/// The set of swappable physical models.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsModels {
    pub inductance: InductanceModel,
    pub resistance: ResistanceModel,
    pub eddy: EddyModel,
    pub load: LoadModel,
}

/// Lumped elements of one series-resonant transceiver circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    pub inductance: f64,
    pub wire_resistance: f64,
    pub capacitance: f64,
    pub load_resistance: f64,
    pub resonance_frequency: f64,
}

impl CircuitParams {
    /// Builds a circuit from explicit L, R, R_L; the capacitor is tuned to
    /// `resonance_frequency`.
    pub fn tuned(
        inductance: f64,
        wire_resistance: f64,
        load_resistance: f64,
        resonance_frequency: f64,
    ) -> Result<Self> {
        check_positive("inductance", inductance)?;
        check_positive("wire_resistance", wire_resistance)?;
        check_positive("load_resistance", load_resistance)?;
        check_positive("resonance_frequency", resonance_frequency)?;
        Ok(Self {
            inductance,
            wire_resistance,
            capacitance: tuning_capacitance(inductance, resonance_frequency)?,
            load_resistance,
            resonance_frequency,
        })
    }

    /// Derives all elements of the coil circuit resonant at `resonance_frequency`.
    /// The wire resistance is evaluated at the resonance frequency.
    pub fn design(
        coil: &CoilDesign,
        medium: &SoilMedium,
        resonance_frequency: f64,
        models: &PhysicsModels,
    ) -> Result<Self> {
        check_positive("resonance_frequency", resonance_frequency)?;
        let inductance = models.inductance.inductance(coil, medium)?;
        let wire_resistance = models.resistance.resistance(coil, resonance_frequency)?;
        let load_resistance = models.load.load_resistance(wire_resistance)?;
        Self::tuned(inductance, wire_resistance, load_resistance, resonance_frequency)
    }

    pub fn total_resistance(&self) -> f64 {
        self.wire_resistance + self.load_resistance
    }

    /// Series impedance `Z_g = j w L + 1/(j w C) + R + R_L`.
    pub fn impedance(&self, frequency: f64) -> Result<Complex64> {
        circuit_impedance(self, frequency)
    }

    pub(crate) fn impedance_unchecked(&self, frequency: f64) -> Complex64 {
        let w = 2.0 * PI * frequency;
        Complex64::new(
            self.total_resistance(),
            w * self.inductance - 1.0 / (w * self.capacitance),
        )
    }
}

/// Geometry of the source-relay-destination chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayGeometry {
    pub dist_source_relay: f64,
    pub dist_relay_dest: f64,
    pub polarization_sr: f64,
    pub polarization_rd: f64,
}

impl RelayGeometry {
    pub fn new(
        dist_source_relay: f64,
        dist_relay_dest: f64,
        polarization_sr: f64,
        polarization_rd: f64,
        min_separation: f64,
    ) -> Result<Self> {
        for (what, d) in [
            ("dist_source_relay", dist_source_relay),
            ("dist_relay_dest", dist_relay_dest),
        ] {
            check_positive(what, d)?;
            if d < min_separation {
                return Err(Error::invalid(
                    what,
                    format!("{d} m is below the minimum separation {min_separation} m"),
                ));
            }
        }
        for (what, j) in [
            ("polarization_sr", polarization_sr),
            ("polarization_rd", polarization_rd),
        ] {
            if !(j.is_finite() && j >= 0.0) {
                return Err(Error::invalid(what, format!("must be finite and >= 0, got {j}")));
            }
        }
        Ok(Self {
            dist_source_relay,
            dist_relay_dest,
            polarization_sr,
            polarization_rd,
        })
    }

    /// Relay at `position` metres from the source on a `distance` metre link,
    /// both hops sharing the same polarization factor.
    pub fn on_line(distance: f64, position: f64, polarization: f64, min_separation: f64) -> Result<Self> {
        Self::new(
            position,
            distance - position,
            polarization,
            polarization,
            min_separation,
        )
    }

    pub fn total_distance(&self) -> f64 {
        self.dist_source_relay + self.dist_relay_dest
    }
}

/// Inductance of the coil under the default multilayer model.
pub fn coil_inductance(design: &CoilDesign, medium: &SoilMedium) -> Result<f64> {
    InductanceModel::default().inductance(design, medium)
}

/// Wire resistance of the coil under the default copper model.
pub fn wire_resistance(design: &CoilDesign, frequency: f64) -> Result<f64> {
    ResistanceModel::default().resistance(design, frequency)
}

/// `C = 1 / ((2 pi f0)^2 L)`.
pub fn tuning_capacitance(inductance: f64, resonance_frequency: f64) -> Result<f64> {
    check_positive("inductance", inductance)?;
    check_positive("resonance_frequency", resonance_frequency)?;
    let w0 = 2.0 * PI * resonance_frequency;
    Ok(1.0 / (w0 * w0 * inductance))
}

/// `f0 = 1 / (2 pi sqrt(L C))`.
pub fn resonance_frequency(inductance: f64, capacitance: f64) -> f64 {
    1.0 / (2.0 * PI * (inductance * capacitance).sqrt())
}

/// Eddy-current loss factor under the default skin-depth model.
pub fn eddy_loss_factor(medium: &SoilMedium, distance: f64, frequency: f64) -> f64 {
    EddyModel::SkinDepth.factor(medium, distance, frequency)
}

/// Mutual inductance with the eddy factor set to one:
/// `mu pi N^2 a^4 / (4 r^3) J`.
pub fn lossless_mutual_inductance(
    design: &CoilDesign,
    medium: &SoilMedium,
    distance: f64,
    polarization: f64,
) -> Result<f64> {
    check_positive("distance", distance)?;
    if !(polarization.is_finite() && polarization >= 0.0) {
        return Err(Error::invalid(
            "polarization",
            format!("must be finite and >= 0, got {polarization}"),
        ));
    }
    let n = f64::from(design.windings);
    let a = design.radius();
    Ok(medium.permeability * PI * n * n * a.powi(4) / (4.0 * distance.powi(3)) * polarization)
}

/// `M = mu pi N^2 a^4 / (4 r^3) J G(f, r)` with the default eddy model.
pub fn mutual_inductance(
    design: &CoilDesign,
    medium: &SoilMedium,
    distance: f64,
    polarization: f64,
    frequency: f64,
) -> Result<f64> {
    mutual_inductance_with(
        EddyModel::SkinDepth,
        design,
        medium,
        distance,
        polarization,
        frequency,
    )
}

pub fn mutual_inductance_with(
    eddy: EddyModel,
    design: &CoilDesign,
    medium: &SoilMedium,
    distance: f64,
    polarization: f64,
    frequency: f64,
) -> Result<f64> {
    let m0 = lossless_mutual_inductance(design, medium, distance, polarization)?;
    Ok(m0 * eddy.factor(medium, distance, frequency))
}

pub fn circuit_impedance(params: &CircuitParams, frequency: f64) -> Result<Complex64> {
    check_positive("frequency", frequency)?;
    Ok(params.impedance_unchecked(frequency))
}

/// Load resistance under the default rule (`R_L = R`).
pub fn load_resistance(wire_resistance: f64) -> Result<f64> {
    LoadModel::MatchWire.load_resistance(wire_resistance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coil(n: u32) -> CoilDesign {
        CoilDesign::square(0.15, 0.5e-3, n).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn inductance_golden_and_decade() {
        // hand evaluation: 32 layers, l = 0.03125 m, c = 0.032 m
        let l = coil_inductance(&coil(1000), &SoilMedium::dry_soil()).unwrap();
        assert!(rel(l, 0.472_047_571_905_302) < 1e-13, "{l}");
        assert!((0.1..10.0).contains(&l));
    }

    #[test]
    fn inductance_grows_with_windings() {
        let m = SoilMedium::dry_soil();
        let l1 = coil_inductance(&coil(1), &m).unwrap();
        let l2 = coil_inductance(&coil(2), &m).unwrap();
        assert!(l2 > l1);
    }

    #[test]
    fn inductance_is_linear_in_scale() {
        let m = SoilMedium::dry_soil();
        let base = CoilDesign::new(0.15, 0.5e-3, 400, 20).unwrap();
        let scaled = CoilDesign::new(0.45, 1.5e-3, 400, 20).unwrap();
        let ratio = coil_inductance(&scaled, &m).unwrap() / coil_inductance(&base, &m).unwrap();
        assert!((ratio - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_coils() {
        assert!(CoilDesign::new(0.0, 0.5e-3, 10, 1).is_err());
        assert!(CoilDesign::new(0.15, 0.0, 10, 1).is_err());
        assert!(CoilDesign::new(1e-4, 0.5e-3, 10, 1).is_err());
        assert!(CoilDesign::new(0.15, 0.5e-3, 0, 1).is_err());
        assert!(coil(1001).check_max_windings(DEFAULT_MAX_WINDINGS).is_err());
    }

    #[test]
    fn wire_resistance_dc_and_skin() {
        let c = coil(1000);
        let dc = wire_resistance(&c, 0.0).unwrap();
        assert!(rel(dc, 20.16) < 1e-13, "{dc}");
        // skin depth in copper at 1 kHz is ~2 mm, larger than the wire
        assert_eq!(wire_resistance(&c, 1e3).unwrap(), dc);
        let r100k = wire_resistance(&c, 1e5).unwrap();
        assert!(rel(r100k, 30.781_730_203_826_771) < 1e-12, "{r100k}");
        let r2 = wire_resistance(&coil(500), 1e5).unwrap();
        assert!(r100k >= 2.0 * r2 * (1.0 - 1e-12));
        assert!(wire_resistance(&c, -1.0).is_err());
    }

    #[test]
    fn tuning_capacitance_values() {
        let c = tuning_capacitance(1.0, 1.0 / (2.0 * PI)).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
        let c = tuning_capacitance(1.0, 1e3).unwrap();
        assert!(rel(c, 2.533_029_591_058_444_3e-8) < 1e-13);
        assert!(rel(resonance_frequency(0.37, tuning_capacitance(0.37, 12_345.0).unwrap()), 12_345.0) < 1e-12);
    }

    #[test]
    fn mutual_inductance_values() {
        let m = SoilMedium::dry_soil();
        let c = coil(1000);
        assert_eq!(mutual_inductance(&c, &m, 10.0, 0.0, 1e5).unwrap(), 0.0);
        let m0 = lossless_mutual_inductance(&c, &m, 10.0, 2.0).unwrap();
        assert!(rel(m0, 9.992_974_456_102_976e-7) < 1e-13, "{m0}");
        let m2 = lossless_mutual_inductance(&c, &m, 20.0, 2.0).unwrap();
        assert_eq!(m0 / m2, 8.0);
        assert!(mutual_inductance(&c, &m, 0.0, 2.0, 1e5).is_err());
        assert!(mutual_inductance(&c, &m, -1.0, 2.0, 1e5).is_err());
    }

    #[test]
    fn eddy_factor_values() {
        let soil = SoilMedium::dry_soil();
        let g = eddy_loss_factor(&soil, 10.0, 1e6);
        assert!(rel(g, 0.137_117_418_188_185_65) < 1e-12, "{g}");
        let lossless = SoilMedium { conductivity: 0.0, ..soil };
        assert_eq!(eddy_loss_factor(&lossless, 10.0, 1e6), 1.0);
        assert!(eddy_loss_factor(&soil, 1e-9, 1e6) > 1.0 - 1e-9);
    }

    #[test]
    fn impedance_at_resonance_and_limits() {
        let p = CircuitParams::tuned(1e-3, 10.0, 10.0, 1e4).unwrap();
        let z = p.impedance(1e4).unwrap();
        assert!(z.im.abs() <= z.norm() * 1e-9);
        assert_eq!(z.re, 20.0);
        let f = 12e3;
        let w = 2.0 * PI * f;
        let z = p.impedance(f).unwrap();
        let expect_im = w * 1e-3 - 1.0 / (w * p.capacitance);
        assert!((z.im - expect_im).abs() <= 1e-12 * expect_im.abs());
        let z = p.impedance(1e9).unwrap();
        assert!(rel(z.im, 2.0 * PI * 1e9 * 1e-3) < 1e-6);
        assert!(p.impedance(0.0).is_err());
    }

    #[test]
    fn load_matches_wire() {
        assert_eq!(load_resistance(25.0).unwrap(), 25.0);
        let models = PhysicsModels::default();
        let soil = SoilMedium::dry_soil();
        let p = CircuitParams::design(&coil(100), &soil, 1e4, &models).unwrap();
        assert_eq!(p.load_resistance, p.wire_resistance);
    }

    #[test]
    fn medium_validation() {
        assert!(SoilMedium::new(-0.1, 7.0, MU0, 290.0).is_err());
        assert!(SoilMedium::new(0.01, 0.5, MU0, 290.0).is_err());
        assert!(SoilMedium::new(0.01, 7.0, 0.0, 290.0).is_err());
        assert!(SoilMedium::new(0.01, 7.0, MU0, 0.0).is_err());
        assert!(SoilMedium::new(0.0, 1.0, MU0, 1.0).is_ok());
    }

    #[test]
    fn geometry_respects_min_separation() {
        assert!(RelayGeometry::on_line(20.0, 2.0, 2.0, 3.0).is_err());
        assert!(RelayGeometry::on_line(20.0, 18.0, 2.0, 3.0).is_err());
        let g = RelayGeometry::on_line(20.0, 3.0, 2.0, 3.0).unwrap();
        assert_eq!(g.total_distance(), 20.0);
    }
}
