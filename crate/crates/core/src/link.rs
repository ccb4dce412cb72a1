//! Power spectral densities, channel power gains and thermal-noise spectra of
//! the three coupled resonant circuits (source, relay, destination).
//!
//! With `w = 2 pi f`, `Z = Z_g(f)` and `S = Z^2 + w^2 (M_SR^2 + M_RD^2)`:
//!
//! ```text
//! P_St   = |U|^2/2 |(Z^2 + (w M_RD)^2) / (Z S)|
//! P_Rr   = |U|^2/2 |w M_SR / S|^2 R_L
//! P_Dr1  = |U|^2/2 |w^2 M_SR M_RD / (Z S)|^2 R_L
//! P_Rt   = |U|^2/2 |Z / S|
//! P_Dr2  = |U|^2/2 |w M_RD / S|^2 R_L
//! |H_RR|^2 = |Z / S| R_L
//! P_Rn   = 4KT(R_L R + R_L^2) (|Z|^2 + w^2 (M_SR^2 + M_RD^2)) / (2 |S|^2)
//! P_Dn   = 4KT(R_L R + R_L^2) (|Z^2 - (w M_SR)^2|^2 + w^4 (M_SR M_RD)^2
//!          + |Z w M_RD|^2) / (2 |Z S|^2)
//! ```
//!
//! The transmit PSDs take the magnitude of the complex ratio, not its square.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{
    lossless_mutual_inductance, CircuitParams, CoilDesign, PhysicsModels, RelayGeometry,
    SoilMedium, BOLTZMANN,
};
use crate::spectrum::{FrequencyGrid, Spectrum};

/// Band evaluated around the resonance frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandConfig {
    /// Band width as a fraction of the resonance frequency.
    pub width_fraction: f64,
    /// Number of grid points.
    pub points: usize,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            width_fraction: 0.5,
            points: 2049,
        }
    }
}

impl BandConfig {
    pub fn grid(&self, resonance_frequency: f64) -> Result<FrequencyGrid> {
        if !(self.width_fraction > 0.0 && self.width_fraction < 2.0) {
            return Err(Error::invalid(
                "band width_fraction",
                format!("must lie in (0, 2), got {}", self.width_fraction),
            ));
        }
        FrequencyGrid::centered(
            resonance_frequency,
            resonance_frequency * self.width_fraction,
            self.points,
        )
    }
}

/// Shared sub-expressions of all link quantities at one frequency.
#[derive(Debug, Clone, Copy)]
struct Coupling {
    w: f64,
    m_sr: f64,
    m_rd: f64,
    z: Complex64,
    /// `Z^2 + w^2 (M_SR^2 + M_RD^2)`
    s: Complex64,
    load: f64,
    /// `4 K T (R_L R + R_L^2)`
    thermal: f64,
}

impl Coupling {
    fn new(params: &CircuitParams, m_sr: f64, m_rd: f64, temperature: f64, f: f64) -> Self {
        let w = 2.0 * PI * f;
        let z = params.impedance_unchecked(f);
        let s = z * z + w * w * (m_sr * m_sr + m_rd * m_rd);
        let rl = params.load_resistance;
        Self {
            w,
            m_sr,
            m_rd,
            z,
            s,
            load: rl,
            thermal: 4.0 * BOLTZMANN * temperature * (rl * params.wire_resistance + rl * rl),
        }
    }

    /// `P_St / (|U|^2/2)`
    fn source_tx(&self) -> f64 {
        let wm = self.w * self.m_rd;
        ((self.z * self.z + wm * wm) / (self.z * self.s)).norm()
    }

    /// `P_Rr / (|U|^2/2)`
    fn relay_rx(&self) -> f64 {
        (self.w * self.m_sr / self.s).norm_sqr() * self.load
    }

    /// `P_Dr1 / (|U|^2/2)`
    fn dest_rx_passive(&self) -> f64 {
        (self.w * self.w * self.m_sr * self.m_rd / (self.z * self.s)).norm_sqr() * self.load
    }

    /// `P_Rt / (|U_R|^2/2)`
    fn relay_tx(&self) -> f64 {
        (self.z / self.s).norm()
    }

    /// `P_Dr2 / (|U_R|^2/2)`
    fn dest_rx_relay(&self) -> f64 {
        (Complex64::new(0.0, self.w * self.m_rd) / self.s).norm_sqr() * self.load
    }

    fn gain_sr(&self) -> f64 {
        self.relay_rx() / self.source_tx()
    }

    fn gain_sd_passive(&self) -> f64 {
        self.dest_rx_passive() / self.source_tx()
    }

    fn gain_rd(&self) -> f64 {
        self.dest_rx_relay() / self.relay_tx()
    }

    fn gain_rr(&self) -> f64 {
        (self.z / self.s).norm() * self.load
    }

    fn noise_relay(&self) -> f64 {
        let sum_m2 = self.m_sr * self.m_sr + self.m_rd * self.m_rd;
        self.thermal * (self.z.norm_sqr() + self.w * self.w * sum_m2) / (2.0 * self.s.norm_sqr())
    }

    fn noise_dest_terms(&self) -> [f64; 3] {
        let den = 2.0 * (self.z * self.s).norm_sqr();
        let wm_sr = self.w * self.m_sr;
        let wm_rd = self.w * self.m_rd;
        [
            self.thermal * (self.z * self.z - wm_sr * wm_sr).norm_sqr() / den,
            self.thermal * (wm_sr * wm_rd) * (wm_sr * wm_rd) / den,
            self.thermal * (self.z * wm_rd).norm_sqr() / den,
        ]
    }

    fn noise_dest(&self) -> f64 {
        self.noise_dest_terms().iter().sum()
    }
}

/// Transmit PSD at the source for input voltage density `|U_S|^2`.
pub fn source_tx_psd(
    params: &CircuitParams,
    m_sr: f64,
    m_rd: f64,
    source_voltage_density: f64,
    f: f64,
) -> f64 {
    source_voltage_density / 2.0 * Coupling::new(params, m_sr, m_rd, 0.0, f).source_tx()
}

/// Receive PSD at the relay load for input voltage density `|U_S|^2`.
pub fn relay_rx_psd(params: &CircuitParams, m_sr: f64, m_rd: f64, source_voltage_density: f64, f: f64) -> f64 {
    source_voltage_density / 2.0 * Coupling::new(params, m_sr, m_rd, 0.0, f).relay_rx()
}

/// Receive PSD at the destination via the passive relay circuit.
pub fn dest_rx_passive_psd(
    params: &CircuitParams,
    m_sr: f64,
    m_rd: f64,
    source_voltage_density: f64,
    f: f64,
) -> f64 {
    source_voltage_density / 2.0 * Coupling::new(params, m_sr, m_rd, 0.0, f).dest_rx_passive()
}

/// Transmit PSD at the relay for relay voltage density `|U_R|^2`.
pub fn relay_tx_psd(params: &CircuitParams, m_sr: f64, m_rd: f64, relay_voltage_density: f64, f: f64) -> f64 {
    relay_voltage_density / 2.0 * Coupling::new(params, m_sr, m_rd, 0.0, f).relay_tx()
}

/// Receive PSD at the destination from the relay transmission.
pub fn dest_rx_relay_psd(
    params: &CircuitParams,
    m_sr: f64,
    m_rd: f64,
    relay_voltage_density: f64,
    f: f64,
) -> f64 {
    relay_voltage_density / 2.0 * Coupling::new(params, m_sr, m_rd, 0.0, f).dest_rx_relay()
}

/// `|H_SR|^2 = P_Rr / P_St`.
pub fn channel_gain_sr(params: &CircuitParams, m_sr: f64, m_rd: f64, f: f64) -> f64 {
    Coupling::new(params, m_sr, m_rd, 0.0, f).gain_sr()
}

/// `|H_SD,p|^2 = P_Dr1 / P_St`.
pub fn channel_gain_sd_passive(params: &CircuitParams, m_sr: f64, m_rd: f64, f: f64) -> f64 {
    Coupling::new(params, m_sr, m_rd, 0.0, f).gain_sd_passive()
}

/// `|H_RD|^2 = P_Dr2 / P_Rt`.
pub fn channel_gain_rd(params: &CircuitParams, m_sr: f64, m_rd: f64, f: f64) -> f64 {
    Coupling::new(params, m_sr, m_rd, 0.0, f).gain_rd()
}

/// `|H_RR|^2`, the loss of mapping the relay's load voltage onto its
/// transmit voltage.
pub fn relay_mapping_gain(params: &CircuitParams, m_sr: f64, m_rd: f64, f: f64) -> f64 {
    Coupling::new(params, m_sr, m_rd, 0.0, f).gain_rr()
}

/// Thermal-noise PSD at the relay load.
pub fn noise_psd_relay(params: &CircuitParams, m_sr: f64, m_rd: f64, medium: &SoilMedium, f: f64) -> f64 {
    Coupling::new(params, m_sr, m_rd, medium.temperature, f).noise_relay()
}

/// Thermal-noise PSD at the destination load: the three contributions from
/// the destination, relay and source resistors.
pub fn noise_psd_dest_terms(
    params: &CircuitParams,
    m_sr: f64,
    m_rd: f64,
    medium: &SoilMedium,
    f: f64,
) -> [f64; 3] {
    Coupling::new(params, m_sr, m_rd, medium.temperature, f).noise_dest_terms()
}

pub fn noise_psd_dest(params: &CircuitParams, m_sr: f64, m_rd: f64, medium: &SoilMedium, f: f64) -> f64 {
    Coupling::new(params, m_sr, m_rd, medium.temperature, f).noise_dest()
}

/// All channel gains and noise PSDs of one relayed link on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub grid: FrequencyGrid,
    /// `|H_SR|^2`
    pub gain_sr: Spectrum,
    /// `|H_RR|^2`
    pub gain_rr: Spectrum,
    /// `|H_RD|^2`
    pub gain_rd: Spectrum,
    /// `|H_SD,p|^2`
    pub gain_sd_passive: Spectrum,
    /// `|H_SD,a|^2 = |H_SR|^2 |H_RR|^2 |H_RD|^2`
    pub gain_sd_active: Spectrum,
    /// `P_Rn` in W/Hz
    pub noise_relay: Spectrum,
    /// `P_Dn` in W/Hz
    pub noise_dest: Spectrum,
}

impl LinkModel {
    /// Assembles a link from explicit spectra; the active gain is the product
    /// of the three hop gains.
    pub fn from_spectra(
        gain_sr: Spectrum,
        gain_rr: Spectrum,
        gain_rd: Spectrum,
        gain_sd_passive: Spectrum,
        noise_relay: Spectrum,
        noise_dest: Spectrum,
    ) -> Result<Self> {
        let grid = *gain_sr.grid();
        for s in [&gain_rr, &gain_rd, &gain_sd_passive, &noise_relay, &noise_dest] {
            gain_sr.check_grid(s)?;
        }
        for (what, s) in [
            ("gain_sr", &gain_sr),
            ("gain_rr", &gain_rr),
            ("gain_rd", &gain_rd),
            ("gain_sd_passive", &gain_sd_passive),
        ] {
            if s.values().iter().any(|&v| v < 0.0) {
                return Err(Error::invalid(what, "channel gains must be >= 0"));
            }
        }
        for (what, s) in [("noise_relay", &noise_relay), ("noise_dest", &noise_dest)] {
            if s.values().iter().any(|&v| v <= 0.0) {
                return Err(Error::invalid(what, "noise PSD must be > 0"));
            }
        }
        let active: Vec<f64> = gain_sr
            .values()
            .iter()
            .zip(gain_rr.values())
            .zip(gain_rd.values())
            .map(|((a, b), c)| a * b * c)
            .collect();
        Ok(Self {
            grid,
            gain_sd_active: Spectrum::new(grid, active)?,
            gain_sr,
            gain_rr,
            gain_rd,
            gain_sd_passive,
            noise_relay,
            noise_dest,
        })
    }

    /// Spectra as `(column, spectrum)` pairs, column names carrying units.
    pub fn columns(&self) -> [(&'static str, &Spectrum); 7] {
        [
            ("gain_sr_lin", &self.gain_sr),
            ("gain_rr_lin", &self.gain_rr),
            ("gain_rd_lin", &self.gain_rd),
            ("gain_sd_passive_lin", &self.gain_sd_passive),
            ("gain_sd_active_lin", &self.gain_sd_active),
            ("noise_relay_w_per_hz", &self.noise_relay),
            ("noise_dest_w_per_hz", &self.noise_dest),
        ]
    }

    /// All seven spectra as one CSV with a `frequency_hz` column.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let cols = self.columns();
        let mut header = vec!["frequency_hz"];
        header.extend(cols.iter().map(|(name, _)| *name));
        w.write_record(&header)?;
        for (i, f) in self.grid.frequencies().enumerate() {
            let mut row = vec![f.to_string()];
            row.extend(cols.iter().map(|(_, s)| s.values()[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()
    }
}

/// Channel gain and noise PSD of the point-to-point link without relay.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectLink {
    pub grid: FrequencyGrid,
    /// `|H_SD|^2`
    pub gain: Spectrum,
    /// Noise PSD at the destination load, W/Hz.
    pub noise: Spectrum,
}

/// Evaluates every link quantity of the relayed chain on `grid`.
pub fn build_link_model(
    circuit: &CircuitParams,
    coil: &CoilDesign,
    geometry: &RelayGeometry,
    medium: &SoilMedium,
    grid: FrequencyGrid,
    models: &PhysicsModels,
) -> Result<LinkModel> {
    let m_sr0 = lossless_mutual_inductance(
        coil,
        medium,
        geometry.dist_source_relay,
        geometry.polarization_sr,
    )?;
    let m_rd0 = lossless_mutual_inductance(
        coil,
        medium,
        geometry.dist_relay_dest,
        geometry.polarization_rd,
    )?;
    let n = grid.count();
    let mut cols: [Vec<f64>; 6] = Default::default();
    for c in cols.iter_mut() {
        c.reserve_exact(n);
    }
    for f in grid.frequencies() {
        let m_sr = m_sr0 * models.eddy.factor(medium, geometry.dist_source_relay, f);
        let m_rd = m_rd0 * models.eddy.factor(medium, geometry.dist_relay_dest, f);
        let c = Coupling::new(circuit, m_sr, m_rd, medium.temperature, f);
        cols[0].push(c.gain_sr());
        cols[1].push(c.gain_rr());
        cols[2].push(c.gain_rd());
        cols[3].push(c.gain_sd_passive());
        cols[4].push(c.noise_relay());
        cols[5].push(c.noise_dest());
    }
    let [sr, rr, rd, sdp, nr, nd] = cols;
    LinkModel::from_spectra(
        Spectrum::new(grid, sr)?,
        Spectrum::new(grid, rr)?,
        Spectrum::new(grid, rd)?,
        Spectrum::new(grid, sdp)?,
        Spectrum::new(grid, nr)?,
        Spectrum::new(grid, nd)?,
    )
}

/// Two-circuit link over `distance`: the relayed-chain equations with the
/// relay coil removed (`M_RD = 0`, the receiver in the relay's place).
pub fn build_direct_link(
    circuit: &CircuitParams,
    coil: &CoilDesign,
    distance: f64,
    polarization: f64,
    medium: &SoilMedium,
    grid: FrequencyGrid,
    models: &PhysicsModels,
) -> Result<DirectLink> {
    let m0 = lossless_mutual_inductance(coil, medium, distance, polarization)?;
    let mut gain = Vec::with_capacity(grid.count());
    let mut noise = Vec::with_capacity(grid.count());
    for f in grid.frequencies() {
        let m = m0 * models.eddy.factor(medium, distance, f);
        let c = Coupling::new(circuit, m, 0.0, medium.temperature, f);
        gain.push(c.gain_sr());
        noise.push(c.noise_relay());
    }
    Ok(DirectLink {
        grid,
        gain: Spectrum::new(grid, gain)?,
        noise: Spectrum::new(grid, noise)?,
    })
}
