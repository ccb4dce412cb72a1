//! Achievable-rate engines for amplify-and-forward (AF), filter-and-forward
//! (FF) and decode-and-forward (DF) relaying in half- and full-duplex mode.
//!
//! Half-duplex rates carry a factor 1/2 for the two time slots. Full-duplex
//! rates are evaluated on the half-duplex optimized transmit filters, with
//! the passively relayed source signal treated as interference at the
//! destination and the relay's own signal assumed perfectly cancelled.

mod af;
mod df;
mod ff;
mod full_duplex;

use serde::{Deserialize, Serialize};

pub use af::{af_amplification, af_rate_hd, af_snr_components};
pub use df::{df_rate_fd, df_rate_hd};
pub use ff::{ff_rate_hd, ff_rate_hd_from};
pub use full_duplex::{af_ff_rate_fd, fd_sinr};

use crate::error::{Error, Result};
use crate::link::{DirectLink, LinkModel};
use crate::spectrum::{shannon_rate, waterfill, PowerAllocation, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[serde(alias = "AF")]
    Af,
    #[serde(alias = "FF")]
    Ff,
    #[serde(alias = "DF")]
    Df,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Af, Scheme::Ff, Scheme::Df];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Af => "AF",
            Scheme::Ff => "FF",
            Scheme::Df => "DF",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "af" => Ok(Scheme::Af),
            "ff" => Ok(Scheme::Ff),
            "df" => Ok(Scheme::Df),
            _ => Err(Error::Config(format!("unknown relaying scheme `{s}` (expected af, ff or df)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    #[serde(alias = "HD")]
    Hd,
    #[serde(alias = "FD")]
    Fd,
}

impl Duplex {
    pub const ALL: [Duplex; 2] = [Duplex::Hd, Duplex::Fd];

    pub fn label(self) -> &'static str {
        match self {
            Duplex::Hd => "HD",
            Duplex::Fd => "FD",
        }
    }

    /// Fraction of time each link is active.
    pub fn factor(self) -> f64 {
        match self {
            Duplex::Hd => 0.5,
            Duplex::Fd => 1.0,
        }
    }
}

impl std::fmt::Display for Duplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Duplex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hd" | "half" => Ok(Duplex::Hd),
            "fd" | "full" => Ok(Duplex::Fd),
            _ => Err(Error::Config(format!("unknown duplex mode `{s}` (expected hd or fd)"))),
        }
    }
}

pub const DEFAULT_MAX_ITERATIONS: usize = 100;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-6;

/// One rate evaluation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub duplex: Duplex,
    /// `P_S` in W.
    pub source_power: f64,
    /// `P_R` in W.
    pub relay_power: f64,
    pub max_iterations: usize,
    /// Relative change of the rate below which iterations stop.
    pub convergence_tol: f64,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, duplex: Duplex, source_power: f64, relay_power: f64) -> Self {
        Self {
            scheme,
            duplex,
            source_power,
            relay_power,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
        }
    }

    /// Splits `total_power` so that the source gets `source_fraction` of it.
    pub fn with_split(scheme: Scheme, duplex: Duplex, total_power: f64, source_fraction: f64) -> Self {
        let source_power = total_power * source_fraction;
        Self::new(scheme, duplex, source_power, total_power - source_power)
    }

    pub fn validate(&self) -> Result<()> {
        for (what, p) in [
            ("source_power", self.source_power),
            ("relay_power", self.relay_power),
        ] {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::invalid(what, format!("must be finite and >= 0, got {p}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::invalid(
                "convergence_tol",
                format!("must be finite and > 0, got {}", self.convergence_tol),
            ));
        }
        Ok(())
    }

    fn expect(&self, scheme: Scheme) -> Result<()> {
        self.validate()?;
        if self.scheme != scheme {
            return Err(Error::invalid(
                "scheme",
                format!("{} engine called with a {} configuration", scheme, self.scheme),
            ));
        }
        Ok(())
    }
}

/// What the relay does with the received signal.
#[derive(Debug, Clone, PartialEq)]
pub enum RelayOutput {
    /// Frequency-flat amplification `A` and the resulting relay transmit PSD.
    Amplify { gain: f64, relay_psd: PowerAllocation },
    /// Frequency-selective `|A(f)|^2` and the relay transmit PSD.
    Filter { gain_sq: Spectrum, relay_psd: PowerAllocation },
    /// Independently waterfilled relay transmit PSD and the two hop rates
    /// (bit/s, without the duplex factor; `rate_rd` is the full-duplex
    /// hop rate in FD mode).
    Decode {
        relay_psd: PowerAllocation,
        rate_sr: f64,
        rate_rd: f64,
    },
}

impl RelayOutput {
    pub fn relay_psd(&self) -> &PowerAllocation {
        match self {
            RelayOutput::Amplify { relay_psd, .. }
            | RelayOutput::Filter { relay_psd, .. }
            | RelayOutput::Decode { relay_psd, .. } => relay_psd,
        }
    }

    /// `|A(f)|^2` on `n` bins for the non-regenerative schemes.
    pub fn gain_sq(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            RelayOutput::Amplify { gain, .. } => Some(vec![gain * gain; n]),
            RelayOutput::Filter { gain_sq, .. } => Some(gain_sq.values().to_vec()),
            RelayOutput::Decode { .. } => None,
        }
    }
}

/// Achievable rate with the allocations that attain it.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub scheme: Scheme,
    pub duplex: Duplex,
    /// bit/s
    pub rate: f64,
    pub source_allocation: PowerAllocation,
    pub relay: RelayOutput,
    pub iterations_used: usize,
    pub converged: bool,
    /// Half-duplex rate after every iteration of the iterative schemes.
    pub trace: Vec<f64>,
}

/// Evaluates `config` on `link`, dispatching on scheme and duplex mode.
pub fn evaluate(link: &LinkModel, config: &SchemeConfig) -> Result<RateResult> {
    let hd = match config.scheme {
        Scheme::Af => af_rate_hd(link, config)?,
        Scheme::Ff => ff_rate_hd(link, config)?,
        Scheme::Df => return match config.duplex {
            Duplex::Hd => df_rate_hd(link, config),
            Duplex::Fd => df_rate_fd(link, config),
        },
    };
    match config.duplex {
        Duplex::Hd => Ok(hd),
        Duplex::Fd => af_ff_rate_fd(link, config, &hd),
    }
}

/// Waterfilled Shannon rate of the point-to-point link without relay.
pub fn direct_rate(link: &DirectLink, source_power: f64) -> Result<f64> {
    Ok(direct_allocation(link, source_power)?.1)
}

/// Waterfilled allocation and rate of the point-to-point link.
pub fn direct_allocation(link: &DirectLink, source_power: f64) -> Result<(PowerAllocation, f64)> {
    let k = link.gain.zip_with(&link.noise, |g, n| g / n)?;
    let alloc = waterfill_or_uniform(&k, source_power)?;
    let snr = alloc.psd.zip_with(&k, |p, k| p * k)?;
    Ok((alloc, shannon_rate(&snr, 1.0)))
}

/// Waterfilling that falls back to a uniform spread when no bin is usable
/// (every allocation then has zero rate).
pub(crate) fn waterfill_or_uniform(k: &Spectrum, budget: f64) -> Result<PowerAllocation> {
    match waterfill(k, budget) {
        Err(Error::NoUsableChannel) => PowerAllocation::uniform(*k.grid(), budget),
        other => other,
    }
}

/// Per-bin SNR coefficients of a link, all per unit transmit PSD.
pub(crate) struct Coefficients {
    pub weights: Vec<f64>,
    /// `|H_SD,p|^2 / P_Dn`, passive path.
    pub passive: Vec<f64>,
    /// `|H_SR|^2 / P_Rn`, source to relay.
    pub first_hop: Vec<f64>,
    /// `|H_RD|^2 / P_Dn`, relay to destination.
    pub second_hop: Vec<f64>,
}

impl Coefficients {
    pub fn new(link: &LinkModel) -> Self {
        let ratio = |g: &Spectrum, n: &Spectrum| -> Vec<f64> {
            g.values().iter().zip(n.values()).map(|(g, n)| g / n).collect()
        };
        Self {
            weights: link.grid.weights(),
            passive: ratio(&link.gain_sd_passive, &link.noise_dest),
            first_hop: ratio(&link.gain_sr, &link.noise_relay),
            second_hop: ratio(&link.gain_rd, &link.noise_dest),
        }
    }
}

pub(crate) fn weighted_log2_sum(weights: &[f64], snr: impl Iterator<Item = f64>) -> f64 {
    weights.iter().zip(snr).map(|(w, x)| w * (1.0 + x).log2()).sum()
}
