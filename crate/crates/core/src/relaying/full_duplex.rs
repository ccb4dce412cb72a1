use super::{af_snr_components, weighted_log2_sum, Duplex, RateResult, RelayOutput, Scheme, SchemeConfig};
use crate::error::{Error, Result};
use crate::link::LinkModel;
use crate::spectrum::Spectrum;

/// Full-duplex SINR at the destination for AF/FF relaying:
///
/// ```text
/// SINR = SNR_2 / (1 + SNR_1 (1 + |A|^2 |H_SD,a|^2 P_Rn / (|H_SR|^2 P_Dn)))
/// ```
///
/// `|H_SD,a|^2 / |H_SR|^2` is evaluated as `|H_RR|^2 |H_RD|^2`, which is the
/// same quantity and stays finite where `|H_SR|^2` vanishes.
pub fn fd_sinr(link: &LinkModel, snr1: &Spectrum, snr2: &Spectrum, gain_sq: &[f64]) -> Result<Spectrum> {
    snr1.check_grid(snr2)?;
    if snr1.grid() != &link.grid || gain_sq.len() != link.grid.count() {
        return Err(Error::GridMismatch);
    }
    let values = (0..gain_sq.len())
        .map(|i| {
            let leak = gain_sq[i]
                * link.gain_rr.values()[i]
                * link.gain_rd.values()[i]
                * link.noise_relay.values()[i]
                / link.noise_dest.values()[i];
            snr2.values()[i] / (1.0 + snr1.values()[i] * (1.0 + leak))
        })
        .collect();
    Spectrum::new(link.grid, values)
}

/// Full-duplex AF/FF rate `integral log2(1 + SINR_FD)` evaluated on the
/// transmit filters of the half-duplex solution `hd`.
pub fn af_ff_rate_fd(link: &LinkModel, config: &SchemeConfig, hd: &RateResult) -> Result<RateResult> {
    config.validate()?;
    if !matches!(hd.scheme, Scheme::Af | Scheme::Ff) || hd.scheme != config.scheme {
        return Err(Error::invalid(
            "scheme",
            format!("full-duplex AF/FF evaluation needs an AF or FF solution, got {}", hd.scheme),
        ));
    }
    let gain_sq = hd
        .relay
        .gain_sq(link.grid.count())
        .ok_or_else(|| Error::invalid("relay", "solution carries no amplification"))?;
    let (snr1, snr2) = af_snr_components(link, &hd.source_allocation, &gain_sq)?;
    let sinr = fd_sinr(link, &snr1, &snr2, &gain_sq)?;
    let rate = weighted_log2_sum(&link.grid.weights(), sinr.values().iter().copied());
    let relay = match &hd.relay {
        RelayOutput::Amplify { .. } | RelayOutput::Filter { .. } => hd.relay.clone(),
        RelayOutput::Decode { .. } => unreachable!("checked above"),
    };
    Ok(RateResult {
        scheme: hd.scheme,
        duplex: Duplex::Fd,
        rate,
        source_allocation: hd.source_allocation.clone(),
        relay,
        iterations_used: hd.iterations_used,
        converged: hd.converged,
        trace: hd.trace.clone(),
    })
}
