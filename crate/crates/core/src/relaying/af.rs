use super::{
    waterfill_or_uniform, weighted_log2_sum, Coefficients, Duplex, RateResult, RelayOutput, Scheme,
    SchemeConfig,
};
use crate::error::{Error, Result};
use crate::link::LinkModel;
use crate::spectrum::{PowerAllocation, Spectrum};

/// Flat amplification that makes the relay transmit exactly `relay_power`:
/// `A = sqrt(P_R / integral((P_St |H_SR|^2 + P_Rn) |H_RR|^2))`.
pub fn af_amplification(
    link: &LinkModel,
    source_alloc: &PowerAllocation,
    relay_power: f64,
) -> Result<f64> {
    if source_alloc.grid() != &link.grid {
        return Err(Error::GridMismatch);
    }
    if !(relay_power.is_finite() && relay_power >= 0.0) {
        return Err(Error::invalid(
            "relay_power",
            format!("must be finite and >= 0, got {relay_power}"),
        ));
    }
    Ok(amplification(link, &link.grid.weights(), source_alloc.values(), relay_power))
}

fn amplification(link: &LinkModel, weights: &[f64], psd: &[f64], relay_power: f64) -> f64 {
    let received: f64 = (0..weights.len())
        .map(|i| {
            weights[i]
                * (psd[i] * link.gain_sr.values()[i] + link.noise_relay.values()[i])
                * link.gain_rr.values()[i]
        })
        .sum();
    (relay_power / received).sqrt()
}

/// Relay transmit PSD `A^2 (P_St |H_SR|^2 + P_Rn) |H_RR|^2`.
fn relay_psd(link: &LinkModel, psd: &[f64], gain: f64) -> Vec<f64> {
    (0..psd.len())
        .map(|i| {
            gain * gain
                * (psd[i] * link.gain_sr.values()[i] + link.noise_relay.values()[i])
                * link.gain_rr.values()[i]
        })
        .collect()
}

/// Relayed-path SNR per unit source PSD,
/// `A^2 |H_SD,a|^2 / (A^2 |H_RR|^2 |H_RD|^2 P_Rn + P_Dn)`.
fn relayed_per_watt(link: &LinkModel, gain_sq: f64, i: usize) -> f64 {
    let num = gain_sq * link.gain_sd_active.values()[i];
    let den = gain_sq
        * link.gain_rr.values()[i]
        * link.gain_rd.values()[i]
        * link.noise_relay.values()[i]
        + link.noise_dest.values()[i];
    num / den
}

/// `(SNR_1, SNR_2)` at the destination for source PSD `source` and
/// per-bin squared amplification `gain_sq`.
pub fn af_snr_components(
    link: &LinkModel,
    source: &PowerAllocation,
    gain_sq: &[f64],
) -> Result<(Spectrum, Spectrum)> {
    if source.grid() != &link.grid {
        return Err(Error::GridMismatch);
    }
    if gain_sq.len() != link.grid.count() {
        return Err(Error::GridMismatch);
    }
    let p = source.values();
    let snr1: Vec<f64> = (0..p.len())
        .map(|i| p[i] * link.gain_sd_passive.values()[i] / link.noise_dest.values()[i])
        .collect();
    let snr2: Vec<f64> = (0..p.len())
        .map(|i| p[i] * relayed_per_watt(link, gain_sq[i], i))
        .collect();
    Ok((Spectrum::new(link.grid, snr1)?, Spectrum::new(link.grid, snr2)?))
}

/// Half-duplex AF rate with the fixed-point power allocation: starting from
/// a uniform source PSD, alternate between the amplification implied by the
/// current PSD and the waterfilled PSD for that amplification.
pub fn af_rate_hd(link: &LinkModel, config: &SchemeConfig) -> Result<RateResult> {
    config.expect(Scheme::Af)?;
    let grid = link.grid;
    let coeffs = Coefficients::new(link);
    let weights = &coeffs.weights;
    let n = grid.count();
    let (ps, pr) = (config.source_power, config.relay_power);

    let mut source = PowerAllocation::uniform(grid, ps)?;
    let mut gain = amplification(link, weights, source.values(), pr);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut rate = 0.0;

    let k_of = |gain: f64| -> Vec<f64> {
        let g2 = gain * gain;
        (0..n)
            .map(|i| coeffs.passive[i] + relayed_per_watt(link, g2, i))
            .collect()
    };

    for it in 1..=config.max_iterations {
        iterations = it;
        let k = Spectrum::from_vec_unchecked(grid, k_of(gain));
        let next = waterfill_or_uniform(&k, ps)?;
        let next_gain = amplification(link, weights, next.values(), pr);
        let k_next = k_of(next_gain);
        let next_rate =
            0.5 * weighted_log2_sum(weights, next.values().iter().zip(&k_next).map(|(p, k)| p * k));
        let gain_change = if gain > 0.0 {
            ((next_gain - gain) / gain).abs()
        } else {
            (next_gain - gain).abs()
        };
        let rate_change = (next_rate - rate).abs();
        source = next;
        gain = next_gain;
        trace.push(next_rate);
        let settled = it > 1
            && rate_change <= config.convergence_tol * next_rate.abs()
            && gain_change <= config.convergence_tol;
        rate = next_rate;
        if settled {
            converged = true;
            break;
        }
    }

    let relay_psd = PowerAllocation {
        psd: Spectrum::new(grid, relay_psd(link, source.values(), gain))?,
        total_power: pr,
    };
    Ok(RateResult {
        scheme: Scheme::Af,
        duplex: Duplex::Hd,
        rate,
        source_allocation: source,
        relay: RelayOutput::Amplify { gain, relay_psd },
        iterations_used: iterations,
        converged,
        trace,
    })
}
