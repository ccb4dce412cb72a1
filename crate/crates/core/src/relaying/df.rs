use super::{
    waterfill_or_uniform, weighted_log2_sum, Coefficients, Duplex, RateResult, RelayOutput, Scheme,
    SchemeConfig,
};
use crate::error::Result;
use crate::link::LinkModel;
use crate::spectrum::{PowerAllocation, Spectrum};

struct DfLegs {
    source: PowerAllocation,
    relay: PowerAllocation,
    rate_sr: f64,
    rate_rd: f64,
}

/// Waterfills both hops independently: the source against
/// `|H_SR|^2 / P_Rn`, the relay against `|H_RD|^2 / P_Dn`.
fn df_legs(link: &LinkModel, config: &SchemeConfig) -> Result<DfLegs> {
    config.expect(Scheme::Df)?;
    let c = Coefficients::new(link);
    let grid = link.grid;
    let k_sr = Spectrum::from_vec_unchecked(grid, c.first_hop.clone());
    let k_rd = Spectrum::from_vec_unchecked(grid, c.second_hop.clone());
    let source = waterfill_or_uniform(&k_sr, config.source_power)?;
    let relay = waterfill_or_uniform(&k_rd, config.relay_power)?;
    let rate_sr = weighted_log2_sum(
        &c.weights,
        source.values().iter().zip(&c.first_hop).map(|(p, k)| p * k),
    );
    let rate_rd = weighted_log2_sum(
        &c.weights,
        relay.values().iter().zip(&c.second_hop).map(|(p, k)| p * k),
    );
    Ok(DfLegs {
        source,
        relay,
        rate_sr,
        rate_rd,
    })
}

/// Half-duplex DF rate `min(C_SR, C_RD) / 2`.
pub fn df_rate_hd(link: &LinkModel, config: &SchemeConfig) -> Result<RateResult> {
    let legs = df_legs(link, config)?;
    Ok(RateResult {
        scheme: Scheme::Df,
        duplex: Duplex::Hd,
        rate: 0.5 * legs.rate_sr.min(legs.rate_rd),
        source_allocation: legs.source,
        relay: RelayOutput::Decode {
            relay_psd: legs.relay,
            rate_sr: legs.rate_sr,
            rate_rd: legs.rate_rd,
        },
        iterations_used: 1,
        converged: true,
        trace: Vec::new(),
    })
}

/// Full-duplex DF rate `min(C_SR, C_RD,FD)` on the half-duplex allocations;
/// the passively relayed source signal interferes at the destination:
/// `C_RD,FD = integral log2(1 + P_Rt |H_RD|^2 / (P_Dn + P_St |H_SD,p|^2))`.
pub fn df_rate_fd(link: &LinkModel, config: &SchemeConfig) -> Result<RateResult> {
    let legs = df_legs(link, config)?;
    let ps = legs.source.values();
    let pr = legs.relay.values();
    let sinr = (0..ps.len()).map(|i| {
        pr[i] * link.gain_rd.values()[i]
            / (link.noise_dest.values()[i] + ps[i] * link.gain_sd_passive.values()[i])
    });
    let rate_rd = weighted_log2_sum(&link.grid.weights(), sinr);
    Ok(RateResult {
        scheme: Scheme::Df,
        duplex: Duplex::Fd,
        rate: legs.rate_sr.min(rate_rd),
        source_allocation: legs.source,
        relay: RelayOutput::Decode {
            relay_psd: legs.relay,
            rate_sr: legs.rate_sr,
            rate_rd,
        },
        iterations_used: 1,
        converged: true,
        trace: Vec::new(),
    })
}
