//! Independent reference implementations shared by the integration tests and
//! the acceptance harness. Nothing here calls into the engines under test
//! except to obtain their outputs for comparison.
#![allow(dead_code)]

use std::f64::consts::PI;

use mirelay::link::{self, BandConfig};
use mirelay::medium::{self, CircuitParams, CoilDesign, PhysicsModels, RelayGeometry, SoilMedium, MU0};
use mirelay::spectrum::{waterfill_weighted, FrequencyGrid, Spectrum};
use mirelay::{build_link_model, evaluate, Duplex, LinkModel, Scheme, SchemeConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const KB: f64 = 1.380_649e-23;

/// Bare complex number, kept apart from the crate's complex type on purpose.
#[derive(Clone, Copy, Debug)]
pub struct C(pub f64, pub f64);

impl C {
    pub fn re(x: f64) -> C {
        C(x, 0.0)
    }
    pub fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    pub fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    pub fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    pub fn abs2(self) -> f64 {
        self.0 * self.0 + self.1 * self.1
    }
}

/// `|num/den|^2` via squared moduli.
fn ratio2(num: C, den: C) -> f64 {
    num.abs2() / den.abs2()
}

/// Every link quantity at one frequency, transmit voltages `|U|^2 = 1`.
#[derive(Clone, Copy, Debug)]
pub struct OraclePoint {
    pub p_st: f64,
    pub p_rr: f64,
    pub p_dr1: f64,
    pub p_rt: f64,
    pub p_dr2: f64,
    pub g_sr: f64,
    pub g_rr: f64,
    pub g_rd: f64,
    pub g_sdp: f64,
    pub g_sda: f64,
    pub n_relay: f64,
    pub n_dest: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn oracle_point(l: f64, r: f64, rl: f64, cap: f64, m_sr: f64, m_rd: f64, temp: f64, f: f64) -> OraclePoint {
    let w = 2.0 * PI * f;
    let z = C(r + rl, w * l - 1.0 / (w * cap));
    let z2 = z.mul(z);
    let s = z2.add(C::re(w * w * m_sr * m_sr + w * w * m_rd * m_rd));
    let zs = z.mul(s);
    let half = 0.5;

    let p_st = half * ratio2(z2.add(C::re((w * m_rd) * (w * m_rd))), zs).sqrt();
    let p_rr = half * ratio2(C::re(w * m_sr), s) * rl;
    let p_dr1 = half * ratio2(C::re(w * w * m_sr * m_rd), zs) * rl;
    let p_rt = half * ratio2(z, s).sqrt();
    let p_dr2 = half * ratio2(C(0.0, w * m_rd), s) * rl;
    let g_rr = ratio2(z, s).sqrt() * rl;

    let thermal = 4.0 * KB * temp * (rl * r + rl * rl);
    let n_relay = thermal * (z.abs2() + w * w * (m_sr * m_sr + m_rd * m_rd)) / (2.0 * s.abs2());
    let t1 = z2.sub(C::re((w * m_sr) * (w * m_sr))).abs2();
    let t2 = w.powi(4) * (m_sr * m_rd) * (m_sr * m_rd);
    let t3 = z.mul(C::re(w * m_rd)).abs2();
    let n_dest = thermal * (t1 + t2 + t3) / (2.0 * zs.abs2());

    let g_sr = p_rr / p_st;
    let g_rd = p_dr2 / p_rt;
    OraclePoint {
        p_st,
        p_rr,
        p_dr1,
        p_rt,
        p_dr2,
        g_sr,
        g_rr,
        g_rd,
        g_sdp: p_dr1 / p_st,
        g_sda: g_sr * g_rr * g_rd,
        n_relay,
        n_dest,
    }
}

/// `M = mu pi N^2 a^4 / (4 r^3) J exp(-r sqrt(pi f mu sigma))`.
pub fn oracle_mutual(mu: f64, n: f64, a: f64, dist: f64, j: f64, sigma: f64, f: f64) -> f64 {
    let g = (-dist * (PI * f * mu * sigma).sqrt()).exp();
    mu * PI * n * n * a.powi(4) / (4.0 * dist.powi(3)) * j * g
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Randomized relayed link with everything needed to rebuild it.
#[derive(Clone, Debug)]
pub struct LinkCase {
    pub medium: SoilMedium,
    pub coil: CoilDesign,
    pub circuit: CircuitParams,
    pub geometry: RelayGeometry,
    pub grid: FrequencyGrid,
}

impl LinkCase {
    pub fn build(&self) -> LinkModel {
        build_link_model(
            &self.circuit,
            &self.coil,
            &self.geometry,
            &self.medium,
            self.grid,
            &PhysicsModels::default(),
        )
        .unwrap()
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn random_link_case(rng: &mut ChaCha8Rng) -> LinkCase {
    loop {
        let sigma = if rng.gen_bool(0.2) { 0.0 } else { log_uniform(rng, 1e-4, 0.1) };
        let medium = SoilMedium::new(
            sigma,
            rng.gen_range(1.0..30.0),
            MU0 * rng.gen_range(1.0..2.0),
            rng.gen_range(250.0..330.0),
        )
        .unwrap();
        let coil = CoilDesign::square(
            rng.gen_range(0.05..0.5),
            rng.gen_range(2e-4..1e-3),
            rng.gen_range(1..=1000),
        )
        .unwrap();
        let f0 = log_uniform(rng, 1e3, 3e7);
        let circuit = if rng.gen_bool(0.5) {
            CircuitParams::design(&coil, &medium, f0, &PhysicsModels::default()).unwrap()
        } else {
            CircuitParams::tuned(
                log_uniform(rng, 1e-5, 1e-1),
                log_uniform(rng, 0.05, 50.0),
                log_uniform(rng, 0.05, 50.0),
                f0,
            )
            .unwrap()
        };
        let distance = rng.gen_range(4.0..60.0);
        let position = rng.gen_range(1.0..distance - 1.0);
        let j = rng.gen_range(0.2..1.0);
        let geometry = RelayGeometry::on_line(distance, position, j, 1.0).unwrap();
        let band = BandConfig {
            width_fraction: rng.gen_range(0.1..1.5),
            points: 33,
        };
        let grid = band.grid(f0).unwrap();
        // keep the eddy attenuation inside the normal floating-point range
        let worst = distance.max(position) * (PI * grid.end() * medium.permeability * sigma).sqrt();
        if worst < 60.0 {
            return LinkCase {
                medium,
                coil,
                circuit,
                geometry,
                grid,
            };
        }
    }
}

/// Largest relative deviation between the engine and the oracle over every
/// quantity and frequency of `case`, with the name of the worst quantity.
pub fn link_deviation(case: &LinkCase) -> (f64, String) {
    let mut worst = (0.0, String::new());
    let mut note = |what: &str, f: f64, engine: f64, oracle: f64| {
        let e = rel_err(engine, oracle);
        if e > worst.0 || e.is_nan() {
            worst = (e, format!("{what} at {f} Hz: engine {engine:e}, oracle {oracle:e}"));
        }
    };
    let c = &case.circuit;
    let m = &case.medium;
    let n = f64::from(case.coil.windings);
    let a = case.coil.coil_radius;
    let geo = &case.geometry;
    let model = case.build();
    for (i, f) in case.grid.frequencies().enumerate() {
        let m_sr = oracle_mutual(m.permeability, n, a, geo.dist_source_relay, geo.polarization_sr, m.conductivity, f);
        let m_rd = oracle_mutual(m.permeability, n, a, geo.dist_relay_dest, geo.polarization_rd, m.conductivity, f);
        let engine_m_sr =
            medium::mutual_inductance(&case.coil, m, geo.dist_source_relay, geo.polarization_sr, f).unwrap();
        note("M_SR", f, engine_m_sr, m_sr);

        let o = oracle_point(c.inductance, c.wire_resistance, c.load_resistance, c.capacitance, m_sr, m_rd, m.temperature, f);
        note("P_St", f, link::source_tx_psd(c, m_sr, m_rd, 1.0, f), o.p_st);
        note("P_Rr", f, link::relay_rx_psd(c, m_sr, m_rd, 1.0, f), o.p_rr);
        note("P_Dr1", f, link::dest_rx_passive_psd(c, m_sr, m_rd, 1.0, f), o.p_dr1);
        note("P_Rt", f, link::relay_tx_psd(c, m_sr, m_rd, 1.0, f), o.p_rt);
        note("P_Dr2", f, link::dest_rx_relay_psd(c, m_sr, m_rd, 1.0, f), o.p_dr2);
        note("|H_SR|^2", f, link::channel_gain_sr(c, m_sr, m_rd, f), o.g_sr);
        note("|H_RR|^2", f, link::relay_mapping_gain(c, m_sr, m_rd, f), o.g_rr);
        note("|H_RD|^2", f, link::channel_gain_rd(c, m_sr, m_rd, f), o.g_rd);
        note("|H_SD,p|^2", f, link::channel_gain_sd_passive(c, m_sr, m_rd, f), o.g_sdp);
        note("P_Rn", f, link::noise_psd_relay(c, m_sr, m_rd, m, f), o.n_relay);
        note("P_Dn", f, link::noise_psd_dest(c, m_sr, m_rd, m, f), o.n_dest);

        note("model |H_SR|^2", f, model.gain_sr.values()[i], o.g_sr);
        note("model |H_RR|^2", f, model.gain_rr.values()[i], o.g_rr);
        note("model |H_RD|^2", f, model.gain_rd.values()[i], o.g_rd);
        note("model |H_SD,p|^2", f, model.gain_sd_passive.values()[i], o.g_sdp);
        note("model |H_SD,a|^2", f, model.gain_sd_active.values()[i], o.g_sda);
        note("model P_Rn", f, model.noise_relay.values()[i], o.n_relay);
        note("model P_Dn", f, model.noise_dest.values()[i], o.n_dest);
    }
    worst
}

/// Largest relative deviation of `|H_SD,a|^2` from the product of the three
/// hop gains stored in the same model.
pub fn factorization_deviation(model: &LinkModel) -> f64 {
    (0..model.grid.count())
        .map(|i| {
            let product = model.gain_sr.values()[i] * model.gain_rr.values()[i] * model.gain_rd.values()[i];
            rel_err(model.gain_sd_active.values()[i], product)
        })
        .fold(0.0, f64::max)
}

fn weighted_rate(weights: &[f64], k: &[f64], p: &[f64]) -> f64 {
    weights.iter().zip(k).zip(p).map(|((w, k), p)| w * (1.0 + p * k).log2()).sum()
}

/// Outcome of one waterfilling instance against random feasible allocations.
#[derive(Debug)]
pub struct WaterfillCheck {
    pub rate: f64,
    pub best_random: f64,
    pub kkt_residual: f64,
    pub budget_residual: f64,
}

impl WaterfillCheck {
    pub fn passed(&self) -> bool {
        self.rate >= self.best_random * (1.0 - 1e-12)
            && self.kkt_residual < 1e-8
            && self.budget_residual < 1e-8
    }
}

pub fn waterfill_instance(rng: &mut ChaCha8Rng, bins: usize, trials: usize) -> WaterfillCheck {
    let k: Vec<f64> = (0..bins).map(|_| log_uniform(rng, 1e-3, 1e3)).collect();
    let weights: Vec<f64> = (0..bins).map(|_| rng.gen_range(0.2..2.0)).collect();
    let budget = log_uniform(rng, 1e-2, 1e2);
    let wf = waterfill_weighted(&k, &weights, budget).unwrap();
    let rate = weighted_rate(&weights, &k, &wf.psd);

    let mut best_random = f64::NEG_INFINITY;
    for t in 0..trials {
        // exponential weights give a uniform draw on the simplex; every
        // fourth draw is restricted to a random support
        let mut energy: Vec<f64> = (0..bins)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        if t % 4 == 3 {
            for e in energy.iter_mut() {
                if rng.gen_bool(0.5) {
                    *e = 0.0;
                }
            }
            if energy.iter().all(|&e| e == 0.0) {
                energy[rng.gen_range(0..bins)] = 1.0;
            }
        }
        let total: f64 = energy.iter().sum();
        let p: Vec<f64> = energy.iter().zip(&weights).map(|(e, w)| budget * e / total / w).collect();
        best_random = best_random.max(weighted_rate(&weights, &k, &p));
    }

    // stationarity p + 1/k = level on the support, 1/k >= level off it
    let level = wf.water_level;
    let kkt_residual = (0..bins)
        .map(|i| {
            if wf.psd[i] > 0.0 {
                (wf.psd[i] + 1.0 / k[i] - level).abs() / level
            } else {
                ((level - 1.0 / k[i]) / level).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    let used: f64 = weights.iter().zip(&wf.psd).map(|(w, p)| w * p).sum();
    WaterfillCheck {
        rate,
        best_random,
        kkt_residual,
        budget_residual: (used - budget).abs() / budget,
    }
}

/// Eight-bin link with unit noise and `|H_RR|^2 = 1`, so the per-unit SNR
/// coefficients are the gains themselves.
pub struct ToyLink {
    pub model: LinkModel,
    pub source_power: f64,
    pub relay_power: f64,
}

pub fn random_toy_link(rng: &mut ChaCha8Rng) -> ToyLink {
    let grid = FrequencyGrid::new(1.0, 1.0, 8).unwrap();
    let mut draw = |lo: f64, hi: f64| -> Spectrum {
        Spectrum::new(grid, (0..8).map(|_| log_uniform(rng, lo, hi)).collect()).unwrap()
    };
    let gain_sr = draw(0.05, 20.0);
    let gain_rd = draw(0.05, 20.0);
    let gain_sdp = draw(1e-3, 1.0);
    let ones = Spectrum::constant(grid, 1.0).unwrap();
    let model = LinkModel::from_spectra(gain_sr, ones.clone(), gain_rd, gain_sdp, ones.clone(), ones).unwrap();
    ToyLink {
        model,
        source_power: log_uniform(rng, 0.5, 20.0),
        relay_power: log_uniform(rng, 0.5, 20.0),
    }
}

/// Exact optimum of the half-duplex MRC rate over allocations that give every
/// bin an integer number of `budget / units` energy quanta, by dynamic
/// programming over the used quanta of both budgets.
pub fn ff_lattice_optimum(toy: &ToyLink, units: usize) -> f64 {
    let m = &toy.model;
    let weights = m.grid.weights();
    let span = units + 1;
    let mut best = vec![f64::NEG_INFINITY; span * span];
    best[0] = 0.0;
    for (b, &w) in weights.iter().enumerate() {
        let (a, s, t) = (
            m.gain_sd_passive.values()[b] / m.noise_dest.values()[b],
            m.gain_sr.values()[b] / m.noise_relay.values()[b],
            m.gain_rd.values()[b] / m.noise_dest.values()[b],
        );
        let mut value = vec![0.0; span * span];
        for us in 0..span {
            let p = toy.source_power * us as f64 / units as f64 / w;
            for ur in 0..span {
                let q = toy.relay_power * ur as f64 / units as f64 / w;
                let (x, y) = (s * p, t * q);
                value[us * span + ur] = w * (1.0 + a * p + x * y / (x + y + 1.0)).log2();
            }
        }
        let mut next = vec![f64::NEG_INFINITY; span * span];
        for us in 0..span {
            for ur in 0..span {
                let base = best[us * span + ur];
                if base == f64::NEG_INFINITY {
                    continue;
                }
                for ds in 0..span - us {
                    for dr in 0..span - ur {
                        let v = base + value[ds * span + dr];
                        let slot = &mut next[(us + ds) * span + ur + dr];
                        if v > *slot {
                            *slot = v;
                        }
                    }
                }
            }
        }
        best = next;
    }
    0.5 * best.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Engine FF rate on the toy link.
pub fn ff_engine_rate(toy: &ToyLink) -> f64 {
    let config = SchemeConfig::new(Scheme::Ff, Duplex::Hd, toy.source_power, toy.relay_power);
    evaluate(&toy.model, &config).unwrap().rate
}
