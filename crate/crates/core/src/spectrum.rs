//! Frequency-domain numerics shared by every relaying scheme: a uniform
//! frequency grid, real spectra on it, trapezoidal integration, Shannon rates
//! and waterfilling.

use std::io::Write;

use crate::error::{Error, Result};

/// Uniform frequency grid `start + i * step`, `i in 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if count < 2 || !(step.is_finite() && step > 0.0) || !(start.is_finite() && start > 0.0) {
            return Err(Error::EmptyGrid(format!(
                "start={start}, step={step}, count={count}"
            )));
        }
        Ok(Self { start, step, count })
    }

    /// `count` points spanning `[center - width/2, center + width/2]`.
    pub fn centered(center: f64, width: f64, count: usize) -> Result<Self> {
        if count < 2 || !(width.is_finite() && width > 0.0) {
            return Err(Error::EmptyGrid(format!(
                "center={center}, width={width}, count={count}"
            )));
        }
        Self::new(center - width / 2.0, width / (count - 1) as f64, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn end(&self) -> f64 {
        self.frequency(self.count - 1)
    }

    pub fn width(&self) -> f64 {
        self.step * (self.count - 1) as f64
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.frequency(i))
    }

    /// Trapezoidal quadrature weights; they sum to [`width`](Self::width).
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.step; self.count];
        w[0] = self.step / 2.0;
        w[self.count - 1] = self.step / 2.0;
        w
    }

    /// Same band sampled with `2 * (count - 1) + 1` points.
    pub fn refined(&self) -> Self {
        Self {
            start: self.start,
            step: self.step / 2.0,
            count: 2 * (self.count - 1) + 1,
        }
    }
}

/// A real-valued function of frequency sampled on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: FrequencyGrid,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::invalid(
                "spectrum",
                format!("{} values for a {}-point grid", values.len(), grid.count),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "spectrum",
                format!("non-finite value {} at {} Hz", values[i], grid.frequency(i)),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: FrequencyGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.count])
    }

    /// Evaluates `f` at every grid frequency.
    pub fn from_fn(grid: FrequencyGrid, f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.frequencies().map(f).collect())
    }

    pub(crate) fn from_vec_unchecked(grid: FrequencyGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.count);
        Self { grid, values }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Spectrum {
        Spectrum::from_vec_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Spectrum, f: impl Fn(f64, f64) -> f64) -> Result<Spectrum> {
        self.check_grid(other)?;
        Ok(Spectrum::from_vec_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn check_grid(&self, other: &Spectrum) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Divides by the peak value so the maximum becomes one. A spectrum
    /// without a positive value is returned unchanged.
    pub fn peak_normalized(&self) -> Spectrum {
        let peak = self.max();
        if peak > 0.0 {
            self.map(|v| v / peak)
        } else {
            self.clone()
        }
    }

    /// Two-column CSV, `frequency_hz,<column>`.
    pub fn write_csv<W: Write>(&self, out: W, column: &str) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["frequency_hz", column])?;
        for (f, v) in self.grid.frequencies().zip(&self.values) {
            w.write_record([f.to_string(), v.to_string()])?;
        }
        w.flush()
    }
}

/// Trapezoidal integral of `s` over its grid.
pub fn integrate(s: &Spectrum) -> f64 {
    weighted_sum(s.values(), s.grid().step())
}

fn weighted_sum(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values.iter().sum();
    step * (inner - 0.5 * (values[0] + values[n - 1]))
}

/// `duplex_factor * integral of log2(1 + snr)`.
pub fn shannon_rate(snr: &Spectrum, duplex_factor: f64) -> f64 {
    let step = snr.grid().step();
    let logs: Vec<f64> = snr.values().iter().map(|&x| (1.0 + x).log2()).collect();
    duplex_factor * weighted_sum(&logs, step)
}

/// `SNR_1 + SNR_2`, the combined SNR after maximum-ratio combining.
pub fn mrc_snr(snr1: &Spectrum, snr2: &Spectrum) -> Result<Spectrum> {
    snr1.zip_with(snr2, |a, b| a + b)
}

/// Power spectral density with its total power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub psd: Spectrum,
    pub total_power: f64,
}

impl PowerAllocation {
    /// Budget spread evenly over the band.
    pub fn uniform(grid: FrequencyGrid, total_power: f64) -> Result<Self> {
        check_budget(total_power)?;
        let psd = Spectrum::constant(grid, total_power / grid.width())?;
        Ok(Self { psd, total_power })
    }

    pub fn zero(grid: FrequencyGrid) -> Self {
        Self {
            psd: Spectrum::from_vec_unchecked(grid, vec![0.0; grid.count()]),
            total_power: 0.0,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.psd.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.psd.values()
    }

    /// Integral of the PSD, which equals `total_power` up to rounding.
    pub fn integrated_power(&self) -> f64 {
        integrate(&self.psd)
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if budget.is_finite() && budget >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "power budget",
            format!("must be finite and >= 0, got {budget}"),
        ))
    }
}

/// Capacity-achieving allocation `p(f) = max(1/lambda - 1/K(f), 0)` of
/// `budget` watts against the per-unit-power SNR spectrum `k`.
pub fn waterfill(k: &Spectrum, budget: f64) -> Result<PowerAllocation> {
    let weights = k.grid().weights();
    let psd = waterfill_weighted(k.values(), &weights, budget)?.psd;
    Ok(PowerAllocation {
        psd: Spectrum::from_vec_unchecked(*k.grid(), psd),
        total_power: budget,
    })
}

/// Waterfilling result on raw bins.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFill {
    pub psd: Vec<f64>,
    /// `1/lambda`; zero when the budget is zero.
    pub water_level: f64,
}

/// Waterfilling over bins of width `weights`: maximizes
/// `sum w_i log(1 + p_i k_i)` subject to `sum w_i p_i = budget`, `p_i >= 0`.
///
/// The water level is found exactly. Starting from the level with only the
/// strongest bin wet, which bounds the true level from above, the level of
/// the bins below the current level is recomputed until the wet set stops
/// changing. A sort-based search takes over if that takes too many rounds.
pub fn waterfill_weighted(k: &[f64], weights: &[f64], budget: f64) -> Result<WaterFill> {
    check_budget(budget)?;
    if k.len() != weights.len() {
        return Err(Error::GridMismatch);
    }
    if k.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("gain spectrum", "must be finite and >= 0"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::invalid("bin widths", "must be finite and > 0"));
    }
    let Some(best) = (0..k.len()).filter(|&i| k[i] > 0.0).max_by(|&a, &b| k[a].total_cmp(&k[b])) else {
        return Err(Error::NoUsableChannel);
    };
    let mut psd = vec![0.0; k.len()];
    if budget == 0.0 {
        return Ok(WaterFill {
            psd,
            water_level: 0.0,
        });
    }

    // levels are measured above the floor 1/k of the strongest bin; dry
    // channels get an infinite offset
    let base = 1.0 / k[best];
    let offsets: Vec<f64> = k
        .iter()
        .map(|&v| if v > 0.0 { 1.0 / v - base } else { f64::INFINITY })
        .collect();
    let wet_level = |rel: f64| -> (f64, f64) {
        let (mut width, mut sum) = (0.0, 0.0);
        for (o, w) in offsets.iter().zip(weights) {
            if *o < rel {
                width += w;
                sum += w * o;
            }
        }
        ((budget + sum) / width, width)
    };
    let mut rel = budget / weights[best];
    let mut settled = false;
    for _ in 0..ACTIVE_SET_ROUNDS {
        let (next, _) = wet_level(rel);
        if !(next < rel) {
            settled = true;
            break;
        }
        rel = next;
    }
    if !settled {
        rel = sorted_level(&offsets, weights, budget);
    }

    for (p, o) in psd.iter_mut().zip(&offsets) {
        *p = (rel - o).max(0.0);
    }
    // one correction step against rounding in the level
    let used: f64 = psd.iter().zip(weights).map(|(p, w)| w * p).sum();
    let residual = budget - used;
    if residual != 0.0 {
        let (_, width) = wet_level(rel);
        rel += residual / width;
        for (p, o) in psd.iter_mut().zip(&offsets) {
            if *p > 0.0 {
                *p = (rel - o).max(0.0);
            }
        }
    }
    Ok(WaterFill {
        psd,
        water_level: base + rel,
    })
}

const ACTIVE_SET_ROUNDS: usize = 64;

/// Water level above the floor by visiting bins in increasing offset.
fn sorted_level(offsets: &[f64], weights: &[f64], budget: f64) -> f64 {
    let mut order: Vec<usize> = (0..offsets.len()).filter(|&i| offsets[i].is_finite()).collect();
    order.sort_unstable_by(|&a, &b| offsets[a].total_cmp(&offsets[b]).then(a.cmp(&b)));
    let (mut width, mut sum, mut rel) = (0.0, 0.0, 0.0);
    for (m, &i) in order.iter().enumerate() {
        width += weights[i];
        sum += weights[i] * offsets[i];
        rel = (budget + sum) / width;
        match order.get(m + 1) {
            Some(&next) if rel > offsets[next] => continue,
            _ => break,
        }
    }
    rel
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(count: usize) -> FrequencyGrid {
        FrequencyGrid::new(1.0, 1.0, count).unwrap()
    }

    #[test]
    fn integrates_constants_and_ramps_exactly() {
        let g = FrequencyGrid::new(100.0, 0.5, 21).unwrap();
        assert_eq!(integrate(&Spectrum::constant(g, 3.0).unwrap()), 30.0);
        let ramp = Spectrum::from_fn(g, |f| 2.0 * f + 1.0).unwrap();
        let exact = (g.end() * g.end() + g.end()) - (g.start() * g.start() + g.start());
        assert!((integrate(&ramp) - exact).abs() < 1e-10);
    }

    #[test]
    fn shannon_rate_examples() {
        let g = FrequencyGrid::new(1.0, 1.0, 2).unwrap();
        assert_eq!(shannon_rate(&Spectrum::constant(g, 0.0).unwrap(), 1.0), 0.0);
        assert_eq!(shannon_rate(&Spectrum::constant(g, 1.0).unwrap(), 1.0), 1.0);
        let g10 = FrequencyGrid::new(1.0, 1.0, 11).unwrap();
        assert_eq!(shannon_rate(&Spectrum::constant(g10, 3.0).unwrap(), 0.5), 10.0);
    }

    #[test]
    fn flat_gain_gives_uniform_allocation() {
        let g = FrequencyGrid::new(10.0, 0.25, 9).unwrap();
        let a = waterfill(&Spectrum::constant(g, 5.0).unwrap(), 2.0).unwrap();
        for &p in a.values() {
            assert!((p - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_bin_closed_form() {
        // 1/lambda = (1 + 1 + 1/4) / 2
        let wf = waterfill_weighted(&[1.0, 4.0], &[1.0, 1.0], 1.0).unwrap();
        assert!((wf.psd[0] - 0.125).abs() < 1e-15);
        assert!((wf.psd[1] - 0.875).abs() < 1e-15);
        assert!((wf.water_level - 1.125).abs() < 1e-15);
        // the same through a two-point trapezoid grid of step 2
        let g = FrequencyGrid::new(1.0, 2.0, 2).unwrap();
        let a = waterfill(&Spectrum::new(g, vec![1.0, 4.0]).unwrap(), 1.0).unwrap();
        assert!((a.values()[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sorted_level_agrees_with_the_active_set_rounds() {
        let k: Vec<f64> = (0..200).map(|i| 1.0 / (1.0 + ((i * 37) % 101) as f64 * 0.37)).collect();
        let w: Vec<f64> = (0..200).map(|i| 0.5 + (i % 7) as f64 * 0.1).collect();
        for budget in [1e-3, 0.5, 10.0, 1e3] {
            let wf = waterfill_weighted(&k, &w, budget).unwrap();
            let base = 1.0 / k.iter().copied().fold(0.0, f64::max);
            let offsets: Vec<f64> = k.iter().map(|v| 1.0 / v - base).collect();
            let rel = sorted_level(&offsets, &w, budget);
            assert!((base + rel - wf.water_level).abs() <= 1e-12 * wf.water_level);
        }
    }

    #[test]
    fn tiny_budget_goes_to_best_bin() {
        let k = [0.5, 3.0, 2.9, 0.1];
        let wf = waterfill_weighted(&k, &[1.0; 4], 1e-6).unwrap();
        assert_eq!(wf.psd[0], 0.0);
        assert!((wf.psd[1] - 1e-6).abs() < 1e-18);
        assert_eq!(wf.psd[2], 0.0);
    }

    #[test]
    fn rejects_unusable_channel() {
        assert_eq!(
            waterfill_weighted(&[0.0, 0.0], &[1.0, 1.0], 1.0),
            Err(Error::NoUsableChannel)
        );
        assert!(waterfill_weighted(&[1.0], &[1.0], -1.0).is_err());
        assert!(waterfill(&Spectrum::constant(grid(3), 1.0).unwrap(), f64::NAN).is_err());
    }

    #[test]
    fn zero_budget_allocates_nothing() {
        let wf = waterfill_weighted(&[1.0, 2.0], &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(wf.psd, vec![0.0, 0.0]);
    }

    #[test]
    fn mrc_adds_and_checks_grids() {
        let a = Spectrum::new(grid(3), vec![1.0, 2.0, 3.0]).unwrap();
        let z = Spectrum::constant(grid(3), 0.0).unwrap();
        assert_eq!(mrc_snr(&a, &z).unwrap(), a);
        let b = Spectrum::new(grid(3), vec![0.5, 0.0, 7.0]).unwrap();
        assert_eq!(mrc_snr(&a, &b).unwrap(), mrc_snr(&b, &a).unwrap());
        assert_eq!(mrc_snr(&a, &Spectrum::constant(grid(4), 0.0).unwrap()), Err(Error::GridMismatch));
    }

    #[test]
    fn spectrum_rejects_bad_values() {
        assert!(Spectrum::new(grid(2), vec![1.0]).is_err());
        assert!(Spectrum::new(grid(2), vec![1.0, f64::INFINITY]).is_err());
        assert!(FrequencyGrid::new(1.0, 1.0, 1).is_err());
        assert!(FrequencyGrid::new(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn csv_export() {
        let s = Spectrum::new(FrequencyGrid::new(1.0, 0.5, 2).unwrap(), vec![0.25, 4.0]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, "gain_sr").unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "frequency_hz,gain_sr\n1,0.25\n1.5,4\n");
    }
}
