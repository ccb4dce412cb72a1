use super::{af_rate_hd, Coefficients, Duplex, RateResult, RelayOutput, Scheme, SchemeConfig};
use crate::error::{Error, Result};
use crate::link::LinkModel;
use crate::spectrum::{waterfill_weighted, PowerAllocation, Spectrum};

const NEWTON_STEPS: usize = 60;
const MULTIPLIER_EVALS: usize = 200;
const BUDGET_RTOL: f64 = 1e-11;

/// Half-duplex FF rate. Computes the AF solution first and hands it to
/// [`ff_rate_hd_from`].
pub fn ff_rate_hd(link: &LinkModel, config: &SchemeConfig) -> Result<RateResult> {
    config.expect(Scheme::Ff)?;
    let af_config = SchemeConfig {
        scheme: Scheme::Af,
        duplex: Duplex::Hd,
        ..*config
    };
    let af = af_rate_hd(link, &af_config)?;
    ff_rate_hd_from(link, config, &af)
}

/// Half-duplex FF rate by alternating optimization of the source PSD and
/// the relay transmit PSD, started from the better of the AF solution `af`
/// and independent waterfilling of both hops.
///
/// With `x = P_St |H_SR|^2 / P_Rn`, `y = P_Rt |H_RD|^2 / P_Dn` and
/// `a = |H_SD,p|^2 / P_Dn` the MRC SNR is `a P_St + x y / (x + y + 1)`,
/// which is concave in either PSD when the other is held fixed. Each block
/// is solved exactly through its per-bin stationarity condition and a
/// scalar search on the power multiplier, so the objective never decreases.
/// The returned rate is never below `af.rate`.
pub fn ff_rate_hd_from(link: &LinkModel, config: &SchemeConfig, af: &RateResult) -> Result<RateResult> {
    config.expect(Scheme::Ff)?;
    if af.scheme != Scheme::Af || af.duplex != Duplex::Hd {
        return Err(Error::invalid("af", "FF needs a half-duplex AF solution to start from"));
    }
    if af.source_allocation.grid() != &link.grid || af.relay.relay_psd().grid() != &link.grid {
        return Err(Error::GridMismatch);
    }
    let (ps, pr) = (config.source_power, config.relay_power);
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !same(af.source_allocation.total_power, ps) || !same(af.relay.relay_psd().total_power, pr) {
        return Err(Error::invalid("af", "AF solution was computed for other power budgets"));
    }

    let problem = Problem::new(link);
    let n = problem.weights.len();

    let p_af = af.source_allocation.values().to_vec();
    let q_af = af.relay.relay_psd().values().to_vec();
    let j_af = problem.objective(&p_af, &q_af);

    let (mut p, mut lambda_source) = fill(&problem.s, &problem.weights, ps)?;
    let (mut q, mut lambda_relay) = fill(&problem.t, &problem.weights, pr)?;
    let mut j = problem.objective(&p, &q);
    if j_af > j {
        p.clone_from(&p_af);
        q.clone_from(&q_af);
        j = j_af;
    }

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut scratch = vec![0.0; n];

    for it in 1..=config.max_iterations {
        iterations = it;
        let before = j;

        if let Some(lambda) = problem.source_step(&q, ps, lambda_source, &mut scratch) {
            lambda_source = Some(lambda);
            let jn = problem.objective(&scratch, &q);
            if jn >= j {
                std::mem::swap(&mut p, &mut scratch);
                j = jn;
            }
        }
        if let Some(lambda) = problem.relay_step(&p, pr, lambda_relay, &mut scratch) {
            lambda_relay = Some(lambda);
            let jn = problem.objective(&p, &scratch);
            if jn >= j {
                std::mem::swap(&mut q, &mut scratch);
                j = jn;
            }
        }

        trace.push(0.5 * j);
        if j - before <= config.convergence_tol * j.abs() {
            converged = true;
            break;
        }
    }

    let (p, q, rate) = if 0.5 * j < af.rate {
        (p_af, q_af, af.rate)
    } else {
        (p, q, 0.5 * j)
    };
    let gain_sq: Vec<f64> = (0..n)
        .map(|i| {
            q[i] / ((p[i] * link.gain_sr.values()[i] + link.noise_relay.values()[i])
                * link.gain_rr.values()[i])
        })
        .collect();
    let grid = link.grid;
    Ok(RateResult {
        scheme: Scheme::Ff,
        duplex: Duplex::Hd,
        rate,
        source_allocation: PowerAllocation {
            psd: Spectrum::new(grid, p)?,
            total_power: ps,
        },
        relay: RelayOutput::Filter {
            gain_sq: Spectrum::new(grid, gain_sq)?,
            relay_psd: PowerAllocation {
                psd: Spectrum::new(grid, q)?,
                total_power: pr,
            },
        },
        iterations_used: iterations,
        converged,
        trace,
    })
}

/// Waterfilled PSD and its multiplier `1 / level`, used to seed the
/// multiplier searches.
fn fill(k: &[f64], weights: &[f64], budget: f64) -> Result<(Vec<f64>, Option<f64>)> {
    match waterfill_weighted(k, weights, budget) {
        Ok(w) => {
            let lambda = (w.water_level > 0.0).then(|| 1.0 / w.water_level);
            Ok((w.psd, lambda))
        }
        Err(Error::NoUsableChannel) => {
            let width: f64 = weights.iter().sum();
            Ok((vec![budget / width; k.len()], None))
        }
        Err(e) => Err(e),
    }
}

struct Problem {
    weights: Vec<f64>,
    a: Vec<f64>,
    s: Vec<f64>,
    t: Vec<f64>,
}

impl Problem {
    fn new(link: &LinkModel) -> Self {
        let c = Coefficients::new(link);
        Self {
            weights: c.weights,
            a: c.passive,
            s: c.first_hop,
            t: c.second_hop,
        }
    }

    /// `sum w log2(1 + a p + x y / (x + y + 1))`
    fn objective(&self, p: &[f64], q: &[f64]) -> f64 {
        (0..p.len())
            .map(|i| {
                let x = self.s[i] * p[i];
                let y = self.t[i] * q[i];
                self.weights[i] * (1.0 + self.a[i] * p[i] + x * y / (x + y + 1.0)).log2()
            })
            .sum()
    }

    /// Optimal relay PSD for fixed source PSD `p`, written into `out`.
    /// Returns the multiplier, or `None` when no bin benefits from relay power.
    fn relay_step(&self, p: &[f64], budget: f64, warm: Option<f64>, out: &mut [f64]) -> Option<f64> {
        let bins: Vec<RelayBin> = (0..p.len())
            .map(|i| RelayBin::new(self.a[i] * p[i], self.s[i] * p[i], self.t[i]))
            .collect();
        let lambda_max = bins.iter().map(|b| b.threshold).fold(0.0, f64::max);
        solve_multiplier(
            |lambda, out: &mut [f64]| self.sweep(out, |i| bins[i].power(lambda)),
            budget,
            lambda_max,
            warm,
            out,
        )
    }

    /// Optimal source PSD for fixed relay PSD `q`, written into `out`.
    fn source_step(&self, q: &[f64], budget: f64, warm: Option<f64>, out: &mut [f64]) -> Option<f64> {
        let bins: Vec<SourceBin> = (0..q.len())
            .map(|i| SourceBin::new(self.a[i], self.s[i], self.t[i] * q[i]))
            .collect();
        let lambda_max = bins.iter().map(|b| b.threshold).fold(0.0, f64::max);
        solve_multiplier(
            |lambda, out: &mut [f64]| self.sweep(out, |i| bins[i].power(lambda)),
            budget,
            lambda_max,
            warm,
            out,
        )
    }

    /// Fills `out` with per-bin powers and returns the integrated power and
    /// its derivative with respect to the multiplier.
    fn sweep(&self, out: &mut [f64], power: impl Fn(usize) -> (f64, f64)) -> (f64, f64) {
        let mut total = 0.0;
        let mut slope = 0.0;
        for (i, o) in out.iter_mut().enumerate() {
            let (p, dp) = power(i);
            *o = p;
            total += self.weights[i] * p;
            slope += self.weights[i] * dp;
        }
        (total, slope)
    }
}

/// Positive root `u` of `k c d / ((d + u)(b (d + u) + c u)) = lambda`
/// measured from `d = c + 1`; zero when the left side at `u = 0` is below
/// `lambda`. Solved in the cancellation-free form of the quadratic.
fn coupled_root(lambda: f64, b: f64, c: f64, k: f64) -> f64 {
    let d = c + 1.0;
    let excess = k * c - lambda * b * d;
    if excess <= 0.0 {
        return 0.0;
    }
    let lin = lambda * d * (2.0 * b + c);
    2.0 * d * excess / (lin + (lin * lin + 4.0 * lambda * (b + c) * d * excess).sqrt())
}

struct RelayBin {
    b: f64,
    c: f64,
    t: f64,
    threshold: f64,
}

impl RelayBin {
    fn new(ap: f64, c: f64, t: f64) -> Self {
        let b = 1.0 + ap;
        let threshold = if t > 0.0 && c > 0.0 {
            t * c / ((c + 1.0) * b)
        } else {
            0.0
        };
        Self { b, c, t, threshold }
    }

    /// Relay PSD and its derivative in `lambda`.
    fn power(&self, lambda: f64) -> (f64, f64) {
        if self.threshold <= lambda {
            return (0.0, 0.0);
        }
        let (b, c) = (self.b, self.c);
        let u = coupled_root(lambda, b, c, self.t);
        let v = c + 1.0 + u;
        let inner = b * v + c * u;
        let du = -v * inner / (lambda * (inner + v * (b + c)));
        (u / self.t, du / self.t)
    }
}

struct SourceBin {
    a: f64,
    s: f64,
    e: f64,
    threshold: f64,
}

impl SourceBin {
    fn new(a: f64, s: f64, e: f64) -> Self {
        let threshold = a + s * e / (e + 1.0);
        Self { a, s, e, threshold }
    }

    /// Source PSD and its derivative in `lambda`.
    ///
    /// The PSD is the root of `F(p) = h'(p) - lambda h(p)` with
    /// `h(p) = 1 + a p + e s p / (s p + e + 1)`. `F` is convex and
    /// decreasing, and the `a = 0` root lies to its left, so Newton from
    /// there increases monotonically to the root.
    fn power(&self, lambda: f64) -> (f64, f64) {
        if self.threshold <= lambda {
            return (0.0, 0.0);
        }
        let (a, s, e) = (self.a, self.s, self.e);
        let dd = e + 1.0;
        let mut p = if s > 0.0 && e > 0.0 {
            coupled_root(lambda, 1.0, e, s) / s
        } else {
            0.0
        };
        let derivatives = |p: f64| {
            let den = s * p + dd;
            let h = 1.0 + a * p + e * s * p / den;
            let h1 = a + s * e * dd / (den * den);
            let h2 = -2.0 * s * s * e * dd / (den * den * den);
            (h, h1, h2)
        };
        if a > 0.0 {
            for _ in 0..NEWTON_STEPS {
                let (h, h1, h2) = derivatives(p);
                let f = h1 - lambda * h;
                if f <= 0.0 {
                    break;
                }
                let step = -f / (h2 - lambda * h1);
                p += step;
                if step <= 1e-15 * p {
                    break;
                }
            }
        }
        let (h, h1, h2) = derivatives(p);
        (p, h / (h2 - lambda * h1))
    }
}

/// Finds the multiplier whose per-bin powers exhaust `budget` and leaves the
/// powers, rescaled to the exact budget, in `out`. `powers(lambda, out)`
/// returns the integrated power and its derivative in `lambda`.
///
/// Safeguarded Newton on `ln total = ln budget` over `ln lambda`: steps that leave the current bracket
/// are replaced by bisection, or by a growing step down while no lower end
/// is known.
fn solve_multiplier(
    powers: impl Fn(f64, &mut [f64]) -> (f64, f64),
    budget: f64,
    lambda_max: f64,
    warm: Option<f64>,
    out: &mut [f64],
) -> Option<f64> {
    if !(lambda_max > 0.0) {
        return None;
    }
    if budget == 0.0 {
        out.fill(0.0);
        return Some(lambda_max);
    }
    let top = lambda_max.ln();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = top;
    let mut m = warm
        .map(f64::ln)
        .filter(|m| m.is_finite() && *m < top)
        .unwrap_or(top - 1.0);
    let mut descent = 1.0;
    let (mut root, mut best) = (m, f64::INFINITY);
    for _ in 0..MULTIPLIER_EVALS {
        let lambda = m.exp();
        let (total, slope) = powers(lambda, out);
        let g = total - budget;
        if g.abs() < best {
            (root, best) = (m, g.abs());
        }
        if best <= BUDGET_RTOL * budget {
            break;
        }
        if g > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
        let newton = m - (total / budget).ln() * total / (lambda * slope);
        let next = if newton > lo && newton < hi {
            newton
        } else if lo.is_finite() {
            0.5 * (lo + hi)
        } else {
            descent *= 2.0;
            hi - descent
        };
        if (next - m).abs() <= 1e-15 * m.abs().max(1.0) {
            break;
        }
        m = next;
    }

    let (total, _) = powers(root.exp(), out);
    if total > 0.0 {
        let scale = budget / total;
        out.iter_mut().for_each(|p| *p *= scale);
    }
    Some(root.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupled_root_solves_stationarity() {
        let (b, c, k, lambda) = (1.3, 2.0, 5.0, 0.4);
        let u = coupled_root(lambda, b, c, k);
        let d = c + 1.0;
        let lhs = k * c * d / ((d + u) * (b * (d + u) + c * u));
        assert!((lhs - lambda).abs() < 1e-14);
    }

    #[test]
    fn coupled_root_is_zero_below_threshold() {
        assert_eq!(coupled_root(10.0, 1.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn source_bin_meets_stationarity() {
        let bin = SourceBin::new(0.7, 3.0, 2.0);
        let lambda = 0.3;
        let (p, _) = bin.power(lambda);
        let dd = 3.0;
        let h = 1.0 + 0.7 * p + 2.0 * 3.0 * p / (3.0 * p + dd);
        let h1 = 0.7 + 3.0 * 2.0 * dd / (3.0 * p + dd).powi(2);
        assert!((h1 / h - lambda).abs() < 1e-12, "{}", h1 / h);
    }

    #[test]
    fn source_bin_without_relay_waterfills_passive() {
        let bin = SourceBin::new(2.0, 1.0, 0.0);
        assert!((bin.power(0.25).0 - (4.0 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn multiplier_search_meets_budget() {
        let weights = [0.5, 1.0, 0.5];
        let k = [1.0, 2.0, 4.0];
        let mut out = [0.0; 3];
        let lambda = solve_multiplier(
            |l, o: &mut [f64]| {
                let (mut total, mut slope) = (0.0, 0.0);
                for i in 0..3 {
                    o[i] = (1.0 / l - 1.0 / k[i]).max(0.0);
                    total += weights[i] * o[i];
                    if o[i] > 0.0 {
                        slope -= weights[i] / (l * l);
                    }
                }
                (total, slope)
            },
            0.9,
            4.0,
            None,
            &mut out,
        )
        .unwrap();
        let used: f64 = weights.iter().zip(&out).map(|(w, p)| w * p).sum();
        assert!((used - 0.9).abs() < 1e-12);
        let reference = waterfill_weighted(&k, &weights, 0.9).unwrap();
        for (a, b) in out.iter().zip(&reference.psd) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((1.0 / lambda - reference.water_level).abs() < 1e-9);
    }

    #[test]
    fn multiplier_search_handles_power_law_totals() {
        let evals = std::cell::Cell::new(0);
        let mut out = [0.0; 1];
        let lambda = solve_multiplier(
            |l, o: &mut [f64]| {
                evals.set(evals.get() + 1);
                o[0] = 1e-6 / l.sqrt();
                (o[0], -0.5 * o[0] / l)
            },
            8e-3,
            1e9,
            Some(1e8),
            &mut out,
        )
        .unwrap();
        assert!((out[0] - 8e-3).abs() < 1e-15);
        assert!((lambda.sqrt() * 8e-3 / 1e-6 - 1.0).abs() < 1e-9);
        assert!(evals.get() < 10, "{} evaluations", evals.get());
    }

    #[test]
    fn bin_slopes_match_finite_differences() {
        let lambda = 0.3;
        let h = 1e-6 * lambda;
        let relay = RelayBin::new(0.4, 2.0, 5.0);
        let source = SourceBin::new(0.7, 3.0, 2.0);
        for f in [
            &(|l: f64| relay.power(l)) as &dyn Fn(f64) -> (f64, f64),
            &|l: f64| source.power(l),
        ] {
            let fd = (f(lambda + h).0 - f(lambda - h).0) / (2.0 * h);
            let (_, slope) = f(lambda);
            assert!(((slope - fd) / fd).abs() < 1e-6, "{slope} vs {fd}");
        }
    }
}
