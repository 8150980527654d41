//! Monte Carlo estimation of outage and throughput over Nakagami-m fading.
//!
//! Phases are taken as ideally aligned, so each realization reduces to the
//! two sums `X = (Σ|g_bn||g_nd|)²` and `Y = Σ|g_nd|²` built from the same
//! receiver-side amplitudes. Noise enters through its average power only.
//!
//! Draw `i` uses its own ChaCha8 stream (`seed`, stream `i`), so results do
//! not depend on how draws are split into batches or spread over workers.
//! Amplitudes are drawn with unit spread and scaled afterwards, which lets
//! one pass of draws serve every point of a sweep that shares the element
//! count and fading shapes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fading::NakagamiSampler;
use crate::noise::{build_noise_budget, NoiseBudget, SystemParams};
use crate::specfun::ln_gamma;

pub const MIN_TRIALS: u64 = 1000;
/// Below this many events (or non-events) the exact binomial interval is used.
const EXACT_CI_COUNT: u64 = 30;

/// Which SINR a draw is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinrKind {
    /// `ψX / (λY + 1)`
    Exact,
    /// `½ min(ψX/(λY), ψX)`; its outage bounds the true outage from above.
    Lower,
    /// `min(ψX/(λY), ψX)`; its outage bounds the true outage from below.
    Upper,
}

impl SinrKind {
    pub const ALL: [SinrKind; 3] = [SinrKind::Exact, SinrKind::Lower, SinrKind::Upper];

    #[inline]
    pub fn sinr(self, x: f64, y: f64, b: &NoiseBudget) -> f64 {
        match self {
            SinrKind::Exact => sinr_exact(x, y, b),
            SinrKind::Lower => sinr_lower(x, y, b),
            SinrKind::Upper => sinr_upper(x, y, b),
        }
    }
}

#[inline]
pub fn sinr_exact(x: f64, y: f64, b: &NoiseBudget) -> f64 {
    b.psi * x / (b.lambda * y + 1.0)
}

#[inline]
pub fn sinr_upper(x: f64, y: f64, b: &NoiseBudget) -> f64 {
    let signal = b.psi * x;
    // ψX/(λY) is +∞ (or NaN for X = 0) when λY = 0; min picks ψX either way.
    (signal / (b.lambda * y)).min(signal)
}

#[inline]
pub fn sinr_lower(x: f64, y: f64, b: &NoiseBudget) -> f64 {
    0.5 * sinr_upper(x, y, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Draws per work unit.
    pub batch: u64,
    pub ci_level: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { trials: 1_000_000, seed: 0x5eed, batch: 1 << 14, ci_level: 0.95, execution: Execution::default() }
    }
}

impl McConfig {
    pub fn with_trials(self, trials: u64) -> Self {
        Self { trials, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        Self { execution, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.trials < MIN_TRIALS {
            issues.push(format!("trials must be at least {MIN_TRIALS} to report a confidence interval, got {}", self.trials));
        }
        if self.batch == 0 {
            issues.push("batch must be positive".to_string());
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            issues.push(format!("ci_level must lie in (0, 1), got {}", self.ci_level));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(
                issues.into_iter().map(|message| crate::ConfigIssue { line: None, message }).collect(),
            ))
        }
    }

    fn batches(&self) -> usize {
        self.trials.div_ceil(self.batch) as usize
    }

    fn batch_range(&self, b: usize) -> std::ops::Range<u64> {
        let start = b as u64 * self.batch;
        start..(start + self.batch).min(self.trials)
    }
}

/// A binomial proportion with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub events: u64,
    pub trials_used: u64,
    /// Whether the Clopper–Pearson interval was used instead of the normal one.
    pub exact_interval: bool,
}

impl McEstimate {
    pub fn from_counts(events: u64, trials: u64, level: f64) -> Self {
        let p_hat = events as f64 / trials as f64;
        let exact = events.min(trials - events) < EXACT_CI_COUNT;
        let (ci_lo, ci_hi) = if exact {
            clopper_pearson(events, trials, level)
        } else {
            let z = Normal::standard().inverse_cdf(0.5 + 0.5 * level);
            let half = z * (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
            ((p_hat - half).max(0.0), (p_hat + half).min(1.0))
        };
        Self { p_hat, ci_lo, ci_hi, events, trials_used: trials, exact_interval: exact }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_hi - self.ci_lo
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_lo <= p && p <= self.ci_hi
    }
}

/// `P[Bin(n, p) ≤ k]` summed in log space; meant for small `k`.
fn binomial_cdf_small(k: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ln_n_fact = ln_gamma(nf + 1.0);
    (0..=k.min(n))
        .map(|j| {
            let jf = j as f64;
            (ln_n_fact - ln_gamma(jf + 1.0) - ln_gamma(nf - jf + 1.0) + jf * lp + (nf - jf) * lq).exp()
        })
        .sum::<f64>()
        .min(1.0)
}

/// Solves `g(p) = target` for a decreasing `g` on `[0, 1]` by bisection.
fn bisect_decreasing(g: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact (Clopper–Pearson) interval for `k` events in `n` trials. Evaluated
/// on whichever of `k`, `n - k` is small so the binomial sums stay short.
fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    let tail = 0.5 * (1.0 - level);
    if n - k < k {
        let (lo, hi) = clopper_pearson(n - k, n, level);
        return (1.0 - hi, 1.0 - lo);
    }
    let lo = if k == 0 { 0.0 } else { bisect_decreasing(|p| binomial_cdf_small(k - 1, n, p), 1.0 - tail) };
    let hi = if k == n { 1.0 } else { bisect_decreasing(|p| binomial_cdf_small(k, n, p), tail) };
    (lo, hi)
}

/// Samples the normalised sums for a fixed element count and shapes.
#[derive(Debug, Clone, Copy)]
pub struct ChannelSampler {
    bn: NakagamiSampler,
    nd: NakagamiSampler,
    n: u32,
}

impl ChannelSampler {
    pub fn new(m_bn: f64, m_nd: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("element count must be at least 1"));
        }
        Ok(Self { bn: NakagamiSampler::new(m_bn, 1.0)?, nd: NakagamiSampler::new(m_nd, 1.0)?, n })
    }

    pub fn for_params(p: &SystemParams) -> Result<Self> {
        Self::new(p.m_bn, p.m_nd, p.n_elements)
    }

    /// `(Σ a_n b_n, Σ b_n²)` for unit-spread amplitudes.
    #[inline]
    pub fn draw_normalized<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let mut amp = 0.0;
        let mut y = 0.0;
        for _ in 0..self.n {
            let a = self.bn.sample(rng);
            let b2 = self.nd.sample_power(rng);
            amp += a * b2.sqrt();
            y += b2;
        }
        (amp, y)
    }
}

/// Generator for draw `index` under `seed`.
#[inline]
fn draw_rng(base: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(index);
    rng
}

fn base_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One realization `(X, Y)` at the given parameters.
pub fn draw_realization<R: rand::Rng + ?Sized>(p: &SystemParams, rng: &mut R) -> Result<(f64, f64)> {
    let sampler = ChannelSampler::for_params(p)?;
    let (omega_bn, omega_nd) = (p.omega_bn()?, p.omega_nd()?);
    let (amp, y) = sampler.draw_normalized(rng);
    Ok((omega_bn * omega_nd * amp * amp, omega_nd * y))
}

/// Draws complex channels with uniform phases, applies the aligning phase
/// shifts explicitly and returns the largest relative difference from the
/// amplitude-only `(X, Y)` over `draws` realizations.
pub fn phase_alignment_discrepancy(p: &SystemParams, draws: u64, seed: u64) -> Result<f64> {
    use rand::Rng;
    let bn = NakagamiSampler::new(p.m_bn, p.omega_bn()?)?;
    let nd = NakagamiSampler::new(p.m_nd, p.omega_nd()?)?;
    let base = base_rng(seed);
    let mut worst = 0.0_f64;
    for i in 0..draws {
        let mut rng = draw_rng(&base, i);
        let (mut re, mut im, mut y_c) = (0.0, 0.0, 0.0);
        let (mut amp, mut y_a) = (0.0, 0.0);
        let cmul = |(ar, ai): (f64, f64), (br, bi): (f64, f64)| (ar * br - ai * bi, ar * bi + ai * br);
        for _ in 0..p.n_elements {
            let (a, b) = (bn.sample(&mut rng), nd.sample(&mut rng));
            let th_bn = rng.random::<f64>() * std::f64::consts::TAU;
            let th_nd = rng.random::<f64>() * std::f64::consts::TAU;
            let g_bn = (a * th_bn.cos(), a * th_bn.sin());
            let g_nd = (b * th_nd.cos(), b * th_nd.sin());
            // The element undoes both channel phases.
            let phi = -(th_bn + th_nd);
            let shift = (phi.cos(), phi.sin());
            let (cr, ci) = cmul(cmul(g_nd, shift), g_bn);
            re += cr;
            im += ci;
            let g_out = cmul(g_nd, shift);
            y_c += g_out.0 * g_out.0 + g_out.1 * g_out.1;
            amp += a * b;
            y_a += b * b;
        }
        let x_c = re * re + im * im;
        let x_a = amp * amp;
        worst = worst.max((x_c - x_a).abs() / x_a).max((y_c - y_a).abs() / y_a);
    }
    Ok(worst)
}

/// One operating point of a curve: scales from the normalised draws plus
/// the noise budget.
#[derive(Debug, Clone, Copy)]
struct Point {
    scale_x: f64,
    scale_y: f64,
    budget: NoiseBudget,
}

fn prepare_points(points: &[SystemParams]) -> Result<(ChannelSampler, Vec<Point>)> {
    let first = points.first().ok_or_else(|| Error::domain("no operating points supplied"))?;
    let sampler = ChannelSampler::for_params(first)?;
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        if p.n_elements != first.n_elements || p.m_bn != first.m_bn || p.m_nd != first.m_nd {
            return Err(Error::domain(
                "operating points sharing draws must have the same element count and fading shapes",
            ));
        }
        let (omega_bn, omega_nd) = (p.omega_bn()?, p.omega_nd()?);
        out.push(Point { scale_x: omega_bn * omega_nd, scale_y: omega_nd, budget: build_noise_budget(p)? });
    }
    Ok((sampler, out))
}

/// Outage estimates for every `(point, kind)` pair from one shared set of
/// draws. The result is indexed `[point][kind]`.
pub fn estimate_outage_curve(
    points: &[SystemParams],
    cfg: &McConfig,
    kinds: &[SinrKind],
) -> Result<Vec<Vec<McEstimate>>> {
    cfg.validate()?;
    let (sampler, pts) = prepare_points(points)?;
    let width = kinds.len();
    let base = base_rng(cfg.seed);
    let per_batch = cfg.execution.map_indexed(cfg.batches(), |b| {
        let mut counts = vec![0u64; pts.len() * width];
        for i in cfg.batch_range(b) {
            let mut rng = draw_rng(&base, i);
            let (amp, y1) = sampler.draw_normalized(&mut rng);
            let x1 = amp * amp;
            for (j, pt) in pts.iter().enumerate() {
                let (x, y) = (pt.scale_x * x1, pt.scale_y * y1);
                for (k, kind) in kinds.iter().enumerate() {
                    if kind.sinr(x, y, &pt.budget) < pt.budget.ups_th {
                        counts[j * width + k] += 1;
                    }
                }
            }
        }
        counts
    });
    let mut totals = vec![0u64; pts.len() * width];
    for counts in per_batch {
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(totals
        .chunks(width.max(1))
        .take(pts.len())
        .map(|row| row.iter().map(|&e| McEstimate::from_counts(e, cfg.trials, cfg.ci_level)).collect())
        .collect())
}

/// Fraction of draws whose selected SINR falls below Υ_th.
pub fn estimate_outage(p: &SystemParams, cfg: &McConfig, which: SinrKind) -> Result<McEstimate> {
    Ok(estimate_outage_curve(std::slice::from_ref(p), cfg, &[which])?[0][0])
}

/// Throughput `(1 - P_out) R` from the exact-SINR outage, with the interval
/// carried over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputEstimate {
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub outage: McEstimate,
}

impl ThroughputEstimate {
    pub fn from_outage(outage: McEstimate, rate_bps: f64) -> Self {
        Self {
            value: (1.0 - outage.p_hat) * rate_bps,
            ci_lo: (1.0 - outage.ci_hi) * rate_bps,
            ci_hi: (1.0 - outage.ci_lo) * rate_bps,
            outage,
        }
    }
}

pub fn estimate_throughput(p: &SystemParams, cfg: &McConfig) -> Result<ThroughputEstimate> {
    Ok(ThroughputEstimate::from_outage(estimate_outage(p, cfg, SinrKind::Exact)?, p.target_rate_bps))
}

/// Sample mean and variance of the cascade amplitude `√X` with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub trials: u64,
}

pub fn estimate_cascade_moments(p: &SystemParams, cfg: &McConfig) -> Result<MomentEstimate> {
    cfg.validate()?;
    let sampler = ChannelSampler::for_params(p)?;
    let scale = (p.omega_bn()? * p.omega_nd()?).sqrt();
    let base = base_rng(cfg.seed);
    // Power sums are taken about the first draw to keep them well conditioned.
    let shift = sampler.draw_normalized(&mut draw_rng(&base, 0)).0;
    let sums = cfg.execution.map_indexed(cfg.batches(), |b| {
        let mut s = [0.0f64; 4];
        for i in cfg.batch_range(b) {
            let d = sampler.draw_normalized(&mut draw_rng(&base, i)).0 - shift;
            let d2 = d * d;
            s[0] += d;
            s[1] += d2;
            s[2] += d2 * d;
            s[3] += d2 * d2;
        }
        s
    });
    let mut s = [0.0f64; 4];
    for part in sums {
        for (acc, v) in s.iter_mut().zip(part) {
            *acc += v;
        }
    }
    let n = cfg.trials as f64;
    let m1 = s[0] / n;
    let (r2, r3, r4) = (s[1] / n, s[2] / n, s[3] / n);
    let c2 = r2 - m1 * m1;
    let c4 = r4 - 4.0 * m1 * r3 + 6.0 * m1 * m1 * r2 - 3.0 * m1.powi(4);
    let variance = c2 * n / (n - 1.0);
    Ok(MomentEstimate {
        mean: scale * (shift + m1),
        variance: scale * scale * variance,
        se_mean: scale * (variance / n).sqrt(),
        se_variance: scale * scale * ((c4 - c2 * c2).max(0.0) / n).sqrt(),
        trials: cfg.trials,
    })
}

/// Number of draws violating `γ_lower ≤ γ_exact ≤ γ_upper`.
pub fn count_sandwich_violations(p: &SystemParams, cfg: &McConfig) -> Result<u64> {
    cfg.validate()?;
    let (sampler, pts) = prepare_points(std::slice::from_ref(p))?;
    let pt = pts[0];
    let base = base_rng(cfg.seed);
    let per_batch = cfg.execution.map_indexed(cfg.batches(), |b| {
        cfg.batch_range(b)
            .filter(|&i| {
                let (amp, y1) = sampler.draw_normalized(&mut draw_rng(&base, i));
                let (x, y) = (pt.scale_x * amp * amp, pt.scale_y * y1);
                let g = sinr_exact(x, y, &pt.budget);
                !(sinr_lower(x, y, &pt.budget) <= g && g <= sinr_upper(x, y, &pt.budget))
            })
            .count() as u64
    });
    Ok(per_batch.into_iter().sum())
}
