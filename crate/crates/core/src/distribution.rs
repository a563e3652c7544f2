//! Jump laws on the positive integers.
//!
//! A [`JumpDistribution`] is the law of the renewal jump, of the queue's
//! service and inter-arrival times, and of the edge lengths of the renewal
//! family forest. Four families are supported: geometric, shifted Poisson,
//! zeta with tail exponent `alpha`, and a finite empirical table.
//!
//! Sampling is by generalized inverse cdf with the right-continuous
//! convention `quantile(u) = min { k : cdf(k) > u }`, so that `u` uniform on
//! `[0, 1)` lands on `k` with probability exactly `pmf(k)`.

use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest jump ever returned. Zeta laws with small `alpha` put visible mass
/// beyond `u64` range; draws past this cap saturate to it.
pub const JUMP_CAP: u64 = 1 << 62;

/// Default number of cdf entries tabulated for laws with unbounded support.
pub const DEFAULT_TABLE_LEN: usize = 1 << 16;

const EMPIRICAL_SUM_TOL: f64 = 1e-12;

/// Parameters of a jump law, as written on the command line
/// (`geo:0.5`, `poi:25`, `zeta:0.75`, `emp:1=0.5,2=0.5`).
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionSpec {
    /// `P(k) = p (1-p)^(k-1)`, `k >= 1`.
    Geometric(f64),
    /// `1 + N` with `N ~ Poisson(lambda)`.
    Poisson(f64),
    /// `P(k) = c1 / k^(alpha+1)`, `k >= 1`.
    Zeta(f64),
    /// Finite table of `(value, probability)` pairs.
    Empirical(Vec<(u64, f64)>),
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Geometric(p) => write!(f, "geo:{p}"),
            DistributionSpec::Poisson(l) => write!(f, "poi:{l}"),
            DistributionSpec::Zeta(a) => write!(f, "zeta:{a}"),
            DistributionSpec::Empirical(entries) => {
                write!(f, "emp:")?;
                for (i, (k, p)) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}={p}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected `<kind>:<parameters>`"))?;
        let number = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(s, e.to_string()))
        };
        match kind.trim() {
            "geo" => Ok(DistributionSpec::Geometric(number(rest)?)),
            "poi" => Ok(DistributionSpec::Poisson(number(rest)?)),
            "zeta" => Ok(DistributionSpec::Zeta(number(rest)?)),
            "emp" => {
                let mut entries = Vec::new();
                for item in rest.split(',') {
                    let (k, p) = item
                        .split_once('=')
                        .ok_or_else(|| Error::parse(s, "empirical entries are `value=prob`"))?;
                    let k = k
                        .trim()
                        .parse::<u64>()
                        .map_err(|e| Error::parse(s, e.to_string()))?;
                    entries.push((k, number(p)?));
                }
                Ok(DistributionSpec::Empirical(entries))
            }
            other => Err(Error::parse(s, format!("unknown distribution kind `{other}`"))),
        }
    }
}

/// Mean of a jump law; heavy-tailed zeta laws have none.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mean {
    Finite(f64),
    Infinite,
}

impl Mean {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Mean::Infinite)
    }
}

/// A normalized law on `{1, 2, ...}` with a tabulated cdf.
#[derive(Clone, Debug)]
pub struct JumpDistribution {
    spec: DistributionSpec,
    /// `cdf[k - 1] = P(eta <= k)`.
    cdf: Vec<f64>,
    /// `1 / zeta(alpha + 1)` for the zeta family.
    zeta_norm: f64,
    gcd: u64,
}

impl PartialEq for JumpDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl JumpDistribution {
    pub fn new(spec: DistributionSpec) -> Result<Self> {
        Self::with_table_len(spec, DEFAULT_TABLE_LEN)
    }

    /// Builds the law, tabulating at most `table_len` cdf entries for the
    /// unbounded families. Quantiles past the table fall back to closed forms
    /// (geometric), the Hurwitz tail (zeta), or the last entry (Poisson, whose
    /// table already reaches cdf 1 in floating point).
    pub fn with_table_len(spec: DistributionSpec, table_len: usize) -> Result<Self> {
        let table_len = table_len.max(1);
        match &spec {
            DistributionSpec::Geometric(p) => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric parameter must lie in (0,1), got {p}"
                    )));
                }
                Ok(Self {
                    spec,
                    cdf: Vec::new(),
                    zeta_norm: 0.0,
                    gcd: 1,
                })
            }
            DistributionSpec::Poisson(lambda) => {
                let lambda = *lambda;
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "Poisson mean must be positive, got {lambda}"
                    )));
                }
                let upper = (lambda + 40.0 * lambda.sqrt() + 60.0).ceil() as usize;
                let mut pmf = Vec::with_capacity(upper + 1);
                for m in 0..=upper {
                    let m = m as f64;
                    pmf.push((m * lambda.ln() - lambda - ln_gamma(m + 1.0)).exp());
                }
                let total: f64 = pmf.iter().sum();
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = pmf
                    .iter()
                    .map(|p| {
                        acc += p / total;
                        acc
                    })
                    .collect();
                if let Some(last) = cdf.last_mut() {
                    *last = 1.0;
                }
                Ok(Self {
                    spec,
                    cdf,
                    zeta_norm: 0.0,
                    gcd: 1,
                })
            }
            DistributionSpec::Zeta(alpha) => {
                let alpha = *alpha;
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "zeta exponent must be positive, got {alpha}"
                    )));
                }
                let s = alpha + 1.0;
                let zeta_norm = 1.0 / hurwitz_zeta(s, 1.0);
                let mut cdf = Vec::with_capacity(table_len);
                let mut acc = 0.0;
                for k in 1..=table_len {
                    acc += zeta_norm * (k as f64).powf(-s);
                    cdf.push(acc.min(1.0));
                }
                Ok(Self {
                    spec,
                    cdf,
                    zeta_norm,
                    gcd: 1,
                })
            }
            DistributionSpec::Empirical(entries) => {
                if entries.is_empty() {
                    return Err(Error::InvalidParameter("empty empirical law".into()));
                }
                let mut sorted = entries.clone();
                sorted.sort_by_key(|e| e.0);
                for w in sorted.windows(2) {
                    if w[0].0 == w[1].0 {
                        return Err(Error::InvalidParameter(format!(
                            "duplicate empirical value {}",
                            w[0].0
                        )));
                    }
                }
                for &(k, p) in &sorted {
                    if k == 0 {
                        return Err(Error::InvalidParameter(
                            "empirical support must be strictly positive".into(),
                        ));
                    }
                    if !(p > 0.0 && p.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "empirical probability for {k} must be positive, got {p}"
                        )));
                    }
                }
                let total: f64 = sorted.iter().map(|e| e.1).sum();
                if (total - 1.0).abs() > EMPIRICAL_SUM_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "empirical probabilities sum to {total}, not 1"
                    )));
                }
                let max = sorted.last().map(|e| e.0).unwrap_or(1);
                if max > 1 << 24 {
                    return Err(Error::InvalidParameter(format!(
                        "empirical support value {max} too large to tabulate"
                    )));
                }
                let mut cdf = vec![0.0; max as usize];
                let mut acc = 0.0;
                let mut next = 0;
                for k in 1..=max {
                    if next < sorted.len() && sorted[next].0 == k {
                        acc += sorted[next].1 / total;
                        next += 1;
                    }
                    cdf[(k - 1) as usize] = acc;
                }
                cdf[(max - 1) as usize] = 1.0;
                let gcd = sorted.iter().fold(0, |g, e| gcd(g, e.0));
                Ok(Self {
                    spec: DistributionSpec::Empirical(sorted),
                    cdf,
                    zeta_norm: 0.0,
                    gcd,
                })
            }
        }
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// Greatest common divisor of the support.
    pub fn support_gcd(&self) -> u64 {
        self.gcd
    }

    /// Largest support point for bounded laws.
    pub fn max_support(&self) -> Option<u64> {
        match &self.spec {
            DistributionSpec::Empirical(e) => e.last().map(|x| x.0),
            _ => None,
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match &self.spec {
            DistributionSpec::Geometric(p) => p * (1.0 - p).powf((k - 1) as f64),
            DistributionSpec::Poisson(lambda) => {
                let m = (k - 1) as f64;
                (m * lambda.ln() - lambda - ln_gamma(m + 1.0)).exp()
            }
            DistributionSpec::Zeta(alpha) => self.zeta_norm * (k as f64).powf(-(alpha + 1.0)),
            DistributionSpec::Empirical(e) => e
                .iter()
                .find(|x| x.0 == k)
                .map(|x| x.1)
                .unwrap_or(0.0),
        }
    }

    /// `P(eta <= k)`.
    pub fn cdf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match &self.spec {
            DistributionSpec::Geometric(p) => -((k as f64) * (-p).ln_1p()).exp_m1(),
            DistributionSpec::Zeta(_) if k as usize > self.cdf.len() => 1.0 - self.tail(k),
            _ => {
                let i = (k as usize).min(self.cdf.len());
                self.cdf[i - 1]
            }
        }
    }

    /// `P(eta > k)`, computed without cancellation for the parametric
    /// heavy-tailed families.
    pub fn tail(&self, k: u64) -> f64 {
        match &self.spec {
            DistributionSpec::Geometric(p) => ((k as f64) * (-p).ln_1p()).exp(),
            DistributionSpec::Zeta(alpha) => {
                self.zeta_norm * hurwitz_zeta(alpha + 1.0, k as f64 + 1.0)
            }
            _ => (1.0 - self.cdf(k)).max(0.0),
        }
    }

    /// Generalized inverse cdf: `min { k : cdf(k) > u }` for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> u64 {
        debug_assert!((0.0..1.0).contains(&u), "uniform out of range: {u}");
        match &self.spec {
            DistributionSpec::Geometric(p) => {
                let log_q = (-p).ln_1p();
                let x = (-u).ln_1p() / log_q;
                // cdf(k) <= u iff k <= x, so away from integers the answer
                // is floor(x) + 1 without checking the cdf
                let frac = x - x.floor();
                let margin = 1e-9 * x.max(1.0);
                if x < (1u64 << 52) as f64 && frac > margin && frac < 1.0 - margin {
                    return x as u64 + 1;
                }
                let guess = x.floor();
                let mut k = if guess.is_finite() && guess < JUMP_CAP as f64 {
                    (guess as u64).saturating_add(1)
                } else {
                    JUMP_CAP
                };
                while k > 1 && self.cdf(k - 1) > u {
                    k -= 1;
                }
                while k < JUMP_CAP && self.cdf(k) <= u {
                    k += 1;
                }
                k
            }
            DistributionSpec::Zeta(_) => {
                let last = *self.cdf.last().expect("zeta table is nonempty");
                if u < last {
                    return self.cdf.partition_point(|&c| c <= u) as u64 + 1;
                }
                // Past the table: first k with tail(k) < 1 - u. Start from
                // the asymptotic inverse of tail(k) ~ c k^-alpha / alpha,
                // refine it, then settle the integer by galloping and
                // bisection.
                let alpha = match self.spec {
                    DistributionSpec::Zeta(a) => a,
                    _ => unreachable!(),
                };
                let target = 1.0 - u;
                let floor = self.cdf.len() as u64;
                let clamp = |x: f64| -> u64 {
                    if x.is_finite() {
                        x.clamp(floor as f64, JUMP_CAP as f64) as u64
                    } else {
                        JUMP_CAP
                    }
                };
                let mut k = clamp((self.zeta_norm / (alpha * target)).powf(1.0 / alpha));
                for _ in 0..3 {
                    let next = clamp(k as f64 * (self.tail(k) / target).powf(1.0 / alpha));
                    if next.abs_diff(k) <= 1 {
                        break;
                    }
                    k = next;
                }
                // bracket: tail(lo) >= target > tail(hi)
                let (mut lo, mut hi);
                if self.tail(k) < target {
                    hi = k;
                    let mut step = 1u64;
                    loop {
                        let cand = hi.saturating_sub(step).max(floor);
                        if cand == floor || self.tail(cand) >= target {
                            lo = cand;
                            break;
                        }
                        hi = cand;
                        step = step.saturating_mul(2);
                    }
                } else {
                    lo = k;
                    let mut step = 1u64;
                    loop {
                        if lo >= JUMP_CAP {
                            return JUMP_CAP;
                        }
                        let cand = lo.saturating_add(step).min(JUMP_CAP);
                        if self.tail(cand) < target {
                            hi = cand;
                            break;
                        }
                        lo = cand;
                        step = step.saturating_mul(2);
                    }
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if self.tail(mid) < target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
            _ => {
                let i = self.cdf.partition_point(|&c| c <= u);
                (i.min(self.cdf.len() - 1) + 1) as u64
            }
        }
    }

    pub fn mean(&self) -> Mean {
        match &self.spec {
            DistributionSpec::Geometric(p) => Mean::Finite(1.0 / p),
            DistributionSpec::Poisson(lambda) => Mean::Finite(lambda + 1.0),
            DistributionSpec::Zeta(alpha) => {
                if *alpha > 1.0 {
                    Mean::Finite(self.zeta_norm * hurwitz_zeta(*alpha, 1.0))
                } else {
                    Mean::Infinite
                }
            }
            DistributionSpec::Empirical(e) => {
                Mean::Finite(e.iter().map(|&(k, p)| k as f64 * p).sum())
            }
        }
    }
}

impl FromStr for JumpDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        JumpDistribution::new(s.parse()?)
    }
}

impl fmt::Display for JumpDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

/// Draws a jump from `dist` by inverse cdf at `u`.
#[inline]
pub fn sample_jump(dist: &JumpDistribution, u: f64) -> u64 {
    dist.quantile(u)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Hurwitz zeta `sum_{k >= 0} (a + k)^(-s)` for `s > 1`, `a >= 1`, by
/// Euler-Maclaurin summation after shifting `a` past 12.
pub(crate) fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    // B_{2m} / (2m)!
    const BERNOULLI: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let direct = if a < 12.0 { (12.0 - a).ceil() as usize } else { 0 };
    let mut head = 0.0;
    for k in (0..direct).rev() {
        head += (a + k as f64).powf(-s);
    }
    let x = a + direct as f64;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    let mut rising = s;
    let mut power = x.powf(-s - 1.0);
    for (m, b) in BERNOULLI.iter().enumerate() {
        tail += b * rising * power;
        let j = 2.0 * m as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        power /= x * x;
    }
    head + tail
}
