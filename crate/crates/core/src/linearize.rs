//! Continued fractions with exact convergents, Brjuno partial sums and
//! Liouville-type rotation numbers.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub const CONVERGENT_INCREMENT: f64 = 1e-6;
pub const DIVERGENT_SUM: f64 = 50.0;
/// Largest quotient (in bits) the candidate construction will materialize.
pub const MAX_QUOTIENT_BITS: f64 = 1e7;

/// `[0; a_1, a_2, ...]` with convergents `p_k/q_k`, `k = 1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub partial_quotients: Vec<BigUint>,
    pub convergents: Vec<(BigUint, BigUint)>,
    /// Fewer quotients than requested were produced.
    pub truncated: bool,
}

impl ContinuedFraction {
    /// Builds convergents from quotients with the three-term recurrence.
    pub fn from_quotients(quotients: Vec<BigUint>) -> Result<Self> {
        if quotients.iter().any(Zero::is_zero) {
            return Err(Error::InvalidArgument("partial quotients must be positive".into()));
        }
        let mut convergents = Vec::with_capacity(quotients.len());
        let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
        let (mut p, mut q) = (BigUint::zero(), BigUint::one());
        for a in &quotients {
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            convergents.push((p.clone(), q.clone()));
        }
        Ok(Self {
            partial_quotients: quotients,
            convergents,
            truncated: false,
        })
    }

    pub fn from_u64(quotients: &[u64]) -> Result<Self> {
        Self::from_quotients(quotients.iter().map(|&a| BigUint::from(a)).collect())
    }

    pub fn len(&self) -> usize {
        self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_quotients.is_empty()
    }

    /// Value of the last convergent.
    pub fn value(&self) -> f64 {
        match self.convergents.last() {
            Some((p, q)) => ratio(p, q),
            None => 0.0,
        }
    }
}

/// `ln n` for arbitrarily large `n`.
pub fn big_ln(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    (n >> shift).to_f64().map_or(f64::INFINITY, f64::ln) + shift as f64 * std::f64::consts::LN_2
}

/// `p/q` as a float, without overflowing on huge operands.
pub fn ratio(p: &BigUint, q: &BigUint) -> f64 {
    let shift = q.bits().max(p.bits()).saturating_sub(1000);
    let (ps, qs) = (p >> shift, q >> shift);
    match (ps.to_f64(), qs.to_f64()) {
        (Some(a), Some(b)) if b > 0.0 => a / b,
        _ => f64::NAN,
    }
}

/// `continued_fraction`: first `n` quotients of `x ∈ (0, 1)`.
///
/// The double is expanded exactly by the Euclidean algorithm on its
/// mantissa, and the expansion ends once a convergent lies within one ulp
/// of `x`: past that point the quotients describe rounding, not `x`.
pub fn continued_fraction(x: f64, n: usize) -> Result<ContinuedFraction> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!("x must lie in (0, 1), got {x}")));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one quotient".into()));
    }
    // x = m / 2^k exactly, and one ulp of x is 2^-k.
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let (mantissa, k) = if exponent == 0 {
        (bits & ((1 << 52) - 1), 1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - exponent)
    };
    let m = BigUint::from(mantissa);
    let scale = BigUint::one() << k as u64;
    let (mut num, mut den) = (m.clone(), scale.clone());
    let mut quotients: Vec<BigUint> = Vec::with_capacity(n + 1);
    let mut exact = false;
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p, mut q) = (BigUint::zero(), BigUint::one());
    // One quotient past `n` decides whether `[.., a, 1]` is really `[.., a + 1]`.
    while quotients.len() <= n && !num.is_zero() {
        let a = &den / &num;
        let rem = &den - &a * &num;
        den = std::mem::replace(&mut num, rem);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        quotients.push(a);
        // |x - p/q| <= 2^-k  ⇔  |m q - p 2^k| <= q.
        let (lhs, rhs) = (&m * &q, &p * &scale);
        let gap = if lhs > rhs { lhs - rhs } else { rhs - lhs };
        if gap <= q {
            exact = true;
            break;
        }
    }
    if exact && quotients.len() >= 2 && quotients.last().is_some_and(One::is_one) {
        quotients.pop();
        *quotients.last_mut().unwrap() += 1u32;
    }
    quotients.truncate(n);
    let mut cf = ContinuedFraction::from_quotients(quotients)?;
    cf.truncated = cf.len() < n;
    Ok(cf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConvergentLooking,
    DivergentLooking,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrjunoReport {
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
}

impl BrjunoReport {
    pub fn last_increment(&self) -> Option<f64> {
        match self.partial_sums.as_slice() {
            [] => None,
            [only] => Some(*only),
            [.., a, b] => Some(b - a),
        }
    }
}

/// `brjuno_partial`: `S_m = Σ_{k=1}^{m} ln(q_{k+1})/q_k` for `m = 1..=n`.
///
/// With fewer than `n + 1` convergents the available terms are summed and
/// the verdict is undetermined unless the sum already exceeds the divergence
/// threshold.
pub fn brjuno_partial(cf: &ContinuedFraction, n: usize) -> BrjunoReport {
    let available = cf.convergents.len().saturating_sub(1);
    let terms = n.min(available);
    let mut sums = Vec::with_capacity(terms);
    let mut total = 0.0;
    for k in 0..terms {
        let q = &cf.convergents[k].1;
        let q_next = &cf.convergents[k + 1].1;
        total += big_ln(q_next) / q.to_f64().unwrap_or(f64::INFINITY);
        sums.push(total);
    }
    let mut report = BrjunoReport {
        partial_sums: sums,
        verdict: Verdict::Undetermined,
    };
    report.verdict = if total > DIVERGENT_SUM {
        Verdict::DivergentLooking
    } else if terms == n && report.last_increment().is_some_and(|d| d < CONVERGENT_INCREMENT) {
        Verdict::ConvergentLooking
    } else {
        Verdict::Undetermined
    };
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct CremerCandidate {
    pub theta: f64,
    pub cf: ContinuedFraction,
    /// `ln(1/q_n²)`, the log of the distance bound between `theta` and the
    /// true limit. Kept in log form since it underflows as a float.
    pub log_error_bound: f64,
}

/// `⌈e^x⌉` for `x >= 0`, from a 53-bit mantissa. Exact only while the result
/// fits in 53 bits; beyond that the low bits are those of the float.
fn ceil_exp(x: f64) -> BigUint {
    let log2 = x / std::f64::consts::LN_2;
    if log2 < 52.0 {
        return BigUint::from(x.exp().ceil() as u64);
    }
    let exponent = log2.floor();
    let mantissa = (log2 - exponent).exp2();
    let scaled = (mantissa * 2f64.powi(52)).ceil() as u64;
    BigUint::from(scaled) << (exponent as u64 - 52)
}

/// `cremer_candidate_angle`: quotients `a_1 = 2`, `a_{k+1} = ⌈exp(q_k²)⌉`.
pub fn cremer_candidate_angle(depth: usize) -> Result<CremerCandidate> {
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    let mut quotients = vec![BigUint::from(2u32)];
    let mut truncated = false;
    while quotients.len() < depth {
        let cf = ContinuedFraction::from_quotients(quotients.clone())?;
        let q = &cf.convergents.last().unwrap().1;
        let qf = q.to_f64().unwrap_or(f64::INFINITY);
        let bits = qf * qf / std::f64::consts::LN_2;
        if !(bits <= MAX_QUOTIENT_BITS) {
            truncated = true;
            break;
        }
        quotients.push(ceil_exp(qf * qf));
    }
    let mut cf = ContinuedFraction::from_quotients(quotients)?;
    cf.truncated = truncated;
    let q = &cf.convergents.last().unwrap().1;
    Ok(CremerCandidate {
        theta: cf.value(),
        log_error_bound: -2.0 * big_ln(q),
        cf,
    })
}

/// Wire format of a continued fraction with its Brjuno sums. Quotients are
/// decimal strings since they can exceed any fixed-width integer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrjunoJson {
    pub partial_quotients: Vec<String>,
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
}

impl BrjunoJson {
    pub fn new(cf: &ContinuedFraction, report: &BrjunoReport) -> Self {
        Self {
            partial_quotients: cf.partial_quotients.iter().map(|a| a.to_string()).collect(),
            partial_sums: report.partial_sums.clone(),
            verdict: report.verdict,
        }
    }
}
