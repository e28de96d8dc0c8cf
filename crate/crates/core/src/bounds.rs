//! Closed-form quantities and bound evaluators, as pure numeric functions.
//!
//! Every unspecified constant (regime constants, tail rates, window edges) is
//! a caller input: these functions evaluate the displayed expressions and
//! report margins, they never assert inequalities whose constants are not
//! pinned. All evaluators are generic over the scalar type via [`Real`] and
//! use log-domain arithmetic where overflow is a concern. Range violations
//! produce structured errors, never silent clamping.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Caller-supplied analysis parameters. The constants have no canonical
/// values; [`BoundParams::preset`] provides documented defaults used by the
/// CLI presets only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams<T> {
    /// Sandwich width, in (0, 1).
    pub delta: T,
    /// Target accuracy, in (0, 1).
    pub epsilon: T,
    /// Block-scale exponent, 1/2 < alpha < beta.
    pub alpha: T,
    /// Sparsity exponent, alpha < beta < 3/4.
    pub beta: T,
    /// Density-regime constant: `rs >= regime_c * k` gates the sandwich.
    pub regime_c: T,
    /// Gate constant for the block-composition expectation floor.
    pub gate_c: T,
    /// Type-count constant in the closed form `c1 * (n/ell) * ln(ell)`.
    pub type_count_c1: T,
    /// Exponential tail rate.
    pub tail_rate_c: T,
    /// Lower window edge for the LIS tail forms.
    pub lis_b0: T,
    /// Prefactor for the LIS tail forms.
    pub lis_b1: T,
}

impl<T: Real> BoundParams<T> {
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        let half = T::from_f64(0.5).unwrap();
        let three_quarters = T::from_f64(0.75).unwrap();
        if !(self.delta > zero && self.delta < one) {
            return Err(Error::param("delta", "must lie in (0, 1)"));
        }
        if !(self.epsilon > zero && self.epsilon < one) {
            return Err(Error::param("epsilon", "must lie in (0, 1)"));
        }
        if !(self.alpha > half && self.alpha < self.beta && self.beta < three_quarters) {
            return Err(Error::param("alpha/beta", "require 1/2 < alpha < beta < 3/4"));
        }
        for (name, v) in [
            ("regime_c", self.regime_c),
            ("gate_c", self.gate_c),
            ("type_count_c1", self.type_count_c1),
            ("tail_rate_c", self.tail_rate_c),
            ("lis_b0", self.lis_b0),
            ("lis_b1", self.lis_b1),
        ] {
            if !(v > zero) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        Ok(())
    }
}

impl BoundParams<f64> {
    /// Defaults for CLI presets. These are working values, not asserted truths.
    pub fn preset() -> Self {
        BoundParams {
            delta: 0.5,
            epsilon: 0.1,
            alpha: 0.6,
            beta: 0.7,
            regime_c: 25.0,
            gate_c: 40.0,
            type_count_c1: 5.0,
            tail_rate_c: 0.1,
            lis_b0: 1.0,
            lis_b1: 1.0,
        }
    }
}

/// A value together with a window flag; out-of-window arguments are reported,
/// not rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flagged<T> {
    pub value: T,
    pub in_window: bool,
}

fn check_positive_sizes(r: u64, s: u64, k: u64) -> Result<()> {
    if r == 0 || s == 0 || k == 0 {
        return Err(Error::param("r/s/k", "r, s, k must all be at least 1"));
    }
    Ok(())
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if !(delta >= T::zero() && delta < T::one()) {
        return Err(Error::param("delta", "must lie in [0, 1)"));
    }
    Ok(())
}

fn rs_over_k<T: Real>(r: u64, s: u64, k: u64) -> T {
    T::from_count(r) * T::from_count(s) / T::from_count(k)
}

/// Upper centering `2 (1 + delta) sqrt(rs / k)`.
pub fn m_upper<T: Real>(r: u64, s: u64, k: u64, delta: T) -> Result<T> {
    check_positive_sizes(r, s, k)?;
    check_delta(delta)?;
    let two = T::from_f64(2.0).unwrap();
    Ok(two * (T::one() + delta) * rs_over_k::<T>(r, s, k).sqrt())
}

/// Lower centering `2 (1 - delta) sqrt(rs / k)`.
pub fn m_lower<T: Real>(r: u64, s: u64, k: u64, delta: T) -> Result<T> {
    check_positive_sizes(r, s, k)?;
    check_delta(delta)?;
    let two = T::from_f64(2.0).unwrap();
    Ok(two * (T::one() - delta) * rs_over_k::<T>(r, s, k).sqrt())
}

/// Which side of the sandwich a regime check gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeSide {
    Upper,
    Lower,
}

/// Outcome of a regime check, including which condition failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegimeCheck {
    pub holds: bool,
    /// `rs >= regime_c * k`.
    pub density_ok: bool,
    /// Upper side: `(r + s) sqrt(rs) <= delta k^{3/2} / 6`;
    /// lower side: `r + s <= delta k / 6`.
    pub spread_ok: bool,
    pub failed: Vec<&'static str>,
}

/// Check the preconditions of the sandwich tail bounds.
pub fn sandwich_regime_check<T: Real>(
    r: u64,
    s: u64,
    k: u64,
    delta: T,
    regime_c: T,
    side: RegimeSide,
) -> Result<RegimeCheck> {
    check_positive_sizes(r, s, k)?;
    check_delta(delta)?;
    if !(regime_c > T::zero()) {
        return Err(Error::param("regime_c", "must be positive"));
    }
    let rf = T::from_count(r);
    let sf = T::from_count(s);
    let kf = T::from_count(k);
    let six = T::from_f64(6.0).unwrap();
    let density_ok = rf * sf >= regime_c * kf;
    let spread_ok = match side {
        RegimeSide::Upper => (rf + sf) * (rf * sf).sqrt() <= delta * kf.powf(T::from_f64(1.5).unwrap()) / six,
        RegimeSide::Lower => rf + sf <= delta * kf / six,
    };
    let mut failed = Vec::new();
    if !density_ok {
        failed.push("density: rs >= regime_c * k");
    }
    if !spread_ok {
        failed.push(match side {
            RegimeSide::Upper => "spread: (r + s) sqrt(rs) <= delta k^(3/2) / 6",
            RegimeSide::Lower => "spread: r + s <= delta k / 6",
        });
    }
    Ok(RegimeCheck {
        holds: density_ok && spread_ok,
        density_ok,
        spread_ok,
        failed,
    })
}

/// Upper tail form `2 exp(-t^2 / (8 (m_u + t)))`. Callers are responsible
/// for the regime check.
pub fn sandwich_tail_upper<T: Real>(r: u64, s: u64, k: u64, delta: T, t: T) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::param("t", "must be nonnegative"));
    }
    let mu = m_upper(r, s, k, delta)?;
    let eight = T::from_f64(8.0).unwrap();
    let two = T::from_f64(2.0).unwrap();
    Ok(two * (-(t * t) / (eight * (mu + t))).exp())
}

/// Lower tail form `2 exp(-t^2 / (8 m_u))`. The denominator uses the upper
/// centering `m_u`, as displayed.
pub fn sandwich_tail_lower<T: Real>(r: u64, s: u64, k: u64, delta: T, t: T) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::param("t", "must be nonnegative"));
    }
    let mu = m_upper(r, s, k, delta)?;
    let eight = T::from_f64(8.0).unwrap();
    let two = T::from_f64(2.0).unwrap();
    Ok(two * (-(t * t) / (eight * mu)).exp())
}

/// Upper LIS tail form `b1 exp(-c lambda^(3/5) n^(1/5))` with window
/// `b0 / n^(1/3) <= lambda <= sqrt(n) - 2`. Out-of-window lambdas are
/// flagged; the value is still returned.
pub fn lis_tail_upper<T: Real>(n: u64, lambda: T, b0: T, b1: T, c: T) -> Result<Flagged<T>> {
    lis_tail(n, lambda, b0, b1, c, true)
}

/// Lower LIS tail form `b1 exp(-c lambda^3 n)` with window
/// `b0 / n^(1/3) <= lambda <= 2`.
pub fn lis_tail_lower<T: Real>(n: u64, lambda: T, b0: T, b1: T, c: T) -> Result<Flagged<T>> {
    lis_tail(n, lambda, b0, b1, c, false)
}

fn lis_tail<T: Real>(n: u64, lambda: T, b0: T, b1: T, c: T, upper: bool) -> Result<Flagged<T>> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    for (name, v) in [("b0", b0), ("b1", b1), ("c", c)] {
        if !(v > T::zero()) {
            return Err(Error::param(name, "must be positive"));
        }
    }
    if !(lambda > T::zero()) {
        return Err(Error::param("lambda", "must be positive"));
    }
    let nf = T::from_count(n);
    let third = T::from_f64(1.0 / 3.0).unwrap();
    let lo = b0 / nf.powf(third);
    let hi = if upper {
        nf.sqrt() - T::from_f64(2.0).unwrap()
    } else {
        T::from_f64(2.0).unwrap()
    };
    let in_window = lambda >= lo && lambda <= hi;
    let exponent = if upper {
        c * lambda.powf(T::from_f64(0.6).unwrap()) * nf.powf(T::from_f64(0.2).unwrap())
    } else {
        c * lambda * lambda * lambda * nf
    };
    Ok(Flagged {
        value: b1 * (-exponent).exp(),
        in_window,
    })
}

/// The indicator-sum deviation bound `(ex (1 - ex) + pair_sum) / t^2`, where
/// `pair_sum` is the sum of `E[X_i X_j]` over ordered pairs `i != j`. The
/// expression is evaluated verbatim; `ex` may exceed 1.
pub fn chebyshev_indicator_bound<T: Real>(ex: T, pair_sum: T, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::param("t", "must be positive"));
    }
    if !(ex >= T::zero()) {
        return Err(Error::param("ex", "must be nonnegative"));
    }
    if !(pair_sum >= T::zero()) {
        return Err(Error::param("pair_sum", "must be nonnegative"));
    }
    Ok((ex * (T::one() - ex) + pair_sum) / (t * t))
}

/// Exact-vs-closed-form comparison for the type-count bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeCountBound<T> {
    /// `5 * ln C(n, q)` maximized over `q <= q_max`, by exact log-binomials.
    pub log_count: T,
    /// The maximizing `q`.
    pub arg_max_q: u64,
    /// `c1 * (n / ell) * ln(ell)`.
    pub closed_form: T,
    /// Whether the exact value is dominated by the closed form for this `c1`.
    pub within_closed_form: bool,
}

/// Log-domain count of block-partition types: `5 max_{q <= q_max} ln C(n, q)`
/// compared against the closed form `c1 (n / ell) ln(ell)`.
pub fn type_count_log_bound<T: Real>(n: u64, ell: u64, q_max: u64, c1: T) -> Result<TypeCountBound<T>> {
    if n == 0 || ell == 0 {
        return Err(Error::param("n/ell", "must be at least 1"));
    }
    if q_max == 0 || q_max > n {
        return Err(Error::param("q_max", "require 1 <= q_max <= n"));
    }
    if !(c1 > T::zero()) {
        return Err(Error::param("c1", "must be positive"));
    }
    // ln C(n, q) accumulated incrementally; it increases up to q = n/2.
    let nf = T::from_count(n);
    let mut log_binom = T::zero();
    let mut best = T::neg_infinity();
    let mut best_q = 0u64;
    for q in 1..=q_max {
        log_binom = log_binom + (nf - T::from_count(q) + T::one()).ln() - T::from_count(q).ln();
        if log_binom > best {
            best = log_binom;
            best_q = q;
        }
    }
    let five = T::from_f64(5.0).unwrap();
    let log_count = five * best;
    let closed_form = c1 * (nf / T::from_count(ell)) * T::from_count(ell).ln();
    Ok(TypeCountBound {
        log_count,
        arg_max_q: best_q,
        closed_form,
        within_closed_form: log_count <= closed_form,
    })
}

/// The derived block-construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockParameters<T> {
    /// Block node-spread cap, `floor(k^alpha)`.
    pub ell: u64,
    /// Per-block edge cap, `floor((1/delta) (ell/n) m_max)`.
    pub e_max: u64,
    /// Matching-size ceiling, `(1 + epsilon) * 2n / sqrt(k)`.
    pub m_max: T,
}

/// Compute `(ell, e_max, m_max)` from `(n, k, delta, epsilon, alpha)`.
pub fn block_parameters<T: Real>(n: u64, k: u64, delta: T, epsilon: T, alpha: T) -> Result<BlockParameters<T>> {
    if n == 0 || k == 0 {
        return Err(Error::param("n/k", "must be at least 1"));
    }
    let zero = T::zero();
    let one = T::one();
    if !(delta > zero && delta < one) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if !(epsilon > zero && epsilon < one) {
        return Err(Error::param("epsilon", "must lie in (0, 1)"));
    }
    let half = T::from_f64(0.5).unwrap();
    let three_quarters = T::from_f64(0.75).unwrap();
    if !(alpha > half && alpha < three_quarters) {
        return Err(Error::param("alpha", "must lie in (1/2, 3/4)"));
    }
    let nf = T::from_count(n);
    let kf = T::from_count(k);
    let two = T::from_f64(2.0).unwrap();
    let ell_f = kf.powf(alpha).floor();
    let ell = ell_f.to_u64().unwrap_or(1).max(1);
    let m_max = (one + epsilon) * two * nf / kf.sqrt();
    let e_max_f = ((one / delta) * (T::from_count(ell) / nf) * m_max).floor();
    let e_max = e_max_f.to_u64().unwrap_or(0);
    Ok(BlockParameters { ell, e_max, m_max })
}

/// Parameters for composing many small diagonal blocks into an
/// expectation floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositionParameters<T> {
    /// Sub-block side, `floor(delta k / 12)`.
    pub n_tilde: u64,
    /// The accuracy implied by `(1 - 2 delta)^2 = 1 - epsilon`.
    pub epsilon: T,
    /// `(1 - epsilon) * 2 n_tilde / sqrt(k)`.
    pub expectation_floor: T,
    /// Whether `exp(-delta^2 gate_c / (4 (1 + delta))) <= delta`.
    pub gate_holds: bool,
}

/// Compute the sub-block side, implied accuracy, expectation floor, and the
/// gate condition for a caller-supplied gate constant.
pub fn composition_parameters<T: Real>(k: u64, delta: T, gate_c: T) -> Result<CompositionParameters<T>> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if !(gate_c > T::zero()) {
        return Err(Error::param("gate_c", "must be positive"));
    }
    let kf = T::from_count(k);
    let twelve = T::from_f64(12.0).unwrap();
    let two = T::from_f64(2.0).unwrap();
    let four = T::from_f64(4.0).unwrap();
    let one = T::one();
    let n_tilde = (delta * kf / twelve).floor().to_u64().unwrap_or(0);
    let epsilon = one - (one - two * delta) * (one - two * delta);
    let expectation_floor = (one - epsilon) * two * T::from_count(n_tilde) / kf.sqrt();
    let gate_holds = (-(delta * delta * gate_c) / (four * (one + delta))).exp() <= delta;
    Ok(CompositionParameters {
        n_tilde,
        epsilon,
        expectation_floor,
        gate_holds,
    })
}

/// Which concentration form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailModel {
    /// Scale parameter is the alphabet size k: `exp(-c n / sqrt(k))`.
    Words,
    /// Scale parameter is the edge probability p: `exp(-c n sqrt(p))`.
    Binomial,
}

/// Evaluate the exponential tail form for the given model. `epsilon` is the
/// accuracy the rate `c` is paired with; it does not enter the value.
pub fn concentration_tail_form<T: Real>(
    n: u64,
    scale: T,
    epsilon: T,
    c: T,
    model: TailModel,
) -> Result<T> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::param("epsilon", "must be positive"));
    }
    if !(c >= T::zero()) {
        return Err(Error::param("c", "must be nonnegative"));
    }
    let nf = T::from_count(n);
    match model {
        TailModel::Words => {
            if !(scale >= T::one()) {
                return Err(Error::param("scale", "alphabet size must be at least 1"));
            }
            Ok((-c * nf / scale.sqrt()).exp())
        }
        TailModel::Binomial => {
            if !(scale > T::zero() && scale < T::one()) {
                return Err(Error::param("scale", "edge probability must lie in (0, 1)"));
            }
            Ok((-c * nf * scale.sqrt()).exp())
        }
    }
}

/// The weighted-matching growth limit `(1 + sqrt(1 - p))^2 / p`.
pub fn johansson_limit<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::param("p", "must lie in (0, 1)"));
    }
    let one = T::one();
    let base = one + (one - p).sqrt();
    Ok(base * base / p)
}

/// The weak-column height growth limit `2 sqrt(p (1 - p))`, flagged when
/// `p >= 1/2` (the limit identity is only claimed below 1/2).
pub fn odb_limit<T: Real>(p: T) -> Result<Flagged<T>> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::param("p", "must lie in (0, 1)"));
    }
    let two = T::from_f64(2.0).unwrap();
    Ok(Flagged {
        value: two * (p * (T::one() - p)).sqrt(),
        in_window: p < T::from_f64(0.5).unwrap(),
    })
}
