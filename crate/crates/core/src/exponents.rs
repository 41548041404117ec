//! Admissible-exponent thresholds for the weighted higher-integrability
//! results in the splitting case, the two-dimensional (p,q) case without
//! splitting, and the n-dimensional anisotropic case.
//!
//! Every bound is a strict inequality. The functions here return the
//! infimum (or supremum) of the admissible range; callers pick concrete
//! exponents strictly inside it, typically by a multiplicative safety margin.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("qmin = {qmin} must exceed 5 for the high-integrability threshold")]
    QminTooSmall { qmin: f64 },
    #[error("anisotropy too large: q = {q} must be below min(p + 1/2, 2p - 2) = {bound} for p = {p}")]
    InfeasibleAnisotropy { p: f64, q: f64, bound: f64 },
    #[error("s = {s} outside the admissible interval ({lo}, {hi})")]
    SOutOfRange { s: f64, lo: f64, hi: f64 },
    #[error("exponents (n = {n}, p = {p}, q = {q}) violate 2 <= n < p <= q, q < p + 2(p-n)/n")]
    Infeasible { n: u32, p: f64, q: f64 },
    #[error("kappa = {kappa} must exceed {kappa_min}")]
    KappaTooSmall { kappa: f64, kappa_min: f64 },
    #[error("conjugate exponent {which} infimum {value} is not below the ceiling {ceiling}")]
    CeilingViolated {
        which: &'static str,
        value: f64,
        ceiling: f64,
    },
    #[error("sbar = {sbar} must stay below {sbar_max}")]
    SbarTooLarge { sbar: f64, sbar_max: f64 },
    #[error("safety factor {0} must exceed 1")]
    InvalidSafety(f64),
}

pub type Result<T> = std::result::Result<T, ExponentError>;

/// Growth exponents of a splitting-type density `f1(z1) + f2(z2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitExponents {
    pub q1: f64,
    pub q2: f64,
    pub qmin: f64,
    pub qmax: f64,
    pub delta: f64,
}

impl SplitExponents {
    pub fn new(q1: f64, q2: f64) -> Result<Self> {
        if !(q1.is_finite() && q2.is_finite() && q1 > 2.0 && q2 > 2.0) {
            return Err(ExponentError::InvalidExponents(format!(
                "splitting exponents need q1, q2 > 2, got ({q1}, {q2})"
            )));
        }
        let qmin = q1.min(q2);
        Ok(Self {
            q1,
            q2,
            qmin,
            qmax: q1.max(q2),
            delta: qmin - 2.0,
        })
    }
}

/// Dimension and (p,q)-growth exponents of a non-splitting density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PQExponents {
    pub n: u32,
    pub p: f64,
    pub q: f64,
}

impl PQExponents {
    pub fn new(n: u32, p: f64, q: f64) -> Result<Self> {
        if n < 2 || !(p.is_finite() && q.is_finite()) || p <= 2.0 || q < p {
            return Err(ExponentError::InvalidExponents(format!(
                "(p,q) exponents need n >= 2 and 2 < p <= q, got n = {n}, p = {p}, q = {q}"
            )));
        }
        Ok(Self { n, p, q })
    }

    fn nf(&self) -> f64 {
        f64::from(self.n)
    }
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

// Shared maximum of the splitting thresholds.
fn split_max_term(se: &SplitExponents) -> f64 {
    let r = se.qmin / (se.qmin - 2.0);
    let second = 0.5 * (se.qmax / se.qmin) * (se.qmin - 1.0) / (se.qmin - 2.0);
    let third = r - 1.0 / 6.0;
    1.0f64.max(second).max(third)
}

/// Lower bound `T(q1,q2)` for the weight exponent `t` in the splitting case.
pub fn threshold_t(se: &SplitExponents) -> f64 {
    6.0 * split_max_term(se) * (se.qmin / (se.qmin - 2.0))
}

/// Improved threshold available when both exponents exceed 5.
pub fn threshold_t_high(se: &SplitExponents) -> Result<f64> {
    if se.qmin <= 5.0 {
        return Err(ExponentError::QminTooSmall { qmin: se.qmin });
    }
    let m = (1.0 / (2.0 * se.qmin - 4.0)).max(1.0 / (se.qmax + 2.0));
    Ok(6.0 * se.qmax * m)
}

/// Strict lower bound for kappa collected from all conditions of the
/// splitting argument; exactly half of [`threshold_t`].
pub fn kappa_conditions_split(se: &SplitExponents) -> f64 {
    3.0 * split_max_term(se) * (se.qmin / (se.qmin - 2.0))
}

pub fn kappa_hat(se: &SplitExponents) -> f64 {
    (se.qmin - 1.0) / (se.qmin - 2.0)
}

fn require_plane(pq: &PQExponents) -> Result<()> {
    if pq.n != 2 {
        return Err(ExponentError::InvalidExponents(format!(
            "the non-splitting 2D result needs n = 2, got n = {}",
            pq.n
        )));
    }
    Ok(())
}

/// Admissible interval for `s` in the 2D non-splitting case.
pub fn s_range_nosplit(pq: &PQExponents) -> Result<OpenInterval> {
    require_plane(pq)?;
    let bound = (pq.p + 0.5).min(2.0 * pq.p - 2.0);
    if !(pq.q < bound) {
        return Err(ExponentError::InfeasibleAnisotropy {
            p: pq.p,
            q: pq.q,
            bound,
        });
    }
    Ok(OpenInterval {
        lo: pq.q / 2.0 + 0.75,
        hi: pq.p - 0.25,
    })
}

/// Infimum of admissible kappa in the 2D non-splitting case for a given `s`.
pub fn kappa_min_nosplit(pq: &PQExponents, s: f64) -> Result<f64> {
    let range = s_range_nosplit(pq)?;
    if !range.contains(s) {
        return Err(ExponentError::SOutOfRange {
            s,
            lo: range.lo,
            hi: range.hi,
        });
    }
    let p = pq.p;
    let a = p / (p - 2.0);
    let b = s / (s - range.lo);
    let c = 2.0 * s * (p - 1.0) / ((p - 2.0) * (p - 2.0));
    Ok(a.max(b).max(c))
}

pub fn aniso_feasible(pq: &PQExponents) -> bool {
    let n = pq.nf();
    pq.n >= 2 && n < pq.p && pq.p <= pq.q && pq.q < pq.p + 2.0 * (pq.p - n) / n
}

/// Infimum of kappa satisfying `q < p + 2(p-n)/n - (2p-1)/(n kappa)`.
pub fn kappa_min_aniso(pq: &PQExponents) -> Result<f64> {
    if !aniso_feasible(pq) {
        return Err(ExponentError::Infeasible {
            n: pq.n,
            p: pq.p,
            q: pq.q,
        });
    }
    let n = pq.nf();
    let (p, q) = (pq.p, pq.q);
    Ok((2.0 * p - 1.0) / (n * (p - q) + 2.0 * (p - n)))
}

/// Left-hand side slack of the kappa condition; positive iff it holds.
pub fn aniso_kappa_slack(pq: &PQExponents, kappa: f64) -> f64 {
    let n = pq.nf();
    pq.p + 2.0 * (pq.p - n) / n - (2.0 * pq.p - 1.0) / (n * kappa) - pq.q
}

fn require_kappa_aniso(pq: &PQExponents, kappa: f64) -> Result<()> {
    let kappa_min = kappa_min_aniso(pq)?;
    if !(kappa > kappa_min) {
        return Err(ExponentError::KappaTooSmall { kappa, kappa_min });
    }
    Ok(())
}

/// Unclamped supremum of admissible `sbar` for a given kappa.
fn sbar_sup(pq: &PQExponents, kappa: f64) -> f64 {
    let n = pq.nf();
    let p = pq.p;
    let first = p * (kappa * (n + 2.0) - 2.0) / (2.0 * n * kappa) - (kappa - 1.0) / (2.0 * n * kappa);
    let second = (kappa - 1.0) * (p - n) / n + p / 2.0;
    first.min(second)
}

/// Supremum of admissible `sbar` in the anisotropic case.
pub fn sbar_max(pq: &PQExponents, kappa: f64) -> Result<f64> {
    require_kappa_aniso(pq, kappa)?;
    Ok(sbar_sup(pq, kappa))
}

/// The limiting sbar bound as kappa grows without bound.
pub fn sbar_limit(pq: &PQExponents) -> f64 {
    let n = pq.nf();
    pq.p / 2.0 + (2.0 * pq.p - 1.0) / (2.0 * n)
}

/// Conjugate-exponent infima together with their common ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaStars {
    pub beta1_star_min: f64,
    pub beta2_star_min: f64,
    pub ceiling: f64,
    /// Auxiliary exponent `s` related to `sbar` and kappa.
    pub s: f64,
}

pub fn beta_ceiling(pq: &PQExponents, kappa: f64) -> f64 {
    let n = pq.nf();
    (kappa - 1.0) * (pq.p - n) / n + pq.p / (2.0 * n)
}

pub fn beta_stars(pq: &PQExponents, kappa: f64, sbar: f64) -> Result<BetaStars> {
    let sbar_max = sbar_max(pq, kappa)?;
    if !(sbar < sbar_max) {
        return Err(ExponentError::SbarTooLarge { sbar, sbar_max });
    }
    let n = pq.nf();
    let (p, q) = (pq.p, pq.q);
    let s = sbar * kappa / (kappa - 1.0) - p / (2.0 * (kappa - 1.0));
    let denom = kappa * (2.0 * p - (q - p) * n) - 2.0 * p + 1.0;
    let beta1 = (kappa * (p * (n + 2.0) - 1.0) - 2.0 * p + 1.0) / denom;
    let beta2 = (kappa * (p * n + 4.0 * p - 1.0 - 2.0 * s * n) - 2.0 * p + 1.0) / denom;
    let ceiling = beta_ceiling(pq, kappa);
    for (which, value) in [("beta1*", beta1), ("beta2*", beta2)] {
        if !(value < ceiling) {
            return Err(ExponentError::CeilingViolated {
                which,
                value,
                ceiling,
            });
        }
    }
    Ok(BetaStars {
        beta1_star_min: beta1,
        beta2_star_min: beta2,
        ceiling,
        s,
    })
}

/// Power `zeta` on the distance weight and improved Hölder exponent `mu`.
pub fn hoelder_params(qmin: f64, kappa: f64) -> (f64, f64) {
    let zeta = 4.0 / 3.0 * kappa / qmin + 1.0;
    let mu = 1.0 - 4.0 / (3.0 * qmin);
    (zeta, mu)
}

/// All thresholds and concrete exponents for one problem instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentBundle {
    pub theorem: &'static str,
    pub safety_factor: f64,
    #[serde(rename = "T")]
    pub threshold_t: Option<f64>,
    #[serde(rename = "T_high")]
    pub threshold_t_high: Option<f64>,
    pub kappa_hat: Option<f64>,
    pub kappa_min: f64,
    pub s_range: Option<OpenInterval>,
    pub sbar_max: Option<f64>,
    pub beta1_star_min: Option<f64>,
    pub beta2_star_min: Option<f64>,
    pub beta_ceiling: Option<f64>,
    pub zeta: Option<f64>,
    pub mu: Option<f64>,
    pub delta: f64,
    /// Concrete exponents derived with the safety factor.
    pub t: Option<f64>,
    pub kappa: f64,
    pub s: Option<f64>,
    pub sbar: Option<f64>,
}

fn check_safety(safety: f64) -> Result<()> {
    if !(safety > 1.0 && safety.is_finite()) {
        return Err(ExponentError::InvalidSafety(safety));
    }
    Ok(())
}

impl ExponentBundle {
    pub fn splitting(se: &SplitExponents, safety: f64) -> Result<Self> {
        check_safety(safety)?;
        let t_bound = threshold_t(se);
        let kappa_min = kappa_conditions_split(se);
        let kappa = safety * kappa_min;
        let (zeta, mu) = hoelder_params(se.qmin, kappa);
        Ok(Self {
            theorem: "splitting",
            safety_factor: safety,
            threshold_t: Some(t_bound),
            threshold_t_high: threshold_t_high(se).ok(),
            kappa_hat: Some(kappa_hat(se)),
            kappa_min,
            s_range: None,
            sbar_max: None,
            beta1_star_min: None,
            beta2_star_min: None,
            beta_ceiling: None,
            zeta: Some(zeta),
            mu: Some(mu),
            delta: se.delta,
            t: Some(safety * t_bound),
            kappa,
            s: None,
            sbar: None,
        })
    }

    /// `s` defaults to the midpoint of the admissible interval.
    pub fn nosplit(pq: &PQExponents, s: Option<f64>, safety: f64) -> Result<Self> {
        check_safety(safety)?;
        let range = s_range_nosplit(pq)?;
        let s = s.unwrap_or_else(|| range.midpoint());
        let kappa_min = kappa_min_nosplit(pq, s)?;
        Ok(Self {
            theorem: "nosplit2d",
            safety_factor: safety,
            threshold_t: None,
            threshold_t_high: None,
            kappa_hat: None,
            kappa_min,
            s_range: Some(range),
            sbar_max: None,
            beta1_star_min: None,
            beta2_star_min: None,
            beta_ceiling: None,
            zeta: None,
            mu: None,
            delta: pq.p - 2.0,
            t: None,
            kappa: safety * kappa_min,
            s: Some(s),
            sbar: None,
        })
    }

    /// Kappa starts at `safety * kappa_min` and is multiplied by `safety`
    /// until the conjugate-exponent ceiling holds; `sbar` defaults to
    /// `sbar_max / safety`.
    pub fn aniso(
        pq: &PQExponents,
        kappa: Option<f64>,
        sbar: Option<f64>,
        safety: f64,
    ) -> Result<Self> {
        check_safety(safety)?;
        let kappa_min = kappa_min_aniso(pq)?;
        let pick = |kappa: f64| -> Result<(f64, BetaStars)> {
            let smax = sbar_max(pq, kappa)?;
            let sbar = sbar.unwrap_or(smax / safety);
            Ok((sbar, beta_stars(pq, kappa, sbar)?))
        };
        let (kappa, sbar, betas) = match kappa {
            Some(k) => {
                let (sbar, betas) = pick(k)?;
                (k, sbar, betas)
            }
            None => {
                let mut k = safety * kappa_min;
                let mut attempt = pick(k);
                for _ in 0..400 {
                    match attempt {
                        Err(ExponentError::CeilingViolated { .. }) => {
                            k *= safety;
                            attempt = pick(k);
                        }
                        _ => break,
                    }
                }
                let (sbar, betas) = attempt?;
                (k, sbar, betas)
            }
        };
        Ok(Self {
            theorem: "aniso",
            safety_factor: safety,
            threshold_t: None,
            threshold_t_high: None,
            kappa_hat: None,
            kappa_min,
            s_range: None,
            sbar_max: Some(sbar_sup(pq, kappa)),
            beta1_star_min: Some(betas.beta1_star_min),
            beta2_star_min: Some(betas.beta2_star_min),
            beta_ceiling: Some(betas.ceiling),
            zeta: None,
            mu: None,
            delta: pq.p - 2.0,
            t: None,
            kappa,
            s: Some(betas.s),
            sbar: Some(sbar),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn se(q1: f64, q2: f64) -> SplitExponents {
        SplitExponents::new(q1, q2).unwrap()
    }

    fn pq(n: u32, p: f64, q: f64) -> PQExponents {
        PQExponents::new(n, p, q).unwrap()
    }

    #[test]
    fn threshold_t_hand_values() {
        assert_abs_diff_eq!(threshold_t(&se(4.0, 4.0)), 22.0, epsilon = 1e-12);
        assert_abs_diff_eq!(threshold_t(&se(3.0, 6.0)), 51.0, epsilon = 1e-12);
        assert_abs_diff_eq!(threshold_t(&se(6.0, 3.0)), 51.0, epsilon = 1e-12);
        assert_abs_diff_eq!(threshold_t(&se(1e6, 1e6)), 6.0, epsilon = 1e-3);
    }

    #[test]
    fn threshold_t_high_values() {
        assert_abs_diff_eq!(threshold_t_high(&se(6.0, 6.0)).unwrap(), 4.5, epsilon = 1e-12);
        assert_abs_diff_eq!(threshold_t_high(&se(6.0, 10.0)).unwrap(), 7.5, epsilon = 1e-12);
        assert!(matches!(
            threshold_t_high(&se(4.0, 6.0)),
            Err(ExponentError::QminTooSmall { .. })
        ));
    }

    #[test]
    fn kappa_split_values() {
        assert_abs_diff_eq!(kappa_conditions_split(&se(4.0, 4.0)), 11.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kappa_conditions_split(&se(3.0, 6.0)), 25.5, epsilon = 1e-12);
        assert_abs_diff_eq!(kappa_hat(&se(4.0, 7.0)), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(kappa_hat(&se(3.0, 3.0)), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(kappa_hat(&se(1e9, 1e9)), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn invalid_split_exponents() {
        assert!(SplitExponents::new(2.0, 3.0).is_err());
        assert!(SplitExponents::new(f64::NAN, 3.0).is_err());
    }

    #[test]
    fn nosplit_range_and_kappa() {
        let r = s_range_nosplit(&pq(2, 3.0, 3.4)).unwrap();
        assert_abs_diff_eq!(r.lo, 2.45, epsilon = 1e-12);
        assert_abs_diff_eq!(r.hi, 2.75, epsilon = 1e-12);
        let r = s_range_nosplit(&pq(2, 2.4, 2.4)).unwrap();
        assert_abs_diff_eq!(r.lo, 1.95, epsilon = 1e-12);
        assert_abs_diff_eq!(r.hi, 2.15, epsilon = 1e-12);
        assert!(matches!(
            s_range_nosplit(&pq(2, 3.0, 4.1)),
            Err(ExponentError::InfeasibleAnisotropy { .. })
        ));
        assert!(s_range_nosplit(&pq(3, 3.0, 3.1)).is_err());

        let p = pq(2, 3.0, 3.4);
        assert_abs_diff_eq!(kappa_min_nosplit(&p, 2.6).unwrap(), 52.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kappa_min_nosplit(&p, 2.7).unwrap(), 10.8, epsilon = 1e-12);
        assert!(matches!(
            kappa_min_nosplit(&p, 2.4),
            Err(ExponentError::SOutOfRange { .. })
        ));
        assert!(kappa_min_nosplit(&p, 2.45).is_err());
    }

    #[test]
    fn aniso_feasibility() {
        assert!(aniso_feasible(&pq(2, 3.0, 3.5)));
        assert!(!aniso_feasible(&pq(2, 3.0, 4.0)));
        assert!(aniso_feasible(&pq(3, 3.5, 3.6)));
        assert!(!aniso_feasible(&pq(3, 3.0, 3.0)));
    }

    #[test]
    fn aniso_kappa_and_sbar() {
        assert_abs_diff_eq!(kappa_min_aniso(&pq(2, 3.0, 3.5)).unwrap(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kappa_min_aniso(&pq(2, 3.0, 3.0)).unwrap(), 2.5, epsilon = 1e-12);
        assert!(matches!(
            kappa_min_aniso(&pq(2, 3.0, 4.0)),
            Err(ExponentError::Infeasible { .. })
        ));

        assert_abs_diff_eq!(sbar_max(&pq(2, 3.0, 3.5), 10.0).unwrap(), 2.625, epsilon = 1e-12);
        // first branch active: 28/12 < 5/2
        assert_abs_diff_eq!(sbar_max(&pq(2, 3.0, 3.0), 3.0).unwrap(), 7.0 / 3.0, epsilon = 1e-12);
        assert!(matches!(
            sbar_max(&pq(2, 3.0, 3.5), 3.0),
            Err(ExponentError::KappaTooSmall { .. })
        ));
        let p = pq(2, 3.0, 3.5);
        assert_abs_diff_eq!(sbar_max(&p, 1e8).unwrap(), sbar_limit(&p), epsilon = 1e-6);
        assert_abs_diff_eq!(sbar_limit(&p), 2.75, epsilon = 1e-15);
    }

    #[test]
    fn beta_star_values() {
        let p = pq(2, 3.0, 3.5);
        let b = beta_stars(&p, 10.0, 2.5).unwrap();
        assert_abs_diff_eq!(b.beta1_star_min, 7.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.s, 47.0 / 18.0, epsilon = 1e-12);
        let expected2 = (10.0 * (17.0 - 4.0 * 47.0 / 18.0) - 5.0) / 45.0;
        assert_abs_diff_eq!(b.beta2_star_min, expected2, epsilon = 1e-12);
        assert_abs_diff_eq!(b.beta2_star_min, 1.3457, epsilon = 1e-4);
        assert_abs_diff_eq!(b.ceiling, 5.25, epsilon = 1e-12);
        assert!(matches!(
            beta_stars(&p, 10.0, 2.7),
            Err(ExponentError::SbarTooLarge { .. })
        ));
    }

    #[test]
    fn ceiling_can_fail_near_kappa_min() {
        // p close to n makes the ceiling small for moderate kappa
        let p = pq(2, 2.2, 2.2);
        let kmin = kappa_min_aniso(&p).unwrap();
        let k = kmin * 1.01;
        let smax = sbar_max(&p, k).unwrap();
        assert!(matches!(
            beta_stars(&p, k, smax * 0.99),
            Err(ExponentError::CeilingViolated { .. })
        ));
        // the bundle walks kappa upwards until the ceiling holds
        let bundle = ExponentBundle::aniso(&p, None, None, 1.05).unwrap();
        assert!(bundle.beta1_star_min.unwrap() < bundle.beta_ceiling.unwrap());
        assert!(bundle.kappa > k);
    }

    #[test]
    fn hoelder_param_values() {
        let (zeta, mu) = hoelder_params(4.0, 11.0);
        assert_abs_diff_eq!(zeta, 14.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mu, 2.0 / 3.0, epsilon = 1e-12);
        let (zeta, mu) = hoelder_params(3.0, 25.5);
        assert_abs_diff_eq!(zeta, 37.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mu, 5.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn bundles() {
        let b = ExponentBundle::splitting(&se(4.0, 4.0), 1.05).unwrap();
        assert_eq!(b.threshold_t, Some(22.0));
        assert_eq!(b.kappa_hat, Some(1.5));
        assert!(b.zeta.unwrap() > 1.0);
        let m = b.mu.unwrap();
        assert!(m > 0.0 && m < 1.0);

        let b = ExponentBundle::aniso(&pq(2, 3.0, 3.5), None, None, 1.05).unwrap();
        assert_abs_diff_eq!(b.kappa_min, 5.0, epsilon = 1e-12);
        assert!(b.sbar.unwrap() < b.sbar_max.unwrap());

        assert!(ExponentBundle::nosplit(&pq(2, 3.0, 4.1), None, 1.05).is_err());
        assert!(ExponentBundle::splitting(&se(4.0, 4.0), 1.0).is_err());
    }
}
