//! Model energy densities with closed-form derivatives, their certified
//! ellipticity constants, and the boundary data of the Dirichlet problem.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{DomainMesh, ScalarField};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid boundary datum: {0}")]
    InvalidDatum(String),
    #[error("ellipticity violated at Z = {z:?}, Y = {y:?}: {detail}")]
    EllipticityViolation { z: Vec2, y: Vec2, detail: String },
    #[error("{which} mismatch at Z = {z:?}: relative error {error:e} exceeds {tol:e}")]
    DerivativeMismatch {
        which: &'static str,
        z: Vec2,
        error: f64,
        tol: f64,
    },
}

/// A C^2 integrand `f: R^2 -> R`.
pub trait Density: Sync {
    fn eval(&self, z: Vec2) -> f64;
    fn grad(&self, z: Vec2) -> Vec2;
    fn hess(&self, z: Vec2) -> Mat2;

    /// `D^2 f(z)(a, b)`.
    fn hess_form(&self, z: Vec2, a: Vec2, b: Vec2) -> f64 {
        let h = self.hess(z);
        a[0] * (h[0][0] * b[0] + h[0][1] * b[1]) + a[1] * (h[1][0] * b[0] + h[1][1] * b[1])
    }
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergyDensity {
    /// `(1 + z1^2)^{q1/2} + (1 + z2^2)^{q2/2}`
    Splitting { q1: f64, q2: f64 },
    /// `(1 + |Z|^2)^{p/2} + lambda (1 + z1^2)^{q/2}`
    #[serde(rename = "pq_growth")]
    PQGrowth {
        p: f64,
        q: f64,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
}

// (1 + t^2)^{q/2} and its first two derivatives.
fn power_factor(q: f64, t: f64) -> (f64, f64, f64) {
    let r = 1.0 + t * t;
    let g = r.powf(0.5 * q);
    let g1 = q * t * r.powf(0.5 * q - 1.0);
    let g2 = q * r.powf(0.5 * q - 2.0) * (1.0 + (q - 1.0) * t * t);
    (g, g1, g2)
}

/// Constants of the two-sided bound
/// `c1 (1+|Z|^2)^{(p-2)/2} |Y|^2 <= D^2f(Z)(Y,Y) <= c2 (1+|Z|^2)^{(q-2)/2} |Y|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ellipticity {
    pub p: f64,
    pub q: f64,
    pub c1: f64,
    pub c2: f64,
    /// Per-direction `(q_i, a_i, A_i)` for splitting densities.
    pub directions: Option<[(f64, f64, f64); 2]>,
}

impl EnergyDensity {
    pub fn splitting(q1: f64, q2: f64) -> Result<Self, EnergyError> {
        let d = Self::Splitting { q1, q2 };
        d.validate()?;
        Ok(d)
    }

    pub fn pq_growth(p: f64, q: f64, lambda: f64) -> Result<Self, EnergyError> {
        let d = Self::PQGrowth { p, q, lambda };
        d.validate()?;
        Ok(d)
    }

    /// Exponents must be at least 2; the quadratic case `q1 = q2 = 2` is
    /// admitted for the linear sanity checks.
    pub fn validate(&self) -> Result<(), EnergyError> {
        match *self {
            Self::Splitting { q1, q2 } => {
                if !(q1.is_finite() && q2.is_finite() && q1 >= 2.0 && q2 >= 2.0) {
                    return Err(EnergyError::InvalidDensity(format!(
                        "splitting exponents must be >= 2, got ({q1}, {q2})"
                    )));
                }
            }
            Self::PQGrowth { p, q, lambda } => {
                if !(p.is_finite() && q.is_finite() && p >= 2.0 && q >= p) {
                    return Err(EnergyError::InvalidDensity(format!(
                        "(p,q) growth needs 2 <= p <= q, got ({p}, {q})"
                    )));
                }
                if !(lambda > 0.0 && lambda <= 1.0) {
                    return Err(EnergyError::InvalidDensity(format!(
                        "mixing weight must lie in (0, 1], got {lambda}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ellipticity(&self) -> Ellipticity {
        match *self {
            Self::Splitting { q1, q2 } => Ellipticity {
                p: 2.0,
                q: q1.max(q2),
                c1: q1.min(q2),
                c2: (q1 * (q1 - 1.0)).max(q2 * (q2 - 1.0)),
                directions: Some([(q1, q1, q1 * (q1 - 1.0)), (q2, q2, q2 * (q2 - 1.0))]),
            },
            Self::PQGrowth { p, q, lambda } => Ellipticity {
                p,
                q,
                c1: p * 1f64.min(p - 1.0),
                c2: (p * (p - 1.0) + lambda * q * (q - 1.0)) * 2f64.powf((q - p).abs() / 2.0),
                directions: None,
            },
        }
    }
}

impl Density for EnergyDensity {
    fn eval(&self, z: Vec2) -> f64 {
        match *self {
            Self::Splitting { q1, q2 } => power_factor(q1, z[0]).0 + power_factor(q2, z[1]).0,
            Self::PQGrowth { p, q, lambda } => {
                let r = 1.0 + z[0] * z[0] + z[1] * z[1];
                r.powf(0.5 * p) + lambda * power_factor(q, z[0]).0
            }
        }
    }

    fn grad(&self, z: Vec2) -> Vec2 {
        match *self {
            Self::Splitting { q1, q2 } => [power_factor(q1, z[0]).1, power_factor(q2, z[1]).1],
            Self::PQGrowth { p, q, lambda } => {
                let r = 1.0 + z[0] * z[0] + z[1] * z[1];
                let c = p * r.powf(0.5 * p - 1.0);
                [c * z[0] + lambda * power_factor(q, z[0]).1, c * z[1]]
            }
        }
    }

    fn hess(&self, z: Vec2) -> Mat2 {
        match *self {
            Self::Splitting { q1, q2 } => [
                [power_factor(q1, z[0]).2, 0.0],
                [0.0, power_factor(q2, z[1]).2],
            ],
            Self::PQGrowth { p, q, lambda } => {
                let r = 1.0 + z[0] * z[0] + z[1] * z[1];
                let a = p * r.powf(0.5 * p - 1.0);
                let b = p * (p - 2.0) * r.powf(0.5 * p - 2.0);
                let off = b * z[0] * z[1];
                [
                    [a + b * z[0] * z[0] + lambda * power_factor(q, z[0]).2, off],
                    [off, a + b * z[1] * z[1]],
                ]
            }
        }
    }
}

/// `(lower, value, upper)` of the two-sided ellipticity bound at `(z, y)`.
pub fn ellipticity_bounds(density: &EnergyDensity, z: Vec2, y: Vec2) -> (f64, f64, f64) {
    let e = density.ellipticity();
    let r = 1.0 + z[0] * z[0] + z[1] * z[1];
    let y2 = y[0] * y[0] + y[1] * y[1];
    (
        e.c1 * r.powf(0.5 * (e.p - 2.0)) * y2,
        density.hess_form(z, y, y),
        e.c2 * r.powf(0.5 * (e.q - 2.0)) * y2,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub samples: usize,
    /// Smallest observed `D^2f(Y,Y) / lower bound`; at least 1.
    pub min_lower_ratio: f64,
    /// Largest observed `D^2f(Y,Y) / upper bound`; at most 1.
    pub max_upper_ratio: f64,
}

const RATIO_SLACK: f64 = 1e-12;

/// Random two-sided check of the certified constants over `|Z| <= 10^3`
/// with log-uniform magnitudes and unit directions `Y`.
pub fn ellipticity_check<R: Rng>(
    density: &EnergyDensity,
    samples: usize,
    rng: &mut R,
) -> Result<EllipticityReport, EnergyError> {
    let e = density.ellipticity();
    let mut min_lower = f64::INFINITY;
    let mut max_upper = 0.0f64;
    for _ in 0..samples.max(1) {
        let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
        let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let z = [mag * ang.cos(), mag * ang.sin()];
        let beta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let y = [beta.cos(), beta.sin()];
        let (lo, val, hi) = ellipticity_bounds(density, z, y);
        let (rl, ru) = (val / lo, val / hi);
        min_lower = min_lower.min(rl);
        max_upper = max_upper.max(ru);
        if !(rl >= 1.0 - RATIO_SLACK && ru <= 1.0 + RATIO_SLACK) {
            return Err(EnergyError::EllipticityViolation {
                z,
                y,
                detail: format!("lower ratio {rl}, upper ratio {ru}"),
            });
        }
        if let Some(dirs) = e.directions {
            let h = density.hess(z);
            for (i, &(qi, ai, big_ai)) in dirs.iter().enumerate() {
                let w = (1.0 + z[i] * z[i]).powf(0.5 * (qi - 2.0));
                let ratio = h[i][i] / w;
                if !(ratio >= ai * (1.0 - RATIO_SLACK) && ratio <= big_ai * (1.0 + RATIO_SLACK)) {
                    return Err(EnergyError::EllipticityViolation {
                        z,
                        y,
                        detail: format!(
                            "direction {}: f'' / weight = {ratio} outside [{ai}, {big_ai}]",
                            i + 1
                        ),
                    });
                }
            }
        }
    }
    Ok(EllipticityReport {
        samples: samples.max(1),
        min_lower_ratio: min_lower,
        max_upper_ratio: max_upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub points: usize,
    pub worst_grad_error: f64,
    pub worst_hess_error: f64,
    pub worst_point: Vec2,
}

fn rel_err(fd: &[f64], an: &[f64]) -> f64 {
    let diff = fd
        .iter()
        .zip(an)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = an.iter().map(|v| v.abs()).fold(1.0, f64::max);
    diff / scale
}

/// Central finite differences of `eval` against `grad` and of `grad` against
/// `hess` at 1000 random points with `|Z| <= 10`. Errors are measured in
/// the sup norm relative to `max(1, |analytic|)`.
pub fn derivative_consistency<D: Density + ?Sized, R: Rng>(
    density: &D,
    tol: f64,
    rng: &mut R,
) -> Result<DerivativeReport, EnergyError> {
    let mut report = DerivativeReport {
        points: 1000,
        worst_grad_error: 0.0,
        worst_hess_error: 0.0,
        worst_point: [0.0; 2],
    };
    for _ in 0..report.points {
        let rad = 10.0 * rng.gen::<f64>().sqrt();
        let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let z = [rad * ang.cos(), rad * ang.sin()];
        let step = 1e-5 * 1f64.max(rad);
        let shift = |k: usize, s: f64| {
            let mut w = z;
            w[k] += s;
            w
        };
        let mut fd_grad = [0.0; 2];
        let mut fd_hess = [[0.0; 2]; 2];
        for k in 0..2 {
            let (zp, zm) = (shift(k, step), shift(k, -step));
            fd_grad[k] = (density.eval(zp) - density.eval(zm)) / (2.0 * step);
            let (gp, gm) = (density.grad(zp), density.grad(zm));
            for r in 0..2 {
                fd_hess[r][k] = (gp[r] - gm[r]) / (2.0 * step);
            }
        }
        let g = density.grad(z);
        let h = density.hess(z);
        let eg = rel_err(&fd_grad, &g);
        let eh = rel_err(
            &[fd_hess[0][0], fd_hess[0][1], fd_hess[1][0], fd_hess[1][1]],
            &[h[0][0], h[0][1], h[1][0], h[1][1]],
        );
        if eg.max(eh) > report.worst_grad_error.max(report.worst_hess_error) {
            report.worst_point = z;
        }
        report.worst_grad_error = report.worst_grad_error.max(eg);
        report.worst_hess_error = report.worst_hess_error.max(eh);
        if eg > tol {
            return Err(EnergyError::DerivativeMismatch {
                which: "gradient",
                z,
                error: eg,
                tol,
            });
        }
        if eh > tol {
            return Err(EnergyError::DerivativeMismatch {
                which: "hessian",
                z,
                error: eh,
                tol,
            });
        }
    }
    Ok(report)
}

fn unit_scale() -> f64 {
    1.0
}

/// Lipschitz boundary datum `u0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryDatum {
    /// `a + b x + c y`
    Affine { a: f64, b: f64, c: f64 },
    /// `scale * |2x - 1|`
    Tent {
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    /// `scale * min(x, 1 - x, y, 1 - y)`, the distance to the boundary of the
    /// unit square.
    Pyramid {
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    /// Nodal table with a declared Lipschitz constant.
    Custom { values: Vec<f64>, lipschitz: f64 },
}

impl BoundaryDatum {
    pub fn lipschitz_constant(&self) -> f64 {
        match *self {
            Self::Affine { b, c, .. } => b.hypot(c),
            Self::Tent { scale } => 2.0 * scale.abs(),
            Self::Pyramid { scale } => scale.abs(),
            Self::Custom { lipschitz, .. } => lipschitz,
        }
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        let finite = match self {
            Self::Affine { a, b, c } => a.is_finite() && b.is_finite() && c.is_finite(),
            Self::Tent { scale } | Self::Pyramid { scale } => scale.is_finite(),
            Self::Custom { values, lipschitz } => {
                lipschitz.is_finite() && *lipschitz >= 0.0 && values.iter().all(|v| v.is_finite())
            }
        };
        if !finite {
            return Err(EnergyError::InvalidDatum(format!("non-finite parameters in {self:?}")));
        }
        Ok(())
    }

    /// Pointwise value; `None` for tabulated data.
    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        match *self {
            Self::Affine { a, b, c } => Some(a + b * x + c * y),
            Self::Tent { scale } => Some(scale * (2.0 * x - 1.0).abs()),
            Self::Pyramid { scale } => Some(scale * x.min(1.0 - x).min(y).min(1.0 - y)),
            Self::Custom { .. } => None,
        }
    }

    pub fn nodal(&self, mesh: &DomainMesh) -> Result<ScalarField, EnergyError> {
        self.validate()?;
        match self {
            Self::Custom { values, .. } => {
                if values.len() != mesh.num_nodes() {
                    return Err(EnergyError::InvalidDatum(format!(
                        "custom table has {} values, mesh has {} nodes",
                        values.len(),
                        mesh.num_nodes()
                    )));
                }
                Ok(ScalarField(values.clone()))
            }
            _ => Ok(ScalarField::from_fn(mesh, |x, y| {
                self.eval(x, y).expect("analytic datum")
            })),
        }
    }
}
