//! Weighted functionals of computed minimizers and the property suites built
//! on them: refinement boundedness studies, Hölder coefficients near the
//! boundary, boundary growth of `u - u0`, and Caccioppoli ratios.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{BoundaryDatum, Density, EnergyDensity, EnergyError};
use crate::exponents::{self, ExponentError, PQExponents, SplitExponents};
use crate::geometry::{
    self, build_mesh, midpoint_average, p1_gradient, recover_nodal_gradient, DomainMesh,
    DomainSpec, GeometryError, Point, ScalarField,
};
use crate::solver::{self, SolveResult, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid weighted-integral spec: {0}")]
    SpecInvalid(String),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("level 1/{resolution}: {source}")]
    Solver {
        resolution: usize,
        #[source]
        source: SolverError,
    },
    #[error("refinement ladder must have at least 3 levels, each halving h: {0:?}")]
    BadLadder(Vec<usize>),
    #[error("sample point {point:?} has d = {dist} < 4h = {min}")]
    NeighborhoodTooSmall { point: Point, dist: f64, min: f64 },
    #[error("sample point {0:?} is not a mesh node")]
    PointNotOnMesh(Point),
    #[error("weight exponent alpha = {alpha} must exceed {limit}")]
    InvalidAlpha { alpha: f64, limit: f64 },
    #[error("test function does not vanish on the boundary")]
    EtaNotCompact,
    #[error("degenerate right-hand side {rhs:e} (left-hand side {lhs:e})")]
    DegenerateRhs { lhs: f64, rhs: f64 },
}

pub type Result<T> = std::result::Result<T, VerifyError>;

/// Everything needed to pose and solve one discrete Dirichlet problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub domain: DomainSpec,
    pub density: EnergyDensity,
    pub datum: BoundaryDatum,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// A solved level of a refinement ladder.
#[derive(Debug, Clone)]
pub struct Level {
    pub mesh: DomainMesh,
    pub u0: ScalarField,
    pub result: SolveResult,
}

impl Problem {
    pub fn solve_at(&self, resolution: usize) -> Result<Level> {
        let mesh = build_mesh(&self.domain.with_resolution(resolution))?;
        let u0 = self.datum.nodal(&mesh)?;
        let result = solver::solve_from(
            &mesh,
            &self.density,
            &u0,
            solver::InitialGuess::Interpolated,
            &self.solver,
        )
        .map_err(|source| VerifyError::Solver { resolution, source })?;
        Ok(Level { mesh, u0, result })
    }
}

/// Weighted integrand `|u - u0|^weight * g(grad u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Integrand {
    /// `g = |d1 u|^a + |d2 u|^b`
    Partial { weight: f64, powers: [f64; 2] },
    /// `g = (1 + |grad u|^2)^s`
    Gamma { weight: f64, s: f64 },
}

/// Exponents of one of the three weighted higher-integrability statements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum WeightedIntegralSpec {
    /// `|u-u0|^t (|d1 u|^{3 q1/2} + |d2 u|^{3 q2/2})`, `t > T(q1, q2)`.
    Splitting { q1: f64, q2: f64, t: f64 },
    /// `|u-u0|^{2 kappa} Gamma^s` in the plane.
    #[serde(rename = "nosplit2d")]
    NoSplit2D { p: f64, q: f64, kappa: f64, s: f64 },
    /// `Gamma^sbar |u-u0|^{2(kappa-1)}`, planar instance.
    Aniso { p: f64, q: f64, kappa: f64, sbar: f64 },
}

impl WeightedIntegralSpec {
    /// Check the exponents against the strict conditions of the theorem.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(VerifyError::SpecInvalid(msg));
        match *self {
            Self::Splitting { q1, q2, t } => {
                let se = SplitExponents::new(q1, q2)?;
                let bound = exponents::threshold_t(&se);
                if !(t > bound) {
                    return invalid(format!("t = {t} must exceed T(q1, q2) = {bound}"));
                }
            }
            Self::NoSplit2D { p, q, kappa, s } => {
                let pq = PQExponents::new(2, p, q)?;
                let kmin = exponents::kappa_min_nosplit(&pq, s)?;
                if !(kappa > kmin) {
                    return invalid(format!("kappa = {kappa} must exceed {kmin}"));
                }
            }
            Self::Aniso { p, q, kappa, sbar } => {
                let pq = PQExponents::new(2, p, q)?;
                exponents::beta_stars(&pq, kappa, sbar)?;
            }
        }
        Ok(())
    }

    pub fn integrand(&self) -> Integrand {
        match *self {
            Self::Splitting { q1, q2, t } => Integrand::Partial {
                weight: t,
                powers: [1.5 * q1, 1.5 * q2],
            },
            Self::NoSplit2D { kappa, s, .. } => Integrand::Gamma {
                weight: 2.0 * kappa,
                s,
            },
            Self::Aniso { kappa, sbar, .. } => Integrand::Gamma {
                weight: 2.0 * (kappa - 1.0),
                s: sbar,
            },
        }
    }

    /// Spec with the exponents of `density` and the concrete values of a
    /// bundle computed for it.
    pub fn from_bundle(density: &EnergyDensity, bundle: &exponents::ExponentBundle) -> Result<Self> {
        let missing = |what: &str| VerifyError::SpecInvalid(format!("bundle lacks {what}"));
        let spec = match (*density, bundle.theorem) {
            (EnergyDensity::Splitting { q1, q2 }, "splitting") => Self::Splitting {
                q1,
                q2,
                t: bundle.t.ok_or_else(|| missing("t"))?,
            },
            (EnergyDensity::PQGrowth { p, q, .. }, "nosplit2d") => Self::NoSplit2D {
                p,
                q,
                kappa: bundle.kappa,
                s: bundle.s.ok_or_else(|| missing("s"))?,
            },
            (EnergyDensity::PQGrowth { p, q, .. }, "aniso") => Self::Aniso {
                p,
                q,
                kappa: bundle.kappa,
                sbar: bundle.sbar.ok_or_else(|| missing("sbar"))?,
            },
            (d, th) => {
                return Err(VerifyError::SpecInvalid(format!(
                    "theorem {th} does not apply to density {d:?}"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Whether the spec's growth exponents are those of `density`.
    pub fn matches(&self, density: &EnergyDensity) -> bool {
        match (*self, *density) {
            (Self::Splitting { q1, q2, .. }, EnergyDensity::Splitting { q1: a, q2: b }) => {
                q1 == a && q2 == b
            }
            (Self::NoSplit2D { p, q, .. }, EnergyDensity::PQGrowth { p: a, q: b, .. })
            | (Self::Aniso { p, q, .. }, EnergyDensity::PQGrowth { p: a, q: b, .. }) => {
                p == a && q == b
            }
            _ => false,
        }
    }
}

/// Quadrature of `integrand`: gradient factors are constant per triangle,
/// the weight is evaluated at the three edge midpoints.
pub fn raw_weighted_integral(
    mesh: &DomainMesh,
    u: &ScalarField,
    u0: &ScalarField,
    integrand: &Integrand,
) -> f64 {
    let diff = u.zip_map(u0, |a, b| a - b);
    let grads = p1_gradient(mesh, u);
    let values: Vec<f64> = (0..mesh.triangles.len())
        .map(|t| {
            let g = grads[t];
            let (weight, factor) = match *integrand {
                Integrand::Partial { weight, powers } => (
                    weight,
                    g[0].abs().powf(powers[0]) + g[1].abs().powf(powers[1]),
                ),
                Integrand::Gamma { weight, s } => {
                    (weight, (1.0 + g[0] * g[0] + g[1] * g[1]).powf(s))
                }
            };
            factor * midpoint_average(mesh, &diff, t, |v| v.abs().powf(weight))
        })
        .collect();
    geometry::integrate(mesh, &values)
}

pub fn weighted_integral(
    mesh: &DomainMesh,
    u: &ScalarField,
    u0: &ScalarField,
    spec: &WeightedIntegralSpec,
) -> Result<f64> {
    spec.validate()?;
    Ok(raw_weighted_integral(mesh, u, u0, &spec.integrand()))
}

/// Sup norm of the reduced energy gradient: the discrete Euler residual.
pub fn euler_residual<D: Density>(mesh: &DomainMesh, u: &ScalarField, density: &D) -> f64 {
    solver::reduced_gradient_norm(mesh, density, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelRow {
    pub resolution: usize,
    pub h: f64,
    pub weighted_integral: f64,
    pub energy: f64,
    pub newton_iters: usize,
    pub grad_norm: f64,
    pub euler_residual: f64,
    pub sup_u_minus_u0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessVerdict {
    pub delta: f64,
    /// Largest `W_{h/2} / W_h` over consecutive levels (0 when all W vanish).
    pub max_growth: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub spec: WeightedIntegralSpec,
    /// Ordered by decreasing h.
    pub rows: Vec<LevelRow>,
    pub verdict: BoundednessVerdict,
}

pub fn check_ladder(resolutions: &[usize]) -> Result<()> {
    let halving = resolutions.windows(2).all(|w| w[1] == 2 * w[0]);
    if resolutions.len() < 3 || !halving || resolutions[0] == 0 {
        return Err(VerifyError::BadLadder(resolutions.to_vec()));
    }
    Ok(())
}

/// `W_{h/2} <= (1 + delta) W_h` for every consecutive pair.
pub fn boundedness_verdict(values: &[f64], delta: f64) -> BoundednessVerdict {
    let mut bounded = true;
    let mut max_growth = 0.0f64;
    for w in values.windows(2) {
        if !(w[1] <= (1.0 + delta) * w[0]) {
            bounded = false;
        }
        if w[0] > 0.0 {
            max_growth = max_growth.max(w[1] / w[0]);
        } else if w[1] > 0.0 {
            max_growth = f64::INFINITY;
        }
    }
    BoundednessVerdict {
        delta,
        max_growth,
        bounded,
    }
}

/// Solve every level of the ladder (in parallel) and evaluate the weighted
/// integral on each.
pub fn refinement_study(
    problem: &Problem,
    spec: &WeightedIntegralSpec,
    resolutions: &[usize],
    delta: f64,
) -> Result<StudyReport> {
    spec.validate()?;
    if !spec.matches(&problem.density) {
        return Err(VerifyError::SpecInvalid(format!(
            "spec {spec:?} does not match density {:?}",
            problem.density
        )));
    }
    check_ladder(resolutions)?;
    let rows = resolutions
        .par_iter()
        .map(|&res| {
            let level = problem.solve_at(res)?;
            Ok(level_row(problem, spec, &level))
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.weighted_integral).collect();
    Ok(StudyReport {
        spec: *spec,
        verdict: boundedness_verdict(&values, delta),
        rows,
    })
}

pub fn level_row(problem: &Problem, spec: &WeightedIntegralSpec, level: &Level) -> LevelRow {
    let Level { mesh, u0, result } = level;
    LevelRow {
        resolution: mesh.spec.resolution,
        h: mesh.h,
        weighted_integral: raw_weighted_integral(mesh, &result.u, u0, &spec.integrand()),
        energy: result.energy,
        newton_iters: result.newton_iters,
        grad_norm: result.grad_norm,
        euler_residual: euler_residual(mesh, &result.u, &problem.density),
        sup_u_minus_u0: result.u.sup_distance(u0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoelderSample {
    pub x0: Point,
    pub dist: f64,
    pub radius: f64,
    /// Measured `sup |u(x) - u(x0)| / |x - x0|^mu` over nodes with
    /// `0 < |x - x0| <= d(x0) / 2`.
    pub coefficient: f64,
    /// `coefficient * d(x0)^{zeta - 1}`.
    pub product: f64,
}

pub fn hoelder_coefficient(
    mesh: &DomainMesh,
    u: &ScalarField,
    qmin: f64,
    kappa: f64,
    points: &[Point],
) -> Result<Vec<HoelderSample>> {
    let (zeta, mu) = exponents::hoelder_params(qmin, kappa);
    points
        .iter()
        .map(|&x0| {
            let id = mesh.node_at(x0).ok_or(VerifyError::PointNotOnMesh(x0))?;
            let d = mesh.dist[id];
            if d < 4.0 * mesh.h {
                return Err(VerifyError::NeighborhoodTooSmall {
                    point: x0,
                    dist: d,
                    min: 4.0 * mesh.h,
                });
            }
            let radius = d / 2.0;
            let p0 = mesh.nodes[id];
            let u_x0 = u.0[id];
            let coefficient = mesh
                .nodes
                .iter()
                .zip(u.values())
                .filter_map(|(p, &v)| {
                    let r = (p[0] - p0[0]).hypot(p[1] - p0[1]);
                    (r > 0.0 && r <= radius * (1.0 + 1e-12)).then(|| (v - u_x0).abs() / r.powf(mu))
                })
                .fold(0.0, f64::max);
            Ok(HoelderSample {
                x0,
                dist: d,
                radius,
                coefficient,
                product: coefficient * d.powf(zeta - 1.0),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoelderVerdict {
    pub zeta: f64,
    pub mu: f64,
    pub samples: Vec<HoelderSample>,
    /// Fitted constant: the largest observed product.
    pub fitted_c: f64,
    /// Largest ratio of the product at a point to the product at the next
    /// point farther from the boundary.
    pub worst_ratio: f64,
    pub factor: f64,
    pub passed: bool,
}

/// Bounded-product check: towards the boundary the product may grow by at
/// most `factor` between consecutive sample depths.
pub fn hoelder_verdict(qmin: f64, kappa: f64, mut samples: Vec<HoelderSample>, factor: f64) -> HoelderVerdict {
    let (zeta, mu) = exponents::hoelder_params(qmin, kappa);
    samples.sort_by(|a, b| b.dist.total_cmp(&a.dist));
    let mut worst = 0.0f64;
    let mut passed = samples.iter().all(|s| s.product.is_finite());
    for w in samples.windows(2) {
        if w[0].product > 0.0 {
            worst = worst.max(w[1].product / w[0].product);
        } else if w[1].product > 0.0 {
            worst = f64::INFINITY;
        }
        if !(w[1].product <= factor * w[0].product) {
            passed = false;
        }
    }
    HoelderVerdict {
        zeta,
        mu,
        fitted_c: samples.iter().map(|s| s.product).fold(0.0, f64::max),
        samples,
        worst_ratio: worst,
        factor,
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryGrowth {
    /// `1 - 2 / qmin`
    pub exponent: f64,
    /// `(rho, sup_{d <= rho} |u - u0|)`, coarsest first.
    pub bands: Vec<(f64, f64)>,
    pub fitted_c: f64,
    /// Largest `sup / (C rho^exponent)` over the finer bands.
    pub worst_ratio: f64,
    pub factor: f64,
    pub passed: bool,
}

/// Growth of `|u - u0|` in boundary bands `{d <= rho}`, compared with
/// `C rho^{1 - 2/qmin}` where `C` is fitted at the coarsest band.
pub fn boundary_growth(
    mesh: &DomainMesh,
    u: &ScalarField,
    u0: &ScalarField,
    qmin: f64,
    rhos: &[f64],
    factor: f64,
) -> BoundaryGrowth {
    let exponent = 1.0 - 2.0 / qmin;
    let mut rhos = rhos.to_vec();
    rhos.sort_by(|a, b| b.total_cmp(a));
    let bands: Vec<(f64, f64)> = rhos
        .iter()
        .map(|&rho| {
            let sup = mesh
                .dist
                .iter()
                .zip(u.values().iter().zip(u0.values()))
                .filter(|(&d, _)| d <= rho)
                .map(|(_, (a, b))| (a - b).abs())
                .fold(0.0, f64::max);
            (rho, sup)
        })
        .collect();
    let fitted_c = bands.first().map_or(0.0, |&(r, s)| s / r.powf(exponent));
    let mut worst = 0.0f64;
    let mut passed = true;
    for &(rho, sup) in bands.iter().skip(1) {
        let model = fitted_c * rho.powf(exponent);
        if model > 0.0 {
            worst = worst.max(sup / model);
        } else if sup > 0.0 {
            worst = f64::INFINITY;
        }
        if !(sup <= factor * model) {
            passed = false;
        }
    }
    BoundaryGrowth {
        exponent,
        bands,
        fitted_c,
        worst_ratio: worst,
        factor,
        passed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaccioppoliForm {
    /// Per-direction weights `Gamma_i^alpha`, `alpha > -1/2`.
    Splitting,
    /// Full-gradient weight `Gamma^alpha`, `alpha > -1/(2n)` with `n = 2`.
    FullGradient,
}

impl CaccioppoliForm {
    pub fn alpha_limit(self) -> f64 {
        match self {
            Self::Splitting => -0.5,
            Self::FullGradient => -0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaccioppoliRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

const DEGENERATE_RHS: f64 = 1e-14;

/// Discrete Caccioppoli ratio with recovered second derivatives: nodal
/// gradients are area-weighted averages of the triangle gradients, and the
/// P1 gradient of each recovered component stands in for `grad d_i u`.
/// Powers of `eta` are integrated with the edge-midpoint rule.
pub fn caccioppoli_check<D: Density>(
    mesh: &DomainMesh,
    u: &ScalarField,
    density: &D,
    alpha: f64,
    eta: &ScalarField,
    l: u32,
    form: CaccioppoliForm,
) -> Result<CaccioppoliRatio> {
    let limit = form.alpha_limit();
    if !(alpha > limit) {
        return Err(VerifyError::InvalidAlpha { alpha, limit });
    }
    mesh.check_field(eta)?;
    if mesh
        .boundary_mask
        .iter()
        .zip(eta.values())
        .any(|(&b, &v)| b && v != 0.0)
    {
        return Err(VerifyError::EtaNotCompact);
    }
    let l = l.max(1) as i32;
    let grads = p1_gradient(mesh, u);
    let [rx, ry] = recover_nodal_gradient(mesh, &grads);
    let second = [p1_gradient(mesh, &rx), p1_gradient(mesh, &ry)];
    let eta_grads = p1_gradient(mesh, eta);

    let mut lhs_terms = Vec::with_capacity(mesh.triangles.len());
    let mut rhs_terms = Vec::with_capacity(mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let g = grads[t];
        let de = eta_grads[t];
        let eta_hi = midpoint_average(mesh, eta, t, |v| v.powi(2 * l));
        let eta_lo = midpoint_average(mesh, eta, t, |v| v.powi(2 * l - 2));
        let cut = density.hess_form(g, de, de);
        let (lhs, rhs) = match form {
            CaccioppoliForm::Splitting => {
                let mut lhs = 0.0;
                let mut rhs = 0.0;
                for i in 0..2 {
                    let gamma_i = 1.0 + g[i] * g[i];
                    let dd = second[i][t];
                    lhs += density.hess_form(g, dd, dd) * eta_hi * gamma_i.powf(alpha);
                    rhs += cut * eta_lo * gamma_i.powf(alpha + 1.0);
                }
                (lhs, rhs)
            }
            CaccioppoliForm::FullGradient => {
                let norm2 = g[0] * g[0] + g[1] * g[1];
                let w = (1.0 + norm2).powf(alpha);
                let lhs: f64 = (0..2)
                    .map(|i| density.hess_form(g, second[i][t], second[i][t]))
                    .sum::<f64>()
                    * w
                    * eta_hi;
                (lhs, cut * norm2 * w * eta_lo)
            }
        };
        lhs_terms.push(lhs);
        rhs_terms.push(rhs);
    }
    let lhs = geometry::integrate(mesh, &lhs_terms);
    let rhs = geometry::integrate(mesh, &rhs_terms);
    if !(rhs >= DEGENERATE_RHS) {
        return Err(VerifyError::DegenerateRhs { lhs, rhs });
    }
    Ok(CaccioppoliRatio {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// `eta_m = phi_m (u - u0)`; vanishes on the boundary by construction.
pub fn eta_m(phi: &ScalarField, u: &ScalarField, u0: &ScalarField) -> ScalarField {
    ScalarField(
        phi.values()
            .iter()
            .zip(u.values().iter().zip(u0.values()))
            .map(|(p, (a, b))| p * (a - b))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaccioppoliRow {
    pub form: CaccioppoliForm,
    pub alpha: f64,
    pub resolution: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaccioppoliSeries {
    pub form: CaccioppoliForm,
    pub alpha: f64,
    pub ratios: Vec<f64>,
    /// `max / min` over the refinement levels.
    pub spread: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaccioppoliStudy {
    pub cutoff_m: u32,
    pub l: u32,
    pub max_spread: f64,
    pub rows: Vec<CaccioppoliRow>,
    pub series: Vec<CaccioppoliSeries>,
    pub passed: bool,
}

/// Ratios for every `(form, alpha)` at every level with `eta = phi_m`;
/// a series passes when all ratios are finite and `max/min <= max_spread`.
pub fn caccioppoli_study(
    problem: &Problem,
    cases: &[(CaccioppoliForm, f64)],
    m: u32,
    l: u32,
    resolutions: &[usize],
    max_spread: f64,
) -> Result<CaccioppoliStudy> {
    let levels: Vec<Level> = resolutions
        .par_iter()
        .map(|&r| problem.solve_at(r))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &(form, alpha) in cases {
        let mut ratios = Vec::new();
        for level in &levels {
            let phi = geometry::cutoff(&level.mesh, m)?;
            let r = caccioppoli_check(
                &level.mesh,
                &level.result.u,
                &problem.density,
                alpha,
                &phi.values,
                l,
                form,
            )?;
            rows.push(CaccioppoliRow {
                form,
                alpha,
                resolution: level.mesh.spec.resolution,
                lhs: r.lhs,
                rhs: r.rhs,
                ratio: r.ratio,
            });
            ratios.push(r.ratio);
        }
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if min > 0.0 { max / min } else if max == 0.0 { 1.0 } else { f64::INFINITY };
        let finite = ratios.iter().all(|r| r.is_finite());
        series.push(CaccioppoliSeries {
            form,
            alpha,
            passed: finite && spread <= max_spread,
            ratios,
            spread,
        });
    }
    Ok(CaccioppoliStudy {
        cutoff_m: m,
        l,
        max_spread,
        passed: series.iter().all(|s| s.passed),
        rows,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square(res: usize) -> DomainMesh {
        build_mesh(&DomainSpec::unit_square(res)).unwrap()
    }

    #[test]
    fn zero_exponents_integrate_to_area() {
        for spec in [DomainSpec::unit_square(16), DomainSpec::l_shape(1.0, 0.5, 16)] {
            let mesh = build_mesh(&spec).unwrap();
            let u = ScalarField::from_fn(&mesh, |x, y| x * y);
            let u0 = ScalarField::zeros(mesh.num_nodes());
            let w = raw_weighted_integral(&mesh, &u, &u0, &Integrand::Gamma { weight: 0.0, s: 0.0 });
            assert_eq!(w, spec.area());
        }
    }

    #[test]
    fn affine_minimizer_has_zero_weight() {
        let mesh = square(16);
        let u = ScalarField::from_fn(&mesh, |x, y| 1.0 + 2.0 * x - y);
        let specs = [
            WeightedIntegralSpec::Splitting { q1: 3.0, q2: 4.0, t: 60.0 },
            WeightedIntegralSpec::NoSplit2D { p: 3.0, q: 3.4, kappa: 20.0, s: 2.6 },
            WeightedIntegralSpec::Aniso { p: 3.0, q: 3.5, kappa: 10.0, sbar: 2.5 },
        ];
        for spec in specs {
            assert_eq!(weighted_integral(&mesh, &u, &u, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_offset_with_flat_gradient() {
        let mesh = square(8);
        let u = ScalarField(vec![1.0; mesh.num_nodes()]);
        let u0 = ScalarField::zeros(mesh.num_nodes());
        let split = WeightedIntegralSpec::Splitting { q1: 3.0, q2: 3.0, t: 60.0 };
        assert_eq!(weighted_integral(&mesh, &u, &u0, &split).unwrap(), 0.0);
        let nosplit = WeightedIntegralSpec::NoSplit2D { p: 3.0, q: 3.4, kappa: 20.0, s: 2.6 };
        assert_abs_diff_eq!(weighted_integral(&mesh, &u, &u0, &nosplit).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mesh = square(8);
        let u = ScalarField::zeros(mesh.num_nodes());
        let below = WeightedIntegralSpec::Splitting { q1: 3.0, q2: 4.0, t: 51.0 };
        assert!(matches!(
            weighted_integral(&mesh, &u, &u, &below),
            Err(VerifyError::SpecInvalid(_))
        ));
        let bad_s = WeightedIntegralSpec::NoSplit2D { p: 3.0, q: 3.4, kappa: 100.0, s: 2.4 };
        assert!(weighted_integral(&mesh, &u, &u, &bad_s).is_err());
        let bad_kappa = WeightedIntegralSpec::Aniso { p: 3.0, q: 3.5, kappa: 4.0, sbar: 1.0 };
        assert!(weighted_integral(&mesh, &u, &u, &bad_kappa).is_err());
    }

    #[test]
    fn boundedness_verdicts() {
        assert!(boundedness_verdict(&[0.0, 0.0, 0.0], 0.1).bounded);
        assert!(boundedness_verdict(&[1.0, 1.05, 1.1], 0.1).bounded);
        assert!(!boundedness_verdict(&[1.0, 1.2, 1.2], 0.1).bounded);
        assert!(!boundedness_verdict(&[0.0, 1e-30, 1e-30], 0.1).bounded);
        assert!(check_ladder(&[16, 32, 64]).is_ok());
        assert!(check_ladder(&[16, 32]).is_err());
        assert!(check_ladder(&[16, 48, 96]).is_err());
    }

    #[test]
    fn hoelder_affine_bound_and_zero_field() {
        let mesh = square(64);
        let (b, c) = (2.0, -1.0);
        let u = ScalarField::from_fn(&mesh, |x, y| b * x + c * y);
        let (qmin, kappa) = (4.0, 11.55);
        let (_, mu) = exponents::hoelder_params(qmin, kappa);
        let pts = [[0.5, 0.5], [0.25, 0.5], [0.125, 0.25]];
        let lip = f64::hypot(b, c);
        for s in hoelder_coefficient(&mesh, &u, qmin, kappa, &pts).unwrap() {
            assert!(s.coefficient <= lip * (s.dist / 2.0).powf(1.0 - mu) * (1.0 + 1e-12));
            assert!(s.coefficient > 0.0);
        }
        let zero = ScalarField::zeros(mesh.num_nodes());
        for s in hoelder_coefficient(&mesh, &zero, qmin, kappa, &pts).unwrap() {
            assert_eq!(s.coefficient, 0.0);
        }
        assert!(matches!(
            hoelder_coefficient(&mesh, &u, qmin, kappa, &[[0.03125, 0.5]]),
            Err(VerifyError::NeighborhoodTooSmall { .. })
        ));
        assert!(matches!(
            hoelder_coefficient(&mesh, &u, qmin, kappa, &[[0.5001, 0.5]]),
            Err(VerifyError::PointNotOnMesh(_))
        ));
    }

    #[test]
    fn caccioppoli_degenerate_and_affine() {
        let mesh = square(32);
        let d = EnergyDensity::splitting(3.0, 4.0).unwrap();
        let u = ScalarField::from_fn(&mesh, |x, y| 2.0 * x - y);
        let zero = ScalarField::zeros(mesh.num_nodes());
        match caccioppoli_check(&mesh, &u, &d, -0.4, &zero, 1, CaccioppoliForm::Splitting) {
            Err(VerifyError::DegenerateRhs { lhs, .. }) => assert!(lhs <= 1e-12),
            other => panic!("expected degenerate rhs, got {other:?}"),
        }
        let phi = geometry::cutoff(&mesh, 4).unwrap();
        for form in [CaccioppoliForm::Splitting, CaccioppoliForm::FullGradient] {
            let r = caccioppoli_check(&mesh, &u, &d, 0.0, &phi.values, 1, form).unwrap();
            assert_eq!(r.lhs, 0.0);
            assert_eq!(r.ratio, 0.0);
            assert!(r.rhs > 0.0);
        }
        assert!(matches!(
            caccioppoli_check(&mesh, &u, &d, -0.5, &phi.values, 1, CaccioppoliForm::Splitting),
            Err(VerifyError::InvalidAlpha { .. })
        ));
        assert!(matches!(
            caccioppoli_check(&mesh, &u, &d, -0.25, &phi.values, 1, CaccioppoliForm::FullGradient),
            Err(VerifyError::InvalidAlpha { .. })
        ));
        let ones = ScalarField(vec![1.0; mesh.num_nodes()]);
        assert!(matches!(
            caccioppoli_check(&mesh, &u, &d, 0.0, &ones, 1, CaccioppoliForm::Splitting),
            Err(VerifyError::EtaNotCompact)
        ));
    }

    #[test]
    fn eta_m_vanishes_on_boundary() {
        let mesh = square(32);
        let phi = geometry::cutoff(&mesh, 4).unwrap();
        let u = ScalarField::from_fn(&mesh, |x, y| (x * 7.0).sin() + y);
        let u0 = ScalarField::from_fn(&mesh, |x, _| x);
        let eta = eta_m(&phi.values, &u, &u0);
        for (v, &b) in mesh.boundary_mask.iter().enumerate() {
            if b {
                assert_eq!(eta.0[v], 0.0);
            }
        }
    }

    #[test]
    fn boundary_growth_of_sqrt_profile() {
        let mesh = square(128);
        // |u - u0| = sqrt(d) saturates the growth exponent for qmin = 4.
        let u = ScalarField(mesh.dist.iter().map(|d| d.sqrt()).collect());
        let u0 = ScalarField::zeros(mesh.num_nodes());
        let g = boundary_growth(&mesh, &u, &u0, 4.0, &[0.25, 0.125, 0.0625], 1.5);
        assert!(g.passed);
        assert_abs_diff_eq!(g.worst_ratio, 1.0, epsilon = 1e-12);
        // linear growth with a steeper exponent fails
        let g = boundary_growth(&mesh, &u, &u0, 100.0, &[0.25, 0.125, 0.0625], 1.5);
        assert!(!g.passed);
    }
}
