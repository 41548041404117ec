//! Discrete Dirichlet problem: minimize `J[u] = sum_T area(T) f(grad u|_T)`
//! over P1 fields with `u = u0` on boundary nodes, by damped Newton with
//! Armijo backtracking and conjugate-gradient linear solves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{BoundaryDatum, Density, EnergyError};
use crate::geometry::{DomainMesh, GeometryError, ScalarField};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("Newton iteration did not converge: {reason} (best grad norm {:e})", best.grad_norm)]
    NoConvergence {
        reason: String,
        best: Box<SolveResult>,
    },
    #[error("conjugate gradient stalled at relative residual {residual:e} after {iterations} iterations")]
    LinearSolveStall { residual: f64, iterations: usize },
    #[error("nonpositive curvature {curvature:e} encountered in conjugate gradient")]
    NonPositiveCurvature { curvature: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Sup-norm tolerance on the reduced energy gradient.
    pub grad_tol: f64,
    pub max_newton_iters: usize,
    pub armijo_slope: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub cg_rel_tol: f64,
    /// Iteration cap per CG solve as a multiple of the number of unknowns.
    pub cg_iter_factor: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_newton_iters: 200,
            armijo_slope: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 60,
            cg_rel_tol: 1e-12,
            cg_iter_factor: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("armijo_slope", self.armijo_slope),
            ("backtrack_factor", self.backtrack_factor),
            ("cg_rel_tol", self.cg_rel_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("solver.{name} must be positive, got {v}"));
            }
        }
        if self.backtrack_factor >= 1.0 || self.armijo_slope >= 0.5 {
            return Err("solver.backtrack_factor must be < 1 and armijo_slope < 1/2".into());
        }
        if self.max_newton_iters == 0 || self.cg_iter_factor == 0 {
            return Err("solver iteration budgets must be positive".into());
        }
        Ok(())
    }
}

/// Symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        });
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Unknown numbering and sparsity pattern of the reduced system.
#[derive(Debug, Clone)]
pub struct DofMap {
    /// Unknown index of each node, `None` on the boundary.
    pub dof: Vec<Option<usize>>,
    pub interior: Vec<usize>,
    pattern: CsrMatrix,
    /// Position in `vals` of each local (a, b) pair of every triangle.
    slots: Vec<[Option<usize>; 9]>,
}

impl DofMap {
    pub fn new(mesh: &DomainMesh) -> Self {
        let mut dof = vec![None; mesh.num_nodes()];
        let mut interior = Vec::new();
        for v in mesh.interior_nodes() {
            dof[v] = Some(interior.len());
            interior.push(v);
        }
        let n = interior.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for tri in &mesh.triangles {
            for &a in tri {
                for &b in tri {
                    if let (Some(i), Some(j)) = (dof[a], dof[b]) {
                        adj[i].push(j);
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            cols.extend_from_slice(row);
            row_ptr.push(cols.len());
        }
        let pattern = CsrMatrix {
            n,
            vals: vec![0.0; cols.len()],
            row_ptr,
            cols,
        };
        let slots = mesh
            .triangles
            .iter()
            .map(|tri| {
                let mut s = [None; 9];
                for (ia, &a) in tri.iter().enumerate() {
                    for (ib, &b) in tri.iter().enumerate() {
                        if let (Some(i), Some(j)) = (dof[a], dof[b]) {
                            let row = &pattern.cols[pattern.row_ptr[i]..pattern.row_ptr[i + 1]];
                            let k = row.binary_search(&j).expect("pattern contains pair");
                            s[3 * ia + ib] = Some(pattern.row_ptr[i] + k);
                        }
                    }
                }
                s
            })
            .collect();
        Self {
            dof,
            interior,
            pattern,
            slots,
        }
    }

    pub fn num_unknowns(&self) -> usize {
        self.interior.len()
    }

    pub fn gather(&self, u: &ScalarField) -> Vec<f64> {
        self.interior.iter().map(|&v| u.0[v]).collect()
    }

    pub fn scatter(&self, x: &[f64], u: &mut ScalarField) {
        for (k, &v) in self.interior.iter().enumerate() {
            u.0[v] = x[k];
        }
    }
}

/// Energy, reduced gradient and reduced Hessian at `u`.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub energy: f64,
    pub gradient: Vec<f64>,
    pub hessian: CsrMatrix,
}

struct Local {
    energy: f64,
    grad: [f64; 3],
    hess: [f64; 9],
}

fn tri_gradient(mesh: &DomainMesh, u: &ScalarField, t: usize) -> ([f64; 2], [[f64; 2]; 3]) {
    let tri = mesh.triangles[t];
    let hats = mesh.hat_gradients(t);
    let mut g = [0.0; 2];
    for k in 0..3 {
        g[0] += u.0[tri[k]] * hats[k][0];
        g[1] += u.0[tri[k]] * hats[k][1];
    }
    (g, hats)
}

/// Discrete energy. Per-triangle terms are computed in parallel and summed
/// in triangle order.
pub fn energy<D: Density>(mesh: &DomainMesh, density: &D, u: &ScalarField) -> f64 {
    let terms: Vec<f64> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| mesh.area(t) * density.eval(tri_gradient(mesh, u, t).0))
        .collect();
    terms.iter().sum()
}

pub fn assemble<D: Density>(
    mesh: &DomainMesh,
    dofs: &DofMap,
    density: &D,
    u: &ScalarField,
) -> Assembly {
    let locals: Vec<Local> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let area = mesh.area(t);
            let (g, hats) = tri_gradient(mesh, u, t);
            let df = density.grad(g);
            let d2 = density.hess(g);
            let mut out = Local {
                energy: area * density.eval(g),
                grad: [0.0; 3],
                hess: [0.0; 9],
            };
            for a in 0..3 {
                out.grad[a] = area * (df[0] * hats[a][0] + df[1] * hats[a][1]);
                let ha = [
                    d2[0][0] * hats[a][0] + d2[0][1] * hats[a][1],
                    d2[1][0] * hats[a][0] + d2[1][1] * hats[a][1],
                ];
                for b in 0..3 {
                    out.hess[3 * a + b] = area * (ha[0] * hats[b][0] + ha[1] * hats[b][1]);
                }
            }
            out
        })
        .collect();

    let mut hessian = dofs.pattern.clone();
    let mut gradient = vec![0.0; dofs.num_unknowns()];
    let mut energy = 0.0;
    for (t, local) in locals.iter().enumerate() {
        energy += local.energy;
        let tri = mesh.triangles[t];
        for a in 0..3 {
            if let Some(i) = dofs.dof[tri[a]] {
                gradient[i] += local.grad[a];
            }
        }
        for (k, slot) in dofs.slots[t].iter().enumerate() {
            if let Some(s) = slot {
                hessian.vals[*s] += local.hess[k];
            }
        }
    }
    Assembly {
        energy,
        gradient,
        hessian,
    }
}

/// Sup norm of the reduced energy gradient at `u`.
pub fn reduced_gradient_norm<D: Density>(mesh: &DomainMesh, density: &D, u: &ScalarField) -> f64 {
    let dofs = DofMap::new(mesh);
    sup_norm(&assemble(mesh, &dofs, density, u).gradient)
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Preconditioned conjugate gradient for `A x = b` starting from zero.
/// `inv_diag = None` gives the unpreconditioned method.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    inv_diag: Option<&[f64]>,
    rel_tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, CgStats), SolverError> {
    let n = a.n;
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((
            x,
            CgStats {
                iterations: 0,
                rel_residual: 0.0,
            },
        ));
    }
    let precondition = |r: &[f64], z: &mut [f64]| match inv_diag {
        Some(d) => z.iter_mut().zip(r.iter().zip(d)).for_each(|(zi, (ri, di))| *zi = ri * di),
        None => z.copy_from_slice(r),
    };
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 0..max_iters {
        a.matvec(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(SolverError::NonPositiveCurvature { curvature });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= rel_tol {
            return Ok((
                x,
                CgStats {
                    iterations: it + 1,
                    rel_residual: rel,
                },
            ));
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolverError::LinearSolveStall {
        residual: rel,
        iterations: max_iters,
    })
}

/// Jacobi-preconditioned CG, retried without preconditioning on stall.
fn newton_direction(h: &CsrMatrix, rhs: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>, SolverError> {
    let max_iters = cfg.cg_iter_factor * h.n.max(1);
    let inv_diag: Vec<f64> = h.diagonal().iter().map(|d| 1.0 / d).collect();
    match conjugate_gradient(h, rhs, Some(&inv_diag), cfg.cg_rel_tol, max_iters) {
        Ok((x, _)) => Ok(x),
        Err(SolverError::LinearSolveStall { .. }) => {
            conjugate_gradient(h, rhs, None, cfg.cg_rel_tol, max_iters).map(|(x, _)| x)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    /// Step length accepted after this row's state; 0 on the final row.
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScalarField,
    pub energy: f64,
    pub grad_norm: f64,
    pub newton_iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Nodal interpolation of the datum.
    #[default]
    Interpolated,
    /// Datum on the boundary, zero inside.
    ZeroExtended,
}

pub fn solve<D: Density>(
    mesh: &DomainMesh,
    density: &D,
    datum: &BoundaryDatum,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let u0 = datum.nodal(mesh)?;
    solve_from(mesh, density, &u0, InitialGuess::Interpolated, cfg)
}

pub fn solve_from<D: Density>(
    mesh: &DomainMesh,
    density: &D,
    u0: &ScalarField,
    init: InitialGuess,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    mesh.check_field(u0)?;
    let dofs = DofMap::new(mesh);
    let mut u = u0.clone();
    if init == InitialGuess::ZeroExtended {
        for &v in &dofs.interior {
            u.0[v] = 0.0;
        }
    }
    newton(mesh, &dofs, density, u, cfg)
}

// Relative size below which an energy decrease is lost in rounding.
const ENERGY_NOISE: f64 = 1e-13;

fn newton<D: Density>(
    mesh: &DomainMesh,
    dofs: &DofMap,
    density: &D,
    mut u: ScalarField,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let mut trace = Vec::new();
    let mut asm = assemble(mesh, dofs, density, &u);
    let mut grad_norm = sup_norm(&asm.gradient);
    let result = |u: ScalarField, asm: &Assembly, grad_norm, iters, converged, trace| SolveResult {
        u,
        energy: asm.energy,
        grad_norm,
        newton_iters: iters,
        converged,
        trace,
    };

    for iter in 0..cfg.max_newton_iters {
        if grad_norm <= cfg.grad_tol {
            trace.push(TraceRow {
                iteration: iter,
                energy: asm.energy,
                grad_norm,
                step: 0.0,
            });
            return Ok(result(u, &asm, grad_norm, iter, true, trace));
        }
        let rhs: Vec<f64> = asm.gradient.iter().map(|g| -g).collect();
        let dir = newton_direction(&asm.hessian, &rhs, cfg)?;
        let slope = dot(&asm.gradient, &dir);
        let x = dofs.gather(&u);
        let mut trial = u.clone();
        let mut step = 1.0;
        let mut accepted = None;
        let noise = ENERGY_NOISE * asm.energy.abs().max(1.0);
        for _ in 0..=cfg.max_backtracks {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            dofs.scatter(&xt, &mut trial);
            let e = energy(mesh, density, &trial);
            if e <= asm.energy + cfg.armijo_slope * step * slope {
                accepted = Some(step);
                break;
            }
            if step == 1.0 && -slope <= noise {
                // Decrease below rounding: accept the full step if it
                // reduces the gradient.
                let a = assemble(mesh, dofs, density, &trial);
                if sup_norm(&a.gradient) < grad_norm {
                    accepted = Some(step);
                    break;
                }
            }
            step *= cfg.backtrack_factor;
        }
        let Some(step) = accepted else {
            trace.push(TraceRow {
                iteration: iter,
                energy: asm.energy,
                grad_norm,
                step: 0.0,
            });
            return Err(SolverError::NoConvergence {
                reason: format!("line search exhausted {} backtracks", cfg.max_backtracks),
                best: Box::new(result(u, &asm, grad_norm, iter, false, trace)),
            });
        };
        trace.push(TraceRow {
            iteration: iter,
            energy: asm.energy,
            grad_norm,
            step,
        });
        u = trial;
        asm = assemble(mesh, dofs, density, &u);
        grad_norm = sup_norm(&asm.gradient);
    }

    let iters = cfg.max_newton_iters;
    trace.push(TraceRow {
        iteration: iters,
        energy: asm.energy,
        grad_norm,
        step: 0.0,
    });
    if grad_norm <= cfg.grad_tol {
        return Ok(result(u, &asm, grad_norm, iters, true, trace));
    }
    Err(SolverError::NoConvergence {
        reason: format!("{iters} Newton iterations exhausted"),
        best: Box::new(result(u, &asm, grad_norm, iters, false, trace)),
    })
}
