//! Linear programs over the complex Hermitian PSD cone.
//!
//! Primal problem handled internally (after slacks are added):
//!
//! ```text
//! minimize    <C, X> + c_l^T x
//! subject to  <A_i, X> + a_i^T x = b_i,   X ⪰ 0,  x ≥ 0
//! ```
//!
//! with `<A, X> = Re Tr(A^H X)`. Inequality constraints receive a
//! nonnegative slack; caller-declared scalar variables share the same
//! nonnegative block. The method is the infeasible-start primal-dual
//! path-following scheme with the HKM direction and Mehrotra's
//! predictor-corrector, run directly in complex arithmetic.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitize, inner, min_eigenvalue};
use crate::{ProblemError, SolveStatus, SolverOutcome, C64};

/// Coefficient matrix of one linear constraint.
#[derive(Debug, Clone)]
pub enum ConstraintMatrix {
    /// Dense Hermitian matrix.
    Dense(DMatrix<C64>),
    /// Elementary selector `E_qq` (picks the `q`-th diagonal entry).
    Diagonal(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `<G, X> + Σ coeff * s_j  (sense)  rhs`.
#[derive(Debug, Clone)]
pub struct SdpConstraint {
    pub matrix: ConstraintMatrix,
    /// Coefficients on the caller's nonnegative scalar variables.
    pub scalars: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `minimize <F, X> + Σ cost_j s_j` over Hermitian `X ⪰ 0` and scalars `s ≥ 0`.
#[derive(Debug, Clone)]
pub struct SemidefiniteProgram {
    pub dim: usize,
    pub objective: DMatrix<C64>,
    pub scalar_costs: Vec<f64>,
    pub constraints: Vec<SdpConstraint>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub matrix: DMatrix<C64>,
    pub scalars: DVector<f64>,
    /// Multipliers of the constraints, in the caller's scaling.
    pub dual: DVector<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    /// Relative primal/dual infeasibility tolerance.
    pub feas_tol: f64,
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    pub max_iters: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            gap_tol: 1e-7,
            max_iters: 120,
        }
    }
}

impl SemidefiniteProgram {
    pub fn constraint_lhs(&self, i: usize, x: &DMatrix<C64>, s: &DVector<f64>) -> f64 {
        let c = &self.constraints[i];
        let mat = match &c.matrix {
            ConstraintMatrix::Dense(g) => inner(g, x),
            ConstraintMatrix::Diagonal(q) => x[(*q, *q)].re,
        };
        mat + c.scalars.iter().map(|&(j, v)| v * s[j]).sum::<f64>()
    }

    /// Largest constraint violation (absolute, in the caller's units).
    pub fn max_violation(&self, x: &DMatrix<C64>, s: &DVector<f64>) -> f64 {
        (0..self.constraints.len())
            .map(|i| {
                let lhs = self.constraint_lhs(i, x, s);
                let rhs = self.constraints[i].rhs;
                match self.constraints[i].sense {
                    Sense::Le => lhs - rhs,
                    Sense::Ge => rhs - lhs,
                    Sense::Eq => (lhs - rhs).abs(),
                }
            })
            .fold(0.0f64, f64::max)
    }

    pub fn objective_value(&self, x: &DMatrix<C64>, s: &DVector<f64>) -> f64 {
        inner(&self.objective, x) + self.scalar_costs.iter().zip(s.iter()).map(|(c, v)| c * v).sum::<f64>()
    }

    fn validate(&self) -> Result<(), ProblemError> {
        let n = self.dim;
        if n == 0 {
            return Err(ProblemError::Invalid("SDP dimension must be positive".into()));
        }
        if self.objective.nrows() != n || self.objective.ncols() != n {
            return Err(ProblemError::Dimension {
                what: "SDP objective",
                expected: n,
                got: self.objective.nrows(),
            });
        }
        let ns = self.scalar_costs.len();
        for c in &self.constraints {
            match &c.matrix {
                ConstraintMatrix::Dense(g) if g.nrows() != n || g.ncols() != n => {
                    return Err(ProblemError::Dimension {
                        what: "SDP constraint matrix",
                        expected: n,
                        got: g.nrows(),
                    })
                }
                ConstraintMatrix::Diagonal(q) if *q >= n => {
                    return Err(ProblemError::Invalid(format!(
                        "diagonal selector {q} out of range for dimension {n}"
                    )))
                }
                _ => {}
            }
            if let Some(&(j, _)) = c.scalars.iter().find(|(j, _)| *j >= ns) {
                return Err(ProblemError::Invalid(format!("scalar variable {j} out of range")));
            }
            if !c.rhs.is_finite() {
                return Err(ProblemError::Invalid("non-finite right-hand side".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum RowMat {
    Dense(DMatrix<C64>),
    Diag(usize, f64),
}

#[derive(Debug, Clone)]
struct Row {
    mat: RowMat,
    lp: Vec<(usize, f64)>,
    b: f64,
}

/// Standard-form data after slack insertion and scaling.
struct Standard {
    n: usize,
    nl: usize,
    c: DMatrix<C64>,
    cl: DVector<f64>,
    rows: Vec<Row>,
    row_scale: Vec<f64>,
    obj_scale: f64,
}

impl Standard {
    fn build(p: &SemidefiniteProgram) -> Standard {
        let n = p.dim;
        let ns = p.scalar_costs.len();
        let nslack = p.constraints.iter().filter(|c| c.sense != Sense::Eq).count();
        let nl = ns + nslack;
        let mut rows = Vec::with_capacity(p.constraints.len());
        let mut row_scale = Vec::with_capacity(p.constraints.len());
        let mut next_slack = ns;
        for c in &p.constraints {
            let mut lp = c.scalars.clone();
            match c.sense {
                Sense::Le => {
                    lp.push((next_slack, 1.0));
                    next_slack += 1;
                }
                Sense::Ge => {
                    lp.push((next_slack, -1.0));
                    next_slack += 1;
                }
                Sense::Eq => {}
            }
            let (mat, mat_norm2) = match &c.matrix {
                ConstraintMatrix::Dense(g) => {
                    let h = hermitize(g);
                    let nn = h.norm_squared();
                    (RowMat::Dense(h), nn)
                }
                ConstraintMatrix::Diagonal(q) => (RowMat::Diag(*q, 1.0), 1.0),
            };
            let lp_norm2: f64 = lp.iter().map(|(_, v)| v * v).sum();
            let mut s = (mat_norm2 + lp_norm2).sqrt();
            if !(s > 0.0) {
                s = 1.0;
            }
            let mat = match mat {
                RowMat::Dense(h) => RowMat::Dense(h / C64::new(s, 0.0)),
                RowMat::Diag(q, v) => RowMat::Diag(q, v / s),
            };
            rows.push(Row {
                mat,
                lp: lp.into_iter().map(|(j, v)| (j, v / s)).collect(),
                b: c.rhs / s,
            });
            row_scale.push(s);
        }
        let c_herm = hermitize(&p.objective);
        let mut cl = DVector::zeros(nl);
        for (j, v) in p.scalar_costs.iter().enumerate() {
            cl[j] = *v;
        }
        let mut obj_scale = c_herm.norm().max(cl.norm());
        if !(obj_scale > 0.0) {
            obj_scale = 1.0;
        }
        Standard {
            n,
            nl,
            c: c_herm / C64::new(obj_scale, 0.0),
            cl: cl / obj_scale,
            rows,
            row_scale,
            obj_scale,
        }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn b(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.rows.iter().map(|r| r.b))
    }

    /// `A(X, x)`.
    fn apply(&self, x: &DMatrix<C64>, xl: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.rows.iter().map(|r| {
                let mat = match &r.mat {
                    RowMat::Dense(a) => inner(a, x),
                    RowMat::Diag(q, v) => v * x[(*q, *q)].re,
                };
                mat + r.lp.iter().map(|&(j, v)| v * xl[j]).sum::<f64>()
            }),
        )
    }

    /// `A^*(y)`, returned as (matrix part, scalar part).
    fn adjoint(&self, y: &DVector<f64>) -> (DMatrix<C64>, DVector<f64>) {
        let mut mat = DMatrix::zeros(self.n, self.n);
        let mut lp = DVector::zeros(self.nl);
        for (r, &yi) in self.rows.iter().zip(y.iter()) {
            match &r.mat {
                RowMat::Dense(a) => mat += a * C64::new(yi, 0.0),
                RowMat::Diag(q, v) => mat[(*q, *q)] += C64::new(yi * v, 0.0),
            }
            for &(j, v) in &r.lp {
                lp[j] += yi * v;
            }
        }
        (mat, lp)
    }

    /// Schur complement `M_ij = Re Tr(A_i X A_j Z^{-1}) + Σ a_il a_jl x_l / z_l`.
    fn schur(&self, x: &DMatrix<C64>, zinv: &DMatrix<C64>, ratio: &DVector<f64>) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        // X A_j Z^{-1} for the dense rows.
        let dense: Vec<Option<DMatrix<C64>>> = self
            .rows
            .iter()
            .map(|r| match &r.mat {
                RowMat::Dense(a) => Some(x * a * zinv),
                RowMat::Diag(..) => None,
            })
            .collect();
        for j in 0..m {
            for i in 0..=j {
                let v = match (&self.rows[i].mat, &self.rows[j].mat) {
                    (RowMat::Dense(ai), RowMat::Dense(_)) => {
                        let g = dense[j].as_ref().expect("dense product");
                        let mut acc = 0.0;
                        for r in 0..self.n {
                            for c in 0..self.n {
                                acc += (ai[(r, c)] * g[(c, r)]).re;
                            }
                        }
                        acc
                    }
                    (RowMat::Diag(p, vi), RowMat::Dense(_)) => {
                        let g = dense[j].as_ref().expect("dense product");
                        vi * g[(*p, *p)].re
                    }
                    (RowMat::Dense(_), RowMat::Diag(p, vj)) => {
                        let g = dense[i].as_ref().expect("dense product");
                        vj * g[(*p, *p)].re
                    }
                    (RowMat::Diag(p, vi), RowMat::Diag(q, vj)) => {
                        vi * vj * (x[(*p, *q)] * zinv[(*q, *p)]).re
                    }
                };
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        for (i, ri) in self.rows.iter().enumerate() {
            if ri.lp.is_empty() {
                continue;
            }
            for (j, rj) in self.rows.iter().enumerate() {
                let mut acc = 0.0;
                for &(a, va) in &ri.lp {
                    for &(b, vb) in &rj.lp {
                        if a == b {
                            acc += va * vb * ratio[a];
                        }
                    }
                }
                out[(i, j)] += acc;
            }
        }
        out
    }
}

/// Largest `alpha ∈ (0, ∞]` with `X + alpha dX ⪰ 0`, given `chol_l` with `X = L L^H`.
fn psd_step(chol_l: &DMatrix<C64>, dx: &DMatrix<C64>) -> f64 {
    let Some(y) = chol_l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(w) = chol_l.solve_lower_triangular(&y.adjoint()) else {
        return 0.0;
    };
    let lmin = min_eigenvalue(&w);
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

fn lp_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = m.diagonal().amax().max(1e-300);
    let mut shift = 0.0;
    for _ in 0..8 {
        let mut a = m.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += shift;
        }
        if let Some(ch) = a.cholesky() {
            let d = ch.solve(rhs);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
    }
    m.clone().lu().solve(rhs)
}

struct Direction {
    dx: DMatrix<C64>,
    dxl: DVector<f64>,
    dy: DVector<f64>,
    dz: DMatrix<C64>,
    dzl: DVector<f64>,
}

/// Solve a [`SemidefiniteProgram`].
pub fn solve_sdp(
    p: &SemidefiniteProgram,
    opts: &SdpOptions,
) -> Result<SolverOutcome<SdpSolution>, ProblemError> {
    p.validate()?;
    let st = Standard::build(p);
    let n = st.n;
    let nl = st.nl;
    let m = st.m();
    let b = st.b();
    let ns = p.scalar_costs.len();
    let big_n = (n + nl) as f64;

    let finish = |status: SolveStatus, x: &DMatrix<C64>, xl: &DVector<f64>, y: &DVector<f64>, iters| {
        let scalars = DVector::from_iterator(ns, xl.iter().take(ns).copied());
        let dual = DVector::from_iterator(
            m,
            y.iter().zip(st.row_scale.iter()).map(|(v, s)| v * st.obj_scale / s),
        );
        let matrix = hermitize(x);
        let objective = p.objective_value(&matrix, &scalars);
        SolverOutcome {
            status,
            solution: SdpSolution {
                matrix,
                scalars,
                dual,
            },
            objective,
            iterations: iters,
        }
    };

    if m == 0 {
        // Without constraints the optimum is X = 0 if C ⪰ 0 and unbounded otherwise.
        let status = if min_eigenvalue(&st.c) >= -1e-12 && st.cl.iter().all(|v| *v >= 0.0) {
            SolveStatus::Optimal
        } else {
            SolveStatus::NumericalFailure
        };
        return Ok(finish(status, &DMatrix::zeros(n, n), &DVector::zeros(nl), &DVector::zeros(0), 0));
    }

    let max_b_ratio = st
        .rows
        .iter()
        .map(|r| (1.0 + r.b.abs()) / 2.0)
        .fold(0.0f64, f64::max);
    let xi = 10.0f64.max((n as f64).sqrt()).max(max_b_ratio * (n as f64).sqrt());
    let eta = 10.0f64.max((n as f64).sqrt()).max(1.0 + st.c.norm());
    let mut x = DMatrix::<C64>::identity(n, n) * C64::new(xi, 0.0);
    let mut xl = DVector::from_element(nl, xi);
    let mut z = DMatrix::<C64>::identity(n, n) * C64::new(eta, 0.0);
    let mut zl = DVector::from_element(nl, eta);
    let mut y = DVector::zeros(m);

    let b_norm = b.norm();
    let c_norm = st.c.norm().max(st.cl.norm());
    let mut stalls = 0;

    for iter in 0..opts.max_iters {
        let ax = st.apply(&x, &xl);
        let rp = &b - &ax;
        let (aty, atyl) = st.adjoint(&y);
        let rd = hermitize(&(&st.c - &z - &aty));
        let rdl = &st.cl - &zl - &atyl;
        let pobj = inner(&st.c, &x) + st.cl.dot(&xl);
        let dobj = b.dot(&y);
        let gap = inner(&x, &z) + xl.dot(&zl);
        let mu = gap / big_n;
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = (rd.norm_squared() + rdl.norm_squared()).sqrt() / (1.0 + c_norm);
        let relgap = gap / (1.0 + pobj.abs() + dobj.abs());
        if pinf <= opts.feas_tol && dinf <= opts.feas_tol && relgap <= opts.gap_tol {
            return Ok(finish(SolveStatus::Optimal, &x, &xl, &y, iter));
        }

        // Farkas certificate of primal infeasibility: -A^*(y) ⪰ 0 with b^T y > 0.
        if dobj > 0.0 {
            let cert_mat = min_eigenvalue(&(-&aty));
            let cert_lp = (-&atyl).iter().copied().fold(f64::INFINITY, f64::min);
            let ynorm = y.norm().max(1e-300);
            if dobj / ynorm > 1e-6 && cert_mat.min(cert_lp) >= -1e-9 * dobj {
                return Ok(finish(SolveStatus::Infeasible, &x, &xl, &y, iter));
            }
        }

        let Some(zchol) = z.clone().cholesky() else {
            return Ok(finish(SolveStatus::NumericalFailure, &x, &xl, &y, iter));
        };
        let zinv = zchol.inverse();
        let Some(xchol) = x.clone().cholesky() else {
            return Ok(finish(SolveStatus::NumericalFailure, &x, &xl, &y, iter));
        };
        let xl_chol = xchol.l();
        let zl_chol = zchol.l();
        let ratio = xl.component_div(&zl);
        let schur = st.schur(&x, &zinv, &ratio);
        let x_rd_zinv = &x * &rd * &zinv;

        let direction = |rc: &DMatrix<C64>, rcl: &DVector<f64>| -> Option<Direction> {
            let lhs_mat = rc - &x_rd_zinv;
            let lhs_lp = rcl - xl.component_mul(&rdl).component_div(&zl);
            let h = &rp - st.apply(&lhs_mat, &lhs_lp);
            let dy = solve_spd(&schur, &h)?;
            let (atdy, atdyl) = st.adjoint(&dy);
            let dz = hermitize(&(&rd - &atdy));
            let dzl = &rdl - &atdyl;
            let dx = hermitize(&(rc - &x * &dz * &zinv));
            let dxl = rcl - xl.component_mul(&dzl).component_div(&zl);
            Some(Direction { dx, dxl, dy, dz, dzl })
        };
        let steps = |d: &Direction, gamma: f64| {
            let ap = psd_step(&xl_chol, &d.dx).min(lp_step(&xl, &d.dxl));
            let ad = psd_step(&zl_chol, &d.dz).min(lp_step(&zl, &d.dzl));
            ((gamma * ap).min(1.0), (gamma * ad).min(1.0))
        };

        // Predictor.
        let rc_aff = -&x;
        let rcl_aff = -&xl;
        let Some(aff) = direction(&rc_aff, &rcl_aff) else {
            return Ok(finish(SolveStatus::NumericalFailure, &x, &xl, &y, iter));
        };
        let (ap, ad) = steps(&aff, 1.0);
        let gap_aff = inner(&(&x + &aff.dx * C64::new(ap, 0.0)), &(&z + &aff.dz * C64::new(ad, 0.0)))
            + (&xl + &aff.dxl * ap).dot(&(&zl + &aff.dzl * ad));
        let sigma = (gap_aff / gap).clamp(0.0, 1.0).powi(3).max(if iter < 2 { 0.1 } else { 0.0 });

        // Corrector.
        let second = hermitize(&(&aff.dx * &aff.dz * &zinv));
        let rc = &zinv * C64::new(sigma * mu, 0.0) - &x - &second;
        let rcl = DVector::from_fn(nl, |i, _| {
            sigma * mu / zl[i] - xl[i] - aff.dxl[i] * aff.dzl[i] / zl[i]
        });
        let Some(dir) = direction(&rc, &rcl) else {
            return Ok(finish(SolveStatus::NumericalFailure, &x, &xl, &y, iter));
        };
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let (ap, ad) = steps(&dir, gamma);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls > 3 {
                return Ok(finish(SolveStatus::NumericalFailure, &x, &xl, &y, iter));
            }
        }
        x = hermitize(&(&x + &dir.dx * C64::new(ap, 0.0)));
        xl += &dir.dxl * ap;
        y += &dir.dy * ad;
        z = hermitize(&(&z + &dir.dz * C64::new(ad, 0.0)));
        zl += &dir.dzl * ad;
    }
    Ok(finish(SolveStatus::MaxIters, &x, &xl, &y, opts.max_iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{leading_eigenpair, trace};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn trace_with_unit_corner() {
        // minimize Tr(A) s.t. A_11 = 1 → A = E_11.
        let p = SemidefiniteProgram {
            dim: 2,
            objective: DMatrix::identity(2, 2),
            scalar_costs: vec![],
            constraints: vec![SdpConstraint {
                matrix: ConstraintMatrix::Diagonal(0),
                scalars: vec![],
                sense: Sense::Eq,
                rhs: 1.0,
            }],
        };
        let out = solve_sdp(&p, &SdpOptions::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective - 1.0).abs() < 1e-6);
        assert!((out.solution.matrix[(0, 0)].re - 1.0).abs() < 1e-6);
        assert!(out.solution.matrix[(1, 1)].re.abs() < 1e-6);
    }

    #[test]
    fn min_eigenvalue_characterization() {
        let cmat = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(4.0, 0.0),
                c(1.0, 1.0),
                c(0.0, -0.5),
                c(1.0, -1.0),
                c(3.0, 0.0),
                c(0.2, 0.0),
                c(0.0, 0.5),
                c(0.2, 0.0),
                c(2.0, 0.0),
            ],
        );
        let p = SemidefiniteProgram {
            dim: 3,
            objective: cmat.clone(),
            scalar_costs: vec![],
            constraints: vec![SdpConstraint {
                matrix: ConstraintMatrix::Dense(DMatrix::identity(3, 3)),
                scalars: vec![],
                sense: Sense::Eq,
                rhs: 1.0,
            }],
        };
        let out = solve_sdp(&p, &SdpOptions::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        let lmin = min_eigenvalue(&cmat);
        assert!((out.objective - lmin).abs() < 1e-6, "{} vs {}", out.objective, lmin);
        let (top, _) = leading_eigenpair(&out.solution.matrix);
        assert!((top - trace(&out.solution.matrix)).abs() < 1e-5);
    }

    #[test]
    fn inequality_and_scalar_variables() {
        // minimize s subject to X_00 + s >= 2, X_00 <= 0.5 → s = 1.5.
        let p = SemidefiniteProgram {
            dim: 2,
            objective: DMatrix::zeros(2, 2),
            scalar_costs: vec![1.0],
            constraints: vec![
                SdpConstraint {
                    matrix: ConstraintMatrix::Diagonal(0),
                    scalars: vec![(0, 1.0)],
                    sense: Sense::Ge,
                    rhs: 2.0,
                },
                SdpConstraint {
                    matrix: ConstraintMatrix::Diagonal(0),
                    scalars: vec![],
                    sense: Sense::Le,
                    rhs: 0.5,
                },
            ],
        };
        let out = solve_sdp(&p, &SdpOptions::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.solution.scalars[0] - 1.5).abs() < 1e-6);
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        // X_00 <= -1 with X ⪰ 0.
        let p = SemidefiniteProgram {
            dim: 2,
            objective: DMatrix::identity(2, 2),
            scalar_costs: vec![],
            constraints: vec![SdpConstraint {
                matrix: ConstraintMatrix::Diagonal(0),
                scalars: vec![],
                sense: Sense::Le,
                rhs: -1.0,
            }],
        };
        let out = solve_sdp(&p, &SdpOptions::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn rejects_bad_selector() {
        let p = SemidefiniteProgram {
            dim: 2,
            objective: DMatrix::identity(2, 2),
            scalar_costs: vec![],
            constraints: vec![SdpConstraint {
                matrix: ConstraintMatrix::Diagonal(5),
                scalars: vec![],
                sense: Sense::Eq,
                rhs: 1.0,
            }],
        };
        assert!(solve_sdp(&p, &SdpOptions::default()).is_err());
    }
}
