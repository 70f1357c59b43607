//! Concave maximization with convex quadratic constraints.
//!
//! The decision vector `a ∈ C^n` is handled in its real representation
//! `x = [Re a; Im a]`. Every quadratic `a^H M a + 2 Re(c^H a) + d` becomes
//! `x^T S x + 2 w^T x + d`, so gradients and Hessians of the barrier are
//! plain real quantities even for the non-holomorphic `|a_q|^2` and `ln(·)`
//! terms.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{from_real, real_form, to_real};
use crate::{ProblemError, SolveStatus, SolverOutcome, C64};

/// Concave quadratic `constant + 2 Re(linear^H a) - a^H curvature a` with a
/// Hermitian PSD `curvature`.
#[derive(Debug, Clone)]
pub struct ConcaveQuadratic {
    pub curvature: DMatrix<C64>,
    pub linear: DVector<C64>,
    pub constant: f64,
}

impl ConcaveQuadratic {
    pub fn zero(dim: usize) -> Self {
        Self {
            curvature: DMatrix::zeros(dim, dim),
            linear: DVector::zeros(dim),
            constant: 0.0,
        }
    }

    pub fn eval(&self, a: &DVector<C64>) -> f64 {
        let quad = (a.adjoint() * &self.curvature * a)[(0, 0)].re;
        let lin = (self.linear.adjoint() * a)[(0, 0)].re;
        self.constant + 2.0 * lin - quad
    }
}

/// One concave term of the objective.
#[derive(Debug, Clone)]
pub enum ObjectiveTerm {
    Quadratic(ConcaveQuadratic),
    /// `weight * ln(arg(a))`, `weight > 0`; the term is `-inf` where `arg <= 0`.
    Log { weight: f64, arg: ConcaveQuadratic },
}

impl ObjectiveTerm {
    pub fn eval(&self, a: &DVector<C64>) -> f64 {
        match self {
            ObjectiveTerm::Quadratic(q) => q.eval(a),
            ObjectiveTerm::Log { weight, arg } => {
                let v = arg.eval(a);
                if v > 0.0 {
                    weight * v.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

/// `a^H curvature a + 2 Re(linear^H a) <= bound`, `curvature` Hermitian PSD.
#[derive(Debug, Clone)]
pub struct QuadraticConstraint {
    pub curvature: DMatrix<C64>,
    pub linear: DVector<C64>,
    pub bound: f64,
}

impl QuadraticConstraint {
    pub fn lhs(&self, a: &DVector<C64>) -> f64 {
        let quad = (a.adjoint() * &self.curvature * a)[(0, 0)].re;
        let lin = (self.linear.adjoint() * a)[(0, 0)].re;
        quad + 2.0 * lin
    }
}

/// `maximize Σ terms(a)` subject to quadratic constraints and `|a_q| <= u_q`.
///
/// A bound `u_q <= 0` pins `a_q = 0`; `u_q = +inf` leaves the entry free.
#[derive(Debug, Clone)]
pub struct ConvexQuadraticProgram {
    pub dim: usize,
    pub objective: Vec<ObjectiveTerm>,
    pub constraints: Vec<QuadraticConstraint>,
    pub modulus_bounds: Vec<f64>,
}

impl ConvexQuadraticProgram {
    pub fn objective_value(&self, a: &DVector<C64>) -> f64 {
        self.objective.iter().map(|t| t.eval(a)).sum()
    }

    /// Largest violation over all constraints and modulus bounds (0 when feasible).
    pub fn max_violation(&self, a: &DVector<C64>) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            worst = worst.max(c.lhs(a) - c.bound);
        }
        for (q, &u) in self.modulus_bounds.iter().enumerate() {
            worst = worst.max(a[q].norm() - u.max(0.0));
        }
        worst
    }

    fn validate(&self) -> Result<(), ProblemError> {
        let n = self.dim;
        let check = |what, m: &DMatrix<C64>, c: &DVector<C64>| {
            if m.nrows() != n || m.ncols() != n {
                return Err(ProblemError::Dimension {
                    what,
                    expected: n,
                    got: m.nrows(),
                });
            }
            if c.len() != n {
                return Err(ProblemError::Dimension {
                    what,
                    expected: n,
                    got: c.len(),
                });
            }
            Ok(())
        };
        for t in &self.objective {
            match t {
                ObjectiveTerm::Quadratic(q) => check("objective term", &q.curvature, &q.linear)?,
                ObjectiveTerm::Log { weight, arg } => {
                    check("objective log term", &arg.curvature, &arg.linear)?;
                    if !(*weight > 0.0) {
                        return Err(ProblemError::Invalid(format!(
                            "log term weight must be positive, got {weight}"
                        )));
                    }
                }
            }
        }
        for c in &self.constraints {
            check("constraint", &c.curvature, &c.linear)?;
        }
        if self.modulus_bounds.len() != n {
            return Err(ProblemError::Dimension {
                what: "modulus bounds",
                expected: n,
                got: self.modulus_bounds.len(),
            });
        }
        if self.modulus_bounds.iter().any(|u| u.is_nan()) {
            return Err(ProblemError::Invalid("NaN modulus bound".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QcqpOptions {
    /// Target barrier duality-gap bound, relative to the objective scale.
    pub tol: f64,
    /// Cap on the total number of Newton steps.
    pub max_newton: usize,
}

impl Default for QcqpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton: 3000,
        }
    }
}

/// `x^T S x + 2 w^T x + d`.
#[derive(Debug, Clone)]
struct RealQuad {
    s: DMatrix<f64>,
    w: DVector<f64>,
    d: f64,
}

impl RealQuad {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let sx = &self.s * x;
        x.dot(&sx) + 2.0 * self.w.dot(x) + self.d
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.s * x + &self.w) * 2.0
    }

    fn scaled(&self, k: f64) -> RealQuad {
        RealQuad {
            s: &self.s * k,
            w: &self.w * k,
            d: self.d * k,
        }
    }

    /// Append one trailing variable with linear coefficient `lin` (value gains `lin * s`).
    fn extended(&self, lin: f64) -> RealQuad {
        let n = self.w.len();
        let mut s = DMatrix::zeros(n + 1, n + 1);
        s.view_mut((0, 0), (n, n)).copy_from(&self.s);
        let mut w = DVector::zeros(n + 1);
        w.rows_mut(0, n).copy_from(&self.w);
        w[n] = 0.5 * lin;
        RealQuad { s, w, d: self.d }
    }
}

#[derive(Debug, Clone)]
enum Term {
    Quad(RealQuad),
    Log(f64, RealQuad),
}

/// Real-form barrier problem: maximize Σ terms s.t. cons(x) <= 0 and moduli.
#[derive(Debug, Clone)]
struct Barrier {
    n: usize,
    terms: Vec<Term>,
    cons: Vec<RealQuad>,
    moduli: Vec<(usize, usize, f64)>,
}

struct Eval {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

impl Barrier {
    fn objective(&self, x: &DVector<f64>) -> f64 {
        let mut f = 0.0;
        for t in &self.terms {
            match t {
                Term::Quad(q) => f += q.value(x),
                Term::Log(w, q) => {
                    let v = q.value(x);
                    if v <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    f += w * v.ln();
                }
            }
        }
        f
    }

    fn objective_grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.n);
        for t in &self.terms {
            match t {
                Term::Quad(q) => g += q.grad(x),
                Term::Log(w, q) => {
                    let v = q.value(x);
                    g += q.grad(x) * (w / v);
                }
            }
        }
        g
    }

    fn strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.cons.iter().all(|c| c.value(x) < 0.0)
            && self
                .moduli
                .iter()
                .all(|&(i, j, u2)| x[i] * x[i] + x[j] * x[j] < u2)
            && self.objective(x).is_finite()
    }

    fn barrier_count(&self) -> usize {
        self.cons.len() + self.moduli.len()
    }

    /// Value of `-t F(x) - Σ ln(-g_i) - Σ ln(u² - |x_q|²)`; `None` outside the domain.
    fn value(&self, x: &DVector<f64>, t: f64) -> Option<f64> {
        let f = self.objective(x);
        if !f.is_finite() {
            return None;
        }
        let mut v = -t * f;
        for c in &self.cons {
            let g = c.value(x);
            if g >= 0.0 {
                return None;
            }
            v -= (-g).ln();
        }
        for &(i, j, u2) in &self.moduli {
            let slack = u2 - x[i] * x[i] - x[j] * x[j];
            if slack <= 0.0 {
                return None;
            }
            v -= slack.ln();
        }
        Some(v)
    }

    fn eval(&self, x: &DVector<f64>, t: f64) -> Option<Eval> {
        let value = self.value(x, t)?;
        let n = self.n;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for term in &self.terms {
            match term {
                Term::Quad(q) => {
                    grad -= q.grad(x) * t;
                    hess -= &q.s * (2.0 * t);
                }
                Term::Log(w, q) => {
                    let v = q.value(x);
                    let gq = q.grad(x);
                    grad -= &gq * (t * w / v);
                    hess -= &q.s * (2.0 * t * w / v);
                    hess.ger(t * w / (v * v), &gq, &gq, 1.0);
                }
            }
        }
        for c in &self.cons {
            let g = c.value(x);
            let gc = c.grad(x);
            grad -= &gc * (1.0 / g);
            hess += &c.s * (-2.0 / g);
            hess.ger(1.0 / (g * g), &gc, &gc, 1.0);
        }
        for &(i, j, u2) in &self.moduli {
            let slack = u2 - x[i] * x[i] - x[j] * x[j];
            grad[i] += 2.0 * x[i] / slack;
            grad[j] += 2.0 * x[j] / slack;
            let inv = 2.0 / slack;
            let inv2 = 4.0 / (slack * slack);
            hess[(i, i)] += inv + inv2 * x[i] * x[i];
            hess[(j, j)] += inv + inv2 * x[j] * x[j];
            hess[(i, j)] += inv2 * x[i] * x[j];
            hess[(j, i)] += inv2 * x[i] * x[j];
        }
        Some(Eval { value, grad, hess })
    }
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = hess.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..12 {
        let mut h = hess.clone();
        if shift > 0.0 {
            for i in 0..h.nrows() {
                h[(i, i)] += shift;
            }
        }
        if let Some(ch) = h.cholesky() {
            let d = ch.solve(&(-grad));
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 100.0 };
    }
    None
}

enum Centering {
    Centered,
    Stalled,
    Budget,
    Failed,
}

/// Damped Newton minimization of the barrier at fixed `t`.
fn center(
    b: &Barrier,
    x: &mut DVector<f64>,
    t: f64,
    steps: &mut usize,
    max_steps: usize,
    mut stop: impl FnMut(&DVector<f64>) -> bool,
) -> Centering {
    loop {
        if *steps >= max_steps {
            return Centering::Budget;
        }
        let Some(ev) = b.eval(x, t) else {
            return Centering::Failed;
        };
        let Some(dir) = newton_direction(&ev.hess, &ev.grad) else {
            return Centering::Failed;
        };
        let slope = ev.grad.dot(&dir);
        let decrement = -slope;
        // Below this level the barrier value itself is dominated by rounding.
        if decrement <= 2e-12f64.max(1e-14 * ev.value.abs()) {
            return Centering::Centered;
        }
        *steps += 1;
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-14 {
            let trial = &*x + &dir * alpha;
            if trial == *x {
                break;
            }
            if let Some(v) = b.value(&trial, t) {
                if v <= ev.value + 0.25 * alpha * slope {
                    *x = trial;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            return if decrement < 1e-6 {
                Centering::Centered
            } else {
                Centering::Stalled
            };
        }
        if stop(x) {
            return Centering::Centered;
        }
    }
}

struct BarrierRun {
    x: DVector<f64>,
    steps: usize,
    status: SolveStatus,
}

/// Log-barrier path following from a strictly feasible `x0`.
fn barrier_solve(
    b: &Barrier,
    x0: DVector<f64>,
    tol: f64,
    max_steps: usize,
    mut stop: impl FnMut(&DVector<f64>) -> bool,
) -> BarrierRun {
    let m = b.barrier_count().max(1) as f64;
    let mut x = x0;
    let mut steps = 0;
    let mut t = 1.0;
    let mu = 12.0;
    loop {
        match center(b, &mut x, t, &mut steps, max_steps, &mut stop) {
            Centering::Budget => {
                return BarrierRun {
                    x,
                    steps,
                    status: SolveStatus::MaxIters,
                }
            }
            Centering::Failed => {
                return BarrierRun {
                    x,
                    steps,
                    status: SolveStatus::NumericalFailure,
                }
            }
            Centering::Centered | Centering::Stalled => {}
        }
        if stop(&x) {
            break;
        }
        if b.barrier_count() == 0 || m / t <= tol {
            break;
        }
        t *= mu;
    }
    BarrierRun {
        x,
        steps,
        status: SolveStatus::Optimal,
    }
}

fn real_quad(m: &DMatrix<C64>, c: &DVector<C64>, d: f64, free: &[usize]) -> RealQuad {
    let k = free.len();
    let sub_m = DMatrix::from_fn(k, k, |i, j| m[(free[i], free[j])]);
    let sub_c = DVector::from_fn(k, |i, _| c[free[i]]);
    RealQuad {
        s: real_form(&sub_m),
        w: to_real(&sub_c),
        d,
    }
}

fn shrink_candidates() -> [f64; 9] {
    [1.0, 1.0 - 1e-9, 1.0 - 1e-7, 1.0 - 1e-5, 1.0 - 1e-3, 0.99, 0.9, 0.5, 0.0]
}

/// Solve a [`ConvexQuadraticProgram`].
///
/// `start`, when given, should be feasible; it is pulled slightly toward the
/// origin to obtain a strictly interior point. If neither it nor the origin
/// is strictly feasible, a phase-I problem is solved first and
/// [`SolveStatus::Infeasible`] is reported when it fails. The returned
/// objective never falls below the objective at a feasible `start`.
pub fn solve_qcqp(
    p: &ConvexQuadraticProgram,
    start: Option<&DVector<C64>>,
    opts: &QcqpOptions,
) -> Result<SolverOutcome<DVector<C64>>, ProblemError> {
    p.validate()?;
    if let Some(s) = start {
        if s.len() != p.dim {
            return Err(ProblemError::Dimension {
                what: "start point",
                expected: p.dim,
                got: s.len(),
            });
        }
    }
    let free: Vec<usize> = (0..p.dim).filter(|&q| p.modulus_bounds[q] > 0.0).collect();
    let k = free.len();
    let embed = |x: &DVector<f64>| {
        let sub = from_real(x);
        let mut a = DVector::zeros(p.dim);
        for (i, &q) in free.iter().enumerate() {
            a[q] = sub[i];
        }
        a
    };

    let mut terms = Vec::with_capacity(p.objective.len());
    for t in &p.objective {
        match t {
            ObjectiveTerm::Quadratic(q) => {
                terms.push(Term::Quad(real_quad(&q.curvature, &q.linear, q.constant, &free).scaled_curv()))
            }
            ObjectiveTerm::Log { weight, arg } => terms.push(Term::Log(
                *weight,
                real_quad(&arg.curvature, &arg.linear, arg.constant, &free).scaled_curv(),
            )),
        }
    }
    let cons: Vec<RealQuad> = p
        .constraints
        .iter()
        .map(|c| real_quad(&c.curvature, &c.linear, -c.bound, &free))
        .collect();
    let moduli: Vec<(usize, usize, f64)> = free
        .iter()
        .enumerate()
        .filter(|(_, &q)| p.modulus_bounds[q].is_finite())
        .map(|(i, &q)| (i, k + i, p.modulus_bounds[q] * p.modulus_bounds[q]))
        .collect();
    let mut barrier = Barrier {
        n: 2 * k,
        terms,
        cons,
        moduli,
    };

    // Pinned entries of the start are dropped; the rest is restricted to `free`.
    let x_start = match start {
        Some(s) => to_real(&DVector::from_fn(k, |i, _| s[free[i]])),
        None => DVector::zeros(2 * k),
    };
    let start_point = start.map(|_| embed(&x_start));
    let start_value = start_point
        .as_ref()
        .filter(|a| p.max_violation(a) <= 0.0)
        .map(|a| p.objective_value(a))
        .filter(|v| v.is_finite());

    let mut x0 = None;
    for theta in shrink_candidates() {
        let cand = &x_start * theta;
        if barrier.strictly_feasible(&cand) {
            x0 = Some(cand);
            break;
        }
    }
    let mut total_steps = 0;
    let x0 = match x0 {
        Some(x) => x,
        None => match phase_one(&barrier, &x_start, opts, &mut total_steps) {
            Some(x) => x,
            None => {
                return Ok(SolverOutcome {
                    status: SolveStatus::Infeasible,
                    solution: embed(&x_start),
                    objective: f64::NEG_INFINITY,
                    iterations: total_steps,
                })
            }
        },
    };

    // Normalize the objective so the barrier parameter schedule is scale free.
    let f0 = barrier.objective(&x0);
    let g0 = barrier.objective_grad(&x0);
    let radius = barrier
        .moduli
        .iter()
        .map(|m| m.2.sqrt())
        .fold(0.0f64, f64::max)
        .max(x0.amax())
        .max(1.0);
    let mut scale = f0.abs().max(g0.norm() * radius);
    if !(scale.is_finite() && scale > 1e-300) {
        scale = 1.0;
    }
    barrier.terms = barrier
        .terms
        .iter()
        .map(|t| match t {
            Term::Quad(q) => Term::Quad(q.scaled(1.0 / scale)),
            Term::Log(w, q) => Term::Log(w / scale, q.clone()),
        })
        .collect();

    let run = barrier_solve(&barrier, x0, opts.tol, opts.max_newton, |_| false);
    total_steps += run.steps;
    let mut a = embed(&run.x);
    let mut objective = p.objective_value(&a);
    if let (Some(v), Some(s)) = (start_value, start_point) {
        if v > objective {
            a = s;
            objective = v;
        }
    }
    Ok(SolverOutcome {
        status: run.status,
        solution: a,
        objective,
        iterations: total_steps,
    })
}

impl RealQuad {
    /// Concave quadratics are stored as `-a^H M a + ...`; flip the curvature sign.
    fn scaled_curv(mut self) -> RealQuad {
        self.s *= -1.0;
        self
    }
}

/// Find a strictly feasible point by minimizing the largest normalized violation.
fn phase_one(
    b: &Barrier,
    x_start: &DVector<f64>,
    opts: &QcqpOptions,
    steps: &mut usize,
) -> Option<DVector<f64>> {
    let n = b.n;
    let x = shrink_candidates()
        .iter()
        .map(|th| x_start * *th)
        .find(|c| {
            b.moduli
                .iter()
                .all(|&(i, j, u2)| c[i] * c[i] + c[j] * c[j] < u2)
        })?;

    let normalize = |q: &RealQuad| {
        let s = q.s.amax().max(q.w.amax()).max(q.d.abs()).max(1e-300);
        q.scaled(1.0 / s)
    };
    // Constraints g(x) - s <= 0, including log-domain requirements -arg(x) - s <= 0.
    let mut cons: Vec<RealQuad> = b.cons.iter().map(|c| normalize(c).extended(-1.0)).collect();
    for t in &b.terms {
        if let Term::Log(_, q) = t {
            cons.push(normalize(&q.scaled(-1.0)).extended(-1.0));
        }
    }
    let worst = cons
        .iter()
        .map(|c| {
            let mut y = DVector::zeros(n + 1);
            y.rows_mut(0, n).copy_from(&x);
            c.value(&y)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mut y0 = DVector::zeros(n + 1);
    y0.rows_mut(0, n).copy_from(&x);
    y0[n] = worst.max(0.0) + 1.0;
    let mut obj_w = DVector::zeros(n + 1);
    obj_w[n] = -0.5;
    let p1 = Barrier {
        n: n + 1,
        terms: vec![Term::Quad(RealQuad {
            s: DMatrix::zeros(n + 1, n + 1),
            w: obj_w,
            d: 0.0,
        })],
        cons,
        moduli: b.moduli.clone(),
    };
    let run = barrier_solve(&p1, y0, opts.tol, opts.max_newton, |y| y[n] < -1e-9);
    *steps += run.steps;
    let cand = run.x.rows(0, n).into_owned();
    b.strictly_feasible(&cand).then_some(cand)
}
