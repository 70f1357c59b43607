//! Power minimization under per-user rate requirements: semidefinite
//! relaxation, DC-penalty rank-one recovery, and the reweighted outer loop.

use nalgebra::{DMatrix, DVector};
use ris_conic::linalg::{hermitian_eigen, leading_eigenpair, outer, trace};
use ris_conic::{
    solve_sdp, ConstraintMatrix, SdpConstraint, SdpOptions, SemidefiniteProgram, Sense, SolveStatus, C64,
};
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::nulling::min_interference_qcqp;
use crate::report::SolveReport;
use crate::scenario::{ChannelRealization, SystemParams};
use crate::sumrate::{update_weights, zero_setting};
use crate::system_model::{
    opd_power, opd_weights, power_consumption, sinr_decomposition, Noise, PowerModel, PowerModelKind, ReflectVector,
    RisMode, SinrDecomposition,
};

/// Allowed shortfall of a recovered rate below its requirement (bps/Hz).
pub const RATE_SLACK: f64 = 1e-4;
/// Allowed relative excess of a recovered amplitude over its bound.
pub const AMPLITUDE_REL_SLACK: f64 = 1e-3;
/// Largest `σ₂/σ₁` accepted as rank one.
pub const RANK_ONE_RATIO: f64 = 1e-4;
/// Phase-I optimum below which the relaxation is declared feasible.
const PHASE_ONE_TOL: f64 = 1e-7;

/// `γ = 2^R − 1`.
pub fn gamma_from_rate(rate_req: f64) -> Result<f64> {
    if !(rate_req >= 0.0) || !rate_req.is_finite() {
        return Err(CoreError::InvalidArgument(format!("rate requirement must be finite and >= 0, got {rate_req}")));
    }
    Ok(rate_req.exp2() - 1.0)
}

/// Lifted data of the relaxation over `A = [a; 1][a; 1]^H`.
#[derive(Debug, Clone)]
pub struct SdrInstance {
    pub q: usize,
    /// `p_k v v^H` with `v = [h_b,kk; conj(h_d,kk)]`.
    pub r_kk: Vec<DMatrix<C64>>,
    /// `[[R_r + R_b, g], [g^H, C]]`.
    pub r_rb: Vec<DMatrix<C64>>,
    pub gamma: Vec<f64>,
    /// Diagonal of `blkdiag(E_a, 0)` in watts.
    pub cost_diag: DVector<f64>,
    pub alpha_sq: f64,
    /// Costs are divided by this inside the solver so that the penalty
    /// factor acts in units of one RE's activation cost.
    pub cost_unit: f64,
}

impl SdrInstance {
    pub fn new(
        decomp: &SinrDecomposition,
        gamma: &[f64],
        cost_diag_q: &DVector<f64>,
        alpha_sq: f64,
        cost_unit: f64,
    ) -> Result<Self> {
        let k = decomp.k();
        if gamma.len() != k {
            return Err(CoreError::InvalidArgument(format!("expected {k} SINR targets, got {}", gamma.len())));
        }
        let q = cost_diag_q.len();
        if !(cost_unit > 0.0) {
            return Err(CoreError::InvalidArgument("cost unit must be positive".into()));
        }
        let mut r_kk = Vec::with_capacity(k);
        let mut r_rb = Vec::with_capacity(k);
        for u in &decomp.users {
            if u.cascaded.len() != q {
                return Err(CoreError::InvalidArgument("cost vector length differs from RE count".into()));
            }
            let mut v = DVector::zeros(q + 1);
            v.rows_mut(0, q).copy_from(&u.cascaded);
            v[q] = u.direct.conj();
            r_kk.push(outer(&v) * C64::new(u.power, 0.0));
            let mut m = DMatrix::zeros(q + 1, q + 1);
            m.view_mut((0, 0), (q, q)).copy_from(&u.curvature());
            for i in 0..q {
                m[(i, q)] = u.g[i];
                m[(q, i)] = u.g[i].conj();
            }
            m[(q, q)] = C64::new(u.c, 0.0);
            r_rb.push(m);
        }
        let mut cost_diag = DVector::zeros(q + 1);
        cost_diag.rows_mut(0, q).copy_from(cost_diag_q);
        Ok(Self {
            q,
            r_kk,
            r_rb,
            gamma: gamma.to_vec(),
            cost_diag,
            alpha_sq,
            cost_unit,
        })
    }

    /// `R_kk − γ_k R_rb,k`, normalized to unit Frobenius norm.
    fn sinr_matrix(&self, k: usize) -> DMatrix<C64> {
        let m = &self.r_kk[k] - &self.r_rb[k] * C64::new(self.gamma[k], 0.0);
        let n = m.norm();
        if n > 0.0 {
            m / C64::new(n, 0.0)
        } else {
            m
        }
    }

    fn base_constraints(&self) -> Vec<SdpConstraint> {
        let mut cons: Vec<SdpConstraint> = (0..self.r_kk.len())
            .map(|k| SdpConstraint {
                matrix: ConstraintMatrix::Dense(self.sinr_matrix(k)),
                scalars: vec![],
                sense: Sense::Ge,
                rhs: 0.0,
            })
            .collect();
        cons.extend((0..self.q).map(|i| SdpConstraint {
            matrix: ConstraintMatrix::Diagonal(i),
            scalars: vec![],
            sense: Sense::Le,
            rhs: self.alpha_sq,
        }));
        cons.push(SdpConstraint {
            matrix: ConstraintMatrix::Diagonal(self.q),
            scalars: vec![],
            sense: Sense::Eq,
            rhs: 1.0,
        });
        cons
    }

    fn cost_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&self.cost_diag.map(|v| C64::new(v / self.cost_unit, 0.0)))
    }

    /// `Tr(Ē_a A)` in watts.
    pub fn cost(&self, a: &DMatrix<C64>) -> f64 {
        self.cost_diag.iter().enumerate().map(|(i, c)| c * a[(i, i)].re).sum()
    }

    /// `Tr(R_kk A) − γ_k Tr(R_rb,k A)` for every user.
    pub fn sinr_slacks(&self, a: &DMatrix<C64>) -> Vec<f64> {
        (0..self.r_kk.len())
            .map(|k| ris_conic::linalg::trace_product(&self.r_kk[k], a) - self.gamma[k] * ris_conic::linalg::trace_product(&self.r_rb[k], a))
            .collect()
    }
}

fn sdp_options(tight: bool) -> SdpOptions {
    if tight {
        SdpOptions {
            feas_tol: 1e-9,
            gap_tol: 1e-9,
            max_iters: 150,
        }
    } else {
        SdpOptions::default()
    }
}

#[derive(Debug, Clone)]
pub struct SdrOutcome {
    pub status: SolveStatus,
    pub matrix: DMatrix<C64>,
    /// `Tr(Ē_a A)` in watts.
    pub objective: f64,
    pub iterations: usize,
}

/// Phase I: minimize the total SINR-constraint violation. Returns the
/// optimal violation and the solver status.
pub fn sdr_phase_one(inst: &SdrInstance) -> Result<(f64, SolveStatus)> {
    let k = inst.r_kk.len();
    let mut cons = inst.base_constraints();
    for (i, c) in cons.iter_mut().take(k).enumerate() {
        c.scalars.push((i, 1.0));
    }
    let p = SemidefiniteProgram {
        dim: inst.q + 1,
        objective: DMatrix::zeros(inst.q + 1, inst.q + 1),
        scalar_costs: vec![1.0; k],
        constraints: cons,
    };
    let out = solve_sdp(&p, &sdp_options(false))?;
    Ok((out.objective, out.status))
}

/// Solve the relaxation `min Tr(Ē_a A)` over the lifted feasible set.
/// `Infeasible` means the rate requirements cannot be met by any `a`.
pub fn solve_sdr(inst: &SdrInstance) -> Result<SdrOutcome> {
    let p = SemidefiniteProgram {
        dim: inst.q + 1,
        objective: inst.cost_matrix(),
        scalar_costs: vec![],
        constraints: inst.base_constraints(),
    };
    let out = solve_sdp(&p, &sdp_options(false))?;
    let mut status = out.status;
    if !matches!(status, SolveStatus::Optimal | SolveStatus::Infeasible) {
        let (violation, st) = sdr_phase_one(inst)?;
        if st == SolveStatus::Optimal && violation > PHASE_ONE_TOL {
            status = SolveStatus::Infeasible;
        }
    }
    let matrix = out.solution.matrix;
    Ok(SdrOutcome {
        status,
        objective: inst.cost(&matrix),
        matrix,
        iterations: out.iterations,
    })
}

/// Monitored quantities of one DCA iterate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DcaState {
    /// `Tr(A) − ‖A‖₂`.
    pub penalty: f64,
    /// `Tr(Ē_a A) / cost_unit`.
    pub cost: f64,
    /// `cost + ρ · penalty`.
    pub penalized: f64,
    /// `σ₂(A) / σ₁(A)`.
    pub rank_ratio: f64,
}

fn dca_state(inst: &SdrInstance, a: &DMatrix<C64>, rho: f64) -> DcaState {
    let (vals, _) = hermitian_eigen(a);
    let tr = trace(a);
    let penalty = tr - vals[0];
    let cost = inst.cost(a) / inst.cost_unit;
    DcaState {
        penalty,
        cost,
        penalized: cost + rho * penalty,
        rank_ratio: if vals[0] > 0.0 { vals.get(1).copied().unwrap_or(0.0).max(0.0) / vals[0] } else { 0.0 },
    }
}

#[derive(Debug, Clone)]
pub struct DcaOutcome {
    pub status: SolveStatus,
    pub matrix: DMatrix<C64>,
    /// State of the start point followed by every iterate.
    pub states: Vec<DcaState>,
    pub iterations: usize,
}

fn penalty_converged(s: &DcaState, a: &DMatrix<C64>, tol: f64) -> bool {
    s.penalty <= tol * trace(a).max(1.0)
}

/// DC-penalty iterations from `a_star`: each step minimizes
/// `Tr(Ē_a A)/unit + ρ Tr(A) − ρ u₁^H A u₁` over the relaxation's feasible set.
/// With `penalty_only` the cost term is dropped (pure feasibility search).
pub fn dca_rank_one(
    inst: &SdrInstance,
    a_star: &DMatrix<C64>,
    rho: f64,
    tol: f64,
    max_iters: usize,
    penalty_only: bool,
) -> Result<DcaOutcome> {
    let n = inst.q + 1;
    if a_star.nrows() != n || a_star.ncols() != n {
        return Err(CoreError::InvalidArgument(format!("start matrix must be {n}x{n}")));
    }
    let weight = if penalty_only { 0.0 } else { 1.0 };
    let state_of = |a: &DMatrix<C64>| {
        let mut s = dca_state(inst, a, rho);
        s.cost *= weight;
        s.penalized = s.cost + rho * s.penalty;
        s
    };
    let mut a = a_star.clone();
    let mut states = vec![state_of(&a)];
    if penalty_converged(&states[0], &a, tol) {
        return Ok(DcaOutcome {
            status: SolveStatus::Optimal,
            matrix: a,
            states,
            iterations: 0,
        });
    }
    let base_cost = inst.cost_matrix() * C64::new(weight, 0.0);
    let constraints = inst.base_constraints();
    let identity = DMatrix::<C64>::identity(n, n) * C64::new(rho, 0.0);
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let (_, u) = leading_eigenpair(&a);
        let objective = &base_cost + &identity - outer(&u) * C64::new(rho, 0.0);
        let p = SemidefiniteProgram {
            dim: n,
            objective,
            scalar_costs: vec![],
            constraints: constraints.clone(),
        };
        let out = solve_sdp(&p, &sdp_options(true))?;
        if !out.status.is_optimal() {
            status = if out.status == SolveStatus::Infeasible {
                SolveStatus::Infeasible
            } else {
                SolveStatus::NumericalFailure
            };
            break;
        }
        a = out.solution.matrix;
        let s = state_of(&a);
        states.push(s);
        if penalty_converged(&s, &a, tol) {
            status = SolveStatus::Optimal;
            break;
        }
    }
    Ok(DcaOutcome {
        status,
        matrix: a,
        states,
        iterations,
    })
}

/// `a = ā[..Q] / ā[Q]` with `ā = √σ₁ u₁`.
pub fn extract_reflect_vector(a: &DMatrix<C64>) -> Result<ReflectVector> {
    let n = a.nrows();
    if n < 2 || a.ncols() != n {
        return Err(CoreError::InvalidArgument("lifted matrix must be square with size >= 2".into()));
    }
    let (s1, u) = leading_eigenpair(a);
    let bar = u * C64::new(s1.max(0.0).sqrt(), 0.0);
    let last = bar[n - 1];
    if last.norm() < 1e-6 {
        return Err(CoreError::Solver {
            status: SolveStatus::NumericalFailure,
            context: "auxiliary entry of the rank-one factor is degenerate".into(),
        });
    }
    Ok(ReflectVector::new(bar.rows(0, n - 1).map(|v| v / last)))
}

fn meets_rates(decomp: &SinrDecomposition, a: &DVector<C64>, req: &[f64]) -> bool {
    decomp.rates(a).iter().zip(req).all(|(r, q)| *r >= q - RATE_SLACK)
}

/// Zero-setting that keeps the rate requirements: the threshold starts at
/// `threshold` and drops by 10x (down to 1e-6, then 0) until rates hold.
pub fn zero_set_with_rates(
    a: &ReflectVector,
    threshold: f64,
    decomp: &SinrDecomposition,
    req: &[f64],
) -> (ReflectVector, f64) {
    let mut t = threshold;
    while t >= 1e-6 {
        let z = zero_setting(a, t);
        if meets_rates(decomp, &z.a, req) {
            return (z, t);
        }
        t *= 0.1;
    }
    (a.clone(), 0.0)
}

struct Recovery {
    a: Option<ReflectVector>,
    dca: Option<DcaOutcome>,
    sdr_status: SolveStatus,
}

/// Relaxation followed by DCA and extraction, with one perturbed retry when
/// extraction fails.
fn relax_and_recover(inst: &SdrInstance, params: &SystemParams, penalty_only: bool) -> Result<Recovery> {
    let sdr = solve_sdr(inst)?;
    if sdr.status != SolveStatus::Optimal {
        return Ok(Recovery {
            a: None,
            dca: None,
            sdr_status: sdr.status,
        });
    }
    let tol = params.tol;
    let mut start = sdr.matrix.clone();
    for attempt in 0..2 {
        let dca = dca_rank_one(inst, &start, tol.dca_rho, tol.dca_penalty_tol, tol.dca_max_iters, penalty_only)?;
        match extract_reflect_vector(&dca.matrix) {
            Ok(a) => {
                return Ok(Recovery {
                    a: Some(a),
                    dca: Some(dca),
                    sdr_status: sdr.status,
                })
            }
            Err(_) if attempt == 0 => {
                let n = start.nrows();
                start += DMatrix::<C64>::identity(n, n) * C64::new(1e-3 * trace(&start).max(1.0) / n as f64, 0.0);
            }
            Err(_) => {
                return Ok(Recovery {
                    a: None,
                    dca: Some(dca),
                    sdr_status: sdr.status,
                })
            }
        }
    }
    unreachable!("loop returns on its second pass")
}

fn check_params(ch: &ChannelRealization, params: &SystemParams) -> Result<Vec<f64>> {
    if ch.k() != params.k || ch.q() != params.q || params.rate_req.len() != params.k {
        return Err(CoreError::InvalidArgument("channel and parameters disagree on K or Q".into()));
    }
    params.rate_req.iter().map(|&r| gamma_from_rate(r)).collect()
}

fn recovered_ok(a: &ReflectVector, decomp: &SinrDecomposition, req: &[f64], bound: f64) -> bool {
    a.max_amplitude() <= bound * (1.0 + AMPLITUDE_REL_SLACK) && meets_rates(decomp, &a.a, req)
}

fn infeasible_report(scheme: &str, q: usize, status: SolveStatus) -> SolveReport {
    let mut r = SolveReport::empty(scheme, q);
    r.status = status;
    r.feasible = false;
    r.power_w = f64::NAN;
    r
}

/// Sparse power minimization with reweighted activation costs.
pub fn powermin_sparse(ch: &ChannelRealization, params: &SystemParams) -> Result<SolveReport> {
    let gamma = check_params(ch, params)?;
    let q = ch.q();
    let decomp = sinr_decomposition(ch, &params.powers, Noise::from_params(params, RisMode::Active))?;
    if params.rate_req.iter().all(|r| *r == 0.0) {
        let mut r = SolveReport::empty("srb", q);
        r.rates = decomp.rates(&DVector::zeros(q));
        r.sum_rate = r.rates.iter().sum();
        return Ok(r);
    }
    let tol = params.tol;
    let opi = params.opi_per_re();
    let ep = opd_weights(ch, &params.powers, params.sigma_r_sq);
    let model = PowerModel::from_params(PowerModelKind::ActiveSparse, params);
    let alpha_sq = params.alpha_max * params.alpha_max;

    let mut a = min_interference_qcqp(ch, &params.powers, params.alpha_max, tol.rank_tol)?.a;
    let mut best: Option<(f64, ReflectVector)> = None;
    let mut report = SolveReport::empty("srb", q);
    report.status = SolveStatus::MaxIters;
    let mut prev_power: Option<f64> = None;
    for outer in 1..=tol.powermin_max_outer {
        report.outer_iterations = outer;
        let beta = update_weights(&a.a, tol.tau_reweight);
        let cost = &beta * opi + &ep * params.xi;
        let inst = SdrInstance::new(&decomp, &gamma, &cost, alpha_sq, opi)?;
        let rec = relax_and_recover(&inst, params, false)?;
        if rec.sdr_status == SolveStatus::Infeasible && outer == 1 {
            return Ok(infeasible_report("srb", q, SolveStatus::Infeasible));
        }
        if let Some(d) = &rec.dca {
            report.dca_iterations += d.iterations;
        }
        let Some(cand) = rec.a else {
            report.diagnostics.push(format!("outer {outer}: rank-one recovery failed ({})", rec.sdr_status));
            report.status = SolveStatus::NumericalFailure;
            break;
        };
        report.closed_trajectory.push(cand.a.iter().filter(|v| v.norm() < 1.0).count());
        let (z, _) = zero_set_with_rates(&cand, tol.zero_set_amp_threshold, &decomp, &params.rate_req);
        let power = power_consumption(&z, ch, &params.powers, params.sigma_r_sq, &model);
        report.trajectory.push(power);
        if recovered_ok(&z, &decomp, &params.rate_req, params.alpha_max)
            && best.as_ref().is_none_or(|(p, _)| power < *p)
        {
            best = Some((power, z));
        }
        a = cand;
        if let Some(p0) = prev_power {
            if (power - p0).abs() < tol.powermin_rel_tol * p0.abs().max(f64::MIN_POSITIVE) {
                report.status = SolveStatus::Optimal;
                break;
            }
        }
        prev_power = Some(power);
    }
    if let Some((power, z)) = best.take() {
        let (p2, z2) = refine_support(ch, params, power, z, &decomp)?;
        if p2 < power {
            report.diagnostics.push(format!("support refinement lowered power from {power:.6e} W to {p2:.6e} W"));
        }
        best = Some((p2, z2));
    }
    match best {
        Some((power, z)) => {
            report.rates = decomp.rates(&z.a);
            report.sum_rate = report.rates.iter().sum();
            report.power_w = power;
            report.active_res = z.active_count();
            report.a = z.a;
            report.feasible = true;
        }
        None => {
            report.feasible = false;
            report.power_w = f64::NAN;
            if report.status == SolveStatus::Optimal {
                report.status = SolveStatus::NumericalFailure;
            }
            report.diagnostics.push("no recovered vector met the rate requirements".into());
        }
    }
    Ok(report)
}

/// Re-optimizes the amplification on the chosen active set, then greedily
/// drops the weakest RE while that keeps the rates and lowers the power.
fn refine_support(
    ch: &ChannelRealization,
    params: &SystemParams,
    power: f64,
    z: ReflectVector,
    decomp: &SinrDecomposition,
) -> Result<(f64, ReflectVector)> {
    let mut best = (power, z);
    let mut support: Vec<usize> = (0..ch.q()).filter(|&i| best.1.a[i] != C64::new(0.0, 0.0)).collect();
    if let Some(c) = on_support(ch, params, &support, decomp)? {
        if c.0 < best.0 {
            best = c;
        }
    }
    while support.len() > 1 {
        let weakest = (0..support.len())
            .min_by(|&x, &y| best.1.a[support[x]].norm().total_cmp(&best.1.a[support[y]].norm()))
            .unwrap();
        let mut trial = support.clone();
        trial.remove(weakest);
        match on_support(ch, params, &trial, decomp)? {
            Some(c) if c.0 < best.0 => {
                best = c;
                support = trial;
            }
            _ => break,
        }
    }
    Ok(best)
}

/// With the active set fixed the OPI term is constant, so the remaining
/// problem is the fully-active one restricted to those REs.
fn on_support(
    ch: &ChannelRealization,
    params: &SystemParams,
    support: &[usize],
    decomp: &SinrDecomposition,
) -> Result<Option<(f64, ReflectVector)>> {
    if support.is_empty() {
        return Ok(None);
    }
    let sub = ChannelRealization::from_parts(ch.h_d.clone(), ch.h_t.select_rows(support), ch.h_r.select_rows(support))?;
    let mut sub_params = params.clone();
    sub_params.q = support.len();
    let r = fully_active(&sub, &sub_params)?;
    if !r.feasible || r.a.len() != support.len() {
        return Ok(None);
    }
    let mut full = DVector::zeros(ch.q());
    for (i, &q) in support.iter().enumerate() {
        full[q] = r.a[i];
    }
    let a = ReflectVector::new(full);
    if !recovered_ok(&a, decomp, &params.rate_req, params.alpha_max) {
        return Ok(None);
    }
    let model = PowerModel::from_params(PowerModelKind::ActiveSparse, params);
    Ok(Some((power_consumption(&a, ch, &params.powers, params.sigma_r_sq, &model), a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerminBaseline {
    FullyActive,
    PassiveFeasibility,
}

/// Fully-active RB: every RE on, only the amplification power is optimized.
pub fn fully_active(ch: &ChannelRealization, params: &SystemParams) -> Result<SolveReport> {
    let gamma = check_params(ch, params)?;
    let q = ch.q();
    let decomp = sinr_decomposition(ch, &params.powers, Noise::from_params(params, RisMode::Active))?;
    let ep = opd_weights(ch, &params.powers, params.sigma_r_sq);
    let opi = params.opi_per_re();
    let opi_total = q as f64 * opi;
    if params.rate_req.iter().all(|r| *r == 0.0) {
        let mut r = SolveReport::empty("rb_fully_active", q);
        r.power_w = opi_total;
        r.active_res = q;
        r.rates = decomp.rates(&DVector::zeros(q));
        r.sum_rate = r.rates.iter().sum();
        return Ok(r);
    }
    let inst = SdrInstance::new(&decomp, &gamma, &(&ep * params.xi), params.alpha_max * params.alpha_max, opi)?;
    let rec = relax_and_recover(&inst, params, false)?;
    finish_baseline("rb_fully_active", rec, &decomp, params, params.alpha_max, |a| {
        opi_total + params.xi * opd_power(&a.a, &ep)
    })
}

/// Passive feasibility: amplitudes at most one, no RIS noise, penalty-only DCA.
pub fn passive_feasibility(ch: &ChannelRealization, params: &SystemParams) -> Result<SolveReport> {
    let gamma = check_params(ch, params)?;
    let q = ch.q();
    let decomp = sinr_decomposition(ch, &params.powers, Noise::from_params(params, RisMode::Passive))?;
    let power = q as f64 * params.p_dc_w;
    if params.rate_req.iter().all(|r| *r == 0.0) {
        let mut r = SolveReport::empty("passive", q);
        r.power_w = power;
        r.active_res = q;
        r.rates = decomp.rates(&DVector::zeros(q));
        r.sum_rate = r.rates.iter().sum();
        return Ok(r);
    }
    let inst = SdrInstance::new(&decomp, &gamma, &DVector::zeros(q), 1.0, params.opi_per_re())?;
    let rec = relax_and_recover(&inst, params, true)?;
    finish_baseline("passive", rec, &decomp, params, 1.0, |_| power)
}

fn finish_baseline(
    scheme: &str,
    rec: Recovery,
    decomp: &SinrDecomposition,
    params: &SystemParams,
    bound: f64,
    power_of: impl Fn(&ReflectVector) -> f64,
) -> Result<SolveReport> {
    let q = params.q;
    if rec.sdr_status != SolveStatus::Optimal {
        return Ok(infeasible_report(scheme, q, rec.sdr_status));
    }
    let mut r = SolveReport::empty(scheme, q);
    r.outer_iterations = 1;
    if let Some(d) = &rec.dca {
        r.dca_iterations = d.iterations;
        r.status = d.status;
    }
    match rec.a {
        Some(a) if recovered_ok(&a, decomp, &params.rate_req, bound) => {
            r.rates = decomp.rates(&a.a);
            r.sum_rate = r.rates.iter().sum();
            r.power_w = power_of(&a);
            r.active_res = q;
            r.trajectory = vec![r.power_w];
            r.a = a.a;
        }
        _ => {
            r.feasible = false;
            r.power_w = f64::NAN;
            if r.status == SolveStatus::Optimal {
                r.status = SolveStatus::NumericalFailure;
            }
            r.diagnostics.push("recovered vector does not meet the rate requirements".into());
        }
    }
    Ok(r)
}

pub fn powermin_baseline(ch: &ChannelRealization, params: &SystemParams, kind: PowerminBaseline) -> Result<SolveReport> {
    match kind {
        PowerminBaseline::FullyActive => fully_active(ch, params),
        PowerminBaseline::PassiveFeasibility => passive_feasibility(ch, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{sample_channels, trial_rng, ScenarioConfig};

    fn config(rate: f64) -> ScenarioConfig {
        let mut c = ScenarioConfig::default().with_uniform_rate(rate);
        c.q1 = 4;
        c.q2 = 2;
        c.alpha_max_sq_db = 10.0;
        c
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_from_rate(0.0).unwrap(), 0.0);
        assert!((gamma_from_rate(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gamma_from_rate(1.8).unwrap() - 2.4822).abs() < 1e-4);
        assert!(gamma_from_rate(-1.0).is_err());
    }

    #[test]
    fn lifted_matrices_reproduce_sinr() {
        let cfg = config(0.5);
        let p = cfg.resolve().unwrap();
        let ch = sample_channels(&cfg, &mut trial_rng(3, 0)).unwrap();
        let d = sinr_decomposition(&ch, &p.powers, Noise::from_params(&p, RisMode::Active)).unwrap();
        let inst = SdrInstance::new(&d, &[0.0; 4], &DVector::from_element(8, 1.0), 10.0, 1.0).unwrap();
        let a = ch.h_t.column(0).map(|v| v / v.norm());
        let mut bar = DVector::from_element(9, C64::new(1.0, 0.0));
        bar.rows_mut(0, 8).copy_from(&a);
        let lifted = outer(&bar);
        for k in 0..4 {
            let num = ris_conic::linalg::trace_product(&inst.r_kk[k], &lifted);
            let den = ris_conic::linalg::trace_product(&inst.r_rb[k], &lifted);
            let sinr = d.users[k].sinr(&a);
            assert!((num / den - sinr).abs() <= 1e-9 * sinr);
        }
    }

    #[test]
    fn extraction_of_exact_rank_one() {
        let v = DVector::from_vec(vec![C64::new(0.3, -1.2), C64::new(2.0, 0.5), C64::new(1.0, 0.0)]);
        let a = extract_reflect_vector(&outer(&v)).unwrap();
        assert!((a.a[0] - v[0]).norm() < 1e-12 && (a.a[1] - v[1]).norm() < 1e-12);
        let rotated = &v * C64::from_polar(1.0, 0.7);
        let b = extract_reflect_vector(&outer(&rotated)).unwrap();
        assert!((&a.a - &b.a).norm() < 1e-12);
    }

    #[test]
    fn degenerate_auxiliary_entry() {
        let v = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(extract_reflect_vector(&outer(&v)).is_err());
    }

    #[test]
    fn zero_rate_relaxation_is_trivial() {
        let cfg = config(0.0);
        let p = cfg.resolve().unwrap();
        let ch = sample_channels(&cfg, &mut trial_rng(3, 1)).unwrap();
        let d = sinr_decomposition(&ch, &p.powers, Noise::from_params(&p, RisMode::Active)).unwrap();
        let inst = SdrInstance::new(&d, &[0.0; 4], &DVector::from_element(8, 1.0), 10.0, 1.0).unwrap();
        let out = solve_sdr(&inst).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!(out.objective <= 1e-7);
        assert!((out.matrix[(8, 8)].re - 1.0).abs() < 1e-7);
        let rep = powermin_sparse(&ch, &p).unwrap();
        assert_eq!(rep.power_w, 0.0);
        assert_eq!(rep.a, DVector::zeros(8));
        let pas = passive_feasibility(&ch, &p).unwrap();
        assert!(pas.feasible && (pas.power_w - 8.0 * p.p_dc_w).abs() < 1e-18);
    }

    #[test]
    fn rank_one_start_needs_no_iterations() {
        let cfg = config(0.0);
        let p = cfg.resolve().unwrap();
        let ch = sample_channels(&cfg, &mut trial_rng(3, 1)).unwrap();
        let d = sinr_decomposition(&ch, &p.powers, Noise::from_params(&p, RisMode::Active)).unwrap();
        let inst = SdrInstance::new(&d, &[0.0; 4], &DVector::from_element(8, 1.0), 10.0, 1.0).unwrap();
        let mut e = DMatrix::zeros(9, 9);
        e[(8, 8)] = C64::new(1.0, 0.0);
        let out = dca_rank_one(&inst, &e, 10.0, 1e-6, 10, false).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.matrix, e);
    }

    #[test]
    fn impossible_rates_are_infeasible() {
        let cfg = config(12.0);
        let p = cfg.resolve().unwrap();
        let ch = sample_channels(&cfg, &mut trial_rng(3, 2)).unwrap();
        let rep = powermin_sparse(&ch, &p).unwrap();
        assert!(!rep.feasible);
        assert_eq!(rep.status, SolveStatus::Infeasible);
    }

    #[test]
    fn moderate_rates_recover_feasible_vector() {
        let cfg = config(0.8);
        let p = cfg.resolve().unwrap();
        let ch = sample_channels(&cfg, &mut trial_rng(3, 3)).unwrap();
        let srb = powermin_sparse(&ch, &p).unwrap();
        let rb = fully_active(&ch, &p).unwrap();
        if srb.feasible && rb.feasible {
            assert!(srb.power_w <= rb.power_w * (1.0 + 1e-9));
            assert!(srb.rates.iter().all(|r| *r >= 0.8 - RATE_SLACK));
        }
        assert_eq!(srb.feasible, rb.feasible);
    }
}
