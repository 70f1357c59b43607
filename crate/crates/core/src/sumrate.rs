//! Sum-rate maximization with the quadratic transform and reweighted-ℓ1
//! sparsification, plus the fixed-active and passive baselines.

use nalgebra::{DMatrix, DVector};
use ris_conic::{
    solve_qcqp, ConcaveQuadratic, ConvexQuadraticProgram, ObjectiveTerm, QcqpOptions, QuadraticConstraint,
    SolveStatus, C64,
};

use crate::error::{CoreError, Result};
use crate::nulling::min_interference_qcqp;
use crate::report::SolveReport;
use crate::scenario::{ChannelRealization, SystemParams};
use crate::system_model::{
    opd_power, opd_weights, power_consumption, sinr_decomposition, Noise, PowerModel, PowerModelKind, ReflectVector,
    RisMode, SinrDecomposition,
};

/// Relative slack under which a lower true sum rate still counts as "not decreased".
const ACCEPT_SLACK: f64 = 1e-12;
/// Consecutive small relative changes required to declare convergence.
const STABLE_WINDOW: usize = 3;

/// `Σ_k log2(1 + 2√p_k Re(ω_k^* s_k(a)) − |ω_k|² D_k(a))`.
pub fn surrogate(decomp: &SinrDecomposition, omega: &DVector<C64>, a: &DVector<C64>) -> f64 {
    decomp
        .users
        .iter()
        .zip(omega.iter())
        .map(|(u, w)| {
            let arg = 1.0 + 2.0 * u.power.sqrt() * (w.conj() * u.signal(a)).re - w.norm_sqr() * u.denominator(a);
            arg.log2()
        })
        .sum()
}

/// `ω_k = √p_k s_k(a) / D_k(a)`, the maximizer of the surrogate at `a`.
pub fn update_omega(a: &DVector<C64>, decomp: &SinrDecomposition) -> DVector<C64> {
    DVector::from_iterator(
        decomp.k(),
        decomp.users.iter().map(|u| u.signal(a) * (u.power.sqrt() / u.denominator(a))),
    )
}

/// `β_q = 1 / (|a_q|² + τ)`.
pub fn update_weights(a: &DVector<C64>, tau: f64) -> DVector<f64> {
    DVector::from_iterator(a.len(), a.iter().map(|v| 1.0 / (v.norm_sqr() + tau)))
}

/// Close every entry with amplitude below `threshold`.
pub fn zero_setting(a: &ReflectVector, threshold: f64) -> ReflectVector {
    ReflectVector::new(a.a.map(|v| if v.norm() < threshold { C64::new(0.0, 0.0) } else { v }))
}

/// `Σ_q w_q |a_q|² <= cap`.
#[derive(Debug, Clone)]
pub struct QuadBudget {
    pub weights: DVector<f64>,
    pub cap: f64,
}

impl QuadBudget {
    pub fn value(&self, a: &DVector<C64>) -> f64 {
        opd_power(a, &self.weights)
    }

    /// `a` scaled by the largest `c ∈ (0, 1]` that satisfies the budget.
    pub fn pull_inside(&self, a: &DVector<C64>) -> DVector<C64> {
        let v = self.value(a);
        if v <= self.cap || v <= 0.0 {
            return a.clone();
        }
        a * C64::new((self.cap.max(0.0) / v).sqrt(), 0.0)
    }
}

/// Relaxed sparse budget with `[E_a]_qq = (P_bias + P_DC) β_q + ξ [E_p]_qq`.
pub fn sparse_budget(beta: &DVector<f64>, ep: &DVector<f64>, params: &SystemParams) -> QuadBudget {
    QuadBudget {
        weights: beta * params.opi_per_re() + ep * params.xi,
        cap: params.p_ris_w,
    }
}

/// Feasible set of one FP subproblem.
#[derive(Debug, Clone)]
pub struct FpConstraints {
    /// Per-entry amplitude bounds; zero pins an entry to zero.
    pub bounds: Vec<f64>,
    pub budget: Option<QuadBudget>,
}

impl FpConstraints {
    pub fn max_violation(&self, a: &DVector<C64>) -> f64 {
        let amp = a
            .iter()
            .zip(&self.bounds)
            .map(|(v, u)| v.norm() - u)
            .fold(f64::NEG_INFINITY, f64::max);
        let bud = self.budget.as_ref().map_or(f64::NEG_INFINITY, |b| b.value(a) - b.cap);
        amp.max(bud)
    }
}

/// Maximize the surrogate at fixed `ω` over the constraint set.
pub fn fp_subproblem(
    omega: &DVector<C64>,
    decomp: &SinrDecomposition,
    cons: &FpConstraints,
    start: Option<&DVector<C64>>,
) -> Result<(DVector<C64>, SolveStatus)> {
    let q = cons.bounds.len();
    let inv_ln2 = std::f64::consts::LOG2_E;
    let objective = decomp
        .users
        .iter()
        .zip(omega.iter())
        .map(|(u, w)| {
            let w2 = w.norm_sqr();
            let sp = u.power.sqrt();
            ObjectiveTerm::Log {
                weight: inv_ln2,
                arg: ConcaveQuadratic {
                    curvature: u.curvature() * C64::new(w2, 0.0),
                    linear: &u.cascaded * (w * sp) - &u.g * C64::new(w2, 0.0),
                    constant: 1.0 + 2.0 * sp * (w.conj() * u.direct).re - w2 * u.c,
                },
            }
        })
        .collect();
    let constraints = cons
        .budget
        .iter()
        .map(|b| QuadraticConstraint {
            curvature: DMatrix::from_diagonal(&b.weights.map(|w| C64::new(w, 0.0))),
            linear: DVector::zeros(q),
            bound: b.cap,
        })
        .collect();
    let program = ConvexQuadraticProgram {
        dim: q,
        objective,
        constraints,
        modulus_bounds: cons.bounds.clone(),
    };
    let out = solve_qcqp(&program, start, &QcqpOptions::default())?;
    Ok((out.solution, out.status))
}

/// Which constraint set each iteration uses.
#[derive(Debug, Clone)]
pub enum BudgetRule {
    /// Reweighted sparse budget; weights follow the current iterate.
    Reweighted { ep: DVector<f64> },
    Fixed(Option<QuadBudget>),
}

#[derive(Debug, Clone)]
pub struct FpSetup {
    pub decomp: SinrDecomposition,
    pub bounds: Vec<f64>,
    pub rule: BudgetRule,
}

impl FpSetup {
    fn constraints(&self, a: &DVector<C64>, params: &SystemParams) -> FpConstraints {
        let budget = match &self.rule {
            BudgetRule::Reweighted { ep } => Some(sparse_budget(&update_weights(a, params.tol.tau_reweight), ep, params)),
            BudgetRule::Fixed(b) => b.clone(),
        };
        FpConstraints {
            bounds: self.bounds.clone(),
            budget,
        }
    }
}

/// Result of an FP run before it is turned into a report.
#[derive(Debug, Clone)]
pub struct FpRun {
    pub a: DVector<C64>,
    pub trajectory: Vec<f64>,
    /// Candidates that would have lowered the true sum rate.
    pub rejected: usize,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub status: SolveStatus,
    pub solver_issues: usize,
}

fn accepts(candidate: f64, current: f64) -> bool {
    candidate >= current - ACCEPT_SLACK * current.abs().max(1.0)
}

fn rel_change(new: f64, old: f64) -> f64 {
    (new - old).abs() / old.abs().max(1e-12)
}

/// One-loop method: weights, `ω` and `a` are updated once per iteration.
pub fn run_one_loop(setup: &FpSetup, params: &SystemParams, init: &DVector<C64>) -> Result<FpRun> {
    let tol = params.tol;
    let mut a = init.clone();
    let mut rate = setup.decomp.sum_rate(&a);
    let mut run = FpRun {
        a: a.clone(),
        trajectory: vec![rate],
        rejected: 0,
        iterations: 0,
        outer_iterations: 0,
        status: SolveStatus::MaxIters,
        solver_issues: 0,
    };
    let mut stable = 0;
    while run.iterations < tol.fp_max_iters {
        run.iterations += 1;
        let cons = setup.constraints(&a, params);
        let start = match &cons.budget {
            Some(b) => b.pull_inside(&a),
            None => a.clone(),
        };
        let omega = update_omega(&start, &setup.decomp);
        let (cand, status) = fp_subproblem(&omega, &setup.decomp, &cons, Some(&start))?;
        if !status.is_optimal() {
            run.solver_issues += 1;
        }
        let cand_rate = setup.decomp.sum_rate(&cand);
        if !accepts(cand_rate, rate) {
            // The same weights would reproduce the same candidate: stop here.
            run.rejected += 1;
            run.status = SolveStatus::Optimal;
            break;
        }
        let change = rel_change(cand_rate, rate);
        a = cand;
        rate = cand_rate;
        run.trajectory.push(rate);
        stable = if change < tol.fp_rel_tol { stable + 1 } else { 0 };
        if stable >= STABLE_WINDOW {
            run.status = SolveStatus::Optimal;
            break;
        }
    }
    run.a = a;
    run.outer_iterations = run.iterations;
    Ok(run)
}

/// Two-loop method: weights are held fixed while the inner FP loop converges.
pub fn run_two_loop(setup: &FpSetup, params: &SystemParams, init: &DVector<C64>) -> Result<FpRun> {
    let tol = params.tol;
    let mut a = init.clone();
    let mut rate = setup.decomp.sum_rate(&a);
    let mut run = FpRun {
        a: a.clone(),
        trajectory: vec![rate],
        rejected: 0,
        iterations: 0,
        outer_iterations: 0,
        status: SolveStatus::MaxIters,
        solver_issues: 0,
    };
    while run.outer_iterations < tol.fp_max_outer {
        run.outer_iterations += 1;
        let outer_start_rate = rate;
        let cons = setup.constraints(&a, params);
        let mut x = match &cons.budget {
            Some(b) => b.pull_inside(&a),
            None => a.clone(),
        };
        let mut x_rate = setup.decomp.sum_rate(&x);
        let mut stable = 0;
        let mut inner_converged = false;
        for _ in 0..tol.fp_max_iters {
            run.iterations += 1;
            let omega = update_omega(&x, &setup.decomp);
            let (cand, status) = fp_subproblem(&omega, &setup.decomp, &cons, Some(&x))?;
            if !status.is_optimal() {
                run.solver_issues += 1;
            }
            let cand_rate = setup.decomp.sum_rate(&cand);
            if !accepts(cand_rate, x_rate) {
                run.rejected += 1;
                inner_converged = true;
                break;
            }
            let change = rel_change(cand_rate, x_rate);
            x = cand;
            x_rate = cand_rate;
            if accepts(x_rate, rate) {
                a = x.clone();
                rate = x_rate;
                run.trajectory.push(rate);
            }
            stable = if change < tol.fp_rel_tol { stable + 1 } else { 0 };
            if stable >= STABLE_WINDOW {
                inner_converged = true;
                break;
            }
        }
        if !inner_converged {
            break;
        }
        if rel_change(rate, outer_start_rate) < tol.fp_rel_tol {
            run.status = SolveStatus::Optimal;
            break;
        }
    }
    run.a = a;
    Ok(run)
}

/// Starting point: amplitude-limited nulling solution, scaled into the sparse
/// budget built from its own weights.
pub fn sumrate_init(ch: &ChannelRealization, params: &SystemParams) -> Result<DVector<C64>> {
    let nul = min_interference_qcqp(ch, &params.powers, params.alpha_max, params.tol.rank_tol)?;
    let ep = opd_weights(ch, &params.powers, params.sigma_r_sq);
    let budget = sparse_budget(&update_weights(&nul.a.a, params.tol.tau_reweight), &ep, params);
    Ok(budget.pull_inside(&nul.a.a))
}

fn sparse_setup(ch: &ChannelRealization, params: &SystemParams) -> Result<FpSetup> {
    Ok(FpSetup {
        decomp: sinr_decomposition(ch, &params.powers, Noise::from_params(params, RisMode::Active))?,
        bounds: vec![params.alpha_max; ch.q()],
        rule: BudgetRule::Reweighted {
            ep: opd_weights(ch, &params.powers, params.sigma_r_sq),
        },
    })
}

fn check_params(ch: &ChannelRealization, params: &SystemParams) -> Result<()> {
    if ch.k() != params.k || ch.q() != params.q || params.powers.len() != params.k {
        return Err(CoreError::InvalidArgument(format!(
            "channel is {}x{} (users x REs) but parameters describe {}x{}",
            ch.k(),
            ch.q(),
            params.k,
            params.q
        )));
    }
    Ok(())
}

fn active_report(scheme: &str, ch: &ChannelRealization, params: &SystemParams, run: &FpRun, decomp: &SinrDecomposition) -> SolveReport {
    let a = ReflectVector::new(run.a.clone());
    let power = power_consumption(
        &a,
        ch,
        &params.powers,
        params.sigma_r_sq,
        &PowerModel::from_params(PowerModelKind::ActiveSparse, params),
    );
    let rates = decomp.rates(&run.a);
    let mut diagnostics = Vec::new();
    if run.rejected > 0 {
        diagnostics.push(format!("stopped at a candidate that lowered the sum rate ({} time(s))", run.rejected));
    }
    if run.solver_issues > 0 {
        diagnostics.push(format!("{} subproblem solve(s) did not report optimal", run.solver_issues));
    }
    SolveReport {
        scheme: scheme.to_string(),
        status: run.status,
        feasible: power <= params.p_ris_w * (1.0 + 1e-9),
        sum_rate: rates.iter().sum(),
        rates,
        power_w: power,
        active_res: a.active_count(),
        a: run.a.clone(),
        trajectory: run.trajectory.clone(),
        iterations: run.iterations,
        outer_iterations: run.outer_iterations,
        dca_iterations: 0,
        closed_trajectory: Vec::new(),
        diagnostics,
    }
}

/// Sparse reflect beamforming, one-loop variant.
pub fn sumrate_one_loop(ch: &ChannelRealization, params: &SystemParams, init: &DVector<C64>) -> Result<SolveReport> {
    check_params(ch, params)?;
    let setup = sparse_setup(ch, params)?;
    let run = run_one_loop(&setup, params, init)?;
    Ok(active_report("srb_one_loop", ch, params, &run, &setup.decomp))
}

/// Sparse reflect beamforming, two-loop variant.
pub fn sumrate_two_loop(ch: &ChannelRealization, params: &SystemParams, init: &DVector<C64>) -> Result<SolveReport> {
    check_params(ch, params)?;
    let setup = sparse_setup(ch, params)?;
    let run = run_two_loop(&setup, params, init)?;
    Ok(active_report("srb_two_loop", ch, params, &run, &setup.decomp))
}

/// Zero-set `a`, then keep the exact sparse power within the budget: the
/// remaining entries are scaled down, and if the activation cost alone
/// exceeds the budget the weakest entries are closed first.
pub fn zero_set_within_budget(
    a: &ReflectVector,
    threshold: f64,
    ch: &ChannelRealization,
    params: &SystemParams,
) -> ReflectVector {
    let mut z = zero_setting(a, threshold);
    let ep = opd_weights(ch, &params.powers, params.sigma_r_sq);
    let opi = params.opi_per_re();
    while z.active_count() as f64 * opi > params.p_ris_w {
        let weakest = z
            .a
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > 0.0)
            .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
            .map(|(i, _)| i);
        match weakest {
            Some(i) => z.a[i] = C64::new(0.0, 0.0),
            None => break,
        }
    }
    let room = params.p_ris_w - z.active_count() as f64 * opi;
    let opd = params.xi * opd_power(&z.a, &ep);
    if opd > room && opd > 0.0 {
        z.a *= C64::new((room.max(0.0) / opd).sqrt(), 0.0);
    }
    z
}

/// Report for a zero-set version of an SRB solution.
pub fn zero_set_report(base: &SolveReport, ch: &ChannelRealization, params: &SystemParams) -> Result<SolveReport> {
    let z = zero_set_within_budget(
        &ReflectVector::new(base.a.clone()),
        params.tol.zero_set_amp_threshold,
        ch,
        params,
    );
    let decomp = sinr_decomposition(ch, &params.powers, Noise::from_params(params, RisMode::Active))?;
    let rates = decomp.rates(&z.a);
    let mut r = base.clone();
    r.scheme = format!("{}_zs", base.scheme);
    r.sum_rate = rates.iter().sum();
    r.rates = rates;
    r.power_w = power_consumption(
        &z,
        ch,
        &params.powers,
        params.sigma_r_sq,
        &PowerModel::from_params(PowerModelKind::ActiveSparse, params),
    );
    r.feasible = r.power_w <= params.p_ris_w * (1.0 + 1e-9);
    r.active_res = z.active_count();
    r.a = z.a;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumrateBaseline {
    FixedActive,
    PassiveUpper,
}

/// `Q_F = min(floor(P_RIS / (P_bias + P_DC)), Q)`.
pub fn fixed_active_count(params: &SystemParams, q: usize) -> usize {
    ((params.p_ris_w / params.opi_per_re()).floor() as usize).min(q)
}

/// `Q_P = floor(P_RIS / P_DC)`.
pub fn passive_count(params: &SystemParams) -> usize {
    (params.p_ris_w / params.p_dc_w).floor() as usize
}

/// Fixed-active RB: the first `Q_F` REs, original power model.
pub fn fixed_active(ch: &ChannelRealization, params: &SystemParams) -> Result<SolveReport> {
    check_params(ch, params)?;
    let q = ch.q();
    let qf = fixed_active_count(params, q);
    let opi = params.opi_per_re();
    let room = params.p_ris_w - qf as f64 * opi;
    let decomp = sinr_decomposition(ch, &params.powers, Noise::from_params(params, RisMode::Active))?;
    if room < 0.0 {
        let mut r = SolveReport::empty("rb_fixed_active", q);
        r.status = SolveStatus::Infeasible;
        r.feasible = false;
        return Ok(r);
    }
    let ep = opd_weights(ch, &params.powers, params.sigma_r_sq);
    let budget = QuadBudget {
        weights: ep.clone() * params.xi,
        cap: room,
    };
    let bounds: Vec<f64> = (0..q).map(|i| if i < qf { params.alpha_max } else { 0.0 }).collect();
    let nul = min_interference_qcqp(ch, &params.powers, params.alpha_max, params.tol.rank_tol)?;
    let mut init = nul.a.a;
    for i in qf..q {
        init[i] = C64::new(0.0, 0.0);
    }
    let init = budget.pull_inside(&init);
    let setup = FpSetup {
        decomp: decomp.clone(),
        bounds,
        rule: BudgetRule::Fixed(Some(budget)),
    };
    let run = run_one_loop(&setup, params, &init)?;
    let mut r = active_report("rb_fixed_active", ch, params, &run, &decomp);
    r.power_w = qf as f64 * opi + params.xi * opd_power(&run.a, &ep);
    r.feasible = r.power_w <= params.p_ris_w * (1.0 + 1e-9);
    r.active_res = qf;
    Ok(r)
}

/// Passive upper bound: `|a_q| <= 1`, no RIS noise, no budget. `ch` is the
/// realization of the passive surface (normally with `Q_P` REs).
pub fn passive_upper(ch: &ChannelRealization, params: &SystemParams) -> Result<SolveReport> {
    if ch.k() != params.k || params.powers.len() != params.k {
        return Err(CoreError::InvalidArgument("user count mismatch".into()));
    }
    let q = ch.q();
    let decomp = sinr_decomposition(ch, &params.powers, Noise::from_params(params, RisMode::Passive))?;
    let nul = min_interference_qcqp(ch, &params.powers, 1.0, params.tol.rank_tol)?;
    let setup = FpSetup {
        decomp: decomp.clone(),
        bounds: vec![1.0; q],
        rule: BudgetRule::Fixed(None),
    };
    let run = run_one_loop(&setup, params, &nul.a.a)?;
    let rates = decomp.rates(&run.a);
    let mut r = SolveReport::empty("passive_upper", q);
    r.status = run.status;
    r.sum_rate = rates.iter().sum();
    r.rates = rates;
    r.power_w = q as f64 * params.p_dc_w;
    r.active_res = q;
    r.a = run.a;
    r.trajectory = run.trajectory;
    r.iterations = run.iterations;
    r.outer_iterations = run.outer_iterations;
    Ok(r)
}

/// Baseline dispatcher; `passive_ch` is required for the passive bound.
pub fn sumrate_baseline(
    ch: &ChannelRealization,
    passive_ch: Option<&ChannelRealization>,
    params: &SystemParams,
    kind: SumrateBaseline,
) -> Result<SolveReport> {
    match kind {
        SumrateBaseline::FixedActive => fixed_active(ch, params),
        SumrateBaseline::PassiveUpper => passive_upper(passive_ch.unwrap_or(ch), params),
    }
}
