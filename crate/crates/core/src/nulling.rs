//! Interference nulling: exact closed form, amplitude-limited least squares,
//! and the nulling success-probability experiment.

use nalgebra::{DMatrix, DVector};
use ris_conic::{solve_qcqp, ConcaveQuadratic, ConvexQuadraticProgram, ObjectiveTerm, QcqpOptions, SolveStatus, C64};
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::scenario::{sample_iid_setup, trial_rng, ChannelRealization};
use crate::system_model::{db_to_linear, ReflectVector};

/// Minimum-norm solution of `H_b^H a = -h_d` for a tall, full-column-rank `H_b`.
pub fn least_norm_nulling(h_b: &DMatrix<C64>, h_d: &DVector<C64>, rank_tol: f64) -> Result<DVector<C64>> {
    let (q, m) = h_b.shape();
    if h_d.len() != m {
        return Err(CoreError::InvalidArgument(format!(
            "interference vector has {} entries, expected {m}",
            h_d.len()
        )));
    }
    if q < m {
        return Err(CoreError::Precondition(format!(
            "the number of REs should be greater than the number of interference channels ({q} < {m})"
        )));
    }
    if h_d.iter().all(|v| *v == C64::new(0.0, 0.0)) {
        return Ok(DVector::zeros(q));
    }
    let sv = h_b.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= rank_tol * smax {
        return Err(CoreError::Precondition(format!(
            "the cascaded channel matrix is not full column rank (singular value ratio {:e})",
            if smax > 0.0 { smin / smax } else { 0.0 }
        )));
    }
    // H_b = Q R, so H_b^H a = R^H Q^H a; the least-norm a lies in range(Q).
    let qr = h_b.clone().qr();
    let rh = qr.r().adjoint();
    let y = rh
        .solve_lower_triangular(&(-h_d))
        .ok_or_else(|| CoreError::Precondition("triangular factor is singular".into()))?;
    Ok(qr.q() * y)
}

/// Closed-form interference-nulling reflect vector.
pub fn nulling_closed_form(ch: &ChannelRealization, rank_tol: f64) -> Result<ReflectVector> {
    least_norm_nulling(&ch.h_b_stack, &ch.h_d_stack, rank_tol).map(ReflectVector::new)
}

/// Weighted interference power `Σ_{k≠j} p_j |h_d,kj + h_b,kj^H a|²`.
pub fn interference_power(ch: &ChannelRealization, powers: &[f64], a: &DVector<C64>) -> f64 {
    ch.pairs
        .iter()
        .enumerate()
        .map(|(col, &(_, j))| {
            let r = ch.h_d_stack[col] + ch.h_b_stack.column(col).dotc(a);
            powers[j] * r.norm_sqr()
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct NullingOutcome {
    pub a: ReflectVector,
    pub residual_power: f64,
    pub status: SolveStatus,
}

/// Minimize the weighted interference power over `|a_q| <= alpha_max`.
pub fn min_interference_qcqp(
    ch: &ChannelRealization,
    powers: &[f64],
    alpha_max: f64,
    rank_tol: f64,
) -> Result<NullingOutcome> {
    let q = ch.q();
    if powers.len() != ch.k() {
        return Err(CoreError::InvalidArgument("one transmit power per user is required".into()));
    }
    if !(alpha_max >= 0.0) {
        return Err(CoreError::InvalidArgument(format!("alpha_max must be nonnegative, got {alpha_max}")));
    }
    let zero = DVector::zeros(q);
    if alpha_max == 0.0 {
        return Ok(NullingOutcome {
            residual_power: interference_power(ch, powers, &zero),
            a: ReflectVector::new(zero),
            status: SolveStatus::Optimal,
        });
    }
    let closed = least_norm_nulling(&ch.h_b_stack, &ch.h_d_stack, rank_tol).ok();
    if let Some(a) = &closed {
        let amax = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if amax <= alpha_max {
            return Ok(NullingOutcome {
                residual_power: interference_power(ch, powers, a),
                a: ReflectVector::new(a.clone()),
                status: SolveStatus::Optimal,
            });
        }
    }

    // maximize -(a^H M a + 2 Re(c^H a) + d) with M = H_b P H_b^H.
    let weights = DVector::from_iterator(ch.pairs.len(), ch.pairs.iter().map(|&(_, j)| C64::new(powers[j], 0.0)));
    let weighted = DMatrix::from_fn(q, ch.pairs.len(), |r, c| ch.h_b_stack[(r, c)] * weights[c]);
    let curvature = &weighted * ch.h_b_stack.adjoint();
    let linear = -(&weighted * &ch.h_d_stack);
    let constant = -interference_power(ch, powers, &zero);
    let program = ConvexQuadraticProgram {
        dim: q,
        objective: vec![ObjectiveTerm::Quadratic(ConcaveQuadratic {
            curvature,
            linear,
            constant,
        })],
        constraints: vec![],
        modulus_bounds: vec![alpha_max; q],
    };
    // The closed form pulled into the box is a good feasible start.
    let start = closed.map(|a| {
        let amax = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        a * C64::new(alpha_max / amax, 0.0)
    });
    let out = solve_qcqp(&program, start.as_ref(), &QcqpOptions::default())?;
    let a = out.solution;
    Ok(NullingOutcome {
        residual_power: interference_power(ch, powers, &a),
        a: ReflectVector::new(a),
        status: out.status,
    })
}

/// Fixed parameters of the nulling success-probability experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullingSetup {
    pub k: usize,
    pub gain_ratio_db: f64,
    pub power: f64,
    pub sigma_s_sq: f64,
    /// Success when the residual is at most `threshold_factor * sigma_s_sq`.
    pub threshold_factor: f64,
    pub rank_tol: f64,
}

impl Default for NullingSetup {
    fn default() -> Self {
        Self {
            k: 4,
            gain_ratio_db: 20.0,
            power: 1.0,
            sigma_s_sq: 0.1,
            threshold_factor: 1e-3,
            rank_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullingTrial {
    pub q: usize,
    pub alpha_max_sq_db: f64,
    pub trial: u64,
    pub residual_power: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullingPoint {
    pub q: usize,
    pub alpha_max_sq_db: f64,
    pub success_prob: f64,
    pub trials: usize,
}

/// All `(q, alpha)` cells of one trial. Channels for smaller `q` are prefixes
/// of the largest draw, so cells of the same trial are paired.
pub fn nulling_trial(
    setup: &NullingSetup,
    q_list: &[usize],
    alpha_max_sq_db_list: &[f64],
    seed: u64,
    trial: u64,
) -> Result<Vec<NullingTrial>> {
    let q_max = q_list.iter().copied().max().unwrap_or(0);
    if q_max == 0 {
        return Err(CoreError::InvalidArgument("q list must contain a positive value".into()));
    }
    let mut rng = trial_rng(seed, trial);
    let full = sample_iid_setup(q_max, setup.k, setup.gain_ratio_db, &mut rng)?;
    let powers = vec![setup.power; setup.k];
    let threshold = setup.threshold_factor * setup.sigma_s_sq;
    let mut rows = Vec::with_capacity(q_list.len() * alpha_max_sq_db_list.len());
    for &q in q_list {
        let ch = full.truncated(q)?;
        for &adb in alpha_max_sq_db_list {
            let alpha = db_to_linear(adb).sqrt();
            let out = min_interference_qcqp(&ch, &powers, alpha, setup.rank_tol)?;
            rows.push(NullingTrial {
                q,
                alpha_max_sq_db: adb,
                trial,
                residual_power: out.residual_power,
                success: out.residual_power <= threshold,
            });
        }
    }
    Ok(rows)
}

/// Success fraction per `(q, alpha)` cell, in the order the cells first appear.
pub fn aggregate_success(rows: &[NullingTrial]) -> Vec<NullingPoint> {
    let mut points: Vec<(usize, f64, usize, usize)> = Vec::new();
    for r in rows {
        let idx = points
            .iter()
            .position(|p| p.0 == r.q && p.1 == r.alpha_max_sq_db)
            .unwrap_or_else(|| {
                points.push((r.q, r.alpha_max_sq_db, 0, 0));
                points.len() - 1
            });
        points[idx].2 += usize::from(r.success);
        points[idx].3 += 1;
    }
    points
        .into_iter()
        .map(|(q, adb, s, n)| NullingPoint {
            q,
            alpha_max_sq_db: adb,
            success_prob: s as f64 / n as f64,
            trials: n,
        })
        .collect()
}

/// Sequential success-probability table over `trials` paired draws.
pub fn nulling_success_probability(
    setup: &NullingSetup,
    q_list: &[usize],
    alpha_max_sq_db_list: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<NullingPoint>> {
    if trials == 0 {
        return Err(CoreError::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for t in 0..trials {
        rows.extend(nulling_trial(setup, q_list, alpha_max_sq_db_list, seed, t)?);
    }
    Ok(aggregate_success(&rows))
}
