use nalgebra::DVector;
use ris_conic::{SolveStatus, C64};
use serde::{Serialize, Serializer};

fn interleaved<S: Serializer>(a: &DVector<C64>, s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<f64> = a.iter().flat_map(|c| [c.re, c.im]).collect();
    v.serialize(s)
}

/// Outcome of one sum-rate or power-minimization run.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub scheme: String,
    pub status: SolveStatus,
    /// Rate requirements met (power minimization) or budget respected (sum rate).
    pub feasible: bool,
    /// Final reflect vector as `[re_0, im_0, re_1, im_1, ...]`.
    #[serde(serialize_with = "interleaved")]
    pub a: DVector<C64>,
    /// True sum rate of each accepted iterate (sum rate) or power of each
    /// outer iterate (power minimization).
    pub trajectory: Vec<f64>,
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    pub power_w: f64,
    pub active_res: usize,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub dca_iterations: usize,
    /// Entries with amplitude below one after each outer iteration.
    pub closed_trajectory: Vec<usize>,
    pub diagnostics: Vec<String>,
}

impl SolveReport {
    pub fn empty(scheme: &str, q: usize) -> Self {
        Self {
            scheme: scheme.to_string(),
            status: SolveStatus::Optimal,
            feasible: true,
            a: DVector::zeros(q),
            trajectory: Vec::new(),
            rates: Vec::new(),
            sum_rate: 0.0,
            power_w: 0.0,
            active_res: 0,
            iterations: 0,
            outer_iterations: 0,
            dca_iterations: 0,
            closed_trajectory: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
