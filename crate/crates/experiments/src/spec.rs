//! Experiment spec files.
//!
//! A spec is a TOML document: top-level keys name the experiment and its
//! run size, `[sweep]` lists the swept axes, `[base]` holds the scenario
//! (any field left out takes its default) and `[output]` the destination.

use std::fmt;
use std::path::PathBuf;

use ris_core::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    NullingProb,
    SumrateConvergence,
    #[serde(rename = "sumrate_vs_pk")]
    SumratePk,
    #[serde(rename = "sumrate_vs_budget")]
    SumrateBudget,
    PowerminSuccess,
    PowerminPower,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::NullingProb,
        Experiment::SumrateConvergence,
        Experiment::SumratePk,
        Experiment::SumrateBudget,
        Experiment::PowerminSuccess,
        Experiment::PowerminPower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::NullingProb => "nulling_prob",
            Experiment::SumrateConvergence => "sumrate_convergence",
            Experiment::SumratePk => "sumrate_vs_pk",
            Experiment::SumrateBudget => "sumrate_vs_budget",
            Experiment::PowerminSuccess => "powermin_success",
            Experiment::PowerminPower => "powermin_power",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Schemes the experiment can run, in output order.
    pub fn supported_schemes(self) -> &'static [Scheme] {
        use Scheme::*;
        match self {
            Experiment::NullingProb => &[],
            Experiment::SumrateConvergence => &[SrbOneLoop, SrbTwoLoop],
            Experiment::SumratePk | Experiment::SumrateBudget => {
                &[SrbOneLoop, SrbOneLoopZs, SrbTwoLoop, SrbTwoLoopZs, RbFixedActive, PassiveUpper]
            }
            Experiment::PowerminSuccess | Experiment::PowerminPower => &[Srb, RbFullyActive, Passive],
        }
    }

    pub fn default_schemes(self) -> Vec<Scheme> {
        use Scheme::*;
        match self {
            Experiment::NullingProb => vec![],
            Experiment::SumrateConvergence => vec![SrbOneLoop, SrbTwoLoop],
            Experiment::SumratePk => vec![SrbOneLoop, SrbOneLoopZs, RbFixedActive, PassiveUpper],
            Experiment::SumrateBudget => vec![SrbOneLoop, RbFixedActive, PassiveUpper],
            Experiment::PowerminSuccess => vec![RbFullyActive, Passive],
            Experiment::PowerminPower => vec![Srb, RbFullyActive, Passive],
        }
    }

    /// Axes that must be present (nonempty); all other axes must be empty.
    pub fn axes(self) -> &'static [Axis] {
        use Axis::*;
        match self {
            Experiment::NullingProb => &[Q, AlphaMaxSqDb],
            Experiment::SumrateConvergence => &[AlphaMaxSqDb],
            Experiment::SumratePk => &[AlphaMaxSqDb, PkDbm],
            Experiment::SumrateBudget => &[AlphaMaxSqDb, PRisDbm],
            Experiment::PowerminSuccess | Experiment::PowerminPower => &[AlphaMaxSqDb, RateReq],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SrbOneLoop,
    SrbOneLoopZs,
    SrbTwoLoop,
    SrbTwoLoopZs,
    RbFixedActive,
    PassiveUpper,
    Srb,
    RbFullyActive,
    Passive,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::SrbOneLoop => "srb_one_loop",
            Scheme::SrbOneLoopZs => "srb_one_loop_zs",
            Scheme::SrbTwoLoop => "srb_two_loop",
            Scheme::SrbTwoLoopZs => "srb_two_loop_zs",
            Scheme::RbFixedActive => "rb_fixed_active",
            Scheme::PassiveUpper => "passive_upper",
            Scheme::Srb => "srb",
            Scheme::RbFullyActive => "rb_fully_active",
            Scheme::Passive => "passive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Q,
    AlphaMaxSqDb,
    PkDbm,
    PRisDbm,
    RateReq,
}

impl Axis {
    pub fn key(self) -> &'static str {
        match self {
            Axis::Q => "q",
            Axis::AlphaMaxSqDb => "alpha_max_sq_db",
            Axis::PkDbm => "p_k_dbm",
            Axis::PRisDbm => "p_ris_dbm",
            Axis::RateReq => "rate_req_bps_hz",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub q: Vec<usize>,
    pub alpha_max_sq_db: Vec<f64>,
    pub p_k_dbm: Vec<f64>,
    pub p_ris_dbm: Vec<f64>,
    pub rate_req_bps_hz: Vec<f64>,
}

impl Sweep {
    fn len(&self, axis: Axis) -> usize {
        match axis {
            Axis::Q => self.q.len(),
            Axis::AlphaMaxSqDb => self.alpha_max_sq_db.len(),
            Axis::PkDbm => self.p_k_dbm.len(),
            Axis::PRisDbm => self.p_ris_dbm.len(),
            Axis::RateReq => self.rate_req_bps_hz.len(),
        }
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.alpha_max_sq_db
            .iter()
            .chain(&self.p_k_dbm)
            .chain(&self.p_ris_dbm)
            .chain(&self.rate_req_bps_hz)
            .copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("results") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Empty means the experiment's default scheme list.
    #[serde(default)]
    pub schemes: Vec<Scheme>,
    /// Largest passive surface used for the passive sum-rate bound.
    #[serde(default = "default_passive_max_res")]
    pub passive_max_res: usize,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub base: ScenarioConfig,
    #[serde(default)]
    pub output: Output,
}

fn default_trials() -> u64 {
    100
}

fn default_passive_max_res() -> usize {
    128
}

impl ExperimentSpec {
    /// Parses a spec; syntax and schema errors carry a 1-based line and column.
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let mut spec: ExperimentSpec = toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => line_column(text, span.start),
                None => (1, 1),
            };
            ExperimentError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        if spec.schemes.is_empty() {
            spec.schemes = spec.experiment.default_schemes();
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Schema(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let axes = self.experiment.axes();
        for axis in [Axis::Q, Axis::AlphaMaxSqDb, Axis::PkDbm, Axis::PRisDbm, Axis::RateReq] {
            let n = self.sweep.len(axis);
            if axes.contains(&axis) && n == 0 {
                return bad(format!("sweep.{} must not be empty for {}", axis.key(), self.experiment));
            }
            if !axes.contains(&axis) && n > 0 {
                return bad(format!("sweep.{} is not an axis of {}", axis.key(), self.experiment));
            }
        }
        if self.sweep.values().any(|v| !v.is_finite()) {
            return bad("sweep values must be finite".into());
        }
        if self.sweep.q.contains(&0) {
            return bad("sweep.q values must be positive".into());
        }
        if self.sweep.rate_req_bps_hz.iter().any(|r| *r < 0.0) {
            return bad("rate requirements must be nonnegative".into());
        }
        for s in &self.schemes {
            if !self.experiment.supported_schemes().contains(s) {
                return bad(format!("scheme {} is not available in {}", s.name(), self.experiment));
            }
        }
        if self.passive_max_res == 0 {
            return bad("passive_max_res must be positive".into());
        }
        self.base.validate().map_err(|e| ExperimentError::Schema(format!("base: {e}")))
    }

    /// Ready-to-edit spec with desk-scale defaults.
    pub fn template(experiment: Experiment) -> Self {
        let mut base = ScenarioConfig::default();
        let mut sweep = Sweep::default();
        let mut trials = 100;
        match experiment {
            Experiment::NullingProb => {
                sweep.q = (8..=20).collect();
                sweep.alpha_max_sq_db = vec![0.0, 10.0, 20.0, 30.0];
                trials = 200;
            }
            Experiment::SumrateConvergence => {
                base.q1 = 8;
                base.q2 = 8;
                sweep.alpha_max_sq_db = vec![30.0];
                trials = 20;
            }
            Experiment::SumratePk => {
                sweep.alpha_max_sq_db = vec![10.0, 30.0];
                sweep.p_k_dbm = vec![10.0, 15.0, 20.0, 25.0, 30.0];
            }
            Experiment::SumrateBudget => {
                sweep.alpha_max_sq_db = vec![30.0];
                sweep.p_ris_dbm = vec![5.0, 10.0, 15.0, 20.0];
            }
            Experiment::PowerminSuccess => {
                base.q1 = 8;
                base.q2 = 4;
                sweep.alpha_max_sq_db = vec![10.0, 20.0];
                sweep.rate_req_bps_hz = vec![0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 1.9];
            }
            Experiment::PowerminPower => {
                base.q1 = 8;
                base.q2 = 4;
                sweep.alpha_max_sq_db = vec![10.0, 20.0];
                sweep.rate_req_bps_hz = vec![0.3, 0.6, 0.9, 1.2];
            }
        }
        Self {
            experiment,
            trials,
            schemes: experiment.default_schemes(),
            passive_max_res: default_passive_max_res(),
            sweep,
            base,
            output: Output::default(),
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_round_trip() {
        for e in Experiment::ALL {
            let spec = ExperimentSpec::template(e);
            let back = ExperimentSpec::from_toml(&spec.to_toml()).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn minimal_spec_takes_defaults() {
        let text = "experiment = \"nulling_prob\"\n[sweep]\nq = [12]\nalpha_max_sq_db = [30.0]\n";
        let spec = ExperimentSpec::from_toml(text).unwrap();
        assert_eq!(spec.trials, 100);
        assert_eq!(spec.base, ScenarioConfig::default());
    }

    #[test]
    fn syntax_error_has_position() {
        let text = "experiment = \"nulling_prob\"\ntrials = = 3\n";
        match ExperimentSpec::from_toml(text) {
            Err(ExperimentError::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        let text = "experiment = \"nulling_prob\"\n[base]\nkk = 3\n";
        match ExperimentSpec::from_toml(text) {
            Err(ExperimentError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn axis_rules() {
        let text = "experiment = \"sumrate_vs_pk\"\n[sweep]\nalpha_max_sq_db = [30.0]\n";
        assert!(matches!(ExperimentSpec::from_toml(text), Err(ExperimentError::Schema(_))));
        let text = "experiment = \"sumrate_vs_pk\"\n[sweep]\nalpha_max_sq_db = [30.0]\np_k_dbm = [20.0]\nq = [4]\n";
        assert!(matches!(ExperimentSpec::from_toml(text), Err(ExperimentError::Schema(_))));
    }

    #[test]
    fn scheme_must_fit_experiment() {
        let text = "experiment = \"powermin_power\"\nschemes = [\"passive_upper\"]\n[sweep]\nalpha_max_sq_db = [10.0]\nrate_req_bps_hz = [0.5]\n";
        assert!(matches!(ExperimentSpec::from_toml(text), Err(ExperimentError::Schema(_))));
    }

    #[test]
    fn zero_trials_rejected() {
        let text = "experiment = \"nulling_prob\"\ntrials = 0\n[sweep]\nq = [12]\nalpha_max_sq_db = [30.0]\n";
        assert!(matches!(ExperimentSpec::from_toml(text), Err(ExperimentError::Schema(_))));
    }

    #[test]
    fn line_column_counts_from_one() {
        assert_eq!(line_column("ab\ncd", 0), (1, 1));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }
}
