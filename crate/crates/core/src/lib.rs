//! Sparse reflect-beamforming design for active-RIS-aided K-user
//! interference channels.
//!
//! * [`scenario`]: configuration, geometry and channel sampling.
//! * [`system_model`]: SINR decomposition, rates and power models.
//! * [`nulling`]: exact and amplitude-limited interference nulling.
//! * [`sumrate`]: reweighted fractional programming for sum-rate maximization.
//! * [`powermin`]: SDR + DCA power minimization under rate requirements.

pub mod error;
pub mod nulling;
pub mod powermin;
pub mod report;
pub mod scenario;
pub mod sumrate;
pub mod system_model;

pub use error::{CoreError, Result};
pub use report::SolveReport;
pub use ris_conic::{SolveStatus, C64};
pub use scenario::{ChannelRealization, ScenarioConfig, SystemParams, Tolerances};
pub use system_model::{PowerModel, PowerModelKind, ReflectVector, RisMode};
