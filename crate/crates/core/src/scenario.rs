//! Geometry, configuration and fading-channel generation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use ris_conic::C64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::system_model::{db_to_linear, dbm_to_watts};

/// Axis-aligned rectangle in the x-y plane (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    fn is_nondegenerate(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let x = self.x_min + (self.x_max - self.x_min) * rng.random::<f64>();
        let y = self.y_min + (self.y_max - self.y_min) * rng.random::<f64>();
        (x, y)
    }
}

/// `gain_db = intercept_db - exponent_coeff * log10(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pathloss {
    pub intercept_db: f64,
    pub exponent_coeff: f64,
}

impl Pathloss {
    pub const RIS_LINK: Pathloss = Pathloss {
        intercept_db: -30.0,
        exponent_coeff: 22.0,
    };
    pub const DIRECT: Pathloss = Pathloss {
        intercept_db: -30.0,
        exponent_coeff: 40.0,
    };

    pub fn gain_db(&self, distance_m: f64) -> Result<f64> {
        if !(distance_m > 0.0) || !distance_m.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "distance must be positive and finite, got {distance_m}"
            )));
        }
        Ok(self.intercept_db - self.exponent_coeff * distance_m.log10())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    RisLink,
    Direct,
}

/// Pathloss gain with the default constants for each link kind.
pub fn pathloss_db(distance_m: f64, link_kind: LinkKind) -> Result<f64> {
    match link_kind {
        LinkKind::RisLink => Pathloss::RIS_LINK.gain_db(distance_m),
        LinkKind::Direct => Pathloss::DIRECT.gain_db(distance_m),
    }
}

/// Algorithmic tolerances and iteration caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tau_reweight: f64,
    pub fp_rel_tol: f64,
    pub fp_max_iters: usize,
    /// Outer (reweighting) iterations of the two-loop method.
    pub fp_max_outer: usize,
    pub dca_penalty_tol: f64,
    pub dca_max_iters: usize,
    pub dca_rho: f64,
    pub zero_set_amp_threshold: f64,
    pub rank_tol: f64,
    pub powermin_rel_tol: f64,
    pub powermin_max_outer: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_reweight: 1e-3,
            fp_rel_tol: 1e-4,
            fp_max_iters: 300,
            fp_max_outer: 50,
            dca_penalty_tol: 1e-6,
            dca_max_iters: 100,
            dca_rho: 10.0,
            zero_set_amp_threshold: 1.0,
            rank_tol: 1e-10,
            powermin_rel_tol: 1e-3,
            powermin_max_outer: 20,
        }
    }
}

/// Physical and algorithmic parameters of one scenario. Powers are in dBm,
/// gains in dB; [`ScenarioConfig::resolve`] converts to linear units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub k: usize,
    pub q1: usize,
    pub q2: usize,
    pub tx_area: Rect,
    pub rx_area: Rect,
    pub user_z: f64,
    pub ris_origin: [f64; 3],
    pub wavelength_m: f64,
    /// Element spacings; `None` means half a wavelength.
    pub d1_m: Option<f64>,
    pub d2_m: Option<f64>,
    pub rician_kappa: f64,
    pub pathloss_ris: Pathloss,
    pub pathloss_direct: Pathloss,
    pub sigma_r_sq_dbm: f64,
    pub sigma_s_sq_dbm: f64,
    pub p_k_dbm: Vec<f64>,
    pub alpha_max_sq_db: f64,
    pub p_bias_dbm: f64,
    pub p_dc_dbm: f64,
    pub xi: f64,
    pub p_ris_budget_dbm: f64,
    pub rate_req_bps_hz: Vec<f64>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            k: 4,
            q1: 4,
            q2: 4,
            tx_area: Rect {
                x_min: 20.0,
                x_max: 60.0,
                y_min: 5.0,
                y_max: 45.0,
            },
            rx_area: Rect {
                x_min: 20.0,
                x_max: 60.0,
                y_min: -245.0,
                y_max: -205.0,
            },
            user_z: -20.0,
            ris_origin: [0.0, 0.0, 0.0],
            wavelength_m: 0.1,
            d1_m: None,
            d2_m: None,
            rician_kappa: 9.0,
            pathloss_ris: Pathloss::RIS_LINK,
            pathloss_direct: Pathloss::DIRECT,
            sigma_r_sq_dbm: -100.0,
            sigma_s_sq_dbm: -100.0,
            p_k_dbm: vec![23.0; 4],
            alpha_max_sq_db: 30.0,
            p_bias_dbm: -6.0,
            p_dc_dbm: -10.0,
            xi: 1.25,
            p_ris_budget_dbm: 10.0,
            rate_req_bps_hz: vec![0.0; 4],
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }
}

/// Linear-unit parameters used by the algorithms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    pub k: usize,
    pub q: usize,
    pub powers: Vec<f64>,
    pub sigma_r_sq: f64,
    pub sigma_s_sq: f64,
    pub alpha_max: f64,
    pub p_bias_w: f64,
    pub p_dc_w: f64,
    pub xi: f64,
    pub p_ris_w: f64,
    pub rate_req: Vec<f64>,
    pub tol: Tolerances,
}

impl SystemParams {
    /// Per-RE output-power-independent cost `P_bias + P_DC`.
    pub fn opi_per_re(&self) -> f64 {
        self.p_bias_w + self.p_dc_w
    }
}

impl ScenarioConfig {
    pub fn q(&self) -> usize {
        self.q1 * self.q2
    }

    pub fn d1(&self) -> f64 {
        self.d1_m.unwrap_or(self.wavelength_m / 2.0)
    }

    pub fn d2(&self) -> f64 {
        self.d2_m.unwrap_or(self.wavelength_m / 2.0)
    }

    /// Copy with every user transmitting at `p_dbm`.
    pub fn with_uniform_power(&self, p_dbm: f64) -> Self {
        let mut c = self.clone();
        c.p_k_dbm = vec![p_dbm; c.k];
        c
    }

    /// Copy with every user requiring `rate` bps/Hz.
    pub fn with_uniform_rate(&self, rate: f64) -> Self {
        let mut c = self.clone();
        c.rate_req_bps_hz = vec![rate; c.k];
        c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CoreError::Config(m));
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if self.q1 == 0 || self.q2 == 0 {
            return bad("q1 and q2 must be at least 1".into());
        }
        if !self.tx_area.is_nondegenerate() || !self.rx_area.is_nondegenerate() {
            return bad("tx_area and rx_area must be nondegenerate rectangles".into());
        }
        if self.p_k_dbm.len() != self.k {
            return bad(format!("p_k_dbm has {} entries, expected {}", self.p_k_dbm.len(), self.k));
        }
        if self.rate_req_bps_hz.len() != self.k {
            return bad(format!(
                "rate_req_bps_hz has {} entries, expected {}",
                self.rate_req_bps_hz.len(),
                self.k
            ));
        }
        if self.rate_req_bps_hz.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("rate requirements must be finite and nonnegative".into());
        }
        let scalars = [
            self.user_z,
            self.wavelength_m,
            self.d1(),
            self.d2(),
            self.rician_kappa,
            self.sigma_r_sq_dbm,
            self.sigma_s_sq_dbm,
            self.alpha_max_sq_db,
            self.p_bias_dbm,
            self.p_dc_dbm,
            self.xi,
            self.p_ris_budget_dbm,
        ];
        if scalars.iter().chain(self.p_k_dbm.iter()).chain(self.ris_origin.iter()).any(|v| !v.is_finite()) {
            return bad("all powers and geometry values must be finite".into());
        }
        if !(self.wavelength_m > 0.0 && self.d1() > 0.0 && self.d2() > 0.0) {
            return bad("wavelength and element spacings must be positive".into());
        }
        if self.rician_kappa < 0.0 {
            return bad("rician_kappa must be nonnegative".into());
        }
        if self.alpha_max_sq_db < 0.0 {
            return bad("alpha_max_sq_db must be at least 0 dB (amplitude bound >= 1)".into());
        }
        if !(self.xi > 0.0) {
            return bad("xi must be positive".into());
        }
        let t = &self.tolerances;
        if !(t.tau_reweight > 0.0 && t.fp_rel_tol > 0.0 && t.dca_penalty_tol > 0.0 && t.dca_rho > 0.0) {
            return bad("tau_reweight, fp_rel_tol, dca_penalty_tol and dca_rho must be positive".into());
        }
        if t.fp_max_iters == 0 || t.dca_max_iters == 0 || t.powermin_max_outer == 0 || t.fp_max_outer == 0 {
            return bad("iteration caps must be positive".into());
        }
        if !(t.zero_set_amp_threshold >= 0.0 && t.rank_tol > 0.0 && t.powermin_rel_tol > 0.0) {
            return bad("zero_set_amp_threshold, rank_tol and powermin_rel_tol out of range".into());
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<SystemParams> {
        self.validate()?;
        Ok(SystemParams {
            k: self.k,
            q: self.q(),
            powers: self.p_k_dbm.iter().map(|&p| dbm_to_watts(p)).collect(),
            sigma_r_sq: dbm_to_watts(self.sigma_r_sq_dbm),
            sigma_s_sq: dbm_to_watts(self.sigma_s_sq_dbm),
            alpha_max: db_to_linear(self.alpha_max_sq_db).sqrt(),
            p_bias_w: dbm_to_watts(self.p_bias_dbm),
            p_dc_w: dbm_to_watts(self.p_dc_dbm),
            xi: self.xi,
            p_ris_w: dbm_to_watts(self.p_ris_budget_dbm),
            rate_req: self.rate_req_bps_hz.clone(),
            tol: self.tolerances,
        })
    }
}

/// Random source for Monte Carlo trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn cn<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Uniform planar-array response; entry `q` (0-based) uses
/// `i1 = q mod Q1` and `i2 = floor(q / Q2)`.
pub fn steering_vector(
    azimuth: f64,
    elevation: f64,
    q1: usize,
    q2: usize,
    d1_m: f64,
    d2_m: f64,
    wavelength_m: f64,
) -> Result<DVector<C64>> {
    if q1 == 0 || q2 == 0 {
        return Err(CoreError::InvalidArgument("array dimensions must be positive".into()));
    }
    if !(wavelength_m > 0.0) {
        return Err(CoreError::InvalidArgument("wavelength must be positive".into()));
    }
    let k0 = 2.0 * PI / wavelength_m;
    let u = d1_m * azimuth.sin() * elevation.cos();
    let v = d2_m * elevation.sin();
    Ok(DVector::from_fn(q1 * q2, |q, _| {
        let i1 = (q % q1) as f64;
        let i2 = (q / q2) as f64;
        C64::from_polar(1.0, k0 * (i1 * u + i2 * v))
    }))
}

/// Azimuth (in the x-y plane) and elevation (from the x-y plane) of `p` seen from `origin`.
pub fn angles_from(origin: [f64; 3], p: [f64; 3]) -> (f64, f64) {
    let dx = p[0] - origin[0];
    let dy = p[1] - origin[1];
    let dz = p[2] - origin[2];
    (dy.atan2(dx), dz.atan2(dx.hypot(dy)))
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// User positions of one realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Placement {
    pub tx: Vec<[f64; 3]>,
    pub rx: Vec<[f64; 3]>,
}

pub fn sample_placement<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Placement {
    let mut draw = |area: &Rect| {
        (0..config.k)
            .map(|_| {
                let (x, y) = area.sample(rng);
                [x, y, config.user_z]
            })
            .collect::<Vec<_>>()
    };
    let tx = draw(&config.tx_area);
    let rx = draw(&config.rx_area);
    Placement { tx, rx }
}

/// One channel draw plus its derived cascaded quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `h_d[(k, j)]`: direct channel Tx j → Rx k.
    pub h_d: DMatrix<C64>,
    /// Forward channels, column k is Tx k → RIS.
    pub h_t: DMatrix<C64>,
    /// Backward channels, column k is RIS → Rx k.
    pub h_r: DMatrix<C64>,
    /// Cross pairs `(k, j)`, `k != j`, in stacking order.
    pub pairs: Vec<(usize, usize)>,
    /// Columns are `h_b(k, j)` for `pairs`.
    pub h_b_stack: DMatrix<C64>,
    pub h_d_stack: DVector<C64>,
}

impl ChannelRealization {
    pub fn from_parts(h_d: DMatrix<C64>, h_t: DMatrix<C64>, h_r: DMatrix<C64>) -> Result<Self> {
        let k = h_d.nrows();
        if h_d.ncols() != k || h_t.ncols() != k || h_r.ncols() != k {
            return Err(CoreError::InvalidArgument("channel matrices must have K columns".into()));
        }
        if h_t.nrows() != h_r.nrows() || h_t.nrows() == 0 {
            return Err(CoreError::InvalidArgument("forward and backward channels need Q rows".into()));
        }
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|j| (0..k).filter(move |&kk| kk != j).map(move |kk| (kk, j)))
            .collect();
        let q = h_t.nrows();
        let mut h_b_stack = DMatrix::zeros(q, pairs.len());
        let mut h_d_stack = DVector::zeros(pairs.len());
        for (col, &(kk, j)) in pairs.iter().enumerate() {
            for r in 0..q {
                h_b_stack[(r, col)] = (h_t[(r, j)] * h_r[(r, kk)]).conj();
            }
            h_d_stack[col] = h_d[(kk, j)];
        }
        Ok(Self {
            h_d,
            h_t,
            h_r,
            pairs,
            h_b_stack,
            h_d_stack,
        })
    }

    pub fn k(&self) -> usize {
        self.h_d.nrows()
    }

    pub fn q(&self) -> usize {
        self.h_t.nrows()
    }

    /// Cascaded channel `conj(h_t,j) ⊙ conj(h_r,k)` of the link Tx j → Rx k.
    pub fn h_b(&self, k: usize, j: usize) -> DVector<C64> {
        DVector::from_fn(self.q(), |r, _| (self.h_t[(r, j)] * self.h_r[(r, k)]).conj())
    }

    /// Same channels restricted to the first `q` REs.
    pub fn truncated(&self, q: usize) -> Result<Self> {
        if q == 0 || q > self.q() {
            return Err(CoreError::InvalidArgument(format!("cannot keep {q} of {} REs", self.q())));
        }
        Self::from_parts(self.h_d.clone(), self.h_t.rows(0, q).into_owned(), self.h_r.rows(0, q).into_owned())
    }
}

fn ris_link<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    q1: usize,
    q2: usize,
    q: usize,
    user: [f64; 3],
    rng: &mut R,
) -> Result<DVector<C64>> {
    let gain_db = config.pathloss_ris.gain_db(distance(user, config.ris_origin))?;
    let rho = db_to_linear(gain_db).sqrt();
    let (az, el) = angles_from(config.ris_origin, user);
    let los = steering_vector(az, el, q1, q2, config.d1(), config.d2(), config.wavelength_m)?;
    let kappa = config.rician_kappa;
    let w_los = (kappa / (1.0 + kappa)).sqrt();
    let w_nlos = (1.0 / (1.0 + kappa)).sqrt();
    Ok(DVector::from_fn(q, |i, _| {
        let n = cn(rng);
        (los[i] * w_los + n * w_nlos) * rho
    }))
}

/// Fading for a fixed placement on a `q1 × q2` array (first `q` elements kept).
pub fn sample_fading<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    placement: &Placement,
    q1: usize,
    q2: usize,
    q: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let k = config.k;
    if q == 0 || q > q1 * q2 {
        return Err(CoreError::InvalidArgument(format!("cannot take {q} elements from a {q1}x{q2} array")));
    }
    let mut h_d = DMatrix::zeros(k, k);
    for kk in 0..k {
        for j in 0..k {
            let d = distance(placement.tx[j], placement.rx[kk]);
            let gain = db_to_linear(config.pathloss_direct.gain_db(d)?);
            h_d[(kk, j)] = cn(rng) * gain.sqrt();
        }
    }
    let mut h_t = DMatrix::zeros(q, k);
    for j in 0..k {
        h_t.set_column(j, &ris_link(config, q1, q2, q, placement.tx[j], rng)?);
    }
    let mut h_r = DMatrix::zeros(q, k);
    for kk in 0..k {
        h_r.set_column(kk, &ris_link(config, q1, q2, q, placement.rx[kk], rng)?);
    }
    ChannelRealization::from_parts(h_d, h_t, h_r)
}

/// Positions and fading for the configured array.
pub fn sample_channels<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<ChannelRealization> {
    config.validate()?;
    let placement = sample_placement(config, rng);
    sample_fading(config, &placement, config.q1, config.q2, config.q(), rng)
}

/// I.i.d. Rayleigh channels with `E|h_d|² = 1` and
/// `E|h_d|² / E|[h_b]_q|² = gain_ratio_db`. The draw for `q` REs is a prefix
/// of the draw for any larger `q` from the same random state.
pub fn sample_iid_setup<R: Rng + ?Sized>(
    q: usize,
    k: usize,
    gain_ratio_db: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if q == 0 || k == 0 {
        return Err(CoreError::InvalidArgument("q and k must be positive".into()));
    }
    if !gain_ratio_db.is_finite() {
        return Err(CoreError::InvalidArgument("gain ratio must be finite".into()));
    }
    let h_d = DMatrix::from_fn(k, k, |_, _| cn(rng));
    let link_std = db_to_linear(-gain_ratio_db).powf(0.25);
    let mut h_t = DMatrix::zeros(q, k);
    let mut h_r = DMatrix::zeros(q, k);
    for r in 0..q {
        for c in 0..k {
            h_t[(r, c)] = cn(rng) * link_std;
        }
        for c in 0..k {
            h_r[(r, c)] = cn(rng) * link_std;
        }
    }
    ChannelRealization::from_parts(h_d, h_t, h_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pathloss_table_values() {
        assert!((pathloss_db(1.0, LinkKind::RisLink).unwrap() + 30.0).abs() < 1e-12);
        assert!((pathloss_db(100.0, LinkKind::RisLink).unwrap() + 74.0).abs() < 1e-12);
        assert!((pathloss_db(10.0, LinkKind::Direct).unwrap() + 70.0).abs() < 1e-12);
        assert!(pathloss_db(0.0, LinkKind::Direct).is_err());
        assert!(pathloss_db(-3.0, LinkKind::RisLink).is_err());
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let v = steering_vector(0.0, 0.0, 4, 4, 0.05, 0.05, 0.1).unwrap();
        assert!(v.iter().all(|e| (e - C64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn steering_half_wave_endfire_phases() {
        let v = steering_vector(PI / 2.0, 0.0, 2, 2, 0.05, 0.05, 0.1).unwrap();
        let expected = [1.0, -1.0, 1.0, -1.0];
        for (e, x) in v.iter().zip(expected) {
            assert!((e - C64::new(x, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn stacking_order_and_cascade() {
        let mut rng = trial_rng(3, 0);
        let ch = sample_iid_setup(5, 3, 20.0, &mut rng).unwrap();
        assert_eq!(ch.pairs, vec![(1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2)]);
        assert_eq!(ch.h_b_stack.ncols(), 6);
        for (col, &(k, j)) in ch.pairs.iter().enumerate() {
            assert_eq!(ch.h_b_stack.column(col).into_owned(), ch.h_b(k, j));
            assert_eq!(ch.h_d_stack[col], ch.h_d[(k, j)]);
        }
    }

    #[test]
    fn iid_prefix_property() {
        let big = sample_iid_setup(12, 3, 20.0, &mut trial_rng(9, 4)).unwrap();
        let small = sample_iid_setup(7, 3, 20.0, &mut trial_rng(9, 4)).unwrap();
        assert_eq!(big.truncated(7).unwrap(), small);
    }

    #[test]
    fn config_defaults_validate_and_resolve() {
        let c = ScenarioConfig::default();
        let p = c.resolve().unwrap();
        assert_eq!(p.q, 16);
        assert!((p.alpha_max - 1000f64.sqrt()).abs() < 1e-9);
        assert!((p.p_ris_w - 0.01).abs() < 1e-15);
        let mut bad = c.clone();
        bad.k = 1;
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.p_k_dbm.pop();
        assert!(bad.validate().is_err());
        let mut bad = c;
        bad.tx_area.x_max = bad.tx_area.x_min;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn geometry_angles() {
        let (az, el) = angles_from([0.0; 3], [1.0, 1.0, 0.0]);
        assert!((az - PI / 4.0).abs() < 1e-12 && el.abs() < 1e-12);
        let (_, el) = angles_from([0.0; 3], [3.0, 4.0, -5.0]);
        assert!((el + PI / 4.0).abs() < 1e-12);
    }
}
