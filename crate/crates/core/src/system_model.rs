//! SINR structure, achievable rates and RIS power-consumption models.

use nalgebra::{DMatrix, DVector};
use ris_conic::C64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scenario::{ChannelRealization, SystemParams};

/// Slack allowed on amplitude bounds when checking a reflect vector.
pub const AMPLITUDE_SLACK: f64 = 1e-9;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Complex reflection coefficients, one per RE.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectVector {
    pub a: DVector<C64>,
}

impl ReflectVector {
    pub fn new(a: DVector<C64>) -> Self {
        Self { a }
    }

    pub fn zeros(q: usize) -> Self {
        Self { a: DVector::zeros(q) }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.a.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Number of entries that are not exactly zero.
    pub fn active_count(&self) -> usize {
        self.a.iter().filter(|v| **v != C64::new(0.0, 0.0)).count()
    }

    pub fn check_amplitude(&self, bound: f64) -> Result<()> {
        let m = self.max_amplitude();
        if m > bound + AMPLITUDE_SLACK {
            return Err(CoreError::InvalidArgument(format!(
                "reflection amplitude {m} exceeds bound {bound}"
            )));
        }
        Ok(())
    }

    /// `[re_0, im_0, re_1, im_1, ...]`.
    pub fn interleaved(&self) -> Vec<f64> {
        self.a.iter().flat_map(|v| [v.re, v.im]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RisMode {
    Active,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerModelKind {
    ActiveSparse,
    ActiveOriginal,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub kind: PowerModelKind,
    pub p_bias_w: f64,
    pub p_dc_w: f64,
    pub xi: f64,
}

impl PowerModel {
    pub fn from_params(kind: PowerModelKind, p: &SystemParams) -> Self {
        Self {
            kind,
            p_bias_w: p.p_bias_w,
            p_dc_w: p.p_dc_w,
            xi: p.xi,
        }
    }
}

/// Noise powers in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    pub sigma_r_sq: f64,
    pub sigma_s_sq: f64,
}

impl Noise {
    pub fn from_params(p: &SystemParams, mode: RisMode) -> Self {
        Self {
            sigma_r_sq: match mode {
                RisMode::Active => p.sigma_r_sq,
                RisMode::Passive => 0.0,
            },
            sigma_s_sq: p.sigma_s_sq,
        }
    }
}

/// Quantities of user `k` such that its SINR at `a` is
/// `p |d + s^H a|² / (a^H (R_r + R_b) a + 2 Re(g^H a) + C)`.
#[derive(Debug, Clone)]
pub struct UserTerms {
    pub power: f64,
    /// `h_d,kk`.
    pub direct: C64,
    /// `h_b,kk`.
    pub cascaded: DVector<C64>,
    /// Diagonal of `R_r,k = σ_r² diag(|h_r,k|²)`.
    pub r_r: DVector<f64>,
    /// `R_b,k = Σ_{j≠k} p_j h_b,kj h_b,kj^H`.
    pub r_b: DMatrix<C64>,
    pub g: DVector<C64>,
    pub c: f64,
}

impl UserTerms {
    /// `h_d,kk + h_b,kk^H a`.
    pub fn signal(&self, a: &DVector<C64>) -> C64 {
        self.direct + self.cascaded.dotc(a)
    }

    /// `R_r + R_b` as a dense matrix.
    pub fn curvature(&self) -> DMatrix<C64> {
        let mut m = self.r_b.clone();
        for (i, v) in self.r_r.iter().enumerate() {
            m[(i, i)] += C64::new(*v, 0.0);
        }
        m
    }

    pub fn denominator(&self, a: &DVector<C64>) -> f64 {
        let quad = (a.adjoint() * &self.r_b * a)[(0, 0)].re
            + self
                .r_r
                .iter()
                .zip(a.iter())
                .map(|(r, v)| r * v.norm_sqr())
                .sum::<f64>();
        quad + 2.0 * self.g.dotc(a).re + self.c
    }

    pub fn sinr(&self, a: &DVector<C64>) -> f64 {
        self.power * self.signal(a).norm_sqr() / self.denominator(a)
    }
}

#[derive(Debug, Clone)]
pub struct SinrDecomposition {
    pub users: Vec<UserTerms>,
}

impl SinrDecomposition {
    pub fn k(&self) -> usize {
        self.users.len()
    }

    pub fn sinrs(&self, a: &DVector<C64>) -> Vec<f64> {
        self.users.iter().map(|u| u.sinr(a)).collect()
    }

    pub fn rates(&self, a: &DVector<C64>) -> Vec<f64> {
        self.users.iter().map(|u| (1.0 + u.sinr(a)).log2()).collect()
    }

    pub fn sum_rate(&self, a: &DVector<C64>) -> f64 {
        self.rates(a).iter().sum()
    }
}

pub fn sinr_decomposition(ch: &ChannelRealization, powers: &[f64], noise: Noise) -> Result<SinrDecomposition> {
    let k = ch.k();
    let q = ch.q();
    if powers.len() != k {
        return Err(CoreError::InvalidArgument(format!(
            "expected {k} transmit powers, got {}",
            powers.len()
        )));
    }
    let users = (0..k)
        .map(|kk| {
            let mut r_b = DMatrix::zeros(q, q);
            let mut g = DVector::zeros(q);
            let mut c = noise.sigma_s_sq;
            for j in (0..k).filter(|&j| j != kk) {
                let hb = ch.h_b(kk, j);
                let pj = powers[j];
                r_b += (&hb * hb.adjoint()) * C64::new(pj, 0.0);
                g += &hb * (ch.h_d[(kk, j)] * pj);
                c += pj * ch.h_d[(kk, j)].norm_sqr();
            }
            UserTerms {
                power: powers[kk],
                direct: ch.h_d[(kk, kk)],
                cascaded: ch.h_b(kk, kk),
                r_r: DVector::from_fn(q, |r, _| noise.sigma_r_sq * ch.h_r[(r, kk)].norm_sqr()),
                r_b,
                g,
                c,
            }
        })
        .collect();
    Ok(SinrDecomposition { users })
}

/// Per-user achievable rates in bps/Hz. Passive mode drops the RIS noise and
/// bounds amplitudes by one; active mode bounds them by `alpha_max`.
pub fn achievable_rates(
    a: &ReflectVector,
    ch: &ChannelRealization,
    powers: &[f64],
    noise: Noise,
    mode: RisMode,
    alpha_max: f64,
) -> Result<Vec<f64>> {
    if a.len() != ch.q() {
        return Err(CoreError::InvalidArgument(format!(
            "reflect vector has {} entries, channel has {} REs",
            a.len(),
            ch.q()
        )));
    }
    let (noise, bound) = match mode {
        RisMode::Active => (noise, alpha_max),
        RisMode::Passive => (
            Noise {
                sigma_r_sq: 0.0,
                ..noise
            },
            1.0,
        ),
    };
    a.check_amplitude(bound)?;
    Ok(sinr_decomposition(ch, powers, noise)?.rates(&a.a))
}

/// Diagonal of `E_p`: `[H_t P H_t^H]_qq + σ_r²`.
pub fn opd_weights(ch: &ChannelRealization, powers: &[f64], sigma_r_sq: f64) -> DVector<f64> {
    DVector::from_fn(ch.q(), |r, _| {
        (0..ch.k()).map(|j| powers[j] * ch.h_t[(r, j)].norm_sqr()).sum::<f64>() + sigma_r_sq
    })
}

/// Output-power-dependent term `a^H E_p a`.
pub fn opd_power(a: &DVector<C64>, ep: &DVector<f64>) -> f64 {
    a.iter().zip(ep.iter()).map(|(v, e)| e * v.norm_sqr()).sum()
}

/// RIS power consumption in watts under `model`.
pub fn power_consumption(
    a: &ReflectVector,
    ch: &ChannelRealization,
    powers: &[f64],
    sigma_r_sq: f64,
    model: &PowerModel,
) -> f64 {
    let q = ch.q() as f64;
    match model.kind {
        PowerModelKind::Passive => q * model.p_dc_w,
        PowerModelKind::ActiveSparse | PowerModelKind::ActiveOriginal => {
            let ep = opd_weights(ch, powers, sigma_r_sq);
            let opd = model.xi * opd_power(&a.a, &ep);
            let count = if model.kind == PowerModelKind::ActiveSparse {
                a.active_count() as f64
            } else {
                q
            };
            count * (model.p_bias_w + model.p_dc_w) + opd
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{sample_iid_setup, trial_rng};

    fn rand_a(q: usize, seed: u64) -> DVector<C64> {
        let ch = sample_iid_setup(q, 2, 0.0, &mut trial_rng(seed, 99)).unwrap();
        ch.h_t.column(0).into_owned()
    }

    #[test]
    fn decomposition_matches_direct_sum() {
        let ch = sample_iid_setup(4, 3, 20.0, &mut trial_rng(1, 0)).unwrap();
        let powers = [1.0, 2.0, 0.5];
        let noise = Noise {
            sigma_r_sq: 0.3,
            sigma_s_sq: 0.1,
        };
        let d = sinr_decomposition(&ch, &powers, noise).unwrap();
        for s in 0..5 {
            let a = rand_a(4, s) * C64::new(3.0, 0.0);
            for k in 0..3 {
                let mut direct = noise.sigma_s_sq;
                for j in (0..3).filter(|&j| j != k) {
                    direct += powers[j] * (ch.h_d[(k, j)] + ch.h_b(k, j).dotc(&a)).norm_sqr();
                }
                for q in 0..4 {
                    direct += noise.sigma_r_sq * ch.h_r[(q, k)].norm_sqr() * a[q].norm_sqr();
                }
                let got = d.users[k].denominator(&a);
                assert!((got - direct).abs() <= 1e-10 * direct);
            }
        }
        let zero = DVector::zeros(4);
        for u in &d.users {
            assert!((u.denominator(&zero) - u.c).abs() < 1e-15);
        }
    }

    #[test]
    fn passive_noise_removes_ris_noise() {
        let ch = sample_iid_setup(4, 2, 20.0, &mut trial_rng(2, 0)).unwrap();
        let d = sinr_decomposition(
            &ch,
            &[1.0, 1.0],
            Noise {
                sigma_r_sq: 0.0,
                sigma_s_sq: 0.1,
            },
        )
        .unwrap();
        assert!(d.users.iter().all(|u| u.r_r.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn zero_reflection_rates() {
        let ch = sample_iid_setup(4, 2, 20.0, &mut trial_rng(5, 0)).unwrap();
        let noise = Noise {
            sigma_r_sq: 0.1,
            sigma_s_sq: 0.1,
        };
        let r = achievable_rates(&ReflectVector::zeros(4), &ch, &[1.0, 2.0], noise, RisMode::Active, 2.0).unwrap();
        let expect0 = (1.0 + ch.h_d[(0, 0)].norm_sqr() / (2.0 * ch.h_d[(0, 1)].norm_sqr() + 0.1)).log2();
        assert!((r[0] - expect0).abs() < 1e-12);
    }

    #[test]
    fn single_user_rate() {
        let h_d = DMatrix::from_element(1, 1, C64::new(0.6, -0.8));
        let h = DMatrix::from_element(3, 1, C64::new(0.1, 0.2));
        let ch = ChannelRealization::from_parts(h_d, h.clone(), h).unwrap();
        let r = achievable_rates(
            &ReflectVector::zeros(3),
            &ch,
            &[2.0],
            Noise {
                sigma_r_sq: 0.5,
                sigma_s_sq: 0.25,
            },
            RisMode::Active,
            1.0,
        )
        .unwrap();
        assert!((r[0] - (1.0f64 + 2.0 / 0.25).log2()).abs() < 1e-12);
    }

    #[test]
    fn amplitude_violation_rejected() {
        let ch = sample_iid_setup(2, 2, 20.0, &mut trial_rng(5, 0)).unwrap();
        let a = ReflectVector::new(DVector::from_element(2, C64::new(1.5, 0.0)));
        let noise = Noise {
            sigma_r_sq: 0.1,
            sigma_s_sq: 0.1,
        };
        assert!(achievable_rates(&a, &ch, &[1.0, 1.0], noise, RisMode::Passive, 10.0).is_err());
        assert!(achievable_rates(&a, &ch, &[1.0, 1.0], noise, RisMode::Active, 10.0).is_ok());
    }

    #[test]
    fn power_model_table_values() {
        let ch = sample_iid_setup(64, 2, 20.0, &mut trial_rng(5, 0)).unwrap();
        let mut m = PowerModel {
            kind: PowerModelKind::ActiveOriginal,
            p_bias_w: dbm_to_watts(-6.0),
            p_dc_w: dbm_to_watts(-10.0),
            xi: 1.25,
        };
        let zero = ReflectVector::zeros(64);
        let p = power_consumption(&zero, &ch, &[1.0, 1.0], 1e-13, &m);
        assert!((p - 64.0 * (dbm_to_watts(-6.0) + 1e-4)).abs() < 1e-15);
        assert!((p - 0.02248).abs() < 1e-4);
        m.kind = PowerModelKind::ActiveSparse;
        assert_eq!(power_consumption(&zero, &ch, &[1.0, 1.0], 1e-13, &m), 0.0);
        m.kind = PowerModelKind::Passive;
        assert!((power_consumption(&zero, &ch, &[1.0, 1.0], 1e-13, &m) - 64.0 * 1e-4).abs() < 1e-15);
    }

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-100.0) - 1e-13).abs() < 1e-27);
        assert!((watts_to_dbm(0.01) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(20.0) - 100.0).abs() < 1e-12);
    }
}
