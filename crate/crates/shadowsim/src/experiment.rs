//! Coincidence statistics for the two-wing interferometer.
//!
//! The joint detector distribution is always computed two ways — the closed
//! form `½cos²((β−α)/2)` / `½sin²((β−α)/2)` and the amplitude pipeline
//! (source-normalized products of per-wing bra-kets) — and the two routes
//! are required to agree to `1e-12` before a distribution is handed out.
//!
//! One normalization subtlety is easy to trip over: the bare correlated-pair
//! sum `⟨u|a⟩⟨u'|a'⟩ + ⟨u|b⟩⟨u'|b'⟩` has squared modulus `cos²((β−α)/2)`,
//! and the four bare outcomes sum to 2, not 1. Each joint amplitude must
//! carry one factor of the source normalization `1/√2` (for the two
//! emission alternatives) for the outcome set to be a distribution; the
//! amplitude route applies it and the cross-check pins it.
//!
//! Monte Carlo sampling is seeded and partition-invariant: trial `k` draws
//! from its own RNG substream, so the record list is byte-identical no
//! matter how trials are distributed over workers.

use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::EXACT_TOL;
use crate::layout::{build_rarity_tapster, Layout};
use crate::rng::trial_rng;
use crate::streams::{assign_streams, joint_amplitude, SourceAssignment, StreamError};
use rand::Rng;

/// Joint probabilities of the four coincidence outcomes at settings
/// `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointDistribution {
    pub alpha: f64,
    pub beta: f64,
    pub p_uu: f64,
    pub p_ud: f64,
    pub p_du: f64,
    pub p_dd: f64,
}

impl JointDistribution {
    pub fn probabilities(&self) -> [f64; 4] {
        [self.p_uu, self.p_ud, self.p_du, self.p_dd]
    }

    pub fn sum(&self) -> f64 {
        self.p_uu + self.p_ud + self.p_du + self.p_dd
    }

    /// `P(left detector = u)`, independent of `beta` (no signaling).
    pub fn marginal_left_u(&self) -> f64 {
        self.p_uu + self.p_ud
    }

    /// `P(right detector = u')`, independent of `alpha`.
    pub fn marginal_right_u(&self) -> f64 {
        self.p_uu + self.p_du
    }

    /// Correlation `E = p_uu + p_dd − p_ud − p_du`.
    pub fn correlation(&self) -> f64 {
        self.p_uu + self.p_dd - self.p_ud - self.p_du
    }
}

/// Left-wing detector outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LeftOutcome {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "d")]
    D,
}

/// Right-wing detector outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RightOutcome {
    #[serde(rename = "u'")]
    UPrime,
    #[serde(rename = "d'")]
    DPrime,
}

impl LeftOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            LeftOutcome::U => "u",
            LeftOutcome::D => "d",
        }
    }
}

impl RightOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            RightOutcome::UPrime => "u'",
            RightOutcome::DPrime => "d'",
        }
    }
}

/// One Monte Carlo trial: which detectors fired and which paths the source
/// event assigned to the tangible pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceRecord {
    pub trial: u64,
    pub left: LeftOutcome,
    pub right: RightOutcome,
    pub assignment: SourceAssignment,
    /// RNG substream the trial drew from.
    pub substream: u64,
}

/// CHSH angle quadruple `(α₁, α₂, β₁, β₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshAngles {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl ChshAngles {
    /// The four settings in the fixed estimator order
    /// `(α₁,β₁), (α₁,β₂), (α₂,β₁), (α₂,β₂)`.
    pub fn settings(&self) -> [(f64, f64); 4] {
        [
            (self.alpha1, self.beta1),
            (self.alpha1, self.beta2),
            (self.alpha2, self.beta1),
            (self.alpha2, self.beta2),
        ]
    }
}

/// CHSH statistic `S = E(α₁,β₁) − E(α₁,β₂) + E(α₂,β₁) + E(α₂,β₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshResult {
    pub angles: ChshAngles,
    /// Correlations at the four settings, in [`ChshAngles::settings`] order.
    pub e: [f64; 4],
    /// Standard errors of `e` when estimated from counts.
    pub e_stderr: Option<[f64; 4]>,
    pub s: f64,
    pub s_stderr: Option<f64>,
    /// `|S| > 2`.
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error(
        "closed-form and amplitude routes disagree at alpha={alpha}, beta={beta}: |Δ|={defect}"
    )]
    RouteMismatch { alpha: f64, beta: f64, defect: f64 },
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("CHSH setting {setting} has no records")]
    MissingSetting { setting: usize },
    #[error("CHSH setting {setting} has {n} records; at least {min} required")]
    TooFewRecords { setting: usize, n: usize, min: usize },
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Coincidence probabilities from the closed form.
pub fn joint_closed_form(alpha: f64, beta: f64) -> JointDistribution {
    let half = (beta - alpha) / 2.0;
    let c2 = half.cos().powi(2);
    let s2 = half.sin().powi(2);
    JointDistribution {
        alpha,
        beta,
        p_uu: 0.5 * c2,
        p_ud: 0.5 * s2,
        p_du: 0.5 * s2,
        p_dd: 0.5 * c2,
    }
}

/// Coincidence probabilities from squared joint amplitudes of a two-wing
/// layout (detector order `u/d` × `u'/d'`).
pub fn joint_via_amplitudes(layout: &Layout) -> Result<[f64; 4], StreamError> {
    let mut out = [0.0; 4];
    for (i, (l, r)) in [("u", "u'"), ("u", "d'"), ("d", "u'"), ("d", "d'")]
        .into_iter()
        .enumerate()
    {
        out[i] = joint_amplitude(layout, l, r)?.norm_sqr();
    }
    Ok(out)
}

/// The cross-checked joint distribution: closed form and amplitude pipeline
/// must agree within `1e-12` entry by entry.
pub fn joint_distribution(alpha: f64, beta: f64) -> Result<JointDistribution, ExperimentError> {
    let closed = joint_closed_form(alpha, beta);
    let layout = build_rarity_tapster(alpha, beta);
    let amp = joint_via_amplitudes(&layout)?;
    let defect = closed
        .probabilities()
        .iter()
        .zip(&amp)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if defect > EXACT_TOL {
        return Err(ExperimentError::RouteMismatch { alpha, beta, defect });
    }
    Ok(closed)
}

/// Correlation `E(α, β) = cos(β − α)` of the coincidence outcomes.
pub fn correlation(alpha: f64, beta: f64) -> f64 {
    joint_closed_form(alpha, beta).correlation()
}

/// Analytic CHSH value at the given angle quadruple.
pub fn chsh(angles: ChshAngles) -> ChshResult {
    let e: Vec<f64> = angles.settings().iter().map(|&(a, b)| correlation(a, b)).collect();
    let e = [e[0], e[1], e[2], e[3]];
    let s = e[0] - e[1] + e[2] + e[3];
    ChshResult { angles, e, e_stderr: None, s, s_stderr: None, violated: s.abs() > 2.0 }
}

/// Runs `shots` seeded trials at settings `(alpha, beta)`. Each trial draws
/// the source assignment first, then the joint detector outcome, from its
/// own `(seed, domain, trial)` substream.
pub fn sample_coincidences_domain(
    alpha: f64,
    beta: f64,
    shots: u64,
    seed: u64,
    domain: u16,
) -> Result<Vec<CoincidenceRecord>, ExperimentError> {
    if shots == 0 {
        return Err(ExperimentError::ZeroShots);
    }
    let dist = joint_distribution(alpha, beta)?;
    let layout = build_rarity_tapster(alpha, beta);
    let records: Result<Vec<CoincidenceRecord>, ExperimentError> = (0..shots)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, domain, trial);
            let (assignment, _, _) = assign_streams(&layout, &mut rng)?;
            let (left, right) = draw_outcome(&dist, &mut rng);
            Ok(CoincidenceRecord {
                trial,
                left,
                right,
                assignment,
                substream: ((domain as u64) << 48) | trial,
            })
        })
        .collect();
    records
}

/// [`sample_coincidences_domain`] in the default domain 0.
pub fn sample_coincidences(
    alpha: f64,
    beta: f64,
    shots: u64,
    seed: u64,
) -> Result<Vec<CoincidenceRecord>, ExperimentError> {
    sample_coincidences_domain(alpha, beta, shots, seed, 0)
}

/// Draws one joint outcome; cumulative order is fixed as uu, ud, du, dd.
fn draw_outcome<R: Rng + ?Sized>(dist: &JointDistribution, rng: &mut R) -> (LeftOutcome, RightOutcome) {
    let u: f64 = rng.random();
    let mut acc = dist.p_uu;
    if u < acc {
        return (LeftOutcome::U, RightOutcome::UPrime);
    }
    acc += dist.p_ud;
    if u < acc {
        return (LeftOutcome::U, RightOutcome::DPrime);
    }
    acc += dist.p_du;
    if u < acc {
        return (LeftOutcome::D, RightOutcome::UPrime);
    }
    (LeftOutcome::D, RightOutcome::DPrime)
}

/// Outcome frequencies `(uu, ud, du, dd)` of a record batch.
pub fn empirical_frequencies(records: &[CoincidenceRecord]) -> [f64; 4] {
    let mut counts = [0u64; 4];
    for r in records {
        let idx = match (r.left, r.right) {
            (LeftOutcome::U, RightOutcome::UPrime) => 0,
            (LeftOutcome::U, RightOutcome::DPrime) => 1,
            (LeftOutcome::D, RightOutcome::UPrime) => 2,
            (LeftOutcome::D, RightOutcome::DPrime) => 3,
        };
        counts[idx] += 1;
    }
    let n = records.len().max(1) as f64;
    counts.map(|c| c as f64 / n)
}

/// Minimum records per setting accepted by [`estimate_chsh_from_records`].
pub const MIN_RECORDS_PER_SETTING: usize = 100;

/// Empirical CHSH from four record batches, one per setting in
/// [`ChshAngles::settings`] order, with delta-method standard errors
/// (`Var(Ê) = (1 − E²)/n` per setting).
pub fn estimate_chsh_from_records(
    angles: ChshAngles,
    settings: [&[CoincidenceRecord]; 4],
) -> Result<ChshResult, ExperimentError> {
    let mut e = [0.0; 4];
    let mut se = [0.0; 4];
    for (i, records) in settings.iter().enumerate() {
        if records.is_empty() {
            return Err(ExperimentError::MissingSetting { setting: i });
        }
        if records.len() < MIN_RECORDS_PER_SETTING {
            return Err(ExperimentError::TooFewRecords {
                setting: i,
                n: records.len(),
                min: MIN_RECORDS_PER_SETTING,
            });
        }
        let [f_uu, f_ud, f_du, f_dd] = empirical_frequencies(records);
        let est = f_uu + f_dd - f_ud - f_du;
        let n = records.len() as f64;
        e[i] = est;
        se[i] = ((1.0 - est * est).max(0.0) / n).sqrt();
    }
    let s = e[0] - e[1] + e[2] + e[3];
    let s_stderr = se.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(ChshResult {
        angles,
        e,
        e_stderr: Some(se),
        s,
        s_stderr: Some(s_stderr),
        violated: s.abs() > 2.0,
    })
}

/// Runs the four settings of a CHSH experiment with `shots` trials each;
/// setting `i` samples in RNG domain `i + 1` so the batches are independent.
pub fn run_chsh_experiment(
    angles: ChshAngles,
    shots: u64,
    seed: u64,
) -> Result<(ChshResult, [Vec<CoincidenceRecord>; 4]), ExperimentError> {
    let settings = angles.settings();
    let mut batches: [Vec<CoincidenceRecord>; 4] = Default::default();
    for (i, (a, b)) in settings.into_iter().enumerate() {
        batches[i] = sample_coincidences_domain(a, b, shots, seed, (i + 1) as u16)?;
    }
    let result = estimate_chsh_from_records(
        angles,
        [&batches[0], &batches[1], &batches[2], &batches[3]],
    )?;
    Ok((result, batches))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    const CHSH_OPTIMAL: ChshAngles = ChshAngles {
        alpha1: 0.0,
        alpha2: FRAC_PI_2,
        beta1: PI / 4.0,
        beta2: 3.0 * PI / 4.0,
    };

    #[test]
    fn joint_distribution_at_equal_settings() {
        let d = joint_distribution(1.3, 1.3).unwrap();
        assert!((d.p_uu - 0.5).abs() < EXACT_TOL);
        assert!(d.p_ud.abs() < EXACT_TOL);
        assert!(d.p_du.abs() < EXACT_TOL);
        assert!((d.p_dd - 0.5).abs() < EXACT_TOL);
    }

    #[test]
    fn joint_distribution_at_opposite_settings() {
        let d = joint_distribution(0.25, 0.25 + PI).unwrap();
        assert!(d.p_uu.abs() < EXACT_TOL);
        assert!((d.p_ud - 0.5).abs() < EXACT_TOL);
        assert!((d.p_du - 0.5).abs() < EXACT_TOL);
        assert!(d.p_dd.abs() < EXACT_TOL);
    }

    #[test]
    fn joint_distribution_at_quadrature() {
        let d = joint_distribution(0.0, FRAC_PI_2).unwrap();
        for p in d.probabilities() {
            assert!((p - 0.25).abs() < EXACT_TOL);
        }
    }

    #[test]
    fn correlation_values() {
        assert!((correlation(0.4, 0.4) - 1.0).abs() < EXACT_TOL);
        assert!((correlation(0.0, PI) + 1.0).abs() < EXACT_TOL);
        assert!(correlation(0.0, FRAC_PI_2).abs() < EXACT_TOL);
    }

    #[test]
    fn chsh_at_optimal_angles_is_two_sqrt_two() {
        let r = chsh(CHSH_OPTIMAL);
        assert!((r.s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
        assert!(r.violated);
    }

    #[test]
    fn chsh_degenerate_angle_choices() {
        let r = chsh(ChshAngles { alpha1: 0.7, alpha2: 0.7, beta1: 0.7, beta2: 0.7 });
        assert!((r.s - 2.0).abs() < EXACT_TOL);
        assert!(!r.violated);
        let r = chsh(ChshAngles { alpha1: 0.0, alpha2: 0.0, beta1: 0.0, beta2: PI });
        assert!((r.s - 2.0).abs() < EXACT_TOL);
    }

    #[test]
    fn sampler_rejects_zero_shots() {
        assert!(matches!(
            sample_coincidences(0.0, 0.0, 0, 1),
            Err(ExperimentError::ZeroShots)
        ));
    }

    #[test]
    fn no_anticorrelated_outcomes_at_equal_settings() {
        let records = sample_coincidences(0.9, 0.9, 20_000, 7).unwrap();
        assert!(records.iter().all(|r| !matches!(
            (r.left, r.right),
            (LeftOutcome::U, RightOutcome::DPrime) | (LeftOutcome::D, RightOutcome::UPrime)
        )));
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_coincidences(0.3, 1.1, 5_000, 123).unwrap();
        let b = sample_coincidences(0.3, 1.1, 5_000, 123).unwrap();
        assert_eq!(a, b);
        let c = sample_coincidences(0.3, 1.1, 5_000, 124).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn quadrature_frequencies_within_binomial_band() {
        let shots = 100_000u64;
        let records = sample_coincidences(0.0, FRAC_PI_2, shots, 11).unwrap();
        let freqs = empirical_frequencies(&records);
        let band = 5.0 * (0.25 * 0.75 / shots as f64).sqrt();
        for f in freqs {
            assert!((f - 0.25).abs() < band, "f = {f}, band = {band}");
        }
    }

    #[test]
    fn estimator_minimum_batch_rules() {
        let records = sample_coincidences(0.0, 0.0, 100, 5).unwrap();
        // Exactly the minimum is accepted, with wide error bars reported.
        let r = estimate_chsh_from_records(
            ChshAngles { alpha1: 0.0, alpha2: 0.0, beta1: 0.0, beta2: 0.0 },
            [&records, &records, &records, &records],
        )
        .unwrap();
        assert!(r.s_stderr.is_some());
        let short = &records[..99];
        assert!(matches!(
            estimate_chsh_from_records(
                ChshAngles { alpha1: 0.0, alpha2: 0.0, beta1: 0.0, beta2: 0.0 },
                [short, &records, &records, &records],
            ),
            Err(ExperimentError::TooFewRecords { setting: 0, n: 99, .. })
        ));
        assert!(matches!(
            estimate_chsh_from_records(
                ChshAngles { alpha1: 0.0, alpha2: 0.0, beta1: 0.0, beta2: 0.0 },
                [&[], &records, &records, &records],
            ),
            Err(ExperimentError::MissingSetting { setting: 0 })
        ));
    }

    #[test]
    fn all_aligned_records_give_unit_correlation() {
        // At equal settings every record lands on (u,u') or (d,d').
        let records = sample_coincidences(0.5, 0.5, 500, 3).unwrap();
        let r = estimate_chsh_from_records(
            ChshAngles { alpha1: 0.5, alpha2: 0.5, beta1: 0.5, beta2: 0.5 },
            [&records, &records, &records, &records],
        )
        .unwrap();
        assert!((r.e[0] - 1.0).abs() < EXACT_TOL);
        assert_eq!(r.e_stderr.unwrap()[0], 0.0);
    }

    #[test]
    fn chsh_experiment_close_to_analytic_at_moderate_shots() {
        let (result, batches) = run_chsh_experiment(CHSH_OPTIMAL, 50_000, 21).unwrap();
        let analytic = chsh(CHSH_OPTIMAL);
        let se = result.s_stderr.unwrap();
        assert!((result.s - analytic.s).abs() < 4.0 * se, "Ŝ = {}, S = {}", result.s, analytic.s);
        assert!(result.violated);
        assert!(batches.iter().all(|b| b.len() == 50_000));
    }
}
