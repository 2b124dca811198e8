//! CHSH correlation experiments on the two-spin singlet.
//!
//! Config angles are analyzer dial angles: the measurement direction on the
//! Bloch sphere sits at twice the dial angle, so the angle between the
//! directions for settings `a`, `b` is `θ_ab = 2(a-b)` and the exact
//! correlation is `E(a,b) = -¼ cos θ_ab`.  Each of the four settings is
//! sampled in its own measurement context with its own disjoint sample set —
//! four σ-algebra tags; no statistic is ever formed across tags.
//!
//! The noncontextual baseline draws one shared hidden variable per trial for
//! all four settings, which pins its combination at `I ≤ ½`.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{pauli, ComplexMatrix, Observable};
use crate::contexts::{joint_context, restrict, Context, DEFAULT_CONTEXT_TOL};
use crate::error::{Error, Result};
use crate::probability::{quantum_average, sample, MeasurementConfig, StateFunctional};
use crate::rng::CounterRng;
use crate::states::QuantumState;

/// Four analyzer dial angles plus sampling parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChshConfig {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub trials_per_setting: u64,
    pub seed: u64,
}

impl ChshConfig {
    /// The angle set at which the singlet reaches `I = 1/√2`.
    pub fn standard(trials_per_setting: u64, seed: u64) -> Self {
        use std::f64::consts::PI;
        Self {
            a: 0.0,
            b: PI / 8.0,
            a_prime: PI / 4.0,
            b_prime: 3.0 * PI / 8.0,
            trials_per_setting,
            seed,
        }
    }
}

/// Per-setting estimate alongside the exact values.
#[derive(Debug, Clone, Serialize)]
pub struct SettingReport {
    pub setting: String,
    pub context_id: String,
    /// angle between the two measurement directions, in `[0, π]`
    pub theta: f64,
    /// exact correlation from the quantum-average path
    pub e_exact: f64,
    /// closed form `-¼ cos θ`
    pub e_formula: f64,
    pub e_hat: f64,
    pub stderr: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshReport {
    pub settings: Vec<SettingReport>,
    pub i_exact: f64,
    pub i_hat: f64,
    pub i_stderr: f64,
}

impl ChshReport {
    /// CSV rows `setting,theta,E_exact,E_hat,stderr,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("setting,theta,E_exact,E_hat,stderr,n\n");
        for s in &self.settings {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
                s.setting, s.theta, s.e_exact, s.e_hat, s.stderr, s.trials
            ));
        }
        out
    }
}

/// Exact singlet correlation for dial angles: `-¼ cos(2(a-b))`.
pub fn chsh_exact_correlation(a: f64, b: f64) -> f64 {
    -0.25 * (2.0 * (a - b)).cos()
}

/// Spin measurement direction for a dial angle (in the x–z plane).
fn direction(dial: f64) -> [f64; 3] {
    [(2.0 * dial).sin(), 0.0, (2.0 * dial).cos()]
}

/// `½ (σ·n̄)` on the first or second factor of the pair.
fn half_spin_along(dial: f64, first_factor: bool) -> Observable {
    let n = direction(dial);
    let s = pauli(1)
        .scale(Complex64::new(n[0], 0.0))
        .add(&pauli(2).scale(Complex64::new(n[1], 0.0)))
        .and_then(|m| m.add(&pauli(3).scale(Complex64::new(n[2], 0.0))))
        .expect("2x2 dims")
        .scale(Complex64::new(0.5, 0.0));
    let eye = ComplexMatrix::identity(2);
    let m = if first_factor { s.kron(&eye) } else { eye.kron(&s) };
    Observable::symmetrized(m)
}

/// The singlet preparation: the Bell-basis outcome with `σz⊗σz = -1` and
/// `σx⊗σx = -1`.
pub(crate) fn singlet_preparation() -> Result<(QuantumState, Context)> {
    let zz = Observable::symmetrized(pauli(3).kron(&pauli(3)));
    let xx = Observable::symmetrized(pauli(1).kron(&pauli(1)));
    let bell = joint_context(&[zz.clone(), xx.clone()], DEFAULT_CONTEXT_TOL)?;
    let vz = restrict(&zz, &bell, DEFAULT_CONTEXT_TOL)?;
    let vx = restrict(&xx, &bell, DEFAULT_CONTEXT_TOL)?;
    let outcome = (0..4)
        .find(|&k| vz[k] < -0.5 && vx[k] < -0.5)
        .ok_or_else(|| Error::InvalidInstance("singlet outcome not found".into()))?;
    Ok((QuantumState::new(&bell, outcome)?, bell))
}

/// Run the four-setting CHSH experiment: disjoint samples per setting and
/// the exact values alongside.
pub fn chsh_run(cfg: &ChshConfig) -> Result<ChshReport> {
    if cfg.trials_per_setting == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let (prep, _) = singlet_preparation()?;
    let psi = StateFunctional::pure(&prep);

    let pairs = [
        ("ab", cfg.a, cfg.b),
        ("ab'", cfg.a, cfg.b_prime),
        ("a'b", cfg.a_prime, cfg.b),
        ("a'b'", cfg.a_prime, cfg.b_prime),
    ];

    let mut settings = Vec::with_capacity(4);
    for (index, &(label, alice, bob)) in pairs.iter().enumerate() {
        let a_obs = half_spin_along(alice, true);
        let b_obs = half_spin_along(bob, false);
        let ctx = joint_context(&[a_obs.clone(), b_obs.clone()], DEFAULT_CONTEXT_TOL)?;
        let product = Observable::symmetrized(a_obs.matrix().mul(b_obs.matrix())?);

        let e_exact = quantum_average(&psi, product.matrix())?.re;
        let theta = (2.0 * (alice - bob)).cos().acos();

        // independent substream per setting
        let setting_seed = CounterRng::new(cfg.seed, 0xC45 + index as u64).next_u64();
        let mc = MeasurementConfig::new(
            prep.clone(),
            ctx.id(),
            cfg.trials_per_setting,
            setting_seed,
        )?;
        let s = sample(&mc, &ctx)?;
        let values = restrict(&product, &ctx, DEFAULT_CONTEXT_TOL)?;
        let n = s.trials() as f64;
        let mean: f64 = s
            .outcome_counts()
            .iter()
            .zip(&values)
            .map(|(&c, &v)| c as f64 * v)
            .sum::<f64>()
            / n;
        let variance: f64 = s
            .outcome_counts()
            .iter()
            .zip(&values)
            .map(|(&c, &v)| c as f64 * (v - mean) * (v - mean))
            .sum::<f64>()
            / n;
        let stderr = (variance / n).sqrt();

        settings.push(SettingReport {
            setting: label.to_string(),
            context_id: ctx.id().to_string(),
            theta,
            e_exact,
            e_formula: chsh_exact_correlation(alice, bob),
            e_hat: mean,
            stderr,
            trials: s.trials(),
        });
    }

    let i_exact = (settings[0].e_exact - settings[1].e_exact).abs()
        + (settings[2].e_exact + settings[3].e_exact).abs();
    let i_hat = (settings[0].e_hat - settings[1].e_hat).abs()
        + (settings[2].e_hat + settings[3].e_hat).abs();
    let i_stderr = settings
        .iter()
        .map(|s| s.stderr * s.stderr)
        .sum::<f64>()
        .sqrt();

    Ok(ChshReport {
        settings,
        i_exact,
        i_hat,
        i_stderr,
    })
}

/// Report of the single-probability-space hidden-variable baseline.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalChshReport {
    pub trials: u64,
    pub e_hat: Vec<f64>,
    pub i_hat: f64,
    pub i_stderr: f64,
    /// `I ≤ ½ + 3·stderr`
    pub within_bound: bool,
    /// for every hidden value, one of `|B_b - B_b'|`, `|B_b + B_b'|` is 0
    /// and the other is 1
    pub dichotomy_violations: u64,
}

/// Sample a noncontextual model: one shared hidden direction per trial
/// drives all four settings, `A_a(λ) = ½ sgn(n̄_a·λ̄)`,
/// `B_b(λ) = -½ sgn(n̄_b·λ̄)`.
pub fn classical_chsh_baseline(cfg: &ChshConfig) -> Result<ClassicalChshReport> {
    if cfg.trials_per_setting == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let trials = cfg.trials_per_setting;
    let dials = [cfg.a, cfg.b, cfg.a_prime, cfg.b_prime];

    let outcome = |dial: f64, lambda: f64, alice: bool| -> f64 {
        // dot product of the direction at angle 2·dial with the hidden unit
        // vector at angle λ, both in the x–z plane
        let dot = (2.0 * dial - lambda).cos();
        let sign = if dot >= 0.0 { 0.5 } else { -0.5 };
        if alice {
            sign
        } else {
            -sign
        }
    };

    let mut sums = [0.0f64; 4];
    let mut sq_sums = [0.0f64; 4];
    let mut dichotomy_violations = 0u64;
    for trial in 0..trials {
        let lambda =
            CounterRng::new(cfg.seed, trial).next_f64() * 2.0 * std::f64::consts::PI;
        let a = outcome(dials[0], lambda, true);
        let ap = outcome(dials[2], lambda, true);
        let b = outcome(dials[1], lambda, false);
        let bp = outcome(dials[3], lambda, false);
        let products = [a * b, a * bp, ap * b, ap * bp];
        for (k, p) in products.into_iter().enumerate() {
            sums[k] += p;
            sq_sums[k] += p * p;
        }
        // pointwise dichotomy, exact in floating point for ±½ values
        let diff = (b - bp).abs();
        let sum = (b + bp).abs();
        let ok = (diff == 0.0 && sum == 1.0) || (diff == 1.0 && sum == 0.0);
        if !ok {
            dichotomy_violations += 1;
        }
    }

    let n = trials as f64;
    let e_hat: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let stderr: Vec<f64> = sums
        .iter()
        .zip(&sq_sums)
        .map(|(&s, &sq)| {
            let mean = s / n;
            ((sq / n - mean * mean) / n).sqrt()
        })
        .collect();
    let i_hat = (e_hat[0] - e_hat[1]).abs() + (e_hat[2] + e_hat[3]).abs();
    let i_stderr = stderr.iter().map(|s| s * s).sum::<f64>().sqrt();

    Ok(ClassicalChshReport {
        trials,
        e_hat,
        i_hat,
        i_stderr,
        within_bound: i_hat <= 0.5 + 3.0 * i_stderr,
        dichotomy_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::empirical_mean;

    #[test]
    fn exact_correlation_at_aligned_and_orthogonal_settings() {
        // equal dials: directions aligned, E = -¼
        assert!((chsh_exact_correlation(0.3, 0.3) + 0.25).abs() < 1e-15);
        // dial gap π/4: directions orthogonal, E = 0
        let e = chsh_exact_correlation(0.0, std::f64::consts::FRAC_PI_4);
        assert!(e.abs() < 1e-15);
    }

    #[test]
    fn quantum_path_matches_formula_on_random_angles() {
        let (prep, _) = singlet_preparation().unwrap();
        let psi = StateFunctional::pure(&prep);
        let mut rng = CounterRng::new(300, 0);
        for _ in 0..20 {
            let a = rng.next_range_f64(0.0, std::f64::consts::PI);
            let b = rng.next_range_f64(0.0, std::f64::consts::PI);
            let a_obs = half_spin_along(a, true);
            let b_obs = half_spin_along(b, false);
            let product = Observable::symmetrized(a_obs.matrix().mul(b_obs.matrix()).unwrap());
            let e = quantum_average(&psi, product.matrix()).unwrap().re;
            assert!(
                (e - chsh_exact_correlation(a, b)).abs() < 1e-12,
                "angles ({a}, {b})"
            );
        }
    }

    #[test]
    fn singlet_weights_follow_quarter_cosine_pattern() {
        let (prep, _) = singlet_preparation().unwrap();
        let (a, b) = (0.2, 0.9);
        let a_obs = half_spin_along(a, true);
        let b_obs = half_spin_along(b, false);
        let ctx = joint_context(&[a_obs.clone(), b_obs.clone()], DEFAULT_CONTEXT_TOL).unwrap();
        let w = crate::probability::born_weights(&prep, &ctx).unwrap();
        let va = restrict(&a_obs, &ctx, DEFAULT_CONTEXT_TOL).unwrap();
        let vb = restrict(&b_obs, &ctx, DEFAULT_CONTEXT_TOL).unwrap();
        let theta = 2.0 * (a - b);
        for k in 0..4 {
            let same_sign = va[k] * vb[k] > 0.0;
            let expect = if same_sign {
                (1.0 - theta.cos()) / 4.0
            } else {
                (1.0 + theta.cos()) / 4.0
            };
            assert!((w[k] - expect).abs() < 1e-12, "weight {k}");
        }
    }

    #[test]
    fn standard_angles_reach_one_over_sqrt_two() {
        let report = chsh_run(&ChshConfig::standard(20_000, 11)).unwrap();
        let target = std::f64::consts::FRAC_1_SQRT_2;
        assert!((report.i_exact - target).abs() < 1e-12);
        assert!(
            (report.i_hat - target).abs() < 4.0 * report.i_stderr,
            "i_hat {} vs {}",
            report.i_hat,
            target
        );
        // four distinct σ-algebra tags
        let mut ids: Vec<&str> = report
            .settings
            .iter()
            .map(|s| s.context_id.as_str())
            .collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 4);
    }

    #[test]
    fn cross_setting_aggregation_is_inexpressible() {
        // a sample drawn at setting ab cannot be averaged in the ab' context
        let cfg = ChshConfig::standard(100, 5);
        let (prep, _) = singlet_preparation().unwrap();
        let a_obs = half_spin_along(cfg.a, true);
        let b_obs = half_spin_along(cfg.b, false);
        let bp_obs = half_spin_along(cfg.b_prime, false);
        let ctx_ab = joint_context(&[a_obs.clone(), b_obs], DEFAULT_CONTEXT_TOL).unwrap();
        let ctx_abp = joint_context(&[a_obs, bp_obs], DEFAULT_CONTEXT_TOL).unwrap();
        let mc = MeasurementConfig::new(prep, ctx_ab.id(), 100, 1).unwrap();
        let s = sample(&mc, &ctx_ab).unwrap();
        let err = empirical_mean(&s, &Observable::identity(4), &ctx_abp, DEFAULT_CONTEXT_TOL)
            .unwrap_err();
        assert!(matches!(err, Error::ContextMismatch { .. }));
    }

    #[test]
    fn chsh_report_is_seed_reproducible() {
        let a = chsh_run(&ChshConfig::standard(5_000, 77)).unwrap();
        let b = chsh_run(&ChshConfig::standard(5_000, 77)).unwrap();
        assert_eq!(a.i_hat, b.i_hat);
        for (x, y) in a.settings.iter().zip(&b.settings) {
            assert_eq!(x.e_hat, y.e_hat);
        }
    }

    #[test]
    fn classical_baseline_respects_the_bound() {
        let report = classical_chsh_baseline(&ChshConfig::standard(200_000, 13)).unwrap();
        assert!(report.within_bound, "i_hat {}", report.i_hat);
        assert_eq!(report.dichotomy_violations, 0);
    }

    #[test]
    fn deterministic_hidden_variable_stays_below_half() {
        // constant outcomes: I computed algebraically from fixed signs
        for (a, b, ap, bp) in [
            (0.5f64, 0.5, 0.5, 0.5),
            (0.5, -0.5, 0.5, 0.5),
            (-0.5, 0.5, -0.5, -0.5),
        ] {
            let i = (a * b - a * bp).abs() + (ap * b + ap * bp).abs();
            assert!(i <= 0.5 + 1e-15);
        }
    }
}
