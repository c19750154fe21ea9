//! Seeded property campaigns for the lemma bounds and the structural
//! properties of the metrics.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::{lemkob_bounds, modeps_lower, realf_bound, verify_basic_inequality};
use crate::disks::{certify_containment, certify_default, AnalyticDisk};
use crate::domains::{random_unit, Margin, ModelDomain};
use crate::error::{Error, Result};
use crate::geometry::ComplexVector;
use crate::metrics::{closed_form_metric, ext_real, kob_upper, KobConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma {
    Lemkob,
    Modeps,
    Realf,
    Basic,
    Product,
    Inclusion,
    Exhaustion,
}

impl Lemma {
    pub const ALL: [Lemma; 7] = [
        Lemma::Lemkob,
        Lemma::Modeps,
        Lemma::Realf,
        Lemma::Basic,
        Lemma::Product,
        Lemma::Inclusion,
        Lemma::Exhaustion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Lemkob => "lemkob",
            Lemma::Modeps => "modeps",
            Lemma::Realf => "realf",
            Lemma::Basic => "basic",
            Lemma::Product => "product",
            Lemma::Inclusion => "inclusion",
            Lemma::Exhaustion => "exhaustion",
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|l| l.name() == key).ok_or_else(|| Error::Parse {
            input: s.to_string(),
            key: "lemma".into(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub lemma: Lemma,
    pub trials: usize,
    pub failures: usize,
    /// Smallest slack over all trials; negative exactly when a trial failed.
    #[serde(with = "ext_real")]
    pub worst_slack: f64,
    /// Descriptions of the first failures.
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Trial {
    slack: f64,
    note: String,
}

const MAX_NOTES: usize = 20;
/// Relative tolerance for the product property.
pub const PRODUCT_TOLERANCE: f64 = 0.03;
/// Relative tolerance for the exhaustion limit.
pub const EXHAUSTION_TOLERANCE: f64 = 0.05;
pub const EXHAUSTION_STEPS: [usize; 4] = [2, 4, 8, 16];

fn trial_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn phase<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn kob_config(seed: u64, i: usize) -> KobConfig {
    KobConfig {
        seed: seed.wrapping_add(i as u64),
        ..KobConfig::light()
    }
}

/// Relative gap `(upper − lower)/upper`, negative on a crossing.
fn gap(lower: f64, upper: f64) -> f64 {
    if upper.is_infinite() {
        1.0
    } else {
        (upper - lower) / upper
    }
}

fn lemkob_trial(seed: u64, i: usize) -> Result<Trial> {
    let mut rng = trial_rng(seed, i);
    let delta = log_uniform(&mut rng, 1e-5, 1e-2);
    let c = 7.0 * log_uniform(&mut rng, 1.0001, 100.0);
    let (alpha, beta) = if rng.gen_bool(0.1) {
        (phase(&mut rng), Complex64::new(0.0, 0.0))
    } else {
        let b = rng.gen_range(0.2..1.0);
        (phase(&mut rng) * (c * delta.sqrt() * b), phase(&mut rng) * b)
    };
    let bounds = lemkob_bounds(delta, alpha, beta)?;
    let g = ModelDomain::HalfParab;
    let p = g.base_point(delta)?;
    let x = ComplexVector::new(vec![alpha, beta]);
    let up = kob_upper(&g, &p, &x, &kob_config(seed, i))?.upper;
    Ok(Trial {
        slack: gap(bounds.lower, up),
        note: format!("delta={delta:e} X={x}: lower {} vs kob_upper {up}", bounds.lower),
    })
}

/// `ξ = 2`, `C0 = 1` on `Ω₂`.
fn modeps_trial(seed: u64, i: usize) -> Result<Trial> {
    let mut rng = trial_rng(seed, i);
    let (xi, c0) = (2.0, 1.0);
    let delta = log_uniform(&mut rng, 1e-6, 1e-3);
    let c1 = crate::certificates::modeps_constants(xi, c0)?.c1;
    let a_min = 1.01 * c1 * delta.powf((xi - 1.0) / xi);
    let alpha = phase(&mut rng) * rng.gen_range(a_min..c0);
    let beta = phase(&mut rng);
    let lower = modeps_lower(xi, c0, delta, alpha, beta)?
        .lower()
        .ok_or_else(|| Error::Precondition("generated configuration is not applicable".into()))?;
    let omega = ModelDomain::omega(xi)?;
    let p = omega.base_point(delta)?;
    let x = ComplexVector::new(vec![alpha, beta]);
    let up = kob_upper(&omega, &p, &x, &kob_config(seed, i))?.upper;
    Ok(Trial {
        slack: gap(lower, up),
        note: format!("delta={delta:e} X={x}: modeps lower {lower} vs kob_upper {up}"),
    })
}

fn realf_trial(seed: u64, i: usize) -> Result<Trial> {
    let mut rng = trial_rng(seed, i);
    let degree = rng.gen_range(1..=10);
    let a: Vec<Complex64> = (0..degree)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let r = [0.1, 0.3, 0.49][i % 3];
    let rep = realf_bound(&a, r)?;
    Ok(Trial {
        slack: if rep.holds { (rep.m - rep.bound).max(0.0) } else { rep.m - rep.bound },
        note: format!("degree {degree}, r={r}: M={} < bound {}", rep.m, rep.bound),
    })
}

/// Random cubic disk through `(−δ, 0)` with jet `∝ (α, 1)`, shrunk until
/// it is certified in `Ω₂`.
pub fn random_omega_disk<R: Rng>(rng: &mut R, c0: f64) -> Result<(AnalyticDisk, Complex64)> {
    let omega = ModelDomain::omega(2.0)?;
    let delta = log_uniform(rng, 1e-4, 1e-2);
    let alpha = phase(rng) * rng.gen_range(0.0..c0);
    let mut small = || Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let center = ComplexVector::from_re(&[-delta, 0.0]);
    let coeffs = vec![
        ComplexVector::new(vec![alpha, small(), small()]),
        ComplexVector::new(vec![Complex64::new(1.0, 0.0), small(), small()]),
    ];
    let mut disk = AnalyticDisk::new(center, coeffs, 1.0)?;
    for _ in 0..60 {
        if certify_default(&disk, &omega)?.valid {
            return Ok((disk, alpha));
        }
        disk = disk.with_radius(disk.radius * 0.5)?;
    }
    Err(Error::Convergence {
        message: "no certified radius for the random disk".into(),
        best: None,
    })
}

fn basic_trial(seed: u64, i: usize) -> Result<Trial> {
    let mut rng = trial_rng(seed, i);
    let c0 = 1.0;
    let (disk, alpha) = random_omega_disk(&mut rng, c0)?;
    let r = rng.gen_range(0.02..0.48);
    let rep = verify_basic_inequality(2.0, c0, &disk, alpha, r)?;
    let worst = rep
        .checks
        .iter()
        .min_by(|a, b| a.slack.total_cmp(&b.slack))
        .expect("checks are never empty");
    Ok(Trial {
        slack: worst.slack,
        note: format!("delta={:e}, r={r}: check {} has slack {}", rep.delta, worst.name, worst.slack),
    })
}

fn product_trial(seed: u64, i: usize) -> Result<Trial> {
    let mut rng = trial_rng(seed, i);
    let radii = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
    // polynomial disks approximate the Möbius extremals poorly near the boundary
    let p: Vec<Complex64> = radii.iter().map(|r| phase(&mut rng) * (0.5 * r * rng.gen::<f64>())).collect();
    let x = random_unit(2, &mut rng);
    let domain = ModelDomain::polydisk(radii.to_vec())?;
    let pv = ComplexVector::new(p.clone());
    let cfg = KobConfig {
        seed: seed.wrapping_add(i as u64),
        ..KobConfig::default()
    };
    let up = kob_upper(&domain, &pv, &x, &cfg)?.upper;
    let mut factor_max: f64 = 0.0;
    for j in 0..2 {
        let d = ModelDomain::polydisk(vec![radii[j]])?;
        let v = closed_form_metric(&d, &ComplexVector::new(vec![p[j]]), &ComplexVector::new(vec![x[j]]))?;
        factor_max = factor_max.max(v);
    }
    let err = (up / factor_max - 1.0).abs();
    Ok(Trial {
        slack: PRODUCT_TOLERANCE - err,
        note: format!("radii {radii:?}, p={pv}, X={x}: kob_upper {up} vs factor max {factor_max}"),
    })
}

fn inclusion_pairs() -> Result<Vec<(ModelDomain, ModelDomain)>> {
    Ok(vec![
        (ModelDomain::ball(2, 1.0)?, ModelDomain::polydisk(vec![1.0, 1.0])?),
        (ModelDomain::polydisk(vec![0.8, 0.8])?, ModelDomain::polydisk(vec![1.0, 1.0])?),
        (ModelDomain::HalfParab, ModelDomain::omega(2.0)?),
        (ModelDomain::ball(2, 0.7)?, ModelDomain::ball(2, 1.0)?),
        (ModelDomain::geps(1.0, 2.0, 2.0, 3)?, ModelDomain::geps(2.0, 2.0, 2.0, 3)?),
    ])
}

fn inclusion_trial(seed: u64, i: usize) -> Result<Trial> {
    let pairs = inclusion_pairs()?;
    let (small, large) = &pairs[i % pairs.len()];
    let mut rng = trial_rng(seed, i);
    let p = loop {
        let z = small.sample_interior(&mut rng);
        if small.value(&z) < -1e-2 {
            break z;
        }
    };
    let x = random_unit(small.dim(), &mut rng);
    let cfg = kob_config(seed, i);
    let est = kob_upper(small, &p, &x, &cfg)?;
    let Some(w) = est.upper_witness else {
        return Ok(Trial {
            slack: 0.0,
            note: String::new(),
        });
    };
    let cert = certify_containment(&w.disk, large, cfg.radial, cfg.angular, Margin::new(cfg.margin)?)?;
    Ok(Trial {
        slack: if cert.valid { cert.slack.max(0.0) } else { cert.slack.min(-f64::MIN_POSITIVE) },
        note: format!("{small} witness at p={p} fails in {large} (slack {})", cert.slack),
    })
}

/// Estimates on `D_j = (1 − 1/j)𝔻²`, `j ∈ {2, 4, 8, 16}`, with the limit
/// extrapolated from the last two steps as `2v₁₆ − v₈`.
pub fn exhaustion_values(p: &ComplexVector, x: &ComplexVector, cfg: &KobConfig) -> Result<(Vec<f64>, f64)> {
    let values = EXHAUSTION_STEPS
        .iter()
        .map(|&j| {
            let r = 1.0 - 1.0 / j as f64;
            kob_upper(&ModelDomain::polydisk(vec![r, r])?, p, x, cfg).map(|e| e.upper)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len();
    let limit = 2.0 * values[n - 1] - values[n - 2];
    Ok((values, limit))
}

fn exhaustion_trial(seed: u64, i: usize) -> Result<Trial> {
    let (p, x) = if i == 0 {
        (ComplexVector::zeros(2), ComplexVector::from_re(&[1.0, 0.0]))
    } else {
        let mut rng = trial_rng(seed, i);
        let p = ComplexVector::new((0..2).map(|_| phase(&mut rng) * rng.gen_range(0.0..0.4)).collect());
        (p, random_unit(2, &mut rng))
    };
    let (values, limit) = exhaustion_values(&p, &x, &kob_config(seed, i))?;
    let target = closed_form_metric(&ModelDomain::polydisk(vec![1.0, 1.0])?, &p, &x)?;
    let mono = values
        .windows(2)
        .map(|w| (w[0] - w[1]) / w[0])
        .fold(f64::INFINITY, f64::min);
    let err = (limit / target - 1.0).abs();
    Ok(Trial {
        slack: mono.min(EXHAUSTION_TOLERANCE - err),
        note: format!("p={p}, X={x}: values {values:?}, limit {limit} vs {target}"),
    })
}

/// Runs `trials` seeded trials of `lemma`. Trials that raise an error count
/// as failures.
pub fn verify_lemma(lemma: Lemma, trials: usize, seed: u64) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::Configuration("trials must be at least 1".into()));
    }
    let run = |i: usize| -> Result<Trial> {
        match lemma {
            Lemma::Lemkob => lemkob_trial(seed, i),
            Lemma::Modeps => modeps_trial(seed, i),
            Lemma::Realf => realf_trial(seed, i),
            Lemma::Basic => basic_trial(seed, i),
            Lemma::Product => product_trial(seed, i),
            Lemma::Inclusion => inclusion_trial(seed, i),
            Lemma::Exhaustion => exhaustion_trial(seed, i),
        }
    };
    let outcomes: Vec<Result<Trial>> = (0..trials).into_par_iter().map(run).collect();
    let mut report = VerifyReport {
        lemma,
        trials,
        failures: 0,
        worst_slack: f64::INFINITY,
        notes: Vec::new(),
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        let (slack, note) = match o {
            Ok(t) => (t.slack, t.note),
            Err(e) => (f64::NEG_INFINITY, format!("error: {e}")),
        };
        report.worst_slack = report.worst_slack.min(slack);
        if !(slack >= 0.0) {
            report.failures += 1;
            if report.notes.len() < MAX_NOTES {
                report.notes.push(format!("trial {i}: {note}"));
            }
        }
    }
    Ok(report)
}
