//! Boundary-approach scans along `P_δ = (−δ, 0, …, 0)`.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::lemkob_bounds;
use crate::domains::ModelDomain;
use crate::error::{Error, Result};
use crate::geometry::ComplexVector;
use crate::ktilde::{add_figure_entries, hartogs_polydisk_on, indicatrix_sample, khat_gauge, SampleConfig, DEFAULT_SAFETY};
use crate::metrics::{caratheodory_lower, closed_form_metric, default_family, ext_real, kob_upper, KobConfig, MetricKind};

/// Tangent vector used at each `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DirectionSpec {
    Fixed { x: ComplexVector },
    /// `X_δ = (c δ^{1/2}, 1, 0, …)`.
    Family { c: f64 },
}

impl DirectionSpec {
    pub fn at(&self, delta: f64, dim: usize) -> Result<ComplexVector> {
        match self {
            DirectionSpec::Fixed { x } => {
                if x.dim() != dim {
                    return Err(Error::Dimension { expected: dim, got: x.dim() });
                }
                Ok(x.clone())
            }
            DirectionSpec::Family { c } => {
                if dim < 2 {
                    return Err(Error::Configuration("direction family needs dimension >= 2".into()));
                }
                let mut x = ComplexVector::zeros(dim);
                x[0] = Complex64::new(c * delta.sqrt(), 0.0);
                x[1] = Complex64::new(1.0, 0.0);
                Ok(x)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub domain: ModelDomain,
    /// Strictly decreasing, positive.
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    pub direction: DirectionSpec,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<MetricKind>,
    #[serde(default)]
    pub kob: KobConfig,
    #[serde(default)]
    pub seed: u64,
    /// Random directions added to the Carathéodory family.
    #[serde(default = "default_random_functionals")]
    pub random_functionals: usize,
    /// Directions sampled for the convex gauge.
    #[serde(default = "default_khat_directions")]
    pub khat_directions: usize,
    /// Record wall-clock times; off by default so that output is reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_deltas() -> Vec<f64> {
    log_spaced(1e-2, 1e-5, 8)
}

fn default_kinds() -> Vec<MetricKind> {
    vec![MetricKind::Kobayashi]
}

fn default_random_functionals() -> usize {
    32
}

fn default_khat_directions() -> usize {
    32
}

/// `count` log-spaced values from `hi` down to `lo`, endpoints included.
pub fn log_spaced(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                hi
            } else if i + 1 == count {
                lo
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

impl ScanConfig {
    pub fn new(domain: ModelDomain, direction: DirectionSpec) -> Self {
        Self {
            domain,
            deltas: default_deltas(),
            direction,
            kinds: default_kinds(),
            kob: KobConfig::default(),
            seed: 0,
            random_functionals: default_random_functionals(),
            khat_directions: default_khat_directions(),
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(Error::Configuration("delta list is empty".into()));
        }
        if self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Configuration("every delta must be positive and finite".into()));
        }
        if self.deltas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Configuration("deltas must be strictly decreasing".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Configuration("no metric kinds requested".into()));
        }
        if let DirectionSpec::Family { c } = self.direction {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Configuration(format!("family constant must be >= 0, got {c}")));
            }
        }
        self.direction.at(self.deltas[0], self.domain.dim())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub delta: f64,
    pub x: ComplexVector,
    pub kind: MetricKind,
    #[serde(with = "ext_real")]
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
    /// How the bracket was obtained; `error: …` when estimation failed.
    pub method: String,
    /// Certificate margin of the disk behind `upper`, when there is one.
    pub margin: Option<f64>,
    pub wallclock_ms: u64,
}

impl ScanRow {
    pub fn is_error(&self) -> bool {
        self.method.starts_with("error")
    }
}

/// Options shared by [`estimate_point`] and [`run_scan`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointOptions {
    pub kob: KobConfig,
    pub seed: u64,
    pub random_functionals: usize,
    pub khat_directions: usize,
}

impl Default for PointOptions {
    fn default() -> Self {
        Self {
            kob: KobConfig::default(),
            seed: 0,
            random_functionals: default_random_functionals(),
            khat_directions: default_khat_directions(),
        }
    }
}

/// A bracket for one metric at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointBracket {
    pub kind: MetricKind,
    #[serde(with = "ext_real")]
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
    pub method: String,
    pub margin: Option<f64>,
}

#[derive(Clone, Copy)]
struct Bound {
    value: f64,
    margin: Option<f64>,
}

/// Brackets every requested kind at `(p, X)` from the cheapest estimators
/// that apply, combining them along the chain `C ≤ S ≤ min(A, K̂) ≤ K̃ ≤ K`:
/// a lower bound for a metric is a lower bound for every larger one and an
/// upper bound for every smaller one.
///
/// On `G` at `P_δ` the Kobayashi lower bound is the regime lower bound
/// whenever it is not asymptotic.
pub fn estimate_point(
    domain: &ModelDomain,
    p: &ComplexVector,
    x: &ComplexVector,
    kinds: &[MetricKind],
    opts: &PointOptions,
) -> Result<Vec<PointBracket>> {
    use MetricKind::*;
    if x.is_zero() {
        crate::error::ensure_dim(domain.dim(), x.dim())?;
        return Ok(kinds
            .iter()
            .map(|&kind| PointBracket {
                kind,
                lower: 0.0,
                upper: 0.0,
                method: "zero-vector".into(),
                margin: None,
            })
            .collect());
    }
    let wants = |k: MetricKind| kinds.contains(&k);
    let delta = ModelDomain::base_delta(p);
    let closed = closed_form_metric(domain, p, x).ok();

    let family = default_family(domain, x, opts.random_functionals, opts.seed)?;
    let c_lo = caratheodory_lower(domain, p, x, &family)?.lower;

    let kob_cfg = KobConfig {
        seed: opts.seed,
        ..opts.kob.clone()
    };
    let k_up = {
        let e = kob_upper(domain, p, x, &kob_cfg)?;
        Bound {
            value: e.upper,
            margin: e.upper_witness.map(|w| w.certificate.margin),
        }
    };
    let figure = match (domain, delta) {
        (ModelDomain::GEpsilon { .. }, Some(d)) if kinds.iter().any(|k| *k != Kobayashi) => {
            Some(hartogs_polydisk_on(domain, d, DEFAULT_SAFETY)?)
        }
        _ => None,
    };
    let kt_up = figure.as_ref().map(|f| f.gauge(x)).transpose()?;
    let kh_up = if wants(KobBuseman) {
        let cfg = SampleConfig {
            kob: kob_cfg.clone(),
            ..SampleConfig::default()
        };
        let mut sample = indicatrix_sample(domain, p, opts.khat_directions, &cfg)?;
        if let Some(f) = &figure {
            add_figure_entries(&mut sample, f)?;
        }
        Some(khat_gauge(&sample, x)?)
    } else {
        None
    };
    let regime_lower = match (domain, delta) {
        (ModelDomain::HalfParab, Some(d)) => lemkob_bounds(d, x[0], x[1])
            .ok()
            .filter(|r| !r.asymptotic_only)
            .map(|r| r.lower),
        _ => None,
    };

    let mut out = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        // upper bounds from metrics at or above `kind`
        let mut candidates: Vec<(&str, Bound)> = vec![("kob_upper", k_up)];
        if let Some(v) = kt_up {
            if kind.below_or_equal(KTilde) {
                candidates.push(("hartogs", Bound { value: v, margin: None }));
            }
        }
        if let Some(v) = kh_up {
            if kind.below_or_equal(KobBuseman) {
                candidates.push(("khat_gauge", Bound { value: v, margin: None }));
            }
        }
        if let Some(v) = closed {
            candidates.push(("closed_form", Bound { value: v, margin: None }));
        }
        let (up_method, up) = candidates
            .into_iter()
            .fold(("none", Bound { value: f64::INFINITY, margin: None }), |acc, c| {
                if c.1.value < acc.1.value {
                    c
                } else {
                    acc
                }
            });
        let (low_method, lower) = match (kind, regime_lower, closed) {
            (_, _, Some(v)) => ("closed_form", v),
            (Kobayashi, Some(v), _) => ("lemkob", v),
            _ => ("caratheodory", c_lo),
        };
        out.push(PointBracket {
            kind,
            lower,
            upper: up.value,
            method: format!("{low_method}/{up_method}"),
            margin: up.margin,
        });
    }
    Ok(out)
}

/// One row per `(δ, kind)` in input order. Failures at a `δ` are recorded
/// in its rows and the scan continues.
pub fn run_scan(config: &ScanConfig) -> Result<Vec<ScanRow>> {
    config.validate()?;
    let opts = PointOptions {
        kob: config.kob.clone(),
        seed: config.seed,
        random_functionals: config.random_functionals,
        khat_directions: config.khat_directions,
    };
    let dim = config.domain.dim();
    let per_delta: Vec<Vec<ScanRow>> = config
        .deltas
        .par_iter()
        .map(|&delta| {
            let start = Instant::now();
            let x = config.direction.at(delta, dim).unwrap_or_else(|_| ComplexVector::zeros(dim));
            let result = config
                .domain
                .base_point(delta)
                .and_then(|p| estimate_point(&config.domain, &p, &x, &config.kinds, &opts));
            let ms = if config.record_timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            match result {
                Ok(brackets) => brackets
                    .into_iter()
                    .map(|b| ScanRow {
                        delta,
                        x: x.clone(),
                        kind: b.kind,
                        lower: b.lower,
                        upper: b.upper,
                        method: b.method,
                        margin: b.margin,
                        wallclock_ms: ms,
                    })
                    .collect(),
                Err(e) => config
                    .kinds
                    .iter()
                    .map(|&kind| ScanRow {
                        delta,
                        x: x.clone(),
                        kind,
                        lower: 0.0,
                        upper: f64::INFINITY,
                        method: format!("error: {e}"),
                        margin: None,
                        wallclock_ms: ms,
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(per_delta.into_iter().flatten().collect())
}
