//! Closed-form regime classifiers, lemma constants and growth exponents for
//! the model domains `G = {Re z < |w|²} ∩ 𝔻²` and `Ω_ξ`.
//!
//! Conventions: the base point is `p_δ = (−δ, 0)`, the vector is
//! `ν = (α, β)` with `α` the normal component, and `c = |α| / (δ^{1/2}|β|)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disks::{certify_default, AnalyticDisk};
use crate::domains::ModelDomain;
use crate::error::{Error, Result};
use crate::metrics::ext_real;

/// Below this `c` the metric equals `|β|` and the case-(2) upper bound is unavailable.
pub const UPPER_THRESHOLD: f64 = 2.0;
/// `2√2`: end of the exact-value range.
pub const TANGENTIAL_THRESHOLD: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Start of the two-sided `δ^{−3/4}` range.
pub const TWO_SIDED_THRESHOLD: f64 = 7.0;
/// Denominator of the two-sided lower bound.
pub const LOWER_DENOMINATOR: f64 = 38.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Tangential,
    UpperOnly,
    Intermediate,
    TwoSided,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Tangential => "Tangential",
            Regime::UpperOnly => "UpperOnly",
            Regime::Intermediate => "Intermediate",
            Regime::TwoSided => "TwoSided",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemkobResult {
    pub regime: Regime,
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
    #[serde(with = "ext_real")]
    pub c: f64,
    /// Set when `lower` only holds as `δ → 0`.
    pub asymptotic_only: bool,
}

/// Bounds for `K_G(p_δ; (α, β))` by regime of `c`.
///
/// | regime         | `c`            | lower                        | upper                 |
/// |----------------|----------------|------------------------------|-----------------------|
/// | `Tangential`   | `< 2`          | `|β|`                        | `|β|`                 |
/// | `UpperOnly`    | `[2, 2√2)`     | `|β|`                        | `min(|β|, √2|α|δ^{−3/4})` |
/// | `Intermediate` | `[2√2, 7]`     | `max(|β|, γ(c)δ^{−1/6})`     | `√2|α|δ^{−3/4}`       |
/// | `TwoSided`     | `> 7`          | `|α|/(38δ^{3/4})`            | `√2|α|δ^{−3/4}`       |
///
/// `|β|` is always a valid lower bound (projection to `w`); the `γ` term is
/// a limit statement, hence `asymptotic_only`.
pub fn lemkob_bounds(delta: f64, alpha: Complex64, beta: Complex64) -> Result<LemkobResult> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
    }
    let (a, b) = (alpha.norm(), beta.norm());
    if a == 0.0 && b == 0.0 {
        return Err(Error::Parameter("(alpha, beta) must be nonzero".into()));
    }
    let c = if b == 0.0 { f64::INFINITY } else { a / (delta.sqrt() * b) };
    let case2_upper = std::f64::consts::SQRT_2 * a * delta.powf(-0.75);
    let result = if c < UPPER_THRESHOLD {
        LemkobResult {
            regime: Regime::Tangential,
            lower: b,
            upper: b,
            c,
            asymptotic_only: false,
        }
    } else if c < TANGENTIAL_THRESHOLD {
        LemkobResult {
            regime: Regime::UpperOnly,
            lower: b,
            upper: b.min(case2_upper),
            c,
            asymptotic_only: false,
        }
    } else if c <= TWO_SIDED_THRESHOLD {
        let gamma = lemkob_gamma(c).unwrap_or(0.0);
        LemkobResult {
            regime: Regime::Intermediate,
            lower: b.max(gamma * delta.powf(-1.0 / 6.0)),
            upper: case2_upper,
            c,
            asymptotic_only: true,
        }
    } else {
        LemkobResult {
            regime: Regime::TwoSided,
            lower: a / (LOWER_DENOMINATOR * delta.powf(0.75)),
            upper: case2_upper,
            c,
            asymptotic_only: false,
        }
    };
    Ok(result)
}

/// `γ(c₀) = ((c₀/√2 − 2)/10)^{1/2}`.
pub fn lemkob_gamma(c0: f64) -> Result<f64> {
    if !(c0 > TANGENTIAL_THRESHOLD) {
        return Err(Error::Parameter(format!("gamma needs c0 > 2√2, got {c0}")));
    }
    Ok(((c0 / std::f64::consts::SQRT_2 - 2.0) / 10.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModepsConstants {
    pub xi: f64,
    pub c0: f64,
    /// Applicability threshold: `|α| > C1 δ^{(ξ−1)/ξ} |β|`.
    pub c1: f64,
    /// Lower-bound factor: `K ≥ C2 |α| / δ^{1−1/(2ξ)}`.
    pub c2: f64,
}

impl ModepsConstants {
    pub fn c2_prime(&self) -> f64 {
        1.0 / self.c2
    }
}

/// Constants for the lower bound on `Ω_ξ`.
///
/// With `β = 1`, `x = |λα|` and `r₁ = (2ξ/(ξ−1))·δ/x`:
///
/// * `C1` is the smallest factor such that `|α| > C1 δ^{(ξ−1)/ξ}` forces
///   `(1 + C0^ξ)|λ|^ξ r₁^{ξ−1} < x / (2ξ2^ξ)`. Raising to the power `ξ`
///   gives `C1^ξ = 2ξ·2^ξ·(1 + C0^ξ)·(2ξ/(ξ−1))^{ξ−1}`.
/// * `C2′` solves `x / (2ξ2^ξ) = 2^{ξ+1} r₁^{2ξ−1}` at `δ = 1`, i.e.
///   `C2′^{2ξ} = ξ·2^{2ξ+2}·(2ξ/(ξ−1))^{2ξ−1}`, so that `|λα| < C2′ δ^{1−1/(2ξ)}`
///   for every admissible disk and `C2 = 1/C2′`.
pub fn modeps_constants(xi: f64, c0: f64) -> Result<ModepsConstants> {
    if !(xi > 1.0 && xi.is_finite()) {
        return Err(Error::Parameter(format!("xi must exceed 1, got {xi}")));
    }
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::Parameter(format!("C0 must be positive, got {c0}")));
    }
    let q = 2.0 * xi / (xi - 1.0);
    let c1 = (2.0 * xi * 2f64.powf(xi) * (1.0 + c0.powf(xi)) * q.powf(xi - 1.0)).powf(1.0 / xi);
    let c2_prime = (xi * 2f64.powf(2.0 * xi + 2.0) * q.powf(2.0 * xi - 1.0)).powf(1.0 / (2.0 * xi));
    Ok(ModepsConstants {
        xi,
        c0,
        c1,
        c2: 1.0 / c2_prime,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModepsOutcome {
    Applicable { lower: f64 },
    NotApplicable { reason: String },
}

impl ModepsOutcome {
    pub fn lower(&self) -> Option<f64> {
        match self {
            ModepsOutcome::Applicable { lower } => Some(*lower),
            ModepsOutcome::NotApplicable { .. } => None,
        }
    }
}

/// `C2 |α| / δ^{1−1/(2ξ)}` when `C1 δ^{(ξ−1)/ξ}|β| < |α| ≤ C0|β|`.
pub fn modeps_lower(xi: f64, c0: f64, delta: f64, alpha: Complex64, beta: Complex64) -> Result<ModepsOutcome> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
    }
    let k = modeps_constants(xi, c0)?;
    let (a, b) = (alpha.norm(), beta.norm());
    if a > c0 * b {
        return Ok(ModepsOutcome::NotApplicable {
            reason: format!("|alpha| = {a} exceeds C0|beta| = {}", c0 * b),
        });
    }
    let threshold = k.c1 * delta.powf((xi - 1.0) / xi) * b;
    if !(a > threshold) {
        return Ok(ModepsOutcome::NotApplicable {
            reason: format!("|alpha| = {a} does not exceed C1 delta^((xi-1)/xi) |beta| = {threshold}"),
        });
    }
    Ok(ModepsOutcome::Applicable {
        lower: k.c2 * a / delta.powf(1.0 - 1.0 / (2.0 * xi)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealfReport {
    /// `sup_{|t|=r} Re f₀(t)`.
    pub m: f64,
    /// `|a₁| r / 2`.
    pub bound: f64,
    pub holds: bool,
}

const REALF_ANGLES: usize = 4096;

fn horner(a: &[Complex64], t: Complex64) -> Complex64 {
    // a[k] is the coefficient of t^{k+1}
    a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| (acc + c) * t)
}

fn max_on_circle(f: impl Fn(f64) -> f64) -> f64 {
    let h = std::f64::consts::TAU / REALF_ANGLES as f64;
    let (mut best, mut at) = (f64::NEG_INFINITY, 0.0);
    for i in 0..REALF_ANGLES {
        let th = h * i as f64;
        let v = f(th);
        if v > best {
            best = v;
            at = th;
        }
    }
    // golden-section polish around the best sample
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (at - h, at + h);
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) > f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.max(f(0.5 * (lo + hi)))
}

/// Checks `sup_{|t|=r} Re f₀ ≥ |a₁|r/2` for `f₀(t) = Σ_{k≥1} a_k t^k`, where
/// `a[0]` is `a₁`.
pub fn realf_bound(a: &[Complex64], r: f64) -> Result<RealfReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Parameter(format!("r must lie in (0, 1), got {r}")));
    }
    let m = max_on_circle(|th| horner(a, Complex64::from_polar(r, th)).re);
    let bound = a.first().map_or(0.0, |a1| a1.norm()) * r / 2.0;
    Ok(RealfReport {
        m,
        bound,
        holds: m >= bound - 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    /// Positive when the inequality holds.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicInequalityReport {
    pub xi: f64,
    pub c0: f64,
    pub delta: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub r: f64,
    pub checks: Vec<InequalityCheck>,
    pub pass: bool,
}

/// `φ(r) = 2^{2ξ+1}r^{2ξ} + 2^ξ(1 + C0^ξ)|λ|^ξ r^ξ − |λα|r + 2δ`.
pub fn basic_phi(xi: f64, c0: f64, delta: f64, lambda: f64, lambda_alpha: f64, r: f64) -> f64 {
    2f64.powf(2.0 * xi + 1.0) * r.powf(2.0 * xi) + 2f64.powf(xi) * (1.0 + c0.powf(xi)) * lambda.powf(xi) * r.powf(xi)
        - lambda_alpha * r
        + 2.0 * delta
}

/// The scalar part of the inequality chain: positivity of `φ(r)` and the
/// Schwarz bound `|λα| < 8` behind `φ′(1/2) > 8ξ − |λα| > 0`.
pub fn basic_inequality_terms(
    xi: f64,
    c0: f64,
    delta: f64,
    lambda: f64,
    lambda_alpha: f64,
    r: f64,
) -> Vec<InequalityCheck> {
    vec![
        InequalityCheck {
            name: "phi_positive".into(),
            slack: basic_phi(xi, c0, delta, lambda, lambda_alpha, r),
        },
        InequalityCheck {
            name: "derivative_at_half".into(),
            slack: 8.0 - lambda_alpha,
        },
    ]
}

/// Evaluates the estimates leading to `φ(r) > 0` on a disk into `Ω_ξ` with
/// `Φ(0) = (−δ, 0)` and `Φ′(0) = λ(α, 1)`, after rescaling it to the unit disk.
pub fn verify_basic_inequality(
    xi: f64,
    c0: f64,
    disk: &AnalyticDisk,
    alpha: Complex64,
    r: f64,
) -> Result<BasicInequalityReport> {
    let domain = ModelDomain::omega(xi)?;
    if disk.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: disk.dim() });
    }
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::Parameter(format!("r must lie in (0, 1/2), got {r}")));
    }
    if alpha.norm() > c0 {
        return Err(Error::Precondition(format!("|alpha| = {} exceeds C0 = {c0}", alpha.norm())));
    }
    let center = &disk.center;
    let delta = -center[0].re;
    if !(delta > 0.0) || center[0].im.abs() > 1e-12 || center[1].norm() > 1e-12 {
        return Err(Error::Precondition("disk is not centred at (-delta, 0)".into()));
    }
    let cert = certify_default(disk, &domain)?;
    if !cert.valid {
        return Err(Error::Precondition(format!(
            "disk containment in {domain} not certified (slack {})",
            cert.slack
        )));
    }
    let unit = disk.reparametrize(Complex64::new(1.0 / disk.radius, 0.0))?;
    let d = unit.coefficient(1);
    let lambda_c = d[1];
    let tol = 1e-9 * d[0].norm().max(1.0);
    if (d[0] - lambda_c * alpha).norm() > tol {
        return Err(Error::Precondition("first-order jet is not a multiple of (alpha, 1)".into()));
    }
    let lambda = lambda_c.norm();
    let lambda_alpha = (lambda_c * alpha).norm();

    let eval = |th: f64| unit.eval(Complex64::from_polar(r, th)).expect("|t| = r < 1");
    let sup_gtilde = max_on_circle(|th| {
        let t = Complex64::from_polar(r, th);
        (eval(th)[1] - lambda_c * t).norm()
    });
    let sup_re_f = max_on_circle(|th| eval(th)[0].re);
    let sup_g = max_on_circle(|th| eval(th)[1].norm().powf(xi));
    let sup_im_f = max_on_circle(|th| eval(th)[0].im.abs().powf(xi));
    let half = 2f64.powf(xi - 1.0);
    let quartic = 2f64.powf(xi) * r.powf(2.0 * xi);
    let mut checks = vec![
        InequalityCheck {
            name: "schwarz_g".into(),
            slack: 2.0 * r * r - sup_gtilde,
        },
        InequalityCheck {
            name: "real_part_growth".into(),
            slack: sup_re_f - (lambda_alpha * r / 2.0 - delta),
        },
        InequalityCheck {
            name: "g_power".into(),
            slack: half * ((lambda * r).powf(xi) + quartic) - sup_g,
        },
        InequalityCheck {
            name: "im_f_power".into(),
            slack: half * ((c0 * lambda * r).powf(xi) + quartic) - sup_im_f,
        },
    ];
    checks.extend(basic_inequality_terms(xi, c0, delta, lambda, lambda_alpha, r));
    let pass = checks.iter().all(|c| c.slack >= 0.0);
    Ok(BasicInequalityReport {
        xi,
        c0,
        delta,
        lambda,
        alpha: alpha.norm(),
        r,
        checks,
        pass,
    })
}

/// Boundary growth scenarios; [`rate_exponent`] returns `a` in `d^{−a}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scenario {
    /// Kobayashi, normal direction, non-semipositive point: 3/4.
    KobNormalNonSemipos,
    /// Sibony (and `K̃`), normal direction, non-semipositive point: 1/2.
    SibonyNormalNonSemipos,
    /// `C^{1,ε}` lower bound: `1 − 1/(1+ε)`.
    LowerSmooth { eps: f64 },
    /// Semipositive `C^{2,ε}` lower bound: `1 − 1/(2+ε)`.
    LowerSemipositive { eps: f64 },
    /// Kobayashi off-normal lower bound on `C^{1,ε}` boundaries: `1 − 1/(2(1+ε))`.
    KobEps { eps: f64 },
    /// Lower bound on `Ω_ξ`: `1 − 1/(2ξ)`.
    Modeps { xi: f64 },
    /// `K̃` on `G_ε` in the first coordinate: `1 − 1/m`.
    KTildeModel { m: f64 },
    /// `c` below the critical value: bounded.
    Tangential,
    /// `c` between the thresholds: `liminf δ^{1/6} K > 0`.
    Intermediate,
    /// `X_δ = (cδ^{1/2}, 1)` with `c` large: 1/4.
    DichotomyLargeC,
}

/// Negated growth exponent for `scenario`.
pub fn rate_exponent(scenario: Scenario) -> Result<f64> {
    let eps_in = |eps: f64, lo_open: bool| {
        let ok = if lo_open { eps > 0.0 } else { eps >= 0.0 } && eps <= 1.0;
        if ok {
            Ok(eps)
        } else {
            Err(Error::Parameter(format!("epsilon {eps} out of range")))
        }
    };
    Ok(match scenario {
        Scenario::KobNormalNonSemipos => 0.75,
        Scenario::SibonyNormalNonSemipos => 0.5,
        Scenario::LowerSmooth { eps } => 1.0 - 1.0 / (1.0 + eps_in(eps, false)?),
        Scenario::LowerSemipositive { eps } => 1.0 - 1.0 / (2.0 + eps_in(eps, false)?),
        Scenario::KobEps { eps } => 1.0 - 1.0 / (2.0 * (1.0 + eps_in(eps, true)?)),
        Scenario::Modeps { xi } => {
            if !(xi > 1.0 && xi.is_finite()) {
                return Err(Error::Parameter(format!("xi must exceed 1, got {xi}")));
            }
            1.0 - 1.0 / (2.0 * xi)
        }
        Scenario::KTildeModel { m } => {
            if !(m >= 1.0 && m.is_finite()) {
                return Err(Error::Parameter(format!("m must be at least 1, got {m}")));
            }
            1.0 - 1.0 / m
        }
        Scenario::Tangential => 0.0,
        Scenario::Intermediate => 1.0 / 6.0,
        Scenario::DichotomyLargeC => 0.25,
    })
}

impl FromStr for Scenario {
    type Err = Error;

    /// Accepts `Name` or `Name(value)`, e.g. `KobEps(1)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            _ => (s, None),
        };
        let bad = || Error::Parse {
            input: s.to_string(),
            key: name.to_string(),
        };
        let value = || -> Result<f64> { arg.ok_or_else(bad)?.trim().parse().map_err(|_| bad()) };
        let scenario = match name {
            "KobNormalNonSemipos" => Scenario::KobNormalNonSemipos,
            "SibonyNormalNonSemipos" => Scenario::SibonyNormalNonSemipos,
            "LowerSmooth" => Scenario::LowerSmooth { eps: value()? },
            "LowerSemipositive" => Scenario::LowerSemipositive { eps: value()? },
            "KobEps" => Scenario::KobEps { eps: value()? },
            "Modeps" => Scenario::Modeps { xi: value()? },
            "KTildeModel" => Scenario::KTildeModel { m: value()? },
            "Tangential" => Scenario::Tangential,
            "Intermediate" => Scenario::Intermediate,
            "DichotomyLargeC" => Scenario::DichotomyLargeC,
            _ => return Err(bad()),
        };
        if arg.is_some() && !matches!(
            scenario,
            Scenario::LowerSmooth { .. }
                | Scenario::LowerSemipositive { .. }
                | Scenario::KobEps { .. }
                | Scenario::Modeps { .. }
                | Scenario::KTildeModel { .. }
        ) {
            return Err(bad());
        }
        Ok(scenario)
    }
}

/// JSON record for a lemma evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub lemma: String,
    pub inputs: serde_json::Value,
    pub regime: Option<Regime>,
    pub lower: Option<f64>,
    #[serde(with = "ext_real::option")]
    pub upper: Option<f64>,
    pub asymptotic_only: bool,
    pub constants: serde_json::Value,
}

impl CertificateRecord {
    pub fn lemkob(delta: f64, alpha: Complex64, beta: Complex64) -> Result<Self> {
        let r = lemkob_bounds(delta, alpha, beta)?;
        let gamma = lemkob_gamma(r.c).ok();
        Ok(Self {
            lemma: "lemkob".into(),
            inputs: serde_json::json!({ "delta": delta, "alpha": [alpha.re, alpha.im], "beta": [beta.re, beta.im] }),
            regime: Some(r.regime),
            lower: Some(r.lower),
            upper: Some(r.upper),
            asymptotic_only: r.asymptotic_only,
            constants: serde_json::json!({
                "c": ext_real::format(r.c),
                "gamma": gamma,
                "thresholds": [UPPER_THRESHOLD, TANGENTIAL_THRESHOLD, TWO_SIDED_THRESHOLD],
            }),
        })
    }

    pub fn modeps(xi: f64, c0: f64, delta: f64, alpha: Complex64, beta: Complex64) -> Result<Self> {
        let k = modeps_constants(xi, c0)?;
        let outcome = modeps_lower(xi, c0, delta, alpha, beta)?;
        Ok(Self {
            lemma: "modeps".into(),
            inputs: serde_json::json!({
                "xi": xi, "c0": c0, "delta": delta,
                "alpha": [alpha.re, alpha.im], "beta": [beta.re, beta.im],
            }),
            regime: None,
            lower: outcome.lower(),
            upper: None,
            asymptotic_only: false,
            constants: serde_json::json!({ "c1": k.c1, "c2": k.c2, "c2_prime": k.c2_prime() }),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}
