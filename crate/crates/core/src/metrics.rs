//! Closed-form oracles, Kobayashi–Royden upper bounds and functional lower
//! bounds.

use std::cell::Cell;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disks::{certify_containment_budgeted, AnalyticDisk, ContainmentCertificate};
use crate::domains::{random_unit, Margin, Membership, ModelDomain};
use crate::error::{ensure_dim, Error, Result};
use crate::geometry::{hermitian_inner, ComplexVector};
use crate::search::{compass_search_bounded, CompassOptions};

/// Serde for reals that may be infinite: non-finite values become the
/// strings `"inf"`, `"-inf"` or `"nan"`.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&format(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => parse(&t).ok_or_else(|| serde::de::Error::custom(format!("bad real {t:?}"))),
        }
    }

    pub fn format(v: f64) -> String {
        if v.is_nan() {
            "nan".into()
        } else if v == f64::INFINITY {
            "inf".into()
        } else if v == f64::NEG_INFINITY {
            "-inf".into()
        } else {
            v.to_string()
        }
    }

    pub fn parse(t: &str) -> Option<f64> {
        match t.trim() {
            "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
            "-inf" | "-Infinity" => Some(f64::NEG_INFINITY),
            "nan" | "NaN" => Some(f64::NAN),
            s => s.parse().ok(),
        }
    }

    /// The same encoding for `Option<f64>`, with `None` as `null`.
    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] f64);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

/// Metrics of the chain `C ≤ S ≤ min(A, K̂) ≤ K̃ ≤ K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    Caratheodory,
    Sibony,
    Azukawa,
    KobBuseman,
    KTilde,
    Kobayashi,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        Self::Caratheodory,
        Self::Sibony,
        Self::Azukawa,
        Self::KobBuseman,
        Self::KTilde,
        Self::Kobayashi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Caratheodory => "Caratheodory",
            Self::Sibony => "Sibony",
            Self::Azukawa => "Azukawa",
            Self::KobBuseman => "KobBuseman",
            Self::KTilde => "KTilde",
            Self::Kobayashi => "Kobayashi",
        }
    }

    /// `self ≤ other` in the chain. Azukawa and Kobayashi–Buseman are
    /// incomparable.
    pub fn below_or_equal(self, other: MetricKind) -> bool {
        use MetricKind::*;
        if self == other {
            return true;
        }
        matches!(
            (self, other),
            (Caratheodory, _)
                | (Sibony, Azukawa | KobBuseman | KTilde | Kobayashi)
                | (Azukawa | KobBuseman, KTilde | Kobayashi)
                | (KTilde, Kobayashi)
        )
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Self::ALL
            .into_iter()
            .find(|k| k.name().to_ascii_lowercase() == key)
            .or(match key.as_str() {
                "khat" => Some(Self::KobBuseman),
                "ktilde" => Some(Self::KTilde),
                "kob" => Some(Self::Kobayashi),
                "cara" => Some(Self::Caratheodory),
                _ => None,
            })
            .ok_or_else(|| Error::Parse {
                input: s.to_string(),
                key: "kind".into(),
            })
    }
}

/// `z ↦ ⟨w, z − q⟩ / R`, holomorphic in `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateFunctional {
    pub direction: ComplexVector,
    pub shift: ComplexVector,
    pub normalizer: f64,
}

impl CandidateFunctional {
    /// Normalised by the rigorous bound of `|⟨w, z − q⟩|` over the domain.
    pub fn new(domain: &ModelDomain, direction: ComplexVector, shift: ComplexVector) -> Result<Self> {
        ensure_dim(domain.dim(), direction.dim())?;
        ensure_dim(domain.dim(), shift.dim())?;
        let normalizer = domain.functional_bound(&direction, &shift);
        if !(normalizer > 0.0 && normalizer.is_finite()) {
            return Err(Error::Functional(format!(
                "degenerate normaliser {normalizer} for direction {direction}"
            )));
        }
        Ok(Self {
            direction,
            shift,
            normalizer,
        })
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        let d = ComplexVector::new(z.iter().zip(self.shift.iter()).map(|(a, b)| a - b).collect());
        ensure_dim(self.direction.dim(), z.len())?;
        Ok(hermitian_inner(&self.direction, &d)? / self.normalizer)
    }

    /// `|df(X)|`.
    pub fn derivative_modulus(&self, x: &[Complex64]) -> Result<f64> {
        Ok(hermitian_inner(&self.direction, x)?.norm() / self.normalizer)
    }

    /// Largest `|f|` over `samples` random interior points.
    pub fn sampled_sup<R: Rng + ?Sized>(
        &self,
        domain: &ModelDomain,
        samples: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for _ in 0..samples {
            let z = domain.sample_interior(rng);
            sup = sup.max(self.eval(&z)?.norm());
        }
        Ok(sup)
    }

    /// Checks the sampled supremum is at most `1 + 1e-9`.
    pub fn validate<R: Rng + ?Sized>(&self, domain: &ModelDomain, samples: usize, rng: &mut R) -> Result<()> {
        let sup = self.sampled_sup(domain, samples, rng)?;
        if sup > 1.0 + 1e-9 {
            return Err(Error::Functional(format!("sampled sup {sup} exceeds 1")));
        }
        Ok(())
    }
}

/// Coordinate functionals, `X`-aligned functional and `random` seeded
/// directions, all unshifted.
pub fn default_family(
    domain: &ModelDomain,
    x: &ComplexVector,
    random: usize,
    seed: u64,
) -> Result<Vec<CandidateFunctional>> {
    let n = domain.dim();
    ensure_dim(n, x.dim())?;
    let zero = ComplexVector::zeros(n);
    let mut dirs = Vec::with_capacity(2 * n + 1 + random);
    for j in 0..n {
        dirs.push(ComplexVector::basis(n, j));
        dirs.push(ComplexVector::basis(n, j).scale(Complex64::i()));
    }
    if let Some(u) = x.normalized() {
        dirs.push(u);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        dirs.push(random_unit(n, &mut rng));
    }
    dirs.into_iter()
        .map(|w| CandidateFunctional::new(domain, w, zero.clone()))
        .collect()
}

/// Certified disk behind a finite upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskWitness {
    pub disk: AnalyticDisk,
    pub certificate: ContainmentCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub kind: MetricKind,
    pub lower: f64,
    #[serde(with = "ext_real")]
    pub upper: f64,
    pub lower_witness: Option<CandidateFunctional>,
    pub upper_witness: Option<DiskWitness>,
    pub method: String,
    pub diagnostic: Option<String>,
}

impl MetricEstimate {
    pub fn bracket(kind: MetricKind, lower: f64, upper: f64, method: impl Into<String>) -> Self {
        Self {
            kind,
            lower,
            upper,
            lower_witness: None,
            upper_witness: None,
            method: method.into(),
            diagnostic: None,
        }
    }

    /// Raises the lower bound, keeping the larger witness.
    pub fn with_lower(mut self, lower: f64, witness: Option<CandidateFunctional>) -> Self {
        if lower > self.lower {
            self.lower = lower;
            self.lower_witness = witness;
        }
        self
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn require_inside(domain: &ModelDomain, p: &ComplexVector) -> Result<()> {
    if domain.membership(p, 0.0)? != Membership::Inside || domain.value(p) >= 0.0 {
        return Err(Error::Geometry(format!("point {p} is not inside {domain}")));
    }
    Ok(())
}

/// Coefficients of `t^k`, `k = 1..=degree`, for `ζ ↦ s·(ζ + q)/(1 + q̄ζ)` at
/// `ζ = μt` (the constant term `s·q` is dropped).
fn mobius_coeffs(s: f64, q: Complex64, mu: Complex64, degree: usize) -> Vec<Complex64> {
    let lead = s * (1.0 - q.norm_sqr());
    (1..=degree)
        .map(|k| lead * (-q.conj()).powi(k as i32 - 1) * mu.powi(k as i32))
        .collect()
}

/// Extremal disk of an oracle domain: `(a_1..a_degree, metric value)`.
fn extremal_disk(
    domain: &ModelDomain,
    p: &ComplexVector,
    x: &ComplexVector,
    degree: usize,
) -> Option<(Vec<ComplexVector>, f64)> {
    let n = p.dim();
    let coords_to_vectors = |per_coord: Vec<Vec<Complex64>>| -> Vec<ComplexVector> {
        (0..degree)
            .map(|k| ComplexVector::new((0..n).map(|j| per_coord[j][k]).collect()))
            .collect()
    };
    match domain {
        ModelDomain::UnitDisk | ModelDomain::Polydisk { .. } => {
            let radii: Vec<f64> = (0..n).map(|j| domain.coordinate_bound(j)).collect();
            let mus: Vec<Complex64> = (0..n)
                .map(|j| x[j] / (radii[j] * (1.0 - (p[j] / radii[j]).norm_sqr())))
                .collect();
            let k = mus.iter().map(|m| m.norm()).fold(0.0, f64::max);
            let per = (0..n)
                .map(|j| mobius_coeffs(radii[j], p[j] / radii[j], mus[j], degree))
                .collect();
            Some((coords_to_vectors(per), k))
        }
        ModelDomain::Ball { radius, .. } => {
            let r = *radius;
            let pp = p.scale_re(1.0 / r);
            let xn = x.norm() / r;
            let u = x.normalized()?;
            let a = hermitian_inner(&u, &pp).ok()?;
            let rs = (1.0 - pp.norm_sqr() + a.norm_sqr()).sqrt();
            let q = a / rs;
            let mu = Complex64::new(xn / (rs * (1.0 - q.norm_sqr())), 0.0);
            let zeta = mobius_coeffs(rs, q, mu, degree);
            let coeffs = zeta.iter().map(|c| u.scale(c * r)).collect();
            Some((coeffs, mu.re))
        }
        _ => None,
    }
}

/// Exact metric on the disk, polydisk and ball (where all metrics of the
/// chain coincide).
pub fn closed_form_metric(domain: &ModelDomain, p: &ComplexVector, x: &ComplexVector) -> Result<f64> {
    ensure_dim(domain.dim(), p.dim())?;
    ensure_dim(domain.dim(), x.dim())?;
    match domain {
        ModelDomain::UnitDisk | ModelDomain::Polydisk { .. } | ModelDomain::Ball { .. } => {}
        other => {
            return Err(Error::Configuration(format!("no closed form for {other}")));
        }
    }
    require_inside(domain, p)?;
    if x.is_zero() {
        return Ok(0.0);
    }
    Ok(extremal_disk(domain, p, x, 1).expect("oracle domain").1)
}

/// `|X_j| / (1 − |p_j|²)` from the projection onto coordinate `j`.
pub fn schwarz_lower(domain: &ModelDomain, p: &ComplexVector, x: &ComplexVector, j: usize) -> Result<f64> {
    ensure_dim(domain.dim(), p.dim())?;
    ensure_dim(domain.dim(), x.dim())?;
    if j >= domain.dim() {
        return Err(Error::Parameter(format!("coordinate {j} out of range")));
    }
    let bound = domain.coordinate_bound(j);
    if bound > 1.0 {
        return Err(Error::Functional(format!(
            "projection onto coordinate {j} is not into the unit disk (bound {bound})"
        )));
    }
    let pj = p[j].norm_sqr();
    if pj >= 1.0 {
        return Err(Error::Geometry(format!("|p_{j}| >= 1")));
    }
    Ok(x[j].norm() / (1.0 - pj))
}

/// Best bound `|df(X)| / (1 − |f(p)|²)` over the family.
pub fn caratheodory_lower(
    domain: &ModelDomain,
    p: &ComplexVector,
    x: &ComplexVector,
    family: &[CandidateFunctional],
) -> Result<MetricEstimate> {
    ensure_dim(domain.dim(), p.dim())?;
    ensure_dim(domain.dim(), x.dim())?;
    let mut best = (0.0, None);
    for f in family {
        let fp = f.eval(p)?.norm_sqr();
        if fp >= 1.0 {
            continue;
        }
        let v = f.derivative_modulus(x)? / (1.0 - fp);
        if v > best.0 {
            best = (v, Some(f.clone()));
        }
    }
    let mut est = MetricEstimate::bracket(MetricKind::Caratheodory, best.0, f64::INFINITY, "functional");
    est.lower_witness = best.1;
    Ok(est)
}

/// Settings for [`kob_upper`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KobConfig {
    /// Polynomial degree `N` of the disks.
    pub degree: usize,
    /// Number of optimizer starts `S`.
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Rays used to estimate the exit radius of a candidate.
    pub rays: usize,
    pub radial: usize,
    pub angular: usize,
    pub margin: f64,
}

impl Default for KobConfig {
    fn default() -> Self {
        Self {
            degree: 6,
            starts: 8,
            iterations: 2000,
            seed: 0,
            rays: 64,
            radial: crate::disks::DEFAULT_GRID.0,
            angular: crate::disks::DEFAULT_GRID.1,
            margin: Margin::default().value(),
        }
    }
}

impl KobConfig {
    /// Cheaper settings for bulk scans and fuzzing.
    pub fn light() -> Self {
        Self {
            degree: 4,
            starts: 3,
            iterations: 300,
            rays: 48,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.degree == 0 || self.degree > crate::disks::MAX_DEGREE {
            return Err(Error::Configuration(format!("degree {} out of range", self.degree)));
        }
        if self.starts == 0 || self.rays < 8 {
            return Err(Error::Configuration("need starts >= 1 and rays >= 8".into()));
        }
        Margin::new(self.margin)?;
        Ok(())
    }
}

const COARSE_MARCH: f64 = 1.25;
const FINE_MARCH: f64 = 1.03;
const BACKOFF: [f64; 6] = [1.0 - 1e-3, 1.0 - 1e-2, 0.97, 0.9, 0.75, 0.5];
const EXCHANGE_ROUNDS: usize = 10;
const RESTARTS: usize = 4;

#[derive(Clone, Copy)]
struct Ray {
    dir: Complex64,
    march: f64,
}

/// Disks `ψ(u) = p + X̂u + Σ_{k≥2} b_k u^k` in the normalised variable
/// `u = σt`, probed along rays.
struct RayProbe<'a> {
    domain: &'a ModelDomain,
    p: &'a [Complex64],
    xhat: &'a [Complex64],
    rays: Vec<Ray>,
    margin: f64,
    higher: usize,
}

impl RayProbe<'_> {
    fn n(&self) -> usize {
        self.p.len()
    }

    #[inline]
    fn inside(&self, b: &[Complex64], u: Complex64, buf: &mut [Complex64]) -> bool {
        let n = self.n();
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (0..self.higher).rev() {
                acc = (acc + b[k * n + j]) * u;
            }
            buf[j] = self.p[j] + (self.xhat[j] + acc) * u;
        }
        self.domain.value(buf) <= -self.margin
    }

    /// First exit radius along `ray`, or `cap` if none below it.
    fn exit(&self, b: &[Complex64], ray: Ray, s_lo: f64, cap: f64, buf: &mut [Complex64]) -> f64 {
        let mut prev = 0.0;
        let mut s = s_lo.min(cap);
        loop {
            if !self.inside(b, ray.dir * s, buf) {
                let (mut lo, mut hi) = (prev, s);
                while hi - lo > 1e-10 * hi {
                    let mid = 0.5 * (lo + hi);
                    if self.inside(b, ray.dir * mid, buf) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return lo;
            }
            if s >= cap {
                return cap;
            }
            prev = s;
            s = (s * ray.march).min(cap);
        }
    }

    /// Smallest exit radius over the rays. When `incumbent > 0`, returns some
    /// value `<= incumbent` as soon as one is guaranteed.
    fn radius(&self, b: &[Complex64], incumbent: f64, s_lo: f64, cap: f64, binding: &Cell<usize>) -> f64 {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n()];
        let count = self.rays.len();
        let first = binding.get().min(count - 1);
        let order = || (0..count).map(|i| (first + i) % count);
        if incumbent > 0.0 {
            for i in order() {
                if !self.inside(b, self.rays[i].dir * incumbent, &mut buf) {
                    binding.set(i);
                    return incumbent;
                }
            }
        }
        let mut rmin = cap;
        let mut arg = first;
        for i in order() {
            let e = self.exit(b, self.rays[i], s_lo, rmin, &mut buf);
            if e < rmin {
                rmin = e;
                arg = i;
            }
            if incumbent > 0.0 && rmin <= incumbent {
                break;
            }
        }
        binding.set(arg);
        rmin
    }
}

struct Seed {
    label: &'static str,
    b: Vec<Complex64>,
}

/// Kobayashi–Royden upper bound from an optimised, certified polynomial disk.
///
/// The disk `φ(t) = p + Xt + Σ a_k t^k` is searched in the normalised
/// variable `u = σt` with `σ = |X| e^{i arg X_j}` (`j` the largest
/// coordinate), which makes the search identical for `X` and `cX`. A
/// candidate's radius is its smallest first-exit radius over a fan of rays.
/// Optimised disks are certified with [`certify_containment`]; when that
/// fails, rays are added where the certificate found the violation and the
/// search resumes. The best certified disk wins, backing off the radius when
/// needed.
pub fn kob_upper(
    domain: &ModelDomain,
    p: &ComplexVector,
    x: &ComplexVector,
    config: &KobConfig,
) -> Result<MetricEstimate> {
    let n = domain.dim();
    ensure_dim(n, p.dim())?;
    ensure_dim(n, x.dim())?;
    config.validate()?;
    require_inside(domain, p)?;
    if x.is_zero() {
        return Ok(MetricEstimate::bracket(MetricKind::Kobayashi, 0.0, 0.0, "zero-vector"));
    }
    if domain.value(p) > -config.margin {
        return Ok(no_witness(format!(
            "base point is within the certification margin {} of the boundary",
            config.margin
        )));
    }

    let jstar = (0..n)
        .max_by(|&a, &b| x[a].norm().partial_cmp(&x[b].norm()).unwrap().then(b.cmp(&a)))
        .unwrap();
    let xnorm = x.norm();
    let sigma = Complex64::from_polar(xnorm, x[jstar].arg());
    let xhat = x.scale(sigma.inv());
    let higher = config.degree - 1;
    let spacing = std::f64::consts::TAU / config.rays as f64;
    let mut rays: Vec<Ray> = (0..config.rays)
        .map(|i| Ray {
            dir: Complex64::from_polar(1.0, spacing * i as f64),
            march: COARSE_MARCH,
        })
        .collect();
    let probe_with = |rays: Vec<Ray>, margin: f64| RayProbe {
        domain,
        p,
        xhat: &xhat,
        rays,
        margin,
        higher,
    };

    let seeds = build_seeds(domain, p, x, sigma, config.degree);
    let d_lin = domain.exit_distance(p, &xhat).max(1e-300);
    let seed_probe = probe_with(rays.clone(), config.margin);
    let binding = Cell::new(0);
    let mut scored: Vec<(f64, usize)> = seeds
        .iter()
        .enumerate()
        .map(|(i, s)| (seed_probe.radius(&s.b, 0.0, 1e-3 * d_lin, 1e6 * d_lin, &binding), i))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let (r_seed, best_idx) = scored[0];
    let best_seed = &seeds[best_idx];

    // Variable scaling: b_{k,j} = β_{k,j} · S_j / R^k.
    let excursion: Vec<f64> = (0..n)
        .map(|j| {
            let lin = xhat[j].norm() * r_seed;
            (0..higher).fold(lin, |m, k| m.max(best_seed.b[k * n + j].norm() * r_seed.powi(k as i32 + 2)))
        })
        .collect();
    let fallback = excursion.iter().cloned().fold(0.0, f64::max).max(r_seed);
    let scale: Vec<f64> = excursion
        .iter()
        .map(|&e| if e > 1e-3 * fallback { e } else { fallback })
        .collect();
    let to_b = |beta: &[f64]| -> Vec<Complex64> {
        (0..higher * n)
            .map(|idx| {
                let (k, j) = (idx / n, idx % n);
                Complex64::new(beta[2 * idx], beta[2 * idx + 1]) * scale[j] / r_seed.powi(k as i32 + 2)
            })
            .collect()
    };
    let to_beta = |b: &[Complex64]| -> Vec<f64> {
        b.iter()
            .enumerate()
            .flat_map(|(idx, c)| {
                let (k, j) = (idx / n, idx % n);
                let v = c * r_seed.powi(k as i32 + 2) / scale[j];
                [v.re, v.im]
            })
            .collect()
    };

    let grid_margin = Margin::new(config.margin)?;
    // The grid is laid on s = t·e^{iθ}, θ = arg σ; the image is the same set
    // and the outcome no longer depends on the phase of X.
    let phase = sigma / xnorm;
    let x_rot = x.scale(phase.conj());
    let certify_with = |b: &[Complex64], rho: f64, budget: Option<usize>| -> Result<DiskWitness> {
        let rotated = t_space_disk(p, &x_rot, Complex64::new(xnorm, 0.0), b, n, higher, rho)?;
        let mut certificate =
            certify_containment_budgeted(&rotated, domain, config.radial, config.angular, grid_margin, budget)?;
        let t = Complex64::new(certificate.worst_at[0], certificate.worst_at[1]) * phase.conj();
        certificate.worst_at = [t.re, t.im];
        let disk = t_space_disk(p, x, sigma, b, n, higher, rho)?;
        Ok(DiskWitness { disk, certificate })
    };
    let certify = |b: &[Complex64], rho: f64| certify_with(b, rho, None);

    let s_lo = 1e-3 * r_seed;
    let cap = 8.0 * r_seed;
    let mut starts: Vec<Vec<f64>> = scored.iter().map(|&(_, i)| to_beta(&seeds[i].b)).collect();
    starts.truncate(config.starts);
    let base = to_beta(&best_seed.b);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while starts.len() < config.starts {
        let noise: Vec<f64> = base.iter().map(|v| v + 0.25 * rng.sample::<f64, _>(StandardNormal)).collect();
        starts.push(noise);
    }
    let opts = CompassOptions {
        initial_step: 0.25,
        tolerance: 1e-5,
        max_iterations: config.iterations,
        ..CompassOptions::default()
    };

    let mut best: Option<(f64, DiskWitness, &str)> = None;
    let mut pending: Option<(f64, Vec<Complex64>)> = None;
    let mut rounds = 0;
    // Raised after each failed certification so that the next optimum clears
    // the boundary by more than the sampling error between rays.
    let mut search_margin = config.margin;
    let margin_cap = -0.25 * domain.value(p);
    if higher > 0 {
        for _ in 0..EXCHANGE_ROUNDS {
            rounds += 1;
            let probe = probe_with(rays.clone(), search_margin);
            let results: Vec<(f64, Vec<f64>)> = starts
                .par_iter()
                .enumerate()
                .map(|(i, x0)| {
                    let binding = Cell::new(0);
                    let f = |beta: &[f64], inc: f64| {
                        -probe.radius(&to_b(beta), (-inc).exp(), s_lo, cap, &binding).ln()
                    };
                    let opts = CompassOptions {
                        rotation_seed: Some(config.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                        ..opts.clone()
                    };
                    let mut res = compass_search_bounded(f, x0, &opts);
                    // pattern search stalls on ridges; restarting with a fresh step often moves on
                    for _ in 0..RESTARTS {
                        let again = compass_search_bounded(f, &res.x, &opts);
                        let gained = res.value - again.value;
                        res = again;
                        if gained < 1e-4 {
                            break;
                        }
                    }
                    ((-res.value).exp(), res.x)
                })
                .collect();
            let (r_opt, beta_opt) = results
                .into_iter()
                .fold((0.0, Vec::new()), |acc, (r, b)| if r > acc.0 { (r, b) } else { acc });
            if beta_opt.is_empty() || (rounds == 1 && !(r_opt > r_seed * (1.0 + 1e-6))) {
                break;
            }
            let b = to_b(&beta_opt);
            let rho = r_opt / xnorm * BACKOFF[0];
            let w = certify(&b, rho)?;
            if w.certificate.valid {
                best = Some((rho, w, "optimized"));
                break;
            }
            let t = Complex64::new(w.certificate.worst_at[0], w.certificate.worst_at[1]);
            let angle = (t * sigma).arg();
            for d in [-1.0, 0.0, 1.0] {
                rays.push(Ray {
                    dir: Complex64::from_polar(1.0, angle + d * spacing / 8.0),
                    march: FINE_MARCH,
                });
            }
            search_margin = (search_margin + 1.5 * (-w.certificate.slack).max(config.margin))
                .min(margin_cap.max(config.margin));
            pending = Some((r_opt, b));
            starts.truncate(config.starts);
            starts.insert(0, beta_opt);
        }
    }

    let mut candidates = Vec::new();
    if best.is_none() {
        if let Some((r, b)) = pending {
            candidates.push((r, b, "optimized"));
        }
    }
    candidates.push((r_seed, best_seed.b.clone(), best_seed.label));
    for (r, b, label) in candidates {
        if !(r > 0.0 && r.is_finite()) {
            continue;
        }
        for f in BACKOFF {
            let rho = r / xnorm * f;
            if best.as_ref().is_some_and(|(br, _, _)| *br >= rho) {
                break;
            }
            let w = certify(&b, rho)?;
            if w.certificate.valid {
                best = Some((rho, w, label));
                break;
            }
        }
    }
    if best.is_none() {
        // short linear disks as a last resort
        let zero = vec![Complex64::new(0.0, 0.0); higher * n];
        let mut rho = d_lin / xnorm;
        for _ in 0..20 {
            rho *= 0.5;
            let w = certify(&zero, rho)?;
            if w.certificate.valid {
                best = Some((rho, w, "linear"));
                break;
            }
        }
    }
    Ok(match best {
        Some((rho, witness, label)) => MetricEstimate {
            kind: MetricKind::Kobayashi,
            lower: 0.0,
            upper: 1.0 / rho,
            lower_witness: None,
            upper_witness: Some(witness),
            method: format!("disk:{label}"),
            diagnostic: (rounds > 1).then(|| format!("{rounds} exchange rounds")),
        },
        None => no_witness("no candidate disk could be certified".into()),
    })
}

fn no_witness(diagnostic: String) -> MetricEstimate {
    let mut est = MetricEstimate::bracket(MetricKind::Kobayashi, 0.0, f64::INFINITY, "none");
    est.diagnostic = Some(diagnostic);
    est
}

fn t_space_disk(
    p: &ComplexVector,
    x: &ComplexVector,
    sigma: Complex64,
    b: &[Complex64],
    n: usize,
    higher: usize,
    radius: f64,
) -> Result<AnalyticDisk> {
    let mut by_degree = vec![x.clone()];
    for k in 0..higher {
        let s = sigma.powi(k as i32 + 2);
        by_degree.push(ComplexVector::new((0..n).map(|j| b[k * n + j] * s).collect()));
    }
    AnalyticDisk::from_degree_coeffs(p.clone(), &by_degree, radius)
}

/// Starting disks in the normalised variable, always including the linear disk.
fn build_seeds(
    domain: &ModelDomain,
    p: &ComplexVector,
    x: &ComplexVector,
    sigma: Complex64,
    degree: usize,
) -> Vec<Seed> {
    let n = p.dim();
    let higher = degree - 1;
    let to_u = |a: &[ComplexVector]| -> Vec<Complex64> {
        let mut b = vec![Complex64::new(0.0, 0.0); higher * n];
        for (k, ak) in a.iter().enumerate().skip(1).take(higher) {
            let s = sigma.powi(k as i32 + 1).inv();
            for j in 0..n {
                b[(k - 1) * n + j] = ak[j] * s;
            }
        }
        b
    };
    let zero = ComplexVector::zeros(n);
    let mut seeds = vec![Seed {
        label: "linear",
        b: vec![Complex64::new(0.0, 0.0); higher * n],
    }];
    if higher == 0 {
        return seeds;
    }
    if let Some((a, _)) = extremal_disk(domain, p, x, degree) {
        seeds.push(Seed {
            label: "extremal",
            b: to_u(&a),
        });
    }
    let Some(delta) = ModelDomain::base_delta(p) else {
        return seeds;
    };
    let alpha = x[0];
    let beta = x[1];
    if matches!(domain, ModelDomain::HalfParab) && beta.norm() > 0.0 {
        let c = alpha.norm() / (delta.sqrt() * beta.norm());
        if c < 2.0 * 2f64.sqrt() {
            let mut a2 = zero.clone();
            a2[0] = -alpha * alpha / (8.0 * delta);
            seeds.push(Seed {
                label: "quad",
                b: to_u(&[x.clone(), a2]),
            });
        }
    }
    if matches!(
        domain,
        ModelDomain::HalfParab | ModelDomain::OmegaXi { .. } | ModelDomain::GEpsilon { .. }
    ) && alpha.norm() > 0.0
    {
        let lam = Complex64::from_polar(
            delta.powf(0.75) / (2f64.sqrt() * alpha.norm()),
            -sigma.arg(),
        );
        let mut a2 = zero;
        a2[1] = (2.0 * lam * lam).inv();
        seeds.push(Seed {
            label: "lambda",
            b: to_u(&[x.clone(), a2]),
        });
    }
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn v(re: &[f64]) -> ComplexVector {
        ComplexVector::from_re(re)
    }

    #[test]
    fn closed_form_examples() {
        let d = ModelDomain::UnitDisk;
        assert_eq!(closed_form_metric(&d, &v(&[0.0]), &v(&[1.0])).unwrap(), 1.0);
        assert!((closed_form_metric(&d, &v(&[0.5]), &v(&[1.0])).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let pd = ModelDomain::polydisk(vec![1.0, 1.0]).unwrap();
        assert_eq!(closed_form_metric(&pd, &v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap(), 1.0);
        let b = ModelDomain::ball(2, 2.0).unwrap();
        assert!((closed_form_metric(&b, &v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            closed_form_metric(&ModelDomain::HalfParab, &v(&[-0.1, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn ball_closed_form_matches_hermitian_formula() {
        // K² = |X|²/(1−|p|²) + |⟨p,X⟩|²/(1−|p|²)² on the unit ball
        let b = ModelDomain::ball(2, 1.0).unwrap();
        let p = ComplexVector::new(vec![c(0.3, -0.2), c(0.1, 0.4)]);
        let x = ComplexVector::new(vec![c(1.0, 0.5), c(-0.3, 0.2)]);
        let s = 1.0 - p.norm_sqr();
        let px = hermitian_inner(&p, &x).unwrap().norm_sqr();
        let expected = (x.norm_sqr() / s + px / (s * s)).sqrt();
        assert!((closed_form_metric(&b, &p, &x).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn schwarz_examples() {
        let g = ModelDomain::HalfParab;
        let l = schwarz_lower(&g, &v(&[-0.01, 0.0]), &ComplexVector::new(vec![c(0.3, 0.0), c(0.0, 2.0)]), 1)
            .unwrap();
        assert_eq!(l, 2.0);
        assert_eq!(schwarz_lower(&ModelDomain::UnitDisk, &v(&[0.0]), &v(&[1.0]), 0).unwrap(), 1.0);
        let pd = ModelDomain::polydisk(vec![1.0, 1.0]).unwrap();
        assert!((schwarz_lower(&pd, &v(&[0.5, 0.0]), &v(&[1.0, 0.0]), 0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let big = ModelDomain::ball(2, 2.0).unwrap();
        assert!(matches!(
            schwarz_lower(&big, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), 0),
            Err(Error::Functional(_))
        ));
    }

    #[test]
    fn caratheodory_examples() {
        let b = ModelDomain::ball(2, 1.0).unwrap();
        let x = v(&[1.0, 0.0]);
        let fam: Vec<_> = (0..2)
            .map(|j| CandidateFunctional::new(&b, ComplexVector::basis(2, j), ComplexVector::zeros(2)).unwrap())
            .collect();
        assert_eq!(caratheodory_lower(&b, &v(&[0.0, 0.0]), &x, &fam).unwrap().lower, 1.0);

        let g = ModelDomain::HalfParab;
        let f2 = CandidateFunctional::new(&g, ComplexVector::basis(2, 1), ComplexVector::zeros(2)).unwrap();
        let e = caratheodory_lower(&g, &v(&[-1e-3, 0.0]), &v(&[0.0, 1.0]), &[f2]).unwrap();
        assert_eq!(e.lower, 1.0);
        assert!(e.lower_witness.is_some());

        let pd = ModelDomain::polydisk(vec![1.0, 1.0]).unwrap();
        let fam = default_family(&pd, &v(&[1.0, 1.0]), 32, 3).unwrap();
        let e = caratheodory_lower(&pd, &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), &fam).unwrap();
        assert!((e.lower - 1.0).abs() < 1e-12);

        assert_eq!(caratheodory_lower(&pd, &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), &[]).unwrap().lower, 0.0);
    }

    #[test]
    fn family_functionals_are_bounded_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [
            ModelDomain::HalfParab,
            ModelDomain::ball(3, 1.5).unwrap(),
            ModelDomain::omega(2.0).unwrap(),
            ModelDomain::geps(2.0, 2.0, 2.0, 3).unwrap(),
        ] {
            let x = random_unit(d.dim(), &mut rng);
            for f in default_family(&d, &x, 32, 7).unwrap() {
                f.validate(&d, 2000, &mut rng).unwrap();
            }
        }
    }

    #[test]
    fn kind_order() {
        use MetricKind::*;
        assert!(Caratheodory.below_or_equal(Kobayashi));
        assert!(Sibony.below_or_equal(KobBuseman));
        assert!(!Azukawa.below_or_equal(KobBuseman));
        assert!(!KobBuseman.below_or_equal(Azukawa));
        assert!(KTilde.below_or_equal(Kobayashi));
        assert!(!Kobayashi.below_or_equal(KTilde));
        assert_eq!("khat".parse::<MetricKind>().unwrap(), KobBuseman);
        assert_eq!("Kobayashi".parse::<MetricKind>().unwrap(), Kobayashi);
        assert!("nope".parse::<MetricKind>().is_err());
    }

    fn check_witness(est: &MetricEstimate, domain: &ModelDomain, x: &ComplexVector) {
        let w = est.upper_witness.as_ref().expect("witness");
        assert!(w.certificate.valid);
        assert_eq!(w.disk.jet_at_zero().1, *x);
        assert!((est.upper - 1.0 / w.disk.radius).abs() <= 1e-12 * est.upper);
        let again = crate::disks::certify_containment(&w.disk, domain, 64, 256, Margin::default()).unwrap();
        assert!(again.valid);
    }

    #[test]
    fn kob_upper_unit_disk() {
        let d = ModelDomain::UnitDisk;
        let cfg = KobConfig::default();
        let e = kob_upper(&d, &v(&[0.0]), &v(&[1.0]), &cfg).unwrap();
        assert!(e.upper >= 1.0 && e.upper <= 1.02, "{}", e.upper);
        check_witness(&e, &d, &v(&[1.0]));
        let e = kob_upper(&d, &v(&[0.5]), &v(&[1.0]), &cfg).unwrap();
        assert!(e.upper >= 4.0 / 3.0 && e.upper <= 1.02 * 4.0 / 3.0, "{}", e.upper);
    }

    #[test]
    fn kob_upper_half_parab_tangential() {
        let g = ModelDomain::HalfParab;
        let x = v(&[0.2, 1.0]);
        let e = kob_upper(&g, &v(&[-0.04, 0.0]), &x, &KobConfig::default()).unwrap();
        assert!(e.upper <= 1.01, "{}", e.upper);
        check_witness(&e, &g, &x);
    }

    #[test]
    fn kob_upper_half_parab_normal() {
        let g = ModelDomain::HalfParab;
        let x = v(&[1.0, 0.0]);
        let e = kob_upper(&g, &v(&[-1e-4, 0.0]), &x, &KobConfig::default()).unwrap();
        assert!(e.upper <= 2f64.sqrt() * 1e3 * 1.01, "{}", e.upper);
        check_witness(&e, &g, &x);
    }

    #[test]
    fn kob_upper_zero_vector_and_outside_point() {
        let d = ModelDomain::UnitDisk;
        let e = kob_upper(&d, &v(&[0.2]), &v(&[0.0]), &KobConfig::light()).unwrap();
        assert_eq!(e.upper, 0.0);
        assert!(kob_upper(&d, &v(&[1.5]), &v(&[1.0]), &KobConfig::light()).is_err());
    }

    #[test]
    fn kob_upper_is_covariant() {
        let g = ModelDomain::HalfParab;
        let p = v(&[-0.01, 0.0]);
        let x = ComplexVector::new(vec![c(0.3, 0.1), c(0.2, -0.4)]);
        let cfg = KobConfig::light();
        let base = kob_upper(&g, &p, &x, &cfg).unwrap().upper;
        for f in [c(2.0, 0.0), c(1.0 / 3.0, 0.0), Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)] {
            let scaled = kob_upper(&g, &p, &x.scale(f), &cfg).unwrap().upper;
            assert!((scaled / (f.norm() * base) - 1.0).abs() < 0.02, "{f}: {scaled} vs {base}");
        }
    }

    #[test]
    fn estimate_json_writes_inf() {
        let e = MetricEstimate::bracket(MetricKind::Kobayashi, 0.0, f64::INFINITY, "none");
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"upper\":\"inf\""));
        let back: MetricEstimate = serde_json::from_str(&s).unwrap();
        assert_eq!(back.upper, f64::INFINITY);
    }
}
