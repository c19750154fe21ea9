//! Indicatrix sampling, the convex gauge `K̂` and the Hartogs-figure bound
//! for `K̃` on `G_ε`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disks::{certify_containment, make_linear_disk, DEFAULT_GRID};
use crate::domains::{Margin, ModelDomain};
use crate::error::{ensure_dim, Error, Result};
use crate::geometry::{fibonacci_sphere, sphere_point, ComplexVector};
use crate::metrics::{kob_upper, KobConfig};
use crate::simplex::{solve, LpOutcome};

/// Largest number of entries the gauge LP accepts.
pub const MAX_ENTRIES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatrixEntry {
    pub direction: ComplexVector,
    /// Upper bound for `K(z; direction)`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    pub phases: usize,
    pub kob: KobConfig,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            phases: 8,
            kob: KobConfig::light(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatrixSample {
    pub base: ComplexVector,
    pub domain: ModelDomain,
    pub entries: Vec<IndicatrixEntry>,
    pub config: SampleConfig,
    /// Directions skipped because no disk could be certified.
    pub uncertified: usize,
}

impl IndicatrixSample {
    /// Adds `direction` (normalised) and its phase orbit with value
    /// `bound / |direction|`, where `bound` bounds `K(z; direction)`.
    pub fn push_orbit(&mut self, direction: &ComplexVector, bound: f64) -> Result<()> {
        ensure_dim(self.base.dim(), direction.dim())?;
        let norm = direction.norm();
        if norm == 0.0 || !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::Parameter("orbit needs a nonzero direction and a finite bound".into()));
        }
        let u = direction.scale_re(1.0 / norm);
        for j in 0..self.config.phases.max(1) {
            let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / self.config.phases.max(1) as f64);
            self.entries.push(IndicatrixEntry {
                direction: u.scale(phase),
                value: bound / norm,
            });
        }
        Ok(())
    }
}

/// Quasi-uniform unit directions in `ℂⁿ` followed by the coordinate axes
/// and the pairwise diagonals `(e_i + ωe_j)/√2`, `ω ∈ {1, i, −1, −i}`.
pub fn sample_directions(n: usize, count: usize) -> Vec<ComplexVector> {
    let mut dirs: Vec<ComplexVector> = match n {
        0 => Vec::new(),
        1 => vec![ComplexVector::from_re(&[1.0])],
        2 => (0..count)
            .map(|i| {
                // Hopf lift of a Fibonacci point on S²
                let [x, y, z] = fibonacci_sphere(i, count);
                let theta = z.clamp(-1.0, 1.0).acos();
                let phi = y.atan2(x);
                ComplexVector::new(vec![
                    Complex64::new((theta / 2.0).cos(), 0.0),
                    Complex64::from_polar((theta / 2.0).sin(), phi),
                ])
            })
            .collect(),
        _ => (0..count)
            .map(|i| ComplexVector::from_real_coords(&sphere_point(2 * n, i, count)))
            .collect(),
    };
    if n > 1 {
        dirs.extend((0..n).map(|j| ComplexVector::basis(n, j)));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..n {
            for j in i + 1..n {
                for w in [Complex64::new(h, 0.0), Complex64::new(0.0, h), Complex64::new(-h, 0.0), Complex64::new(0.0, -h)] {
                    let mut d = vec![Complex64::new(0.0, 0.0); n];
                    d[i] = Complex64::new(h, 0.0);
                    d[j] = w;
                    dirs.push(ComplexVector::new(d));
                }
            }
        }
    }
    dirs
}

/// Samples the Kobayashi indicatrix at `p` with `kob_upper` along
/// `direction_count` directions, each replicated over the phase orbit.
pub fn indicatrix_sample(
    domain: &ModelDomain,
    p: &ComplexVector,
    direction_count: usize,
    config: &SampleConfig,
) -> Result<IndicatrixSample> {
    ensure_dim(domain.dim(), p.dim())?;
    let dirs = sample_directions(domain.dim(), direction_count);
    if dirs.len() * config.phases.max(1) > MAX_ENTRIES {
        return Err(Error::Configuration(format!(
            "{} directions x {} phases exceeds {MAX_ENTRIES} entries",
            dirs.len(),
            config.phases
        )));
    }
    let values: Vec<f64> = dirs
        .par_iter()
        .map(|u| kob_upper(domain, p, u, &config.kob).map(|e| e.upper))
        .collect::<Result<_>>()?;
    let mut sample = IndicatrixSample {
        base: p.clone(),
        domain: domain.clone(),
        entries: Vec::new(),
        config: config.clone(),
        uncertified: 0,
    };
    for (u, v) in dirs.iter().zip(values) {
        if v.is_finite() && v > 0.0 {
            sample.push_orbit(u, v)?;
        } else {
            sample.uncertified += 1;
        }
    }
    Ok(sample)
}

/// Gauge of the convex hull of the sampled indicatrix points at `X`, or
/// `+∞` when `X` lies outside their cone.
pub fn khat_gauge(sample: &IndicatrixSample, x: &ComplexVector) -> Result<f64> {
    ensure_dim(sample.base.dim(), x.dim())?;
    if sample.entries.is_empty() {
        return Err(Error::Precondition("indicatrix sample is empty".into()));
    }
    if sample.entries.len() > MAX_ENTRIES {
        return Err(Error::Configuration(format!(
            "{} entries exceeds {MAX_ENTRIES}",
            sample.entries.len()
        )));
    }
    if x.is_zero() {
        return Ok(0.0);
    }
    let points: Vec<Vec<f64>> = sample
        .entries
        .iter()
        .map(|e| e.direction.scale_re(1.0 / e.value).to_real_coords())
        .collect();
    let rows = 2 * x.dim();
    let a: Vec<Vec<f64>> = (0..rows).map(|r| points.iter().map(|pt| pt[r]).collect()).collect();
    let b = x.to_real_coords();
    let c = vec![1.0; points.len()];
    Ok(match solve(&a, &b, &c) {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Infeasible | LpOutcome::Unbounded => f64::INFINITY,
    })
}

/// Polydisk `R₁𝔻 × 𝔻 × R₃𝔻^{n−2}` inside the Kobayashi indicatrix of
/// `G_ε` at `P_δ`, obtained by completing a certified Hartogs figure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HartogsFigure {
    pub m: f64,
    pub k: f64,
    pub delta: f64,
    pub c: f64,
    pub c1: f64,
    pub radii: [f64; 3],
    pub dim: usize,
    /// Number of grid disks certified.
    pub certified: usize,
    /// Smallest certificate slack over the grid.
    pub min_slack: f64,
}

impl HartogsFigure {
    /// Gauge of the polydisk: `max(|X₁|/R₁, |X₂|/R₂, |X′|_∞/R₃)`.
    pub fn gauge(&self, x: &ComplexVector) -> Result<f64> {
        ensure_dim(self.dim, x.dim())?;
        let tail = x.iter().skip(2).map(|z| z.norm()).fold(0.0, f64::max);
        Ok((x[0].norm() / self.radii[0])
            .max(x[1].norm() / self.radii[1])
            .max(tail / self.radii[2]))
    }

    /// The grid of tangent vectors whose linear disks are certified.
    pub fn grid(&self) -> Vec<ComplexVector> {
        let [r1, _, r3] = self.radii;
        let mut firsts = vec![Complex64::new(0.0, 0.0)];
        for mu in [0.5, 1.0] {
            for j in 0..8 {
                firsts.push(Complex64::from_polar(mu * r1, std::f64::consts::PI * j as f64 / 4.0));
            }
        }
        let tail_len = self.dim - 2;
        let levels = [0.0, 0.5 * r3, r3, -0.5 * r3, -r3];
        let mut out = Vec::new();
        for x1 in &firsts {
            for code in 0..levels.len().pow(tail_len as u32) {
                let mut v = vec![*x1, Complex64::new(1.0, 0.0)];
                let mut c = code;
                for _ in 0..tail_len {
                    v.push(Complex64::new(levels[c % levels.len()], 0.0));
                    c /= levels.len();
                }
                out.push(ComplexVector::new(v));
            }
        }
        out
    }
}

/// Default safety factor: `c^k = 0.998 / 2`.
pub const DEFAULT_SAFETY: f64 = 0.998;

/// Builds and certifies the figure on the default `G_ε` (`ε = 2`, `n = 3`).
pub fn hartogs_polydisk(m: f64, k: f64, delta: f64, safety: f64) -> Result<HartogsFigure> {
    let domain = ModelDomain::geps(2.0, m, k, 3)?;
    hartogs_polydisk_on(&domain, delta, safety)
}

/// Builds the figure for a `G_ε` domain and certifies every grid disk
/// `ζ ↦ P_δ + ζX` on the closed unit disk.
pub fn hartogs_polydisk_on(domain: &ModelDomain, delta: f64, safety: f64) -> Result<HartogsFigure> {
    let ModelDomain::GEpsilon { m, k, dim, .. } = *domain else {
        return Err(Error::Configuration(format!("Hartogs figure needs a G_eps domain, got {domain}")));
    };
    if !(m >= 1.0 && k > 0.0 && k <= m) {
        return Err(Error::Parameter(format!("need m >= 1 and 0 < k <= m, got m={m}, k={k}")));
    }
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::Parameter(format!(
            "safety must lie in (0, 1) so that c^k < 1/2, got {safety}"
        )));
    }
    let p = domain.base_point(delta)?;
    let c1 = safety / 2.0;
    let c = c1.powf(1.0 / k);
    let radii = [
        c1 * delta.powf(1.0 - 1.0 / m),
        1.0,
        c * delta.powf(1.0 / k - 1.0 / m),
    ];
    let mut fig = HartogsFigure {
        m,
        k,
        delta,
        c,
        c1,
        radii,
        dim,
        certified: 0,
        min_slack: f64::INFINITY,
    };
    let grid = fig.grid();
    let certs: Vec<(ComplexVector, crate::disks::ContainmentCertificate)> = grid
        .into_par_iter()
        .map(|x| {
            let disk = make_linear_disk(&p, &x)?;
            let cert = certify_containment(&disk, domain, DEFAULT_GRID.0, DEFAULT_GRID.1, Margin::default())?;
            Ok((x, cert))
        })
        .collect::<Result<_>>()?;
    for (x, cert) in certs {
        if !cert.valid {
            return Err(Error::Geometry(format!(
                "Hartogs grid disk with X = {x} fails certification at delta = {delta} (slack {})",
                cert.slack
            )));
        }
        fig.certified += 1;
        fig.min_slack = fig.min_slack.min(cert.slack);
    }
    Ok(fig)
}

/// `K̃_{G_ε}(P_δ; X) ≤ gauge of the completed Hartogs polydisk`.
pub fn ktilde_upper(domain: &ModelDomain, delta: f64, x: &ComplexVector) -> Result<f64> {
    hartogs_polydisk_on(domain, delta, DEFAULT_SAFETY)?.gauge(x)
}

/// Adds the certified grid vectors of `fig` to `sample` with bound 1.
pub fn add_figure_entries(sample: &mut IndicatrixSample, fig: &HartogsFigure) -> Result<()> {
    for x in fig.grid() {
        sample.push_orbit(&x, 1.0)?;
    }
    Ok(())
}
