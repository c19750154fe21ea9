//! Polynomial analytic disks and containment certificates.
//!
//! A disk is `φ(t) = center + Σ_{k=1}^N a_k t^k` on `|t| < radius`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{Margin, ModelDomain};
use crate::error::{ensure_dim, Error, Result};
use crate::geometry::ComplexVector;

/// Largest polynomial degree accepted for a disk.
pub const MAX_DEGREE: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDisk {
    pub center: ComplexVector,
    /// `coeffs[j][k-1]` is the coefficient of `t^k` in coordinate `j`.
    pub coeffs: Vec<ComplexVector>,
    pub radius: f64,
}

impl AnalyticDisk {
    pub fn new(center: ComplexVector, coeffs: Vec<ComplexVector>, radius: f64) -> Result<Self> {
        ensure_dim(center.dim(), coeffs.len())?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!("disk radius must be > 0, got {radius}")));
        }
        let degree = coeffs.iter().map(|c| c.dim()).max().unwrap_or(0);
        if degree > MAX_DEGREE {
            return Err(Error::Parameter(format!(
                "degree {degree} exceeds maximum {MAX_DEGREE}"
            )));
        }
        // pad to a common degree
        let coeffs = coeffs
            .into_iter()
            .map(|c| {
                let mut v = c.into_inner();
                v.resize(degree, Complex64::new(0.0, 0.0));
                ComplexVector::new(v)
            })
            .collect();
        Ok(Self {
            center,
            coeffs,
            radius,
        })
    }

    /// Disk from per-degree vectors: `by_degree[k-1]` is `a_k ∈ ℂⁿ`.
    pub fn from_degree_coeffs(
        center: ComplexVector,
        by_degree: &[ComplexVector],
        radius: f64,
    ) -> Result<Self> {
        let n = center.dim();
        for a in by_degree {
            ensure_dim(n, a.dim())?;
        }
        let coeffs = (0..n)
            .map(|j| ComplexVector::new(by_degree.iter().map(|a| a[j]).collect()))
            .collect();
        Self::new(center, coeffs, radius)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.first().map_or(0, |c| c.dim())
    }

    /// Coefficient vector `a_k` (`k ≥ 1`), zero beyond the degree.
    pub fn coefficient(&self, k: usize) -> ComplexVector {
        ComplexVector::new(
            self.coeffs
                .iter()
                .map(|c| c.get(k - 1).copied().unwrap_or_default())
                .collect(),
        )
    }

    pub fn eval(&self, t: Complex64) -> Result<ComplexVector> {
        if t.norm() > self.radius * (1.0 + 1e-12) {
            return Err(Error::OutsideDisk {
                modulus: t.norm(),
                radius: self.radius,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.eval_into(t, &mut out);
        Ok(ComplexVector::new(out))
    }

    /// Horner evaluation without the radius check.
    #[inline]
    pub fn eval_into(&self, t: Complex64, out: &mut [Complex64]) {
        for ((o, c0), cs) in out.iter_mut().zip(self.center.iter()).zip(&self.coeffs) {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in cs.iter().rev() {
                acc = (acc + a) * t;
            }
            *o = c0 + acc;
        }
    }

    /// `(φ(0), φ′(0))`.
    pub fn jet_at_zero(&self) -> (ComplexVector, ComplexVector) {
        (self.center.clone(), self.coefficient(1))
    }

    /// `Σ k |a_k| radius^{k−1}`, a Lipschitz constant of `φ` on its disk.
    pub fn lipschitz(&self) -> f64 {
        (1..=self.degree())
            .map(|k| k as f64 * self.coefficient(k).norm() * self.radius.powi(k as i32 - 1))
            .sum()
    }

    /// Upper bound for `sup |φ(t) − φ(0)|` over the disk.
    pub fn image_bound(&self) -> f64 {
        (1..=self.degree())
            .map(|k| self.coefficient(k).norm() * self.radius.powi(k as i32))
            .sum()
    }

    /// Same image set, reparametrised by `ψ(s) = φ(s / μ)` on `|s| < |μ|·radius`.
    pub fn reparametrize(&self, mu: Complex64) -> Result<Self> {
        if mu.norm() == 0.0 {
            return Err(Error::Parameter("reparametrisation factor must be nonzero".into()));
        }
        let inv = mu.inv();
        let coeffs = self
            .coeffs
            .iter()
            .map(|cs| {
                ComplexVector::new(
                    cs.iter()
                        .enumerate()
                        .map(|(i, a)| a * inv.powi(i as i32 + 1))
                        .collect(),
                )
            })
            .collect();
        Self::new(self.center.clone(), coeffs, self.radius * mu.norm())
    }

    /// Copy with a different radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(self.center.clone(), self.coeffs.clone(), radius)
    }
}

/// `φ(ζ) = P + ζX` on the unit disk.
pub fn make_linear_disk(p: &ComplexVector, x: &ComplexVector) -> Result<AnalyticDisk> {
    ensure_dim(p.dim(), x.dim())?;
    AnalyticDisk::from_degree_coeffs(p.clone(), std::slice::from_ref(x), 1.0)
}

/// `Φ(t) = (−δ + αt − α²t²/(8δ), βt)` on `|t| < 1/|β|`.
pub fn make_quad_disk(delta: f64, alpha: Complex64, beta: Complex64) -> Result<AnalyticDisk> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("delta must be > 0, got {delta}")));
    }
    if beta.norm() == 0.0 {
        return Err(Error::Parameter(
            "beta = 0 has no quadratic disk; use the lambda disk".into(),
        ));
    }
    let zero = Complex64::new(0.0, 0.0);
    let center = ComplexVector::from_re(&[-delta, 0.0]);
    let a1 = ComplexVector::new(vec![alpha, beta]);
    let a2 = ComplexVector::new(vec![-alpha * alpha / (8.0 * delta), zero]);
    AnalyticDisk::from_degree_coeffs(center, &[a1, a2], 1.0 / beta.norm())
}

/// `Φ(t) = (−δ + λαt, λβt + t²/2)` on the unit disk.
pub fn make_lambda_disk(
    delta: f64,
    alpha: Complex64,
    beta: Complex64,
    lambda: Complex64,
) -> Result<AnalyticDisk> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("delta must be > 0, got {delta}")));
    }
    if (lambda * alpha).norm() >= 0.5 || (lambda * beta).norm() >= 0.5 {
        return Err(Error::Parameter(format!(
            "need |λα|, |λβ| < 1/2 (got {}, {})",
            (lambda * alpha).norm(),
            (lambda * beta).norm()
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let center = ComplexVector::from_re(&[-delta, 0.0]);
    let a1 = ComplexVector::new(vec![lambda * alpha, lambda * beta]);
    let a2 = ComplexVector::new(vec![zero, Complex64::new(0.5, 0.0)]);
    AnalyticDisk::from_degree_coeffs(center, &[a1, a2], 1.0)
}

/// Result of [`certify_containment`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentCertificate {
    pub valid: bool,
    /// Minus the largest defining value seen at any sample.
    pub margin: f64,
    /// Initial polar grid `(radial, angular)`.
    pub grid: (usize, usize),
    /// Smallest `(−bound − required margin)` over the final cells.
    pub slack: f64,
    /// Number of cells examined, including refinements.
    pub cells: usize,
    /// Parameter `t` of the cell or sample attaining `slack`.
    pub worst_at: [f64; 2],
}

pub const DEFAULT_GRID: (usize, usize) = (64, 256);

const MAX_DEPTH: u32 = 40;
const MAX_CELLS_PER_SEED: usize = 200_000;
/// Default refinement budget of one certificate, in cells.
pub const DEFAULT_CELL_BUDGET: usize = 4_000_000;
/// Per-seed budget of the first refinement pass.
const FIRST_PASS_CELLS: usize = 64;


#[derive(Clone, Copy)]
struct Cell {
    s0: f64,
    s1: f64,
    a0: f64,
    a1: f64,
    depth: u32,
}

impl Cell {
    fn center(&self) -> Complex64 {
        Complex64::from_polar(0.5 * (self.s0 + self.s1), 0.5 * (self.a0 + self.a1))
    }

    fn circumradius(&self, c: Complex64) -> f64 {
        [
            (self.s0, self.a0),
            (self.s0, self.a1),
            (self.s1, self.a0),
            (self.s1, self.a1),
        ]
        .iter()
        .map(|&(s, a)| (Complex64::from_polar(s, a) - c).norm())
        .fold(0.0, f64::max)
    }

    fn split(&self) -> [Cell; 4] {
        let sm = 0.5 * (self.s0 + self.s1);
        let am = 0.5 * (self.a0 + self.a1);
        let d = self.depth + 1;
        [
            Cell { s0: self.s0, s1: sm, a0: self.a0, a1: am, depth: d },
            Cell { s0: self.s0, s1: sm, a0: am, a1: self.a1, depth: d },
            Cell { s0: sm, s1: self.s1, a0: self.a0, a1: am, depth: d },
            Cell { s0: sm, s1: self.s1, a0: am, a1: self.a1, depth: d },
        ]
    }
}

/// Taylor coefficients of one coordinate about `t0`: `out[m] = φ^{(m)}(t0)/m!`.
fn taylor_shift(c0: Complex64, cs: &[Complex64], t0: Complex64, out: &mut Vec<Complex64>) {
    out.clear();
    out.push(c0);
    out.extend_from_slice(cs);
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = out[j + 1];
            out[j] += t0 * next;
        }
    }
}

struct CellOutcome {
    worst_value: f64,
    slack: f64,
    at: Complex64,
    cells: usize,
    /// Stopped by the cell budget rather than by a violation or success.
    exhausted: bool,
}

fn refine_cell(
    disk: &AnalyticDisk,
    domain: &ModelDomain,
    margin: f64,
    root: Cell,
    budget: usize,
) -> CellOutcome {
    let n = disk.dim();
    let mut taylor: Vec<Vec<Complex64>> = vec![Vec::with_capacity(MAX_DEGREE + 1); n];
    let mut center = vec![Complex64::new(0.0, 0.0); n];
    let mut rho = vec![0.0; n];
    let mut worst_value = f64::NEG_INFINITY;
    let mut slack = f64::INFINITY;
    let mut at = root.center();
    let mut cells = 0;
    let mut exhausted = false;
    let mut stack = vec![root];
    let mut note = |s: f64, t: Complex64, slack: &mut f64| {
        if s < *slack {
            *slack = s;
            at = t;
        }
    };

    while let Some(cell) = stack.pop() {
        cells += 1;
        let tc = cell.center();
        let h = cell.circumradius(tc);
        for j in 0..n {
            taylor_shift(disk.center[j], &disk.coeffs[j], tc, &mut taylor[j]);
            center[j] = taylor[j][0];
            let mut hp = 1.0;
            let mut r = 0.0;
            for c in &taylor[j][1..] {
                hp *= h;
                r += c.norm() * hp;
            }
            rho[j] = r;
        }
        let v = domain.value(&center);
        worst_value = worst_value.max(v);
        if v > -margin {
            note(-v - margin, tc, &mut slack);
            break;
        }
        let bound = domain.sup_over_box(&center, &rho);
        let s = -bound - margin;
        if s > 0.0 {
            note(s, tc, &mut slack);
        } else if cell.depth >= MAX_DEPTH || cells >= budget {
            note(s, tc, &mut slack);
            exhausted = cells >= budget;
            break;
        } else {
            stack.extend(cell.split());
        }
    }
    CellOutcome {
        worst_value,
        slack,
        at,
        cells,
        exhausted,
    }
}

/// Certifies `φ(closed disk) ⊂ {r ≤ −margin}`.
///
/// The closed disk is cut into a polar grid; each cell is bounded by the
/// supremum of the defining function over a polydisk containing its image
/// (the Taylor expansion of `φ` at the cell centre bounds the image). Cells
/// whose bound is not below `−margin` are split until they certify, a sample
/// violates the margin, or the refinement budget runs out; the last two make
/// the certificate invalid.
pub fn certify_containment(
    disk: &AnalyticDisk,
    domain: &ModelDomain,
    radial_count: usize,
    angular_count: usize,
    margin: Margin,
) -> Result<ContainmentCertificate> {
    certify_containment_budgeted(disk, domain, radial_count, angular_count, margin, None)
}

/// [`certify_containment`] examining at most about `max_cells` cells
/// (default [`DEFAULT_CELL_BUDGET`]).
pub fn certify_containment_budgeted(
    disk: &AnalyticDisk,
    domain: &ModelDomain,
    radial_count: usize,
    angular_count: usize,
    margin: Margin,
    max_cells: Option<usize>,
) -> Result<ContainmentCertificate> {
    ensure_dim(domain.dim(), disk.dim())?;
    if radial_count < 8 || angular_count < 8 {
        return Err(Error::Parameter(format!(
            "grid counts must be >= 8, got {radial_count}x{angular_count}"
        )));
    }
    let m = margin.value();
    let grid = (radial_count, angular_count);
    let tau = std::f64::consts::TAU;
    let cells: Vec<Cell> = (0..radial_count)
        .flat_map(|i| {
            (0..angular_count).map(move |j| Cell {
                s0: disk.radius * i as f64 / radial_count as f64,
                s1: disk.radius * (i + 1) as f64 / radial_count as f64,
                a0: tau * j as f64 / angular_count as f64,
                a1: tau * (j + 1) as f64 / angular_count as f64,
                depth: 0,
            })
        })
        .collect();

    // Cheap pass over the grid samples first.
    let none = Complex64::new(f64::NAN, f64::NAN);
    let leftmost_max = |a: (f64, Complex64), b: (f64, Complex64)| if b.0 > a.0 { b } else { a };
    let (worst, at) = cells
        .par_iter()
        .map(|c| {
            let mut buf = vec![Complex64::new(0.0, 0.0); disk.dim()];
            let t = c.center();
            disk.eval_into(t, &mut buf);
            (domain.value(&buf), t)
        })
        .reduce(|| (f64::NEG_INFINITY, none), leftmost_max);
    if worst > -m {
        return Ok(ContainmentCertificate {
            valid: false,
            margin: -worst,
            grid,
            slack: -worst - m,
            cells: cells.len(),
            worst_at: [at.re, at.im],
        });
    }

    // Seeds are refined with a small cap first; the seeds that ran out are
    // retried from scratch with the unused budget split evenly among them.
    // The passes depend only on counts, so the outcome is deterministic.
    let total = max_cells.unwrap_or(DEFAULT_CELL_BUDGET);
    let mut used = 0;
    let mut per_seed = FIRST_PASS_CELLS;
    let mut pending = cells;
    let (mut worst, mut slack, mut at, mut count) = (f64::NEG_INFINITY, f64::INFINITY, none, 0);
    loop {
        let outcomes: Vec<(Cell, CellOutcome)> = pending
            .par_iter()
            .map(|&c| (c, refine_cell(disk, domain, m, c, per_seed)))
            .collect();
        let mut retry = Vec::new();
        let mut stuck = Vec::new();
        let mut violated = false;
        for (c, o) in outcomes {
            used += o.cells;
            count += o.cells;
            if o.exhausted {
                retry.push(c);
                stuck.push(o);
                continue;
            }
            violated |= o.slack <= 0.0;
            worst = worst.max(o.worst_value);
            if o.slack < slack {
                slack = o.slack;
                at = o.at;
            }
        }
        let next = if retry.is_empty() {
            0
        } else {
            (total.saturating_sub(used) / retry.len()).min(MAX_CELLS_PER_SEED)
        };
        if retry.is_empty() || violated || next <= per_seed {
            // a genuine violation is reported in preference to unresolved cells
            for o in stuck {
                worst = worst.max(o.worst_value);
                if !violated && o.slack < slack {
                    slack = o.slack;
                    at = o.at;
                }
            }
            break;
        }
        per_seed = next;
        pending = retry;
    }
    Ok(ContainmentCertificate {
        valid: slack > 0.0,
        margin: -worst,
        grid,
        slack,
        cells: count,
        worst_at: [at.re, at.im],
    })
}

/// [`certify_containment`] with the default grid and margin.
pub fn certify_default(disk: &AnalyticDisk, domain: &ModelDomain) -> Result<ContainmentCertificate> {
    certify_containment(disk, domain, DEFAULT_GRID.0, DEFAULT_GRID.1, Margin::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_disk_jet_and_eval() {
        let p = ComplexVector::from_re(&[-0.01, 0.0]);
        let x = ComplexVector::from_re(&[0.0, 1.0]);
        let d = make_linear_disk(&p, &x).unwrap();
        assert_eq!(d.eval(c(0.0, 0.0)).unwrap(), p);
        assert_eq!(d.jet_at_zero(), (p.clone(), x.clone()));
        assert_eq!(d.radius, 1.0);
        let z = d.eval(c(0.3, 0.2)).unwrap();
        assert_eq!(z, ComplexVector::new(vec![c(-0.01, 0.0), c(0.3, 0.2)]));
        let zero = make_linear_disk(&p, &ComplexVector::zeros(2)).unwrap();
        assert_eq!(zero.eval(c(0.7, 0.0)).unwrap(), p);
    }

    #[test]
    fn eval_outside_radius_is_error() {
        let d = make_quad_disk(0.04, c(0.2, 0.0), c(2.0, 0.0)).unwrap();
        assert!(matches!(d.eval(c(0.6, 0.0)), Err(Error::OutsideDisk { .. })));
    }

    #[test]
    fn quad_disk_jet_and_value() {
        let d = make_quad_disk(0.04, c(0.2, 0.0), c(1.0, 0.0)).unwrap();
        let (v, dv) = d.jet_at_zero();
        assert_eq!(v, ComplexVector::from_re(&[-0.04, 0.0]));
        assert_eq!(dv, ComplexVector::from_re(&[0.2, 1.0]));
        let z = d.eval(c(0.2, 0.0)).unwrap();
        assert!((z[0] - c(-0.005, 0.0)).norm() < 1e-15);
        assert!((z[1] - c(0.2, 0.0)).norm() < 1e-15);
        assert!(matches!(
            make_quad_disk(0.04, c(0.2, 0.0), c(0.0, 0.0)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn lambda_disk_preconditions() {
        assert!(make_lambda_disk(1e-4, c(1.0, 0.0), c(0.0, 0.0), c(0.6, 0.0)).is_err());
        let d = make_lambda_disk(1e-4, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        let z = d.eval(c(0.5, 0.0)).unwrap();
        assert_eq!(z[0], c(-1e-4, 0.0));
        assert_eq!(z[1], c(0.125, 0.0));
    }

    #[test]
    fn jet_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let by_degree: Vec<ComplexVector> = (0..5)
                .map(|_| {
                    ComplexVector::new(
                        (0..2).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
                    )
                })
                .collect();
            let d = AnalyticDisk::from_degree_coeffs(ComplexVector::zeros(2), &by_degree, 1.0)
                .unwrap();
            let h = 1e-6;
            let fd = &d.eval(c(h, 0.0)).unwrap() - &d.eval(c(-h, 0.0)).unwrap();
            let fd = fd.scale_re(0.5 / h);
            let (_, jet) = d.jet_at_zero();
            assert!(fd.distance(&jet) <= 1e-4 * jet.norm().max(1e-12));
        }
    }

    #[test]
    fn taylor_shift_reproduces_polynomial() {
        let cs = [c(1.0, 2.0), c(-0.5, 0.3), c(0.25, -1.0)];
        let c0 = c(0.1, -0.2);
        let t0 = c(0.3, 0.4);
        let mut out = Vec::new();
        taylor_shift(c0, &cs, t0, &mut out);
        let p = |t: Complex64| c0 + cs[0] * t + cs[1] * t * t + cs[2] * t * t * t;
        let h = c(0.05, -0.02);
        let shifted: Complex64 = out.iter().enumerate().map(|(m, a)| a * h.powi(m as i32)).sum();
        assert!((shifted - p(t0 + h)).norm() < 1e-14);
    }

    #[test]
    fn quad_disk_identity() {
        // (1/δ)(|g|² − Re f) at t = δ^{1/2}(x+iy)e^{−iθ}/|β|
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let delta = 10f64.powf(rng.gen_range(-4.0..-1.0));
            let cc = rng.gen_range(0.01..2.0 * 2f64.sqrt());
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let bmod = rng.gen_range(0.2..3.0);
            let beta = Complex64::from_polar(bmod, rng.gen_range(0.0..6.28));
            let alpha = Complex64::from_polar(cc * delta.sqrt() * bmod, theta);
            let d = make_quad_disk(delta, alpha, beta).unwrap();
            let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let t = Complex64::new(x, y) * delta.sqrt() * Complex64::from_polar(1.0, -theta) / bmod;
            if t.norm() >= d.radius {
                continue;
            }
            let z = d.eval(t).unwrap();
            let lhs = (z[1].norm_sqr() - z[0].re) / delta;
            let rhs = (1.0 + cc * cc / 8.0) * x * x - cc * x + (1.0 - cc * cc / 8.0) * y * y + 1.0;
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn center_outside_is_invalid() {
        let d = make_linear_disk(
            &ComplexVector::from_re(&[0.5, 0.0]),
            &ComplexVector::from_re(&[0.0, 0.1]),
        )
        .unwrap();
        let cert = certify_default(&d, &ModelDomain::HalfParab).unwrap();
        assert!(!cert.valid);
        assert!(cert.margin <= 0.0);
        assert!(cert.slack <= 0.0);
    }

    #[test]
    fn quad_disk_certifies_below_critical_ratio() {
        let delta = 0.04;
        let d = make_quad_disk(delta, c(0.2, 0.0), c(1.0, 0.0)).unwrap();
        // the rim |t| = 1/|β| touches |w| = 1, so certify a slightly smaller disk
        let d = d.with_radius(0.999).unwrap();
        let cert = certify_default(&d, &ModelDomain::HalfParab).unwrap();
        assert!(cert.valid, "{cert:?}");
        assert!(cert.slack > 0.0);
    }

    #[test]
    fn quad_disk_near_critical_ratio_stays_valid_when_refined() {
        // |z1| stays below δ + cδ^{1/2} + c²/8 < 1 on the disk
        let delta: f64 = 1e-3;
        let cc = 2.5;
        let alpha = c(cc * delta.sqrt(), 0.0);
        let d = make_quad_disk(delta, alpha, c(1.0, 0.0)).unwrap().with_radius(0.99).unwrap();
        let cert = certify_default(&d, &ModelDomain::HalfParab).unwrap();
        assert!(cert.valid, "{cert:?}");
        let fine = certify_containment(&d, &ModelDomain::HalfParab, 128, 512, Margin::default())
            .unwrap();
        assert!(fine.valid);
    }

    #[test]
    fn refinement_budget_is_bounded_and_deterministic() {
        // |z₂|² − |z₃|² cancels along this disk, which box bounds cannot see
        let domain = ModelDomain::geps(2.0, 2.0, 2.0, 3).unwrap();
        let p = domain.base_point(1e-3).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = ComplexVector::from_re(&[0.0, h, h]);
        let d = make_linear_disk(&p, &x).unwrap().with_radius(1.9).unwrap();
        let budget = 200_000;
        let run = || certify_containment_budgeted(&d, &domain, 16, 64, Margin::default(), Some(budget)).unwrap();
        let a = run();
        assert!(!a.valid);
        assert!(a.slack <= 0.0);
        assert!(a.cells <= budget + 16 * 64 * FIRST_PASS_CELLS, "{}", a.cells);
        assert_eq!(a, run());
        let small = d.with_radius(0.3).unwrap();
        assert!(certify_containment_budgeted(&small, &domain, 16, 64, Margin::default(), Some(budget)).unwrap().valid);
    }

    #[test]
    fn quad_disk_at_critical_ratio_fails() {
        // c = 2√2 makes the completed-square constant vanish: the disk touches
        // the boundary of {Re z < |w|²} and cannot clear a positive margin.
        let delta: f64 = 0.04;
        let alpha = c(2.0 * 2f64.sqrt() * delta.sqrt(), 0.0);
        let d = make_quad_disk(delta, alpha, c(1.0, 0.0)).unwrap().with_radius(0.99).unwrap();
        let cert = certify_default(&d, &ModelDomain::HalfParab).unwrap();
        assert!(!cert.valid, "{cert:?}");
    }

    #[test]
    fn lambda_disk_admissibility_threshold() {
        let delta: f64 = 1e-4;
        let alpha = c(1.0, 0.0);
        let beta = c(0.0, 0.0);
        let good = 0.99 * delta.powf(0.75) / 2f64.sqrt();
        let d = make_lambda_disk(delta, alpha, beta, c(good, 0.0)).unwrap();
        assert!(certify_default(&d, &ModelDomain::HalfParab).unwrap().valid);
        let bad = 2.0 * delta.powf(0.75) / 2f64.sqrt();
        let d = make_lambda_disk(delta, alpha, beta, c(bad, 0.0)).unwrap();
        assert!(!certify_default(&d, &ModelDomain::HalfParab).unwrap().valid);
    }

    #[test]
    fn prop_linear_disk_certifies_on_geps() {
        let delta: f64 = 1e-4;
        let c1 = 0.499;
        let p = ComplexVector::from_re(&[-delta, 0.0, 0.0]);
        let x = ComplexVector::from_re(&[c1 * delta.sqrt(), 1.0, 0.0]);
        let d = make_linear_disk(&p, &x).unwrap();
        let g = ModelDomain::geps(2.0, 2.0, 2.0, 3).unwrap();
        let cert = certify_default(&d, &g).unwrap();
        assert!(cert.valid, "{cert:?}");
    }

    #[test]
    fn small_grid_rejected() {
        let d = make_quad_disk(0.04, c(0.2, 0.0), c(1.0, 0.0)).unwrap();
        assert!(certify_containment(&d, &ModelDomain::HalfParab, 4, 256, Margin::default()).is_err());
    }

    #[test]
    fn disk_json_shape() {
        let d = make_quad_disk(0.04, c(0.2, 0.0), c(1.0, 0.0)).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["center"], serde_json::json!([[-0.04, 0.0], [0.0, 0.0]]));
        assert_eq!(v["coeffs"][0][0], serde_json::json!([0.2, 0.0]));
        assert_eq!(v["radius"], serde_json::json!(1.0));
        let back: AnalyticDisk = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
    }
}
