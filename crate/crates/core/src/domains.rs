//! Parametric model domains and their defining functions.
//!
//! Every domain is `{r < 0}` for a defining function `r` built as the maximum
//! of a few pieces, so "inside" means every piece is negative:
//!
//! | variant      | pieces                                                        |
//! |--------------|---------------------------------------------------------------|
//! | `UnitDisk`   | `|z|² − 1`                                                    |
//! | `Polydisk`   | `|z_j|² − r_j²`                                               |
//! | `Ball`       | `|z|² − r²`                                                   |
//! | `HalfParab`  | `Re z − |w|²`, `|z|² − 1`, `|w|² − 1`                          |
//! | `GEpsilon`   | `Re z₁ − |z₂|^m + max_j |z′_j|^k`, `|z|² − ε²`                  |
//! | `OmegaXi`    | `Re z − |w|^ξ − |Im z|^ξ`, `|z|² − 1`, `|w|² − 1`              |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_dim, Error, Result};
use crate::geometry::ComplexVector;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelDomain {
    UnitDisk,
    Polydisk { radii: Vec<f64> },
    Ball { dim: usize, radius: f64 },
    /// `{Re z < |w|²} ∩ 𝔻²`.
    HalfParab,
    /// `B(0, ε) ∩ {Re z₁ − |z₂|^m + |z′|^k < 0}` with the sup-norm on `z′`.
    GEpsilon { eps: f64, m: f64, k: f64, dim: usize },
    /// `{Re z < |w|^ξ + |Im z|^ξ} ∩ 𝔻²`.
    OmegaXi { xi: f64 },
}

/// Required clearance of the defining function below zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin(f64);

impl Margin {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::Parameter(format!("margin must be finite and >= 0, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Margin {
    fn default() -> Self {
        Self(1e-7)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

#[inline]
fn pw(x: f64, e: f64) -> f64 {
    if e == 2.0 {
        x * x
    } else if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

impl ModelDomain {
    pub fn polydisk(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Parameter(format!("polydisk radii must be > 0: {radii:?}")));
        }
        Ok(Self::Polydisk { radii })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Parameter(format!("ball needs n >= 1, r > 0 (n={dim}, r={radius})")));
        }
        Ok(Self::Ball { dim, radius })
    }

    pub fn geps(eps: f64, m: f64, k: f64, dim: usize) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Parameter(format!("eps must be > 0, got {eps}")));
        }
        if !(m.is_finite() && m >= 1.0) {
            return Err(Error::Parameter(format!("m must be >= 1, got {m}")));
        }
        if !(k > 0.0 && k <= m) {
            return Err(Error::Parameter(format!("k must lie in (0, m], got k={k}, m={m}")));
        }
        if dim < 2 {
            return Err(Error::Parameter(format!("n must be >= 2, got {dim}")));
        }
        Ok(Self::GEpsilon { eps, m, k, dim })
    }

    pub fn omega(xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 1.0) {
            return Err(Error::Parameter(format!("xi must be > 1, got {xi}")));
        }
        Ok(Self::OmegaXi { xi })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::UnitDisk => 1,
            Self::Polydisk { radii } => radii.len(),
            Self::Ball { dim, .. } | Self::GEpsilon { dim, .. } => *dim,
            Self::HalfParab | Self::OmegaXi { .. } => 2,
        }
    }

    /// Canonical interior point used for sampling and sanity checks.
    pub fn interior_point(&self) -> ComplexVector {
        let mut p = ComplexVector::zeros(self.dim());
        if matches!(self, Self::HalfParab | Self::GEpsilon { .. } | Self::OmegaXi { .. }) {
            p[0] = Complex64::new(-0.5, 0.0);
        }
        p
    }

    /// Radius of a ball about the origin containing the domain.
    pub fn outer_radius(&self) -> f64 {
        match self {
            Self::UnitDisk => 1.0,
            Self::Polydisk { radii } => radii.iter().map(|r| r * r).sum::<f64>().sqrt(),
            Self::Ball { radius, .. } => *radius,
            Self::GEpsilon { eps, .. } => *eps,
            Self::HalfParab | Self::OmegaXi { .. } => 2f64.sqrt(),
        }
    }

    /// `sup |z_j|` over the domain (an upper bound).
    pub fn coordinate_bound(&self, j: usize) -> f64 {
        match self {
            Self::Polydisk { radii } => radii[j],
            Self::Ball { radius, .. } => *radius,
            Self::GEpsilon { eps, .. } => *eps,
            Self::UnitDisk | Self::HalfParab | Self::OmegaXi { .. } => 1.0,
        }
    }

    /// Upper bound for `sup |⟨z − q, w⟩|` over the domain.
    pub fn functional_bound(&self, w: &[Complex64], q: &[Complex64]) -> f64 {
        let shift: Complex64 = q.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
        let box_bound: f64 = w
            .iter()
            .enumerate()
            .map(|(j, wj)| self.coordinate_bound(j) * wj.norm())
            .sum();
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        shift.norm() + box_bound.min(self.outer_radius() * wn)
    }

    /// If `p = (−δ, 0, …, 0)` with `δ > 0`, returns `δ`.
    pub fn base_delta(p: &[Complex64]) -> Option<f64> {
        let first = p.first()?;
        (first.im == 0.0 && first.re < 0.0 && p[1..].iter().all(|z| z.re == 0.0 && z.im == 0.0))
            .then_some(-first.re)
    }

    pub fn defining_value(&self, z: &[Complex64]) -> Result<f64> {
        ensure_dim(self.dim(), z.len())?;
        Ok(self.value(z))
    }

    /// Defining function without the dimension check.
    #[inline]
    pub fn value(&self, z: &[Complex64]) -> f64 {
        match self {
            Self::UnitDisk => z[0].norm_sqr() - 1.0,
            Self::Polydisk { radii } => z
                .iter()
                .zip(radii)
                .map(|(zj, r)| zj.norm_sqr() - r * r)
                .fold(f64::NEG_INFINITY, f64::max),
            Self::Ball { radius, .. } => {
                z.iter().map(|zj| zj.norm_sqr()).sum::<f64>() - radius * radius
            }
            Self::HalfParab => {
                let (a, b) = (z[0].norm_sqr(), z[1].norm_sqr());
                (z[0].re - b).max(a - 1.0).max(b - 1.0)
            }
            Self::GEpsilon { eps, m, k, .. } => {
                let q = z[2..].iter().map(|zj| zj.norm()).fold(0.0, f64::max);
                let q = if z.len() > 2 { pw(q, *k) } else { 0.0 };
                let main = z[0].re - pw(z[1].norm(), *m) + q;
                let ball = z.iter().map(|zj| zj.norm_sqr()).sum::<f64>() - eps * eps;
                main.max(ball)
            }
            Self::OmegaXi { xi } => {
                let (a, b) = (z[0].norm_sqr(), z[1].norm_sqr());
                let main = z[0].re - pw(b.sqrt(), *xi) - pw(z[0].im.abs(), *xi);
                main.max(a - 1.0).max(b - 1.0)
            }
        }
    }

    /// Upper bound of the defining function over the polydisk
    /// `{ζ : |ζ_j − c_j| ≤ ρ_j}`, computed piece by piece from the exact
    /// suprema of each term.
    pub fn sup_over_box(&self, c: &[Complex64], rho: &[f64]) -> f64 {
        let hi = |j: usize| c[j].norm() + rho[j];
        let lo = |j: usize| (c[j].norm() - rho[j]).max(0.0);
        match self {
            Self::UnitDisk => hi(0) * hi(0) - 1.0,
            Self::Polydisk { radii } => radii
                .iter()
                .enumerate()
                .map(|(j, r)| hi(j) * hi(j) - r * r)
                .fold(f64::NEG_INFINITY, f64::max),
            Self::Ball { radius, .. } => {
                (0..c.len()).map(|j| hi(j) * hi(j)).sum::<f64>() - radius * radius
            }
            Self::HalfParab => {
                let main = c[0].re + rho[0] - lo(1) * lo(1);
                main.max(hi(0) * hi(0) - 1.0).max(hi(1) * hi(1) - 1.0)
            }
            Self::GEpsilon { eps, m, k, .. } => {
                let q = (2..c.len()).map(hi).fold(0.0, f64::max);
                let q = if c.len() > 2 { pw(q, *k) } else { 0.0 };
                let main = c[0].re + rho[0] - pw(lo(1), *m) + q;
                let ball = (0..c.len()).map(|j| hi(j) * hi(j)).sum::<f64>() - eps * eps;
                main.max(ball)
            }
            Self::OmegaXi { xi } => {
                let im_lo = (c[0].im.abs() - rho[0]).max(0.0);
                let main = c[0].re + rho[0] - pw(lo(1), *xi) - pw(im_lo, *xi);
                main.max(hi(0) * hi(0) - 1.0).max(hi(1) * hi(1) - 1.0)
            }
        }
    }

    /// Inside iff `r ≤ −margin`, Boundary iff `|r| < margin`, else Outside.
    pub fn membership(&self, z: &[Complex64], margin: f64) -> Result<Membership> {
        let v = self.defining_value(z)?;
        Ok(if v <= -margin {
            Membership::Inside
        } else if v.abs() < margin {
            Membership::Boundary
        } else {
            Membership::Outside
        })
    }

    /// Lipschitz constant of the defining function on `{|z| ≤ region_radius}`
    /// from closed-form gradient bounds of each piece.
    pub fn lipschitz_bound(&self, region_radius: f64) -> Result<f64> {
        if !(region_radius > 0.0 && region_radius.is_finite()) {
            return Err(Error::Parameter(format!(
                "region radius must be > 0, got {region_radius}"
            )));
        }
        let r = region_radius;
        let grad_pow = |e: f64| e * pw(r, e - 1.0);
        Ok(match self {
            Self::UnitDisk | Self::Polydisk { .. } | Self::Ball { .. } => 2.0 * r,
            Self::HalfParab => (1.0 + 2.0 * r).max(2.0 * r),
            Self::GEpsilon { m, k, dim, .. } => {
                let mut main = 1.0 + grad_pow(*m);
                if *dim > 2 {
                    if *k < 1.0 {
                        return Err(Error::Configuration(format!(
                            "|z'|^k with k = {k} < 1 is not Lipschitz"
                        )));
                    }
                    main += grad_pow(*k);
                }
                main.max(2.0 * r)
            }
            Self::OmegaXi { xi } => (1.0 + 2.0 * grad_pow(*xi)).max(2.0 * r),
        })
    }

    /// `P_δ = (−δ, 0, …, 0)`, required to sit inside with margin `δ/2`.
    pub fn base_point(&self, delta: f64) -> Result<ComplexVector> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Parameter(format!("delta must be > 0, got {delta}")));
        }
        let mut p = ComplexVector::zeros(self.dim());
        p[0] = Complex64::new(-delta, 0.0);
        if self.membership(&p, delta / 2.0)? != Membership::Inside {
            return Err(Error::Geometry(format!(
                "base point (-{delta}, 0, ...) is not inside {self} with margin {}",
                delta / 2.0
            )));
        }
        Ok(p)
    }

    /// Distance from an interior `z` to the first boundary crossing along the
    /// real unit direction `dir`.
    pub fn exit_distance(&self, z: &[Complex64], dir: &[Complex64]) -> f64 {
        let r0 = self.value(z);
        if r0 >= 0.0 {
            return 0.0;
        }
        let znorm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let s_max = 2.0 * (self.outer_radius() + znorm);
        let start = match self.lipschitz_bound(s_max) {
            Ok(l) => (-r0 / l).min(s_max),
            Err(_) => s_max * 1e-12,
        };
        let mut buf = vec![Complex64::new(0.0, 0.0); z.len()];
        let mut at = |s: f64| {
            for ((b, zi), di) in buf.iter_mut().zip(z).zip(dir) {
                *b = zi + di * s;
            }
            self.value(&buf)
        };
        let mut lo = start;
        loop {
            let hi = (lo * 1.1).min(s_max);
            if at(hi) >= 0.0 {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if at(mid) >= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                return b;
            }
            if hi >= s_max {
                return s_max;
            }
            lo = hi;
        }
    }

    /// A boundary point hit by a random ray from the interior point.
    pub fn sample_boundary<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexVector {
        let c = self.interior_point();
        let dir = random_unit(self.dim(), rng);
        let s = self.exit_distance(&c, &dir);
        &c + &dir.scale_re(s)
    }

    /// Uniform rejection sample from the bounding coordinate box.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexVector {
        loop {
            let z = ComplexVector::new(
                (0..self.dim())
                    .map(|j| {
                        let b = self.coordinate_bound(j);
                        Complex64::new(rng.gen_range(-b..b), rng.gen_range(-b..b))
                    })
                    .collect(),
            );
            if self.value(&z) < 0.0 {
                return z;
            }
        }
    }
}

/// Gaussian direction normalised to the unit sphere.
pub fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    loop {
        let v = ComplexVector::new(
            (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

impl fmt::Display for ModelDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnitDisk => write!(f, "disk"),
            Self::Polydisk { radii } => {
                if radii.iter().all(|r| *r == radii[0]) {
                    write!(f, "polydisk:n={},r={}", radii.len(), radii[0])
                } else {
                    let rs: Vec<String> = radii.iter().map(|r| r.to_string()).collect();
                    write!(f, "polydisk:n={},r={}", radii.len(), rs.join(";"))
                }
            }
            Self::Ball { dim, radius } => write!(f, "ball:n={dim},r={radius}"),
            Self::HalfParab => write!(f, "g"),
            Self::GEpsilon { eps, m, k, dim } => write!(f, "geps:m={m},k={k},n={dim},eps={eps}"),
            Self::OmegaXi { xi } => write!(f, "omega:xi={xi}"),
        }
    }
}

impl FromStr for ModelDomain {
    type Err = Error;

    /// Parses `g`, `disk`, `polydisk:n=2,r=1`, `ball:n=2,r=1`,
    /// `geps:m=2,k=2,n=3,eps=2`, `omega:xi=2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let bad = |key: &str| Error::Parse {
            input: s.to_string(),
            key: key.to_string(),
        };
        let mut kv: Vec<(&str, &str)> = Vec::new();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad(part.trim()))?;
            kv.push((k.trim(), v.trim()));
        }
        let allowed: &[&str] = match name {
            "g" | "disk" => &[],
            "polydisk" | "ball" => &["n", "r"],
            "geps" => &["m", "k", "n", "eps"],
            "omega" => &["xi"],
            other => return Err(bad(other)),
        };
        for (k, _) in &kv {
            if !allowed.contains(k) {
                return Err(bad(k));
            }
        }
        let num = |key: &str, default: f64| -> Result<f64> {
            match kv.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => v.parse::<f64>().map_err(|_| bad(key)),
                None => Ok(default),
            }
        };
        let int = |key: &str, default: usize| -> Result<usize> {
            match kv.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => v.parse::<usize>().map_err(|_| bad(key)),
                None => Ok(default),
            }
        };
        match name {
            "g" => Ok(Self::HalfParab),
            "disk" => Ok(Self::UnitDisk),
            "polydisk" => {
                let n = int("n", 2)?;
                let radii = match kv.iter().find(|(k, _)| *k == "r") {
                    Some((_, v)) if v.contains(';') => v
                        .split(';')
                        .map(|x| x.trim().parse::<f64>().map_err(|_| bad("r")))
                        .collect::<Result<Vec<_>>>()?,
                    _ => vec![num("r", 1.0)?; n],
                };
                if radii.len() != n {
                    return Err(bad("r"));
                }
                Self::polydisk(radii)
            }
            "ball" => Self::ball(int("n", 2)?, num("r", 1.0)?),
            "geps" => Self::geps(num("eps", 2.0)?, num("m", 2.0)?, num("k", 2.0)?, int("n", 3)?),
            "omega" => Self::omega(num("xi", 2.0)?),
            _ => unreachable!(),
        }
    }
}

impl Serialize for ModelDomain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ModelDomain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn all_variants() -> Vec<ModelDomain> {
        vec![
            ModelDomain::UnitDisk,
            ModelDomain::polydisk(vec![1.0, 0.5]).unwrap(),
            ModelDomain::ball(2, 1.0).unwrap(),
            ModelDomain::HalfParab,
            ModelDomain::geps(2.0, 2.0, 2.0, 3).unwrap(),
            ModelDomain::geps(2.0, 4.0, 1.5, 3).unwrap(),
            ModelDomain::omega(2.0).unwrap(),
            ModelDomain::omega(1.5).unwrap(),
        ]
    }

    #[test]
    fn defining_value_examples() {
        let g = ModelDomain::HalfParab;
        assert_eq!(g.defining_value(&[c(-0.1, 0.0), c(0.0, 0.0)]).unwrap(), -0.1);
        let v = g.defining_value(&[c(0.04, 0.0), c(0.2, 0.0)]).unwrap();
        assert!(v.abs() < 1e-17);
        let om = ModelDomain::omega(2.0).unwrap();
        let v = om.defining_value(&[c(-0.01, 0.1), c(0.0, 0.0)]).unwrap();
        assert!((v + 0.02).abs() < 1e-15);
        assert!(matches!(
            g.defining_value(&[c(0.0, 0.0)]),
            Err(Error::Dimension { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn membership_examples() {
        let g = ModelDomain::HalfParab;
        assert_eq!(g.membership(&[c(-0.1, 0.0), c(0.0, 0.0)], 1e-6).unwrap(), Membership::Inside);
        assert_eq!(g.membership(&[c(0.04, 0.0), c(0.2, 0.0)], 1e-6).unwrap(), Membership::Boundary);
        let b = ModelDomain::ball(2, 1.0).unwrap();
        assert_eq!(b.membership(&[c(2.0, 0.0), c(0.0, 0.0)], 1e-6).unwrap(), Membership::Outside);
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(ModelDomain::HalfParab.lipschitz_bound(1.0).unwrap(), 3.0);
        assert_eq!(ModelDomain::UnitDisk.lipschitz_bound(1.0).unwrap(), 2.0);
        assert_eq!(ModelDomain::omega(2.0).unwrap().lipschitz_bound(1.0).unwrap(), 5.0);
        let bad = ModelDomain::geps(2.0, 2.0, 0.5, 3).unwrap();
        assert!(matches!(bad.lipschitz_bound(1.0), Err(Error::Configuration(_))));
        assert!(ModelDomain::HalfParab.lipschitz_bound(0.0).is_err());
    }

    #[test]
    fn base_point_examples() {
        let ge = ModelDomain::geps(2.0, 2.0, 2.0, 3).unwrap();
        assert_eq!(
            ge.base_point(1e-4).unwrap(),
            ComplexVector::from_re(&[-1e-4, 0.0, 0.0])
        );
        assert_eq!(
            ModelDomain::HalfParab.base_point(0.04).unwrap(),
            ComplexVector::from_re(&[-0.04, 0.0])
        );
        let om = ModelDomain::omega(2.0).unwrap();
        assert!(matches!(om.base_point(2.0), Err(Error::Geometry(_))));
    }

    #[test]
    fn base_point_has_half_delta_margin() {
        for d in all_variants() {
            for delta in [1e-2, 1e-3, 1e-5, 1e-8] {
                let p = d.base_point(delta).unwrap();
                assert_eq!(d.membership(&p, delta / 2.0).unwrap(), Membership::Inside, "{d}");
            }
        }
    }

    #[test]
    fn sign_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in all_variants() {
            let n = d.dim();
            for _ in 0..1000 {
                let z: Vec<Complex64> = (0..n)
                    .map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                    .collect();
                let v = d.defining_value(&z).unwrap();
                let m = d.membership(&z, 0.0).unwrap();
                assert_eq!(m == Membership::Inside, v <= 0.0);
                assert_eq!(m == Membership::Outside, v > 0.0);
            }
        }
    }

    #[test]
    fn lipschitz_soundness() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in all_variants() {
            let n = d.dim();
            for radius in [0.5, 1.0, 2.0] {
                let l = d.lipschitz_bound(radius).unwrap();
                for _ in 0..1000 {
                    let a = random_unit(n, &mut rng).scale_re(radius * rng.gen::<f64>());
                    let b = random_unit(n, &mut rng).scale_re(radius * rng.gen::<f64>());
                    let diff = (d.value(&a) - d.value(&b)).abs();
                    assert!(diff <= l * a.distance(&b) * (1.0 + 1e-12) + 1e-15, "{d}");
                }
            }
        }
    }

    #[test]
    fn box_bound_dominates_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in all_variants() {
            let n = d.dim();
            for _ in 0..200 {
                let center = random_unit(n, &mut rng).scale_re(rng.gen::<f64>());
                let rho: Vec<f64> = (0..n).map(|_| 0.1 * rng.gen::<f64>()).collect();
                let bound = d.sup_over_box(&center, &rho);
                for _ in 0..50 {
                    let z: Vec<Complex64> = (0..n)
                        .map(|j| {
                            let r = rho[j] * rng.gen::<f64>().sqrt();
                            let a = rng.gen_range(0.0..std::f64::consts::TAU);
                            center[j] + Complex64::from_polar(r, a)
                        })
                        .collect();
                    assert!(d.value(&z) <= bound + 1e-14, "{d}");
                }
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in ["g", "disk", "polydisk:n=2,r=1", "ball:n=2,r=1", "geps:m=2,k=2,n=3,eps=2", "omega:xi=2"] {
            let d: ModelDomain = s.parse().unwrap();
            assert_eq!(d.to_string().parse::<ModelDomain>().unwrap(), d);
        }
        assert_eq!("g".parse::<ModelDomain>().unwrap(), ModelDomain::HalfParab);
        assert_eq!(
            "geps:m=2,k=2,n=3,eps=2".parse::<ModelDomain>().unwrap(),
            ModelDomain::geps(2.0, 2.0, 2.0, 3).unwrap()
        );
    }

    #[test]
    fn parse_reports_offending_key() {
        match "ball:n=2,radius=1".parse::<ModelDomain>() {
            Err(Error::Parse { key, .. }) => assert_eq!(key, "radius"),
            other => panic!("{other:?}"),
        }
        match "omega:xi=abc".parse::<ModelDomain>() {
            Err(Error::Parse { key, .. }) => assert_eq!(key, "xi"),
            other => panic!("{other:?}"),
        }
        assert!("omega:xi=1".parse::<ModelDomain>().is_err());
        assert!("torus".parse::<ModelDomain>().is_err());
    }

    #[test]
    fn interior_points_are_inside() {
        for d in all_variants() {
            assert!(d.value(&d.interior_point()) < 0.0, "{d}");
        }
    }
}
