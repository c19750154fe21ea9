//! Complex-linear algebra and boundary frames.
//!
//! The hermitian product is conjugate-linear in its **first** argument:
//! `⟨X, Y⟩ = Σ conj(X_j) · Y_j`.

use std::fmt;
use std::ops::{Add, Deref, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domains::{Membership, ModelDomain};
use crate::error::{ensure_dim, Error, Result};
use crate::search::{compass_search, CompassOptions};

/// A point or tangent vector in complex n-space.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(components: Vec<Complex64>) -> Self {
        Self(components)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Builds a vector from real parts only.
    pub fn from_re(re: &[f64]) -> Self {
        Self(re.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Unit basis vector `e_j` in dimension `n`.
    pub fn basis(n: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[j] = Complex64::new(1.0, 0.0);
        v
    }

    /// Interleaved `[re_0, im_0, re_1, im_1, ...]` coordinates.
    pub fn from_real_coords(coords: &[f64]) -> Self {
        Self(
            coords
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn to_real_coords(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sup-norm `max_j |z_j|`.
    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_re(&self, c: f64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    /// `self / |self|`; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale_re(1.0 / n))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for ComplexVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

impl<'a> Add<&'a ComplexVector> for &'a ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a ComplexVector> for &'a ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<Complex64> for &ComplexVector {
    type Output = ComplexVector;
    fn mul(self, rhs: Complex64) -> ComplexVector {
        self.scale(rhs)
    }
}

impl fmt::Display for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{z}")?;
        }
        write!(f, ")")
    }
}

impl std::str::FromStr for ComplexVector {
    type Err = Error;

    /// Comma-separated complex literals such as `-1e-3, 0.5+0.2i, 3i`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.trim().is_empty() {
            return Ok(Self(Vec::new()));
        }
        s.split(',')
            .map(|t| {
                let t: String = t.chars().filter(|c| !c.is_whitespace()).collect();
                t.parse::<Complex64>().map_err(|_| Error::Parse {
                    input: s.to_string(),
                    key: t.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for ComplexVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(Self(
            pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

/// `⟨X, Y⟩ = Σ conj(X_j) Y_j`.
pub fn hermitian_inner(x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
    ensure_dim(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a.conj() * b).sum())
}

/// Nearest boundary point of a domain to an interior point, with the inward
/// unit normal there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFrame {
    pub foot: ComplexVector,
    pub inward_normal: ComplexVector,
    pub distance: f64,
    /// Gradient of the boundary distance at the query point.
    pub gradient: ComplexVector,
}

impl BoundaryFrame {
    /// Frame from an explicit foot and unit inward normal (no search).
    pub fn from_normal(foot: ComplexVector, inward_normal: ComplexVector, distance: f64) -> Self {
        Self {
            gradient: inward_normal.clone(),
            foot,
            inward_normal,
            distance,
        }
    }

    /// The point `foot + distance · inward_normal` this frame describes.
    pub fn query_point(&self) -> ComplexVector {
        &self.foot + &self.inward_normal.scale_re(self.distance)
    }
}

/// Splits `X` into its component along the inward normal and the remainder.
///
/// `normal_part = ⟨ν, X⟩`, `X = normal_part · ν + tangential_part`.
pub fn normal_decompose(
    frame: &BoundaryFrame,
    x: &ComplexVector,
) -> Result<(Complex64, ComplexVector)> {
    let nu = &frame.inward_normal;
    let normal_part = hermitian_inner(nu, x)?;
    let tangential = x - &nu.scale(normal_part);
    Ok((normal_part, tangential))
}

#[derive(Clone, Debug)]
pub struct FrameOptions {
    /// Coarse direction samples.
    pub samples: usize,
    /// Stop refining once the direction step falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl FrameOptions {
    pub fn for_dim(n: usize) -> Self {
        Self {
            samples: 10_000 * ((2 * n).saturating_sub(1) / 2).max(1),
            tolerance: 1e-9,
            max_iterations: 20_000,
        }
    }
}

/// Nearest boundary frame with default options.
pub fn nearest_boundary_frame(domain: &ModelDomain, z: &ComplexVector) -> Result<BoundaryFrame> {
    nearest_boundary_frame_with(domain, z, &FrameOptions::for_dim(domain.dim()))
}

/// Minimises the exit distance `s(v)` of the ray `z + s·v` over real unit
/// directions `v`: coarse quasi-random sampling of the sphere, then a compass
/// refinement of the best sample. Among several minimisers the refinement of
/// the best coarse sample is returned, so the foot may change with the
/// sampling density.
pub fn nearest_boundary_frame_with(
    domain: &ModelDomain,
    z: &ComplexVector,
    opts: &FrameOptions,
) -> Result<BoundaryFrame> {
    let n = domain.dim();
    ensure_dim(n, z.dim())?;
    if domain.membership(z, 0.0)? != Membership::Inside || domain.defining_value(z)? >= 0.0 {
        return Err(Error::Geometry(format!("{z} is not strictly inside {domain}")));
    }
    let real_dim = 2 * n;
    let exit = |dir: &[f64]| -> f64 {
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return f64::INFINITY;
        }
        let v: Vec<f64> = dir.iter().map(|x| x / norm).collect();
        domain.exit_distance(z, &ComplexVector::from_real_coords(&v))
    };

    let mut best_dir = vec![0.0; real_dim];
    let mut best = f64::INFINITY;
    for i in 0..opts.samples.max(1) {
        let dir = sphere_point(real_dim, i, opts.samples.max(1));
        let s = exit(&dir);
        if s < best {
            best = s;
            best_dir = dir;
        }
    }
    // Axis directions catch the symmetric cases exactly.
    for j in 0..real_dim {
        for sign in [1.0, -1.0] {
            let mut dir = vec![0.0; real_dim];
            dir[j] = sign;
            let s = exit(&dir);
            if s < best {
                best = s;
                best_dir = dir;
            }
        }
    }

    let copts = CompassOptions {
        initial_step: 0.05,
        tolerance: opts.tolerance,
        max_iterations: opts.max_iterations,
        ..CompassOptions::default()
    };
    let result = compass_search(&exit, &best_dir, &copts);
    let norm = result.x.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dir = ComplexVector::from_real_coords(
        &result.x.iter().map(|x| x / norm).collect::<Vec<_>>(),
    );
    let distance = result.value;
    let foot = z + &dir.scale_re(distance);
    if !result.converged {
        return Err(Error::Convergence {
            message: format!("boundary refinement stopped at step {:.3e}", result.final_step),
            best: Some(foot),
        });
    }
    let inward = dir.scale_re(-1.0);
    Ok(BoundaryFrame {
        gradient: inward.clone(),
        inward_normal: inward,
        foot,
        distance,
    })
}

/// Quasi-uniform point `i` of `count` on the unit sphere in `R^dim`.
///
/// Uses the Fibonacci lattice on the circle and the 2-sphere and a
/// golden-ratio Kronecker sequence pushed through the normal quantile map in
/// higher dimension.
pub fn sphere_point(dim: usize, i: usize, count: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    match dim {
        1 => vec![if i % 2 == 0 { 1.0 } else { -1.0 }],
        2 => {
            let a = 2.0 * PI * (i as f64 + 0.5) / count as f64;
            vec![a.cos(), a.sin()]
        }
        3 => fibonacci_sphere(i, count).to_vec(),
        _ => {
            let g = generalized_golden(dim);
            let mut v: Vec<f64> = (0..dim)
                .map(|k| {
                    let u = (0.5 + (i as f64 + 1.0) * g.powi(-(k as i32 + 1))).fract();
                    normal_quantile(u.clamp(1e-12, 1.0 - 1e-12))
                })
                .collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            v
        }
    }
}

/// Fibonacci lattice on the unit 2-sphere.
pub fn fibonacci_sphere(i: usize, count: usize) -> [f64; 3] {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
    [r * phi.cos(), r * phi.sin(), z]
}

// Root of x^(d+1) = x + 1.
fn generalized_golden(dim: usize) -> f64 {
    let mut x = 2.0_f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (dim as f64 + 1.0));
    }
    x
}

// Acklam's rational approximation (relative error below 1.2e-9).
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let plow = 0.02425;
    if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermitian_examples() {
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let e2 = [c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(hermitian_inner(&e1, &e2).unwrap(), c(0.0, 0.0));
        assert_eq!(hermitian_inner(&e1, &e1).unwrap(), c(1.0, 0.0));
        // conjugate-linear in the first slot
        let x = [c(0.0, 2.0), c(0.0, 0.0)];
        assert_eq!(hermitian_inner(&x, &e1).unwrap(), c(0.0, -2.0));
        assert_eq!(hermitian_inner(&e1, &x).unwrap(), c(0.0, 2.0));
    }

    #[test]
    fn hermitian_dimension_mismatch() {
        let err = hermitian_inner(&[c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 1, got: 2 }));
    }

    #[test]
    fn decompose_examples() {
        let frame = BoundaryFrame::from_normal(
            ComplexVector::zeros(2),
            ComplexVector::from_re(&[1.0, 0.0]),
            1.0,
        );
        let (np, tp) = normal_decompose(&frame, &ComplexVector::from_re(&[3.0, 4.0])).unwrap();
        assert_eq!(np, c(3.0, 0.0));
        assert_eq!(tp, ComplexVector::from_re(&[0.0, 4.0]));

        let (np, tp) = normal_decompose(&frame, &ComplexVector::from_re(&[0.0, 1.0])).unwrap();
        assert_eq!(np, c(0.0, 0.0));
        assert_eq!(tp, ComplexVector::from_re(&[0.0, 1.0]));

        let h = 0.5f64.sqrt();
        let frame = BoundaryFrame::from_normal(
            ComplexVector::zeros(2),
            ComplexVector::from_re(&[h, h]),
            1.0,
        );
        let (np, tp) = normal_decompose(&frame, &ComplexVector::from_re(&[1.0, 0.0])).unwrap();
        assert!((np - c(h, 0.0)).norm() < 1e-15);
        assert!(tp.distance(&ComplexVector::from_re(&[0.5, -0.5])) < 1e-15);
    }

    #[test]
    fn frame_ball() {
        let ball = ModelDomain::ball(2, 1.0).unwrap();
        let f = nearest_boundary_frame(&ball, &ComplexVector::from_re(&[0.5, 0.0])).unwrap();
        assert!((f.distance - 0.5).abs() < 1e-9);
        assert!(f.foot.distance(&ComplexVector::from_re(&[1.0, 0.0])) < 1e-6);
        assert!((f.inward_normal.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_half_parabolic() {
        let g = ModelDomain::HalfParab;
        let z = ComplexVector::from_re(&[-0.01, 0.0]);
        let f = nearest_boundary_frame(&g, &z).unwrap();
        assert!((f.distance - 0.01).abs() < 1e-9, "{}", f.distance);
        assert!(f.foot.norm() < 1e-6, "{}", f.foot);
        assert!((f.distance - z.distance(&f.foot)).abs() < 1e-9);
        assert!(f.query_point().distance(&z) < 1e-12);
    }

    #[test]
    fn frame_unit_disk() {
        let f = nearest_boundary_frame(&ModelDomain::UnitDisk, &ComplexVector::from_re(&[0.9]))
            .unwrap();
        assert!((f.distance - 0.1).abs() < 1e-9);
        assert!(f.foot.distance(&ComplexVector::from_re(&[1.0])) < 1e-9);
    }

    #[test]
    fn frame_rejects_outside_points() {
        let ball = ModelDomain::ball(2, 1.0).unwrap();
        for z in [[2.0, 0.0], [1.0, 0.0]] {
            let err = nearest_boundary_frame(&ball, &ComplexVector::from_re(&z)).unwrap_err();
            assert!(matches!(err, Error::Geometry(_)));
        }
    }

    #[test]
    fn frame_minimality_against_boundary_samples() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for domain in [ModelDomain::HalfParab, ModelDomain::omega(2.0).unwrap()] {
            let z = ComplexVector::from_re(&[-0.05, 0.1]);
            let f = nearest_boundary_frame(&domain, &z).unwrap();
            for _ in 0..1000 {
                let y = domain.sample_boundary(&mut rng);
                assert!(f.distance <= z.distance(&y) + 1e-12);
            }
        }
    }

    #[test]
    fn sphere_points_are_unit() {
        for dim in 1..7 {
            for i in 0..50 {
                let p = sphere_point(dim, i, 50);
                let n: f64 = p.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12, "dim {dim}");
            }
        }
    }

    fn cvec(n: usize) -> impl Strategy<Value = ComplexVector> {
        proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64), n)
            .prop_map(|v| ComplexVector::new(v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn decomposition_reconstructs(nu in cvec(3), x in cvec(3)) {
            prop_assume!(nu.norm() > 1e-3);
            let nu = nu.normalized().unwrap();
            let frame = BoundaryFrame::from_normal(ComplexVector::zeros(3), nu.clone(), 1.0);
            let (np, tp) = normal_decompose(&frame, &x).unwrap();
            let back = &nu.scale(np) + &tp;
            prop_assert!(back.distance(&x) < 1e-10);
            prop_assert!(hermitian_inner(&nu, &tp).unwrap().norm() < 1e-10);
        }

        #[test]
        fn hermitian_is_conjugate_symmetric(x in cvec(3), y in cvec(3)) {
            let a = hermitian_inner(&x, &y).unwrap();
            let b = hermitian_inner(&y, &x).unwrap();
            prop_assert!((a - b.conj()).norm() < 1e-9);
            let xx = hermitian_inner(&x, &x).unwrap();
            prop_assert!(xx.im.abs() < 1e-12 && xx.re >= 0.0);
        }
    }
}
