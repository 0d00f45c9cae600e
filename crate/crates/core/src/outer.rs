//! Outer functions from boundary log-modulus data, Poisson extensions, and
//! the analytic samplers consumed by the area-measure discretizations.
//!
//! The trapezoidal Herglotz sum over the grid midpoints `xi_j`,
//!
//! ```text
//! H(z) = (1/N) sum_j (xi_j + z) / (xi_j - z) h_j,
//! ```
//!
//! is evaluated in closed form. Expanding the kernel as
//! `1 + 2 sum_{r>=1} (z / xi_j)^r` and using `xi_j^N = -1`, the moments
//! `c_r = (1/N) sum_j h_j xi_j^-r` are antiperiodic with period `N`, so
//!
//! ```text
//! H(z) = c_0 + 2 (sum_{r=1}^{N-1} c_r z^r - c_0 z^N) / (1 + z^N).
//! ```
//!
//! The moments come from one FFT; each evaluation is then a Horner pass.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::boundary::GridFunction;
use crate::error::{Error, Result};
use crate::geometry::{dyadic_length, DiscPoint};

/// Something analytic on the open disc that can report its value and
/// derivative.
pub trait AnalyticSampler: Send + Sync {
    fn value(&self, z: Complex64) -> Result<Complex64>;
    fn derivative(&self, z: Complex64) -> Result<Complex64>;

    fn value_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.value(z)?, self.derivative(z)?))
    }
}

/// Something that can report `|E(z)|` anywhere in the disc.
pub trait Modulus: Send + Sync {
    /// Returns `|E(z)|` and whether `z` had to be moved to a nearby point
    /// where the evaluation is trustworthy.
    fn modulus_at(&self, z: &DiscPoint) -> (f64, bool);

    /// `Some(m)` when `|E| = m` everywhere, letting scans skip evaluation.
    fn constant(&self) -> Option<f64> {
        None
    }
}

/// `|E| = m` everywhere (including the degenerate `m = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantModulus(pub f64);

impl Modulus for ConstantModulus {
    fn modulus_at(&self, _z: &DiscPoint) -> (f64, bool) {
        (self.0, false)
    }

    fn constant(&self) -> Option<f64> {
        Some(self.0)
    }
}

/// Moments of a grid function for Herglotz evaluation.
#[derive(Debug, Clone)]
pub struct HerglotzTransform {
    depth: u32,
    /// `c_0, ..., c_{N-1}`.
    moments: Arc<Vec<Complex64>>,
}

impl HerglotzTransform {
    pub fn new(h: &GridFunction) -> Self {
        let n = h.len();
        // c_r = (1/N) sum_j h_j e^{-2 pi i r (j + 1/2)/N}
        //     = e^{-i pi r / N} * DFT(h)_r / N.
        let mut buf: Vec<Complex64> = h.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let fft = FftPlanner::new().plan_fft_forward(n);
        fft.process(&mut buf);
        let moments = buf
            .into_iter()
            .enumerate()
            .map(|(r, c)| {
                c * Complex64::from_polar(1.0 / n as f64, -TAU * 0.5 * r as f64 / n as f64)
            })
            .collect();
        HerglotzTransform {
            depth: h.depth(),
            moments: Arc::new(moments),
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `1 - 4/N`.
    pub fn validity_radius(&self) -> f64 {
        1.0 - 4.0 * dyadic_length(self.depth)
    }

    pub fn check(&self, z: Complex64) -> Result<()> {
        let limit = self.validity_radius();
        let modulus = z.norm();
        if modulus > limit * (1.0 + 1e-15) {
            return Err(Error::TooCloseToBoundary { modulus, limit });
        }
        Ok(())
    }

    /// `(H(z), H'(z))` without the validity check.
    pub fn eval_unchecked(&self, z: Complex64) -> (Complex64, Complex64) {
        let c = &self.moments;
        let n = c.len();
        // P(z) = sum_{r=1}^{N-1} c_r z^r, with P' by simultaneous Horner.
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for r in (1..n).rev() {
            dp = dp * z + p;
            p = p * z + c[r];
        }
        dp = dp * z + p;
        p *= z;
        let c0 = c[0];
        let zn1 = z.powu(n as u32 - 1);
        let zn = zn1 * z;
        let nf = n as f64;
        let denom = Complex64::new(1.0, 0.0) + zn;
        let num = p - c0 * zn;
        let dnum = dp - c0 * nf * zn1;
        let s = num / denom;
        let ds = (dnum * denom - num * nf * zn1) / (denom * denom);
        (c0 + 2.0 * s, 2.0 * ds)
    }

    pub fn eval(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        self.check(z)?;
        Ok(self.eval_unchecked(z))
    }

    /// `H` at `radius * xi_k` for every grid midpoint `xi_k`, by one FFT.
    pub fn ring(&self, radius: f64) -> Vec<Complex64> {
        let c = &self.moments;
        let n = c.len();
        let nf = n as f64;
        // sum_{r=0}^{N-1} a_r xi_k^r with a_r = c_r radius^r, xi_k = e^{2 pi i (k+1/2)/N}:
        // an inverse DFT of a_r e^{i pi r / N}.
        let mut buf: Vec<Complex64> = (0..n)
            .map(|r| {
                let a = if r == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c[r] * radius.powi(r as i32)
                };
                a * Complex64::from_polar(1.0, TAU * 0.5 * r as f64 / nf)
            })
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        // z^N = radius^N xi_k^N = -radius^N.
        let zn = -radius.powi(n as i32);
        let denom = 1.0 + zn;
        buf.into_iter()
            .map(|p| c[0] + 2.0 * (p - c[0] * zn) / denom)
            .collect()
    }
}

/// Deepest polar cell band at which derivatives of a depth-`depth`
/// transform are sampled. Its centres keep a gap of at least `16/N`; the
/// differentiated kernel is not resolved in the two bands nearer the
/// validity radius.
pub fn derivative_cell_depth(depth: u32) -> u32 {
    depth.saturating_sub(5)
}

/// `E(z) = exp(H(z))` with `H` the Herglotz integral of the log-modulus.
#[derive(Debug, Clone)]
pub struct OuterFunction {
    log_modulus: GridFunction,
    transform: HerglotzTransform,
}

impl OuterFunction {
    pub fn new(log_modulus: GridFunction) -> Self {
        let transform = HerglotzTransform::new(&log_modulus);
        OuterFunction {
            log_modulus,
            transform,
        }
    }

    /// `E` identically one on a grid of the given depth.
    pub fn one(depth: u32) -> Self {
        Self::new(GridFunction::zeros(depth))
    }

    pub fn log_modulus(&self) -> &GridFunction {
        &self.log_modulus
    }

    pub fn depth(&self) -> u32 {
        self.log_modulus.depth()
    }

    pub fn validity_radius(&self) -> f64 {
        self.transform.validity_radius()
    }

    pub fn transform(&self) -> &HerglotzTransform {
        &self.transform
    }

    pub fn eval(&self, z: &DiscPoint) -> Result<Complex64> {
        outer_eval(self, z)
    }

    /// Boundary modulus `exp(h_j)` on the grid.
    pub fn boundary_modulus(&self) -> Vec<f64> {
        self.log_modulus.values().iter().map(|v| v.exp()).collect()
    }

    /// `E` at `radius * xi_k` for the grid midpoints.
    pub fn ring_values(&self, radius: f64) -> Vec<Complex64> {
        self.transform
            .ring(radius)
            .into_iter()
            .map(|h| h.exp())
            .collect()
    }
}

pub fn outer_eval(e: &OuterFunction, z: &DiscPoint) -> Result<Complex64> {
    let (h, _) = e.transform.eval(z.to_complex())?;
    Ok(h.exp())
}

/// `E'(z) = E(z) H'(z)`.
pub fn outer_derivative(e: &OuterFunction, z: &DiscPoint) -> Result<Complex64> {
    let (h, dh) = e.transform.eval(z.to_complex())?;
    Ok(h.exp() * dh)
}

/// Poisson extension of `f` at `z`: the real part of its Herglotz integral.
pub fn poisson_extend(f: &GridFunction, z: &DiscPoint) -> Result<f64> {
    let (h, _) = HerglotzTransform::new(f).eval(z.to_complex())?;
    Ok(h.re)
}

/// Gradient `(du/dx, du/dy)` of the Poisson extension; for `u = Re H` with
/// `H` analytic this is `(Re H', -Im H')`.
pub fn poisson_gradient(f: &GridFunction, z: &DiscPoint) -> Result<[f64; 2]> {
    let (_, dh) = HerglotzTransform::new(f).eval(z.to_complex())?;
    Ok([dh.re, -dh.im])
}

impl AnalyticSampler for OuterFunction {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        let (h, _) = self.transform.eval(z)?;
        Ok(h.exp())
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let (h, dh) = self.transform.eval(z)?;
        Ok(h.exp() * dh)
    }

    fn value_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (h, dh) = self.transform.eval(z)?;
        let e = h.exp();
        Ok((e, e * dh))
    }
}

impl Modulus for OuterFunction {
    /// Points beyond the validity radius are pulled radially onto it.
    fn modulus_at(&self, z: &DiscPoint) -> (f64, bool) {
        let limit = self.validity_radius();
        let (p, moved) = if z.radius() > limit {
            (DiscPoint::from_polar(limit, z.angle()), true)
        } else {
            (*z, false)
        };
        let (h, _) = self.transform.eval_unchecked(p.to_complex());
        (h.re.exp(), moved)
    }
}

/// `sum_k a_k z^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial {
            coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_real(&[c])
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Polynomial { coeffs }
    }

    /// `sum_{k=1}^{terms} z^k / k`, a truncation of `-log(1 - z)`.
    pub fn log_series(terms: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); terms + 1];
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            *c = Complex64::new(1.0 / k as f64, 0.0);
        }
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (k, &c)| {
                acc * z + c * k as f64
            })
    }
}

impl AnalyticSampler for Polynomial {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval(z))
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_derivative(z))
    }
}

/// `rotation * prod_k (z - a_k) / (1 - conj(a_k) z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    pub zeros: Vec<Complex64>,
    pub rotation: Complex64,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>) -> Result<Self> {
        if let Some(a) = zeros.iter().find(|a| a.norm() >= 1.0) {
            return Err(Error::Invalid(format!(
                "Blaschke zero {a} outside the disc"
            )));
        }
        Ok(BlaschkeProduct {
            zeros,
            rotation: Complex64::new(1.0, 0.0),
        })
    }
}

impl AnalyticSampler for BlaschkeProduct {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.value_and_derivative(z)?.0)
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.value_and_derivative(z)?.1)
    }

    /// Logarithmic derivative: `B'/B = sum_k (1 - |a_k|^2) / ((z - a_k)(1 - conj(a_k) z))`.
    fn value_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let one = Complex64::new(1.0, 0.0);
        let mut value = self.rotation;
        let mut deriv = Complex64::new(0.0, 0.0);
        for &a in &self.zeros {
            let num = z - a;
            let den = one - a.conj() * z;
            let f = num / den;
            let df = (one - a.norm_sqr()) / (den * den);
            deriv = deriv * f + value * df;
            value *= f;
        }
        Ok((value, deriv))
    }
}

/// `-log(1 - z)`: the full logarithmic series, not a truncation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogSymbol;

impl AnalyticSampler for LogSymbol {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(-(Complex64::new(1.0, 0.0) - z).ln())
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok((Complex64::new(1.0, 0.0) - z).inv())
    }
}

/// Pointwise product of samplers.
pub struct Product(pub Vec<Box<dyn AnalyticSampler>>);

impl AnalyticSampler for Product {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.value_and_derivative(z)?.0)
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.value_and_derivative(z)?.1)
    }

    fn value_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let mut value = Complex64::new(1.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for f in &self.0 {
            let (v, d) = f.value_and_derivative(z)?;
            deriv = deriv * v + value * d;
            value *= v;
        }
        Ok((value, deriv))
    }
}

/// `z^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial(pub u32);

impl AnalyticSampler for Monomial {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(z.powu(self.0))
    }

    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(if self.0 == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            z.powu(self.0 - 1) * self.0 as f64
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_herglotz(h: &GridFunction, z: Complex64) -> Complex64 {
        let n = h.len();
        (0..n)
            .map(|j| {
                let xi = Complex64::from_polar(1.0, TAU * h.midpoint(j));
                (xi + z) / (xi - z) * h.values()[j]
            })
            .sum::<Complex64>()
            / n as f64
    }

    fn wiggly(depth: u32) -> GridFunction {
        GridFunction::from_fn(depth, |t| {
            (TAU * t).sin() - 0.3 * (TAU * 5.0 * t).cos() + if t < 0.3 { 0.7 } else { 0.0 }
        })
        .unwrap()
    }

    #[test]
    fn closed_form_matches_direct_sum() {
        let h = wiggly(8);
        let t = HerglotzTransform::new(&h);
        for &z in &[
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, 0.4),
            Complex64::from_polar(0.98, 2.0),
        ] {
            let (a, _) = t.eval(z).unwrap();
            let b = direct_herglotz(&h, z);
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn ring_matches_pointwise() {
        let h = wiggly(7);
        let t = HerglotzTransform::new(&h);
        let r = 0.93;
        let ring = t.ring(r);
        for k in [0usize, 5, 64, 127] {
            let z = Complex64::from_polar(r, TAU * h.midpoint(k));
            assert!((ring[k] - t.eval_unchecked(z).0).norm() < 1e-11);
        }
    }

    #[test]
    fn constant_log_modulus() {
        let e = OuterFunction::new(GridFunction::constant(10, 0.7));
        let v = e
            .eval(&DiscPoint::from_complex(Complex64::new(0.3, 0.4)))
            .unwrap();
        assert!((v - Complex64::new(0.7f64.exp(), 0.0)).norm() < 1e-12);
        let zero = OuterFunction::one(6);
        assert!((zero.eval(&DiscPoint::from_polar(0.5, 0.2)).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn validity_zone() {
        let e = OuterFunction::one(4);
        let err = e.eval(&DiscPoint::from_polar(0.9, 0.0));
        assert!(matches!(err, Err(Error::TooCloseToBoundary { .. })));
        assert!(e.eval(&DiscPoint::from_polar(0.75, 0.0)).is_ok());
    }

    #[test]
    fn cosine_extension() {
        let f = GridFunction::from_fn(10, |t| (TAU * t).cos()).unwrap();
        let z = DiscPoint::from_complex(Complex64::new(0.2, -0.5));
        assert!((poisson_extend(&f, &z).unwrap() - 0.2).abs() < 1e-12);
        let g = poisson_gradient(&f, &z).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn blaschke_derivative_matches_difference() {
        let b = BlaschkeProduct::new(vec![Complex64::new(0.5, 0.1), Complex64::new(-0.2, 0.6)])
            .unwrap();
        let z = Complex64::new(0.3, -0.2);
        let h = 1e-6;
        let fd = (b.value(z + h).unwrap() - b.value(z - h).unwrap()) / (2.0 * h);
        assert!((fd - b.derivative(z).unwrap()).norm() < 1e-6);
        assert!((b.value(Complex64::from_polar(1.0, 0.7)).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_derivative() {
        let p = Polynomial::from_real(&[1.0, -2.0, 0.5, 3.0]);
        let z = Complex64::new(0.4, 0.1);
        let expect = Complex64::new(-2.0, 0.0) + z * 1.0 + z * z * 9.0;
        assert!((p.eval_derivative(z) - expect).norm() < 1e-14);
    }
}
