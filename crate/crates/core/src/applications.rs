//! End-to-end demos: taming a bounded function into VMO, flattening an
//! unbounded one, and Volterra-type seminorm scans.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{oscillation_modulus, GridFunction, ScaleValue};
use crate::error::{Error, Result};
use crate::measure::{carleson_profile, cell_measure, EpsSchedule, PointMassMeasure};
use crate::outer::{
    derivative_cell_depth, AnalyticSampler, ConstantModulus, HerglotzTransform, LogSymbol, Modulus,
    OuterFunction, Polynomial,
};
use crate::taming::{construct_a, ConstructionA};

/// `|grad P f|^2 (1 - |z|^2) dA` on the polar cell grid.
pub fn gradient_measure(f: &GridFunction) -> Result<PointMassMeasure> {
    let transform = HerglotzTransform::new(f);
    cell_measure(derivative_cell_depth(f.depth()), |p| {
        let (_, dh) = transform.eval(p.to_complex())?;
        Ok(dh.norm_sqr())
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WolffReport {
    pub construction: ConstructionA,
    /// Oscillation modulus of `E f` on the boundary grid.
    pub modulus: Vec<ScaleValue>,
    /// Oscillation modulus of `f` alone, for comparison.
    pub modulus_without: Vec<ScaleValue>,
    /// Largest change of the boundary phase proxy between depths `D` and
    /// `D + 1`, in radians.
    pub phase_proxy_error: f64,
}

impl WolffReport {
    pub fn outer(&self) -> &OuterFunction {
        self.construction.outer()
    }

    pub fn modulus_at(&self, level: u32) -> Option<f64> {
        self.modulus
            .iter()
            .find(|s| s.level == level)
            .map(|s| s.value)
    }
}

/// Builds `E` from the gradient measure of `f` and reports the oscillation
/// of `E f`, whose boundary phase is read off at radius `1 - 4/N`.
pub fn wolff_tame(f: &GridFunction, eps: &EpsSchedule) -> Result<WolffReport> {
    let depth = f.depth();
    let mu = gradient_measure(f)?;
    let construction = construct_a(&mu, eps, depth)?;
    let e = construction.outer();
    let phase = boundary_phase(e.log_modulus());
    let fine = boundary_phase(&refine(e.log_modulus())?);
    let phase_proxy_error = phase
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let q = 0.5 * (fine[2 * j] + fine[2 * j + 1]);
            (p - q).abs()
        })
        .fold(0.0, f64::max);
    let product: Vec<Complex64> = e
        .log_modulus()
        .values()
        .iter()
        .zip(&phase)
        .zip(f.values())
        .map(|((h, t), v)| Complex64::from_polar(h.exp(), *t) * v)
        .collect();
    let modulus = oscillation_modulus(depth, &product);
    let modulus_without = oscillation_modulus(depth, f.values());
    Ok(WolffReport {
        construction,
        modulus,
        modulus_without,
        phase_proxy_error,
    })
}

/// `Im H` at radius `1 - 4/N` for the grid midpoints.
fn boundary_phase(log_modulus: &GridFunction) -> Vec<f64> {
    let t = HerglotzTransform::new(log_modulus);
    t.ring(t.validity_radius())
        .into_iter()
        .map(|h| h.im)
        .collect()
}

/// The same step function on a grid one level finer.
fn refine(f: &GridFunction) -> Result<GridFunction> {
    let values = f.values().iter().flat_map(|&v| [v, v]).collect();
    GridFunction::new(f.depth() + 1, values)
}

#[derive(Debug, Clone)]
pub struct Flattening {
    pub outer: OuterFunction,
    /// `|E0 f|` at the grid nodes.
    pub product: Vec<f64>,
    /// Nodes where `|E0 f| > min(1, |f|)` beyond rounding.
    pub violations: usize,
}

impl Flattening {
    pub fn sup(&self) -> f64 {
        self.product.iter().copied().fold(0.0, f64::max)
    }
}

/// The outer function with boundary log-modulus `-log+ |f|`.
pub fn lp_flatten(depth: u32, samples: &[f64]) -> Result<Flattening> {
    if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample {
            point: format!("grid node {k}"),
        });
    }
    let log_plus: Vec<f64> = samples.iter().map(|v| -v.abs().ln().max(0.0)).collect();
    let outer = OuterFunction::new(GridFunction::new(depth, log_plus)?);
    let product: Vec<f64> = outer
        .log_modulus()
        .values()
        .iter()
        .zip(samples)
        .map(|(h, v)| h.exp() * v.abs())
        .collect();
    let violations = product
        .iter()
        .zip(samples)
        .filter(|(p, v)| **p > v.abs().min(1.0) * (1.0 + 1e-12))
        .count();
    Ok(Flattening {
        outer,
        product,
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraEntry {
    pub n: u32,
    /// `max |E H z^n|` over the cell centres.
    pub sup_norm_est: f64,
    /// Square root of `sup_Q (1/l(Q)) int_Q |k_n G'|^2 (1 - |z|^2) dA`.
    pub seminorm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraReport {
    pub symbol: String,
    pub max_level: u32,
    pub entries: Vec<VolterraEntry>,
    /// Seminorms of `T_G(z^N)` for the symbol `-log(1 - z)`.
    pub probe: Vec<VolterraEntry>,
}

/// For `k_n = E H z^n`, the Carleson-type seminorm of `T_G(k_n)`, whose
/// derivative is `k_n G'`.
pub fn volterra_demo(
    symbol: &str,
    g: &dyn AnalyticSampler,
    e: &dyn Modulus,
    h: &dyn AnalyticSampler,
    n_list: &[u32],
    max_level: u32,
) -> Result<VolterraReport> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("n list must be strictly increasing".into()));
    }
    let entries = n_list
        .iter()
        .map(|&n| volterra_entry(g, e, h, n, max_level))
        .collect::<Result<Vec<_>>>()?;
    let probe = n_list
        .iter()
        .map(|&n| {
            volterra_entry(
                &LogSymbol,
                &ConstantModulus(1.0),
                &Polynomial::constant(1.0),
                n,
                max_level,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VolterraReport {
        symbol: symbol.to_string(),
        max_level,
        entries,
        probe,
    })
}

fn volterra_entry(
    g: &dyn AnalyticSampler,
    e: &dyn Modulus,
    h: &dyn AnalyticSampler,
    n: u32,
    max_level: u32,
) -> Result<VolterraEntry> {
    let sup = std::sync::Mutex::new(0.0f64);
    let measure = cell_measure(max_level, |p| {
        let z = p.to_complex();
        let k = e.modulus_at(&p).0 * h.value(z)?.norm() * p.radius().powi(n as i32);
        {
            let mut s = sup.lock().expect("poisoned");
            *s = s.max(k);
        }
        Ok((k * g.derivative(z)?.norm()).powi(2))
    })?;
    let profile = carleson_profile(&measure, max_level);
    Ok(VolterraEntry {
        n,
        sup_norm_est: sup.into_inner().expect("poisoned"),
        seminorm: profile.dyadic_constant.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outer::Monomial;

    #[test]
    fn constant_is_untouched() {
        let f = GridFunction::constant(10, 0.7);
        let r = wolff_tame(&f, &EpsSchedule::preset("geometric", 0.0).unwrap()).unwrap();
        assert!(r.outer().log_modulus().values().iter().all(|&v| v == 0.0));
        assert!(r.modulus.iter().all(|s| s.value < 1e-12));
    }

    #[test]
    fn flatten_constant_e() {
        let r = lp_flatten(6, &vec![std::f64::consts::E; 64]).unwrap();
        assert!(r.product.iter().all(|p| (p - 1.0).abs() < 1e-15));
        let small = lp_flatten(6, &vec![-0.5; 64]).unwrap();
        assert!(small.outer.log_modulus().values().iter().all(|&v| v == 0.0));
        assert!(lp_flatten(2, &[1.0, f64::INFINITY, 0.0, 0.0]).is_err());
    }

    #[test]
    fn constant_symbol_is_zero() {
        let r = volterra_demo(
            "const",
            &Polynomial::constant(3.0),
            &ConstantModulus(1.0),
            &Polynomial::constant(1.0),
            &[0, 2],
            6,
        )
        .unwrap();
        assert!(r.entries.iter().all(|e| e.seminorm == 0.0));
    }

    #[test]
    fn identity_symbol_half() {
        let e = volterra_entry(
            &Monomial(1),
            &ConstantModulus(1.0),
            &Polynomial::constant(1.0),
            0,
            12,
        )
        .unwrap();
        assert!((e.seminorm.powi(2) - 0.5).abs() < 1e-6, "{}", e.seminorm);
    }
}
