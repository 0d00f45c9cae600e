//! Weighted profiles `|E| mu`, the heavy-square probe, the hyperbolic BMO
//! check for self-maps, and the sharpness experiments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{bmo_seminorm, GridFunction};
use crate::error::{Error, Result};
use crate::geometry::{dyadic_length, CarlesonSquare, DyadicArc};
use crate::measure::{
    carleson_profile, cell_measure, profile_of_index, MeasureIndex, PointMassMeasure,
};
use crate::outer::{AnalyticSampler, Modulus};
use crate::taming::{VanishingCertificate, VANISHING_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEntry {
    pub level: u32,
    pub scale: f64,
    /// `max_Q (|E| mu)(Q) / l(Q)`.
    pub weighted: f64,
    /// `max_Q mu(Q) / l(Q)`.
    pub unweighted: f64,
    /// Bound implied by a construction certificate, where one applies.
    pub certified_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedProfileReport {
    pub entries: Vec<WeightedEntry>,
    pub deepest_certified_level: Option<u32>,
    /// Atoms whose modulus was taken at the validity radius.
    pub clamped_atoms: usize,
}

impl WeightedProfileReport {
    /// Attaches per-level bounds from a construction: at a level covered by
    /// bands of both parts with no violating square, interior ones included,
    /// `(|E| mu)(Q) <= 1.5 (eps_1 + eps_2) l(Q)`.
    pub fn with_certificate(mut self, cert: &VanishingCertificate) -> Self {
        let mut deepest = None;
        for e in &mut self.entries {
            let mut total = 0.0;
            let mut covered = true;
            for part in [1u8, 2] {
                let band = cert
                    .bands
                    .iter()
                    .find(|b| b.part == part && (b.top_level..=b.bottom_level).contains(&e.level));
                match band {
                    Some(b) if b.violations == 0 && b.interior_violations == 0 => {
                        total += VANISHING_SLACK * b.threshold
                    }
                    _ => covered = false,
                }
            }
            if covered {
                e.certified_bound = Some(total);
                deepest = Some(e.level);
            }
        }
        self.deepest_certified_level = deepest;
        self
    }

    pub fn weighted_at(&self, level: u32) -> f64 {
        self.entries.get(level as usize).map_or(0.0, |e| e.weighted)
    }
}

/// Reweights every atom by `|E(atom)|` and scans the dyadic profile.
pub fn weighted_profile(
    e: &dyn Modulus,
    mu: &PointMassMeasure,
    max_level: u32,
) -> WeightedProfileReport {
    let base = carleson_profile(mu, max_level);
    let (weighted, clamped) = weighted_measure(e, mu);
    let profile = carleson_profile(&weighted, max_level);
    let entries = profile
        .entries
        .iter()
        .zip(&base.entries)
        .map(|(w, u)| WeightedEntry {
            level: w.level,
            scale: w.scale,
            weighted: w.max_ratio,
            unweighted: u.max_ratio,
            certified_bound: None,
        })
        .collect();
    WeightedProfileReport {
        entries,
        deepest_certified_level: None,
        clamped_atoms: clamped,
    }
}

/// `|E| mu` and the number of atoms evaluated at a moved point.
pub fn weighted_measure(e: &dyn Modulus, mu: &PointMassMeasure) -> (PointMassMeasure, usize) {
    if let Some(m) = e.constant() {
        return (mu.reweighted(|_| m), 0);
    }
    let clamped = std::sync::atomic::AtomicUsize::new(0);
    let w = mu.reweighted(|a| {
        let (m, moved) = e.modulus_at(&a.point);
        if moved {
            clamped.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
        m
    });
    (w, clamped.into_inner())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub level: u32,
    pub scale: f64,
    /// Number of squares with `mu(Q) >= eps l(Q)` at this level.
    pub squares: usize,
    /// `max |E(z_Q)|` over those squares.
    pub max_modulus: f64,
}

/// Per level, the largest `|E(z_Q)|` over the dyadic squares with
/// `mu(Q) >= eps l(Q)`; levels without such squares are omitted.
pub fn heavy_square_probe(
    e: &dyn Modulus,
    mu: &PointMassMeasure,
    eps: f64,
    max_level: u32,
) -> Vec<ProbeEntry> {
    let index = MeasureIndex::new(mu);
    (0..=max_level)
        .filter_map(|level| {
            let scale = dyadic_length(level);
            let heavy: Vec<u64> = index
                .level_masses(level)
                .into_iter()
                .filter(|&(_, m)| m >= eps * scale)
                .map(|(i, _)| i)
                .collect();
            if heavy.is_empty() {
                return None;
            }
            let max_modulus = heavy
                .iter()
                .map(|&i| {
                    let z = CarlesonSquare::over(DyadicArc { level, index: i }).point();
                    e.modulus_at(&z).0
                })
                .fold(0.0, f64::max);
            Some(ProbeEntry {
                level,
                scale,
                squares: heavy.len(),
                max_modulus,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicReport {
    /// Dyadic Carleson constant of the discretized
    /// `|F'|^2 (1 - |z|^2) / (1 - |F|^2)^2 dA`.
    pub carleson_constant: f64,
    /// Radius of the ring carrying the boundary proxy of `u`.
    pub ring_radius: f64,
    /// `max u` on the ring.
    pub u_max: f64,
    /// Oscillation seminorm of `u = -log(1 - |F|^2)` on the ring.
    pub u_bmo: f64,
}

/// Carleson constant of the hyperbolic derivative measure of a self-map
/// `F`, paired with the oscillation of `-log(1 - |F|^2)` on the ring
/// `|z| = 1 - 2^-(max_level - 1)` sampled at `2^max_level` angles.
pub fn hyperbolic_check(f: &dyn AnalyticSampler, max_level: u32) -> Result<HyperbolicReport> {
    assert!(max_level >= 2);
    let measure = cell_measure(max_level, |p| {
        let (v, d) = f.value_and_derivative(p.to_complex())?;
        let m = v.norm();
        if m >= 1.0 {
            return Err(Error::NotSelfMap { modulus: m });
        }
        let q = 1.0 - m * m;
        Ok(d.norm_sqr() / (q * q))
    })?;
    let profile = carleson_profile(&measure, max_level);
    let ring_radius = 1.0 - dyadic_length(max_level - 1);
    let n = 1usize << max_level;
    let mut u = Vec::with_capacity(n);
    for j in 0..n {
        let z = Complex64::from_polar(
            ring_radius,
            std::f64::consts::TAU * (j as f64 + 0.5) / n as f64,
        );
        let m = f.value(z)?.norm();
        if m >= 1.0 {
            return Err(Error::NotSelfMap { modulus: m });
        }
        u.push(-(1.0 - m * m).ln());
    }
    let u = GridFunction::new(max_level, u)?;
    Ok(HyperbolicReport {
        carleson_constant: profile.dyadic_constant,
        ring_radius,
        u_max: u.max(),
        u_bmo: bmo_seminorm(&u, u.cell()),
    })
}

/// Modulus of continuity `omega` in the sharpness experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Omega {
    /// `t^alpha`.
    Power { alpha: f64 },
    /// Piecewise-linear through `(t, omega(t))` pairs sorted by `t`; the
    /// first pair must be `(0, 0)`.
    Table { points: Vec<(f64, f64)> },
    /// `omega = c`; never valid, kept to exhibit the failed precondition.
    Constant { value: f64 },
}

impl Omega {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Omega::Power { alpha } => t.powf(*alpha),
            Omega::Constant { value } => *value,
            Omega::Table { points } => {
                let k = points.partition_point(|p| p.0 <= t);
                if k == 0 {
                    return points[0].1;
                }
                if k == points.len() {
                    return points[k - 1].1;
                }
                let (a, b) = (points[k - 1], points[k]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }

    /// `omega(0) = 0` and strictly increasing.
    pub fn validate(&self) -> Result<()> {
        match self {
            Omega::Power { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::SpecViolation(format!(
                        "omega = t^{alpha} needs alpha > 0"
                    )));
                }
            }
            Omega::Constant { value } => {
                return Err(Error::SpecViolation(format!(
                    "omega(0) = {value} but omega must vanish at 0 and increase"
                )));
            }
            Omega::Table { points } => {
                if points.len() < 2 || points[0] != (0.0, 0.0) {
                    return Err(Error::SpecViolation(
                        "omega table must start at (0, 0) and have at least two points".into(),
                    ));
                }
                if points
                    .windows(2)
                    .any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1))
                {
                    return Err(Error::SpecViolation(
                        "omega table must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupRing {
    pub k: u32,
    /// Distance `h_k` of the ring to the circle.
    pub height: f64,
    /// Number of equally spaced atoms, `1 / delta_k`.
    pub atoms: u64,
}

impl BlowupRing {
    /// Dyadic level `log2(1/h_k)` when `h_k` is a power of two.
    pub fn level(&self) -> Option<u32> {
        let l = -self.height.log2();
        (l.fract() == 0.0).then_some(l as u32)
    }

    /// `(h_k / delta_k) log omega(h_k)`.
    pub fn exponent(&self, omega: &Omega) -> f64 {
        self.atoms as f64 * self.height * omega.eval(self.height).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupSpec {
    pub rings: Vec<BlowupRing>,
    pub omega: Omega,
}

impl BlowupSpec {
    /// `h_k = 2^-k^3` and `N_k = round(1 / (k^2 h_k))` for `k = 1..=rings`.
    pub fn standard(omega: Omega, rings: u32) -> Self {
        assert!(
            (1..=3).contains(&rings),
            "rings beyond k = 3 do not fit a desk-scale grid"
        );
        let rings = (1..=rings)
            .map(|k| {
                let height = (-((k * k * k) as f64)).exp2();
                let atoms = (1.0 / ((k * k) as f64 * height)).round() as u64;
                BlowupRing { k, height, atoms }
            })
            .collect();
        BlowupSpec { rings, omega }
    }

    /// `sum_k N_k h_k`.
    pub fn total_mass(&self) -> f64 {
        self.rings.iter().map(|r| r.atoms as f64 * r.height).sum()
    }

    /// Checks `omega`, the ring ordering, and that `(h_k/delta_k) log omega(h_k)`
    /// strictly decreases over the constructed rings.
    pub fn validate(&self) -> Result<()> {
        self.omega.validate()?;
        if self.rings.is_empty() {
            return Err(Error::SpecViolation("no rings".into()));
        }
        for w in self.rings.windows(2) {
            if !(w[1].height < w[0].height) {
                return Err(Error::SpecViolation("ring heights must decrease".into()));
            }
            let (a, b) = (w[0].exponent(&self.omega), w[1].exponent(&self.omega));
            if !(b < a) {
                return Err(Error::SpecViolation(format!(
                    "(h_k/delta_k) log omega(h_k) does not decrease: {a} then {b} at k = {}",
                    w[1].k
                )));
            }
        }
        for r in &self.rings {
            if r.atoms == 0 || !(r.height > 0.0 && r.height < 1.0) {
                return Err(Error::SpecViolation(format!("ring {} is degenerate", r.k)));
            }
        }
        Ok(())
    }
}

/// Atoms `z_{k,j} = (1 - h_k) e^{2 pi i (j + 1/2)/N_k}` with weight
/// `1 - |z_{k,j}| = h_k`.
pub fn blowup_measure(spec: &BlowupSpec) -> Result<PointMassMeasure> {
    spec.validate()?;
    let total: u64 = spec.rings.iter().map(|r| r.atoms).sum();
    let mut atoms = Vec::with_capacity(total as usize);
    for r in &spec.rings {
        let radius = 1.0 - r.height;
        for j in 0..r.atoms {
            atoms.push((radius, (j as f64 + 0.5) / r.atoms as f64, r.height));
        }
    }
    PointMassMeasure::from_polar(atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupEntry {
    pub level: u32,
    pub scale: f64,
    /// `max_Q int_Q |E| dmu / (l(Q) omega(l(Q)))`.
    pub ratio: f64,
}

/// Per-level maximum of `int_Q |E| dmu / (l(Q) omega(l(Q)))` over the
/// atom-carrying dyadic squares.
pub fn blowup_ratio(
    e: &dyn Modulus,
    spec: &BlowupSpec,
    mu: &PointMassMeasure,
    max_level: u32,
) -> Result<Vec<BlowupEntry>> {
    spec.validate()?;
    let (weighted, _) = weighted_measure(e, mu);
    let index = MeasureIndex::new(&weighted);
    drop(weighted);
    let profile = profile_of_index(&index, max_level);
    Ok(profile
        .entries
        .iter()
        .map(|p| BlowupEntry {
            level: p.level,
            scale: p.scale,
            ratio: p.max_ratio / spec.omega.eval(p.scale),
        })
        .collect())
}

/// Atoms `(1 - 2^-L) e^{2 pi i j 2^-L}` for odd `j` and `L = 1..=depth`,
/// each of weight `2^-L`.
pub fn separated_net_measure(depth: u32) -> PointMassMeasure {
    assert!(depth <= 20, "net depth {depth} too large");
    let mut atoms = Vec::new();
    for level in 1..=depth {
        let g = dyadic_length(level);
        for j in (1..(1u64 << level)).step_by(2) {
            atoms.push((1.0 - g, j as f64 * g, g));
        }
    }
    PointMassMeasure::from_polar(atoms).expect("net atoms are valid")
}
