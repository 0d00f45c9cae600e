//! Atomic measures on the disc, dyadic Carleson profiles, the annulus
//! splitter and discretized area measures.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dyadic_index, dyadic_length, CarlesonSquare, DiscPoint, DyadicArc};
use crate::outer::{AnalyticSampler, Polynomial};

/// Relative slack allowed when re-checking inequalities that hold exactly in
/// real arithmetic but are evaluated with sums in a different order.
pub const CERTIFICATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: DiscPoint,
    pub weight: f64,
}

/// A finite positive measure given by point masses strictly inside the disc.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointMassMeasure {
    atoms: Vec<Atom>,
}

impl PointMassMeasure {
    pub fn empty() -> Self {
        PointMassMeasure { atoms: Vec::new() }
    }

    /// Validates every atom: `|z| < 1`, weight positive and finite.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (k, a) in atoms.iter().enumerate() {
            check_atom(a).map_err(|m| Error::Invalid(format!("atom {k}: {m}")))?;
        }
        Ok(PointMassMeasure { atoms })
    }

    /// Builds a measure from `(radius, angle, weight)` triples.
    pub fn from_polar(triples: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        let atoms = triples
            .into_iter()
            .map(|(r, theta, w)| {
                if !(0.0..1.0).contains(&r) {
                    return Err(Error::Invalid(format!("radius {r} outside [0, 1)")));
                }
                Ok(Atom {
                    point: DiscPoint::from_polar(r, theta),
                    weight: w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn single(radius: f64, angle: f64, weight: f64) -> Result<Self> {
        Self::from_polar([(radius, angle, weight)])
    }

    /// `count` equal atoms of total mass `mass` on the circle of the given
    /// radius, at the angles `(j + 1/2) / count`.
    pub fn uniform_ring(radius: f64, count: usize, mass: f64) -> Result<Self> {
        let w = mass / count as f64;
        Self::from_polar((0..count).map(|j| (radius, (j as f64 + 0.5) / count as f64, w)))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn push(&mut self, atom: Atom) -> Result<()> {
        check_atom(&atom).map_err(Error::Invalid)?;
        self.atoms.push(atom);
        Ok(())
    }

    /// Concatenation of the atom lists (the sum of the two measures).
    pub fn sum(&self, other: &PointMassMeasure) -> PointMassMeasure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        PointMassMeasure { atoms }
    }

    /// Multiplies each weight by `factor(atom)`; atoms whose new weight is
    /// zero are dropped.
    pub fn reweighted(&self, factor: impl Fn(&Atom) -> f64 + Sync) -> PointMassMeasure {
        let atoms = self
            .atoms
            .par_iter()
            .filter_map(|a| {
                let w = a.weight * factor(a);
                (w > 0.0).then_some(Atom {
                    point: a.point,
                    weight: w,
                })
            })
            .collect();
        PointMassMeasure { atoms }
    }

    pub fn filtered(&self, keep: impl Fn(&Atom) -> bool) -> PointMassMeasure {
        PointMassMeasure {
            atoms: self.atoms.iter().filter(|a| keep(a)).copied().collect(),
        }
    }

    /// Merges atoms sitting at identical points; output sorted by (angle, radius).
    pub fn normalized(&self) -> PointMassMeasure {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| {
            a.point
                .angle()
                .total_cmp(&b.point.angle())
                .then(a.point.radius().total_cmp(&b.point.radius()))
        });
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.point == a.point => last.weight += a.weight,
                _ => merged.push(a),
            }
        }
        PointMassMeasure { atoms: merged }
    }
}

fn check_atom(a: &Atom) -> std::result::Result<(), String> {
    let r = a.point.radius();
    if !(r.is_finite() && (0.0..1.0).contains(&r)) {
        return Err(format!("radius {r} outside [0, 1)"));
    }
    if !(a.weight.is_finite() && a.weight > 0.0) {
        return Err(format!("weight {} is not positive", a.weight));
    }
    Ok(())
}

/// Sum of the weights of the atoms inside `square`.
pub fn mass_in_square(mu: &PointMassMeasure, square: &CarlesonSquare) -> f64 {
    mu.atoms
        .iter()
        .filter(|a| square.contains(&a.point))
        .map(|a| a.weight)
        .sum()
}

/// Atoms sorted by angle, for fast dyadic square masses.
///
/// Because `dyadic_index(angle, level)` is monotone in the angle, the atoms
/// under a dyadic arc form a contiguous run of the sorted arrays.
#[derive(Debug, Clone)]
pub struct MeasureIndex {
    angles: Vec<f64>,
    gaps: Vec<f64>,
    weights: Vec<f64>,
}

impl MeasureIndex {
    pub fn new(mu: &PointMassMeasure) -> Self {
        let mut order: Vec<u32> = (0..mu.atoms.len() as u32).collect();
        order.par_sort_unstable_by(|&i, &j| {
            let (a, b) = (&mu.atoms[i as usize].point, &mu.atoms[j as usize].point);
            a.angle().total_cmp(&b.angle()).then(i.cmp(&j))
        });
        let pick = |f: &dyn Fn(&Atom) -> f64| -> Vec<f64> {
            order.iter().map(|&i| f(&mu.atoms[i as usize])).collect()
        };
        MeasureIndex {
            angles: pick(&|a| a.point.angle()),
            gaps: pick(&|a| a.point.gap()),
            weights: pick(&|a| a.weight),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    fn run(&self, arc: &DyadicArc) -> std::ops::Range<usize> {
        let lo = self
            .angles
            .partition_point(|&a| dyadic_index(a, arc.level) < arc.index);
        let hi = self
            .angles
            .partition_point(|&a| dyadic_index(a, arc.level) <= arc.index);
        lo..hi
    }

    /// `mu(Q(arc))`.
    pub fn mass(&self, arc: &DyadicArc) -> f64 {
        let side = arc.length();
        self.run(arc)
            .filter(|&k| self.gaps[k] <= side)
            .map(|k| self.weights[k])
            .sum()
    }

    /// Masses of all nonempty dyadic squares of one level, by increasing index.
    pub fn level_masses(&self, level: u32) -> Vec<(u64, f64)> {
        let side = dyadic_length(level);
        let mut out: Vec<(u64, f64)> = Vec::new();
        for k in 0..self.angles.len() {
            if self.gaps[k] > side {
                continue;
            }
            let idx = dyadic_index(self.angles[k], level);
            match out.last_mut() {
                Some((i, m)) if *i == idx => *m += self.weights[k],
                _ => out.push((idx, self.weights[k])),
            }
        }
        out
    }

    /// Masses of the nonempty dyadic squares of `level` inside `Q(arc)`.
    pub fn masses_within(&self, arc: &DyadicArc, level: u32) -> Vec<(u64, f64)> {
        assert!(level >= arc.level);
        let side = dyadic_length(level);
        let mut out: Vec<(u64, f64)> = Vec::new();
        for k in self.run(arc) {
            if self.gaps[k] > side {
                continue;
            }
            let idx = dyadic_index(self.angles[k], level);
            match out.last_mut() {
                Some((i, m)) if *i == idx => *m += self.weights[k],
                _ => out.push((idx, self.weights[k])),
            }
        }
        out
    }

    /// `max_Q mu(Q) / l(Q)` over the dyadic squares of one level, streamed
    /// without materializing the square list.
    pub fn level_max_ratio(&self, level: u32) -> f64 {
        let side = dyadic_length(level);
        let mut best = 0.0f64;
        let mut current: Option<(u64, f64)> = None;
        for k in 0..self.angles.len() {
            if self.gaps[k] > side {
                continue;
            }
            let idx = dyadic_index(self.angles[k], level);
            current = match current {
                Some((i, m)) if i == idx => Some((i, m + self.weights[k])),
                Some((_, m)) => {
                    best = best.max(m);
                    Some((idx, self.weights[k]))
                }
                None => Some((idx, self.weights[k])),
            };
        }
        if let Some((_, m)) = current {
            best = best.max(m);
        }
        best / side
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub level: u32,
    pub scale: f64,
    pub max_ratio: f64,
}

/// Per-level maxima of `mu(Q) / l(Q)` over dyadic squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonProfile {
    pub entries: Vec<ProfileEntry>,
    /// Maximum over all scanned levels.
    pub dyadic_constant: f64,
    /// Bound for general (non-dyadic) squares via the two-square covering.
    pub general_constant: f64,
}

impl CarlesonProfile {
    fn from_ratios(ratios: Vec<f64>) -> Self {
        let entries: Vec<ProfileEntry> = ratios
            .into_iter()
            .enumerate()
            .map(|(l, max_ratio)| ProfileEntry {
                level: l as u32,
                scale: dyadic_length(l as u32),
                max_ratio,
            })
            .collect();
        let dyadic_constant = entries.iter().map(|e| e.max_ratio).fold(0.0, f64::max);
        CarlesonProfile {
            entries,
            dyadic_constant,
            general_constant: 2.0 * dyadic_constant,
        }
    }

    pub fn at_level(&self, level: u32) -> f64 {
        self.entries
            .get(level as usize)
            .map_or(0.0, |e| e.max_ratio)
    }

    pub fn max_level(&self) -> u32 {
        self.entries.len().saturating_sub(1) as u32
    }
}

/// Dyadic Carleson profile for levels `0..=max_level`.
pub fn carleson_profile(mu: &PointMassMeasure, max_level: u32) -> CarlesonProfile {
    assert!(max_level <= 40, "max_level {max_level} too deep");
    let index = MeasureIndex::new(mu);
    profile_of_index(&index, max_level)
}

pub fn profile_of_index(index: &MeasureIndex, max_level: u32) -> CarlesonProfile {
    let ratios = (0..=max_level)
        .into_par_iter()
        .map(|l| index.level_max_ratio(l))
        .collect();
    CarlesonProfile::from_ratios(ratios)
}

/// The positive sequence `eps_n` driving the splitter and the heavy-square
/// thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsSchedule {
    /// `scale * ratio^n`.
    Geometric { scale: f64, ratio: f64 },
    /// `1 / (n + 2)^2`.
    InverseSquare,
    /// Explicit values; past the end the last value keeps halving.
    Explicit { values: Vec<f64> },
}

impl EpsSchedule {
    /// Named presets: `geometric` (`2^-n / (1 + mass)`) and `slow` (`1/(n+2)^2`).
    pub fn preset(name: &str, total_mass: f64) -> Result<Self> {
        match name {
            "geometric" => Ok(EpsSchedule::Geometric {
                scale: 1.0 / (1.0 + total_mass),
                ratio: 0.5,
            }),
            "slow" => Ok(EpsSchedule::InverseSquare),
            other => Err(Error::Invalid(format!("unknown eps preset `{other}`"))),
        }
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let s = EpsSchedule::Explicit { values };
        s.validate()?;
        Ok(s)
    }

    pub fn value(&self, n: usize) -> f64 {
        match self {
            EpsSchedule::Geometric { scale, ratio } => scale * ratio.powi(n as i32),
            EpsSchedule::InverseSquare => 1.0 / ((n + 2) as f64).powi(2),
            EpsSchedule::Explicit { values } => {
                let last = values.len() - 1;
                if n <= last {
                    values[n]
                } else {
                    values[last] * (-((n - last) as f64)).exp2()
                }
            }
        }
    }

    /// Positive, strictly decreasing.
    pub fn validate(&self) -> Result<()> {
        match self {
            EpsSchedule::Geometric { scale, ratio } => {
                if !(*scale > 0.0 && scale.is_finite() && *ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::Invalid(format!(
                        "geometric schedule needs scale > 0 and 0 < ratio < 1 (got {scale}, {ratio})"
                    )));
                }
            }
            EpsSchedule::InverseSquare => {}
            EpsSchedule::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::Invalid("empty eps list".into()));
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::Invalid("eps values must be positive".into()));
                }
                if values.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::Invalid(
                        "eps values must be strictly decreasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One re-checked tail inequality of the split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub n: usize,
    /// 1 or 2: which part's tail is bounded.
    pub part: u8,
    pub tail: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCertificate {
    pub tail_checks: Vec<TailCheck>,
    /// `sum_{n >= 1} (1 - r_n)`.
    pub gap_sum: f64,
    /// `2 (1 - r_1)`.
    pub gap_sum_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    /// `N(n)` with `r_n = 1 - 2^-N(n)`.
    pub exponents: Vec<u32>,
    pub radii: Vec<f64>,
    pub eps: Vec<f64>,
    pub mu1: PointMassMeasure,
    pub mu2: PointMassMeasure,
    pub certificate: SplitCertificate,
}

impl SplitResult {
    /// `1 - r_n`, if that radius exists.
    pub fn gap(&self, n: usize) -> Option<f64> {
        self.exponents.get(n).map(|&e| dyadic_length(e))
    }

    pub fn part(&self, which: u8) -> &PointMassMeasure {
        match which {
            1 => &self.mu1,
            2 => &self.mu2,
            _ => panic!("part must be 1 or 2"),
        }
    }

    /// Index of the annulus `[r_n, r_{n+1})` containing a point at distance
    /// `gap` from the circle.
    pub fn annulus_of(&self, gap: f64) -> usize {
        self.exponents
            .partition_point(|&e| gap <= dyadic_length(e))
            .saturating_sub(1)
    }
}

/// Splits `mu` into two parts with small tails on alternating annuli.
///
/// Radii have the form `1 - 2^-N`, start at `r_0 = 0` and at least halve the
/// gap at every step; `r_{n+1}` is the first such radius (not deeper than
/// `2^-max_level`) with `mu{|z| >= r_{n+1}} <= eps_n (1 - r_n)`. The search
/// stops when no admissible radius remains. Atoms in even annuli go to `mu1`,
/// odd annuli to `mu2`.
pub fn split_measure(
    mu: &PointMassMeasure,
    eps: &EpsSchedule,
    max_level: u32,
) -> Result<SplitResult> {
    eps.validate()?;
    assert!(max_level <= 52);
    // Tail masses per exponent: tail[e] = mu{gap <= 2^-e}.
    let mut tail = vec![0.0f64; max_level as usize + 2];
    for a in &mu.atoms {
        let g = a.point.gap();
        // Largest e with g <= 2^-e, capped at max_level + 1.
        let mut e = if g > 0.0 {
            (-g.log2()).floor().max(0.0) as u32
        } else {
            max_level + 1
        };
        e = e.min(max_level + 1);
        while e > 0 && g > dyadic_length(e) {
            e -= 1;
        }
        while e <= max_level && g <= dyadic_length(e + 1) {
            e += 1;
        }
        tail[e as usize] += a.weight;
    }
    for e in (0..=max_level as usize).rev() {
        tail[e] += tail[e + 1];
    }

    let mut exponents = vec![0u32];
    loop {
        let n = exponents.len() - 1;
        let current = exponents[n];
        let target = eps.value(n) * dyadic_length(current);
        let next = (current + 1..=max_level).find(|&e| tail[e as usize] <= target);
        match next {
            Some(e) => exponents.push(e),
            None => break,
        }
    }
    if exponents.len() < 3 {
        return Err(Error::RadiiExhausted {
            max_level,
            found: exponents.len() - 1,
        });
    }
    let eps_all: Vec<f64> = (0..exponents.len()).map(|n| eps.value(n)).collect();
    let radii: Vec<f64> = exponents.iter().map(|&e| 1.0 - dyadic_length(e)).collect();

    let mut mu1 = Vec::new();
    let mut mu2 = Vec::new();
    let split_index = |gap: f64| exponents.partition_point(|&e| gap <= dyadic_length(e)) - 1;
    for a in &mu.atoms {
        if split_index(a.point.gap()) % 2 == 0 {
            mu1.push(*a);
        } else {
            mu2.push(*a);
        }
    }
    let mu1 = PointMassMeasure { atoms: mu1 };
    let mu2 = PointMassMeasure { atoms: mu2 };
    let certificate = split_certificate(&exponents, &eps_all, &mu1, &mu2);
    Ok(SplitResult {
        exponents,
        radii,
        eps: eps_all,
        mu1,
        mu2,
        certificate,
    })
}

/// Re-checks both tail inequalities directly on the parts:
/// `mu1{|z| >= r_m} <= eps_m (1 - r_m)` for odd `m` and the same for `mu2`
/// with even `m`, plus the summability bound on the gaps.
pub fn split_certificate(
    exponents: &[u32],
    eps: &[f64],
    mu1: &PointMassMeasure,
    mu2: &PointMassMeasure,
) -> SplitCertificate {
    let tail_of = |mu: &PointMassMeasure, gap: f64| -> f64 {
        mu.atoms
            .iter()
            .filter(|a| a.point.gap() <= gap)
            .map(|a| a.weight)
            .sum()
    };
    let mut tail_checks = Vec::new();
    for (m, &e) in exponents.iter().enumerate() {
        let gap = dyadic_length(e);
        let (part, mu) = if m % 2 == 1 { (1u8, mu1) } else { (2u8, mu2) };
        let tail = tail_of(mu, gap);
        let bound = eps[m] * gap;
        tail_checks.push(TailCheck {
            n: m,
            part,
            tail,
            bound,
            holds: tail <= bound * (1.0 + CERTIFICATE_SLACK),
        });
    }
    let gap_sum: f64 = exponents.iter().skip(1).map(|&e| dyadic_length(e)).sum();
    let gap_sum_bound = exponents.get(1).map_or(0.0, |&e| 2.0 * dyadic_length(e));
    let holds = tail_checks.iter().all(|c| c.holds) && gap_sum <= gap_sum_bound;
    SplitCertificate {
        tail_checks,
        gap_sum,
        gap_sum_bound,
        holds,
    }
}

/// One radial band of the polar cell grid, `[1 - 2^-L, 1 - 2^-L-1)`.
///
/// With `s = 1 - |z|^2` the band is `s in (s_out, s_in]` and the normalized
/// area element is `ds dtheta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBand {
    pub level: u32,
    /// Radius of the cell centres: the barycentre of the band under the
    /// weight `(1 - |z|^2) dA`.
    pub centre_radius: f64,
    /// `int_cell (1 - |z|^2) dA / pi` for one of the `2^L` cells.
    pub cell_mass: f64,
}

impl CellBand {
    pub fn new(level: u32) -> Self {
        let s_of = |gap: f64| gap * (2.0 - gap);
        let s_in = s_of(dyadic_length(level));
        let s_out = s_of(dyadic_length(level + 1));
        let m1 = 0.5 * (s_in * s_in - s_out * s_out);
        let m2 = (s_in.powi(3) - s_out.powi(3)) / 3.0;
        let s_centre = m2 / m1;
        CellBand {
            level,
            centre_radius: (1.0 - s_centre).sqrt(),
            cell_mass: m1 * dyadic_length(level),
        }
    }

    pub fn centres(&self) -> impl Iterator<Item = DiscPoint> + '_ {
        let cells = 1u64 << self.level;
        (0..cells).map(move |j| {
            DiscPoint::from_polar(self.centre_radius, (j as f64 + 0.5) / cells as f64)
        })
    }
}

/// Discretizes `factor(z) (1 - |z|^2) dA(z) / pi` on the polar dyadic cells:
/// for each level `L <= max_level` the band `[1 - 2^-L, 1 - 2^-L-1)` is cut
/// into `2^L` angular cells, each replaced by one atom at its centre with
/// weight `factor(centre) * int_cell (1 - |z|^2) dA / pi`.
///
/// The centre sits at the `(1 - |z|^2)`-barycentre of the band, so the rule
/// is exact for radial factors that are affine in `|z|^2` (e.g. `|F'|^2` for
/// `F = z` and `F = z^2`). Zero-weight atoms are omitted.
pub fn cell_measure<F>(max_level: u32, factor: F) -> Result<PointMassMeasure>
where
    F: Fn(DiscPoint) -> Result<f64> + Sync,
{
    assert!(max_level <= 24, "cell grid too deep");
    let mut atoms = Vec::new();
    for level in 0..=max_level {
        let band = CellBand::new(level);
        let cells = 1u64 << level;
        let row: Vec<Option<Atom>> = (0..cells)
            .into_par_iter()
            .map(|j| {
                let point =
                    DiscPoint::from_polar(band.centre_radius, (j as f64 + 0.5) / cells as f64);
                let d = factor(point)?;
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::NonFiniteSample {
                        point: format!("{:?}", point.to_complex()),
                    });
                }
                let w = d * band.cell_mass;
                Ok((w > 0.0).then_some(Atom { point, weight: w }))
            })
            .collect::<Result<_>>()?;
        atoms.extend(row.into_iter().flatten());
    }
    Ok(PointMassMeasure { atoms })
}

/// Discretization of `|F'(z)|^2 (1 - |z|^2) dA(z) / pi`.
pub fn derivative_measure(f: &dyn AnalyticSampler, max_level: u32) -> Result<PointMassMeasure> {
    cell_measure(max_level, |p| Ok(f.derivative(p.to_complex())?.norm_sqr()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityLevel {
    pub level: u32,
    pub fraction: f64,
}

/// For each level `L`, the fraction of the grid angles `j 2^-L` whose
/// centred square of side `2^-L` has `mu(Q)/l(Q) > eta`.
pub fn density_scan(
    mu: &PointMassMeasure,
    levels: std::ops::RangeInclusive<u32>,
    eta: f64,
) -> Vec<DensityLevel> {
    levels
        .map(|level| {
            let count = 1u64 << level;
            let side = dyadic_length(level);
            let mut masses: HashMap<u64, f64> = HashMap::new();
            for a in &mu.atoms {
                if a.point.gap() > side {
                    continue;
                }
                // The centred arc around j/2^L is [j - 1/2, j + 1/2) / 2^L.
                let j = ((a.point.angle() * count as f64 + 0.5).floor() as u64) % count;
                *masses.entry(j).or_insert(0.0) += a.weight;
            }
            let heavy = masses.values().filter(|&&m| m / side > eta).count();
            DensityLevel {
                level,
                fraction: heavy as f64 / count as f64,
            }
        })
        .collect()
}

/// Default `eta` for [`density_scan`].
pub const DEFAULT_DENSITY_ETA: f64 = 0.1;

/// Lower bound for the embedding constant: the largest
/// `int |F|^p dmu / ||F||_p^p` over the testers, with the boundary norm
/// computed on a uniform circle grid.
pub fn embedding_check(mu: &PointMassMeasure, testers: &[Polynomial], p: f64) -> Result<f64> {
    assert!(p > 0.0);
    let mut best = 0.0f64;
    for t in testers {
        let nodes = (8 * t.degree() + 8).next_power_of_two().max(4096);
        let boundary: f64 = (0..nodes)
            .map(|j| {
                let z = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / nodes as f64);
                t.eval(z).norm().powf(p)
            })
            .sum::<f64>()
            / nodes as f64;
        if !(boundary > 0.0) {
            return Err(Error::ZeroTester);
        }
        let inside: f64 = mu
            .atoms
            .iter()
            .map(|a| a.weight * t.eval(a.point.to_complex()).norm().powf(p))
            .sum();
        best = best.max(inside / boundary);
    }
    Ok(best)
}
