//! Command-line arguments and the validated run configuration.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use carleson_core::measure::EpsSchedule;
use carleson_core::verification::Omega;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Carleson input: |E| mu becomes vanishing Carleson.
    A,
    /// Arbitrary finite input: stopping-tree construction.
    B,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    /// Measure file: {"atoms": [{"r": .., "theta": .., "w": ..}, ..]}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "a")]
    pub mode: Mode,
    /// Boundary grid depth D (2^D samples), 4..=26.
    #[arg(long, default_value_t = 14)]
    pub depth: u32,
    /// Threshold schedule: `geometric`, `slow`, or a comma list such as 0.5,0.25,0.125.
    #[arg(long, default_value = "geometric")]
    pub eps: String,
    /// Deepest dyadic level of the written profile; defaults to D - 2.
    #[arg(long)]
    pub max_level: Option<u32>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed recorded in the manifest by test harnesses.
    #[arg(long, hide = true)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Measure file.
    #[arg(long)]
    pub measure: PathBuf,
    /// log|E| grid CSV as written by `construct`; E = 1 when omitted.
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Deepest dyadic level scanned.
    #[arg(long, default_value_t = 12)]
    pub max_level: u32,
    /// Also report max |E(z_Q)| over squares with mu(Q) >= eps l(Q).
    #[arg(long)]
    pub probe_eps: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    /// Modulus of continuity: `poly:ALPHA` or `table:FILE` (CSV lines `t,omega`).
    #[arg(long, default_value = "poly:1")]
    pub omega: String,
    /// Number of rings, 1..=3.
    #[arg(long, default_value_t = 3)]
    pub rings: u32,
    /// log|E| grid CSV; E = 1 when omitted.
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Deepest dyadic level scanned; defaults to the deepest ring level.
    #[arg(long)]
    pub max_level: Option<u32>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryFixture {
    /// +1 on [1/4, 3/4), -1 elsewhere.
    Step,
    /// cos(2 pi theta).
    Cos,
}

#[derive(Args, Debug)]
pub struct WolffArgs {
    /// Boundary function as a grid CSV; overrides --fixture.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "step")]
    pub fixture: BoundaryFixture,
    /// Grid depth for fixtures, 4..=26.
    #[arg(long, default_value_t = 14)]
    pub depth: u32,
    /// Threshold schedule: `geometric`, `slow`, or a comma list.
    #[arg(long, default_value = "slow")]
    pub eps: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Taming {
    /// E built from the derivative measure of G.
    Construct,
    /// E = 1.
    None,
}

#[derive(Args, Debug)]
pub struct VolterraArgs {
    /// Symbol G: `log-series:TERMS`, `monomial:K`, `identity` or `const:C`.
    #[arg(long, default_value = "log-series:64")]
    pub symbol: String,
    /// Strictly increasing exponents n, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,4,16,64")]
    pub n: Vec<u32>,
    /// Grid depth D of E, 4..=26.
    #[arg(long, default_value_t = 14)]
    pub depth: u32,
    #[arg(long, value_enum, default_value = "construct")]
    pub taming: Taming,
    /// Threshold schedule used when building E.
    #[arg(long, default_value = "geometric")]
    pub eps: String,
    /// Deepest cell band and dyadic level; defaults to D - 3.
    #[arg(long)]
    pub max_level: Option<u32>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Threshold schedule as given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsChoice {
    Preset { name: String },
    Explicit { values: Vec<f64> },
}

impl EpsChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "geometric" | "slow" => Ok(EpsChoice::Preset {
                name: s.to_string(),
            }),
            _ => {
                let values = s
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .with_context(|| format!("bad eps value `{v}`"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    bail!("eps values must be positive and finite");
                }
                if values.windows(2).any(|w| w[1] >= w[0]) {
                    bail!("eps values must be strictly decreasing");
                }
                Ok(EpsChoice::Explicit { values })
            }
        }
    }

    pub fn schedule(&self, total_mass: f64) -> Result<EpsSchedule> {
        Ok(match self {
            EpsChoice::Preset { name } => EpsSchedule::preset(name, total_mass)?,
            EpsChoice::Explicit { values } => EpsSchedule::explicit(values.clone())?,
        })
    }
}

/// Everything that determines a `construct` run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub depth: u32,
    pub eps: EpsChoice,
    pub mode: Mode,
    pub max_level: u32,
    /// Not recorded: the same run into two directories must give equal manifests.
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_args(a: &ConstructArgs) -> Result<Self> {
        check_depth(a.depth)?;
        let max_level = a.max_level.unwrap_or(a.depth - 2);
        if max_level > a.depth - 2 {
            bail!(
                "--max-level {max_level} exceeds depth - 2 = {}",
                a.depth - 2
            );
        }
        Ok(RunConfig {
            depth: a.depth,
            eps: EpsChoice::parse(&a.eps)?,
            mode: a.mode,
            max_level,
            out: a.out.clone(),
            seed: a.seed,
        })
    }
}

pub fn check_depth(depth: u32) -> Result<()> {
    if !(4..=26).contains(&depth) {
        bail!("depth {depth} outside 4..=26");
    }
    Ok(())
}

/// `poly:ALPHA` or `table:FILE`.
pub fn parse_omega(s: &str) -> Result<(Omega, Option<PathBuf>)> {
    if let Some(a) = s.strip_prefix("poly:") {
        let alpha: f64 = a
            .parse()
            .with_context(|| format!("bad exponent in `{s}`"))?;
        return Ok((Omega::Power { alpha }, None));
    }
    if let Some(p) = s.strip_prefix("table:") {
        let path = PathBuf::from(p);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut points = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('t') {
                continue;
            }
            let (t, w) = line
                .split_once(',')
                .with_context(|| format!("{}:{}: expected `t,omega`", path.display(), k + 1))?;
            let t: f64 = t
                .trim()
                .parse()
                .with_context(|| format!("{}:{}: bad t", path.display(), k + 1))?;
            let w: f64 = w
                .trim()
                .parse()
                .with_context(|| format!("{}:{}: bad omega", path.display(), k + 1))?;
            points.push((t, w));
        }
        return Ok((Omega::Table { points }, Some(path)));
    }
    bail!("omega must be `poly:ALPHA` or `table:FILE`, found `{s}`")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Symbol {
    LogSeries { terms: usize },
    Monomial { k: u32 },
    Constant { value: f64 },
}

impl Symbol {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(Symbol::Monomial { k: 1 });
        }
        if let Some(t) = s.strip_prefix("log-series:") {
            let terms: usize = t
                .parse()
                .with_context(|| format!("bad term count in `{s}`"))?;
            if terms == 0 || terms > 1 << 16 {
                bail!("log-series terms must be in 1..=65536");
            }
            return Ok(Symbol::LogSeries { terms });
        }
        if let Some(k) = s.strip_prefix("monomial:") {
            return Ok(Symbol::Monomial {
                k: k.parse()
                    .with_context(|| format!("bad exponent in `{s}`"))?,
            });
        }
        if let Some(c) = s.strip_prefix("const:") {
            return Ok(Symbol::Constant {
                value: c
                    .parse()
                    .with_context(|| format!("bad constant in `{s}`"))?,
            });
        }
        bail!("unknown symbol `{s}`")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_lists() {
        assert!(EpsChoice::parse("0.5,0.25").is_ok());
        assert!(EpsChoice::parse("0.25,0.5").is_err());
        assert!(EpsChoice::parse("0.5,-1").is_err());
        assert!(EpsChoice::parse("fast").is_err());
    }

    #[test]
    fn symbols() {
        assert_eq!(
            Symbol::parse("identity").unwrap(),
            Symbol::Monomial { k: 1 }
        );
        assert_eq!(
            Symbol::parse("log-series:64").unwrap(),
            Symbol::LogSeries { terms: 64 }
        );
        assert!(Symbol::parse("sin").is_err());
    }

    #[test]
    fn omegas() {
        assert_eq!(
            parse_omega("poly:1").unwrap().0,
            Omega::Power { alpha: 1.0 }
        );
        assert!(parse_omega("exp").is_err());
    }
}
