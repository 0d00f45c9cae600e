//! One runner per subcommand. Each writes its files, then the manifest.

use anyhow::{bail, Context, Result};
use serde::Serialize;

use carleson_core::applications::{gradient_measure, volterra_demo, wolff_tame, VolterraEntry};
use carleson_core::boundary::GridFunction;
use carleson_core::io::{
    grid_csv, level_csv, profile_csv, read_grid_csv, read_measure, svg_plot, table_csv,
};
use carleson_core::measure::{derivative_measure, CarlesonProfile, ProfileEntry};
use carleson_core::outer::{
    AnalyticSampler, ConstantModulus, Modulus, Monomial, OuterFunction, Polynomial,
};
use carleson_core::taming::{construct_a, construct_b};
use carleson_core::verification::{
    blowup_measure, blowup_ratio, heavy_square_probe, weighted_profile, BlowupSpec, ProbeEntry,
};

use crate::config::{
    check_depth, parse_omega, BoundaryFixture, ConstructArgs, EpsChoice, Mode, RunConfig,
    SharpnessArgs, Symbol, Taming, VerifyArgs, VolterraArgs, WolffArgs,
};
use crate::output::OutputDir;

pub enum Outcome {
    Certified,
    Violated(String),
}

fn outcome(holds: bool, what: &str) -> Outcome {
    if holds {
        Outcome::Certified
    } else {
        Outcome::Violated(format!("{what}; see artifacts.json"))
    }
}

fn profile_svg(title: &str, entries: &[ProfileEntry]) -> String {
    let pts: Vec<(f64, f64)> = entries.iter().map(|e| (e.scale, e.max_ratio)).collect();
    svg_plot(title, "max ratio", &pts)
}

pub fn construct(args: ConstructArgs) -> Result<Outcome> {
    let config = RunConfig::from_args(&args)?;
    let mu = read_measure(&args.input)?;
    let eps = config.eps.schedule(mu.total_mass())?;
    let mut out = OutputDir::create(&config.out)?;
    out.input(&args.input)?;
    let (holds, outer) = match config.mode {
        Mode::A => {
            let c = construct_a(&mu, &eps, config.depth)?;
            out.write_json("artifacts.json", &c)?;
            (c.holds(), c.outer().clone())
        }
        Mode::B => {
            let c = construct_b(&mu, &eps, config.depth)?;
            out.write_json("artifacts.json", &c)?;
            (c.holds(), c.outer().clone())
        }
    };
    out.write("log_E.csv", &grid_csv(outer.log_modulus()))?;
    let report = weighted_profile(&outer, &mu, config.max_level);
    let profile = CarlesonProfile {
        entries: report
            .entries
            .iter()
            .map(|e| ProfileEntry {
                level: e.level,
                scale: e.scale,
                max_ratio: e.weighted,
            })
            .collect(),
        dyadic_constant: report
            .entries
            .iter()
            .map(|e| e.weighted)
            .fold(0.0, f64::max),
        general_constant: 2.0
            * report
                .entries
                .iter()
                .map(|e| e.weighted)
                .fold(0.0, f64::max),
    };
    out.write("profile.csv", &profile_csv(&profile))?;
    out.write(
        "profile.svg",
        &profile_svg("|E| mu: max ratio per scale", &profile.entries),
    )?;
    out.finish("construct", &config)?;
    Ok(outcome(holds, "construction certificate failed"))
}

#[derive(Serialize)]
struct VerifyConfig {
    measure: String,
    weight: Option<String>,
    max_level: u32,
    probe_eps: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport {
    weighted: carleson_core::verification::WeightedProfileReport,
    probe: Option<Vec<ProbeEntry>>,
}

pub fn verify(args: VerifyArgs) -> Result<Outcome> {
    if args.max_level > 40 {
        bail!("--max-level {} exceeds 40", args.max_level);
    }
    let mu = read_measure(&args.measure)?;
    let mut out = OutputDir::create(&args.out)?;
    out.input(&args.measure)?;
    let e: Box<dyn Modulus> = match &args.weight {
        Some(p) => {
            out.input(p)?;
            Box::new(OuterFunction::new(read_grid_csv(p)?))
        }
        None => Box::new(ConstantModulus(1.0)),
    };
    let weighted = weighted_profile(e.as_ref(), &mu, args.max_level);
    let rows: Vec<_> = weighted
        .entries
        .iter()
        .map(|e| carleson_core::boundary::ScaleValue {
            level: e.level,
            scale: e.scale,
            value: e.weighted,
        })
        .collect();
    out.write("profile.csv", &level_csv(&rows))?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.scale, r.value)).collect();
    out.write(
        "profile.svg",
        &svg_plot("|E| mu: max ratio per scale", "max ratio", &pts),
    )?;
    let probe = args
        .probe_eps
        .map(|eps| heavy_square_probe(e.as_ref(), &mu, eps, args.max_level));
    if let Some(p) = &probe {
        let rows: Vec<Vec<f64>> = p
            .iter()
            .map(|e| vec![e.level as f64, e.scale, e.squares as f64, e.max_modulus])
            .collect();
        out.write(
            "probe.csv",
            &table_csv("level,scale,squares,max_modulus", &rows),
        )?;
    }
    out.write_json("report.json", &VerifyReport { weighted, probe })?;
    let config = VerifyConfig {
        measure: args.measure.display().to_string(),
        weight: args.weight.as_ref().map(|p| p.display().to_string()),
        max_level: args.max_level,
        probe_eps: args.probe_eps,
    };
    out.finish("verify", &config)?;
    Ok(Outcome::Certified)
}

#[derive(Serialize)]
struct SharpnessConfig {
    omega: String,
    rings: u32,
    weight: Option<String>,
    max_level: u32,
}

#[derive(Serialize)]
struct RingSummary {
    k: u32,
    height: f64,
    atoms: u64,
    level: Option<u32>,
    ratio: Option<f64>,
    /// `1 / omega(h_k)`.
    closed_form: f64,
}

#[derive(Serialize)]
struct SharpnessReport {
    spec: BlowupSpec,
    total_mass: f64,
    rings: Vec<RingSummary>,
    entries: Vec<carleson_core::verification::BlowupEntry>,
}

pub fn sharpness(args: SharpnessArgs) -> Result<Outcome> {
    if !(1..=3).contains(&args.rings) {
        bail!("--rings must be 1, 2 or 3");
    }
    let (omega, table) = parse_omega(&args.omega)?;
    let spec = BlowupSpec::standard(omega, args.rings);
    spec.validate()?;
    let deepest = args.rings.pow(3);
    let max_level = args.max_level.unwrap_or(deepest);
    if max_level > 40 {
        bail!("--max-level {max_level} exceeds 40");
    }
    let mut out = OutputDir::create(&args.out)?;
    if let Some(t) = &table {
        out.input(t)?;
    }
    let e: Box<dyn Modulus> = match &args.weight {
        Some(p) => {
            out.input(p)?;
            Box::new(OuterFunction::new(read_grid_csv(p)?))
        }
        None => Box::new(ConstantModulus(1.0)),
    };
    let mu = blowup_measure(&spec)?;
    let total_mass = mu.total_mass();
    let entries = blowup_ratio(e.as_ref(), &spec, &mu, max_level)?;
    drop(mu);
    let rings = spec
        .rings
        .iter()
        .map(|r| {
            let level = r.level();
            RingSummary {
                k: r.k,
                height: r.height,
                atoms: r.atoms,
                level,
                ratio: level
                    .and_then(|l| entries.iter().find(|e| e.level == l))
                    .map(|e| e.ratio),
                closed_form: 1.0 / spec.omega.eval(r.height),
            }
        })
        .collect();
    let rows: Vec<_> = entries
        .iter()
        .map(|e| carleson_core::boundary::ScaleValue {
            level: e.level,
            scale: e.scale,
            value: e.ratio,
        })
        .collect();
    out.write("ratios.csv", &level_csv(&rows))?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.scale, r.value)).collect();
    out.write(
        "ratios.svg",
        &svg_plot("int_Q |E| dmu / (l(Q) omega(l(Q)))", "ratio", &pts),
    )?;
    out.write_json(
        "report.json",
        &SharpnessReport {
            spec: spec.clone(),
            total_mass,
            rings,
            entries,
        },
    )?;
    let config = SharpnessConfig {
        omega: args.omega.clone(),
        rings: args.rings,
        weight: args.weight.as_ref().map(|p| p.display().to_string()),
        max_level,
    };
    out.finish("sharpness", &config)?;
    Ok(Outcome::Certified)
}

#[derive(Serialize)]
struct WolffConfig {
    input: Option<String>,
    fixture: Option<BoundaryFixture>,
    depth: u32,
    eps: EpsChoice,
}

pub fn fixture_function(fixture: BoundaryFixture, depth: u32) -> Result<GridFunction> {
    Ok(match fixture {
        BoundaryFixture::Step => {
            GridFunction::from_fn(
                depth,
                |t| if (0.25..0.75).contains(&t) { 1.0 } else { -1.0 },
            )?
        }
        BoundaryFixture::Cos => {
            GridFunction::from_fn(depth, |t| (std::f64::consts::TAU * t).cos())?
        }
    })
}

pub fn wolff(args: WolffArgs) -> Result<Outcome> {
    let eps_choice = EpsChoice::parse(&args.eps)?;
    let mut out = OutputDir::create(&args.out)?;
    let f = match &args.input {
        Some(p) => {
            out.input(p)?;
            read_grid_csv(p)?
        }
        None => {
            check_depth(args.depth)?;
            fixture_function(args.fixture, args.depth)?
        }
    };
    check_depth(f.depth())?;
    let mass = gradient_measure(&f)?.total_mass();
    let eps = eps_choice.schedule(mass)?;
    let report = wolff_tame(&f, &eps)?;
    out.write("log_E.csv", &grid_csv(report.outer().log_modulus()))?;
    out.write("modulus.csv", &level_csv(&report.modulus))?;
    let pts: Vec<(f64, f64)> = report.modulus.iter().map(|r| (r.scale, r.value)).collect();
    out.write(
        "modulus.svg",
        &svg_plot("oscillation of E f per scale", "mean oscillation", &pts),
    )?;
    out.write_json("report.json", &report)?;
    let config = WolffConfig {
        input: args.input.as_ref().map(|p| p.display().to_string()),
        fixture: args.input.is_none().then_some(args.fixture),
        depth: f.depth(),
        eps: eps_choice,
    };
    out.finish("wolff", &config)?;
    Ok(outcome(
        report.construction.holds(),
        "construction certificate failed",
    ))
}

#[derive(Serialize)]
struct VolterraConfig {
    symbol: Symbol,
    n: Vec<u32>,
    depth: u32,
    taming: Taming,
    eps: EpsChoice,
    max_level: u32,
}

fn sampler(symbol: &Symbol) -> Box<dyn AnalyticSampler> {
    match symbol {
        Symbol::LogSeries { terms } => Box::new(Polynomial::log_series(*terms)),
        Symbol::Monomial { k } => Box::new(Monomial(*k)),
        Symbol::Constant { value } => Box::new(Polynomial::constant(*value)),
    }
}

fn volterra_rows(entries: &[VolterraEntry]) -> Vec<Vec<f64>> {
    entries
        .iter()
        .map(|e| vec![e.n as f64, e.sup_norm_est, e.seminorm])
        .collect()
}

pub fn volterra(args: VolterraArgs) -> Result<Outcome> {
    check_depth(args.depth)?;
    let symbol = Symbol::parse(&args.symbol)?;
    let eps_choice = EpsChoice::parse(&args.eps)?;
    let max_level = args.max_level.unwrap_or(args.depth - 3);
    if max_level > args.depth - 3 || max_level > 24 {
        bail!("--max-level {max_level} exceeds min(depth - 3, 24)");
    }
    if args.n.is_empty() {
        bail!("--n needs at least one exponent");
    }
    let g = sampler(&symbol);
    let mut out = OutputDir::create(&args.out)?;
    let mut holds = true;
    let e: Box<dyn Modulus> = match args.taming {
        Taming::Construct => {
            let nu = derivative_measure(g.as_ref(), args.depth - 3)?;
            let eps = eps_choice.schedule(nu.total_mass())?;
            let c = construct_a(&nu, &eps, args.depth)
                .context("building E from the derivative measure of G")?;
            holds = c.holds();
            out.write("log_E.csv", &grid_csv(c.outer().log_modulus()))?;
            out.write_json("artifacts.json", &c)?;
            Box::new(c.outer().clone())
        }
        Taming::None => Box::new(ConstantModulus(1.0)),
    };
    let report = volterra_demo(
        &args.symbol,
        g.as_ref(),
        e.as_ref(),
        &Polynomial::constant(1.0),
        &args.n,
        max_level,
    )?;
    out.write(
        "volterra.csv",
        &table_csv("n,sup_norm_est,seminorm", &volterra_rows(&report.entries)),
    )?;
    out.write(
        "probe.csv",
        &table_csv("n,sup_norm_est,seminorm", &volterra_rows(&report.probe)),
    )?;
    out.write_json("report.json", &report)?;
    let config = VolterraConfig {
        symbol,
        n: args.n.clone(),
        depth: args.depth,
        taming: args.taming,
        eps: eps_choice,
        max_level,
    };
    out.finish("volterra", &config)?;
    Ok(outcome(holds, "construction certificate failed"))
}
