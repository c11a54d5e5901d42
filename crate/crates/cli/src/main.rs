//! Command-line front end: parse a problem file, run the requested
//! computation, print a JSON report to stdout (diagnostics to stderr).
//!
//! Exit codes: 0 pass, 1 input error, 2 mathematically negative result
//! (unsolvable / falsified), 3 resource or precision limit.

mod report;

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::Deserialize;

use pdensity_core::charsum::{
    attainment_search, recommended_precision, verify_bound, verify_congruence, Evaluator,
    LaurentPolynomial,
};
use pdensity_core::density::{density, practical_lower_bound, sigma_at_level};
use pdensity_core::exponent_system::ProblemSpec;
use pdensity_core::lfunction::{build_series, detect_and_reconstruct, reconstruct_rational, verify_mu};
use pdensity_core::solvability;
use pdensity_core::{Budgets, Error};

use report::*;

#[derive(Parser)]
#[command(name = "pdensity", version, about = "Exact p-densities and valuations of twisted exponential sums over finite fields")]
struct Cli {
    /// Compact single-line JSON (default is pretty-printed)
    #[arg(long, global = true)]
    json: bool,
    /// Force the p-adic working precision K
    #[arg(long, global = true)]
    precision: Option<usize>,
    /// Cap enumeration budgets (candidates and sum points)
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Seed for randomized search order in `verify --attain`
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether any level has solutions; print the generator
    Solvable(FileArg),
    /// Compute the p-density with its attainment certificate
    Density(FileArg),
    /// Compute σ(D, q^ℓ, b_ℓ) at one level
    Sigma(EllArg),
    /// Evaluate S_ℓ(F,b) exactly in the tower
    Sum(EllArg),
    /// Run the full verification pipeline
    Verify(VerifyArg),
    /// Build the L-series and reconstruct the rational function
    Lfunction(LfunArg),
}

#[derive(Args)]
struct FileArg {
    /// Problem file path, or `-` for stdin
    #[arg(default_value = "-")]
    file: String,
}

#[derive(Args)]
struct EllArg {
    #[arg(long)]
    ell: usize,
    #[arg(default_value = "-")]
    file: String,
}

#[derive(Args)]
struct VerifyArg {
    /// Search for attaining coefficients when none are given
    #[arg(long)]
    attain: bool,
    /// Also reconstruct the L-function
    #[arg(long)]
    lfunction: bool,
    #[arg(long)]
    num_deg: Option<usize>,
    #[arg(long)]
    den_deg: Option<usize>,
    #[arg(default_value = "-")]
    file: String,
}

#[derive(Args)]
struct LfunArg {
    #[arg(long)]
    num_deg: Option<usize>,
    #[arg(long)]
    den_deg: Option<usize>,
    /// Series length L (number of S_ℓ to evaluate)
    #[arg(long)]
    length: Option<usize>,
    #[arg(default_value = "-")]
    file: String,
}

/// The JSON problem file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    p: u64,
    f: u32,
    #[serde(default)]
    m: Option<usize>,
    exponents: Vec<Vec<i64>>,
    twist: Vec<u64>,
    /// Coordinate lists over F_p, e.g. "1" or "2,0,1", one per monomial.
    #[serde(default)]
    coefficients: Option<Vec<String>>,
    #[serde(default)]
    ell: Option<usize>,
    #[serde(default, rename = "L")]
    length: Option<usize>,
    #[serde(default)]
    precision: Option<usize>,
    #[serde(default)]
    budgets: Option<BudgetsFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetsFile {
    #[serde(default)]
    enum_candidates: Option<u64>,
    #[serde(default)]
    graph_states: Option<u64>,
    #[serde(default)]
    edge_enum: Option<u64>,
    #[serde(default)]
    sum_points: Option<u64>,
    #[serde(default)]
    field_order: Option<u64>,
    #[serde(default)]
    dlog_table: Option<u64>,
}

struct Loaded {
    spec: ProblemSpec,
    poly: Option<LaurentPolynomial>,
    ell: Option<usize>,
    length: Option<usize>,
    precision: Option<usize>,
    budgets: Budgets,
}

fn load(path: &str, cli: &Cli) -> Result<Loaded, CliError> {
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::input(format!("reading stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("reading {path}: {e}")))?
    };
    let file: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("problem file: {e}")))?;

    if let Some(m) = file.m {
        if m != file.twist.len() {
            return Err(CliError::input(format!(
                "field m = {m} does not match twist length {}",
                file.twist.len()
            )));
        }
    }
    let exponents: Vec<Vec<BigInt>> = file
        .exponents
        .iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let twist: Vec<BigUint> = file.twist.iter().map(|&x| BigUint::from(x)).collect();
    let spec = ProblemSpec::new(file.p, file.f, exponents, twist)
        .map_err(|e| CliError::input(format!("problem file: {e}")))?;

    let poly = match &file.coefficients {
        None => None,
        Some(strings) => {
            if strings.len() != spec.n() {
                return Err(CliError::input(format!(
                    "{} coefficients for {} monomials",
                    strings.len(),
                    spec.n()
                )));
            }
            let mut coords = Vec::with_capacity(strings.len());
            for (i, s) in strings.iter().enumerate() {
                let parsed: Result<Vec<u64>, _> = s
                    .trim_matches(|c| c == '[' || c == ']')
                    .split(',')
                    .map(|x| x.trim().parse::<u64>())
                    .collect();
                let c = parsed.map_err(|e| {
                    CliError::input(format!("coefficient {}: {e}", i + 1))
                })?;
                coords.push(c);
            }
            Some(
                LaurentPolynomial::new(spec.clone(), coords)
                    .map_err(|e| CliError::input(format!("coefficients: {e}")))?,
            )
        }
    };

    let mut budgets = Budgets::default();
    if let Some(b) = &file.budgets {
        if let Some(x) = b.enum_candidates {
            budgets.enum_candidates = x as u128;
        }
        if let Some(x) = b.graph_states {
            budgets.graph_states = x as u128;
        }
        if let Some(x) = b.edge_enum {
            budgets.edge_enum = x as u128;
        }
        if let Some(x) = b.sum_points {
            budgets.sum_points = x as u128;
        }
        if let Some(x) = b.field_order {
            budgets.field_order = x as u128;
        }
        if let Some(x) = b.dlog_table {
            budgets.dlog_table = x as u128;
        }
    }
    if let Some(n) = cli.budget {
        budgets.enum_candidates = budgets.enum_candidates.min(n as u128);
        budgets.sum_points = budgets.sum_points.min(n as u128);
    }

    Ok(Loaded {
        spec,
        poly,
        ell: file.ell,
        length: file.length,
        precision: cli.precision.or(file.precision),
        budgets,
    })
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: String) -> CliError {
        CliError { code: 1, message }
    }

    fn negative(message: String) -> CliError {
        CliError { code: 2, message }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_resource() { 3 } else { 1 };
        CliError { code, message: e.to_string() }
    }
}

fn emit<T: serde::Serialize>(value: &T, compact: bool) {
    let s = if compact {
        serde_json::to_string(value).expect("serializable report")
    } else {
        serde_json::to_string_pretty(value).expect("serializable report")
    };
    println!("{s}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Solvable(args) => cmd_solvable(cli, &args.file),
        Command::Density(args) => cmd_density(cli, &args.file),
        Command::Sigma(args) => cmd_sigma(cli, &args.file, args.ell),
        Command::Sum(args) => cmd_sum(cli, &args.file, args.ell),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Lfunction(args) => cmd_lfunction(cli, args),
    }
}

fn cmd_solvable(cli: &Cli, file: &str) -> Result<u8, CliError> {
    let loaded = load(file, cli)?;
    let rep = solvability::report(&loaded.spec)?;
    let out = SolvableOut::from(&rep);
    emit(&out, cli.json);
    Ok(if rep.solvable { 0 } else { 2 })
}

fn cmd_density(cli: &Cli, file: &str) -> Result<u8, CliError> {
    let loaded = load(file, cli)?;
    let cert = density(&loaded.spec, &loaded.budgets)?;
    match cert {
        None => {
            emit(&serde_json::json!({ "solvable": false }), cli.json);
            Err(CliError::negative("system is unsolvable at every level".into()))
        }
        Some(cert) => {
            let bound = practical_lower_bound(&loaded.spec);
            emit(&density_out(&cert, &bound), cli.json);
            Ok(0)
        }
    }
}

fn cmd_sigma(cli: &Cli, file: &str, ell: usize) -> Result<u8, CliError> {
    if ell == 0 {
        return Err(CliError::input("--ell must be >= 1".into()));
    }
    let loaded = load(file, cli)?;
    if loaded.spec.twist_is_zero() {
        let out = SigmaOut {
            ell: ell as u64,
            sigma: Some("0".into()),
            witness: Some(vec!["0".into(); loaded.spec.n()]),
        };
        emit(&out, cli.json);
        return Ok(0);
    }
    let got = sigma_at_level(&loaded.spec, ell, &loaded.budgets)?;
    let out = match &got {
        None => SigmaOut { ell: ell as u64, sigma: None, witness: None },
        Some((sigma, witness)) => SigmaOut {
            ell: ell as u64,
            sigma: Some(sigma.to_string()),
            witness: Some(witness.entries().iter().map(big_string).collect()),
        },
    };
    emit(&out, cli.json);
    Ok(if got.is_some() { 0 } else { 2 })
}

fn require_poly(loaded: &Loaded) -> Result<LaurentPolynomial, CliError> {
    loaded.poly.clone().ok_or_else(|| {
        CliError::input("this command needs `coefficients` in the problem file".into())
    })
}

fn cmd_sum(cli: &Cli, file: &str, ell: usize) -> Result<u8, CliError> {
    if ell == 0 {
        return Err(CliError::input("--ell must be >= 1".into()));
    }
    let loaded = load(file, cli)?;
    let poly = require_poly(&loaded)?;
    let mut evaluator = Evaluator::new(poly, &loaded.budgets)?;
    let precision = loaded
        .precision
        .unwrap_or_else(|| recommended_precision(loaded.spec.p(), 16));
    let result = evaluator.evaluate(ell, precision)?;
    emit(&sum_out(&result), cli.json);
    Ok(0)
}

fn default_verify_levels(spec: &ProblemSpec, budgets: &Budgets, generator: &BigUint) -> usize {
    // default horizon 2·ℓ₀ capped by the sum budget
    let m = spec.m() as u32;
    let mut ell = generator.to_usize().unwrap_or(usize::MAX).saturating_mul(2);
    while ell >= 1 {
        if let Some(points) = spec
            .q_pow(ell)
            .to_u128()
            .and_then(|q| (q - 1).checked_pow(m))
        {
            if points <= budgets.sum_points {
                break;
            }
        }
        ell -= 1;
    }
    ell.max(1)
}

fn cmd_verify(cli: &Cli, args: &VerifyArg) -> Result<u8, CliError> {
    let loaded = load(&args.file, cli)?;
    let spec = loaded.spec.clone();
    let budgets = loaded.budgets.clone();

    let solv = solvability::report(&spec)?;
    let solvable_out = SolvableOut::from(&solv);

    // coefficients: given, searched, or an input error
    let (poly, attainment) = match (&loaded.poly, args.attain) {
        (Some(p), _) => (p.clone(), None),
        (None, true) => {
            if !solv.solvable {
                return Err(CliError::negative(
                    "attainment search requested on an unsolvable system".into(),
                ));
            }
            let found = attainment_search(&spec, &budgets, cli.seed)?;
            let out = AttainmentOut {
                coefficients: found.poly.coeffs().to_vec(),
                sigma: found.sigma,
                v_pi: found.v_pi,
                candidates_tried: found.candidates_tried,
            };
            (found.poly, Some(out))
        }
        (None, false) => {
            return Err(CliError::input(
                "verify needs `coefficients` in the file or --attain".into(),
            ))
        }
    };

    let cert = density(&spec, &budgets)?;
    let mut evaluator = Evaluator::new(poly, &budgets)?;
    let mut all_pass = true;

    let horizon = loaded.ell.unwrap_or_else(|| match (&cert, &solv.generator) {
        (Some(_), Some(g)) => default_verify_levels(&spec, &budgets, g),
        _ => 2,
    });

    let mut levels = Vec::new();
    for ell in 1..=horizon {
        let precision = loaded
            .precision
            .unwrap_or_else(|| recommended_precision(spec.p(), 16));
        let sum = evaluator.evaluate(ell, precision)?;
        let bound = match &cert {
            None => None,
            Some(cert) => {
                let rep = verify_bound(&mut evaluator, cert, ell)?;
                all_pass &= rep.holds;
                Some(bound_out(&rep))
            }
        };
        let congruence = match verify_congruence(&mut evaluator, ell) {
            Ok(rep) => {
                all_pass &= rep.holds;
                if rep.unit_nonzero == Some(true) {
                    all_pass &= rep.exact_valuation == Some(true);
                }
                Some(congruence_out(&rep))
            }
            Err(e) if e.is_resource() => None,
            Err(e) => return Err(e.into()),
        };
        levels.push(VerifyLevelOut { ell: ell as u64, sum: sum_out(&sum), bound, congruence });
    }

    let (lfun, mu) = if args.lfunction {
        let length = loaded.length.unwrap_or(4);
        let precision = loaded
            .precision
            .unwrap_or_else(|| recommended_precision(spec.p(), 24) + length);
        let series = build_series(&mut evaluator, length, precision)?;
        let ring = evaluator.ring().clone();
        let result = match (args.num_deg, args.den_deg) {
            (Some(s), Some(t)) => reconstruct_rational(&ring, &series, s, t)?,
            _ => detect_and_reconstruct(&ring, &series, 8)?,
        };
        let mu = cert.as_ref().map(|c| {
            let rep = verify_mu(&result, c);
            all_pass &= rep.holds;
            mu_out(&rep)
        });
        (Some(lfunction_out(&result)), mu)
    } else {
        (None, None)
    };

    let out = VerifyOut {
        solvable: solvable_out,
        density: cert
            .as_ref()
            .map(|c| density_out(c, &practical_lower_bound(&spec))),
        attainment,
        levels,
        lfunction: lfun,
        mu,
        all_pass,
    };
    emit(&out, cli.json);
    if all_pass {
        Ok(0)
    } else {
        Err(CliError::negative("a verified claim failed — falsification".into()))
    }
}

fn cmd_lfunction(cli: &Cli, args: &LfunArg) -> Result<u8, CliError> {
    let loaded = load(&args.file, cli)?;
    let poly = require_poly(&loaded)?;
    let spec = loaded.spec.clone();
    let length = args.length.or(loaded.length).unwrap_or(4);
    let precision = loaded
        .precision
        .unwrap_or_else(|| recommended_precision(spec.p(), 24) + length);
    let mut evaluator = Evaluator::new(poly, &loaded.budgets)?;
    let series = build_series(&mut evaluator, length, precision)?;
    let ring = evaluator.ring().clone();
    let result = match (args.num_deg, args.den_deg) {
        (Some(s), Some(t)) => reconstruct_rational(&ring, &series, s, t)?,
        _ => detect_and_reconstruct(&ring, &series, 8)?,
    };
    emit(&lfunction_out(&result), cli.json);
    Ok(0)
}
