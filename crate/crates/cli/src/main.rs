//! Command-line front end for the z2cover engine.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use z2cover::census::{census, CensusError};
use z2cover::classify::{classify, cremona_reduce, ClassifyError};
use z2cover::config::{self, ConfigErrors};
use z2cover::cover::{check_prod_relations, derive_building_data, is_totally_ramified, CoverError, CoverModel};
use z2cover::invariants::report;
use z2cover::normalize::{normalize, resolve};

const MAX_ROUNDS: usize = 32;

#[derive(Parser, Debug)]
#[command(name = "z2cover", version, about = "Z_2^r covers of the plane: validation, resolution, invariants, classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check total ramification, parity and the product relations
    Validate(Input),
    /// Print the normalized document
    Normalize(Input),
    /// Blow up singular points until the model is smooth; print the trail and the result
    Resolve(Input),
    /// chi, K^2, bicanonical class and rationality verdict of the resolved model
    Invariants(Input),
    /// Label of the normalized model
    Classify(Input),
    /// Apply the reduction moves of the matched family; print the trail and the result
    Reduce(Input),
    /// Table of conic-bundle shapes
    Census {
        /// Rank r of the group (2, 3 or 4)
        #[arg(long, short = 'r')]
        rank: u8,
        /// Largest curve degree (at most 7)
        #[arg(long)]
        max_degree: i64,
    },
}

#[derive(clap::Args, Debug)]
struct Input {
    /// Configuration file
    #[arg(long, short = 'i')]
    input: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Tsv,
}

/// A failure with a stable code and an exit status.
#[derive(Debug, PartialEq, Eq)]
struct Failure {
    code: &'static str,
    status: u8,
    message: String,
}

impl Failure {
    fn new(code: &'static str, status: u8, message: impl Into<String>) -> Self {
        Self { code, status, message: message.into() }
    }
}

// exit statuses
const IO: u8 = 1;
const INPUT: u8 = 3;
const INVALID: u8 = 4;
const COMPUTE: u8 = 5;
const CLASSIFY: u8 = 6;

impl From<ConfigErrors> for Failure {
    fn from(e: ConfigErrors) -> Self {
        let code = e.0.first().map_or("E-SYNTAX", |x| x.code.as_str());
        Failure::new(code, INPUT, e.to_string())
    }
}

impl From<CoverError> for Failure {
    fn from(e: CoverError) -> Self {
        let (code, status) = match &e {
            CoverError::Parity { .. } => ("E-PARITY", INVALID),
            CoverError::Invalid(_) | CoverError::Group(_) | CoverError::Lattice(_) => ("E-INVALID", INVALID),
            CoverError::Domain(_) => ("E-DOMAIN", INVALID),
            CoverError::Inconsistent(_) => ("E-INCONSISTENT", INVALID),
            CoverError::Precondition(_) => ("E-PRECONDITION", COMPUTE),
            CoverError::NonTermination { .. } => ("E-NONTERMINATION", COMPUTE),
        };
        Failure::new(code, status, e.to_string())
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        let code = match &e {
            ClassifyError::Cover(inner) => return inner.clone().into(),
            ClassifyError::RankTooSmall(_) => "E-RANK",
            ClassifyError::NotTotallyRamified => "E-NOT-TOTALLY-RAMIFIED",
            ClassifyError::NotNormalized => "E-PRECONDITION",
            ClassifyError::NotPlaneModel => "E-PRECONDITION",
            ClassifyError::NotConicBundle(_) => "E-NOT-CONIC-BUNDLE",
            ClassifyError::NoMatch(_) => "E-NO-MATCH",
            ClassifyError::Ambiguous(_) => "E-AMBIGUOUS",
            ClassifyError::Reduction(_) => "E-REDUCTION",
        };
        Failure::new(code, CLASSIFY, e.to_string())
    }
}

impl From<CensusError> for Failure {
    fn from(e: CensusError) -> Self {
        match e {
            CensusError::Bounds(_) => Failure::new("E-BOUNDS", INPUT, e.to_string()),
            _ => Failure::new("E-CENSUS", COMPUTE, e.to_string()),
        }
    }
}

fn load(input: &Input) -> Result<CoverModel, Failure> {
    let text = std::fs::read_to_string(&input.input)
        .map_err(|e| Failure::new("E-IO", IO, format!("{}: {e}", input.input.display())))?;
    Ok(config::parse(&text)?)
}

fn pairs(format: Format, rows: &[(&str, String)]) -> String {
    let sep = if format == Format::Tsv { "\t" } else { "=" };
    rows.iter().map(|(k, v)| format!("{k}{sep}{v}\n")).collect()
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Validate(input) => {
            let m = load(input)?;
            m.validate_structure()?;
            if !is_totally_ramified(&m) {
                return Err(Failure::new("E-NOT-TOTALLY-RAMIFIED", INVALID, "not totally ramified"));
            }
            let building = derive_building_data(&m)?;
            let prod = check_prod_relations(&m, &building)?;
            if !prod.is_ok() {
                return Err(Failure::new(
                    "E-PROD",
                    INVALID,
                    format!("product relations fail: {}", prod.failing_rows.join("; ")),
                ));
            }
            let mut rows: Vec<(String, String)> = vec![("status".into(), "valid".into()), ("r".into(), m.r.to_string())];
            rows.extend(building.iter().filter(|(c, _)| !c.is_zero()).map(|(c, l)| (format!("L{c}"), l.to_string())));
            let rows: Vec<(&str, String)> = rows.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            Ok(pairs(format, &rows))
        }
        Command::Normalize(input) => Ok(config::serialize(&normalize(&load(input)?)?)),
        Command::Resolve(input) => {
            let res = resolve(&load(input)?, MAX_ROUNDS)?;
            let mut out = String::new();
            if format == Format::Tsv {
                out.push_str("round\tcenter\tchange\n");
                for step in &res.trail {
                    for d in &step.diff {
                        let _ = writeln!(out, "{}\t{}\t{d}", step.round, step.center);
                    }
                }
                return Ok(out);
            }
            let _ = writeln!(out, "# rounds: {}", res.rounds);
            for step in &res.trail {
                let _ = writeln!(out, "# round {}: blow up {}", step.round, step.center);
                for d in &step.diff {
                    let _ = writeln!(out, "#   {d}");
                }
            }
            out.push_str(&config::serialize(&res.model));
            Ok(out)
        }
        Command::Invariants(input) => {
            let res = resolve(&load(input)?, MAX_ROUNDS)?;
            let rep = report(&res.model)?;
            Ok(pairs(
                format,
                &[
                    ("chi", rep.chi.to_string()),
                    ("k2", rep.k_squared.to_string()),
                    ("bicanonical", rep.bicanonical.to_string()),
                    ("verdict", rep.verdict.to_string()),
                    ("surface", rep.surface),
                ],
            ))
        }
        Command::Classify(input) => {
            let m = normalize(&load(input)?)?;
            Ok(format!("{}\n", classify(&m)?))
        }
        Command::Reduce(input) => {
            let m = normalize(&load(input)?)?;
            let (out_model, trail) = cremona_reduce(&m)?;
            let mut out = String::new();
            let _ = writeln!(out, "# moves: {}", trail.len());
            for t in &trail {
                let _ = writeln!(out, "# {t}");
            }
            out.push_str(&config::serialize(&out_model));
            Ok(out)
        }
        Command::Census { rank, max_degree } => {
            let c = census(*rank, *max_degree)?;
            Ok(match format {
                Format::Tsv => c.to_tsv(),
                Format::Text => c.to_string(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(f.status)
        }
    }
}
