use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use modcurves::arith::rat;
use modcurves::collector::{cells_for, dedup_conjugates, search, Twist};
use modcurves::curvefit::{all_residuals, certify, fit_newform, genus_budget, BasisChange, FitOutcome, FitResult, Verdict};
use modcurves::hyperelliptic::{format_poly, frobenius_poly, parse_poly, GenusTwoCurve};
use modcurves::ingest::fields::record_lines;
use modcurves::ingest::records::{format_certificate, DimsRecord, NewformRecord};
use modcurves::ingest::source::{fetch_coefficients, CoefficientSource};
use modcurves::ingest::tables::{bundled_tables, find_row, load_tables};
use modcurves::pipeline::{parse_solutions, run_sieves, Branch, ConductorTable};
use modcurves::Error;

/// Exit statuses.
mod status {
    pub const CHECK_FAILED: u8 = 1;
    pub const BAD_INPUT: u8 = 3;
    pub const SOURCE: u8 = 4;
    pub const INDETERMINATE: u8 = 5;
}

#[derive(Parser)]
#[command(name = "modcurves", version, about = "Genus-two curves attached to weight-2 newforms with quadratic coefficients")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the search in the cells of one field, program and n0.
    Collect {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// none, or the order of the Nebentypus (1, 2, 3, 4, 6).
        #[arg(long)]
        twist: Twist,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=3))]
        n0: u32,
        /// Precision; 16 for sextics and 22 for quintics by default.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Sieve a stream of solutions.
    Sieve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        branch: Branch,
        #[arg(long)]
        conductors: Option<PathBuf>,
        /// Write the report as TSV here as well.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the surviving solutions here.
        #[arg(long)]
        survivors: Option<PathBuf>,
    },
    /// Fit y^2 = P(x) to a table row or a newform record.
    #[command(group(ArgGroup::new("what").required(true).args(["row", "newform"])))]
    Fit {
        #[arg(long)]
        row: Option<String>,
        #[arg(long)]
        newform: Option<PathBuf>,
        /// Label of the record to use when the file holds several.
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        m: Option<u64>,
    },
    /// Check a fitted model against the genus budget.
    Certify {
        #[arg(long)]
        newform: PathBuf,
        #[arg(long)]
        label: Option<String>,
        /// `bundled`, a directory of <N>.tsv files or an http(s) base URL.
        #[arg(long)]
        coeffs: String,
        #[arg(long)]
        dims: Option<PathBuf>,
    },
    /// Frobenius polynomial of y^2 = P(x) at p.
    Zeta {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        p: u64,
    },
    /// Refit every row of the tables.
    Reproduce {
        #[arg(long)]
        tables: Option<PathBuf>,
    },
}

struct Failure {
    status: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::SourceUnreachable(_) | Error::NotFound(_) => status::SOURCE,
            _ => status::BAD_INPUT,
        };
        Failure { status, msg: e.to_string() }
    }
}

fn fail(status: u8, msg: impl Into<String>) -> Failure {
    Failure { status, msg: msg.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(status::BAD_INPUT, format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("modcurves: {}", f.msg);
            ExitCode::from(f.status)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Collect { d, twist, n0, m } => collect(d, twist, n0, m),
        Cmd::Sieve { input, branch, conductors, report, survivors } => sieve(&input, branch, conductors.as_deref(), report.as_deref(), survivors.as_deref()),
        Cmd::Fit { row, newform, label, m } => fit(row.as_deref(), newform.as_deref(), label.as_deref(), m),
        Cmd::Certify { newform, label, coeffs, dims } => certify_cmd(&newform, label.as_deref(), &coeffs, dims.as_deref()),
        Cmd::Zeta { curve, p } => zeta(&curve, p),
        Cmd::Reproduce { tables } => reproduce(tables.as_deref()),
    }
}

fn collect(d: i64, twist: Twist, n0: u32, m: Option<u64>) -> Result<(), Failure> {
    if !twist.fields(n0).contains(&d) {
        return Err(fail(status::BAD_INPUT, format!("d = {d} is not searched by the {twist} program with n0 = {n0}")));
    }
    let mut all = Vec::new();
    for cell in cells_for(d, twist, n0) {
        let found = search(&cell, m.unwrap_or(cell.default_m()));
        eprintln!("{cell}: {}", found.len());
        all.extend(found);
    }
    for s in dedup_conjugates(all) {
        println!("{s}");
    }
    Ok(())
}

fn sieve(input: &Path, branch: Branch, conductors: Option<&Path>, report: Option<&Path>, survivors: Option<&Path>) -> Result<(), Failure> {
    let solutions = parse_solutions(&read(input)?)?;
    let table = match conductors {
        Some(p) => ConductorTable::load(p)?,
        None => ConductorTable::bundled(),
    };
    let (rep, surv) = run_sieves(&solutions, branch, &table);
    print!("{rep}");
    if let Some(p) = report {
        std::fs::write(p, rep.to_tsv()).map_err(|e| fail(status::BAD_INPUT, format!("{}: {e}", p.display())))?;
    }
    if let Some(p) = survivors {
        let text: String = surv.iter().map(|s| format!("{s}\n")).collect();
        std::fs::write(p, text).map_err(|e| fail(status::BAD_INPUT, format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn load_newform(path: &Path, label: Option<&str>) -> Result<NewformRecord, Failure> {
    let text = read(path)?;
    let mut recs = Vec::new();
    for (n, line) in record_lines(&text) {
        if line.starts_with("newform\t") {
            recs.push(NewformRecord::parse(line, n)?);
        }
    }
    let found = match label {
        Some(l) => recs.into_iter().find(|r| r.label == l),
        None => recs.into_iter().next(),
    };
    found.ok_or_else(|| fail(status::BAD_INPUT, format!("{}: no matching newform record", path.display())))
}

fn print_fit(fit: &FitResult) {
    println!("y^2 = {}", fit.p);
    match fit.n0 {
        Some(n0) => println!("n0 = {n0}, degree {}", fit.p.deg()),
        None => println!("degree {}", fit.p.deg()),
    }
    let zero = all_residuals(fit).iter().take_while(|b| **b == rat(0)).count();
    println!("residuals b_1..b_{zero} vanish (precision {})", fit.residual_prec);
}

fn fit_outcome(outcome: FitOutcome) -> Result<FitResult, Failure> {
    match outcome {
        FitOutcome::Curve(f) => Ok(f),
        FitOutcome::Inconsistent { order } => Err(fail(status::CHECK_FAILED, format!("no relation y^2 = P(x): b_{order} cannot be cancelled"))),
        FitOutcome::Singular { p } => Err(fail(status::CHECK_FAILED, format!("the relation y^2 = {p} is not a genus-two curve"))),
    }
}

fn fit(row: Option<&str>, newform: Option<&Path>, label: Option<&str>, m: Option<u64>) -> Result<(), Failure> {
    let fit = match (row, newform) {
        (Some(label), _) => {
            let rows = bundled_tables();
            let row = find_row(&rows, label).ok_or_else(|| fail(status::BAD_INPUT, format!("no table row {label}")))?;
            let nf = row.newform()?;
            fit_outcome(fit_newform(&nf.spec, m.unwrap_or(16), &BasisChange::for_field(row.d))?)?
        }
        (None, Some(path)) => {
            let rec = load_newform(path, label)?;
            let nf = rec.validate()?;
            let m = m.unwrap_or(nf.spec.prime_bound());
            fit_outcome(fit_newform(&nf.spec, m, &BasisChange::for_field(rec.d))?)?
        }
        (None, None) => unreachable!("clap requires one of --row, --newform"),
    };
    print_fit(&fit);
    Ok(())
}

fn certify_cmd(newform: &Path, label: Option<&str>, coeffs: &str, dims: Option<&Path>) -> Result<(), Failure> {
    let rec = load_newform(newform, label)?;
    let nf = rec.validate()?;
    let fit = fit_outcome(fit_newform(&nf.spec, nf.spec.prime_bound(), &BasisChange::for_field(rec.d))?)?;

    let source = CoefficientSource::from_descriptor(coeffs);
    let fetched = fetch_coefficients(&source, rec.level, Some(&rec.eps), u64::MAX)?;
    let agrees = |r: &NewformRecord| r.d == rec.d && rec.ap.iter().all(|(p, a)| r.ap.get(p).is_none_or(|b| a == b));
    let full = fetched
        .iter()
        .find(|r| r.label == rec.label && agrees(r))
        .or_else(|| fetched.iter().find(|r| agrees(r)))
        .ok_or_else(|| fail(status::SOURCE, format!("{}: no newform at level {} agrees with {}", coeffs, rec.level, rec.label)))?;
    let spec = full.validate()?.spec.with_level(rec.level);

    let dims = match dims {
        Some(p) => {
            let text = read(p)?;
            let mut found = None;
            for (n, line) in record_lines(&text) {
                let d = DimsRecord::parse(line, n)?;
                if d.level == rec.level && d.eps == rec.eps {
                    found = Some(d.dims);
                }
            }
            found
        }
        None => None,
    };
    let budget = genus_budget(rec.level, &spec.character, dims.as_deref());
    let cert = certify(&rec.label, &spec, &fit, budget)?;
    println!("{}", format_certificate(&cert));
    eprintln!("{cert}");
    match cert.verdict {
        Verdict::Verified => Ok(()),
        Verdict::Failed { order } => Err(fail(status::CHECK_FAILED, format!("{}: b_{order} is nonzero", rec.label))),
        Verdict::Indeterminate => Err(fail(status::INDETERMINATE, format!("{}: {} coefficients needed, {} available", rec.label, cert.budget, cert.coefficients_available))),
    }
}

fn zeta(curve: &str, p: u64) -> Result<(), Failure> {
    let c = GenusTwoCurve::new(&parse_poly(curve)?)?;
    let data = frobenius_poly(&c, p)?;
    println!("{}", format_poly(&data.quartic(), "t"));
    println!("#C(F_{p}) = {}, #C(F_{p}^2) = {}", data.counts.0, data.counts.1);
    Ok(())
}

fn reproduce(tables: Option<&Path>) -> Result<(), Failure> {
    let rows = match tables {
        Some(p) => load_tables(p)?,
        None => bundled_tables(),
    };
    let mut bad = 0;
    for row in &rows {
        let result = row.validate().and_then(|_| row.fit(16));
        let msg = match result {
            Ok(fit) if fit.p != row.poly() => Some(format!("refit gives y^2 = {}", fit.p)),
            Ok(fit) if !all_residuals(&fit).iter().all(|b| *b == rat(0)) => Some("residuals do not vanish".to_string()),
            Ok(_) => None,
            Err(e) => Some(e.to_string()),
        };
        if let Some(m) = msg {
            bad += 1;
            println!("FAIL {}: {m}", row.label);
        }
    }
    println!("{}/{} rows reproduced", rows.len() - bad, rows.len());
    if bad > 0 {
        return Err(fail(status::CHECK_FAILED, format!("{bad} rows failed")));
    }
    Ok(())
}
