//! Command-line front end: jet algebra, liftability, gauge orbits,
//! Hessian invariants, and family scans over plain-text files.
//!
//! Reports go to standard output as plain text with `#`-prefixed header
//! lines; identical inputs and seed produce byte-identical output.
//! Exit codes: 0 success, 1 failed selftest, 2 contract violation
//! (one line `ERR <CODE>: <message>` on standard error), 3 I/O
//! failure, 4 parse failure.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use pinchjet::acceptance;
use pinchjet::geom::{
    hessian_to_j, j_from_gluing, mu_from_trace, trace_invariant, ComplexStructure2,
    HessianOptions,
};
use pinchjet::germ::{classify_liftable, lift_to_model, LiftClass};
use pinchjet::jet2::Jet2;
use pinchjet::lab::{mu_profile, product_obstruction_report, FdOptions, Obstruction};
use pinchjet::orbit::{
    canonicalize_invariant, equivalent_double_pinched, first_order_invariants, gauge_act,
    normalize_double_pinched, orbit_tangent_rank, Equivalence, GluingTuple, INVARIANT_TOL,
    MU_ZERO_TOL, RANK_REL_TOL,
};
use pinchjet::textio;
use pinchjet::{DiffeoJet, Error};

/// Environment variable overriding the default tolerance for the whole
/// run; an explicit `--tol` still wins.
const TOL_ENV: &str = "PINCHJET_TOL";

/// Write a report fragment to standard output.  A consumer closing the
/// pipe early (`pinchjet ... | head`) ends the run quietly instead of
/// panicking; other write failures exit with the I/O code.
fn emit(args: fmt::Arguments) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_fmt(args) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("ERR IO: stdout: {e}");
        std::process::exit(3);
    }
}

macro_rules! out {
    ($($t:tt)*) => { emit(format_args!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(format_args!("{}\n", format_args!($($t)*))) };
}

#[derive(Parser)]
#[command(
    name = "pinchjet",
    version,
    about = "Jet-level invariants of pinched-torus fibration germs",
    after_help = "Exit codes: 0 success, 1 failed selftest, 2 contract violation, \
                  3 I/O failure, 4 parse failure."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Seed for randomized searches (Hessian null-plane sampling).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Jet order override for `jet` subcommands (inputs are extended or
    /// truncated to this order before the operation).
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Numeric tolerance. Default depends on the subcommand: 1e-9 for
    /// invariant and equivalence gates, 1e-8 for rank thresholds and
    /// Hessian residuals, 1e-6 per profile sample. The PINCHJET_TOL
    /// environment variable overrides those defaults for the whole run.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sample count for family scans.
    #[arg(long, global = true, default_value_t = 11)]
    samples: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Truncated power-series operations on jet files.
    #[command(subcommand)]
    Jet(JetCmd),
    /// Liftability of a jet through the model fibration (u, v) -> u v.
    #[command(subcommand)]
    Germ(GermCmd),
    /// Gauge action, canonical invariants, and normal forms of gluing
    /// tuples.
    #[command(subcommand)]
    Orbit(OrbitCmd),
    /// Complex-structure invariants from Hessian or eigenvalue data.
    #[command(subcommand)]
    Geom(GeomCmd),
    /// Scans of declarative fibration families.
    #[command(subcommand)]
    Lab(LabCmd),
    /// Run the acceptance checklist, one verdict line per criterion.
    Selftest,
}

#[derive(Subcommand)]
enum JetCmd {
    /// Compose two jets: LEFT applied after RIGHT.
    Compose { left: PathBuf, right: PathBuf },
    /// Compositional inverse of an invertible jet.
    Invert { jet: PathBuf },
    /// Complex conjugate of a jet (swaps z and zbar).
    Conj { jet: PathBuf },
}

#[derive(Subcommand)]
enum GermCmd {
    /// Classify divisibility by z or zbar; prints LIFTABLE or
    /// NOT_LIFTABLE.
    Liftable { jet: PathBuf },
    /// Lift a liftable jet to the model space, doubling the order.
    Lift { jet: PathBuf },
}

#[derive(Subcommand)]
enum OrbitCmd {
    /// Apply a gauge tuple to a gluing tuple.
    Act { gauge: PathBuf, tuple: PathBuf },
    /// Canonical first-order invariants of a gluing tuple.
    Invariants { tuple: PathBuf },
    /// Normal form z + mu zbar of a double-pinch tuple.
    Normalize { tuple: PathBuf },
    /// Decide equivalence of two double-pinch tuples with a witness.
    Equiv { left: PathBuf, right: PathBuf },
    /// Orbit, stabilizer, and codimension of the gauge action.
    Rank { tuple: PathBuf },
}

#[derive(Subcommand)]
enum GeomCmd {
    /// Trace pairing and modulus of a double-pinch tuple.
    Trace { tuple: PathBuf },
    /// Recover the base complex structure from a Hessian pair file.
    HessianJ { hessian: PathBuf },
    /// Moebius invariant of two linearization eigenvalues.
    EigenMu { lambda1: String, lambda_i: String },
}

#[derive(Subcommand)]
enum LabCmd {
    /// Modulus profile of a declared family: TSV t, trace, mu, status.
    Profile { family: PathBuf },
    /// Almost-direct-product obstruction verdict from the profile.
    Obstruction { family: PathBuf },
}

/// Failure routed to an exit code: contract violations (2), I/O (3),
/// parse errors (4), plus configuration mistakes reported like
/// contract violations.
enum Failure {
    Contract(Error),
    Config { code: &'static str, message: String },
    Io(PathBuf, std::io::Error),
    Parse(Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Contract(_) | Failure::Config { .. } => 2,
            Failure::Io(..) => 3,
            Failure::Parse(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Contract(e) | Failure::Parse(e) => write!(f, "ERR {}: {e}", e.code()),
            Failure::Config { code, message } => write!(f, "ERR {code}: {message}"),
            Failure::Io(path, e) => write!(f, "ERR IO: {}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Parse(e),
            _ => Failure::Contract(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.cmd {
        Cmd::Jet(c) => jet_cmd(cli, c)?,
        Cmd::Germ(c) => germ_cmd(cli, c)?,
        Cmd::Orbit(c) => orbit_cmd(cli, c)?,
        Cmd::Geom(c) => geom_cmd(cli, c)?,
        Cmd::Lab(c) => lab_cmd(cli, c)?,
        Cmd::Selftest => return Ok(selftest()),
    }
    Ok(ExitCode::SUCCESS)
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.clone(), e))
}

/// Explicit --tol wins, then PINCHJET_TOL, then the subcommand default.
fn resolve_tol(cli: &Cli, default: f64) -> Result<f64, Failure> {
    let value = match cli.tol {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s.trim().parse::<f64>().map_err(|_| Failure::Config {
                code: "BAD_TOLERANCE",
                message: format!("{TOL_ENV} is not a float: {s:?}"),
            })?,
            Err(_) => default,
        },
    };
    if !(value > 0.0) || !value.is_finite() {
        return Err(Failure::Config {
            code: "BAD_TOLERANCE",
            message: format!("tolerance must be a positive float, got {value}"),
        });
    }
    Ok(value)
}

/// Copy a jet to the given order, extending with zeros or dropping the
/// monomials above it.
fn resize(jet: &Jet2, order: usize) -> Result<Jet2, Failure> {
    if order >= jet.order() {
        return Ok(jet.extended(order)?);
    }
    let mut out = Jet2::zero(order)?;
    for (p, q, c) in jet.iter() {
        if p + q <= order {
            out.set(p, q, c);
        }
    }
    Ok(out)
}

fn double_pinch_map(tuple: &GluingTuple, role: &str) -> Result<DiffeoJet, Failure> {
    if tuple.pinches() != 2 {
        return Err(Failure::Config {
            code: "NOT_DOUBLE_PINCH",
            message: format!(
                "{role} must be a double-pinch tuple (n = 2), got n = {}",
                tuple.pinches()
            ),
        });
    }
    Ok(tuple.maps()[0].clone())
}

fn jet_cmd(cli: &Cli, cmd: &JetCmd) -> Result<(), Failure> {
    match cmd {
        JetCmd::Compose { left, right } => {
            let f = textio::parse_jet(&read(left)?)?;
            let g = textio::parse_jet(&read(right)?)?;
            let order = cli.order.unwrap_or(f.order().max(g.order()));
            let f = resize(&f, order)?;
            let g = resize(&g, order)?;
            let out = f.compose(&g)?;
            out!("# jet composition: left applied after right, order {order}\n{}", textio::write_jet(&out));
        }
        JetCmd::Invert { jet } => {
            let f = parse_resized(cli, jet)?;
            let out = DiffeoJet::new(f)?.inverse()?;
            out!(
                "# compositional inverse, order {}\n{}",
                out.order(),
                textio::write_jet(out.jet())
            );
        }
        JetCmd::Conj { jet } => {
            let f = parse_resized(cli, jet)?;
            out!(
                "# complex conjugate jet: z -> conj(f(z)), indices swapped and coefficients conjugated\n{}",
                textio::write_jet(&f.conjugate())
            );
        }
    }
    Ok(())
}

fn parse_resized(cli: &Cli, path: &PathBuf) -> Result<Jet2, Failure> {
    let jet = textio::parse_jet(&read(path)?)?;
    match cli.order {
        Some(k) => resize(&jet, k),
        None => Ok(jet),
    }
}

fn germ_cmd(_cli: &Cli, cmd: &GermCmd) -> Result<(), Failure> {
    match cmd {
        GermCmd::Liftable { jet } => {
            let psi = DiffeoJet::new(textio::parse_jet(&read(jet)?)?)?;
            outln!("# divisibility of the jet by z or zbar: lifts through (u, v) -> u v");
            match classify_liftable(&psi) {
                LiftClass::DivisibleByZ { ambiguous, .. } => {
                    if ambiguous {
                        outln!("LIFTABLE z ambiguous");
                    } else {
                        outln!("LIFTABLE z");
                    }
                }
                LiftClass::DivisibleByZbar { .. } => outln!("LIFTABLE zbar"),
                LiftClass::NotLiftable => outln!("NOT_LIFTABLE"),
            }
        }
        GermCmd::Lift { jet } => {
            let psi = DiffeoJet::new(textio::parse_jet(&read(jet)?)?)?;
            let lift = lift_to_model(&psi)?;
            outln!(
                "# lift (Psi_u, Psi_v) through (u, v) -> u v, components at order {}",
                lift.comp_u.order()
            );
            outln!("# columns: component\te_u\te_ubar\te_v\te_vbar\tre\tim");
            for (name, comp) in [("u", &lift.comp_u), ("v", &lift.comp_v)] {
                for (e, v) in comp.terms() {
                    if v.norm() > 0.0 {
                        outln!("{name}\t{}\t{}\t{}\t{}\t{}\t{}", e[0], e[1], e[2], e[3], v.re, v.im);
                    }
                }
            }
        }
    }
    Ok(())
}

fn orbit_cmd(cli: &Cli, cmd: &OrbitCmd) -> Result<(), Failure> {
    match cmd {
        OrbitCmd::Act { gauge, tuple } => {
            let eta = textio::parse_gauge(&read(gauge)?)?;
            let t = textio::parse_tuple(&read(tuple)?)?;
            let out = gauge_act(&eta, &t)?;
            out!(
                "# gauge-transformed gluing tuple psi_1 o phi_1i o psi_i^-1\n{}",
                textio::write_tuple(&out)
            );
        }
        OrbitCmd::Invariants { tuple } => {
            let t = textio::parse_tuple(&read(tuple)?)?;
            let tol = resolve_tol(cli, INVARIANT_TOL)?;
            let inv = canonicalize_invariant(&first_order_invariants(&t), tol);
            outln!("# canonical first-order invariants mu_i = b_i / conj(a_i) of the gluing tuple");
            outln!("# common rotation and conjugation fixed; columns: i\tRe mu_i\tIm mu_i\t|mu_i|");
            for (i, mu) in inv.mus.iter().enumerate() {
                outln!("{}\t{}\t{}\t{}", i + 2, mu.re, mu.im, mu.norm());
            }
        }
        OrbitCmd::Normalize { tuple } => {
            let t = textio::parse_tuple(&read(tuple)?)?;
            let phi = double_pinch_map(&t, "normalize input")?;
            let norm = normalize_double_pinched(&phi, MU_ZERO_TOL)?;
            let k = phi.order();
            let target = Jet2::variable(k)?.with(0, 1, Complex64::new(norm.mu, 0.0));
            let out = GluingTuple::new(vec![DiffeoJet::new(target)?])?;
            outln!("# double-pinch normal form z + mu zbar reached by liftable conjugation");
            outln!("# mu {}", norm.mu);
            outln!("# residual {}", norm.residual);
            out!("{}", textio::write_tuple(&out));
        }
        OrbitCmd::Equiv { left, right } => {
            let lt = textio::parse_tuple(&read(left)?)?;
            let rt = textio::parse_tuple(&read(right)?)?;
            let phi = double_pinch_map(&lt, "left tuple")?;
            let psi = double_pinch_map(&rt, "right tuple")?;
            let tol = resolve_tol(cli, INVARIANT_TOL)?;
            outln!("# double-pinch equivalence: moduli compared at tolerance {tol}, then witness built");
            match equivalent_double_pinched(&phi, &psi, tol, MU_ZERO_TOL)? {
                Equivalence::Equivalent { witness, residual } => {
                    outln!("EQUIVALENT\tresidual {residual}");
                    outln!("# witness psi1 with psi1 o left o psi2^-1 = right");
                    out!("{}", textio::write_jet(witness.0.jet()));
                    outln!("# witness psi2");
                    out!("{}", textio::write_jet(witness.1.jet()));
                }
                Equivalence::NotEquivalent { mu_left, mu_right } => {
                    outln!("NOT_EQUIVALENT\tmu_left {mu_left}\tmu_right {mu_right}");
                }
                Equivalence::UndecidedMuZero => {
                    outln!("UNDECIDED_MU_ZERO");
                }
            }
        }
        OrbitCmd::Rank { tuple } => {
            let t = textio::parse_tuple(&read(tuple)?)?;
            let tol = resolve_tol(cli, RANK_REL_TOL)?;
            let r = orbit_tangent_rank(&t, tol);
            outln!("# linearized gauge action at the tuple, rank threshold {tol} relative");
            outln!("# columns: orbit_dim\tstab_dim\tcodim\tsv_gap");
            outln!("{}\t{}\t{}\t{:e}", r.orbit_dim, r.stab_dim, r.codim, r.sv_gap);
        }
    }
    Ok(())
}

fn geom_cmd(cli: &Cli, cmd: &GeomCmd) -> Result<(), Failure> {
    match cmd {
        GeomCmd::Trace { tuple } => {
            let t = textio::parse_tuple(&read(tuple)?)?;
            let phi = double_pinch_map(&t, "trace input")?;
            let tr = trace_invariant(&ComplexStructure2::standard(), &j_from_gluing(&phi))?;
            outln!("# trace pairing tr(J2 J1^-1) of the induced structures; mu = sqrt((tr - 2) / (tr + 2))");
            outln!("# columns: trace\tmu");
            outln!("{}\t{}", tr, mu_from_trace(tr));
        }
        GeomCmd::HessianJ { hessian } => {
            let h = textio::parse_hessian(&read(hessian)?)?;
            let opts = HessianOptions {
                seed: cli.seed,
                tol: resolve_tol(cli, HessianOptions::default().tol)?,
                ..Default::default()
            };
            let (j, _) = hessian_to_j(&h, &opts)?;
            let m = j.matrix();
            outln!("# base-plane complex structure recovered from the Hessian pair");
            outln!("# defined up to sign; the fiber-side companion is the negation");
            outln!("# columns: row\tJ[row][0]\tJ[row][1]");
            for row in 0..2 {
                outln!("{row}\t{}\t{}", m[(row, 0)], m[(row, 1)]);
            }
        }
        GeomCmd::EigenMu { lambda1, lambda_i } => {
            let l1 = textio::parse_complex(lambda1)?;
            let li = textio::parse_complex(lambda_i)?;
            let mu = pinchjet::geom::eigen_mu(l1, li)?;
            outln!("# Moebius invariant (lambda_i - lambda_1) / (lambda_i + conj lambda_1)");
            outln!("# columns: Re mu\tIm mu\t|mu|");
            outln!("{}\t{}\t{}", mu.re, mu.im, mu.norm());
        }
    }
    Ok(())
}

fn profile_header() -> &'static str {
    "# modulus profile of the declared two-chart family along its critical curve\n\
     # ambient circle factor suppressed: the invariants are constant along critical orbits"
}

fn lab_cmd(cli: &Cli, cmd: &LabCmd) -> Result<(), Failure> {
    match cmd {
        LabCmd::Profile { family } => {
            let fam = textio::parse_family(&read(family)?)?;
            let hess = HessianOptions { seed: cli.seed, ..Default::default() };
            let rows = mu_profile(&fam, cli.samples, &FdOptions::default(), &hess);
            outln!("{}", profile_header());
            outln!("# columns: t\ttrace\tmu\tstatus");
            for row in rows {
                let num = |v: Option<f64>| match v {
                    Some(x) => x.to_string(),
                    None => "nan".into(),
                };
                outln!("{}\t{}\t{}\t{}", row.t, num(row.trace), num(row.mu), row.status);
            }
        }
        LabCmd::Obstruction { family } => {
            let fam = textio::parse_family(&read(family)?)?;
            let hess = HessianOptions { seed: cli.seed, ..Default::default() };
            let rows = mu_profile(&fam, cli.samples, &FdOptions::default(), &hess);
            let tol = resolve_tol(cli, 1e-6)?;
            outln!("# almost-direct-product obstruction from the modulus spread along the family");
            outln!("# ambient circle factor suppressed: the invariants are constant along critical orbits");
            match product_obstruction_report(&rows, tol)? {
                Obstruction::NotAlmostDirectProduct { low, high, spread, threshold } => {
                    outln!("verdict\tNOT_ALMOST_DIRECT_PRODUCT");
                    outln!("spread\t{spread}");
                    outln!("threshold\t{threshold}");
                    outln!("low_t\t{}\nlow_mu\t{}", low.0, low.1);
                    outln!("high_t\t{}\nhigh_mu\t{}", high.0, high.1);
                }
                Obstruction::ProductConsistent { spread, threshold, caveat } => {
                    outln!("verdict\tPRODUCT_CONSISTENT");
                    outln!("spread\t{spread}");
                    outln!("threshold\t{threshold}");
                    outln!("# caveat: {caveat}");
                }
            }
        }
    }
    Ok(())
}

fn selftest() -> ExitCode {
    let mut all_pass = true;
    for report in acceptance::run_all() {
        outln!("{report}");
        all_pass &= report.pass;
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
