//! `envelope`: analyses of partial ℤ-actions on the Cantor set from a JSON
//! system definition.
//!
//! Exit codes: 0 ok, 1 usage or parse error, 2 property violation, 3 resource
//! cap exceeded.

mod system;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use envelope_core::convolution::{identity_suite, Algebra, SuiteConfig};
use envelope_core::envelope::{
    diagonal_probe, etale_probe, hausdorff_decide, nonseparable_pair, quotient_decomposition, related_trace,
    GermPair, HausdorffCertificate,
};
use envelope_core::filtration::{
    bratteli_build, inclusion_violation, inclusion_witness, truncated_relation, FiltrationError,
};
use envelope_core::partial_action::axioms_check;
use envelope_core::sampling::ElementShape;
use envelope_core::ClopenSet;
use serde_json::{json, Value};

use system::{System, SystemError};

pub const DEFAULT_LEVEL: usize = 3;
const DEFAULT_BOUND: i64 = 4;
const DEFAULT_DEPTH: usize = 10;
const DEFAULT_CAP: usize = 64;

#[derive(Parser)]
#[command(name = "envelope", version, about = "Envelope spaces of partial Z-actions on the Cantor set")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// System definition (JSON)
    file: PathBuf,
    /// Truncation level for generated maps
    #[arg(long)]
    level: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the system, check rule antichains and the partial-action axioms
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: Option<i64>,
    },
    /// Check the partial-action axioms on `{X_t, h_t}` for `|t| ≤ bound`
    Axioms {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: Option<i64>,
    },
    /// Decide (or semi-decide) Hausdorffness of the envelope space
    Hausdorff {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Test `(r,x) ~ (s,y)`; germs are written `r:point`
    Related {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        p: GermPair,
        #[arg(long, allow_hyphen_values = true)]
        q: GermPair,
    },
    /// Check range and source maps on the basic open `U_{t,base,s}`
    Etale {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        t: i64,
        #[arg(long, allow_hyphen_values = true)]
        s: i64,
        /// Clopen base, e.g. `{0,10}`; defaults to all of `X_{t⁻¹s}`
        #[arg(long)]
        base: Option<ClopenSet>,
    },
    /// Classes of the cell-level relation on `{(t,w) : |t| ≤ bound, |w| = depth}`
    Quotient {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Truncated relations along the schedule, with inclusion checks and an
    /// optional `R = ⋃ R_k` witness for `--p`, `--q`
    Filtrate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<GermPair>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<GermPair>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Bratteli diagram of the schedule
    Bratteli {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        out: Format,
    },
    /// Randomized exact check that ψ is a *-homomorphism
    VerifyPsi {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Block indices satisfy `|r|, |s| ≤ support`
        #[arg(long, default_value_t = 3)]
        support: i64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Violation(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

impl From<FiltrationError> for CliError {
    fn from(e: FiltrationError) -> Self {
        match e {
            FiltrationError::NotStabilized { .. } | FiltrationError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            FiltrationError::NotRelated { .. } | FiltrationError::NotEquivalence(_) => {
                CliError::Violation(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn load(common: &Common) -> Result<System, CliError> {
    let path = common.file.display();
    let text = std::fs::read_to_string(&common.file).map_err(|e| usage(format!("{path}: {e}")))?;
    System::parse(&text).map_err(|e| match e {
        SystemError::Invalid(_) => CliError::Violation(format!("{path}: {e}")),
        _ => usage(format!("{path}:{e}")),
    })
}

fn emit(text: &str) {
    use std::io::Write;
    // a closed pipe downstream is not an error of ours
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print(value: &Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(value).expect("JSON value")));
}

fn axioms_report(sys: &System, level: Option<usize>, bound: i64) -> Result<(Value, bool), CliError> {
    let family = sys.action.family(bound, level).map_err(usage)?;
    let violations = axioms_check(&family);
    let ok = violations.is_empty();
    let report = json!({
        "system": sys.name,
        "level": level,
        "bound": bound,
        "ok": ok,
        "violations": violations,
    });
    Ok((report, ok))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { common, bound } | Command::Axioms { common, bound } => {
            let sys = load(&common)?;
            let level = sys.level(common.level);
            let bound = bound.or(sys.defaults.bound).unwrap_or(DEFAULT_BOUND);
            let (report, ok) = axioms_report(&sys, level, bound)?;
            print(&report);
            if !ok {
                return Err(CliError::Violation("partial-action axioms violated".into()));
            }
        }
        Command::Hausdorff { common, bound, depth } => {
            let sys = load(&common)?;
            let bound = bound.or(sys.defaults.bound).unwrap_or(DEFAULT_BOUND);
            let depth = depth.or(sys.defaults.depth).unwrap_or(DEFAULT_DEPTH);
            let cert = hausdorff_decide(&sys.action, bound, depth).map_err(usage)?;
            let mut report = serde_json::to_value(&cert).expect("serializable");
            if let HausdorffCertificate::NonClopenWitness { t, .. } = cert {
                let pair = nonseparable_pair(&sys.action, t, depth).map_err(usage)?;
                report["pair"] = json!({
                    "first": pair.first.to_string(),
                    "second": pair.second.to_string(),
                    "level": pair.level,
                    "approach": pair.approach.iter().map(|(x, y)| [x.to_string(), y.to_string()]).collect::<Vec<_>>(),
                });
            }
            print(&report);
        }
        Command::Related { common, p, q } => {
            let sys = load(&common)?;
            let level = sys.level(common.level);
            let trace = related_trace(&sys.action, level, &p, &q).map_err(usage)?;
            print(&json!({
                "p": p.to_string(),
                "q": q.to_string(),
                "level": level,
                "related": trace.related,
                "domain_index": trace.domain_index,
                "domain": trace.domain,
                "in_domain": trace.in_domain,
                "map_index": trace.map_index,
                "image": trace.image,
            }));
        }
        Command::Etale { common, t, s, base } => {
            let sys = load(&common)?;
            let level = sys.level(common.level);
            let base = match base {
                Some(b) => b,
                None => sys.action.domain(s - t, level).map_err(usage)?,
            };
            let report = etale_probe(&sys.action, level, t, s, &base).map_err(usage)?;
            let diagonal = diagonal_probe(&sys.action, level, t.abs().max(s.abs())).map_err(usage)?;
            let ok = report.is_ok() && diagonal;
            let mut value = serde_json::to_value(&report).expect("serializable");
            value["diagonal_covered"] = json!(diagonal);
            value["ok"] = json!(ok);
            print(&value);
            if !ok {
                return Err(CliError::Violation("local bijectivity fails".into()));
            }
        }
        Command::Quotient { common, bound, depth } => {
            let sys = load(&common)?;
            let level = sys.level(common.level);
            let bound = bound.or(sys.defaults.bound).unwrap_or(1);
            let depth = match depth.or(sys.defaults.depth) {
                Some(d) => d,
                None => envelope_core::filtration::adapted_depth(&sys.action, level, bound, 16)?,
            };
            let classes = quotient_decomposition(&sys.action, level, bound, depth)?;
            print(&json!({
                "system": sys.name,
                "level": level,
                "bound": bound,
                "depth": depth,
                "class_count": classes.len(),
                "classes": classes
                    .iter()
                    .map(|c| c.iter().map(|(t, w)| json!([t, w.to_string()])).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }));
        }
        Command::Filtrate { common, levels, p, q, cap } => {
            let sys = load(&common)?;
            let params = sys.schedule.resolve(&sys.exhaustion, levels)?;
            let mut out = Vec::new();
            let mut previous = None;
            let mut inclusion_ok = true;
            for (m, lp) in params.iter().enumerate() {
                let rel = truncated_relation(&sys.exhaustion, lp.k, lp.n, lp.d)?;
                let mut sizes = rel.class_sizes();
                sizes.sort_unstable_by(|a, b| b.cmp(a));
                let included = previous.as_ref().map(|prev| inclusion_violation(prev, &rel).is_none());
                inclusion_ok &= included.unwrap_or(true);
                out.push(json!({
                    "m": m,
                    "params": lp,
                    "units": rel.units.len(),
                    "classes": rel.classes.len(),
                    "sizes": sizes,
                    "includes_previous": included,
                }));
                previous = Some(rel);
            }
            let mut report = json!({ "system": sys.name, "levels": out, "inclusion_ok": inclusion_ok });
            match (p, q) {
                (Some(p), Some(q)) => {
                    let k = inclusion_witness(&sys.exhaustion, p.index, &p.point, q.index, &q.point, cap)?;
                    report["witness"] = json!({ "p": p.to_string(), "q": q.to_string(), "k": k });
                }
                (None, None) => {}
                _ => return Err(usage("--p and --q go together")),
            }
            print(&report);
            if !inclusion_ok {
                return Err(CliError::Violation("R_k^n not included in the next level".into()));
            }
        }
        Command::Bratteli { common, levels, out } => {
            let sys = load(&common)?;
            let diagram = bratteli_build(&sys.exhaustion, &sys.schedule, levels)?;
            match out {
                Format::Json => emit(&diagram.to_json()),
                Format::Dot => emit(&diagram.to_dot()),
            }
            if !diagram.dimension_identity_failures().is_empty() {
                return Err(CliError::Violation("dimension identity fails".into()));
            }
        }
        Command::VerifyPsi { common, trials, seed, support, depth } => {
            let sys = load(&common)?;
            let level = sys.level(common.level);
            let alg = Algebra::new(&sys.action, level);
            let shape = ElementShape { support, depth, ..ElementShape::default() };
            let report = identity_suite(&alg, SuiteConfig { trials, seed, shape }).map_err(usage)?;
            let mut value = serde_json::to_value(&report).expect("serializable");
            value["system"] = json!(sys.name);
            value["level"] = json!(level);
            value["rng"] = json!("ChaCha8Rng::seed_from_u64");
            value["ok"] = json!(report.ok());
            print(&value);
            if !report.ok() {
                return Err(CliError::Violation("psi identity fails".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
