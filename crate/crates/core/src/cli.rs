//! Command-line front end.
//!
//! Exit codes: 0 success, true, or invariant up to the cap; 1 false, not
//! invariant, no model, or failed verification; 2 a complete verdict was
//! required but the cap does not reach the bound; 64 usage; 65 malformed
//! input data; 66 unreadable input file; 70 internal error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::formula::{parse, signature_of, substitute_order, Formula, OrderSym, Signature};
use crate::invariance::{
    check_order_invariance_with, reduce_validity_with, InvarianceError, InvarianceVerdict,
};
use crate::model_check::evaluate;
use crate::model_find::{
    find_model_up_to_with, find_model_with, ground_to_cnf, FindError, SearchOptions,
};
use crate::normal_form::{coarse_size_bound, normalize, size_bound, NormalForm, NormalizeError};
use crate::shrink::{shrink_with, ShrinkError, ShrinkOptions};
use crate::structure::Structure;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser, Debug)]
#[command(
    name = "oinv2",
    version,
    about = "Order-invariance of two-variable first-order sentences"
)]
struct Cli {
    /// Worker threads for model search (results do not depend on it)
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Print machine-readable JSON
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct FormulaInput {
    /// Formula text
    formula: Option<String>,
    /// Read the formula from a file instead
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NfInput {
    #[command(flatten)]
    input: FormulaInput,
    /// Treat the input as a sentence to satisfy (plain `<=` read as `<=0`)
    /// rather than as a sentence to test for invariance
    #[arg(long)]
    sentence: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and print a formula
    Parse(FormulaInput),
    /// Print the normal form
    Normalize(NfInput),
    /// Evaluate a sentence on a structure
    ModelCheck {
        structure: PathBuf,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Search for a finite model of the normal form
    FindModel {
        /// Search exactly this size
        #[arg(long, conflicts_with = "cap", required_unless_present = "cap")]
        size: Option<usize>,
        /// Search sizes 1..=cap
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        require_complete: bool,
        #[command(flatten)]
        nf: NfInput,
    },
    /// Ground the normal form at a fixed size and write DIMACS CNF
    Ground {
        #[arg(long)]
        size: usize,
        /// Output path, `-` for stdout
        #[arg(long, value_name = "PATH")]
        dimacs: PathBuf,
        #[command(flatten)]
        nf: NfInput,
    },
    /// Shrink a model of the normal form below the size bound
    Shrink {
        structure: PathBuf,
        /// Run the construction even below the bound
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        nf: NfInput,
    },
    /// Decide order-invariance up to a size cap
    CheckInvariance {
        #[arg(long)]
        cap: usize,
        #[arg(long)]
        require_complete: bool,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Decide finite validity of an order-free sentence via invariance
    ReduceValidity {
        #[arg(long)]
        cap: usize,
        #[arg(long)]
        require_complete: bool,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Print the small-model size bound of the normal form
    Bound(NfInput),
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl ToString) -> Failure {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<NormalizeError> for Failure {
    fn from(e: NormalizeError) -> Failure {
        Failure::new(EXIT_DATA, e)
    }
}

impl From<FindError> for Failure {
    fn from(e: FindError) -> Failure {
        match e {
            FindError::Internal(_) => Failure::new(EXIT_INTERNAL, e),
            _ => Failure::new(EXIT_DATA, e),
        }
    }
}

impl From<InvarianceError> for Failure {
    fn from(e: InvarianceError) -> Failure {
        match e {
            InvarianceError::Find(f) => f.into(),
            InvarianceError::BadCounterexample(_) => Failure::new(EXIT_INTERNAL, e),
            _ => Failure::new(EXIT_DATA, e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::new(EXIT_INTERNAL, format!("write failed: {e}"))
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::new(
            EXIT_NO_INPUT,
            format!("cannot read {}: {e}", path.display()),
        )
    })
}

impl FormulaInput {
    fn load(&self) -> Result<Formula, Failure> {
        let text = match (&self.formula, &self.file) {
            (Some(t), None) => t.clone(),
            (None, Some(p)) => read_file(p)?,
            (Some(_), Some(_)) => {
                return Err(Failure::new(
                    EXIT_USAGE,
                    "give a formula or --file, not both",
                ))
            }
            (None, None) => return Err(Failure::new(EXIT_USAGE, "missing formula")),
        };
        parse(&text).map_err(|e| Failure::new(EXIT_DATA, e))
    }
}

impl NfInput {
    /// Sentences over the indexed orders, and any sentence under
    /// `--sentence`, are normalized as they are. Otherwise the input is a
    /// sentence over `<=` and the normal form is that of its
    /// non-invariance formula.
    fn load(&self) -> Result<(Formula, NormalForm), Failure> {
        let f = self.input.load()?;
        let orders = f.order_symbols();
        let indexed = orders.contains(&OrderSym::Leq0) || orders.contains(&OrderSym::Leq1);
        if !self.sentence && !indexed {
            let nf = normalize(&f)?;
            return Ok((f, nf));
        }
        let f = if orders.contains(&OrderSym::Leq) {
            if indexed {
                return Err(NormalizeError::PlainOrder.into());
            }
            substitute_order(&f, 0).map_err(|e| Failure::new(EXIT_DATA, e))?
        } else {
            f
        };
        let nf = match NormalForm::recognize(&f) {
            Some(nf) => nf,
            None => NormalForm::from_sentence(&f)?,
        };
        Ok((f, nf))
    }
}

fn load_structure(path: &Path) -> Result<Structure, Failure> {
    Structure::from_json(&read_file(path)?).map_err(|e| Failure::new(EXIT_DATA, e))
}

fn signature_json(sig: &Signature) -> serde_json::Value {
    let predicates: serde_json::Map<String, serde_json::Value> = sig
        .predicates()
        .map(|(n, a)| (n.to_string(), json!(a.as_usize())))
        .collect();
    let orders: Vec<&str> = sig.orders().iter().map(|o| o.key()).collect();
    json!({ "predicates": predicates, "orders": orders })
}

fn nf_json(nf: &NormalForm) -> serde_json::Value {
    json!({
        "chi": [nf.chi(0).to_string(), nf.chi(1).to_string()],
        "gammas": [
            nf.gammas(0).iter().map(ToString::to_string).collect::<Vec<_>>(),
            nf.gammas(1).iter().map(ToString::to_string).collect::<Vec<_>>(),
        ],
        "m": [nf.m(0), nf.m(1)],
        "fresh": nf.fresh_symbols(),
        "signature": signature_json(nf.signature()),
    })
}

fn bound_text(bound: Option<u128>) -> String {
    match bound {
        Some(b) => b.to_string(),
        None => "bound exceeds representable range".into(),
    }
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    json: bool,
    search: SearchOptions,
}

impl Ctx<'_> {
    fn emit_json(&mut self, value: &serde_json::Value) -> Result<(), Failure> {
        writeln!(self.out, "{value}")?;
        Ok(())
    }
}

fn exec(cmd: Command, ctx: &mut Ctx) -> Result<i32, Failure> {
    match cmd {
        Command::Parse(input) => {
            let f = input.load()?;
            if ctx.json {
                let sig = signature_of(&f).map_err(|e| Failure::new(EXIT_DATA, e))?;
                let value = json!({
                    "formula": f.to_string(),
                    "size": f.size(),
                    "sentence": f.is_sentence(),
                    "signature": signature_json(&sig),
                });
                ctx.emit_json(&value)?;
            } else {
                writeln!(ctx.out, "{f}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Normalize(input) => {
            let (_, nf) = input.load()?;
            if ctx.json {
                ctx.emit_json(&nf_json(&nf))?;
            } else {
                write!(ctx.out, "{nf}")?;
            }
            Ok(EXIT_OK)
        }
        Command::ModelCheck { structure, input } => {
            let s = load_structure(&structure)?;
            let f = input.load()?;
            let value = evaluate(&s, &f).map_err(|e| Failure::new(EXIT_DATA, e))?;
            if ctx.json {
                ctx.emit_json(&json!({ "value": value }))?;
            } else {
                writeln!(ctx.out, "{value}")?;
            }
            Ok(if value { EXIT_OK } else { EXIT_FALSE })
        }
        Command::FindModel {
            size,
            cap,
            require_complete,
            nf,
        } => {
            let (_, nf) = nf.load()?;
            let (model, complete, summary) = match (size, cap) {
                (Some(n), _) => {
                    let m = find_model_with(&nf, n, &ctx.search)?;
                    (m, false, format!("no model of size {n}"))
                }
                (None, Some(cap)) => {
                    let res = find_model_up_to_with(&nf, cap, &ctx.search)?;
                    let summary = if res.complete {
                        format!(
                            "no model at all (complete: cap {cap} >= bound {})",
                            bound_text(res.bound)
                        )
                    } else {
                        format!(
                            "no model up to size {cap} (incomplete: bound is {})",
                            bound_text(res.bound)
                        )
                    };
                    (res.model, res.complete, summary)
                }
                (None, None) => return Err(Failure::new(EXIT_USAGE, "give --size or --cap")),
            };
            match model {
                Some(m) => {
                    writeln!(ctx.out, "{}", m.to_json())?;
                    Ok(EXIT_OK)
                }
                None => {
                    if ctx.json {
                        ctx.emit_json(&json!({ "model": null, "complete": complete }))?;
                    } else {
                        writeln!(ctx.out, "{summary}")?;
                    }
                    Ok(if require_complete && !complete {
                        EXIT_INCOMPLETE
                    } else {
                        EXIT_FALSE
                    })
                }
            }
        }
        Command::Ground { size, dimacs, nf } => {
            let (_, nf) = nf.load()?;
            let cnf = ground_to_cnf(&nf, size)?;
            let text = cnf.to_dimacs();
            if dimacs.as_os_str() == "-" {
                write!(ctx.out, "{text}")?;
            } else {
                fs::write(&dimacs, text).map_err(|e| {
                    Failure::new(
                        EXIT_INTERNAL,
                        format!("cannot write {}: {e}", dimacs.display()),
                    )
                })?;
                if ctx.json {
                    ctx.emit_json(&json!({
                        "variables": cnf.num_vars(),
                        "clauses": cnf.clauses().len(),
                        "atoms": cnf.num_atom_vars(),
                    }))?;
                } else {
                    writeln!(ctx.out, "p cnf {} {}", cnf.num_vars(), cnf.clauses().len())?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Shrink {
            structure,
            force,
            nf,
        } => {
            let s = load_structure(&structure)?;
            let (_, nf) = nf.load()?;
            let (report, code) = match shrink_with(&s, &nf, &ShrinkOptions { force }) {
                Ok(r) => (r, EXIT_OK),
                Err(ShrinkError::Unverified(r)) => (*r, EXIT_FALSE),
                Err(e @ ShrinkError::Internal(_)) => return Err(Failure::new(EXIT_INTERNAL, e)),
                Err(e) => return Err(Failure::new(EXIT_DATA, e)),
            };
            if ctx.json {
                ctx.emit_json(&report.to_json_value())?;
            } else {
                writeln!(ctx.out, "{}", report.output.to_json())?;
            }
            Ok(code)
        }
        Command::CheckInvariance {
            cap,
            require_complete,
            input,
        } => {
            let f = input.load()?;
            let verdict = check_order_invariance_with(&f, cap, &ctx.search)?;
            match &verdict {
                InvarianceVerdict::NotInvariant(cx) => {
                    if ctx.json {
                        ctx.emit_json(&json!({
                            "verdict": "not_invariant",
                            "counterexample": cx.to_json_value(),
                        }))?;
                    } else {
                        writeln!(
                            ctx.out,
                            "not invariant: counterexample with {} elements",
                            cx.base().size()
                        )?;
                        writeln!(ctx.out, "true under:  {}", cx.under(0).to_json())?;
                        writeln!(ctx.out, "false under: {}", cx.under(1).to_json())?;
                    }
                    Ok(EXIT_FALSE)
                }
                InvarianceVerdict::InvariantUpTo { cap, bound } => {
                    if ctx.json {
                        ctx.emit_json(&json!({
                            "verdict": "invariant_up_to",
                            "cap": cap,
                            "bound": bound.map(|b| b.to_string()),
                            "complete": false,
                        }))?;
                    } else {
                        writeln!(
                            ctx.out,
                            "invariant up to size {cap} (incomplete: bound is {})",
                            bound_text(*bound)
                        )?;
                    }
                    Ok(if require_complete {
                        EXIT_INCOMPLETE
                    } else {
                        EXIT_OK
                    })
                }
                InvarianceVerdict::Invariant { cap, bound } => {
                    if ctx.json {
                        ctx.emit_json(&json!({
                            "verdict": "invariant",
                            "cap": cap,
                            "bound": bound.to_string(),
                            "complete": true,
                        }))?;
                    } else {
                        writeln!(ctx.out, "invariant (complete: cap {cap} >= bound {bound})")?;
                    }
                    Ok(EXIT_OK)
                }
            }
        }
        Command::ReduceValidity {
            cap,
            require_complete,
            input,
        } => {
            let f = input.load()?;
            let out = reduce_validity_with(&f, cap, &ctx.search)?;
            if ctx.json {
                ctx.emit_json(&json!({
                    "valid": out.valid,
                    "exact": out.exact,
                    "single_element_countermodel":
                        out.single_element_countermodel.as_ref().map(Structure::to_json_value),
                    "reduced": out.reduced.as_ref().map(ToString::to_string),
                    "counterexample": out.counterexample.as_ref().map(|c| c.to_json_value()),
                }))?;
            } else if let Some(m) = &out.single_element_countermodel {
                writeln!(
                    ctx.out,
                    "not valid: one-element countermodel {}",
                    m.to_json()
                )?;
            } else if let Some(cx) = &out.counterexample {
                writeln!(
                    ctx.out,
                    "not valid: {} is not order-invariant",
                    out.reduced.as_ref().expect("reduced sentence")
                )?;
                writeln!(ctx.out, "true under:  {}", cx.under(0).to_json())?;
                writeln!(ctx.out, "false under: {}", cx.under(1).to_json())?;
            } else if out.exact {
                writeln!(ctx.out, "valid")?;
            } else {
                writeln!(ctx.out, "valid up to size {cap} (incomplete)")?;
            }
            Ok(if !out.valid {
                EXIT_FALSE
            } else if require_complete && !out.exact {
                EXIT_INCOMPLETE
            } else {
                EXIT_OK
            })
        }
        Command::Bound(input) => {
            let (f, nf) = input.load()?;
            let bound = size_bound(&nf).ok();
            let alpha = nf.one_type_count().ok();
            if ctx.json {
                ctx.emit_json(&json!({
                    "m": nf.max_m().max(1),
                    "alpha": alpha,
                    "bound": bound.map(|b| b.to_string()),
                    "coarse": coarse_size_bound(&f).ok().map(|b| b.to_string()),
                }))?;
            } else {
                writeln!(ctx.out, "{}", bound_text(bound))?;
            }
            Ok(if bound.is_some() { EXIT_OK } else { EXIT_FALSE })
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut ctx = Ctx {
        out,
        json: cli.json,
        search: SearchOptions {
            jobs: cli.jobs.max(1),
            ..SearchOptions::default()
        },
    };
    match exec(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
