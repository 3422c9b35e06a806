//! `blade` command-line driver.
//!
//! [`run`] takes an argument vector and two writers and returns the exit
//! code, so every subcommand can be exercised in-process. Results go to the
//! output writer; diagnostics and warnings go to the error writer.

mod error;
mod table;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use blade_core::bpmn::{build_profile, parse_bpmn, ProcessModel, ProcessProfile, DEFAULT_ONCHAIN_MARKER};
use blade_core::json::to_body;
use blade_core::kb::{load_knowledge_base, KnowledgeBase};
use blade_core::mcdm::{evaluate, RankingResult};
use blade_core::perfsim::{refine_intervals, simulate, ChainParams, WorkloadSpec};
use blade_core::pipeline::apply_process_profile;
use blade_core::requirements::{parse_requirements, validate_against, RequirementSet};
use blade_core::stubgen::generate_stubs;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub use error::{CliError, ExitCode};

#[derive(Debug, Parser)]
#[command(name = "blade", version, about = "Rank blockchain platforms against architecture requirements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
struct KbArg {
    /// Knowledge base JSON file
    #[arg(short = 'k', long = "kb", env = "BLADE_KB")]
    kb: PathBuf,
}

#[derive(Debug, Args)]
struct ProcessArgs {
    /// Process instances per second
    #[arg(long, default_value_t = 1.0, requires = "bpmn")]
    rate: f64,
    /// Annotation marking a task as on-chain
    #[arg(long, default_value = DEFAULT_ONCHAIN_MARKER)]
    marker: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter and rank the knowledge base against a requirements file
    Evaluate {
        #[command(flatten)]
        kb: KbArg,
        /// Requirements file (TOML or JSON)
        #[arg(short = 'r', long = "reqs")]
        reqs: PathBuf,
        /// BPMN process whose embedded requirements and load are merged in
        #[arg(long)]
        bpmn: Option<PathBuf>,
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run the block-production simulator
    Simulate {
        /// Chain parameters JSON file
        #[arg(short = 'p', long = "params")]
        params: PathBuf,
        /// Workload JSON file
        #[arg(short = 'w', long = "workload")]
        workload: PathBuf,
        /// Simulated seconds
        #[arg(short = 'd', long = "duration")]
        duration: f64,
        /// Also write the per-block occupancy series here
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Narrow a profile's performance intervals by simulation
    Refine {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long)]
        profile: String,
        /// Chain parameters: one object, or an object keyed by profile id
        #[arg(short = 'p', long = "params")]
        params: PathBuf,
        #[arg(short = 'w', long = "workload")]
        workload: PathBuf,
        /// Where to write the refined knowledge base
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Write architecture stubs for the top-ranked platform
    Generate {
        #[command(flatten)]
        kb: KbArg,
        #[arg(short = 'r', long = "reqs")]
        reqs: PathBuf,
        #[arg(long)]
        bpmn: PathBuf,
        #[command(flatten)]
        process: ProcessArgs,
        /// Chain parameters for the network section
        #[arg(short = 'p', long = "params")]
        params: Option<PathBuf>,
        /// Output directory
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Serve the HTTP API
    Serve {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Static files served under /ui
        #[arg(long)]
        ui: Option<PathBuf>,
    },
    /// Check a knowledge base and, optionally, requirements against it
    Validate {
        #[command(flatten)]
        kb: KbArg,
        #[arg(short = 'r', long = "reqs")]
        reqs: Option<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the subcommand and reports.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return ExitCode::Format;
            }
            let _ = write!(out, "{}", e.render());
            return ExitCode::Success;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => ExitCode::Success,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            for f in e.findings() {
                let _ = writeln!(err, "  {f}");
            }
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Evaluate {
            kb,
            reqs,
            bpmn,
            process,
            format,
        } => {
            let kb = load_kb(&kb.kb)?;
            let process = bpmn.map(|p| load_process(&p, &process)).transpose()?;
            let result = rank(&kb, &reqs, process.as_ref().map(|(_, p)| p))?;
            warn(err, &result.warnings);
            let text = match format {
                Format::Json => to_body(&result),
                Format::Table => table::ranking(&result, &kb),
            };
            emit(out, &text)
        }
        Command::Simulate {
            params,
            workload,
            duration,
            csv,
        } => {
            let params: ChainParams = read_json(&params)?;
            let workload: WorkloadSpec = read_json(&workload)?;
            let result = simulate(&params, &workload, duration)?;
            if let Some(path) = csv {
                write_file(&path, result.occupancy_csv().as_bytes())?;
            }
            emit(out, &to_body(&result))
        }
        Command::Refine {
            kb: kb_arg,
            profile,
            params,
            workload,
            out: target,
        } => {
            let kb = load_kb(&kb_arg.kb)?;
            let params = match read_json::<ParamsFile>(&params)? {
                ParamsFile::Single(p) => BTreeMap::from([(profile.clone(), p)]),
                ParamsFile::PerProfile(map) => map,
            };
            let workload: WorkloadSpec = read_json(&workload)?;
            let refinement = refine_intervals(&kb, &profile, &params, &workload)?;
            write_file(&target, refinement.kb.to_json().as_bytes())?;
            let mut text = format!(
                "refined {} (kb version {} -> {})\n  saturation throughput {:.3} tx/s\n  throughput-tps {}\n",
                refinement.profile,
                kb.kb_version(),
                refinement.kb.kb_version(),
                refinement.saturation_throughput,
                refinement.throughput_band,
            );
            if let Some(band) = refinement.latency_band {
                text.push_str(&format!("  latency-s {band}\n"));
            }
            for note in &refinement.notes {
                text.push_str(&format!("  note: {note}\n"));
            }
            text.push_str(&format!("written to {}\n", target.display()));
            emit(out, &text)
        }
        Command::Generate {
            kb,
            reqs,
            bpmn,
            process,
            params,
            out: dir,
        } => {
            let kb = load_kb(&kb.kb)?;
            let (model, profile) = load_process(&bpmn, &process)?;
            let ranking = rank(&kb, &reqs, Some(&profile))?;
            warn(err, &ranking.warnings);
            let winner = ranking.winner().ok_or(CliError::NoSurvivors)?;
            let platform = kb
                .profile(&winner.id)
                .ok_or_else(|| CliError::Internal(format!("ranked `{}` is missing from the KB", winner.id)))?;
            let params = match params {
                Some(path) => read_json(&path)?,
                None => ChainParams::default(),
            };
            let stub = generate_stubs(&model, &profile, platform, &ranking, &params)?;
            stub.write_to(&dir)?;
            let mut text = format!("stubs for {} in {}\n", platform.id, dir.display());
            for name in stub.files.keys() {
                text.push_str(&format!("  {name}\n"));
            }
            emit(out, &text)
        }
        Command::Serve { kb, bind, ui } => {
            let kb = load_kb(&kb.kb)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
            let _ = writeln!(err, "listening on http://{bind}");
            runtime
                .block_on(blade_service::serve(kb, bind, ui))
                .map_err(|source| CliError::Bind { addr: bind, source })
        }
        Command::Validate { kb: kb_arg, reqs } => {
            let kb = load_kb(&kb_arg.kb)?;
            let mut text = format!(
                "{}: ok, kb version {}, {} criteria, {} profiles\n",
                kb_arg.kb.display(),
                kb.kb_version(),
                kb.criteria().len(),
                kb.profiles().len()
            );
            if let Some(path) = reqs {
                let reqs = load_reqs(&path)?;
                let findings = validate_against(&reqs, &kb);
                if !findings.is_empty() {
                    return Err(CliError::Findings(findings));
                }
                text.push_str(&format!(
                    "{}: ok, {} strict, {} preferences\n",
                    path.display(),
                    reqs.strict.len(),
                    reqs.preferences.len()
                ));
            }
            emit(out, &text)
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ParamsFile {
    Single(ChainParams),
    PerProfile(BTreeMap<String, ChainParams>),
}

/// Evaluates `reqs` with an optional process folded in. Merge warnings come
/// first in the result's warnings.
fn rank(kb: &KnowledgeBase, reqs: &Path, process: Option<&ProcessProfile>) -> Result<RankingResult, CliError> {
    let mut reqs: RequirementSet = load_reqs(reqs)?;
    let mut warnings = match process {
        Some(p) => apply_process_profile(&mut reqs, p),
        None => Vec::new(),
    };
    let mut result = evaluate(kb, &reqs)?;
    warnings.append(&mut result.warnings);
    result.warnings = warnings;
    Ok(result)
}

fn warn(err: &mut dyn Write, warnings: &[String]) {
    for w in warnings {
        let _ = writeln!(err, "warning: {w}");
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, CliError> {
    load_knowledge_base(&read_text(path)?).map_err(|source| CliError::Kb {
        path: path.to_owned(),
        source,
    })
}

fn load_reqs(path: &Path) -> Result<RequirementSet, CliError> {
    Ok(parse_requirements(&read_text(path)?)?)
}

fn load_process(path: &Path, args: &ProcessArgs) -> Result<(ProcessModel, ProcessProfile), CliError> {
    let parsed = parse_bpmn(&read_text(path)?)?;
    let mut profile = build_profile(&parsed.model, args.rate, &args.marker)?;
    let mut warnings = parsed.warnings;
    warnings.append(&mut profile.warnings);
    profile.warnings = warnings;
    Ok((parsed.model, profile))
}
