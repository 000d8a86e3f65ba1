//! Command-line surface for the twirling-channel toolkit: build groups,
//! decompose representations, certify invariants, construct and probe
//! channels, and test phase retrievability.
//!
//! JSON output is canonical (sorted keys, fixed-width floats), so a fixed
//! (input, seed, tolerance) triple produces byte-identical bytes; text
//! mode is a human summary. Exit codes: 0 for success (including honest
//! `undecided` verdicts), 2 for input or validation errors, 3 for failed
//! certificates.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twirl_core::channel::{is_covariant, twirling_channel, QuantumChannel};
use twirl_core::decompose::{
    block_residual, isotypic_decomposition, multiplicity_crosscheck, IsotypicDecomposition,
};
use twirl_core::group::FiniteGroup;
use twirl_core::invariants::{
    alpha_extension_probe, alpha_witness, capacity_tensor_check, code_witness, full_report,
    gamma_witness, pass_tolerance, tau_witness, verify_code,
};
use twirl_core::jsonio;
use twirl_core::linalg;
use twirl_core::phase::{
    multiplicity_pr_witness, pr_falsifier, pr_lower_bound, range_measurement_equivalence,
    subspace_pr_witness, OperatorFrame, PrCertificate,
};
use twirl_core::rep::Representation;
use twirl_core::TwirlError;

#[derive(Parser)]
#[command(
    name = "twirl-lab",
    version,
    about = "Finite-group twirling channels: decomposition, invariants, phase retrieval"
)]
struct Cli {
    /// Numerical tolerance applied to loaded objects.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    /// Seed for every randomized routine.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format: canonical JSON (the machine contract) or a text summary.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load finite groups.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Split a representation into isotypic blocks.
    Decompose {
        rep: PathBuf,
    },
    /// Full invariant report with witness certificates.
    Invariants {
        rep: PathBuf,
        /// Independently re-verify every certificate.
        #[arg(long)]
        verify: bool,
        /// Check multiplicativity of the independence number on a tensor
        /// power (default 2 copies).
        #[arg(long, num_args = 0..=1, default_missing_value = "2", value_name = "COPIES")]
        tensor_check: Option<usize>,
    },
    /// Twirling-channel construction and probes.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Phase-retrievability bounds, witnesses, and falsification.
    #[command(subcommand)]
    Phase(PhaseCmd),
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Cyclic group of order n.
    Cyclic { n: usize },
    /// Dihedral group of order 2n.
    Dihedral { n: usize },
    /// Symmetric group on n letters.
    Symmetric { n: usize },
    /// Direct product of two stored groups.
    Product { a: PathBuf, b: PathBuf },
    /// Load and fully validate a stored group.
    Load { path: PathBuf },
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// Build the averaging channel of a representation.
    Twirl { rep: PathBuf },
    /// Choi matrix and rank of a stored channel.
    Choi { channel: PathBuf },
    /// Kraus operators of a stored channel.
    Kraus { channel: PathBuf },
    /// Check Φ(π(g)Tπ(g)*) = σ(g)Φ(T)σ(g)* for all g.
    Covariance {
        channel: PathBuf,
        pi: PathBuf,
        sigma: PathBuf,
    },
    /// Apply a stored channel to a stored state.
    Apply { channel: PathBuf, state: PathBuf },
}

#[derive(Subcommand)]
enum PhaseCmd {
    /// Lower bound max(max mᵢ, ⌊d/4⌋+1) on the retrievability index.
    Bound { rep: PathBuf },
    /// Multiplicity and frame-threaded retrievable-subspace witnesses.
    Witness { rep: PathBuf },
    /// Decide retrievability of a vector frame's rank-one measurements.
    Falsify {
        frame: PathBuf,
        /// Objective-evaluation budget for the search tier.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
    /// Cross-validate channel injectivity on range(T) against phase
    /// retrieval by the pulled-back measurements (multiplicity-free only).
    Equivalence {
        rep: PathBuf,
        /// Matrix JSON for T; defaults to the frame-threaded witness map.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
}

struct RunConfig {
    tol: f64,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
}

struct CommandOutput {
    value: Value,
    text: String,
    code: u8,
}

impl CommandOutput {
    fn ok(value: Value, text: String) -> Self {
        CommandOutput {
            value,
            text,
            code: 0,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // The numeric kernels are single-threaded, so any positive cap is
    // already satisfied; the variable is still validated.
    if let Ok(raw) = std::env::var("TWIRL_LAB_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {}
            _ => {
                eprintln!("error: TWIRL_LAB_THREADS must be a positive integer, got {raw:?}");
                return ExitCode::from(2);
            }
        }
    }
    if !(cli.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(2);
    }
    let cfg = RunConfig {
        tol: cli.tol,
        seed: cli.seed,
        format: cli.format,
        out: cli.out.clone(),
    };
    match run(cli.command, &cfg) {
        Ok(output) => emit(&cfg, output),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &TwirlError) -> u8 {
    match err {
        TwirlError::CertificateFailed(_) | TwirlError::WitnessFailed { .. } => 3,
        _ => 2,
    }
}

fn emit(cfg: &RunConfig, output: CommandOutput) -> ExitCode {
    let mut rendered = match cfg.format {
        Format::Json => jsonio::to_canonical_string(&output.value),
        Format::Text => output.text,
    };
    rendered.push('\n');
    if let Some(path) = &cfg.out {
        if let Err(err) = std::fs::write(path, &rendered) {
            eprintln!("error: cannot write {}: {err}", path.display());
            return ExitCode::from(2);
        }
    } else {
        print!("{rendered}");
    }
    ExitCode::from(output.code)
}

fn run(command: Command, cfg: &RunConfig) -> Result<CommandOutput, TwirlError> {
    match command {
        Command::Group(cmd) => cmd_group(cmd),
        Command::Decompose { rep } => cmd_decompose(&rep, cfg),
        Command::Invariants {
            rep,
            verify,
            tensor_check,
        } => cmd_invariants(&rep, verify, tensor_check, cfg),
        Command::Channel(cmd) => cmd_channel(cmd, cfg),
        Command::Phase(cmd) => cmd_phase(cmd, cfg),
    }
}

fn load_group(path: &Path) -> Result<FiniteGroup, TwirlError> {
    jsonio::group_from_json(&jsonio::load_json(path)?)
}

fn load_rep(path: &Path, cfg: &RunConfig) -> Result<Representation, TwirlError> {
    let value = jsonio::load_json(path)?;
    let mut rep = jsonio::representation_from_json(&value, path.parent())?;
    rep.set_tolerance(cfg.tol);
    Ok(rep)
}

fn load_channel(path: &Path, cfg: &RunConfig) -> Result<QuantumChannel, TwirlError> {
    jsonio::channel_from_json(&jsonio::load_json(path)?, cfg.tol)
}

fn cmd_group(cmd: GroupCmd) -> Result<CommandOutput, TwirlError> {
    let group = match cmd {
        GroupCmd::Cyclic { n } => FiniteGroup::cyclic(n)?,
        GroupCmd::Dihedral { n } => FiniteGroup::dihedral(n)?,
        GroupCmd::Symmetric { n } => FiniteGroup::symmetric(n)?,
        GroupCmd::Product { a, b } => {
            FiniteGroup::direct_product(&load_group(&a)?, &load_group(&b)?)?
        }
        GroupCmd::Load { path } => load_group(&path)?,
    };
    let classes = group.conjugacy_classes();
    let text = format!(
        "group of order {} with {} conjugacy classes ({})",
        group.order(),
        classes.count(),
        if group.is_abelian() {
            "abelian"
        } else {
            "nonabelian"
        }
    );
    let value = json!({
        "order": group.order(),
        "classes": classes.count(),
        "abelian": group.is_abelian(),
        "group": jsonio::group_to_json(&group),
    });
    Ok(CommandOutput::ok(value, text))
}

fn cmd_decompose(path: &Path, cfg: &RunConfig) -> Result<CommandOutput, TwirlError> {
    let rep = load_rep(path, cfg)?;
    let dec = isotypic_decomposition(&rep, cfg.seed)?;
    let crosscheck = multiplicity_crosscheck(&rep, &dec)?;
    let block = block_residual(&rep, &dec);
    let character_residual = crosscheck
        .multiplicity_residuals
        .iter()
        .fold(0.0_f64, |a, r| a.max(*r));
    let value = json!({
        "decomposition": jsonio::decomposition_to_json(&dec),
        "residuals": {
            "block_diagonalization": block,
            "character_multiplicities": character_residual,
            "dimension_matches": crosscheck.dimension_matches,
        },
    });
    let text = format!(
        "d={} types, m={:?}, n={:?}; block residual {block:.3e}, character residual {character_residual:.3e}",
        dec.d, dec.multiplicities, dec.dimensions
    );
    Ok(CommandOutput::ok(value, text))
}

fn cmd_invariants(
    path: &Path,
    verify: bool,
    tensor_check: Option<usize>,
    cfg: &RunConfig,
) -> Result<CommandOutput, TwirlError> {
    let rep = load_rep(path, cfg)?;
    let report = full_report(&rep, cfg.seed)?;
    let bound = pr_lower_bound(&report.decomposition);
    let mut value = jsonio::invariant_report_to_json(&report);
    value["pr_lower_bound"] = json!(bound);
    let mut code = 0;
    let mut notes: Vec<String> = Vec::new();

    if verify {
        // Re-run every witness constructor from scratch (each re-verifies
        // or errors), then probe with independent checks: the code
        // projection against the actual channel, saturation of the
        // independent set, and covariance of the averaging channel.
        let dec = &report.decomposition;
        let mut worst_witness = 0.0_f64;
        for cert in [
            alpha_witness(&rep, dec)?,
            code_witness(&rep, dec)?,
            gamma_witness(&rep, dec)?,
            tau_witness(&rep, dec)?,
        ] {
            worst_witness = worst_witness.max(cert.worst_residual());
        }
        let phi = twirling_channel(&rep).to_quantum_channel()?;
        let projection = report.code_witness.projection.as_ref().ok_or_else(|| {
            TwirlError::CertificateFailed("code witness carries no projection".to_string())
        })?;
        let code_recheck = verify_code(&phi, projection, None)?;
        let spurious = alpha_extension_probe(&rep, &report.alpha_witness, 200, cfg.seed)?;
        let covariance = is_covariant(&phi, &rep, &rep, pass_tolerance(rep.dim()))?;
        let ok = code_recheck.pass && spurious == 0 && covariance.pass;
        value["verification"] = json!({
            "witness_rerun_worst": worst_witness,
            "code_recheck_pass": code_recheck.pass,
            "code_recheck_worst": code_recheck.worst_residual(),
            "alpha_extension_spurious": spurious,
            "covariance_pass": covariance.pass,
            "covariance_defect": covariance.max_defect,
        });
        if !ok {
            code = 3;
            notes.push("re-verification FAILED".to_string());
        } else {
            notes.push("re-verification pass".to_string());
        }
    }
    if let Some(copies) = tensor_check {
        let check = capacity_tensor_check(&rep, copies, cfg.seed)?;
        value["tensor_check"] = jsonio::tensor_check_to_json(&check);
        if check.pass {
            notes.push(format!(
                "tensor check pass (alpha {} -> {})",
                check.base_alpha, check.tensor_alpha
            ));
        } else {
            code = 3;
            notes.push("tensor check FAILED".to_string());
        }
    }

    let mut text = format!(
        "alpha={} beta={} gamma={} tau={} capacity_bits={} pr_lower_bound={bound}; witnesses pass",
        report.alpha, report.beta, report.gamma, report.tau, report.capacity_bits
    );
    for note in notes {
        text.push_str("; ");
        text.push_str(&note);
    }
    Ok(CommandOutput { value, text, code })
}

fn cmd_channel(cmd: ChannelCmd, cfg: &RunConfig) -> Result<CommandOutput, TwirlError> {
    match cmd {
        ChannelCmd::Twirl { rep } => {
            let rep = load_rep(&rep, cfg)?;
            let phi = twirling_channel(&rep).to_quantum_channel()?;
            let rank = phi.choi_rank();
            let value = json!({
                "channel": jsonio::channel_to_json(&phi),
                "choi_rank": rank,
            });
            let text = format!(
                "averaging channel on dimension {}, Choi rank {rank}",
                phi.in_dim()
            );
            Ok(CommandOutput::ok(value, text))
        }
        ChannelCmd::Choi { channel } => {
            let phi = load_channel(&channel, cfg)?;
            let rank = phi.choi_rank();
            let value = json!({
                "in": phi.in_dim(),
                "out": phi.out_dim(),
                "choi": jsonio::matrix_to_json(&phi.choi_matrix()),
                "rank": rank,
            });
            let text = format!(
                "Choi matrix of side {}, rank {rank}",
                phi.in_dim() * phi.out_dim()
            );
            Ok(CommandOutput::ok(value, text))
        }
        ChannelCmd::Kraus { channel } => {
            let phi = load_channel(&channel, cfg)?;
            let kraus: Vec<_> = match phi.kraus() {
                Some(list) => list.to_vec(),
                None => phi.kraus_from_choi(),
            };
            let value = json!({
                "in": phi.in_dim(),
                "out": phi.out_dim(),
                "count": kraus.len(),
                "kraus": kraus.iter().map(jsonio::matrix_to_json).collect::<Vec<_>>(),
            });
            let text = format!("{} Kraus operators", kraus.len());
            Ok(CommandOutput::ok(value, text))
        }
        ChannelCmd::Covariance { channel, pi, sigma } => {
            let phi = load_channel(&channel, cfg)?;
            let pi = load_rep(&pi, cfg)?;
            let sigma = load_rep(&sigma, cfg)?;
            let cert = is_covariant(&phi, &pi, &sigma, cfg.tol * phi.in_dim() as f64)?;
            let value = json!({
                "covariant": cert.pass,
                "max_defect": cert.max_defect,
            });
            let text = format!(
                "covariance {} (max defect {:.3e})",
                if cert.pass { "pass" } else { "FAIL" },
                cert.max_defect
            );
            Ok(CommandOutput {
                value,
                text,
                code: if cert.pass { 0 } else { 3 },
            })
        }
        ChannelCmd::Apply { channel, state } => {
            let phi = load_channel(&channel, cfg)?;
            let rho = jsonio::matrix_from_json(&jsonio::load_json(&state)?)?;
            let output = phi.apply(&rho)?;
            let trace_in = linalg::trace(&rho);
            let trace_out = linalg::trace(&output);
            let value = json!({
                "output": jsonio::matrix_to_json(&output),
                "trace_in": jsonio::complex_to_json(trace_in),
                "trace_out": jsonio::complex_to_json(trace_out),
            });
            let text = format!(
                "applied channel: trace {:.6} -> {:.6}",
                trace_in.re, trace_out.re
            );
            Ok(CommandOutput::ok(value, text))
        }
    }
}

fn decomposition_for(rep: &Representation, cfg: &RunConfig) -> Result<IsotypicDecomposition, TwirlError> {
    isotypic_decomposition(rep, cfg.seed)
}

fn certificate_summary(cert: &PrCertificate) -> String {
    let mut s = format!("verdict {}", cert.verdict.as_str());
    if let Some(d) = cert.kernel_dim {
        s.push_str(&format!(", kernel dim {d}"));
    }
    if let Some(basis) = &cert.subspace {
        s.push_str(&format!(", subspace dim {}", basis.len()));
    }
    if cert.counterexample.is_some() {
        s.push_str(", counterexample attached");
    }
    s
}

fn cmd_phase(cmd: PhaseCmd, cfg: &RunConfig) -> Result<CommandOutput, TwirlError> {
    match cmd {
        PhaseCmd::Bound { rep } => {
            let rep = load_rep(&rep, cfg)?;
            let dec = decomposition_for(&rep, cfg)?;
            let beta = dec.multiplicities.iter().copied().max().unwrap_or(0);
            let frame_term = dec.d / 4 + 1;
            let bound = pr_lower_bound(&dec);
            let value = json!({
                "d": dec.d,
                "beta": beta,
                "frame_term": frame_term,
                "lower_bound": bound,
            });
            let text = format!(
                "retrievability index >= {bound} (max multiplicity {beta}, frame construction {frame_term})"
            );
            Ok(CommandOutput::ok(value, text))
        }
        PhaseCmd::Witness { rep } => {
            let rep = load_rep(&rep, cfg)?;
            let dec = decomposition_for(&rep, cfg)?;
            let multiplicity = multiplicity_pr_witness(&rep, &dec, 200, cfg.seed)?;
            let subspace = subspace_pr_witness(&rep, &dec, cfg.seed)?;
            let text = format!(
                "multiplicity witness: {}; threaded witness: {}",
                certificate_summary(&multiplicity),
                certificate_summary(&subspace)
            );
            let value = json!({
                "lower_bound": pr_lower_bound(&dec),
                "multiplicity": jsonio::pr_certificate_to_json(&multiplicity),
                "subspace": jsonio::pr_certificate_to_json(&subspace),
            });
            Ok(CommandOutput::ok(value, text))
        }
        PhaseCmd::Falsify { frame, budget } => {
            let frame = jsonio::frame_from_json(&jsonio::load_json(&frame)?)?;
            let measurements = OperatorFrame::from_frame(&frame);
            let cert = pr_falsifier(&measurements, cfg.seed, budget)?;
            let text = certificate_summary(&cert);
            let value = jsonio::pr_certificate_to_json(&cert);
            Ok(CommandOutput::ok(value, text))
        }
        PhaseCmd::Equivalence { rep, map, budget } => {
            let rep = load_rep(&rep, cfg)?;
            let dec = decomposition_for(&rep, cfg)?;
            let t = match map {
                Some(path) => jsonio::matrix_from_json(&jsonio::load_json(&path)?)?,
                None => subspace_pr_witness(&rep, &dec, cfg.seed)?
                    .range_map
                    .expect("threaded witness always carries its map"),
            };
            let report = range_measurement_equivalence(&rep, &dec, &t, cfg.seed, budget)?;
            let text = format!(
                "sides {}; channel: {}; measurements: {} (kernel mismatch {:.3e})",
                if report.agree { "agree" } else { "DISAGREE" },
                certificate_summary(&report.channel_side),
                certificate_summary(&report.measurement_side),
                report.kernel_mismatch
            );
            let value = jsonio::equivalence_report_to_json(&report);
            Ok(CommandOutput {
                value,
                text,
                code: if report.agree { 0 } else { 3 },
            })
        }
    }
}
