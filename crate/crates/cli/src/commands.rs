use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use etf_core::construct::{build_construction, certify_inequivalent, enumerate_fourier_tensors, Equivalence};
use etf_core::entangle::{
    average_purity_with, optimize_average_purity, Bipartition, FrameFamily, OptimizerConfig, SignatureFamily,
};
use etf_core::families::{find_er_pairs, u16_family, u16_parametric, validate_family};
use etf_core::io::{read_matrix_file, write_matrix_file};
use etf_core::roots::{roots_compatible_etfs, roots_scan, sic_root_candidates, RootsFeasibility};
use etf_core::solver::{scan, scan_to_csv, solve_signature, PolishConfig, SolverConfig, SolverStatus};
use etf_core::{
    fickus_check, spec_from_dn, verify_etf, verify_signature, ComplexMatrix64, EtfCandidate, SignatureUnitary64,
    VerificationReport,
};

use crate::manifest::RunManifest;
use crate::{
    ChartArgs, Cli, CliError, Command, ConstructCommand, FamilyCommand, FamilyName, FickusArgs, FrameFlags,
    MatrixKind, Outcome, PurityCommand, RootsArgs, ScanArgs, SolveArgs, SolverFlags, VerifyArgs,
};

type CliResult = Result<Outcome, CliError>;

pub fn run(cli: Cli) -> CliResult {
    let threads = cli.threads;
    match cli.command {
        Command::Solve(args) => solve(args, threads),
        Command::Verify(args) => verify(args),
        Command::Scan(args) => run_scan(args, threads),
        Command::Construct(cmd) => construct(cmd),
        Command::Roots(args) => roots(args),
        Command::Family(cmd) => family(cmd),
        Command::Purity(cmd) => purity(cmd),
        Command::Fickus(args) => fickus(args),
        Command::Chart(args) => chart(args),
    }
}

fn print_json(value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    emit(&(text + "\n"));
    Ok(())
}

/// Writes to stdout, ignoring a closed pipe so `etf ... | head` exits quietly.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn solver_config(flags: &SolverFlags, threads: Option<usize>) -> SolverConfig {
    SolverConfig {
        max_iters: flags.max_iters,
        tol: flags.tol,
        seeds: flags.seeds,
        master_seed: flags.master_seed,
        real_mode: flags.real,
        stall_window: flags.stall_window,
        stall_epsilon: flags.stall_epsilon,
        polish: PolishConfig { threshold: flags.polish_threshold, max_iters: flags.polish_max_iters },
        threads,
    }
}

fn config_value(config: &SolverConfig, verify_tol: f64) -> Value {
    let mut v = serde_json::to_value(config).unwrap_or(Value::Null);
    v["verify_tol"] = json!(verify_tol);
    v
}

fn solve(args: SolveArgs, threads: Option<usize>) -> CliResult {
    let config = solver_config(&args.solver, threads);
    let spec = spec_from_dn::<f64>(args.d, args.n, args.solver.real)?;
    let mut manifest = RunManifest::start(config_value(&config, args.solver.verify_tol), Some(config.master_seed));
    let result = solve_signature(&spec, &config)?;

    let verification = result.signature.as_ref().map(|u| verify_signature(u, args.solver.verify_tol).1);
    let verified = verification.as_ref().is_some_and(|r| r.pass);
    print_json(&json!({
        "n": args.n,
        "d": args.d,
        "status": result.status,
        "verified": verified,
        "winning_seed_index": result.winning_seed_index,
        "iterations": result.iterations,
        "final_residual": result.final_residual,
        "best_residual": result.best_residual,
        "seeds_used": result.seeds_used,
        "tally": result.tally,
        "polished": result.polished,
        "via_complement": result.via_complement,
        "verification": verification,
    }))?;

    if let (Some(dir), Some(u)) = (&args.out, &result.signature) {
        create_dir(dir)?;
        let path = dir.join(format!("sig_N{}_d{}.json", args.n, args.d));
        write_matrix_file(&path, u.matrix())?;
        manifest.record(path);
        manifest.finish(dir).map_err(|e| io_error(dir, e))?;
    } else if let Some(dir) = &args.out {
        create_dir(dir)?;
        manifest.finish(dir).map_err(|e| io_error(dir, e))?;
    }

    Ok(if result.status == SolverStatus::Converged && verified { Outcome::Success } else { Outcome::Negative })
}

/// `Tr G² = N²/d` for the Gram matrix of a tight unit-norm frame.
fn implied_gram_dimension(g: &ComplexMatrix64) -> Result<usize, CliError> {
    let n = g.rows() as f64;
    let trace_sq: f64 = g.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let d = (n * n / trace_sq).round();
    if !d.is_finite() || d < 1.0 {
        return Err(CliError::Input("cannot infer d from the Gram matrix; pass --d".into()));
    }
    Ok(d as usize)
}

fn detect_kind(m: &ComplexMatrix64) -> MatrixKind {
    if !m.is_square() {
        return MatrixKind::Synthesis;
    }
    let unit_diagonal = m.diagonal().iter().all(|z| (z.re - 1.0).abs() < 1e-6 && z.im.abs() < 1e-6);
    if unit_diagonal {
        MatrixKind::Gram
    } else {
        MatrixKind::Signature
    }
}

fn verify(args: VerifyArgs) -> CliResult {
    let m = read_matrix_file(&args.file)?;
    let kind = args.kind.unwrap_or_else(|| detect_kind(&m));
    let report: VerificationReport;
    let mut extra = json!({});
    match kind {
        MatrixKind::Synthesis => {
            report = verify_etf(EtfCandidate::Synthesis(&m), args.tol);
        }
        MatrixKind::Gram => {
            if !m.is_square() {
                return Err(CliError::Input(format!("a Gram matrix must be square, found {}x{}", m.rows(), m.cols())));
            }
            let d = match args.d {
                Some(d) => d,
                None => implied_gram_dimension(&m)?,
            };
            report = verify_etf(EtfCandidate::Gram { matrix: &m, d }, args.tol);
        }
        MatrixKind::Signature => {
            let u = match SignatureUnitary64::new(m, args.tol) {
                Ok(u) => u,
                Err(e) => {
                    print_json(&json!({ "kind": "signature", "pass": false, "failures": [e.to_string()] }))?;
                    return Ok(Outcome::Negative);
                }
            };
            let (check, r) = verify_signature(&u, args.tol);
            extra = json!({ "signature_check": check, "theta": u.theta() });
            report = r;
        }
    }
    let kind_name = match kind {
        MatrixKind::Gram => "gram",
        MatrixKind::Signature => "signature",
        MatrixKind::Synthesis => "synthesis",
    };
    print_json(&json!({
        "kind": kind_name,
        "pass": report.pass,
        "failures": report.failures(),
        "report": report,
        "extra": extra,
    }))?;
    Ok(if report.pass { Outcome::Success } else { Outcome::Negative })
}

fn run_scan(args: ScanArgs, threads: Option<usize>) -> CliResult {
    let config = solver_config(&args.solver, threads);
    let mut manifest = RunManifest::start(
        {
            let mut v = config_value(&config, 1e-8);
            v["n_min"] = json!(args.n_min);
            v["n_max"] = json!(args.n_max);
            v
        },
        Some(config.master_seed),
    );
    let records = scan::<f64>(args.n_min, args.n_max, &config)?;
    let csv = scan_to_csv(&records)?;
    match &args.out {
        Some(dir) => {
            create_dir(dir)?;
            let path = dir.join("scan.csv");
            std::fs::write(&path, &csv).map_err(|e| io_error(&path, e))?;
            manifest.record(path);
            for r in records.iter().filter(|r| r.found) {
                if let Some(u) = &r.signature {
                    let path = dir.join(format!("sig_N{}_d{}.json", r.n, r.d));
                    write_matrix_file(&path, u.matrix())?;
                    manifest.record(path);
                }
            }
            manifest.finish(dir).map_err(|e| io_error(dir, e))?;
        }
        None => emit(&csv),
    }
    Ok(Outcome::Success)
}

fn construct(cmd: ConstructCommand) -> CliResult {
    match cmd {
        ConstructCommand::Build { expr, out } => {
            let u = build_construction::<f64>(&expr)?;
            let (check, report) = verify_signature(&u, 1e-8);
            match out {
                Some(path) => write_matrix_file(&path, u.matrix())?,
                None => emit(&etf_core::io::matrix_to_json(u.matrix())),
            }
            eprintln!("N = {}, d = {}, verified = {}, worst invariant = {:e}", u.n(), u.dimension(), report.pass, check.worst());
            Ok(if report.pass { Outcome::Success } else { Outcome::Negative })
        }
        ConstructCommand::Enumerate { n, out } => {
            let list = enumerate_fourier_tensors::<f64>(n)?;
            let mut rows = Vec::new();
            let mut all_pass = true;
            if let Some(dir) = &out {
                create_dir(dir)?;
            }
            for (idx, t) in list.iter().enumerate() {
                let (_, report) = verify_signature(&t.signature, 1e-8);
                all_pass &= report.pass;
                let file = match &out {
                    Some(dir) => {
                        let path = dir.join(format!("tensor_N{n}_{idx}.json"));
                        write_matrix_file(&path, t.signature.matrix())?;
                        Some(path)
                    }
                    None => None,
                };
                rows.push(json!({ "label": t.label(), "factors": t.factors, "d": t.signature.dimension(), "verified": report.pass, "file": file }));
            }
            let mut pairs = Vec::new();
            for i in 0..list.len() {
                for j in i + 1..list.len() {
                    let eq = certify_inequivalent(list[i].signature.matrix(), list[j].signature.matrix())?;
                    pairs.push(json!({ "a": i, "b": j, "result": eq }));
                }
            }
            print_json(&json!({ "n": n, "count": list.len(), "constructions": rows, "pairs": pairs }))?;
            Ok(if all_pass { Outcome::Success } else { Outcome::Negative })
        }
        ConstructCommand::Certify { a, b } => {
            let (ma, mb) = (read_matrix_file(&a)?, read_matrix_file(&b)?);
            let eq = certify_inequivalent(&ma, &mb)?;
            print_json(&json!({ "result": eq }))?;
            Ok(match eq {
                Equivalence::Inequivalent => Outcome::Success,
                Equivalence::Inconclusive => Outcome::Negative,
            })
        }
    }
}

fn roots_row(r: &RootsFeasibility) -> String {
    let two_k = r.two_k.value.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
    let n_prime = r.n_prime.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
    let witness = r
        .witness
        .as_ref()
        .map(|w| {
            w.iter()
                .zip(&r.primes)
                .filter(|(x, _)| **x > 0)
                .map(|(x, p)| format!("{x}*{p}"))
                .collect::<Vec<_>>()
                .join(" + ")
        })
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "-".into());
    let mut notes = Vec::new();
    if r.trivial {
        notes.push("trivial");
    }
    if r.negative_two_k {
        notes.push("2k < 0");
    }
    format!("{:>6} {:>6} {:>8} {:>8}  {:<20} {}", r.d, two_k, n_prime, r.feasible, witness, notes.join(", "))
}

fn roots(args: RootsArgs) -> CliResult {
    if let Some(d_max) = args.sic {
        let ds = sic_root_candidates(d_max);
        if args.json {
            print_json(&json!({ "d_max": d_max, "candidates": ds }))?;
        } else {
            emit(&format!("{}\n", ds.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")));
        }
        return Ok(Outcome::Success);
    }
    let n = args.n.ok_or_else(|| CliError::Input("--n is required".into()))?;
    let records = if args.all { roots_scan(n, args.m)? } else { roots_compatible_etfs(n, args.m)? };
    if args.json {
        print_json(&records)?;
    } else {
        let mut text = format!("N = {n}, m = {}: {} (primes {:?})\n", args.m, etf_core::roots::NECESSARY_ONLY, etf_core::roots::prime_support(args.m));
        text += &format!("{:>6} {:>6} {:>8} {:>8}  {:<20} {}\n", "d", "2k", "n'", "feasible", "witness", "notes");
        for r in &records {
            text += &roots_row(r);
            text.push('\n');
        }
        emit(&text);
    }
    Ok(Outcome::Success)
}

fn six_alphas(alphas: &[f64]) -> Result<[f64; 6], CliError> {
    alphas
        .try_into()
        .map_err(|_| CliError::Input(format!("expected 6 comma-separated phases, found {}", alphas.len())))
}

fn family(cmd: FamilyCommand) -> CliResult {
    match cmd {
        FamilyCommand::U16 { alphas, out } => {
            let u = u16_family(&six_alphas(&alphas)?);
            match out {
                Some(path) => write_matrix_file(&path, u.matrix())?,
                None => emit(&etf_core::io::matrix_to_json(u.matrix())),
            }
            Ok(Outcome::Success)
        }
        FamilyCommand::Detect { file } => {
            let m = read_matrix_file(&file)?;
            let pairs = find_er_pairs(&m)?;
            let listed: Vec<_> = pairs.iter().map(|p| p.one_based()).collect();
            print_json(&json!({ "n": m.rows(), "count": listed.len(), "pairs": listed }))?;
            Ok(Outcome::Success)
        }
        FamilyCommand::Validate { family, samples, master_seed, tol } => {
            let fam = match family {
                FamilyName::U16 => u16_parametric::<f64>(),
            };
            let report = validate_family(&fam, samples, master_seed, tol);
            print_json(&report)?;
            Ok(if report.pass { Outcome::Success } else { Outcome::Negative })
        }
    }
}

fn frame_family(flags: &FrameFlags) -> Result<(SignatureFamily, Bipartition), CliError> {
    let bp: Bipartition = flags.bipartition.parse()?;
    let fam = match flags.family {
        FamilyName::U16 => SignatureFamily::u16(flags.factorization.into()),
    };
    Ok((fam, bp))
}

fn purity(cmd: PurityCommand) -> CliResult {
    match cmd {
        PurityCommand::Eval { frame, alphas } => {
            let (fam, bp) = frame_family(&frame)?;
            let alphas = six_alphas(&alphas)?;
            let f = fam.frame(&alphas)?;
            let report = average_purity_with(&f, bp, frame.order.into())?;
            print_json(&json!({ "alphas": alphas, "factorization": fam.factorization, "report": report }))?;
            Ok(Outcome::Success)
        }
        PurityCommand::Optimize { frame, mode, restarts, master_seed, max_iters, f_tol, out } => {
            let (fam, bp) = frame_family(&frame)?;
            let config = OptimizerConfig {
                restarts,
                master_seed,
                max_iters,
                f_tol,
                order: frame.order.into(),
                ..OptimizerConfig::default()
            };
            let mut manifest = RunManifest::start(
                json!({ "optimizer": config, "bipartition": bp, "factorization": fam.factorization, "mode": etf_core::entangle::Mode::from(mode) }),
                Some(master_seed),
            );
            let result = optimize_average_purity(&fam, bp, mode.into(), &config)?;
            print_json(&result)?;
            if let Some(dir) = &out {
                create_dir(dir)?;
                let path = dir.join("purity_optimum.json");
                let text = serde_json::to_string_pretty(&result).map_err(|e| CliError::Internal(e.to_string()))?;
                std::fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
                manifest.record(path);
                manifest.finish(dir).map_err(|e| io_error(dir, e))?;
            }
            Ok(Outcome::Success)
        }
    }
}

fn fickus(args: FickusArgs) -> CliResult {
    if args.d < 1 || args.d >= args.n {
        return Err(CliError::Input(format!("requires 1 <= d < n, got d = {}, n = {}", args.d, args.n)));
    }
    let holds = fickus_check(args.d, args.n);
    print_json(&json!({ "d": args.d, "n": args.n, "holds": holds }))?;
    Ok(if holds { Outcome::Success } else { Outcome::Negative })
}

#[derive(Deserialize)]
struct ScanRow {
    n: usize,
    d: usize,
    found: bool,
}

#[derive(Serialize)]
struct ChartRow {
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    theta: f64,
    exists: bool,
}

fn chart_rows(path: &Path) -> Result<Vec<ChartRow>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let mut scanned = Vec::new();
    for row in reader.deserialize::<ScanRow>() {
        scanned.push(row.map_err(|e| io_error(path, e))?);
    }
    let mut ns: Vec<usize> = scanned.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut out = Vec::new();
    for n in ns {
        // d = 0 and d = N are the trivial endpoints at θ = 0 and θ = π.
        out.push(ChartRow { n, d: 0, theta: 0.0, exists: true });
        let mut ds: Vec<&ScanRow> = scanned.iter().filter(|r| r.n == n).collect();
        ds.sort_by_key(|r| r.d);
        for r in ds {
            let theta = 2.0 * (r.d as f64 / n as f64).sqrt().asin();
            out.push(ChartRow { n, d: r.d, theta, exists: r.found });
        }
        out.push(ChartRow { n, d: n, theta: std::f64::consts::PI, exists: true });
    }
    Ok(out)
}

fn chart(args: ChartArgs) -> CliResult {
    let rows = chart_rows(&args.scan_csv)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        writer.serialize(r).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    match args.out {
        Some(path) => write_bytes(&path, &bytes)?,
        None => emit(&String::from_utf8_lossy(&bytes)),
    }
    Ok(Outcome::Success)
}

fn write_bytes(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| io_error(path, e))
}
