use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ddescent::cache::{CacheLookup, TableCache};
use ddescent::dist::{
    exact_distribution_with_workers, oracle_eulerian, oracle_inversions, DistributionTable,
    DEFAULT_ENUMERATION_LIMIT,
};
use ddescent::error::Error;
use ddescent::janson::{
    convergence_table, independence_audit, janson_bound, ConvergenceOutcome, WindowRule,
};
use ddescent::jsonio::{
    canonical_json, certificate_csv_row, certificate_value, distribution_csv, format_float,
    growth_value, normality_csv_row, normality_value, pairs_csv, table_value,
    CERTIFICATE_CSV_HEADER, NORMALITY_CSV_HEADER, PAIR_DUMP_CSV_HEADER,
};
use ddescent::manifest::{result_document, RunManifest};
use ddescent::mc::{
    growth_regime_experiment, simulate_with_samples, GrowthOutcome, SimulationConfig,
};
use ddescent::perm::{DescentSpec, PairIndex};
use ddescent::report::{log_concavity_survey, run_all_criteria};
use ddescent::stats::{classify_pair, pair_class_counts};
use ddescent::Result;

#[derive(Parser)]
#[command(
    name = "ddescent",
    version,
    about = "Exact and empirical distributions of d-descents of permutations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OracleKind {
    Inversions,
    Eulerian,
}

#[derive(Args, Clone)]
struct EmitArgs {
    /// Output format for the payload
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the payload (with its run manifest) to this file instead of
    /// stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact distribution table of the statistic over S_n
    Exact {
        #[arg(long)]
        n: u32,
        /// Uniform window: pairs (i, j) with j <= i + d are eligible
        #[arg(long, conflicts_with = "vector")]
        d: Option<u32>,
        /// Per-position windows, comma separated (length n - 1)
        #[arg(long, value_delimiter = ',')]
        vector: Option<Vec<u32>>,
        /// Enumeration guard; n beyond this is refused
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: u32,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Table cache directory (also via DDESCENT_CACHE_DIR)
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Closed-form distribution oracles
    Oracle {
        #[arg(value_enum)]
        kind: OracleKind,
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Monte Carlo normality diagnostics of the standardized statistic
    Simulate {
        #[arg(long, required_unless_present = "epsilon")]
        n: Option<u32>,
        #[arg(long, conflicts_with = "vector")]
        d: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        vector: Option<Vec<u32>>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Growth-regime mode: d = max(1, floor(n^(1 - epsilon))) along
        /// --schedule
        #[arg(long, requires = "schedule", conflicts_with_all = ["n", "d", "vector"])]
        epsilon: Option<f64>,
        /// Schedule of n values for --epsilon mode, comma separated
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<u32>>,
        /// Enumeration cap for table-based standardization
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: u32,
        /// Also write the sorted standardized samples to this CSV file
        #[arg(long)]
        dump_samples: Option<PathBuf>,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Dependency-graph certificates: bound (default), --table, or --audit
    Janson {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        d: Option<u32>,
        /// Criterion order m (bound mode default 3; auto for --epsilon
        /// tables)
        #[arg(long)]
        m: Option<u32>,
        /// Materialize the graph and use its true maximum degree
        #[arg(long, default_value_t = false)]
        exact_degree: bool,
        /// Emit certificates along --schedule instead of a single bound
        #[arg(long, default_value_t = false, conflicts_with = "audit")]
        table: bool,
        /// Exhaustively audit the joint laws of the indicators over S_n
        #[arg(long, default_value_t = false)]
        audit: bool,
        /// d rule for --table via d = max(1, floor(n^(1 - epsilon)))
        #[arg(long, conflicts_with = "d")]
        epsilon: Option<f64>,
        /// Schedule of n values for --table, comma separated
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<u32>>,
        /// Enumeration cap for --audit
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: u32,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Joint-expectation class counts of indicator pairs
    Pairs {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        /// Dump the full ordered-pair classification
        #[arg(long, default_value_t = false)]
        dump: bool,
        #[command(flatten)]
        emit: EmitArgs,
    },
    /// Run the full reproduction suite and write a summary
    Report {
        /// Output directory for criteria.json and log_concavity.csv
        #[arg(long, default_value = "ddescent-report")]
        out: PathBuf,
        /// Largest n for the log-concavity survey
        #[arg(long, default_value_t = 9)]
        max_n: u32,
    },
}

fn spec_from_flags(d: Option<u32>, vector: Option<Vec<u32>>) -> Result<DescentSpec> {
    match (d, vector) {
        (Some(d), None) => DescentSpec::uniform(d),
        (None, Some(ds)) => DescentSpec::vector(ds),
        (None, None) => Err(Error::Input("one of --d or --vector is required".into())),
        (Some(_), Some(_)) => Err(Error::Input("--d and --vector are exclusive".into())),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// JSON to a file carries the manifest alongside the payload; CSV embeds
/// the manifest as a leading comment line. Stdout gets the bare payload.
fn emit_payload(
    emit: &EmitArgs,
    manifest: &RunManifest,
    payload: Value,
    csv: Option<String>,
) -> Result<()> {
    match emit.format {
        OutputFormat::Json => {
            let text = canonical_json(&payload);
            match &emit.out {
                Some(path) => {
                    let doc = canonical_json(&result_document(manifest, payload));
                    write_file(path, &format!("{doc}\n"))?;
                }
                None => println!("{text}"),
            }
        }
        OutputFormat::Csv => {
            let body = csv.ok_or_else(|| {
                Error::Input("this subcommand has no csv form; use --format json".into())
            })?;
            match &emit.out {
                Some(path) => {
                    let manifest_line = format!("# manifest {}", canonical_json(&manifest.value()));
                    write_file(path, &format!("{manifest_line}\n{body}"))?;
                }
                None => print!("{body}"),
            }
        }
    }
    Ok(())
}

fn manifest_for(command: &str, params: &[(&str, String)], seed: Option<u64>) -> RunManifest {
    let map: BTreeMap<String, String> = params
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    RunManifest::new(command, map, seed)
}

fn run_exact(
    n: u32,
    d: Option<u32>,
    vector: Option<Vec<u32>>,
    limit: u32,
    workers: usize,
    cache_dir: Option<PathBuf>,
    emit: EmitArgs,
) -> Result<()> {
    let spec = spec_from_flags(d, vector)?;
    spec.validate_for(n)?;
    let cache = TableCache::from_flag_or_env(cache_dir)?;
    let compute = || exact_distribution_with_workers(n, &spec, limit, workers);
    let table: DistributionTable = match &cache {
        Some(cache) => match cache.lookup(n, &spec) {
            CacheLookup::Hit(table) => {
                eprintln!("cache hit for n={n}, spec={}", spec.label());
                table
            }
            CacheLookup::Miss => {
                let table = compute()?;
                cache.store(&table)?;
                table
            }
            CacheLookup::Rejected(reason) => {
                eprintln!("warning: cache entry rejected ({reason}); recomputing");
                let table = compute()?;
                cache.store(&table)?;
                table
            }
        },
        None => compute()?,
    };
    let manifest = manifest_for(
        "exact",
        &[
            ("n", n.to_string()),
            ("spec", table.spec().label()),
            ("limit", limit.to_string()),
            ("workers", workers.to_string()),
        ],
        None,
    );
    emit_payload(
        &emit,
        &manifest,
        table_value(&table),
        Some(distribution_csv(&table)),
    )
}

fn run_oracle(kind: OracleKind, n: u32, emit: EmitArgs) -> Result<()> {
    let (name, table) = match kind {
        OracleKind::Inversions => ("inversions", oracle_inversions(n)?),
        OracleKind::Eulerian => ("eulerian", oracle_eulerian(n)?),
    };
    let manifest = manifest_for(
        "oracle",
        &[("kind", name.to_string()), ("n", n.to_string())],
        None,
    );
    emit_payload(
        &emit,
        &manifest,
        table_value(&table),
        Some(distribution_csv(&table)),
    )
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    n: Option<u32>,
    d: Option<u32>,
    vector: Option<Vec<u32>>,
    trials: u64,
    seed: u64,
    workers: usize,
    epsilon: Option<f64>,
    schedule: Option<Vec<u32>>,
    limit: u32,
    dump_samples: Option<PathBuf>,
    emit: EmitArgs,
) -> Result<()> {
    if let Some(epsilon) = epsilon {
        let schedule = schedule.unwrap_or_default();
        let entries = growth_regime_experiment(epsilon, &schedule, trials, seed, workers)?;
        for entry in &entries {
            if let GrowthOutcome::Skipped { reason } = &entry.outcome {
                eprintln!("warning: skipped n={} (d={}): {reason}", entry.n, entry.d);
            }
        }
        let manifest = manifest_for(
            "simulate",
            &[
                ("epsilon", format!("{epsilon}")),
                (
                    "schedule",
                    schedule
                        .iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                ),
                ("trials", trials.to_string()),
                ("workers", workers.to_string()),
            ],
            Some(seed),
        );
        let mut csv = format!("{NORMALITY_CSV_HEADER}\n");
        for entry in &entries {
            if let GrowthOutcome::Report(report) = &entry.outcome {
                csv.push_str(&normality_csv_row(report));
                csv.push('\n');
            }
        }
        return emit_payload(
            &emit,
            &manifest,
            growth_value(epsilon, trials, seed, &entries),
            Some(csv),
        );
    }

    let n = n.ok_or_else(|| Error::Input("--n is required without --epsilon".into()))?;
    let spec = spec_from_flags(d, vector)?;
    let mut cfg = SimulationConfig::new(n, spec, trials, seed).with_workers(workers);
    cfg.enumeration_limit = limit;
    let (report, samples) = simulate_with_samples(&cfg)?;
    if let Some(path) = dump_samples {
        let mut body = String::from("z\n");
        for z in &samples {
            body.push_str(&format_float(*z));
            body.push('\n');
        }
        write_file(&path, &body)?;
    }
    let manifest = manifest_for(
        "simulate",
        &[
            ("n", n.to_string()),
            ("spec", cfg.spec.label()),
            ("trials", trials.to_string()),
            ("workers", workers.to_string()),
        ],
        Some(seed),
    );
    let csv = format!("{NORMALITY_CSV_HEADER}\n{}\n", normality_csv_row(&report));
    emit_payload(&emit, &manifest, normality_value(&report), Some(csv))
}

#[allow(clippy::too_many_arguments)]
fn run_janson(
    n: Option<u32>,
    d: Option<u32>,
    m: Option<u32>,
    exact_degree: bool,
    table: bool,
    audit: bool,
    epsilon: Option<f64>,
    schedule: Option<Vec<u32>>,
    limit: u32,
    emit: EmitArgs,
) -> Result<()> {
    if audit {
        let n = n.ok_or_else(|| Error::Input("--audit needs --n".into()))?;
        let d = d.ok_or_else(|| Error::Input("--audit needs --d".into()))?;
        let passed = independence_audit(n, d, limit)?;
        let manifest = manifest_for(
            "janson",
            &[
                ("mode", "audit".to_string()),
                ("n", n.to_string()),
                ("d", d.to_string()),
                ("limit", limit.to_string()),
            ],
            None,
        );
        let payload = json!({"n": n, "d": d, "limit": limit, "passed": passed});
        let csv = format!("n,d,limit,passed\n{n},{d},{limit},{passed}\n");
        emit_payload(&emit, &manifest, payload, Some(csv))?;
        if !passed {
            return Err(Error::Input(format!(
                "independence audit failed for n={n}, d={d}"
            )));
        }
        return Ok(());
    }

    if table {
        let schedule =
            schedule.ok_or_else(|| Error::Input("--table needs --schedule n1,n2,...".into()))?;
        let rule = match (d, epsilon) {
            (Some(d), None) => WindowRule::Fixed(d),
            (None, Some(epsilon)) => WindowRule::Power(epsilon),
            _ => {
                return Err(Error::Input(
                    "--table needs exactly one of --d or --epsilon".into(),
                ))
            }
        };
        let rows = convergence_table(rule, m, &schedule)?;
        let mut csv = format!("{CERTIFICATE_CSV_HEADER}\n");
        let mut cells = Vec::new();
        for row in &rows {
            match row {
                ConvergenceOutcome::Certificate(cert) => {
                    csv.push_str(&certificate_csv_row(cert));
                    csv.push('\n');
                    cells.push(certificate_value(cert));
                }
                ConvergenceOutcome::Skipped { n, d, reason } => {
                    eprintln!("warning: skipped n={n} (d={d}): {reason}");
                    cells.push(json!({"n": n, "d": d, "skipped": reason}));
                }
            }
        }
        let manifest = manifest_for(
            "janson",
            &[
                ("mode", "table".to_string()),
                (
                    "rule",
                    match rule {
                        WindowRule::Fixed(d) => format!("fixed:{d}"),
                        WindowRule::Power(epsilon) => format!("power:{epsilon}"),
                    },
                ),
            ],
            None,
        );
        return emit_payload(&emit, &manifest, json!({ "rows": cells }), Some(csv));
    }

    let n = n.ok_or_else(|| Error::Input("--n is required".into()))?;
    let d = d.ok_or_else(|| Error::Input("--d is required".into()))?;
    let cert = janson_bound(n, d, m.unwrap_or(3), exact_degree)?;
    let manifest = manifest_for(
        "janson",
        &[
            ("mode", "bound".to_string()),
            ("n", n.to_string()),
            ("d", d.to_string()),
            ("m", cert.m.to_string()),
            ("exact_degree", exact_degree.to_string()),
        ],
        None,
    );
    let csv = format!("{CERTIFICATE_CSV_HEADER}\n{}\n", certificate_csv_row(&cert));
    emit_payload(&emit, &manifest, certificate_value(&cert), Some(csv))
}

fn run_pairs(n: u32, d: u32, dump: bool, emit: EmitArgs) -> Result<()> {
    let counts = pair_class_counts(n, d)?;
    let manifest = manifest_for(
        "pairs",
        &[
            ("n", n.to_string()),
            ("d", d.to_string()),
            ("dump", dump.to_string()),
        ],
        None,
    );
    if !dump {
        return emit_payload(
            &emit,
            &manifest,
            ddescent::jsonio::pair_class_value(n, d, &counts),
            Some(pairs_csv(&counts)),
        );
    }
    let mut eligible = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n.min(i + d) {
            eligible.push(PairIndex::new(i, j)?);
        }
    }
    let mut rows = Vec::new();
    let mut csv = format!("{PAIR_DUMP_CSV_HEADER}\n");
    for &a in &eligible {
        for &b in &eligible {
            let class = classify_pair(a, b);
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                a.i(),
                a.j(),
                b.i(),
                b.j(),
                class.name(),
                class.expectation()
            ));
            rows.push(json!([a.i(), a.j(), b.i(), b.j(), class.name()]));
        }
    }
    let payload = json!({
        "n": n,
        "d": d,
        "counts": ddescent::jsonio::pair_class_value(n, d, &counts),
        "pairs": rows,
    });
    emit_payload(&emit, &manifest, payload, Some(csv))
}

fn run_report(out: PathBuf, max_n: u32) -> Result<bool> {
    let results = run_all_criteria();
    for result in &results {
        println!("{}", result.line());
    }
    let findings = log_concavity_survey(max_n)?;
    let log_concave_everywhere = findings.iter().all(|f| f.violations.is_empty());
    println!(
        "log-concavity survey (n <= {max_n}): {} tables, {}",
        findings.len(),
        if log_concave_everywhere {
            "no violations found".to_string()
        } else {
            let bad: Vec<String> = findings
                .iter()
                .filter(|f| !f.violations.is_empty())
                .map(|f| format!("(n={}, d={})", f.n, f.d))
                .collect();
            format!("violations at {}", bad.join(", "))
        }
    );

    std::fs::create_dir_all(&out)?;
    let manifest = manifest_for("report", &[("max_n", max_n.to_string())], None);
    let rows: Vec<Value> = results
        .iter()
        .map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed, "details": r.details}))
        .collect();
    let payload = json!({
        "criteria": rows,
        "all_passed": results.iter().all(|r| r.passed),
        "log_concavity_violation_free": log_concave_everywhere,
    });
    write_file(
        &out.join("criteria.json"),
        &format!("{}\n", canonical_json(&result_document(&manifest, payload))),
    )?;
    let mut csv = String::from("n,d,max_value,violations\n");
    for finding in &findings {
        let violations: Vec<String> = finding.violations.iter().map(|v| v.to_string()).collect();
        csv.push_str(&format!(
            "{},{},{},{}\n",
            finding.n,
            finding.d,
            finding.max_value,
            violations.join(";")
        ));
    }
    write_file(&out.join("log_concavity.csv"), &csv)?;
    eprintln!("wrote {}", out.display());
    Ok(results.iter().all(|r| r.passed))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Exact {
            n,
            d,
            vector,
            limit,
            workers,
            cache_dir,
            emit,
        } => run_exact(n, d, vector, limit, workers, cache_dir, emit)?,
        Command::Oracle { kind, n, emit } => run_oracle(kind, n, emit)?,
        Command::Simulate {
            n,
            d,
            vector,
            trials,
            seed,
            workers,
            epsilon,
            schedule,
            limit,
            dump_samples,
            emit,
        } => run_simulate(
            n,
            d,
            vector,
            trials,
            seed,
            workers,
            epsilon,
            schedule,
            limit,
            dump_samples,
            emit,
        )?,
        Command::Janson {
            n,
            d,
            m,
            exact_degree,
            table,
            audit,
            epsilon,
            schedule,
            limit,
            emit,
        } => run_janson(
            n,
            d,
            m,
            exact_degree,
            table,
            audit,
            epsilon,
            schedule,
            limit,
            emit,
        )?,
        Command::Pairs { n, d, dump, emit } => run_pairs(n, d, dump, emit)?,
        Command::Report { out, max_n } => {
            if !run_report(out, max_n)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            print!("{err}");
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            match err {
                Error::Capacity(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
