use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use invmetric::domains::ModelDomain;
use invmetric::geometry::ComplexVector;
use invmetric::harness::{
    chain_check, emit_report, estimate_point, fit_exponent, read_rows, report_to_json, rows_to_csv, run_scan, verify_lemma, Field,
    Format, LabeledFit, Lemma, PointOptions, Report, ScanConfig,
};
use invmetric::metrics::{KobConfig, MetricKind};
use invmetric::Error;

/// Invariant metric estimation on model domains.
#[derive(Parser)]
#[command(name = "invmetric", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bracket metrics at one point and tangent vector.
    Estimate {
        /// e.g. `g`, `disk`, `ball:n=2,r=1`, `geps:m=2,k=2,n=3,eps=2`
        #[arg(long)]
        domain: String,
        /// Comma-separated complex coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value = "Kobayashi", value_delimiter = ',')]
        kinds: Vec<String>,
        /// Use the cheaper optimizer settings.
        #[arg(long)]
        light: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a boundary scan described by a JSON config.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Fit a power law to one field of scan rows.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "upper")]
        field: String,
        #[arg(long)]
        kind: Option<String>,
    },
    /// Report crossings of brackets along the metric chain.
    ChainCheck {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run a randomized verification campaign.
    Verify {
        #[arg(long)]
        lemma: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convert scan rows, adding fits and chain checks in JSON output.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Violation(String),
    Invalid(String),
    Estimation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Estimation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Invalid(m) | Failure::Estimation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Configuration(_)
            | Error::Parameter(_)
            | Error::Dimension { .. }
            | Error::Precondition(_)
            | Error::Io { .. }
            | Error::Serialization(_)
            | Error::InsufficientData(_) => Failure::Invalid(e.to_string()),
            _ => Failure::Estimation(e.to_string()),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate {
            domain,
            point,
            vector,
            kinds,
            light,
            seed,
        } => estimate(&domain, &point, &vector, &kinds, light, seed),
        Command::Scan { config, out, format } => scan(&config, out.as_deref(), &format),
        Command::Fit { input, field, kind } => fit(&input, &field, kind.as_deref()),
        Command::ChainCheck { input } => chain(&input),
        Command::Verify { lemma, trials, seed } => verify(&lemma, trials, seed),
        Command::Report { input, format, out } => report(&input, &format, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("invmetric: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn estimate(domain: &str, point: &str, vector: &str, kinds: &[String], light: bool, seed: u64) -> CliResult {
    let domain: ModelDomain = domain.parse()?;
    let p: ComplexVector = point.parse()?;
    let x: ComplexVector = vector.parse()?;
    let kinds = kinds.iter().map(|k| k.parse()).collect::<Result<Vec<MetricKind>, _>>()?;
    let opts = PointOptions {
        kob: if light { KobConfig::light() } else { KobConfig::default() },
        seed,
        ..PointOptions::default()
    };
    let start = Instant::now();
    let brackets = estimate_point(&domain, &p, &x, &kinds, &opts)?;
    let ms = start.elapsed().as_millis() as u64;
    let out: Vec<_> = brackets
        .iter()
        .map(|b| {
            json!({
                "kind": b.kind,
                "lower": json_num(b.lower),
                "upper": json_num(b.upper),
                "witness_ref": { "method": b.method, "margin": b.margin },
                "config": opts,
                "wallclock_ms": ms,
            })
        })
        .collect();
    print_json(&serde_json::Value::Array(out));
    Ok(())
}

fn json_num(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(invmetric::metrics::ext_real::format(v))
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn scan(config: &Path, out: Option<&Path>, format: &str) -> CliResult {
    let format: Format = format.parse()?;
    let cfg = ScanConfig::from_json(&read_text(config)?)?;
    let rows = run_scan(&cfg)?;
    let failed = rows.iter().filter(|r| r.is_error()).count();
    let report = Report {
        rows,
        ..Default::default()
    };
    match out {
        Some(path) => emit_report(&report, format, path)?,
        None => match format {
            Format::Csv => print!("{}", rows_to_csv(&report.rows)?),
            Format::Json => println!("{}", report_to_json(&report)?),
        },
    }
    if failed > 0 {
        return Err(Failure::Estimation(format!("{failed} rows failed")));
    }
    Ok(())
}

fn fit(input: &Path, field: &str, kind: Option<&str>) -> CliResult {
    let field: Field = field.parse()?;
    let mut rows = read_rows(input)?;
    if let Some(k) = kind {
        let k: MetricKind = k.parse()?;
        rows.retain(|r| r.kind == k);
    }
    let f = fit_exponent(&rows, field)?;
    print_json(&json!({ "field": field.to_string(), "fit": f }));
    Ok(())
}

fn chain(input: &Path) -> CliResult {
    let rows = read_rows(input)?;
    let violations = chain_check(&rows);
    print_json(&json!({ "rows": rows.len(), "violations": violations }));
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{} chain violations", violations.len())))
    }
}

fn verify(lemma: &str, trials: usize, seed: u64) -> CliResult {
    let lemma: Lemma = lemma.parse()?;
    if trials == 0 {
        return Err(Failure::Invalid("trials must be positive".into()));
    }
    let report = verify_lemma(lemma, trials, seed)?;
    print_json(&serde_json::to_value(&report).expect("serializable"));
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{} of {trials} trials failed", report.failures)))
    }
}

fn report(input: &Path, format: &str, out: &Path) -> CliResult {
    let format: Format = format.parse()?;
    let rows = read_rows(input)?;
    let mut kinds: Vec<MetricKind> = Vec::new();
    for r in &rows {
        if !kinds.contains(&r.kind) {
            kinds.push(r.kind);
        }
    }
    let mut fits = Vec::new();
    for k in kinds {
        let subset: Vec<_> = rows.iter().filter(|r| r.kind == k).cloned().collect();
        for field in [Field::Lower, Field::Upper] {
            if let Ok(fit) = fit_exponent(&subset, field) {
                fits.push(LabeledFit { kind: k, field, fit });
            }
        }
    }
    let violations = chain_check(&rows);
    let report = Report {
        rows,
        fits,
        verifications: Vec::new(),
        violations,
    };
    emit_report(&report, format, out)?;
    Ok(())
}
