//! Config loading, report assembly and output for the `toeplab` binary.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;
use toeplab::conventions::{CONVENTIONS, CONVENTIONS_VERSION};
use toeplab::experiments::{self, ExpansionFit, ExperimentConfig, ExperimentKind, ExperimentResults, Outcome};
use toeplab::geometry::ModelKind;
use toeplab::symbol::SYMBOL_CATALOG;

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_THRESHOLD: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Run(#[from] toeplab::Error),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub artifact: String,
    pub conventions_version: u32,
    /// SHA-256 of the convention statements.
    pub conventions_hash: String,
}

/// Everything a run produces; serialized as the report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub results: RunResults,
    pub pass: bool,
    pub versions: Versions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResults {
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: Outcome,
}

pub fn versions() -> Versions {
    let mut h = Sha256::new();
    for (name, statement) in CONVENTIONS {
        h.update(name.as_bytes());
        h.update([0u8]);
        h.update(statement.as_bytes());
        h.update([0u8]);
    }
    let mut hex = String::new();
    for b in h.finalize().iter() {
        let _ = write!(hex, "{b:02x}");
    }
    Versions {
        artifact: format!("toeplab {}", env!("CARGO_PKG_VERSION")),
        conventions_version: CONVENTIONS_VERSION,
        conventions_hash: hex,
    }
}

/// Parse a config; `.toml` files as TOML, anything else as JSON.
pub fn parse_config(text: &str, toml_syntax: bool) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = if toml_syntax {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Config(path_message(e.path(), e.inner())))?
    } else {
        let mut de = serde_json::Deserializer::from_str(text);
        let c = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| CliError::Config(path_message(e.path(), e.inner())))?;
        de.end().map_err(|e| CliError::Config(e.to_string()))?;
        c
    };
    config.validate().map_err(|e| match e {
        toeplab::Error::Invalid(m) => CliError::Config(m),
        other => CliError::Config(other.to_string()),
    })?;
    Ok(config)
}

fn path_message(path: &serde_path_to_error::Path, inner: &dyn std::fmt::Display) -> String {
    let p = path.to_string();
    if p == "." {
        inner.to_string()
    } else {
        format!("{p}: {inner}")
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let toml_syntax = path.extension().is_some_and(|e| e == "toml");
    parse_config(&text, toml_syntax)
}

pub fn execute(config: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    let outcome = experiments::run(config, seed)?;
    Ok(Report {
        config: config.clone(),
        pass: outcome.pass,
        results: RunResults { seed, outcome },
        versions: versions(),
    })
}

pub fn report_json(report: &Report) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// A CSV export: file suffix, header and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

const DIAGONAL_HEADER: &[&str] = &["k", "value"];
const DECAY_HEADER: &[&str] = &["k", "dist", "abs_kernel"];

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

fn diagonal(name: String, rows: impl Iterator<Item = (usize, f64)>) -> Table {
    Table {
        name,
        header: DIAGONAL_HEADER,
        rows: rows.map(|(k, v)| vec![k.to_string(), num(v)]).collect(),
    }
}

fn diagonal_tables(fits: &[ExpansionFit]) -> Vec<Table> {
    fits.iter()
        .enumerate()
        .map(|(i, f)| {
            diagonal(
                format!("diagonal_{i}"),
                f.k_ladder.iter().zip(&f.measured).map(|(&k, v)| (k, v.re)),
            )
        })
        .collect()
}

/// CSV tables for a report. Diagonal tables carry the real part of the measured value.
pub fn tables(report: &Report) -> Vec<Table> {
    match &report.results.outcome.results {
        ExperimentResults::Expansion(rep) => diagonal_tables(&rep.fits),
        ExperimentResults::Composition(fits) => diagonal_tables(fits),
        ExperimentResults::Degenerate(probes) => probes
            .iter()
            .enumerate()
            .map(|(i, p)| diagonal(format!("diagonal_{i}"), p.levels.iter().map(|l| (l.k, l.value.re))))
            .collect(),
        ExperimentResults::Landau(reps) => reps
            .iter()
            .enumerate()
            .map(|(i, r)| diagonal(format!("diagonal_{i}"), r.levels.iter().map(|l| (l.k, l.dzbar.re))))
            .collect(),
        ExperimentResults::Weyl(w) => vec![diagonal("trace".into(), w.levels.iter().map(|l| (l.k, l.trace)))],
        ExperimentResults::Star(s) => vec![diagonal("defect".into(), s.levels.iter().map(|l| (l.k, l.defect)))],
        ExperimentResults::Decay(d) => vec![Table {
            name: "decay".into(),
            header: DECAY_HEADER,
            rows: d
                .pairs
                .iter()
                .map(|p| vec![p.k.to_string(), num(p.dist), num(p.abs_kernel)])
                .collect(),
        }],
        ExperimentResults::Curvature(_) | ExperimentResults::StationaryPhase(_) => Vec::new(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Write `<stem>.report.json` and `<stem>.<table>.csv` into `dir`; returns the paths.
pub fn write_outputs(report: &Report, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let rp = dir.join(format!("{stem}.report.json"));
    write_file(&rp, report_json(report)?.as_bytes())?;
    written.push(rp);
    for t in tables(report) {
        let path = dir.join(format!("{stem}.{}.csv", t.name));
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Serialize(e.to_string());
        w.write_record(t.header).map_err(io)?;
        for r in &t.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
        write_file(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

/// Human-readable summary of checks.
pub fn summary(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} on {}: {}",
        report.config.experiment,
        report.config.model.kind,
        if report.pass { "PASS" } else { "FAIL" }
    );
    for c in &report.results.outcome.checks {
        let rel = match c.relation {
            experiments::Relation::AtMost => "<=",
            experiments::Relation::Above => ">",
        };
        let _ = writeln!(
            s,
            "  [{}] {} = {:.6e} {rel} {:.6e}",
            if c.pass { "ok" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    s
}

/// Models, symbols and experiments in a fixed order.
pub fn catalog() -> String {
    let mut s = String::from("models:\n");
    for k in ModelKind::ALL {
        let _ = writeln!(s, "  {:<20} {}", k.name(), k.description());
    }
    s.push_str("symbols:\n");
    for (name, formula, desc) in SYMBOL_CATALOG {
        let _ = writeln!(s, "  {name:<6} = {formula:<28} {desc}");
    }
    s.push_str("  (any polynomial or formula in z, zbar is also accepted)\n");
    s.push_str("experiments:\n");
    for e in ExperimentKind::ALL {
        let _ = writeln!(s, "  {:<18} {}", e.name(), e.description());
    }
    s
}

/// Load, run and write; returns the exit code and the report when one was produced.
pub fn run_config(path: &Path, output: Option<&Path>, seed: u64) -> Result<(i32, Report, Vec<PathBuf>), CliError> {
    let config = load_config(path)?;
    let report = execute(&config, seed)?;
    let dir = output
        .map(Path::to_path_buf)
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reports"));
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    let written = write_outputs(&report, &dir, &stem)?;
    let code = if report.pass { EXIT_PASS } else { EXIT_THRESHOLD };
    Ok((code, report, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"experiment":"expansion","model":"cp1_fs","symbols":{"f":"1"},"k_ladder":[16,24,32]}"#;

    fn config_error(text: &str, toml_syntax: bool) -> String {
        match parse_config(text, toml_syntax) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_offending_key() {
        let m = config_error(r#"{"experiment":"expansion","model":"cp2"}"#, false);
        assert!(m.starts_with("model: unknown model kind 'cp2'"), "{m}");
        let m = config_error(r#"{"experiment":"expansion","model":"cp1_fs","k_ladr":[1]}"#, false);
        assert!(m.contains("k_ladr"), "{m}");
        let m = config_error(
            r#"{"experiment":"expansion","model":{"kind":"cp1_fs","epsilon":"x"}}"#,
            false,
        );
        assert!(m.starts_with("model.epsilon"), "{m}");
        let m = config_error(
            r#"{"experiment":"weyl","model":"cp1_fs","symbols":{"f":"x3 +"}}"#,
            false,
        );
        assert!(m.starts_with("symbols.f"), "{m}");
        let m = config_error(
            r#"{"experiment":"expansion","model":"cp1_fs","k_ladder":[16,24]}"#,
            false,
        );
        assert!(m.starts_with("k_ladder"), "{m}");
        let m = config_error(
            "experiment = \"star\"\nmodel = \"bargmann\"\nthresholds = { ratio = \"a\" }\n",
            true,
        );
        assert!(m.starts_with("thresholds.ratio"), "{m}");
    }

    #[test]
    fn toml_and_json_agree() {
        let j = parse_config(MINIMAL, false).unwrap();
        let t = parse_config(
            "experiment = \"expansion\"\nmodel = \"cp1_fs\"\nk_ladder = [16, 24, 32]\n[symbols]\nf = \"1\"\n",
            true,
        )
        .unwrap();
        assert_eq!(j, t);
    }

    #[test]
    fn report_round_trips() {
        let config = parse_config(MINIMAL, false).unwrap();
        let report = execute(&config, 3).unwrap();
        assert!(report.pass);
        let text = report_json(&report).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(report_json(&back).unwrap(), text);
        // the echoed config parses back to itself
        let echoed = serde_json::to_string(&report.config).unwrap();
        assert_eq!(parse_config(&echoed, false).unwrap(), config);
    }

    #[test]
    fn tables_carry_seventeen_digits() {
        let report = execute(&parse_config(MINIMAL, false).unwrap(), 0).unwrap();
        let t = tables(&report);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].name, "diagonal_0");
        assert_eq!(t[0].header, ["k", "value"]);
        for (row, k) in t[0].rows.iter().zip([16.0, 24.0, 32.0]) {
            let v: f64 = row[1].parse().unwrap();
            let exact = (k + 1.0) / (2.0 * std::f64::consts::PI);
            assert!((v - exact).abs() < 1e-12 * exact);
            assert_eq!(format!("{v:.17e}"), row[1]);
        }
    }

    #[test]
    fn versions_are_stable() {
        let a = versions();
        assert_eq!(a, versions());
        assert_eq!(a.conventions_hash.len(), 64);
        assert!(a.artifact.starts_with("toeplab "));
    }

    #[test]
    fn outputs_are_written_byte_identically() {
        let report = execute(&parse_config(MINIMAL, false).unwrap(), 0).unwrap();
        let dir = std::env::temp_dir().join(format!("toeplab-lib-{}", std::process::id()));
        let first = write_outputs(&report, &dir, "a").unwrap();
        let bytes: Vec<Vec<u8>> = first.iter().map(|p| fs::read(p).unwrap()).collect();
        let again = execute(&parse_config(MINIMAL, false).unwrap(), 0).unwrap();
        let second = write_outputs(&again, &dir, "a").unwrap();
        for (p, b) in second.iter().zip(&bytes) {
            assert_eq!(&fs::read(p).unwrap(), b);
        }
        let _ = fs::remove_dir_all(&dir);
    }
}
