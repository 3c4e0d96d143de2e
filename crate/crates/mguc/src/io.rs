//! Case-file parsing, forecast ingestion, and report emission.
//!
//! On-disk formats (all documented in the README):
//! * case: JSON with an explicit `schema_version`; unknown keys rejected;
//!   per-hour profiles either inline or referenced as CSV files resolved
//!   relative to the case file.
//! * forecast CSV: header `hour,value_kw`, hours 1..H contiguous.
//! * solve report: JSON (schedule arrays, exact cost breakdown, solver
//!   stats, case checksum) or a per-hour CSV table.
//! * sweep CSV: one row per tax rate with a fixed header.
//!
//! Writing is deterministic: the same report serializes byte-identically.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{RunReport, SweepRow};
use crate::model::{
    CaseError, EmissionPolicy, GridInterface, Horizon, LoadProfile, MicrogridCase, ReservePolicy,
    Schedule, StorageResource, ThermalGenerator, VariableResource,
};

/// Supported case-file schema version.
pub const CASE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} is not valid JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: unsupported schema_version {got} (expected {CASE_SCHEMA_VERSION})")]
    SchemaVersion { path: PathBuf, got: u32 },
    #[error("resource `{id}`: exactly one of `profile_kw` and `profile_csv` must be given")]
    ProfileSource { id: String },
    #[error("{path} line {line}: {message}")]
    Csv {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("case is inconsistent: {0}")]
    Case(#[from] CaseError),
}

/// Renewable block as stored on disk: inline profile or CSV reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableResourceFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_kw: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_csv: Option<String>,
    #[serde(default)]
    pub curtailable: bool,
}

/// Load block as stored on disk: inline demand or CSV reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_kw: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_csv: Option<String>,
}

/// The on-disk case document. Units: kW, kWh, $, kg CO2e throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub schema_version: u32,
    pub horizon_hours: usize,
    #[serde(default)]
    pub thermal_generators: Vec<ThermalGenerator<f64>>,
    #[serde(default)]
    pub variable_resources: Vec<VariableResourceFile>,
    #[serde(default)]
    pub storage_resources: Vec<StorageResource<f64>>,
    pub grid: GridInterface<f64>,
    pub reserve: ReservePolicy<f64>,
    pub emission: EmissionPolicy<f64>,
    pub load: LoadFile,
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse a forecast CSV (`hour,value_kw`; hours 1..H contiguous) into the
/// ordered per-hour values.
pub fn load_forecast_csv(path: &Path) -> Result<Vec<f64>, IoError> {
    let bad = |line: usize, message: String| IoError::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    {
        let headers = reader
            .headers()
            .map_err(|e| bad(1, e.to_string()))?
            .clone();
        let fields: Vec<&str> = headers.iter().collect();
        if fields != ["hour", "value_kw"] {
            return Err(bad(1, format!("expected header `hour,value_kw`, got {fields:?}")));
        }
    }
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| bad(line, e.to_string()))?;
        if record.len() != 2 {
            return Err(bad(line, format!("expected 2 fields, got {}", record.len())));
        }
        let hour: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| bad(line, format!("hour `{}` is not an integer", &record[0])))?;
        if hour != values.len() + 1 {
            return Err(bad(
                line,
                format!("hour {hour} breaks the contiguous sequence (expected {})", values.len() + 1),
            ));
        }
        let value: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| bad(line, format!("value `{}` is not numeric", &record[1])))?;
        values.push(value);
    }
    if values.is_empty() {
        return Err(bad(2, "no data rows".into()));
    }
    Ok(values)
}

fn resolve_profile(
    id: &str,
    inline: Option<Vec<f64>>,
    csv_ref: Option<&str>,
    base_dir: &Path,
) -> Result<Vec<f64>, IoError> {
    match (inline, csv_ref) {
        (Some(values), None) => Ok(values),
        (None, Some(rel)) => load_forecast_csv(&base_dir.join(rel)),
        _ => Err(IoError::ProfileSource { id: id.to_string() }),
    }
}

/// Load and fully validate a case file; forecast CSV references resolve
/// relative to the case file's directory.
pub fn load_case(path: &Path) -> Result<MicrogridCase<f64>, IoError> {
    let text = read_to_string(path)?;
    let file: CaseFile = serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if file.schema_version != CASE_SCHEMA_VERSION {
        return Err(IoError::SchemaVersion {
            path: path.to_path_buf(),
            got: file.schema_version,
        });
    }
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    let vers = file
        .variable_resources
        .into_iter()
        .map(|v| {
            Ok(VariableResource {
                profile_kw: resolve_profile(&v.id, v.profile_kw, v.profile_csv.as_deref(), base_dir)?,
                id: v.id,
                curtailable: v.curtailable,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let demand_kw = resolve_profile(
        "load",
        file.load.demand_kw,
        file.load.profile_csv.as_deref(),
        base_dir,
    )?;
    let case = MicrogridCase {
        horizon: Horizon::new(file.horizon_hours).map_err(IoError::Case)?,
        tgrs: file.thermal_generators,
        vers,
        esrs: file.storage_resources,
        grid: file.grid,
        reserve: file.reserve,
        emission: file.emission,
        load: LoadProfile { demand_kw },
    };
    Ok(case.validated()?)
}

/// Serialize a case back to the on-disk schema with inline profiles.
pub fn save_case(case: &MicrogridCase<f64>, path: &Path) -> Result<(), IoError> {
    let file = CaseFile {
        schema_version: CASE_SCHEMA_VERSION,
        horizon_hours: case.horizon.hours,
        thermal_generators: case.tgrs.clone(),
        variable_resources: case
            .vers
            .iter()
            .map(|v| VariableResourceFile {
                id: v.id.clone(),
                profile_kw: Some(v.profile_kw.clone()),
                profile_csv: None,
                curtailable: v.curtailable,
            })
            .collect(),
        storage_resources: case.esrs.clone(),
        grid: case.grid.clone(),
        reserve: case.reserve.clone(),
        emission: case.emission.clone(),
        load: LoadFile {
            demand_kw: Some(case.load.demand_kw.clone()),
            profile_csv: None,
        },
    };
    write_json(&file, path)
}

/// SHA-256 of the canonical JSON form of a resolved case; reports carry it
/// so results stay traceable to their exact inputs.
pub fn case_checksum(case: &MicrogridCase<f64>) -> String {
    let canonical = serde_json::to_string(case).expect("case serialization is infallible");
    hex_digest(canonical.as_bytes())
}

/// SHA-256 of a file's bytes, hex-encoded.
pub fn file_checksum(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hex_digest(&bytes))
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Serialize)]
struct SolveReportFile<'a> {
    case_sha256: &'a str,
    #[serde(flatten)]
    report: &'a RunReport<f64>,
}

fn write_json<S: Serialize>(value: &S, path: &Path) -> Result<(), IoError> {
    let wrap = |source: std::io::Error| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    let mut text = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    text.push('\n');
    let mut f = fs::File::create(path).map_err(wrap)?;
    f.write_all(text.as_bytes()).map_err(wrap)?;
    Ok(())
}

fn write_text(text: &str, path: &Path) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Output format for solve reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

/// Write a solve report. JSON carries everything (schedule, breakdown,
/// solver stats, checksum); CSV is the per-hour schedule table.
pub fn write_report(
    report: &RunReport<f64>,
    case: &MicrogridCase<f64>,
    path: &Path,
    format: ReportFormat,
) -> Result<(), IoError> {
    match format {
        ReportFormat::Json => {
            let checksum = case_checksum(case);
            write_json(
                &SolveReportFile {
                    case_sha256: &checksum,
                    report,
                },
                path,
            )
        }
        ReportFormat::Csv => write_text(&schedule_csv(report, case), path),
    }
}

/// Per-hour schedule table: one column block per resource, values in the
/// shortest round-trip decimal form.
pub fn schedule_csv(report: &RunReport<f64>, case: &MicrogridCase<f64>) -> String {
    let mut header = String::from("hour");
    for g in &case.tgrs {
        let _ = write!(header, ",{0}_on,{0}_power_kw,{0}_reserve_kw", g.id);
    }
    for v in &case.vers {
        let _ = write!(header, ",{}_kw", v.id);
    }
    for s in &case.esrs {
        let _ = write!(header, ",{0}_inject_kw,{0}_withdraw_kw,{0}_energy_kwh", s.id);
    }
    header.push_str(",net_import_kw\n");
    let mut out = header;
    let schedule = &report.schedule;
    for h in 0..case.horizon.hours {
        let _ = write!(out, "{}", h + 1);
        for t in &schedule.tgrs {
            let _ = write!(
                out,
                ",{},{},{}",
                u8::from(t.on[h]),
                t.power_kw[h],
                t.reserve_kw[h]
            );
        }
        for v in &schedule.ver_kw {
            let _ = write!(out, ",{}", v[h]);
        }
        for e in &schedule.esrs {
            let _ = write!(out, ",{},{},{}", e.inject_kw[h], e.withdraw_kw[h], e.energy_kwh[h]);
        }
        let _ = writeln!(out, ",{}", schedule.net_import_kw[h]);
    }
    out
}

/// Fixed header of the sweep CSV.
pub const SWEEP_CSV_HEADER: &str =
    "psi,euc_total_usd,cuc_total_usd,differential_cents,euc_tgr_kwh,cuc_tgr_kwh,euc_emissions_kg,cuc_emissions_kg";

/// Render sweep rows as plot-ready CSV (`.` decimal separator, no
/// thousands separators, shortest round-trip floats).
pub fn sweep_csv(rows: &[SweepRow<f64>]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.psi,
            r.euc_total_usd,
            r.cuc_total_usd,
            r.differential_cents,
            r.euc_tgr_kwh,
            r.cuc_tgr_kwh,
            r.euc_emissions_kg,
            r.cuc_emissions_kg
        );
    }
    out
}

/// Write the sweep CSV to `path`.
pub fn write_sweep_csv(rows: &[SweepRow<f64>], path: &Path) -> Result<(), IoError> {
    write_text(&sweep_csv(rows), path)
}

/// Read a schedule document (the same schema reports embed).
pub fn load_schedule(path: &Path) -> Result<Schedule<f64>, IoError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Write a schedule document.
pub fn save_schedule(schedule: &Schedule<f64>, path: &Path) -> Result<(), IoError> {
    write_json(schedule, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EmissionPolicy, GridInterface, ReservePolicy};

    fn write_tmp(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    #[test]
    fn forecast_csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let good = write_tmp(dir.path(), "good.csv", "hour,value_kw\n1,0.0\n");
        assert_eq!(load_forecast_csv(&good).unwrap(), vec![0.0]);

        let gap = write_tmp(dir.path(), "gap.csv", "hour,value_kw\n1,1.0\n3,2.0\n");
        assert!(matches!(
            load_forecast_csv(&gap).unwrap_err(),
            IoError::Csv { line: 3, .. }
        ));

        let dup = write_tmp(dir.path(), "dup.csv", "hour,value_kw\n1,1.0\n1,2.0\n");
        assert!(load_forecast_csv(&dup).is_err());

        let text = write_tmp(dir.path(), "text.csv", "hour,value_kw\n1,abc\n");
        assert!(matches!(
            load_forecast_csv(&text).unwrap_err(),
            IoError::Csv { line: 2, .. }
        ));

        let header = write_tmp(dir.path(), "hdr.csv", "h,v\n1,1.0\n");
        assert!(matches!(
            load_forecast_csv(&header).unwrap_err(),
            IoError::Csv { line: 1, .. }
        ));
    }

    fn tiny_case_json(dir: &Path) -> PathBuf {
        write_tmp(
            dir,
            "pv.csv",
            "hour,value_kw\n1,0.5\n2,1.0\n",
        );
        write_tmp(
            dir,
            "case.json",
            r#"{
  "schema_version": 1,
  "horizon_hours": 2,
  "thermal_generators": [
    {
      "id": "g1",
      "power_min_kw": 5.0,
      "power_max_kw": 50.0,
      "min_up_hours": 2,
      "min_down_hours": 2,
      "startup_cost_usd": 1.0,
      "fuel_cost": { "quad": 0.0012, "lin": 0.208, "fixed": 3.2 },
      "emission_rate": { "quad": 0.00303, "lin": 0.53, "fixed": 8.09 },
      "initially_on": false
    }
  ],
  "variable_resources": [
    { "id": "pv", "profile_csv": "pv.csv" }
  ],
  "storage_resources": [],
  "grid": { "tariff_usd_per_kwh": [0.0155, 0.2197] },
  "reserve": { "min_kw": [0.0, 0.0] },
  "emission": { "tax_usd_per_kg": 0.07 },
  "load": { "demand_kw": [10.0, 12.0] }
}"#,
        )
    }

    #[test]
    fn case_loads_and_resolves_forecasts() {
        let dir = tempfile::tempdir().unwrap();
        let path = tiny_case_json(dir.path());
        let case = load_case(&path).unwrap();
        assert_eq!(case.horizon.hours, 2);
        assert_eq!(case.vers[0].profile_kw, vec![0.5, 1.0]);
        assert_eq!(case.emission.cap_kg, None);
        assert_eq!(case.grid.exchange_limit_kw, None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            dir.path(),
            "bad.json",
            r#"{ "schema_version": 1, "horizon_hours": 1, "surprise": true,
                 "grid": { "tariff_usd_per_kwh": [0.1] },
                 "reserve": { "min_kw": [0.0] },
                 "emission": { "tax_usd_per_kg": 0.0 },
                 "load": { "demand_kw": [0.0] } }"#,
        );
        assert!(matches!(load_case(&path).unwrap_err(), IoError::Json { .. }));
    }

    #[test]
    fn schema_version_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            dir.path(),
            "v9.json",
            r#"{ "schema_version": 9, "horizon_hours": 1,
                 "grid": { "tariff_usd_per_kwh": [0.1] },
                 "reserve": { "min_kw": [0.0] },
                 "emission": { "tax_usd_per_kg": 0.0 },
                 "load": { "demand_kw": [0.0] } }"#,
        );
        assert!(matches!(
            load_case(&path).unwrap_err(),
            IoError::SchemaVersion { got: 9, .. }
        ));
    }

    #[test]
    fn profile_needs_exactly_one_source() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            dir.path(),
            "two.json",
            r#"{ "schema_version": 1, "horizon_hours": 1,
                 "variable_resources": [ { "id": "pv", "profile_kw": [1.0], "profile_csv": "x.csv" } ],
                 "grid": { "tariff_usd_per_kwh": [0.1] },
                 "reserve": { "min_kw": [0.0] },
                 "emission": { "tax_usd_per_kg": 0.0 },
                 "load": { "demand_kw": [0.0] } }"#,
        );
        assert!(matches!(
            load_case(&path).unwrap_err(),
            IoError::ProfileSource { .. }
        ));
    }

    #[test]
    fn profile_length_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            dir.path(),
            "short.json",
            r#"{ "schema_version": 1, "horizon_hours": 3,
                 "grid": { "tariff_usd_per_kwh": [0.1, 0.1, 0.1] },
                 "reserve": { "min_kw": [0.0, 0.0, 0.0] },
                 "emission": { "tax_usd_per_kg": 0.0 },
                 "load": { "demand_kw": [0.0, 0.0] } }"#,
        );
        assert!(matches!(load_case(&path).unwrap_err(), IoError::Case(_)));
    }

    #[test]
    fn case_round_trips_identically() {
        let dir = tempfile::tempdir().unwrap();
        let case = load_case(&tiny_case_json(dir.path())).unwrap();
        let saved = dir.path().join("saved.json");
        save_case(&case, &saved).unwrap();
        let reloaded = load_case(&saved).unwrap();
        assert_eq!(case, reloaded);
        // byte-identical rewrite
        let again = dir.path().join("again.json");
        save_case(&reloaded, &again).unwrap();
        assert_eq!(fs::read(&saved).unwrap(), fs::read(&again).unwrap());
        assert_eq!(case_checksum(&case), case_checksum(&reloaded));
    }

    #[test]
    fn sweep_csv_shape() {
        let rows = vec![crate::analysis::SweepRow {
            psi: 0.009,
            euc_total_usd: 1.25,
            cuc_total_usd: 1.5,
            differential_cents: 25.0,
            euc_tgr_kwh: 100.0,
            cuc_tgr_kwh: 120.0,
            euc_emissions_kg: 50.0,
            cuc_emissions_kg: 60.0,
        }];
        let text = sweep_csv(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "0.009,1.25,1.5,25,100,120,50,60");
        assert!(lines.next().is_none());
    }

    #[test]
    fn empty_resource_blocks_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            dir.path(),
            "min.json",
            r#"{ "schema_version": 1, "horizon_hours": 1,
                 "grid": { "tariff_usd_per_kwh": [0.1] },
                 "reserve": { "min_kw": [0.0] },
                 "emission": { "tax_usd_per_kg": 0.0 },
                 "load": { "demand_kw": [0.0] } }"#,
        );
        let case = load_case(&path).unwrap();
        assert!(case.tgrs.is_empty() && case.esrs.is_empty() && case.vers.is_empty());
    }
}
