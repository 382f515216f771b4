use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use brdf_core::brep::{validate_topology, FacetedBRep, Violation};
use brdf_core::csg::{combine, prune_empty_faces, CsgOp};
use brdf_core::encode::encode_brdf;
use brdf_core::grid::{BrDf, NormalizeTransform};
use brdf_core::io::{read_brdf, read_segmented_obj, write_brdf, write_brep_json};
use brdf_core::pipeline::{self, RoundtripReport};
use brdf_core::postproc::PostprocessParams;
use brdf_core::synth::fuzz::FuzzShape;
use brdf_core::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    /// Output failed validation.
    Invalid(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::NotWatertight { .. }
                | Error::Degenerate(_)
                | Error::OutOfDomain { .. }
                | Error::OpenBoundary { .. } => 3,
                _ => 2,
            },
            CliError::Invalid(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Invalid(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into())
}

/// Files in `dir` with extension `ext`, sorted by name.
fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_error(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext)))
        .collect();
    files.sort();
    Ok(files)
}

fn percent(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * hits as f64 / total as f64
    }
}

pub fn encode(input: &Path, output: &Path, resolution: usize, truncation: f64) -> Result<(), CliError> {
    let obj = read_segmented_obj(input)?;
    if !obj.is_manifold() {
        eprintln!(
            "warning: {}: {} open or non-manifold edges",
            input.display(),
            obj.bad_edges
        );
    }
    let brdf = encode_brdf(&obj.mesh, resolution, truncation)?;
    write_brdf(&brdf, output)?;
    let t = brdf.transform();
    println!(
        "F={} resolution={} center=[{}, {}, {}] scale={}",
        brdf.face_count(),
        brdf.resolution(),
        t.center.x,
        t.center.y,
        t.center.z,
        t.scale
    );
    Ok(())
}

/// MCT, optional post-processing and pruning of unused faces, in the
/// model's world coordinates.
fn decode_world(brdf: &BrDf, params: Option<&PostprocessParams>) -> Result<FacetedBRep, Error> {
    let brep = prune_empty_faces(pipeline::decode(brdf, params)?);
    Ok(to_world(brep, brdf.transform()))
}

fn to_world(b: FacetedBRep, t: &NormalizeTransform) -> FacetedBRep {
    FacetedBRep::from_segmented(b.mesh.transformed(|p| t.inverse(p)))
}

fn verdict(violations: &[Violation]) -> String {
    if violations.is_empty() {
        return "valid".into();
    }
    let mut kinds: Vec<String> = violations
        .iter()
        .map(|v| {
            serde_json::to_value(v)
                .ok()
                .and_then(|j| j.get("kind").and_then(|k| k.as_str()).map(str::to_owned))
                .unwrap_or_default()
        })
        .collect();
    kinds.sort();
    kinds.dedup();
    format!("invalid ({} violations: {})", violations.len(), kinds.join(", "))
}

pub fn decode(input: &Path, out_dir: &Path, params: Option<&PostprocessParams>) -> Result<(), CliError> {
    let brdf = read_brdf(input)?;
    let brep = decode_world(&brdf, params)?;
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let json = out_dir.join(format!("{}.json", stem(input)));
    write_brep_json(&brep, &json)?;
    let report = validate_topology(&brep);
    let (v, e, f) = brep.counts();
    let line = format!("V={v} E={e} F={f} {}", verdict(&report.violations));
    println!("{line}");
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{}: {line}", input.display())))
    }
}

#[derive(Debug, Serialize)]
struct ModelRecord {
    model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<RoundtripReport>,
}

impl ModelRecord {
    fn valid(&self) -> bool {
        self.report.as_ref().is_some_and(RoundtripReport::valid)
    }

    fn same_topology(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.same_topology_post)
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    models: usize,
    invalid_rate: f64,
    same_topology_rate: f64,
    chamfer_raw_mean: Option<f64>,
    chamfer_post_mean: Option<f64>,
}

impl Summary {
    fn of(records: &[ModelRecord]) -> Self {
        let n = records.len();
        let reports: Vec<&RoundtripReport> = records.iter().filter_map(|r| r.report.as_ref()).collect();
        let mean = |f: fn(&RoundtripReport) -> f64| {
            (!reports.is_empty()).then(|| reports.iter().map(|r| f(r)).sum::<f64>() / reports.len() as f64)
        };
        Self {
            models: n,
            invalid_rate: percent(records.iter().filter(|r| !r.valid()).count(), n),
            same_topology_rate: percent(records.iter().filter(|r| r.same_topology()).count(), n),
            chamfer_raw_mean: mean(|r| r.chamfer_raw),
            chamfer_post_mean: mean(|r| r.chamfer_post),
        }
    }
}

fn roundtrip_one(
    path: &Path,
    resolution: usize,
    truncation: f64,
    params: &PostprocessParams,
    seed: u64,
) -> Result<RoundtripReport, Error> {
    let obj = read_segmented_obj(path)?;
    Ok(pipeline::roundtrip(&obj.mesh, resolution, truncation, params, seed)?.report)
}

pub fn roundtrip(
    input: &Path,
    resolution: usize,
    truncation: f64,
    params: &PostprocessParams,
    seed: u64,
    report: Option<&Path>,
) -> Result<(), CliError> {
    let batch = input.is_dir();
    let files = if batch {
        list_files(input, "obj")?
    } else {
        vec![input.to_path_buf()]
    };
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .obj files", input.display())));
    }
    let results: Vec<Result<RoundtripReport, Error>> = files
        .par_iter()
        .map(|f| roundtrip_one(f, resolution, truncation, params, seed))
        .collect();
    let mut records = Vec::with_capacity(files.len());
    for (file, result) in files.iter().zip(results) {
        let model = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match result {
            Ok(report) => records.push(ModelRecord {
                model,
                error: None,
                report: Some(report),
            }),
            // a lone input fails the command outright
            Err(e) if !batch => return Err(e.into()),
            Err(e) => {
                eprintln!("{}: {e}", file.display());
                records.push(ModelRecord {
                    model,
                    error: Some(e.to_string()),
                    report: None,
                })
            }
        }
    }

    let summary = serde_json::json!({ "summary": Summary::of(&records) });
    let mut lines: Vec<String> = records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes"))
        .collect();
    lines.push(summary.to_string());
    match report {
        Some(path) => {
            let mut text = lines.join("\n");
            text.push('\n');
            fs::write(path, text).map_err(|e| io_error(path, e))?;
            println!("{summary}");
        }
        None => {
            let mut out = std::io::stdout().lock();
            for l in &lines {
                writeln!(out, "{l}").map_err(|e| io_error(Path::new("<stdout>"), e))?;
            }
        }
    }
    let invalid: Vec<&str> = records.iter().filter(|r| !r.valid()).map(|r| r.model.as_str()).collect();
    if invalid.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("invalid reconstructions: {}", invalid.join(", "))))
    }
}

pub fn csg(a: &Path, b: &Path, output: &Path, op: CsgOp) -> Result<(), CliError> {
    let models = [read_brdf(a)?, read_brdf(b)?];
    let combined = combine(&models, op)?;
    write_brdf(&combined, output)?;
    println!(
        "op={op} F={} resolution={} truncation={}",
        combined.face_count(),
        combined.resolution(),
        combined.truncation()
    );
    Ok(())
}

pub fn validate(in_dir: &Path, params: Option<&PostprocessParams>) -> Result<(), CliError> {
    let files = list_files(in_dir, "brdf")?;
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .brdf files", in_dir.display())));
    }
    let verdicts: Vec<(bool, String)> = files
        .par_iter()
        .map(|f| match read_brdf(f).and_then(|b| decode_world(&b, params)) {
            Ok(brep) => {
                let report = validate_topology(&brep);
                (report.is_valid(), verdict(&report.violations))
            }
            Err(e) => (false, format!("error ({e})")),
        })
        .collect();
    let mut valid = 0;
    for (file, (ok, line)) in files.iter().zip(&verdicts) {
        valid += usize::from(*ok);
        println!("{}: {line}", file.file_name().unwrap_or_default().to_string_lossy());
    }
    println!("Valid {:.1}% ({valid}/{})", percent(valid, files.len()), files.len());
    if valid == files.len() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{} of {} models invalid", files.len() - valid, files.len())))
    }
}

pub fn fuzz(out_dir: &Path, count: usize, seed: u64, resolution: usize) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    (0..count as u64).into_par_iter().try_for_each(|i| {
        let s = seed + i;
        let brdf = FuzzShape::random(s).to_brdf(resolution)?;
        write_brdf(&brdf, out_dir.join(format!("fuzz_{s:05}.brdf")))
    })?;
    println!("wrote {count} models to {}", out_dir.display());
    Ok(())
}
