//! On-disk formats: complex CSV (`index,re,im`), mask index lists, JSON
//! specs and summaries, ASCII PGM magnitude images, and whole instances.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexImage, GridShape, KSpaceMask, MeasurementVector, SensitivityModel};
use crate::phantom::{GroundTruth, Instance, InstanceSpec, NOISE_MODEL};
use crate::solver::{IterationTrace, MeasurementSet, StepRecord, JOINT_NORM_CONVENTION};
use crate::transform::DftPlan;

pub const INSTANCE_FILE: &str = "instance.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const MASK_FILE: &str = "mask.csv";
pub const COEFFICIENTS_FILE: &str = "coefficients.csv";
pub const INITIAL_IMAGE_FILE: &str = "initial_image.csv";
pub const INITIAL_COEFFICIENTS_FILE: &str = "initial_coefficients.csv";

pub fn basis_file(n: usize) -> String {
    format!("basis_{n}.csv")
}

pub fn exact_file(i: usize) -> String {
    format!("measurements_exact_{i}.csv")
}

pub fn noisy_file(i: usize) -> String {
    format!("measurements_noisy_{i}.csv")
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::parse(path, e.to_string())
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn finish(path: &Path, mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a headered CSV, checking the header against `expected`, and hands
/// each row to `row` together with its line number.
fn read_rows(path: &Path, expected: &[&str], mut row: impl FnMut(u64, &csv::StringRecord) -> Result<()>) -> Result<()> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            path,
            format!("line 1: expected header `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        row(line, &rec)?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec
        .get(i)
        .ok_or_else(|| Error::parse(path, format!("line {line}: missing field `{name}`")))?;
    raw.trim()
        .parse()
        .map_err(|e| Error::parse(path, format!("line {line}, field `{name}`: {e} (`{raw}`)")))
}

/// Writes `(index, re, im)` rows.
pub fn write_complex_csv(path: &Path, indices: impl IntoIterator<Item = usize>, values: &[Complex64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["index", "re", "im"]).map_err(|e| csv_err(path, e))?;
    for (i, z) in indices.into_iter().zip(values) {
        w.write_record([i.to_string(), fmt(z.re), fmt(z.im)])
            .map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

/// Reads `(index, re, im)` rows.
pub fn read_complex_csv(path: &Path) -> Result<(Vec<usize>, Vec<Complex64>)> {
    let mut idx = Vec::new();
    let mut vals = Vec::new();
    read_rows(path, &["index", "re", "im"], |line, rec| {
        idx.push(field(path, line, rec, 0, "index")?);
        vals.push(Complex64::new(field(path, line, rec, 1, "re")?, field(path, line, rec, 2, "im")?));
        Ok(())
    })?;
    Ok((idx, vals))
}

pub fn write_image_csv(path: &Path, image: &ComplexImage) -> Result<()> {
    write_complex_csv(path, 0..image.len(), image.values())
}

/// Reads an image; rows must list every pixel in flat order.
pub fn read_image_csv(path: &Path, shape: GridShape) -> Result<ComplexImage> {
    let (idx, vals) = read_complex_csv(path)?;
    if idx.len() != shape.p_num() || idx.iter().enumerate().any(|(a, &b)| a != b) {
        return Err(Error::parse(
            path,
            format!("expected indices 0..{} in order for a {}×{} image", shape.p_num(), shape.p_hor(), shape.p_ver()),
        ));
    }
    ComplexImage::new(shape, vals)
}

/// Measurements are indexed by their flat k-space position.
pub fn write_measurement_csv(path: &Path, m: &MeasurementVector) -> Result<()> {
    write_complex_csv(path, m.mask().indices().iter().copied(), m.values())
}

pub fn read_measurement_csv(path: &Path, mask: &Arc<KSpaceMask>) -> Result<MeasurementVector> {
    let (idx, vals) = read_complex_csv(path)?;
    if idx != mask.indices() {
        return Err(Error::parse(path, "measurement indices do not match the mask"));
    }
    MeasurementVector::new(Arc::clone(mask), vals)
}

pub fn write_mask_csv(path: &Path, mask: &KSpaceMask) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["index"]).map_err(|e| csv_err(path, e))?;
    for i in mask.indices() {
        w.write_record([i.to_string()]).map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

pub fn read_mask_csv(path: &Path, shape: GridShape) -> Result<KSpaceMask> {
    let mut idx = Vec::new();
    read_rows(path, &["index"], |line, rec| {
        idx.push(field(path, line, rec, 0, "index")?);
        Ok(())
    })?;
    KSpaceMask::new(shape, idx).map_err(|e| Error::parse(path, e.to_string()))
}

/// Writes `(receiver, basis, re, im)` rows.
pub fn write_coefficients_csv(path: &Path, coefficients: &[Vec<Complex64>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["receiver", "basis", "re", "im"]).map_err(|e| csv_err(path, e))?;
    for (j, b) in coefficients.iter().enumerate() {
        for (n, z) in b.iter().enumerate() {
            w.write_record([j.to_string(), n.to_string(), fmt(z.re), fmt(z.im)])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    finish(path, w)
}

pub fn read_coefficients_csv(path: &Path, r_num: usize, b_num: usize) -> Result<Vec<Vec<Complex64>>> {
    let mut out = vec![Vec::with_capacity(b_num); r_num];
    let mut count = 0;
    read_rows(path, &["receiver", "basis", "re", "im"], |line, rec| {
        let j: usize = field(path, line, rec, 0, "receiver")?;
        let n: usize = field(path, line, rec, 1, "basis")?;
        if j >= r_num || n != out[j].len() {
            return Err(Error::parse(path, format!("line {line}: unexpected entry ({j}, {n})")));
        }
        out[j].push(Complex64::new(field(path, line, rec, 2, "re")?, field(path, line, rec, 3, "im")?));
        count += 1;
        Ok(())
    })?;
    if count != r_num * b_num {
        return Err(Error::parse(path, format!("expected {} coefficients, found {count}", r_num * b_num)));
    }
    Ok(out)
}

/// ASCII PGM of `|P|`, linearly mapped from `[0, max |P|]` to `0..=255`.
pub fn pgm_string(image: &ComplexImage) -> String {
    let shape = image.shape();
    let max = image.max_modulus();
    let mut s = format!("P2\n{} {}\n255\n", shape.p_hor(), shape.p_ver());
    for row in image.values().chunks(shape.p_hor()) {
        let line: Vec<String> = row
            .iter()
            .map(|z| {
                let v = if max > 0.0 { (255.0 * z.norm() / max).round() } else { 0.0 };
                (v as u8).to_string()
            })
            .collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn write_pgm(path: &Path, image: &ComplexImage) -> Result<()> {
    fs::write(path, pgm_string(image)).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, format!("line {}, column {}: {e}", e.line(), e.column())))
}

/// Derived facts recorded next to the spec in `instance.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub p_num: usize,
    pub p_proj: usize,
    pub r_num: usize,
    pub b_num: usize,
    pub noise_levels: Vec<f64>,
    pub rho: f64,
    pub noise_model: String,
    pub norm_convention: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub spec: InstanceSpec,
    pub metadata: InstanceMetadata,
}

/// Writes every file of an instance into `dir`, creating it if needed.
pub fn write_instance(instance: &Instance, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    let truth = &instance.truth;
    let meta = InstanceMetadata {
        p_num: instance.shape().p_num(),
        p_proj: instance.mask.p_proj(),
        r_num: instance.r_num(),
        b_num: instance.model.b_num(),
        noise_levels: instance.noisy.noise_levels().to_vec(),
        rho: truth.rho,
        noise_model: NOISE_MODEL.into(),
        norm_convention: JOINT_NORM_CONVENTION.into(),
    };
    write_json(
        &path(INSTANCE_FILE),
        &InstanceFile {
            spec: instance.spec.clone(),
            metadata: meta,
        },
    )?;
    write_image_csv(&path(GROUND_TRUTH_FILE), &truth.image)?;
    for (n, b) in instance.model.basis().iter().enumerate() {
        write_image_csv(&path(&basis_file(n)), b)?;
    }
    write_mask_csv(&path(MASK_FILE), &instance.mask)?;
    write_coefficients_csv(&path(COEFFICIENTS_FILE), &truth.coefficients)?;
    for (i, (exact, noisy)) in truth.exact.iter().zip(instance.noisy.data()).enumerate() {
        write_measurement_csv(&path(&exact_file(i)), exact)?;
        write_measurement_csv(&path(&noisy_file(i)), noisy)?;
    }
    write_image_csv(&path(INITIAL_IMAGE_FILE), &truth.initial_image)?;
    write_coefficients_csv(&path(INITIAL_COEFFICIENTS_FILE), &truth.initial_coefficients)?;
    Ok(written)
}

/// Loads an instance written by [`write_instance`]. Nothing is regenerated:
/// every array comes from its file.
pub fn read_instance(dir: &Path) -> Result<Instance> {
    let file: InstanceFile = read_json(&dir.join(INSTANCE_FILE))?;
    let InstanceFile { spec, metadata: meta } = file;
    spec.validate()?;
    let shape = spec.shape()?;
    if meta.p_num != shape.p_num() || meta.r_num != spec.receivers || meta.b_num != spec.basis_count {
        return Err(Error::parse(dir.join(INSTANCE_FILE), "metadata disagrees with spec"));
    }

    let basis = (0..meta.b_num)
        .map(|n| read_image_csv(&dir.join(basis_file(n)), shape))
        .collect::<Result<Vec<_>>>()?;
    let coefficients = read_coefficients_csv(&dir.join(COEFFICIENTS_FILE), meta.r_num, meta.b_num)?;
    let model = Arc::new(SensitivityModel::new(basis, coefficients.clone())?);
    let mask = Arc::new(read_mask_csv(&dir.join(MASK_FILE), shape)?);
    if mask.p_proj() != meta.p_proj {
        return Err(Error::parse(dir.join(MASK_FILE), format!("expected {} indices", meta.p_proj)));
    }
    let exact = (0..meta.r_num)
        .map(|i| read_measurement_csv(&dir.join(exact_file(i)), &mask))
        .collect::<Result<Vec<_>>>()?;
    let noisy = (0..meta.r_num)
        .map(|i| read_measurement_csv(&dir.join(noisy_file(i)), &mask))
        .collect::<Result<Vec<_>>>()?;

    let truth = GroundTruth {
        image: read_image_csv(&dir.join(GROUND_TRUTH_FILE), shape)?,
        coefficients,
        exact,
        initial_image: read_image_csv(&dir.join(INITIAL_IMAGE_FILE), shape)?,
        initial_coefficients: read_coefficients_csv(&dir.join(INITIAL_COEFFICIENTS_FILE), meta.r_num, meta.b_num)?,
        rho: meta.rho,
    };
    Ok(Instance {
        spec,
        truth,
        model,
        mask,
        plan: Arc::new(DftPlan::auto(shape.p_num())?),
        noisy: MeasurementSet::new(noisy, meta.noise_levels)?,
    })
}

pub const TRACE_HEADER: [&str; 6] = ["k", "receiver", "omega", "alpha", "residual", "error_to_truth"];

/// One row per recorded step; `error_to_truth` is empty without a reference.
pub fn write_trace_csv(path: &Path, trace: &IterationTrace) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRACE_HEADER).map_err(|e| csv_err(path, e))?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            r.receiver.to_string(),
            r.omega.to_string(),
            fmt(r.alpha),
            fmt(r.residual),
            r.error.map(fmt).unwrap_or_default(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<StepRecord>> {
    let mut out = Vec::new();
    read_rows(path, &TRACE_HEADER, |line, rec| {
        let error = match rec.get(5).map(str::trim) {
            None | Some("") => None,
            Some(_) => Some(field(path, line, rec, 5, "error_to_truth")?),
        };
        out.push(StepRecord {
            k: field(path, line, rec, 0, "k")?,
            receiver: field(path, line, rec, 1, "receiver")?,
            omega: field(path, line, rec, 2, "omega")?,
            alpha: field(path, line, rec, 3, "alpha")?,
            residual: field(path, line, rec, 4, "residual")?,
            error,
        });
        Ok(())
    })?;
    Ok(out)
}
