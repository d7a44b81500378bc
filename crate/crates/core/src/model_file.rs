//! Versioned, checksummed text files for trained models.
//!
//! The first line is `TRKM-MODEL <version> <sha256 of the payload>`; the
//! payload is every byte after that line's newline. Reals are written as the
//! 16 hex digits of their IEEE-754 bit pattern, so a load reproduces every
//! value exactly. The full layout is described in `docs/model-format.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::classifier::TrkmClassifierModel;
use crate::data::{LabelMap, MinMaxScaler};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::model::{FittedModel, Hyperparams, ModelKind, TrainedModel};
use crate::regressor::TrkmRegressorModel;
use crate::rkm::RkmModel;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "TRKM-MODEL";

fn hex_f64(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

fn parse_hex_f64(s: &str) -> Result<f64> {
    if s.len() != 16 {
        return Err(corrupt(format!("bad real {s:?}")));
    }
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| corrupt(format!("bad real {s:?}")))
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptModel(msg.into())
}

fn checksum(payload: &[u8]) -> String {
    hex::encode(Sha256::digest(payload))
}

#[derive(Default)]
struct Writer {
    out: String,
}

impl Writer {
    fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.out, "{key} {value}").unwrap();
    }

    fn real(&mut self, key: &str, v: f64) {
        self.field(key, hex_f64(v));
    }

    fn row(&mut self, values: impl Iterator<Item = f64>) {
        let row: Vec<String> = values.map(hex_f64).collect();
        self.out.push_str(&row.join(" "));
        self.out.push('\n');
    }

    fn vector(&mut self, name: &str, v: &Array1<f64>) {
        writeln!(self.out, "vector {name} {}", v.len()).unwrap();
        self.row(v.iter().copied());
    }

    fn matrix(&mut self, name: &str, m: &Array2<f64>) {
        writeln!(self.out, "matrix {name} {} {}", m.nrows(), m.ncols()).unwrap();
        for r in m.rows() {
            self.row(r.iter().copied());
        }
    }
}

/// Serialize a trained model to the file format, header line included.
pub fn to_string(model: &TrainedModel) -> String {
    let mut w = Writer::default();
    let hp = model.model.hyperparams();
    w.field("kind", model.kind());
    w.field("features", model.n_features());
    match hp.kernel {
        KernelSpec::Gaussian { sigma } => w.field("kernel", format!("gaussian {}", hex_f64(sigma))),
        KernelSpec::Linear => w.field("kernel", "linear"),
    }
    w.real("gamma1", hp.gamma1);
    w.real("gamma2", hp.gamma2);
    w.real("eta1", hp.eta1);
    w.real("eta2", hp.eta2);
    if let Some(map) = &model.label_map {
        w.field("label-negative", serde_json::to_string(&map.negative).unwrap());
        w.field("label-positive", serde_json::to_string(&map.positive).unwrap());
    }
    match &model.scaler {
        Some(s) => {
            w.field("scaler", "minmax");
            w.vector("scaler-min", &Array1::from(s.min.clone()));
            w.vector("scaler-max", &Array1::from(s.max.clone()));
        }
        None => w.field("scaler", "none"),
    }
    match &model.model {
        FittedModel::TrkmC(m) => {
            w.matrix("positive", m.positive_samples());
            w.matrix("negative", m.negative_samples());
            w.vector("h1", m.h1());
            w.real("b1", m.b1());
            w.vector("h2", m.h2());
            w.real("b2", m.b2());
        }
        FittedModel::TrkmR(m) => {
            w.matrix("x", m.samples());
            w.vector("y", m.targets());
            w.vector("h1", m.h1());
            w.real("b1", m.b1());
            w.vector("h2", m.h2());
            w.real("b2", m.b2());
        }
        FittedModel::Rkm(m) => {
            w.matrix("x", m.samples());
            w.vector("y", &m.labels().iter().map(|&l| f64::from(l)).collect());
            w.vector("h", m.h());
            w.real("b", m.b());
        }
    }
    w.out.push_str("end\n");
    format!("{MAGIC} {FORMAT_VERSION} {}\n{}", checksum(w.out.as_bytes()), w.out)
}

/// Parsed payload: plain fields, vectors and matrices by name.
#[derive(Default)]
struct Payload {
    fields: BTreeMap<String, String>,
    vectors: BTreeMap<String, Array1<f64>>,
    matrices: BTreeMap<String, Array2<f64>>,
}

impl Payload {
    fn parse(text: &str) -> Result<Self> {
        let mut p = Payload::default();
        let mut lines = text.lines();
        let mut ended = false;
        let row_line = |lines: &mut std::str::Lines<'_>, len: usize, what: &str| -> Result<Vec<f64>> {
            let line = lines.next().ok_or_else(|| corrupt(format!("{what}: missing data line")))?;
            let row = line
                .split_ascii_whitespace()
                .map(parse_hex_f64)
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != len {
                return Err(corrupt(format!("{what}: expected {len} values, found {}", row.len())));
            }
            Ok(row)
        };
        while let Some(line) = lines.next() {
            if ended {
                return Err(corrupt("content after end marker"));
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "end" => ended = true,
                "vector" => {
                    let parts: Vec<&str> = rest.split(' ').collect();
                    let [name, len] = parts[..] else {
                        return Err(corrupt(format!("bad vector header {line:?}")));
                    };
                    let len: usize = len.parse().map_err(|_| corrupt(format!("bad length in {line:?}")))?;
                    let v = row_line(&mut lines, len, name)?;
                    if p.vectors.insert(name.to_string(), Array1::from(v)).is_some() {
                        return Err(corrupt(format!("duplicate vector {name}")));
                    }
                }
                "matrix" => {
                    let parts: Vec<&str> = rest.split(' ').collect();
                    let [name, rows, cols] = parts[..] else {
                        return Err(corrupt(format!("bad matrix header {line:?}")));
                    };
                    let rows: usize = rows.parse().map_err(|_| corrupt(format!("bad shape in {line:?}")))?;
                    let cols: usize = cols.parse().map_err(|_| corrupt(format!("bad shape in {line:?}")))?;
                    let mut data = Vec::with_capacity(rows * cols);
                    for _ in 0..rows {
                        data.extend(row_line(&mut lines, cols, name)?);
                    }
                    let m = Array2::from_shape_vec((rows, cols), data).map_err(|e| corrupt(e.to_string()))?;
                    if p.matrices.insert(name.to_string(), m).is_some() {
                        return Err(corrupt(format!("duplicate matrix {name}")));
                    }
                }
                _ => {
                    if p.fields.insert(key.to_string(), rest.to_string()).is_some() {
                        return Err(corrupt(format!("duplicate field {key}")));
                    }
                }
            }
        }
        if !ended {
            return Err(corrupt("missing end marker"));
        }
        Ok(p)
    }

    fn field(&self, key: &str) -> Result<&str> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| corrupt(format!("missing field {key}")))
    }

    fn real(&self, key: &str) -> Result<f64> {
        parse_hex_f64(self.field(key)?)
    }

    fn vector(&mut self, name: &str) -> Result<Array1<f64>> {
        self.vectors.remove(name).ok_or_else(|| corrupt(format!("missing vector {name}")))
    }

    fn matrix(&mut self, name: &str) -> Result<Array2<f64>> {
        self.matrices.remove(name).ok_or_else(|| corrupt(format!("missing matrix {name}")))
    }
}

/// Parse a model file's contents. The version is checked before the checksum,
/// so files from another format version report `VersionMismatch`.
pub fn from_str(text: &str) -> Result<TrainedModel> {
    let (header, payload) = text.split_once('\n').ok_or_else(|| corrupt("missing header line"))?;
    let parts: Vec<&str> = header.split(' ').collect();
    let [magic, version, sum] = parts[..] else {
        return Err(corrupt("malformed header line"));
    };
    if magic != MAGIC {
        return Err(corrupt("not a model file"));
    }
    let version: u32 = version.parse().map_err(|_| corrupt(format!("bad version {version:?}")))?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if checksum(payload.as_bytes()) != sum {
        return Err(corrupt("checksum mismatch"));
    }
    let mut p = Payload::parse(payload)?;

    let kind = ModelKind::parse(p.field("kind")?).map_err(|_| corrupt("unknown model kind"))?;
    let features: usize = p.field("features")?.parse().map_err(|_| corrupt("bad feature count"))?;
    let kernel = match p.field("kernel")?.split_once(' ') {
        Some(("gaussian", s)) => KernelSpec::Gaussian { sigma: parse_hex_f64(s)? },
        None if p.field("kernel")? == "linear" => KernelSpec::Linear,
        _ => return Err(corrupt("unknown kernel")),
    };
    let hp = Hyperparams {
        gamma1: p.real("gamma1")?,
        gamma2: p.real("gamma2")?,
        eta1: p.real("eta1")?,
        eta2: p.real("eta2")?,
        kernel,
    };
    let label_map = match (p.fields.get("label-negative"), p.fields.get("label-positive")) {
        (Some(n), Some(pos)) => Some(LabelMap {
            negative: serde_json::from_str(n).map_err(|e| corrupt(format!("label name: {e}")))?,
            positive: serde_json::from_str(pos).map_err(|e| corrupt(format!("label name: {e}")))?,
        }),
        (None, None) => None,
        _ => return Err(corrupt("only one label name present")),
    };
    let scaler = match p.field("scaler")? {
        "none" => None,
        "minmax" => Some(MinMaxScaler {
            min: p.vector("scaler-min")?.to_vec(),
            max: p.vector("scaler-max")?.to_vec(),
        }),
        other => return Err(corrupt(format!("unknown scaler {other:?}"))),
    };

    let invalid = |e: Error| corrupt(format!("inconsistent model: {e}"));
    let model = match kind {
        ModelKind::TrkmC => FittedModel::TrkmC(
            TrkmClassifierModel::from_parts(
                p.matrix("positive")?,
                p.matrix("negative")?,
                p.vector("h1")?,
                p.real("b1")?,
                p.vector("h2")?,
                p.real("b2")?,
                hp.classifier(),
                label_map.clone().unwrap_or_default(),
            )
            .map_err(invalid)?,
        ),
        ModelKind::TrkmR => FittedModel::TrkmR(
            TrkmRegressorModel::from_parts(
                p.matrix("x")?,
                p.vector("y")?,
                p.vector("h1")?,
                p.real("b1")?,
                p.vector("h2")?,
                p.real("b2")?,
                hp.regressor(),
            )
            .map_err(invalid)?,
        ),
        ModelKind::Rkm => {
            let y = p
                .vector("y")?
                .iter()
                .map(|&v| match v {
                    1.0 => Ok(1i8),
                    -1.0 => Ok(-1i8),
                    _ => Err(corrupt("RKM labels must be +1 or -1")),
                })
                .collect::<Result<Vec<i8>>>()?;
            FittedModel::Rkm(
                RkmModel::from_parts(p.matrix("x")?, y, p.vector("h")?, p.real("b")?, hp.rkm()).map_err(invalid)?,
            )
        }
    };
    if model.n_features() != features || scaler.as_ref().is_some_and(|s| s.n_features() != features) {
        return Err(corrupt("feature counts disagree"));
    }
    if let Some(s) = &scaler {
        if s.min.len() != s.max.len() {
            return Err(corrupt("scaler bounds disagree in length"));
        }
    }
    Ok(TrainedModel {
        model,
        scaler,
        label_map,
    })
}

/// Write `bytes` to a temporary file next to `path`, then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), to_string(model).as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(text).map_err(|_| corrupt("file is not UTF-8"))?;
    from_str(&text)
}
