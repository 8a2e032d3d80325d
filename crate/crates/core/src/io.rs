//! JSON documents for frames, connections, metrics and base data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cone_lift::BaseData;
use crate::connection::InvariantConnection;
use crate::error::{Error, Result};
use crate::lie::{FrameAlgebra, FrameAlgebraDoc};
use crate::metric::FrameMetric;
use crate::tensor::{DenseTensor, Variance, L, U};

/// A frame given inline or by preset name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameSpec {
    Preset(String),
    Doc(FrameAlgebraDoc),
}

/// Connection file, optionally carrying a metric `h` and a vertical vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionDoc {
    pub frame: FrameSpec,
    pub pi: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertical: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseDoc {
    pub frame: FrameSpec,
    pub pi: Vec<Vec<Vec<f64>>>,
    pub omega: Vec<Vec<f64>>,
}

impl FrameSpec {
    pub fn resolve(&self) -> Result<FrameAlgebra> {
        match self {
            FrameSpec::Preset(name) => FrameAlgebra::preset_by_name(name),
            FrameSpec::Doc(doc) => FrameAlgebra::from_doc(doc),
        }
    }
}

pub fn tensor3_from_nested(v: &[Vec<Vec<f64>>], n: usize, var: [Variance; 3]) -> Result<DenseTensor> {
    if v.len() != n || v.iter().any(|r| r.len() != n || r.iter().any(|s| s.len() != n)) {
        return Err(Error::Validation(format!("expected a {n}×{n}×{n} array")));
    }
    let t = DenseTensor::from_fn(n, &var, |x| v[x[0]][x[1]][x[2]]);
    if !t.is_finite() {
        return Err(Error::Validation("non-finite entries".into()));
    }
    Ok(t)
}

pub fn tensor2_from_nested(v: &[Vec<f64>], n: usize, var: [Variance; 2]) -> Result<DenseTensor> {
    if v.len() != n || v.iter().any(|r| r.len() != n) {
        return Err(Error::Validation(format!("expected a {n}×{n} array")));
    }
    let t = DenseTensor::matrix(n, var, |i, j| v[i][j]);
    if !t.is_finite() {
        return Err(Error::Validation("non-finite entries".into()));
    }
    Ok(t)
}

pub fn nested3(t: &DenseTensor) -> Vec<Vec<Vec<f64>>> {
    let n = t.dim();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| t[[i, j, k]]).collect()).collect()).collect()
}

pub fn nested2(t: &DenseTensor) -> Vec<Vec<f64>> {
    let n = t.dim();
    (0..n).map(|i| (0..n).map(|j| t[[i, j]]).collect()).collect()
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn frame_from_str(text: &str) -> Result<FrameAlgebra> {
    parse::<FrameSpec>(text)?.resolve()
}

pub struct LoadedConnection {
    pub conn: InvariantConnection,
    pub metric: Option<FrameMetric>,
    pub vertical: Option<Vec<f64>>,
}

pub fn connection_from_str(text: &str) -> Result<LoadedConnection> {
    let doc: ConnectionDoc = parse(text)?;
    let frame = doc.frame.resolve()?;
    let n = frame.dim();
    let pi = tensor3_from_nested(&doc.pi, n, [L, L, U])?;
    let conn = InvariantConnection::new(frame, pi)?;
    let metric = doc.h.as_ref().map(|h| FrameMetric::new(tensor2_from_nested(h, n, [L, L])?)).transpose()?;
    if let Some(v) = &doc.vertical {
        if v.len() != n {
            return Err(Error::Validation(format!("vertical must have {n} entries")));
        }
    }
    Ok(LoadedConnection { conn, metric, vertical: doc.vertical })
}

pub fn base_from_str(text: &str) -> Result<BaseData> {
    let doc: BaseDoc = parse(text)?;
    base_from_doc(&doc)
}

pub fn base_from_doc(doc: &BaseDoc) -> Result<BaseData> {
    let frame = doc.frame.resolve()?;
    let n = frame.dim();
    let pi = tensor3_from_nested(&doc.pi, n, [L, L, U])?;
    let omega = tensor2_from_nested(&doc.omega, n, [L, L])?;
    BaseData::new(frame, pi, omega)
}

pub fn base_to_doc(base: &BaseData) -> BaseDoc {
    BaseDoc { frame: FrameSpec::Doc(base.frame().to_doc()), pi: nested3(base.pi()), omega: nested2(base.omega()) }
}

pub fn metric_from_str(text: &str) -> Result<FrameMetric> {
    #[derive(Deserialize)]
    struct Doc {
        h: Vec<Vec<f64>>,
    }
    let doc: Doc = parse(text)?;
    let n = doc.h.len();
    FrameMetric::new(tensor2_from_nested(&doc.h, n, [L, L])?)
}

pub fn load_frame(path: &Path) -> Result<FrameAlgebra> {
    frame_from_str(&read(path)?)
}

pub fn load_connection(path: &Path) -> Result<LoadedConnection> {
    connection_from_str(&read(path)?)
}

pub fn load_base(path: &Path) -> Result<BaseData> {
    base_from_str(&read(path)?)
}

pub fn load_metric(path: &Path) -> Result<FrameMetric> {
    metric_from_str(&read(path)?)
}

/// Whether a JSON document looks like base data (it has an `omega` field).
pub fn is_base_doc(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text).map(|v| v.get("omega").is_some()).unwrap_or(false)
}
