//! Window and GAF archives in the shared binary container.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaf::{GafKind, GafSet};
use crate::ingest::ConditionLabel;
use crate::nn::{Container, ContainerKind, Tensor};
use crate::windowing::{WindowSet, WindowSpec};

#[derive(Debug, Serialize, Deserialize)]
struct GafEcho {
    spec: WindowSpec,
    kind: GafKind,
    size: usize,
}

fn label_tensor(labels: &[ConditionLabel]) -> Result<Tensor> {
    Tensor::new(
        vec![labels.len()],
        labels.iter().map(|c| c.index() as f64).collect(),
    )
}

fn index_tensor(v: &[usize]) -> Result<Tensor> {
    Tensor::new(vec![v.len()], v.iter().map(|&i| i as f64).collect())
}

fn decode_labels(t: &Tensor) -> Result<Vec<ConditionLabel>> {
    t.data()
        .iter()
        .map(|&v| {
            ConditionLabel::from_index(v as usize)
                .filter(|_| v.fract() == 0.0 && v >= 0.0)
                .ok_or_else(|| Error::InvalidValue(format!("bad label {v} in archive")))
        })
        .collect()
}

fn decode_indices(t: &Tensor) -> Vec<usize> {
    t.data().iter().map(|&v| v as usize).collect()
}

fn bad_echo(e: serde_json::Error) -> Error {
    Error::InvalidValue(format!("archive config echo: {e}"))
}

pub fn window_archive(set: &WindowSet) -> Result<Vec<u8>> {
    let p = set.spec().window_len;
    Ok(Container {
        kind: ContainerKind::WindowArchive,
        config: serde_json::to_string(&set.spec()).map_err(bad_echo)?,
        tensors: vec![
            Tensor::new(vec![set.len(), p], set.data().to_vec())?,
            label_tensor(set.labels())?,
            index_tensor(set.sources())?,
        ],
    }
    .to_bytes())
}

pub fn gaf_archive(set: &GafSet) -> Result<Vec<u8>> {
    let echo = GafEcho {
        spec: set.spec,
        kind: set.kind,
        size: set.size,
    };
    Ok(Container {
        kind: ContainerKind::GafArchive,
        config: serde_json::to_string(&echo).map_err(bad_echo)?,
        tensors: vec![
            Tensor::new(vec![set.len(), set.size, set.size], set.data.clone())?,
            label_tensor(&set.labels)?,
            index_tensor(&set.sources)?,
        ],
    }
    .to_bytes())
}

/// Either archive type, decoded.
#[derive(Debug, Clone, PartialEq)]
pub enum Archive {
    Windows(WindowSet),
    Gaf(GafSet),
}

fn three_tensors(c: Container) -> Result<[Tensor; 3]> {
    let n = c.tensors.len();
    c.tensors
        .try_into()
        .map_err(|_| Error::EmptyWindowSet(format!("archive holds {n} tensors, expected 3")))
}

pub fn read_archive(bytes: &[u8]) -> Result<Archive> {
    let c = Container::from_bytes(bytes)?;
    match c.kind {
        ContainerKind::WindowArchive => {
            let spec: WindowSpec = serde_json::from_str(&c.config).map_err(bad_echo)?;
            let [data, labels, sources] = three_tensors(c)?;
            let set = WindowSet::from_rows(
                spec,
                data.into_data(),
                decode_labels(&labels)?,
                decode_indices(&sources),
            )?;
            Ok(Archive::Windows(set))
        }
        ContainerKind::GafArchive => {
            let echo: GafEcho = serde_json::from_str(&c.config).map_err(bad_echo)?;
            let [data, labels, sources] = three_tensors(c)?;
            if data.shape() != [labels.len(), echo.size, echo.size] {
                return Err(Error::Shape {
                    expected: format!("[{}, {}, {}]", labels.len(), echo.size, echo.size),
                    got: format!("{:?}", data.shape()),
                });
            }
            Ok(Archive::Gaf(GafSet {
                size: echo.size,
                kind: echo.kind,
                spec: echo.spec,
                data: data.into_data(),
                labels: decode_labels(&labels)?,
                sources: decode_indices(&sources),
            }))
        }
        ContainerKind::ModelWeights => Err(Error::InvalidValue(
            "expected a window or GAF archive, found model weights".into(),
        )),
    }
}
