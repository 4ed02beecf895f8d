//! JSON network manifests referencing per-layer `DMAT` files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compression::{LinearLayer, Method};
use crate::error::{Error, Result};
use crate::io::matrix_file::{read_matrix, write_matrix};
use crate::matrix::DenseMatrix;
use crate::network::{Activation, Network, SpliceRecord};
use crate::scalar::Scalar;

pub const MANIFEST_FORMAT: &str = "dalr-network";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerEntry {
    /// Weight file (`m x n`), relative to the manifest's directory.
    pub weights: String,
    /// Bias file (`1 x m`), relative to the manifest's directory.
    pub bias: String,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpliceEntry {
    pub original_layer: usize,
    pub position: usize,
    pub method: Method,
    pub rank: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkManifest {
    pub format: String,
    pub version: u32,
    pub layers: Vec<LayerEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub splices: Vec<SpliceEntry>,
}

impl NetworkManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::Manifest(format!("unknown manifest format {:?}", m.format)));
        }
        if m.version != 1 {
            return Err(Error::Manifest(format!("unsupported manifest version {}", m.version)));
        }
        if m.layers.is_empty() {
            return Err(Error::Manifest("manifest lists no layers".into()));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Manifest(msg) => Error::Manifest(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Loads all referenced files and validates the dimension chain.
    pub fn load<T: Scalar>(&self, base: &Path) -> Result<Network<T>> {
        let mut layers = Vec::with_capacity(self.layers.len());
        let mut acts = Vec::with_capacity(self.layers.len());
        for (i, entry) in self.layers.iter().enumerate() {
            let w: DenseMatrix<T> = read_matrix(base.join(&entry.weights))?;
            let b: DenseMatrix<T> = read_matrix(base.join(&entry.bias))?;
            if b.rows() != 1 || b.cols() != w.rows() {
                return Err(Error::Manifest(format!(
                    "layer {i}: bias is {}x{}, expected 1x{}",
                    b.rows(),
                    b.cols(),
                    w.rows()
                )));
            }
            layers.push(LinearLayer::new(w, b.into_vec())?);
            acts.push(entry.activation);
        }
        let splices: BTreeMap<usize, SpliceRecord> = self
            .splices
            .iter()
            .map(|s| {
                (
                    s.original_layer,
                    SpliceRecord {
                        position: s.position,
                        method: s.method,
                        rank: s.rank,
                        lambda: s.lambda,
                    },
                )
            })
            .collect();
        Network::new(layers, acts)
            .and_then(|n| n.with_splices(splices))
            .map_err(|e| Error::Manifest(e.to_string()))
    }
}

/// Reads a manifest and the network it describes.
pub fn load_network<T: Scalar>(path: impl AsRef<Path>) -> Result<Network<T>> {
    let path = path.as_ref();
    let manifest = NetworkManifest::read(path)?;
    manifest.load(path.parent().unwrap_or_else(|| Path::new(".")))
}

/// Writes every layer as `layer{i}.weights.dmat` / `layer{i}.bias.dmat` into
/// `dir` plus a manifest file named `manifest_name`; returns the manifest path.
pub fn save_network<T: Scalar>(net: &Network<T>, dir: impl AsRef<Path>, manifest_name: &str) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut layers = Vec::with_capacity(net.len());
    for (i, (layer, act)) in net.layers().iter().zip(net.activations()).enumerate() {
        let weights = format!("layer{i}.weights.dmat");
        let bias = format!("layer{i}.bias.dmat");
        write_matrix(dir.join(&weights), layer.weights())?;
        write_matrix(dir.join(&bias), &DenseMatrix::row_vector(layer.bias()))?;
        layers.push(LayerEntry {
            weights,
            bias,
            activation: *act,
        });
    }
    let splices = net
        .splices()
        .iter()
        .map(|(&original_layer, r)| SpliceEntry {
            original_layer,
            position: r.position,
            method: r.method,
            rank: r.rank,
            lambda: r.lambda,
        })
        .collect();
    let manifest = NetworkManifest {
        format: MANIFEST_FORMAT.to_string(),
        version: 1,
        layers,
        splices,
    };
    let path = dir.join(manifest_name);
    std::fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
