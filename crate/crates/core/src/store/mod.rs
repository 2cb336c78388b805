//! Partitioned on-disk storage of a collection as slices.
//!
//! A deployment root holds one directory per simulated host:
//!
//! ```text
//! root/manifest.json
//! root/partition_map.bin
//! root/host_<k>/template.slc
//! root/host_<k>/meta.slc
//! root/host_<k>/attr/<class>.<name>/bin<b>.win<w>.slc
//! ```
//!
//! Attribute slices hold one attribute for every sub-graph of one bin over a
//! window of consecutive instances. Constant attributes live in the template
//! slice only.

mod binpack;
mod cache;
pub(crate) mod codec;
mod deploy;
mod host;
mod payload;
mod slice;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{ElementClass, ModelError};
use crate::partition::{PartitionError, SubgraphId};

pub use binpack::{bin_pack, lpt, BalanceMetric};
pub use cache::{CacheStats, FetchOutcome, SliceCache};
pub use deploy::{deploy, DeploymentManifest, HostManifest, SliceEntry, MANIFEST_FILE, PARTITION_MAP_FILE};
pub use host::{Deployment, FetchTally, HostStore, Projection, StoreCounters, SubgraphInstance};
pub use payload::{AttrSliceData, InstanceInfo, MetadataIndex, PartitionTemplate, WindowInfo};
pub use slice::{read_slice, write_slice, Slice, SliceHeader, SliceId, SliceKind, SLICE_MAGIC, SLICE_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub bins_per_partition: usize,
    pub instances_per_slice: usize,
    pub balance_metric: BalanceMetric,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self { bins_per_partition: 1, instances_per_slice: 1, balance_metric: BalanceMetric::Vertices }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("checksum mismatch in {0}")]
    Checksum(PathBuf),
    #[error("unsupported slice version {found} in {path}")]
    Version { path: PathBuf, found: u16 },
    #[error("malformed slice {path}: {what}")]
    Malformed { path: PathBuf, what: String },
    #[error("corrupt deployment: {0}")]
    CorruptDeployment(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unknown {class} attribute `{name}`")]
    UnknownAttribute { class: ElementClass, name: String },
    #[error("{class} attribute `{name}` was not projected")]
    NotProjected { class: ElementClass, name: String },
    #[error("unknown sub-graph {0}")]
    UnknownSubgraph(SubgraphId),
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("invalid collection: {0}")]
    InvalidCollection(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl StoreError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        StoreError::Io { path: path.to_path_buf(), source }
    }
}

pub(crate) fn host_dir(root: &Path, host: usize) -> PathBuf {
    root.join(format!("host_{host}"))
}

pub const TEMPLATE_SLICE: &str = "template.slc";
pub const META_SLICE: &str = "meta.slc";
