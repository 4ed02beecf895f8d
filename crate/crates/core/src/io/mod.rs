//! On-disk formats: binary matrices, network manifests and reports.

mod manifest;
mod matrix_file;
mod report;

pub use manifest::{load_network, save_network, LayerEntry, NetworkManifest, SpliceEntry, MANIFEST_FORMAT};
pub use matrix_file::{
    decode_matrix, encode_matrix, read_labels, read_matrix, write_labels, write_matrix, write_matrix_as, Dtype, Header,
    MatrixReader, HEADER_LEN, MAGIC, VERSION,
};
pub use report::CompressionReport;
