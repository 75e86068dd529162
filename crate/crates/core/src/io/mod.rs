//! File formats: run configuration, voxel masks, tree CSV, SVG and the evaluation log.

pub mod config;
pub mod log;
pub mod mask;
pub mod svg;
pub mod tree_file;

pub use config::{load_config, parse_config, ConfigEntries, DomainSpec, RunConfig};
pub use log::{format_log, parse_log, write_log};
pub use mask::{load_mask, MaskMeta};
pub use svg::{export_svg, format_svg};
pub use tree_file::{format_tree, parse_records, parse_tree, read_tree, write_tree, TreeFileRecord};
