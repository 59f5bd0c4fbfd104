//! File formats: mesh/field documents, family manifests, point CSV, run configuration
//! and SVG reports.

mod config;
mod document;
mod format;
mod svg;

pub use config::{RunConfig, CONFIG_ENV};
pub use document::{DisplacementEntry, FamilyManifest, MeshFieldDocument, FORMAT_VERSION};
pub use format::{format_f64, read_points_csv, to_json_string, write_points_csv};
pub use svg::{render_svg, SvgReport};
