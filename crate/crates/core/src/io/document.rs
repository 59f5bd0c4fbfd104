use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::format::to_json_string;
use crate::configuration::{Configuration, StandaloneField};
use crate::equivalence::{GroupSpec, PointConfigurationSet};
use crate::geometry::{AffineMap, LinearMap, SimplicialBody, SpaceDiffeo, Vector};
use crate::{Error, Result};

pub const FORMAT_VERSION: &str = "anelkin/1";

/// A mesh with optional placement and per-cell field (row-major matrices).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFieldDocument {
    pub format_version: String,
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

fn doc_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Document {
        path: path.into(),
        message: message.into(),
    }
}

fn json_error(e: serde_json::Error) -> Error {
    doc_error(format!("line {}, column {}", e.line(), e.column()), e.to_string())
}

fn check_version(version: &str) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(doc_error(
            "format_version",
            format!("expected \"{FORMAT_VERSION}\", found \"{version}\""),
        ));
    }
    Ok(())
}

fn check_points(name: &str, points: &[Vec<f64>], dim: usize) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(doc_error(
                format!("{name}[{i}]"),
                format!("{} coordinates, expected {dim}", p.len()),
            ));
        }
        if let Some(k) = p.iter().position(|x| !x.is_finite()) {
            return Err(doc_error(format!("{name}[{i}][{k}]"), "coordinate is not finite"));
        }
    }
    Ok(())
}

fn vectors(points: &[Vec<f64>]) -> Vec<Vector> {
    points.iter().map(|p| Vector::from_slice(p)).collect()
}

/// Rewrites cell-indexed library errors as document paths.
fn at_cells(e: Error) -> Error {
    match e {
        Error::DegenerateCell { cell, det } => {
            doc_error(format!("cells[{cell}]"), format!("degenerate cell (|det| = {det:e})"))
        }
        Error::OrientationViolation { cell, det } => {
            doc_error(format!("cells[{cell}]"), format!("negatively oriented (det = {det:e})"))
        }
        other => other,
    }
}

fn at_field(e: Error) -> Error {
    match e {
        Error::OrientationViolation { cell, det } => {
            doc_error(format!("field[{cell}]"), format!("determinant {det:e} is not positive"))
        }
        other => other,
    }
}

fn at_base(e: Error) -> Error {
    match e {
        Error::OrientationViolation { cell, det } | Error::DegenerateCell { cell, det } => {
            doc_error(format!("base (cell {cell})"), format!("placed cell has det = {det:e}"))
        }
        other => other,
    }
}

impl MeshFieldDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: MeshFieldDocument = serde_json::from_str(text).map_err(json_error)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> Result<String> {
        to_json_string(self)
    }

    /// Array shapes, index ranges and finiteness.
    pub fn validate(&self) -> Result<()> {
        check_version(&self.format_version)?;
        let dim = self.dim;
        if !(dim == 2 || dim == 3) {
            return Err(doc_error("dim", format!("{dim} is not 2 or 3")));
        }
        check_points("vertices", &self.vertices, dim)?;
        if self.cells.is_empty() {
            return Err(doc_error("cells", "no cells"));
        }
        let nv = self.vertices.len();
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(doc_error(
                    format!("cells[{c}]"),
                    format!("{} vertices, expected {}", cell.len(), dim + 1),
                ));
            }
            for (k, &v) in cell.iter().enumerate() {
                if v >= nv {
                    return Err(doc_error(
                        format!("cells[{c}][{k}]"),
                        format!("vertex index {v} out of range ({nv} vertices)"),
                    ));
                }
            }
        }
        if let Some(base) = &self.base {
            if base.len() != nv {
                return Err(doc_error("base", format!("{} points for {nv} vertices", base.len())));
            }
            check_points("base", base, dim)?;
        }
        if let Some(field) = &self.field {
            if field.len() != self.cells.len() {
                return Err(doc_error(
                    "field",
                    format!("{} matrices for {} cells", field.len(), self.cells.len()),
                ));
            }
            for (c, m) in field.iter().enumerate() {
                if m.len() != dim * dim {
                    return Err(doc_error(
                        format!("field[{c}]"),
                        format!("{} entries, expected {}", m.len(), dim * dim),
                    ));
                }
                if let Some(k) = m.iter().position(|x| !x.is_finite()) {
                    return Err(doc_error(format!("field[{c}][{k}]"), "entry is not finite"));
                }
            }
        }
        Ok(())
    }

    pub fn to_body(&self) -> Result<Arc<SimplicialBody>> {
        self.validate()?;
        SimplicialBody::new(self.dim, vectors(&self.vertices), self.cells.clone())
            .map(Arc::new)
            .map_err(at_cells)
    }

    fn field_maps(&self) -> Result<Option<Vec<LinearMap>>> {
        self.field
            .as_ref()
            .map(|f| f.iter().map(|m| LinearMap::from_row_major(m)).collect())
            .transpose()
    }

    /// The configuration described by the document. A missing base means the reference
    /// placement; a missing field means the tangent map of the base.
    pub fn to_configuration(&self) -> Result<Configuration> {
        self.to_configuration_on(self.to_body()?)
    }

    /// Like [`MeshFieldDocument::to_configuration`], reusing an already built body when
    /// the meshes agree.
    pub fn to_configuration_on(&self, body: Arc<SimplicialBody>) -> Result<Configuration> {
        if !self.same_mesh(&body) {
            return Err(Error::BodyMismatch);
        }
        let base = self
            .base
            .as_ref()
            .map_or_else(|| body.ref_coords().to_vec(), |b| vectors(b));
        match self.field_maps()? {
            Some(field) => {
                StandaloneField::new(body.clone(), field.clone()).map_err(at_field)?;
                Configuration::new(body, base, field).map_err(at_base)
            }
            None => Configuration::holonomic(body, base).map_err(at_base),
        }
    }

    /// The document's field on its own; without a field, the tangent map of the base.
    pub fn to_field(&self) -> Result<StandaloneField> {
        let body = self.to_body()?;
        match self.field_maps()? {
            Some(field) => StandaloneField::new(body, field).map_err(at_field),
            None => Ok(self.to_configuration_on(body)?.tangent_map()),
        }
    }

    pub fn same_mesh(&self, body: &SimplicialBody) -> bool {
        self.dim == body.dim()
            && self.cells.as_slice() == body.cells()
            && self.vertices.len() == body.num_vertices()
            && self
                .vertices
                .iter()
                .zip(body.ref_coords())
                .all(|(a, b)| a.as_slice() == b.as_slice())
    }

    /// The mesh alone.
    pub fn from_body(body: &SimplicialBody) -> Self {
        MeshFieldDocument {
            format_version: FORMAT_VERSION.to_string(),
            dim: body.dim(),
            vertices: body.ref_coords().iter().map(|p| p.as_slice().to_vec()).collect(),
            cells: body.cells().to_vec(),
            base: None,
            field: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_configuration(c: &Configuration) -> Self {
        let mut doc = Self::from_body(c.body());
        doc.base = Some(c.base().iter().map(|p| p.as_slice().to_vec()).collect());
        doc.field = Some(c.field().iter().map(LinearMap::row_major).collect());
        doc
    }

    pub fn from_field(body: &SimplicialBody, field: &[LinearMap]) -> Self {
        let mut doc = Self::from_body(body);
        doc.field = Some(field.iter().map(LinearMap::row_major).collect());
        doc
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

/// An affine displacement `y -> A y + c` with `A` row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplacementEntry {
    pub linear: Vec<f64>,
    pub translation: Vec<f64>,
}

impl DisplacementEntry {
    pub fn to_affine(&self) -> Result<AffineMap> {
        AffineMap::new(
            LinearMap::from_row_major(&self.linear)?,
            Vector::from_slice(&self.translation),
        )
    }
}

/// A family of point configurations of one protobody.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyManifest {
    pub format_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub configs: Vec<Vec<Vec<f64>>>,
    /// Explicit displacement list; ignored when `search_affine` is set.
    #[serde(default)]
    pub displacements: Vec<DisplacementEntry>,
    #[serde(default)]
    pub search_affine: bool,
}

impl FamilyManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: FamilyManifest = serde_json::from_str(text).map_err(json_error)?;
        check_version(&m.format_version)?;
        Ok(m)
    }

    pub fn emit(&self) -> Result<String> {
        to_json_string(self)
    }

    pub fn to_point_set(&self) -> Result<PointConfigurationSet> {
        let Some(first) = self.configs.first() else {
            return Err(doc_error("configs", "no configurations"));
        };
        let Some(dim) = first.first().map(Vec::len) else {
            return Err(doc_error("configs[0]", "empty configuration"));
        };
        if !(1..=3).contains(&dim) {
            return Err(doc_error("configs[0][0]", format!("{dim} coordinates")));
        }
        for (k, c) in self.configs.iter().enumerate() {
            check_points(&format!("configs[{k}]"), c, dim)?;
        }
        let group = if self.search_affine {
            GroupSpec::Affine
        } else {
            let maps = self
                .displacements
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    d.to_affine()
                        .map(SpaceDiffeo::Affine)
                        .map_err(|e| doc_error(format!("displacements[{k}]"), e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            GroupSpec::Explicit(maps)
        };
        let configs = self.configs.iter().map(|c| vectors(c)).collect();
        match &self.labels {
            Some(labels) => PointConfigurationSet::new(labels.clone(), configs, group),
            None => PointConfigurationSet::unlabeled(configs, group),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> MeshFieldDocument {
        let body = SimplicialBody::grid_2d(1, 1, [0.0, 0.0], [1.0, 1.0]).unwrap();
        MeshFieldDocument::from_body(&body)
    }

    #[test]
    fn round_trip() {
        let mut doc = unit_square().with_metadata("note", "x");
        doc.field = Some(vec![vec![1.0, 0.1, 0.0, 1.0 / 3.0]; 2]);
        doc.base = Some(vec![
            vec![0.1, 0.2],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0 + 1e-17],
        ]);
        let text = doc.emit().unwrap();
        assert_eq!(MeshFieldDocument::parse(&text).unwrap(), doc);
        assert_eq!(MeshFieldDocument::parse(&text).unwrap().emit().unwrap(), text);
    }

    #[test]
    fn bad_cell_index_names_its_path() {
        let mut doc = unit_square();
        doc.cells[1][2] = 17;
        let text = serde_json::to_string(&doc).unwrap();
        let err = MeshFieldDocument::parse(&text).unwrap_err();
        assert!(err.to_string().contains("cells[1][2]"), "{err}");
    }

    #[test]
    fn wrong_version_and_syntax() {
        let mut doc = unit_square();
        doc.format_version = "anelkin/0".into();
        let text = serde_json::to_string(&doc).unwrap();
        assert!(MeshFieldDocument::parse(&text)
            .unwrap_err()
            .to_string()
            .contains("format_version"));
        let err = MeshFieldDocument::parse("{\n  \"dim\": 2,\n  oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn missing_pieces_default_to_reference() {
        let c = unit_square().to_configuration().unwrap();
        assert!(c.is_holonomic(1e-12).holonomic);
        assert_eq!(c.base(), c.body().ref_coords());
    }

    #[test]
    fn manifest_builds_point_set() {
        let text = r#"{
            "format_version": "anelkin/1",
            "configs": [[[0, 0], [1, 0], [0, 1]], [[1, 1], [2, 1], [1, 2]]],
            "displacements": [{"linear": [1, 0, 0, 1], "translation": [1, 1]}]
        }"#;
        let pcs = FamilyManifest::parse(text).unwrap().to_point_set().unwrap();
        assert_eq!(pcs.configs().len(), 2);
        assert!(pcs.displacement(0, 1).unwrap().is_some());
    }
}
