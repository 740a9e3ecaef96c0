//! JSON polygon files: `{"dim": n, "vertices": [[...], ...], "name": "..."}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{BicycleError, Result};
use crate::geometry::{Polygon, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl PolygonFile {
    pub fn from_polygon(v: &Polygon, name: Option<String>) -> Self {
        PolygonFile {
            dim: v.dim(),
            vertices: v.vertices().iter().map(|p| p.coords().to_vec()).collect(),
            name,
        }
    }

    /// Validates against the polygon invariants.
    pub fn to_polygon(&self) -> Result<Polygon> {
        let vertices = self
            .vertices
            .iter()
            .map(|c| {
                if c.len() != self.dim {
                    return Err(BicycleError::DimensionMismatch {
                        expected: self.dim,
                        found: c.len(),
                    });
                }
                Vector::new(c.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Polygon::new(vertices)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| BicycleError::InvalidPolygon(e.to_string()))
    }

    /// Pretty JSON; floats are written in shortest round-trip form, so
    /// reading back is exact.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

pub fn load_polygon_file(path: &Path) -> Result<PolygonFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| BicycleError::InvalidPolygon(format!("{}: {e}", path.display())))?;
    PolygonFile::from_json(&text)
}

pub fn load_polygon(path: &Path) -> Result<Polygon> {
    load_polygon_file(path)?.to_polygon()
}

pub fn save_polygon(path: &Path, v: &Polygon, name: Option<String>) -> std::io::Result<()> {
    let mut text = PolygonFile::from_polygon(v, name).to_json();
    text.push('\n');
    fs::write(path, text)
}
