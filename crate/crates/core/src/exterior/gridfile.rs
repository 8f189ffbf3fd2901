//! On-disk grid format: a pretty-printed JSON manifest holding the grid geometry
//! and any number of named fields, each a base64 string of little-endian f64s.
//!
//! Round trips are bit-exact: geometry goes through JSON's shortest round-trip
//! float printing, samples through raw bytes.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::grid::GridField;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    kind: String,
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    fields: Vec<FieldEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldEntry {
    name: String,
    components: usize,
    dtype: String,
    layout: String,
    data: String,
}

/// Named fields sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub fields: Vec<(String, GridField)>,
}

impl GridFile {
    pub fn single(name: &str, field: GridField) -> Self {
        Self { fields: vec![(name.to_string(), field)] }
    }

    pub fn push(&mut self, name: &str, field: GridField) -> Result<()> {
        if let Some((_, first)) = self.fields.first() {
            first.check_same_grid(&field)?;
        }
        self.fields.push((name.to_string(), field));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&GridField> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    /// The named field, or the only field if the file holds exactly one.
    pub fn field_or_only(&self, name: &str) -> Result<&GridField> {
        if let Some(f) = self.get(name) {
            return Ok(f);
        }
        match self.fields.as_slice() {
            [(_, f)] => Ok(f),
            _ => Err(Error::Parse(format!("grid file has no field named {name:?}"))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let first = &self
            .fields
            .first()
            .ok_or_else(|| Error::InvalidGrid("grid file needs at least one field".into()))?
            .1;
        let mut entries = Vec::new();
        for (name, f) in &self.fields {
            first.check_same_grid(f)?;
            let bytes: Vec<u8> = f.values().iter().flat_map(|v| v.to_le_bytes()).collect();
            entries.push(FieldEntry {
                name: name.clone(),
                components: f.components(),
                dtype: "f64".into(),
                layout: "row-major".into(),
                data: STANDARD.encode(bytes),
            });
        }
        let m = Manifest {
            format_version: FORMAT_VERSION,
            kind: format!("grid{}d", first.dim()),
            shape: first.shape().to_vec(),
            origin: first.origin().to_vec(),
            spacing: first.spacing().to_vec(),
            fields: entries,
        };
        Ok(serde_json::to_string_pretty(&m)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported format_version {}", m.format_version)));
        }
        if m.kind != format!("grid{}d", m.shape.len()) {
            return Err(Error::Parse(format!("kind {:?} does not match {}D shape", m.kind, m.shape.len())));
        }
        if m.fields.is_empty() {
            return Err(Error::Parse("grid file has no fields".into()));
        }
        let mut fields = Vec::new();
        for e in m.fields {
            if e.dtype != "f64" || e.layout != "row-major" {
                return Err(Error::Parse(format!(
                    "field {:?}: unsupported dtype/layout {}/{}",
                    e.name, e.dtype, e.layout
                )));
            }
            let bytes = STANDARD
                .decode(e.data.as_bytes())
                .map_err(|err| Error::Parse(format!("field {:?}: {err}", e.name)))?;
            if bytes.len() % 8 != 0 {
                return Err(Error::Parse(format!("field {:?}: data is not a whole number of f64s", e.name)));
            }
            let values = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect();
            let f = GridField::new(m.shape.clone(), m.origin.clone(), m.spacing.clone(), e.components, values)?;
            fields.push((e.name, f));
        }
        Ok(Self { fields })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
