use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;

const AUTOMOTIVE: &str = include_str!("../../data/automotive_segments.toml");

/// Named product-code groups. Codes are disjoint across segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentConfig {
    segments: BTreeMap<String, BTreeSet<String>>,
    code_index: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct SegmentFile {
    segment: Vec<SegmentEntry>,
}

#[derive(Serialize, Deserialize)]
struct SegmentEntry {
    name: String,
    codes: Vec<String>,
}

impl SegmentConfig {
    pub fn new<I, C>(segments: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = (String, C)>,
        C: IntoIterator<Item = String>,
    {
        let mut map = BTreeMap::new();
        let mut code_index: BTreeMap<String, String> = BTreeMap::new();
        for (name, codes) in segments {
            let name = name.trim().to_string();
            if map.contains_key(&name) {
                return Err(IngestError::DuplicateSegment(name));
            }
            let codes: BTreeSet<String> = codes.into_iter().map(|c| c.trim().to_string()).collect();
            if codes.is_empty() {
                return Err(IngestError::EmptySegment(name));
            }
            for code in &codes {
                if let Some(first) = code_index.insert(code.clone(), name.clone()) {
                    return Err(IngestError::DuplicateCode {
                        code: code.clone(),
                        first,
                        second: name,
                    });
                }
            }
            map.insert(name, codes);
        }
        Ok(Self {
            segments: map,
            code_index,
        })
    }

    /// The three automotive component groups (electrical parts, engines,
    /// rubber and metal parts) with their SITC Rev. 3 codes.
    pub fn automotive() -> Self {
        Self::from_toml_str(AUTOMOTIVE).expect("bundled segment config is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, IngestError> {
        let file: SegmentFile = toml::from_str(text).map_err(|e| IngestError::Config(e.to_string()))?;
        Self::new(file.segment.into_iter().map(|s| (s.name, s.codes)))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let file = SegmentFile {
            segment: self
                .segments
                .iter()
                .map(|(name, codes)| SegmentEntry {
                    name: name.clone(),
                    codes: codes.iter().cloned().collect(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("segment config serializes")
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.segments.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.segments.contains_key(name)
    }

    pub fn codes(&self, name: &str) -> Option<&BTreeSet<String>> {
        self.segments.get(name)
    }

    pub fn segment_of(&self, code: &str) -> Option<&str> {
        self.code_index.get(code).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}
