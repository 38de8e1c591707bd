use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SessionError;

/// One guide activity: duration, materials, instructions, phases, what to
/// expect, and the meanings it aims at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Activity {
    pub id: String,
    pub title: String,
    /// Minutes.
    pub estimated_duration: u32,
    pub materials: Vec<String>,
    pub instructions: String,
    pub phases: Vec<String>,
    pub expected_behaviors: String,
    pub target_meanings: String,
}

impl Activity {
    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |reason: &str| SessionError::InvalidActivity {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.trim().is_empty() {
            return Err(bad("empty id"));
        }
        if self.title.trim().is_empty() {
            return Err(bad("empty title"));
        }
        if self.estimated_duration == 0 {
            return Err(bad("duration must be positive"));
        }
        Ok(())
    }
}

const BUILTIN: [&str; 2] = [
    include_str!("../../data/activities/straw-transcoding.json"),
    include_str!("../../data/activities/rectangle-derivation.json"),
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    activities: BTreeMap<String, Activity>,
}

impl Catalog {
    pub fn builtin() -> Self {
        let mut catalog = Catalog::default();
        for doc in BUILTIN {
            let activity: Activity = serde_json::from_str(doc).expect("bundled activity is valid JSON");
            catalog.insert(activity).expect("bundled activity is valid");
        }
        catalog
    }

    /// Built-in activities plus every `*.json` in `dir`; files override
    /// built-ins with the same id.
    pub fn with_dir(dir: &Path) -> Result<Self, SessionError> {
        let mut catalog = Catalog::builtin();
        let entries = std::fs::read_dir(dir).map_err(|e| SessionError::Io(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(|e| SessionError::Io(format!("{}: {e}", path.display())))?;
            let activity: Activity = serde_json::from_str(&text).map_err(|e| SessionError::InvalidActivity {
                id: path.display().to_string(),
                reason: e.to_string(),
            })?;
            catalog.insert(activity)?;
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, activity: Activity) -> Result<(), SessionError> {
        activity.validate()?;
        self.activities.insert(activity.id.clone(), activity);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Activity> {
        self.activities.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Activity> {
        self.activities.values()
    }
}
