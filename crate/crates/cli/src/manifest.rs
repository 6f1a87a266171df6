use std::fmt::Display;
use std::path::Path;

use anyhow::{Context, Result};

/// Flat `key = value` record written beside every command's outputs.
/// The timestamp lives here only, so data files stay seed-determined.
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        let mut m = Manifest { entries: Vec::new() };
        m.set("command", command);
        m.set("tool_version", env!("CARGO_PKG_VERSION"));
        if let Some(seed) = seed {
            m.set("seed", seed);
        }
        m.set("created", chrono::Local::now().to_rfc3339());
        m
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn path(&mut self, key: &str, path: &Path) {
        self.set(key, path.display());
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        self.write_to(&dir.join("manifest.txt"))
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn join<T: Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
