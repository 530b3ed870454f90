//! Append-only record of completed (dataset, split, method) work items so an
//! interrupted benchmark can resume without redoing them.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::grid::Method;
use super::protocol::SplitOutcome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub dataset: String,
    pub outcome: SplitOutcome,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: String,
}

type Key = (String, usize, Method);

/// JSON-lines ledger. The first line holds a fingerprint of the run
/// configuration; resuming under a different configuration is refused.
#[derive(Debug)]
pub struct Ledger {
    path: PathBuf,
    file: Mutex<File>,
    done: Mutex<HashMap<Key, LedgerEntry>>,
}

impl Ledger {
    /// Opens `path`. With `resume`, existing entries are loaded; otherwise the
    /// file is truncated.
    pub fn open(path: impl AsRef<Path>, fingerprint: &str, resume: bool) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let io = |e| Error::io(&path, e);
        let mut done = HashMap::new();

        if resume && path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(io)?);
            let mut lines = reader.lines();
            if let Some(first) = lines.next() {
                let header: Header = serde_json::from_str(&first.map_err(io)?)?;
                if header.config != fingerprint {
                    return Err(Error::Config(format!(
                        "ledger {} was written by a different configuration",
                        path.display()
                    )));
                }
            }
            for line in lines {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                // a torn final line from an interrupted write is dropped
                let Ok(entry) = serde_json::from_str::<LedgerEntry>(&line) else {
                    log::warn!("ignoring unreadable ledger line in {}", path.display());
                    continue;
                };
                done.insert(key(&entry), entry);
            }
            let mut file = OpenOptions::new().append(true).open(&path).map_err(io)?;
            let text = std::fs::read(&path).map_err(io)?;
            if text.last().is_some_and(|&b| b != b'\n') {
                writeln!(file).map_err(io)?;
            }
            return Ok(Ledger {
                path,
                file: Mutex::new(file),
                done: Mutex::new(done),
            });
        }

        let mut file = File::create(&path).map_err(io)?;
        let header = serde_json::to_string(&Header {
            config: fingerprint.to_string(),
        })?;
        writeln!(file, "{header}").map_err(io)?;
        Ok(Ledger {
            path,
            file: Mutex::new(file),
            done: Mutex::new(done),
        })
    }

    pub fn get(&self, dataset: &str, split: usize, method: Method) -> Option<LedgerEntry> {
        self.done
            .lock()
            .expect("ledger lock")
            .get(&(dataset.to_string(), split, method))
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.done.lock().expect("ledger lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn record(&self, entry: LedgerEntry) -> Result<()> {
        let line = serde_json::to_string(&entry)?;
        {
            let mut file = self.file.lock().expect("ledger lock");
            writeln!(file, "{line}").map_err(|e| Error::io(&self.path, e))?;
            file.flush().map_err(|e| Error::io(&self.path, e))?;
        }
        self.done
            .lock()
            .expect("ledger lock")
            .insert(key(&entry), entry);
        Ok(())
    }
}

fn key(e: &LedgerEntry) -> Key {
    (e.dataset.clone(), e.outcome.split, e.outcome.method)
}
