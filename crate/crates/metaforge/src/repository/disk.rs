//! One JSON file per object plus a write-ahead log so a multi-file change
//! lands completely or not at all.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const WAL_FILE: &str = "wal.log";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum Change {
    Put { file: String, content: String },
    Delete { file: String },
}

#[derive(Serialize, Deserialize)]
struct WalEntry {
    changes: Vec<Change>,
}

#[derive(Debug)]
pub struct Disk {
    root: PathBuf,
}

impl Disk {
    /// Opens `root`, replaying any intent left in the log by an interrupted write.
    pub fn open(root: &Path) -> Result<Disk> {
        for sub in ["resources", "groups", "users", "receipts"] {
            fs::create_dir_all(root.join(sub))?;
        }
        let disk = Disk {
            root: root.to_path_buf(),
        };
        disk.recover()?;
        Ok(disk)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn recover(&self) -> Result<()> {
        let wal = self.root.join(WAL_FILE);
        if !wal.exists() {
            return Ok(());
        }
        let reader = BufReader::new(File::open(&wal)?);
        for line in reader.lines() {
            let line = line?;
            // A torn final line means the intent was never fully recorded, so
            // none of its changes were applied either.
            let Ok(entry) = serde_json::from_str::<WalEntry>(&line) else {
                break;
            };
            self.apply(&entry.changes)?;
        }
        File::create(&wal)?;
        Ok(())
    }

    fn apply(&self, changes: &[Change]) -> Result<()> {
        for change in changes {
            match change {
                Change::Put { file, content } => {
                    let target = self.root.join(file);
                    let tmp = target.with_extension("json.tmp");
                    fs::write(&tmp, content)?;
                    fs::rename(&tmp, &target)?;
                }
                Change::Delete { file } => match fs::remove_file(self.root.join(file)) {
                    Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
                    _ => {}
                },
            }
        }
        Ok(())
    }

    pub fn commit(&self, changes: Vec<Change>) -> Result<()> {
        let wal_path = self.root.join(WAL_FILE);
        let mut wal = OpenOptions::new().create(true).append(true).open(&wal_path)?;
        let entry = WalEntry { changes };
        let mut line = serde_json::to_string(&entry).map_err(std::io::Error::from)?;
        line.push('\n');
        wal.write_all(line.as_bytes())?;
        wal.sync_data()?;
        self.apply(&entry.changes)?;
        wal.set_len(0)?;
        Ok(())
    }

    /// Contents of every `*.json` file in `sub`, sorted by file name.
    pub fn read_dir(&self, sub: &str) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(self.root.join(sub))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_owned();
            out.push((name, fs::read_to_string(&path)?));
        }
        out.sort();
        Ok(out)
    }
}
