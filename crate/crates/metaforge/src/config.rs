use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use crate::error::Result;
use crate::repository::Repository;
use crate::service::Service;
use crate::submission::load_targets;
use crate::terminology::{RemoteConfig, Terminology, DEFAULT_TTL};

pub const DEFAULT_PORT: u16 = 9090;
pub const TARGETS_FILE: &str = "targets.json";

#[derive(Debug, Clone)]
pub struct Config {
    pub data_dir: PathBuf,
    pub port: u16,
    pub terminology_url: Option<String>,
    pub terminology_api_key: Option<String>,
    pub terminology_ttl: Duration,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data_dir: PathBuf::from("./data"),
            port: DEFAULT_PORT,
            terminology_url: None,
            terminology_api_key: None,
            terminology_ttl: DEFAULT_TTL,
        }
    }
}

impl Config {
    pub fn remote(&self) -> Option<RemoteConfig> {
        self.terminology_url
            .as_ref()
            .filter(|u| !u.is_empty())
            .map(|u| RemoteConfig {
                base_url: u.clone(),
                api_key: self.terminology_api_key.clone().filter(|k| !k.is_empty()),
            })
    }

    /// Opens the data directory and wires the service around it.
    pub fn open_service(&self) -> Result<Service> {
        let repo = Arc::new(Repository::open(&self.data_dir)?);
        let terminology = Arc::new(Terminology::new(repo.clone(), self.remote()).with_ttl(self.terminology_ttl));
        let targets = load_targets(&self.data_dir.join(TARGETS_FILE))?;
        Ok(Service::new(repo, terminology, targets))
    }
}
