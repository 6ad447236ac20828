use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, configuration or input files.
    Input(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

/// Reads a text file; missing or unreadable files are I/O failures.
pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Loads an episode log, keeping I/O and format failures apart.
pub fn load_log(path: &Path) -> Result<crowdsim_core::EpisodeLog, Failure> {
    let file = std::fs::File::open(path).map_err(|e| Failure::io(path, e))?;
    crowdsim_core::EpisodeLog::read_jsonl(std::io::BufReader::new(file)).map_err(|e| match e {
        crowdsim_core::Error::Io(io) => Failure::io(path, io),
        other => Failure::Input(format!("{}: {other}", path.display())),
    })
}
