//! Output directory handling and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use tailwave_core::io::write_csv;

use crate::error::{CliError, CliResult};

/// Collects the files of one run and writes the manifest when finished.
pub struct RunOutput {
    pub dir: PathBuf,
    command: String,
    echo: Vec<(String, String)>,
    extra: Vec<(String, String)>,
    started: Instant,
}

impl RunOutput {
    pub fn create(dir: PathBuf, command: &str, echo: &[(String, String)]) -> CliResult<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Core(tailwave_core::Error::Io(format!("{}: {e}", dir.display()))))?;
        Ok(RunOutput {
            dir,
            command: command.to_string(),
            echo: echo.to_vec(),
            extra: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        write_csv(&self.path(name), header, rows)?;
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.extra.push((key.to_string(), value.to_string()));
    }

    /// Writes `manifest.txt`: command, version, config echo, run facts and wall time.
    pub fn finish(self) -> CliResult<()> {
        let path = self.path("manifest.txt");
        let io = |e: std::io::Error| CliError::Core(tailwave_core::Error::Io(format!("{}: {e}", path.display())));
        let mut f = std::fs::File::create(&path).map_err(io)?;
        let mut lines = vec![
            format!("command = {}", self.command),
            format!("version = {}", env!("CARGO_PKG_VERSION")),
        ];
        lines.extend(self.echo.iter().map(|(k, v)| format!("config.{k} = {v}")));
        lines.extend(self.extra.iter().map(|(k, v)| format!("{k} = {v}")));
        lines.push(format!("wall_time_s = {:.3}", self.started.elapsed().as_secs_f64()));
        for line in lines {
            writeln!(f, "{line}").map_err(io)?;
        }
        Ok(())
    }
}

/// Reads `manifest.txt` back as key-value pairs.
pub fn read_manifest(dir: &Path) -> CliResult<Vec<(String, String)>> {
    let path = dir.join("manifest.txt");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::ConfigFile {
        path: path.clone(),
        message: e.to_string(),
    })?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

/// One `summary: key=value ...` line on standard output.
pub fn summary_line(command: &str, fields: &[(&str, String)]) -> String {
    let mut line = format!("summary: command={command}");
    for (k, v) in fields {
        line.push(' ');
        line.push_str(k);
        line.push('=');
        line.push_str(v);
    }
    line
}
