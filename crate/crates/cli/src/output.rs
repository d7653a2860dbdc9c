//! CSV artifacts and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use levyturb::analysis::{Shell, SpectrumSeries};
use levyturb::diffusion::MsdSeries;
use levyturb::solver::StepDiagnostics;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SPECTRUM_HEADER: &str = "shell,k_center,energy";
pub const DIAGNOSTICS_HEADER: &str = "step,time,energy,enstrophy,dissipation_rate";
pub const MSD_HEADER: &str = "time,width_sq,q_used";

/// 17 significant digits, enough to round-trip any f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn spectrum_csv(series: &SpectrumSeries) -> String {
    let mut s = format!("{SPECTRUM_HEADER}\n");
    for sh in &series.shells {
        writeln!(s, "{},{},{}", sh.index, num(sh.k_center), num(sh.energy)).unwrap();
    }
    s
}

pub fn diagnostics_csv(rows: &[StepDiagnostics]) -> String {
    let mut s = format!("{DIAGNOSTICS_HEADER}\n");
    for d in rows {
        writeln!(
            s,
            "{},{},{},{},{}",
            d.step,
            num(d.time),
            num(d.energy),
            num(d.enstrophy),
            num(d.dissipation_rate)
        )
        .unwrap();
    }
    s
}

pub fn msd_csv(series: &MsdSeries) -> String {
    let mut s = format!("{MSD_HEADER}\n");
    for (t, w) in series.times.iter().zip(&series.width_sq) {
        writeln!(s, "{},{},{}", num(*t), num(*w), num(series.q)).unwrap();
    }
    s
}

pub fn parse_spectrum_csv(path: &Path) -> Result<SpectrumSeries, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SPECTRUM_HEADER => {}
        other => {
            return Err(CliError::config(format!(
                "{}: expected header `{SPECTRUM_HEADER}`, found {:?}",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let mut shells = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || CliError::config(format!("{}: malformed row {}: {line}", path.display(), n + 2));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad());
        }
        shells.push(Shell {
            index: f[0].parse().map_err(|_| bad())?,
            k_center: f[1].parse().map_err(|_| bad())?,
            energy: f[2].parse().map_err(|_| bad())?,
        });
    }
    Ok(SpectrumSeries::from_shells(shells))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: Map<String, Value>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<OutputFile>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Collects artifacts in one directory and records their digests.
pub struct Artifacts {
    dir: PathBuf,
    outputs: Vec<OutputFile>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(OutputFile {
            file: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        seed: u64,
        config: Map<String, Value>,
        started_unix: f64,
    ) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            tool: "levyturb".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            started_unix,
            finished_unix: unix_now(),
            outputs: self.outputs,
        };
        let path = self.dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        std::fs::write(&path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{} is not a manifest: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn numbers_round_trip() {
        for x in [1.0 / 3.0, -23.0 / 9.0, 1e-300, 6.02214076e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn spectrum_csv_round_trips() {
        let series = SpectrumSeries::from_points(&[(1.0, 0.5), (2.0, 0.125), (3.0, 1.0 / 27.0)]);
        let dir = std::env::temp_dir().join(format!("levyturb-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.csv");
        std::fs::write(&path, spectrum_csv(&series)).unwrap();
        assert_eq!(parse_spectrum_csv(&path).unwrap(), series);
        std::fs::write(&path, "k,E\n1,2\n").unwrap();
        assert!(parse_spectrum_csv(&path).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
