//! Report tree under `--out`: `reports/*.txt`, `data/*`, `manifest.json`.

use fracdo::report::Report;
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct Artifact {
    path: String,
    kind: &'static str,
}

#[derive(Serialize)]
struct ReportEntry<'a> {
    path: String,
    title: &'a str,
    verdict: &'static str,
    checks: &'a [fracdo::report::Check],
}

pub struct Output {
    root: PathBuf,
    artifacts: Vec<Artifact>,
    reports: Vec<(String, Report)>,
}

fn kind_of(name: &str) -> &'static str {
    match Path::new(name).extension().and_then(|e| e.to_str()) {
        Some("csv") => "csv",
        Some("json") => "json",
        Some("bin") => "binary",
        _ => "other",
    }
}

impl Output {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root.join("data"))?;
        fs::create_dir_all(root.join("reports"))?;
        Ok(Output {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
            reports: Vec::new(),
        })
    }

    /// Writes `data/<name>` through `f`.
    pub fn data<F>(&mut self, name: &str, f: F) -> fracdo::Result<()>
    where
        F: FnOnce(&mut dyn Write) -> fracdo::Result<()>,
    {
        let rel = format!("data/{name}");
        let mut w = BufWriter::new(fs::File::create(self.root.join(&rel))?);
        f(&mut w)?;
        w.flush()?;
        self.artifacts.push(Artifact {
            path: rel,
            kind: kind_of(name),
        });
        Ok(())
    }

    pub fn report(&mut self, name: &str, r: Report) {
        self.reports.push((format!("reports/{name}.txt"), r));
    }

    pub fn passed(&self) -> bool {
        self.reports.iter().all(|(_, r)| r.passed())
    }

    /// Writes the reports and the manifest; returns the overall verdict.
    pub fn finish(self, command: &str, config: &Value, max_flops: f64) -> std::io::Result<bool> {
        let passed = self.passed();
        for (path, r) in &self.reports {
            fs::write(self.root.join(path), r.render())?;
        }
        let reports: Vec<ReportEntry> = self
            .reports
            .iter()
            .map(|(path, r)| ReportEntry {
                path: path.clone(),
                title: &r.title,
                verdict: if r.passed() { "PASS" } else { "FAIL" },
                checks: &r.checks,
            })
            .collect();
        let manifest = serde_json::json!({
            "tool": "fracdo",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "max_flops": max_flops,
            "config": config,
            "artifacts": self.artifacts,
            "reports": reports,
            "verdict": if passed { "PASS" } else { "FAIL" },
        });
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(self.root.join("manifest.json"), text)?;
        Ok(passed)
    }
}
