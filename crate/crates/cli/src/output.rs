// SPDX-License-Identifier: Apache-2.0

//! Plot-ready CSV files. Each file opens with `#` comment lines recording
//! the tool version, command, config hash and seed; nothing time-dependent
//! is written, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct Metadata {
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub step_mode: &'static str,
}

impl Metadata {
    pub fn header(&self) -> String {
        format!(
            "# qutrit-noise {}\n# command: {}\n# config_sha256: {}\n# seed: {}\n# step_mode: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_sha256,
            self.seed,
            self.step_mode
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Shortest round-trip formatting; `NaN`/`inf` spelled the way numpy and
/// pandas read them.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Metadata) -> String {
        let mut s = meta.header();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let p = self.root.join(name);
        fs::write(&p, contents)?;
        Ok(p)
    }

    pub fn write_table(&self, name: &str, meta: &Metadata, t: &Table) -> io::Result<PathBuf> {
        self.write(name, &t.render(meta))
    }
}

/// Minimal matplotlib script for a CSV written by this tool.
pub fn plot_stub(csv: &str, x: &str, ys: &[&str], logx: bool, logy: bool) -> String {
    let ys = ys.iter().map(|y| format!("\"{y}\"")).collect::<Vec<_>>().join(", ");
    format!(
        "# Generated by qutrit-noise. Edit freely.\n\
         import pandas as pd\n\
         import matplotlib.pyplot as plt\n\
         \n\
         df = pd.read_csv(\"{csv}\", comment=\"#\")\n\
         fig, ax = plt.subplots()\n\
         for col in [{ys}]:\n\
         \x20   if col in df and df[col].notna().any():\n\
         \x20       ax.plot(df[\"{x}\"], df[col], label=col)\n\
         ax.set_xlabel(\"{x}\")\n\
         {}{}ax.legend()\n\
         fig.savefig(\"{}.png\", dpi=150)\n",
        if logx { "ax.set_xscale(\"log\")\n" } else { "" },
        if logy { "ax.set_yscale(\"log\")\n" } else { "" },
        csv.trim_end_matches(".csv"),
    )
}
