//! Output files: CSV tables of grid samples with JSON sidecars carrying
//! the exact Fourier coefficients (modes k >= 0; negative modes follow
//! from Hermitian symmetry). Floats are printed in shortest-roundtrip
//! form, so parsing a file recovers the written values bit for bit.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use difflow::{Field, GridSpec};

pub const CONVENTION_NOTE: &str = "period 2pi, factor i";

/// One stored field: coefficients at modes 0..=K as (k, re, im).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffTable {
    pub modes: Vec<(i64, f64, f64)>,
}

impl CoeffTable {
    pub fn from_field(f: &Field) -> Self {
        let modes = (0..=f.grid().max_mode())
            .map(|k| {
                let c = f.coeff(k);
                (k, c.re, c.im)
            })
            .collect();
        Self { modes }
    }

    pub fn to_field(&self, grid: GridSpec) -> Result<Field, difflow::Error> {
        let pairs: Vec<_> = self
            .modes
            .iter()
            .map(|&(k, re, im)| (k, num_complex::Complex::new(re, im)))
            .collect();
        Field::from_modes(grid, &pairs)
    }
}

/// Sidecar of a simulation snapshot.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub time: f64,
    pub n_points: usize,
    pub operator: String,
    pub convention: String,
    pub u: CoeffTable,
    pub displacement: CoeffTable,
    pub v: CoeffTable,
    pub m: CoeffTable,
}

/// Sidecar of a diffeomorphism file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiffeoSidecar {
    pub n_points: usize,
    pub convention: String,
    pub displacement: CoeffTable,
}

/// Sidecar of a plain field file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub n_points: usize,
    pub convention: String,
    pub coefficients: CoeffTable,
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_file(path, &(text + "\n"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Snapshot CSV: columns x, u, phi, v, m at the grid nodes.
pub fn write_snapshot_csv(
    path: &Path,
    grid: GridSpec,
    u: &[f64],
    phi: &[f64],
    v: &[f64],
    m: &[f64],
) -> anyhow::Result<()> {
    let mut text = String::from("x,u,phi,v,m\n");
    for (j, x) in grid.nodes::<f64>().iter().enumerate() {
        text += &format!("{},{},{},{},{}\n", x, u[j], phi[j], v[j], m[j]);
    }
    write_file(path, &text)
}

/// Diffeo CSV: columns x, phi.
pub fn write_diffeo_csv(path: &Path, grid: GridSpec, phi: &[f64]) -> anyhow::Result<()> {
    let mut text = String::from("x,phi\n");
    for (j, x) in grid.nodes::<f64>().iter().enumerate() {
        text += &format!("{},{}\n", x, phi[j]);
    }
    write_file(path, &text)
}

/// Field CSV: columns x, value.
pub fn write_field_csv(path: &Path, grid: GridSpec, values: &[f64]) -> anyhow::Result<()> {
    let mut text = String::from("x,value\n");
    for (j, x) in grid.nodes::<f64>().iter().enumerate() {
        text += &format!("{},{}\n", x, values[j]);
    }
    write_file(path, &text)
}

/// Diagnostics time series CSV.
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub energy_drift: f64,
    pub noether_drift: f64,
    pub mean_momentum: f64,
    pub mu_drift: f64,
    pub constraint_drift: f64,
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticsRow]) -> anyhow::Result<()> {
    let mut text = String::from(
        "t,energy,energy_drift,noether_drift,mean_momentum,mu_drift,constraint_drift\n",
    );
    for r in rows {
        text += &format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            r.t,
            r.energy,
            r.energy_drift,
            r.noether_drift,
            r.mean_momentum,
            r.mu_drift,
            r.constraint_drift
        );
    }
    write_file(path, &text)
}

/// Final run report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: crate::scenario::Scenario,
    pub final_time: f64,
    pub blowup: Option<BlowupReportEntry>,
    pub drift: DriftSummary,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowupReportEntry {
    pub time: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DriftSummary {
    pub energy_rel: f64,
    pub noether_sup: f64,
    pub mu_abs: f64,
    pub constraint_sup: f64,
}
