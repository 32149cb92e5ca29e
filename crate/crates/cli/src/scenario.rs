//! Scenario files: TOML descriptions of an operator, grid, initial
//! condition, optional fixed-point constraint, and integrator settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use difflow::expmap::ShootingParams;
use difflow::homogeneous::Constraint;
use difflow::{Field, GridSpec, IntegratorConfig, Symbol};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub operator: OperatorSpec,
    pub grid: GridSection,
    #[serde(default)]
    pub constraint: Option<ConstraintSection>,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub shooting: ShootingSection,
    #[serde(default)]
    pub symbol_check: SymbolCheckSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    /// ch | lambda2s | frac | hs | clm | wp | hilbert | identity | table
    pub name: String,
    /// Sobolev exponent for lambda2s.
    pub s: Option<f64>,
    /// Order for frac.
    pub r: Option<f64>,
    /// Path of a custom symbol table (for name = "table"), relative to
    /// the scenario file.
    pub table: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    /// "fix1" or "fix3".
    pub kind: String,
    /// Defaults: [0] for fix1, [0, 2pi/3, 4pi/3] for fix3.
    pub points: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// "zero" | "ch-reference"
    pub preset: Option<String>,
    /// Cosine amplitudes [[k, amp], ...].
    pub cos: Option<Vec<(i64, f64)>>,
    /// Sine amplitudes [[k, amp], ...].
    pub sin: Option<Vec<(i64, f64)>>,
    /// Constant component.
    pub mean: Option<f64>,
    /// Raw coefficients u_hat(k) for k >= 0 (Hermitian mirror applied).
    pub modes: Option<Vec<ModeSpec>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub dt: f64,
    pub t_end: f64,
    pub adaptive: bool,
    pub snapshot_stride: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            adaptive: false,
            snapshot_stride: 100,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootingSection {
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub basis_limit: i64,
}

impl Default for ShootingSection {
    fn default() -> Self {
        let p = ShootingParams::<f64>::default();
        Self {
            dt: p.dt,
            tol: p.tol,
            max_iter: p.max_iter,
            fd_step: p.fd_step,
            basis_limit: p.basis_limit,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolCheckSection {
    pub n_max: usize,
    pub xi_max: f64,
    pub h: f64,
}

impl Default for SymbolCheckSection {
    fn default() -> Self {
        Self {
            n_max: 4,
            xi_max: 1024.0,
            h: 1e-2,
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), difflow::Error> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            difflow::Error::Config(format!("cannot read scenario {}: {e}", path.display()))
        })?;
        let scenario: Scenario = toml::from_str(&text)
            .map_err(|e| difflow::Error::Config(format!("scenario parse error: {e}")))?;
        let base = path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .to_path_buf();
        Ok((scenario, base))
    }

    pub fn symbol(&self, base: &Path) -> Result<Symbol, difflow::Error> {
        if self.operator.name == "table" {
            let rel = self.operator.table.as_ref().ok_or_else(|| {
                difflow::Error::Config("operator `table` needs a `table` path".into())
            })?;
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|e| {
                difflow::Error::Config(format!("cannot read symbol table {}: {e}", path.display()))
            })?;
            let name = rel.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
            Symbol::from_table_str(name, &text)
        } else {
            let param = match self.operator.name.as_str() {
                "lambda2s" => self.operator.s,
                "frac" => self.operator.r,
                _ => None,
            };
            Symbol::by_name(&self.operator.name, param)
        }
    }

    pub fn grid(&self) -> Result<GridSpec, difflow::Error> {
        GridSpec::new(self.grid.n_points)
    }

    pub fn initial_field(&self) -> Result<Field, difflow::Error> {
        let grid = self.grid()?;
        let mut field = match self.initial.preset.as_deref() {
            None | Some("zero") => Field::zero(grid),
            Some("ch-reference") => {
                &Field::harmonic_cos(grid, 1, 0.2) + &Field::harmonic_sin(grid, 2, 0.1)
            }
            Some(other) => {
                return Err(difflow::Error::Config(format!(
                    "unknown initial preset `{other}`"
                )))
            }
        };
        if let Some(mean) = self.initial.mean {
            field = &field + &Field::constant(grid, mean);
        }
        for (k, amp) in self.initial.cos.iter().flatten() {
            field = &field + &Field::harmonic_cos(grid, *k, *amp);
        }
        for (k, amp) in self.initial.sin.iter().flatten() {
            field = &field + &Field::harmonic_sin(grid, *k, *amp);
        }
        if let Some(modes) = &self.initial.modes {
            let pairs: Vec<_> = modes
                .iter()
                .map(|m| (m.k, num_complex::Complex::new(m.re, m.im)))
                .collect();
            field = &field + &Field::from_modes(grid, &pairs)?;
        }
        Ok(field)
    }

    pub fn constraint(&self) -> Result<Option<Constraint<f64>>, difflow::Error> {
        let Some(section) = &self.constraint else {
            return Ok(None);
        };
        let c = match (section.kind.as_str(), &section.points) {
            ("fix1", None) => Constraint::fix1_default(),
            ("fix1", Some(p)) if p.len() == 1 => Constraint::fix1(p[0])?,
            ("fix3", None) => Constraint::fix3_default(),
            ("fix3", Some(p)) if p.len() == 3 => Constraint::fix3([p[0], p[1], p[2]])?,
            (kind, points) => {
                return Err(difflow::Error::Config(format!(
                    "constraint kind `{kind}` with points {points:?} is not valid"
                )))
            }
        };
        Ok(Some(c))
    }

    pub fn integrator_config(&self) -> IntegratorConfig<f64> {
        IntegratorConfig::new(self.integrator.dt, self.integrator.t_end)
            .with_stride(self.integrator.snapshot_stride)
            .with_adaptive(self.integrator.adaptive)
    }

    pub fn shooting_params(&self) -> ShootingParams<f64> {
        ShootingParams {
            dt: self.shooting.dt,
            tol: self.shooting.tol,
            max_iter: self.shooting.max_iter,
            fd_step: self.shooting.fd_step,
            basis_limit: self.shooting.basis_limit,
            ..ShootingParams::default()
        }
    }
}
