//! `difflow`: scenario-driven simulations and verification suites for
//! geodesic flows of Fourier-multiplier metrics on the circle.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 dynamical failure (blow-up or shooting non-convergence).

mod io;
mod scenario;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use difflow::diffeo::Diffeo;
use difflow::expmap::{exp_id, log_map};
use difflow::geodesic::{
    diagnostics_with_reference, integrate_lagrangian, GeodesicState, Trajectory,
};
use difflow::homogeneous::{constraint_drift, integrate_constrained};
use difflow::verify;
use difflow::{Error, Field};

use io::{
    read_json, write_diagnostics_csv, write_diffeo_csv, write_field_csv, write_json,
    write_snapshot_csv, BlowupReportEntry, CoeffTable, DiagnosticsRow, DiffeoSidecar, DriftSummary,
    FieldSidecar, RunReport, SnapshotSidecar, CONVENTION_NOTE,
};
use scenario::Scenario;

const EXIT_VERIFICATION: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_DYNAMICS: i32 = 3;

#[derive(Parser)]
#[command(name = "difflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArg {
    /// Output directory (default: $DIFFLOW_OUT or ./difflow-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArg {
    fn resolve(&self) -> anyhow::Result<PathBuf> {
        let dir = self
            .out
            .clone()
            .or_else(|| std::env::var_os("DIFFLOW_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("difflow-out"));
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write snapshots, diagnostics and a report.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Run the growth and derivative checks on the scenario's operator.
    CheckSymbol {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        out: OutputArg,
        /// Highest derivative order scanned.
        #[arg(long)]
        nmax: Option<usize>,
        /// Scan radius on the real line.
        #[arg(long)]
        ximax: Option<f64>,
    },
    /// Run verification suites.
    Verify {
        /// Suite selector (see `--suite help` for names).
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed echoed into the report.
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Exponential map: integrate the scenario's initial velocity to t = 1.
    Expmap {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Log map: shoot for the velocity whose exponential hits the target.
    Logmap {
        #[arg(long)]
        scenario: PathBuf,
        /// Diffeo sidecar JSON written by `expmap` (exact coefficients).
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate { scenario, out } => cmd_simulate(&scenario, &out),
        Command::CheckSymbol {
            scenario,
            out,
            nmax,
            ximax,
        } => cmd_check_symbol(&scenario, &out, nmax, ximax),
        Command::Verify { suite, seed, out } => cmd_verify(&suite, seed, &out),
        Command::Expmap { scenario, out } => cmd_expmap(&scenario, &out),
        Command::Logmap {
            scenario,
            target,
            out,
        } => cmd_logmap(&scenario, &target, &out),
    };
    std::process::exit(code);
}

fn config_failure(err: &dyn std::fmt::Display) -> i32 {
    eprintln!("error: {err}");
    EXIT_CONFIG
}

/// Classify a library error into the exit-code contract.
fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::OutsideDomain { .. }
        | Error::OutsideNormalNeighborhood { .. }
        | Error::NotADiffeomorphism { .. }
        | Error::ConstraintDrift { .. } => EXIT_DYNAMICS,
        _ => EXIT_CONFIG,
    }
}

fn cmd_simulate(scenario_path: &Path, out: &OutputArg) -> i32 {
    let started = Instant::now();
    let (scenario, _base) = match Scenario::load(scenario_path) {
        Ok(v) => v,
        Err(e) => return config_failure(&e),
    };
    let dir = match out.resolve() {
        Ok(d) => d,
        Err(e) => return config_failure(&e),
    };
    let setup = (|| -> Result<_, Error> {
        let symbol = scenario.symbol(_base.as_path())?;
        let grid = scenario.grid()?;
        let u0 = scenario.initial_field()?;
        let constraint = scenario.constraint()?;
        Ok((symbol, grid, u0, constraint))
    })();
    let (symbol, grid, u0, constraint) = match setup {
        Ok(v) => v,
        Err(e) => return config_failure(&e),
    };
    let config = scenario.integrator_config();

    let trajectory: Result<Trajectory<GeodesicState<f64>, f64>, Error> = match &constraint {
        Some(c) => integrate_constrained(&symbol, c, &u0, &config),
        None => {
            let state0 = GeodesicState::new(Diffeo::identity(grid), u0.clone(), 0.0);
            integrate_lagrangian(&symbol, &state0, &config)
        }
    };
    let trajectory = match trajectory {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };

    // diagnostics and snapshots at the recorded states
    let mut rows: Vec<DiagnosticsRow> = Vec::new();
    let mut drift = DriftSummary::default();
    let mut reference: Option<(f64, Field, f64)> = None; // (energy0, noether0, mu0)
    for (index, state) in trajectory.states.iter().enumerate() {
        let diag =
            match diagnostics_with_reference(&symbol, state, reference.as_ref().map(|(_, n, _)| n))
            {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: diagnostics failed: {e}");
                    return exit_code_for(&e);
                }
            };
        let (e0, _, mu0) = reference
            .get_or_insert_with(|| (diag.energy, diag.noether_field.clone(), diag.mean_momentum));
        let energy_drift = if *e0 != 0.0 {
            ((diag.energy - *e0) / *e0).abs()
        } else {
            diag.energy.abs()
        };
        let mu_drift = (diag.mean_momentum - *mu0).abs();
        let c_drift = match &constraint {
            Some(c) => constraint_drift(state, c).unwrap_or(f64::NAN),
            None => 0.0,
        };
        drift.energy_rel = drift.energy_rel.max(energy_drift);
        drift.noether_sup = drift.noether_sup.max(diag.noether_drift);
        drift.mu_abs = drift.mu_abs.max(mu_drift);
        drift.constraint_sup = drift.constraint_sup.max(c_drift);
        rows.push(DiagnosticsRow {
            t: state.t,
            energy: diag.energy,
            energy_drift,
            noether_drift: diag.noether_drift,
            mean_momentum: diag.mean_momentum,
            mu_drift,
            constraint_drift: c_drift,
        });

        // snapshot: u = v . phi^{-1}, m = A u at the nodes
        let result = (|| -> Result<(), Error> {
            let u = state.eulerian_velocity()?;
            let m = symbol.apply(&u);
            let snap = SnapshotSidecar {
                time: state.t,
                n_points: grid.n_points(),
                operator: symbol.name().to_string(),
                convention: CONVENTION_NOTE.into(),
                u: CoeffTable::from_field(&u),
                displacement: CoeffTable::from_field(state.phi.displacement()),
                v: CoeffTable::from_field(&state.v),
                m: CoeffTable::from_field(&m),
            };
            let stem = format!("snap_{index:06}");
            write_snapshot_csv(
                &dir.join(format!("{stem}.csv")),
                grid,
                &u.grid_samples(),
                state.phi.phi_nodes(),
                &state.v.grid_samples(),
                &m.grid_samples(),
            )
            .map_err(|e| Error::Config(format!("write failed: {e}")))?;
            write_json(&dir.join(format!("{stem}.json")), &snap)
                .map_err(|e| Error::Config(format!("write failed: {e}")))?;
            Ok(())
        })();
        if let Err(e) = result {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    }
    if let Err(e) = write_diagnostics_csv(&dir.join("diagnostics.csv"), &rows) {
        return config_failure(&e);
    }
    let final_time = trajectory.states.last().map(|s| s.t).unwrap_or(0.0);
    let report = RunReport {
        scenario,
        final_time,
        blowup: trajectory.blowup.map(|b| BlowupReportEntry {
            time: b.time,
            reason: b.reason.to_string(),
        }),
        drift,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    if let Err(e) = write_json(&dir.join("report.json"), &report) {
        return config_failure(&e);
    }
    match &report.blowup {
        Some(b) => {
            eprintln!(
                "blow-up ({}) at t = {}; partial outputs in {}",
                b.reason,
                b.time,
                dir.display()
            );
            EXIT_DYNAMICS
        }
        None => {
            println!(
                "reached t = {final_time}; {} snapshots in {}",
                trajectory.states.len(),
                dir.display()
            );
            0
        }
    }
}

#[derive(serde::Serialize)]
struct SymbolCheckReport {
    operator: String,
    declared_order: f64,
    n_max: usize,
    xi_max: f64,
    h: f64,
    rows: Vec<SymbolCheckRow>,
    overall_pass: bool,
    kink_at_zero: bool,
    order_bound_constant: f64,
    order_bound_pass: bool,
}

#[derive(serde::Serialize)]
struct SymbolCheckRow {
    n: usize,
    sup_ratio: f64,
    pass: bool,
}

fn cmd_check_symbol(
    scenario_path: &Path,
    out: &OutputArg,
    nmax: Option<usize>,
    ximax: Option<f64>,
) -> i32 {
    let (scenario, base) = match Scenario::load(scenario_path) {
        Ok(v) => v,
        Err(e) => return config_failure(&e),
    };
    let symbol = match scenario.symbol(&base) {
        Ok(s) => s,
        Err(e) => return config_failure(&e),
    };
    let n_max = nmax.unwrap_or(scenario.symbol_check.n_max);
    let xi_max = ximax.unwrap_or(scenario.symbol_check.xi_max);
    let h = scenario.symbol_check.h;
    let report = match symbol.symbol_condition_check(n_max, xi_max, h) {
        Ok(r) => r,
        Err(e) => return config_failure(&e), // unsupported order etc.
    };
    let (c_est, order_pass) = symbol.order_bound_check(1024);
    let json = SymbolCheckReport {
        operator: symbol.name().into(),
        declared_order: symbol.order(),
        n_max,
        xi_max,
        h,
        rows: report
            .per_n
            .iter()
            .map(|r| SymbolCheckRow {
                n: r.n,
                sup_ratio: r.sup_ratio,
                pass: r.pass,
            })
            .collect(),
        overall_pass: report.overall_pass,
        kink_at_zero: report.kink_at_zero,
        order_bound_constant: c_est,
        order_bound_pass: order_pass,
    };
    let dir = match out.resolve() {
        Ok(d) => d,
        Err(e) => return config_failure(&e),
    };
    if let Err(e) = write_json(&dir.join("symbol_check.json"), &json) {
        return config_failure(&e);
    }
    for r in &json.rows {
        println!(
            "n = {}: sup ratio {:.6e} [{}]",
            r.n,
            r.sup_ratio,
            if r.pass { "stable" } else { "growing" }
        );
    }
    if json.kink_at_zero {
        println!("note: symbol extension has a kink at 0 (absolute continuity holds only a.e.)");
    }
    println!(
        "order bound: C = {:.6e} [{}]",
        json.order_bound_constant,
        if json.order_bound_pass {
            "stable"
        } else {
            "growing"
        }
    );
    if json.overall_pass && json.order_bound_pass {
        println!("symbol checks passed for {}", json.operator);
        0
    } else {
        eprintln!("symbol checks FAILED for {}", json.operator);
        EXIT_VERIFICATION
    }
}

fn cmd_verify(suite: &str, seed: u64, out: &OutputArg) -> i32 {
    let Some(reports) = verify::run_selector(suite, seed) else {
        eprintln!(
            "error: unknown suite `{suite}` (known: {})",
            verify::selectors().join(", ")
        );
        return EXIT_CONFIG;
    };
    let mut all_pass = true;
    for report in &reports {
        let verdict = if report.pass { "PASS" } else { "FAIL" };
        println!(
            "[{verdict}] {:<22} worst error {:9.3e}  ({:.2} s, seed {:#x})",
            report.name, report.worst_error, report.seconds, report.seed
        );
        for check in &report.checks {
            let mark = if check.pass { "ok " } else { "FAIL" };
            if check.bound.is_nan() {
                println!("    {mark}  {}", check.label);
            } else {
                println!(
                    "    {mark}  {}: {:9.3e} (bound {:9.3e})",
                    check.label, check.error, check.bound
                );
            }
        }
        if let Some(fail) = report.first_failure() {
            eprintln!("failing property: {} / {}", report.name, fail.label);
            all_pass = false;
        }
    }
    // machine-readable summary
    #[derive(serde::Serialize)]
    struct VerifyReport<'a> {
        seed: u64,
        suites: Vec<VerifySuite<'a>>,
    }
    #[derive(serde::Serialize)]
    struct VerifySuite<'a> {
        name: &'a str,
        pass: bool,
        worst_error: f64,
        seconds: f64,
        checks: Vec<VerifyCheck<'a>>,
    }
    #[derive(serde::Serialize)]
    struct VerifyCheck<'a> {
        label: &'a str,
        error: f64,
        bound: f64,
        pass: bool,
    }
    if let Ok(dir) = out.resolve() {
        let json = VerifyReport {
            seed,
            suites: reports
                .iter()
                .map(|r| VerifySuite {
                    name: r.name,
                    pass: r.pass,
                    worst_error: r.worst_error,
                    seconds: r.seconds,
                    checks: r
                        .checks
                        .iter()
                        .map(|c| VerifyCheck {
                            label: &c.label,
                            error: c.error,
                            bound: c.bound,
                            pass: c.pass,
                        })
                        .collect(),
                })
                .collect(),
        };
        let _ = write_json(&dir.join("verify.json"), &json);
    }
    if all_pass {
        0
    } else {
        EXIT_VERIFICATION
    }
}

fn cmd_expmap(scenario_path: &Path, out: &OutputArg) -> i32 {
    let (scenario, base) = match Scenario::load(scenario_path) {
        Ok(v) => v,
        Err(e) => return config_failure(&e),
    };
    let setup = (|| -> Result<_, Error> {
        let symbol = scenario.symbol(&base)?;
        let grid = scenario.grid()?;
        let v0 = scenario.initial_field()?;
        Ok((symbol, grid, v0))
    })();
    let (symbol, grid, v0) = match setup {
        Ok(v) => v,
        Err(e) => return config_failure(&e),
    };
    let phi = match exp_id(&symbol, &v0, scenario.shooting.dt) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let dir = match out.resolve() {
        Ok(d) => d,
        Err(e) => return config_failure(&e),
    };
    let sidecar = DiffeoSidecar {
        n_points: grid.n_points(),
        convention: CONVENTION_NOTE.into(),
        displacement: CoeffTable::from_field(phi.displacement()),
    };
    if let Err(e) = write_diffeo_csv(&dir.join("diffeo.csv"), grid, phi.phi_nodes())
        .and_then(|_| write_json(&dir.join("diffeo.json"), &sidecar))
    {
        return config_failure(&e);
    }
    println!("wrote {}", dir.join("diffeo.{csv,json}").display());
    0
}

fn cmd_logmap(scenario_path: &Path, target: &Path, out: &OutputArg) -> i32 {
    let (scenario, base) = match Scenario::load(scenario_path) {
        Ok(v) => v,
        Err(e) => return config_failure(&e),
    };
    let setup = (|| -> Result<_, Error> {
        let symbol = scenario.symbol(&base)?;
        let grid = scenario.grid()?;
        let v_init = scenario.initial_field()?;
        Ok((symbol, grid, v_init))
    })();
    let (symbol, grid, v_init) = match setup {
        Ok(v) => v,
        Err(e) => return config_failure(&e),
    };
    let sidecar: DiffeoSidecar = match read_json(target) {
        Ok(s) => s,
        Err(e) => return config_failure(&e),
    };
    if sidecar.n_points != grid.n_points() {
        return config_failure(&Error::Config(format!(
            "target has {} points, scenario grid has {}",
            sidecar.n_points,
            grid.n_points()
        )));
    }
    let phi = match sidecar
        .displacement
        .to_field(grid)
        .and_then(Diffeo::from_displacement)
    {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    let v = match log_map(&symbol, &phi, &v_init, &scenario.shooting_params()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let dir = match out.resolve() {
        Ok(d) => d,
        Err(e) => return config_failure(&e),
    };
    let sidecar = FieldSidecar {
        n_points: grid.n_points(),
        convention: CONVENTION_NOTE.into(),
        coefficients: CoeffTable::from_field(&v),
    };
    if let Err(e) = write_field_csv(&dir.join("field.csv"), grid, &v.grid_samples())
        .and_then(|_| write_json(&dir.join("field.json"), &sidecar))
    {
        return config_failure(&e);
    }
    println!("wrote {}", dir.join("field.{csv,json}").display());
    0
}
