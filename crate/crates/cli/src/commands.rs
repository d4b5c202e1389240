//! The five subcommands. Each resolves its parameters, runs, and returns the
//! files it wrote together with the scientific verdict.

use crate::config::{DatumSpec, Profile, RunConfig};
use crate::datum::load_datum;
use crate::output::{write_csv, write_json};
use crate::CliError;
use cone_schrodinger::bessel::{self, asymptotic, BesselRegime};
use cone_schrodinger::cutoff::BumpKind;
use cone_schrodinger::estimates::{
    dyadic_scan, estimate_spec, generators, scan, strichartz_ratio_with, EstimateParams, SamplingOptions, ScanSetup,
    StrichartzMethod,
};
use cone_schrodinger::hankel;
use cone_schrodinger::propagator;
use cone_schrodinger::{build_spectrum, make_grid, GridKind, ModeField};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Files written and whether the scientific check held.
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BesselTableParams {
    pub nu: Vec<f64>,
    pub r: Vec<f64>,
    /// Terms kept in the large-argument expansion.
    pub order: usize,
    /// Forces one registered method instead of the regime dispatch.
    pub method: Option<String>,
    /// Largest accepted disagreement with Miller's recurrence.
    pub tolerance: f64,
}

impl Default for BesselTableParams {
    fn default() -> Self {
        BesselTableParams {
            nu: vec![0.0, 0.5, 1.0, 5.5, 10.0],
            r: vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 400.0],
            order: asymptotic::DEFAULT_ORDER,
            method: None,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Serialize)]
struct BesselRow<'a> {
    nu: f64,
    r: f64,
    j: f64,
    regime: &'a str,
    method: &'a str,
    defect: f64,
}

pub fn bessel_table(p: &BesselTableParams, out: &Path) -> Result<Outcome, CliError> {
    if p.order == 0 {
        return Err(CliError::Config("order must be at least 1".into()));
    }
    let forced = match &p.method {
        Some(name) => Some(bessel::methods().get(name)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(p.nu.len() * p.r.len());
    let mut passed = true;
    for &nu in &p.nu {
        for &r in &p.r {
            let (method, j) = match &forced {
                Some(m) if m.name() == "asymptotic" => (m.name(), bessel::eval_asymptotic(nu, r, p.order)?),
                Some(m) => (m.name(), m.eval(nu, r)?),
                None => {
                    let name = bessel::dispatch_method(nu, r);
                    let j = if name == "asymptotic" {
                        bessel::eval_asymptotic(nu, r, p.order)?
                    } else {
                        bessel::eval(nu, r)?
                    };
                    (name, j)
                }
            };
            let reference = bessel::eval_recurrence(nu, r)?;
            let defect = (j - reference).abs();
            passed &= defect <= p.tolerance;
            rows.push(BesselRow {
                nu,
                r,
                j,
                regime: BesselRegime::classify(nu, r).as_str(),
                method,
                defect,
            });
        }
    }
    let path = out.join("bessel_table.csv");
    write_csv(&path, &rows)?;
    Ok(Outcome {
        outputs: vec![path],
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestParams {
    pub r_max: f64,
    pub count: usize,
    pub r_min: f64,
    pub tolerance: f64,
    pub diagonalization_tolerance: f64,
}

impl Default for SelftestParams {
    fn default() -> Self {
        SelftestParams {
            r_max: 30.0,
            count: 4096,
            r_min: 1e-5,
            tolerance: 1e-6,
            diagonalization_tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Serialize)]
struct DefectRow {
    nu: f64,
    center: f64,
    width: f64,
    involution: f64,
    isometry: f64,
    self_adjoint: f64,
    diagonalization: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct DefectSummary {
    rows: usize,
    max_involution: f64,
    max_isometry: f64,
    max_self_adjoint: f64,
    max_diagonalization: f64,
    passed: bool,
}

pub fn hankel_selftest(p: &SelftestParams, out: &Path) -> Result<Outcome, CliError> {
    let grid = make_grid(2, p.r_max, p.count, GridKind::LogUniform { r_min: p.r_min })?;
    let rows: Vec<DefectRow> = hankel::selftest(&grid)?
        .into_iter()
        .map(|(idx, d)| {
            let (center, width) = hankel::BATTERY_PROFILES[idx];
            DefectRow {
                nu: d.nu,
                center,
                width,
                involution: d.involution,
                isometry: d.isometry,
                self_adjoint: d.self_adjoint,
                diagonalization: d.diagonalization,
                passed: d.involution <= p.tolerance
                    && d.isometry <= p.tolerance
                    && d.self_adjoint <= p.tolerance
                    && d.diagonalization <= p.diagonalization_tolerance,
            }
        })
        .collect();
    let max = |f: fn(&DefectRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let summary = DefectSummary {
        rows: rows.len(),
        max_involution: max(|r| r.involution),
        max_isometry: max(|r| r.isometry),
        max_self_adjoint: max(|r| r.self_adjoint),
        max_diagonalization: max(|r| r.diagonalization),
        passed: rows.iter().all(|r| r.passed),
    };
    let csv = out.join("hankel_selftest.csv");
    let json = out.join("hankel_selftest_summary.json");
    write_csv(&csv, &rows)?;
    write_json(&json, &summary)?;
    // Defects above tolerance are a numerical failure, not a scientific one.
    if !summary.passed {
        return Err(CliError::Numerical(format!(
            "Hankel defects above tolerance (involution {:e}, isometry {:e}, self-adjoint {:e}, diagonalization {:e})",
            summary.max_involution, summary.max_isometry, summary.max_self_adjoint, summary.max_diagonalization
        )));
    }
    Ok(Outcome {
        outputs: vec![csv, json],
        passed: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveParams {
    pub times: Vec<f64>,
    /// Upper end of the spectral grid.
    pub rho_max: f64,
    /// Dyadic frequency center; no localization when absent.
    pub localize: Option<f64>,
    /// Write the solution profiles as well as the masses.
    pub snapshots: bool,
    /// Largest accepted relative mass drift.
    pub mass_tolerance: f64,
}

impl Default for EvolveParams {
    fn default() -> Self {
        EvolveParams {
            times: vec![0.0, 0.5, 1.0, 2.0],
            rho_max: 12.0,
            localize: None,
            snapshots: true,
            mass_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Serialize)]
struct MassRow {
    t: f64,
    mass: f64,
    relative_defect: f64,
}

#[derive(Debug, Serialize)]
struct SnapshotRow {
    t: f64,
    entry: usize,
    ell: u32,
    nu: f64,
    r: f64,
    re: f64,
    im: f64,
}

pub fn default_evolve_datum() -> DatumSpec {
    DatumSpec::radial(Profile::Gaussian { center: 8.0, width: 1.0 })
}

pub fn evolve(cfg: &RunConfig, p: &EvolveParams, out: &Path) -> Result<Outcome, CliError> {
    if p.times.is_empty() {
        return Err(CliError::Config("evolve needs at least one time".into()));
    }
    let table = Arc::new(build_spectrum(&cfg.cone.model()?, cfg.cone.k)?);
    let grid = Arc::new(make_grid(cfg.cone.n, cfg.grid.r_max, cfg.grid.count, cfg.grid.kind())?);
    let datum = cfg.datum.clone().unwrap_or_else(default_evolve_datum);
    let u0 = load_datum(&datum, table, grid.clone())?;
    let rho_min = match grid.kind {
        GridKind::LogUniform { r_min } => r_min,
        GridKind::Uniform => {
            return Err(CliError::Config("evolve needs a log_uniform grid".into()));
        }
    };
    let spec_grid = Arc::new(propagator::spectral_grid_for(&grid, rho_min, p.rho_max)?);
    let mut b = propagator::distorted_fourier(&u0, &spec_grid)?;
    if let Some(n) = p.localize {
        b = propagator::frequency_localize(&b, n, BumpKind::Partition)?;
    }
    let reference = b.mass();
    let sol = propagator::sample_solution(&b, &p.times, &grid)?;
    let masses: Vec<MassRow> = sol
        .times
        .iter()
        .zip(&sol.masses)
        .map(|(&t, &m)| MassRow {
            t,
            mass: m,
            relative_defect: (m - reference).abs() / reference.max(f64::MIN_POSITIVE),
        })
        .collect();
    let mass_path = out.join("evolve_mass.csv");
    write_csv(&mass_path, &masses)?;
    let mut outputs = vec![mass_path];
    if p.snapshots {
        let mut rows = Vec::new();
        for (&t, u) in sol.times.iter().zip(&sol.fields) {
            push_snapshot(&mut rows, t, u);
        }
        let path = out.join("evolve_field.csv");
        write_csv(&path, &rows)?;
        outputs.push(path);
    }
    let defect = sol.mass_defect(reference);
    if defect > p.mass_tolerance {
        return Err(CliError::Numerical(format!(
            "mass drifted by {defect:e} (tolerance {:e})",
            p.mass_tolerance
        )));
    }
    Ok(Outcome { outputs, passed: true })
}

fn push_snapshot(rows: &mut Vec<SnapshotRow>, t: f64, u: &ModeField) {
    for m in u.active_modes() {
        let idx = u.modes[m];
        let nu = u.nu_of(m);
        for (r, c) in u.grid.nodes.iter().zip(&u.data[m]) {
            rows.push(SnapshotRow {
                t,
                entry: idx.entry,
                ell: idx.ell,
                nu,
                r: *r,
                re: c.re,
                im: c.im,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanLocalizedParams {
    pub estimate: String,
    pub rmin: f64,
    pub rmax: f64,
    pub trials: usize,
    pub generator: String,
    /// Coefficients vanish above this order.
    pub band: f64,
    /// Exponent for E34 and E35.
    pub p: Option<f64>,
    /// Slack exponent for E36.
    pub epsilon: f64,
    pub resolution: f64,
}

impl Default for ScanLocalizedParams {
    fn default() -> Self {
        ScanLocalizedParams {
            estimate: "E31".into(),
            rmin: 1.0,
            rmax: 1024.0,
            trials: 20,
            generator: "gaussian".into(),
            band: 8.0,
            p: None,
            epsilon: 0.1,
            resolution: 1.0,
        }
    }
}

fn dyadic_exponent(v: f64, what: &str) -> Result<i32, CliError> {
    let e = v.log2();
    if !(v > 0.0) || e.fract() != 0.0 {
        return Err(CliError::Config(format!("{what} must be a power of two; got {v}")));
    }
    Ok(e as i32)
}

fn sampling(resolution: f64) -> Result<SamplingOptions, CliError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(CliError::Config(format!("resolution must be positive; got {resolution}")));
    }
    Ok(SamplingOptions {
        resolution,
        ..SamplingOptions::default()
    })
}

pub fn scan_localized(cfg: &RunConfig, p: &ScanLocalizedParams, seed: u64, out: &Path) -> Result<Outcome, CliError> {
    let model = cfg.cone.model()?;
    let params = EstimateParams {
        p: p.p,
        epsilon: p.epsilon,
    };
    let spec = estimate_spec(&p.estimate, model.n, &params)?;
    generators().get(&p.generator)?;
    let mut setup = ScanSetup::new(model, seed);
    setup.k_max = cfg.cone.k;
    setup.band = p.band;
    setup.generator = p.generator.clone();
    setup.trials = p.trials;
    setup.r_exponents = (dyadic_exponent(p.rmin, "rmin")?, dyadic_exponent(p.rmax, "rmax")?);
    setup.sampling = sampling(p.resolution)?;
    let report = dyadic_scan(&spec, &setup)?;
    let csv = out.join("scan_localized.csv");
    let json = out.join("scan_localized_summary.json");
    write_csv(&csv, &report.rows)?;
    write_json(&json, &report)?;
    Ok(Outcome {
        outputs: vec![csv, json],
        passed: report.passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanStrichartzParams {
    /// Time-space exponent; 2 + 4/n when absent.
    pub q: Option<f64>,
    pub nmin: f64,
    pub nmax: f64,
    /// The datum is u0(σ·).
    pub sigma: f64,
    /// "annuli" or "lens"; chosen from q when absent.
    pub method: Option<String>,
    /// Largest accepted max/min ratio over N.
    pub band_factor: f64,
    pub resolution: f64,
}

impl Default for ScanStrichartzParams {
    fn default() -> Self {
        ScanStrichartzParams {
            q: None,
            nmin: 1.0,
            nmax: 64.0,
            sigma: 1.0,
            method: None,
            band_factor: 1.5,
            resolution: 1.0,
        }
    }
}

#[derive(Debug, Serialize)]
struct StrichartzRow {
    n: f64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    method: StrichartzMethod,
    split_time: Option<f64>,
}

#[derive(Debug, Serialize)]
struct StrichartzSummary {
    q: f64,
    max_ratio: f64,
    min_ratio: f64,
    band: f64,
    band_factor: f64,
    slope: f64,
    passed: bool,
}

/// Unit bump on [1, 2].
pub fn default_strichartz_datum() -> DatumSpec {
    DatumSpec::radial(Profile::Bump { center: 1.5, width: 0.5 })
}

fn dilate(spec: &DatumSpec, sigma: f64) -> Result<DatumSpec, CliError> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(CliError::Config(format!("sigma must be positive; got {sigma}")));
    }
    let profile = match &spec.profile {
        Profile::Gaussian { center, width } => Profile::Gaussian {
            center: center / sigma,
            width: width / sigma,
        },
        Profile::Bump { center, width } => Profile::Bump {
            center: center / sigma,
            width: width / sigma,
        },
        Profile::Csv { .. } if sigma == 1.0 => spec.profile.clone(),
        Profile::Csv { .. } => return Err(CliError::Config("sigma != 1 needs a named datum profile".into())),
    };
    Ok(DatumSpec {
        profile,
        modes: spec.modes.clone(),
    })
}

pub fn scan_strichartz(cfg: &RunConfig, p: &ScanStrichartzParams, out: &Path) -> Result<Outcome, CliError> {
    let model = cfg.cone.model()?;
    let q = p.q.unwrap_or(2.0 + 4.0 / model.n as f64);
    let method = match p.method.as_deref() {
        None => None,
        Some("annuli") => Some(StrichartzMethod::Annuli),
        Some("lens") => Some(StrichartzMethod::Lens),
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown Strichartz method '{other}' (available: annuli, lens)"
            )))
        }
    };
    let (lo, hi) = (dyadic_exponent(p.nmin, "nmin")?, dyadic_exponent(p.nmax, "nmax")?);
    if lo > hi {
        return Err(CliError::Config(format!("empty N range {}..{}", p.nmin, p.nmax)));
    }
    let table = Arc::new(build_spectrum(&model, cfg.cone.k)?);
    let grid = Arc::new(make_grid(model.n, cfg.grid.r_max, cfg.grid.count, cfg.grid.kind())?);
    let datum = dilate(&cfg.datum.clone().unwrap_or_else(default_strichartz_datum), p.sigma)?;
    let u0 = load_datum(&datum, table, grid)?;
    let opts = sampling(p.resolution)?;
    let mut rows = Vec::new();
    for k in lo..=hi {
        let n = (k as f64).exp2();
        let res = strichartz_ratio_with(&u0, q, n, &opts, method)?;
        rows.push(StrichartzRow {
            n,
            lhs: res.lhs,
            rhs: res.rhs,
            ratio: res.ratio,
            method: res.method,
            split_time: res.split_time,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let band = max_ratio / min_ratio;
    let x: Vec<f64> = rows.iter().map(|r| r.n.log2()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio.log2()).collect();
    let summary = StrichartzSummary {
        q,
        max_ratio,
        min_ratio,
        band,
        band_factor: p.band_factor,
        slope: scan::trend(&x, &y).0,
        passed: band <= p.band_factor,
    };
    let csv = out.join("scan_strichartz.csv");
    let json = out.join("scan_strichartz_summary.json");
    write_csv(&csv, &rows)?;
    write_json(&json, &summary)?;
    Ok(Outcome {
        outputs: vec![csv, json],
        passed: summary.passed,
    })
}
