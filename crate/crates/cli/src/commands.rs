use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use tc_core::floquet::{compare_effective, stroboscopic_run, DtcProtocol};
use tc_core::hamiltonians::{
    build_dtc_effective, build_field_perturbation, build_ghz_projector, build_hj, build_ising_ring,
    build_nn_perturbation, build_xy_string, Axis,
};
use tc_core::hilbert::{expectation, make_ghz, order_parameter, GhzSign, StateVector};
use tc_core::linalg::{mat_vec, max_abs_diff};
use tc_core::pauli::{pauli_decompose, OperatorSum};
use tc_core::spectral::{
    diagonalize, gs_degeneracy, lehmann_mixed_gs, lehmann_thermal, lehmann_zero_t, mz_operator,
    power_spectrum, LehmannSeries, SpectralDecomposition, TimeGrid, HARMONIC_MERGE_TOL,
};
use tc_core::{DenseMatrix, Error as CoreError, C64};

use crate::config::{Ensemble, InitialState, Model, Override, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Corr,
    Stability,
    Dtc,
    Decompose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Corr => "corr",
            Command::Stability => "stability",
            Command::Dtc => "dtc",
            Command::Decompose => "decompose",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub config_file: Option<String>,
    pub overrides: Vec<Override>,
    pub wall_time_s: f64,
    /// Files written into the output directory, excluding the manifest.
    pub files: Vec<String>,
    pub scalars: Value,
}

struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, content).map_err(|source| CliError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.put(name, &text)
    }
}

/// Dense matrix of the selected model.
pub fn build_model(model: Model, n: usize, coupling: f64) -> Result<DenseMatrix> {
    let sum = |op: tc_core::Result<OperatorSum>| -> Result<DenseMatrix> { Ok(op?.to_dense()?) };
    match model {
        Model::GhzProj => Ok(build_ghz_projector(n)?),
        Model::XyString => sum(build_xy_string(n, coupling)),
        Model::Hj => sum(build_hj(n, coupling)),
        Model::Ising => sum(build_ising_ring(n)),
        Model::DtcEff => sum(build_dtc_effective(n)),
    }
}

fn diagonalized(cfg: &RunConfig) -> Result<(DenseMatrix, SpectralDecomposition, f64)> {
    let h = build_model(cfg.require_model()?, cfg.n, cfg.coupling)?;
    let sd = diagonalize(h.as_ref())?;
    let tol = cfg
        .degeneracy_tol
        .unwrap_or_else(|| sd.default_degeneracy_tol());
    Ok((h, sd, tol))
}

fn energy(h: &DenseMatrix, s: &StateVector) -> f64 {
    let hs = mat_vec(h.as_ref(), s.amplitudes());
    s.amplitudes()
        .iter()
        .zip(&hs)
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        .re
}

/// Runs one command and writes its artifacts plus `manifest.json`.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<RunManifest> {
    let start = Instant::now();
    let mut out = OutputDir::create(&cfg.out)?;
    let scalars = match command {
        Command::Spectrum => spectrum(cfg, &mut out)?,
        Command::Corr => corr(cfg, &mut out)?,
        Command::Stability => stability(cfg, &mut out)?,
        Command::Dtc => dtc(cfg, &mut out)?,
        Command::Decompose => decompose(cfg, &mut out)?,
    };
    out.put_json("scalars.json", &scalars)?;
    let manifest = RunManifest {
        command: command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.resolved.clone(),
        config_file: cfg.source.as_ref().map(|p| p.display().to_string()),
        overrides: cfg.overrides.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        files: out.files.clone(),
        scalars,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let path = cfg.out.join("manifest.json");
    std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
    Ok(manifest)
}

fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let (h, sd, tol) = diagonalized(cfg)?;
    let ev = sd.eigenvalues();
    let degeneracy = gs_degeneracy(&sd, tol);
    let gap = ev.get(degeneracy).map(|e| e - ev[0]);

    let mut csv = String::from("index,energy\n");
    for (k, e) in ev.iter().enumerate() {
        let _ = writeln!(csv, "{k},{e:.16e}");
    }
    out.put("eigenvalues.csv", &csv)?;
    out.put("ground_state.csv", &sd.ground_state().to_csv())?;

    let plus = energy(&h, &make_ghz(GhzSign::Plus, cfg.n)?);
    let minus = energy(&h, &make_ghz(GhzSign::Minus, cfg.n)?);
    // averaged over the ground manifold, so it does not depend on the basis
    let order = (0..degeneracy)
        .map(|k| StateVector::normalized(cfg.n, sd.eigenvector(k)).map(|s| order_parameter(&s)))
        .sum::<tc_core::Result<f64>>()?
        / degeneracy as f64;

    Ok(json!({
        "gs_energy": ev[0],
        "gap": gap,
        "gs_degeneracy": degeneracy,
        "nondegenerate": degeneracy == 1,
        "degeneracy_tol": tol,
        "energy_ghz_plus": plus,
        "energy_ghz_minus": minus,
        "ghz_splitting": (plus - minus).abs(),
        "order_parameter": order,
    }))
}

fn lehmann_for(cfg: &RunConfig, sd: &SpectralDecomposition, tol: f64) -> Result<LehmannSeries> {
    Ok(match cfg.ensemble {
        Ensemble::Pure => {
            let degeneracy = gs_degeneracy(sd, tol);
            if degeneracy > 1 {
                return Err(CoreError::DegenerateGroundState { degeneracy }.into());
            }
            lehmann_zero_t(sd, &mz_operator(cfg.n)?)?
        }
        Ensemble::Mixed => lehmann_mixed_gs(sd, tol),
        Ensemble::Thermal => lehmann_thermal(sd, cfg.beta)?,
    })
}

fn corr(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let (_, sd, tol) = diagonalized(cfg)?;
    let series = lehmann_for(cfg, &sd, tol)?;
    let grid = TimeGrid::new(cfg.t0, cfg.dt, cfg.count)?;
    let samples = series.sample(&grid);
    let spectrum = power_spectrum(&samples)?;
    out.put("series.csv", &samples.to_csv())?;
    out.put("spectrum.csv", &spectrum.to_csv())?;

    let mut lines = String::from("omega,weight_re,weight_im\n");
    for line in series.harmonics(HARMONIC_MERGE_TOL) {
        let _ = writeln!(
            lines,
            "{:.16e},{:.16e},{:.16e}",
            line.omega, line.weight.re, line.weight.im
        );
    }
    out.put("harmonics.csv", &lines)?;

    let f0 = series.eval(0.0);
    let total = series.total_weight();
    Ok(json!({
        "f0_re": f0.re,
        "f0_im": f0.im,
        "total_weight": total.re,
        // a tone e^{-iωt} shows up in the bin at -ω
        "dominant_frequency": -spectrum.omegas[spectrum.peak_bin()],
        "frequency_resolution": 2.0 * std::f64::consts::PI / (cfg.count as f64 * cfg.dt),
        "harmonic_count": series.count_harmonics(cfg.weight_tol),
        "spectral_peaks": spectrum.count_peaks(cfg.peak_rel),
        "total_power": spectrum.total_power(),
    }))
}

fn stability(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let (_, sd, tol) = diagonalized(cfg)?;
    let degeneracy = gs_degeneracy(&sd, tol);
    if degeneracy > 1 {
        return Err(CoreError::DegenerateGroundState { degeneracy }.into());
    }
    let n = cfg.n;
    let gs = sd.ground_state();
    let plus = make_ghz(GhzSign::Plus, n)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut perturbations: Vec<(String, OperatorSum)> = Vec::new();
    for r in 0..cfg.samples {
        let fields: Vec<[f64; 3]> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect();
        perturbations.push((format!("field,{r}"), build_field_perturbation(n, &fields)?));
    }
    if cfg.samples > 0 {
        perturbations.push(("nn-x,0".into(), build_nn_perturbation(n, Axis::X)?));
        perturbations.push(("nn-y,0".into(), build_nn_perturbation(n, Axis::Y)?));
    }

    let mut csv = String::from("kind,index,gs_expectation,ghz_plus_expectation\n");
    let mut max_gs: Option<f64> = None;
    let mut max_ghz: Option<f64> = None;
    for (label, op) in &perturbations {
        let a = expectation(op, &gs)?.norm();
        let b = expectation(op, &plus)?.norm();
        let _ = writeln!(csv, "{label},{a:.16e},{b:.16e}");
        max_gs = Some(max_gs.map_or(a, |m| m.max(a)));
        max_ghz = Some(max_ghz.map_or(b, |m| m.max(b)));
    }
    out.put("stability.csv", &csv)?;

    let within = |m: Option<f64>| m.is_none_or(|m| m <= cfg.stability_tol);
    Ok(json!({
        "seed": cfg.seed,
        "samples": cfg.samples,
        "perturbations": perturbations.len(),
        "max_gs_expectation": max_gs,
        "max_ghz_plus_expectation": max_ghz,
        "within_tolerance": within(max_gs) && within(max_ghz),
    }))
}

fn dtc(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let n = cfg.n;
    let comparable = n % 2 == 1 && (3..=11).contains(&n);
    let compare = match cfg.compare {
        None => comparable,
        Some(true) if !comparable => {
            return Err(CliError::InvalidValue {
                key: "compare".into(),
                message: format!(
                    "the effective Hamiltonian comparison needs odd n in 3..=11, got n = {n}"
                ),
            })
        }
        Some(flag) => flag,
    };
    let phi = cfg.phi.resolve(n);
    let protocol = DtcProtocol::uniform(n, phi)?;
    let s0 = match cfg.state {
        InitialState::AllUp => StateVector::all_up(n)?,
        InitialState::GhzPlus => make_ghz(GhzSign::Plus, n)?,
        InitialState::GhzMinus => make_ghz(GhzSign::Minus, n)?,
    };
    let mut mz = vec![tc_core::hilbert::mz_expectation(&s0)];
    mz.extend(stroboscopic_run(&protocol, &s0, cfg.steps)?);

    let mut csv = String::from("step,mz\n");
    for (k, m) in mz.iter().enumerate() {
        let _ = writeln!(csv, "{k},{m:.16e}");
    }
    out.put("magnetization.csv", &csv)?;

    let mut scalars = json!({
        "phi": phi,
        "steps": cfg.steps,
        "final_mz": mz[mz.len() - 1],
        "alternating": mz.windows(2).all(|w| w[0] * w[1] < 0.0),
    });
    if compare {
        let report = compare_effective(n)?;
        out.put_json("compare.json", &report)?;
        scalars["compare_max_deviation"] = json!(report.max_deviation);
        scalars["compare_criterion"] = json!(report.criterion);
        scalars["ground_state"] = json!(report.ground_state);
        scalars["ghz_splitting"] = json!(report.ghz_splitting);
    }
    Ok(scalars)
}

fn decompose(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let h = build_model(cfg.require_model()?, cfg.n, cfg.coupling)?;
    let sum = pauli_decompose(h.as_ref(), cfg.n)?;
    let back = sum.to_dense()?;

    let mut csv = String::from("coefficient_re,coefficient_im,word\n");
    for (c, p) in sum.terms() {
        let _ = writeln!(csv, "{:.16e},{:.16e},{}", c.re, c.im, p.word());
    }
    out.put("terms.csv", &csv)?;

    Ok(json!({
        "term_count": sum.len(),
        "hermitian": sum.is_hermitian(),
        "reconstruction_error": max_abs_diff(back.as_ref(), h.as_ref()),
    }))
}
