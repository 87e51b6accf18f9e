// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::PathBuf;

use qutrit_noise::fitting::{fit_power_law, model_select_with, DepthDataset, Exponent, FitOptions, PowerLawFit};
use qutrit_noise::lindblad::{population_dynamics, rates_from_spectra, relaxation_rates, RateSet, StepControl};
use qutrit_noise::model::{transition_frequencies, DensityMatrix3, SpinCenterParams};
use qutrit_noise::montecarlo::{
    ensemble_variance, estimate_psd_with, fit_lorentzian, simulate_field_series, stochastic_average_evolution,
    variance_surface_integral, AveragingOptions, Dynamics, EnsembleSpec, FluctuatorEnsemble, OuFieldNoise, Source,
};
use qutrit_noise::noise::{DipoleSpectrum, Spectrum, SurfaceDipoleNoise, SurfacePointChargeNoise};
use qutrit_noise::par::Execution;
use qutrit_noise::pipeline::{noise_vs_depth, population_comparison, rates_sweep, DepthSources};

use crate::config::{
    build_spectra, nm, ns, per_cm2, positive, per_cm3, us, ConfigError, McVerifyConfig, NoiseSource, PopulationsConfig,
    RunConfig, SweepVariable,
};
use crate::output::{num, opt, plot_stub, Metadata, OutDir, Table};

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Numerical(String),
    Gate(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Gate(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Gate(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Sorts a core error: bad inputs are config errors, everything raised
/// while computing is numerical.
fn classify(e: qutrit_noise::Error) -> CliError {
    use qutrit_noise::Error as E;
    match e {
        E::InvalidParameter { .. } | E::InvalidState(_) | E::Parse { .. } => CliError::Config(e.to_string()),
        E::Io(io) => CliError::Io(io.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

type CliResult<T> = Result<T, CliError>;

pub struct Context {
    pub cfg: RunConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub fixed_step: bool,
    pub exec: Execution,
    pub out: OutDir,
    pub input: Option<PathBuf>,
}

impl Context {
    fn meta(&self, command: &'static str) -> Metadata {
        Metadata {
            command,
            config_sha256: self.config_sha256.clone(),
            seed: self.seed,
            step_mode: if self.fixed_step { "fixed" } else { "adaptive" },
        }
    }

    fn params(&self) -> CliResult<SpinCenterParams> {
        Ok(self.cfg.defect.params()?)
    }

    fn guard(&self) -> CliResult<f64> {
        let g = self.cfg.rates.unwrap_or_default().guard_mhz;
        if !(g.is_finite() && g >= 0.0) {
            return Err(ConfigError::new("rates.guard_mhz", "must be a non-negative number").into());
        }
        Ok(2.0 * PI * g * 1e6)
    }
}

fn default_noise() -> Vec<NoiseSource> {
    vec![NoiseSource::PointCharge { n_s_cm2: 1e11, tau_p_ns: 5.0 }]
}

fn noise_sources(ctx: &Context) -> Vec<NoiseSource> {
    if ctx.cfg.noise.is_empty() {
        default_noise()
    } else {
        ctx.cfg.noise.clone()
    }
}

fn rates_at(ctx: &Context, sources: &[NoiseSource], bz: f64) -> CliResult<RateSet> {
    let params = ctx.params()?;
    let geom = ctx.cfg.geometry.surface()?;
    let s = build_spectra(sources, &geom, bz)?;
    let freqs = transition_frequencies(&params, bz);
    rates_from_spectra(&*s.electric, &*s.magnetic, &freqs, &params, ctx.guard()?).map_err(classify)
}

pub fn populations(ctx: &Context) -> CliResult<()> {
    let pc = ctx.cfg.populations.unwrap_or(PopulationsConfig {
        gamma_per_s: Some(2e3),
        omega_plus_per_s: Some(2e3),
        omega_minus_per_s: Some(2e3),
        bz_t: None,
        initial_populations: [0.0, 0.0, 1.0],
        fixed_dt_us: None,
    });
    let rates = match (pc.gamma_per_s, pc.omega_plus_per_s, pc.omega_minus_per_s, pc.bz_t) {
        (Some(g), Some(p), Some(m), None) => {
            RateSet::from_relaxation(g, p, m).map_err(|e| ConfigError::new("populations", e.to_string()))?
        }
        (None, None, None, Some(bz)) => {
            if ctx.cfg.noise.is_empty() {
                return Err(ConfigError::new("populations.bz_t", "needs at least one [[noise]] source").into());
            }
            rates_at(ctx, &ctx.cfg.noise, bz)?
        }
        _ => {
            return Err(ConfigError::new(
                "populations",
                "set gamma_per_s, omega_plus_per_s and omega_minus_per_s together, or bz_t alone",
            )
            .into())
        }
    };
    let rho0 = DensityMatrix3::from_populations(pc.initial_populations)
        .map_err(|e| ConfigError::new("populations.initial_populations", e.to_string()))?;
    let sol = relaxation_rates(&rates);
    let t_grid = match ctx.cfg.sweep {
        Some(s) => s.grid_for(SweepVariable::Time)?,
        None => {
            let span = 20.0 * sol.t1_minus();
            if !span.is_finite() {
                return Err(ConfigError::new("sweep.t_us", "rates vanish; give an explicit time window").into());
            }
            (0..=200).map(|i| span * i as f64 / 200.0).collect()
        }
    };
    let control = if ctx.fixed_step {
        let span = t_grid.last().copied().unwrap_or(0.0) - t_grid[0];
        let dt = match pc.fixed_dt_us {
            Some(v) if v.is_finite() && v > 0.0 => us(v),
            Some(v) => return Err(ConfigError::new("populations.fixed_dt_us", format!("must be positive, got {v}")).into()),
            None => span / 2000.0,
        };
        StepControl::Fixed { dt }
    } else {
        StepControl::default()
    };
    let rows = population_comparison(&rates, &rho0, &t_grid, control).map_err(classify)?;

    let meta = ctx.meta("populations");
    let mut t = Table::new(&[
        "t_s",
        "p_plus_analytic",
        "p_zero_analytic",
        "p_minus_analytic",
        "p_plus_numeric",
        "p_zero_numeric",
        "p_minus_numeric",
    ]);
    for r in &rows {
        let mut row = vec![num(r.t)];
        row.extend(r.analytic.iter().map(|&v| num(v)));
        row.extend(r.numeric.iter().map(|&v| num(v)));
        t.push(row);
    }
    ctx.out.write_table("populations.csv", &meta, &t)?;

    let mut side = Table::new(&["t1_plus_s", "t1_minus_s", "rate_plus_per_s", "rate_minus_per_s", "valid"]);
    side.push(vec![
        num(sol.t1_plus()),
        num(sol.t1_minus()),
        num(sol.rate_plus()),
        num(sol.rate_minus()),
        u8::from(rates.valid).to_string(),
    ]);
    ctx.out.write_table("populations_t1.csv", &meta, &side)?;
    ctx.out.write(
        "plot_populations.py",
        &plot_stub(
            "populations.csv",
            "t_s",
            &["p_plus_analytic", "p_zero_analytic", "p_minus_analytic", "p_plus_numeric", "p_zero_numeric", "p_minus_numeric"],
            false,
            false,
        ),
    )?;
    println!("T1+ = {:e} s, T1- = {:e} s, {} time points", sol.t1_plus(), sol.t1_minus(), rows.len());
    Ok(())
}

pub fn rates_sweep_cmd(ctx: &Context) -> CliResult<()> {
    let params = ctx.params()?;
    let geom = ctx.cfg.geometry.surface()?;
    let sources = noise_sources(ctx);
    let bz = match ctx.cfg.sweep {
        Some(s) => s.grid_for(SweepVariable::Bz)?,
        None => (0..=200).map(|i| 0.2 * i as f64 / 200.0).collect(),
    };
    // Surface config errors before sweeping.
    build_spectra(&sources, &geom, bz[0])?;
    let spectra = |b: f64| -> qutrit_noise::Result<(Box<dyn Spectrum>, Box<dyn Spectrum>)> {
        let s = build_spectra(&sources, &geom, b).expect("validated above");
        Ok((s.electric, s.magnetic))
    };
    let pts = rates_sweep(&params, &bz, ctx.guard()?, ctx.exec, &spectra).map_err(classify)?;

    let mut t = Table::new(&[
        "bz_t",
        "omega_p0_rad_per_s",
        "omega_m0_rad_per_s",
        "omega_pm_rad_per_s",
        "gamma_dperp_pm_per_s",
        "gamma_dprime_p0_per_s",
        "gamma_dprime_m0_per_s",
        "gamma_dpar_0_per_s",
        "gamma_gperp_p0_per_s",
        "gamma_gperp_m0_per_s",
        "gamma_gpar_0_per_s",
        "inv_t1_plus_per_s",
        "inv_t1_minus_per_s",
        "inv_t2_0p_per_s",
        "inv_t2_0m_per_s",
        "inv_t2_mp_per_s",
        "valid",
    ]);
    for p in &pts {
        let r = &p.rates;
        let mut row: Vec<String> = [
            p.bz,
            p.freqs.omega_p0,
            p.freqs.omega_m0,
            p.freqs.omega_pm,
            r.gamma_dperp_pm,
            r.gamma_dprime_p0,
            r.gamma_dprime_m0,
            r.gamma_dpar_0,
            r.gamma_gperp_p0,
            r.gamma_gperp_m0,
            r.gamma_gpar_0,
            p.rate_plus,
            p.rate_minus,
            p.dephasing.rate_0p(),
            p.dephasing.rate_0m(),
            p.dephasing.rate_mp(),
        ]
        .into_iter()
        .map(num)
        .collect();
        row.push(u8::from(r.valid).to_string());
        t.push(row);
    }
    ctx.out.write_table("rates_sweep.csv", &ctx.meta("rates-sweep"), &t)?;
    ctx.out.write(
        "plot_rates_sweep.py",
        &plot_stub(
            "rates_sweep.csv",
            "bz_t",
            &["gamma_dprime_p0_per_s", "gamma_dprime_m0_per_s", "inv_t1_plus_per_s", "inv_t1_minus_per_s"],
            false,
            true,
        ),
    )?;
    let invalid = pts.iter().filter(|p| !p.rates.valid).count();
    println!("{} field points, {invalid} inside the degeneracy guard (valid=0)", pts.len());
    Ok(())
}

pub fn noise_vs_depth_cmd(ctx: &Context) -> CliResult<()> {
    let g = ctx.cfg.geometry;
    let mut src = DepthSources { theta: g.theta_rad, epsilon_r: g.epsilon_r, n_s: None, dipole: None, n_v: None };
    let sources = if ctx.cfg.noise.is_empty() {
        vec![
            NoiseSource::PointCharge { n_s_cm2: 1e11, tau_p_ns: 5.0 },
            NoiseSource::Dipole { n_sd_cm2: 1e12, d_bar_nm: 0.5, omega_d_rad_per_s: 0.0, gamma_d_per_s: 1e9 },
            NoiseSource::Bulk { n_v_cm3: 1e16 },
        ]
    } else {
        ctx.cfg.noise.clone()
    };
    for (i, s) in sources.iter().enumerate() {
        let dup = || ConfigError::new(format!("noise[{i}]"), format!("only one {} source is supported here", s.kind()));
        match *s {
            NoiseSource::PointCharge { n_s_cm2, .. } => {
                if src.n_s.replace(per_cm2(n_s_cm2)).is_some() {
                    return Err(dup().into());
                }
            }
            NoiseSource::Dipole { n_sd_cm2, d_bar_nm, .. } => {
                if src.dipole.replace((per_cm2(n_sd_cm2), nm(d_bar_nm))).is_some() {
                    return Err(dup().into());
                }
            }
            NoiseSource::Bulk { n_v_cm3 } => {
                if src.n_v.replace(per_cm3(n_v_cm3)).is_some() {
                    return Err(dup().into());
                }
            }
            _ => {
                return Err(ConfigError::new(format!("noise[{i}].kind"), "noise-vs-depth takes point_charge, dipole and bulk").into())
            }
        }
    }
    let z = match ctx.cfg.sweep {
        Some(s) => s.grid_for(SweepVariable::Depth)?,
        None => (0..=120).map(|i| 1e-9 * 10f64.powf(i as f64 / 40.0)).collect(),
    };
    let (rows, markers) = noise_vs_depth(&src, &z, ctx.exec).map_err(classify)?;
    let meta = ctx.meta("noise-vs-depth");
    let mut t = Table::new(&["z_nm", "point_v_per_m", "dipole_v_per_m", "bulk_v_per_m"]);
    for r in &rows {
        t.push(vec![num(r.z / 1e-9), opt(r.point), opt(r.dipole), opt(r.bulk)]);
    }
    ctx.out.write_table("noise_vs_depth.csv", &meta, &t)?;
    let mut m = Table::new(&["source", "z_opt_nm"]);
    m.push(vec!["point_charge".into(), opt(markers.z_opt_point.map(|z| z / 1e-9))]);
    m.push(vec!["dipole".into(), opt(markers.z_opt_dipole.map(|z| z / 1e-9))]);
    ctx.out.write_table("noise_vs_depth_markers.csv", &meta, &m)?;
    ctx.out.write(
        "plot_noise_vs_depth.py",
        &plot_stub("noise_vs_depth.csv", "z_nm", &["point_v_per_m", "dipole_v_per_m", "bulk_v_per_m"], true, true),
    )?;
    println!(
        "{} depths; z_opt point = {} nm, dipole = {} nm",
        rows.len(),
        opt(markers.z_opt_point.map(|z| z / 1e-9)),
        opt(markers.z_opt_dipole.map(|z| z / 1e-9))
    );
    Ok(())
}

pub fn fit_depth(ctx: &Context) -> CliResult<()> {
    let fc = ctx.cfg.fit.clone().unwrap_or_default();
    let path = ctx
        .input
        .clone()
        .or_else(|| fc.input.clone().map(PathBuf::from))
        .ok_or_else(|| ConfigError::new("fit.input", "no depth data given (use --input or fit.input)"))?;
    let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let data = DepthDataset::from_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let exponent = match fc.exponent {
        Some(n) if n.is_finite() && n > 0.0 => Exponent::Fixed(n),
        Some(n) => return Err(ConfigError::new("fit.exponent", format!("must be positive, got {n}")).into()),
        None => Exponent::Free,
    };
    let main = fit_power_law(&data, FitOptions { exponent, constant_rate: fc.constant_rate }).map_err(classify)?;
    let sel = model_select_with(&data, fc.constant_rate).map_err(classify)?;
    let fixed = |n: f64| fit_power_law(&data, FitOptions { exponent: Exponent::Fixed(n), constant_rate: fc.constant_rate });
    let f2 = fixed(2.0).map_err(classify)?;
    let f4 = fixed(4.0).map_err(classify)?;

    let meta = ctx.meta("fit-depth");
    // Amplitude is in SI (s·m^n); the 1 nm value is easier to read.
    let mut t = Table::new(&[
        "model",
        "amplitude_s_m_pow_n",
        "t2_at_1nm_us",
        "exponent",
        "exponent_std_err",
        "constant_rate_per_s",
        "residual",
    ]);
    let row = |name: &str, f: &PowerLawFit| {
        vec![
            name.to_string(),
            num(f.amplitude),
            num(f.predict(1e-9) / 1e-6),
            num(f.exponent),
            opt(f.covariance.map(|c| c[1][1].sqrt())),
            opt(f.constant_rate),
            num(f.residual),
        ]
    };
    t.push(row(if matches!(exponent, Exponent::Free) { "free" } else { "fixed" }, &main));
    t.push(row("n2", &f2));
    t.push(row("n4", &f4));
    ctx.out.write_table("fit_depth.csv", &meta, &t)?;

    let mut s = Table::new(&["preferred_exponent", "residual_2", "residual_4", "ratio"]);
    s.push(vec![
        sel.preferred.map(|p| p.to_string()).unwrap_or_else(|| "inconclusive".into()),
        num(sel.residual_2),
        num(sel.residual_4),
        num(sel.ratio),
    ]);
    ctx.out.write_table("fit_depth_selection.csv", &meta, &s)?;

    let mut c = Table::new(&["z_nm", "t2_us", "t2_fit_us"]);
    for p in data.points() {
        c.push(vec![num(p.z / 1e-9), num(p.t2 / 1e-6), num(main.predict(p.z) / 1e-6)]);
    }
    ctx.out.write_table("fit_depth_curve.csv", &meta, &c)?;
    ctx.out.write("plot_fit_depth.py", &plot_stub("fit_depth_curve.csv", "z_nm", &["t2_us", "t2_fit_us"], true, true))?;
    println!(
        "T2 = {:e} us * (z / 1 nm)^{:.4}; model selection: {}",
        main.predict(1e-9) / 1e-6,
        main.exponent,
        sel.preferred.map(|p| format!("n = {p} (ratio {:.3})", sel.ratio)).unwrap_or_else(|| "inconclusive".into())
    );
    Ok(())
}

/// One gate of the verification suite. `margin ≥ 0` passes.
struct Check {
    name: &'static str,
    value: f64,
    reference: f64,
    tolerance: f64,
    margin: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.margin >= 0.0
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

pub fn mc_verify(ctx: &Context) -> CliResult<()> {
    let mc: McVerifyConfig = ctx.cfg.mc_verify.unwrap_or_default();
    let tau = ns(positive("mc_verify.tau_ns", mc.tau_ns)?);
    let reference_tau = ns(positive("mc_verify.reference_tau_ns", mc.reference_tau_ns.unwrap_or(mc.tau_ns))?);
    positive("mc_verify.psd_tolerance", mc.psd_tolerance)?;
    positive("mc_verify.variance_tolerance", mc.variance_tolerance)?;
    if mc.configurations < 2 {
        return Err(ConfigError::new("mc_verify.configurations", "need at least two").into());
    }
    let geom = ctx.cfg.geometry.surface()?;
    let z = geom.z_def();
    let seed = ctx.seed;
    let mut checks = Vec::new();
    let total = |v: [f64; 3]| v[0] + v[1] + v[2];

    // Quadrature over a wide patch against the closed forms.
    let n_s = 1e15;
    let quad = variance_surface_integral(&Source::elementary_charge(), n_s, &geom, 1000.0 * z).map_err(classify)?;
    let closed = SurfacePointChargeNoise::new(geom, n_s, tau).map_err(classify)?.variance();
    let e = rel(total(quad), total(closed));
    checks.push(Check { name: "quadrature_point", value: total(quad), reference: total(closed), tolerance: 1e-3, margin: 1e-3 - e });

    let d = 0.5e-9;
    let dip = Source::ElectricDipole { rms_length: d };
    let quad = variance_surface_integral(&dip, 1e16, &geom, 1000.0 * z).map_err(classify)?;
    let ds = DipoleSpectrum::new(d * d, 0.0, 1.0 / tau).map_err(classify)?;
    let closed = SurfaceDipoleNoise::new(geom, 1e16, ds).map_err(classify)?.variance();
    let e = rel(total(quad), total(closed));
    checks.push(Check { name: "quadrature_dipole", value: total(quad), reference: total(closed), tolerance: 1e-3, margin: 1e-3 - e });

    // Sampled ensembles against quadrature over the same finite patch.
    let side = 30.0 * z;
    let n_dense = 1.0 / (z * z);
    let spec = EnsembleSpec {
        source: Source::elementary_charge(),
        dynamics: Dynamics::telegraph_with_tau(tau).map_err(classify)?,
        n_areal: n_dense,
        side,
    };
    let est = ensemble_variance(&spec, &geom, tau, 32, mc.configurations, seed, ctx.exec).map_err(classify)?;
    let quad = variance_surface_integral(&spec.source, n_dense, &geom, side).map_err(classify)?;
    let (m, q) = (total(est.mean), total(quad));
    let tol = mc.variance_tolerance;
    checks.push(Check { name: "sampling_vs_quadrature", value: m, reference: q, tolerance: tol, margin: tol - rel(m, q) });

    // Correlation time from the PSD of one sampled configuration.
    let spec = EnsembleSpec { n_areal: 1e15, ..spec };
    let ens = FluctuatorEnsemble::generate(spec, seed ^ 0x5053_4400).map_err(classify)?;
    let ts = simulate_field_series(&ens, &geom, tau / 10.0, 1 << 18).map_err(classify)?;
    let psd = estimate_psd_with(&ts, 2048).map_err(classify)?;
    let fit = fit_lorentzian(&psd, 2, 5.0 / tau).map_err(classify)?;
    let tol = mc.psd_tolerance;
    let dev = rel(fit.tau, reference_tau);
    checks.push(Check { name: "psd_tau", value: fit.tau, reference: reference_tau, tolerance: tol, margin: tol - dev });
    // Negative control: a doubled τ must be flagged.
    let dev = rel(fit.tau, 2.0 * reference_tau);
    checks.push(Check {
        name: "negative_control_psd",
        value: fit.tau,
        reference: 2.0 * reference_tau,
        tolerance: tol,
        margin: dev - tol,
    });

    // Stochastic Schrödinger average against the master equation, on a
    // scaled-down defect that keeps the run short.
    let p = SpinCenterParams::new(0.2e6, 1.0e6, 1.0e6, 0.0035, 0.17, 0.085).map_err(classify)?;
    let tau_c = 1e-6;
    let noise = OuFieldNoise::new([3e9; 3], [0.0; 3], tau_c).map_err(classify)?;
    let bz = 0.08;
    let freqs = transition_frequencies(&p, bz);
    let r = rates_from_spectra(&noise.electric_spectrum(), &noise.magnetic_spectrum(), &freqs, &p, 0.0).map_err(classify)?;
    let rho0 = DensityMatrix3::from_populations([0.0, 0.0, 1.0]).map_err(classify)?;
    let ts: Vec<f64> = (0..=4).map(|i| i as f64 * 1e-4).collect();
    let mut o = AveragingOptions::new(tau_c / 16.0, mc.realizations, seed);
    o.bz = bz;
    o.execution = ctx.exec;
    let avg = stochastic_average_evolution(&p, &noise, &rho0, &ts, &o).map_err(classify)?;
    let an = population_dynamics(&r, &rho0, &ts).map_err(classify)?;
    let mut worst = 0.0f64;
    for i in 1..ts.len() {
        for k in 0..3 {
            let se = avg.population_std_err[i][k].max(1e-12);
            worst = worst.max((avg.populations(i)[k] - an[i][k]).abs() / se);
        }
    }
    checks.push(Check { name: "stochastic_vs_lindblad_sigma", value: worst, reference: 0.0, tolerance: 4.0, margin: 4.0 - worst });

    // Integrator against the closed-form populations.
    let r = RateSet::from_relaxation(2e3, 2e3, 2e3).map_err(classify)?;
    let grid: Vec<f64> = (0..=50).map(|i| 1e-4 * i as f64).collect();
    let control = if ctx.fixed_step { StepControl::Fixed { dt: 1e-7 } } else { StepControl::default() };
    let rows = population_comparison(&r, &rho0, &grid, control).map_err(classify)?;
    let worst = rows
        .iter()
        .flat_map(|row| (0..3).map(move |k| (row.analytic[k] - row.numeric[k]).abs()))
        .fold(0.0, f64::max);
    checks.push(Check { name: "integrator_vs_closed_form", value: worst, reference: 0.0, tolerance: 1e-8, margin: 1e-8 - worst });

    let mut t = Table::new(&["check", "value", "reference", "tolerance", "margin", "pass"]);
    for c in &checks {
        let verdict = if c.pass() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {:<30} value={:<24} reference={:<24} tol={:<8} margin={}",
            c.name,
            num(c.value),
            num(c.reference),
            num(c.tolerance),
            num(c.margin)
        );
        t.push(vec![
            c.name.to_string(),
            num(c.value),
            num(c.reference),
            num(c.tolerance),
            num(c.margin),
            u8::from(c.pass()).to_string(),
        ]);
    }
    ctx.out.write_table("mc_verify.csv", &ctx.meta("mc-verify"), &t)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Gate(failed.join(", ")))
    }
}
