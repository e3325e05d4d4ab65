//! Subcommand implementations.

use rayon::prelude::*;
use serde_json::json;

use qfel_core::analytic::{self, SaturationMode};
use qfel_core::dynamics::{evolve_observables, find_first_maximum, Propagator};
use qfel_core::ensemble::{EnsembleRunner, InitialFieldState};
use qfel_core::lab;
use qfel_core::{PhotonStatistics, SystemConfig};

use crate::output::{fmt_opt, fmt_sig, write_csv, write_json, write_meta_sidecar, Sink};
use crate::{
    AnalyticArgs, BackendKind, DesignArgs, EvolveArgs, Failure, SeedKind, SweepArgs, SweepVariable,
};

impl From<BackendKind> for Propagator {
    fn from(kind: BackendKind) -> Self {
        match kind {
            BackendKind::Spectral => Propagator::Spectral,
            BackendKind::Lanczos => Propagator::Lanczos,
        }
    }
}

fn uniform_grid(l_max: f64, samples: usize) -> Result<Vec<f64>, Failure> {
    if !(l_max.is_finite() && l_max > 0.0) {
        return Err(Failure::config(format!(
            "lmax must be positive, got {l_max}"
        )));
    }
    if samples < 2 {
        return Err(Failure::config(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    Ok((0..samples)
        .map(|i| i as f64 * l_max / (samples - 1) as f64)
        .collect())
}

fn warn_outside_quantum_regime(config: &SystemConfig) {
    if !config.is_quantum_regime() {
        eprintln!(
            "qfel: warning: alpha_N = {} is not small; the two-level model \
             assumes the quantum regime alpha_N << 1",
            config.quantum_parameter
        );
    }
}

pub fn run_evolve(args: &EvolveArgs) -> Result<u8, Failure> {
    let seed_photons = match args.seed {
        SeedKind::Fock => {
            if args.n0.fract() != 0.0 || args.n0 < 0.0 {
                return Err(Failure::config(format!(
                    "a Fock seed requires a non-negative integer n0, got {}",
                    args.n0
                )));
            }
            args.n0 as u64
        }
        _ => args.n0.round().max(0.0) as u64,
    };
    let config = SystemConfig::new(args.electrons, seed_photons, args.delta, args.alpha)?;
    warn_outside_quantum_regime(&config);
    let lengths = uniform_grid(args.grid.lmax, args.grid.samples)?;
    let backend: Propagator = args.backend.into();

    let series: Vec<PhotonStatistics> = match args.seed {
        SeedKind::Fock => evolve_observables(&config, &lengths, backend)?,
        SeedKind::Coherent => EnsembleRunner::new().mixed_moments(
            &InitialFieldState::coherent(args.n0)?,
            &config,
            &lengths,
            args.epsilon,
            backend,
        )?,
        SeedKind::Thermal => EnsembleRunner::new().mixed_moments(
            &InitialFieldState::thermal(args.n0)?,
            &config,
            &lengths,
            args.epsilon,
            backend,
        )?,
    };

    let sink = Sink::from_path(&args.output);
    match args.format {
        crate::OutputFormat::Csv => write_csv(
            &sink,
            "L_over_Lg,mean,variance,fano,captured_mass",
            series.iter().map(|s| {
                vec![
                    fmt_sig(s.length_over_gain),
                    fmt_sig(s.mean),
                    fmt_sig(s.variance),
                    fmt_opt(s.fano_factor),
                    fmt_sig(s.captured_mass),
                ]
            }),
        )?,
        crate::OutputFormat::Json => {
            let rows: Vec<_> = series
                .iter()
                .map(|s| {
                    json!({
                        "l_over_lg": s.length_over_gain,
                        "mean": s.mean,
                        "variance": s.variance,
                        "fano": s.fano_factor,
                        "captured_mass": s.captured_mass,
                    })
                })
                .collect();
            write_json(&sink, &json!({ "schema_version": 1, "rows": rows }))?;
        }
    }

    if args.meta {
        write_meta_sidecar(
            &sink,
            "evolve",
            json!({
                "electrons": args.electrons,
                "seed": match args.seed {
                    SeedKind::Fock => "fock",
                    SeedKind::Coherent => "coherent",
                    SeedKind::Thermal => "thermal",
                },
                "n0": args.n0,
                "alpha": args.alpha,
                "delta": args.delta,
                "lmax": args.grid.lmax,
                "samples": args.grid.samples,
                "epsilon": args.epsilon,
                "backend": match args.backend {
                    BackendKind::Spectral => "spectral",
                    BackendKind::Lanczos => "lanczos",
                },
            }),
        )?;
    }
    Ok(0)
}

pub fn run_analytic(args: &AnalyticArgs) -> Result<u8, Failure> {
    let config = SystemConfig::new(args.electrons, args.n0, args.delta, args.alpha)?;
    warn_outside_quantum_regime(&config);
    if args.electrons < 100 {
        eprintln!(
            "qfel: warning: the asymptotic saturation length assumes N >> 1; \
             N = {} is below 100",
            args.electrons
        );
    }
    let lengths = uniform_grid(args.grid.lmax, args.grid.samples)?;

    let mut rows = Vec::with_capacity(lengths.len());
    for &length in &lengths {
        let mean = analytic::mean_photon_analytic(length, &config)?;
        rows.push(vec![fmt_sig(length), fmt_sig(mean)]);
    }
    let sink = Sink::from_path(&args.output);
    write_csv(&sink, "L_over_Lg,mean_analytic", rows.into_iter())?;

    let cubic = analytic::roots(&config);
    let curve = analytic::modulus(&cubic).ok();
    let sidecar = json!({
        "schema_version": 1,
        "n_plus": cubic.n_plus,
        "n_minus": cubic.n_minus,
        "modulus": curve.as_ref().map(|c| c.modulus.value()),
        "L_max_exact": analytic::saturation_length(&config, SaturationMode::Exact).ok(),
        "L_max_asymptotic": analytic::saturation_length(&config, SaturationMode::Asymptotic).ok(),
    });
    let sidecar_sink = match (&args.sidecar, sink.sibling(".json")) {
        (Some(path), _) => Some(Sink::File(path.clone())),
        (None, Some(default)) => Some(Sink::File(default)),
        (None, None) => {
            eprintln!("qfel: curve-parameter sidecar skipped for stdout output");
            None
        }
    };
    if let Some(sidecar_sink) = sidecar_sink {
        write_json(&sidecar_sink, &sidecar)?;
    }

    if args.meta {
        write_meta_sidecar(
            &sink,
            "analytic",
            json!({
                "electrons": args.electrons,
                "n0": args.n0,
                "alpha": args.alpha,
                "delta": args.delta,
                "lmax": args.grid.lmax,
                "samples": args.grid.samples,
            }),
        )?;
    }
    Ok(0)
}

fn parse_range(spec: &str, log_spaced: bool) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::config(format!(
            "range must be lo:hi:count, got '{spec}'"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Failure::config(format!("bad range start '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Failure::config(format!("bad range end '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Failure::config(format!("bad range count '{}'", parts[2])))?;
    if count == 0 {
        return Err(Failure::config("range count must be positive"));
    }
    if log_spaced && (lo <= 0.0 || hi <= 0.0) {
        return Err(Failure::config("log range endpoints must be positive"));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let values = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if log_spaced {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect();
    Ok(values)
}

struct SweepRow {
    value: f64,
    n_max_numeric: Option<f64>,
    l_max_numeric: Option<f64>,
    n_max_analytic: Option<f64>,
    l_max_analytic: Option<f64>,
}

impl SweepRow {
    fn failed(&self) -> bool {
        self.n_max_numeric.is_none()
            || self.l_max_numeric.is_none()
            || self.n_max_analytic.is_none()
            || self.l_max_analytic.is_none()
    }
}

fn sweep_point(args: &SweepArgs, value: f64, lengths: &[f64]) -> SweepRow {
    let mut row = SweepRow {
        value,
        n_max_numeric: None,
        l_max_numeric: None,
        n_max_analytic: None,
        l_max_analytic: None,
    };
    let (n, delta, ratio) = match args.var {
        SweepVariable::ElectronCount => (value.round() as u64, args.delta, args.seed_ratio),
        SweepVariable::Detuning => (args.electrons, value, args.seed_ratio),
        SweepVariable::SeedRatio => (args.electrons, args.delta, Some(value)),
    };
    let n0 = match ratio {
        Some(ratio) if ratio >= 0.0 => (ratio * n as f64).round() as u64,
        Some(_) => return row,
        None => args.n0,
    };
    let Ok(config) = SystemConfig::new(n, n0, delta, args.alpha) else {
        return row;
    };

    if let Ok(series) = evolve_observables(&config, lengths, args.backend.into()) {
        let curve: Vec<(f64, f64)> = series
            .iter()
            .map(|s| (s.length_over_gain, s.mean))
            .collect();
        if let Ok((l_max, v_max)) = find_first_maximum(&curve) {
            row.n_max_numeric = Some(v_max);
            row.l_max_numeric = Some(l_max);
        }
    }

    let cubic = analytic::roots(&config);
    if cubic.has_gain() {
        row.n_max_analytic = Some(cubic.n_plus);
    }
    row.l_max_analytic = analytic::saturation_length(&config, SaturationMode::Exact).ok();
    row
}

pub fn run_sweep(args: &SweepArgs) -> Result<u8, Failure> {
    let values = match (&args.values, &args.range, &args.log_range) {
        (Some(values), None, None) => values.clone(),
        (None, Some(spec), None) => parse_range(spec, false)?,
        (None, None, Some(spec)) => parse_range(spec, true)?,
        (None, None, None) => {
            return Err(Failure::config(
                "provide swept values via --values, --range, or --log-range",
            ))
        }
        _ => unreachable!("clap conflicts prevent combined value sources"),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::config("swept values must be non-empty and finite"));
    }
    let lengths = uniform_grid(args.grid.lmax, args.grid.samples)?;

    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&value| sweep_point(args, value, &lengths))
        .collect();
    let any_failed = rows.iter().any(SweepRow::failed);
    for row in rows.iter().filter(|r| r.failed()) {
        eprintln!("qfel: sweep point {} failed (empty fields)", row.value);
    }

    let sink = Sink::from_path(&args.output);
    write_csv(
        &sink,
        "value,n_max_numeric,L_max_numeric,n_max_analytic,L_max_analytic",
        rows.iter().map(|r| {
            vec![
                fmt_sig(r.value),
                fmt_opt(r.n_max_numeric),
                fmt_opt(r.l_max_numeric),
                fmt_opt(r.n_max_analytic),
                fmt_opt(r.l_max_analytic),
            ]
        }),
    )?;

    if args.meta {
        write_meta_sidecar(
            &sink,
            "sweep",
            json!({
                "var": match args.var {
                    SweepVariable::ElectronCount => "electron-count",
                    SweepVariable::Detuning => "detuning",
                    SweepVariable::SeedRatio => "seed-ratio",
                },
                "values": values,
                "electrons": args.electrons,
                "alpha": args.alpha,
                "delta": args.delta,
                "n0": args.n0,
                "seed_ratio": args.seed_ratio,
                "lmax": args.grid.lmax,
                "samples": args.grid.samples,
            }),
        )?;
    }
    Ok(if any_failed { 4 } else { 0 })
}

const LAB_PARAM_KEYS: [&str; 8] = [
    "wiggler_wavelength",
    "wiggler_parameter",
    "electron_density",
    "gamma0",
    "relative_energy_spread",
    "interaction_length",
    "electron_count",
    "seed_ratio",
];

pub fn run_design(args: &DesignArgs) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(&args.params)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("parameter file is not valid JSON: {e}")))?;
    let Some(object) = value.as_object() else {
        return Err(Failure::config("parameter file must be a JSON object"));
    };
    let offending: Vec<&str> = object
        .keys()
        .map(String::as_str)
        .filter(|key| !LAB_PARAM_KEYS.contains(key))
        .collect();
    if !offending.is_empty() {
        return Err(Failure::config(format!(
            "unknown parameter keys: {} (expected snake_case LabParams fields)",
            offending.join(", ")
        )));
    }
    let params: lab::LabParams = serde_json::from_value(value)
        .map_err(|e| Failure::config(format!("parameter schema violation: {e}")))?;

    let assumptions = lab::Assumptions {
        r_sp_length: args.rsp_l,
        k_p_length: args.kp_l,
        ..lab::Assumptions::default()
    };
    let report = lab::assess(&params, &assumptions)?;

    let mut document = serde_json::to_value(&report)
        .map_err(|e| Failure::numeric(format!("report serialization failed: {e}")))?;
    document
        .as_object_mut()
        .expect("report is an object")
        .insert("schema_version".into(), json!(1));
    write_json(&Sink::from_path(&args.output), &document)?;
    Ok(0)
}
