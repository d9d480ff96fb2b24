//! Subcommand implementations: orchestrate the core library, write
//! reports/CSVs into the output directory, and print one-line summaries.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use snvtk_core::config::RunConfig;
use snvtk_core::fit::{
    self, AlphaOptions, FitError, FitOptions, FitResult, G2Params, LineSelection,
};
use snvtk_core::geometry::LabVector;
use snvtk_core::io::{
    emit_plot_data, emit_report, fit_result_rows, load_spectrum, load_sweep, write_measured_sweep,
    write_spectrum, Report, SpectrumFormat,
};
use snvtk_core::synth::{linear_grid, NoiseKind, NoiseSpec};
use snvtk_core::transitions::{zeeman_sweep, Family, MeasuredLine, MeasuredSweep, SweepTable};

use crate::{
    CliError, FitAlphaArgs, FitG2Args, FitPolarizationArgs, FitSpectrumArgs, LifetimeArgs,
    PredictZeemanArgs, SynthG2Args, SynthSpectrumArgs, SynthZeemanArgs,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

/// Fit errors that indicate unusable data rather than solver failure.
fn fit_err(e: FitError) -> CliError {
    CliError::Data(e.to_string())
}

fn solver_options(max_iterations: usize) -> Result<FitOptions, CliError> {
    if max_iterations == 0 {
        return Err(CliError::Usage("max-iterations must be at least 1".into()));
    }
    Ok(FitOptions {
        max_iterations,
        ..FitOptions::default()
    })
}

fn parse_direction(text: &str) -> Result<LabVector, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "direction must be three comma-separated numbers, got `{text}`"
        )));
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<f64>().map_err(|_| {
            CliError::Usage(format!(
                "direction component `{}` is not a number",
                part.trim()
            ))
        })?;
    }
    let vector = LabVector::new(v[0], v[1], v[2]);
    if vector.normalized().is_none() {
        return Err(CliError::Usage("direction must be a nonzero vector".into()));
    }
    Ok(vector)
}

fn parse_families(text: &str) -> Result<Vec<Family>, CliError> {
    let mut out = Vec::new();
    for token in text.split(',') {
        let family = Family::from_label(token)
            .ok_or_else(|| CliError::Usage(format!("unknown family `{}`", token.trim())))?;
        if !out.contains(&family) {
            out.push(family);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("families list is empty".into()));
    }
    Ok(out)
}

fn parse_noise(kind: &str, magnitude: f64, seed: u64) -> Result<NoiseSpec, CliError> {
    let kind = NoiseKind::from_label(kind)
        .ok_or_else(|| CliError::Usage(format!("unknown noise kind `{kind}`")))?;
    let spec = NoiseSpec {
        kind,
        magnitude,
        seed,
    };
    spec.validate().map_err(data_err)?;
    Ok(spec)
}

fn field_grid(b_min: f64, b_max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    if steps == 1 {
        return Ok(vec![b_min]);
    }
    if b_max <= b_min {
        return Err(CliError::Usage("b-max must exceed b-min".into()));
    }
    Ok(linear_grid(b_min, b_max, steps))
}

fn digest_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let hash = Sha256::digest(&bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok(format!("sha256:{hex}"))
}

fn out_path(config: &RunConfig, name: &str) -> PathBuf {
    Path::new(&config.out_dir).join(name)
}

fn command_rows(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn write_fit_report(
    config: &RunConfig,
    command: &str,
    inputs: Vec<(String, String)>,
    options: Vec<(String, String)>,
    results: Vec<(String, String)>,
    file_name: &str,
) -> Result<PathBuf, CliError> {
    let report = Report {
        command: command.into(),
        version: VERSION.into(),
        inputs,
        config: config.echo(),
        options,
        results,
    };
    let path = out_path(config, file_name);
    emit_report(&report, &path).map_err(data_err)?;
    Ok(path)
}

/// Model sweep entries as a measured-schema table (only fields where all
/// four lines of a family are resolved carry rows).
fn sweep_as_table(sweep: &SweepTable) -> MeasuredSweep {
    let mut table = MeasuredSweep::default();
    for (i, &field) in sweep.fields_tesla.iter().enumerate() {
        let mut lines = Vec::new();
        for family in Family::ALL {
            let family_lines: Vec<&snvtk_core::transitions::TransitionLine> = sweep.entries[i]
                .iter()
                .filter(|l| l.family == family)
                .collect();
            if family_lines.len() == 4 {
                for l in family_lines {
                    lines.push(MeasuredLine {
                        family,
                        index: l.index.expect("four resolved lines are indexed"),
                        offset_ghz: l.offset_ghz,
                        sigma_ghz: None,
                    });
                }
            }
        }
        if !lines.is_empty() {
            table.fields_tesla.push(field);
            table.entries.push(lines);
        }
    }
    table
}

pub fn predict_zeeman(config: &RunConfig, args: &PredictZeemanArgs) -> Result<(), CliError> {
    let direction = parse_direction(&args.direction)?;
    let fields = field_grid(args.b_min, args.b_max, args.steps)?;
    let alpha = match (args.alpha_g, args.alpha_u) {
        (None, None) => None,
        (g, u) => Some((g.unwrap_or(1.0), u.unwrap_or(1.0))),
    };

    let sweep = zeeman_sweep(
        &config.ground,
        &config.excited,
        &config.constants,
        &direction,
        &fields,
        config.orientation,
    )
    .map_err(data_err)?;

    let mut files = Vec::new();
    let curves_path = out_path(config, "zeeman_curves.tsv");
    emit_plot_data(&sweep, false, &curves_path).map_err(data_err)?;
    files.push(curves_path);
    let table_path = out_path(config, "zeeman_table.csv");
    write_measured_sweep(&sweep_as_table(&sweep), &table_path).map_err(data_err)?;
    files.push(table_path);
    if args.centered {
        let path = out_path(config, "zeeman_curves_centered.tsv");
        emit_plot_data(&sweep, true, &path).map_err(data_err)?;
        files.push(path);
    }

    if let Some((alpha_g, alpha_u)) = alpha {
        let scaled = zeeman_sweep(
            &config.ground.scaled_orbital(alpha_g),
            &config.excited.scaled_orbital(alpha_u),
            &config.constants,
            &direction,
            &fields,
            config.orientation,
        )
        .map_err(data_err)?;
        let path = out_path(config, "zeeman_curves_scaled.tsv");
        emit_plot_data(&scaled, false, &path).map_err(data_err)?;
        files.push(path);
        let table = out_path(config, "zeeman_table_scaled.csv");
        write_measured_sweep(&sweep_as_table(&scaled), &table).map_err(data_err)?;
        files.push(table);
        if args.centered {
            let path = out_path(config, "zeeman_curves_scaled_centered.tsv");
            emit_plot_data(&scaled, true, &path).map_err(data_err)?;
            files.push(path);
        }
    }

    let mut results = vec![
        ("n_fields".to_string(), fields.len().to_string()),
        ("families".to_string(), "A,B,C,D".to_string()),
    ];
    // Zero-field line positions characterize the configured center.
    let lambda_g = config.ground.lambda_so_ghz;
    let lambda_u = config.excited.lambda_so_ghz;
    for (family, offset) in [
        (Family::A, (lambda_u + lambda_g) / 2.0),
        (Family::B, (lambda_u - lambda_g) / 2.0),
        (Family::C, -(lambda_u - lambda_g) / 2.0),
        (Family::D, -(lambda_u + lambda_g) / 2.0),
    ] {
        results.push((
            format!("zero_field_offset_ghz.{family}"),
            format!("{offset:e}"),
        ));
    }
    for (i, path) in files.iter().enumerate() {
        results.push((format!("file.{i}"), path.display().to_string()));
    }
    let report = write_fit_report(
        config,
        "predict-zeeman",
        Vec::new(),
        command_rows(&[
            ("b_min", format!("{:e}", args.b_min)),
            ("b_max", format!("{:e}", args.b_max)),
            ("steps", args.steps.to_string()),
            ("direction", args.direction.clone()),
            ("alpha_g", format!("{:?}", args.alpha_g)),
            ("alpha_u", format!("{:?}", args.alpha_u)),
            ("centered", args.centered.to_string()),
        ]),
        results,
        "predict_zeeman_report.txt",
    )?;
    println!(
        "predicted {} fields x 16 lines; report: {}",
        fields.len(),
        report.display()
    );
    Ok(())
}

/// Shared tail for fit commands: write the report, then fail with exit
/// code 4 if the solver did not converge.
fn finish_fit(
    config: &RunConfig,
    command: &str,
    inputs: Vec<(String, String)>,
    options: Vec<(String, String)>,
    fit: &FitResult,
    extra_results: Vec<(String, String)>,
    file_name: &str,
) -> Result<(), CliError> {
    let mut results = fit_result_rows(fit);
    results.extend(extra_results);
    let path = write_fit_report(config, command, inputs, options, results, file_name)?;
    for p in &fit.params {
        println!("{} = {:.6e} ± {:.3e}", p.name, p.value, p.std_error);
    }
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    println!("report: {}", path.display());
    if !fit.converged {
        return Err(CliError::NotConverged(format!(
            "{command} hit the iteration cap (rss {:e}); best-so-far parameters were written to {}",
            fit.rss,
            path.display()
        )));
    }
    Ok(())
}

pub fn fit_spectrum(config: &RunConfig, args: &FitSpectrumArgs) -> Result<(), CliError> {
    let format = SpectrumFormat::from_label(&args.format)
        .ok_or_else(|| CliError::Usage(format!("unknown format `{}`", args.format)))?;
    if !matches!(
        format,
        SpectrumFormat::FreqCounts | SpectrumFormat::WavelengthCounts
    ) {
        return Err(CliError::Usage(
            "fit-spectrum expects freq_counts or wavelength_counts input".into(),
        ));
    }
    if !(1..=2).contains(&args.peaks) {
        return Err(CliError::Usage("peaks must be 1 or 2".into()));
    }
    // Validate every flag before touching the filesystem so that bad
    // options report as usage errors even when inputs are also bad.
    let peak_fit = match args.model.as_str() {
        "lorentzian" => fit::fit_lorentzian_with,
        "gaussian" => fit::fit_gaussian_with,
        other => return Err(CliError::Usage(format!("unknown model `{other}`"))),
    };
    let options = solver_options(args.max_iterations)?;
    let data = load_spectrum(&args.input, format).map_err(data_err)?;
    let fit = peak_fit(&data, args.peaks, &options).map_err(fit_err)?;
    finish_fit(
        config,
        "fit-spectrum",
        vec![(args.input.display().to_string(), digest_file(&args.input)?)],
        command_rows(&[
            ("input", args.input.display().to_string()),
            ("format", args.format.clone()),
            ("model", args.model.clone()),
            ("peaks", args.peaks.to_string()),
            ("max_iterations", args.max_iterations.to_string()),
        ]),
        &fit,
        Vec::new(),
        "fit_spectrum_report.txt",
    )
}

pub fn fit_g2(config: &RunConfig, args: &FitG2Args) -> Result<(), CliError> {
    let options = solver_options(args.max_iterations)?;
    let data = load_spectrum(&args.input, SpectrumFormat::DelayCounts).map_err(data_err)?;
    let fit = fit::fit_g2_with(&data, &options).map_err(fit_err)?;
    finish_fit(
        config,
        "fit-g2",
        vec![(args.input.display().to_string(), digest_file(&args.input)?)],
        command_rows(&[
            ("input", args.input.display().to_string()),
            ("max_iterations", args.max_iterations.to_string()),
        ]),
        &fit,
        Vec::new(),
        "fit_g2_report.txt",
    )
}

pub fn fit_polarization(config: &RunConfig, args: &FitPolarizationArgs) -> Result<(), CliError> {
    let options = solver_options(args.max_iterations)?;
    let a = load_spectrum(&args.input_a, SpectrumFormat::AngleIntensity).map_err(data_err)?;
    let b = load_spectrum(&args.input_b, SpectrumFormat::AngleIntensity).map_err(data_err)?;
    let fit_a = fit::fit_polarization_with(&a, &options).map_err(fit_err)?;
    let fit_b = fit::fit_polarization_with(&b, &options).map_err(fit_err)?;
    let report = fit::polarization_orthogonality(
        fit_a.value("theta0_deg"),
        fit_b.value("theta0_deg"),
        args.ortho_tol_deg,
    );

    let mut results = Vec::new();
    for (label, fit) in [("a", &fit_a), ("b", &fit_b)] {
        for p in &fit.params {
            results.push((
                format!("series_{label}.{}", p.name),
                format!("{:e}", p.value),
            ));
            results.push((
                format!("series_{label}.std_error.{}", p.name),
                format!("{:e}", p.std_error),
            ));
        }
        results.push((format!("series_{label}.rss"), format!("{:e}", fit.rss)));
    }
    results.push((
        "hwp_separation_deg".into(),
        format!("{:e}", report.hwp_separation_deg),
    ));
    results.push((
        "polarization_separation_deg".into(),
        format!("{:e}", report.polarization_separation_deg),
    ));
    results.push((
        "deviation_deg".into(),
        format!("{:e}", report.deviation_deg),
    ));
    results.push(("perpendicular".into(), report.perpendicular.to_string()));

    let path = write_fit_report(
        config,
        "fit-polarization",
        vec![
            (
                args.input_a.display().to_string(),
                digest_file(&args.input_a)?,
            ),
            (
                args.input_b.display().to_string(),
                digest_file(&args.input_b)?,
            ),
        ],
        command_rows(&[
            ("input_a", args.input_a.display().to_string()),
            ("input_b", args.input_b.display().to_string()),
            ("ortho_tol_deg", format!("{:e}", args.ortho_tol_deg)),
            ("max_iterations", args.max_iterations.to_string()),
        ]),
        results,
        "fit_polarization_report.txt",
    )?;
    println!(
        "theta0_a = {:.3}°, theta0_b = {:.3}°, separation = {:.3}° HWP ({:.3}° polarization)",
        fit_a.value("theta0_deg"),
        fit_b.value("theta0_deg"),
        report.hwp_separation_deg,
        report.polarization_separation_deg,
    );
    println!(
        "perpendicular: {} (deviation {:.3}°, tolerance {:.3}°)",
        report.perpendicular, report.deviation_deg, args.ortho_tol_deg
    );
    println!("report: {}", path.display());
    if !(fit_a.converged && fit_b.converged) {
        return Err(CliError::NotConverged(
            "a polarization fit hit the iteration cap".into(),
        ));
    }
    Ok(())
}

pub fn fit_alpha(config: &RunConfig, args: &FitAlphaArgs) -> Result<(), CliError> {
    let selection = LineSelection::from_label(&args.lines)
        .ok_or_else(|| CliError::Usage(format!("unknown line selection `{}`", args.lines)))?;
    let direction = parse_direction(&args.direction)?;
    let measured = load_sweep(&args.input).map_err(data_err)?;
    let options = AlphaOptions {
        direction,
        selection,
        fit: solver_options(args.max_iterations)?,
    };
    let alpha = fit::fit_alpha(
        &measured,
        &config.ground,
        &config.excited,
        &config.constants,
        config.orientation,
        &options,
    )
    .map_err(fit_err)?;

    let extra = vec![
        ("alpha_g".to_string(), format!("{:e}", alpha.alpha_g)),
        ("alpha_u".to_string(), format!("{:e}", alpha.alpha_u)),
        ("rss_scaled".to_string(), format!("{:e}", alpha.rss_scaled)),
        (
            "rss_unscaled".to_string(),
            format!("{:e}", alpha.rss_unscaled),
        ),
        (
            "rss_ratio".to_string(),
            format!(
                "{:e}",
                alpha.rss_unscaled / alpha.rss_scaled.max(f64::MIN_POSITIVE)
            ),
        ),
    ];
    println!(
        "alpha_g = {:.4}, alpha_u = {:.4}; rss {:.4e} -> {:.4e}",
        alpha.alpha_g, alpha.alpha_u, alpha.rss_unscaled, alpha.rss_scaled
    );
    finish_fit(
        config,
        "fit-alpha",
        vec![(args.input.display().to_string(), digest_file(&args.input)?)],
        command_rows(&[
            ("input", args.input.display().to_string()),
            ("lines", args.lines.clone()),
            ("direction", args.direction.clone()),
            ("max_iterations", args.max_iterations.to_string()),
        ]),
        &alpha.fit,
        extra,
        "fit_alpha_report.txt",
    )
}

pub fn synth_spectrum(config: &RunConfig, args: &SynthSpectrumArgs) -> Result<(), CliError> {
    let family = Family::from_label(&args.family)
        .ok_or_else(|| CliError::Usage(format!("unknown family `{}`", args.family)))?;
    let direction = parse_direction(&args.direction)?;
    let noise = parse_noise(&args.noise_kind, args.noise, config.seed)?;
    if args.points < 2 {
        return Err(CliError::Usage("points must be at least 2".into()));
    }

    let sweep = zeeman_sweep(
        &config.ground,
        &config.excited,
        &config.constants,
        &direction,
        &[args.b_tesla],
        config.orientation,
    )
    .map_err(data_err)?;
    let lines: Vec<snvtk_core::transitions::TransitionLine> = sweep.entries[0]
        .iter()
        .filter(|l| l.family == family)
        .cloned()
        .collect();

    let lo = lines
        .iter()
        .map(|l| l.offset_ghz)
        .fold(f64::INFINITY, f64::min);
    let hi = lines
        .iter()
        .map(|l| l.offset_ghz)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = 10.0 * args.linewidth_ghz;
    let grid = linear_grid(
        args.grid_min.unwrap_or(lo - margin),
        args.grid_max.unwrap_or(hi + margin),
        args.points,
    );

    let spectrum =
        snvtk_core::synth::synth_spectrum(&lines, args.linewidth_ghz, &grid, &noise, args.baseline)
            .map_err(data_err)?;
    let path = out_path(config, &args.out);
    write_spectrum(&spectrum, "offset_ghz,intensity", &path).map_err(data_err)?;
    println!(
        "wrote {} points covering family {} at {} T to {}",
        spectrum.len(),
        family,
        args.b_tesla,
        path.display()
    );
    Ok(())
}

pub fn synth_g2(config: &RunConfig, args: &SynthG2Args) -> Result<(), CliError> {
    let params = G2Params {
        b: args.b,
        c: args.c,
        tau1_ns: args.tau1_ns,
        tau2_ns: args.tau2_ns,
    };
    params.validate().map_err(fit_err)?;
    if args.points < 2 || args.tau_max_ns <= 0.0 {
        return Err(CliError::Usage(
            "need at least 2 points and a positive tau range".into(),
        ));
    }
    let noise = parse_noise(&args.noise_kind, args.noise, config.seed)?;
    let grid = linear_grid(-args.tau_max_ns, args.tau_max_ns, args.points);
    let trace = snvtk_core::synth::synth_g2(&params, &grid, &noise).map_err(data_err)?;
    let path = out_path(config, &args.out);
    write_spectrum(&trace, "tau_ns,g2", &path).map_err(data_err)?;
    println!("wrote {} delay points to {}", trace.len(), path.display());
    Ok(())
}

pub fn synth_zeeman(config: &RunConfig, args: &SynthZeemanArgs) -> Result<(), CliError> {
    let direction = parse_direction(&args.direction)?;
    let families = parse_families(&args.families)?;
    let fields = field_grid(args.b_min, args.b_max, args.steps)?;
    let drift: Vec<f64> = match &args.drift_ghz {
        None => Vec::new(),
        Some(text) => {
            let mut v = Vec::new();
            for token in text.split(',') {
                v.push(token.trim().parse::<f64>().map_err(|_| {
                    CliError::Usage(format!("drift value `{}` is not a number", token.trim()))
                })?);
            }
            v
        }
    };
    let dataset = snvtk_core::synth::synth_zeeman_dataset(
        (args.alpha_g, args.alpha_u),
        &config.ground,
        &config.excited,
        &config.constants,
        config.orientation,
        &direction,
        &fields,
        &families,
        args.jitter_ghz,
        &drift,
        config.seed,
    )
    .map_err(data_err)?;
    let path = out_path(config, &args.out);
    write_measured_sweep(&dataset, &path).map_err(data_err)?;
    println!(
        "wrote {} fields x {} families to {}",
        fields.len(),
        families.len(),
        path.display()
    );
    Ok(())
}

pub fn lifetime_linewidth(args: &LifetimeArgs) -> Result<(), CliError> {
    if !(args.tau1_ns.is_finite() && args.tau1_ns > 0.0) {
        return Err(CliError::Usage("tau1-ns must be positive".into()));
    }
    let mhz = fit::lifetime_limited_linewidth(args.tau1_ns);
    println!("{mhz:.4} MHz");
    Ok(())
}
