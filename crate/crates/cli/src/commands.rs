//! The pipeline commands: generate → evolve → analyze → verdict, plus the
//! standalone harmonic-measure table.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortexcrit::grid::{mk_initial_configuration, VectorField3D};
use vortexcrit::harmonic::{
    harmonic_measure_numeric, random_slits, solve_m, solynin_h, SlitSet,
};
use vortexcrit::monitor::{criticality_verdict, BmoParams, CriticalityTimeline, VerdictParams};
use vortexcrit::oscillation::{bmo_phi_norm, direction_field, OscillationField};
use vortexcrit::slf;
use vortexcrit::solver::{evolve_from, FieldHandle, SimState, Stepper, Timeline};
use vortexcrit::sparseness::{
    fibonacci_directions, lattice_directions, sparseness_scale_1d, sparseness_scale_pointwise,
    superlevel_mask, volume_decay_series, ScaleScan,
};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::manifest::ManifestWriter;
use crate::timeline::TimelineIndex;

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

/// Build the two-ring initial field and write `initial.slf1`.
pub fn cmd_generate(cfg: &Config, config_path: &Path, out: &Path, seed: u64) -> CliResult<PathBuf> {
    let grid = cfg.grid_spec()?;
    let mk = cfg.mk_config()?;
    let field = mk_initial_configuration(&mk, &grid)?;
    fs::create_dir_all(out)?;
    let path = out.join("initial.slf1");
    slf::write_field(&path, &field)?;
    let mut manifest = ManifestWriter::new("generate", seed, config_path, out)?;
    manifest.record_output(&path)?;
    manifest.commit()?;
    println!(
        "generate: wrote {} (n = {}, ‖ω‖∞ = {:.4})",
        path.display(),
        grid.n(),
        field.linf_max_norm()
    );
    Ok(path)
}

fn initial_field(cfg: &Config, out: &Path) -> CliResult<(VectorField3D<f64>, Option<PathBuf>)> {
    let path = out.join("initial.slf1");
    if path.is_file() {
        Ok((slf::read_field(&path)?, Some(path)))
    } else {
        let grid = cfg.grid_spec()?;
        let mk = cfg.mk_config()?;
        Ok((mk_initial_configuration(&mk, &grid)?, None))
    }
}

fn write_diagnostics_csv(dir: &Path, timeline: &Timeline<f64>) -> CliResult<PathBuf> {
    let mut text = String::from("t,energy,enstrophy,helicity,omega_linf,omega_l1\n");
    for s in timeline.snapshots() {
        let d = &s.diagnostics;
        writeln!(
            text,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            s.time, d.energy, d.enstrophy, d.helicity, d.omega_linf, d.omega_l1
        )
        .expect("write to string");
    }
    let path = dir.join("diagnostics.csv");
    write_text(&path, &text)?;
    Ok(path)
}

/// Integrate to `t_final`, recording snapshots. With `resume`, continue the
/// timeline found in the output directory from its last stored snapshot. On
/// instability the partial timeline is persisted before the error
/// propagates (exit code 3).
pub fn cmd_evolve(
    cfg: &Config,
    config_path: &Path,
    out: &Path,
    seed: u64,
    resume: bool,
) -> CliResult<()> {
    fs::create_dir_all(out.join("fields"))?;
    let mut manifest = ManifestWriter::new(if resume { "evolve-resume" } else { "evolve" }, seed, config_path, out)?;
    let run = cfg.evolve_config();
    let store = cfg.solver.store_fields;

    let (stepper, mut state, mut timeline) = if resume {
        let index = TimelineIndex::load(out)?;
        let timeline = index.to_timeline(out)?;
        let last = timeline
            .snapshots()
            .last()
            .ok_or_else(|| CliError::Config("cannot resume: timeline has no snapshots".into()))?;
        let handle = last.field.as_ref().ok_or_else(|| {
            CliError::Config("cannot resume: last snapshot has no stored field".into())
        })?;
        let field = handle.load()?;
        if let FieldHandle::File(p) = handle {
            manifest.record_input(p)?;
        }
        let stepper = Stepper::new(*field.grid(), run.dealias);
        let mut state = SimState::from_field(&field, run.viscosity, run.dealias)?;
        state.time = last.time;
        (stepper, state, timeline)
    } else {
        let (field, source) = initial_field(cfg, out)?;
        if let Some(p) = &source {
            manifest.record_input(p)?;
        }
        let stepper = Stepper::new(*field.grid(), run.dealias);
        let state = SimState::from_field(&field, run.viscosity, run.dealias)?;
        let timeline = Timeline::new(*field.grid(), run.viscosity);
        (stepper, state, timeline)
    };

    let out_buf = out.to_path_buf();
    let mut field_paths: Vec<PathBuf> = Vec::new();
    let result = evolve_from(&stepper, &mut state, &run, &mut timeline, &mut |index, _t, field| {
        if !store {
            return Ok(None);
        }
        let rel = PathBuf::from(format!("fields/snap_{index:04}.slf1"));
        let path = out_buf.join(&rel);
        slf::write_field(&path, field)?;
        field_paths.push(path);
        Ok(Some(FieldHandle::File(rel)))
    });

    // Persist whatever was recorded, then propagate any instability.
    let diag_path = write_diagnostics_csv(out, &timeline)?;
    TimelineIndex::from_timeline(&timeline).save(out)?;
    for p in &field_paths {
        manifest.record_output(p)?;
    }
    manifest.record_output(&diag_path)?;
    manifest.record_output(&out.join("timeline.json"))?;
    manifest.commit()?;

    result?;
    let last = timeline.snapshots().last().expect("at least the initial snapshot");
    println!(
        "evolve: {} snapshots to t = {:.4} (‖ω‖∞ = {:.4})",
        timeline.snapshots().len(),
        last.time,
        last.diagnostics.omega_linf
    );
    Ok(())
}

/// Analysis outputs per stored snapshot: sparseness scale, volume decay
/// products, direction-field bmo table.
pub fn cmd_analyze(
    cfg: &Config,
    config_path: &Path,
    timeline_dir: &Path,
    out: &Path,
    seed: u64,
) -> CliResult<()> {
    let index = TimelineIndex::load(timeline_dir)?;
    let timeline = index.to_timeline(timeline_dir)?;
    let msol = solve_m::<f64>();
    let lambda = cfg.sparseness.lambda.unwrap_or(msol.lambda);
    let delta = cfg.sparseness.delta;
    let weight = cfg.weight_spec()?;
    let convention = cfg.phi_argument()?;
    let mode = cfg.sparseness_mode()?.to_string();
    let centers = cfg.centers_mode()?;

    let mut manifest = ManifestWriter::new("analyze", seed, config_path, out)?;
    fs::create_dir_all(out)?;

    // Volume decay first: it validates that every snapshot has a field.
    let decay = volume_decay_series(&timeline, lambda, &weight, convention)?;

    let directions = {
        let mut d = lattice_directions::<f64>();
        if cfg.sparseness.directions > 13 {
            d.extend(fibonacci_directions(cfg.sparseness.directions - 13));
        }
        d
    };

    let header = format!(
        "# lambda={lambda:.6} delta={delta} mode={mode} weight={:?} k={} phi_argument={:?} floor={} stride={} centers={:?} seed={seed}\n",
        cfg.oscillation.weight, cfg.oscillation.k, convention,
        cfg.oscillation.floor_fraction, cfg.oscillation.stride, centers,
    );

    let mut sparseness_csv = header.clone();
    sparseness_csv.push_str("t,omega_linf,volume,r_s,not_sparse_at_any_scale,non_monotone,degenerate\n");
    let mut bmo_csv = header.clone();
    bmo_csv.push_str("t,r,max_oscillation,phi,ratio,evaluated_cubes,skipped_cubes,sup_part,l1_part,total\n");
    let mut analysis_rows = Vec::new();

    for snap in timeline.snapshots() {
        let field = snap
            .field
            .as_ref()
            .expect("volume_decay_series checked stored fields")
            .load()?;
        let masks = superlevel_mask(&field, lambda)?;
        let (scan, degenerate): (Option<ScaleScan<f64>>, bool) =
            if masks.degenerate_zero_field || masks.union.is_empty() {
                (None, true)
            } else if mode == "3d" {
                (Some(sparseness_scale_pointwise(&masks, delta)?), false)
            } else {
                (Some(sparseness_scale_1d(&masks.union, delta, &directions)?), false)
            };
        let (r_s, not_sparse, non_monotone) = match &scan {
            Some(s) => (s.scale, s.scale.is_none(), s.non_monotone),
            None => (None, false, false),
        };
        writeln!(
            sparseness_csv,
            "{:.12e},{:.12e},{:.12e},{},{},{},{}",
            snap.time,
            snap.diagnostics.omega_linf,
            masks.union.volume(),
            fmt_opt(r_s),
            not_sparse,
            non_monotone,
            degenerate
        )
        .expect("write to string");

        let bmo = {
            let df = direction_field(&field, cfg.oscillation.floor_fraction);
            match df {
                Ok(df) if !df.degenerate_zero_field => {
                    let of = OscillationField::direction(&df);
                    let rep = bmo_phi_norm(
                        &of,
                        &weight,
                        &cfg.oscillation.scales,
                        cfg.oscillation.stride,
                        centers,
                    )?;
                    for row in &rep.per_scale {
                        writeln!(
                            bmo_csv,
                            "{:.12e},{:.6},{:.12e},{:.12e},{:.12e},{},{},{:.12e},{:.12e},{:.12e}",
                            snap.time,
                            row.r,
                            row.max_oscillation,
                            row.phi,
                            row.ratio,
                            row.evaluated_cubes,
                            row.skipped_cubes,
                            rep.sup_part,
                            rep.l1_part,
                            rep.total
                        )
                        .expect("write to string");
                    }
                    Some(rep)
                }
                _ => None,
            }
        };
        analysis_rows.push(serde_json::json!({
            "t": snap.time,
            "omega_linf": snap.diagnostics.omega_linf,
            "r_s": r_s,
            "not_sparse_at_any_scale": not_sparse,
            "non_monotone": non_monotone,
            "degenerate": degenerate,
            "scanned": scan.as_ref().map(|s| &s.scanned),
            "bmo": bmo,
        }));
    }

    let mut decay_csv = header.clone();
    decay_csv.push_str("t,omega_linf,volume,compensated_l1,compensated_log,phi\n");
    for row in &decay {
        writeln!(
            decay_csv,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            row.time, row.omega_linf, row.volume, row.compensated_l1, row.compensated_log, row.phi_value
        )
        .expect("write to string");
    }

    let analysis = serde_json::json!({
        "lambda": lambda,
        "delta": delta,
        "mode": mode,
        "m": msol.m,
        "h_star": msol.h_star,
        "snapshots": analysis_rows,
    });

    let files = [
        ("sparseness.csv", sparseness_csv),
        ("volume_decay.csv", decay_csv),
        ("bmo.csv", bmo_csv),
        ("analysis.json", serde_json::to_string_pretty(&analysis)?),
    ];
    for (name, text) in files {
        let path = out.join(name);
        write_text(&path, &text)?;
        manifest.record_output(&path)?;
    }
    manifest.commit()?;
    println!("analyze: {} snapshots → {}", timeline.snapshots().len(), out.display());
    Ok(())
}

/// Harmonic-measure table: `(alpha, closed_form, numeric, abs_error)` over
/// the configured α grid, plus optional random slit sets per α (numeric vs
/// the extremal closed form).
pub fn cmd_harmonic(cfg: &Config, config_path: &Path, out: &Path, seed: u64) -> CliResult<()> {
    let mut manifest = ManifestWriter::new("harmonic", seed, config_path, out)?;
    fs::create_dir_all(out)?;
    let grid_n = cfg.harmonic.grid_n;
    let min_len = 4.0 / grid_n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = format!("# grid_n={grid_n} random_per_alpha={} seed={seed}\n", cfg.harmonic.random_per_alpha);
    text.push_str("alpha,closed_form,numeric,abs_error\n");
    for &alpha in &cfg.harmonic.alphas {
        let closed = solynin_h(alpha)?;
        let k = SlitSet::k_alpha(alpha)?;
        let numeric = harmonic_measure_numeric(&k, grid_n)?.value;
        writeln!(text, "{alpha},{closed:.12e},{numeric:.12e},{:.12e}", (numeric - closed).abs())
            .expect("write to string");
        for _ in 0..cfg.harmonic.random_per_alpha {
            if alpha >= 1.0 {
                continue;
            }
            let k = random_slits(alpha, cfg.harmonic.max_intervals, min_len, &mut rng)?;
            let numeric = harmonic_measure_numeric(&k, grid_n)?.value;
            writeln!(text, "{alpha},{closed:.12e},{numeric:.12e},{:.12e}", (numeric - closed).abs())
                .expect("write to string");
        }
    }
    let path = out.join("harmonic.csv");
    write_text(&path, &text)?;
    manifest.record_output(&path)?;
    manifest.commit()?;
    println!("harmonic: table → {}", path.display());
    Ok(())
}

/// Assemble the criticality verdict for a stored timeline.
pub fn cmd_verdict(
    cfg: &Config,
    config_path: &Path,
    timeline_dir: &Path,
    out: &Path,
    seed: u64,
) -> CliResult<CriticalityTimeline<f64>> {
    let index = TimelineIndex::load(timeline_dir)?;
    let timeline = index.to_timeline(timeline_dir)?;
    let mut params = VerdictParams::new(cfg.constants(), cfg.monitor.k, cfg.phi_argument()?)?;
    if cfg.monitor.bmo_summary {
        params = params.with_bmo(BmoParams {
            floor_fraction: cfg.oscillation.floor_fraction,
            scales: cfg.oscillation.scales.clone(),
            stride: cfg.oscillation.stride,
            centers: cfg.centers_mode()?,
        });
    }
    let verdict = criticality_verdict(&timeline, &params)?;

    let mut manifest = ManifestWriter::new("verdict", seed, config_path, out)?;
    fs::create_dir_all(out)?;
    let json_path = out.join("verdict.json");
    write_text(&json_path, &serde_json::to_string_pretty(&verdict)?)?;

    let mut csv = format!(
        "# lambda={:.6} delta={} k={} constants=({},{},{},{},{}) phi_argument={:?}\n",
        verdict.lambda,
        verdict.delta,
        verdict.k,
        verdict.constants.c_star,
        verdict.constants.c1,
        verdict.constants.c2,
        verdict.constants.c3,
        verdict.constants.c4,
        verdict.phi_argument,
    );
    csv.push_str("t,omega_linf,omega_l1,escape,r_s_measured,not_sparse,rho_s,r_s_predicted,r_s_predicted_alt,bmo_sup,bmo_total,compensated_l1,compensated_log\n");
    for row in &verdict.rows {
        writeln!(
            csv,
            "{:.12e},{:.12e},{:.12e},{},{},{},{:.12e},{:.12e},{:.12e},{},{},{:.12e},{:.12e}",
            row.time,
            row.omega_linf,
            row.omega_l1,
            row.escape,
            fmt_opt(row.r_s_measured),
            row.not_sparse_at_any_scale,
            row.rho_s,
            row.r_s_predicted,
            row.r_s_predicted_alt,
            fmt_opt(row.bmo_sup),
            fmt_opt(row.bmo_total),
            row.compensated_l1,
            row.compensated_log
        )
        .expect("write to string");
    }
    let csv_path = out.join("criticality.csv");
    write_text(&csv_path, &csv)?;
    manifest.record_output(&json_path)?;
    manifest.record_output(&csv_path)?;
    manifest.commit()?;
    println!("verdict: {:?} ({})", verdict.verdict, verdict.reason);
    Ok(verdict)
}

/// Full pipeline: generate → evolve → analyze → verdict, one output dir.
pub fn cmd_all(cfg: &Config, config_path: &Path, out: &Path, seed: u64) -> CliResult<()> {
    cmd_generate(cfg, config_path, out, seed)?;
    cmd_evolve(cfg, config_path, out, seed, false)?;
    cmd_analyze(cfg, config_path, out, out, seed)?;
    cmd_verdict(cfg, config_path, out, out, seed)?;
    Ok(())
}
