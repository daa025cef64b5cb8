//! Subcommand implementations.

use std::path::Path;

use num_traits::ToPrimitive;

use latstat_core::directions::{self, DirectionLaw, Multiplicity};
use latstat_core::homogeneous::{self, Region};
use latstat_core::lorentz;
use latstat_core::pointset::{self, PointConfig};
use latstat_core::stats::{CountDistribution, EmpiricalCdf, SurvivalCurve};
use latstat_core::window::CongruenceWindow;

use crate::args::{Cli, Command, Figure, LimitMode};
use crate::config::{self, PointSpec};
use crate::csvout::{csv_document, fmt_f64};
use crate::error::CliError;
use crate::manifest::ManifestBuilder;
use crate::svg;

/// Fixed evaluation grid for gap CDF output (and golden fixtures).
pub const GAP_GRID_MAX: f64 = 5.0;
pub const GAP_GRID_STEP: f64 = 0.01;

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Measure {
            window,
            prime_bound,
            out,
        } => measure(window, *prime_bound, out.as_deref(), cli.jobs),
        Command::Gen { config, out } => gen(config, out, cli.jobs),
        Command::Dirs {
            config,
            sigma,
            draws,
            seed,
            out,
            svg,
        } => dirs(config, *sigma, *draws, *seed, out, svg.as_deref(), cli.jobs),
        Command::Gaps { config, out, svg } => gaps(config, out, svg.as_deref(), cli.jobs),
        Command::Fpl {
            config,
            rho,
            xi_max,
            xi_step,
            dirs,
            seed,
            out,
            svg,
        } => fpl(
            config,
            rho,
            *xi_max,
            *xi_step,
            *dirs,
            *seed,
            out,
            svg.as_deref(),
            cli.jobs,
        ),
        Command::LimitMc {
            mode,
            window,
            level,
            shift,
            samples,
            xi_max,
            xi_step,
            sigma,
            c,
            seed,
            out,
            svg,
        } => limit_mc(
            *mode,
            window,
            *level,
            shift,
            *samples,
            *xi_max,
            *xi_step,
            *sigma,
            *c,
            *seed,
            out,
            svg.as_deref(),
            cli.jobs,
        ),
        Command::SiegelCheck {
            level,
            samples,
            seed,
            out,
        } => siegel_check(*level, *samples, *seed, out.as_deref(), cli.jobs),
        Command::ReproduceFigure {
            figure,
            t,
            out,
            svg,
        } => reproduce_figure(*figure, *t, out, svg, cli.jobs),
    }
}

fn read_config_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn uniform_grid(max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(max > 0.0 && step > 0.0 && step <= max) {
        return Err(CliError::Config(format!(
            "bad grid: max = {max}, step = {step}"
        )));
    }
    let n = (max / step).round() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    *grid.last_mut().unwrap() = max;
    Ok(grid)
}

fn measure(
    window_path: &Path,
    prime_bound: u64,
    out: Option<&Path>,
    jobs: usize,
) -> Result<(), CliError> {
    let bytes = read_config_bytes(window_path)?;
    let spec = config::load_window_spec(window_path)?;
    let window = spec.build()?;
    let m = window.measure_with_prime_bound(prime_bound);
    let row = format!(
        "{},{},{},{},{}",
        spec.family,
        window.level(),
        m.finite_level.numer(),
        m.finite_level.denom(),
        fmt_f64(m.as_float()),
    );
    let doc = csv_document(
        "family,level_N,measure_num,measure_den,measure_float",
        [row],
    );
    match out {
        None => {
            print!("{doc}");
            Ok(())
        }
        Some(path) => {
            let mut mb = ManifestBuilder::new("measure");
            mb.config_bytes(&bytes).param("prime_bound", prime_bound);
            mb.write_output(path, doc.as_bytes())?;
            mb.finish(jobs)
        }
    }
}

fn gen(config_path: &Path, out: &Path, jobs: usize) -> Result<(), CliError> {
    let bytes = read_config_bytes(config_path)?;
    let spec = config::load_point_spec(config_path)?;
    let cfg = spec.build()?;
    let batch = pointset::enumerate(&cfg)?;
    let header: Vec<String> = (1..=cfg.dimension).map(|i| format!("x_{i}")).collect();
    let rows = batch
        .iter_points()
        .map(|p| p.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(","));
    let doc = csv_document(&header.join(","), rows);
    let mut mb = ManifestBuilder::new("gen");
    mb.config_bytes(&bytes)
        .param("count", batch.count())
        .param(
            "config_hash_fnv",
            format!("{:016x}", batch.meta.config_hash),
        )
        .param("annulus_slack", fmt_f64(batch.meta.annulus_slack));
    mb.write_output(out, doc.as_bytes())?;
    mb.finish(jobs)
}

fn load_sample(spec: &PointSpec) -> Result<(PointConfig, directions::DirectionSample), CliError> {
    let cfg = spec.build()?;
    let batch = pointset::enumerate(&cfg)?;
    let sample = directions::project_directions(&batch, Multiplicity::Keep)?;
    Ok((cfg, sample))
}

#[allow(clippy::too_many_arguments)]
fn dirs(
    config_path: &Path,
    sigma: f64,
    draws: u64,
    seed: u64,
    out: &Path,
    svg_out: Option<&Path>,
    jobs: usize,
) -> Result<(), CliError> {
    let bytes = read_config_bytes(config_path)?;
    let spec = config::load_point_spec(config_path)?;
    let (cfg, sample) = load_sample(&spec)?;
    let m_f = cfg.window.measure().as_float();
    let dist = directions::local_statistics(
        &sample,
        sigma,
        cfg.annulus_inner,
        cfg.radius,
        m_f,
        &DirectionLaw::Uniform,
        draws,
        seed,
    )?;
    let mut mb = ManifestBuilder::new("dirs");
    mb.config_bytes(&bytes)
        .seed(seed)
        .param("sigma", fmt_f64(sigma))
        .param("draws", draws)
        .param("window_measure", fmt_f64(m_f))
        .param("boundary_ties", dist.ties)
        .param("mean", fmt_f64(dist.mean()));
    write_count_distribution(&dist, out, svg_out, &mut mb)?;
    mb.finish(jobs)
}

fn write_count_distribution(
    dist: &CountDistribution,
    out: &Path,
    svg_out: Option<&Path>,
    mb: &mut ManifestBuilder,
) -> Result<(), CliError> {
    let rows = (0..=dist.max_count())
        .map(|r| format!("{r},{},{}", fmt_f64(dist.prob(r)), fmt_f64(dist.stderr(r))));
    let doc = csv_document("r,prob,stderr", rows);
    mb.write_output(out, doc.as_bytes())?;
    if let Some(svg_path) = svg_out {
        let probs: Vec<(u64, f64)> = (0..=dist.max_count()).map(|r| (r, dist.prob(r))).collect();
        let doc = svg::bar_plot(&probs, "count r", "probability")?;
        mb.write_output(svg_path, doc.as_bytes())?;
    }
    Ok(())
}

fn gaps(
    config_path: &Path,
    out: &Path,
    svg_out: Option<&Path>,
    jobs: usize,
) -> Result<(), CliError> {
    let bytes = read_config_bytes(config_path)?;
    let spec = config::load_point_spec(config_path)?;
    let (_, sample) = load_sample(&spec)?;
    let cdf = directions::gap_distribution(&sample)?;
    let mut mb = ManifestBuilder::new("gaps");
    mb.config_bytes(&bytes)
        .param("directions", sample.total())
        .param("mean_gap", fmt_f64(cdf.mean()));
    write_gap_outputs(&cdf, out, svg_out, &mut mb)?;
    mb.finish(jobs)
}

fn write_gap_outputs(
    cdf: &EmpiricalCdf,
    out: &Path,
    svg_out: Option<&Path>,
    mb: &mut ManifestBuilder,
) -> Result<(), CliError> {
    let grid = uniform_grid(GAP_GRID_MAX, GAP_GRID_STEP)?;
    let values = cdf.on_grid(&grid);
    let rows = values
        .iter()
        .map(|(x, f)| format!("{},{}", fmt_f64(*x), fmt_f64(*f)));
    let doc = csv_document("gap,cdf", rows);
    mb.write_output(out, doc.as_bytes())?;
    if let Some(svg_path) = svg_out {
        let doc = svg::step_plot(&values, "normalized gap", "cdf")?;
        mb.write_output(svg_path, doc.as_bytes())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fpl(
    config_path: &Path,
    rhos: &[f64],
    xi_max: f64,
    xi_step: f64,
    n_dirs: u64,
    seed: u64,
    out: &Path,
    svg_out: Option<&Path>,
    jobs: usize,
) -> Result<(), CliError> {
    let bytes = read_config_bytes(config_path)?;
    let spec = config::load_point_spec(config_path)?;
    let cfg = spec.build()?;
    let q = spec.start_point()?;
    if q.len() != cfg.dimension {
        return Err(CliError::Config("start point dimension mismatch".into()));
    }
    // If q coincides with a set point, leave out the ball centred there.
    let alpha = cfg.shift.as_f64();
    let candidate: Vec<i64> = q
        .iter()
        .zip(&alpha)
        .map(|(qi, ai)| (qi - ai).round() as i64)
        .collect();
    let on_point = q
        .iter()
        .zip(&alpha)
        .zip(&candidate)
        .all(|((qi, ai), mi)| *qi == *mi as f64 + ai);
    let excluded = (on_point && cfg.window.contains(&candidate)).then_some(candidate);

    let grid = uniform_grid(xi_max, xi_step)?;
    let curves = lorentz::fpl_distribution(
        &cfg.window,
        &cfg.shift,
        excluded.clone(),
        &q,
        rhos,
        &grid,
        n_dirs,
        seed,
    )?;
    let mut mb = ManifestBuilder::new("fpl");
    mb.config_bytes(&bytes)
        .seed(seed)
        .param("rho", format!("{rhos:?}"))
        .param("xi_max", fmt_f64(xi_max))
        .param("dirs", n_dirs)
        .param("excluded_centre", format!("{excluded:?}"));
    // Single-rho output follows the documented schema; multi-rho output
    // gains a leading rho column.
    let doc = if let [(_, curve)] = curves.as_slice() {
        survival_csv(curve, None)
    } else {
        let mut doc = String::from("rho,xi,survival,stderr,censored_frac\n");
        for (rho, curve) in &curves {
            doc.push_str(&survival_rows(curve, Some(*rho)));
        }
        doc
    };
    mb.write_output(out, doc.as_bytes())?;
    if let Some(svg_path) = svg_out {
        let (_, curve) = &curves[0];
        let pts: Vec<(f64, f64)> = curve
            .xi
            .iter()
            .copied()
            .zip(curve.survival.iter().copied())
            .collect();
        let doc = svg::step_plot(&pts, "xi", "survival")?;
        mb.write_output(svg_path, doc.as_bytes())?;
    }
    mb.finish(jobs)
}

fn survival_rows(curve: &SurvivalCurve, rho: Option<f64>) -> String {
    let mut out = String::new();
    for i in 0..curve.xi.len() {
        if let Some(r) = rho {
            out.push_str(&fmt_f64(r));
            out.push(',');
        }
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(curve.xi[i]),
            fmt_f64(curve.survival[i]),
            fmt_f64(curve.stderr[i]),
            fmt_f64(curve.censored_frac),
        ));
    }
    out
}

fn survival_csv(curve: &SurvivalCurve, rho: Option<f64>) -> String {
    let header = match rho {
        Some(_) => "rho,xi,survival,stderr,censored_frac",
        None => "xi,survival,stderr,censored_frac",
    };
    format!("{header}\n{}", survival_rows(curve, rho))
}

#[allow(clippy::too_many_arguments)]
fn limit_mc(
    mode: LimitMode,
    window_path: &Path,
    level: Option<u64>,
    shift: &str,
    samples: u64,
    xi_max: f64,
    xi_step: f64,
    sigma: f64,
    c: f64,
    seed: u64,
    out: &Path,
    svg_out: Option<&Path>,
    jobs: usize,
) -> Result<(), CliError> {
    let bytes = read_config_bytes(window_path)?;
    let spec = config::load_window_spec(window_path)?;
    let window = spec.build()?;
    let mut residues = window.reduce_mod_level().map_err(|e| {
        CliError::Config(format!(
            "limit-mc needs a finite-level window ({e}); truncate exact windows first"
        ))
    })?;
    if let Some(level) = level {
        residues = residues.lift_to(level)?;
    }
    let shift_mode = config::parse_shift_mode(shift)?;
    let mut mb = ManifestBuilder::new("limit-mc");
    mb.config_bytes(&bytes)
        .seed(seed)
        .param("samples", samples)
        .param("level", residues.modulus())
        .param("shift", shift)
        .param(
            "window_density",
            fmt_f64(residues.density().to_f64().unwrap_or(f64::NAN)),
        );
    match mode {
        LimitMode::Fpl => {
            let grid = uniform_grid(xi_max, xi_step)?;
            let curve = homogeneous::limit_fpl_mc(&grid, &residues, &shift_mode, samples, seed)?;
            mb.param("mode", "fpl").param("xi_max", fmt_f64(xi_max));
            mb.write_output(out, survival_csv(&curve, None).as_bytes())?;
            if let Some(svg_path) = svg_out {
                let pts: Vec<(f64, f64)> = curve
                    .xi
                    .iter()
                    .copied()
                    .zip(curve.survival.iter().copied())
                    .collect();
                mb.write_output(svg_path, svg::step_plot(&pts, "xi", "survival")?.as_bytes())?;
            }
        }
        LimitMode::Dir => {
            let dist = homogeneous::limit_dir_mc(sigma, c, &residues, &shift_mode, samples, seed)?;
            mb.param("mode", "dir")
                .param("sigma", fmt_f64(sigma))
                .param("c", fmt_f64(c))
                .param("mean", fmt_f64(dist.mean()));
            write_count_distribution(&dist, out, svg_out, &mut mb)?;
        }
    }
    mb.finish(jobs)
}

fn siegel_check(
    level: u64,
    samples: u64,
    seed: u64,
    out: Option<&Path>,
    jobs: usize,
) -> Result<(), CliError> {
    let primes: Vec<u64> = latstat_core::primes::primes_below(level + 1)
        .into_iter()
        .filter(|p| level.is_multiple_of(*p))
        .collect();
    let radical: u64 = primes.iter().product();
    let trivial = CongruenceWindow::trivial(2)?.reduce_mod_level()?;
    let primitive = CongruenceWindow::primitive(2, &primes)?.reduce_mod_level()?;
    let unit_box = Region::Box {
        lo: [-1.0, -1.0],
        hi: [1.0, 1.0],
    };
    let cases: Vec<(String, &latstat_core::window::ResidueWindow, Region, bool)> = vec![
        (
            "box[-1,1]^2 linear trivial N=1".into(),
            &trivial,
            unit_box,
            false,
        ),
        (
            format!("box[-1,1]^2 affine primitive N={radical}"),
            &primitive,
            unit_box,
            true,
        ),
        (
            format!("cylinder xi=2 linear primitive N={radical}"),
            &primitive,
            Region::cylinder(2.0)?,
            false,
        ),
        (
            format!("ball r=1.5 affine primitive N={radical}"),
            &primitive,
            Region::Ball { radius: 1.5 },
            true,
        ),
    ];
    let mut rows = Vec::new();
    for (i, (label, window, region, affine)) in cases.iter().enumerate() {
        let check = homogeneous::mean_value_check(
            window,
            region,
            *affine,
            samples,
            seed.wrapping_add(i as u64),
        )?;
        rows.push(format!(
            "{label},{},{},{},{}",
            fmt_f64(check.expected),
            fmt_f64(check.empirical),
            fmt_f64(check.stderr),
            fmt_f64(check.zscore),
        ));
    }
    let doc = csv_document("region,expected,empirical,stderr,zscore", rows);
    match out {
        None => {
            print!("{doc}");
            Ok(())
        }
        Some(path) => {
            let mut mb = ManifestBuilder::new("siegel-check");
            mb.config_bytes(format!("level={level};samples={samples}").as_bytes())
                .seed(seed)
                .param("level", level)
                .param("samples", samples);
            mb.write_output(path, doc.as_bytes())?;
            mb.finish(jobs)
        }
    }
}

fn reproduce_figure(
    figure: Figure,
    t: f64,
    out: &Path,
    svg_out: &Path,
    jobs: usize,
) -> Result<(), CliError> {
    use latstat_core::pointset::{IrrationalCoord, Shift};
    let window = match figure {
        Figure::GapsHalfshift | Figure::GapsIrrational => CongruenceWindow::primitive_exact(2)?,
        Figure::GapsSquarefreeHalfshift | Figure::GapsSquarefreeIrrational => {
            CongruenceWindow::kfree_exact(2, vec![Some(2), Some(2)])?
        }
    };
    let shift = match figure {
        Figure::GapsHalfshift | Figure::GapsSquarefreeHalfshift => Shift::Rational(vec![
            num_rational::Rational64::new(1, 2),
            num_rational::Rational64::new(1, 2),
        ]),
        Figure::GapsIrrational | Figure::GapsSquarefreeIrrational => Shift::Irrational(vec![
            IrrationalCoord {
                label: "sqrt(2)".into(),
                value: 2f64.sqrt(),
            },
            IrrationalCoord {
                label: "sqrt(3)".into(),
                value: 3f64.sqrt(),
            },
        ]),
    };
    let cfg = PointConfig::new(window, shift, 0.0, t)?;
    let batch = pointset::enumerate(&cfg)?;
    let sample = directions::project_directions(&batch, Multiplicity::Keep)?;
    let cdf = directions::gap_distribution(&sample)?;
    let mut mb = ManifestBuilder::new("reproduce-figure");
    mb.config_bytes(format!("figure={figure:?};T={t}").as_bytes())
        .param("figure", format!("{figure:?}"))
        .param("T", fmt_f64(t))
        .param("directions", sample.total())
        .param("mean_gap", fmt_f64(cdf.mean()));
    write_gap_outputs(&cdf, out, Some(svg_out), &mut mb)?;
    mb.finish(jobs)
}
