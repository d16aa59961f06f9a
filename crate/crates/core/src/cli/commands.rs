//! Subcommand implementations. Each returns the files it wrote.

use std::path::{Path, PathBuf};

use crate::inference::{
    crlb, fi_total_2d, fit_calibration, mc_standard_error, mle_estimate, sample_counts, sub_seed,
    McConfig, Method, SearchBounds,
};
use crate::model::{CalibrationModel, ForwardModel, SpadeModel};
use crate::source::{gamma_from_schmidt_number, schmidt_number};
use crate::VERSION;

use super::config::{Convention, RunConfig};
use super::counts::CountsFile;
use super::table::{num, write_text, Table};
use super::CliError;

fn header(cfg: &RunConfig, command: &str) -> Result<Vec<(String, String)>, CliError> {
    let gamma = cfg.gamma()?;
    let mut meta = vec![
        ("spade_version".to_string(), VERSION.to_string()),
        ("command".to_string(), command.to_string()),
        ("gamma".to_string(), num(gamma)),
        ("schmidt_number".to_string(), num(schmidt_number(gamma))),
        ("separation_units".to_string(), "d = per-arm shift and delta = 2d in projection-waist units".to_string()),
        ("photons".to_string(), cfg.photons.to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
    ];
    if let Some(w) = cfg.schmidt_waist_um {
        meta.push(("schmidt_waist_um".to_string(), num(w)));
    }
    Ok(meta)
}

fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Per-photon bound and total information against the Schmidt number.
pub fn cmd_crlb_curves(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    prepare_out_dir(&cfg.out_dir)?;
    let mut ks = cfg.k_values.clone();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut table = Table::new(header(cfg, "crlb-curves")?, &["K", "gamma", "crlb_per_photon", "fi_total"]);
    for k in ks {
        let g = gamma_from_schmidt_number(k).map_err(CliError::from_core)?;
        table.push(vec![num(k), num(g), num(crlb(k, 1.0)), num(fi_total_2d(g).total())]);
    }
    let path = cfg.out_dir.join("crlb_curves.csv");
    table.write(&path)?;
    Ok(vec![path])
}

/// One renormalized probability matrix per grid separation.
pub fn cmd_matrices(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    prepare_out_dir(&cfg.out_dir)?;
    let model = SpadeModel::new(cfg.schmidt()?, cfg.space());
    let meta = header(cfg, "matrices")?;
    let mut index = Table::new(meta.clone(), &["index", "d", "delta", "off_diagonal_mass", "file"]);
    let mut written = Vec::new();
    for (i, d) in cfg.grid.per_arm_values().into_iter().enumerate() {
        let p = model.theory(d).map_err(CliError::from_core)?;
        let name = format!("matrix_{i:03}.csv");
        let mut m = meta.clone();
        m.push(("d".to_string(), num(d)));
        m.push(("delta".to_string(), num(2.0 * d)));
        let mut table = Table::new(m, &["k_idler", "l_idler", "k_signal", "l_signal", "probability"]);
        for ((idler, signal), v) in model.space().outcomes().zip(p.entries()) {
            table.push(vec![
                idler.k.to_string(),
                idler.l.to_string(),
                signal.k.to_string(),
                signal.l.to_string(),
                num(*v),
            ]);
        }
        let path = cfg.out_dir.join(&name);
        table.write(&path)?;
        written.push(path);
        index.push(vec![i.to_string(), num(d), num(2.0 * d), num(p.off_diagonal_mass()), name]);
    }
    let path = cfg.out_dir.join("matrices.csv");
    index.write(&path)?;
    written.push(path);
    Ok(written)
}

/// Samples labeled counts files over the grid, optionally through a uniform
/// detector distortion `alpha P + beta`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    prepare_out_dir(&cfg.out_dir)?;
    let space = cfg.space();
    let mut model = SpadeModel::new(cfg.schmidt()?, space.clone());
    if cfg.alpha != 1.0 || cfg.beta != 0.0 {
        model = model
            .with_calibration(CalibrationModel::uniform(space.len(), cfg.alpha, cfg.beta))
            .map_err(CliError::from_core)?;
    }
    let mut meta = header(cfg, "simulate")?;
    meta.push(("alpha".to_string(), num(cfg.alpha)));
    meta.push(("beta".to_string(), num(cfg.beta)));
    let mut written = Vec::new();
    for (i, d) in cfg.grid.per_arm_values().into_iter().enumerate() {
        let p = model.probabilities(d).map_err(CliError::from_core)?;
        let counts = sample_counts(&p, cfg.photons, sub_seed(cfg.seed, i as u64)).map_err(CliError::from_core)?;
        let mut file = CountsFile::from_counts(&space, &counts);
        file.separation = Some(d);
        file.convention = Some(Convention::PerArm);
        let path = cfg.out_dir.join(format!("counts_{i:03}.csv"));
        write_text(&path, &file.render(&meta))?;
        written.push(path);
    }
    Ok(written)
}

/// Maximum-likelihood estimate per counts file, optionally after fitting a
/// calibration on the labeled files.
pub fn cmd_estimate(cfg: &RunConfig, files: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    if files.is_empty() {
        return Err(CliError::Usage("estimate needs at least one counts file".into()));
    }
    let space = cfg.space();
    let mut data = Vec::with_capacity(files.len());
    for path in files {
        let file = CountsFile::read(path)?;
        let mut counts = file
            .to_count_matrix(&space)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if counts.total() == 0 {
            return Err(CliError::Data(format!("{}: all counts are zero", path.display())));
        }
        let label = file
            .separation
            .map(|s| file.convention.unwrap_or(cfg.grid.convention).to_per_arm(s));
        if let Some(d) = label {
            if !(d.is_finite() && d >= 0.0) {
                return Err(CliError::Data(format!("{}: separation must be >= 0", path.display())));
            }
            counts = counts.with_separation(d);
        }
        counts.duration = file.duration;
        data.push(counts);
    }
    prepare_out_dir(&cfg.out_dir)?;
    let mut written = Vec::new();
    let mut meta = header(cfg, "estimate")?;
    meta.push(("calibrated".to_string(), cfg.calibrate.to_string()));

    let mut model = SpadeModel::new(cfg.schmidt()?, space.clone());
    if cfg.calibrate {
        let mut labeled = Vec::with_capacity(data.len());
        for (path, counts) in files.iter().zip(&data) {
            let d = counts.separation.ok_or_else(|| {
                CliError::Data(format!("{}: calibration needs a '# separation = ' label", path.display()))
            })?;
            labeled.push((d, counts.clone()));
        }
        let fit = fit_calibration(&labeled, &model).map_err(CliError::from_core)?;
        let mut table = Table::new(meta.clone(), &["k_idler", "l_idler", "k_signal", "l_signal", "alpha", "beta", "rank_deficient"]);
        for (j, (idler, signal)) in space.outcomes().enumerate() {
            table.push(vec![
                idler.k.to_string(),
                idler.l.to_string(),
                signal.k.to_string(),
                signal.l.to_string(),
                num(fit.model.alpha()[j]),
                num(fit.model.beta()[j]),
                fit.rank_deficient.contains(&j).to_string(),
            ]);
        }
        let path = cfg.out_dir.join("calibration.csv");
        table.write(&path)?;
        written.push(path);
        model = model.with_calibration(fit.model).map_err(CliError::from_core)?;
    }

    let mut table = Table::new(
        meta,
        &[
            "file", "label_d", "label_delta", "d_hat", "delta_hat", "log_likelihood", "crlb_var_delta",
            "boundary_hit", "flat", "converged", "status",
        ],
    );
    let bounds = SearchBounds::default();
    for (path, counts) in files.iter().zip(&data) {
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let (label_d, label_delta) = match counts.separation {
            Some(d) => (num(d), num(2.0 * d)),
            None => (String::new(), String::new()),
        };
        let row = match mle_estimate(counts, &model, &bounds) {
            Ok(e) => vec![
                name,
                label_d,
                label_delta,
                num(e.d_hat),
                num(e.delta_hat),
                num(e.log_likelihood),
                num(e.crlb_variance),
                e.boundary_hit.to_string(),
                e.flat.to_string(),
                e.converged.to_string(),
                "ok".to_string(),
            ],
            Err(err) => {
                let mut r = vec![name, label_d, label_delta];
                r.extend(std::iter::repeat_n(String::new(), 7));
                r.push(format!("error: {}", err.to_string().replace(',', ";")));
                r
            }
        };
        table.push(row);
    }
    let path = cfg.out_dir.join("estimates.csv");
    table.write(&path)?;
    written.push(path);
    Ok(written)
}

/// Monte-Carlo spread of the three measurement schemes over the grid.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    prepare_out_dir(&cfg.out_dir)?;
    let schmidt = cfg.schmidt()?;
    let mut mc = McConfig::new(schmidt, cfg.photons, cfg.trials, cfg.seed);
    mc.space = cfg.space();
    let mut meta = header(cfg, "compare")?;
    meta.push(("trials".to_string(), cfg.trials.to_string()));
    meta.push(("projections".to_string(), mc.space.len().to_string()));
    meta.push(("pixels".to_string(), mc.grid.pixels().to_string()));
    let (lo, hi) = mc.grid.span();
    meta.push(("pixel_span".to_string(), format!("{} to {}", num(lo), num(hi))));
    let bound_std = crlb(schmidt.schmidt_number(), cfg.photons as f64).sqrt();
    let mut table = Table::new(
        meta,
        &[
            "d", "delta", "method", "std_err_d", "std_err_delta", "mean_d", "mean_delta",
            "boundary_fraction", "flat_fraction", "crlb_std_delta",
        ],
    );
    for d in cfg.grid.per_arm_values() {
        for method in Method::ALL {
            let s = mc_standard_error(method, &mc, d).map_err(CliError::from_core)?;
            table.push(vec![
                num(d),
                num(2.0 * d),
                method.name().to_string(),
                num(s.std_err_d),
                num(s.std_err_delta()),
                num(s.mean_d),
                num(s.mean_delta()),
                num(s.boundary_fraction),
                num(s.flat_fraction),
                num(bound_std),
            ]);
        }
    }
    let path = cfg.out_dir.join("compare.csv");
    table.write(&path)?;
    Ok(vec![path])
}

