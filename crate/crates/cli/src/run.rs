//! Executes a run configuration into a single output table.

use pstchain::analysis::{
    detect_first_maximum, level_shift_stats, site_probabilities, speed_ratio, window_curvature, window_width,
};
use pstchain::design::{design_channel, NamedFamily, PstChannel};
use pstchain::disorder::{echo_decay, fidelity_vs_strength, run_ensemble, DisorderModel, RNG_ALGORITHM_ID};
use pstchain::dynamics::{default_points, fidelity_trace, time_grid, FidelityTrace};
use pstchain::inverse_eigen::reconstruct_couplings;
use pstchain::spectra::{commensurate_adjust, generate_spectrum};
use serde_json::{json, Value};

use crate::artifact::{num, Artifact, RngInfo};
use crate::config::{
    AnalyzeConfig, ChainConfig, ChainSpec, DisorderSpec, EnsembleConfig, GridSpec, ReproduceConfig, RunConfig,
    SimulateConfig, SpectrumConfig,
};
use crate::error::{CliError, Result};

pub fn execute(run: &RunConfig) -> Result<Artifact> {
    match run {
        RunConfig::Spectrum(c) => spectrum(c),
        RunConfig::Chain(c) => chain(c),
        RunConfig::Simulate(c) => simulate(c),
        RunConfig::Ensemble(c) => ensemble(c),
        RunConfig::Analyze(c) => analyze(c),
        RunConfig::Reproduce(c) => summary(c),
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.5 && threshold < 1.0 {
        Ok(())
    } else {
        Err(config_error(format!(
            "--threshold must lie in (0.5, 1), got {threshold}"
        )))
    }
}

fn check_disorder(d: &DisorderSpec) -> Result<()> {
    if d.eps.is_empty() {
        return Err(config_error("--eps needs at least one value"));
    }
    for &e in &d.eps {
        DisorderModel::new(e, d.nav, d.seed)?;
        if e >= 1.0 {
            return Err(pstchain::Error::StrengthTooLarge(e).into());
        }
    }
    Ok(())
}

fn rng_info(d: &DisorderSpec) -> Option<RngInfo> {
    Some(RngInfo {
        algorithm: RNG_ALGORITHM_ID.into(),
        base_seed: d.seed,
    })
}

fn design(chain: &ChainSpec) -> Result<PstChannel> {
    Ok(design_channel(&chain.spectrum_spec(1.0)?)?)
}

fn gamma(ch: &PstChannel) -> f64 {
    speed_ratio(ch.timing.t_pst, ch.n_sites(), ch.couplings.max_coupling())
}

fn grid(g: &GridSpec, t_pst: f64) -> Result<Vec<f64>> {
    if !(g.t_end > 0.0 && g.t_end.is_finite()) {
        return Err(config_error(format!("--t-end must be positive, got {}", g.t_end)));
    }
    let t_end = g.t_end * t_pst;
    let points = g.points.unwrap_or_else(|| default_points(0.0, t_end, t_pst));
    Ok(time_grid(0.0, t_end, points)?)
}

fn spectrum(c: &SpectrumConfig) -> Result<Artifact> {
    if !(c.base_tolerance > 0.0 && c.base_tolerance < 1.0) {
        return Err(config_error(format!(
            "--base-tolerance must lie in (0, 1), got {}",
            c.base_tolerance
        )));
    }
    let raw = generate_spectrum(&c.chain.spectrum_spec(c.amplitude)?);
    let adjusted = commensurate_adjust(&raw, c.base_tolerance)?;
    let (scale, j_max) = if c.normalize {
        let j = reconstruct_couplings(&adjusted.spectrum)?.max_coupling();
        (1.0 / j, Some(j))
    } else {
        (1.0, None)
    };
    let m = &adjusted.timing.odd_multipliers;
    let rows = raw
        .values()
        .iter()
        .zip(adjusted.spectrum.values())
        .enumerate()
        .map(|(k, (r, a))| {
            vec![
                (k + 1).to_string(),
                num(r * scale),
                num(a * scale),
                m.get(k).map(|v| v.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Artifact {
        run: RunConfig::Spectrum(c.clone()),
        rng: None,
        results: json!({
            "normalization": if c.normalize { "j_max" } else { "amplitude" },
            "raw_j_max": j_max,
            "t_pst": adjusted.timing.t_pst / scale,
            "max_relative_change": adjusted.max_relative_change,
        }),
        columns: vec!["k", "omega_raw", "omega", "gap_multiplier"],
        rows,
    })
}

fn chain(c: &ChainConfig) -> Result<Artifact> {
    let ch = design(&c.chain)?;
    let rows = ch
        .couplings
        .couplings()
        .iter()
        .enumerate()
        .map(|(i, j)| vec![(i + 1).to_string(), num(*j), num(j * ch.raw_j_max), num(ch.residual)])
        .collect();
    Ok(Artifact {
        run: RunConfig::Chain(c.clone()),
        rng: None,
        results: json!({
            "normalization": "j_max",
            "raw_j_max": ch.raw_j_max,
            "t_pst": ch.timing.t_pst,
            "gamma": gamma(&ch),
            "residual": ch.residual,
            "mirror_asymmetry": ch.couplings.mirror_asymmetry(),
            "max_relative_change": ch.max_relative_change,
        }),
        columns: vec!["bond", "coupling", "coupling_raw", "residual"],
        rows,
    })
}

fn optional<T: serde::Serialize>(r: pstchain::Result<T>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn simulate(c: &SimulateConfig) -> Result<Artifact> {
    check_threshold(c.threshold)?;
    let ch = design(&c.chain)?;
    let eig = ch.eigensystem()?;
    let times = grid(&c.grid, ch.timing.t_pst)?;
    let trace = fidelity_trace(&eig, times[0], times[times.len() - 1], times.len())?;
    let rows = (0..trace.len())
        .map(|i| vec![num(trace.times[i]), num(trace.amplitude_abs[i]), num(trace.fidelity[i])])
        .collect();
    Ok(Artifact {
        run: RunConfig::Simulate(c.clone()),
        rng: None,
        results: json!({
            "normalization": "j_max",
            "t_pst": ch.timing.t_pst,
            "gamma": gamma(&ch),
            "curvature": window_curvature(&eig),
            "window_width": optional(window_width(&trace, c.threshold)),
            "first_maximum": optional(detect_first_maximum(&trace)),
        }),
        columns: vec!["t", "amplitude_abs", "fidelity"],
        rows,
    })
}

fn ensemble(c: &EnsembleConfig) -> Result<Artifact> {
    check_disorder(&c.disorder)?;
    let d = &c.disorder;
    let ch = design(&c.chain)?;
    let mut rows = Vec::new();
    let columns = if let Some(k) = c.echoes {
        for &eps in &d.eps {
            let model = DisorderModel::new(eps, d.nav, d.seed)?;
            for p in echo_decay(&ch.couplings, &model, k)? {
                rows.push(vec![
                    num(eps),
                    p.echo.to_string(),
                    num(p.time),
                    num(p.mean_fidelity),
                    num(p.std_error),
                ]);
            }
        }
        vec!["epsilon", "echo", "t", "mean_fidelity", "std_error"]
    } else if c.at_pst {
        for p in fidelity_vs_strength(&ch.couplings, &d.eps, d.nav, d.seed)? {
            rows.push(vec![num(p.epsilon), num(p.mean_fidelity), num(p.std_error)]);
        }
        vec!["epsilon", "mean_fidelity", "std_error"]
    } else {
        let times = grid(&c.grid, ch.timing.t_pst)?;
        for &eps in &d.eps {
            let model = DisorderModel::new(eps, d.nav, d.seed)?;
            let r = run_ensemble(&ch.couplings, &model, &times)?;
            for i in 0..times.len() {
                rows.push(vec![
                    num(eps),
                    num(r.times[i]),
                    num(r.mean_fidelity[i]),
                    num(r.std_error[i]),
                ]);
            }
        }
        vec!["epsilon", "t", "mean_fidelity", "std_error"]
    };
    Ok(Artifact {
        run: RunConfig::Ensemble(c.clone()),
        rng: rng_info(d),
        results: json!({
            "normalization": "j_max",
            "t_pst": ch.timing.t_pst,
            "realizations_per_strength": d.nav,
        }),
        columns,
        rows,
    })
}

/// Trace over `[0, 2 t_pst]` at the default resolution.
fn pst_trace(ch: &PstChannel) -> Result<FidelityTrace> {
    let t = ch.timing.t_pst;
    let eig = ch.eigensystem()?;
    Ok(fidelity_trace(&eig, 0.0, 2.0 * t, default_points(0.0, 2.0 * t, t))?)
}

fn analyze(c: &AnalyzeConfig) -> Result<Artifact> {
    check_threshold(c.threshold)?;
    let ch = design(&c.chain)?;
    let eig = ch.eigensystem()?;
    let map = site_probabilities(&eig);
    let pr = map.first_site_participation();
    let run = RunConfig::Analyze(c.clone());

    if c.localization {
        let n = map.n_sites();
        let rows = (0..n)
            .flat_map(|k| (0..n).map(move |i| (k, i)))
            .map(|(k, i)| vec![(k + 1).to_string(), (i + 1).to_string(), num(map.p[k][i])])
            .collect();
        return Ok(Artifact {
            run,
            rng: None,
            results: json!({ "participation_ratio": pr }),
            columns: vec!["k", "site", "probability"],
            rows,
        });
    }

    if c.level_shifts {
        check_disorder(&c.disorder)?;
        let d = &c.disorder;
        let mut rows = Vec::new();
        for &eps in &d.eps {
            let s = level_shift_stats(&ch.couplings, &DisorderModel::new(eps, d.nav, d.seed)?)?;
            let normalized = s.normalized();
            for (k, norm) in normalized.iter().enumerate() {
                rows.push(vec![
                    num(eps),
                    (k + 1).to_string(),
                    num(s.unperturbed[k]),
                    num(s.std_dev[k]),
                    num(*norm),
                    num(s.mean_shift[k]),
                ]);
            }
        }
        return Ok(Artifact {
            run,
            rng: rng_info(d),
            results: json!({ "normalization": "j_max", "omega_max": eig.omega_max() }),
            columns: vec!["epsilon", "k", "omega", "std_dev", "std_dev_normalized", "mean_shift"],
            rows,
        });
    }

    if c.window {
        let trace = pst_trace(&ch)?;
        let width = window_width(&trace, c.threshold)?;
        let first = detect_first_maximum(&trace)?;
        let row = vec![
            num(window_curvature(&eig)),
            num(width),
            num(first.time),
            num(first.fidelity),
            num(ch.timing.t_pst),
            num(gamma(&ch)),
            num(pr),
        ];
        return Ok(Artifact {
            run,
            rng: None,
            results: json!({ "normalization": "j_max", "threshold": c.threshold }),
            columns: vec![
                "curvature",
                "width",
                "first_max_time",
                "first_max_fidelity",
                "t_pst",
                "gamma",
                "participation_ratio",
            ],
            rows: vec![row],
        });
    }

    Err(config_error("choose one of --localization, --level-shifts, --window"))
}

/// Per-family design summary for the five reference chains.
fn summary(c: &ReproduceConfig) -> Result<Artifact> {
    let mut rows = Vec::new();
    for f in NamedFamily::ALL {
        let spec = ChainSpec::named(f, c.n);
        let ch = design(&spec)?;
        let eig = ch.eigensystem()?;
        let trace = pst_trace(&ch)?;
        let width = window_width(&trace, pstchain::analysis::DEFAULT_WINDOW_THRESHOLD)?;
        let first = detect_first_maximum(&trace)?;
        rows.push(vec![
            f.name().to_string(),
            pstchain::spectra::Family::from(spec.family).to_string(),
            num(spec.alpha),
            num(ch.timing.t_pst),
            num(gamma(&ch)),
            num(ch.residual),
            num(ch.max_relative_change),
            num(site_probabilities(&eig).first_site_participation()),
            num(window_curvature(&eig)),
            num(width),
            num(first.time),
            num(first.fidelity),
        ]);
    }
    Ok(Artifact {
        run: RunConfig::Reproduce(c.clone()),
        rng: None,
        results: json!({ "normalization": "j_max", "window_threshold": pstchain::analysis::DEFAULT_WINDOW_THRESHOLD }),
        columns: vec![
            "name",
            "family",
            "alpha",
            "t_pst",
            "gamma",
            "residual",
            "max_relative_change",
            "participation_ratio",
            "curvature",
            "window_width",
            "first_max_time",
            "first_max_fidelity",
        ],
        rows,
    })
}

/// Every table of the reference study: `(file stem, run)` pairs.
pub fn reproduce_plan(c: &ReproduceConfig) -> Vec<(String, RunConfig)> {
    let ensemble = |chain: &ChainSpec, eps: Vec<f64>, echoes: Option<usize>, at_pst: bool| {
        RunConfig::Ensemble(EnsembleConfig {
            chain: chain.clone(),
            disorder: DisorderSpec {
                eps,
                nav: c.nav,
                seed: c.seed,
            },
            grid: GridSpec {
                t_end: 2.0,
                points: None,
            },
            echoes,
            at_pst,
        })
    };
    let analyze = |chain: &ChainSpec, which: usize| {
        RunConfig::Analyze(AnalyzeConfig {
            chain: chain.clone(),
            localization: which == 0,
            level_shifts: which == 1,
            window: which == 2,
            disorder: DisorderSpec {
                eps: vec![0.01, 0.05],
                nav: c.nav_levels,
                seed: c.seed,
            },
            threshold: pstchain::analysis::DEFAULT_WINDOW_THRESHOLD,
        })
    };
    let strengths: Vec<f64> = (0..=30).map(|i| i as f64 / 100.0).collect();
    let echo_strengths: Vec<f64> = (1..=10).map(|i| i as f64 / 100.0).collect();

    let mut plan = vec![("summary".to_string(), RunConfig::Reproduce(c.clone()))];
    for f in NamedFamily::ALL {
        let spec = ChainSpec::named(f, c.n);
        let name = f.name();
        plan.push((
            format!("spectrum-{name}"),
            RunConfig::Spectrum(SpectrumConfig {
                chain: spec.clone(),
                amplitude: 1.0,
                base_tolerance: pstchain::spectra::BASE_SEARCH_TOLERANCE,
                normalize: false,
            }),
        ));
        plan.push((
            format!("chain-{name}"),
            RunConfig::Chain(ChainConfig { chain: spec.clone() }),
        ));
        plan.push((
            format!("fidelity-{name}"),
            RunConfig::Simulate(SimulateConfig {
                chain: spec.clone(),
                grid: GridSpec {
                    t_end: 2.0,
                    points: None,
                },
                threshold: pstchain::analysis::DEFAULT_WINDOW_THRESHOLD,
            }),
        ));
        plan.push((
            format!("ensemble-trace-{name}"),
            ensemble(&spec, vec![0.01], None, false),
        ));
        plan.push((
            format!("ensemble-strength-{name}"),
            ensemble(&spec, strengths.clone(), None, true),
        ));
        plan.push((
            format!("ensemble-echoes-{name}"),
            ensemble(&spec, echo_strengths.clone(), Some(20), false),
        ));
        plan.push((format!("localization-{name}"), analyze(&spec, 0)));
        plan.push((format!("level-shifts-{name}"), analyze(&spec, 1)));
        plan.push((format!("window-{name}"), analyze(&spec, 2)));
    }
    plan
}
