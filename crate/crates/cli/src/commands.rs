//! One function per subcommand: resolved config in, named CSV/PGM texts out.

use std::fmt::Write as _;

use shrimplab::bifurcation::{continue_codim1_with, solve_codim1, BifCurve, BifKind, ContinuationOptions};
use shrimplab::config::{return_map_config, ConfigError, KeyValueConfig, RETURN_MAP_KEYS};
use shrimplab::homoclinic::{
    limit_map_error, measured_fold, measured_linear_coefficient, plan_sequence_saddle, plan_sequence_saddle_focus,
    predict_shrimp_location, rescale_frame, FocusPlanOptions, RatioRule, ReturnMapConfig, SequencePlan,
};
use shrimplab::sweep::{
    grid_to_csv, grid_to_pgm, plane_sweep, plane_sweep_with_workers, shrimp_locate, Axis, SeedRule, SweepSpec,
    SweepTarget,
};
use shrimplab::{Error, Family};

use crate::CliError;

/// A named output file and its body (without the reproducibility header).
pub struct Output {
    pub file: String,
    pub body: String,
}

fn cfg_err(e: ConfigError) -> CliError {
    CliError::Config(e.to_string())
}

/// Sets every default so the reproducibility header holds the full
/// configuration, then rejects keys that are neither defaulted here nor in
/// `extra` (exact keys or `section.*`).
fn resolve(cfg: &mut KeyValueConfig, defaults: &[(&str, &str)], extra: &[&str]) -> Result<(), CliError> {
    for (k, v) in defaults {
        cfg.set_default(k, *v);
    }
    let mut keys: Vec<&str> = defaults.iter().map(|(k, _)| *k).collect();
    keys.extend_from_slice(extra);
    keys.extend_from_slice(&["output.stem", "map.family", "map.params", "sweep.target", "plan.kind"]);
    cfg.check_keys(&keys).map_err(cfg_err)
}

const RETURN_MAP_DEFAULTS: &[(&str, &str)] = &[
    ("local.kind", "saddle"),
    ("local.lambda", "0.4"),
    ("local.gamma", "2"),
    ("local.nonlinearity", "linear"),
    ("t1.x_plus", "1"),
    ("t1.y_minus", "1"),
    ("t1.a", "0"),
    ("t1.b", "1"),
    ("t1.c", "1"),
    ("t1.d", "1"),
    ("t1.mu", "0"),
    ("t2.x_plus", "1"),
    ("t2.y_minus", "1"),
    ("t2.a", "0"),
    ("t2.b", "1"),
    ("t2.c", "1"),
    ("t2.d", "1"),
    ("t2.mu", "0"),
    ("return.k", "12"),
    ("return.m", "12"),
];

fn return_map(cfg: &mut KeyValueConfig) -> Result<ReturnMapConfig, CliError> {
    for (k, v) in RETURN_MAP_DEFAULTS {
        cfg.set_default(k, *v);
    }
    if cfg.get("local.kind").is_some_and(|k| k != "saddle") {
        cfg.set_default("local.phi", "1");
    } else {
        cfg.set_default("local.sign", "1");
    }
    return_map_config(cfg).map_err(cfg_err)
}

fn pair<T: std::str::FromStr>(cfg: &KeyValueConfig, key: &str) -> Result<(T, T), CliError>
where
    T::Err: std::fmt::Display,
{
    let raw = cfg.get(key).unwrap_or_default();
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    let bad = |reason: String| CliError::Config(format!("{}: invalid value for '{key}': {reason}", where_(cfg, key)));
    if parts.len() != 2 {
        return Err(bad("expected two comma-separated values".into()));
    }
    let a = parts[0].parse::<T>().map_err(|e| bad(e.to_string()))?;
    let b = parts[1].parse::<T>().map_err(|e| bad(e.to_string()))?;
    Ok((a, b))
}

fn where_(cfg: &KeyValueConfig, key: &str) -> String {
    cfg.source(key).map(|s| s.to_string()).unwrap_or_else(|| "default".into())
}

/// `k:m` pairs separated by commas.
fn km_pairs(cfg: &KeyValueConfig, key: &str) -> Result<Vec<(usize, usize)>, CliError> {
    let raw = cfg.get(key).unwrap_or_default();
    raw.split(',')
        .map(|t| {
            let parsed = t.trim().split_once(':').and_then(|(k, m)| Some((k.trim().parse().ok()?, m.trim().parse().ok()?)));
            parsed.ok_or_else(|| {
                CliError::Config(format!("{}: invalid value for '{key}': expected k:m pairs, got '{}'", where_(cfg, key), t.trim()))
            })
        })
        .collect()
}

/// `default_params` applies only when the family is also the default one.
fn family_and_params(cfg: &mut KeyValueConfig, default_family: &str, default_params: &str) -> Result<(Family, Vec<f64>), CliError> {
    cfg.set_default("map.family", default_family);
    let family: Family = cfg.parsed("map.family").map_err(cfg_err)?.expect("defaulted");
    if cfg.get("map.family") == Some(default_family) {
        cfg.set_default("map.params", default_params);
    } else {
        cfg.set_default("map.params", vec!["0"; family.arity()].join(","));
    }
    let params = cfg.reals("map.params").map_err(cfg_err)?.expect("defaulted");
    if params.len() != family.arity() {
        return Err(CliError::Config(format!(
            "{}: invalid value for 'map.params': {} needs {} parameter(s), got {}",
            where_(cfg, "map.params"),
            family.name(),
            family.arity(),
            params.len()
        )));
    }
    Ok((family, params))
}

pub fn sweep(cfg: &mut KeyValueConfig, workers: Option<usize>) -> Result<Vec<Output>, CliError> {
    cfg.set_default("sweep.target", "family");
    let target_kind = cfg.get("sweep.target").unwrap_or_default().to_string();
    let mut allowed = vec![];
    let target = match target_kind.as_str() {
        "family" => {
            let (family, base) = family_and_params(cfg, "DoubleParabola", "0,0")?;
            SweepTarget::Family { family, base }
        }
        "return-map" => {
            allowed.extend_from_slice(RETURN_MAP_KEYS);
            SweepTarget::ReturnMap { config: return_map(cfg)? }
        }
        other => {
            return Err(CliError::Config(format!(
                "{}: invalid value for 'sweep.target': expected family or return-map, got '{other}'",
                where_(cfg, "sweep.target")
            )))
        }
    };
    resolve(
        cfg,
        &[
            ("sweep.axes", "0,1"),
            ("sweep.range_i", "-0.5,2"),
            ("sweep.range_j", "-0.5,2"),
            ("sweep.nx", "64"),
            ("sweep.ny", "64"),
            ("sweep.transient", "1024"),
            ("sweep.max_period", "32"),
            ("sweep.samples", "4096"),
            ("sweep.escape_radius", "1e6"),
            ("sweep.seed", "critical"),
            ("sweep.locate_period", "0"),
            ("output.stem", "sweep"),
        ],
        &allowed,
    )?;
    let (ai, aj): (usize, usize) = pair(cfg, "sweep.axes")?;
    let (lo_i, hi_i): (f64, f64) = pair(cfg, "sweep.range_i")?;
    let (lo_j, hi_j): (f64, f64) = pair(cfg, "sweep.range_j")?;
    let axes = [Axis { param: ai, lo: lo_i, hi: hi_i }, Axis { param: aj, lo: lo_j, hi: hi_j }];
    let get = |k: &str| cfg.parsed::<usize>(k).map_err(cfg_err).map(|v| v.expect("defaulted"));
    let mut spec = SweepSpec::new(target, axes, get("sweep.nx")?, get("sweep.ny")?);
    spec.transient = get("sweep.transient")?;
    spec.max_period = get("sweep.max_period")?;
    spec.samples = get("sweep.samples")?;
    spec.escape_radius = cfg.parsed("sweep.escape_radius").map_err(cfg_err)?.expect("defaulted");
    spec.seed = match cfg.get("sweep.seed").unwrap_or("critical") {
        "critical" => SeedRule::CriticalPoint,
        v => SeedRule::FixedSeed(v.parse().map_err(|_| {
            CliError::Config(format!(
                "{}: invalid value for 'sweep.seed': expected 'critical' or a real, got '{v}'",
                where_(cfg, "sweep.seed")
            ))
        })?),
    };
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let locate = get("sweep.locate_period")?;

    let grid = match workers {
        Some(w) => plane_sweep_with_workers(&spec, w),
        None => plane_sweep(&spec),
    }
    .map_err(CliError::from)?;

    let stem = cfg.get("output.stem").unwrap_or("sweep").to_string();
    let mut out = vec![
        Output { file: format!("{stem}.csv"), body: grid_to_csv(&grid, "") },
        Output { file: format!("{stem}.pgm"), body: grid_to_pgm(&grid, "") },
    ];
    if locate > 0 {
        let mut body = String::from("component,period,cells,i_min,i_max,j_min,j_max,centroid_i,centroid_j\n");
        for (n, c) in shrimp_locate(&grid, locate).iter().enumerate() {
            let (a, b, d, e) = c.bbox;
            let _ = writeln!(body, "{n},{},{},{a},{b},{d},{e},{},{}", c.period, c.cells, c.centroid.0, c.centroid.1);
        }
        out.push(Output { file: format!("{stem}_components.csv"), body });
    }
    Ok(out)
}

const CONTINUE_DEFAULTS: &[(&str, &str)] = &[
    ("continue.kind", "SN"),
    ("continue.period", "1"),
    ("continue.free", "1"),
    ("continue.plane", "0,1"),
    ("continue.guess", "1,1.0625"),
    ("continue.step", "0.01"),
    ("continue.max_points", "2000"),
    ("continue.bounds", "-10,10,-10,10,-10,10"),
];

fn curve(cfg: &mut KeyValueConfig, stem: &str, direction: f64, extra: &[&str]) -> Result<(Family, BifCurve), CliError> {
    // a point on the fold branch that carries the cusp
    let (family, params) = family_and_params(cfg, "DoubleParabola", "1.25,1.0625")?;
    let mut defaults = CONTINUE_DEFAULTS.to_vec();
    defaults.push(("output.stem", stem));
    resolve(cfg, &defaults, extra)?;
    let kind = match cfg.get("continue.kind").unwrap_or_default().to_ascii_uppercase().as_str() {
        "SN" => BifKind::SaddleNode,
        "PD" => BifKind::PeriodDoubling,
        other => {
            return Err(CliError::Config(format!(
                "{}: invalid value for 'continue.kind': expected SN or PD, got '{other}'",
                where_(cfg, "continue.kind")
            )))
        }
    };
    let num = |k: &str| cfg.parsed::<f64>(k).map_err(cfg_err).map(|v| v.expect("defaulted"));
    let int = |k: &str| cfg.parsed::<usize>(k).map_err(cfg_err).map(|v| v.expect("defaulted"));
    let period = int("continue.period")?;
    let free = int("continue.free")?;
    let plane: (usize, usize) = pair(cfg, "continue.plane")?;
    let guess: (f64, f64) = pair(cfg, "continue.guess")?;
    let bounds = cfg.reals("continue.bounds").map_err(cfg_err)?.expect("defaulted");
    if bounds.len() != 6 {
        return Err(CliError::Config(format!(
            "{}: invalid value for 'continue.bounds': expected 6 reals (Y, param_i, param_j ranges)",
            where_(cfg, "continue.bounds")
        )));
    }
    let mut opts = ContinuationOptions::new(num("continue.step")?, int("continue.max_points")?);
    opts.direction = direction;
    opts.bounds = [(bounds[0], bounds[1]), (bounds[2], bounds[3]), (bounds[4], bounds[5])];
    let start = solve_codim1(&family, &params, period, kind, free, guess)?;
    Ok((family, continue_codim1_with(&family, &start, plane, &opts)?))
}

pub fn continuation(cfg: &mut KeyValueConfig) -> Result<Vec<Output>, CliError> {
    cfg.set_default("continue.direction", "1");
    let direction: f64 = cfg.parsed("continue.direction").map_err(cfg_err)?.expect("defaulted");
    let (_, c) = curve(cfg, "curve", direction, &["continue.direction"])?;
    let stem = cfg.get("output.stem").unwrap_or("curve").to_string();
    let body = format!("# termination = {:?}\n{}", c.termination, shrimplab::bifurcation::curve_to_csv(&c));
    Ok(vec![Output { file: format!("{stem}.csv"), body }])
}

/// Both branches from the start point; hits closer than the distinctness
/// tolerance are reported once.
pub fn codim2(cfg: &mut KeyValueConfig) -> Result<Vec<Output>, CliError> {
    let (_, fwd) = curve(cfg, "codim2", 1.0, &[])?;
    let (_, bwd) = curve(cfg, "codim2", -1.0, &[])?;
    let mut hits = Vec::new();
    for h in fwd.codim2_hits.iter().chain(&bwd.codim2_hits) {
        let dup = hits.iter().any(|g: &&shrimplab::bifurcation::BifPoint| {
            g.kind == h.kind
                && g.orbit.params.iter().zip(&h.orbit.params).all(|(a, b)| (a - b).abs() < shrimplab::bifurcation::orbit::DISTINCTNESS_TOLERANCE)
        });
        if !dup {
            hits.push(h);
        }
    }
    let (pi, pj) = fwd.plane;
    let mut body = String::from("kind,period,param_i,param_j,Y,multiplier,second_derivative,lyapunov_1\n");
    for h in hits {
        let tv = |k: &str| h.test_values.get(k).map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{}",
            h.kind,
            h.orbit.period,
            h.orbit.params[pi],
            h.orbit.params[pj],
            h.orbit.y,
            h.orbit.multiplier,
            tv("second_derivative"),
            tv("lyapunov_1")
        );
    }
    let stem = cfg.get("output.stem").unwrap_or("codim2").to_string();
    Ok(vec![Output { file: format!("{stem}.csv"), body }])
}

fn with_pair(base: &ReturnMapConfig, k: usize, m: usize) -> Result<ReturnMapConfig, CliError> {
    Ok(ReturnMapConfig::new(base.local, base.t1, base.t2, k, m)?)
}

pub fn rescale_verify(cfg: &mut KeyValueConfig) -> Result<Vec<Output>, CliError> {
    let base = return_map(cfg)?;
    resolve(
        cfg,
        &[
            ("verify.pairs", "6:6,8:8,10:10,12:12"),
            ("verify.radius", "2"),
            ("verify.grid", "21"),
            ("verify.h", "1e-3"),
            ("output.stem", "rescale"),
        ],
        RETURN_MAP_KEYS,
    )?;
    let radius: f64 = cfg.parsed("verify.radius").map_err(cfg_err)?.expect("defaulted");
    let grid: usize = cfg.parsed("verify.grid").map_err(cfg_err)?.expect("defaulted");
    let h: f64 = cfg.parsed("verify.h").map_err(cfg_err)?.expect("defaulted");
    let mut body = String::from("k,m,err_thm1,err_thm2,m3_coeff,m3_measured,evaluated,excluded\n");
    for (k, m) in km_pairs(cfg, "verify.pairs")? {
        let rc = with_pair(&base, k, m)?;
        let err = limit_map_error(&rc, radius, grid)?;
        let frame = rescale_frame(&rc)?;
        let measured = measured_linear_coefficient(&rc, h)?;
        let _ = writeln!(
            body,
            "{k},{m},{},{},{},{measured},{},{}",
            err.err_thm1, err.err_thm2, frame.m3_coeff, err.evaluated, err.excluded
        );
    }
    let stem = cfg.get("output.stem").unwrap_or("rescale").to_string();
    Ok(vec![Output { file: format!("{stem}.csv"), body }])
}

pub fn sequence_plan(cfg: &mut KeyValueConfig) -> Result<Vec<Output>, CliError> {
    cfg.set_default("plan.kind", "saddle");
    let kind = cfg.get("plan.kind").unwrap_or_default().to_string();
    let specific: &[(&str, &str)] = match kind.as_str() {
        "saddle" => &[("plan.theta0", "1.5"), ("plan.rule", "squares")],
        "saddle-focus" => &[
            ("plan.phi0", "1"),
            ("plan.lambda", "0.4"),
            ("plan.c", "1"),
            ("plan.nu", "0"),
            ("plan.m_step", "10"),
            ("plan.max_k_ratio", "20"),
        ],
        other => {
            return Err(CliError::Config(format!(
                "{}: invalid value for 'plan.kind': expected saddle or saddle-focus, got '{other}'",
                where_(cfg, "plan.kind")
            )))
        }
    };
    let mut defaults = vec![("plan.count", "40"), ("plan.s", "index"), ("plan.gamma", "2"), ("output.stem", "plan")];
    defaults.extend_from_slice(specific);
    resolve(cfg, &defaults, &["plan.denominators", "plan.pairs"])?;
    let count: usize = cfg.parsed("plan.count").map_err(cfg_err)?.expect("defaulted");
    let s: Vec<f64> = match cfg.get("plan.s").unwrap_or("index") {
        "index" => (1..=count).map(|j| j as f64).collect(),
        _ => cfg.reals("plan.s").map_err(cfg_err)?.expect("present"),
    };
    let num = |k: &str| cfg.parsed::<f64>(k).map_err(cfg_err).map(|v| v.expect("defaulted"));
    let gamma = num("plan.gamma")?;
    let plan: SequencePlan = match kind.as_str() {
        "saddle" => {
            let rule = match cfg.get("plan.rule").unwrap_or_default() {
                "squares" => RatioRule::SquareDenominators,
                "denominators" => {
                    let d = cfg.reals("plan.denominators").map_err(cfg_err)?.unwrap_or_default();
                    RatioRule::Denominators(d.iter().map(|v| *v as usize).collect())
                }
                "pairs" => RatioRule::Pairs(km_pairs(cfg, "plan.pairs")?),
                other => {
                    return Err(CliError::Config(format!(
                        "{}: invalid value for 'plan.rule': expected squares, denominators or pairs, got '{other}'",
                        where_(cfg, "plan.rule")
                    )))
                }
            };
            plan_sequence_saddle(num("plan.theta0")?, gamma, &s, &rule)?
        }
        "saddle-focus" => {
            let int = |k: &str| cfg.parsed::<usize>(k).map_err(cfg_err).map(|v| v.expect("defaulted"));
            let opts = FocusPlanOptions {
                c: num("plan.c")?,
                nu: num("plan.nu")?,
                m_step: int("plan.m_step")?,
                max_k_ratio: int("plan.max_k_ratio")?,
            };
            plan_sequence_saddle_focus(num("plan.phi0")?, num("plan.lambda")?, gamma, &s, &opts)?
        }
        _ => unreachable!("kind checked above"),
    };
    let mut body = String::from("j,k,m,n,lo,hi,end1,end2,s,diam,argument\n");
    for e in &plan.entries {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{},{}",
            e.j,
            e.k,
            e.m,
            opt(e.n.map(|n| n.to_string())),
            e.lo,
            e.hi,
            e.end1,
            e.end2,
            e.s,
            e.diam(),
            opt(e.argument.map(|a| a.to_string()))
        );
    }
    for (j, reason) in &plan.skipped {
        let _ = writeln!(body, "# skipped j = {j}: {reason}");
    }
    let stem = cfg.get("output.stem").unwrap_or("plan").to_string();
    Ok(vec![Output { file: format!("{stem}.csv"), body }])
}

pub fn shrimp_predict(cfg: &mut KeyValueConfig) -> Result<Vec<Output>, CliError> {
    let base = return_map(cfg)?;
    resolve(
        cfg,
        &[
            ("predict.pairs", "8:8,10:10,12:12"),
            ("predict.first", "1.25"),
            ("predict.guess", "1,1.0625"),
            ("output.stem", "predict"),
        ],
        RETURN_MAP_KEYS,
    )?;
    let first: f64 = cfg.parsed("predict.first").map_err(cfg_err)?.expect("defaulted");
    let guess: (f64, f64) = pair(cfg, "predict.guess")?;
    let mut body = String::from("k,m,m1,m2,mu1_predicted,mu2_predicted,mu1_measured,mu2_measured,relative_distance\n");
    for (k, m) in km_pairs(cfg, "predict.pairs")? {
        let rc = with_pair(&base, k, m)?;
        let (measured, second) = measured_fold(&rc, first, guess)?;
        let (m1, m2) = rescale_frame(&rc)?.labelled(first, second);
        let predicted = predict_shrimp_location(&rc, m1, m2)?;
        let rel = (measured.0 - predicted.0).hypot(measured.1 - predicted.1) / measured.0.hypot(measured.1);
        let _ = writeln!(
            body,
            "{k},{m},{m1},{m2},{},{},{},{},{rel}",
            predicted.0, predicted.1, measured.0, measured.1
        );
    }
    let stem = cfg.get("output.stem").unwrap_or("predict").to_string();
    Ok(vec![Output { file: format!("{stem}.csv"), body }])
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) => CliError::Config(m),
            Error::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}
