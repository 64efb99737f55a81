use std::f64::consts::PI;
use std::path::Path;

use serde_json::{json, Map, Value};
use subplanck::analysis::{
    convergence_table, gaussian_convergence, ringing_report, trend, variance_scaling, variance_table, VarianceSpec,
    ZeroMode,
};
use subplanck::io::{fmt_f64, Table};
use subplanck::microcanonical::{
    mc_ray, DiskAnalytic, DiskBilliard, GasAnalytic, GasBox, GasGaussian, GasSampler, ShellSampler,
};
use subplanck::overlap::{overlap_ray, Autocorr, Direct, Displacement, OverlapSeries, OverlapSource, Scales, WignerFt};
use subplanck::statekit::{cat_state, compass_state, gaussian_packet, momentum_cat_state, Grid1D, WaveFunction1D};
use subplanck::wigner::{fringe_wavelength, marginal_x, wigner_transform, Axis, Window};
use subplanck::Error;

use crate::args::*;
use crate::output::{json_header, set_meta, stamp, summary_path, write, write_json, CliError, CliResult};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Wigner(a) => wigner(a),
        Command::Overlap(a) => overlap(a),
        Command::Mc(a) => mc(a),
        Command::Oracle(a) => oracle(a),
        Command::Ring(a) => ring(a),
        Command::Study(a) => match a.study {
            Study::GaussianConvergence(c) => convergence(c),
            Study::VarianceScaling(v) => variance(v),
        },
    }
}

fn build_state(kind: StateKind, p: &StateParams, hbar: f64) -> CliResult<WaveFunction1D> {
    let grid = Grid1D::symmetric(p.xmax, p.grid)?;
    Ok(match kind {
        StateKind::Gaussian => gaussian_packet(grid, p.x0, p.p0, p.sigma, hbar)?,
        StateKind::Cat2 => cat_state(grid, p.sep, p.sigma, hbar)?,
        StateKind::Cat4 => compass_state(grid, p.sep, p.pk, p.sigma, hbar)?,
        StateKind::MomentumCat => momentum_cat_state(grid, p.pk, p.sigma, hbar)?,
    })
}

fn state_json(kind: StateKind, p: &StateParams) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), kind.name().into());
    m.insert("sigma".into(), p.sigma.into());
    match kind {
        StateKind::Gaussian => {
            m.insert("x0".into(), p.x0.into());
            m.insert("p0".into(), p.p0.into());
        }
        StateKind::Cat2 => {
            m.insert("sep".into(), p.sep.into());
        }
        StateKind::Cat4 => {
            m.insert("sep".into(), p.sep.into());
            m.insert("pk".into(), p.pk.into());
        }
        StateKind::MomentumCat => {
            m.insert("pk".into(), p.pk.into());
        }
    }
    Value::Object(m)
}

fn state_label(kind: StateKind, p: &StateParams) -> String {
    let body = match kind {
        StateKind::Gaussian => format!("x0={} p0={}", p.x0, p.p0),
        StateKind::Cat2 => format!("sep={}", p.sep),
        StateKind::Cat4 => format!("sep={} pk={}", p.sep, p.pk),
        StateKind::MomentumCat => format!("pk={}", p.pk),
    };
    format!("{} {body} sigma={} grid={} xmax={}", kind.name(), p.sigma, p.grid, p.xmax)
}

fn wigner(a: WignerArgs) -> CliResult<()> {
    let hbar = a.units.hbar;
    let psi = build_state(a.state, &a.params, hbar)?;
    let w = wigner_transform(&psi)?;

    let fringes = match a.fringes {
        None => None,
        Some(axis) => Some(fringe_report(&w, a.state, &a.params, hbar, axis, a.window)?),
    };

    let marginal_error = marginal_x(&w)
        .iter()
        .zip(psi.density())
        .map(|(m, d)| (m - d).abs())
        .fold(0.0, f64::max);

    let bytes = match a.format {
        GridFormat::Csv => {
            let mut table = stamp(w.to_table(), "wigner", &a.units);
            set_meta(&mut table, "state", state_label(a.state, &a.params));
            table.to_csv().into_bytes()
        }
        GridFormat::Binary => w.to_binary(),
    };
    write(&a.out, &bytes)?;

    let mut summary = json_header("wigner", &a.units);
    summary.insert("state".into(), state_json(a.state, &a.params));
    summary.insert(
        "grid".into(),
        json!({
            "n_x": w.n_x(),
            "n_p": w.n_p(),
            "x_min": w.x(0),
            "x_max": w.x(w.n_x() - 1),
            "p_min": w.p(0),
            "p_max": w.p(w.n_p() - 1),
            "dx": w.dx(),
            "dp": w.dp(),
        }),
    );
    summary.insert(
        "output".into(),
        json!({
            "path": a.out.display().to_string(),
            "format": match a.format { GridFormat::Csv => "csv", GridFormat::Binary => "binary" },
        }),
    );
    summary.insert("normalization".into(), w.normalization().into());
    summary.insert("purity".into(), w.purity().into());
    summary.insert("max_abs".into(), w.max_abs().into());
    summary.insert("pure_state_bound".into(), (1.0 / (PI * hbar)).into());
    summary.insert("imag_residue".into(), w.imag_residue().into());
    summary.insert("marginal_max_error".into(), marginal_error.into());
    if let Some(f) = fringes {
        summary.insert("fringes".into(), f);
    }
    let summary = Value::Object(summary);
    write_json(&summary_path(&a.out), &summary)?;
    print!("{}", subplanck::io::to_json(&summary));
    Ok(())
}

fn fringe_report(
    w: &subplanck::wigner::WignerGrid,
    kind: StateKind,
    p: &StateParams,
    hbar: f64,
    axis: FringeAxis,
    window: Option<[f64; 4]>,
) -> CliResult<Value> {
    let (axis, name) = match axis {
        FringeAxis::X => (Axis::X, "x"),
        FringeAxis::P => (Axis::P, "p"),
    };
    let window = match window {
        Some(v) => Window { x: (v[0], v[1]), p: (v[2], v[3]) },
        None => match axis {
            Axis::P => Window { x: (-0.5 * p.sigma, 0.5 * p.sigma), p: (-3.0 * hbar / p.sigma, 3.0 * hbar / p.sigma) },
            Axis::X => Window { x: (-3.0 * p.sigma, 3.0 * p.sigma), p: (-0.5 * hbar / p.sigma, 0.5 * hbar / p.sigma) },
        },
    };
    let period = fringe_wavelength(w, axis, window)?;
    let expected = match (kind, axis) {
        (StateKind::Cat2, Axis::P) => Some(2.0 * PI * hbar / p.sep),
        (StateKind::MomentumCat, Axis::X) => Some(PI * hbar / p.pk),
        _ => None,
    };
    let mut m = Map::new();
    m.insert("axis".into(), name.into());
    m.insert("window".into(), json!({"x": [window.x.0, window.x.1], "p": [window.p.0, window.p.1]}));
    m.insert("period".into(), period.into());
    if let Some(e) = expected {
        m.insert("expected_period".into(), e.into());
        m.insert("relative_error".into(), ((period - e) / e).abs().into());
    }
    Ok(Value::Object(m))
}

/// Unit ray direction for a system with `dim` degrees of freedom.
fn direction(ray: &RayArgs, dim: usize) -> CliResult<Displacement> {
    let d = &ray.direction;
    let (a, b) = if d.dx_ray {
        (1.0, 0.0)
    } else if d.dp_ray {
        (0.0, 1.0)
    } else if let Some(v) = &d.ray {
        (v[0], v[1])
    } else {
        return Err(CliError::Usage("choose a ray with --dx-ray, --dp-ray or --ray DX,DP".into()));
    };
    let mut dx = vec![0.0; dim];
    dx[0] = a;
    let dp = match ray.dp_axis {
        DpAxis::Axis => {
            let mut v = vec![0.0; dim];
            v[0] = b;
            v
        }
        DpAxis::Diagonal => vec![b / (dim as f64).sqrt(); dim],
    };
    Ok(Displacement::new(dx, dp)?)
}

fn scales(units: &Units) -> Option<Scales> {
    Some(Scales { p: units.momentum, l: units.length })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

fn series_json(series: &OverlapSeries) -> Value {
    serde_json::from_str(&series.to_json()).expect("series JSON parses")
}

fn overlap(a: OverlapArgs) -> CliResult<()> {
    let psi = build_state(a.state, &a.params, a.units.hbar)?;
    let dir = direction(&a.ray, 1)?;
    let t_max = a.ray.t_max.unwrap_or(10.0);
    let n = a.ray.n.unwrap_or(64);
    let sc = scales(&a.units);
    let label = state_label(a.state, &a.params);

    let single = |series: OverlapSeries| -> CliResult<()> {
        let bytes = match a.format {
            TableFormat::Csv => {
                let mut table = stamp(series.to_table(), "overlap", &a.units);
                set_meta(&mut table, "state", &label);
                table.to_csv()
            }
            TableFormat::Json => {
                let mut m = json_header("overlap", &a.units);
                m.insert("state".into(), state_json(a.state, &a.params));
                m.insert("series".into(), series_json(&series));
                subplanck::io::to_json(&Value::Object(m))
            }
        };
        write(&a.out, bytes.as_bytes())?;
        println!(
            "{} route: {} points, |<D>| at t=0 = {:.12}",
            series.route.as_str(),
            series.len(),
            series.values[0].norm()
        );
        Ok(())
    };

    match a.route {
        RouteArg::Direct => single(overlap_ray(&Direct(&psi), &dir, t_max, n, sc)?),
        RouteArg::WignerFt => {
            let w = wigner_transform(&psi)?;
            single(overlap_ray(&WignerFt(&w), &dir, t_max, n, sc)?)
        }
        RouteArg::Autocorr => {
            let w = wigner_transform(&psi)?;
            single(overlap_ray(&Autocorr(&w), &dir, t_max, n, sc)?)
        }
        RouteArg::All => {
            let w = wigner_transform(&psi)?;
            let routes = [
                overlap_ray(&Direct(&psi), &dir, t_max, n, sc)?,
                overlap_ray(&WignerFt(&w), &dir, t_max, n, sc)?,
                overlap_ray(&Autocorr(&w), &dir, t_max, n, sc)?,
            ];
            let deviation: Vec<f64> = (0..n)
                .map(|i| {
                    let m: Vec<f64> = routes.iter().map(|s| s.values[i].norm()).collect();
                    (m[0] - m[1]).abs().max((m[0] - m[2]).abs()).max((m[1] - m[2]).abs())
                })
                .collect();
            let worst = deviation.iter().copied().fold(0.0, f64::max);

            let bytes = match a.format {
                TableFormat::Csv => {
                    let mut columns = vec!["t".to_string()];
                    for s in &routes {
                        let prefix = s.route.as_str().replace('-', "_");
                        for c in ["re", "im", "abs"] {
                            columns.push(format!("{prefix}_{c}"));
                        }
                    }
                    columns.push("max_pairwise_deviation".into());
                    let mut table = Table::new(columns);
                    table.metadata = routes[0].to_table().metadata;
                    let mut table = stamp(table, "overlap", &a.units);
                    set_meta(&mut table, "route", "all");
                    set_meta(&mut table, "source", &label);
                    set_meta(&mut table, "max_deviation", fmt_f64(worst));
                    for i in 0..n {
                        let mut row = vec![routes[0].t[i]];
                        for s in &routes {
                            let v = s.values[i];
                            row.extend([v.re, v.im, v.norm()]);
                        }
                        row.push(deviation[i]);
                        table.push(row);
                    }
                    table.to_csv()
                }
                TableFormat::Json => {
                    let mut m = json_header("overlap", &a.units);
                    m.insert("state".into(), state_json(a.state, &a.params));
                    m.insert("route".into(), "all".into());
                    let mut per_route = Map::new();
                    for s in &routes {
                        per_route.insert(s.route.as_str().into(), series_json(s));
                    }
                    m.insert("routes".into(), Value::Object(per_route));
                    m.insert("max_pairwise_deviation".into(), json!(deviation));
                    m.insert("max_deviation".into(), worst.into());
                    subplanck::io::to_json(&Value::Object(m))
                }
            };
            write(&a.out, bytes.as_bytes())?;
            println!("max pairwise deviation over {n} points: {worst:.3e}");
            Ok(())
        }
    }
}

fn gas_redirect(e: Error, particles: usize) -> CliError {
    match e {
        Error::Domain(_) => CliError::Redirect {
            source: e,
            hint: format!("use `subplanck oracle --formula gas --particles {particles}` for the closed-form gas overlap"),
        },
        other => other.into(),
    }
}

fn mc(a: McArgs) -> CliResult<()> {
    let (hbar, p, l) = (a.units.hbar, a.units.momentum, a.units.length);
    let sampler: Box<dyn ShellSampler> = match a.geometry {
        Geometry::Disk => Box::new(DiskBilliard::new(l, p, hbar)?),
        Geometry::Gas => {
            let gas = GasBox::new(a.particles, l, p, hbar)?;
            Box::new(GasSampler::new(gas).map_err(|e| gas_redirect(e, a.particles))?)
        }
    };
    let dir = direction(&a.ray, sampler.dim())?;
    let t_max = a.ray.t_max.unwrap_or(10.0);
    let n = a.ray.n.unwrap_or(20);
    let series = mc_ray(sampler.as_ref(), &dir, t_max, n, a.samples, a.seed, scales(&a.units))?;
    let geometry = match a.geometry {
        Geometry::Disk => "disk",
        Geometry::Gas => "gas",
    };

    let bytes = match a.format {
        TableFormat::Csv => {
            let mut table = stamp(series.to_table(), "mc", &a.units);
            set_meta(&mut table, "route", "monte-carlo");
            set_meta(&mut table, "geometry", geometry);
            if a.geometry == Geometry::Gas {
                set_meta(&mut table, "particles", a.particles);
            }
            set_meta(&mut table, "step_dx", join(series.step.dx()));
            set_meta(&mut table, "step_dp", join(series.step.dp()));
            table.to_csv()
        }
        TableFormat::Json => {
            let mut m = json_header("mc", &a.units);
            m.insert("geometry".into(), geometry.into());
            if a.geometry == Geometry::Gas {
                m.insert("particles".into(), a.particles.into());
            }
            m.insert("source".into(), series.source.clone().into());
            m.insert("seed".into(), series.seed.into());
            m.insert("samples".into(), series.samples.into());
            m.insert("step_dx".into(), json!(series.step.dx()));
            m.insert("step_dp".into(), json!(series.step.dp()));
            m.insert("t".into(), json!(series.t));
            m.insert("estimates".into(), serde_json::to_value(&series.estimates).expect("estimates serialize"));
            subplanck::io::to_json(&Value::Object(m))
        }
    };
    write(&a.out, bytes.as_bytes())?;
    println!("{}: {} points x {} samples, seed {}", series.source, series.t.len(), series.samples, series.seed);
    Ok(())
}

/// Closed-form source and its number of degrees of freedom.
fn oracle_source(formula: Formula, particles: usize, units: &Units) -> CliResult<(Box<dyn OverlapSource>, usize)> {
    let (hbar, p, l) = (units.hbar, units.momentum, units.length);
    Ok(match formula {
        Formula::Disk => (Box::new(DiskAnalytic(DiskBilliard::new(l, p, hbar)?)), 2),
        Formula::Gas => {
            let gas = GasBox::new(particles, l, p, hbar)?;
            gas.order()?;
            (Box::new(GasAnalytic(gas)), gas.dim())
        }
        Formula::GasGaussian => {
            let gas = GasBox::new(particles, l, p, hbar)?;
            (Box::new(GasGaussian(gas)), gas.dim())
        }
    })
}

fn oracle(a: OracleArgs) -> CliResult<()> {
    let (source, dim) = oracle_source(a.formula, a.particles, &a.units)?;
    let dir = direction(&a.ray, dim)?;
    let t_max = a.ray.t_max.unwrap_or(10.0);
    let n = a.ray.n.unwrap_or(201);
    let series = overlap_ray(source.as_ref(), &dir, t_max, n, scales(&a.units))?;
    let values = series.re();

    let bytes = match a.format {
        TableFormat::Csv => {
            let mut table = Table::new(["t", "value"]);
            table.metadata = series.to_table().metadata;
            let mut table = stamp(table, "oracle", &a.units);
            set_meta(&mut table, "formula", a.formula.name());
            if a.formula != Formula::Disk {
                set_meta(&mut table, "particles", a.particles);
            }
            for (t, v) in series.t.iter().zip(&values) {
                table.push(vec![*t, *v]);
            }
            table.to_csv()
        }
        TableFormat::Json => {
            let mut m = json_header("oracle", &a.units);
            m.insert("formula".into(), a.formula.name().into());
            if a.formula != Formula::Disk {
                m.insert("particles".into(), a.particles.into());
            }
            m.insert("source".into(), series.source.clone().into());
            m.insert("step_dx".into(), json!(series.step.dx()));
            m.insert("step_dp".into(), json!(series.step.dp()));
            m.insert("t".into(), json!(series.t));
            m.insert("value".into(), json!(values));
            subplanck::io::to_json(&Value::Object(m))
        }
    };
    write(&a.out, bytes.as_bytes())?;
    println!("{}: {} points", series.source, series.len());
    Ok(())
}

/// Reads any of the series CSVs this tool writes.
fn read_series(path: &Path) -> CliResult<OverlapSeries> {
    let mut table = Table::read(path)?;
    let has = |t: &Table, c: &str| t.columns.iter().any(|x| x == c);
    if has(&table, "value") && !has(&table, "re") {
        rename(&mut table, "value", "re");
        table.columns.push("im".into());
        for row in &mut table.rows {
            row.push(0.0);
        }
        if table.metadata_value("route").is_none() {
            set_meta(&mut table, "route", "analytic");
        }
    } else if has(&table, "mean_re") {
        rename(&mut table, "mean_re", "re");
        rename(&mut table, "mean_im", "im");
        if table.metadata_value("route").is_none() {
            set_meta(&mut table, "route", "monte-carlo");
        }
    } else if !has(&table, "re") {
        if let Some(prefix) = table.columns.iter().find_map(|c| c.strip_suffix("_re")).map(str::to_string) {
            rename(&mut table, &format!("{prefix}_re"), "re");
            rename(&mut table, &format!("{prefix}_im"), "im");
            set_meta(&mut table, "route", prefix.replace('_', "-"));
        }
    }
    OverlapSeries::from_table(&table).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn rename(table: &mut Table, from: &str, to: &str) {
    if let Some(c) = table.columns.iter_mut().find(|c| *c == from) {
        *c = to.to_string();
    }
}

fn ring(a: RingArgs) -> CliResult<()> {
    let (series, origin) = if let Some(path) = &a.input {
        (read_series(path)?, json!({"input": path.display().to_string()}))
    } else if let Some(formula) = a.formula {
        let (source, dim) = oracle_source(formula, a.particles, &a.units)?;
        let dir = direction(&a.ray, dim)?;
        let t_max = a.ray.t_max.unwrap_or(40.0);
        let n = a.ray.n.unwrap_or(4001);
        (overlap_ray(source.as_ref(), &dir, t_max, n, scales(&a.units))?, json!({"formula": formula.name()}))
    } else if let Some(kind) = a.state {
        let psi = build_state(kind, &a.params, a.units.hbar)?;
        let dir = direction(&a.ray, 1)?;
        let t_max = a.ray.t_max.unwrap_or(10.0);
        let n = a.ray.n.unwrap_or(512);
        (overlap_ray(&Direct(&psi), &dir, t_max, n, scales(&a.units))?, json!({"state": state_json(kind, &a.params)}))
    } else {
        return Err(CliError::Usage("give a series with --input, --formula or --state".into()));
    };

    let mode = match a.mode {
        ZeroModeArg::Sign => ZeroMode::SignChange,
        ZeroModeArg::Modulus => ZeroMode::ModulusMinima,
    };
    let report = ringing_report(&series, mode, a.window)?;

    let mut m = json_header("ring", &a.units);
    if let Some(s) = series.scales {
        m.insert("P".into(), s.p.into());
        m.insert("L".into(), s.l.into());
    }
    m.insert("hbar".into(), series.hbar.into());
    m.insert("series".into(), origin);
    m.insert("source".into(), series.source.clone().into());
    m.insert("route".into(), series.route.as_str().into());
    m.insert(
        "mode".into(),
        match a.mode {
            ZeroModeArg::Sign => "sign",
            ZeroModeArg::Modulus => "modulus",
        }
        .into(),
    );
    m.insert("points".into(), series.len().into());
    m.insert("report".into(), serde_json::to_value(&report).expect("report serializes"));
    let text = subplanck::io::to_json(&Value::Object(m));
    match &a.out {
        Some(path) => {
            write(path, text.as_bytes())?;
            println!(
                "{} zeros, {} peaks, exponent {:.4} ± {:.4}",
                report.zeros.len(),
                report.peak_locations.len(),
                report.exponent,
                report.exponent_stderr
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn convergence(a: ConvergenceArgs) -> CliResult<()> {
    let rows = gaussian_convergence(
        a.units.length,
        a.units.momentum,
        a.units.hbar,
        &a.particles,
        a.t_max,
        a.dp_max,
        a.points,
    )?;
    let mut table = stamp(convergence_table(&rows), "study", &a.units);
    set_meta(&mut table, "study", "gaussian-convergence");
    set_meta(&mut table, "t_max", fmt_f64(a.t_max));
    set_meta(&mut table, "dp_max", fmt_f64(a.dp_max));
    set_meta(&mut table, "points", a.points);
    write(&a.out, table.to_csv().as_bytes())?;

    let dx: Vec<f64> = rows.iter().map(|r| r.dx_deviation).collect();
    let dp: Vec<f64> = rows.iter().map(|r| r.dp_deviation).collect();
    let mut m = json_header("study", &a.units);
    m.insert("study".into(), "gaussian-convergence".into());
    m.insert("csv".into(), a.out.display().to_string().into());
    m.insert("t_max".into(), a.t_max.into());
    m.insert("dp_max".into(), a.dp_max.into());
    m.insert("points".into(), a.points.into());
    m.insert("rows".into(), serde_json::to_value(&rows).expect("rows serialize"));
    m.insert(
        "trend".into(),
        json!({
            "dx_deviation": trend(&dx),
            "dp_deviation": trend(&dp),
        }),
    );
    let summary = Value::Object(m);
    write_json(&summary_path(&a.out), &summary)?;
    print!("{}", subplanck::io::to_json(&summary));
    Ok(())
}

fn variance(a: VarianceArgs) -> CliResult<()> {
    let spec = VarianceSpec {
        ensemble: a.ensemble,
        cell: a.cell,
        region_radius: a.radius,
        components: a.components,
        seed: a.seed,
    };
    let rows = variance_scaling(&a.k, &spec)?;
    let mut table = variance_table(&rows, &spec);
    let mut head = vec![
        ("command".to_string(), "study".to_string()),
        ("build".to_string(), crate::output::BUILD_ID.to_string()),
        ("study".to_string(), "variance-scaling".to_string()),
    ];
    head.append(&mut table.metadata);
    table.metadata = head;
    write(&a.out, table.to_csv().as_bytes())?;

    let fluct: Vec<f64> = rows.iter().map(|r| r.relative_fluctuation).collect();
    let mut m = Map::new();
    m.insert("command".into(), "study".into());
    m.insert("build".into(), crate::output::BUILD_ID.into());
    m.insert("study".into(), "variance-scaling".into());
    m.insert("csv".into(), a.out.display().to_string().into());
    m.insert("spec".into(), serde_json::to_value(spec).expect("spec serializes"));
    m.insert("rows".into(), serde_json::to_value(&rows).expect("rows serialize"));
    m.insert("trend".into(), json!({ "relative_fluctuation": trend(&fluct) }));
    let summary = Value::Object(m);
    write_json(&summary_path(&a.out), &summary)?;
    print!("{}", subplanck::io::to_json(&summary));
    Ok(())
}
