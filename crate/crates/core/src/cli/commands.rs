use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{
    fmt_float, usage, write_artifact, write_manifest, BoundArgs, Cli, Command, ConstructArgs,
    Family, Format, FrameKind, ManovaArgs, Method, MomentsArgs, SpectrumArgs, SweepArgs, EXIT_OK,
    EXIT_VIOLATION,
};
use crate::bounds::{check_bound, BoundReport, EqualityClass, Tolerances};
use crate::erasure_moments::{
    expected_moment, montecarlo_moment, ErasureModel, SubsetTraceTable, MAX_BRUTEFORCE_N,
    MAX_CLOSED_ORDER,
};
use crate::error::{Error, Result};
use crate::frames::{
    coherence, harmonic_etf, is_etf, is_utf, nearest_utf, random_frame, repeated_onb, simplex_etf,
    Field, Frame, FrameMeta, CLASSIFY_TOL,
};
use crate::manova::{density, moment_closed, moment_numeric, support, ManovaLaw, ManovaParams};
use crate::rng;
use crate::spectral::{subset_ks_report, subset_spectrum_samples};

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Construct(a) => construct(&cli.command, a, stdout, stderr),
        Command::Moments(a) => moments(&cli.command, a, stdout, stderr),
        Command::Bound(a) => bound(&cli.command, a, stdout, stderr),
        Command::Manova(a) => manova(&cli.command, a, stdout, stderr),
        Command::Sweep(a) => sweep(&cli.command, a, stdout, stderr),
        Command::Spectrum(a) => spectrum(&cli.command, a, stdout, stderr),
        Command::Ks(a) => ks(&cli.command, a, stdout, stderr),
    }
}

fn sorted_probabilities(ps: &[f64]) -> Result<Vec<f64>> {
    if ps.is_empty() {
        return Err(usage("empty p-grid"));
    }
    let mut v = ps.to_vec();
    if let Some(bad) = v.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidProbability(*bad));
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

fn sorted_orders(ds: &[usize]) -> Result<Vec<usize>> {
    if ds.is_empty() {
        return Err(usage("empty d-list"));
    }
    let mut v = ds.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

fn require<T: Copy>(value: Option<T>, name: &str, what: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("{what} requires --{name}")))
}

fn load_frame(path: &Path) -> Result<(Frame, FrameMeta)> {
    let (frame, meta) = Frame::load(path)?;
    let meta = meta.unwrap_or_else(|| FrameMeta {
        construction: "file".into(),
        parameters: serde_json::json!({ "path": path.display().to_string() }),
        ..Default::default()
    });
    Ok((frame, meta))
}

fn construct(
    cmd: &Command,
    a: &ConstructArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let need_m = || require(a.m, "m", "this construction");
    let mut seeds = Vec::new();
    let mut meta = FrameMeta {
        construction: match a.kind {
            FrameKind::Random => "random",
            FrameKind::Simplex => "simplex",
            FrameKind::Harmonic => "harmonic",
            FrameKind::RepeatedOnb => "repeated-onb",
            FrameKind::NearestUtf => "nearest-utf",
        }
        .into(),
        ..Default::default()
    };
    let frame = match a.kind {
        FrameKind::Random => {
            let (m, n) = (need_m()?, require(a.n, "n", "random")?);
            let seed = require(a.seed, "seed", "random")?;
            seeds.push(seed);
            meta.seed = Some(seed);
            meta.generator = Some(rng::GENERATOR.into());
            meta.parameters = serde_json::json!({ "m": m, "n": n, "field": Field::from(a.field) });
            random_frame(m, n, a.field.into(), seed)?
        }
        FrameKind::Simplex => {
            let m = need_m()?;
            meta.parameters = serde_json::json!({ "m": m });
            simplex_etf(m)?
        }
        FrameKind::Harmonic => {
            let q = require(a.q, "q", "harmonic")?;
            meta.parameters = serde_json::json!({ "q": q });
            harmonic_etf(q)?
        }
        FrameKind::RepeatedOnb => {
            let m = need_m()?;
            meta.parameters = serde_json::json!({ "m": m, "copies": a.copies });
            repeated_onb(m, a.copies)?
        }
        FrameKind::NearestUtf => {
            let start = match &a.frame {
                Some(path) => load_frame(path)?.0,
                None => {
                    let (m, n) = (need_m()?, require(a.n, "n", "nearest-utf without --frame")?);
                    let seed = require(a.seed, "seed", "nearest-utf without --frame")?;
                    seeds.push(seed);
                    meta.seed = Some(seed);
                    meta.generator = Some(rng::GENERATOR.into());
                    random_frame(m, n, a.field.into(), seed)?
                }
            };
            let out = nearest_utf(&start, a.max_iters, a.tol)?;
            writeln!(
                stdout,
                "converged={} iterations={} residual={}",
                out.converged,
                out.iterations,
                fmt_float(out.residual)
            )?;
            meta.parameters = serde_json::json!({
                "max_iters": a.max_iters,
                "tol": a.tol,
                "converged": out.converged,
            });
            out.frame
        }
    };
    std::fs::write(&a.out, frame.to_json(Some(meta))?)?;
    write_manifest(cmd, seeds, Some(&a.out), stderr)?;

    write!(
        stdout,
        "m={} n={} field={} UTF={} ETF={}",
        frame.m(),
        frame.n(),
        frame.field(),
        is_utf(&frame, CLASSIFY_TOL),
        is_etf(&frame, CLASSIFY_TOL)
    )?;
    if let Ok(c) = coherence(&frame) {
        write!(
            stdout,
            " rms_sq={} max_sq={} welch_floor={}",
            fmt_float(c.rms_sq),
            fmt_float(c.max_sq),
            fmt_float(c.welch_floor)
        )?;
    }
    writeln!(stdout)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MomentRow {
    p: f64,
    d: usize,
    method: Method,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<f64>,
}

fn moments(
    cmd: &Command,
    a: &MomentsArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let ps = sorted_probabilities(&a.p)?;
    let ds = sorted_orders(&a.d)?;
    let (frame, _) = load_frame(&a.frame)?;
    let max_d = *ds.last().expect("nonempty");
    let mut seeds = Vec::new();
    let mut rows = Vec::new();
    match a.method {
        Method::Poly => {
            if max_d > MAX_CLOSED_ORDER {
                return Err(usage(format!(
                    "method poly supports d <= {MAX_CLOSED_ORDER}; higher orders have no closed \
                     coefficient identities here (use --method brute or mc)"
                )));
            }
            for &p in &ps {
                for &d in &ds {
                    let value = expected_moment(&frame, p, d)?;
                    rows.push(MomentRow {
                        p,
                        d,
                        method: a.method,
                        value,
                        stderr: None,
                    });
                }
            }
        }
        Method::Brute => {
            if frame.n() > MAX_BRUTEFORCE_N {
                return Err(usage(format!(
                    "method brute enumerates 2^n keep-patterns and is limited to n <= \
                     {MAX_BRUTEFORCE_N} (frame has n = {})",
                    frame.n()
                )));
            }
            let table = SubsetTraceTable::enumerate(&frame, max_d)?;
            for &p in &ps {
                for &d in &ds {
                    let value = table.moment(p, d)?;
                    rows.push(MomentRow {
                        p,
                        d,
                        method: a.method,
                        value,
                        stderr: None,
                    });
                }
            }
        }
        Method::Mc => {
            let trials = require(a.trials, "trials", "method mc")?;
            let seed = require(a.seed, "seed", "method mc")?;
            seeds.push(seed);
            for &p in &ps {
                let model = ErasureModel::new(p, seed)?;
                for &d in &ds {
                    let est = montecarlo_moment(&frame, &model, d, trials)?;
                    rows.push(MomentRow {
                        p,
                        d,
                        method: a.method,
                        value: est.value,
                        stderr: Some(est.stderr),
                    });
                }
            }
        }
    }
    let body = match a.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut s = String::from("p,d,method,value,stderr\n");
            for r in &rows {
                let method = match r.method {
                    Method::Poly => "poly",
                    Method::Brute => "brute",
                    Method::Mc => "mc",
                };
                let se = r.stderr.map(fmt_float).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    fmt_float(r.p),
                    r.d,
                    method,
                    fmt_float(r.value),
                    se
                );
            }
            s
        }
    };
    write_artifact(a.out.as_deref(), body.as_bytes(), stdout)?;
    write_manifest(cmd, seeds, a.out.as_deref(), stderr)?;
    Ok(EXIT_OK)
}

fn bound_csv(reports: &[BoundReport]) -> String {
    let mut s = String::from("m,n,p,d,moment,bound,slack,equality_class\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.params.m,
            r.params.n,
            fmt_float(r.params.p),
            r.params.d,
            fmt_float(r.moment),
            fmt_float(r.bound),
            fmt_float(r.slack),
            r.equality_class
        );
    }
    s
}

fn bound(
    cmd: &Command,
    a: &BoundArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let ps = sorted_probabilities(&a.p)?;
    let ds = sorted_orders(&a.d)?;
    if let Some(bad) = ds.iter().find(|d| !(2..=4).contains(*d)) {
        return Err(Error::UnsupportedOrder {
            d: *bad,
            min: 2,
            max: 4,
        });
    }
    let (frame, meta) = load_frame(&a.frame)?;
    let tol = Tolerances::default();
    let mut reports = Vec::new();
    for &p in &ps {
        for &d in &ds {
            reports.push(check_bound(&frame, p, d, &tol)?.with_frame_meta(Some(meta.clone())));
        }
    }
    let body = match a.format {
        Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
        Format::Csv => bound_csv(&reports),
    };
    write_artifact(a.out.as_deref(), body.as_bytes(), stdout)?;
    write_manifest(cmd, Vec::new(), a.out.as_deref(), stderr)?;
    let violations = reports
        .iter()
        .filter(|r| r.equality_class == EqualityClass::Violation)
        .count();
    if violations > 0 {
        writeln!(stderr, "error: {violations} bound violation(s) detected")?;
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

fn manova(
    cmd: &Command,
    a: &ManovaArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let params = ManovaParams::new(a.gamma, a.p)?;
    let s = support(&params);
    let law = ManovaLaw::new(params)?;
    let mut body = format!(
        "# gamma={},p={},r_minus={},r_plus={},atom_location={},atom_weight={}\n",
        fmt_float(a.gamma),
        fmt_float(a.p),
        fmt_float(s.r_minus),
        fmt_float(s.r_plus),
        fmt_float(s.atom_location),
        fmt_float(s.atom_weight)
    );
    if a.density {
        if law.is_atomic_only() {
            body.push_str("# atomic-only distribution: no bulk density\n");
            body.push_str("t,density\n");
        } else {
            if a.points < 2 {
                return Err(usage("--points must be at least 2"));
            }
            body.push_str("t,density\n");
            let width = s.r_plus - s.r_minus;
            for i in 0..a.points {
                let t = s.r_minus + width * i as f64 / (a.points - 1) as f64;
                let _ = writeln!(body, "{},{}", fmt_float(t), fmt_float(density(t, &params)?));
            }
        }
    } else {
        body.push_str("gamma,p,d,closed,numeric,abs_err\n");
        for d in sorted_orders(&a.d)? {
            let numeric = moment_numeric(&params, d)?;
            let (closed, err) = match moment_closed(&params, d) {
                Ok(c) => (fmt_float(c), fmt_float((c - numeric).abs())),
                Err(_) => (String::new(), String::new()),
            };
            let _ = writeln!(
                body,
                "{},{},{},{},{},{}",
                fmt_float(a.gamma),
                fmt_float(a.p),
                d,
                closed,
                fmt_float(numeric),
                err
            );
        }
    }
    write_artifact(a.out.as_deref(), body.as_bytes(), stdout)?;
    write_manifest(cmd, Vec::new(), a.out.as_deref(), stderr)?;
    Ok(EXIT_OK)
}

#[derive(Clone, Debug, Serialize)]
struct SweepRow {
    family: &'static str,
    parameter: u64,
    m: Option<usize>,
    n: Option<usize>,
    seed: Option<u64>,
    p: f64,
    d: usize,
    moment: Option<f64>,
    bound: Option<f64>,
    slack: Option<f64>,
    equality_class: Option<EqualityClass>,
    ks_distance: Option<f64>,
    error: Option<String>,
}

fn sweep(
    cmd: &Command,
    a: &SweepArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let ps = sorted_probabilities(&a.p)?;
    let ds = sorted_orders(&a.d)?;
    let family_name = match a.family {
        Family::Random => "random",
        Family::Simplex => "simplex",
        Family::Harmonic => "harmonic",
        Family::RepeatedOnb => "repeated-onb",
    };
    let ks_seed = match a.trials {
        Some(_) => Some(require(a.seed, "seed", "--trials")?),
        None => None,
    };

    // (parameter, seed, construction result)
    let mut members: Vec<(u64, Option<u64>, Result<Frame>)> = Vec::new();
    match a.family {
        Family::Random => {
            let (m, n) = (
                require(a.m, "m", "family random")?,
                require(a.n, "n", "family random")?,
            );
            let base = require(a.seed, "seed", "family random")?;
            if a.seeds == 0 {
                return Err(usage("--seeds must be at least 1"));
            }
            for i in 0..a.seeds {
                let seed = base.wrapping_add(i);
                members.push((
                    m as u64,
                    Some(seed),
                    random_frame(m, n, a.field.into(), seed),
                ));
            }
        }
        family => {
            if a.values.is_empty() {
                return Err(usage("--values is required for this family"));
            }
            let mut values = a.values.clone();
            values.sort_unstable();
            values.dedup();
            for v in values {
                let frame = match family {
                    Family::Simplex => simplex_etf(v as usize),
                    Family::Harmonic => harmonic_etf(v),
                    Family::RepeatedOnb => repeated_onb(v as usize, a.copies),
                    Family::Random => unreachable!(),
                };
                members.push((v, None, frame));
            }
        }
    }

    let tol = Tolerances::default();
    let mut rows = Vec::new();
    let mut failures = 0;
    for (parameter, seed, frame) in &members {
        let base = SweepRow {
            family: family_name,
            parameter: *parameter,
            m: None,
            n: None,
            seed: *seed,
            p: f64::NAN,
            d: 0,
            moment: None,
            bound: None,
            slack: None,
            equality_class: None,
            ks_distance: None,
            error: None,
        };
        let frame = match frame {
            Ok(f) => f,
            Err(e) => {
                failures += 1;
                for &p in &ps {
                    for &d in &ds {
                        rows.push(SweepRow {
                            p,
                            d,
                            error: Some(e.to_string()),
                            ..base.clone()
                        });
                    }
                }
                continue;
            }
        };
        for &p in &ps {
            let ks = match (a.trials, ks_seed) {
                (Some(trials), Some(seed)) => ErasureModel::new(p, seed)
                    .and_then(|model| subset_ks_report(frame, &model, trials))
                    .map(|r| r.distance),
                _ => Err(Error::EmptySample),
            };
            for &d in &ds {
                let mut row = SweepRow {
                    m: Some(frame.m()),
                    n: Some(frame.n()),
                    p,
                    d,
                    ks_distance: ks.as_ref().ok().copied(),
                    ..base.clone()
                };
                if let (Some(_), Err(e)) = (a.trials, &ks) {
                    row.error = Some(format!("ks: {e}"));
                }
                match check_bound(frame, p, d, &tol) {
                    Ok(r) => {
                        row.moment = Some(r.moment);
                        row.bound = Some(r.bound);
                        row.slack = Some(r.slack);
                        row.equality_class = Some(r.equality_class);
                    }
                    Err(e) => {
                        failures += 1;
                        row.error = Some(e.to_string());
                    }
                }
                rows.push(row);
            }
        }
    }

    let body = match a.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut s = String::from(
                "family,parameter,m,n,seed,p,d,moment,bound,slack,equality_class,ks_distance,error\n",
            );
            let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.family,
                    r.parameter,
                    r.m.map(|v| v.to_string()).unwrap_or_default(),
                    r.n.map(|v| v.to_string()).unwrap_or_default(),
                    r.seed.map(|v| v.to_string()).unwrap_or_default(),
                    fmt_float(r.p),
                    r.d,
                    opt(r.moment),
                    opt(r.bound),
                    opt(r.slack),
                    r.equality_class.map(|c| c.to_string()).unwrap_or_default(),
                    opt(r.ks_distance),
                    r.error.as_deref().map(csv_escape).unwrap_or_default()
                );
            }
            s
        }
    };
    write_artifact(a.out.as_deref(), body.as_bytes(), stdout)?;
    let seeds = members
        .iter()
        .filter_map(|(_, s, _)| *s)
        .chain(ks_seed)
        .collect();
    write_manifest(cmd, seeds, a.out.as_deref(), stderr)?;
    if failures > 0 {
        writeln!(
            stderr,
            "warning: {failures} sweep entries failed; see the error column"
        )?;
    }
    if rows
        .iter()
        .any(|r| r.equality_class == Some(EqualityClass::Violation))
    {
        writeln!(stderr, "error: bound violation detected")?;
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

fn csv_escape(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn spectrum(
    cmd: &Command,
    a: &SpectrumArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let (frame, _) = load_frame(&a.frame)?;
    let seed = require(a.seed, "seed", "spectrum")?;
    let model = ErasureModel::new(a.p, seed)?;
    let spectra = subset_spectrum_samples(&frame, &model, a.trials)?;
    let mut body = String::from("trial_index,eigenvalue\n");
    for (t, s) in spectra.iter().enumerate() {
        for v in &s.values {
            let _ = writeln!(body, "{t},{}", fmt_float(*v));
        }
    }
    write_artifact(a.out.as_deref(), body.as_bytes(), stdout)?;
    write_manifest(cmd, vec![seed], a.out.as_deref(), stderr)?;
    Ok(EXIT_OK)
}

fn ks(
    cmd: &Command,
    a: &SpectrumArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let (frame, _) = load_frame(&a.frame)?;
    let seed = require(a.seed, "seed", "ks")?;
    let model = ErasureModel::new(a.p, seed)?;
    let report = subset_ks_report(&frame, &model, a.trials)?;
    let body = serde_json::to_string_pretty(&report)? + "\n";
    write_artifact(a.out.as_deref(), body.as_bytes(), stdout)?;
    write_manifest(cmd, vec![seed], a.out.as_deref(), stderr)?;
    Ok(EXIT_OK)
}
