use std::io::Write;
use std::path::Path;

use bmhull::analytic::{cdf_t_many, joint_pdf_combined, pdf_m, pdf_t, ClosedFormCatalog};
use bmhull::montecarlo::{grid_reference, ks_test_grid, Functional, GofReport, Harness};
use bmhull::quadrature::{expected_area_mn, expected_perimeter_mn, QuadSpec};
use bmhull::validate;
use bmhull::{EnsembleSpec, ProcessCounts};
use serde_json::json;

use crate::manifest::{write_sidecar, RunManifest};
use crate::output::{finite, round_sig, sig};
use crate::{
    AnalyticArgs, CliError, DensityArgs, Level, SimFunctional, SimulateArgs, TableArgs,
    TableFunctional, ValidateArgs, Which,
};

const EXACT_DIGITS: usize = 12;
const MC_DIGITS: usize = 6;
const KS_ALPHA: f64 = 0.01;
pub const TABLE_MAX: u32 = 6;

/// CSV to `out` (with a manifest alongside) or to stdout.
fn csv_sink(
    out: Option<&Path>,
    manifest: &RunManifest,
) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match out {
        Some(path) => {
            write_sidecar(path, manifest)?;
            Box::new(std::io::BufWriter::new(std::fs::File::create(path)?))
        }
        None => Box::new(std::io::stdout().lock()),
    };
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(sink))
}

pub fn analytic(args: &AnalyticArgs) -> Result<(), CliError> {
    let catalog = ClosedFormCatalog::STANDARD;
    let names: Vec<&str> = if args.names.is_empty() {
        ClosedFormCatalog::NAMES.to_vec()
    } else {
        args.names.iter().map(String::as_str).collect()
    };
    let mut entries = Vec::with_capacity(names.len());
    for name in names {
        let entry = catalog.get(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown constant `{name}`; valid names: {}",
                ClosedFormCatalog::NAMES.join(", ")
            ))
        })?;
        entries.push(entry);
    }
    let manifest = RunManifest::new("analytic", args, 0)?;
    let mut w = csv_sink(None, &manifest)?;
    w.write_record(["name", "expression", "value"])?;
    for e in entries {
        w.write_record([
            e.name,
            e.expression,
            &sig(finite(e.name, e.value)?, EXACT_DIGITS),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn table(args: &TableArgs) -> Result<(), CliError> {
    for (flag, v) in [("--m", args.m), ("--n", args.n)] {
        if !(1..=TABLE_MAX).contains(&v) {
            return Err(CliError::Usage(format!(
                "{flag} must lie in 1..={TABLE_MAX}, got {v}"
            )));
        }
    }
    let spec = QuadSpec::with_tol(args.tol);
    spec.validate()?;
    let manifest = RunManifest::new("table", args, 0)?;
    let mut w = csv_sink(args.out.as_deref(), &manifest)?;
    w.write_record(["m", "n", "value", "err_bound"])?;
    let mut failures = Vec::new();
    for m in 1..=args.m {
        for n in 1..=args.n {
            let counts = ProcessCounts::new(m, n)?;
            let q = match args.functional {
                TableFunctional::Perimeter => expected_perimeter_mn(counts, &spec),
                TableFunctional::Area => expected_area_mn(counts, &spec),
            };
            match q {
                Ok(q) if q.value.is_finite() && q.error_bound.is_finite() => w.write_record([
                    m.to_string(),
                    n.to_string(),
                    sig(q.value, EXACT_DIGITS),
                    format!("{:.3e}", q.error_bound),
                ])?,
                outcome => {
                    let why = match outcome {
                        Err(e) => e.to_string(),
                        Ok(q) => format!("non-finite result {q:?}"),
                    };
                    // Flagged row: fields left empty rather than emitting a
                    // value that did not meet the tolerance.
                    w.write_record([m.to_string(), n.to_string(), String::new(), String::new()])?;
                    failures.push(format!("({m},{n}): {why}"));
                }
            }
        }
    }
    w.flush()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "quadrature failed for {}",
            failures.join("; ")
        )))
    }
}

fn gof_json(report: &GofReport) -> serde_json::Value {
    json!({
        "statistic": round_sig(report.ks_statistic, MC_DIGITS),
        "scaled_statistic": round_sig(report.scaled_statistic(), MC_DIGITS),
        "p_value": round_sig(report.p_value_asymptotic, MC_DIGITS),
        "alpha": KS_ALPHA,
        "passed": report.passes(KS_ALPHA),
    })
}

/// Grid-corrected CDF of the argmax time for the ensembles whose law is
/// known in closed form.
fn argmax_reference(counts: ProcessCounts, steps: usize) -> Result<Option<Vec<f64>>, CliError> {
    Ok(match (counts.bm(), counts.bb()) {
        (1, 1) => {
            let half: Vec<f64> = (0..steps)
                .map(|k| (k as f64 + 0.5) / steps as f64)
                .collect();
            let mut cdf = cdf_t_many(&half, &QuadSpec::default())?;
            cdf.push(1.0);
            Some(cdf)
        }
        (1, 0) => Some(grid_reference(steps, |t| {
            std::f64::consts::FRAC_2_PI * t.clamp(0.0, 1.0).sqrt().asin()
        })),
        (0, 1) => Some(validate::uniform_grid_reference(steps)),
        _ => None,
    })
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let spec = EnsembleSpec::new(args.m, args.n, args.steps, args.seed)?;
    if args.reps < 2 {
        return Err(CliError::Usage("--reps must be at least 2".into()));
    }
    if !(args.ci_level > 0.0 && args.ci_level < 1.0) {
        return Err(CliError::Usage(
            "--ci-level must lie strictly between 0 and 1".into(),
        ));
    }
    let harness = Harness {
        workers: args.workers,
        ci_level: args.ci_level,
    };
    let manifest = RunManifest::new("simulate", args, args.seed)?;

    let (values, mut summary) = match args.functional {
        SimFunctional::Perimeter | SimFunctional::Area => {
            let functional = if args.functional == SimFunctional::Perimeter {
                Functional::Perimeter
            } else {
                Functional::Area
            };
            let samples = harness.hull_samples(&spec, args.reps)?;
            let values = samples.values(functional).to_vec();
            (values, json!({ "functional": functional }))
        }
        SimFunctional::DensityOfT => {
            let samples = harness.sample_argmax_times(&spec, args.reps)?;
            let ks = match argmax_reference(spec.counts, spec.steps)? {
                Some(reference) => gof_json(&ks_test_grid(&samples.times, spec.steps, &reference)?),
                None => serde_json::Value::Null,
            };
            let summary = json!({
                "functional": "density-of-t",
                "bm_fraction": round_sig(samples.bm_fraction(), MC_DIGITS),
                "bm_fraction_std_error": round_sig(samples.bm_fraction_std_error(), MC_DIGITS),
                "ks": ks,
            });
            (samples.times, summary)
        }
    };

    for (i, v) in values.iter().enumerate() {
        finite(&format!("replicate {i}"), *v)?;
    }
    let est = harness.estimate(&values, &spec);
    for (what, v) in [("mean", est.mean), ("std_error", est.std_error)] {
        finite(what, v)?;
    }
    let fields = summary.as_object_mut().expect("summary is an object");
    fields.insert("mean".into(), json!(round_sig(est.mean, MC_DIGITS)));
    fields.insert(
        "std_error".into(),
        json!(round_sig(est.std_error, MC_DIGITS)),
    );
    fields.insert("ci_low".into(), json!(round_sig(est.ci_low, MC_DIGITS)));
    fields.insert("ci_high".into(), json!(round_sig(est.ci_high, MC_DIGITS)));
    fields.insert("ci_level".into(), json!(est.ci_level));
    fields.insert("reps".into(), json!(est.reps));
    fields.insert("manifest".into(), serde_json::to_value(&manifest)?);

    if let Some(path) = &args.samples_csv {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(file);
        let column = if args.functional == SimFunctional::DensityOfT {
            "time"
        } else {
            "value"
        };
        w.write_record(["replicate", column])?;
        for (i, v) in values.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()])?;
        }
        w.flush()?;
    }

    let text = serde_json::to_string_pretty(&summary)? + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn density(args: &DensityArgs) -> Result<(), CliError> {
    let n = args.points;
    if n < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    if !(args.x_max > 0.0 && args.x_max.is_finite()) {
        return Err(CliError::Usage(
            "--x-max must be positive and finite".into(),
        ));
    }
    let manifest = RunManifest::new("density", args, 0)?;
    let mut w = csv_sink(args.out.as_deref(), &manifest)?;
    // Time grids use cell midpoints: the densities are infinite at 0 or 1.
    let t_at = |j: usize| (j as f64 + 0.5) / n as f64;
    let x_at = |i: usize| args.x_max * i as f64 / (n - 1) as f64;
    match args.which {
        Which::T => {
            w.write_record(["t", "pdf"])?;
            for j in 0..n {
                let t = t_at(j);
                w.write_record([
                    sig(t, EXACT_DIGITS),
                    sig(finite("pdf_T", pdf_t(t))?, EXACT_DIGITS),
                ])?;
            }
        }
        Which::M => {
            w.write_record(["x", "pdf"])?;
            for i in 0..n {
                let x = x_at(i);
                w.write_record([
                    sig(x, EXACT_DIGITS),
                    sig(finite("pdf_M", pdf_m(x))?, EXACT_DIGITS),
                ])?;
            }
        }
        Which::Joint => {
            w.write_record(["x", "t", "pdf"])?;
            for i in 0..n {
                let x = x_at(i);
                for j in 0..n {
                    let t = t_at(j);
                    let v = finite("joint density", joint_pdf_combined(x, t))?;
                    w.write_record([
                        sig(x, EXACT_DIGITS),
                        sig(t, EXACT_DIGITS),
                        sig(v, EXACT_DIGITS),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let mut cfg = validate::Config {
        level: match args.level {
            Level::Fast => validate::Level::Fast,
            Level::Full => validate::Level::Full,
        },
        seed: args.seed,
        harness: Harness {
            workers: args.workers,
            ..Harness::default()
        },
        ..validate::Config::default()
    };
    if let Some(name) = &args.tamper {
        let v = cfg.catalog.value_mut(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown constant `{name}`; valid names: {}",
                ClosedFormCatalog::NAMES.join(", ")
            ))
        })?;
        *v *= 1.0 + 1e-6;
    }
    if let Some(r) = args.mc_reps {
        cfg.mc_reps = r;
    }
    if let Some(r) = args.ks_reps {
        cfg.ks_reps = r;
    }

    let report = validate::run(&cfg);
    let failed: Vec<&str> = report
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    let mut out = std::io::stdout().lock();
    if args.json {
        let manifest = RunManifest::new("validate", args, args.seed)?;
        let doc = json!({ "checks": report, "passed": failed.is_empty(), "manifest": manifest });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        for c in &report {
            write!(
                out,
                "{} {:<58} target={:<20} achieved={:<20} tol={}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                sig(c.target, EXACT_DIGITS),
                if c.achieved.is_finite() {
                    sig(c.achieved, EXACT_DIGITS)
                } else {
                    c.achieved.to_string()
                },
                if c.tolerance.is_finite() {
                    format!("{:.3e}", c.tolerance)
                } else {
                    "-".into()
                },
            )?;
            match &c.detail {
                Some(d) => writeln!(out, "  [{d}]")?,
                None => writeln!(out)?,
            }
        }
        writeln!(
            out,
            "{}/{} checks passed",
            report.len() - failed.len(),
            report.len()
        )?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "failed checks: {}",
            failed.join("; ")
        )))
    }
}
