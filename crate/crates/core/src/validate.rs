//! Cross-checks between the closed forms, the quadrature tables and the
//! Monte Carlo harness.
//!
//! Every check compares an achieved value with a target at a fixed absolute
//! tolerance, or at `max(k SE, relative band)` for Monte Carlo estimates.
//! Targets that have a catalogue entry are read from the supplied
//! [`ClosedFormCatalog`], so a corrupted constant surfaces as a failed check
//! naming the identity it breaks.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::analytic::{
    cdf_t_many, erf, joint_pdf_bb, joint_pdf_bm, joint_pdf_combined, pdf_m, pdf_m_mn, pdf_t,
    pdf_t_bm_part, ClosedFormCatalog,
};
use crate::error::Result;
use crate::geometry::convex_hull;
use crate::montecarlo::{grid_reference, ks_test_grid, Functional, Harness};
use crate::process_sim::{EnsembleSpec, ProcessCounts};
use crate::quadrature::{
    expected_area_mn, expected_perimeter_mn, integrate, integrate_half_line, Endpoints, QuadSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Closed forms, quadrature identities and geometry.
    Fast,
    /// Everything in `Fast` plus the Monte Carlo comparisons.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub target: f64,
    pub achieved: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn abs(name: impl Into<String>, target: f64, achieved: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            target,
            achieved,
            tolerance,
            passed: achieved.is_finite() && (achieved - target).abs() <= tolerance,
            detail: None,
        }
    }

    fn errored(
        name: impl Into<String>,
        target: f64,
        tolerance: f64,
        err: impl std::fmt::Display,
    ) -> Self {
        CheckResult {
            name: name.into(),
            target,
            achieved: f64::NAN,
            tolerance,
            passed: false,
            detail: Some(err.to_string()),
        }
    }

    fn from_result(name: &str, target: f64, tolerance: f64, achieved: Result<f64>) -> Self {
        match achieved {
            Ok(v) => Self::abs(name, target, v, tolerance),
            Err(e) => Self::errored(name, target, tolerance, e),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Parameters of a validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub level: Level,
    pub catalog: ClosedFormCatalog,
    pub harness: Harness,
    pub seed: u64,
    /// Replicates and grid size for the hull and moment comparisons.
    pub mc_reps: u64,
    pub mc_steps: usize,
    /// Replicates and grid size for the argmax-time comparison.
    pub ks_reps: u64,
    pub ks_steps: usize,
    /// Hulls used for the Cauchy-formula checks.
    pub cauchy_hulls: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            level: Level::Fast,
            catalog: ClosedFormCatalog::STANDARD,
            harness: Harness::default(),
            seed: 20_240_601,
            mc_reps: 50_000,
            mc_steps: 8192,
            ks_reps: 100_000,
            ks_steps: 4096,
            cauchy_hulls: 1000,
        }
    }
}

pub const DENSITY_TOL: f64 = 1e-8;
pub const CATALOG_TOL: f64 = 1e-12;
pub const PRINTED_VALUE_TOL: f64 = 5e-4;
pub const AREA_CLOSED_FORM_TOL: f64 = 1e-6;
pub const CAUCHY_REL_TOL: f64 = 1e-6;
pub const KS_ALPHA: f64 = 0.01;

fn quad() -> QuadSpec {
    QuadSpec::with_tol(1e-11)
}

/// `int_0^1 int_0^inf f(x, t) dx dt`, with the time integral inside so that
/// narrow time profiles at small `x` are resolved by the singular-endpoint
/// map.
pub fn joint_mass<F: Fn(f64, f64) -> f64>(f: F) -> Result<f64> {
    let inner = quad().singular(Endpoints::BOTH);
    let failure = std::cell::RefCell::new(None);
    let r = integrate_half_line(
        |x| match integrate(|t| f(x, t), 0.0, 1.0, &inner) {
            Ok(q) => q.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &QuadSpec::with_tol(1e-10),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r?.value)
}

fn half_line(f: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(integrate_half_line(f, &quad())?.value)
}

fn unit(f: impl Fn(f64) -> f64, singular: Endpoints) -> Result<f64> {
    Ok(integrate(f, 0.0, 1.0, &quad().singular(singular))?.value)
}

/// Catalogue values against direct `f64` evaluation of their expressions,
/// and the two structural identities tying them together.
pub fn catalog_checks(c: &ClosedFormCatalog) -> Vec<CheckResult> {
    let s5 = 5f64.sqrt();
    let atan_half = 0.5f64.atan();
    let direct = [
        (
            "expected_perimeter_combined",
            (2.0 * PI).sqrt() * (2.0 + atan_half),
        ),
        ("expected_area_combined", (25.0 - 7.0 * s5) * PI / 12.0),
        ("expected_perimeter_bm", (8.0 * PI).sqrt()),
        ("expected_perimeter_bb", (PI.powi(3) / 2.0).sqrt()),
        ("expected_area_bm", PI / 2.0),
        ("expected_area_bb", PI / 3.0),
        ("prob_bm_wins", 1.0 - 1.0 / s5),
        ("moment_M1", (2.0 + atan_half) / (2.0 * PI).sqrt()),
        ("moment_M2", 1.0 + 1.0 / (2.0 * s5)),
        ("moment_Mprime2", (41.0 - 13.0 * s5) / (12.0 * s5)),
    ];
    let mut out: Vec<CheckResult> = direct
        .iter()
        .map(|&(name, value)| {
            let stored = c.get(name).map(|e| e.value).unwrap_or(f64::NAN);
            CheckResult::abs(format!("catalog {name}"), value, stored, CATALOG_TOL)
        })
        .collect();
    out.push(CheckResult::abs(
        "catalog perimeter = 2 pi E[M]",
        2.0 * PI * c.moment_m1,
        c.expected_perimeter_combined,
        CATALOG_TOL,
    ));
    out.push(CheckResult::abs(
        "catalog area = pi (E[M^2] - E[M'^2])",
        PI * (c.moment_m2 - c.moment_mprime2),
        c.expected_area_combined,
        CATALOG_TOL,
    ));
    out
}

pub fn normalization_checks() -> Vec<CheckResult> {
    let mut out = vec![
        CheckResult::from_result(
            "normalization pdf_T",
            1.0,
            DENSITY_TOL,
            unit(pdf_t, Endpoints::RIGHT),
        ),
        CheckResult::from_result("normalization pdf_M", 1.0, DENSITY_TOL, half_line(pdf_m)),
        CheckResult::from_result(
            "normalization joint_pdf_bm",
            1.0,
            DENSITY_TOL,
            joint_mass(joint_pdf_bm),
        ),
        CheckResult::from_result(
            "normalization joint_pdf_bb",
            1.0,
            DENSITY_TOL,
            joint_mass(joint_pdf_bb),
        ),
        CheckResult::from_result(
            "normalization joint_pdf_combined",
            1.0,
            DENSITY_TOL,
            joint_mass(joint_pdf_combined),
        ),
    ];
    for (m, n) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let counts = ProcessCounts::new(m, n).expect("positive counts");
        out.push(CheckResult::from_result(
            &format!("normalization pdf_M_mn ({m},{n})"),
            1.0,
            DENSITY_TOL,
            half_line(|x| pdf_m_mn(x, counts)),
        ));
    }
    out
}

pub const MARGINAL_TIMES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
pub const MARGINAL_LEVELS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 3.0];

pub fn marginal_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for t in MARGINAL_TIMES {
        out.push(CheckResult::from_result(
            &format!("marginal over x at t={t}"),
            pdf_t(t),
            DENSITY_TOL,
            half_line(|x| joint_pdf_combined(x, t)),
        ));
    }
    for x in MARGINAL_LEVELS {
        out.push(CheckResult::from_result(
            &format!("marginal over t at x={x}"),
            pdf_m(x),
            DENSITY_TOL,
            unit(|t| joint_pdf_combined(x, t), Endpoints::BOTH),
        ));
    }
    out
}

/// Intermediate integrals of the closed-form derivations.
pub fn identity_checks(c: &ClosedFormCatalog) -> Vec<CheckResult> {
    let s5 = 5f64.sqrt();
    let sqrt_2pi = (2.0 * PI).sqrt();
    let erf_half = |x: f64| erf(x * FRAC_1_SQRT_2);
    let one_minus = |x: f64| -(-2.0 * x * x).exp_m1();
    let mut out = vec![CheckResult::from_result(
        "motion-wins mass of pdf_T = prob_bm_wins",
        c.prob_bm_wins,
        DENSITY_TOL,
        unit(pdf_t_bm_part, Endpoints::RIGHT),
    )];
    out.push(CheckResult::from_result(
        "int x e^{-x^2/2}(1-e^{-2x^2}) = 4/5",
        0.8,
        DENSITY_TOL,
        half_line(|x| x * (-0.5 * x * x).exp() * one_minus(x)),
    ));
    out.push(CheckResult::from_result(
        "int x^2 e^{-2x^2} erf(x/sqrt2)",
        1.0 / (10.0 * sqrt_2pi) + 0.5f64.atan() / (4.0 * sqrt_2pi),
        DENSITY_TOL,
        half_line(|x| x * x * (-2.0 * x * x).exp() * erf_half(x)),
    ));
    for t in [0.25, 0.5] {
        out.push(CheckResult::from_result(
            &format!("int x e^{{-x^2/2t}}(1-e^{{-2x^2}}) at t={t}"),
            4.0 * t * t / (4.0 * t + 1.0),
            DENSITY_TOL,
            half_line(|x| x * (-x * x / (2.0 * t)).exp() * one_minus(x)),
        ));
    }
    {
        let t: f64 = 0.5;
        let s = t * (1.0 - t);
        let rhs = (2.0 / PI).sqrt() * s * (s / (1.0 + t - t * t) + s.sqrt() * s.sqrt().atan());
        out.push(CheckResult::from_result(
            "int x^2 e^{-x^2/2t(1-t)} erf(x/sqrt2) at t=0.5",
            rhs,
            DENSITY_TOL,
            half_line(|x| x * x * (-x * x / (2.0 * s)).exp() * erf_half(x)),
        ));
    }
    out.push(CheckResult::from_result(
        "int x^2 e^{-x^2/2}(1-e^{-2x^2})",
        sqrt_2pi * (5.0 * s5 - 1.0) / (10.0 * s5),
        DENSITY_TOL,
        half_line(|x| x * x * (-0.5 * x * x).exp() * one_minus(x)),
    ));
    out.push(CheckResult::from_result(
        "int x^3 e^{-2x^2} erf(x/sqrt2) = 7/(40 sqrt5)",
        7.0 / (40.0 * s5),
        DENSITY_TOL,
        half_line(|x| x.powi(3) * (-2.0 * x * x).exp() * erf_half(x)),
    ));
    out.push(CheckResult::from_result(
        "int t^{3/2}/((4t+1)sqrt(1-t)) = (5+sqrt5)pi/80",
        (5.0 + s5) * PI / 80.0,
        DENSITY_TOL,
        unit(
            |t| t * t.sqrt() / ((4.0 * t + 1.0) * (1.0 - t).sqrt()),
            Endpoints::RIGHT,
        ),
    ));
    out.push(CheckResult::from_result(
        "int [t(1-t)]^{3/2}/(1+t-t^2) = (16-7sqrt5)pi/(8sqrt5)",
        (16.0 - 7.0 * s5) * PI / (8.0 * s5),
        DENSITY_TOL,
        unit(
            |t| (t * (1.0 - t)).powf(1.5) / (1.0 + t - t * t),
            Endpoints::NONE,
        ),
    ));
    out.push(CheckResult::from_result(
        "int t(1-t) atan sqrt(t(1-t)) = (5sqrt5-10)pi/(24sqrt5)",
        (5.0 * s5 - 10.0) * PI / (24.0 * s5),
        DENSITY_TOL,
        unit(
            |t| t * (1.0 - t) * (t * (1.0 - t)).sqrt().atan(),
            Endpoints::NONE,
        ),
    ));
    out
}

/// Printed four-decimal values of the mixed-ensemble expectations.
pub const PRINTED_PERIMETERS: [((u32, u32), f64); 3] =
    [((1, 2), 6.7353), ((2, 1), 7.5945), ((2, 2), 7.9019)];
pub const PRINTED_AREAS: [((u32, u32), f64); 3] =
    [((1, 2), 2.9705), ((2, 1), 3.6966), ((2, 2), 4.0651)];

/// Exact expression for `E[L_{1,2}]`.
pub fn perimeter_one_two_exact() -> f64 {
    let s2 = 2f64.sqrt();
    let acot = |z: f64| (1.0 / z).atan();
    64.0 * (2.0 * PI).sqrt() / 45.0
        + PI.sqrt() / 45.0 * (26.0 * s2 + 90.0 * s2 * acot(2.0) - 45.0 * acot(2.0 * s2))
}

pub fn table_checks(c: &ClosedFormCatalog) -> Vec<CheckResult> {
    let spec = QuadSpec::default();
    let counts = |m, n| ProcessCounts::new(m, n).expect("positive counts");
    let per = |m, n| expected_perimeter_mn(counts(m, n), &spec).map(|q| q.value);
    let area = |m, n| expected_area_mn(counts(m, n), &spec).map(|q| q.value);
    let mut out = vec![CheckResult::from_result(
        "E[L_{1,1}] = expected_perimeter_combined",
        c.expected_perimeter_combined,
        DENSITY_TOL,
        per(1, 1),
    )];
    out.push(CheckResult::from_result(
        "E[L_{1,2}] exact expression",
        perimeter_one_two_exact(),
        DENSITY_TOL,
        per(1, 2),
    ));
    for ((m, n), v) in PRINTED_PERIMETERS {
        out.push(CheckResult::from_result(
            &format!("E[L_{{{m},{n}}}] printed value"),
            v,
            PRINTED_VALUE_TOL,
            per(m, n),
        ));
    }
    out.push(CheckResult::from_result(
        "E[A_{1,1}] = expected_area_combined",
        c.expected_area_combined,
        AREA_CLOSED_FORM_TOL,
        area(1, 1),
    ));
    for ((m, n), v) in PRINTED_AREAS {
        out.push(CheckResult::from_result(
            &format!("E[A_{{{m},{n}}}] printed value"),
            v,
            PRINTED_VALUE_TOL,
            area(m, n),
        ));
    }
    out
}

/// Cauchy perimeter and area formulas on hulls of sampled ensembles; the
/// reported value is the worst relative discrepancy.
pub fn cauchy_checks(hulls: u64, seed: u64) -> Vec<CheckResult> {
    let spec = EnsembleSpec::new(1, 1, 256, seed).expect("valid spec");
    let quad = QuadSpec::with_tol(1e-12);
    let mut worst_per = 0.0f64;
    let mut worst_area = 0.0f64;
    for r in 0..hulls {
        let outcome = spec
            .sample_replicate(r)
            .and_then(|e| convex_hull(&e.all_points()))
            .and_then(|h| {
                let p = h.cauchy_perimeter(&quad)?.value;
                let a = h.cauchy_area(&quad)?.value;
                Ok((
                    (p - h.perimeter()).abs() / h.perimeter(),
                    (a - h.area()).abs() / h.area(),
                ))
            });
        match outcome {
            Ok((p, a)) => {
                worst_per = worst_per.max(p);
                worst_area = worst_area.max(a);
            }
            Err(e) => {
                return vec![CheckResult::errored(
                    "Cauchy formulas",
                    0.0,
                    CAUCHY_REL_TOL,
                    e,
                )]
            }
        }
    }
    vec![
        CheckResult::abs(
            "Cauchy perimeter (max rel. error)",
            0.0,
            worst_per,
            CAUCHY_REL_TOL,
        )
        .with_detail(format!("{hulls} hulls")),
        CheckResult::abs(
            "Cauchy area (max rel. error)",
            0.0,
            worst_area,
            CAUCHY_REL_TOL,
        )
        .with_detail(format!("{hulls} hulls")),
    ]
}

fn mc_check(
    name: &str,
    target: f64,
    est: Result<crate::montecarlo::Estimate>,
    rel: f64,
) -> CheckResult {
    match est {
        Ok(e) => {
            let tol = e.band(target, 3.0, rel);
            CheckResult::abs(name, target, e.mean, tol).with_detail(format!(
                "SE {:.3e}, {} reps, {} steps",
                e.std_error, e.reps, e.spec.steps
            ))
        }
        Err(err) => CheckResult::errored(name, target, f64::NAN, err),
    }
}

/// Hull functionals, argmax-time law and maximum moments by simulation.
pub fn monte_carlo_checks(cfg: &Config) -> Vec<CheckResult> {
    let c = &cfg.catalog;
    let h = &cfg.harness;
    let spec = |m, n, steps| EnsembleSpec::new(m, n, steps, cfg.seed).expect("valid spec");
    let mut out = Vec::new();

    for (m, n, per_target, area_target, label) in [
        (
            1,
            1,
            c.expected_perimeter_combined,
            c.expected_area_combined,
            "motion+bridge",
        ),
        (1, 0, c.expected_perimeter_bm, c.expected_area_bm, "motion"),
        (0, 1, c.expected_perimeter_bb, c.expected_area_bb, "bridge"),
    ] {
        let s = spec(m, n, cfg.mc_steps);
        match h.hull_samples(&s, cfg.mc_reps) {
            Ok(samples) => {
                let est = |f| Ok(h.estimate(samples.values(f), &s));
                out.push(mc_check(
                    &format!("MC perimeter {label}"),
                    per_target,
                    est(Functional::Perimeter),
                    0.02,
                ));
                out.push(mc_check(
                    &format!("MC area {label}"),
                    area_target,
                    est(Functional::Area),
                    0.02,
                ));
            }
            Err(e) => out.push(CheckResult::errored(
                format!("MC hull {label}"),
                per_target,
                f64::NAN,
                e,
            )),
        }
    }

    let ks_spec = spec(1, 1, cfg.ks_steps);
    match h.sample_argmax_times(&ks_spec, cfg.ks_reps) {
        Ok(samples) => {
            let steps = cfg.ks_steps;
            let points: Vec<f64> = (0..steps)
                .map(|k| (k as f64 + 0.5) / steps as f64)
                .collect();
            let ks = cdf_t_many(&points, &QuadSpec::default()).and_then(|mut reference| {
                reference.push(1.0);
                ks_test_grid(&samples.times, steps, &reference)
            });
            match ks {
                Ok(report) => out.push(CheckResult {
                    name: "argmax-time law (KS p-value)".into(),
                    target: KS_ALPHA,
                    achieved: report.p_value_asymptotic,
                    tolerance: 0.0,
                    passed: report.passes(KS_ALPHA),
                    detail: Some(format!("sqrt(n) D = {:.4}", report.scaled_statistic())),
                }),
                Err(e) => out.push(CheckResult::errored("argmax-time law", KS_ALPHA, 0.0, e)),
            }
            out.push(
                CheckResult::abs(
                    "motion-wins fraction",
                    c.prob_bm_wins,
                    samples.bm_fraction(),
                    3.0 * samples.bm_fraction_std_error(),
                )
                .with_detail(format!("{} reps", samples.times.len())),
            );
        }
        Err(e) => out.push(CheckResult::errored("argmax-time law", KS_ALPHA, 0.0, e)),
    }

    match h.estimate_m_moments(&spec(1, 1, cfg.mc_steps), cfg.mc_reps) {
        Ok(mom) => {
            out.push(mc_check("MC E[M]", c.moment_m1, Ok(mom.m1), 0.02));
            out.push(mc_check("MC E[M^2]", c.moment_m2, Ok(mom.m2), 0.02));
            out.push(mc_check(
                "MC E[(M')^2]",
                c.moment_mprime2,
                Ok(mom.mprime2),
                0.02,
            ));
        }
        Err(e) => out.push(CheckResult::errored("MC moments", c.moment_m1, f64::NAN, e)),
    }
    out
}

/// Runs the checks selected by `cfg.level`.
pub fn run(cfg: &Config) -> Vec<CheckResult> {
    let mut out = catalog_checks(&cfg.catalog);
    out.extend(normalization_checks());
    out.extend(marginal_checks());
    out.extend(identity_checks(&cfg.catalog));
    out.extend(table_checks(&cfg.catalog));
    out.extend(cauchy_checks(cfg.cauchy_hulls, cfg.seed));
    if cfg.level == Level::Full {
        out.extend(monte_carlo_checks(cfg));
    }
    out
}

/// Uniform-law reference for grid argmax times of a single bridge, exposed
/// for callers that want the single-process checks.
pub fn uniform_grid_reference(steps: usize) -> Vec<f64> {
    grid_reference(steps, |t| t.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_pass(checks: &[CheckResult]) {
        for c in checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn fast_groups_pass() {
        let c = ClosedFormCatalog::STANDARD;
        all_pass(&catalog_checks(&c));
        all_pass(&normalization_checks());
        all_pass(&marginal_checks());
        all_pass(&identity_checks(&c));
        all_pass(&table_checks(&c));
        all_pass(&cauchy_checks(50, 3));
    }

    #[test]
    fn tampered_constant_is_named() {
        let mut c = ClosedFormCatalog::STANDARD;
        *c.value_mut("prob_bm_wins").unwrap() += 1e-6;
        let failed: Vec<String> = catalog_checks(&c)
            .into_iter()
            .chain(identity_checks(&c))
            .filter(|r| !r.passed)
            .map(|r| r.name)
            .collect();
        assert!(
            failed.iter().any(|n| n.contains("prob_bm_wins")),
            "{failed:?}"
        );
    }

    #[test]
    fn one_two_exact_expression_value() {
        // 25-digit evaluation of the same expression.
        assert!((perimeter_one_two_exact() - 6.735_295_722_793_172).abs() < 1e-13);
    }
}
