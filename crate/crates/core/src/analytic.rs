//! Closed-form laws for the combined maximum of Brownian motions and bridges.
//!
//! Notation: `M` is the maximum over `[0, 1]` of the first coordinates of all
//! processes in an ensemble, `T` the time it is attained. For a single motion
//! and a single bridge everything here is explicit; for general `(m, n)` the
//! time-of-maximum components need a half-line quadrature per point.
//!
//! All densities return `0.0` outside their support. Joint densities treat
//! `t = 0` and `t = 1` as outside.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::process_sim::ProcessCounts;
use crate::quadrature::{integrate, integrate_half_line, Endpoints, QuadSpec, Quadrature};

/// `sqrt(2 / pi)`
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Error function, accurate to within an ulp or two over the real line.
///
/// Backed by the `libm` port of the FreeBSD/Sun rational approximations.
#[inline]
pub fn erf(z: f64) -> f64 {
    libm::erf(z)
}

/// `1 - exp(-2 x^2)` without cancellation near zero.
#[inline]
fn bridge_cdf_core(x: f64) -> f64 {
    -(-2.0 * x * x).exp_m1()
}

/// `P(max_{[0,1]} W <= x) = erf(x / sqrt 2)` for a standard Brownian motion.
pub fn cdf_max_bm(x: f64) -> f64 {
    if x > 0.0 {
        erf(x * FRAC_1_SQRT_2)
    } else {
        0.0
    }
}

/// `P(max_{[0,1]} B <= x) = 1 - exp(-2 x^2)` for a standard Brownian bridge.
pub fn cdf_max_bb(x: f64) -> f64 {
    if x > 0.0 {
        bridge_cdf_core(x)
    } else {
        0.0
    }
}

/// CDF of `M` for one motion and one bridge.
pub fn cdf_m(x: f64) -> f64 {
    cdf_max_bm(x) * cdf_max_bb(x)
}

/// Density of `M` for one motion and one bridge.
pub fn pdf_m(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let g = (-2.0 * x * x).exp();
    SQRT_2_OVER_PI * (-0.5 * x * x).exp() * bridge_cdf_core(x)
        + 4.0 * x * g * erf(x * FRAC_1_SQRT_2)
}

/// Part of the density of `T` on the event that the motion wins.
///
/// Integrates to `1 - 1/sqrt(5)`, the probability that the motion's maximum
/// exceeds the bridge's.
pub fn pdf_t_bm_part(t: f64) -> f64 {
    if !(t > 0.0 && t < 1.0) {
        return 0.0;
    }
    4.0 * t.sqrt() / (PI * (4.0 * t + 1.0) * (1.0 - t).sqrt())
}

/// Part of the density of `T` on the event that the bridge wins.
pub fn pdf_t_bb_part(t: f64) -> f64 {
    if !(t > 0.0 && t < 1.0) {
        return 0.0;
    }
    let s = t * (1.0 - t);
    let r = s.sqrt();
    2.0 / PI * (r / (1.0 + s) + r.atan())
}

/// Density of `T` for one motion and one bridge.
pub fn pdf_t(t: f64) -> f64 {
    pdf_t_bm_part(t) + pdf_t_bb_part(t)
}

/// CDF of `T` at each of `points`, which must be sorted and lie in
/// `[0, 1]`. Integrals of [`pdf_t`] over consecutive gaps are accumulated,
/// with the gap ending at `t = 1` flagged singular.
pub fn cdf_t_many(points: &[f64], quad: &QuadSpec) -> Result<Vec<f64>> {
    if points
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt()))
    {
        return Err(Error::invalid("cdf_t_many needs sorted points"));
    }
    if points.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::invalid("cdf_t_many points must lie in [0, 1]"));
    }
    let mut out = Vec::with_capacity(points.len());
    let (mut left, mut acc) = (0.0, 0.0);
    for &t in points {
        if t > left {
            let singular = if t == 1.0 {
                Endpoints::RIGHT
            } else {
                Endpoints::NONE
            };
            acc += integrate(pdf_t, left, t, &quad.singular(singular))?.value;
            left = t;
        }
        out.push(acc.min(1.0));
    }
    Ok(out)
}

/// CDF of `T` at a single point, by quadrature.
pub fn cdf_t(t: f64, quad: &QuadSpec) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok(cdf_t_many(&[t.min(1.0)], quad)?[0])
}

/// Joint density of a Brownian motion's maximum `x` and its time `t`.
pub fn joint_pdf_bm(x: f64, t: f64) -> f64 {
    if !(x >= 0.0 && t > 0.0 && t < 1.0) {
        return 0.0;
    }
    x / (PI * t.powf(1.5) * (1.0 - t).sqrt()) * (-x * x / (2.0 * t)).exp()
}

/// Joint density of a Brownian bridge's maximum `x` and its time `t`.
pub fn joint_pdf_bb(x: f64, t: f64) -> f64 {
    if !(x >= 0.0 && t > 0.0 && t < 1.0) {
        return 0.0;
    }
    let s = t * (1.0 - t);
    SQRT_2_OVER_PI * x * x / s.powf(1.5) * (-x * x / (2.0 * s)).exp()
}

/// Joint density of `(M, T)` for one motion and one bridge: either process
/// attains `x` at `t` while the other stays below `x`.
pub fn joint_pdf_combined(x: f64, t: f64) -> f64 {
    joint_pdf_bm(x, t) * cdf_max_bb(x) + joint_pdf_bb(x, t) * cdf_max_bm(x)
}

/// CDF of the combined maximum over `m` motions and `n` bridges:
/// `erf(x/sqrt 2)^m (1 - exp(-2x^2))^n`.
pub fn cdf_m_mn(x: f64, counts: ProcessCounts) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    cdf_max_bm(x).powi(counts.bm() as i32) * bridge_cdf_core(x).powi(counts.bb() as i32)
}

/// Density of the combined maximum over `m` motions and `n` bridges.
///
/// With `m = 0` or `n = 0` only the family that is present contributes.
pub fn pdf_m_mn(x: f64, counts: ProcessCounts) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (m, n) = (counts.bm() as i32, counts.bb() as i32);
    let e = erf(x * FRAC_1_SQRT_2);
    let c = bridge_cdf_core(x);
    let mut density = 0.0;
    if m > 0 {
        density += SQRT_2_OVER_PI * m as f64 * (-0.5 * x * x).exp() * e.powi(m - 1) * c.powi(n);
    }
    if n > 0 {
        density += 4.0 * n as f64 * x * (-2.0 * x * x).exp() * e.powi(m) * c.powi(n - 1);
    }
    density
}

/// The two pieces of the density of `T_{m,n}`, split by the winning family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoComponents {
    /// Density contribution when a motion attains the maximum.
    pub bm: Quadrature,
    /// Density contribution when a bridge attains the maximum.
    pub bb: Quadrature,
}

impl RhoComponents {
    pub fn total(&self) -> f64 {
        self.bm.value + self.bb.value
    }
}

/// Evaluates the motion-wins and bridge-wins parts of the density of
/// `T_{m,n}` at `t`.
///
/// The inner half-line integrals are rescaled (`x = sqrt(t) y` for the motion
/// part, `x = sqrt(t(1-t)) y` for the bridge part) so the integrand keeps unit
/// width for every `t`; the only remaining `t`-singularity is the explicit
/// `1/sqrt(1-t)` prefactor of the motion part. Each part is returned with its
/// own error bound, scaled by its prefactor. Outside `(0, 1)` both parts are
/// zero.
pub fn rho_mn_components(t: f64, counts: ProcessCounts, quad: &QuadSpec) -> Result<RhoComponents> {
    let zero = Quadrature {
        value: 0.0,
        error_bound: 0.0,
        evaluations: 0,
    };
    if !(t > 0.0 && t < 1.0) {
        return Ok(RhoComponents { bm: zero, bb: zero });
    }
    let (m, n) = (counts.bm() as i32, counts.bb() as i32);

    let bm = if m > 0 {
        let prefactor = m as f64 / (PI * t.sqrt() * (1.0 - t).sqrt());
        let scale = t.sqrt();
        let inner = QuadSpec {
            tol: inner_tol(quad.tol, prefactor),
            ..*quad
        };
        integrate_half_line(
            |y| {
                let x = scale * y;
                y * (-0.5 * y * y).exp()
                    * erf(x * FRAC_1_SQRT_2).powi(m - 1)
                    * bridge_cdf_core(x).powi(n)
            },
            &inner,
        )?
        .scaled(prefactor)
    } else {
        zero
    };

    let bb = if n > 0 {
        let prefactor = SQRT_2_OVER_PI * n as f64;
        let scale = (t * (1.0 - t)).sqrt();
        let inner = QuadSpec {
            tol: inner_tol(quad.tol, prefactor),
            ..*quad
        };
        integrate_half_line(
            |y| {
                let x = scale * y;
                y * y
                    * (-0.5 * y * y).exp()
                    * erf(x * FRAC_1_SQRT_2).powi(m)
                    * bridge_cdf_core(x).powi(n - 1)
            },
            &inner,
        )?
        .scaled(prefactor)
    } else {
        zero
    };

    Ok(RhoComponents { bm, bb })
}

/// Inner tolerance so that `prefactor * inner_error <= tol`, floored near
/// round-off (the inner integrals are at most of order one).
fn inner_tol(tol: f64, prefactor: f64) -> f64 {
    (tol / prefactor.max(1.0)).max(1e-15)
}

/// A named closed-form constant with the expression it evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub expression: &'static str,
    pub value: f64,
}

/// Closed-form expectations and moments for one planar motion and one
/// planar bridge, plus the single-process reference values.
///
/// Values were evaluated once at 40 significant digits and rounded to `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCatalog {
    pub expected_perimeter_combined: f64,
    pub expected_area_combined: f64,
    pub expected_perimeter_bm: f64,
    pub expected_perimeter_bb: f64,
    pub expected_area_bm: f64,
    pub expected_area_bb: f64,
    pub prob_bm_wins: f64,
    pub moment_m1: f64,
    pub moment_m2: f64,
    pub moment_mprime2: f64,
}

impl Default for ClosedFormCatalog {
    fn default() -> Self {
        Self::STANDARD
    }
}

impl ClosedFormCatalog {
    // Literals keep all digits of the reference evaluation.
    #[allow(clippy::excessive_precision)]
    pub const STANDARD: ClosedFormCatalog = ClosedFormCatalog {
        expected_perimeter_combined: 6.175_448_755_448_480_378_749_692,
        expected_area_combined: 2.447_176_101_871_645_517_455_955,
        expected_perimeter_bm: 5.013_256_549_262_001_004_831_531,
        expected_perimeter_bb: 3.937_402_486_430_604_936_072_661,
        expected_area_bm: std::f64::consts::FRAC_PI_2,
        expected_area_bb: std::f64::consts::FRAC_PI_3,
        prob_bm_wins: 0.552_786_404_500_042_060_718_165_3,
        moment_m1: 0.982_853_195_240_318_771_021_999_1,
        moment_m2: 1.223_606_797_749_978_969_640_917,
        moment_mprime2: 0.444_646_451_291_522_959_212_935_3,
    };

    pub const NAMES: [&'static str; 10] = [
        "expected_perimeter_combined",
        "expected_area_combined",
        "expected_perimeter_bm",
        "expected_perimeter_bb",
        "expected_area_bm",
        "expected_area_bb",
        "prob_bm_wins",
        "moment_M1",
        "moment_M2",
        "moment_Mprime2",
    ];

    pub fn entries(&self) -> Vec<CatalogEntry> {
        let e = |name, expression, value| CatalogEntry {
            name,
            expression,
            value,
        };
        vec![
            e(
                "expected_perimeter_combined",
                "sqrt(2*pi)*(2+atan(1/2))",
                self.expected_perimeter_combined,
            ),
            e(
                "expected_area_combined",
                "(25-7*sqrt(5))*pi/12",
                self.expected_area_combined,
            ),
            e(
                "expected_perimeter_bm",
                "sqrt(8*pi)",
                self.expected_perimeter_bm,
            ),
            e(
                "expected_perimeter_bb",
                "sqrt(pi^3/2)",
                self.expected_perimeter_bb,
            ),
            e("expected_area_bm", "pi/2", self.expected_area_bm),
            e("expected_area_bb", "pi/3", self.expected_area_bb),
            e("prob_bm_wins", "1-1/sqrt(5)", self.prob_bm_wins),
            e("moment_M1", "(2+atan(1/2))/sqrt(2*pi)", self.moment_m1),
            e("moment_M2", "1+1/(2*sqrt(5))", self.moment_m2),
            e(
                "moment_Mprime2",
                "(41-13*sqrt(5))/(12*sqrt(5))",
                self.moment_mprime2,
            ),
        ]
    }

    pub fn get(&self, name: &str) -> Option<CatalogEntry> {
        self.entries().into_iter().find(|e| e.name == name)
    }

    /// Mutable access by catalogue name.
    pub fn value_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "expected_perimeter_combined" => &mut self.expected_perimeter_combined,
            "expected_area_combined" => &mut self.expected_area_combined,
            "expected_perimeter_bm" => &mut self.expected_perimeter_bm,
            "expected_perimeter_bb" => &mut self.expected_perimeter_bb,
            "expected_area_bm" => &mut self.expected_area_bm,
            "expected_area_bb" => &mut self.expected_area_bb,
            "prob_bm_wins" => &mut self.prob_bm_wins,
            "moment_M1" => &mut self.moment_m1,
            "moment_M2" => &mut self.moment_m2,
            "moment_Mprime2" => &mut self.moment_mprime2,
            _ => return None,
        })
    }
}
