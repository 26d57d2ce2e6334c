//! Expected perimeter and area of the hull of `m` planar motions and `n`
//! planar bridges, reduced by isotropy to moments of the combined maximum:
//!
//! ```text
//! E[L_{m,n}] = 2 pi E[M_{m,n}]
//! E[A_{m,n}] = pi (E[M_{m,n}^2] - E[(M'_{m,n})^2])
//! ```
//!
//! `E[M^p]` splits into a motion-wins and a bridge-wins half-line integral.
//! `E[(M')^2]` is an iterated integral: the outer variable is the argmax
//! time, the inner one the level of the maximum.

use std::cell::RefCell;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{integrate, integrate_half_line, Endpoints, QuadSpec, Quadrature};
use crate::analytic::{erf, rho_mn_components};
use crate::error::{Error, Result};
use crate::process_sim::ProcessCounts;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// `E[M_{m,n}^p]` and the two half-line integrals it is built from:
///
/// ```text
/// bm_integral = int_0^inf x^p e^{-x^2/2} erf(x/sqrt2)^(m-1) (1-e^{-2x^2})^n dx
/// bb_integral = int_0^inf x^(p+1) e^{-2x^2} erf(x/sqrt2)^m (1-e^{-2x^2})^(n-1) dx
/// moment      = sqrt(2/pi) m bm_integral + 4 n bb_integral
/// ```
///
/// An integral whose family is absent is reported as exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxMomentTerms {
    pub bm_integral: Quadrature,
    pub bb_integral: Quadrature,
    pub moment: Quadrature,
}

pub fn max_moment(counts: ProcessCounts, power: i32, spec: &QuadSpec) -> Result<MaxMomentTerms> {
    let (m, n) = (counts.bm() as i32, counts.bb() as i32);
    let bm_integral = if m > 0 {
        integrate_half_line(
            |x| {
                x.powi(power)
                    * (-0.5 * x * x).exp()
                    * erf(x * FRAC_1_SQRT_2).powi(m - 1)
                    * (-(-2.0 * x * x).exp_m1()).powi(n)
            },
            spec,
        )?
    } else {
        zero()
    };
    let bb_integral = if n > 0 {
        integrate_half_line(
            |x| {
                x.powi(power + 1)
                    * (-2.0 * x * x).exp()
                    * erf(x * FRAC_1_SQRT_2).powi(m)
                    * (-(-2.0 * x * x).exp_m1()).powi(n - 1)
            },
            spec,
        )?
    } else {
        zero()
    };
    let moment = bm_integral
        .scaled(SQRT_2_OVER_PI * m as f64)
        .plus(bb_integral.scaled(4.0 * n as f64));
    Ok(MaxMomentTerms {
        bm_integral,
        bb_integral,
        moment,
    })
}

/// `E[(M'_{m,n})^2] = int_0^1 t rho1(t) dt + int_0^1 t(1-t) rho2(t) dt`,
/// where `rho1`, `rho2` are the motion-wins and bridge-wins parts of the
/// density of the argmax time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeMomentTerms {
    pub bm_part: Quadrature,
    pub bb_part: Quadrature,
    pub total: Quadrature,
}

/// Evaluates the iterated integrals behind `E[(M')^2]`. Both time endpoints
/// are treated as singular; the inner integrals run at `spec.tol / 10`.
pub fn derivative_second_moment(
    counts: ProcessCounts,
    spec: &QuadSpec,
) -> Result<DerivativeMomentTerms> {
    let inner = QuadSpec {
        tol: spec.tol / 10.0,
        singular: Endpoints::NONE,
        ..*spec
    };
    let outer = QuadSpec {
        singular: Endpoints::BOTH,
        ..*spec
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let guarded = |t: f64, pick: fn(f64, &crate::analytic::RhoComponents) -> f64| -> f64 {
        match rho_mn_components(t, counts, &inner) {
            Ok(rho) => pick(t, &rho),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };

    let run = |pick: fn(f64, &crate::analytic::RhoComponents) -> f64| -> Result<Quadrature> {
        let r = integrate(|t| guarded(t, pick), 0.0, 1.0, &outer);
        match failure.borrow_mut().take() {
            Some(e) => Err(e),
            None => r,
        }
    };

    let bm_part = if counts.bm() > 0 {
        run(|t, rho| t * rho.bm.value)?
    } else {
        zero()
    };
    let bb_part = if counts.bb() > 0 {
        run(|t, rho| t * (1.0 - t) * rho.bb.value)?
    } else {
        zero()
    };
    Ok(DerivativeMomentTerms {
        bm_part,
        bb_part,
        total: bm_part.plus(bb_part),
    })
}

/// `E[L_{m,n}] = 2m sqrt(2pi) I_bm + 8 n pi I_bb` with the first-moment
/// integrals of [`max_moment`].
pub fn expected_perimeter_mn(counts: ProcessCounts, spec: &QuadSpec) -> Result<Quadrature> {
    Ok(max_moment(counts, 1, spec)?.moment.scaled(2.0 * PI))
}

/// `E[A_{m,n}] = pi (E[M^2] - E[(M')^2])`.
pub fn expected_area_mn(counts: ProcessCounts, spec: &QuadSpec) -> Result<Quadrature> {
    let second = max_moment(counts, 2, spec)?.moment;
    let derivative = derivative_second_moment(counts, spec)?.total;
    Ok(second.plus(derivative.scaled(-1.0)).scaled(PI))
}

fn zero() -> Quadrature {
    Quadrature {
        value: 0.0,
        error_bound: 0.0,
        evaluations: 0,
    }
}
