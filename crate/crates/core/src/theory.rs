//! Closed-form recovery thresholds and region classification.
//!
//! In the log-scale parametrization `p = a log(n)/n`, `q = b log(n)/n`,
//! cluster recovery is possible iff `(a + b)/2 - sqrt(ab/M) > 1`, and
//! group-element recovery additionally needs `a/2 > 1` (each community
//! connected). Thresholds for polynomial-time competitors are evaluated
//! for comparison: the semidefinite relaxation (sharp threshold
//! `a - sqrt(2b) log(ea/sqrt(2b)) = 2`), the generalized power method's
//! sufficient condition, and a spectral condition with an unknown
//! constant. All logs are natural. At a boundary the strict inequality
//! fails, so boundaries classify as impossible.

use crate::error::{Error, Result};
use serde::Serialize;

/// Recoverability regions for a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Cluster recovery already impossible.
    Impossible,
    /// Clusters recoverable, group elements not.
    ClusterOnly,
    /// Both clusters and group elements recoverable.
    Both,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Impossible => "impossible",
            Region::ClusterOnly => "cluster_only",
            Region::Both => "both",
        }
    }
}

fn check_rates(a: f64, b: f64) -> Result<()> {
    if a < 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a = {a} must be non-negative")));
    }
    if b < 0.0 || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("b = {b} must be non-negative")));
    }
    Ok(())
}

fn check_positive_a(a: f64) -> Result<()> {
    if a <= 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a = {a} must be positive")));
    }
    Ok(())
}

/// `(a + b)/2 - sqrt(ab/M)`; cluster recovery is possible iff this
/// exceeds 1.
pub fn cluster_threshold_lhs(a: f64, b: f64, m: usize) -> Result<f64> {
    check_rates(a, b)?;
    if m == 0 {
        return Err(Error::InvalidParameter("group order must be at least 1".into()));
    }
    Ok((a + b) / 2.0 - (a * b / m as f64).sqrt())
}

/// Large-order limit of the cluster threshold: `(a + b)/2` against 1,
/// the connectivity threshold of the whole network. A conjectured limit,
/// not a proved case.
pub fn infinite_order_cluster_lhs(a: f64, b: f64) -> Result<f64> {
    check_rates(a, b)?;
    Ok((a + b) / 2.0)
}

/// `(sqrt(a) - sqrt(b))^2`, the classical two-community block-model
/// quantity; recovery there is possible iff it exceeds 2.
pub fn sbm_lhs(a: f64, b: f64) -> Result<f64> {
    check_rates(a, b)?;
    Ok((a.sqrt() - b.sqrt()).powi(2))
}

/// Left side of the semidefinite relaxation's sharp threshold:
/// `a - sqrt(2b) log(ea/sqrt(2b))`, success iff greater than 2.
/// At `b = 0` the second term vanishes.
pub fn sdp_threshold_lhs(a: f64, b: f64) -> Result<f64> {
    check_positive_a(a)?;
    if b < 0.0 || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("b = {b} must be non-negative")));
    }
    if b == 0.0 {
        return Ok(a);
    }
    let s = (2.0 * b).sqrt();
    Ok(a - s * (std::f64::consts::E * a / s).ln())
}

/// Sufficient condition for the generalized power method:
/// `sqrt(2b) < a` and the relaxation threshold strictly exceeded.
pub fn gpm_condition(a: f64, b: f64) -> Result<bool> {
    let lhs = sdp_threshold_lhs(a, b)?;
    Ok((2.0 * b).sqrt() < a && lhs > 2.0)
}

/// `sqrt(a + b)/a`, the spectral method's condition quantity; reported
/// without a verdict since its constant is unknown.
pub fn spectral_condition_lhs(a: f64, b: f64) -> Result<f64> {
    check_positive_a(a)?;
    check_rates(a, b)?;
    Ok((a + b).sqrt() / a)
}

/// Strict-inequality region classification.
pub fn classify_region(a: f64, b: f64, m: usize) -> Result<Region> {
    let cluster = cluster_threshold_lhs(a, b, m)? > 1.0;
    let connected = a / 2.0 > 1.0;
    Ok(match (cluster, connected) {
        (true, true) => Region::Both,
        (true, false) => Region::ClusterOnly,
        (false, _) => Region::Impossible,
    })
}

/// Which boundary curve to solve for `b` at fixed `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCurve {
    /// `cluster_threshold_lhs = 1` for the given group order.
    Cluster { m: usize },
    /// `sdp_threshold_lhs = 2`.
    Sdp,
}

/// Roots in `b` of a boundary curve at fixed `a`. Both curves, as
/// functions of `b`, strictly decrease to a single minimum and then
/// increase, so there are zero, one, or two roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryRoots {
    None,
    Single(f64),
    /// Smallest and largest root.
    Pair(f64, f64),
}

/// Solves the chosen boundary for `b >= 0` by bisection in `sqrt(b)`
/// (the substitution keeps the function's slope bounded near `b = 0`),
/// to an absolute tolerance such that re-evaluating the curve at a root
/// lands within 1e-8 of its boundary constant.
pub fn boundary_b(a: f64, curve: BoundaryCurve) -> Result<BoundaryRoots> {
    check_positive_a(a)?;
    // f(s) = curve lhs at b = s^2, minus the boundary constant.
    let f: Box<dyn Fn(f64) -> f64> = match curve {
        BoundaryCurve::Cluster { m } => {
            if m == 0 {
                return Err(Error::InvalidParameter("group order must be at least 1".into()));
            }
            let root_am = (a / m as f64).sqrt();
            Box::new(move |s: f64| (a + s * s) / 2.0 - s * root_am - 1.0)
        }
        BoundaryCurve::Sdp => Box::new(move |s: f64| {
            if s == 0.0 {
                a - 2.0
            } else {
                let t = std::f64::consts::SQRT_2 * s; // sqrt(2b)
                a - t * (std::f64::consts::E * a / t).ln() - 2.0
            }
        }),
    };
    // Location of the single minimum, in s = sqrt(b).
    let dip = match curve {
        BoundaryCurve::Cluster { m } => (a / m as f64).sqrt(),
        BoundaryCurve::Sdp => a / std::f64::consts::SQRT_2,
    };
    let f0 = f(0.0);
    let fdip = f(dip);
    let zero_tol = 1e-14 * (1.0 + a.abs());

    // Grow an upper bracket where the curve is positive again.
    let mut hi = (2.0 * dip).max(4.0);
    let mut guard = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::InvalidParameter(format!(
                "no upper bracket found for boundary at a = {a}"
            )));
        }
    }

    let bisect = |mut lo: f64, mut hi: f64| -> f64 {
        // Invariant: f(lo) and f(hi) have opposite signs.
        let descending = f(lo) > 0.0;
        for _ in 0..500 {
            if hi - lo <= 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            let go_right = if descending { fm > 0.0 } else { fm < 0.0 };
            if go_right {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        s * s
    };

    Ok(if f0.abs() <= zero_tol {
        if fdip < -zero_tol {
            BoundaryRoots::Pair(0.0, bisect(dip, hi))
        } else {
            BoundaryRoots::Single(0.0)
        }
    } else if f0 < 0.0 {
        BoundaryRoots::Single(bisect(dip, hi))
    } else if fdip > zero_tol {
        BoundaryRoots::None
    } else if fdip.abs() <= zero_tol {
        BoundaryRoots::Single(dip * dip)
    } else {
        BoundaryRoots::Pair(bisect(0.0, dip), bisect(dip, hi))
    })
}

/// All threshold quantities for one `(a, b, M)` grid point. The
/// competitor quantities need `a > 0` and are absent at `a = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub cluster_lhs: f64,
    pub cluster_possible: bool,
    pub connectivity_lhs: f64,
    pub group_possible: bool,
    pub sbm_lhs: f64,
    pub region: Region,
    pub sdp_lhs: Option<f64>,
    pub gpm_ok: Option<bool>,
    pub spectral_lhs: Option<f64>,
}

impl ThresholdReport {
    pub fn compute(a: f64, b: f64, m: usize) -> Result<Self> {
        let cluster_lhs = cluster_threshold_lhs(a, b, m)?;
        let region = classify_region(a, b, m)?;
        let (sdp_lhs, gpm_ok, spectral_lhs) = if a > 0.0 {
            (
                Some(sdp_threshold_lhs(a, b)?),
                Some(gpm_condition(a, b)?),
                Some(spectral_condition_lhs(a, b)?),
            )
        } else {
            (None, None, None)
        };
        Ok(ThresholdReport {
            a,
            b,
            m,
            cluster_lhs,
            cluster_possible: cluster_lhs > 1.0,
            connectivity_lhs: a / 2.0,
            group_possible: region == Region::Both,
            sbm_lhs: sbm_lhs(a, b)?,
            region,
            sdp_lhs,
            gpm_ok,
            spectral_lhs,
        })
    }
}
