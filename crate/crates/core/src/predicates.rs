//! Exact geometric predicates on `f64` input coordinates.
//!
//! Orientation and in-circle delegate to adaptive-precision expansions. The
//! diametral-disk test uses a floating-point filter with an exact rational
//! fallback, so every answer is the one real arithmetic would give.

use std::cmp::Ordering;

use num::{BigRational, Signed, Zero};

use crate::geometry::Point2D;

/// Sign of the signed area of `(a, b, c)`: `Greater` when counter-clockwise.
pub fn orient2d(a: &Point2D, b: &Point2D, c: &Point2D) -> Ordering {
    sign(robust::orient2d(a.coords(), b.coords(), c.coords()))
}

/// `Greater` when `d` is strictly inside the circle through the
/// counter-clockwise triangle `(a, b, c)`, `Equal` when on it.
pub fn incircle(a: &Point2D, b: &Point2D, c: &Point2D, d: &Point2D) -> Ordering {
    sign(robust::incircle(a.coords(), b.coords(), c.coords(), d.coords()))
}

fn sign(v: f64) -> Ordering {
    v.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

/// Sign of `(p - r) . (q - r)`. Non-positive exactly when `r` lies in the
/// closed disk having segment `pq` as diameter.
pub fn diametral_sign(p: &Point2D, q: &Point2D, r: &Point2D) -> Ordering {
    let ax = p.x - r.x;
    let ay = p.y - r.y;
    let bx = q.x - r.x;
    let by = q.y - r.y;
    let xx = ax * bx;
    let yy = ay * by;
    let dot = xx + yy;
    // Each term carries at most ~3 ulp of relative error; 8 eps is loose.
    let bound = 8.0 * f64::EPSILON * (xx.abs() + yy.abs());
    if dot > bound {
        Ordering::Greater
    } else if dot < -bound {
        Ordering::Less
    } else {
        diametral_sign_exact(p, q, r)
    }
}

/// Rational-arithmetic evaluation of [`diametral_sign`].
pub fn diametral_sign_exact(p: &Point2D, q: &Point2D, r: &Point2D) -> Ordering {
    let v = |f: f64| BigRational::from_float(f).expect("finite coordinate");
    let (px, py, qx, qy, rx, ry) = (v(p.x), v(p.y), v(q.x), v(q.y), v(r.x), v(r.y));
    let dot = (&px - &rx) * (&qx - &rx) + (&py - &ry) * (&qy - &ry);
    if dot.is_zero() {
        Ordering::Equal
    } else if dot.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// True when `r` lies in the closed disk with diameter `pq`.
pub fn in_closed_diametral_disk(p: &Point2D, q: &Point2D, r: &Point2D) -> bool {
    diametral_sign(p, q, r) != Ordering::Greater
}
