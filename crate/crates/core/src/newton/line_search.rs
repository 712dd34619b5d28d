//! Step length selection along the Newton direction.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LineSearchError {
    #[error("functional already vanishes (a = 0); no step to take")]
    Converged,
    #[error("invalid quartic coefficients a = {a:e}, b = {b:e}, c = {c:e}")]
    Coefficients { a: f64, b: f64, c: f64 },
    #[error("step bound m must be at least 1, got {0}")]
    Bound(f64),
}

/// `q(λ) = ½[(1−λ)² a + 2λ²(1−λ) b + λ⁴ c]`.
pub fn quartic_value(a: f64, b: f64, c: f64, lambda: f64) -> f64 {
    let s = 1.0 - lambda;
    let l2 = lambda * lambda;
    0.5 * (s * s * a + 2.0 * l2 * s * b + l2 * l2 * c)
}

/// `q′(λ) = 2cλ³ − 3bλ² + (a + 2b)λ − a`
fn quartic_slope(a: f64, b: f64, c: f64, lambda: f64) -> f64 {
    ((2.0 * c * lambda - 3.0 * b) * lambda + a + 2.0 * b) * lambda - a
}

fn quartic_curvature(a: f64, b: f64, c: f64, lambda: f64) -> f64 {
    (6.0 * c * lambda - 6.0 * b) * lambda + a + 2.0 * b
}

/// Real roots of `p3 x³ + p2 x² + p1 x + p0` (any leading coefficient).
fn real_roots(p3: f64, p2: f64, p1: f64, p0: f64) -> Vec<f64> {
    let scale = p3.abs().max(p2.abs()).max(p1.abs()).max(p0.abs());
    if scale == 0.0 {
        return vec![];
    }
    if p3.abs() <= 1e-14 * scale {
        if p2.abs() <= 1e-14 * scale {
            return if p1 != 0.0 { vec![-p0 / p1] } else { vec![] };
        }
        let disc = p1 * p1 - 4.0 * p2 * p0;
        if disc < 0.0 {
            return vec![];
        }
        // cancellation-free quadratic formula
        let q = -0.5 * (p1 + p1.signum() * disc.sqrt());
        let mut r = vec![];
        if q != 0.0 {
            r.push(q / p2);
            r.push(p0 / q);
        } else {
            r.push(0.0);
        }
        return r;
    }
    let (a, b, c) = (p2 / p3, p1 / p3, p0 / p3);
    // depressed cubic t³ + pt + q with x = t − a/3
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    } else if p == 0.0 {
        vec![shift]
    } else {
        let r = (-p / 3.0).sqrt();
        let phi = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0).acos();
        (0..3)
            .map(|k| 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect()
    }
}

/// Global minimizer of the quartic on `(0, m]`: real roots of `q′` from the
/// closed-form cubic (each refined by two Newton steps) compared with the
/// endpoint `m`; equal values go to the smaller `λ`.
pub fn line_search_quartic(a: f64, b: f64, c: f64, m: f64) -> Result<(f64, f64), LineSearchError> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(LineSearchError::Bound(m));
    }
    let bad = || LineSearchError::Coefficients { a, b, c };
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || a < 0.0 || c < 0.0 {
        return Err(bad());
    }
    if b * b > a * c * (1.0 + 1e-10) + f64::MIN_POSITIVE {
        return Err(bad());
    }
    if a == 0.0 {
        return Err(LineSearchError::Converged);
    }
    let mut candidates: Vec<f64> = real_roots(2.0 * c, -3.0 * b, a + 2.0 * b, -a)
        .into_iter()
        .map(|mut x| {
            for _ in 0..2 {
                let d = quartic_curvature(a, b, c, x);
                if d != 0.0 {
                    let next = x - quartic_slope(a, b, c, x) / d;
                    if next.is_finite() {
                        x = next;
                    }
                }
            }
            x
        })
        .filter(|&x| x > 0.0 && x <= m)
        .collect();
    candidates.push(m);
    candidates.sort_by(f64::total_cmp);
    let mut best = (candidates[0], quartic_value(a, b, c, candidates[0]));
    for &x in &candidates[1..] {
        let v = quartic_value(a, b, c, x);
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// `λ̂ = min(1, √E / (√2 ‖v̄̄‖))` clamped to `(0, min(1, m)]`.
pub fn cheap_step_rule(energy: f64, norm_vbb: f64, m: f64) -> f64 {
    let upper = m.min(1.0);
    let raw = if norm_vbb > 0.0 {
        energy.sqrt() / (std::f64::consts::SQRT_2 * norm_vbb)
    } else {
        f64::INFINITY
    };
    raw.min(upper).max(f64::MIN_POSITIVE)
}
