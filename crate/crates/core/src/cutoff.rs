//! Smooth cutoffs built from the `exp(-1/u)` mollifier.
//!
//! `chi` is 1 on `[0,1]` and 0 on `[2,inf)`. The dyadic pieces are
//! `phi0(xi) = chi(|xi|) - chi(2|xi|)`, supported in `1/2 <= |xi| <= 2`.

fn mollifier(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth monotone step: 0 for `u <= 0`, 1 for `u >= 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = mollifier(u);
    a / (a + mollifier(1.0 - u))
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let a = mollifier(u);
    let b = mollifier(1.0 - u);
    // a' = a/u^2, b' (w.r.t. u) = -b/(1-u)^2
    let da = a / (u * u);
    let db = -b / ((1.0 - u) * (1.0 - u));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

pub fn chi(s: f64) -> f64 {
    1.0 - smooth_step(s.abs() - 1.0)
}

pub fn phi0(xi: f64) -> f64 {
    let s = xi.abs();
    chi(s) - chi(2.0 * s)
}

/// `phi_k(xi) = phi0(2^{-k} xi)`.
pub fn phi_k(k: i32, xi: f64) -> f64 {
    phi0(xi * 2f64.powi(-k))
}

/// `sum_{|a|<=2} phi_{k+a}`, which telescopes to `chi(2^{-k-2}xi) - chi(2^{-k+3}xi)`.
pub fn phi_tilde_k(k: i32, xi: f64) -> f64 {
    let s = xi.abs();
    chi(s * 2f64.powi(-k - 2)) - chi(s * 2f64.powi(3 - k))
}

/// Low-pass symbol of `P_{<=k}`.
pub fn phi_leq_k(k: i32, xi: f64) -> f64 {
    chi(xi.abs() * 2f64.powi(-k))
}

/// Compactly supported bump on `(-1, 1)` with value 1 at 0.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Odd smooth sign: equals `sign(y)` for `|y| >= width`.
pub fn smooth_sign(y: f64, width: f64) -> f64 {
    2.0 * smooth_step((y + width) / (2.0 * width)) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sums_to_one() {
        for &xi in &[0.3, 1.0, 1.7, 5.5, 100.0, 1234.5] {
            let s: f64 = (-10..20).map(|k| phi_k(k, xi)).sum();
            assert!((s - 1.0).abs() < 1e-14, "xi={xi} sum={s}");
        }
    }

    #[test]
    fn tilde_matches_sum() {
        for &xi in &[0.1, 0.9, 3.0, 17.0, 40.0] {
            for k in -2..5 {
                let direct: f64 = (-2..=2).map(|a| phi_k(k + a, xi)).sum();
                assert!((direct - phi_tilde_k(k, xi)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn step_derivative_matches_difference() {
        for &u in &[0.1, 0.37, 0.5, 0.8] {
            let h = 1e-6;
            let fd = (smooth_step(u + h) - smooth_step(u - h)) / (2.0 * h);
            assert!((fd - smooth_step_prime(u)).abs() < 1e-7);
        }
    }
}
