//! Small quadrature toolkit: adaptive Simpson refinement and Gauss-Legendre
//! nodes. Both are classical; Simpson carries the kernel quadrature route and
//! the verification integrals, Gauss-Legendre carries the time integral of
//! the second-order moment expansion.

use crate::error::{numerical, Result};

/// Adaptive Simpson integration of `f` over [a, b] to absolute accuracy
/// `tol`. The local acceptance test uses the usual one-fifteenth Richardson
/// estimate and the accepted value includes the extrapolation term, so the
/// delivered accuracy is typically far better than `tol`.
///
/// The interval is cut into sixteen uniform panels before refinement starts;
/// purely adaptive splitting from the whole interval can miss structure that
/// is narrow relative to the full range, and every integrand in this crate
/// anchors its mass near an endpoint, where the fixed panels always catch it.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    assert!(a.is_finite() && b.is_finite() && b >= a);
    assert!(tol > 0.0, "quadrature tolerance must be positive");
    if a == b {
        return Ok(0.0);
    }
    const PANELS: usize = 16;
    let width = (b - a) / PANELS as f64;
    let panel_tol = tol / PANELS as f64;
    let mut evals = 0usize;
    let mut total = 0.0;
    for p in 0..PANELS {
        let pa = a + p as f64 * width;
        let pb = if p + 1 == PANELS {
            b
        } else {
            a + (p + 1) as f64 * width
        };
        let pm = 0.5 * (pa + pb);
        let (fa, fm, fb) = (f(pa), f(pm), f(pb));
        evals += 3;
        let whole = simpson(fa, fm, fb, pb - pa);
        total += simpson_step(f, pa, pb, fa, fm, fb, whole, panel_tol, 56, &mut evals)?;
    }
    Ok(total)
}

#[inline]
fn simpson(fa: f64, fm: f64, fb: f64, width: f64) -> f64 {
    width / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    *evals += 2;
    if *evals > 2_000_000 {
        return Err(numerical(format!(
            "adaptive Simpson exceeded its evaluation budget on [{a}, {b}]"
        )));
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    // Accept on the Richardson estimate, at the depth cap, or when interval
    // midpoints stop being representable. Accepting at the cap is deliberate:
    // the halving tolerance makes the cap reachable only inside bands where
    // the integrand crosses subnormal scale, and the local error there is
    // absolutely negligible. Runaway integrands hit the evaluation budget.
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || b <= m {
        return Ok(left + right + delta / 15.0);
    }
    let half_tol = 0.5 * tol;
    let lv = simpson_step(f, a, m, fa, flm, fm, left, half_tol, depth - 1, evals)?;
    let rv = simpson_step(f, m, b, fm, frm, fb, right, half_tol, depth - 1, evals)?;
    Ok(lv + rv)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre polynomial with the usual
/// Chebyshev starting guesses. Exact for polynomials of degree 2n-1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_n(x) and its derivative.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| w * half).collect(),
    )
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // reference digits kept as computed
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_transcendental() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-11, "x^3 integral: {v}");
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        let want = std::f64::consts::E - 1.0;
        assert!((v - want).abs() < 1e-12, "e^x integral: {v}");
    }

    #[test]
    fn simpson_handles_tiny_scales() {
        // Scale invariance: a Gaussian bump of height 1e-40.
        let v = adaptive_simpson(&|x: f64| 1e-40 * (-x * x).exp(), -8.0, 8.0, 1e-53).unwrap();
        let want = 1e-40 * std::f64::consts::PI.sqrt();
        assert!(
            ((v - want) / want).abs() < 1e-11,
            "tiny Gaussian: got {v:e}, want {want:e}"
        );
    }

    #[test]
    fn simpson_flat_tail_function() {
        // e^{-1/x^2}-type flatness at an endpoint, as in the kernel integrand.
        let f = |x: f64| {
            if x == 0.0 {
                0.0
            } else {
                (-1.0 / (x * x)).exp()
            }
        };
        let v = adaptive_simpson(&f, 0.0, 1.0, 1e-12).unwrap();
        // Reference from 30-digit arithmetic: int_0^1 exp(-1/x^2) dx.
        let want = 0.089073855890780345;
        assert!(((v - want) / want).abs() < 1e-9, "flat integrand: {v}");
    }

    #[test]
    fn gauss_legendre_small_orders() {
        let (x, w) = gauss_legendre(2);
        let inv_sqrt3 = 1.0 / 3.0f64.sqrt();
        assert!((x[0] + inv_sqrt3).abs() < 1e-14 && (x[1] - inv_sqrt3).abs() < 1e-14);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);

        // Degree-exactness: order n integrates x^{2n-1} and x^{2n-2} exactly.
        for n in [3usize, 8, 16, 48] {
            let (xs, ws) = gauss_legendre_on(n, 0.0, 1.0);
            let p = 2 * n - 2;
            let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(p as i32)).sum();
            let want = 1.0 / (p as f64 + 1.0);
            assert!(
                ((got - want) / want).abs() < 1e-13,
                "order {n} on x^{p}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn gauss_legendre_weights_sum_to_interval() {
        for n in [1usize, 5, 17, 64] {
            let (_, w) = gauss_legendre_on(n, 0.25, 0.75);
            let s: f64 = w.iter().sum();
            assert!((s - 0.5).abs() < 1e-13, "order {n}: weight sum {s}");
        }
    }
}
