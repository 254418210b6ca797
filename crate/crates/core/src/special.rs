//! Special functions used by the distribution and bound machinery.
//!
//! Everything here is real-valued and restricted to the parameter ranges the
//! library needs: positive shape parameters and nonnegative arguments.

use crate::error::{Result, SteinError};

/// Lanczos coefficients (g = 7, n = 9), relative error below 1e-13 on the
/// positive half line.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for `x > 0`.
pub fn gamma_fn(x: f64) -> f64 {
    ln_gamma(x).exp()
}

const INCGAMMA_EPS: f64 = 1e-16;
const INCGAMMA_MAX_ITER: usize = 500;

/// Regularized lower incomplete gamma function P(a, x) for `a > 0`, `x >= 0`.
///
/// Series expansion for `x < a + 1`, Lentz continued fraction for the upper
/// tail otherwise; absolute error is below 1e-12 across both regimes,
/// including shapes `a < 1` where the density is unbounded at the origin.
pub fn reg_gamma_p(a: f64, x: f64) -> f64 {
    let (p, _) = reg_gamma_pair(a, x);
    p
}

/// Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x).
pub fn reg_gamma_q(a: f64, x: f64) -> f64 {
    let (_, q) = reg_gamma_pair(a, x);
    q
}

/// Computes (P(a, x), Q(a, x)) together, using whichever expansion converges
/// in the given regime and deriving the other value by complement.
pub fn reg_gamma_pair(a: f64, x: f64) -> (f64, f64) {
    assert!(a > 0.0, "shape must be > 0, got {a}");
    assert!(x >= 0.0, "argument must be >= 0, got {x}");
    if x == 0.0 {
        return (0.0, 1.0);
    }
    // log prefactor x^a e^{-x} / Gamma(a)
    let ln_pref = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // P(a,x) = pref * sum_{n>=0} x^n / (a (a+1) ... (a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = 0.0;
        for _ in 0..INCGAMMA_MAX_ITER {
            n += 1.0;
            term *= x / (a + n);
            sum += term;
            if term.abs() < sum.abs() * INCGAMMA_EPS {
                break;
            }
        }
        let p = (ln_pref.exp() * sum).min(1.0);
        (p, 1.0 - p)
    } else {
        // Q(a,x) = pref * 1/(x+1-a- 1/(...)) via modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..INCGAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < INCGAMMA_EPS {
                break;
            }
        }
        let q = (ln_pref.exp() * h).clamp(0.0, 1.0);
        (1.0 - q, q)
    }
}

/// Inverse of P(a, .): returns x with P(a, x) = p, for `p` in (0, 1).
///
/// Wilson-Hilferty style initial guess refined by Halley steps on the CDF.
pub fn inv_reg_gamma_p(a: f64, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) || p == 0.0 {
        return Err(SteinError::domain(format!(
            "quantile level must be in (0,1), got {p}"
        )));
    }
    let mut x = initial_gamma_guess(a, p);
    for _ in 0..60 {
        let f = reg_gamma_p(a, x) - p;
        if f.abs() < 1e-15 {
            break;
        }
        // density of Gamma(a, 1) at x
        let ln_pdf = (a - 1.0) * x.ln() - x - ln_gamma(a);
        let pdf = ln_pdf.exp();
        if pdf <= 0.0 || !pdf.is_finite() {
            // bisection fallback against the monotone CDF
            x = if f > 0.0 { x * 0.5 } else { x * 2.0 };
            continue;
        }
        let mut step = f / pdf;
        // Halley correction using f''/f' = (a-1)/x - 1
        let corr = 0.5 * step * ((a - 1.0) / x - 1.0);
        if corr.abs() < 0.5 {
            step /= 1.0 - corr;
        }
        let next = x - step;
        x = if next > 0.0 { next } else { x * 0.5 };
        if (step / x).abs() < 1e-14 {
            break;
        }
    }
    Ok(x)
}

fn initial_gamma_guess(a: f64, p: f64) -> f64 {
    // Wilson-Hilferty for moderate shapes, small-shape series otherwise
    if a > 0.6 {
        let t = inv_std_normal(p);
        let g = 1.0 - 1.0 / (9.0 * a) + t / (3.0 * a.sqrt());
        let x = a * g * g * g;
        if x > 0.0 {
            return x;
        }
    }
    // P(a,x) ~ x^a / (a Gamma(a)) near zero
    ((p * a * gamma_fn(a)).ln() / a).exp().max(1e-300)
}

/// Acklam-style inverse standard normal CDF, good to ~1e-9 (only used for
/// starting points of Newton iterations).
fn inv_std_normal(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inv_std_normal(1.0 - p)
    }
}

/// Exponential integral E1(x) = int_x^inf e^{-t}/t dt for `x > 0`.
///
/// Power series with the Euler-Mascheroni constant for `x <= 1`, Lentz
/// continued fraction above.
pub fn exp_int_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires x > 0, got {x}");
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let contrib = -term / kf;
            sum += contrib;
            if contrib.abs() < 1e-17 * (sum.abs() + 1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // E1(x) = e^{-x} / (x + 1/(1 + 1/(x + 2/(1 + ...))))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..INCGAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x).exp() * h
    }
}

/// Solves E1(y) = target for y, given a bracket hint `lo`.
pub fn inv_exp_int_e1(target: f64, lo: f64) -> f64 {
    debug_assert!(target > 0.0);
    // expand a bracket then bisect/Newton; E1 is strictly decreasing
    let mut a = lo.max(1e-300);
    let mut b = a.max(1.0);
    while exp_int_e1(b) > target {
        b *= 2.0;
    }
    while exp_int_e1(a) < target {
        a *= 0.5;
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let f = exp_int_e1(x) - target;
        if f > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let deriv = -(-x).exp() / x;
        let newton = x - f / deriv;
        x = if newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (b - a) < 1e-15 * x.max(1.0) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ln_gamma_reference_values() {
        // oracle: mpmath log(gamma(x)) at 30 digits
        assert_abs_diff_eq!(ln_gamma(0.5), 0.572364942924700087071714, epsilon = 1e-13);
        assert_abs_diff_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ln_gamma(2.0), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ln_gamma(5.5), 3.957813967618716293877401, epsilon = 1e-13);
    }

    #[test]
    fn ln_gamma_matches_statrs() {
        for i in 1..400 {
            let x = i as f64 * 0.05;
            let ours = ln_gamma(x);
            let theirs = statrs::function::gamma::ln_gamma(x);
            assert_abs_diff_eq!(ours, theirs, epsilon = 1e-11 * (1.0 + theirs.abs()));
        }
    }

    #[test]
    fn incomplete_gamma_reference_values() {
        // P(1, x) = 1 - e^{-x}
        for &x in &[0.01, 0.3, 1.0, 2.5, 10.0] {
            assert_abs_diff_eq!(reg_gamma_p(1.0, x), 1.0 - (-x as f64).exp(), epsilon = 1e-13);
        }
        // oracle: mpmath, P(2, 1) = 1 - 2/e
        assert_abs_diff_eq!(
            reg_gamma_p(2.0, 1.0),
            0.264241117657115356808952,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(reg_gamma_p(2.0, 0.0), 0.0, epsilon = 0.0);
    }

    #[test]
    fn incomplete_gamma_matches_statrs_on_grid() {
        for &a in &[0.1, 0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 5.0, 10.0, 50.0] {
            for i in 1..120 {
                let x = a * i as f64 * 0.05;
                let ours = reg_gamma_p(a, x);
                let theirs = statrs::function::gamma::gamma_lr(a, x);
                assert_abs_diff_eq!(ours, theirs, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn incomplete_gamma_complement_consistency() {
        for &a in &[0.2, 0.7, 1.0, 3.0, 20.0] {
            for i in 1..60 {
                let x = a * i as f64 * 0.12;
                let (p, q) = reg_gamma_pair(a, x);
                assert_abs_diff_eq!(p + q, 1.0, epsilon = 1e-13);
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn inverse_gamma_round_trip() {
        for &a in &[0.3, 0.5, 1.0, 2.0, 7.5] {
            for &p in &[1e-8, 1e-3, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-10] {
                let x = inv_reg_gamma_p(a, p).unwrap();
                assert_abs_diff_eq!(reg_gamma_p(a, x), p, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn exp_int_reference_values() {
        // oracle: mpmath e1
        assert_abs_diff_eq!(exp_int_e1(1.0), 0.219383934395520273677164, epsilon = 1e-14);
        assert_abs_diff_eq!(exp_int_e1(0.5), 0.559773594776160811746796, epsilon = 1e-14);
        assert_abs_diff_eq!(exp_int_e1(0.001), 6.331539364136149332002786, epsilon = 1e-12);
    }

    #[test]
    fn exp_int_inverse_round_trip() {
        for &x in &[0.001, 0.05, 0.5, 1.0, 4.0, 20.0] {
            let v = exp_int_e1(x);
            let back = inv_exp_int_e1(v, x * 0.5);
            assert_abs_diff_eq!(back, x, epsilon = 1e-10 * x.max(1.0));
        }
    }

    #[test]
    fn exp_int_derivative_finite_difference() {
        // E1'(x) = -e^{-x}/x, checked by central differences
        for &x in &[0.3, 1.0, 3.0] {
            let h = 1e-6;
            let fd = (exp_int_e1(x + h) - exp_int_e1(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(fd, -(-x as f64).exp() / x, epsilon = 1e-8);
        }
    }
}
