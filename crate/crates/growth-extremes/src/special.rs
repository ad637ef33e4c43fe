//! Gamma-family special functions.
//!
//! Everything downstream (reference CDFs, chi-square p-values, Frechet scale
//! constants) funnels through two primitives:
//!
//! * `ln_gamma` — Lanczos approximation (g = 7, 9 coefficients), relative
//!   error around 1e-14 on the positive axis, reflection formula below 0.5.
//! * `gamma_p` / `gamma_q` — regularized incomplete gamma P(a,x), Q(a,x),
//!   series expansion for x < a+1 and a modified Lentz continued fraction
//!   for x >= a+1, iterated to machine tolerance.
//!
//! The error function and the standard normal CDF are derived from the
//! incomplete gamma via erf(x) = P(1/2, x^2), which keeps the tails accurate
//! without a separate rational approximation.

use std::f64::consts::PI;

/// Lanczos coefficients for g = 7, n = 9.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "ln_gamma domain: x > 0, got {x}");
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        PI.ln() - (PI * x).sin().ln() - ln_gamma_core(1.0 - x)
    } else {
        ln_gamma_core(x)
    }
}

fn ln_gamma_core(x: f64) -> f64 {
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function; overflows to +inf for x beyond ~171.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_p domain: a > 0, x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_contfrac(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q domain: a > 0, x >= 0");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_contfrac(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..MAX_ITER {
        term *= x / (a + n as f64);
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_contfrac(a: f64, x: f64) -> f64 {
    // Modified Lentz evaluation of the standard continued fraction.
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Error function via the incomplete gamma identity erf(x) = P(1/2, x^2).
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let v = gamma_p(0.5, x * x);
    if x > 0.0 {
        v
    } else {
        -v
    }
}

/// Standard normal CDF, accurate in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    if z < 0.0 {
        0.5 * gamma_q(0.5, 0.5 * z * z)
    } else if z > 0.0 {
        0.5 + 0.5 * gamma_p(0.5, 0.5 * z * z)
    } else {
        0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) {
        let scale = b.abs().max(1e-300);
        assert!(
            (a - b).abs() <= rel * scale.max(1.0) || (a - b).abs() <= rel,
            "got {a}, want {b}"
        );
    }

    #[test]
    fn ln_gamma_reference_values() {
        // Spot values from an independent libm implementation.
        let cases = [
            (0.1, 2.252712651734206e0),
            (0.5, 5.723649429247004e-1),
            (1.0, 0.0),
            (1.5, -1.207822376352454e-1),
            (2.0, 0.0),
            (3.7, 1.428072326665388e0),
            (7.3, 7.147892523022248e0),
            (12.9, 1.973501585071300e1),
            (25.0, 5.478472939811232e1),
            (101.5, 3.660456981952768e2),
        ];
        for (x, want) in cases {
            close(ln_gamma(x), want, 5e-13);
        }
    }

    #[test]
    fn gamma_small_integers() {
        for (x, want) in [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0), (4.0, 6.0), (5.0, 24.0)] {
            close(gamma(x), want, 1e-12);
        }
    }

    #[test]
    fn gamma_p_closed_forms() {
        // erf-, exponential- and Poisson-sum identities.
        let cases = [
            (0.5, 0.1, 3.452791539814229e-1),
            (0.5, 1.0, 8.427007929497149e-1),
            (0.5, 2.5, 9.746526813225318e-1),
            (1.0, 0.3, 2.591817793182821e-1),
            (1.0, 5.0, 9.932620530009145e-1),
            (1.5, 2.0, 7.385358700508893e-1),
            (1.5, 0.25, 8.110858834532414e-2),
            (3.0, 2.5, 4.561868841166704e-1),
            (5.0, 10.0, 9.707473119230390e-1),
            (8.0, 4.0, 5.113361579284748e-2),
            (12.0, 20.0, 9.786131784127198e-1),
        ];
        for (a, x, want) in cases {
            close(gamma_p(a, x), want, 2e-12);
        }
    }

    #[test]
    fn p_plus_q_is_one() {
        for a in [0.3, 0.5, 1.0, 2.7, 9.0, 40.0] {
            for x in [0.01, 0.5, 1.0, 2.0, 5.0, 20.0, 80.0] {
                let s = gamma_p(a, x) + gamma_q(a, x);
                close(s, 1.0, 1e-12);
            }
        }
    }

    #[test]
    fn gamma_p_monotone_in_x() {
        let a = 2.3;
        let mut prev = 0.0;
        for i in 1..200 {
            let x = 0.1 * i as f64;
            let v = gamma_p(a, x);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn normal_cdf_reference_values() {
        let cases = [
            (-2.5, 6.209665325776159e-3),
            (-1.0, 1.586552539314571e-1),
            (0.0, 0.5),
            (0.5, 6.914624612740131e-1),
            (1.96, 9.750021048517796e-1),
            (3.2, 9.993128620620841e-1),
        ];
        for (z, want) in cases {
            close(normal_cdf(z), want, 1e-12);
        }
        // Deep tail should not collapse to 0/1.
        assert!(normal_cdf(-8.0) > 0.0);
        assert!(normal_cdf(8.0) < 1.0);
    }

    #[test]
    fn erf_is_odd() {
        for x in [0.2, 0.9, 1.7, 3.0] {
            close(erf(-x), -erf(x), 1e-15);
        }
    }
}
