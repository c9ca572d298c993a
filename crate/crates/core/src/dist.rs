//! Upper-tail probabilities for the reference distributions used by the
//! analytic tests: standard normal, chi-squared, binomial and the
//! asymptotic Kolmogorov distribution.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;

/// Which reference distribution to evaluate, and where.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailQuery {
    Normal { x: f64 },
    ChiSquared { df: u64, x: f64 },
    /// P(X >= x) for X ~ Bin(n, p).
    Binomial { n: u64, p: f64, x: u64 },
    /// Asymptotic P(D_n >= x) for the one-sample sup distance.
    Kolmogorov { n: usize, x: f64 },
}

pub fn tail_probability(q: TailQuery) -> Result<f64> {
    match q {
        TailQuery::Normal { x } => {
            check_finite(x)?;
            Ok(normal_sf(x))
        }
        TailQuery::ChiSquared { df, x } => {
            check_finite(x)?;
            if df == 0 {
                return Err(Error::InvalidParameter("chi-squared needs df >= 1".into()));
            }
            Ok(chi_squared_sf(df as f64, x))
        }
        TailQuery::Binomial { n, p, x } => {
            if n == 0 || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "binomial needs n >= 1 and 0 <= p <= 1, got n = {n}, p = {p}"
                )));
            }
            Ok(binomial_sf(n, p, x))
        }
        TailQuery::Kolmogorov { n, x } => {
            check_finite(x)?;
            if n == 0 {
                return Err(Error::InvalidParameter("kolmogorov needs n >= 1".into()));
            }
            Ok(kolmogorov_sf(n, x))
        }
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_nan() {
        Err(Error::InvalidParameter("evaluation point is NaN".into()))
    } else {
        Ok(())
    }
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn max_iterations(a: f64) -> usize {
    10_000 + (40.0 * a.sqrt()) as usize
}

/// Regularized lower incomplete gamma P(a, x) by its power series.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..max_iterations(a) {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction.
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..max_iterations(a) {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (h.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - gamma_p_series(a, x)).max(0.0)
    } else {
        gamma_q_fraction(a, x).min(1.0)
    }
}

/// P(X >= x) for X ~ χ²(df).
pub fn chi_squared_sf(df: f64, x: f64) -> f64 {
    gamma_q(df / 2.0, x / 2.0)
}

/// P(Z >= z) for a standard normal Z, via erfc(t) = Q(1/2, t²).
pub fn normal_sf(z: f64) -> f64 {
    if z.is_infinite() {
        return if z > 0.0 { 0.0 } else { 1.0 };
    }
    let upper = 0.5 * gamma_q(0.5, 0.5 * z * z);
    if z >= 0.0 {
        upper
    } else {
        1.0 - upper
    }
}

fn ln_binomial_pmf(n: u64, p: f64, j: u64) -> f64 {
    let (nf, jf) = (n as f64, j as f64);
    ln_gamma(nf + 1.0) - ln_gamma(jf + 1.0) - ln_gamma(nf - jf + 1.0)
        + jf * p.ln()
        + (nf - jf) * (-p).ln_1p()
}

/// Σ pmf(j) for j in `from..=to`, walking away from `from` by the pmf ratio.
fn binomial_run(n: u64, p: f64, from: u64, to: u64) -> f64 {
    let mut term = ln_binomial_pmf(n, p, from).exp();
    let mut sum = term;
    let odds = p / (1.0 - p);
    if from <= to {
        for j in from..to {
            term *= (n - j) as f64 / (j + 1) as f64 * odds;
            sum += term;
            if term < sum * 1e-20 && (j as f64) > n as f64 * p {
                break;
            }
        }
    } else {
        for j in (to + 1..=from).rev() {
            term *= j as f64 / (n - j + 1) as f64 / odds;
            sum += term;
            if term < sum * 1e-20 && (j as f64) < n as f64 * p {
                break;
            }
        }
    }
    sum
}

/// P(X >= k) for X ~ Bin(n, p). Sums whichever side of the mean is shorter.
pub fn binomial_sf(n: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if k as f64 > n as f64 * p {
        binomial_run(n, p, k, n).min(1.0)
    } else {
        (1.0 - binomial_run(n, p, k - 1, 0)).clamp(0.0, 1.0)
    }
}

/// P(X <= k) for X ~ Bin(n, p).
pub fn binomial_cdf(n: u64, p: f64, k: u64) -> f64 {
    if k >= n {
        return 1.0;
    }
    1.0 - binomial_sf(n, p, k + 1)
}

/// Limiting distribution of √n·D: P(K >= λ).
pub fn kolmogorov_limit_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // theta-function form converges fast for small λ
        let mut sum = 0.0;
        for j in 1..=20 {
            let m = (2 * j - 1) as f64;
            sum += (-m * m * PI * PI / (8.0 * lambda * lambda)).exp();
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Asymptotic P(D_n >= d) using Stephens' small-sample scaling
/// λ = (√n + 0.12 + 0.11/√n)·d.
pub fn kolmogorov_sf(n: usize, d: f64) -> f64 {
    let root = (n as f64).sqrt();
    kolmogorov_limit_sf((root + 0.12 + 0.11 / root) * d)
}
