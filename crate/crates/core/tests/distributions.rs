use orderaudit::dist::{binomial_cdf, binomial_sf, chi_squared_sf, kolmogorov_sf, normal_sf};
use orderaudit::{tail_probability, TailQuery};

/// Composite Simpson rule on a fine uniform grid.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let intervals = 200_000;
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Γ(df/2) by the integer and half-integer recurrences.
fn gamma_half(df: u32) -> f64 {
    let mut g = if df % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut a = if df % 2 == 0 { 1.0 } else { 0.5 };
    while a < df as f64 / 2.0 {
        g *= a;
        a += 1.0;
    }
    g
}

/// P(χ²_df > x) with t = u², which removes the singularity at the origin.
fn chi_squared_oracle(df: u32, x: f64) -> f64 {
    let k = df as f64;
    let ln_norm = (k / 2.0) * 2f64.ln() + gamma_half(df).ln();
    // log space keeps the factors away from subnormals
    let f = move |u: f64| {
        if u <= 0.0 {
            return if df == 1 { 2.0 / ln_norm.exp() } else { 0.0 };
        }
        let ln_f = 2f64.ln() + (k - 1.0) * u.ln() - u * u / 2.0 - ln_norm;
        if ln_f < -700.0 {
            0.0
        } else {
            ln_f.exp()
        }
    };
    let lo = x.sqrt();
    let hi = lo.max(k.sqrt()) + 15.0;
    integrate(&f, lo, hi)
}

fn normal_oracle(z: f64) -> f64 {
    let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if z >= 0.0 {
        integrate(&f, z, z + 12.0)
    } else {
        1.0 - integrate(&f, -z, -z + 12.0)
    }
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn binomial_pmf(n: u64, p: f64, j: u64) -> f64 {
    (ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j)
        + j as f64 * p.ln()
        + (n - j) as f64 * (1.0 - p).ln())
    .exp()
}

#[test]
fn chi_squared_matches_quadrature() {
    for df in [1u32, 2, 3, 4, 5, 7, 10, 15, 23, 50, 100] {
        for mult in [0.05, 0.3, 0.8, 1.0, 1.5, 2.5, 4.0] {
            let x = mult * df as f64;
            let got = chi_squared_sf(df as f64, x);
            let want = chi_squared_oracle(df, x);
            assert!(
                (got - want).abs() < 1e-8,
                "df={df} x={x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn chi_squared_far_tail_relative() {
    for (df, x) in [(3u32, 36.456), (5, 60.0), (23, 120.0)] {
        let got = chi_squared_sf(df as f64, x);
        let want = chi_squared_oracle(df, x);
        assert!(((got - want) / want).abs() < 1e-6, "df={df} x={x}: {got} vs {want}");
    }
}

#[test]
fn normal_matches_quadrature() {
    for i in -60..=80 {
        let z = i as f64 / 10.0;
        let got = normal_sf(z);
        let want = normal_oracle(z);
        assert!((got - want).abs() < 1e-10, "z={z}: {got} vs {want}");
        if z > 3.0 {
            assert!(((got - want) / want).abs() < 1e-7);
        }
    }
}

#[test]
fn binomial_matches_direct_sum() {
    for (n, p) in [(1u64, 0.5), (10, 0.3), (50, 0.5), (250, 1.0 / 12.0), (1000, 1.0 / 24.0)] {
        let pmf: Vec<f64> = (0..=n).map(|j| binomial_pmf(n, p, j)).collect();
        for k in 0..=n {
            let upper: f64 = pmf[k as usize..].iter().sum();
            let lower: f64 = pmf[..=k as usize].iter().sum();
            let got_sf = binomial_sf(n, p, k);
            let got_cdf = binomial_cdf(n, p, k);
            assert!((got_sf - upper).abs() < 1e-10, "n={n} p={p} k={k}: {got_sf} vs {upper}");
            assert!((got_cdf - lower).abs() < 1e-10, "n={n} p={p} k={k}: {got_cdf} vs {lower}");
        }
    }
}

#[test]
fn tails_are_monotone() {
    for df in [1.0, 3.0, 23.0] {
        let mut prev = 1.0;
        for i in 0..400 {
            let v = chi_squared_sf(df, i as f64 * 0.25);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }
    let mut prev = 1.0;
    for i in -100..100 {
        let v = normal_sf(i as f64 / 10.0);
        assert!(v <= prev + 1e-15);
        prev = v;
    }
    let mut prev = 1.0;
    for k in 0..=100 {
        let v = binomial_sf(100, 0.3, k);
        assert!(v <= prev + 1e-15);
        prev = v;
    }
    let mut prev = 1.0;
    for i in 0..100 {
        let v = kolmogorov_sf(50, i as f64 / 100.0);
        assert!(v <= prev + 1e-15);
        prev = v;
    }
}

#[test]
fn tail_query_dispatch() {
    let q = tail_probability(TailQuery::ChiSquared { df: 3, x: 7.0 }).unwrap();
    assert_eq!(q, chi_squared_sf(3.0, 7.0));
    let q = tail_probability(TailQuery::Normal { x: 1.0 }).unwrap();
    assert_eq!(q, normal_sf(1.0));
    let q = tail_probability(TailQuery::Binomial { n: 10, p: 0.5, x: 7 }).unwrap();
    assert_eq!(q, binomial_sf(10, 0.5, 7));
    assert!(tail_probability(TailQuery::ChiSquared { df: 0, x: 1.0 }).is_err());
    assert!(tail_probability(TailQuery::Binomial { n: 10, p: 1.5, x: 1 }).is_err());
}

#[test]
fn kolmogorov_large_n_quantile() {
    // the asymptotic 5% point is 1.3581/√n
    let n = 100_000;
    let d = 1.358_098_639_3 / (n as f64).sqrt();
    assert!((kolmogorov_sf(n, d) - 0.05).abs() < 1e-3);
}
