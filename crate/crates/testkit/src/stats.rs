use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS statistic `d` over `n` samples (Stephens'
/// small-sample correction of the Kolmogorov distribution).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    ks_pvalue(ks_statistic(samples, cdf), samples.len())
}

/// Pearson chi-square goodness-of-fit p-value.
pub fn chi_square_pvalue(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (observed.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// CDF of a Rayleigh distribution with `E[r^2] = mean_square`.
pub fn rayleigh_cdf(r: f64, mean_square: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        1.0 - (-r * r / mean_square).exp()
    }
}

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    use statrs::distribution::Normal;
    Normal::new(mean, sd).unwrap().cdf(x)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Standard deviation of a zero-centred Gaussian fitted to a spectrum given
/// as (frequency, power) pairs: weighted least squares of `ln p = a + b f²`
/// over bins above `rel_floor` of the peak, weights `p`.
pub fn gaussian_fit_sigma(bins: &[(f64, f64)], rel_floor: f64) -> f64 {
    let peak = bins.iter().map(|b| b.1).fold(0.0, f64::max);
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(f, p) in bins.iter().filter(|b| b.1 > rel_floor * peak) {
        let (x, y) = (f * f, p.ln());
        sw += p;
        sx += p * x;
        sy += p * y;
        sxx += p * x * x;
        sxy += p * x * y;
    }
    let b = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    (-0.5 / b).sqrt()
}

/// Pearson correlation coefficient magnitude of two complex sequences.
pub fn complex_correlation(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    let n = a.len().min(b.len());
    let ma: num_complex::Complex64 = a[..n].iter().sum::<num_complex::Complex64>() / n as f64;
    let mb: num_complex::Complex64 = b[..n].iter().sum::<num_complex::Complex64>() / n as f64;
    let mut cross = num_complex::Complex64::new(0.0, 0.0);
    let (mut va, mut vb) = (0.0, 0.0);
    for i in 0..n {
        let (x, y) = (a[i] - ma, b[i] - mb);
        cross += x * y.conj();
        va += x.norm_sqr();
        vb += y.norm_sqr();
    }
    cross.norm() / (va * vb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_pvalue_reference_points() {
        // Kolmogorov distribution: P(K > 1.36) ≈ 0.049, P(K > 1.63) ≈ 0.0098.
        assert!((ks_pvalue(1.36 / 1e4f64.sqrt(), 10_000) - 0.049).abs() < 0.003);
        assert!((ks_pvalue(1.63 / 1e4f64.sqrt(), 10_000) - 0.0098).abs() < 0.001);
    }

    #[test]
    fn uniform_grid_passes() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_test(&x, |v| v.clamp(0.0, 1.0)) > 0.99);
    }

    #[test]
    fn gaussian_fit_recovers_sigma() {
        let bins: Vec<(f64, f64)> = (-200..=200)
            .map(|k| {
                let f = k as f64 * 0.01;
                (f, 3.0 * (-0.5 * (f / 0.25f64).powi(2)).exp())
            })
            .collect();
        assert!((gaussian_fit_sigma(&bins, 1e-3) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn chi_square_flat() {
        assert!(chi_square_pvalue(&[10.0, 10.0, 10.0], &[10.0, 10.0, 10.0]) > 0.99);
        assert!(chi_square_pvalue(&[100.0, 0.0, 0.0], &[33.3, 33.3, 33.4]) < 1e-6);
    }
}
