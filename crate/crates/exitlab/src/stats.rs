//! Statistical test primitives shared by the validation harness: one- and
//! two-sample Kolmogorov-Smirnov tests, chi-square goodness-of-fit and
//! contingency tests, and binned total-variation distances.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One-sample KS statistic of `samples` against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let c = cdf(*x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((c - lo).abs()).max((hi - c).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value with the standard finite-sample scaling.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    kolmogorov_sf(lambda)
}

fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample KS test; returns (statistic, p-value).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    xb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (xa.len(), xb.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        let fa = i as f64 / na as f64;
        let fb = j as f64 / nb as f64;
        d = d.max((fa - fb).abs());
    }
    let ne = (na as f64 * nb as f64) / (na + nb) as f64;
    let sn = ne.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    (d, kolmogorov_sf(lambda))
}

/// Chi-square survival function.
pub fn chi2_sf(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df).expect("positive df");
    1.0 - dist.cdf(stat)
}

/// Goodness-of-fit chi-square of observed counts against expected
/// probabilities; returns (statistic, df, p-value). Cells with negligible
/// expected mass are skipped.
pub fn chi2_goodness_of_fit(observed: &[u64], probs: &[f64]) -> (f64, f64, f64) {
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (o, p) in observed.iter().zip(probs.iter()) {
        let e = p * n as f64;
        if e < 1e-12 {
            continue;
        }
        stat += (*o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let df = (cells.max(1) - 1) as f64;
    (stat, df, chi2_sf(stat, df))
}

/// Pearson chi-square on an r x c contingency table; returns
/// (statistic, df, p-value). Rows or columns with empty margins are dropped.
pub fn chi2_contingency(table: &[Vec<u64>]) -> (f64, f64, f64) {
    let rows: Vec<&Vec<u64>> = table
        .iter()
        .filter(|r| r.iter().sum::<u64>() > 0)
        .collect();
    if rows.is_empty() {
        return (0.0, 0.0, 1.0);
    }
    let ncols = rows[0].len();
    let col_sums: Vec<u64> = (0..ncols)
        .map(|c| rows.iter().map(|r| r[c]).sum())
        .collect();
    let keep: Vec<usize> = (0..ncols).filter(|&c| col_sums[c] > 0).collect();
    let total: u64 = col_sums.iter().sum();
    if keep.len() < 2 || rows.len() < 2 {
        return (0.0, 0.0, 1.0);
    }
    let mut stat = 0.0;
    for r in &rows {
        let rsum: u64 = r.iter().sum();
        for &c in &keep {
            let e = rsum as f64 * col_sums[c] as f64 / total as f64;
            stat += (r[c] as f64 - e).powi(2) / e;
        }
    }
    let df = ((rows.len() - 1) * (keep.len() - 1)) as f64;
    (stat, df, chi2_sf(stat, df))
}

/// Two-sample chi-square on category counts (a 2 x k contingency test).
pub fn chi2_two_sample(a: &[u64], b: &[u64]) -> (f64, f64, f64) {
    chi2_contingency(&[a.to_vec(), b.to_vec()])
}

/// Total-variation distance between a sample histogram and a reference mass
/// per bin (reference must sum to ~1 over the same window).
pub fn tv_distance(samples: &[f64], lo: f64, hi: f64, bins: usize, reference_mass: &[f64]) -> f64 {
    assert_eq!(reference_mass.len(), bins);
    let mut counts = vec![0u64; bins];
    let w = (hi - lo) / bins as f64;
    let mut kept = 0u64;
    for &x in samples {
        if x < lo || x >= hi {
            continue;
        }
        let b = (((x - lo) / w) as usize).min(bins - 1);
        counts[b] += 1;
        kept += 1;
    }
    if kept == 0 {
        return 1.0;
    }
    0.5 * counts
        .iter()
        .zip(reference_mass.iter())
        .map(|(c, m)| (*c as f64 / kept as f64 - m).abs())
        .sum::<f64>()
}

/// CDF of Exp(rate).
pub fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            1.0 - (-rate * x).exp()
        }
    }
}

/// Quartile labels (0..3) of each sample relative to the empirical quartiles.
pub fn quartile_labels(xs: &[f64]) -> Vec<usize> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| sorted[((sorted.len() as f64 * p) as usize).min(sorted.len() - 1)];
    let (q1, q2, q3) = (q(0.25), q(0.5), q(0.75));
    xs.iter()
        .map(|&x| {
            if x < q1 {
                0
            } else if x < q2 {
                1
            } else if x < q3 {
                2
            } else {
                3
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Exp};

    #[test]
    fn ks_accepts_its_own_distribution() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let exp = Exp::new(2.0).unwrap();
        let xs: Vec<f64> = (0..5000).map(|_| exp.sample(&mut rng)).collect();
        let d = ks_statistic(&xs, exp_cdf(2.0));
        let p = ks_pvalue(d, xs.len());
        assert!(p > 0.05, "p = {p}");
    }

    #[test]
    fn ks_rejects_wrong_rate() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        let exp = Exp::new(4.0).unwrap();
        let xs: Vec<f64> = (0..5000).map(|_| exp.sample(&mut rng)).collect();
        let d = ks_statistic(&xs, exp_cdf(2.0));
        let p = ks_pvalue(d, xs.len());
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn ks_calibration_five_percent_level() {
        // rejection rate at the 5% level over repetitions is 5% ± 1.5%
        let mut rejections = 0;
        let reps = 2000;
        for r in 0..reps {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1000 + r);
            let exp = Exp::new(1.0).unwrap();
            let xs: Vec<f64> = (0..400).map(|_| exp.sample(&mut rng)).collect();
            let d = ks_statistic(&xs, exp_cdf(1.0));
            if ks_pvalue(d, xs.len()) < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!((rate - 0.05).abs() < 0.015, "rate = {rate}");
    }

    #[test]
    fn two_sample_ks_on_identical_laws() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let exp = Exp::new(1.0).unwrap();
        let a: Vec<f64> = (0..3000).map(|_| exp.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..3000).map(|_| exp.sample(&mut rng)).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.01);
    }

    #[test]
    fn chi2_contingency_detects_dependence() {
        let (_, _, p) = chi2_contingency(&[vec![90, 10], vec![10, 90]]);
        assert!(p < 1e-6);
        let (_, _, p) = chi2_contingency(&[vec![50, 52], vec![48, 50]]);
        assert!(p > 0.5);
    }

    #[test]
    fn chi2_gof_uniform() {
        let (_, _, p) = chi2_goodness_of_fit(&[26, 24, 25, 25], &[0.25; 4]);
        assert!(p > 0.9);
    }

    #[test]
    fn tv_distance_of_matching_histogram() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(10);
        let xs: Vec<f64> = (0..20000)
            .map(|_| rand::Rng::gen_range(&mut rng, 0.0..1.0))
            .collect();
        let tv = tv_distance(&xs, 0.0, 1.0, 16, &vec![1.0 / 16.0; 16]);
        assert!(tv < 0.02, "tv = {tv}");
    }
}
