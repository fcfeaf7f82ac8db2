//! Goodness-of-fit statistics and reference laws used by the experiments.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Probability mass function on the integers.
pub type Pmf = BTreeMap<i64, f64>;

/// `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov distance `sup_x |F_M(x) - F(x)|`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("ks_statistic"));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // ties jump together
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        d = d.max((f - i as f64 / m).abs()).max(((j + 1) as f64 / m - f).abs());
        i = j + 1;
    }
    Ok(d)
}

/// 99% quantile of the one-sample KS distance, `1.63/√M`.
pub fn ks_radius(m: usize) -> f64 {
    1.63 / (m as f64).sqrt()
}

/// Normalized histogram of integer observations.
pub fn empirical_pmf(values: &[i64]) -> Pmf {
    let mut pmf = Pmf::new();
    for &v in values {
        *pmf.entry(v).or_insert(0.0) += 1.0;
    }
    let m = values.len() as f64;
    pmf.values_mut().for_each(|p| *p /= m);
    pmf
}

/// `½ ∑ |p - q|` over the union of supports.
pub fn tv_distance(a: &Pmf, b: &Pmf) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("tv_distance"));
    }
    let mut s = 0.0;
    for (k, p) in a {
        s += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in b {
        if !a.contains_key(k) {
            s += q.abs();
        }
    }
    Ok(0.5 * s)
}

/// Expected TV distance between `reference` and the empirical law of `m`
/// draws from it, in the normal approximation `E|p̂ - p| ≈ √(2p(1-p)/(πm))`.
pub fn expected_tv_radius(reference: &Pmf, m: usize) -> f64 {
    let m = m as f64;
    0.5 * reference
        .values()
        .map(|&p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * m)).sqrt())
        .sum::<f64>()
}

/// Poisson(`t`) masses up to the point where the remaining tail is below `tail`.
pub fn poisson_pmf(t: f64, tail: f64) -> Result<Pmf> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            what: "poisson_pmf",
            value: t,
            detail: "requires t >= 0".into(),
        });
    }
    let mut pmf = Pmf::new();
    if t == 0.0 {
        pmf.insert(0, 1.0);
        return Ok(pmf);
    }
    let mut cum = 0.0;
    let mut k = 0i64;
    loop {
        let lp = -t + k as f64 * t.ln() - ln_gamma(k as f64 + 1.0);
        let p = lp.exp();
        pmf.insert(k, p);
        cum += p;
        if k as f64 > t && 1.0 - cum < tail {
            break;
        }
        k += 1;
    }
    Ok(pmf)
}

/// `P(S_Γ = j)` for a simple walk `S` stopped at an independent
/// `Γ ~ Poisson(t)`, truncated where the Poisson tail falls below `1e-12`;
/// with `j_max`, only `|j| <= j_max` is kept.
pub fn reference_sgamma_law(t: f64, j_max: Option<i64>) -> Result<Pmf> {
    if !(t > 0.0) {
        return Err(Error::Domain {
            what: "reference_sgamma_law",
            value: t,
            detail: "requires t > 0".into(),
        });
    }
    let poisson = poisson_pmf(t, 1e-12)?;
    let v_max = *poisson.keys().last().expect("nonempty") as usize;
    // walk law after v steps, index j + v_max
    let width = 2 * v_max + 1;
    let mut walk = vec![0.0; width];
    walk[v_max] = 1.0;
    let mut out = vec![0.0; width];
    for v in 0..=v_max {
        let w = poisson[&(v as i64)];
        for (o, p) in out.iter_mut().zip(&walk) {
            *o += w * p;
        }
        let mut next = vec![0.0; width];
        for j in 1..width - 1 {
            next[j] = 0.5 * (walk[j - 1] + walk[j + 1]);
        }
        walk = next;
    }
    let mut pmf = Pmf::new();
    for (i, p) in out.into_iter().enumerate() {
        let j = i as i64 - v_max as i64;
        if p > 0.0 && j_max.is_none_or(|m| j.abs() <= m) {
            pmf.insert(j, p);
        }
    }
    Ok(pmf)
}

/// Two-sample chi-square homogeneity test on integer-valued data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Bins with fewer than `min_count` pooled observations are merged.
pub fn chi_square_two_sample(a: &[i64], b: &[i64], min_count: u64) -> Result<ChiSquare> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("chi_square_two_sample"));
    }
    let mut counts: BTreeMap<i64, (u64, u64)> = BTreeMap::new();
    for &v in a {
        counts.entry(v).or_default().0 += 1;
    }
    for &v in b {
        counts.entry(v).or_default().1 += 1;
    }
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut pool = (0u64, 0u64);
    for (_, (x, y)) in counts {
        pool.0 += x;
        pool.1 += y;
        if pool.0 + pool.1 >= min_count {
            bins.push(pool);
            pool = (0, 0);
        }
    }
    if pool.0 + pool.1 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += pool.0;
                last.1 += pool.1;
            }
            None => bins.push(pool),
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let statistic: f64 = bins
        .iter()
        .map(|&(x, y)| {
            let d = ka * x as f64 - kb * y as f64;
            d * d / (x + y) as f64
        })
        .sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        chi.sf(statistic)
    };
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}

/// Empirical quantile by the nearest-rank rule.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("quantile"));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Ok(v[rank - 1])
}

/// Mean and unbiased variance.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tv_examples() {
        let a: Pmf = [(0, 0.5), (1, 0.5)].into_iter().collect();
        let b: Pmf = [(2, 1.0)].into_iter().collect();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        assert!(tv_distance(&Pmf::new(), &a).is_err());
    }

    #[test]
    fn ks_examples() {
        assert!(ks_statistic(&[], normal_cdf).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 10_000;
        let xs: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= ks_radius(m), "{d}");
        assert_eq!(ks_statistic(&[0.5], |x| x).unwrap(), 0.5);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        let v = normal_cdf(1.96);
        assert!((v - 0.9750021048517795).abs() < 1e-11, "{v}");
    }

    #[test]
    fn sgamma_reference_values() {
        let law = reference_sgamma_law(1.3310, None).unwrap();
        assert!((law[&0] - 0.394842251820666).abs() < 1e-12);
        let total: f64 = law.values().sum();
        assert!((total - 1.0).abs() < 1e-11);
        for (j, p) in &law {
            assert!((p - law[&-j]).abs() < 1e-15);
            assert_eq!(j.rem_euclid(2) == 1, *j % 2 != 0);
        }
        let tiny = reference_sgamma_law(1e-9, None).unwrap();
        assert!(tiny[&0] > 1.0 - 1e-9);
        assert!(reference_sgamma_law(0.0, None).is_err());
        let cut = reference_sgamma_law(2.0, Some(3)).unwrap();
        assert!(cut.keys().all(|j| j.abs() <= 3));
        assert!(((-1.3310f64).exp() - 0.264212916233086).abs() < 1e-14);
    }

    #[test]
    fn poisson_masses() {
        let p = poisson_pmf(2.5, 1e-12).unwrap();
        assert!((p.values().sum::<f64>() - 1.0).abs() < 1e-11);
        assert!((p[&0] - (-2.5f64).exp()).abs() < 1e-16);
        assert!((p[&3] - (-2.5f64).exp() * 2.5f64.powi(3) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn chi_square_same_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<i64> = (0..20_000).map(|_| rng.random_range(0..6)).collect();
        let b: Vec<i64> = (0..30_000).map(|_| rng.random_range(0..6)).collect();
        let c = chi_square_two_sample(&a, &b, 10).unwrap();
        assert_eq!(c.dof, 5);
        assert!(c.p_value > 0.001);
        let d: Vec<i64> = (0..30_000).map(|_| rng.random_range(0..5)).collect();
        assert!(chi_square_two_sample(&a, &d, 10).unwrap().p_value < 1e-10);
    }

    #[test]
    fn quantile_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(quantile(&v, 0.99).unwrap(), 99.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 100.0);
    }
}
