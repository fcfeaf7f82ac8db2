//! Exact finite-`N` oracles: transfer recursions for the partition functions,
//! exhaustive enumeration, the sandwich bound, the mean contact fraction and
//! the law of the endpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Geometry;

/// Largest length accepted by [`z_bruteforce`].
pub const MAX_BRUTE_FORCE: u64 = 20;
/// Largest length accepted by [`endpoint_law_dp`].
pub const MAX_ENDPOINT_DP: u64 = 4000;

/// Size of a cycle `ℤ/Mℤ` on which `S mod M = 0` iff `S ∈ Tℤ` for paths of
/// length `n`.
fn cylinder_size(n: u64, g: Geometry) -> usize {
    match g {
        Geometry::Finite(t) if t as u64 <= n => t as usize,
        _ => n as usize + 1,
    }
}

/// Cylinder recursion, returning `(log Z_N, log Z^c_N)`.
fn cylinder_dp(n: u64, delta: f64, g: Geometry) -> Result<(f64, f64)> {
    let g = g.validate()?;
    if !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be finite, got {delta}")));
    }
    let m = cylinder_size(n, g);
    let mut w = vec![0.0; m];
    let mut next = vec![0.0; m];
    w[0] = 1.0;
    let mut log_scale = 0.0;
    let reward = delta.exp();
    for _ in 0..n {
        next.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..m {
            let v = 0.5 * w[s];
            if v != 0.0 {
                next[(s + 1) % m] += v;
                next[(s + m - 1) % m] += v;
            }
        }
        next[0] *= reward;
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        log_scale += total.ln();
        std::mem::swap(&mut w, &mut next);
    }
    Ok((log_scale, log_scale + w[0].ln()))
}

/// `log Z_{N,δ}^T`, the free partition function.
pub fn z_free_dp(n: u64, delta: f64, g: Geometry) -> Result<f64> {
    Ok(cylinder_dp(n, delta, g)?.0)
}

/// `log Z_{N,δ}^{T,c}`, restricted to `S_N ∈ Tℤ`; `N` must be even.
pub fn z_constrained_dp(n: u64, delta: f64, g: Geometry) -> Result<f64> {
    if n % 2 == 1 {
        return Err(Error::OddLength(n));
    }
    Ok(cylinder_dp(n, delta, g)?.1)
}

/// Enumeration over all `2^N` paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BruteForce {
    pub log_free: f64,
    /// `-∞` when no path ends on an interface.
    pub log_constrained: f64,
}

pub fn z_bruteforce(n: u64, delta: f64, g: Geometry) -> Result<BruteForce> {
    let g = g.validate()?;
    if n > MAX_BRUTE_FORCE {
        return Err(Error::TooLarge {
            what: "brute-force length",
            limit: MAX_BRUTE_FORCE,
            got: n,
        });
    }
    let on_interface = |s: i64| match g {
        Geometry::Finite(t) => s.rem_euclid(t as i64) == 0,
        Geometry::Infinite => s == 0,
    };
    // path counts by (contacts, ends on an interface)
    let nn = n as usize;
    let mut counts = vec![[0u64; 2]; nn + 1];
    for mask in 0u64..(1u64 << n) {
        let (mut s, mut l) = (0i64, 0usize);
        for i in 0..n {
            s += if mask >> i & 1 == 1 { 1 } else { -1 };
            l += on_interface(s) as usize;
        }
        counts[l][on_interface(s) as usize] += 1;
    }
    let norm = (n as f64) * std::f64::consts::LN_2;
    let (mut free, mut cons) = (0.0, 0.0);
    for (l, c) in counts.iter().enumerate() {
        let w = (delta * l as f64).exp();
        free += (c[0] + c[1]) as f64 * w;
        cons += c[1] as f64 * w;
    }
    Ok(BruteForce {
        log_free: free.ln() - norm,
        log_constrained: cons.ln() - norm,
    })
}

/// Both sides of `e^{-|δ|} Z^c_{2⌊N/2⌋} <= Z_N <= √((N+1) Z^c_{2N})` in log
/// scale, with slacks `log Z_N - lower` and `upper - log Z_N`.
///
/// The upper bound can fail for `δ < 0` and small `N`; `upper_ok_corrected`
/// checks `Z_N <= √(e^{|δ|}(N+1) Z^c_{2N})`, which holds for every `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub log_lower: f64,
    pub log_z: f64,
    pub log_upper: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub upper_ok_corrected: bool,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

pub fn sandwich_check(n: u64, delta: f64, g: Geometry) -> Result<Sandwich> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let log_z = z_free_dp(n, delta, g)?;
    let log_lower = -delta.abs() + z_constrained_dp(2 * (n / 2), delta, g)?;
    let log_upper = 0.5 * (((n + 1) as f64).ln() + z_constrained_dp(2 * n, delta, g)?);
    let lower_slack = log_z - log_lower;
    let upper_slack = log_upper - log_z;
    // rounding allowance for an inequality that can be tight
    let eps = 1e-12 * (1.0 + log_z.abs());
    Ok(Sandwich {
        log_lower,
        log_z,
        log_upper,
        lower_slack,
        upper_slack,
        lower_ok: lower_slack >= -eps,
        upper_ok: upper_slack >= -eps,
        upper_ok_corrected: upper_slack + 0.5 * delta.abs() >= -eps,
    })
}

/// `E_{N,δ}^T(L_{N,T}) / N` by a recursion carrying the weight and the
/// weighted contact count.
pub fn contact_fraction(n: u64, delta: f64, g: Geometry) -> Result<f64> {
    let g = g.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let m = cylinder_size(n, g);
    let reward = delta.exp();
    let mut w = vec![0.0; m];
    let mut c = vec![0.0; m];
    let mut nw = vec![0.0; m];
    let mut nc = vec![0.0; m];
    w[0] = 1.0;
    for _ in 0..n {
        nw.iter_mut().for_each(|v| *v = 0.0);
        nc.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..m {
            let (a, b) = (0.5 * w[s], 0.5 * c[s]);
            for r in [(s + 1) % m, (s + m - 1) % m] {
                nw[r] += a;
                nc[r] += b;
            }
        }
        nw[0] *= reward;
        nc[0] = nc[0] * reward + nw[0];
        let total: f64 = nw.iter().sum();
        for s in 0..m {
            nw[s] /= total;
            nc[s] /= total;
        }
        std::mem::swap(&mut w, &mut nw);
        std::mem::swap(&mut c, &mut nc);
    }
    Ok(c.iter().sum::<f64>() / w.iter().sum::<f64>() / n as f64)
}

/// Law of `S_N` under the polymer measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointLaw {
    pub n: u64,
    pub delta: f64,
    pub geometry: Geometry,
    /// `probs[s + N] = P(S_N = s)` for `-N <= s <= N`.
    pub probs: Vec<f64>,
}

impl EndpointLaw {
    pub fn prob(&self, s: i64) -> f64 {
        let i = s + self.n as i64;
        if i < 0 || i as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    /// `(s, P(S_N = s))` over the support.
    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n as i64;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(move |(i, p)| (i as i64 - n, *p))
    }
}

/// Full-band recursion over positions `-N..=N`; `N <= 4000`.
pub fn endpoint_law_dp(n: u64, delta: f64, g: Geometry) -> Result<EndpointLaw> {
    let g = g.validate()?;
    if n > MAX_ENDPOINT_DP {
        return Err(Error::TooLarge {
            what: "endpoint recursion length",
            limit: MAX_ENDPOINT_DP,
            got: n,
        });
    }
    let nn = n as usize;
    let width = 2 * nn + 1;
    let reward = delta.exp();
    let weight: Vec<f64> = (0..width)
        .map(|i| {
            let s = i as i64 - n as i64;
            let hit = match g {
                Geometry::Finite(t) => s.rem_euclid(t as i64) == 0,
                Geometry::Infinite => s == 0,
            };
            if hit {
                reward
            } else {
                1.0
            }
        })
        .collect();
    let mut w = vec![0.0; width];
    let mut next = vec![0.0; width];
    w[nn] = 1.0;
    for step in 0..nn {
        // after `step` steps the support is |s| <= step
        let (lo, hi) = (nn - step, nn + step);
        next[lo.saturating_sub(1)..=(hi + 1).min(width - 1)]
            .iter_mut()
            .for_each(|v| *v = 0.0);
        for i in (lo..=hi).step_by(2) {
            let v = 0.5 * w[i];
            next[i - 1] += v;
            next[i + 1] += v;
        }
        let mut total = 0.0;
        for i in ((lo - 1)..=(hi + 1)).step_by(2) {
            next[i] *= weight[i];
            total += next[i];
        }
        for i in ((lo - 1)..=(hi + 1)).step_by(2) {
            next[i] /= total;
        }
        // clear the stale parity class
        for i in (lo..=hi).step_by(2) {
            w[i] = 0.0;
        }
        std::mem::swap(&mut w, &mut next);
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Ok(EndpointLaw {
        n,
        delta,
        geometry: g,
        probs: w,
    })
}
