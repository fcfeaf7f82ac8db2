//! The tilted renewal process: step law `K(n, j) = e^δ q^{|j|}(n) e^{-φn}`,
//! constant-time sampling, and the renewal mass `u(n) = P(n ∈ τ)`.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::exact;
use crate::free_energy::phi;
use crate::kernels::{
    geometric_moment_tail, horizon_for, kernel_envelope, q0_series, q1_series, tilted_kernel,
    Geometry, MAX_HORIZON,
};

/// Default bound on the step-law mass left beyond the table.
pub const DEFAULT_STEP_TOLERANCE: f64 = 1e-14;

/// One renewal step: gap `n` and interface-change mark `j ∈ {-1, 0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub n: usize,
    pub mark: i8,
}

#[derive(Clone, Copy, Debug)]
enum Entry {
    Head { n: u32, change: bool },
    Tail,
}

/// Step law of the tilted renewal for finite spacing, tabulated to a horizon
/// with a certified tail bound.
#[derive(Clone, Debug)]
pub struct TiltedStepLaw {
    delta: f64,
    spacing: u32,
    phi: f64,
    /// `e^δ q⁰(n) e^{-φn}`
    k0: Vec<f64>,
    /// `e^δ q¹(n) e^{-φn}`, the mass of each of the marks `±1`
    k1: Vec<f64>,
    tail_mass: f64,
    residual: f64,
    env_scale: f64,
    env_ratio: f64,
    entries: Vec<Entry>,
    alias: WeightedAliasIndex<f64>,
}

impl TiltedStepLaw {
    /// Tabulate the law until the geometric envelope leaves at most
    /// `tolerance` of mass beyond the horizon.
    pub fn build(delta: f64, g: Geometry, tolerance: f64) -> Result<Self> {
        let t = match g.validate()? {
            Geometry::Finite(t) => t,
            Geometry::Infinite => {
                return Err(Error::InvalidArgument(
                    "the step law needs a finite spacing".into(),
                ))
            }
        };
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        let phi = phi(delta, g)?;
        let (b, c) = kernel_envelope(g);
        let env_scale = delta.exp() * b;
        let env_ratio = c * (-phi).exp();
        let h = horizon_for(env_scale, env_ratio, 0, tolerance, MAX_HORIZON)
            .ok_or(Error::HorizonOverflow {
                cap: MAX_HORIZON,
                tolerance,
            })?
            .max(2);
        let tk = tilted_kernel(g, phi, h);
        let ed = delta.exp();
        let k0: Vec<f64> = tk.k0.iter().map(|v| ed * v).collect();
        let k1: Vec<f64> = tk.k1.iter().map(|v| ed * v).collect();
        let head: f64 = k0.iter().zip(&k1).map(|(a, b)| a + 2.0 * b).sum();
        let tail_mass = env_scale * geometric_moment_tail(env_ratio, h, 0);
        if head > 1.0 + 1e-10 || head + tail_mass < 1.0 - 1e-10 {
            return Err(Error::Domain {
                what: "step law",
                value: head,
                detail: format!("head {head} plus tail bound {tail_mass} is not normalized"),
            });
        }
        let residual = (1.0 - head).max(0.0).min(tail_mass);

        let mut entries = Vec::new();
        let mut weights = Vec::new();
        for n in 1..=h {
            if k0[n] > 0.0 {
                entries.push(Entry::Head { n: n as u32, change: false });
                weights.push(k0[n]);
            }
            if k1[n] > 0.0 {
                entries.push(Entry::Head { n: n as u32, change: true });
                weights.push(2.0 * k1[n]);
            }
        }
        if residual > 0.0 {
            entries.push(Entry::Tail);
            weights.push(residual);
        }
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::InvalidArgument(format!("alias table: {e}")))?;

        Ok(TiltedStepLaw {
            delta,
            spacing: t,
            phi,
            k0,
            k1,
            tail_mass,
            residual,
            env_scale,
            env_ratio,
            entries,
            alias,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn spacing(&self) -> u32 {
        self.spacing
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::Finite(self.spacing)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Largest tabulated gap.
    pub fn horizon(&self) -> usize {
        self.k0.len() - 1
    }

    /// `P((n, j))`; zero past the horizon.
    pub fn mass(&self, n: usize, j: i8) -> f64 {
        if n >= self.k0.len() {
            return 0.0;
        }
        match j {
            0 => self.k0[n],
            -1 | 1 => self.k1[n],
            _ => 0.0,
        }
    }

    /// `K(n) = ∑_j P((n, j))`.
    pub fn total(&self, n: usize) -> f64 {
        if n >= self.k0.len() {
            return 0.0;
        }
        self.k0[n] + 2.0 * self.k1[n]
    }

    /// Certified bound on the mass beyond the horizon.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Tabulated mass.
    pub fn head_mass(&self) -> f64 {
        (1..self.k0.len()).map(|n| self.total(n)).sum()
    }

    /// Probability `2e^δ Q¹(φ)` that a step changes interface.
    pub fn change_probability(&self) -> f64 {
        2.0 * self.k1.iter().sum::<f64>()
    }

    /// Mean of the tabulated law.
    pub fn mean(&self) -> f64 {
        (1..self.k0.len()).map(|n| n as f64 * self.total(n)).sum()
    }

    /// Draw one step. Gaps past the horizon come from rejection against the
    /// geometric envelope with exact series values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Step {
        match self.entries[self.alias.sample(rng)] {
            Entry::Head { n, change } => Step {
                n: n as usize,
                mark: if change { random_sign(rng) } else { 0 },
            },
            Entry::Tail => self.sample_tail(rng),
        }
    }

    fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> Step {
        let t = self.spacing;
        let h = self.horizon();
        let geo = Geometric::new(1.0 - self.env_ratio).expect("envelope ratio in (0, 1)");
        let ed = self.delta.exp();
        loop {
            let n = h + 1 + geo.sample(rng) as usize;
            let q0 = q0_series(t, n as u64).unwrap_or(0.0);
            let q1 = q1_series(t, n as u64).unwrap_or(0.0);
            let tilt = (-self.phi * n as f64).exp();
            let k = ed * (q0 + 2.0 * q1) * tilt;
            let bound = self.env_scale * self.env_ratio.powf(n as f64);
            if k > 0.0 && rng.random::<f64>() * bound < k {
                let u = rng.random::<f64>() * (q0 + 2.0 * q1);
                let mark = if u < q0 {
                    0
                } else if u < q0 + q1 {
                    1
                } else {
                    -1
                };
                return Step { n, mark };
            }
        }
    }

    /// Residual probability of the tail branch.
    pub fn tail_branch_probability(&self) -> f64 {
        self.residual
    }
}

pub(crate) fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

/// `u(n) = P(n ∈ τ)` for `0 <= n <= N` under the tabulated step law.
#[derive(Clone, Debug)]
pub struct RenewalMass {
    pub delta: f64,
    pub spacing: u32,
    pub u: Vec<f64>,
}

impl RenewalMass {
    pub fn len(&self) -> usize {
        self.u.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.u.len() <= 1
    }

    pub fn get(&self, n: usize) -> f64 {
        self.u[n]
    }
}

/// Direct convolution `u(n) = ∑_{m<=n} K(m) u(n-m)`; odd entries stay zero
/// because every gap is even.
pub fn renewal_mass(law: &TiltedStepLaw, n_max: usize) -> RenewalMass {
    let mut u = vec![0.0; n_max + 1];
    u[0] = 1.0;
    let k: Vec<f64> = (0..=law.horizon()).map(|n| law.total(n)).collect();
    let h = law.horizon();
    for n in (2..=n_max).step_by(2) {
        let top = n.min(h);
        let mut s = 0.0;
        for m in (2..=top).step_by(2) {
            s += k[m] * u[n - m];
        }
        u[n] = s;
    }
    RenewalMass {
        delta: law.delta(),
        spacing: law.spacing(),
        u,
    }
}

/// Both sides of `log Z^c_N = φN + log u(N)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

pub fn partition_identity_check(delta: f64, g: Geometry, n: u64) -> Result<IdentityGap> {
    if n % 2 == 1 {
        return Err(Error::OddLength(n));
    }
    let lhs = exact::z_constrained_dp(n, delta, g)?;
    let law = TiltedStepLaw::build(delta, g, DEFAULT_STEP_TOLERANCE)?;
    let u = renewal_mass(&law, n as usize);
    let rhs = law.phi() * n as f64 + u.get(n as usize).ln();
    Ok(IdentityGap {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_energy::{phi_inf_prime, step_mean, step_moments};
    use crate::kernels::q1_closed;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn law(delta: f64, t: u32) -> TiltedStepLaw {
        TiltedStepLaw::build(delta, Geometry::Finite(t), DEFAULT_STEP_TOLERANCE).unwrap()
    }

    #[test]
    fn t2_law() {
        let l = law(1.0, 2);
        assert!((l.phi() - 0.5).abs() < 1e-14);
        let e = 1f64.exp();
        assert!((l.mass(2, 0) - e * 0.5 * (-1f64).exp()).abs() < 1e-14);
        assert!((l.mass(2, 1) - e * 0.25 * (-1f64).exp()).abs() < 1e-14);
        assert!((l.head_mass() - 1.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(l.sample(&mut rng).n, 2);
        }
    }

    #[test]
    fn normalization_and_marks() {
        for (d, t) in [(1.0, 8u32), (-1.0, 16), (0.5, 4), (2.0, 38)] {
            let l = law(d, t);
            let total = l.head_mass() + l.tail_mass();
            assert!((total - 1.0).abs() < 1e-10, "δ={d} T={t}: {total}");
            let g = Geometry::Finite(t);
            let change = l.change_probability();
            let closed = 2.0 * d.exp() * q1_closed(g, l.phi()).unwrap();
            assert!((change - closed).abs() < 1e-10, "{change} {closed}");
            for n in 1..l.horizon() {
                assert_eq!(l.mass(n, 1), l.mass(n, -1));
                if n % 2 == 1 {
                    assert_eq!(l.total(n), 0.0);
                }
            }
        }
    }

    #[test]
    fn conditional_mark_law() {
        let l = law(1.0, 6);
        for n in [6usize, 8, 12] {
            let q0 = q0_series(6, n as u64).unwrap();
            let q1 = q1_series(6, n as u64).unwrap();
            let q = q0 + 2.0 * q1;
            assert!((l.mass(n, 0) / l.total(n) - q0 / q).abs() < 1e-12);
            assert!((l.mass(n, 1) / l.total(n) - q1 / q).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_mean_and_change_rate() {
        let l = law(1.0, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 1_000_000usize;
        let (mut s, mut s2, mut changes) = (0.0, 0.0, 0usize);
        for _ in 0..m {
            let st = l.sample(&mut rng);
            let n = st.n as f64;
            s += n;
            s2 += n * n;
            changes += (st.mark != 0) as usize;
        }
        let mean = s / m as f64;
        let sd = (s2 / m as f64 - mean * mean).sqrt();
        let target = step_mean(1.0, Geometry::Finite(8)).unwrap();
        assert!((mean - target).abs() < 3.0 * sd / (m as f64).sqrt(), "{mean} {target}");
        let p = l.change_probability();
        let p_hat = changes as f64 / m as f64;
        assert!((p_hat - p).abs() < 3.0 * (p * (1.0 - p) / m as f64).sqrt(), "{p_hat} {p}");
    }

    #[test]
    fn tail_branch_matches_series() {
        // loose tolerance so the tail branch carries visible mass
        let l = TiltedStepLaw::build(1.0, Geometry::Finite(8), 0.5).unwrap();
        let p_tail = l.tail_branch_probability();
        assert!(p_tail > 1e-3);
        let h = l.horizon();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 400_000usize;
        let mut beyond = 0usize;
        let mut sum_beyond = 0.0;
        for _ in 0..m {
            let st = l.sample(&mut rng);
            if st.n > h {
                assert_eq!(st.n % 2, 0);
                beyond += 1;
                sum_beyond += st.n as f64;
            }
        }
        let p_hat = beyond as f64 / m as f64;
        assert!((p_hat - p_tail).abs() < 4.0 * (p_tail / m as f64).sqrt(), "{p_hat} {p_tail}");
        // conditional mean of the tail from the series
        let (mut w, mut wn) = (0.0, 0.0);
        for n in (h + 1)..(h + 400) {
            let k = 1f64.exp() * crate::kernels::q_total(8, n as u64).unwrap()
                * (-l.phi() * n as f64).exp();
            w += k;
            wn += n as f64 * k;
        }
        let mean_hat = sum_beyond / beyond as f64;
        assert!((mean_hat - wn / w).abs() < 0.5, "{mean_hat} {}", wn / w);
    }

    #[test]
    fn renewal_mass_examples() {
        let l2 = law(1.0, 2);
        let u2 = renewal_mass(&l2, 40);
        for k in 0..=20 {
            assert!((u2.get(2 * k) - 1.0).abs() < 1e-13);
        }
        assert_eq!(u2.get(7), 0.0);

        let l8 = law(1.0, 8);
        let u8 = renewal_mass(&l8, 4000);
        assert_eq!(u8.get(0), 1.0);
        let limit = 2.0 / step_mean(1.0, Geometry::Finite(8)).unwrap();
        assert!((u8.get(4000) - limit).abs() < 1e-6);
        for n in 0..=4000 {
            let v = u8.get(n);
            assert!((0.0..=1.0).contains(&v));
            if n % 2 == 1 {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn uniform_renewal_convergence() {
        let limit = 2.0 * phi_inf_prime(1.0);
        for t in [8u32, 16, 32, 64] {
            let u = renewal_mass(&law(1.0, t), 10_000).get(10_000);
            let own = 2.0 / step_mean(1.0, Geometry::Finite(t)).unwrap();
            assert!((u - own).abs() < 1e-9, "T={t}");
            // at T = 8 the finite-T limit itself is 0.019 away
            if t >= 16 {
                assert!((u - limit).abs() <= 0.01, "T={t} {u} {limit}");
            }
        }
    }

    #[test]
    fn moments_converge_in_spacing() {
        let inf = step_moments(1.0, Geometry::Infinite).unwrap();
        let t64 = step_moments(1.0, Geometry::Finite(64)).unwrap();
        for k in 1..3 {
            assert!((t64[k] / inf[k] - 1.0).abs() < 1e-3, "k={k}");
        }
        let gaps: Vec<f64> = [8u32, 16, 32]
            .iter()
            .map(|&t| (step_moments(1.0, Geometry::Finite(t)).unwrap()[2] - inf[2]).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    }

    #[test]
    fn uniform_tail_bound() {
        let ts = [4u32, 8, 16, 32, 64];
        let c1 = ts
            .iter()
            .map(|&t| phi(1.0, Geometry::Finite(t)).unwrap())
            .fold(crate::free_energy::phi_inf(1.0), f64::min);
        assert!(c1 > 0.0, "{c1}");
        for &t in &ts {
            let l = law(1.0, t);
            let mut tail = l.tail_branch_probability();
            for n in (1..=l.horizon()).rev() {
                tail += l.total(n);
                let bound = (-c1 * n as f64).exp() / (1.0 - (-c1).exp());
                assert!(tail <= bound * (1.0 + 1e-9), "T={t} n={n} {tail} {bound}");
            }
        }
    }

    #[test]
    fn identity_small_case() {
        let r = partition_identity_check(1.0, Geometry::Finite(4), 2).unwrap();
        assert!((r.lhs - (1f64.exp() / 2.0).ln()).abs() < 1e-14);
        assert!(r.gap < 1e-13);
        assert!(partition_identity_check(1.0, Geometry::Finite(4), 3).is_err());
        assert!(partition_identity_check(-1.0, Geometry::Finite(4), 100).unwrap().gap <= 1e-8);
        assert!(partition_identity_check(2.0, Geometry::Finite(8), 400).unwrap().gap <= 1e-8);
    }

    #[test]
    fn infinite_spacing_rejected() {
        assert!(TiltedStepLaw::build(1.0, Geometry::Infinite, 1e-12).is_err());
    }
}
