//! Exact samplers of the contact skeleton `(t_i, ε_i)` and the final offset
//! `x`, under the constrained law (conditioned renewal) and the free polymer
//! law (suffix weights over the last contact).

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{band_walk, horizon_for, survival_envelope, tilted_kernel, Geometry, MAX_HORIZON};
use crate::renewal::{random_sign, renewal_mass, TiltedStepLaw, DEFAULT_STEP_TOLERANCE};

/// Receives a skeleton as it is drawn, so long paths need not be stored.
pub trait SkeletonVisitor {
    fn contact(&mut self, time: u64, mark: i8);
    fn finish(&mut self, mu_n: u64, x: i64);
}

/// Contact times, interface-change marks, last contact and final offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSkeleton {
    pub n: u64,
    pub spacing: u32,
    pub delta: f64,
    pub times: Vec<u64>,
    pub marks: Vec<i8>,
    pub mu_n: u64,
    pub x: i64,
}

impl ContactSkeleton {
    pub fn new(n: u64, spacing: u32, delta: f64) -> Self {
        ContactSkeleton {
            n,
            spacing,
            delta,
            times: Vec::new(),
            marks: Vec::new(),
            mu_n: 0,
            x: 0,
        }
    }

    /// Interface index after each contact, `Y_i = ε_1 + … + ε_i`.
    pub fn y_path(&self) -> Vec<i64> {
        self.marks
            .iter()
            .scan(0i64, |y, &e| {
                *y += e as i64;
                Some(*y)
            })
            .collect()
    }

    /// `S_N = T·Y_L + x`.
    pub fn endpoint(&self) -> i64 {
        let y: i64 = self.marks.iter().map(|&e| e as i64).sum();
        self.spacing as i64 * y + self.x
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSkeleton(msg));
        let t = self.spacing as u64;
        if self.times.len() != self.marks.len() {
            return bad(format!(
                "{} times but {} marks",
                self.times.len(),
                self.marks.len()
            ));
        }
        let mut prev = 0u64;
        for (i, (&ti, &e)) in self.times.iter().zip(&self.marks).enumerate() {
            if ti <= prev {
                return bad(format!("contact times not increasing at index {i}"));
            }
            let gap = ti - prev;
            if gap < 2 || gap % 2 == 1 {
                return bad(format!("gap {gap} at index {i} is not even and >= 2"));
            }
            match e {
                0 => {}
                -1 | 1 => {
                    if gap < t || (gap - t) % 2 == 1 {
                        return bad(format!("gap {gap} at index {i} cannot change interface"));
                    }
                }
                _ => return bad(format!("mark {e} at index {i}")),
            }
            prev = ti;
        }
        if prev > self.n {
            return bad(format!("contact at {prev} beyond N = {}", self.n));
        }
        if self.mu_n != prev {
            return bad(format!("mu_N = {} but last contact is {prev}", self.mu_n));
        }
        let rest = self.n - self.mu_n;
        if self.x.unsigned_abs() >= t {
            return bad(format!("offset {} outside (-T, T)", self.x));
        }
        if rest == 0 && self.x != 0 {
            return bad("mu_N = N but x != 0".into());
        }
        if rest > 0 && self.x == 0 {
            return bad("x = 0 without a contact at N".into());
        }
        if (rest as i64 - self.x).rem_euclid(2) == 1 {
            return bad(format!("x = {} has the wrong parity for {rest} free steps", self.x));
        }
        Ok(())
    }

    /// Header `N T delta mu_N x`, then one `t_i eps_i` line per contact.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {} {}\n", self.n, self.spacing, self.delta, self.mu_n, self.x);
        for (t, e) in self.times.iter().zip(&self.marks) {
            let _ = writeln!(s, "{t} {e}");
        }
        s
    }
}

impl SkeletonVisitor for ContactSkeleton {
    fn contact(&mut self, time: u64, mark: i8) {
        self.times.push(time);
        self.marks.push(mark);
    }

    fn finish(&mut self, mu_n: u64, x: i64) {
        self.mu_n = mu_n;
        self.x = x;
    }
}

/// Write skeletons separated by blank lines.
pub fn write_skeletons(skeletons: &[ContactSkeleton]) -> String {
    skeletons
        .iter()
        .map(ContactSkeleton::to_text)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parse the output of [`write_skeletons`]; each record is validated.
pub fn parse_skeletons(text: &str) -> Result<Vec<ContactSkeleton>> {
    let mut out = Vec::new();
    let mut cur: Option<ContactSkeleton> = None;
    let perr = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut finish = |cur: &mut Option<ContactSkeleton>, line: usize| -> Result<()> {
        if let Some(sk) = cur.take() {
            sk.validate().map_err(|e| perr(line, &e.to_string()))?;
            out.push(sk);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            finish(&mut cur, line)?;
            continue;
        }
        match &mut cur {
            None => {
                if fields.len() != 5 {
                    return Err(perr(line, "header needs `N T delta mu_N x`"));
                }
                let int = |s: &str| s.parse::<u64>().map_err(|_| perr(line, "bad integer"));
                let mut sk = ContactSkeleton::new(
                    int(fields[0])?,
                    int(fields[1])? as u32,
                    fields[2].parse().map_err(|_| perr(line, "bad delta"))?,
                );
                sk.mu_n = int(fields[3])?;
                sk.x = fields[4].parse().map_err(|_| perr(line, "bad offset"))?;
                cur = Some(sk);
            }
            Some(sk) => {
                if fields.len() != 2 {
                    return Err(perr(line, "contact line needs `t eps`"));
                }
                sk.times.push(fields[0].parse().map_err(|_| perr(line, "bad time"))?);
                sk.marks.push(fields[1].parse().map_err(|_| perr(line, "bad mark"))?);
            }
        }
    }
    let last = text.lines().count();
    finish(&mut cur, last)?;
    Ok(out)
}

/// Quantities derived from one skeleton.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SkeletonStats {
    /// `S_N`
    pub s_n: i64,
    /// `Y_L`, the interface occupied at the last contact.
    pub y_final: i64,
    /// `Y_1, …, Y_L`; left empty by streaming collectors.
    pub y_path: Vec<i64>,
    /// `L_N`, number of contacts in `1..=N`.
    pub l_n: u64,
    /// `L'_N`, number of interface changes.
    pub l_prime: u64,
    /// Times `θ_j` of the interface changes.
    pub theta: Vec<u64>,
    /// Index of the first step with `|ε| = 1`.
    pub delta_geom: Option<u64>,
    /// Length of that step.
    pub xi_at_delta: Option<u64>,
    pub mu_n: u64,
    pub x: i64,
}

/// Streaming [`SkeletonVisitor`] that accumulates [`SkeletonStats`].
#[derive(Clone, Debug)]
pub struct StatsCollector {
    spacing: i64,
    keep_theta: bool,
    last: u64,
    pub stats: SkeletonStats,
}

impl StatsCollector {
    pub fn new(spacing: u32, keep_theta: bool) -> Self {
        StatsCollector {
            spacing: spacing as i64,
            keep_theta,
            last: 0,
            stats: SkeletonStats::default(),
        }
    }
}

impl SkeletonVisitor for StatsCollector {
    fn contact(&mut self, time: u64, mark: i8) {
        let st = &mut self.stats;
        st.l_n += 1;
        if mark != 0 {
            st.l_prime += 1;
            st.y_final += mark as i64;
            if st.delta_geom.is_none() {
                st.delta_geom = Some(st.l_n);
                st.xi_at_delta = Some(time - self.last);
            }
            if self.keep_theta {
                st.theta.push(time);
            }
        }
        self.last = time;
    }

    fn finish(&mut self, mu_n: u64, x: i64) {
        let st = &mut self.stats;
        st.mu_n = mu_n;
        st.x = x;
        st.s_n = self.spacing * st.y_final + x;
    }
}

/// Validate a stored skeleton and derive its statistics.
pub fn skeleton_statistics(sk: &ContactSkeleton) -> Result<SkeletonStats> {
    sk.validate()?;
    let mut c = StatsCollector::new(sk.spacing, true);
    for (&t, &e) in sk.times.iter().zip(&sk.marks) {
        c.contact(t, e);
    }
    c.finish(sk.mu_n, sk.x);
    c.stats.y_path = sk.y_path();
    Ok(c.stats)
}

/// Law of the offset `x` after `m` steps without touching `Tℤ` from a start
/// on an interface, and the survival `P(τ > m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoContactLaw {
    pub spacing: u32,
    pub m: u64,
    pub survival: f64,
    /// `(x, P(τ > m, S_m = x))`, both signs, increasing in `x`.
    pub masses: Vec<(i64, f64)>,
}

pub fn no_contact_endpoint(g: Geometry, m: u64) -> Result<NoContactLaw> {
    let t = finite_spacing(g)?;
    if m == 0 {
        return Ok(NoContactLaw {
            spacing: t,
            m,
            survival: 1.0,
            masses: vec![(0, 1.0)],
        });
    }
    if m > MAX_HORIZON as u64 {
        return Err(Error::TooLarge {
            what: "no-contact length",
            limit: MAX_HORIZON as u64,
            got: m,
        });
    }
    let mut row = Vec::new();
    let mut survival = 0.0;
    band_walk(t, 1.0, m as usize, |st| {
        if st.n == m as usize {
            row = st.band.to_vec();
            survival = st.survival;
        }
        true
    });
    let mut masses: Vec<(i64, f64)> = Vec::new();
    for y in (1..t as usize).rev() {
        if row[y] > 0.0 {
            masses.push((-(y as i64), row[y]));
        }
    }
    for y in 1..t as usize {
        if row[y] > 0.0 {
            masses.push((y as i64, row[y]));
        }
    }
    Ok(NoContactLaw {
        spacing: t,
        m,
        survival,
        masses,
    })
}

fn finite_spacing(g: Geometry) -> Result<u32> {
    match g.validate()? {
        Geometry::Finite(t) => Ok(t),
        Geometry::Infinite => Err(Error::InvalidArgument(
            "skeleton samplers need a finite spacing".into(),
        )),
    }
}

/// Gap and mark drawn from weights `K(n, j)·v(rem - n)`, with `target`
/// uniform on `[0, ∑_n K(n) v(rem - n))`.
#[inline]
fn pick_step(law: &EvenKernel, v: &[f64], rem: usize, mut target: f64) -> (usize, i8) {
    let top = rem.min(law.horizon);
    let mut fallback = (2usize, 0i8);
    let mut n = 2;
    while n <= top {
        let (k0, k1) = law.k[n / 2];
        let vv = v[rem - n];
        let w = (k0 + 2.0 * k1) * vv;
        if w > 0.0 {
            if target < w {
                let r = target / vv;
                let mark = if r < k0 {
                    0
                } else if r < k0 + k1 {
                    1
                } else {
                    -1
                };
                return (n, mark);
            }
            target -= w;
            fallback = (n, if k0 > 0.0 { 0 } else { 1 });
        }
        n += 2;
    }
    fallback
}

/// Even-gap view of the step law for the conditioned chains.
#[derive(Clone, Debug)]
struct EvenKernel {
    horizon: usize,
    /// `(K(n, 0), K(n, +1))` at index `n / 2`.
    k: Vec<(f64, f64)>,
}

impl EvenKernel {
    fn new(law: &TiltedStepLaw) -> Self {
        let horizon = law.horizon();
        let k = (0..=horizon / 2)
            .map(|i| (law.mass(2 * i, 0), law.mass(2 * i, 1)))
            .collect();
        EvenKernel { horizon, k }
    }

    fn total(&self, n: usize) -> f64 {
        let (a, b) = self.k[n / 2];
        a + 2.0 * b
    }
}

/// Exact sampler of the contact skeleton under `P^{T,c}_{N,δ}`: the renewal
/// conditioned on `N ∈ τ`, drawn forward with weights `K(n)u(r-n)/u(r)`.
#[derive(Clone, Debug)]
pub struct ConstrainedSampler {
    n: u64,
    delta: f64,
    spacing: u32,
    kernel: EvenKernel,
    u: Vec<f64>,
}

impl ConstrainedSampler {
    pub fn new(delta: f64, g: Geometry, n: u64) -> Result<Self> {
        let spacing = finite_spacing(g)?;
        if n % 2 == 1 {
            return Err(Error::OddLength(n));
        }
        let law = TiltedStepLaw::build(delta, g, DEFAULT_STEP_TOLERANCE)?;
        let u = renewal_mass(&law, n as usize).u;
        Ok(ConstrainedSampler {
            n,
            delta,
            spacing,
            kernel: EvenKernel::new(&law),
            u,
        })
    }

    pub fn length(&self) -> u64 {
        self.n
    }

    pub fn sample<R: Rng + ?Sized, V: SkeletonVisitor>(&self, rng: &mut R, visitor: &mut V) {
        let n = self.n as usize;
        let mut rem = n;
        while rem > 0 {
            let target = rng.random::<f64>() * self.u[rem];
            let (gap, mark) = pick_step(&self.kernel, &self.u, rem, target);
            rem -= gap;
            let mark = if mark != 0 { random_sign(rng) } else { 0 };
            visitor.contact((n - rem) as u64, mark);
        }
        visitor.finish(self.n, 0);
    }

    pub fn sample_skeleton<R: Rng + ?Sized>(&self, rng: &mut R) -> ContactSkeleton {
        let mut sk = ContactSkeleton::new(self.n, self.spacing, self.delta);
        self.sample(rng, &mut sk);
        sk
    }
}

/// Exact sampler of the contact skeleton and final offset under the free
/// polymer law `P^T_{N,δ}`.
///
/// With `G(m) = e^{-φm} P(τ > m)` and `W(m) = G(m) + ∑_n K(n) W(m - n)`, at
/// `m` steps remaining the path stops touching with probability `G(m)/W(m)`,
/// otherwise takes gap `n` with probability `K(n)W(m-n)/W(m)`.
#[derive(Clone, Debug)]
pub struct FreeSampler {
    n: u64,
    delta: f64,
    phi: f64,
    spacing: u32,
    kernel: EvenKernel,
    g: Vec<f64>,
    w: Vec<f64>,
    /// Cumulative positive-side offset masses after `m` free steps, index `m`.
    offsets: Vec<Vec<f64>>,
}

/// Bound on the neglected `∑_{m > h} G(m)`.
const SURVIVAL_TOLERANCE: f64 = 1e-15;

impl FreeSampler {
    pub fn new(delta: f64, g: Geometry, n: u64) -> Result<Self> {
        let spacing = finite_spacing(g)?;
        let law = TiltedStepLaw::build(delta, g, DEFAULT_STEP_TOLERANCE)?;
        let phi = law.phi();
        let kernel = EvenKernel::new(&law);
        let (scale, c) = survival_envelope(g);
        let hg = horizon_for(scale, c * (-phi).exp(), 0, SURVIVAL_TOLERANCE, MAX_HORIZON)
            .ok_or(Error::HorizonOverflow {
                cap: MAX_HORIZON,
                tolerance: SURVIVAL_TOLERANCE,
            })?
            .max(2)
            .min(n as usize);

        let mut offsets = vec![Vec::new(); hg + 1];
        let mut gvec = vec![0.0; hg + 1];
        gvec[0] = 1.0;
        let tk = tilted_kernel(g, phi, hg);
        gvec[..=hg].copy_from_slice(&tk.survival[..=hg]);
        band_walk(spacing, 1.0, hg, |st| {
            let mut acc = 0.0;
            offsets[st.n] = st.band[1..]
                .iter()
                .map(|v| {
                    acc += v;
                    acc
                })
                .collect();
            true
        });

        let nn = n as usize;
        let mut w = vec![0.0; nn + 1];
        for m in 0..=nn {
            let mut s = if m <= hg { gvec[m] } else { 0.0 };
            let top = m.min(kernel.horizon);
            let mut k = 2;
            while k <= top {
                s += kernel.total(k) * w[m - k];
                k += 2;
            }
            w[m] = s;
        }
        Ok(FreeSampler {
            n,
            delta,
            phi,
            spacing,
            kernel,
            g: gvec,
            w,
            offsets,
        })
    }

    pub fn length(&self) -> u64 {
        self.n
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `log W(N)`, which equals `log Z_{N,δ}^T - φN`.
    pub fn log_suffix_weight(&self) -> f64 {
        self.w[self.n as usize].ln()
    }

    pub fn sample<R: Rng + ?Sized, V: SkeletonVisitor>(&self, rng: &mut R, visitor: &mut V) {
        let n = self.n as usize;
        let mut rem = n;
        loop {
            let gm = self.g.get(rem).copied().unwrap_or(0.0);
            let target = rng.random::<f64>() * self.w[rem];
            if target < gm || rem == 0 {
                let x = self.draw_offset(rng, rem);
                visitor.finish((n - rem) as u64, x);
                return;
            }
            let (gap, mark) = pick_step(&self.kernel, &self.w, rem, target - gm);
            rem -= gap;
            let mark = if mark != 0 { random_sign(rng) } else { 0 };
            visitor.contact((n - rem) as u64, mark);
        }
    }

    fn draw_offset<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> i64 {
        if m == 0 {
            return 0;
        }
        let cum = &self.offsets[m];
        let total = *cum.last().expect("nonempty band");
        let target = rng.random::<f64>() * total;
        let y = cum.partition_point(|&c| c <= target).min(cum.len() - 1) + 1;
        random_sign(rng) as i64 * y as i64
    }

    pub fn sample_skeleton<R: Rng + ?Sized>(&self, rng: &mut R) -> ContactSkeleton {
        let mut sk = ContactSkeleton::new(self.n, self.spacing, self.delta);
        self.sample(rng, &mut sk);
        sk
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::z_free_dp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn t2_constrained_is_deterministic() {
        let s = ConstrainedSampler::new(1.0, Geometry::Finite(2), 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let sk = s.sample_skeleton(&mut rng);
            assert_eq!(sk.times, vec![2, 4, 6, 8, 10]);
            sk.validate().unwrap();
            assert_eq!(skeleton_statistics(&sk).unwrap().l_n, 5);
        }
        assert!(ConstrainedSampler::new(1.0, Geometry::Finite(2), 9).is_err());
    }

    #[test]
    fn no_contact_examples() {
        let g4 = Geometry::Finite(4);
        let a = no_contact_endpoint(g4, 1).unwrap();
        assert_eq!(a.masses, vec![(-1, 0.5), (1, 0.5)]);
        assert_eq!(a.survival, 1.0);
        let b = no_contact_endpoint(g4, 2).unwrap();
        assert_eq!(b.masses, vec![(-2, 0.25), (2, 0.25)]);
        assert_eq!(b.survival, 0.5);
        let g2 = Geometry::Finite(2);
        assert_eq!(no_contact_endpoint(g2, 1).unwrap().masses, vec![(-1, 0.5), (1, 0.5)]);
        for m in 2..6 {
            assert_eq!(no_contact_endpoint(g2, m).unwrap().survival, 0.0);
        }
        // survival is the tail of the kernel
        let table = crate::kernels::KernelTable::with_horizon(Geometry::Finite(8), 60).unwrap();
        for m in 1..60u64 {
            let law = no_contact_endpoint(Geometry::Finite(8), m).unwrap();
            let head: f64 = (1..=m as usize).map(|n| table.q(n)).sum();
            assert!((law.survival - (1.0 - head)).abs() < 1e-10);
            let sum: f64 = law.masses.iter().map(|p| p.1).sum();
            assert!((sum - law.survival).abs() < 1e-14);
            for (x, _) in &law.masses {
                assert_eq!((x - m as i64).rem_euclid(2), 0);
            }
        }
    }

    #[test]
    fn suffix_weight_identity() {
        for (d, t, n) in [(1.0, 8u32, 300u64), (-1.0, 4, 200), (0.5, 16, 301), (0.0, 6, 50)] {
            let s = FreeSampler::new(d, Geometry::Finite(t), n).unwrap();
            let expect = z_free_dp(n, d, Geometry::Finite(t)).unwrap() - s.phi() * n as f64;
            assert!((s.log_suffix_weight() - expect).abs() < 1e-8, "δ={d} T={t} N={n}");
        }
    }

    #[test]
    fn free_two_steps_without_tilt() {
        let s = FreeSampler::new(0.0, Geometry::Finite(4), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 100_000;
        let mut contacts = 0;
        for _ in 0..m {
            let sk = s.sample_skeleton(&mut rng);
            sk.validate().unwrap();
            if sk.times == vec![2] {
                contacts += 1;
            } else {
                assert!(sk.times.is_empty());
                assert_eq!(sk.x.abs(), 2);
            }
        }
        let p = contacts as f64 / m as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / m as f64).sqrt() + 1e-9, "{p}");
    }

    #[test]
    fn statistics_examples() {
        let mut sk = ContactSkeleton::new(7, 4, 1.0);
        sk.x = 1;
        let st = skeleton_statistics(&sk).unwrap();
        assert_eq!((st.l_n, st.l_prime, st.s_n), (0, 0, 1));

        let mut sk = ContactSkeleton::new(30, 4, 1.0);
        for (t, e) in [(2, 0), (4, 0), (8, 1), (10, 0), (14, -1)] {
            sk.contact(t, e);
        }
        sk.finish(14, 0);
        assert!(sk.validate().is_err());
        sk.n = 14;
        let st = skeleton_statistics(&sk).unwrap();
        assert_eq!(st.y_final, 0);
        assert_eq!(st.l_prime, 2);
        assert_eq!(st.theta, vec![8, 14]);
        assert_eq!(st.delta_geom, Some(3));
        assert_eq!(st.xi_at_delta, Some(4));
        assert_eq!(st.y_path, vec![0, 0, 1, 1, 0]);
    }

    #[test]
    fn validation_rejects_bad_skeletons() {
        let mut sk = ContactSkeleton::new(10, 4, 1.0);
        sk.contact(2, 1);
        sk.finish(2, 2);
        assert!(sk.validate().is_err());
        let mut sk = ContactSkeleton::new(10, 4, 1.0);
        sk.contact(3, 0);
        sk.finish(3, 1);
        assert!(sk.validate().is_err());
        let mut sk = ContactSkeleton::new(10, 4, 1.0);
        sk.contact(4, 0);
        sk.finish(4, 4);
        assert!(sk.validate().is_err());
        let mut sk = ContactSkeleton::new(10, 4, 1.0);
        sk.contact(4, 0);
        sk.finish(4, 1);
        assert!(sk.validate().is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = FreeSampler::new(1.0, Geometry::Finite(8), 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sks: Vec<_> = (0..5).map(|_| s.sample_skeleton(&mut rng)).collect();
        let text = write_skeletons(&sks);
        assert_eq!(parse_skeletons(&text).unwrap(), sks);
        assert!(matches!(
            parse_skeletons("10 4 1 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn streaming_matches_stored() {
        let s = FreeSampler::new(1.0, Geometry::Finite(6), 1000).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(21);
        let mut b = a.clone();
        for _ in 0..20 {
            let sk = s.sample_skeleton(&mut a);
            let mut c = StatsCollector::new(6, true);
            s.sample(&mut b, &mut c);
            let mut st = skeleton_statistics(&sk).unwrap();
            st.y_path.clear();
            assert_eq!(st, c.stats);
        }
    }
}
