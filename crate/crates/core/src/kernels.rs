//! First-passage kernels of the simple random walk on the interface set `T·ℤ`.
//!
//! For a walk started on an interface, `τ` is the first time it touches an
//! interface again and the mark `ε ∈ {-1, 0, +1}` records whether that
//! interface lies below, is the same, or lies above. This module provides
//!
//! * the probabilities `q⁰(n) = P(τ = n, ε = 0)` and `q¹(n) = P(τ = n, ε = +1)`
//!   both as trigonometric sums and as exact tables from an absorbing band
//!   recursion ([`KernelTable`]),
//! * the Laplace transforms `Q⁰(λ)`, `Q¹(λ)` and `Q(λ) = Q⁰ + 2Q¹` in closed
//!   form, together with `Q'(λ)` and the pole `λ₀(T)`.
//!
//! `T = ∞` is the single interface at zero, where `τ` is the first return time.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on tabulated horizons.
pub const MAX_HORIZON: usize = 1_000_000;

/// Default target for the untilted tail mass of a [`KernelTable`].
pub const DEFAULT_TAIL_TARGET: f64 = 1e-12;

/// Spacing between consecutive interfaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Geometry {
    /// Interfaces at `T·ℤ` for an even `T >= 2`.
    Finite(u32),
    /// A single interface at zero.
    Infinite,
}

impl Geometry {
    pub fn finite(spacing: i64) -> Result<Self> {
        check_spacing_i64(spacing)?;
        Ok(Geometry::Finite(spacing as u32))
    }

    pub fn spacing(self) -> Option<u32> {
        match self {
            Geometry::Finite(t) => Some(t),
            Geometry::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Geometry::Infinite)
    }

    pub fn validate(self) -> Result<Self> {
        if let Geometry::Finite(t) = self {
            check_spacing(t)?;
        }
        Ok(self)
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Finite(t) => write!(f, "{t}"),
            Geometry::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "infinity" | "∞" => Ok(Geometry::Infinite),
            _ => {
                let t: i64 = s
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("not a spacing: {s:?}")))?;
                Geometry::finite(t)
            }
        }
    }
}

fn check_spacing_i64(t: i64) -> Result<()> {
    if t < 2 || t % 2 != 0 || t > u32::MAX as i64 {
        return Err(Error::InvalidSpacing(t));
    }
    Ok(())
}

pub(crate) fn check_spacing(t: u32) -> Result<()> {
    check_spacing_i64(t as i64)
}

fn int_pow(base: f64, exp: u64) -> f64 {
    if exp <= i32::MAX as u64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp as f64)
    }
}

/// `P(τ = n, ε = 0)` from the full Feller sum over `ν = 1..T-1`.
pub fn q0_series(t: u32, n: u64) -> Result<f64> {
    check_spacing(t)?;
    if n < 2 || n % 2 == 1 {
        return Ok(0.0);
    }
    let tf = t as f64;
    let sum: f64 = (1..t)
        .map(|nu| {
            let a = PI * nu as f64 / tf;
            int_pow(a.cos(), n - 2) * a.sin().powi(2)
        })
        .sum();
    Ok((sum / tf).max(0.0))
}

/// `P(τ = n, ε = +1)`; the `ε = -1` mass is the same by symmetry.
pub fn q1_series(t: u32, n: u64) -> Result<f64> {
    check_spacing(t)?;
    if n < t as u64 || (n - t as u64) % 2 == 1 {
        return Ok(0.0);
    }
    let tf = t as f64;
    let sum: f64 = (1..t)
        .map(|nu| {
            let a = PI * nu as f64 / tf;
            let sign = if nu % 2 == 1 { 1.0 } else { -1.0 };
            sign * int_pow(a.cos(), n - 2) * a.sin().powi(2)
        })
        .sum();
    Ok((sum / (2.0 * tf)).max(0.0))
}

/// `P(τ = n) = q⁰(n) + 2q¹(n)`.
pub fn q_total(t: u32, n: u64) -> Result<f64> {
    Ok(q0_series(t, n)? + 2.0 * q1_series(t, n)?)
}

/// Pole of the transforms: `λ₀(T) = -½·log(1 + tan²(π/T))`.
///
/// `T = 2` has no pole (`Q₂(λ) = e^{-2λ}`) and returns `-∞`.
pub fn lambda0(t: u32) -> Result<f64> {
    check_spacing(t)?;
    if t == 2 {
        return Ok(f64::NEG_INFINITY);
    }
    let tan = (PI / t as f64).tan();
    Ok(-0.5 * (tan * tan).ln_1p())
}

/// Below this `|λ|` the transforms use their Taylor polynomials at zero.
fn taylor_cutoff(t: u32) -> f64 {
    if t == 2 {
        return 1e-6;
    }
    // the series radius is |λ₀(T)|, which shrinks like T⁻²
    let l0 = (-0.5 * ((PI / t as f64).tan().powi(2)).ln_1p()).abs();
    (1e-3 * l0).min(1e-6)
}

fn taylor_coefficients(t: u32) -> ([f64; 4], [f64; 4]) {
    let t = t as f64;
    let t2 = t * t;
    let tm = (t - 1.0) * (t + 1.0);
    let a = [
        (t - 1.0) / t,
        -2.0 * tm / (3.0 * t),
        2.0 * tm * (2.0 * t2 + 7.0) / (45.0 * t),
        -4.0 * tm * (2.0 * t2 - 4.0 * t + 5.0) * (2.0 * t2 + 4.0 * t + 5.0) / (945.0 * t),
    ];
    let b = [
        1.0 / (2.0 * t),
        -(t2 + 2.0) / (6.0 * t),
        (7.0 * t2 * t2 + 10.0 * t2 + 28.0) / (180.0 * t),
        -(31.0 * t2 * t2 * t2 + 84.0 * t2 + 200.0) / (3780.0 * t),
    ];
    (a, b)
}

fn taylor_pair(t: u32, lam: f64) -> (f64, f64) {
    let (a, b) = taylor_coefficients(t);
    let horner = |c: &[f64; 4]| ((c[3] * lam + c[2]) * lam + c[1]) * lam + c[0];
    (horner(&a), horner(&b))
}

fn domain(what: &'static str, value: f64, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        value,
        detail: detail.into(),
    }
}

/// `(Q⁰_T(λ), Q¹_T(λ))` for finite `T`, valid for `λ > λ₀(T)`.
///
/// Evaluated through `cosh μ = e^λ` for `λ > 0` and `cos θ = e^λ` for
/// `λ < 0`, which avoids the cancellation of the binomial-power form.
pub fn transform_pair(t: u32, lam: f64) -> Result<(f64, f64)> {
    check_spacing(t)?;
    if lam.is_nan() {
        return Err(domain("Q_T", lam, "NaN"));
    }
    let l0 = lambda0(t)?;
    if lam <= l0 {
        return Err(domain("Q_T", lam, format!("must exceed lambda0 = {l0}")));
    }
    if t == 2 {
        // q⁰(2) = 1/2, q¹(2) = 1/4
        let e = (-2.0 * lam).exp();
        return Ok((0.5 * e, 0.25 * e));
    }
    if lam.abs() < taylor_cutoff(t) {
        return Ok(taylor_pair(t, lam));
    }
    let tf = t as f64;
    if lam > 0.0 {
        let s = (-(-2.0 * lam).exp_m1()).sqrt();
        let mu = lam + s.ln_1p();
        let x = mu * tf;
        let one_minus_e2 = -(-2.0 * x).exp_m1();
        // 1 - s·coth(x) = (1 - s) - s·(coth x - 1)
        let q0 = (-2.0 * lam).exp() / (1.0 + s) - s * 2.0 * (-2.0 * x).exp() / one_minus_e2;
        let q1 = s * (-x).exp() / one_minus_e2;
        Ok((q0.max(0.0), q1))
    } else {
        let tan_th = (-2.0 * lam).exp_m1().sqrt();
        let arg = tan_th.atan() * tf;
        if arg >= PI {
            return Err(domain("Q_T", lam, "at or below the pole"));
        }
        let q0 = 1.0 - tan_th / arg.tan();
        let q1 = tan_th / (2.0 * arg.sin());
        Ok((q0, q1))
    }
}

/// `Q⁰(λ)`; for `T = ∞` this is the full transform `1 - √(1 - e^{-2λ})`.
pub fn q0_closed(g: Geometry, lam: f64) -> Result<f64> {
    match g {
        Geometry::Finite(t) => Ok(transform_pair(t, lam)?.0),
        Geometry::Infinite => q_infinite(lam),
    }
}

/// `Q¹(λ)`; identically zero for `T = ∞`.
pub fn q1_closed(g: Geometry, lam: f64) -> Result<f64> {
    match g {
        Geometry::Finite(t) => Ok(transform_pair(t, lam)?.1),
        Geometry::Infinite => q_infinite(lam).map(|_| 0.0),
    }
}

/// `Q(λ) = E(e^{-λτ})`.
pub fn q_closed(g: Geometry, lam: f64) -> Result<f64> {
    match g {
        Geometry::Finite(t) => {
            let (a, b) = transform_pair(t, lam)?;
            Ok(a + 2.0 * b)
        }
        Geometry::Infinite => q_infinite(lam),
    }
}

fn q_infinite(lam: f64) -> Result<f64> {
    if !(lam >= 0.0) {
        return Err(domain("Q_inf", lam, "requires lambda >= 0"));
    }
    let s2 = -(-2.0 * lam).exp_m1();
    // 1 - √(s2) = e^{-2λ} / (1 + √(s2))
    Ok((-2.0 * lam).exp() / (1.0 + s2.sqrt()))
}

/// `dQ/dλ`, always negative on the domain.
pub fn q_closed_derivative(g: Geometry, lam: f64) -> Result<f64> {
    match g {
        Geometry::Infinite => {
            q_infinite(lam)?;
            let s = (-(-2.0 * lam).exp_m1()).sqrt();
            Ok(-(-2.0 * lam).exp() / s)
        }
        Geometry::Finite(t) => {
            transform_pair(t, lam)?;
            let tf = t as f64;
            if lam.abs() < taylor_cutoff(t) {
                let (a, b) = taylor_coefficients(t);
                let c: Vec<f64> = (0..4).map(|i| a[i] + 2.0 * b[i]).collect();
                return Ok((3.0 * c[3] * lam + 2.0 * c[2]) * lam + c[1]);
            }
            if lam > 0.0 {
                let s = (-(-2.0 * lam).exp_m1()).sqrt();
                let mu = lam + s.ln_1p();
                let h = (0.5 * mu * tf).tanh();
                let e = (-mu * tf).exp();
                let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
                Ok(-((-2.0 * lam).exp() * h / s + 0.5 * tf * sech2))
            } else {
                let a = (-2.0 * lam).exp_m1().sqrt();
                let b = (a.atan() * 0.5 * tf).tan();
                Ok(-((1.0 + a * a) * b / a + 0.5 * tf * (1.0 + b * b)))
            }
        }
    }
}

/// Envelope `q(n) <= scale · ratio^n` valid for every `n` past the first step.
///
/// For finite `T >= 4` this is `q(n) <= 2cos^{n-2}(π/T)`; for `T = 2` the
/// kernel vanishes past `n = 2`; for `T = ∞` the trivial bound `q(n) <= 1`.
pub(crate) fn kernel_envelope(g: Geometry) -> (f64, f64) {
    match g {
        Geometry::Finite(2) => (0.0, 0.0),
        Geometry::Finite(t) => {
            let c = (PI / t as f64).cos();
            (2.0 / (c * c), c)
        }
        Geometry::Infinite => (1.0, 1.0),
    }
}

/// Envelope for the survival `P(τ > m) <= scale · ratio^m`.
pub(crate) fn survival_envelope(g: Geometry) -> (f64, f64) {
    match g {
        Geometry::Finite(2) => (0.0, 0.0),
        Geometry::Finite(_) => {
            let (b, c) = kernel_envelope(g);
            (b * c / (1.0 - c), c)
        }
        Geometry::Infinite => (1.0, 1.0),
    }
}

/// `∑_{n > h} n^k r^n` for `k ∈ {0, 1, 2}` and `0 <= r < 1`.
pub(crate) fn geometric_moment_tail(r: f64, h: usize, k: u32) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let a = (h + 1) as f64;
    let om = 1.0 - r;
    let s0 = 1.0 / om;
    let s1 = r / (om * om);
    let s2 = r * (1.0 + r) / (om * om * om);
    let lead = r.powf(a);
    lead * match k {
        0 => s0,
        1 => a * s0 + s1,
        _ => a * a * s0 + 2.0 * a * s1 + s2,
    }
}

/// Smallest horizon `h <= cap` with `scale · ∑_{n>h} n^k r^n <= tol`.
pub(crate) fn horizon_for(scale: f64, r: f64, k: u32, tol: f64, cap: usize) -> Option<usize> {
    if scale == 0.0 || r <= 0.0 {
        return Some(0);
    }
    let tail = |h: usize| scale * geometric_moment_tail(r, h, k);
    if !(tail(cap) <= tol) {
        return None;
    }
    let (mut lo, mut hi) = (0usize, cap);
    if tail(lo) <= tol {
        return Some(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// One row of the absorbing band recursion.
pub(crate) struct BandStep<'a> {
    /// Step index `n >= 1`.
    pub n: usize,
    /// Tilted mass absorbed at the starting interface at step `n` (both sides).
    pub back: f64,
    /// Tilted mass absorbed at the interface above at step `n`.
    pub up: f64,
    /// Tilted mass still strictly between interfaces, positive side only,
    /// indexed by offset `1..T-1` (entry 0 unused).
    pub band: &'a [f64],
    /// Total tilted surviving mass, both sides.
    pub survival: f64,
}

/// Run the walk killed on the interface set for `steps` steps, each step
/// multiplied by `tilt`. Only the upward half is tracked; the downward half
/// is its mirror image.
pub(crate) fn band_walk(t: u32, tilt: f64, steps: usize, mut visit: impl FnMut(BandStep<'_>) -> bool) {
    let t = t as usize;
    let mut cur = vec![0.0; t + 1];
    let mut next = vec![0.0; t + 1];
    if steps == 0 {
        return;
    }
    cur[1] = 0.5 * tilt;
    let first = BandStep {
        n: 1,
        back: 0.0,
        up: 0.0,
        band: &cur[..t],
        survival: tilt,
    };
    if !visit(first) {
        return;
    }
    let half = 0.5 * tilt;
    for n in 2..=steps {
        let back = half * cur[1];
        let up = half * cur[t - 1];
        let mut surv = 0.0;
        for y in 1..t {
            let v = half * (cur[y - 1] + cur[y + 1]);
            next[y] = v;
            surv += v;
        }
        next[0] = 0.0;
        next[t] = 0.0;
        std::mem::swap(&mut cur, &mut next);
        let keep = visit(BandStep {
            n,
            back: 2.0 * back,
            up,
            band: &cur[..t],
            survival: 2.0 * surv,
        });
        if !keep {
            return;
        }
    }
}

/// Tilted kernel rows `e^{-λn}q⁰(n)`, `e^{-λn}q¹(n)` and tilted survival
/// `e^{-λm}P(τ > m)` for `n, m <= h`.
pub(crate) struct TiltedKernel {
    pub k0: Vec<f64>,
    pub k1: Vec<f64>,
    pub survival: Vec<f64>,
}

pub(crate) fn tilted_kernel(g: Geometry, lam: f64, h: usize) -> TiltedKernel {
    let tilt = (-lam).exp();
    let mut k0 = vec![0.0; h + 1];
    let mut k1 = vec![0.0; h + 1];
    let mut survival = vec![0.0; h + 1];
    survival[0] = 1.0;
    match g {
        Geometry::Finite(t) => {
            band_walk(t, tilt, h, |row| {
                k0[row.n] = row.back;
                k1[row.n] = row.up;
                survival[row.n] = row.survival;
                true
            });
        }
        Geometry::Infinite => {
            // f_{2k} = C(2k,k) / ((2k-1) 4^k), P(τ > 2k) = C(2k,k) / 4^k
            let mut f = 0.5 * tilt * tilt;
            let mut surv_even = 1.0;
            let t2 = tilt * tilt;
            for n in 1..=h {
                if n % 2 == 1 {
                    survival[n] = surv_even * tilt;
                } else {
                    let k = (n / 2) as f64;
                    if n > 2 {
                        f *= (2.0 * k - 3.0) / (2.0 * k) * t2;
                    }
                    k0[n] = f;
                    surv_even *= (2.0 * k - 1.0) / (2.0 * k) * t2;
                    survival[n] = surv_even;
                }
            }
        }
    }
    TiltedKernel { k0, k1, survival }
}

/// Exact first-passage tables `q⁰(n)`, `q¹(n)` for `n <= n_max`, computed by
/// the absorbing band recursion, with the exact survival `P(τ > n_max)` as
/// certified tail bound.
#[derive(Clone, Debug)]
pub struct KernelTable {
    geometry: Geometry,
    q0: Vec<f64>,
    q1: Vec<f64>,
    survival: Vec<f64>,
    tail_mass_bound: f64,
}

impl KernelTable {
    /// Table whose tail mass is at most `1e-12`, or the achieved bound at the
    /// horizon cap.
    pub fn build(g: Geometry) -> Result<Self> {
        Self::build_to_tail(g, DEFAULT_TAIL_TARGET, MAX_HORIZON)
    }

    /// Grow the table until `P(τ > n_max) <= tail_target` or `n_max = cap`.
    pub fn build_to_tail(g: Geometry, tail_target: f64, cap: usize) -> Result<Self> {
        let g = g.validate()?;
        let cap = cap.min(MAX_HORIZON);
        match g {
            Geometry::Finite(t) => {
                let mut q0 = vec![0.0];
                let mut q1 = vec![0.0];
                let mut survival = vec![1.0];
                band_walk(t, 1.0, cap, |row| {
                    q0.push(row.back);
                    q1.push(row.up);
                    survival.push(row.survival);
                    row.survival > tail_target
                });
                Ok(Self::finish(g, q0, q1, survival))
            }
            Geometry::Infinite => {
                // P(τ > 2k) ~ 1/√(πk): solve for the horizon directly
                let need = (1.0 / (PI * tail_target * tail_target)).ceil();
                let h = if need.is_finite() && need < cap as f64 / 2.0 {
                    2 * need as usize + 2
                } else {
                    cap
                };
                Self::with_horizon(g, h)
            }
        }
    }

    pub fn with_horizon(g: Geometry, n_max: usize) -> Result<Self> {
        let g = g.validate()?;
        if n_max > MAX_HORIZON {
            return Err(Error::TooLarge {
                what: "kernel horizon",
                limit: MAX_HORIZON as u64,
                got: n_max as u64,
            });
        }
        let tk = tilted_kernel(g, 0.0, n_max);
        Ok(Self::finish(g, tk.k0, tk.k1, tk.survival))
    }

    fn finish(geometry: Geometry, q0: Vec<f64>, q1: Vec<f64>, survival: Vec<f64>) -> Self {
        let last = *survival.last().unwrap_or(&1.0);
        // relative rounding of a positive sum of n_max terms is far below 1e-9
        let tail_mass_bound = last * (1.0 + 1e-9);
        KernelTable {
            geometry,
            q0,
            q1,
            survival,
            tail_mass_bound,
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn horizon(&self) -> usize {
        self.q0.len() - 1
    }

    pub fn q0(&self, n: usize) -> f64 {
        self.q0.get(n).copied().unwrap_or(0.0)
    }

    pub fn q1(&self, n: usize) -> f64 {
        self.q1.get(n).copied().unwrap_or(0.0)
    }

    pub fn q(&self, n: usize) -> f64 {
        self.q0(n) + 2.0 * self.q1(n)
    }

    /// `P(τ > n)` for `n <= n_max`.
    pub fn survival(&self, n: usize) -> f64 {
        self.survival[n.min(self.horizon())]
    }

    /// Upper bound on `∑_{n > n_max} q(n)`.
    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    /// `∑_{n <= n_max} (q⁰(n) + 2q¹(n))`.
    pub fn head_mass(&self) -> f64 {
        (1..=self.horizon()).map(|n| self.q(n)).sum()
    }

    /// Truncated transform `∑_{n <= n_max} q^j(n) e^{-λn}` for `j ∈ {0, 1}`.
    pub fn series_transform(&self, j: u8, lam: f64) -> f64 {
        let row = if j == 0 { &self.q0 } else { &self.q1 };
        row.iter()
            .enumerate()
            .skip(1)
            .map(|(n, &q)| if q > 0.0 { q * (-lam * n as f64).exp() } else { 0.0 })
            .sum()
    }
}
