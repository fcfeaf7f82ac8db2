//! Deterministic oracle suite: kernels, transforms, the constrained
//! partition identity, brute-force partition functions, the two-sided bound
//! on the free partition function, and root residuals. No Monte Carlo.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{sandwich_check, z_bruteforce, z_constrained_dp, z_free_dp, MAX_BRUTE_FORCE};
use crate::free_energy::{c_delta, phi, phi_inf, scaling_constants};
use crate::kernels::{q0_closed, q0_series, q1_closed, q1_series, q_closed, Geometry, KernelTable};
use crate::renewal::{renewal_mass, TiltedStepLaw, DEFAULT_STEP_TOLERANCE};

pub const KERNEL_SPACINGS: [u32; 7] = [2, 4, 6, 8, 16, 32, 64];
pub const KERNEL_LAMBDAS: [f64; 4] = [0.0, 0.05, 0.25, 1.0];
pub const IDENTITY_DELTAS: [f64; 4] = [-1.0, 0.5, 1.0, 2.0];
pub const IDENTITY_SPACINGS: [u32; 4] = [2, 4, 8, 16];
pub const RESIDUAL_DELTAS: [f64; 7] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
pub const ENUMERATION_SPACINGS: [u32; 4] = [2, 4, 6, 8];
pub const ENUMERATION_LENGTH: u64 = 16;
pub const BRUTE_FORCE_SPACINGS: [u32; 3] = [2, 4, 8];
pub const SANDWICH_MAX_N: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    /// Largest polymer length in the identity, sandwich and brute-force grids.
    pub max_n: u64,
    /// Include `2^N` enumeration of partition functions.
    pub brute_force: bool,
    /// Shift applied to every computed `φ`; zero except in sensitivity tests.
    pub phi_perturbation: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            max_n: 400,
            brute_force: false,
            phi_perturbation: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub group: String,
    pub case: String,
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Reported rows do not affect the outcome.
    pub gating: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub wall_clock_s: f64,
}

impl ValidationReport {
    fn push(&mut self, group: &str, case: String, gap: f64, tolerance: f64, gating: bool) {
        self.checks.push(CheckResult {
            group: group.into(),
            case,
            gap,
            tolerance,
            pass: gap <= tolerance,
            gating,
        });
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.gating && !c.pass)
    }

    pub fn group(&self, name: &str) -> impl Iterator<Item = &CheckResult> {
        let name = name.to_string();
        self.checks.iter().filter(move |c| c.group == name)
    }

    /// Per group: number of checks, failures, and the largest gap/tolerance ratio.
    pub fn summary(&self) -> Vec<(String, usize, usize, f64)> {
        let mut out: Vec<(String, usize, usize, f64)> = Vec::new();
        for c in &self.checks {
            let ratio = if c.tolerance > 0.0 { c.gap / c.tolerance } else { c.gap };
            match out.iter_mut().find(|e| e.0 == c.group) {
                Some(e) => {
                    e.1 += 1;
                    e.2 += (c.gating && !c.pass) as usize;
                    e.3 = e.3.max(ratio);
                }
                None => out.push((c.group.clone(), 1, (c.gating && !c.pass) as usize, ratio)),
            }
        }
        out
    }
}

/// The trigonometric sums over `ν < T/2` only, as `(q⁰, q¹)`.
fn halved_sums(t: u32, n: u64) -> (f64, f64) {
    let tf = t as f64;
    let (mut s0, mut s1) = (0.0, 0.0);
    for nu in 1..=(t - 1) / 2 {
        let a = PI * nu as f64 / tf;
        let term = a.cos().powi(n as i32 - 2) * a.sin().powi(2);
        s0 += term;
        s1 += if nu % 2 == 1 { term } else { -term };
    }
    let q0 = if n % 2 == 0 { 2.0 / tf * s0 } else { 0.0 };
    let q1 = if (n + t as u64) % 2 == 0 { s1 / tf } else { 0.0 };
    (q0, q1)
}

/// The `ν = T/2` term missing from the halved sums; nonzero only at `n = 2`.
fn halved_correction(t: u32, n: u64) -> (f64, f64) {
    if n != 2 {
        return (0.0, 0.0);
    }
    let tf = t as f64;
    let sign = if (t / 2) % 2 == 1 { 1.0 } else { -1.0 };
    (1.0 / tf, sign / (2.0 * tf))
}

/// First-passage masses `(q⁰(n), q¹(n), q^{-1}(n))` for `n <= len` by
/// enumerating all `2^len` paths.
fn enumerate_first_passage(t: u32, len: u64) -> Vec<[f64; 3]> {
    let t = t as i64;
    let mut counts = vec![[0u64; 3]; len as usize + 1];
    for mask in 0u64..(1u64 << len) {
        let mut s = 0i64;
        for i in 0..len {
            s += if mask >> i & 1 == 1 { 1 } else { -1 };
            if s.rem_euclid(t) == 0 {
                let slot = match s / t {
                    0 => 0,
                    1 => 1,
                    _ => 2,
                };
                counts[i as usize + 1][slot] += 1;
                break;
            }
        }
    }
    let scale = (len as f64).exp2();
    counts
        .into_iter()
        .map(|c| [c[0] as f64 / scale, c[1] as f64 / scale, c[2] as f64 / scale])
        .collect()
}

fn kernel_checks(rep: &mut ValidationReport) -> Result<()> {
    for &t in &KERNEL_SPACINGS {
        let g = Geometry::Finite(t);
        let table = KernelTable::build(g)?;
        let tail = table.tail_mass_bound();
        let h = table.horizon() as f64;
        for &lam in &KERNEL_LAMBDAS {
            let tol = tail * (-lam * h).exp() + 1e-10;
            let gap0 = (table.series_transform(0, lam) - q0_closed(g, lam)?).abs();
            let gap1 = (table.series_transform(1, lam) - q1_closed(g, lam)?).abs();
            rep.push("kernel_transform", format!("T={t} lambda={lam} j=0"), gap0, tol, true);
            rep.push("kernel_transform", format!("T={t} lambda={lam} j=1"), gap1, tol, true);
        }
        let (s0, s1) = (1..=table.horizon()).fold((0.0, 0.0), |a, n| (a.0 + table.q0(n), a.1 + table.q1(n)));
        let tf = t as f64;
        rep.push("mass_identity", format!("T={t} j=0"), (s0 - (1.0 - 1.0 / tf)).abs(), 1e-8 + tail, true);
        rep.push("mass_identity", format!("T={t} j=1"), (s1 - 0.5 / tf).abs(), 1e-8 + tail, true);
        for n in 1..=64u64.min(table.horizon() as u64) {
            let gap = (q0_series(t, n)? - table.q0(n as usize))
                .abs()
                .max((q1_series(t, n)? - table.q1(n as usize)).abs());
            rep.push("kernel_series_table", format!("T={t} n={n}"), gap, 1e-12, true);
        }
    }
    for &t in &ENUMERATION_SPACINGS {
        let exact = enumerate_first_passage(t, ENUMERATION_LENGTH);
        for n in 1..=ENUMERATION_LENGTH {
            let e = exact[n as usize];
            let gap = (q0_series(t, n)? - e[0])
                .abs()
                .max((q1_series(t, n)? - e[1]).abs())
                .max((e[1] - e[2]).abs());
            rep.push("kernel_enumeration", format!("T={t} n={n}"), gap, 1e-12, true);
            let (h0, h1) = halved_sums(t, n);
            let (c0, c1) = halved_correction(t, n);
            let gap = (h0 + c0 - e[0]).abs().max((h1 + c1 - e[1]).abs());
            rep.push("halved_sum_corrected", format!("T={t} n={n}"), gap, 1e-12, true);
            if n == 2 {
                let raw = (h0 - e[0]).abs().max((h1 - e[1]).abs());
                rep.push("halved_sum_raw", format!("T={t} n=2"), raw, 1e-12, false);
            }
        }
    }
    Ok(())
}

fn identity_checks(rep: &mut ValidationReport, opts: &ValidationOptions) -> Result<()> {
    let n_max = opts.max_n - opts.max_n % 2;
    for &d in &IDENTITY_DELTAS {
        for &t in &IDENTITY_SPACINGS {
            let g = Geometry::Finite(t);
            let law = TiltedStepLaw::build(d, g, DEFAULT_STEP_TOLERANCE)?;
            let u = renewal_mass(&law, n_max as usize);
            let p = law.phi() + opts.phi_perturbation;
            for n in (2..=n_max).step_by(2) {
                let lhs = z_constrained_dp(n, d, g)?;
                let rhs = p * n as f64 + u.get(n as usize).ln();
                rep.push(
                    "renewal_identity",
                    format!("delta={d} T={t} N={n}"),
                    (lhs - rhs).abs(),
                    1e-8,
                    true,
                );
            }
        }
    }
    Ok(())
}

fn brute_force_checks(rep: &mut ValidationReport, opts: &ValidationOptions) -> Result<()> {
    let n_max = opts.max_n.min(ENUMERATION_LENGTH).min(MAX_BRUTE_FORCE);
    for &d in &[-1.0, 1.0] {
        for &t in &BRUTE_FORCE_SPACINGS {
            let g = Geometry::Finite(t);
            for n in 1..=n_max {
                let bf = z_bruteforce(n, d, g)?;
                let gap = (z_free_dp(n, d, g)? - bf.log_free).abs();
                rep.push("brute_force_free", format!("delta={d} T={t} N={n}"), gap, 1e-12, true);
                if n % 2 == 0 {
                    let gap = (z_constrained_dp(n, d, g)? - bf.log_constrained).abs();
                    rep.push("brute_force_constrained", format!("delta={d} T={t} N={n}"), gap, 1e-12, true);
                }
            }
        }
    }
    Ok(())
}

fn sandwich_checks(rep: &mut ValidationReport, opts: &ValidationOptions) -> Result<()> {
    for &d in &[-1.0, 1.0] {
        for &t in &BRUTE_FORCE_SPACINGS {
            let g = Geometry::Finite(t);
            for n in 1..=opts.max_n.min(SANDWICH_MAX_N) {
                let s = sandwich_check(n, d, g)?;
                let case = format!("delta={d} T={t} N={n}");
                rep.push("sandwich_lower", case.clone(), (-s.lower_slack).max(0.0), 1e-12, true);
                rep.push(
                    "sandwich_upper_corrected",
                    case.clone(),
                    (-(s.upper_slack + 0.5 * d.abs())).max(0.0),
                    1e-12,
                    true,
                );
                rep.push("sandwich_upper_literal", case, (-s.upper_slack).max(0.0), 1e-12, false);
            }
        }
    }
    Ok(())
}

fn free_energy_checks(rep: &mut ValidationReport, opts: &ValidationOptions) -> Result<()> {
    let h = opts.phi_perturbation;
    for &d in &RESIDUAL_DELTAS {
        for &t in &KERNEL_SPACINGS {
            let g = Geometry::Finite(t);
            let gap = (q_closed(g, phi(d, g)? + h)? - (-d).exp()).abs();
            rep.push("root_residual", format!("delta={d} T={t}"), gap, 1e-12, true);
        }
    }
    for &d in &[0.5, 1.0, 2.0] {
        let p = phi_inf(d) + h;
        let alt = p + (1.0 + (-(-2.0 * p).exp_m1()).sqrt()).ln();
        rep.push("c_delta_forms", format!("delta={d}"), (c_delta(d)? - alt).abs(), 1e-10, true);
        let sc = scaling_constants(d, 0.0)?;
        let gap = (sc.big_c_delta - sc.big_c_delta_closed())
            .abs()
            .max((sc.t_zeta - sc.t_zeta_closed()).abs());
        rep.push("scaling_constant_forms", format!("delta={d}"), gap, 1e-10, true);
    }
    Ok(())
}

pub fn run_validation(opts: &ValidationOptions) -> Result<ValidationReport> {
    let start = Instant::now();
    let mut rep = ValidationReport::default();
    kernel_checks(&mut rep)?;
    free_energy_checks(&mut rep, opts)?;
    identity_checks(&mut rep, opts)?;
    sandwich_checks(&mut rep, opts)?;
    if opts.brute_force {
        brute_force_checks(&mut rep, opts)?;
    }
    rep.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halved_sum_values() {
        assert_eq!(halved_sums(2, 2), (0.0, 0.0));
        let (h0, h1) = halved_sums(4, 2);
        assert!((h0 - 0.25).abs() < 1e-15 && (h1 - 0.125).abs() < 1e-15);
        assert_eq!(halved_correction(4, 2), (0.25, -0.125));
        assert_eq!(halved_correction(2, 2), (0.5, 0.25));
        assert_eq!(halved_correction(8, 6), (0.0, 0.0));
    }

    #[test]
    fn enumeration_small_values() {
        let e = enumerate_first_passage(4, 8);
        assert_eq!(e[2], [0.5, 0.0, 0.0]);
        assert_eq!(e[4], [0.125, 0.0625, 0.0625]);
        assert_eq!(enumerate_first_passage(2, 4)[2], [0.5, 0.25, 0.25]);
    }

    #[test]
    fn small_suite_passes_and_perturbation_fails() {
        let opts = ValidationOptions {
            max_n: 16,
            brute_force: true,
            phi_perturbation: 0.0,
        };
        let rep = run_validation(&opts).unwrap();
        let bad: Vec<_> = rep.failures().collect();
        assert!(bad.is_empty(), "{bad:?}");
        assert!(rep.group("brute_force_free").count() > 0);
        assert!(rep.group("halved_sum_raw").any(|c| !c.pass));
        assert!(rep.group("sandwich_upper_literal").any(|c| !c.pass));

        let perturbed = run_validation(&ValidationOptions {
            phi_perturbation: 1e-3,
            ..opts
        })
        .unwrap();
        assert!(!perturbed.passed());
        assert!(perturbed.failures().any(|c| c.group == "renewal_identity"));
        assert!(perturbed.failures().any(|c| c.group == "root_residual"));
    }
}
