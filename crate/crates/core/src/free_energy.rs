//! Free energy `φ(δ, T)` as the root of `Q_T(φ) = e^{-δ}`, and the constants
//! of the large-`N` scaling theory derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    horizon_for, kernel_envelope, lambda0, q1_closed, q_closed, q_closed_derivative,
    tilted_kernel, Geometry, MAX_HORIZON,
};

/// Pinning strength, interface geometry and polymer length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub delta: f64,
    pub geometry: Geometry,
    pub length: u64,
}

impl ModelParams {
    pub fn new(delta: f64, geometry: Geometry, length: u64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("delta must be finite, got {delta}")));
        }
        Ok(ModelParams {
            delta,
            geometry: geometry.validate()?,
            length,
        })
    }
}

/// `φ(δ, ∞) = (δ/2 - log √(2 - e^{-δ}))·1{δ >= 0}`.
pub fn phi_inf(delta: f64) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    // 2 - e^{-δ} = 1 + (1 - e^{-δ})
    0.5 * delta - 0.5 * (-(-delta).exp_m1()).ln_1p()
}

/// `φ'(δ, ∞) = (1 - e^{-δ}) / (2 - e^{-δ})` for `δ > 0`, zero otherwise.
pub fn phi_inf_prime(delta: f64) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    let a = -(-delta).exp_m1();
    a / (1.0 + a)
}

/// `c_δ = δ/2 + log √(2 - e^{-δ})`, defined for `δ > 0`.
pub fn c_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain {
            what: "c_delta",
            value: delta,
            detail: "requires delta > 0".into(),
        });
    }
    Ok(0.5 * delta + 0.5 * (-(-delta).exp_m1()).ln_1p())
}

/// Free energy `φ(δ, T)`.
///
/// Finite `T`: the unique root of `Q_T(λ) = e^{-δ}` on `(λ₀(T), ∞)`, bracketed
/// and bisected, then polished by Newton steps. `T = ∞`: the closed form.
pub fn phi(delta: f64, g: Geometry) -> Result<f64> {
    if !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be finite, got {delta}")));
    }
    match g.validate()? {
        Geometry::Infinite => Ok(phi_inf(delta)),
        Geometry::Finite(_) if delta == 0.0 => Ok(0.0),
        g @ Geometry::Finite(t) => invert_transform(g, lambda0(t)?, (-delta).exp()),
    }
}

/// Solve `Q(λ) = target` for decreasing `Q` on `(pole, ∞)`.
fn invert_transform(g: Geometry, pole: f64, target: f64) -> Result<f64> {
    let q = |l: f64| q_closed(g, l);

    let mut hi = 1.0;
    while q(hi)? >= target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Domain {
                what: "phi",
                value: target,
                detail: "no upper bracket".into(),
            });
        }
    }
    let mut lo = if pole.is_finite() { (pole + 1e-9).max(-50.0) } else { -50.0 };
    if lo >= hi {
        lo = hi - 1.0;
    }
    // walk toward the pole until the bracket holds
    let mut gap = lo - pole;
    while q(lo)? <= target {
        if !pole.is_finite() || gap < 1e-15 * pole.abs().max(1e-300) {
            return Err(Error::Domain {
                what: "phi",
                value: target,
                detail: "no lower bracket".into(),
            });
        }
        gap *= 0.01;
        lo = pole + gap;
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-12 * mid.abs().max(1e-3) {
            break;
        }
        if q(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let f = q(x)? - target;
        let d = q_closed_derivative(g, x)?;
        let next = x - f / d;
        if !(next > lo && next < hi) || next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// `|Q_T(φ(δ,T)) - e^{-δ}|`; for `T = ∞` and `δ < 0` the target is `1`.
pub fn root_residual(delta: f64, g: Geometry) -> Result<f64> {
    let p = phi(delta, g)?;
    let target = match g {
        Geometry::Infinite => (-delta).exp().min(1.0),
        Geometry::Finite(_) => (-delta).exp(),
    };
    Ok((q_closed(g, p)? - target).abs())
}

/// Tilted step law moments `(mass, mean, second moment)` of
/// `K(n) = e^δ q_T(n) e^{-φn}`, summed to a horizon where the neglected
/// tail of `n²K(n)` is below `1e-13`.
pub fn step_moments(delta: f64, g: Geometry) -> Result<[f64; 3]> {
    let p = phi(delta, g)?;
    let (scale, r0) = kernel_envelope(g);
    let r = r0 * (-p).exp();
    let tol = 1e-13;
    let h = horizon_for(scale * delta.exp(), r, 2, tol, MAX_HORIZON)
        .ok_or(Error::HorizonOverflow {
            cap: MAX_HORIZON,
            tolerance: tol,
        })?
        .max(2);
    let tk = tilted_kernel(g, p, h);
    let ed = delta.exp();
    let mut m = [0.0; 3];
    for n in 1..=h {
        let k = ed * (tk.k0[n] + 2.0 * tk.k1[n]);
        let nf = n as f64;
        m[0] += k;
        m[1] += nf * k;
        m[2] += nf * nf * k;
    }
    Ok(m)
}

/// Mean renewal step `m(δ, T) = e^δ ∑ n q_T(n) e^{-φn} = 1/φ'(δ, T)`.
pub fn step_mean(delta: f64, g: Geometry) -> Result<f64> {
    Ok(step_moments(delta, g)?[1])
}

/// Contact density `s_T = 1/m(δ, T) = φ'(δ, T)`.
pub fn contact_density(delta: f64, g: Geometry) -> Result<f64> {
    Ok(1.0 / step_mean(delta, g)?)
}

/// Constants of the `T_N → ∞` scaling theory for `δ > 0` and offset `ζ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub delta: f64,
    pub zeta: f64,
    /// `φ(δ, ∞)`
    pub phi_inf: f64,
    pub c_delta: f64,
    /// `C_δ = √(2e^δ φ'(δ,∞) √(1 - e^{-2φ(δ,∞)}))`
    pub big_c_delta: f64,
    /// `φ'(δ, ∞) = s_∞`
    pub s_inf: f64,
    /// Poisson parameter of the number of interface changes.
    pub t_zeta: f64,
    /// Exponential rate of the first interface change.
    pub v_zeta: f64,
}

impl ScalingConstants {
    /// `C_δ = (1 - e^{-δ}) √(2e^δ / (2 - e^{-δ}))`.
    pub fn big_c_delta_closed(&self) -> f64 {
        let a = -(-self.delta).exp_m1();
        a * (2.0 * self.delta.exp() / (1.0 + a)).sqrt()
    }

    /// `t = 2e^δ (1 - e^{-δ})² / (2 - e^{-δ}) · e^{-c_δ ζ}`.
    pub fn t_zeta_closed(&self) -> f64 {
        let a = -(-self.delta).exp_m1();
        2.0 * self.delta.exp() * a * a / (1.0 + a) * (-self.c_delta * self.zeta).exp()
    }

    /// `√(1 - e^{-2φ(δ,∞)})`, which equals `1 - e^{-δ}`.
    pub fn root_factor(&self) -> f64 {
        (-(-2.0 * self.phi_inf).exp_m1()).sqrt()
    }
}

pub fn scaling_constants(delta: f64, zeta: f64) -> Result<ScalingConstants> {
    let c = c_delta(delta)?;
    let phi = phi_inf(delta);
    let s_inf = phi_inf_prime(delta);
    let root = (-(-2.0 * phi).exp_m1()).sqrt();
    let ed = delta.exp();
    let v_zeta = 2.0 * ed * root * (-c * zeta).exp();
    Ok(ScalingConstants {
        delta,
        zeta,
        phi_inf: phi,
        c_delta: c,
        big_c_delta: (2.0 * ed * s_inf * root).sqrt(),
        s_inf,
        t_zeta: v_zeta * s_inf,
        v_zeta,
    })
}

/// Which scaling regime an offset `Δ_N` belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `Δ_N → -∞`: diffusive on the interface lattice.
    Gaussian,
    /// `Δ_N = O(1)`: finitely many interfaces visited.
    Critical,
    /// `Δ_N → +∞`: only the starting interface matters.
    SingleInterface,
}

/// `Δ_N = T_N - log N / c_δ`, classified against the caller's band:
/// `Δ_N < -band` is Gaussian, `Δ_N > band` single-interface.
pub fn regime_offset(n: f64, t_n: f64, delta: f64, band: f64) -> Result<(f64, Regime)> {
    if !(n >= 1.0) {
        return Err(Error::InvalidArgument(format!("N must be >= 1, got {n}")));
    }
    let offset = t_n - n.ln() / c_delta(delta)?;
    let regime = if offset < -band {
        Regime::Gaussian
    } else if offset > band {
        Regime::SingleInterface
    } else {
        Regime::Critical
    };
    Ok((offset, regime))
}

/// `log N / c_δ + ζ`, the spacing whose offset is `ζ`.
pub fn critical_spacing(delta: f64, n: f64, zeta: f64) -> Result<f64> {
    Ok(n.ln() / c_delta(delta)? + zeta)
}

/// `Q¹_T(φ(δ,T)) / ((1 - e^{-δ}) e^{-c_δ T})`, which tends to one as `T` grows.
pub fn q1_asymptotic_ratio(delta: f64, t: u32) -> Result<f64> {
    let c = c_delta(delta)?;
    let g = Geometry::Finite(t);
    let q1 = q1_closed(g, phi(delta, g)?)?;
    let a = -(-delta).exp_m1();
    Ok(q1 / (a * (-c * t as f64).exp()))
}

/// Everything the free-energy table reports for one `(δ, T)` point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub delta: f64,
    pub geometry: Geometry,
    pub phi: f64,
    pub residual: f64,
    /// `m(δ, T)`; `None` when the step law is not normalizable (`T = ∞`, `δ <= 0`).
    pub step_mean: Option<f64>,
    /// `s_T = 1/m`
    pub s_t: Option<f64>,
    /// Present for `δ > 0`.
    pub scaling: Option<ScalingConstants>,
    /// `Δ_N` when a finite spacing and a length are known.
    pub delta_n: Option<f64>,
}

pub fn derived_constants(params: &ModelParams, zeta: f64) -> Result<DerivedConstants> {
    let delta = params.delta;
    let g = params.geometry;
    let phi = phi(delta, g)?;
    let residual = root_residual(delta, g)?;
    let step_mean = match step_mean(delta, g) {
        Ok(m) => Some(m),
        Err(Error::HorizonOverflow { .. }) => None,
        Err(e) => return Err(e),
    };
    let scaling = if delta > 0.0 {
        Some(scaling_constants(delta, zeta)?)
    } else {
        None
    };
    let delta_n = match (g, scaling) {
        (Geometry::Finite(t), Some(_)) if params.length >= 1 => {
            Some(regime_offset(params.length as f64, t as f64, delta, 0.0)?.0)
        }
        _ => None,
    };
    Ok(DerivedConstants {
        delta,
        geometry: g,
        phi,
        residual,
        step_mean,
        s_t: step_mean.map(|m| 1.0 / m),
        scaling,
        delta_n,
    })
}
