//! Monte Carlo checks of the three scaling regimes and of the supporting
//! renewal statements, with explicit finite-`M` sampling radii.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::contact_fraction;
use crate::free_energy::{c_delta, phi_inf_prime, regime_offset, scaling_constants, Regime};
use crate::kernels::{q1_closed, Geometry};
use crate::path::{FreeSampler, StatsCollector};
use crate::renewal::{TiltedStepLaw, DEFAULT_STEP_TOLERANCE};
use crate::rng::run_replicas;
use crate::stats::{
    empirical_pmf, expected_tv_radius, ks_radius, ks_statistic, mean_var, normal_cdf,
    poisson_pmf, quantile, reference_sgamma_law, tv_distance, Pmf,
};

/// How the spacing `T_N` follows `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingRule {
    /// One spacing per grid entry, or a single spacing for all.
    Explicit(Vec<u32>),
    /// Nearest even integer to `½ log N / c_δ`.
    HalfCritical,
    /// Nearest even integer to `log N / c_δ + ζ`.
    Critical { zeta: f64 },
    /// Nearest even integer to `2 log N / c_δ`.
    DoubleCritical,
}

/// `max(2, 2·round(x/2))`.
pub fn nearest_even(x: f64) -> u32 {
    ((2.0 * (x / 2.0).round()).max(2.0)) as u32
}

impl SpacingRule {
    /// Parse `half-critical`, `critical`, `double-critical`, or a
    /// comma-separated list of even spacings.
    pub fn parse(s: &str, zeta: f64) -> Result<Self> {
        match s.trim() {
            "half-critical" => Ok(SpacingRule::HalfCritical),
            "critical" => Ok(SpacingRule::Critical { zeta }),
            "double-critical" => Ok(SpacingRule::DoubleCritical),
            list => {
                let ts = list
                    .split(',')
                    .map(|v| {
                        let t: i64 = v
                            .trim()
                            .parse()
                            .map_err(|_| Error::InvalidArgument(format!("bad spacing `{v}`")))?;
                        Ok(Geometry::finite(t)?.spacing().expect("finite"))
                    })
                    .collect::<Result<Vec<u32>>>()?;
                Ok(SpacingRule::Explicit(ts))
            }
        }
    }

    pub fn spacing(&self, delta: f64, n: u64, index: usize) -> Result<u32> {
        let base = (n as f64).ln() / c_delta(delta)?;
        Ok(match self {
            SpacingRule::Explicit(ts) => {
                if ts.is_empty() {
                    return Err(Error::EmptyInput("spacing list"));
                }
                ts[index.min(ts.len() - 1)]
            }
            SpacingRule::HalfCritical => nearest_even(0.5 * base),
            SpacingRule::Critical { zeta } => nearest_even(base + zeta),
            SpacingRule::DoubleCritical => nearest_even(2.0 * base),
        })
    }
}

/// Finite-sample thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub ks: f64,
    pub tv_poisson: f64,
    pub tv_sgamma: f64,
    pub variance_ratio: f64,
    pub percentile_spread: f64,
    pub density_eps: f64,
    pub density_prob: f64,
    pub contact_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ks: 0.05,
            tv_poisson: 0.05,
            tv_sgamma: 0.07,
            variance_ratio: 0.2,
            percentile_spread: 10.0,
            density_eps: 0.02,
            density_prob: 0.01,
            contact_fraction: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub delta: f64,
    pub rule: SpacingRule,
    pub n_grid: Vec<u64>,
    pub replicas: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl ExperimentConfig {
    pub fn new(delta: f64, rule: SpacingRule, n_grid: Vec<u64>, replicas: usize, seed: u64) -> Self {
        ExperimentConfig {
            delta,
            rule,
            n_grid,
            replicas,
            seed,
            thresholds: Thresholds::default(),
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "experiments need delta > 0, got {}",
                self.delta
            )));
        }
        if self.replicas > 0 && self.replicas < 100 {
            return Err(Error::InvalidArgument(format!(
                "M must be 0 or >= 100, got {}",
                self.replicas
            )));
        }
        if self.n_grid.is_empty() {
            return Err(Error::EmptyInput("N grid"));
        }
        Ok(())
    }
}

/// One statistic at one `(N, T_N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub regime: String,
    pub n: u64,
    pub t_n: u32,
    pub delta: f64,
    pub zeta_realized: f64,
    pub statistic: String,
    pub value: f64,
    pub radius: f64,
    pub threshold: f64,
    /// `value <= threshold + radius`
    pub pass: bool,
    pub m: usize,
    pub seed: u64,
    /// Rows that test an asymptotic statement away from its regime are
    /// reported but do not decide the overall outcome.
    pub gating: bool,
}

/// `L ↦ P̂(|S_N| > L)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub n: u64,
    pub t_n: u32,
    pub points: Vec<(i64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub n: u64,
    pub t_n: u32,
    pub name: String,
    pub empirical: Vec<(i64, f64)>,
    pub reference: Option<Vec<(i64, f64)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub regime: String,
    pub delta: f64,
    pub seed: u64,
    pub replicas: usize,
    pub rows: Vec<ReportRow>,
    pub tails: Vec<TailCurve>,
    pub histograms: Vec<HistogramRecord>,
    pub warnings: Vec<String>,
    pub wall_clock_s: f64,
}

/// Round to 9 significant digits and print the shortest form.
pub fn format_sig9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.8e}").parse().expect("float round trip");
    format!("{r}")
}

pub const CSV_HEADER: &str =
    "regime,N,T_N,delta,zeta_realized,statistic_name,value,radius,threshold,pass,M,seed";

impl ExperimentReport {
    fn new(regime: &str, delta: f64, seed: u64, replicas: usize) -> Self {
        ExperimentReport {
            regime: regime.into(),
            delta,
            seed,
            replicas,
            rows: Vec::new(),
            tails: Vec::new(),
            histograms: Vec::new(),
            warnings: Vec::new(),
            wall_clock_s: 0.0,
        }
    }

    /// True when every gating row passes.
    pub fn passed(&self) -> bool {
        self.rows.iter().filter(|r| r.gating).all(|r| r.pass)
    }

    pub fn row(&self, statistic: &str, n: u64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.statistic == statistic && r.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.regime,
                r.n,
                r.t_n,
                format_sig9(r.delta),
                format_sig9(r.zeta_realized),
                r.statistic,
                format_sig9(r.value),
                format_sig9(r.radius),
                format_sig9(r.threshold),
                r.pass,
                r.m,
                r.seed
            ));
        }
        s
    }

    /// Tail curves as `N,T_N,L,prob` lines.
    pub fn tails_csv(&self) -> String {
        let mut s = String::from("N,T_N,L,prob\n");
        for c in &self.tails {
            for (l, p) in &c.points {
                s.push_str(&format!("{},{},{},{}\n", c.n, c.t_n, l, format_sig9(*p)));
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Per-`N` context shared by the rows of a regime.
struct Point<'a> {
    regime: &'a str,
    n: u64,
    t_n: u32,
    delta: f64,
    zeta: f64,
    m: usize,
    seed: u64,
}

impl Point<'_> {
    fn row(&self, statistic: &str, value: f64, radius: f64, threshold: f64, gating: bool) -> ReportRow {
        ReportRow {
            regime: self.regime.into(),
            n: self.n,
            t_n: self.t_n,
            delta: self.delta,
            zeta_realized: self.zeta,
            statistic: statistic.into(),
            value,
            radius,
            threshold,
            pass: value <= threshold + radius,
            m: self.m,
            seed: self.seed,
            gating,
        }
    }
}

fn pmf_pairs(p: &Pmf) -> Vec<(i64, f64)> {
    p.iter().map(|(k, v)| (*k, *v)).collect()
}

/// Draw `M` free-polymer skeletons and keep their statistics.
fn sample_stats(
    delta: f64,
    t: u32,
    n: u64,
    m: usize,
    seed: u64,
) -> Result<Vec<crate::path::SkeletonStats>> {
    let sampler = FreeSampler::new(delta, Geometry::Finite(t), n)?;
    Ok(run_replicas(m, seed, |rng| {
        let mut c = StatsCollector::new(t, false);
        sampler.sample(rng, &mut c);
        c.stats
    }))
}

/// Diffusive regime: `S_N / (C_δ e^{-c_δT_N/2} T_N √N)` against `N(0, 1)`.
pub fn regime_gaussian(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check()?;
    let start = Instant::now();
    let d = config.delta;
    let mut rep = ExperimentReport::new("gaussian", d, config.seed, config.replicas);
    if config.replicas == 0 {
        return Ok(rep);
    }
    let th = config.thresholds;
    let fixed = matches!(config.rule, SpacingRule::Explicit(_));
    let mut prev_offset = f64::INFINITY;
    for (i, &n) in config.n_grid.iter().enumerate() {
        let t = config.rule.spacing(d, n, i)?;
        let (offset, regime) = regime_offset(n as f64, t as f64, d, 1.0)?;
        if regime != Regime::Gaussian || offset > prev_offset {
            rep.warnings.push(format!(
                "N={n} T_N={t}: offset {offset:.3} does not look diffusive"
            ));
        }
        prev_offset = offset;
        let sc = scaling_constants(d, offset)?;
        let stats = sample_stats(d, t, n, config.replicas, config.seed)?;
        let s: Vec<f64> = stats.iter().map(|s| s.s_n as f64).collect();
        let tf = t as f64;
        let scale = sc.big_c_delta * (-0.5 * sc.c_delta * tf).exp() * tf * (n as f64).sqrt();
        let z: Vec<f64> = s.iter().map(|v| v / scale).collect();
        let m = config.replicas;
        let pt = Point {
            regime: "gaussian",
            n,
            t_n: t,
            delta: d,
            zeta: offset,
            m,
            seed: config.seed,
        };
        rep.rows.push(pt.row(
            "ks_normal",
            ks_statistic(&z, normal_cdf)?,
            ks_radius(m),
            th.ks,
            !fixed,
        ));
        let (_, var) = mean_var(&s);
        let ratio = var / (scale * scale);
        rep.rows.push(pt.row("variance_ratio", ratio, 0.0, f64::INFINITY, false));
        rep.rows.push(pt.row(
            "variance_ratio_deviation",
            (ratio - 1.0).abs(),
            3.0 * (2.0 / (m as f64 - 1.0)).sqrt(),
            th.variance_ratio,
            !fixed,
        ));
        let sd = var.sqrt();
        let z_emp: Vec<f64> = s.iter().map(|v| v / sd).collect();
        rep.rows.push(pt.row(
            "ks_normal_empirical_scale",
            ks_statistic(&z_emp, normal_cdf)?,
            ks_radius(m),
            th.ks,
            true,
        ));
        rep.histograms.push(HistogramRecord {
            n,
            t_n: t,
            name: "y_final".into(),
            empirical: pmf_pairs(&empirical_pmf(
                &stats.iter().map(|s| s.y_final).collect::<Vec<_>>(),
            )),
            reference: None,
        });
    }
    rep.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// Critical regime: `L'_N` against Poisson and `round(S_N/T_N)` against
/// `S_Γ`, both with parameter `t_{δ,ζ_N}` at the realized offset.
pub fn regime_critical(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check()?;
    let start = Instant::now();
    let d = config.delta;
    let mut rep = ExperimentReport::new("critical", d, config.seed, config.replicas);
    if config.replicas == 0 {
        return Ok(rep);
    }
    let th = config.thresholds;
    for (i, &n) in config.n_grid.iter().enumerate() {
        let t = config.rule.spacing(d, n, i)?;
        let (zeta, _) = regime_offset(n as f64, t as f64, d, 1.0)?;
        if zeta.abs() > 1.0 {
            rep.warnings.push(format!(
                "N={n} T_N={t}: realized offset {zeta:.3} is far from critical"
            ));
        }
        let sc = scaling_constants(d, zeta)?;
        let stats = sample_stats(d, t, n, config.replicas, config.seed)?;
        let m = config.replicas;
        let pt = Point {
            regime: "critical",
            n,
            t_n: t,
            delta: d,
            zeta,
            m,
            seed: config.seed,
        };

        let lp: Vec<i64> = stats.iter().map(|s| s.l_prime as i64).collect();
        let emp_l = empirical_pmf(&lp);
        let ref_l = poisson_pmf(sc.t_zeta, 1e-12)?;
        rep.rows.push(pt.row(
            "tv_lprime_poisson",
            tv_distance(&emp_l, &ref_l)?,
            expected_tv_radius(&ref_l, m),
            th.tv_poisson,
            true,
        ));

        let tf = t as f64;
        let j: Vec<i64> = stats.iter().map(|s| (s.s_n as f64 / tf).round() as i64).collect();
        let emp_j = empirical_pmf(&j);
        let ref_j = reference_sgamma_law(sc.t_zeta, None)?;
        rep.rows.push(pt.row(
            "tv_sgamma",
            tv_distance(&emp_j, &ref_j)?,
            expected_tv_radius(&ref_j, m),
            th.tv_sgamma,
            true,
        ));

        rep.histograms.push(HistogramRecord {
            n,
            t_n: t,
            name: "lprime".into(),
            empirical: pmf_pairs(&emp_l),
            reference: Some(pmf_pairs(&ref_l)),
        });
        rep.histograms.push(HistogramRecord {
            n,
            t_n: t,
            name: "s_over_t".into(),
            empirical: pmf_pairs(&emp_j),
            reference: Some(pmf_pairs(&ref_j)),
        });
    }
    rep.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// Single-interface regime: `P̂(L'_N >= 1)` against the inclusion bound
/// `e^δ N Q¹_{T_N}(φ)`, tail curves of `|S_N|` and the spread of its 99th
/// percentile across the grid.
pub fn regime_tight(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check()?;
    let start = Instant::now();
    let d = config.delta;
    let mut rep = ExperimentReport::new("tight", d, config.seed, config.replicas);
    if config.replicas == 0 {
        return Ok(rep);
    }
    let th = config.thresholds;
    let mut percentiles = Vec::new();
    let mut prev_offset = f64::NEG_INFINITY;
    let mut last = None;
    for (i, &n) in config.n_grid.iter().enumerate() {
        let t = config.rule.spacing(d, n, i)?;
        let g = Geometry::Finite(t);
        let (offset, regime) = regime_offset(n as f64, t as f64, d, 1.0)?;
        if regime != Regime::SingleInterface || offset < prev_offset {
            rep.warnings.push(format!(
                "N={n} T_N={t}: offset {offset:.3} does not look single-interface"
            ));
        }
        prev_offset = offset;
        let stats = sample_stats(d, t, n, config.replicas, config.seed)?;
        let m = config.replicas;
        let pt = Point {
            regime: "tight",
            n,
            t_n: t,
            delta: d,
            zeta: offset,
            m,
            seed: config.seed,
        };
        let bound = d.exp() * n as f64 * q1_closed(g, crate::free_energy::phi(d, g)?)?;
        let p_hat = stats.iter().filter(|s| s.l_prime >= 1).count() as f64 / m as f64;
        let sigma = (bound.min(1.0) * (1.0 - bound.min(1.0)) / m as f64).sqrt();
        rep.rows.push(pt.row("p_change", p_hat, 3.0 * sigma, bound, true));
        rep.rows.push(pt.row("inclusion_bound", bound, 0.0, 0.1, false));

        let abs: Vec<f64> = stats.iter().map(|s| s.s_n.abs() as f64).collect();
        let p99 = quantile(&abs, 0.99)?;
        percentiles.push(p99);
        rep.rows.push(pt.row("percentile99_abs_s", p99, 0.0, f64::INFINITY, false));

        let mut sorted: Vec<i64> = stats.iter().map(|s| s.s_n.abs()).collect();
        sorted.sort_unstable();
        let points = (0..=2 * t as i64)
            .map(|l| {
                let above = sorted.len() - sorted.partition_point(|&v| v <= l);
                (l, above as f64 / m as f64)
            })
            .collect();
        rep.tails.push(TailCurve { n, t_n: t, points });
        rep.histograms.push(HistogramRecord {
            n,
            t_n: t,
            name: "s_n".into(),
            empirical: pmf_pairs(&empirical_pmf(
                &stats.iter().map(|s| s.s_n).collect::<Vec<_>>(),
            )),
            reference: None,
        });
        last = Some((n, t, offset));
    }
    if let Some((n, t, offset)) = last {
        let lo = percentiles.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = percentiles.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pt = Point {
            regime: "tight",
            n,
            t_n: t,
            delta: d,
            zeta: offset,
            m: config.replicas,
            seed: config.seed,
        };
        rep.rows.push(pt.row("percentile99_spread", hi - lo, 0.0, th.percentile_spread, true));
    }
    rep.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// Settings of the renewal-level diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub delta: f64,
    pub spacing: u32,
    pub n: u64,
    pub replicas: usize,
    pub seed: u64,
    /// Length at which the exact contact fraction is evaluated.
    pub contact_n: u64,
    pub thresholds: Thresholds,
}

impl DiagnosticsConfig {
    pub fn new(delta: f64, spacing: u32, n: u64, replicas: usize, seed: u64) -> Self {
        DiagnosticsConfig {
            delta,
            spacing,
            n,
            replicas,
            seed,
            contact_n: 2000,
            thresholds: Thresholds::default(),
        }
    }
}

/// Renewal-level diagnostics at one `(δ, T, N)`:
/// the interface walk `Y` after `⌊N/m⌋` steps against the normal law with
/// the Berry–Esseen bound; concentration of `L_N/N` around `s_∞`; the mark
/// variance; `L'_N` of the free renewal against Poisson; the index `Δ` of
/// the first interface change against `Exp(v_{δ,ζ_N})` and its step length;
/// and the exact mean contact fraction.
pub fn diagnostics_suite(cfg: &DiagnosticsConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let d = cfg.delta;
    let t = cfg.spacing;
    let n = cfg.n;
    let m = cfg.replicas;
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!("diagnostics need delta > 0, got {d}")));
    }
    let mut rep = ExperimentReport::new("diagnostics", d, cfg.seed, m);
    if m == 0 {
        return Ok(rep);
    }
    if m < 100 {
        return Err(Error::InvalidArgument(format!("M must be 0 or >= 100, got {m}")));
    }
    let th = cfg.thresholds;
    let g = Geometry::Finite(t);
    let law = TiltedStepLaw::build(d, g, DEFAULT_STEP_TOLERANCE)?;
    let p = law.change_probability();
    let mean_step = law.mean();
    let (zeta, _) = regime_offset(n as f64, t as f64, d, 1.0)?;
    let sc = scaling_constants(d, zeta)?;
    let s_inf = phi_inf_prime(d);
    let pt = Point {
        regime: "diagnostics",
        n,
        t_n: t,
        delta: d,
        zeta,
        m,
        seed: cfg.seed,
    };

    // interface walk after a fixed number of renewal steps
    let steps = ((n as f64 / mean_step).floor() as usize).max(1);
    let walks: Vec<(i64, u64)> = run_replicas(m, cfg.seed, |rng| {
        let (mut y, mut changes) = (0i64, 0u64);
        for _ in 0..steps {
            let st = law.sample(rng);
            y += st.mark as i64;
            changes += (st.mark != 0) as u64;
        }
        (y, changes)
    });
    let sd = (p * steps as f64).sqrt();
    let z: Vec<f64> = walks.iter().map(|w| w.0 as f64 / sd).collect();
    rep.rows.push(pt.row(
        "berry_esseen_ks",
        ks_statistic(&z, normal_cdf)?,
        3.0 * ks_radius(m),
        3.0 / sd,
        true,
    ));
    let draws = (steps * m) as f64;
    let var_hat = walks.iter().map(|w| w.1 as f64).sum::<f64>() / draws;
    rep.rows.push(pt.row(
        "mark_variance_deviation",
        (var_hat - p).abs(),
        3.0 * (p * (1.0 - p) / draws).sqrt(),
        0.0,
        true,
    ));

    // contact density under the polymer measure
    let stats = sample_stats(d, t, n, m, cfg.seed.wrapping_add(1))?;
    let frac: Vec<f64> = stats.iter().map(|s| s.l_n as f64 / n as f64).collect();
    let exceed = frac.iter().filter(|f| (*f - s_inf).abs() > th.density_eps).count() as f64 / m as f64;
    rep.rows.push(pt.row(
        "contact_density_exceedance",
        exceed,
        3.0 * (th.density_prob * (1.0 - th.density_prob) / m as f64).sqrt(),
        th.density_prob,
        true,
    ));
    let (mean_frac, _) = mean_var(&frac);
    rep.rows.push(pt.row(
        "contact_fraction_mc_deviation",
        (mean_frac - 1.0 / mean_step).abs(),
        3.0 * (mean_var(&frac).1 / m as f64).sqrt(),
        0.0,
        false,
    ));

    // free renewal up to N
    let counts: Vec<i64> = run_replicas(m, cfg.seed.wrapping_add(2), |rng| {
        let (mut time, mut changes) = (0u64, 0i64);
        loop {
            let st = law.sample(rng);
            time += st.n as u64;
            if time > n {
                return changes;
            }
            changes += (st.mark != 0) as i64;
        }
    });
    let emp = empirical_pmf(&counts);
    let reference = poisson_pmf(sc.t_zeta, 1e-12)?;
    rep.rows.push(pt.row(
        "tv_lprime_poisson_renewal",
        tv_distance(&emp, &reference)?,
        expected_tv_radius(&reference, m),
        th.tv_poisson,
        false,
    ));

    // first interface change: geometric index, then the conditioned step
    let geo = Geometric::new(p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let change_cdf: Vec<f64> = (0..=law.horizon())
        .scan(0.0, |acc, k| {
            *acc += 2.0 * law.mass(k, 1);
            Some(*acc)
        })
        .collect();
    let first: Vec<(u64, u64)> = run_replicas(m, cfg.seed.wrapping_add(3), |rng| {
        let delta_idx = geo.sample(rng) + 1;
        let target = rng.random::<f64>() * change_cdf[change_cdf.len() - 1];
        let xi = change_cdf.partition_point(|&c| c <= target) as u64;
        (delta_idx, xi)
    });
    let nf = n as f64;
    let scaled: Vec<f64> = first.iter().map(|f| (f.0 - 1) as f64 / nf).collect();
    let v = sc.v_zeta;
    rep.rows.push(pt.row(
        "ks_delta_exponential",
        ks_statistic(&scaled, |x| if x <= 0.0 { 0.0 } else { -(-v * x).exp_m1() })?,
        ks_radius(m),
        th.ks,
        false,
    ));
    let (mean_delta, var_delta) = mean_var(&first.iter().map(|f| (f.0 - 1) as f64).collect::<Vec<_>>());
    rep.rows.push(pt.row(
        "delta_mean_deviation",
        (mean_delta - nf / v).abs(),
        3.0 * (var_delta / m as f64).sqrt(),
        0.0,
        false,
    ));
    let (mean_xi, _) = mean_var(&first.iter().map(|f| f.1 as f64 / nf).collect::<Vec<_>>());
    rep.rows.push(pt.row("xi_delta_over_n_mean", mean_xi, 0.0, 0.01, false));

    // exact mean contact fraction
    let cf = contact_fraction(cfg.contact_n, d, g)?;
    let pt = Point { n: cfg.contact_n, ..pt };
    rep.rows.push(pt.row(
        "contact_fraction_exact_deviation",
        (cf - 1.0 / mean_step).abs(),
        0.0,
        th.contact_fraction,
        true,
    ));

    rep.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_rules_at_one_million() {
        let n = 1_000_000;
        assert_eq!(SpacingRule::HalfCritical.spacing(1.0, n, 0).unwrap(), 10);
        assert_eq!(SpacingRule::Critical { zeta: 0.0 }.spacing(1.0, n, 0).unwrap(), 18);
        assert_eq!(SpacingRule::DoubleCritical.spacing(1.0, n, 0).unwrap(), 38);
        assert_eq!(SpacingRule::DoubleCritical.spacing(1.0, 10_000, 0).unwrap(), 24);
        assert_eq!(SpacingRule::DoubleCritical.spacing(1.0, 100_000, 0).unwrap(), 30);
        assert_eq!(nearest_even(0.3), 2);
        let e = SpacingRule::Explicit(vec![8, 10]);
        assert_eq!(e.spacing(1.0, n, 0).unwrap(), 8);
        assert_eq!(e.spacing(1.0, n, 5).unwrap(), 10);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!(SpacingRule::parse("critical", 0.5).unwrap(), SpacingRule::Critical { zeta: 0.5 });
        assert_eq!(SpacingRule::parse("8,12", 0.0).unwrap(), SpacingRule::Explicit(vec![8, 12]));
        assert!(SpacingRule::parse("7", 0.0).is_err());
    }

    #[test]
    fn empty_report_for_zero_replicas() {
        let cfg = ExperimentConfig::new(1.0, SpacingRule::HalfCritical, vec![1_000_000], 0, 1);
        let r = regime_gaussian(&cfg).unwrap();
        assert!(r.rows.is_empty() && r.passed());
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n"));
        let bad = ExperimentConfig::new(1.0, SpacingRule::HalfCritical, vec![100], 50, 1);
        assert!(regime_gaussian(&bad).is_err());
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.255059937177625), "0.255059937");
        assert_eq!(format_sig9(1e6), "1000000");
        assert_eq!(format_sig9(-8.5458015312), "-8.54580153");
        assert_eq!(format_sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn small_critical_run_is_reproducible() {
        let cfg = ExperimentConfig::new(1.0, SpacingRule::Critical { zeta: 0.0 }, vec![10_000], 200, 3);
        let a = regime_critical(&cfg).unwrap();
        let b = regime_critical(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a.rows[0].t_n, 12);
    }

    #[test]
    fn small_diagnostics_run() {
        let mut cfg = DiagnosticsConfig::new(1.0, 8, 10_000, 300, 5);
        cfg.contact_n = 400;
        let r = diagnostics_suite(&cfg).unwrap();
        for name in ["berry_esseen_ks", "mark_variance_deviation", "contact_density_exceedance", "contact_fraction_exact_deviation"] {
            let row = r.rows.iter().find(|x| x.statistic == name).unwrap();
            assert!(row.pass, "{row:?}");
        }
        assert_eq!(r.row("contact_fraction_exact_deviation", 400).unwrap().t_n, 8);
    }
}
