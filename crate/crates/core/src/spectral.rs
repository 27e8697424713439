//! Von Neumann analysis: continuous and discrete amplification factors,
//! modified CFL numbers, the high-frequency stability conditions and the
//! phase/dampening diagnostics.
//!
//! All discrete factors are computed from the coefficient table shared with
//! the stepper: for a mode `u_j = e^{ijθ}`,
//!
//! ```text
//! g(θ) = c_{-1} e^{iθ} + c_0 + c_1 e^{-iθ} - Fo p Σ_{l≥2} w_l e^{-ilθ}
//! ```
//!
//! The far sum is evaluated exactly on DFT lattices `θ_m = 2πm/M` by folding
//! the weights modulo `M`, or by direct summation at arbitrary angles.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{
    derive_groups, lambda_one, lambda_three, lambda_two, Constants, DimensionlessGroups, GridSpec,
    PhysicalParams,
};
use crate::nonlocal::{CoefficientTable, DiscretizationKind, TruncationPolicy};

/// Default lower edge of the high-frequency band.
pub const DEFAULT_THETA0: f64 = PI / 2.0;
/// Default number of θ samples in stability verdicts.
pub const DEFAULT_SAMPLES: usize = 4096;

/// The dispersion relation `u_t = -φ(k) u` of the linearised continuous model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousSymbol {
    pub params: PhysicalParams,
}

impl ContinuousSymbol {
    pub fn new(params: PhysicalParams) -> Self {
        Self { params }
    }

    /// `φ(k) = ε k² - (η/2) Γ |k|^{4/3} + i (η (√3/2) Γ k |k|^{1/3} + v k)`
    pub fn phi(&self, k: f64) -> Complex64 {
        let p = &self.params;
        let nonlocal = nonlocal_symbol_angular(k);
        Complex64::new(p.epsilon * k * k, p.v * k) + p.eta * nonlocal
    }

    /// `e^{-dt φ(k)}`
    pub fn amplification(&self, k: f64, dt: f64) -> Complex64 {
        (-dt * self.phi(k)).exp()
    }
}

/// Symbol of the nonlocal operator for the plane wave `e^{ikx}`:
/// `I[e^{ikx}] = Γ(2/3) |k|^{4/3} (-1/2 + i (√3/2) sgn k) e^{ikx}`.
pub fn nonlocal_symbol_angular(k: f64) -> Complex64 {
    let g = Constants::get().gamma_two_thirds;
    let m = g * k.abs().powf(4.0 / 3.0);
    Complex64::new(-0.5 * m, 0.75f64.sqrt() * m * k.signum())
}

/// Symbol in cyclic frequency (transform kernel `e^{-2iπxξ}`), obtained from
/// the angular one through `k = 2πξ`: `-a |ξ|^{4/3} + i b ξ|ξ|^{1/3}` with
/// `a = (2π)^{4/3} Γ(2/3) / 2`, `b = √3 a`.
pub fn nonlocal_symbol_cyclic(xi: f64) -> Complex64 {
    nonlocal_symbol_angular(2.0 * PI * xi)
}

/// `e^{-dt φ(θ/dx)}` written in the dimensionless groups.
pub fn continuous_amplification(groups: &DimensionlessGroups, theta: f64) -> Complex64 {
    let g = Constants::get().gamma_two_thirds;
    let t = theta.abs();
    let t43 = t.powf(4.0 / 3.0);
    let log_mod = 0.5 * g * groups.fo * t43 - 0.5 * groups.df * t * t;
    let arg = -(groups.cr * theta + 0.75f64.sqrt() * g * groups.fo * theta.signum() * t43);
    Complex64::from_polar(log_mod.exp(), arg)
}

/// Dimensionless angle below which `|G_cont| > 1`.
pub fn continuous_growth_cutoff(groups: &DimensionlessGroups) -> f64 {
    let g = Constants::get().gamma_two_thirds;
    (g * groups.fo / groups.df).powf(1.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakThreshold {
    /// Wavenumber of maximal growth.
    pub k_star: f64,
    /// Maximal growth rate `-min Re φ`.
    pub alpha_star: f64,
    /// Wavenumber above which modes decay.
    pub k0: f64,
}

pub fn peak_and_threshold(params: &PhysicalParams) -> Result<PeakThreshold> {
    params.require_positive()?;
    let g = Constants::get().gamma_two_thirds;
    let r = params.eta / params.epsilon;
    Ok(PeakThreshold {
        k_star: (g * r / 3.0).powf(1.5),
        alpha_star: 4.0 / 27.0 * (0.5 * g).powi(3) * params.eta.powi(3) / params.epsilon.powi(2),
        k0: (0.5 * g * r).powf(1.5),
    })
}

/// The weight mass `λ` of `CFL_mod = Cr + Df + λ Fo`.
pub fn cfl_lambda(kind: DiscretizationKind) -> f64 {
    match kind {
        DiscretizationKind::I1 => lambda_one(),
        DiscretizationKind::I2 => lambda_two(),
        DiscretizationKind::I3 => lambda_three(),
    }
}

pub fn cfl_mod(kind: DiscretizationKind, groups: &DimensionlessGroups) -> f64 {
    groups.cr + groups.df + cfl_lambda(kind) * groups.fo
}

/// Coefficient `μ` of the high-frequency condition `μ η dx^{2/3} <= 2 ε sin²(θ0/2)`.
pub fn high_freq_mu(kind: DiscretizationKind) -> f64 {
    let c = Constants::get();
    match kind {
        DiscretizationKind::I1 => 1.0 - 2f64.powf(-1.0 / 3.0),
        DiscretizationKind::I2 => 4.0 / 9.0 * (c.zeta_seven_thirds - 1.0 + c.zeta_four_thirds),
        DiscretizationKind::I3 => c.gamma_two_thirds / 3.0,
    }
}

fn check_theta0(theta0: f64) -> Result<()> {
    if theta0 > 0.0 && theta0 < PI {
        Ok(())
    } else {
        Err(invalid(
            "theta0",
            format!("must lie in (0, pi), got {theta0}"),
        ))
    }
}

pub fn high_freq_condition(
    kind: DiscretizationKind,
    params: &PhysicalParams,
    dx: f64,
    theta0: f64,
) -> Result<bool> {
    check_theta0(theta0)?;
    let s = (0.5 * theta0).sin();
    Ok(high_freq_mu(kind) * params.eta * dx.powf(2.0 / 3.0) <= 2.0 * params.epsilon * s * s)
}

/// The same condition in groups: `η dx^{2/3} / ε = 2 Fo / Df`.
pub fn high_freq_condition_groups(
    kind: DiscretizationKind,
    groups: &DimensionlessGroups,
    theta0: f64,
) -> Result<bool> {
    check_theta0(theta0)?;
    let s = (0.5 * theta0).sin();
    Ok(high_freq_mu(kind) * groups.fo <= groups.df * s * s)
}

/// Largest `dx` allowed by the high-frequency condition.
pub fn high_freq_dx_bound(
    kind: DiscretizationKind,
    params: &PhysicalParams,
    theta0: f64,
) -> Result<f64> {
    check_theta0(theta0)?;
    params.require_positive()?;
    let s = (0.5 * theta0).sin();
    Ok((2.0 * params.epsilon * s * s / (high_freq_mu(kind) * params.eta)).powf(1.5))
}

/// `max_θ |a + b e^{-iθ}| <= d`.
pub fn half_circle_bound(a: f64, b: f64, d: f64) -> bool {
    a + b.abs() <= d && a - b.abs() >= -d
}

/// `c_{-1}, c_0, c_1` of the linear step for a table and groups.
pub fn near_coefficients(table: &CoefficientTable, groups: &DimensionlessGroups) -> [f64; 3] {
    let q = groups.fo * table.prefactor();
    let mut c = [
        0.5 * groups.df - q * table.forward(),
        1.0 - groups.cr - groups.df - q * table.weight(0),
        groups.cr + 0.5 * groups.df - q * table.weight(1),
    ];
    if groups.cr < 0.0 {
        c[0] -= groups.cr;
        c[1] += 2.0 * groups.cr;
        c[2] -= groups.cr;
    }
    c
}

/// `g(θ)` from a precomputed far field `Σ_{l>=2} w_l e^{-ilθ}`.
pub fn assemble(
    table: &CoefficientTable,
    groups: &DimensionlessGroups,
    theta: f64,
    far: Complex64,
) -> Complex64 {
    let [cm, c0, c1] = near_coefficients(table, groups);
    let e = Complex64::from_polar(1.0, theta);
    cm * e + c0 + c1 * e.conj() - groups.fo * table.prefactor() * far
}

/// `g(θ)` by direct summation of the table.
pub fn amplification_from_table(
    table: &CoefficientTable,
    groups: &DimensionlessGroups,
    theta: f64,
) -> Complex64 {
    assemble(table, groups, theta, table.far_symbol(theta))
}

fn spectral_table(
    kind: DiscretizationKind,
    truncation: TruncationPolicy,
) -> Result<CoefficientTable> {
    if let TruncationPolicy::Memory(_) = truncation {
        return Err(invalid(
            "truncation",
            "a memory length needs a grid; pass the term count or a tail tolerance",
        ));
    }
    // weights are dimensionless, so any dx will do
    CoefficientTable::build(kind, truncation, 1.0)
}

pub fn discrete_amplification(
    kind: DiscretizationKind,
    groups: &DimensionlessGroups,
    theta: f64,
    truncation: TruncationPolicy,
) -> Result<Complex64> {
    global().amplification(kind, truncation, groups, theta)
}

/// `Δ = 1 - θ_d / (Cr θ + (√3/2) Γ Fo θ^{4/3})`, `θ_d = -arg g`.
pub fn phase_delay_of(g: Complex64, groups: &DimensionlessGroups, theta: f64) -> Result<f64> {
    let gamma = Constants::get().gamma_two_thirds;
    let reference = groups.cr * theta
        + 0.75f64.sqrt() * gamma * groups.fo * theta.signum() * theta.abs().powf(4.0 / 3.0);
    if reference == 0.0 || !reference.is_finite() {
        return Err(Error::UndefinedPhaseDelay);
    }
    let theta_d = -g.arg();
    Ok(1.0 - theta_d / reference)
}

pub fn phase_delay(
    kind: DiscretizationKind,
    groups: &DimensionlessGroups,
    theta: f64,
    truncation: TruncationPolicy,
) -> Result<f64> {
    let g = discrete_amplification(kind, groups, theta, truncation)?;
    phase_delay_of(g, groups, theta)
}

pub fn dampening_ratio(
    kind: DiscretizationKind,
    groups: &DimensionlessGroups,
    theta: f64,
    truncation: TruncationPolicy,
) -> Result<f64> {
    let g = discrete_amplification(kind, groups, theta, truncation)?;
    Ok(g.norm() / continuous_amplification(groups, theta).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    pub theta: f64,
    pub kind: DiscretizationKind,
    pub g: Complex64,
    pub g_cont: Complex64,
    /// `None` where the reference phase vanishes (`θ = 0`).
    pub delta: Option<f64>,
    pub ratio: f64,
}

impl SpectralSample {
    pub fn new(
        kind: DiscretizationKind,
        groups: &DimensionlessGroups,
        theta: f64,
        g: Complex64,
    ) -> Self {
        let g_cont = continuous_amplification(groups, theta);
        Self {
            theta,
            kind,
            g,
            g_cont,
            delta: phase_delay_of(g, groups, theta).ok(),
            ratio: g.norm() / g_cont.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub kind: DiscretizationKind,
    pub cfl_mod: f64,
    /// `CFL_mod <= 1`
    pub cfl_ok: bool,
    /// High-frequency condition at `theta0`.
    pub highfreq_ok: bool,
    /// `|g| < 1` at every sample in `(theta0, π]`.
    pub verdict: bool,
    pub theta0: f64,
    pub max_high_freq_gain: f64,
    /// Angle of the maximal gain.
    pub argmax_theta: f64,
    pub samples: usize,
}

impl StabilityReport {
    pub fn sufficient_conditions(&self) -> bool {
        self.cfl_ok && self.highfreq_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum TruncationKey {
    Terms(usize),
    Tail(u64),
}

fn key(truncation: TruncationPolicy) -> Result<TruncationKey> {
    match truncation {
        TruncationPolicy::Terms(a) => Ok(TruncationKey::Terms(a)),
        TruncationPolicy::TailTolerance(t) => Ok(TruncationKey::Tail(t.to_bits())),
        TruncationPolicy::Memory(_) => {
            spectral_table(DiscretizationKind::I1, truncation).map(|_| unreachable!())
        }
    }
}

type TableKey = (DiscretizationKind, TruncationKey);

type Lattice = Arc<Vec<Complex64>>;

/// Caches coefficient tables and far-field lattices across queries.
#[derive(Default)]
pub struct SpectralAnalyzer {
    tables: Mutex<HashMap<TableKey, Arc<CoefficientTable>>>,
    lattices: Mutex<HashMap<(TableKey, usize), Lattice>>,
}

/// Lattice covering every tabulated angle (multiples of π/12).
pub const TABLE_LATTICE: usize = 24;

fn global() -> &'static SpectralAnalyzer {
    static ANALYZER: std::sync::OnceLock<SpectralAnalyzer> = std::sync::OnceLock::new();
    ANALYZER.get_or_init(SpectralAnalyzer::default)
}

impl SpectralAnalyzer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide shared analyzer.
    pub fn shared() -> &'static SpectralAnalyzer {
        global()
    }

    pub fn table(
        &self,
        kind: DiscretizationKind,
        truncation: TruncationPolicy,
    ) -> Result<Arc<CoefficientTable>> {
        let k = (kind, key(truncation)?);
        if let Some(t) = self.tables.lock().expect("cache poisoned").get(&k) {
            return Ok(t.clone());
        }
        let t = Arc::new(spectral_table(kind, truncation)?);
        Ok(self
            .tables
            .lock()
            .expect("cache poisoned")
            .entry(k)
            .or_insert(t)
            .clone())
    }

    /// Far-field symbol on `θ_m = 2πm/modulus`.
    pub fn lattice(
        &self,
        kind: DiscretizationKind,
        truncation: TruncationPolicy,
        modulus: usize,
    ) -> Result<Arc<Vec<Complex64>>> {
        if modulus == 0 {
            return Err(invalid("modulus", "must be > 0"));
        }
        let k = ((kind, key(truncation)?), modulus);
        if let Some(l) = self.lattices.lock().expect("cache poisoned").get(&k) {
            return Ok(l.clone());
        }
        let table = self.table(kind, truncation)?;
        let l = Arc::new(table.far_symbol_lattice(modulus));
        Ok(self
            .lattices
            .lock()
            .expect("cache poisoned")
            .entry(k)
            .or_insert(l)
            .clone())
    }

    /// `g(θ)`; angles on the table lattice use the cached far field.
    pub fn amplification(
        &self,
        kind: DiscretizationKind,
        truncation: TruncationPolicy,
        groups: &DimensionlessGroups,
        theta: f64,
    ) -> Result<Complex64> {
        let table = self.table(kind, truncation)?;
        let m = theta / (2.0 * PI) * TABLE_LATTICE as f64;
        let far = if (m - m.round()).abs() < 1e-12 {
            let idx = (m.round() as i64).rem_euclid(TABLE_LATTICE as i64) as usize;
            self.lattice(kind, truncation, TABLE_LATTICE)?[idx]
        } else {
            table.far_symbol(theta)
        };
        Ok(assemble(&table, groups, theta, far))
    }

    /// `g(θ_m)` for `θ_m = 2πm/modulus`, `m` in `range`.
    pub fn amplification_on_lattice(
        &self,
        kind: DiscretizationKind,
        truncation: TruncationPolicy,
        groups: &DimensionlessGroups,
        modulus: usize,
        range: std::ops::RangeInclusive<usize>,
    ) -> Result<Vec<(f64, Complex64)>> {
        let table = self.table(kind, truncation)?;
        let lattice = self.lattice(kind, truncation, modulus)?;
        Ok(range
            .map(|m| {
                let theta = 2.0 * PI * m as f64 / modulus as f64;
                (theta, assemble(&table, groups, theta, lattice[m % modulus]))
            })
            .collect())
    }

    pub fn sample(
        &self,
        kind: DiscretizationKind,
        truncation: TruncationPolicy,
        groups: &DimensionlessGroups,
        theta: f64,
    ) -> Result<SpectralSample> {
        let g = self.amplification(kind, truncation, groups, theta)?;
        Ok(SpectralSample::new(kind, groups, theta, g))
    }

    /// Samples over `[0, π]` on the lattice with `2 (samples - 1)` points.
    pub fn sweep(
        &self,
        kind: DiscretizationKind,
        truncation: TruncationPolicy,
        groups: &DimensionlessGroups,
        samples: usize,
    ) -> Result<Vec<SpectralSample>> {
        if samples < 2 {
            return Err(invalid("samples", "need at least 2"));
        }
        let modulus = 2 * (samples - 1);
        let values =
            self.amplification_on_lattice(kind, truncation, groups, modulus, 0..=samples - 1)?;
        Ok(values
            .into_iter()
            .map(|(theta, g)| SpectralSample::new(kind, groups, theta, g))
            .collect())
    }

    /// Lattice whose points in `(theta0, π]` number about `samples`, ending at π.
    pub fn verdict_modulus(theta0: f64, samples: usize) -> usize {
        let m = (2.0 * PI * samples as f64 / (PI - theta0)).round() as usize;
        (m + m % 2).max(4)
    }

    /// `max |g|` over the verdict lattice points in `(theta0, π]`.
    pub fn max_high_freq_gain(
        &self,
        kind: DiscretizationKind,
        truncation: TruncationPolicy,
        groups: &DimensionlessGroups,
        theta0: f64,
        samples: usize,
    ) -> Result<(f64, f64, usize)> {
        check_theta0(theta0)?;
        if samples < 2 {
            return Err(invalid("samples", "need at least 2"));
        }
        let modulus = Self::verdict_modulus(theta0, samples);
        let first = ((theta0 / (2.0 * PI) * modulus as f64).floor() as usize) + 1;
        let values =
            self.amplification_on_lattice(kind, truncation, groups, modulus, first..=modulus / 2)?;
        let count = values.len();
        let (theta, gain) = values.into_iter().map(|(t, g)| (t, g.norm())).fold(
            (theta0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
        Ok((gain, theta, count))
    }

    pub fn stability_verdict(
        &self,
        kind: DiscretizationKind,
        params: &PhysicalParams,
        grid: &GridSpec,
        truncation: TruncationPolicy,
        theta0: f64,
        samples: usize,
    ) -> Result<StabilityReport> {
        let groups = derive_groups(params, grid);
        let highfreq_ok = high_freq_condition(kind, params, grid.dx(), theta0)?;
        self.verdict_for_groups(kind, &groups, truncation, theta0, samples, highfreq_ok)
    }

    /// Verdict from groups alone; the high-frequency condition is expressed
    /// through `2 Fo / Df`.
    pub fn stability_verdict_groups(
        &self,
        kind: DiscretizationKind,
        groups: &DimensionlessGroups,
        truncation: TruncationPolicy,
        theta0: f64,
        samples: usize,
    ) -> Result<StabilityReport> {
        let highfreq_ok = high_freq_condition_groups(kind, groups, theta0)?;
        self.verdict_for_groups(kind, groups, truncation, theta0, samples, highfreq_ok)
    }

    fn verdict_for_groups(
        &self,
        kind: DiscretizationKind,
        groups: &DimensionlessGroups,
        truncation: TruncationPolicy,
        theta0: f64,
        samples: usize,
        highfreq_ok: bool,
    ) -> Result<StabilityReport> {
        let (gain, argmax, count) =
            self.max_high_freq_gain(kind, truncation, groups, theta0, samples)?;
        let cfl = cfl_mod(kind, groups);
        Ok(StabilityReport {
            kind,
            cfl_mod: cfl,
            cfl_ok: cfl <= 1.0,
            highfreq_ok,
            verdict: gain < 1.0,
            theta0,
            max_high_freq_gain: gain,
            argmax_theta: argmax,
            samples: count,
        })
    }

    /// Verdicts for many group triples in parallel, in input order.
    pub fn max_gains_parallel(
        &self,
        kind: DiscretizationKind,
        truncation: TruncationPolicy,
        groups: &[DimensionlessGroups],
        theta0: f64,
        samples: usize,
    ) -> Result<Vec<f64>> {
        // warm the lattice once before fanning out
        self.lattice(kind, truncation, Self::verdict_modulus(theta0, samples))?;
        groups
            .par_iter()
            .map(|g| {
                self.max_high_freq_gain(kind, truncation, g, theta0, samples)
                    .map(|r| r.0)
            })
            .collect()
    }
}

pub fn stability_verdict(
    kind: DiscretizationKind,
    params: &PhysicalParams,
    grid: &GridSpec,
    truncation: TruncationPolicy,
    theta0: f64,
    samples: usize,
) -> Result<StabilityReport> {
    global().stability_verdict(kind, params, grid, truncation, theta0, samples)
}

/// Closed form of `g_1` from the telescoped expansion.
pub fn g1_closed_form(groups: &DimensionlessGroups, theta: f64, far: Complex64) -> Complex64 {
    let DimensionlessGroups { cr, df, fo } = *groups;
    let e = Complex64::from_polar(1.0, -theta);
    let c = 2f64.powf(-1.0 / 3.0);
    0.5 * df * e.conj() + (1.0 - cr - df - fo) + (cr + 0.5 * df + (2.0 - c) * fo) * e - fo * far
}

/// Closed form of `g_2` from the ζ expansion.
pub fn g2_closed_form(groups: &DimensionlessGroups, theta: f64, far: Complex64) -> Complex64 {
    let DimensionlessGroups { cr, df, fo } = *groups;
    let k = Constants::get();
    let q = 4.0 / 9.0 * fo;
    let (s, c) = theta.sin_cos();
    // (Df/2)(2cosθ - 2) - Cr(1 - e^{-iθ}) - q(½ζ(4/3)·2i sinθ - ζ(7/3) + e^{-iθ}) - q far
    let re = 1.0 - cr * (1.0 - c) - df * (1.0 - c) + q * (k.zeta_seven_thirds - c);
    let im = -cr * s - q * (k.zeta_four_thirds * s - s);
    Complex64::new(re, im) - q * far
}
