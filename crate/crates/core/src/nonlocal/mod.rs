//! Discretisations of the nonlocal anti-diffusive operator
//! `I[φ](x) = ∫_0^∞ ξ^{-1/3} φ''(x - ξ) dξ`.
//!
//! Every discretisation is stored as a stencil acting on `u_{j+1}` and on the
//! causal history `u_j, u_{j-1}, ...`:
//!
//! ```text
//! I_dx[u]_j = scale * ( forward * u_{j+1} + Σ_{l≥0} w_l u_{j-l} ),   scale = prefactor * dx^{-4/3}
//! ```
//!
//! * `I1` quadrature of the `ξ^{-1/3}` form with a centred second difference,
//! * `I2` quadrature of the `|z|^{-7/3}` form with a centred first difference,
//! * `I3` Grünwald–Letnikov weights `(-1)^l C(4/3, l)` scaled by `Γ(2/3)`.

mod apply;
mod reference;

pub use apply::{
    apply_nonlocal_fft, apply_nonlocal_naive, Boundary, ConvolutionMethod, NonlocalOperator,
};
pub use reference::{
    continuous_nonlocal_reference, continuous_nonlocal_reference_integral_form, Affine, Cosine,
    Gaussian, QuadratureResult, TestFunction,
};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::{Constants, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscretizationKind {
    I1,
    I2,
    I3,
}

impl DiscretizationKind {
    pub const ALL: [DiscretizationKind; 3] = [Self::I1, Self::I2, Self::I3];

    /// Multiplier applied on top of `dx^{-4/3}`.
    pub fn prefactor(self) -> f64 {
        match self {
            Self::I1 => 1.0,
            Self::I2 => 4.0 / 9.0,
            Self::I3 => Constants::get().gamma_two_thirds,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::I1 => "i1",
            Self::I2 => "i2",
            Self::I3 => "i3",
        }
    }
}

impl fmt::Display for DiscretizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DiscretizationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i1" | "1" => Ok(Self::I1),
            "i2" | "2" => Ok(Self::I2),
            "i3" | "3" | "gl" => Ok(Self::I3),
            other => Err(invalid("kind", format!("unknown discretization `{other}`"))),
        }
    }
}

/// How the infinite series of a discretisation is cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationPolicy {
    /// Short memory of physical length `L`: `A_dx = floor(L / dx)` terms of the
    /// partial sums.
    Memory(f64),
    /// Exactly `A_dx` terms of the partial sums.
    Terms(usize),
    /// Closed-form near field (ζ values, telescoped weights) with the far
    /// series cut once its absolute tail mass drops below the tolerance.
    TailTolerance(f64),
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::TailTolerance(DEFAULT_TAIL_TOLERANCE)
    }
}

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

impl TruncationPolicy {
    /// Number of partial-sum terms `A_dx` for the finite policies.
    pub fn terms(&self, dx: f64) -> Result<Option<usize>> {
        match *self {
            Self::Memory(length) => {
                if !(length.is_finite() && length > 0.0) {
                    return Err(invalid(
                        "memory_length",
                        format!("must be > 0, got {length}"),
                    ));
                }
                let a = (length / dx + 1e-9).floor() as usize;
                if a == 0 {
                    return Err(Error::EmptyTruncation);
                }
                Ok(Some(a))
            }
            Self::Terms(0) => Err(Error::EmptyTruncation),
            Self::Terms(a) => Ok(Some(a)),
            Self::TailTolerance(tol) => {
                if !(tol.is_finite() && tol > 0.0) {
                    return Err(invalid("tail_tolerance", format!("must be > 0, got {tol}")));
                }
                Ok(None)
            }
        }
    }
}

/// Short-memory consistency check: `dx << A^{-1/3}` for I1 and `dx << A^{-2/3}`
/// for I2, with `A = A_dx dx` the physical memory. Returns a warning message
/// when `dx` exceeds a tenth of that scale.
pub fn short_memory_warning(
    kind: DiscretizationKind,
    policy: &TruncationPolicy,
    dx: f64,
) -> Option<String> {
    let terms = policy.terms(dx).ok().flatten()?;
    let memory = terms as f64 * dx;
    let exponent = match kind {
        DiscretizationKind::I1 | DiscretizationKind::I3 => -1.0 / 3.0,
        DiscretizationKind::I2 => -2.0 / 3.0,
    };
    let scale = memory.powf(exponent);
    (dx > 0.1 * scale).then(|| {
        format!(
            "short-memory truncation may be inconsistent: dx = {dx} is not << A^{exponent:.3} = {scale:.4} (A = {memory})"
        )
    })
}

/// Closed-form generator of the far weights `w_l` for `l >= start`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SeriesTail {
    start: usize,
    end: usize,
}

/// Stencil weights of one discretisation of the nonlocal operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    kind: DiscretizationKind,
    dx: f64,
    forward: f64,
    near: Vec<f64>,
    series: Option<SeriesTail>,
    truncation_count: usize,
    tail_bound: f64,
}

pub fn build_coefficients(
    kind: DiscretizationKind,
    policy: TruncationPolicy,
    grid: &GridSpec,
) -> Result<CoefficientTable> {
    CoefficientTable::build(kind, policy, grid.dx())
}

impl CoefficientTable {
    pub fn build(kind: DiscretizationKind, policy: TruncationPolicy, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(invalid("dx", format!("must be > 0, got {dx}")));
        }
        match policy.terms(dx)? {
            Some(a) => Ok(Self::partial_sums(kind, a, dx)),
            None => {
                let TruncationPolicy::TailTolerance(tol) = policy else {
                    unreachable!()
                };
                Ok(Self::tail_cut(kind, tol, dx))
            }
        }
    }

    /// Exact expansion of the finite sums `Σ_{l=1}^{A}` (or `Σ_{l=0}^{A}` for I3).
    fn partial_sums(kind: DiscretizationKind, a: usize, dx: f64) -> Self {
        let mut forward = 0.0;
        let near = match kind {
            DiscretizationKind::I1 => {
                let mut w = vec![0.0; a + 2];
                for l in (1..=a).rev() {
                    let c = (l as f64).powf(-1.0 / 3.0);
                    w[l - 1] += c;
                    w[l] -= 2.0 * c;
                    w[l + 1] += c;
                }
                w
            }
            DiscretizationKind::I2 => {
                let mut w = vec![0.0; a + 1];
                let (mut h43, mut h73) = (0.0, 0.0);
                for l in (1..=a).rev() {
                    let lf = l as f64;
                    let p = lf.powf(-7.0 / 3.0);
                    w[l] += p;
                    h73 += p;
                    h43 += p * lf;
                }
                w[0] -= h73;
                w[1] -= 0.5 * h43;
                forward = 0.5 * h43;
                w
            }
            DiscretizationKind::I3 => {
                let mut w = Vec::with_capacity(a + 1);
                let mut cur = 1.0;
                w.push(cur);
                for l in 1..=a {
                    cur = grunwald_next(cur, l);
                    w.push(cur);
                }
                w
            }
        };
        Self {
            kind,
            dx,
            forward,
            near,
            series: None,
            truncation_count: a,
            tail_bound: 0.0,
        }
    }

    /// Near field in closed form, far series cut at the tolerance.
    fn tail_cut(kind: DiscretizationKind, tol: f64, dx: f64) -> Self {
        let c = Constants::get();
        let (forward, near, end, tail_bound) = match kind {
            DiscretizationKind::I1 => {
                let n = i1_cutoff(tol);
                let near = vec![1.0, 2f64.powf(-1.0 / 3.0) - 2.0];
                (0.0, near, n, i1_tail_mass(n))
            }
            DiscretizationKind::I2 => {
                // Σ_{l>N} l^{-7/3} < ∫_N^∞ x^{-7/3} dx = (3/4) N^{-4/3}
                let mut n = ((4.0 * tol / 3.0).powf(-0.75)).ceil() as usize;
                while 0.75 * (n as f64).powf(-4.0 / 3.0) >= tol {
                    n += 1;
                }
                let near = vec![-c.zeta_seven_thirds, 1.0 - 0.5 * c.zeta_four_thirds];
                (
                    0.5 * c.zeta_four_thirds,
                    near,
                    n,
                    0.75 * (n as f64).powf(-4.0 / 3.0),
                )
            }
            DiscretizationKind::I3 => {
                // |w_l| l^{7/3} decreases, so Σ_{l>N} |w_l| <= (3/4) |w_N| N.
                let mut w = grunwald_next(grunwald_next(1.0, 1), 2);
                let mut n = 2;
                while 0.75 * w.abs() * n as f64 >= tol {
                    n += 1;
                    w = grunwald_next(w, n);
                }
                (0.0, vec![1.0, -4.0 / 3.0], n, 0.75 * w.abs() * n as f64)
            }
        };
        Self {
            kind,
            dx,
            forward,
            near,
            series: Some(SeriesTail { start: 2, end }),
            truncation_count: end,
            tail_bound,
        }
    }

    pub fn kind(&self) -> DiscretizationKind {
        self.kind
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn prefactor(&self) -> f64 {
        self.kind.prefactor()
    }

    /// `prefactor * dx^{-4/3}`
    pub fn scale(&self) -> f64 {
        self.prefactor() * self.dx.powf(-4.0 / 3.0)
    }

    /// Dimensionless coefficient of `u_{j+1}`.
    pub fn forward(&self) -> f64 {
        self.forward
    }

    /// Number of retained series terms `A_dx`.
    pub fn truncation_count(&self) -> usize {
        self.truncation_count
    }

    /// Bound on the absolute mass of the discarded far weights.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Largest shift `l` with a stored weight.
    pub fn max_shift(&self) -> usize {
        match self.series {
            Some(s) => s.end,
            None => self.near.len() - 1,
        }
    }

    /// Dimensionless weight of `u_{j-l}`.
    pub fn weight(&self, l: usize) -> f64 {
        if l < self.near.len() {
            return self.near[l];
        }
        match self.series {
            Some(s) if l >= s.start && l <= s.end => match self.kind {
                DiscretizationKind::I1 => i1_telescoped(l),
                DiscretizationKind::I2 => (l as f64).powf(-7.0 / 3.0),
                DiscretizationKind::I3 => grunwald_weight(l),
            },
            _ => 0.0,
        }
    }

    /// Visit `(l, w_l)` for every stored shift in increasing order.
    pub fn for_each_weight(&self, max_shift: usize, mut f: impl FnMut(usize, f64)) {
        let last = self.max_shift().min(max_shift);
        for (l, &w) in self.near.iter().enumerate().take(last + 1) {
            f(l, w);
        }
        let Some(s) = self.series else { return };
        if last < s.start {
            return;
        }
        match self.kind {
            DiscretizationKind::I1 => (s.start..=last).for_each(|l| f(l, i1_telescoped(l))),
            DiscretizationKind::I2 => (s.start..=last).for_each(|l| {
                let lf = l as f64;
                f(l, 1.0 / (lf * lf * lf.cbrt()))
            }),
            DiscretizationKind::I3 => {
                let mut w = self.near[1];
                for l in s.start..=last {
                    w = grunwald_next(w, l);
                    f(l, w);
                }
            }
        }
    }

    /// Weights `w_0..=w_{min(max_shift, last)}`.
    pub fn weights_up_to(&self, max_shift: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.max_shift().min(max_shift) + 1);
        self.for_each_weight(max_shift, |_, w| out.push(w));
        out
    }

    /// Sum of all weights with shift `l ≡ r (mod modulus)`, compensated.
    /// `start` skips the first shifts (use 2 to fold only the far field).
    pub fn fold(&self, modulus: usize, start: usize) -> Vec<f64> {
        assert!(modulus > 0);
        let mut sum = vec![0.0; modulus];
        let mut comp = vec![0.0; modulus];
        self.for_each_weight(usize::MAX, |l, w| {
            if l < start {
                return;
            }
            let r = l % modulus;
            let t = sum[r] + w;
            if sum[r].abs() >= w.abs() {
                comp[r] += (sum[r] - t) + w;
            } else {
                comp[r] += (w - t) + sum[r];
            }
            sum[r] = t;
        });
        sum.iter().zip(&comp).map(|(s, c)| s + c).collect()
    }

    /// Far-field symbol `Σ_{l≥2} w_l e^{-ilθ}` by direct summation.
    pub fn far_symbol(&self, theta: f64) -> Complex64 {
        // exact phase every RESYNC terms, rotation in between
        const RESYNC: usize = 64;
        let step = Complex64::from_polar(1.0, -theta);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        let mut phase = Complex64::new(0.0, 0.0);
        self.for_each_weight(usize::MAX, |l, w| {
            if l < 2 {
                return;
            }
            if (l - 2) % RESYNC == 0 {
                phase = Complex64::from_polar(1.0, -(l as f64) * theta);
            } else {
                phase *= step;
            }
            let term = phase * w;
            let t = acc + term;
            comp += (acc - t) + term;
            acc = t;
        });
        acc + comp
    }

    /// Far-field symbol on the lattice `θ_m = 2πm/modulus`, m = 0..modulus.
    pub fn far_symbol_lattice(&self, modulus: usize) -> Vec<Complex64> {
        let folded = self.fold(modulus, 2);
        let mut buf: Vec<Complex64> = folded.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        let mut planner = rustfft::FftPlanner::new();
        planner.plan_fft_forward(modulus).process(&mut buf);
        buf
    }

    /// Evaluate `I_dx[f]` at a node from a sampler `f(offset)` returning
    /// `φ(x + offset dx)`.
    pub fn apply_at(&self, f: impl Fn(i64) -> f64) -> f64 {
        let mut acc = self.forward * f(1);
        let mut comp = 0.0;
        self.for_each_weight(usize::MAX, |l, w| {
            let term = w * f(-(l as i64));
            let t = acc + term;
            if acc.abs() >= term.abs() {
                comp += (acc - t) + term;
            } else {
                comp += (term - t) + acc;
            }
            acc = t;
        });
        self.scale() * (acc + comp)
    }

    /// Sum of all stored weights including the forward one. Zero (up to the
    /// discarded tail) when constants are annihilated.
    pub fn weight_sum(&self) -> f64 {
        let mut s = self.forward;
        self.for_each_weight(usize::MAX, |_, w| s += w);
        s
    }
}

/// Grünwald–Letnikov recurrence `w_l = w_{l-1} (l - 1 - 4/3) / l`.
pub(crate) fn grunwald_next(prev: f64, l: usize) -> f64 {
    let lf = l as f64;
    prev * (lf - 1.0 - 4.0 / 3.0) / lf
}

fn grunwald_weight(l: usize) -> f64 {
    (1..=l).fold(1.0, grunwald_next)
}

/// `(l+1)^{-1/3} - 2 l^{-1/3} + (l-1)^{-1/3}` for `l >= 2`, evaluated through
/// its asymptotic expansion for large `l` where the direct difference cancels.
pub fn i1_telescoped(l: usize) -> f64 {
    debug_assert!(l >= 2);
    let x = l as f64;
    if l < 1000 {
        return 1.0 / (x + 1.0).cbrt() - 2.0 / x.cbrt() + 1.0 / (x - 1.0).cbrt();
    }
    // Σ_k 2 f^{(2k)}(x) / (2k)!  with f = x^{-1/3}
    let inv2 = 1.0 / (x * x);
    let base = 4.0 / 9.0 / (x * x * x.cbrt());
    let t2 = (7.0 / 3.0) * (10.0 / 3.0) / 12.0;
    let t3 = t2 * (13.0 / 3.0) * (16.0 / 3.0) / 30.0;
    let t4 = t3 * (19.0 / 3.0) * (22.0 / 3.0) / 56.0;
    base * (1.0 + inv2 * (t2 + inv2 * (t3 + inv2 * t4)))
}

/// `Σ_{l>N} c_l = N^{-1/3} - (N+1)^{-1/3}` for the telescoped I1 weights.
pub fn i1_tail_mass(n: usize) -> f64 {
    let x = n as f64;
    if n < 1000 {
        return 1.0 / x.cbrt() - 1.0 / (x + 1.0).cbrt();
    }
    // f(x) - f(x+1) = -Σ f^{(k)}(x)/k!, f = x^{-1/3}
    let y = 1.0 / x;
    let lead = 1.0 / (3.0 * x * x.cbrt());
    lead * (1.0 - y * (2.0 / 3.0) * (1.0 - y * (7.0 / 9.0) * (1.0 - y * (10.0 / 12.0))))
}

fn i1_cutoff(tol: f64) -> usize {
    let mut n = ((3.0 * tol).powf(-0.75)).floor().max(2.0) as usize;
    while n > 2 && i1_tail_mass(n - 1) < tol {
        n -= 1;
    }
    while i1_tail_mass(n) >= tol {
        n += 1;
    }
    n
}
