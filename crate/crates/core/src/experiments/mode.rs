//! Single Fourier mode stepped through the periodic scheme against `g(θ)^n`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::model::{DimensionlessGroups, GridSpec, PhysicalParams};
use crate::nonlocal::{Boundary, ConvolutionMethod, DiscretizationKind, TruncationPolicy};
use crate::schemes::{FluxKind, SchemeConfig, Stepper};
use crate::spectral::assemble;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDeviation {
    pub m: usize,
    pub theta: f64,
    pub g: Complex64,
    /// `max_{n, j} |u^n_j - g^n e^{iθj}|`.
    pub raw_deviation: f64,
    /// The raw deviation at step `n` divided by `max(1, ρ^n)`, `ρ = max_m |g_m|`
    /// the norm of the (normal, circulant) step matrix. Rounding errors in
    /// growing modes are amplified by `ρ^n`, so this is the attainable measure
    /// when the step is not a contraction.
    pub max_deviation: f64,
    /// Largest imaginary part seen when the mode itself is real (`θ ∈ {0, π}`).
    pub max_imag: Option<f64>,
}

/// A periodic stepper and its amplification factors on the grid lattice.
#[derive(Debug)]
pub struct ModeOracle {
    stepper: Stepper,
    gains: Vec<Complex64>,
    radius: f64,
}

impl ModeOracle {
    /// Groups are realised with `dx = dt = 1`, so `v = Cr`, `ε = Df/2`, `η = Fo`.
    pub fn new(
        kind: DiscretizationKind,
        groups: &DimensionlessGroups,
        n: usize,
        truncation: TruncationPolicy,
    ) -> Result<Self> {
        let params = PhysicalParams::new(groups.cr, 0.5 * groups.df, groups.fo)?;
        let grid = GridSpec::new(1.0, 1.0, n, 1.0)?;
        let config = SchemeConfig {
            kind,
            flux: FluxKind::LinearUpwind,
            params,
            grid,
            truncation,
            boundary: Boundary::Periodic,
            method: ConvolutionMethod::Auto,
        };
        let stepper = Stepper::new(config)?;
        let far = stepper.table().far_symbol_lattice(n);
        let table = stepper.table();
        let gains = (0..n)
            .map(|m| assemble(table, groups, 2.0 * PI * m as f64 / n as f64, far[m]))
            .collect::<Vec<Complex64>>();
        let radius = gains.iter().map(|g| g.norm()).fold(0.0, f64::max);
        Ok(Self {
            stepper,
            gains,
            radius,
        })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// `max_m |g(θ_m)|`.
    pub fn spectral_radius(&self) -> f64 {
        self.radius
    }

    pub fn gain(&self, m: usize) -> Complex64 {
        self.gains[m % self.gains.len()]
    }

    /// Step the real and imaginary parts of `e^{iθ_m j}` for `n_steps` steps.
    pub fn run(&self, m: usize, n_steps: usize) -> Result<ModeDeviation> {
        let n = self.len();
        if m >= n {
            return Err(invalid("m", format!("mode index {m} outside 0..{n}")));
        }
        let theta = 2.0 * PI * m as f64 / n as f64;
        let g = self.gains[m];
        let mode: Vec<Complex64> = (0..n).map(|j| unit_root(m * j % n, n)).collect();
        let mut re: Vec<f64> = mode.iter().map(|z| z.re).collect();
        let mut im: Vec<f64> = mode.iter().map(|z| z.im).collect();
        let mut next = vec![0.0; n];
        let mut scratch = Vec::new();
        let real_mode = (2 * m).is_multiple_of(n);
        let mut max_imag = 0.0f64;
        let mut max_deviation = 0.0f64;
        let mut raw_deviation = 0.0f64;
        let mut gn = Complex64::new(1.0, 0.0);
        let mut rn = 1.0f64;
        for _ in 0..n_steps {
            self.stepper.step_into(&re, &mut next, &mut scratch)?;
            std::mem::swap(&mut re, &mut next);
            self.stepper.step_into(&im, &mut next, &mut scratch)?;
            std::mem::swap(&mut im, &mut next);
            gn *= g;
            rn *= self.radius;
            let norm = rn.max(1.0);
            for j in 0..n {
                let d = (Complex64::new(re[j], im[j]) - gn * mode[j]).norm();
                raw_deviation = raw_deviation.max(d);
                max_deviation = max_deviation.max(d / norm);
                if real_mode {
                    max_imag = max_imag.max(im[j].abs());
                }
            }
        }
        Ok(ModeDeviation {
            m,
            theta,
            g,
            raw_deviation,
            max_deviation,
            max_imag: real_mode.then_some(max_imag),
        })
    }

    /// Every mode index of the grid.
    pub fn run_all(&self, n_steps: usize) -> Result<Vec<ModeDeviation>> {
        (0..self.len()).map(|m| self.run(m, n_steps)).collect()
    }
}

/// `e^{2πik/n}` with exact values on the axes.
fn unit_root(k: usize, n: usize) -> Complex64 {
    if (4 * k).is_multiple_of(n) {
        const AXES: [Complex64; 4] = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        return AXES[4 * k / n];
    }
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// Max deviation of mode `m` after `n_steps` steps on an `n`-point periodic grid.
pub fn mode_oracle(
    kind: DiscretizationKind,
    groups: &DimensionlessGroups,
    m: usize,
    n_steps: usize,
    n: usize,
) -> Result<ModeDeviation> {
    ModeOracle::new(kind, groups, n, TruncationPolicy::default())?.run(m, n_steps)
}
