//! Parameter containers, dimensionless groups and the special-function
//! constants shared by every other module.

use std::sync::OnceLock;

use crate::error::{invalid, Result};

/// Coefficients of the continuous model `u_t + (u²/2)_x + η I[u] - ε u_xx = 0`
/// (or its linearisation with advection speed `v`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub v: f64,
    pub epsilon: f64,
    pub eta: f64,
}

impl PhysicalParams {
    /// Zero coefficients are accepted so the identity scheme can be expressed;
    /// operations that need strictly positive `ε`, `η` check for themselves.
    pub fn new(v: f64, epsilon: f64, eta: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(invalid("v", "must be finite"));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(invalid("epsilon", format!("must be >= 0, got {epsilon}")));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(invalid("eta", format!("must be >= 0, got {eta}")));
        }
        Ok(Self { v, epsilon, eta })
    }

    pub(crate) fn require_positive(&self) -> Result<()> {
        if self.epsilon <= 0.0 {
            return Err(invalid("epsilon", "must be > 0"));
        }
        if self.eta <= 0.0 {
            return Err(invalid("eta", "must be > 0"));
        }
        Ok(())
    }
}

/// Uniform space/time discretisation of `[0, D] x [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dx: f64,
    dt: f64,
    n_cells: usize,
    t_final: f64,
}

impl GridSpec {
    pub fn new(dx: f64, dt: f64, n_cells: usize, t_final: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(invalid("dx", format!("must be > 0, got {dx}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", format!("must be > 0, got {dt}")));
        }
        if n_cells < 2 {
            return Err(invalid("n_cells", format!("must be > 1, got {n_cells}")));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(invalid("t_final", format!("must be > 0, got {t_final}")));
        }
        if dt > t_final {
            return Err(invalid(
                "dt",
                format!("dt = {dt} exceeds t_final = {t_final}"),
            ));
        }
        Ok(Self {
            dx,
            dt,
            n_cells,
            t_final,
        })
    }

    /// Grid with `n_cells` cells covering a domain of the given length.
    pub fn from_domain(domain_length: f64, n_cells: usize, dt: f64, t_final: f64) -> Result<Self> {
        if n_cells < 2 {
            return Err(invalid("n_cells", format!("must be > 1, got {n_cells}")));
        }
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(invalid("domain_length", "must be > 0"));
        }
        Self::new(domain_length / n_cells as f64, dt, n_cells, t_final)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn domain_length(&self) -> f64 {
        self.dx * self.n_cells as f64
    }

    /// Number of whole time steps needed to reach `t_final`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    /// Node coordinate `x_j = j dx`.
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(self.dx, dt, self.n_cells, self.t_final)
    }
}

/// Courant, diffusion and fractional numbers. These are all the spectral
/// analysis needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    /// `v dt / dx`
    pub cr: f64,
    /// `2 ε dt / dx²`
    pub df: f64,
    /// `η dt / dx^{4/3}`
    pub fo: f64,
}

impl DimensionlessGroups {
    pub fn new(cr: f64, df: f64, fo: f64) -> Self {
        Self { cr, df, fo }
    }
}

pub fn derive_groups(params: &PhysicalParams, grid: &GridSpec) -> DimensionlessGroups {
    let dx = grid.dx();
    let dt = grid.dt();
    DimensionlessGroups {
        cr: params.v * dt / dx,
        df: 2.0 * params.epsilon * dt / (dx * dx),
        fo: params.eta * dt / dx.powf(4.0 / 3.0),
    }
}

/// Special-function values used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub gamma_two_thirds: f64,
    pub zeta_four_thirds: f64,
    pub zeta_seven_thirds: f64,
    /// `2π² Γ(2/3)` as printed for the cyclic-frequency symbol.
    pub a_i: f64,
    /// `2π² √3 Γ(2/3)`
    pub b_i: f64,
}

impl Constants {
    /// Process-wide constants, computed on first use.
    pub fn get() -> &'static Constants {
        static CONSTANTS: OnceLock<Constants> = OnceLock::new();
        CONSTANTS.get_or_init(evaluate_constants)
    }
}

pub fn evaluate_constants() -> Constants {
    let g = statrs::function::gamma::gamma(2.0 / 3.0);
    let two_pi_sq = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
    Constants {
        gamma_two_thirds: g,
        zeta_four_thirds: zeta(4.0 / 3.0),
        zeta_seven_thirds: zeta(7.0 / 3.0),
        a_i: two_pi_sq * g,
        b_i: two_pi_sq * 3f64.sqrt() * g,
    }
}

/// `2 - 2^{-1/3}`: weight mass of the `u_{j-1}` coefficient of the telescoped I1 stencil.
pub fn lambda_one() -> f64 {
    2.0 - 2f64.powf(-1.0 / 3.0)
}

/// `(4/9)(ζ(4/3) - 1)`
pub fn lambda_two() -> f64 {
    4.0 / 9.0 * (Constants::get().zeta_four_thirds - 1.0)
}

/// `(4/3) Γ(2/3)`: the analogous weight for the Grünwald–Letnikov stencil.
pub fn lambda_three() -> f64 {
    4.0 / 3.0 * Constants::get().gamma_two_thirds
}

// B_{2k} / (2k)! for k = 1..=8
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Riemann zeta for real `s > 1` by Euler–Maclaurin summation: direct terms
/// up to `N - 1`, the integral tail `N^{1-s}/(s-1)`, the half endpoint term
/// and eight Bernoulli corrections.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta(s) requires s > 1");
    const N: usize = 16;
    let n = N as f64;
    let head: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    let mut total = head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) times N^{-s-2k+1}
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if k > 0 {
            let m = 2.0 * k as f64;
            rising *= (s + m - 1.0) * (s + m);
            power /= n * n;
        }
        total += coeff * rising * power;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zeta_matches_known_values() {
        assert_relative_eq!(
            zeta(2.0),
            std::f64::consts::PI.powi(2) / 6.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            zeta(4.0),
            std::f64::consts::PI.powi(4) / 90.0,
            max_relative = 1e-14
        );
        // high-precision reference values
        assert_relative_eq!(zeta(4.0 / 3.0), 3.600_937_750_458_862, max_relative = 1e-12);
        assert_relative_eq!(zeta(7.0 / 3.0), 1.415_155_609_445_983, max_relative = 1e-12);
    }

    #[test]
    fn constants_match_quoted_approximations() {
        let c = Constants::get();
        assert!((3.600..=3.602).contains(&c.zeta_four_thirds));
        assert!((1.414..=1.416).contains(&c.zeta_seven_thirds));
        assert!((c.zeta_four_thirds - 3.601).abs() < 5e-4);
        assert!((c.zeta_seven_thirds - 1.415).abs() < 5e-4);
        assert_relative_eq!(c.b_i / c.a_i, 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn gamma_two_thirds_agrees_with_quadrature() {
        // Γ(2/3) = ∫ t^{-1/3} e^{-t} dt = ∫ 3 s e^{-s³} ds with t = s³;
        // composite Simpson on [0, 6], the tail beyond is below e^{-216}.
        let n = 20_000;
        let h = 6.0 / n as f64;
        let f = |s: f64| 3.0 * s * (-s * s * s).exp();
        let mut acc = f(0.0) + f(6.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        let quad = acc * h / 3.0;
        assert!((quad - 1.354_117_939_4).abs() < 1e-10);
        assert!((Constants::get().gamma_two_thirds - quad).abs() < 1e-11);
    }

    #[test]
    fn strong_nonlocal_groups() {
        let p = PhysicalParams::new(1.0, 0.5, 8.0).unwrap();
        let g = GridSpec::new(0.05, 0.001, 200, 1.0).unwrap();
        let d = derive_groups(&p, &g);
        assert_relative_eq!(d.cr, 0.02, max_relative = 1e-12);
        assert_relative_eq!(d.df, 0.4, max_relative = 1e-12);
        assert_relative_eq!(d.fo, 8.0 * 0.001 / 0.05f64.powf(4.0 / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn coarse_grid_groups() {
        let p = PhysicalParams::new(1.0, 0.1, 1.0).unwrap();
        let g = GridSpec::new(0.5, 0.01, 40, 1.0).unwrap();
        let d = derive_groups(&p, &g);
        assert_relative_eq!(d.cr, 0.02, max_relative = 1e-12);
        // 2 * 0.1 * 0.01 / 0.25
        assert_relative_eq!(d.df, 0.008, max_relative = 1e-12);
        assert!((d.fo - 0.0252).abs() < 1e-4);
    }

    #[test]
    fn zero_advection_gives_zero_courant() {
        let p = PhysicalParams::new(0.0, 3.0, 7.0).unwrap();
        let g = GridSpec::new(0.3, 0.02, 10, 1.0).unwrap();
        assert_eq!(derive_groups(&p, &g).cr, 0.0);
    }

    #[test]
    fn groups_are_homogeneous_in_dt() {
        let p = PhysicalParams::new(0.7, 0.2, 1.3).unwrap();
        let g = GridSpec::new(0.1, 0.001, 10, 1.0).unwrap();
        let base = derive_groups(&p, &g);
        let scaled = derive_groups(&p, &g.with_dt(0.0035).unwrap());
        let lambda = 3.5;
        assert_relative_eq!(scaled.cr, lambda * base.cr, max_relative = 1e-13);
        assert_relative_eq!(scaled.df, lambda * base.df, max_relative = 1e-13);
        assert_relative_eq!(scaled.fo, lambda * base.fo, max_relative = 1e-13);
    }

    #[test]
    fn partial_sums_of_l_pow_minus_seven_thirds_approach_zeta_minus_one() {
        let partial: f64 = (2..200_000u64)
            .rev()
            .map(|l| (l as f64).powf(-7.0 / 3.0))
            .sum();
        let target = Constants::get().zeta_seven_thirds - 1.0;
        assert!((target - 0.415).abs() < 1e-3);
        assert!(partial < target && target - partial < 1e-6);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(GridSpec::new(0.0, 0.1, 10, 1.0).is_err());
        assert!(GridSpec::new(0.1, -0.1, 10, 1.0).is_err());
        assert!(GridSpec::new(0.1, 0.1, 1, 1.0).is_err());
        assert!(GridSpec::new(0.1, 2.0, 10, 1.0).is_err());
        assert!(GridSpec::from_domain(1.0, 0, 0.1, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -0.1, 1.0).is_err());
    }
}
