//! Explicit time stepping for the linearised and nonlinear schemes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::model::{derive_groups, DimensionlessGroups, GridSpec, PhysicalParams};
use crate::nonlocal::{
    Boundary, CoefficientTable, ConvolutionMethod, DiscretizationKind, NonlocalOperator,
    TruncationPolicy,
};

/// Values beyond this magnitude count as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxKind {
    /// Linear advection `v u_x`, upwind for `v >= 0` and downwind otherwise.
    LinearUpwind,
    /// Engquist–Osher flux for `u²/2`.
    BurgersUpwind,
    /// Local Lax–Friedrichs flux for `u²/2`.
    LaxFriedrichs,
}

impl FluxKind {
    pub fn is_linear(self) -> bool {
        self == Self::LinearUpwind
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::LinearUpwind => "linear-upwind",
            Self::BurgersUpwind => "burgers-upwind",
            Self::LaxFriedrichs => "lax-friedrichs",
        }
    }
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FluxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "linear-upwind" | "linear" | "upwind" => Ok(Self::LinearUpwind),
            "burgers-upwind" | "burgers" | "engquist-osher" => Ok(Self::BurgersUpwind),
            "lax-friedrichs" | "lf" | "rusanov" => Ok(Self::LaxFriedrichs),
            other => Err(invalid("flux", format!("unknown flux `{other}`"))),
        }
    }
}

/// Engquist–Osher numerical flux for `f(u) = u²/2`.
pub fn engquist_osher(a: f64, b: f64) -> f64 {
    let p = a.max(0.0);
    let m = b.min(0.0);
    0.5 * (p * p + m * m)
}

/// Local Lax–Friedrichs numerical flux for `f(u) = u²/2`.
pub fn local_lax_friedrichs(a: f64, b: f64) -> f64 {
    let alpha = a.abs().max(b.abs());
    0.25 * (a * a + b * b) - 0.5 * alpha * (b - a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: DiscretizationKind,
    pub flux: FluxKind,
    pub params: PhysicalParams,
    pub grid: GridSpec,
    pub truncation: TruncationPolicy,
    pub boundary: Boundary,
    pub method: ConvolutionMethod,
}

impl SchemeConfig {
    /// Linear upwind scheme, causal boundary, full memory over the domain.
    pub fn linear(kind: DiscretizationKind, params: PhysicalParams, grid: GridSpec) -> Self {
        Self {
            kind,
            flux: FluxKind::LinearUpwind,
            params,
            grid,
            truncation: TruncationPolicy::Memory(grid.domain_length()),
            boundary: Boundary::Causal,
            method: ConvolutionMethod::Auto,
        }
    }

    pub fn groups(&self) -> DimensionlessGroups {
        derive_groups(&self.params, &self.grid)
    }
}

/// A scheme with its nonlocal operator prepared for repeated stepping.
#[derive(Debug)]
pub struct Stepper {
    config: SchemeConfig,
    table: CoefficientTable,
    operator: NonlocalOperator,
    /// `-η dt dx^{-4/3} prefactor`
    nonlocal_factor: f64,
}

impl Stepper {
    pub fn new(config: SchemeConfig) -> Result<Self> {
        let table = CoefficientTable::build(config.kind, config.truncation, config.grid.dx())?;
        Self::with_table(config, table)
    }

    /// Reuse an already built table (its `dx` must match the grid).
    pub fn with_table(config: SchemeConfig, table: CoefficientTable) -> Result<Self> {
        if table.kind() != config.kind
            || (table.dx() - config.grid.dx()).abs() > 1e-15 * config.grid.dx()
        {
            return Err(invalid(
                "table",
                "coefficient table does not match the scheme configuration",
            ));
        }
        let operator = NonlocalOperator::new(
            &table,
            config.grid.n_cells(),
            config.boundary,
            config.method,
        )?;
        let nonlocal_factor = -config.params.eta * config.grid.dt() * table.scale();
        Ok(Self {
            config,
            table,
            operator,
            nonlocal_factor,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn table(&self) -> &CoefficientTable {
        &self.table
    }

    pub fn operator(&self) -> &NonlocalOperator {
        &self.operator
    }

    /// One explicit step, `u -> out`, using `scratch` for the convolution.
    pub fn step_into(
        &self,
        u: &[f64],
        out: &mut [f64],
        scratch: &mut Vec<Complex64>,
    ) -> Result<()> {
        self.operator
            .apply_scaled_with(u, self.nonlocal_factor, out, scratch)?;
        let n = u.len();
        let periodic = self.config.boundary == Boundary::Periodic;
        let at = |j: isize| -> f64 {
            if j >= 0 && (j as usize) < n {
                u[j as usize]
            } else if periodic {
                u[j.rem_euclid(n as isize) as usize]
            } else {
                0.0
            }
        };
        let grid = &self.config.grid;
        let lambda = grid.dt() / grid.dx();
        let half_df = self.config.params.epsilon * grid.dt() / (grid.dx() * grid.dx());
        match self.config.flux {
            FluxKind::LinearUpwind => {
                let cr = self.config.params.v * lambda;
                for (j, o) in out.iter_mut().enumerate() {
                    let j = j as isize;
                    let (l, c, r) = (at(j - 1), at(j), at(j + 1));
                    let adv = if cr >= 0.0 {
                        cr * (c - l)
                    } else {
                        cr * (r - c)
                    };
                    *o += c - adv + half_df * ((r - c) + (l - c));
                }
            }
            flux => {
                let numerical = match flux {
                    FluxKind::BurgersUpwind => engquist_osher,
                    _ => local_lax_friedrichs,
                };
                for (j, o) in out.iter_mut().enumerate() {
                    let j = j as isize;
                    let (l, c, r) = (at(j - 1), at(j), at(j + 1));
                    let df = numerical(c, r) - numerical(l, c);
                    *o += c - lambda * df + half_df * ((r - c) + (l - c));
                }
            }
        }
        Ok(())
    }

    /// One step on a field; the time advances by `dt`.
    pub fn step(&self, u: &Field) -> Result<Field> {
        check_grid(u, &self.config)?;
        let mut out = vec![0.0; u.len()];
        self.step_into(u.values(), &mut out, &mut Vec::new())?;
        Ok(Field::from_parts(
            out,
            *u.grid(),
            u.time() + self.config.grid.dt(),
        ))
    }

    /// Coefficients `a_l` of the linear step `u_j -> Σ_l a_l u_{j-l}` with
    /// `l = -1` first, then `l = 0, 1, ...` up to `max_shift` (unfolded).
    pub fn linear_coefficients(&self, max_shift: usize) -> Vec<f64> {
        let g = self.config.groups();
        let p = self.table.prefactor();
        let mut a = self.table.weights_up_to(max_shift);
        a.iter_mut().for_each(|w| *w *= -g.fo * p);
        a.resize(a.len().max(2), 0.0);
        let mut row = Vec::with_capacity(a.len() + 1);
        row.push(0.5 * g.df - g.fo * p * self.table.forward());
        row.extend(a);
        row[1] += 1.0 - g.df;
        row[2] += 0.5 * g.df;
        if g.cr >= 0.0 {
            row[1] -= g.cr;
            row[2] += g.cr;
        } else {
            row[0] -= g.cr;
            row[1] += g.cr;
        }
        row
    }
}

fn check_grid(u: &Field, config: &SchemeConfig) -> Result<()> {
    if u.len() != config.grid.n_cells() {
        return Err(Error::LengthMismatch {
            expected: config.grid.n_cells(),
            got: u.len(),
        });
    }
    Ok(())
}

/// One step of the linearised scheme.
pub fn linear_step(u: &Field, config: &SchemeConfig) -> Result<Field> {
    if !config.flux.is_linear() {
        return Err(invalid(
            "flux",
            "linear_step requires the linear upwind flux",
        ));
    }
    Stepper::new(*config)?.step(u)
}

/// One step of the nonlinear scheme; `params.v` is not used.
pub fn nonlinear_step(u: &Field, config: &SchemeConfig) -> Result<Field> {
    if config.flux.is_linear() {
        return Err(invalid("flux", "nonlinear_step requires a Burgers flux"));
    }
    let out = Stepper::new(*config)?.step(u)?;
    if !within_bounds(out.values()) {
        return Err(Error::BlowUp {
            step: 1,
            time: out.time(),
        });
    }
    Ok(out)
}

fn within_bounds(values: &[f64]) -> bool {
    values
        .iter()
        .all(|v| v.is_finite() && v.abs() <= BLOW_UP_THRESHOLD)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpInfo {
    pub step: usize,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    pub config: SchemeConfig,
    /// Steps completed without exceeding the blow-up threshold.
    pub steps_completed: usize,
    pub blow_up: Option<BlowUpInfo>,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.snapshots
            .last()
            .expect("trajectory holds the initial field")
    }

    pub fn is_complete(&self) -> bool {
        self.blow_up.is_none()
    }

    /// The final field, or the blow-up error.
    pub fn into_final(mut self) -> Result<Field> {
        match self.blow_up {
            Some(b) => Err(Error::BlowUp {
                step: b.step,
                time: b.time,
            }),
            None => Ok(self
                .snapshots
                .pop()
                .expect("trajectory holds the initial field")),
        }
    }
}

/// Step `u0` for `grid.n_steps()` steps, snapshotting every `snapshot_every`
/// steps (0 keeps only the initial and final fields).
pub fn integrate(u0: &Field, config: &SchemeConfig, snapshot_every: usize) -> Result<Trajectory> {
    Stepper::new(*config)?.integrate(u0, snapshot_every)
}

impl Stepper {
    pub fn integrate(&self, u0: &Field, snapshot_every: usize) -> Result<Trajectory> {
        self.integrate_steps(u0, self.config.grid.n_steps(), snapshot_every)
    }

    pub fn integrate_steps(
        &self,
        u0: &Field,
        n_steps: usize,
        snapshot_every: usize,
    ) -> Result<Trajectory> {
        check_grid(u0, &self.config)?;
        let dt = self.config.grid.dt();
        let mut snapshots = vec![u0.clone()];
        let mut cur = u0.values().to_vec();
        let mut next = vec![0.0; cur.len()];
        let mut scratch = Vec::new();
        let t0 = u0.time();
        let mut blow_up = None;
        let mut done = 0;
        for step in 1..=n_steps {
            self.step_into(&cur, &mut next, &mut scratch)?;
            std::mem::swap(&mut cur, &mut next);
            let time = t0 + step as f64 * dt;
            if !within_bounds(&cur) {
                blow_up = Some(BlowUpInfo { step, time });
                break;
            }
            done = step;
            let due = snapshot_every > 0 && step % snapshot_every == 0;
            if due || step == n_steps {
                snapshots.push(Field::from_parts(cur.clone(), *u0.grid(), time));
            }
        }
        Ok(Trajectory {
            snapshots,
            config: self.config,
            steps_completed: done,
            blow_up,
        })
    }
}

/// `height cos²(π (x - center) / width)` on `|x - center| < width / 2`, zero
/// elsewhere. A width below one cell gives a spike at the nearest node.
pub fn make_initial_bump(grid: &GridSpec, center: f64, width: f64, height: f64) -> Result<Field> {
    if !(center.is_finite() && width.is_finite() && height.is_finite()) || width < 0.0 {
        return Err(invalid(
            "initial",
            "center, width, height must be finite with width >= 0",
        ));
    }
    let d = grid.domain_length();
    if center - 0.5 * width < 0.0 || center + 0.5 * width > d - grid.dx() * 0.5 {
        return Err(invalid(
            "initial",
            format!(
                "bump support [{}, {}] exceeds the domain [0, {d})",
                center - 0.5 * width,
                center + 0.5 * width
            ),
        ));
    }
    let n = grid.n_cells();
    let mut values = vec![0.0; n];
    if width < grid.dx() {
        let j = (center / grid.dx()).round() as usize;
        values[j.min(n - 1)] = height;
    } else {
        for (j, v) in values.iter_mut().enumerate() {
            let s = (grid.x(j) - center) / width;
            if s.abs() < 0.5 {
                let c = (std::f64::consts::PI * s).cos();
                *v = height * c * c;
            }
        }
    }
    Field::new(values, *grid, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Constants;
    use approx::assert_relative_eq;

    fn config(kind: DiscretizationKind, v: f64, eps: f64, eta: f64, n: usize) -> SchemeConfig {
        let grid = GridSpec::new(0.05, 1e-3, n, 0.1).unwrap();
        SchemeConfig::linear(kind, PhysicalParams::new(v, eps, eta).unwrap(), grid)
    }

    #[test]
    fn constants_are_preserved_in_the_interior() {
        for kind in DiscretizationKind::ALL {
            let mut cfg = config(kind, 1.0, 0.5, 8.0, 400);
            cfg.truncation = TruncationPolicy::Terms(100);
            let u = Field::from_fn(cfg.grid, |_| 2.5).unwrap();
            let out = linear_step(&u, &cfg).unwrap();
            // I3 partial sums leave an O(A^{-1/3}) residue
            let tol = if kind == DiscretizationKind::I3 {
                0.05
            } else {
                1e-11
            };
            for &v in &out.values()[105..399] {
                assert!((v - 2.5).abs() < tol, "{kind}: {v}");
            }
        }
    }

    #[test]
    fn disabled_operators_give_identity() {
        for flux in [
            FluxKind::LinearUpwind,
            FluxKind::BurgersUpwind,
            FluxKind::LaxFriedrichs,
        ] {
            let mut cfg = config(DiscretizationKind::I2, 0.0, 0.0, 0.0, 50);
            cfg.flux = flux;
            let u = Field::from_fn(cfg.grid, |x| 1e-3 * (7.0 * x).sin()).unwrap();
            let out = Stepper::new(cfg).unwrap().step(&u).unwrap();
            if flux.is_linear() {
                assert_eq!(out.values(), u.values());
            } else {
                // quadratic flux only
                for (a, b) in out.values().iter().zip(u.values()) {
                    assert!((a - b).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn linear_row_sums_to_one() {
        for kind in [DiscretizationKind::I1, DiscretizationKind::I2] {
            for v in [1.0, -1.0] {
                let cfg = config(kind, v, 0.5, 8.0, 64);
                let s = Stepper::new(cfg).unwrap();
                let row = s.linear_coefficients(usize::MAX);
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() < 1e-8, "{kind} v={v}: {sum}");
            }
        }
    }

    #[test]
    fn i1_step_matches_telescoped_expansion() {
        let mut cfg = config(DiscretizationKind::I1, 1.0, 0.5, 8.0, 80);
        cfg.truncation = TruncationPolicy::TailTolerance(1e-10);
        cfg.method = ConvolutionMethod::Naive;
        let g = cfg.groups();
        let u = Field::from_fn(cfg.grid, |x| (3.0 * x).sin() + x * x).unwrap();
        let out = linear_step(&u, &cfg).unwrap();
        let uv = u.values();
        let c = 2f64.powf(-1.0 / 3.0);
        for j in 0..79 {
            let at = |k: isize| if k >= 0 { uv[k as usize] } else { 0.0 };
            let j = j as isize;
            let mut expected = 0.5 * g.df * at(j + 1)
                + (1.0 - g.cr - g.df - g.fo) * at(j)
                + (g.cr + 0.5 * g.df + (2.0 - c) * g.fo) * at(j - 1);
            for l in 2..=(j as usize) {
                let lf = l as f64;
                let cl = (lf + 1.0).powf(-1.0 / 3.0) - 2.0 * lf.powf(-1.0 / 3.0)
                    + (lf - 1.0).powf(-1.0 / 3.0);
                expected -= g.fo * cl * at(j - l as isize);
            }
            assert!(
                (out.values()[j as usize] - expected).abs() < 1e-13 * 10.0,
                "j={j}"
            );
        }
    }

    #[test]
    fn i2_step_matches_zeta_expansion() {
        let mut cfg = config(DiscretizationKind::I2, 1.0, 0.5, 8.0, 60);
        cfg.method = ConvolutionMethod::Fft;
        cfg.truncation = TruncationPolicy::TailTolerance(1e-10);
        let g = cfg.groups();
        let k = Constants::get();
        let q = 4.0 / 9.0 * g.fo;
        let u = Field::from_fn(cfg.grid, |x| (-(x - 1.0).powi(2) * 4.0).exp()).unwrap();
        let out = linear_step(&u, &cfg).unwrap();
        let uv = u.values();
        let at = |k: isize| {
            if (0..60).contains(&k) {
                uv[k as usize]
            } else {
                0.0
            }
        };
        for j in 0..60isize {
            let mut expected = (0.5 * g.df - q * 0.5 * k.zeta_four_thirds) * at(j + 1)
                + (1.0 - g.cr - g.df + q * k.zeta_seven_thirds) * at(j)
                + (g.cr + 0.5 * g.df + q * (0.5 * k.zeta_four_thirds - 1.0)) * at(j - 1);
            for l in 2..=(j.max(0) as usize) {
                expected -= q * (l as f64).powf(-7.0 / 3.0) * at(j - l as isize);
            }
            assert!((out.values()[j as usize] - expected).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn nonlinear_zero_and_constant_are_fixed() {
        for flux in [FluxKind::BurgersUpwind, FluxKind::LaxFriedrichs] {
            let mut cfg = config(DiscretizationKind::I1, 0.0, 0.5, 8.0, 64);
            cfg.flux = flux;
            let zero = nonlinear_step(&Field::zeros(cfg.grid), &cfg).unwrap();
            assert!(zero.values().iter().all(|&v| v == 0.0));
            cfg.boundary = Boundary::Periodic;
            let c = Field::from_fn(cfg.grid, |_| 0.7).unwrap();
            let out = nonlinear_step(&c, &cfg).unwrap();
            for &v in out.values() {
                assert_relative_eq!(v, 0.7, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn nonlinear_reduces_to_linear_at_small_amplitude() {
        let mut lin = config(DiscretizationKind::I2, 0.0, 0.5, 8.0, 64);
        lin.boundary = Boundary::Periodic;
        let mut nl = lin;
        nl.flux = FluxKind::BurgersUpwind;
        let mut diffs = Vec::new();
        for a in [1e-3, 1e-4] {
            let u = Field::from_fn(lin.grid, |x| {
                a * (2.0 * std::f64::consts::PI * x / 3.2).sin()
            })
            .unwrap();
            let l = linear_step(&u, &lin).unwrap();
            let n = nonlinear_step(&u, &nl).unwrap();
            let d = l
                .values()
                .iter()
                .zip(n.values())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            diffs.push(d);
            assert!(d < 10.0 * a * a, "a={a}: {d}");
        }
        // second order in amplitude
        assert!((diffs[0] / diffs[1] - 100.0).abs() < 1.0, "{diffs:?}");
    }

    #[test]
    fn burgers_upwind_respects_max_principle_without_nonlocal_term() {
        let grid = GridSpec::new(0.02, 1e-4, 200, 0.2).unwrap();
        let mut cfg = SchemeConfig::linear(
            DiscretizationKind::I1,
            PhysicalParams::new(0.0, 0.5, 0.0).unwrap(),
            grid,
        );
        cfg.flux = FluxKind::BurgersUpwind;
        let u0 = make_initial_bump(&grid, 2.0, 1.5, 1.0).unwrap();
        let traj = integrate(&u0, &cfg, 100).unwrap();
        assert!(traj.is_complete());
        for snap in &traj.snapshots {
            assert!(snap
                .values()
                .iter()
                .all(|&v| (-1e-14..=1.0 + 1e-14).contains(&v)));
        }
    }

    #[test]
    fn zero_steps_keeps_only_initial_field() {
        let cfg = config(DiscretizationKind::I1, 1.0, 0.5, 8.0, 64);
        let u0 = make_initial_bump(&cfg.grid, 1.6, 0.8, 1.0).unwrap();
        let traj = Stepper::new(cfg)
            .unwrap()
            .integrate_steps(&u0, 0, 1)
            .unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0], u0);
    }

    #[test]
    fn snapshot_times_are_multiples_of_dt() {
        let cfg = config(DiscretizationKind::I2, 1.0, 0.5, 8.0, 64);
        let u0 = make_initial_bump(&cfg.grid, 1.6, 0.8, 1.0).unwrap();
        let traj = integrate(&u0, &cfg, 7).unwrap();
        let dt = cfg.grid.dt();
        for w in traj.snapshots.windows(2) {
            assert!(w[1].time() > w[0].time());
        }
        for s in &traj.snapshots {
            let k = s.time() / dt;
            assert!((k - k.round()).abs() < 1e-9);
        }
        assert_relative_eq!(traj.last().time(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn bump_construction() {
        let grid = GridSpec::new(0.1, 0.01, 40, 1.0).unwrap();
        let d = grid.domain_length();
        let b = make_initial_bump(&grid, d / 2.0, d / 4.0, 1.0).unwrap();
        assert_eq!(b.values()[20], 1.0);
        for (j, &v) in b.values().iter().enumerate() {
            if (grid.x(j) - d / 2.0).abs() >= d / 8.0 {
                assert_eq!(v, 0.0);
            }
        }
        let zero = make_initial_bump(&grid, 2.0, 1.0, 0.0).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let spike = make_initial_bump(&grid, 2.0, 1e-9, 3.0).unwrap();
        assert_eq!(spike.values().iter().filter(|&&v| v != 0.0).count(), 1);
        assert!(spike.max_abs() <= 3.0);
        assert!(make_initial_bump(&grid, 0.2, 1.0, 1.0).is_err());
    }

    #[test]
    fn flux_kind_parses() {
        assert_eq!(
            "burgers".parse::<FluxKind>().unwrap(),
            FluxKind::BurgersUpwind
        );
        assert_eq!(
            "Lax_Friedrichs".parse::<FluxKind>().unwrap(),
            FluxKind::LaxFriedrichs
        );
        assert!("roe".parse::<FluxKind>().is_err());
    }
}
