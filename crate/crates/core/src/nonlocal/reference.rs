//! Quadrature oracle for the continuous operator.
//!
//! Two independent formulas are evaluated:
//!
//! ```text
//! I[φ](x) = ∫_0^1 3 s φ''(x - s³) ds + φ'(x-1) - φ(x-1)/3 + 4/9 ∫_1^∞ ξ^{-7/3} φ(x-ξ) dξ
//! I[φ](x) = 4/9 ∫_0^∞ (φ(x-ξ) - φ(x) + φ'(x) ξ) ξ^{-7/3} dξ
//! ```
//!
//! The first is the singular convolution after the substitution `ξ = s³` on
//! `[0, 1]` and two integrations by parts on `[1, ∞)`.

use crate::error::{Error, Result};

/// Smooth test function with derivatives through fourth order.
pub trait TestFunction: Sync {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
    fn d3(&self, x: f64) -> f64;
    fn d4(&self, x: f64) -> f64;
    /// `sup |φ|` when finite.
    fn sup_abs(&self) -> Option<f64>;
}

/// `height * exp(-(x - center)² / (2 width²))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

impl Gaussian {
    fn hermite(&self, x: f64) -> (f64, f64) {
        let y = (x - self.center) / self.width;
        (y, self.height * (-0.5 * y * y).exp())
    }
}

impl TestFunction for Gaussian {
    fn value(&self, x: f64) -> f64 {
        self.hermite(x).1
    }
    fn d1(&self, x: f64) -> f64 {
        let (y, e) = self.hermite(x);
        -y * e / self.width
    }
    fn d2(&self, x: f64) -> f64 {
        let (y, e) = self.hermite(x);
        (y * y - 1.0) * e / self.width.powi(2)
    }
    fn d3(&self, x: f64) -> f64 {
        let (y, e) = self.hermite(x);
        -(y * y * y - 3.0 * y) * e / self.width.powi(3)
    }
    fn d4(&self, x: f64) -> f64 {
        let (y, e) = self.hermite(x);
        let y2 = y * y;
        (y2 * y2 - 6.0 * y2 + 3.0) * e / self.width.powi(4)
    }
    fn sup_abs(&self) -> Option<f64> {
        Some(self.height.abs())
    }
}

/// `amplitude * cos(k x + phase)` with angular wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub k: f64,
    pub phase: f64,
    pub amplitude: f64,
}

impl TestFunction for Cosine {
    fn value(&self, x: f64) -> f64 {
        self.amplitude * (self.k * x + self.phase).cos()
    }
    fn d1(&self, x: f64) -> f64 {
        -self.amplitude * self.k * (self.k * x + self.phase).sin()
    }
    fn d2(&self, x: f64) -> f64 {
        -self.amplitude * self.k.powi(2) * (self.k * x + self.phase).cos()
    }
    fn d3(&self, x: f64) -> f64 {
        self.amplitude * self.k.powi(3) * (self.k * x + self.phase).sin()
    }
    fn d4(&self, x: f64) -> f64 {
        self.amplitude * self.k.powi(4) * (self.k * x + self.phase).cos()
    }
    fn sup_abs(&self) -> Option<f64> {
        Some(self.amplitude.abs())
    }
}

/// `slope * x + intercept`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl TestFunction for Affine {
    fn value(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
    fn d1(&self, _: f64) -> f64 {
        self.slope
    }
    fn d2(&self, _: f64) -> f64 {
        0.0
    }
    fn d3(&self, _: f64) -> f64 {
        0.0
    }
    fn d4(&self, _: f64) -> f64 {
        0.0
    }
    fn sup_abs(&self) -> Option<f64> {
        (self.slope == 0.0).then_some(self.intercept.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

const MAX_INTERVALS: usize = 50_000;

struct Interval {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Adaptive Gauss–Kronrod 7/15 on `[a, b]` to absolute tolerance `tol`.
pub(crate) fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = std::collections::BinaryHeap::new();
    let (value, error) = gk15(&f, a, b);
    heap.push(Interval {
        lo: a,
        hi: b,
        value,
        error,
    });
    let mut total_err = error;
    let mut evaluations = 15;
    loop {
        if total_err <= tol {
            // the running sum drifts; confirm against a fresh total
            total_err = heap.iter().map(|i| i.error).sum();
            if total_err <= tol {
                break;
            }
        }
        let worst = heap.peek().expect("heap never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if heap.len() >= MAX_INTERVALS || mid <= worst.lo || mid >= worst.hi {
            return Err(Error::QuadratureFailed {
                estimate: compensated_sum(heap.iter().map(|i| i.value)),
                achieved: total_err,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let (v1, e1) = gk15(&f, worst.lo, mid);
        let (v2, e2) = gk15(&f, mid, worst.hi);
        evaluations += 30;
        total_err += e1 + e2 - worst.error;
        heap.push(Interval {
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Interval {
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
        });
    }
    Ok(QuadratureResult {
        value: compensated_sum(heap.iter().map(|i| i.value)),
        error_estimate: total_err,
        evaluations,
    })
}

fn accumulate(acc: &mut QuadratureResult, part: QuadratureResult, weight: f64) {
    acc.value += weight * part.value;
    acc.error_estimate += weight.abs() * part.error_estimate;
    acc.evaluations += part.evaluations;
}

/// `∫_b^∞ ξ^{-7/3} φ(x - ξ) dξ`
fn far_integral(phi: &dyn TestFunction, x: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    let mut acc = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    match phi.sup_abs() {
        Some(m) => {
            if m == 0.0 {
                return Ok(acc);
            }
            // doubling panels until the tail mass (3/4) M E^{-4/3} drops below tol/4;
            // the remaining tolerance is split evenly over the panels before E
            let end = (3.0 * m / tol).powf(0.75);
            let panels = ((end / b).log2().ceil().max(1.0)) as usize;
            let panel_tol = 0.5 * tol / panels as f64;
            let mut lo = b;
            loop {
                let rest = 0.75 * m * lo.powf(-4.0 / 3.0);
                if rest < 0.25 * tol {
                    acc.error_estimate += rest;
                    break;
                }
                let hi = 2.0 * lo;
                let bound = 0.75 * m * (lo.powf(-4.0 / 3.0) - hi.powf(-4.0 / 3.0));
                if bound < panel_tol {
                    acc.error_estimate += bound;
                } else {
                    let part = integrate(
                        |xi| xi.powf(-7.0 / 3.0) * phi.value(x - xi),
                        lo,
                        hi,
                        panel_tol,
                    )?;
                    accumulate(&mut acc, part, 1.0);
                }
                lo = hi;
            }
            Ok(acc)
        }
        None => {
            // ξ = b w^{-3} maps [b, ∞) onto (0, 1]
            let scale = 3.0 * b.powf(-4.0 / 3.0);
            let part = integrate(
                |w| {
                    if w <= 0.0 {
                        0.0
                    } else {
                        scale * w.powi(3) * phi.value(x - b / (w * w * w))
                    }
                },
                0.0,
                1.0,
                tol,
            )?;
            accumulate(&mut acc, part, 1.0);
            Ok(acc)
        }
    }
}

fn finish(acc: QuadratureResult, tol: f64) -> Result<QuadratureResult> {
    if acc.error_estimate > tol {
        Err(Error::QuadratureFailed {
            estimate: acc.value,
            achieved: acc.error_estimate,
            tolerance: tol,
        })
    } else {
        Ok(acc)
    }
}

/// `I[φ](x)` from the singular-convolution formula.
pub fn continuous_nonlocal_reference(
    phi: &dyn TestFunction,
    x: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    check_tol(tol)?;
    let near = integrate(|s| 3.0 * s * phi.d2(x - s * s * s), 0.0, 1.0, 0.5 * tol)?;
    let far = far_integral(phi, x, 1.0, 0.5 * tol / (4.0 / 9.0))?;
    let mut acc = QuadratureResult {
        value: phi.d1(x - 1.0) - phi.value(x - 1.0) / 3.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    accumulate(&mut acc, near, 1.0);
    accumulate(&mut acc, far, 4.0 / 9.0);
    finish(acc, tol)
}

/// `I[φ](x)` from the second-order remainder formula.
pub fn continuous_nonlocal_reference_integral_form(
    phi: &dyn TestFunction,
    x: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    check_tol(tol)?;
    const SPLIT: f64 = 0.5;
    const TAYLOR_BELOW: f64 = 0.1;
    let (p0, p1, p2, p3, p4) = (phi.value(x), phi.d1(x), phi.d2(x), phi.d3(x), phi.d4(x));
    // ξ = s³: integrand 3 s^{-5} (φ(x - s³) - φ(x) + φ'(x) s³)
    let near_integrand = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let xi = s * s * s;
        if s < TAYLOR_BELOW {
            // bracket / ξ² through fourth order
            let r = 0.5 * p2 - p3 * xi / 6.0 + p4 * xi * xi / 24.0;
            3.0 * s * r
        } else {
            3.0 * (phi.value(x - xi) - p0 + p1 * xi) / (s * s * s * s * s)
        }
    };
    let near = integrate(near_integrand, 0.0, SPLIT.cbrt(), 0.4 * tol / (4.0 / 9.0))?;
    let far = far_integral(phi, x, SPLIT, 0.4 * tol / (4.0 / 9.0))?;
    let mut acc = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    accumulate(&mut acc, near, 4.0 / 9.0);
    accumulate(&mut acc, far, 4.0 / 9.0);
    acc.value +=
        4.0 / 9.0 * (-0.75 * p0 * SPLIT.powf(-4.0 / 3.0) + 3.0 * p1 * SPLIT.powf(-1.0 / 3.0));
    finish(acc, tol)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(crate::error::invalid(
            "tol",
            format!("must be > 0, got {tol}"),
        ))
    }
}
