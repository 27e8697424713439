//! Application of a coefficient table to a grid function.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::CoefficientTable;
use crate::error::{invalid, Error, Result};
use crate::field::Field;

/// Treatment of grid values outside `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Zero extension on both sides.
    #[default]
    Causal,
    /// Wrap-around; the stencil becomes a circulant.
    Periodic,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "causal" | "zero" => Ok(Self::Causal),
            "periodic" => Ok(Self::Periodic),
            other => Err(invalid("boundary", format!("unknown boundary `{other}`"))),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Causal => "causal",
            Self::Periodic => "periodic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ConvolutionMethod {
    Naive,
    Fft,
    /// FFT once the stencil is long enough to pay off.
    #[default]
    Auto,
}

impl FromStr for ConvolutionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "naive" | "direct" => Ok(Self::Naive),
            "fft" => Ok(Self::Fft),
            "auto" => Ok(Self::Auto),
            other => Err(invalid(
                "method",
                format!("unknown convolution method `{other}`"),
            )),
        }
    }
}

impl fmt::Display for ConvolutionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Naive => "naive",
            Self::Fft => "fft",
            Self::Auto => "auto",
        })
    }
}

const AUTO_FFT_MIN_TAPS: usize = 48;

struct Spectrum {
    size: usize,
    kernel: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// A coefficient table laid out for one grid size and boundary policy.
///
/// Causal layout: `kernel[0]` multiplies `u_{j+1}`, `kernel[1 + l]` multiplies
/// `u_{j-l}`. Periodic layout: `kernel[r]` multiplies `u_{(j-r) mod n}`.
pub struct NonlocalOperator {
    n: usize,
    boundary: Boundary,
    method: ConvolutionMethod,
    scale: f64,
    kernel: Vec<f64>,
    spectrum: Option<Spectrum>,
}

impl fmt::Debug for NonlocalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlocalOperator")
            .field("n", &self.n)
            .field("boundary", &self.boundary)
            .field("method", &self.method)
            .field("taps", &self.kernel.len())
            .finish()
    }
}

impl NonlocalOperator {
    pub fn new(
        table: &CoefficientTable,
        n: usize,
        boundary: Boundary,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        if n < 2 {
            return Err(invalid(
                "n_cells",
                format!("need at least 2 cells, got {n}"),
            ));
        }
        let kernel = match boundary {
            Boundary::Causal => {
                let mut k = Vec::with_capacity(table.max_shift().min(n - 1) + 2);
                k.push(table.forward());
                table.for_each_weight(n - 1, |_, w| k.push(w));
                k
            }
            Boundary::Periodic => {
                let mut k = table.fold(n, 0);
                k[n - 1] += table.forward();
                k
            }
        };
        let use_fft = match method {
            ConvolutionMethod::Naive => false,
            ConvolutionMethod::Fft => true,
            ConvolutionMethod::Auto => kernel.len() >= AUTO_FFT_MIN_TAPS,
        };
        let mut op = Self {
            n,
            boundary,
            method: if use_fft {
                ConvolutionMethod::Fft
            } else {
                ConvolutionMethod::Naive
            },
            scale: table.scale(),
            kernel,
            spectrum: None,
        };
        if use_fft {
            op.spectrum = Some(op.prepare_spectrum());
        }
        Ok(op)
    }

    fn prepare_spectrum(&self) -> Spectrum {
        let size = match self.boundary {
            Boundary::Causal => (self.n + self.kernel.len() - 1).next_power_of_two(),
            Boundary::Periodic => self.n,
        };
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut kernel = vec![Complex64::new(0.0, 0.0); size];
        for (slot, &w) in kernel.iter_mut().zip(&self.kernel) {
            slot.re = w;
        }
        forward.process(&mut kernel);
        let norm = 1.0 / size as f64;
        kernel.iter_mut().for_each(|c| *c *= norm);
        Spectrum {
            size,
            kernel,
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Method actually used (`Auto` resolved).
    pub fn method(&self) -> ConvolutionMethod {
        self.method
    }

    /// `prefactor * dx^{-4/3}`
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Dimensionless kernel in the layout of the boundary policy.
    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    /// `out = I_dx[u]`, including the `dx^{-4/3}` scale.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.apply_scaled_into(u, self.scale, out)
    }

    /// `out = factor * K u` with the dimensionless kernel `K`.
    pub fn apply_scaled_into(&self, u: &[f64], factor: f64, out: &mut [f64]) -> Result<()> {
        self.apply_scaled_with(u, factor, out, &mut Vec::new())
    }

    /// As [`Self::apply_scaled_into`], reusing `scratch` for the FFT buffer.
    pub fn apply_scaled_with(
        &self,
        u: &[f64],
        factor: f64,
        out: &mut [f64],
        scratch: &mut Vec<Complex64>,
    ) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: u.len(),
            });
        }
        if out.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: out.len(),
            });
        }
        match &self.spectrum {
            Some(s) => self.fft_into(s, u, factor, out, scratch),
            None => self.naive_into(u, factor, out),
        }
        Ok(())
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.apply_into(u, &mut out)?;
        Ok(out)
    }

    fn naive_into(&self, u: &[f64], factor: f64, out: &mut [f64]) {
        let n = self.n;
        match self.boundary {
            Boundary::Causal => {
                for (j, o) in out.iter_mut().enumerate() {
                    // kernel[m] meets u[j + 1 - m]
                    let hi = (j + 1).min(n - 1);
                    let mut acc = 0.0;
                    for idx in (0..=hi).rev() {
                        let m = j + 1 - idx;
                        if m >= self.kernel.len() {
                            break;
                        }
                        acc += self.kernel[m] * u[idx];
                    }
                    *o = factor * acc;
                }
            }
            Boundary::Periodic => {
                for (j, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (r, &w) in self.kernel.iter().enumerate() {
                        acc += w * u[(j + n - r) % n];
                    }
                    *o = factor * acc;
                }
            }
        }
    }

    fn fft_into(
        &self,
        s: &Spectrum,
        u: &[f64],
        factor: f64,
        out: &mut [f64],
        buf: &mut Vec<Complex64>,
    ) {
        buf.clear();
        buf.extend(u.iter().map(|&x| Complex64::new(x, 0.0)));
        buf.resize(s.size, Complex64::new(0.0, 0.0));
        s.forward.process(buf);
        for (b, k) in buf.iter_mut().zip(&s.kernel) {
            *b *= k;
        }
        s.inverse.process(buf);
        let offset = match self.boundary {
            Boundary::Causal => 1,
            Boundary::Periodic => 0,
        };
        for (o, b) in out.iter_mut().zip(&buf[offset..]) {
            *o = factor * b.re;
        }
    }
}

fn apply_with(table: &CoefficientTable, field: &Field, method: ConvolutionMethod) -> Result<Field> {
    let op = NonlocalOperator::new(table, field.len(), Boundary::Causal, method)?;
    let out = op.apply(field.values())?;
    Ok(Field::from_parts(out, *field.grid(), field.time()))
}

/// `I_dx[u]_j` by direct summation with causal zero extension.
pub fn apply_nonlocal_naive(table: &CoefficientTable, field: &Field) -> Result<Field> {
    apply_with(table, field, ConvolutionMethod::Naive)
}

/// Same as [`apply_nonlocal_naive`] through a zero-padded FFT convolution.
pub fn apply_nonlocal_fft(table: &CoefficientTable, field: &Field) -> Result<Field> {
    apply_with(table, field, ConvolutionMethod::Fft)
}
