//! Covariance kernel families and their pairings against coefficient
//! functionals and base measures.

use crate::dyadic::CoefficientFunctional;
use crate::error::{GrfError, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Base measure for white-noise covariances and L2 pairings.
#[derive(Clone)]
pub enum BaseMeasure {
    /// Lebesgue measure on the unit cube.
    Lebesgue,
    /// Absolutely continuous w.r.t. Lebesgue with the given nonnegative density.
    Density(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
    /// Counting measure on a finite point set (unit mass per point).
    Counting(Vec<Vec<f64>>),
}

impl fmt::Debug for BaseMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseMeasure::Lebesgue => write!(f, "Lebesgue"),
            BaseMeasure::Density(_) => write!(f, "Density(..)"),
            BaseMeasure::Counting(pts) => write!(f, "Counting({} points)", pts.len()),
        }
    }
}

impl BaseMeasure {
    pub fn describe(&self) -> String {
        match self {
            BaseMeasure::Lebesgue => "lebesgue".into(),
            BaseMeasure::Density(_) => "density".into(),
            BaseMeasure::Counting(pts) => format!("counting:{}", pts.len()),
        }
    }
}

/// Tabulated kernel on a uniform 1D grid pair, bilinear interpolation in
/// each argument. Extension point for user-supplied kernels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridKernel {
    /// Values at ((r+1) x (r+1)) nodes of the uniform grid on [0,1]^2.
    pub values: Vec<Vec<f64>>,
}

impl GridKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.values.len() - 1;
        let locate = |t: f64| -> (usize, f64) {
            let s = (t * n as f64).min(n as f64 - 1.0).max(0.0);
            let i = s.floor() as usize;
            (i, t * n as f64 - i as f64)
        };
        let (i, u) = locate(x);
        let (j, v) = locate(y);
        let f = &self.values;
        (1.0 - u) * (1.0 - v) * f[i][j]
            + u * (1.0 - v) * f[i + 1][j]
            + (1.0 - u) * v * f[i][j + 1]
            + u * v * f[i + 1][j + 1]
    }
}

/// Covariance kernel family.
#[derive(Debug, Clone)]
pub enum KernelFamily {
    /// `exp(-||x - x'||^(2 alpha) / 2)`, `alpha` in (0, 1).
    ExpAlpha { alpha: f64 },
    /// `exp(-||x - x'||^2 / (2 scale^2))`.
    GaussianSE { scale: f64 },
    /// White noise with covariance `(A, B) -> mu(A ∩ B)`; measure-valued,
    /// represented only through its pairings.
    WhiteNoise { base: BaseMeasure },
    /// Tabulated kernel with bilinear interpolation (1D domain only).
    Grid(GridKernel),
}

/// A kernel family together with the domain dimension.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub dim: usize,
}

impl KernelSpec {
    pub fn exp_alpha(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(GrfError::InvalidArgument(format!(
                "exp-alpha exponent must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::ExpAlpha { alpha },
            dim,
        })
    }

    pub fn gaussian_se(scale: f64, dim: usize) -> Result<Self> {
        if scale <= 0.0 {
            return Err(GrfError::InvalidArgument(format!(
                "gaussian-se scale must be positive, got {scale}"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::GaussianSE { scale },
            dim,
        })
    }

    pub fn white_noise(base: BaseMeasure, dim: usize) -> Self {
        KernelSpec {
            family: KernelFamily::WhiteNoise { base },
            dim,
        }
    }

    pub fn describe(&self) -> String {
        match &self.family {
            KernelFamily::ExpAlpha { alpha } => format!("exp-alpha:{alpha}"),
            KernelFamily::GaussianSE { scale } => format!("gaussian-se:{scale}"),
            KernelFamily::WhiteNoise { base } => format!("white-noise:{}", base.describe()),
            KernelFamily::Grid(_) => "grid".into(),
        }
    }

    /// Parse the kernel grammar, e.g. `exp-alpha:0.5`, `gaussian-se:1.0`,
    /// `white-noise:lebesgue`.
    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let bad = || GrfError::InvalidArgument(format!("unrecognised kernel spec `{s}`"));
        let (name, rest) = s.split_once(':').ok_or_else(bad)?;
        match name {
            "exp-alpha" => {
                let alpha: f64 = rest.parse().map_err(|_| bad())?;
                KernelSpec::exp_alpha(alpha, dim)
            }
            "gaussian-se" => {
                let scale: f64 = rest.parse().map_err(|_| bad())?;
                KernelSpec::gaussian_se(scale, dim)
            }
            "white-noise" => match rest {
                "lebesgue" => Ok(KernelSpec::white_noise(BaseMeasure::Lebesgue, dim)),
                other => {
                    // counting measure: white-noise:counting:0,0.5,1 (1D points)
                    if let Some(list) = other.strip_prefix("counting:") {
                        let pts: std::result::Result<Vec<Vec<f64>>, _> = list
                            .split(',')
                            .map(|t| t.parse::<f64>().map(|v| vec![v]))
                            .collect();
                        Ok(KernelSpec::white_noise(
                            BaseMeasure::Counting(pts.map_err(|_| bad())?),
                            dim,
                        ))
                    } else {
                        Err(bad())
                    }
                }
            },
            _ => Err(bad()),
        }
    }
}

fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Pointwise kernel evaluation. White noise has no pointwise kernel.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != spec.dim || y.len() != spec.dim {
        return Err(GrfError::DimensionMismatch {
            expected: spec.dim,
            got: x.len().max(y.len()),
        });
    }
    match &spec.family {
        KernelFamily::ExpAlpha { alpha } => {
            Ok((-euclid(x, y).powf(2.0 * alpha) / 2.0).exp())
        }
        KernelFamily::GaussianSE { scale } => {
            let d = euclid(x, y);
            Ok((-d * d / (2.0 * scale * scale)).exp())
        }
        KernelFamily::WhiteNoise { .. } => Err(GrfError::MeasureValuedKernel),
        KernelFamily::Grid(g) => Ok(g.eval(x[0], y[0])),
    }
}

/// Pairing of a bivariate kernel against two Dirac combinations:
/// a finite double sum of point evaluations.
pub fn kernel_pairing(
    spec: &KernelSpec,
    a: &CoefficientFunctional,
    b: &CoefficientFunctional,
) -> Result<f64> {
    let mut acc = 0.0;
    for (p, wp) in a.atoms() {
        for (q, wq) in b.atoms() {
            acc += wp * wq * eval_kernel(spec, p, q)?;
        }
    }
    Ok(acc)
}

/// Per-cell quadrature resolution used when no explicit one is given.
pub const DEFAULT_QUAD_LEVEL: u32 = 10;

/// `integral of f * g d(base)`.
///
/// For Lebesgue (and density) bases the cube is split into `2^level` cells
/// per axis and a tensor Simpson rule is applied per cell; this is exact
/// for products of piecewise-multilinear functions aligned with the cells.
/// For counting bases the integral is the finite sum over atoms.
pub fn l2_pairing<F, G>(base: &BaseMeasure, dim: usize, f: F, g: G, level: u32) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    match base {
        BaseMeasure::Counting(points) => {
            Ok(points.iter().map(|p| f(p) * g(p)).sum())
        }
        BaseMeasure::Lebesgue => Ok(simpson_cube(dim, level, |x| f(x) * g(x))),
        BaseMeasure::Density(d) => {
            // midpoint-composite over density cells nested inside Simpson cells
            let val = simpson_cube(dim, level, |x| {
                let w = d(x);
                if w < 0.0 {
                    f64::NAN
                } else {
                    f(x) * g(x) * w
                }
            });
            if val.is_nan() {
                return Err(GrfError::InvalidArgument(
                    "negative density in base measure".into(),
                ));
            }
            Ok(val)
        }
    }
}

/// Tensor Simpson rule on the unit cube with `2^level` cells per axis.
pub fn simpson_cube<F: Fn(&[f64]) -> f64>(dim: usize, level: u32, f: F) -> f64 {
    let cells = 1u64 << level;
    let h = 1.0 / cells as f64;
    // 1D Simpson nodes/weights per cell: h/6 * (1, 4, 1) at (a, m, b)
    let mut acc = 0.0;
    let mut idx = vec![0u64; dim];
    let mut node = vec![0.0f64; dim];
    let mut sub = vec![0u8; dim];
    loop {
        // iterate Simpson sub-nodes (0, 1, 2) per axis inside this cell
        sub.iter_mut().for_each(|s| *s = 0);
        loop {
            let mut w = 1.0;
            for d in 0..dim {
                let a = idx[d] as f64 * h;
                let (t, wd) = match sub[d] {
                    0 => (a, h / 6.0),
                    1 => (a + 0.5 * h, 4.0 * h / 6.0),
                    _ => (a + h, h / 6.0),
                };
                node[d] = t;
                w *= wd;
            }
            acc += w * f(&node);
            let mut d = 0;
            loop {
                if d == dim {
                    break;
                }
                sub[d] += 1;
                if sub[d] < 3 {
                    break;
                }
                sub[d] = 0;
                d += 1;
            }
            if d == dim {
                break;
            }
        }
        let mut d = 0;
        loop {
            if d == dim {
                return acc;
            }
            idx[d] += 1;
            if idx[d] < cells {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
