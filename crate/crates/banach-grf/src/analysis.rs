//! Validation diagnostics: empirical covariance, Hoelder seminorms and
//! exponent estimation, Besov-type coefficient summability, weak* norms,
//! a Nystrom/Mercer eigendecomposition oracle, and the two-sided
//! difference-quotient estimate for the exponential kernels.

use crate::decomp::Decomposition;
use crate::dyadic::{coeff_functional, enumerate_dyadic, CoefficientFunctional};
use crate::error::{GrfError, Result};
use crate::kernels::{eval_kernel, kernel_pairing, KernelSpec};
use crate::sampler::FieldSample;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Values of every mode at a fixed list of points: `out[i][p] =
/// phi_i(points[p])`. Precompute this once when pairing many samples
/// against the same points.
pub fn mode_values_at(d: &Decomposition, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let basis = d.basis()?;
    (0..d.n_modes())
        .map(|i| {
            points
                .iter()
                .map(|x| {
                    let mut acc = 0.0;
                    for (b, &c) in basis.iter().zip(&d.phis[i]) {
                        if c != 0.0 {
                            acc += c * b.eval(x)?;
                        }
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect()
}

/// Unbiased estimate of `E[<eta1, theta> <eta2, theta>]` over the given
/// samples, with the Monte-Carlo standard error of the product mean.
pub fn empirical_covariance(
    samples: &[FieldSample],
    d: &Decomposition,
    eta1: &CoefficientFunctional,
    eta2: &CoefficientFunctional,
) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(GrfError::TooFewSamples {
            need: 2,
            got: samples.len(),
        });
    }
    // <eta, theta> = sum_i coeffs[i] <eta, phi_i>; precompute the pairings
    let basis = d.basis()?;
    let pair_mode = |eta: &CoefficientFunctional, i: usize| -> Result<f64> {
        eta.try_apply(|x| {
            let mut acc = 0.0;
            for (b, &c) in basis.iter().zip(&d.phis[i]) {
                if c != 0.0 {
                    acc += c * b.eval(x)?;
                }
            }
            Ok(acc)
        })
    };
    let p1: Vec<f64> = (0..d.n_modes()).map(|i| pair_mode(eta1, i)).collect::<Result<_>>()?;
    let p2: Vec<f64> = (0..d.n_modes()).map(|i| pair_mode(eta2, i)).collect::<Result<_>>()?;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for s in samples {
        if s.coeffs.len() != d.n_modes() {
            return Err(GrfError::DimensionMismatch {
                expected: d.n_modes(),
                got: s.coeffs.len(),
            });
        }
        let a: f64 = s.coeffs.iter().zip(&p1).map(|(c, p)| c * p).sum();
        let b: f64 = s.coeffs.iter().zip(&p2).map(|(c, p)| c * p).sum();
        let prod = a * b;
        sum += prod;
        sumsq += prod * prod;
    }
    let n = samples.len() as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Grid gamma-Hoelder seminorm: max over node pairs of
/// `|f(x) - f(x')| / ||x - x'||^gamma`.
///
/// In one dimension all pairs are used. In higher dimensions the pair set
/// is all axis-aligned pairs plus all pairs within Chebyshev radius 4
/// cells; for piecewise-multilinear functions the sup is attained there.
pub fn holder_seminorm(values: &[f64], dim: usize, resolution: u32, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(GrfError::InvalidArgument(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    let per_axis = (1usize << resolution) + 1;
    let expected = per_axis.pow(dim as u32);
    if values.len() != expected {
        return Err(GrfError::DimensionMismatch {
            expected,
            got: values.len(),
        });
    }
    let h = 1.0 / (per_axis - 1) as f64;
    if dim == 1 {
        let best = (0..values.len())
            .into_par_iter()
            .map(|i| {
                let mut b = 0.0f64;
                for j in (i + 1)..values.len() {
                    let dist = (j - i) as f64 * h;
                    b = b.max((values[i] - values[j]).abs() / dist.powf(gamma));
                }
                b
            })
            .reduce(|| 0.0, f64::max);
        return Ok(best);
    }
    // n-D: decode row-major with last axis fastest
    let decode = |mut flat: usize| -> Vec<usize> {
        let mut idx = vec![0usize; dim];
        for a in (0..dim).rev() {
            idx[a] = flat % per_axis;
            flat /= per_axis;
        }
        idx
    };
    let encode = |idx: &[usize]| -> usize {
        idx.iter().fold(0usize, |acc, &i| acc * per_axis + i)
    };
    let best = (0..values.len())
        .into_par_iter()
        .map(|flat| {
            let idx = decode(flat);
            let mut b = 0.0f64;
            // axis-aligned pairs (full range along each axis)
            for a in 0..dim {
                let mut other = idx.clone();
                for j in (idx[a] + 1)..per_axis {
                    other[a] = j;
                    let dist = (j - idx[a]) as f64 * h;
                    b = b.max((values[flat] - values[encode(&other)]).abs() / dist.powf(gamma));
                }
            }
            // local pairs within Chebyshev radius 4
            let mut offs = vec![0isize; dim];
            'l: loop {
                let mut target = Vec::with_capacity(dim);
                let mut dist2 = 0.0;
                let mut ok = true;
                for a in 0..dim {
                    let t = idx[a] as isize + offs[a];
                    if t < 0 || t as usize >= per_axis {
                        ok = false;
                        break;
                    }
                    target.push(t as usize);
                    dist2 += (offs[a] as f64 * h) * (offs[a] as f64 * h);
                }
                if ok && offs.iter().any(|&o| o != 0) {
                    let j = encode(&target);
                    if j > flat {
                        b = b.max((values[flat] - values[j]).abs() / dist2.sqrt().powf(gamma));
                    }
                }
                let mut a = 0;
                loop {
                    if a == dim {
                        break 'l;
                    }
                    offs[a] += 1;
                    if offs[a] <= 4 {
                        break;
                    }
                    offs[a] = -4;
                    a += 1;
                }
            }
            b
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Estimate the Hoelder exponent of 1D grid values by regressing the log
/// of the mean absolute increment at dyadic lag `2^-j` against
/// `-j ln 2`, over `j = 2 ..= resolution - 1` (the coarsest lag is
/// boundary-dominated and the finest truncation-dominated, so both are
/// dropped). Returns `+inf` for constant input.
pub fn estimate_holder_exponent(values: &[f64], resolution: u32) -> Result<f64> {
    if resolution < 4 {
        return Err(GrfError::InvalidArgument(
            "exponent estimation needs resolution >= 4".into(),
        ));
    }
    let n = (1usize << resolution) + 1;
    if values.len() != n {
        return Err(GrfError::DimensionMismatch {
            expected: n,
            got: values.len(),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 2..resolution {
        let step = 1usize << (resolution - j);
        let mut sum = 0.0;
        for i in 0..n - step {
            sum += (values[i + step] - values[i]).abs();
        }
        let mean = sum / (n - step) as f64;
        if mean == 0.0 {
            return Ok(f64::INFINITY);
        }
        xs.push(-(j as f64) * std::f64::consts::LN_2);
        ys.push(mean.ln());
    }
    let nf = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    Ok(num / den)
}

/// Per-level l1 sums of tensor coefficients under gamma renormalisation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BesovLevelSums {
    /// `raw[K]` sums `|<mu~_tau (x) mu~_t, c>|` over pairs whose max level
    /// is `K`.
    pub raw: Vec<f64>,
    /// `raw[K]` divided by the number of level-`K` indices; the
    /// decay/no-decay dichotomy is read off these per-index averages.
    pub normalized: Vec<f64>,
}

/// Compute per-level l1 coefficient sums of a pointwise kernel with
/// gamma-renormalised coefficient functionals.
pub fn besov_partial_sums(spec: &KernelSpec, k_max: u32, gamma: f64) -> Result<BesovLevelSums> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GrfError::InvalidArgument(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let indices = enumerate_dyadic(spec.dim, k_max)?;
    let functionals: Vec<_> = indices.iter().map(|i| coeff_functional(i, gamma)).collect();
    let levels: Vec<u32> = indices.iter().map(|i| i.level()).collect();
    let n = indices.len();
    let rows: Result<Vec<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|p| {
            (0..n)
                .map(|q| kernel_pairing(spec, &functionals[p], &functionals[q]))
                .collect()
        })
        .collect();
    let rows = rows?;
    let mut raw = vec![0.0; (k_max + 1) as usize];
    for p in 0..n {
        for q in 0..n {
            let k = levels[p].max(levels[q]) as usize;
            raw[k] += rows[p][q].abs();
        }
    }
    let count_at = |k: usize| -> f64 {
        if k == 0 {
            2f64.powi(spec.dim as i32)
        } else {
            // indices whose max coordinate level is exactly k
            let below: u64 = (1u64 << (k - 1)) + 1; // 1D count up to level k-1
            let upto: u64 = (1u64 << k) + 1;
            (upto.pow(spec.dim as u32) - below.pow(spec.dim as u32)) as f64
        }
    };
    let normalized = raw
        .iter()
        .enumerate()
        .map(|(k, s)| s / count_at(k))
        .collect();
    Ok(BesovLevelSums { raw, normalized })
}

/// Estimate the Besov-type norm `||c||_L1 + int t^-gamma w(c, t) dt/t`
/// of a pointwise kernel on the product domain, where the modulus of
/// continuity `w(c, t)` is approximated by the max grid L1 difference
/// over the 8 compass shift directions of length `t`, and the integral by
/// the trapezoid rule in `log t` over `t_grid`.
pub fn besov_norm_estimate(
    spec: &KernelSpec,
    gamma: f64,
    t_grid: &[f64],
    grid_res: usize,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GrfError::InvalidArgument(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    if spec.dim != 1 {
        return Err(GrfError::InvalidArgument(
            "besov norm estimate supports 1D kernels (2D product domain)".into(),
        ));
    }
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(GrfError::InvalidArgument(
            "t_grid must be strictly increasing and positive".into(),
        ));
    }
    let m = grid_res;
    let h = 1.0 / m as f64;
    let node = |i: usize| (i as f64 + 0.5) * h;
    let kval = |x: f64, y: f64| eval_kernel(spec, &[x], &[y]).unwrap();
    let mut l1 = 0.0;
    for i in 0..m {
        for j in 0..m {
            l1 += kval(node(i), node(j)).abs() * h * h;
        }
    }
    let dirs: [(f64, f64); 8] = [
        (1.0, 0.0),
        (0.0, 1.0),
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 0.0),
        (0.0, -1.0),
        (-1.0, -1.0),
        (-1.0, 1.0),
    ];
    let omega = |t: f64| -> f64 {
        dirs.iter()
            .map(|&(dx, dy)| {
                let norm = (dx * dx + dy * dy).sqrt();
                let (sx, sy) = (t * dx / norm, t * dy / norm);
                let mut acc = 0.0;
                let mut cells = 0usize;
                for i in 0..m {
                    for j in 0..m {
                        let (x, y) = (node(i), node(j));
                        let (xs, ys) = (x + sx, y + sy);
                        if (0.0..=1.0).contains(&xs) && (0.0..=1.0).contains(&ys) {
                            acc += (kval(xs, ys) - kval(x, y)).abs();
                            cells += 1;
                        }
                    }
                }
                if cells == 0 {
                    0.0
                } else {
                    acc / cells as f64
                }
            })
            .fold(0.0, f64::max)
    };
    let w: Vec<f64> = t_grid.par_iter().map(|&t| omega(t)).collect();
    // trapezoid in log t of t^-gamma * w(t)
    let mut integral = 0.0;
    for i in 0..t_grid.len() - 1 {
        let (t0, t1) = (t_grid[i], t_grid[i + 1]);
        let (f0, f1) = (t0.powf(-gamma) * w[i], t1.powf(-gamma) * w[i + 1]);
        integral += 0.5 * (f0 + f1) * (t1.ln() - t0.ln());
    }
    Ok(l1 + integral)
}

/// Weighted l1 functional metrising the weak* topology on bounded sets:
/// a finite list of coefficient functionals with positive weights
/// summing to one.
#[derive(Debug, Clone)]
pub struct WeakStarNorm {
    functionals: Vec<CoefficientFunctional>,
    betas: Vec<f64>,
}

impl WeakStarNorm {
    /// Default weights `2^-i`, renormalised to sum to 1 over the list.
    pub fn new(functionals: Vec<CoefficientFunctional>) -> Result<Self> {
        if functionals.is_empty() {
            return Err(GrfError::InvalidArgument(
                "weak* norm needs at least one functional".into(),
            ));
        }
        let raw: Vec<f64> = (0..functionals.len()).map(|i| 2f64.powi(-(i as i32 + 1))).collect();
        let total: f64 = raw.iter().sum();
        Ok(WeakStarNorm {
            functionals,
            betas: raw.into_iter().map(|b| b / total).collect(),
        })
    }

    pub fn with_weights(functionals: Vec<CoefficientFunctional>, betas: Vec<f64>) -> Result<Self> {
        if functionals.len() != betas.len() {
            return Err(GrfError::DimensionMismatch {
                expected: functionals.len(),
                got: betas.len(),
            });
        }
        if betas.iter().any(|&b| b <= 0.0) {
            return Err(GrfError::InvalidArgument("weights must be positive".into()));
        }
        let total: f64 = betas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GrfError::InvalidArgument(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        Ok(WeakStarNorm { functionals, betas })
    }

    pub fn functionals(&self) -> &[CoefficientFunctional] {
        &self.functionals
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `sum_i beta_i |pairings[i]|`.
    pub fn eval(&self, pairings: &[f64]) -> Result<f64> {
        if pairings.len() != self.betas.len() {
            return Err(GrfError::DimensionMismatch {
                expected: self.betas.len(),
                got: pairings.len(),
            });
        }
        Ok(self
            .betas
            .iter()
            .zip(pairings)
            .map(|(b, p)| b * p.abs())
            .sum())
    }
}

/// Quadrature eigendecomposition of the integral operator of a pointwise
/// kernel: Mercer pairs approximated on a midpoint grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NystromDecomposition {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Nonincreasing eigenvalues of the weighted kernel matrix.
    pub eigenvalues: Vec<f64>,
    /// `eigvecs[i][j] = phi_i(nodes[j])`, orthonormal in the weighted
    /// inner product `sum_j w_j phi_a(x_j) phi_b(x_j)`.
    pub eigvecs: Vec<Vec<f64>>,
    pub kernel: String,
    pub dim: usize,
}

impl NystromDecomposition {
    /// Extend eigenfunction `i` off the grid:
    /// `phi_i(x) = (1/lambda_i) sum_j w_j c(x, x_j) phi_i(x_j)`.
    pub fn extend(&self, spec: &KernelSpec, i: usize, x: &[f64]) -> Result<f64> {
        if i >= self.eigenvalues.len() {
            return Err(GrfError::InvalidArgument(format!(
                "eigenpair index {i} out of range"
            )));
        }
        let l = self.eigenvalues[i];
        if l <= 0.0 {
            return Err(GrfError::InvalidArgument(format!(
                "cannot extend eigenfunction with eigenvalue {l}"
            )));
        }
        let mut acc = 0.0;
        for (j, node) in self.nodes.iter().enumerate() {
            acc += self.weights[j] * eval_kernel(spec, x, node)? * self.eigvecs[i][j];
        }
        Ok(acc / l)
    }

    /// Covariance of point evaluations under the truncated expansion:
    /// `sum_i lambda_i phi_i(x) phi_i(y)` over eigenpairs with
    /// eigenvalue above `cutoff`.
    pub fn covariance_at(&self, spec: &KernelSpec, x: &[f64], y: &[f64], cutoff: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            if l <= cutoff {
                break;
            }
            acc += l * self.extend(spec, i, x)? * self.extend(spec, i, y)?;
        }
        Ok(acc)
    }
}

/// Midpoint-rule Nystrom approximation of the Mercer eigendecomposition,
/// with `n` nodes per axis.
pub fn nystrom_mercer(spec: &KernelSpec, n: usize) -> Result<NystromDecomposition> {
    if n < 2 {
        return Err(GrfError::InvalidArgument("need at least 2 nodes".into()));
    }
    let total = n.pow(spec.dim as u32);
    if total > 4096 {
        return Err(GrfError::CapExceeded {
            requested: total,
            cap: 4096,
        });
    }
    let h = 1.0 / n as f64;
    let mut nodes = Vec::with_capacity(total);
    let mut idx = vec![0usize; spec.dim];
    'outer: loop {
        nodes.push(idx.iter().map(|&i| (i as f64 + 0.5) * h).collect::<Vec<f64>>());
        let mut a = 0;
        loop {
            if a == spec.dim {
                break 'outer;
            }
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
    let w = h.powi(spec.dim as i32);
    let mut b = DMatrix::zeros(total, total);
    for i in 0..total {
        for j in i..total {
            let v = w * eval_kernel(spec, &nodes[i], &nodes[j])?;
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut eigenvalues = Vec::with_capacity(total);
    let mut eigvecs = Vec::with_capacity(total);
    let sw = w.sqrt();
    for &i in &order {
        let l = eig.eigenvalues[i];
        if l < -1e-10 {
            return Err(GrfError::NotPositiveSemidefinite { index: i, value: l });
        }
        eigenvalues.push(l);
        // u is orthonormal in l2; phi(x_j) = u_j / sqrt(w_j) is
        // orthonormal in the weighted inner product
        eigvecs.push(eig.eigenvectors.column(i).iter().map(|v| v / sw).collect());
    }
    Ok(NystromDecomposition {
        nodes,
        weights: vec![w; total],
        eigenvalues,
        eigvecs,
        kernel: spec.describe(),
        dim: spec.dim,
    })
}

/// Violation report from [`sandwich_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub max_lower_violation: f64,
    pub max_upper_violation: f64,
    pub checked: usize,
    pub skipped_coincident: usize,
}

/// Check the two-sided estimate on the kernel difference quotient
/// `|exp(-s^2) - exp(-t^2)| / r` with `s = d(x,y)^alpha`,
/// `t = d(x',y)^alpha`, `r = d(x,x')^alpha`:
///
/// `(s + t) (|t - s| / r) exp(-max(s^2, t^2))  <=  quotient  <=
///  (s + t) exp(-min(s^2, t^2))`.
///
/// The lower bound carries the factor `|t - s| / r <= 1` (by the reverse
/// triangle inequality for the snowflaked metric); without it the bound
/// fails whenever `y` is nearly equidistant from `x` and `x'`.
pub fn sandwich_check(alpha: f64, triples: &[(Vec<f64>, Vec<f64>, Vec<f64>)]) -> Result<SandwichReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(GrfError::InvalidArgument(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };
    let mut report = SandwichReport {
        max_lower_violation: 0.0,
        max_upper_violation: 0.0,
        checked: 0,
        skipped_coincident: 0,
    };
    for (x, xp, y) in triples {
        let r = dist(x, xp).powf(alpha);
        if r == 0.0 {
            report.skipped_coincident += 1;
            continue;
        }
        let s = dist(x, y).powf(alpha);
        let t = dist(xp, y).powf(alpha);
        let quotient = ((-s * s).exp() - (-t * t).exp()).abs() / r;
        let lower = (s + t) * ((t - s).abs() / r) * (-(s * s).max(t * t)).exp();
        let upper = (s + t) * (-(s * s).min(t * t)).exp();
        report.max_lower_violation = report.max_lower_violation.max(lower - quotient);
        report.max_upper_violation = report.max_upper_violation.max(quotient - upper);
        report.checked += 1;
    }
    Ok(report)
}

/// Deterministic uniform random triples in the unit cube for
/// [`sandwich_check`].
pub fn random_triples(dim: usize, n: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut p = || (0..dim).map(|_| rng.gen::<f64>()).collect::<Vec<f64>>();
            (p(), p(), p())
        })
        .collect()
}

/// Sample mean, variance, skewness, and excess kurtosis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub n: usize,
}

pub fn moments(values: &[f64]) -> Result<Moments> {
    if values.len() < 4 {
        return Err(GrfError::TooFewSamples {
            need: 4,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    Ok(Moments {
        mean,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        n: values.len(),
    })
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(GrfError::TooFewSamples { need: 1, got: 0 });
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < sa.len() && j < sb.len() {
        let v = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] == v {
            i += 1;
        }
        while j < sb.len() && sb[j] == v {
            j += 1;
        }
        let fa = i as f64 / sa.len() as f64;
        let fb = j as f64 / sb.len() as f64;
        d = d.max((fa - fb).abs());
    }
    Ok(d)
}
