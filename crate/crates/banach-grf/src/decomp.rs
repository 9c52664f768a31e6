//! Covariance diagonalisation: tensor coefficient matrices and pivoted
//! Gram-Schmidt biorthogonalisation into a nuclear decomposition
//! `c = sum_i lambda_i phi_i (x) phi_i`.

use crate::dyadic::{coeff_functional, enumerate_dyadic, BasisFunction, DyadicIndex};
use crate::error::{GrfError, Result};
use crate::kernels::{kernel_pairing, l2_pairing, KernelFamily, KernelSpec};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How to normalise the modes `phi_i`.
///
/// The reconstruction `sum_i lambda_i phi_i phi_i^T` is invariant under this
/// choice; it only changes the split between `lambda_i` and `phi_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    /// Max of sup norm and the alpha-Hoelder quotient, both over a dyadic
    /// grid of resolution `2^(k_max + 2)` per axis.
    GridHoelder,
    /// Euclidean norm of the coefficient vector.
    CoefficientEuclidean,
    /// Total-variation norm; only meaningful for measure-valued fields.
    TotalVariation,
}

impl NormMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "grid-hoelder" => Ok(NormMode::GridHoelder),
            "coefficient-euclidean" => Ok(NormMode::CoefficientEuclidean),
            "total-variation" => Ok(NormMode::TotalVariation),
            other => Err(GrfError::InvalidArgument(format!(
                "unknown norm mode `{other}`"
            ))),
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            NormMode::GridHoelder => "grid-hoelder",
            NormMode::CoefficientEuclidean => "coefficient-euclidean",
            NormMode::TotalVariation => "total-variation",
        }
    }
}

/// Relative pivot tolerance used when none is specified.
pub const DEFAULT_PIVOT_TOL_REL: f64 = 1e-12;

/// Default cap on the number of basis indices per decomposition.
pub const DEFAULT_INDEX_CAP: usize = 4096;

fn make_basis(indices: &[DyadicIndex], alpha: f64) -> Result<Vec<BasisFunction>> {
    indices
        .iter()
        .map(|i| {
            if alpha == 0.0 {
                Ok(BasisFunction::plain(i.clone()))
            } else {
                BasisFunction::renormalised(i.clone(), alpha)
            }
        })
        .collect()
}

/// Symmetric matrix of tensor pairings of a covariance against the
/// renormalised coefficient-functional basis, plus the index bookkeeping.
///
/// For pointwise kernels, entry `(p, q)` is the double point-mass sum
/// `<mu~_p (x) mu~_q, c>`. For white noise with base measure `mu`, entry
/// `(p, q)` is the Gram integral of the corresponding basis functions
/// against `mu`.
#[derive(Debug, Clone)]
pub struct TensorCoefficients {
    pub kernel: String,
    pub dim: usize,
    pub k_max: u32,
    pub alpha: f64,
    pub indices: Vec<DyadicIndex>,
    pub matrix: DMatrix<f64>,
}

impl TensorCoefficients {
    /// Matrix-vector action: the coefficient vector of `C eta` over the
    /// basis functions, given the coordinates of `eta` over the
    /// coefficient functionals.
    pub fn apply_cov(&self, eta_coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        if eta_coeffs.len() != self.matrix.nrows() {
            return Err(GrfError::DimensionMismatch {
                expected: self.matrix.nrows(),
                got: eta_coeffs.len(),
            });
        }
        Ok(&self.matrix * eta_coeffs)
    }
}

/// Build the tensor coefficient matrix for a kernel at resolution `k_max`.
///
/// White-noise specs take the Gram-matrix route; everything else the
/// double point-mass sum. `cap` bounds the number of basis indices.
pub fn tensor_coefficients(
    kernel: &KernelSpec,
    k_max: u32,
    alpha: f64,
    cap: usize,
) -> Result<TensorCoefficients> {
    let indices = enumerate_dyadic(kernel.dim, k_max)?;
    if indices.len() > cap {
        return Err(GrfError::CapExceeded {
            requested: indices.len(),
            cap,
        });
    }
    let n = indices.len();
    let rows: Result<Vec<Vec<f64>>> = match &kernel.family {
        KernelFamily::WhiteNoise { base } => {
            let basis = make_basis(&indices, alpha)?;
            let quad = k_max.max(1);
            (0..n)
                .into_par_iter()
                .map(|p| {
                    (p..n)
                        .map(|q| {
                            l2_pairing(
                                base,
                                kernel.dim,
                                |x| basis[p].eval_unchecked(x),
                                |x| basis[q].eval_unchecked(x),
                                quad,
                            )
                        })
                        .collect()
                })
                .collect()
        }
        _ => {
            let functionals: Vec<_> =
                indices.iter().map(|i| coeff_functional(i, alpha)).collect();
            (0..n)
                .into_par_iter()
                .map(|p| {
                    (p..n)
                        .map(|q| kernel_pairing(kernel, &functionals[p], &functionals[q]))
                        .collect()
                })
                .collect()
        }
    };
    let rows = rows?;
    let mut matrix = DMatrix::zeros(n, n);
    for p in 0..n {
        for (off, &v) in rows[p].iter().enumerate() {
            let q = p + off;
            matrix[(p, q)] = v;
            matrix[(q, p)] = v;
        }
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(GrfError::InvalidArgument(
            "non-finite tensor coefficient".into(),
        ));
    }
    Ok(TensorCoefficients {
        kernel: kernel.describe(),
        dim: kernel.dim,
        k_max,
        alpha,
        indices,
        matrix,
    })
}

/// Raw output of the pivoted biorthogonalisation, in pivot order.
#[derive(Debug, Clone)]
pub struct RawBiorth {
    /// `lambda_i = ||w_i||^2` under the chosen norm.
    pub eigenvalues: Vec<f64>,
    /// Coefficient vectors of the normalised modes `phi_i = w_i / ||w_i||`.
    pub modes: Vec<DVector<f64>>,
    /// Coefficient vectors (over the functional basis) of the duals,
    /// scaled so the pairing with `phi_j` is the Kronecker delta.
    pub duals: Vec<DVector<f64>>,
    /// Pivot index chosen at each step.
    pub pivots: Vec<usize>,
    /// Pivot diagonal value at each step (nonincreasing).
    pub pivot_values: Vec<f64>,
    /// Residual diagonal after the last accepted step.
    pub residual_diag: Vec<f64>,
}

/// Pivoted Gram-Schmidt biorthogonalisation of a symmetric PSD coefficient
/// matrix. `norm` maps a mode coefficient vector to its norm.
///
/// At each step the largest remaining diagonal entry is chosen as pivot
/// (ties resolved to the lowest index). Stops when the pivot falls to or
/// below `tol_rel * max(initial diagonal)` or after `max_modes` steps.
/// A remaining diagonal entry below `-tol` aborts with
/// [`GrfError::NotPositiveSemidefinite`].
pub fn pivoted_biorth<N: Fn(&DVector<f64>) -> f64>(
    c: &DMatrix<f64>,
    norm: N,
    max_modes: usize,
    tol_rel: f64,
) -> Result<RawBiorth> {
    let n = c.nrows();
    if c.ncols() != n {
        return Err(GrfError::DimensionMismatch {
            expected: n,
            got: c.ncols(),
        });
    }
    let mut r = c.clone();
    let d0 = (0..n).map(|i| r[(i, i)]).fold(0.0f64, f64::max);
    let tol = tol_rel * d0.max(0.0);

    let mut ells: Vec<DVector<f64>> = Vec::new();
    let mut ds: Vec<f64> = Vec::new();
    let mut vs: Vec<DVector<f64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();

    for _ in 0..max_modes.min(n) {
        let mut p = 0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            if pivots.contains(&i) {
                continue;
            }
            let di = r[(i, i)];
            if di < -tol.max(f64::MIN_POSITIVE) {
                return Err(GrfError::NotPositiveSemidefinite {
                    index: i,
                    value: di,
                });
            }
            if di > best {
                best = di;
                p = i;
            }
        }
        if best <= tol {
            break;
        }
        let d = r[(p, p)];
        let ell = r.column(p) / d.sqrt();
        // dual direction: v_i = e_p - sum_j (ell_j[p] / sqrt(d_j)) v_j
        let mut v = DVector::zeros(n);
        v[p] = 1.0;
        for (j, vj) in vs.iter().enumerate() {
            let coef = ells[j][p] / ds[j].sqrt();
            v -= vj * coef;
        }
        r -= &ell * ell.transpose();
        ells.push(ell);
        ds.push(d);
        vs.push(v);
        pivots.push(p);
    }

    let m = ells.len();
    let mut terms = Vec::with_capacity(m);
    for i in 0..m {
        let w = norm(&ells[i]);
        if !(w.is_finite() && w > 0.0) {
            return Err(GrfError::InvalidArgument(format!(
                "mode {i} has non-positive norm {w}"
            )));
        }
        // dual scaled so that pairing with phi_i = ell_i / w is exactly 1:
        // v_i^T ell_j = sqrt(d_i) delta_ij
        terms.push((w * w, &ells[i] / w, &vs[i] * (w / ds[i].sqrt()), pivots[i], ds[i]));
    }
    // publish in nonincreasing lambda order (stable for ties)
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| terms[b].0.partial_cmp(&terms[a].0).unwrap());
    let residual_diag = (0..n).map(|i| r[(i, i)]).collect();
    Ok(RawBiorth {
        eigenvalues: order.iter().map(|&i| terms[i].0).collect(),
        modes: order.iter().map(|&i| terms[i].1.clone()).collect(),
        duals: order.iter().map(|&i| terms[i].2.clone()).collect(),
        pivots: order.iter().map(|&i| terms[i].3).collect(),
        pivot_values: ds,
        residual_diag,
    })
}

/// Grid used by the grid-Hoelder norm: `2^(k_max + 2) + 1` points per axis.
pub fn hoelder_grid_points(dim: usize, k_max: u32) -> Vec<Vec<f64>> {
    let res = (1usize << (k_max + 2)) + 1;
    let h = 1.0 / (res - 1) as f64;
    let mut pts = Vec::with_capacity(res.pow(dim as u32));
    let mut idx = vec![0usize; dim];
    loop {
        pts.push(idx.iter().map(|&i| i as f64 * h).collect());
        let mut d = 0;
        loop {
            if d == dim {
                return pts;
            }
            idx[d] += 1;
            if idx[d] < res {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Max of the sup norm and the alpha-Hoelder quotient of
/// `x -> sum_p coeffs[p] f~_p(x)` over all pairs of grid points.
pub fn grid_hoelder_norm(
    coeffs: &DVector<f64>,
    basis: &[BasisFunction],
    alpha: f64,
    dim: usize,
    k_max: u32,
) -> f64 {
    let pts = hoelder_grid_points(dim, k_max);
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|x| {
            basis
                .iter()
                .zip(coeffs.iter())
                .map(|(b, &c)| if c == 0.0 { 0.0 } else { c * b.eval_unchecked(x) })
                .sum()
        })
        .collect();
    let sup = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let quot = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in (i + 1)..pts.len() {
                let dist: f64 = pts[i]
                    .iter()
                    .zip(&pts[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                best = best.max((vals[i] - vals[j]).abs() / dist.powf(alpha));
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    sup.max(quot)
}

/// A finite nuclear decomposition of a covariance kernel in the
/// renormalised hat basis, ready for sampling and validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub family: String,
    pub alpha: f64,
    pub dim: usize,
    pub k_max: u32,
    pub norm_mode: NormMode,
    pub pivot_tol_rel: f64,
    pub indices: Vec<DyadicIndex>,
    /// Nonincreasing weights `lambda_i`.
    pub lambdas: Vec<f64>,
    /// Coefficient vectors of `phi_i` over the basis functions.
    pub phis: Vec<Vec<f64>>,
    /// Coefficient vectors of the biorthogonal duals over the
    /// coefficient functionals.
    pub etas: Vec<Vec<f64>>,
    pub pivots: Vec<usize>,
    /// Residual trace left on the diagonal after truncation.
    pub residual_trace: f64,
}

/// Diagnostic report from [`verify_biorthogonality`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiorthReport {
    /// Max over `i != j` of the pairing of dual `i` with `C` applied to
    /// dual `j` (exact biorthogonality gives 0).
    pub max_offdiag_pairing: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Max entrywise deviation of `sum_i lambda_i phi_i phi_i^T` from the
    /// coefficient matrix.
    pub reconstruction_residual: f64,
}

impl Decomposition {
    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn basis(&self) -> Result<Vec<BasisFunction>> {
        make_basis(&self.indices, self.alpha)
    }

    /// Evaluate mode `phi_i` at a point.
    pub fn eval_mode(&self, i: usize, x: &[f64]) -> Result<f64> {
        if i >= self.n_modes() {
            return Err(GrfError::InvalidArgument(format!(
                "mode index {i} out of range (have {})",
                self.n_modes()
            )));
        }
        let basis = self.basis()?;
        let mut acc = 0.0;
        for (b, &c) in basis.iter().zip(&self.phis[i]) {
            if c != 0.0 {
                acc += c * b.eval(x)?;
            }
        }
        Ok(acc)
    }

    /// Reconstructed coefficient-matrix entry
    /// `sum_i lambda_i phi_i[p] phi_i[q]`.
    pub fn reconstructed_entry(&self, p: usize, q: usize) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.phis)
            .map(|(l, m)| l * m[p] * m[q])
            .sum()
    }

    /// Reconstructed kernel value `sum_i lambda_i phi_i(x) phi_i(y)`.
    pub fn reconstructed_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let basis = self.basis()?;
        let eval = |coeffs: &[f64], pt: &[f64]| -> Result<f64> {
            let mut acc = 0.0;
            for (b, &c) in basis.iter().zip(coeffs) {
                if c != 0.0 {
                    acc += c * b.eval(pt)?;
                }
            }
            Ok(acc)
        };
        let mut acc = 0.0;
        for (l, m) in self.lambdas.iter().zip(&self.phis) {
            acc += l * eval(m, x)? * eval(m, y)?;
        }
        Ok(acc)
    }

    /// Keep the smallest set of terms (largest lambdas first) whose
    /// retained weight is at least `(1 - eps)` of the total.
    pub fn energy_truncate(&self, eps: f64) -> Result<Decomposition> {
        if !(0.0..1.0).contains(&eps) {
            return Err(GrfError::InvalidArgument(format!(
                "energy cutoff must lie in [0, 1), got {eps}"
            )));
        }
        let total: f64 = self.lambdas.iter().sum();
        let mut kept = 0;
        let mut acc = 0.0;
        while kept < self.lambdas.len() && acc < (1.0 - eps) * total {
            acc += self.lambdas[kept];
            kept += 1;
        }
        let mut out = self.clone();
        out.lambdas.truncate(kept);
        out.phis.truncate(kept);
        out.etas.truncate(kept);
        out.pivots.truncate(kept);
        out.residual_trace = total - acc + self.residual_trace;
        Ok(out)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

/// Check biorthogonality and reconstruction of a decomposition against
/// the coefficient matrix it was built from.
pub fn verify_biorthogonality(d: &Decomposition, tc: &TensorCoefficients) -> Result<BiorthReport> {
    let n = tc.matrix.nrows();
    let m = d.n_modes();
    let mut max_off = 0.0f64;
    for i in 0..m {
        let etai = DVector::from_column_slice(&d.etas[i]);
        let ci = tc.apply_cov(&etai)?;
        for j in 0..m {
            if i == j {
                continue;
            }
            let pair: f64 = d.etas[j].iter().zip(ci.iter()).map(|(a, b)| a * b).sum();
            max_off = max_off.max(pair.abs());
        }
    }
    let mut recon = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            recon = recon.max((d.reconstructed_entry(p, q) - tc.matrix[(p, q)]).abs());
        }
    }
    let lambda_min = d.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = d.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BiorthReport {
        max_offdiag_pairing: max_off,
        lambda_min,
        lambda_max,
        reconstruction_residual: recon,
    })
}

/// Biorthogonalise a tensor coefficient matrix into a [`Decomposition`].
pub fn biorthogonalize(
    tc: &TensorCoefficients,
    pivot_tol_rel: f64,
    norm_mode: NormMode,
    max_modes: usize,
) -> Result<Decomposition> {
    let basis = make_basis(&tc.indices, tc.alpha)?;
    let raw = match norm_mode {
        NormMode::CoefficientEuclidean => {
            pivoted_biorth(&tc.matrix, |l| l.norm(), max_modes, pivot_tol_rel)?
        }
        NormMode::GridHoelder => pivoted_biorth(
            &tc.matrix,
            |l| grid_hoelder_norm(l, &basis, tc.alpha, tc.dim, tc.k_max),
            max_modes,
            pivot_tol_rel,
        )?,
        NormMode::TotalVariation => {
            return Err(GrfError::InvalidArgument(
                "total-variation norm applies to measure-valued fields; \
                 use the white-noise pipeline"
                    .into(),
            ))
        }
    };
    Ok(Decomposition {
        family: tc.kernel.clone(),
        alpha: tc.alpha,
        dim: tc.dim,
        k_max: tc.k_max,
        norm_mode,
        pivot_tol_rel,
        indices: tc.indices.clone(),
        lambdas: raw.eigenvalues,
        phis: raw.modes.iter().map(|m| m.iter().copied().collect()).collect(),
        etas: raw.duals.iter().map(|v| v.iter().copied().collect()).collect(),
        pivots: raw.pivots,
        residual_trace: raw.residual_diag.iter().sum(),
    })
}

/// End-to-end diagonalisation of a pointwise covariance kernel.
pub fn decompose(
    kernel: &KernelSpec,
    alpha: f64,
    k_max: u32,
    max_modes: usize,
    norm_mode: NormMode,
    pivot_tol_rel: f64,
) -> Result<Decomposition> {
    if matches!(kernel.family, KernelFamily::WhiteNoise { .. }) {
        return Err(GrfError::MeasureValuedKernel);
    }
    let tc = tensor_coefficients(kernel, k_max, alpha, DEFAULT_INDEX_CAP)?;
    biorthogonalize(&tc, pivot_tol_rel, norm_mode, max_modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(rho: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])
    }

    #[test]
    fn pivoted_biorth_correlated_pair() {
        let c = two_by_two(0.5);
        let raw = pivoted_biorth(&c, |l| l.norm(), 10, 1e-12).unwrap();
        assert_eq!(raw.pivots, vec![0, 1]);
        assert!((raw.eigenvalues[0] - 1.25).abs() < 1e-14);
        assert!((raw.eigenvalues[1] - 0.75).abs() < 1e-14);
        // second pivot diagonal is 1 - rho^2
        assert!((raw.pivot_values[1] - 0.75).abs() < 1e-14);
        // reconstruction is exact
        let mut rec = DMatrix::zeros(2, 2);
        for (l, m) in raw.eigenvalues.iter().zip(&raw.modes) {
            rec += m * m.transpose() * *l;
        }
        assert!((rec - c).norm() < 1e-14);
    }

    #[test]
    fn diagonal_input_is_fixed_point() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let raw = pivoted_biorth(&c, |l| l.norm(), 10, 1e-12).unwrap();
        assert!((raw.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!((raw.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert_eq!(raw.pivots, vec![0, 1]);
        assert!((raw.modes[0][0] - 2.0f64.sqrt() / 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(raw.modes[0][1], 0.0);
        assert_eq!(raw.modes[1][0], 0.0);
        assert!((raw.modes[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pivot_prefers_largest_diagonal() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let raw = pivoted_biorth(&c, |l| l.norm(), 10, 1e-12).unwrap();
        assert_eq!(raw.pivots, vec![1, 0]);
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let c = two_by_two(2.0);
        match pivoted_biorth(&c, |l| l.norm(), 10, 1e-12) {
            Err(GrfError::NotPositiveSemidefinite { value, .. }) => assert!(value < 0.0),
            other => panic!("expected NotPositiveSemidefinite, got {other:?}"),
        }
    }

    #[test]
    fn rank_deficient_stops_early() {
        let v = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let c = &v * v.transpose();
        let raw = pivoted_biorth(&c, |l| l.norm(), 10, 1e-12).unwrap();
        assert_eq!(raw.eigenvalues.len(), 1);
        assert!(raw.residual_diag.iter().all(|&d| d.abs() < 1e-12));
    }

    #[test]
    fn max_modes_truncates() {
        let c = DMatrix::identity(5, 5);
        let raw = pivoted_biorth(&c, |l| l.norm(), 3, 1e-12).unwrap();
        assert_eq!(raw.eigenvalues.len(), 3);
        let residual: f64 = raw.residual_diag.iter().sum();
        assert!((residual - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalue_scale_equivariance() {
        let c = two_by_two(0.3);
        let a = pivoted_biorth(&c, |l| l.norm(), 10, 1e-12).unwrap();
        let b = pivoted_biorth(&(&c * 4.0), |l| l.norm(), 10, 1e-12).unwrap();
        for (la, lb) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((4.0 * la - lb).abs() < 1e-13);
        }
        for (ma, mb) in a.modes.iter().zip(&b.modes) {
            assert!((ma - mb).norm() < 1e-13);
        }
    }

    #[test]
    fn pivot_values_non_increasing() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        let tc = tensor_coefficients(&k, 4, 0.5, DEFAULT_INDEX_CAP).unwrap();
        let raw = pivoted_biorth(&tc.matrix, |l| l.norm(), tc.matrix.nrows(), 1e-12).unwrap();
        for w in raw.pivot_values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn lambdas_sorted_nonincreasing() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        let d = decompose(&k, 0.5, 3, 100, NormMode::GridHoelder, 1e-12).unwrap();
        for w in d.lambdas.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn tensor_coefficients_level_zero_exp() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        let tc = tensor_coefficients(&k, 0, 0.5, DEFAULT_INDEX_CAP).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(tc.matrix.nrows(), 2);
        assert!((tc.matrix[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((tc.matrix[(0, 1)] - e).abs() < 1e-15);
        assert!((tc.matrix[(1, 0)] - e).abs() < 1e-15);
        assert!((tc.matrix[(1, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_coefficients_white_noise_level_zero() {
        let k = KernelSpec::white_noise(crate::kernels::BaseMeasure::Lebesgue, 1);
        let tc = tensor_coefficients(&k, 0, 0.0, DEFAULT_INDEX_CAP).unwrap();
        assert!((tc.matrix[(0, 0)] - 1.0 / 3.0).abs() < 1e-13);
        assert!((tc.matrix[(0, 1)] - 1.0 / 6.0).abs() < 1e-13);
        assert!((tc.matrix[(1, 1)] - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn tensor_coefficients_cap() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        assert!(matches!(
            tensor_coefficients(&k, 5, 0.5, 10),
            Err(GrfError::CapExceeded { requested: 33, cap: 10 })
        ));
    }

    #[test]
    fn apply_cov_column_extraction_and_linearity() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        let tc = tensor_coefficients(&k, 0, 0.5, DEFAULT_INDEX_CAP).unwrap();
        let e1 = DVector::from_vec(vec![0.0, 1.0]);
        let col = tc.apply_cov(&e1).unwrap();
        assert!((col[0] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((col[1] - 1.0).abs() < 1e-15);
        let v = DVector::from_vec(vec![1.5, -2.0]);
        let w = DVector::from_vec(vec![0.25, 3.0]);
        let lhs = tc.apply_cov(&(&v * 2.0 + &w * 3.0)).unwrap();
        let rhs = tc.apply_cov(&v).unwrap() * 2.0 + tc.apply_cov(&w).unwrap() * 3.0;
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(matches!(
            tc.apply_cov(&DVector::zeros(3)),
            Err(GrfError::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn norm_mode_invariant_reconstruction() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        let d1 = decompose(&k, 0.5, 2, 100, NormMode::CoefficientEuclidean, 1e-12).unwrap();
        let d2 = decompose(&k, 0.5, 2, 100, NormMode::GridHoelder, 1e-12).unwrap();
        let n = d1.indices.len();
        for p in 0..n {
            for q in 0..n {
                let a = d1.reconstructed_entry(p, q);
                let b = d2.reconstructed_entry(p, q);
                assert!((a - b).abs() < 1e-10, "entry ({p},{q}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn full_decomposition_reconstructs_coefficient_matrix() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        let tc = tensor_coefficients(&k, 3, 0.5, DEFAULT_INDEX_CAP).unwrap();
        let d = biorthogonalize(&tc, 1e-12, NormMode::CoefficientEuclidean, usize::MAX).unwrap();
        let report = verify_biorthogonality(&d, &tc).unwrap();
        assert!(report.reconstruction_residual < 1e-10);
        assert!(report.max_offdiag_pairing < 1e-8 * report.lambda_max);
        assert!(report.lambda_min >= 0.0);
    }

    #[test]
    fn verify_biorthogonality_white_noise() {
        let k = KernelSpec::white_noise(crate::kernels::BaseMeasure::Lebesgue, 1);
        let tc = tensor_coefficients(&k, 4, 0.0, DEFAULT_INDEX_CAP).unwrap();
        let d = biorthogonalize(&tc, 1e-12, NormMode::CoefficientEuclidean, usize::MAX).unwrap();
        let report = verify_biorthogonality(&d, &tc).unwrap();
        assert!(report.max_offdiag_pairing < 1e-8 * report.lambda_max);
    }

    #[test]
    fn congruence_matches_dense_eigendecomposition() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        let tc = tensor_coefficients(&k, 3, 0.5, DEFAULT_INDEX_CAP).unwrap();
        let d = biorthogonalize(&tc, 1e-12, NormMode::CoefficientEuclidean, usize::MAX).unwrap();
        let eig = nalgebra::SymmetricEigen::new(tc.matrix.clone());
        let mut oracle = DMatrix::zeros(tc.matrix.nrows(), tc.matrix.ncols());
        for (i, l) in eig.eigenvalues.iter().enumerate() {
            if *l > 0.0 {
                let u = eig.eigenvectors.column(i);
                oracle += u * u.transpose() * *l;
            }
        }
        for p in 0..tc.matrix.nrows() {
            for q in 0..tc.matrix.ncols() {
                assert!((d.reconstructed_entry(p, q) - oracle[(p, q)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn nuclearity_trace_increment_decreases() {
        // renormalisation exponent well below the kernel regularity, so
        // the total weight converges as the resolution grows
        let k = KernelSpec::exp_alpha(0.9, 1).unwrap();
        let traces: Vec<f64> = (2..=5)
            .map(|km| {
                let d = decompose(&k, 0.3, km, usize::MAX, NormMode::CoefficientEuclidean, 1e-12)
                    .unwrap();
                d.lambdas.iter().sum()
            })
            .collect();
        let incs: Vec<f64> = traces.windows(2).map(|w| w[1] - w[0]).collect();
        for w in incs.windows(2) {
            assert!(w[1] < w[0], "trace increments should shrink: {incs:?}");
        }
    }

    #[test]
    fn grid_hoelder_norm_of_single_basis_function_is_one() {
        // a renormalised hat has sup 2^(-alpha k) and Hoelder quotient
        // exactly 1, attained across one half-support
        let alpha = 0.5;
        for k_max in [0u32, 1, 2] {
            let idx = enumerate_dyadic(1, k_max).unwrap();
            let basis = make_basis(&idx, alpha).unwrap();
            let last = idx.len() - 1;
            let mut coeffs = DVector::zeros(idx.len());
            coeffs[last] = 1.0;
            let n = grid_hoelder_norm(&coeffs, &basis, alpha, 1, k_max);
            assert!((n - 1.0).abs() < 1e-12, "k_max={k_max}: norm {n}");
        }
    }

    #[test]
    fn energy_truncation_keeps_largest() {
        let k = KernelSpec::exp_alpha(0.9, 1).unwrap();
        let d = decompose(&k, 0.3, 4, usize::MAX, NormMode::CoefficientEuclidean, 1e-12).unwrap();
        let t = d.energy_truncate(0.01).unwrap();
        assert!(t.n_modes() < d.n_modes());
        let kept: f64 = t.lambdas.iter().sum();
        let total: f64 = d.lambdas.iter().sum();
        assert!(kept >= 0.99 * total);
    }

    #[test]
    fn serde_roundtrip_bit_exact() {
        let k = KernelSpec::exp_alpha(0.5, 1).unwrap();
        let d = decompose(&k, 0.5, 2, 100, NormMode::CoefficientEuclidean, 1e-12).unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        d.save(tmp.path()).unwrap();
        let back = Decomposition::load(tmp.path()).unwrap();
        assert_eq!(d.lambdas, back.lambdas);
        assert_eq!(d.phis, back.phis);
        assert_eq!(d.etas, back.etas);
        assert_eq!(d.pivots, back.pivots);
    }

    #[test]
    fn white_noise_routed_away() {
        let k = KernelSpec::white_noise(crate::kernels::BaseMeasure::Lebesgue, 1);
        assert!(matches!(
            decompose(&k, 0.5, 2, 10, NormMode::CoefficientEuclidean, 1e-12),
            Err(GrfError::MeasureValuedKernel)
        ));
    }
}
