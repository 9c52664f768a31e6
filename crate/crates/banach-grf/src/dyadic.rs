//! Dyadic index sets, Faber-Schauder basis functions, coefficient
//! functionals, and square orderings of tensor indices.
//!
//! The one-dimensional dyadic system is `D_0 = {0, 1}` and
//! `D_k = {(2p-1) 2^-k : p = 1..2^(k-1)}` for `k >= 1`. A multi-index in
//! `D^n_k` draws each coordinate from levels `<= k` with at least one
//! coordinate at level `k` exactly.

use crate::error::{GrfError, Result};
use serde::{Deserialize, Serialize};

/// One dyadic rational stored exactly as `num / 2^level`.
///
/// Canonical form: level 0 has `num` in {0, 1}; level `k >= 1` has `num`
/// odd with `1 <= num <= 2^k - 1`. Exact storage keeps set-membership
/// tests free of float drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicCoord {
    pub num: u64,
    pub level: u32,
}

impl DyadicCoord {
    pub fn new(num: u64, level: u32) -> Result<Self> {
        let c = DyadicCoord { num, level };
        if level == 0 {
            if num > 1 {
                return Err(GrfError::InvalidArgument(format!(
                    "level-0 dyadic coordinate must be 0 or 1, got {num}"
                )));
            }
        } else {
            if num % 2 == 0 || num > (1u64 << level) {
                return Err(GrfError::InvalidArgument(format!(
                    "level-{level} dyadic coordinate needs odd numerator in [1, 2^{level}-1], got {num}"
                )));
            }
        }
        Ok(c)
    }

    /// Exact value in [0, 1]. Dyadic rationals at desk-scale levels are
    /// representable in f64 without rounding.
    pub fn value(&self) -> f64 {
        self.num as f64 / (1u64 << self.level) as f64
    }
}

/// A multi-index `tau` in `D^n_k`; `level` is the highest resolution
/// among the coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicIndex {
    coords: Vec<DyadicCoord>,
    level: u32,
}

impl DyadicIndex {
    pub fn new(coords: Vec<DyadicCoord>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GrfError::InvalidArgument("empty dyadic index".into()));
        }
        let level = coords.iter().map(|c| c.level).max().unwrap();
        Ok(DyadicIndex { coords, level })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coords(&self) -> &[DyadicCoord] {
        &self.coords
    }

    pub fn point(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.value()).collect()
    }
}

/// All indices of `D^n_0 ∪ ... ∪ D^n_kmax`, ordered by level and then
/// lexicographically by coordinate values within a level.
pub fn enumerate_dyadic(dim: usize, k_max: u32) -> Result<Vec<DyadicIndex>> {
    if dim == 0 {
        return Err(GrfError::InvalidArgument("dim must be >= 1".into()));
    }
    // Coordinates available at levels <= k, sorted by value.
    let pool = |k: u32| -> Vec<DyadicCoord> {
        let mut v = vec![
            DyadicCoord { num: 0, level: 0 },
            DyadicCoord { num: 1, level: 0 },
        ];
        for j in 1..=k {
            for p in 1..=(1u64 << (j - 1)) {
                v.push(DyadicCoord {
                    num: 2 * p - 1,
                    level: j,
                });
            }
        }
        v.sort_by(|a, b| a.value().partial_cmp(&b.value()).unwrap());
        v
    };

    let mut out = Vec::new();
    for k in 0..=k_max {
        let vals = pool(k);
        let s = vals.len();
        let total = s.checked_pow(dim as u32).ok_or(GrfError::CapExceeded {
            requested: usize::MAX,
            cap: 1 << 24,
        })?;
        if total > (1 << 24) {
            return Err(GrfError::CapExceeded {
                requested: total,
                cap: 1 << 24,
            });
        }
        let mut level_indices = Vec::new();
        let mut counter = vec![0usize; dim];
        loop {
            let coords: Vec<DyadicCoord> = counter.iter().map(|&i| vals[i]).collect();
            let max_level = coords.iter().map(|c| c.level).max().unwrap();
            if max_level == k {
                level_indices.push(DyadicIndex { coords, level: k });
            }
            // odometer increment, last coordinate fastest
            let mut pos = dim;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                counter[pos] += 1;
                if counter[pos] < s {
                    break;
                }
                counter[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
        // lexicographic by coordinate values (exact at common denominator)
        level_indices.sort_by(|a, b| {
            for (ca, cb) in a.coords.iter().zip(&b.coords) {
                let va = ca.num << (k - ca.level);
                let vb = cb.num << (k - cb.level);
                match va.cmp(&vb) {
                    std::cmp::Ordering::Equal => continue,
                    o => return o,
                }
            }
            std::cmp::Ordering::Equal
        });
        out.extend(level_indices);
    }
    Ok(out)
}

/// The mother hat `psi(t) = max(0, 1 - |t|)`, the distance function of
/// `[-1, 1]`.
pub fn eval_mother(t: f64) -> f64 {
    let a = 1.0 - t.abs();
    if a > 0.0 {
        a
    } else {
        0.0
    }
}

/// A (possibly renormalised) Faber-Schauder function
/// `2^(-alpha k) prod_i psi(2^k (x_i - tau_i))`.
///
/// `alpha = 0` gives the plain basis normalised in `C([0,1]^n)`;
/// `alpha in (0, 1]` gives the Lip/Hoelder renormalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFunction {
    index: DyadicIndex,
    alpha: f64,
}

impl BasisFunction {
    /// Renormalised variant; `alpha` must lie in (0, 1]. `alpha = 1`
    /// (plain Lipschitz scaling) is accepted although the little-Lipschitz
    /// predual argument needs `alpha < 1`.
    pub fn renormalised(index: DyadicIndex, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(GrfError::InvalidArgument(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(BasisFunction { index, alpha })
    }

    /// Plain basis function normalised in the sup norm (no Hoelder rescaling).
    pub fn plain(index: DyadicIndex) -> Self {
        BasisFunction { index, alpha: 0.0 }
    }

    pub fn index(&self) -> &DyadicIndex {
        &self.index
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Evaluate at `x` in the unit cube.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.index.dim() {
            return Err(GrfError::DimensionMismatch {
                expected: self.index.dim(),
                got: x.len(),
            });
        }
        for &xi in x {
            if !(0.0..=1.0).contains(&xi) {
                return Err(GrfError::OutOfDomain(format!("{xi}")));
            }
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the domain check; used in grid loops where the
    /// nodes are dyadic by construction.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let k = self.index.level;
        let scale = (1u64 << k) as f64;
        let mut prod = 1.0;
        for (xi, c) in x.iter().zip(self.index.coords()) {
            let v = eval_mother(scale * (xi - c.value()));
            if v == 0.0 {
                return 0.0;
            }
            prod *= v;
        }
        prod * 2f64.powf(-self.alpha * k as f64)
    }
}

/// A finite signed combination of Dirac point masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFunctional {
    atoms: Vec<(Vec<f64>, f64)>,
}

impl CoefficientFunctional {
    /// A single Dirac mass at `point`.
    pub fn dirac(point: Vec<f64>) -> Self {
        CoefficientFunctional {
            atoms: vec![(point, 1.0)],
        }
    }

    pub fn from_atoms(atoms: Vec<(Vec<f64>, f64)>) -> Self {
        let mut f = CoefficientFunctional { atoms };
        f.merge();
        f
    }

    pub fn atoms(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms
    }

    /// Pointwise sum of two functionals.
    pub fn add(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self::from_atoms(atoms)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_atoms(
            self.atoms
                .iter()
                .map(|(p, w)| (p.clone(), w * s))
                .collect(),
        )
    }

    /// Apply to a point-evaluable function: `sum_p w_p f(x_p)`.
    pub fn apply<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|(p, w)| w * f(p)).sum()
    }

    /// Fallible variant; propagates the first evaluation error.
    pub fn try_apply<F: Fn(&[f64]) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (p, w) in &self.atoms {
            acc += w * f(p)?;
        }
        Ok(acc)
    }

    fn merge(&mut self) {
        // dyadic atom coordinates are exact, so bit-level keys are safe
        let mut merged: Vec<(Vec<f64>, f64)> = Vec::new();
        'outer: for (p, w) in self.atoms.drain(..) {
            for (q, v) in merged.iter_mut() {
                if q.len() == p.len() && q.iter().zip(&p).all(|(a, b)| a.to_bits() == b.to_bits()) {
                    *v += w;
                    continue 'outer;
                }
            }
            merged.push((p, w));
        }
        merged.retain(|(_, w)| *w != 0.0);
        self.atoms = merged;
    }
}

/// The renormalised coefficient functional `mu~_tau` biorthogonal to the
/// renormalised basis: a Dirac at level 0, otherwise
/// `2^(alpha k - n) sum_eps (delta_tau - delta_tau^eps)`.
///
/// `alpha = 0` recovers the plain functionals `mu_tau`.
pub fn coeff_functional(idx: &DyadicIndex, alpha: f64) -> CoefficientFunctional {
    let n = idx.dim();
    let k = idx.level;
    if k == 0 {
        return CoefficientFunctional::dirac(idx.point());
    }
    let w = 2f64.powf(alpha * k as f64 - n as f64);
    let step = 1.0 / (1u64 << k) as f64;
    let tau = idx.point();
    let mut atoms = Vec::new();
    for mask in 0..(1u32 << n) {
        atoms.push((tau.clone(), w));
        let mut shifted = tau.clone();
        for (i, c) in idx.coords().iter().enumerate() {
            if c.level == k {
                let eps = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                shifted[i] += eps * step;
            }
        }
        atoms.push((shifted, -w));
    }
    CoefficientFunctional::from_atoms(atoms)
}

/// Enumeration mode for tensor-pair orderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderingMode {
    /// Full square ordering: block r is (r,1)..(r,r),(r-1,r)..(1,r).
    Full,
    /// Symmetric (lower-triangular) ordering: row r is (r,1)..(r,r).
    Symmetric,
}

/// The m-th pair (1-based) of the square ordering.
pub fn square_order(mode: OrderingMode, m: usize) -> Result<(usize, usize)> {
    if m == 0 {
        return Err(GrfError::InvalidArgument("rank m must be >= 1".into()));
    }
    match mode {
        OrderingMode::Full => {
            // block r occupies ranks (r-1)^2 + 1 ..= r^2
            let r = (1..).find(|&r: &usize| r * r >= m).unwrap();
            let c = m - (r - 1) * (r - 1);
            if c <= r {
                Ok((r, c))
            } else {
                Ok((2 * r - c, r))
            }
        }
        OrderingMode::Symmetric => {
            let i = (1..).find(|&i: &usize| i * (i + 1) / 2 >= m).unwrap();
            let j = m - i * (i - 1) / 2;
            Ok((i, j))
        }
    }
}

/// Inverse of [`square_order`].
pub fn square_rank(mode: OrderingMode, i: usize, j: usize) -> Result<usize> {
    if i == 0 || j == 0 {
        return Err(GrfError::InvalidArgument("indices are 1-based".into()));
    }
    match mode {
        OrderingMode::Full => {
            let r = i.max(j);
            if i == r {
                Ok((r - 1) * (r - 1) + j)
            } else {
                Ok((r - 1) * (r - 1) + r + (r - i))
            }
        }
        OrderingMode::Symmetric => {
            if j > i {
                return Err(GrfError::InvalidArgument(format!(
                    "symmetric ordering needs j <= i, got ({i}, {j})"
                )));
            }
            Ok(i * (i - 1) / 2 + j)
        }
    }
}
