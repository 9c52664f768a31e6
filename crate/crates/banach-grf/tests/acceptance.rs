//! Acceptance suite: each test exercises one end-to-end guarantee of the
//! library with pinned tolerances and a time budget, and prints a single
//! PASS/FAIL line (run with `--nocapture` to see them on success).

use banach_grf::analysis::{
    besov_partial_sums, estimate_holder_exponent, mode_values_at, moments, nystrom_mercer,
    random_triples, sandwich_check,
};
use banach_grf::decomp::{
    biorthogonalize, decompose, tensor_coefficients, verify_biorthogonality, NormMode,
    DEFAULT_INDEX_CAP, DEFAULT_PIVOT_TOL_REL,
};
use banach_grf::dyadic::{coeff_functional, enumerate_dyadic, BasisFunction};
use banach_grf::kernels::{BaseMeasure, KernelSpec};
use banach_grf::measures::{basis_moments, sample_measure_field, whitenoise_decomposition, MeasureRepresentation};
use banach_grf::sampler::{draw_sample, field_on_grid};
use std::time::Instant;

fn report(tag: &str, pass: bool, detail: &str, elapsed: f64, budget: f64) -> bool {
    let timed = elapsed <= budget;
    let ok = pass && timed;
    println!(
        "[{tag}] {}: {detail} (elapsed {elapsed:.2}s / budget {budget:.0}s)",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

#[test]
fn c01_biorthogonality_residuals() {
    let t0 = Instant::now();
    let spec = KernelSpec::exp_alpha(0.5, 1).unwrap();
    let tc = tensor_coefficients(&spec, 6, 0.5, DEFAULT_INDEX_CAP).unwrap();
    let d = biorthogonalize(
        &tc,
        DEFAULT_PIVOT_TOL_REL,
        NormMode::CoefficientEuclidean,
        usize::MAX,
    )
    .unwrap();
    let rep = verify_biorthogonality(&d, &tc).unwrap();
    let lambda1 = d.lambdas[0];
    let pass = rep.max_offdiag_pairing <= 1e-8 * lambda1 && rep.lambda_min >= -1e-10;
    let detail = format!(
        "max_offdiag={:.3e} (tol {:.3e}), lambda_min={:.3e}",
        rep.max_offdiag_pairing,
        1e-8 * lambda1,
        rep.lambda_min
    );
    assert!(report(
        "biorthogonality",
        pass,
        &detail,
        t0.elapsed().as_secs_f64(),
        1.0
    ));
}

#[test]
fn c02_dual_basis_exactness() {
    let t0 = Instant::now();
    let alpha = 0.5;
    let indices = enumerate_dyadic(1, 6).unwrap();
    assert_eq!(indices.len(), 65);
    let basis: Vec<BasisFunction> = indices
        .iter()
        .map(|i| BasisFunction::renormalised(i.clone(), alpha).unwrap())
        .collect();
    let mut worst = 0.0f64;
    for (p, idx) in indices.iter().enumerate() {
        let mu = coeff_functional(idx, alpha);
        for (q, f) in basis.iter().enumerate() {
            let val = mu.apply(|x| f.eval_unchecked(x));
            let target = if p == q { 1.0 } else { 0.0 };
            worst = worst.max((val - target).abs());
        }
    }
    let pass = worst <= 1e-12;
    assert!(report(
        "dual-basis exactness",
        pass,
        &format!("max |<mu_p, f_q> - delta_pq| = {worst:.3e} over 65x65 pairs"),
        t0.elapsed().as_secs_f64(),
        1.0
    ));
}

#[test]
fn c03_covariance_reproduction() {
    let t0 = Instant::now();
    let d = decompose(
        &KernelSpec::exp_alpha(0.5, 1).unwrap(),
        0.5,
        5,
        usize::MAX,
        NormMode::CoefficientEuclidean,
        DEFAULT_PIVOT_TOL_REL,
    )
    .unwrap();
    let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![0.25], vec![0.5]];
    let modes_at = mode_values_at(&d, &pts).unwrap();
    let target = |a: usize, b: usize| -> f64 {
        (0..d.n_modes())
            .map(|i| d.lambdas[i] * modes_at[i][a] * modes_at[i][b])
            .sum()
    };
    let n: u64 = 200_000;
    let mut sum = [[0.0f64; 3]; 3];
    let mut sumsq = [[0.0f64; 3]; 3];
    for stream in 0..n {
        let s = draw_sample(&d, 2024, stream).unwrap();
        let vals: [f64; 3] = std::array::from_fn(|p| {
            s.coeffs
                .iter()
                .zip(modes_at.iter())
                .map(|(c, mv)| c * mv[p])
                .sum()
        });
        for a in 0..3 {
            for b in 0..3 {
                let prod = vals[a] * vals[b];
                sum[a][b] += prod;
                sumsq[a][b] += prod * prod;
            }
        }
    }
    let nf = n as f64;
    let mut worst_z = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            let mean = sum[a][b] / nf;
            let var = (sumsq[a][b] / nf - mean * mean).max(0.0);
            let se = (var / nf).sqrt().max(f64::MIN_POSITIVE);
            worst_z = worst_z.max((mean - target(a, b)).abs() / se);
        }
    }
    let pass = worst_z <= 4.0;
    assert!(report(
        "covariance reproduction",
        pass,
        &format!("worst |estimate - target| = {worst_z:.2} stderr over 9 pairs, N={n}"),
        t0.elapsed().as_secs_f64(),
        60.0
    ));
}

#[test]
fn c04_quadrature_oracle_equivalence() {
    let t0 = Instant::now();
    let spec = KernelSpec::exp_alpha(0.5, 1).unwrap();
    let d = decompose(
        &spec,
        0.5,
        5,
        usize::MAX,
        NormMode::CoefficientEuclidean,
        DEFAULT_PIVOT_TOL_REL,
    )
    .unwrap();
    let nd = nystrom_mercer(&spec, 512).unwrap();
    let pts = [0.0, 0.25, 0.5];
    let mut worst = 0.0f64;
    for &x in &pts {
        for &y in &pts {
            let kl = d.reconstructed_kernel(&[x], &[y]).unwrap();
            let ny = nd.covariance_at(&spec, &[x], &[y], 0.0).unwrap();
            worst = worst.max((kl - ny).abs());
        }
    }
    let tol = 0.02;
    let pass = worst <= tol;
    assert!(report(
        "quadrature oracle equivalence",
        pass,
        &format!("max |series - quadrature| = {worst:.4e} (tol {tol})"),
        t0.elapsed().as_secs_f64(),
        60.0
    ));
}

#[test]
fn c05_holder_exponent_recovery() {
    let t0 = Instant::now();
    let res: u32 = 10;
    let mut details = Vec::new();
    let mut pass = true;
    for &alpha in &[0.3f64, 0.5, 0.7] {
        let d = decompose(
            &KernelSpec::exp_alpha(alpha, 1).unwrap(),
            alpha,
            10,
            usize::MAX,
            NormMode::CoefficientEuclidean,
            DEFAULT_PIVOT_TOL_REL,
        )
        .unwrap();
        let mut acc = 0.0;
        let n_paths = 20;
        for stream in 0..n_paths {
            let s = draw_sample(&d, 99, stream).unwrap();
            let (_, values) = field_on_grid(&s, &d, res, 1 << 22).unwrap();
            acc += estimate_holder_exponent(&values, res).unwrap();
        }
        let mean = acc / n_paths as f64;
        pass &= (mean - alpha).abs() <= 0.1;
        details.push(format!("alpha={alpha}: mean={mean:.3}"));
    }
    assert!(report(
        "Hoelder exponent recovery",
        pass,
        &format!("{} (band +-0.1)", details.join(", ")),
        t0.elapsed().as_secs_f64(),
        120.0
    ));
}

#[test]
fn c06_level_sum_dichotomy() {
    let t0 = Instant::now();
    let spec = KernelSpec::exp_alpha(0.5, 1).unwrap();
    let low = besov_partial_sums(&spec, 7, 0.4).unwrap();
    let high = besov_partial_sums(&spec, 7, 0.6).unwrap();
    let mut pass = true;
    let mut worst_low = f64::NEG_INFINITY;
    let mut worst_high = f64::INFINITY;
    for k in 3..=7usize {
        let rl = low.normalized[k] / low.normalized[k - 1];
        let rh = high.normalized[k] / high.normalized[k - 1];
        worst_low = worst_low.max(rl);
        worst_high = worst_high.min(rh);
        pass &= rl < 1.0 && rh >= 1.0;
    }
    assert!(report(
        "level-sum dichotomy",
        pass,
        &format!(
            "gamma=0.4 max ratio {worst_low:.3} (<1), gamma=0.6 min ratio {worst_high:.3} (>=1), levels 3..7"
        ),
        t0.elapsed().as_secs_f64(),
        120.0
    ));
}

#[test]
fn c07_white_noise_pairings() {
    let t0 = Instant::now();
    let base = BaseMeasure::Lebesgue;
    let d = whitenoise_decomposition(&base, 1, 4).unwrap();
    let quad = 6;
    let m1 = basis_moments(&base, &d.indices, 1, |_| 1.0, quad).unwrap();
    let mx = basis_moments(&base, &d.indices, 1, |x| x[0], quad).unwrap();
    let n: u64 = 100_000;
    let (mut s11, mut s1x, mut sxx) = (0.0f64, 0.0f64, 0.0f64);
    let (mut q11, mut q1x, mut qxx) = (0.0f64, 0.0f64, 0.0f64);
    for stream in 0..n {
        let s = sample_measure_field(&d, &base, 7, stream).unwrap();
        let coeffs = match &s.representation {
            MeasureRepresentation::DensityOnGrid { coeffs } => coeffs,
            _ => unreachable!(),
        };
        let p1: f64 = coeffs.iter().zip(m1.iter()).map(|(a, b)| a * b).sum();
        let px: f64 = coeffs.iter().zip(mx.iter()).map(|(a, b)| a * b).sum();
        for (acc, accsq, v) in [
            (&mut s11, &mut q11, p1 * p1),
            (&mut s1x, &mut q1x, p1 * px),
            (&mut sxx, &mut qxx, px * px),
        ] {
            *acc += v;
            *accsq += v * v;
        }
    }
    let nf = n as f64;
    let mut pass = true;
    let mut details = Vec::new();
    for (name, acc, accsq, target) in [
        ("var<1>", s11, q11, 1.0),
        ("cov<1,x>", s1x, q1x, 0.5),
        ("var<x>", sxx, qxx, 1.0 / 3.0),
    ] {
        let mean = acc / nf;
        let var = (accsq / nf - mean * mean).max(0.0);
        let se = (var / nf).sqrt().max(f64::MIN_POSITIVE);
        let z = (mean - target).abs() / se;
        pass &= z <= 4.0;
        details.push(format!("{name}={mean:.4} ({z:.2} se)"));
    }
    assert!(report(
        "white-noise pairings",
        pass,
        &details.join(", "),
        t0.elapsed().as_secs_f64(),
        30.0
    ));
}

#[test]
fn c08_difference_quotient_bounds() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut worst = 0.0f64;
    for (i, &alpha) in [0.25f64, 0.5, 0.75].iter().enumerate() {
        let triples = random_triples(1, 10_000, 1234 + i as u64);
        let r = sandwich_check(alpha, &triples).unwrap();
        worst = worst
            .max(r.max_lower_violation)
            .max(r.max_upper_violation);
        pass &= r.max_lower_violation <= 1e-12 && r.max_upper_violation <= 1e-12;
    }
    assert!(report(
        "difference-quotient bounds",
        pass,
        &format!("max violation {worst:.3e} over 3x10^4 triples (tol 1e-12)"),
        t0.elapsed().as_secs_f64(),
        5.0
    ));
}

#[test]
fn c09_quadrature_trace() {
    let t0 = Instant::now();
    let spec = KernelSpec::exp_alpha(0.5, 1).unwrap();
    let nd = nystrom_mercer(&spec, 512).unwrap();
    let total: f64 = nd.eigenvalues.iter().sum();
    let err = (total - 1.0).abs();
    let pass = err <= 1e-3;
    assert!(report(
        "quadrature trace",
        pass,
        &format!("|eigenvalue sum - 1| = {err:.3e} (tol 1e-3) at 512 nodes"),
        t0.elapsed().as_secs_f64(),
        10.0
    ));
}

#[test]
fn c10_gaussianity_of_functionals() {
    let t0 = Instant::now();
    let d = decompose(
        &KernelSpec::exp_alpha(0.5, 1).unwrap(),
        0.5,
        4,
        usize::MAX,
        NormMode::CoefficientEuclidean,
        DEFAULT_PIVOT_TOL_REL,
    )
    .unwrap();
    let pts: Vec<Vec<f64>> = vec![vec![0.1], vec![0.35], vec![0.5], vec![0.75], vec![0.9]];
    let modes_at = mode_values_at(&d, &pts).unwrap();
    let n: u64 = 100_000;
    let mut series = vec![Vec::with_capacity(n as usize); pts.len()];
    for stream in 0..n {
        let s = draw_sample(&d, 31, stream).unwrap();
        for (p, col) in series.iter_mut().enumerate() {
            col.push(
                s.coeffs
                    .iter()
                    .zip(modes_at.iter())
                    .map(|(c, mv)| c * mv[p])
                    .sum::<f64>(),
            );
        }
    }
    let se_skew = (6.0 / n as f64).sqrt();
    let se_kurt = (24.0 / n as f64).sqrt();
    let mut pass = true;
    let mut worst_skew = 0.0f64;
    let mut worst_kurt = 0.0f64;
    for col in &series {
        let m = moments(col).unwrap();
        worst_skew = worst_skew.max(m.skewness.abs() / se_skew);
        worst_kurt = worst_kurt.max(m.excess_kurtosis.abs() / se_kurt);
    }
    pass &= worst_skew <= 4.0 && worst_kurt <= 4.0;
    assert!(report(
        "Gaussianity of functionals",
        pass,
        &format!(
            "worst |skewness| = {worst_skew:.2} se, worst |excess kurtosis| = {worst_kurt:.2} se, 5 functionals, N={n}"
        ),
        t0.elapsed().as_secs_f64(),
        60.0
    ));
}

#[test]
fn c11_reproducibility() {
    let t0 = Instant::now();
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_grf"))
            .args([
                "validate-cov",
                "--kernel",
                "exp-alpha:0.5",
                "--dim",
                "1",
                "--k-max",
                "3",
                "--alpha",
                "0.5",
                "--n-samples",
                "5000",
                "--seed",
                "17",
            ])
            .output()
            .expect("binary runs")
    };
    let a = run();
    let b = run();
    let pass = a.status.success() && b.status.success() && a.stdout == b.stdout;
    assert!(report(
        "reproducibility",
        pass,
        &format!(
            "two validate-cov runs byte-identical: {} ({} bytes)",
            a.stdout == b.stdout,
            a.stdout.len()
        ),
        t0.elapsed().as_secs_f64(),
        120.0
    ));
}
