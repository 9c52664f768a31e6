//! Command-line front end: decomposition, sampling, and validation of
//! Gaussian random fields built on tensor hat bases.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage/config error.

use banach_grf::analysis::{
    estimate_holder_exponent, holder_seminorm, mode_values_at, nystrom_mercer, random_triples,
    sandwich_check,
};
use banach_grf::config::{fmt_f64, RunConfig};
use banach_grf::decomp::{biorthogonalize, tensor_coefficients, Decomposition, NormMode};
use banach_grf::error::{GrfError, Result};
use banach_grf::kernels::{BaseMeasure, KernelFamily, KernelSpec};
use banach_grf::measures::{
    basis_moments, sample_measure_field, whitenoise_decomposition, MeasureRepresentation,
};
use banach_grf::sampler::{draw_sample, field_on_grid};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "grf",
    about = "Gaussian random fields on Hoelder spaces and spaces of measures",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat `key = value` config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kernel grammar, e.g. `exp-alpha:0.5`, `gaussian-se:1.0`,
    /// `white-noise:lebesgue`.
    #[arg(long)]
    kernel: Option<String>,
    /// Domain dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Highest dyadic resolution level of the basis.
    #[arg(long)]
    k_max: Option<u32>,
    /// Hoelder renormalisation exponent of the basis.
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated regularity-sweep exponents.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte-Carlo samples.
    #[arg(long)]
    n_samples: Option<u64>,
    /// Output grid resolution (2^r + 1 nodes per axis).
    #[arg(long)]
    grid_resolution: Option<u32>,
    /// Relative pivot tolerance of the diagonalisation.
    #[arg(long)]
    pivot_tol: Option<f64>,
    /// Mode normalisation: grid-hoelder | coefficient-euclidean |
    /// total-variation.
    #[arg(long)]
    norm_mode: Option<String>,
    /// Energy cutoff epsilon in [0, 1); 0 keeps all terms.
    #[arg(long)]
    energy_cutoff: Option<f64>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.kernel {
            cfg.kernel = v.clone();
        }
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = self.k_max {
            cfg.k_max = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = &self.gammas {
            cfg.gammas = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.n_samples {
            cfg.n_samples = v;
        }
        if let Some(v) = self.grid_resolution {
            cfg.grid_resolution = v;
        }
        if let Some(v) = self.pivot_tol {
            cfg.pivot_tol = v;
        }
        if let Some(v) = &self.norm_mode {
            cfg.norm_mode = v.clone();
        }
        if let Some(v) = self.energy_cutoff {
            cfg.energy_cutoff = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.display().to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Diagonalise a covariance kernel into weighted modes and write the
    /// decomposition as JSON.
    Decompose(Common),
    /// Draw field samples from a decomposition file and write grid values
    /// as CSV.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Decomposition JSON produced by `decompose`.
        #[arg(long)]
        decomp: PathBuf,
        /// Number of samples (stream indices 0..n).
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Compare empirical covariances of point evaluations against the
    /// decomposition targets at the 9 pairs from {0, 1/4, 1/2}^2.
    ValidateCov(Common),
    /// Estimate Hoelder exponents of sampled paths and optionally check
    /// them against a band.
    Holder {
        #[command(flatten)]
        common: Common,
        /// Fail (exit 1) unless the mean exponent lies in [lo, hi].
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        band: Option<Vec<f64>>,
    },
    /// Per-level l1 coefficient sums under each sweep exponent.
    Besov(Common),
    /// White-noise pairing variance checks against exact targets.
    Whitenoise(Common),
    /// Quadrature (Nystrom) eigendecomposition report for a pointwise
    /// kernel.
    MercerOracle {
        #[command(flatten)]
        common: Common,
        /// Quadrature nodes per axis.
        #[arg(long, default_value_t = 512)]
        grid_size: usize,
        /// Fail (exit 1) if |eigenvalue sum - trace| exceeds this.
        #[arg(long)]
        trace_tol: Option<f64>,
    },
    /// Check the two-sided kernel difference-quotient estimate on random
    /// triples.
    Sandwich {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        n_triples: usize,
    },
}

fn write_out(path: Option<&str>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(content.as_bytes())?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn build_decomposition(cfg: &RunConfig) -> Result<Decomposition> {
    let kernel = KernelSpec::parse(&cfg.kernel, cfg.dim)?;
    let d = match &kernel.family {
        KernelFamily::WhiteNoise { base } => whitenoise_decomposition(base, cfg.dim, cfg.k_max)?,
        _ => {
            let tc = tensor_coefficients(
                &kernel,
                cfg.k_max,
                cfg.alpha,
                banach_grf::decomp::DEFAULT_INDEX_CAP,
            )?;
            biorthogonalize(
                &tc,
                cfg.pivot_tol,
                NormMode::parse(&cfg.norm_mode)?,
                usize::MAX,
            )?
        }
    };
    if cfg.energy_cutoff > 0.0 {
        d.energy_truncate(cfg.energy_cutoff)
    } else {
        Ok(d)
    }
}

fn base_from_family(family: &str) -> Result<BaseMeasure> {
    let spec = KernelSpec::parse(family, 1)?;
    match spec.family {
        KernelFamily::WhiteNoise { base } => Ok(base),
        _ => Err(GrfError::InvalidArgument(format!(
            "`{family}` is not a white-noise kernel"
        ))),
    }
}

fn cmd_decompose(cfg: &RunConfig) -> Result<bool> {
    let out = cfg.out.as_deref().ok_or_else(|| {
        GrfError::InvalidArgument("decompose requires --out for the decomposition file".into())
    })?;
    let d = build_decomposition(cfg)?;
    d.save(std::path::Path::new(out))?;
    println!(
        "kernel={} indices={} modes={} trace={} residual={}",
        d.family,
        d.indices.len(),
        d.n_modes(),
        fmt_f64(d.lambdas.iter().sum::<f64>()),
        fmt_f64(d.residual_trace)
    );
    Ok(true)
}

fn cmd_sample(cfg: &RunConfig, decomp: &PathBuf, n: u64) -> Result<bool> {
    let d = Decomposition::load(decomp)?;
    let mut csv = String::new();
    let axes: String = (1..=d.dim).map(|i| format!("x{i},")).collect();
    if n > 1 {
        csv.push_str("sample,");
    }
    csv.push_str(&axes);
    csv.push_str("value\n");
    for s_idx in 0..n {
        let rows: Vec<(Vec<f64>, f64)> = if d.norm_mode == NormMode::TotalVariation {
            let base = base_from_family(&d.family)?;
            let m = sample_measure_field(&d, &base, cfg.seed, s_idx)?;
            match &m.representation {
                MeasureRepresentation::AtomList { atoms } => atoms.clone(),
                MeasureRepresentation::DensityOnGrid { coeffs } => {
                    let basis = d.basis()?;
                    let per = (1usize << cfg.grid_resolution) + 1;
                    (0..per)
                        .map(|i| {
                            let x = i as f64 / (per - 1) as f64;
                            let v: f64 = basis
                                .iter()
                                .zip(coeffs)
                                .map(|(b, &c)| c * b.eval_unchecked(&[x]))
                                .sum();
                            (vec![x], v)
                        })
                        .collect()
                }
            }
        } else {
            let s = draw_sample(&d, cfg.seed, s_idx)?;
            let (nodes, values) = field_on_grid(&s, &d, cfg.grid_resolution, 1 << 22)?;
            nodes.into_iter().zip(values).collect()
        };
        for (pt, v) in rows {
            if n > 1 {
                csv.push_str(&format!("{s_idx},"));
            }
            for c in &pt {
                csv.push_str(&fmt_f64(*c));
                csv.push(',');
            }
            csv.push_str(&fmt_f64(v));
            csv.push('\n');
        }
    }
    write_out(cfg.out.as_deref(), &csv)?;
    Ok(true)
}

fn cmd_validate_cov(cfg: &RunConfig) -> Result<bool> {
    let d = build_decomposition(cfg)?;
    if d.norm_mode == NormMode::TotalVariation {
        return Err(GrfError::InvalidArgument(
            "validate-cov applies to pointwise kernels; use `whitenoise`".into(),
        ));
    }
    let pts: Vec<Vec<f64>> = [0.0, 0.25, 0.5]
        .iter()
        .map(|&x| vec![x; cfg.dim])
        .collect();
    let modes_at = mode_values_at(&d, &pts)?;
    let targets: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            (0..3)
                .map(|b| {
                    (0..d.n_modes())
                        .map(|i| d.lambdas[i] * modes_at[i][a] * modes_at[i][b])
                        .sum()
                })
                .collect()
        })
        .collect();
    let n = cfg.n_samples.max(2);
    let mut sum = vec![vec![0.0f64; 3]; 3];
    let mut sumsq = vec![vec![0.0f64; 3]; 3];
    for stream in 0..n {
        let s = draw_sample(&d, cfg.seed, stream)?;
        let vals: Vec<f64> = (0..3)
            .map(|p| {
                s.coeffs
                    .iter()
                    .zip(modes_at.iter())
                    .map(|(c, mv)| c * mv[p])
                    .sum()
            })
            .collect();
        for a in 0..3 {
            for b in 0..3 {
                let prod = vals[a] * vals[b];
                sum[a][b] += prod;
                sumsq[a][b] += prod * prod;
            }
        }
    }
    let mut csv = String::from("metric,kernel,alpha,k_max,n_samples,seed,x,y,estimate,target,stderr,tolerance,pass\n");
    let mut all_pass = true;
    for a in 0..3 {
        for b in 0..3 {
            let nf = n as f64;
            let mean = sum[a][b] / nf;
            let var = (sumsq[a][b] / nf - mean * mean).max(0.0);
            let se = (var / nf).sqrt();
            let tol = 4.0 * se;
            let pass = (mean - targets[a][b]).abs() <= tol;
            all_pass &= pass;
            csv.push_str(&format!(
                "covariance,{},{},{},{},{},{},{},{},{},{},{},{}\n",
                cfg.kernel,
                fmt_f64(cfg.alpha),
                cfg.k_max,
                n,
                cfg.seed,
                fmt_f64(pts[a][0]),
                fmt_f64(pts[b][0]),
                fmt_f64(mean),
                fmt_f64(targets[a][b]),
                fmt_f64(se),
                fmt_f64(tol),
                if pass { "pass" } else { "fail" }
            ));
        }
    }
    write_out(cfg.out.as_deref(), &csv)?;
    Ok(all_pass)
}

fn cmd_holder(cfg: &RunConfig, band: Option<&[f64]>) -> Result<bool> {
    let d = build_decomposition(cfg)?;
    let res = cfg.grid_resolution;
    let mut csv = String::from("sample,exponent\n");
    let mut exps = Vec::new();
    for stream in 0..cfg.n_samples.max(1) {
        let s = draw_sample(&d, cfg.seed, stream)?;
        let (_, values) = field_on_grid(&s, &d, res, 1 << 22)?;
        let e = estimate_holder_exponent(&values, res)?;
        csv.push_str(&format!("{stream},{}\n", fmt_f64(e)));
        exps.push(e);
    }
    let mean = exps.iter().sum::<f64>() / exps.len() as f64;
    csv.push_str(&format!("mean,{}\n", fmt_f64(mean)));
    for &g in &cfg.gammas {
        let s = draw_sample(&d, cfg.seed, 0)?;
        let (_, values) = field_on_grid(&s, &d, res, 1 << 22)?;
        let sn = holder_seminorm(&values, cfg.dim, res, g)?;
        csv.push_str(&format!("seminorm:{},{}\n", g, fmt_f64(sn)));
    }
    write_out(cfg.out.as_deref(), &csv)?;
    match band {
        Some([lo, hi]) => Ok(mean >= *lo && mean <= *hi),
        _ => Ok(true),
    }
}

fn cmd_besov(cfg: &RunConfig) -> Result<bool> {
    let kernel = KernelSpec::parse(&cfg.kernel, cfg.dim)?;
    let mut csv = String::from("gamma,level,raw_sum,normalized_sum,normalized_ratio\n");
    for &g in &cfg.gammas {
        let sums = banach_grf::analysis::besov_partial_sums(&kernel, cfg.k_max, g)?;
        for (k, (r, nz)) in sums.raw.iter().zip(&sums.normalized).enumerate() {
            let ratio = if k == 0 {
                String::from("nan")
            } else {
                fmt_f64(sums.normalized[k] / sums.normalized[k - 1])
            };
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                g,
                k,
                fmt_f64(*r),
                fmt_f64(*nz),
                ratio
            ));
        }
    }
    write_out(cfg.out.as_deref(), &csv)?;
    Ok(true)
}

fn cmd_whitenoise(cfg: &RunConfig) -> Result<bool> {
    let base = base_from_family(&cfg.kernel)
        .or_else(|_| base_from_family(&format!("white-noise:{}", cfg.kernel)))?;
    let d = whitenoise_decomposition(&base, cfg.dim, cfg.k_max)?;
    let quad = cfg.k_max.max(1) + 2;
    let m1 = basis_moments(&base, &d.indices, cfg.dim, |_| 1.0, quad)?;
    let mx = basis_moments(&base, &d.indices, cfg.dim, |x| x[0], quad)?;
    let n = cfg.n_samples.max(2);
    let (mut s11, mut s1x, mut sxx) = (0.0f64, 0.0f64, 0.0f64);
    let (mut q11, mut q1x, mut qxx) = (0.0f64, 0.0f64, 0.0f64);
    for stream in 0..n {
        let s = sample_measure_field(&d, &base, cfg.seed, stream)?;
        let coeffs = match &s.representation {
            MeasureRepresentation::DensityOnGrid { coeffs } => coeffs.clone(),
            MeasureRepresentation::AtomList { .. } => {
                return Err(GrfError::InvalidArgument(
                    "whitenoise checks use density representations".into(),
                ))
            }
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
    let mut csv = String::from("metric,base,k_max,n_samples,seed,estimate,target,stderr,tolerance,pass\n");
    let mut all_pass = true;
    for (name, acc, accsq, target) in [
        ("var<1,theta>", s11, q11, 1.0),
        ("cov<1,theta><x,theta>", s1x, q1x, 0.5),
        ("var<x,theta>", sxx, qxx, 1.0 / 3.0),
    ] {
        let mean = acc / nf;
        let var = (accsq / nf - mean * mean).max(0.0);
        let se = (var / nf).sqrt();
        let tol = 4.0 * se;
        let pass = (mean - target).abs() <= tol;
        all_pass &= pass;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            name,
            base.describe(),
            cfg.k_max,
            n,
            cfg.seed,
            fmt_f64(mean),
            fmt_f64(target),
            fmt_f64(se),
            fmt_f64(tol),
            if pass { "pass" } else { "fail" }
        ));
    }
    write_out(cfg.out.as_deref(), &csv)?;
    Ok(all_pass)
}

fn cmd_mercer(cfg: &RunConfig, grid_size: usize, trace_tol: Option<f64>) -> Result<bool> {
    let kernel = KernelSpec::parse(&cfg.kernel, cfg.dim)?;
    let nd = nystrom_mercer(&kernel, grid_size)?;
    let total: f64 = nd.eigenvalues.iter().sum();
    let trace: f64 = nd
        .nodes
        .iter()
        .zip(&nd.weights)
        .map(|(x, w)| {
            w * banach_grf::kernels::eval_kernel(&kernel, x, x).unwrap_or(f64::NAN)
        })
        .sum();
    let mut csv = String::from("metric,kernel,grid_size,value\n");
    csv.push_str(&format!(
        "eigenvalue_sum,{},{},{}\n",
        cfg.kernel,
        grid_size,
        fmt_f64(total)
    ));
    csv.push_str(&format!(
        "trace,{},{},{}\n",
        cfg.kernel,
        grid_size,
        fmt_f64(trace)
    ));
    for (i, l) in nd.eigenvalues.iter().take(10).enumerate() {
        csv.push_str(&format!(
            "eigenvalue_{i},{},{},{}\n",
            cfg.kernel,
            grid_size,
            fmt_f64(*l)
        ));
    }
    write_out(cfg.out.as_deref(), &csv)?;
    Ok(match trace_tol {
        Some(t) => (total - trace).abs() <= t,
        None => true,
    })
}

fn cmd_sandwich(cfg: &RunConfig, n_triples: usize) -> Result<bool> {
    let triples = random_triples(cfg.dim, n_triples, cfg.seed);
    let r = sandwich_check(cfg.alpha, &triples)?;
    let mut csv = String::from("metric,alpha,n_triples,seed,value\n");
    csv.push_str(&format!(
        "max_lower_violation,{},{},{},{}\n",
        cfg.alpha,
        n_triples,
        cfg.seed,
        fmt_f64(r.max_lower_violation)
    ));
    csv.push_str(&format!(
        "max_upper_violation,{},{},{},{}\n",
        cfg.alpha,
        n_triples,
        cfg.seed,
        fmt_f64(r.max_upper_violation)
    ));
    csv.push_str(&format!(
        "checked,{},{},{},{}\n",
        cfg.alpha, n_triples, cfg.seed, r.checked
    ));
    csv.push_str(&format!(
        "skipped_coincident,{},{},{},{}\n",
        cfg.alpha, n_triples, cfg.seed, r.skipped_coincident
    ));
    write_out(cfg.out.as_deref(), &csv)?;
    Ok(r.max_lower_violation <= 1e-12 && r.max_upper_violation <= 1e-12)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Decompose(c) => cmd_decompose(&c.resolve()?),
        Cmd::Sample { common, decomp, n } => cmd_sample(&common.resolve()?, decomp, *n),
        Cmd::ValidateCov(c) => cmd_validate_cov(&c.resolve()?),
        Cmd::Holder { common, band } => cmd_holder(&common.resolve()?, band.as_deref()),
        Cmd::Besov(c) => cmd_besov(&c.resolve()?),
        Cmd::Whitenoise(c) => cmd_whitenoise(&c.resolve()?),
        Cmd::MercerOracle {
            common,
            grid_size,
            trace_tol,
        } => cmd_mercer(&common.resolve()?, *grid_size, *trace_tol),
        Cmd::Sandwich { common, n_triples } => cmd_sandwich(&common.resolve()?, *n_triples),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
