use clap::{Args, ValueEnum};

use tsfn_core::dataio::{self, CsvOptions, Dataset, TrainingPlan};
use tsfn_core::linalg::{sym_eig, Matrix, Vector};
use tsfn_core::objectives::{morse_quadratic, rosenbrock, synthetic_correlated_data, Objective};
use tsfn_core::optimizer::{self, tsfn_direction, Method, OptimizerConfig, OptimizerError, Status, Truncation};
use tsfn_core::qsim::{hybrid_step, Mode, PipelineConfig};
use tsfn_core::rmt::{histogram, ks_distance, sample_wishart, MpModel};
use tsfn_core::rng::{gaussian_matrix, gaussian_vec, random_symmetric, seeded, sub_seed};
use tsfn_core::rsvd::{verify_bounds, BoundVariant, RsvdConfig};

use crate::output::{opt, Output, Table};
use crate::{CliError, Common, EXIT_DIVERGED, EXIT_MAX_ITER};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

// Aliases keep clap from treating these as repeated flags.
type Floats = Vec<f64>;
type Counts = Vec<usize>;

fn parse_list(s: &str) -> Result<Floats, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Counts, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveName {
    Rosenbrock,
    Morse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodName {
    Gd,
    Newton,
    Sfn,
    Tsfn,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Gd => Method::GradientDescent,
            MethodName::Newton => Method::Newton,
            MethodName::Sfn => Method::SaddleFreeNewton,
            MethodName::Tsfn => Method::TruncatedSaddleFreeNewton,
        }
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub objective: ObjectiveName,
    #[arg(long, value_enum)]
    pub method: MethodName,
    /// Dimension of the Rosenbrock objective.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Eigenvalues of the Morse quadratic, e.g. `1,-1`; its basis is the identity.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub lambdas: Option<Floats>,
    /// Critical point of the Morse quadratic; the origin by default.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub x_star: Option<Floats>,
    /// Start point; the origin by default.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub x0: Option<Floats>,
    /// Truncation threshold on |λ| for tsfn.
    #[arg(long, conflicts_with = "k")]
    pub threshold: Option<f64>,
    /// Keep the k largest |λ| for tsfn.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub step_scale: f64,
    #[arg(long, default_value = "trajectory.csv")]
    pub output: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn optimize(a: &OptimizeArgs, out: &Output) -> Result<u8, CliError> {
    let objective: Box<dyn Objective> = match a.objective {
        ObjectiveName::Rosenbrock => Box::new(rosenbrock(a.n).map_err(|e| usage(e.to_string()))?),
        ObjectiveName::Morse => {
            let lambdas = a.lambdas.as_ref().ok_or_else(|| usage("--objective morse needs --lambdas"))?;
            let n = lambdas.len();
            let x_star = Vector::from_vec(a.x_star.clone().unwrap_or_else(|| vec![0.0; n]));
            Box::new(morse_quadratic(lambdas, &Matrix::identity(n, n), &x_star).map_err(|e| usage(e.to_string()))?)
        }
    };
    let dim = objective.dim();
    let x0 = Vector::from_vec(a.x0.clone().unwrap_or_else(|| vec![0.0; dim]));
    if x0.len() != dim {
        return Err(usage(format!("--x0 has {} entries, the objective has dimension {dim}", x0.len())));
    }
    let truncation = match (a.threshold, a.k) {
        (Some(t), _) => Some(Truncation::Threshold(t)),
        (None, Some(k)) => Some(Truncation::TopK(k)),
        (None, None) => None,
    };
    let config = OptimizerConfig {
        method: a.method.into(),
        eta: a.eta,
        truncation,
        max_iter: a.max_iter,
        grad_tol: a.grad_tol,
        step_scale: a.step_scale,
        seed: a.common.seed,
    };
    let traj = optimizer::run(objective.as_ref(), &config, &x0).map_err(|e| match e {
        OptimizerError::Config(_) | OptimizerError::TopK { .. } => usage(e.to_string()),
        other => failed(other),
    })?;

    let mut table = Table::new(&["iter", "f", "grad_norm", "k_used", "kappa_eff", "step_norm"]);
    for i in 0..traj.iterates.len() {
        table.row(&[
            &i,
            &traj.values[i],
            &traj.grad_norms[i],
            &opt(traj.k_used[i]),
            &opt(traj.kappa_eff[i]),
            &opt(traj.step_norms[i]),
        ]);
    }
    let path = out.write(&a.output, &table.into_string())?;
    let point: Vec<String> = traj.final_point().iter().map(|v| format!("{v:.6e}")).collect();
    let (label, code) = match &traj.status {
        Status::Converged => ("converged".to_string(), 0),
        Status::MaxIterations => ("max_iter".to_string(), EXIT_MAX_ITER),
        Status::Diverged { reason } => (format!("diverged: {reason}"), EXIT_DIVERGED),
    };
    println!("status: {label}");
    println!("iterations: {}", traj.iterations());
    println!("grad_norm: {:e}", traj.final_grad_norm());
    println!("final_point: [{}]", point.join(", "));
    println!("trajectory: {}", path.display());
    Ok(code)
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct MpArgs {
    /// Matrix dimension.
    #[arg(long)]
    pub m: usize,
    /// Sample count per matrix; the aspect ratio is c = m / n.
    #[arg(long)]
    pub n: usize,
    /// Number of independent Wishart matrices pooled.
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Points on the density curve.
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn mp(a: &MpArgs, out: &Output) -> Result<u8, CliError> {
    if a.m == 0 || a.n == 0 || a.bins == 0 || a.grid < 2 {
        return Err(usage("--m, --n and --bins must be positive and --grid at least 2"));
    }
    if !(a.sigma2 > 0.0) {
        return Err(usage("--sigma2 must be positive"));
    }
    let model = MpModel::for_shape(a.m, a.n, a.sigma2).map_err(|e| usage(e.to_string()))?;
    let sigma = a.sigma2.sqrt();
    let mut eigs = Vec::with_capacity(a.m * a.samples as usize);
    for s in 0..a.samples {
        let w = sample_wishart(a.m, a.n, sigma, sub_seed(a.common.seed, s));
        eigs.extend(w.as_matrix().clone().symmetric_eigenvalues().iter());
    }

    let hi = model.c_plus * 1.1;
    let mut density = Table::new(&["lambda", "density"]);
    for i in 0..a.grid {
        let x = hi * i as f64 / (a.grid - 1) as f64;
        density.row(&[&x, &model.density(x)]);
    }
    let hist = histogram(&eigs, a.bins, 0.0, hi);
    let mut bins = Table::new(&["center", "count", "density"]);
    for ((c, n), d) in hist.centers().zip(&hist.counts).zip(hist.densities()) {
        bins.row(&[&c, n, &d]);
    }
    let density_path = out.write("mp_density.csv", &density.into_string())?;
    let hist_path = out.write("mp_histogram.csv", &bins.into_string())?;

    println!("c: {}", model.c);
    println!("edges: {:.4} {:.4}", model.c_minus, model.c_plus);
    println!("point_mass_at_zero: {}", model.point_mass_at_zero);
    println!("eigenvalues: {}", eigs.len());
    if eigs.is_empty() {
        println!("ks: n/a");
    } else {
        println!("ks: {:.6}", ks_distance(&eigs, &model).map_err(failed)?);
    }
    println!("density: {}", density_path.display());
    println!("histogram: {}", hist_path.display());
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum ModeName {
    Oracle,
    Circuit,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct QverifyArgs {
    #[arg(long, default_value_t = 20)]
    pub instances: u64,
    /// Hessian dimension.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 12)]
    pub pe_bits: u32,
    /// Readout samples; 0 reads the exact amplitudes.
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[arg(long, value_enum, default_value = "oracle")]
    pub mode: ModeName,
    /// The threshold is |λ_k| of each instance.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Register widths for the fidelity sweep.
    #[arg(long, value_parser = parse_usize_list, default_value = "4,6,8,10,12")]
    pub sweep: Counts,
    #[command(flatten)]
    pub common: Common,
}

fn cosine(a: &Vector, b: &Vector) -> f64 {
    a.dot(b) / (a.norm() * b.norm())
}

pub fn qverify(a: &QverifyArgs, out: &Output) -> Result<u8, CliError> {
    let limit = if a.mode == ModeName::Circuit { 16 } else { 2048 };
    if a.n < 2 || a.n > limit {
        return Err(usage(format!("--n must be in 2..={limit} in {:?} mode", a.mode).to_lowercase()));
    }
    if a.k == 0 || a.k > a.n {
        return Err(usage(format!("--k must be in 1..={}", a.n)));
    }
    if a.instances == 0 {
        return Err(usage("--instances must be positive"));
    }
    let sweep: Vec<u32> = a.sweep.iter().map(|&b| b as u32).collect();
    let mode = match a.mode {
        ModeName::Oracle => Mode::Oracle,
        ModeName::Circuit => Mode::Circuit,
    };

    let mut columns = vec!["instance", "threshold", "k", "cosine", "p_success", "kappa_eff", "expected_repetitions"];
    if a.shots > 0 {
        columns.extend(["signs_agree", "uncertain_signs"]);
    }
    if mode == Mode::Circuit {
        columns.push("oracle_gap");
    }
    let mut report = Table::new(&columns);
    let mut sweep_table = Table::new(&["instance", "pe_bits", "cosine"]);
    let (mut min_cos, mut agree, mut max_gap) = (f64::INFINITY, 0u64, 0.0f64);

    for i in 0..a.instances {
        let mut rng = seeded(sub_seed(a.common.seed, i));
        let h = random_symmetric(&mut rng, a.n);
        let g = Vector::from_vec(gaussian_vec(&mut rng, a.n));
        let threshold = sym_eig(&h).map_err(failed)?.eigenvalues[a.k - 1].abs();
        let (classical, _) = tsfn_direction(&h, &g, Truncation::Threshold(threshold)).map_err(failed)?;
        let base = PipelineConfig {
            pe_bits: a.pe_bits,
            threshold,
            mode,
            seed: sub_seed(a.common.seed ^ 0x9e37_79b9, i),
            ..PipelineConfig::default()
        };
        let exact_cfg = PipelineConfig { shots: 0, ..base.clone() };
        let (exact, diag) = hybrid_step(&h, &g, &exact_cfg).map_err(failed)?;
        let cos = cosine(&exact, &classical);
        min_cos = min_cos.min(cos);
        let mut cells: Vec<String> = vec![
            i.to_string(),
            threshold.to_string(),
            diag.k.to_string(),
            cos.to_string(),
            diag.p_success.to_string(),
            diag.kappa_eff.to_string(),
            diag.expected_repetitions.to_string(),
        ];
        if a.shots > 0 {
            let (sampled, sd) = hybrid_step(&h, &g, &PipelineConfig { shots: a.shots, ..base.clone() }).map_err(failed)?;
            let same = exact.iter().zip(sampled.iter()).all(|(x, y)| x.signum() == y.signum());
            agree += same as u64;
            cells.push((same as u8).to_string());
            cells.push(sd.uncertain_signs.to_string());
        }
        if mode == Mode::Circuit {
            let oracle_cfg = PipelineConfig { mode: Mode::Oracle, ..exact_cfg.clone() };
            let (oracle, _) = hybrid_step(&h, &g, &oracle_cfg).map_err(failed)?;
            let gap = (&exact - &oracle).amax();
            max_gap = max_gap.max(gap);
            cells.push(gap.to_string());
        }
        let refs: Vec<&dyn std::fmt::Display> = cells.iter().map(|c| c as &dyn std::fmt::Display).collect();
        report.row(&refs);

        for &b in &sweep {
            let cfg = PipelineConfig { pe_bits: b, ..exact_cfg.clone() };
            let (d, _) = hybrid_step(&h, &g, &cfg).map_err(failed)?;
            sweep_table.row(&[&i, &b, &cosine(&d, &classical)]);
        }
    }
    let report_path = out.write("qverify.csv", &report.into_string())?;
    let sweep_path = out.write("qverify_sweep.csv", &sweep_table.into_string())?;
    println!("instances: {}", a.instances);
    println!("min_cosine: {min_cos:.6}");
    if a.shots > 0 {
        println!("sign_agreement: {:.4}", agree as f64 / a.instances as f64);
    }
    if mode == Mode::Circuit {
        println!("max_oracle_gap: {max_gap:e}");
    }
    println!("report: {}", report_path.display());
    println!("sweep: {}", sweep_path.display());
    Ok(0)
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct RsvdArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Sampled columns; defaults to the high-probability Frobenius
    /// requirement, capped at n.
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[command(flatten)]
    pub common: Common,
}

pub fn rsvd(a: &RsvdArgs, out: &Output) -> Result<u8, CliError> {
    if a.m == 0 || a.n == 0 {
        return Err(usage("--m and --n must be positive"));
    }
    let base = RsvdConfig {
        c: 1,
        k: a.k,
        beta: a.beta,
        delta: a.delta,
        seed: a.common.seed,
    };
    if !(a.eps > 0.0) {
        return Err(usage("--eps must be positive"));
    }
    let c = a
        .c
        .unwrap_or_else(|| base.required_c(BoundVariant::FrobeniusHighProbability, a.eps).min(a.n));
    let config = RsvdConfig { c, ..base };
    config.validate(a.n).map_err(|e| usage(e.to_string()))?;
    let matrix = gaussian_matrix(&mut seeded(a.common.seed), a.m, a.n, 1.0);
    let report = verify_bounds(&matrix, &config, a.eps, a.trials).map_err(|e| usage(e.to_string()))?;

    let mut bounds = Table::new(&[
        "variant",
        "required_c",
        "c",
        "c_sufficient",
        "opt_err_sq",
        "bound_rhs",
        "pass_rate",
        "mean_err_sq",
        "std_error",
        "holds",
    ]);
    println!("c: {c} (eta {:.4})", report.eta);
    println!("{:<28} {:>10} {:>6} {:>10} {:>6}", "variant", "required_c", "pass", "mean/rhs", "holds");
    for check in &report.checks {
        bounds.row(&[
            &check.variant.name(),
            &check.required_c,
            &c,
            &check.c_sufficient,
            &check.opt_err_sq,
            &check.bound_rhs,
            &check.pass_rate,
            &check.mean_err_sq,
            &check.std_error,
            &check.holds,
        ]);
        println!(
            "{:<28} {:>10} {:>6.2} {:>10.4} {:>6}",
            check.variant.name(),
            check.required_c,
            check.pass_rate,
            check.mean_err_sq / check.bound_rhs,
            check.holds
        );
    }
    let mut trials = Table::new(&["trial", "seed", "fro_err_sq", "spectral_err_sq"]);
    for t in &report.trials {
        trials.row(&[&t.trial, &t.seed, &t.fro_err_sq, &t.spectral_err_sq]);
    }
    let bounds_path = out.write("rsvd_bounds.csv", &bounds.into_string())?;
    let trials_path = out.write("rsvd_trials.csv", &trials.into_string())?;
    println!("bounds: {}", bounds_path.display());
    println!("trials: {}", trials_path.display());
    Ok(0)
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct PcaArgs {
    /// Numeric CSV, one sample per row.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub input: Option<String>,
    /// Planted-correlation data, e.g. `rank=3,spike=25,dim=50,n=500`.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// The input's first row is a header.
    #[arg(long)]
    pub header: bool,
    /// Zero-based column holding regression targets.
    #[arg(long)]
    pub target_column: Option<usize>,
    /// Also train an MLP with these layer widths and count Hessian outliers.
    #[arg(long, value_parser = parse_usize_list)]
    pub mlp_widths: Option<Counts>,
    #[command(flatten)]
    pub common: Common,
}

struct SyntheticParams {
    rank: usize,
    spike: f64,
    dim: usize,
    n: usize,
}

fn parse_synthetic(s: &str) -> Result<SyntheticParams, CliError> {
    let mut params = SyntheticParams {
        rank: 3,
        spike: 25.0,
        dim: 50,
        n: 500,
    };
    for part in s.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("--synthetic: expected key=value, got {part:?}")))?;
        let bad = |e: &dyn std::fmt::Display| usage(format!("--synthetic {key}: {e}"));
        match key.trim() {
            "rank" => params.rank = value.parse().map_err(|e| bad(&e))?,
            "spike" => params.spike = value.parse().map_err(|e| bad(&e))?,
            "dim" => params.dim = value.parse().map_err(|e| bad(&e))?,
            "n" => params.n = value.parse().map_err(|e| bad(&e))?,
            other => return Err(usage(format!("--synthetic: unknown key {other:?}"))),
        }
    }
    if params.dim == 0 || params.n < 2 || params.rank > params.dim {
        return Err(usage("--synthetic needs dim >= 1, n >= 2 and rank <= dim"));
    }
    Ok(params)
}

pub fn pca(a: &PcaArgs, out: &Output) -> Result<u8, CliError> {
    let ds: Dataset = match (&a.input, &a.synthetic) {
        (Some(path), _) => dataio::load_csv(
            path,
            CsvOptions {
                has_header: a.header,
                target_column: a.target_column,
                ..CsvOptions::default()
            },
        )
        .map_err(failed)?,
        (None, Some(text)) => {
            let s = parse_synthetic(text)?;
            synthetic_correlated_data(s.n, s.dim, s.rank, s.spike, a.common.seed)
        }
        (None, None) => return Err(usage("one of --input or --synthetic is required")),
    };
    let pca = dataio::variance_explained(&ds).map_err(failed)?;
    let mut table = Table::new(&["component", "eigenvalue", "cumulative"]);
    for (i, (l, c)) in pca.eigenvalues.iter().zip(&pca.cumulative).enumerate() {
        table.row(&[&(i + 1), l, c]);
    }
    let path = out.write("pca.csv", &table.into_string())?;
    println!("samples: {}", ds.n_samples());
    println!("dim: {}", ds.dim());
    println!("n90: {}", pca.n90);

    if let Some(widths) = &a.mlp_widths {
        let report = dataio::outlier_vs_pca_report(&ds, widths, a.common.seed, TrainingPlan::default())
            .map_err(|e| usage(e.to_string()))?;
        let mut spectrum = Table::new(&["eigenvalue", "class"]);
        for l in &report.partition.outliers {
            spectrum.row(&[l, &"outlier"]);
        }
        for l in &report.partition.bulk {
            spectrum.row(&[l, &"bulk"]);
        }
        for l in &report.partition.below_bulk {
            spectrum.row(&[l, &"below_bulk"]);
        }
        let spectrum_path = out.write("hessian_spectrum.csv", &spectrum.into_string())?;
        println!("n_outliers: {}", report.n_outliers);
        println!("zero_modes: {}", report.partition.zeros);
        println!("bulk_edge: {:.6}", report.bulk_model.c_plus);
        println!("final_loss: {:.6e}", report.final_loss);
        println!("hessian_spectrum: {}", spectrum_path.display());
    }
    println!("report: {}", path.display());
    Ok(0)
}
