//! Command line front end: tensor files in, tensor files or reports out.
//!
//! Exit codes: 0 success, 1 usage, 2 parse/shape/io, 3 numerical hypothesis
//! failure (singular input, bound inapplicable, failed core condition),
//! 4 internal inconsistency (a dual-route cross-check disagreed).

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qtlab::io::{
    read_tensor, render_report_json, render_report_text, tensor_digest, write_tensor, ReportFile,
};
use qtlab::perturb::{self, DEFAULT_CORE_TOL, IDENTITY_TOL};
use qtlab::random::{ChaCha8Rng, SeedableRng};
use qtlab::spectral::singular_tube_norms;
use qtlab::{Error, Options, QTensor};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(
    name = "qtlab",
    version,
    about = "Quaternion tensor toolkit: QT-product, QT-SVD, generalized inverses, perturbation reports",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Absolute tolerance for approximate comparisons
    #[arg(long, global = true, default_value_t = 1e-10)]
    atol: f64,
    /// Relative tolerance for approximate comparisons
    #[arg(long, global = true, default_value_t = 1e-8)]
    rtol: f64,
    /// Enable paranoid dual-route cross-checks (slower, catches drift)
    #[arg(long, global = true)]
    paranoid: bool,
    /// Seed for randomized self tests
    #[arg(long, global = true, default_value_t = 271828)]
    seed: u64,
    /// Suppress the timestamp so reports are byte-reproducible
    #[arg(long, global = true)]
    reproducible: bool,
}

impl Global {
    fn options(&self) -> Options {
        Options {
            paranoid: self.paranoid,
            atol: self.atol,
            rtol: self.rtol,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print dimensions, ranks, index, spectral norm, and spectral radius
    Info { file: PathBuf },
    /// QT-product of two tensors
    Product {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Conjugate transpose
    Transpose {
        a: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// k-th QT-power of a square tensor
    Power {
        a: PathBuf,
        k: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Exact inverse; fails on singular input
    Inverse {
        a: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Moore-Penrose inverse
    Pinv {
        a: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// QT-Drazin inverse, optionally with an explicit exponent l >= index
    Drazin {
        a: PathBuf,
        #[arg(long)]
        l: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// QT-SVD; writes PREFIX_U.qt, PREFIX_S.qt, PREFIX_V.qt
    Svd {
        a: PathBuf,
        #[arg(long)]
        prefix: String,
    },
    /// Representing matrix as an (n1 n3) x (n2 n3) x 1 tensor file
    Bcirc {
        a: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check defining equations of a claimed generalized inverse
    Verify {
        a: PathBuf,
        x: PathBuf,
        #[arg(long = "as", value_enum)]
        kind: VerifyKind,
    },
    /// Full perturbation report for a pair (A, E)
    Perturb {
        a: PathBuf,
        e: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Seeded randomized consistency battery
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Pinv,
    Drazin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code: u8 = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> qtlab::Result<()> {
    let opts = cli.global.options();
    match &cli.cmd {
        Cmd::Info { file } => {
            let a = read_tensor(file)?;
            let (n1, n2, n3) = a.dims();
            println!("dims          {n1} x {n2} x {n3}");
            let ranks = a.qt_rank(&opts)?;
            println!("tubal rank    {}", ranks.tubal_rank);
            println!("bcirc rank    {}", ranks.bcirc_rank);
            if n1 == n2 {
                println!("QT-index      {}", a.qt_index(&opts)?);
            } else {
                println!("QT-index      n/a (non-square)");
            }
            println!("norm (s)      {:.6}", a.qt_spectral_norm(&opts)?);
            if n1 == n2 {
                println!("rho_QT        {:.6}", a.qt_spectral_radius(&opts)?);
            } else {
                println!("rho_QT        n/a (non-square)");
            }
            Ok(())
        }
        Cmd::Product { a, b, out } => {
            let t = read_tensor(a)?.qt_product(&read_tensor(b)?)?;
            write_tensor(&t, out)
        }
        Cmd::Transpose { a, out } => write_tensor(&read_tensor(a)?.adjoint(), out),
        Cmd::Power { a, k, out } => write_tensor(&read_tensor(a)?.powi(*k)?, out),
        Cmd::Inverse { a, out } => write_tensor(&read_tensor(a)?.qt_inverse(&opts)?, out),
        Cmd::Pinv { a, out } => write_tensor(&read_tensor(a)?.qt_pinv(&opts)?, out),
        Cmd::Drazin { a, l, out } => write_tensor(&read_tensor(a)?.qt_drazin(*l, &opts)?, out),
        Cmd::Svd { a, prefix } => {
            let (u, s, v) = read_tensor(a)?.qt_svd(&opts)?;
            write_tensor(&u, format!("{prefix}_U.qt"))?;
            write_tensor(&s, format!("{prefix}_S.qt"))?;
            write_tensor(&v, format!("{prefix}_V.qt"))?;
            let tubes = singular_tube_norms(&s);
            let tubes: Vec<String> = tubes.iter().map(|t| format!("{t:.6}")).collect();
            println!("singular tube norms: {}", tubes.join(" "));
            Ok(())
        }
        Cmd::Bcirc { a, out } => {
            let a = read_tensor(a)?;
            let flat = QTensor::new(vec![a.bcirc_z().clone()])?;
            write_tensor(&flat, out)
        }
        Cmd::Verify { a, x, kind } => verify(&read_tensor(a)?, &read_tensor(x)?, *kind, &opts),
        Cmd::Perturb { a, e, format, out } => perturb_cmd(cli, a, e, *format, out.as_ref(), &opts),
        Cmd::Selftest => selftest(cli.global.seed, &opts),
    }
}

fn rel(num: f64, scale: f64) -> f64 {
    num / scale.max(1.0)
}

fn verify(a: &QTensor, x: &QTensor, kind: VerifyKind, opts: &Options) -> qtlab::Result<()> {
    let norm_a = a.qt_spectral_norm(opts)?;
    match kind {
        VerifyKind::Pinv => {
            let ax = a.qt_product(x)?;
            let xa = x.qt_product(a)?;
            let norm_x = x.qt_spectral_norm(opts)?;
            let checks = [
                ("A X A = A", (&ax.qt_product(a)? - a).qt_spectral_norm(opts)?, norm_a),
                ("X A X = X", (&xa.qt_product(x)? - x).qt_spectral_norm(opts)?, norm_x),
                ("(A X)* = A X", (&ax.adjoint() - &ax).qt_spectral_norm(opts)?, norm_a),
                ("(X A)* = X A", (&xa.adjoint() - &xa).qt_spectral_norm(opts)?, norm_a),
            ];
            let mut worst = 0.0f64;
            for (name, num, scale) in checks {
                let r = rel(num, scale);
                worst = worst.max(r);
                println!("{name:14} residual {r:.3e}");
            }
            if worst > 1e-8 {
                return Err(Error::Hypothesis(qtlab::Hypothesis::DefiningEquations {
                    worst,
                    tol: 1e-8,
                }));
            }
            println!("verified as Moore-Penrose inverse (worst {worst:.3e} <= 1e-8)");
            Ok(())
        }
        VerifyKind::Drazin => {
            let k = a.qt_index(opts)?;
            let scale = norm_a.max(1.0).powi(k as i32 + 1);
            let xax = x.qt_product(a)?.qt_product(x)?;
            let comm = (&a.qt_product(x)? - &x.qt_product(a)?).qt_spectral_norm(opts)?;
            let akx = a.powi(k + 1)?.qt_product(x)?;
            let checks = [
                ("X A X = X", rel((&xax - x).qt_spectral_norm(opts)?, x.qt_spectral_norm(opts)?)),
                ("A X = X A", rel(comm, norm_a.max(1.0))),
                ("A^{k+1} X = A^k", rel((&akx - &a.powi(k)?).qt_spectral_norm(opts)?, scale)),
            ];
            let mut worst = 0.0f64;
            for (name, r) in checks {
                worst = worst.max(r);
                println!("{name:14} residual {r:.3e}  (index {k})");
            }
            if worst > 1e-7 {
                return Err(Error::Hypothesis(qtlab::Hypothesis::DefiningEquations {
                    worst,
                    tol: 1e-7,
                }));
            }
            println!("verified as QT-Drazin inverse (worst {worst:.3e} <= 1e-7)");
            Ok(())
        }
    }
}

fn perturb_cmd(
    cli: &Cli,
    a_path: &PathBuf,
    e_path: &PathBuf,
    format: Format,
    out: Option<&PathBuf>,
    opts: &Options,
) -> qtlab::Result<()> {
    let a = read_tensor(a_path)?;
    let e = read_tensor(e_path)?;
    let report = perturb::perturb_report(&a, &e, opts)?;

    let timestamp_unix = if cli.global.reproducible {
        None
    } else {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    };
    let file = ReportFile {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        timestamp_unix,
        digest_a: tensor_digest(&a),
        digest_e: tensor_digest(&e),
        atol: opts.atol,
        rtol: opts.rtol,
        core_tol: DEFAULT_CORE_TOL,
        identity_tol: IDENTITY_TOL,
        report,
    };
    let rendered = match format {
        Format::Json => render_report_json(&file),
        Format::Text => render_report_text(&file),
    };
    match out {
        Some(path) => std::fs::write(path, &rendered).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => print!("{rendered}"),
    }

    // a written report is still a failure exit when the theorem does not
    // apply; a false delta alone is informational, not an error
    let r = &file.report;
    if !r.core_condition_holds {
        return Err(Error::Hypothesis(qtlab::Hypothesis::CoreCondition {
            residual: r.cond_core_residual,
            tol: DEFAULT_CORE_TOL,
        }));
    }
    if r.rho_value >= 1.0 {
        return Err(Error::Hypothesis(qtlab::Hypothesis::SpectralRadius { rho: r.rho_value }));
    }
    if r.norm_value >= 1.0 {
        return Err(Error::BoundInapplicable {
            norm_ade: r.norm_value,
            report: Box::new(file.report),
        });
    }
    Ok(())
}

fn selftest(seed: u64, opts: &Options) -> qtlab::Result<()> {
    use qtlab::random::{core_perturbation_pair, qtensor_with_block_indices, random_qtensor};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // dual-route checks on, regardless of the flag: that is the point
    let strict = Options { paranoid: true, ..*opts };

    for trial in 0..10 {
        let a = random_qtensor(&mut rng, 3, 2, 3);
        let b = random_qtensor(&mut rng, 2, 3, 3);
        let ab = a.qt_product(&b)?;
        let direct = a.bcirc_z().matmul(b.bcirc_z())?;
        let res = (ab.bcirc_z() - &direct).norm_fro()
            / direct.norm_fro().max(1.0);
        if res > 1e-10 {
            return Err(Error::Inconsistency(format!(
                "self test: product transfer residual {res:.3e} in trial {trial}"
            )));
        }
    }
    println!("product transfer      10/10 ok");

    for trial in 0..6 {
        let ks = [trial % 3, (trial + 1) % 3];
        let a = qtensor_with_block_indices(&mut rng, 3, 2, &ks);
        let k = a.qt_index(&strict)?;
        if k != *ks.iter().max().unwrap() {
            return Err(Error::Inconsistency(format!(
                "self test: planted index {ks:?} but computed {k}"
            )));
        }
        a.qt_drazin(None, &strict)?;
    }
    println!("planted index and Drazin  6/6 ok");

    for _ in 0..4 {
        let a = random_qtensor(&mut rng, 2, 3, 2);
        a.qt_pinv(&strict)?;
        let (u, s, v) = a.qt_svd(&strict)?;
        let recon = u.qt_product(&s)?.qt_product(&v.adjoint())?;
        if !recon.approx_eq(&a, 1e-8, 1e-8) {
            return Err(Error::Inconsistency("self test: svd reconstruction".into()));
        }
    }
    println!("pinv and svd          4/4 ok");

    for _ in 0..3 {
        let (a, e) = core_perturbation_pair(&mut rng, 3, 2, &[1, 0], 0.4);
        let report = perturb::compute_bounds(&a, &e, &strict)?;
        if report.identities_verified != Some(true) {
            return Err(Error::Inconsistency("self test: perturbation identities".into()));
        }
    }
    println!("perturbation pipeline 3/3 ok");
    println!("self test passed (seed {seed})");
    Ok(())
}
