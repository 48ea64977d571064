//! `parity`: build weighted sequences and measure their sieve statistics.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use parity_core::forge::{assemble_slab, BuildOptions, WeightedSlab, WindowConfig, WindowMode};
use parity_core::harness::{
    hooley_progression_bias, lemma2_check, moment_scan, remainder_scan, SlabContext,
};
use parity_core::partition::identity_report;
use parity_core::pipeline::{report_render, run_pipeline, ExperimentConfig};
use parity_core::quadrature::{
    moments, zk_lower_bound_check, BumpMixture, MomentSet, QuadratureConfig, TestFunction,
    TestFunctionSpec, Variant,
};

#[derive(Parser, Debug)]
#[command(name = "parity", version, about = "Counterexample sequences for the asymptotic sieve")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0, env = "PARITY_THREADS")]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check the exact partition identities in rational arithmetic.
    VerifyIdentities {
        #[arg(long, default_value_t = 10)]
        max_m: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compute the simplex moments Z_k of a test function.
    Moments {
        #[command(flatten)]
        tf: FunctionArgs,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        /// Tolerance for the invariant checks: relative for Z_1 = Z_0/M,
        /// in units of J for Z_0 = 0.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Also tabulate −Z_k against its lower bound (thm2 only).
        #[arg(long)]
        zk_bound: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the weighted sequence on a window and write it as a slab file.
    Build {
        #[arg(long)]
        x: u64,
        /// Window length y; defaults to x/100.
        #[arg(long)]
        window: Option<u64>,
        #[command(flatten)]
        tf: FunctionArgs,
        #[arg(long)]
        varpi: Option<f64>,
        #[arg(long, default_value_t = 0.51)]
        nu: f64,
        /// Evaluate every weight directly, without the interpolation grid.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Divisor-sum remainders r_d of a slab.
    CheckAxioms {
        #[arg(long)]
        slab: PathBuf,
        /// Level of distribution; d runs up to x^nu unless --d-max is given.
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long)]
        d_max: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Weighted Λ_k sums and parity sums of a slab.
    Sums {
        #[arg(long)]
        slab: PathBuf,
        #[arg(long, default_value_t = 3)]
        k_max: u32,
        /// Moment file from `parity moments`, for predictions.
        #[arg(long)]
        moments: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Averaged Möbius bias over progressions d <= x^alpha.
    Hooley {
        #[arg(long)]
        slab: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Prime-tuple sum against its integral prediction.
    Lemma2 {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        window: Option<u64>,
        /// Radius of the symmetric bump at (1/r, …, 1/r).
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render summary tables from a run directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Run a configured pipeline.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct FunctionArgs {
    #[arg(long, default_value = "thm1")]
    variant: String,
    #[arg(long, default_value_t = 3)]
    m: u32,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    sigma: i8,
    /// JSON test function spec; replaces the other function flags.
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl FunctionArgs {
    fn spec(&self) -> Result<TestFunctionSpec> {
        if let Some(p) = &self.spec {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            return Ok(serde_json::from_str(&text)?);
        }
        let variant: Variant = self.variant.parse()?;
        Ok(match variant {
            Variant::Thm1 => TestFunctionSpec::thm1(self.m, self.delta, self.sigma),
            Variant::Thm2 => TestFunctionSpec::thm2(self.m, self.delta),
            Variant::Custom => bail!("custom test functions need --spec"),
        })
    }
}

fn emit<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_slab(p: &Path) -> Result<WeightedSlab> {
    WeightedSlab::read(p).with_context(|| format!("reading slab {}", p.display()))
}

fn run(cli: Cli) -> Result<bool> {
    let quad = QuadratureConfig::default();
    match cli.cmd {
        Cmd::VerifyIdentities { max_m, out, csv } => {
            let rep = identity_report(max_m)?;
            if let Some(p) = csv {
                fs::write(p, rep.to_csv())?;
            }
            let failed = rep.checks.iter().filter(|c| !c.pass).count();
            eprintln!("{} checks, {failed} failed", rep.checks.len());
            emit(&rep, out.as_deref())?;
            Ok(failed == 0)
        }
        Cmd::Moments { tf, k_max, tol, zk_bound, out } => {
            let spec = tf.spec()?;
            if zk_bound {
                let rep = zk_lower_bound_check(spec.m, spec.delta, k_max, &quad)?;
                emit(&rep, out.as_deref())?;
                return Ok(rep.rows.iter().all(|r| r.bound_holds));
            }
            let ms = moments(&TestFunction::new(spec)?, &quad, k_max)?;
            let mut checks = Vec::new();
            for k in 0..=k_max {
                checks.push((format!("order_two_k{k}"), ms.converges_at_order_two(k)));
            }
            match ms.variant {
                Variant::Thm1 if k_max >= 1 => {
                    let rel = ((ms.z[1] - ms.z[0] / ms.m as f64) / ms.z[1]).abs();
                    checks.push(("first_moment".into(), rel <= tol));
                }
                Variant::Thm2 => checks.push(("z0_vanishes".into(), ms.z[0].abs() <= tol * ms.j)),
                _ => {}
            }
            let pass = checks.iter().all(|c| c.1);
            let mut v = serde_json::to_value(&ms)?;
            v["invariants"] = checks
                .into_iter()
                .map(|(name, ok)| serde_json::json!({ "name": name, "pass": ok }))
                .collect();
            emit(&v, out.as_deref())?;
            Ok(pass)
        }
        Cmd::Build { x, window, tf, varpi, nu, exact, out, csv } => {
            let spec = tf.spec()?;
            let (m, delta) = (spec.m as f64, spec.delta);
            let varpi = varpi.unwrap_or((m * delta + 1.0 / m + 1.0 - nu) / 2.0);
            let cfg = WindowConfig {
                x,
                y: window.unwrap_or(x / 100),
                m: spec.m,
                delta,
                varpi,
                nu,
                mode: WindowMode::DeskWindow,
                sigma: spec.sigma,
                schedule: None,
            };
            let slab = assemble_slab(&cfg, &TestFunction::new(spec)?, &quad, &BuildOptions { exact })?;
            slab.write(&out)?;
            if let Some(p) = csv {
                slab.write_csv(&p)?;
            }
            emit(&slab.stats(), None)?;
            Ok(true)
        }
        Cmd::CheckAxioms { slab, nu, d_max, out, csv } => {
            let slab = read_slab(&slab)?;
            let ctx = SlabContext::new(&slab)?;
            let d_max = d_max.unwrap_or_else(|| (ctx.x_ref() as f64).powf(nu).floor() as u64);
            let rep = remainder_scan(&ctx, d_max)?;
            if let Some(p) = csv {
                fs::write(p, rep.to_csv())?;
            }
            let summary = serde_json::json!({
                "lo": rep.lo, "hi": rep.hi, "d_max": rep.d_max,
                "r_1": rep.rows[0].r_d,
                "abs_r_sum": rep.abs_r_sum,
                "max_normalized": rep.max_normalized,
                "argmax_d": rep.argmax_d,
                "two_way_agree": rep.two_way_agree,
            });
            emit(&summary, out.as_deref())?;
            Ok(rep.two_way_agree)
        }
        Cmd::Sums { slab, k_max, moments, out } => {
            let slab = read_slab(&slab)?;
            let ms: Option<MomentSet> = match moments {
                Some(p) => Some(serde_json::from_str(&fs::read_to_string(&p)?)?),
                None => None,
            };
            let ctx = SlabContext::new(&slab)?;
            let rep = moment_scan(&ctx, k_max, ms.as_ref())?;
            emit(&rep, out.as_deref())?;
            Ok(true)
        }
        Cmd::Hooley { slab, alpha } => {
            let slab = read_slab(&slab)?;
            let ctx = SlabContext::new(&slab)?;
            let v = hooley_progression_bias(&ctx, alpha)?;
            emit(&serde_json::json!({ "alpha": alpha, "normalized_bias": v }), None)?;
            Ok(true)
        }
        Cmd::Lemma2 { r, x, window, radius, out } => {
            if r == 0 {
                bail!("r must be positive");
            }
            let f = BumpMixture {
                m: r,
                xi: radius,
                product_prefactor: false,
                centers: vec![vec![1.0 / r as f64; r]],
                weights: vec![1.0],
            };
            let rep = lemma2_check(&f, x, window.unwrap_or(x / 100), &quad)?;
            emit(&rep, out.as_deref())?;
            Ok(true)
        }
        Cmd::Report { dir } => {
            let t = report_render(&dir)?;
            for f in t.files {
                println!("{}", dir.join(f).display());
            }
            Ok(true)
        }
        Cmd::Run { config, out_dir } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_toml(&text)?;
            if let Some(d) = out_dir {
                cfg.output_dir = d;
            }
            if cli.threads != 0 {
                cfg.threads = cli.threads;
            }
            let outcome = run_pipeline(&cfg)?;
            for s in &outcome.stages {
                eprintln!("{:<12} {}", s.stage, if s.cached { "cached" } else { "done" });
            }
            println!("{}", outcome.output_dir.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads != 0 {
        // a second initialization only fails when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
