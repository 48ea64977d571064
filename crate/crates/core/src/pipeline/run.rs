use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{report_render, ExperimentConfig, PipelineError};
use crate::forge::{assemble_slab, class_bounds, BuildOptions, WeightedSlab};
use crate::harness::{
    hooley_progression_bias, moment_scan, remainder_scan, MomentReport, RemainderReport,
    SlabContext,
};
use crate::partition::{identity_report, IdentityReport};
use crate::quadrature::{moments, MomentSet, TestFunction};

/// Environment variable naming the stage cache directory.
pub const CACHE_DIR_ENV: &str = "PARITY_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub kind: String,
    #[serde(default)]
    pub x: Option<u64>,
    /// File name inside the output directory.
    pub file: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub artifacts: Vec<ArtifactEntry>,
}

impl Manifest {
    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a ArtifactEntry> + 'a {
        self.artifacts.iter().filter(move |a| a.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStatus {
    pub stage: String,
    pub cached: bool,
    #[serde(skip)]
    pub millis: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    pub stages: Vec<StageStatus>,
}

/// Per-window verification results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyArtifact {
    pub x: u64,
    pub y: u64,
    pub config_hash: String,
    pub r_1: f64,
    /// `max d·|r_d|/y` over primes `d ∈ P_1` with `d ≤ d_max`.
    pub max_normalized_class_one: Option<f64>,
    pub remainder: RemainderReport,
    pub moments: MomentReport,
    pub hooley: Option<f64>,
}

struct Runner {
    hash: String,
    out: PathBuf,
    cache: Option<PathBuf>,
    manifest: Manifest,
    stages: Vec<StageStatus>,
}

impl Runner {
    /// Returns the artifact at `file`, from the cache when present and
    /// valid, computing and storing it otherwise.
    fn stage<T, C, V>(&mut self, name: &str, file: &str, compute: C, decode: V) -> Result<T, PipelineError>
    where
        C: FnOnce() -> Result<(T, Vec<u8>), PipelineError>,
        V: Fn(&Path) -> Option<T>,
    {
        let t0 = Instant::now();
        let target = self.out.join(file);
        let cached = self.cache.as_ref().map(|c| c.join(&self.hash).join(file));
        if let Some(c) = &cached {
            if let Some(v) = decode(c) {
                fs::copy(c, &target)?;
                self.stages.push(StageStatus {
                    stage: name.to_string(),
                    cached: true,
                    millis: t0.elapsed().as_millis(),
                });
                return Ok(v);
            }
        }
        let (value, bytes) = compute().map_err(|e| PipelineError::Stage {
            stage: name.to_string(),
            message: e.to_string(),
        })?;
        fs::write(&target, &bytes)?;
        if let Some(c) = &cached {
            fs::create_dir_all(c.parent().expect("cache path has a parent"))?;
            fs::write(c, &bytes)?;
        }
        self.stages.push(StageStatus {
            stage: name.to_string(),
            cached: false,
            millis: t0.elapsed().as_millis(),
        });
        Ok(value)
    }

    fn record(&mut self, kind: &str, x: Option<u64>, file: &str) {
        self.manifest.artifacts.push(ArtifactEntry {
            kind: kind.to_string(),
            x,
            file: file.to_string(),
        });
    }

    fn write_side(&mut self, kind: &str, x: Option<u64>, file: &str, text: &str) -> Result<(), PipelineError> {
        fs::write(self.out.join(file), text)?;
        self.record(kind, x, file);
        Ok(())
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, PipelineError> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn decode_json<T: for<'de> Deserialize<'de>>(p: &Path) -> Option<T> {
    serde_json::from_slice(&fs::read(p).ok()?).ok()
}

/// Runs the selected stages in order: identities, moments, build, verify,
/// report. On failure an `error.json` is left in the output directory.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutcome, PipelineError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let started = SystemTime::now();
    let result = pool.install(|| run_stages(cfg));
    let finished = SystemTime::now();
    match result {
        Ok(outcome) => {
            write_metadata(cfg, &outcome.stages, started, finished, None)?;
            Ok(outcome)
        }
        Err(e) => {
            let (stage, message) = match &e {
                PipelineError::Stage { stage, message } => (stage.clone(), message.clone()),
                other => ("pipeline".to_string(), other.to_string()),
            };
            let report = serde_json::json!({ "stage": stage, "message": message });
            fs::write(cfg.output_dir.join("error.json"), json_bytes(&report)?)?;
            write_metadata(cfg, &[], started, finished, Some(&message))?;
            Err(e)
        }
    }
}

fn unix(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn write_metadata(
    cfg: &ExperimentConfig,
    stages: &[StageStatus],
    started: SystemTime,
    finished: SystemTime,
    error: Option<&str>,
) -> Result<(), PipelineError> {
    let meta = serde_json::json!({
        "config_hash": cfg.config_hash(),
        "started_unix": unix(started),
        "finished_unix": unix(finished),
        "threads": rayon::current_num_threads(),
        "configured_threads": cfg.threads,
        "host": std::env::var("HOSTNAME").unwrap_or_default(),
        "stages": stages.iter().map(|s| serde_json::json!({
            "stage": s.stage, "cached": s.cached, "millis": s.millis as u64,
        })).collect::<Vec<_>>(),
        "error": error,
    });
    fs::write(cfg.output_dir.join("metadata.json"), json_bytes(&meta)?)?;
    Ok(())
}

fn run_stages(cfg: &ExperimentConfig) -> Result<PipelineOutcome, PipelineError> {
    let hash = cfg.config_hash();
    let mut r = Runner {
        hash: hash.clone(),
        out: cfg.output_dir.clone(),
        cache: std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from),
        manifest: Manifest {
            config_hash: hash.clone(),
            artifacts: Vec::new(),
        },
        stages: Vec::new(),
    };
    let _ = fs::remove_file(cfg.output_dir.join("error.json"));
    let st = &cfg.stages;

    if st.identities {
        let max_m = st.identities_max_m;
        let rep: IdentityReport = r.stage(
            "identities",
            "identities.json",
            || {
                let rep = identity_report(max_m)?;
                let bytes = json_bytes(&rep)?;
                Ok((rep, bytes))
            },
            decode_json,
        )?;
        r.record("identities", None, "identities.json");
        r.write_side("identities_csv", None, "identities.csv", &rep.to_csv())?;
        if !rep.all_pass() {
            return Err(PipelineError::Stage {
                stage: "identities".into(),
                message: "an exact identity has a nonzero residual".into(),
            });
        }
    }

    let tf = TestFunction::new(cfg.test_function.clone())?;
    let quad = cfg.quadrature.clone();
    let k_max = st.k_max;
    let moment_set: Option<MomentSet> = if st.moments {
        let ms = r.stage(
            "moments",
            "moments.json",
            || {
                let ms = moments(&tf, &quad, k_max as usize)?;
                let bytes = json_bytes(&ms)?;
                Ok((ms, bytes))
            },
            decode_json,
        )?;
        r.record("moments", None, "moments.json");
        Some(ms)
    } else {
        None
    };

    for w in cfg.windows() {
        let x = w.x;
        let slab_file = format!("slab_x{x}.bin");
        let slab = if st.build {
            let opts = BuildOptions { exact: st.exact };
            let slab = r.stage(
                "build",
                &slab_file,
                || {
                    let slab = assemble_slab(&w, &tf, &quad, &opts)?;
                    let tmp = tempfile_path(&cfg.output_dir, &slab_file);
                    slab.write(&tmp)?;
                    let bytes = fs::read(&tmp)?;
                    fs::remove_file(&tmp)?;
                    Ok((slab, bytes))
                },
                |p| WeightedSlab::read(p).ok(),
            )?;
            r.record("slab", Some(x), &slab_file);
            Some(slab)
        } else if st.verify {
            let path = cfg.output_dir.join(&slab_file);
            Some(WeightedSlab::read(&path).map_err(|_| PipelineError::MissingArtifact(slab_file.clone()))?)
        } else {
            None
        };

        if st.verify {
            let slab = slab.expect("slab present when verifying");
            let file = format!("verify_x{x}.json");
            let d_max = st.d_max;
            let hooley_alpha = st.hooley_alpha;
            let ms = moment_set.as_ref();
            let hash = hash.clone();
            let v: VerifyArtifact = r.stage(
                "verify",
                &file,
                || {
                    let ctx = SlabContext::new(&slab)?;
                    let rem = remainder_scan(&ctx, d_max)?;
                    let mom = moment_scan(&ctx, k_max, ms)?;
                    let hooley = hooley_alpha
                        .map(|a| hooley_progression_bias(&ctx, a))
                        .transpose()?;
                    let cw = w.validate()?;
                    let (p_lo, p_hi) = class_bounds(&cw)[0];
                    let class_one = crate::arith::sieve_primes(p_lo.max(2), p_hi.min(d_max).max(p_lo.max(2)))?
                        .primes
                        .iter()
                        .filter(|&&p| p <= d_max)
                        .filter_map(|&p| rem.normalized(p))
                        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
                    let v = VerifyArtifact {
                        x,
                        y: w.y,
                        config_hash: hash,
                        r_1: rem.rows[0].r_d,
                        max_normalized_class_one: class_one,
                        remainder: rem,
                        moments: mom,
                        hooley,
                    };
                    let bytes = json_bytes(&v)?;
                    Ok((v, bytes))
                },
                decode_json,
            )?;
            r.record("verify", Some(x), &file);
            r.write_side("remainders_csv", Some(x), &format!("remainders_x{x}.csv"), &v.remainder.to_csv())?;
            if !v.remainder.two_way_agree {
                return Err(PipelineError::Stage {
                    stage: "verify".into(),
                    message: format!("divisor sums disagree at x = {x}"),
                });
            }
        }
    }

    fs::write(cfg.output_dir.join("manifest.json"), json_bytes(&r.manifest)?)?;
    if st.report {
        let t0 = Instant::now();
        report_render(&cfg.output_dir)?;
        r.stages.push(StageStatus {
            stage: "report".into(),
            cached: false,
            millis: t0.elapsed().as_millis(),
        });
    }
    Ok(PipelineOutcome {
        output_dir: cfg.output_dir.clone(),
        manifest: r.manifest,
        stages: r.stages,
    })
}

fn tempfile_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!(".{name}.tmp"))
}
