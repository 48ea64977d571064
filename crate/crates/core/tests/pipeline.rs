use std::fs;
use std::path::Path;

use parity_core::pipeline::{run_pipeline, ExperimentConfig, CACHE_DIR_ENV};

const CONFIG: &str = r#"
x_levels = [1000000, 2000000]

[window]
x = 1000000
y = 10000
m = 3
delta = 0.037037037037037035
varpi = 0.47
nu = 0.51

[test_function]
variant = "thm1"
m = 3
delta = 0.037037037037037035
sigma = -1

[stages]
identities_max_m = 5
k_max = 2
d_max = 300
hooley_alpha = 0.2
"#;

fn names(files: &[(String, Vec<u8>)]) -> Vec<&str> {
    files.iter().map(|(f, _)| f.as_str()).collect()
}

fn same(a: &[(String, Vec<u8>)], b: &[(String, Vec<u8>)]) {
    assert_eq!(names(a), names(b));
    for ((f, x), (_, y)) in a.iter().zip(b) {
        assert!(x == y, "{f} differs");
    }
}

fn content(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "metadata.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

// one test only: the cache directory is process-wide
#[test]
fn reruns_are_byte_identical_and_cached() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);

    cfg.output_dir = tmp.path().join("a");
    let a = run_pipeline(&cfg).unwrap();
    assert!(a.stages.iter().all(|s| !s.cached));
    cfg.output_dir = tmp.path().join("b");
    run_pipeline(&cfg).unwrap();
    let (ca, cb) = (content(&tmp.path().join("a")), content(&tmp.path().join("b")));
    assert!(ca.len() > 5);
    same(&ca, &cb);
    assert!(ca.iter().any(|(f, _)| f == "series_t_k.csv"));
    for (_, bytes) in ca.iter().filter(|(f, _)| f.ends_with(".json")) {
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(!text.contains("timestamp"));
    }

    let cache = tmp.path().join("cache");
    std::env::set_var(CACHE_DIR_ENV, &cache);
    cfg.output_dir = tmp.path().join("c");
    let first = run_pipeline(&cfg).unwrap();
    assert!(first.stages.iter().all(|s| !s.cached));
    cfg.output_dir = tmp.path().join("d");
    let second = run_pipeline(&cfg).unwrap();
    // tables are always re-rendered from the artifacts
    assert!(
        second.stages.iter().all(|s| s.cached || s.stage == "report"),
        "{:?}",
        second.stages
    );
    same(&content(&tmp.path().join("d")), &ca);

    // a damaged cache entry is recomputed, not trusted
    let hash = cfg.config_hash();
    let slab = cache.join(&hash).join("slab_x1000000.bin");
    assert!(slab.exists());
    fs::write(&slab, b"garbage").unwrap();
    cfg.output_dir = tmp.path().join("e");
    let third = run_pipeline(&cfg).unwrap();
    assert!(third.stages.iter().any(|s| !s.cached));
    same(&content(&tmp.path().join("e")), &ca);

    // a different config misses the cache
    cfg.stages.d_max = 200;
    cfg.output_dir = tmp.path().join("f");
    let other = run_pipeline(&cfg).unwrap();
    assert!(other.stages.iter().any(|s| !s.cached));
    std::env::remove_var(CACHE_DIR_ENV);
}
