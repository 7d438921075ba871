//! Acceptance: determinism of every subcommand — identical configuration and
//! seed produce byte-identical artifacts, regardless of worker count.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str], dir: &Path) {
    let out = Command::new(env!("CARGO_BIN_EXE_shadowsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("SHADOWSIM_OUT_DIR")
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn file_bytes(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn criterion_8_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |path: &std::path::PathBuf| path.to_str().unwrap().to_string();

    // Monte Carlo event logs: repeat run and different worker counts.
    let mc = |out: &str, workers: &str| {
        run(
            &[
                "mc", "--alpha", "0.9", "--beta", "0.2", "--shots", "20000", "--seed", "42",
                "--workers", workers, "--out", out,
            ],
            dir.path(),
        )
    };
    mc(&s(&p("mc1.csv")), "1");
    mc(&s(&p("mc2.csv")), "1");
    mc(&s(&p("mc4.csv")), "4");
    assert_eq!(file_bytes(&p("mc1.csv")), file_bytes(&p("mc2.csv")), "repeat run differs");
    assert_eq!(
        file_bytes(&p("mc1.csv")),
        file_bytes(&p("mc4.csv")),
        "worker count changed the artifact"
    );

    // JSONL flavor too.
    let mcj = |out: &str, workers: &str| {
        run(
            &[
                "mc", "--alpha", "0.9", "--beta", "0.2", "--shots", "5000", "--seed", "7",
                "--workers", workers, "--format", "jsonl", "--out", out,
            ],
            dir.path(),
        )
    };
    mcj(&s(&p("mc1.jsonl")), "2");
    mcj(&s(&p("mc2.jsonl")), "3");
    assert_eq!(file_bytes(&p("mc1.jsonl")), file_bytes(&p("mc2.jsonl")));

    // Scan tables.
    let scan = |out: &str| {
        run(
            &[
                "scan", "--alpha-grid", "0:3.14159:16", "--beta-grid", "0:6.2831853:16",
                "--out", out,
            ],
            dir.path(),
        )
    };
    scan(&s(&p("scan1.csv")));
    scan(&s(&p("scan2.csv")));
    assert_eq!(file_bytes(&p("scan1.csv")), file_bytes(&p("scan2.csv")));

    // CHSH estimate with Monte Carlo batches.
    let chsh = |out: &str, workers: &str| {
        run(
            &[
                "chsh", "--angles",
                "0,1.5707963267948966,0.7853981633974483,2.356194490192345",
                "--shots", "20000", "--seed", "11", "--workers", workers, "--out", out,
            ],
            dir.path(),
        )
    };
    chsh(&s(&p("chsh1.csv")), "1");
    chsh(&s(&p("chsh2.csv")), "4");
    assert_eq!(file_bytes(&p("chsh1.csv")), file_bytes(&p("chsh2.csv")));

    // Propagator trace.
    let pathint = |out: &str| {
        run(
            &[
                "pathint", "--mode", "evolve", "--grid", "-25.6:25.6:1024", "--packet",
                "0.0:2.0:0.3", "--epsilon", "0.0625", "--slices", "25", "--out", out,
            ],
            dir.path(),
        )
    };
    pathint(&s(&p("tr1.csv")));
    pathint(&s(&p("tr2.csv")));
    assert_eq!(file_bytes(&p("tr1.csv")), file_bytes(&p("tr2.csv")));

    // Assignment traces.
    let trace = |out: &str, trace: &str, workers: &str| {
        run(
            &[
                "mc", "--alpha", "0.1", "--beta", "1.3", "--shots", "10000", "--seed", "3",
                "--workers", workers, "--out", out, "--trace", trace,
            ],
            dir.path(),
        )
    };
    trace(&s(&p("e1.csv")), &s(&p("t1.csv")), "1");
    trace(&s(&p("e2.csv")), &s(&p("t2.csv")), "8");
    assert_eq!(file_bytes(&p("t1.csv")), file_bytes(&p("t2.csv")));

    println!(
        "[acceptance 8] determinism: PASS (mc/scan/chsh/pathint artifacts byte-identical \
         across repeats and worker counts)"
    );
}
