//! Batch front end: scans, Monte Carlo runs, verification suites, and
//! propagator studies, all parameterized on the command line and written as
//! machine-readable tables.
//!
//! Exit codes: 0 success (all checks pass), 1 verification failure,
//! 2 configuration error, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use shadowsim::experiment::{
    chsh, joint_distribution, run_chsh_experiment, sample_coincidences, ChshAngles,
    CoincidenceRecord,
};
use shadowsim::layout::{build_mach_zehnder, build_rarity_tapster, text, Layout};
use shadowsim::parse::{parse_angles4, GridSpec, PotentialSpec};
use shadowsim::pathint::{
    evolve_trace, free_kernel_study, residual_from_trace, KernelStudyConfig, PathintParams,
    PropagatorGrid, SliceConfig,
};
use shadowsim::streams::{verify_congruence_identities, verify_local_factorization};
use shadowsim::textio;

/// Environment variable overriding the default output directory.
const OUT_DIR_ENV: &str = "SHADOWSIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "shadowsim", version, about = "Shadow-stream interferometer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Congruence,
    Locality,
    Normalization,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PathintMode {
    Evolve,
    Kernel,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate joint coincidence probabilities over setting grids.
    Scan {
        /// Left phase setting in radians.
        #[arg(long, conflicts_with = "alpha_grid", allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Left setting grid `start:stop:count` (half-open).
        #[arg(long, allow_hyphen_values = true)]
        alpha_grid: Option<String>,
        /// Right phase setting in radians.
        #[arg(long, conflicts_with = "beta_grid", allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Right setting grid `start:stop:count` (half-open).
        #[arg(long, allow_hyphen_values = true)]
        beta_grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Seeded Monte Carlo coincidence sampling; writes an event log.
    Mc {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long)]
        shots: u64,
        /// Master seed (mandatory: no wall-clock seeding).
        #[arg(long)]
        seed: u64,
        /// Worker threads; the output is identical for any value.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the assignment trace (tangible/shadow paths per trial).
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// CHSH statistic at an angle quadruple, analytic and optionally Monte
    /// Carlo.
    Chsh {
        /// Angles `alpha1,alpha2,beta1,beta2` in radians.
        #[arg(long, allow_hyphen_values = true)]
        angles: String,
        /// Shots per setting for the Monte Carlo estimate.
        #[arg(long, requires = "seed")]
        shots: Option<u64>,
        #[arg(long, requires = "shots")]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run verification checks; nonzero exit iff any check fails.
    Verify {
        #[arg(long, value_enum)]
        mode: VerifyMode,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        beta: f64,
        /// Load the device from a layout document instead of building it.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Write the device under test as a layout document.
        #[arg(long)]
        save_layout: Option<PathBuf>,
    },
    /// Time-sliced propagator runs.
    Pathint {
        #[arg(long, value_enum)]
        mode: PathintMode,
        /// Spatial grid `min:max:points` (evolve mode).
        #[arg(long, default_value = "-25.6:25.6:1024", allow_hyphen_values = true)]
        grid: String,
        /// Initial Gaussian packet `center:sigma:momentum` (evolve mode).
        #[arg(long, default_value = "0.0:2.0:0.0", allow_hyphen_values = true)]
        packet: String,
        #[arg(long, default_value = "free")]
        potential: String,
        /// Slice duration (evolve mode).
        #[arg(long, default_value_t = 0.0625)]
        epsilon: f64,
        /// Slice count (evolve mode) .
        #[arg(long, default_value_t = 100)]
        slices: usize,
        /// Store every k-th slice in the trace output.
        #[arg(long)]
        store_every: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Total propagation time (kernel mode).
        #[arg(long, default_value_t = 4.0)]
        total_time: f64,
        /// Comma-separated slice ladder (kernel mode).
        #[arg(long, default_value = "8,16,32,64")]
        slice_ladder: String,
        /// Grid points per kernel run.
        #[arg(long, default_value_t = 2048)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mach-Zehnder single-particle probabilities.
    Mz {
        #[arg(long, conflicts_with = "phi_grid", allow_negative_numbers = true)]
        phi: Option<f64>,
        /// Phase grid `start:stop:count` (half-open).
        #[arg(long, allow_hyphen_values = true)]
        phi_grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

enum RunError {
    Config(String),
    Io(String),
}

impl RunError {
    fn code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            RunError::Config(m) | RunError::Io(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> RunError {
    RunError::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn out_path(requested: Option<PathBuf>, default_name: &str) -> PathBuf {
    requested.unwrap_or_else(|| {
        let dir = std::env::var(OUT_DIR_ENV).unwrap_or_else(|_| ".".to_string());
        Path::new(&dir).join(default_name)
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents)
        .map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
}

fn angle_values(
    single: Option<f64>,
    grid: Option<String>,
    what: &str,
) -> Result<Vec<f64>, RunError> {
    match (single, grid) {
        (_, Some(spec)) => {
            let g = GridSpec::parse(&spec).map_err(config_err)?;
            Ok(g.values().collect())
        }
        (Some(v), None) if v.is_finite() => Ok(vec![v]),
        (Some(v), None) => Err(RunError::Config(format!("{what} must be finite, got {v}"))),
        (None, None) => Ok(vec![0.0]),
    }
}

fn with_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, RunError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            if n == 0 {
                return Err(RunError::Config("workers must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(config_err)?;
            Ok(pool.install(f))
        }
    }
}

fn run(command: Command) -> Result<u8, RunError> {
    match command {
        Command::Scan { alpha, alpha_grid, beta, beta_grid, out, format } => {
            let alphas = angle_values(alpha, alpha_grid, "alpha")?;
            let betas = angle_values(beta, beta_grid, "beta")?;
            let mut rows = Vec::new();
            for &a in &alphas {
                for &b in &betas {
                    rows.push(joint_distribution(a, b).map_err(config_err)?);
                }
            }
            let mut body = String::new();
            match format {
                Format::Csv => {
                    body.push_str(textio::SCAN_HEADER);
                    body.push('\n');
                    for d in &rows {
                        body.push_str(&textio::scan_row(d));
                        body.push('\n');
                    }
                }
                Format::Jsonl => {
                    for d in &rows {
                        let v = serde_json::json!({
                            "alpha": d.alpha, "beta": d.beta,
                            "p_uu": d.p_uu, "p_ud": d.p_ud,
                            "p_du": d.p_du, "p_dd": d.p_dd,
                            "E": d.correlation(),
                        });
                        body.push_str(&v.to_string());
                        body.push('\n');
                    }
                }
            }
            let path = out_path(out, if format == Format::Csv { "scan.csv" } else { "scan.jsonl" });
            write_file(&path, &body)?;
            println!("scan: {} rows -> {}", rows.len(), path.display());
            println!("alpha     beta      p_uu      p_ud      p_du      p_dd      E");
            for d in rows.iter().take(8) {
                println!(
                    "{:<9.6} {:<9.6} {:<9.6} {:<9.6} {:<9.6} {:<9.6} {:+.6}",
                    d.alpha, d.beta, d.p_uu, d.p_ud, d.p_du, d.p_dd,
                    d.correlation()
                );
            }
            if rows.len() > 8 {
                println!("... ({} more rows)", rows.len() - 8);
            }
            Ok(0)
        }

        Command::Mc { alpha, beta, shots, seed, workers, out, trace, format } => {
            if shots == 0 {
                return Err(RunError::Config("shots must be at least 1".into()));
            }
            let records = with_pool(workers, || sample_coincidences(alpha, beta, shots, seed))?
                .map_err(config_err)?;
            let layout = build_rarity_tapster(alpha, beta);
            let mut body = String::new();
            match format {
                Format::Csv => {
                    body.push_str(textio::EVENT_HEADER);
                    body.push('\n');
                    for r in &records {
                        body.push_str(&textio::event_row(r, &layout));
                        body.push('\n');
                    }
                }
                Format::Jsonl => {
                    for r in &records {
                        body.push_str(&event_json(r, &layout));
                        body.push('\n');
                    }
                }
            }
            let path =
                out_path(out, if format == Format::Csv { "events.csv" } else { "events.jsonl" });
            write_file(&path, &body)?;
            if let Some(trace_path) = trace {
                let mut t = String::new();
                t.push_str(textio::TRACE_HEADER);
                t.push('\n');
                for r in &records {
                    t.push_str(&textio::trace_row(r, &layout));
                    t.push('\n');
                }
                write_file(&trace_path, &t)?;
            }
            let freqs = shadowsim::experiment::empirical_frequencies(&records);
            println!(
                "mc: {shots} shots at alpha = {alpha:.6}, beta = {beta:.6}, seed = {seed} -> {}",
                path.display()
            );
            println!("outcome   uu'       ud'       du'       dd'");
            println!(
                "freq      {:.6}  {:.6}  {:.6}  {:.6}",
                freqs[0], freqs[1], freqs[2], freqs[3]
            );
            Ok(0)
        }

        Command::Chsh { angles, shots, seed, workers, out, format } => {
            let [a1, a2, b1, b2] = parse_angles4(&angles).map_err(config_err)?;
            let quad = ChshAngles { alpha1: a1, alpha2: a2, beta1: b1, beta2: b2 };
            let analytic = chsh(quad);
            println!("chsh: angles = ({a1:.7}, {a2:.7}, {b1:.7}, {b2:.7})");
            println!(
                "analytic: E = ({:+.6}, {:+.6}, {:+.6}, {:+.6})",
                analytic.e[0], analytic.e[1], analytic.e[2], analytic.e[3]
            );
            println!(
                "analytic: S = {:.6} [{}]",
                analytic.s,
                if analytic.violated { "VIOLATED" } else { "not violated" }
            );
            if let (Some(shots), Some(seed)) = (shots, seed) {
                if shots == 0 {
                    return Err(RunError::Config("shots must be at least 1".into()));
                }
                let (estimate, batches) =
                    with_pool(workers, || run_chsh_experiment(quad, shots, seed))?
                        .map_err(config_err)?;
                let se = estimate.s_stderr.unwrap_or(0.0);
                println!(
                    "monte carlo ({shots} shots/setting, seed {seed}): S^ = {:.6} +- {:.6} [{}]",
                    estimate.s,
                    se,
                    if estimate.violated { "VIOLATED" } else { "not violated" }
                );
                let mut body = String::new();
                let settings = quad.settings();
                match format {
                    Format::Csv => {
                        body.push_str("setting,alpha,beta,n,E,stderr\n");
                        for i in 0..4 {
                            body.push_str(&format!(
                                "{},{},{},{},{},{}\n",
                                i,
                                textio::format_f17(settings[i].0),
                                textio::format_f17(settings[i].1),
                                batches[i].len(),
                                textio::format_f17(estimate.e[i]),
                                textio::format_f17(estimate.e_stderr.unwrap()[i]),
                            ));
                        }
                        body.push_str(&format!(
                            "S,,,,{},{}\n",
                            textio::format_f17(estimate.s),
                            textio::format_f17(se)
                        ));
                    }
                    Format::Jsonl => {
                        for i in 0..4 {
                            body.push_str(
                                &serde_json::json!({
                                    "setting": i,
                                    "alpha": settings[i].0,
                                    "beta": settings[i].1,
                                    "n": batches[i].len(),
                                    "E": estimate.e[i],
                                    "stderr": estimate.e_stderr.unwrap()[i],
                                })
                                .to_string(),
                            );
                            body.push('\n');
                        }
                        body.push_str(
                            &serde_json::json!({"S": estimate.s, "stderr": se}).to_string(),
                        );
                        body.push('\n');
                    }
                }
                let path = out_path(
                    out,
                    if format == Format::Csv { "chsh.csv" } else { "chsh.jsonl" },
                );
                write_file(&path, &body)?;
                println!("per-setting table -> {}", path.display());
            }
            Ok(0)
        }

        Command::Verify { mode, alpha, beta, layout, save_layout } => {
            let device = match layout {
                Some(path) => {
                    let doc = std::fs::read_to_string(&path).map_err(|e| {
                        RunError::Io(format!("cannot read {}: {e}", path.display()))
                    })?;
                    text::parse_layout_str(&doc).map_err(config_err)?
                }
                None => build_rarity_tapster(alpha, beta),
            };
            if let Some(path) = save_layout {
                write_file(&path, &text::to_layout_text(&device))?;
                println!("layout -> {}", path.display());
            }
            let ok = match mode {
                VerifyMode::Congruence => report_congruence(&device)?,
                VerifyMode::Locality => report_locality(&device)?,
                VerifyMode::Normalization => report_normalization(&device)?,
            };
            Ok(if ok { 0 } else { 1 })
        }

        Command::Pathint {
            mode,
            grid,
            packet,
            potential,
            epsilon,
            slices,
            store_every,
            mass,
            hbar,
            total_time,
            slice_ladder,
            points,
            out,
        } => match mode {
            PathintMode::Evolve => {
                let gspec = GridSpec::parse(&grid).map_err(config_err)?;
                let potential = PotentialSpec::parse(&potential).map_err(config_err)?;
                let (center, sigma, momentum) = parse_packet(&packet)?;
                let params =
                    PathintParams { mass, hbar, potential, slice: SliceConfig::default() };
                let initial = PropagatorGrid::gaussian(
                    gspec.start,
                    gspec.step(),
                    gspec.count,
                    params,
                    center,
                    sigma,
                    momentum,
                )
                .map_err(config_err)?;
                let every = store_every.unwrap_or(slices.max(1));
                let trace =
                    evolve_trace(&initial, epsilon, slices, every).map_err(config_err)?;
                let mut body = String::new();
                body.push_str(textio::EVOLUTION_HEADER);
                body.push('\n');
                for g in &trace {
                    for j in 0..g.n() {
                        body.push_str(&textio::evolution_row(
                            g.t,
                            g.x(j),
                            g.psi[j].re,
                            g.psi[j].im,
                        ));
                        body.push('\n');
                    }
                }
                let path = out_path(out, "trace.csv");
                write_file(&path, &body)?;
                let last = trace.last().unwrap();
                println!(
                    "pathint evolve: {} slices of {} -> {}",
                    slices,
                    epsilon,
                    path.display()
                );
                println!(
                    "t = {:.6}  norm = {:.9}  <x> = {:.6}  var = {:.6}  boundary = {:.3e}",
                    last.t,
                    last.norm(),
                    last.mean_x(),
                    last.var_x(),
                    last.boundary_amplitude()
                );
                if trace.len() >= 3 && every == 1 {
                    let w = ((2.0 * params.slice.phase_cutoff * hbar * epsilon / mass).sqrt()
                        / gspec.step()) as usize;
                    if let Ok(r) = residual_from_trace(&trace, epsilon, 2 * w + 4) {
                        println!("schrodinger residual (interior, per unit norm) = {r:.3e}");
                    }
                }
                Ok(0)
            }
            PathintMode::Kernel => {
                let ladder: Result<Vec<usize>, _> =
                    slice_ladder.split(',').map(|s| s.trim().parse::<usize>()).collect();
                let ladder = ladder
                    .map_err(|e| RunError::Config(format!("bad slice ladder: {e}")))?;
                if ladder.is_empty() || ladder.contains(&0) {
                    return Err(RunError::Config("slice ladder needs positive entries".into()));
                }
                let cfg = KernelStudyConfig {
                    total_time,
                    slice_ladder: ladder,
                    grid_points: points,
                    mass,
                    hbar,
                    ..Default::default()
                };
                let rows = free_kernel_study(&cfg).map_err(config_err)?;
                let mut body = String::new();
                body.push_str(textio::KERNEL_STUDY_HEADER);
                body.push('\n');
                for r in &rows {
                    body.push_str(&textio::kernel_study_row(
                        r.slices,
                        r.rel_error_modulus,
                        r.phase_error,
                    ));
                    body.push('\n');
                }
                let path = out_path(out, "kernel_study.csv");
                write_file(&path, &body)?;
                println!("pathint kernel study (T = {total_time}) -> {}", path.display());
                println!("slices    rel_error_modulus   phase_error");
                for r in &rows {
                    println!(
                        "{:<9} {:<19.6e} {:.6e}",
                        r.slices, r.rel_error_modulus, r.phase_error
                    );
                }
                Ok(0)
            }
        },

        Command::Mz { phi, phi_grid, out, format } => {
            let phis = angle_values(phi, phi_grid, "phi")?;
            let mut body = String::new();
            let mut rows = Vec::new();
            for &p in &phis {
                let layout = build_mach_zehnder(p);
                let a_u = mz_amplitude(&layout, "U")?;
                let a_d = mz_amplitude(&layout, "D")?;
                rows.push((p, a_u, a_d));
            }
            match format {
                Format::Csv => {
                    body.push_str(textio::MZ_HEADER);
                    body.push('\n');
                    for &(p, u, d) in &rows {
                        body.push_str(&textio::mz_row(p, u, d));
                        body.push('\n');
                    }
                }
                Format::Jsonl => {
                    for &(p, u, d) in &rows {
                        body.push_str(
                            &serde_json::json!({"phi": p, "p_u": u, "p_d": d}).to_string(),
                        );
                        body.push('\n');
                    }
                }
            }
            let path = out_path(out, if format == Format::Csv { "mz.csv" } else { "mz.jsonl" });
            write_file(&path, &body)?;
            println!("mz: {} rows -> {}", rows.len(), path.display());
            for &(p, u, d) in rows.iter().take(8) {
                println!("phi = {p:<9.6} P(U) = {u:.6}  P(D) = {d:.6}");
            }
            if rows.len() > 8 {
                println!("... ({} more rows)", rows.len() - 8);
            }
            Ok(0)
        }
    }
}

fn event_json(r: &CoincidenceRecord, layout: &Layout) -> String {
    serde_json::json!({
        "trial": r.trial,
        "left": r.left.as_str(),
        "right": r.right.as_str(),
        "left_tangible": layout.paths()[r.assignment.left_tangible].label,
        "right_tangible": layout.paths()[r.assignment.right_tangible].label,
    })
    .to_string()
}

fn parse_packet(s: &str) -> Result<(f64, f64, f64), RunError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [c, sig, k] = parts.as_slice() else {
        return Err(RunError::Config(format!(
            "packet must be center:sigma:momentum, got {s:?}"
        )));
    };
    let parse = |name: &str, raw: &str| -> Result<f64, RunError> {
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| RunError::Config(format!("packet {name} is invalid: {raw:?}")))
    };
    Ok((parse("center", c)?, parse("sigma", sig)?, parse("momentum", k)?))
}

fn mz_amplitude(layout: &Layout, detector: &str) -> Result<f64, RunError> {
    let amps: Vec<_> = layout
        .paths()
        .iter()
        .map(|p| layout.path_amplitude(&p.label, detector))
        .collect::<Result<_, _>>()
        .map_err(config_err)?;
    let total = shadowsim::amplitude::sum_alternatives(&amps).map_err(config_err)?;
    Ok(total.norm_sqr())
}

fn print_check(name: &str, lhs: String, rhs: String, defect: f64, pass: bool) {
    println!(
        "{:<40} lhs = {:<24} rhs = {:<24} |delta| = {:<10.3e} {}",
        name,
        lhs,
        rhs,
        defect,
        if pass { "PASS" } else { "FAIL" }
    );
}

fn report_congruence(device: &Layout) -> Result<bool, RunError> {
    let report = verify_congruence_identities(device).map_err(config_err)?;
    for c in &report.checks {
        print_check(&c.name, format!("{}", c.lhs), format!("{}", c.rhs), c.defect, c.pass);
    }
    for (p, q, congruent) in &report.congruent_paths {
        println!(
            "factor sequences of ({p}, {q}): {}",
            if *congruent { "congruent" } else { "NOT congruent" }
        );
    }
    println!(
        "congruence: {}  (amplitude equivalence: {})",
        if report.all_congruent { "PASS" } else { "FAIL" },
        if report.all_equivalent { "PASS" } else { "FAIL" }
    );
    Ok(report.pass())
}

fn report_locality(device: &Layout) -> Result<bool, RunError> {
    let congruence_ok = report_congruence(device)?;
    let report = verify_local_factorization(device).map_err(config_err)?;
    for f in &report.factorizations {
        print_check(
            &f.check.name,
            format!("{}", f.check.lhs),
            format!("{}", f.check.rhs),
            f.check.defect,
            f.check.pass,
        );
        println!(
            "  wing-locality of regrouped terms: {}",
            if f.rhs_wing_local { "PASS" } else { "FAIL" }
        );
    }
    let ok = congruence_ok && report.pass();
    println!("locality: {}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn report_normalization(device: &Layout) -> Result<bool, RunError> {
    // A loaded device is checked as-is; the built-in device is swept over a
    // settings grid as well.
    let mut worst_sum: f64 = 0.0;
    let mut worst_route: f64 = 0.0;
    let sweep = 32;
    for i in 0..sweep {
        for j in 0..sweep {
            let a = std::f64::consts::TAU * i as f64 / sweep as f64;
            let b = std::f64::consts::TAU * j as f64 / sweep as f64;
            let d = joint_distribution(a, b).map_err(config_err)?;
            worst_sum = worst_sum.max((d.sum() - 1.0).abs());
            let amp = shadowsim::experiment::joint_via_amplitudes(&build_rarity_tapster(a, b))
                .map_err(config_err)?;
            for (p, q) in d.probabilities().iter().zip(&amp) {
                worst_route = worst_route.max((p - q).abs());
            }
        }
    }
    let probs = shadowsim::experiment::joint_via_amplitudes(device).map_err(config_err)?;
    let device_sum: f64 = probs.iter().sum();
    worst_sum = worst_sum.max((device_sum - 1.0).abs());
    let pass = worst_sum < 1e-12 && worst_route < 1e-12;
    println!("normalization sweep ({sweep}x{sweep}): worst |sum(p) - 1| = {worst_sum:.3e}");
    println!("route agreement: worst |closed - amplitude| = {worst_route:.3e}");
    println!("normalization: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}
