//! Reproducible experiment driver for the quantized baker map laboratory.
//!
//! Every run writes artifacts whose JSON reports embed the config echo, the
//! crate version, the wall clock, the seed, and a determinism hash over the
//! payload (timestamps excluded), so reruns with identical flags are
//! byte-identical up to the wall-clock field.
//!
//! Exit codes: 0 success, 2 config error, 3 tolerance failure in --check
//! mode, 4 numerical failure (eigensolve residual or rank mismatch).

use bakerlab::baker::{BakerError, BvOperator};
use bakerlab::exclusion::param_schedule;
use bakerlab::exclusion::EpsRule;
use bakerlab::interval::AngleInterval;
use bakerlab::spectral::{projection_stats, projector, quantum_variance, windowed_weyl_sum};
use bakerlab::torus::Observable;
use bakerlab::walsh::{
    count_nonzero_entries, eigenbasis_statistics, walsh_op, WalshEigen, WalshError, WalshOperator,
    WalshParams,
};
use bakerlab::waves::{
    lp_norms, matrix_element_concentration, sample_wave, sign_change_distribution, sign_changes,
    value_statistics,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "bakerlab",
    version,
    about = "Quantized baker map experiments: spectra, projectors, random waves, Walsh combinatorics",
    long_about = None,
    after_help = "Windows are arcs [start, start+len) in radians on the unit circle.\n\
                  BAKERLAB_THREADS overrides --threads when set."
)]
struct Cli {
    /// Thread budget (0 = library default, 1 = force sequential)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Verify result tolerances and exit 3 on failure
    #[arg(long, global = true, default_value_t = false)]
    check: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dense powers B^k as heatmap CSVs plus on/off classical-set statistics
    Powers(PowersArgs),
    /// Spectral projector heatmap and diagonal/off-diagonal statistics
    Projection(ProjectionArgs),
    /// Eigenvalue counting and the windowed local Weyl average of cos(2 pi q)
    Weyl(WindowArgs),
    /// Windowed quantum variance of cos(2 pi q)
    Variance(WindowArgs),
    /// Random band-limited wave statistics over many seeds
    Randomwave(RandomwaveArgs),
    /// Walsh-baker combinatorics, degeneracies, and random-eigenbasis statistics
    Walsh(WalshArgs),
    /// Exceptional-coordinate sweep: P_00 for N = 2^K over a K range
    Exceptional(ExceptionalArgs),
}

#[derive(Args, Serialize, Clone)]
struct PowersArgs {
    /// Hilbert space dimension (even)
    #[arg(long)]
    n: usize,
    #[arg(long = "k-max")]
    k_max: u32,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct ProjectionArgs {
    #[arg(long)]
    n: usize,
    /// Window start angle in radians
    #[arg(long)]
    start: f64,
    /// Window length in radians
    #[arg(long)]
    len: f64,
    /// Band half-width for the diagonal statistic
    #[arg(long, default_value_t = 0.05)]
    band: f64,
    #[arg(long, value_enum, default_value_t = EpsRuleArg::PowerHalf)]
    eps_rule: EpsRuleArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct WindowArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    start: f64,
    #[arg(long)]
    len: f64,
    /// Output JSON file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct RandomwaveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    start: f64,
    #[arg(long)]
    len: f64,
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    /// Base seed; sample i uses seed base+i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct WalshArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    /// Position/momentum split (defaults to floor(k/2))
    #[arg(long)]
    ell: Option<usize>,
    /// Random eigenbases to draw for QUE/gaussianity statistics (0 = skip)
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct ExceptionalArgs {
    #[arg(long = "k-min", default_value_t = 8)]
    k_min: u32,
    /// Upper end of the sweep; K = 13 costs a dense 8192-dim eigensolve
    #[arg(long = "k-max", default_value_t = 13)]
    k_max: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum EpsRuleArg {
    PowerHalf,
    LogReciprocal,
}

impl From<EpsRuleArg> for EpsRule {
    fn from(v: EpsRuleArg) -> Self {
        match v {
            EpsRuleArg::PowerHalf => EpsRule::PowerHalf,
            EpsRuleArg::LogReciprocal => EpsRule::LogReciprocal,
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<BakerError> for CliError {
    fn from(e: BakerError) -> Self {
        match e {
            BakerError::OddDimension(_) | BakerError::DimensionMismatch { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<WalshError> for CliError {
    fn from(e: WalshError) -> Self {
        match e {
            WalshError::BadBase(_) | WalshError::BadSplit { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("BAKERLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(cli.threads);
    bakerlab::par::configure_threads(threads);
    let started = Instant::now();
    let result = match &cli.cmd {
        Cmd::Powers(a) => cmd_powers(a, started),
        Cmd::Projection(a) => cmd_projection(a, cli.check, started),
        Cmd::Weyl(a) => cmd_weyl(a, cli.check, started),
        Cmd::Variance(a) => cmd_variance(a, started),
        Cmd::Randomwave(a) => cmd_randomwave(a, started),
        Cmd::Walsh(a) => cmd_walsh(a, cli.check, started),
        Cmd::Exceptional(a) => cmd_exceptional(a, cli.check, started),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed");
            ExitCode::from(3)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(4)
        }
    }
}

/// Wrap a payload with the reproducibility metadata block and write it.
fn write_report(
    path: &Path,
    config: Value,
    payload: Value,
    seed: u64,
    started: Instant,
) -> Result<(), CliError> {
    let hashed = json!({ "config": &config, "payload": &payload });
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_string(&hashed).expect("serialize").as_bytes());
    let hash = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in hash {
        let _ = write!(hex, "{b:02x}");
    }
    let doc = json!({
        "meta": {
            "config": config,
            "version": env!("CARGO_PKG_VERSION"),
            "wallclock_ms": started.elapsed().as_millis() as u64,
            "seed": seed,
            "determinism_hash": hex,
        },
        "payload": payload,
    });
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, serde_json::to_string_pretty(&doc).expect("serialize"))?;
    Ok(())
}

fn heatmap_csv(m: &bakerlab::CMat) -> String {
    let mut s = String::from("x,y,abs\n");
    for x in 0..m.rows() {
        for y in 0..m.cols() {
            let _ = writeln!(s, "{x},{y},{}", m[(x, y)].norm());
        }
    }
    s
}

fn window_from(start: f64, len: f64) -> Result<AngleInterval, CliError> {
    if !(len > 0.0 && len <= 2.0 * PI) {
        return Err(CliError::Config(format!("window length must lie in (0, 2 pi], got {len}")));
    }
    Ok(AngleInterval::new(start, len))
}

fn even_dim(n: usize) -> Result<(), CliError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "the Balazs-Voros quantization needs even N >= 2, got {n}"
        )));
    }
    Ok(())
}

fn cmd_powers(a: &PowersArgs, started: Instant) -> Result<bool, CliError> {
    even_dim(a.n)?;
    if a.k_max < 1 {
        return Err(CliError::Config("k-max must be >= 1".into()));
    }
    std::fs::create_dir_all(&a.out)?;
    let op = BvOperator::new(a.n)?;
    let mut per_k = Vec::new();
    for k in 1..=a.k_max {
        let m = op.power_matrix(k as i64);
        std::fs::write(a.out.join(format!("powers_k{k}.csv")), heatmap_csv(&m))?;
        // on/off classical-set max entries with the drawing width W = 2
        let w = 2.0;
        let mut on_max = 0.0f64;
        let mut off_max = 0.0f64;
        for x in 0..a.n {
            for y in 0..a.n {
                let v = m[(x, y)].norm();
                if bakerlab::exclusion::in_classical_set(x, y, k, w, a.n) {
                    on_max = on_max.max(v);
                } else {
                    off_max = off_max.max(v);
                }
            }
        }
        per_k.push(json!({
            "k": k,
            "on_classical_max": on_max,
            "off_classical_max": off_max,
            "reference_2_pow_minus_k_half": 0.5f64.powf(k as f64 / 2.0),
        }));
    }
    write_report(
        &a.out.join("powers_summary.json"),
        serde_json::to_value(a).expect("config"),
        json!({ "N": a.n, "per_k": per_k }),
        0,
        started,
    )?;
    Ok(true)
}

fn cmd_projection(a: &ProjectionArgs, check: bool, started: Instant) -> Result<bool, CliError> {
    even_dim(a.n)?;
    let window = window_from(a.start, a.len)?;
    std::fs::create_dir_all(&a.out)?;
    let op = BvOperator::new(a.n)?;
    let sd = op.spectral_decompose()?;
    let p = projector(&sd, &window);
    if p.rank == 0 {
        return Err(CliError::Config("window contains no eigenangles".into()));
    }
    std::fs::write(a.out.join("projection_heatmap.csv"), heatmap_csv(&p.mat))?;
    let params =
        param_schedule(a.n, a.len, a.eps_rule.into()).map_err(|e| CliError::Config(e.to_string()))?;
    let report = projection_stats(&p, &params, a.band);
    let (herm, idem, trace_defect) = p.axiom_defects();
    let payload = json!({
        "stats": serde_json::to_value(&report).expect("report"),
        "axioms": {
            "hermitian_defect": herm,
            "idempotence_defect": idem,
            "trace_defect": trace_defect,
        },
        "schedule": serde_json::to_value(&params).expect("params"),
    });
    write_report(
        &a.out.join("projection_stats.json"),
        serde_json::to_value(a).expect("config"),
        payload,
        0,
        started,
    )?;
    if check {
        return Ok(herm <= 1e-8 && idem <= 1e-8 && trace_defect <= 1e-6);
    }
    Ok(true)
}

fn cmd_weyl(a: &WindowArgs, check: bool, started: Instant) -> Result<bool, CliError> {
    even_dim(a.n)?;
    let window = window_from(a.start, a.len)?;
    let op = BvOperator::new(a.n)?;
    let sd = op.spectral_decompose()?;
    let rank = sd.indices_in(&window).len();
    let expected = a.n as f64 * a.len / (2.0 * PI);
    let ratio = rank as f64 / expected;
    let f = Observable::cos_2pi_q();
    let weyl =
        windowed_weyl_sum(&sd, &window, &f).map_err(|e| CliError::Config(e.to_string()))?;
    let payload = json!({
        "N": a.n,
        "interval": { "start": window.start, "length": window.length },
        "count": rank,
        "expected_count": expected,
        "count_ratio": ratio,
        "weyl_avg_cos_q": { "re": weyl.re, "im": weyl.im },
        "min_angle_gap": sd.min_angle_gap(),
    });
    write_report(&a.out, serde_json::to_value(a).expect("config"), payload, 0, started)?;
    if check {
        return Ok((ratio - 1.0).abs() <= 0.1);
    }
    Ok(true)
}

fn cmd_variance(a: &WindowArgs, started: Instant) -> Result<bool, CliError> {
    even_dim(a.n)?;
    let window = window_from(a.start, a.len)?;
    let op = BvOperator::new(a.n)?;
    let sd = op.spectral_decompose()?;
    let v = quantum_variance(&sd, &window, &Observable::cos_2pi_q())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let payload = json!({
        "N": a.n,
        "interval": { "start": window.start, "length": window.length },
        "observable": "cos(2 pi q)",
        "quantum_variance": v,
    });
    write_report(&a.out, serde_json::to_value(a).expect("config"), payload, 0, started)?;
    Ok(true)
}

fn cmd_randomwave(a: &RandomwaveArgs, started: Instant) -> Result<bool, CliError> {
    even_dim(a.n)?;
    if a.seeds < 1 {
        return Err(CliError::Config("need at least one seed".into()));
    }
    let window = window_from(a.start, a.len)?;
    let op = BvOperator::new(a.n)?;
    let sd = op.spectral_decompose()?;
    let mut samples = Vec::new();
    let mut ks_sum = 0.0;
    let mut ks_pass = 0usize;
    let mut sc_sum = 0.0;
    let mut l2_sum = 0.0;
    let mut l4_sum = 0.0;
    let mut linf_sum = 0.0;
    for i in 0..a.seeds {
        let w =
            sample_wave(&sd, &window, a.seed + i).map_err(|e| CliError::Config(e.to_string()))?;
        let (ks_r, _) = value_statistics(&w);
        ks_sum += ks_r;
        if ks_r <= 0.05 {
            ks_pass += 1;
        }
        let (sr, _) = sign_changes(&w);
        sc_sum += sr as f64;
        let lp = lp_norms(&w, &[2.0, 4.0, f64::INFINITY]);
        l2_sum += lp[0].1;
        l4_sum += lp[1].1 * a.n as f64;
        linf_sum += lp[2].1;
        samples.push(w);
    }
    let hist = sign_change_distribution(&samples, 16).ok();
    let conc = matrix_element_concentration(
        &sd,
        &window,
        &Observable::cos_2pi_q(),
        a.seeds as usize,
        a.seed,
        0.1,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let quantiles: serde_json::Map<String, Value> =
        conc.quantiles.iter().map(|(q, v)| (format!("{q}"), json!(v))).collect();
    let ns = a.seeds as f64;
    let payload = json!({
        "N": a.n,
        "interval": { "start": window.start, "length": window.length },
        "dim_S": samples[0].dim_s,
        "seeds": a.seeds,
        "ks_real_mean": ks_sum / ns,
        "ks_pass_frac": ks_pass as f64 / ns,
        "sign_changes_mean": sc_sum / ns,
        "lp": { "2": l2_sum / ns, "4": l4_sum / ns, "inf": linf_sum / ns },
        "hist_sign_changes": hist,
        "obs_deviation_quantiles": quantiles,
    });
    write_report(&a.out, serde_json::to_value(a).expect("config"), payload, a.seed, started)?;
    Ok(true)
}

fn cmd_walsh(a: &WalshArgs, check: bool, started: Instant) -> Result<bool, CliError> {
    let ell = a.ell.unwrap_or(a.k / 2);
    let params = WalshParams::new(a.d, a.k, ell)?;
    let op = WalshOperator::new(params);
    let order = params.order();
    // exact combinatorics across all powers 1..order-1
    let mut count_pass = true;
    let mut count_detail = Vec::new();
    for j in 1..order as i64 {
        match count_nonzero_entries(&op, j) {
            Ok(rep) => {
                if !rep.pass {
                    count_pass = false;
                    count_detail.push(format!(
                        "j={j}: diag {}/{} total {}/{} neighbors {}+{}/{}",
                        rep.diag_count,
                        rep.expected_diag,
                        rep.total_count,
                        rep.expected_total,
                        rep.neighbor_plus,
                        rep.neighbor_minus,
                        rep.expected_neighbor
                    ));
                }
            }
            Err(WalshError::DimensionTooLarge { .. }) => {
                count_detail
                    .push(format!("j={j}: skipped (dimension too large for dense count)"));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let eigen = WalshEigen::new(params)?;
    let mut ks_max: Option<f64> = None;
    let mut que_max: Option<f64> = None;
    if a.seeds > 0 {
        let obs = walsh_op(&eigen.op, |q, _| if q < 0.5 { 1.0 } else { 0.0 }, 4);
        for i in 0..a.seeds {
            let rep = eigenbasis_statistics(&eigen, &[&obs], a.seed + i)?;
            ks_max = Some(ks_max.unwrap_or(0.0).max(rep.ks_max));
            que_max = Some(que_max.unwrap_or(0.0).max(rep.que_max_dev[0]));
        }
    }
    let payload = json!({
        "D": a.d,
        "k": a.k,
        "ell": ell,
        "order": order,
        "degeneracies": eigen.ranks,
        "count_check": if count_pass {
            "pass".to_string()
        } else {
            format!("fail: {}", count_detail.join("; "))
        },
        "count_notes": count_detail,
        "que_max_dev": que_max,
        "ks_max": ks_max,
    });
    write_report(&a.out, serde_json::to_value(a).expect("config"), payload, a.seed, started)?;
    if check {
        return Ok(count_pass);
    }
    Ok(true)
}

fn cmd_exceptional(a: &ExceptionalArgs, check: bool, started: Instant) -> Result<bool, CliError> {
    if a.k_min < 2 || a.k_min > a.k_max {
        return Err(CliError::Config(format!(
            "need 2 <= k-min <= k-max, got {}..{}",
            a.k_min, a.k_max
        )));
    }
    // window [3 pi/2, 3 pi/2 + pi), i.e. eigenangles in [-pi/2, pi/2)
    let window = AngleInterval::new(3.0 * PI / 2.0, PI);
    let mut rows = Vec::new();
    let mut last_p00 = 0.0;
    for kk in a.k_min..=a.k_max {
        let n = 1usize << kk;
        let op = BvOperator::new(n)?;
        let sd = op.spectral_decompose()?;
        let idx = sd.indices_in(&window);
        let mut p00 = 0.0;
        for &j in &idx {
            p00 += sd.vectors.col(j)[0].norm_sqr();
        }
        last_p00 = p00;
        rows.push(json!({ "K": kk, "N": n, "P00": p00, "rank": idx.len() }));
    }
    let payload = json!({
        "interval": { "start": window.start, "length": window.length },
        "sweep": rows,
    });
    write_report(&a.out, serde_json::to_value(a).expect("config"), payload, 0, started)?;
    if check && a.k_max >= 12 {
        return Ok(last_p00 >= 0.85);
    }
    Ok(true)
}
