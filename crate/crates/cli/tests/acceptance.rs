//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported but do not fail the run;
//! every other FAIL does.

use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use rvb_core::dmrm::{column_pair_sites, rho2_columns, DmrmState};
use rvb_core::ggm::{
    certify_with, ggm_exact, ggm_restricted, random_ssa_triple, ssa_check, CERTIFY_TOL,
};
use rvb_core::scaling::{fit_scaling, SampleFamily, ScalingSample, SearchKind};
use rvb_core::statevec::{build_rvb, partial_trace};
use rvb_core::{Boundary, LatticeSpec};

const KNOWN_FAILURES: &[&str] = &["6"];

const ORACLE_TRACE_TOL: f64 = 1e-9;
const MARGINAL_TOL: f64 = 1e-9;
const SSA_TOL: f64 = 1e-10;
const SPIN_TOL: f64 = 1e-10;
const FIT_REL_TOL: f64 = 1e-6;
const AGREE_TOL: f64 = 1e-10;

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, name: &str, detail: String, secs: f64) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {name}: {detail} ({secs:.1} s)");
        if !pass {
            self.failed.push(id.to_string());
        }
    }

    fn info(&self, id: &str, detail: String) {
        println!("INFO [{id}] {detail}");
    }
}

fn lattices(max_sites: usize, two_d: bool) -> Vec<LatticeSpec> {
    let mut out = Vec::new();
    for boundary in [Boundary::OpenBoth, Boundary::PeriodicHorizontal] {
        for m in 1..=max_sites {
            for mp in 1..=max_sites {
                if two_d && (m < 2 || mp < 2) {
                    continue;
                }
                if let Ok(s) = LatticeSpec::new(m, mp, boundary) {
                    if s.num_sites() <= max_sites && s.num_sites() % 2 == 0 {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

fn single_site_error(rho: &rvb_core::DensityMatrix) -> f64 {
    let m = rho.matrix();
    (m[(0, 0)] - 0.5).norm() + (m[(1, 1)] - 0.5).norm() + m[(0, 1)].norm() + m[(1, 0)].norm()
}

/// Two-column reduced states against brute force; returns the worst distance
/// and the worst single-site deviation of their marginals.
fn criterion_1(r: &mut Report) -> f64 {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_marginal = 0.0f64;
    let mut detail = Vec::new();
    for (m, mp) in [(4, 3), (4, 4), (6, 3), (4, 5), (6, 4)] {
        let spec = LatticeSpec::periodic(m, mp).unwrap();
        let psi = build_rvb(&spec).unwrap();
        let mut d_max = 0.0f64;
        for left in 0..m {
            let brute = partial_trace(&psi, &column_pair_sites(&spec, left)).unwrap();
            let fast = rho2_columns(&spec, left, 5).unwrap();
            d_max = d_max.max(fast.trace_distance(&brute).unwrap());
            for k in 0..2 * mp {
                let e = single_site_error(&fast.marginal(&[k]).unwrap());
                worst_marginal = worst_marginal.max(e);
            }
        }
        worst = worst.max(d_max);
        detail.push(format!("{m}x{mp}:{d_max:.1e}"));
    }
    r.line(
        "1",
        worst < ORACLE_TRACE_TOL,
        "column-pair states vs brute force",
        format!("max trace distance {worst:.2e} < {ORACLE_TRACE_TOL:e} [{}]", detail.join(" ")),
        t.elapsed().as_secs_f64(),
    );
    worst_marginal
}

fn criterion_2(r: &mut Report, dmrm_marginal: f64) {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for spec in lattices(16, false).into_iter().chain([
        LatticeSpec::periodic(4, 5).unwrap(),
        LatticeSpec::periodic(6, 4).unwrap(),
    ]) {
        let psi = build_rvb(&spec).unwrap();
        for s in 0..spec.num_sites() {
            worst = worst.max(single_site_error(&partial_trace(&psi, &[s]).unwrap()));
        }
        count += 1;
    }
    let pass = worst < MARGINAL_TOL && dmrm_marginal < MARGINAL_TOL;
    r.line(
        "2",
        pass,
        "single-site states are I/2",
        format!(
            "brute force {worst:.1e} over {count} lattices, column-pair marginals {dmrm_marginal:.1e}"
        ),
        t.elapsed().as_secs_f64(),
    );
}

/// Criterion 3 together with the exhaustive baseline used by criterion 6.
fn criterion_3(r: &mut Report) -> (bool, String) {
    let t = Instant::now();
    let mut min_mixed = f64::INFINITY;
    let mut all = true;
    let mut count = 0;
    let mut worst_diff = 0.0f64;
    let mut mismatches = Vec::new();
    for spec in lattices(16, true) {
        let psi = build_rvb(&spec).unwrap();
        let c = certify_with(&psi, 16, CERTIFY_TOL).unwrap();
        all &= c.certified;
        min_mixed = min_mixed.min(c.min_mixedness);
        count += 1;
        let exact = ggm_exact(&psi).unwrap();
        let src = DmrmState::new(spec).unwrap();
        let fast = ggm_restricted(&src, &src.supported_families()).unwrap();
        let d = (exact.value - fast.value).abs();
        worst_diff = worst_diff.max(d);
        if d > AGREE_TOL {
            mismatches.push(spec.to_string());
        }
    }
    r.line(
        "3",
        all && min_mixed > CERTIFY_TOL,
        "genuine entanglement, 2D lattices <= 16 sites",
        format!("{count} lattices, min 1 - Tr rho^2 = {min_mixed:.4} > {CERTIFY_TOL:e}"),
        t.elapsed().as_secs_f64(),
    );
    let detail = format!(
        "{count} lattices, max |G_restricted - G_exhaustive| = {worst_diff:.1e}{}",
        if mismatches.is_empty() {
            String::new()
        } else {
            format!(", mismatches: {}", mismatches.join(" "))
        }
    );
    (mismatches.is_empty(), detail)
}

fn criterion_4(r: &mut Report) {
    let t = Instant::now();
    let mut worst = f64::INFINITY;
    let mut trials = 0;
    for (i, spec) in [
        LatticeSpec::periodic(4, 3).unwrap(),
        LatticeSpec::periodic(4, 4).unwrap(),
        LatticeSpec::open(4, 3).unwrap(),
        LatticeSpec::open(4, 4).unwrap(),
    ]
    .into_iter()
    .enumerate()
    {
        let psi = build_rvb(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        for _ in 0..200 {
            let (x, y, c) = random_ssa_triple(&mut rng, spec.num_sites(), 6);
            worst = worst.min(ssa_check(&psi, &x, &y, &c).unwrap());
            trials += 1;
        }
    }
    r.line(
        "4",
        worst >= -SSA_TOL,
        "strong subadditivity on 4x3 and 4x4",
        format!("{trials} trials, min slack {worst:.3e} >= -{SSA_TOL:e}"),
        t.elapsed().as_secs_f64(),
    );
}

fn criterion_5(r: &mut Report) {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let specs = lattices(20, false);
    for spec in &specs {
        worst = worst.max(build_rvb(spec).unwrap().total_spin_squared().abs());
    }
    r.line(
        "5",
        worst < SPIN_TOL,
        "total spin zero, lattices <= 20 sites",
        format!("{} lattices, max |<S^2>| = {worst:.1e}", specs.len()),
        t.elapsed().as_secs_f64(),
    );
}

fn rvb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvb"))
        .args(args)
        .output()
        .expect("rvb runs")
}

struct SweepRow {
    n: usize,
    family: String,
    g: f64,
    m: usize,
    mp: usize,
}

fn read_sweep(path: &Path) -> Vec<SweepRow> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    lines.next();
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            SweepRow {
                n: f[0].parse().unwrap(),
                family: f[1].to_string(),
                g: f[2].parse().unwrap(),
                m: f[7].parse().unwrap(),
                mp: f[8].parse().unwrap(),
            }
        })
        .collect()
}

fn criterion_6(r: &mut Report, dir: &Path, baseline: (bool, String)) {
    let t = Instant::now();
    let sweep = dir.join("sweep.csv");
    let out = rvb(&[
        "sweep", "--bc", "ph", "--restricted", "--m-min", "4", "--m-max", "8", "--out",
        sweep.to_str().unwrap(),
    ]);
    let sweep_ok = out.status.success();
    let rows = read_sweep(&sweep);
    let seq: Vec<String> = rows
        .iter()
        .map(|s| format!("{}:{:.4}{}", s.n, s.g, &s.family[..1]))
        .collect();
    r.info("6", format!("sweep G(n) [p perfect, i imperfect]: {}", seq.join(" ")));

    // |G(m, m) − G(m, m−1)| over the computed m.
    let mut gaps = Vec::new();
    for p in rows.iter().filter(|s| s.family == "perfect") {
        if let Some(i) = rows.iter().find(|s| s.m == p.m && s.mp + 1 == p.m) {
            gaps.push((p.m, (p.g - i.g).abs()));
        }
    }
    let monotone = gaps.len() >= 2 && gaps.windows(2).all(|w| w[1].1 < w[0].1);
    let gap_text: Vec<String> = gaps.iter().map(|(m, g)| format!("m={m}:{g:.4}")).collect();

    let fit_path = dir.join("fit.json");
    let out_fit = rvb(&["fit", "--input", sweep.to_str().unwrap(), "--out", fit_path.to_str().unwrap()]);
    let fit_text = if out_fit.status.success() {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&fit_path).unwrap()).unwrap();
        let f = &v["result"]["fit"];
        let (g_c, k, x, rms) = (
            f["g_c"].as_f64().unwrap(),
            f["k"].as_f64().unwrap(),
            f["x"].as_f64().unwrap(),
            f["residual_rms"].as_f64().unwrap(),
        );
        let ok = (g_c - 0.358).abs() <= 0.02
            && (1.3..=2.3).contains(&x)
            && (1.77 / 2.0..=1.77 * 2.0).contains(&k)
            && rms <= 1e-2;
        (ok, format!("g_c={g_c:.4} k={k:.3} x={x:.3} rms={rms:.1e}"))
    } else {
        let msg = String::from_utf8_lossy(&out_fit.stderr).trim().to_string();
        (false, format!("fit exit {:?}: {msg}", out_fit.status.code()))
    };
    let pass = sweep_ok && fit_text.0 && monotone;
    r.line(
        "6",
        pass,
        "scaling fit of the sweep (target g_c 0.358 +- 0.02, x in [1.3, 2.3], k within 2x of 1.77)",
        format!(
            "{}; gap {} monotone={monotone}",
            fit_text.1,
            gap_text.join(" ")
        ),
        t.elapsed().as_secs_f64(),
    );
    r.line(
        "6r",
        baseline.0,
        "restricted search equals exhaustive at <= 16 sites (mandatory)",
        baseline.1,
        0.0,
    );
}

fn criterion_7(r: &mut Report) {
    let t = Instant::now();
    let ns = [8usize, 16, 24, 36, 48];
    let synth = |g_c: f64, k: f64, x: f64| -> Vec<ScalingSample> {
        ns.iter()
            .map(|&n| {
                let g = g_c + k * (n as f64).powf(-x);
                ScalingSample::new(n, g, SampleFamily::Perfect, SearchKind::Exhaustive)
            })
            .collect()
    };
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs();
    let mut worst = 0.0f64;
    let mut failures = 0;
    let mut check = |g_c: f64, k: f64, x: f64| match fit_scaling(&synth(g_c, k, x)) {
        Ok(f) => worst = worst.max(rel(f.g_c, g_c)).max(rel(f.k, k)).max(rel(f.x, x)),
        Err(_) => failures += 1,
    };
    check(0.358, 1.77, 1.82);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let g_c = rng.random_range(1e-3..0.75);
        let k = rng.random_range(0.1..5.0);
        let x = rng.random_range(0.5..3.0);
        check(g_c, k, x);
    }
    r.line(
        "7",
        failures == 0 && worst <= FIT_REL_TOL,
        "noiseless scaling recovery (reference + 100 draws)",
        format!("max relative error {worst:.1e}, {failures} failed fits"),
        t.elapsed().as_secs_f64(),
    );
}

fn criterion_8(r: &mut Report, dir: &Path) {
    let t = Instant::now();
    let synth = dir.join("synthetic.csv");
    let mut s = String::from("n_total,g,family,search\n");
    for n in [8, 16, 24, 36, 48] {
        s.push_str(&format!("{n},{},perfect,exhaustive\n", 0.358 + 1.77 * (n as f64).powf(-1.82)));
    }
    std::fs::write(&synth, s).unwrap();
    let synth = synth.to_str().unwrap().to_string();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("coverings", vec!["coverings", "--m", "4", "--mp", "4", "--bc", "open", "--seed", "3"]),
        ("ggm", vec!["ggm", "--m", "4", "--mp", "3", "--bc", "ph", "--restricted", "--seed", "3"]),
        (
            "sweep",
            vec!["sweep", "--bc", "ph", "--restricted", "--m-min", "4", "--m-max", "6", "--seed", "3"],
        ),
        ("fit", vec!["fit", "--input", &synth, "--seed", "3"]),
        ("certify", vec!["certify", "--m", "4", "--mp", "3", "--bc", "ph", "--seed", "3"]),
    ];
    let mut bad = Vec::new();
    for (name, args) in &cases {
        let mut outputs = Vec::new();
        for (run, jobs) in [(0, "1"), (1, "3")] {
            let run_dir = dir.join(format!("run{run}"));
            std::fs::create_dir_all(&run_dir).unwrap();
            let path = run_dir.join(format!("{name}.out"));
            let mut a: Vec<&str> = args.clone();
            let p = path.to_str().unwrap().to_string();
            a.extend(["--out", &p]);
            if *name == "sweep" {
                a.extend(["--jobs", jobs]);
            }
            let out = rvb(&a);
            if !out.status.success() {
                bad.push(format!("{name} exit {:?}", out.status.code()));
            }
            let mut bytes = std::fs::read(&path).unwrap_or_default();
            if *name == "fit" {
                bytes.extend(std::fs::read(path.with_extension("curve.csv")).unwrap_or_default());
            }
            outputs.push(bytes);
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            bad.push(format!("{name} differs"));
        }
    }
    r.line(
        "8",
        bad.is_empty(),
        "byte-identical reruns of every command",
        if bad.is_empty() {
            format!("{} commands", cases.len())
        } else {
            bad.join(", ")
        },
        t.elapsed().as_secs_f64(),
    );
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut r = Report { failed: Vec::new() };
    let marginal = criterion_1(&mut r);
    criterion_2(&mut r, marginal);
    let baseline = criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r, dir.path(), baseline);
    criterion_7(&mut r);
    criterion_8(&mut r, dir.path());
    let unexpected: Vec<&String> = r
        .failed
        .iter()
        .filter(|id| !KNOWN_FAILURES.contains(&id.as_str()))
        .collect();
    for id in KNOWN_FAILURES {
        if !r.failed.iter().any(|f| f == id) {
            println!("INFO [{id}] listed as a known failure but passed");
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: {} known failure(s), no unexpected failures", r.failed.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
