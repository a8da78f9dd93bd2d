use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use rvb_core::dmrm::DmrmState;
use rvb_core::ggm::{
    certify_with, ggm_exact_with_cap, ggm_restricted, random_ssa_triple, ssa_check,
    CertificationReport,
};
use rvb_core::lattice::{covering_count_transfer, enumerate_coverings, serialize_coverings};
use rvb_core::scaling::{SampleFamily, SearchKind};
use rvb_core::statevec::build_rvb;
use rvb_core::{extrapolate, fit_scaling, GgmResult, LatticeSpec, ScalingFit, ScalingSample};

use crate::report::{emit, json_report, wall_time, Meta, Sink};
use crate::{
    CertifyArgs, Failure, Families, FitArgs, GlobalArgs, SweepArgs, EXIT_BAD_INPUT, EXIT_INTERNAL,
};

#[derive(Serialize)]
struct Config<'a, A: Serialize> {
    #[serde(flatten)]
    global: &'a GlobalArgs,
    #[serde(flatten)]
    args: &'a A,
}

#[derive(Serialize)]
struct NoArgs {}

fn lattice(g: &GlobalArgs) -> Result<LatticeSpec, Failure> {
    Ok(LatticeSpec::new(g.m, g.mp, g.bc.into())?)
}

pub fn coverings(g: &GlobalArgs) -> Result<(), Failure> {
    let config = Config { global: g, args: &NoArgs {} };
    let meta = Meta::new("coverings", g.seed, &config, &[]);
    let spec = lattice(g)?;
    let covs = enumerate_coverings(&spec)?;
    let transfer = covering_count_transfer(&spec)?;
    if transfer != covs.len() as u64 {
        return Err(Failure::new(
            EXIT_INTERNAL,
            format!("enumerated {} coverings but the transfer count is {transfer}", covs.len()),
        ));
    }
    let text = format!(
        "{}# count={}\n{}",
        meta.comment_lines(),
        covs.len(),
        serialize_coverings(&spec, &covs)
    );
    emit(g.out.as_deref(), &text)
}

#[derive(Serialize)]
struct GgmEntry {
    search: &'static str,
    value: f64,
    lambda_sq_max: f64,
    partition: Vec<usize>,
    partition_family: String,
    partitions_checked: usize,
    families: Vec<String>,
}

impl GgmEntry {
    fn exact(r: &GgmResult) -> Self {
        GgmEntry {
            search: "exhaustive",
            value: r.value,
            lambda_sq_max: r.lambda_sq_max,
            partition: r.achieving_partition.part_k.clone(),
            partition_family: "exhaustive".into(),
            partitions_checked: r.partitions_checked,
            families: Vec::new(),
        }
    }

    fn restricted(r: &GgmResult, families: &[rvb_core::Family]) -> Self {
        GgmEntry {
            search: "restricted",
            value: r.value,
            lambda_sq_max: r.lambda_sq_max,
            partition: r.achieving_partition.part_k.clone(),
            partition_family: r.achieving_family.map_or("none".into(), |f| f.name().into()),
            partitions_checked: r.partitions_checked,
            families: families.iter().map(|f| f.name().to_string()).collect(),
        }
    }
}

#[derive(Serialize)]
struct LatticeInfo {
    m: usize,
    m_prime: usize,
    bc: &'static str,
    n_total: usize,
}

impl LatticeInfo {
    fn of(spec: &LatticeSpec) -> Self {
        LatticeInfo {
            m: spec.m,
            m_prime: spec.m_prime,
            bc: spec.boundary.tag(),
            n_total: spec.num_sites(),
        }
    }
}

#[derive(Serialize)]
struct GgmReport {
    lattice: LatticeInfo,
    exact: Option<GgmEntry>,
    restricted: Option<GgmEntry>,
    /// Exact and restricted values within `tol_agree`, when both ran.
    agreement: Option<bool>,
    certification: Option<CertificationReport>,
    wall_time: serde_json::Value,
}

fn restricted_search(spec: LatticeSpec, g: &GlobalArgs) -> Result<GgmEntry, Failure> {
    let src = DmrmState::with_caps(spec, g.cap_row, g.cap_mp)?;
    let families = src.supported_families();
    let r = ggm_restricted(&src, &families)?;
    Ok(GgmEntry::restricted(&r, &families))
}

pub fn ggm(g: &GlobalArgs) -> Result<(), Failure> {
    let config = Config { global: g, args: &NoArgs {} };
    let meta = Meta::new("ggm", g.seed, &config, &[]);
    let spec = lattice(g)?;
    let start = Instant::now();
    let small = spec.num_sites() <= g.cap_exhaustive;
    if !small && !g.restricted {
        return Err(rvb_core::Error::TooLargeForExhaustive {
            sites: spec.num_sites(),
            cap: g.cap_exhaustive,
        }
        .into());
    }
    let (exact, certification) = if small {
        let psi = build_rvb(&spec)?;
        let r = ggm_exact_with_cap(&psi, g.cap_exhaustive)?;
        let c = certify_with(&psi, g.cap_exhaustive, g.tol_certify)?;
        (Some(GgmEntry::exact(&r)), Some(c))
    } else {
        (None, None)
    };
    let restricted = if g.restricted {
        Some(restricted_search(spec, g)?)
    } else {
        None
    };
    let agreement = match (&exact, &restricted) {
        (Some(e), Some(r)) => Some((e.value - r.value).abs() <= g.tol_agree),
        _ => None,
    };
    let report = GgmReport {
        lattice: LatticeInfo::of(&spec),
        exact,
        restricted,
        agreement,
        certification,
        wall_time: wall_time(g.timings, start),
    };
    emit(g.out.as_deref(), &json_report(&meta, &report))
}

/// One sweep CSV row. Columns are only ever appended.
#[derive(Debug, Serialize)]
struct SweepRow {
    n_total: usize,
    family: SampleFamily,
    g: f64,
    lambda_sq: f64,
    partition_family: String,
    wall_time: String,
    search: SearchKind,
    m: usize,
    m_prime: usize,
    partition: String,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    m: usize,
    m_prime: usize,
    family: SampleFamily,
}

fn sweep_points(a: &SweepArgs) -> Vec<Point> {
    let mut pts = Vec::new();
    for m in (a.m_min.max(2)..=a.m_max).filter(|m| m % 2 == 0) {
        if a.families != Families::Imperfect {
            pts.push(Point { m, m_prime: m, family: SampleFamily::Perfect });
        }
        if a.families != Families::Perfect {
            for m_prime in [m - 1, m + 1] {
                pts.push(Point { m, m_prime, family: SampleFamily::Imperfect });
            }
        }
    }
    pts.sort_by_key(|p| (p.m * p.m_prime, p.m, p.m_prime));
    pts
}

fn run_point(p: Point, g: &GlobalArgs) -> Result<SweepRow, Failure> {
    let start = Instant::now();
    let spec = LatticeSpec::new(p.m, p.m_prime, g.bc.into())?;
    let (entry, search) = if !g.restricted && spec.num_sites() <= g.cap_exhaustive {
        let psi = build_rvb(&spec)?;
        let r = ggm_exact_with_cap(&psi, g.cap_exhaustive)?;
        (GgmEntry::exact(&r), SearchKind::Exhaustive)
    } else {
        (restricted_search(spec, g)?, SearchKind::Restricted)
    };
    let wall = if g.timings {
        format!("{:.6}", start.elapsed().as_secs_f64())
    } else {
        "NA".into()
    };
    let partition: Vec<String> = entry.partition.iter().map(|s| s.to_string()).collect();
    Ok(SweepRow {
        n_total: spec.num_sites(),
        family: p.family,
        g: entry.value,
        lambda_sq: entry.lambda_sq_max,
        partition_family: entry.partition_family,
        wall_time: wall,
        search,
        m: p.m,
        m_prime: p.m_prime,
        partition: partition.join(" "),
    })
}

pub fn sweep(g: &GlobalArgs, a: &SweepArgs) -> Result<(), Failure> {
    let config = Config { global: g, args: a };
    let meta = Meta::new("sweep", g.seed, &config, &[]);
    let points = sweep_points(a);
    if points.is_empty() {
        return Err(Failure::new(
            EXIT_BAD_INPUT,
            format!("no even m in {}..={}", a.m_min, a.m_max),
        ));
    }
    let mut sink = Sink::open(g.out.as_deref())?;
    sink.write_str(&meta.comment_lines())?;
    let mut header = csv::Writer::from_writer(Vec::new());
    header
        .write_record([
            "n_total", "family", "g", "lambda_sq", "partition_family", "wall_time", "search", "m",
            "m_prime", "partition",
        ])
        .expect("in-memory write");
    sink.write_str(&String::from_utf8(header.into_inner().expect("flush")).expect("utf8"))?;

    let jobs = match a.jobs {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        j => j,
    }
    .min(points.len());
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut first_failure: Option<Failure> = None;
    std::thread::scope(|scope| -> Result<(), Failure> {
        for _ in 0..jobs {
            let tx = tx.clone();
            let (next, points) = (&next, &points);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&p) = points.get(i) else { break };
                if tx.send((i, run_point(p, g))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut emitted = 0;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&emitted) {
                let p = points[emitted];
                emitted += 1;
                match r {
                    Ok(row) => sink.write_str(&csv_line(&row))?,
                    Err(f) => {
                        let line = format!(
                            "# failed m={} m_prime={} exit={}: {}\n",
                            p.m, p.m_prime, f.code, f.message
                        );
                        sink.write_str(&line)?;
                        eprintln!("rvb: point {}x{} failed: {}", p.m, p.m_prime, f.message);
                        first_failure.get_or_insert(f);
                    }
                }
            }
        }
        Ok(())
    })?;
    match first_failure {
        Some(f) => Err(Failure::new(f.code, "one or more sweep points failed")),
        None => Ok(()),
    }
}

fn csv_line(row: &SweepRow) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.serialize(row).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[derive(Deserialize)]
struct FitRow {
    n_total: usize,
    g: f64,
    family: SampleFamily,
    search: SearchKind,
}

fn read_samples(path: &Path) -> Result<(Vec<u8>, Vec<ScalingSample>), Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut samples = Vec::new();
    for rec in reader.deserialize::<FitRow>() {
        let r = rec.map_err(|e| Failure::new(EXIT_BAD_INPUT, format!("{}: {e}", path.display())))?;
        samples.push(ScalingSample::new(r.n_total, r.g, r.family, r.search));
    }
    Ok((bytes, samples))
}

#[derive(Serialize)]
#[serde(rename_all = "lowercase")]
enum FitOutcome {
    Fit(ScalingFit),
    Error(String),
}

#[derive(Serialize)]
struct FitReport {
    samples: Vec<ScalingSample>,
    fit: ScalingFit,
    g_infinity: f64,
    g_c_sigma: f64,
    per_family: BTreeMap<String, FitOutcome>,
    curve: Option<String>,
}

fn curve_path(a: &FitArgs, out: Option<&Path>) -> Option<PathBuf> {
    a.curve
        .clone()
        .or_else(|| out.map(|p| p.with_extension("curve.csv")))
}

pub fn fit(g: &GlobalArgs, a: &FitArgs) -> Result<(), Failure> {
    let (bytes, samples) = read_samples(&a.input)?;
    let config = Config { global: g, args: a };
    let meta = Meta::new("fit", g.seed, &config, &bytes);
    let fit = fit_scaling(&samples)?;
    let mut per_family = BTreeMap::new();
    if a.per_family {
        for fam in [SampleFamily::Perfect, SampleFamily::Imperfect] {
            let sub: Vec<ScalingSample> =
                samples.iter().copied().filter(|s| s.family == fam).collect();
            let name = serde_json::to_value(fam).expect("family serializes");
            let outcome = match fit_scaling(&sub) {
                Ok(f) => FitOutcome::Fit(f),
                Err(e) => FitOutcome::Error(e.to_string()),
            };
            per_family.insert(name.as_str().unwrap_or_default().to_string(), outcome);
        }
    }
    let curve = curve_path(a, g.out.as_deref());
    if let Some(path) = &curve {
        let lo = samples.iter().map(|s| s.n_total).min().unwrap_or(1) as f64;
        let hi = 10.0 * samples.iter().map(|s| s.n_total).max().unwrap_or(1) as f64;
        let steps = a.grid.max(2);
        let mut text = meta.comment_lines();
        text.push_str("n,g_fitted\n");
        for i in 0..steps {
            let n = lo * (hi / lo).powf(i as f64 / (steps - 1) as f64);
            text.push_str(&format!("{n},{}\n", extrapolate(&fit, n)));
        }
        emit(Some(path), &text)?;
    }
    let report = FitReport {
        g_infinity: extrapolate(&fit, f64::INFINITY),
        g_c_sigma: fit.g_c_sigma(),
        samples,
        fit,
        per_family,
        curve: curve.and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())),
    };
    emit(g.out.as_deref(), &json_report(&meta, &report))
}

#[derive(Serialize)]
struct SsaTrial {
    x: Vec<usize>,
    y: Vec<usize>,
    c: Vec<usize>,
    slack: f64,
}

#[derive(Serialize)]
struct CertifyReport {
    lattice: LatticeInfo,
    certification: CertificationReport,
    ssa_trials: usize,
    ssa_min_slack: f64,
    ssa_worst: Option<SsaTrial>,
    ssa_holds: bool,
    wall_time: serde_json::Value,
}

pub fn certify(g: &GlobalArgs, a: &CertifyArgs) -> Result<(), Failure> {
    let config = Config { global: g, args: a };
    let meta = Meta::new("certify", g.seed, &config, &[]);
    let spec = lattice(g)?;
    let start = Instant::now();
    if spec.num_sites() > g.cap_exhaustive {
        return Err(rvb_core::Error::TooLargeForExhaustive {
            sites: spec.num_sites(),
            cap: g.cap_exhaustive,
        }
        .into());
    }
    let psi = build_rvb(&spec)?;
    let certification = certify_with(&psi, g.cap_exhaustive, g.tol_certify)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut worst: Option<SsaTrial> = None;
    if spec.num_sites() >= 2 {
        for _ in 0..a.trials {
            let (x, y, c) = random_ssa_triple(&mut rng, spec.num_sites(), a.max_union);
            let slack = ssa_check(&psi, &x, &y, &c)?;
            if worst.as_ref().is_none_or(|w| slack < w.slack) {
                worst = Some(SsaTrial { x, y, c, slack });
            }
        }
    }
    let min_slack = worst.as_ref().map_or(f64::INFINITY, |w| w.slack);
    let report = CertifyReport {
        lattice: LatticeInfo::of(&spec),
        certification,
        ssa_trials: a.trials,
        ssa_min_slack: min_slack,
        ssa_holds: min_slack >= -g.tol_ssa,
        ssa_worst: worst,
        wall_time: wall_time(g.timings, start),
    };
    emit(g.out.as_deref(), &json_report(&meta, &report))
}
