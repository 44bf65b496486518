use std::fs::File;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sardkit::critical::{self, CriticalValueEstimate, Domain, DomainFile, Schedule, SearchBudget, Witness};
use sardkit::expr::{MapFile, PolynomialMap};
use sardkit::thin::{self, PointCloud};

use super::{emit, read_json, to_value, CliError, Common};

#[derive(Debug, Args, Serialize)]
pub(crate) struct MapArg {
    /// Map file: {"vars": [...], "components": [...]}
    #[arg(long)]
    pub map: PathBuf,
}

impl MapArg {
    fn load(&self) -> Result<PolynomialMap, CliError> {
        let file: MapFile = read_json(&self.map)?;
        Ok(PolynomialMap::from_file(&file)?)
    }
}

fn load_domain(path: &Path, map: &PolynomialMap) -> Result<Domain, CliError> {
    let file: DomainFile = read_json(path)?;
    Ok(Domain::from_file(&file, map.vars())?)
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct BudgetArgs {
    /// Samples per search (per scale for kinf and k1)
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Simplex polishing runs
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    /// Simplex iterations per run
    #[arg(long, default_value_t = 200)]
    pub nm_iters: usize,
    /// Restarts per run, each with a tenfold smaller simplex
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,
    /// Random samples per RNG batch
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    /// Single-linkage threshold; 0.05 x diameter of the values when absent
    #[arg(long)]
    pub cluster_eps: Option<f64>,
}

impl BudgetArgs {
    fn budget(&self, seed: u64) -> SearchBudget {
        SearchBudget {
            samples: self.samples,
            starts: self.starts,
            nm_iters: self.nm_iters,
            restarts: self.restarts,
            batch_size: self.batch_size,
            seed,
            cluster_eps: self.cluster_eps,
        }
    }
}

fn write_witnesses(path: &Path, n: usize, k: usize, ws: &[&Witness]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let header: Vec<String> = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=k).map(|i| format!("f{i}")))
        .chain(["nu".to_string(), "scale".to_string()])
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    for wt in ws {
        let row: Vec<String> = wt.x.iter().chain(&wt.value).chain([&wt.nu, &wt.scale]).map(|v| v.to_string()).collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn estimate_witnesses(e: &CriticalValueEstimate) -> Vec<&Witness> {
    e.clusters.iter().flat_map(|c| &c.witnesses).collect()
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct NuArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub map: MapArg,
    /// Comma-separated coordinates
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub point: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn nu(a: &NuArgs) -> Result<(), CliError> {
    let map = a.map.load()?;
    let nu = critical::nu_at(&map, &a.point)?;
    let kos = critical::kos_weight(&map, &a.point)?;
    let jac = map.jacobian().eval_f64(&a.point)?;
    let rows: Vec<Vec<f64>> = (0..jac.rows()).map(|i| jac.row(i).to_vec()).collect();
    emit("nu", a, a.common.out.as_deref(), json!({ "nu": nu, "kos": kos, "jacobian": rows }))
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct ParseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub map: MapArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn parse(a: &ParseArgs) -> Result<(), CliError> {
    let map = a.map.load()?;
    let jac = map.jacobian();
    let rows: Vec<Vec<String>> =
        (0..jac.k()).map(|i| (0..jac.n()).map(|j| jac.entry(i, j).display(map.vars()).to_string()).collect()).collect();
    emit(
        "parse",
        a,
        a.common.out.as_deref(),
        json!({
            "vars": map.vars(),
            "components": map.component_strings(),
            "n": map.n(),
            "k": map.k(),
            "jacobian": rows,
        }),
    )
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct CriticalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub map: MapArg,
    /// Domain file: {"box": [[lo, hi], ...], "constraints": [...]}
    #[arg(long)]
    pub domain: PathBuf,
    /// Keep points with nu below this
    #[arg(long, default_value_t = 0.5)]
    pub z: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub budget: BudgetArgs,
    /// CSV of the sampled points: x1..xn, f1..fk, nu, scale
    #[arg(long)]
    pub cloud_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn critical(a: &CriticalArgs) -> Result<(), CliError> {
    let map = a.map.load()?;
    let domain = load_domain(&a.domain, &map)?;
    let ws = critical::z_critical_witnesses(&map, &domain, a.z, &a.budget.budget(a.common.seed))?;
    if let Some(p) = &a.cloud_out {
        write_witnesses(p, map.n(), map.k(), &ws.iter().collect::<Vec<_>>())?;
    }
    let k = map.k();
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for w in &ws {
        for j in 0..k {
            lo[j] = lo[j].min(w.value[j]);
            hi[j] = hi[j].max(w.value[j]);
        }
    }
    let range = if ws.is_empty() { Value::Null } else { json!({ "min": lo, "max": hi }) };
    let max_nu = ws.iter().map(|w| w.nu).fold(0.0, f64::max);
    emit(
        "critical",
        a,
        a.common.out.as_deref(),
        json!({ "z": a.z, "n_points": ws.len(), "value_range": range, "max_nu": max_nu }),
    )
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct K0Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub map: MapArg,
    /// Domain file: {"box": [[lo, hi], ...], "constraints": [...]}
    #[arg(long)]
    pub domain: PathBuf,
    /// Largest nu accepted at a polished minimum
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub budget: BudgetArgs,
    /// Witness CSV: x1..xn, f1..fk, nu, scale
    #[arg(long)]
    pub cloud_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn k0(a: &K0Args) -> Result<(), CliError> {
    let map = a.map.load()?;
    let domain = load_domain(&a.domain, &map)?;
    let est = critical::estimate_k0(&map, &domain, a.tol, &a.budget.budget(a.common.seed))?;
    finish_estimate("k0", a, &map, &est, a.cloud_out.as_deref(), a.common.out.as_deref())
}

fn finish_estimate<C: Serialize>(
    name: &str,
    config: &C,
    map: &PolynomialMap,
    est: &CriticalValueEstimate,
    cloud_out: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let bad = est.violations(map)?;
    if !bad.is_empty() {
        return Err(CliError::Numeric(format!("{} witnesses failed the re-check", bad.len())));
    }
    if let Some(p) = cloud_out {
        write_witnesses(p, map.n(), map.k(), &estimate_witnesses(est))?;
    }
    emit(name, config, out, to_value(est)?)
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct KinfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub map: MapArg,
    /// Increasing sphere radii
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    pub scales: Vec<f64>,
    /// Exponent parameter of the threshold schedule
    #[arg(long, default_value_t = 2)]
    pub i: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub budget: BudgetArgs,
    /// Witness CSV: x1..xn, f1..fk, nu, scale
    #[arg(long)]
    pub cloud_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn schedule(scales: &[f64], i: u32, b: &BudgetArgs, seed: u64) -> Schedule {
    Schedule { i, scales: scales.to_vec(), samples_per_scale: b.samples, seed }
}

pub(crate) fn kinf(a: &KinfArgs) -> Result<(), CliError> {
    let map = a.map.load()?;
    let s = schedule(&a.scales, a.i, &a.budget, a.common.seed);
    let est = critical::estimate_kinf(&map, &s, &a.budget.budget(a.common.seed))?;
    finish_estimate("kinf", a, &map, &est, a.cloud_out.as_deref(), a.common.out.as_deref())
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct K1Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub map: MapArg,
    /// Domain file with at least one constraint
    #[arg(long)]
    pub domain: PathBuf,
    /// Decreasing shell distances
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001,0.0001")]
    pub scales: Vec<f64>,
    /// Exponent parameter of the threshold schedule
    #[arg(long, default_value_t = 2)]
    pub i: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub budget: BudgetArgs,
    /// Witness CSV: x1..xn, f1..fk, nu, scale
    #[arg(long)]
    pub cloud_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn k1(a: &K1Args) -> Result<(), CliError> {
    let map = a.map.load()?;
    let domain = load_domain(&a.domain, &map)?;
    let s = schedule(&a.scales, a.i, &a.budget, a.common.seed);
    let est = critical::estimate_k1(&map, &domain, &s, &a.budget.budget(a.common.seed))?;
    for w in &est.warnings {
        log::warn!("{w}");
    }
    finish_estimate("k1", a, &map, &est, a.cloud_out.as_deref(), a.common.out.as_deref())
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct SardArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub map: MapArg,
    /// Domain file: {"box": [[lo, hi], ...], "constraints": [...]}
    #[arg(long)]
    pub domain: PathBuf,
    /// Strictly decreasing thresholds
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.125")]
    pub z: Vec<f64>,
    /// Fattening radius of the projected cloud
    #[arg(long, default_value_t = 5e-3)]
    pub delta: f64,
    /// Random projections; the score is their median
    #[arg(long, default_value_t = 8)]
    pub projections: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn sard(a: &SardArgs) -> Result<(), CliError> {
    let map = a.map.load()?;
    let domain = load_domain(&a.domain, &map)?;
    let rep = critical::sard_experiment(&map, &domain, &a.z, &a.budget.budget(a.common.seed), a.delta, a.projections)?;
    emit("sard", a, a.common.out.as_deref(), to_value(&rep)?)
}

fn load_cloud(path: &Path) -> Result<PointCloud, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(PointCloud::read_csv(file)?)
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct ThinArgs {
    /// CSV with header x1..xd
    #[arg(long)]
    pub cloud: PathBuf,
    /// Projection dimension
    #[arg(long)]
    pub k: usize,
    /// Fattening radius of the projected cloud
    #[arg(long, default_value_t = 0.02)]
    pub delta: f64,
    /// Random projections; the score is their median
    #[arg(long, default_value_t = 8)]
    pub projections: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn thin(a: &ThinArgs) -> Result<(), CliError> {
    let cloud = load_cloud(&a.cloud)?;
    let rep = thin::thinness_score(&cloud, a.k, a.delta, a.projections, a.common.seed)?;
    emit("thin", a, a.common.out.as_deref(), to_value(&rep)?)
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct DimArgs {
    /// CSV with header x1..xd
    #[arg(long)]
    pub cloud: PathBuf,
    /// Box sides, at least two
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
    pub scales: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn dim(a: &DimArgs) -> Result<(), CliError> {
    let cloud = load_cloud(&a.cloud)?;
    let d = thin::box_dimension(&cloud, &a.scales)?;
    let counts = thin::box_counts(&cloud, &a.scales);
    emit("dim", a, a.common.out.as_deref(), json!({ "box_dimension": d, "counts": counts, "n_points": cloud.len() }))
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    t: f64,
    cloud: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub(crate) struct FamilyArgs {
    /// JSON list of {"t": ..., "cloud": "fiber.csv"}; paths relative to the manifest
    #[arg(long)]
    pub manifest: PathBuf,
    /// Projection dimension
    #[arg(long)]
    pub k: usize,
    /// Fattening radius of the projected cloud
    #[arg(long, default_value_t = 0.02)]
    pub delta: f64,
    /// Random projections; the score is their median
    #[arg(long, default_value_t = 8)]
    pub projections: usize,
    /// Each fiber is judged against z(t) = z_factor * t
    #[arg(long, default_value_t = 1.0)]
    pub z_factor: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub(crate) fn family(a: &FamilyArgs) -> Result<(), CliError> {
    let entries: Vec<ManifestEntry> = read_json(&a.manifest)?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let fibers =
        entries.iter().map(|e| Ok((e.t, load_cloud(&base.join(&e.cloud))?))).collect::<Result<Vec<_>, CliError>>()?;
    let c = a.z_factor;
    let rep = thin::family_sweep(&fibers, a.k, a.delta, a.projections, a.common.seed, |t| c * t)?;
    emit("family", a, a.common.out.as_deref(), to_value(&rep)?)
}
