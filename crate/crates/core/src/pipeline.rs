//! Job configuration, the staged pipeline and the `sgm` command-line driver.
//!
//! Documents are JSON with keys in struct field order. Exit codes: 0 when
//! every executed check passed, 1 on a verification failure, 2 on a usage or
//! configuration error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analyze::{
    collar_identity_residual, collar_model_check, default_band, fiber_suite, sample_manifold, singular_set_check,
    verify_nonsingular, CollarReport, FiberSuiteReport, NonsingularReport, SingularSetReport,
};
use crate::construct::{
    build_basic, build_generalized, validate_vertical_spec, ConstructionKind, Hypersurface, VerticalSpec,
};
use crate::error::{Error, Result};
use crate::mesh::{self, MeshSummary};
use crate::reeb::{self, ReebGraph};
use crate::region::{fit_boundary, FitReport, Region, RegionCertificate};

pub const DEFAULT_MESH_RES: usize = 64;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const SINGULAR_SET_TOL: f64 = 1e-6;
const FIBER_GRID_CELLS: usize = 16;
const FIBER_BOUNDARY_POINTS: usize = 32;

/// A document given either inline or as a path relative to the config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DocRef<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: for<'de> Deserialize<'de> + Clone> DocRef<T> {
    pub fn load(&self, base: &Path) -> Result<T> {
        match self {
            DocRef::Inline(t) => Ok(t.clone()),
            DocRef::Path(p) => read_json(&base.join(p)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub region: DocRef<Region>,
    #[serde(default)]
    pub vertical: Option<DocRef<VerticalSpec>>,
    /// Fiber dimension plus one; implied by `vertical` when present.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub grid_res: Option<usize>,
    #[serde(default)]
    pub mesh_res: Option<usize>,
    #[serde(default)]
    pub sweep_res: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sweep_angle: Option<f64>,
    #[serde(default)]
    pub require_margin: Option<f64>,
}

/// A loaded job with every default resolved.
#[derive(Clone, Debug)]
pub struct Job {
    pub region: Region,
    pub vertical: Option<VerticalSpec>,
    pub k: usize,
    pub mesh_res: usize,
    pub sweep_res: usize,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub sweep_angle: f64,
    pub require_margin: Option<f64>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_document<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_document<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_document(value)?)?;
    Ok(())
}

impl Job {
    pub fn from_config(cfg: &JobConfig, base: &Path, over: &Overrides) -> Result<Job> {
        let mut region = cfg.region.load(base)?;
        if let Some(res) = over.grid_res.or(cfg.grid_res) {
            region = region.with_grid_res(res)?;
        }
        let vertical = cfg.vertical.as_ref().map(|v| v.load(base)).transpose()?;
        let k = match (&vertical, cfg.k) {
            (Some(v), Some(k)) if v.k() != k => {
                return Err(Error::InvalidArgument(format!(
                    "k = {k} but the vertical spec has {} variables",
                    v.k()
                )))
            }
            (Some(v), _) => v.k(),
            (None, Some(k)) => k,
            (None, None) => return Err(Error::InvalidArgument("config needs k or a vertical spec".into())),
        };
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let mesh_res = over.mesh_res.or(cfg.mesh_res).unwrap_or(DEFAULT_MESH_RES);
        if mesh_res < mesh::MIN_RES {
            return Err(Error::InvalidArgument(format!("mesh resolution must be at least {}", mesh::MIN_RES)));
        }
        let sweep_res = over.sweep_res.or(cfg.sweep_res).unwrap_or(reeb::DEFAULT_SWEEP_RES);
        if sweep_res < reeb::MIN_SWEEP_RES {
            return Err(Error::InvalidArgument(format!(
                "sweep resolution must be at least {}",
                reeb::MIN_SWEEP_RES
            )));
        }
        let samples = over.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        Ok(Job {
            region,
            vertical,
            k,
            mesh_res,
            sweep_res,
            samples,
            seed: over.seed.or(cfg.seed).unwrap_or(0),
            out: over
                .out
                .clone()
                .or_else(|| cfg.out.as_ref().map(|o| base.join(o)))
                .unwrap_or_else(|| PathBuf::from("sgm-out")),
            sweep_angle: over.sweep_angle.or(cfg.sweep_angle).unwrap_or(0.0),
            require_margin: over.require_margin.or(cfg.require_margin),
        })
    }

    pub fn load(config: &Path, over: &Overrides) -> Result<Job> {
        let cfg: JobConfig = read_json(config)?;
        let base = config.parent().unwrap_or(Path::new("."));
        Job::from_config(&cfg, base, over)
    }

    pub fn build(&self) -> Result<Hypersurface> {
        match &self.vertical {
            Some(spec) => build_generalized(&self.region, spec),
            None => build_basic(&self.region, self.k),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Region grid resolution (cells per axis)
    #[arg(long, global = true)]
    pub grid_res: Option<usize>,
    /// Isosurface grid resolution (cells per axis)
    #[arg(long, global = true)]
    pub mesh_res: Option<usize>,
    /// Number of sweep positions for Reeb graphs
    #[arg(long, global = true)]
    pub sweep_res: Option<usize>,
    /// Number of Newton seeds for manifold sampling
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Sweep direction in degrees
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub sweep_angle: Option<f64>,
    /// Minimum boundary gradient required by certification
    #[arg(long, global = true)]
    pub require_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSummary {
    pub kind: ConstructionKind,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub a: f64,
    pub degree: u32,
    pub terms: usize,
    pub max_level: f64,
}

impl ConstructionSummary {
    pub fn of(h: &Hypersurface) -> Self {
        ConstructionSummary {
            kind: h.kind(),
            n: h.n(),
            k: h.k(),
            m: h.m(),
            t: h.t(),
            a: h.a(),
            degree: h.poly().degree(),
            terms: h.poly().terms().len(),
            max_level: h.max_level(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshStage {
    pub summary: MeshSummary,
    pub expected_euler: i64,
    pub expected_components: usize,
    pub region_euler: i64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReebStage {
    pub graph: ReebGraph,
    pub region_euler: i64,
    pub expected_betti1: i64,
    pub degrees_ok: bool,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageStatus {
    Passed,
    Failed,
    Skipped,
    NotRun,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    SpecialGenericVerified,
    /// Every executed stage passed but some were skipped.
    Unverified,
    Failed(String),
}

/// Stages in execution order.
pub const STAGES: [&str; 10] = [
    "certify",
    "validate",
    "construct",
    "sample",
    "nonsingular",
    "singular_set",
    "fibers",
    "collar",
    "mesh",
    "reeb",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub generated_unix: Option<u64>,
    pub seed: u64,
    pub certificate: Option<RegionCertificate>,
    pub construction: Option<ConstructionSummary>,
    pub samples: Option<usize>,
    pub collar_identity_residual: Option<f64>,
    pub nonsingular: Option<NonsingularReport>,
    pub singular_set: Option<SingularSetReport>,
    pub fibers: Option<FiberSuiteReport>,
    pub collar: Option<CollarReport>,
    pub mesh: Option<MeshStage>,
    pub reeb: Option<ReebStage>,
    pub stages: Vec<StageRecord>,
    pub verdict: Verdict,
}

impl PipelineReport {
    /// First failed stage, if any.
    pub fn failed_stage(&self) -> Option<&str> {
        match &self.verdict {
            Verdict::Failed(s) => Some(s),
            _ => None,
        }
    }
}

/// Expected Euler characteristic of the hypersurface: twice that of the
/// region when `m = n + k - 1` is even, zero otherwise.
pub fn expected_euler(m: usize, region_euler: i64) -> i64 {
    if m % 2 == 0 {
        2 * region_euler
    } else {
        0
    }
}

pub fn mesh_stage(h: &Hypersurface, res: usize) -> Result<(mesh::Mesh, MeshStage)> {
    if h.n() + h.k() > 3 {
        return Err(Error::NotSupported(format!(
            "meshing needs n + k ≤ 3, got {}",
            h.n() + h.k()
        )));
    }
    let m = mesh::extract_isosurface(h.poly(), &h.bbox(), res)?;
    let summary = mesh::summarize(&m)?;
    let region_euler = h.region().region_euler()?;
    let expected_components = h.region().components_at(h.region().grid_res());
    let expected_euler = expected_euler(h.m(), region_euler);
    let passed = summary.euler == expected_euler && summary.components == expected_components;
    Ok((
        m,
        MeshStage {
            summary,
            expected_euler,
            expected_components,
            region_euler,
            passed,
        },
    ))
}

pub fn reeb_stage(region: &Region, sweep_res: usize, angle_deg: f64) -> Result<ReebStage> {
    let graph = reeb::poincare_reeb_at_angle(region, sweep_res, angle_deg)?;
    let region_euler = region.region_euler()?;
    let expected_betti1 = graph.components as i64 - region_euler;
    let degrees_ok = graph.vertices.iter().all(|v| v.degree == 1 || v.degree == 3);
    let passed = degrees_ok && graph.betti1 == expected_betti1;
    Ok(ReebStage {
        graph,
        region_euler,
        expected_betti1,
        degrees_ok,
        passed,
    })
}

/// Runs every stage not in `skip`, stopping at the first failure. Artifacts
/// are written to `job.out` when `write` is set.
pub fn run_full(job: &Job, skip: &[String], write: bool, timestamp: bool) -> Result<PipelineReport> {
    for s in skip {
        if !STAGES.contains(&s.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "unknown stage '{s}'; stages are {}",
                STAGES.join(", ")
            )));
        }
    }
    if write {
        std::fs::create_dir_all(&job.out)?;
    }
    let mut rep = PipelineReport {
        generated_unix: timestamp.then(unix_now),
        seed: job.seed,
        certificate: None,
        construction: None,
        samples: None,
        collar_identity_residual: None,
        nonsingular: None,
        singular_set: None,
        fibers: None,
        collar: None,
        mesh: None,
        reeb: None,
        stages: Vec::new(),
        verdict: Verdict::SpecialGenericVerified,
    };
    let mut runner = Runner {
        skip,
        records: Vec::new(),
        failed: None,
    };

    let cert_ok = runner.stage("certify", || {
        let c = job.region.certify_with(job.require_margin);
        let ok = c.passed;
        let msg = first_failed_check(&c);
        rep.certificate = Some(c);
        Ok((ok, msg))
    });
    let validate_ok = match &job.vertical {
        Some(spec) if cert_ok != Some(false) => runner.stage("validate", || {
            let r = validate_vertical_spec(spec, job.k);
            let msg = r
                .first_failure()
                .map(|f| format!("condition ({}): {}", f.condition, f.message));
            Ok((r.passed, msg))
        }),
        Some(_) => {
            runner.not_run("validate");
            Some(false)
        }
        None => {
            runner.not_applicable("validate");
            None
        }
    };
    let mut hyper = None;
    if cert_ok != Some(false) && validate_ok != Some(false) {
        runner.stage("construct", || {
            let h = job.build()?;
            rep.construction = Some(ConstructionSummary::of(&h));
            if write {
                write_document(&job.out.join("hypersurface.json"), &h)?;
            }
            hyper = Some(h);
            Ok((true, None))
        });
    } else {
        runner.not_run("construct");
    }

    let mut samples = None;
    match &hyper {
        Some(h) => {
            runner.stage("sample", || {
                let s = sample_manifold(h, job.samples, job.seed)?;
                rep.samples = Some(s.len());
                rep.collar_identity_residual = Some(collar_identity_residual(h, &s));
                samples = Some(s);
                Ok((true, None))
            });
            match &samples {
                Some(s) => {
                    runner.stage("nonsingular", || {
                        let r = verify_nonsingular(h, s, None);
                        let ok = r.passed;
                        let msg = (!ok).then(|| {
                            format!(
                                "gradient norm {:e} below delta {:e}",
                                r.min_grad_norm.min(r.descent_min_grad_norm),
                                r.delta
                            )
                        });
                        rep.nonsingular = Some(r);
                        Ok((ok, msg))
                    });
                }
                None => runner.not_run("nonsingular"),
            }
            runner.stage("singular_set", || {
                let r = singular_set_check(h, SINGULAR_SET_TOL)?;
                let ok = r.passed;
                let msg = (!ok).then(|| {
                    format!(
                        "Hausdorff distance {:e}, max Fvert {:e}, {} interior violations",
                        r.hausdorff_to_boundary,
                        r.max_fvert,
                        r.interior_violations.len()
                    )
                });
                rep.singular_set = Some(r);
                Ok((ok, msg))
            });
            runner.stage("fibers", || {
                let r = fiber_suite(h, FIBER_GRID_CELLS, FIBER_BOUNDARY_POINTS)?;
                let ok = r.passed;
                let msg = r
                    .failures
                    .first()
                    .map(|f| format!("fiber over {:?} is {:?}, expected {:?}", f.base_x, f.classification, f.expected));
                rep.fibers = Some(r);
                Ok((ok, msg))
            });
            runner.stage("collar", || {
                let r = collar_model_check(h, default_band(h))?;
                let ok = r.passed;
                let msg = r.failures.first().map(|f| format!("ray from {:?}: {}", f.origin, f.reason));
                rep.collar = Some(r);
                Ok((ok, msg))
            });
            if h.n() + h.k() <= 3 {
                runner.stage("mesh", || {
                    let (m, st) = mesh_stage(h, job.mesh_res)?;
                    if write {
                        if m.dim == 3 {
                            mesh::export_obj(&m, &job.out.join("mesh.obj"))?;
                        }
                        write_document(&job.out.join("mesh_summary.json"), &st.summary)?;
                    }
                    let ok = st.passed;
                    let msg = (!ok).then(|| {
                        format!(
                            "euler {} components {}, expected {} and {}",
                            st.summary.euler, st.summary.components, st.expected_euler, st.expected_components
                        )
                    });
                    rep.mesh = Some(st);
                    Ok((ok, msg))
                });
            } else {
                runner.not_applicable("mesh");
            }
        }
        None => {
            for s in ["sample", "nonsingular", "singular_set", "fibers", "collar", "mesh"] {
                runner.not_run(s);
            }
        }
    }

    if job.region.dim() == 2 {
        if cert_ok != Some(false) {
            runner.stage("reeb", || {
                let st = reeb_stage(&job.region, job.sweep_res, job.sweep_angle)?;
                if write {
                    reeb::export_dot(&st.graph, &job.out.join("reeb.dot"))?;
                    write_document(&job.out.join("reeb.json"), &st.graph)?;
                }
                let ok = st.passed;
                let msg = (!ok).then(|| format!("betti1 {}, expected {}", st.graph.betti1, st.expected_betti1));
                rep.reeb = Some(st);
                Ok((ok, msg))
            });
        } else {
            runner.not_run("reeb");
        }
    } else {
        runner.not_applicable("reeb");
    }

    rep.verdict = match runner.failed.clone() {
        Some(s) => Verdict::Failed(s),
        None if runner.records.iter().any(|r| r.status == StageStatus::Skipped) => Verdict::Unverified,
        None => Verdict::SpecialGenericVerified,
    };
    rep.stages = runner.records;
    if write {
        write_document(&job.out.join("report.json"), &rep)?;
    }
    Ok(rep)
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn first_failed_check(c: &RegionCertificate) -> Option<String> {
    [
        Some(("intersection_nonneg", &c.intersection_nonneg)),
        Some(("interior_positivity", &c.interior_positivity)),
        Some(("exactly_one_negative", &c.exactly_one_negative)),
        c.gradient_margin_check.as_ref().map(|g| ("gradient_margin", g)),
    ]
    .into_iter()
    .flatten()
    .find(|(_, r)| !r.passed)
    .map(|(name, r)| format!("{name}: {}", r.detail))
}

struct Runner<'a> {
    skip: &'a [String],
    records: Vec<StageRecord>,
    failed: Option<String>,
}

impl Runner<'_> {
    /// Runs a stage unless skipped or a previous stage failed. Returns the
    /// pass flag when it ran.
    fn stage<F>(&mut self, name: &str, f: F) -> Option<bool>
    where
        F: FnOnce() -> Result<(bool, Option<String>)>,
    {
        if self.skip.iter().any(|s| s == name) {
            self.push(name, StageStatus::Skipped, None);
            return None;
        }
        if self.failed.is_some() {
            self.push(name, StageStatus::NotRun, None);
            return None;
        }
        let (ok, msg) = match f() {
            Ok(r) => r,
            Err(e) => (false, Some(e.to_string())),
        };
        if ok {
            self.push(name, StageStatus::Passed, msg);
        } else {
            self.failed = Some(name.to_string());
            self.push(name, StageStatus::Failed, msg);
        }
        Some(ok)
    }

    fn not_run(&mut self, name: &str) {
        let status = if self.skip.iter().any(|s| s == name) {
            StageStatus::Skipped
        } else {
            StageStatus::NotRun
        };
        self.push(name, status, None);
    }

    fn not_applicable(&mut self, name: &str) {
        self.push(name, StageStatus::NotApplicable, None);
    }

    fn push(&mut self, name: &str, status: StageStatus, message: Option<String>) {
        self.records.push(StageRecord {
            stage: name.to_string(),
            status,
            message,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub samples: usize,
    pub collar_identity_residual: f64,
    pub nonsingular: NonsingularReport,
    pub singular_set: SingularSetReport,
    pub fibers: FiberSuiteReport,
    pub collar: CollarReport,
}

impl VerifyReport {
    pub fn failed_check(&self) -> Option<&'static str> {
        [
            ("nonsingular", self.nonsingular.passed),
            ("singular_set", self.singular_set.passed),
            ("fibers", self.fibers.passed),
            ("collar", self.collar.passed),
        ]
        .into_iter()
        .find(|(_, ok)| !ok)
        .map(|(n, _)| n)
    }
}

/// Non-singularity, singular set, fibers and collar in one report.
pub fn verify(h: &Hypersurface, samples: usize, seed: u64) -> Result<VerifyReport> {
    let s = sample_manifold(h, samples, seed)?;
    let nonsingular = verify_nonsingular(h, &s, None);
    let singular_set = singular_set_check(h, SINGULAR_SET_TOL)?;
    let fibers = fiber_suite(h, FIBER_GRID_CELLS, FIBER_BOUNDARY_POINTS)?;
    let collar = collar_model_check(h, default_band(h))?;
    let passed = nonsingular.passed && singular_set.passed && fibers.passed && collar.passed;
    Ok(VerifyReport {
        passed,
        samples: s.len(),
        collar_identity_residual: collar_identity_residual(h, &s),
        nonsingular,
        singular_set,
        fibers,
        collar,
    })
}

/// Reads comma-separated sample points, one per line. Blank lines and lines
/// starting with `#` are ignored.
pub fn read_samples_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("'{}': {e}", f.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = out.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {first} coordinates, got {}", row.len()),
                });
            }
        }
        out.push(row);
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "sgm", version, about = "Build and verify special generic hypersurfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Job config document
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Omit the generation time from reports
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify the region
    Certify,
    /// Write the defining polynomial document
    Construct,
    /// Non-singularity, singular set, fibers and collar
    Verify {
        /// Use this hypersurface document instead of building one
        #[arg(long)]
        hypersurface: Option<PathBuf>,
    },
    /// Extract the zero set (n + k ≤ 3) and check its topology
    Mesh,
    /// Poincaré–Reeb graph of a planar region
    Reeb,
    /// Fit an implicit polynomial to boundary samples
    Fit {
        /// CSV file with one point per line
        csv: PathBuf,
        #[arg(long, default_value_t = 2)]
        degree: u32,
    },
    /// Run every stage
    Full {
        /// Stage to skip (repeatable)
        #[arg(long = "skip-stage")]
        skip_stage: Vec<String>,
    },
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Fail = 1,
    Usage = 2,
}

/// Parses `args` and runs the command.
pub fn main_with_args<I, S>(args: I) -> Exit
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { Exit::Usage } else { Exit::Pass };
        }
    };
    match run_command(&cli) {
        Ok(Outcome::Pass(msg)) => {
            println!("{msg}");
            Exit::Pass
        }
        Ok(Outcome::Fail { stage, message }) => {
            eprintln!("FAILED at stage {stage}: {message}");
            Exit::Fail
        }
        Err(e) => {
            eprintln!("error: {e}");
            Exit::Usage
        }
    }
}

enum Outcome {
    Pass(String),
    Fail { stage: String, message: String },
}

fn fail(stage: &str, message: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome::Fail {
        stage: stage.into(),
        message: message.into(),
    })
}

fn load_job(cli: &Cli) -> Result<Job> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--config is required for this command".into()))?;
    Job::load(path, &cli.overrides)
}

/// Builds the hypersurface; a certification or validation failure is a
/// verification outcome, not a usage error.
fn build_or_fail(job: &Job) -> Result<std::result::Result<Hypersurface, Outcome>> {
    match job.build() {
        Ok(h) => Ok(Ok(h)),
        Err(e @ Error::Uncertified(_)) => Ok(Err(Outcome::Fail {
            stage: "certify".into(),
            message: e.to_string(),
        })),
        Err(e @ Error::InvalidVerticalSpec { .. }) => Ok(Err(Outcome::Fail {
            stage: "validate".into(),
            message: e.to_string(),
        })),
        Err(e @ Error::EmptyInterior(_)) => Ok(Err(Outcome::Fail {
            stage: "construct".into(),
            message: e.to_string(),
        })),
        Err(e) => Err(e),
    }
}

fn run_command(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Certify => {
            let job = load_job(cli)?;
            std::fs::create_dir_all(&job.out)?;
            let cert = job.region.certify_with(job.require_margin);
            write_document(&job.out.join("certificate.json"), &cert)?;
            if cert.passed {
                Ok(Outcome::Pass("certify: passed".into()))
            } else {
                fail("certify", first_failed_check(&cert).unwrap_or_default())
            }
        }
        Command::Construct => {
            let job = load_job(cli)?;
            let h = match build_or_fail(&job)? {
                Ok(h) => h,
                Err(o) => return Ok(o),
            };
            std::fs::create_dir_all(&job.out)?;
            write_document(&job.out.join("hypersurface.json"), &h)?;
            std::fs::write(job.out.join("poly.txt"), h.poly().to_text())?;
            Ok(Outcome::Pass(format!("construct: T = {:?}, degree {}", h.t(), h.poly().degree())))
        }
        Command::Verify { hypersurface } => {
            let (h, samples, seed, out) = match hypersurface {
                Some(path) => {
                    let h: Hypersurface = read_json(path)?;
                    let ov = &cli.overrides;
                    let out = ov.out.clone().unwrap_or_else(|| PathBuf::from("sgm-out"));
                    (h, ov.samples.unwrap_or(DEFAULT_SAMPLES), ov.seed.unwrap_or(0), out)
                }
                None => {
                    let job = load_job(cli)?;
                    match build_or_fail(&job)? {
                        Ok(h) => (h, job.samples, job.seed, job.out),
                        Err(o) => return Ok(o),
                    }
                }
            };
            let rep = match verify(&h, samples, seed) {
                Ok(r) => r,
                Err(e @ Error::LowYield { .. }) => return fail("sample", e.to_string()),
                Err(e) => return Err(e),
            };
            std::fs::create_dir_all(&out)?;
            write_document(&out.join("verify.json"), &rep)?;
            match rep.failed_check() {
                None => Ok(Outcome::Pass("verify: passed".into())),
                Some(stage) => fail(stage, "see verify.json"),
            }
        }
        Command::Mesh => {
            let job = load_job(cli)?;
            let h = match build_or_fail(&job)? {
                Ok(h) => h,
                Err(o) => return Ok(o),
            };
            let (m, st) = match mesh_stage(&h, job.mesh_res) {
                Ok(r) => r,
                Err(e @ Error::NotSupported(_)) => return Err(e),
                Err(e) => return fail("mesh", e.to_string()),
            };
            std::fs::create_dir_all(&job.out)?;
            if m.dim == 3 {
                mesh::export_obj(&m, &job.out.join("mesh.obj"))?;
            }
            write_document(&job.out.join("mesh_summary.json"), &st.summary)?;
            if st.passed {
                Ok(Outcome::Pass(format!(
                    "mesh: euler {} components {}",
                    st.summary.euler, st.summary.components
                )))
            } else {
                fail(
                    "mesh",
                    format!(
                        "euler {} components {}, expected {} and {}",
                        st.summary.euler, st.summary.components, st.expected_euler, st.expected_components
                    ),
                )
            }
        }
        Command::Reeb => {
            let job = load_job(cli)?;
            if job.region.dim() != 2 {
                return Err(Error::NotSupported("reeb needs a planar region".into()));
            }
            let cert = job.region.certify_with(job.require_margin);
            if !cert.passed {
                return fail("certify", first_failed_check(&cert).unwrap_or_default());
            }
            let st = match reeb_stage(&job.region, job.sweep_res, job.sweep_angle) {
                Ok(s) => s,
                Err(e) => return fail("reeb", e.to_string()),
            };
            std::fs::create_dir_all(&job.out)?;
            reeb::export_dot(&st.graph, &job.out.join("reeb.dot"))?;
            write_document(&job.out.join("reeb.json"), &st.graph)?;
            if st.passed {
                let (v, e, b) = st.graph.shape();
                Ok(Outcome::Pass(format!("reeb: vertices {v} edges {e} betti1 {b}")))
            } else {
                fail("reeb", format!("betti1 {}, expected {}", st.graph.betti1, st.expected_betti1))
            }
        }
        Command::Fit { csv, degree } => {
            let text = std::fs::read_to_string(csv)?;
            let samples = read_samples_csv(&text)?;
            let rep: FitReport = fit_boundary(&samples, *degree)?;
            let out = cli.overrides.out.clone().unwrap_or_else(|| PathBuf::from("sgm-out"));
            std::fs::create_dir_all(&out)?;
            write_document(&out.join("fit.json"), &rep)?;
            Ok(Outcome::Pass(format!("fit: rms residual {:e}", rep.rms_residual)))
        }
        Command::Full { skip_stage } => {
            let job = load_job(cli)?;
            let rep = run_full(&job, skip_stage, true, !cli.no_timestamp)?;
            match &rep.verdict {
                Verdict::Failed(stage) => {
                    let msg = rep
                        .stages
                        .iter()
                        .find(|r| &r.stage == stage)
                        .and_then(|r| r.message.clone())
                        .unwrap_or_default();
                    fail(stage, msg)
                }
                v => Ok(Outcome::Pass(format!("full: {v:?}"))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parsing() {
        let pts = read_samples_csv("# x,y\n1, 2\n\n3,4\n").unwrap();
        assert_eq!(pts, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(matches!(read_samples_csv("1,2\n3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(read_samples_csv("1,x\n").is_err());
    }

    #[test]
    fn euler_expectation() {
        assert_eq!(expected_euler(2, 1), 2);
        assert_eq!(expected_euler(2, -1), -2);
        assert_eq!(expected_euler(3, 1), 0);
    }

    #[test]
    fn config_requires_k() {
        let cfg: JobConfig = serde_json::from_str(r#"{"region": "disk.json"}"#).unwrap();
        assert!(matches!(cfg.region, DocRef::Path(_)));
        assert!(Job::from_config(&cfg, Path::new("/nonexistent"), &Overrides::default()).is_err());
        assert!(serde_json::from_str::<JobConfig>(r#"{"region": "a", "bogus": 1}"#).is_err());
    }

    #[test]
    fn inline_region_job() {
        let region = serde_json::to_value(crate::shapes::disk()).unwrap();
        let cfg: JobConfig = serde_json::from_value(serde_json::json!({"region": region, "k": 1})).unwrap();
        let job = Job::from_config(&cfg, Path::new("."), &Overrides::default()).unwrap();
        assert_eq!((job.k, job.mesh_res, job.samples), (1, DEFAULT_MESH_RES, DEFAULT_SAMPLES));
        let rep = run_full(&job, &["mesh".to_string()], false, false).unwrap();
        assert_eq!(rep.verdict, Verdict::Unverified);
        assert!(run_full(&job, &["nope".to_string()], false, false).is_err());
    }
}
