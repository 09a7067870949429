//! The `ppt` experiment runner.
//!
//! Every command writes a provenance header (library version, command,
//! a hash of the resolved configuration and the seed) followed by its data,
//! as CSV for series and JSON for scalar reports. Given the same inputs the
//! output is byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::cache::{self, FeketeCache};
use crate::error::{PptError, Result};
use crate::extremal::{self, ExtremalOptions};
use crate::fekete::{extrapolate_delta, fekete_measure, DeltaEstimate, FeketeOptions, FeketeSet};
use crate::functionals::{self, SearchOptions, WeightFamily};
use crate::measure::{exponents_up_to, GridMeasure, MomentSet};
use crate::mesh::WeightedMesh;
use crate::polytope::{BodyConstants, ConvexBody, MonomialBasis};
use crate::sampler::{self, SamplerOptions};
use crate::VERSION;

#[derive(Debug, Parser)]
#[command(name = "ppt", version, about = "Weighted Fekete points, transfinite diameters and Vandermonde ensembles")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Fekete cache directory.
    #[arg(long, global = true, env = "PPT_CACHE")]
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    /// Disable the Fekete cache.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub no_cache: bool,
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cap on enumerated tuples for exact computations.
    #[arg(long, global = true, env = "PPT_BUDGET", default_value_t = sampler::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Body, mesh and weight shared by most commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Setup {
    /// Body JSON file, or `simplex:d` / `cube:d`.
    #[arg(long, default_value = "simplex:1")]
    pub body: String,
    /// Mesh CSV file, or `cheb:a:b:m`, `unif:a:b:m`, `chebsq:a:b:m`.
    #[arg(long)]
    pub mesh: Option<String>,
    /// Weight `Q`: `zero`, `const:c`, `poly:c0,c1,...` (replaces the mesh column).
    #[arg(long)]
    pub weight: Option<String>,
    /// Largest `n` used to extrapolate the body constants.
    #[arg(long, default_value_t = 40)]
    pub const_n_max: u32,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Convex body data.
    Body(BodyCmd),
    /// Transfinite diameter estimates over a range of n.
    Delta(DeltaCmd),
    /// One Fekete configuration.
    Fekete(FeketeCmd),
    /// Lower bounds for the weighted extremal function.
    Extremal(ExtremalCmd),
    /// Energies from transfinite diameters, with a Gateaux derivative check.
    Energy(EnergyCmd),
    /// Exact partition function by enumeration.
    Znorm(ZnormCmd),
    /// Metropolis samples of the Vandermonde ensemble.
    Sample(SampleCmd),
    /// Rate-function lower bound for a measure.
    Rate(RateCmd),
    /// The Lambda functional of a weight perturbation.
    Lambda(LambdaCmd),
    /// Moment distance between chain and Fekete measures versus n.
    Converge(ConvergeCmd),
    /// Event probabilities versus n and the fitted decay rate.
    Ldp(LdpCmd),
}

#[derive(Debug, Args, Serialize)]
pub struct BodyCmd {
    /// Body JSON file, or `simplex:d` / `cube:d`.
    #[arg(long, default_value = "simplex:1")]
    pub spec: String,
    #[command(subcommand)]
    pub action: BodyAction,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum BodyAction {
    /// Table of d_n, l_n, f_n with γ_d, A and b_d.
    Info {
        #[arg(long, default_value_t = 20)]
        n_max: u32,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct Output {
    /// Output file (default: stdout).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DeltaCmd {
    #[command(flatten)]
    pub setup: Setup,
    /// `a..b`, `a..b:step` or a comma list.
    #[arg(long, default_value = "1..10")]
    pub n: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct FeketeCmd {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long)]
    pub n: u32,
    /// Write the points as CSV here; a JSON summary goes to `--out`.
    #[arg(long)]
    pub dump_points: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtremalCmd {
    #[command(flatten)]
    pub setup: Setup,
    /// Evaluation points: `1.5,2,3` in d=1, `x,y;x,y` otherwise.
    #[arg(long)]
    pub z: String,
    #[arg(long)]
    pub n: u32,
    /// Skip the linear-programming competitor.
    #[arg(long)]
    pub lagrange_only: bool,
    /// Report the off-mesh admissibility violation on a 4x refined mesh (d=1).
    #[arg(long)]
    pub audit: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct EnergyCmd {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long, default_value = "2..20:2")]
    pub n: String,
    /// Gateaux direction as a weight spec.
    #[arg(long, default_value = "poly:0,0,1")]
    pub direction: String,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    /// Constant for the translation check.
    #[arg(long, default_value_t = 0.5)]
    pub shift: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct ZnormCmd {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long)]
    pub n: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleCmd {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Retained samples per chain.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub thin: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct RateCmd {
    #[command(flatten)]
    pub setup: Setup,
    /// Measure CSV (`x..., mass`), or `fekete` / `nu`.
    #[arg(long, default_value = "fekete")]
    pub measure: String,
    /// Weight family, e.g. `q,cheb:4,box:2`.
    #[arg(long, default_value = "q,cheb:4,box:2")]
    pub family: String,
    #[arg(long, default_value_t = 20)]
    pub n_max: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct LambdaCmd {
    #[command(flatten)]
    pub setup: Setup,
    /// Perturbation: CSV of `x..., v` rows on the mesh, or a weight spec.
    #[arg(long)]
    pub v: String,
    #[arg(long, default_value_t = 20)]
    pub n_max: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergeCmd {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long, default_value = "5..30:5")]
    pub n: String,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Highest moment order compared.
    #[arg(long, default_value_t = 4)]
    pub moments: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct LdpCmd {
    #[command(flatten)]
    pub setup: Setup,
    /// Event as moment constraints, e.g. `1:0.3:inf`.
    #[arg(long)]
    pub event: String,
    #[arg(long, default_value = "1..3")]
    pub n: String,
    /// Measure in the event for the rate comparison (CSV or `nu`).
    #[arg(long)]
    pub representative: Option<String>,
    #[arg(long, default_value = "q,cheb:4,box:2")]
    pub family: String,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[command(flatten)]
    pub output: Output,
}

/// Parses and runs the command line; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ppt: {e}");
            1
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.global.threads {
        // a second call in one process keeps the first pool, which is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Body(c) => body_info(cli, c),
        Command::Delta(c) => delta(cli, c),
        Command::Fekete(c) => fekete(cli, c),
        Command::Extremal(c) => extremal(cli, c),
        Command::Energy(c) => energy(cli, c),
        Command::Znorm(c) => znorm(cli, c),
        Command::Sample(c) => sample(cli, c),
        Command::Rate(c) => rate(cli, c),
        Command::Lambda(c) => lambda(cli, c),
        Command::Converge(c) => converge(cli, c),
        Command::Ldp(c) => ldp(cli, c),
    }
}

/// `simplex:d`, `cube:d` or a JSON file.
pub fn parse_body(spec: &str) -> Result<ConvexBody> {
    if let Some(d) = spec.strip_prefix("simplex:") {
        return Ok(ConvexBody::simplex(parse_num(d, "dimension")?));
    }
    if let Some(d) = spec.strip_prefix("cube:") {
        return Ok(ConvexBody::unit_cube(parse_num(d, "dimension")?));
    }
    ConvexBody::from_json(&fs::read_to_string(spec)?)
}

/// `cheb:a:b:m`, `unif:a:b:m`, `chebsq:a:b:m` or a CSV file.
pub fn parse_mesh(spec: &str) -> Result<WeightedMesh> {
    let builtin = |rest: &str| -> Result<(f64, f64, usize)> {
        let f: Vec<&str> = rest.split(':').collect();
        if f.len() != 3 {
            return Err(PptError::Parse(format!("mesh spec {spec:?} needs a:b:m")));
        }
        Ok((parse_num(f[0], "a")?, parse_num(f[1], "b")?, parse_num(f[2], "m")?))
    };
    if let Some(rest) = spec.strip_prefix("chebsq:") {
        let (a, b, m) = builtin(rest)?;
        return WeightedMesh::chebyshev_square(a, b, m);
    }
    if let Some(rest) = spec.strip_prefix("cheb:") {
        let (a, b, m) = builtin(rest)?;
        return WeightedMesh::chebyshev_interval(a, b, m);
    }
    if let Some(rest) = spec.strip_prefix("unif:") {
        let (a, b, m) = builtin(rest)?;
        return WeightedMesh::uniform_interval(a, b, m);
    }
    WeightedMesh::read_csv(std::path::Path::new(spec))
}

/// `zero`, `const:c` or `poly:c0,c1,...` meaning `c0 + Σ_i c_i Σ_j x_j^i`.
pub fn parse_weight(spec: &str) -> Result<Box<dyn Fn(&[f64]) -> f64 + Send + Sync>> {
    if spec == "zero" {
        return Ok(Box::new(|_| 0.0));
    }
    if let Some(c) = spec.strip_prefix("const:") {
        let c: f64 = parse_num(c, "constant")?;
        return Ok(Box::new(move |_| c));
    }
    if let Some(cs) = spec.strip_prefix("poly:") {
        let coeffs: Vec<f64> = cs
            .split(',')
            .map(|c| parse_num(c.trim(), "coefficient"))
            .collect::<Result<_>>()?;
        return Ok(Box::new(move |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        *c
                    } else {
                        c * x.iter().map(|v| v.powi(i as i32)).sum::<f64>()
                    }
                })
                .sum()
        }));
    }
    Err(PptError::Parse(format!("unknown weight spec {spec:?}")))
}

/// `a..b`, `a..b:step` or `a,b,c`; the result is strictly increasing.
pub fn parse_n_list(spec: &str) -> Result<Vec<u32>> {
    let list: Vec<u32> = if let Some((a, rest)) = spec.split_once("..") {
        let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let (a, b, step): (u32, u32, u32) = (parse_num(a, "n")?, parse_num(b, "n")?, parse_num(step, "step")?);
        if step == 0 {
            return Err(PptError::Parse("step must be positive".into()));
        }
        (a..=b).step_by(step as usize).collect()
    } else {
        spec.split(',').map(|s| parse_num(s.trim(), "n")).collect::<Result<_>>()?
    };
    if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) || list[0] == 0 {
        return Err(PptError::Parse(format!("n list {spec:?} must be nonempty, positive and increasing")));
    }
    Ok(list)
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| PptError::Parse(format!("bad {what}: {s:?}")))
}

fn parse_points(spec: &str, dim: usize) -> Result<Vec<Vec<f64>>> {
    let pts: Vec<Vec<f64>> = if dim == 1 {
        spec.split(',').map(|s| Ok(vec![parse_num(s, "z")?])).collect::<Result<_>>()?
    } else {
        spec.split(';')
            .map(|p| p.split(',').map(|s| parse_num(s, "z")).collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?
    };
    if let Some(p) = pts.iter().find(|p| p.len() != dim) {
        return Err(PptError::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    Ok(pts)
}

/// Resolved inputs of one run.
struct Context {
    body: ConvexBody,
    mesh: WeightedMesh,
    weight: Option<Box<dyn Fn(&[f64]) -> f64 + Send + Sync>>,
    cache: Option<FeketeCache>,
    const_n_max: u32,
}

impl Context {
    fn new(cli: &Cli, setup: &Setup) -> Result<Self> {
        let body = parse_body(&setup.body)?;
        let mesh_spec = match &setup.mesh {
            Some(s) => s.clone(),
            None if body.dim() == 1 => "cheb:-1:1:401".into(),
            None if body.dim() == 2 => "chebsq:-1:1:41".into(),
            None => {
                return Err(PptError::UnsupportedDimension {
                    dim: body.dim(),
                    reason: "no default mesh, pass --mesh",
                })
            }
        };
        let mut mesh = parse_mesh(&mesh_spec)?;
        if mesh.dim() != body.dim() {
            return Err(PptError::DimensionMismatch {
                expected: body.dim(),
                got: mesh.dim(),
            });
        }
        let weight = match &setup.weight {
            Some(w) => {
                let f = parse_weight(w)?;
                mesh = mesh.with_weight(&f)?;
                Some(f)
            }
            None => None,
        };
        let cache = if cli.global.no_cache {
            None
        } else {
            Some(FeketeCache::new(cli.global.cache_dir.clone().unwrap_or_else(cache::default_dir)))
        };
        Ok(Context {
            body,
            mesh,
            weight,
            cache,
            const_n_max: setup.const_n_max,
        })
    }

    fn basis(&self, n: u32) -> Result<MonomialBasis> {
        self.body.lattice_points(n)
    }

    fn fekete_on(&self, mesh: &WeightedMesh, basis: &MonomialBasis) -> Result<FeketeSet> {
        let opts = FeketeOptions::default();
        match &self.cache {
            Some(c) => c.fekete(mesh, basis, &opts),
            None => crate::fekete::fekete_points(mesh, basis, &opts),
        }
    }

    fn fekete(&self, basis: &MonomialBasis) -> Result<FeketeSet> {
        self.fekete_on(&self.mesh, basis)
    }

    fn constants(&self) -> Result<BodyConstants> {
        self.body.constants(self.const_n_max)
    }
}

/// Provenance header plus data, written to a file or stdout.
struct Report {
    command: &'static str,
    hash: String,
    seed: u64,
}

impl Report {
    fn new(command: &'static str, cli: &Cli, args: &impl Serialize, ctx: Option<&Context>) -> Result<Self> {
        let material = json!({
            "command": command,
            "global": &cli.global,
            "args": args,
            "body": ctx.map(|c| c.body.spec()),
            "mesh": ctx.map(|c| c.mesh.fingerprint()),
        });
        let hash = hex::encode(Sha256::digest(serde_json::to_vec(&material)?));
        Ok(Report {
            command,
            hash,
            seed: cli.global.seed,
        })
    }

    fn csv_header(&self) -> String {
        format!(
            "# ppt {VERSION}\n# command: {}\n# config: {}\n# seed: {}\n",
            self.command, self.hash, self.seed
        )
    }

    fn write_csv(&self, out: &Option<PathBuf>, body: &str) -> Result<()> {
        emit(out, &format!("{}{body}", self.csv_header()))
    }

    fn write_json(&self, out: &Option<PathBuf>, data: serde_json::Value) -> Result<()> {
        let doc = json!({
            "ppt": VERSION,
            "command": self.command,
            "config": self.hash,
            "seed": self.seed,
            "data": data,
        });
        emit(out, &(serde_json::to_string_pretty(&doc)? + "\n"))
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Fixed-precision float formatting for stable CSV.
fn f(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else if x > 0.0 {
        "inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

fn body_info(cli: &Cli, c: &BodyCmd) -> Result<()> {
    let body = parse_body(&c.spec)?;
    let BodyAction::Info { n_max } = c.action;
    let k = body.constants(n_max)?;
    let report = Report::new("body info", cli, c, None)?;
    let mut s = String::from("n,d_n,l_n,f_n,f_n_exact,gamma_d,a,a_raw,b_d,converged\n");
    for t in &k.f_n_sequence {
        writeln!(
            s,
            "{},{},{},{},{}/{},{},{},{},{},{}",
            t.n,
            t.d_n,
            t.l_n,
            f(t.f_n),
            t.f_n_num,
            t.f_n_den,
            f(k.gamma_d),
            f(k.a),
            f(k.a_raw),
            f(k.b_d),
            k.converged
        )
        .unwrap();
    }
    report.write_csv(&None, &s)
}

fn delta(cli: &Cli, c: &DeltaCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("delta", cli, c, Some(&ctx))?;
    let mut rows = Vec::new();
    let mut s = String::from("n,d_n,l_n,log_w,delta_hat,converged,passes\n");
    for n in parse_n_list(&c.n)? {
        let e = DeltaEstimate::from_fekete(ctx.fekete(&ctx.basis(n)?)?);
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            e.n,
            e.d_n,
            e.l_n,
            f(e.log_w),
            f(e.delta_hat),
            e.converged,
            e.fekete.passes
        )
        .unwrap();
        rows.push(e);
    }
    if let Some(x) = extrapolate_delta(&rows) {
        writeln!(s, "# extrapolated delta (diagnostic fit): {}", f(x)).unwrap();
    }
    report.write_csv(&c.output.out, &s)
}

fn fekete(cli: &Cli, c: &FeketeCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("fekete", cli, c, Some(&ctx))?;
    let set = ctx.fekete(&ctx.basis(c.n)?)?;
    if let Some(path) = &c.dump_points {
        let dim = ctx.mesh.dim();
        let mut s = String::new();
        let cols: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        writeln!(s, "{},q,mesh_index", cols.join(",")).unwrap();
        for (p, k) in set.config.points.iter().zip(set.indices()) {
            let xs: Vec<String> = p.iter().map(|v| f(*v)).collect();
            writeln!(s, "{},{},{}", xs.join(","), f(ctx.mesh.q()[*k]), k).unwrap();
        }
        report.write_csv(&Some(path.clone()), &s)?;
    }
    let e = DeltaEstimate::from_fekete(set);
    report.write_json(
        &c.output.out,
        json!({
            "n": e.n,
            "d_n": e.d_n,
            "l_n": e.l_n,
            "log_w": e.log_w,
            "delta_hat": e.delta_hat,
            "passes": e.fekete.passes,
            "converged": e.converged,
            "bound": "lower",
        }),
    )
}

/// `m` points between each pair of consecutive sorted mesh points (d=1).
fn refine(mesh: &WeightedMesh, factor: usize) -> Vec<Vec<f64>> {
    let mut xs: Vec<f64> = mesh.points().iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(xs.len() * factor);
    for w in xs.windows(2) {
        for t in 0..factor {
            out.push(vec![w[0] + (w[1] - w[0]) * t as f64 / factor as f64]);
        }
    }
    if let Some(last) = xs.last() {
        out.push(vec![*last]);
    }
    out
}

/// Linear interpolation of the mesh weight in d=1.
fn interpolate_q(mesh: &WeightedMesh, x: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = mesh.points().iter().map(|p| p[0]).zip(mesh.q().iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    match pts.iter().position(|p| p.0 >= x) {
        Some(0) => pts[0].1,
        None => pts[pts.len() - 1].1,
        Some(i) => {
            let (x0, q0) = pts[i - 1];
            let (x1, q1) = pts[i];
            if x1 == x0 {
                q1
            } else {
                q0 + (q1 - q0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

fn extremal(cli: &Cli, c: &ExtremalCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("extremal", cli, c, Some(&ctx))?;
    let basis = ctx.basis(c.n)?;
    let set = ctx.fekete(&basis)?;
    let opts = ExtremalOptions {
        use_lp: !c.lagrange_only,
    };
    let dim = ctx.mesh.dim();
    let cols: Vec<String> = (1..=dim).map(|i| format!("z{i}")).collect();
    let mut s = format!("{},n,u_n,lagrange,lp,h_p,bound\n", cols.join(","));
    for z in parse_points(&c.z, dim)? {
        let e = extremal::extremal_lower(&z, &set.config, &ctx.mesh, &opts)?;
        let zc: Vec<num_complex::Complex64> = z.iter().map(|v| num_complex::Complex64::new(*v, 0.0)).collect();
        let hp = ctx.body.h_p(&zc)?;
        let zs: Vec<String> = z.iter().map(|v| f(*v)).collect();
        writeln!(
            s,
            "{},{},{},{},{},{},lower",
            zs.join(","),
            c.n,
            f(e.value),
            f(e.lagrange_value),
            e.lp_value.map_or("".into(), f),
            f(hp)
        )
        .unwrap();
    }
    if c.audit {
        if dim != 1 {
            return Err(PptError::UnsupportedDimension {
                dim,
                reason: "the refined audit mesh is one-dimensional",
            });
        }
        let pts = refine(&ctx.mesh, 4);
        let q = |x: &[f64]| match &ctx.weight {
            Some(w) => w(x),
            None => interpolate_q(&ctx.mesh, x[0]),
        };
        let a = extremal::audit_lagrange(&set.config, &pts, &q)?;
        writeln!(
            s,
            "# audit: max (u_n - Q) over {} refined points = {} at x = {}",
            a.points_checked,
            f(a.max_violation),
            a.worst_point.first().map_or("".into(), |v| f(*v))
        )
        .unwrap();
    }
    report.write_csv(&c.output.out, &s)
}

fn energy(cli: &Cli, c: &EnergyCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("energy", cli, c, Some(&ctx))?;
    let consts = ctx.constants()?;
    let dir = parse_weight(&c.direction)?;
    let u: Vec<f64> = ctx.mesh.points().iter().map(|x| dir(x)).collect();
    let shifted = ctx.mesh.with_q(ctx.mesh.q().iter().map(|q| q + c.shift).collect())?;
    let mut s = String::from(
        "n,l_n,delta_hat,energy,energy_shifted,shift_expected,gateaux_derivative,gateaux_integral,gateaux_discrepancy\n",
    );
    for n in parse_n_list(&c.n)? {
        let basis = ctx.basis(n)?;
        let e = DeltaEstimate::from_fekete(ctx.fekete(&basis)?);
        let es = DeltaEstimate::from_fekete(ctx.fekete_on(&shifted, &basis)?);
        let energy = extremal::energy_via_rumely(&e, &consts);
        let energy_shifted = extremal::energy_via_rumely(&es, &consts);
        let expected = c.shift * (n as f64 * basis.d_n as f64 / basis.l_n as f64) / consts.b_d;
        let g = extremal::gateaux_check(&ctx.mesh, &basis, &u, &[-c.h, c.h], &consts, &FeketeOptions::default())?;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            n,
            basis.l_n,
            f(e.delta_hat),
            f(energy),
            f(energy_shifted),
            f(expected),
            f(g.rows[0].derivative),
            f(g.integral),
            f(g.discrepancy)
        )
        .unwrap();
    }
    writeln!(s, "# gamma_d = {}, b_d = {}, A = {}", f(consts.gamma_d), f(consts.b_d), f(consts.a)).unwrap();
    report.write_csv(&c.output.out, &s)
}

fn znorm(cli: &Cli, c: &ZnormCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("znorm", cli, c, Some(&ctx))?;
    let basis = ctx.basis(c.n)?;
    let log_z = sampler::brute_force_log_z(&ctx.mesh, &basis, cli.global.budget)?;
    let e = DeltaEstimate::from_fekete(ctx.fekete(&basis)?);
    let root = log_z / (2.0 * basis.l_n as f64);
    report.write_json(
        &c.output.out,
        json!({
            "n": c.n,
            "d_n": basis.d_n,
            "l_n": basis.l_n,
            "tuples": (ctx.mesh.len() as f64).powi(basis.d_n as i32),
            "log_z": log_z,
            "z": log_z.exp(),
            "log_z_root": root,
            "log_delta_hat": e.log_delta(),
            "root_below_delta": root <= e.log_delta() + 1e-9,
            "bound": "exact",
        }),
    )
}

fn sample(cli: &Cli, c: &SampleCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("sample", cli, c, Some(&ctx))?;
    let basis = ctx.basis(c.n)?;
    let opts = SamplerOptions {
        chains: c.chains,
        steps: c.steps,
        seed: cli.global.seed,
        burn_in: c.burn_in,
        thin: c.thin,
    };
    let smp = sampler::mcmc_sample(&ctx.mesh, &basis, &opts)?;
    let dim = ctx.mesh.dim();
    let mut names = Vec::new();
    for j in 1..=basis.d_n {
        if dim == 1 {
            names.push(format!("p{j}"));
        } else {
            names.extend((1..=dim).map(|i| format!("p{j}_x{i}")));
        }
    }
    let mut s = format!("chain,step,{},log_wvdm\n", names.join(","));
    for r in &smp.records {
        let coords: Vec<String> = r
            .indices
            .iter()
            .flat_map(|&k| ctx.mesh.point(k).iter().map(|v| f(*v)))
            .collect();
        writeln!(s, "{},{},{},{}", r.chain, r.step, coords.join(","), f(r.log_wvdm)).unwrap();
    }
    for m in &smp.chain_meta {
        writeln!(
            s,
            "# chain {}: acceptance {} over {} proposals, burn-in {}, thin {}",
            m.chain,
            f(m.acceptance_rate),
            m.proposals,
            m.burn_in,
            m.thin
        )
        .unwrap();
    }
    if smp.low_acceptance {
        writeln!(s, "# warning: acceptance below {} in some chain", sampler::MIN_ACCEPTANCE).unwrap();
        eprintln!("ppt: warning: a chain accepted fewer than 0.1% of proposals");
    }
    report.write_csv(&c.output.out, &s)
}

/// `fekete`, `nu` or a measure CSV, with total mass `γ_d`.
fn load_measure(spec: &str, ctx: &Context, basis: &MonomialBasis, gamma: f64) -> Result<GridMeasure> {
    match spec {
        "fekete" => Ok(fekete_measure(&ctx.fekete(basis)?.config, gamma)),
        "nu" => Ok(GridMeasure::from_mesh_masses(&ctx.mesh, ctx.mesh.nu())?.normalized(gamma)),
        path => {
            let mu = GridMeasure::from_csv(&fs::read_to_string(path)?)?;
            if !mu.has_mass(gamma) {
                return Err(PptError::InvalidArgument(format!(
                    "measure in {path} has mass {}, expected γ_d = {gamma}",
                    mu.total()
                )));
            }
            Ok(mu)
        }
    }
}

fn rate(cli: &Cli, c: &RateCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("rate", cli, c, Some(&ctx))?;
    let consts = ctx.constants()?;
    let basis = ctx.basis(c.n_max)?;
    let mu = load_measure(&c.measure, &ctx, &basis, consts.gamma_d)?;
    let family = WeightFamily::parse(&c.family, &ctx.mesh)?;
    let opts = SearchOptions::default();
    let r = functionals::rate_function(&mu, &ctx.mesh, &basis, &family, &consts, &opts)?;
    let legendre = if (consts.gamma_d - 1.0).abs() < 1e-12 {
        Some(functionals::legendre_rate(&mu, &ctx.mesh, &basis, &family, &consts, &opts)?)
    } else {
        None
    };
    report.write_json(
        &c.output.out,
        json!({
            "n": r.n,
            "log_delta_q": r.log_delta_q,
            "log_j": r.log_j,
            "log_jq": r.log_jq,
            "i_lower": r.i_lower,
            "e_star": r.e_star,
            "legendre_rate": legendre,
            "integral_q": r.integral_q,
            "family": r.family,
            "best_v": r.best_v,
            "boundary_hit": r.boundary_hit,
            "evaluations": r.evaluations,
        }),
    )
}

fn lambda(cli: &Cli, c: &LambdaCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("lambda", cli, c, Some(&ctx))?;
    let consts = ctx.constants()?;
    let basis = ctx.basis(c.n_max)?;
    let v: Vec<f64> = match parse_weight(&c.v) {
        Ok(w) => ctx.mesh.points().iter().map(|x| w(x)).collect(),
        Err(_) => mesh_values_from_csv(&ctx.mesh, &fs::read_to_string(&c.v)?)?,
    };
    let l = functionals::lambda_functional(&v, &ctx.mesh, &basis, &consts, &FeketeOptions::default())?;
    report.write_json(&c.output.out, json!({ "n": c.n_max, "lambda": l }))
}

/// Rows `x_1..x_d, v` matched to mesh points; every mesh point must appear.
fn mesh_values_from_csv(mesh: &WeightedMesh, text: &str) -> Result<Vec<f64>> {
    let dim = mesh.dim();
    let mut out = vec![f64::NAN; mesh.len()];
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(PptError::Parse(format!("expected {} fields in {line:?}", dim + 1)));
        }
        let Ok(x) = fields[..dim].iter().map(|s| s.trim().parse()).collect::<std::result::Result<Vec<f64>, _>>() else {
            // header row
            continue;
        };
        let k = mesh
            .index_of(&x)
            .ok_or_else(|| PptError::InvalidArgument(format!("{x:?} is not a mesh point")))?;
        out[k] = parse_num(fields[dim], "value")?;
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(PptError::InvalidArgument("perturbation misses some mesh points".into()));
    }
    Ok(out)
}

fn converge(cli: &Cli, c: &ConvergeCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("converge", cli, c, Some(&ctx))?;
    let gamma = ctx.body.gamma_d()?;
    let alphas: Vec<Vec<u32>> = exponents_up_to(ctx.mesh.dim(), c.moments)
        .into_iter()
        .filter(|a| a.iter().any(|&e| e > 0))
        .collect();
    let mut s = String::from("n,moment,empirical,fekete,distance\n");
    let mut worst = Vec::new();
    for n in parse_n_list(&c.n)? {
        let basis = ctx.basis(n)?;
        let fk = fekete_measure(&ctx.fekete(&basis)?.config, gamma);
        let opts = SamplerOptions::new(c.chains, c.steps, cli.global.seed);
        let smp = sampler::mcmc_sample(&ctx.mesh, &basis, &opts)?;
        let emp = sampler::average_measure(&smp, &ctx.mesh, gamma)?;
        let mut w: f64 = 0.0;
        for a in &alphas {
            let (e, k) = (emp.moment(a), fk.moment(a));
            let name: Vec<String> = a.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{},{},{},{},{}", n, name.join("_"), f(e), f(k), f((e - k).abs())).unwrap();
            w = w.max((e - k).abs());
        }
        worst.push(w);
    }
    let monotone = worst.windows(2).all(|p| p[1] <= p[0]);
    writeln!(
        s,
        "# max distance by n: {}; {}",
        worst.iter().map(|v| f(*v)).collect::<Vec<_>>().join(" "),
        if monotone { "nonincreasing" } else { "not monotone" }
    )
    .unwrap();
    report.write_csv(&c.output.out, &s)
}

fn ldp(cli: &Cli, c: &LdpCmd) -> Result<()> {
    let ctx = Context::new(cli, &c.setup)?;
    let report = Report::new("ldp", cli, c, Some(&ctx))?;
    let gamma = ctx.body.gamma_d()?;
    let event = MomentSet::parse(&c.event)?;
    let mut s = String::from("n,two_l_n,log_sigma,method,upper_bound_only,hits,trials\n");
    let mut fit = Vec::new();
    let ns = parse_n_list(&c.n)?;
    for &n in &ns {
        let basis = ctx.basis(n)?;
        let pred = |mu: &GridMeasure| event.contains(mu);
        let p = match sampler::event_log_probability(&ctx.mesh, &basis, gamma, &pred, cli.global.budget, None) {
            Err(PptError::BudgetExceeded { .. }) => {
                let opts = SamplerOptions::new(c.chains, c.steps, cli.global.seed);
                let smp = sampler::mcmc_sample(&ctx.mesh, &basis, &opts)?;
                sampler::event_log_probability(&ctx.mesh, &basis, gamma, &pred, 0, Some(&smp))?
            }
            other => other?,
        };
        let two_l = 2.0 * basis.l_n as f64;
        let (hits, trials) = p.frequency.map_or((String::new(), String::new()), |fr| {
            (fr.hits.to_string(), fr.trials.to_string())
        });
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            n,
            basis.l_n * 2,
            f(p.log_probability),
            serde_json::to_value(p.method)?.as_str().unwrap_or(""),
            p.upper_bound_only,
            hits,
            trials
        )
        .unwrap();
        if p.log_probability.is_finite() && !p.upper_bound_only {
            fit.push((two_l, p.log_probability));
        }
    }
    // least-squares slope of log σ_n against -2 l_n
    if fit.len() >= 2 {
        let k = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / k;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        writeln!(s, "# fitted decay rate: {}", f(-sxy / sxx)).unwrap();
    } else {
        writeln!(s, "# fitted decay rate: unavailable (fewer than two usable n)").unwrap();
    }
    if let Some(rep) = &c.representative {
        let consts = ctx.constants()?;
        let basis = ctx.basis(*ns.last().expect("nonempty"))?;
        let mu = load_measure(rep, &ctx, &basis, gamma)?;
        if !event.contains(&mu) {
            writeln!(s, "# warning: representative measure is not in the event").unwrap();
        }
        let family = WeightFamily::parse(&c.family, &ctx.mesh)?;
        let r = functionals::rate_function(&mu, &ctx.mesh, &basis, &family, &consts, &SearchOptions::default())?;
        writeln!(s, "# representative I_lower (lower bound): {}", f(r.i_lower.value)).unwrap();
    }
    report.write_csv(&c.output.out, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_n_list("2..10:4").unwrap(), vec![2, 6, 10]);
        assert_eq!(parse_n_list("3, 5,9").unwrap(), vec![3, 5, 9]);
        assert!(parse_n_list("5,3").is_err());
        assert!(parse_n_list("0..2").is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(parse_weight("zero").unwrap()(&[3.0]), 0.0);
        assert_eq!(parse_weight("const:1.5").unwrap()(&[3.0]), 1.5);
        let p = parse_weight("poly:1,0,2").unwrap();
        assert_eq!(p(&[3.0]), 19.0);
        assert_eq!(p(&[1.0, 2.0]), 11.0);
        assert!(parse_weight("exp:1").is_err());
    }

    #[test]
    fn builtin_inputs() {
        assert_eq!(parse_body("simplex:2").unwrap().dim(), 2);
        assert_eq!(parse_body("cube:3").unwrap().vertices().len(), 8);
        assert_eq!(parse_mesh("cheb:-1:1:11").unwrap().len(), 11);
        assert_eq!(parse_mesh("chebsq:0:1:5").unwrap().len(), 25);
        assert!(parse_mesh("cheb:1:2").is_err());
        assert_eq!(parse_points("1,2.5", 1).unwrap(), vec![vec![1.0], vec![2.5]]);
        assert_eq!(parse_points("1,2;3,4", 2).unwrap()[1], vec![3.0, 4.0]);
    }

    #[test]
    fn interpolation_and_refinement() {
        let mesh = WeightedMesh::from_points(1, vec![vec![0.0], vec![1.0]], "t")
            .unwrap()
            .with_q(vec![0.0, 2.0])
            .unwrap();
        assert_eq!(interpolate_q(&mesh, 0.25), 0.5);
        assert_eq!(interpolate_q(&mesh, -1.0), 0.0);
        assert_eq!(refine(&mesh, 4).len(), 5);
    }
}
