//! `coposcope`: copositivity certificates for second Symanzik polynomials.
//!
//! Exit codes: 0 copositive interior (or success), 1 not copositive (or a
//! failed verification), 2 undecided, 3 error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use coposcope::decide::{
    banana_discriminant_n3, banana_oracle, bubble_oracle, decide, outer_approx, realize_quadratic, triangle_oracle,
    CertificateJson, DecideConfig, OuterApprox,
};
use coposcope::graph::GraphJson;
use coposcope::landau::{exact_negative_witness, SolverConfig, Witness};
use coposcope::poly::PolyJson;
use coposcope::polya::{find_polya_exponent, PolyaMode, PolyaOutcome};
use coposcope::polytope::{all_faces, convex_hull, f_vector, to_points};
use coposcope::rational::{format_rational, int, parse_rational, to_f64, RatText, Rational};
use coposcope::symanzik::{
    first_symanzik, second_symanzik, second_symanzik_symbolic, support_sets, KinematicParams, KinematicsJson,
};
use coposcope::{library, FeynmanGraph, SparsePoly};

#[derive(Parser, Debug)]
#[command(name = "coposcope", version, about = "Copositivity certificates for Feynman graph polynomials")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for the random starts of the critical point solver.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Largest Pólya exponent tried.
    #[arg(long, global = true, default_value_t = 1000)]
    cap: u32,
    /// Pólya acceptance rule: nonneg or strict.
    #[arg(long, global = true, default_value = "nonneg")]
    mode: PolyaMode,
    /// Grid resolution of the simplex search.
    #[arg(long, global = true, default_value_t = 40)]
    grid: u32,
    /// Number of Newton starts.
    #[arg(long, global = true, default_value_t = 200)]
    starts: usize,
    /// Job files processed in parallel by `decide`.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Write the main result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the Symanzik polynomials of a graph.
    Symanzik {
        #[command(flatten)]
        job: JobArgs,
        /// Print monomial counts only.
        #[arg(long)]
        counts: bool,
        /// Print the generic support of F.
        #[arg(long)]
        support: bool,
    },
    /// Newton polytope of F: f-vector, vertices and facets.
    Polytope {
        #[command(flatten)]
        job: JobArgs,
        /// List every face with its inner normal.
        #[arg(long)]
        faces: bool,
    },
    /// Decide copositivity and print a certificate.
    Decide {
        #[command(flatten)]
        job: JobArgs,
        /// Further job files, decided in a batch.
        #[arg(value_name = "JOB")]
        batch: Vec<PathBuf>,
    },
    /// Smallest Pólya exponent of F or of a polynomial file.
    Polya {
        #[command(flatten)]
        job: JobArgs,
        /// Polynomial JSON instead of a graph.
        #[arg(long)]
        poly: Option<PathBuf>,
    },
    /// Round an approximate point to an exact negative witness.
    Witness {
        #[command(flatten)]
        job: JobArgs,
        /// Comma-separated approximate coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        /// Restrict F to the face with this inner normal first.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        face_normal: Option<Vec<i64>>,
    },
    /// Re-check a certificate against its job.
    Verify {
        #[command(flatten)]
        job: JobArgs,
        /// Certificate JSON written by `decide`.
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Closed-form copositivity tests.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// One-loop kinematics realizing a quadratic form.
    Realize {
        /// JSON file holding a symmetric matrix.
        matrix: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    Bubble {
        #[arg(long, value_parser = parse_rat)]
        m1: Rational,
        #[arg(long, value_parser = parse_rat)]
        m2: Rational,
        #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
        s: Rational,
    },
    Banana {
        #[arg(long, value_delimiter = ',', value_parser = parse_rat, allow_hyphen_values = true)]
        m: Vec<Rational>,
        #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
        s: Rational,
    },
    Triangle {
        /// Rows separated by `;`, entries by `,`.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    Outer {
        /// E1, E2, D1 or D2.
        #[arg(long)]
        which: OuterApprox,
        #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
        m: Rational,
        #[arg(long = "M", value_parser = parse_rat, allow_hyphen_values = true)]
        big_m: Rational,
        #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
        s: Rational,
        #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
        t: Rational,
    },
}

/// Where the graph and the kinematics come from.
#[derive(Args, Debug, Clone, Default)]
struct JobArgs {
    /// Job JSON with `graph` and `kinematics`.
    #[arg(long)]
    job: Option<PathBuf>,
    /// Library name (bubble, parachute, g1, g2, g3, bananaN, one_loopN) or graph JSON file.
    #[arg(long)]
    graph: Option<String>,
    /// Kinematics JSON file.
    #[arg(long)]
    kinematics: Option<PathBuf>,
    /// Internal masses, one value or one per edge.
    #[arg(long, value_delimiter = ',', value_parser = parse_rat, allow_hyphen_values = true)]
    masses: Vec<Rational>,
    /// External masses M1..M4, one value or four.
    #[arg(long = "M", value_delimiter = ',', value_parser = parse_rat, allow_hyphen_values = true)]
    leg_masses: Vec<Rational>,
    /// Mandelstam s = (p1 + p2)^2.
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
    s: Option<Rational>,
    /// Mandelstam t = (p2 + p3)^2.
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
    t: Option<Rational>,
}

/// A graph, its kinematics and optional overrides of the decision settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct JobSpec {
    graph: GraphSource,
    #[serde(default)]
    kinematics: Option<KinematicsJson>,
    #[serde(default)]
    config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GraphSource {
    Named(String),
    Explicit(GraphJson),
}

struct Job {
    graph: FeynmanGraph,
    kinematics: Option<KinematicParams>,
    config: Option<serde_json::Value>,
}

fn parse_rat(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{}:{}:{}: {}", path.display(), e.line(), e.column(), e))
}

fn resolve_graph(source: &GraphSource) -> Result<FeynmanGraph> {
    match source {
        GraphSource::Named(name) => {
            if let Some(g) = library::by_name(name) {
                return Ok(g);
            }
            let path = Path::new(name);
            if path.exists() {
                let j: GraphJson = read_json(path)?;
                return Ok(FeynmanGraph::try_from(j)?);
            }
            bail!("unknown graph {name:?}")
        }
        GraphSource::Explicit(j) => Ok(FeynmanGraph::try_from(j.clone())?),
    }
}

impl JobArgs {
    fn load(&self) -> Result<Job> {
        let spec = match &self.job {
            Some(path) => Some(read_json::<JobSpec>(path)?),
            None => None,
        };
        let graph = match (&self.graph, &spec) {
            (Some(name), _) => resolve_graph(&GraphSource::Named(name.clone()))?,
            (None, Some(spec)) => resolve_graph(&spec.graph)?,
            (None, None) => bail!("no graph given: pass --graph or --job"),
        };
        let kin = if let Some(path) = &self.kinematics {
            Some(read_json::<KinematicsJson>(path)?)
        } else if !self.masses.is_empty() || self.s.is_some() {
            let fourleg = json!({
                "fourleg": {
                    "m": self.masses.iter().map(format_rational).collect::<Vec<_>>(),
                    "M": if self.leg_masses.is_empty() { vec!["0".to_string()] }
                         else { self.leg_masses.iter().map(format_rational).collect() },
                    "s": format_rational(self.s.as_ref().ok_or_else(|| anyhow!("--s is required"))?),
                    "t": format_rational(&self.t.clone().unwrap_or_else(|| int(0))),
                }
            });
            Some(serde_json::from_value(fourleg)?)
        } else {
            spec.as_ref().and_then(|s| s.kinematics.clone())
        };
        let kinematics = kin.map(|k| k.resolve(&graph)).transpose()?;
        Ok(Job { graph, kinematics, config: spec.and_then(|s| s.config) })
    }

    fn load_with_kinematics(&self) -> Result<(FeynmanGraph, KinematicParams, Option<serde_json::Value>)> {
        let job = self.load()?;
        let z = job.kinematics.ok_or_else(|| anyhow!("this command needs kinematics"))?;
        Ok((job.graph, z, job.config))
    }
}

impl Global {
    fn solver(&self) -> SolverConfig {
        SolverConfig { seed: self.seed, starts: self.starts, grid_resolution: self.grid, ..SolverConfig::default() }
    }

    fn decide_config(&self, overrides: Option<&serde_json::Value>) -> Result<DecideConfig> {
        let base = DecideConfig {
            solver: self.solver(),
            cap: self.cap,
            mode: self.mode,
            grid_resolution: self.grid,
            ..DecideConfig::default()
        };
        match overrides {
            None => Ok(base),
            Some(v) => {
                let mut merged = serde_json::to_value(&base)?;
                merge(&mut merged, v);
                Ok(serde_json::from_value(merged).context("invalid config override in job")?)
            }
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("cannot write {}", path.display())),
            None => {
                use std::io::Write;
                match writeln!(std::io::stdout().lock(), "{text}") {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                    _ => Ok(()),
                }
            }
        }
    }
}

fn merge(base: &mut serde_json::Value, over: &serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k.clone()).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, o) => *b = o.clone(),
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("COPOSCOPE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Symanzik { job, counts, support } => cmd_symanzik(g, job, *counts, *support),
        Command::Polytope { job, faces } => cmd_polytope(g, job, *faces),
        Command::Decide { job, batch } => cmd_decide(g, job, batch),
        Command::Polya { job, poly } => cmd_polya(g, job, poly.as_deref()),
        Command::Witness { job, point, face_normal } => cmd_witness(g, job, point, face_normal.as_deref()),
        Command::Verify { job, certificate } => cmd_verify(g, job, certificate),
        Command::Oracle { which } => cmd_oracle(g, which),
        Command::Realize { matrix } => cmd_realize(g, matrix),
    }
}

fn cmd_symanzik(g: &Global, args: &JobArgs, counts: bool, support: bool) -> Result<u8> {
    let job = args.load()?;
    let u = first_symanzik(&job.graph);
    let mut lines = Vec::new();
    if support {
        for e in support_sets(&job.graph).all() {
            lines.push(format!("{e:?}"));
        }
        g.emit(&lines.join("\n"))?;
        return Ok(0);
    }
    match &job.kinematics {
        Some(z) => {
            let f = second_symanzik(&job.graph, z)?;
            if counts {
                lines.push(format!("U: {} monomials", u.len()));
                lines.push(format!("F: {} monomials", f.len()));
            } else {
                lines.push(format!("U = {u}"));
                lines.push(format!("F = {f}"));
            }
        }
        None => {
            let f = second_symanzik_symbolic(&job.graph);
            if counts {
                lines.push(format!("U: {} monomials", u.len()));
                lines.push(format!("F: {} monomials", support_sets(&job.graph).all().len()));
            } else {
                lines.push(format!("U = {u}"));
                lines.push(format!("F = {f}"));
            }
        }
    }
    g.emit(&lines.join("\n"))?;
    Ok(0)
}

fn f_support(job: &Job) -> Result<Vec<Vec<u32>>> {
    Ok(match &job.kinematics {
        Some(z) => second_symanzik(&job.graph, z)?.support(),
        None => support_sets(&job.graph).all().into_iter().collect(),
    })
}

fn cmd_polytope(g: &Global, args: &JobArgs, faces: bool) -> Result<u8> {
    let job = args.load()?;
    let points = to_points(f_support(&job)?);
    let hull = convex_hull(&points)?;
    let mut out = json!({
        "dim": hull.dim(),
        "f_vector": f_vector(&hull),
        "vertices": hull.vertices(),
        "facets": hull.facets(),
    });
    if faces {
        out["faces"] = all_faces(&hull, &points)
            .into_iter()
            .map(|f| json!({"dim": f.dim, "normal": f.normal, "points": f.points}))
            .collect();
    }
    g.emit(&serde_json::to_string_pretty(&out)?)?;
    Ok(0)
}

fn decide_one(g: &Global, args: &JobArgs) -> Result<(CertificateJson, u8)> {
    let (graph, z, overrides) = args.load_with_kinematics()?;
    let cfg = g.decide_config(overrides.as_ref())?;
    let cert = decide(&graph, &z, &cfg)?;
    Ok((cert.to_json(), cert.exit_code() as u8))
}

fn cmd_decide(g: &Global, args: &JobArgs, batch: &[PathBuf]) -> Result<u8> {
    if batch.is_empty() {
        let (cert, code) = decide_one(g, args)?;
        g.emit(&serde_json::to_string_pretty(&cert)?)?;
        return Ok(code);
    }
    let mut jobs: Vec<JobArgs> = Vec::new();
    if args.job.is_some() || args.graph.is_some() {
        jobs.push(args.clone());
    }
    jobs.extend(batch.iter().map(|p| JobArgs { job: Some(p.clone()), ..JobArgs::default() }));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(g.jobs.max(1)).build()?;
    let results: Vec<Result<(CertificateJson, u8)>> = pool.install(|| jobs.par_iter().map(|j| decide_one(g, j)).collect());
    let mut code = 0u8;
    let mut lines = Vec::new();
    for (j, r) in jobs.iter().zip(results) {
        let name = j.job.as_ref().map(|p| p.display().to_string()).or_else(|| j.graph.clone()).unwrap_or_default();
        match r {
            Ok((cert, c)) => {
                code = code.max(c);
                lines.push(serde_json::to_string(&json!({"job": name, "certificate": cert}))?);
            }
            Err(e) => {
                code = 3;
                lines.push(serde_json::to_string(&json!({"job": name, "error": format!("{e:#}")}))?);
            }
        }
    }
    g.emit(&lines.join("\n"))?;
    Ok(code)
}

fn cmd_polya(g: &Global, args: &JobArgs, poly: Option<&Path>) -> Result<u8> {
    let f = match poly {
        Some(path) => SparsePoly::from_json(&read_json::<PolyJson>(path)?)?,
        None => {
            let (graph, z, _) = args.load_with_kinematics()?;
            second_symanzik(&graph, &z)?
        }
    };
    match find_polya_exponent(&f, g.mode, g.cap)? {
        PolyaOutcome::Certified(c) => {
            g.emit(&serde_json::to_string_pretty(&c)?)?;
            Ok(0)
        }
        PolyaOutcome::CapExceeded(r) => {
            g.emit(&serde_json::to_string_pretty(&json!({"cap_exceeded": r}))?)?;
            Ok(2)
        }
    }
}

fn cmd_witness(g: &Global, args: &JobArgs, point: &[f64], face_normal: Option<&[i64]>) -> Result<u8> {
    let (graph, z, _) = args.load_with_kinematics()?;
    let f = second_symanzik(&graph, &z)?;
    let target = match face_normal {
        Some(w) => {
            if w.len() != f.num_vars() {
                bail!("face normal has {} entries, expected {}", w.len(), f.num_vars());
            }
            f.restrict_to_face(w)
        }
        None => f.clone(),
    };
    match exact_negative_witness(&target, point) {
        Some(w) => {
            let w = Witness::new(&f, w.point, face_normal.map(<[i64]>::to_vec))?;
            g.emit(&serde_json::to_string_pretty(&w.to_json())?)?;
            Ok(0)
        }
        None => {
            eprintln!("no exact negative point found near the given point");
            Ok(2)
        }
    }
}

fn cmd_verify(g: &Global, args: &JobArgs, path: &Path) -> Result<u8> {
    let (graph, z, _) = args.load_with_kinematics()?;
    let f = second_symanzik(&graph, &z)?;
    let cert = read_json::<CertificateJson>(path)?.into_certificate()?;
    let (ok, reason) = match cert.verify(&f) {
        Ok(true) => (true, String::new()),
        Ok(false) => (false, "certificate does not check".to_string()),
        Err(e) => (false, e.to_string()),
    };
    if ok {
        g.emit("PASS")?;
        Ok(0)
    } else {
        g.emit(&format!("FAIL: {reason}"))?;
        Ok(1)
    }
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<Rational>>> {
    text.split(';')
        .map(|row| row.split(',').map(|x| parse_rational(x.trim()).map_err(Into::into)).collect())
        .collect()
}

fn verdict(value: bool) -> &'static str {
    if value {
        "true"
    } else {
        "false"
    }
}

fn cmd_oracle(g: &Global, which: &OracleCommand) -> Result<u8> {
    let line = match which {
        OracleCommand::Bubble { m1, m2, s } => verdict(bubble_oracle(m1, m2, s)).to_string(),
        OracleCommand::Banana { m, s } => {
            let v = banana_oracle(m, s)?;
            if m.len() == 3 {
                let d = banana_discriminant_n3(&m[0], &m[1], &m[2], s);
                let note = if d == int(0) { "boundary: discriminant 0".to_string() } else {
                    format!("discriminant {}", format_rational(&d))
                };
                format!("{} ({note})", verdict(v))
            } else {
                verdict(v).to_string()
            }
        }
        OracleCommand::Triangle { matrix } => verdict(triangle_oracle(&parse_matrix(matrix)?)?).to_string(),
        OracleCommand::Outer { which, m, big_m, s, t } => verdict(outer_approx(*which, m, big_m, s, t)).to_string(),
    };
    g.emit(&line)?;
    Ok(0)
}

fn cmd_realize(g: &Global, path: &Path) -> Result<u8> {
    let rows: Vec<Vec<RatText>> = read_json(path)?;
    let c: Vec<Vec<Rational>> = rows.into_iter().map(|r| r.into_iter().map(|q| q.0).collect()).collect();
    let z = realize_quadratic(&c)?;
    let out = json!({
        "masses": z.masses.iter().map(format_rational).collect::<Vec<_>>(),
        "K": z.gram.iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "approx_masses": z.masses.iter().map(to_f64).collect::<Vec<_>>(),
    });
    g.emit(&serde_json::to_string_pretty(&out)?)?;
    Ok(0)
}
