//! Command-line front end: option parsing, contour specs, JSON report and node CSV.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::contour::{box_polygon, circle_polygon, make_polygon, Contour, NodeList};
use crate::engine::{count_eigenvalues, CountReport, EngineConfig, Warning};
use crate::error::{Error, Result};
use crate::matrix_io::{one_norm, read_matrix_market, write_matrix_market, MatrixHandle, SourceMeta};
use crate::oracle::{synth_matrix, SynthSpec};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const EXIT_RELIABLE: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_UNRELIABLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "eigencnt", version, about = "Count eigenvalues enclosed by a polygonal contour")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Worker threads for point evaluation; 0 picks automatically.
    #[arg(long, env = "EIGENCNT_THREADS", default_value_t = 0, global = true)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count the eigenvalues of a Matrix Market matrix inside a polygon.
    Count(RunOptions),
    /// Write a matrix with a prescribed spectrum in Matrix Market format.
    Synth(SynthOptions),
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("polygon").required(true).args(["vertices", "circle", "box"])))]
pub struct RunOptions {
    /// Matrix Market file.
    #[arg(long)]
    pub matrix: PathBuf,

    /// Polygon vertices as `re,im` pairs, comma- or whitespace-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub vertices: Option<String>,

    /// Regular polygon `cx,cy,r,k` with k vertices on the circle, the first at angle 0.
    #[arg(long, allow_hyphen_values = true)]
    pub circle: Option<String>,

    /// Rectangle `x0,x1,y0,y1`.
    #[arg(id = "box", long = "box", allow_hyphen_values = true)]
    pub r#box: Option<String>,

    /// Maximum points inserted into one segment at a time.
    #[arg(long, default_value_t = 10)]
    pub m_max: usize,

    /// Maximum number of contour points.
    #[arg(long, default_value_t = 1 << 16)]
    pub m_pts: usize,

    /// Largest tolerated distance of the winding from an integer.
    #[arg(long, default_value_t = 0.25)]
    pub round_tol: f64,

    /// Integrate the whole contour even for a real matrix and a symmetric contour.
    #[arg(long)]
    pub no_symmetry: bool,

    /// Report JSON path; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Node CSV path.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthOptions {
    /// Eigenvalues as `re,im` pairs.
    #[arg(long, allow_hyphen_values = true)]
    pub eigenvalues: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Build a real matrix (eigenvalues must come in conjugate pairs).
    #[arg(long)]
    pub real: bool,

    #[arg(long)]
    pub out: PathBuf,
}

/// The contour forms accepted on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum PolygonSpec {
    Vertices(Vec<Complex64>),
    Circle { center: Complex64, r: f64, k: usize },
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl PolygonSpec {
    pub fn from_options(o: &RunOptions) -> Result<Self> {
        match (&o.vertices, &o.circle, &o.r#box) {
            (Some(v), None, None) => Ok(PolygonSpec::Vertices(parse_pairs(v)?)),
            (None, Some(c), None) => {
                let x = parse_numbers(c)?;
                if x.len() != 4 || x[3] < 3.0 || x[3].fract() != 0.0 || x[2] <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "--circle expects cx,cy,r,k with r > 0 and integer k >= 3, got `{c}`"
                    )));
                }
                Ok(PolygonSpec::Circle {
                    center: Complex64::new(x[0], x[1]),
                    r: x[2],
                    k: x[3] as usize,
                })
            }
            (None, None, Some(b)) => {
                let x = parse_numbers(b)?;
                if x.len() != 4 {
                    return Err(Error::InvalidConfig(format!("--box expects x0,x1,y0,y1, got `{b}`")));
                }
                Ok(PolygonSpec::Box {
                    x0: x[0],
                    x1: x[1],
                    y0: x[2],
                    y1: x[3],
                })
            }
            _ => Err(Error::InvalidConfig(
                "give exactly one of --vertices, --circle, --box".into(),
            )),
        }
    }

    pub fn to_contour(&self) -> Result<Contour<f64>> {
        let v = match self {
            PolygonSpec::Vertices(v) => v.clone(),
            PolygonSpec::Circle { center, r, k } => circle_polygon(*center, *r, *k, 0.0),
            PolygonSpec::Box { x0, x1, y0, y1 } => {
                box_polygon(x0.min(*x1), x0.max(*x1), y0.min(*y1), y0.max(*y1))
            }
        };
        make_polygon(v)
    }
}

/// Decimal numbers (scientific notation allowed) separated by commas and/or whitespace.
pub fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad number `{t}`")))
        })
        .collect()
}

pub fn parse_pairs(s: &str) -> Result<Vec<Complex64>> {
    let x = parse_numbers(s)?;
    if x.len() % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "expected re,im pairs, got {} numbers",
            x.len()
        )));
    }
    Ok(x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

#[derive(Debug, Serialize)]
pub struct MatrixInfo {
    pub n: usize,
    pub is_real: bool,
    pub one_norm: f64,
    pub source: Option<SourceMeta>,
}

/// Machine-readable run report.
#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub schema_version: u32,
    pub count: i64,
    pub arg_sum: f64,
    pub residual: f64,
    pub reliable: bool,
    pub n_nodes: usize,
    pub n_lu: usize,
    pub n_retries: usize,
    pub n_refine_rounds: usize,
    pub half_contour: bool,
    pub warnings: Vec<Warning>,
    pub wall_time: f64,
    pub matrix: MatrixInfo,
}

impl ReportJson {
    pub fn new(r: &CountReport<f64>, a: &MatrixHandle<f64>, wall_time: f64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            count: r.count,
            arg_sum: r.arg_sum,
            residual: r.residual,
            reliable: r.reliable,
            n_nodes: r.n_nodes,
            n_lu: r.n_lu,
            n_retries: r.n_retries,
            n_refine_rounds: r.n_refine_rounds,
            half_contour: r.half_contour,
            warnings: r.warnings.clone(),
            wall_time,
            matrix: MatrixInfo {
                n: a.order(),
                is_real: a.is_real,
                one_norm: one_norm(a),
                source: a.source.clone(),
            },
        }
    }
}

/// `t_order,re,im,origin` rows in contour order, LF line endings.
pub fn nodes_csv(nl: &NodeList<f64>) -> String {
    let mut out = String::from("t_order,re,im,origin\n");
    for (i, n) in nl.nodes().iter().enumerate() {
        let _ = writeln!(out, "{i},{:e},{:e},{}", n.z.re, n.z.im, n.origin.as_str());
    }
    out
}

/// Runs `count`, writes the artifacts and returns the process exit status.
pub fn run_count(opts: &RunOptions) -> i32 {
    match try_run_count(opts) {
        Ok(reliable) => {
            if reliable {
                EXIT_RELIABLE
            } else {
                EXIT_UNRELIABLE
            }
        }
        Err(e) => {
            eprintln!("eigencnt: {e}");
            EXIT_FATAL
        }
    }
}

fn try_run_count(opts: &RunOptions) -> Result<bool> {
    let start = Instant::now();
    let contour = PolygonSpec::from_options(opts)?.to_contour()?;
    let a: MatrixHandle<f64> = read_matrix_market(&opts.matrix)?;
    let cfg = EngineConfig {
        m_max: opts.m_max,
        m_pts: opts.m_pts,
        round_tol: opts.round_tol,
        use_symmetry: !opts.no_symmetry,
        ..EngineConfig::default()
    };
    let report = count_eigenvalues(&a, &contour, &cfg)?;
    let json = ReportJson::new(&report, &a, start.elapsed().as_secs_f64());
    let text = serde_json::to_string_pretty(&json).map_err(|e| Error::Internal(e.to_string()))? + "\n";
    match &opts.report {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    if let Some(p) = &opts.nodes {
        std::fs::write(p, nodes_csv(&report.nodes))?;
    }
    Ok(report.reliable)
}

pub fn run_synth(opts: &SynthOptions) -> i32 {
    let result = parse_pairs(&opts.eigenvalues).and_then(|eigs| {
        let mut spec = SynthSpec::new(eigs, opts.seed);
        spec.real = opts.real;
        let a = synth_matrix(&spec)?;
        std::fs::write(&opts.out, write_matrix_market(&a))?;
        Ok(())
    });
    match result {
        Ok(()) => EXIT_RELIABLE,
        Err(e) => {
            eprintln!("eigencnt: {e}");
            EXIT_FATAL
        }
    }
}
