//! Adaptive argument-principle counter.
//!
//! The contour is refined until every segment `[z, z+h]` passes the linearized
//! step bound `|h| |Phi'_z(0)| < 1` at both ends and the endpoint disk test
//! `|Phi_z(h) - 1| < 1`. The count is then the sum of principal arguments of the
//! per-segment determinant ratios divided by `2 pi`. Each segment's increment
//! stays on one branch of the logarithm, so this is the winding of `det(zI - A)`.
//!
//! Rounds work as barriers: every new node is evaluated (in parallel), then the
//! list is scanned and insertions are applied single-threaded. Results do not
//! depend on evaluation order.

use std::collections::BTreeMap;

use log::{debug, info};
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::contour::{Contour, NodeList, Status};
use crate::error::{Error, Result};
use crate::linalg::{phi_ratio, ratio_arg, shifted_det, DetTriplet};
use crate::matrix_io::MatrixHandle;
use crate::scalar::Real;

/// Relative finite-difference step used for the derivative estimate.
pub const DERIV_ALPHA_SCALE: f64 = 1e-6;

/// Halvings of the finite-difference step tried when the ratio would overflow.
const MAX_STEP_RETRIES: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig<T> {
    /// Cap on points inserted into one segment at once.
    pub m_max: usize,
    /// Cap on the total number of nodes.
    pub m_pts: usize,
    pub deriv_alpha_scale: T,
    /// Largest accepted distance of `arg_sum / 2pi` from the nearest integer.
    pub round_tol: T,
    /// Integrate only the upper half when the matrix is real and the contour symmetric.
    pub use_symmetry: bool,
}

impl<T: Real> Default for EngineConfig<T> {
    fn default() -> Self {
        Self {
            m_max: 10,
            m_pts: 1 << 16,
            deriv_alpha_scale: T::lit(DERIV_ALPHA_SCALE),
            round_tol: T::lit(0.25),
            use_symmetry: true,
        }
    }
}

impl<T: Real> EngineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 || self.m_pts == 0 {
            return Err(Error::InvalidConfig("m_max and m_pts must be positive".into()));
        }
        if !(self.round_tol > T::zero() && self.round_tol < T::lit(0.5)) {
            return Err(Error::InvalidConfig("round_tol must lie in (0, 0.5)".into()));
        }
        if !(self.deriv_alpha_scale > T::zero()) {
            return Err(Error::InvalidConfig("deriv_alpha_scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// Some factorization hit a pivot below `eps * ||zI - A||_1`.
    Conditioning { nodes: usize, re: f64, im: f64 },
    /// Node cap reached before every segment was accepted.
    CapHit { n_nodes: usize },
    /// Symmetric vertex set, but the real-axis crossing count rules out the half contour.
    SymmetryFallback { axis_crossings: usize },
    /// A segment became too short to split in floating point.
    ResolutionLimit { re: f64, im: f64 },
}

#[derive(Debug, Clone)]
pub struct CountReport<T> {
    pub count: i64,
    /// Argument accumulated over the whole contour (doubled when only the upper half was walked).
    pub arg_sum: T,
    pub residual: T,
    pub n_nodes: usize,
    pub n_lu: usize,
    /// Extra factorizations spent on shortened derivative steps.
    pub n_retries: usize,
    pub n_refine_rounds: usize,
    pub warnings: Vec<Warning>,
    pub reliable: bool,
    pub half_contour: bool,
    /// Final node list, in contour order.
    pub nodes: NodeList<T>,
}

/// Everything computed at one contour node.
#[derive(Debug, Clone, PartialEq)]
pub struct PointData<T> {
    pub z: Complex<T>,
    pub det: DetTriplet<T>,
    pub deriv: Complex<T>,
    pub cond_warn: bool,
}

/// `s = alpha h` with `alpha = min(scale * mu / |h|, 1)`.
pub fn derivative_step<T: Real>(mu: T, h: Complex<T>, scale: T) -> Complex<T> {
    let alpha = (scale * mu / h.norm()).min(T::one());
    h * alpha
}

fn touching<T: Real>(z: Complex<T>) -> Error {
    Error::ContourTouchesSpectrum {
        re: z.re.to_f64_lossy(),
        im: z.im.to_f64_lossy(),
    }
}

fn det_at<T: Real>(a: &MatrixHandle<T>, z: Complex<T>) -> Result<(DetTriplet<T>, bool)> {
    shifted_det(a, z).map_err(|e| match e {
        Error::SingularMatrix { .. } => touching(z),
        other => other,
    })
}

/// Determinant of `zI - A` and the forward-difference estimate
/// `(Phi_z(s) - 1) / s` of `Phi'_z(0)`, with `s` from [`derivative_step`].
pub fn eval_point<T: Real>(a: &MatrixHandle<T>, z: Complex<T>, mu: T, h: Complex<T>) -> Result<PointData<T>> {
    eval_point_step(a, z, derivative_step(mu, h, T::lit(DERIV_ALPHA_SCALE)))
}

/// [`eval_point`] with an explicit difference step.
pub fn eval_point_step<T: Real>(a: &MatrixHandle<T>, z: Complex<T>, s: Complex<T>) -> Result<PointData<T>> {
    let (det, w0) = det_at(a, z)?;
    let (det_s, w1) = det_at(a, z + s)?;
    let phi = phi_ratio(&det_s, &det)?;
    Ok(PointData {
        z,
        det,
        deriv: (phi - Complex::new(T::one(), T::zero())) / s,
        cond_warn: w0 || w1,
    })
}

/// Linearized step bound `|h| < 1 / |deriv|`; always true for a zero derivative.
pub fn condition_c<T: Real>(h: Complex<T>, deriv: Complex<T>) -> bool {
    if deriv.is_zero() {
        return true;
    }
    h.norm() * deriv.norm() < T::one()
}

/// Endpoint disk test `|phi - 1| < 1`.
pub fn condition_b_prime<T: Real>(phi: Complex<T>) -> bool {
    (phi - Complex::new(T::one(), T::zero())).norm() < T::one()
}

/// `min(ceil(|h| |deriv|), m_max)`, at least 1.
pub fn insertion_count<T: Real>(h: Complex<T>, deriv: Complex<T>, m_max: usize) -> usize {
    let x = (h.norm() * deriv.norm()).ceil();
    let m = x.to_usize().unwrap_or(m_max);
    m.clamp(1, m_max.max(1))
}

/// Sum of `Arg(Phi_{z_i}(h_i))` over all segments. Every node must be Accepted
/// with a determinant, and every segment must still satisfy `|Phi - 1| < 1`.
pub fn accumulate_argument<T: Real>(nl: &NodeList<T>) -> Result<T> {
    let mut sum = T::zero();
    for i in 0..nl.len() {
        let node = nl.get(i);
        if node.status != Status::Accepted {
            return Err(Error::Internal(format!("node {i} is not accepted")));
        }
        let Some(j) = nl.next(i) else { continue };
        let (Some(d0), Some(d1)) = (node.det.as_ref(), nl.get(j).det.as_ref()) else {
            return Err(Error::Internal(format!("segment {i} lacks determinants")));
        };
        let phi = phi_ratio(d1, d0).map_err(|e| Error::Internal(format!("segment {i}: {e}")))?;
        if !condition_b_prime(phi) {
            return Err(Error::Internal(format!(
                "segment {i} accepted with |Phi - 1| = {:e}",
                (phi - Complex::new(T::one(), T::zero())).norm()
            )));
        }
        sum += phi.arg();
    }
    Ok(sum)
}

/// Same sum without any checks; used when refinement stopped early.
fn accumulate_unchecked<T: Real>(nl: &NodeList<T>) -> T {
    (0..nl.len())
        .filter_map(|i| {
            let j = nl.next(i)?;
            Some(ratio_arg(nl.get(j).det.as_ref()?, nl.get(i).det.as_ref()?))
        })
        .sum()
}

struct Counters {
    n_lu: usize,
    retries: usize,
}

/// Evaluates every New node. On ratio overflow in the derivative the step is halved.
fn evaluate_new<T: Real>(
    nl: &mut NodeList<T>,
    a: &MatrixHandle<T>,
    mu: T,
    scale: T,
    counters: &mut Counters,
) -> Result<()> {
    let jobs: Vec<(usize, Complex<T>, Complex<T>)> = (0..nl.len())
        .filter(|&i| nl.get(i).status == Status::New)
        .map(|i| {
            let z = nl.get(i).z;
            let h = match nl.next(i) {
                Some(j) => nl.get(j).z - z,
                None => nl.get(nl.prev(i).expect("open list has >= 2 nodes")).z - z,
            };
            (i, z, h)
        })
        .collect();

    let results: Vec<Result<(usize, PointData<T>, usize)>> = jobs
        .par_iter()
        .map(|&(i, z, h)| {
            let mut s = derivative_step(mu, h, scale);
            let (det, w0) = det_at(a, z)?;
            let mut retries = 0;
            loop {
                let (det_s, w1) = det_at(a, z + s)?;
                match phi_ratio(&det_s, &det) {
                    Ok(phi) => {
                        let deriv = (phi - Complex::new(T::one(), T::zero())) / s;
                        return Ok((i, PointData { z, det, deriv, cond_warn: w0 || w1 }, retries));
                    }
                    Err(Error::RatioOverflow { .. }) if retries < MAX_STEP_RETRIES => {
                        retries += 1;
                        s /= T::lit(2.0);
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();

    for r in results {
        let (i, pd, retries) = r?;
        counters.n_lu += 2 + retries;
        counters.retries += retries;
        let node = &mut nl.nodes_mut()[i];
        node.det = Some(pd.det);
        node.deriv = Some(pd.deriv);
        node.cond_warn = pd.cond_warn;
        node.status = Status::Evaluated;
    }
    Ok(())
}

type Plan<T> = BTreeMap<usize, Vec<Complex<T>>>;

/// Forward checks on every Evaluated node. Accepts in place; returns insertions.
fn forward_pass<T: Real>(nl: &mut NodeList<T>, m_max: usize) -> Plan<T> {
    let mut plan = Plan::new();
    for i in 0..nl.len() {
        if nl.get(i).status != Status::Evaluated {
            continue;
        }
        let Some(j) = nl.next(i) else {
            // End of an open polyline: no forward segment to check.
            nl.nodes_mut()[i].status = Status::Accepted;
            continue;
        };
        let (node, next) = (nl.get(i), nl.get(j));
        let z = node.z;
        let h = next.z - z;
        let deriv = node.deriv.expect("evaluated node has a derivative");
        if !condition_c(h, deriv) {
            let m = insertion_count(h, deriv, m_max);
            let denom = T::from_usize_lossy(m + 1);
            let pts = (1..=m).map(|k| z + h * (T::from_usize_lossy(k) / denom)).collect();
            plan.insert(i, pts);
            continue;
        }
        let det0 = node.det.as_ref().expect("evaluated node has a determinant");
        let det1 = next.det.as_ref().expect("neighbor evaluated this round");
        let accept = matches!(phi_ratio(det1, det0), Ok(phi) if condition_b_prime(phi));
        if accept {
            nl.nodes_mut()[i].status = Status::Accepted;
        } else {
            plan.insert(i, vec![z + h / T::lit(2.0)]);
        }
    }
    plan
}

/// Linearized bound checked from the far end of each segment: insert `z - h/2`
/// wherever `|h| |Phi'_z(0)| >= 1` for the incoming step `h`.
fn backward_pass<T: Real>(nl: &NodeList<T>) -> Plan<T> {
    let mut plan = Plan::new();
    for j in 0..nl.len() {
        let Some(p) = nl.prev(j) else { continue };
        let z = nl.get(j).z;
        let h = z - nl.get(p).z;
        let deriv = nl.get(j).deriv.expect("all nodes evaluated");
        if !condition_c(h, deriv) {
            plan.insert(p, vec![z - h / T::lit(2.0)]);
        }
    }
    plan
}

/// Drops whole entries so the list stays within `room` extra nodes.
fn fit_plan<T>(plan: Plan<T>, room: usize) -> Plan<T> {
    let mut used = 0;
    plan.into_iter()
        .take_while(|(_, pts)| {
            used += pts.len();
            used <= room
        })
        .collect()
}

/// Counts the eigenvalues of `a` enclosed by `c`.
pub fn count_eigenvalues<T: Real>(
    a: &MatrixHandle<T>,
    c: &Contour<T>,
    cfg: &EngineConfig<T>,
) -> Result<CountReport<T>> {
    cfg.validate()?;
    if a.order() == 0 {
        return Err(Error::InvalidConfig("empty matrix".into()));
    }
    let mu = c.max_modulus();
    let mut warnings = Vec::new();
    let half = cfg.use_symmetry && a.is_real && c.sym_real_axis();
    if cfg.use_symmetry && a.is_real && c.is_conjugation_invariant() && !c.sym_real_axis() {
        warnings.push(Warning::SymmetryFallback {
            axis_crossings: c.axis_crossings(),
        });
    }
    let mut nl = if half {
        NodeList::open(&c.split_upper()?)?
    } else {
        NodeList::closed(c)
    };

    let mut counters = Counters { n_lu: 0, retries: 0 };
    let mut rounds = 0;
    let mut cap_hit = false;
    loop {
        evaluate_new(&mut nl, a, mu, cfg.deriv_alpha_scale, &mut counters)?;
        let mut plan = forward_pass(&mut nl, cfg.m_max);
        if plan.is_empty() {
            plan = backward_pass(&nl);
        }
        if plan.is_empty() {
            break;
        }
        let room = cfg.m_pts.saturating_sub(nl.len());
        let plan = fit_plan(plan, room);
        if plan.is_empty() {
            cap_hit = true;
            warnings.push(Warning::CapHit { n_nodes: nl.len() });
            break;
        }
        let inserted: usize = plan.values().map(Vec::len).sum();
        if let Err(e) = nl.insert_many(&plan) {
            let (&at, _) = plan.iter().next().expect("non-empty plan");
            let z = nl.get(at).z;
            debug!("refinement stopped: {e}");
            warnings.push(Warning::ResolutionLimit {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
            break;
        }
        rounds += 1;
        debug!("round {rounds}: inserted {inserted}, {} nodes", nl.len());
    }

    let flagged: Vec<_> = nl.nodes().iter().filter(|n| n.cond_warn).collect();
    if let Some(first) = flagged.first() {
        warnings.push(Warning::Conditioning {
            nodes: flagged.len(),
            re: first.z.re.to_f64_lossy(),
            im: first.z.im.to_f64_lossy(),
        });
    }

    let complete = nl.nodes().iter().all(|n| n.status == Status::Accepted);
    let segment_sum = if complete {
        accumulate_argument(&nl)?
    } else {
        accumulate_unchecked(&nl)
    };
    let arg_sum = if half { segment_sum * T::lit(2.0) } else { segment_sum };
    let turns = arg_sum / T::TAU();
    let rounded = turns.round();
    let residual = (turns - rounded).abs();
    let degraded = warnings
        .iter()
        .any(|w| !matches!(w, Warning::SymmetryFallback { .. }));
    let reliable = complete && !cap_hit && !degraded && residual < cfg.round_tol;
    let report = CountReport {
        count: rounded.to_i64().unwrap_or(0),
        arg_sum,
        residual,
        n_nodes: nl.len(),
        n_lu: counters.n_lu,
        n_retries: counters.retries,
        n_refine_rounds: rounds,
        warnings,
        reliable,
        half_contour: half,
        nodes: nl,
    };
    info!(
        "count {} (residual {:.2e}, {} nodes, {} LU, {} rounds{})",
        report.count,
        report.residual.to_f64_lossy(),
        report.n_nodes,
        report.n_lu,
        report.n_refine_rounds,
        if report.reliable { "" } else { ", UNRELIABLE" }
    );
    Ok(report)
}
