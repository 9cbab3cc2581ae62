//! Closed polygonal contours and the ordered node lists refined along them.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::DetTriplet;
use crate::scalar::Real;

/// Closed polygon traversed counterclockwise. The last vertex connects back to the first.
///
/// Self-intersection is not checked; the curve is assumed to be a Jordan curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour<T> {
    vertices: Vec<Complex<T>>,
    signed_area: T,
    conj_invariant: bool,
    axis_crossings: usize,
}

fn shoelace<T: Real>(v: &[Complex<T>]) -> T {
    let n = v.len();
    let twice: T = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum();
    twice / T::lit(2.0)
}

impl<T: Real> Contour<T> {
    pub fn vertices(&self) -> &[Complex<T>] {
        &self.vertices
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.signed_area > T::zero()
    }

    pub fn signed_area(&self) -> T {
        self.signed_area
    }

    /// Vertex set maps onto itself under conjugation (within tolerance).
    pub fn is_conjugation_invariant(&self) -> bool {
        self.conj_invariant
    }

    /// Number of points where the polygon meets the real axis.
    pub fn axis_crossings(&self) -> usize {
        self.axis_crossings
    }

    /// Symmetric about the real axis and crossing it exactly twice.
    pub fn sym_real_axis(&self) -> bool {
        self.conj_invariant && self.axis_crossings == 2
    }

    /// `max |v|` over the vertices.
    pub fn max_modulus(&self) -> T {
        self.vertices.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }

    pub fn diameter(&self) -> T {
        let mut d = T::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn edges(&self) -> impl Iterator<Item = (Complex<T>, Complex<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn axis_tol(&self) -> T {
        T::lit(1e-12) * self.max_modulus()
    }

    /// The part of the contour with `Im >= 0`, from the right axis crossing to the
    /// left one. Crossing points that are not vertices are interpolated and land
    /// exactly on the axis.
    pub fn split_upper(&self) -> Result<Vec<Complex<T>>> {
        if !self.sym_real_axis() {
            return Err(Error::Symmetry);
        }
        let tol = self.axis_tol();
        let on_axis = |z: Complex<T>| z.im.abs() <= tol;

        // (point, is_axis_point) around the whole polygon.
        let mut ring: Vec<(Complex<T>, bool)> = Vec::with_capacity(self.vertices.len() + 2);
        for (a, b) in self.edges() {
            if on_axis(a) {
                ring.push((Complex::new(a.re, T::zero()), true));
            } else {
                ring.push((a, false));
                if !on_axis(b) && (a.im > T::zero()) != (b.im > T::zero()) {
                    let s = -a.im / (b.im - a.im);
                    ring.push((Complex::new(a.re + s * (b.re - a.re), T::zero()), true));
                }
            }
        }
        let m = ring.len();
        let start = (0..m)
            .find(|&i| ring[i].1 && ring[(i + 1) % m].0.im > T::zero())
            .ok_or(Error::Symmetry)?;
        let mut out = vec![ring[start].0];
        let mut i = (start + 1) % m;
        loop {
            out.push(ring[i].0);
            if ring[i].1 {
                break;
            }
            i = (i + 1) % m;
        }
        Ok(out)
    }
}

/// Builds a contour, reversing the traversal (first vertex kept) when the input
/// runs clockwise.
pub fn make_polygon<T: Real>(vertices: Vec<Complex<T>>) -> Result<Contour<T>> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::DegenerateContour(format!("{n} vertices, need at least 3")));
    }
    if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::DegenerateContour("non-finite vertex".into()));
    }
    for i in 0..n {
        if vertices[i] == vertices[(i + 1) % n] {
            return Err(Error::DegenerateContour(format!(
                "consecutive vertices {i} and {} coincide",
                (i + 1) % n
            )));
        }
    }
    let mut vertices = vertices;
    let mut area = shoelace(&vertices);
    if area == T::zero() || !area.is_finite() {
        return Err(Error::DegenerateContour("zero signed area".into()));
    }
    if area < T::zero() {
        vertices[1..].reverse();
        area = shoelace(&vertices);
    }

    let scale = vertices.iter().map(|v| v.norm()).fold(T::zero(), T::max);
    let tol = T::lit(1e-12) * scale;
    let conj_invariant = vertices
        .iter()
        .all(|v| vertices.iter().any(|w| (w - v.conj()).norm() <= tol));
    let on_axis = |z: &Complex<T>| z.im.abs() <= tol;
    let mut axis_crossings = vertices.iter().filter(|v| on_axis(v)).count();
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        if !on_axis(&a) && !on_axis(&b) && (a.im > T::zero()) != (b.im > T::zero()) {
            axis_crossings += 1;
        }
    }

    Ok(Contour {
        vertices,
        signed_area: area,
        conj_invariant,
        axis_crossings,
    })
}

/// `k` vertices regularly spaced on the circle of radius `r` about `center`,
/// the first at angle `phase`.
pub fn circle_polygon<T: Real>(center: Complex<T>, r: T, k: usize, phase: T) -> Vec<Complex<T>> {
    (0..k)
        .map(|j| {
            let th = phase + T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(k);
            center + Complex::from_polar(r, th)
        })
        .collect()
}

/// Counterclockwise rectangle `[x0,x1] x [y0,y1]` starting at the lower-left corner.
pub fn box_polygon<T: Real>(x0: T, x1: T, y0: T, y1: T) -> Vec<Complex<T>> {
    vec![
        Complex::new(x0, y0),
        Complex::new(x1, y0),
        Complex::new(x1, y1),
        Complex::new(x0, y1),
    ]
}

/// Node evaluation state. Codes follow the refinement table: New = -1,
/// Evaluated = 1, Accepted = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    New,
    Evaluated,
    Accepted,
}

impl Status {
    pub fn code(self) -> i8 {
        match self {
            Status::New => -1,
            Status::Evaluated => 1,
            Status::Accepted => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    User,
    Inserted,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::User => "user",
            Origin::Inserted => "inserted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node<T> {
    pub z: Complex<T>,
    /// Contour parameter, strictly increasing along the list.
    pub t: T,
    pub status: Status,
    pub det: Option<DetTriplet<T>>,
    /// Estimate of the log-derivative of the determinant ratio at zero step.
    pub deriv: Option<Complex<T>>,
    pub cond_warn: bool,
    pub origin: Origin,
}

impl<T: Real> Node<T> {
    fn new(z: Complex<T>, t: T, origin: Origin) -> Self {
        Self {
            z,
            t,
            status: Status::New,
            det: None,
            deriv: None,
            cond_warn: false,
            origin,
        }
    }
}

/// Points along a closed contour (or along an open polyline for the half-contour
/// optimization). The segment of node `i` runs to its successor.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeList<T> {
    nodes: Vec<Node<T>>,
    closed: bool,
}

impl<T: Real> NodeList<T> {
    /// Nodes at the vertices of a closed contour; `t` runs over `[0, 1)`.
    pub fn closed(c: &Contour<T>) -> Self {
        let n = T::from_usize_lossy(c.vertices().len());
        let nodes = c
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, &z)| Node::new(z, T::from_usize_lossy(i) / n, Origin::User))
            .collect();
        Self { nodes, closed: true }
    }

    /// Nodes along an open polyline; `t` runs over `[0, 1]`.
    pub fn open(points: &[Complex<T>]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateContour("open polyline needs 2 points".into()));
        }
        let last = T::from_usize_lossy(points.len() - 1);
        let nodes = points
            .iter()
            .enumerate()
            .map(|(i, &z)| Node::new(z, T::from_usize_lossy(i) / last, Origin::User))
            .collect();
        Ok(Self { nodes, closed: false })
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn nodes_mut(&mut self) -> &mut [Node<T>] {
        &mut self.nodes
    }

    pub fn get(&self, i: usize) -> &Node<T> {
        &self.nodes[i]
    }

    /// Index of the far end of node `i`'s segment.
    pub fn next(&self, i: usize) -> Option<usize> {
        if i + 1 < self.nodes.len() {
            Some(i + 1)
        } else if self.closed {
            Some(0)
        } else {
            None
        }
    }

    pub fn prev(&self, i: usize) -> Option<usize> {
        if i > 0 {
            Some(i - 1)
        } else if self.closed {
            Some(self.nodes.len() - 1)
        } else {
            None
        }
    }

    /// Forward step `z_{i+1} - z_i`.
    pub fn h(&self, i: usize) -> Option<Complex<T>> {
        self.next(i).map(|j| self.nodes[j].z - self.nodes[i].z)
    }

    /// Number of segments.
    pub fn segments(&self) -> usize {
        if self.closed {
            self.nodes.len()
        } else {
            self.nodes.len() - 1
        }
    }

    fn t_end(&self, i: usize) -> T {
        match self.next(i) {
            Some(0) | None => T::one(),
            Some(j) => self.nodes[j].t,
        }
    }

    /// Inserts `points`, in traversal order, strictly inside the segment of node `after`.
    pub fn insert_nodes(&mut self, after: usize, points: &[Complex<T>]) -> Result<()> {
        let mut plan = BTreeMap::new();
        plan.insert(after, points.to_vec());
        self.insert_many(&plan)
    }

    /// Applies several insertions at once; keys index the current list. Every
    /// point is validated before anything changes. A node whose segment gains
    /// points is demoted from Accepted to Evaluated so its conditions get rechecked.
    pub fn insert_many(&mut self, plan: &BTreeMap<usize, Vec<Complex<T>>>) -> Result<()> {
        let mut placed: BTreeMap<usize, Vec<(Complex<T>, T)>> = BTreeMap::new();
        for (&after, points) in plan {
            if points.is_empty() {
                continue;
            }
            let j = self
                .next(after)
                .ok_or_else(|| Error::Geometry(format!("node {after} has no forward segment")))?;
            let a = self.nodes[after].z;
            let b = self.nodes[j].z;
            let (t0, t1) = (self.nodes[after].t, self.t_end(after));
            let h = b - a;
            let len2 = h.norm_sqr();
            let tol = T::lit(16.0) * T::epsilon() * (h.norm() + a.norm() + b.norm());
            let mut last_frac = T::zero();
            let mut last_point = a;
            let mut out = Vec::with_capacity(points.len());
            for &p in points {
                let frac = ((p - a) * h.conj()).re / len2;
                let foot = a + h * frac;
                if (p - foot).norm() > tol {
                    return Err(Error::Geometry(format!(
                        "point {p} is off the segment [{a}, {b}]"
                    )));
                }
                if !(frac > last_frac && frac < T::one()) || p == last_point || p == b {
                    return Err(Error::Geometry(format!(
                        "point {p} duplicates a node or is out of order on [{a}, {b}]"
                    )));
                }
                let t = t0 + frac * (t1 - t0);
                let prev_t = out.last().map(|&(_, t)| t).unwrap_or(t0);
                if !(t > prev_t && t < t1) {
                    return Err(Error::Geometry(format!(
                        "contour parameter cannot resolve point {p}"
                    )));
                }
                out.push((p, t));
                last_frac = frac;
                last_point = p;
            }
            placed.insert(after, out);
        }
        if placed.is_empty() {
            return Ok(());
        }
        let extra: usize = placed.values().map(Vec::len).sum();
        let mut nodes = Vec::with_capacity(self.nodes.len() + extra);
        for (i, mut node) in std::mem::take(&mut self.nodes).into_iter().enumerate() {
            let new_pts = placed.remove(&i);
            if new_pts.is_some() && node.status == Status::Accepted {
                node.status = Status::Evaluated;
            }
            nodes.push(node);
            for (z, t) in new_pts.into_iter().flatten() {
                nodes.push(Node::new(z, t, Origin::Inserted));
            }
        }
        self.nodes = nodes;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn set_eq(a: &[C], b: &[C], tol: f64) -> bool {
        a.iter().all(|x| b.iter().any(|y| (x - y).norm() <= tol))
            && b.iter().all(|y| a.iter().any(|x| (x - y).norm() <= tol))
    }

    #[test]
    fn square_kept_counterclockwise() {
        let v = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let k = make_polygon(v.clone()).unwrap();
        assert_eq!(k.vertices(), &v[..]);
        assert!(k.is_counterclockwise());
        assert!(k.sym_real_axis());
        assert_eq!(k.signed_area(), 2.0);
    }

    #[test]
    fn clockwise_square_reversed() {
        let k = make_polygon(vec![c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(
            k.vertices(),
            &[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]
        );
        assert!(k.signed_area() > 0.0);
    }

    #[test]
    fn decagon_symmetry_depends_on_phase() {
        let on = make_polygon(circle_polygon(c(0.0, 0.0), 1.3, 10, 0.0)).unwrap();
        assert!(on.sym_real_axis());
        assert_eq!(on.vertices().len(), 10);
        let half = make_polygon(circle_polygon(c(0.0, 0.0), 1.3, 10, std::f64::consts::PI / 10.0)).unwrap();
        assert!(half.sym_real_axis());
        let off = make_polygon(circle_polygon(c(0.0, 0.0), 1.3, 10, 0.1)).unwrap();
        assert!(!off.sym_real_axis());
        assert!(!off.is_conjugation_invariant());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            make_polygon(vec![c(0.0, 0.0), c(1.0, 0.0)]),
            Err(Error::DegenerateContour(_))
        ));
        assert!(matches!(
            make_polygon(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]),
            Err(Error::DegenerateContour(_))
        ));
        assert!(matches!(
            make_polygon(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)]),
            Err(Error::DegenerateContour(_))
        ));
    }

    #[test]
    fn split_square() {
        let k = make_polygon(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]).unwrap();
        assert_eq!(k.split_upper().unwrap(), vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn split_symmetric_box() {
        let k = make_polygon(box_polygon(-20.0, 0.0, -500.0, 500.0)).unwrap();
        assert!(k.sym_real_axis());
        assert_eq!(
            k.split_upper().unwrap(),
            vec![c(0.0, 0.0), c(0.0, 500.0), c(-20.0, 500.0), c(-20.0, 0.0)]
        );
    }

    #[test]
    fn split_asymmetric_box_fails() {
        let k = make_polygon(box_polygon(-20.0, 0.0, 75.0, 125.0)).unwrap();
        assert!(!k.sym_real_axis());
        assert!(matches!(k.split_upper(), Err(Error::Symmetry)));
    }

    #[test]
    fn insert_cases() {
        let k = make_polygon(vec![c(0.0, 0.0), c(1.0, 1.0), c(-1.0, 1.0)]).unwrap();
        let mut nl = NodeList::closed(&k);
        nl.insert_nodes(0, &[c(0.5, 0.5)]).unwrap();
        assert_eq!(nl.len(), 4);
        assert_eq!(nl.get(1).z, c(0.5, 0.5));
        assert_eq!(nl.get(1).status, Status::New);
        assert_eq!(nl.get(1).origin, Origin::Inserted);

        let mut line = NodeList::open(&[c(0.0, 0.0), c(4.0, 0.0)]).unwrap();
        line.insert_nodes(0, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        let zs: Vec<C> = line.nodes().iter().map(|n| n.z).collect();
        assert_eq!(zs, vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert!(line.nodes().windows(2).all(|w| w[0].t < w[1].t));

        // Midpoint z + h/2 on the wrap-around segment of a closed list.
        let mut nl = NodeList::closed(&k);
        let h = nl.h(2).unwrap();
        nl.insert_nodes(2, &[nl.get(2).z + h / 2.0]).unwrap();
        assert_eq!(nl.get(3).z, c(-0.5, 0.5));
        assert!(nl.get(3).t > nl.get(2).t && nl.get(3).t < 1.0);
    }

    #[test]
    fn insert_errors() {
        let mut line = NodeList::open(&[c(0.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!(matches!(line.insert_nodes(0, &[c(1.0, 0.5)]), Err(Error::Geometry(_))));
        assert!(matches!(line.insert_nodes(0, &[c(4.0, 0.0)]), Err(Error::Geometry(_))));
        assert!(matches!(line.insert_nodes(0, &[c(0.0, 0.0)]), Err(Error::Geometry(_))));
        assert!(matches!(
            line.insert_nodes(0, &[c(2.0, 0.0), c(1.0, 0.0)]),
            Err(Error::Geometry(_))
        ));
        assert!(matches!(line.insert_nodes(1, &[c(5.0, 0.0)]), Err(Error::Geometry(_))));
        assert_eq!(line.len(), 2);
    }

    #[test]
    fn insertion_demotes_accepted_owner() {
        let mut line = NodeList::open(&[c(0.0, 0.0), c(4.0, 0.0)]).unwrap();
        line.nodes_mut()[0].status = Status::Accepted;
        line.insert_nodes(0, &[c(2.0, 0.0)]).unwrap();
        assert_eq!(line.get(0).status, Status::Evaluated);
    }

    fn polygon_strategy() -> impl Strategy<Value = Vec<C>> {
        (3usize..12, -5.0f64..5.0, -5.0f64..5.0, 0.1f64..10.0, 0.0f64..6.3).prop_map(
            |(k, cx, cy, r, ph)| circle_polygon(c(cx, cy), r, k, ph),
        )
    }

    proptest! {
        #[test]
        fn make_polygon_idempotent(mut v in polygon_strategy(), flip in any::<bool>()) {
            if flip { v.reverse(); }
            let k = make_polygon(v).unwrap();
            let again = make_polygon(k.vertices().to_vec()).unwrap();
            prop_assert_eq!(&k, &again);
            prop_assert!(k.is_counterclockwise());
        }

        #[test]
        fn split_and_mirror_reconstructs(k in 3usize..14, r in 0.1f64..100.0, x in -10.0f64..10.0) {
            let v = circle_polygon(c(x, 0.0), r, k, 0.0);
            let con = make_polygon(v).unwrap();
            prop_assume!(con.sym_real_axis());
            let upper = con.split_upper().unwrap();
            prop_assert_eq!(upper[0].im, 0.0);
            prop_assert_eq!(upper[upper.len() - 1].im, 0.0);
            prop_assert!(upper.iter().all(|z| z.im >= 0.0));
            let mut full = upper.clone();
            full.extend(upper[1..upper.len() - 1].iter().rev().map(|z| z.conj()));
            let tol = 1e-12 * con.max_modulus();
            if k % 2 == 0 {
                // Both axis points are vertices: same vertex set.
                prop_assert!(set_eq(&full, con.vertices(), tol));
            } else {
                // Odd k: one crossing is interpolated, so the vertex set only grows.
                prop_assert!(con.vertices().iter().all(|v| full.iter().any(|w| (v - w).norm() <= tol)));
            }
        }

        #[test]
        fn insertions_stay_on_contour(fracs in proptest::collection::vec(0.01f64..0.99, 1..6), seg in 0usize..5) {
            let con = make_polygon(circle_polygon(c(0.3, -0.2), 2.0, 5, 0.4)).unwrap();
            let mut nl = NodeList::closed(&con);
            let a = nl.get(seg).z;
            let h = nl.h(seg).unwrap();
            let mut f = fracs.clone();
            f.sort_by(|x, y| x.partial_cmp(y).unwrap());
            f.dedup();
            let pts: Vec<C> = f.iter().map(|&s| a + h * s).collect();
            nl.insert_nodes(seg, &pts).unwrap();
            prop_assert!(nl.nodes().windows(2).all(|w| w[0].t < w[1].t));
            for node in nl.nodes() {
                let d = con.edges().map(|(p, q)| {
                    let e = q - p;
                    let s = (((node.z - p) * e.conj()).re / e.norm_sqr()).clamp(0.0, 1.0);
                    (node.z - (p + e * s)).norm()
                }).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-12);
            }
        }
    }
}
