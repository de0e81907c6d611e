//! Convex minorant of a grid path and queries over its faces.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::csv::fmt_f64;
use crate::error::{Error, Result};
use crate::path::GridPath;
use crate::transforms::knight_bridge;

/// Relative tolerance of the orientation test: three points whose cross
/// product is within this fraction of its two terms are collinear.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// One linear piece of the minorant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub g: f64,
    pub d: f64,
    pub length: f64,
    pub increment: f64,
    pub slope: f64,
}

impl Face {
    pub fn new(g: f64, d: f64, increment: f64) -> Self {
        let length = d - g;
        Self {
            g,
            d,
            length,
            increment,
            slope: increment / length,
        }
    }
}

/// Faces of a convex minorant in time order.
#[derive(Clone, Debug, PartialEq)]
pub struct MinorantDecomposition {
    faces: Vec<Face>,
    vertex_values: Vec<f64>,
}

/// Orientation of `c` relative to the directed line `a → b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Above,
    On,
    Below,
}

/// Orientation test on points `(x, y)`; "above" means a counter-clockwise turn.
pub fn orientation(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Side {
    let lhs = (b.0 - a.0) * (c.1 - a.1);
    let rhs = (b.1 - a.1) * (c.0 - a.0);
    let cross = lhs - rhs;
    let tol = COLLINEAR_TOL * (lhs.abs() + rhs.abs());
    if cross > tol {
        Side::Above
    } else if cross < -tol {
        Side::Below
    } else {
        Side::On
    }
}

impl MinorantDecomposition {
    /// Builds a decomposition from vertex times and the minorant's values there.
    pub fn from_vertices(times: &[f64], values: &[f64]) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::Domain("need at least two vertices with matching values".into()));
        }
        let faces = times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| Face::new(t[0], t[1], v[1] - v[0]))
            .collect::<Vec<_>>();
        if let Some(f) = faces.iter().find(|f| !(f.length > 0.0)) {
            return Err(Error::Domain(format!("vertex times must increase, got face [{}, {}]", f.g, f.d)));
        }
        Ok(Self {
            faces,
            vertex_values: values.to_vec(),
        })
    }

    /// Chains faces end to end starting from `(faces[0].g, start_value)`.
    pub fn from_faces(faces: Vec<Face>, start_value: f64) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::Domain("a decomposition needs at least one face".into()));
        }
        let mut vertex_values = Vec::with_capacity(faces.len() + 1);
        vertex_values.push(start_value);
        for f in &faces {
            vertex_values.push(vertex_values[vertex_values.len() - 1] + f.increment);
        }
        let dec = Self { faces, vertex_values };
        dec.check_invariants()?;
        Ok(dec)
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn vertex_values(&self) -> &[f64] {
        &self.vertex_values
    }

    pub fn vertex_times(&self) -> Vec<f64> {
        std::iter::once(self.faces[0].g).chain(self.faces.iter().map(|f| f.d)).collect()
    }

    pub fn t0(&self) -> f64 {
        self.faces[0].g
    }

    pub fn t_end(&self) -> f64 {
        self.faces[self.faces.len() - 1].d
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t0()
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Piecewise-linear minorant evaluated at `t` (clamped to the domain).
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.faces.partition_point(|f| f.d < t).min(self.faces.len() - 1);
        let f = &self.faces[i];
        let s = (t - f.g).clamp(0.0, f.length);
        self.vertex_values[i] + f.slope * s
    }

    /// The face with `g < u ≤ d`. Interior vertices are reported as collisions.
    pub fn face_containing(&self, u: f64) -> Result<&Face> {
        if !(u > self.t0() && u < self.t_end()) {
            return Err(Error::Domain(format!(
                "time {u} outside the open interval ({}, {})",
                self.t0(),
                self.t_end()
            )));
        }
        let i = self.faces.partition_point(|f| f.d < u);
        let f = &self.faces[i];
        if f.d == u {
            return Err(Error::VertexCollision(u));
        }
        Ok(f)
    }

    /// Index of the face with `g < u ≤ d`, where a vertex belongs to the face ending there.
    pub fn face_index_right_closed(&self, u: f64) -> Result<usize> {
        if !(u > self.t0() && u <= self.t_end()) {
            return Err(Error::Domain(format!(
                "time {u} outside ({}, {}]",
                self.t0(),
                self.t_end()
            )));
        }
        Ok(self.faces.partition_point(|f| f.d < u))
    }

    /// Right derivative `D_t` as a step function.
    pub fn right_derivative(&self) -> StepFunction {
        StepFunction {
            breaks: self.vertex_times(),
            slopes: self.faces.iter().map(|f| f.slope).collect(),
        }
    }

    /// `I_x = inf{t : D_t > x}`, the left end of the first face steeper than `x`,
    /// or the end of the horizon when there is none.
    pub fn slope_passage(&self, x: f64) -> f64 {
        // Slopes increase, so the faces with slope <= x form a prefix.
        let i = self.faces.partition_point(|f| f.slope <= x);
        if i == self.faces.len() {
            self.t_end()
        } else {
            self.faces[i].g
        }
    }

    /// Face lengths in decreasing order.
    pub fn ranked_lengths(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.faces.iter().map(|f| f.length).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        l
    }

    /// Checks tiling and strict convexity; used by tests and as a debug aid.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.faces.windows(2) {
            if w[0].d != w[1].g {
                return Err(Error::Domain(format!("faces do not tile: {} != {}", w[0].d, w[1].g)));
            }
            if !(w[0].slope < w[1].slope) {
                return Err(Error::Domain(format!("slopes not increasing: {} then {}", w[0].slope, w[1].slope)));
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            // Faces shorter than an ulp of their position may collapse to a point.
            if !(f.length > 0.0 && f.g <= f.d) {
                return Err(Error::Domain(format!("empty face {i}")));
            }
            let (a, b) = (self.vertex_values[i], self.vertex_values[i + 1]);
            if (b - a - f.increment).abs() > 1e-12 * (a.abs() + b.abs() + f.increment.abs()) {
                return Err(Error::Domain(format!("face {i} increment disagrees with vertex values")));
            }
        }
        Ok(())
    }

    /// Writes `g,d,length,increment,slope`, one row per face.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "g,d,length,increment,slope")?;
        for f in &self.faces {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(f.g),
                fmt_f64(f.d),
                fmt_f64(f.length),
                fmt_f64(f.increment),
                fmt_f64(f.slope)
            )?;
        }
        Ok(())
    }
}

/// Right-continuous step function: value `slopes[i]` on `[breaks[i], breaks[i+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    slopes: Vec<f64>,
}

impl StepFunction {
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.slopes
    }

    /// Value at `t`; the last piece extends to the right end inclusive.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.breaks[1..].partition_point(|&b| b <= t).min(self.slopes.len() - 1);
        self.slopes[i]
    }
}

/// Grid indices of the lower convex hull of `(k, values[k])`.
///
/// Monotone chain; collinear middle points are dropped.
pub fn hull_indices(values: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(64);
    for (k, &v) in values.iter().enumerate() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let side = orientation((a as f64, values[a]), (b as f64, values[b]), (k as f64, v));
            if side == Side::Above {
                break;
            }
            hull.pop();
        }
        hull.push(k);
    }
    hull
}

/// Convex minorant of the polygonal interpolation of `path`, in O(n).
pub fn convex_minorant(path: &GridPath) -> MinorantDecomposition {
    let values = path.values();
    let idx = hull_indices(values);
    let faces = idx
        .windows(2)
        .map(|w| Face::new(path.time(w[0]), path.time(w[1]), values[w[1]] - values[w[0]]))
        .collect();
    MinorantDecomposition {
        faces,
        vertex_values: idx.iter().map(|&k| values[k]).collect(),
    }
}

/// Excursion of `path` above its minorant over `face`: path minus the chord.
pub fn excursion(path: &GridPath, face: &Face) -> Result<GridPath> {
    let i = path.index_of(face.g)?;
    let j = path.index_of(face.d)?;
    let v = path.values();
    let inc = v[j] - v[i];
    if (inc - face.increment).abs() > 1e-9 * inc.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "face [{}, {}] has increment {} but the path rises {inc} there",
            face.g, face.d, face.increment
        )));
    }
    knight_bridge(path, face.g, face.d)
}

/// Location and value of the minimum over the grid; ties go to the last index.
pub fn argmin(path: &GridPath) -> (f64, f64) {
    let v = path.values();
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x <= v[best] {
            best = k;
        }
    }
    (path.time(best), v[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(values: &[f64], dt: f64) -> GridPath {
        GridPath::new(0.0, dt, values.to_vec()).unwrap()
    }

    #[test]
    fn middle_point_above_chord() {
        let dec = convex_minorant(&path(&[0.0, 1.0, 0.0], 0.5));
        assert_eq!(dec.faces(), &[Face::new(0.0, 1.0, 0.0)]);
        assert_eq!(dec.faces()[0].slope, 0.0);
    }

    #[test]
    fn v_shape_has_two_faces() {
        let dec = convex_minorant(&path(&[0.0, -1.0, 0.0], 0.5));
        assert_eq!(dec.len(), 2);
        let f = dec.faces();
        assert_eq!((f[0].g, f[0].d, f[0].increment, f[0].slope), (0.0, 0.5, -1.0, -2.0));
        assert_eq!((f[1].g, f[1].d, f[1].increment, f[1].slope), (0.5, 1.0, 1.0, 2.0));
        dec.check_invariants().unwrap();
    }

    #[test]
    fn collinear_points_are_not_vertices() {
        let dec = convex_minorant(&path(&[0.0, 1.0, 2.0, 3.0], 1.0));
        assert_eq!(dec.len(), 1);
        assert_eq!(dec.vertex_values(), &[0.0, 3.0]);
    }

    #[test]
    fn face_lookup_conventions() {
        let single = convex_minorant(&path(&[0.0, 1.0, 0.0], 0.5));
        assert_eq!(single.face_containing(0.3).unwrap(), &single.faces()[0]);
        let two = convex_minorant(&path(&[0.0, -1.0, 0.0], 0.5));
        assert_eq!(two.face_containing(0.25).unwrap().d, 0.5);
        assert_eq!(two.face_containing(0.75).unwrap().g, 0.5);
        assert!(matches!(two.face_containing(0.5), Err(Error::VertexCollision(_))));
        assert!(matches!(two.face_containing(0.0), Err(Error::Domain(_))));
        assert!(matches!(two.face_containing(1.0), Err(Error::Domain(_))));
        assert_eq!(two.face_index_right_closed(0.5).unwrap(), 0);
        assert_eq!(two.face_index_right_closed(1.0).unwrap(), 1);
    }

    #[test]
    fn right_derivative_steps() {
        let one = convex_minorant(&path(&[0.0, 1.0, 0.0], 0.5)).right_derivative();
        assert_eq!(one.eval(0.0), 0.0);
        assert_eq!(one.eval(1.0), 0.0);
        let two = convex_minorant(&path(&[0.0, -1.0, 0.0], 0.5)).right_derivative();
        assert_eq!(two.eval(0.49), -2.0);
        assert_eq!(two.eval(0.5), 2.0);
        assert_eq!(two.eval(1.0), 2.0);
    }

    #[test]
    fn slope_passage_cases() {
        let dec = convex_minorant(&path(&[0.0, -1.0, 0.0], 0.5));
        assert_eq!(dec.slope_passage(-5.0), 0.0);
        assert_eq!(dec.slope_passage(5.0), 1.0);
        assert_eq!(dec.slope_passage(0.0), 0.5);
        // Right-continuity at a slope value.
        assert_eq!(dec.slope_passage(-2.0), 0.5);
    }

    #[test]
    fn ranked_lengths_sorted() {
        let dec = MinorantDecomposition::from_vertices(&[0.0, 0.2, 0.7, 1.0], &[0.0, -1.0, -1.5, -1.0]).unwrap();
        let r = dec.ranked_lengths();
        for (a, b) in r.iter().zip([0.5, 0.3, 0.2]) {
            assert!((a - b).abs() < 1e-15);
        }
        let single = convex_minorant(&path(&[0.0, 1.0, 0.0], 0.5));
        assert_eq!(single.ranked_lengths(), vec![1.0]);
    }

    #[test]
    fn argmin_conventions() {
        assert_eq!(argmin(&path(&[0.0, -1.0, 0.0], 0.5)), (0.5, -1.0));
        assert_eq!(argmin(&path(&[0.0, 1.0, 2.0], 0.5)), (0.0, 0.0));
        assert_eq!(argmin(&path(&[0.0, -1.0, -1.0, 0.0], 1.0)), (2.0, -1.0));
    }

    #[test]
    fn excursion_is_path_minus_chord() {
        let p = path(&[0.0, -1.0, 0.0], 0.5);
        let dec = convex_minorant(&p);
        let e = excursion(&p, &dec.faces()[0]).unwrap();
        assert_eq!(e.values(), &[0.0, 0.0]);
        let p = path(&[0.0, 2.0, 2.5, 3.0], 1.0);
        let dec = convex_minorant(&p);
        assert_eq!(dec.len(), 1);
        let e = excursion(&p, &dec.faces()[0]).unwrap();
        assert_eq!(e.values(), &[0.0, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn excursion_rejects_misaligned_face() {
        let p = path(&[0.0, -1.0, 0.0], 0.5);
        let f = Face::new(0.1, 0.5, -1.0);
        assert!(matches!(excursion(&p, &f), Err(Error::Alignment(_))));
    }

    #[test]
    fn minorant_value_interpolates() {
        let dec = convex_minorant(&path(&[0.0, -1.0, 0.0], 0.5));
        assert_eq!(dec.value_at(0.25), -0.5);
        assert_eq!(dec.value_at(0.75), -0.5);
    }

    #[test]
    fn csv_header() {
        let dec = convex_minorant(&path(&[0.0, -1.0, 0.0], 0.5));
        let mut buf = Vec::new();
        dec.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("g,d,length,increment,slope"));
        assert_eq!(lines.count(), 2);
    }
}
