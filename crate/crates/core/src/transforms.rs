//! Piece rearrangements of grid paths: Vervaat, Knight bridges, the
//! three-point transforms and face discovery by uniform points.
//!
//! Every transform works on grid indices with piecewise-constant semantics.
//! Paths that do not start at zero are transformed relative to their first value.

use crate::error::{Error, Result};
use crate::minorant::{argmin, convex_minorant, Face, MinorantDecomposition};
use crate::path::GridPath;
use crate::rng::RngStream;

/// Outcome of [`invariant_transform`].
#[derive(Clone, Debug, PartialEq)]
pub struct TransformResult {
    /// The face straddling the uniform point.
    pub face: Face,
    pub transformed: GridPath,
    pub uniform_length: f64,
}

/// Cyclic shift of the increments so the path starts at its last minimum, lifted to start at zero.
pub fn vervaat(path: &GridPath) -> GridPath {
    let v = path.values();
    let n = path.n_steps();
    let rho = path.index_of(argmin(path).0).expect("argmin is a grid time");
    let min = v[rho];
    let head = n - rho;
    let mut out = Vec::with_capacity(n + 1);
    out.extend(v[rho..].iter().map(|x| x - min));
    let top = v[n] - min;
    out.extend(v[1..=rho].iter().map(|x| top + (x - v[0])));
    debug_assert_eq!(out.len(), n + 1);
    debug_assert_eq!(out[head], top);
    GridPath::new(path.t0(), path.dt(), out).expect("shifted values stay finite")
}

/// Segment of `path` over `[s_start, s_end]` with its chord removed, started at time 0.
pub fn knight_bridge(path: &GridPath, s_start: f64, s_end: f64) -> Result<GridPath> {
    let i = path.index_of(s_start)?;
    let j = path.index_of(s_end)?;
    if i >= j {
        return Err(Error::Domain(format!("bridge needs s_start < s_end, got [{s_start}, {s_end}]")));
    }
    let v = path.values();
    let m = (j - i) as f64;
    let rise = v[j] - v[i];
    let mut out: Vec<f64> = (0..=j - i)
        .map(|l| (v[i + l] - v[i]) - (l as f64 / m) * rise)
        .collect();
    out[j - i] = 0.0;
    GridPath::new(0.0, path.dt(), out)
}

fn ordered_indices(path: &GridPath, u1: f64, u2: f64, u3: f64) -> Result<(usize, usize, usize)> {
    let k1 = path.index_of(u1)?;
    let k2 = path.index_of(u2)?;
    let k3 = path.index_of(u3)?;
    if !(k1 <= k2 && k2 <= k3 && k1 < k3) {
        return Err(Error::Domain(format!(
            "need u1 <= u2 <= u3 with u1 < u3, got ({u1}, {u2}, {u3})"
        )));
    }
    Ok((k1, k2, k3))
}

/// Shared layout of the two three-point transforms. `mid(s)` and `low(s)` give
/// the values (relative to the path's start) of the second and third pieces.
fn rearrange(
    path: &GridPath,
    (k1, k2, k3): (usize, usize, usize),
    mid: impl Fn(usize) -> f64,
    low: impl Fn(usize) -> f64,
) -> GridPath {
    let v = path.values();
    let v0 = v[0];
    let mut out = Vec::with_capacity(v.len());
    out.extend((0..k3 - k2).map(|j| v0 + (v[k2 + j] - v[k2])));
    out.extend((0..=k2 - k1).map(|s| v0 + mid(s)));
    out.extend((1..k1).map(|s| v0 + low(s)));
    if k1 > 0 {
        out.push(v[k3]);
    }
    out.extend_from_slice(&v[k3 + 1..]);
    // When the third piece is empty the second ends at k3; keep the original value there.
    out[k3] = v[k3];
    debug_assert_eq!(out.len(), v.len());
    GridPath::new(path.t0(), path.dt(), out).expect("rearranged values stay finite")
}

/// The rearrangement `φ_{u1,u2,u3}`: the `(u2, u3)` piece first, then `(u1, u2)`,
/// then `(0, u1)`, with the path after `u3` untouched.
pub fn three_point_transform(path: &GridPath, u1: f64, u2: f64, u3: f64) -> Result<GridPath> {
    let (k1, k2, k3) = ordered_indices(path, u1, u2, u3)?;
    let v = path.values();
    let a = v[k3] - v[k2];
    let b = v[k3] - v[k1];
    Ok(rearrange(
        path,
        (k1, k2, k3),
        |s| a + (v[k1 + s] - v[k1]),
        |s| b + (v[s] - v[0]),
    ))
}

/// Like [`three_point_transform`], but the later pieces are offset by the
/// minorant's rise `c(u3) − c(u1)` rather than the path's.
pub fn psi_transform(path: &GridPath, dec: &MinorantDecomposition, u1: f64, u2: f64, u3: f64) -> Result<GridPath> {
    let (k1, k2, k3) = ordered_indices(path, u1, u2, u3)?;
    let times = dec.vertex_times();
    let vertex = |u: f64, k: usize| -> Result<f64> {
        let t = path.time(k);
        times
            .iter()
            .position(|&x| (x - t).abs() <= 1e-9 * path.dt())
            .map(|i| dec.vertex_values()[i])
            .ok_or_else(|| Error::Domain(format!("{u} is not a vertex of the minorant")))
    };
    let rise = vertex(u3, k3)? - vertex(u1, k1)?;
    let v = path.values();
    Ok(rearrange(
        path,
        (k1, k2, k3),
        |s| rise + (v[k1 + s] - v[k2]),
        |s| rise + (v[s] - v[0]),
    ))
}

/// Brings the minorant face straddling `u` to the front of the path.
///
/// A `u` strictly between grid points selects the same face as the next grid
/// point to its right, which is where the path is cut.
pub fn invariant_transform(path: &GridPath, u: f64) -> Result<TransformResult> {
    let dec = convex_minorant(path);
    transform_with(path, &dec, u)
}

fn transform_with(path: &GridPath, dec: &MinorantDecomposition, u: f64) -> Result<TransformResult> {
    let face = *dec.face_containing(u)?;
    let k = ((u - path.t0()) / path.dt()).ceil();
    let u2 = path.time(k as usize).clamp(face.g, face.d);
    let transformed = psi_transform(path, dec, face.g, u2, face.d)?;
    Ok(TransformResult {
        face,
        transformed,
        uniform_length: face.length,
    })
}

/// One round of [`recursive_face_discovery`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscoveryStep {
    /// Face length as a fraction of the path it was discovered in.
    pub relative_length: f64,
    /// The face, in the time coordinates of the path it was discovered in.
    pub face: Face,
    /// What remains after the face is cut out and the gap closed; `None` once nothing remains.
    pub residual: Option<GridPath>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discovery {
    pub steps: Vec<DiscoveryStep>,
    /// The discovered excursions laid end to end, followed by the final residual.
    pub transformed: GridPath,
    /// Uniform points that landed on a vertex and were redrawn.
    pub collisions: u64,
    /// Set when the path was used up before `k` faces were found.
    pub stopped_early: bool,
}

/// Repeatedly discovers the face straddling a fresh uniform point, removes it
/// and closes up the gap, `k` times or until the path is exhausted.
pub fn recursive_face_discovery(path: &GridPath, k: usize, rng: &mut RngStream) -> Result<Discovery> {
    if k == 0 {
        return Err(Error::Domain("number of faces to discover must be at least 1".into()));
    }
    let dt = path.dt();
    let start = path.values()[0];
    let mut residual = GridPath::new(0.0, dt, path.values().iter().map(|x| x - start).collect())?;
    let mut prefix = vec![start];
    let mut steps = Vec::with_capacity(k);
    let mut collisions = 0u64;
    let mut finished = false;
    while steps.len() < k {
        let dec = convex_minorant(&residual);
        let result = loop {
            let u = rng.open01() * residual.duration();
            match transform_with(&residual, &dec, u) {
                Err(Error::VertexCollision(_)) => collisions += 1,
                other => break other?,
            }
        };
        let x = result.transformed.values();
        let m = residual.index_of(result.face.d)? - residual.index_of(result.face.g)?;
        let base = prefix[prefix.len() - 1];
        prefix.extend(x[1..=m].iter().map(|y| base + y));
        let rest: Vec<f64> = x[m..].iter().map(|y| y - x[m]).collect();
        let next = if rest.len() >= 2 {
            Some(GridPath::new(0.0, dt, rest)?)
        } else {
            None
        };
        steps.push(DiscoveryStep {
            relative_length: m as f64 / residual.n_steps() as f64,
            face: result.face,
            residual: next.clone(),
        });
        match next {
            Some(p) => residual = p,
            None => {
                finished = true;
                break;
            }
        }
    }
    if !finished {
        let base = prefix[prefix.len() - 1];
        prefix.extend(residual.values()[1..].iter().map(|y| base + y));
    }
    Ok(Discovery {
        stopped_early: finished && steps.len() < k,
        transformed: GridPath::new(path.t0(), dt, prefix)?,
        steps,
        collisions,
    })
}

/// Rotates a slice of increments so that `[u2..u3]`, `[u1..u2]`, `[..u1]` come first.
#[cfg(test)]
fn permuted_increments(inc: &[f64], k1: usize, k2: usize, k3: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(inc.len());
    out.extend_from_slice(&inc[k2..k3]);
    out.extend_from_slice(&inc[k1..k2]);
    out.extend_from_slice(&inc[..k1]);
    out.extend_from_slice(&inc[k3..]);
    out
}
