//! Network geometry: node placement, distances, interference levels and
//! cooperation neighborhoods.
//!
//! TX `i` and RX `i` share position `i`. Indices are zero-based in the API
//! and one-based in every text format (layout files, CSV).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Slack applied to the `dist <= d0` comparison so that pairs sitting on the
/// cooperation boundary are always included.
pub const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Positions of the `K` TX/RX pairs. Coincident points are allowed and model
/// a multi-antenna transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLayout {
    positions: Vec<Point>,
}

impl NodeLayout {
    pub fn new(positions: Vec<Point>) -> Result<Self> {
        if positions.is_empty() {
            return Err(invalid("layout needs at least one node"));
        }
        if let Some(i) = positions.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(invalid(format!("node {} has a non-finite coordinate", i + 1)));
        }
        Ok(NodeLayout { positions })
    }

    /// `side x side` nodes at the integer points `{1..side}^2`, row-major
    /// (node index `i` sits at `x = 1 + i % side`, `y = 1 + i / side`).
    pub fn grid(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(invalid("grid side must be >= 1"));
        }
        let positions = (0..side * side)
            .map(|i| Point::new((1 + i % side) as f64, (1 + i / side) as f64))
            .collect();
        Ok(NodeLayout { positions })
    }

    /// `k` i.i.d. uniform points in `[0, side]^2`.
    pub fn uniform_random<R: Rng + ?Sized>(k: usize, side: f64, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(invalid("need at least one node"));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(invalid(format!("square side must be positive, got {side}")));
        }
        let positions = (0..k)
            .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
            .collect();
        Ok(NodeLayout { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Side length when this layout is exactly the row-major integer grid
    /// produced by [`NodeLayout::grid`].
    pub fn grid_side(&self) -> Option<usize> {
        let k = self.len();
        let side = (k as f64).sqrt().round() as usize;
        if side * side != k {
            return None;
        }
        let matches = self
            .positions
            .iter()
            .enumerate()
            .all(|(i, p)| p.x == (1 + i % side) as f64 && p.y == (1 + i / side) as f64);
        matches.then_some(side)
    }

    pub fn distances(&self) -> DMatrix<f64> {
        pairwise_distance(self)
    }

    /// One `x y` pair per line; line `n` is node `n`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.positions {
            writeln!(out, "{} {}", p.x, p.y).unwrap();
        }
        out
    }

    /// Parses the layout text format. Blank lines and `#` comments are
    /// skipped.
    pub fn from_text(text: &str) -> std::result::Result<Self, String> {
        let mut positions = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(format!("line {}: expected `x y`, got {:?}", n + 1, line));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}: {s:?}", n + 1));
            positions.push(Point::new(parse(fields[0])?, parse(fields[1])?));
        }
        NodeLayout::new(positions).map_err(|e| e.to_string())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        NodeLayout::from_text(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Euclidean distance matrix of a layout.
pub fn pairwise_distance(layout: &NodeLayout) -> DMatrix<f64> {
    let p = layout.positions();
    let k = p.len();
    DMatrix::from_fn(k, k, |a, b| if a == b { 0.0 } else { p[a].distance(&p[b]) })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("gamma must lie in (0, 1], got {gamma}")))
    }
}

/// Interference-level matrix: `entries[(k, i)]` is the exponent such that the
/// power received at RX `k` from TX `i` scales as `P^entries[(k, i)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceLevels {
    pub gamma: f64,
    pub entries: DMatrix<f64>,
}

/// `Gamma_ki = 1 + (gamma - 1) * dist(k, i)`.
pub fn interference_levels(distances: &DMatrix<f64>, gamma: f64) -> Result<InterferenceLevels> {
    check_gamma(gamma)?;
    if !distances.is_square() {
        return Err(invalid("distance matrix must be square"));
    }
    let entries = distances.map(|d| 1.0 + (gamma - 1.0) * d);
    Ok(InterferenceLevels { gamma, entries })
}

/// `d0 = 1 / (1 - gamma)`: beyond this distance neither CSI nor data needs to
/// be shared.
pub fn cooperation_radius(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 1.0 {
        return Err(Error::UnboundedRadius);
    }
    Ok(1.0 / (1.0 - gamma))
}

/// `K_j = { i : dist(i, j) <= d0 }` for every TX `j`, sorted ascending.
/// At `gamma = 1` every set holds all nodes.
pub fn data_sharing_sets(layout: &NodeLayout, gamma: f64) -> Result<Vec<Vec<usize>>> {
    check_gamma(gamma)?;
    let k = layout.len();
    if gamma == 1.0 {
        return Ok(vec![(0..k).collect(); k]);
    }
    let d0 = cooperation_radius(gamma)?;
    let dist = pairwise_distance(layout);
    Ok((0..k)
        .map(|j| (0..k).filter(|&i| dist[(i, j)] <= d0 + BOUNDARY_EPS).collect())
        .collect())
}
