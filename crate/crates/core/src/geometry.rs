//! Unit cell and ε-periodic perforated domain on uniform 2D pixel grids.
//!
//! The solid inclusion is represented by a staircase of grid cells. Cell
//! `(i, j)` has index `j * n + i` with `i` running along `x1`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Outward normal of a grid-cell face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normal {
    East,
    West,
    North,
    South,
}

impl Normal {
    pub const ALL: [Normal; 4] = [Normal::East, Normal::West, Normal::North, Normal::South];

    pub fn offset(self) -> (isize, isize) {
        match self {
            Normal::East => (1, 0),
            Normal::West => (-1, 0),
            Normal::North => (0, 1),
            Normal::South => (0, -1),
        }
    }

    pub fn vector(self) -> [f64; 2] {
        let (a, b) = self.offset();
        [a as f64, b as f64]
    }
}

/// Solid inclusion placed at the centre of the unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inclusion {
    None,
    Disk { radius: f64 },
    Square { side: f64 },
}

impl Inclusion {
    fn contains(&self, y: [f64; 2]) -> bool {
        let (dx, dy) = (y[0] - 0.5, y[1] - 0.5);
        match *self {
            Inclusion::None => false,
            Inclusion::Disk { radius } => dx * dx + dy * dy < radius * radius,
            Inclusion::Square { side } => dx.abs() < 0.5 * side && dy.abs() < 0.5 * side,
        }
    }
}

impl fmt::Display for Inclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inclusion::None => write!(f, "none"),
            Inclusion::Disk { radius } => write!(f, "disk:{radius}"),
            Inclusion::Square { side } => write!(f, "square:{side}"),
        }
    }
}

impl FromStr for Inclusion {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "none" {
            return Ok(Inclusion::None);
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("expected none, disk:<radius> or square:<side>, got `{s}`"))?;
        let val: f64 = arg
            .trim()
            .parse()
            .map_err(|_| format!("bad number `{arg}`"))?;
        match kind.trim() {
            "disk" => Ok(Inclusion::Disk { radius: val }),
            "square" => Ok(Inclusion::Square { side: val }),
            other => Err(format!("unknown inclusion shape `{other}`")),
        }
    }
}

/// A pore/solid interface face: the pore cell and the normal pointing into the solid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellFace {
    pub cell: usize,
    pub normal: Normal,
}

/// Discretized periodicity cell `Y = Y^p ∪ Y^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCell {
    resolution: usize,
    pore_mask: Vec<bool>,
    boundary_faces: Vec<CellFace>,
    pore_volume: f64,
    boundary_measure: f64,
}

impl UnitCell {
    /// Rasterizes `inclusion` on a `resolution x resolution` grid (cell centres test).
    pub fn new(resolution: usize, inclusion: Inclusion) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::Geometry(format!(
                "resolution must be at least 8, got {resolution}"
            )));
        }
        match inclusion {
            Inclusion::Disk { radius } if !(radius > 0.0) => {
                return Err(Error::Geometry(format!("disk radius must be positive, got {radius}")))
            }
            Inclusion::Square { side } if !(side > 0.0) => {
                return Err(Error::Geometry(format!("square side must be positive, got {side}")))
            }
            _ => {}
        }
        let n = resolution;
        let h = 1.0 / n as f64;
        let mut mask = vec![true; n * n];
        for j in 0..n {
            for i in 0..n {
                let y = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
                mask[j * n + i] = !inclusion.contains(y);
            }
        }
        Self::from_mask(resolution, mask)
    }

    /// Builds a cell from an explicit pore mask and checks all invariants.
    pub fn from_mask(resolution: usize, pore_mask: Vec<bool>) -> Result<Self> {
        let n = resolution;
        if n < 8 {
            return Err(Error::Geometry(format!(
                "resolution must be at least 8, got {n}"
            )));
        }
        if pore_mask.len() != n * n {
            return Err(Error::Geometry(format!(
                "mask has {} entries, expected {}",
                pore_mask.len(),
                n * n
            )));
        }
        let n_pore = pore_mask.iter().filter(|&&p| p).count();
        if n_pore == 0 {
            return Err(Error::EmptyPore);
        }
        for k in 0..n {
            for idx in [k, (n - 1) * n + k, k * n, k * n + n - 1] {
                if !pore_mask[idx] {
                    return Err(Error::Geometry(
                        "solid inclusion touches the unit-cell boundary".into(),
                    ));
                }
            }
        }
        if !periodic_connected(n, &pore_mask) {
            return Err(Error::Geometry("pore space is not connected".into()));
        }
        let mut boundary_faces = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let c = j * n + i;
                if !pore_mask[c] {
                    continue;
                }
                for normal in Normal::ALL {
                    let (di, dj) = normal.offset();
                    let ni = (i as isize + di).rem_euclid(n as isize) as usize;
                    let nj = (j as isize + dj).rem_euclid(n as isize) as usize;
                    if !pore_mask[nj * n + ni] {
                        boundary_faces.push(CellFace { cell: c, normal });
                    }
                }
            }
        }
        let pore_volume = n_pore as f64 / (n * n) as f64;
        let boundary_measure = boundary_faces.len() as f64 / n as f64;
        Ok(UnitCell {
            resolution,
            pore_mask,
            boundary_faces,
            pore_volume,
            boundary_measure,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn pore_mask(&self) -> &[bool] {
        &self.pore_mask
    }

    pub fn is_pore(&self, i: usize, j: usize) -> bool {
        self.pore_mask[j * self.resolution + i]
    }

    pub fn boundary_faces(&self) -> &[CellFace] {
        &self.boundary_faces
    }

    /// `|Y^p|` for the unit cell `|Y| = 1`.
    pub fn pore_volume(&self) -> f64 {
        self.pore_volume
    }

    /// `|Γ|`.
    pub fn boundary_measure(&self) -> f64 {
        self.boundary_measure
    }

    pub fn n_pore(&self) -> usize {
        self.pore_mask.iter().filter(|&&p| p).count()
    }

    pub fn has_solid(&self) -> bool {
        self.pore_mask.iter().any(|&p| !p)
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let n = self.resolution;
        let h = self.spacing();
        [((idx % n) as f64 + 0.5) * h, ((idx / n) as f64 + 0.5) * h]
    }

    /// Largest number of solid faces adjacent to a single pore cell.
    pub fn max_faces_per_cell(&self) -> usize {
        let mut count = vec![0usize; self.pore_mask.len()];
        for f in &self.boundary_faces {
            count[f.cell] += 1;
        }
        count.into_iter().max().unwrap_or(0)
    }

    /// The cell rotated by 90° counter-clockwise: `(y1, y2) -> (1 - y2, y1)`.
    pub fn rotated(&self) -> Result<Self> {
        let n = self.resolution;
        Self::from_mask(n, rotate_grid(n, &self.pore_mask))
    }
}

/// Rotates cell data by 90° counter-clockwise; see [`UnitCell::rotated`].
pub fn rotate_grid<T: Clone>(n: usize, data: &[T]) -> Vec<T> {
    let mut out = data.to_vec();
    for j in 0..n {
        for i in 0..n {
            // new(i', j') = old(i, j) with i' = n-1-j, j' = i
            out[i * n + (n - 1 - j)] = data[j * n + i].clone();
        }
    }
    out
}

fn periodic_connected(n: usize, mask: &[bool]) -> bool {
    let start = match mask.iter().position(|&p| p) {
        Some(s) => s,
        None => return false,
    };
    let mut seen = vec![false; mask.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(c) = queue.pop_front() {
        let (i, j) = (c % n, c / n);
        for normal in Normal::ALL {
            let (di, dj) = normal.offset();
            let ni = (i as isize + di).rem_euclid(n as isize) as usize;
            let nj = (j as isize + dj).rem_euclid(n as isize) as usize;
            let k = nj * n + ni;
            if mask[k] && !seen[k] {
                seen[k] = true;
                count += 1;
                queue.push_back(k);
            }
        }
    }
    count == mask.iter().filter(|&&p| p).count()
}

/// One edge of the square macroscopic domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub fn outward_normal(self) -> Normal {
        match self {
            Edge::Left => Normal::West,
            Edge::Right => Normal::East,
            Edge::Bottom => Normal::South,
            Edge::Top => Normal::North,
        }
    }

    /// Grid cells `(i, j)` adjacent to this edge on an `n x n` grid.
    pub fn cells(self, n: usize) -> Vec<(usize, usize)> {
        (0..n)
            .map(|k| match self {
                Edge::Left => (0, k),
                Edge::Right => (n - 1, k),
                Edge::Bottom => (k, 0),
                Edge::Top => (k, n - 1),
            })
            .collect()
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        };
        f.write_str(s)
    }
}

impl FromStr for Edge {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "left" => Ok(Edge::Left),
            "right" => Ok(Edge::Right),
            "bottom" => Ok(Edge::Bottom),
            "top" => Ok(Edge::Top),
            other => Err(format!("unknown edge `{other}`")),
        }
    }
}

/// A face of the global grid with its midpoint and length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainFace {
    pub cell: usize,
    pub normal: Normal,
    pub center: [f64; 2],
    pub length: f64,
}

/// ε-scaled tiling of a [`UnitCell`] over the square `Ω = (0, L)²`.
#[derive(Debug, Clone)]
pub struct PerforatedDomain {
    cell: UnitCell,
    epsilon: f64,
    tiles: usize,
    extent: f64,
    n: usize,
    dx: f64,
    pore_mask: Vec<bool>,
    gamma_faces: Vec<DomainFace>,
    inflow_faces: Vec<DomainFace>,
    outflow_faces: Vec<DomainFace>,
}

impl PerforatedDomain {
    /// Tiles `Ω` with `L/ε` copies of the cell per side; in/outflow on the left/right edges.
    pub fn new(cell: &UnitCell, epsilon: f64, extent: f64) -> Result<Self> {
        Self::with_edges(cell, epsilon, extent, Edge::Left, Edge::Right)
    }

    pub fn with_edges(
        cell: &UnitCell,
        epsilon: f64,
        extent: f64,
        inflow: Edge,
        outflow: Edge,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= extent) {
            return Err(Error::Tiling(format!(
                "epsilon must lie in (0, {extent}], got {epsilon}"
            )));
        }
        if !(extent > 0.0) {
            return Err(Error::Tiling(format!("extent must be positive, got {extent}")));
        }
        if inflow == outflow {
            return Err(Error::Tiling("inflow and outflow edges coincide".into()));
        }
        let ratio = extent / epsilon;
        let tiles = ratio.round() as usize;
        if tiles == 0 || (ratio - tiles as f64).abs() > 1e-9 * ratio {
            return Err(Error::Tiling(format!(
                "extent/epsilon = {ratio} is not an integer; tiles would not align"
            )));
        }
        let r = cell.resolution();
        let n = tiles * r;
        let dx = extent / n as f64;
        let mut pore_mask = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                pore_mask[j * n + i] = cell.is_pore(i % r, j % r);
            }
        }
        let face = |c: usize, normal: Normal| {
            let (i, j) = (c % n, c / n);
            let (di, dj) = normal.offset();
            DomainFace {
                cell: c,
                normal,
                center: [
                    (i as f64 + 0.5 + 0.5 * di as f64) * dx,
                    (j as f64 + 0.5 + 0.5 * dj as f64) * dx,
                ],
                length: dx,
            }
        };
        let mut gamma_faces = Vec::with_capacity(tiles * tiles * cell.boundary_faces().len());
        for j in 0..n {
            for i in 0..n {
                let c = j * n + i;
                if !pore_mask[c] {
                    continue;
                }
                for normal in Normal::ALL {
                    let (di, dj) = normal.offset();
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                        continue;
                    }
                    if !pore_mask[nj as usize * n + ni as usize] {
                        gamma_faces.push(face(c, normal));
                    }
                }
            }
        }
        let edge_faces = |edge: Edge| -> Vec<DomainFace> {
            edge.cells(n)
                .into_iter()
                .map(|(i, j)| j * n + i)
                .filter(|&c| pore_mask[c])
                .map(|c| face(c, edge.outward_normal()))
                .collect()
        };
        let inflow_faces = edge_faces(inflow);
        let outflow_faces = edge_faces(outflow);
        Ok(PerforatedDomain {
            cell: cell.clone(),
            epsilon,
            tiles,
            extent,
            n,
            dx,
            pore_mask,
            gamma_faces,
            inflow_faces,
            outflow_faces,
        })
    }

    pub fn cell(&self) -> &UnitCell {
        &self.cell
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn tiles(&self) -> usize {
        self.tiles
    }
    pub fn extent(&self) -> f64 {
        self.extent
    }
    /// Grid cells per side.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn pore_mask(&self) -> &[bool] {
        &self.pore_mask
    }
    pub fn gamma_faces(&self) -> &[DomainFace] {
        &self.gamma_faces
    }
    pub fn inflow_faces(&self) -> &[DomainFace] {
        &self.inflow_faces
    }
    pub fn outflow_faces(&self) -> &[DomainFace] {
        &self.outflow_faces
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        [
            ((idx % self.n) as f64 + 0.5) * self.dx,
            ((idx / self.n) as f64 + 0.5) * self.dx,
        ]
    }

    /// Fraction of `Ω` occupied by pores.
    pub fn pore_fraction(&self) -> f64 {
        self.pore_mask.iter().filter(|&&p| p).count() as f64 / (self.n * self.n) as f64
    }

    /// `|Γ*_ε|`, the total interface length.
    pub fn gamma_length(&self) -> f64 {
        self.gamma_faces.iter().map(|f| f.length).sum()
    }

    /// `ε |Γ*_ε|`, which equals `|Γ| |Ω| / |Y|` for an exact tiling.
    pub fn eps_gamma_length(&self) -> f64 {
        self.epsilon * self.gamma_length()
    }

    /// Number of inclusions (tiles holding solid).
    pub fn inclusion_count(&self) -> usize {
        if self.cell.has_solid() {
            self.tiles * self.tiles
        } else {
            0
        }
    }
}
