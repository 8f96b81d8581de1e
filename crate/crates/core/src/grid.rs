//! Lattice geometry: site indexing, observation masks, the checkerboard
//! partition and the three interaction neighbourhoods.
//!
//! Sites are indexed row-major, `i = y * lx + x`. Boundaries are free: a
//! neighbour that would fall off the grid is simply absent.

use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    pub lx: usize,
    pub ly: usize,
}

impl GridDims {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        let dims = GridDims { lx, ly };
        dims.validate()?;
        Ok(dims)
    }

    pub fn square(l: usize) -> Result<Self> {
        Self::new(l, l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lx < 2 || self.ly < 2 {
            return Err(GprError::Dimension {
                lx: self.lx,
                ly: self.ly,
            });
        }
        Ok(())
    }

    /// Total number of sites.
    #[inline]
    pub fn len(&self) -> usize {
        self.lx * self.ly
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.lx && y < self.ly);
        y * self.lx + x
    }

    #[inline]
    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.lx, site / self.lx)
    }

    /// Site reached from `site` by `(dx, dy)`, or `None` off the grid.
    #[inline]
    pub fn offset(&self, site: usize, dx: isize, dy: isize) -> Option<usize> {
        let (x, y) = self.coords(site);
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        if nx < 0 || ny < 0 || nx >= self.lx as isize || ny >= self.ly as isize {
            None
        } else {
            Some(self.index(nx as usize, ny as usize))
        }
    }
}

/// Real-valued field on the full grid, in data units.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub dims: GridDims,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(dims: GridDims, values: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if values.len() != dims.len() {
            return Err(GprError::Length {
                expected: dims.len(),
                actual: values.len(),
            });
        }
        Ok(GridField { dims, values })
    }

    pub fn filled(dims: GridDims, value: f64) -> Self {
        GridField {
            dims,
            values: vec![value; dims.len()],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.dims.index(x, y)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    pub dims: GridDims,
    pub observed: Vec<bool>,
}

impl ObservationMask {
    pub fn new(dims: GridDims, observed: Vec<bool>) -> Result<Self> {
        dims.validate()?;
        if observed.len() != dims.len() {
            return Err(GprError::Length {
                expected: dims.len(),
                actual: observed.len(),
            });
        }
        Ok(ObservationMask { dims, observed })
    }

    pub fn all_observed(dims: GridDims) -> Self {
        ObservationMask {
            dims,
            observed: vec![true; dims.len()],
        }
    }

    #[inline]
    pub fn is_observed(&self, site: usize) -> bool {
        self.observed[site]
    }

    pub fn n_observed(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn n_missing(&self) -> usize {
        self.observed.len() - self.n_observed()
    }

    pub fn observed_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.observed
            .iter()
            .enumerate()
            .filter_map(|(i, &o)| o.then_some(i))
    }

    pub fn missing_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.observed
            .iter()
            .enumerate()
            .filter_map(|(i, &o)| (!o).then_some(i))
    }
}

/// Sample and prediction counts `(N, P)` of a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskCounts {
    pub observed: usize,
    pub missing: usize,
}

pub fn validate_mask(mask: &ObservationMask, dims: GridDims) -> Result<MaskCounts> {
    dims.validate()?;
    if mask.observed.len() != dims.len() || mask.dims != dims {
        return Err(GprError::Length {
            expected: dims.len(),
            actual: mask.observed.len(),
        });
    }
    let observed = mask.n_observed();
    if observed == 0 {
        return Err(GprError::EmptySample);
    }
    Ok(MaskCounts {
        observed,
        missing: dims.len() - observed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    A,
    B,
}

impl Parity {
    #[inline]
    pub fn of(x: usize, y: usize) -> Parity {
        if (x + y).is_multiple_of(2) {
            Parity::A
        } else {
            Parity::B
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckerboardPartition {
    pub dims: GridDims,
    pub parity: Vec<Parity>,
    pub a_sites: Vec<usize>,
    pub b_sites: Vec<usize>,
}

impl CheckerboardPartition {
    pub fn sites(&self, parity: Parity) -> &[usize] {
        match parity {
            Parity::A => &self.a_sites,
            Parity::B => &self.b_sites,
        }
    }
}

pub fn checkerboard_partition(dims: GridDims) -> CheckerboardPartition {
    let parity: Vec<Parity> = (0..dims.len())
        .map(|i| {
            let (x, y) = dims.coords(i);
            Parity::of(x, y)
        })
        .collect();
    let a_sites = (0..dims.len()).filter(|&i| parity[i] == Parity::A).collect();
    let b_sites = (0..dims.len()).filter(|&i| parity[i] == Parity::B).collect();
    CheckerboardPartition {
        dims,
        parity,
        a_sites,
        b_sites,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeighborClass {
    NnX,
    NnY,
    Fn,
}

impl NeighborClass {
    pub const ALL: [NeighborClass; 3] = [NeighborClass::NnX, NeighborClass::NnY, NeighborClass::Fn];

    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            NeighborClass::NnX => &NN_X_OFFSETS,
            NeighborClass::NnY => &NN_Y_OFFSETS,
            NeighborClass::Fn => &FN_OFFSETS,
        }
    }
}

const NN_X_OFFSETS: [(isize, isize); 2] = [(-1, 0), (1, 0)];
const NN_Y_OFFSETS: [(isize, isize); 2] = [(0, -1), (0, 1)];
// knight's moves, lexicographic
const FN_OFFSETS: [(isize, isize); 8] = [
    (-2, -1),
    (-2, 1),
    (-1, -2),
    (-1, 2),
    (1, -2),
    (1, 2),
    (2, -1),
    (2, 1),
];

/// Compressed per-site adjacency for one interaction class.
#[derive(Debug, Clone)]
pub struct Adjacency {
    starts: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Adjacency {
    #[inline]
    pub fn of(&self, site: usize) -> &[usize] {
        &self.neighbors[self.starts[site]..self.starts[site + 1]]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.starts[site + 1] - self.starts[site]
    }
}

/// Interaction pairs for the three neighbour classes. Each pair is stored once
/// as `(i, j)` with `i < j`, ordered by `i` then by offset.
#[derive(Debug, Clone)]
pub struct NeighborTables {
    pub dims: GridDims,
    pub nn_x: Vec<(usize, usize)>,
    pub nn_y: Vec<(usize, usize)>,
    pub fn_pairs: Vec<(usize, usize)>,
    adj_nn_x: Adjacency,
    adj_nn_y: Adjacency,
    adj_fn: Adjacency,
}

impl NeighborTables {
    pub fn pairs(&self, class: NeighborClass) -> &[(usize, usize)] {
        match class {
            NeighborClass::NnX => &self.nn_x,
            NeighborClass::NnY => &self.nn_y,
            NeighborClass::Fn => &self.fn_pairs,
        }
    }

    pub fn adjacency(&self, class: NeighborClass) -> &Adjacency {
        match class {
            NeighborClass::NnX => &self.adj_nn_x,
            NeighborClass::NnY => &self.adj_nn_y,
            NeighborClass::Fn => &self.adj_fn,
        }
    }

    #[inline]
    pub fn neighbors(&self, class: NeighborClass, site: usize) -> &[usize] {
        self.adjacency(class).of(site)
    }
}

fn build_class(dims: GridDims, class: NeighborClass) -> (Vec<(usize, usize)>, Adjacency) {
    let mut starts = Vec::with_capacity(dims.len() + 1);
    let mut neighbors = Vec::new();
    let mut pairs = Vec::new();
    starts.push(0);
    for site in 0..dims.len() {
        for &(dx, dy) in class.offsets() {
            if let Some(j) = dims.offset(site, dx, dy) {
                neighbors.push(j);
                if site < j {
                    pairs.push((site, j));
                }
            }
        }
        starts.push(neighbors.len());
    }
    (pairs, Adjacency { starts, neighbors })
}

pub fn build_neighbor_tables(dims: GridDims) -> Result<NeighborTables> {
    dims.validate()?;
    let (nn_x, adj_nn_x) = build_class(dims, NeighborClass::NnX);
    let (nn_y, adj_nn_y) = build_class(dims, NeighborClass::NnY);
    let (fn_pairs, adj_fn) = build_class(dims, NeighborClass::Fn);
    Ok(NeighborTables {
        dims,
        nn_x,
        nn_y,
        fn_pairs,
        adj_nn_x,
        adj_nn_y,
        adj_fn,
    })
}
