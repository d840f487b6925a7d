//! Closure engines: finite-region and torus fixpoints, half-plane + strip
//! dynamics for stable directions, the induced one-dimensional process, and
//! machine-checkable termination certificates.

mod oned;
mod strip;

pub use oned::{closure_1d, closure_1d_with, induced_1d, BoundMode, OneDFamily};
pub use strip::{
    half_plane_closure, replay_certificate, ClosureBudget, ClosureOutcome, ClosureStats,
    ClosureStatus, GrowthCertificate, HalfPlaneContext,
};

use crate::family::UpdateFamily;
use crate::geometry::{Direction, GeometryError, LatticePoint};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("direction {0} is unstable")]
    Unstable(Direction),
    #[error("direction {0} is not an isolated stable direction")]
    NotIsolatedStable(Direction),
    #[error("seed site {0} lies inside the half-plane")]
    SeedInHalfPlane(LatticePoint),
    #[error("site {0} is outside the region")]
    OutOfRegion(LatticePoint),
    #[error("region kind is not supported by this engine")]
    UnsupportedRegion,
    #[error("invalid one-dimensional family: {0}")]
    InvalidOneD(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The domain a finite closure runs on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Region {
    /// Inclusive coordinate ranges; sites outside are permanently healthy.
    Rectangle { x0: i64, x1: i64, y0: i64, y1: i64 },
    /// The n x n torus; coordinates wrap modulo n.
    Torus { n: i64 },
    /// Descriptor for strip simulations above a half-plane (handled by
    /// [`half_plane_closure`], not by [`closure_finite`]).
    HalfPlaneStrip { u: Direction, height: i64, half_width: i64 },
}

impl Region {
    pub fn rectangle(x0: i64, x1: i64, y0: i64, y1: i64) -> Region {
        assert!(x0 <= x1 && y0 <= y1);
        Region::Rectangle { x0, x1, y0, y1 }
    }

    pub fn torus(n: i64) -> Region {
        assert!(n >= 1);
        Region::Torus { n }
    }

    fn dims(&self) -> Option<(i64, i64, i64, i64)> {
        match self {
            Region::Rectangle { x0, x1, y0, y1 } => Some((*x0, *x1, *y0, *y1)),
            Region::Torus { n } => Some((0, n - 1, 0, n - 1)),
            Region::HalfPlaneStrip { .. } => None,
        }
    }
}

/// A monotone infection state over a finite region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfectionState {
    region: Region,
    width: i64,
    height: i64,
    bits: Vec<u64>,
    infected: u64,
    generation: u32,
}

impl InfectionState {
    fn empty(region: Region) -> Result<InfectionState, DynamicsError> {
        let (x0, x1, y0, y1) = region.dims().ok_or(DynamicsError::UnsupportedRegion)?;
        let width = x1 - x0 + 1;
        let height = y1 - y0 + 1;
        let cells = (width * height) as usize;
        Ok(InfectionState {
            region,
            width,
            height,
            bits: vec![0; (cells + 63) / 64],
            infected: 0,
            generation: 0,
        })
    }

    /// Maps a lattice point into the backing bit index, applying torus wrap.
    /// Returns `None` for rectangle sites outside the region.
    fn index(&self, x: i64, y: i64) -> Option<usize> {
        match &self.region {
            Region::Rectangle { x0, x1, y0, y1 } => {
                if x < *x0 || x > *x1 || y < *y0 || y > *y1 {
                    None
                } else {
                    Some(((x - x0) + (y - y0) * self.width) as usize)
                }
            }
            Region::Torus { n } => {
                let x = x.rem_euclid(*n);
                let y = y.rem_euclid(*n);
                Some((x + y * self.width) as usize)
            }
            Region::HalfPlaneStrip { .. } => None,
        }
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        match self.index(x, y) {
            Some(i) => self.bits[i / 64] >> (i % 64) & 1 == 1,
            None => false,
        }
    }

    fn set(&mut self, x: i64, y: i64) -> bool {
        let i = self.index(x, y).expect("site inside region");
        let word = &mut self.bits[i / 64];
        let mask = 1u64 << (i % 64);
        if *word & mask == 0 {
            *word |= mask;
            self.infected += 1;
            true
        } else {
            false
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn infected_count(&self) -> u64 {
        self.infected
    }

    /// Number of synchronous rounds until the fixpoint was reached.
    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn is_saturated(&self) -> bool {
        self.infected == (self.width * self.height) as u64
    }

    pub fn infected_points(&self) -> Vec<LatticePoint> {
        let (x0, _, y0, _) = self.region.dims().expect("finite region");
        let mut out = Vec::with_capacity(self.infected as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                let i = (x + y * self.width) as usize;
                if self.bits[i / 64] >> (i % 64) & 1 == 1 {
                    out.push(LatticePoint::new(x0 + x, y0 + y));
                }
            }
        }
        out
    }

    /// Portable text bitmap: one row per line, top row first, `#` infected.
    pub fn dump(&self) -> String {
        let (x0, x1, y0, y1) = self.region.dims().expect("finite region");
        let mut out = String::new();
        for y in (y0..=y1).rev() {
            for x in x0..=x1 {
                out.push(if self.contains(x, y) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

fn rule_fires(state: &InfectionState, family: &UpdateFamily, x: i64, y: i64) -> bool {
    family.rules().iter().any(|rule| {
        rule.sites().iter().all(|s| state.contains(x + s.x, y + s.y))
    })
}

/// Least fixpoint of the bootstrap dynamics on a rectangle or torus, computed
/// in synchronous rounds over a dirty frontier.
pub fn closure_finite(
    family: &UpdateFamily,
    region: Region,
    seeds: &[LatticePoint],
) -> Result<InfectionState, DynamicsError> {
    let mut state = InfectionState::empty(region)?;
    let mut frontier: Vec<(i64, i64)> = Vec::new();
    for s in seeds {
        if state.index(s.x, s.y).is_none() {
            return Err(DynamicsError::OutOfRegion(*s));
        }
        if state.set(s.x, s.y) {
            frontier.push((s.x, s.y));
        }
    }
    let mut stencil: Vec<(i64, i64)> = family
        .rules()
        .iter()
        .flat_map(|r| r.sites().iter().map(|s| (-s.x, -s.y)))
        .collect();
    stencil.sort();
    stencil.dedup();

    let mut candidates: Vec<(i64, i64)> = Vec::new();
    while !frontier.is_empty() {
        candidates.clear();
        for &(fx, fy) in &frontier {
            for &(dx, dy) in &stencil {
                let (x, y) = (fx + dx, fy + dy);
                if state.index(x, y).is_some() && !state.contains(x, y) {
                    candidates.push((x, y));
                }
            }
        }
        candidates.sort();
        candidates.dedup();
        // Evaluate against the current round's state, then apply, so that the
        // generation counter matches the synchronous dynamics.
        let newly: Vec<(i64, i64)> = candidates
            .iter()
            .copied()
            .filter(|&(x, y)| rule_fires(&state, family, x, y))
            .collect();
        frontier.clear();
        if newly.is_empty() {
            break;
        }
        state.generation += 1;
        for (x, y) in newly {
            if state.set(x, y) {
                frontier.push((x, y));
            }
        }
    }
    Ok(state)
}

/// Reference implementations used as independent oracles in tests. They scan
/// every cell of the region each round and stay deliberately unoptimized.
pub mod oracle {
    use super::*;

    /// Naive per-site synchronous fixpoint over the whole region.
    pub fn naive_closure(
        family: &UpdateFamily,
        region: Region,
        seeds: &[LatticePoint],
    ) -> Result<InfectionState, DynamicsError> {
        let mut state = InfectionState::empty(region)?;
        for s in seeds {
            if state.index(s.x, s.y).is_none() {
                return Err(DynamicsError::OutOfRegion(*s));
            }
            state.set(s.x, s.y);
        }
        let (x0, x1, y0, y1) = state.region.dims().expect("finite region");
        loop {
            let mut newly = Vec::new();
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if !state.contains(x, y) && rule_fires(&state, family, x, y) {
                        newly.push((x, y));
                    }
                }
            }
            if newly.is_empty() {
                return Ok(state);
            }
            state.generation += 1;
            for (x, y) in newly {
                state.set(x, y);
            }
        }
    }
}
