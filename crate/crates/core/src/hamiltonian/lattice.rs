use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Periodic,
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Geometry {
    Chain(BoundaryCondition),
    /// Row-major sites: axis 0 varies slowest.
    Hypercubic {
        lengths: Vec<usize>,
        bcs: Vec<BoundaryCondition>,
    },
}

/// Sites, local Hilbert space dimension and connectivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    num_sites: usize,
    local_dim: usize,
    geometry: Geometry,
}

impl Lattice {
    /// Qubit chain.
    pub fn chain(num_sites: usize, bc: BoundaryCondition) -> Self {
        Self {
            num_sites: num_sites.max(1),
            local_dim: 2,
            geometry: Geometry::Chain(bc),
        }
    }

    /// Qubit hypercubic lattice with the given axis lengths.
    pub fn hypercubic(lengths: Vec<usize>, bcs: Vec<BoundaryCondition>) -> Result<Self> {
        if lengths.is_empty() || lengths.contains(&0) {
            return Err(Error::input("hypercubic lattice needs positive axis lengths"));
        }
        if bcs.len() != lengths.len() {
            return Err(Error::input(format!(
                "{} axis lengths but {} boundary conditions",
                lengths.len(),
                bcs.len()
            )));
        }
        let num_sites = lengths
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l))
            .ok_or_else(|| Error::input("lattice too large"))?;
        Ok(Self {
            num_sites,
            local_dim: 2,
            geometry: Geometry::Hypercubic { lengths, bcs },
        })
    }

    /// Overrides the local dimension (default 2).
    pub fn with_local_dim(mut self, local_dim: usize) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::input("local dimension must be at least 2"));
        }
        self.local_dim = local_dim;
        Ok(self)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Axis lengths (a chain has one axis).
    pub fn lengths(&self) -> Vec<usize> {
        match &self.geometry {
            Geometry::Chain(_) => vec![self.num_sites],
            Geometry::Hypercubic { lengths, .. } => lengths.clone(),
        }
    }

    fn axes(&self) -> (Vec<usize>, Vec<BoundaryCondition>) {
        match &self.geometry {
            Geometry::Chain(bc) => (vec![self.num_sites], vec![*bc]),
            Geometry::Hypercubic { lengths, bcs } => (lengths.clone(), bcs.clone()),
        }
    }

    /// Coordinates of a site.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let (lengths, _) = self.axes();
        let mut c = vec![0; lengths.len()];
        let mut rem = site;
        for axis in (0..lengths.len()).rev() {
            c[axis] = rem % lengths[axis];
            rem /= lengths[axis];
        }
        c
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        let (lengths, _) = self.axes();
        coords
            .iter()
            .zip(&lengths)
            .fold(0, |acc, (&c, &l)| acc * l + c)
    }

    /// Nearest-neighbour bonds `(i, j)` with `i < j`, each listed once.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let (lengths, bcs) = self.axes();
        let mut bonds = Vec::new();
        for site in 0..self.num_sites {
            let c = self.coords(site);
            for axis in 0..lengths.len() {
                let l = lengths[axis];
                if l < 2 {
                    continue;
                }
                let next = c[axis] + 1;
                let wrapped = match (next < l, bcs[axis]) {
                    (true, _) => next,
                    // length-2 periodic axes would repeat the open bond
                    (false, BoundaryCondition::Periodic) if l > 2 => 0,
                    (false, _) => continue,
                };
                let mut nc = c.clone();
                nc[axis] = wrapped;
                let other = self.site(&nc);
                bonds.push((site.min(other), site.max(other)));
            }
        }
        bonds.sort_unstable();
        bonds
    }

    /// Sites whose axis-0 coordinate is below `cut`.
    pub fn sites_below(&self, cut: usize) -> Vec<usize> {
        (0..self.num_sites)
            .filter(|&s| self.coords(s)[0] < cut)
            .collect()
    }
}
