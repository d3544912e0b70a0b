use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of Z². Ordered lexicographically by `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn neighbors(self) -> [Site; 4] {
        [
            Site::new(self.x - 1, self.y),
            Site::new(self.x + 1, self.y),
            Site::new(self.x, self.y - 1),
            Site::new(self.x, self.y + 1),
        ]
    }

    pub fn linf_distance(self, other: Site) -> u32 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned bounding rectangle of a region that fills it completely.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub origin: Site,
    pub width: usize,
    pub height: usize,
}

/// An axis-aligned square `origin + [0, side)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub origin: Site,
    pub side: usize,
}

impl Block {
    pub fn new(origin: Site, side: usize) -> Self {
        Self { origin, side }
    }

    pub fn contains(&self, site: Site) -> bool {
        let dx = site.x - self.origin.x;
        let dy = site.y - self.origin.y;
        dx >= 0 && dy >= 0 && (dx as usize) < self.side && (dy as usize) < self.side
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        let side = self.side as i32;
        (0..side).flat_map(move |dx| (0..side).map(move |dy| Site::new(self.origin.x + dx, self.origin.y + dy)))
    }
}

/// A finite subset Λ of Z² with its nearest-neighbour edges and outer
/// boundary ∂Λ. Immutable once built.
///
/// Sites are kept in lexicographic order; that order is the spin index used
/// by every engine (raster order for the dynamics, bit order for
/// enumeration).
#[derive(Clone, Debug)]
pub struct LatticeRegion {
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    edges: Vec<(usize, usize)>,
    boundary: Vec<Site>,
    boundary_bonds: Vec<(usize, usize)>,
    rect: Option<Rect>,
}

impl LatticeRegion {
    pub fn square(n: usize) -> Result<Self> {
        Self::rectangle(Site::new(0, 0), n, n)
    }

    pub fn square_at(origin: Site, n: usize) -> Result<Self> {
        Self::rectangle(origin, n, n)
    }

    pub fn rectangle(origin: Site, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyRegion);
        }
        Self::from_sites(
            (0..width as i32).flat_map(|dx| (0..height as i32).map(move |dy| Site::new(origin.x + dx, origin.y + dy))),
        )
    }

    /// Builds a region from an arbitrary collection of sites; duplicates are
    /// merged.
    pub fn from_sites(sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        let mut sites: Vec<Site> = sites.into_iter().collect();
        sites.sort_unstable();
        sites.dedup();
        if sites.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let index: HashMap<Site, usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();

        let mut edges = Vec::new();
        for (i, s) in sites.iter().enumerate() {
            // Only look right and up so each unordered edge appears once.
            for t in [Site::new(s.x + 1, s.y), Site::new(s.x, s.y + 1)] {
                if let Some(&j) = index.get(&t) {
                    edges.push((i, j));
                }
            }
        }

        let mut boundary: Vec<Site> = sites
            .iter()
            .flat_map(|s| s.neighbors())
            .filter(|t| !index.contains_key(t))
            .collect();
        boundary.sort_unstable();
        boundary.dedup();
        let boundary_index: HashMap<Site, usize> = boundary.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut boundary_bonds = Vec::new();
        for (i, s) in sites.iter().enumerate() {
            for t in s.neighbors() {
                if let Some(&b) = boundary_index.get(&t) {
                    boundary_bonds.push((i, b));
                }
            }
        }

        let rect = bounding_rect(&sites);
        Ok(Self { sites, index, edges, boundary, boundary_bonds, rect })
    }

    /// Reads an ASCII site list: one `x y` integer pair per line. Blank lines
    /// and `#` comments are ignored.
    pub fn read_site_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut sites = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::SiteList { line: lineno + 1, text: line.to_string() };
            let mut parts = line.split_whitespace();
            let x = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let y = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if parts.next().is_some() {
                return Err(bad());
            }
            sites.push(Site::new(x, y));
        }
        Self::from_sites(sites)
    }

    /// Parses `square:<n>` or `sites:<path>`; relative paths resolve against
    /// `base_dir`.
    pub fn parse_spec(spec: &str, base_dir: &Path) -> Result<Self> {
        let spec = spec.trim();
        if let Some(n) = spec.strip_prefix("square:") {
            let n: usize = n.trim().parse().map_err(|_| Error::RegionSpec(spec.to_string()))?;
            Self::square(n)
        } else if let Some(path) = spec.strip_prefix("sites:") {
            Self::read_site_list(&base_dir.join(path.trim()))
        } else {
            Err(Error::RegionSpec(spec.to_string()))
        }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> Site {
        self.sites[i]
    }

    pub fn index_of(&self, site: Site) -> Option<usize> {
        self.index.get(&site).copied()
    }

    pub fn require_index(&self, site: Site) -> Result<usize> {
        self.index_of(site).ok_or(Error::UnknownSite((site.x, site.y)))
    }

    pub fn contains(&self, site: Site) -> bool {
        self.index.contains_key(&site)
    }

    /// Internal nearest-neighbour pairs, each stored once.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sites of ∂Λ in lexicographic order.
    pub fn boundary(&self) -> &[Site] {
        &self.boundary
    }

    /// Bonds `(site index, boundary index)` between Λ and ∂Λ.
    pub fn boundary_bonds(&self) -> &[(usize, usize)] {
        &self.boundary_bonds
    }

    /// The filled bounding rectangle, when the region is a rectangle.
    pub fn rect(&self) -> Option<Rect> {
        self.rect
    }

    /// Side length when the region is a square.
    pub fn square_side(&self) -> Option<usize> {
        self.rect.filter(|r| r.width == r.height).map(|r| r.width)
    }

    pub fn contains_block(&self, block: &Block) -> bool {
        block.side > 0 && block.sites().all(|s| self.contains(s))
    }

    /// ℓ∞ distance from `site` to ∂Λ.
    pub fn depth(&self, site: Site) -> u32 {
        self.boundary.iter().map(|&b| site.linf_distance(b)).min().unwrap_or(0)
    }

    /// The ℓ∞-deepest site; ties go to the lexicographically smallest.
    pub fn center(&self) -> Site {
        let mut best = self.sites[0];
        let mut best_depth = self.depth(best);
        for &s in &self.sites[1..] {
            let d = self.depth(s);
            if d > best_depth {
                best = s;
                best_depth = d;
            }
        }
        best
    }
}

fn bounding_rect(sites: &[Site]) -> Option<Rect> {
    let x0 = sites.iter().map(|s| s.x).min()?;
    let x1 = sites.iter().map(|s| s.x).max()?;
    let y0 = sites.iter().map(|s| s.y).min()?;
    let y1 = sites.iter().map(|s| s.y).max()?;
    let width = (x1 - x0 + 1) as usize;
    let height = (y1 - y0 + 1) as usize;
    (width * height == sites.len()).then_some(Rect { origin: Site::new(x0, y0), width, height })
}
