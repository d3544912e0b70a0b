use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Block, Site};

/// Largest integer strictly below `x` (x > 0).
pub fn largest_integer_below(x: f64) -> usize {
    (x.ceil() as usize).saturating_sub(1)
}

/// Scale lengths m_i = (log n)^i and the block grid at one chosen scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePartition {
    pub n: usize,
    /// ε = 1/log n.
    pub epsilon: f64,
    /// Smallest L with m_L ≥ √n.
    pub levels: usize,
    /// Chosen scale i ∈ [1, L].
    pub scale: usize,
    /// Largest integer strictly below m_i.
    pub m: usize,
    /// Side [n/m]·m of the sub-square Λ₀.
    pub inner_side: usize,
    /// K = (log n)^{1/12}.
    pub threshold: f64,
}

impl ScalePartition {
    /// Partition at scale i = 1.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_scale(n, 1)
    }

    pub fn with_scale(n: usize, scale: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("scale partition needs n ≥ 3, got {n}")));
        }
        let log_n = (n as f64).ln();
        let root = (n as f64).sqrt();
        let mut levels = 1;
        while log_n.powi(levels as i32) < root {
            levels += 1;
        }
        if scale == 0 || scale > levels {
            return Err(Error::InvalidParameter(format!("scale must be in 1..={levels}, got {scale}")));
        }
        let m = largest_integer_below(log_n.powi(scale as i32));
        Ok(Self { n, epsilon: 1.0 / log_n, levels, scale, m, inner_side: n / m * m, threshold: log_n.powf(1.0 / 12.0) })
    }

    /// The first i ∈ [1, L] with s_i ≤ 2·(Σ_j s_j)/L. `shells[j − 1]` is s_j;
    /// shells beyond L count towards the total.
    pub fn select(n: usize, shells: &[f64]) -> Result<Self> {
        let probe = Self::new(n)?;
        let total: f64 = shells.iter().sum();
        let cut = 2.0 * total / probe.levels as f64;
        let scale = (1..=probe.levels)
            .find(|&i| shells.get(i - 1).copied().unwrap_or(0.0) <= cut)
            .ok_or_else(|| Error::InvalidParameter("no admissible scale".into()))?;
        Self::with_scale(n, scale)
    }

    /// m_i; m_0 = 0.
    pub fn scale_length(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            (self.n as f64).ln().powi(i as i32)
        }
    }

    /// Blocks per side of Λ₀.
    pub fn blocks_per_side(&self) -> usize {
        self.n / self.m
    }

    /// |𝓑| = [n/m]².
    pub fn block_count(&self) -> usize {
        self.blocks_per_side().pow(2)
    }

    /// Markov bound 2|𝓑|/K² on the number of bad blocks.
    pub fn bad_block_bound(&self) -> f64 {
        2.0 * self.block_count() as f64 / self.threshold.powi(2)
    }

    /// The m×m blocks of Λ₀, with Λ₀ at the lower-left corner `origin` of Λ,
    /// in x-major order. Lazy: the grid can be large.
    pub fn blocks(&self, origin: Site) -> impl Iterator<Item = Block> + '_ {
        let per_side = self.blocks_per_side();
        let m = self.m;
        (0..per_side * per_side).map(move |k| {
            let (bx, by) = (k / per_side, k % per_side);
            Block::new(Site::new(origin.x + (bx * m) as i32, origin.y + (by * m) as i32), m)
        })
    }

    /// Block of 𝓑 containing `site`, if `site` lies in Λ₀.
    pub fn block_of(&self, origin: Site, site: Site) -> Option<Block> {
        let (dx, dy) = (site.x - origin.x, site.y - origin.y);
        let side = self.inner_side as i32;
        if dx < 0 || dy < 0 || dx >= side || dy >= side {
            return None;
        }
        let m = self.m as i32;
        Some(Block::new(Site::new(origin.x + dx / m * m, origin.y + dy / m * m), self.m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let p = ScalePartition::new(16).unwrap();
        assert!((p.epsilon - 0.36067376022224085).abs() < 1e-12);
        assert!((p.scale_length(1) - 2.772588722239781).abs() < 1e-12);
        assert!((p.scale_length(2) - 7.687248222691222).abs() < 1e-12);
        assert_eq!(p.levels, 2);
        assert_eq!(ScalePartition::new(3).unwrap().levels, 6);
        assert_eq!(largest_integer_below(4.0), 3);
        assert_eq!(largest_integer_below(2.77), 2);
        assert!(ScalePartition::new(2).is_err());
        assert!(ScalePartition::with_scale(16, 3).is_err());
    }

    #[test]
    fn selection_takes_the_first_admissible_scale() {
        let p = ScalePartition::select(16, &[10.0, 1.0, 0.5]).unwrap();
        // cut = 2·11.5/2 = 11.5, so i = 1 already qualifies.
        assert_eq!(p.scale, 1);
        // n = 3 has L = 6: cut = 2·11/6 < 10.
        let p = ScalePartition::select(3, &[10.0, 1.0]).unwrap();
        assert_eq!(p.scale, 2);
        assert_eq!(ScalePartition::select(16, &[0.0, 0.0]).unwrap().scale, 1);
    }

    #[test]
    fn blocks_tile_the_inner_square() {
        let p = ScalePartition::new(10).unwrap();
        let origin = Site::new(-4, 2);
        let mut seen = std::collections::HashSet::new();
        for b in p.blocks(origin) {
            for s in b.sites() {
                assert!(seen.insert(s));
                assert_eq!(p.block_of(origin, s), Some(b));
            }
        }
        assert_eq!(seen.len(), p.inner_side * p.inner_side);
        assert_eq!(p.block_of(origin, Site::new(-5, 2)), None);
    }
}
