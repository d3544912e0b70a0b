//! Column transfer matrix over a strip of `rows` spins.
//!
//! The frontier is the last `rows` spins visited; adding the spin at
//! `(col, row)` replaces frontier bit `row` (its left neighbour) and reads
//! bit `row − 1` (its upper neighbour, already placed). Each step is a 2×2
//! butterfly on index pairs differing in bit `row`, so a full sweep costs
//! O(n · 2^rows). The same kernel runs over Boltzmann weights and over the
//! counting (min, +) semiring for ground states.

use super::system::SpinSystem;
use crate::error::{Error, Result};

pub const DEFAULT_WIDTH_CAP: usize = 16;

/// Value domain of a transfer sweep.
pub trait TransferSemiring: Copy + Send + Sync {
    const ZERO: Self;
    const ONE: Self;
    fn plus(self, rhs: Self) -> Self;
    fn times(self, rhs: Self) -> Self;
    /// Weight of a local energy term at inverse temperature `beta`.
    fn local(energy: f64, beta: f64) -> Self;
    /// A factor bringing `peak` back to unit size, and the scale (log weight
    /// or energy) it removes.
    fn normalizer(peak: Self) -> (Self, f64);
    /// ⟨σ⟩ from the aggregated weight of σ = +1 and σ = −1.
    fn signed_ratio(plus: Self, minus: Self) -> f64;
}

impl TransferSemiring for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    #[inline(always)]
    fn plus(self, rhs: Self) -> Self {
        self + rhs
    }

    #[inline(always)]
    fn times(self, rhs: Self) -> Self {
        self * rhs
    }

    fn local(energy: f64, beta: f64) -> Self {
        (-beta * energy).exp()
    }

    fn normalizer(peak: Self) -> (Self, f64) {
        (1.0 / peak, peak.ln())
    }

    fn signed_ratio(plus: Self, minus: Self) -> f64 {
        (plus - minus) / (plus + minus)
    }
}

/// Minimum energy with the number of configurations attaining it. Ties are
/// exact floating-point equality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinCount {
    pub energy: f64,
    pub count: f64,
}

impl TransferSemiring for MinCount {
    const ZERO: Self = MinCount { energy: f64::INFINITY, count: 0.0 };
    const ONE: Self = MinCount { energy: 0.0, count: 1.0 };

    #[inline(always)]
    fn plus(self, rhs: Self) -> Self {
        if self.energy < rhs.energy {
            self
        } else if rhs.energy < self.energy {
            rhs
        } else {
            MinCount { energy: self.energy, count: self.count + rhs.count }
        }
    }

    #[inline(always)]
    fn times(self, rhs: Self) -> Self {
        MinCount { energy: self.energy + rhs.energy, count: self.count * rhs.count }
    }

    fn local(energy: f64, _beta: f64) -> Self {
        MinCount { energy, count: 1.0 }
    }

    fn normalizer(peak: Self) -> (Self, f64) {
        (MinCount { energy: -peak.energy, count: 1.0 }, peak.energy)
    }

    fn signed_ratio(plus: Self, minus: Self) -> f64 {
        let best = plus.energy.min(minus.energy);
        let up = if plus.energy == best { plus.count } else { 0.0 };
        let down = if minus.energy == best { minus.count } else { 0.0 };
        (up - down) / (up + down)
    }
}

#[derive(Clone, Copy, Debug)]
struct Step {
    spin: usize,
    row: usize,
    j_left: f64,
    j_up: f64,
    bias: f64,
}

/// Weight table indexed `[up][left][new]`, bit 1 meaning spin +1.
type Weights<S> = [[[S; 2]; 2]; 2];

fn weights<S: TransferSemiring>(step: &Step, beta: f64, factor: S) -> Weights<S> {
    let mut w = [[[S::ZERO; 2]; 2]; 2];
    for (u, wu) in w.iter_mut().enumerate() {
        for (l, wl) in wu.iter_mut().enumerate() {
            for (s, ws) in wl.iter_mut().enumerate() {
                let (up, left, spin) = (sign(u), sign(l), sign(s));
                let energy = -spin * (step.j_left * left + step.j_up * up + step.bias);
                *ws = S::local(energy, beta).times(factor);
            }
        }
    }
    w
}

fn sign(bit: usize) -> f64 {
    if bit == 1 {
        1.0
    } else {
        -1.0
    }
}

#[inline(always)]
fn up_bit(i: usize, row: usize) -> usize {
    if row == 0 {
        0
    } else {
        (i >> (row - 1)) & 1
    }
}

/// Adds one spin; returns the semiring sum of the new entries.
fn forward_step<S: TransferSemiring>(v: &mut [S], row: usize, w: &Weights<S>) -> S {
    let bit = 1 << row;
    let mut peak = S::ZERO;
    for base in (0..v.len()).step_by(2 * bit) {
        for i0 in base..base + bit {
            let i1 = i0 + bit;
            let w = &w[up_bit(i0, row)];
            let (a0, a1) = (v[i0], v[i1]);
            let n0 = a0.times(w[0][0]).plus(a1.times(w[1][0]));
            let n1 = a0.times(w[0][1]).plus(a1.times(w[1][1]));
            v[i0] = n0;
            v[i1] = n1;
            peak = peak.plus(n0).plus(n1);
        }
    }
    peak
}

/// Transposed step: message over the remaining spins before `row` is added.
fn backward_step<S: TransferSemiring>(v: &mut [S], row: usize, w: &Weights<S>) -> S {
    let bit = 1 << row;
    let mut peak = S::ZERO;
    for base in (0..v.len()).step_by(2 * bit) {
        for i0 in base..base + bit {
            let i1 = i0 + bit;
            let w = &w[up_bit(i0, row)];
            let (b0, b1) = (v[i0], v[i1]);
            let o0 = w[0][0].times(b0).plus(w[0][1].times(b1));
            let o1 = w[1][0].times(b0).plus(w[1][1].times(b1));
            v[i0] = o0;
            v[i1] = o1;
            peak = peak.plus(o0).plus(o1);
        }
    }
    peak
}

fn split_by_bit<S: TransferSemiring>(alpha: &[S], beta: &[S], row: usize) -> (S, S) {
    let mut plus = S::ZERO;
    let mut minus = S::ZERO;
    for (i, (a, b)) in alpha.iter().zip(beta).enumerate() {
        let w = a.times(*b);
        if i >> row & 1 == 1 {
            plus = plus.plus(w);
        } else {
            minus = minus.plus(w);
        }
    }
    (plus, minus)
}

/// A compiled strip sweep for one [`SpinSystem`].
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    rows: usize,
    steps: Vec<Step>,
}

/// Forward vector with its pending normalization factor.
struct Frontier<S> {
    values: Vec<S>,
    factor: S,
}

impl TransferMatrix {
    pub fn new(system: &SpinSystem, width_cap: usize) -> Result<Self> {
        let layout = system.layout().ok_or(Error::NotRectangular)?;
        if layout.rows > width_cap.min(30) {
            return Err(Error::WidthCap { width: layout.rows, cap: width_cap });
        }
        let mut couplings = system.coupling_lookup();
        let mut take = |a: usize, b: usize| couplings.remove(&(a.min(b), a.max(b))).unwrap_or(0.0);
        let rows = layout.rows;
        let steps = (0..rows * layout.cols)
            .map(|t| {
                let spin = layout.spin_at[t];
                let row = t % rows;
                let j_left = if t >= rows { take(spin, layout.spin_at[t - rows]) } else { 0.0 };
                let j_up = if row > 0 { take(spin, layout.spin_at[t - 1]) } else { 0.0 };
                Step { spin, row, j_left, j_up, bias: system.bias()[spin] }
            })
            .collect();
        if couplings.values().any(|&c| c != 0.0) {
            return Err(Error::NotRectangular);
        }
        Ok(Self { rows, steps })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    fn start<S: TransferSemiring>(&self) -> Frontier<S> {
        let mut values = vec![S::ZERO; 1 << self.rows];
        values[0] = S::ONE;
        Frontier { values, factor: S::ONE }
    }

    /// Adds step `t`; returns the removed scale and the pre-normalization
    /// sum of the frontier.
    fn advance<S: TransferSemiring>(&self, f: &mut Frontier<S>, t: usize, beta: f64) -> (f64, S) {
        let step = &self.steps[t];
        let w = weights(step, beta, f.factor);
        let peak = forward_step(&mut f.values, step.row, &w);
        let (factor, removed) = S::normalizer(peak);
        f.factor = factor;
        (removed, peak)
    }

    /// Forward sweep; returns the accumulated scale and the final sum.
    fn sweep<S: TransferSemiring>(&self, beta: f64) -> (f64, S) {
        let mut f = self.start::<S>();
        let mut scale = 0.0;
        let mut peak = S::ONE;
        for t in 0..self.steps.len() {
            let (removed, p) = self.advance(&mut f, t, beta);
            scale += removed;
            peak = p;
        }
        (scale, peak)
    }

    /// log Z at finite β.
    pub fn log_partition(&self, beta: f64) -> f64 {
        self.sweep::<f64>(beta).0
    }

    /// Minimum energy and its degeneracy.
    pub fn ground_energy(&self) -> (f64, f64) {
        let (energy, peak) = self.sweep::<MinCount>(0.0);
        (energy, peak.count)
    }

    /// ⟨σ⟩ of a single spin, by carrying the σ = ±1 parts of the forward
    /// vector separately once that spin has been added.
    pub fn marginal_at<S: TransferSemiring>(&self, spin: usize, beta: f64) -> Option<f64> {
        let target = self.steps.iter().position(|s| s.spin == spin)?;
        let mut f = self.start::<S>();
        for t in 0..=target {
            self.advance(&mut f, t, beta);
        }
        let row = self.steps[target].row;
        let mut plus = f.values.clone();
        let mut minus = f.values;
        for (i, (p, m)) in plus.iter_mut().zip(minus.iter_mut()).enumerate() {
            if i >> row & 1 == 1 {
                *m = S::ZERO;
            } else {
                *p = S::ZERO;
            }
        }
        let mut factor = f.factor;
        for step in &self.steps[target + 1..] {
            let w = weights(step, beta, factor);
            let peak = forward_step(&mut plus, step.row, &w).plus(forward_step(&mut minus, step.row, &w));
            factor = S::normalizer(peak).0;
        }
        let total = |v: &[S]| v.iter().fold(S::ZERO, |acc, x| acc.plus(*x));
        Some(S::signed_ratio(total(&plus), total(&minus)))
    }

    /// ⟨σ_i⟩ for every spin by checkpointed forward–backward passes.
    /// Forward vectors are stored once per column and recomputed within a
    /// column during the backward pass.
    pub fn marginals<S: TransferSemiring>(&self, beta: f64, spins: usize) -> Vec<f64> {
        let rows = self.rows;
        let cols = self.steps.len() / rows;
        let mut checkpoints = Vec::with_capacity(cols);
        let mut f = self.start::<S>();
        for c in 0..cols {
            checkpoints.push((f.values.clone(), f.factor));
            for t in c * rows..(c + 1) * rows {
                self.advance(&mut f, t, beta);
            }
        }
        drop(f);

        let mut out = vec![0.0; spins];
        let mut message = vec![S::ONE; 1 << rows];
        let mut message_factor = S::ONE;
        let mut within: Vec<Vec<S>> = Vec::with_capacity(rows);
        for c in (0..cols).rev() {
            let (values, factor) = checkpoints.pop().expect("one checkpoint per column");
            let mut f = Frontier { values, factor };
            within.clear();
            for t in c * rows..(c + 1) * rows {
                self.advance(&mut f, t, beta);
                within.push(f.values.clone());
            }
            for r in (0..rows).rev() {
                let step = &self.steps[c * rows + r];
                let (plus, minus) = split_by_bit(&within[r], &message, r);
                out[step.spin] = S::signed_ratio(plus, minus);
                let w = weights(step, beta, message_factor);
                let peak = backward_step(&mut message, r, &w);
                message_factor = S::normalizer(peak).0;
            }
        }
        out
    }
}
