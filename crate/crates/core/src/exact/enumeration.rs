//! Brute-force summation over all 2^n configurations.
//!
//! States are bitmasks with bit i set ⇔ σ_i = +1, visited in Gray-code
//! order so each step flips one spin and updates the energy in O(degree).

use super::system::SpinSystem;
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 24;

pub fn check_size(system: &SpinSystem, cap: usize) -> Result<()> {
    if system.len() > cap.min(32) {
        return Err(Error::EnumerationCap { spins: system.len(), cap });
    }
    Ok(())
}

fn walk(system: &SpinSystem, mut visit: impl FnMut(u32, f64)) {
    let n = system.len();
    let mut spins = vec![-1i8; n];
    let mut energy = system.energy(&spins);
    let mut bits = 0u32;
    visit(bits, energy);
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        let s = f64::from(spins[i]);
        energy += 2.0 * s * system.local_field(&spins, i);
        spins[i] = -spins[i];
        bits ^= 1 << i;
        visit(bits, energy);
    }
}

fn min_energy(system: &SpinSystem) -> f64 {
    let mut lo = f64::INFINITY;
    walk(system, |_, e| lo = lo.min(e));
    lo
}

/// log Σ_σ exp(−βE(σ)).
pub fn log_partition(system: &SpinSystem, beta: f64) -> f64 {
    if beta == 0.0 {
        return system.len() as f64 * std::f64::consts::LN_2;
    }
    let e0 = min_energy(system);
    let mut z = 0.0;
    walk(system, |_, e| z += (-beta * (e - e0)).exp());
    z.ln() - beta * e0
}

/// Unnormalized Boltzmann weights projected onto the spins in `sites`:
/// entry p has bit j set ⇔ σ_{sites[j]} = +1.
pub fn pattern_weights(system: &SpinSystem, beta: f64, sites: &[usize]) -> Vec<f64> {
    let e0 = if beta == 0.0 { 0.0 } else { min_energy(system) };
    let mut out = vec![0.0; 1 << sites.len()];
    let identity = sites.len() == system.len() && sites.iter().enumerate().all(|(j, &s)| j == s);
    walk(system, |bits, e| {
        let w = if beta == 0.0 { 1.0 } else { (-beta * (e - e0)).exp() };
        let pattern = if identity {
            bits as usize
        } else {
            sites.iter().enumerate().fold(0usize, |p, (j, &s)| p | (((bits >> s) & 1) as usize) << j)
        };
        out[pattern] += w;
    });
    out
}

/// Turns a weight table over sign patterns into normalized moments:
/// entry S becomes E[Π_{j∈S} σ_j].
pub fn walsh_moments(mut table: Vec<f64>) -> Vec<f64> {
    let len = table.len();
    let mut bit = 1;
    while bit < len {
        for base in (0..len).step_by(2 * bit) {
            for i in base..base + bit {
                let (minus, plus) = (table[i], table[i + bit]);
                table[i] = minus + plus;
                table[i + bit] = plus - minus;
            }
        }
        bit <<= 1;
    }
    let z = table[0];
    table.iter_mut().for_each(|m| *m /= z);
    table
}

/// E[Π_{j∈S} σ_{sites[j]}] for every subset S of `sites`.
pub fn subset_moments(system: &SpinSystem, beta: f64, sites: &[usize]) -> Vec<f64> {
    walsh_moments(pattern_weights(system, beta, sites))
}

pub fn magnetizations(system: &SpinSystem, beta: f64) -> Vec<f64> {
    let n = system.len();
    let e0 = if beta == 0.0 { 0.0 } else { min_energy(system) };
    let mut z = 0.0;
    let mut up = vec![0.0; n];
    walk(system, |bits, e| {
        let w = if beta == 0.0 { 1.0 } else { (-beta * (e - e0)).exp() };
        z += w;
        for (i, acc) in up.iter_mut().enumerate() {
            if bits >> i & 1 == 1 {
                *acc += w;
            }
        }
    });
    up.iter().map(|u| 2.0 * u / z - 1.0).collect()
}

/// Minimum energy, number of minimizers and per-spin averages over them.
/// Energies are evaluated from scratch so exactly tied configurations
/// compare equal.
pub fn ground_state(system: &SpinSystem) -> (f64, f64, Vec<f64>) {
    let n = system.len();
    let mut best = f64::INFINITY;
    let mut count = 0.0;
    let mut sums = vec![0.0; n];
    let mut spins = vec![-1i8; n];
    for bits in 0u64..(1u64 << n) {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if bits >> i & 1 == 1 { 1 } else { -1 };
        }
        let e = system.energy(&spins);
        if e < best {
            best = e;
            count = 0.0;
            sums.iter_mut().for_each(|s| *s = 0.0);
        }
        if e == best {
            count += 1.0;
            for (acc, &s) in sums.iter_mut().zip(&spins) {
                *acc += f64::from(s);
            }
        }
    }
    (best, count, sums.iter().map(|s| s / count).collect())
}
