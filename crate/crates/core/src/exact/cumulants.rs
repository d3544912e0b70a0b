//! Joint cumulants of ±1 spins from their exact moments.
//!
//! A tuple of sites with repetitions is a multiset ν over `dims` distinct
//! sites. Writing ν = e_j + μ (j the first site with ν_j > 0), the Leibniz
//! rule applied to M = e^K gives
//!
//!   κ_ν = m_ν − Σ_{λ ≤ μ, λ ≠ μ} C(μ, λ) · m_{μ−λ} · κ_{λ+e_j},
//!
//! where C(μ, λ) = Π_i C(μ_i, λ_i). Since σ² = 1, m_ν only depends on the
//! parity mask of ν. The plan fixes the evaluation order and all
//! coefficients up front; evaluating it is a flat pass over the table.

use std::collections::HashMap;

#[derive(Clone, Copy, Debug)]
struct Term {
    coef: f64,
    moment: u32,
    kappa: usize,
}

/// Every multiset of order 1..=`max_order` over `dims` sites, ordered by
/// increasing order, with its cumulant recursion precomputed.
#[derive(Clone, Debug)]
pub struct CumulantPlan {
    dims: usize,
    max_order: usize,
    multisets: Vec<Vec<u8>>,
    masks: Vec<u32>,
    terms: Vec<Vec<Term>>,
    lookup: HashMap<Vec<u8>, usize>,
}

fn binomial(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn compositions(dims: usize, order: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == dims {
        prefix.push(order as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    // Larger leading counts first gives lexicographically sorted tuples.
    for c in (0..=order).rev() {
        prefix.push(c as u8);
        compositions(dims, order - c, prefix, out);
        prefix.pop();
    }
}

fn parity_mask(counts: &[u8]) -> u32 {
    counts.iter().enumerate().fold(0, |m, (i, &c)| if c % 2 == 1 { m | 1 << i } else { m })
}

impl CumulantPlan {
    pub fn new(dims: usize, max_order: usize) -> Self {
        assert!((1..=31).contains(&dims), "cumulant plans cover 1..=31 sites");
        let mut multisets = Vec::new();
        for order in 1..=max_order {
            compositions(dims, order, &mut Vec::with_capacity(dims), &mut multisets);
        }
        let lookup: HashMap<Vec<u8>, usize> = multisets.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let masks = multisets.iter().map(|m| parity_mask(m)).collect();
        let terms = multisets
            .iter()
            .map(|nu| {
                let j = nu.iter().position(|&c| c > 0).expect("order ≥ 1");
                let mut mu = nu.clone();
                mu[j] -= 1;
                let mut terms = Vec::new();
                let mut lambda = vec![0u8; dims];
                loop {
                    if lambda != mu {
                        let coef: f64 = mu.iter().zip(&lambda).map(|(&a, &b)| binomial(a, b)).product();
                        let rest: Vec<u8> = mu.iter().zip(&lambda).map(|(a, b)| a - b).collect();
                        let mut target = lambda.clone();
                        target[j] += 1;
                        terms.push(Term { coef, moment: parity_mask(&rest), kappa: lookup[&target] });
                    }
                    // Odometer over the box 0 ≤ λ ≤ μ.
                    let Some(pos) = (0..dims).find(|&i| lambda[i] < mu[i]) else { break };
                    lambda[pos] += 1;
                    lambda[..pos].iter_mut().for_each(|x| *x = 0);
                }
                terms
            })
            .collect();
        Self { dims, max_order, multisets, masks, terms, lookup }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn len(&self) -> usize {
        self.multisets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multisets.is_empty()
    }

    /// Multiplicities of entry `i`.
    pub fn multiset(&self, i: usize) -> &[u8] {
        &self.multisets[i]
    }

    pub fn order(&self, i: usize) -> usize {
        self.multisets[i].iter().map(|&c| c as usize).sum()
    }

    pub fn index_of(&self, counts: &[u8]) -> Option<usize> {
        self.lookup.get(counts).copied()
    }

    /// Entry for a tuple given as positions `0..dims`, in any order.
    pub fn index_of_tuple(&self, positions: &[usize]) -> Option<usize> {
        let mut counts = vec![0u8; self.dims];
        for &p in positions {
            *counts.get_mut(p)? += 1;
        }
        self.index_of(&counts)
    }

    /// 1/ν! = (number of ordered tuples with multiset ν) / k!.
    pub fn inverse_multiplicity_factorial(&self, i: usize) -> f64 {
        1.0 / self.multisets[i].iter().map(|&c| factorial(c as usize)).product::<f64>()
    }

    /// Number of ordered k-tuples sharing multiset `i`: k!/ν!.
    pub fn tuple_count(&self, i: usize) -> f64 {
        factorial(self.order(i)) * self.inverse_multiplicity_factorial(i)
    }

    /// Fills `out[i]` with κ for every multiset, given subset moments
    /// `moments[S] = E[Π_{j∈S} σ_j]` over the plan's sites.
    pub fn evaluate(&self, moments: &[f64], out: &mut [f64]) {
        debug_assert_eq!(moments.len(), 1 << self.dims);
        for i in 0..self.multisets.len() {
            let mut k = moments[self.masks[i] as usize];
            for t in &self.terms[i] {
                k -= t.coef * moments[t.moment as usize] * out[t.kappa];
            }
            out[i] = k;
        }
    }
}
