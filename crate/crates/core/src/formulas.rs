//! Closed-form quantities: Turán numbers, the least feasible chromatic number
//! `k(n, e)`, the extremal part sizes `a*`, the edge surplus `m*` and the
//! predicted clique count `h*_r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C(n, 2)`.
pub fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Edges of the balanced complete `s`-partite graph on `n` vertices. For
/// `n < s` some parts are empty and the result is `C(n, 2)`.
pub fn turan_edges(s: u64, n: u64) -> u64 {
    assert!(s >= 1, "Turán graph needs at least one part");
    let (q, rem) = (n / s, n % s);
    pairs(n) - rem * pairs(q + 1) - (s - rem) * pairs(q)
}

/// Balanced non-increasing split of `n` into `parts` sizes.
pub fn balanced_parts(n: u64, parts: u64) -> Vec<u64> {
    let (q, rem) = (n / parts, n % parts);
    (0..parts).map(|i| if i < rem { q + 1 } else { q }).collect()
}

/// `Σ_{i<j} a_i a_j`, the edge count of `K_{a_1,…,a_ℓ}`.
pub fn multipartite_edges(sizes: &[u64]) -> Result<u64> {
    elementary_symmetric(sizes, 2)
}

/// `e_r(a_1, …, a_ℓ)`: the sum over all `r`-subsets of the product of their
/// entries, i.e. the number of `r`-cliques in `K_{a_1,…,a_ℓ}`.
pub fn elementary_symmetric(values: &[u64], r: usize) -> Result<u64> {
    let mut acc = vec![0u128; r + 1];
    acc[0] = 1;
    for &a in values {
        for j in (1..=r).rev() {
            let add = acc[j - 1]
                .checked_mul(a as u128)
                .ok_or(Error::Overflow("elementary symmetric sum"))?;
            acc[j] = acc[j]
                .checked_add(add)
                .ok_or(Error::Overflow("elementary symmetric sum"))?;
        }
    }
    u64::try_from(acc[r]).map_err(|_| Error::Overflow("elementary symmetric sum"))
}

/// `k(n, e)`: least `s` with `t_s(n) >= e`; `1` when `e = 0`.
pub fn chromatic_threshold(n: u64, e: u64) -> Result<u64> {
    if e > pairs(n) {
        return Err(Error::Argument(format!(
            "e = {e} exceeds C({n}, 2) = {}",
            pairs(n)
        )));
    }
    Ok((1..=n.max(1))
        .find(|&s| turan_edges(s, n) >= e)
        .expect("t_n(n) = C(n, 2) >= e"))
}

/// `f(a) = a(n - a) + t_{k-1}(n - a)`: most edges of a `k`-partite graph on
/// `n` vertices with a part of size `a`.
pub fn max_edges_with_part(a: u64, k: u64, n: u64) -> u64 {
    a * (n - a) + turan_edges(k - 1, n - a)
}

/// `a*_k`: least `a >= 1` with `f(a) >= e`, for `k = k(n, e) >= 2`.
pub fn smallest_part(n: u64, e: u64, k: u64) -> Result<u64> {
    let expected = chromatic_threshold(n, e)?;
    if k < 2 || k != expected {
        return Err(Error::Argument(format!(
            "smallest_part needs k = k(n, e) >= 2; k({n}, {e}) = {expected}, got {k}"
        )));
    }
    Ok((1..=n / k)
        .find(|&a| max_edges_with_part(a, k, n) >= e)
        .expect("f(floor(n/k)) = t_k(n) >= e"))
}

/// The predictor state `(n, e, r, k, a*, m*, h*_r)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalProfile {
    pub n: u64,
    pub e: u64,
    pub r: u64,
    pub k: u64,
    pub a_star: Vec<u64>,
    pub m_star: u64,
    pub h_star: u64,
}

impl ExtremalProfile {
    /// Part sizes `(a*_2, …, a*_{k-1}, a*_1 - 1, a*_k + 1)` of the resized
    /// configuration, when `m* = 0` and `a*_1 >= a*_k + 2`.
    pub fn resized_parts(&self) -> Option<Vec<u64>> {
        let k = self.a_star.len();
        if self.m_star != 0 || k < 2 || self.a_star[0] < self.a_star[k - 1] + 2 {
            return None;
        }
        let mut sizes: Vec<u64> = self.a_star[1..k - 1].to_vec();
        sizes.push(self.a_star[0] - 1);
        sizes.push(self.a_star[k - 1] + 1);
        Some(sizes)
    }
}

pub fn profile(n: u64, e: u64, r: u64) -> Result<ExtremalProfile> {
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    if r < 3 {
        return Err(Error::Argument(format!("r must be >= 3, got {r}")));
    }
    let k = chromatic_threshold(n, e)?;
    if e == 0 {
        return Ok(ExtremalProfile {
            n,
            e,
            r,
            k: 1,
            a_star: vec![n],
            m_star: 0,
            h_star: 0,
        });
    }
    let last = smallest_part(n, e, k)?;
    let mut a_star = balanced_parts(n - last, k - 1);
    a_star.push(last);
    let m_star = multipartite_edges(&a_star)? - e;
    let h_star = predicted_cliques(&a_star, m_star, r)?;
    Ok(ExtremalProfile {
        n,
        e,
        r,
        k,
        a_star,
        m_star,
        h_star,
    })
}

/// `Σ_{I ∈ C([k], r)} Π a_i  -  m · Σ_{I' ∈ C([k-2], r-2)} Π a_j`.
pub fn predicted_cliques(a_star: &[u64], m_star: u64, r: u64) -> Result<u64> {
    let k = a_star.len();
    let r = r as usize;
    let full = elementary_symmetric(a_star, r)?;
    let head = elementary_symmetric(&a_star[..k.saturating_sub(2)], r - 2)?;
    let lost = m_star
        .checked_mul(head)
        .ok_or(Error::Overflow("h* correction term"))?;
    full.checked_sub(lost)
        .ok_or(Error::Overflow("h* is negative"))
}

/// Strict inequality `f(a) > f(a - 1)` (with `f` as in [`max_edges_with_part`])
/// for `a >= 1`, `k >= 2`, `n >= ak`.
pub fn lemma_d_holds(a: u64, k: u64, n: u64) -> Result<bool> {
    if a < 1 || k < 2 || n < a * k {
        return Err(Error::Argument(format!(
            "need a >= 1, k >= 2, n >= ak; got a = {a}, k = {k}, n = {n}"
        )));
    }
    let left = a * (n - a) + turan_edges(k - 1, n - a);
    let right = (a - 1) * (n - a + 1) + turan_edges(k - 1, n - a + 1);
    Ok(left > right)
}
