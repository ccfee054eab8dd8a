//! Lubotzky–Phillips–Sarnak Ramanujan graphs.
//!
//! For primes `p ≡ q ≡ 1 (mod 4)` the `p + 1` integer quaternions of norm `p`
//! with odd positive real part and even imaginary parts map to generators of
//! `PGL(2, q)`. The Cayley graph they generate is `(p+1)`-regular and
//! Ramanujan; it lives on `PSL(2, q)` (non-bipartite) when `p` is a square
//! mod `q` and on `PGL(2, q)` (bipartite) otherwise.

use std::collections::HashMap;

use super::{Graph, Origin};
use crate::error::{Error, Result};

pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x.is_multiple_of(2) {
        return x == 2;
    }
    let mut k = 3;
    while k * k <= x {
        if x.is_multiple_of(k) {
            return false;
        }
        k += 2;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, q: u64) -> u64 {
    pow_mod(a, q - 2, q)
}

/// Legendre symbol `(a / q)` by Euler's criterion: `+1` if `a` is a non-zero
/// square mod the odd prime `q`, `-1` otherwise.
pub fn legendre_symbol(a: u64, q: u64) -> Result<i8> {
    if q == 2 || !is_prime(q) {
        return Err(Error::validation(format!("{q} is not an odd prime")));
    }
    if a.is_multiple_of(q) {
        return Err(Error::validation(format!("{a} is divisible by {q}")));
    }
    Ok(if pow_mod(a, (q - 1) / 2, q) == 1 { 1 } else { -1 })
}

type Mat = [u64; 4];

fn mat_mul(x: &Mat, y: &Mat, q: u64) -> Mat {
    [
        (x[0] * y[0] + x[1] * y[2]) % q,
        (x[0] * y[1] + x[1] * y[3]) % q,
        (x[2] * y[0] + x[3] * y[2]) % q,
        (x[2] * y[1] + x[3] * y[3]) % q,
    ]
}

/// Projective normal form: the first non-zero entry scaled to 1.
fn canonical(m: Mat, q: u64) -> Mat {
    let lead = m.iter().copied().find(|&v| v != 0).expect("invertible matrix");
    let s = inv_mod(lead, q);
    m.map(|v| v * s % q)
}

fn key(m: &Mat, q: u64) -> u64 {
    ((m[0] * q + m[1]) * q + m[2]) * q + m[3]
}

/// Integer solutions of `a0² + a1² + a2² + a3² = p`, `a0 > 0` odd, the rest
/// even.
fn quaternion_solutions(p: u64) -> Vec<[i64; 4]> {
    let p = p as i64;
    let r = (p as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a0 in (1..=r).step_by(2) {
        for a1 in (-r..=r).filter(|v| v % 2 == 0) {
            for a2 in (-r..=r).filter(|v| v % 2 == 0) {
                for a3 in (-r..=r).filter(|v| v % 2 == 0) {
                    if a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3 == p {
                        out.push([a0, a1, a2, a3]);
                    }
                }
            }
        }
    }
    out
}

fn residue(v: i64, q: u64) -> u64 {
    v.rem_euclid(q as i64) as u64
}

/// Builds the `(p+1)`-regular LPS graph `X^{p,q}`.
pub fn build_lps_graph(p: u64, q: u64) -> Result<Graph> {
    for x in [p, q] {
        if !is_prime(x) {
            return Err(Error::validation(format!("{x} is not prime")));
        }
        if x % 4 != 1 {
            return Err(Error::validation(format!("{x} is not 1 mod 4")));
        }
    }
    if p == q {
        return Err(Error::validation("p and q must differ"));
    }
    if q * q <= 4 * p {
        return Err(Error::validation(format!(
            "q={q} must exceed 2·sqrt(p={p}) for the graph to be simple"
        )));
    }
    let square = legendre_symbol(p, q)? == 1;
    let expected_n = if square {
        q * (q * q - 1) / 2
    } else {
        q * (q * q - 1)
    } as usize;

    let i = (1..q)
        .find(|&x| x * x % q == q - 1)
        .expect("-1 is a square mod q when q = 1 mod 4");
    let solutions = quaternion_solutions(p);
    if solutions.len() as u64 != p + 1 {
        return Err(Error::Construction(format!(
            "found {} quaternions of norm {p}, expected {}",
            solutions.len(),
            p + 1
        )));
    }
    let generators: Vec<Mat> = solutions
        .iter()
        .map(|&[a0, a1, a2, a3]| {
            let ia1 = residue(a1, q) * i % q;
            let ia3 = residue(a3, q) * i % q;
            let a0 = residue(a0, q);
            let a2 = residue(a2, q);
            canonical(
                [
                    (a0 + ia1) % q,
                    (a2 + ia3) % q,
                    (q - a2 + ia3) % q,
                    (a0 + q - ia1) % q,
                ],
                q,
            )
        })
        .collect();

    let identity: Mat = [1, 0, 0, 1];
    let mut index: HashMap<u64, usize> = HashMap::with_capacity(expected_n);
    let mut elements = vec![identity];
    index.insert(key(&identity, q), 0);
    let mut adjacency: Vec<Vec<usize>> = Vec::with_capacity(expected_n);
    let mut head = 0;
    while head < elements.len() {
        let g = elements[head];
        let mut row = Vec::with_capacity(generators.len());
        for s in &generators {
            let h = canonical(mat_mul(&g, s, q), q);
            let next = elements.len();
            let id = *index.entry(key(&h, q)).or_insert(next);
            if id == next {
                elements.push(h);
            }
            row.push(id);
        }
        adjacency.push(row);
        head += 1;
        if elements.len() > expected_n {
            return Err(Error::Construction(format!(
                "generated group exceeds the expected {expected_n} elements"
            )));
        }
    }
    if adjacency.len() != expected_n {
        return Err(Error::Construction(format!(
            "generated {} elements, expected {expected_n}",
            adjacency.len()
        )));
    }
    for (v, row) in adjacency.iter().enumerate() {
        let mut sorted = row.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != row.len() || sorted.binary_search(&v).is_ok() {
            return Err(Error::Construction(format!(
                "node {v} has a loop or multi-edge"
            )));
        }
    }

    let g = Graph::from_adjacency(adjacency, Origin::Lps { p, q })?;
    if g.is_bipartite() == square {
        return Err(Error::Construction(format!(
            "bipartiteness {} disagrees with the Legendre symbol",
            g.is_bipartite()
        )));
    }
    let bound = g.ramanujan_bound();
    if g.lambda() > bound * (1.0 + super::DEFAULT_SPECTRAL_TOL) {
        return Err(Error::Construction(format!(
            "measured lambda {} exceeds the Ramanujan bound {bound}",
            g.lambda()
        )));
    }
    Ok(g)
}
