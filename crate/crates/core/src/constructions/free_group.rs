//! Balls in free groups with the simple random walk operator truncated to them.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_max_eigenvalue, SymmetricCsr};

/// Default cap on the number of ball vertices.
pub const BALL_CAP: u128 = 4_000_000;
/// Balls up to this many vertices are solved densely.
pub const DENSE_BALL_CAP: usize = 1500;

/// Number of reduced words of length at most `radius` over `m` free generators.
pub fn ball_size(m: usize, radius: usize) -> u128 {
    if m == 0 {
        return 1;
    }
    if m == 1 {
        return 2 * radius as u128 + 1;
    }
    let (k, q) = (2 * m as u128, 2 * m as u128 - 1);
    let mut total = 1u128;
    let mut sphere = k;
    for _ in 0..radius {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(q);
    }
    total
}

/// Letter `2i` is generator `i`, letter `2i + 1` its inverse.
#[inline]
fn inverse_letter(l: u8) -> u8 {
    l ^ 1
}

#[derive(Debug, Clone)]
pub struct FreeGroupBall {
    pub m: usize,
    pub radius: usize,
    /// Reduced words in breadth-first order; `words[0]` is the identity.
    pub words: Vec<Vec<u8>>,
    /// `P(w, wl) = 1/(2m)` for every letter `l` with `wl` in the ball.
    pub operator: SymmetricCsr,
}

pub fn free_group_ball(m: usize, radius: usize, cap: u128) -> Result<FreeGroupBall> {
    if m == 0 || m > 127 {
        return Err(Error::BadParameters(format!("number of generators {m} must be in 1..=127")));
    }
    let vertices = ball_size(m, radius);
    if vertices > cap {
        return Err(Error::BallTooLarge { vertices, cap });
    }
    let letters = 2 * m as u8;
    let mut words: Vec<Vec<u8>> = vec![Vec::new()];
    let mut index: HashMap<Vec<u8>, usize> = HashMap::from([(Vec::new(), 0)]);
    let mut frontier = 0..1;
    for _ in 0..radius {
        let start = words.len();
        for w in frontier.clone() {
            for l in 0..letters {
                if words[w].last() == Some(&inverse_letter(l)) {
                    continue;
                }
                let mut next = words[w].clone();
                next.push(l);
                if !index.contains_key(&next) {
                    index.insert(next.clone(), words.len());
                    words.push(next);
                }
            }
        }
        frontier = start..words.len();
    }
    let weight = 1.0 / (2.0 * m as f64);
    let rows = words
        .iter()
        .map(|w| {
            let mut row: Vec<(usize, f64)> = (0..letters)
                .filter_map(|l| {
                    let mut next = w.clone();
                    if next.last() == Some(&inverse_letter(l)) {
                        next.pop();
                    } else {
                        next.push(l);
                    }
                    index.get(&next).map(|&j| (j, weight))
                })
                .collect();
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();
    Ok(FreeGroupBall { m, radius, words, operator: SymmetricCsr::from_rows(rows) })
}

/// `sqrt(2m - 1) / m`, the spectral radius of the simple random walk on the
/// free group of rank `m >= 2`; 1 for the integers.
pub fn kesten_value(m: usize) -> f64 {
    if m <= 1 {
        1.0
    } else {
        (2.0 * m as f64 - 1.0).sqrt() / m as f64
    }
}

/// `cos(pi / (L + 1))`, the norm of the walk on a path of `L = 2R + 1` vertices.
pub fn path_value(radius: usize) -> f64 {
    (std::f64::consts::PI / (2.0 * radius as f64 + 2.0)).cos()
}

/// Norm through the radial reduction: the Perron vector is constant on
/// spheres, and on normalized sphere indicators the operator is tridiagonal
/// with off-diagonals `sqrt(|S_{r+1}| / |S_r|) / (2m)`.
pub fn radial_norm(m: usize, radius: usize) -> f64 {
    if radius == 0 {
        return 0.0;
    }
    let k = 2.0 * m as f64;
    let off: Vec<f64> = (0..radius).map(|r| if r == 0 { k.sqrt() / k } else { (k - 1.0).sqrt() / k }).collect();
    tridiagonal_max_eigenvalue(&vec![0.0; radius + 1], &off)
}

#[derive(Debug, Clone, Serialize)]
pub struct BallReport {
    pub m: usize,
    pub radius: usize,
    pub vertices: usize,
    pub norm: f64,
    pub method: &'static str,
    pub iterations: usize,
    pub radial_norm: f64,
    /// The infinite-group value.
    pub limit: f64,
    pub below_limit: bool,
    /// The truncated operator stays bounded away from 1, the non-amenable side.
    pub norm_below_one: bool,
}

impl FreeGroupBall {
    pub fn vertex_count(&self) -> usize {
        self.words.len()
    }

    /// Dense eigensolve for small balls, power iteration from the constant
    /// vector otherwise.
    pub fn norm(&self, dense_cap: usize, tol: f64) -> Result<(f64, &'static str, usize)> {
        if self.vertex_count() <= dense_cap {
            return Ok((self.operator.dense_norm(), "dense", 0));
        }
        let start = vec![1.0; self.vertex_count()];
        let (value, iterations) = self.operator.power_norm_from(start, tol, 100_000)?;
        Ok((value, "power_iteration", iterations))
    }

    pub fn report(&self, dense_cap: usize, tol: f64) -> Result<BallReport> {
        let (norm, method, iterations) = self.norm(dense_cap, tol)?;
        let limit = kesten_value(self.m);
        Ok(BallReport {
            m: self.m,
            radius: self.radius,
            vertices: self.vertex_count(),
            norm,
            method,
            iterations,
            radial_norm: radial_norm(self.m, self.radius),
            limit,
            below_limit: norm <= limit + 1e-9,
            norm_below_one: norm < 1.0 - 1e-9,
        })
    }
}
