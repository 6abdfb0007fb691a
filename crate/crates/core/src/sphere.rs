//! Integer points on spheres, `F_{n,λ} = {ξ ∈ Z^n : |ξ|² = λ}`.
//!
//! Enumeration is a lexicographic descent where each coordinate ranges over
//! `|ξ_i| ≤ √(remaining)`. Work is split over the first coordinate and the
//! pieces are concatenated in order, so the output is canonical.

use crate::error::{Error, Result};
use std::io::{Read, Write};

/// Default cap on the number of materialised points.
pub const DEFAULT_POINT_BUDGET: u64 = 100_000_000;

/// Largest λ for which coordinates fit in `i16`.
pub const MAX_LAMBDA: u64 = 1 << 30;

const MAGIC: &[u8; 4] = b"SHEL";

/// `[√λ] + 1`.
pub fn radius_bound(lambda: u64) -> u64 {
    isqrt(lambda) + 1
}

pub fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereShell {
    n: usize,
    lambda: u64,
    big_n: u64,
    /// Row-major `len × n` coordinates.
    coords: Vec<i16>,
}

impl SphereShell {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    /// `N = [λ^{1/2}] + 1`.
    pub fn big_n(&self) -> u64 {
        self.big_n
    }

    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.coords.len() / self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[i16] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> impl Iterator<Item = &[i16]> {
        self.coords.chunks_exact(self.n.max(1))
    }

    pub fn coords(&self) -> &[i16] {
        &self.coords
    }

    /// Builds a shell from explicit points, validating each one.
    pub fn from_points(n: usize, lambda: u64, coords: Vec<i16>) -> Result<Self> {
        if n < 1 || coords.len() % n != 0 {
            return Err(Error::Format("coordinate count is not a multiple of n".into()));
        }
        for p in coords.chunks_exact(n) {
            let norm: u64 = p.iter().map(|&c| (c as i64 * c as i64) as u64).sum();
            if norm != lambda {
                return Err(Error::Format(format!("point {p:?} is not on the sphere |ξ|²={lambda}")));
            }
        }
        Ok(SphereShell { n, lambda, big_n: radius_bound(lambda), coords })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        let header: Vec<String> = (1..=self.n).map(|i| format!("xi{i}")).collect();
        wr.write_record(&header)?;
        for p in self.points() {
            wr.write_record(p.iter().map(|c| c.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Binary layout: `"SHEL"`, `n: u8`, `λ: u64`, `count: u64`, then
    /// `count · n` coordinates as `i16`, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[self.n as u8])?;
        w.write_all(&self.lambda.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.coords.len() * 2);
        for c in &self.coords {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 21];
        r.read_exact(&mut head)?;
        if &head[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let n = head[4] as usize;
        let lambda = u64::from_le_bytes(head[5..13].try_into().unwrap());
        let count = u64::from_le_bytes(head[13..21].try_into().unwrap()) as usize;
        let mut raw = vec![0u8; count * n * 2];
        r.read_exact(&mut raw)?;
        let coords = raw
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]))
            .collect();
        SphereShell::from_points(n, lambda, coords)
    }
}

fn check_args(n: usize, lambda: u64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if lambda > MAX_LAMBDA {
        return Err(Error::InvalidParameter(format!("λ = {lambda} exceeds {MAX_LAMBDA}")));
    }
    Ok(())
}

/// Enumerates `F_{n,λ}` with the default point budget.
pub fn enumerate_shell(n: usize, lambda: u64) -> Result<SphereShell> {
    enumerate_shell_with_budget(n, lambda, DEFAULT_POINT_BUDGET)
}

pub fn enumerate_shell_with_budget(n: usize, lambda: u64, budget: u64) -> Result<SphereShell> {
    check_args(n, lambda)?;
    let projected = shell_count(n, lambda)?;
    if projected > budget {
        return Err(Error::BudgetExceeded { projected, budget });
    }
    let r = isqrt(lambda) as i64;
    let pieces = crate::exec::map_indexed((2 * r + 1) as usize, |i| {
        let first = i as i64 - r;
        let rest = lambda - (first * first) as u64;
        let mut out = Vec::new();
        let mut prefix = vec![first as i16];
        descend(n - 1, rest, &mut prefix, &mut out);
        out
    });
    let mut coords = Vec::with_capacity(projected as usize * n);
    for p in pieces {
        coords.extend(p);
    }
    debug_assert_eq!(coords.len() as u64, projected * n as u64);
    Ok(SphereShell { n, lambda, big_n: radius_bound(lambda), coords })
}

fn descend(left: usize, rem: u64, prefix: &mut Vec<i16>, out: &mut Vec<i16>) {
    if left == 0 {
        if rem == 0 {
            out.extend_from_slice(prefix);
        }
        return;
    }
    let r = isqrt(rem) as i64;
    if left == 1 {
        if r * r == rem as i64 {
            let cands: &[i64] = if r == 0 { &[0] } else { &[-r, r] };
            for &c in cands {
                prefix.push(c as i16);
                out.extend_from_slice(prefix);
                prefix.pop();
            }
        }
        return;
    }
    for c in -r..=r {
        prefix.push(c as i16);
        descend(left - 1, rem - (c * c) as u64, prefix, out);
        prefix.pop();
    }
}

/// `|F_{n,λ}|` without materialising points: `r_n(λ)` via repeated
/// convolution of the square-indicator sequence.
pub fn shell_count(n: usize, lambda: u64) -> Result<u64> {
    check_args(n, lambda)?;
    let len = lambda as usize + 1;
    let squares: Vec<usize> = (0..).map(|k: usize| k * k).take_while(|&s| s < len).collect();
    // r1[m] = #{k ∈ Z : k² = m}
    let mut r = vec![0u64; len];
    for (k, &s) in squares.iter().enumerate() {
        r[s] += if k == 0 { 1 } else { 2 };
    }
    for _ in 1..n {
        let mut next = vec![0u64; len];
        for (m, slot) in next.iter_mut().enumerate() {
            let mut acc = 0u64;
            for (k, &s) in squares.iter().enumerate() {
                if s > m {
                    break;
                }
                let w = if k == 0 { 1 } else { 2 };
                acc += w * r[m - s];
            }
            *slot = acc;
        }
        r = next;
    }
    Ok(r[lambda as usize])
}

/// True iff `λ = 4^a (8m + 7)` for some `a, m ≥ 0`.
pub fn three_square_obstructed(lambda: u64) -> bool {
    if lambda == 0 {
        return false;
    }
    let mut l = lambda;
    while l % 4 == 0 {
        l /= 4;
    }
    l % 8 == 7
}
