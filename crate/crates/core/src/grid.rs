//! Radial discretisation of radially symmetric functions on ℝ².
//!
//! Nodes are `r_i = i h` for `i = 0..=n`, with `h = r_max / n`. A profile is
//! pinned to zero at `r_max` (Dirichlet truncation). The kinetic energy is a
//! fourth-order quadratic form:
//!
//! ```text
//! G[u] = Σ_{i=0}^{n-1} c_i (D u)_{i+1/2}²,
//!   c_i = 2π r_{i+1/2} h,
//!   (D u)_{i+1/2} = (27(u_{i+1} - u_i) - (u_{i+2} - u_{i-1})) / (24h)
//! ```
//!
//! Missing neighbours come from even reflection at the origin
//! (`u_{-1} = u_1`) and odd reflection about the Dirichlet node
//! (`u_{n+1} = -u_{n-1}`).
//!
//! The Laplacian is defined variationally as `L u = -W⁻¹ ∂G/∂u / 2`, so that
//! `Σ w_i u_i (L u)_i = -G[u]` holds exactly. The discrete energy gradient is
//! then `W(-Lu - Γ f(u²) u)`, also exactly. The quadrature weights `W` are the
//! trapezoid rule in the `2πr dr` measure with two fourth-order corrections:
//!
//! - origin weights `w_0 = 3πh²/16` and `w_1 = 95πh²/48`, chosen so that `L`
//!   reproduces `Δ r² = 4` at every node near the origin;
//! - Gregory end weights `(23/24, 7/6, 3/8)` at the outer boundary.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::banded::BandedSym;
use crate::error::{Error, Result};

/// Smallest admissible number of intervals.
pub const MIN_NODES: usize = 16;

/// Uniform radial mesh on `[0, r_max]` with `n` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::Domain(format!("r_max must be positive and finite, got {r_max}")));
        }
        if n < MIN_NODES {
            return Err(Error::Domain(format!("n must be at least {MIN_NODES}, got {n}")));
        }
        Ok(RadialGrid { r_max, n })
    }

    /// The default truncation used throughout: `r_max = 24`, `n = 4096`.
    pub fn default_grid() -> Self {
        RadialGrid { r_max: 24.0, n: 4096 }
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.r_max / self.n as f64
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        if i == self.n {
            self.r_max
        } else {
            i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.r(i)).collect()
    }

    /// Quadrature weight of node `i` in `∫ g dx = 2π ∫ g(r) r dr`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.h();
        let n = self.n;
        match i {
            0 => 3.0 * PI * h * h / 16.0,
            1 => 95.0 * PI * h * h / 48.0,
            _ if i == n => 2.0 * PI * self.r(i) * h * 3.0 / 8.0,
            _ if i == n - 1 => 2.0 * PI * self.r(i) * h * 7.0 / 6.0,
            _ if i == n - 2 => 2.0 * PI * self.r(i) * h * 23.0 / 24.0,
            _ => 2.0 * PI * self.r(i) * h,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.weight(i)).collect()
    }

    /// `2π r_{i+1/2} h`, the weight of face `i + 1/2` in the kinetic form.
    #[inline]
    fn face_weight(&self, i: usize) -> f64 {
        let h = self.h();
        2.0 * PI * (i as f64 + 0.5) * h * h
    }

    /// Grid with `n * factor` intervals over the same radius.
    pub fn refine(&self, factor: usize) -> Result<RadialGrid> {
        if factor < 2 {
            return Err(Error::Domain(format!("refinement factor must be at least 2, got {factor}")));
        }
        let n = self
            .n
            .checked_mul(factor)
            .ok_or_else(|| Error::Domain("refined node count overflows".into()))?;
        RadialGrid::new(self.r_max, n)
    }

    /// Grid with twice the radius and the same spacing.
    pub fn widen(&self) -> Result<RadialGrid> {
        let n = self
            .n
            .checked_mul(2)
            .ok_or_else(|| Error::Domain("widened node count overflows".into()))?;
        RadialGrid::new(2.0 * self.r_max, n)
    }

    /// Composite quadrature of `2π ∫_0^{r_max} g(r) r dr` from nodal samples.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.n + 1 {
            return Err(Error::Invalid(format!(
                "expected {} samples, got {}",
                self.n + 1,
                samples.len()
            )));
        }
        Ok(self.integrate_unchecked(samples))
    }

    pub(crate) fn integrate_unchecked(&self, samples: &[f64]) -> f64 {
        samples.iter().enumerate().map(|(i, g)| self.weight(i) * g).sum()
    }

    /// Nodal values of `u` extended by the reflection rules.
    #[inline]
    fn ghost(&self, u: &[f64], j: isize) -> f64 {
        let n = self.n as isize;
        if j < 0 {
            u[(-j) as usize]
        } else if j > n {
            -u[(2 * n - j) as usize]
        } else {
            u[j as usize]
        }
    }

    /// Fourth-order face derivatives `(D u)_{i+1/2}` for `i = 0..n`.
    fn face_derivatives(&self, u: &[f64]) -> Vec<f64> {
        let inv = 1.0 / (24.0 * self.h());
        (0..self.n)
            .map(|i| {
                let j = i as isize;
                let (a, b, c, d) = (
                    self.ghost(u, j - 1),
                    self.ghost(u, j),
                    self.ghost(u, j + 1),
                    self.ghost(u, j + 2),
                );
                (27.0 * (c - b) - (d - a)) * inv
            })
            .collect()
    }

    /// Coefficients of face `i`'s derivative on the unknowns `0..n`, after
    /// folding reflections and dropping the Dirichlet node.
    fn face_stencil(&self, i: usize) -> Vec<(usize, f64)> {
        let inv = 1.0 / (24.0 * self.h());
        let n = self.n as isize;
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(4);
        let j = i as isize;
        for (off, c) in [(-1isize, 1.0), (0, -27.0), (1, 27.0), (2, -1.0)] {
            let mut k = j + off;
            let mut coef = c * inv;
            if k < 0 {
                k = -k;
            } else if k > n {
                k = 2 * n - k;
                coef = -coef;
            }
            if k == n {
                continue;
            }
            let k = k as usize;
            match out.iter_mut().find(|(idx, _)| *idx == k) {
                Some(e) => e.1 += coef,
                None => out.push((k, coef)),
            }
        }
        out
    }

    /// The kinetic matrix `H` on the unknowns `u_0..u_{n-1}`: `G[u] = uᵀ H u`.
    pub fn kinetic_matrix(&self) -> BandedSym {
        let mut hm = BandedSym::zeros(self.n);
        for i in 0..self.n {
            let c = self.face_weight(i);
            let st = self.face_stencil(i);
            for &(a, ca) in &st {
                for &(b, cb) in &st {
                    if a <= b {
                        hm.add(a, b, c * ca * cb);
                    }
                }
            }
        }
        hm
    }

    /// `∂G/∂u / 2 = H u` on the unknowns, computed matrix-free; entry `n` is 0.
    pub(crate) fn kinetic_apply(&self, u: &[f64]) -> Vec<f64> {
        let du = self.face_derivatives(u);
        let mut out = vec![0.0; self.n + 1];
        for (i, d) in du.iter().enumerate() {
            let cd = self.face_weight(i) * d;
            for (k, coef) in self.face_stencil(i) {
                out[k] += coef * cd;
            }
        }
        out
    }
}

/// A radial function sampled on a grid, vanishing at `r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl Profile {
    /// Wraps nodal values; requires `n + 1` finite values with `u_n = 0`.
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n + 1 {
            return Err(Error::Invalid(format!(
                "profile needs {} values, got {}",
                grid.n + 1,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("profile value at node {i} is not finite")));
        }
        if values[grid.n] != 0.0 {
            return Err(Error::Invalid(format!(
                "profile must vanish at r_max, got u_n = {}",
                values[grid.n]
            )));
        }
        Ok(Profile { grid, values })
    }

    /// Samples `g` at the nodes and forces the boundary value to zero.
    pub fn from_fn(grid: RadialGrid, g: impl Fn(f64) -> f64) -> Result<Self> {
        let mut v: Vec<f64> = (0..=grid.n).map(|i| g(grid.r(i))).collect();
        v[grid.n] = 0.0;
        Profile::new(grid, v)
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Profile { grid, values: vec![0.0; grid.n + 1] }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `max_i u_i²`.
    pub fn sup_sq(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v * v))
    }

    pub fn scaled(&self, c: f64) -> Profile {
        Profile { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Cubic (four-point Lagrange) interpolation at radius `r`, using the
    /// reflection rules near both ends; zero for `r ≥ r_max`.
    pub fn value_at(&self, r: f64) -> f64 {
        let g = &self.grid;
        if r >= g.r_max {
            return 0.0;
        }
        let r = r.abs();
        let x = r / g.h();
        let i = x.floor() as isize;
        let t = x - i as f64;
        if t == 0.0 {
            return g.ghost(&self.values, i);
        }
        let p = [
            g.ghost(&self.values, i - 1),
            g.ghost(&self.values, i),
            g.ghost(&self.values, i + 1),
            g.ghost(&self.values, i + 2),
        ];
        let (tm1, t0, t1, t2) = (t + 1.0, t, t - 1.0, t - 2.0);
        -p[0] * t0 * t1 * t2 / 6.0 + p[1] * tm1 * t1 * t2 / 2.0 - p[2] * tm1 * t0 * t2 / 2.0
            + p[3] * tm1 * t0 * t1 / 6.0
    }

    /// Interpolates onto another grid (any radius and spacing).
    pub fn resample(&self, target: RadialGrid) -> Profile {
        let mut v: Vec<f64> = (0..=target.n).map(|i| self.value_at(target.r(i))).collect();
        v[target.n] = 0.0;
        Profile { grid: target, values: v }
    }

    /// Mass-preserving dilation `u(r/τ)/τ`, re-sampled on the same grid.
    pub fn dilate(&self, tau: f64) -> Profile {
        let g = self.grid;
        let mut v: Vec<f64> = (0..=g.n).map(|i| self.value_at(g.r(i) / tau) / tau).collect();
        v[g.n] = 0.0;
        Profile { grid: g, values: v }
    }

    /// Radius enclosing half of `∫u²`, by linear interpolation of the cumulative mass.
    pub fn half_mass_radius(&self) -> f64 {
        let g = &self.grid;
        let total: f64 = (0..=g.n).map(|i| g.weight(i) * self.values[i].powi(2)).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..=g.n {
            let add = g.weight(i) * self.values[i].powi(2);
            if acc + add >= 0.5 * total {
                let frac = if add > 0.0 { (0.5 * total - acc) / add } else { 0.0 };
                let lo = if i == 0 { 0.0 } else { g.r(i) - 0.5 * g.h() };
                return lo + frac * if i == 0 { 0.5 * g.h() } else { g.h() };
            }
            acc += add;
        }
        g.r_max
    }

    /// Writes the checkpoint format: a `# r_max=… n=…` header, then `r u` per node.
    pub fn to_checkpoint(&self) -> String {
        let mut s = String::with_capacity(48 * (self.grid.n + 2));
        let _ = writeln!(s, "# r_max={:.16e} n={}", self.grid.r_max, self.grid.n);
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{:.16e} {:.16e}", self.grid.r(i), v);
        }
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Profile> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty checkpoint".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("checkpoint header must start with '#'".into()))?;
        let (mut r_max, mut n) = (None, None);
        for tok in header.split_whitespace() {
            if let Some(v) = tok.strip_prefix("r_max=") {
                r_max = Some(v.parse::<f64>().map_err(|e| Error::Parse(format!("r_max: {e}")))?);
            } else if let Some(v) = tok.strip_prefix("n=") {
                n = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("n: {e}")))?);
            }
        }
        let grid = RadialGrid::new(
            r_max.ok_or_else(|| Error::Parse("header lacks r_max".into()))?,
            n.ok_or_else(|| Error::Parse("header lacks n".into()))?,
        )?;
        let mut values = Vec::with_capacity(grid.n + 1);
        for (k, line) in lines.enumerate() {
            let mut cols = line.split_whitespace();
            let _r = cols.next();
            let u = cols
                .next()
                .ok_or_else(|| Error::Parse(format!("row {k} lacks a value column")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {k}: {e}")))?;
            values.push(u);
        }
        Profile::new(grid, values)
    }

    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_checkpoint())?;
        Ok(())
    }

    pub fn read_checkpoint(path: &Path) -> Result<Profile> {
        Profile::from_checkpoint(&std::fs::read_to_string(path)?)
    }
}

/// `∫|∇u|² = G[u]`, the fourth-order kinetic form described in the module docs.
pub fn gradient_sq_integral(p: &Profile) -> f64 {
    let g = &p.grid;
    g.face_derivatives(&p.values)
        .iter()
        .enumerate()
        .map(|(i, d)| g.face_weight(i) * d * d)
        .sum()
}

/// `∫|∇u|²` from node-centred fourth-order differences and the nodal weights.
///
/// Independent of the staggered form used by the flow; the energy module uses
/// it to evaluate identities along a different discretisation route.
pub fn gradient_sq_integral_nodal(p: &Profile) -> f64 {
    let g = &p.grid;
    let u = &p.values;
    let inv = 1.0 / (12.0 * g.h());
    (0..=g.n)
        .map(|i| {
            let j = i as isize;
            let d = (g.ghost(u, j - 2) - 8.0 * g.ghost(u, j - 1) + 8.0 * g.ghost(u, j + 1)
                - g.ghost(u, j + 2))
                * inv;
            g.weight(i) * d * d
        })
        .sum()
}

/// Discrete radial Laplacian `u'' + u'/r` at every node; the Dirichlet node gets 0.
pub fn apply_radial_laplacian(p: &Profile) -> Vec<f64> {
    let g = &p.grid;
    let mut out = g.kinetic_apply(&p.values);
    for (i, v) in out.iter_mut().enumerate().take(g.n) {
        *v = -*v / g.weight(i);
    }
    out[g.n] = 0.0;
    out
}

/// `‖u‖₂ = (∫ u²)^{1/2}`.
pub fn l2_norm(p: &Profile) -> f64 {
    let g = &p.grid;
    p.values
        .iter()
        .enumerate()
        .map(|(i, v)| g.weight(i) * v * v)
        .sum::<f64>()
        .sqrt()
}

/// Rescales to unit `L²` norm.
pub fn normalize(p: &Profile) -> Result<Profile> {
    let nrm = l2_norm(p);
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::Degenerate("cannot normalise a zero profile".into()));
    }
    Ok(p.scaled(1.0 / nrm))
}

/// Refined grid plus the cubic interpolant of `p` on it.
pub fn refine(p: &Profile, factor: usize) -> Result<(RadialGrid, Profile)> {
    let fine = p.grid.refine(factor)?;
    Ok((fine, p.resample(fine)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss(grid: RadialGrid) -> Profile {
        Profile::from_fn(grid, |r| (-r * r / 2.0).exp()).unwrap()
    }

    #[test]
    fn disk_area() {
        let g = RadialGrid::new(2.0, 64).unwrap();
        let a = g.integrate(&vec![1.0; 65]).unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-12, "{a}");
        assert_eq!(g.integrate(&vec![0.0; 65]).unwrap(), 0.0);
        assert!(g.integrate(&[1.0; 3]).is_err());
    }

    #[test]
    fn gaussian_integral() {
        let g = RadialGrid::new(12.0, 2048).unwrap();
        let s: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        assert!((g.integrate(&s).unwrap() - PI).abs() < 1e-10);
    }

    #[test]
    fn weights_positive_and_sum_to_area() {
        for n in [16, 17, 100, 1000] {
            let g = RadialGrid::new(3.0, n).unwrap();
            assert!(g.weights().iter().all(|w| *w > 0.0));
            let area: f64 = g.weights().iter().sum();
            assert!((area - 9.0 * PI).abs() < 1e-12 * area);
        }
    }

    #[test]
    fn gradient_of_gaussian() {
        let g = RadialGrid::new(12.0, 1024).unwrap();
        let p = gauss(g);
        assert!((gradient_sq_integral(&p) - PI).abs() < 1e-6);
        assert!((gradient_sq_integral_nodal(&p) - PI).abs() < 1e-6);
        assert_eq!(gradient_sq_integral(&Profile::zeros(g)), 0.0);
    }

    #[test]
    fn constant_profile_rejected() {
        let g = RadialGrid::new(1.0, 16).unwrap();
        assert!(Profile::new(g, vec![1.0; 17]).is_err());
        assert!(Profile::new(g, vec![f64::NAN; 17]).is_err());
    }

    #[test]
    fn laplacian_of_r_squared_is_four() {
        // r² does not vanish at r_max, so compare away from the outer boundary,
        // where the reflection and Dirichlet rules apply.
        let g = RadialGrid::new(4.0, 128).unwrap();
        let mut v: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        v[g.n] = 0.0;
        let p = Profile { grid: g, values: v };
        let lap = apply_radial_laplacian(&p);
        for (i, l) in lap.iter().enumerate().take(g.n - 3) {
            assert!((l - 4.0).abs() < 1e-9, "node {i}: {l}");
        }
    }

    #[test]
    fn laplacian_annihilates_constants_in_interior() {
        let g = RadialGrid::new(4.0, 128).unwrap();
        let mut v = vec![3.0; g.n + 1];
        v[g.n] = 0.0;
        let lap = apply_radial_laplacian(&Profile { grid: g, values: v });
        for l in lap.iter().take(g.n - 3) {
            assert!(l.abs() < 1e-9);
        }
        assert!(apply_radial_laplacian(&Profile::zeros(g)).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn laplacian_of_gaussian_converges() {
        let mut errs = Vec::new();
        for n in [256, 512, 1024] {
            let g = RadialGrid::new(12.0, n).unwrap();
            let lap = apply_radial_laplacian(&gauss(g));
            let err = (0..g.n)
                .map(|i| {
                    let r = g.r(i);
                    (lap[i] - (r * r - 2.0) * (-r * r / 2.0).exp()).abs()
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn summation_by_parts_is_exact() {
        let g = RadialGrid::new(10.0, 300).unwrap();
        let p = Profile::from_fn(g, |r| (1.0 + r) * (-r * r / 3.0).exp()).unwrap();
        let lap = apply_radial_laplacian(&p);
        let uv: Vec<f64> = p.values.iter().zip(&lap).map(|(a, b)| a * b).collect();
        let lhs = g.integrate(&uv).unwrap();
        let rhs = -gradient_sq_integral(&p);
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn kinetic_matrix_matches_matrix_free() {
        let g = RadialGrid::new(5.0, 40).unwrap();
        let p = Profile::from_fn(g, |r| (-r * r).exp() + 0.1 * (r).cos()).unwrap();
        let hm = g.kinetic_matrix();
        let hu = hm.matvec(&p.values[..g.n]);
        let mf = g.kinetic_apply(&p.values);
        for i in 0..g.n {
            assert!((hu[i] - mf[i]).abs() < 1e-12 * (1.0 + mf[i].abs()));
        }
        let quad: f64 = hu.iter().zip(&p.values).map(|(a, b)| a * b).sum();
        assert!((quad - gradient_sq_integral(&p)).abs() < 1e-12 * quad);
    }

    #[test]
    fn norm_and_normalize() {
        let g = RadialGrid::new(12.0, 1024).unwrap();
        let p = gauss(g);
        assert!((l2_norm(&p) - PI.sqrt()).abs() < 1e-10);
        let a = normalize(&p).unwrap();
        let b = normalize(&p.scaled(2.0)).unwrap();
        assert!((l2_norm(&a) - 1.0).abs() < 1e-14);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(matches!(normalize(&Profile::zeros(g)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn refine_preserves_coarse_nodes() {
        let g = RadialGrid::new(12.0, 128).unwrap();
        let p = gauss(g);
        let (fine, q) = refine(&p, 2).unwrap();
        assert_eq!(fine.n, 256);
        assert!((fine.h() - g.h() / 2.0).abs() < 1e-15);
        for i in 0..=g.n {
            assert_eq!(q.values()[2 * i], p.values()[i]);
        }
        assert!(g.refine(1).is_err());
        assert!(g.refine(usize::MAX).is_err());
    }

    #[test]
    fn quadrature_order_via_refinement() {
        // Richardson-style check: successive differences shrink by at least 4.
        let f = |r: f64| (-r * r / 2.0).exp() * (1.0 + r * r).cos();
        let vals: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&n| {
                let g = RadialGrid::new(12.0, n).unwrap();
                let s: Vec<f64> = g.nodes().iter().map(|r| f(*r)).collect();
                g.integrate(&s).unwrap()
            })
            .collect();
        let d1 = (vals[1] - vals[0]).abs();
        let d2 = (vals[2] - vals[1]).abs();
        assert!(d1 / d2 >= 4.0, "{vals:?}");
    }

    #[test]
    fn checkpoint_roundtrip() {
        let g = RadialGrid::new(7.5, 33).unwrap();
        let p = Profile::from_fn(g, |r| (-r).exp() / 3.0).unwrap();
        let text = p.to_checkpoint();
        assert!(text.starts_with("# r_max=7.5000000000000000e0 n=33\n"));
        let q = Profile::from_checkpoint(&text).unwrap();
        assert_eq!(p, q);
        assert!(Profile::from_checkpoint("r_max=1 n=16\n").is_err());
        assert!(Profile::from_checkpoint("# r_max=1 n=16\n0 1\n").is_err());
    }

    #[test]
    fn widen_keeps_spacing_and_resample_extends_with_zeros() {
        let g = RadialGrid::new(6.0, 60).unwrap();
        let w = g.widen().unwrap();
        assert_eq!(w.n, 120);
        assert!((w.h() - g.h()).abs() < 1e-15);
        let p = gauss(g);
        let q = p.resample(w);
        for i in 0..=g.n {
            assert!((q.values()[i] - p.values()[i]).abs() < 1e-15);
        }
        assert!(q.values()[g.n..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn half_mass_radius_of_gaussian() {
        // ∫_0^R e^{-r²} 2πr dr = π/2  ⇒  R = √ln 2
        let g = RadialGrid::new(12.0, 4096).unwrap();
        let r = gauss(g).half_mass_radius();
        assert!((r - 2f64.ln().sqrt()).abs() < 2e-3, "{r}");
    }

    proptest! {
        #[test]
        fn integrate_is_linear_and_positive(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.1f64..4.0) {
            let g = RadialGrid::new(5.0, 64).unwrap();
            let x: Vec<f64> = g.nodes().iter().map(|r| (-k * r).exp()).collect();
            let y: Vec<f64> = g.nodes().iter().map(|r| (k * r).sin().powi(2)).collect();
            let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = g.integrate(&z).unwrap();
            let rhs = a * g.integrate(&x).unwrap() + b * g.integrate(&y).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            prop_assert!(g.integrate(&y).unwrap() >= 0.0);
        }

        #[test]
        fn dilation_preserves_mass(tau in 0.6f64..1.6) {
            let g = RadialGrid::new(16.0, 2048).unwrap();
            let p = normalize(&gauss(g)).unwrap();
            let q = p.dilate(tau);
            prop_assert!((l2_norm(&q) - 1.0).abs() < 1e-8);
        }
    }
}
