//! Finite-difference realization of `H` and of symmetrized integrals on a
//! uniform rectangular grid, and the commutator residual `||[H, X] psi||`.
//!
//! Every derivative uses an order-2 central stencil; third derivatives use
//! the width-5 stencil. Operators are applied wherever their stencil fits and
//! norms are taken on the interior, `margin` cells away from the edge.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{hamiltonian_spec, PotentialEntry};
use crate::error::{Error, Result};
use crate::field::{Point, ScalarField};
use crate::integral::{Correction, IntegralSpec, Monomial};
use crate::operator::NormalOp;
use crate::sampling::{BBox, DEFAULT_MARGIN};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Reach of the `[H, X]` composition: radius 3 for `X`, 1 for `H`.
pub const COMMUTATOR_RADIUS: usize = 4;

/// Fine-level residuals below this multiple of the round-off floor carry no
/// order information.
pub const FLOOR_FACTOR: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Cells next to the edge excluded from norms.
    pub margin: usize,
}

impl GridSpec {
    /// Nodes `x0 + i h` covering `bbox`, truncated to a whole number of cells.
    pub fn new(bbox: BBox, h: f64, margin: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) || !bbox.is_nonempty() {
            return Err(Error::InvalidParams(format!("grid spacing {h} on an empty or invalid box")));
        }
        let cells = |w: f64| (w / h + 1e-9).floor() as usize;
        let g = GridSpec {
            x0: bbox.x0,
            y0: bbox.y0,
            h,
            nx: cells(bbox.x1 - bbox.x0) + 1,
            ny: cells(bbox.y1 - bbox.y0) + 1,
            margin,
        };
        if g.nx <= 2 * margin + 1 || g.ny <= 2 * margin + 1 {
            return Err(Error::InvalidParams(format!(
                "grid {}x{} has no interior beyond a margin of {margin} cells",
                g.nx, g.ny
            )));
        }
        Ok(g)
    }

    /// Same extents at half the spacing; the margin keeps its physical width.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            h: self.h / 2.0,
            nx: 2 * (self.nx - 1) + 1,
            ny: 2 * (self.ny - 1) + 1,
            margin: 2 * self.margin,
            ..*self
        }
    }

    pub fn levels(&self, count: usize) -> Vec<GridSpec> {
        std::iter::successors(Some(*self), |g| Some(g.refined())).take(count).collect()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.h
    }

    pub fn point(&self, idx: usize) -> Point {
        Point::new(self.x(idx % self.nx), self.y(idx / self.nx))
    }

    pub fn bbox(&self) -> BBox {
        BBox::new(self.x0, self.x(self.nx - 1), self.y0, self.y(self.ny - 1))
    }

    fn is_interior(&self, idx: usize) -> bool {
        let (i, j) = (idx % self.nx, idx / self.nx);
        let m = self.margin;
        i >= m && i + m < self.nx && j >= m && j + m < self.ny
    }

    /// Every node keeps the catalog clearance from the singular loci.
    pub fn check_domain(&self, entry: &PotentialEntry) -> Result<()> {
        for idx in 0..self.len() {
            let p = self.point(idx);
            if !entry.domain.admissible(p, DEFAULT_MARGIN) {
                return Err(Error::Domain(format!(
                    "grid node ({:.6}, {:.6}) is within {DEFAULT_MARGIN} of a singular locus of {}",
                    p.x, p.y, entry.family
                )));
            }
        }
        Ok(())
    }

    fn sample<F: Fn(Point) -> Result<C> + Sync>(&self, f: F) -> Result<Vec<C>> {
        (0..self.len()).into_par_iter().map(|idx| f(self.point(idx))).collect()
    }

    fn sample_real(&self, field: &dyn ScalarField, what: &str) -> Result<Vec<C>> {
        let eval = |p: Point| {
            let v = field.value(p)?;
            if v.is_finite() {
                Ok(C::new(v, 0.0))
            } else {
                Err(Error::Domain(format!("{what} is not finite at ({}, {})", p.x, p.y)))
            }
        };
        if !field.is_one_dimensional() {
            return self.sample(eval);
        }
        let row: Vec<C> = (0..self.nx)
            .into_par_iter()
            .map(|i| eval(Point::new(self.x(i), self.y0)))
            .collect::<Result<_>>()?;
        Ok((0..self.ny).flat_map(|_| row.iter().copied()).collect())
    }

    /// Term by term, so that `x`-only terms are evaluated once per column.
    fn sample_correction(&self, g: &Correction, what: &str) -> Result<Vec<C>> {
        let mut acc = vec![ZERO; self.len()];
        for t in g.terms.iter().filter(|t| t.coeff != 0.0) {
            let v = self.sample_real(t.field.as_ref(), what)?;
            acc.iter_mut().zip(v).for_each(|(a, v)| *a += t.coeff * v);
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: GridSpec,
    pub values: Vec<C>,
}

impl GridFunction {
    pub fn zeros(grid: &GridSpec) -> Self {
        GridFunction {
            grid: *grid,
            values: vec![ZERO; grid.len()],
        }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> C + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let p = grid.point(idx);
                f(p.x, p.y)
            })
            .collect();
        GridFunction { grid: *grid, values }
    }

    fn with_values(&self, values: Vec<C>) -> Self {
        GridFunction { grid: self.grid, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Discrete `L2` norm over the interior.
    pub fn norm(&self) -> f64 {
        let h2 = self.grid.h * self.grid.h;
        let s: f64 = (0..self.values.len())
            .filter(|&i| self.grid.is_interior(i))
            .map(|i| self.values[i].norm_sqr())
            .sum();
        (s * h2).sqrt()
    }

    /// `<self, other>` over the interior, conjugate-linear in `self`.
    pub fn inner(&self, other: &GridFunction) -> C {
        let h2 = self.grid.h * self.grid.h;
        let s: C = (0..self.values.len())
            .filter(|&i| self.grid.is_interior(i))
            .map(|i| self.values[i].conj() * other.values[i])
            .sum();
        s * h2
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }

    fn abs(&self) -> GridFunction {
        self.with_values(self.values.iter().map(|v| C::new(v.norm(), 0.0)).collect())
    }
}

fn stencil(order: u8) -> &'static [(isize, f64)] {
    match order {
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => &[],
    }
}

fn radius(order: u8) -> usize {
    match order {
        0 => 0,
        1 | 2 => 1,
        _ => 2,
    }
}

/// One-dimensional central difference along x (`axis = 0`) or y. Nodes whose
/// stencil leaves the grid are set to zero. `abs` replaces the weights by
/// their magnitudes, giving a bound on the accumulated terms.
fn diff_axis(grid: &GridSpec, data: &[C], axis: usize, order: u8, abs: bool) -> Vec<C> {
    if order == 0 {
        return data.to_vec();
    }
    let st = stencil(order);
    let scale = grid.h.powi(-(order as i32));
    let r = radius(order);
    let (nx, ny) = (grid.nx, grid.ny);
    let mut out = vec![ZERO; data.len()];
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            let (pos, n, stride) = if axis == 0 { (i, nx, 1isize) } else { (j, ny, nx as isize) };
            if pos < r || pos + r >= n {
                continue;
            }
            let base = (j * nx + i) as isize;
            let mut acc = ZERO;
            for &(off, w) in st {
                let w = if abs { w.abs() } else { w };
                acc += data[(base + off * stride) as usize] * w;
            }
            *o = acc * scale;
        }
    });
    out
}

fn diff(grid: &GridSpec, data: &[C], a: u8, b: u8, abs: bool) -> Vec<C> {
    let dx = diff_axis(grid, data, 0, a, abs);
    diff_axis(grid, &dx, 1, b, abs)
}

/// `f D psi + D (f psi)` with `D = dx^a dy^b`.
fn anticommute(grid: &GridSpec, f: &[C], a: u8, b: u8, psi: &[C], abs: bool) -> Vec<C> {
    let d_psi = diff(grid, psi, a, b, abs);
    let f_psi: Vec<C> = f.iter().zip(psi).map(|(f, p)| f * p).collect();
    let d_fpsi = diff(grid, &f_psi, a, b, abs);
    f.iter().zip(d_psi).zip(d_fpsi).map(|((f, u), v)| f * u + v).collect()
}

/// `{f, p1^a p2^b} psi` with `p = -i hbar d`.
pub fn apply_sym_term(
    f: &dyn ScalarField,
    powers: (u8, u8),
    hbar: f64,
    psi: &GridFunction,
    grid: &GridSpec,
) -> Result<GridFunction> {
    let (a, b) = powers;
    if a + b > 3 {
        return Err(Error::Precondition(format!("momentum powers ({a}, {b}) exceed order 3")));
    }
    if radius(a).max(radius(b)) > grid.margin {
        return Err(Error::Precondition(format!(
            "stencil for ({a}, {b}) does not fit in a margin of {} cells",
            grid.margin
        )));
    }
    let fv = grid.sample_real(f, "coefficient")?;
    let c = C::new(0.0, -hbar).powi((a + b) as i32);
    let out = anticommute(grid, &fv, a, b, &psi.values, false);
    Ok(psi.with_values(out.into_iter().map(|v| v * c).collect()))
}

/// `sum c {L^i, p1^j p2^k}` applied by composition, plus anticommutator
/// terms `{f_ab, dx^a dy^b}` and a multiplicative part.
///
/// Composing `L = -i hbar (x D_y - y D_x)` keeps `[Laplacian, L] = 0` exact on
/// the grid, since `[D_xx, x] = 2 D_x` holds for the central stencils.
#[derive(Clone, Debug)]
pub struct GridOperator {
    pub grid: GridSpec,
    hbar: f64,
    angular: Vec<(f64, Monomial)>,
    terms: Vec<((u8, u8), Vec<C>)>,
    diag: Vec<C>,
}

impl GridOperator {
    fn empty(grid: &GridSpec, hbar: f64) -> Self {
        GridOperator {
            grid: *grid,
            hbar,
            angular: vec![],
            terms: vec![],
            diag: vec![ZERO; grid.len()],
        }
    }

    fn add_term(&mut self, powers: (u8, u8), values: Vec<C>) {
        if powers == (0, 0) {
            // {f, 1} = 2 f
            for (d, v) in self.diag.iter_mut().zip(values) {
                *d += 2.0 * v;
            }
        } else if let Some((_, acc)) = self.terms.iter_mut().find(|(p, _)| *p == powers) {
            for (d, v) in acc.iter_mut().zip(values) {
                *d += v;
            }
        } else {
            self.terms.push((powers, values));
        }
    }

    fn add_corrections(mut self, spec: &IntegralSpec) -> Result<Self> {
        let grid = self.grid;
        let minus_i_hbar = C::new(0.0, -self.hbar);
        if !spec.g1.is_empty() {
            let g = grid.sample_correction(&spec.g1, "g1")?;
            self.add_term((1, 0), g.into_iter().map(|v| v * minus_i_hbar).collect());
        }
        if !spec.g2.is_empty() {
            let g = grid.sample_correction(&spec.g2, "g2")?;
            self.add_term((0, 1), g.into_iter().map(|v| v * minus_i_hbar).collect());
        }
        if !spec.g0.is_empty() {
            let g = grid.sample_correction(&spec.g0, "g0")?;
            self.add_term((0, 0), g);
        }
        Ok(self)
    }

    /// `sum A {L^i, p1^j p2^k} + {g1, p1} + {g2, p2} + 2 g0` on `grid`.
    pub fn integral(spec: &IntegralSpec, hbar: f64, grid: &GridSpec) -> Result<Self> {
        let mut op = GridOperator::empty(grid, hbar);
        op.angular = spec.leading.iter().map(|(m, c)| (*c, *m)).collect();
        op.add_corrections(spec)
    }

    /// The same operator with the leading part expanded into monomial terms
    /// `{f_ab, p1^a p2^b}`; agrees with [`GridOperator::integral`] to `O(h^2)`.
    pub fn integral_expanded(spec: &IntegralSpec, hbar: f64, grid: &GridSpec) -> Result<Self> {
        let l = NormalOp::angular(hbar);
        let mut lead = NormalOp::default();
        for (m, c) in &spec.leading {
            let term = l.pow(m.l).anticommutator(&NormalOp::momentum(m.p1, m.p2, hbar));
            lead = lead.plus(&term.scaled(C::new(*c, 0.0)));
        }
        let mut op = GridOperator::empty(grid, hbar);
        for (powers, poly) in lead.symmetrize() {
            let values = grid.sample(|p| Ok(poly.eval(p.x, p.y)))?;
            op.add_term(powers, values);
        }
        op.add_corrections(spec)
    }

    /// `-(hbar^2/2) (5-point Laplacian) + V`, assembled by the same code path
    /// as the integrals so that `X = 2H` commutes with `H` exactly.
    pub fn hamiltonian(entry: &PotentialEntry, hbar: f64, grid: &GridSpec) -> Result<Self> {
        grid.check_domain(entry)?;
        let mut op = GridOperator::integral(&hamiltonian_spec(entry), hbar, grid)?;
        op.angular.iter_mut().for_each(|(c, _)| *c *= 0.5);
        for (_, v) in op.terms.iter_mut() {
            v.iter_mut().for_each(|c| *c *= 0.5);
        }
        op.diag.iter_mut().for_each(|c| *c *= 0.5);
        Ok(op)
    }

    pub fn shifted(mut self, c: f64) -> Self {
        self.diag.iter_mut().for_each(|d| *d += c);
        self
    }

    /// Stencil radius of one application.
    pub fn reach(&self) -> usize {
        let ang = self.angular.iter().map(|(_, m)| m.l as usize + radius(m.p1).max(radius(m.p2)));
        let sym = self.terms.iter().map(|((a, b), _)| radius(*a).max(radius(*b)));
        ang.chain(sym).max().unwrap_or(0)
    }

    /// `L psi = -i hbar (x D_y psi - y D_x psi)`.
    fn apply_l(&self, psi: &[C], abs: bool) -> Vec<C> {
        let g = &self.grid;
        let dx = diff_axis(g, psi, 0, 1, abs);
        let dy = diff_axis(g, psi, 1, 1, abs);
        (0..psi.len())
            .map(|idx| {
                let p = g.point(idx);
                if abs {
                    (dy[idx] * p.x.abs() + dx[idx] * p.y.abs()) * self.hbar
                } else {
                    (dy[idx] * p.x - dx[idx] * p.y) * C::new(0.0, -self.hbar)
                }
            })
            .collect()
    }

    fn apply_impl(&self, psi: &GridFunction, abs: bool) -> GridFunction {
        let mag = |v: &C| if abs { C::new(v.norm(), 0.0) } else { *v };
        let mut out: Vec<C> = self.diag.iter().zip(&psi.values).map(|(d, p)| mag(d) * p).collect();
        for (c, m) in &self.angular {
            let scale = C::new(0.0, -self.hbar).powi((m.p1 + m.p2) as i32) * *c;
            let scale = mag(&scale);
            let l_psi = (0..m.l).fold(psi.values.clone(), |acc, _| self.apply_l(&acc, abs));
            let pl_psi = diff(&self.grid, &l_psi, m.p1, m.p2, abs);
            let lp_psi = if m.p1 + m.p2 == 0 {
                l_psi
            } else {
                let p_psi = diff(&self.grid, &psi.values, m.p1, m.p2, abs);
                (0..m.l).fold(p_psi, |acc, _| self.apply_l(&acc, abs))
            };
            for ((o, a), b) in out.iter_mut().zip(lp_psi).zip(pl_psi) {
                *o += scale * (a + b);
            }
        }
        for ((a, b), f) in &self.terms {
            let f: Vec<C> = f.iter().map(mag).collect();
            for (o, v) in out.iter_mut().zip(anticommute(&self.grid, &f, *a, *b, &psi.values, abs)) {
                *o += v;
            }
        }
        psi.with_values(out)
    }

    pub fn apply(&self, psi: &GridFunction) -> GridFunction {
        self.apply_impl(psi, false)
    }

    /// Same stencils with every coefficient and weight replaced by its
    /// magnitude.
    pub fn apply_abs(&self, psi: &GridFunction) -> GridFunction {
        self.apply_impl(&psi.abs(), true)
    }

    /// Largest absolute row sum over the interior, an upper bound on the
    /// operator norm.
    pub fn row_sum_bound(&self) -> f64 {
        let ones = GridFunction::from_fn(&self.grid, |_, _| C::new(1.0, 0.0));
        let rows = self.apply_abs(&ones);
        (0..rows.values.len())
            .filter(|&i| self.grid.is_interior(i))
            .map(|i| rows.values[i].re)
            .fold(0.0, f64::max)
    }
}

pub fn apply_h(entry: &PotentialEntry, hbar: f64, psi: &GridFunction, grid: &GridSpec) -> Result<GridFunction> {
    Ok(GridOperator::hamiltonian(entry, hbar, grid)?.apply(psi))
}

pub fn apply_integral(spec: &IntegralSpec, hbar: f64, psi: &GridFunction, grid: &GridSpec) -> Result<GridFunction> {
    Ok(GridOperator::integral(spec, hbar, grid)?.apply(psi))
}

/// Gaussian wave packet with widths `sx, sy` and plane-wave phase `k.r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gaussian {
    pub cx: f64,
    pub cy: f64,
    pub sx: f64,
    pub sy: f64,
    pub kx: f64,
    pub ky: f64,
}

impl Gaussian {
    pub fn isotropic(cx: f64, cy: f64, sigma: f64) -> Self {
        Gaussian { cx, cy, sx: sigma, sy: sigma, kx: 0.0, ky: 0.0 }
    }

    pub fn with_momentum(self, kx: f64, ky: f64) -> Self {
        Gaussian { kx, ky, ..self }
    }

    pub fn value(&self, x: f64, y: f64) -> C {
        let (dx, dy) = ((x - self.cx) / self.sx, (y - self.cy) / self.sy);
        let env = (-0.5 * (dx * dx + dy * dy)).exp();
        C::from_polar(env, self.kx * x + self.ky * y)
    }

    pub fn sample(&self, grid: &GridSpec) -> GridFunction {
        GridFunction::from_fn(grid, |x, y| self.value(x, y))
    }
}

/// Seeded Gaussians with widths in `[5h, extent/8]` along each axis and
/// centres at least four commutator stencils inside the coarse grid.
/// `count` seeded Gaussian wave packets centred in the middle 30% of the
/// grid box, with widths between 12% and 20% of the box along each axis
/// and momenta in `[-1, 1)`.
pub fn gaussian_tests(grid: &GridSpec, count: usize, seed: u64) -> Result<Vec<Gaussian>> {
    let b = grid.bbox();
    let (ex, ey) = (b.x1 - b.x0, b.y1 - b.y0);
    if 0.12 * ex.min(ey) < 5.0 * grid.h {
        return Err(Error::InvalidParams(format!(
            "grid spacing {} is too coarse for test functions on a {ex} x {ey} box",
            grid.h
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| Gaussian {
            cx: rng.gen_range(b.x0 + 0.35 * ex..b.x1 - 0.35 * ex),
            cy: rng.gen_range(b.y0 + 0.35 * ey..b.y1 - 0.35 * ey),
            sx: rng.gen_range(0.12 * ex..=0.2 * ex),
            sy: rng.gen_range(0.12 * ey..=0.2 * ey),
            kx: rng.gen_range(-1.0..1.0),
            ky: rng.gen_range(-1.0..1.0),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorResidual {
    /// `||[H, X] psi|| / ||psi||` for each test function.
    pub per_psi: Vec<f64>,
    /// Round-off scale of each entry of `per_psi`.
    pub floors: Vec<f64>,
    /// Root mean square of `per_psi`.
    pub aggregate: f64,
    pub floor: f64,
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

/// `H` on one grid level together with the test functions and their images
/// under `H`, shared by every spec checked on that level.
pub struct CommutatorProbe {
    h_op: GridOperator,
    h_norm: f64,
    psis: Vec<GridFunction>,
    h_psis: Vec<GridFunction>,
}

impl CommutatorProbe {
    pub fn new(entry: &PotentialEntry, hbar: f64, grid: &GridSpec, tests: Vec<GridFunction>) -> Result<Self> {
        if grid.margin < COMMUTATOR_RADIUS {
            return Err(Error::Precondition(format!(
                "margin of {} cells is below the commutator reach {COMMUTATOR_RADIUS}",
                grid.margin
            )));
        }
        let h_op = GridOperator::hamiltonian(entry, hbar, grid)?;
        let h_psis = tests.par_iter().map(|psi| h_op.apply(psi)).collect();
        Ok(CommutatorProbe {
            h_norm: h_op.row_sum_bound(),
            h_op,
            psis: tests,
            h_psis,
        })
    }

    pub fn residual(&self, spec: &IntegralSpec) -> Result<CommutatorResidual> {
        if !spec.kind.quantum() {
            return Err(Error::Precondition(format!("{} is not a quantum integral", spec.name)));
        }
        let hbar = self.h_op.hbar;
        let x_op = GridOperator::integral(spec, hbar, &self.h_op.grid)?;
        let x_norm = x_op.row_sum_bound();
        let pairs: Vec<(f64, f64)> = self
            .psis
            .par_iter()
            .zip(&self.h_psis)
            .map(|(psi, h_psi)| {
                let n = psi.norm();
                let x_psi = x_op.apply(psi);
                let r = self.h_op.apply(&x_psi).sub(&x_op.apply(h_psi));
                // rounding of each inner result, amplified by the outer operator
                let floor = f64::EPSILON * (self.h_norm * x_psi.norm() + x_norm * h_psi.norm());
                (r.norm() / n, floor / n)
            })
            .collect();
        let (per_psi, floors): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if per_psi.iter().any(|r| !r.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite commutator residual for {}", spec.name)));
        }
        Ok(CommutatorResidual {
            aggregate: rms(&per_psi),
            floor: rms(&floors),
            per_psi,
            floors,
        })
    }
}

pub fn commutator_residual(
    entry: &PotentialEntry,
    spec: &IntegralSpec,
    hbar: f64,
    grid: &GridSpec,
    tests: &[GridFunction],
) -> Result<CommutatorResidual> {
    CommutatorProbe::new(entry, hbar, grid, tests.to_vec())?.residual(spec)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceLevel {
    pub h: f64,
    pub residual: CommutatorResidual,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub spec: String,
    pub levels: Vec<ConvergenceLevel>,
    /// `log2(r(h) / r(h/2))` between successive levels, aggregate residuals.
    pub orders: Vec<f64>,
    /// Same per test function.
    pub per_psi_orders: Vec<Vec<f64>>,
    /// Spread of successive order estimates (three or more levels).
    pub richardson_spread: Option<f64>,
    pub floor_limited: bool,
}

impl ConvergenceReport {
    /// Order measured on the two finest levels.
    pub fn order(&self) -> f64 {
        *self.orders.last().unwrap_or(&f64::NAN)
    }

    pub fn finest_residual(&self) -> f64 {
        self.levels.last().map_or(f64::NAN, |l| l.residual.aggregate)
    }

    /// Every successive order lies within `[lo, hi]`, or the fine level is
    /// floor-limited.
    pub fn converges(&self, lo: f64, hi: f64) -> bool {
        self.floor_limited || (!self.orders.is_empty() && self.orders.iter().all(|p| (lo..=hi).contains(p)))
    }

    pub fn stalls(&self, max_order: f64) -> bool {
        !self.floor_limited && self.orders.iter().all(|p| *p <= max_order)
    }
}

pub fn convergence_order(
    entry: &PotentialEntry,
    spec: &IntegralSpec,
    hbar: f64,
    grids: &[GridSpec],
    tests: &[Gaussian],
) -> Result<ConvergenceReport> {
    let mut reports = convergence_orders(entry, std::slice::from_ref(spec), hbar, grids, tests)?;
    Ok(reports.remove(0))
}

/// [`convergence_order`] for several specs, building `H` and `H psi` once
/// per level.
pub fn convergence_orders(
    entry: &PotentialEntry,
    specs: &[IntegralSpec],
    hbar: f64,
    grids: &[GridSpec],
    tests: &[Gaussian],
) -> Result<Vec<ConvergenceReport>> {
    if grids.len() < 2 {
        return Err(Error::Precondition("a convergence study needs at least two grids".into()));
    }
    let mut per_spec: Vec<Vec<ConvergenceLevel>> = vec![vec![]; specs.len()];
    for g in grids {
        let probe = CommutatorProbe::new(entry, hbar, g, tests.iter().map(|t| t.sample(g)).collect())?;
        for (levels, spec) in per_spec.iter_mut().zip(specs) {
            levels.push(ConvergenceLevel {
                h: g.h,
                residual: probe.residual(spec)?,
            });
        }
    }
    Ok(specs
        .iter()
        .zip(per_spec)
        .map(|(spec, levels)| report(&spec.name, levels, tests.len()))
        .collect())
}

fn report(spec: &str, levels: Vec<ConvergenceLevel>, ntests: usize) -> ConvergenceReport {
    let ratio = |a: f64, b: f64, ha: f64, hb: f64| (a / b).ln() / (ha / hb).ln();
    let orders: Vec<f64> = levels
        .windows(2)
        .map(|w| ratio(w[0].residual.aggregate, w[1].residual.aggregate, w[0].h, w[1].h))
        .collect();
    let per_psi_orders = (0..ntests)
        .map(|t| {
            levels
                .windows(2)
                .map(|w| ratio(w[0].residual.per_psi[t], w[1].residual.per_psi[t], w[0].h, w[1].h))
                .collect()
        })
        .collect();
    let richardson_spread = (orders.len() >= 2).then(|| {
        let lo = orders.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = orders.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    });
    let fine = &levels.last().expect("at least two levels").residual;
    ConvergenceReport {
        spec: spec.to_string(),
        floor_limited: fine.aggregate < FLOOR_FACTOR * fine.floor,
        levels,
        orders,
        per_psi_orders,
        richardson_spread,
    }
}

/// `spec` with every correction function `g1, g2, g0` scaled by 4/3; `None`
/// when the spec has no correction.
pub fn corrupted_control(spec: &IntegralSpec) -> Option<IntegralSpec> {
    if spec.g1.is_empty() && spec.g2.is_empty() && spec.g0.is_empty() {
        return None;
    }
    let mut out = spec.clone().renamed(&format!("{}~corrupt", spec.name));
    for g in [&mut out.g1, &mut out.g2, &mut out.g0] {
        g.terms.iter_mut().for_each(|t| t.coeff *= 4.0 / 3.0);
    }
    Some(out)
}

/// Rows `spec,test,h,residual,order_estimate`: one per test function and
/// level, then an aggregate row per level.
pub fn write_convergence_csv(reports: &[ConvergenceReport], mut out: impl Write) -> Result<()> {
    writeln!(out, "spec,test,h,residual,order_estimate")?;
    for r in reports {
        let ntests = r.per_psi_orders.len();
        for t in 0..=ntests {
            for (li, level) in r.levels.iter().enumerate() {
                let (label, res, order) = if t < ntests {
                    (t.to_string(), level.residual.per_psi[t], li.checked_sub(1).map(|k| r.per_psi_orders[t][k]))
                } else {
                    ("aggregate".to_string(), level.residual.aggregate, li.checked_sub(1).map(|k| r.orders[k]))
                };
                let order = order.map_or(String::new(), |o| format!("{o:.6}"));
                writeln!(out, "{},{},{:.6e},{:.16e},{}", r.spec, label, level.h, res, order)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{instantiate, Family, Params};
    use crate::field::SampledField;
    use crate::integral::Mechanics;

    fn free() -> PotentialEntry {
        instantiate(Family::Free, &Params::new()).unwrap()
    }

    fn grid(h: f64) -> GridSpec {
        GridSpec::new(BBox::new(0.5, 2.5, -1.0, 1.0), h, COMMUTATOR_RADIUS).unwrap()
    }

    #[test]
    fn grid_refinement_nests() {
        let g = grid(0.04);
        assert_eq!((g.nx, g.ny), (51, 51));
        let f = g.refined();
        assert_eq!((f.nx, f.ny, f.margin), (101, 101, 8));
        assert_eq!(f.x(f.nx - 1), g.x(g.nx - 1));
        assert!(GridSpec::new(BBox::new(0.0, 0.1, 0.0, 0.1), 0.04, 3).is_err());
    }

    #[test]
    fn constant_coefficient_momentum() {
        let g = grid(0.05);
        let psi = Gaussian::isotropic(1.5, 0.0, 0.3).with_momentum(0.4, 0.0).sample(&g);
        let one = SampledField::new(|_| 1.0);
        let out = apply_sym_term(&one, (1, 0), 0.8, &psi, &g).unwrap();
        let d = diff(&g, &psi.values, 1, 0, false);
        for idx in 0..g.len() {
            let want = d[idx] * C::new(0.0, -0.8) * 2.0;
            assert!((out.values[idx] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn product_rule_on_constant() {
        let g = grid(0.05);
        let one = GridFunction::from_fn(&g, |_, _| C::new(1.0, 0.0));
        let x = SampledField::new(|p| p.x);
        let out = apply_sym_term(&x, (1, 0), 1.0, &one, &g).unwrap();
        for idx in (0..g.len()).filter(|&i| g.is_interior(i)) {
            assert!((out.values[idx] - C::new(0.0, -1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_commutes_with_itself() {
        let e = instantiate(Family::Oscillator, &Params::new()).unwrap();
        let g = GridSpec::new(e.grid_box, 0.04, COMMUTATOR_RADIUS).unwrap();
        let psis: Vec<_> = gaussian_tests(&g, 4, 1).unwrap().iter().map(|t| t.sample(&g)).collect();
        let r = commutator_residual(&e, &hamiltonian_spec(&e), 1.0, &g, &psis).unwrap();
        assert!(r.per_psi.iter().all(|v| *v == 0.0), "{:?}", r.per_psi);
    }

    #[test]
    fn plane_wave_dispersion() {
        let e = free();
        let (kx, ky) = (1.1, -0.7);
        let mut errs = vec![];
        for h in [0.04, 0.02] {
            let g = grid(h);
            let psi = GridFunction::from_fn(&g, |x, y| C::from_polar(1.0, kx * x + ky * y));
            let hpsi = apply_h(&e, 1.0, &psi, &g).unwrap();
            let e_k = 0.5 * (kx * kx + ky * ky);
            let want = GridFunction { grid: g, values: psi.values.iter().map(|v| v * e_k).collect() };
            errs.push(hpsi.sub(&want).norm() / psi.norm());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.05, "{errs:?}");
    }

    #[test]
    fn constant_shift() {
        let e = free();
        let g = grid(0.05);
        let psi = Gaussian::isotropic(1.4, 0.1, 0.25).with_momentum(0.0, 1.0).sample(&g);
        let op = GridOperator::hamiltonian(&e, 1.0, &g).unwrap();
        let a = op.apply(&psi);
        let b = op.clone().shifted(2.5).apply(&psi);
        for i in 0..g.len() {
            assert!((b.values[i] - a.values[i] - 2.5 * psi.values[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn free_cubic_is_floor_limited() {
        let e = free();
        let spec = IntegralSpec::new("p1^3", 3, Mechanics::Both).lead(0, 3, 0, 1.0);
        let g = GridSpec::new(e.grid_box, 0.04, COMMUTATOR_RADIUS).unwrap();
        let tests = gaussian_tests(&g, 4, 5).unwrap();
        let rep = convergence_order(&e, &spec, 1.0, &g.levels(2), &tests).unwrap();
        assert!(rep.floor_limited, "{:?}", rep.levels);
    }

    #[test]
    fn hermiticity() {
        let e = instantiate(Family::QuantumInverseSq, &Params::new()).unwrap();
        let g = GridSpec::new(BBox::new(0.5, 3.0, -1.0, 1.0), 0.02, 3).unwrap();
        let phi = Gaussian::isotropic(1.6, 0.1, 0.2).with_momentum(0.3, -0.2).sample(&g);
        let psi = Gaussian::isotropic(1.8, -0.1, 0.18).with_momentum(-0.5, 0.6).sample(&g);
        for spec in &e.integrals {
            let x = GridOperator::integral(spec, 1.0, &g).unwrap();
            let a = phi.inner(&x.apply(&psi));
            let b = x.apply(&phi).inner(&psi);
            assert!((a - b).norm() <= 1e-6 * (1.0 + a.norm()), "{} {a} {b}", spec.name);
        }
    }

    #[test]
    fn expanded_and_composed_agree() {
        let spec = IntegralSpec::new("L^2 p2", 3, Mechanics::Both).lead(2, 0, 1, 1.0);
        let mut diffs = vec![];
        for h in [0.02, 0.01] {
            let g = grid(h);
            let psi = Gaussian::isotropic(1.5, 0.1, 0.3).with_momentum(0.5, -0.3).sample(&g);
            let a = GridOperator::integral(&spec, 1.0, &g).unwrap().apply(&psi);
            let b = GridOperator::integral_expanded(&spec, 1.0, &g).unwrap().apply(&psi);
            diffs.push(a.sub(&b).norm() / a.norm());
        }
        let order = (diffs[0] / diffs[1]).log2();
        assert!(diffs[1] < 5e-3 && (order - 2.0).abs() < 0.2, "{diffs:?}");
    }

    #[test]
    fn one_dimensional_translation_commutes() {
        let e = instantiate(Family::TrigV2a, &Params::new()).unwrap();
        let g = GridSpec::new(e.grid_box, 0.04, COMMUTATOR_RADIUS).unwrap();
        let psis: Vec<_> = gaussian_tests(&g, 4, 3).unwrap().iter().map(|t| t.sample(&g)).collect();
        let r = commutator_residual(&e, e.integral("p2").unwrap(), 1.0, &g, &psis).unwrap();
        assert!(r.aggregate <= 1e-12, "{r:?}");
    }

    #[test]
    fn singular_grid_is_rejected() {
        let e = instantiate(Family::InverseSq, &Params::new()).unwrap();
        let g = GridSpec::new(BBox::new(-1.0, 1.0, -1.0, 1.0), 0.05, 3).unwrap();
        assert!(matches!(GridOperator::hamiltonian(&e, 1.0, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn corrupted_control_scales_corrections() {
        let e = instantiate(Family::QuantumInverseSq, &Params::new()).unwrap();
        let x7 = e.integral("X7").unwrap();
        let bad = corrupted_control(x7).unwrap();
        let p = Point::new(1.3, 0.2);
        assert!((bad.g1.value(p).unwrap() - 4.0 / 3.0 * x7.g1.value(p).unwrap()).abs() < 1e-14);
        assert!(corrupted_control(free().integral("p1").unwrap()).is_none());
        let x4 = e.integral("X4").unwrap();
        let bad = corrupted_control(x4).unwrap();
        assert!((bad.g1.value(p).unwrap() - 4.0 / 3.0 * x4.g1.value(p).unwrap()).abs() < 1e-14);
        assert!((bad.g2.value(p).unwrap() - 4.0 / 3.0 * x4.g2.value(p).unwrap()).abs() < 1e-14);
    }
}
