//! Truncated Fourier-mode simulation of the noisy transfer operator
//! `T f = g_{ε,α} * (f ∘ F̃)` on `L²₀(Tᵈ)`.
//!
//! In mode space `T` sends `e_k` to `e^{2πi k·c} e^{−ε|Ak|^{2α}} e_{Ak}` with
//! `A = Fᵀ`. Modes mapped outside the box `|k|∞ ≤ K` are dropped, so the
//! truncated operator is a compression of the true one and its norms are
//! lower bounds.

use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::arithmin::{minimize, MinInstance};
use crate::dissipation::NoiseModel;
use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::spectral::{degeneracy_case, DegeneracyCase, Shift, ToralMap};

pub const NORM_TOL: f64 = 1e-10;
pub const RESOLVENT_TOL: f64 = 1e-8;
pub const MAX_POWER_ITERATIONS: usize = 20_000;
/// Grid values below this are reported as aliasing failures.
pub const NEGATIVE_DENSITY_TOL: f64 = 1e-6;

/// Default cutoff per dimension.
pub fn default_cutoff(d: usize) -> usize {
    match d {
        0..=2 => 64,
        3 => 16,
        _ => 6,
    }
}

/// All `k ≠ 0` with `|k|∞ ≤ K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeBox {
    d: usize,
    k: usize,
    side: usize,
    zero: usize,
}

impl ModeBox {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "mode box needs d ≥ 1 and K ≥ 1, got d={d}, K={k}"
            )));
        }
        let side = 2 * k + 1;
        let full = side
            .checked_pow(d as u32)
            .filter(|&n| n <= 1 << 26)
            .ok_or_else(|| Error::InvalidParameter(format!("mode box {side}^{d} is too large")))?;
        Ok(Self {
            d,
            k,
            side,
            zero: full / 2,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cutoff(&self) -> usize {
        self.k
    }

    /// `(2K+1)^d − 1`
    pub fn len(&self) -> usize {
        self.side.pow(self.d as u32) - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.iter().all(|x| x.unsigned_abs() as usize <= self.k) && k.iter().any(|&x| x != 0)
    }

    pub fn index(&self, k: &[i64]) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let mut raw = 0usize;
        for &x in k {
            raw = raw * self.side + (x + self.k as i64) as usize;
        }
        Some(if raw > self.zero { raw - 1 } else { raw })
    }

    pub fn mode(&self, idx: usize) -> Vec<i64> {
        let mut raw = if idx >= self.zero { idx + 1 } else { idx };
        let mut k = vec![0i64; self.d];
        for x in k.iter_mut().rev() {
            *x = (raw % self.side) as i64 - self.k as i64;
            raw /= self.side;
        }
        k
    }

    pub fn modes(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|i| self.mode(i))
    }
}

/// `e^{2πi k·c}`, with `k·c` reduced mod 1 exactly for rational shifts.
fn phase(k: &[i64], shift: Option<&Shift>) -> Complex64 {
    let t = match shift {
        None => return Complex64::one(),
        Some(Shift::Rational(c)) => {
            let s: BigRational = k
                .iter()
                .zip(&c.0)
                .map(|(&ki, ci)| ci * BigInt::from(ki))
                .sum();
            let frac = &s - s.floor();
            frac.to_f64().unwrap_or(0.0)
        }
        Some(Shift::Real(c)) => k
            .iter()
            .zip(c)
            .map(|(&ki, ci)| ki as f64 * ci)
            .sum::<f64>()
            .rem_euclid(1.0),
    };
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
}

pub struct TruncatedOperator {
    map: ToralMap,
    noise: NoiseModel,
    mbox: ModeBox,
    a: IntMatrix,
    /// `next[i]`: index of `A k_i`, if inside the box.
    next: Vec<Option<usize>>,
    prev: Vec<Option<usize>>,
    /// weight × phase for the transition out of mode `i`
    coef: Vec<Complex64>,
}

impl TruncatedOperator {
    pub fn new(map: ToralMap, noise: NoiseModel, cutoff: usize) -> Result<Self> {
        let d = map.linear.dim();
        let mbox = ModeBox::new(d, cutoff)?;
        let a = map.linear.transpose();
        let af: Vec<i64> = a
            .entries()
            .iter()
            .map(|x| {
                x.to_i64()
                    .ok_or_else(|| Error::InvalidParameter("matrix entries exceed i64".into()))
            })
            .collect::<Result<_>>()?;
        let b = match &noise.degeneracy {
            Some(b) if b.len() != d * d => {
                return Err(Error::Dimension(format!(
                    "noise matrix has {} entries, expected {}",
                    b.len(),
                    d * d
                )))
            }
            other => other.clone(),
        };
        let n = mbox.len();
        let (next, coef): (Vec<Option<usize>>, Vec<Complex64>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let k = mbox.mode(i);
                let ak: Vec<i64> = (0..d)
                    .map(|r| (0..d).map(|c| af[r * d + c] * k[c]).sum())
                    .collect();
                let sq: f64 = match &b {
                    None => ak.iter().map(|&x| (x * x) as f64).sum(),
                    Some(b) => (0..d)
                        .map(|r| {
                            let s: f64 = (0..d).map(|c| b[r * d + c] * ak[c] as f64).sum();
                            s * s
                        })
                        .sum(),
                };
                let w = (-noise.epsilon * sq.powf(noise.alpha)).exp();
                (mbox.index(&ak), phase(&k, map.shift.as_ref()) * w)
            })
            .unzip();
        let mut prev = vec![None; n];
        for (i, j) in next.iter().enumerate() {
            if let Some(j) = j {
                prev[*j] = Some(i);
            }
        }
        Ok(Self {
            map,
            noise,
            mbox,
            a,
            next,
            prev,
            coef,
        })
    }

    pub fn mode_box(&self) -> &ModeBox {
        &self.mbox
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// One step; returns the new coefficients and the L² mass that left the box.
    pub fn apply(&self, state: &[Complex64]) -> (Vec<Complex64>, f64) {
        let out: Vec<Complex64> = (0..state.len())
            .into_par_iter()
            .map(|j| match self.prev[j] {
                Some(i) => self.coef[i] * state[i],
                None => Complex64::zero(),
            })
            .collect();
        let dropped: f64 = self
            .next
            .par_iter()
            .enumerate()
            .filter(|(_, j)| j.is_none())
            .map(|(i, _)| (self.coef[i] * state[i]).norm_sqr())
            .sum();
        (out, dropped)
    }

    pub fn apply_adjoint(&self, state: &[Complex64]) -> Vec<Complex64> {
        (0..state.len())
            .into_par_iter()
            .map(|i| match self.next[i] {
                Some(j) => self.coef[i].conj() * state[j],
                None => Complex64::zero(),
            })
            .collect()
    }

    fn apply_n(&self, v: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut v = v.to_vec();
        for _ in 0..n {
            v = self.apply(&v).0;
        }
        v
    }

    fn apply_adjoint_n(&self, v: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut v = v.to_vec();
        for _ in 0..n {
            v = self.apply_adjoint(&v);
        }
        v
    }

    /// Analytic `exp(−ε·M(n))` and the minimizer, or `None` when the noise
    /// misses an invariant direction.
    fn analytic(&self, n: usize) -> Result<Option<(f64, Vec<i64>)>> {
        let inst = match &self.noise.degeneracy {
            None => MinInstance::full_sum(&self.a, n, self.noise.alpha),
            Some(b) => {
                if degeneracy_case(&self.a, b)?.case == DegeneracyCase::NoDissipation {
                    return Ok(None);
                }
                MinInstance::degenerate(&self.a, n, self.noise.alpha, b)
            }
        };
        let r = minimize(&inst, &self.noise.min_options())?;
        let z = r
            .argmin
            .iter()
            .map(|x| x.to_i64().unwrap_or(i64::MAX))
            .collect();
        Ok(Some(((-self.noise.epsilon * r.value).exp(), z)))
    }

    fn orbit_fits(&self, z: &[i64], n: usize) -> bool {
        let mut idx = self.mbox.index(z);
        for _ in 0..n {
            match idx {
                Some(i) => idx = self.next[i],
                None => return false,
            }
        }
        idx.is_some()
    }

    /// Largest singular value of the truncated `Tⁿ`.
    pub fn norm_estimate(&self, n: usize) -> Result<NormEstimate> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let analytic = self.analytic(n)?;
        let (analytic_value, valid, seed) = match &analytic {
            Some((v, z)) => (*v, self.orbit_fits(z, n), self.mbox.index(z)),
            None => (1.0, false, None),
        };
        let len = self.mbox.len();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 1e-6)
            .collect();
        // without a minimizer, the heaviest surviving orbit is an exact top
        // singular vector of the diagonal Gram
        let seed = seed.or_else(|| Some(self.diagonal_norm(n).0));
        if let Some(s) = seed {
            v[s] += Complex64::one();
        }
        normalize(&mut v);
        let mut est = 0.0;
        for it in 1..=MAX_POWER_ITERATIONS {
            let w = self.apply_n(&v, n);
            let s = l2(&w);
            if s == 0.0 {
                return Ok(NormEstimate {
                    estimate: 0.0,
                    analytic: analytic_value,
                    valid,
                    iterations: it,
                });
            }
            let mut u = self.apply_adjoint_n(&w, n);
            normalize(&mut u);
            v = u;
            if (s - est).abs() <= NORM_TOL * s {
                return Ok(NormEstimate {
                    estimate: s,
                    analytic: analytic_value,
                    valid,
                    iterations: it,
                });
            }
            est = s;
        }
        // Tⁿ sends modes to modes injectively, so (Tⁿ)*Tⁿ is diagonal and its
        // largest entry settles near-degenerate cases the iteration cannot
        Ok(NormEstimate {
            estimate: self.diagonal_norm(n).1,
            analytic: analytic_value,
            valid,
            iterations: MAX_POWER_ITERATIONS,
        })
    }

    /// Start mode and weight of the largest `|Π coef|` along an `n`-step
    /// orbit that stays in the box.
    fn diagonal_norm(&self, n: usize) -> (usize, f64) {
        (0..self.mbox.len())
            .into_par_iter()
            .map(|start| {
                let (mut i, mut w) = (start, 1.0);
                for step in 0..n {
                    w *= self.coef[i].norm();
                    match self.next[i] {
                        Some(j) if step + 1 < n => i = j,
                        Some(_) => {}
                        None => return (start, 0.0),
                    }
                }
                (start, w)
            })
            .reduce(
                || (0, 0.0),
                |a, b| {
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                },
            )
    }

    /// Chains end where a mode leaves the box; cycles stay inside.
    fn orbits(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let n = self.mbox.len();
        let mut seen = vec![false; n];
        let mut chains = Vec::new();
        for s in 0..n {
            if self.prev[s].is_none() {
                let mut c = vec![s];
                seen[s] = true;
                let mut cur = s;
                while let Some(j) = self.next[cur] {
                    c.push(j);
                    seen[j] = true;
                    cur = j;
                }
                chains.push(c);
            }
        }
        let mut cycles = Vec::new();
        for s in 0..n {
            if !seen[s] {
                let mut c = vec![s];
                seen[s] = true;
                let mut cur = self.next[s].expect("cycle");
                while cur != s {
                    c.push(cur);
                    seen[cur] = true;
                    cur = self.next[cur].expect("cycle");
                }
                cycles.push(c);
            }
        }
        (chains, cycles)
    }

    /// Solves `(I − T)x = b` (or the adjoint) along chains and cycles.
    fn resolvent_solve(
        &self,
        orbits: &(Vec<Vec<usize>>, Vec<Vec<usize>>),
        b: &[Complex64],
        adjoint: bool,
    ) -> Result<Vec<Complex64>> {
        let mut x = vec![Complex64::zero(); b.len()];
        let c = |i: usize| {
            if adjoint {
                self.coef[i].conj()
            } else {
                self.coef[i]
            }
        };
        for chain in &orbits.0 {
            if adjoint {
                // y_i = b_i + c̄_i y_{next(i)}
                let mut acc = Complex64::zero();
                for (pos, &i) in chain.iter().enumerate().rev() {
                    acc = if pos + 1 == chain.len() {
                        b[i]
                    } else {
                        b[i] + c(i) * acc
                    };
                    x[i] = acc;
                }
            } else {
                let mut acc = Complex64::zero();
                for (pos, &i) in chain.iter().enumerate() {
                    acc = if pos == 0 {
                        b[i]
                    } else {
                        b[i] + c(chain[pos - 1]) * acc
                    };
                    x[i] = acc;
                }
            }
        }
        for cycle in &orbits.1 {
            let order: Vec<usize> = if adjoint {
                cycle.iter().rev().copied().collect()
            } else {
                cycle.clone()
            };
            // the coefficient linking order[m] to order[m+1]
            let link = |m: usize| {
                if adjoint {
                    c(order[m + 1])
                } else {
                    c(order[m])
                }
            };
            let last = order.len() - 1;
            let closing = if adjoint { c(order[0]) } else { c(order[last]) };
            // x_m = p_m + q_m x_0
            let (mut p, mut q) = (Complex64::zero(), Complex64::one());
            for m in 0..last {
                p = b[order[m + 1]] + link(m) * p;
                q *= link(m);
            }
            let denom = Complex64::one() - closing * q;
            if denom.norm() < 1e-14 {
                return Err(Error::SolveDivergence(format!(
                    "undamped cycle of length {}",
                    order.len()
                )));
            }
            let x0 = (b[order[0]] + closing * p) / denom;
            let mut cur = x0;
            x[order[0]] = x0;
            for m in 0..last {
                cur = b[order[m + 1]] + link(m) * cur;
                x[order[m + 1]] = cur;
            }
        }
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::SolveDivergence("non-finite solution".into()));
        }
        Ok(x)
    }

    /// `‖(I − T)⁻¹‖` on the truncated space.
    pub fn resolvent_norm_estimate(&self) -> Result<f64> {
        let orbits = self.orbits();
        let len = self.mbox.len();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        normalize(&mut v);
        let mut est = 0.0;
        for _ in 0..MAX_POWER_ITERATIONS {
            let w = self.resolvent_solve(&orbits, &v, false)?;
            let s = l2(&w);
            let mut u = self.resolvent_solve(&orbits, &w, true)?;
            normalize(&mut u);
            v = u;
            if (s - est).abs() <= RESOLVENT_TOL * s {
                return Ok(s);
            }
            est = s;
        }
        Err(Error::PowerIterationStall {
            iterations: MAX_POWER_ITERATIONS,
        })
    }

    /// Evolves a density for `n` steps, recording fluctuation, entropy and
    /// cumulative dropped mass before each step and after the last.
    pub fn evolve_density(&self, f0: &DensityState, n: usize) -> Result<Vec<TrajectoryRow>> {
        if f0.coeffs.len() != self.mbox.len() {
            return Err(Error::Dimension("density and operator boxes differ".into()));
        }
        let grid = DensityGrid::new(&self.mbox);
        let mut rows = Vec::with_capacity(n + 1);
        let mut state = f0.coeffs.clone();
        let mut dropped = 0.0;
        for step in 0..=n {
            rows.push(TrajectoryRow {
                n: step,
                l2_fluct: l2(&state),
                bg_entropy: grid.entropy(&state)?,
                dropped_mass: dropped,
            });
            if step < n {
                let (next, d) = self.apply(&state);
                state = next;
                dropped += d;
            }
        }
        Ok(rows)
    }

    pub fn map(&self) -> &ToralMap {
        &self.map
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = l2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub estimate: f64,
    pub analytic: f64,
    /// The analytic minimizer's orbit stays inside the box.
    pub valid: bool,
    pub iterations: usize,
}

/// Fourier coefficients of `f − 1` over the box; the mean is fixed at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    pub coeffs: Vec<Complex64>,
}

impl DensityState {
    pub fn uniform(mbox: &ModeBox) -> Self {
        Self {
            coeffs: vec![Complex64::zero(); mbox.len()],
        }
    }

    /// `1 + amplitude·cos(2π k·x)`, nonnegative for `|amplitude| ≤ 1`.
    pub fn cosine(mbox: &ModeBox, k: &[i64], amplitude: f64) -> Result<Self> {
        let mut s = Self::uniform(mbox);
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        let (Some(i), Some(j)) = (mbox.index(k), mbox.index(&neg)) else {
            return Err(Error::InvalidParameter(format!(
                "mode {k:?} is not in the box"
            )));
        };
        s.coeffs[i] += amplitude / 2.0;
        s.coeffs[j] += amplitude / 2.0;
        Ok(s)
    }

    /// Checks `c(−k) = conj c(k)`.
    pub fn is_real(&self, mbox: &ModeBox, tol: f64) -> bool {
        (0..mbox.len()).all(|i| {
            let neg: Vec<i64> = mbox.mode(i).iter().map(|x| -x).collect();
            let j = mbox.index(&neg).unwrap();
            (self.coeffs[i] - self.coeffs[j].conj()).norm() <= tol
        })
    }
}

/// Uniform sampling grid of `4K` points per dimension.
struct DensityGrid {
    d: usize,
    g: usize,
    places: Vec<usize>,
}

impl DensityGrid {
    fn new(mbox: &ModeBox) -> Self {
        let g = 4 * mbox.cutoff();
        let places = mbox
            .modes()
            .map(|k| {
                k.iter()
                    .fold(0usize, |acc, &x| acc * g + x.rem_euclid(g as i64) as usize)
            })
            .collect();
        Self {
            d: mbox.dim(),
            g,
            places,
        }
    }

    fn values(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let total = self.g.pow(self.d as u32);
        let mut buf = vec![Complex64::zero(); total];
        for (c, &p) in coeffs.iter().zip(&self.places) {
            buf[p] += c;
        }
        let fft = FftPlanner::new().plan_fft_inverse(self.g);
        // one axis at a time: stride g^(d−1−axis)
        for axis in 0..self.d {
            let stride = self.g.pow((self.d - 1 - axis) as u32);
            let mut line = vec![Complex64::zero(); self.g];
            for base in 0..total {
                if !(base / stride).is_multiple_of(self.g) {
                    continue;
                }
                for (t, v) in line.iter_mut().enumerate() {
                    *v = buf[base + t * stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    buf[base + t * stride] = *v;
                }
            }
        }
        buf.iter().map(|z| 1.0 + z.re).collect()
    }

    /// `∫ −f ln f` by the grid mean.
    fn entropy(&self, coeffs: &[Complex64]) -> Result<f64> {
        let f = self.values(coeffs);
        let min = f.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -NEGATIVE_DENSITY_TOL {
            return Err(Error::NegativeDensity { min });
        }
        let s: f64 = f
            .iter()
            .map(|&u| if u > 0.0 { -u * u.ln() } else { 0.0 })
            .sum();
        // + 0.0 turns a -0.0 sum into 0
        Ok(s / f.len() as f64 + 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub l2_fluct: f64,
    pub bg_entropy: f64,
    pub dropped_mass: f64,
}

pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    wr.flush()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

pub fn read_trajectory_csv<R: std::io::Read>(r: R) -> Result<Vec<TrajectoryRow>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize()
        .map(|rec| rec.map_err(|e| Error::Parse(format!("csv: {e}"))))
        .collect()
}

/// Largest deviation of the truncated norm across shifts of one linear map.
pub fn affine_invariance_check(
    f: &IntMatrix,
    shifts: &[Shift],
    noise: &NoiseModel,
    n: usize,
    cutoff: usize,
) -> Result<f64> {
    let base = TruncatedOperator::new(ToralMap::linear_only(f.clone())?, noise.clone(), cutoff)?
        .norm_estimate(n)?
        .estimate;
    shifts
        .par_iter()
        .map(|s| {
            let map = ToralMap::new(f.clone(), Some(s.clone()))?;
            let e = TruncatedOperator::new(map, noise.clone(), cutoff)?
                .norm_estimate(n)?
                .estimate;
            Ok((e - base).abs())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> IntMatrix {
        IntMatrix::from_i64([[2, 1], [1, 1]])
    }

    fn op(f: IntMatrix, shift: Option<&str>, eps: f64, k: usize) -> TruncatedOperator {
        let map = ToralMap::new(f, shift.map(|s| Shift::parse(s).unwrap())).unwrap();
        let noise = NoiseModel {
            epsilon: eps,
            alpha: 1.0,
            degeneracy: None,
            log_inv_eta: 1.0,
            budget: crate::arithmin::DEFAULT_BUDGET,
        };
        TruncatedOperator::new(map, noise, k).unwrap()
    }

    fn basis(t: &TruncatedOperator, k: &[i64]) -> Vec<Complex64> {
        let mut v = vec![Complex64::zero(); t.mode_box().len()];
        v[t.mode_box().index(k).unwrap()] = Complex64::one();
        v
    }

    #[test]
    fn mode_box_indexing() {
        let b = ModeBox::new(2, 3).unwrap();
        assert_eq!(b.len(), 48);
        for i in 0..b.len() {
            assert_eq!(b.index(&b.mode(i)), Some(i));
        }
        assert_eq!(b.index(&[0, 0]), None);
        assert_eq!(b.index(&[4, 0]), None);
        assert_eq!(ModeBox::new(3, 2).unwrap().len(), 124);
    }

    #[test]
    fn apply_examples() {
        let t = op(cat(), None, 0.0, 4);
        let (out, _) = t.apply(&basis(&t, &[1, 0]));
        assert_eq!(out, basis(&t, &[2, 1]));
        let t = op(IntMatrix::identity(2), None, 0.1, 4);
        let (out, dropped) = t.apply(&basis(&t, &[1, 0]));
        let i = t.mode_box().index(&[1, 0]).unwrap();
        assert!((out[i].re - (-0.1f64).exp()).abs() < 1e-15);
        assert_eq!(dropped, 0.0);
        let t = op(IntMatrix::identity(2), Some("1/2,0"), 0.0, 4);
        let (out, _) = t.apply(&basis(&t, &[1, 0]));
        assert!((out[i] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let t = op(cat(), None, 1.0, 64);
        let r = t.norm_estimate(3).unwrap();
        assert!(r.valid);
        assert!((r.estimate - (-8f64).exp()).abs() < 1e-10);
        let t = op(IntMatrix::identity(2), None, 0.1, 1);
        let r = t.norm_estimate(10).unwrap();
        assert!((r.estimate - (-1f64).exp()).abs() < 1e-12);
        let t = op(cat(), None, 0.5, 8);
        let r = t.norm_estimate(12).unwrap();
        assert!(!r.valid);
        assert!(r.estimate <= r.analytic);
    }

    #[test]
    fn power_iteration_agrees_with_the_diagonal_gram() {
        for (f, eps, n) in [
            (cat(), 1.0, 3),
            (cat(), 0.1, 6),
            (IntMatrix::identity(2), 0.1, 10),
        ] {
            let t = op(f, None, eps, 16);
            let r = t.norm_estimate(n).unwrap();
            assert!((r.estimate - t.diagonal_norm(n).1).abs() <= 1e-9 * r.estimate);
        }
        let mut t = op(cat(), None, 0.01, 32);
        t.noise.degeneracy = Some(crate::spectral::cat_unstable_projector());
        let r = t.norm_estimate(6).unwrap();
        assert!((r.estimate - t.diagonal_norm(6).1).abs() <= 1e-9);
        assert!(r.iterations < 10);
    }

    #[test]
    fn resolvent_examples() {
        let t = op(IntMatrix::identity(2), None, 0.1, 8);
        let r = t.resolvent_norm_estimate().unwrap();
        assert!((r - 1.0 / (1.0 - (-0.1f64).exp())).abs() < 1e-6 * r, "{r}");
        let t = op(IntMatrix::from_i64([[1, 1], [0, 1]]), None, 0.01, 8);
        let r = t.resolvent_norm_estimate().unwrap();
        assert!(r >= (1.0 / (1.0 - (-0.01f64).exp())) * (1.0 - 1e-6), "{r}");
    }

    #[test]
    fn resolvent_solve_inverts() {
        let t = op(
            IntMatrix::from_i64([[0, -1], [1, 0]]),
            Some("1/3,1/5"),
            0.2,
            3,
        );
        let orbits = t.orbits();
        let len = t.mode_box().len();
        let b: Vec<Complex64> = (0..len).map(|i| Complex64::new(i as f64, 1.0)).collect();
        for adjoint in [false, true] {
            let x = t.resolvent_solve(&orbits, &b, adjoint).unwrap();
            let tx = if adjoint {
                t.apply_adjoint(&x)
            } else {
                t.apply(&x).0
            };
            for i in 0..len {
                assert!((x[i] - tx[i] - b[i]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn entropy_examples() {
        let t = op(cat(), None, 0.01, 16);
        let b = t.mode_box().clone();
        let rows = t.evolve_density(&DensityState::uniform(&b), 3).unwrap();
        assert!(rows.iter().all(|r| r.bg_entropy.abs() < 1e-15));
        let f0 = DensityState::cosine(&b, &[1, 0], 1.0).unwrap();
        assert!(f0.is_real(&b, 0.0));
        let rows = t.evolve_density(&f0, 30).unwrap();
        // same-grid 1D sum, and the integral ln 2 − 1 up to the quadrature error at the zero of f
        let g = 64;
        let direct: f64 = (0..g)
            .map(|j| 1.0 + (2.0 * std::f64::consts::PI * j as f64 / g as f64).cos())
            .map(|u: f64| if u > 0.0 { -u * u.ln() } else { 0.0 })
            .sum::<f64>()
            / g as f64;
        assert!((rows[0].bg_entropy - direct).abs() < 1e-12);
        assert!((rows[0].bg_entropy - (2f64.ln() - 1.0)).abs() < 1e-4);
        assert!(rows.last().unwrap().bg_entropy.abs() < 0.01);
        for w in rows.windows(2).skip(1) {
            assert!(w[1].bg_entropy >= w[0].bg_entropy - 1e-9);
        }
    }

    #[test]
    fn affine_shifts_leave_the_norm_unchanged() {
        let noise = NoiseModel::new(0.5, 1.0).unwrap();
        let shifts = [
            Shift::parse("0,0").unwrap(),
            Shift::parse("1/2,1/3").unwrap(),
            Shift::Real(vec![0.123, 0.456]),
        ];
        assert!(affine_invariance_check(&cat(), &shifts, &noise, 3, 32).unwrap() < 1e-10);
        let noise = NoiseModel::new(0.01, 1.0).unwrap();
        let shear = IntMatrix::from_i64([[1, 1], [0, 1]]);
        let shifts = [Shift::parse("0,1/2").unwrap()];
        assert!(affine_invariance_check(&shear, &shifts, &noise, 10, 32).unwrap() < 1e-10);
    }

    #[test]
    fn trajectory_csv_header() {
        let mut buf = Vec::new();
        let row = TrajectoryRow {
            n: 0,
            l2_fluct: 1.0,
            bg_entropy: 0.0,
            dropped_mass: 0.0,
        };
        write_trajectory_csv(&[row], &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("n,l2_fluct,bg_entropy,dropped_mass\n"));
    }
}
