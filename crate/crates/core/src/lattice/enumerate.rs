//! Fincke–Pohst enumeration of short vectors of a positive-definite form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::exact::{rat_to_f64, IntMatrix};

/// Floating-point radii are inflated by this factor so that rounding in the
/// partial sums can never prune a vector whose exact value is within range.
const RADIUS_SLACK: f64 = 1e-8;

/// Outcome of a bounded enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumStatus {
    Complete,
    BudgetExceeded,
}

/// Square-completed form `xᵀGx = Σ_i q_ii (x_i + Σ_{j>i} q_ij x_j)²`.
pub struct Enumerator {
    n: usize,
    q: Vec<Vec<f64>>,
}

impl Enumerator {
    /// Exact rational LDLᵀ of `gram`, rounded once to `f64`.
    pub fn new(gram: &IntMatrix) -> Self {
        let n = gram.dim();
        let mut q: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| BigRational::from(gram[(i, j)].clone()))
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                q[j][i] = q[i][j].clone();
                q[i][j] = &q[i][j] / &q[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    let t = &q[k][i] * &q[i][l];
                    q[k][l] -= t;
                }
            }
        }
        let q = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if j >= i { rat_to_f64(&q[i][j]) } else { 0.0 })
                    .collect()
            })
            .collect();
        Self { n, q }
    }

    /// Visits every nonzero `x` with `xᵀGx ≤ radius` (up to sign: only the
    /// representative whose last nonzero coordinate is positive).
    ///
    /// `visit` may return a smaller radius, which prunes the rest of the
    /// search. Each partial assignment counts as one node; the search stops
    /// once `budget` nodes have been visited.
    pub fn enumerate<F>(&self, radius: f64, budget: u64, mut visit: F) -> (EnumStatus, u64)
    where
        F: FnMut(&[i64]) -> Option<f64>,
    {
        let mut ctx = Ctx {
            radius: radius * (1.0 + RADIUS_SLACK),
            nodes: 0,
            budget,
            x: vec![0; self.n],
            exceeded: false,
        };
        if self.n > 0 {
            self.descend(self.n - 1, 0.0, true, &mut ctx, &mut visit);
        }
        let status = if ctx.exceeded {
            EnumStatus::BudgetExceeded
        } else {
            EnumStatus::Complete
        };
        (status, ctx.nodes)
    }

    fn descend<F>(&self, i: usize, partial: f64, upper_zero: bool, ctx: &mut Ctx, visit: &mut F)
    where
        F: FnMut(&[i64]) -> Option<f64>,
    {
        let center: f64 = -(i + 1..self.n)
            .map(|j| self.q[i][j] * ctx.x[j] as f64)
            .sum::<f64>();
        let room = ctx.radius - partial;
        if room < 0.0 {
            return;
        }
        let half = (room / self.q[i][i]).sqrt();
        let mut lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        if upper_zero {
            lo = lo.max(0);
        }
        if lo > hi {
            return;
        }
        // zig-zag outward from the center so short vectors are met first
        let start = center.round() as i64;
        let mut order: Vec<i64> = (lo..=hi).collect();
        order.sort_by_key(|&v| ((v - start).abs(), v));
        for v in order {
            if ctx.exceeded {
                return;
            }
            ctx.nodes += 1;
            if ctx.nodes > ctx.budget {
                ctx.exceeded = true;
                return;
            }
            let t = v as f64 - center;
            let p = partial + self.q[i][i] * t * t;
            if p > ctx.radius {
                continue;
            }
            ctx.x[i] = v;
            if i == 0 {
                if ctx.x.iter().any(|&c| c != 0) {
                    if let Some(r) = visit(&ctx.x) {
                        ctx.radius = ctx.radius.min(r * (1.0 + RADIUS_SLACK));
                    }
                }
            } else {
                self.descend(i - 1, p, upper_zero && v == 0, ctx, visit);
            }
        }
        ctx.x[i] = 0;
    }
}

struct Ctx {
    radius: f64,
    nodes: u64,
    budget: u64,
    x: Vec<i64>,
    exceeded: bool,
}

/// `basis · x` in the original coordinates.
pub fn to_original(basis: &IntMatrix, x: &[i64]) -> Vec<BigInt> {
    let xs: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
    basis.mul_vec(&xs)
}

/// Sign normalisation: first nonzero component positive.
pub fn canonical_sign(v: &mut [BigInt]) {
    if let Some(first) = v.iter().find(|c| !c.is_zero()) {
        if first < &BigInt::zero() {
            v.iter_mut().for_each(|c| *c = -c.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_all_short_vectors_of_a2_lattice() {
        // hexagonal lattice: six minimal vectors, three up to sign
        let g = IntMatrix::from_i64([[2, 1], [1, 2]]);
        let e = Enumerator::new(&g);
        let mut found = Vec::new();
        let (st, _) = e.enumerate(2.0, 1_000, |x| {
            found.push(x.to_vec());
            None
        });
        assert_eq!(st, EnumStatus::Complete);
        assert_eq!(found.len(), 3);
        for x in &found {
            let v: Vec<BigInt> = x.iter().map(|&c| c.into()).collect();
            assert_eq!(g.quadratic_form(&v), 2.into());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = IntMatrix::identity(4);
        let e = Enumerator::new(&g);
        let (st, nodes) = e.enumerate(100.0, 50, |_| None);
        assert_eq!(st, EnumStatus::BudgetExceeded);
        assert!(nodes <= 51);
    }

    #[test]
    fn sign_canonicalisation() {
        let mut v = vec![BigInt::from(0), BigInt::from(-2), BigInt::from(3)];
        canonical_sign(&mut v);
        assert_eq!(v, vec![0.into(), 2.into(), (-3).into()]);
    }
}
