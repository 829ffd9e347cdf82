//! Certified solvers for the arithmetic minimization problems
//!
//! * full sum: `M(n) = min_{k≠0} Σ_{l=1..n} |A^l k|^{2α}`,
//! * coarse: `min_{k≠0} |k|^{2α} + |Aⁿk|^{2α}`,
//! * degenerate: `inf_{k≠0} Σ_{l=1..n} |B A^l k|^{2α}`,
//!
//! together with an exhaustive brute-force oracle.

mod curve;
mod objective;

pub use curve::{growth_rate_fit, min_curve, GrowthFit, MinCurve, MinTable, PrefixScan};
pub use objective::{canonical, Objective, Score, TIE_TOL};

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{integer_kernel, serde_int, IntMatrix};
use crate::lattice::{lll_gram, to_original, EnumStatus, Enumerator};
use crate::spectral::{degeneracy_case, DegeneracyCase};

/// Default enumeration node cap.
pub const DEFAULT_BUDGET: u64 = 100_000_000;
/// Default max-norm radius of the ball scanned when the infimum is zero.
pub const DEFAULT_ZERO_BALL: i64 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    FullSum,
    Coarse,
    /// Noise matrix `B`, row-major.
    Degenerate(Vec<f64>),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::FullSum => "full_sum",
            Variant::Coarse => "coarse",
            Variant::Degenerate(_) => "degenerate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinInstance {
    pub a: IntMatrix,
    pub n: usize,
    pub alpha: f64,
    pub variant: Variant,
}

impl MinInstance {
    pub fn full_sum(a: &IntMatrix, n: usize, alpha: f64) -> Self {
        Self {
            a: a.clone(),
            n,
            alpha,
            variant: Variant::FullSum,
        }
    }

    pub fn coarse(a: &IntMatrix, n: usize, alpha: f64) -> Self {
        Self {
            variant: Variant::Coarse,
            ..Self::full_sum(a, n, alpha)
        }
    }

    pub fn degenerate(a: &IntMatrix, n: usize, alpha: f64, b: &[f64]) -> Self {
        Self {
            variant: Variant::Degenerate(b.to_vec()),
            ..Self::full_sum(a, n, alpha)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinOptions {
    pub budget: u64,
    pub zero_ball: i64,
}

impl Default for MinOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            zero_ball: DEFAULT_ZERO_BALL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinResult {
    pub value: f64,
    /// The integer value itself when `α = 1` and no noise matrix is involved.
    #[serde(with = "opt_big")]
    pub exact_value: Option<BigInt>,
    #[serde(with = "serde_int::big_vec")]
    pub argmin: Vec<BigInt>,
    pub certified: bool,
    pub search_radius: f64,
    pub nodes_visited: u64,
    /// The infimum over nonzero integer vectors is zero and not attained.
    pub infimum_zero: bool,
}

mod opt_big {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::exact::serde_int::Repr;

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(Repr::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<Repr>::deserialize(d)?
            .map(|r| BigInt::try_from(r).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Running best candidate with deterministic tie-breaking.
pub(crate) struct Best {
    pub score: Option<Score>,
    pub argmin: Vec<BigInt>,
}

impl Best {
    pub fn new() -> Self {
        Self {
            score: None,
            argmin: Vec::new(),
        }
    }

    /// Returns true when the candidate replaced the incumbent.
    pub fn offer(&mut self, score: Score, k: Vec<BigInt>) -> bool {
        let k = canonical(k);
        let replace = match &self.score {
            None => true,
            Some(s) => match score.cmp_value(s) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Equal => k < self.argmin,
                std::cmp::Ordering::Greater => false,
            },
        };
        if replace {
            self.score = Some(score);
            self.argmin = k;
        }
        replace
    }
}

fn finish(obj: &Objective, best: Best, certified: bool, radius: f64, nodes: u64) -> MinResult {
    let score = best.score.expect("at least one candidate");
    MinResult {
        value: obj.value_of(&score),
        exact_value: obj.exact_value_of(&score),
        argmin: best.argmin,
        certified,
        search_radius: radius,
        nodes_visited: nodes,
        infimum_zero: false,
    }
}

pub(crate) struct ShortestVector {
    pub best: Best,
    pub reduced: crate::lattice::Reduced,
    pub enumerator: Enumerator,
    pub status: EnumStatus,
    pub nodes: u64,
}

/// Exact shortest nonzero vector of the definite form `e`; `radius_of` maps
/// an exact form value to the enumeration radius.
pub(crate) fn shortest_vector(
    e: &IntMatrix,
    start: Option<&IntMatrix>,
    budget: u64,
    radius_of: impl Fn(&Score) -> f64,
) -> Result<ShortestVector> {
    let d = e.dim();
    let red = lll_gram(e, start)?;
    let en = Enumerator::new(&red.gram);
    let mut seed = Best::new();
    for i in 0..d {
        let x: Vec<BigInt> = (0..d).map(|j| BigInt::from((i == j) as i64)).collect();
        let k = red.basis.mul_vec(&x);
        seed.offer(Score::Exact(red.gram[(i, i)].clone()), k);
    }
    let radius0 = radius_of(seed.score.as_ref().unwrap());
    let (status, nodes) = en.enumerate(radius0, budget, |x| {
        let xs: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        let q = red.gram.quadratic_form(&xs);
        let k = to_original(&red.basis, x);
        if seed.offer(Score::Exact(q), k) {
            seed.score.as_ref().map(&radius_of)
        } else {
            None
        }
    });
    Ok(ShortestVector {
        best: seed,
        reduced: red,
        enumerator: en,
        status,
        nodes,
    })
}

/// Certified minimum of the objective over `Z^d \ {0}` via the ellipsoid
/// `kᵀEk ≤ R`. Shared by all three variants once `E` is definite.
fn certified_min(obj: &Objective, opts: &MinOptions) -> Result<MinResult> {
    let e = obj.ellipsoid();
    let d = obj.dim();
    if e.determinant().is_zero() {
        // an integer vector annihilated by every M_l: the minimum is 0
        let k = integer_kernel(&e)
            .into_iter()
            .next()
            .expect("singular form");
        let mut best = Best::new();
        best.offer(obj.score(&k), k);
        return Ok(finish(obj, best, true, 0.0, 0));
    }
    let exact = Objective::is_exact(obj);
    let sv = shortest_vector(&e, None, opts.budget, |s| obj.ellipsoid_radius(s))?;
    let (red, en, status) = (sv.reduced, sv.enumerator, sv.status);
    let mut best = Best::new();
    let mut nodes = sv.nodes;
    let seed = sv.best;
    if exact {
        let score = seed.score.clone().unwrap();
        best.offer(score, seed.argmin.clone());
        let radius = obj.ellipsoid_radius(best.score.as_ref().unwrap());
        return budget_check(obj, best, status, radius, nodes, opts);
    }
    if status == EnumStatus::BudgetExceeded {
        best.offer(obj.score(&seed.argmin), seed.argmin.clone());
        let r = obj.ellipsoid_radius(best.score.as_ref().unwrap());
        return budget_check(obj, best, status, r, nodes, opts);
    }

    // α < 1 pass: seeds, then the superadditivity ellipsoid
    best.offer(obj.score(&seed.argmin), seed.argmin.clone());
    for i in 0..d {
        let k: Vec<BigInt> = (0..d).map(|j| BigInt::from((i == j) as i64)).collect();
        best.offer(obj.score(&k), k);
    }
    let radius = obj.ellipsoid_radius(best.score.as_ref().unwrap());
    let mut final_radius = radius;
    let remaining = opts.budget.saturating_sub(nodes);
    let (status, used) = en.enumerate(radius, remaining, |x| {
        let k = to_original(&red.basis, x);
        if best.offer(obj.score(&k), k) {
            let r = obj.ellipsoid_radius(best.score.as_ref().unwrap());
            final_radius = r;
            Some(r)
        } else {
            None
        }
    });
    nodes += used;
    budget_check(obj, best, status, final_radius, nodes, opts)
}

fn budget_check(
    obj: &Objective,
    best: Best,
    status: EnumStatus,
    radius: f64,
    nodes: u64,
    opts: &MinOptions,
) -> Result<MinResult> {
    let certified = status == EnumStatus::Complete;
    let res = finish(obj, best, certified, radius, nodes);
    if certified {
        Ok(res)
    } else {
        Err(Error::EnumerationBudgetExceeded {
            budget: opts.budget,
            partial: Box::new(res),
        })
    }
}

/// Full-sum minimum `M(n)`.
pub fn min_sum(inst: &MinInstance, opts: &MinOptions) -> Result<MinResult> {
    expect_variant(inst, "full_sum")?;
    certified_min(&Objective::new(inst)?, opts)
}

/// Coarse-grained minimum `min |k|^{2α} + |Aⁿk|^{2α}`.
pub fn min_coarse(inst: &MinInstance, opts: &MinOptions) -> Result<MinResult> {
    expect_variant(inst, "coarse")?;
    certified_min(&Objective::new(inst)?, opts)
}

/// Degenerate-noise minimum. When the noise misses a rational invariant
/// direction the infimum is zero; the result then carries `infimum_zero`
/// and the minimum over the ball `|k|∞ ≤ opts.zero_ball`.
pub fn min_degenerate(inst: &MinInstance, opts: &MinOptions) -> Result<MinResult> {
    let Variant::Degenerate(b) = &inst.variant else {
        return Err(Error::InvalidParameter(
            "expected the degenerate variant".into(),
        ));
    };
    let case = degeneracy_case(&inst.a, b)?;
    if case.case == DegeneracyCase::NoDissipation {
        let r = opts.zero_ball.min(oracle_radius_cap(inst.a.dim()));
        let mut res = brute_force_oracle(inst, r)?;
        res.infimum_zero = true;
        res.certified = false;
        return Ok(res);
    }
    certified_min(&Objective::new(inst)?, opts)
}

/// Dispatches on the instance variant.
pub fn minimize(inst: &MinInstance, opts: &MinOptions) -> Result<MinResult> {
    match inst.variant {
        Variant::FullSum => min_sum(inst, opts),
        Variant::Coarse => min_coarse(inst, opts),
        Variant::Degenerate(_) => min_degenerate(inst, opts),
    }
}

fn expect_variant(inst: &MinInstance, want: &str) -> Result<()> {
    if inst.variant.name() != want {
        return Err(Error::InvalidParameter(format!(
            "expected the {want} variant, got {}",
            inst.variant.name()
        )));
    }
    Ok(())
}

/// Largest oracle radius accepted in dimension `d`.
pub fn oracle_radius_cap(d: usize) -> i64 {
    match d {
        0..=3 => 50,
        4 => 10,
        5 => 6,
        _ => 3,
    }
}

/// Exhaustive scan of `0 < |k|∞ ≤ r`, exact objective on every vector.
pub fn brute_force_oracle(inst: &MinInstance, r: i64) -> Result<MinResult> {
    let d = inst.a.dim();
    if r < 1 || r > oracle_radius_cap(d) {
        return Err(Error::InvalidParameter(format!(
            "oracle radius {r} outside 1..={} for d = {d}",
            oracle_radius_cap(d)
        )));
    }
    let obj = Objective::new(inst)?;
    let side = (2 * r + 1) as u64;
    let total = side.pow(d as u32);
    // only the half space whose first nonzero coordinate is positive
    let chunk = side.pow(d as u32 - 1).max(1);
    let partials: Vec<Best> = (0..side)
        .into_par_iter()
        .map(|first| {
            let mut best = Best::new();
            let mut k = vec![0i64; d];
            for idx in first * chunk..(first + 1) * chunk {
                let mut rem = idx;
                for c in (0..d).rev() {
                    k[c] = (rem % side) as i64 - r;
                    rem /= side;
                }
                match k.iter().find(|&&c| c != 0) {
                    Some(&c) if c > 0 => {}
                    _ => continue,
                }
                let s = obj.score_small(&k);
                if best
                    .score
                    .as_ref()
                    .is_none_or(|b| s.cmp_value(b) != std::cmp::Ordering::Greater)
                {
                    best.offer(s, k.iter().map(|&v| BigInt::from(v)).collect());
                }
            }
            best
        })
        .collect();
    let mut best = Best::new();
    for p in partials {
        if let Some(s) = p.score {
            best.offer(s, p.argmin);
        }
    }
    Ok(finish(&obj, best, false, r as f64, total - 1))
}

/// `Σ (t_l(k)/D)^α` recomputed from scratch.
pub fn objective_value(inst: &MinInstance, k: &[BigInt]) -> Result<f64> {
    let obj = Objective::new(inst)?;
    Ok(obj.value_of(&obj.score(k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> IntMatrix {
        IntMatrix::from_i64([[2, 1], [1, 1]])
    }

    fn v(x: &[i64]) -> Vec<BigInt> {
        x.iter().map(|&c| c.into()).collect()
    }

    fn opts() -> MinOptions {
        MinOptions::default()
    }

    #[test]
    fn full_sum_examples() {
        let inst = MinInstance::full_sum(&cat(), 1, 1.0);
        let r = min_sum(&inst, &opts()).unwrap();
        assert_eq!(r.exact_value, Some(1.into()));
        assert!(r.certified);
        // A(1,−1) = (1,0) and A(1,−2) = (0,−1) tie; the lexicographic rule picks (1,−2)
        assert_eq!(objective_value(&inst, &v(&[1, -1])).unwrap(), 1.0);
        assert_eq!(r.argmin, v(&[1, -2]));
        let r = min_sum(&MinInstance::full_sum(&cat(), 3, 1.0), &opts()).unwrap();
        assert_eq!(r.value, 8.0);
        assert_eq!(r.argmin, v(&[2, -3]));
        for n in [1, 4, 9] {
            for alpha in [0.5, 1.0] {
                let r = min_sum(
                    &MinInstance::full_sum(&IntMatrix::identity(3), n, alpha),
                    &opts(),
                )
                .unwrap();
                assert!((r.value - n as f64).abs() < 1e-12);
                assert_eq!(r.argmin, v(&[0, 0, 1]));
            }
        }
    }

    #[test]
    fn coarse_examples() {
        let r = min_coarse(&MinInstance::coarse(&cat(), 0, 1.0), &opts()).unwrap();
        assert_eq!(r.value, 2.0);
        let inst = MinInstance::coarse(&cat(), 2, 1.0);
        let r = min_coarse(&inst, &opts()).unwrap();
        assert_eq!(r.value, 7.0);
        assert_eq!(objective_value(&inst, &v(&[1, -1])).unwrap(), 7.0);
        assert_eq!(r.argmin, v(&[1, -2]));
        let r = min_coarse(
            &MinInstance::coarse(&IntMatrix::identity(2), 17, 1.0),
            &opts(),
        )
        .unwrap();
        assert_eq!(r.value, 2.0);
    }

    #[test]
    fn degenerate_examples() {
        let id = [1.0, 0.0, 0.0, 1.0];
        for n in 1..6 {
            let a = min_degenerate(&MinInstance::degenerate(&cat(), n, 1.0, &id), &opts()).unwrap();
            let b = min_sum(&MinInstance::full_sum(&cat(), n, 1.0), &opts()).unwrap();
            assert_eq!(a.value, b.value);
            assert_eq!(a.argmin, b.argmin);
        }
        // k ↦ ((Ak)₁, (A²k)₁) = ((2,1)·k, (5,3)·k) is unimodular, so the
        // minimum is 1, at k = (1,−2); (1,−1) only reaches 1 + 4 = 5
        let inst = MinInstance::degenerate(&cat(), 2, 1.0, &[1.0, 0.0, 0.0, 0.0]);
        let r = min_degenerate(&inst, &opts()).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.argmin, v(&[1, -2]));
        assert!(r.certified);
        assert_eq!(objective_value(&inst, &v(&[1, -1])).unwrap(), 5.0);
        assert_eq!(brute_force_oracle(&inst, 20).unwrap().value, 1.0);
        let b = crate::spectral::cat_unstable_projector();
        let r = min_degenerate(&MinInstance::degenerate(&cat(), 3, 1.0, &b), &opts()).unwrap();
        assert!(r.infimum_zero);
        assert!(!r.certified);
        assert_eq!(r.search_radius, 20.0);
    }

    #[test]
    fn oracle_examples() {
        let r = brute_force_oracle(&MinInstance::full_sum(&cat(), 3, 1.0), 10).unwrap();
        assert_eq!(r.value, 8.0);
        assert!(!r.certified);
        let r =
            brute_force_oracle(&MinInstance::full_sum(&IntMatrix::identity(2), 5, 0.5), 3).unwrap();
        assert!((r.value - 5.0).abs() < 1e-12);
        let r = brute_force_oracle(&MinInstance::full_sum(&cat(), 1, 0.5), 5).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(brute_force_oracle(&MinInstance::full_sum(&cat(), 1, 0.5), 51).is_err());
    }

    #[test]
    fn alpha_half_is_certified_and_matches_oracle() {
        for n in 1..=8 {
            let inst = MinInstance::full_sum(&cat(), n, 0.5);
            let r = min_sum(&inst, &opts()).unwrap();
            assert!(r.certified);
            let reach = r
                .argmin
                .iter()
                .map(|c| c.magnitude().clone())
                .max()
                .unwrap();
            let radius = i64::try_from(reach).unwrap() + 2;
            let o = brute_force_oracle(&inst, radius).unwrap();
            assert!((r.value - o.value).abs() <= 1e-10 * o.value, "n={n}");
            assert_eq!(r.argmin, o.argmin, "n={n}");
        }
    }

    #[test]
    fn budget_exhaustion_reports_partial_result() {
        let tiny = MinOptions {
            budget: 1,
            ..MinOptions::default()
        };
        let inst = MinInstance::full_sum(&IntMatrix::identity(4), 2, 1.0);
        match min_sum(&inst, &tiny) {
            Err(Error::EnumerationBudgetExceeded { budget, partial }) => {
                assert_eq!(budget, 1);
                assert!(!partial.certified);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn result_json_round_trip() {
        let r = min_sum(&MinInstance::full_sum(&cat(), 40, 1.0), &opts()).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: MinResult = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
