//! Complex roots of integer polynomials: Aberth iteration in `f64`, then
//! refinement in double-double arithmetic, with exact real-root counting.

use num_complex::Complex64;

use super::dd::{Cdd, Dd};
use crate::error::{Error, Result};
use crate::exact::{IntPolynomial, RatPoly};

/// A root together with a double-double certificate of its accuracy.
#[derive(Clone, Copy, Debug)]
pub struct Root {
    pub value: Complex64,
    pub hp: Cdd,
}

fn eval_dd(coeffs: &[Dd], z: Cdd) -> (Cdd, Cdd) {
    let mut p = Cdd::ZERO;
    let mut dp = Cdd::ZERO;
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + Cdd::new(*c, Dd::ZERO);
    }
    (p, dp)
}

fn eval_f64(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of a squarefree polynomial of positive degree.
pub fn roots_squarefree(f: &IntPolynomial) -> Result<Vec<Root>> {
    let n = f.degree();
    let cf = f.to_f64();
    let cdd: Vec<Dd> = f.coeffs().iter().map(Dd::from_bigint).collect();
    let lead = cf[n];
    if n == 1 {
        let z = Cdd::new(-(cdd[0] / cdd[1]), Dd::ZERO);
        return Ok(vec![Root {
            value: z.to_c64(),
            hp: z,
        }]);
    }
    // Cauchy bound for the initial circle
    let radius = 1.0 + cf[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(radius.min(1e6) * 0.5 + 0.5, th)
        })
        .collect();
    for _ in 0..2_000 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval_f64(&cf, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let w = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let step = w / (1.0 - w * s);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    // Aberth correction in double-double keeps the iterates apart
    let mut zs: Vec<Cdd> = z.iter().map(|&c| Cdd::from_c64(c)).collect();
    let mut max_step = f64::INFINITY;
    for _ in 0..100 {
        max_step = 0.0;
        let prev = zs.clone();
        for i in 0..n {
            let (p, dp) = eval_dd(&cdd, prev[i]);
            if p.norm_sqr().to_f64() == 0.0 {
                continue;
            }
            let w = p / dp;
            let mut s = Cdd::ZERO;
            for j in 0..n {
                if j != i {
                    s = s + Cdd::new(Dd::ONE, Dd::ZERO) / (prev[i] - prev[j]);
                }
            }
            let denom = Cdd::new(Dd::ONE, Dd::ZERO) - w * s;
            let step = w / denom;
            let st = step.abs();
            if st.is_finite() {
                zs[i] = prev[i] - step;
                max_step = max_step.max(st / zs[i].abs().max(1.0));
            }
        }
        if max_step < 1e-29 {
            break;
        }
    }
    if !(max_step < 1e-20) {
        let residual = zs
            .iter()
            .map(|&r| eval_dd(&cdd, r).0.abs())
            .fold(0.0, f64::max);
        return Err(Error::ConvergenceFailure { residual });
    }
    let mut roots: Vec<Root> = zs
        .into_iter()
        .map(|hp| Root {
            value: hp.to_c64(),
            hp,
        })
        .collect();
    enforce_conjugacy(f, &mut roots);
    Ok(roots)
}

/// Makes real roots exactly real and complex roots exact conjugate pairs,
/// using the Sturm count of real roots.
fn enforce_conjugacy(f: &IntPolynomial, roots: &mut [Root]) {
    let n_real = RatPoly::from_int(f).real_root_count();
    roots.sort_by(|a, b| a.value.im.abs().total_cmp(&b.value.im.abs()));
    for r in roots[..n_real].iter_mut() {
        r.hp.im = Dd::ZERO;
        r.value.im = 0.0;
    }
    let complex = &mut roots[n_real..];
    // pair each upper-half root with the closest lower-half conjugate
    let mut used = vec![false; complex.len()];
    for i in 0..complex.len() {
        if used[i] || complex[i].value.im <= 0.0 {
            continue;
        }
        let target = complex[i].value.conj();
        let j = (0..complex.len())
            .filter(|&j| j != i && !used[j] && complex[j].value.im <= 0.0)
            .min_by(|&a, &b| {
                (complex[a].value - target)
                    .norm()
                    .total_cmp(&(complex[b].value - target).norm())
            });
        let Some(j) = j else { continue };
        used[i] = true;
        used[j] = true;
        let half = Dd::from_f64(0.5);
        let re = (complex[i].hp.re + complex[j].hp.re) * half;
        let im = (complex[i].hp.im - complex[j].hp.im) * half;
        complex[i].hp = Cdd::new(re, im);
        complex[j].hp = Cdd::new(re, -im);
        complex[i].value = complex[i].hp.to_c64();
        complex[j].value = complex[j].hp.to_c64();
    }
    roots.sort_by(|a, b| {
        b.value
            .norm()
            .total_cmp(&a.value.norm())
            .then(b.value.im.total_cmp(&a.value.im))
    });
}

/// `ln |z|` from the double-double value.
pub fn ln_abs(r: &Root) -> f64 {
    let n2 = r.hp.norm_sqr();
    // ln(hi + lo) = ln hi + lo/hi to first order
    0.5 * (n2.hi.ln() + n2.lo / n2.hi)
}
