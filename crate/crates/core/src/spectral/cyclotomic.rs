//! Cyclotomic polynomials and the exact root-of-unity tests built on them.

use crate::exact::IntPolynomial;

/// Euler's totient.
pub fn totient(m: u64) -> u64 {
    let mut n = m;
    let mut out = m;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// `Φ_m` by exact division of `x^m − 1` by `Φ_k` for proper divisors `k`.
pub fn cyclotomic(m: u64) -> IntPolynomial {
    assert!(m >= 1);
    let mut c = vec![0i64; m as usize + 1];
    c[0] = -1;
    c[m as usize] = 1;
    let mut p = IntPolynomial::from_i64(&c);
    for k in (1..m).filter(|k| m.is_multiple_of(*k)) {
        p = p
            .exact_div(&cyclotomic(k))
            .expect("cyclotomic divisors divide x^m − 1");
    }
    p
}

/// Every `Φ_m` of degree at most `d`, in increasing `m`. Since
/// `φ(m) ≥ √(m/2)`, all such `m` satisfy `m ≤ 2d²`.
pub fn cyclotomics_up_to_degree(d: usize) -> Vec<(u64, IntPolynomial)> {
    let bound = 2 * (d as u64) * (d as u64) + 2;
    (1..=bound)
        .filter(|&m| totient(m) <= d as u64)
        .map(|m| (m, cyclotomic(m)))
        .collect()
}

/// Which cyclotomic polynomial `p` equals, if any.
pub fn cyclotomic_index(p: &IntPolynomial) -> Option<u64> {
    cyclotomics_up_to_degree(p.degree())
        .into_iter()
        .find(|(_, phi)| phi == p)
        .map(|(m, _)| m)
}

/// `true` iff `p` is a product of cyclotomic polynomials.
pub fn is_cyclotomic_product(p: &IntPolynomial) -> bool {
    let mut rest = p.clone();
    for (_, phi) in cyclotomics_up_to_degree(p.degree()) {
        while rest.degree() > 0 {
            match rest.exact_div(&phi) {
                Some(q) => rest = q,
                None => break,
            }
        }
    }
    rest.degree() == 0 && !rest.is_zero()
}

/// `true` iff some `Φ_m` divides `p`.
pub fn has_cyclotomic_factor(p: &IntPolynomial) -> bool {
    cyclotomics_up_to_degree(p.degree())
        .iter()
        .any(|(_, phi)| p.gcd(phi).degree() > 0)
}
