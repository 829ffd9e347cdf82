//! Factorization of integer polynomials over `Q`: squarefree decomposition,
//! Cantor–Zassenhaus modulo a prime, Hensel lifting and recombination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::IntPolynomial;

type Fp = Vec<u64>;

/// Polynomials over `Z/pZ` with coefficient vectors in ascending order.
struct Field {
    p: u64,
}

impl Field {
    fn trim(&self, mut a: Fp) -> Fp {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn reduce(&self, f: &IntPolynomial) -> Fp {
        let p = BigInt::from(self.p);
        self.trim(
            f.coeffs()
                .iter()
                .map(|c| c.mod_floor(&p).to_u64().unwrap())
                .collect(),
        )
    }

    fn inv(&self, a: u64) -> u64 {
        self.pow_scalar(a, self.p - 2)
    }

    fn pow_scalar(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * a % self.p;
            }
            a = a * a % self.p;
            e >>= 1;
        }
        r
    }

    fn sub(&self, a: &Fp, b: &Fp) -> Fp {
        let n = a.len().max(b.len());
        self.trim(
            (0..n)
                .map(|i| (a.get(i).unwrap_or(&0) + self.p - b.get(i).unwrap_or(&0)) % self.p)
                .collect(),
        )
    }

    fn mul(&self, a: &Fp, b: &Fp) -> Fp {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % self.p;
            }
        }
        self.trim(out)
    }

    fn div_rem(&self, a: &Fp, b: &Fp) -> (Fp, Fp) {
        assert!(!b.is_empty());
        if a.len() < b.len() {
            return (vec![], a.clone());
        }
        let inv_lead = self.inv(*b.last().unwrap());
        let mut rem = a.clone();
        let mut quot = vec![0u64; a.len() - b.len() + 1];
        for i in (0..quot.len()).rev() {
            let q = rem[i + b.len() - 1] * inv_lead % self.p;
            quot[i] = q;
            if q == 0 {
                continue;
            }
            for (j, c) in b.iter().enumerate() {
                rem[i + j] = (rem[i + j] + self.p - q * c % self.p) % self.p;
            }
        }
        rem.truncate(b.len() - 1);
        (self.trim(quot), self.trim(rem))
    }

    fn rem(&self, a: &Fp, b: &Fp) -> Fp {
        self.div_rem(a, b).1
    }

    fn monic(&self, a: &Fp) -> Fp {
        match a.last() {
            None => vec![],
            Some(&l) => {
                let inv = self.inv(l);
                a.iter().map(|c| c * inv % self.p).collect()
            }
        }
    }

    fn gcd(&self, a: &Fp, b: &Fp) -> Fp {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    /// `(g, s, t)` with `s·a + t·b = g` monic.
    fn ext_gcd(&self, a: &Fp, b: &Fp) -> (Fp, Fp, Fp) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (vec![1u64], vec![]);
        let (mut t0, mut t1) = (vec![], vec![1u64]);
        while !r1.is_empty() {
            let (q, r) = self.div_rem(&r0, &r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = self.sub(&s0, &self.mul(&q, &s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = self.sub(&t0, &self.mul(&q, &t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        let inv = self.inv(*r0.last().unwrap());
        let scale = |v: &Fp| self.trim(v.iter().map(|c| c * inv % self.p).collect());
        (scale(&r0), scale(&s0), scale(&t0))
    }

    fn powmod(&self, base: &Fp, mut e: u128, m: &Fp) -> Fp {
        let mut r = vec![1u64];
        let mut b = self.rem(base, m);
        while e > 0 {
            if e & 1 == 1 {
                r = self.rem(&self.mul(&r, &b), m);
            }
            b = self.rem(&self.mul(&b, &b), m);
            e >>= 1;
        }
        r
    }

    fn derivative(&self, a: &Fp) -> Fp {
        self.trim(
            a.iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| (i as u64 % self.p) * c % self.p)
                .collect(),
        )
    }

    /// Monic irreducible factors of a monic squarefree polynomial.
    fn factor_squarefree(&self, f: &Fp, rng: &mut ChaCha8Rng) -> Vec<Fp> {
        let mut out = Vec::new();
        let mut rest = f.clone();
        let x = vec![0u64, 1];
        let mut h = x.clone();
        let mut i = 0u32;
        while rest.len() > 1 {
            i += 1;
            if 2 * i as usize > rest.len() - 1 {
                out.push(self.monic(&rest));
                break;
            }
            h = self.powmod(&h, self.p as u128, &rest);
            let g = self.gcd(&rest, &self.sub(&h, &x));
            if g.len() > 1 {
                self.equal_degree(&g, i as usize, rng, &mut out);
                rest = self.div_rem(&rest, &g).0;
                h = self.rem(&h, &rest);
            }
        }
        out
    }

    fn equal_degree(&self, f: &Fp, deg: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Fp>) {
        let n = f.len() - 1;
        if n == deg {
            out.push(self.monic(f));
            return;
        }
        let e = (self.p as u128).pow(deg as u32).saturating_sub(1) / 2;
        loop {
            let a: Fp = self.trim((0..n).map(|_| rng.random_range(0..self.p)).collect());
            if a.len() <= 1 {
                continue;
            }
            let b = self.sub(&self.powmod(&a, e, f), &vec![1u64]);
            let g = self.gcd(f, &b);
            if g.len() > 1 && g.len() < f.len() {
                let q = self.div_rem(f, &g).0;
                self.equal_degree(&g, deg, rng, out);
                self.equal_degree(&q, deg, rng, out);
                return;
            }
        }
    }
}

fn fp_to_int(a: &Fp) -> IntPolynomial {
    IntPolynomial::new(a.iter().map(|&c| BigInt::from(c)).collect())
}

/// Coefficients reduced into `(-m/2, m/2]`.
fn symmetric_mod(f: &IntPolynomial, m: &BigInt) -> IntPolynomial {
    let half = m / 2;
    IntPolynomial::new(
        f.coeffs()
            .iter()
            .map(|c| {
                let r = c.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

/// Lifts `f ≡ g·h (mod p)` with monic `g`, `h` to `f ≡ G·H (mod p^k)`.
fn hensel_lift(
    field: &Field,
    f: &IntPolynomial,
    g: &Fp,
    h: &Fp,
    k: u32,
) -> (IntPolynomial, IntPolynomial) {
    let p = BigInt::from(field.p);
    let (_, s, t) = field.ext_gcd(g, h);
    let mut gz = fp_to_int(g);
    let mut hz = fp_to_int(h);
    let mut m = p.clone();
    for _ in 1..k {
        let diff = f.sub(&gz.mul(&hz));
        let e_int = IntPolynomial::new(diff.coeffs().iter().map(|c| c / &m).collect());
        let e = field.reduce(&e_int);
        let dg = field.rem(&field.mul(&t, &e), g);
        let dh = field.rem(&field.mul(&s, &e), h);
        gz = gz.add(&scale(&fp_to_int(&dg), &m));
        hz = hz.add(&scale(&fp_to_int(&dh), &m));
        m *= &p;
        gz = symmetric_mod(&gz, &m);
        hz = symmetric_mod(&hz, &m);
    }
    (gz, hz)
}

fn scale(f: &IntPolynomial, c: &BigInt) -> IntPolynomial {
    IntPolynomial::new(f.coeffs().iter().map(|x| x * c).collect())
}

const PRIMES: [u64; 40] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179,
];

/// Irreducible factors of a monic squarefree integer polynomial.
pub fn factor_squarefree_monic(f: &IntPolynomial) -> Vec<IntPolynomial> {
    assert!(f.is_monic(), "factorization expects a monic polynomial");
    if f.degree() <= 1 {
        return vec![f.clone()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a55_e4a5);
    // among the first few good primes keep the one with fewest modular factors
    let mut best: Option<(u64, Vec<Fp>)> = None;
    let mut good = 0;
    for &p in PRIMES.iter() {
        let field = Field { p };
        let fp = field.reduce(f);
        let dfp = field.derivative(&fp);
        if field.gcd(&fp, &dfp).len() != 1 {
            continue;
        }
        let factors = field.factor_squarefree(&fp, &mut rng);
        if best.as_ref().is_none_or(|b| factors.len() < b.1.len()) {
            best = Some((p, factors));
        }
        good += 1;
        if good == 5 || best.as_ref().unwrap().1.len() == 1 {
            break;
        }
    }
    let (p, modular) = best.expect("a squarefree polynomial has squarefree reductions");
    if modular.len() == 1 {
        return vec![f.clone()];
    }
    let field = Field { p };
    // any monic factor has coefficients bounded by 2^deg · ‖f‖₂
    let norm2: BigInt = f.coeffs().iter().map(|c| c * c).sum::<BigInt>().sqrt() + 1;
    let bound = (norm2 << f.degree()) * 2;
    let pb = BigInt::from(p);
    let mut k = 1u32;
    let mut modulus = pb.clone();
    while modulus <= bound {
        modulus *= &pb;
        k += 1;
    }
    // peel the modular factors off one at a time
    let mut lifted = Vec::new();
    let mut rest = f.clone();
    for (i, g) in modular.iter().enumerate() {
        if i + 1 == modular.len() {
            lifted.push(symmetric_mod(&rest, &modulus));
            break;
        }
        let rest_p = field.reduce(&rest);
        let h = field.div_rem(&rest_p, g).0;
        let (gz, hz) = hensel_lift(&field, &rest, g, &h, k);
        lifted.push(gz);
        rest = hz;
    }
    recombine(f.clone(), lifted, &modulus)
}

fn recombine(
    mut f: IntPolynomial,
    mut lifted: Vec<IntPolynomial>,
    modulus: &BigInt,
) -> Vec<IntPolynomial> {
    let mut found = Vec::new();
    let mut size = 1;
    while 2 * size <= lifted.len() {
        let mut hit = None;
        for subset in subsets(lifted.len(), size) {
            let prod = subset
                .iter()
                .fold(IntPolynomial::one(), |acc, &i| acc.mul(&lifted[i]));
            let g = symmetric_mod(&prod, modulus);
            if let Some(q) = f.exact_div(&g) {
                found.push(g);
                f = q;
                hit = Some(subset);
                break;
            }
        }
        match hit {
            Some(subset) => {
                for &i in subset.iter().rev() {
                    lifted.remove(i);
                }
            }
            None => size += 1,
        }
    }
    if f.degree() > 0 {
        found.push(f);
    }
    found
}

/// All increasing index tuples of the given size.
fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

/// Irreducible factors over `Q` of a monic integer polynomial with their
/// multiplicities, each factor monic, sorted by degree then coefficients.
pub fn factor_over_q(p: &IntPolynomial) -> Vec<(IntPolynomial, usize)> {
    let mut out = Vec::new();
    for (part, mult) in p.squarefree_decomposition() {
        let part = if part.leading().is_negative() {
            part.mul(&IntPolynomial::from_i64(&[-1]))
        } else {
            part
        };
        debug_assert!(part.leading().is_one());
        for g in factor_squarefree_monic(&part) {
            out.push((g, mult));
        }
    }
    out.sort_by(|a, b| {
        a.0.degree()
            .cmp(&b.0.degree())
            .then_with(|| a.0.coeffs().cmp(b.0.coeffs()))
    });
    out
}
