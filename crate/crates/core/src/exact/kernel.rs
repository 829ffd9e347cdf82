//! Kernels of integer and rational matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::{IntMatrix, RatMatrix};

/// A `Z`-basis of `{k ∈ Z^d : M k = 0}`.
///
/// Unimodular column reduction: `M·U = H` with `H` in column echelon form;
/// the columns of `U` matching zero columns of `H` span the integer kernel.
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let d = m.dim();
    let mut h: Vec<Vec<BigInt>> = m.rows();
    // u stored column-major: u[c] is column c
    let mut u: Vec<Vec<BigInt>> = (0..d)
        .map(|c| {
            (0..d)
                .map(|r| {
                    if r == c {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut pivot = 0;
    for row in 0..d {
        if pivot == d {
            break;
        }
        loop {
            let nonzero: Vec<usize> = (pivot..d).filter(|&c| !h[row][c].is_zero()).collect();
            if nonzero.len() <= 1 {
                if let Some(&c) = nonzero.first() {
                    swap_cols(&mut h, &mut u, c, pivot);
                    pivot += 1;
                }
                break;
            }
            let &small = nonzero.iter().min_by_key(|&&c| h[row][c].abs()).unwrap();
            for &c in &nonzero {
                if c == small {
                    continue;
                }
                let q = h[row][c].div_floor(&h[row][small]);
                sub_col(&mut h, &mut u, c, small, &q);
            }
        }
    }
    (pivot..d).map(|c| u[c].clone()).collect()
}

fn swap_cols(h: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in h.iter_mut() {
        row.swap(a, b);
    }
    u.swap(a, b);
}

/// column `a` -= q · column `b`
fn sub_col(h: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize, q: &BigInt) {
    for row in h.iter_mut() {
        let t = &row[b] * q;
        row[a] -= t;
    }
    let col_b = u[b].clone();
    for (x, y) in u[a].iter_mut().zip(col_b) {
        *x -= y * q;
    }
}

/// A `Q`-basis of the kernel by reduced row echelon form.
pub fn rational_kernel(m: &RatMatrix) -> Vec<Vec<BigRational>> {
    let d = m.dim();
    let mut a: Vec<Vec<BigRational>> = (0..d)
        .map(|i| (0..d).map(|j| m[(i, j)].clone()).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..d {
        let Some(p) = (r..d).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..d {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..d {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == d {
            break;
        }
    }
    let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); d];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernel_of_shear_transpose_minus_identity() {
        // Fᵀ − I for F = [[1,1],[0,1]]
        let m = IntMatrix::from_i64([[0, 0], [1, 0]]);
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 1);
        assert!(k[0] == ints(&[0, 1]) || k[0] == ints(&[0, -1]));
    }

    #[test]
    fn kernel_is_saturated() {
        // kernel of [2, 4] row is spanned by (2,-1), not a multiple of it
        let m = IntMatrix::from_i64([[2, 4], [0, 0]]);
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 1);
        assert_eq!(m.mul_vec(&k[0]), ints(&[0, 0]));
        let g = k[0][0].gcd(&k[0][1]);
        assert!(g.is_one());
        assert!(integer_kernel(&IntMatrix::from_i64([[2, 1], [1, 1]])).is_empty());
        assert_eq!(integer_kernel(&IntMatrix::zeros(3)).len(), 3);
    }

    #[test]
    fn rational_kernel_dimension() {
        let m = RatMatrix::parse("1,2,3;2,4,6;1,1,1").unwrap();
        let k = rational_kernel(&m);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        for i in 0..3 {
            let s: BigRational = (0..3).map(|j| &m[(i, j)] * &v[j]).sum();
            assert!(s.is_zero());
        }
    }
}
