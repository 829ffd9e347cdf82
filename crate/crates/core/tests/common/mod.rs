#![allow(dead_code)]

use num_bigint::BigInt;
use proptest::prelude::*;
use toruslab::IntMatrix;

/// `I + s·E_ij` for `i ≠ j`.
pub fn elementary(d: usize, i: usize, j: usize, s: i64) -> IntMatrix {
    let rows: Vec<Vec<BigInt>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    BigInt::from(if r == c {
                        1
                    } else if r == i && c == j {
                        s
                    } else {
                        0
                    })
                })
                .collect()
        })
        .collect();
    IntMatrix::from_rows(&rows).unwrap()
}

/// Words of elementary matrices of bounded length, with an optional sign flip.
pub fn unimodular(d: usize, max_len: usize) -> impl Strategy<Value = IntMatrix> {
    (
        prop::collection::vec((0..d, 1..d, prop_oneof![Just(-1i64), Just(1)]), 1..=max_len),
        any::<bool>(),
    )
        .prop_map(move |(word, flip)| {
            let mut m = IntMatrix::identity(d);
            for (i, off, s) in word {
                let j = (i + off) % d;
                m = &m * &elementary(d, i, j, s);
            }
            if flip {
                let mut rows = m.rows();
                for x in rows[0].iter_mut() {
                    *x = -x.clone();
                }
                m = IntMatrix::from_rows(&rows).unwrap();
            }
            m
        })
}

pub fn unimodular_any(max_len: usize) -> impl Strategy<Value = IntMatrix> {
    (2usize..=4).prop_flat_map(move |d| unimodular(d, max_len))
}

pub fn cat() -> IntMatrix {
    IntMatrix::from_i64([[2, 1], [1, 1]])
}

pub fn shear() -> IntMatrix {
    IntMatrix::from_i64([[1, 1], [0, 1]])
}

pub fn plastic() -> IntMatrix {
    IntMatrix::from_i64([[0, 1, 0], [0, 0, 1], [1, 1, 0]])
}

pub fn is_zero(m: &IntMatrix) -> bool {
    m.entries().iter().all(|x| *x == BigInt::from(0))
}
