//! Dense exact linear algebra over the rationals. Matrices are row-major.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactnum::Rational;

pub type Matrix = Vec<Vec<Rational>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

pub fn transpose(m: &Matrix) -> Matrix {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn norm_sq(a: &[Rational]) -> Rational {
    dot(a, a)
}

pub fn mat_vec(m: &Matrix, v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let bt = transpose(b);
    a.iter()
        .map(|row| bt.iter().map(|col| dot(row, col)).collect())
        .collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rational], t: &Rational) -> Vec<Rational> {
    a.iter().map(|x| x * t).collect()
}

/// Determinant by Gaussian elimination (exact).
pub fn det(m: &Matrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        let pivot = a[c][c].clone();
        d *= &pivot;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &pivot;
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    d
}

/// Inverse by Gauss–Jordan elimination; `None` for singular input.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity(n);
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(p, c);
        inv.swap(p, c);
        let pivot = a[c][c].recip();
        for k in 0..n {
            a[c][k] *= &pivot;
            inv[c][k] *= &pivot;
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            for k in 0..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
                let t = &f * &inv[c][k];
                inv[r][k] -= t;
            }
        }
    }
    Some(inv)
}

/// Incremental exact rank test: keeps a row-echelon basis of the span.
#[derive(Clone, Debug, Default)]
pub struct IndependenceTracker {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl IndependenceTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut v = v.to_vec();
        for (pivot, row) in &self.rows {
            if v[*pivot].is_zero() {
                continue;
            }
            let f = v[*pivot].clone();
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &f * y;
            }
        }
        v
    }

    pub fn is_independent(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().any(|x| !x.is_zero())
    }

    /// Adds `v` if it enlarges the span; reports whether it did.
    pub fn try_add(&mut self, v: &[Rational]) -> bool {
        let mut r = self.reduce(v);
        let Some(pivot) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[pivot].recip();
        for x in r.iter_mut() {
            *x *= &inv;
        }
        // keep the stored rows fully reduced against the new pivot
        for (_, row) in self.rows.iter_mut() {
            if row[pivot].is_zero() {
                continue;
            }
            let f = row[pivot].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                *x -= &f * y;
            }
        }
        self.rows.push((pivot, r));
        true
    }
}

pub fn rank(vectors: &[Vec<Rational>]) -> usize {
    let mut t = IndependenceTracker::new();
    for v in vectors {
        t.try_add(v);
    }
    t.rank()
}

/// Basis (as rows) of the integer lattice spanned by the given integer
/// generators, via Hermite-style row reduction with extended gcds.
pub fn integer_basis(generators: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = generators.to_vec();
    if rows.is_empty() {
        return rows;
    }
    let n = rows[0].len();
    let mut out = Vec::new();
    for c in 0..n {
        // collapse column c into a single row by repeated gcd steps
        loop {
            let mut nz: Vec<usize> = (0..rows.len()).filter(|&r| !rows[r][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by(|&a, &b| rows[a][c].abs().cmp(&rows[b][c].abs()));
            let p = nz[0];
            let pivot = rows[p].clone();
            for &r in &nz[1..] {
                let q = rows[r][c].div_floor(&pivot[c]);
                for k in 0..n {
                    let t = &q * &pivot[k];
                    rows[r][k] -= t;
                }
            }
        }
        if let Some(p) = (0..rows.len()).find(|&r| !rows[r][c].is_zero()) {
            let mut row = rows.remove(p);
            if row[c].is_negative() {
                row.iter_mut().for_each(|x| *x = -x.clone());
            }
            out.push(row);
        }
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn det_and_inverse() {
        let a = m(&[&[4, 7], &[1, 2]]);
        assert_eq!(det(&a), int(1));
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
        let b = vec![vec![rat(1, 2), int(0), int(0)], vec![int(3), int(1), int(0)], vec![int(0), int(5), int(2)]];
        assert_eq!(det(&b), int(1));
    }

    #[test]
    fn independence_tracking() {
        let mut t = IndependenceTracker::new();
        assert!(t.try_add(&[rat(2, 7), rat(-1, 7)]));
        assert!(!t.try_add(&[rat(4, 7), rat(-2, 7)]));
        assert!(t.try_add(&[rat(3, 7), rat(2, 7)]));
        assert!(!t.is_independent(&[int(5), int(9)]));
        assert!(!t.try_add(&[int(0), int(0)]));
        assert_eq!(rank(&[vec![int(1), int(1)], vec![int(2), int(2)]]), 1);
    }

    #[test]
    fn integer_basis_of_generators() {
        // 3·(ℤ² + ℤ(1/3,1/3)) = ⟨(3,0),(0,3),(1,1)⟩ has determinant 3
        let g: Vec<Vec<BigInt>> = [[3, 0], [0, 3], [1, 1]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let b = integer_basis(&g);
        assert_eq!(b.len(), 2);
        let mat: Matrix = b.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
        assert_eq!(det(&mat).abs(), int(3));
    }
}
