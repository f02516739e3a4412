use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exactnum::rational::round_int;
use crate::exactnum::{rat, Rational};
use crate::linalg;

/// Gram–Schmidt data of an ordered basis: `mu[i][j]` for `j < i` and the
/// squared norms of the orthogonalized vectors.
#[derive(Clone, Debug)]
pub(crate) struct Gso {
    pub mu: Vec<Vec<Rational>>,
    pub bstar_sq: Vec<Rational>,
}

pub(crate) fn gso(basis: &[Vec<Rational>]) -> Gso {
    let n = basis.len();
    let mut bstar: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut bstar_sq: Vec<Rational> = Vec::with_capacity(n);
    let mut mu = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        let mut v = basis[i].clone();
        for j in 0..i {
            let m = linalg::dot(&basis[i], &bstar[j]) / &bstar_sq[j];
            for (x, y) in v.iter_mut().zip(&bstar[j]) {
                *x -= &m * y;
            }
            mu[i][j] = m;
        }
        mu[i][i] = Rational::one();
        bstar_sq.push(linalg::norm_sq(&v));
        bstar.push(v);
    }
    Gso { mu, bstar_sq }
}

/// LLL reduction in exact rational arithmetic.
///
/// `basis` holds basis vectors; returns the reduced vectors and the integer
/// transform whose `j`-th entry lists the coefficients of reduced vector `j`
/// in the input basis.
pub(crate) fn lll(basis: &[Vec<Rational>], delta: &Rational) -> (Vec<Vec<Rational>>, Vec<Vec<BigInt>>) {
    let n = basis.len();
    let mut b = basis.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    if n <= 1 {
        return (b, u);
    }
    let mut g = gso(&b);
    let mut k = 1;
    let half = rat(1, 2);
    while k < n {
        for j in (0..k).rev() {
            if num_traits::Signed::abs(&g.mu[k][j]) > half {
                let r = round_int(&g.mu[k][j]);
                let rr = Rational::from_integer(r.clone());
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= &rr * y;
                }
                let uj = u[j].clone();
                for (x, y) in u[k].iter_mut().zip(&uj) {
                    *x -= &r * y;
                }
                for l in 0..=j {
                    let t = &rr * &g.mu[j][l];
                    g.mu[k][l] -= t;
                }
            }
        }
        let m = &g.mu[k][k - 1];
        if g.bstar_sq[k] >= (delta - m * m) * &g.bstar_sq[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            g = gso(&b);
            k = (k - 1).max(1);
        }
    }
    (b, u)
}
