//! Full-rank rational lattices `Λ = Bℤⁿ`: duals, LLL reduction, exact
//! membership and point enumeration.

mod enumerate;
mod lll;

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exactnum::rational::{is_integral, serde_rational_mat};
use crate::exactnum::{rat, Rational};
use crate::linalg::{self, Matrix};

pub use enumerate::{enumerate_in_norm_ball, EnumPoint, EnumerationReport, DEFAULT_NODE_CAP};
pub(crate) use enumerate::{estimate_nodes, fincke_pohst};
pub(crate) use lll::Gso;

/// JSON form: basis vectors as the inner arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    #[serde(with = "serde_rational_mat")]
    pub basis: Vec<Vec<Rational>>,
}

/// LLL-reduced view of a lattice used by the enumeration kernel.
#[derive(Clone, Debug)]
pub(crate) struct Reduced {
    pub basis: Vec<Vec<Rational>>,
    /// `transform[j]` = coefficients of reduced vector `j` in the original basis.
    pub transform: Vec<Vec<i64>>,
    pub gso: Gso,
    /// Inverse of the matrix whose columns are the reduced vectors.
    pub inv: Matrix,
}

impl Reduced {
    pub fn vector(&self, y: &[i64]) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.basis[0].len()];
        for (b, &c) in self.basis.iter().zip(y) {
            if c == 0 {
                continue;
            }
            let c = Rational::from_integer(c.into());
            for (x, bi) in v.iter_mut().zip(b) {
                *x += &c * bi;
            }
        }
        v
    }

    /// LLL-reduced view of independent generators in any ambient dimension.
    /// `inv` is then the pseudo-inverse, mapping a point to the coefficients
    /// of its projection onto the span.
    pub fn from_generators(gens: &[Vec<Rational>]) -> Reduced {
        let (basis, transform) = lll::lll(gens, &rat(99, 100));
        let transform: Vec<Vec<i64>> = transform
            .iter()
            .map(|c| c.iter().map(|x| x.to_i64().expect("LLL transform fits in i64")).collect())
            .collect();
        let gso = lll::gso(&basis);
        let gram: Matrix = basis.iter().map(|a| basis.iter().map(|b| linalg::dot(a, b)).collect()).collect();
        let ginv = linalg::inverse(&gram).expect("generators are independent");
        let inv = linalg::mat_mul(&ginv, &basis.to_vec());
        Reduced { basis, transform, gso, inv }
    }

    /// `Σ y_i b_i` for rational coefficients.
    pub fn vector_frac(&self, y: &[Rational]) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.basis[0].len()];
        for (b, c) in self.basis.iter().zip(y) {
            for (x, bi) in v.iter_mut().zip(b) {
                *x += c * bi;
            }
        }
        v
    }

    pub fn original_coeffs(&self, y: &[i64]) -> Vec<i64> {
        let n = y.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.transform[j][i] * y[j]).sum())
            .collect()
    }
}

#[derive(Debug)]
pub struct Lattice {
    basis: Vec<Vec<Rational>>,
    det: Rational,
    gram: Matrix,
    inv: Matrix,
    reduced: OnceLock<Reduced>,
}

impl Clone for Lattice {
    fn clone(&self) -> Self {
        Lattice {
            basis: self.basis.clone(),
            det: self.det.clone(),
            gram: self.gram.clone(),
            inv: self.inv.clone(),
            reduced: self.reduced.clone(),
        }
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
    }
}

fn columns_to_matrix(cols: &[Vec<Rational>]) -> Matrix {
    linalg::transpose(&cols.to_vec())
}

impl Lattice {
    /// Lattice generated by the given basis vectors.
    pub fn new(basis: Vec<Vec<Rational>>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::SingularBasis);
        }
        for b in &basis {
            check_dim(n, b.len())?;
        }
        let m = columns_to_matrix(&basis);
        let det = linalg::det(&m).abs();
        if det.is_zero() {
            return Err(Error::SingularBasis);
        }
        let inv = linalg::inverse(&m).ok_or(Error::SingularBasis)?;
        let gram = basis
            .iter()
            .map(|a| basis.iter().map(|b| linalg::dot(a, b)).collect())
            .collect();
        Ok(Lattice { basis, det, gram, inv, reduced: OnceLock::new() })
    }

    pub fn integer(n: usize) -> Self {
        Lattice::new(linalg::identity(n)).expect("identity is invertible")
    }

    pub fn from_spec(spec: &LatticeSpec) -> Result<Self> {
        Lattice::new(spec.basis.clone())
    }

    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec { basis: self.basis.clone() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// `|det B|`.
    pub fn det(&self) -> &Rational {
        &self.det
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn is_diagonal(&self) -> bool {
        self.basis
            .iter()
            .enumerate()
            .all(|(j, b)| b.iter().enumerate().all(|(i, x)| i == j || x.is_zero()))
    }

    /// Coordinates `B⁻¹x`.
    pub fn coords(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.dim(), x.len())?;
        Ok(linalg::mat_vec(&self.inv, x))
    }

    pub fn point(&self, coeffs: &[i64]) -> Vec<Rational> {
        let n = self.dim();
        let mut v = vec![Rational::zero(); n];
        for (b, &c) in self.basis.iter().zip(coeffs) {
            let c = Rational::from_integer(c.into());
            for (x, bi) in v.iter_mut().zip(b) {
                *x += &c * bi;
            }
        }
        v
    }

    /// Whether `x ∈ Λ`, by an exact solve.
    pub fn member(&self, x: &[Rational]) -> Result<bool> {
        Ok(self.coords(x)?.iter().all(is_integral))
    }

    /// Integer coordinates of `x` when `x ∈ Λ`.
    pub fn integer_coords(&self, x: &[Rational]) -> Result<Option<Vec<BigInt>>> {
        let c = self.coords(x)?;
        Ok(c.iter().all(is_integral).then(|| c.iter().map(|r| r.numer().clone()).collect()))
    }

    /// `Λ*` with basis `(Bᵀ)⁻¹`; its basis vectors are the rows of `B⁻¹`.
    pub fn dual(&self) -> Lattice {
        Lattice::new(self.inv.clone()).expect("inverse of a basis is a basis")
    }

    /// LLL-reduces the basis with parameter `delta ∈ (1/4, 1]`.
    ///
    /// Returns the same lattice with the reduced basis and the unimodular
    /// transform (`transform[j]` gives reduced vector `j` in old coordinates).
    pub fn lll_reduce(&self, delta: &Rational) -> Result<(Lattice, Vec<Vec<BigInt>>)> {
        if *delta <= rat(1, 4) || *delta > Rational::one() {
            return Err(Error::Precondition("LLL parameter must lie in (1/4, 1]".into()));
        }
        let (b, u) = lll::lll(&self.basis, delta);
        Ok((Lattice::new(b)?, u))
    }

    pub(crate) fn reduced(&self) -> &Reduced {
        self.reduced.get_or_init(|| {
            let (basis, transform) = lll::lll(&self.basis, &rat(99, 100));
            let transform: Vec<Vec<i64>> = transform
                .iter()
                .map(|c| c.iter().map(|x| x.to_i64().expect("LLL transform fits in i64")).collect())
                .collect();
            let gso = lll::gso(&basis);
            let inv = linalg::inverse(&columns_to_matrix(&basis)).expect("reduced basis is a basis");
            Reduced { basis, transform, gso, inv }
        })
    }

    /// Reduced basis vectors (shortest first up to the LLL guarantee).
    pub fn reduced_basis(&self) -> &[Vec<Rational>] {
        &self.reduced().basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, GaugeValue};
    use crate::geometry::GaugeBody;
    use proptest::prelude::*;

    fn lat(cols: &[&[(i64, i64)]]) -> Lattice {
        Lattice::new(cols.iter().map(|c| c.iter().map(|&(p, q)| rat(p, q)).collect()).collect()).unwrap()
    }

    fn ints(cols: &[&[i64]]) -> Lattice {
        Lattice::new(cols.iter().map(|c| c.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn duals() {
        assert_eq!(Lattice::integer(3).dual(), Lattice::integer(3));
        let d = lat(&[&[(2, 1), (0, 1)], &[(0, 1), (1, 3)]]).dual();
        assert_eq!(d.basis(), &[vec![rat(1, 2), int(0)], vec![int(0), int(3)]]);
        let d = ints(&[&[1, 1], &[0, 1]]).dual();
        assert_eq!(d.basis(), &[vec![int(1), int(0)], vec![int(-1), int(1)]]);
        assert_eq!(d.det(), &int(1));
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(Lattice::new(vec![vec![int(1), int(2)], vec![int(2), int(4)]]).unwrap_err(), Error::SingularBasis);
    }

    #[test]
    fn membership() {
        let z2 = Lattice::integer(2);
        assert!(z2.member(&[int(3), int(-5)]).unwrap());
        assert!(!z2.member(&[rat(1, 2), int(0)]).unwrap());
        let d = ints(&[&[2, 0], &[0, 3]]);
        assert!(d.member(&[int(4), int(-9)]).unwrap());
        assert_eq!(d.integer_coords(&[int(4), int(-9)]).unwrap(), Some(vec![BigInt::from(2), BigInt::from(-3)]));
    }

    fn check_reduced(l: &Lattice, delta: &Rational) {
        let g = lll::gso(l.basis());
        let n = l.dim();
        for i in 0..n {
            for j in 0..i {
                assert!(g.mu[i][j].abs() <= rat(1, 2));
            }
            if i > 0 {
                let m = &g.mu[i][i - 1];
                assert!(g.bstar_sq[i] >= (delta - m * m) * &g.bstar_sq[i - 1]);
            }
        }
    }

    #[test]
    fn lll_examples() {
        let delta = rat(99, 100);
        let (r, u) = Lattice::integer(3).lll_reduce(&delta).unwrap();
        assert_eq!(r, Lattice::integer(3));
        assert_eq!(u, vec![vec![BigInt::one(), BigInt::zero(), BigInt::zero()], vec![BigInt::zero(), BigInt::one(), BigInt::zero()], vec![BigInt::zero(), BigInt::zero(), BigInt::one()]]);

        // columns (4,1),(7,2): det 1, spans ℤ²
        let l = ints(&[&[4, 1], &[7, 2]]);
        let (r, _) = l.lll_reduce(&delta).unwrap();
        check_reduced(&r, &delta);
        for b in r.basis() {
            assert!(linalg::norm_sq(b) <= int(2));
        }
        assert_eq!(r.det(), &int(1));

        let l = ints(&[&[1, 0], &[1000, 1]]);
        let (r, _) = l.lll_reduce(&delta).unwrap();
        check_reduced(&r, &delta);
        // exhaustive search over a small coefficient box: the shortest vector has norm² 1
        let mut best = None;
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                if (a, b) != (0, 0) {
                    let n2 = linalg::norm_sq(&r.point(&[a, b]));
                    best = Some(best.map_or(n2.clone(), |x: Rational| x.min(n2)));
                }
            }
        }
        assert_eq!(best.unwrap(), int(1));
        assert!(linalg::norm_sq(&r.basis()[0]) <= rat(4, 3));
        assert!(matches!(l.lll_reduce(&rat(1, 4)), Err(Error::Precondition(_))));
    }

    #[test]
    fn enumeration_examples() {
        let z2 = Lattice::integer(2);
        let zero = vec![int(0), int(0)];
        let r = enumerate_in_norm_ball(&z2, &zero, &GaugeBody::cube(2), &GaugeValue::Plain(int(1)), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(r.count, 9);
        let c = vec![rat(3, 7), rat(2, 7)];
        let r = enumerate_in_norm_ball(&z2, &c, &GaugeBody::cube(2), &GaugeValue::Plain(rat(3, 7)), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(r.points.iter().map(|p| p.coeffs.clone()).collect::<Vec<_>>(), vec![vec![0, 0]]);
        let z3 = Lattice::integer(3);
        let r = enumerate_in_norm_ball(&z3, &[int(0), int(0), int(0)], &GaugeBody::ball(3), &GaugeValue::SqrtOf(int(1)), DEFAULT_NODE_CAP).unwrap();
        assert_eq!(r.count, 7);
        assert_eq!(r.points[0].coeffs, vec![0, 0, 0]);
    }

    #[test]
    fn cap_is_reported() {
        let z3 = Lattice::integer(3);
        let err = enumerate_in_norm_ball(&z3, &[int(0), int(0), int(0)], &GaugeBody::ball(3), &GaugeValue::Plain(int(100)), 1000).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { cap: 1000, .. }));
    }

    fn small_lattice() -> impl Strategy<Value = Lattice> {
        (proptest::collection::vec((-6i64..7, 1i64..4), 4))
            .prop_filter_map("singular", |v| {
                Lattice::new(vec![vec![rat(v[0].0, v[0].1), rat(v[1].0, v[1].1)], vec![rat(v[2].0, v[2].1), rat(v[3].0, v[3].1)]]).ok()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn enumeration_matches_box_scan(
            l in small_lattice(),
            c in proptest::collection::vec((-9i64..9, 1i64..9), 2),
            body_ix in 0usize..3,
            bp in 0i64..12, bq in 1i64..5,
        ) {
            let center: Vec<Rational> = c.iter().map(|&(p, q)| rat(p, q)).collect();
            let body = match body_ix {
                0 => GaugeBody::cube(2),
                1 => GaugeBody::ball(2),
                _ => GaugeBody::cross(vec![rat(1, 2), rat(3, 2)]).unwrap(),
            };
            let bound = GaugeValue::Plain(rat(bp, bq));
            let got = enumerate_in_norm_ball(&l, &center, &body, &bound, DEFAULT_NODE_CAP).unwrap();
            // naive scan over a coefficient box large enough for the bound
            let inv_norm: Rational = linalg::inverse(&columns_to_matrix(l.basis())).unwrap().iter().flatten().map(|x| x.abs()).sum();
            let reach = (bound.square() * body.outer_radius().square()).to_f64().unwrap().sqrt()
                + linalg::norm_sq(&center).to_f64().unwrap().sqrt();
            let r = (inv_norm.to_f64().unwrap() * reach).ceil() as i64 + 1;
            let mut want = Vec::new();
            for a in -r..=r {
                for b in -r..=r {
                    let v = l.point(&[a, b]);
                    if body.gauge(&linalg::sub(&v, &center)).unwrap() <= bound {
                        want.push(vec![a, b]);
                    }
                }
            }
            let mut got_coeffs: Vec<Vec<i64>> = got.points.iter().map(|p| p.coeffs.clone()).collect();
            got_coeffs.sort();
            want.sort();
            prop_assert_eq!(got_coeffs, want);
        }

        #[test]
        fn symmetric_about_origin(l in small_lattice(), bp in 0i64..6) {
            let zero = vec![int(0), int(0)];
            let got = enumerate_in_norm_ball(&l, &zero, &GaugeBody::ball(2), &GaugeValue::Plain(int(bp)), DEFAULT_NODE_CAP).unwrap();
            for p in &got.points {
                let neg: Vec<i64> = p.coeffs.iter().map(|x| -x).collect();
                prop_assert!(got.points.iter().any(|q| q.coeffs == neg));
            }
        }

        #[test]
        fn lll_preserves_lattice(l in small_lattice()) {
            let (r, u) = l.lll_reduce(&rat(99, 100)).unwrap();
            prop_assert_eq!(r.det(), l.det());
            let um: Matrix = u.iter().map(|c| c.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
            prop_assert_eq!(linalg::det(&um).abs(), Rational::one());
            for b in r.basis() {
                prop_assert!(l.member(b).unwrap());
            }
            for b in l.basis() {
                prop_assert!(r.member(b).unwrap());
            }
        }

        #[test]
        fn double_dual_is_identity(l in small_lattice(), x in proptest::collection::vec((-20i64..20, 1i64..6), 2)) {
            let dd = l.dual().dual();
            prop_assert_eq!(dd.det(), l.det());
            let x: Vec<Rational> = x.iter().map(|&(p, q)| rat(p, q)).collect();
            prop_assert_eq!(dd.member(&x).unwrap(), l.member(&x).unwrap());
            // ⟨Λ, Λ*⟩ ⊆ ℤ
            for a in l.basis() {
                for b in l.dual().basis() {
                    prop_assert!(is_integral(&linalg::dot(a, b)));
                }
            }
        }
    }
}
