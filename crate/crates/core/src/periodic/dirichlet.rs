use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::rational::{pow, serde_bigint_vec, serde_rational, serde_rational_vec};
use crate::exactnum::Rational;
use crate::geometry::GaugeBody;
use crate::lattice::Lattice;

use super::{beta, validate};

/// `q ≤ Q` and `z ∈ ℤⁿ` with `max_i |qα_i − z_i| < Q^(−1/n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirichletApprox {
    pub q: u64,
    #[serde(with = "serde_bigint_vec")]
    pub z: Vec<BigInt>,
    #[serde(with = "serde_rational_vec")]
    pub residual: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub max_residual: Rational,
}

/// Best approximation in the max-norm, certified by `rⁿ·Q < 1`.
pub fn dirichlet_approx(alpha: &[Rational], q_max: u64) -> Result<DirichletApprox> {
    let n = alpha.len();
    if n == 0 || q_max == 0 {
        return Err(Error::Precondition("need n ≥ 1 and Q ≥ 1".into()));
    }
    let (q, x) = match validate(Lattice::integer(n), alpha.to_vec(), q_max) {
        // kα ∈ ℤⁿ: an exact hit
        Err(Error::AssumptionViolated { k }) => (k, vec![Rational::from_integer(0.into()); n]),
        Err(e) => return Err(e),
        Ok(inst) => {
            let (_, w) = beta(&inst, &GaugeBody::cube(n))?;
            (w.q, w.x)
        }
    };
    let qr = Rational::from_integer(q.into());
    let z: Vec<BigInt> = alpha.iter().zip(&x).map(|(a, xi)| (&qr * a - xi).to_integer()).collect();
    let residual: Vec<Rational> = alpha.iter().zip(&z).map(|(a, zi)| &qr * a - Rational::from_integer(zi.clone())).collect();
    let max_residual = residual.iter().map(|r| r.abs()).max().expect("n ≥ 1");
    if q == 0 || pow(&max_residual, n as u32) * Rational::from_integer(q_max.into()) >= Rational::from_integer(1.into()) {
        return Err(Error::Internal("Dirichlet bound not met".into()));
    }
    Ok(DirichletApprox { q, z, residual, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let d = dirichlet_approx(&[rat(2, 3), rat(1, 2)], 4).unwrap();
        assert_eq!((d.q, d.z.clone()), (2, vec![BigInt::from(1), BigInt::from(1)]));
        assert_eq!(d.max_residual, rat(1, 3));
        let d = dirichlet_approx(&[int(0), int(0)], 1).unwrap();
        assert_eq!((d.q, d.z), (1, vec![BigInt::from(0); 2]));
        let d = dirichlet_approx(&[rat(7, 10)], 3).unwrap();
        assert_eq!((d.q, d.z, d.max_residual), (3, vec![BigInt::from(2)], rat(1, 10)));
        assert!(dirichlet_approx(&[rat(1, 2)], 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn always_certified(a in (-30i64..30, 1i64..40), b in (-30i64..30, 1i64..40), q in 1u64..60) {
            let d = dirichlet_approx(&[rat(a.0, a.1), rat(b.0, b.1)], q).unwrap();
            prop_assert!(d.q >= 1 && d.q <= q);
            prop_assert!(&d.max_residual * &d.max_residual * int(q as i64) < int(1));
        }
    }
}
