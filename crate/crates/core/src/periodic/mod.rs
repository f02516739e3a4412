//! The periodic lattice `Λ(α,Q) = ⋃_{q=0..Q} (qα + Λ)` and the
//! approximation quantities defined on it.

mod dirichlet;
mod gamma;
mod minima;
mod packing;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exactnum::rational::{is_integral, serde_i64_vec, serde_rational_mat, serde_rational_vec};
use crate::exactnum::{GaugeValue, Rational};
use crate::geometry::GaugeBody;
use crate::lattice::{enumerate_in_norm_ball, Lattice, LatticeSpec, DEFAULT_NODE_CAP};
use crate::linalg;

pub use dirichlet::{dirichlet_approx, DirichletApprox};
pub use gamma::{gamma, gamma_with_mode, DualWitness, GammaMode, GammaResult, GammaStatus};
pub use minima::{
    beta, lattice_minima, minima_pair, successive_minima, successive_minima_tilde, MinimaKind,
    MinimaResult,
};
pub use packing::{
    blichfeldt_witness, is_packing, packing_density, AxisBox, BlichfeldtMode, BlichfeldtWitness,
};

/// JSON form `{"basis": [...], "alpha": [...], "Q": 3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(with = "serde_rational_mat")]
    pub basis: Vec<Vec<Rational>>,
    #[serde(with = "serde_rational_vec")]
    pub alpha: Vec<Rational>,
    #[serde(rename = "Q")]
    pub q_max: u64,
}

/// A validated triple `(Λ, α, Q)` with `kα ∉ Λ` for `1 ≤ k ≤ Q`.
#[derive(Clone, Debug)]
pub struct PeriodicInstance {
    lat: Lattice,
    alpha: Vec<Rational>,
    q_max: u64,
    /// `Q+1` exactly when `(Q+1)α ∈ Λ`, in which case `Λ(α,Q)` is a lattice.
    degenerate_period: Option<u64>,
    alpha_coords: Vec<Rational>,
    node_cap: u64,
}

/// A point `x = qα + B·b` of `Λ(α,Q)` and its gauge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub q: u64,
    #[serde(with = "serde_i64_vec")]
    pub b: Vec<i64>,
    #[serde(with = "serde_rational_vec")]
    pub x: Vec<Rational>,
    pub value: GaugeValue,
}

impl PeriodicPoint {
    pub fn is_origin(&self) -> bool {
        self.x.iter().all(|v| v.is_zero())
    }

    /// `(q, x)` in `ℝ^{n+1}`; independent exactly when the pairs `(q, b)` are.
    pub fn lift(&self) -> Vec<Rational> {
        let mut v = Vec::with_capacity(self.x.len() + 1);
        v.push(Rational::from_integer(self.q.into()));
        v.extend(self.x.iter().cloned());
        v
    }
}

pub(crate) fn canonical_order(a: &PeriodicPoint, b: &PeriodicPoint) -> std::cmp::Ordering {
    a.value
        .cmp(&b.value)
        .then(a.q.cmp(&b.q))
        .then_with(|| a.b.cmp(&b.b))
}

/// Smallest `p ≥ 1` with `p·c ∈ ℤⁿ`.
fn period_of(coords: &[Rational]) -> BigInt {
    coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

/// Checks the standing assumption `kα ∉ Λ` for `1 ≤ k ≤ Q`.
pub fn validate(lat: Lattice, alpha: Vec<Rational>, q_max: u64) -> Result<PeriodicInstance> {
    check_dim(lat.dim(), alpha.len())?;
    let alpha_coords = lat.coords(&alpha)?;
    let p = period_of(&alpha_coords);
    if p <= BigInt::from(q_max) {
        let k = u64::try_from(p).expect("period bounded by Q");
        return Err(Error::AssumptionViolated { k });
    }
    let degenerate_period = (p == BigInt::from(q_max) + 1).then_some(q_max + 1);
    Ok(PeriodicInstance {
        lat,
        alpha,
        q_max,
        degenerate_period,
        alpha_coords,
        node_cap: DEFAULT_NODE_CAP,
    })
}

impl PeriodicInstance {
    pub fn from_spec(spec: &InstanceSpec) -> Result<Self> {
        validate(Lattice::new(spec.basis.clone())?, spec.alpha.clone(), spec.q_max)
    }

    pub fn spec(&self) -> InstanceSpec {
        InstanceSpec {
            basis: self.lat.basis().to_vec(),
            alpha: self.alpha.clone(),
            q_max: self.q_max,
        }
    }

    /// The classical case `Q = 0`, `α = 0`.
    pub fn classical(lat: Lattice) -> Self {
        let n = lat.dim();
        validate(lat, vec![Rational::zero(); n], 0).expect("Q = 0 is always valid")
    }

    pub fn with_node_cap(mut self, cap: u64) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn node_cap(&self) -> u64 {
        self.node_cap
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn lattice_spec(&self) -> LatticeSpec {
        self.lat.spec()
    }

    pub fn alpha(&self) -> &[Rational] {
        &self.alpha
    }

    pub fn q_max(&self) -> u64 {
        self.q_max
    }

    pub fn dim(&self) -> usize {
        self.lat.dim()
    }

    pub fn degenerate_period(&self) -> Option<u64> {
        self.degenerate_period
    }

    /// `B⁻¹α`.
    pub(crate) fn alpha_coords(&self) -> &[Rational] {
        &self.alpha_coords
    }

    pub fn q_alpha(&self, q: u64) -> Vec<Rational> {
        linalg::scale(&self.alpha, &Rational::from_integer(q.into()))
    }

    /// Smallest `q ∈ {0..Q}` with `x − qα ∈ Λ`.
    pub fn contains(&self, x: &[Rational]) -> Result<Option<u64>> {
        let y = self.lat.coords(x)?;
        for q in 0..=self.q_max {
            let qr = Rational::from_integer(q.into());
            if y.iter().zip(&self.alpha_coords).all(|(yi, ai)| is_integral(&(yi - &qr * ai))) {
                return Ok(Some(q));
            }
        }
        Ok(None)
    }

    /// When `(Q+1)α ∈ Λ`, the lattice `Λ + ℤα = Λ(α,Q)` of determinant
    /// `det Λ/(Q+1)`.
    pub fn as_lattice(&self) -> Option<Lattice> {
        let p = self.degenerate_period?;
        let n = self.dim();
        let scale = BigInt::from(p);
        let mut gens: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { scale.clone() } else { BigInt::zero() }).collect())
            .collect();
        gens.push(
            self.alpha_coords
                .iter()
                .map(|c| (c * Rational::from_integer(scale.clone())).to_integer())
                .collect(),
        );
        let rows = linalg::integer_basis(&gens);
        let basis = rows
            .iter()
            .map(|r| {
                let coords: Vec<Rational> =
                    r.iter().map(|x| Rational::new(x.clone(), scale.clone())).collect();
                let mut v = vec![Rational::zero(); n];
                for (b, c) in self.lat.basis().iter().zip(&coords) {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += c * bi;
                    }
                }
                v
            })
            .collect();
        Some(Lattice::new(basis).expect("generators span the space"))
    }

    /// Points of the coset `qα + Λ` with gauge at most `bound`.
    pub(crate) fn coset_points(
        &self,
        body: &GaugeBody,
        q: u64,
        bound: &GaugeValue,
    ) -> Result<Vec<PeriodicPoint>> {
        let qa = self.q_alpha(q);
        let center: Vec<Rational> = qa.iter().map(|v| -v).collect();
        let report = enumerate_in_norm_ball(&self.lat, &center, body, bound, self.node_cap)?;
        Ok(report
            .points
            .into_iter()
            .map(|p| PeriodicPoint {
                q,
                b: p.coeffs,
                x: linalg::add(&qa, &p.vector),
                value: p.value,
            })
            .collect())
    }
}

/// `Λ(α,Q) ∩ bound·K`, sorted by `(value, q, b)`.
pub fn enumerate_periodic(
    inst: &PeriodicInstance,
    body: &GaugeBody,
    bound: &GaugeValue,
) -> Result<Vec<PeriodicPoint>> {
    check_dim(inst.dim(), body.dim())?;
    let mut all = Vec::new();
    for q in 0..=inst.q_max {
        all.extend(inst.coset_points(body, q, bound)?);
    }
    all.sort_by(canonical_order);
    Ok(all)
}
