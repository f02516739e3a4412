use serde::{Deserialize, Serialize};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::rational::{round_int, serde_rational, serde_rational_vec};
use crate::exactnum::{IntervalValue, Rational, DEFAULT_PRECISION_BITS};
use crate::lattice::{estimate_nodes, fincke_pohst, Reduced};
use crate::linalg;

use super::{MinimaKind, MinimaResult, PeriodicInstance};

/// Which radius bounds the dual search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// `(nλ_n + Q‖(α,1)‖)ⁿ / det Λ`.
    #[default]
    Statement,
    /// `Π(√n·λ_i + Q‖(α,1)‖) / det Λ`.
    ProofRadius,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaStatus {
    Exact,
    SkippedCapExceeded,
    /// No pair in the ball gives a positive value.
    NoCandidate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualWitness {
    #[serde(with = "serde_rational_vec")]
    pub u: Vec<Rational>,
    /// Coordinates of `u` in the dual basis.
    pub u_coeffs: Vec<i64>,
    pub z: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaResult {
    pub mode: GammaMode,
    pub status: GammaStatus,
    #[serde(with = "crate::exactnum::rational::serde_opt_rational")]
    pub value: Option<Rational>,
    pub witness: Option<DualWitness>,
    /// Enclosure of the prescribed radius.
    pub radius: IntervalValue,
    /// The squared radius actually searched, `radius.hi²`.
    #[serde(with = "serde_rational")]
    pub searched_radius_sq: Rational,
    pub nodes_visited: u64,
}

fn radius(inst: &PeriodicInstance, minima: &MinimaResult, mode: GammaMode) -> IntervalValue {
    let bits = DEFAULT_PRECISION_BITS;
    let n = inst.dim();
    let nr = Rational::from_integer(n.into());
    let q = Rational::from_integer(inst.q_max().into());
    let alpha_norm = IntervalValue::sqrt(&(linalg::norm_sq(inst.alpha()) + Rational::from_integer(1.into())), bits);
    let shift = alpha_norm.scale(&q);
    let prod = match mode {
        GammaMode::Statement => {
            let ln = minima.values[n - 1].to_interval(bits);
            ln.scale(&nr).add(&shift).powi(n as i32).expect("positive power")
        }
        GammaMode::ProofRadius => {
            let sqrt_n = IntervalValue::sqrt(&nr, bits);
            minima.values.iter().fold(IntervalValue::point(Rational::from_integer(1.into())), |acc, l| {
                acc.mul(&l.to_interval(bits).mul(&sqrt_n).add(&shift))
            })
        }
    };
    prod.scale(&(Rational::from_integer(1.into()) / inst.lattice().det()))
}

fn normalized(coeffs: &[i64], z: i64) -> Vec<i64> {
    let mut v: Vec<i64> = coeffs.to_vec();
    v.push(z);
    if v.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
        v.iter_mut().for_each(|c| *c = -*c);
    }
    v
}

/// `γ(α,Λ,Q,n)` in the statement's radius.
pub fn gamma(inst: &PeriodicInstance, minima: &MinimaResult) -> Result<GammaResult> {
    gamma_with_mode(inst, minima, GammaMode::Statement)
}

/// Unimodular `U` with `row·U = (±g, 0, …, 0)`, by Euclid on columns.
fn column_reduce(row: &[BigInt]) -> (BigInt, Vec<Vec<BigInt>>) {
    let m = row.len();
    let mut r = row.to_vec();
    // cols[j] is column j of U
    let mut cols: Vec<Vec<BigInt>> =
        (0..m).map(|j| (0..m).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    loop {
        let Some(i) = (0..m).filter(|&i| !r[i].is_zero()).min_by(|&a, &b| r[a].abs().cmp(&r[b].abs())) else { break };
        let mut done = true;
        for j in 0..m {
            if j == i || r[j].is_zero() {
                continue;
            }
            let f = Integer::div_floor(&r[j], &r[i]);
            r[j] = &r[j] - &f * &r[i];
            let ci = cols[i].clone();
            for (x, y) in cols[j].iter_mut().zip(&ci) {
                *x -= &f * y;
            }
            done = false;
        }
        if done {
            r.swap(0, i);
            cols.swap(0, i);
            break;
        }
    }
    (r[0].clone(), cols)
}

/// Closest points of `span(red) + c` to the origin: Babai's nearest plane
/// bounds the search radius, then everything within it is listed.
fn nearest_plane_sq(red: &Reduced, yc: &[Rational]) -> Rational {
    let n = yc.len();
    let mut y = vec![Rational::zero(); n];
    let mut dist = Rational::zero();
    for i in (0..n).rev() {
        let mut c = yc[i].clone();
        for j in i + 1..n {
            c -= &red.gso.mu[j][i] * (&y[j] - &yc[j]);
        }
        y[i] = Rational::from_integer(round_int(&c));
        let d = &y[i] - &c;
        dist += &red.gso.bstar_sq[i] * &d * &d;
    }
    dist
}

/// `min |u*·α + z| > 0` over `(u*, z) ∈ Λ* × ℤ` with `‖(u*, z)‖ ≤ R`.
///
/// With `a = B⁻¹α` and `u* = B⁻ᵀw` the value is `|w·a + z|`, a multiple of
/// `1/p` for the period `p`. For `k = 1, 2, …` the pairs with `w·a + z = k/p`
/// form a translate of a rank-`n` lattice; the first `k` whose translate
/// meets the ball gives `γ = k/p`, and its shortest points give the witness.
/// The ball has radius `R.hi ≥ R`; a larger ball can only lower the minimum.
pub fn gamma_with_mode(inst: &PeriodicInstance, minima: &MinimaResult, mode: GammaMode) -> Result<GammaResult> {
    if minima.kind != MinimaKind::Periodic || minima.values.len() != inst.dim() {
        return Err(Error::Precondition("gamma needs the periodic successive minima".into()));
    }
    let n = inst.dim();
    let radius = radius(inst, minima, mode).round_outward(64);
    let radius_sq = &radius.hi * &radius.hi;
    let mut out = GammaResult {
        mode,
        status: GammaStatus::NoCandidate,
        value: None,
        witness: None,
        radius,
        searched_radius_sq: radius_sq.clone(),
        nodes_visited: 0,
    };
    let a = inst.alpha_coords();
    let p = a.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut row: Vec<BigInt> = a.iter().map(|c| (c * Rational::from_integer(p.clone())).to_integer()).collect();
    row.push(p.clone());
    let (g, cols) = column_reduce(&row);
    let sign = if g.is_negative() { -BigInt::one() } else { BigInt::one() };
    // (w, z) ↦ (B⁻ᵀw, z)
    let dual = inst.lattice().dual();
    let embed = |v: &[BigInt]| -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n + 1];
        for (b, c) in dual.basis().iter().zip(v) {
            let c = Rational::from_integer(c.clone());
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += &c * bi;
            }
        }
        x[n] = Rational::from_integer(v[n].clone());
        x
    };
    let kernel: Vec<Vec<Rational>> = cols[1..].iter().map(|c| embed(c)).collect();
    let red = Reduced::from_generators(&kernel);
    let x0: Vec<BigInt> = cols[0].iter().map(|v| v * &sign).collect();
    let mut k = BigInt::zero();
    while k < p {
        k += 1;
        let xk: Vec<BigInt> = x0.iter().map(|v| v * &k).collect();
        let center: Vec<Rational> = embed(&xk).iter().map(|v| -v).collect();
        let yc = linalg::mat_vec(&red.inv, &center);
        let proj = red.vector_frac(&yc);
        let orth_sq = linalg::norm_sq(&linalg::sub(&center, &proj));
        if orth_sq > radius_sq {
            // the hyperplanes w·a + z = k/p only move away from the origin
            break;
        }
        let budget = &radius_sq - &orth_sq;
        let search = nearest_plane_sq(&red, &yc).min(budget);
        if estimate_nodes(&red, &search) > inst.node_cap() as f64 {
            out.status = GammaStatus::SkippedCapExceeded;
            return Ok(out);
        }
        let mut found: Vec<(Rational, Vec<i64>, Vec<Rational>)> = Vec::new();
        let visited = fincke_pohst(&red, &center, &search, inst.node_cap(), &mut |y, d| {
            let coeffs = red.original_coeffs(y);
            let v: Vec<BigInt> = (0..=n)
                .map(|i| &xk[i] + coeffs.iter().zip(&cols[1..]).map(|(c, col)| BigInt::from(*c) * &col[i]).sum::<BigInt>())
                .collect();
            let w: Vec<i64> = v.iter().map(|x| x.to_i64().expect("dual coefficient fits in i64")).collect();
            found.push((d + &orth_sq, w, embed(&v)));
        });
        match visited {
            Ok(nodes) => out.nodes_visited += nodes,
            Err(Error::CapExceeded { .. }) => {
                out.status = GammaStatus::SkippedCapExceeded;
                return Ok(out);
            }
            Err(e) => return Err(e),
        }
        let best = found
            .into_iter()
            .filter(|(d, _, _)| d <= &radius_sq)
            .map(|(d, w, x)| {
                let signed = normalized(&w[..n], w[n]);
                let flip = signed != w;
                (d, signed, flip, x)
            })
            .min_by(|l, r| (&l.0, &l.1).cmp(&(&r.0, &r.1)));
        if let Some((_, signed, flip, x)) = best {
            let u: Vec<Rational> = x[..n].iter().map(|v| if flip { -v } else { v.clone() }).collect();
            out.status = GammaStatus::Exact;
            out.value = Some(Rational::new(k, p));
            out.witness = Some(DualWitness { u, u_coeffs: signed[..n].to_vec(), z: signed[n] });
            return Ok(out);
        }
    }
    Ok(out)
}
