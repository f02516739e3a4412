use std::collections::HashMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exactnum::rational::{floor_int, serde_rational_vec};
use crate::exactnum::{GaugeValue, IntervalValue, Quantity, Rational, DEFAULT_PRECISION_BITS};
use crate::geometry::GaugeBody;
use crate::lattice::Lattice;
use crate::linalg;

use super::{beta, PeriodicInstance};

/// `Λ(α,Q) + scale·K` is a packing iff `λ₁ ≥ 2·scale`.
pub fn is_packing(inst: &PeriodicInstance, body: &GaugeBody, scale: &GaugeValue) -> Result<bool> {
    if scale.is_zero() {
        return Err(Error::Precondition("packing scale must be positive".into()));
    }
    let (l1, _) = beta(inst, body)?;
    Ok(l1 >= scale.scale(&Rational::from_integer(2.into())))
}

/// `vol(scale·K)·(Q+1)/det Λ`.
pub fn packing_density(inst: &PeriodicInstance, body: &GaugeBody, scale: &GaugeValue) -> Result<IntervalValue> {
    if !is_packing(inst, body, scale)? {
        return Err(Error::NotAPacking(format!("λ₁ < 2·{scale}")));
    }
    let factor = Rational::from_integer((inst.q_max() + 1).into()) / inst.lattice().det();
    let q = Quantity::gauge(scale.pow(inst.dim() as u32)).mul(&body.volume()).scale(&factor);
    Ok(q.enclosure(DEFAULT_PRECISION_BITS))
}

/// Closed box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisBox {
    #[serde(with = "serde_rational_vec")]
    pub lo: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    pub hi: Vec<Rational>,
}

impl AxisBox {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Precondition("box with lo > hi".into()));
        }
        Ok(AxisBox { lo, hi })
    }

    pub fn volume(&self) -> Rational {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.lo.len() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlichfeldtMode {
    /// Box arithmetic modulo a diagonal lattice; always succeeds.
    Exact,
    /// Pigeonhole on successively finer grids; may find nothing.
    Grid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlichfeldtWitness {
    #[serde(with = "serde_rational_vec")]
    pub x1: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    pub x2: Vec<Rational>,
    /// `x1 − x2 ∈ qα + Λ`.
    pub q: u64,
    pub mode: BlichfeldtMode,
}

/// Two distinct points of `bx` whose difference lies in `Λ(α,Q)`.
///
/// Requires `vol(bx) > det Λ/(Q+1)`. Exact for diagonal bases; otherwise
/// a grid search that returns `None` when it gives up.
pub fn blichfeldt_witness(inst: &PeriodicInstance, bx: &AxisBox) -> Result<Option<BlichfeldtWitness>> {
    check_dim(inst.dim(), bx.lo.len())?;
    let bound = inst.lattice().det() / Rational::from_integer((inst.q_max() + 1).into());
    if bx.volume() <= bound {
        return Err(Error::Precondition(format!("box volume must exceed det Λ/(Q+1) = {bound}")));
    }
    let w = if inst.lattice().is_diagonal() { Some(exact(inst, bx)) } else { grid(inst, bx) };
    if let Some(w) = &w {
        let d = linalg::sub(&w.x1, &w.x2);
        if w.x1 == w.x2 || !bx.contains(&w.x1) || !bx.contains(&w.x2) || inst.contains(&d)?.is_none() {
            return Err(Error::Internal("Blichfeldt witness failed verification".into()));
        }
    }
    Ok(w)
}

/// One axis piece: points `y` of the original interval with
/// `y + qα_i − shift·d_i ∈ [lo, hi] ⊆ [0, d_i]`.
#[derive(Clone, Debug)]
struct Piece {
    lo: Rational,
    hi: Rational,
    shift: Rational,
}

fn axis_pieces(lo: &Rational, hi: &Rational, d: &Rational) -> Vec<Piece> {
    let k = Rational::from_integer(floor_int(&(lo / d)));
    let a = lo - &k * d;
    let b = hi - &k * d;
    if &b <= d {
        vec![Piece { lo: a, hi: b, shift: k }]
    } else {
        vec![
            Piece { lo: a, hi: d.clone(), shift: k.clone() },
            Piece { lo: Rational::zero(), hi: b - d, shift: k + Rational::from_integer(1.into()) },
        ]
    }
}

fn exact(inst: &PeriodicInstance, bx: &AxisBox) -> BlichfeldtWitness {
    let n = inst.dim();
    let d: Vec<Rational> = (0..n).map(|i| inst.lattice().basis()[i][i].abs()).collect();
    // an axis at least as long as the period gives a lattice difference
    if let Some(i) = (0..n).find(|&i| &bx.hi[i] - &bx.lo[i] >= d[i]) {
        let mut x2 = bx.lo.clone();
        x2[i] += &d[i];
        return BlichfeldtWitness { x1: x2, x2: bx.lo.clone(), q: 0, mode: BlichfeldtMode::Exact };
    }
    // translated boxes reduced into the cell Π[0, d_i]; same-q pieces are disjoint
    let mut boxes: Vec<(u64, Vec<Piece>)> = Vec::new();
    for q in 0..=inst.q_max() {
        let qa = inst.q_alpha(q);
        let per_axis: Vec<Vec<Piece>> =
            (0..n).map(|i| axis_pieces(&(&bx.lo[i] + &qa[i]), &(&bx.hi[i] + &qa[i]), &d[i])).collect();
        let mut combos: Vec<Vec<Piece>> = vec![vec![]];
        for axis in &per_axis {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    axis.iter().map(move |p| {
                        let mut c = c.clone();
                        c.push(p.clone());
                        c
                    })
                })
                .collect();
        }
        boxes.extend(combos.into_iter().map(|c| (q, c)));
    }
    for (i, (q1, b1)) in boxes.iter().enumerate() {
        for (q2, b2) in &boxes[i + 1..] {
            if q1 == q2 || !(0..n).all(|k| b1[k].lo <= b2[k].hi && b2[k].lo <= b1[k].hi) {
                continue;
            }
            let t: Vec<Rational> = (0..n).map(|k| b1[k].lo.clone().max(b2[k].lo.clone())).collect();
            let point = |q: u64, b: &[Piece]| -> Vec<Rational> {
                let qa = inst.q_alpha(q);
                (0..n).map(|k| &t[k] - &qa[k] + &b[k].shift * &d[k]).collect()
            };
            // x1 − x2 ∈ (q2 − q1)α + Λ with q1 < q2
            return BlichfeldtWitness { x1: point(*q1, b1), x2: point(*q2, b2), q: q2 - q1, mode: BlichfeldtMode::Exact };
        }
    }
    unreachable!("pigeonhole: total piece volume exceeds the cell volume")
}

const GRID_POINT_BUDGET: usize = 2_000_000;

/// Points of `(1/M)Λ` in the box, hashed by the class of `x + qα` modulo `Λ`.
fn grid(inst: &PeriodicInstance, bx: &AxisBox) -> Option<BlichfeldtWitness> {
    let n = inst.dim();
    let lat = inst.lattice();
    let alpha_den = inst
        .lattice()
        .coords(inst.alpha())
        .ok()?
        .iter()
        .fold(num_bigint::BigInt::from(1), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let two = Rational::from_integer(2.into());
    let center: Vec<Rational> = bx.lo.iter().zip(&bx.hi).map(|(a, b)| (a + b) / &two).collect();
    let half: Vec<Rational> = bx.lo.iter().zip(&bx.hi).map(|(a, b)| (b - a) / &two).collect();
    if half.iter().any(|h| h.is_zero()) {
        return None;
    }
    let body = GaugeBody::from_spec(&crate::geometry::BodySpec::Cube { diag: Some(half) }, n).ok()?;
    let mut m = Rational::from_integer(alpha_den);
    for _ in 0..8 {
        let fine = Lattice::new(lat.basis().iter().map(|b| linalg::scale(b, &(Rational::from_integer(1.into()) / &m))).collect()).ok()?;
        let pts = crate::lattice::enumerate_in_norm_ball(&fine, &center, &body, &GaugeValue::Plain(Rational::from_integer(1.into())), inst.node_cap()).ok()?;
        if pts.points.len() * (inst.q_max() as usize + 1) > GRID_POINT_BUDGET {
            return None;
        }
        let mut seen: HashMap<Vec<Rational>, (u64, Vec<Rational>)> = HashMap::new();
        for p in &pts.points {
            for q in 0..=inst.q_max() {
                let c = lat.coords(&linalg::add(&p.vector, &inst.q_alpha(q))).ok()?;
                let class: Vec<Rational> = c.iter().map(|v| v - v.floor()).collect();
                if let Some((q0, x0)) = seen.get(&class) {
                    if *q0 == q && x0 == &p.vector {
                        continue;
                    }
                    // x0 + q0α ≡ x + qα, so x0 − x ∈ (q − q0)α + Λ
                    let (x1, x2, dq) = if *q0 <= q { (x0.clone(), p.vector.clone(), q - q0) } else { (p.vector.clone(), x0.clone(), q0 - q) };
                    return Some(BlichfeldtWitness { x1, x2, q: dq, mode: BlichfeldtMode::Grid });
                }
                seen.insert(class, (q, p.vector.clone()));
            }
        }
        m *= &two;
    }
    None
}
