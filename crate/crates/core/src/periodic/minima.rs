use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exactnum::rational::round_int;
use crate::exactnum::{GaugeValue, Rational};
use crate::geometry::GaugeBody;
use crate::linalg::{self, IndependenceTracker};

use super::{canonical_order, enumerate_periodic, PeriodicInstance, PeriodicPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimaKind {
    /// `λ_i(Λ(α,Q), K)`: independence of the points in `ℝⁿ`.
    Periodic,
    /// `λ̃_i`: independence of the lifted pairs `(q, b)` in `ℝ^{n+1}`.
    Tilde,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaResult {
    pub kind: MinimaKind,
    pub values: Vec<GaugeValue>,
    /// Canonical attaining points, one per value.
    pub attaining: Vec<PeriodicPoint>,
    /// Set for `λ̃` at `Q = 0`, where only `n` independent lifts exist.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unattainable: bool,
}

/// Greedy selection over canonically sorted points: the first `target`
/// points that enlarge the span. Matroid greedy, so the values are the
/// successive minima.
fn greedy(points: &[PeriodicPoint], lifted: bool, target: usize) -> Vec<PeriodicPoint> {
    let mut tracker = IndependenceTracker::new();
    let mut chosen = Vec::with_capacity(target);
    for p in points {
        if chosen.len() == target {
            break;
        }
        if p.is_origin() {
            continue;
        }
        let v = if lifted { p.lift() } else { p.x.clone() };
        if tracker.try_add(&v) {
            chosen.push(p.clone());
        }
    }
    chosen
}

fn result(kind: MinimaKind, chosen: Vec<PeriodicPoint>, unattainable: bool) -> MinimaResult {
    MinimaResult {
        kind,
        values: chosen.iter().map(|p| p.value.clone()).collect(),
        attaining: chosen,
        unattainable,
    }
}

/// Classical successive minima `λ_i(Λ, K)` (the `q = 0` coset alone).
pub fn lattice_minima(inst: &PeriodicInstance, body: &GaugeBody) -> Result<MinimaResult> {
    check_dim(inst.dim(), body.dim())?;
    let n = inst.dim();
    // the reduced basis gives n independent points within this bound
    let bound = inst
        .lattice()
        .reduced_basis()
        .iter()
        .map(|b| body.gauge_unchecked(b))
        .max()
        .expect("nonempty basis");
    let pts = inst.coset_points(body, 0, &bound)?;
    let chosen = greedy(&pts, false, n);
    if chosen.len() != n {
        return Err(Error::Internal("lattice minima: too few independent points".into()));
    }
    Ok(result(MinimaKind::Periodic, chosen, false))
}

/// Canonical minimum over the cosets `q ∈ qs`, starting from `initial`.
fn best_over_cosets(
    inst: &PeriodicInstance,
    body: &GaugeBody,
    qs: impl Iterator<Item = u64>,
    initial: Option<PeriodicPoint>,
    initial_bound: GaugeValue,
) -> Result<Option<PeriodicPoint>> {
    let mut best = initial;
    let mut bound = initial_bound;
    for q in qs {
        let pts = inst.coset_points(body, q, &bound)?;
        if let Some(p) = pts.into_iter().find(|p| !p.is_origin()) {
            let better = match &best {
                None => true,
                Some(b) => canonical_order(&p, b).is_lt(),
            };
            if better {
                bound = p.value.clone();
                best = Some(p);
            }
        }
    }
    Ok(best)
}

/// `β(α,Q,Λ,K) = min{ |qα + b|_K > 0 }`, which equals `λ₁` and `λ̃₁`.
///
/// Starts from the shortest lattice vector and shrinks the search radius
/// coset by coset.
pub fn beta(inst: &PeriodicInstance, body: &GaugeBody) -> Result<(GaugeValue, PeriodicPoint)> {
    check_dim(inst.dim(), body.dim())?;
    let start = inst
        .lattice()
        .reduced_basis()
        .iter()
        .map(|b| body.gauge_unchecked(b))
        .min()
        .expect("nonempty basis");
    let best = best_over_cosets(inst, body, 0..=inst.q_max(), None, start)?
        .ok_or_else(|| Error::Internal("beta: no nonzero point found".into()))?;
    Ok((best.value.clone(), best))
}

/// Smallest gauge over the cosets `q = 1..Q`.
fn best_nonzero_coset(inst: &PeriodicInstance, body: &GaugeBody) -> Result<Option<PeriodicPoint>> {
    if inst.q_max() == 0 {
        return Ok(None);
    }
    // α − B·round(B⁻¹α) bounds the q = 1 coset
    let coords = inst.lattice().coords(inst.alpha())?;
    let shift: Vec<Rational> = coords.iter().map(|c| Rational::from_integer(round_int(c))).collect();
    let near = linalg::sub(inst.alpha(), &linalg::mat_vec(&linalg::transpose(&inst.lattice().basis().to_vec()), &shift));
    let bound = body.gauge_unchecked(&near);
    best_over_cosets(inst, body, 1..=inst.q_max(), None, bound)
}

/// `λ_i(Λ(α,Q), K)` for `i = 1..n` with the canonical attaining set.
pub fn successive_minima(inst: &PeriodicInstance, body: &GaugeBody) -> Result<MinimaResult> {
    let n = inst.dim();
    let classical = lattice_minima(inst, body)?;
    // the q = 0 coset alone has n independent points within λ_n(Λ, K)
    let pts = enumerate_periodic(inst, body, &classical.values[n - 1])?;
    let chosen = greedy(&pts, false, n);
    if chosen.len() != n {
        return Err(Error::Internal("periodic minima: too few independent points".into()));
    }
    Ok(result(MinimaKind::Periodic, chosen, false))
}

/// Both `λ_i` and `λ̃_i` from one enumeration, with the relations
/// `λ̃₁ = λ₁` and `λ̃_i ≤ λ_i` checked.
pub fn minima_pair(inst: &PeriodicInstance, body: &GaugeBody) -> Result<(MinimaResult, MinimaResult)> {
    let n = inst.dim();
    let classical = lattice_minima(inst, body)?;
    let mut radius = classical.values[n - 1].clone();
    if let Some(p) = best_nonzero_coset(inst, body)? {
        radius = radius.max(p.value);
    }
    let pts = enumerate_periodic(inst, body, &radius)?;
    let periodic = greedy(&pts, false, n);
    if periodic.len() != n {
        return Err(Error::Internal("periodic minima: too few independent points".into()));
    }
    let lifts = greedy(&pts, true, n + 1);
    let unattainable = lifts.len() == n;
    if lifts.len() < n || (!unattainable && inst.q_max() == 0) {
        return Err(Error::Internal("tilde minima: wrong number of independent lifts".into()));
    }
    let periodic = result(MinimaKind::Periodic, periodic, false);
    let tilde = result(MinimaKind::Tilde, lifts, unattainable);
    if tilde.values[0] != periodic.values[0] {
        return Err(Error::Internal("λ̃₁ differs from λ₁".into()));
    }
    for i in 1..n {
        if tilde.values[i] > periodic.values[i] {
            return Err(Error::Internal(format!("λ̃_{} exceeds λ_{}", i + 1, i + 1)));
        }
    }
    Ok((periodic, tilde))
}

/// `λ̃_i`, `i = 1..n+1`; only `n` values when `Q = 0`.
pub fn successive_minima_tilde(inst: &PeriodicInstance, body: &GaugeBody) -> Result<MinimaResult> {
    Ok(minima_pair(inst, body)?.1)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{instance_strategy, z2_inst};
    use super::super::validate;
    use super::*;
    use crate::exactnum::{int, rat};
    use crate::lattice::Lattice;
    use proptest::prelude::*;

    fn cross_case(n: usize, m: i64) -> (PeriodicInstance, GaugeBody) {
        let mut alpha = vec![int(0); n];
        alpha[0] = rat(1, m);
        let inst = validate(Lattice::integer(n), alpha, (m - 1) as u64).unwrap();
        let mut scales = vec![int(1); n];
        scales[0] = rat(1, m);
        (inst, GaugeBody::cross(scales).unwrap())
    }

    #[test]
    fn beta_examples() {
        let inst = z2_inst((3, 7), (2, 7), 3);
        let (v, w) = beta(&inst, &GaugeBody::cube(2)).unwrap();
        assert_eq!(v, GaugeValue::Plain(rat(2, 7)));
        assert_eq!((w.q, w.x), (3, vec![rat(2, 7), rat(-1, 7)]));

        let (inst, k5) = cross_case(2, 5);
        let (v, w) = beta(&inst, &k5).unwrap();
        assert_eq!(v, GaugeValue::Plain(int(1)));
        // value-1 ties: (0,(0,±1)) at q = 0 precede (1/5,0) at q = 1
        assert_eq!(w.q, 0);

        let inst = validate(Lattice::integer(1), vec![rat(7, 10)], 3).unwrap();
        let (v, w) = beta(&inst, &GaugeBody::cube(1)).unwrap();
        assert_eq!(v, GaugeValue::Plain(rat(1, 10)));
        assert_eq!((w.q, w.x), (3, vec![rat(1, 10)]));
    }

    #[test]
    fn minima_examples() {
        let inst = z2_inst((3, 7), (2, 7), 3);
        let m = successive_minima(&inst, &GaugeBody::cube(2)).unwrap();
        assert_eq!(m.values, vec![GaugeValue::Plain(rat(2, 7)), GaugeValue::Plain(rat(3, 7))]);
        assert_eq!(m.attaining[0].q, 3);
        assert_eq!(m.attaining[1].q, 1);
        assert_eq!(m.attaining[1].x, vec![rat(3, 7), rat(2, 7)]);

        let (inst, k5) = cross_case(2, 5);
        let m = successive_minima(&inst, &k5).unwrap();
        assert_eq!(m.values, vec![GaugeValue::Plain(int(1)); 2]);

        let inst = z2_inst((1, 3), (1, 3), 2);
        let m = successive_minima(&inst, &GaugeBody::cube(2)).unwrap();
        assert_eq!(m.values, vec![GaugeValue::Plain(rat(1, 3)), GaugeValue::Plain(rat(2, 3))]);
    }

    #[test]
    fn tilde_examples() {
        let inst = z2_inst((3, 7), (2, 7), 3);
        let t = successive_minima_tilde(&inst, &GaugeBody::ball(2)).unwrap();
        assert_eq!(t.values, vec![GaugeValue::SqrtOf(rat(5, 49)), GaugeValue::SqrtOf(rat(10, 49)), GaugeValue::SqrtOf(rat(17, 49))]);
        assert_eq!(t.attaining[0].q, 3);
        assert_eq!((t.attaining[1].q, t.attaining[1].x.clone()), (2, vec![rat(-1, 7), rat(-3, 7)]));
        // (1, α) is the difference of the first two lifts, so the third is (2, (−1, 0))
        assert_eq!((t.attaining[2].q, t.attaining[2].x.clone()), (2, vec![rat(-1, 7), rat(4, 7)]));

        let q0 = PeriodicInstance::classical(Lattice::integer(2));
        let t = successive_minima_tilde(&q0, &GaugeBody::ball(2)).unwrap();
        assert!(t.unattainable);
        assert_eq!(t.values.len(), 2);

        let (inst, k5) = cross_case(2, 5);
        let t = successive_minima_tilde(&inst, &k5).unwrap();
        assert_eq!(t.values, vec![GaugeValue::Plain(int(1)); 3]);
    }

    #[test]
    fn json_shape() {
        let inst = z2_inst((3, 7), (2, 7), 3);
        let m = successive_minima(&inst, &GaugeBody::cube(2)).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.starts_with(r#"{"kind":"periodic","values":[{"plain":"2/7"},{"plain":"3/7"}],"attaining":[{"q":3,"b":["-1","-1"],"x":["2/7","-1/7"]"#));
        let back: MinimaResult = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn dilating_the_body_divides_minima(inst in instance_strategy(), p in 1i64..5, q in 1i64..5) {
            let t = rat(p, q);
            let body = GaugeBody::cross(vec![rat(1, 2), int(1)]).unwrap();
            let a = successive_minima(&inst, &body).unwrap();
            let b = successive_minima(&inst, &body.scaled(&t)).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert_eq!(y.clone(), x.div(&GaugeValue::Plain(t.clone())));
            }
        }

        #[test]
        fn larger_q_never_increases_minima(inst in instance_strategy()) {
            if inst.q_max() > 0 {
                let smaller = validate(inst.lattice().clone(), inst.alpha().to_vec(), inst.q_max() - 1).unwrap();
                let a = successive_minima(&inst, &GaugeBody::ball(2)).unwrap();
                let b = successive_minima(&smaller, &GaugeBody::ball(2)).unwrap();
                for (x, y) in a.values.iter().zip(&b.values) {
                    prop_assert!(x <= y);
                }
            }
        }

        #[test]
        fn zero_q_matches_classical(inst in instance_strategy()) {
            let q0 = PeriodicInstance::classical(inst.lattice().clone());
            let a = successive_minima(&q0, &GaugeBody::cube(2)).unwrap();
            let b = lattice_minima(&inst, &GaugeBody::cube(2)).unwrap();
            prop_assert_eq!(a.values, b.values);
        }

        #[test]
        fn degenerate_instance_is_a_lattice(den in 2u64..7, num in 1i64..7, num2 in 0i64..7) {
            let q = den - 1;
            if let Ok(inst) = validate(Lattice::integer(2), vec![rat(num, den as i64), rat(num2, den as i64)], q) {
                if inst.degenerate_period() == Some(q + 1) {
                    let l = inst.as_lattice().unwrap();
                    prop_assert_eq!(l.det(), &rat(1, den as i64));
                    let a = successive_minima(&inst, &GaugeBody::cube(2)).unwrap();
                    let b = successive_minima(&PeriodicInstance::classical(l), &GaugeBody::cube(2)).unwrap();
                    prop_assert_eq!(a.values, b.values);
                }
            }
        }
    }
}
