//! Slow independent references: exhaustive coefficient-box scans, the
//! one-dimensional continued-fraction best approximation, and a seeded
//! instance generator.
//!
//! Nothing here calls the enumeration kernel or the reduction code.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exactnum::rational::{ceil_int, round_int};
use crate::exactnum::{GaugeValue, IntervalValue, Rational};
use crate::geometry::{BodySpec, GaugeBody};
use crate::lattice::Lattice;
use crate::periodic::{validate, MinimaKind, MinimaResult, PeriodicInstance, PeriodicPoint};

/// Identifies the generator: ChaCha8 seeded by `seed_from_u64`, draws as
/// documented on [`random_instance`].
pub const GENERATOR: &str = "chacha8-v1";

fn gauge(spec: &BodySpec, x: &[Rational]) -> GaugeValue {
    let mut acc = Rational::zero();
    match spec {
        BodySpec::Cube { diag } => {
            for (i, v) in x.iter().enumerate() {
                let t = match diag {
                    Some(d) => v.abs() / &d[i],
                    None => v.abs(),
                };
                if t > acc {
                    acc = t;
                }
            }
            GaugeValue::Plain(acc)
        }
        BodySpec::Ball { diag } => {
            for (i, v) in x.iter().enumerate() {
                let t = match diag {
                    Some(d) => v / &d[i],
                    None => v.clone(),
                };
                acc += &t * &t;
            }
            GaugeValue::sqrt_of(acc)
        }
        BodySpec::Cross { scales } => {
            for (v, s) in x.iter().zip(scales) {
                acc += v.abs() / s;
            }
            GaugeValue::Plain(acc)
        }
        BodySpec::HPoly { rows } => {
            for a in rows {
                let t: Rational = a.iter().zip(x).map(|(p, q)| p * q).sum::<Rational>().abs();
                if t > acc {
                    acc = t;
                }
            }
            GaugeValue::Plain(acc)
        }
    }
}

/// Rank by fraction-exact Gaussian elimination.
fn rank(vs: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = vs.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            let f = &m[i][c] / &m[r][c];
            for k in c..cols {
                let t = &f * &m[r][k];
                m[i][k] -= t;
            }
        }
        r += 1;
    }
    r
}

fn pick(sorted: &[PeriodicPoint], lifted: bool, target: usize) -> Vec<PeriodicPoint> {
    let mut chosen: Vec<PeriodicPoint> = Vec::new();
    let mut vecs: Vec<Vec<Rational>> = Vec::new();
    for p in sorted {
        if chosen.len() == target {
            break;
        }
        let v: Vec<Rational> = if lifted {
            std::iter::once(Rational::from_integer(p.q.into())).chain(p.x.iter().cloned()).collect()
        } else {
            p.x.clone()
        };
        if v.iter().all(|c| c.is_zero()) {
            continue;
        }
        vecs.push(v);
        if rank(&vecs) == vecs.len() {
            chosen.push(p.clone());
        } else {
            vecs.pop();
        }
    }
    chosen
}

fn upper_sqrt(s: &Rational) -> Rational {
    IntervalValue::sqrt(s, 32).hi
}

/// Smallest box radius that provably contains every `(q, b)` with gauge at
/// most `bound`: `|b_i| ≤ ‖row_i B⁻¹‖·(bound·R_K + ‖qα‖)`.
pub fn box_radius_for(inst: &PeriodicInstance, body: &GaugeBody, bound: &GaugeValue) -> i64 {
    let inv_rows = inst.lattice().dual().basis().to_vec();
    let r_k = upper_sqrt(&body.outer_radius().square());
    let b = upper_sqrt(&bound.square());
    let qa = Rational::from_integer(inst.q_max().into()) * upper_sqrt(&inst.alpha().iter().map(|a| a * a).sum());
    let reach = b * r_k + qa;
    inv_rows
        .iter()
        .map(|row| {
            let len = upper_sqrt(&row.iter().map(|a| a * a).sum());
            ceil_int(&(len * &reach)).to_i64().expect("box radius fits in i64")
        })
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Exhaustive scan over `q ∈ 0..Q`, `b ∈ [−r, r]ⁿ`; returns the periodic
/// and the lifted minima.
///
/// Fails with `BoxTooSmall` unless the box provably holds every point up to
/// the largest value found.
pub fn brute_force_minima(inst: &PeriodicInstance, body: &GaugeBody, r: i64) -> Result<(MinimaResult, MinimaResult)> {
    let n = inst.dim();
    check_dim(n, body.dim())?;
    if n > 3 || r < 1 {
        return Err(Error::Precondition("brute force needs n ≤ 3 and r ≥ 1".into()));
    }
    let spec = body.spec();
    let basis = inst.lattice().basis();
    let mut pts = Vec::new();
    let mut b = vec![-r; n];
    loop {
        let mut lat_pt = vec![Rational::zero(); n];
        for (col, &c) in basis.iter().zip(&b) {
            for (v, e) in lat_pt.iter_mut().zip(col) {
                *v += e * Rational::from_integer(c.into());
            }
        }
        for q in 0..=inst.q_max() {
            let qr = Rational::from_integer(q.into());
            let x: Vec<Rational> = lat_pt.iter().zip(inst.alpha()).map(|(v, a)| v + &qr * a).collect();
            let value = gauge(&spec, &x);
            pts.push(PeriodicPoint { q, b: b.clone(), x, value });
        }
        let Some(i) = (0..n).find(|&i| b[i] < r) else { break };
        b[i] += 1;
        b[..i].iter_mut().for_each(|c| *c = -r);
    }
    pts.sort_by(|a, b| a.value.cmp(&b.value).then(a.q.cmp(&b.q)).then_with(|| a.b.cmp(&b.b)));
    let periodic = pick(&pts, false, n);
    let tilde = pick(&pts, true, n + 1);
    let too_small = |given: i64| Error::BoxTooSmall { given, required: given + 1 };
    if periodic.len() < n || tilde.len() < n {
        return Err(too_small(r));
    }
    let top = periodic.iter().chain(&tilde).map(|p| p.value.clone()).max().expect("nonempty");
    let required = box_radius_for(inst, body, &top);
    if required > r {
        return Err(Error::BoxTooSmall { given: r, required });
    }
    let unattainable = tilde.len() == n;
    let wrap = |kind, chosen: Vec<PeriodicPoint>, unattainable| MinimaResult {
        kind,
        values: chosen.iter().map(|p| p.value.clone()).collect(),
        attaining: chosen,
        unattainable,
    };
    Ok((wrap(MinimaKind::Periodic, periodic, false), wrap(MinimaKind::Tilde, tilde, unattainable)))
}

/// Brute force with the box radius grown until it certifies itself.
pub fn brute_force_minima_auto(inst: &PeriodicInstance, body: &GaugeBody) -> Result<(MinimaResult, MinimaResult)> {
    let mut r = 1;
    loop {
        match brute_force_minima(inst, body, r) {
            Err(Error::BoxTooSmall { required, .. }) => r = required,
            other => return other,
        }
    }
}

/// `min |u*·α + z| > 0` over the dual pairs with `‖(u*, z)‖² ≤ radius_sq`,
/// scanning `w = Bᵀu*` over a box; returns the value and the pair
/// `(w, z)` with the smallest norm, sign-normalized, lexicographically first.
pub fn brute_force_gamma(inst: &PeriodicInstance, radius_sq: &Rational) -> Option<(Rational, Vec<i64>, i64)> {
    let n = inst.dim();
    let lat = inst.lattice();
    let dual = lat.dual();
    let a = lat.coords(inst.alpha()).expect("dimensions match");
    let r = upper_sqrt(radius_sq);
    let bounds: Vec<i64> = lat
        .basis()
        .iter()
        .map(|b| ceil_int(&(upper_sqrt(&b.iter().map(|x| x * x).sum()) * &r)).to_i64().expect("fits"))
        .collect();
    let zb = ceil_int(&r).to_i64().expect("fits");
    let mut best: Option<(Rational, Rational, Vec<i64>)> = None;
    let mut w: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        let mut u = vec![Rational::zero(); n];
        for (d, &c) in dual.basis().iter().zip(&w) {
            for (x, e) in u.iter_mut().zip(d) {
                *x += e * Rational::from_integer(c.into());
            }
        }
        let un: Rational = u.iter().map(|x| x * x).sum();
        let t: Rational = w.iter().zip(&a).map(|(&c, ai)| ai * Rational::from_integer(c.into())).sum();
        for z in -zb..=zb {
            let norm = &un + Rational::from_integer((z * z).into());
            let value = (&t + Rational::from_integer(z.into())).abs();
            if norm > *radius_sq || value.is_zero() {
                continue;
            }
            let mut key: Vec<i64> = w.iter().copied().chain(std::iter::once(z)).collect();
            if key.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
                key.iter_mut().for_each(|c| *c = -*c);
            }
            let cand = (value, norm, key);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
        let Some(i) = (0..n).find(|&i| w[i] < bounds[i]) else { break };
        w[i] += 1;
        for j in 0..i {
            w[j] = -bounds[j];
        }
    }
    best.map(|(v, _, key)| (v, key[..n].to_vec(), key[n]))
}

/// `(p, q)` minimizing `|qα − p|` over `1 ≤ q ≤ Q`, smallest `q` on ties,
/// from the convergents and intermediate fractions of `α`.
pub fn cf_best_approx(alpha: &Rational, q_max: u64) -> Result<(BigInt, u64)> {
    if q_max == 0 {
        return Err(Error::Precondition("Q must be positive".into()));
    }
    let qm = BigInt::from(q_max);
    let mut cands: Vec<BigInt> = vec![BigInt::one()];
    // convergent denominators k_{-1} = 0, k_0 = 1
    let (mut k_prev, mut k) = (BigInt::zero(), BigInt::one());
    let mut x = alpha - Rational::from_integer(alpha.floor().to_integer());
    while !x.is_zero() {
        x = x.recip();
        let a = x.floor().to_integer();
        x -= Rational::from_integer(a.clone());
        // intermediate denominators j·k + k_prev for j = 1..a
        let mut j = BigInt::one();
        while j <= a {
            let d = &j * &k + &k_prev;
            if d > qm {
                break;
            }
            cands.push(d);
            j += 1;
        }
        let next = &a * &k + &k_prev;
        if next > qm {
            break;
        }
        k_prev = std::mem::replace(&mut k, next);
    }
    let mut best: Option<(Rational, BigInt, BigInt)> = None;
    for q in cands {
        let qa = alpha * Rational::from_integer(q.clone());
        let p = round_int(&qa);
        let res = (qa - Rational::from_integer(p.clone())).abs();
        let better = match &best {
            None => true,
            Some((r, bq, _)) => res < *r || (res == *r && q < *bq),
        };
        if better {
            best = Some((res, q, p));
        }
    }
    let (_, q, p) = best.expect("q = 1 is a candidate");
    Ok((p, q.to_u64().expect("q ≤ Q")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    #[serde(rename = "Q_max")]
    pub q_max: u64,
    pub denominator_bound: u64,
    pub basis_entry_bound: u64,
    pub seed: u64,
}

/// `D·U`: random positive diagonal `D`, then elementary row operations
/// `row_i ± row_j` kept only while every entry stays within `bound`.
pub fn random_basis(rng: &mut ChaCha8Rng, n: usize, bound: u64) -> Vec<Vec<Rational>> {
    let bound = bound.max(1) as i64;
    let mut m: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { rng.gen_range(1..=bound) } else { 0 }).collect())
        .collect();
    for _ in 0..3 * n {
        if n < 2 {
            break;
        }
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let row: Vec<i64> = m[i].iter().zip(&m[j]).map(|(a, b)| a + sign * b).collect();
        if row.iter().all(|v| v.abs() <= bound) {
            m[i] = row;
        }
    }
    // basis vectors are the columns
    (0..n).map(|j| (0..n).map(|i| Rational::from_integer(m[i][j].into())).collect()).collect()
}

/// Seeded instance: basis from [`random_basis`], `α_i = p/d` with
/// `d ∈ 1..=denominator_bound`, `p ∈ 0..d`, `Q ∈ 1..=Q_max`; resampled until
/// valid, at most 1000 times.
pub fn random_instance(spec: &RandomSpec) -> Result<PeriodicInstance> {
    if spec.n == 0 || spec.q_max == 0 || spec.denominator_bound == 0 || spec.basis_entry_bound == 0 {
        return Err(Error::Precondition("random spec bounds must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    const ATTEMPTS: u32 = 1000;
    for _ in 0..ATTEMPTS {
        let basis = random_basis(&mut rng, spec.n, spec.basis_entry_bound);
        let alpha: Vec<Rational> = (0..spec.n)
            .map(|_| {
                let d = rng.gen_range(1..=spec.denominator_bound) as i64;
                Rational::new(rng.gen_range(0..d).into(), d.into())
            })
            .collect();
        let q = rng.gen_range(1..=spec.q_max);
        let lat = Lattice::new(basis)?;
        if let Ok(inst) = validate(lat, alpha, q) {
            return Ok(inst);
        }
    }
    Err(Error::ResampleExhausted { attempts: ATTEMPTS })
}
