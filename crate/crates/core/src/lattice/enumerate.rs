use std::time::{Duration, Instant};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{check_dim, Error, Result};
use crate::exactnum::rational::{floor_int, isqrt_floor};
use crate::exactnum::{GaugeValue, Rational};
use crate::geometry::GaugeBody;
use crate::linalg;

use super::{Lattice, Reduced};

/// Default limit on visited enumeration nodes.
pub const DEFAULT_NODE_CAP: u64 = 100_000_000;

/// A lattice point found by enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct EnumPoint {
    /// Integer coordinates with respect to the lattice's own basis.
    pub coeffs: Vec<i64>,
    pub vector: Vec<Rational>,
    /// Gauge of `vector − center`.
    pub value: GaugeValue,
}

#[derive(Clone, Debug)]
pub struct EnumerationReport {
    pub points: Vec<EnumPoint>,
    pub count: usize,
    pub nodes_visited: u64,
    pub wall_time: Duration,
}

/// Rough Gaussian-heuristic count of Fincke–Pohst nodes for radius `rho`.
pub(crate) fn estimate_nodes(red: &Reduced, radius_sq: &Rational) -> f64 {
    let n = red.gso.bstar_sq.len();
    let rho = crate::exactnum::rational::to_f64(radius_sq).max(0.0).sqrt();
    let mut total = 0.0;
    let mut denom = 1.0;
    for k in 1..=n {
        let bs = crate::exactnum::rational::to_f64(&red.gso.bstar_sq[n - k]).sqrt();
        denom *= bs;
        let vk = std::f64::consts::PI.powf(k as f64 / 2.0) / gamma_half_plus_one(k);
        // at least one node per level
        total += (vk * rho.powi(k as i32) / denom).max(1.0);
    }
    total
}

fn gamma_half_plus_one(k: usize) -> f64 {
    // Γ(k/2 + 1)
    if k % 2 == 0 {
        (1..=k / 2).map(|i| i as f64).product()
    } else {
        let m = k / 2;
        let mut g = std::f64::consts::PI.sqrt() / 2.0;
        for i in 1..=m {
            g *= i as f64 + 0.5;
        }
        g
    }
}

/// Depth-first Fincke–Pohst search in the reduced basis for all `y ∈ ℤⁿ`
/// with `‖B'(y − y_c)‖² ≤ radius_sq`, with exact rational pruning.
pub(crate) fn fincke_pohst(
    red: &Reduced,
    center: &[Rational],
    radius_sq: &Rational,
    node_cap: u64,
    visit: &mut dyn FnMut(&[i64], &Rational),
) -> Result<u64> {
    let n = red.basis.len();
    let yc = linalg::mat_vec(&red.inv, center);
    let mut y = vec![0i64; n];
    let mut nodes = 0u64;
    if radius_sq.is_negative() {
        return Ok(0);
    }
    search(red, &yc, radius_sq, n, Rational::zero(), &mut y, &mut nodes, node_cap, visit)?;
    Ok(nodes)
}

#[allow(clippy::too_many_arguments)]
fn search(
    red: &Reduced,
    yc: &[Rational],
    radius_sq: &Rational,
    level: usize,
    partial: Rational,
    y: &mut [i64],
    nodes: &mut u64,
    node_cap: u64,
    visit: &mut dyn FnMut(&[i64], &Rational),
) -> Result<()> {
    if level == 0 {
        visit(y, &partial);
        return Ok(());
    }
    let i = level - 1;
    let n = y.len();
    let mut c = yc[i].clone();
    for j in level..n {
        c -= &red.gso.mu[j][i] * (Rational::from_integer(y[j].into()) - &yc[j]);
    }
    let rem = (radius_sq - &partial) / &red.gso.bstar_sq[i];
    if rem.is_negative() {
        return Ok(());
    }
    let u: num_bigint::BigInt = isqrt_floor(&rem) + 1;
    let base: num_bigint::BigInt = floor_int(&c);
    let lo = (&base - &u).to_i64().expect("coefficient range fits in i64");
    let hi = (&base + &u + num_bigint::BigInt::one()).to_i64().expect("coefficient range fits in i64");
    for yi in lo..=hi {
        let d = Rational::from_integer(yi.into()) - &c;
        let d2 = &d * &d;
        if d2 > rem {
            continue;
        }
        *nodes += 1;
        if *nodes > node_cap {
            return Err(Error::CapExceeded { estimate: *nodes as f64, cap: node_cap });
        }
        y[i] = yi;
        let next = &partial + &red.gso.bstar_sq[i] * d2;
        search(red, yc, radius_sq, level - 1, next, y, nodes, node_cap, visit)?;
    }
    y[i] = 0;
    Ok(())
}

/// All `v ∈ Λ` with `|v − center|_K ≤ bound`, sorted by gauge value and then
/// lexicographically by basis coefficients.
///
/// The Euclidean pre-ball uses `‖x‖ ≤ |x|_K·R_K`; every candidate is then
/// filtered with the exact gauge.
pub fn enumerate_in_norm_ball(
    lat: &Lattice,
    center: &[Rational],
    body: &GaugeBody,
    bound: &GaugeValue,
    node_cap: u64,
) -> Result<EnumerationReport> {
    check_dim(lat.dim(), center.len())?;
    check_dim(lat.dim(), body.dim())?;
    let start = Instant::now();
    let red = lat.reduced();
    let radius_sq = bound.square() * body.outer_radius().square();
    let estimate = estimate_nodes(red, &radius_sq);
    if estimate > node_cap as f64 {
        return Err(Error::CapExceeded { estimate, cap: node_cap });
    }
    let mut points = Vec::new();
    let nodes = fincke_pohst(red, center, &radius_sq, node_cap, &mut |y, _| {
        let vector = red.vector(y);
        let diff = linalg::sub(&vector, center);
        let value = body.gauge_unchecked(&diff);
        if &value <= bound {
            points.push(EnumPoint { coeffs: red.original_coeffs(y), vector, value });
        }
    })?;
    points.sort_by(|a, b| a.value.cmp(&b.value).then_with(|| a.coeffs.cmp(&b.coeffs)));
    Ok(EnumerationReport {
        count: points.len(),
        points,
        nodes_visited: nodes,
        wall_time: start.elapsed(),
    })
}
