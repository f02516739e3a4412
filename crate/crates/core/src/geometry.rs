//! 0-symmetric convex bodies given by exact gauge functions.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exactnum::rational::{serde_rational_mat, serde_rational_vec};
use crate::exactnum::{ball_volume, int, rat, GaugeValue, IntervalValue, Quantity, Rational};
use crate::linalg::{self, Matrix};

/// JSON description of a body; the dimension comes from the instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    Cube {
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_vec")]
        diag: Option<Vec<Rational>>,
    },
    Ball {
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_vec")]
        diag: Option<Vec<Rational>>,
    },
    Cross {
        #[serde(with = "serde_rational_vec")]
        scales: Vec<Rational>,
    },
    #[serde(rename = "hpoly")]
    HPoly {
        #[serde(with = "serde_rational_mat")]
        rows: Vec<Vec<Rational>>,
    },
}

mod opt_vec {
    use crate::exactnum::rational::parse_rational;
    use crate::exactnum::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(|r| r.to_string()).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
        Option::<Vec<String>>::deserialize(d)?
            .map(|v| v.iter().map(|s| parse_rational(s).map_err(D::Error::custom)).collect())
            .transpose()
    }
}

impl BodySpec {
    pub fn cube() -> Self {
        BodySpec::Cube { diag: None }
    }

    pub fn ball() -> Self {
        BodySpec::Ball { diag: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BodyKind {
    /// `D·[-1,1]ⁿ` for a positive diagonal `D` (identity when absent).
    Cube { diag: Option<Vec<Rational>> },
    /// `D·Bⁿ`.
    Ball { diag: Option<Vec<Rational>> },
    /// `conv{±s_i e_i}`.
    Cross { scales: Vec<Rational> },
    /// `{x : |a_j·x| ≤ 1 for all j}`.
    HPoly { rows: Vec<Vec<Rational>> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeBody {
    dim: usize,
    kind: BodyKind,
}

/// Tabulated packing constants of a body, with their provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct KnownConstants {
    /// Density `δ(K)` of a densest translative packing.
    pub delta: Option<Quantity>,
    /// Critical determinant `Δ(K)`.
    pub crit_det: Option<Quantity>,
    pub source: &'static str,
}

fn check_positive(v: &[Rational], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_positive()) {
        Ok(())
    } else {
        Err(Error::InvalidBody(format!("{what} must be positive")))
    }
}

fn diag_or_ones(diag: &Option<Vec<Rational>>, n: usize) -> Vec<Rational> {
    diag.clone().unwrap_or_else(|| vec![Rational::one(); n])
}

impl GaugeBody {
    pub fn from_spec(spec: &BodySpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidBody("dimension must be positive".into()));
        }
        let kind = match spec {
            BodySpec::Cube { diag } | BodySpec::Ball { diag } => {
                if let Some(d) = diag {
                    check_dim(n, d.len())?;
                    check_positive(d, "diagonal scaling")?;
                }
                let diag = diag.clone().filter(|d| d.iter().any(|x| !x.is_one()));
                if matches!(spec, BodySpec::Cube { .. }) {
                    BodyKind::Cube { diag }
                } else {
                    BodyKind::Ball { diag }
                }
            }
            BodySpec::Cross { scales } => {
                check_dim(n, scales.len())?;
                check_positive(scales, "cross-polytope scales")?;
                BodyKind::Cross { scales: scales.clone() }
            }
            BodySpec::HPoly { rows } => {
                if rows.is_empty() {
                    return Err(Error::InvalidBody("hpoly needs at least one row".into()));
                }
                for r in rows {
                    check_dim(n, r.len())?;
                }
                if linalg::rank(rows) < n {
                    return Err(Error::InvalidBody(
                        "hpoly rows do not span the space (body is unbounded)".into(),
                    ));
                }
                BodyKind::HPoly { rows: rows.clone() }
            }
        };
        Ok(GaugeBody { dim: n, kind })
    }

    pub fn cube(n: usize) -> Self {
        GaugeBody { dim: n, kind: BodyKind::Cube { diag: None } }
    }

    pub fn ball(n: usize) -> Self {
        GaugeBody { dim: n, kind: BodyKind::Ball { diag: None } }
    }

    pub fn cross(scales: Vec<Rational>) -> Result<Self> {
        let n = scales.len();
        Self::from_spec(&BodySpec::Cross { scales }, n)
    }

    pub fn hpoly(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        Self::from_spec(&BodySpec::HPoly { rows }, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.kind, BodyKind::Ball { diag: None })
    }

    pub fn spec(&self) -> BodySpec {
        match &self.kind {
            BodyKind::Cube { diag } => BodySpec::Cube { diag: diag.clone() },
            BodyKind::Ball { diag } => BodySpec::Ball { diag: diag.clone() },
            BodyKind::Cross { scales } => BodySpec::Cross { scales: scales.clone() },
            BodyKind::HPoly { rows } => BodySpec::HPoly { rows: rows.clone() },
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            BodyKind::Cube { .. } => format!("cube{}", self.dim),
            BodyKind::Ball { .. } => format!("ball{}", self.dim),
            BodyKind::Cross { .. } => format!("cross{}", self.dim),
            BodyKind::HPoly { rows } => format!("hpoly{}x{}", rows.len(), self.dim),
        }
    }

    /// The dilate `t·K` for rational `t > 0`.
    pub fn scaled(&self, t: &Rational) -> GaugeBody {
        assert!(t.is_positive(), "scaling factor must be positive");
        let n = self.dim;
        let kind = match &self.kind {
            BodyKind::Cube { diag } => BodyKind::Cube {
                diag: Some(linalg::scale(&diag_or_ones(diag, n), t)),
            },
            BodyKind::Ball { diag } => BodyKind::Ball {
                diag: Some(linalg::scale(&diag_or_ones(diag, n), t)),
            },
            BodyKind::Cross { scales } => BodyKind::Cross { scales: linalg::scale(scales, t) },
            BodyKind::HPoly { rows } => BodyKind::HPoly {
                rows: rows.iter().map(|r| linalg::scale(r, &t.recip())).collect(),
            },
        };
        GaugeBody { dim: n, kind }
    }

    /// `|x|_K = min{λ ≥ 0 : x ∈ λK}`.
    pub fn gauge(&self, x: &[Rational]) -> Result<GaugeValue> {
        check_dim(self.dim, x.len())?;
        Ok(self.gauge_unchecked(x))
    }

    pub(crate) fn gauge_unchecked(&self, x: &[Rational]) -> GaugeValue {
        match &self.kind {
            BodyKind::Cube { diag: None } => {
                GaugeValue::Plain(x.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero))
            }
            BodyKind::Cube { diag: Some(d) } => GaugeValue::Plain(
                x.iter()
                    .zip(d)
                    .map(|(v, s)| v.abs() / s)
                    .max()
                    .unwrap_or_else(Rational::zero),
            ),
            BodyKind::Ball { diag: None } => GaugeValue::sqrt_of(linalg::norm_sq(x)),
            BodyKind::Ball { diag: Some(d) } => GaugeValue::sqrt_of(
                x.iter()
                    .zip(d)
                    .fold(Rational::zero(), |acc, (v, s)| acc + (v / s) * (v / s)),
            ),
            BodyKind::Cross { scales } => GaugeValue::Plain(
                x.iter()
                    .zip(scales)
                    .fold(Rational::zero(), |acc, (v, s)| acc + v.abs() / s),
            ),
            BodyKind::HPoly { rows } => GaugeValue::Plain(
                rows.iter()
                    .map(|a| linalg::dot(a, x).abs())
                    .max()
                    .unwrap_or_else(Rational::zero),
            ),
        }
    }

    /// Exact volume where a closed form or exact triangulation exists;
    /// for polytopes in dimension ≥ 4 a sampled, uncertified enclosure.
    pub fn volume(&self) -> Quantity {
        let n = self.dim;
        let det_diag = |d: &Option<Vec<Rational>>| {
            d.as_ref()
                .map(|d| d.iter().fold(Rational::one(), |acc, x| acc * x))
                .unwrap_or_else(Rational::one)
        };
        match &self.kind {
            BodyKind::Cube { diag } => {
                Quantity::rational(Rational::from_integer(num_bigint::BigInt::one() << n) * det_diag(diag))
            }
            BodyKind::Ball { diag } => ball_volume(n).scale(&det_diag(diag)),
            BodyKind::Cross { scales } => {
                let fact = (1..=n as i64).fold(int(1), |acc, i| acc * int(i));
                let prod = scales.iter().fold(Rational::one(), |acc, x| acc * x);
                Quantity::rational(prod * Rational::from_integer(num_bigint::BigInt::one() << n) / fact)
            }
            BodyKind::HPoly { rows } => {
                if n <= 3 {
                    Quantity::rational(polytope_volume(rows, n))
                } else {
                    monte_carlo_volume(self)
                }
            }
        }
    }

    /// Smallest known `R` with `K ⊆ R·Bⁿ`.
    pub fn outer_radius(&self) -> GaugeValue {
        let n = self.dim;
        match &self.kind {
            BodyKind::Cube { diag } => {
                GaugeValue::sqrt_of(linalg::norm_sq(&diag_or_ones(diag, n)))
            }
            BodyKind::Ball { diag } => {
                GaugeValue::Plain(diag_or_ones(diag, n).into_iter().max().unwrap())
            }
            BodyKind::Cross { scales } => GaugeValue::Plain(scales.iter().max().unwrap().clone()),
            BodyKind::HPoly { rows } => {
                if n <= 3 {
                    let r2 = polytope_vertices(rows, n)
                        .iter()
                        .map(|v| linalg::norm_sq(v))
                        .max()
                        .unwrap_or_else(Rational::zero);
                    GaugeValue::sqrt_of(r2)
                } else {
                    // K ⊆ A⁻¹[-1,1]ⁿ for any n independent rows A, so
                    // ‖x‖² ≤ n·‖A⁻¹‖_F²
                    let a = independent_rows(rows, n);
                    let inv = linalg::inverse(&a).expect("rows are independent");
                    let frob = inv.iter().flatten().fold(Rational::zero(), |acc, x| acc + x * x);
                    GaugeValue::sqrt_of(frob * int(n as i64))
                }
            }
        }
    }

    /// Largest known `r` with `r·Bⁿ ⊆ K`.
    pub fn inner_radius(&self) -> GaugeValue {
        let n = self.dim;
        match &self.kind {
            BodyKind::Cube { diag } | BodyKind::Ball { diag } => {
                GaugeValue::Plain(diag_or_ones(diag, n).into_iter().min().unwrap())
            }
            BodyKind::Cross { scales } => {
                let s = scales.iter().fold(Rational::zero(), |acc, x| acc + (x * x).recip());
                GaugeValue::sqrt_of(s.recip())
            }
            BodyKind::HPoly { rows } => {
                let m = rows.iter().map(|a| linalg::norm_sq(a)).max().unwrap();
                GaugeValue::sqrt_of(m.recip())
            }
        }
    }

    /// Looks up `δ(K)` and `Δ(K)`. Diagonal images inherit `δ` and scale
    /// `Δ` by the determinant of the diagonal.
    pub fn known_constants(&self) -> KnownConstants {
        let n = self.dim;
        let none = KnownConstants { delta: None, crit_det: None, source: "no tabulated value" };
        let prod = |v: &[Rational]| v.iter().fold(Rational::one(), |acc, x| acc * x);
        match &self.kind {
            BodyKind::Cube { diag } => {
                let d = prod(&diag_or_ones(diag, n));
                KnownConstants {
                    delta: Some(Quantity::one()),
                    crit_det: (n == 2).then(|| Quantity::rational(d)),
                    source: "cubes tile space; Δ([-1,1]²) = 1",
                }
            }
            BodyKind::Ball { diag } => {
                let d = prod(&diag_or_ones(diag, n));
                match n {
                    1 => KnownConstants {
                        delta: Some(Quantity::one()),
                        crit_det: None,
                        source: "segments tile the line",
                    },
                    2 => KnownConstants {
                        // π/√12 and √3/2 (hexagonal lattice)
                        delta: Some(Quantity::with_pi(GaugeValue::sqrt_of(rat(1, 12)), 1)),
                        crit_det: Some(Quantity::gauge(GaugeValue::sqrt_of(rat(3, 4)).scale(&d))),
                        source: "Thue/Lagrange: δ(B²) = π/√12, Δ(B²) = √3/2",
                    },
                    3 => KnownConstants {
                        delta: Some(Quantity::with_pi(GaugeValue::sqrt_of(rat(1, 18)), 1)),
                        crit_det: None,
                        source: "Kepler conjecture (Hales): δ(B³) = π/√18",
                    },
                    _ => none,
                }
            }
            BodyKind::Cross { scales } if n == 2 => KnownConstants {
                // the planar cross-polytope is a square, which tiles
                delta: Some(Quantity::one()),
                crit_det: Some(Quantity::rational(prod(scales) / int(2))),
                source: "planar cross-polytope is a square: δ = 1, Δ(unit) = 1/2",
            },
            _ => none,
        }
    }
}

fn independent_rows(rows: &[Vec<Rational>], n: usize) -> Matrix {
    let mut t = linalg::IndependenceTracker::new();
    let mut out = Vec::new();
    for r in rows {
        if t.try_add(r) {
            out.push(r.clone());
            if out.len() == n {
                break;
            }
        }
    }
    out
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of `{x : |a_j·x| ≤ 1}` by solving every `n`-subset of tight
/// constraints with every sign pattern.
pub fn polytope_vertices(rows: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    let mut verts: Vec<Vec<Rational>> = Vec::new();
    for subset in combinations(rows.len(), n) {
        let a: Matrix = subset.iter().map(|&i| rows[i].clone()).collect();
        let Some(inv) = linalg::inverse(&a) else { continue };
        for signs in 0..(1u32 << n) {
            let rhs: Vec<Rational> = (0..n)
                .map(|i| if signs >> i & 1 == 1 { -Rational::one() } else { Rational::one() })
                .collect();
            let x = linalg::mat_vec(&inv, &rhs);
            let feasible = rows.iter().all(|r| linalg::dot(r, &x).abs() <= Rational::one());
            if feasible && !verts.contains(&x) {
                verts.push(x);
            }
        }
    }
    verts.sort();
    verts
}

fn half_plane(p: &[Rational]) -> bool {
    p[1].is_positive() || (p[1].is_zero() && p[0].is_positive())
}

fn cross2(a: &[Rational], b: &[Rational]) -> Rational {
    &a[0] * &b[1] - &a[1] * &b[0]
}

/// Sorts planar points counter-clockwise around `c`.
fn sort_ccw(points: &mut [Vec<Rational>], c: &[Rational]) {
    points.sort_by(|p, q| {
        let u = linalg::sub(p, c);
        let v = linalg::sub(q, c);
        match (half_plane(&u), half_plane(&v)) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => cross2(&v, &u).cmp(&Rational::zero()),
        }
    });
}

fn centroid(points: &[Vec<Rational>]) -> Vec<Rational> {
    let k = int(points.len() as i64);
    let n = points[0].len();
    (0..n)
        .map(|i| points.iter().fold(Rational::zero(), |acc, p| acc + &p[i]) / &k)
        .collect()
}

/// Exact volume of `{x : |a_j·x| ≤ 1}` for `n ≤ 3`.
pub fn polytope_volume(rows: &[Vec<Rational>], n: usize) -> Rational {
    let verts = polytope_vertices(rows, n);
    match n {
        1 => verts.iter().map(|v| v[0].abs()).max().unwrap() * int(2),
        2 => {
            let mut pts = verts;
            let c = vec![Rational::zero(), Rational::zero()];
            sort_ccw(&mut pts, &c);
            let k = pts.len();
            let twice = (0..k).fold(Rational::zero(), |acc, i| acc + cross2(&pts[i], &pts[(i + 1) % k]));
            twice.abs() / int(2)
        }
        3 => {
            let mut seen: Vec<Vec<usize>> = Vec::new();
            let mut vol = Rational::zero();
            for a in rows {
                for sign in [Rational::one(), -Rational::one()] {
                    let idx: Vec<usize> = (0..verts.len())
                        .filter(|&i| linalg::dot(a, &verts[i]) == sign)
                        .collect();
                    if idx.len() < 3 || seen.contains(&idx) {
                        continue;
                    }
                    seen.push(idx.clone());
                    // project away the coordinate where the normal is largest
                    let drop = (0..3).max_by(|&i, &j| a[i].abs().cmp(&a[j].abs())).unwrap();
                    let keep: Vec<usize> = (0..3).filter(|&i| i != drop).collect();
                    let mut face: Vec<(Vec<Rational>, usize)> = idx
                        .iter()
                        .map(|&i| (keep.iter().map(|&k| verts[i][k].clone()).collect(), i))
                        .collect();
                    let proj: Vec<Vec<Rational>> = face.iter().map(|f| f.0.clone()).collect();
                    let c = centroid(&proj);
                    let mut order: Vec<Vec<Rational>> = proj.clone();
                    sort_ccw(&mut order, &c);
                    face.sort_by_key(|f| order.iter().position(|p| *p == f.0).unwrap());
                    let p0 = &verts[face[0].1];
                    for w in face[1..].windows(2) {
                        let m: Matrix = vec![p0.clone(), verts[w[0].1].clone(), verts[w[1].1].clone()];
                        vol += linalg::det(&m).abs() / int(6);
                    }
                }
            }
            vol
        }
        _ => unreachable!("exact polytope volume only for n ≤ 3"),
    }
}

const MC_SAMPLES: u32 = 40_000;

/// Hoeffding enclosure of the volume from uniform samples in a bounding box,
/// failure probability 10⁻⁹. Deterministic (fixed seed), not certified.
fn monte_carlo_volume(body: &GaugeBody) -> Quantity {
    let n = body.dim;
    let r = body.outer_radius().to_interval(32).hi;
    let r = crate::exactnum::rational::ceil_int(&r);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0b0d);
    let denom: i64 = 1 << 20;
    let mut inside = 0u32;
    for _ in 0..MC_SAMPLES {
        let x: Vec<Rational> = (0..n)
            .map(|_| {
                let t = rng.gen_range(-denom..=denom);
                Rational::new(num_bigint::BigInt::from(t) * &r, denom.into())
            })
            .collect();
        if body.gauge_unchecked(&x) <= GaugeValue::Plain(Rational::one()) {
            inside += 1;
        }
    }
    let box_vol = Rational::from_integer(num_traits::pow(r * 2, n));
    let frac = rat(inside as i64, MC_SAMPLES as i64);
    let eps = (((2.0f64 / 1e-9).ln()) / (2.0 * MC_SAMPLES as f64)).sqrt();
    let eps = Rational::new(((eps * 1e9).ceil() as i64).into(), 1_000_000_000i64.into());
    let lo = (&frac - &eps).max(Rational::zero());
    let hi = (&frac + &eps).min(Rational::one());
    Quantity::Estimate {
        enclosure: IntervalValue::new(lo * &box_vol, hi * &box_vol),
        certified: false,
    }
}
