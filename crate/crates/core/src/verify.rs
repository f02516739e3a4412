//! Checks every successive-minima inequality on a concrete instance, with
//! exact verdicts where both sides share a power of π and outward-rounded
//! enclosures otherwise.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exactnum::rational::serde_rational_vec;
use crate::exactnum::{
    ball_volume, interval_cmp, GaugeValue, IntervalValue, IntervalVerdict, Quantity, Rational,
    DEFAULT_PRECISION_BITS,
};
use crate::geometry::{BodySpec, GaugeBody};
use crate::lattice::Lattice;
use crate::linalg;
use crate::periodic::{
    beta, enumerate_periodic, gamma_with_mode, minima_pair, successive_minima, validate, GammaMode,
    GammaResult, GammaStatus, InstanceSpec, MinimaResult, PeriodicInstance, PeriodicPoint,
};

const RETRY_PRECISION_BITS: u32 = 512;
const TIE_COMBINATION_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    ThmI,
    ThmIiUpper,
    ThmIiLower,
    PropI,
    PropIi,
    CorollaryB3,
    #[serde(rename = "jk_1_1_lower")]
    Jk11Lower,
    #[serde(rename = "jk_1_1_upper")]
    Jk11Upper,
    #[serde(rename = "kratz_1_2_lower")]
    Kratz12Lower,
    #[serde(rename = "kratz_1_2_upper")]
    Kratz12Upper,
    #[serde(rename = "kratz_1_3")]
    Kratz13,
    #[serde(rename = "minkowski_1_4_lower")]
    Minkowski14Lower,
    #[serde(rename = "minkowski_1_4_upper")]
    Minkowski14Upper,
    #[serde(rename = "minkowski_1_5")]
    Minkowski15,
    #[serde(rename = "minkowski_1_6")]
    Minkowski16,
}

impl CheckId {
    pub const ALL: [CheckId; 15] = [
        CheckId::ThmI,
        CheckId::ThmIiUpper,
        CheckId::ThmIiLower,
        CheckId::PropI,
        CheckId::PropIi,
        CheckId::CorollaryB3,
        CheckId::Jk11Lower,
        CheckId::Jk11Upper,
        CheckId::Kratz12Lower,
        CheckId::Kratz12Upper,
        CheckId::Kratz13,
        CheckId::Minkowski14Lower,
        CheckId::Minkowski14Upper,
        CheckId::Minkowski15,
        CheckId::Minkowski16,
    ];

    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
    Skipped { reason: String },
    /// One side is an uncertified estimate or an unknown constant was
    /// replaced by a bound.
    Advisory { holds: bool },
}

/// One inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub check_id: CheckId,
    pub lhs_exact: Option<Quantity>,
    pub rhs_exact: Option<Quantity>,
    pub lhs: Option<IntervalValue>,
    pub rhs: Option<IntervalValue>,
    pub verdict: Verdict,
    /// Exact equality `lhs = rhs`.
    pub equality: bool,
    pub slack_ratio: Option<IntervalValue>,
    pub precision_bits: u32,
    pub inputs_digest: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, serde_json::Value>,
}

impl InequalityReport {
    fn skipped(id: CheckId, digest: &str, reason: impl Into<String>) -> Self {
        InequalityReport {
            check_id: id,
            lhs_exact: None,
            rhs_exact: None,
            lhs: None,
            rhs: None,
            verdict: Verdict::Skipped { reason: reason.into() },
            equality: false,
            slack_ratio: None,
            precision_bits: 0,
            inputs_digest: digest.to_owned(),
            extras: BTreeMap::new(),
        }
    }

    fn with_extra(mut self, key: &str, v: serde_json::Value) -> Self {
        self.extras.insert(key.to_owned(), v);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub precision_bits: u32,
    pub gamma_mode: GammaMode,
    pub with_gamma: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { precision_bits: DEFAULT_PRECISION_BITS, gamma_mode: GammaMode::Statement, with_gamma: true }
    }
}

/// sha256 of the canonical JSON of instance and body.
pub fn inputs_digest(inst: &PeriodicInstance, body: &GaugeBody) -> String {
    let canon = serde_json::to_string(&(inst.spec(), body.spec())).expect("specs serialize");
    format!("{:x}", Sha256::digest(canon.as_bytes()))
}

/// Decides `lhs ≤ rhs`: exactly when possible, else by enclosures at the
/// requested precision and once more at 512 bits.
pub fn compare(id: CheckId, lhs: Quantity, rhs: Quantity, precision_bits: u32, digest: &str) -> InequalityReport {
    let certified = lhs.is_certified() && rhs.is_certified();
    let mut bits = precision_bits;
    let mut equality = false;
    let verdict = match lhs.exact_cmp(&rhs) {
        Some(ord) => {
            equality = ord.is_eq();
            if ord.is_le() {
                Verdict::Holds
            } else {
                Verdict::Violated
            }
        }
        None => {
            let mut v = Verdict::Inconclusive;
            for b in [precision_bits, RETRY_PRECISION_BITS.max(precision_bits)] {
                bits = b;
                match interval_cmp(&lhs.enclosure(b), &rhs.enclosure(b)) {
                    IntervalVerdict::DefinitelyLe => v = Verdict::Holds,
                    IntervalVerdict::DefinitelyGt => v = Verdict::Violated,
                    IntervalVerdict::Inconclusive => continue,
                }
                break;
            }
            v
        }
    };
    let verdict = match verdict {
        Verdict::Holds | Verdict::Violated if !certified => Verdict::Advisory { holds: verdict == Verdict::Holds },
        v => v,
    };
    let l = lhs.enclosure(bits);
    let r = rhs.enclosure(bits);
    let slack_ratio = match (lhs.exact_cmp(&rhs), &lhs, &rhs) {
        (Some(_), Quantity::Exact { coeff: a, .. }, Quantity::Exact { coeff: b, .. }) if !b.is_zero() => {
            Some(a.div(b).to_interval(bits))
        }
        _ => l.div(&r),
    };
    InequalityReport {
        check_id: id,
        lhs_exact: Some(lhs),
        rhs_exact: Some(rhs),
        lhs: Some(l),
        rhs: Some(r),
        verdict,
        equality,
        slack_ratio,
        precision_bits: bits,
        inputs_digest: digest.to_owned(),
        extras: BTreeMap::new(),
    }
}

fn q(r: Rational) -> Quantity {
    Quantity::rational(r)
}

fn int(n: u64) -> Rational {
    Rational::from_integer(n.into())
}

fn factorial(n: usize) -> Rational {
    (1..=n as u64).map(int).product()
}

fn gauge_product(vs: &[GaugeValue]) -> Quantity {
    Quantity::gauge(GaugeValue::product(vs))
}

/// Everything the checks share for one `(instance, body)` pair.
#[derive(Clone, Debug)]
pub struct Context<'a> {
    pub inst: &'a PeriodicInstance,
    pub body: &'a GaugeBody,
    pub opts: VerifyOptions,
    pub digest: String,
    pub minima: MinimaResult,
    pub tilde: MinimaResult,
    pub gamma: Option<GammaResult>,
    /// `λ_i(Λ, K)` from the `Q = 0` instance.
    pub classical: MinimaResult,
}

impl<'a> Context<'a> {
    pub fn new(inst: &'a PeriodicInstance, body: &'a GaugeBody, opts: VerifyOptions) -> Result<Self> {
        crate::error::check_dim(inst.dim(), body.dim())?;
        let (minima, tilde) = minima_pair(inst, body)?;
        let gamma = if opts.with_gamma { Some(gamma_with_mode(inst, &minima, opts.gamma_mode)?) } else { None };
        let q0 = PeriodicInstance::classical(inst.lattice().clone()).with_node_cap(inst.node_cap());
        let classical = successive_minima(&q0, body)?;
        Ok(Context { inst, body, opts, digest: inputs_digest(inst, body), minima, tilde, gamma, classical })
    }

    fn n(&self) -> usize {
        self.inst.dim()
    }

    fn det(&self) -> Rational {
        self.inst.lattice().det().clone()
    }

    /// `det Λ/(Q+1)`.
    fn covolume(&self) -> Rational {
        self.det() / int(self.inst.q_max() + 1)
    }

    fn two_n(&self) -> Rational {
        int(1u64 << self.n())
    }

    fn cmp(&self, id: CheckId, lhs: Quantity, rhs: Quantity) -> InequalityReport {
        compare(id, lhs, rhs, self.opts.precision_bits, &self.digest)
    }

    fn skip(&self, id: CheckId, reason: &str) -> InequalityReport {
        InequalityReport::skipped(id, &self.digest, reason)
    }
}

/// `λ₁ⁿ vol(K) ≤ δ(K) 2ⁿ det Λ/(Q+1)`.
pub fn check_thm_i(ctx: &Context) -> InequalityReport {
    let n = ctx.n();
    let lhs = Quantity::gauge(ctx.minima.values[0].pow(n as u32)).mul(&ctx.body.volume());
    let base = q(ctx.two_n() * ctx.covolume());
    match ctx.body.known_constants().delta {
        Some(delta) => ctx.cmp(CheckId::ThmI, lhs, delta.mul(&base)),
        None => {
            // δ(K) ≤ 1: a violation of the weakened bound is still a violation
            let mut r = ctx.cmp(CheckId::ThmI, lhs, base);
            if r.verdict == Verdict::Holds {
                r.verdict = Verdict::Advisory { holds: true };
            }
            r.with_extra("delta", json!("unknown; bounded by 1"))
        }
    }
}

/// `(2ⁿ/n!) det Λ γ ≤ λ₁⋯λₙ vol(K) ≤ 2ⁿ det Λ/(Q+1)`.
pub fn check_thm_ii(ctx: &Context) -> (InequalityReport, InequalityReport) {
    let n = ctx.n();
    let middle = gauge_product(&ctx.minima.values).mul(&ctx.body.volume());
    let upper = ctx.cmp(CheckId::ThmIiUpper, middle.clone(), q(ctx.two_n() * ctx.covolume()));
    let lower = match &ctx.gamma {
        None => ctx.skip(CheckId::ThmIiLower, "gamma not requested"),
        Some(g) => match (g.status, &g.value) {
            (GammaStatus::Exact, Some(v)) => {
                let lhs = q(ctx.two_n() / factorial(n) * ctx.det() * v);
                ctx.cmp(CheckId::ThmIiLower, lhs, middle).with_extra("gamma", json!(v.to_string()))
            }
            (GammaStatus::SkippedCapExceeded, _) => ctx.skip(CheckId::ThmIiLower, "gamma enumeration exceeds the node cap"),
            _ => ctx.skip(CheckId::ThmIiLower, "no positive |u*·α + z| inside the gamma ball"),
        },
    };
    (upper, lower)
}

/// Ball and planar refinements of the upper bound.
pub fn check_prop(ctx: &Context) -> Vec<InequalityReport> {
    let n = ctx.n();
    let prod = gauge_product(&ctx.minima.values);
    let consts = ctx.body.known_constants();
    let prop_i = if !ctx.body.is_ball() {
        ctx.skip(CheckId::PropI, "body is not the unit ball")
    } else {
        match consts.delta.clone() {
            Some(delta) => ctx.cmp(
                CheckId::PropI,
                prod.mul(&ctx.body.volume()),
                delta.mul(&q(ctx.two_n() * ctx.covolume())),
            ),
            None => ctx.skip(CheckId::PropI, "δ(Bⁿ) not tabulated for this n"),
        }
    };
    let prop_ii = match (n, consts.crit_det) {
        (2, Some(d)) => ctx.cmp(CheckId::PropIi, prod.mul(&d), q(ctx.covolume())),
        (2, None) => ctx.skip(CheckId::PropIi, "Δ(K) not tabulated"),
        _ => ctx.skip(CheckId::PropIi, "needs n = 2"),
    };
    let cor = if n == 3 && ctx.body.is_ball() {
        ctx.cmp(CheckId::CorollaryB3, prod, Quantity::gauge(GaugeValue::sqrt_of(int(2)).scale(&ctx.covolume())))
    } else {
        ctx.skip(CheckId::CorollaryB3, "needs n = 3 and the unit ball")
    };
    vec![prop_i, prop_ii, cor]
}

/// `max q_i/λ̃_i` for one attaining set.
fn max_ratio(points: &[PeriodicPoint]) -> GaugeValue {
    points.iter().map(|p| GaugeValue::Plain(int(p.q)).div(&p.value)).max().expect("nonempty")
}

/// Range of `max q_i/λ̃_i` over all attaining sets, when there are few.
fn tie_range(ctx: &Context) -> Result<Option<(GaugeValue, GaugeValue, usize)>> {
    let vals = &ctx.tilde.values;
    let top = vals.last().expect("nonempty");
    let pts = enumerate_periodic(ctx.inst, ctx.body, top)?;
    let cands: Vec<Vec<&PeriodicPoint>> =
        vals.iter().map(|v| pts.iter().filter(|p| &p.value == v && !p.is_origin()).collect()).collect();
    let total = cands.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
    match total {
        Some(t) if t <= TIE_COMBINATION_LIMIT => {}
        _ => return Ok(None),
    }
    let mut range: Option<(GaugeValue, GaugeValue)> = None;
    let mut idx = vec![0usize; cands.len()];
    let mut valid = 0;
    loop {
        let choice: Vec<PeriodicPoint> = idx.iter().zip(&cands).map(|(&i, c)| c[i].clone()).collect();
        let lifts: Vec<Vec<Rational>> = choice.iter().map(|p| p.lift()).collect();
        if linalg::rank(&lifts) == lifts.len() {
            valid += 1;
            let m = max_ratio(&choice);
            range = Some(match range {
                None => (m.clone(), m),
                Some((lo, hi)) => (lo.min(m.clone()), hi.max(m)),
            });
        }
        let Some(k) = (0..idx.len()).find(|&k| idx[k] + 1 < cands[k].len()) else { break };
        idx[k] += 1;
        idx[..k].iter_mut().for_each(|i| *i = 0);
    }
    Ok(range.map(|(lo, hi)| (lo, hi, valid)))
}

/// The ball inequalities for `λ̃`: both general bounds and, for `n = 2`, the
/// sharper planar ones.
pub fn check_jurkat_kratz(ctx: &Context) -> Result<Vec<InequalityReport>> {
    let ids = [CheckId::Jk11Lower, CheckId::Jk11Upper, CheckId::Kratz12Lower, CheckId::Kratz12Upper, CheckId::Kratz13];
    let reason = if !ctx.body.is_ball() {
        Some("body is not the unit ball")
    } else if ctx.inst.q_max() == 0 || ctx.tilde.unattainable {
        Some("needs Q ≥ 1 so that n+1 independent lifts exist")
    } else {
        None
    };
    if let Some(r) = reason {
        return Ok(ids.iter().map(|&id| ctx.skip(id, r)).collect());
    }
    let n = ctx.n();
    let det = ctx.det();
    let prod = gauge_product(&ctx.tilde.values);
    let m = max_ratio(&ctx.tilde.attaining);
    let zero_terms = ctx.tilde.attaining.iter().filter(|p| p.q == 0).count();
    let mut extras = vec![
        ("max_q_over_lambda", json!(m)),
        ("attaining_q", json!(ctx.tilde.attaining.iter().map(|p| p.q).collect::<Vec<_>>())),
        // q = 0 terms add 0, so the maximum is the same with or without them
        ("zero_q_terms", json!(zero_terms)),
    ];
    match tie_range(ctx)? {
        Some((lo, hi, count)) => {
            extras.push(("tie_min", json!(lo)));
            extras.push(("tie_max", json!(hi)));
            extras.push(("tie_sets", json!(count)));
        }
        None => extras.push(("tie_sets", json!("too many to list"))),
    }
    let decorate = |mut r: InequalityReport| {
        for (k, v) in &extras {
            r.extras.insert((*k).to_owned(), v.clone());
        }
        r
    };
    let middle = prod.mul(&ball_volume(n + 1)).mul(&Quantity::gauge(m.clone()));
    // 2^((n+1)/2)/(n+1)!
    let jk_low = GaugeValue::sqrt_of(int(1u64 << (n + 1))).scale(&(int(1) / factorial(n + 1)));
    let mut out = vec![
        decorate(ctx.cmp(CheckId::Jk11Lower, Quantity::gauge(jk_low.scale(&det)), middle.clone())),
        decorate(ctx.cmp(CheckId::Jk11Upper, middle, q(int(1u64 << (2 * n + 1)) * &det))),
    ];
    if n == 2 {
        let planar = prod.mul(&Quantity::gauge(m));
        let low = GaugeValue::sqrt_of(Rational::new(4.into(), 27.into())).scale(&det);
        let high = GaugeValue::sqrt_of(Rational::new(4.into(), 3.into()));
        out.push(decorate(ctx.cmp(CheckId::Kratz12Lower, Quantity::gauge(low), planar.clone())));
        out.push(decorate(ctx.cmp(CheckId::Kratz12Upper, planar, Quantity::gauge(high.scale(&det)))));
        let first_two = gauge_product(&ctx.tilde.values[..2]);
        let rhs = Quantity::gauge(high.scale(&(det / int(ctx.inst.q_max()))));
        out.push(ctx.cmp(CheckId::Kratz13, first_two, rhs));
    } else {
        out.extend(ids[2..].iter().map(|&id| ctx.skip(id, "needs n = 2")));
    }
    Ok(out)
}

/// Minkowski's inequalities for `Λ` itself.
pub fn check_classical(ctx: &Context) -> Vec<InequalityReport> {
    let n = ctx.n();
    let det = ctx.det();
    let prod = gauge_product(&ctx.classical.values);
    let middle = prod.mul(&ctx.body.volume());
    let consts = ctx.body.known_constants();
    let m15 = if !ctx.body.is_ball() {
        ctx.skip(CheckId::Minkowski15, "body is not the unit ball")
    } else {
        match (n, &consts.crit_det) {
            (2, Some(d)) => ctx.cmp(CheckId::Minkowski15, prod.mul(d), q(det.clone())),
            _ => ctx.skip(CheckId::Minkowski15, "Δ(Bⁿ) tabulated only for n = 2"),
        }
    };
    let m16 = match (n, &consts.crit_det) {
        (2, Some(d)) => ctx.cmp(CheckId::Minkowski16, prod.mul(d), q(det.clone())),
        (2, None) => ctx.skip(CheckId::Minkowski16, "Δ(K) not tabulated"),
        _ => ctx.skip(CheckId::Minkowski16, "needs n = 2"),
    };
    vec![
        ctx.cmp(CheckId::Minkowski14Lower, q(ctx.two_n() / factorial(n) * &det), middle.clone()),
        ctx.cmp(CheckId::Minkowski14Upper, middle, q(ctx.two_n() * &det)),
        m15,
        m16,
    ]
}

/// All fifteen checks, in [`CheckId::ALL`] order.
pub fn verify_all(ctx: &Context) -> Result<Vec<InequalityReport>> {
    let mut out = vec![check_thm_i(ctx)];
    let (upper, lower) = check_thm_ii(ctx);
    out.push(upper);
    out.push(lower);
    out.extend(check_prop(ctx));
    out.extend(check_jurkat_kratz(ctx)?);
    out.extend(check_classical(ctx));
    Ok(out)
}

/// Convenience wrapper building the context.
pub fn verify_instance(inst: &PeriodicInstance, body: &GaugeBody, opts: VerifyOptions) -> Result<Vec<InequalityReport>> {
    verify_all(&Context::new(inst, body, opts)?)
}

/// 0 all hold or skipped, 1 any violated, 3 any inconclusive.
pub fn exit_code(reports: &[InequalityReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Violated || r.verdict == Verdict::Advisory { holds: false }) {
        1
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        3
    } else {
        0
    }
}

/// Everything needed to replay a violated check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationBundle {
    pub instance: InstanceSpec,
    pub body: BodySpec,
    pub minima: MinimaResult,
    pub tilde: MinimaResult,
    pub classical: MinimaResult,
    pub gamma: Option<GammaResult>,
    pub reports: Vec<InequalityReport>,
}

impl ViolationBundle {
    pub fn new(ctx: &Context, reports: &[InequalityReport]) -> Self {
        ViolationBundle {
            instance: ctx.inst.spec(),
            body: ctx.body.spec(),
            minima: ctx.minima.clone(),
            tilde: ctx.tilde.clone(),
            classical: ctx.classical.clone(),
            gamma: ctx.gamma.clone(),
            reports: reports.to_vec(),
        }
    }

    /// Writes `violation-<digest prefix>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let digest = self.reports.first().map(|r| r.inputs_digest.clone()).unwrap_or_default();
        let path = dir.join(format!("violation-{}.json", &digest[..digest.len().min(16)]));
        std::fs::write(&path, serde_json::to_string_pretty(self).map_err(std::io::Error::other)?)?;
        Ok(path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharpnessOptions {
    pub trials: u64,
    pub seed: u64,
    pub denominator_bound: u64,
    #[serde(rename = "Q_cap")]
    pub q_cap: u64,
}

impl Default for SharpnessOptions {
    fn default() -> Self {
        SharpnessOptions { trials: 10_000, seed: 42, denominator_bound: 40, q_cap: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessBest {
    pub trial: u64,
    #[serde(with = "serde_rational_vec")]
    pub alpha: Vec<Rational>,
    #[serde(rename = "Q")]
    pub q_max: u64,
    pub lambda1: GaugeValue,
    /// `λ₁² Q Δ(K)/det Λ`.
    pub rho: Quantity,
    pub rho_enclosure: IntervalValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRecord {
    pub body: BodySpec,
    pub options: SharpnessOptions,
    /// Trials that produced a valid instance.
    pub evaluated: u64,
    pub best: Option<SharpnessBest>,
    /// Largest `λ₁² Δ(K) (Q+1)/det Λ` seen; never above 1.
    pub max_covolume_ratio: Option<Quantity>,
    pub covolume_bound_failures: u64,
}

fn sharpness_trials(body: &GaugeBody, crit: &Quantity, opts: &SharpnessOptions, trials: std::ops::Range<u64>) -> Result<SharpnessRecord> {
    let mut rec = SharpnessRecord {
        body: body.spec(),
        options: *opts,
        evaluated: 0,
        best: None,
        max_covolume_ratio: None,
        covolume_bound_failures: 0,
    };
    for trial in trials {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(trial);
        let alpha: Vec<Rational> = (0..2)
            .map(|_| {
                let d = rng.gen_range(2..=opts.denominator_bound) as i64;
                Rational::new(rng.gen_range(0..d).into(), d.into())
            })
            .collect();
        let qm = rng.gen_range(1..=opts.q_cap);
        let Ok(inst) = validate(Lattice::integer(2), alpha.clone(), qm) else { continue };
        rec.evaluated += 1;
        let (l1, _) = beta(&inst, body)?;
        let sq = Quantity::gauge(l1.pow(2)).mul(crit);
        let rho = sq.scale(&int(qm));
        let cov = sq.scale(&int(qm + 1));
        if cov.exact_cmp(&Quantity::one()).is_none_or(|o| o.is_gt()) {
            rec.covolume_bound_failures += 1;
        }
        if rec.max_covolume_ratio.as_ref().is_none_or(|m| cov.exact_cmp(m).is_some_and(|o| o.is_gt())) {
            rec.max_covolume_ratio = Some(cov);
        }
        if rec.best.as_ref().is_none_or(|b| rho.exact_cmp(&b.rho).is_some_and(|o| o.is_gt())) {
            rec.best = Some(SharpnessBest {
                trial,
                alpha,
                q_max: qm,
                lambda1: l1,
                rho_enclosure: rho.enclosure(DEFAULT_PRECISION_BITS),
                rho,
            });
        }
    }
    Ok(rec)
}

fn larger(a: Option<Quantity>, b: Option<Quantity>) -> Option<Quantity> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.exact_cmp(&x).is_some_and(|o| o.is_gt()) { y } else { x }),
        (x, y) => x.or(y),
    }
}

/// Random search over `α ∈ [0,1)²` and `Q` maximizing `λ₁² Q Δ(K)/det Λ`
/// on `ℤ²`. Trial `t` draws from ChaCha8 with the given seed and stream `t`,
/// so the record does not depend on `workers`; ties go to the earliest trial.
pub fn sharpness_search(body: &GaugeBody, opts: SharpnessOptions, workers: usize) -> Result<SharpnessRecord> {
    let crit = match (body.dim(), body.known_constants().crit_det) {
        (2, Some(d)) => d,
        _ => return Err(Error::Precondition("sharpness search needs n = 2 and a tabulated Δ(K)".into())),
    };
    if opts.denominator_bound < 2 || opts.q_cap < 1 {
        return Err(Error::Precondition("need denominator bound ≥ 2 and Q cap ≥ 1".into()));
    }
    let workers = workers.clamp(1, 64) as u64;
    let chunk = opts.trials.div_ceil(workers).max(1);
    let parts: Vec<Result<SharpnessRecord>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * chunk).min(opts.trials)..((w + 1) * chunk).min(opts.trials);
                let crit = &crit;
                let opts = &opts;
                s.spawn(move || sharpness_trials(body, crit, opts, range))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut rec = SharpnessRecord {
        body: body.spec(),
        options: opts,
        evaluated: 0,
        best: None,
        max_covolume_ratio: None,
        covolume_bound_failures: 0,
    };
    // chunks are in trial order, so keeping the first maximum keeps the earliest trial
    for part in parts {
        let part = part?;
        rec.evaluated += part.evaluated;
        rec.covolume_bound_failures += part.covolume_bound_failures;
        rec.max_covolume_ratio = larger(rec.max_covolume_ratio.take(), part.max_covolume_ratio);
        if let Some(b) = part.best {
            if rec.best.as_ref().is_none_or(|cur| b.rho.exact_cmp(&cur.rho).is_some_and(|o| o.is_gt())) {
                rec.best = Some(b);
            }
        }
    }
    if rec.best.as_ref().is_some_and(|b| b.rho.exact_cmp(&Quantity::one()).is_some_and(|o| o.is_gt())) {
        return Err(Error::Internal("ρ above 1 although λ₁² Δ (Q+1) ≤ det".into()));
    }
    Ok(rec)
}
