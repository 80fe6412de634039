//! Measure sequences ν = (ν_N) on H: constructors, integration, density
//! and c_ν estimation, Cesàro and product transforms, and the probe
//! operations (ergodicity, Γ_ν membership, escape to infinity, asymptotic
//! invariance).
//!
//! Limits are never computed symbolically. Every estimator walks an
//! explicit [`Schedule`] of N values and reports a [`ConvergenceVerdict`]:
//! `Converged` requires the last three partial values to agree pairwise
//! within the schedule tolerance, `Undecided` is a legitimate outcome and
//! is never coerced into a limit.

use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::groups::{DualPair, GroupElement, Side};
use crate::numeric::KahanC64;
use crate::{Error, Result};

/// |c_ν| within this distance of 1 counts as Γ_ν membership on a probe grid.
pub const TOL_GAMMA: f64 = 1e-3;

/// Guard against unbounded integrands.
const OVERFLOW_GUARD: f64 = 1e15;

/// Quadrature nodes per oscillation cycle, shared with the measures module.
const NODES_PER_CYCLE: u64 = crate::measures::NODES_PER_CYCLE as u64;
/// Hard budget on quadrature nodes for one integral.
const MAX_QUAD_NODES: u64 = 1 << 24;

// ---------------------------------------------------------------------------
// schedules and verdicts

/// A strictly increasing list of N values plus the Cauchy tolerance used
/// for convergence detection.
#[derive(Debug, Clone)]
pub struct Schedule {
    points: Vec<u64>,
    pub tol: f64,
}

impl Schedule {
    pub fn new(points: Vec<u64>, tol: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("schedule must be nonempty".into()));
        }
        if points[0] == 0 {
            return Err(Error::InvalidInput("schedule points must be ≥ 1".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "schedule must be strictly increasing, got {points:?}"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(
                "schedule tolerance must be positive".into(),
            ));
        }
        Ok(Schedule { points, tol })
    }

    /// N ∈ {2^lo, …, 2^hi}.
    pub fn dyadic(lo: u32, hi: u32) -> Self {
        let points = (lo..=hi).map(|k| 1u64 << k).collect();
        Schedule { points, tol: 1e-3 }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn last(&self) -> u64 {
        *self.points.last().unwrap()
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::dyadic(6, 20)
    }
}

/// Outcome of watching a sequence of partial values along a schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum VerdictStatus {
    Converged { limit: Complex64, residual: f64 },
    Diverged,
    Undecided,
}

/// Partial values together with the convergence classification.
#[derive(Debug, Clone)]
pub struct ConvergenceVerdict {
    pub values: Vec<(u64, Complex64)>,
    pub status: VerdictStatus,
}

impl ConvergenceVerdict {
    /// Cauchy-on-schedule classification: the last three partial values
    /// must agree pairwise within `tol`.
    pub fn classify(values: Vec<(u64, Complex64)>, tol: f64) -> Self {
        let bad = values
            .iter()
            .any(|(_, v)| !v.re.is_finite() || !v.im.is_finite() || v.norm() > 1e12);
        if bad {
            return ConvergenceVerdict {
                values,
                status: VerdictStatus::Diverged,
            };
        }
        let n = values.len();
        if n >= 3 {
            let a = values[n - 3].1;
            let b = values[n - 2].1;
            let c = values[n - 1].1;
            if (a - b).norm() < tol && (b - c).norm() < tol && (a - c).norm() < tol {
                return ConvergenceVerdict {
                    status: VerdictStatus::Converged {
                        limit: c,
                        residual: (b - c).norm(),
                    },
                    values,
                };
            }
        }
        ConvergenceVerdict {
            values,
            status: VerdictStatus::Undecided,
        }
    }

    pub fn limit(&self) -> Option<Complex64> {
        match self.status {
            VerdictStatus::Converged { limit, .. } => Some(limit),
            _ => None,
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match self.status {
            VerdictStatus::Converged { residual, .. } => Some(residual),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self.status, VerdictStatus::Converged { .. })
    }

    pub fn converged_to_zero(&self, tol: f64) -> bool {
        self.limit().is_some_and(|l| l.norm() <= tol)
    }

    pub fn converged_to(&self, target: Complex64, tol: f64) -> bool {
        self.limit().is_some_and(|l| (l - target).norm() <= tol)
    }

    pub fn last_value(&self) -> Complex64 {
        self.values.last().map(|(_, v)| *v).unwrap_or_default()
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictStatus::Converged { limit, residual } => {
                write!(f, "converged to {limit:.6} (residual {residual:.2e})")
            }
            VerdictStatus::Diverged => write!(f, "diverged"),
            VerdictStatus::Undecided => write!(f, "undecided"),
        }
    }
}

// ---------------------------------------------------------------------------
// index sequences for delta subsequences

/// A pure generator N ↦ k_N for delta subsequences.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexSequence {
    /// k_N = Σ coeffs[i]·N^i, coefficients in ascending degree.
    Polynomial(Vec<i64>),
    /// k_N = N-th prime, 1-indexed (k_1 = 2).
    Primes,
}

impl IndexSequence {
    pub fn linear(a: i64, b: i64) -> Self {
        IndexSequence::Polynomial(vec![b, a])
    }

    pub fn quadratic() -> Self {
        IndexSequence::Polynomial(vec![0, 0, 1])
    }

    pub fn eval(&self, n: u64) -> Result<i64> {
        match self {
            IndexSequence::Polynomial(coeffs) => {
                let x = n as i128;
                let mut acc: i128 = 0;
                let mut pow: i128 = 1;
                for c in coeffs {
                    acc = acc
                        .checked_add((*c as i128).checked_mul(pow).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                    pow = pow.checked_mul(x).ok_or_else(overflow)?;
                }
                i64::try_from(acc).map_err(|_| overflow())
            }
            IndexSequence::Primes => Ok(nth_prime(n)),
        }
    }

    /// Parse `primes` or a polynomial in n such as `n^2`, `2n`, `3n^2-n+1`.
    pub fn parse(s: &str) -> Result<Self> {
        let s: String = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
        if s == "primes" {
            return Ok(IndexSequence::Primes);
        }
        if s.is_empty() {
            return Err(Error::Parse("empty index sequence".into()));
        }
        let mut coeffs: Vec<i64> = Vec::new();
        let mut add_term = |coeff: i64, degree: usize| {
            if coeffs.len() <= degree {
                coeffs.resize(degree + 1, 0);
            }
            coeffs[degree] += coeff;
        };
        // split into sign-prefixed terms
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, ch) in s.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for term in &terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(b) => (-1i64, b),
                None => (1i64, term.strip_prefix('+').unwrap_or(term)),
            };
            if body.is_empty() {
                return Err(Error::Parse(format!("dangling sign in `{s}`")));
            }
            let (coeff_str, degree) = match body.split_once('n') {
                None => (body, 0usize),
                Some((c, rest)) => {
                    let degree = if rest.is_empty() {
                        1usize
                    } else {
                        let d = rest
                            .strip_prefix('^')
                            .ok_or_else(|| Error::Parse(format!("bad exponent in `{term}`")))?;
                        d.parse::<usize>()
                            .map_err(|e| Error::Parse(format!("exponent `{d}`: {e}")))?
                    };
                    (c, degree)
                }
            };
            let coeff: i64 = if coeff_str.is_empty() {
                1
            } else {
                coeff_str
                    .parse()
                    .map_err(|e| Error::Parse(format!("coefficient `{coeff_str}`: {e}")))?
            };
            if degree > 8 {
                return Err(Error::Parse(format!("degree {degree} too large")));
            }
            add_term(sign * coeff, degree);
        }
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        Ok(IndexSequence::Polynomial(coeffs))
    }
}

impl fmt::Display for IndexSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs = match self {
            IndexSequence::Primes => return write!(f, "primes"),
            IndexSequence::Polynomial(coeffs) => coeffs,
        };
        let mut first = true;
        for (deg, c) in coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if *c >= 0 { "+" } else { "-" })?;
            }
            let a = c.abs();
            match deg {
                0 => write!(f, "{a}")?,
                1 => {
                    if a != 1 {
                        write!(f, "{a}")?;
                    }
                    write!(f, "n")?;
                }
                _ => {
                    if a != 1 {
                        write!(f, "{a}")?;
                    }
                    write!(f, "n^{deg}")?;
                }
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn overflow() -> Error {
    Error::InvalidInput("index sequence value overflows i64".into())
}

// global prime sieve, grown on demand
struct Sieve {
    limit: usize,
    primes: Vec<i64>,
    is_prime: Vec<bool>,
}

fn sieve_cell() -> &'static Mutex<Sieve> {
    static CELL: OnceLock<Mutex<Sieve>> = OnceLock::new();
    CELL.get_or_init(|| {
        Mutex::new(Sieve {
            limit: 0,
            primes: Vec::new(),
            is_prime: Vec::new(),
        })
    })
}

fn grow_sieve(s: &mut Sieve, limit: usize) {
    if s.limit >= limit {
        return;
    }
    let limit = limit.max(1 << 10).next_power_of_two();
    let mut flags = vec![true; limit + 1];
    flags[0] = false;
    if limit >= 1 {
        flags[1] = false;
    }
    let mut p = 2usize;
    while p * p <= limit {
        if flags[p] {
            let mut q = p * p;
            while q <= limit {
                flags[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    s.primes = flags
        .iter()
        .enumerate()
        .filter_map(|(i, ok)| ok.then_some(i as i64))
        .collect();
    s.is_prime = flags;
    s.limit = limit;
}

fn nth_prime(n: u64) -> i64 {
    let n = n.max(1) as usize;
    let mut s = sieve_cell().lock().unwrap();
    // p_n < n(ln n + ln ln n) for n ≥ 6
    let guess = if n < 6 {
        16
    } else {
        let x = n as f64;
        (x * (x.ln() + x.ln().ln())).ceil() as usize + 16
    };
    let mut limit = guess;
    loop {
        grow_sieve(&mut s, limit);
        if s.primes.len() >= n {
            return s.primes[n - 1];
        }
        limit *= 2;
    }
}

pub(crate) fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut s = sieve_cell().lock().unwrap();
    grow_sieve(&mut s, n as usize);
    s.is_prime[n as usize]
}

// ---------------------------------------------------------------------------
// set indicators

/// A named measurable-set indicator on one side of a group.
#[derive(Clone)]
pub struct SetIndicator {
    name: String,
    bounded: bool,
    f: Arc<dyn Fn(&GroupElement) -> bool + Send + Sync>,
}

impl fmt::Debug for SetIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetIndicator({})", self.name)
    }
}

impl SetIndicator {
    pub fn new(
        name: impl Into<String>,
        bounded: bool,
        f: impl Fn(&GroupElement) -> bool + Send + Sync + 'static,
    ) -> Self {
        SetIndicator {
            name: name.into(),
            bounded,
            f: Arc::new(f),
        }
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        (self.f)(e)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    fn int_of(e: &GroupElement) -> Option<i64> {
        match e {
            GroupElement::Integer(n) => Some(*n),
            _ => None,
        }
    }

    pub fn evens() -> Self {
        Self::new("evens", false, |e| {
            Self::int_of(e).is_some_and(|n| n.rem_euclid(2) == 0)
        })
    }

    pub fn odds() -> Self {
        Self::new("odds", false, |e| {
            Self::int_of(e).is_some_and(|n| n.rem_euclid(2) == 1)
        })
    }

    pub fn multiples(k: i64) -> Self {
        Self::new(format!("multiples:{k}"), false, move |e| {
            Self::int_of(e).is_some_and(|n| k != 0 && n.rem_euclid(k.abs()) == 0)
        })
    }

    pub fn residue_class(r: i64, m: u64) -> Self {
        Self::new(format!("residue:{r}:{m}"), false, move |e| {
            Self::int_of(e).is_some_and(|n| n.rem_euclid(m as i64) == r.rem_euclid(m as i64))
        })
    }

    pub fn squares() -> Self {
        Self::new("squares", false, |e| {
            Self::int_of(e).is_some_and(|n| {
                if n < 0 {
                    return false;
                }
                let r = (n as u64).isqrt();
                r * r == n as u64
            })
        })
    }

    pub fn primes_set() -> Self {
        Self::new("primes", false, |e| Self::int_of(e).is_some_and(is_prime))
    }

    /// {lo, …, hi} ⊂ ℤ; bounded.
    pub fn integer_range(lo: i64, hi: i64) -> Self {
        Self::new(format!("range:{lo}:{hi}"), true, move |e| {
            Self::int_of(e).is_some_and(|n| (lo..=hi).contains(&n))
        })
    }

    /// [lo, hi] ⊂ ℝ; bounded.
    pub fn real_interval(lo: f64, hi: f64) -> Self {
        Self::new(
            format!("interval:{lo}:{hi}"),
            true,
            move |e| matches!(e, GroupElement::Real(r) if (lo..=hi).contains(r)),
        )
    }

    /// {s ∈ ℝ : ⌊s⌋ even}.
    pub fn floor_even() -> Self {
        Self::new(
            "floor-even",
            false,
            |e| matches!(e, GroupElement::Real(r) if (r.floor() as i64).rem_euclid(2) == 0),
        )
    }

    pub fn everything() -> Self {
        Self::new("all", false, |_| true)
    }

    pub fn empty() -> Self {
        Self::new("empty", true, |_| false)
    }

    /// Parse the textual set syntax used by configs.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "evens" => return Ok(Self::evens()),
            "odds" => return Ok(Self::odds()),
            "squares" => return Ok(Self::squares()),
            "primes" => return Ok(Self::primes_set()),
            "all" => return Ok(Self::everything()),
            "empty" => return Ok(Self::empty()),
            "floor-even" => return Ok(Self::floor_even()),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["multiples", k] => {
                Ok(Self::multiples(k.parse().map_err(|e| {
                    Error::Parse(format!("multiples `{k}`: {e}"))
                })?))
            }
            ["residue", r, m] => Ok(Self::residue_class(
                r.parse()
                    .map_err(|e| Error::Parse(format!("residue `{r}`: {e}")))?,
                m.parse()
                    .map_err(|e| Error::Parse(format!("modulus `{m}`: {e}")))?,
            )),
            ["range", lo, hi] => Ok(Self::integer_range(
                lo.parse()
                    .map_err(|e| Error::Parse(format!("range `{lo}`: {e}")))?,
                hi.parse()
                    .map_err(|e| Error::Parse(format!("range `{hi}`: {e}")))?,
            )),
            ["interval", lo, hi] => Ok(Self::real_interval(
                lo.parse()
                    .map_err(|e| Error::Parse(format!("interval `{lo}`: {e}")))?,
                hi.parse()
                    .map_err(|e| Error::Parse(format!("interval `{hi}`: {e}")))?,
            )),
            _ => Err(Error::Parse(format!("unknown set `{s}`"))),
        }
    }
}

// ---------------------------------------------------------------------------
// integrands

/// What to integrate against ν_N. Characters and trigonometric polynomials
/// get closed forms where the sequence supports them (the Følner interval);
/// pointwise functions carry an oscillation hint for the quadrature node
/// rule.
pub enum Integrand<'a> {
    /// h ↦ ⟨g, h⟩ for a fixed g on the G side.
    Character(&'a GroupElement),
    /// h ↦ Σ_i w_i ⟨g_i, h⟩.
    TrigPoly(&'a [(GroupElement, Complex64)]),
    /// Arbitrary bounded measurable function.
    Pointwise {
        f: &'a dyn Fn(&GroupElement) -> Result<Complex64>,
        /// cycles per unit length, for quadrature over ℝ
        max_freq: f64,
    },
}

/// Semigroup membership claimed by a sequence's support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportClaim {
    NonnegativeIntegers,
    NonnegativeReals,
    WholeGroup,
    Unknown,
}

// ---------------------------------------------------------------------------
// the measure sequence type

#[derive(Debug, Clone)]
enum SequenceKind {
    /// u_N: uniform counting on {0,…,N−1} ⊂ ℤ.
    UniformCount,
    /// Normalized Lebesgue measure on [0,N] ⊂ ℝ.
    FolnerInterval,
    /// δ_{k_N} on ℤ.
    DeltaSubsequence(IndexSequence),
    /// (1/N) Σ_{n=1}^N ν_n.
    CesaroTransform(Box<MeasureSequence>),
    /// ν_N ⊗ σ_N on the product group.
    ProductSequence(Box<MeasureSequence>, Box<MeasureSequence>),
    /// Uniform on ℤ_m, constant in N.
    CyclicUniform,
}

/// A sequence N ↦ ν_N of probability measures on the H side of a dual pair.
#[derive(Debug, Clone)]
pub struct MeasureSequence {
    pair: DualPair,
    kind: SequenceKind,
}

impl MeasureSequence {
    pub fn uniform_count() -> Self {
        MeasureSequence {
            pair: DualPair::CircleInteger,
            kind: SequenceKind::UniformCount,
        }
    }

    pub fn folner_interval() -> Self {
        MeasureSequence {
            pair: DualPair::RealReal,
            kind: SequenceKind::FolnerInterval,
        }
    }

    pub fn delta(idx: IndexSequence) -> Self {
        MeasureSequence {
            pair: DualPair::CircleInteger,
            kind: SequenceKind::DeltaSubsequence(idx),
        }
    }

    pub fn cesaro(inner: MeasureSequence) -> Self {
        MeasureSequence {
            pair: inner.pair.clone(),
            kind: SequenceKind::CesaroTransform(Box::new(inner)),
        }
    }

    pub fn product(left: MeasureSequence, right: MeasureSequence) -> Self {
        MeasureSequence {
            pair: DualPair::product(left.pair.clone(), right.pair.clone()),
            kind: SequenceKind::ProductSequence(Box::new(left), Box::new(right)),
        }
    }

    pub fn cyclic_uniform(m: u64) -> Result<Self> {
        Ok(MeasureSequence {
            pair: DualPair::cyclic(m)?,
            kind: SequenceKind::CyclicUniform,
        })
    }

    /// The dual pair whose H side carries the measures.
    pub fn dual_pair(&self) -> &DualPair {
        &self.pair
    }

    pub(crate) fn is_plain_folner(&self) -> bool {
        matches!(self.kind, SequenceKind::FolnerInterval)
    }

    /// True if evaluating this sequence involves quadrature rather than
    /// exact finite sums.
    pub fn needs_quadrature(&self) -> bool {
        match &self.kind {
            SequenceKind::FolnerInterval => true,
            SequenceKind::CesaroTransform(inner) => inner.needs_quadrature(),
            SequenceKind::ProductSequence(a, b) => a.needs_quadrature() || b.needs_quadrature(),
            _ => false,
        }
    }

    /// Absolute error bound declared for integrate() at this N (0 for the
    /// exact discrete kinds).
    pub fn integration_tolerance(&self, n: u64) -> f64 {
        match &self.kind {
            SequenceKind::FolnerInterval => {
                // one trapezoid panel per 1/64 cycle
                let nodes = NODES_PER_CYCLE * (1 + n) + 1;
                2.0 / nodes as f64
            }
            SequenceKind::CesaroTransform(inner) => inner.integration_tolerance(n),
            SequenceKind::ProductSequence(a, b) => {
                a.integration_tolerance(n) + b.integration_tolerance(n)
            }
            _ => 0.0,
        }
    }

    /// Which semigroup the supports are claimed to lie in.
    pub fn support_claim(&self) -> SupportClaim {
        match &self.kind {
            SequenceKind::UniformCount => SupportClaim::NonnegativeIntegers,
            SequenceKind::FolnerInterval => SupportClaim::NonnegativeReals,
            SequenceKind::DeltaSubsequence(_) => SupportClaim::Unknown,
            SequenceKind::CesaroTransform(inner) => inner.support_claim(),
            SequenceKind::ProductSequence(_, _) => SupportClaim::Unknown,
            SequenceKind::CyclicUniform => SupportClaim::WholeGroup,
        }
    }

    /// Parse the textual sequence syntax: `uniform-count`,
    /// `folner-interval`, `delta(k=n^2)`, `cesaro(<inner>)`,
    /// `product(<a>,<b>)`, `cyclic-uniform(m)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "uniform-count" => return Ok(Self::uniform_count()),
            "folner-interval" => return Ok(Self::folner_interval()),
            _ => {}
        }
        if let Some(inner) = enclosed(s, "delta") {
            let inner = inner.strip_prefix("k=").unwrap_or(inner);
            return Ok(Self::delta(IndexSequence::parse(inner)?));
        }
        if let Some(inner) = enclosed(s, "cesaro") {
            return Ok(Self::cesaro(Self::parse(inner)?));
        }
        if let Some(inner) = enclosed(s, "cyclic-uniform") {
            let m: u64 = inner
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("cyclic modulus `{inner}`: {e}")))?;
            return Self::cyclic_uniform(m);
        }
        if let Some(inner) = enclosed(s, "product") {
            let mut depth = 0usize;
            for (i, ch) in inner.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => {
                        depth = depth
                            .checked_sub(1)
                            .ok_or_else(|| Error::Parse(format!("unbalanced parens in `{s}`")))?
                    }
                    ',' if depth == 0 => {
                        let left = Self::parse(&inner[..i])?;
                        let right = Self::parse(&inner[i + 1..])?;
                        return Ok(Self::product(left, right));
                    }
                    _ => {}
                }
            }
            return Err(Error::Parse(format!("product `{s}` needs two components")));
        }
        Err(Error::Parse(format!("unknown sequence `{s}`")))
    }

    // -- integration --------------------------------------------------------

    /// ∫ f dν_N. Exact finite sums for the discrete kinds, closed character
    /// forms or trapezoid quadrature for the Følner interval, iterated
    /// integration for products.
    pub fn integrate(&self, n: u64, f: &Integrand) -> Result<Complex64> {
        if n == 0 {
            return Err(Error::InvalidInput("N must be ≥ 1".into()));
        }
        match f {
            Integrand::Character(g) => self.check_g(g)?,
            Integrand::TrigPoly(terms) => {
                for (g, _) in *terms {
                    self.check_g(g)?;
                }
            }
            Integrand::Pointwise { .. } => {}
        }
        self.integrate_inner(n, f)
    }

    fn check_g(&self, g: &GroupElement) -> Result<()> {
        if self.pair.contains(Side::G, g) {
            Ok(())
        } else {
            Err(Error::ModelMismatch {
                pair: self.pair.to_string(),
                side: Side::G,
                element: g.to_string(),
            })
        }
    }

    fn eval_point(&self, f: &Integrand, h: &GroupElement) -> Result<Complex64> {
        match f {
            Integrand::Character(g) => Ok(self.pair.pair_unchecked(g, h)),
            Integrand::TrigPoly(terms) => {
                let mut acc = KahanC64::default();
                for (g, w) in *terms {
                    acc.add(w * self.pair.pair_unchecked(g, h));
                }
                Ok(acc.value())
            }
            Integrand::Pointwise { f, .. } => {
                let v = f(h)?;
                if !v.re.is_finite() || !v.im.is_finite() || v.norm() > OVERFLOW_GUARD {
                    return Err(Error::UnboundedIntegrand {
                        at: h.to_string(),
                        value: v.norm(),
                    });
                }
                Ok(v)
            }
        }
    }

    fn integrate_inner(&self, n: u64, f: &Integrand) -> Result<Complex64> {
        match &self.kind {
            SequenceKind::UniformCount => {
                let mut acc = KahanC64::default();
                for i in 0..n {
                    acc.add(self.eval_point(f, &GroupElement::Integer(i as i64))?);
                }
                Ok(acc.value() / n as f64)
            }
            SequenceKind::DeltaSubsequence(idx) => {
                let k = idx.eval(n)?;
                self.eval_point(f, &GroupElement::Integer(k))
            }
            SequenceKind::CyclicUniform => {
                let m = match self.pair {
                    DualPair::CyclicCyclic(m) => m,
                    _ => unreachable!(),
                };
                let mut acc = KahanC64::default();
                for j in 0..m {
                    acc.add(self.eval_point(
                        f,
                        &GroupElement::Residue {
                            value: j,
                            modulus: m,
                        },
                    )?);
                }
                Ok(acc.value() / m as f64)
            }
            SequenceKind::CesaroTransform(inner) => {
                if matches!(inner.kind, SequenceKind::UniformCount) {
                    // (1/N) Σ_n (1/n) Σ_{j<n} f(j) via running prefix sums,
                    // O(N) instead of O(N²)
                    let mut prefix = KahanC64::default();
                    let mut acc = KahanC64::default();
                    for m in 1..=n {
                        prefix.add(self.eval_point(f, &GroupElement::Integer(m as i64 - 1))?);
                        acc.add(prefix.value() / m as f64);
                    }
                    return Ok(acc.value() / n as f64);
                }
                let mut acc = KahanC64::default();
                for m in 1..=n {
                    acc.add(inner.integrate_inner(m, f)?);
                }
                Ok(acc.value() / n as f64)
            }
            SequenceKind::FolnerInterval => match f {
                Integrand::Character(g) => {
                    let r = match g {
                        GroupElement::Real(r) => *r,
                        _ => unreachable!(),
                    };
                    Ok(folner_character_mean(r, n))
                }
                Integrand::TrigPoly(terms) => {
                    let mut acc = KahanC64::default();
                    for (g, w) in *terms {
                        let r = match g {
                            GroupElement::Real(r) => *r,
                            _ => unreachable!(),
                        };
                        acc.add(w * folner_character_mean(r, n));
                    }
                    Ok(acc.value())
                }
                Integrand::Pointwise { max_freq, .. } => {
                    let nodes = folner_node_count(n, *max_freq)?;
                    let len = n as f64;
                    let step = len / (nodes - 1) as f64;
                    let mut acc = KahanC64::default();
                    for i in 0..nodes {
                        let t = step * i as f64;
                        let w = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
                        acc.add(self.eval_point(f, &GroupElement::Real(t))? * w);
                    }
                    Ok(acc.value() * step / len)
                }
            },
            SequenceKind::ProductSequence(left, right) => match f {
                Integrand::Character(g) => {
                    let (gl, gr) = split_tuple(g);
                    let a = left.integrate_inner(n, &Integrand::Character(gl))?;
                    let b = right.integrate_inner(n, &Integrand::Character(gr))?;
                    Ok(a * b)
                }
                Integrand::TrigPoly(terms) => {
                    let mut acc = KahanC64::default();
                    for (g, w) in *terms {
                        let (gl, gr) = split_tuple(g);
                        let a = left.integrate_inner(n, &Integrand::Character(gl))?;
                        let b = right.integrate_inner(n, &Integrand::Character(gr))?;
                        acc.add(w * a * b);
                    }
                    Ok(acc.value())
                }
                Integrand::Pointwise { f: func, max_freq } => {
                    let max_freq = *max_freq;
                    let inner_eval = |hl: &GroupElement| -> Result<Complex64> {
                        let hl = hl.clone();
                        let g = |hr: &GroupElement| -> Result<Complex64> {
                            func(&GroupElement::Tuple(vec![hl.clone(), hr.clone()]))
                        };
                        right.integrate_inner(n, &Integrand::Pointwise { f: &g, max_freq })
                    };
                    left.integrate_inner(
                        n,
                        &Integrand::Pointwise {
                            f: &inner_eval,
                            max_freq,
                        },
                    )
                }
            },
        }
    }

    // -- estimators ---------------------------------------------------------

    /// Partial values of ∫⟨g,h⟩ν_N(dh) along the schedule, with the Cauchy
    /// classification of c_ν(g).
    pub fn c_estimate(&self, g: &GroupElement, schedule: &Schedule) -> Result<ConvergenceVerdict> {
        self.check_g(g)?;
        let mut values = Vec::with_capacity(schedule.points().len());
        for &n in schedule.points() {
            values.push((n, self.integrate(n, &Integrand::Character(g))?));
        }
        Ok(ConvergenceVerdict::classify(values, schedule.tol))
    }

    /// Partial values of ν_N(J) along the schedule.
    pub fn density_estimate(
        &self,
        set: &SetIndicator,
        schedule: &Schedule,
    ) -> Result<ConvergenceVerdict> {
        let indicator = |h: &GroupElement| -> Result<Complex64> {
            Ok(Complex64::new(f64::from(set.contains(h)), 0.0))
        };
        let mut values = Vec::with_capacity(schedule.points().len());
        for &n in schedule.points() {
            let v = self.integrate(
                n,
                &Integrand::Pointwise {
                    f: &indicator,
                    max_freq: INDICATOR_FREQ_HINT,
                },
            )?;
            values.push((n, v));
        }
        Ok(ConvergenceVerdict::classify(values, schedule.tol))
    }

    /// Verdicts of ν_N(K) → 0 for a list of bounded sets.
    pub fn goes_to_infinity_probe(
        &self,
        compacts: &[SetIndicator],
        schedule: &Schedule,
    ) -> Result<Vec<(String, ConvergenceVerdict)>> {
        let mut out = Vec::with_capacity(compacts.len());
        for set in compacts {
            if !set.is_bounded() {
                return Err(Error::InvalidInput(format!(
                    "goes-to-infinity probe needs bounded sets, `{}` is not",
                    set.name()
                )));
            }
            out.push((
                set.name().to_string(),
                self.density_estimate(set, schedule)?,
            ));
        }
        Ok(out)
    }

    /// For each (shift n, set A): verdict of ν_N(n^{-1}A) − ν_N(A) → 0.
    pub fn asymptotic_invariance_probe(
        &self,
        shifts: &[GroupElement],
        sets: &[SetIndicator],
        schedule: &Schedule,
    ) -> Result<InvarianceReport> {
        let mut entries = Vec::new();
        for shift in shifts {
            if !self.pair.contains(Side::H, shift) {
                return Err(Error::ModelMismatch {
                    pair: self.pair.to_string(),
                    side: Side::H,
                    element: shift.to_string(),
                });
            }
            for set in sets {
                let diff = |h: &GroupElement| -> Result<Complex64> {
                    let shifted = self.pair.combine(Side::H, shift, h)?;
                    let v = f64::from(set.contains(&shifted)) - f64::from(set.contains(h));
                    Ok(Complex64::new(v, 0.0))
                };
                let mut values = Vec::with_capacity(schedule.points().len());
                for &n in schedule.points() {
                    let v = self.integrate(
                        n,
                        &Integrand::Pointwise {
                            f: &diff,
                            max_freq: INDICATOR_FREQ_HINT,
                        },
                    )?;
                    values.push((n, v));
                }
                let verdict = ConvergenceVerdict::classify(values, schedule.tol);
                let vanishing = verdict.converged_to_zero(schedule.tol);
                entries.push(InvarianceEntry {
                    shift: shift.clone(),
                    set: set.name().to_string(),
                    verdict,
                    vanishing,
                });
            }
        }
        let consistent = entries.iter().all(|e| e.vanishing);
        Ok(InvarianceReport {
            entries,
            consistent,
        })
    }

    /// Probe c_ν on a finite grid: exact 1 at the identity, and |c| below
    /// tolerance elsewhere is consistent with ergodicity (never a proof).
    pub fn ergodicity_probe(
        &self,
        grid: &[GroupElement],
        schedule: &Schedule,
    ) -> Result<ErgodicityReport> {
        let id = self.pair.identity(Side::G);
        if !grid.iter().any(|g| g.approx_eq(&id)) {
            return Err(Error::InvalidInput(
                "ergodicity probe grid must contain the identity".into(),
            ));
        }
        let id_verdict = self.c_estimate(&id, schedule)?;
        let one = Complex64::new(1.0, 0.0);
        let identity_exact = id_verdict.values.iter().all(|(_, v)| *v == one);
        let mut nonzero = Vec::new();
        let mut undecided = Vec::new();
        for g in grid {
            if g.approx_eq(&id) {
                continue;
            }
            let verdict = self.c_estimate(g, schedule)?;
            match verdict.limit() {
                Some(l) if l.norm() > schedule.tol => nonzero.push((g.clone(), l)),
                Some(_) => {}
                None => undecided.push(g.clone()),
            }
        }
        let consistent_on_grid = identity_exact && nonzero.is_empty() && undecided.is_empty();
        Ok(ErgodicityReport {
            grid: grid.to_vec(),
            identity_exact,
            nonzero,
            undecided,
            consistent_on_grid,
        })
    }

    /// Grid points whose |c_ν| converges to within [`TOL_GAMMA`] of 1,
    /// with the limit values.
    pub fn gamma_probe(&self, grid: &[GroupElement], schedule: &Schedule) -> Result<GammaReport> {
        let mut members = Vec::new();
        let mut undecided = Vec::new();
        for g in grid {
            let verdict = self.c_estimate(g, schedule)?;
            match verdict.limit() {
                Some(l) if (l.norm() - 1.0).abs() <= TOL_GAMMA => members.push((g.clone(), l)),
                Some(_) => {}
                None => undecided.push(g.clone()),
            }
        }
        Ok(GammaReport {
            grid_size: grid.len(),
            members,
            undecided,
        })
    }
}

impl fmt::Display for MeasureSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SequenceKind::UniformCount => write!(f, "uniform-count"),
            SequenceKind::FolnerInterval => write!(f, "folner-interval"),
            SequenceKind::DeltaSubsequence(idx) => write!(f, "delta(k={idx})"),
            SequenceKind::CesaroTransform(inner) => write!(f, "cesaro({inner})"),
            SequenceKind::ProductSequence(a, b) => write!(f, "product({a},{b})"),
            SequenceKind::CyclicUniform => match self.pair {
                DualPair::CyclicCyclic(m) => write!(f, "cyclic-uniform({m})"),
                _ => unreachable!(),
            },
        }
    }
}

/// Oscillation hint for set indicators integrated by quadrature: one jump
/// per unit length is resolved with 64 nodes.
const INDICATOR_FREQ_HINT: f64 = 4.0;

fn enclosed<'a>(s: &'a str, head: &str) -> Option<&'a str> {
    s.strip_prefix(head)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
}

fn split_tuple(g: &GroupElement) -> (&GroupElement, &GroupElement) {
    match g {
        GroupElement::Tuple(xs) if xs.len() == 2 => (&xs[0], &xs[1]),
        _ => unreachable!("validated against a product pair"),
    }
}

/// Trapezoid node count for [0, N] resolving `max_freq` cycles per unit
/// length, with a hard budget.
pub(crate) fn folner_node_count(n: u64, max_freq: f64) -> Result<u64> {
    let cycles = (max_freq.abs() * n as f64).ceil() as u64;
    NODES_PER_CYCLE
        .checked_mul(1 + cycles)
        .map(|v| v + 1)
        .filter(|v| *v <= MAX_QUAD_NODES)
        .ok_or(Error::Oscillation {
            frequency: max_freq.abs(),
            band_limit: (MAX_QUAD_NODES / NODES_PER_CYCLE) as f64 / n as f64,
        })
}

/// (1/N)∫_0^N e^{−2πirs} ds = (e^{−2πiNr} − 1)/(−2πirN).
///
/// The endpoint phase is reduced to the nearest integer rather than into
/// [0,1): flooring a tiny negative rN to phase ≈ 1 would cancel
/// catastrophically against the −1 and blow the mean past 1.
fn folner_character_mean(r: f64, n: u64) -> Complex64 {
    if r == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let rn = r * n as f64;
    let phase = rn - rn.round();
    let num = crate::numeric::unit(-phase) - Complex64::new(1.0, 0.0);
    num / Complex64::new(0.0, -std::f64::consts::TAU * rn)
}

// ---------------------------------------------------------------------------
// probe reports

#[derive(Debug, Clone)]
pub struct ErgodicityReport {
    pub grid: Vec<GroupElement>,
    /// c_ν(1) partial value equals 1 exactly at every schedule point.
    pub identity_exact: bool,
    /// Non-identity grid points with converged |c| above tolerance.
    pub nonzero: Vec<(GroupElement, Complex64)>,
    pub undecided: Vec<GroupElement>,
    pub consistent_on_grid: bool,
}

#[derive(Debug, Clone)]
pub struct GammaReport {
    pub grid_size: usize,
    /// Points with converged |c| within [`TOL_GAMMA`] of 1, and the limit.
    pub members: Vec<(GroupElement, Complex64)>,
    pub undecided: Vec<GroupElement>,
}

#[derive(Debug, Clone)]
pub struct InvarianceEntry {
    pub shift: GroupElement,
    pub set: String,
    pub verdict: ConvergenceVerdict,
    pub vanishing: bool,
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub entries: Vec<InvarianceEntry>,
    pub consistent: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupElement as E;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn char_int(nu: &MeasureSequence, theta: f64, n: u64) -> Complex64 {
        nu.integrate(n, &Integrand::Character(&E::circle(theta)))
            .unwrap()
    }

    #[test]
    fn uniform_count_mean_of_index() {
        let u = MeasureSequence::uniform_count();
        let f = |h: &E| -> Result<Complex64> {
            match h {
                E::Integer(n) => Ok(c(*n as f64, 0.0)),
                _ => unreachable!(),
            }
        };
        let v = u
            .integrate(
                4,
                &Integrand::Pointwise {
                    f: &f,
                    max_freq: 0.0,
                },
            )
            .unwrap();
        assert_eq!(v, c(1.5, 0.0));
    }

    #[test]
    fn all_kinds_are_probability_measures() {
        let one = |_: &E| -> Result<Complex64> { Ok(c(1.0, 0.0)) };
        let kinds: Vec<MeasureSequence> = vec![
            MeasureSequence::uniform_count(),
            MeasureSequence::folner_interval(),
            MeasureSequence::delta(IndexSequence::quadratic()),
            MeasureSequence::cesaro(MeasureSequence::uniform_count()),
            MeasureSequence::product(
                MeasureSequence::uniform_count(),
                MeasureSequence::uniform_count(),
            ),
            MeasureSequence::cyclic_uniform(5).unwrap(),
        ];
        for nu in &kinds {
            for n in [1u64, 2, 7, 33] {
                let v = nu
                    .integrate(
                        n,
                        &Integrand::Pointwise {
                            f: &one,
                            max_freq: 0.0,
                        },
                    )
                    .unwrap();
                if nu.needs_quadrature() {
                    assert!((v - c(1.0, 0.0)).norm() <= 1e-10, "{nu} at {n}: {v}");
                } else {
                    // exact for the discrete kinds
                    assert_eq!(v, c(1.0, 0.0), "{nu} at {n}");
                }
            }
        }
    }

    #[test]
    fn folner_mean_of_identity_function() {
        let nu = MeasureSequence::folner_interval();
        let f = |h: &E| -> Result<Complex64> {
            match h {
                E::Real(s) => Ok(c(*s, 0.0)),
                _ => unreachable!(),
            }
        };
        let v = nu
            .integrate(
                2,
                &Integrand::Pointwise {
                    f: &f,
                    max_freq: 0.5,
                },
            )
            .unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn c_estimate_identity_is_exact_one() {
        let u = MeasureSequence::uniform_count();
        let v = u
            .c_estimate(&E::circle(0.0), &Schedule::dyadic(4, 10))
            .unwrap();
        for (_, val) in &v.values {
            assert_eq!(*val, c(1.0, 0.0));
        }
        assert!(v.converged_to(c(1.0, 0.0), 1e-12));
    }

    #[test]
    fn c_estimate_half_vanishes_even_n_exact() {
        // oracle: (1/N) Σ (−1)^n is 0 for even N, 1/N for odd N
        let u = MeasureSequence::uniform_count();
        for n in [2u64, 4, 64, 1001] {
            let v = char_int(&u, 0.5, n);
            let oracle = if n % 2 == 0 { 0.0 } else { 1.0 / n as f64 };
            assert!(
                (v - c(oracle, 0.0)).norm() < 1e-13,
                "n={n} v={v} oracle={oracle}"
            );
        }
        let verdict = u
            .c_estimate(&E::circle(0.5), &Schedule::dyadic(6, 14))
            .unwrap();
        assert!(verdict.converged_to_zero(1e-3));
    }

    #[test]
    fn cesaro_quadratic_weyl_sum_equidistributes() {
        // oracle: direct Weyl-sum summation with the same exact phase
        // reduction the sequence machinery uses
        let theta = std::f64::consts::SQRT_2 - 1.0;
        let n = 1u64 << 20;
        let mut acc = KahanC64::default();
        for m in 1..=n {
            let k = (m * m) as i64;
            let p = crate::numeric::circle_phase(theta, k);
            acc.add(crate::numeric::unit(if p == 0.0 { 0.0 } else { 1.0 - p }));
        }
        let oracle = acc.value() / n as f64;
        assert!(oracle.norm() < 1e-2, "oracle {}", oracle.norm());

        let nu = MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::quadratic()));
        let v = char_int(&nu, theta, n);
        assert!((v - oracle).norm() < 1e-12);
        let verdict = nu
            .c_estimate(
                &E::circle(theta),
                &Schedule::new(vec![n / 4, n / 2, n], 1e-2).unwrap(),
            )
            .unwrap();
        assert!(verdict.converged_to_zero(1e-2));
    }

    #[test]
    fn density_of_evens_and_squares() {
        let u = MeasureSequence::uniform_count();
        // counting oracles: #evens in {0..N−1} = ⌈N/2⌉, #squares = ⌊√(N−1)⌋+1
        for n in [10u64, 64, 1001] {
            let evens = u
                .density_estimate(
                    &SetIndicator::evens(),
                    &Schedule::new(vec![n], 1e-3).unwrap(),
                )
                .unwrap()
                .last_value();
            let expect = n.div_ceil(2) as f64 / n as f64;
            assert!((evens.re - expect).abs() < 1e-14);

            let squares = u
                .density_estimate(
                    &SetIndicator::squares(),
                    &Schedule::new(vec![n], 1e-3).unwrap(),
                )
                .unwrap()
                .last_value();
            let expect = ((n - 1).isqrt() + 1) as f64 / n as f64;
            assert!((squares.re - expect).abs() < 1e-14, "n={n}");
        }
        let v = u
            .density_estimate(&SetIndicator::squares(), &Schedule::dyadic(10, 20))
            .unwrap();
        assert!(v.converged_to_zero(2e-3));
        let v = u
            .density_estimate(&SetIndicator::evens(), &Schedule::dyadic(10, 16))
            .unwrap();
        assert!(v.converged_to(c(0.5, 0.0), 1e-3));
        let v = u
            .density_estimate(&SetIndicator::everything(), &Schedule::dyadic(4, 8))
            .unwrap();
        for (_, val) in &v.values {
            assert_eq!(*val, c(1.0, 0.0));
        }
    }

    #[test]
    fn cesaro_of_shifted_delta_is_uniform_count() {
        // u on ℕ is the Cesàro transform of (δ_{N−1})_N: check the
        // integration identity for N ≤ 64 on indicators and characters
        let u = MeasureSequence::uniform_count();
        let cd = MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::linear(1, -1)));
        let sets = [SetIndicator::evens(), SetIndicator::squares()];
        for n in 1..=64u64 {
            for set in &sets {
                let f = |h: &E| -> Result<Complex64> { Ok(c(f64::from(set.contains(h)), 0.0)) };
                let a = u
                    .integrate(
                        n,
                        &Integrand::Pointwise {
                            f: &f,
                            max_freq: 0.0,
                        },
                    )
                    .unwrap();
                let b = cd
                    .integrate(
                        n,
                        &Integrand::Pointwise {
                            f: &f,
                            max_freq: 0.0,
                        },
                    )
                    .unwrap();
                assert!((a - b).norm() < 1e-12);
            }
            for theta in [0.3, 0.5, 0.123] {
                let a = char_int(&u, theta, n);
                let b = char_int(&cd, theta, n);
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cesaro_of_constant_sequence_is_itself() {
        let const_seq = MeasureSequence::delta(IndexSequence::Polynomial(vec![7]));
        let ces = MeasureSequence::cesaro(const_seq.clone());
        for n in [1u64, 5, 40] {
            for theta in [0.0, 0.3, 0.9] {
                let a = char_int(&const_seq, theta, n);
                let b = char_int(&ces, theta, n);
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn double_cesaro_hand_expansion() {
        // CC(δ_{N−1}) at N=3 with f(n)=n: (1/3)(0 + 0.5 + 1) = 0.5
        let nu = MeasureSequence::cesaro(MeasureSequence::cesaro(MeasureSequence::delta(
            IndexSequence::linear(1, -1),
        )));
        let f = |h: &E| -> Result<Complex64> {
            match h {
                E::Integer(n) => Ok(c(*n as f64, 0.0)),
                _ => unreachable!(),
            }
        };
        let v = nu
            .integrate(
                3,
                &Integrand::Pointwise {
                    f: &f,
                    max_freq: 0.0,
                },
            )
            .unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn product_characters_factorize_exactly() {
        let u2 = MeasureSequence::product(
            MeasureSequence::uniform_count(),
            MeasureSequence::uniform_count(),
        );
        let u = MeasureSequence::uniform_count();
        for (tg, th) in [(0.3, 0.7), (0.5, 0.25), (0.123, 0.456)] {
            for n in [1u64, 2, 17, 256] {
                let g = E::Tuple(vec![E::circle(tg), E::circle(th)]);
                let lhs = u2.integrate(n, &Integrand::Character(&g)).unwrap();
                let rhs = char_int(&u, tg, n) * char_int(&u, th, n);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn product_with_constant_delta_is_embedding() {
        let u = MeasureSequence::uniform_count();
        let d0 = MeasureSequence::delta(IndexSequence::Polynomial(vec![0]));
        let prod = MeasureSequence::product(u.clone(), d0);
        for n in [1u64, 8, 100] {
            for theta in [0.2, 0.77] {
                let g = E::Tuple(vec![E::circle(theta), E::circle(0.9)]);
                let lhs = prod.integrate(n, &Integrand::Character(&g)).unwrap();
                let rhs = char_int(&u, theta, n);
                assert!((lhs - rhs).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn product_pointwise_hand_sum() {
        // u⊗u at N=2, f((m,n)) = m·n → 0.25
        let u2 = MeasureSequence::product(
            MeasureSequence::uniform_count(),
            MeasureSequence::uniform_count(),
        );
        let f = |h: &E| -> Result<Complex64> {
            match h {
                E::Tuple(xs) => match (&xs[0], &xs[1]) {
                    (E::Integer(a), E::Integer(b)) => Ok(c((a * b) as f64, 0.0)),
                    _ => unreachable!(),
                },
                _ => unreachable!(),
            }
        };
        let v = u2
            .integrate(
                2,
                &Integrand::Pointwise {
                    f: &f,
                    max_freq: 0.0,
                },
            )
            .unwrap();
        assert_eq!(v, c(0.25, 0.0));
    }

    #[test]
    fn cesaro_of_uniform_count_fast_path_matches_naive() {
        let cu = MeasureSequence::cesaro(MeasureSequence::uniform_count());
        let u = MeasureSequence::uniform_count();
        for theta in [0.3, 0.5, 0.123] {
            for n in [1u64, 2, 7, 33] {
                let fast = char_int(&cu, theta, n);
                let mut naive = KahanC64::default();
                for m in 1..=n {
                    naive.add(char_int(&u, theta, m));
                }
                let naive = naive.value() / n as f64;
                assert!((fast - naive).norm() < 1e-13, "θ={theta} N={n}");
            }
        }
    }

    #[test]
    fn goes_to_infinity_probes() {
        let u = MeasureSequence::uniform_count();
        let sched = Schedule::dyadic(8, 16);
        let out = u
            .goes_to_infinity_probe(&[SetIndicator::integer_range(0, 9)], &sched)
            .unwrap();
        // counting oracle: ν_N({0..9}) = min(10, N)/N
        for (n, v) in &out[0].1.values {
            let expect = 10.0_f64.min(*n as f64) / *n as f64;
            assert!((v.re - expect).abs() < 1e-14);
        }
        assert!(out[0].1.converged_to_zero(1e-2));

        let cyc = MeasureSequence::cyclic_uniform(6).unwrap();
        let everything_bounded = SetIndicator::new("whole-cyclic", true, |_| true);
        let out = cyc
            .goes_to_infinity_probe(&[everything_bounded], &sched)
            .unwrap();
        for (_, v) in &out[0].1.values {
            assert_eq!(*v, c(1.0, 0.0));
        }
        assert!(!out[0].1.converged_to_zero(1e-3));

        let d2 = MeasureSequence::delta(IndexSequence::quadratic());
        let out = d2
            .goes_to_infinity_probe(&[SetIndicator::integer_range(0, 100)], &sched)
            .unwrap();
        assert!(out[0].1.converged_to_zero(1e-12));

        let err = u.goes_to_infinity_probe(&[SetIndicator::evens()], &sched);
        assert!(err.is_err());
    }

    #[test]
    fn asymptotic_invariance_probes() {
        let u = MeasureSequence::uniform_count();
        let sched = Schedule::dyadic(6, 14);
        let rep = u
            .asymptotic_invariance_probe(&[E::Integer(1)], &[SetIndicator::evens()], &sched)
            .unwrap();
        assert!(rep.consistent);
        for (n, v) in &rep.entries[0].verdict.values {
            assert!(v.norm() <= 1.0 / *n as f64 + 1e-14);
        }

        // identity shift: exactly zero at every N
        let rep = u
            .asymptotic_invariance_probe(&[E::Integer(0)], &[SetIndicator::squares()], &sched)
            .unwrap();
        for (_, v) in &rep.entries[0].verdict.values {
            assert_eq!(*v, c(0.0, 0.0));
        }

        // δ_{2N} is not asymptotically invariant:
        // ν_N(evens − 1) − ν_N(evens) = 0 − 1 = −1 at every N
        let d = MeasureSequence::delta(IndexSequence::linear(2, 0));
        let rep = d
            .asymptotic_invariance_probe(&[E::Integer(1)], &[SetIndicator::evens()], &sched)
            .unwrap();
        assert!(!rep.consistent);
        for (_, v) in &rep.entries[0].verdict.values {
            assert_eq!(*v, c(-1.0, 0.0));
        }
    }

    #[test]
    fn ergodicity_probes() {
        let sched = Schedule::dyadic(10, 18);
        let grid: Vec<E> = (0..100).map(|k| E::circle(k as f64 / 100.0)).collect();
        let u = MeasureSequence::uniform_count();
        let rep = u.ergodicity_probe(&grid, &sched).unwrap();
        assert!(rep.identity_exact);
        assert!(
            rep.consistent_on_grid,
            "nonzero: {:?} undecided: {:?}",
            rep.nonzero, rep.undecided
        );

        // Cesàro(δ_{2n}) has c(1/2) = 1
        let nu = MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::linear(2, 0)));
        let grid = vec![E::circle(0.0), E::circle(0.5), E::circle(0.25)];
        let rep = nu.ergodicity_probe(&grid, &sched).unwrap();
        assert!(!rep.consistent_on_grid);
        assert!(rep
            .nonzero
            .iter()
            .any(|(g, l)| g.approx_eq(&E::circle(0.5)) && (l - c(1.0, 0.0)).norm() < 1e-10));

        // constant δ_0: c ≡ 1 on the grid, not ergodic
        let d0 = MeasureSequence::delta(IndexSequence::Polynomial(vec![0]));
        let rep = d0.ergodicity_probe(&grid, &sched).unwrap();
        assert!(!rep.consistent_on_grid);
        assert_eq!(rep.nonzero.len(), 2);

        let err = u.ergodicity_probe(&[E::circle(0.5)], &sched);
        assert!(err.is_err());
    }

    #[test]
    fn gamma_probes() {
        let sched = Schedule::dyadic(8, 16);
        let grid: Vec<E> = (0..32).map(|k| E::circle(k as f64 / 32.0)).collect();

        let u = MeasureSequence::uniform_count();
        let rep = u.gamma_probe(&grid, &sched).unwrap();
        assert_eq!(rep.members.len(), 1);
        assert!(rep.members[0].0.approx_eq(&E::circle(0.0)));

        let nu = MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::linear(2, 0)));
        let rep = nu.gamma_probe(&grid, &sched).unwrap();
        let mut got: Vec<f64> = rep
            .members
            .iter()
            .map(|(g, _)| match g {
                E::CirclePoint(t) => *t,
                _ => unreachable!(),
            })
            .collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![0.0, 0.5]);
        // closure under the group law on the returned members
        let q = DualPair::CircleInteger;
        for (a, _) in &rep.members {
            for (b, _) in &rep.members {
                let ab = q.combine(Side::G, a, b).unwrap();
                assert!(rep.members.iter().any(|(m, _)| m.approx_eq(&ab)));
            }
        }

        let d0 = MeasureSequence::delta(IndexSequence::Polynomial(vec![0]));
        let rep = d0.gamma_probe(&grid, &sched).unwrap();
        assert_eq!(rep.members.len(), 32);
    }

    #[test]
    fn partial_values_never_exceed_one() {
        let seqs = vec![
            MeasureSequence::uniform_count(),
            MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::quadratic())),
            MeasureSequence::cesaro(MeasureSequence::uniform_count()),
        ];
        for nu in &seqs {
            for theta in [0.0, 1e-9, 0.123456, 0.5, 0.999999] {
                for n in [1u64, 2, 100, 1 << 12] {
                    let v = char_int(nu, theta, n);
                    assert!(
                        v.norm() <= 1.0 + 1e-12,
                        "{nu} θ={theta} N={n}: {}",
                        v.norm()
                    );
                }
            }
        }
        let folner = MeasureSequence::folner_interval();
        for r in [0.0, 1e-22, -1e-22, 1e-9, -0.75, 0.5, 3.25, 1000.0] {
            for n in [1u64, 2, 100, 1 << 12] {
                let v = folner
                    .integrate(n, &Integrand::Character(&E::Real(r)))
                    .unwrap();
                assert!(v.norm() <= 1.0 + 1e-12, "folner r={r} N={n}: {}", v.norm());
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn conjugation_and_boundedness_hold_at_random_points(
            theta in 0.0f64..1.0,
            n in 1u64..4096,
        ) {
            let pair = DualPair::CircleInteger;
            let u = MeasureSequence::uniform_count();
            let g = E::circle(theta);
            let ginv = pair.invert(Side::G, &g).unwrap();
            let v = u.integrate(n, &Integrand::Character(&g)).unwrap();
            let vinv = u.integrate(n, &Integrand::Character(&ginv)).unwrap();
            proptest::prop_assert!(v.norm() <= 1.0 + 1e-12);
            proptest::prop_assert!((vinv - v.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugation_at_finite_n() {
        let pair = DualPair::CircleInteger;
        let seqs = vec![
            MeasureSequence::uniform_count(),
            MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::quadratic())),
        ];
        for nu in &seqs {
            for theta in [0.1, 0.37, 0.5, 0.925] {
                let g = E::circle(theta);
                let ginv = pair.invert(Side::G, &g).unwrap();
                for n in [3u64, 64, 1000] {
                    let a = nu.integrate(n, &Integrand::Character(&ginv)).unwrap();
                    let b = nu.integrate(n, &Integrand::Character(&g)).unwrap().conj();
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn folner_closed_form_matches_quadrature() {
        let nu = MeasureSequence::folner_interval();
        for r in [0.25f64, 1.0, -0.5, 0.1234] {
            for n in [1u64, 4, 16] {
                let exact = nu.integrate(n, &Integrand::Character(&E::Real(r))).unwrap();
                let f = |h: &E| -> Result<Complex64> {
                    Ok(DualPair::RealReal.pair(&E::Real(r), h).unwrap())
                };
                let quad = nu
                    .integrate(
                        n,
                        &Integrand::Pointwise {
                            f: &f,
                            max_freq: r.abs(),
                        },
                    )
                    .unwrap();
                assert!(
                    (exact - quad).norm() < 1e-4,
                    "r={r} n={n} exact={exact} quad={quad}"
                );
            }
        }
    }

    #[test]
    fn cesaro_consistency_on_convergent_cases() {
        // if c_estimate(ν, g) converges, the Cesàro transform converges to
        // the same limit on the extended schedule
        let u = MeasureSequence::uniform_count();
        let cu = MeasureSequence::cesaro(u.clone());
        let sched = Schedule::dyadic(8, 16);
        let extended = Schedule::dyadic(8, 17);
        for theta in [0.3, 0.5, 0.77] {
            let base = u.c_estimate(&E::circle(theta), &sched).unwrap();
            let lim = base.limit().expect("u converges on rational angles");
            let residual = base.residual().unwrap();
            let ces = cu.c_estimate(&E::circle(theta), &extended).unwrap();
            let tol = (2.0 * residual).max(sched.tol);
            assert!(ces.converged_to(lim, tol), "θ={theta}");
        }
    }

    #[test]
    fn index_sequence_parse_and_eval() {
        let cases = [
            ("n^2", vec![0, 0, 1]),
            ("2n", vec![0, 2]),
            ("n-1", vec![-1, 1]),
            ("3n^2-n+5", vec![5, -1, 3]),
            ("7", vec![7]),
        ];
        for (s, coeffs) in cases {
            let idx = IndexSequence::parse(s).unwrap();
            assert_eq!(idx, IndexSequence::Polynomial(coeffs), "{s}");
            let back = IndexSequence::parse(&idx.to_string()).unwrap();
            assert_eq!(back, idx, "roundtrip {s} → {idx}");
        }
        assert_eq!(
            IndexSequence::parse("primes").unwrap(),
            IndexSequence::Primes
        );
        assert_eq!(IndexSequence::Primes.eval(1).unwrap(), 2);
        assert_eq!(IndexSequence::Primes.eval(5).unwrap(), 11);
        assert_eq!(IndexSequence::Primes.eval(100).unwrap(), 541);
        assert_eq!(IndexSequence::quadratic().eval(12).unwrap(), 144);
        assert!(IndexSequence::Polynomial(vec![0; 8][..].to_vec())
            .eval(1)
            .is_ok());
        assert!(IndexSequence::parse("n^^2").is_err());
    }

    #[test]
    fn sequence_parse_roundtrip() {
        for s in [
            "uniform-count",
            "folner-interval",
            "delta(k=n^2)",
            "cesaro(delta(k=2n))",
            "product(uniform-count,cesaro(uniform-count))",
            "cyclic-uniform(5)",
        ] {
            let nu = MeasureSequence::parse(s).unwrap();
            assert_eq!(nu.to_string(), s);
        }
        assert!(MeasureSequence::parse("bogus").is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(vec![8, 4], 1e-3).is_err());
        assert!(Schedule::new(vec![4, 4], 1e-3).is_err());
        assert!(Schedule::new(vec![], 1e-3).is_err());
        assert!(Schedule::new(vec![0, 4], 1e-3).is_err());
        assert!(Schedule::new(vec![4, 8], 0.0).is_err());
        assert!(Schedule::new(vec![4, 8, 16], 1e-3).is_ok());
    }

    #[test]
    fn unbounded_integrand_is_caught() {
        let u = MeasureSequence::uniform_count();
        let f = |h: &E| -> Result<Complex64> {
            match h {
                E::Integer(n) => Ok(c((10.0f64).powi(*n as i32), 0.0)),
                _ => unreachable!(),
            }
        };
        let err = u.integrate(
            32,
            &Integrand::Pointwise {
                f: &f,
                max_freq: 0.0,
            },
        );
        assert!(matches!(err, Err(Error::UnboundedIntegrand { .. })));
    }
}
