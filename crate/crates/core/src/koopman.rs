//! Numerical form of the Koopman–von Neumann equivalence for measure
//! sequences: the Cesàro-style average ∫f dν_N tends to zero exactly when
//! every superlevel set {f ≥ ε} has ν-density zero. Both sides are probed
//! along a schedule and cross-checked with the finite-N Markov and reverse
//! bounds that drive the proof.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::groups::{DualPair, GroupElement, Side};
use crate::sequences::{ConvergenceVerdict, Integrand, MeasureSequence, Schedule, SetIndicator};
use crate::{Error, Result};

/// A nonnegative bounded function on H with a declared bound M.
#[derive(Clone)]
pub struct BoundedFn {
    name: String,
    bound: f64,
    f: Arc<dyn Fn(&GroupElement) -> f64 + Send + Sync>,
}

impl fmt::Debug for BoundedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundedFn({} ≤ {})", self.name, self.bound)
    }
}

impl BoundedFn {
    pub fn new(
        name: impl Into<String>,
        bound: f64,
        f: impl Fn(&GroupElement) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BoundedFn {
            name: name.into(),
            bound,
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, h: &GroupElement) -> f64 {
        (self.f)(h)
    }

    /// 0/1 indicator of a set.
    pub fn indicator(set: SetIndicator) -> Self {
        let name = format!("indicator:{}", set.name());
        BoundedFn::new(name, 1.0, move |h| f64::from(set.contains(h)))
    }

    /// 1/(n+1) on nonnegative integers (and 1/(|n|+1) elsewhere on ℤ).
    pub fn harmonic() -> Self {
        BoundedFn::new("harmonic", 1.0, |h| match h {
            GroupElement::Integer(n) => 1.0 / (n.unsigned_abs() as f64 + 1.0),
            _ => 0.0,
        })
    }

    /// a·Re⟨g, h⟩ + b with a, b ≥ 0 and a ≤ b, so the value stays in
    /// [0, a+b].
    pub fn char_re_affine(pair: DualPair, g: GroupElement, a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a <= b) {
            return Err(Error::InvalidInput(
                "character affine map needs 0 ≤ a ≤ b to stay nonnegative".into(),
            ));
        }
        if !pair.contains(Side::G, &g) {
            return Err(Error::ModelMismatch {
                pair: pair.to_string(),
                side: Side::G,
                element: g.to_string(),
            });
        }
        let name = format!("char-re:{g}:{a}:{b}");
        Ok(BoundedFn::new(name, a + b, move |h| {
            a * pair.pair_unchecked(&g, h).re + b
        }))
    }

    pub fn constant(c: f64) -> Self {
        BoundedFn::new(format!("const:{c}"), c.max(0.0), move |_| c)
    }

    /// Parse the textual function syntax used by configs:
    /// `indicator:<set>`, `harmonic`, `const:<c>`,
    /// `char-re:<element>:<a>:<b>`.
    pub fn parse(s: &str, pair: &DualPair) -> Result<Self> {
        let s = s.trim();
        if s == "harmonic" {
            return Ok(Self::harmonic());
        }
        if let Some(rest) = s.strip_prefix("indicator:") {
            return Ok(Self::indicator(SetIndicator::parse(rest)?));
        }
        if let Some(rest) = s.strip_prefix("const:") {
            let c: f64 = rest
                .parse()
                .map_err(|e| Error::Parse(format!("constant `{rest}`: {e}")))?;
            return Ok(Self::constant(c));
        }
        if let Some(rest) = s.strip_prefix("char-re:") {
            let mut parts = rest.rsplitn(3, ':');
            let b: f64 = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|e| Error::Parse(format!("char-re offset: {e}")))?;
            let a: f64 = parts
                .next()
                .ok_or_else(|| Error::Parse("char-re needs element:a:b".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("char-re scale: {e}")))?;
            let g = GroupElement::parse(
                parts
                    .next()
                    .ok_or_else(|| Error::Parse("char-re needs element:a:b".into()))?,
            )?;
            return Self::char_re_affine(pair.clone(), g, a, b);
        }
        Err(Error::Parse(format!("unknown bounded function `{s}`")))
    }
}

/// How the two sides of the equivalence came out.
#[derive(Debug, Clone, PartialEq)]
pub enum KvnEquivalence {
    BothZero,
    BothNonzero,
    /// A genuine contradiction between the sides; if real, this flags an
    /// implementation bug, not new mathematics.
    Inconsistent(String),
    Undecided,
}

/// Report of the equivalence probe plus the finite-N bound checks.
#[derive(Debug, Clone)]
pub struct KvnReport {
    pub lhs: ConvergenceVerdict,
    pub superlevel: Vec<(f64, ConvergenceVerdict)>,
    pub verdict: KvnEquivalence,
    /// ν_N({f ≥ ε}) ≤ (1/ε)∫f dν_N at every schedule point.
    pub markov_ok: bool,
    pub max_markov_violation: f64,
    /// ∫f dν_N ≤ ε + M·ν_N({f ≥ ε}) at every schedule point.
    pub reverse_ok: bool,
    pub max_reverse_violation: f64,
}

fn lhs_integrand<'a>(f: &'a BoundedFn) -> impl Fn(&GroupElement) -> Result<Complex64> + 'a {
    move |h: &GroupElement| {
        let v = f.eval(h);
        if !(v >= -1e-12) || v > f.bound() + 1e-12 {
            return Err(Error::BoundViolation {
                at: h.to_string(),
                value: v,
                bound: f.bound(),
            });
        }
        Ok(Complex64::new(v, 0.0))
    }
}

/// Partial values of ∫f dν_N; Converged-to-zero means the limit cleared
/// the schedule tolerance.
pub fn kvn_lhs(
    f: &BoundedFn,
    nu: &MeasureSequence,
    schedule: &Schedule,
) -> Result<ConvergenceVerdict> {
    let g = lhs_integrand(f);
    let mut values = Vec::with_capacity(schedule.points().len());
    for &n in schedule.points() {
        let v = nu.integrate(
            n,
            &Integrand::Pointwise {
                f: &g,
                max_freq: 4.0,
            },
        )?;
        values.push((n, v));
    }
    Ok(ConvergenceVerdict::classify(values, schedule.tol))
}

/// Density verdicts of the superlevel sets {f ≥ ε}, one per ε.
pub fn kvn_superlevel_densities(
    f: &BoundedFn,
    nu: &MeasureSequence,
    eps_list: &[f64],
    schedule: &Schedule,
) -> Result<Vec<(f64, ConvergenceVerdict)>> {
    validate_eps(eps_list)?;
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let set = superlevel_set(f.clone(), eps);
        out.push((eps, nu.density_estimate(&set, schedule)?));
    }
    Ok(out)
}

fn superlevel_set(f: BoundedFn, eps: f64) -> SetIndicator {
    let name = format!("superlevel:{}:{eps}", f.name());
    SetIndicator::new(name, false, move |h| f.eval(h) >= eps)
}

fn validate_eps(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("ε list must be nonempty".into()));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("ε values must be positive".into()));
    }
    if eps_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "ε list must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Default ε grid {10⁻³, 10⁻², 10⁻¹}.
pub fn default_eps() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1]
}

/// Run both sides of the equivalence and the finite-N bound checks.
pub fn kvn_report(
    f: &BoundedFn,
    nu: &MeasureSequence,
    eps_list: &[f64],
    schedule: &Schedule,
) -> Result<KvnReport> {
    validate_eps(eps_list)?;
    let lhs = kvn_lhs(f, nu, schedule)?;
    let superlevel = kvn_superlevel_densities(f, nu, eps_list, schedule)?;

    // finite-N Markov and reverse bounds, with quadrature slack where the
    // sequence integrates by quadrature
    let mut markov_ok = true;
    let mut reverse_ok = true;
    let mut max_markov = 0.0f64;
    let mut max_reverse = 0.0f64;
    for (i, &n) in schedule.points().iter().enumerate() {
        let slack = 1e-12 + f.bound() * nu.integration_tolerance(n);
        let lhs_n = lhs.values[i].1.re;
        for (eps, dens) in &superlevel {
            let d_n = dens.values[i].1.re;
            let markov_gap = d_n - lhs_n / eps;
            max_markov = max_markov.max(markov_gap);
            if markov_gap > slack * (1.0 + 1.0 / eps) {
                markov_ok = false;
            }
            let reverse_gap = lhs_n - (eps + f.bound() * d_n);
            max_reverse = max_reverse.max(reverse_gap);
            if reverse_gap > slack * (1.0 + f.bound()) {
                reverse_ok = false;
            }
        }
    }

    let tol = schedule.tol;
    let lhs_state = lhs.limit().map(|l| l.norm() <= tol);
    let dens_states: Vec<Option<bool>> = superlevel
        .iter()
        .map(|(_, v)| v.limit().map(|l| l.norm() <= tol))
        .collect();
    let eps_min = eps_list[0];

    let verdict = match lhs_state {
        Some(true) => {
            if let Some((eps, _)) = superlevel
                .iter()
                .zip(&dens_states)
                .find(|(_, s)| **s == Some(false))
                .map(|(pair, _)| pair)
            {
                KvnEquivalence::Inconsistent(format!(
                    "average vanishes but the superlevel set at ε={eps} keeps positive density"
                ))
            } else if dens_states.iter().all(|s| *s == Some(true)) {
                KvnEquivalence::BothZero
            } else {
                KvnEquivalence::Undecided
            }
        }
        Some(false) => {
            let lhs_lim = lhs.limit().unwrap().norm();
            if dens_states.iter().all(|s| *s == Some(true)) && lhs_lim > eps_min + tol {
                KvnEquivalence::Inconsistent(format!(
                    "average converges to {lhs_lim} > ε_min={eps_min} but every probed superlevel density vanishes"
                ))
            } else if dens_states.contains(&Some(false)) {
                KvnEquivalence::BothNonzero
            } else {
                KvnEquivalence::Undecided
            }
        }
        None => KvnEquivalence::Undecided,
    };

    Ok(KvnReport {
        lhs,
        superlevel,
        verdict,
        markov_ok,
        max_markov_violation: max_markov,
        reverse_ok,
        max_reverse_violation: max_reverse,
    })
}
