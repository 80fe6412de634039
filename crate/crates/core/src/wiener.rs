//! Wiener-type atom detection: the averaged squared transform
//! ‖μ̂‖²_N = ∫|μ̂(h)|² ν_N(dh), its limit candidates, and extremality
//! probes.
//!
//! For good sequences the limit of ‖μ̂‖²_N equals the double-atom sum
//! Σ c_ν(g_i g_j⁻¹) w_i conj(w_j); for ergodic sequences it collapses to
//! Σ|μ{a}|², which is the classical statement that the averages see
//! exactly the atoms. Each identity is evaluated on both sides by
//! independent routes: the left side goes through pointwise |μ̂|²
//! evaluation, the right side through c-value estimation on quotients.

use std::fmt;

use num_complex::Complex64;

use crate::groups::{GroupElement, Side};
use crate::measures::ComplexMeasure;
use crate::numeric::KahanC64;
use crate::sequences::{ConvergenceVerdict, Integrand, MeasureSequence, Schedule};
use crate::{Error, Result};

/// Tolerance for "the limit equals 1" in extremality checks.
pub const TOL_EXTREMAL: f64 = 1e-3;

/// Three-valued outcome for report entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriState {
    Pass,
    Fail,
    Undecided,
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriState::Pass => write!(f, "PASS"),
            TriState::Fail => write!(f, "FAIL"),
            TriState::Undecided => write!(f, "UNDECIDED"),
        }
    }
}

fn check_same_pair(mu: &ComplexMeasure, nu: &MeasureSequence) -> Result<()> {
    if mu.pair() != nu.dual_pair() {
        return Err(Error::InvalidInput(format!(
            "measure on {} paired with sequence on {}",
            mu.pair(),
            nu.dual_pair()
        )));
    }
    Ok(())
}

/// ‖μ̂‖²_N = ∫ |μ̂(h)|² ν_N(dh).
///
/// Discrete sequences evaluate |μ̂(h)|² pointwise as an exact finite sum.
/// Sequences that integrate by quadrature (the Følner interval) instead
/// expand |μ̂|² into its quotient characters and use the closed-form
/// character integrals, so no oscillatory quadrature is involved for
/// purely atomic measures.
pub fn wiener_norm(mu: &ComplexMeasure, nu: &MeasureSequence, n: u64) -> Result<f64> {
    check_same_pair(mu, nu)?;
    if nu.needs_quadrature() && mu.is_discrete() {
        let poly = mu.quotient_poly()?;
        let v = nu.integrate(n, &Integrand::TrigPoly(&poly))?;
        return Ok(v.re.max(0.0));
    }
    let f = |h: &GroupElement| -> Result<Complex64> {
        Ok(Complex64::new(mu.fourier(h)?.norm_sqr(), 0.0))
    };
    let v = nu.integrate(
        n,
        &Integrand::Pointwise {
            f: &f,
            max_freq: mu.frequency_spread(),
        },
    )?;
    Ok(v.re.max(0.0))
}

/// Σ_a |μ{a}|² over the atoms.
pub fn wiener_rhs_atomic(mu: &ComplexMeasure) -> f64 {
    let mut acc = crate::numeric::KahanF64::default();
    for (_, w) in mu.atoms() {
        acc.add(w.norm_sqr());
    }
    acc.value()
}

/// (quotient, merged weight, c-value) triples.
type ResolvedQuotients = Vec<(GroupElement, Complex64, Complex64)>;

/// The quotient expansion with estimated c-values for purely atomic μ, used
/// internally by both [`wiener_rhs_pairing`] and [`wiener_verify`].
///
/// Each unique quotient g_i g_j⁻¹ carries the merged weight Σ w_i conj(w_j);
/// identity quotients contribute c = 1 exactly.
fn pairing_terms(
    mu: &ComplexMeasure,
    nu: &MeasureSequence,
    schedule: &Schedule,
) -> Result<(ResolvedQuotients, Vec<GroupElement>)> {
    let id = mu.pair().identity(Side::G);
    let mut resolved = Vec::new();
    let mut gaps = Vec::new();
    for (q, w) in mu.quotient_poly()? {
        if q.approx_eq(&id) {
            resolved.push((q, w, Complex64::new(1.0, 0.0)));
            continue;
        }
        let verdict = nu.c_estimate(&q, schedule)?;
        match verdict.limit() {
            Some(c) => resolved.push((q, w, c)),
            None => gaps.push(q),
        }
    }
    Ok((resolved, gaps))
}

/// Σ_{i,j} c_ν(g_i g_j⁻¹) w_i conj(w_j) with converged c-values.
///
/// Errors with [`Error::NotGood`] if any required quotient fails to
/// converge on the schedule.
pub fn wiener_rhs_pairing(
    mu: &ComplexMeasure,
    nu: &MeasureSequence,
    schedule: &Schedule,
) -> Result<Complex64> {
    check_same_pair(mu, nu)?;
    let (resolved, gaps) = pairing_terms(mu, nu, schedule)?;
    if let Some(q) = gaps.first() {
        return Err(Error::NotGood {
            quotient: q.to_string(),
        });
    }
    let mut acc = KahanC64::default();
    for (_, w, c) in &resolved {
        acc.add(w * c);
    }
    Ok(acc.value())
}

/// "The limit equals 1" at [`TOL_EXTREMAL`] with a monotone trend over the
/// last three schedule points. Non-monotone but converged-near-1 stays
/// Undecided rather than guessing.
fn extremal_state(lhs: &ConvergenceVerdict) -> TriState {
    let Some(limit) = lhs.limit() else {
        return TriState::Undecided;
    };
    let n = lhs.values.len();
    if n < 3 {
        return TriState::Undecided;
    }
    let d: Vec<f64> = lhs.values[n - 3..]
        .iter()
        .map(|(_, v)| (v - Complex64::new(1.0, 0.0)).norm())
        .collect();
    let monotone = d[1] <= d[0] + 1e-12 && d[2] <= d[1] + 1e-12;
    if d[2] <= TOL_EXTREMAL && monotone {
        TriState::Pass
    } else if (limit - Complex64::new(1.0, 0.0)).norm() > TOL_EXTREMAL {
        TriState::Fail
    } else {
        TriState::Undecided
    }
}

/// Full report on the limit identities for one (μ, ν) pair.
#[derive(Debug, Clone)]
pub struct WienerReport {
    /// ‖μ̂‖²_N along the schedule.
    pub lhs: ConvergenceVerdict,
    pub rhs_atomic: f64,
    /// Double-atom sum with estimated c-values (discrete μ only; None if μ
    /// has a continuous part or some quotient stayed undecided).
    pub rhs_pairing: Option<Complex64>,
    /// c-values at the non-identity atom quotients (the atom form of the
    /// coset statement).
    pub atom_pair_c: Vec<(GroupElement, Complex64)>,
    /// Quotients whose c-value stayed undecided.
    pub pairing_gaps: Vec<GroupElement>,
    /// lim ‖μ̂‖²_N = double-atom sum.
    pub limit_matches_pairing: TriState,
    /// lim ‖μ̂‖²_N = Σ|μ{a}|² (expected under ergodicity).
    pub limit_matches_atomic: TriState,
    /// lim ‖μ̂‖²_N = 1 (extremality of μ; meaningful for probability μ).
    pub extremal: TriState,
    pub is_dirac: bool,
    pub is_probability: bool,
}

impl WienerReport {
    fn match_tol(&self, schedule_tol: f64) -> f64 {
        let residual = self.lhs.residual().unwrap_or(0.0);
        schedule_tol.max(3.0 * residual)
    }
}

impl fmt::Display for WienerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let as_property = |t: TriState| match t {
            TriState::Pass => "yes",
            TriState::Fail => "no",
            TriState::Undecided => "undecided",
        };
        writeln!(f, "lhs ‖μ̂‖²_N: {}", self.lhs.status)?;
        writeln!(f, "rhs atomic Σ|μ{{a}}|²: {:.12}", self.rhs_atomic)?;
        match self.rhs_pairing {
            Some(v) => writeln!(f, "rhs pairing Σ c·w: {:.12}", v)?,
            None => writeln!(f, "rhs pairing Σ c·w: unavailable")?,
        }
        writeln!(
            f,
            "limit = pairing sum: {}",
            as_property(self.limit_matches_pairing)
        )?;
        writeln!(
            f,
            "limit = atomic sum:  {}",
            as_property(self.limit_matches_atomic)
        )?;
        writeln!(f, "extremal (limit = 1): {}", as_property(self.extremal))?;
        writeln!(f, "dirac: {}", self.is_dirac)
    }
}

/// Evaluate ‖μ̂‖²_N along the schedule and compare against both limit
/// candidates. Undecided inputs yield Undecided verdicts, never false
/// positives.
pub fn wiener_verify(
    mu: &ComplexMeasure,
    nu: &MeasureSequence,
    schedule: &Schedule,
) -> Result<WienerReport> {
    check_same_pair(mu, nu)?;
    let mut values = Vec::with_capacity(schedule.points().len());
    for &n in schedule.points() {
        values.push((n, Complex64::new(wiener_norm(mu, nu, n)?, 0.0)));
    }
    let lhs = ConvergenceVerdict::classify(values, schedule.tol);
    let rhs_atomic = wiener_rhs_atomic(mu);

    let (rhs_pairing, atom_pair_c, pairing_gaps) = if mu.is_discrete() {
        let (resolved, gaps) = pairing_terms(mu, nu, schedule)?;
        let id = mu.pair().identity(Side::G);
        let atom_pair_c: Vec<(GroupElement, Complex64)> = resolved
            .iter()
            .filter(|(q, _, _)| !q.approx_eq(&id))
            .map(|(q, _, c)| (q.clone(), *c))
            .collect();
        if gaps.is_empty() {
            let mut acc = KahanC64::default();
            for (_, w, c) in &resolved {
                acc.add(w * c);
            }
            (Some(acc.value()), atom_pair_c, gaps)
        } else {
            (None, atom_pair_c, gaps)
        }
    } else {
        (None, Vec::new(), Vec::new())
    };

    let is_dirac = mu.is_discrete()
        && mu.atoms().len() == 1
        && (mu.atoms()[0].1 - Complex64::new(1.0, 0.0)).norm() <= 1e-10;

    let mut report = WienerReport {
        lhs,
        rhs_atomic,
        rhs_pairing,
        atom_pair_c,
        pairing_gaps,
        limit_matches_pairing: TriState::Undecided,
        limit_matches_atomic: TriState::Undecided,
        extremal: TriState::Undecided,
        is_dirac,
        is_probability: mu.is_probability(),
    };
    let tol = report.match_tol(schedule.tol);
    if let Some(lim) = report.lhs.limit() {
        if let Some(pairing) = report.rhs_pairing {
            report.limit_matches_pairing = if (lim - pairing).norm() <= tol {
                TriState::Pass
            } else {
                TriState::Fail
            };
        }
        report.limit_matches_atomic = if (lim - Complex64::new(rhs_atomic, 0.0)).norm() <= tol {
            TriState::Pass
        } else {
            TriState::Fail
        };
    }
    if report.is_probability {
        report.extremal = extremal_state(&report.lhs);
    }
    Ok(report)
}

/// One probed extremality violator: a non-identity g with c_ν(g) ≈ 1, plus
/// the witness confirmation that ½(δ_1 + δ_g) has Wiener limit 1.
#[derive(Debug, Clone)]
pub struct ExtremalityViolator {
    pub point: GroupElement,
    pub c_value: Complex64,
    pub witness_limit: ConvergenceVerdict,
    pub witness_confirmed: TriState,
}

#[derive(Debug, Clone)]
pub struct ExtremalityReport {
    pub grid_size: usize,
    pub violators: Vec<ExtremalityViolator>,
    /// Grid points whose c-value stayed undecided.
    pub gaps: Vec<GroupElement>,
    /// No violators and no gaps: consistent with "extremal for discrete
    /// measures" on this grid.
    pub consistent_on_grid: bool,
}

/// Probe the pointwise extremality condition on a grid: find non-identity
/// points with c_ν(g) ≈ 1 and confirm each with its two-atom witness
/// measure.
pub fn extremality_check(
    nu: &MeasureSequence,
    grid: &[GroupElement],
    schedule: &Schedule,
) -> Result<ExtremalityReport> {
    let pair = nu.dual_pair().clone();
    let id = pair.identity(Side::G);
    if !grid.iter().any(|g| g.approx_eq(&id)) {
        return Err(Error::InvalidInput(
            "extremality probe grid must contain the identity".into(),
        ));
    }
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let mut violators = Vec::new();
    let mut gaps = Vec::new();
    for g in grid {
        if g.approx_eq(&id) {
            continue;
        }
        let verdict = nu.c_estimate(g, schedule)?;
        match verdict.limit() {
            Some(c) if (c - one).norm() <= TOL_EXTREMAL => {
                let witness = ComplexMeasure::discrete(
                    pair.clone(),
                    vec![(id.clone(), half), (g.clone(), half)],
                )?;
                let mut values = Vec::with_capacity(schedule.points().len());
                for &n in schedule.points() {
                    values.push((n, Complex64::new(wiener_norm(&witness, nu, n)?, 0.0)));
                }
                let witness_limit = ConvergenceVerdict::classify(values, schedule.tol);
                let witness_confirmed = extremal_state(&witness_limit);
                violators.push(ExtremalityViolator {
                    point: g.clone(),
                    c_value: c,
                    witness_limit,
                    witness_confirmed,
                });
            }
            Some(_) => {}
            None => gaps.push(g.clone()),
        }
    }
    let consistent_on_grid = violators.is_empty() && gaps.is_empty();
    Ok(ExtremalityReport {
        grid_size: grid.len(),
        violators,
        gaps,
        consistent_on_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{DualPair, GroupElement as E};
    use crate::measures::AcDensity;
    use crate::sequences::IndexSequence;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle_measure(atoms: &[(f64, f64)]) -> ComplexMeasure {
        ComplexMeasure::discrete(
            DualPair::CircleInteger,
            atoms
                .iter()
                .map(|(t, w)| (E::circle(*t), c(*w, 0.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dirac_norm_is_one_at_every_n() {
        let sequences = vec![
            MeasureSequence::uniform_count(),
            MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::quadratic())),
        ];
        for nu in &sequences {
            for theta in [0.0, 0.3, 0.71] {
                let mu = ComplexMeasure::dirac(DualPair::CircleInteger, E::circle(theta)).unwrap();
                for n in [1u64, 2, 63, 1024] {
                    let v = wiener_norm(&mu, nu, n).unwrap();
                    assert!((v - 1.0).abs() < 1e-12, "{nu} θ={theta} N={n}: {v}");
                }
            }
        }
        let folner = MeasureSequence::folner_interval();
        let mu = ComplexMeasure::dirac(DualPair::RealReal, E::Real(1.25)).unwrap();
        for n in [1u64, 16, 4096] {
            let v = wiener_norm(&mu, &folner, n).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_atom_hand_value_at_n2() {
        // ½(δ_0 + δ_{1/2}) with u at N=2: ½(|μ̂(0)|² + |μ̂(1)|²) = ½(1+0)
        let mu = circle_measure(&[(0.0, 0.5), (0.5, 0.5)]);
        let v = wiener_norm(&mu, &MeasureSequence::uniform_count(), 2).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn arc_length_norm_decays_like_one_over_n() {
        // character orthogonality: only μ̂(0) = 1 survives
        let mu = ComplexMeasure::with_density(
            DualPair::CircleInteger,
            vec![],
            AcDensity::uniform_circle(1.0),
        )
        .unwrap();
        let u = MeasureSequence::uniform_count();
        for n in [1u64, 4, 64, 512] {
            let v = wiener_norm(&mu, &u, n).unwrap();
            assert!((v - 1.0 / n as f64).abs() < 1e-10, "N={n}: {v}");
        }
    }

    #[test]
    fn rhs_atomic_examples() {
        let dirac = circle_measure(&[(0.2, 1.0)]);
        assert_eq!(wiener_rhs_atomic(&dirac), 1.0);

        let two = circle_measure(&[(0.0, 0.3), (0.25, 0.7)]);
        assert!((wiener_rhs_atomic(&two) - 0.58).abs() < 1e-15);

        let ac = ComplexMeasure::with_density(
            DualPair::CircleInteger,
            vec![],
            AcDensity::uniform_circle(1.0),
        )
        .unwrap();
        assert_eq!(wiener_rhs_atomic(&ac), 0.0);
    }

    #[test]
    fn pairing_sum_examples() {
        let sched = Schedule::dyadic(8, 16);
        let u = MeasureSequence::uniform_count();

        // ergodic case: pairing sum = atomic sum
        let mu = circle_measure(&[(0.0, 0.3), (0.25, 0.7)]);
        let v = wiener_rhs_pairing(&mu, &u, &sched).unwrap();
        assert!((v - c(0.58, 0.0)).norm() < 1e-2);

        // c(g) = 1 case: ¼(2 + c + c̄) = 1
        let nu = MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::linear(2, 0)));
        let mu = circle_measure(&[(0.0, 0.5), (0.5, 0.5)]);
        let v = wiener_rhs_pairing(&mu, &nu, &sched).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-10);

        // single atom: c(1)·1 = 1 exactly
        let mu = circle_measure(&[(0.37, 1.0)]);
        let v = wiener_rhs_pairing(&mu, &u, &sched).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn pairing_sum_not_good_error() {
        // δ_N itself: c(θ) = lim e^{−2πiθN} does not exist for generic θ
        let nu = MeasureSequence::delta(IndexSequence::linear(1, 0));
        let mu = circle_measure(&[(0.0, 0.5), (std::f64::consts::SQRT_2 - 1.0, 0.5)]);
        let err = wiener_rhs_pairing(&mu, &nu, &Schedule::dyadic(6, 14));
        assert!(matches!(err, Err(Error::NotGood { .. })));
    }

    #[test]
    fn finite_n_fubini_identity() {
        // wiener_norm (pointwise |μ̂|² route) equals the double-atom sum of
        // per-quotient character integrals at the same N
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sequences = vec![
            MeasureSequence::uniform_count(),
            MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::linear(2, 0))),
        ];
        for _ in 0..20 {
            let k = rng.gen_range(1..=5);
            let mut atoms = Vec::new();
            let mut total = 0.0;
            for _ in 0..k {
                let w: f64 = rng.gen_range(0.05..1.0);
                total += w;
                atoms.push((rng.gen_range(0u32..32) as f64 / 32.0, w));
            }
            for a in &mut atoms {
                a.1 /= total;
            }
            let mu = circle_measure(&atoms);
            for nu in &sequences {
                for n in [16u64, 256, 4096] {
                    let direct = wiener_norm(&mu, nu, n).unwrap();
                    let mut acc = KahanC64::default();
                    for (q, w) in mu.quotient_poly().unwrap() {
                        let ch = nu.integrate(n, &Integrand::Character(&q)).unwrap();
                        acc.add(w * ch);
                    }
                    let expansion = acc.value();
                    assert!(
                        (direct - expansion.re).abs() < 1e-10,
                        "{nu} N={n}: {direct} vs {expansion}"
                    );
                }
            }
        }
    }

    #[test]
    fn norm_bounded_by_total_variation_squared() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let u = MeasureSequence::uniform_count();
        for _ in 0..20 {
            let k = rng.gen_range(1..=4);
            let atoms: Vec<(E, Complex64)> = (0..k)
                .map(|_| {
                    (
                        E::circle(rng.gen_range(0.0..1.0)),
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    )
                })
                .collect();
            let mu = ComplexMeasure::discrete(DualPair::CircleInteger, atoms).unwrap();
            let tv2 = mu.total_variation().powi(2);
            for n in [1u64, 7, 200] {
                let v = wiener_norm(&mu, &u, n).unwrap();
                assert!((0.0..=tv2 + 1e-10).contains(&v));
            }
        }
    }

    #[test]
    fn probability_measures_have_limits_at_most_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let sequences = vec![
            MeasureSequence::uniform_count(),
            MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::linear(2, 0))),
        ];
        for _ in 0..20 {
            let k = rng.gen_range(1..=4);
            let mut atoms: Vec<(f64, f64)> = (0..k)
                .map(|_| {
                    (
                        rng.gen_range(0u32..32) as f64 / 32.0,
                        rng.gen_range(0.05..1.0),
                    )
                })
                .collect();
            let total: f64 = atoms.iter().map(|(_, w)| w).sum();
            for a in &mut atoms {
                a.1 /= total;
            }
            let mu = circle_measure(&atoms);
            assert!(wiener_rhs_atomic(&mu) <= 1.0 + 1e-12);
            for nu in &sequences {
                let sched = Schedule::dyadic(8, 14);
                let rep = wiener_verify(&mu, nu, &sched).unwrap();
                if let Some(lim) = rep.lhs.limit() {
                    assert!(lim.re <= 1.0 + sched.tol, "limit {lim} above 1");
                }
            }
        }
    }

    #[test]
    fn ergodic_limit_matches_atomic_on_random_measures() {
        // on u, |lhs(2^16) − Σ|w|²| < 1e-2 for rational-angle atoms
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let u = MeasureSequence::uniform_count();
        for _ in 0..50 {
            let k = rng.gen_range(1..=5);
            let mut atoms = Vec::new();
            let mut total = 0.0;
            for _ in 0..k {
                let w: f64 = rng.gen_range(0.05..1.0);
                total += w;
                atoms.push((rng.gen_range(0u32..32) as f64 / 32.0, w));
            }
            for a in &mut atoms {
                a.1 /= total;
            }
            let mu = circle_measure(&atoms);
            let lhs = wiener_norm(&mu, &u, 1 << 16).unwrap();
            assert!(
                (lhs - wiener_rhs_atomic(&mu)).abs() < 1e-2,
                "atoms {atoms:?}"
            );
        }
    }

    #[test]
    fn verify_report_two_atoms_on_u() {
        let mu = circle_measure(&[(0.0, 0.3), (0.25, 0.7)]);
        let u = MeasureSequence::uniform_count();
        let rep = wiener_verify(&mu, &u, &Schedule::dyadic(8, 16)).unwrap();
        assert!(rep.lhs.converged_to(c(0.58, 0.0), 1e-2));
        assert_eq!(rep.limit_matches_atomic, TriState::Pass);
        assert_eq!(rep.limit_matches_pairing, TriState::Pass);
        assert_eq!(rep.extremal, TriState::Fail);
        assert!(!rep.is_dirac);
        assert!(rep.is_probability);
    }

    #[test]
    fn verify_report_coset_counterexample() {
        // ½(δ_0 + δ_{1/2}) with Cesàro(δ_{2n}): limit 1 though not Dirac;
        // both atoms lie in a coset of Γ_ν = {0, ½}
        let nu = MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::linear(2, 0)));
        let mu = circle_measure(&[(0.0, 0.5), (0.5, 0.5)]);
        let rep = wiener_verify(&mu, &nu, &Schedule::dyadic(8, 14)).unwrap();
        for (_, v) in &rep.lhs.values {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
        assert_eq!(rep.extremal, TriState::Pass);
        assert!(!rep.is_dirac);
        // atom form of the coset statement: c = 1 on every atom quotient
        assert!(!rep.atom_pair_c.is_empty());
        for (_, cv) in &rep.atom_pair_c {
            assert!((cv - c(1.0, 0.0)).norm() < 1e-10);
        }
        assert_eq!(rep.limit_matches_pairing, TriState::Pass);
        // and the atomic sum ½ is NOT the limit: the sequence is not ergodic
        assert_eq!(rep.limit_matches_atomic, TriState::Fail);
    }

    #[test]
    fn verify_report_dirac() {
        let mu = circle_measure(&[(0.77, 1.0)]);
        let u = MeasureSequence::uniform_count();
        let rep = wiener_verify(&mu, &u, &Schedule::dyadic(6, 12)).unwrap();
        assert!(rep.is_dirac);
        assert_eq!(rep.extremal, TriState::Pass);
        for (_, v) in &rep.lhs.values {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn extremality_probe_u_has_no_violators() {
        let u = MeasureSequence::uniform_count();
        let grid: Vec<E> = (0..32).map(|k| E::circle(k as f64 / 32.0)).collect();
        let rep = extremality_check(&u, &grid, &Schedule::dyadic(8, 16)).unwrap();
        assert!(
            rep.consistent_on_grid,
            "violators: {:?}",
            rep.violators.len()
        );
    }

    #[test]
    fn extremality_probe_finds_the_half_violator() {
        let nu = MeasureSequence::cesaro(MeasureSequence::delta(IndexSequence::linear(2, 0)));
        let grid: Vec<E> = (0..32).map(|k| E::circle(k as f64 / 32.0)).collect();
        let rep = extremality_check(&nu, &grid, &Schedule::dyadic(8, 14)).unwrap();
        assert_eq!(rep.violators.len(), 1);
        let v = &rep.violators[0];
        assert!(v.point.approx_eq(&E::circle(0.5)));
        assert_eq!(v.witness_confirmed, TriState::Pass);
        assert!(!rep.consistent_on_grid);
    }

    #[test]
    fn extremality_probe_constant_sequence_all_violate() {
        let d0 = MeasureSequence::delta(IndexSequence::Polynomial(vec![0]));
        let grid: Vec<E> = (0..8).map(|k| E::circle(k as f64 / 8.0)).collect();
        let rep = extremality_check(&d0, &grid, &Schedule::dyadic(6, 12)).unwrap();
        assert_eq!(rep.violators.len(), 7);
        for v in &rep.violators {
            assert_eq!(v.witness_confirmed, TriState::Pass);
        }
    }

    #[test]
    fn cyclic_pair_is_exact_parseval() {
        // uniform on ℤ_m is ergodic, and at finite m the atom identity is
        // exact: (1/m)Σ_k |μ̂(k)|² = Σ_j |w_j|² by character orthogonality
        let m = 7u64;
        let pair = DualPair::cyclic(m).unwrap();
        let nu = MeasureSequence::cyclic_uniform(m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let mut atoms: Vec<(E, Complex64)> = Vec::new();
            for j in 0..m {
                if rng.gen_bool(0.6) {
                    atoms.push((
                        E::residue(j as i64, m),
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    ));
                }
            }
            if atoms.is_empty() {
                continue;
            }
            let mu = ComplexMeasure::discrete(pair.clone(), atoms).unwrap();
            for n in [1u64, 5, 100] {
                let lhs = wiener_norm(&mu, &nu, n).unwrap();
                assert!((lhs - wiener_rhs_atomic(&mu)).abs() < 1e-12);
            }
            let rep =
                wiener_verify(&mu, &nu, &Schedule::new(vec![1, 2, 3], 1e-6).unwrap()).unwrap();
            assert_eq!(rep.limit_matches_atomic, TriState::Pass);
            assert_eq!(rep.limit_matches_pairing, TriState::Pass);
        }
    }

    #[test]
    fn product_pair_norm_against_product_sequence() {
        // two-atom measure on 𝕋×𝕋 against u⊗u: quotients factor, both
        // atoms separate in each coordinate, limit is Σ|w|² = ½
        let pair = DualPair::product(DualPair::CircleInteger, DualPair::CircleInteger);
        let mu = ComplexMeasure::discrete(
            pair,
            vec![
                (E::Tuple(vec![E::circle(0.0), E::circle(0.25)]), c(0.5, 0.0)),
                (E::Tuple(vec![E::circle(0.5), E::circle(0.75)]), c(0.5, 0.0)),
            ],
        )
        .unwrap();
        let uu = MeasureSequence::product(
            MeasureSequence::uniform_count(),
            MeasureSequence::uniform_count(),
        );
        let rep =
            wiener_verify(&mu, &uu, &Schedule::new(vec![64, 128, 256], 1e-2).unwrap()).unwrap();
        assert!(rep.lhs.converged_to(c(0.5, 0.0), 1e-1));
        assert_eq!(rep.limit_matches_pairing, TriState::Pass);
    }

    #[test]
    fn continuous_measure_on_folner_vanishes_like_sinc() {
        // box density on [0,1]: |μ̂(s)|² = sinc²(πs), so the averaged norm is
        // (1/N)∫₀ᴺ sinc²(πs) ds ≈ 1/(2N); oracle by direct Riemann sum
        let mu = ComplexMeasure::with_density(
            DualPair::RealReal,
            vec![],
            crate::measures::AcDensity::uniform_real(0.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        let folner = MeasureSequence::folner_interval();
        let n = 16u64;
        let m = 1 << 18;
        let mut acc = 0.0;
        for i in 0..m {
            let s = n as f64 * (i as f64 + 0.5) / m as f64;
            let x = std::f64::consts::PI * s;
            let v = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
            acc += v * v;
        }
        let oracle = acc / m as f64;
        let lhs = wiener_norm(&mu, &folner, n).unwrap();
        assert!((lhs - oracle).abs() < 1e-3, "lhs {lhs} oracle {oracle}");
        assert_eq!(wiener_rhs_atomic(&mu), 0.0);
    }

    #[test]
    fn folner_real_pair_closed_form() {
        // ½(δ_0 + δ_1) on ℝ against the Følner interval: norm = ½ + O(1/N)
        let mu = ComplexMeasure::discrete(
            DualPair::RealReal,
            vec![(E::Real(0.0), c(0.5, 0.0)), (E::Real(1.0), c(0.5, 0.0))],
        )
        .unwrap();
        let folner = MeasureSequence::folner_interval();
        for n in [16u64, 256, 16384] {
            let v = wiener_norm(&mu, &folner, n).unwrap();
            assert!((v - 0.5).abs() < 1e-12, "N={n}: {v}");
        }
    }
}
