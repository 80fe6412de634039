//! Finite-dimensional contraction systems: the splitting of the space into
//! a unitary part and a weakly stable part, eigenprojections onto joint
//! character eigenspaces, and the mean limit
//! ∫|(T_m x|y)|² ν_N(dm) → Σ_a |(P_a x|y)|².
//!
//! Three semigroup models are supported: powers of a single contraction
//! (ℕ ⊂ ℤ), a sampled one-parameter flow e^{tA} (ℝ_{≥0} ⊂ ℝ), and a
//! periodic unitary action of a finite cyclic group. The isometric
//! subspace X₁ is computed twice — once from the kernels of the defect
//! operators T*ⁿTⁿ − I and TⁿT*ⁿ − I, once as the span of unimodular
//! eigenvectors — and the two constructions are cross-checked before
//! anything downstream trusts them.

use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::groups::{DualPair, GroupElement};
use crate::linalg::{
    eigen_decomposition, expm, hermitian_eigen, kernel_basis, kernel_complement,
    max_principal_angle_sin, normal_eigen, operator_norm, orthonormal_columns, CMatrix, CVector,
};
use crate::numeric::KahanF64;
use crate::sequences::{ConvergenceVerdict, Integrand, MeasureSequence, Schedule, SetIndicator};
use crate::{Error, Result};

/// Operator-norm slack allowed above 1 for "contraction".
pub const TOL_CONTRACTION: f64 = 1e-8;
/// |λ| within this of 1 counts as unimodular.
pub const TOL_UNIMOD: f64 = 1e-6;
/// Eigenvalue cluster merge radius.
pub const TOL_CLUSTER: f64 = 1e-6;
/// Default tolerance for the mean-limit verification.
pub const TOL_GOLDSTEIN: f64 = 1e-2;
/// Agreement required between the two X₁ constructions (sin of the largest
/// principal angle).
const CROSS_CHECK_TOL: f64 = 1e-7;

/// A semigroup acting by contractions on ℂ^dim.
#[derive(Debug, Clone)]
pub enum ContractionSystem {
    /// n ↦ Tⁿ for n ∈ ℕ ⊂ ℤ.
    Power { t: CMatrix },
    /// t ↦ e^{tA} for t ∈ ℝ_{≥0} ⊂ ℝ.
    SampledFlow { generator: CMatrix },
    /// j ↦ Uʲ on ℤ_m, with U^m = I.
    FiniteAction { modulus: u64, u: CMatrix },
}

fn check_square(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "{what} must be square and nonempty, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

impl ContractionSystem {
    pub fn power(t: CMatrix) -> Result<Self> {
        check_square(&t, "power-system matrix")?;
        Ok(ContractionSystem::Power { t })
    }

    pub fn sampled_flow(generator: CMatrix) -> Result<Self> {
        check_square(&generator, "flow generator")?;
        Ok(ContractionSystem::SampledFlow { generator })
    }

    /// Requires U^m = I within 1e-8 in operator norm.
    pub fn finite_action(modulus: u64, u: CMatrix) -> Result<Self> {
        check_square(&u, "finite-action matrix")?;
        if modulus == 0 {
            return Err(Error::InvalidInput(
                "finite action modulus must be ≥ 1".into(),
            ));
        }
        let mut p = CMatrix::identity(u.nrows(), u.nrows());
        for _ in 0..modulus {
            p = &p * &u;
        }
        let defect = operator_norm(&(&p - CMatrix::identity(u.nrows(), u.nrows())));
        if defect > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "U^{modulus} differs from the identity by {defect:e}"
            )));
        }
        Ok(ContractionSystem::FiniteAction { modulus, u })
    }

    pub fn dim(&self) -> usize {
        match self {
            ContractionSystem::Power { t } => t.nrows(),
            ContractionSystem::SampledFlow { generator } => generator.nrows(),
            ContractionSystem::FiniteAction { u, .. } => u.nrows(),
        }
    }

    /// The dual pair whose H side indexes the acting semigroup.
    pub fn dual_pair(&self) -> DualPair {
        match self {
            ContractionSystem::Power { .. } => DualPair::CircleInteger,
            ContractionSystem::SampledFlow { .. } => DualPair::RealReal,
            ContractionSystem::FiniteAction { modulus, .. } => DualPair::CyclicCyclic(*modulus),
        }
    }

    /// The step operator whose iterates generate the (sampled) action.
    fn base_operator(&self) -> CMatrix {
        match self {
            ContractionSystem::Power { t } => t.clone(),
            ContractionSystem::SampledFlow { generator } => expm(generator),
            ContractionSystem::FiniteAction { u, .. } => u.clone(),
        }
    }

    /// Largest singular value per sampled generator; anything above
    /// 1 + [`TOL_CONTRACTION`] is flagged.
    pub fn contraction_check(&self) -> ContractionCheck {
        let entries: Vec<(String, f64)> = match self {
            ContractionSystem::Power { t } => vec![("T".into(), operator_norm(t))],
            ContractionSystem::SampledFlow { generator } => [0.25, 1.0, 4.0]
                .iter()
                .map(|t| {
                    let p = expm(&(generator * Complex64::new(*t, 0.0)));
                    (format!("exp({t}·A)"), operator_norm(&p))
                })
                .collect(),
            ContractionSystem::FiniteAction { u, .. } => vec![("U".into(), operator_norm(u))],
        };
        let contractive = entries.iter().all(|(_, s)| *s <= 1.0 + TOL_CONTRACTION);
        ContractionCheck {
            entries,
            contractive,
        }
    }

    fn require_contractive(&self) -> Result<()> {
        let check = self.contraction_check();
        if !check.contractive {
            let worst = check
                .entries
                .iter()
                .map(|(n, s)| format!("{n}: σ={s:.3e}"))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::Precondition {
                probe: "contraction-check".into(),
                details: worst,
            });
        }
        Ok(())
    }

    /// The isometric/weakly-stable splitting X = X₁ ⊕ X₂.
    ///
    /// X₁ is computed as the joint kernel of the defect operators
    /// T*ⁿTⁿ − I and TⁿT*ⁿ − I over n = 1,…,dim (stacked, kernel by
    /// singular value threshold), cross-checked against the span of
    /// eigenvectors with unimodular eigenvalues. Disagreement beyond
    /// tolerance is an error, not a warning.
    pub fn snf_decompose(&self) -> Result<SpectralSplit> {
        self.require_contractive()?;
        let t = self.base_operator();
        let dim = self.dim();
        let id = CMatrix::identity(dim, dim);
        let fro_cap = (dim as f64).sqrt() * (1.0 + 1e-6);

        let mut stacked = CMatrix::zeros(2 * dim * dim, dim);
        let mut p = t.clone();
        for n in 0..dim {
            if p.norm() > fro_cap {
                return Err(Error::NumericalInstability(format!(
                    "power {} of the step operator grew beyond the contraction range",
                    n + 1
                )));
            }
            let fwd = p.adjoint() * &p - &id;
            let bwd = &p * p.adjoint() - &id;
            stacked
                .view_mut((2 * n * dim, 0), (dim, dim))
                .copy_from(&fwd);
            stacked
                .view_mut(((2 * n + 1) * dim, 0), (dim, dim))
                .copy_from(&bwd);
            if n + 1 < dim {
                p = &p * &t;
            }
        }
        let x1 = kernel_basis(&stacked, 1.0);
        let x2 = kernel_complement(&stacked, 1.0);

        // independent route: span of unimodular eigenvectors
        let (vals, vecs) = eigen_decomposition(&t)?;
        let chosen: Vec<usize> = vals
            .iter()
            .enumerate()
            .filter(|(_, l)| l.norm() >= 1.0 - TOL_UNIMOD)
            .map(|(i, _)| i)
            .collect();
        let mut span = CMatrix::zeros(dim, chosen.len());
        for (dst, &src) in chosen.iter().enumerate() {
            span.set_column(dst, &vecs.column(src));
        }
        let span = orthonormal_columns(&span);
        if span.ncols() != x1.ncols() {
            return Err(Error::NumericalInstability(format!(
                "defect-kernel construction found dim X₁ = {} but the unimodular eigenvector span has dimension {}",
                x1.ncols(),
                span.ncols()
            )));
        }
        let angle = max_principal_angle_sin(&x1, &span);
        if angle > CROSS_CHECK_TOL {
            return Err(Error::NumericalInstability(format!(
                "X₁ constructions disagree: sin(max principal angle) = {angle:e}"
            )));
        }
        Ok(SpectralSplit {
            x1,
            x2,
            projections: Vec::new(),
        })
    }

    /// The splitting plus one orthogonal projection per character cluster
    /// of the unitary restriction to X₁.
    pub fn eigenprojections(&self) -> Result<SpectralSplit> {
        let mut split = self.snf_decompose()?;
        let k = split.x1.ncols();
        if k == 0 {
            return Ok(split);
        }
        let x1 = &split.x1;
        let mut projections: Vec<(GroupElement, CMatrix)> = Vec::new();
        match self {
            ContractionSystem::Power { t } => {
                let restricted = x1.adjoint() * t * x1;
                let clusters = unit_eigen_clusters(&restricted)?;
                for (center, p_small) in clusters {
                    let theta = (-center.arg() / TAU).rem_euclid(1.0);
                    projections.push((GroupElement::circle(theta), x1 * p_small * x1.adjoint()));
                }
            }
            ContractionSystem::FiniteAction { modulus, u } => {
                let restricted = x1.adjoint() * u * x1;
                let clusters = unit_eigen_clusters(&restricted)?;
                for (center, p_small) in clusters {
                    let m = *modulus as f64;
                    let j = (-(m * center.arg() / TAU)).round().rem_euclid(m);
                    let snapped = crate::numeric::unit(-j / m);
                    if (snapped - center).norm() > 1e-5 {
                        return Err(Error::NumericalInstability(format!(
                            "eigenvalue {center} of a {modulus}-periodic action is not a root of unity"
                        )));
                    }
                    projections.push((
                        GroupElement::residue(j as i64, *modulus),
                        x1 * p_small * x1.adjoint(),
                    ));
                }
            }
            ContractionSystem::SampledFlow { generator } => {
                // the generator restricted to X₁ is skew-Hermitian; its
                // Hermitian companion A/i has the (unaliased) frequencies
                let restricted = x1.adjoint() * generator * x1;
                let skew_defect = operator_norm(&(&restricted + restricted.adjoint()));
                if skew_defect > 1e-6 {
                    return Err(Error::NumericalInstability(format!(
                        "generator is not skew-Hermitian on X₁ (defect {skew_defect:e})"
                    )));
                }
                let herm = &restricted * Complex64::new(0.0, -1.0);
                let herm = (&herm + herm.adjoint()) * Complex64::new(0.5, 0.0);
                let (omegas, vecs) = hermitian_eigen(&herm);
                let clusters = cluster_reals(&omegas)?;
                for (center, cols) in clusters {
                    let mut p_small = CMatrix::zeros(k, k);
                    for c in cols {
                        let v = vecs.column(c);
                        p_small += v * v.adjoint();
                    }
                    projections.push((
                        GroupElement::Real(-center / TAU),
                        x1 * p_small * x1.adjoint(),
                    ));
                }
            }
        }
        projections.sort_by(|(a, _), (b, _)| character_key(a).total_cmp(&character_key(b)));
        split.projections = projections;
        Ok(split)
    }

    /// ∫ |(T_m x|y)|² ν_N(dm), exact finite sum for discrete ν_N.
    pub fn goldstein_lhs(
        &self,
        x: &CVector,
        y: &CVector,
        nu: &MeasureSequence,
        n: u64,
    ) -> Result<f64> {
        self.check_vectors(x, y)?;
        self.check_sequence(nu)?;
        match self {
            ContractionSystem::Power { t } => {
                let cache = RefCell::new(PowerCache::new(t.clone(), self.dim()));
                let f = |h: &GroupElement| -> Result<Complex64> {
                    let k = match h {
                        GroupElement::Integer(k) => *k,
                        _ => unreachable!("sequence validated on ℤ"),
                    };
                    if k < 0 {
                        return Err(Error::SupportViolation(format!(
                            "ν_N puts mass at {k} outside the acting semigroup ℕ"
                        )));
                    }
                    let v = cache.borrow_mut().apply(k as u64, x)?;
                    Ok(Complex64::new(y.dotc(&v).norm_sqr(), 0.0))
                };
                Ok(nu
                    .integrate(
                        n,
                        &Integrand::Pointwise {
                            f: &f,
                            max_freq: 0.0,
                        },
                    )?
                    .re)
            }
            ContractionSystem::FiniteAction { modulus, u } => {
                let mut powers = Vec::with_capacity(*modulus as usize);
                let mut p = CMatrix::identity(self.dim(), self.dim());
                for _ in 0..*modulus {
                    powers.push(p.clone());
                    p = &p * u;
                }
                let f = |h: &GroupElement| -> Result<Complex64> {
                    let j = match h {
                        GroupElement::Residue { value, .. } => *value as usize,
                        _ => unreachable!("sequence validated on ℤ_m"),
                    };
                    let v = &powers[j] * x;
                    Ok(Complex64::new(y.dotc(&v).norm_sqr(), 0.0))
                };
                Ok(nu
                    .integrate(
                        n,
                        &Integrand::Pointwise {
                            f: &f,
                            max_freq: 0.0,
                        },
                    )?
                    .re)
            }
            ContractionSystem::SampledFlow { generator } => {
                let freq_hint = operator_norm(generator) / TAU + 1e-9;
                if nu.is_plain_folner() {
                    // uniform grid matched to the quadrature nodes, advanced
                    // by one fixed propagator
                    let nodes = crate::sequences::folner_node_count(n, freq_hint)?;
                    let step = n as f64 / (nodes - 1) as f64;
                    let prop = expm(&(generator * Complex64::new(step, 0.0)));
                    let mut v = x.clone();
                    let mut acc = KahanF64::default();
                    for i in 0..nodes {
                        let w = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
                        acc.add(w * y.dotc(&v).norm_sqr());
                        if i + 1 < nodes {
                            v = &prop * v;
                        }
                    }
                    return Ok(acc.value() * step / n as f64);
                }
                let f = |h: &GroupElement| -> Result<Complex64> {
                    let t = match h {
                        GroupElement::Real(t) => *t,
                        _ => unreachable!("sequence validated on ℝ"),
                    };
                    if t < -1e-12 {
                        return Err(Error::SupportViolation(format!(
                            "ν_N puts mass at t = {t} outside the acting semigroup ℝ₊"
                        )));
                    }
                    let p = expm(&(generator * Complex64::new(t, 0.0)));
                    let v = &p * x;
                    Ok(Complex64::new(y.dotc(&v).norm_sqr(), 0.0))
                };
                Ok(nu
                    .integrate(
                        n,
                        &Integrand::Pointwise {
                            f: &f,
                            max_freq: freq_hint,
                        },
                    )?
                    .re)
            }
        }
    }

    /// Verdict of ∫|(T_m x|y)|² ν_N(dm) → 0 along the schedule; x is
    /// expected to lie in X₂.
    pub fn weak_stability_probe(
        &self,
        x: &CVector,
        y: &CVector,
        nu: &MeasureSequence,
        schedule: &Schedule,
    ) -> Result<ConvergenceVerdict> {
        let mut values = Vec::with_capacity(schedule.points().len());
        for &n in schedule.points() {
            values.push((n, Complex64::new(self.goldstein_lhs(x, y, nu, n)?, 0.0)));
        }
        Ok(ConvergenceVerdict::classify(values, schedule.tol))
    }

    /// Verify the mean limit against the eigenprojection sum.
    ///
    /// The sequence must first pass the ergodicity and asymptotic
    /// invariance probes on the option grids; a failing probe is a
    /// precondition error naming the probe.
    pub fn goldstein_verify(
        &self,
        x: &CVector,
        y: &CVector,
        nu: &MeasureSequence,
        schedule: &Schedule,
        opts: &GoldsteinOptions,
    ) -> Result<GoldsteinReport> {
        self.check_vectors(x, y)?;
        self.check_sequence(nu)?;
        let ergodic = nu.ergodicity_probe(&opts.grid, &opts.probe_schedule)?;
        if !ergodic.consistent_on_grid {
            return Err(Error::Precondition {
                probe: "ergodicity".into(),
                details: format!(
                    "{} grid points with nonzero c, {} undecided",
                    ergodic.nonzero.len(),
                    ergodic.undecided.len()
                ),
            });
        }
        let invariance =
            nu.asymptotic_invariance_probe(&opts.shifts, &opts.sets, &opts.probe_schedule)?;
        if !invariance.consistent {
            return Err(Error::Precondition {
                probe: "asymptotic-invariance".into(),
                details: "some shift/set pair does not vanish".into(),
            });
        }
        let split = self.eigenprojections()?;
        let rhs = goldstein_rhs(&split, x, y);
        let mut values = Vec::with_capacity(schedule.points().len());
        let mut gaps = Vec::with_capacity(schedule.points().len());
        for &n in schedule.points() {
            let v = self.goldstein_lhs(x, y, nu, n)?;
            values.push((n, Complex64::new(v, 0.0)));
            gaps.push((n, (v - rhs).abs()));
        }
        let lhs = ConvergenceVerdict::classify(values, schedule.tol);
        let m = gaps.len();
        // the trend check saturates at tol/100: below that the finite-N
        // cross terms oscillate inside their 1/N envelope and pointwise
        // monotonicity carries no information
        let floor = opts.tol * 1e-2;
        let shrinking = m >= 3 && {
            let g = &gaps[m - 3..];
            let step_ok = |prev: f64, next: f64| next <= prev + 1e-12 || next <= floor;
            step_ok(g[0].1, g[1].1) && step_ok(g[1].1, g[2].1)
        };
        let final_gap = gaps.last().map(|(_, g)| *g).unwrap_or(f64::INFINITY);
        let pass = final_gap < opts.tol && shrinking;
        Ok(GoldsteinReport {
            lhs,
            rhs,
            gaps,
            gap_shrinking: shrinking,
            pass,
            ergodic,
            invariance,
            split,
        })
    }

    fn check_vectors(&self, x: &CVector, y: &CVector) -> Result<()> {
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "vectors of length {}/{} fed to a {}-dimensional system",
                x.len(),
                y.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_sequence(&self, nu: &MeasureSequence) -> Result<()> {
        if *nu.dual_pair() != self.dual_pair() {
            return Err(Error::InvalidInput(format!(
                "sequence on {} cannot drive a system acting over {}",
                nu.dual_pair(),
                self.dual_pair()
            )));
        }
        Ok(())
    }
}

/// σ_max per sampled generator with the contraction flag.
#[derive(Debug, Clone)]
pub struct ContractionCheck {
    pub entries: Vec<(String, f64)>,
    pub contractive: bool,
}

/// Orthonormal bases for X₁ and X₂ plus the character eigenprojections on
/// X₁ (filled by [`ContractionSystem::eigenprojections`]).
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub x1: CMatrix,
    pub x2: CMatrix,
    pub projections: Vec<(GroupElement, CMatrix)>,
}

impl SpectralSplit {
    pub fn x1_dim(&self) -> usize {
        self.x1.ncols()
    }

    pub fn x2_dim(&self) -> usize {
        self.x2.ncols()
    }
}

/// Σ_a |(P_a x|y)|² over the split's projections.
pub fn goldstein_rhs(split: &SpectralSplit, x: &CVector, y: &CVector) -> f64 {
    let mut acc = KahanF64::default();
    for (_, p) in &split.projections {
        let px = p * x;
        acc.add(y.dotc(&px).norm_sqr());
    }
    acc.value()
}

#[derive(Debug, Clone)]
pub struct GoldsteinReport {
    pub lhs: ConvergenceVerdict,
    pub rhs: f64,
    pub gaps: Vec<(u64, f64)>,
    pub gap_shrinking: bool,
    pub pass: bool,
    pub ergodic: crate::sequences::ErgodicityReport,
    pub invariance: crate::sequences::InvarianceReport,
    pub split: SpectralSplit,
}

/// Probe grids and tolerances for [`ContractionSystem::goldstein_verify`].
#[derive(Debug, Clone)]
pub struct GoldsteinOptions {
    pub grid: Vec<GroupElement>,
    pub shifts: Vec<GroupElement>,
    pub sets: Vec<SetIndicator>,
    pub probe_schedule: Schedule,
    pub tol: f64,
}

impl GoldsteinOptions {
    pub fn defaults_for(sys: &ContractionSystem) -> Self {
        match sys {
            ContractionSystem::Power { .. } => GoldsteinOptions {
                grid: (0..16)
                    .map(|k| GroupElement::circle(k as f64 / 16.0))
                    .collect(),
                shifts: vec![GroupElement::Integer(1)],
                sets: vec![SetIndicator::evens()],
                probe_schedule: Schedule::dyadic(8, 16),
                tol: TOL_GOLDSTEIN,
            },
            ContractionSystem::SampledFlow { .. } => GoldsteinOptions {
                grid: (-8i32..=8)
                    .map(|j| GroupElement::Real(j as f64 / 4.0))
                    .collect(),
                shifts: vec![GroupElement::Real(1.0)],
                sets: vec![SetIndicator::floor_even()],
                probe_schedule: Schedule::dyadic(6, 12),
                tol: TOL_GOLDSTEIN,
            },
            ContractionSystem::FiniteAction { modulus, .. } => GoldsteinOptions {
                grid: (0..*modulus)
                    .map(|j| GroupElement::residue(j as i64, *modulus))
                    .collect(),
                shifts: vec![GroupElement::residue(1, *modulus)],
                sets: vec![SetIndicator::new(
                    "cyclic-evens",
                    true,
                    |e| matches!(e, GroupElement::Residue { value, .. } if value % 2 == 0),
                )],
                probe_schedule: Schedule::dyadic(4, 8),
                tol: TOL_GOLDSTEIN,
            },
        }
    }
}

fn character_key(g: &GroupElement) -> f64 {
    match g {
        GroupElement::CirclePoint(t) => *t,
        GroupElement::Real(r) => *r,
        GroupElement::Residue { value, .. } => *value as f64,
        _ => 0.0,
    }
}

/// Diagonalize a (numerically) unitary matrix and merge its eigenvalues
/// into clusters of radius [`TOL_CLUSTER`]; returns (center, projection)
/// pairs in the restricted space. Clusters separated by less than twice
/// the merge radius are ambiguous and rejected.
fn unit_eigen_clusters(u: &CMatrix) -> Result<Vec<(Complex64, CMatrix)>> {
    let k = u.nrows();
    let unitary_defect = operator_norm(&(u * u.adjoint() - CMatrix::identity(k, k)));
    if unitary_defect > 1e-6 {
        return Err(Error::NumericalInstability(format!(
            "restriction to X₁ is not unitary (defect {unitary_defect:e})"
        )));
    }
    let (vals, vecs) = normal_eigen(u, 1e-6)?;
    // greedy merge ordered by argument
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].arg().total_cmp(&vals[b].arg()));
    let mut clusters: Vec<(Vec<usize>, Complex64)> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some((members, center)) if (vals[i] - *center).norm() <= TOL_CLUSTER => {
                members.push(i);
                let sum: Complex64 = members.iter().map(|&j| vals[j]).sum();
                *center = sum / members.len() as f64;
            }
            _ => clusters.push((vec![i], vals[i])),
        }
    }
    // wraparound: ±π arguments belong together
    if clusters.len() >= 2 {
        let first_center = clusters[0].1;
        let last_center = clusters.last().unwrap().1;
        if (first_center - last_center).norm() <= TOL_CLUSTER {
            let (mut members, _) = clusters.pop().unwrap();
            clusters[0].0.append(&mut members);
            let sum: Complex64 = clusters[0].0.iter().map(|&j| vals[j]).sum();
            clusters[0].1 = sum / clusters[0].0.len() as f64;
        }
    }
    for (i, (_, a)) in clusters.iter().enumerate() {
        for (_, b) in clusters.iter().skip(i + 1) {
            let d = (a - b).norm();
            if d < 2.0 * TOL_CLUSTER {
                return Err(Error::ClusterAmbiguity {
                    tol: TOL_CLUSTER,
                    details: format!("centers {a} and {b} are {d:e} apart"),
                });
            }
        }
    }
    Ok(clusters
        .into_iter()
        .map(|(members, center)| {
            let mut p = CMatrix::zeros(k, k);
            for &i in &members {
                let v = vecs.column(i);
                p += v * v.adjoint();
            }
            (center / center.norm(), p)
        })
        .collect())
}

/// Cluster real frequencies within [`TOL_CLUSTER`]; same ambiguity rule.
fn cluster_reals(vals: &[f64]) -> Result<Vec<(f64, Vec<usize>)>> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some((center, members)) if (vals[i] - *center).abs() <= TOL_CLUSTER => {
                members.push(i);
                *center = members.iter().map(|&j| vals[j]).sum::<f64>() / members.len() as f64;
            }
            _ => clusters.push((vals[i], vec![i])),
        }
    }
    for (i, (a, _)) in clusters.iter().enumerate() {
        for (b, _) in clusters.iter().skip(i + 1) {
            if (a - b).abs() < 2.0 * TOL_CLUSTER {
                return Err(Error::ClusterAmbiguity {
                    tol: TOL_CLUSTER,
                    details: format!("frequencies {a} and {b} too close"),
                });
            }
        }
    }
    Ok(clusters)
}

/// Binary-power cache T^{2^j} with a growth guard: powers of a contraction
/// must stay inside the Frobenius ball √dim.
struct PowerCache {
    squares: Vec<CMatrix>,
    fro_cap: f64,
}

impl PowerCache {
    fn new(t: CMatrix, dim: usize) -> Self {
        PowerCache {
            squares: vec![t],
            fro_cap: (dim as f64).sqrt() * (1.0 + 1e-6),
        }
    }

    fn apply(&mut self, k: u64, x: &CVector) -> Result<CVector> {
        if k == 0 {
            return Ok(x.clone());
        }
        let bits = 64 - k.leading_zeros();
        while self.squares.len() < bits as usize {
            let last = self.squares.last().unwrap();
            let next = last * last;
            if next.norm() > self.fro_cap {
                return Err(Error::NumericalInstability(
                    "matrix powers escaped the contraction ball; input is not a contraction".into(),
                ));
            }
            self.squares.push(next);
        }
        let mut v = x.clone();
        let mut kk = k;
        let mut j = 0usize;
        while kk > 0 {
            if kk & 1 == 1 {
                v = &self.squares[j] * v;
            }
            kk >>= 1;
            j += 1;
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// planted systems

/// Recipe for a power system with known ground truth: a diagonal unitary
/// block joined to a strict contraction, conjugated by a random unitary.
#[derive(Debug, Clone)]
pub struct PlantedSpec {
    pub dim: usize,
    pub unimodular: usize,
    /// Minimal chordal distance between planted unit eigenvalues.
    pub min_gap: f64,
    /// Operator norm of the strict-contraction block.
    pub contraction_norm: f64,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn new(dim: usize, unimodular: usize, seed: u64) -> Self {
        PlantedSpec {
            dim,
            unimodular,
            min_gap: 0.1,
            contraction_norm: 0.8,
            seed,
        }
    }
}

/// A planted system together with its ground truth.
#[derive(Debug, Clone)]
pub struct PlantedSystem {
    pub system: ContractionSystem,
    /// The conjugating unitary V; the planted X₁ is its first block of
    /// columns.
    pub conjugator: CMatrix,
    pub unit_eigenvalues: Vec<Complex64>,
    pub x1: CMatrix,
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    let v = complex_gaussian(rng, dim, 1).column(0).into_owned();
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

pub fn haar_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    complex_gaussian(rng, dim, dim).qr().q()
}

/// Build a planted power system from a seed.
pub fn plant_power_system(spec: &PlantedSpec) -> Result<PlantedSystem> {
    if spec.unimodular > spec.dim || spec.dim == 0 {
        return Err(Error::InvalidInput(format!(
            "cannot plant {} unimodular directions in dimension {}",
            spec.unimodular, spec.dim
        )));
    }
    if !(spec.contraction_norm >= 0.0 && spec.contraction_norm < 1.0 - TOL_UNIMOD) {
        return Err(Error::InvalidInput(
            "contraction block norm must sit strictly inside the unit disc".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // unit eigenvalues with the required pairwise chordal separation
    let mut angles: Vec<f64> = Vec::new();
    let mut attempts = 0usize;
    while angles.len() < spec.unimodular {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::InvalidInput(format!(
                "could not place {} unit eigenvalues with gap ≥ {}",
                spec.unimodular, spec.min_gap
            )));
        }
        let candidate: f64 = rng.gen_range(0.0..1.0);
        let ok = angles.iter().all(|a| {
            let z1 = crate::numeric::unit(*a);
            let z2 = crate::numeric::unit(candidate);
            (z1 - z2).norm() >= spec.min_gap
        });
        if ok {
            angles.push(candidate);
        }
    }
    let unit_eigenvalues: Vec<Complex64> =
        angles.iter().map(|a| crate::numeric::unit(*a)).collect();

    let rest = spec.dim - spec.unimodular;
    let mut block = CMatrix::zeros(spec.dim, spec.dim);
    for (i, ev) in unit_eigenvalues.iter().enumerate() {
        block[(i, i)] = *ev;
    }
    if rest > 0 {
        let raw = complex_gaussian(&mut rng, rest, rest);
        let sigma = operator_norm(&raw).max(1e-12);
        let scaled = raw * Complex64::new(spec.contraction_norm / sigma, 0.0);
        block
            .view_mut((spec.unimodular, spec.unimodular), (rest, rest))
            .copy_from(&scaled);
    }
    let v = haar_unitary(&mut rng, spec.dim);
    let t = &v * block * v.adjoint();
    let x1 = v.columns(0, spec.unimodular).into_owned();
    Ok(PlantedSystem {
        system: ContractionSystem::power(t)?,
        conjugator: v,
        unit_eigenvalues,
        x1,
    })
}

/// Deterministic RNG for planted-system experiments.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub use rand::SeedableRng;
