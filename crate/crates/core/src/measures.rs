//! Finite complex Borel measures on G and their Fourier transforms.
//!
//! A measure is stored in canonical form as a finite atom list plus an
//! optional absolutely continuous density. Densities exist only on the
//! circle and on compact intervals of the real line; they declare a band
//! limit, and transforms are evaluated by equispaced quadrature with at
//! least 64·(1+|frequency|) nodes so oscillatory characters are always
//! resolved. Requests beyond the band limit fail loudly instead of
//! returning a silently under-resolved value.

use num_complex::Complex64;

use crate::groups::{DualPair, GroupElement, Side};
use crate::numeric::{KahanC64, KahanF64};
use crate::{Error, Result};

/// Nodes per unit frequency in the equispaced quadrature rule.
pub const NODES_PER_CYCLE: usize = 64;
/// Default band limit for built-in density shapes.
pub const DEFAULT_BAND_LIMIT: f64 = 4096.0;

/// Where an absolutely continuous part lives.
#[derive(Debug, Clone, PartialEq)]
pub enum AcDomain {
    /// The circle, parameterized by θ ∈ [0,1).
    Circle,
    /// A compact interval of the real line.
    RealInterval { lo: f64, hi: f64 },
}

/// Closed-form or sampled density shapes.
#[derive(Debug, Clone)]
pub enum DensityShape {
    /// Constant density with the given total mass.
    Uniform { mass: f64 },
    /// mass·(1 + cos 2πkθ) on the circle; total mass `mass`.
    RaisedCosine { k: i64, mass: f64 },
    /// Values sampled on the equispaced quadrature grid of the domain.
    Samples(Vec<Complex64>),
}

/// An absolutely continuous component: domain, shape, band limit.
#[derive(Debug, Clone)]
pub struct AcDensity {
    pub domain: AcDomain,
    pub shape: DensityShape,
    pub band_limit: f64,
}

impl AcDensity {
    pub fn uniform_circle(mass: f64) -> Self {
        AcDensity {
            domain: AcDomain::Circle,
            shape: DensityShape::Uniform { mass },
            band_limit: DEFAULT_BAND_LIMIT,
        }
    }

    pub fn raised_cosine(k: i64, mass: f64) -> Self {
        AcDensity {
            domain: AcDomain::Circle,
            shape: DensityShape::RaisedCosine { k, mass },
            band_limit: DEFAULT_BAND_LIMIT,
        }
    }

    pub fn uniform_real(lo: f64, hi: f64, mass: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "real density support [{lo}, {hi}] must be a finite interval"
            )));
        }
        Ok(AcDensity {
            domain: AcDomain::RealInterval { lo, hi },
            shape: DensityShape::Uniform { mass },
            band_limit: DEFAULT_BAND_LIMIT,
        })
    }

    /// Sampled density on the circle grid θ_i = i/len.
    pub fn samples_circle(values: Vec<Complex64>, band_limit: f64) -> Result<Self> {
        let needed = NODES_PER_CYCLE * (1 + band_limit.ceil() as usize);
        if values.len() < needed {
            return Err(Error::InvalidInput(format!(
                "sampled density has {} nodes, band limit {band_limit} needs ≥ {needed}",
                values.len()
            )));
        }
        Ok(AcDensity {
            domain: AcDomain::Circle,
            shape: DensityShape::Samples(values),
            band_limit,
        })
    }

    /// Sampled density on the equispaced grid of [lo, hi] (endpoints
    /// included).
    pub fn samples_real(lo: f64, hi: f64, values: Vec<Complex64>, band_limit: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "real density support [{lo}, {hi}] must be a finite interval"
            )));
        }
        let needed = NODES_PER_CYCLE * (1 + (band_limit * (hi - lo)).ceil() as usize) + 1;
        if values.len() < needed {
            return Err(Error::InvalidInput(format!(
                "sampled density has {} nodes, band limit {band_limit} on [{lo}, {hi}] needs ≥ {needed}",
                values.len()
            )));
        }
        Ok(AcDensity {
            domain: AcDomain::RealInterval { lo, hi },
            shape: DensityShape::Samples(values),
            band_limit,
        })
    }

    fn length(&self) -> f64 {
        match &self.domain {
            AcDomain::Circle => 1.0,
            AcDomain::RealInterval { lo, hi } => hi - lo,
        }
    }

    fn eval(&self, t: f64) -> Complex64 {
        match &self.shape {
            DensityShape::Uniform { mass } => Complex64::new(mass / self.length(), 0.0),
            DensityShape::RaisedCosine { k, mass } => {
                let v = mass * (1.0 + (std::f64::consts::TAU * *k as f64 * t).cos());
                Complex64::new(v, 0.0)
            }
            DensityShape::Samples(_) => unreachable!("sampled shapes integrate on their own grid"),
        }
    }

    /// Frequency of `h` in cycles over the whole domain, for the node rule.
    fn cycles_of(&self, h: &GroupElement) -> Result<f64> {
        let freq = match (&self.domain, h) {
            (AcDomain::Circle, GroupElement::Integer(n)) => *n as f64,
            (AcDomain::RealInterval { .. }, GroupElement::Real(s)) => *s,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "density on {:?} cannot pair with element {h}",
                    self.domain
                )))
            }
        };
        if freq.abs() > self.band_limit {
            return Err(Error::Oscillation {
                frequency: freq.abs(),
                band_limit: self.band_limit,
            });
        }
        Ok(match &self.domain {
            AcDomain::Circle => freq,
            AcDomain::RealInterval { lo, hi } => freq * (hi - lo),
        })
    }

    /// ∫ ⟨g(t), h⟩ ρ(t) dt by the domain's quadrature rule.
    fn fourier(&self, pair: &DualPair, h: &GroupElement) -> Result<Complex64> {
        let cycles = self.cycles_of(h)?;
        match &self.domain {
            AcDomain::Circle => {
                // periodic integrand: closed trapezoid = rectangle rule
                let mut acc = KahanC64::default();
                match &self.shape {
                    DensityShape::Samples(values) => {
                        let m = values.len();
                        for (i, v) in values.iter().enumerate() {
                            let g = GroupElement::CirclePoint(i as f64 / m as f64);
                            acc.add(v * pair.pair_unchecked(&g, h));
                        }
                        Ok(acc.value() / m as f64)
                    }
                    _ => {
                        let m = NODES_PER_CYCLE * (1 + cycles.abs().ceil() as usize);
                        for i in 0..m {
                            let t = i as f64 / m as f64;
                            let g = GroupElement::CirclePoint(t);
                            acc.add(self.eval(t) * pair.pair_unchecked(&g, h));
                        }
                        Ok(acc.value() / m as f64)
                    }
                }
            }
            AcDomain::RealInterval { lo, hi } => {
                if let DensityShape::Samples(values) = &self.shape {
                    let m = values.len();
                    let step = (hi - lo) / (m - 1) as f64;
                    let mut acc = KahanC64::default();
                    for (i, v) in values.iter().enumerate() {
                        let g = GroupElement::Real(lo + step * i as f64);
                        let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
                        acc.add(v * pair.pair_unchecked(&g, h) * w);
                    }
                    return Ok(acc.value() * step);
                }
                let m = NODES_PER_CYCLE * (1 + cycles.abs().ceil() as usize) + 1;
                let step = (hi - lo) / (m - 1) as f64;
                let mut acc = KahanC64::default();
                for i in 0..m {
                    let t = lo + step * i as f64;
                    let g = GroupElement::Real(t);
                    let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
                    acc.add(self.eval(t) * pair.pair_unchecked(&g, h) * w);
                }
                Ok(acc.value() * step)
            }
        }
    }

    /// Quadrature of |ρ| or ρ over the sample grid, matching the domain's
    /// rule (rectangle on the circle, trapezoid on an interval).
    fn sample_quadrature(&self, values: &[Complex64], f: impl Fn(&Complex64) -> f64) -> f64 {
        let m = values.len();
        let mut acc = KahanF64::default();
        match &self.domain {
            AcDomain::Circle => {
                for v in values {
                    acc.add(f(v));
                }
                acc.value() / m as f64
            }
            AcDomain::RealInterval { lo, hi } => {
                for (i, v) in values.iter().enumerate() {
                    let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
                    acc.add(w * f(v));
                }
                acc.value() * (hi - lo) / (m - 1) as f64
            }
        }
    }

    /// ∫ |ρ| dt.
    fn abs_mass(&self) -> f64 {
        match &self.shape {
            DensityShape::Uniform { mass } => mass.abs(),
            DensityShape::RaisedCosine { mass, .. } => mass.abs(),
            DensityShape::Samples(values) => self.sample_quadrature(values, |v| v.norm()),
        }
    }

    fn is_nonnegative(&self) -> bool {
        match &self.shape {
            DensityShape::Uniform { mass } => *mass >= 0.0,
            DensityShape::RaisedCosine { mass, .. } => *mass >= 0.0,
            DensityShape::Samples(values) => {
                values.iter().all(|v| v.re >= -1e-12 && v.im.abs() <= 1e-12)
            }
        }
    }
}

/// A finite complex Borel measure on the G side of a dual pair.
#[derive(Debug, Clone)]
pub struct ComplexMeasure {
    pair: DualPair,
    atoms: Vec<(GroupElement, Complex64)>,
    density: Option<AcDensity>,
}

impl ComplexMeasure {
    /// Purely atomic measure. Duplicate atom points are merged by summing
    /// their weights.
    pub fn discrete(pair: DualPair, atoms: Vec<(GroupElement, Complex64)>) -> Result<Self> {
        Self::new(pair, atoms, None)
    }

    pub fn dirac(pair: DualPair, point: GroupElement) -> Result<Self> {
        Self::discrete(pair, vec![(point, Complex64::new(1.0, 0.0))])
    }

    pub fn with_density(
        pair: DualPair,
        atoms: Vec<(GroupElement, Complex64)>,
        density: AcDensity,
    ) -> Result<Self> {
        Self::new(pair, atoms, Some(density))
    }

    fn new(
        pair: DualPair,
        atoms: Vec<(GroupElement, Complex64)>,
        density: Option<AcDensity>,
    ) -> Result<Self> {
        if let Some(d) = &density {
            let ok = matches!(
                (&d.domain, &pair),
                (AcDomain::Circle, DualPair::CircleInteger)
                    | (AcDomain::RealInterval { .. }, DualPair::RealReal)
            );
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "density domain {:?} does not match pair {pair}",
                    d.domain
                )));
            }
        }
        let mut merged: Vec<(GroupElement, Complex64)> = Vec::with_capacity(atoms.len());
        for (point, weight) in atoms {
            if !pair.contains(Side::G, &point) {
                return Err(Error::ModelMismatch {
                    pair: pair.to_string(),
                    side: Side::G,
                    element: point.to_string(),
                });
            }
            if !weight.re.is_finite() || !weight.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "atom weight {weight} not finite"
                )));
            }
            match merged.iter_mut().find(|(p, _)| p.approx_eq(&point)) {
                Some((_, w)) => *w += weight,
                None => merged.push((point, weight)),
            }
        }
        Ok(ComplexMeasure {
            pair,
            atoms: merged,
            density,
        })
    }

    pub fn pair(&self) -> &DualPair {
        &self.pair
    }

    /// Exactly the atomic part; the absolutely continuous part contributes
    /// no atoms.
    pub fn atoms(&self) -> &[(GroupElement, Complex64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&AcDensity> {
        self.density.as_ref()
    }

    pub fn is_discrete(&self) -> bool {
        self.density.is_none()
    }

    /// μ̂(h) = ∫ ⟨g, h⟩ μ(dg).
    pub fn fourier(&self, h: &GroupElement) -> Result<Complex64> {
        if !self.pair.contains(Side::H, h) {
            return Err(Error::ModelMismatch {
                pair: self.pair.to_string(),
                side: Side::H,
                element: h.to_string(),
            });
        }
        let mut acc = KahanC64::default();
        for (point, weight) in &self.atoms {
            acc.add(weight * self.pair.pair_unchecked(point, h));
        }
        let mut out = acc.value();
        if let Some(d) = &self.density {
            out += d.fourier(&self.pair, h)?;
        }
        Ok(out)
    }

    /// ‖μ‖ = Σ|weights| + ∫|density|.
    pub fn total_variation(&self) -> f64 {
        let mut acc = KahanF64::default();
        for (_, w) in &self.atoms {
            acc.add(w.norm());
        }
        acc.value() + self.density.as_ref().map_or(0.0, |d| d.abs_mass())
    }

    /// Total mass μ(G).
    pub fn mass(&self) -> Complex64 {
        let mut acc = KahanC64::default();
        for (_, w) in &self.atoms {
            acc.add(*w);
        }
        let ac = self.density.as_ref().map_or(0.0, |d| match &d.shape {
            DensityShape::Uniform { mass } | DensityShape::RaisedCosine { mass, .. } => *mass,
            DensityShape::Samples(values) => d.sample_quadrature(values, |v| v.re),
        });
        acc.value() + Complex64::new(ac, 0.0)
    }

    /// Nonnegative weights and density, total mass 1 within 1e-10.
    pub fn is_probability(&self) -> bool {
        let weights_ok = self
            .atoms
            .iter()
            .all(|(_, w)| w.re >= -1e-12 && w.im.abs() <= 1e-12);
        let density_ok = self.density.as_ref().is_none_or(|d| d.is_nonnegative());
        let mass = self.mass();
        weights_ok && density_ok && (mass - Complex64::new(1.0, 0.0)).norm() <= 1e-10
    }

    /// α·μ + β·σ for purely atomic measures on the same pair.
    pub fn linear_combination(
        alpha: Complex64,
        mu: &ComplexMeasure,
        beta: Complex64,
        sigma: &ComplexMeasure,
    ) -> Result<ComplexMeasure> {
        if mu.pair != sigma.pair {
            return Err(Error::InvalidInput(
                "measures live on different pairs".into(),
            ));
        }
        if !mu.is_discrete() || !sigma.is_discrete() {
            return Err(Error::InvalidInput(
                "linear combinations are supported for purely atomic measures".into(),
            ));
        }
        let atoms = mu
            .atoms
            .iter()
            .map(|(p, w)| (p.clone(), alpha * w))
            .chain(sigma.atoms.iter().map(|(p, w)| (p.clone(), beta * w)))
            .collect();
        ComplexMeasure::discrete(mu.pair.clone(), atoms)
    }

    /// The quotient polynomial Σ_{i,j} w_i·conj(w_j)·⟨g_i g_j^{-1}, ·⟩
    /// behind |μ̂|² for a purely atomic measure, with equal quotients merged.
    pub fn quotient_poly(&self) -> Result<Vec<(GroupElement, Complex64)>> {
        if !self.is_discrete() {
            return Err(Error::InvalidInput(
                "quotient expansion requires a purely atomic measure".into(),
            ));
        }
        let mut terms: Vec<(GroupElement, Complex64)> = Vec::new();
        for (gi, wi) in &self.atoms {
            for (gj, wj) in &self.atoms {
                let q = self.pair.quotient(Side::G, gi, gj)?;
                let w = wi * wj.conj();
                match terms.iter_mut().find(|(p, _)| p.approx_eq(&q)) {
                    Some((_, acc)) => *acc += w,
                    None => terms.push((q, w)),
                }
            }
        }
        Ok(terms)
    }

    /// Largest pairwise frequency separation of the measure's support, used
    /// as the oscillation hint when |μ̂|² is integrated by quadrature over ℝ.
    pub fn frequency_spread(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (p, _) in &self.atoms {
            if let GroupElement::Real(r) = p {
                lo = lo.min(*r);
                hi = hi.max(*r);
            }
        }
        if let Some(d) = &self.density {
            if let AcDomain::RealInterval { lo: a, hi: b } = d.domain {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        if hi > lo {
            hi - lo
        } else {
            0.0
        }
    }
}
