//! Dual group pairs and their character pairings.
//!
//! A [`DualPair`] names one of the supported pairs (G, H) where H is the
//! Pontryagin dual of G: the circle with the integers, the self-dual real
//! line, a finite cyclic group with itself, and finite products of these.
//! Elements are plain tagged values; circle points are stored as a phase
//! θ ∈ [0,1) so the group law is exact and never drifts off the circle.
//!
//! Pairing conventions (all carry the minus sign of `λ^{-n}`):
//!   circle/integer  ⟨θ, n⟩ = e^{-2πiθn}
//!   real/real       ⟨r, s⟩ = e^{-2πirs}
//!   cyclic m        ⟨j, k⟩ = e^{-2πijk/m}
//!   product         componentwise product of the factor pairings

use std::fmt;

use num_complex::Complex64;

use crate::numeric::{circle_phase, unit};
use crate::{Error, Result};

/// Wraparound tolerance for circle-point equality.
pub const CIRCLE_EQ_TOL: f64 = 1e-10;
/// Tolerance for real-point equality (atom merging).
pub const REAL_EQ_TOL: f64 = 1e-10;

/// Which side of a dual pair an element lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    G,
    H,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::G => write!(f, "G"),
            Side::H => write!(f, "H"),
        }
    }
}

/// A supported pair of dual groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DualPair {
    /// G = 𝕋 (phases mod 1), H = ℤ.
    CircleInteger,
    /// G = H = ℝ.
    RealReal,
    /// G = H = ℤ_m.
    CyclicCyclic(u64),
    /// Componentwise product of two pairs.
    Product(Box<DualPair>, Box<DualPair>),
}

/// A point of G or H under one of the supported group models.
#[derive(Debug, Clone)]
pub enum GroupElement {
    /// e^{2πiθ} with θ ∈ [0,1).
    CirclePoint(f64),
    Integer(i64),
    Real(f64),
    /// Residue class j mod m, normalized into {0,…,m−1}.
    Residue {
        value: u64,
        modulus: u64,
    },
    Tuple(Vec<GroupElement>),
}

fn norm_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(1.0);
    if t >= 1.0 {
        t = 0.0;
    }
    t
}

impl GroupElement {
    pub fn circle(theta: f64) -> Self {
        GroupElement::CirclePoint(norm_phase(theta))
    }

    pub fn residue(value: i64, modulus: u64) -> Self {
        GroupElement::Residue {
            value: value.rem_euclid(modulus as i64) as u64,
            modulus,
        }
    }

    /// Structural equality with wraparound tolerance on circle phases and
    /// absolute tolerance on reals.
    pub fn approx_eq(&self, other: &GroupElement) -> bool {
        match (self, other) {
            (GroupElement::CirclePoint(a), GroupElement::CirclePoint(b)) => {
                let d = (a - b).abs();
                d.min(1.0 - d) < CIRCLE_EQ_TOL
            }
            (GroupElement::Integer(a), GroupElement::Integer(b)) => a == b,
            (GroupElement::Real(a), GroupElement::Real(b)) => (a - b).abs() < REAL_EQ_TOL,
            (
                GroupElement::Residue {
                    value: a,
                    modulus: m,
                },
                GroupElement::Residue {
                    value: b,
                    modulus: n,
                },
            ) => m == n && a == b,
            (GroupElement::Tuple(a), GroupElement::Tuple(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
            }
            _ => false,
        }
    }

    /// Parse the textual element syntax: `circle:0.25`, `int:3`,
    /// `real:1.5`, `mod:2/5`, `tuple:(circle:0.25,int:3)`.
    pub fn parse(s: &str) -> Result<GroupElement> {
        let s = s.trim();
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("element `{s}` missing `tag:` prefix")))?;
        match tag {
            "circle" => {
                let t: f64 = rest
                    .parse()
                    .map_err(|e| Error::Parse(format!("circle phase `{rest}`: {e}")))?;
                if !t.is_finite() {
                    return Err(Error::Parse(format!("circle phase `{rest}` not finite")));
                }
                Ok(GroupElement::circle(t))
            }
            "int" => {
                let n: i64 = rest
                    .parse()
                    .map_err(|e| Error::Parse(format!("integer `{rest}`: {e}")))?;
                Ok(GroupElement::Integer(n))
            }
            "real" => {
                let r: f64 = rest
                    .parse()
                    .map_err(|e| Error::Parse(format!("real `{rest}`: {e}")))?;
                if !r.is_finite() {
                    return Err(Error::Parse(format!("real `{rest}` not finite")));
                }
                Ok(GroupElement::Real(r))
            }
            "mod" => {
                let (j, m) = rest
                    .split_once('/')
                    .ok_or_else(|| Error::Parse(format!("residue `{rest}` missing `/`")))?;
                let j: i64 = j
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("residue value `{j}`: {e}")))?;
                let m: u64 = m
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("residue modulus `{m}`: {e}")))?;
                if m == 0 {
                    return Err(Error::Parse("residue modulus must be ≥ 1".into()));
                }
                Ok(GroupElement::residue(j, m))
            }
            "tuple" => {
                let inner = rest
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("tuple `{rest}` must be parenthesized")))?;
                let mut parts = Vec::new();
                let mut depth = 0usize;
                let mut start = 0usize;
                for (i, ch) in inner.char_indices() {
                    match ch {
                        '(' => depth += 1,
                        ')' => {
                            depth = depth.checked_sub(1).ok_or_else(|| {
                                Error::Parse(format!("unbalanced parens in `{rest}`"))
                            })?
                        }
                        ',' if depth == 0 => {
                            parts.push(&inner[start..i]);
                            start = i + 1;
                        }
                        _ => {}
                    }
                }
                parts.push(&inner[start..]);
                let elems = parts
                    .iter()
                    .map(|p| GroupElement::parse(p))
                    .collect::<Result<Vec<_>>>()?;
                if elems.len() < 2 {
                    return Err(Error::Parse("tuple needs at least two components".into()));
                }
                Ok(GroupElement::Tuple(elems))
            }
            other => Err(Error::Parse(format!("unknown element tag `{other}`"))),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::CirclePoint(t) => write!(f, "circle:{t}"),
            GroupElement::Integer(n) => write!(f, "int:{n}"),
            GroupElement::Real(r) => write!(f, "real:{r}"),
            GroupElement::Residue { value, modulus } => write!(f, "mod:{value}/{modulus}"),
            GroupElement::Tuple(xs) => {
                write!(f, "tuple:(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for DualPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualPair::CircleInteger => write!(f, "circle-integer"),
            DualPair::RealReal => write!(f, "real-real"),
            DualPair::CyclicCyclic(m) => write!(f, "cyclic:{m}"),
            DualPair::Product(a, b) => write!(f, "product({a},{b})"),
        }
    }
}

impl DualPair {
    pub fn cyclic(m: u64) -> Result<DualPair> {
        if m == 0 {
            return Err(Error::InvalidInput("cyclic modulus must be ≥ 1".into()));
        }
        Ok(DualPair::CyclicCyclic(m))
    }

    pub fn product(left: DualPair, right: DualPair) -> DualPair {
        DualPair::Product(Box::new(left), Box::new(right))
    }

    /// Parse a pair descriptor: `circle-integer`, `real-real`, `cyclic:5`,
    /// `product(circle-integer,cyclic:3)`.
    pub fn parse(s: &str) -> Result<DualPair> {
        let s = s.trim();
        match s {
            "circle-integer" => return Ok(DualPair::CircleInteger),
            "real-real" => return Ok(DualPair::RealReal),
            _ => {}
        }
        if let Some(m) = s.strip_prefix("cyclic:") {
            let m: u64 = m
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("cyclic modulus `{m}`: {e}")))?;
            return DualPair::cyclic(m);
        }
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
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
                        let left = DualPair::parse(&inner[..i])?;
                        let right = DualPair::parse(&inner[i + 1..])?;
                        return Ok(DualPair::product(left, right));
                    }
                    _ => {}
                }
            }
            return Err(Error::Parse(format!("product `{s}` needs two components")));
        }
        Err(Error::Parse(format!("unknown dual pair `{s}`")))
    }

    /// Does `e` belong to the given side of this pair?
    pub fn contains(&self, side: Side, e: &GroupElement) -> bool {
        match (self, side, e) {
            (DualPair::CircleInteger, Side::G, GroupElement::CirclePoint(_)) => true,
            (DualPair::CircleInteger, Side::H, GroupElement::Integer(_)) => true,
            (DualPair::RealReal, _, GroupElement::Real(_)) => true,
            (DualPair::CyclicCyclic(m), _, GroupElement::Residue { modulus, .. }) => m == modulus,
            (DualPair::Product(a, b), _, GroupElement::Tuple(xs)) => {
                xs.len() == 2 && a.contains(side, &xs[0]) && b.contains(side, &xs[1])
            }
            _ => false,
        }
    }

    fn check(&self, side: Side, e: &GroupElement) -> Result<()> {
        if self.contains(side, e) {
            Ok(())
        } else {
            Err(Error::ModelMismatch {
                pair: self.to_string(),
                side,
                element: e.to_string(),
            })
        }
    }

    /// Identity element of the given side.
    pub fn identity(&self, side: Side) -> GroupElement {
        match (self, side) {
            (DualPair::CircleInteger, Side::G) => GroupElement::CirclePoint(0.0),
            (DualPair::CircleInteger, Side::H) => GroupElement::Integer(0),
            (DualPair::RealReal, _) => GroupElement::Real(0.0),
            (DualPair::CyclicCyclic(m), _) => GroupElement::Residue {
                value: 0,
                modulus: *m,
            },
            (DualPair::Product(a, b), _) => {
                GroupElement::Tuple(vec![a.identity(side), b.identity(side)])
            }
        }
    }

    /// The character pairing ⟨g, h⟩; always unit modulus.
    pub fn pair(&self, g: &GroupElement, h: &GroupElement) -> Result<Complex64> {
        self.check(Side::G, g)?;
        self.check(Side::H, h)?;
        Ok(self.pair_unchecked(g, h))
    }

    pub(crate) fn pair_unchecked(&self, g: &GroupElement, h: &GroupElement) -> Complex64 {
        match (self, g, h) {
            (DualPair::CircleInteger, GroupElement::CirclePoint(t), GroupElement::Integer(n)) => {
                // ⟨λ, n⟩ = λ^{-n}
                let p = circle_phase(*t, *n);
                unit(if p == 0.0 { 0.0 } else { 1.0 - p })
            }
            (DualPair::RealReal, GroupElement::Real(r), GroupElement::Real(s)) => {
                unit(-(r * s).rem_euclid(1.0))
            }
            (
                DualPair::CyclicCyclic(m),
                GroupElement::Residue { value: j, .. },
                GroupElement::Residue { value: k, .. },
            ) => {
                let t = ((*j as u128 * *k as u128) % *m as u128) as f64 / *m as f64;
                unit(if t == 0.0 { 0.0 } else { 1.0 - t })
            }
            (DualPair::Product(a, b), GroupElement::Tuple(gs), GroupElement::Tuple(hs)) => {
                a.pair_unchecked(&gs[0], &hs[0]) * b.pair_unchecked(&gs[1], &hs[1])
            }
            _ => unreachable!("pair_unchecked called on mismatched element"),
        }
    }

    /// Group law on one side.
    pub fn combine(&self, side: Side, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(side, a)?;
        self.check(side, b)?;
        Ok(match (a, b) {
            (GroupElement::CirclePoint(x), GroupElement::CirclePoint(y)) => {
                GroupElement::circle(x + y)
            }
            (GroupElement::Integer(x), GroupElement::Integer(y)) => GroupElement::Integer(x + y),
            (GroupElement::Real(x), GroupElement::Real(y)) => GroupElement::Real(x + y),
            (
                GroupElement::Residue { value: x, modulus },
                GroupElement::Residue { value: y, .. },
            ) => GroupElement::Residue {
                value: (x + y) % modulus,
                modulus: *modulus,
            },
            (GroupElement::Tuple(xs), GroupElement::Tuple(ys)) => {
                let (pa, pb) = match self {
                    DualPair::Product(pa, pb) => (pa, pb),
                    _ => unreachable!(),
                };
                GroupElement::Tuple(vec![
                    pa.combine(side, &xs[0], &ys[0])?,
                    pb.combine(side, &xs[1], &ys[1])?,
                ])
            }
            _ => unreachable!("check() passed on mismatched elements"),
        })
    }

    /// Group inverse on one side.
    pub fn invert(&self, side: Side, a: &GroupElement) -> Result<GroupElement> {
        self.check(side, a)?;
        Ok(match a {
            GroupElement::CirclePoint(t) => {
                GroupElement::CirclePoint(if *t == 0.0 { 0.0 } else { norm_phase(1.0 - t) })
            }
            GroupElement::Integer(n) => GroupElement::Integer(-n),
            GroupElement::Real(r) => GroupElement::Real(-r),
            GroupElement::Residue { value, modulus } => GroupElement::Residue {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
            GroupElement::Tuple(xs) => {
                let (pa, pb) = match self {
                    DualPair::Product(pa, pb) => (pa, pb),
                    _ => unreachable!(),
                };
                GroupElement::Tuple(vec![pa.invert(side, &xs[0])?, pb.invert(side, &xs[1])?])
            }
        })
    }

    /// g·g'^{-1}, the quotient used in double-atom sums.
    pub fn quotient(&self, side: Side, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let binv = self.invert(side, b)?;
        self.combine(side, a, &binv)
    }
}
