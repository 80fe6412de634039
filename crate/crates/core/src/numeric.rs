//! Small numeric helpers: compensated summation and unit-circle phases.

use num_complex::Complex64;

/// Neumaier-compensated accumulator for `f64`.
///
/// The averages computed in this crate run over up to ~10^6 terms while
/// some invariants are checked at 1e-12; plain summation drift would eat
/// that budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanF64 {
    sum: f64,
    comp: f64,
}

impl KahanF64 {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values (independent re/im parts).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanC64 {
    re: KahanF64,
    im: KahanF64,
}

impl KahanC64 {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// e^{2πi·phase} with phase measured in turns.
pub fn unit(phase_turns: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * phase_turns).sin_cos();
    Complex64::new(c, s)
}

/// Exact (θ·k) mod 1 for θ ∈ [0,1) and integer k.
///
/// θ is decomposed as m·2^{-e} (exact for every finite f64), so k·θ mod 1
/// reduces to an integer residue mod 2^e. This keeps character values of
/// circle points meaningful for indices as large as the squares of 2^20,
/// where a plain f64 product would have lost the fractional part.
pub fn circle_phase(theta: f64, k: i64) -> f64 {
    debug_assert!((0.0..1.0).contains(&theta));
    if theta == 0.0 || k == 0 {
        return 0.0;
    }
    let bits = theta.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp_bits == 0 {
        (frac, 1074i64)
    } else {
        (frac | (1u64 << 52), 1075 - exp_bits)
    };
    debug_assert!(e >= 53);
    let ku = k.unsigned_abs() as u128;
    let prod = ku * m as u128;
    let phase = if e >= 128 || prod >> e == 0 {
        // no wraparound: the product is already below 1
        prod as f64 * (-(e as f64)).exp2()
    } else {
        let r = prod & ((1u128 << e) - 1);
        r as f64 * (-(e as f64)).exp2()
    };
    if k < 0 && phase != 0.0 {
        1.0 - phase
    } else {
        phase
    }
}
