//! Wigner d-matrices and rotation-based exchange arguments.
//!
//! Two evaluation paths coexist. Rotations by exactly pi have integer matrix
//! elements d^j_{m',m}(pi) = (-1)^(j-m) delta_{m',-m} and are kept exact.
//! General angles use double precision: the factorial sum
//!
//! ```text
//! d^j_{m',m}(theta) = sum over k of (-1)^(k-m+m')
//!     * sqrt((j+m)!(j-m)!(j+m')!(j-m')!) / ((j+m-k)! k! (j-k-m')! (k-m+m')!)
//!     * cos(theta/2)^(2j-2k+m-m') * sin(theta/2)^(2k-m+m')
//! ```
//!
//! suffers heavy cancellation between terms as j grows, so the term
//! coefficients come from exact integer factorials and all products and the
//! sum run in double-double (compensated) arithmetic; only cos/sin of the
//! half angle and the final rounding are plain f64. That keeps every entry
//! well inside the 1e-12 budget through two_j = 20 and beyond.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::cgc::build_table;
use crate::error::{Error, Result};
use crate::half_int::HalfInt;
use crate::rng::SplitMix64;
use crate::spin_space::{CoupledIndex, SpinPair, UncoupledIndex};

// ---------------------------------------------------------------------------
// double-double helpers (Dekker/Knuth error-free transforms)

#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    const SPLIT: f64 = 134_217_729.0; // 2^27 + 1
    let p = a * b;
    let ta = SPLIT * a;
    let ahi = ta - (ta - a);
    let alo = a - ahi;
    let tb = SPLIT * b;
    let bhi = tb - (tb - b);
    let blo = b - bhi;
    let err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
    Dd { hi: p, lo: err }
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        two_sum(s.hi, lo)
    }

    fn mul(self, other: Dd) -> Dd {
        let p = two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        two_sum(p.hi, lo)
    }

    fn scale(self, k: f64) -> Dd {
        self.mul(Dd::from_f64(k))
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// base^0, base^1, ..., base^n as double-doubles.
fn dd_powers(base: f64, n: usize) -> Vec<Dd> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Dd::ONE);
    for i in 0..n {
        out.push(out[i].mul(Dd::from_f64(base)));
    }
    out
}

// ---------------------------------------------------------------------------
// exact pi path

/// Exact d^j_{m',m}(pi) = (-1)^(j-m) delta_{m',-m}. Arguments are
/// twice-values; panics on labels invalid for `two_j`.
pub fn d_pi_entry(two_j: u32, two_mp: i64, two_m: i64) -> i64 {
    let two_j = two_j as i64;
    assert!(two_mp.abs() <= two_j && (two_j - two_mp) % 2 == 0, "invalid row label");
    assert!(two_m.abs() <= two_j && (two_j - two_m) % 2 == 0, "invalid column label");
    if two_mp != -two_m {
        return 0;
    }
    if (two_j - two_m) % 4 == 0 {
        1
    } else {
        -1
    }
}

/// Rotation matrix about y in the spin-j representation, rows and columns
/// indexed by m', m descending from j to -j.
#[derive(Clone, Debug)]
pub struct WignerDMatrix {
    two_j: u32,
    theta: f64,
    entries: Vec<f64>, // row-major, (2j+1)^2
}

impl WignerDMatrix {
    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Matrix dimension 2j + 1.
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    fn pos(&self, two_mp: i64, two_m: i64) -> (usize, usize) {
        let two_j = self.two_j as i64;
        assert!(two_mp.abs() <= two_j && (two_j - two_mp) % 2 == 0, "invalid row label");
        assert!(two_m.abs() <= two_j && (two_j - two_m) % 2 == 0, "invalid column label");
        (((two_j - two_mp) / 2) as usize, ((two_j - two_m) / 2) as usize)
    }

    /// Entry d^j_{m',m}, addressed by twice-values.
    pub fn entry(&self, two_mp: i64, two_m: i64) -> f64 {
        let (r, c) = self.pos(two_mp, two_m);
        self.entries[r * self.dim() + c]
    }

    pub fn entry_at(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    /// Largest absolute deviation of transpose(d) * d from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let mut dot = Dd::ZERO;
                for r in 0..n {
                    dot = dot.add(two_prod(self.entries[r * n + a], self.entries[r * n + b]));
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot.value() - target).abs());
            }
        }
        worst
    }
}

/// The exact rotation by pi; every entry is -1, 0, or 1.
pub fn d_matrix_pi(two_j: u32) -> WignerDMatrix {
    let n = two_j as usize + 1;
    let mut entries = vec![0.0; n * n];
    let two_j_i = two_j as i64;
    for (r, two_mp) in (-two_j_i..=two_j_i).rev().step_by(2).enumerate() {
        for (c, two_m) in (-two_j_i..=two_j_i).rev().step_by(2).enumerate() {
            entries[r * n + c] = d_pi_entry(two_j, two_mp, two_m) as f64;
        }
    }
    WignerDMatrix { two_j, theta: std::f64::consts::PI, entries }
}

/// sqrt((j+m)!(j-m)!(j+m')!(j-m')!) / ((j+m-k)! k! (j-k-m')! (k-m+m')!)
/// from exact integer factorials, rounded once to f64.
fn term_coefficient(fact: &[BigInt], num_args: [i64; 4], den_args: [i64; 4]) -> f64 {
    let mut num = BigInt::one();
    for a in num_args {
        num *= &fact[a as usize];
    }
    let mut den = BigInt::one();
    for a in den_args {
        den *= &fact[a as usize];
    }
    let (nf, df) = (num.to_f64().unwrap_or(f64::INFINITY), den.to_f64().unwrap_or(f64::INFINITY));
    if nf.is_finite() && df.is_finite() {
        nf.sqrt() / df
    } else {
        // huge j: evaluate the reduced ratio instead of overflowing halves
        let ratio = BigRational::new(num, &den * &den);
        ratio.to_f64().unwrap_or(f64::INFINITY).sqrt()
    }
}

/// Rotation by an arbitrary angle, double precision.
pub fn d_matrix(two_j: u32, theta: f64) -> WignerDMatrix {
    assert!(theta.is_finite(), "angle must be finite");
    let n = two_j as usize + 1;
    let two_j_i = two_j as i64;
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let c_pow = dd_powers(c, two_j as usize);
    let s_pow = dd_powers(s, two_j as usize);
    let mut fact = Vec::with_capacity(two_j as usize + 1);
    fact.push(BigInt::one());
    for i in 1..=two_j as usize {
        fact.push(&fact[i - 1] * i);
    }

    let mut entries = vec![0.0; n * n];
    for (r, two_mp) in (-two_j_i..=two_j_i).rev().step_by(2).enumerate() {
        for (col, two_m) in (-two_j_i..=two_j_i).rev().step_by(2).enumerate() {
            let jm = (two_j_i + two_m) / 2;
            let jm_neg = (two_j_i - two_m) / 2;
            let jmp = (two_j_i + two_mp) / 2;
            let jmp_neg = (two_j_i - two_mp) / 2;
            let m_minus_mp = (two_m - two_mp) / 2;
            let k_min = 0.max(m_minus_mp);
            let k_max = jm.min(jmp_neg);
            let mut acc = Dd::ZERO;
            for k in k_min..=k_max {
                let coef = term_coefficient(
                    &fact,
                    [jm, jm_neg, jmp, jmp_neg],
                    [jm - k, k, jmp_neg - k, k - m_minus_mp],
                );
                let signed = if (k - m_minus_mp) % 2 == 0 { coef } else { -coef };
                let exp_c = (two_j_i - 2 * k + m_minus_mp) as usize;
                let exp_s = (2 * k - m_minus_mp) as usize;
                acc = acc.add(c_pow[exp_c].mul(s_pow[exp_s]).scale(signed));
            }
            entries[r * n + col] = acc.value();
        }
    }
    WignerDMatrix { two_j, theta, entries }
}

// ---------------------------------------------------------------------------
// rotation-implemented exchange for the two special configurations

fn validate_projection(two_s: u32, m: HalfInt) -> Result<()> {
    if !SpinPair::new(two_s).is_valid_projection(m) {
        return Err(Error::IndexOutOfRange(format!(
            "m={} is not a projection of s={}",
            m,
            HalfInt::from_twice(two_s as i64)
        )));
    }
    Ok(())
}

/// Sign produced by swapping two particles with equal projections |m, m>
/// via a pi rotation about z plus the orbital interchange: the phase
/// e^(-i pi (m + m)) = (-1)^(2m), always exactly a sign since 2m is an
/// integer.
pub fn exchange_by_rotation_same_spin(two_s: u32, m: HalfInt) -> Result<i8> {
    validate_projection(two_s, m)?;
    Ok(if m.twice() % 2 == 0 { 1 } else { -1 })
}

/// Sign produced by swapping two particles with opposite projections
/// |-m, m> via a pi rotation about y plus the orbital interchange: the
/// product of the two exact single-spin matrix elements
/// d^s_{-m,m}(pi) * d^s_{m,-m}(pi).
pub fn exchange_by_rotation_opposite_spin(two_s: u32, m: HalfInt) -> Result<i8> {
    validate_projection(two_s, m)?;
    let product = d_pi_entry(two_s, -m.twice(), m.twice()) * d_pi_entry(two_s, m.twice(), -m.twice());
    Ok(product as i8)
}

// ---------------------------------------------------------------------------
// the singlet counterexample

/// z-y-z Euler angles of an active rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerRotation {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerRotation {
    pub fn identity() -> EulerRotation {
        EulerRotation { alpha: 0.0, beta: 0.0, gamma: 0.0 }
    }

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> EulerRotation {
        EulerRotation { alpha, beta, gamma }
    }

    /// Draws alpha, gamma in [-pi, pi) and beta in [0, pi).
    pub fn sample(rng: &mut SplitMix64) -> EulerRotation {
        use std::f64::consts::{PI, TAU};
        EulerRotation {
            alpha: rng.next_f64() * TAU - PI,
            beta: rng.next_f64() * PI,
            gamma: rng.next_f64() * TAU - PI,
        }
    }
}

/// Maximum per-amplitude drift allowed before the singlet stops counting as
/// rotation invariant.
pub const SINGLET_TOLERANCE: f64 = 1e-10;

/// Outcome of rotating the j=0 state of two spins s.
#[derive(Clone, Copy, Debug)]
pub struct SingletVerdict {
    pub two_s: u32,
    /// Largest |rotated amplitude - original amplitude|.
    pub max_deviation: f64,
    /// Real part of the overlap of the rotated state with the original.
    pub overlap: f64,
}

impl SingletVerdict {
    pub fn is_invariant(&self) -> bool {
        self.max_deviation < SINGLET_TOLERANCE
    }

    /// The sign the rotation actually produced (+1 for a true scalar). A
    /// rotation can therefore never yield the -1 an exchange of half-integer
    /// spins requires.
    pub fn rotation_sign(&self) -> i8 {
        if self.overlap >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Applies the full two-spin rotation D(alpha, beta, gamma) tensor itself to
/// the j=0 coupled state and measures how far the state moved.
pub fn singlet_rotation_invariance(two_s: u32, rotation: EulerRotation) -> SingletVerdict {
    let table = build_table(two_s).expect("table builds for any two_s");
    let n = two_s as usize + 1;
    let two_s_i = two_s as i64;
    let singlet = CoupledIndex::new(HalfInt::ZERO, HalfInt::ZERO);

    // original amplitudes on the (m1, m2) grid, m descending
    let mut original = vec![Complex64::new(0.0, 0.0); n * n];
    for (a, two_m1) in (-two_s_i..=two_s_i).rev().step_by(2).enumerate() {
        let b = ((two_s_i + two_m1) / 2) as usize; // position of m2 = -m1
        let amp = table
            .cgc(singlet, UncoupledIndex::from_twice(two_m1, -two_m1))
            .expect("valid index")
            .to_f64();
        original[a * n + b] = Complex64::new(amp, 0.0);
    }

    // single-spin rotation matrix D_{m',m} = e^(-i m' alpha) d_{m',m}(beta) e^(-i m gamma)
    let d = d_matrix(two_s, rotation.beta);
    let mut big_d = vec![Complex64::new(0.0, 0.0); n * n];
    for (r, two_mp) in (-two_s_i..=two_s_i).rev().step_by(2).enumerate() {
        for (c, two_m) in (-two_s_i..=two_s_i).rev().step_by(2).enumerate() {
            let phase = Complex64::from_polar(1.0, -rotation.alpha * two_mp as f64 / 2.0)
                * Complex64::from_polar(1.0, -rotation.gamma * two_m as f64 / 2.0);
            big_d[r * n + c] = phase * d.entry_at(r, c);
        }
    }

    // rotated = (D tensor D) original, i.e. D * original * transpose(D)
    let mut rotated = vec![Complex64::new(0.0, 0.0); n * n];
    for ap in 0..n {
        for bp in 0..n {
            let mut sum = Complex64::new(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    sum += big_d[ap * n + a] * big_d[bp * n + b] * original[a * n + b];
                }
            }
            rotated[ap * n + bp] = sum;
        }
    }

    let mut max_deviation = 0.0f64;
    let mut overlap = Complex64::new(0.0, 0.0);
    for i in 0..n * n {
        max_deviation = max_deviation.max((rotated[i] - original[i]).norm());
        overlap += original[i].conj() * rotated[i];
    }
    SingletVerdict { two_s, max_deviation, overlap: overlap.re }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::expected_sign;
    use std::f64::consts::PI;

    #[test]
    fn pi_entries_for_small_j() {
        // j = 1/2: rows m' = 1/2, -1/2; columns m = 1/2, -1/2
        assert_eq!(d_pi_entry(1, 1, 1), 0);
        assert_eq!(d_pi_entry(1, 1, -1), -1);
        assert_eq!(d_pi_entry(1, -1, 1), 1);
        assert_eq!(d_pi_entry(1, -1, -1), 0);
        // j = 1
        assert_eq!(d_pi_entry(2, -2, 2), 1);
        assert_eq!(d_pi_entry(2, 0, 0), -1);
        assert_eq!(d_pi_entry(2, 2, -2), 1);
    }

    #[test]
    fn pi_matrix_squares_to_rotation_by_two_pi() {
        for two_j in 0..=8u32 {
            let n = two_j as usize + 1;
            let two_j_i = two_j as i64;
            let expected = if two_j % 2 == 0 { 1 } else { -1 };
            let labels: Vec<i64> = (-two_j_i..=two_j_i).rev().step_by(2).collect();
            for (r, &mp) in labels.iter().enumerate() {
                for (c, &m) in labels.iter().enumerate() {
                    let mut acc = 0i64;
                    for &mid in &labels {
                        acc += d_pi_entry(two_j, mp, mid) * d_pi_entry(two_j, mid, m);
                    }
                    let want = if r == c { expected } else { 0 };
                    assert_eq!(acc, want, "two_j={two_j}, row={r}, col={c} of {n}x{n}");
                }
            }
        }
    }

    #[test]
    fn pi_matrix_is_exactly_orthogonal() {
        for two_j in 0..=8u32 {
            // entries are 0/±1, so the defect computation is exact
            assert_eq!(d_matrix_pi(two_j).orthogonality_defect(), 0.0);
        }
    }

    #[test]
    fn zero_angle_gives_exact_identity() {
        for two_j in [0u32, 1, 2, 5, 11] {
            let d = d_matrix(two_j, 0.0);
            let n = d.dim();
            for r in 0..n {
                for c in 0..n {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert_eq!(d.entry_at(r, c), want, "two_j={two_j}");
                }
            }
        }
    }

    #[test]
    fn half_angle_cosine_for_spin_half() {
        let d = d_matrix(1, PI / 2.0);
        assert!((d.entry(1, 1) - (PI / 4.0).cos()).abs() < 1e-12);
        assert!((d.entry(1, -1) + (PI / 4.0).sin()).abs() < 1e-12);
        assert!((d.entry(-1, 1) - (PI / 4.0).sin()).abs() < 1e-12);
        assert!((d.entry(-1, -1) - (PI / 4.0).cos()).abs() < 1e-12);
    }

    #[test]
    fn floating_path_matches_exact_path_at_pi() {
        for two_j in 0..=10u32 {
            let float = d_matrix(two_j, PI);
            let exact = d_matrix_pi(two_j);
            let n = float.dim();
            for r in 0..n {
                for c in 0..n {
                    assert!(
                        (float.entry_at(r, c) - exact.entry_at(r, c)).abs() < 1e-12,
                        "two_j={two_j}, ({r},{c}): {} vs {}",
                        float.entry_at(r, c),
                        exact.entry_at(r, c)
                    );
                }
            }
        }
    }

    #[test]
    fn floating_matrices_stay_orthogonal() {
        let mut rng = SplitMix64::new(2024);
        for two_j in [1u32, 4, 9, 12] {
            for _ in 0..20 {
                let theta = rng.next_f64() * 2.0 * PI;
                let defect = d_matrix(two_j, theta).orthogonality_defect();
                assert!(defect < 1e-12, "two_j={two_j}, theta={theta}: defect {defect:e}");
            }
        }
    }

    #[test]
    fn same_spin_rotation_signs() {
        assert_eq!(exchange_by_rotation_same_spin(1, HalfInt::from_twice(1)).unwrap(), -1);
        assert_eq!(exchange_by_rotation_same_spin(2, HalfInt::ZERO).unwrap(), 1);
        assert_eq!(exchange_by_rotation_same_spin(3, HalfInt::from_twice(-1)).unwrap(), -1);
        assert!(exchange_by_rotation_same_spin(2, HalfInt::from_twice(1)).is_err());
        assert!(exchange_by_rotation_same_spin(1, HalfInt::from_twice(3)).is_err());
    }

    #[test]
    fn opposite_spin_rotation_signs() {
        assert_eq!(exchange_by_rotation_opposite_spin(1, HalfInt::from_twice(1)).unwrap(), -1);
        assert_eq!(exchange_by_rotation_opposite_spin(2, HalfInt::from_int(1)).unwrap(), 1);
        assert_eq!(exchange_by_rotation_opposite_spin(4, HalfInt::ZERO).unwrap(), 1);
        assert!(exchange_by_rotation_opposite_spin(2, HalfInt::from_twice(-3)).is_err());
    }

    #[test]
    fn both_rotation_routes_give_the_statistics_sign() {
        for two_s in 0..=12u32 {
            let pair = SpinPair::new(two_s);
            for m in pair.projections() {
                let want = expected_sign(two_s);
                assert_eq!(exchange_by_rotation_same_spin(two_s, m).unwrap(), want, "same, two_s={two_s}, m={m}");
                assert_eq!(
                    exchange_by_rotation_opposite_spin(two_s, m).unwrap(),
                    want,
                    "opposite, two_s={two_s}, m={m}"
                );
            }
        }
    }

    #[test]
    fn singlet_survives_rotations() {
        let verdict = singlet_rotation_invariance(1, EulerRotation::new(0.3, 1.1, -2.0));
        assert!(verdict.is_invariant(), "deviation {:e}", verdict.max_deviation);
        assert_eq!(verdict.rotation_sign(), 1);
        assert_ne!(verdict.rotation_sign() as i8, expected_sign(1));

        let mut rng = SplitMix64::new(5);
        for two_s in 1..=4u32 {
            for _ in 0..10 {
                let verdict = singlet_rotation_invariance(two_s, EulerRotation::sample(&mut rng));
                assert!(
                    verdict.is_invariant(),
                    "two_s={two_s}: deviation {:e}",
                    verdict.max_deviation
                );
                assert!((verdict.overlap - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identity_rotation_is_an_exact_fixed_point() {
        let verdict = singlet_rotation_invariance(2, EulerRotation::identity());
        assert_eq!(verdict.max_deviation, 0.0);
        assert_eq!(verdict.rotation_sign(), 1);
    }

    #[test]
    fn sampled_rotations_are_deterministic() {
        let mut a = SplitMix64::new(17);
        let mut b = SplitMix64::new(17);
        assert_eq!(EulerRotation::sample(&mut a), EulerRotation::sample(&mut b));
        let r = EulerRotation::sample(&mut a);
        assert!(r.beta >= 0.0 && r.beta < PI);
        assert!(r.alpha >= -PI && r.alpha < PI);
    }
}
