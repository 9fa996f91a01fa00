//! States of two identical spins in the uncoupled and coupled bases.
//!
//! A state is a sparse map from basis keys to exact amplitudes. The orbital
//! degree of freedom is reduced to the formal argument order of the (s-wave)
//! orbital factor: `R12` tags the function taken as written, `R21` the same
//! function with its two coordinates interchanged. Basis transforms apply the
//! Clebsch-Gordan matrix blockwise per orbital tag and per total projection m.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cgc::CgcTable;
use crate::error::{Error, Result};
use crate::exact::SignedSqrtRational;
use crate::half_int::HalfInt;
use crate::rng::SplitMix64;

/// A pair of identical spins `s`, stored as `two_s = 2s`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SpinPair {
    two_s: u32,
}

impl SpinPair {
    pub fn new(two_s: u32) -> Self {
        SpinPair { two_s }
    }

    pub fn two_s(&self) -> u32 {
        self.two_s
    }

    pub fn s(&self) -> HalfInt {
        HalfInt::from_twice(self.two_s as i64)
    }

    /// Dimension of one spin: 2s + 1.
    pub fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    /// Dimension of the pair spin space: (2s + 1)^2.
    pub fn pair_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    /// Single-particle projections -s, -s+1, ..., s.
    pub fn projections(&self) -> impl Iterator<Item = HalfInt> {
        let two_s = self.two_s as i64;
        (-two_s..=two_s).step_by(2).map(HalfInt::from_twice)
    }

    /// Total projections m1 + m2: -2s, ..., 2s (always integers).
    pub fn total_projections(&self) -> impl Iterator<Item = HalfInt> {
        let two_s = self.two_s as i64;
        (-two_s..=two_s).map(|k| HalfInt::from_twice(2 * k))
    }

    /// Coupled total spins j = 0, 1, ..., 2s (always integers).
    pub fn coupled_j_values(&self) -> impl Iterator<Item = HalfInt> {
        (0..=self.two_s as i64).map(HalfInt::from_int)
    }

    pub fn is_valid_projection(&self, m: HalfInt) -> bool {
        m.twice().unsigned_abs() <= self.two_s as u64
            && m.twice().rem_euclid(2) == (self.two_s % 2) as i64
    }

    pub fn is_valid_uncoupled(&self, idx: UncoupledIndex) -> bool {
        self.is_valid_projection(idx.m1) && self.is_valid_projection(idx.m2)
    }

    pub fn is_valid_coupled(&self, idx: CoupledIndex) -> bool {
        idx.j.is_integer()
            && idx.m.is_integer()
            && !idx.j.is_negative()
            && idx.j.twice() <= 2 * self.two_s as i64
            && idx.m.abs() <= idx.j
    }
}

/// Formal order of the spatial arguments of the orbital factor.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum OrbitalOrder {
    R12,
    R21,
}

impl OrbitalOrder {
    pub fn swapped(self) -> Self {
        match self {
            OrbitalOrder::R12 => OrbitalOrder::R21,
            OrbitalOrder::R21 => OrbitalOrder::R12,
        }
    }
}

impl fmt::Display for OrbitalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitalOrder::R12 => write!(f, "R12"),
            OrbitalOrder::R21 => write!(f, "R21"),
        }
    }
}

/// Uncoupled basis label |m1, m2>.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct UncoupledIndex {
    pub m1: HalfInt,
    pub m2: HalfInt,
}

impl UncoupledIndex {
    pub fn new(m1: HalfInt, m2: HalfInt) -> Self {
        UncoupledIndex { m1, m2 }
    }

    pub fn from_twice(two_m1: i64, two_m2: i64) -> Self {
        UncoupledIndex { m1: HalfInt::from_twice(two_m1), m2: HalfInt::from_twice(two_m2) }
    }

    /// Total projection m1 + m2.
    pub fn m(&self) -> HalfInt {
        self.m1 + self.m2
    }

    pub fn swapped(&self) -> Self {
        UncoupledIndex { m1: self.m2, m2: self.m1 }
    }
}

/// Coupled basis label |j, m>.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CoupledIndex {
    pub j: HalfInt,
    pub m: HalfInt,
}

impl CoupledIndex {
    pub fn new(j: HalfInt, m: HalfInt) -> Self {
        CoupledIndex { j, m }
    }

    pub fn from_twice(two_j: i64, two_m: i64) -> Self {
        CoupledIndex { j: HalfInt::from_twice(two_j), m: HalfInt::from_twice(two_m) }
    }
}

/// Sparse exact state over `(OrbitalOrder, |m1, m2>)` keys. Absent keys are
/// zero; stored amplitudes are never zero.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "StateDto", into = "StateDto")]
pub struct TwoParticleState {
    pair: SpinPair,
    amps: BTreeMap<(OrbitalOrder, UncoupledIndex), SignedSqrtRational>,
}

impl TwoParticleState {
    pub fn new(two_s: u32) -> Self {
        TwoParticleState { pair: SpinPair::new(two_s), amps: BTreeMap::new() }
    }

    /// Unit amplitude on a single basis key.
    pub fn basis_state(two_s: u32, orbital: OrbitalOrder, idx: UncoupledIndex) -> Result<Self> {
        let mut st = Self::new(two_s);
        st.set_amplitude(orbital, idx, SignedSqrtRational::one())?;
        Ok(st)
    }

    pub fn pair(&self) -> SpinPair {
        self.pair
    }

    pub fn two_s(&self) -> u32 {
        self.pair.two_s()
    }

    pub fn set_amplitude(&mut self, orbital: OrbitalOrder, idx: UncoupledIndex, amp: SignedSqrtRational) -> Result<()> {
        if !self.pair.is_valid_uncoupled(idx) {
            return Err(Error::IndexOutOfRange(format!(
                "uncoupled index (m1={}, m2={}) invalid for s={}",
                idx.m1,
                idx.m2,
                self.pair.s()
            )));
        }
        if amp.is_zero() {
            self.amps.remove(&(orbital, idx));
        } else {
            self.amps.insert((orbital, idx), amp);
        }
        Ok(())
    }

    pub fn amplitude(&self, orbital: OrbitalOrder, idx: UncoupledIndex) -> SignedSqrtRational {
        self.amps.get(&(orbital, idx)).cloned().unwrap_or_else(SignedSqrtRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (OrbitalOrder, UncoupledIndex, &SignedSqrtRational)> {
        self.amps.iter().map(|(&(o, idx), amp)| (o, idx, amp))
    }

    pub fn term_count(&self) -> usize {
        self.amps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    /// Exact squared norm: sum of squared amplitudes.
    pub fn norm_sq(&self) -> BigRational {
        self.amps.values().map(|a| a.square()).fold(BigRational::zero(), |acc, x| acc + x)
    }

    pub fn scaled(&self, factor: &SignedSqrtRational) -> Self {
        let mut out = Self::new(self.two_s());
        for (o, idx, amp) in self.terms() {
            let v = amp.mul(factor);
            if !v.is_zero() {
                out.amps.insert((o, idx), v);
            }
        }
        out
    }

    /// Exact component-wise sum; fails if two amplitudes are incommensurable.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        assert_eq!(self.two_s(), other.two_s(), "states must share two_s");
        let mut out = self.clone();
        for (o, idx, amp) in other.terms() {
            let sum = out.amplitude(o, idx).try_add(amp)?;
            out.set_amplitude(o, idx, sum)?;
        }
        Ok(out)
    }

    /// Same amplitudes with both orbital tags interchanged.
    pub fn orbital_swapped(&self) -> Self {
        let mut out = Self::new(self.two_s());
        for (o, idx, amp) in self.terms() {
            out.amps.insert((o.swapped(), idx), amp.clone());
        }
        out
    }
}

/// Sparse exact state over `(OrbitalOrder, |j, m>)` keys.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoupledState {
    pair: SpinPair,
    amps: BTreeMap<(OrbitalOrder, CoupledIndex), SignedSqrtRational>,
}

impl CoupledState {
    pub fn new(two_s: u32) -> Self {
        CoupledState { pair: SpinPair::new(two_s), amps: BTreeMap::new() }
    }

    pub fn basis_state(two_s: u32, orbital: OrbitalOrder, idx: CoupledIndex) -> Result<Self> {
        let mut st = Self::new(two_s);
        st.set_amplitude(orbital, idx, SignedSqrtRational::one())?;
        Ok(st)
    }

    pub fn pair(&self) -> SpinPair {
        self.pair
    }

    pub fn two_s(&self) -> u32 {
        self.pair.two_s()
    }

    pub fn set_amplitude(&mut self, orbital: OrbitalOrder, idx: CoupledIndex, amp: SignedSqrtRational) -> Result<()> {
        if !self.pair.is_valid_coupled(idx) {
            return Err(Error::IndexOutOfRange(format!(
                "coupled index (j={}, m={}) invalid for s={}",
                idx.j,
                idx.m,
                self.pair.s()
            )));
        }
        if amp.is_zero() {
            self.amps.remove(&(orbital, idx));
        } else {
            self.amps.insert((orbital, idx), amp);
        }
        Ok(())
    }

    pub fn amplitude(&self, orbital: OrbitalOrder, idx: CoupledIndex) -> SignedSqrtRational {
        self.amps.get(&(orbital, idx)).cloned().unwrap_or_else(SignedSqrtRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (OrbitalOrder, CoupledIndex, &SignedSqrtRational)> {
        self.amps.iter().map(|(&(o, idx), amp)| (o, idx, amp))
    }

    pub fn term_count(&self) -> usize {
        self.amps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sq(&self) -> BigRational {
        self.amps.values().map(|a| a.square()).fold(BigRational::zero(), |acc, x| acc + x)
    }
}

/// Expands each uncoupled amplitude over the coupled basis:
/// `chi(o, j, m) = sum over m1+m2=m of C(j, m; m1, m2) * psi(o, m1, m2)`.
///
/// The sum can leave the `sign * sqrt(p/q)` field for superposition states
/// (the coefficients of one (j, m) row are mutually incommensurable radicals
/// in general); such inputs are reported as `IncommensurableRadicals`.
pub fn to_coupled(state: &TwoParticleState, table: &CgcTable) -> Result<CoupledState> {
    assert_eq!(state.two_s(), table.two_s(), "state and table must share two_s");
    let mut acc: BTreeMap<(OrbitalOrder, CoupledIndex), SignedSqrtRational> = BTreeMap::new();
    for (o, idx, amp) in state.terms() {
        let m = idx.m();
        for j in state.pair().coupled_j_values() {
            if m.abs() > j {
                continue;
            }
            let c = table.cgc(CoupledIndex::new(j, m), idx)?;
            if c.is_zero() {
                continue;
            }
            let key = (o, CoupledIndex::new(j, m));
            let contribution = c.mul(amp);
            let entry = acc.remove(&key).unwrap_or_else(SignedSqrtRational::zero);
            let sum = entry.try_add(&contribution)?;
            if !sum.is_zero() {
                acc.insert(key, sum);
            }
        }
    }
    let mut out = CoupledState::new(state.two_s());
    out.amps = acc;
    Ok(out)
}

/// Expands each coupled amplitude over the uncoupled basis:
/// `psi(o, m1, m2) = sum over |m| <= j <= 2s of C(j, m; m1, m2) * chi(o, j, m)`.
///
/// Subject to the same representability caveat as [`to_coupled`].
pub fn to_uncoupled(state: &CoupledState, table: &CgcTable) -> Result<TwoParticleState> {
    assert_eq!(state.two_s(), table.two_s(), "state and table must share two_s");
    let mut acc: BTreeMap<(OrbitalOrder, UncoupledIndex), SignedSqrtRational> = BTreeMap::new();
    for (o, idx, amp) in state.terms() {
        for u in table.pairs_with_m(idx.m) {
            let c = table.cgc(idx, u)?;
            if c.is_zero() {
                continue;
            }
            let key = (o, u);
            let contribution = c.mul(amp);
            let entry = acc.remove(&key).unwrap_or_else(SignedSqrtRational::zero);
            let sum = entry.try_add(&contribution)?;
            if !sum.is_zero() {
                acc.insert(key, sum);
            }
        }
    }
    let mut out = TwoParticleState::new(state.two_s());
    out.amps = acc;
    Ok(out)
}

fn draw_amplitude(rng: &mut SplitMix64) -> SignedSqrtRational {
    let k = rng.next_below(65);
    let negative = rng.next_u64() & 1 == 1;
    if k == 0 {
        return SignedSqrtRational::zero();
    }
    let v = SignedSqrtRational::sqrt_ratio(k as i64, 64);
    if negative {
        v.negate()
    } else {
        v
    }
}

/// Seeded random state with amplitudes `(-1)^b * sqrt(k/64)`, `k` uniform in
/// `0..=64` (`k = 0` leaves the slot empty).
///
/// Replayable recipe: a splitmix64 stream seeded with `seed`; slots visited as
/// `R12` then `R21`, `two_m1` ascending, `two_m2` ascending; per slot draw
/// `k = next() % 65` then `b = next() & 1`.
pub fn random_state(two_s: u32, seed: u64) -> TwoParticleState {
    let mut rng = SplitMix64::new(seed);
    let mut st = TwoParticleState::new(two_s);
    let pair = SpinPair::new(two_s);
    for orbital in [OrbitalOrder::R12, OrbitalOrder::R21] {
        for m1 in pair.projections() {
            for m2 in pair.projections() {
                let amp = draw_amplitude(&mut rng);
                st.set_amplitude(orbital, UncoupledIndex::new(m1, m2), amp).expect("valid index");
            }
        }
    }
    st
}

/// Seeded random state with at most one populated `(m1, m2)` slot per
/// `(orbital, m1 + m2)` block.
///
/// Basis transforms map such states within the exact field: each coupled
/// amplitude collapses to a single `C * psi` product, so the transform
/// round-trip properties can be exercised without leaving `sign * sqrt(p/q)`.
/// Slots visited as `R12` then `R21`, `two_m` ascending; per block draw the
/// pair position `p = next() % count`, then `k = next() % 65`, `b = next() & 1`.
pub fn random_block_sparse_state(two_s: u32, seed: u64) -> TwoParticleState {
    let mut rng = SplitMix64::new(seed);
    let mut st = TwoParticleState::new(two_s);
    let pair = SpinPair::new(two_s);
    let two_s = two_s as i64;
    for orbital in [OrbitalOrder::R12, OrbitalOrder::R21] {
        for m in pair.total_projections() {
            let two_m = m.twice();
            let lo = (-two_s).max(two_m - two_s);
            let hi = two_s.min(two_m + two_s);
            let count = (hi - lo) / 2 + 1;
            let pick = rng.next_below(count as u64) as i64;
            let two_m1 = lo + 2 * pick;
            let amp = draw_amplitude(&mut rng);
            st.set_amplitude(orbital, UncoupledIndex::from_twice(two_m1, two_m - two_m1), amp)
                .expect("valid index");
        }
    }
    st
}

/// Seeded random coupled state with at most one populated j per
/// `(orbital, m)` block; the coupled-side analogue of
/// [`random_block_sparse_state`].
pub fn random_block_sparse_coupled(two_s: u32, seed: u64) -> CoupledState {
    let mut rng = SplitMix64::new(seed);
    let mut st = CoupledState::new(two_s);
    let pair = SpinPair::new(two_s);
    let two_s = two_s as i64;
    for orbital in [OrbitalOrder::R12, OrbitalOrder::R21] {
        for m in pair.total_projections() {
            let two_m_abs = m.twice().abs();
            let j_choices = (two_m_abs / 2..=two_s).count() as u64;
            let pick = rng.next_below(j_choices) as i64;
            let j = HalfInt::from_int(two_m_abs / 2 + pick);
            let amp = draw_amplitude(&mut rng);
            st.set_amplitude(orbital, CoupledIndex::new(j, m), amp).expect("valid index");
        }
    }
    st
}

#[derive(Serialize, Deserialize)]
struct TermDto {
    orbital: OrbitalOrder,
    two_m1: i64,
    two_m2: i64,
    amp: SignedSqrtRational,
}

#[derive(Serialize, Deserialize)]
struct StateDto {
    two_s: u32,
    terms: Vec<TermDto>,
}

impl From<TwoParticleState> for StateDto {
    fn from(state: TwoParticleState) -> StateDto {
        let terms = state
            .terms()
            .map(|(o, idx, amp)| TermDto {
                orbital: o,
                two_m1: idx.m1.twice(),
                two_m2: idx.m2.twice(),
                amp: amp.clone(),
            })
            .collect();
        StateDto { two_s: state.two_s(), terms }
    }
}

impl TryFrom<StateDto> for TwoParticleState {
    type Error = Error;

    fn try_from(dto: StateDto) -> Result<TwoParticleState> {
        let mut st = TwoParticleState::new(dto.two_s);
        for t in dto.terms {
            let idx = UncoupledIndex::from_twice(t.two_m1, t.two_m2);
            if !st.amplitude(t.orbital, idx).is_zero() {
                return Err(Error::Parse(format!(
                    "duplicate term ({}, two_m1={}, two_m2={})",
                    t.orbital, t.two_m1, t.two_m2
                )));
            }
            st.set_amplitude(t.orbital, idx, t.amp)?;
        }
        Ok(st)
    }
}
