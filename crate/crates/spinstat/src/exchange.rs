//! Parity, spin-label swap, and full particle exchange for two-particle
//! states, plus the randomized verification that exchange acts as the sign
//! (-1)^(2s) times the plain relabeling of both particles.
//!
//! Parity inverts the relative orbital coordinate: the orbital tag flips and
//! each coupled total-spin-j sector gains the phase (-1)^j. Uncoupled spin
//! labels are never touched directly. Working out that action on the
//! uncoupled basis gives, per total-projection block, the kernel
//!
//! ```text
//! K[(m1,m2),(m1',m2')] = sum over j of (-1)^j C(j,m;m1,m2) C(j,m;m1',m2')
//! ```
//!
//! which this module evaluates literally from the coefficient table — it does
//! not assume the closed form the verification is after. The j-sum stays
//! inside the sign*sqrt(rational) field because for fixed (m1,m2,m1',m2') all
//! products across j share one square class; summing products first is what
//! keeps parity total on arbitrary states, where a naive
//! to_coupled/to_uncoupled round trip can leave the field midway.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

use crate::cgc::CgcTable;
use crate::error::{Error, Result};
use crate::exact::SignedSqrtRational;
use crate::rng::SplitMix64;
use crate::spin_space::{random_state, TwoParticleState, UncoupledIndex};

/// Per-block parity action on uncoupled spin labels: for each source
/// (m1, m2), the nonzero images under "multiply coupled sector j by (-1)^j".
#[derive(Debug)]
pub(crate) struct ParityKernel {
    map: BTreeMap<UncoupledIndex, Vec<(UncoupledIndex, SignedSqrtRational)>>,
}

impl ParityKernel {
    pub(crate) fn build(table: &CgcTable) -> ParityKernel {
        let pair = table.pair();
        let mut map = BTreeMap::new();
        for m in pair.total_projections() {
            let js: Vec<_> = pair.coupled_j_values().filter(|j| m.abs() <= *j).collect();
            let pairs = table.pairs_with_m(m);
            for &source in &pairs {
                let mut images = Vec::new();
                for &target in &pairs {
                    let mut sum = SignedSqrtRational::zero();
                    for &j in &js {
                        let c = crate::spin_space::CoupledIndex::new(j, m);
                        let product = table
                            .cgc(c, source)
                            .expect("valid index")
                            .mul(&table.cgc(c, target).expect("valid index"));
                        let term = if j.to_int() % 2 == 0 { product } else { product.negate() };
                        sum = sum.try_add(&term).expect("parity kernel j-sum stays in the radical field");
                    }
                    if !sum.is_zero() {
                        images.push((target, sum));
                    }
                }
                map.insert(source, images);
            }
        }
        ParityKernel { map }
    }

    fn targets(&self, source: UncoupledIndex) -> &[(UncoupledIndex, SignedSqrtRational)] {
        self.map.get(&source).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn kernel_for(table: &CgcTable) -> &ParityKernel {
    table.parity_kernel.get_or_init(|| ParityKernel::build(table))
}

fn check_same_pair(state: &TwoParticleState, table: &CgcTable) -> Result<()> {
    if state.two_s() != table.two_s() {
        return Err(Error::IndexOutOfRange(format!(
            "state has two_s={} but table has two_s={}",
            state.two_s(),
            table.two_s()
        )));
    }
    Ok(())
}

/// Parity: inversion of the relative orbital coordinate. Swaps the orbital
/// tag and multiplies each coupled sector j by (-1)^j; an involution.
pub fn parity(state: &TwoParticleState, table: &CgcTable) -> Result<TwoParticleState> {
    check_same_pair(state, table)?;
    let kernel = kernel_for(table);
    let mut out = TwoParticleState::new(state.two_s());
    for (orbital, u, amp) in state.terms() {
        let slot = orbital.swapped();
        for (target, coeff) in kernel.targets(u) {
            let existing = out.amplitude(slot, *target);
            out.set_amplitude(slot, *target, existing.try_add(&amp.mul(coeff))?)?;
        }
    }
    Ok(out)
}

/// Swap of the two spin labels only: the amplitude at (o, m1, m2) moves to
/// (o, m2, m1). The orbital tag is untouched; an involution.
pub fn spin_swap(state: &TwoParticleState) -> TwoParticleState {
    let mut out = TwoParticleState::new(state.two_s());
    for (orbital, u, amp) in state.terms() {
        out.set_amplitude(orbital, u.swapped(), amp.clone()).expect("swapped index stays valid");
    }
    out
}

/// Full exchange of the two particles, realized through parity.
///
/// Moving each particle to the other's orbital slot carries its spin
/// projection along, so the parity route already lands every amplitude on the
/// fully relabeled key: the image at (swapped orbital, m2, m1) is a pure sign
/// times the source amplitude at (o, m1, m2). That sign is what
/// [`verify_spin_statistics`] measures; nothing here assumes its value.
pub fn exchange(state: &TwoParticleState, table: &CgcTable) -> Result<TwoParticleState> {
    parity(state, table)
}

/// Overall sign read off from comparing an exchanged state against the plain
/// relabeling of the original: a single global +1 or -1, or `Mixed` when no
/// one sign works for every amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservedSign {
    Plus,
    Minus,
    Mixed,
}

impl ObservedSign {
    pub fn as_i8(self) -> Option<i8> {
        match self {
            ObservedSign::Plus => Some(1),
            ObservedSign::Minus => Some(-1),
            ObservedSign::Mixed => None,
        }
    }
}

impl std::fmt::Display for ObservedSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObservedSign::Plus => write!(f, "+1"),
            ObservedSign::Minus => write!(f, "-1"),
            ObservedSign::Mixed => write!(f, "mixed"),
        }
    }
}

impl Serialize for ObservedSign {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ObservedSign::Plus => serializer.serialize_i8(1),
            ObservedSign::Minus => serializer.serialize_i8(-1),
            ObservedSign::Mixed => serializer.serialize_str("mixed"),
        }
    }
}

/// The sign the exchange of two identical spin-s particles must produce:
/// -1 for half-integer s, +1 for integer s.
pub fn expected_sign(two_s: u32) -> i8 {
    if two_s % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A state on which the single-sign comparison failed, kept with its image.
#[derive(Clone, Debug)]
pub struct ExchangeWitness {
    pub before: TwoParticleState,
    pub after: TwoParticleState,
}

/// Outcome of the randomized exchange-sign verification.
#[derive(Clone, Debug)]
pub struct ExchangeReport {
    pub two_s: u32,
    pub states_tested: u32,
    pub sign_observed: ObservedSign,
    pub witness: Option<ExchangeWitness>,
}

impl ExchangeReport {
    /// True when one global sign was observed and it equals (-1)^(2s).
    pub fn is_pass(&self) -> bool {
        self.witness.is_none() && self.sign_observed.as_i8() == Some(expected_sign(self.two_s))
    }
}

impl Serialize for ExchangeReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ExchangeReport", 4)?;
        s.serialize_field("two_s", &self.two_s)?;
        s.serialize_field("trials", &self.states_tested)?;
        s.serialize_field("sign", &self.sign_observed)?;
        s.serialize_field("witness", &self.witness.as_ref().map(|w| &w.before))?;
        s.end()
    }
}

/// Compares `after` against the both-labels relabeling of `before` and
/// returns the single sign relating them, or `Mixed`. `before` must be
/// non-zero (a zero state pins no sign).
fn relabeling_sign(before: &TwoParticleState, after: &TwoParticleState) -> ObservedSign {
    debug_assert!(!before.is_zero());
    if after.term_count() != before.term_count() {
        return ObservedSign::Mixed;
    }
    let mut sign: Option<i8> = None;
    for (orbital, u, amp) in before.terms() {
        let image = after.amplitude(orbital.swapped(), u.swapped());
        let here = if image == *amp {
            1
        } else if image == amp.negate() {
            -1
        } else {
            return ObservedSign::Mixed;
        };
        match sign {
            None => sign = Some(here),
            Some(prev) if prev != here => return ObservedSign::Mixed,
            Some(_) => {}
        }
    }
    match sign.expect("non-zero state has terms") {
        1 => ObservedSign::Plus,
        _ => ObservedSign::Minus,
    }
}

/// Exchanges `trials` seeded random states of two spin-s particles and
/// reports the observed global sign. Each trial draws its own PRNG stream
/// from a master stream over `seed`; zero draws are discarded.
pub fn verify_spin_statistics(two_s: u32, trials: u32, seed: u64) -> ExchangeReport {
    assert!(trials >= 1, "at least one trial required");
    let table = crate::cgc::build_table(two_s).expect("table builds for any two_s");
    let mut master = SplitMix64::new(seed);
    let mut aggregate: Option<ObservedSign> = None;
    let mut witness = None;
    let mut tested = 0u32;
    for _ in 0..trials {
        let state = loop {
            let candidate = random_state(two_s, master.next_u64());
            if !candidate.is_zero() {
                break candidate;
            }
        };
        let image = exchange(&state, &table).expect("exchange is total on valid states");
        let sign = relabeling_sign(&state, &image);
        tested += 1;
        let conflict = matches!((aggregate, sign), (Some(a), b) if a != b);
        if sign == ObservedSign::Mixed || conflict {
            aggregate = Some(ObservedSign::Mixed);
            witness = Some(ExchangeWitness { before: state, after: image });
            break;
        }
        aggregate = Some(sign);
    }
    ExchangeReport {
        two_s,
        states_tested: tested,
        sign_observed: aggregate.expect("trials >= 1"),
        witness,
    }
}
