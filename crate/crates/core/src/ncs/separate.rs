//! Randomized search for a specialization that does not kill a given element.
//!
//! For a nonzero element the search walks variable counts `1..=max_n` and
//! sparse random automorphisms at level 2 (general and linear-in-t profiles
//! alternating), with the ring sized from the element's weight: the
//! t-truncation must resolve every needed operator coefficient and the
//! z-truncation leaves room for the degree shift of a weight-w image.
//! The first basis monomial with a nonzero image is returned as a witness.
//! Exhausting the budget is reported as inconclusive, never as a disproof.

use rand_chacha::ChaCha8Rng;

use rand::SeedableRng;

use crate::autgroup::{random_automorphism, Automorphism, Profile};
use crate::diffop::MonomialBasis;
use crate::error::{Error, Result};
use crate::ncs::{derive_seed, specialize};
use crate::nsym::NSymElem;
use crate::series::{RingContext, TruncSeries};
use crate::DEFAULT_SEED;

/// Search budget; the defaults match the published acceptance run.
#[derive(Debug, Clone, Copy)]
pub struct SeparateBudget {
    pub max_n: usize,
    pub attempts: u32,
    pub seed: u64,
}

impl Default for SeparateBudget {
    fn default() -> Self {
        Self { max_n: 3, attempts: 200, seed: DEFAULT_SEED }
    }
}

/// A separating evaluation: the automorphism, the basis monomial it was
/// probed on, and the nonzero image.
#[derive(Debug, Clone)]
pub struct SeparationWitness {
    pub automorphism: Automorphism,
    pub monomial: TruncSeries,
    pub value: TruncSeries,
    pub attempts_used: u32,
}

impl SeparationWitness {
    pub fn n(&self) -> usize {
        self.automorphism.context().n()
    }
}

/// Search outcome. `Exhausted` records the budget spent; it is not a proof
/// that the element specializes to zero everywhere.
#[derive(Debug, Clone)]
pub enum SeparateOutcome {
    Witness(SeparationWitness),
    Exhausted { attempts: u32 },
}

/// Searches for an automorphism whose operator image of `p` acts nontrivially
/// on some basis monomial.
pub fn separate(
    p: &NSymElem,
    budget: &SeparateBudget,
    commutative: bool,
) -> Result<SeparateOutcome> {
    if p.is_zero() {
        return Err(Error::ZeroElement);
    }
    if budget.max_n == 0 {
        return Err(Error::Schema("max_n must be >= 1".into()));
    }
    let alpha = 2u32;
    let weight = p.top_weight();
    let max_t = weight.max(1);
    let max_z = (2 * weight + 1).max(alpha + 1);
    let mut bases: Vec<Option<(RingContext, MonomialBasis)>> =
        (0..budget.max_n).map(|_| None).collect();

    for attempt in 0..budget.attempts {
        let n = 1 + (attempt as usize % budget.max_n);
        let slot = &mut bases[n - 1];
        if slot.is_none() {
            let ctx = RingContext::new(n, commutative, max_z, max_t)?;
            let basis = MonomialBasis::new(&ctx);
            *slot = Some((ctx, basis));
        }
        let (ctx, basis) = slot.as_ref().unwrap();
        let profile = if attempt % 2 == 0 { Profile::General } else { Profile::LinearInT };
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, 101, attempt as u64));
        let aut = random_automorphism(ctx, alpha, profile, &mut rng)
            .expect("search ring admits random automorphisms");
        let op = specialize(p, &aut).expect("search ring resolves the element's weight");
        for i in 0..basis.len() {
            let mono = basis.mono_series(i);
            let value = op.apply(&mono);
            if !value.is_zero() {
                return Ok(SeparateOutcome::Witness(SeparationWitness {
                    automorphism: aut,
                    monomial: mono,
                    value,
                    attempts_used: attempt + 1,
                }));
            }
        }
    }
    Ok(SeparateOutcome::Exhausted { attempts: budget.attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nsym::solve_pi;
    use crate::rational::q;

    #[test]
    fn zero_element_is_rejected() {
        assert!(matches!(
            separate(&NSymElem::zero(3), &SeparateBudget::default(), true),
            Err(Error::ZeroElement)
        ));
    }

    #[test]
    fn generator_is_separated_immediately() {
        let p = NSymElem::generator(3, 1);
        match separate(&p, &SeparateBudget::default(), true).unwrap() {
            SeparateOutcome::Witness(w) => {
                assert!(!w.value.is_zero());
                assert!(w.automorphism.context().commutative());
                // the witness invariant: the image of the monomial is the value
                let op = specialize(&p, &w.automorphism).unwrap();
                assert_eq!(op.apply(&w.monomial), w.value);
            }
            SeparateOutcome::Exhausted { .. } => panic!("expected a witness"),
        }
    }

    #[test]
    fn commutator_is_separated_in_free_variables() {
        let pi = solve_pi(3);
        let comm = pi
            .lambda_m(1)
            .mul(&pi.lambda_m(2))
            .sub(&pi.lambda_m(2).mul(&pi.lambda_m(1)));
        assert!(comm.abelianize().is_zero(), "the commutator must die under abelianization");
        match separate(&comm, &SeparateBudget::default(), false).unwrap() {
            SeparateOutcome::Witness(w) => {
                assert!(!w.value.is_zero());
                assert!(w.n() <= 3);
            }
            SeparateOutcome::Exhausted { attempts } => {
                panic!("no witness within {attempts} attempts")
            }
        }
    }

    #[test]
    fn scalars_separate_trivially() {
        let p = NSymElem::scalar(2, q(3));
        match separate(&p, &SeparateBudget::default(), true).unwrap() {
            SeparateOutcome::Witness(w) => assert!(!w.value.is_zero()),
            _ => panic!("expected a witness"),
        }
    }
}
