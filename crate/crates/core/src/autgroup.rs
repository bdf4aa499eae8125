//! The group of formal automorphisms `F_t(z) = z - H_t(z)`.
//!
//! Membership at level `alpha >= 1` requires the displacement `H_t` to have
//! z-order at least `alpha` and to vanish at `t = 0`. Composition follows the
//! convention `(U . V)(z) = U(V(z))`, under which `(U . V)^{-1} = V^{-1} . U^{-1}`.
//!
//! Inversion runs the fixed-point iteration `M <- H(z + M)` exactly
//! `max_t_degree` times: the displacement vanishes at `t = 0`, so each pass
//! gains one exact t-order and the count is a provable fixed point rather
//! than a convergence test.
//!
//! The D-Log of `F_t` is the unique coefficient vector `a_t` (zero at `t = 0`,
//! z-order at least `alpha`) with `exp([a_t dz]) z = F_t(z)`; it is solved
//! order by order in t, which terminates uniformly for every `alpha >= 1`.
//! Exponentiation inverts the map, so the pair is a bijection between the
//! group and the derivations of positive t-order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffop::Derivation;
use crate::error::{Error, Result};
use crate::rational::{inv_factorial, q, Rational};
use crate::series::{Monomial, RingContext, SeriesVector, TruncSeries};

/// An automorphism `F_t(z) = z - H_t(z)` with `o(H_t) >= alpha`, `H_0 = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    alpha: u32,
    h: SeriesVector,
}

impl Automorphism {
    /// Wraps a displacement vector, checking the membership invariants.
    pub fn new(alpha: u32, h: SeriesVector) -> Result<Self> {
        if alpha < 1 {
            return Err(Error::Schema("alpha must be >= 1".into()));
        }
        if let Some(o) = h.z_order() {
            if o < alpha {
                return Err(Error::OrderViolation(format!(
                    "z-order >= alpha: got {o}, alpha = {alpha}"
                )));
            }
        }
        if h.t_order() == Some(0) {
            return Err(Error::OrderViolation("H_{t=0} = 0".into()));
        }
        Ok(Self { alpha, h })
    }

    pub fn identity(ctx: &RingContext, alpha: u32) -> Self {
        Self { alpha, h: SeriesVector::zero(ctx) }
    }

    pub fn context(&self) -> &RingContext {
        self.h.context()
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// The displacement `H_t` with `F_t(z) = z - H_t(z)`.
    pub fn h(&self) -> &SeriesVector {
        &self.h
    }

    /// The coordinate form `(F_1, ..., F_n) = z - H_t(z)`.
    pub fn f_vector(&self) -> SeriesVector {
        SeriesVector::coords(self.context()).sub(&self.h)
    }

    /// The displacement as a vector field `[H_t dz]`.
    pub fn h_derivation(&self) -> Derivation {
        Derivation::new(self.h.clone())
    }

    pub fn is_identity(&self) -> bool {
        self.h.is_zero()
    }

    /// `u(F_t)`: substitution of the coordinate form into a series.
    pub fn apply_to(&self, u: &TruncSeries) -> Result<TruncSeries> {
        u.substitute(&self.f_vector())
    }

    /// `(self . other)(z) = self(other(z))`. Contexts and levels must match.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.context() != other.context() {
            return Err(Error::ContextMismatch(format!(
                "{} vs {}",
                self.context(),
                other.context()
            )));
        }
        if self.alpha != other.alpha {
            return Err(Error::AlphaMismatch(self.alpha, other.alpha));
        }
        let composed = self.f_vector().substitute(&other.f_vector())?;
        let h = SeriesVector::coords(self.context()).sub(&composed);
        Self::new(self.alpha, h)
    }

    /// The inverse `G_t = z + M_t`, via `max_t_degree` passes of
    /// `M <- H(z + M)`.
    pub fn invert(&self) -> Self {
        let ctx = self.context();
        let coords = SeriesVector::coords(ctx);
        let mut m = SeriesVector::zero(ctx);
        for _ in 0..ctx.max_t_degree() {
            m = self
                .h
                .substitute(&coords.add(&m))
                .expect("z + M has no constant term");
        }
        Self::new(self.alpha, m.neg()).expect("inverse displacement inherits the orders")
    }

    /// The unique `a_t` with `exp([a_t dz]) z = F_t(z)`, solved t-order by
    /// t-order from the defect of the partial exponential.
    pub fn dlog(&self) -> DLog {
        let ctx = self.context();
        let f = self.f_vector();
        let mut a = SeriesVector::zero(ctx);
        for k in 1..=ctx.max_t_degree() {
            let flowed = exp_flow(&Derivation::new(a.clone()));
            let defect = f.sub(&flowed).t_slice(k).mul_t_power(k);
            a = a.add(&defect);
        }
        DLog::new(self.alpha, a).expect("defect corrections inherit the orders")
    }

    /// True when the t^m slice of the displacement is z-homogeneous of degree
    /// `m + 1` for every m: membership in the graded subgroup
    /// `F_t(z) = t^{-1} F(t z)`.
    pub fn is_graded_form(&self) -> bool {
        self.h.iter().all(|comp| {
            comp.terms().all(|(t_pow, mono, _)| mono.degree() == t_pow + 1)
        })
    }
}

/// The D-Log coefficient vector `a_t`: zero at `t = 0`, z-order `>= alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DLog {
    alpha: u32,
    a: SeriesVector,
}

impl DLog {
    pub fn new(alpha: u32, a: SeriesVector) -> Result<Self> {
        if let Some(o) = a.z_order() {
            if o < alpha {
                return Err(Error::OrderViolation(format!(
                    "z-order >= alpha: got {o}, alpha = {alpha}"
                )));
            }
        }
        if a.t_order() == Some(0) {
            return Err(Error::OrderViolation("a_{t=0} = 0".into()));
        }
        Ok(Self { alpha, a })
    }

    pub fn zero(ctx: &RingContext, alpha: u32) -> Self {
        Self { alpha, a: SeriesVector::zero(ctx) }
    }

    pub fn context(&self) -> &RingContext {
        self.a.context()
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn coeffs(&self) -> &SeriesVector {
        &self.a
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero()
    }

    /// The associated vector field `[a_t dz]`.
    pub fn derivation(&self) -> Derivation {
        Derivation::new(self.a.clone())
    }
}

/// `exp([a dz]) z`: the flow of the field applied to the coordinates. The
/// field has positive t-order, so `max_t_degree` terms suffice.
fn exp_flow(delta: &Derivation) -> SeriesVector {
    let ctx = delta.context();
    let coords = SeriesVector::coords(ctx);
    let mut out = coords.clone();
    let mut power = coords;
    for m in 1..=ctx.max_t_degree() {
        power = delta.apply_vector(&power);
        if power.is_zero() {
            break;
        }
        out = out.add(&power.scalar_mul(&inv_factorial(m)));
    }
    out
}

/// The automorphism `z -> exp([a_t dz]) z`.
pub fn exp_derivation(d: &DLog) -> Automorphism {
    let ctx = d.context();
    let flowed = exp_flow(&d.derivation());
    let h = SeriesVector::coords(ctx).sub(&flowed);
    Automorphism::new(d.alpha(), h).expect("flow displacement inherits the orders")
}

/// Shape constraints for randomly generated automorphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Sparse displacement, arbitrary t-powers.
    General,
    /// `H_t = t H(z)` with `H` free of t.
    LinearInT,
    /// `H_t = t H(z)`, `H` z-homogeneous, component `i` using only variables
    /// before `i` (strictly lower-triangular Jacobian).
    StrictlyTriangular,
}

/// Deterministic sparse random automorphism under a seeded generator.
/// Coefficients lie in `{1, -1, 2, -2}`; z-degrees stay close to `alpha` so
/// repeated operator application remains within the truncation.
pub fn random_automorphism(
    ctx: &RingContext,
    alpha: u32,
    profile: Profile,
    rng: &mut ChaCha8Rng,
) -> Result<Automorphism> {
    if ctx.max_t_degree() < 1 {
        return Err(Error::ImpossibleProfile(
            "t truncation bound 0 admits only the identity".into(),
        ));
    }
    if alpha > ctx.max_z_degree() {
        return Err(Error::ImpossibleProfile(format!(
            "alpha {alpha} exceeds the z truncation bound {}",
            ctx.max_z_degree()
        )));
    }
    if profile == Profile::StrictlyTriangular && ctx.n() == 1 {
        return Err(Error::ImpossibleProfile(
            "strictly lower-triangular displacement in one variable is identically zero".into(),
        ));
    }
    let max_deg = ctx.max_z_degree().min(alpha + 2);
    let coeff = |rng: &mut ChaCha8Rng| -> Rational { q([1, -1, 2, -2][rng.random_range(0..4)]) };
    let mut components = Vec::with_capacity(ctx.n());
    match profile {
        Profile::General | Profile::LinearInT => {
            for _ in 0..ctx.n() {
                let mut s = TruncSeries::zero(ctx);
                for _ in 0..rng.random_range(1..=2) {
                    let t_pow = match profile {
                        Profile::General => rng.random_range(1..=ctx.max_t_degree()),
                        _ => 1,
                    };
                    let deg = rng.random_range(alpha..=max_deg);
                    let mono = random_monomial(ctx, deg, None, rng);
                    s.add_term(t_pow, mono, coeff(rng));
                }
                components.push(s);
            }
        }
        Profile::StrictlyTriangular => {
            let deg = rng.random_range(alpha..=ctx.max_z_degree().min(alpha + 1));
            components.push(TruncSeries::zero(ctx));
            for i in 1..ctx.n() {
                let mut s = TruncSeries::zero(ctx);
                for _ in 0..rng.random_range(1..=2) {
                    let mono = random_monomial(ctx, deg, Some(i), rng);
                    s.add_term(1, mono, coeff(rng));
                }
                components.push(s);
            }
        }
    }
    Automorphism::new(alpha, SeriesVector::new(components))
}

/// Random automorphism in graded form: every stored `t^m` slice is
/// z-homogeneous of degree `m + 1`.
pub fn random_graded_automorphism(
    ctx: &RingContext,
    alpha: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Automorphism> {
    if ctx.max_t_degree() < 1 || alpha > ctx.max_z_degree().max(1) {
        return Err(Error::ImpossibleProfile("no graded slice fits the bounds".into()));
    }
    let m_min = alpha.saturating_sub(1).max(1);
    let m_max = ctx.max_t_degree().min(ctx.max_z_degree() - 1);
    if m_min > m_max {
        return Err(Error::ImpossibleProfile("no graded slice fits the bounds".into()));
    }
    let mut components = Vec::with_capacity(ctx.n());
    for _ in 0..ctx.n() {
        let mut s = TruncSeries::zero(ctx);
        for _ in 0..rng.random_range(1..=2) {
            let m = rng.random_range(m_min..=m_max);
            let mono = random_monomial(ctx, m + 1, None, rng);
            s.add_term(m, mono, q([1, -1, 2, -2][rng.random_range(0..4)]));
        }
        components.push(s);
    }
    Automorphism::new(alpha, SeriesVector::new(components))
}

/// Random degree-`deg` monomial; `below` restricts the variables to indices
/// strictly less than the given component.
fn random_monomial(
    ctx: &RingContext,
    deg: u32,
    below: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Monomial {
    let limit = below.unwrap_or(ctx.n());
    let letters: Vec<u8> = (0..deg).map(|_| rng.random_range(0..limit) as u8).collect();
    if ctx.commutative() {
        let mut e = vec![0u8; ctx.n()];
        for &l in &letters {
            e[l as usize] += 1;
        }
        Monomial::exps(&e)
    } else {
        Monomial::word(&letters)
    }
}
