//! Truncated formal power series over the rationals.
//!
//! A [`TruncSeries`] is an element of `Q[[t]]<<z>>` truncated to a hard
//! bivariate bound fixed by its [`RingContext`]: z-degree at most `max_z_degree`
//! and t-degree at most `max_t_degree`. Every operation truncates eagerly, so
//! equality of stored terms is equality in the quotient.
//!
//! Invariants:
//! - no stored zero coefficients (canonical sparse form);
//! - every stored key respects the context bounds;
//! - binary operations assert that both operands share one context.
//!
//! Each series additionally records `t_trunc`, the t-degree up to which its
//! coefficients are meaningful. It equals `max_t_degree` for freshly built
//! series and drops by one under [`TruncSeries::t_derivative`]; binary
//! operations propagate the minimum. Structural equality ignores it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num::{One, Zero};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::rational::{q, sign_magnitude, Rational};

/// Parameters of a truncated series ring, shared by all its elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingContext {
    n: usize,
    commutative: bool,
    max_z_degree: u32,
    max_t_degree: u32,
}

impl RingContext {
    /// A ring in `n >= 1` variables. `max_z_degree >= 1`; variable count and
    /// z-bound are capped at 255 so monomials pack into byte vectors.
    pub fn new(n: usize, commutative: bool, max_z_degree: u32, max_t_degree: u32) -> Result<Self> {
        if n == 0 || n > 255 {
            return Err(Error::Schema(format!("variable count {n} out of range 1..=255")));
        }
        if max_z_degree == 0 || max_z_degree > 255 {
            return Err(Error::Schema(format!(
                "z truncation bound {max_z_degree} out of range 1..=255"
            )));
        }
        Ok(Self { n, commutative, max_z_degree, max_t_degree })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn commutative(&self) -> bool {
        self.commutative
    }

    pub fn max_z_degree(&self) -> u32 {
        self.max_z_degree
    }

    pub fn max_t_degree(&self) -> u32 {
        self.max_t_degree
    }

    /// Same parameters with the commutativity flag forced on.
    pub fn abelianized(&self) -> Self {
        Self { commutative: true, ..*self }
    }

    pub(crate) fn assert_same_ctx(&self, other: &Self, what: &str) {
        assert_eq!(self, other, "ring context mismatch in {what}");
    }
}

impl fmt::Display for RingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[n={}, Nz={}, Nt={}]",
            if self.commutative { "comm" } else { "free" },
            self.n,
            self.max_z_degree,
            self.max_t_degree
        )
    }
}

type Letters = SmallVec<[u8; 12]>;

/// A monomial in the z variables: a word of variable indices in the
/// noncommutative case, an exponent vector in the commutative case.
///
/// Ordering is graded: first by total degree, then lexicographically on the
/// underlying representation. This is the canonical term order used for
/// rendering and basis enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Monomial {
    /// Sequence of variable indices in `[0, n)`.
    Word(Letters),
    /// Exponent vector of length `n`.
    Exps(Letters),
}

impl Monomial {
    pub fn one(ctx: &RingContext) -> Self {
        if ctx.commutative {
            Monomial::Exps(smallvec![0; ctx.n])
        } else {
            Monomial::Word(SmallVec::new())
        }
    }

    pub fn var(ctx: &RingContext, i: usize) -> Self {
        assert!(i < ctx.n, "variable index {i} out of range for {ctx}");
        if ctx.commutative {
            let mut e: Letters = smallvec![0; ctx.n];
            e[i] = 1;
            Monomial::Exps(e)
        } else {
            Monomial::Word(smallvec![i as u8])
        }
    }

    /// Word monomial from explicit letters (noncommutative contexts).
    pub fn word(letters: &[u8]) -> Self {
        Monomial::Word(SmallVec::from_slice(letters))
    }

    /// Exponent-vector monomial (commutative contexts).
    pub fn exps(exps: &[u8]) -> Self {
        Monomial::Exps(SmallVec::from_slice(exps))
    }

    pub fn degree(&self) -> u32 {
        match self {
            Monomial::Word(w) => w.len() as u32,
            Monomial::Exps(e) => e.iter().map(|&x| x as u32).sum(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.degree() == 0
    }

    /// Product of monomials: concatenation of words, sum of exponents.
    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Monomial::Word(a), Monomial::Word(b)) => {
                let mut w = a.clone();
                w.extend_from_slice(b);
                Monomial::Word(w)
            }
            (Monomial::Exps(a), Monomial::Exps(b)) => {
                debug_assert_eq!(a.len(), b.len());
                Monomial::Exps(a.iter().zip(b.iter()).map(|(x, y)| x + y).collect())
            }
            _ => panic!("cannot multiply monomials of mixed kinds"),
        }
    }

    /// The variable occurrences of this monomial as a canonical word: the word
    /// itself, or each variable repeated by its exponent in ascending index
    /// order. In a commutative ring both readings denote the same element.
    pub fn occurrences(&self) -> Letters {
        match self {
            Monomial::Word(w) => w.clone(),
            Monomial::Exps(e) => {
                let mut out = SmallVec::new();
                for (i, &cnt) in e.iter().enumerate() {
                    for _ in 0..cnt {
                        out.push(i as u8);
                    }
                }
                out
            }
        }
    }

    /// The monomial left after removing the occurrences at `positions`
    /// (indices into [`Monomial::occurrences`]).
    pub fn remove_occurrences(&self, positions: &[usize]) -> Self {
        match self {
            Monomial::Exps(e) => {
                let occ = self.occurrences();
                let mut out = e.clone();
                for &p in positions {
                    out[occ[p] as usize] -= 1;
                }
                Monomial::Exps(out)
            }
            Monomial::Word(w) => {
                let keep: Letters = w
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !positions.contains(i))
                    .map(|(_, &l)| l)
                    .collect();
                Monomial::Word(keep)
            }
        }
    }

    fn raw(&self) -> &[u8] {
        match self {
            Monomial::Word(w) => w,
            Monomial::Exps(e) => e,
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic on the occurrence word. For exponent vectors of
    /// equal degree the expanded word compares as the reversed vector order,
    /// so `z1^2 < z1*z2 < z2^2` in both representations.
    fn cmp(&self, other: &Self) -> Ordering {
        let by_degree = self.degree().cmp(&other.degree());
        if by_degree != Ordering::Equal {
            return by_degree;
        }
        match (self, other) {
            (Monomial::Exps(a), Monomial::Exps(b)) => b.cmp(a),
            _ => self.raw().cmp(other.raw()),
        }
    }
}

/// Key of one stored term: (t power, z monomial).
pub type TermKey = (u32, Monomial);

/// Exact truncated power series in `z` and `t`.
#[derive(Debug, Clone)]
pub struct TruncSeries {
    context: RingContext,
    t_trunc: u32,
    terms: BTreeMap<TermKey, Rational>,
}

impl TruncSeries {
    pub fn zero(ctx: &RingContext) -> Self {
        Self { context: *ctx, t_trunc: ctx.max_t_degree, terms: BTreeMap::new() }
    }

    pub fn one(ctx: &RingContext) -> Self {
        Self::constant(ctx, q(1))
    }

    pub fn constant(ctx: &RingContext, c: Rational) -> Self {
        let mut s = Self::zero(ctx);
        s.add_term(0, Monomial::one(ctx), c);
        s
    }

    pub fn var(ctx: &RingContext, i: usize) -> Self {
        let mut s = Self::zero(ctx);
        s.add_term(0, Monomial::var(ctx, i), q(1));
        s
    }

    /// `c * t^k * m`, silently truncated to the context bounds.
    pub fn term(ctx: &RingContext, t_pow: u32, mono: Monomial, c: Rational) -> Self {
        let mut s = Self::zero(ctx);
        s.add_term(t_pow, mono, c);
        s
    }

    pub fn context(&self) -> &RingContext {
        &self.context
    }

    /// The t-degree up to which coefficients are meaningful.
    pub fn t_trunc(&self) -> u32 {
        self.t_trunc
    }

    /// Adds `c * t^k * m` in place; out-of-bound keys are dropped.
    pub fn add_term(&mut self, t_pow: u32, mono: Monomial, c: Rational) {
        if c.is_zero()
            || t_pow > self.t_trunc
            || mono.degree() > self.context.max_z_degree
        {
            return;
        }
        match self.terms.entry((t_pow, mono)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&(0, Monomial::one(&self.context)))
                .is_some_and(|c| c.is_one())
    }

    /// Coefficient of `t^k * m` (zero when absent).
    pub fn coeff(&self, t_pow: u32, mono: &Monomial) -> Rational {
        self.terms
            .get(&(t_pow, mono.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Terms in canonical (t power, degree, lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Monomial, &Rational)> {
        self.terms.iter().map(|((t, m), c)| (*t, m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self { context: self.context, t_trunc: self.t_trunc, terms: BTreeMap::new() };
        }
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        Self { context: self.context, t_trunc: self.t_trunc, terms }
    }

    /// Multiplies by `t^k`, shifting validity along but never past the ring bound.
    pub fn mul_t_power(&self, k: u32) -> Self {
        let bound = self.context.max_t_degree.min(self.t_trunc.saturating_add(k));
        let mut out = Self { context: self.context, t_trunc: bound, terms: BTreeMap::new() };
        for ((t, m), c) in &self.terms {
            out.add_term(t + k, m.clone(), c.clone());
        }
        out
    }

    /// Multiplies by a bare monomial on the left.
    pub fn mul_monomial_left(&self, mono: &Monomial) -> Self {
        let mut out = Self { context: self.context, t_trunc: self.t_trunc, terms: BTreeMap::new() };
        for ((t, m), c) in &self.terms {
            out.add_term(*t, mono.mul(m), c.clone());
        }
        out
    }

    /// Multiplies by a bare monomial on the right.
    pub fn mul_monomial_right(&self, mono: &Monomial) -> Self {
        let mut out = Self { context: self.context, t_trunc: self.t_trunc, terms: BTreeMap::new() };
        for ((t, m), c) in &self.terms {
            out.add_term(*t, m.mul(mono), c.clone());
        }
        out
    }

    /// Termwise d/dt. The result is meaningful one t-order lower.
    pub fn t_derivative(&self) -> Self {
        let mut out = Self {
            context: self.context,
            t_trunc: self.t_trunc.saturating_sub(1),
            terms: BTreeMap::new(),
        };
        for ((t, m), c) in &self.terms {
            if *t >= 1 {
                out.add_term(t - 1, m.clone(), c * q(*t as i64));
            }
        }
        out
    }

    /// Minimal z-degree and minimal t-degree over the nonzero terms;
    /// `(None, None)` for the zero series.
    pub fn orders(&self) -> (Option<u32>, Option<u32>) {
        (self.z_order(), self.t_order())
    }

    pub fn z_order(&self) -> Option<u32> {
        self.terms.keys().map(|(_, m)| m.degree()).min()
    }

    pub fn t_order(&self) -> Option<u32> {
        self.terms.keys().map(|(t, _)| *t).min()
    }

    /// The t-free coefficient of `t^k`.
    pub fn t_slice(&self, k: u32) -> Self {
        let mut out = Self::zero(&self.context);
        for ((t, m), c) in &self.terms {
            if *t == k {
                out.add_term(0, m.clone(), c.clone());
            }
        }
        out
    }

    /// Drops every term above `bound` in t and caps the validity bound.
    pub fn truncate_t(&self, bound: u32) -> Self {
        let mut out = Self {
            context: self.context,
            t_trunc: self.t_trunc.min(bound),
            terms: BTreeMap::new(),
        };
        for ((t, m), c) in &self.terms {
            if *t <= bound {
                out.add_term(*t, m.clone(), c.clone());
            }
        }
        out
    }

    pub fn has_z_constant_term(&self) -> bool {
        self.terms.keys().any(|(_, m)| m.is_one())
    }

    /// True when every term has z-degree `d` (vacuously for zero).
    pub fn is_z_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|(_, m)| m.degree() == d)
    }

    /// Replaces each `z_i` occurrence in place by `f[i]`. Every component of
    /// `f` must have zero constant term in z so the composition terminates at
    /// the truncation.
    pub fn substitute(&self, f: &SeriesVector) -> Result<Self> {
        self.context.assert_same_ctx(f.context(), "substitute");
        for (i, fi) in f.iter().enumerate() {
            if fi.has_z_constant_term() {
                return Err(Error::ConstantTerm { index: i });
            }
        }
        let t_bound = f
            .iter()
            .map(|s| s.t_trunc)
            .fold(self.t_trunc, |a, b| a.min(b));
        let mut out = Self { context: self.context, t_trunc: t_bound, terms: BTreeMap::new() };
        // cache of f_i powers for the commutative fast path
        let mut powers: Vec<Vec<TruncSeries>> = (0..f.len()).map(|_| Vec::new()).collect();
        for ((t, m), c) in &self.terms {
            let mut acc = Self::term(&self.context, *t, Monomial::one(&self.context), c.clone());
            acc.t_trunc = t_bound;
            match m {
                Monomial::Exps(exps) => {
                    for (i, &e) in exps.iter().enumerate() {
                        if e == 0 {
                            continue;
                        }
                        if powers[i].is_empty() {
                            powers[i].push(Self::one(&self.context));
                        }
                        while powers[i].len() <= e as usize {
                            let next = powers[i].last().unwrap() * &f[i];
                            powers[i].push(next);
                        }
                        acc = &acc * &powers[i][e as usize];
                        if acc.is_zero() {
                            break;
                        }
                    }
                }
                Monomial::Word(word) => {
                    for &letter in word {
                        acc = &acc * &f[letter as usize];
                        if acc.is_zero() {
                            break;
                        }
                    }
                }
            }
            for ((tt, mm), cc) in acc.terms {
                out.add_term(tt, mm, cc);
            }
        }
        Ok(out)
    }

    /// Partial derivative in `z_j`; commutative contexts only.
    pub fn z_partial(&self, j: usize) -> Self {
        assert!(
            self.context.commutative,
            "z_partial needs a commutative context"
        );
        let mut out = Self { context: self.context, t_trunc: self.t_trunc, terms: BTreeMap::new() };
        for ((t, m), c) in &self.terms {
            if let Monomial::Exps(exps) = m {
                let e = exps[j];
                if e == 0 {
                    continue;
                }
                let mut reduced = exps.clone();
                reduced[j] -= 1;
                out.add_term(*t, Monomial::Exps(reduced), c * q(e as i64));
            }
        }
        out
    }

    /// Image under the word-to-exponent map into the commutative ring with the
    /// same parameters. Identity on commutative input.
    pub fn abelianize(&self) -> Self {
        let ctx = self.context.abelianized();
        let mut out = Self::zero(&ctx);
        for ((t, m), c) in &self.terms {
            let mono = match m {
                Monomial::Exps(_) => m.clone(),
                Monomial::Word(w) => {
                    let mut e: Letters = smallvec![0; ctx.n];
                    for &letter in w {
                        e[letter as usize] += 1;
                    }
                    Monomial::Exps(e)
                }
            };
            out.add_term(*t, mono, c.clone());
        }
        out
    }
}

impl PartialEq for TruncSeries {
    fn eq(&self, other: &Self) -> bool {
        self.context == other.context && self.terms == other.terms
    }
}

impl Eq for TruncSeries {}

impl PartialOrd for TruncSeries {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TruncSeries {
    fn cmp(&self, other: &Self) -> Ordering {
        self.context
            .cmp(&other.context)
            .then_with(|| self.terms.cmp(&other.terms))
    }
}

impl Add for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl std::ops::AddAssign<&TruncSeries> for TruncSeries {
    fn add_assign(&mut self, rhs: &TruncSeries) {
        self.context.assert_same_ctx(&rhs.context, "add");
        if rhs.t_trunc < self.t_trunc {
            self.t_trunc = rhs.t_trunc;
            self.terms.retain(|(t, _), _| *t <= rhs.t_trunc);
        }
        for ((t, m), c) in &rhs.terms {
            self.add_term(*t, m.clone(), c.clone());
        }
    }
}

impl Sub for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        self + &(-rhs)
    }
}

impl Neg for &TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        TruncSeries {
            context: self.context,
            t_trunc: self.t_trunc,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

impl Mul for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        self.context.assert_same_ctx(&rhs.context, "mul");
        let mut out = TruncSeries {
            context: self.context,
            t_trunc: self.t_trunc.min(rhs.t_trunc),
            terms: BTreeMap::new(),
        };
        for ((ta, ma), ca) in &self.terms {
            if *ta > out.t_trunc {
                continue;
            }
            for ((tb, mb), cb) in &rhs.terms {
                let t = ta + tb;
                if t > out.t_trunc {
                    continue;
                }
                if ma.degree() + mb.degree() > self.context.max_z_degree {
                    continue;
                }
                out.add_term(t, ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((t, m), c) in &self.terms {
            let (neg, mag) = sign_magnitude(c);
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{}", render_term(*t, m, &mag))?;
        }
        Ok(())
    }
}

fn render_term(t_pow: u32, mono: &Monomial, mag: &str) -> String {
    let mut z_factors: Vec<String> = Vec::new();
    match mono {
        Monomial::Exps(exps) => {
            for (i, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => z_factors.push(format!("z{}", i + 1)),
                    _ => z_factors.push(format!("z{}^{}", i + 1, e)),
                }
            }
        }
        Monomial::Word(word) => {
            let mut i = 0;
            while i < word.len() {
                let mut j = i;
                while j < word.len() && word[j] == word[i] {
                    j += 1;
                }
                if j - i == 1 {
                    z_factors.push(format!("z{}", word[i] + 1));
                } else {
                    z_factors.push(format!("z{}^{}", word[i] + 1, j - i));
                }
                i = j;
            }
        }
    }
    let t_part = match t_pow {
        0 => None,
        1 => Some("t".to_string()),
        k => Some(format!("t^{k}")),
    };
    let z_part = z_factors.join("*");
    match (t_part, z_part.is_empty()) {
        (None, true) => mag.to_string(),
        (None, false) => {
            if mag == "1" {
                z_part
            } else {
                format!("{mag}*{z_part}")
            }
        }
        (Some(tp), true) => {
            if mag == "1" {
                tp
            } else {
                format!("{mag}{tp}")
            }
        }
        (Some(tp), false) => {
            if mag == "1" {
                format!("{tp}*{z_part}")
            } else {
                format!("{mag}{tp}*{z_part}")
            }
        }
    }
}

/// A vector of `n` series sharing one context; the coefficient container for
/// derivations and for automorphism displacements.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SeriesVector {
    components: Vec<TruncSeries>,
}

impl SeriesVector {
    pub fn new(components: Vec<TruncSeries>) -> Self {
        assert!(!components.is_empty(), "series vector must be nonempty");
        let ctx = *components[0].context();
        assert_eq!(components.len(), ctx.n(), "series vector length must equal n");
        for c in &components {
            ctx.assert_same_ctx(c.context(), "series vector");
        }
        Self { components }
    }

    pub fn zero(ctx: &RingContext) -> Self {
        Self::new((0..ctx.n()).map(|_| TruncSeries::zero(ctx)).collect())
    }

    /// The coordinate vector `(z1, ..., zn)`.
    pub fn coords(ctx: &RingContext) -> Self {
        Self::new((0..ctx.n()).map(|i| TruncSeries::var(ctx, i)).collect())
    }

    pub fn context(&self) -> &RingContext {
        self.components[0].context()
    }

    /// Component count (always the context's `n`, never zero).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TruncSeries> {
        self.components.iter()
    }

    pub fn map(&self, f: impl FnMut(&TruncSeries) -> TruncSeries) -> Self {
        Self::new(self.components.iter().map(f).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.components
                .iter()
                .zip(other.components.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.components
                .iter()
                .zip(other.components.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        self.map(|s| -s)
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        self.map(|s| s.scalar_mul(c))
    }

    pub fn mul_t_power(&self, k: u32) -> Self {
        self.map(|s| s.mul_t_power(k))
    }

    /// Componentwise substitution: `(u_1(g), ..., u_n(g))`.
    pub fn substitute(&self, g: &SeriesVector) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|s| s.substitute(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(comps))
    }

    pub fn t_derivative(&self) -> Self {
        self.map(|s| s.t_derivative())
    }

    pub fn t_slice(&self, k: u32) -> Self {
        self.map(|s| s.t_slice(k))
    }

    pub fn truncate_t(&self, bound: u32) -> Self {
        self.map(|s| s.truncate_t(bound))
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|s| s.is_zero())
    }

    /// Minimum z-order over the components (`None` when all are zero).
    pub fn z_order(&self) -> Option<u32> {
        self.components.iter().filter_map(|s| s.z_order()).min()
    }

    /// Minimum t-order over the components (`None` when all are zero).
    pub fn t_order(&self) -> Option<u32> {
        self.components.iter().filter_map(|s| s.t_order()).min()
    }

    pub fn has_z_constant_term(&self) -> bool {
        self.components.iter().any(|s| s.has_z_constant_term())
    }
}

impl Index<usize> for SeriesVector {
    type Output = TruncSeries;
    fn index(&self, i: usize) -> &TruncSeries {
        &self.components[i]
    }
}
