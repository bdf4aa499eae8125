//! Derivations and differential operators of the truncated series ring.
//!
//! A [`Derivation`] `[u dz]` acts on a word monomial by replacing each
//! occurrence of `z_i` in place by `u_i`, extended linearly; in commutative
//! contexts this is the usual `sum_i u_i d/dz_i`. The order matters in free
//! variables: `[u d/dz_i]` applied to `z_j z_i` gives `z_j * u(z)`, not
//! `u(z) * z_j`.
//!
//! A [`DiffOp`] is a rational linear combination of composition words whose
//! letters are either derivations or multi-replacement operators
//! `B+(d_1, ..., d_m)` (replace `m` distinct occurrences, one per argument,
//! summed over all choices), plus an explicit scalar multiple of the identity.
//! `B+` is built by two independent routes: `Auxiliary` evaluates the
//! multi-replacement action directly by tagging replaced positions, while
//! `Recursive` expands into plain derivation words via
//! `B+(d_1, ..., d_m) = d_1 B+(d_2, ..., d_m) - sum_i B+(d_2, ..., d_1 |> d_i,
//! ..., d_m)`. The two must agree as operators; tests cross-check them.
//!
//! Operator equality is equal action on every monomial of z-degree at most
//! `max_z_degree` — the finite witness set at this truncation.

use std::collections::{BTreeMap, HashMap};

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{inv_factorial, q, Rational};
use crate::series::{Monomial, RingContext, SeriesVector, TruncSeries};

/// A vector field `[u dz] = sum_i [u_i d/dz_i]` acting by occurrence
/// replacement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Derivation {
    coeffs: SeriesVector,
}

impl Derivation {
    pub fn new(coeffs: SeriesVector) -> Self {
        Self { coeffs }
    }

    pub fn zero(ctx: &RingContext) -> Self {
        Self { coeffs: SeriesVector::zero(ctx) }
    }

    /// `[u d/dz_i]`: single-component field.
    pub fn single(ctx: &RingContext, i: usize, u: TruncSeries) -> Self {
        let comps = (0..ctx.n())
            .map(|j| if j == i { u.clone() } else { TruncSeries::zero(ctx) })
            .collect();
        Self { coeffs: SeriesVector::new(comps) }
    }

    pub fn context(&self) -> &RingContext {
        self.coeffs.context()
    }

    pub fn coeffs(&self) -> &SeriesVector {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    /// Minimal z-order over the coefficients; membership in the degree-raising
    /// class of level `alpha` means `z_order() >= alpha` (`None` = zero field,
    /// which belongs to every level).
    pub fn z_order(&self) -> Option<u32> {
        self.coeffs.z_order()
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        Self { coeffs: self.coeffs.scalar_mul(c) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coeffs: self.coeffs.add(&other.coeffs) }
    }

    fn min_coeff_t_trunc(&self) -> u32 {
        self.coeffs.iter().map(|s| s.t_trunc()).min().unwrap()
    }

    /// Occurrence-replacement action, extended linearly over the t-coefficients.
    pub fn apply(&self, u: &TruncSeries) -> TruncSeries {
        self.context().assert_same_ctx(u.context(), "apply_derivation");
        let ctx = *u.context();
        let mut out = TruncSeries::zero(&ctx);
        for (t_pow, mono, c) in u.terms() {
            match mono {
                Monomial::Exps(_) => {
                    let occ = mono.occurrences();
                    let mut seen: Option<u8> = None;
                    for (p, &letter) in occ.iter().enumerate() {
                        if seen == Some(letter) {
                            continue; // one contribution per variable, scaled below
                        }
                        seen = Some(letter);
                        let i = letter as usize;
                        if self.coeffs[i].is_zero() {
                            continue;
                        }
                        let mult = occ.iter().filter(|&&l| l == letter).count() as i64;
                        let reduced = mono.remove_occurrences(&[p]);
                        let contrib = self.coeffs[i]
                            .mul_monomial_left(&reduced)
                            .scalar_mul(&(c * q(mult)))
                            .mul_t_power(t_pow);
                        out += &contrib;
                    }
                }
                Monomial::Word(word) => {
                    for (p, &letter) in word.iter().enumerate() {
                        let coeff = &self.coeffs[letter as usize];
                        if coeff.is_zero() {
                            continue;
                        }
                        let prefix = Monomial::word(&word[..p]);
                        let suffix = Monomial::word(&word[p + 1..]);
                        let contrib = coeff
                            .mul_monomial_left(&prefix)
                            .mul_monomial_right(&suffix)
                            .scalar_mul(c)
                            .mul_t_power(t_pow);
                        out += &contrib;
                    }
                }
            }
        }
        out.truncate_t(u.t_trunc().min(self.min_coeff_t_trunc()))
    }

    /// Componentwise action on a series vector.
    pub fn apply_vector(&self, v: &SeriesVector) -> SeriesVector {
        v.map(|s| self.apply(s))
    }
}

/// The collapse product: `phi |> [u dz] = [(phi u) dz]`.
pub fn triangle(phi: &Derivation, delta: &Derivation) -> Derivation {
    phi.context().assert_same_ctx(delta.context(), "triangle");
    Derivation::new(phi.apply_vector(delta.coeffs()))
}

/// Letter of a composition word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OpAtom {
    Deriv(Derivation),
    /// Multi-replacement operator over the listed derivations; no derivation
    /// may land inside a block an earlier one inserted.
    BPlus(Vec<Derivation>),
}

impl OpAtom {
    fn apply(&self, u: &TruncSeries) -> TruncSeries {
        match self {
            OpAtom::Deriv(d) => d.apply(u),
            OpAtom::BPlus(ds) => bplus_apply(ds, u),
        }
    }
}

/// Action of `B+(d_1, ..., d_m)`: sum over all ways to replace `m` distinct
/// occurrences of variables in each monomial, occurrence assigned to `d_i`
/// rewritten in place by the matching coefficient of `d_i`.
fn bplus_apply(deltas: &[Derivation], u: &TruncSeries) -> TruncSeries {
    let ctx = *u.context();
    let m = deltas.len();
    let mut out = TruncSeries::zero(&ctx);
    let mut t_bound = u.t_trunc();
    for d in deltas {
        t_bound = t_bound.min(d.min_coeff_t_trunc());
    }
    for (t_pow, mono, c) in u.terms() {
        let occ = mono.occurrences();
        if occ.len() < m {
            continue;
        }
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        let mut used = vec![false; occ.len()];
        assign(&ctx, deltas, &occ, mono, t_pow, c, &mut chosen, &mut used, &mut out);
    }
    out.truncate_t(t_bound)
}

#[allow(clippy::too_many_arguments)]
fn assign(
    ctx: &RingContext,
    deltas: &[Derivation],
    occ: &[u8],
    mono: &Monomial,
    t_pow: u32,
    c: &Rational,
    chosen: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut TruncSeries,
) {
    let i = chosen.len();
    if i == deltas.len() {
        let contrib = replaced_product(ctx, deltas, occ, mono, chosen)
            .scalar_mul(c)
            .mul_t_power(t_pow);
        *out += &contrib;
        return;
    }
    for p in 0..occ.len() {
        if used[p] || deltas[i].coeffs()[occ[p] as usize].is_zero() {
            continue;
        }
        used[p] = true;
        chosen.push(p);
        assign(ctx, deltas, occ, mono, t_pow, c, chosen, used, out);
        chosen.pop();
        used[p] = false;
    }
}

/// Product of the monomial with occurrence `chosen[i]` replaced by the
/// matching coefficient of `deltas[i]`, factors kept in occurrence order.
fn replaced_product(
    ctx: &RingContext,
    deltas: &[Derivation],
    occ: &[u8],
    mono: &Monomial,
    chosen: &[usize],
) -> TruncSeries {
    match mono {
        Monomial::Exps(_) => {
            let remaining = mono.remove_occurrences(chosen);
            let mut acc = TruncSeries::term(ctx, 0, remaining, q(1));
            for (i, &p) in chosen.iter().enumerate() {
                acc = &acc * &deltas[i].coeffs()[occ[p] as usize];
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        Monomial::Word(word) => {
            let mut acc = TruncSeries::one(ctx);
            for (p, &letter) in word.iter().enumerate() {
                if let Some(i) = chosen.iter().position(|&cp| cp == p) {
                    acc = &acc * &deltas[i].coeffs()[letter as usize];
                } else {
                    acc = acc.mul_monomial_right(&Monomial::word(&[letter]));
                }
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
    }
}

/// Evaluation route for [`bplus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BPlusRoute {
    /// Expand into plain derivation words through the collapse recursion.
    Recursive,
    /// Keep the multi-replacement operator as a primitive word letter.
    Auxiliary,
}

/// The symmetric multi-derivation operator `B+(d_1, ..., d_m)`; `B+(d) = d`.
pub fn bplus(deltas: &[Derivation], route: BPlusRoute) -> Result<DiffOp> {
    if deltas.is_empty() {
        return Err(Error::EmptyDerivationList);
    }
    let ctx = *deltas[0].context();
    for d in deltas {
        ctx.assert_same_ctx(d.context(), "bplus");
    }
    if deltas.iter().any(Derivation::is_zero) {
        return Ok(DiffOp::zero(&ctx));
    }
    if deltas.len() == 1 {
        return Ok(DiffOp::from_derivation(deltas[0].clone()));
    }
    match route {
        BPlusRoute::Auxiliary => {
            Ok(DiffOp::from_word(&ctx, vec![OpAtom::BPlus(deltas.to_vec())], q(1)))
        }
        BPlusRoute::Recursive => {
            let head = &deltas[0];
            let tail = &deltas[1..];
            let mut out = DiffOp::from_derivation(head.clone())
                .mul(&bplus(tail, BPlusRoute::Recursive)?);
            for i in 0..tail.len() {
                let mut collapsed = tail.to_vec();
                collapsed[i] = triangle(head, &tail[i]);
                out = out.sub(&bplus(&collapsed, BPlusRoute::Recursive)?);
            }
            Ok(out)
        }
    }
}

/// A formal differential operator: scalar identity part plus a combination of
/// composition words. Words act right to left: `[a, b]` applies `b` first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffOp {
    context: RingContext,
    ident: Rational,
    terms: BTreeMap<Vec<OpAtom>, Rational>,
}

impl DiffOp {
    pub fn zero(ctx: &RingContext) -> Self {
        Self { context: *ctx, ident: Rational::zero(), terms: BTreeMap::new() }
    }

    pub fn identity(ctx: &RingContext) -> Self {
        Self::scalar(ctx, q(1))
    }

    pub fn scalar(ctx: &RingContext, c: Rational) -> Self {
        Self { context: *ctx, ident: c, terms: BTreeMap::new() }
    }

    pub fn from_derivation(d: Derivation) -> Self {
        let ctx = *d.context();
        Self::from_word(&ctx, vec![OpAtom::Deriv(d)], q(1))
    }

    pub fn from_word(ctx: &RingContext, word: Vec<OpAtom>, c: Rational) -> Self {
        let mut out = Self::zero(ctx);
        out.add_word(word, c);
        out
    }

    pub fn context(&self) -> &RingContext {
        &self.context
    }

    /// Scalar coefficient of the identity part.
    pub fn identity_part(&self) -> &Rational {
        &self.ident
    }

    /// Composition words with their scalars, in canonical order.
    pub fn words(&self) -> impl Iterator<Item = (&Vec<OpAtom>, &Rational)> {
        self.terms.iter()
    }

    fn add_word(&mut self, word: Vec<OpAtom>, c: Rational) {
        if c.is_zero() {
            return;
        }
        if word.is_empty() {
            self.ident += c;
            return;
        }
        match self.terms.entry(word) {
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

    /// No identity part and no words. Semantic zeroness is decided by
    /// [`DiffOp::op_equal`] against the zero operator.
    pub fn is_structurally_zero(&self) -> bool {
        self.ident.is_zero() && self.terms.is_empty()
    }

    pub fn is_structural_identity(&self) -> bool {
        self.ident.is_one() && self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.context.assert_same_ctx(&other.context, "diffop add");
        let mut out = self.clone();
        out.ident += &other.ident;
        for (w, c) in &other.terms {
            out.add_word(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scalar_mul(&q(-1)))
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.context);
        }
        Self {
            context: self.context,
            ident: &self.ident * c,
            terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect(),
        }
    }

    /// Operator product: word concatenation (left factor acts last).
    pub fn mul(&self, other: &Self) -> Self {
        self.context.assert_same_ctx(&other.context, "diffop mul");
        let mut out = Self::zero(&self.context);
        out.ident = &self.ident * &other.ident;
        for (w, c) in &self.terms {
            out.add_word(w.clone(), c * &other.ident);
        }
        for (w, c) in &other.terms {
            out.add_word(w.clone(), &self.ident * c);
        }
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let mut w = wa.clone();
                w.extend(wb.iter().cloned());
                out.add_word(w, ca * cb);
            }
        }
        out
    }

    /// Applies the operator to a series.
    pub fn apply(&self, u: &TruncSeries) -> TruncSeries {
        self.context.assert_same_ctx(u.context(), "apply_op");
        let mut out = u.scalar_mul(&self.ident);
        for (word, c) in &self.terms {
            let mut v = u.clone();
            for atom in word.iter().rev() {
                v = atom.apply(&v);
                if v.is_zero() {
                    break;
                }
            }
            out += &v.scalar_mul(c);
        }
        out
    }

    /// Equal action on every monomial of degree `<= max_z_degree`.
    pub fn op_equal(&self, other: &Self) -> Result<bool> {
        if self.context != other.context {
            return Err(Error::ContextMismatch(format!(
                "{} vs {}",
                self.context, other.context
            )));
        }
        let basis = MonomialBasis::new(&self.context);
        let a = OpAction::from_op(self, &basis);
        let b = OpAction::from_op(other, &basis);
        Ok(a.first_difference(&b).is_none())
    }
}

/// All monomials of z-degree at most `max_z_degree`, in canonical
/// (degree, lexicographic) order, with an index lookup.
pub struct MonomialBasis {
    context: RingContext,
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialBasis {
    pub fn new(ctx: &RingContext) -> Self {
        let mut monos = Vec::new();
        if ctx.commutative() {
            let mut exps = vec![0u8; ctx.n()];
            gen_exps(ctx, 0, ctx.max_z_degree(), &mut exps, &mut monos);
        } else {
            let mut word = Vec::new();
            gen_words(ctx, ctx.max_z_degree(), &mut word, &mut monos);
        }
        monos.sort();
        let index = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Self { context: *ctx, monos, index }
    }

    pub fn context(&self) -> &RingContext {
        &self.context
    }

    /// Number of basis monomials (never zero: degree 0 is always present).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn mono(&self, i: usize) -> &Monomial {
        &self.monos[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Monomial> {
        self.monos.iter()
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// The monomial as a series.
    pub fn mono_series(&self, i: usize) -> TruncSeries {
        TruncSeries::term(&self.context, 0, self.monos[i].clone(), q(1))
    }
}

fn gen_exps(ctx: &RingContext, var: usize, left: u32, exps: &mut Vec<u8>, out: &mut Vec<Monomial>) {
    if var == ctx.n() {
        out.push(Monomial::exps(exps));
        return;
    }
    for e in 0..=left {
        exps[var] = e as u8;
        gen_exps(ctx, var + 1, left - e, exps, out);
    }
    exps[var] = 0;
}

fn gen_words(ctx: &RingContext, left: u32, word: &mut Vec<u8>, out: &mut Vec<Monomial>) {
    out.push(Monomial::word(word));
    if left == 0 {
        return;
    }
    for l in 0..ctx.n() as u8 {
        word.push(l);
        gen_words(ctx, left - 1, word, out);
        word.pop();
    }
}

/// The action of an operator on the monomial basis: one image per basis
/// monomial. This is the working representation for operator products and
/// equality; it is computed once per operator and never mutated.
#[derive(Debug, Clone)]
pub struct OpAction {
    images: Vec<TruncSeries>,
}

impl OpAction {
    pub fn from_op(op: &DiffOp, basis: &MonomialBasis) -> Self {
        let images = (0..basis.len()).map(|i| op.apply(&basis.mono_series(i))).collect();
        Self { images }
    }

    pub fn zero(basis: &MonomialBasis) -> Self {
        Self {
            images: (0..basis.len())
                .map(|_| TruncSeries::zero(basis.context()))
                .collect(),
        }
    }

    pub fn identity(basis: &MonomialBasis) -> Self {
        Self { images: (0..basis.len()).map(|i| basis.mono_series(i)).collect() }
    }

    pub fn image(&self, i: usize) -> &TruncSeries {
        &self.images[i]
    }

    /// Linear extension to arbitrary series (t-powers pass through).
    pub fn apply_series(&self, u: &TruncSeries, basis: &MonomialBasis) -> TruncSeries {
        let ctx = basis.context();
        let max_t = ctx.max_t_degree();
        // validity: each shifted image is good to min(max_t, image bound + shift)
        let mut bound = u.t_trunc();
        let mut used: Vec<(u32, usize, &crate::rational::Rational)> = Vec::new();
        for (t_pow, mono, c) in u.terms() {
            let idx = basis
                .index_of(mono)
                .expect("monomial within truncation is in the basis");
            bound = bound.min(max_t.min(self.images[idx].t_trunc().saturating_add(t_pow)));
            used.push((t_pow, idx, c));
        }
        let mut out = TruncSeries::zero(ctx).truncate_t(bound);
        for (t_pow, idx, c) in used {
            for (t, mono, coeff) in self.images[idx].terms() {
                out.add_term(t + t_pow, mono.clone(), coeff * c);
            }
        }
        out
    }

    /// `self . other` (apply `other` first).
    pub fn compose(&self, other: &Self, basis: &MonomialBasis) -> Self {
        Self {
            images: other.images.iter().map(|im| self.apply_series(im, basis)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            images: self
                .images
                .iter()
                .zip(other.images.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        Self { images: self.images.iter().map(|im| im.scalar_mul(c)).collect() }
    }

    /// First basis index where the actions differ (compared up to the shared
    /// effective t-bound), or `None` when equal.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        for (i, (a, b)) in self.images.iter().zip(other.images.iter()).enumerate() {
            let bound = a.t_trunc().min(b.t_trunc());
            if a.truncate_t(bound) != b.truncate_t(bound) {
                return Some(i);
            }
        }
        None
    }
}

/// An operator-valued t-series: map from t-power to a t-degree-zero [`DiffOp`]
/// coefficient. `t_trunc` records the t-order up to which coefficients are
/// meaningful (`max_t_degree` unless an operation like
/// [`TDiffOp::t_derivative`] lowered it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TDiffOp {
    context: RingContext,
    t_trunc: u32,
    coeffs: BTreeMap<u32, DiffOp>,
}

impl TDiffOp {
    pub fn zero(ctx: &RingContext) -> Self {
        Self { context: *ctx, t_trunc: ctx.max_t_degree(), coeffs: BTreeMap::new() }
    }

    pub fn identity(ctx: &RingContext) -> Self {
        let mut out = Self::zero(ctx);
        out.set_coeff(0, DiffOp::identity(ctx));
        out
    }

    pub fn context(&self) -> &RingContext {
        &self.context
    }

    pub fn t_trunc(&self) -> u32 {
        self.t_trunc
    }

    pub(crate) fn with_t_trunc(mut self, bound: u32) -> Self {
        self.t_trunc = bound;
        self.coeffs.retain(|m, _| *m <= bound);
        self
    }

    pub fn set_coeff(&mut self, m: u32, op: DiffOp) {
        if m > self.t_trunc || op.is_structurally_zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, op);
        }
    }

    pub fn coeff(&self, m: u32) -> Option<&DiffOp> {
        self.coeffs.get(&m)
    }

    pub fn coeff_or_zero(&self, m: u32) -> DiffOp {
        self.coeffs
            .get(&m)
            .cloned()
            .unwrap_or_else(|| DiffOp::zero(&self.context))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &DiffOp)> {
        self.coeffs.iter().map(|(m, op)| (*m, op))
    }

    pub fn add(&self, other: &Self) -> Self {
        let t_trunc = self.t_trunc.min(other.t_trunc);
        let mut out = Self { context: self.context, t_trunc, coeffs: BTreeMap::new() };
        for m in 0..=t_trunc {
            let op = match (self.coeffs.get(&m), other.coeffs.get(&m)) {
                (Some(x), Some(y)) => x.add(y),
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (None, None) => continue,
            };
            out.set_coeff(m, op);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scalar_mul(&q(-1)))
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        Self {
            context: self.context,
            t_trunc: self.t_trunc,
            coeffs: if c.is_zero() {
                BTreeMap::new()
            } else {
                self.coeffs.iter().map(|(m, op)| (*m, op.scalar_mul(c))).collect()
            },
        }
    }

    /// The substitution `t -> -t`: negates odd coefficients.
    pub fn alternate_signs(&self) -> Self {
        Self {
            context: self.context,
            t_trunc: self.t_trunc,
            coeffs: self
                .coeffs
                .iter()
                .map(|(m, op)| {
                    let op = if m % 2 == 1 { op.scalar_mul(&q(-1)) } else { op.clone() };
                    (*m, op)
                })
                .collect(),
        }
    }

    /// Cauchy product, truncated to the shared validity bound.
    pub fn mul(&self, other: &Self) -> Self {
        self.context.assert_same_ctx(&other.context, "tdiffop mul");
        let t_trunc = self.t_trunc.min(other.t_trunc);
        let mut out = Self { context: self.context, t_trunc, coeffs: BTreeMap::new() };
        for m in 0..=t_trunc {
            let mut acc = DiffOp::zero(&self.context);
            for (a, op_a) in &self.coeffs {
                if *a > m {
                    break;
                }
                if let Some(op_b) = other.coeffs.get(&(m - a)) {
                    acc = acc.add(&op_a.mul(op_b));
                }
            }
            out.set_coeff(m, acc);
        }
        out
    }

    /// Termwise d/dt; the result is meaningful one t-order lower.
    pub fn t_derivative(&self) -> Self {
        let t_trunc = self.t_trunc.saturating_sub(1);
        let mut out = Self { context: self.context, t_trunc, coeffs: BTreeMap::new() };
        for (m, op) in &self.coeffs {
            if *m >= 1 {
                out.set_coeff(m - 1, op.scalar_mul(&q(*m as i64)));
            }
        }
        out
    }

    /// `exp(D) = sum_k D^k / k!`; requires a zero t^0 coefficient, which makes
    /// the sum finite at the truncation (`D^k` has t-order at least `k`).
    pub fn exp(&self) -> Result<Self> {
        if self.coeffs.contains_key(&0) {
            return Err(Error::ExpPrecondition);
        }
        let mut out = TDiffOp::identity(&self.context).with_t_trunc(self.t_trunc);
        let mut power = TDiffOp::identity(&self.context).with_t_trunc(self.t_trunc);
        for k in 1..=self.t_trunc.max(1) {
            power = power.mul(self);
            if power.coeffs.is_empty() {
                break;
            }
            out = out.add(&power.scalar_mul(&inv_factorial(k)));
        }
        Ok(out)
    }

    /// `log(G) = sum_k (-1)^(k+1) (G - 1)^k / k`; requires an identity t^0
    /// coefficient. `log(exp(D)) = D` at the truncation.
    pub fn log(&self) -> Result<Self> {
        let ok = self
            .coeffs
            .get(&0)
            .map(|op| op.is_structural_identity())
            .unwrap_or(false);
        if !ok {
            return Err(Error::LogPrecondition);
        }
        let mut x = self.clone();
        x.coeffs.remove(&0);
        let mut out = TDiffOp::zero(&self.context).with_t_trunc(self.t_trunc);
        let mut power = TDiffOp::identity(&self.context).with_t_trunc(self.t_trunc);
        for k in 1..=self.t_trunc.max(1) {
            power = power.mul(&x);
            if power.coeffs.is_empty() {
                break;
            }
            let sign = if k % 2 == 1 { q(1) } else { q(-1) };
            out = out.add(&power.scalar_mul(&(sign / q(k as i64))));
        }
        Ok(out)
    }

    /// Applies the t-series of operators to a series.
    pub fn apply(&self, u: &TruncSeries) -> TruncSeries {
        let mut out = TruncSeries::zero(&self.context);
        for (m, op) in &self.coeffs {
            out += &op.apply(u).mul_t_power(*m);
        }
        out.truncate_t(self.t_trunc.min(u.t_trunc()))
    }

    /// Equal action on all basis monomials, compared coefficient-by-coefficient
    /// in t up to the shared validity bound.
    pub fn op_equal(&self, other: &Self) -> Result<bool> {
        if self.context != other.context {
            return Err(Error::ContextMismatch(format!(
                "{} vs {}",
                self.context, other.context
            )));
        }
        let basis = MonomialBasis::new(&self.context);
        let a = TAction::from_tdiffop(self, &basis);
        let b = TAction::from_tdiffop(other, &basis);
        Ok(a.first_mismatch(&b, &basis).is_none())
    }
}

/// Basis-action form of a [`TDiffOp`]: one [`OpAction`] per t-power.
#[derive(Debug, Clone)]
pub struct TAction {
    t_trunc: u32,
    coeffs: BTreeMap<u32, OpAction>,
}

impl TAction {
    pub fn from_tdiffop(op: &TDiffOp, basis: &MonomialBasis) -> Self {
        Self {
            t_trunc: op.t_trunc(),
            coeffs: op.coeffs().map(|(m, c)| (m, OpAction::from_op(c, basis))).collect(),
        }
    }

    pub fn identity(basis: &MonomialBasis) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, OpAction::identity(basis));
        Self { t_trunc: basis.context().max_t_degree(), coeffs }
    }

    pub fn t_trunc(&self) -> u32 {
        self.t_trunc
    }

    pub fn coeff(&self, m: u32) -> Option<&OpAction> {
        self.coeffs.get(&m)
    }

    pub fn add(&self, other: &Self) -> Self {
        let t_trunc = self.t_trunc.min(other.t_trunc);
        let mut coeffs = BTreeMap::new();
        for m in 0..=t_trunc {
            match (self.coeffs.get(&m), other.coeffs.get(&m)) {
                (Some(a), Some(b)) => {
                    coeffs.insert(m, a.add(b));
                }
                (Some(a), None) => {
                    coeffs.insert(m, a.clone());
                }
                (None, Some(b)) => {
                    coeffs.insert(m, b.clone());
                }
                (None, None) => {}
            }
        }
        Self { t_trunc, coeffs }
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        Self {
            t_trunc: self.t_trunc,
            coeffs: self.coeffs.iter().map(|(m, a)| (*m, a.scalar_mul(c))).collect(),
        }
    }

    /// Cauchy product by action composition.
    pub fn mul(&self, other: &Self, basis: &MonomialBasis) -> Self {
        let t_trunc = self.t_trunc.min(other.t_trunc);
        let mut coeffs: BTreeMap<u32, OpAction> = BTreeMap::new();
        for (a, act_a) in &self.coeffs {
            if *a > t_trunc {
                continue;
            }
            for (b, act_b) in &other.coeffs {
                let m = a + b;
                if m > t_trunc {
                    continue;
                }
                let prod = act_a.compose(act_b, basis);
                match coeffs.entry(m) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(prod);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        let sum = o.get().add(&prod);
                        *o.get_mut() = sum;
                    }
                }
            }
        }
        Self { t_trunc, coeffs }
    }

    pub fn t_derivative(&self) -> Self {
        Self {
            t_trunc: self.t_trunc.saturating_sub(1),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| **m >= 1)
                .map(|(m, a)| (m - 1, a.scalar_mul(&q(*m as i64))))
                .collect(),
        }
    }

    pub fn exp(&self, basis: &MonomialBasis) -> Result<Self> {
        if self.coeffs.contains_key(&0) {
            return Err(Error::ExpPrecondition);
        }
        let mut out = TAction::identity(basis);
        out.t_trunc = self.t_trunc;
        let mut power = TAction::identity(basis);
        power.t_trunc = self.t_trunc;
        for k in 1..=self.t_trunc.max(1) {
            power = power.mul(self, basis);
            if power.coeffs.is_empty() {
                break;
            }
            out = out.add(&power.scalar_mul(&inv_factorial(k)));
        }
        Ok(out)
    }

    /// Two-sided inverse of a t-series with identity t^0 coefficient, solved
    /// order by order: `y_m = -sum_{k=1..m} x_k y_{m-k}`.
    pub fn inverse(&self, basis: &MonomialBasis) -> Result<Self> {
        let id = OpAction::identity(basis);
        let ok = self
            .coeffs
            .get(&0)
            .map(|a| a.first_difference(&id).is_none())
            .unwrap_or(false);
        if !ok {
            return Err(Error::LogPrecondition);
        }
        let mut inv: BTreeMap<u32, OpAction> = BTreeMap::new();
        inv.insert(0, id);
        for m in 1..=self.t_trunc {
            let mut acc: Option<OpAction> = None;
            for k in 1..=m {
                if let (Some(xk), Some(ym)) = (self.coeffs.get(&k), inv.get(&(m - k))) {
                    let prod = xk.compose(ym, basis);
                    acc = Some(match acc {
                        Some(a) => a.add(&prod),
                        None => prod,
                    });
                }
            }
            if let Some(a) = acc {
                inv.insert(m, a.scalar_mul(&q(-1)));
            }
        }
        Ok(Self { t_trunc: self.t_trunc, coeffs: inv })
    }

    /// First `(t power, basis index)` where the two actions differ, compared
    /// up to the shared validity bound.
    pub fn first_mismatch(&self, other: &Self, basis: &MonomialBasis) -> Option<(u32, usize)> {
        let bound = self.t_trunc.min(other.t_trunc);
        let zero = OpAction::zero(basis);
        for m in 0..=bound {
            let a = self.coeffs.get(&m).unwrap_or(&zero);
            let b = other.coeffs.get(&m).unwrap_or(&zero);
            if let Some(i) = a.first_difference(b) {
                return Some((m, i));
            }
        }
        None
    }

    pub fn is_identity(&self, basis: &MonomialBasis) -> bool {
        self.first_mismatch(&TAction::identity(basis), basis).is_none()
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::{random_derivation, random_series};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn comm1(nz: u32, nt: u32) -> RingContext {
        RingContext::new(1, true, nz, nt).unwrap()
    }

    fn z_pow(ctx: &RingContext, e: u8) -> TruncSeries {
        TruncSeries::term(ctx, 0, Monomial::exps(&[e]), q(1))
    }

    /// `[z^2 d/dz]` in one commutative variable.
    fn dsq(ctx: &RingContext) -> Derivation {
        Derivation::new(SeriesVector::new(vec![z_pow(ctx, 2)]))
    }

    #[test]
    fn occurrence_replacement_is_in_place() {
        // [u d/dz2] (z1 z2) = z1 * u(z), not u(z) * z1
        let ctx = RingContext::new(2, false, 4, 0).unwrap();
        let z1 = TruncSeries::var(&ctx, 0);
        let z2 = TruncSeries::var(&ctx, 1);
        let u = z2.clone();
        let delta = Derivation::single(&ctx, 1, u.clone());
        let got = delta.apply(&(&z1 * &z2));
        assert_eq!(got, &z1 * &u);
        assert_ne!(got, &u * &z1);
    }

    #[test]
    fn generator_image_and_leibniz_square() {
        let ctx = comm1(4, 0);
        let d = dsq(&ctx);
        assert_eq!(d.apply(&TruncSeries::var(&ctx, 0)), z_pow(&ctx, 2));
        // z^2 -> 2 z^3
        assert_eq!(d.apply(&z_pow(&ctx, 2)), z_pow(&ctx, 3).scalar_mul(&q(2)));
    }

    #[test]
    fn leibniz_rule_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for commutative in [true, false] {
            let ctx = RingContext::new(2, commutative, 5, 2).unwrap();
            for _ in 0..20 {
                let d = random_derivation(&ctx, &mut rng);
                let u = random_series(&ctx, &mut rng);
                let v = random_series(&ctx, &mut rng);
                let lhs = d.apply(&(&u * &v));
                let rhs = &(&d.apply(&u) * &v) + &(&u * &d.apply(&v));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn apply_op_examples() {
        let ctx = comm1(4, 0);
        let d = dsq(&ctx);
        let u = z_pow(&ctx, 2);
        assert_eq!(DiffOp::identity(&ctx).apply(&u), u);
        assert!(DiffOp::zero(&ctx).apply(&u).is_zero());
        // word [d, d] acts as d(d(z^2)) = d(2z^3) = 6 z^4
        let word = DiffOp::from_word(
            &ctx,
            vec![OpAtom::Deriv(d.clone()), OpAtom::Deriv(d.clone())],
            q(1),
        );
        assert_eq!(word.apply(&u), z_pow(&ctx, 4).scalar_mul(&q(6)));
    }

    #[test]
    fn triangle_examples() {
        let ctx = comm1(4, 0);
        let d = dsq(&ctx);
        // d |> d = [2 z^3 d/dz]
        let t = triangle(&d, &d);
        assert_eq!(t.coeffs()[0], z_pow(&ctx, 3).scalar_mul(&q(2)));
        // phi kills the coefficient of delta -> zero derivation
        let ctx2 = RingContext::new(2, true, 4, 0).unwrap();
        let phi = Derivation::single(&ctx2, 0, TruncSeries::var(&ctx2, 0));
        let delta = Derivation::single(&ctx2, 0, TruncSeries::var(&ctx2, 1));
        assert!(triangle(&phi, &delta).is_zero());
    }

    #[test]
    fn bplus_single_is_the_derivation() {
        let ctx = comm1(4, 0);
        let d = dsq(&ctx);
        for route in [BPlusRoute::Recursive, BPlusRoute::Auxiliary] {
            let op = bplus(std::slice::from_ref(&d), route).unwrap();
            assert_eq!(op, DiffOp::from_derivation(d.clone()));
        }
        assert!(matches!(bplus(&[], BPlusRoute::Auxiliary), Err(Error::EmptyDerivationList)));
    }

    #[test]
    fn bplus_double_replacement() {
        let ctx = comm1(5, 0);
        let d = dsq(&ctx);
        let aux = bplus(&[d.clone(), d.clone()], BPlusRoute::Auxiliary).unwrap();
        // B+(d, d) z^2 = 2 z^4: both occurrences replaced, two orders
        assert_eq!(aux.apply(&z_pow(&ctx, 2)), z_pow(&ctx, 4).scalar_mul(&q(2)));
        // a single occurrence cannot host two replacements
        assert!(aux.apply(&TruncSeries::var(&ctx, 0)).is_zero());
        // and the recursion d . B+(d) - B+(d |> d) gives 6z^4 - 4z^4 on z^2
        let rec = bplus(&[d.clone(), d.clone()], BPlusRoute::Recursive).unwrap();
        assert_eq!(rec.apply(&z_pow(&ctx, 2)), z_pow(&ctx, 4).scalar_mul(&q(2)));
        assert!(aux.op_equal(&rec).unwrap());
    }

    #[test]
    fn bplus_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for commutative in [true, false] {
            let ctx = RingContext::new(2, commutative, 5, 1).unwrap();
            for m in 1..=4usize {
                for _ in 0..3 {
                    let deltas: Vec<Derivation> =
                        (0..m).map(|_| random_derivation(&ctx, &mut rng)).collect();
                    let a = bplus(&deltas, BPlusRoute::Auxiliary).unwrap();
                    let r = bplus(&deltas, BPlusRoute::Recursive).unwrap();
                    assert!(a.op_equal(&r).unwrap(), "m={m}, comm={commutative}");
                }
            }
        }
    }

    #[test]
    fn bplus_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ctx = RingContext::new(2, false, 5, 1).unwrap();
        let deltas: Vec<Derivation> = (0..3).map(|_| random_derivation(&ctx, &mut rng)).collect();
        let base = bplus(&deltas, BPlusRoute::Auxiliary).unwrap();
        let perms: [[usize; 3]; 5] = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let permuted: Vec<Derivation> = p.iter().map(|&i| deltas[i].clone()).collect();
            let op = bplus(&permuted, BPlusRoute::Auxiliary).unwrap();
            assert!(base.op_equal(&op).unwrap());
            let op = bplus(&permuted, BPlusRoute::Recursive).unwrap();
            assert!(base.op_equal(&op).unwrap());
        }
    }

    #[test]
    fn collapse_identity_for_composition() {
        // phi . B+(d_1, ..., d_m) = B+(phi, d_1, ..., d_m)
        //                           + sum_i B+(d_1, ..., phi |> d_i, ..., d_m)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for commutative in [true, false] {
            let ctx = RingContext::new(2, commutative, 5, 1).unwrap();
            for m in 1..=4usize {
                let phi = random_derivation(&ctx, &mut rng);
                let deltas: Vec<Derivation> =
                    (0..m).map(|_| random_derivation(&ctx, &mut rng)).collect();
                let lhs = DiffOp::from_derivation(phi.clone())
                    .mul(&bplus(&deltas, BPlusRoute::Auxiliary).unwrap());
                let mut with_phi = vec![phi.clone()];
                with_phi.extend(deltas.iter().cloned());
                let mut rhs = bplus(&with_phi, BPlusRoute::Auxiliary).unwrap();
                for i in 0..m {
                    let mut collapsed = deltas.clone();
                    collapsed[i] = triangle(&phi, &deltas[i]);
                    rhs = rhs.add(&bplus(&collapsed, BPlusRoute::Auxiliary).unwrap());
                }
                assert!(lhs.op_equal(&rhs).unwrap(), "m={m}, comm={commutative}");
            }
        }
    }

    #[test]
    fn bplus_degree_raising() {
        // coefficients of z-order >= alpha raise degree by >= m(alpha - 1)
        let ctx = RingContext::new(1, true, 8, 0).unwrap();
        let alpha = 3u32;
        let d3 = Derivation::new(SeriesVector::new(vec![z_pow(&ctx, alpha as u8)]));
        let d4 = Derivation::new(SeriesVector::new(vec![z_pow(&ctx, alpha as u8 + 1)]));
        for m in 1..=3u32 {
            let deltas: Vec<Derivation> = (0..m)
                .map(|i| if i % 2 == 0 { d3.clone() } else { d4.clone() })
                .collect();
            for route in [BPlusRoute::Auxiliary, BPlusRoute::Recursive] {
                let op = bplus(&deltas, route).unwrap();
                let basis = MonomialBasis::new(&ctx);
                for i in 0..basis.len() {
                    let deg = basis.mono(i).degree();
                    let image = op.apply(&basis.mono_series(i));
                    if let Some(o) = image.z_order() {
                        assert!(o >= deg + m * (alpha - 1), "m={m}");
                    }
                }
            }
        }
    }

    #[test]
    fn op_equal_basic() {
        let ctx = comm1(4, 1);
        let id = DiffOp::identity(&ctx);
        assert!(id.op_equal(&id).unwrap());
        assert!(!id.op_equal(&DiffOp::zero(&ctx)).unwrap());
        let other = RingContext::new(2, true, 4, 1).unwrap();
        assert!(id.op_equal(&DiffOp::identity(&other)).is_err());
    }

    #[test]
    fn exp_log_round_trip() {
        let ctx = comm1(4, 3);
        // exp(0) = 1, log(1) = 0
        assert_eq!(TDiffOp::zero(&ctx).exp().unwrap(), TDiffOp::identity(&ctx));
        assert_eq!(TDiffOp::identity(&ctx).log().unwrap(), TDiffOp::zero(&ctx));
        // log(exp(t d)) = t d
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = random_derivation(&ctx, &mut rng);
        let mut td = TDiffOp::zero(&ctx);
        td.set_coeff(1, DiffOp::from_derivation(d));
        let round = td.exp().unwrap().log().unwrap();
        assert!(round.op_equal(&td).unwrap());
        // precondition violations
        assert!(TDiffOp::identity(&ctx).exp().is_err());
        assert!(TDiffOp::zero(&ctx).log().is_err());
    }

    #[test]
    fn taction_inverse_is_two_sided() {
        let ctx = RingContext::new(2, false, 4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let basis = MonomialBasis::new(&ctx);
        let mut g = TDiffOp::identity(&ctx);
        g.set_coeff(1, DiffOp::from_derivation(random_derivation(&ctx, &mut rng)));
        g.set_coeff(2, DiffOp::from_derivation(random_derivation(&ctx, &mut rng)));
        let ga = TAction::from_tdiffop(&g, &basis);
        let inv = ga.inverse(&basis).unwrap();
        assert!(ga.mul(&inv, &basis).is_identity(&basis));
        assert!(inv.mul(&ga, &basis).is_identity(&basis));
    }

    #[test]
    fn basis_enumeration_counts() {
        let free3 = RingContext::new(3, false, 3, 0).unwrap();
        assert_eq!(MonomialBasis::new(&free3).len(), 1 + 3 + 9 + 27);
        let comm2 = RingContext::new(2, true, 3, 0).unwrap();
        assert_eq!(MonomialBasis::new(&comm2).len(), 10);
    }
}
