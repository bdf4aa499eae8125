//! JSON wire formats.
//!
//! Term format: `{"t": k, "word": [i, ...], "coeff": "p/q"}` in free-variable
//! contexts, `{"t": k, "exps": [e1, ..., en], "coeff": "p/q"}` in commutative
//! ones. Coefficients always render as `p/q` with positive denominator.
//!
//! The automorphism document carries its own ring parameters:
//! `{"n": ..., "commutative": ..., "alpha": ..., "N_z": ..., "N_t": ...,
//! "H": [component term lists ...]}`; the D-Log document replaces `H` with
//! `a`. Emission order is canonical (struct field order plus sorted term
//! maps), so equal values serialize to equal bytes.

use serde::{Deserialize, Serialize};

use crate::autgroup::{Automorphism, DLog};
use crate::diffop::{Derivation, DiffOp, OpAtom};
use crate::error::{Error, Result};
use crate::ncs::{CheckEntry, SeparateOutcome, VerifyReport};
use crate::nsym::NSymElem;
use crate::rational::{format_rational, parse_rational};
use crate::series::{Monomial, RingContext, SeriesVector, TruncSeries};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDto {
    pub t: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub word: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exps: Option<Vec<u8>>,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutomorphismDoc {
    pub n: usize,
    pub commutative: bool,
    pub alpha: u32,
    #[serde(rename = "N_z")]
    pub n_z: u32,
    #[serde(rename = "N_t")]
    pub n_t: u32,
    #[serde(rename = "H")]
    pub h: Vec<Vec<TermDto>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DLogDoc {
    pub n: usize,
    pub commutative: bool,
    pub alpha: u32,
    #[serde(rename = "N_z")]
    pub n_z: u32,
    #[serde(rename = "N_t")]
    pub n_t: u32,
    pub a: Vec<Vec<TermDto>>,
}

pub fn series_to_terms(s: &TruncSeries) -> Vec<TermDto> {
    s.terms()
        .map(|(t, mono, c)| {
            let (word, exps) = match mono {
                Monomial::Word(_) => (Some(mono.occurrences().to_vec()), None),
                Monomial::Exps(_) => (
                    None,
                    Some(match mono {
                        Monomial::Exps(e) => e.to_vec(),
                        Monomial::Word(_) => unreachable!(),
                    }),
                ),
            };
            TermDto { t, word, exps, coeff: format_rational(c) }
        })
        .collect()
}

pub fn terms_to_series(ctx: &RingContext, terms: &[TermDto]) -> Result<TruncSeries> {
    let mut out = TruncSeries::zero(ctx);
    for dto in terms {
        let mono = match (&dto.word, &dto.exps, ctx.commutative()) {
            (Some(word), None, false) => {
                if let Some(&bad) = word.iter().find(|&&l| l as usize >= ctx.n()) {
                    return Err(Error::Schema(format!(
                        "variable index {bad} out of range for n = {}",
                        ctx.n()
                    )));
                }
                Monomial::word(word)
            }
            (None, Some(exps), true) => {
                if exps.len() != ctx.n() {
                    return Err(Error::Schema(format!(
                        "exponent vector length {} does not match n = {}",
                        exps.len(),
                        ctx.n()
                    )));
                }
                Monomial::exps(exps)
            }
            (Some(_), _, true) => {
                return Err(Error::Schema(
                    "commutative contexts use \"exps\", not \"word\"".into(),
                ))
            }
            (_, Some(_), false) => {
                return Err(Error::Schema(
                    "free-variable contexts use \"word\", not \"exps\"".into(),
                ))
            }
            (None, None, _) => {
                return Err(Error::Schema("term needs a \"word\" or \"exps\" field".into()))
            }
        };
        if dto.t > ctx.max_t_degree() || mono.degree() > ctx.max_z_degree() {
            return Err(Error::Schema(format!(
                "term t^{} degree {} exceeds the truncation bounds of {ctx}",
                dto.t,
                mono.degree()
            )));
        }
        out.add_term(dto.t, mono, parse_rational(&dto.coeff)?);
    }
    Ok(out)
}

fn vector_to_terms(v: &SeriesVector) -> Vec<Vec<TermDto>> {
    v.iter().map(series_to_terms).collect()
}

fn terms_to_vector(ctx: &RingContext, comps: &[Vec<TermDto>]) -> Result<SeriesVector> {
    if comps.len() != ctx.n() {
        return Err(Error::Schema(format!(
            "{} components for n = {}",
            comps.len(),
            ctx.n()
        )));
    }
    let components = comps
        .iter()
        .map(|terms| terms_to_series(ctx, terms))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesVector::new(components))
}

pub fn automorphism_to_doc(aut: &Automorphism) -> AutomorphismDoc {
    let ctx = aut.context();
    AutomorphismDoc {
        n: ctx.n(),
        commutative: ctx.commutative(),
        alpha: aut.alpha(),
        n_z: ctx.max_z_degree(),
        n_t: ctx.max_t_degree(),
        h: vector_to_terms(aut.h()),
    }
}

pub fn doc_to_automorphism(doc: &AutomorphismDoc) -> Result<Automorphism> {
    let ctx = RingContext::new(doc.n, doc.commutative, doc.n_z, doc.n_t)?;
    Automorphism::new(doc.alpha, terms_to_vector(&ctx, &doc.h)?)
}

pub fn dlog_to_doc(d: &DLog) -> DLogDoc {
    let ctx = d.context();
    DLogDoc {
        n: ctx.n(),
        commutative: ctx.commutative(),
        alpha: d.alpha(),
        n_z: ctx.max_z_degree(),
        n_t: ctx.max_t_degree(),
        a: vector_to_terms(d.coeffs()),
    }
}

pub fn doc_to_dlog(doc: &DLogDoc) -> Result<DLog> {
    let ctx = RingContext::new(doc.n, doc.commutative, doc.n_z, doc.n_t)?;
    DLog::new(doc.alpha, terms_to_vector(&ctx, &doc.a)?)
}

// --- free algebra elements -------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NSymTermDto {
    pub word: Vec<u8>,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NSymDoc {
    pub max_weight: u32,
    pub terms: Vec<NSymTermDto>,
}

pub fn nsym_to_doc(p: &NSymElem) -> NSymDoc {
    NSymDoc {
        max_weight: p.max_weight(),
        terms: p
            .terms()
            .map(|(word, c)| NSymTermDto { word: word.clone(), coeff: format_rational(c) })
            .collect(),
    }
}

pub fn doc_to_nsym(doc: &NSymDoc) -> Result<NSymElem> {
    let mut out = NSymElem::zero(doc.max_weight);
    for term in &doc.terms {
        if term.word.contains(&0) {
            return Err(Error::Schema("generator indices start at 1".into()));
        }
        let weight: u32 = term.word.iter().map(|&m| m as u32).sum();
        if weight > doc.max_weight {
            return Err(Error::Schema(format!(
                "word weight {weight} exceeds max_weight {}",
                doc.max_weight
            )));
        }
        out.add_term(term.word.clone(), parse_rational(&term.coeff)?);
    }
    Ok(out)
}

// --- operators ---------------------------------------------------------------

pub type DerivationDto = Vec<Vec<TermDto>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomDto {
    Derivation(DerivationDto),
    BPlus(Vec<DerivationDto>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffOpTermDto {
    pub scalar: String,
    pub word: Vec<AtomDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffOpDto {
    pub identity: String,
    pub terms: Vec<DiffOpTermDto>,
}

pub fn derivation_to_dto(d: &Derivation) -> DerivationDto {
    vector_to_terms(d.coeffs())
}

pub fn diffop_to_dto(op: &DiffOp) -> DiffOpDto {
    DiffOpDto {
        identity: format_rational(op.identity_part()),
        terms: op
            .words()
            .map(|(word, c)| DiffOpTermDto {
                scalar: format_rational(c),
                word: word
                    .iter()
                    .map(|atom| match atom {
                        OpAtom::Deriv(d) => AtomDto::Derivation(derivation_to_dto(d)),
                        OpAtom::BPlus(ds) => {
                            AtomDto::BPlus(ds.iter().map(derivation_to_dto).collect())
                        }
                    })
                    .collect(),
            })
            .collect(),
    }
}

// --- reports and witnesses ---------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEntryDto {
    pub check: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<String>,
}

/// A report is a JSON list of `{check, status, counterexample?}` entries.
pub fn report_to_doc(report: &VerifyReport) -> Vec<ReportEntryDto> {
    report
        .entries
        .iter()
        .map(|CheckEntry { check, pass, counterexample }| ReportEntryDto {
            check: check.clone(),
            status: if *pass { "pass".into() } else { "fail".into() },
            counterexample: counterexample.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub n: usize,
    pub attempts_used: u32,
    pub automorphism: AutomorphismDoc,
    pub monomial: Vec<TermDto>,
    pub value: Vec<TermDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparateDoc {
    pub status: String,
    pub attempts: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<WitnessDoc>,
}

pub fn separate_outcome_to_doc(outcome: &SeparateOutcome) -> SeparateDoc {
    match outcome {
        SeparateOutcome::Witness(w) => SeparateDoc {
            status: "witness".into(),
            attempts: w.attempts_used,
            witness: Some(WitnessDoc {
                n: w.n(),
                attempts_used: w.attempts_used,
                automorphism: automorphism_to_doc(&w.automorphism),
                monomial: series_to_terms(&w.monomial),
                value: series_to_terms(&w.value),
            }),
        },
        SeparateOutcome::Exhausted { attempts } => SeparateDoc {
            status: "inconclusive".into(),
            attempts: *attempts,
            witness: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn automorphism_document_round_trip() {
        let ctx = RingContext::new(2, false, 5, 3).unwrap();
        let mut h1 = TruncSeries::zero(&ctx);
        h1.add_term(1, Monomial::word(&[0, 1]), q(-2));
        h1.add_term(2, Monomial::word(&[1, 1, 0]), crate::rational::q_ratio(1, 3));
        let aut = Automorphism::new(
            2,
            SeriesVector::new(vec![h1, TruncSeries::zero(&ctx)]),
        )
        .unwrap();
        let json = serde_json::to_string(&automorphism_to_doc(&aut)).unwrap();
        let doc: AutomorphismDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(doc_to_automorphism(&doc).unwrap(), aut);
        // canonical bytes: same value serializes identically
        let json2 = serde_json::to_string(&automorphism_to_doc(
            &doc_to_automorphism(&doc).unwrap(),
        ))
        .unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn schema_violations_are_reported() {
        // word in a commutative doc
        let doc: AutomorphismDoc = serde_json::from_str(
            r#"{"n":1,"commutative":true,"alpha":2,"N_z":4,"N_t":2,
                "H":[[{"t":1,"word":[0,0],"coeff":"1/1"}]]}"#,
        )
        .unwrap();
        assert!(doc_to_automorphism(&doc).is_err());
        // out-of-range variable index
        let doc: AutomorphismDoc = serde_json::from_str(
            r#"{"n":1,"commutative":false,"alpha":2,"N_z":4,"N_t":2,
                "H":[[{"t":1,"word":[0,3],"coeff":"1/1"}]]}"#,
        )
        .unwrap();
        assert!(doc_to_automorphism(&doc).is_err());
        // order violation caught by the constructor
        let doc: AutomorphismDoc = serde_json::from_str(
            r#"{"n":1,"commutative":true,"alpha":2,"N_z":4,"N_t":2,
                "H":[[{"t":0,"exps":[2],"coeff":"1/1"}]]}"#,
        )
        .unwrap();
        assert!(doc_to_automorphism(&doc).is_err());
    }

    #[test]
    fn nsym_document_round_trip() {
        let mut p = NSymElem::zero(4);
        p.add_term(vec![1, 2], q(3));
        p.add_term(vec![], crate::rational::q_ratio(-1, 2));
        let doc = nsym_to_doc(&p);
        assert_eq!(doc_to_nsym(&doc).unwrap(), p);
        assert!(doc_to_nsym(&NSymDoc {
            max_weight: 2,
            terms: vec![NSymTermDto { word: vec![0], coeff: "1/1".into() }],
        })
        .is_err());
    }

    #[test]
    fn diffop_dto_renders_both_atom_kinds() {
        let ctx = RingContext::new(1, true, 4, 1).unwrap();
        let d = Derivation::new(SeriesVector::new(vec![TruncSeries::term(
            &ctx,
            0,
            Monomial::exps(&[2]),
            q(1),
        )]));
        let op = crate::diffop::bplus(&[d.clone(), d], crate::diffop::BPlusRoute::Auxiliary)
            .unwrap();
        let dto = diffop_to_dto(&op);
        let json = serde_json::to_string(&dto).unwrap();
        assert!(json.contains("bplus"));
        let back: DiffOpDto = serde_json::from_str(&json).unwrap();
        assert_eq!(back.terms.len(), 1);
    }
}
