//! Text formats: series and jets as coefficient lists, maps and conjugacies
//! built from them. Doubles are written in shortest round-trip decimal.

use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::fourier::FourierSeries;
use crate::herman::TwistedConjugacy;
use crate::jet::ActionJet;
use crate::scalar::{cplx, Real};
use crate::symplectic::{ExactOneForm, FiberedSymplectomorphism, TorusMap};

/// Coefficients with modulus below this are not written.
pub const OMIT_BELOW: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub m: Vec<usize>,
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// A jet; an angle function is the degree-0 case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetDoc {
    pub dim: usize,
    pub order: usize,
    pub degree: usize,
    #[serde(default = "yes")]
    pub real: bool,
    pub entries: Vec<Entry>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusMapDoc {
    pub v: Vec<JetDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneFormDoc {
    #[serde(rename = "S")]
    pub potential: JetDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymplectomorphismDoc {
    pub phi: TorusMapDoc,
    #[serde(rename = "S")]
    pub potential: JetDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugacyDoc {
    #[serde(rename = "K")]
    pub k: JetDoc,
    #[serde(rename = "G")]
    pub g: SymplectomorphismDoc,
    pub beta: Vec<f64>,
}

fn push_series<T: Real>(out: &mut Vec<Entry>, m: &[usize], f: &FourierSeries<T>) {
    let bx = f.wave_box();
    for (idx, c) in f.coeffs().iter().enumerate() {
        let (re, im) = (c.re.as_f64(), c.im.as_f64());
        if re.hypot(im) < OMIT_BELOW {
            continue;
        }
        out.push(Entry { m: m.to_vec(), k: bx.wave(idx), re, im });
    }
}

pub fn series_doc<T: Real>(f: &FourierSeries<T>) -> JetDoc {
    let mut entries = Vec::new();
    push_series(&mut entries, &vec![0; f.dim()], f);
    JetDoc { dim: f.dim(), order: f.order(), degree: 0, real: f.is_real(), entries }
}

pub fn jet_doc<T: Real>(j: &ActionJet<T>) -> JetDoc {
    let mut entries = Vec::new();
    for (i, m) in j.monomials().iter().enumerate() {
        push_series(&mut entries, m, j.term_at(i));
    }
    JetDoc { dim: j.dim(), order: j.order(), degree: j.degree(), real: j.is_real(), entries }
}

fn collect_series<T: Real>(doc: &JetDoc, entries: &[&Entry]) -> Result<FourierSeries<T>> {
    let terms: Vec<(Vec<i64>, _)> = entries.iter().map(|e| (e.k.clone(), cplx(T::lit(e.re), T::lit(e.im)))).collect();
    let f = FourierSeries::from_terms(doc.dim, doc.order, &terms)?;
    FourierSeries::from_coeffs(doc.dim, doc.order, f.coeffs().to_vec(), doc.real)
}

pub fn series_from_doc<T: Real>(doc: &JetDoc) -> Result<FourierSeries<T>> {
    if doc.degree != 0 || doc.entries.iter().any(|e| e.m.iter().any(|x| *x != 0)) {
        return Err(KamError::Format("expected an angle function (degree 0)".into()));
    }
    collect_series(doc, &doc.entries.iter().collect::<Vec<_>>())
}

pub fn jet_from_doc<T: Real>(doc: &JetDoc) -> Result<ActionJet<T>> {
    let mut j = ActionJet::zeros(doc.dim, doc.degree, doc.order);
    let mono = j.monomials().clone();
    for m in mono.iter() {
        let picked: Vec<&Entry> = doc.entries.iter().filter(|e| e.m == m).collect();
        if !picked.is_empty() {
            j.set_term(m, collect_series(doc, &picked)?)?;
        }
    }
    let known = doc.entries.iter().all(|e| mono.index(&e.m).is_some());
    if !known {
        return Err(KamError::Format(format!("entry exponent outside degree {}", doc.degree)));
    }
    Ok(j)
}

pub fn torus_map_doc<T: Real>(phi: &TorusMap<T>) -> TorusMapDoc {
    TorusMapDoc { v: phi.displacement().iter().map(series_doc).collect() }
}

pub fn torus_map_from_doc<T: Real>(doc: &TorusMapDoc) -> Result<TorusMap<T>> {
    TorusMap::new(doc.v.iter().map(series_from_doc).collect::<Result<_>>()?)
}

pub fn one_form_doc<T: Real>(form: &ExactOneForm<T>) -> OneFormDoc {
    OneFormDoc { potential: series_doc(form.potential()) }
}

pub fn one_form_from_doc<T: Real>(doc: &OneFormDoc) -> Result<ExactOneForm<T>> {
    ExactOneForm::new(series_from_doc(&doc.potential)?)
}

pub fn symplectomorphism_doc<T: Real>(g: &FiberedSymplectomorphism<T>) -> SymplectomorphismDoc {
    SymplectomorphismDoc { phi: torus_map_doc(g.phi()), potential: series_doc(g.form().potential()) }
}

pub fn symplectomorphism_from_doc<T: Real>(doc: &SymplectomorphismDoc) -> Result<FiberedSymplectomorphism<T>> {
    FiberedSymplectomorphism::new(torus_map_from_doc(&doc.phi)?, ExactOneForm::new(series_from_doc(&doc.potential)?)?)
}

pub fn conjugacy_doc<T: Real>(x: &TwistedConjugacy<T>) -> ConjugacyDoc {
    ConjugacyDoc { k: jet_doc(&x.k), g: symplectomorphism_doc(&x.g), beta: x.beta.iter().map(|b| b.as_f64()).collect() }
}

/// Reads a conjugacy without re-checking the normal form (no frequency is
/// attached to the document).
pub fn conjugacy_from_doc<T: Real>(doc: &ConjugacyDoc) -> Result<TwistedConjugacy<T>> {
    Ok(TwistedConjugacy {
        k: jet_from_doc(&doc.k)?,
        g: symplectomorphism_from_doc(&doc.g)?,
        beta: doc.beta.iter().map(|b| T::lit(*b)).collect(),
    })
}

pub fn to_json<D: Serialize>(doc: &D) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| KamError::Format(e.to_string()))
}

pub fn from_json<D: for<'de> Deserialize<'de>>(text: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| KamError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = FourierSeries<f64>;
    type J = ActionJet<f64>;

    #[test]
    fn jet_round_trip_is_bit_exact() {
        let mut j = J::quadratic_form(2, 3, 3, &[0.1, 1.0 / 3.0, 1.0 / 3.0, std::f64::consts::PI]);
        j.set_term(&[0, 0], S::cosine(2, 3, &[1, -2], 1.0 / 7.0).unwrap().try_add(&S::sine(2, 3, &[0, 3], 2e-300).unwrap()).unwrap()).unwrap();
        j.set_term(&[1, 2], S::sine(2, 3, &[3, 3], -0.1 + 1e-17).unwrap()).unwrap();
        let text = to_json(&jet_doc(&j)).unwrap();
        let back: J = jet_from_doc(&from_json(&text).unwrap()).unwrap();
        assert_eq!(back.terms().len(), j.terms().len());
        for (a, b) in back.terms().iter().zip(j.terms()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                if y.norm() >= OMIT_BELOW {
                    // signed zeros compare equal; everything else must keep its bits
                    for (p, q) in [(x.re, y.re), (x.im, y.im)] {
                        assert!(p.to_bits() == q.to_bits() || (p == 0.0 && q == 0.0));
                    }
                } else {
                    assert_eq!(x.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn symplectomorphism_round_trip() {
        let v = vec![S::sine(2, 4, &[1, 0], 1e-3).unwrap(), S::sine(2, 4, &[1, 1], -2e-3).unwrap()];
        let g = FiberedSymplectomorphism::new(TorusMap::new(v).unwrap(), ExactOneForm::new(S::cosine(2, 4, &[2, -1], 3e-3).unwrap()).unwrap()).unwrap();
        let doc = symplectomorphism_doc(&g);
        let text = to_json(&doc).unwrap();
        assert!(text.contains("\"phi\"") && text.contains("\"S\""));
        let back: FiberedSymplectomorphism<f64> = symplectomorphism_from_doc(&from_json(&text).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(from_json::<JetDoc>(r#"{"dim":1,"order":1,"degree":0,"entries":[],"extra":1}"#).is_err());
    }
}
