//! JSON documents for every persistable object. Polynomials are embedded
//! as text in the expression grammar, and structured {vars, terms} objects
//! are accepted anywhere a polynomial is read. Loading always goes through
//! the library constructors, so a document that parses but violates an
//! invariant is rejected with the constructor's error.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{KernelError, Result};
use crate::factor::{
    Decision, Direction, EquivalenceChain, FactorizationPair, RelationStep, WitnessSpan,
};
use crate::formal::{FormalMorphism, FormalSpace};
use crate::hadamard::{hadamard_expand, HadamardExpansion};
use crate::jets::{fiber_name, JetPoint, ProSystem, TruncatedProPlot};
use crate::monomial::Monomial;
use crate::parse::parse_polynomial;
use crate::poly::Polynomial;
use crate::rational::Rational;
use crate::weil::{WeilAlgebra, DEFAULT_K_MAX};

pub fn parse_rational(s: &str) -> Result<Rational> {
    s.trim().parse::<Rational>().map_err(|_| KernelError::Parse {
        message: format!("invalid rational {s}"),
        position: 0,
    })
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct TermDto {
    pub coeff: String,
    #[serde(default)]
    pub exp: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct PolynomialDto {
    #[serde(default)]
    pub vars: Vec<String>,
    pub terms: Vec<TermDto>,
}

impl PolynomialDto {
    pub fn to_polynomial(&self) -> Result<Polynomial> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let coeff = parse_rational(&t.coeff)?;
            let mono = Monomial::from_exps(t.exp.iter().map(|(v, e)| (v.clone(), *e)));
            terms.push((mono, coeff));
        }
        Ok(Polynomial::from_terms(&self.vars, terms))
    }

    pub fn from_polynomial(p: &Polynomial) -> Self {
        PolynomialDto {
            vars: p.vars().to_vec(),
            terms: p
                .terms()
                .iter()
                .map(|(m, c)| TermDto {
                    coeff: c.to_string(),
                    exp: m.iter().map(|(v, e)| (v.to_string(), e)).collect(),
                })
                .collect(),
        }
    }
}

/// A polynomial field in a document: either expression text or the
/// structured form. Writers emit text.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum PolyDoc {
    Text(String),
    Structured(PolynomialDto),
}

impl PolyDoc {
    pub fn to_polynomial(&self) -> Result<Polynomial> {
        match self {
            PolyDoc::Text(s) => parse_polynomial(s),
            PolyDoc::Structured(dto) => dto.to_polynomial(),
        }
    }

    pub fn from_polynomial(p: &Polynomial) -> Self {
        PolyDoc::Text(p.to_string())
    }
}

fn polys_to_docs(ps: &[Polynomial]) -> Vec<PolyDoc> {
    ps.iter().map(PolyDoc::from_polynomial).collect()
}

fn docs_to_polys(docs: &[PolyDoc]) -> Result<Vec<Polynomial>> {
    docs.iter().map(PolyDoc::to_polynomial).collect()
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct WeilDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    pub generators: Vec<PolyDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
}

impl WeilDoc {
    /// Builds the algebra, inferring the variable list from the generators
    /// (in sorted order) when none is given. The computed fields k, dim,
    /// basis are ignored on load and recomputed.
    pub fn to_algebra(&self, default_k_max: u32) -> Result<WeilAlgebra> {
        let generators = docs_to_polys(&self.generators)?;
        let vars = match &self.vars {
            Some(vs) => vs.clone(),
            None => {
                let mut set = std::collections::BTreeSet::new();
                for g in &generators {
                    set.extend(g.occurring_vars());
                }
                set.into_iter().collect()
            }
        };
        if let Some(d) = self.d {
            if d != vars.len() {
                return Err(KernelError::invalid(format!(
                    "d = {d} but there are {} variables",
                    vars.len()
                )));
            }
        }
        let name = self.name.clone().unwrap_or_else(|| "D".into());
        WeilAlgebra::new(name, vars, generators, self.k_max.unwrap_or(default_k_max))
    }

    pub fn from_algebra(a: &WeilAlgebra) -> Self {
        WeilDoc {
            name: Some(a.name().to_string()),
            d: Some(a.d()),
            vars: Some(a.vars().to_vec()),
            generators: polys_to_docs(a.generators()),
            k_max: None,
            k: Some(a.k()),
            dim: Some(a.dim()),
            basis: Some(a.basis().iter().map(|m| m.to_string()).collect()),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SpaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickening: Option<WeilDoc>,
}

impl SpaceDoc {
    pub fn to_space(&self, default_k_max: u32) -> Result<FormalSpace> {
        let name = self.name.clone().unwrap_or_else(|| "X".into());
        match &self.thickening {
            None => FormalSpace::cartesian(name, self.params.clone()),
            Some(w) => FormalSpace::new(name, self.params.clone(), w.to_algebra(default_k_max)?),
        }
    }

    pub fn from_space(s: &FormalSpace) -> Self {
        SpaceDoc {
            name: Some(s.name().to_string()),
            params: s.params().to_vec(),
            thickening: if s.is_cartesian() {
                None
            } else {
                Some(WeilDoc::from_algebra(s.thickening()))
            },
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct MorphismDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub source: SpaceDoc,
    pub target: SpaceDoc,
    pub components: Vec<PolyDoc>,
}

impl MorphismDoc {
    pub fn to_morphism(&self, default_k_max: u32) -> Result<FormalMorphism> {
        FormalMorphism::new(
            self.source.to_space(default_k_max)?,
            self.target.to_space(default_k_max)?,
            docs_to_polys(&self.components)?,
        )
    }

    pub fn from_morphism(m: &FormalMorphism) -> Self {
        MorphismDoc {
            name: None,
            source: SpaceDoc::from_space(m.source()),
            target: SpaceDoc::from_space(m.target()),
            components: polys_to_docs(&m.component_polys()),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct PairDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub iota: MorphismDoc,
    pub f: MorphismDoc,
}

impl PairDoc {
    pub fn to_pair(&self, default_k_max: u32) -> Result<FactorizationPair> {
        FactorizationPair::new(
            self.iota.to_morphism(default_k_max)?,
            self.f.to_morphism(default_k_max)?,
        )
    }

    pub fn from_pair(p: &FactorizationPair) -> Self {
        PairDoc {
            name: None,
            iota: MorphismDoc::from_morphism(p.iota()),
            f: MorphismDoc::from_morphism(p.f()),
        }
    }
}

/// Parses a jet coordinate key: "u[2,1]" when m = 1, "u3[2,1]" with a
/// 1-based fiber index otherwise.
pub fn parse_fiber_key(key: &str, m: usize, n: usize) -> Result<(usize, Vec<u32>)> {
    let fail = || KernelError::invalid(format!("invalid jet coordinate key {key}"));
    let rest = key.strip_prefix('u').ok_or_else(fail)?;
    let (a, idx) = if m == 1 {
        (1, rest)
    } else {
        let digits = rest.find('[').ok_or_else(fail)?;
        let a: usize = rest[..digits].parse().map_err(|_| fail())?;
        (a, &rest[digits..])
    };
    if a == 0 || a > m {
        return Err(fail());
    }
    let idx = idx.strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(fail)?;
    let sigma: Vec<u32> = idx
        .split(',')
        .map(|part| part.trim().parse::<u32>().map_err(|_| fail()))
        .collect::<Result<_>>()?;
    if sigma.len() != n {
        return Err(fail());
    }
    Ok((a, sigma))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct JetPointDoc {
    pub n: usize,
    pub m: usize,
    pub k: u32,
    pub base: Vec<String>,
    pub values: BTreeMap<String, String>,
}

impl JetPointDoc {
    pub fn to_jet(&self) -> Result<JetPoint> {
        let base: Vec<Rational> =
            self.base.iter().map(|b| parse_rational(b)).collect::<Result<_>>()?;
        let mut values = BTreeMap::new();
        for (key, value) in &self.values {
            let (a, sigma) = parse_fiber_key(key, self.m, self.n)?;
            values.insert((a, sigma), parse_rational(value)?);
        }
        JetPoint::new(self.n, self.m, self.k, base, values)
    }

    pub fn from_jet(j: &JetPoint) -> Self {
        JetPointDoc {
            n: j.n(),
            m: j.m(),
            k: j.k(),
            base: j.base().iter().map(|b| b.to_string()).collect(),
            values: j
                .values()
                .iter()
                .map(|((a, sigma), v)| (fiber_name(j.m(), *a, sigma), v.to_string()))
                .collect(),
        }
    }
}

fn format_sigma(sigma: &[u32]) -> String {
    let body: Vec<String> = sigma.iter().map(|e| e.to_string()).collect();
    format!("[{}]", body.join(","))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct HadamardDoc {
    pub f: PolyDoc,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub order: u32,
    pub taylor: BTreeMap<String, String>,
    pub remainders: BTreeMap<String, String>,
}

impl HadamardDoc {
    pub fn from_expansion(e: &HadamardExpansion) -> Self {
        HadamardDoc {
            f: PolyDoc::from_polynomial(&e.reconstruct()),
            x: e.x_vars().to_vec(),
            y: e.y_vars().to_vec(),
            order: e.order(),
            taylor: e
                .taylor()
                .iter()
                .map(|(sigma, p)| (format_sigma(sigma), p.to_string()))
                .collect(),
            remainders: e
                .remainders()
                .iter()
                .map(|(tau, p)| (format_sigma(tau), p.to_string()))
                .collect(),
        }
    }

    /// Re-expands the stored input; the taylor and remainder tables are
    /// recomputed rather than trusted.
    pub fn to_expansion(&self) -> Result<HadamardExpansion> {
        hadamard_expand(&self.f.to_polynomial()?, &self.x, &self.y, self.order)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ProPlotDoc {
    pub system: ProSystemDoc,
    pub source: SpaceDoc,
    pub levels: Vec<MorphismDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProSystemDoc {
    RInfinity,
    Jet { n: usize, m: usize },
}

impl ProPlotDoc {
    pub fn to_plot(&self, default_k_max: u32) -> Result<TruncatedProPlot> {
        let system = match self.system {
            ProSystemDoc::RInfinity => ProSystem::RInfinity,
            ProSystemDoc::Jet { n, m } => ProSystem::Jet { n, m },
        };
        let source = self.source.to_space(default_k_max)?;
        let levels: Vec<FormalMorphism> = self
            .levels
            .iter()
            .map(|l| l.to_morphism(default_k_max))
            .collect::<Result<_>>()?;
        TruncatedProPlot::new(system, source, levels)
    }

    pub fn from_plot(p: &TruncatedProPlot) -> Self {
        ProPlotDoc {
            system: match p.system() {
                ProSystem::RInfinity => ProSystemDoc::RInfinity,
                ProSystem::Jet { n, m } => ProSystemDoc::Jet { n, m },
            },
            source: SpaceDoc::from_space(p.source()),
            levels: p.levels().iter().map(MorphismDoc::from_morphism).collect(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct VerificationEntry {
    pub identity: String,
    pub status: String,
}

fn exact(identity: impl Into<String>) -> VerificationEntry {
    VerificationEntry { identity: identity.into(), status: "exact".into() }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct WitnessDoc {
    pub w: SpaceDoc,
    pub alpha: MorphismDoc,
    pub alpha_prime: MorphismDoc,
    pub phi: MorphismDoc,
    pub delta: Vec<PolyDoc>,
    pub mu: Vec<Vec<PolyDoc>>,
    pub h: Vec<PolyDoc>,
    pub verification: Vec<VerificationEntry>,
}

impl WitnessDoc {
    /// The span must already have passed verify against its pair of
    /// factorizations; the record lists the identities that check runs.
    pub fn from_span(s: &WitnessSpan) -> Self {
        WitnessDoc {
            w: SpaceDoc::from_space(&s.w),
            alpha: MorphismDoc::from_morphism(&s.alpha),
            alpha_prime: MorphismDoc::from_morphism(&s.alpha_prime),
            phi: MorphismDoc::from_morphism(&s.phi),
            delta: polys_to_docs(&s.delta),
            mu: s.mu.iter().map(|row| polys_to_docs(row)).collect(),
            h: polys_to_docs(&s.h),
            verification: vec![
                exact("phi_alpha_eq_f"),
                exact("phi_alpha_prime_eq_f_prime"),
                exact("alpha_iota_eq_alpha_prime_iota_prime"),
                exact("delta_definition"),
                exact("delta_eq_sum_h_mu"),
            ],
        }
    }

    /// Rebuilds the span. The morphism constructors validate their parts
    /// and the decomposition identity is rechecked; the identities
    /// involving the original factorizations need those factorizations and
    /// are not rerun here.
    pub fn to_span(&self, default_k_max: u32) -> Result<WitnessSpan> {
        let span = WitnessSpan {
            w: self.w.to_space(default_k_max)?,
            alpha: self.alpha.to_morphism(default_k_max)?,
            alpha_prime: self.alpha_prime.to_morphism(default_k_max)?,
            phi: self.phi.to_morphism(default_k_max)?,
            delta: docs_to_polys(&self.delta)?,
            mu: self
                .mu
                .iter()
                .map(|row| docs_to_polys(row))
                .collect::<Result<_>>()?,
            h: docs_to_polys(&self.h)?,
        };
        for (k, d) in span.delta.iter().enumerate() {
            let mut acc = Polynomial::zero();
            let row = span.mu.get(k).ok_or_else(|| {
                KernelError::invalid("mu must have one row per delta component")
            })?;
            for (hi, mi) in span.h.iter().zip(row) {
                acc = &acc + &(hi * mi);
            }
            if &acc != d {
                return Err(KernelError::WitnessViolation {
                    identity: "delta_eq_sum_h_mu".into(),
                });
            }
        }
        Ok(span)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct StepDoc {
    pub from: PairDoc,
    pub to: PairDoc,
    pub connecting: MorphismDoc,
    pub direction: String,
}

impl StepDoc {
    pub fn to_step(&self, default_k_max: u32) -> Result<RelationStep> {
        let direction = match self.direction.as_str() {
            "forward" => Direction::Forward,
            "backward" => Direction::Backward,
            other => {
                return Err(KernelError::invalid(format!("unknown direction {other}")));
            }
        };
        let step = RelationStep {
            from: self.from.to_pair(default_k_max)?,
            to: self.to.to_pair(default_k_max)?,
            connecting: self.connecting.to_morphism(default_k_max)?,
            direction,
        };
        step.verify()?;
        Ok(step)
    }

    pub fn from_step(s: &RelationStep) -> Self {
        StepDoc {
            from: PairDoc::from_pair(&s.from),
            to: PairDoc::from_pair(&s.to),
            connecting: MorphismDoc::from_morphism(&s.connecting),
            direction: match s.direction {
                Direction::Forward => "forward".into(),
                Direction::Backward => "backward".into(),
            },
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ChainDoc {
    pub left: PairDoc,
    pub right: PairDoc,
    pub steps: Vec<StepDoc>,
    pub verification: Vec<VerificationEntry>,
}

impl ChainDoc {
    pub fn from_chain(c: &EquivalenceChain) -> Self {
        let mut verification = vec![
            exact("chain_endpoints_match"),
            exact("chain_steps_adjacent"),
            exact("chain_composites_equal"),
        ];
        for i in 0..c.steps.len() {
            verification.push(exact(format!("step_{i}_connecting_iota_eq_iota")));
            verification.push(exact(format!("step_{i}_f_eq_f_connecting")));
        }
        ChainDoc {
            left: PairDoc::from_pair(&c.left),
            right: PairDoc::from_pair(&c.right),
            steps: c.steps.iter().map(StepDoc::from_step).collect(),
            verification,
        }
    }

    pub fn to_chain(&self, default_k_max: u32) -> Result<EquivalenceChain> {
        let chain = EquivalenceChain {
            left: self.left.to_pair(default_k_max)?,
            right: self.right.to_pair(default_k_max)?,
            steps: self
                .steps
                .iter()
                .map(|s| s.to_step(default_k_max))
                .collect::<Result<_>>()?,
        };
        chain.verify()?;
        Ok(chain)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct DecisionDoc {
    pub equivalent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainDoc>,
}

impl DecisionDoc {
    pub fn from_decision(d: &Decision) -> Self {
        match d {
            Decision::Equivalent(chain) => DecisionDoc {
                equivalent: true,
                component: None,
                chain: Some(ChainDoc::from_chain(chain)),
            },
            Decision::NotEquivalent { component } => DecisionDoc {
                equivalent: false,
                component: Some(*component),
                chain: None,
            },
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, Default)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub plot_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConfigDoc {
    pub fn k_max(&self) -> u32 {
        self.k_max.unwrap_or(DEFAULT_K_MAX)
    }
}

/// A named bag of objects with shared configuration. Loading it constructs
/// every entry, so the whole document is validated in one pass.
#[derive(Serialize, Deserialize, Clone, Debug, Default)]
pub struct WorkspaceDoc {
    #[serde(default)]
    pub config: ConfigDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algebras: Vec<WeilDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spaces: Vec<SpaceDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub morphisms: Vec<MorphismDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairDoc>,
}

#[derive(Clone, Debug)]
pub struct Workspace {
    pub config: ConfigDoc,
    pub algebras: BTreeMap<String, WeilAlgebra>,
    pub spaces: BTreeMap<String, FormalSpace>,
    pub morphisms: BTreeMap<String, FormalMorphism>,
    pub pairs: BTreeMap<String, FactorizationPair>,
}

fn named<T>(kind: &str, name: &Option<String>, value: T) -> Result<(String, T)> {
    match name {
        Some(n) => Ok((n.clone(), value)),
        None => Err(KernelError::invalid(format!("every workspace {kind} needs a name"))),
    }
}

fn insert_unique<T>(map: &mut BTreeMap<String, T>, kind: &str, name: String, value: T) -> Result<()> {
    if map.contains_key(&name) {
        return Err(KernelError::invalid(format!("duplicate {kind} name {name}")));
    }
    map.insert(name, value);
    Ok(())
}

impl Workspace {
    pub fn load(doc: &WorkspaceDoc) -> Result<Self> {
        let k_max = doc.config.k_max();
        let mut ws = Workspace {
            config: doc.config.clone(),
            algebras: BTreeMap::new(),
            spaces: BTreeMap::new(),
            morphisms: BTreeMap::new(),
            pairs: BTreeMap::new(),
        };
        for a in &doc.algebras {
            let built = a.to_algebra(k_max)?;
            let (name, built) = named("algebra", &a.name, built)?;
            insert_unique(&mut ws.algebras, "algebra", name, built)?;
        }
        for s in &doc.spaces {
            let built = s.to_space(k_max)?;
            let (name, built) = named("space", &s.name, built)?;
            insert_unique(&mut ws.spaces, "space", name, built)?;
        }
        for m in &doc.morphisms {
            let built = m.to_morphism(k_max)?;
            let (name, built) = named("morphism", &m.name, built)?;
            insert_unique(&mut ws.morphisms, "morphism", name, built)?;
        }
        for p in &doc.pairs {
            let built = p.to_pair(k_max)?;
            let (name, built) = named("pair", &p.name, built)?;
            insert_unique(&mut ws.pairs, "pair", name, built)?;
        }
        Ok(ws)
    }

    pub fn to_doc(&self) -> WorkspaceDoc {
        WorkspaceDoc {
            config: self.config.clone(),
            algebras: self
                .algebras
                .iter()
                .map(|(n, a)| {
                    let mut doc = WeilDoc::from_algebra(a);
                    doc.name = Some(n.clone());
                    doc
                })
                .collect(),
            spaces: self
                .spaces
                .iter()
                .map(|(n, s)| {
                    let mut doc = SpaceDoc::from_space(s);
                    doc.name = Some(n.clone());
                    doc
                })
                .collect(),
            morphisms: self
                .morphisms
                .iter()
                .map(|(n, m)| {
                    let mut doc = MorphismDoc::from_morphism(m);
                    doc.name = Some(n.clone());
                    doc
                })
                .collect(),
            pairs: self
                .pairs
                .iter()
                .map(|(n, p)| {
                    let mut doc = PairDoc::from_pair(p);
                    doc.name = Some(n.clone());
                    doc
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{decide_equivalence, lift_plot, witness_point};
    use crate::jets::prolong;
    use crate::rational::rat;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn reload<T: Serialize + for<'de> Deserialize<'de>>(doc: &T) -> T {
        let text = serde_json::to_string_pretty(doc).unwrap();
        serde_json::from_str(&text).unwrap()
    }

    #[test]
    fn structured_polynomial_form() {
        let doc: PolyDoc = serde_json::from_str(
            r#"{"vars": ["x"], "terms": [{"coeff": "3/2", "exp": {"x": 2}}, {"coeff": "-1", "exp": {}}]}"#,
        )
        .unwrap();
        assert_eq!(doc.to_polynomial().unwrap(), p("3/2*x^2 - 1"));

        let text: PolyDoc = serde_json::from_str(r#""3/2*x^2 - 1""#).unwrap();
        assert_eq!(text.to_polynomial().unwrap(), p("3/2*x^2 - 1"));

        let dto = PolynomialDto::from_polynomial(&p("2*x*y - 1/3"));
        assert_eq!(reload(&dto).to_polynomial().unwrap(), p("2*x*y - 1/3"));
    }

    #[test]
    fn weil_doc_roundtrip() {
        let a = WeilAlgebra::new(
            "M",
            vec!["x".into(), "y".into()],
            vec![p("x^2"), p("x*y"), p("y^3")],
            8,
        )
        .unwrap();
        let doc = WeilDoc::from_algebra(&a);
        assert_eq!(doc.dim, Some(4));
        let back = reload(&doc).to_algebra(DEFAULT_K_MAX).unwrap();
        assert_eq!(back, a);

        let short_form: WeilDoc =
            serde_json::from_str(r#"{"d": 1, "generators": ["x^2"], "name": "D1_1"}"#).unwrap();
        let built = short_form.to_algebra(DEFAULT_K_MAX).unwrap();
        assert_eq!(built.dim(), 2);
        assert_eq!(built.k(), 1);

        let wrong_d: WeilDoc =
            serde_json::from_str(r#"{"d": 2, "generators": ["x^2"]}"#).unwrap();
        assert!(wrong_d.to_algebra(DEFAULT_K_MAX).is_err());
    }

    #[test]
    fn space_and_morphism_docs_roundtrip() {
        let disk = WeilAlgebra::disk(2, 1);
        let space = FormalSpace::new("UxD", vec!["u".into()], disk).unwrap();
        let doc = SpaceDoc::from_space(&space);
        assert_eq!(reload(&doc).to_space(DEFAULT_K_MAX).unwrap(), space);

        let cart = FormalSpace::cartesian("V", vec!["a".into(), "b".into()]).unwrap();
        let doc = SpaceDoc::from_space(&cart);
        assert!(doc.thickening.is_none());
        assert_eq!(reload(&doc).to_space(DEFAULT_K_MAX).unwrap(), cart);

        let m = FormalMorphism::new(
            space.clone(),
            cart.clone(),
            vec![p("u + e1"), p("e1*e2")],
        )
        .unwrap();
        let doc = MorphismDoc::from_morphism(&m);
        assert_eq!(reload(&doc).to_morphism(DEFAULT_K_MAX).unwrap(), m);

        // invalid components are rejected by the constructor on load
        let mut bad = doc.clone();
        bad.components.push(PolyDoc::Text("u".into()));
        assert!(bad.to_morphism(DEFAULT_K_MAX).is_err());
    }

    #[test]
    fn jet_point_doc_roundtrip() {
        let jet = prolong(
            &[p("x1^2*x2"), p("x1 + x2")],
            &["x1".into(), "x2".into()],
            2,
            &[rat(1), rat(2)],
        )
        .unwrap();
        let doc = JetPointDoc::from_jet(&jet);
        assert!(doc.values.contains_key("u1[2,0]"));
        assert_eq!(reload(&doc).to_jet().unwrap(), jet);

        let single = prolong(&[p("x1^3")], &["x1".into()], 2, &[rat(2)]).unwrap();
        let doc = JetPointDoc::from_jet(&single);
        assert!(doc.values.contains_key("u[2]"));
        assert_eq!(doc.values["u[2]"], "12");
        assert_eq!(reload(&doc).to_jet().unwrap(), single);

        let mut broken = doc.clone();
        broken.values.remove("u[2]");
        assert!(broken.to_jet().is_err());
    }

    #[test]
    fn fiber_key_parsing() {
        assert_eq!(parse_fiber_key("u[2,1]", 1, 2).unwrap(), (1, vec![2, 1]));
        assert_eq!(parse_fiber_key("u3[0,0,4]", 3, 3).unwrap(), (3, vec![0, 0, 4]));
        assert!(parse_fiber_key("u[2,1]", 2, 2).is_err());
        assert!(parse_fiber_key("u0[1]", 2, 1).is_err());
        assert!(parse_fiber_key("v[1]", 1, 1).is_err());
        assert!(parse_fiber_key("u[1,2]", 1, 3).is_err());
    }

    #[test]
    fn hadamard_doc_roundtrip() {
        let e = hadamard_expand(
            &p("u*t^2 + u + t^3"),
            &["u".into()],
            &["t".into()],
            1,
        )
        .unwrap();
        let doc = HadamardDoc::from_expansion(&e);
        let back = reload(&doc).to_expansion().unwrap();
        assert_eq!(back.taylor(), e.taylor());
        assert_eq!(back.remainders(), e.remainders());
        assert_eq!(back.reconstruct(), p("u*t^2 + u + t^3"));
    }

    #[test]
    fn pro_plot_doc_roundtrip() {
        let disk = WeilAlgebra::disk(1, 3).with_name("D");
        let space = FormalSpace::new("UxD", vec!["u".into()], disk).unwrap();
        let levels: Vec<FormalMorphism> = (1..=3)
            .map(|k| {
                let comps = (1..=k).map(|i| p(&format!("u^{i} + e1"))).collect();
                FormalMorphism::new(space.clone(), FormalSpace::standard_r(k), comps).unwrap()
            })
            .collect();
        let plot = TruncatedProPlot::new(ProSystem::RInfinity, space, levels).unwrap();
        let doc = ProPlotDoc::from_plot(&plot);
        assert_eq!(reload(&doc).to_plot(DEFAULT_K_MAX).unwrap(), plot);
    }

    #[test]
    fn witness_doc_carries_the_record() {
        let algebra = WeilAlgebra::new("D", vec!["t".into()], vec![p("t^2")], 4).unwrap();
        let disk = FormalSpace::thickened_point(algebra);
        let v = FormalSpace::cartesian("V", vec!["t".into(), "x".into()]).unwrap();
        let iota = FormalMorphism::new(disk.clone(), v.clone(), vec![p("t"), p("0")]).unwrap();
        let r1 = FormalSpace::standard_r(1);
        let f = FormalMorphism::new(v.clone(), r1.clone(), vec![p("t + x")]).unwrap();
        let f_prime = FormalMorphism::new(v.clone(), r1, vec![p("t + x + t^2")]).unwrap();
        let span = witness_point(&iota, &f, &iota, &f_prime).unwrap();

        let doc = WitnessDoc::from_span(&span);
        assert!(doc.verification.iter().all(|v| v.status == "exact"));
        let back = reload(&doc).to_span(DEFAULT_K_MAX).unwrap();
        assert_eq!(back.phi.component_polys(), span.phi.component_polys());
        assert_eq!(back.delta, span.delta);

        let mut corrupt = doc.clone();
        corrupt.mu[0][0] = PolyDoc::Text("t".into());
        assert!(matches!(
            corrupt.to_span(DEFAULT_K_MAX),
            Err(KernelError::WitnessViolation { .. })
        ));
    }

    #[test]
    fn chain_doc_roundtrip() {
        let algebra = WeilAlgebra::new("D", vec!["t".into()], vec![p("t^2")], 4).unwrap();
        let disk = FormalSpace::thickened_point(algebra);
        let plot = FormalMorphism::new(
            disk.clone(),
            FormalSpace::standard_r(1),
            vec![p("t")],
        )
        .unwrap();
        let pair = lift_plot(&plot).unwrap();
        let v = FormalSpace::cartesian("V", vec!["t".into(), "x".into()]).unwrap();
        let other = FactorizationPair::new(
            FormalMorphism::new(disk, v.clone(), vec![p("t"), p("0")]).unwrap(),
            FormalMorphism::new(v, FormalSpace::standard_r(1), vec![p("t + x + t^2")]).unwrap(),
        )
        .unwrap();
        let decision = decide_equivalence(&pair, &other).unwrap();
        let doc = DecisionDoc::from_decision(&decision);
        assert!(doc.equivalent);
        let chain_doc = doc.chain.unwrap();
        assert_eq!(chain_doc.steps.len(), 8);
        assert!(chain_doc.verification.iter().all(|v| v.status == "exact"));
        let back = reload(&chain_doc).to_chain(DEFAULT_K_MAX).unwrap();
        back.verify().unwrap();
        assert_eq!(back.steps.len(), 8);

        // breaking one connecting map is caught on load
        let mut corrupt = chain_doc.clone();
        corrupt.steps[1].connecting.components[0] = PolyDoc::Text("0".into());
        assert!(reload(&corrupt).to_chain(DEFAULT_K_MAX).is_err());
    }

    #[test]
    fn workspace_loads_and_validates() {
        let text = r#"{
            "config": {"k_max": 8, "K": 2, "seed": 7},
            "algebras": [{"name": "D1", "generators": ["t^2"]}],
            "spaces": [
                {"name": "disk", "thickening": {"generators": ["t^2"]}},
                {"name": "V", "params": ["t", "x"]}
            ],
            "morphisms": [{
                "name": "iota",
                "source": {"name": "disk", "thickening": {"generators": ["t^2"]}},
                "target": {"name": "V", "params": ["t", "x"]},
                "components": ["t", "0"]
            }],
            "pairs": [{
                "name": "p",
                "iota": {
                    "source": {"thickening": {"generators": ["t^2"]}},
                    "target": {"name": "V", "params": ["t", "x"]},
                    "components": ["t", "0"]
                },
                "f": {
                    "source": {"name": "V", "params": ["t", "x"]},
                    "target": {"name": "R", "params": ["y1"]},
                    "components": ["t + x"]
                }
            }]
        }"#;
        let doc: WorkspaceDoc = serde_json::from_str(text).unwrap();
        let ws = Workspace::load(&doc).unwrap();
        assert_eq!(ws.algebras["D1"].dim(), 2);
        assert_eq!(ws.pairs["p"].composite().component_polys(), vec![p("t")]);

        let saved = ws.to_doc();
        let reloaded = Workspace::load(&reload(&saved)).unwrap();
        assert_eq!(reloaded.algebras["D1"], ws.algebras["D1"]);
        assert_eq!(reloaded.morphisms["iota"], ws.morphisms["iota"]);
        assert_eq!(reloaded.pairs["p"], ws.pairs["p"]);

        let mut dup = doc.clone();
        dup.algebras.push(dup.algebras[0].clone());
        assert!(Workspace::load(&dup).is_err());

        let mut nameless = doc.clone();
        nameless.spaces[0].name = None;
        assert!(Workspace::load(&nameless).is_err());

        let mut invalid = doc;
        invalid.algebras[0].generators = vec![PolyDoc::Text("t^2 + 1".into())];
        assert!(Workspace::load(&invalid).is_err());
    }
}
